use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Dense complex 2x2 matrix in the `{|0>, |1>}` basis, row-major.
///
/// `|0>` is the excited level: `sigma_plus() = |0><1|` and the system
/// Hamiltonian is proportional to `excited_projector() = |0><0|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub e: [C64; 4],
}

impl Mat2 {
    pub const fn new(a00: C64, a01: C64, a10: C64, a11: C64) -> Self {
        Self {
            e: [a00, a01, a10, a11],
        }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn sigma_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn sigma_y() -> Self {
        Self::new(ZERO, -I, I, ZERO)
    }

    pub const fn sigma_z() -> Self {
        Self::new(ONE, ZERO, ZERO, C64::new(-1.0, 0.0))
    }

    /// Raising operator `|0><1|`.
    pub const fn sigma_plus() -> Self {
        Self::new(ZERO, ONE, ZERO, ZERO)
    }

    /// Lowering operator `|1><0|`.
    pub const fn sigma_minus() -> Self {
        Self::new(ZERO, ZERO, ONE, ZERO)
    }

    /// `sigma_plus * sigma_minus = |0><0|`.
    pub const fn excited_projector() -> Self {
        Self::new(ONE, ZERO, ZERO, ZERO)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.e[2 * row + col]
    }

    #[inline]
    pub fn trace(&self) -> C64 {
        self.e[0] + self.e[3]
    }

    #[inline]
    pub fn adjoint(&self) -> Self {
        let [a, b, c, d] = self.e;
        Self::new(a.conj(), c.conj(), b.conj(), d.conj())
    }

    #[inline]
    pub fn scale(&self, s: C64) -> Self {
        let [a, b, c, d] = self.e;
        Self::new(a * s, b * s, c * s, d * s)
    }

    /// `A^x B = [A, B]`
    #[inline]
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// `A^o B = {A, B}`
    #[inline]
    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.e.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        (*self - self.adjoint()).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Eigenvalues `(low, high)` of the Hermitian part of the matrix.
    pub fn hermitian_eigenvalues(&self) -> (f64, f64) {
        let a = self.e[0].re;
        let d = self.e[3].re;
        let b = 0.5 * (self.e[1] + self.e[2].conj());
        let mean = 0.5 * (a + d);
        let half_gap = 0.5 * (a - d);
        let radius = half_gap.hypot(b.norm());
        (mean - radius, mean + radius)
    }

    /// Trace norm `tr sqrt(A^dagger A)` of the Hermitian part.
    pub fn hermitian_trace_norm(&self) -> f64 {
        let (lo, hi) = self.hermitian_eigenvalues();
        lo.abs() + hi.abs()
    }

    /// Pack into `[re, im]` pairs, appending 8 values.
    pub fn write_real(&self, out: &mut [f64]) {
        for (k, z) in self.e.iter().enumerate() {
            out[2 * k] = z.re;
            out[2 * k + 1] = z.im;
        }
    }

    pub fn read_real(src: &[f64]) -> Self {
        let z = |k: usize| C64::new(src[2 * k], src[2 * k + 1]);
        Self::new(z(0), z(1), z(2), z(3))
    }
}

impl Add for Mat2 {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let mut e = self.e;
        for (x, y) in e.iter_mut().zip(rhs.e) {
            *x += y;
        }
        Self { e }
    }
}

impl AddAssign for Mat2 {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        for (x, y) in self.e.iter_mut().zip(rhs.e) {
            *x += y;
        }
    }
}

impl Sub for Mat2 {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let mut e = self.e;
        for (x, y) in e.iter_mut().zip(rhs.e) {
            *x -= y;
        }
        Self { e }
    }
}

impl Neg for Mat2 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let [a, b, c, d] = self.e;
        let [p, q, r, s] = rhs.e;
        Self::new(a * p + b * r, a * q + b * s, c * p + d * r, c * q + d * s)
    }
}

impl Mul<C64> for Mat2 {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: C64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        self.scale(C64::new(rhs, 0.0))
    }
}
