use num_complex::Complex64 as C64;

use super::matrix::Mat2;
use crate::error::{Error, Result};

/// Allowed deviation of a physical trace from one.
pub const TRACE_TOL: f64 = 1e-9;
/// Allowed anti-Hermitian residue.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Most negative eigenvalue still accepted as physical.
pub const POSITIVITY_TOL: f64 = -1e-7;

/// Hermitian 2x2 matrix interpreted as a qubit state (or a difference of
/// states). Construction only checks hermiticity; [`DensityMatrix::physical`]
/// additionally checks unit trace and positivity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    pub fn new(m: Mat2) -> Result<Self> {
        let err = m.hermiticity_error();
        if err > HERMITIAN_TOL {
            return Err(Error::Contract(format!(
                "matrix is not Hermitian (residue {err:.3e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn physical(m: Mat2) -> Result<Self> {
        let rho = Self::new(m)?;
        let tr = m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Contract(format!("trace {tr} differs from 1")));
        }
        let lo = rho.min_eigenvalue();
        if lo < POSITIVITY_TOL {
            return Err(Error::Contract(format!("negative eigenvalue {lo:.3e}")));
        }
        Ok(rho)
    }

    /// Pure state `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
    pub fn bloch(theta: f64, phi: f64) -> Self {
        let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
        let off = C64::from_polar(c * s, -phi);
        Self(Mat2::new(
            C64::new(c * c, 0.0),
            off,
            off.conj(),
            C64::new(s * s, 0.0),
        ))
    }

    pub fn ground() -> Self {
        Self(Mat2::new(
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        ))
    }

    pub fn excited() -> Self {
        Self(Mat2::excited_projector())
    }

    pub fn maximally_mixed() -> Self {
        Self(Mat2::identity() * 0.5)
    }

    #[inline]
    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    #[inline]
    pub fn into_matrix(self) -> Mat2 {
        self.0
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0.get(row, col)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        self.0.hermitian_eigenvalues()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().0
    }

    /// Conjugate by a unitary: `U rho U^dagger`.
    pub fn conjugate(&self, u: &Mat2) -> Self {
        Self(*u * self.0 * u.adjoint())
    }
}

/// `(|+x><+x|, |-x><-x|)`, the eigenprojectors of sigma_x.
pub fn plus_x_pair() -> (DensityMatrix, DensityMatrix) {
    let h = C64::new(0.5, 0.0);
    (
        DensityMatrix(Mat2::new(h, h, h, h)),
        DensityMatrix(Mat2::new(h, -h, -h, h)),
    )
}

/// Half the trace norm of a Hermitian difference matrix.
///
/// For `[[a, b], [conj b, -a]] + c I` the eigenvalues are `c +- sqrt(a^2 + |b|^2)`.
pub fn half_trace_norm(diff: &Mat2) -> f64 {
    0.5 * diff.hermitian_trace_norm()
}

/// `D(rho1, rho2) = ||rho1 - rho2||_1 / 2`.
pub fn trace_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> f64 {
    half_trace_norm(&(rho1.0 - rho2.0))
}

/// Trace distance on raw matrices, checking hermiticity first.
pub fn trace_distance_checked(rho1: &Mat2, rho2: &Mat2) -> Result<f64> {
    Ok(trace_distance(
        &DensityMatrix::new(*rho1)?,
        &DensityMatrix::new(*rho2)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_states_have_zero_distance() {
        let rho = DensityMatrix::bloch(0.7, 1.3);
        assert_eq!(trace_distance(&rho, &rho), 0.0);
    }

    #[test]
    fn orthogonal_pair_has_unit_distance() {
        let (p, m) = plus_x_pair();
        assert!((trace_distance(&p, &m) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn excited_vs_mixed_is_one_half() {
        let d = trace_distance(&DensityMatrix::excited(), &DensityMatrix::maximally_mixed());
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn plus_x_pair_properties() {
        let (p, m) = plus_x_pair();
        assert_eq!((p.get(0, 0).re, p.get(1, 1).re), (0.5, 0.5));
        assert_eq!(p.get(0, 1).re, 0.5);
        assert_eq!(m.get(0, 1).re, -0.5);
        for s in [p, m] {
            assert!((s.trace() - 1.0).abs() < 1e-15);
            assert!((s.purity() - 1.0).abs() < 1e-15);
        }
        let sum = *p.matrix() + *m.matrix();
        assert!((sum - Mat2::identity()).max_abs() < 1e-15);
        let b = DensityMatrix::bloch(std::f64::consts::FRAC_PI_2, 0.0);
        assert!((*b.matrix() - *p.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let bad = Mat2::sigma_plus();
        assert!(matches!(
            trace_distance_checked(&bad, &Mat2::identity()),
            Err(Error::Contract(_))
        ));
        assert!(DensityMatrix::new(bad).is_err());
    }

    #[test]
    fn physical_checks() {
        assert!(DensityMatrix::physical(Mat2::identity()).is_err());
        assert!(DensityMatrix::physical(Mat2::sigma_z() * 0.5 + Mat2::identity() * 0.5).is_ok());
        assert!(DensityMatrix::physical(Mat2::sigma_z() + Mat2::identity() * 0.5).is_err());
    }
}
