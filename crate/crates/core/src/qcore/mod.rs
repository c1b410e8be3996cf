//! Numerical substrate: 2x2 complex algebra, qubit states, trace distance
//! and integer-order Bessel functions.

pub mod bessel;
pub mod matrix;
pub mod params;
pub mod state;

pub use bessel::{bessel_j, bessel_roots};
pub use matrix::Mat2;
pub use params::{SystemParams, DEFAULT_OMEGA0};
pub use state::{plus_x_pair, trace_distance, DensityMatrix};
