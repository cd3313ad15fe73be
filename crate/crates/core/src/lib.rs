//! Spin-weighted harmonic analysis on the sphere: harmonics and transforms,
//! needlet-style wavelet frames, Gaussian isotropic spin random fields, and
//! the quadratic scale statistics built on them.

mod dd;

pub mod error;
pub mod fields;
pub mod geom;
pub mod harmonics;
pub mod io;
pub mod needlet;
pub mod reduce;
pub mod stats;

pub use error::{Error, Result};
pub use fields::{power_law_spectrum, sample_field, PowerSpectrum};
pub use geom::{
    build_partition, build_quadrature, geodesic_distance, reference_angle, Partition,
    QuadratureGrid, Rotation, SpherePoint,
};
pub use harmonics::{
    analysis, eigen, em_decompose, eval_sylm, laplacian_s, pole_functional, projection_kernel,
    rotate_coefficients, spin_lower, spin_raise, synthesis, zonal_coefficients, GridField,
    SpinCoefficients,
};
pub use needlet::{
    build_filter, build_frame, daubechies_bounds, frame_bound_estimate, localization_probe,
    needlet_kernel, wavelet_coefficients, NeedletFilter, NeedletFrame, WaveletCoefficients,
};
pub use stats::{gamma_hat, gamma_hat_moments, gamma_j, gamma_tilde, s_statistic, TestResult};
