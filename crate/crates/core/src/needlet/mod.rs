//! Needlet-type spin wavelet frames: filter construction, frame assembly,
//! frame operators, and localization probes.

pub mod filter;
pub mod frame;
pub mod probe;

pub use filter::{daubechies_bounds, NeedletFilter};
pub use frame::{
    build_frame, frame_bound_estimate, wavelet_coefficients, FrameBounds, NeedletFrame, Scale,
    WaveletCoefficients,
};
pub use probe::{localization_probe, needlet_kernel, DecayRow, LocalizationReport};

/// Convenience constructor mirroring the filter recipe.
pub fn build_filter(a: f64) -> NeedletFilter {
    NeedletFilter::new(a)
}
