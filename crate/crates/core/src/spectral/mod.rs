//! Dense eigendecomposition, empirical spectral measures and the
//! semicircle law of tensor contractions.

mod eigh;
mod measure;
mod semicircle;

pub use eigh::{eigh, eigvalsh, Eigh, SYMMETRY_TOL};
pub use measure::{
    empirical_spectral_measure, plot_range, resolvent_trace, resolvent_trace_real, Histogram,
    SpectralMeasure, RESOLVENT_POLE_TOL,
};
pub use semicircle::{
    beta, semicircle_density, semicircle_stieltjes, semicircle_stieltjes_real, SemicircleLaw,
};
