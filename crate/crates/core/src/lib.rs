//! Entanglement formation in two coupled kicked rotors, and the comparison
//! of its Schmidt spectra with the Laguerre unitary ensemble.
//!
//! - [`dynamics`]: exact split-step Floquet propagation on the `N × N` torus.
//! - [`schmidt`]: Schmidt weights, von Neumann entropy, saturation detection.
//! - [`laguerre`]: analytic kernel, one-level density, unfolding and the
//!   renormalized two-level cluster function; the GUE Wigner surmise.
//! - [`sampler`]: Laguerre and GUE matrix samplers used as Monte Carlo oracles.
//! - [`stats`]: histogram estimators of `R₁`, `R₂`, `T̄₂` and spacing laws.
//! - [`pipeline`]: ensemble protocols, file formats and analysis tables.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod config;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod laguerre;
pub mod pipeline;
pub mod quadrature;
pub mod sampler;
pub mod schmidt;
pub mod stats;

pub use config::RunConfig;
pub use dynamics::{
    build_coherent_product, evolve, floquet_step, CoherentStateSpec, FloquetPropagator, LatticeConfig, SplitOrder,
    SystemParams, WaveFunction2D,
};
pub use ensemble::{BurnIn, EnsembleMetadata, InitialCondition, Source, SpectraEnsemble};
pub use error::{Error, Result};
pub use laguerre::{build_unfolding, phi, wigner_surmise_gue, wigner_surmise_gue_cdf, LaguerreKernel, UnfoldingMap};
pub use sampler::{sample_gue_unfolded_spacings, sample_lue_spectrum, stream_rng, SamplerConfig};
pub use schmidt::{
    detect_saturation, scale_spectrum, schmidt_decompose, von_neumann_entropy, ScaledSpectrum, SchmidtSpectrum,
};
pub use stats::{
    estimate_r1, estimate_r2, estimate_renormalized_cluster, ks_distance, spacing_distribution, BinnedEstimate,
    BinnedEstimate2D, ClusterOptions, Regime, SpacingHistogram,
};
