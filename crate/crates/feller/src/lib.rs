//! Simulation of Feller processes by the symbol-frozen Euler scheme.
//!
//! Conditioned on the current state `x`, one step of the scheme over time `h`
//! adds an increment of the Lévy process whose characteristic exponent is
//! `ξ ↦ q(x, ξ)`, so the step has characteristic function
//! `e^{i x'ξ} e^{-h q(x, ξ)}`. This crate provides:
//!
//! - [`symbol`]: state-dependent symbols, their Lévy triplets, closed-form and
//!   quadrature evaluation, and numerical condition checks;
//! - [`sampler`]: exact and truncated samplers for a single Lévy increment
//!   with frozen triplet;
//! - [`engine`]: path and ensemble generation with reproducible parallelism;
//! - [`validation`]: the statistical harness (empirical characteristic
//!   functions, KS and Poisson-count tests, convergence studies, the
//!   state-dependence experiment);
//! - [`rng`]: counter-based random streams;
//! - [`quad`]: the adaptive quadrature underneath symbol evaluation.

pub mod engine;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod symbol;
pub mod validation;

pub use engine::{Ensemble, EulerEngine, Path, SimulationSpec};
pub use rng::RngStream;
pub use sampler::{build_sampler, sample_stable, IncrementSampler, SamplerConfig, SmallJumpPolicy};
pub use symbol::{
    symbol_from_sde, Family, JumpDistribution, JumpMeasureSpec, LevyTriplet, StateDependentSymbol,
};
