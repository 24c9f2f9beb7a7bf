//! Lifetime-spectrum laboratory: the observable-rate model
//! λ_obs(t) = κ(t)·λ_T + λ_pickoff(t), deterministic spectrum synthesis, a
//! binned-Poisson maximum-likelihood fitter, and the bias/detectability
//! studies built on them.
//!
//! Conventions: times in ns, rates in µs⁻¹ at every public boundary.

mod fit;
mod model;
mod studies;
mod synth;

pub use fit::{fit_binned, fit_spectrum, FitComponent, FitResult, FitTemplate, FittedParam, Param};
pub use model::RateModel;
pub use studies::{
    expected_counts, extra_mode_detectability, thermalization_bias_study, BiasStudy, Detectability,
};
pub use synth::{synthesize, LifetimeSpectrum, SpectrumModel};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpectrumError {
    #[error("degenerate model: no components and no background")]
    DegenerateModel,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("template has no free parameters")]
    NoFreeParameters,
    #[error("singular curvature at the optimum")]
    SingularCurvature,
    #[error("extra-mode contribution {0} outside [0, 0.01]")]
    InvalidContribution(f64),
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}
