//! Ensembles of interpolated block models built from drill samples, their
//! consensus (aggregate) model and per-block uncertainty.

mod ensemble;
mod idw;
mod io;
mod network;

pub use ensemble::{aggregate, build_ensemble, drillholes, member_plan, uncertainty_field, Ensemble, MemberPlan, UncertaintyField};
pub use idw::{idw_interpolate, Idw};
pub use io::{load_ensemble, load_uncertainty, save_ensemble, save_uncertainty};
pub use network::{train_network, NetworkInterpolator, TrainingSet};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterpolationMethod {
    Idw,
    Network,
}

impl InterpolationMethod {
    pub fn name(self) -> &'static str {
        match self {
            InterpolationMethod::Idw => "idw",
            InterpolationMethod::Network => "network",
        }
    }
}

impl std::str::FromStr for InterpolationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "idw" => Ok(InterpolationMethod::Idw),
            "network" => Ok(InterpolationMethod::Network),
            other => Err(Error::Invalid(format!("unknown interpolation method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolatorConfig {
    pub method: InterpolationMethod,
    pub idw_power: f64,
    pub idw_max_neighbors: usize,
    /// Members draw their power uniformly from `power * (1 ± jitter)`.
    pub idw_power_jitter: f64,
    /// Fraction of drillholes each IDW member draws without replacement.
    pub bootstrap_fraction: f64,
    pub net_hidden_layers: Vec<usize>,
    /// Training stops once the loss reaches this value.
    pub net_fit_tolerance: f64,
    pub net_max_epochs: usize,
    pub learning_rate: f64,
}

impl Default for InterpolatorConfig {
    fn default() -> Self {
        InterpolatorConfig {
            method: InterpolationMethod::Idw,
            idw_power: 2.0,
            idw_max_neighbors: 12,
            idw_power_jitter: 0.25,
            bootstrap_fraction: 0.8,
            net_hidden_layers: vec![16, 16],
            net_fit_tolerance: 0.05,
            net_max_epochs: 3000,
            learning_rate: 0.05,
        }
    }
}

impl InterpolatorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invalid(m));
        if !(self.idw_power.is_finite() && self.idw_power > 0.0) {
            return bad(format!("idw_power {} must be > 0", self.idw_power));
        }
        if self.idw_max_neighbors == 0 {
            return bad("idw_max_neighbors must be >= 1".to_string());
        }
        if !(0.0..1.0).contains(&self.idw_power_jitter) {
            return bad(format!("idw_power_jitter {} outside [0, 1)", self.idw_power_jitter));
        }
        if !(self.bootstrap_fraction > 0.0 && self.bootstrap_fraction <= 1.0) {
            return bad(format!("bootstrap_fraction {} outside (0, 1]", self.bootstrap_fraction));
        }
        if self.net_hidden_layers.contains(&0) {
            return bad("hidden layer widths must be >= 1".to_string());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate {} must be > 0", self.learning_rate));
        }
        if !(self.net_fit_tolerance.is_finite() && self.net_fit_tolerance >= 0.0) {
            return bad(format!("net_fit_tolerance {} must be >= 0", self.net_fit_tolerance));
        }
        Ok(())
    }
}
