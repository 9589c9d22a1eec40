use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LcrError, Result};
use crate::grid::Shape;
use crate::parallel::Execution;

pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_TAU: usize = 2;
/// `η = c·λ` when only λ is given.
pub const DEFAULT_ETA_RATIO: f64 = 1e2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// One series.
    Lcr1d,
    /// Series × time matrix with a separable kernel.
    Lcr2d,
    /// Height × width × channel image.
    Lcr3d,
    /// Each row of a matrix solved independently.
    #[value(name = "lcr-n")]
    #[serde(rename = "lcr-n")]
    LcrN,
    /// Matrix flattened series after series into one long vector.
    #[value(name = "lcr-vec")]
    #[serde(rename = "lcr-vec")]
    LcrVec,
    /// Nuclear norm only (γ = 0).
    #[value(name = "circnnm")]
    #[serde(rename = "circnnm")]
    CircNnm,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Lcr1d => "lcr1d",
            Variant::Lcr2d => "lcr2d",
            Variant::Lcr3d => "lcr3d",
            Variant::LcrN => "lcr-n",
            Variant::LcrVec => "lcr-vec",
            Variant::CircNnm => "circnnm",
        }
    }

    /// Required input rank, or `None` when any rank works.
    pub fn expected_rank(self) -> Option<usize> {
        match self {
            Variant::Lcr1d => Some(1),
            Variant::Lcr2d | Variant::LcrN | Variant::LcrVec => Some(2),
            Variant::Lcr3d => Some(3),
            Variant::CircNnm => None,
        }
    }

    /// Regularized variant whose γ = 0 run matches CircNNM on a grid of
    /// this rank.
    pub fn circnnm_counterpart(rank: usize) -> Variant {
        match rank {
            1 => Variant::Lcr1d,
            2 => Variant::LcrVec,
            _ => Variant::Lcr3d,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub variant: Variant,
    pub lambda: f64,
    pub gamma: f64,
    /// Observation-fit weight. Infinity pins observed entries exactly.
    #[serde(with = "eta_serde")]
    pub eta: f64,
    pub tau: usize,
    pub max_iter: usize,
    pub tol: f64,
    #[serde(default)]
    pub record_objective: bool,
    #[serde(default)]
    pub execution: Execution,
}

impl SolverConfig {
    /// `λ` with the default η ratio, no regularization, and default
    /// iteration controls.
    pub fn new(variant: Variant, lambda: f64) -> Self {
        SolverConfig {
            variant,
            lambda,
            gamma: 0.0,
            eta: DEFAULT_ETA_RATIO * lambda,
            tau: DEFAULT_TAU,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            record_objective: false,
            execution: Execution::default(),
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_tau(mut self, tau: usize) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_objective_trace(mut self, on: bool) -> Self {
        self.record_objective = on;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn exact_constraint(&self) -> bool {
        self.eta.is_infinite()
    }

    /// γ actually used by the loop: CircNNM ignores the configured value.
    pub fn effective_gamma(&self) -> f64 {
        if self.variant == Variant::CircNnm {
            0.0
        } else {
            self.gamma
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LcrError::InvalidConfig(msg));
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return bad(format!("lambda must be positive and finite, got {}", self.lambda));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return bad(format!("gamma must be nonnegative and finite, got {}", self.gamma));
        }
        if self.eta.is_nan() || self.eta <= 0.0 {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if self.max_iter < 1 {
            return bad("max_iter must be at least 1".into());
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad(format!("tol must be positive and finite, got {}", self.tol));
        }
        if self.tau == 0 {
            return Err(LcrError::InvalidTau { tau: 0, len: 0 });
        }
        Ok(())
    }
}

/// Named hyperparameter rules. Values scale with the problem size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// λ = 5e-3·T, η = 1e3·λ, γ = 2λ, τ = 2.
    Lcr1d,
    /// As `lcr1d` with observed entries held exactly.
    #[value(name = "lcr1d-exact")]
    #[serde(rename = "lcr1d-exact")]
    Lcr1dExact,
    /// λ = 1e-5·NT, η = 1e2·λ, γ = 5λ.
    Lcr2d,
    /// λ = 1e-5, η = 1e2·λ, γ = λ, τ = 2.
    Lcr3d,
    /// λ = 5e-3·T, η = 1e3·λ, γ = 5λ.
    #[value(name = "lcr-n")]
    #[serde(rename = "lcr-n")]
    LcrN,
    /// λ = 5e-6·NT, η = 1e2·λ, γ = 5λ.
    #[value(name = "lcr-vec")]
    #[serde(rename = "lcr-vec")]
    LcrVec,
    /// λ = 5e-7·NT, η = 1e2·λ on matrices; the `lcr1d` and `lcr3d` λ, η on
    /// series and images.
    #[value(name = "circnnm")]
    #[serde(rename = "circnnm")]
    CircNnm,
}

/// λ together with γ and η expressed as multiples of λ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PresetRule {
    pub variant: Variant,
    pub lambda: f64,
    pub gamma_ratio: f64,
    pub eta_ratio: f64,
    pub tau: usize,
}

impl PresetRule {
    pub fn config(&self) -> SolverConfig {
        self.config_with_lambda(self.lambda)
    }

    /// Keeps the γ/λ and η/λ ratios of the rule for a different λ.
    pub fn config_with_lambda(&self, lambda: f64) -> SolverConfig {
        SolverConfig::new(self.variant, lambda)
            .with_gamma(self.gamma_ratio * lambda)
            .with_eta(self.eta_ratio * lambda)
            .with_tau(self.tau)
    }
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Lcr1d,
        Preset::Lcr1dExact,
        Preset::Lcr2d,
        Preset::Lcr3d,
        Preset::LcrN,
        Preset::LcrVec,
        Preset::CircNnm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Lcr1d => "lcr1d",
            Preset::Lcr1dExact => "lcr1d-exact",
            Preset::Lcr2d => "lcr2d",
            Preset::Lcr3d => "lcr3d",
            Preset::LcrN => "lcr-n",
            Preset::LcrVec => "lcr-vec",
            Preset::CircNnm => "circnnm",
        }
    }

    pub fn for_variant(variant: Variant) -> Preset {
        match variant {
            Variant::Lcr1d => Preset::Lcr1d,
            Variant::Lcr2d => Preset::Lcr2d,
            Variant::Lcr3d => Preset::Lcr3d,
            Variant::LcrN => Preset::LcrN,
            Variant::LcrVec => Preset::LcrVec,
            Variant::CircNnm => Preset::CircNnm,
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            Preset::Lcr1d | Preset::Lcr1dExact => Variant::Lcr1d,
            Preset::Lcr2d => Variant::Lcr2d,
            Preset::Lcr3d => Variant::Lcr3d,
            Preset::LcrN => Variant::LcrN,
            Preset::LcrVec => Variant::LcrVec,
            Preset::CircNnm => Variant::CircNnm,
        }
    }

    pub fn rule(self, shape: &Shape) -> Result<PresetRule> {
        let variant = self.variant();
        if let Some(expected) = variant.expected_rank() {
            if shape.rank() != expected {
                return Err(LcrError::ConfigRankMismatch {
                    variant: variant.name(),
                    expected,
                    actual: shape.rank(),
                });
            }
        }
        let p = shape.len() as f64;
        let t = *shape.dims().last().expect("rank >= 1") as f64;
        let rule = |lambda, gamma_ratio, eta_ratio| PresetRule {
            variant,
            lambda,
            gamma_ratio,
            eta_ratio,
            tau: DEFAULT_TAU,
        };
        Ok(match self {
            Preset::Lcr1d => rule(5e-3 * t, 2.0, 1e3),
            Preset::Lcr1dExact => rule(5e-3 * t, 2.0, f64::INFINITY),
            Preset::Lcr2d => rule(1e-5 * p, 5.0, 1e2),
            Preset::Lcr3d => rule(1e-5, 1.0, 1e2),
            Preset::LcrN => rule(5e-3 * t, 5.0, 1e3),
            Preset::LcrVec => rule(5e-6 * p, 5.0, 1e2),
            Preset::CircNnm => match shape.rank() {
                1 => rule(5e-3 * t, 0.0, 1e3),
                2 => rule(5e-7 * p, 0.0, 1e2),
                _ => rule(1e-5, 0.0, 1e2),
            },
        })
    }

    pub fn config(self, shape: &Shape) -> Result<SolverConfig> {
        Ok(self.rule(shape)?.config())
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = LcrError;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| LcrError::InvalidConfig(format!("unknown preset {s:?}")))
    }
}

/// JSON has no infinity, so an exact constraint is written as `"inf"`.
pub(crate) mod eta_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(eta: &f64, s: S) -> Result<S::Ok, S::Error> {
        if eta.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*eta)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(super) enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        decode(Repr::deserialize(d)?)
    }

    pub(super) fn decode<E: de::Error>(repr: Repr) -> Result<f64, E> {
        match repr {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(E::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}

/// Optional form of [`eta_serde`].
pub(crate) mod eta_option_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    use super::eta_serde::{decode, Repr};

    pub fn serialize<S: Serializer>(eta: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match eta {
            Some(v) => super::eta_serde::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Repr>::deserialize(d)?.map(decode).transpose()
    }
}
