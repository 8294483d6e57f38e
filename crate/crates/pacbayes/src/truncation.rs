//! Loss transforms and truncated empirical risks.
//!
//! Thresholds are stored directly as `T` (callers working with a coupling
//! rate λ convert once via `T = n/λ`). The four split transforms satisfy
//! two exact pointwise identities,
//! `clip_min(ℓ) + tail_excess(ℓ) = ℓ` and `keep_below(ℓ) + keep_above(ℓ) = ℓ`,
//! and the power-corrected transform is capped at `T` with its maximum
//! attained at `ℓ = T·p/(p−1)`.

use crate::dist::DiscreteDistribution;
use crate::scenario::{Dataset, Scenario};
use crate::{Error, Result};

/// A pointwise transform of a nonnegative loss value. Doubles as the
/// estimator identity that bound certificates validate against: a bound
/// built for a keep-below risk at threshold `t*` will reject an empirical
/// risk computed any other way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossTransform {
    /// The untransformed loss.
    Identity,
    /// `min(ℓ, T)`.
    ClipMin { threshold: f64 },
    /// `max(ℓ − T, 0)`.
    TailExcess { threshold: f64 },
    /// `ℓ·1{ℓ ≤ T}`.
    KeepBelow { threshold: f64 },
    /// `ℓ·1{ℓ > T}`.
    KeepAbove { threshold: f64 },
    /// `[ℓ − (1/p)((p−1)/p)^{p−1} T^{1−p} ℓ^p]₊`, capped at `T`.
    PowerCorrected { threshold: f64, p: f64 },
}

impl LossTransform {
    pub fn clip_min(threshold: f64) -> Result<Self> {
        Self::check_threshold(threshold)?;
        Ok(Self::ClipMin { threshold })
    }

    pub fn tail_excess(threshold: f64) -> Result<Self> {
        Self::check_threshold(threshold)?;
        Ok(Self::TailExcess { threshold })
    }

    pub fn keep_below(threshold: f64) -> Result<Self> {
        Self::check_threshold(threshold)?;
        Ok(Self::KeepBelow { threshold })
    }

    pub fn keep_above(threshold: f64) -> Result<Self> {
        Self::check_threshold(threshold)?;
        Ok(Self::KeepAbove { threshold })
    }

    pub fn power_corrected(threshold: f64, p: f64) -> Result<Self> {
        Self::check_threshold(threshold)?;
        if !(p > 1.0) {
            return Err(Error::InvalidInput(format!("power-corrected transform needs p > 1, got {p}")));
        }
        Ok(Self::PowerCorrected { threshold, p })
    }

    fn check_threshold(threshold: f64) -> Result<()> {
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(Error::InvalidInput(format!(
                "truncation threshold must be positive and finite, got {threshold}"
            )));
        }
        Ok(())
    }

    pub fn threshold(&self) -> Option<f64> {
        match *self {
            Self::Identity => None,
            Self::ClipMin { threshold }
            | Self::TailExcess { threshold }
            | Self::KeepBelow { threshold }
            | Self::KeepAbove { threshold }
            | Self::PowerCorrected { threshold, .. } => Some(threshold),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::ClipMin { .. } => "clip-min",
            Self::TailExcess { .. } => "tail-excess",
            Self::KeepBelow { .. } => "keep-below",
            Self::KeepAbove { .. } => "keep-above",
            Self::PowerCorrected { .. } => "power-corrected",
        }
    }

    pub(crate) fn apply_raw(&self, loss: f64) -> f64 {
        debug_assert!(loss >= 0.0);
        match *self {
            Self::Identity => loss,
            Self::ClipMin { threshold } => loss.min(threshold),
            Self::TailExcess { threshold } => (loss - threshold).max(0.0),
            Self::KeepBelow { threshold } => {
                if loss <= threshold {
                    loss
                } else {
                    0.0
                }
            }
            Self::KeepAbove { threshold } => {
                if loss > threshold {
                    loss
                } else {
                    0.0
                }
            }
            Self::PowerCorrected { threshold, p } => {
                let coeff = (1.0 / p) * ((p - 1.0) / p).powf(p - 1.0) * threshold.powf(1.0 - p);
                (loss - coeff * loss.powf(p)).max(0.0)
            }
        }
    }
}

/// Apply a transform to one loss value, validating nonnegativity.
pub fn transform(loss: f64, t: &LossTransform) -> Result<f64> {
    if loss.is_nan() || loss < 0.0 {
        return Err(Error::InvalidInput(format!("loss value {loss} must be >= 0")));
    }
    Ok(t.apply_raw(loss))
}

/// A transformed empirical risk together with the estimator identity it was
/// computed under. Bounds validate this handshake before consuming the
/// value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalRisk {
    pub value: f64,
    pub estimator: LossTransform,
}

impl EmpiricalRisk {
    pub fn new(value: f64, estimator: LossTransform) -> Self {
        Self { value, estimator }
    }
}

/// Per-hypothesis transformed empirical risks over a dataset:
/// `(1/n) Σᵢ transform(ℓ(w, zᵢ))` for every hypothesis `w`.
pub fn per_hypothesis_risks(
    scenario: &Scenario,
    dataset: &Dataset,
    t: &LossTransform,
) -> Result<Vec<f64>> {
    let n = dataset.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty dataset".into()));
    }
    let mut risks = Vec::with_capacity(scenario.hypothesis_count());
    for w in 0..scenario.hypothesis_count() {
        let mut sum = crate::math::CompensatedSum::new();
        for i in 0..n {
            let loss = scenario.loss_at(w, dataset, i)?;
            if loss.is_nan() || loss < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "loss value {loss} for hypothesis {w}, instance {i} must be >= 0"
                )));
            }
            sum.add(t.apply_raw(loss));
        }
        risks.push(sum.value() / n as f64);
    }
    Ok(risks)
}

/// Posterior-averaged transformed empirical risk
/// `E_{W∼posterior} (1/n) Σᵢ transform(ℓ(W, zᵢ))`, as an exact finite sum.
pub fn empirical_risk(
    posterior: &DiscreteDistribution,
    scenario: &Scenario,
    dataset: &Dataset,
    t: &LossTransform,
) -> Result<EmpiricalRisk> {
    if posterior.len() != scenario.hypothesis_count() {
        return Err(Error::Contract(format!(
            "posterior over {} atoms but scenario has {} hypotheses",
            posterior.len(),
            scenario.hypothesis_count()
        )));
    }
    let risks = per_hypothesis_risks(scenario, dataset, t)?;
    let value = posterior.expectation(|w| risks[w]);
    Ok(EmpiricalRisk::new(value, *t))
}

/// Transformed empirical risk of a single hypothesis (the realized draw in
/// single-draw bounds).
pub fn empirical_risk_single(
    hypothesis: usize,
    scenario: &Scenario,
    dataset: &Dataset,
    t: &LossTransform,
) -> Result<EmpiricalRisk> {
    if hypothesis >= scenario.hypothesis_count() {
        return Err(Error::InvalidInput(format!("hypothesis index {hypothesis} out of range")));
    }
    let n = dataset.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty dataset".into()));
    }
    let mut sum = crate::math::CompensatedSum::new();
    for i in 0..n {
        let loss = scenario.loss_at(hypothesis, dataset, i)?;
        if loss.is_nan() || loss < 0.0 {
            return Err(Error::InvalidInput(format!("loss value {loss} must be >= 0")));
        }
        sum.add(t.apply_raw(loss));
    }
    Ok(EmpiricalRisk::new(sum.value() / n as f64, *t))
}
