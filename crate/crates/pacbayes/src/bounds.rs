//! Every bound as a pure function from validated inputs to a
//! [`BoundCertificate`].
//!
//! Bounds never compute estimators themselves. Each one validates an
//! estimator handshake — the transform kind and threshold recorded on the
//! [`EmpiricalRisk`] it consumes — and fails loudly on a mismatch, because
//! pairing a penalty with the wrong empirical risk is the main correctness
//! hazard in this family of results. Vacuous bounds evaluate to +∞ rather
//! than erroring; coverage experiments count them as trivially valid.
//!
//! A second guardrail concerns the coupling rate λ: the fixed-λ bounds
//! ([`truncation_bound`], [`bounded_moment_bound`]) are only valid when λ
//! was chosen before seeing the data, so their certificates carry the
//! caller-declared [`LambdaPolicy`] and are flagged protocol-invalid when λ
//! was data-dependent. Only [`adaptive_lambda_bound_thm2`] and
//! [`simultaneous_lambda_bound_thm3`] license data-dependent tuning.

use crate::dist;
use crate::truncation::{EmpiricalRisk, LossTransform};
use crate::{Error, Result};

/// Relative tolerance used when validating estimator thresholds.
const THRESHOLD_TOL: f64 = 1e-9;

/// The parameter pair `(c, γ)` with the three derived coefficients used by
/// every fast-rate bound: `κ1 = cγ·ln(γ/(γ−1))`, `κ2 = cγ`,
/// `κ3 = γ(1 − c(1 − ln c))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaParams {
    pub c: f64,
    pub gamma: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
}

/// Derive the κ coefficients from `c ∈ (0, 1]` and `γ > 1`. Choosing
/// `c = 1` makes κ3 exactly zero.
pub fn kappas(c: f64, gamma: f64) -> Result<KappaParams> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidInput(format!("c = {c} outside (0, 1]")));
    }
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(Error::InvalidInput(format!("gamma = {gamma} must be finite and > 1")));
    }
    let kappa1 = c * gamma * (gamma / (gamma - 1.0)).ln();
    let kappa2 = c * gamma;
    let kappa3 = if c == 1.0 { 0.0 } else { gamma * (1.0 - c * (1.0 - c.ln())) };
    Ok(KappaParams { c, gamma, kappa1, kappa2, kappa3: kappa3.max(0.0) })
}

/// Which complexity expression a [`ComplexityTerm`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexityKind {
    /// `D + ln(ξ(n)/β)`.
    PacBayes,
    /// `1.1·D + ln(10eπ²ξ(n)/β)` — the price of adaptive parameter tuning.
    PacBayesPrime,
    /// `ln(dP/dQ(W)) + ln(ξ(n)/β)` at the realized hypothesis.
    SingleDraw,
    /// `2·ln(dP/dQ(W)) + ln(π²e²ξ(n)/β)`.
    SingleDrawPrime,
    /// `I(W;S)` — no confidence parameter.
    MutualInfo,
    /// `(1/n) Σᵢ I(W;Zᵢ)` — no confidence parameter.
    SingleLetterMi,
}

/// A fully assembled complexity (dependency + confidence) term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityTerm {
    pub kind: ComplexityKind,
    /// The dependency input: D, a realized log density ratio, I(W;S), or
    /// the single-letter average, as dictated by `kind`.
    pub divergence_value: f64,
    pub n: u64,
    /// Absent for the expectation (mutual-information) kinds.
    pub beta: Option<f64>,
    pub value: f64,
}

fn check_beta(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidInput(format!("beta = {beta} outside (0, 1)")));
    }
    Ok(beta)
}

fn check_nonneg_divergence(d: f64) -> Result<f64> {
    if d.is_nan() || d < 0.0 {
        return Err(Error::InvalidInput(format!("divergence value {d} must be >= 0")));
    }
    Ok(d)
}

impl ComplexityTerm {
    /// `D + ln(ξ(n)/β)`.
    pub fn pac_bayes(d: f64, n: u64, beta: f64) -> Result<Self> {
        check_nonneg_divergence(d)?;
        check_beta(beta)?;
        let xi = dist::xi(n)?.value;
        Ok(Self {
            kind: ComplexityKind::PacBayes,
            divergence_value: d,
            n,
            beta: Some(beta),
            value: d + (xi / beta).ln(),
        })
    }

    /// `1.1·D + ln(10eπ²ξ(n)/β)`.
    pub fn pac_bayes_prime(d: f64, n: u64, beta: f64) -> Result<Self> {
        check_nonneg_divergence(d)?;
        check_beta(beta)?;
        let xi = dist::xi(n)?.value;
        let constant = 10.0 * std::f64::consts::E * std::f64::consts::PI * std::f64::consts::PI;
        Ok(Self {
            kind: ComplexityKind::PacBayesPrime,
            divergence_value: d,
            n,
            beta: Some(beta),
            value: 1.1 * d + (constant * xi / beta).ln(),
        })
    }

    /// `lr + ln(ξ(n)/β)` at a realized hypothesis; `lr` may be negative.
    pub fn single_draw(log_ratio: f64, n: u64, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        if log_ratio.is_nan() {
            return Err(Error::InvalidInput("log density ratio is NaN".into()));
        }
        let xi = dist::xi(n)?.value;
        Ok(Self {
            kind: ComplexityKind::SingleDraw,
            divergence_value: log_ratio,
            n,
            beta: Some(beta),
            value: log_ratio + (xi / beta).ln(),
        })
    }

    /// `2·lr + ln(π²e²ξ(n)/β)`.
    pub fn single_draw_prime(log_ratio: f64, n: u64, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        if log_ratio.is_nan() {
            return Err(Error::InvalidInput("log density ratio is NaN".into()));
        }
        let xi = dist::xi(n)?.value;
        let constant = std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::E * std::f64::consts::E;
        Ok(Self {
            kind: ComplexityKind::SingleDrawPrime,
            divergence_value: log_ratio,
            n,
            beta: Some(beta),
            value: 2.0 * log_ratio + (constant * xi / beta).ln(),
        })
    }

    /// `I(W;S)` as a complexity input for the expectation bounds.
    pub fn mutual_info(i_ws: f64, n: u64) -> Result<Self> {
        check_nonneg_divergence(i_ws)?;
        Ok(Self { kind: ComplexityKind::MutualInfo, divergence_value: i_ws, n, beta: None, value: i_ws })
    }

    /// `(1/n) Σᵢ I(W;Zᵢ)` as a complexity input.
    pub fn single_letter_mi(mean_i_wzi: f64, n: u64) -> Result<Self> {
        check_nonneg_divergence(mean_i_wzi)?;
        Ok(Self {
            kind: ComplexityKind::SingleLetterMi,
            divergence_value: mean_i_wzi,
            n,
            beta: None,
            value: mean_i_wzi,
        })
    }

    fn expect_kind(&self, kind: ComplexityKind, wanted_by: &str) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Contract(format!(
                "{wanted_by} needs a {kind:?} complexity term, got {:?}",
                self.kind
            )));
        }
        Ok(())
    }
}

/// Whether the coupling rate λ was fixed before or after seeing the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaPolicy {
    DataIndependent,
    DataDependent,
}

impl LambdaPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            LambdaPolicy::DataIndependent => "data-independent",
            LambdaPolicy::DataDependent => "data-dependent",
        }
    }
}

/// Identifier of the result a certificate instantiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremId {
    Eq1,
    Eq2,
    Lemma1,
    Lemma2,
    Lemma3,
    Lemma4,
    Thm1,
    Thm2,
    Thm3,
    Eq4,
    Eq5,
    Eq6,
    Thm5,
    Thm6,
    Thm7,
    Thm8,
    Thm9,
    Thm10,
    Thm11,
    Thm12,
}

impl TheoremId {
    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::Eq1 => "eq1",
            TheoremId::Eq2 => "eq2",
            TheoremId::Lemma1 => "lemma1",
            TheoremId::Lemma2 => "lemma2",
            TheoremId::Lemma3 => "lemma3",
            TheoremId::Lemma4 => "lemma4",
            TheoremId::Thm1 => "thm1",
            TheoremId::Thm2 => "thm2",
            TheoremId::Thm3 => "thm3",
            TheoremId::Eq4 => "eq4",
            TheoremId::Eq5 => "eq5",
            TheoremId::Eq6 => "eq6",
            TheoremId::Thm5 => "thm5",
            TheoremId::Thm6 => "thm6",
            TheoremId::Thm7 => "thm7",
            TheoremId::Thm8 => "thm8",
            TheoremId::Thm9 => "thm9",
            TheoremId::Thm10 => "thm10",
            TheoremId::Thm11 => "thm11",
            TheoremId::Thm12 => "thm12",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "eq1" | "mcallester" => TheoremId::Eq1,
            "eq2" | "chernoff" => TheoremId::Eq2,
            "lemma1" => TheoremId::Lemma1,
            "lemma2" => TheoremId::Lemma2,
            "lemma3" => TheoremId::Lemma3,
            "lemma4" => TheoremId::Lemma4,
            "thm1" => TheoremId::Thm1,
            "thm2" => TheoremId::Thm2,
            "thm3" => TheoremId::Thm3,
            "eq4" => TheoremId::Eq4,
            "eq5" => TheoremId::Eq5,
            "eq6" => TheoremId::Eq6,
            "thm5" => TheoremId::Thm5,
            "thm6" => TheoremId::Thm6,
            "thm7" => TheoremId::Thm7,
            "thm8" => TheoremId::Thm8,
            "thm9" => TheoremId::Thm9,
            "thm10" => TheoremId::Thm10,
            "thm11" => TheoremId::Thm11,
            "thm12" => TheoremId::Thm12,
            other => return Err(Error::Config(format!("unknown theorem id `{other}`"))),
        })
    }
}

/// The value of one bound instance plus everything needed to recompute it:
/// theorem, full input snapshot, the estimator identity it consumed, and the
/// λ protocol flag.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCertificate {
    theorem: TheoremId,
    value: f64,
    inputs: Vec<(&'static str, f64)>,
    estimator: Option<LossTransform>,
    lambda_policy: Option<LambdaPolicy>,
    protocol_valid: bool,
}

impl BoundCertificate {
    fn new(theorem: TheoremId, value: f64, inputs: Vec<(&'static str, f64)>) -> Self {
        assert!(!value.is_nan(), "bound value for {} is NaN", theorem.as_str());
        // A certificate upper-bounds a nonnegative risk, so flooring it at
        // zero never weakens the statement it certifies.
        let value = value.max(0.0);
        Self { theorem, value, inputs, estimator: None, lambda_policy: None, protocol_valid: true }
    }

    fn with_estimator(mut self, estimator: LossTransform) -> Self {
        self.estimator = Some(estimator);
        self
    }

    fn with_lambda_policy(mut self, policy: LambdaPolicy, valid: bool) -> Self {
        self.lambda_policy = Some(policy);
        self.protocol_valid = valid;
        self
    }

    pub fn theorem(&self) -> TheoremId {
        self.theorem
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn inputs(&self) -> &[(&'static str, f64)] {
        &self.inputs
    }

    pub fn estimator(&self) -> Option<&LossTransform> {
        self.estimator.as_ref()
    }

    pub fn lambda_policy(&self) -> Option<LambdaPolicy> {
        self.lambda_policy
    }

    /// False when the certificate was produced under a statistically
    /// invalid protocol (data-dependent λ fed to a fixed-λ result).
    pub fn protocol_valid(&self) -> bool {
        self.protocol_valid
    }

    pub fn is_vacuous(&self) -> bool {
        self.value.is_infinite()
    }

    /// One-line structured text record with a stable field order:
    /// `theorem=<id> [estimator=<kind> [threshold=…]] [lambda_policy=…
    /// protocol=…] <input>=<value>… value=<value>`. Floats carry 17
    /// significant digits so records diff cleanly and re-parse exactly.
    pub fn record_line(&self) -> String {
        let mut line = format!("theorem={}", self.theorem.as_str());
        if let Some(est) = &self.estimator {
            line.push_str(&format!(" estimator={}", est.name()));
            if let Some(t) = est.threshold() {
                line.push_str(&format!(" estimator_threshold={}", format_float(t)));
            }
            if let LossTransform::PowerCorrected { p, .. } = est {
                line.push_str(&format!(" estimator_p={}", format_float(*p)));
            }
        }
        if let Some(policy) = self.lambda_policy {
            line.push_str(&format!(" lambda_policy={}", policy.as_str()));
            line.push_str(&format!(
                " protocol={}",
                if self.protocol_valid { "valid" } else { "invalid" }
            ));
        }
        for (name, v) in &self.inputs {
            line.push_str(&format!(" {name}={}", format_float(*v)));
        }
        line.push_str(&format!(" value={}", format_float(self.value)));
        line
    }

    #[cfg(test)]
    pub(crate) fn for_tests(theorem: TheoremId, value: f64) -> Self {
        Self::new(theorem, value, vec![])
    }
}

/// 17-significant-digit text form used in records and CSV output.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

fn check_estimator(
    emp: &EmpiricalRisk,
    expected_kind: &str,
    expected_threshold: Option<f64>,
    wanted_by: &str,
) -> Result<()> {
    if emp.estimator.name() != expected_kind {
        return Err(Error::Contract(format!(
            "{wanted_by} needs a {expected_kind} empirical risk, got {}",
            emp.estimator.name()
        )));
    }
    match (expected_threshold, emp.estimator.threshold()) {
        (None, None) => {}
        (Some(want), Some(got)) => {
            if (got - want).abs() > THRESHOLD_TOL * want.abs().max(1.0) {
                return Err(Error::Contract(format!(
                    "{wanted_by}: estimator threshold {got} does not match required {want}"
                )));
            }
        }
        _ => {
            return Err(Error::Contract(format!("{wanted_by}: estimator threshold mismatch")));
        }
    }
    if emp.value.is_nan() || emp.value < 0.0 {
        return Err(Error::InvalidInput(format!("empirical risk {} must be >= 0", emp.value)));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Baselines for bounded and CGF-controlled losses
// ---------------------------------------------------------------------------

/// Square-root bound for losses in [0, 1]:
/// `emp_risk + √(C/(2n))` with `C = D + ln(ξ(n)/β)`. The caller certifies
/// the loss range.
pub fn mcallester_bound(emp_risk: f64, c_term: &ComplexityTerm) -> Result<BoundCertificate> {
    c_term.expect_kind(ComplexityKind::PacBayes, "the square-root bound")?;
    if !(0.0..=1.0).contains(&emp_risk) {
        return Err(Error::InvalidInput(format!("empirical risk {emp_risk} outside [0, 1]")));
    }
    let n = c_term.n as f64;
    let value = emp_risk + (c_term.value / (2.0 * n)).sqrt();
    Ok(BoundCertificate::new(
        TheoremId::Eq1,
        value,
        vec![
            ("emp_risk", emp_risk),
            ("d", c_term.divergence_value),
            ("n", n),
            ("beta", c_term.beta.unwrap_or(f64::NAN)),
            ("complexity", c_term.value),
        ],
    )
    .with_estimator(LossTransform::Identity))
}

/// A named Cramér–Chernoff dual inverse `ψ⁎⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsiStarInverse {
    /// `ψ(λ) = λ²σ²/2` ⇒ `ψ⁎⁻¹(y) = √(2σ²y)`.
    SubGaussian { sigma: f64 },
    /// `ψ(λ) = λ²σ²/(2(1 − cλ))` on `[0, 1/c)` ⇒ `ψ⁎⁻¹(y) = √(2σ²y) + c·y`.
    SubGamma { sigma: f64, scale: f64 },
}

impl PsiStarInverse {
    pub fn evaluate(&self, y: f64) -> Result<f64> {
        if y.is_nan() || y < 0.0 {
            return Err(Error::InvalidInput(format!("dual argument {y} must be >= 0")));
        }
        match *self {
            PsiStarInverse::SubGaussian { sigma } => {
                if !(sigma > 0.0) {
                    return Err(Error::InvalidInput(format!("sigma = {sigma} must be > 0")));
                }
                Ok((2.0 * sigma * sigma * y).sqrt())
            }
            PsiStarInverse::SubGamma { sigma, scale } => {
                if !(sigma > 0.0) || !(scale >= 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "sub-gamma needs sigma > 0 and scale >= 0, got ({sigma}, {scale})"
                    )));
                }
                Ok((2.0 * sigma * sigma * y).sqrt() + scale * y)
            }
        }
    }
}

/// Chernoff-style bound for losses whose centered CGF is dominated by a
/// named ψ family: `emp_risk + ψ⁎⁻¹((1.1·D + ln(10eπ²/β))/n)`.
pub fn chernoff_analogue_bound(
    emp_risk: f64,
    d: f64,
    n: u64,
    beta: f64,
    family: PsiStarInverse,
) -> Result<BoundCertificate> {
    check_nonneg_divergence(d)?;
    check_beta(beta)?;
    if emp_risk.is_nan() || emp_risk < 0.0 {
        return Err(Error::InvalidInput(format!("empirical risk {emp_risk} must be >= 0")));
    }
    let constant = 10.0 * std::f64::consts::E * std::f64::consts::PI * std::f64::consts::PI;
    let budget = (1.1 * d + (constant / beta).ln()) / n as f64;
    let value = emp_risk + family.evaluate(budget)?;
    let mut inputs = vec![("emp_risk", emp_risk), ("d", d), ("n", n as f64), ("beta", beta), ("budget", budget)];
    match family {
        PsiStarInverse::SubGaussian { sigma } => inputs.push(("sigma_g", sigma)),
        PsiStarInverse::SubGamma { sigma, scale } => {
            inputs.push(("sigma_g", sigma));
            inputs.push(("c_g", scale));
        }
    }
    Ok(BoundCertificate::new(TheoremId::Eq2, value, inputs).with_estimator(LossTransform::Identity))
}

// ---------------------------------------------------------------------------
// Truncation bounds
// ---------------------------------------------------------------------------

/// Which truncation decomposition a [`truncation_bound`] certificate uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailVariant {
    /// Clipped estimator `min(ℓ, n/λ)` plus the raw tail integral.
    Lemma1,
    /// Keep-below estimator `ℓ·1{ℓ ≤ n/λ}` plus the same tail integral;
    /// never worse than [`TailVariant::Lemma1`].
    Lemma2,
}

/// `κ1·R̂ + κ2·C/λ + κ3·n/λ + tail`, where `R̂` is the clip-min (lemma-1
/// flavor) or keep-below (lemma-2 flavor) empirical risk at threshold `n/λ`
/// and `tail` is the exact or Markov-capped tail integral above `n/λ`.
pub fn truncation_bound(
    emp: &EmpiricalRisk,
    kp: &KappaParams,
    c_term: &ComplexityTerm,
    lambda: f64,
    tail_term: f64,
    variant: TailVariant,
    lambda_policy: LambdaPolicy,
) -> Result<BoundCertificate> {
    c_term.expect_kind(ComplexityKind::PacBayes, "the truncation bound")?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!("lambda = {lambda} must be > 0")));
    }
    if tail_term.is_nan() || tail_term < 0.0 {
        return Err(Error::InvalidInput(format!("tail term {tail_term} must be >= 0")));
    }
    let n = c_term.n as f64;
    let threshold = n / lambda;
    let (id, kind) = match variant {
        TailVariant::Lemma1 => (TheoremId::Lemma1, "clip-min"),
        TailVariant::Lemma2 => (TheoremId::Lemma2, "keep-below"),
    };
    check_estimator(emp, kind, Some(threshold), id.as_str())?;
    let value = kp.kappa1 * emp.value + kp.kappa2 * c_term.value / lambda + kp.kappa3 * n / lambda + tail_term;
    let valid = lambda_policy == LambdaPolicy::DataIndependent;
    Ok(BoundCertificate::new(
        id,
        value,
        vec![
            ("emp_risk", emp.value),
            ("d", c_term.divergence_value),
            ("n", n),
            ("beta", c_term.beta.unwrap_or(f64::NAN)),
            ("complexity", c_term.value),
            ("lambda", lambda),
            ("tail_term", tail_term),
            ("c", kp.c),
            ("gamma", kp.gamma),
            ("kappa1", kp.kappa1),
            ("kappa2", kp.kappa2),
            ("kappa3", kp.kappa3),
        ],
    )
    .with_estimator(emp.estimator)
    .with_lambda_policy(lambda_policy, valid))
}

/// Which bounded-moment tail constant to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentVariant {
    /// Keep-below estimator, tail constant `1/(p−1)` (Markov on the tail).
    Lemma3,
    /// Power-corrected estimator, tail constant `((p−1)/p)^{p−1}/p` —
    /// smaller by a factor 4 at p = 2, approaching e as p → ∞.
    Lemma4,
}

impl MomentVariant {
    pub fn tail_constant(&self, p: f64) -> f64 {
        match self {
            MomentVariant::Lemma3 => 1.0 / (p - 1.0),
            MomentVariant::Lemma4 => ((p - 1.0) / p).powf(p - 1.0) / p,
        }
    }
}

/// `κ1·R̂ + κ2·C/λ + κ3·n/λ + const(variant)·m_p·(λ/n)^{p−1}` for losses
/// with `p`-th moment bounded by `m_p`.
#[allow(clippy::too_many_arguments)]
pub fn bounded_moment_bound(
    emp: &EmpiricalRisk,
    kp: &KappaParams,
    c_term: &ComplexityTerm,
    lambda: f64,
    p: f64,
    m_p: f64,
    variant: MomentVariant,
    lambda_policy: LambdaPolicy,
) -> Result<BoundCertificate> {
    c_term.expect_kind(ComplexityKind::PacBayes, "the bounded-moment bound")?;
    if !(p > 1.0) {
        return Err(Error::InvalidInput(format!("moment order p = {p} must be > 1")));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!("lambda = {lambda} must be > 0")));
    }
    if m_p.is_nan() || m_p < 0.0 {
        return Err(Error::InvalidInput(format!("moment bound m_p = {m_p} must be >= 0")));
    }
    let n = c_term.n as f64;
    let threshold = n / lambda;
    let id = match variant {
        MomentVariant::Lemma3 => TheoremId::Lemma3,
        MomentVariant::Lemma4 => TheoremId::Lemma4,
    };
    match variant {
        MomentVariant::Lemma3 => check_estimator(emp, "keep-below", Some(threshold), "lemma3")?,
        MomentVariant::Lemma4 => {
            check_estimator(emp, "power-corrected", Some(threshold), "lemma4")?;
            if let LossTransform::PowerCorrected { p: est_p, .. } = emp.estimator {
                if (est_p - p).abs() > THRESHOLD_TOL * p {
                    return Err(Error::Contract(format!(
                        "lemma4: estimator order {est_p} does not match p = {p}"
                    )));
                }
            }
        }
    }
    let tail = variant.tail_constant(p) * m_p * (lambda / n).powf(p - 1.0);
    let value = kp.kappa1 * emp.value + kp.kappa2 * c_term.value / lambda + kp.kappa3 * n / lambda + tail;
    let valid = lambda_policy == LambdaPolicy::DataIndependent;
    Ok(BoundCertificate::new(
        id,
        value,
        vec![
            ("emp_risk", emp.value),
            ("d", c_term.divergence_value),
            ("n", n),
            ("beta", c_term.beta.unwrap_or(f64::NAN)),
            ("complexity", c_term.value),
            ("lambda", lambda),
            ("p", p),
            ("m_p", m_p),
            ("c", kp.c),
            ("gamma", kp.gamma),
            ("kappa1", kp.kappa1),
            ("kappa2", kp.kappa2),
            ("kappa3", kp.kappa3),
        ],
    )
    .with_estimator(emp.estimator)
    .with_lambda_policy(lambda_policy, valid))
}

/// Threshold `(m_p·n)^{1/p}` used by [`fixed_lambda_bound_thm1`].
pub fn thm1_threshold(n: u64, p: f64, m_p: f64) -> f64 {
    ((m_p.ln() + (n as f64).ln()) / p).exp()
}

/// The rate-optimal data-independent choice `λ = (n^{p−1}/m_p)^{1/p}`
/// plugged into the keep-below bound:
/// `κ1·R̂_{≤(m_p n)^{1/p}} + (m_p/n^{p−1})^{1/p}(κ2·C + κ3·n + 1/(p−1))`.
pub fn fixed_lambda_bound_thm1(
    emp: &EmpiricalRisk,
    kp: &KappaParams,
    c_term: &ComplexityTerm,
    p: f64,
    m_p: f64,
) -> Result<BoundCertificate> {
    c_term.expect_kind(ComplexityKind::PacBayes, "the fixed-lambda bound")?;
    if !(p > 1.0) {
        return Err(Error::InvalidInput(format!("moment order p = {p} must be > 1")));
    }
    if !(m_p > 0.0) {
        return Err(Error::InvalidInput(format!("moment bound m_p = {m_p} must be > 0")));
    }
    let n = c_term.n as f64;
    let threshold = thm1_threshold(c_term.n, p, m_p);
    if threshold.is_finite() {
        check_estimator(emp, "keep-below", Some(threshold), "thm1")?;
    } else {
        check_estimator(emp, "identity", None, "thm1")?;
    }
    let prefactor = ((m_p.ln() - (p - 1.0) * n.ln()) / p).exp();
    let value =
        kp.kappa1 * emp.value + prefactor * (kp.kappa2 * c_term.value + kp.kappa3 * n + 1.0 / (p - 1.0));
    Ok(BoundCertificate::new(
        TheoremId::Thm1,
        value,
        vec![
            ("emp_risk", emp.value),
            ("d", c_term.divergence_value),
            ("n", n),
            ("beta", c_term.beta.unwrap_or(f64::NAN)),
            ("complexity", c_term.value),
            ("p", p),
            ("m_p", m_p),
            ("threshold", threshold),
            ("c", kp.c),
            ("gamma", kp.gamma),
            ("kappa1", kp.kappa1),
            ("kappa2", kp.kappa2),
            ("kappa3", kp.kappa3),
        ],
    )
    .with_estimator(emp.estimator)
    .with_lambda_policy(LambdaPolicy::DataIndependent, true))
}

/// Threshold `t⋆ = m_p^{1/p}·(κ2·C′/n + κ3)^{−1/p}` for the adaptive bound;
/// +∞ when the moment bound is infinite (the truncation is then inactive
/// and the certificate vacuous). The two-pass protocol is: compute `t⋆`
/// from the posterior's divergence, then compute the keep-below empirical
/// risk at `t⋆`, then call [`adaptive_lambda_bound_thm2`].
pub fn thm2_threshold(kp: &KappaParams, c_prime: &ComplexityTerm, p: f64, m_p: f64) -> Result<f64> {
    c_prime.expect_kind(ComplexityKind::PacBayesPrime, "the adaptive threshold")?;
    if !m_p.is_finite() {
        return Ok(f64::INFINITY);
    }
    let base = kp.kappa2 * c_prime.value / c_prime.n as f64 + kp.kappa3;
    Ok((m_p.ln() / p - base.ln() / p).exp())
}

/// Adaptive-λ bound:
/// `κ1·R̂_{≤t⋆} + m_p^{1/p}·(p/(p−1))·(κ2·C′/n + κ3)^{(p−1)/p}`, valid
/// simultaneously over `(posterior, c, γ)` with all of them chosen after
/// seeing the data.
pub fn adaptive_lambda_bound_thm2(
    emp: &EmpiricalRisk,
    kp: &KappaParams,
    c_prime: &ComplexityTerm,
    p: f64,
    m_p: f64,
) -> Result<(BoundCertificate, f64)> {
    c_prime.expect_kind(ComplexityKind::PacBayesPrime, "the adaptive-lambda bound")?;
    if !(p > 1.0) {
        return Err(Error::InvalidInput(format!("moment order p = {p} must be > 1")));
    }
    if !(m_p > 0.0) {
        return Err(Error::InvalidInput(format!("moment bound m_p = {m_p} must be > 0")));
    }
    let n = c_prime.n as f64;
    let t_star = thm2_threshold(kp, c_prime, p, m_p)?;
    if t_star.is_finite() {
        check_estimator(emp, "keep-below", Some(t_star), "thm2")?;
    } else {
        check_estimator(emp, "identity", None, "thm2")?;
    }
    let base = kp.kappa2 * c_prime.value / n + kp.kappa3;
    let penalty = (m_p.ln() / p).exp() * (p / (p - 1.0)) * base.powf((p - 1.0) / p);
    let value = kp.kappa1 * emp.value + penalty;
    let cert = BoundCertificate::new(
        TheoremId::Thm2,
        value,
        vec![
            ("emp_risk", emp.value),
            ("d", c_prime.divergence_value),
            ("n", n),
            ("beta", c_prime.beta.unwrap_or(f64::NAN)),
            ("complexity_prime", c_prime.value),
            ("p", p),
            ("m_p", m_p),
            ("t_star", t_star),
            ("c", kp.c),
            ("gamma", kp.gamma),
            ("kappa1", kp.kappa1),
            ("kappa2", kp.kappa2),
            ("kappa3", kp.kappa3),
        ],
    )
    .with_estimator(emp.estimator)
    .with_lambda_policy(LambdaPolicy::DataDependent, true);
    Ok((cert, t_star))
}

/// The all-λ-simultaneous form:
/// `κ1·R̂_{≤n/λ} + κ2·C′/λ + κ3·n/λ + m_p/(p−1)·(λ/n)^{p−1}`. Minimizing
/// over λ recovers [`adaptive_lambda_bound_thm2`] at `λ = n/t⋆`; any λ may
/// be chosen after seeing the data.
pub fn simultaneous_lambda_bound_thm3(
    emp: &EmpiricalRisk,
    kp: &KappaParams,
    c_prime: &ComplexityTerm,
    lambda: f64,
    p: f64,
    m_p: f64,
) -> Result<BoundCertificate> {
    c_prime.expect_kind(ComplexityKind::PacBayesPrime, "the simultaneous-lambda bound")?;
    if !(p > 1.0) {
        return Err(Error::InvalidInput(format!("moment order p = {p} must be > 1")));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!("lambda = {lambda} must be > 0")));
    }
    if m_p.is_nan() || m_p < 0.0 {
        return Err(Error::InvalidInput(format!("moment bound m_p = {m_p} must be >= 0")));
    }
    let n = c_prime.n as f64;
    let threshold = n / lambda;
    check_estimator(emp, "keep-below", Some(threshold), "thm3")?;
    let value = kp.kappa1 * emp.value
        + kp.kappa2 * c_prime.value / lambda
        + kp.kappa3 * n / lambda
        + m_p / (p - 1.0) * (lambda / n).powf(p - 1.0);
    Ok(BoundCertificate::new(
        TheoremId::Thm3,
        value,
        vec![
            ("emp_risk", emp.value),
            ("d", c_prime.divergence_value),
            ("n", n),
            ("beta", c_prime.beta.unwrap_or(f64::NAN)),
            ("complexity_prime", c_prime.value),
            ("lambda", lambda),
            ("p", p),
            ("m_p", m_p),
            ("c", kp.c),
            ("gamma", kp.gamma),
            ("kappa1", kp.kappa1),
            ("kappa2", kp.kappa2),
            ("kappa3", kp.kappa3),
        ],
    )
    .with_estimator(emp.estimator)
    .with_lambda_policy(LambdaPolicy::DataDependent, true))
}

// ---------------------------------------------------------------------------
// Bounded-variance bounds and χ² baselines
// ---------------------------------------------------------------------------

/// The three χ²-divergence baselines for losses with bounded variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceBaseline {
    /// `R̂ + √(σ²(χ²+1)/(nβ))`.
    Eq4,
    /// `R̂ + √(σ²√(χ²+1)/(nβ))`.
    Eq5,
    /// `R̂ + √((χ² + (σ²/β)²)/(2n))`.
    Eq6,
}

/// One of the χ² baselines, exactly as displayed. The confidence penalty is
/// polynomial in 1/β, unlike everything else in this module.
pub fn prior_variance_bounds_thm4(
    emp_risk: f64,
    sigma2: f64,
    chi2: f64,
    n: u64,
    beta: f64,
    which: VarianceBaseline,
) -> Result<BoundCertificate> {
    check_beta(beta)?;
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidInput(format!("sigma2 = {sigma2} must be > 0")));
    }
    if chi2.is_nan() || chi2 < 0.0 {
        return Err(Error::InvalidInput(format!("chi2 = {chi2} must be >= 0")));
    }
    if emp_risk.is_nan() || emp_risk < 0.0 {
        return Err(Error::InvalidInput(format!("empirical risk {emp_risk} must be >= 0")));
    }
    let nf = n as f64;
    let (id, radical) = match which {
        VarianceBaseline::Eq4 => (TheoremId::Eq4, sigma2 * (chi2 + 1.0) / (nf * beta)),
        VarianceBaseline::Eq5 => (TheoremId::Eq5, sigma2 * (chi2 + 1.0).sqrt() / (nf * beta)),
        VarianceBaseline::Eq6 => {
            (TheoremId::Eq6, (chi2 + (sigma2 / beta) * (sigma2 / beta)) / (2.0 * nf))
        }
    };
    let value = emp_risk + radical.sqrt();
    Ok(BoundCertificate::new(
        id,
        value,
        vec![
            ("emp_risk", emp_risk),
            ("sigma2", sigma2),
            ("chi2", chi2),
            ("n", nf),
            ("beta", beta),
        ],
    )
    .with_estimator(LossTransform::Identity))
}

/// `𝔠″ = κ2·C′/n + κ3` from a relative-entropy complexity term.
pub fn c_double_prime(kp: &KappaParams, c_prime: &ComplexityTerm) -> Result<f64> {
    c_prime.expect_kind(ComplexityKind::PacBayesPrime, "c_double_prime")?;
    Ok(kp.kappa2 * c_prime.value / c_prime.n as f64 + kp.kappa3)
}

/// The χ²-relaxed form of 𝔠″, using `D ≤ ln(1 + χ²)`:
/// `κ2·(1.1·ln(1+χ²) + ln(10eπ²ξ(n)/β))/n + κ3`.
pub fn c_double_prime_chi2_relaxed(
    kp: &KappaParams,
    chi2: f64,
    n: u64,
    beta: f64,
) -> Result<f64> {
    if chi2.is_nan() || chi2 < 0.0 {
        return Err(Error::InvalidInput(format!("chi2 = {chi2} must be >= 0")));
    }
    let relaxed_d = (1.0 + chi2).ln();
    let c_prime = ComplexityTerm::pac_bayes_prime(relaxed_d, n, beta)?;
    c_double_prime(kp, &c_prime)
}

/// High-probability bounded-variance bound:
/// `[1 − 2√𝔠″]₊⁻¹·[κ1·R̂ + 2√(σ²𝔠″)]`, +∞ once `2√𝔠″ ≥ 1`. The caller
/// supplies 𝔠″ from either the relative-entropy route
/// ([`c_double_prime`]) or the χ²-relaxed route
/// ([`c_double_prime_chi2_relaxed`]).
pub fn bounded_variance_bound_thm5(
    emp_risk: f64,
    kp: &KappaParams,
    sigma2: f64,
    c_double_prime: f64,
) -> Result<BoundCertificate> {
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidInput(format!("sigma2 = {sigma2} must be > 0")));
    }
    if c_double_prime.is_nan() || c_double_prime < 0.0 {
        return Err(Error::InvalidInput(format!("c_double_prime = {c_double_prime} must be >= 0")));
    }
    if emp_risk.is_nan() || emp_risk < 0.0 {
        return Err(Error::InvalidInput(format!("empirical risk {emp_risk} must be >= 0")));
    }
    let root = c_double_prime.sqrt();
    let value = if 2.0 * root < 1.0 {
        (kp.kappa1 * emp_risk + 2.0 * (sigma2 * c_double_prime).sqrt()) / (1.0 - 2.0 * root)
    } else {
        f64::INFINITY
    };
    Ok(BoundCertificate::new(
        TheoremId::Thm5,
        value,
        vec![
            ("emp_risk", emp_risk),
            ("sigma2", sigma2),
            ("c_double_prime", c_double_prime),
            ("c", kp.c),
            ("gamma", kp.gamma),
            ("kappa1", kp.kappa1),
            ("kappa2", kp.kappa2),
            ("kappa3", kp.kappa3),
        ],
    )
    .with_estimator(LossTransform::Identity))
}

// ---------------------------------------------------------------------------
// In-expectation bounds (mutual-information dependency)
// ---------------------------------------------------------------------------

/// Exact mutual-information inputs for the expectation bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct MiTerms {
    /// `I(W;S)`.
    pub i_ws: f64,
    /// `I(W;Zᵢ)` per index.
    pub i_wzi: Vec<f64>,
}

impl MiTerms {
    pub fn mean_single_letter(&self) -> f64 {
        if self.i_wzi.is_empty() {
            return 0.0;
        }
        self.i_wzi.iter().sum::<f64>() / self.i_wzi.len() as f64
    }
}

/// Which in-expectation result to instantiate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpectationTheorem {
    /// Bounded loss in `[0, b]`, full-dataset information `I(W;S)`.
    Thm6 { range: f64 },
    /// Bounded loss, single-letter information `(1/n)ΣI(W;Zᵢ)` with
    /// per-index `(cᵢ, γᵢ)` averaged into κ̄.
    Thm7 { range: f64 },
    /// Bounded p-th moment with the two-pass `t⋆` protocol.
    Thm8 { p: f64, m_p: f64 },
    /// Bounded variance with the clamp convention.
    Thm9 { sigma2: f64 },
}

/// Averaged κ̄ coefficients for the single-letter results. A single entry
/// broadcasts; otherwise one entry per index is required.
fn averaged_kappas(kappas_per_index: &[KappaParams], n: u64) -> Result<KappaParams> {
    match kappas_per_index.len() {
        0 => Err(Error::InvalidInput("at least one kappa parameter set required".into())),
        1 => Ok(kappas_per_index[0]),
        len if len == n as usize => {
            let nf = len as f64;
            let (mut k1, mut k2, mut k3) = (0.0, 0.0, 0.0);
            for kp in kappas_per_index {
                k1 += kp.kappa1;
                k2 += kp.kappa2;
                k3 += kp.kappa3;
            }
            Ok(KappaParams {
                c: f64::NAN,
                gamma: f64::NAN,
                kappa1: k1 / nf,
                kappa2: k2 / nf,
                kappa3: k3 / nf,
            })
        }
        len => Err(Error::InvalidInput(format!(
            "kappa list has {len} entries; expected 1 or n = {n}"
        ))),
    }
}

/// Threshold `t⋆` for [`ExpectationTheorem::Thm8`]; +∞ when the
/// mutual-information complexity is zero (the keep-below truncation is then
/// inactive and the estimator degrades to the identity).
pub fn thm8_threshold(
    kappas_per_index: &[KappaParams],
    mi: &MiTerms,
    n: u64,
    p: f64,
    m_p: f64,
) -> Result<f64> {
    let kbar = averaged_kappas(kappas_per_index, n)?;
    let c_mi = kbar.kappa2 * mi.mean_single_letter() + kbar.kappa3;
    if c_mi <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((m_p.ln() / p - c_mi.ln() / p).exp())
}

/// One of the in-expectation bounds. `emp` is the *expected* empirical
/// quantity the theorem consumes (identity risk for Thm6/7/9, keep-below at
/// `t⋆` for Thm8).
pub fn expectation_bound(
    thm: ExpectationTheorem,
    emp: &EmpiricalRisk,
    kappas_per_index: &[KappaParams],
    mi: &MiTerms,
    n: u64,
) -> Result<BoundCertificate> {
    let nf = n as f64;
    match thm {
        ExpectationTheorem::Thm6 { range } => {
            if kappas_per_index.len() != 1 {
                return Err(Error::InvalidInput(
                    "the full-information bound takes a single (c, gamma) pair".into(),
                ));
            }
            let kp = kappas_per_index[0];
            check_estimator(emp, "identity", None, "thm6")?;
            check_range(emp.value, range, "thm6")?;
            let value = kp.kappa1 * emp.value + range * (kp.kappa2 * mi.i_ws / nf + kp.kappa3);
            Ok(BoundCertificate::new(
                TheoremId::Thm6,
                value,
                vec![
                    ("emp_risk", emp.value),
                    ("range", range),
                    ("i_ws", mi.i_ws),
                    ("n", nf),
                    ("kappa1", kp.kappa1),
                    ("kappa2", kp.kappa2),
                    ("kappa3", kp.kappa3),
                ],
            )
            .with_estimator(emp.estimator))
        }
        ExpectationTheorem::Thm7 { range } => {
            let kbar = averaged_kappas(kappas_per_index, n)?;
            check_estimator(emp, "identity", None, "thm7")?;
            check_range(emp.value, range, "thm7")?;
            let mean_mi = mi.mean_single_letter();
            let value = kbar.kappa1 * emp.value + range * (kbar.kappa2 * mean_mi + kbar.kappa3);
            Ok(BoundCertificate::new(
                TheoremId::Thm7,
                value,
                vec![
                    ("emp_risk", emp.value),
                    ("range", range),
                    ("mean_single_letter_mi", mean_mi),
                    ("n", nf),
                    ("kappa1_bar", kbar.kappa1),
                    ("kappa2_bar", kbar.kappa2),
                    ("kappa3_bar", kbar.kappa3),
                ],
            )
            .with_estimator(emp.estimator))
        }
        ExpectationTheorem::Thm8 { p, m_p } => {
            if !(p > 1.0) {
                return Err(Error::InvalidInput(format!("moment order p = {p} must be > 1")));
            }
            if !(m_p > 0.0) {
                return Err(Error::InvalidInput(format!("moment bound m_p = {m_p} must be > 0")));
            }
            let kbar = averaged_kappas(kappas_per_index, n)?;
            let c_mi = kbar.kappa2 * mi.mean_single_letter() + kbar.kappa3;
            let t_star = thm8_threshold(kappas_per_index, mi, n, p, m_p)?;
            if t_star.is_finite() {
                check_estimator(emp, "keep-below", Some(t_star), "thm8")?;
            } else {
                check_estimator(emp, "identity", None, "thm8")?;
            }
            let penalty = if c_mi <= 0.0 {
                0.0
            } else {
                (m_p.ln() / p).exp() * (p / (p - 1.0)) * c_mi.powf((p - 1.0) / p)
            };
            let value = kbar.kappa1 * emp.value + penalty;
            Ok(BoundCertificate::new(
                TheoremId::Thm8,
                value,
                vec![
                    ("emp_risk", emp.value),
                    ("p", p),
                    ("m_p", m_p),
                    ("mean_single_letter_mi", mi.mean_single_letter()),
                    ("t_star", t_star),
                    ("n", nf),
                    ("kappa1_bar", kbar.kappa1),
                    ("kappa2_bar", kbar.kappa2),
                    ("kappa3_bar", kbar.kappa3),
                ],
            )
            .with_estimator(emp.estimator))
        }
        ExpectationTheorem::Thm9 { sigma2 } => {
            if !(sigma2 > 0.0) {
                return Err(Error::InvalidInput(format!("sigma2 = {sigma2} must be > 0")));
            }
            let kbar = averaged_kappas(kappas_per_index, n)?;
            check_estimator(emp, "identity", None, "thm9")?;
            let c_mi = kbar.kappa2 * mi.mean_single_letter() + kbar.kappa3;
            let root = c_mi.sqrt();
            let value = if 2.0 * root < 1.0 {
                (kbar.kappa1 * emp.value + 2.0 * (sigma2 * c_mi).sqrt()) / (1.0 - 2.0 * root)
            } else {
                f64::INFINITY
            };
            Ok(BoundCertificate::new(
                TheoremId::Thm9,
                value,
                vec![
                    ("emp_risk", emp.value),
                    ("sigma2", sigma2),
                    ("c_mi", c_mi),
                    ("n", nf),
                    ("kappa1_bar", kbar.kappa1),
                    ("kappa2_bar", kbar.kappa2),
                    ("kappa3_bar", kbar.kappa3),
                ],
            )
            .with_estimator(emp.estimator))
        }
    }
}

fn check_range(emp: f64, range: f64, wanted_by: &str) -> Result<()> {
    if !(range > 0.0) {
        return Err(Error::InvalidInput(format!("{wanted_by}: loss range {range} must be > 0")));
    }
    if emp < 0.0 || emp > range * (1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "{wanted_by}: empirical risk {emp} outside the certified range [0, {range}]"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Single-draw bounds
// ---------------------------------------------------------------------------

/// Which single-draw result to instantiate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SingleDrawTheorem {
    /// Bounded loss in `[0, b]`.
    Thm10 { range: f64 },
    /// Bounded p-th moment with the per-draw two-pass `t⋆` protocol.
    Thm11 { p: f64, m_p: f64 },
    /// Bounded variance with the clamp convention.
    Thm12 { sigma2: f64 },
}

/// Per-draw threshold `t⋆ = m_p^{1/p}(κ2·𝔠′/n + κ3)^{−1/p}` with
/// `𝔠′ = 2·lr + ln(π²e²ξ(n)/β)`; +∞ when the powered base is not positive
/// (a hypothesis drawn from far below the prior), in which case the
/// truncation is inactive.
pub fn thm11_threshold(
    kp: &KappaParams,
    log_ratio: f64,
    n: u64,
    beta: f64,
    p: f64,
    m_p: f64,
) -> Result<f64> {
    let c_prime = ComplexityTerm::single_draw_prime(log_ratio, n, beta)?;
    let base = kp.kappa2 * c_prime.value / n as f64 + kp.kappa3;
    if base <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((m_p.ln() / p - base.ln() / p).exp())
}

/// One of the single-draw bounds at the realized hypothesis. `log_ratio` is
/// the log density ratio of the posterior against the prior at the drawn
/// hypothesis; +∞ propagates to a vacuous certificate, and negative values
/// legitimately tighten the bound.
pub fn single_draw_bound(
    thm: SingleDrawTheorem,
    emp: &EmpiricalRisk,
    kp: &KappaParams,
    log_ratio: f64,
    n: u64,
    beta: f64,
) -> Result<BoundCertificate> {
    let nf = n as f64;
    match thm {
        SingleDrawTheorem::Thm10 { range } => {
            let c_term = ComplexityTerm::single_draw(log_ratio, n, beta)?;
            check_estimator(emp, "identity", None, "thm10")?;
            check_range(emp.value, range, "thm10")?;
            let value = kp.kappa1 * emp.value + range * (kp.kappa2 * c_term.value / nf + kp.kappa3);
            Ok(BoundCertificate::new(
                TheoremId::Thm10,
                value,
                vec![
                    ("emp_risk", emp.value),
                    ("range", range),
                    ("log_ratio", log_ratio),
                    ("n", nf),
                    ("beta", beta),
                    ("complexity", c_term.value),
                    ("c", kp.c),
                    ("gamma", kp.gamma),
                    ("kappa1", kp.kappa1),
                    ("kappa2", kp.kappa2),
                    ("kappa3", kp.kappa3),
                ],
            )
            .with_estimator(emp.estimator))
        }
        SingleDrawTheorem::Thm11 { p, m_p } => {
            if !(p > 1.0) {
                return Err(Error::InvalidInput(format!("moment order p = {p} must be > 1")));
            }
            if !(m_p > 0.0) {
                return Err(Error::InvalidInput(format!("moment bound m_p = {m_p} must be > 0")));
            }
            let c_prime = ComplexityTerm::single_draw_prime(log_ratio, n, beta)?;
            let t_star = thm11_threshold(kp, log_ratio, n, beta, p, m_p)?;
            if t_star.is_finite() {
                check_estimator(emp, "keep-below", Some(t_star), "thm11")?;
            } else {
                check_estimator(emp, "identity", None, "thm11")?;
            }
            let base = kp.kappa2 * c_prime.value / nf + kp.kappa3;
            let penalty = if base <= 0.0 {
                0.0
            } else {
                (m_p.ln() / p).exp() * (p / (p - 1.0)) * base.powf((p - 1.0) / p)
            };
            let value = kp.kappa1 * emp.value + penalty;
            Ok(BoundCertificate::new(
                TheoremId::Thm11,
                value,
                vec![
                    ("emp_risk", emp.value),
                    ("p", p),
                    ("m_p", m_p),
                    ("log_ratio", log_ratio),
                    ("n", nf),
                    ("beta", beta),
                    ("complexity_prime", c_prime.value),
                    ("t_star", t_star),
                    ("c", kp.c),
                    ("gamma", kp.gamma),
                    ("kappa1", kp.kappa1),
                    ("kappa2", kp.kappa2),
                    ("kappa3", kp.kappa3),
                ],
            )
            .with_estimator(emp.estimator))
        }
        SingleDrawTheorem::Thm12 { sigma2 } => {
            if !(sigma2 > 0.0) {
                return Err(Error::InvalidInput(format!("sigma2 = {sigma2} must be > 0")));
            }
            let c_prime = ComplexityTerm::single_draw_prime(log_ratio, n, beta)?;
            check_estimator(emp, "identity", None, "thm12")?;
            let c_dd = (kp.kappa2 * c_prime.value / nf + kp.kappa3).max(0.0);
            let root = c_dd.sqrt();
            let value = if 2.0 * root < 1.0 {
                (kp.kappa1 * emp.value + 2.0 * (sigma2 * c_dd).sqrt()) / (1.0 - 2.0 * root)
            } else {
                f64::INFINITY
            };
            Ok(BoundCertificate::new(
                TheoremId::Thm12,
                value,
                vec![
                    ("emp_risk", emp.value),
                    ("sigma2", sigma2),
                    ("log_ratio", log_ratio),
                    ("n", nf),
                    ("beta", beta),
                    ("c_double_prime", c_dd),
                    ("c", kp.c),
                    ("gamma", kp.gamma),
                    ("kappa1", kp.kappa1),
                    ("kappa2", kp.kappa2),
                    ("kappa3", kp.kappa3),
                ],
            )
            .with_estimator(emp.estimator))
        }
    }
}

// ---------------------------------------------------------------------------
// Auxiliary numeric facts
// ---------------------------------------------------------------------------

/// The scalar inequality behind the adaptive bound's constants:
/// `x + ln(eπ²(x+1)²/(6β)) ≤ ((a+3)/(a+1))x + ln(eπ²(a+1)²/(6β)) − 2a/(a+1)`,
/// tight exactly at `x = a`. Checked with a small float slack.
pub fn check_a19_inequality(x: f64, a: f64, beta: f64) -> bool {
    if x < 0.0 || a <= 0.0 || !(beta > 0.0 && beta < 1.0) {
        return false;
    }
    // Common terms cancel: the comparison reduces to
    // 2·ln((x+1)/(a+1)) − 2x/(a+1) + 2a/(a+1) ≤ 0.
    let lhs = 2.0 * ((x + 1.0) / (a + 1.0)).ln() - 2.0 * x / (a + 1.0) + 2.0 * a / (a + 1.0);
    lhs <= 1e-12 * (1.0 + x.abs())
}

/// The penalty (complexity) part of the adaptive bound as a function of n,
/// optionally with the `ln ξ(n)` contribution frozen at a fixed value so the
/// polynomial rate can be isolated: `m_p^{1/p}(p/(p−1))(κ2·C′/n + κ3)^{(p−1)/p}`.
pub fn thm2_complexity_term(
    kp: &KappaParams,
    p: f64,
    m_p: f64,
    d: f64,
    beta: f64,
    n: u64,
    frozen_log_xi: Option<f64>,
) -> Result<f64> {
    check_beta(beta)?;
    check_nonneg_divergence(d)?;
    let log_xi = match frozen_log_xi {
        Some(v) => v,
        None => dist::xi(n)?.value.ln(),
    };
    let constant = 10.0 * std::f64::consts::E * std::f64::consts::PI * std::f64::consts::PI;
    let c_prime = 1.1 * d + constant.ln() + log_xi - beta.ln();
    let base = kp.kappa2 * c_prime / n as f64 + kp.kappa3;
    Ok((m_p.ln() / p).exp() * (p / (p - 1.0)) * base.powf((p - 1.0) / p))
}
