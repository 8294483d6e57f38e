//! Monte-Carlo validation that the bounds hold with their promised
//! probability, exact mutual-information enumeration, the change-of-measure
//! master inequality check, bound-comparison sweeps, rate-slope fits, and
//! CSV emission.
//!
//! Ground-truth population risks are exact finite sums (or closed-form
//! moments), never Monte-Carlo estimates, so a counted "violation" is
//! unambiguous. Per-trial randomness comes from streams derived by
//! [`crate::rng::trial_seed`], and aggregation is order-independent, so a
//! report is bit-identical for any worker count.

use crate::bounds::{
    self, adaptive_lambda_bound_thm2, bounded_moment_bound, bounded_variance_bound_thm5,
    c_double_prime, chernoff_analogue_bound, expectation_bound, fixed_lambda_bound_thm1, kappas,
    mcallester_bound, prior_variance_bounds_thm4, simultaneous_lambda_bound_thm3,
    single_draw_bound, thm11_threshold, thm1_threshold, thm2_threshold, thm8_threshold,
    truncation_bound, BoundCertificate, ComplexityTerm, ExpectationTheorem, KappaParams,
    LambdaPolicy, MiTerms, MomentVariant, PsiStarInverse, SingleDrawTheorem, TailVariant,
    TheoremId, VarianceBaseline,
};
use crate::dist::{self, binary_kl, divergence, log_density_ratio, DiscreteDistribution, DivergenceKind};
use crate::math::{self, CompensatedSum};
use crate::rng::{trial_seed, SplitMix64, SEED_SCHEME};
use crate::scenario::{Dataset, Scenario};
use crate::truncation::{empirical_risk, empirical_risk_single, EmpiricalRisk, LossTransform};
use crate::{Error, Result};
use rayon::prelude::*;
use std::io::Write;

/// Confidence level of the exact binomial guard on the violation
/// probability.
pub const BINOMIAL_GUARD_LEVEL: f64 = 0.999;

/// Enumeration budget for exact ground truth: |Z|^n may not exceed this.
pub const ENUMERATION_BUDGET: f64 = 1e6;

/// Replications used by the sampling fallback of the expectation check.
pub const EXPECTATION_REPLICATIONS: u64 = 100_000;

/// One coverage trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRow {
    pub trial: u64,
    pub seed: u64,
    pub bound_value: f64,
    pub true_risk: f64,
    pub violated: bool,
}

/// Exact expectation comparison produced by the expectation-check regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationComparison {
    pub lhs: f64,
    pub rhs: f64,
    /// Standard error of the sampling fallback; `None` when the comparison
    /// is exact.
    pub std_error: Option<f64>,
}

/// Violation counts for one bound on one scenario, with the exact one-sided
/// binomial upper confidence bound on the true violation probability.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub trials: u64,
    pub violations: u64,
    pub beta: f64,
    pub violation_rate: f64,
    pub exact_binomial_upper: f64,
    pub master_seed: u64,
    pub seed_rule: &'static str,
    pub rows: Vec<TrialRow>,
    pub expectation: Option<ExpectationComparison>,
}

impl CoverageReport {
    fn from_rows(rows: Vec<TrialRow>, beta: f64, master_seed: u64) -> Self {
        let trials = rows.len() as u64;
        let violations = rows.iter().filter(|r| r.violated).count() as u64;
        Self {
            trials,
            violations,
            beta,
            violation_rate: violations as f64 / trials.max(1) as f64,
            exact_binomial_upper: exact_binomial_upper(violations, trials, BINOMIAL_GUARD_LEVEL),
            master_seed,
            seed_rule: SEED_SCHEME,
            rows,
            expectation: None,
        }
    }
}

/// Which probabilistic contract a coverage run validates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Posterior-averaged risk versus a data-dependent certificate.
    PacBayes,
    /// Risk of one sampled hypothesis, over data and draw jointly.
    SingleDraw,
    /// Expected risks compared once, exactly.
    ExpectationCheck,
}

/// Theorem id plus the parameter policy of a coverage run. Assumption
/// constants (moment bound, variance bound, loss range) always come from
/// the scenario's exact ground truth, never from the caller, so a run can
/// only probe the theorem and not a misstated premise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSpec {
    pub theorem: TheoremId,
    pub beta: f64,
    pub c: f64,
    pub gamma: f64,
    pub lambda: Option<f64>,
    pub lambda_policy: LambdaPolicy,
    pub p: Option<f64>,
}

impl BoundSpec {
    pub fn new(theorem: TheoremId, beta: f64) -> Self {
        Self {
            theorem,
            beta,
            c: 1.0,
            gamma: std::f64::consts::E / (std::f64::consts::E - 1.0),
            lambda: None,
            lambda_policy: LambdaPolicy::DataIndependent,
            p: None,
        }
    }

    pub fn with_kappa(mut self, c: f64, gamma: f64) -> Self {
        self.c = c;
        self.gamma = gamma;
        self
    }

    pub fn with_lambda(mut self, lambda: f64, policy: LambdaPolicy) -> Self {
        self.lambda = Some(lambda);
        self.lambda_policy = policy;
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn regime(&self) -> Regime {
        match self.theorem {
            TheoremId::Thm10 | TheoremId::Thm11 | TheoremId::Thm12 => Regime::SingleDraw,
            TheoremId::Thm6 | TheoremId::Thm7 | TheoremId::Thm8 | TheoremId::Thm9 => {
                Regime::ExpectationCheck
            }
            _ => Regime::PacBayes,
        }
    }

    fn lambda(&self) -> Result<f64> {
        self.lambda
            .ok_or_else(|| Error::Config(format!("{} needs a lambda", self.theorem.as_str())))
    }

    fn p(&self) -> Result<f64> {
        self.p.ok_or_else(|| Error::Config(format!("{} needs a moment order p", self.theorem.as_str())))
    }

    /// Reject statistically invalid protocols up front: the fixed-λ results
    /// are only covered by their guarantee when λ predates the data.
    pub fn validate_protocol(&self) -> Result<()> {
        let fixed_lambda = matches!(
            self.theorem,
            TheoremId::Lemma1 | TheoremId::Lemma2 | TheoremId::Lemma3 | TheoremId::Lemma4
        );
        if fixed_lambda && self.lambda_policy == LambdaPolicy::DataDependent {
            return Err(Error::ProtocolViolation(format!(
                "{} requires a data-independent lambda; only the adaptive and simultaneous forms license data-dependent tuning",
                self.theorem.as_str()
            )));
        }
        Ok(())
    }
}

struct Assumptions {
    m_p: Option<f64>,
    sigma2: Option<f64>,
    range: Option<f64>,
}

/// Caller-supplied replacements for the scenario's exact assumption
/// constants. Coverage runs never use these; single-certificate evaluation
/// may, e.g. to reproduce a bound at a published moment value.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AssumptionOverrides {
    pub m_p: Option<f64>,
    pub sigma2: Option<f64>,
}

/// One certificate computed on a single drawn training set (trial 0 of the
/// given master seed), exactly as a coverage trial would compute it.
#[derive(Debug, Clone)]
pub struct TrialCertificate {
    pub certificate: BoundCertificate,
    pub true_risk: f64,
    pub seed: u64,
    /// The sampled hypothesis index, in the single-draw regime.
    pub hypothesis: Option<usize>,
}

/// Evaluate one bound on one drawn dataset.
pub fn certificate_once(
    scenario: &Scenario,
    spec: &BoundSpec,
    overrides: &AssumptionOverrides,
    master_seed: u64,
    trial: u64,
) -> Result<TrialCertificate> {
    spec.validate_protocol()?;
    let mut assumptions = scenario_assumptions(scenario, spec)?;
    if let Some(v) = overrides.m_p {
        assumptions.m_p = Some(v);
    }
    if let Some(v) = overrides.sigma2 {
        assumptions.sigma2 = Some(v);
    }
    let seed = trial_seed(master_seed, trial);
    let mut rng = SplitMix64::new(seed);
    let dataset = scenario.draw(&mut rng);
    let posterior = scenario.posterior(&dataset)?;
    let n = scenario.n() as u64;
    let kp = kappas(spec.c, spec.gamma)?;
    match spec.regime() {
        Regime::PacBayes => {
            let d = divergence(&posterior, scenario.prior(), DivergenceKind::RelativeEntropy)?;
            let certificate =
                pac_bayes_certificate(scenario, spec, &assumptions, &dataset, &posterior, d, n, &kp)?;
            Ok(TrialCertificate {
                certificate,
                true_risk: scenario.posterior_risk(&posterior),
                seed,
                hypothesis: None,
            })
        }
        Regime::SingleDraw => {
            let w = posterior.sample_index(rng.next_uniform());
            let log_ratio = log_density_ratio(&posterior, scenario.prior(), w)?;
            let certificate =
                single_draw_certificate(scenario, spec, &assumptions, &dataset, w, log_ratio, n, &kp)?;
            Ok(TrialCertificate {
                certificate,
                true_risk: scenario.population_risk(w),
                seed,
                hypothesis: Some(w),
            })
        }
        Regime::ExpectationCheck => Err(Error::Config(
            "expectation bounds compare expectations, not single draws; use the coverage command".into(),
        )),
    }
}

fn scenario_assumptions(scenario: &Scenario, spec: &BoundSpec) -> Result<Assumptions> {
    let m_p = match spec.p {
        Some(p) => Some(scenario.moment_bound(p)?),
        None => None,
    };
    Ok(Assumptions {
        m_p,
        sigma2: Some(scenario.variance_bound()?),
        range: Some(scenario.max_loss()),
    })
}

/// Monte-Carlo coverage of one bound on one scenario.
///
/// Each trial draws a fresh training set (and, in the single-draw regime, a
/// hypothesis), computes the certificate under the declared protocol, and
/// compares it against the exact population risk. The expectation-check
/// regime ignores `trials` and compares expectations once, exactly when the
/// scenario is enumerable and by a 10⁵-replication estimate otherwise.
pub fn coverage_estimate(
    scenario: &Scenario,
    spec: &BoundSpec,
    trials: u64,
    master_seed: u64,
    regime: Regime,
    workers: usize,
) -> Result<CoverageReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }
    if workers == 0 {
        return Err(Error::InvalidInput("workers must be >= 1".into()));
    }
    if regime != spec.regime() {
        return Err(Error::Config(format!(
            "{} validates the {:?} regime, not {:?}",
            spec.theorem.as_str(),
            spec.regime(),
            regime
        )));
    }
    spec.validate_protocol()?;
    if regime == Regime::ExpectationCheck {
        return expectation_check(scenario, spec, master_seed);
    }

    let assumptions = scenario_assumptions(scenario, spec)?;
    match spec.theorem {
        TheoremId::Eq1 => {
            let range = assumptions.range.unwrap();
            if range > 1.0 {
                return Err(Error::InvalidInput(format!(
                    "the square-root bound needs losses in [0, 1]; scenario max loss is {range}"
                )));
            }
        }
        TheoremId::Eq2 | TheoremId::Thm10 if !assumptions.range.unwrap().is_finite() => {
            return Err(Error::InvalidInput(format!(
                "{} needs a bounded loss; scenario is unbounded",
                spec.theorem.as_str()
            )));
        }
        _ => {}
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let rows: Vec<TrialRow> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| run_trial(scenario, spec, &assumptions, master_seed, t, regime))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(CoverageReport::from_rows(rows, spec.beta, master_seed))
}

fn run_trial(
    scenario: &Scenario,
    spec: &BoundSpec,
    assumptions: &Assumptions,
    master_seed: u64,
    trial: u64,
    regime: Regime,
) -> Result<TrialRow> {
    let seed = trial_seed(master_seed, trial);
    let mut rng = SplitMix64::new(seed);
    let dataset = scenario.draw(&mut rng);
    let posterior = scenario.posterior(&dataset)?;
    let n = scenario.n() as u64;
    let kp = kappas(spec.c, spec.gamma)?;

    let (bound_value, true_risk) = match regime {
        Regime::PacBayes => {
            let d = divergence(&posterior, scenario.prior(), DivergenceKind::RelativeEntropy)?;
            let cert =
                pac_bayes_certificate(scenario, spec, assumptions, &dataset, &posterior, d, n, &kp)?;
            (cert.value(), scenario.posterior_risk(&posterior))
        }
        Regime::SingleDraw => {
            // Draw order is fixed: dataset first, then the hypothesis.
            let w = posterior.sample_index(rng.next_uniform());
            let log_ratio = log_density_ratio(&posterior, scenario.prior(), w)?;
            let cert =
                single_draw_certificate(scenario, spec, assumptions, &dataset, w, log_ratio, n, &kp)?;
            (cert.value(), scenario.population_risk(w))
        }
        Regime::ExpectationCheck => unreachable!("handled by expectation_check"),
    };

    Ok(TrialRow { trial, seed, bound_value, true_risk, violated: true_risk > bound_value })
}

#[allow(clippy::too_many_arguments)]
fn pac_bayes_certificate(
    scenario: &Scenario,
    spec: &BoundSpec,
    assumptions: &Assumptions,
    dataset: &Dataset,
    posterior: &DiscreteDistribution,
    d: f64,
    n: u64,
    kp: &KappaParams,
) -> Result<BoundCertificate> {
    match spec.theorem {
        TheoremId::Eq1 => {
            let c_term = ComplexityTerm::pac_bayes(d, n, spec.beta)?;
            let emp = empirical_risk(posterior, scenario, dataset, &LossTransform::Identity)?;
            mcallester_bound(emp.value, &c_term)
        }
        TheoremId::Eq2 => {
            // A loss bounded in [0, b] has a centered CGF dominated by the
            // sub-Gaussian envelope with sigma = b/2.
            let sigma = assumptions.range.unwrap() / 2.0;
            let emp = empirical_risk(posterior, scenario, dataset, &LossTransform::Identity)?;
            chernoff_analogue_bound(emp.value, d, n, spec.beta, PsiStarInverse::SubGaussian { sigma })
        }
        TheoremId::Lemma1 | TheoremId::Lemma2 => {
            let lambda = spec.lambda()?;
            let threshold = n as f64 / lambda;
            let c_term = ComplexityTerm::pac_bayes(d, n, spec.beta)?;
            let (variant, transform) = match spec.theorem {
                TheoremId::Lemma1 => (TailVariant::Lemma1, LossTransform::clip_min(threshold)?),
                _ => (TailVariant::Lemma2, LossTransform::keep_below(threshold)?),
            };
            let emp = empirical_risk(posterior, scenario, dataset, &transform)?;
            let mut tail = CompensatedSum::new();
            for w in 0..scenario.hypothesis_count() {
                let pw = posterior.weight(w);
                if pw > 0.0 {
                    tail.add(pw * scenario.tail_excess_mean(w, threshold)?);
                }
            }
            truncation_bound(&emp, kp, &c_term, lambda, tail.value(), variant, spec.lambda_policy)
        }
        TheoremId::Lemma3 | TheoremId::Lemma4 => {
            let lambda = spec.lambda()?;
            let p = spec.p()?;
            let threshold = n as f64 / lambda;
            let c_term = ComplexityTerm::pac_bayes(d, n, spec.beta)?;
            let (variant, transform) = match spec.theorem {
                TheoremId::Lemma3 => (MomentVariant::Lemma3, LossTransform::keep_below(threshold)?),
                _ => (MomentVariant::Lemma4, LossTransform::power_corrected(threshold, p)?),
            };
            let emp = empirical_risk(posterior, scenario, dataset, &transform)?;
            bounded_moment_bound(
                &emp,
                kp,
                &c_term,
                lambda,
                p,
                assumptions.m_p.unwrap(),
                variant,
                spec.lambda_policy,
            )
        }
        TheoremId::Thm1 => {
            let p = spec.p()?;
            let m_p = assumptions.m_p.unwrap();
            let c_term = ComplexityTerm::pac_bayes(d, n, spec.beta)?;
            let threshold = thm1_threshold(n, p, m_p);
            let transform = if threshold.is_finite() {
                LossTransform::keep_below(threshold)?
            } else {
                LossTransform::Identity
            };
            let emp = empirical_risk(posterior, scenario, dataset, &transform)?;
            fixed_lambda_bound_thm1(&emp, kp, &c_term, p, m_p)
        }
        TheoremId::Thm2 => {
            let p = spec.p()?;
            let m_p = assumptions.m_p.unwrap();
            let c_prime = ComplexityTerm::pac_bayes_prime(d, n, spec.beta)?;
            let t_star = thm2_threshold(kp, &c_prime, p, m_p)?;
            let transform = if t_star.is_finite() {
                LossTransform::keep_below(t_star)?
            } else {
                LossTransform::Identity
            };
            let emp = empirical_risk(posterior, scenario, dataset, &transform)?;
            adaptive_lambda_bound_thm2(&emp, kp, &c_prime, p, m_p).map(|(cert, _)| cert)
        }
        TheoremId::Thm3 => {
            let lambda = spec.lambda()?;
            let p = spec.p()?;
            let threshold = n as f64 / lambda;
            let c_prime = ComplexityTerm::pac_bayes_prime(d, n, spec.beta)?;
            let emp =
                empirical_risk(posterior, scenario, dataset, &LossTransform::keep_below(threshold)?)?;
            simultaneous_lambda_bound_thm3(&emp, kp, &c_prime, lambda, p, assumptions.m_p.unwrap())
        }
        TheoremId::Thm5 => {
            let c_prime = ComplexityTerm::pac_bayes_prime(d, n, spec.beta)?;
            let cdd = c_double_prime(kp, &c_prime)?;
            let emp = empirical_risk(posterior, scenario, dataset, &LossTransform::Identity)?;
            bounded_variance_bound_thm5(emp.value, kp, assumptions.sigma2.unwrap(), cdd)
        }
        other => Err(Error::Config(format!(
            "{} does not define a per-trial posterior-averaged certificate",
            other.as_str()
        ))),
    }
}

#[allow(clippy::too_many_arguments)]
fn single_draw_certificate(
    scenario: &Scenario,
    spec: &BoundSpec,
    assumptions: &Assumptions,
    dataset: &Dataset,
    w: usize,
    log_ratio: f64,
    n: u64,
    kp: &KappaParams,
) -> Result<BoundCertificate> {
    match spec.theorem {
        TheoremId::Thm10 => {
            let emp = empirical_risk_single(w, scenario, dataset, &LossTransform::Identity)?;
            single_draw_bound(
                SingleDrawTheorem::Thm10 { range: assumptions.range.unwrap() },
                &emp,
                kp,
                log_ratio,
                n,
                spec.beta,
            )
        }
        TheoremId::Thm11 => {
            let p = spec.p()?;
            let m_p = assumptions.m_p.unwrap();
            let t_star = thm11_threshold(kp, log_ratio, n, spec.beta, p, m_p)?;
            let transform = if t_star.is_finite() {
                LossTransform::keep_below(t_star)?
            } else {
                LossTransform::Identity
            };
            let emp = empirical_risk_single(w, scenario, dataset, &transform)?;
            single_draw_bound(SingleDrawTheorem::Thm11 { p, m_p }, &emp, kp, log_ratio, n, spec.beta)
        }
        TheoremId::Thm12 => {
            let emp = empirical_risk_single(w, scenario, dataset, &LossTransform::Identity)?;
            single_draw_bound(
                SingleDrawTheorem::Thm12 { sigma2: assumptions.sigma2.unwrap() },
                &emp,
                kp,
                log_ratio,
                n,
                spec.beta,
            )
        }
        other => {
            Err(Error::Config(format!("{} is not a single-draw result", other.as_str())))
        }
    }
}

// ---------------------------------------------------------------------------
// Exact enumeration
// ---------------------------------------------------------------------------

fn enumeration_size(scenario: &Scenario) -> Result<f64> {
    let atoms = scenario.atom_count().ok_or_else(|| {
        Error::EnumerationBudget("exact enumeration needs a discrete (table) scenario".into())
    })?;
    Ok((atoms as f64).powi(scenario.n() as i32))
}

/// Visit every dataset tuple with its probability.
fn enumerate_datasets(
    scenario: &Scenario,
    mut visit: impl FnMut(&Dataset, f64) -> Result<()>,
) -> Result<()> {
    let size = enumeration_size(scenario)?;
    if size > ENUMERATION_BUDGET {
        return Err(Error::EnumerationBudget(format!(
            "|Z|^n = {size:.3e} exceeds the budget of {ENUMERATION_BUDGET:.0e}; use a smaller n or fewer atoms"
        )));
    }
    let atoms = scenario.atom_count().unwrap();
    let n = scenario.n();
    let weights: Vec<f64> = (0..atoms).map(|z| scenario.atom_prob(z).unwrap()).collect();
    let mut tuple = vec![0usize; n];
    loop {
        let mut prob = 1.0;
        for &z in &tuple {
            prob *= weights[z];
        }
        if prob > 0.0 {
            visit(&Dataset::Atoms(tuple.clone()), prob)?;
        }
        // Odometer increment.
        let mut i = 0;
        loop {
            if i == n {
                return Ok(());
            }
            tuple[i] += 1;
            if tuple[i] < atoms {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}

/// Exact `I(W;S)` and per-index `I(W;Zᵢ)` by full dataset enumeration.
///
/// `I(W;S) = E_S D(P_W^S ‖ P_W)` with `P_W` the dataset-averaged marginal;
/// each `I(W;Zᵢ)` comes from the exact joint over `(W, Zᵢ)`.
pub fn mutual_information_exact(scenario: &Scenario) -> Result<MiTerms> {
    let k = scenario.hypothesis_count();
    let n = scenario.n();
    let atoms = scenario.atom_count().ok_or_else(|| {
        Error::EnumerationBudget("exact mutual information needs a discrete (table) scenario".into())
    })?;
    let mut marginal = vec![0.0f64; k];
    let mut neg_cond_entropy = CompensatedSum::new(); // Σ_s P(s) Σ_w ρ ln ρ
    let mut joints = vec![vec![0.0f64; k * atoms]; n];

    enumerate_datasets(scenario, |dataset, prob| {
        let posterior = scenario.posterior(dataset)?;
        let Dataset::Atoms(tuple) = dataset else { unreachable!() };
        for w in 0..k {
            let rho = posterior.weight(w);
            if rho > 0.0 {
                marginal[w] += prob * rho;
                neg_cond_entropy.add(prob * rho * rho.ln());
                for (i, &z) in tuple.iter().enumerate() {
                    joints[i][w * atoms + z] += prob * rho;
                }
            }
        }
        Ok(())
    })?;

    let mut marginal_entropy = CompensatedSum::new();
    for &pw in &marginal {
        if pw > 0.0 {
            marginal_entropy.add(pw * pw.ln());
        }
    }
    let i_ws = (neg_cond_entropy.value() - marginal_entropy.value()).max(0.0);

    let mut i_wzi = Vec::with_capacity(n);
    for joint in &joints {
        let mut mi = CompensatedSum::new();
        for w in 0..k {
            for z in 0..atoms {
                let j = joint[w * atoms + z];
                if j > 0.0 {
                    let pz = scenario.atom_prob(z)?;
                    mi.add(j * (j / (marginal[w] * pz)).ln());
                }
            }
        }
        i_wzi.push(mi.value().max(0.0));
    }
    Ok(MiTerms { i_ws, i_wzi })
}

fn expectation_check(scenario: &Scenario, spec: &BoundSpec, master_seed: u64) -> Result<CoverageReport> {
    let n = scenario.n() as u64;
    let kp = kappas(spec.c, spec.gamma)?;
    let exact = enumeration_size(scenario).map(|s| s <= ENUMERATION_BUDGET).unwrap_or(false);

    let (mi, expected_risk, expected_emp_identity, emp_thm8, std_error) = if exact {
        let mi = mutual_information_exact(scenario)?;
        let mut risk = CompensatedSum::new();
        let mut emp_id = CompensatedSum::new();
        enumerate_datasets(scenario, |dataset, prob| {
            let posterior = scenario.posterior(dataset)?;
            risk.add(prob * scenario.posterior_risk(&posterior));
            let e = empirical_risk(&posterior, scenario, dataset, &LossTransform::Identity)?;
            emp_id.add(prob * e.value);
            Ok(())
        })?;
        let thm8_emp = match spec.theorem {
            TheoremId::Thm8 => {
                let p = spec.p()?;
                let m_p = scenario.moment_bound(p)?;
                let t_star = thm8_threshold(&[kp], &mi, n, p, m_p)?;
                let transform = if t_star.is_finite() {
                    LossTransform::keep_below(t_star)?
                } else {
                    LossTransform::Identity
                };
                let mut acc = CompensatedSum::new();
                enumerate_datasets(scenario, |dataset, prob| {
                    let posterior = scenario.posterior(dataset)?;
                    acc.add(prob * empirical_risk(&posterior, scenario, dataset, &transform)?.value);
                    Ok(())
                })?;
                Some((acc.value(), transform))
            }
            _ => None,
        };
        (mi, risk.value(), emp_id.value(), thm8_emp, None)
    } else {
        sampled_expectations(scenario, spec, &kp, master_seed)?
    };

    let emp = match (spec.theorem, emp_thm8) {
        (TheoremId::Thm8, Some((value, transform))) => EmpiricalRisk::new(value, transform),
        _ => EmpiricalRisk::new(expected_emp_identity, LossTransform::Identity),
    };

    let cert = match spec.theorem {
        TheoremId::Thm6 => expectation_bound(
            ExpectationTheorem::Thm6 { range: scenario.max_loss() },
            &emp,
            &[kp],
            &mi,
            n,
        )?,
        TheoremId::Thm7 => expectation_bound(
            ExpectationTheorem::Thm7 { range: scenario.max_loss() },
            &emp,
            &[kp],
            &mi,
            n,
        )?,
        TheoremId::Thm8 => {
            let p = spec.p()?;
            let m_p = scenario.moment_bound(p)?;
            expectation_bound(ExpectationTheorem::Thm8 { p, m_p }, &emp, &[kp], &mi, n)?
        }
        TheoremId::Thm9 => expectation_bound(
            ExpectationTheorem::Thm9 { sigma2: scenario.variance_bound()? },
            &emp,
            &[kp],
            &mi,
            n,
        )?,
        other => return Err(Error::Config(format!("{} is not an expectation bound", other.as_str()))),
    };

    let lhs = expected_risk;
    let rhs = cert.value();
    let violated = lhs > rhs;
    let mut report = CoverageReport::from_rows(
        vec![TrialRow { trial: 0, seed: master_seed, bound_value: rhs, true_risk: lhs, violated }],
        spec.beta,
        master_seed,
    );
    report.expectation = Some(ExpectationComparison { lhs, rhs, std_error });
    Ok(report)
}

type SampledExpectations = (MiTerms, f64, f64, Option<(f64, LossTransform)>, Option<f64>);

/// Replication fallback when |Z|^n exceeds the enumeration budget: plug-in
/// estimates of the expected risks and of the information terms from 10⁵
/// sampled datasets, with a standard error on the expected risk.
fn sampled_expectations(
    scenario: &Scenario,
    spec: &BoundSpec,
    kp: &KappaParams,
    master_seed: u64,
) -> Result<SampledExpectations> {
    let k = scenario.hypothesis_count();
    let atoms = scenario.atom_count().ok_or_else(|| {
        Error::EnumerationBudget("the expectation check needs a discrete (table) scenario".into())
    })?;
    let n = scenario.n();
    let reps = EXPECTATION_REPLICATIONS;
    let mut marginal = vec![0.0f64; k];
    let mut joints = vec![vec![0.0f64; k * atoms]; n];
    let mut risk_sum = CompensatedSum::new();
    let mut risk_sq = CompensatedSum::new();
    let mut emp_sum = CompensatedSum::new();
    let mut posteriors_entropy = CompensatedSum::new();

    for rep in 0..reps {
        let mut rng = SplitMix64::new(trial_seed(master_seed, rep));
        let dataset = scenario.draw(&mut rng);
        let posterior = scenario.posterior(&dataset)?;
        let Dataset::Atoms(tuple) = &dataset else { unreachable!() };
        let r = scenario.posterior_risk(&posterior);
        risk_sum.add(r);
        risk_sq.add(r * r);
        emp_sum.add(empirical_risk(&posterior, scenario, &dataset, &LossTransform::Identity)?.value);
        for w in 0..k {
            let rho = posterior.weight(w);
            if rho > 0.0 {
                marginal[w] += rho;
                posteriors_entropy.add(rho * rho.ln());
                for (i, &z) in tuple.iter().enumerate() {
                    joints[i][w * atoms + z] += rho;
                }
            }
        }
    }
    let repsf = reps as f64;
    for m in &mut marginal {
        *m /= repsf;
    }
    let mut marginal_entropy = CompensatedSum::new();
    for &pw in &marginal {
        if pw > 0.0 {
            marginal_entropy.add(pw * pw.ln());
        }
    }
    let i_ws = (posteriors_entropy.value() / repsf - marginal_entropy.value()).max(0.0);
    let mut i_wzi = Vec::with_capacity(n);
    for joint in &joints {
        let mut mi = CompensatedSum::new();
        for w in 0..k {
            for z in 0..atoms {
                let j = joint[w * atoms + z] / repsf;
                if j > 0.0 && marginal[w] > 0.0 {
                    let pz = scenario.atom_prob(z)?;
                    mi.add(j * (j / (marginal[w] * pz)).ln());
                }
            }
        }
        i_wzi.push(mi.value().max(0.0));
    }
    let mi = MiTerms { i_ws, i_wzi };
    let mean_risk = risk_sum.value() / repsf;
    let var = (risk_sq.value() / repsf - mean_risk * mean_risk).max(0.0);
    let std_error = (var / repsf).sqrt();
    let mean_emp = emp_sum.value() / repsf;

    let thm8_emp = match spec.theorem {
        TheoremId::Thm8 => {
            let p = spec.p()?;
            let m_p = scenario.moment_bound(p)?;
            let t_star = thm8_threshold(&[*kp], &mi, n as u64, p, m_p)?;
            let transform = if t_star.is_finite() {
                LossTransform::keep_below(t_star)?
            } else {
                LossTransform::Identity
            };
            let mut acc = CompensatedSum::new();
            for rep in 0..reps {
                let mut rng = SplitMix64::new(trial_seed(master_seed, rep));
                let dataset = scenario.draw(&mut rng);
                let posterior = scenario.posterior(&dataset)?;
                acc.add(empirical_risk(&posterior, scenario, &dataset, &transform)?.value);
            }
            Some((acc.value() / repsf, transform))
        }
        _ => None,
    };
    Ok((mi, mean_risk, mean_emp, thm8_emp, Some(std_error)))
}

// ---------------------------------------------------------------------------
// Master inequality
// ---------------------------------------------------------------------------

/// The gap functional checked by [`master_inequality_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapFunction {
    /// `f(w, s) = d(R̂(w,s) ‖ R(w))`, the Bernoulli-KL gap; requires losses
    /// in [0, 1] and has normalizer Δ = ξ(n).
    BinaryKlGap,
    /// `f(w, s) = η·(R(w) − R̂(w,s))` with normalizer
    /// `Δ = E_{W'∼prior} (E_z e^{η(R(W')−ℓ(W',z))})^n`, computed exactly.
    LinearGap { eta: f64 },
}

/// Validates the change-of-measure master inequality
/// `f(W,S) ≤ (1/n)[ln(dP/dQ)(W) + ln(Δ/β)]` by Monte-Carlo over the joint
/// draw of the training set and the hypothesis; the violation frequency
/// must stay below β.
pub fn master_inequality_check(
    scenario: &Scenario,
    f_choice: GapFunction,
    beta: f64,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<CoverageReport> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidInput(format!("beta = {beta} outside (0, 1)")));
    }
    if trials == 0 || workers == 0 {
        return Err(Error::InvalidInput("trials and workers must be >= 1".into()));
    }
    let n = scenario.n() as u64;
    let log_delta = match f_choice {
        GapFunction::BinaryKlGap => {
            if scenario.max_loss() > 1.0 {
                return Err(Error::InvalidInput(
                    "the binary-KL gap needs losses in [0, 1]".into(),
                ));
            }
            dist::xi(n)?.value.ln()
        }
        GapFunction::LinearGap { eta } => log_linear_gap_normalizer(scenario, eta)?,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let rows: Vec<TrialRow> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| -> Result<TrialRow> {
                let seed = trial_seed(master_seed, t);
                let mut rng = SplitMix64::new(seed);
                let dataset = scenario.draw(&mut rng);
                let posterior = scenario.posterior(&dataset)?;
                let w = posterior.sample_index(rng.next_uniform());
                let log_ratio = log_density_ratio(&posterior, scenario.prior(), w)?;
                let emp =
                    empirical_risk_single(w, scenario, &dataset, &LossTransform::Identity)?.value;
                let risk = scenario.population_risk(w);
                let f_value = match f_choice {
                    GapFunction::BinaryKlGap => binary_kl(emp.min(1.0), risk)?,
                    GapFunction::LinearGap { eta } => eta * (risk - emp),
                };
                let rhs = (log_ratio + log_delta - beta.ln()) / n as f64;
                Ok(TrialRow {
                    trial: t,
                    seed,
                    bound_value: rhs,
                    true_risk: f_value,
                    violated: f_value > rhs,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(CoverageReport::from_rows(rows, beta, master_seed))
}

/// `ln Δ` for the linear gap, from exact per-atom sums. Only discrete
/// (table) scenarios qualify; the moment generating function of a general
/// quantile model is not exactly enumerable.
pub fn log_linear_gap_normalizer(scenario: &Scenario, eta: f64) -> Result<f64> {
    if !eta.is_finite() || eta <= 0.0 {
        return Err(Error::InvalidInput(format!("eta = {eta} must be positive and finite")));
    }
    let atoms = scenario.atom_count().ok_or_else(|| {
        Error::InvalidInput(
            "the linear-gap normalizer needs an exactly enumerable loss distribution".into(),
        )
    })?;
    let n = scenario.n() as f64;
    let prior = scenario.prior();
    let mut log_terms = Vec::with_capacity(scenario.hypothesis_count());
    for w in 0..scenario.hypothesis_count() {
        let risk = scenario.population_risk(w);
        let mut acc = CompensatedSum::new();
        for z in 0..atoms {
            let pz = scenario.atom_prob(z)?;
            if pz > 0.0 {
                let loss = scenario.loss_at(w, &Dataset::Atoms(vec![z]), 0)?;
                acc.add(pz * (eta * (risk - loss)).exp());
            }
        }
        log_terms.push(prior.weight(w).ln() + n * acc.value().ln());
    }
    Ok(math::log_sum_exp(&log_terms))
}

// ---------------------------------------------------------------------------
// Comparison sweep and rate fits
// ---------------------------------------------------------------------------

/// Fixed operating point of the bounded-variance comparison: the χ²
/// baselines against the relaxed high-probability bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonPoint {
    pub beta: f64,
    pub chi2: f64,
    pub emp_risk: f64,
    pub n: u64,
    pub sigma2: f64,
    pub c: f64,
    pub gamma: f64,
}

impl Default for ComparisonPoint {
    fn default() -> Self {
        Self {
            beta: 0.025,
            chi2: 200.0,
            emp_risk: 0.025,
            n: 10_000,
            sigma2: 1.0,
            c: 1.0,
            gamma: std::f64::consts::E / (std::f64::consts::E - 1.0),
        }
    }
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Beta,
    Chi2,
    EmpRisk,
    N,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Beta => "beta",
            SweepParam::Chi2 => "chi2",
            SweepParam::EmpRisk => "emp_risk",
            SweepParam::N => "n",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "beta" => SweepParam::Beta,
            "chi2" => SweepParam::Chi2,
            "emp_risk" => SweepParam::EmpRisk,
            "n" => SweepParam::N,
            other => return Err(Error::Config(format!("unknown sweep parameter `{other}`"))),
        })
    }

    /// Default grid for each swept parameter.
    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            SweepParam::Beta => crate::gibbs::log_grid(1e-3, 0.5, 25),
            SweepParam::Chi2 => crate::gibbs::log_grid(1.0, 1e4, 25),
            SweepParam::EmpRisk => (0..26).map(|i| i as f64 * 0.02).collect(),
            SweepParam::N => crate::gibbs::log_grid(1e2, 1e8, 25).iter().map(|v| v.round()).collect(),
        }
    }
}

/// One row per grid value: the three baselines and the relaxed
/// high-probability bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub swept: &'static str,
    pub grid: Vec<f64>,
    /// Per grid point: `[eq4, eq5, eq6, eq8_relaxed]`.
    pub rows: Vec<[f64; 4]>,
    pub fixed: ComparisonPoint,
}

/// Evaluate the bounded-variance comparison along one parameter axis. Every
/// row is recomputable bit-identically from `fixed` plus the grid value.
pub fn figure1_sweep(fixed: &ComparisonPoint, sweep: SweepParam, grid: &[f64]) -> Result<SweepTable> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("sweep grid is empty".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &g in grid {
        let mut point = *fixed;
        match sweep {
            SweepParam::Beta => point.beta = g,
            SweepParam::Chi2 => point.chi2 = g,
            SweepParam::EmpRisk => point.emp_risk = g,
            SweepParam::N => {
                if !(g >= 1.0) || g.fract() != 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "n grid values must be positive integers, got {g}"
                    )));
                }
                point.n = g as u64;
            }
        }
        rows.push(comparison_row(&point)?);
    }
    Ok(SweepTable { swept: sweep.as_str(), grid: grid.to_vec(), rows, fixed: *fixed })
}

/// `[eq4, eq5, eq6, eq8_relaxed]` at one operating point.
pub fn comparison_row(point: &ComparisonPoint) -> Result<[f64; 4]> {
    let eq4 = prior_variance_bounds_thm4(
        point.emp_risk,
        point.sigma2,
        point.chi2,
        point.n,
        point.beta,
        VarianceBaseline::Eq4,
    )?
    .value();
    let eq5 = prior_variance_bounds_thm4(
        point.emp_risk,
        point.sigma2,
        point.chi2,
        point.n,
        point.beta,
        VarianceBaseline::Eq5,
    )?
    .value();
    let eq6 = prior_variance_bounds_thm4(
        point.emp_risk,
        point.sigma2,
        point.chi2,
        point.n,
        point.beta,
        VarianceBaseline::Eq6,
    )?
    .value();
    let kp = kappas(point.c, point.gamma)?;
    let cdd = bounds::c_double_prime_chi2_relaxed(&kp, point.chi2, point.n, point.beta)?;
    let eq8 = bounded_variance_bound_thm5(point.emp_risk, &kp, point.sigma2, cdd)?.value();
    Ok([eq4, eq5, eq6, eq8])
}

/// Least-squares slope of `ln f(n)` against `ln n` over a log-spaced grid
/// of at least 5 points spanning at least 3 decades.
pub fn rate_fit(f: impl Fn(u64) -> Result<f64>, n_grid: &[u64]) -> Result<f64> {
    if n_grid.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "rate fit needs >= 5 grid points, got {}",
            n_grid.len()
        )));
    }
    let lo = *n_grid.iter().min().unwrap();
    let hi = *n_grid.iter().max().unwrap();
    if (hi as f64) < 1e3 * lo as f64 {
        return Err(Error::InvalidInput(format!(
            "rate fit grid must span >= 3 decades, got [{lo}, {hi}]"
        )));
    }
    let mut xs = Vec::with_capacity(n_grid.len());
    let mut ys = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let v = f(n)?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidInput(format!(
                "rate fit needs positive finite values, got {v} at n = {n}"
            )));
        }
        xs.push((n as f64).ln());
        ys.push(v.ln());
    }
    Ok(math::least_squares_slope(&xs, &ys))
}

// ---------------------------------------------------------------------------
// Exact binomial guard
// ---------------------------------------------------------------------------

/// Smallest `p` such that `P[Bin(trials, p) <= violations] <= 1 - level`:
/// the exact one-sided upper confidence bound on the violation probability.
/// Returns 1 when every trial violated.
pub fn exact_binomial_upper(violations: u64, trials: u64, level: f64) -> f64 {
    assert!(violations <= trials && trials > 0);
    assert!(level > 0.0 && level < 1.0);
    if violations == trials {
        return 1.0;
    }
    let alpha = 1.0 - level;
    let n = trials as usize;
    let k = violations as usize;
    let table = math::ln_factorial_table(n);
    let log_cdf = |p: f64| -> f64 {
        let terms: Vec<f64> = (0..=k)
            .map(|i| {
                math::ln_choose(&table, n, i) + i as f64 * p.ln() + (n - i) as f64 * (-p).ln_1p()
            })
            .collect();
        math::log_sum_exp(&terms)
    };
    let mut lo = violations as f64 / trials as f64;
    let mut hi = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_cdf(mid) <= alpha.ln() {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 {
            break;
        }
    }
    hi
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

/// `trial,seed,bound_value,true_risk,violated` — UTF-8, LF endings, floats
/// at 17 significant digits, booleans as 0/1.
pub fn write_coverage_csv(report: &CoverageReport, out: &mut impl Write) -> std::io::Result<()> {
    out.write_all(b"trial,seed,bound_value,true_risk,violated\n")?;
    for row in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.trial,
            row.seed,
            bounds::format_float(row.bound_value),
            bounds::format_float(row.true_risk),
            u8::from(row.violated)
        )?;
    }
    Ok(())
}

/// `sweep_value,eq4,eq5,eq6,eq8_relaxed` — UTF-8, LF endings, floats at 17
/// significant digits.
pub fn write_sweep_csv(table: &SweepTable, out: &mut impl Write) -> std::io::Result<()> {
    out.write_all(b"sweep_value,eq4,eq5,eq6,eq8_relaxed\n")?;
    for (g, row) in table.grid.iter().zip(&table.rows) {
        writeln!(
            out,
            "{},{},{},{},{}",
            bounds::format_float(*g),
            bounds::format_float(row[0]),
            bounds::format_float(row[1]),
            bounds::format_float(row[2]),
            bounds::format_float(row[3])
        )?;
    }
    Ok(())
}

/// `term,value` rows: the full-dataset information, then one row per index.
pub fn write_mi_csv(mi: &MiTerms, out: &mut impl Write) -> std::io::Result<()> {
    out.write_all(b"term,value\n")?;
    writeln!(out, "i_ws,{}", bounds::format_float(mi.i_ws))?;
    for (i, v) in mi.i_wzi.iter().enumerate() {
        writeln!(out, "i_wz{},{}", i, bounds::format_float(*v))?;
    }
    Ok(())
}
