//! Gibbs posteriors over finite hypothesis classes and deterministic
//! parameter search for certificate minimization.
//!
//! The Gibbs construction takes the fully assembled temperature (the
//! coefficient multiplying the risk in the exponent); callers pick the
//! per-bound convention, e.g. `λ·κ1/κ2` for the fixed-λ truncation bound and
//! `λ/2·κ1/κ2` for its simultaneous-λ variant.

use crate::bounds::BoundCertificate;
use crate::dist::DiscreteDistribution;
use crate::{Error, Result};
use rayon::prelude::*;

/// Inputs to a Gibbs posterior: a full-support prior, one (typically
/// truncated empirical) risk per hypothesis, and a nonnegative temperature.
/// Temperature zero reproduces the prior exactly.
#[derive(Debug, Clone, Copy)]
pub struct GibbsSpec<'a> {
    pub prior: &'a DiscreteDistribution,
    pub risks: &'a [f64],
    pub temperature: f64,
}

/// Posterior with weights ∝ prior·exp(−temperature·risk), normalized in log
/// space (the maximum exponent is subtracted before exponentiating, so a
/// constant shift of all risks cancels exactly).
pub fn gibbs_posterior(spec: &GibbsSpec) -> Result<DiscreteDistribution> {
    let GibbsSpec { prior, risks, temperature } = *spec;
    if risks.len() != prior.len() {
        return Err(Error::Contract(format!(
            "{} risks for a prior over {} hypotheses",
            risks.len(),
            prior.len()
        )));
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidInput(format!("temperature {temperature} must be finite and >= 0")));
    }
    for (i, &r) in risks.iter().enumerate() {
        if !r.is_finite() {
            return Err(Error::InvalidInput(format!("risk {r} of hypothesis {i} is not finite")));
        }
    }
    let mut log_weights = Vec::with_capacity(risks.len());
    for (i, &r) in risks.iter().enumerate() {
        let prior_w = prior.weight(i);
        if prior_w <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "prior must have full support; atom {i} has zero mass"
            )));
        }
        log_weights.push(prior_w.ln() - temperature * r);
    }
    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = log_weights.iter().map(|&lw| (lw - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    assert!(total > 0.0, "max-subtracted exponentials cannot all underflow");
    for w in &mut weights {
        *w /= total;
    }
    prior.with_weights(weights)
}

/// Search grids over the bound parameters `(c, γ, λ)`.
#[derive(Debug, Clone)]
pub struct ParameterGrids {
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl ParameterGrids {
    /// Default grids: `c` over {0.1, …, 1.0} (10 points), `γ − 1` log-spaced
    /// over [10⁻³, 10³ − 1] (60 points), `λ` log-spaced over
    /// [10⁻³·√n, 10³·√n] (120 points). Wide enough to bracket every regime
    /// the experiments exercise; override per call when it is not.
    pub fn default_for(n: u64) -> Self {
        let c = (1..=10).map(|i| i as f64 / 10.0).collect();
        let gamma = log_grid(1e-3, 1e3 - 1.0, 60).into_iter().map(|g| 1.0 + g).collect();
        let sqrt_n = (n as f64).sqrt();
        let lambda = log_grid(1e-3 * sqrt_n, 1e3 * sqrt_n, 120);
        Self { c, gamma, lambda }
    }
}

/// Geometric grid from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && points >= 2);
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    (0..points).map(|i| lo * (ratio * i as f64).exp()).collect()
}

/// Outcome of [`optimize_certificate`].
#[derive(Debug, Clone)]
pub struct OptimizedCertificate {
    pub c: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub certificate: BoundCertificate,
    /// True when every grid point evaluated to +∞.
    pub vacuous: bool,
}

/// Exhaustive grid minimum of a certificate-producing functional over
/// `(c, γ, λ)`, with optional golden-section refinement of λ around the grid
/// argmin.
///
/// Ties break toward smaller λ, then smaller γ, then larger c, so the result
/// is identical across runs and across any parallel evaluation order. The
/// refinement step first verifies on the evaluated grid that the λ-profile
/// at the winning `(c, γ)` is convex (second differences nonnegative up to
/// rounding); if the check fails the grid argmin is returned unrefined.
pub fn optimize_certificate<F>(
    bound: F,
    grids: &ParameterGrids,
    refine: bool,
) -> Result<OptimizedCertificate>
where
    F: Fn(f64, f64, f64) -> Result<BoundCertificate> + Sync,
{
    if grids.c.is_empty() || grids.gamma.is_empty() || grids.lambda.is_empty() {
        return Err(Error::InvalidInput("parameter grids must be nonempty".into()));
    }
    let nc = grids.c.len();
    let ng = grids.gamma.len();
    let nl = grids.lambda.len();

    // (value, λ, γ, −c) lexicographic order; smaller wins.
    let key = |value: f64, c: f64, gamma: f64, lambda: f64| (value, lambda, gamma, -c);
    let better = |a: &(f64, f64, f64, f64), b: &(f64, f64, f64, f64)| {
        (a.0.total_cmp(&b.0))
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.total_cmp(&b.3))
            .is_lt()
    };

    type Candidate = (f64, f64, f64, f64, usize);
    let evaluated: Vec<Result<Candidate>> = (0..nc * ng * nl)
        .into_par_iter()
        .map(|idx| {
            let c = grids.c[idx / (ng * nl)];
            let gamma = grids.gamma[(idx / nl) % ng];
            let lambda = grids.lambda[idx % nl];
            let cert = bound(c, gamma, lambda)?;
            let (v, l, g, negc) = key(cert.value(), c, gamma, lambda);
            Ok((v, l, g, negc, idx))
        })
        .collect();

    let mut best: Option<(f64, f64, f64, f64, usize)> = None;
    for item in evaluated {
        let item = item?;
        let replace = match &best {
            None => true,
            Some(b) => better(&(item.0, item.1, item.2, item.3), &(b.0, b.1, b.2, b.3)),
        };
        if replace {
            best = Some(item);
        }
    }
    let (value, lambda, gamma, neg_c, idx) = best.expect("nonempty grids");
    let c = -neg_c;

    if value.is_infinite() {
        let certificate = bound(c, gamma, lambda)?;
        return Ok(OptimizedCertificate { c, gamma, lambda, certificate, vacuous: true });
    }

    let mut best_lambda = lambda;
    if refine && nl >= 3 {
        let li = idx % nl;
        let profile: Vec<f64> = grids
            .lambda
            .iter()
            .map(|&l| bound(c, gamma, l).map(|cert| cert.value()))
            .collect::<Result<_>>()?;
        if profile_is_convex(&grids.lambda, &profile) {
            let lo = grids.lambda[li.saturating_sub(1)];
            let hi = grids.lambda[(li + 1).min(nl - 1)];
            if hi > lo {
                let f = |l: f64| bound(c, gamma, l).map(|cert| cert.value());
                best_lambda = golden_section_min(&f, lo, hi, 1e-9, 200)?;
            }
        }
    }

    let certificate = bound(c, gamma, best_lambda)?;
    // Refinement must not lose to the grid point it started from.
    let (certificate, best_lambda) = if certificate.value() <= value {
        (certificate, best_lambda)
    } else {
        (bound(c, gamma, lambda)?, lambda)
    };
    Ok(OptimizedCertificate { c, gamma, lambda: best_lambda, certificate, vacuous: false })
}

// Chord test at each interior grid point: on an unevenly spaced grid the
// naive second difference would reject functions that are convex in λ but
// not in ln λ.
fn profile_is_convex(lambdas: &[f64], values: &[f64]) -> bool {
    lambdas.windows(3).zip(values.windows(3)).all(|(x, f)| {
        if f.iter().any(|v| !v.is_finite()) {
            // +∞ plateaus at the edges of the grid do not disqualify the
            // finite interior.
            return true;
        }
        let chord = f[0] + (f[2] - f[0]) * (x[1] - x[0]) / (x[2] - x[0]);
        f[1] <= chord + 1e-9 * f[1].abs().max(1.0)
    })
}

/// Golden-section minimum of a unimodal scalar function on `[lo, hi]` to
/// relative tolerance `tol` on the argument.
pub fn golden_section_min<F>(f: &F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618033988749895;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..max_iter {
        if b - a <= tol * b.abs().max(1.0) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{BoundCertificate, TheoremId};

    fn uniform(k: usize) -> DiscreteDistribution {
        DiscreteDistribution::uniform(k)
    }

    #[test]
    fn zero_temperature_returns_prior() {
        let prior = uniform(3);
        let post = gibbs_posterior(&GibbsSpec {
            prior: &prior,
            risks: &[0.1, 5.0, 2.0],
            temperature: 0.0,
        })
        .unwrap();
        assert_eq!(post.weights(), prior.weights());
    }

    #[test]
    fn equal_risks_return_prior() {
        let prior = DiscreteDistribution::from_weights(vec![0.2, 0.5, 0.3]).unwrap();
        let post = gibbs_posterior(&GibbsSpec {
            prior: &prior,
            risks: &[7.0, 7.0, 7.0],
            temperature: 3.0,
        })
        .unwrap();
        for (a, b) in post.weights().iter().zip(prior.weights()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn two_hypothesis_closed_form() {
        let prior = uniform(2);
        let (r, a) = (1.7, 2.3);
        let post = gibbs_posterior(&GibbsSpec {
            prior: &prior,
            risks: &[0.0, r],
            temperature: a,
        })
        .unwrap();
        let z = 1.0 + (-a * r).exp();
        assert!((post.weight(0) - 1.0 / z).abs() < 1e-15);
        assert!((post.weight(1) - (-a * r).exp() / z).abs() < 1e-15);
    }

    #[test]
    fn constant_risk_shift_cancels_exactly() {
        let prior = uniform(4);
        let risks = [0.3, 1.1, 0.0, 2.0];
        let shifted: Vec<f64> = risks.iter().map(|r| r + 123.456).collect();
        let a = gibbs_posterior(&GibbsSpec { prior: &prior, risks: &risks, temperature: 2.0 }).unwrap();
        let b = gibbs_posterior(&GibbsSpec { prior: &prior, risks: &shifted, temperature: 2.0 }).unwrap();
        // Max-subtraction cancels the shift up to the rounding of r + c
        // itself.
        for (x, y) in a.weights().iter().zip(b.weights()) {
            assert!((x - y).abs() <= 1e-13 * x.max(1e-3), "{x} vs {y}");
        }
    }

    #[test]
    fn weight_decreases_in_own_risk() {
        let prior = uniform(3);
        let lo = gibbs_posterior(&GibbsSpec { prior: &prior, risks: &[0.5, 1.0, 1.0], temperature: 2.0 })
            .unwrap();
        let hi = gibbs_posterior(&GibbsSpec { prior: &prior, risks: &[0.8, 1.0, 1.0], temperature: 2.0 })
            .unwrap();
        assert!(hi.weight(0) < lo.weight(0));
    }

    #[test]
    fn rejects_bad_inputs() {
        let prior = uniform(2);
        assert!(gibbs_posterior(&GibbsSpec { prior: &prior, risks: &[0.0], temperature: 1.0 }).is_err());
        assert!(
            gibbs_posterior(&GibbsSpec { prior: &prior, risks: &[0.0, f64::INFINITY], temperature: 1.0 })
                .is_err()
        );
        assert!(gibbs_posterior(&GibbsSpec { prior: &prior, risks: &[0.0, 1.0], temperature: -1.0 }).is_err());
        let degenerate = DiscreteDistribution::from_weights(vec![1.0, 0.0]).unwrap();
        assert!(
            gibbs_posterior(&GibbsSpec { prior: &degenerate, risks: &[0.0, 1.0], temperature: 1.0 })
                .is_err()
        );
    }

    fn quadratic_certificate(lambda: f64, at: f64) -> BoundCertificate {
        BoundCertificate::for_tests(TheoremId::Lemma3, (lambda - at) * (lambda - at) + 1.0)
    }

    #[test]
    fn single_point_grid_returns_that_point() {
        let grids = ParameterGrids { c: vec![1.0], gamma: vec![2.0], lambda: vec![3.0] };
        let out =
            optimize_certificate(|_, _, l| Ok(quadratic_certificate(l, 0.0)), &grids, false).unwrap();
        assert_eq!(out.lambda, 3.0);
        assert_eq!(out.certificate.value(), 10.0);
    }

    #[test]
    fn golden_refinement_finds_interior_minimum() {
        let grids = ParameterGrids {
            c: vec![1.0],
            gamma: vec![2.0],
            lambda: log_grid(0.1, 10.0, 30),
        };
        let target = 0.7317;
        let out =
            optimize_certificate(|_, _, l| Ok(quadratic_certificate(l, target)), &grids, true).unwrap();
        assert!(
            (out.lambda - target).abs() < 1e-6 * target,
            "refined λ = {}, want {target}",
            out.lambda
        );
    }

    #[test]
    fn all_infinite_grid_is_flagged_vacuous() {
        let grids = ParameterGrids { c: vec![0.5, 1.0], gamma: vec![2.0], lambda: vec![1.0, 2.0] };
        let out = optimize_certificate(
            |_, _, _| Ok(BoundCertificate::for_tests(TheoremId::Lemma3, f64::INFINITY)),
            &grids,
            true,
        )
        .unwrap();
        assert!(out.vacuous);
        assert!(out.certificate.value().is_infinite());
    }

    #[test]
    fn tie_break_is_deterministic() {
        // Flat objective: smallest λ, then smallest γ, then largest c.
        let grids = ParameterGrids {
            c: vec![0.2, 0.9],
            gamma: vec![1.5, 4.0],
            lambda: vec![2.0, 8.0],
        };
        for _ in 0..5 {
            let out = optimize_certificate(
                |_, _, _| Ok(BoundCertificate::for_tests(TheoremId::Lemma3, 1.0)),
                &grids,
                false,
            )
            .unwrap();
            assert_eq!((out.c, out.gamma, out.lambda), (0.9, 1.5, 2.0));
        }
    }

    #[test]
    fn golden_section_on_known_function() {
        let f = |x: f64| Ok((x - 2.0) * (x - 2.0));
        let x = golden_section_min(&f, 0.0, 5.0, 1e-10, 300).unwrap();
        assert!((x - 2.0).abs() < 1e-8);
    }

    #[test]
    fn refined_lambda_matches_analytic_stationary_point() {
        // The simultaneous-lambda bound with a fixed empirical value has
        // penalty κ2·C′/λ + m_p/(p−1)·(λ/n)^{p−1}, minimized at
        // λ = (n^{p−1}·κ2·C′/m_p)^{1/p} when κ3 = 0.
        use crate::bounds::{kappas, simultaneous_lambda_bound_thm3, ComplexityTerm};
        use crate::truncation::{EmpiricalRisk, LossTransform};

        let n = 5_000u64;
        let (p, m_p, beta, d) = (2.5f64, 1.8f64, 0.05, 4.0);
        let kp = kappas(1.0, 2.0).unwrap();
        let c_prime = ComplexityTerm::pac_bayes_prime(d, n, beta).unwrap();
        let analytic =
            (((n as f64).ln() * (p - 1.0) + (kp.kappa2 * c_prime.value).ln() - m_p.ln()) / p).exp();

        let grids = ParameterGrids {
            c: vec![1.0],
            gamma: vec![2.0],
            lambda: log_grid(analytic * 0.1, analytic * 10.0, 25),
        };
        let out = optimize_certificate(
            |_, _, lambda| {
                let emp = EmpiricalRisk::new(
                    0.4,
                    LossTransform::keep_below(n as f64 / lambda).unwrap(),
                );
                simultaneous_lambda_bound_thm3(&emp, &kp, &c_prime, lambda, p, m_p)
            },
            &grids,
            true,
        )
        .unwrap();
        assert!(
            (out.lambda - analytic).abs() < 1e-6 * analytic,
            "refined λ = {} vs analytic {analytic}",
            out.lambda
        );
    }
}
