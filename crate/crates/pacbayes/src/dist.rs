//! Finite probability distributions, divergences, binary KL machinery, and
//! the binomial normalization constant ξ(n).
//!
//! Conventions fixed once for the whole crate: `0·log 0 = 0`, `0⁰ = 1`, and
//! a divergence of +∞ is a legitimate value (the certificate consuming it
//! becomes vacuous), not an error.

use crate::math::{self, CompensatedSum};
use crate::{Error, Result};

/// Tolerance on the total mass of a distribution.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Probability weights over a finite, ordered support of named atoms.
///
/// Houses priors, posteriors, and discrete data laws. Zero weights are
/// permitted; negative weights and duplicate atoms are not.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    support: Vec<String>,
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new<S: Into<String>>(support: Vec<S>, weights: Vec<f64>) -> Result<Self> {
        let support: Vec<String> = support.into_iter().map(Into::into).collect();
        if support.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "support has {} atoms but {} weights were given",
                support.len(),
                weights.len()
            )));
        }
        if support.is_empty() {
            return Err(Error::InvalidInput("empty support".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for atom in &support {
            if !seen.insert(atom.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate atom `{atom}`")));
            }
        }
        let mut total = CompensatedSum::new();
        for &w in &weights {
            if w.is_nan() {
                return Err(Error::InvalidInput("NaN weight".into()));
            }
            if w < 0.0 {
                return Err(Error::InvalidInput(format!("negative weight {w}")));
            }
            total.add(w);
        }
        let total = total.value();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!(
                "weights sum to {total}, expected 1 within {WEIGHT_SUM_TOL}"
            )));
        }
        Ok(Self { support, weights })
    }

    /// Uniform distribution over `k` atoms labeled `h0..h{k-1}`.
    pub fn uniform(k: usize) -> Self {
        let support = (0..k).map(|i| format!("h{i}")).collect();
        let weights = vec![1.0 / k as f64; k];
        Self { support, weights }
    }

    /// Distribution with synthesized labels `h0..` and the given weights,
    /// normalizing away rounding in the caller's arithmetic is *not* done:
    /// weights must already sum to one.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let support: Vec<String> = (0..weights.len()).map(|i| format!("h{i}")).collect();
        Self::new(support, weights)
    }

    /// Same support as `self`, different weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.support.clone(), weights)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn support(&self) -> &[String] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn same_support(&self, other: &Self) -> bool {
        self.support == other.support
    }

    /// Exact finite expectation of `f` over the support.
    pub fn expectation(&self, f: impl Fn(usize) -> f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for (i, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                acc.add(w * f(i));
            }
        }
        acc.value()
    }

    /// Index drawn by inverse CDF from a uniform in `(0, 1]`.
    pub fn sample_index(&self, u: f64) -> usize {
        let mut cum = 0.0;
        for (i, &w) in self.weights.iter().enumerate() {
            cum += w;
            if u <= cum {
                return i;
            }
        }
        self.weights.len() - 1
    }
}

/// Divergence selector for [`divergence`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceKind {
    /// Relative entropy `D(p‖q) = Σ pᵢ log(pᵢ/qᵢ)`.
    RelativeEntropy,
    /// Chi-squared divergence `χ²(p,q) = Σ pᵢ²/qᵢ − 1`.
    ChiSquared,
}

/// `D(p‖q)` or `χ²(p,q)` over a shared support.
///
/// Returns +∞ exactly when some atom has `pᵢ > 0` while `qᵢ = 0`; atoms with
/// `pᵢ = 0` contribute nothing regardless of `qᵢ`.
pub fn divergence(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    kind: DivergenceKind,
) -> Result<f64> {
    if !p.same_support(q) {
        return Err(Error::Contract("divergence over mismatched supports".into()));
    }
    let mut acc = CompensatedSum::new();
    for ((&pi, &qi), atom) in p.weights.iter().zip(q.weights.iter()).zip(p.support.iter()) {
        if pi.is_nan() || qi.is_nan() {
            return Err(Error::InvalidInput(format!("NaN weight at atom `{atom}`")));
        }
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        match kind {
            DivergenceKind::RelativeEntropy => acc.add(pi * (pi / qi).ln()),
            // Grouped as pi·(pi/qi) so identical atoms contribute exactly pi.
            DivergenceKind::ChiSquared => acc.add(pi * (pi / qi)),
        }
    }
    Ok(match kind {
        // Rounding can leave a tiny negative residue when p == q.
        DivergenceKind::RelativeEntropy => acc.value().max(0.0),
        DivergenceKind::ChiSquared => (acc.value() - 1.0).max(0.0),
    })
}

/// Bernoulli relative entropy `d(q̂‖q) = D(Ber(q̂)‖Ber(q))`.
pub fn binary_kl(q_hat: f64, q: f64) -> Result<f64> {
    for (name, v) in [("q_hat", q_hat), ("q", q)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidInput(format!("{name} = {v} outside [0, 1]")));
        }
    }
    let mut d = 0.0;
    if q_hat > 0.0 {
        if q == 0.0 {
            return Ok(f64::INFINITY);
        }
        d += q_hat * (q_hat / q).ln();
    }
    if q_hat < 1.0 {
        if q == 1.0 {
            return Ok(f64::INFINITY);
        }
        d += (1.0 - q_hat) * ((1.0 - q_hat) / (1.0 - q)).ln();
    }
    Ok(d.max(0.0))
}

/// Largest `r ∈ [q̂, 1]` with `binary_kl(q̂, r) ≤ budget`, by bisection to
/// absolute tolerance 1e-12 (the loop runs to f64 resolution, which is
/// tighter). Returns 1 when even `r = 1` fits the budget.
pub fn binary_kl_inverse_upper(q_hat: f64, budget: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q_hat) {
        return Err(Error::InvalidInput(format!("q_hat = {q_hat} outside [0, 1]")));
    }
    if budget.is_nan() || budget < 0.0 {
        return Err(Error::InvalidInput(format!("budget = {budget} is negative")));
    }
    if budget == 0.0 {
        return Ok(q_hat);
    }
    if binary_kl(q_hat, 1.0)? <= budget {
        return Ok(1.0);
    }
    let mut lo = q_hat;
    let mut hi = 1.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if binary_kl(q_hat, mid)? <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(lo)
}

/// The binomial normalization constant ξ(n), wrapped with its bracket
/// `√n ≤ ξ(n) ≤ 2 + √(2n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiValue {
    pub n: u64,
    pub value: f64,
}

impl XiValue {
    pub fn lower_bracket(&self) -> f64 {
        (self.n as f64).sqrt()
    }

    pub fn upper_bracket(&self) -> f64 {
        2.0 + (2.0 * self.n as f64).sqrt()
    }
}

/// Exact ξ(n) = Σ_{k=0}^{n} C(n,k) (k/n)^k ((n−k)/n)^{n−k}.
///
/// Each term is assembled in log space from a compensated `ln k!` prefix
/// table, and the terms are summed with compensated accumulation, so the
/// result is exact to a few ulps even at n = 10⁶. The endpoints use the
/// 0⁰ = 1 convention and contribute exactly 1 each.
pub fn xi(n: u64) -> Result<XiValue> {
    if n == 0 {
        return Err(Error::InvalidInput("xi requires n >= 1".into()));
    }
    let nu = n as usize;
    let table = math::ln_factorial_table(nu);
    let nf = n as f64;
    let ln_n = nf.ln();
    let mut acc = CompensatedSum::new();
    acc.add(2.0); // k = 0 and k = n
    for k in 1..nu {
        let kf = k as f64;
        let mf = (nu - k) as f64;
        let log_term =
            math::ln_choose(&table, nu, k) + kf * (kf.ln() - ln_n) + mf * (mf.ln() - ln_n);
        acc.add(log_term.exp());
    }
    let value = XiValue { n, value: acc.value() };
    assert!(
        value.value >= value.lower_bracket() && value.value <= value.upper_bracket(),
        "xi({n}) = {} escaped its bracket",
        value.value
    );
    Ok(value)
}

/// `log(p_atom / q_atom)` at one atom of a shared support; −∞ when the
/// numerator has no mass. Mass in `p` outside the support of `q` is an
/// absolute-continuity error rather than +∞, because a realized draw can
/// never legitimately land there.
pub fn log_density_ratio(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    atom: usize,
) -> Result<f64> {
    if !p.same_support(q) {
        return Err(Error::Contract("log density ratio over mismatched supports".into()));
    }
    if atom >= p.len() {
        return Err(Error::InvalidInput(format!(
            "atom index {atom} out of range for support of size {}",
            p.len()
        )));
    }
    let (pi, qi) = (p.weights[atom], q.weights[atom]);
    if pi > 0.0 && qi == 0.0 {
        return Err(Error::AbsoluteContinuity { atom: p.support[atom].clone(), mass: pi });
    }
    if pi == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok((pi / qi).ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(weights: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::from_weights(weights.to_vec()).unwrap()
    }

    #[test]
    fn construction_rejects_bad_weights() {
        assert!(DiscreteDistribution::from_weights(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::from_weights(vec![-0.1, 1.1]).is_err());
        assert!(DiscreteDistribution::from_weights(vec![f64::NAN, 1.0]).is_err());
        assert!(DiscreteDistribution::new(vec!["a", "a"], vec![0.5, 0.5]).is_err());
        // Zero weights are fine.
        assert!(DiscreteDistribution::from_weights(vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn divergence_identical_is_zero() {
        let p = dist(&[0.3, 0.7]);
        assert_eq!(divergence(&p, &p, DivergenceKind::RelativeEntropy).unwrap(), 0.0);
        assert_eq!(divergence(&p, &p, DivergenceKind::ChiSquared).unwrap(), 0.0);
    }

    #[test]
    fn divergence_point_mass_vs_uniform() {
        let p = dist(&[1.0, 0.0]);
        let q = dist(&[0.5, 0.5]);
        let kl = divergence(&p, &q, DivergenceKind::RelativeEntropy).unwrap();
        assert!((kl - std::f64::consts::LN_2).abs() < 1e-15);
        let chi2 = divergence(&p, &q, DivergenceKind::ChiSquared).unwrap();
        assert!((chi2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn divergence_absolute_continuity_failure_is_infinite() {
        let p = dist(&[0.5, 0.5]);
        let q = dist(&[1.0, 0.0]);
        assert_eq!(divergence(&p, &q, DivergenceKind::RelativeEntropy).unwrap(), f64::INFINITY);
        assert_eq!(divergence(&p, &q, DivergenceKind::ChiSquared).unwrap(), f64::INFINITY);
    }

    #[test]
    fn divergence_rejects_mismatched_supports() {
        let p = dist(&[0.5, 0.5]);
        let q = DiscreteDistribution::new(vec!["x", "y"], vec![0.5, 0.5]).unwrap();
        assert!(matches!(
            divergence(&p, &q, DivergenceKind::RelativeEntropy),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn binary_kl_examples() {
        assert_eq!(binary_kl(0.5, 0.5).unwrap(), 0.0);
        assert!((binary_kl(0.0, 0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        // Direct formula 0.1·ln(0.2) + 0.9·ln(1.8).
        let expected = 0.1 * (0.2f64).ln() + 0.9 * (1.8f64).ln();
        assert!((binary_kl(0.1, 0.5).unwrap() - expected).abs() < 1e-15);
        assert_eq!(binary_kl(0.5, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(binary_kl(0.5, 1.0).unwrap(), f64::INFINITY);
        assert!(binary_kl(-0.1, 0.5).is_err());
        assert!(binary_kl(0.5, 1.5).is_err());
    }

    #[test]
    fn binary_kl_inverse_examples() {
        assert_eq!(binary_kl_inverse_upper(0.5, 0.0).unwrap(), 0.5);
        // d(0‖r) = ln(1/(1−r)), so budget ln 2 inverts to 0.5.
        let r = binary_kl_inverse_upper(0.0, std::f64::consts::LN_2).unwrap();
        assert!((r - 0.5).abs() < 1e-10);
        // Inverse of the binary_kl example above.
        let budget = binary_kl(0.1, 0.5).unwrap();
        let r = binary_kl_inverse_upper(0.1, budget).unwrap();
        assert!((r - 0.5).abs() < 1e-10);
        // q̂ = 1 fits any budget at r = 1.
        assert_eq!(binary_kl_inverse_upper(1.0, 0.1).unwrap(), 1.0);
    }

    #[test]
    fn xi_small_values_match_direct_sum() {
        assert!((xi(1).unwrap().value - 2.0).abs() < 1e-14);
        assert!((xi(2).unwrap().value - 2.5).abs() < 1e-14);
        // Direct f64 evaluation for a handful of small n.
        for n in 1..=25u64 {
            let mut direct = 0.0;
            for k in 0..=n {
                let mut choose = 1.0;
                for j in 0..k {
                    choose *= (n - j) as f64 / (j + 1) as f64;
                }
                let a = if k == 0 { 1.0 } else { (k as f64 / n as f64).powi(k as i32) };
                let b = if k == n {
                    1.0
                } else {
                    ((n - k) as f64 / n as f64).powi((n - k) as i32)
                };
                direct += choose * a * b;
            }
            let v = xi(n).unwrap().value;
            assert!(
                (v - direct).abs() < 1e-11 * direct,
                "xi({n}) = {v}, direct {direct}"
            );
        }
    }

    #[test]
    fn xi_matches_ln_gamma_route() {
        // Independent route: log-binomials through the Lanczos ln_gamma
        // instead of the compensated prefix table.
        for &n in &[10u64, 100, 1000, 10_000] {
            let nf = n as f64;
            let mut acc = 2.0;
            for k in 1..n {
                let kf = k as f64;
                let mf = (n - k) as f64;
                let log_term = math::ln_gamma(nf + 1.0)
                    - math::ln_gamma(kf + 1.0)
                    - math::ln_gamma(mf + 1.0)
                    + kf * (kf / nf).ln()
                    + mf * (mf / nf).ln();
                acc += log_term.exp();
            }
            let v = xi(n).unwrap().value;
            assert!((v - acc).abs() < 3e-9 * acc, "xi({n}) = {v} vs lgamma route {acc}");
        }
    }

    #[test]
    fn xi_sandwich_at_10000() {
        let v = xi(10_000).unwrap();
        assert!(v.value >= 100.0 && v.value <= 143.43, "xi(10^4) = {}", v.value);
    }

    #[test]
    fn xi_rejects_zero() {
        assert!(xi(0).is_err());
    }

    #[test]
    fn log_density_ratio_cases() {
        let p = dist(&[0.8, 0.2]);
        let q = dist(&[0.5, 0.5]);
        assert!((log_density_ratio(&p, &q, 0).unwrap() - 1.6f64.ln()).abs() < 1e-15);
        assert_eq!(log_density_ratio(&p, &p, 0).unwrap(), 0.0);
        let zero = dist(&[0.0, 1.0]);
        assert_eq!(log_density_ratio(&zero, &q, 0).unwrap(), f64::NEG_INFINITY);
        assert!(matches!(
            log_density_ratio(&q, &zero, 0),
            Err(Error::AbsoluteContinuity { .. })
        ));
    }

    #[test]
    fn expected_log_ratio_is_relative_entropy() {
        let p = dist(&[0.6, 0.1, 0.3]);
        let q = dist(&[0.2, 0.5, 0.3]);
        let mean = p.expectation(|i| log_density_ratio(&p, &q, i).unwrap());
        let d = divergence(&p, &q, DivergenceKind::RelativeEntropy).unwrap();
        assert!((mean - d).abs() < 1e-12);
    }
}
