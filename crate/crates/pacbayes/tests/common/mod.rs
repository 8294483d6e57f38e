//! Checks shared between the standalone property suite and the acceptance
//! gate.

use pacbayes::bounds::{check_a19_inequality, MomentVariant};
use pacbayes::dist::{divergence, xi, DivergenceKind};
use pacbayes::rng::SplitMix64;
use pacbayes::truncation::transform;
use pacbayes::{DiscreteDistribution, LossModel, LossTransform};

/// Symmetric Dirichlet(1) draw: normalized exponentials, giving full-support
/// weight vectors with occasional near-zero entries.
pub fn dirichlet(rng: &mut SplitMix64, k: usize) -> DiscreteDistribution {
    let raw: Vec<f64> = (0..k).map(|_| -rng.next_uniform().ln()).collect();
    let total: f64 = raw.iter().sum();
    DiscreteDistribution::from_weights(raw.iter().map(|e| e / total).collect()).unwrap()
}

/// Split identities and the power-corrected cap, over a dense deterministic
/// grid plus seeded random (loss, threshold, p) triples.
pub fn check_truncation_identities() {
    let mut rng = SplitMix64::new(0x7A11);
    for case in 0..2000 {
        let (loss, threshold, p) = if case < 1000 {
            // Dense grid around a fixed threshold, hitting both sides.
            (case as f64 * 0.012, 3.0, 2.0)
        } else {
            (
                1e4 * rng.next_uniform() * rng.next_uniform(),
                1e2 * rng.next_uniform() + 1e-3,
                1.0 + 9.0 * rng.next_uniform(),
            )
        };
        let clip = transform(loss, &LossTransform::clip_min(threshold).unwrap()).unwrap();
        let excess = transform(loss, &LossTransform::tail_excess(threshold).unwrap()).unwrap();
        assert!(
            (clip + excess - loss).abs() <= 1e-12 * loss.max(1.0),
            "clip/excess split broken at loss {loss}, threshold {threshold}"
        );
        let below = transform(loss, &LossTransform::keep_below(threshold).unwrap()).unwrap();
        let above = transform(loss, &LossTransform::keep_above(threshold).unwrap()).unwrap();
        assert!(
            (below + above - loss).abs() <= 1e-12 * loss.max(1.0),
            "keep-below/keep-above split broken at loss {loss}, threshold {threshold}"
        );
        assert!(below <= clip + 1e-15, "keep-below must be dominated by clip-min");

        let corrected =
            transform(loss, &LossTransform::power_corrected(threshold, p).unwrap()).unwrap();
        assert!(
            corrected <= threshold * (1.0 + 1e-9),
            "power-corrected transform exceeded its cap at loss {loss} (T = {threshold}, p = {p})"
        );
        // The cap is attained exactly at the analytic maximizer.
        let maximizer = p / (p - 1.0) * threshold;
        let at_max =
            transform(maximizer, &LossTransform::power_corrected(threshold, p).unwrap()).unwrap();
        assert!(
            (at_max - threshold).abs() <= 1e-9 * threshold,
            "cap not attained at the maximizer (T = {threshold}, p = {p}): {at_max}"
        );
    }
}

/// `0 ≤ D ≤ log(1 + χ²) ≤ χ²` over random same-support pairs, plus the
/// zero-iff-equal property for both kinds.
pub fn check_divergence_chain(pairs: usize) {
    let mut rng = SplitMix64::new(0xD1CE);
    for i in 0..pairs {
        let k = 2 + (i % 7);
        let p = dirichlet(&mut rng, k);
        let q = dirichlet(&mut rng, k);
        let d = divergence(&p, &q, DivergenceKind::RelativeEntropy).unwrap();
        let chi2 = divergence(&p, &q, DivergenceKind::ChiSquared).unwrap();
        assert!(d >= 0.0 && chi2 >= 0.0);
        let middle = (1.0 + chi2).ln();
        assert!(d <= middle + 1e-12 * middle.max(1.0), "D = {d} > log(1+χ²) = {middle}");
        assert!(middle <= chi2 + 1e-12 * chi2.max(1.0), "log(1+χ²) = {middle} > χ² = {chi2}");

        // Zero iff equal, atomwise within tolerance. Identical inputs give
        // an exactly-zero relative entropy; the chi-squared residue is the
        // rounding of the weight sum itself.
        let d_self = divergence(&p, &p, DivergenceKind::RelativeEntropy).unwrap();
        let chi2_self = divergence(&p, &p, DivergenceKind::ChiSquared).unwrap();
        assert!(d_self == 0.0, "D(p‖p) = {d_self}");
        assert!(chi2_self <= 1e-12, "χ²(p,p) = {chi2_self}");
        if d < 1e-12 || chi2 < 1e-12 {
            for (a, b) in p.weights().iter().zip(q.weights()) {
                assert!((a - b).abs() < 1e-5, "near-zero divergence but different atoms");
            }
        }
    }
}

/// `√n ≤ ξ(n) ≤ 2 + √(2n)` for every n up to `max_n`.
pub fn check_xi_sandwich(max_n: u64) {
    for n in 1..=max_n {
        let v = xi(n).unwrap();
        assert!(
            v.value >= v.lower_bracket() && v.value <= v.upper_bracket(),
            "xi({n}) = {} outside [{}, {}]",
            v.value,
            v.lower_bracket(),
            v.upper_bracket()
        );
    }
}

/// Exact Pareto tail integrals never exceed their Markov caps.
pub fn check_markov_dominance() {
    for shape in [1.5, 2.0, 3.0, 5.0] {
        let model = LossModel::pareto(1.0, shape).unwrap();
        for p in [1.2, 1.5, 2.0, 3.0, 4.0] {
            let m_p = model.moment(p).unwrap();
            if !m_p.is_finite() {
                continue;
            }
            for t in [1.0, 2.0, 5.0, 10.0, 100.0] {
                let exact = model.tail_integral(t).unwrap();
                let markov = m_p / ((p - 1.0) * t.powf(p - 1.0));
                assert!(
                    exact <= markov * (1.0 + 1e-12),
                    "Pareto({shape}) p={p} t={t}: exact {exact} > markov {markov}"
                );
            }
        }
    }
}

/// The a = 19 scalar inequality across a dense grid of x.
pub fn check_a19_grid() {
    for i in 0..=100_000 {
        let x = i as f64 * 0.1; // spans [0, 10^4]
        assert!(check_a19_inequality(x, 19.0, 0.05), "a=19 inequality failed at x = {x}");
        assert!(check_a19_inequality(x, 19.0, 0.5), "a=19 inequality failed at x = {x}");
    }
}

/// The bounded-moment tail constants: ratio 4 at p = 2, approaching e as
/// p grows.
pub fn check_tail_constant_ratios() {
    let ratio =
        |p: f64| MomentVariant::Lemma3.tail_constant(p) / MomentVariant::Lemma4.tail_constant(p);
    assert!((ratio(2.0) - 4.0).abs() < 1e-12, "ratio at p=2 is {}", ratio(2.0));
    assert!(
        (ratio(1e4) - std::f64::consts::E).abs() < 1e-3,
        "ratio at p=10^4 is {}, expected ≈ e",
        ratio(1e4)
    );
    // Monotone approach from above.
    let mut prev = ratio(2.0);
    for p in [3.0, 5.0, 10.0, 100.0, 1e4] {
        let r = ratio(p);
        assert!(r < prev);
        assert!(r > std::f64::consts::E);
        prev = r;
    }
}
