//! Coverage of every implemented high-probability result on a matched
//! scenario: 2000 trials each at β = 0.05, with the exact one-sided
//! binomial upper bound (level 0.999) required to stay below β. A failure
//! here is a correctness bug, not noise — the binomial guard leaves no
//! wiggle room for an actually-violated guarantee.

use pacbayes::bounds::{LambdaPolicy, TheoremId};
use pacbayes::harness::{coverage_estimate, BoundSpec};
use pacbayes::Scenario;

#[test]
fn every_high_probability_bound_covers() {
    let beta = 0.05;
    let trials = 2000;
    let workers = 4;

    let interval = Scenario::preset("interval").unwrap();
    let pareto2 = Scenario::preset("pareto-p2").unwrap();
    let pareto3 = Scenario::preset("pareto-p3").unwrap();
    let lognormal = Scenario::preset("lognormal").unwrap();
    let sqrt_n = (pareto2.n() as f64).sqrt();
    let fixed = |l: f64| (l, LambdaPolicy::DataIndependent);

    let cases: Vec<(&Scenario, BoundSpec, &str)> = vec![
        (&interval, BoundSpec::new(TheoremId::Eq1, beta), "eq1/interval"),
        (&interval, BoundSpec::new(TheoremId::Eq2, beta), "eq2/interval"),
        (
            &pareto2,
            BoundSpec::new(TheoremId::Lemma1, beta).with_lambda(sqrt_n, fixed(sqrt_n).1),
            "lemma1/pareto-p2",
        ),
        (
            &pareto2,
            BoundSpec::new(TheoremId::Lemma2, beta).with_lambda(sqrt_n, fixed(sqrt_n).1),
            "lemma2/pareto-p2",
        ),
        (
            &pareto2,
            BoundSpec::new(TheoremId::Lemma3, beta)
                .with_p(2.0)
                .with_lambda(sqrt_n, LambdaPolicy::DataIndependent),
            "lemma3/pareto-p2",
        ),
        (
            &pareto2,
            BoundSpec::new(TheoremId::Lemma4, beta)
                .with_p(2.0)
                .with_lambda(sqrt_n, LambdaPolicy::DataIndependent),
            "lemma4/pareto-p2",
        ),
        (&pareto2, BoundSpec::new(TheoremId::Thm1, beta).with_p(2.0), "thm1/pareto-p2"),
        (&pareto2, BoundSpec::new(TheoremId::Thm2, beta).with_p(2.0), "thm2/pareto-p2"),
        (&pareto3, BoundSpec::new(TheoremId::Thm2, beta).with_p(3.0), "thm2/pareto-p3"),
        (
            &pareto2,
            BoundSpec::new(TheoremId::Thm3, beta)
                .with_p(2.0)
                .with_lambda(2.0 * sqrt_n, LambdaPolicy::DataDependent),
            "thm3/pareto-p2",
        ),
        (&lognormal, BoundSpec::new(TheoremId::Thm5, beta), "thm5/lognormal"),
        (&interval, BoundSpec::new(TheoremId::Thm10, beta), "thm10/interval"),
        (&pareto2, BoundSpec::new(TheoremId::Thm11, beta).with_p(2.0), "thm11/pareto-p2"),
        (&lognormal, BoundSpec::new(TheoremId::Thm12, beta), "thm12/lognormal"),
    ];

    for (scenario, spec, label) in cases {
        let report =
            coverage_estimate(scenario, &spec, trials, 0xFEED, spec.regime(), workers).unwrap();
        println!(
            "{label}: {}/{} violations, exact binomial upper {:.5}",
            report.violations, report.trials, report.exact_binomial_upper
        );
        assert!(
            report.exact_binomial_upper <= beta,
            "{label}: exact binomial upper bound {} exceeds beta {beta} ({} violations)",
            report.exact_binomial_upper,
            report.violations
        );
    }
}
