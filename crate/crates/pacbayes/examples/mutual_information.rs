//! Exact information quantities of a learning algorithm on an enumerable
//! scenario: I(W;S), the per-instance I(W;Zᵢ), the in-expectation bounds
//! they feed, and the change-of-measure master inequality.

use pacbayes::bounds::TheoremId;
use pacbayes::harness::{
    coverage_estimate, master_inequality_check, mutual_information_exact, BoundSpec, GapFunction,
    Regime,
};
use pacbayes::{Algorithm, Scenario};

fn main() -> pacbayes::Result<()> {
    // 2 atoms, n = 8: 256 datasets, fully enumerable.
    let scenario = Scenario::table(
        "enumerable",
        vec![0.0, 1.0],
        vec![0.5, 0.5],
        vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.4, 0.6]],
        8,
        Algorithm::Gibbs { temperature: 2.0 },
        None,
    )?;

    let mi = mutual_information_exact(&scenario)?;
    println!("I(W;S) = {:.6} nats (class size bound: ln 3 = {:.6})", mi.i_ws, 3f64.ln());
    let sum: f64 = mi.i_wzi.iter().sum();
    println!("per-instance I(W;Zi) = {:.6} each, sum {:.6} < I(W;S)", mi.i_wzi[0], sum);

    println!("\nexpectation bounds (left = exact E[risk], right = bound):");
    for theorem in [TheoremId::Thm6, TheoremId::Thm7, TheoremId::Thm8, TheoremId::Thm9] {
        let mut spec = BoundSpec::new(theorem, 0.05).with_kappa(0.8, 2.0);
        if theorem == TheoremId::Thm8 {
            spec = spec.with_p(2.0);
        }
        let report = coverage_estimate(&scenario, &spec, 1, 0, Regime::ExpectationCheck, 1)?;
        let cmp = report.expectation.unwrap();
        println!("  {:>5}: {:.6} ≤ {:.6}", theorem.as_str(), cmp.lhs, cmp.rhs);
    }

    // Master inequality over the joint draw of (S, W), with the Bernoulli-KL
    // gap (normalizer ξ(n)) and a linear gap (normalizer computed exactly).
    let report = master_inequality_check(&scenario, GapFunction::BinaryKlGap, 0.1, 500, 3, 2)?;
    println!(
        "\nmaster inequality, binary-KL gap: {}/{} violations (binomial upper {:.5}, β = 0.1)",
        report.violations, report.trials, report.exact_binomial_upper
    );
    let report =
        master_inequality_check(&scenario, GapFunction::LinearGap { eta: 1.5 }, 0.1, 500, 3, 2)?;
    println!(
        "master inequality, linear gap:    {}/{} violations (binomial upper {:.5})",
        report.violations, report.trials, report.exact_binomial_upper
    );
    Ok(())
}
