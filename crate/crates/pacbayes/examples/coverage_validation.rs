//! Empirical coverage: draw training sets, compute certificates, count how
//! often the exact population risk exceeds them, and guard the count with
//! an exact binomial upper confidence bound. The bound promises violations
//! with probability at most β; the report should show the guard well below
//! that.

use pacbayes::bounds::TheoremId;
use pacbayes::harness::{coverage_estimate, BoundSpec, Regime};
use pacbayes::Scenario;

fn main() -> pacbayes::Result<()> {
    let trials = 400;
    let beta = 0.05;

    // The adaptive bounded-moment bound on a heavy-tailed scenario.
    let scenario = Scenario::preset("pareto-p2")?;
    let spec = BoundSpec::new(TheoremId::Thm2, beta).with_p(2.0);
    let report = coverage_estimate(&scenario, &spec, trials, 42, Regime::PacBayes, 4)?;
    println!(
        "thm2 on {}: {}/{} violations, exact binomial upper {:.5} (β = {beta})",
        scenario.name(),
        report.violations,
        report.trials,
        report.exact_binomial_upper
    );

    // The single-draw bounded-variance bound on a log-normal scenario: the
    // guarantee is over data and hypothesis draw jointly.
    let scenario = Scenario::preset("lognormal")?;
    let spec = BoundSpec::new(TheoremId::Thm12, beta);
    let report = coverage_estimate(&scenario, &spec, trials, 42, Regime::SingleDraw, 4)?;
    println!(
        "thm12 on {}: {}/{} violations, exact binomial upper {:.5}",
        scenario.name(),
        report.violations,
        report.trials,
        report.exact_binomial_upper
    );

    // A vacuous regime: asking for the 2nd moment of a tail that has none
    // produces +∞ certificates, which are trivially valid — reported
    // honestly rather than hidden.
    let heavy = Scenario::quantile(
        "very-heavy",
        vec![pacbayes::LossModel::pareto(1.0, 1.5)?],
        200,
        pacbayes::Algorithm::Gibbs { temperature: 0.2 },
        None,
    )?;
    let spec = BoundSpec::new(TheoremId::Thm2, beta).with_p(2.0);
    let report = coverage_estimate(&heavy, &spec, 50, 1, Regime::PacBayes, 2)?;
    println!(
        "thm2 on {} (infinite m₂): all {} certificates vacuous, {} violations",
        heavy.name(),
        report.trials,
        report.violations
    );
    Ok(())
}
