//! Scenario definition files: parse a discrete (table) scenario and a
//! continuous quantile scenario from TOML, then query their exact ground
//! truth.

use pacbayes::Scenario;

const TABLE: &str = r#"
name = "weighted-coin"
n = 60

[algorithm]
kind = "gibbs"
temperature = 3.0

[data]
atoms = [0.0, 0.5, 1.0]
weights = [0.25, 0.5, 0.25]

[[hypotheses]]
label = "safe"
losses = [0.2, 0.2, 0.2]

[[hypotheses]]
label = "risky"
losses = [0.0, 0.1, 1.0]

[prior]
weights = [0.6, 0.4]
"#;

const QUANTILE: &str = r#"
name = "heavy-tails"
n = 500

[algorithm]
kind = "erm"

[data]
generator = "uniform01"

[[hypotheses]]
model = { kind = "pareto", scale = 1.0, shape = 3.0 }

[[hypotheses]]
model = { kind = "log-normal", location = 0.0, scale = 1.0 }

[[hypotheses]]
model = { kind = "scaled-bernoulli", magnitude = 3.0, prob = 0.2 }
"#;

fn main() -> pacbayes::Result<()> {
    let table = Scenario::from_toml(TABLE)?;
    println!("{}: {} hypotheses over {} atoms", table.name(), table.hypothesis_count(),
        table.atom_count().unwrap());
    for w in 0..table.hypothesis_count() {
        println!("  population risk of hypothesis {w}: {:.4}", table.population_risk(w));
    }
    println!("  sup-variance: {:.4}", table.variance_bound()?);

    let quantile = Scenario::from_toml(QUANTILE)?;
    println!("\n{}: {} model hypotheses", quantile.name(), quantile.hypothesis_count());
    for w in 0..quantile.hypothesis_count() {
        println!(
            "  hypothesis {w}: mean {:.4}, m₂ {}",
            quantile.population_risk(w),
            match quantile.hypothesis_moment(w, 2.0)? {
                v if v.is_finite() => format!("{v:.4}"),
                _ => "∞".to_string(),
            }
        );
    }
    println!("  exact moment bound m₂ = {:.4}", quantile.moment_bound(2.0)?);
    Ok(())
}
