//! Finite-distribution machinery: relative entropy, chi-squared divergence,
//! the chain inequality between them, binary KL inversion, and the binomial
//! normalization constant ξ(n).

use pacbayes::dist::{binary_kl, binary_kl_inverse_upper, divergence, xi, DivergenceKind};
use pacbayes::DiscreteDistribution;

fn main() -> pacbayes::Result<()> {
    let posterior = DiscreteDistribution::from_weights(vec![0.7, 0.2, 0.1])?;
    let prior = DiscreteDistribution::from_weights(vec![1.0 / 3.0; 3])?;

    let kl = divergence(&posterior, &prior, DivergenceKind::RelativeEntropy)?;
    let chi2 = divergence(&posterior, &prior, DivergenceKind::ChiSquared)?;
    println!("D(posterior ‖ prior)  = {kl:.6}");
    println!("χ²(posterior, prior)  = {chi2:.6}");
    println!("chain: 0 ≤ D ≤ log(1+χ²) ≤ χ²  →  {kl:.6} ≤ {:.6} ≤ {chi2:.6}", (1.0 + chi2).ln());

    // Binary KL and its upper inverse: the largest population risk
    // compatible with an observed empirical risk and a divergence budget.
    let emp = 0.1;
    let budget = 0.368;
    let risk_upper = binary_kl_inverse_upper(emp, budget)?;
    println!("\nbinary KL inversion: d({emp} ‖ {risk_upper:.6}) = {:.6} (budget {budget})",
        binary_kl(emp, risk_upper)?);

    // ξ(n) computed exactly, sandwiched by √n and 2 + √(2n).
    println!("\n   n        ξ(n)       √n     2+√(2n)");
    for n in [1u64, 2, 10, 100, 10_000] {
        let v = xi(n)?;
        println!("{n:>6}  {:>10.4} {:>8.2} {:>10.2}", v.value, v.lower_bracket(), v.upper_bracket());
    }
    Ok(())
}
