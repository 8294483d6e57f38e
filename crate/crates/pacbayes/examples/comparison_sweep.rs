//! The bounded-variance comparison: three chi-squared baselines against the
//! relaxed high-probability bound, at the standard operating point
//! (β = 0.025, χ² = 200, R̂ = 0.025, n = 10⁴, σ² = 1) and swept over β.

use pacbayes::harness::{comparison_row, figure1_sweep, ComparisonPoint, SweepParam};

fn main() -> pacbayes::Result<()> {
    let point = ComparisonPoint::default();
    let [eq4, eq5, eq6, eq8] = comparison_row(&point)?;
    println!("at the fixed operating point:");
    println!("  eq4 (linear χ²)      = {eq4:.6}");
    println!("  eq5 (root χ²)        = {eq5:.6}");
    println!("  eq6 (additive χ²)    = {eq6:.6}");
    println!("  relaxed high-prob    = {eq8:.6}");
    println!();

    let table = figure1_sweep(&point, SweepParam::Beta, &SweepParam::Beta.default_grid())?;
    println!("sweep over beta:");
    println!("{:>10} {:>10} {:>10} {:>10} {:>12}", "beta", "eq4", "eq5", "eq6", "relaxed");
    for (g, row) in table.grid.iter().zip(&table.rows) {
        println!(
            "{g:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>12.5}",
            row[0], row[1], row[2], row[3]
        );
    }
    println!("\n(the `pacbayes sweep --preset figure1 --vary beta --out sweep.csv` command");
    println!(" writes the same table as CSV with full double precision)");
    Ok(())
}
