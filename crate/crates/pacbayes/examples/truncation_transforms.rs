//! The loss transforms behind the truncation method: the threshold split
//! pairs (clip/tail-excess and keep-below/keep-above) and the
//! power-corrected transform that is capped at the threshold by
//! construction.

use pacbayes::truncation::transform;
use pacbayes::LossTransform;

fn main() -> pacbayes::Result<()> {
    let threshold = 3.0;
    let clip = LossTransform::clip_min(threshold)?;
    let excess = LossTransform::tail_excess(threshold)?;
    let below = LossTransform::keep_below(threshold)?;
    let above = LossTransform::keep_above(threshold)?;

    println!("threshold T = {threshold}");
    println!("{:>6} {:>9} {:>12} {:>12} {:>12}", "loss", "clip", "tail-excess", "keep-below", "keep-above");
    for loss in [0.0, 1.0, 2.9, 3.0, 3.1, 5.0, 12.0] {
        println!(
            "{loss:>6} {:>9.2} {:>12.2} {:>12.2} {:>12.2}",
            transform(loss, &clip)?,
            transform(loss, &excess)?,
            transform(loss, &below)?,
            transform(loss, &above)?,
        );
    }
    println!("identities: clip + tail-excess = loss, keep-below + keep-above = loss");

    // The power-corrected transform peaks exactly at T, at loss T·p/(p−1).
    let p = 2.0;
    let corrected = LossTransform::power_corrected(threshold, p)?;
    let maximizer = threshold * p / (p - 1.0);
    println!("\npower-corrected (p = {p}): maximum {:.6} at loss {maximizer}",
        transform(maximizer, &corrected)?);
    for loss in [1.0, 3.0, 6.0, 9.0, 30.0] {
        println!("  loss {loss:>5} → {:.6}", transform(loss, &corrected)?);
    }
    Ok(())
}
