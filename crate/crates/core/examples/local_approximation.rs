//! A finite-rank truncation that approximates the identity to a tolerance on a
//! compact set.

use borno::finrank::{local_approx_property_check, CompactSetModel, NormKind, TargetGauge};

fn main() -> borno::Result<()> {
    let t = TargetGauge::unit(NormKind::L2);
    for (name, s) in [("geometric 2^-k", CompactSetModel::geometric(1.0, 0.5)?), ("inverse square", CompactSetModel::inverse_power(1.0, 2.0)?)] {
        for tol in [1e-2, 1e-3] {
            let r = local_approx_property_check(&s, &t, tol, 1 << 20)?;
            let last = r.rates.last().map_or(f64::NAN, |e| e.hi);
            println!("{name:<15} tol {tol:.0e}: rank {:>4}, eps {last:.3e}, global via regularity {}", r.rank, r.global_via_regularity);
        }
    }
    Ok(())
}
