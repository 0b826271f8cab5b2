//! Bounded coordinate maps extend uniquely to the completion.

use borno::seqspace::{extend_map_to_completion, ClosedForm, Completion, CoordMap, ModelSpace, Vector};

fn main() -> borno::Result<()> {
    let c = Completion::new(&ModelSpace::l1_with_tails())?;
    let x = c.embed_limit(&Vector::closed(ClosedForm::geometric(1.0, 0.5)), 0)?;
    let shift = extend_map_to_completion(&CoordMap::Shift, &c, 0)?;
    let y = shift.apply(&x)?;
    println!("shift: bound {}, image limit {:?}", shift.bound, y.limit);
    let damp = extend_map_to_completion(&CoordMap::Diagonal(ClosedForm::geometric(1.0, 0.5)), &c, 0)?;
    println!("diagonal 2^-k: bound {}, gauge of image {:?}", damp.bound, c.gauge_in_quotient(&damp.apply(&x)?, 0)?);
    let sum = extend_map_to_completion(&CoordMap::Sum, &c, 0)?;
    println!("sum functional: bound {}, value {:?}", sum.bound, sum.value(&x)?);
    let growing = CoordMap::Diagonal(ClosedForm::power(1.0, 1.0, 1.0, 1.0));
    println!("diagonal k+1: {}", extend_map_to_completion(&growing, &c, 0).map_or_else(|e| e.to_string(), |_| "extended".into()));
    Ok(())
}
