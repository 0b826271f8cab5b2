//! Scalars ε_n that make Σ ε_n S_n bounded in an absorbing disk, and the
//! strengthened series bound.

use borno::seqspace::{metrizability_scalars, strengthened_series_check, ClosedForm, DiskSpec, ModelSpace};

fn main() -> borno::Result<()> {
    let disks = (1..=4).map(|n| DiskSpec::l1(ClosedForm::constant(1.0 / n as f64))).collect::<borno::Result<Vec<_>>>()?;
    let space = ModelSpace::new(disks, true)?;
    let r = metrizability_scalars(&space, &[0, 1, 2, 3])?;
    println!("absorbing disk {:?}, containment {:?}", r.absorbing, r.containment);
    println!("eps {:?}, partial sums bounded by {}", r.eps, r.bound);
    let l1 = ModelSpace::l1_with_tails();
    let s = strengthened_series_check(&l1, 0, 0, &ClosedForm::constant(1.0), &ClosedForm::geometric(1.0, 0.25))?;
    println!("sum over n of 4^-n S: bound {:?} ({})", s.bound, s.verdict.as_str());
    let sup = ModelSpace::new(vec![DiskSpec::unit_sup()], true)?;
    let s = strengthened_series_check(&sup, 0, 0, &ClosedForm::power(1.0, 0.0, 1.0, 1.0), &ClosedForm::constant(1.0))?;
    println!("growing scales on the sup ball: {}", s.verdict.as_str());
    Ok(())
}
