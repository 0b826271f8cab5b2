//! Completeness of model spaces and arithmetic in the completion.

use borno::seqspace::{completeness_check, ClosedForm, Completion, DiskSpec, ModelSpace, Vector};

fn main() -> borno::Result<()> {
    let spaces = [
        ("l1 with closed-form tails", ModelSpace::l1_with_tails()),
        ("finitely supported l1", ModelSpace::l1_finite_support()),
        ("weighted sup, no tails", ModelSpace::new(vec![DiskSpec::sup(ClosedForm::geometric(1.0, 2.0))?], false)?),
        ("C^3 with two disks", ModelSpace::finite(3, vec![DiskSpec::unit_l1(), DiskSpec::unit_sup()])?),
    ];
    for (name, space) in &spaces {
        let r = completeness_check(space)?;
        println!("{name:<28} complete: {:<5} consistent: {}", r.verdict.as_str(), r.consistent);
        for d in r.per_disk.iter().filter_map(|d| d.witness.as_ref()) {
            println!("  escaping limit with tail {:?}", d.limit.tail);
        }
    }
    let l1 = ModelSpace::l1_with_tails();
    let c = Completion::new(&l1)?;
    let half = c.embed_limit(&Vector::closed(ClosedForm::geometric(1.0, 0.5)), 0)?;
    let quarter = c.embed_limit(&Vector::closed(ClosedForm::geometric(1.0, 0.25)), 0)?;
    let sum = c.add(&half, &c.scale(&quarter, -1.0))?;
    println!("gauge of [2^-k]          {:?}", c.gauge_in_quotient(&half, 0)?);
    println!("gauge of [2^-k] - [4^-k] {:?}", c.gauge_in_quotient(&sum, 0)?);
    let again = c.embed_limit(&half.limit, 0)?;
    println!("re-embedding the limit gives the same class: {}", c.equal(&half, &again).equal);
    println!("[2^-k] = [4^-k]: {:?}", c.equal(&half, &quarter));
    Ok(())
}
