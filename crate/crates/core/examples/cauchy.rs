//! Deciding Cauchy and convergence claims for closed-form sequences.

use borno::seqspace::{cauchy_check, convergence_check, ClosedForm, ModelSpace, NullSeq, SequenceModel, Vector};

fn main() -> borno::Result<()> {
    let fin = ModelSpace::l1_finite_support();
    let l1 = ModelSpace::l1_with_tails();
    let half = Vector::closed(ClosedForm::geometric(1.0, 0.5));
    let x = SequenceModel::partial_sums(half.clone());
    // The tail Σ_{k>m} 2^{-k} is exactly 2^{-m}.
    for c in [1.0, 0.5] {
        let r = cauchy_check(&fin, &x, 0, &NullSeq::geometric(c, 0.5))?;
        print!("partial sums of 2^-k, eps = {c}*2^-m: {}", r.verdict.as_str());
        match (&r.witness, r.certified_from) {
            (Some(w), _) => println!(" (witness m = {}, n = {:?})", w.m, w.n),
            (None, Some(k)) => println!(" (explicit up to {k}, closed form beyond)"),
            _ => println!(),
        }
    }
    let r = convergence_check(&l1, &x, &half, 0, &NullSeq::geometric(1.0, 0.5))?;
    println!("converges to (2^-k) in l1: {}", r.verdict.as_str());
    let harmonic = SequenceModel::scalar_times(ClosedForm::power(1.0, 1.0, -1.0, 1.0), Vector::unit(0));
    let r = cauchy_check(&fin, &harmonic, 0, &NullSeq::inverse_power(1.0, 1.0))?;
    println!("1/(n+1) e_0 with eps = 1/(m+1): {}", r.verdict.as_str());
    let sub = x.subsequence(3, 1)?;
    let r = cauchy_check(&fin, &sub, 0, &NullSeq::geometric(1.0, 0.5).subsequence(3, 1))?;
    println!("subsequence n -> 3n+1 with matching eps: {}", r.verdict.as_str());
    Ok(())
}
