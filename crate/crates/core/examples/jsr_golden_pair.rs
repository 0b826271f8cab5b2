//! Joint spectral radius of the two shear matrices; the answer is the golden ratio.

use borno::algebra::{AlgebraElement, BoundedSet, NormKind};
use borno::jsr::{jsr_estimate_with, JsrOptions};

fn main() -> borno::Result<()> {
    let a = AlgebraElement::real_matrix(NormKind::Op2, &[&[1.0, 1.0], &[0.0, 1.0]])?;
    let b = AlgebraElement::real_matrix(NormKind::Op2, &[&[1.0, 0.0], &[1.0, 1.0]])?;
    let s = BoundedSet::new(vec![a, b])?;
    let e = jsr_estimate_with(&s, &JsrOptions::new(12, 1e-3))?;
    println!("rho(S) in [{:.10}, {:.10}]", e.lower, e.upper);
    println!("gap {:.2e}, status {}, witness word {:?}", e.gap(), e.status.as_str(), e.witness_word);
    println!("golden ratio   {:.10}", (1.0 + 5f64.sqrt()) / 2.0);
    Ok(())
}
