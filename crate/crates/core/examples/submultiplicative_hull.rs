//! A disk closed under multiplication that absorbs r⁻¹S, for r above the radius.

use borno::algebra::{AlgebraElement, BoundedSet, NormKind};
use borno::jsr::{jsr_estimate, submultiplicative_hull};

fn main() -> borno::Result<()> {
    let a = AlgebraElement::real_matrix(NormKind::Op2, &[&[0.6, 0.5], &[0.0, 0.3]])?;
    let b = AlgebraElement::real_matrix(NormKind::Op2, &[&[0.2, 0.0], &[0.4, 0.5]])?;
    let s = BoundedSet::new(vec![a, b])?;
    let rho = jsr_estimate(&s, 10, 1e-4)?;
    println!("rho(S) in [{:.6}, {:.6}]", rho.lower, rho.upper);
    for r in [rho.upper * 1.05, rho.upper * 1.5] {
        let h = submultiplicative_hull(&s, r, 4096)?;
        println!("r = {r:.4}: {} generators, closure defect {:.2e}", h.generators().len(), h.closure_defect);
        let shown: Vec<String> = h.decay_profile.iter().take(8).map(|x| format!("{x:.3}")).collect();
        println!("  product norms by length: {}", shown.join(" "));
    }
    Ok(())
}
