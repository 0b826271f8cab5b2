//! Curvature g(a)g(b) − g(ab) and its joint radius: zero for homomorphisms,
//! |ε(1+ε)| for z ↦ (1+ε)z on the unit disk, quadratic under scaling.

use std::sync::Arc;

use borno::algebra::{AlgebraDescriptor, AlgebraElement, BoundedSet, NormKind};
use borno::approx_mult::{curvature_radius, is_approximately_multiplicative, scalar_ball, scalar_multiple};
use borno::jsr::JsrOptions;
use borno::maps::{corner_embedding, transpose_map};

fn main() -> borno::Result<()> {
    let opts = JsrOptions::new(8, 1e-9);
    let s = BoundedSet::new(vec![
        AlgebraElement::real_matrix(NormKind::Op2, &[&[0.5, 0.2], &[0.0, 0.4]])?,
        AlgebraElement::real_matrix(NormKind::Op2, &[&[0.1, 0.0], &[0.3, 0.6]])?,
    ])?;
    let corner = corner_embedding(2, 3, NormKind::Op2)?;
    println!("corner embedding: {:?}", curvature_radius(&corner, &s, &opts)?.interval());
    let t = transpose_map(2, NormKind::Op2)?;
    let (v, e) = is_approximately_multiplicative(&t, &s, &opts)?;
    println!("transpose:        {:?} ({})", e.interval(), v.as_str());
    for eps in [0.1, -0.3, 2.0] {
        let e = curvature_radius(&scalar_multiple(1.0 + eps)?, &scalar_ball(1.0)?, &opts)?;
        println!("scalar 1{eps:+}:      {:?}, closed form {:.6}", e.interval(), (eps * (1.0 + eps)).abs());
    }
    let desc = Arc::new(AlgebraDescriptor::matrix(2, NormKind::Op2));
    let g = t.add(&borno::maps::LinearMap::identity(desc)?.scale_real(0.1))?;
    let base = curvature_radius(&g, &s, &opts)?.interval();
    for k in [0.5, 2.0] {
        let scaled = curvature_radius(&g, &s.scaled_real(k), &opts)?.interval();
        println!("scale {k}: {scaled:?} vs k^2 * base {:?}", base.scale(k * k));
    }
    Ok(())
}
