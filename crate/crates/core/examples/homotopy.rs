//! Certified sup of the curvature radius along the linear homotopy from the
//! identity to z ↦ cz, compared with the closed form sup |q(1−q)| r².

use borno::approx_mult::{linear_homotopy_certificate, scalar_ball, scalar_multiple, HomotopyOptions};

fn main() -> borno::Result<()> {
    let id = scalar_multiple(1.0)?;
    for (c, r) in [(0.0, 1.0), (0.5, 1.0), (0.8, 2.0), (1.5, 1.0)] {
        let cert = linear_homotopy_certificate(&id, &scalar_multiple(c)?, &scalar_ball(r)?, &HomotopyOptions::default())?;
        let q = |t: f64| 1.0 + t * (c - 1.0);
        let closed = (0..=10_000).map(|i| q(i as f64 / 1e4)).map(|q| (q * (1.0 - q)).abs()).fold(0.0, f64::max) * r * r;
        println!(
            "c = {c:<4} r = {r:<4} certified sup {:.8} (closed form {closed:.8}), {} evaluations, {}",
            cert.certified_sup,
            cert.evaluations,
            cert.verdict.as_str()
        );
    }
    Ok(())
}
