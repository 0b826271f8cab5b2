//! Full check on the Fejér fixture: isoradiality, σ-rates, then the homotopy
//! from the evaluation embedding h to f∘σ_n∘h.

use borno::approx_mult::{apple_certificate, evaluation_embedding, fejer_family, trig_fejer_fixture, AppleConfig};
use borno::isoradial::SamplerConfig;

fn main() -> borno::Result<()> {
    let fx = trig_fejer_fixture()?;
    let (h, h_set) = evaluation_embedding(&fx)?;
    let cfg = AppleConfig { sampler: SamplerConfig { per_size: 2, ..SamplerConfig::default() }, ..AppleConfig::default() };
    let r = apple_certificate(&fx, &fejer_family()?, &h, &h_set, &cfg)?;
    println!("isoradial {} (worst ratio {:.6})", r.isoradial.verdict.as_str(), r.isoradial.worst_ratio);
    println!("sigma     {} (last eps {:.3e})", r.sigma.verdict.as_str(), r.sigma.epsilons.last().copied().unwrap_or(f64::NAN));
    if let (Some(n), Some(cert)) = (r.sigma_index, &r.homotopy) {
        println!("homotopy to sigma_{n}: certified sup {:.6}, {}", cert.certified_sup, cert.verdict.as_str());
    }
    println!("verdict   {}", r.verdict.as_str());
    Ok(())
}
