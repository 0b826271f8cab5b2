//! Isoradiality on the fixture homomorphisms; the interval restriction is the
//! negative control and must fail.

use borno::isoradial::{certify_fixture, fixture_catalog, SamplerConfig};
use borno::jsr::JsrOptions;

fn main() -> borno::Result<()> {
    let cfg = SamplerConfig::default();
    let opts = JsrOptions::new(6, 1e-3);
    for fx in fixture_catalog()? {
        let r = certify_fixture(&fx, &cfg, &opts, 1e-2)?;
        println!(
            "{:<22} {:<5} worst ratio {:.6} certified {:.6} over {} sets, defect {:.1e}",
            fx.name,
            r.verdict.as_str(),
            r.worst_ratio,
            r.worst_certified_ratio,
            r.samples.len(),
            r.mult_defect
        );
    }
    Ok(())
}
