//! Fejér means approximate the circle evaluation map on Lipschitz test functions.

use borno::approx_mult::{fejer_family, sigma_approximation_check, trig_fejer_fixture};

fn main() -> borno::Result<()> {
    let fx = trig_fejer_fixture()?;
    let family = fejer_family()?;
    let r = sigma_approximation_check(fx.map.map(), &family, 1e-2)?;
    for (i, n) in r.ns.iter().enumerate().filter(|(_, n)| n.is_power_of_two()) {
        let bound = r.bounds.as_ref().map_or(f64::NAN, |b| b[i]);
        println!("n = {n:>3}: eps {:.3e}, a-priori bound {bound:.3e}", r.epsilons[i]);
    }
    println!("nonincreasing {}, within bounds {}, verdict {}", r.nonincreasing, r.within_bounds, r.verdict.as_str());
    Ok(())
}
