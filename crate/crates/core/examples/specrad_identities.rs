//! ρ(cS) = |c|ρ(S), ρ(Sⁿ) = ρ(S)ⁿ and ρ(hull S) = ρ(S), checked on one set.

use borno::algebra::{AlgebraElement, BoundedSet, NormKind, C64};
use borno::jsr::{check_specrad_identities, JsrOptions, INTERVAL_SLACK};

fn main() -> borno::Result<()> {
    let s = BoundedSet::new(vec![
        AlgebraElement::real_matrix(NormKind::Op2, &[&[0.9, 0.3], &[-0.2, 0.4]])?,
        AlgebraElement::real_matrix(NormKind::Op2, &[&[0.1, 0.8], &[0.5, 0.0]])?,
    ])?;
    let c = C64::new(1.5, -0.5);
    let r = check_specrad_identities(&s, c, 3, &JsrOptions::new(6, 1e-3))?;
    let base = r.rho_s.interval();
    println!("rho(S)      {base:?}");
    println!("rho(cS)     {:?}  vs |c| rho(S) {:?}", r.rho_cs.interval(), base.scale(r.c_abs));
    println!("rho(S^n)    {:?}  vs rho(S)^n {:?}", r.rho_sn.interval(), base.powi(r.n as i32));
    println!("rho(hull S) {:?}", r.rho_hull.interval());
    let ok = r.rho_cs.interval().intersects(&base.scale(r.c_abs), INTERVAL_SLACK)
        && r.rho_sn.interval().intersects(&base.powi(r.n as i32), INTERVAL_SLACK)
        && r.rho_hull.interval().intersects(&base, INTERVAL_SLACK);
    println!("consistent: {ok}");
    Ok(())
}
