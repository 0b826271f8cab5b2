//! Uniform rates of truncations on a compact set, checked by sampling, and the
//! pointwise versus uniform comparison.

use borno::finrank::{
    pointwise_vs_uniform_check, sampling_soundness, uniform_convergence_on_set, CompactSetModel, NormKind, OperatorFamily, OperatorModel, TargetGauge,
};

fn main() -> borno::Result<()> {
    let s = CompactSetModel::geometric(1.0, 0.5)?;
    let t = TargetGauge::unit(NormKind::L2);
    let r = uniform_convergence_on_set(&OperatorFamily::Truncations, &OperatorModel::identity(), &s, &t, Some(8))?;
    for (n, e) in r.rates.iter().enumerate() {
        println!("eps_{n} in [{:.12}, {:.12}]", e.lo, e.hi);
    }
    println!("closed form for eps_4: {:.12}", 0.0625 / 3f64.sqrt());
    let sound = sampling_soundness(&OperatorFamily::Truncations, &OperatorModel::identity(), &s, &t, &r.rates, 1000, 7);
    println!("{} samples, worst measured/certified {:.4}, {} violations", sound.samples, sound.worst_ratio, sound.violations);
    let e = pointwise_vs_uniform_check(&OperatorFamily::Truncations, &OperatorModel::identity(), &s, &t, None, 7)?;
    println!("truncations vs identity: pointwise {}, uniform {}", e.pointwise.as_str(), e.uniform.as_str());
    let shifts = OperatorFamily::Constant { op: OperatorModel::shift() };
    let e = pointwise_vs_uniform_check(&shifts, &OperatorModel::zero(), &s, &t, None, 7)?;
    println!("constant shift vs zero: pointwise {}, uniform {}", e.pointwise.as_str(), e.uniform.as_str());
    Ok(())
}
