//! Matrix-valued functions on a grid: the joint radius is the maximum over points.

use borno::algebra::{AlgebraElement, BoundedSet, Grid, NormKind};
use borno::jsr::{jsr_grid_max, JsrOptions};

fn main() -> borno::Result<()> {
    let grid = Grid::on_line(vec![0.0, 0.5, 1.0])?;
    let fiber = |t: f64| AlgebraElement::real_matrix(NormKind::Op2, &[&[t, 1.0 - t], &[0.0, 0.5]]);
    let f = AlgebraElement::grid_function(grid.clone(), &[fiber(0.0)?, fiber(0.5)?, fiber(1.0)?])?;
    let g = AlgebraElement::grid_function(grid, &[fiber(1.0)?, fiber(0.2)?, fiber(0.7)?])?;
    let r = jsr_grid_max(&BoundedSet::new(vec![f, g])?, &JsrOptions::new(8, 1e-4))?;
    for (i, p) in r.profile.iter().enumerate() {
        println!("point {i}: [{:.6}, {:.6}]", p.lower, p.upper);
    }
    println!("envelope {:?}", r.profile_envelope);
    println!("global   {:?}", r.global.interval());
    Ok(())
}
