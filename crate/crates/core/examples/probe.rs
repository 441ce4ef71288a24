use mlineq_core::grid::{GridSpec, Point};
use mlineq_core::pseudo::{extract_kernel, model_symbol, truncated_symbol, DyadicPartition};

fn main() {
    let grid = GridSpec::new(1, 12.0, 4096).unwrap();
    let part = DyadicPartition::new(8);
    let a = model_symbol(2, 1).unwrap();
    let trunc = truncated_symbol(&a, &part);
    let x0 = Point::new1(0.2);
    let slice = extract_kernel(&trunc, x0, &grid).unwrap();
    let g = grid.points_per_axis();
    let snap = |c: f64| -> usize {
        (((c + grid.half_width()) / grid.spacing() - 0.5).round().max(0.0) as usize).min(g - 1)
    };
    for n_exp in [2.0f64, 3.0, 4.0] {
        print!("N={n_exp}: ");
        for rho in [1.2, 2.4, 3.5, 5.0] {
            let lo = snap(x0.x - rho);
            let hi = snap(x0.x + rho);
            let mut best = 0.0f64;
            let step = ((hi - lo) / 400).max(1);
            for i1 in (lo..=hi).step_by(step) {
                for i2 in (lo..=hi).step_by(step) {
                    let y1 = grid.axis_coord(i1);
                    let y2 = grid.axis_coord(i2);
                    let s = (x0.x - y1).abs() + (x0.x - y2).abs() + (y1 - y2).abs();
                    if s <= 0.0 { continue; }
                    let v = slice.value_at(&[i1, i2]).norm() * s.powf(n_exp);
                    if v > best { best = v; }
                }
            }
            print!("rho={rho}: {best:.3}  ");
        }
        println!();
    }
    // near-diagonal slot scans at far distances (the suspected tail driver)
    let i0 = snap(x0.x);
    for d in [3.0f64, 4.0, 5.0, 6.0, 8.0] {
        let id = snap(x0.x + d);
        let v = slice.value_at(&[i0, id]).norm();
        println!("degenerate d={d}: |K| = {:.3e}, |K| S^4 = {:.3}", v, v * (2.0*d).powi(4));
    }
}
