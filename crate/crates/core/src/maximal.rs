//! Critical-ball covers and local maximal operators.
//!
//! Five operators share the same scatter-max layout: the per-ball quantity
//! is computed once per ball and pushed to every grid point the ball
//! contains, which keeps reductions in a fixed deterministic order.
//!
//! - [`local_maximal`]: sup over family balls of radius at most `alpha`
//!   containing the point, of the average of `|f|`;
//! - [`local_sharp_maximal`]: same sup over mean oscillations;
//! - [`critical_maximal`]: sup over unit-radius cover balls of a dyadic
//!   decay sum of multilinear averages over dilates;
//! - [`product_maximal`]: sup over family balls of the product of
//!   `s`-averages;
//! - [`local_product_maximal`]: sum over cover members of the product
//!   maximal applied to inputs truncated to the eightfold dilate
//!   (overlapping cover members add, as the defining sum says).

use crate::error::{Error, Result};
use crate::grid::{ball_mask, for_each_in_ball, Ball, BallFamily, GridFunction, GridSpec, Point};

/// Unit-radius balls on the integer lattice, slightly enlarged past the box
/// so border samples stay covered, together with the measured overlap table.
#[derive(Clone, Debug)]
pub struct CriticalCover {
    pub balls: Vec<Ball>,
    /// `(sigma, max multiplicity of sigma-dilates over the grid)`.
    pub overlap: Vec<(f64, usize)>,
    /// One constant `C` with `overlap(sigma) <= C sigma^n` across the table.
    pub overlap_constant: f64,
}

/// Cover of the box by critical (unit-radius) balls centered on the integer
/// lattice of `[-L-1, L+1]^n`.
pub fn critical_cover(grid: &GridSpec) -> CriticalCover {
    let reach = grid.half_width().ceil() as i64 + 1;
    let mut balls = Vec::new();
    match grid.dim() {
        1 => {
            for i in -reach..=reach {
                balls.push(Ball::new(Point::new1(i as f64), 1.0).expect("unit ball"));
            }
        }
        _ => {
            for i in -reach..=reach {
                for j in -reach..=reach {
                    balls.push(Ball::new(Point::new2(i as f64, j as f64), 1.0).expect("unit ball"));
                }
            }
        }
    }

    let sigmas = [1.0, 2.0, 4.0, 8.0];
    let mut overlap = Vec::new();
    let mut constant = 0.0f64;
    let mut coverage = vec![0u32; grid.num_points()];
    for &sigma in &sigmas {
        let mut mult = vec![0u32; grid.num_points()];
        for ball in &balls {
            for_each_in_ball(grid, &ball.dilate(sigma), |idx, _| {
                mult[idx] += 1;
            });
        }
        if sigma == 1.0 {
            coverage.copy_from_slice(&mult);
        }
        let max_mult = mult.iter().copied().max().unwrap_or(0) as usize;
        overlap.push((sigma, max_mult));
        constant = constant.max(max_mult as f64 / sigma.powi(grid.dim() as i32));
    }
    debug_assert!(
        coverage.iter().all(|&c| c >= 1),
        "integer-lattice unit balls must cover the box"
    );

    CriticalCover {
        balls,
        overlap,
        overlap_constant: constant,
    }
}

/// Parameters of the critical maximal function: inner exponent, dilation of
/// the cover ball, dyadic decay exponent and truncation depth.
#[derive(Clone, Copy, Debug)]
pub struct MaximalParams {
    pub s: f64,
    pub kappa: f64,
    pub decay: f64,
    pub kmax: u32,
}

impl MaximalParams {
    pub fn new(grid: &GridSpec, s: f64, kappa: f64, decay: f64, kmax: u32) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::NonPositiveExponent(s));
        }
        if !(kappa >= 1.0) {
            return Err(Error::BadMaximalParams(format!("kappa = {kappa} < 1")));
        }
        if !(decay > 0.0) {
            return Err(Error::BadMaximalParams(format!("decay = {decay} <= 0")));
        }
        if 2f64.powi(kmax as i32) * kappa < grid.diameter() {
            return Err(Error::BadMaximalParams(format!(
                "2^kmax * kappa = {} below box diameter {}",
                2f64.powi(kmax as i32) * kappa,
                grid.diameter()
            )));
        }
        Ok(MaximalParams {
            s,
            kappa,
            decay,
            kmax,
        })
    }

    /// Defaults: `decay = mn + n + 1`, `kmax = ceil(log2(2L / kappa)) + 1`,
    /// so truncation only discards out-of-box annuli.
    pub fn defaults(grid: &GridSpec, m: usize, s: f64) -> Result<Self> {
        let n = grid.dim();
        let decay = (m * n + n + 1) as f64;
        let kappa = 1.0;
        let kmax = (2.0 * grid.half_width() / kappa).log2().ceil() as u32 + 1;
        Self::new(grid, s, kappa, decay, kmax)
    }
}

fn check_shared_grid(fvec: &[&GridFunction<f64>]) -> Result<GridSpec> {
    if fvec.is_empty() {
        return Err(Error::ComponentCount {
            expected: 1,
            got: 0,
        });
    }
    let grid = *fvec[0].grid();
    if fvec.iter().any(|f| *f.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    Ok(grid)
}

/// Mean of `|f|^s` over the samples of the ball; `None` when no sample.
fn power_average(f: &GridFunction<f64>, ball: &Ball, s: f64) -> Option<f64> {
    let mut acc = 0.0f64;
    let mut count = 0usize;
    for_each_in_ball(f.grid(), ball, |idx, _| {
        let v = f.value(idx).abs();
        acc += if s == 1.0 { v } else { v.powf(s) };
        count += 1;
    });
    if count == 0 {
        None
    } else {
        Some(acc / count as f64)
    }
}

fn signed_average(f: &GridFunction<f64>, ball: &Ball) -> Option<f64> {
    let mut acc = 0.0f64;
    let mut count = 0usize;
    for_each_in_ball(f.grid(), ball, |idx, _| {
        acc += f.value(idx);
        count += 1;
    });
    if count == 0 {
        None
    } else {
        Some(acc / count as f64)
    }
}

fn scatter_max(out: &mut [f64], grid: &GridSpec, ball: &Ball, value: f64) {
    for_each_in_ball(grid, ball, |idx, _| {
        if value > out[idx] {
            out[idx] = value;
        }
    });
}

fn local_sup(
    f: &GridFunction<f64>,
    alpha: f64,
    family: &BallFamily,
    per_ball: impl Fn(&GridFunction<f64>, &Ball) -> Option<f64>,
) -> Result<GridFunction<f64>> {
    let grid = *f.grid();
    let mut out = vec![f64::NEG_INFINITY; grid.num_points()];
    for ball in family.capped(alpha) {
        if let Some(v) = per_ball(f, ball) {
            scatter_max(&mut out, &grid, ball, v);
        }
    }
    let uncovered = out.iter().filter(|v| !v.is_finite()).count();
    if uncovered > 0 {
        return Err(Error::FamilyTooSparse { uncovered });
    }
    GridFunction::new(grid, out)
}

/// Local maximal function: at each point, the largest average of `|f|` over
/// family balls of radius at most `alpha` containing the point.
pub fn local_maximal(
    f: &GridFunction<f64>,
    alpha: f64,
    family: &BallFamily,
) -> Result<GridFunction<f64>> {
    local_sup(f, alpha, family, |f, ball| power_average(f, ball, 1.0))
}

/// Local sharp maximal function: the sup runs over mean oscillations
/// `avg_B |f - f_B|` instead of plain averages.
pub fn local_sharp_maximal(
    f: &GridFunction<f64>,
    alpha: f64,
    family: &BallFamily,
) -> Result<GridFunction<f64>> {
    local_sup(f, alpha, family, |f, ball| {
        let mean = signed_average(f, ball)?;
        let mut acc = 0.0f64;
        let mut count = 0usize;
        for_each_in_ball(f.grid(), ball, |idx, _| {
            acc += (f.value(idx) - mean).abs();
            count += 1;
        });
        Some(acc / count as f64)
    })
}

/// Critical maximal function: at each point the sup over cover balls `Q`
/// containing it of `sum_k 2^{-decay k} prod_j (avg_{2^k kappa Q}
/// |f_j|^s)^{1/s}`, the dilates clipped to the box and the sum truncated at
/// `kmax`.
pub fn critical_maximal(
    fvec: &[&GridFunction<f64>],
    params: &MaximalParams,
    cover: &CriticalCover,
) -> Result<GridFunction<f64>> {
    let grid = check_shared_grid(fvec)?;
    let mut out = vec![0.0f64; grid.num_points()];
    for ball in &cover.balls {
        let mask = ball_mask(&grid, ball);
        if mask.is_empty() {
            continue;
        }
        let mut sum = 0.0f64;
        for k in 0..=params.kmax {
            let dilate = Ball {
                center: ball.center,
                radius: ball.radius * params.kappa * 2f64.powi(k as i32),
            };
            let mut prod = 1.0f64;
            for f in fvec {
                match power_average(f, &dilate, params.s) {
                    Some(avg) => prod *= avg.powf(1.0 / params.s),
                    None => {
                        prod = 0.0;
                        break;
                    }
                }
            }
            sum += 2f64.powf(-params.decay * k as f64) * prod;
        }
        for &idx in &mask {
            if sum > out[idx] {
                out[idx] = sum;
            }
        }
    }
    GridFunction::new(grid, out)
}

/// Product maximal function: sup over family balls containing the point of
/// `prod_j (avg_Q |f_j|^s)^{1/s}`. Points no family ball reaches get 0 (the
/// sup over an empty set of nonnegative averages).
pub fn product_maximal(
    fvec: &[&GridFunction<f64>],
    s: f64,
    family: &BallFamily,
) -> Result<GridFunction<f64>> {
    if !(s > 0.0) {
        return Err(Error::NonPositiveExponent(s));
    }
    let grid = check_shared_grid(fvec)?;
    let mut out = vec![0.0f64; grid.num_points()];
    for ball in &family.balls {
        let mut prod = 1.0f64;
        let mut hit = true;
        for f in fvec {
            match power_average(f, ball, s) {
                Some(avg) => prod *= avg.powf(1.0 / s),
                None => {
                    hit = false;
                    break;
                }
            }
        }
        if hit {
            scatter_max(&mut out, &grid, ball, prod);
        }
    }
    GridFunction::new(grid, out)
}

/// Localized product maximal function: the literal sum over cover members
/// of the indicator of the member times the product maximal of the inputs
/// truncated to the eightfold dilate, so overlapping members add.
pub fn local_product_maximal(
    fvec: &[&GridFunction<f64>],
    s: f64,
    cover: &CriticalCover,
    family: &BallFamily,
) -> Result<GridFunction<f64>> {
    if !(s > 0.0) {
        return Err(Error::NonPositiveExponent(s));
    }
    let grid = check_shared_grid(fvec)?;
    let mut out = vec![0.0f64; grid.num_points()];
    for ball in &cover.balls {
        let mask = ball_mask(&grid, ball);
        if mask.is_empty() {
            continue;
        }
        let support = ball.dilate(8.0);
        let truncated: Vec<GridFunction<f64>> = fvec
            .iter()
            .map(|f| {
                let mut g = GridFunction::zeros(grid);
                for_each_in_ball(&grid, &support, |idx, _| {
                    g.values_mut()[idx] = f.value(idx);
                });
                g
            })
            .collect();
        let refs: Vec<&GridFunction<f64>> = truncated.iter().collect();
        let inner = product_maximal(&refs, s, family)?;
        for &idx in &mask {
            out[idx] += inner.value(idx);
        }
    }
    GridFunction::new(grid, out)
}

/// One-input specialization of [`local_product_maximal`].
pub fn local_scalar_maximal(
    f: &GridFunction<f64>,
    s: f64,
    cover: &CriticalCover,
    family: &BallFamily,
) -> Result<GridFunction<f64>> {
    local_product_maximal(&[f], s, cover, family)
}
