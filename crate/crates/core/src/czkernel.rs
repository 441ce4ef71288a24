//! Multilinear kernels: size and smoothness verification, direct-quadrature
//! application, and commutators with oscillation symbols.
//!
//! A kernel acts on tuples `(y_0, y_1, ..., y_m)`; its scale variable is the
//! pairwise separation `S = sum_{k<l} |y_k - y_l|`. The size condition asks
//! for `|K| <= C_N / S^N`; the smoothness condition controls the change of
//! `K` under displacing one slot by at most half its largest distance to the
//! other slots. Both are verified empirically: the fitted constant is the
//! max over a sample set, and a constant that keeps growing as the sampled
//! region doubles flags the condition as failed.

use std::sync::Arc;


use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec, Point};
use crate::rng::Stream;

/// Evaluation rule plus class parameters of a multilinear kernel.
#[derive(Clone)]
pub struct KernelSpec {
    m: usize,
    n: usize,
    /// Smoothness (Holder) exponent used by the verification.
    pub epsilon: f64,
    /// Decay length of the model family.
    pub decay_scale: f64,
    eval: Arc<dyn Fn(&[Point]) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelSpec")
            .field("m", &self.m)
            .field("n", &self.n)
            .field("epsilon", &self.epsilon)
            .field("decay_scale", &self.decay_scale)
            .finish()
    }
}

/// Pairwise separation `sum_{k<l} |y_k - y_l|`.
pub fn separation(points: &[Point]) -> f64 {
    let mut s = 0.0;
    for k in 0..points.len() {
        for l in (k + 1)..points.len() {
            s += points[k].dist(&points[l]);
        }
    }
    s
}

impl KernelSpec {
    pub fn new(
        m: usize,
        n: usize,
        epsilon: f64,
        decay_scale: f64,
        eval: Arc<dyn Fn(&[Point]) -> f64 + Send + Sync>,
    ) -> Result<Self> {
        if m != 1 && m != 2 {
            return Err(Error::KernelArity(m));
        }
        if n != 1 && n != 2 {
            return Err(Error::GridDimension(n));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::NonPositiveExponent(epsilon));
        }
        Ok(KernelSpec {
            m,
            n,
            epsilon,
            decay_scale,
            eval,
        })
    }

    pub fn arity(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Diagonal order `m n` of the model singularity.
    pub fn mn(&self) -> usize {
        self.m * self.n
    }

    /// Evaluate at a tuple `(y_0, ..., y_m)`.
    pub fn eval(&self, points: &[Point]) -> f64 {
        debug_assert_eq!(points.len(), self.m + 1);
        (self.eval)(points)
    }
}

/// Model kernel `exp(-S / scale) / S^{mn}`: the exponential factor delivers
/// arbitrarily fast decay, the power matches the diagonal order, and the
/// whole expression is Lipschitz off the diagonal.
pub fn model_kernel(m: usize, n: usize, scale: f64) -> Result<KernelSpec> {
    if !(scale > 0.0) {
        return Err(Error::NonPositiveExponent(scale));
    }
    let mn = (m * n) as i32;
    KernelSpec::new(
        m,
        n,
        1.0,
        scale,
        Arc::new(move |pts: &[Point]| {
            let s = separation(pts);
            if s == 0.0 {
                return f64::INFINITY;
            }
            (-s / scale).exp() / s.powi(mn)
        }),
    )
}

/// Pure power kernel `S^{-mn}` with no decay factor. Negative fixture: the
/// size constant at any exponent above `mn` grows with the sampled region.
pub fn power_kernel(m: usize, n: usize) -> Result<KernelSpec> {
    let mn = (m * n) as i32;
    KernelSpec::new(
        m,
        n,
        1.0,
        1.0,
        Arc::new(move |pts: &[Point]| {
            let s = separation(pts);
            if s == 0.0 {
                return f64::INFINITY;
            }
            s.powi(-mn)
        }),
    )
}

/// Pre-evaluated size sample: separation and kernel magnitude.
#[derive(Clone, Copy, Debug)]
pub struct SizeSample {
    pub s: f64,
    pub magnitude: f64,
}

/// Per-exponent fitted size constant over the base samples and over the
/// region-doubled extension.
#[derive(Clone, Copy, Debug)]
pub struct SizeEntry {
    pub exponent: f64,
    pub c_base: f64,
    pub c_extended: f64,
    pub divergent: bool,
}

#[derive(Clone, Debug)]
pub struct SizeReport {
    pub entries: Vec<SizeEntry>,
    pub skipped_diagonal: usize,
    pub base_count: usize,
    pub extended_count: usize,
}

impl SizeReport {
    pub fn any_divergent(&self) -> bool {
        self.entries.iter().any(|e| e.divergent)
    }
}

/// Growth of a fitted constant under region doubling beyond which the
/// condition is flagged as failed.
const DIVERGENCE_TOLERANCE: f64 = 1.1;

/// Fit `C_N = max |K| S^N` per exponent from pre-evaluated samples; the
/// extension set models the doubled region.
pub fn size_constants(
    base: &[SizeSample],
    extension: &[SizeSample],
    exponents: &[f64],
) -> SizeReport {
    let entries = exponents
        .iter()
        .map(|&n_exp| {
            let fit = |samples: &[SizeSample]| {
                samples
                    .iter()
                    .map(|smp| smp.magnitude * smp.s.powf(n_exp))
                    .fold(0.0f64, f64::max)
            };
            let c_base = fit(base);
            let c_extended = c_base.max(fit(extension));
            SizeEntry {
                exponent: n_exp,
                c_base,
                c_extended,
                divergent: c_extended > DIVERGENCE_TOLERANCE * c_base,
            }
        })
        .collect();
    SizeReport {
        entries,
        skipped_diagonal: 0,
        base_count: base.len(),
        extended_count: extension.len(),
    }
}

/// Evaluate the size condition of a kernel on point-tuple sets; tuples on
/// the exact diagonal are skipped and counted.
pub fn verify_size(
    kernel: &KernelSpec,
    base: &[Vec<Point>],
    extension: &[Vec<Point>],
    exponents: &[f64],
) -> SizeReport {
    let mut skipped = 0usize;
    let eval_set = |tuples: &[Vec<Point>], skipped: &mut usize| -> Vec<SizeSample> {
        tuples
            .iter()
            .filter_map(|t| {
                let s = separation(t);
                if s <= 0.0 {
                    *skipped += 1;
                    return None;
                }
                Some(SizeSample {
                    s,
                    magnitude: kernel.eval(t).abs(),
                })
            })
            .collect()
    };
    let base_samples = eval_set(base, &mut skipped);
    let ext_samples = eval_set(extension, &mut skipped);
    let mut report = size_constants(&base_samples, &ext_samples, exponents);
    report.skipped_diagonal = skipped;
    report
}

/// A displacement pair for the smoothness condition: slot `slot` of the
/// tuple is moved to `displaced`.
#[derive(Clone, Debug)]
pub struct SmoothnessPair {
    pub points: Vec<Point>,
    pub slot: usize,
    pub displaced: Point,
}

impl SmoothnessPair {
    /// Half the largest distance from the displaced slot to the others.
    pub fn half_spread(&self) -> f64 {
        let yj = self.points[self.slot];
        0.5 * self
            .points
            .iter()
            .map(|p| yj.dist(p))
            .fold(0.0f64, f64::max)
    }

    pub fn displacement(&self) -> f64 {
        self.points[self.slot].dist(&self.displaced)
    }

    /// The admissibility precondition: displacement at most half the
    /// largest distance to the other slots.
    pub fn admissible(&self) -> bool {
        self.displacement() <= self.half_spread()
    }
}

/// Pre-evaluated smoothness sample.
#[derive(Clone, Copy, Debug)]
pub struct SmoothnessSample {
    pub s: f64,
    pub delta_magnitude: f64,
    pub displacement: f64,
    pub half_spread: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SmoothnessEntry {
    pub exponent: f64,
    pub c_base: f64,
    pub c_extended: f64,
    pub divergent: bool,
}

#[derive(Clone, Debug)]
pub struct SmoothnessReport {
    pub entries: Vec<SmoothnessEntry>,
    pub rejected: usize,
    pub base_count: usize,
    pub extended_count: usize,
}

impl SmoothnessReport {
    pub fn any_divergent(&self) -> bool {
        self.entries.iter().any(|e| e.divergent)
    }
}

/// Fit `C_N = max |dK| S^{mn+eps} / (|dy|^eps min(1, h^{-N}))`.
pub fn smoothness_constants(
    base: &[SmoothnessSample],
    extension: &[SmoothnessSample],
    mn: usize,
    epsilon: f64,
    exponents: &[f64],
) -> SmoothnessReport {
    let entries = exponents
        .iter()
        .map(|&n_exp| {
            let fit = |samples: &[SmoothnessSample]| {
                samples
                    .iter()
                    .filter(|smp| smp.displacement > 0.0)
                    .map(|smp| {
                        let damp = 1.0f64.min(smp.half_spread.powf(-n_exp));
                        smp.delta_magnitude * smp.s.powf(mn as f64 + epsilon)
                            / (smp.displacement.powf(epsilon) * damp)
                    })
                    .fold(0.0f64, f64::max)
            };
            let c_base = fit(base);
            let c_extended = c_base.max(fit(extension));
            SmoothnessEntry {
                exponent: n_exp,
                c_base,
                c_extended,
                divergent: c_extended > DIVERGENCE_TOLERANCE * c_base,
            }
        })
        .collect();
    SmoothnessReport {
        entries,
        rejected: 0,
        base_count: base.len(),
        extended_count: extension.len(),
    }
}

/// Evaluate the smoothness condition; pairs violating the displacement
/// precondition are rejected and counted.
pub fn verify_smoothness(
    kernel: &KernelSpec,
    base: &[SmoothnessPair],
    extension: &[SmoothnessPair],
    exponents: &[f64],
) -> SmoothnessReport {
    let mut rejected = 0usize;
    let eval_set = |pairs: &[SmoothnessPair], rejected: &mut usize| -> Vec<SmoothnessSample> {
        pairs
            .iter()
            .filter_map(|pair| {
                if !pair.admissible() {
                    *rejected += 1;
                    return None;
                }
                let s = separation(&pair.points);
                if s <= 0.0 {
                    *rejected += 1;
                    return None;
                }
                let before = kernel.eval(&pair.points);
                let mut moved = pair.points.clone();
                moved[pair.slot] = pair.displaced;
                let after = kernel.eval(&moved);
                Some(SmoothnessSample {
                    s,
                    delta_magnitude: (before - after).abs(),
                    displacement: pair.displacement(),
                    half_spread: pair.half_spread(),
                })
            })
            .collect()
    };
    let base_samples = eval_set(base, &mut rejected);
    let ext_samples = eval_set(extension, &mut rejected);
    let mut report = smoothness_constants(
        &base_samples,
        &ext_samples,
        kernel.mn(),
        kernel.epsilon,
        exponents,
    );
    report.rejected = rejected;
    report
}

fn random_point(stream: &mut Stream, n: usize, anchor: Point, radius: f64) -> Point {
    match n {
        1 => Point::new1(anchor.x + stream.range(-radius, radius)),
        _ => Point::new2(
            anchor.x + stream.range(-radius, radius),
            anchor.y + stream.range(-radius, radius),
        ),
    }
}

/// Deterministic tuple set for the size condition: anchors in the box core,
/// offsets log-spaced so the separation sweeps `[s_min, region]`.
pub fn size_sample_plan(
    m: usize,
    n: usize,
    region: f64,
    count: usize,
    seed: u64,
) -> (Vec<Vec<Point>>, Vec<Vec<Point>>) {
    let gen = |scale: f64, label: &str| -> Vec<Vec<Point>> {
        let base = Stream::new(seed, label);
        (0..count)
            .map(|i| {
                let mut s = base.substream(i as u64);
                let anchor = random_point(&mut s, n, Point::new1(0.0), 1.0);
                let rho = s.log_range(1e-3, scale);
                (0..=m).map(|_| random_point(&mut s, n, anchor, rho)).collect()
            })
            .collect()
    };
    (gen(region, "size-base"), gen(2.0 * region, "size-doubled"))
}

/// Deterministic displacement pairs for the smoothness condition; every
/// generated pair satisfies the half-spread precondition.
pub fn smoothness_sample_plan(
    m: usize,
    n: usize,
    region: f64,
    count: usize,
    seed: u64,
) -> (Vec<SmoothnessPair>, Vec<SmoothnessPair>) {
    let gen = |scale: f64, label: &str| -> Vec<SmoothnessPair> {
        let base = Stream::new(seed, label);
        (0..count)
            .map(|i| {
                let mut s = base.substream(i as u64);
                let anchor = random_point(&mut s, n, Point::new1(0.0), 1.0);
                let rho = s.log_range(1e-2, scale);
                let points: Vec<Point> =
                    (0..=m).map(|_| random_point(&mut s, n, anchor, rho)).collect();
                let slot = s.index(m + 1);
                let pair = SmoothnessPair {
                    displaced: points[slot],
                    points,
                    slot,
                };
                let h = pair.half_spread();
                let eta = s.range(0.05, 1.0);
                let dir = random_point(&mut s, n, Point::new1(0.0), 1.0);
                let norm = dir.norm().max(1e-12);
                let yj = pair.points[pair.slot];
                SmoothnessPair {
                    displaced: Point::new2(
                        yj.x + dir.x / norm * eta * h,
                        if n == 1 { 0.0 } else { yj.y + dir.y / norm * eta * h },
                    ),
                    ..pair
                }
            })
            .collect()
    };
    (
        gen(region, "smooth-base"),
        gen(2.0 * region, "smooth-doubled"),
    )
}

/// Cap on the estimated number of kernel evaluations for one application.
const COST_CAP: u128 = 300_000_000;

fn check_inputs(kernel: &KernelSpec, fvec: &[&GridFunction<f64>]) -> Result<GridSpec> {
    if fvec.len() != kernel.arity() {
        return Err(Error::ComponentCount {
            expected: kernel.arity(),
            got: fvec.len(),
        });
    }
    let grid = *fvec[0].grid();
    if fvec.iter().any(|f| *f.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    if grid.dim() != kernel.dim() {
        return Err(Error::GridDimension(grid.dim()));
    }
    Ok(grid)
}

fn guard_cost(grid: &GridSpec, m: usize, out_points: usize) -> Result<()> {
    let estimated = (out_points as u128) * (grid.num_points() as u128).pow(m as u32);
    if estimated > COST_CAP {
        return Err(Error::CostGuard {
            estimated,
            cap: COST_CAP,
        });
    }
    Ok(())
}

/// Direct quadrature of the defining integral at one output point. Cells on
/// the exact diagonal are omitted (principal-value convention; the model
/// singularity is integrable, so omission converges under refinement).
fn apply_at_point(
    kernel: &KernelSpec,
    fvec: &[&GridFunction<f64>],
    grid: &GridSpec,
    x: Point,
) -> f64 {
    let m = kernel.arity();
    let np = grid.num_points();
    let vol = grid.cell_volume().powi(m as i32);
    let mut tuple: Vec<Point> = vec![x; m + 1];
    let mut acc = 0.0f64;
    // nested loops over the m source slots, written as one counter
    let mut indices = vec![0usize; m];
    loop {
        let mut weight = 1.0f64;
        for (j, &idx) in indices.iter().enumerate() {
            weight *= fvec[j].value(idx);
            tuple[j + 1] = grid.point(idx);
        }
        if weight != 0.0 {
            let s = separation(&tuple);
            if s > 0.0 {
                acc += kernel.eval(&tuple) * weight;
            }
        }

        // advance the multi-index in row-major order
        let mut slot = m;
        loop {
            if slot == 0 {
                return acc * vol;
            }
            slot -= 1;
            indices[slot] += 1;
            if indices[slot] < np {
                break;
            }
            indices[slot] = 0;
        }
    }
}

/// Apply the kernel operator by midpoint quadrature at every grid point.
pub fn apply(kernel: &KernelSpec, fvec: &[&GridFunction<f64>]) -> Result<GridFunction<f64>> {
    let grid = check_inputs(kernel, fvec)?;
    guard_cost(&grid, kernel.arity(), grid.num_points())?;
    let values: Vec<f64> = (0..grid.num_points())
        .map(|i| apply_at_point(kernel, fvec, &grid, grid.point(i)))
        .collect();
    GridFunction::new(grid, values)
}

/// Apply at selected output indices only (stride-subsampled evaluation for
/// configurations the full-grid cost guard rejects).
pub fn apply_at(
    kernel: &KernelSpec,
    fvec: &[&GridFunction<f64>],
    indices: &[usize],
) -> Result<Vec<f64>> {
    let grid = check_inputs(kernel, fvec)?;
    guard_cost(&grid, kernel.arity(), indices.len())?;
    indices
        .iter()
        .map(|&i| {
            if i >= grid.num_points() {
                return Err(Error::BadMaskIndex(i));
            }
            Ok(apply_at_point(kernel, fvec, &grid, grid.point(i)))
        })
        .collect()
}

/// Multilinear commutator with a vector of symbols: the alternating sum
/// `sum_j [b_j T(f) - T(f_1, ..., b_j f_j, ..., f_m)]`.
pub fn commutator(
    kernel: &KernelSpec,
    symbols: &crate::bmo::SymbolVector,
    fvec: &[&GridFunction<f64>],
) -> Result<GridFunction<f64>> {
    let grid = check_inputs(kernel, fvec)?;
    if symbols.len() != kernel.arity() {
        return Err(Error::ComponentCount {
            expected: kernel.arity(),
            got: symbols.len(),
        });
    }
    let t_all = apply(kernel, fvec)?;
    let mut out = GridFunction::zeros(grid);
    for j in 0..kernel.arity() {
        let b = symbols.symbol(j).values();
        let weighted: Vec<GridFunction<f64>> = fvec
            .iter()
            .enumerate()
            .map(|(i, f)| {
                if i == j {
                    f.zip_map(b, |fv, bv| fv * bv)
                } else {
                    (*f).clone()
                }
            })
            .collect();
        let refs: Vec<&GridFunction<f64>> = weighted.iter().collect();
        let t_weighted = apply(kernel, &refs)?;
        for i in 0..grid.num_points() {
            out.values_mut()[i] += b.value(i) * t_all.value(i) - t_weighted.value(i);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bmo::{SymbolRecipe, SymbolVector};
    use approx::assert_relative_eq;

    fn grid1(l: f64, g: usize) -> GridSpec {
        GridSpec::new(1, l, g).unwrap()
    }

    #[test]
    fn model_kernel_symmetry_and_decay() {
        let k = model_kernel(2, 1, 1.0).unwrap();
        let a = Point::new1(0.0);
        let b = Point::new1(0.7);
        let c = Point::new1(-0.4);
        assert_eq!(k.eval(&[a, b, c]), k.eval(&[a, c, b]));

        // exponential factor: scaling all distances by 20 crushes the value
        let near = [Point::new1(0.0), Point::new1(0.25), Point::new1(-0.25)];
        let far = [Point::new1(0.0), Point::new1(5.0), Point::new1(-5.0)];
        let s_near = separation(&near);
        let s_far = separation(&far);
        let ratio = (k.eval(&far) * s_far.powi(2)) / (k.eval(&near) * s_near.powi(2));
        assert!(ratio <= (-(s_far - s_near)).exp() * 1.0001);
    }

    #[test]
    fn size_constant_matches_calculus_maximum() {
        // for exp(-S)/S^mn the fitted constant at exponent mn + v is
        // sup S^v exp(-S) = (v/e)^v, attained at S = v
        let k = model_kernel(2, 1, 1.0).unwrap();
        let mn = k.mn() as f64;
        // sweep S densely: tuples (0, t, -t) have separation 4t
        let tuples: Vec<Vec<Point>> = (1..4000)
            .map(|i| {
                let t = 1e-3 * 1.004f64.powi(i);
                vec![Point::new1(0.0), Point::new1(t), Point::new1(-t)]
            })
            .collect();
        for v in [0.0f64, 1.0, 2.0] {
            let report = verify_size(&k, &tuples, &[], &[mn + v]);
            let expected = if v == 0.0 { 1.0 } else { (v / std::f64::consts::E).powf(v) };
            let got = report.entries[0].c_base;
            assert!(
                (got - expected).abs() / expected < 0.05,
                "v = {v}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn verify_size_zero_kernel_and_skips() {
        let zero = KernelSpec::new(2, 1, 1.0, 1.0, Arc::new(|_: &[Point]| 0.0)).unwrap();
        let diag = vec![Point::new1(1.0); 3];
        let ok = vec![Point::new1(0.0), Point::new1(1.0), Point::new1(2.0)];
        let report = verify_size(&zero, &[diag, ok], &[], &[2.0, 3.0]);
        assert_eq!(report.skipped_diagonal, 1);
        assert!(report.entries.iter().all(|e| e.c_base == 0.0));
    }

    #[test]
    fn model_kernel_size_stable_power_kernel_divergent() {
        let (base, doubled) = size_sample_plan(2, 1, 4.0, 600, 11);

        let model = model_kernel(2, 1, 1.0).unwrap();
        let report = verify_size(&model, &base, &doubled, &[2.0, 3.0, 4.0]);
        assert!(!report.any_divergent(), "{:?}", report.entries);
        assert!(report.entries.iter().all(|e| e.c_base.is_finite()));

        let power = power_kernel(2, 1).unwrap();
        let report = verify_size(&power, &base, &doubled, &[3.0]);
        assert!(report.any_divergent(), "{:?}", report.entries);
    }

    #[test]
    fn smoothness_identity_pair_contributes_zero() {
        let k = model_kernel(2, 1, 1.0).unwrap();
        let points = vec![Point::new1(0.0), Point::new1(1.0), Point::new1(-1.0)];
        let pair = SmoothnessPair {
            displaced: points[1],
            points,
            slot: 1,
        };
        let report = verify_smoothness(&k, &[pair], &[], &[1.0]);
        assert_eq!(report.rejected, 0);
        assert_eq!(report.entries[0].c_base, 0.0);
    }

    #[test]
    fn smoothness_rejects_large_displacement() {
        let k = model_kernel(2, 1, 1.0).unwrap();
        let points = vec![Point::new1(0.0), Point::new1(1.0), Point::new1(-1.0)];
        // slot 1: largest distance to others is 2, half-spread 1; move by 1.8
        let pair = SmoothnessPair {
            displaced: Point::new1(2.8),
            points,
            slot: 1,
        };
        assert!(!pair.admissible());
        let report = verify_smoothness(&k, &[pair], &[], &[1.0]);
        assert_eq!(report.rejected, 1);
        assert_eq!(report.entries[0].c_base, 0.0);
    }

    #[test]
    fn model_kernel_smoothness_stable() {
        let k = model_kernel(2, 1, 1.0).unwrap();
        let (base, doubled) = smoothness_sample_plan(2, 1, 4.0, 1000, 23);
        let report = verify_smoothness(&k, &base, &doubled, &[1.0, 2.0]);
        assert_eq!(report.rejected, 0);
        assert!(!report.any_divergent(), "{:?}", report.entries);
    }

    #[test]
    fn verification_constants_translation_invariant() {
        let k = model_kernel(2, 1, 1.0).unwrap();
        let (base, _) = size_sample_plan(2, 1, 2.0, 200, 5);
        let shifted: Vec<Vec<Point>> = base
            .iter()
            .map(|t| t.iter().map(|p| Point::new1(p.x + 3.0)).collect())
            .collect();
        let r1 = verify_size(&k, &base, &[], &[3.0]);
        let r2 = verify_size(&k, &shifted, &[], &[3.0]);
        assert_relative_eq!(
            r1.entries[0].c_base,
            r2.entries[0].c_base,
            max_relative = 1e-9
        );
    }

    #[test]
    fn apply_is_multilinear() {
        let g = grid1(4.0, 32);
        let k = model_kernel(2, 1, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |p| (-p.x * p.x).exp()).unwrap();
        let u = GridFunction::from_fn(g, |p| (p.x * 0.8).cos()).unwrap();
        let v = GridFunction::from_fn(g, |p| p.x / (1.0 + p.x * p.x)).unwrap();

        let zero = GridFunction::zeros(g);
        let t0 = apply(&k, &[&zero, &f]).unwrap();
        assert!(t0.values().iter().all(|&x| x == 0.0));

        let sum = u.zip_map(&v, |a, b| a + b);
        let t_sum = apply(&k, &[&f, &sum]).unwrap();
        let t_u = apply(&k, &[&f, &u]).unwrap();
        let t_v = apply(&k, &[&f, &v]).unwrap();
        for i in 0..g.num_points() {
            assert!((t_sum.value(i) - t_u.value(i) - t_v.value(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_even_symmetry() {
        let g = grid1(4.0, 32);
        let k = model_kernel(1, 1, 1.0).unwrap();
        let even = GridFunction::from_fn(g, |p| (-p.x * p.x).exp()).unwrap();
        let t = apply(&k, &[&even]).unwrap();
        let np = g.num_points();
        for i in 0..np {
            assert!((t.value(i) - t.value(np - 1 - i)).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_refinement_converges_off_support() {
        // where the defining integral converges (inputs with disjoint
        // supports keep the integrand off the diagonal), halving the
        // spacing shrinks the output change
        let k = model_kernel(2, 1, 1.0).unwrap();
        let bump = |c: f64, w: f64| {
            move |p: Point| {
                let u: f64 = (p.x - c) / w;
                if u.abs() < 1.0 {
                    (-1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                }
            }
        };
        let eval_at_zero = |g: GridSpec| {
            let f1 = GridFunction::from_fn(g, bump(-2.0, 1.0)).unwrap();
            let f2 = GridFunction::from_fn(g, bump(2.0, 1.0)).unwrap();
            let idx = g.num_points() / 2;
            apply_at(&k, &[&f1, &f2], &[idx]).unwrap()[0]
        };
        let coarse = eval_at_zero(grid1(4.0, 32));
        let mid = eval_at_zero(grid1(4.0, 64));
        let fine = eval_at_zero(grid1(4.0, 128));
        let e1 = (coarse - mid).abs();
        let e2 = (mid - fine).abs();
        assert!(e2 <= 0.6 * e1, "refinement ratio {} vs {}", e2, e1);
    }

    #[test]
    fn apply_2d_matches_reference_sum() {
        let g = GridSpec::new(2, 2.0, 16).unwrap();
        let k = model_kernel(1, 2, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |p| (-(p.x * p.x + p.y * p.y)).exp()).unwrap();
        let targets = [0usize, 77, 200];
        let got = apply_at(&k, &[&f], &targets).unwrap();
        for (t, &idx) in targets.iter().enumerate() {
            let x = g.point(idx);
            let mut acc = 0.0;
            for j in 0..g.num_points() {
                let y = g.point(j);
                let s = ((x.x - y.x).powi(2) + (x.y - y.y).powi(2)).sqrt();
                if s == 0.0 {
                    continue;
                }
                acc += (-s).exp() / (s * s) * f.value(j);
            }
            acc *= g.cell_volume();
            assert!((got[t] - acc).abs() < 1e-12, "{} vs {}", got[t], acc);
        }
    }

    #[test]
    fn cost_guard_fires() {
        let g = GridSpec::new(2, 4.0, 128).unwrap();
        let k = model_kernel(2, 2, 1.0).unwrap();
        let f = GridFunction::ones(g);
        assert!(matches!(
            apply(&k, &[&f, &f]),
            Err(Error::CostGuard { .. })
        ));
    }

    #[test]
    fn commutator_constant_symbols_vanish() {
        let g = grid1(4.0, 32);
        let k = model_kernel(2, 1, 1.0).unwrap();
        let f1 = GridFunction::from_fn(g, |p| (-p.x * p.x).exp()).unwrap();
        let f2 = GridFunction::from_fn(g, |p| (p.x * 0.5).cos()).unwrap();
        let sv = SymbolVector::new(
            vec![
                SymbolRecipe::Constant { value: 3.0 }.materialize(g).unwrap(),
                SymbolRecipe::Constant { value: -1.5 }.materialize(g).unwrap(),
            ],
            vec![0.0, 0.0],
        )
        .unwrap();
        let out = commutator(&k, &sv, &[&f1, &f2]).unwrap();
        let t = apply(&k, &[&f1, &f2]).unwrap();
        let scale = t.values().iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        for &v in out.values() {
            assert!(v.abs() <= 1e-10 * scale.max(1.0));
        }
    }

    #[test]
    fn commutator_additive_in_symbols() {
        let g = grid1(4.0, 32);
        let k = model_kernel(2, 1, 1.0).unwrap();
        let f1 = GridFunction::from_fn(g, |p| (-p.x * p.x).exp()).unwrap();
        let f2 = GridFunction::from_fn(g, |p| 1.0 / (1.0 + p.x * p.x)).unwrap();
        let make = |s1: SymbolRecipe, s2: SymbolRecipe| {
            SymbolVector::new(
                vec![s1.materialize(g).unwrap(), s2.materialize(g).unwrap()],
                vec![1.0, 1.0],
            )
            .unwrap()
        };
        let b = make(
            SymbolRecipe::Linear { slope: 1.0 },
            SymbolRecipe::Constant { value: 0.5 },
        );
        let c = make(
            SymbolRecipe::Linear { slope: -0.3 },
            SymbolRecipe::Log { eps: 1e-2 },
        );
        let b_plus_c = SymbolVector::new(
            (0..2)
                .map(|j| {
                    crate::bmo::BmoSymbol::new(
                        b.symbol(j)
                            .values()
                            .zip_map(c.symbol(j).values(), |x, y| x + y),
                    )
                })
                .collect(),
            vec![1.0, 1.0],
        )
        .unwrap();

        let out_b = commutator(&k, &b, &[&f1, &f2]).unwrap();
        let out_c = commutator(&k, &c, &[&f1, &f2]).unwrap();
        let out_sum = commutator(&k, &b_plus_c, &[&f1, &f2]).unwrap();
        for i in 0..g.num_points() {
            assert!((out_sum.value(i) - out_b.value(i) - out_c.value(i)).abs() < 1e-12);
        }
    }
}
