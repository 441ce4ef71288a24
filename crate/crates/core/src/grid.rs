//! Discretization substrate: uniform box lattices with midpoint sampling,
//! quadrature, ball geometry and weighted Lebesgue norms.
//!
//! The box is `[-L, L]^n` sampled at cell midpoints `x_i = -L + (i + 1/2) h`,
//! `h = 2L/G`, so no sample ever sits at the origin and power weights stay
//! finite on the lattice. Balls are clipped to the box and clipped counting
//! measure stands in for `|B|` throughout.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalar sample types carried by a [`GridFunction`]: real (`f64`) or
/// complex (`Complex64`).
pub trait Scalar:
    Copy
    + PartialEq
    + std::fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
    + 'static
{
    const ZERO: Self;
    fn modulus(self) -> f64;
    fn scale(self, k: f64) -> Self;
    fn is_finite_val(self) -> bool;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn is_finite_val(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn is_finite_val(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// A point of the box. For one-dimensional grids `y` is always zero, so
/// Euclidean distance works uniformly in both dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new1(x: f64) -> Self {
        Point { x, y: 0.0 }
    }

    pub fn new2(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }
}

/// Uniform lattice on the box `[-L, L]^n` with midpoint sampling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    n: usize,
    l: f64,
    g: usize,
    h: f64,
}

impl GridSpec {
    /// Build a grid; `g` must be a power of two `>= 16` and `n` one of 1, 2.
    pub fn new(n: usize, l: f64, g: usize) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::GridDimension(n));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::GridHalfWidth(l));
        }
        if g < 16 || !g.is_power_of_two() {
            return Err(Error::GridResolution(g));
        }
        Ok(GridSpec {
            n,
            l,
            g,
            h: 2.0 * l / g as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.l
    }

    pub fn points_per_axis(&self) -> usize {
        self.g
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn num_points(&self) -> usize {
        self.g.pow(self.n as u32)
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.n as i32)
    }

    /// Diameter of the box, `2L sqrt(n)`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.l * (self.n as f64).sqrt()
    }

    /// Midpoint coordinate of axis index `i`.
    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.l + (i as f64 + 0.5) * self.h
    }

    /// Sample point for a flat index (row-major for `n = 2`).
    pub fn point(&self, idx: usize) -> Point {
        match self.n {
            1 => Point::new1(self.axis_coord(idx)),
            _ => Point::new2(self.axis_coord(idx / self.g), self.axis_coord(idx % self.g)),
        }
    }

    /// Same grid at doubled resolution.
    pub fn refine(&self) -> GridSpec {
        GridSpec {
            n: self.n,
            l: self.l,
            g: self.g * 2,
            h: self.h / 2.0,
        }
    }

    /// Inclusive axis-index window covering `[c - r, c + r]`, clamped to the
    /// box; `None` when the interval misses the box entirely.
    fn axis_window(&self, c: f64, r: f64) -> Option<(usize, usize)> {
        let lo = ((c - r + self.l) / self.h - 0.5).ceil();
        let hi = ((c + r + self.l) / self.h - 0.5).floor();
        let lo = lo.max(0.0);
        let hi = hi.min((self.g - 1) as f64);
        if lo > hi {
            None
        } else {
            Some((lo as usize, hi as usize))
        }
    }
}

/// Ball `B(c, r)` (closed). Dilation keeps the center and scales the radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::BallRadius(radius));
        }
        Ok(Ball { center, radius })
    }

    pub fn dilate(&self, lambda: f64) -> Ball {
        Ball {
            center: self.center,
            radius: self.radius * lambda,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.center.dist(p) <= self.radius
    }
}

/// Visit all lattice indices whose sample lies in the ball, in ascending
/// index order (the fixed reduction order used everywhere).
pub fn for_each_in_ball<F: FnMut(usize, Point)>(grid: &GridSpec, ball: &Ball, mut f: F) {
    match grid.dim() {
        1 => {
            if let Some((lo, hi)) = grid.axis_window(ball.center.x, ball.radius) {
                for i in lo..=hi {
                    let p = Point::new1(grid.axis_coord(i));
                    if ball.contains(&p) {
                        f(i, p);
                    }
                }
            }
        }
        _ => {
            let wx = grid.axis_window(ball.center.x, ball.radius);
            let wy = grid.axis_window(ball.center.y, ball.radius);
            if let (Some((lx, hx)), Some((ly, hy))) = (wx, wy) {
                let g = grid.points_per_axis();
                for i0 in lx..=hx {
                    let x = grid.axis_coord(i0);
                    for i1 in ly..=hy {
                        let p = Point::new2(x, grid.axis_coord(i1));
                        if ball.contains(&p) {
                            f(i0 * g + i1, p);
                        }
                    }
                }
            }
        }
    }
}

/// Sorted index set of samples inside the ball (clipped to the box).
pub fn ball_mask(grid: &GridSpec, ball: &Ball) -> Vec<usize> {
    let mut mask = Vec::new();
    for_each_in_ball(grid, ball, |idx, _| mask.push(idx));
    mask
}

/// Index set of samples in the dyadic annulus `S_j(B)`: the ball itself for
/// `j = 0`, and `2^j B \ 2^{j-1} B` for `j >= 1`.
pub fn annulus_mask(grid: &GridSpec, ball: &Ball, j: u32) -> Vec<usize> {
    if j == 0 {
        return ball_mask(grid, ball);
    }
    let outer = ball.dilate(2f64.powi(j as i32));
    let inner_r = ball.radius * 2f64.powi(j as i32 - 1);
    let mut mask = Vec::new();
    for_each_in_ball(grid, &outer, |idx, p| {
        if ball.center.dist(&p) > inner_r {
            mask.push(idx);
        }
    });
    mask
}

/// Sampled scalar field on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T: Scalar = f64> {
    grid: GridSpec,
    values: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    /// Wrap raw values; checks the count and that every value is finite.
    pub fn new(grid: GridSpec, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.num_points() {
            return Err(Error::ValueCount {
                expected: grid.num_points(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite_val()) {
            return Err(Error::NonFiniteValue(i));
        }
        Ok(GridFunction { grid, values })
    }

    /// Sample a function of the lattice point.
    pub fn from_fn(grid: GridSpec, f: impl Fn(Point) -> T) -> Result<Self> {
        let values = (0..grid.num_points()).map(|i| f(grid.point(i))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: GridSpec) -> Self {
        GridFunction {
            grid,
            values: vec![T::ZERO; grid.num_points()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn value(&self, idx: usize) -> T {
        self.values[idx]
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> GridFunction<U> {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise `|f|` as a real grid.
    pub fn modulus(&self) -> GridFunction<f64> {
        self.map(|v| v.modulus())
    }

    pub fn zip_map(&self, other: &GridFunction<T>, f: impl Fn(T, T) -> T) -> GridFunction<T> {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl GridFunction<f64> {
    pub fn ones(grid: GridSpec) -> Self {
        GridFunction {
            grid,
            values: vec![1.0; grid.num_points()],
        }
    }
}

/// Midpoint quadrature `sum f(x_i) h^n` over the mask (whole box when the
/// mask is absent), accumulated in ascending index order.
pub fn integrate<T: Scalar>(f: &GridFunction<T>, mask: Option<&[usize]>) -> Result<T> {
    let vol = f.grid().cell_volume();
    let mut acc = T::ZERO;
    match mask {
        None => {
            for &v in f.values() {
                acc = acc + v;
            }
        }
        Some(idx) => {
            let n = f.values().len();
            for &i in idx {
                if i >= n {
                    return Err(Error::BadMaskIndex(i));
                }
                acc = acc + f.value(i);
            }
        }
    }
    Ok(acc.scale(vol))
}

/// Mean of `f` over the samples of `B` clipped to the box.
pub fn ball_average<T: Scalar>(f: &GridFunction<T>, ball: &Ball) -> Result<T> {
    let mut acc = T::ZERO;
    let mut count = 0usize;
    for_each_in_ball(f.grid(), ball, |idx, _| {
        acc = acc + f.value(idx);
        count += 1;
    });
    if count == 0 {
        return Err(Error::BallMissesGrid);
    }
    Ok(acc.scale(1.0 / count as f64))
}

/// Weighted Lebesgue (quasi-)norm `(int |f|^p w)^{1/p}`, `p > 0`.
pub fn lp_norm<T: Scalar>(f: &GridFunction<T>, p: f64, w: &GridFunction<f64>) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::NonPositiveExponent(p));
    }
    assert_eq!(f.grid(), w.grid(), "grid mismatch");
    let vol = f.grid().cell_volume();
    let mut acc = 0.0;
    for (v, &wv) in f.values().iter().zip(w.values()) {
        acc += v.modulus().powf(p) * wv;
    }
    Ok((acc * vol).powf(1.0 / p))
}

/// Weak Lebesgue quasi-norm `sup_t t * w({|f| > t})^{1/p}`.
///
/// The discrete distribution function is a right-continuous step function,
/// so the sup is attained along `t = v (1 - 1e-9)` with `v` ranging over the
/// distinct values of `|f|`.
pub fn weak_lp_norm<T: Scalar>(f: &GridFunction<T>, p: f64, w: &GridFunction<f64>) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::NonPositiveExponent(p));
    }
    assert_eq!(f.grid(), w.grid(), "grid mismatch");
    let vol = f.grid().cell_volume();
    let mut pairs: Vec<(f64, f64)> = f
        .values()
        .iter()
        .zip(w.values())
        .map(|(v, &wv)| (v.modulus(), wv * vol))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let mut best = 0.0f64;
    let mut cum = 0.0f64;
    let mut i = 0usize;
    while i < pairs.len() {
        let v = pairs[i].0;
        // accumulate the whole group of equal values so that {|f| >= v} is
        // fully counted before testing the level just below v
        while i < pairs.len() && pairs[i].0 == v {
            cum += pairs[i].1;
            i += 1;
        }
        if v > 0.0 {
            let lambda = v * (1.0 - 1e-9);
            best = best.max(lambda * cum.powf(1.0 / p));
        }
    }
    Ok(best)
}

/// How a ball family was generated: every `stride`-th lattice point as a
/// center, one ball per (center, radius).
#[derive(Clone, Debug)]
pub struct FamilyProvenance {
    pub stride: usize,
    pub radii: Vec<f64>,
}

/// Finite stand-in for "for all balls": the discrete sup over balls is taken
/// over this family, and every certificate is reported relative to it.
#[derive(Clone, Debug)]
pub struct BallFamily {
    pub balls: Vec<Ball>,
    pub provenance: FamilyProvenance,
}

impl BallFamily {
    /// Centers at every `stride`-th lattice point per axis, one ball per
    /// (center, radius). `radii` must be positive and sorted; `stride` must
    /// divide the points per axis.
    pub fn new(grid: &GridSpec, radii: &[f64], stride: usize) -> Result<Self> {
        if radii.is_empty()
            || radii.iter().any(|r| !(*r > 0.0) || !r.is_finite())
            || radii.windows(2).any(|w| w[0] > w[1])
        {
            return Err(Error::BadRadii);
        }
        let g = grid.points_per_axis();
        if stride == 0 || g % stride != 0 {
            return Err(Error::BadStride { stride, g });
        }
        let axis_centers: Vec<f64> = (0..g / stride).map(|j| grid.axis_coord(j * stride)).collect();
        let mut balls = Vec::new();
        match grid.dim() {
            1 => {
                for &c in &axis_centers {
                    for &r in radii {
                        balls.push(Ball::new(Point::new1(c), r)?);
                    }
                }
            }
            _ => {
                for &cx in &axis_centers {
                    for &cy in &axis_centers {
                        for &r in radii {
                            balls.push(Ball::new(Point::new2(cx, cy), r)?);
                        }
                    }
                }
            }
        }
        Ok(BallFamily {
            balls,
            provenance: FamilyProvenance {
                stride,
                radii: radii.to_vec(),
            },
        })
    }

    /// Default dyadic radius set `{h 2^j}` up to the box diameter.
    pub fn dyadic_radii(grid: &GridSpec) -> Vec<f64> {
        let mut radii = Vec::new();
        let mut r = grid.spacing();
        while r <= grid.diameter() {
            radii.push(r);
            r *= 2.0;
        }
        radii
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    /// Balls of radius at most `alpha`.
    pub fn capped(&self, alpha: f64) -> impl Iterator<Item = &Ball> {
        self.balls.iter().filter(move |b| b.radius <= alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid1(l: f64, g: usize) -> GridSpec {
        GridSpec::new(1, l, g).unwrap()
    }

    #[test]
    fn make_grid_spacing_and_first_coordinate() {
        let g = grid1(8.0, 256);
        assert_eq!(g.spacing(), 1.0 / 16.0);
        assert_eq!(g.axis_coord(0), -8.0 + 1.0 / 32.0);
    }

    #[test]
    fn make_grid_2d_point_count() {
        let g = GridSpec::new(2, 4.0, 64).unwrap();
        assert_eq!(g.num_points(), 4096);
    }

    #[test]
    fn make_grid_rejects_bad_inputs() {
        assert!(matches!(
            GridSpec::new(1, 8.0, 100),
            Err(Error::GridResolution(100))
        ));
        assert!(matches!(GridSpec::new(3, 8.0, 64), Err(Error::GridDimension(3))));
        assert!(matches!(GridSpec::new(1, 8.0, 8), Err(Error::GridResolution(8))));
        assert!(matches!(
            GridSpec::new(1, -1.0, 64),
            Err(Error::GridHalfWidth(_))
        ));
    }

    #[test]
    fn integrate_constant_and_odd() {
        let g = grid1(1.0, 64);
        let one = GridFunction::ones(g);
        assert_relative_eq!(integrate(&one, None).unwrap(), 2.0, epsilon = 1e-14);

        let odd = GridFunction::from_fn(g, |p| p.x).unwrap();
        assert!(integrate(&odd, None).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn integrate_gaussian_matches_closed_form() {
        let g = grid1(8.0, 1024);
        let f = GridFunction::from_fn(g, |p| (-p.x * p.x).exp()).unwrap();
        let v = integrate(&f, None).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn ball_average_examples() {
        let g = grid1(8.0, 1024);
        let ball = Ball::new(Point::new1(0.0), 1.0).unwrap();

        let c = GridFunction::from_fn(g, |_| 3.25).unwrap();
        assert_relative_eq!(ball_average(&c, &ball).unwrap(), 3.25, epsilon = 1e-13);

        let lin = GridFunction::from_fn(g, |p| p.x).unwrap();
        assert!(ball_average(&lin, &ball).unwrap().abs() < 1e-12);

        let sq = GridFunction::from_fn(g, |p| p.x * p.x).unwrap();
        assert!((ball_average(&sq, &ball).unwrap() - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn ball_average_rejects_missing_ball() {
        let g = grid1(8.0, 256);
        // centered beyond the box corner sample, radius too small to reach it
        let ball = Ball::new(Point::new1(9.5), 0.5).unwrap();
        assert!(matches!(
            ball_average(&GridFunction::ones(g), &ball),
            Err(Error::BallMissesGrid)
        ));
    }

    #[test]
    fn lp_norm_examples() {
        let g = grid1(8.0, 256);
        let one = GridFunction::ones(g);
        assert_relative_eq!(lp_norm(&one, 2.0, &one).unwrap(), 4.0, epsilon = 1e-12);

        // quasi-norm with indicator data: (int_{[0,1]} 2)^{1/(1/2)} = 4
        let chi = GridFunction::from_fn(g, |p| if p.x >= 0.0 && p.x <= 1.0 { 1.0 } else { 0.0 })
            .unwrap();
        let w2 = GridFunction::from_fn(g, |_| 2.0).unwrap();
        assert_relative_eq!(lp_norm(&chi, 0.5, &w2).unwrap(), 4.0, epsilon = 1e-10);

        assert!(lp_norm(&one, 0.0, &one).is_err());
    }

    #[test]
    fn lp_norm_homogeneous() {
        let g = grid1(8.0, 256);
        let f = GridFunction::from_fn(g, |p| (p.x * 1.3).sin() + 0.2).unwrap();
        let w = GridFunction::from_fn(g, |p| 1.0 + p.x.abs()).unwrap();
        let scaled = f.map(|v| -3.0 * v);
        for p in [0.5, 1.0, 2.0, 3.5] {
            assert_relative_eq!(
                lp_norm(&scaled, p, &w).unwrap(),
                3.0 * lp_norm(&f, p, &w).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn weak_lp_norm_examples() {
        let g = grid1(8.0, 256);
        let one = GridFunction::ones(g);
        let chi = GridFunction::from_fn(g, |p| if p.x.abs() <= 1.5 { 1.0 } else { 0.0 }).unwrap();
        let measure = 3.0f64;
        for p in [0.5, 1.0, 2.0] {
            let got = weak_lp_norm(&chi, p, &one).unwrap();
            assert_relative_eq!(got, measure.powf(1.0 / p), max_relative = 1e-8);
        }

        let zero = GridFunction::<f64>::zeros(g);
        assert_eq!(weak_lp_norm(&zero, 1.0, &one).unwrap(), 0.0);
    }

    #[test]
    fn weak_norm_dominated_by_strong_norm() {
        let g = grid1(8.0, 512);
        let f = GridFunction::from_fn(g, |p| (-p.x * p.x / 2.0).exp()).unwrap();
        let w = GridFunction::from_fn(g, |p| 0.5 + (p.x * 0.7).cos().abs()).unwrap();
        for p in [0.5, 1.0, 1.7, 3.0] {
            assert!(weak_lp_norm(&f, p, &w).unwrap() <= lp_norm(&f, p, &w).unwrap() + 1e-13);
        }
    }

    #[test]
    fn ball_family_counts() {
        let g = grid1(8.0, 256);
        let fam = BallFamily::new(&g, &[1.0, 2.0], 64).unwrap();
        assert_eq!(fam.len(), 8);

        let single = BallFamily::new(&g, &[1.0], 256).unwrap();
        assert_eq!(single.len(), 1);

        assert!(matches!(BallFamily::new(&g, &[], 64), Err(Error::BadRadii)));
        assert!(matches!(
            BallFamily::new(&g, &[1.0], 3),
            Err(Error::BadStride { .. })
        ));
    }

    #[test]
    fn annulus_masks() {
        let g = grid1(8.0, 256);
        let ball = Ball::new(Point::new1(0.0), 1.0).unwrap();

        assert_eq!(annulus_mask(&g, &ball, 0), ball_mask(&g, &ball));

        let s1 = annulus_mask(&g, &ball, 1);
        let s2 = annulus_mask(&g, &ball, 2);
        assert!(s1.iter().all(|i| !s2.contains(i)));

        let measure = s1.len() as f64 * g.cell_volume();
        assert!((measure - 2.0).abs() <= 2.0 * g.spacing());
    }

    #[test]
    fn integrate_refinement_second_order() {
        // midpoint quadrature error of a smooth bounded function drops by
        // about a factor of four per grid doubling
        let f = |x: f64| (-x * x / 3.0).exp() * x.cos();
        let eval = |g: usize| {
            let grid = GridSpec::new(1, 8.0, g).unwrap();
            integrate(&GridFunction::from_fn(grid, |p| f(p.x)).unwrap(), None).unwrap()
        };
        let reference = eval(4096);
        let e1 = (eval(128) - reference).abs();
        let e2 = (eval(256) - reference).abs();
        let ratio = e1 / e2;
        assert!((2.5..6.0).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn ball_average_2d_closed_form() {
        // avg of x^2 + y^2 over the unit disk = 1/2
        let g = GridSpec::new(2, 2.0, 256).unwrap();
        let f = GridFunction::from_fn(g, |p| p.x * p.x + p.y * p.y).unwrap();
        let ball = Ball::new(Point::new2(0.0, 0.0), 1.0).unwrap();
        let avg = ball_average(&f, &ball).unwrap();
        assert!((avg - 0.5).abs() < 2e-2, "avg = {avg}");
    }

    #[test]
    fn ball_average_within_range() {
        let g = grid1(8.0, 256);
        let f = GridFunction::from_fn(g, |p| (p.x * 2.1).sin() * (0.3 * p.x).cos()).unwrap();
        for (c, r) in [(0.0, 1.0), (2.5, 0.5), (-4.0, 3.0)] {
            let ball = Ball::new(Point::new1(c), r).unwrap();
            let avg = ball_average(&f, &ball).unwrap();
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for_each_in_ball(&g, &ball, |i, _| {
                lo = lo.min(f.value(i));
                hi = hi.max(f.value(i));
            });
            assert!(avg >= lo - 1e-14 && avg <= hi + 1e-14);
        }
    }
}
