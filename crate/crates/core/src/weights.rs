//! Growth-weight classes: scalar and multilinear Muckenhoupt-type ball
//! quantities, the combined weight `nu`, and envelope certification.
//!
//! The scalar quantity is the normalized form
//! `(avg_B w)^{1/p} (avg_B w^{-1/(p-1)})^{1/p'}`, so the constant weight
//! scores exactly 1 on every ball; for `p = 1` the dual factor is replaced
//! by the reciprocal of the minimum over the samples of the ball. A weight
//! (or weight vector) is certified in the growth class when the per-ball
//! quantities over a tested family fit under `C (1 + r_B)^theta` and the
//! fitted constant is stable under grid refinement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_growth, GrowthFit};
use crate::grid::{for_each_in_ball, Ball, BallFamily, GridFunction, GridSpec};

/// Strictly positive sampled density.
#[derive(Clone, Debug)]
pub struct Weight(GridFunction<f64>);

impl Weight {
    pub fn new(f: GridFunction<f64>) -> Result<Self> {
        let min = f.values().iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::NonPositiveWeight(min));
        }
        Ok(Weight(f))
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(crate::grid::Point) -> f64) -> Result<Self> {
        Self::new(GridFunction::from_fn(grid, f)?)
    }

    pub fn ones(grid: GridSpec) -> Self {
        Weight(GridFunction::ones(grid))
    }

    pub fn as_grid(&self) -> &GridFunction<f64> {
        &self.0
    }

    pub fn grid(&self) -> &GridSpec {
        self.0.grid()
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.0.value(idx)
    }
}

impl std::ops::Deref for Weight {
    type Target = GridFunction<f64>;
    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

/// Generator family `w(x) = (eps0 + |x - x0|)^a (1 + |x|)^b`.
///
/// With `b = 0` and `-n < a < n (p - 1)` this realizes classical weights;
/// `b > 0` adds polynomial growth that only the `(1 + r)^theta` envelope
/// absorbs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WeightRecipe {
    pub eps0: f64,
    pub x0: [f64; 2],
    pub a: f64,
    pub b: f64,
}

impl WeightRecipe {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.eps0 >= 0.0) || !self.eps0.is_finite() {
            return Err(Error::BadRecipe(format!("eps0 = {}", self.eps0)));
        }
        if !(self.a > -(n as f64)) {
            return Err(Error::BadRecipe(format!(
                "a = {} must exceed -n = {}",
                self.a, -(n as f64)
            )));
        }
        if !(self.b >= 0.0) {
            return Err(Error::BadRecipe(format!("b = {} must be >= 0", self.b)));
        }
        Ok(())
    }

    /// The anchor; its second coordinate is ignored on one-dimensional
    /// grids.
    fn anchor(&self, n: usize) -> crate::grid::Point {
        crate::grid::Point::new2(self.x0[0], if n == 1 { 0.0 } else { self.x0[1] })
    }

    pub fn eval(&self, n: usize, p: crate::grid::Point) -> f64 {
        let anchor = self.anchor(n);
        (self.eps0 + p.dist(&anchor)).powf(self.a) * (1.0 + p.norm()).powf(self.b)
    }

    pub fn materialize(&self, grid: GridSpec) -> Result<Weight> {
        self.validate(grid.dim())?;
        let f = GridFunction::from_fn(grid, |p| self.eval(grid.dim(), p))
            .map_err(|_| Error::BadRecipe("recipe hits a lattice singularity".into()))?;
        Weight::new(f).map_err(|_| Error::BadRecipe("recipe not positive on the lattice".into()))
    }
}

/// Exponent vector `(p_1, ..., p_m)` with the derived exponent
/// `1/p = sum 1/p_j` and the conjugates `p_j'` (infinity when `p_j = 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentVector {
    p: Vec<f64>,
}

impl ExponentVector {
    pub fn new(p: &[f64]) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::ComponentCount {
                expected: 1,
                got: 0,
            });
        }
        for &pj in p {
            if !(pj >= 1.0) || !pj.is_finite() {
                return Err(Error::ExponentBelowOne(pj));
            }
        }
        Ok(ExponentVector { p: p.to_vec() })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn component(&self, j: usize) -> f64 {
        self.p[j]
    }

    pub fn components(&self) -> &[f64] {
        &self.p
    }

    /// The derived exponent `p` with `1/p = sum 1/p_j`.
    pub fn total(&self) -> f64 {
        1.0 / self.p.iter().map(|pj| 1.0 / pj).sum::<f64>()
    }

    /// Conjugate exponent `p_j' = p_j / (p_j - 1)`, infinite when `p_j = 1`.
    pub fn conjugate(&self, j: usize) -> f64 {
        let pj = self.p[j];
        if pj == 1.0 {
            f64::INFINITY
        } else {
            pj / (pj - 1.0)
        }
    }

    /// Componentwise scaling `(r p_1, ..., r p_m)`, `r > 0`.
    pub fn scaled(&self, r: f64) -> Result<ExponentVector> {
        ExponentVector::new(&self.p.iter().map(|pj| pj * r).collect::<Vec<_>>())
    }
}

/// Weight vector paired with its exponents; all components share one grid.
#[derive(Clone, Debug)]
pub struct WeightVector {
    weights: Vec<Weight>,
    exponents: ExponentVector,
}

impl WeightVector {
    pub fn new(weights: Vec<Weight>, exponents: ExponentVector) -> Result<Self> {
        if weights.len() != exponents.len() {
            return Err(Error::ComponentCount {
                expected: exponents.len(),
                got: weights.len(),
            });
        }
        let grid = *weights[0].grid();
        if weights.iter().any(|w| *w.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(WeightVector { weights, exponents })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, j: usize) -> &Weight {
        &self.weights[j]
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn exponents(&self) -> &ExponentVector {
        &self.exponents
    }

    pub fn grid(&self) -> &GridSpec {
        self.weights[0].grid()
    }

    /// The combined weight `nu = prod w_j^{p/p_j}` that measures the
    /// operator output.
    pub fn product_weight(&self) -> Weight {
        let p = self.exponents.total();
        let grid = *self.grid();
        let mut values = vec![1.0f64; grid.num_points()];
        for (j, w) in self.weights.iter().enumerate() {
            let e = p / self.exponents.component(j);
            for (v, &wv) in values.iter_mut().zip(w.values()) {
                *v *= wv.powf(e);
            }
        }
        Weight(GridFunction::new(grid, values).expect("finite product weight"))
    }
}

fn ball_stats(w: &GridFunction<f64>, ball: &Ball, power: f64) -> Result<(f64, f64, usize)> {
    let mut sum = 0.0f64;
    let mut min = f64::INFINITY;
    let mut count = 0usize;
    for_each_in_ball(w.grid(), ball, |idx, _| {
        let v = w.value(idx);
        sum += if power == 1.0 { v } else { v.powf(power) };
        min = min.min(v);
        count += 1;
    });
    if count == 0 {
        return Err(Error::BallMissesGrid);
    }
    Ok((sum / count as f64, min, count))
}

/// Scalar ball quantity of the growth class at exponent `p >= 1`.
///
/// Overflow of the negative-power average is reported as `+inf`; the caller's
/// envelope fit then rejects the certificate as divergent.
pub fn ap_quantity(w: &Weight, p: f64, ball: &Ball) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::ExponentBelowOne(p));
    }
    if p == 1.0 {
        let (avg, min, _) = ball_stats(w.as_grid(), ball, 1.0)?;
        return Ok(avg / min);
    }
    let (avg, _, _) = ball_stats(w.as_grid(), ball, 1.0)?;
    let (avg_dual, _, _) = ball_stats(w.as_grid(), ball, -1.0 / (p - 1.0))?;
    let pc = p / (p - 1.0);
    Ok(avg.powf(1.0 / p) * avg_dual.powf(1.0 / pc))
}

/// Multilinear ball quantity: `(avg_B nu)^{1/p} prod_j (avg_B
/// w_j^{1-p_j'})^{1/p_j'}`, the `p_j = 1` factor read as `(min_B w_j)^{-1}`.
pub fn multi_ap_quantity(wv: &WeightVector, ball: &Ball) -> Result<f64> {
    let nu = wv.product_weight();
    let (avg_nu, _, _) = ball_stats(nu.as_grid(), ball, 1.0)?;
    let p = wv.exponents().total();
    let mut q = avg_nu.powf(1.0 / p);
    for j in 0..wv.len() {
        let pj = wv.exponents().component(j);
        if pj == 1.0 {
            let (_, min, _) = ball_stats(wv.weight(j).as_grid(), ball, 1.0)?;
            q *= 1.0 / min;
        } else {
            let pjc = wv.exponents().conjugate(j);
            let (avg_dual, _, _) = ball_stats(wv.weight(j).as_grid(), ball, 1.0 - pjc)?;
            q *= avg_dual.powf(1.0 / pjc);
        }
    }
    Ok(q)
}

/// Outcome of an envelope certification over a ball family.
#[derive(Clone, Debug)]
pub struct Certificate {
    /// Envelope fit over the tested family; `None` when some per-ball
    /// quantity diverged.
    pub fit: Option<GrowthFit>,
    pub argmax_ball: Option<Ball>,
    /// `fine C / base C` when a refined evaluation was supplied.
    pub refinement_ratio: Option<f64>,
    /// Finite fit and, when refinement was run, constant growth within 10%.
    pub in_class: bool,
}

impl Certificate {
    fn divergent() -> Self {
        Certificate {
            fit: None,
            argmax_ball: None,
            refinement_ratio: None,
            in_class: false,
        }
    }
}

/// Allowed growth of the fitted constant under grid refinement before a
/// certificate is declared divergent.
const REFINEMENT_TOLERANCE: f64 = 1.1;

fn certify_samples(samples: &[(f64, f64)], family: &BallFamily) -> Certificate {
    match fit_growth(samples) {
        Ok(fit) => Certificate {
            argmax_ball: Some(family.balls[fit.argmax]),
            fit: Some(fit),
            refinement_ratio: None,
            in_class: true,
        },
        Err(_) => Certificate::divergent(),
    }
}

fn family_samples(
    family: &BallFamily,
    mut quantity: impl FnMut(&Ball) -> Result<f64>,
) -> Result<Vec<(f64, f64)>> {
    family
        .balls
        .iter()
        .map(|b| Ok((b.radius, quantity(b)?)))
        .collect()
}

/// Certify a scalar weight over the family.
pub fn certify_weight(w: &Weight, p: f64, family: &BallFamily) -> Result<Certificate> {
    let samples = family_samples(family, |b| ap_quantity(w, p, b))?;
    Ok(certify_samples(&samples, family))
}

/// Certify a scalar weight with a grid-refined re-evaluation: the constant
/// must not grow by more than 10% when the weight is resampled at double
/// resolution, otherwise the quantity is divergent in the continuum limit.
pub fn certify_weight_refined(
    base: (&Weight, &BallFamily),
    fine: (&Weight, &BallFamily),
    p: f64,
) -> Result<Certificate> {
    let mut cert = certify_weight(base.0, p, base.1)?;
    let fine_cert = certify_weight(fine.0, p, fine.1)?;
    apply_refinement(&mut cert, &fine_cert);
    Ok(cert)
}

/// Certify a weight vector over the family.
pub fn certify_vector(wv: &WeightVector, family: &BallFamily) -> Result<Certificate> {
    let samples = family_samples(family, |b| multi_ap_quantity(wv, b))?;
    Ok(certify_samples(&samples, family))
}

/// Grid-refined version of [`certify_vector`].
pub fn certify_vector_refined(
    base: (&WeightVector, &BallFamily),
    fine: (&WeightVector, &BallFamily),
) -> Result<Certificate> {
    let mut cert = certify_vector(base.0, base.1)?;
    let fine_cert = certify_vector(fine.0, fine.1)?;
    apply_refinement(&mut cert, &fine_cert);
    Ok(cert)
}

fn apply_refinement(cert: &mut Certificate, fine: &Certificate) {
    match (&cert.fit, &fine.fit) {
        (Some(base_fit), Some(fine_fit)) if base_fit.c > 0.0 => {
            let ratio = fine_fit.c / base_fit.c;
            cert.refinement_ratio = Some(ratio);
            cert.in_class = ratio <= REFINEMENT_TOLERANCE;
        }
        (Some(_), Some(_)) => {
            cert.refinement_ratio = Some(1.0);
        }
        _ => {
            cert.fit = None;
            cert.argmax_ball = None;
            cert.in_class = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Point;
    use approx::assert_relative_eq;

    fn grid1(l: f64, g: usize) -> GridSpec {
        GridSpec::new(1, l, g).unwrap()
    }

    fn centered_ball(r: f64) -> Ball {
        Ball::new(Point::new1(0.0), r).unwrap()
    }

    #[test]
    fn constant_weight_scores_one() {
        let g = grid1(8.0, 256);
        let w = Weight::ones(g);
        for p in [1.0, 1.5, 2.0, 4.0] {
            for r in [0.5, 1.0, 4.0] {
                let q = ap_quantity(&w, p, &centered_ball(r)).unwrap();
                assert!((q - 1.0).abs() < 1e-12, "p={p} r={r} q={q}");
            }
        }
    }

    #[test]
    fn sqrt_weight_closed_form() {
        // avg |x|^{1/2} = 2/3 and avg |x|^{-1/2} = 2 over B(0,1)
        let g = grid1(2.0, 2048);
        let w = Weight::from_fn(g, |p| p.x.abs().sqrt()).unwrap();
        let q = ap_quantity(&w, 2.0, &centered_ball(1.0)).unwrap();
        assert!((q - (4.0f64 / 3.0).sqrt()).abs() < 1e-2, "q = {q}");
    }

    #[test]
    fn p_one_uses_ball_minimum() {
        let g = grid1(8.0, 2048);
        let w = Weight::from_fn(g, |p| 1.0 + p.x.abs()).unwrap();
        let q = ap_quantity(&w, 1.0, &centered_ball(2.0)).unwrap();
        assert!((q - 2.0).abs() < 1e-2, "q = {q}");
    }

    #[test]
    fn product_weight_exponent_algebra() {
        let g = grid1(8.0, 64);
        let w1 = Weight::from_fn(g, |p| 1.0 + p.x.abs()).unwrap();
        let w2 = Weight::from_fn(g, |p| (2.0 + p.x).abs().max(0.1) + 1.0).unwrap();

        let ones = WeightVector::new(
            vec![Weight::ones(g), Weight::ones(g)],
            ExponentVector::new(&[2.0, 2.0]).unwrap(),
        )
        .unwrap();
        assert!(ones
            .product_weight()
            .values()
            .iter()
            .all(|&v| (v - 1.0).abs() < 1e-15));

        // p1 = p2 = 2 gives p = 1 and nu = sqrt(w1 w2)
        let wv = WeightVector::new(
            vec![w1.clone(), w2.clone()],
            ExponentVector::new(&[2.0, 2.0]).unwrap(),
        )
        .unwrap();
        let nu = wv.product_weight();
        for i in (0..g.num_points()).step_by(7) {
            assert_relative_eq!(
                nu.value(i),
                (w1.value(i) * w2.value(i)).sqrt(),
                max_relative = 1e-12
            );
        }

        // p1 = 2, p2 = 4 gives p = 4/3 and nu = w1^{2/3} w2^{1/3}
        let wv = WeightVector::new(vec![w1.clone(), w2.clone()], ExponentVector::new(&[2.0, 4.0]).unwrap())
            .unwrap();
        assert_relative_eq!(wv.exponents().total(), 4.0 / 3.0, max_relative = 1e-14);
        let nu = wv.product_weight();
        for i in (0..g.num_points()).step_by(11) {
            assert_relative_eq!(
                nu.value(i),
                w1.value(i).powf(2.0 / 3.0) * w2.value(i).powf(1.0 / 3.0),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn multi_quantity_closed_form() {
        // both weights |x|^{1/2} at p = (2,2) on B(0,1): (2/3) * 2 = 4/3
        let g = grid1(2.0, 4096);
        let w = Weight::from_fn(g, |p| p.x.abs().sqrt()).unwrap();
        let wv = WeightVector::new(
            vec![w.clone(), w],
            ExponentVector::new(&[2.0, 2.0]).unwrap(),
        )
        .unwrap();
        let q = multi_ap_quantity(&wv, &centered_ball(1.0)).unwrap();
        assert!((q - 4.0 / 3.0).abs() < 2e-2, "q = {q}");
    }

    #[test]
    fn multi_quantity_unit_weights() {
        let g = grid1(8.0, 128);
        let wv = WeightVector::new(
            vec![Weight::ones(g), Weight::ones(g)],
            ExponentVector::new(&[1.5, 3.0]).unwrap(),
        )
        .unwrap();
        let q = multi_ap_quantity(&wv, &centered_ball(2.0)).unwrap();
        assert!((q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jensen_floor_scalar() {
        let g = grid1(8.0, 512);
        let recipes = [
            WeightRecipe { eps0: 0.5, x0: [1.0, 0.0], a: 0.4, b: 0.0 },
            WeightRecipe { eps0: 0.0, x0: [0.0, 0.0], a: -0.5, b: 1.0 },
            WeightRecipe { eps0: 1.0, x0: [-2.0, 0.0], a: 2.0, b: 0.5 },
        ];
        for rec in &recipes {
            let w = rec.materialize(g).unwrap();
            for p in [1.5, 2.0, 3.0] {
                for (c, r) in [(0.0, 1.0), (3.0, 2.0), (-5.0, 0.5)] {
                    let ball = Ball::new(Point::new1(c), r).unwrap();
                    let q = ap_quantity(&w, p, &ball).unwrap();
                    assert!(q >= 1.0 - 1e-6, "q = {q}");
                }
            }
        }
    }

    #[test]
    fn certify_constant_weight() {
        let g = grid1(8.0, 256);
        let fam = BallFamily::new(&g, &[0.5, 1.0, 2.0, 4.0], 64).unwrap();
        let cert = certify_weight(&Weight::ones(g), 2.0, &fam).unwrap();
        let fit = cert.fit.unwrap();
        assert!((fit.c - 1.0).abs() < 1e-9);
        assert_eq!(fit.theta, 0.0);
        assert!(cert.in_class);
    }

    #[test]
    fn certify_growth_weight_envelope() {
        // (1+|x|)^2 at p = 2 has true envelope exponent 1/2
        let g = grid1(8.0, 2048);
        let w = Weight::from_fn(g, |p| (1.0 + p.x.abs()).powi(2)).unwrap();
        let fam = BallFamily::new(&g, &[1.0, 2.0, 4.0, 8.0], 2048).unwrap();
        let cert = certify_weight(&w, 2.0, &fam).unwrap();
        let fit = cert.fit.unwrap();
        assert!(fit.theta > 0.3 && fit.theta < 0.7, "theta = {}", fit.theta);
    }

    #[test]
    fn certify_flags_divergent_weight() {
        // |x|^{-1} violates local integrability; on small origin-centered
        // balls the average grows without bound as the lattice refines.
        let base = grid1(8.0, 1024);
        let fine = base.refine();
        let make = |g: GridSpec| Weight::from_fn(g, |p| 1.0 / p.x.abs()).unwrap();
        let radii = [1.0 / 64.0, 1.0 / 16.0];
        let origin_family = || BallFamily {
            balls: radii.iter().map(|&r| centered_ball(r)).collect(),
            provenance: crate::grid::FamilyProvenance {
                stride: 0,
                radii: radii.to_vec(),
            },
        };
        let cert = certify_weight_refined(
            (&make(base), &origin_family()),
            (&make(fine), &origin_family()),
            2.0,
        )
        .unwrap();
        assert!(!cert.in_class, "ratio = {:?}", cert.refinement_ratio);
    }

    #[test]
    fn vector_class_open_under_exponent_shrinking() {
        // generator recipes with every exponent above one stay certifiable
        // after dividing the exponents by 1.05
        let g = grid1(8.0, 512);
        let fam = BallFamily::new(&g, &[0.5, 1.0, 2.0, 4.0], 64).unwrap();
        let w1 = WeightRecipe { eps0: 0.6, x0: [1.0, 0.0], a: 0.4, b: 0.5 }
            .materialize(g)
            .unwrap();
        let w2 = WeightRecipe { eps0: 1.0, x0: [-2.0, 0.0], a: -0.3, b: 1.0 }
            .materialize(g)
            .unwrap();
        let exps = ExponentVector::new(&[1.6, 2.4]).unwrap();
        let base = certify_vector(
            &WeightVector::new(vec![w1.clone(), w2.clone()], exps.clone()).unwrap(),
            &fam,
        )
        .unwrap();
        assert!(base.fit.is_some());
        let shrunk = certify_vector(
            &WeightVector::new(vec![w1, w2], exps.scaled(1.0 / 1.05).unwrap()).unwrap(),
            &fam,
        )
        .unwrap();
        assert!(shrunk.fit.is_some());
    }

    #[test]
    fn recipe_validation() {
        assert!(WeightRecipe { eps0: 0.5, x0: [0.0, 0.0], a: -1.5, b: 0.0 }
            .validate(1)
            .is_err());
        assert!(WeightRecipe { eps0: 0.5, x0: [0.0, 0.0], a: 0.5, b: -1.0 }
            .validate(1)
            .is_err());
        let rec = WeightRecipe { eps0: 0.0, x0: [0.0, 0.0], a: -0.5, b: 2.0 };
        assert!(rec.validate(1).is_ok());
        // midpoint lattice avoids the singular anchor
        assert!(rec.materialize(grid1(8.0, 64)).is_ok());
    }

    #[test]
    fn recipe_roundtrips_as_json() {
        let rec = WeightRecipe { eps0: 0.25, x0: [1.0, -2.0], a: 0.75, b: 1.5 };
        let text = serde_json::to_string(&rec).unwrap();
        let back: WeightRecipe = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rec);
    }
}
