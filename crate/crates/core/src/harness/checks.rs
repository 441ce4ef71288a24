//! The bounded-ratio checks: every norm inequality becomes
//! `max over instances of LHS / RHS`, evaluated at the base resolution and
//! at double resolution; a check passes when the ratio is finite and its
//! refinement factor stays within the stability window.

use crate::bmo::{BmoSymbol, SymbolVector};
use crate::czkernel::{self, KernelSpec};
use crate::error::{Error, Result};
use crate::fit::envelope_constant;
use crate::grid::{
    ball_average, ball_mask, lp_norm, weak_lp_norm, Ball, BallFamily, GridFunction, GridSpec,
};
use crate::harness::config::{BallFamilyConfig, CampaignConfig, CheckKind, OperatorConfig};
use crate::harness::testfn::{generate_family, TestFunction};
use crate::maximal::{
    critical_cover, critical_maximal, local_maximal, local_product_maximal, local_scalar_maximal,
    local_sharp_maximal, CriticalCover, MaximalParams,
};
use crate::pseudo::{self, SymbolSpec};
use crate::weights::{
    certify_vector_refined, certify_weight_refined, ExponentVector, Weight, WeightVector,
};

/// Operator under test, materialized for a fixed arity and dimension.
pub enum Operator {
    Kernel(KernelSpec),
    Symbol(SymbolSpec),
}

impl Operator {
    pub fn from_config(cfg: &OperatorConfig, m: usize, n: usize) -> Result<Operator> {
        Ok(match cfg {
            OperatorConfig::ModelKernel { scale } => {
                Operator::Kernel(czkernel::model_kernel(m, n, *scale)?)
            }
            OperatorConfig::ModelSymbol => Operator::Symbol(pseudo::model_symbol(m, n)?),
        })
    }

    /// `|T(f)|` on the grid.
    pub fn apply_modulus(&self, fvec: &[&GridFunction<f64>]) -> Result<GridFunction<f64>> {
        match self {
            Operator::Kernel(k) => Ok(czkernel::apply(k, fvec)?.map(f64::abs)),
            Operator::Symbol(a) => Ok(pseudo::apply_ta(a, fvec)?.values.modulus()),
        }
    }

    /// `|T_b(f)|` on the grid.
    pub fn commutator_modulus(
        &self,
        symbols: &SymbolVector,
        fvec: &[&GridFunction<f64>],
    ) -> Result<GridFunction<f64>> {
        match self {
            Operator::Kernel(k) => Ok(czkernel::commutator(k, symbols, fvec)?.map(f64::abs)),
            Operator::Symbol(a) => {
                let t_all = pseudo::apply_ta(a, fvec)?.values;
                let grid = *t_all.grid();
                let mut acc = GridFunction::<num_complex::Complex64>::zeros(grid);
                for j in 0..symbols.len() {
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
                    let t_j = pseudo::apply_ta(a, &refs)?.values;
                    for i in 0..grid.num_points() {
                        acc.values_mut()[i] +=
                            t_all.value(i) * b.value(i) - t_j.value(i);
                    }
                }
                Ok(acc.modulus())
            }
        }
    }
}

/// Everything a check needs at one resolution.
pub struct Stage {
    pub grid: GridSpec,
    pub weights: Vec<Weight>,
    pub nu: Weight,
    pub cover: CriticalCover,
    pub family: BallFamily,
    pub symbols: Option<SymbolVector>,
    pub symbol_norm: f64,
    pub instances: Vec<Vec<GridFunction<f64>>>,
    pub operator: Operator,
}

fn default_ball_family(cfg: &CampaignConfig) -> BallFamilyConfig {
    // centers every other base cell and radii from two cells up: no sample
    // is farther than one cell from a center, so the capped local maximal
    // operators reach every grid point
    let h = 2.0 * cfg.grid.l / cfg.grid.g as f64;
    let mut radii = Vec::new();
    let mut r = 2.0 * h;
    while r <= 2.0 * cfg.grid.l {
        radii.push(r);
        r *= 2.0;
    }
    BallFamilyConfig { stride: 2, radii }
}

impl Stage {
    pub fn prepare(cfg: &CampaignConfig, g: usize) -> Result<Stage> {
        let grid = GridSpec::new(cfg.grid.n, cfg.grid.l, g)?;
        let m = cfg.arity();
        let weights: Vec<Weight> = cfg
            .weights
            .iter()
            .map(|rec| rec.materialize(grid))
            .collect::<Result<_>>()?;
        let exps = ExponentVector::new(&cfg.exponents)?;
        let nu = WeightVector::new(weights.clone(), exps)?.product_weight();
        let cover = critical_cover(&grid);

        let fam_cfg = cfg
            .ball_family
            .clone()
            .unwrap_or_else(|| default_ball_family(cfg));
        let stride = fam_cfg.stride * g / cfg.grid.g;
        let family = BallFamily::new(&grid, &fam_cfg.radii, stride)?;

        let (symbols, symbol_norm) = if cfg.symbols.is_empty() {
            (None, 0.0)
        } else {
            let sv = SymbolVector::new(
                cfg.symbols
                    .iter()
                    .map(|s| s.recipe.materialize(grid))
                    .collect::<Result<Vec<BmoSymbol>>>()?,
                cfg.symbols.iter().map(|s| s.theta).collect(),
            )?;
            let norm = sv.norm_sum(&family)?;
            (Some(sv), norm)
        };

        let recipes = generate_family(&cfg.family, m, cfg.grid.n, cfg.grid.l, cfg.grid.g);
        let instances = recipes
            .iter()
            .map(|inst| {
                inst.iter()
                    .map(|f: &TestFunction| f.materialize(grid))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Stage {
            grid,
            weights,
            nu,
            cover,
            family,
            symbols,
            symbol_norm,
            instances,
            operator: Operator::from_config(&cfg.operator, m, cfg.grid.n)?,
        })
    }

    fn refs(&self, i: usize) -> Vec<&GridFunction<f64>> {
        self.instances[i].iter().collect()
    }
}

/// Outcome of one check at one resolution.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub max_ratio: f64,
    pub argmax: String,
    pub lhs: f64,
    pub rhs: f64,
    pub instances_used: usize,
    pub hard_fail: bool,
    pub cert_ok: bool,
}

impl CheckOutcome {
    fn empty() -> Self {
        CheckOutcome {
            max_ratio: 0.0,
            argmax: String::from("-"),
            lhs: 0.0,
            rhs: 0.0,
            instances_used: 0,
            hard_fail: false,
            cert_ok: true,
        }
    }

    fn push(&mut self, label: String, lhs: f64, rhs: f64) {
        if rhs == 0.0 {
            if lhs > 1e-12 {
                self.hard_fail = true;
                self.max_ratio = f64::INFINITY;
                self.argmax = label;
                self.lhs = lhs;
                self.rhs = rhs;
            }
            return;
        }
        let ratio = lhs / rhs;
        if ratio > self.max_ratio {
            self.max_ratio = ratio;
            self.argmax = label;
            self.lhs = lhs;
            self.rhs = rhs;
        }
    }
}

fn product_norm(
    fvec: &[&GridFunction<f64>],
    exps: &[f64],
    weights: &[Weight],
) -> Result<Option<f64>> {
    let mut prod = 1.0;
    for ((f, &p), w) in fvec.iter().zip(exps).zip(weights) {
        let norm = lp_norm(*f, p, w.as_grid())?;
        if norm == 0.0 {
            return Ok(None);
        }
        prod *= norm;
    }
    Ok(Some(prod))
}

fn total_exponent(exps: &[f64]) -> f64 {
    1.0 / exps.iter().map(|p| 1.0 / p).sum::<f64>()
}

/// Certify the weight vector at (possibly rescaled) exponents on both
/// resolutions; divergence fails the check without aborting the campaign.
fn certify(cfg: &CampaignConfig, base: &Stage, fine: &Stage, scale: f64) -> Result<bool> {
    let exps: Vec<f64> = cfg.exponents.iter().map(|p| p / scale).collect();
    let ev = ExponentVector::new(&exps)?;
    let wv_base = WeightVector::new(base.weights.clone(), ev.clone())?;
    let wv_fine = WeightVector::new(fine.weights.clone(), ev)?;
    let cert = certify_vector_refined((&wv_base, &base.family), (&wv_fine, &fine.family))?;
    Ok(cert.in_class)
}

fn run_strong(cfg: &CampaignConfig, stage: &Stage) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::empty();
    let p = total_exponent(&cfg.exponents);
    for i in 0..stage.instances.len() {
        let fvec = stage.refs(i);
        let Some(den) = product_norm(&fvec, &cfg.exponents, &stage.weights)? else {
            continue;
        };
        let t = stage.operator.apply_modulus(&fvec)?;
        out.instances_used += 1;
        out.push(format!("{i}"), lp_norm(&t, p, stage.nu.as_grid())?, den);
    }
    Ok(out)
}

fn run_weak(cfg: &CampaignConfig, stage: &Stage) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::empty();
    let weak = cfg.weak_exponents_or_default();
    let p = total_exponent(&weak);
    for i in 0..stage.instances.len() {
        let fvec = stage.refs(i);
        let Some(den) = product_norm(&fvec, &weak, &stage.weights)? else {
            continue;
        };
        let t = stage.operator.apply_modulus(&fvec)?;
        out.instances_used += 1;
        out.push(format!("{i}"), weak_lp_norm(&t, p, stage.nu.as_grid())?, den);
    }
    Ok(out)
}

fn run_commutator(cfg: &CampaignConfig, stage: &Stage) -> Result<CheckOutcome> {
    let symbols = stage
        .symbols
        .as_ref()
        .ok_or_else(|| Error::BadConfig("commutator checks need symbols".into()))?;
    let mut out = CheckOutcome::empty();
    let p = total_exponent(&cfg.exponents);
    for i in 0..stage.instances.len() {
        let fvec = stage.refs(i);
        let Some(den) = product_norm(&fvec, &cfg.exponents, &stage.weights)? else {
            continue;
        };
        let tb = stage.operator.commutator_modulus(symbols, &fvec)?;
        out.instances_used += 1;
        out.push(format!("{i}"), lp_norm(&tb, p, stage.nu.as_grid())?, den);
    }
    Ok(out)
}

fn delta_average(grid: &GridSpec, f: &GridFunction<f64>, ball: &Ball, delta: f64) -> Result<f64> {
    let mask = ball_mask(grid, ball);
    if mask.is_empty() {
        return Err(Error::BallMissesGrid);
    }
    let mut acc = 0.0;
    for &idx in &mask {
        acc += f.value(idx).powf(delta);
    }
    Ok((acc / mask.len() as f64).powf(1.0 / delta))
}

/// Critical-ball bound: the delta-average of `|T f|` over the doubled cover
/// ball against the infimum of the critical maximal function there.
fn run_pointwise_critical(
    cfg: &CampaignConfig,
    stage: &Stage,
    commutator: bool,
) -> Result<CheckOutcome> {
    let delta = cfg.maximal.delta;
    let inner_s = if commutator { cfg.commutator_inner_p } else { 1.0 };
    let params = maximal_params(cfg, stage, inner_s)?;
    let mut out = CheckOutcome::empty();
    for i in 0..stage.instances.len() {
        let fvec = stage.refs(i);
        let t = if commutator {
            let symbols = stage.symbols.as_ref().unwrap();
            stage.operator.commutator_modulus(symbols, &fvec)?
        } else {
            stage.operator.apply_modulus(&fvec)?
        };
        let frak = critical_maximal(&fvec, &params, &stage.cover)?;
        out.instances_used += 1;
        for (qi, q) in stage.cover.balls.iter().enumerate() {
            if ball_mask(&stage.grid, q).is_empty() {
                continue;
            }
            let twice = q.dilate(2.0);
            let lhs = delta_average(&stage.grid, &t, &twice, delta)?;
            let inf = ball_mask(&stage.grid, &twice)
                .iter()
                .map(|&idx| frak.value(idx))
                .fold(f64::INFINITY, f64::min);
            let rhs = if commutator { stage.symbol_norm * inf } else { inf };
            out.push(format!("{i}:Q{qi}"), lhs, rhs);
        }
    }
    Ok(out)
}

/// Sharp-maximal bound: `(M^sharp_{loc,alpha} |T f|^delta)^{1/delta}`
/// against the maximal-function sum, pointwise over the grid.
fn run_pointwise_sharp(
    cfg: &CampaignConfig,
    stage: &Stage,
    commutator: bool,
) -> Result<CheckOutcome> {
    let delta = cfg.maximal.delta;
    let params_one = maximal_params(cfg, stage, 1.0)?;
    let params_p = maximal_params(cfg, stage, cfg.commutator_inner_p)?;
    let mut out = CheckOutcome::empty();
    for i in 0..stage.instances.len() {
        let fvec = stage.refs(i);
        let (target, rhs_grid) = if commutator {
            let symbols = stage.symbols.as_ref().unwrap();
            let tb = stage.operator.commutator_modulus(symbols, &fvec)?;
            let t = stage.operator.apply_modulus(&fvec)?;
            let scalar_loc =
                local_scalar_maximal(&t, cfg.sharp_s, &stage.cover, &stage.family)?;
            let frak_p = critical_maximal(&fvec, &params_p, &stage.cover)?;
            let loc_p = local_product_maximal(
                &fvec,
                cfg.commutator_inner_p,
                &stage.cover,
                &stage.family,
            )?;
            let mut rhs = GridFunction::zeros(stage.grid);
            for idx in 0..stage.grid.num_points() {
                rhs.values_mut()[idx] = stage.symbol_norm
                    * (scalar_loc.value(idx) + frak_p.value(idx) + loc_p.value(idx));
            }
            (tb, rhs)
        } else {
            let t = stage.operator.apply_modulus(&fvec)?;
            let frak = critical_maximal(&fvec, &params_one, &stage.cover)?;
            let loc = local_product_maximal(&fvec, 1.0, &stage.cover, &stage.family)?;
            let mut rhs = GridFunction::zeros(stage.grid);
            for idx in 0..stage.grid.num_points() {
                rhs.values_mut()[idx] = frak.value(idx) + loc.value(idx);
            }
            (t, rhs)
        };
        let powered = target.map(|v| v.powf(delta));
        let sharp = local_sharp_maximal(&powered, cfg.maximal.alpha, &stage.family)?;
        out.instances_used += 1;
        let mut worst = (0.0f64, 0usize, 0.0, 0.0);
        for idx in 0..stage.grid.num_points() {
            let lhs = sharp.value(idx).max(0.0).powf(1.0 / delta);
            let rhs = rhs_grid.value(idx);
            if rhs == 0.0 {
                if lhs > 1e-12 {
                    out.hard_fail = true;
                    out.push(format!("{i}:x{idx}"), lhs, rhs);
                }
                continue;
            }
            if lhs / rhs > worst.0 {
                worst = (lhs / rhs, idx, lhs, rhs);
            }
        }
        out.push(format!("{i}:x{}", worst.1), worst.2, worst.3);
    }
    Ok(out)
}

fn maximal_params(cfg: &CampaignConfig, stage: &Stage, s: f64) -> Result<MaximalParams> {
    let m = cfg.arity();
    let n = cfg.grid.n;
    let decay = cfg
        .maximal
        .decay
        .unwrap_or(((m * n + n + 1) as f64).max(1.0));
    let kmax = cfg.maximal.kmax.unwrap_or_else(|| {
        (2.0 * stage.grid.half_width() / cfg.maximal.kappa)
            .log2()
            .ceil() as u32
            + 1
    });
    MaximalParams::new(&stage.grid, s, cfg.maximal.kappa, decay, kmax)
}

fn run_maximal(cfg: &CampaignConfig, stage: &Stage, kind: CheckKind) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::empty();
    let p = total_exponent(&cfg.exponents);
    let params = maximal_params(cfg, stage, cfg.s)?;
    for i in 0..stage.instances.len() {
        let fvec = stage.refs(i);
        match kind {
            CheckKind::MaximalFrakStrong => {
                let Some(den) = product_norm(&fvec, &cfg.exponents, &stage.weights)? else {
                    continue;
                };
                let mx = critical_maximal(&fvec, &params, &stage.cover)?;
                out.instances_used += 1;
                out.push(format!("{i}"), lp_norm(&mx, p, stage.nu.as_grid())?, den);
            }
            CheckKind::MaximalLocStrong => {
                let Some(den) = product_norm(&fvec, &cfg.exponents, &stage.weights)? else {
                    continue;
                };
                let mx = local_product_maximal(&fvec, cfg.s, &stage.cover, &stage.family)?;
                out.instances_used += 1;
                out.push(format!("{i}"), lp_norm(&mx, p, stage.nu.as_grid())?, den);
            }
            CheckKind::MaximalLocWeak => {
                let Some(den) = product_norm(&fvec, &cfg.exponents, &stage.weights)? else {
                    continue;
                };
                let mx = local_product_maximal(&fvec, cfg.s, &stage.cover, &stage.family)?;
                out.instances_used += 1;
                out.push(
                    format!("{i}"),
                    weak_lp_norm(&mx, p, stage.nu.as_grid())?,
                    den,
                );
            }
            _ => {
                // scalar endpoint: first slot only, weak norm at p = s
                let f = fvec[0];
                let den = lp_norm(f, cfg.s, stage.weights[0].as_grid())?;
                if den == 0.0 {
                    continue;
                }
                let mx = local_scalar_maximal(f, cfg.s, &stage.cover, &stage.family)?;
                out.instances_used += 1;
                out.push(
                    format!("{i}"),
                    weak_lp_norm(&mx, cfg.s, stage.weights[0].as_grid())?,
                    den,
                );
            }
        }
    }
    Ok(out)
}

/// Local maximal-control comparison: the `beta`-capped maximal norm against
/// the sharp-maximal norm plus the cover-ball average sum, in both strong
/// and weak flavors.
fn run_fs_local(cfg: &CampaignConfig, stage: &Stage) -> Result<CheckOutcome> {
    let p = cfg.fs_p;
    let w = &stage.nu;
    let mut out = CheckOutcome::empty();
    for i in 0..stage.instances.len() {
        let g_fn = &stage.instances[i][0];
        let m_loc = local_maximal(g_fn, cfg.maximal.beta, &stage.family)?;
        let m_sharp = local_sharp_maximal(g_fn, 4.0, &stage.family)?;

        let mut cover_sum = 0.0;
        for q in &stage.cover.balls {
            let twice = q.dilate(2.0);
            let mask = ball_mask(&stage.grid, &twice);
            if mask.is_empty() {
                continue;
            }
            let w_mass: f64 =
                mask.iter().map(|&idx| w.value(idx)).sum::<f64>() * stage.grid.cell_volume();
            let avg = ball_average(&g_fn.map(f64::abs), &twice)?;
            cover_sum += w_mass * avg.powf(p);
        }

        let strong_lhs = lp_norm(&m_loc, p, w.as_grid())?.powf(p);
        let strong_rhs = lp_norm(&m_sharp, p, w.as_grid())?.powf(p) + cover_sum;
        out.push(format!("{i}:strong"), strong_lhs, strong_rhs);

        let weak_lhs = weak_lp_norm(&m_loc, p, w.as_grid())?.powf(p);
        let weak_rhs = weak_lp_norm(&m_sharp, p, w.as_grid())?.powf(p) + cover_sum;
        out.push(format!("{i}:weak"), weak_lhs, weak_rhs);
        out.instances_used += 1;
    }
    Ok(out)
}

/// Run one check at one resolution.
pub fn eval_check(cfg: &CampaignConfig, stage: &Stage, kind: CheckKind) -> Result<CheckOutcome> {
    match kind {
        CheckKind::Strong => run_strong(cfg, stage),
        CheckKind::Weak => run_weak(cfg, stage),
        CheckKind::Commutator => run_commutator(cfg, stage),
        CheckKind::PointwiseCritical => run_pointwise_critical(cfg, stage, false),
        CheckKind::PointwiseCriticalComm => run_pointwise_critical(cfg, stage, true),
        CheckKind::PointwiseSharp => run_pointwise_sharp(cfg, stage, false),
        CheckKind::PointwiseSharpComm => run_pointwise_sharp(cfg, stage, true),
        CheckKind::MaximalFrakStrong
        | CheckKind::MaximalLocStrong
        | CheckKind::MaximalLocWeak
        | CheckKind::MaximalScalarLoc => run_maximal(cfg, stage, kind),
        CheckKind::FsLocal => run_fs_local(cfg, stage),
    }
}

/// The weight-class certification each check relies on; `None` when the
/// check carries no weight hypothesis.
pub fn certification(
    cfg: &CampaignConfig,
    base: &Stage,
    fine: &Stage,
    kind: CheckKind,
) -> Result<bool> {
    match kind {
        CheckKind::Strong
        | CheckKind::Commutator
        | CheckKind::PointwiseCriticalComm
        | CheckKind::PointwiseSharpComm => certify(cfg, base, fine, 1.0),
        CheckKind::Weak => {
            let weak = cfg.weak_exponents_or_default();
            let ev = ExponentVector::new(&weak)?;
            let wv_base = WeightVector::new(base.weights.clone(), ev.clone())?;
            let wv_fine = WeightVector::new(fine.weights.clone(), ev)?;
            Ok(
                certify_vector_refined((&wv_base, &base.family), (&wv_fine, &fine.family))?
                    .in_class,
            )
        }
        CheckKind::MaximalFrakStrong | CheckKind::MaximalLocStrong | CheckKind::MaximalLocWeak => {
            certify(cfg, base, fine, cfg.s)
        }
        CheckKind::MaximalScalarLoc => Ok(certify_weight_refined(
            (&base.weights[0], &base.family),
            (&fine.weights[0], &fine.family),
            1.0,
        )?
        .in_class),
        CheckKind::PointwiseCritical | CheckKind::PointwiseSharp => Ok(true),
        CheckKind::FsLocal => {
            // the comparison needs the measure in the widest class: a
            // finite envelope fit at some large exponent
            let samples_base: Vec<(f64, f64)> = base
                .family
                .balls
                .iter()
                .map(|b| {
                    Ok((
                        b.radius,
                        crate::weights::ap_quantity(&base.nu, 8.0, b)?,
                    ))
                })
                .collect::<Result<_>>()?;
            Ok(envelope_constant(&samples_base, 8.0).is_finite())
        }
    }
}
