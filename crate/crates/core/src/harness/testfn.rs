//! Seeded test-function families. Instances are analytic recipes so the
//! same function can be resampled at any resolution for refinement checks.

use crate::error::Result;
use crate::grid::{GridFunction, GridSpec, Point};
use crate::harness::config::{FamilyConfig, FamilyKind};
use crate::rng::Stream;

/// One analytic test function.
#[derive(Clone, Debug)]
pub enum TestFunction {
    /// Modulated Gaussian `amp exp(-(x-c)^2 / 2 sigma^2) cos(w (x-c) + phase)`
    /// (per-axis product in two dimensions).
    GaussianPacket {
        center: [f64; 2],
        sigma: f64,
        freq: f64,
        phase: f64,
        amp: f64,
    },
    /// Band-limited trigonometric polynomial with integer mode indices.
    TrigBand { modes: Vec<(i64, f64, f64)>, half_width: f64 },
    /// Disjoint smooth bumps `height exp(1 - 1/(1 - u^2))`, `u = (x-c)/w`.
    BumpTrain { bumps: Vec<([f64; 2], f64, f64)> },
}

impl TestFunction {
    pub fn eval(&self, p: Point) -> f64 {
        match self {
            TestFunction::GaussianPacket {
                center,
                sigma,
                freq,
                phase,
                amp,
            } => {
                let dx = p.x - center[0];
                let dy = p.y - center[1];
                let env = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
                amp * env * (freq * dx + phase).cos()
            }
            TestFunction::TrigBand { modes, half_width } => {
                let w0 = std::f64::consts::PI / half_width;
                modes
                    .iter()
                    .map(|(k, amp, phase)| amp * (w0 * *k as f64 * p.x + phase).cos())
                    .sum()
            }
            TestFunction::BumpTrain { bumps } => bumps
                .iter()
                .map(|(c, w, height)| {
                    let dx = (p.x - c[0]) / w;
                    let dy = (p.y - c[1]) / w;
                    let u2 = dx * dx + dy * dy;
                    if u2 < 1.0 {
                        height * (1.0 - 1.0 / (1.0 - u2)).exp()
                    } else {
                        0.0
                    }
                })
                .sum(),
        }
    }

    pub fn materialize(&self, grid: GridSpec) -> Result<GridFunction<f64>> {
        GridFunction::from_fn(grid, |p| self.eval(p))
    }
}

/// Draw the instance family: `count` tuples of `m` functions, fixed by the
/// seed. `base_g` pins the trig band so refined grids see the same modes.
pub fn generate_family(
    cfg: &FamilyConfig,
    m: usize,
    n: usize,
    half_width: f64,
    base_g: usize,
) -> Vec<Vec<TestFunction>> {
    let root = Stream::new(cfg.seed, "test-family");
    (0..cfg.count)
        .map(|i| {
            (0..m)
                .map(|slot| {
                    let mut s = root.substream((i * m + slot) as u64);
                    draw(cfg.kind, &mut s, n, half_width, base_g)
                })
                .collect()
        })
        .collect()
}

fn draw(kind: FamilyKind, s: &mut Stream, n: usize, l: f64, base_g: usize) -> TestFunction {
    match kind {
        FamilyKind::GaussianPacket => {
            let cx = s.range(-l / 2.0, l / 2.0);
            let cy = if n == 2 { s.range(-l / 2.0, l / 2.0) } else { 0.0 };
            // modulation stays inside a quarter of the base half-band
            let wmax = std::f64::consts::PI * base_g as f64 / (16.0 * l);
            TestFunction::GaussianPacket {
                center: [cx, cy],
                sigma: s.range(l / 24.0, l / 8.0),
                freq: s.range(0.0, wmax),
                phase: s.range(0.0, std::f64::consts::TAU),
                amp: s.range(0.5, 2.0),
            }
        }
        FamilyKind::TrigBand => {
            let kmax = (base_g / 8).max(2) as i64;
            let count = 3 + s.index(4);
            let modes = (0..count)
                .map(|_| {
                    let k = 1 + s.index(kmax as usize) as i64;
                    let amp = s.range(0.2, 1.0) / (1.0 + k as f64 / 4.0);
                    let phase = s.range(0.0, std::f64::consts::TAU);
                    (k, amp, phase)
                })
                .collect();
            TestFunction::TrigBand {
                modes,
                half_width: l,
            }
        }
        FamilyKind::BumpTrain => {
            let count = 2 + s.index(3);
            let cell = 1.5 * l / count as f64;
            let bumps = (0..count)
                .map(|j| {
                    let left = -0.75 * l + j as f64 * cell;
                    let width = s.range(cell / 8.0, cell / 3.0);
                    let cx = s.range(left + width, left + cell - width);
                    let cy = if n == 2 { s.range(-l / 4.0, l / 4.0) } else { 0.0 };
                    ([cx, cy], width, s.range(0.5, 2.0))
                })
                .collect();
            TestFunction::BumpTrain { bumps }
        }
    }
}
