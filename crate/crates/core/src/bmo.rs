//! Mean-oscillation norms with growth envelopes.
//!
//! The oscillation of a symbol over a ball is `avg_B |b - b_B|`; a symbol
//! whose oscillation stays under `C (1 + r_B)^theta` over the tested family
//! carries a fitted envelope. The true norm is an infimum over constants;
//! the fit reported here is always relative to the tested family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{envelope_constant, fit_growth, GrowthFit};
use crate::grid::{ball_average, Ball, BallFamily, GridFunction, GridSpec, Point};

/// Real symbol with an optional fitted oscillation envelope.
#[derive(Clone, Debug)]
pub struct BmoSymbol {
    values: GridFunction<f64>,
    fitted: Option<GrowthFit>,
}

impl BmoSymbol {
    pub fn new(values: GridFunction<f64>) -> Self {
        BmoSymbol {
            values,
            fitted: None,
        }
    }

    pub fn values(&self) -> &GridFunction<f64> {
        &self.values
    }

    pub fn grid(&self) -> &GridSpec {
        self.values.grid()
    }

    pub fn fitted(&self) -> Option<&GrowthFit> {
        self.fitted.as_ref()
    }
}

/// Serializable symbol generators for configs and the command line.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SymbolRecipe {
    /// `b(x) = slope * x_1` (Lipschitz; oscillation grows linearly).
    Linear { slope: f64 },
    /// `b(x) = log(eps + |x|)` (scale-invariant oscillation away from the
    /// regularization scale).
    Log { eps: f64 },
    /// `b = constant` (zero oscillation).
    Constant { value: f64 },
    /// Raw sampled values; the length must match the target grid.
    UserGrid { values: Vec<f64> },
}

impl SymbolRecipe {
    pub fn materialize(&self, grid: GridSpec) -> Result<BmoSymbol> {
        let values = match self {
            SymbolRecipe::Linear { slope } => GridFunction::from_fn(grid, |p| slope * p.x)?,
            SymbolRecipe::Log { eps } => {
                GridFunction::from_fn(grid, |p| (eps + p.norm()).ln())?
            }
            SymbolRecipe::Constant { value } => GridFunction::from_fn(grid, |_| *value)?,
            SymbolRecipe::UserGrid { values } => GridFunction::new(grid, values.clone())?,
        };
        Ok(BmoSymbol::new(values))
    }
}

/// Mean oscillation `avg_B |b - b_B|`.
pub fn oscillation(b: &GridFunction<f64>, ball: &Ball) -> Result<f64> {
    let mean = ball_average(b, ball)?;
    let mut acc = 0.0f64;
    let mut count = 0usize;
    crate::grid::for_each_in_ball(b.grid(), ball, |idx, _| {
        acc += (b.value(idx) - mean).abs();
        count += 1;
    });
    Ok(acc / count as f64)
}

/// Oscillation samples `(r_B, avg_B |b - b_B|)` over the family.
pub fn oscillation_samples(b: &GridFunction<f64>, family: &BallFamily) -> Result<Vec<(f64, f64)>> {
    family
        .balls
        .iter()
        .map(|ball| Ok((ball.radius, oscillation(b, ball)?)))
        .collect()
}

/// Fit the oscillation envelope over the family and store it in the symbol.
pub fn fit(symbol: &mut BmoSymbol, family: &BallFamily) -> Result<GrowthFit> {
    let samples = oscillation_samples(symbol.values(), family)?;
    let fit = fit_growth(&samples)?;
    symbol.fitted = Some(fit);
    Ok(fit)
}

/// Smallest constant with `oscillation <= C (1 + r)^theta` over the family
/// at a prescribed exponent.
pub fn norm_at(b: &GridFunction<f64>, family: &BallFamily, theta: f64) -> Result<f64> {
    let samples = oscillation_samples(b, family)?;
    Ok(envelope_constant(&samples, theta))
}

/// Vector of symbols with prescribed growth exponents; its norm is the sum
/// of the per-component envelope constants at those exponents.
#[derive(Clone, Debug)]
pub struct SymbolVector {
    symbols: Vec<BmoSymbol>,
    thetas: Vec<f64>,
}

impl SymbolVector {
    pub fn new(symbols: Vec<BmoSymbol>, thetas: Vec<f64>) -> Result<Self> {
        if symbols.len() != thetas.len() {
            return Err(Error::ComponentCount {
                expected: symbols.len(),
                got: thetas.len(),
            });
        }
        if symbols.is_empty() {
            return Err(Error::ComponentCount {
                expected: 1,
                got: 0,
            });
        }
        let grid = *symbols[0].grid();
        if symbols.iter().any(|s| *s.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        if thetas.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::BadSymbol("negative growth exponent".into()));
        }
        Ok(SymbolVector { symbols, thetas })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbol(&self, j: usize) -> &BmoSymbol {
        &self.symbols[j]
    }

    pub fn symbol_mut(&mut self, j: usize) -> &mut BmoSymbol {
        &mut self.symbols[j]
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.thetas[j]
    }

    /// `sum_j ||b_j||_{theta_j}` over the tested family.
    pub fn norm_sum(&self, family: &BallFamily) -> Result<f64> {
        let mut total = 0.0;
        for (s, &t) in self.symbols.iter().zip(&self.thetas) {
            total += norm_at(s.values(), family, t)?;
        }
        Ok(total)
    }
}
