//! Campaign configuration: a JSON document whose fields mirror the knobs of
//! every check.

use serde::{Deserialize, Serialize};

use crate::bmo::SymbolRecipe;
use crate::error::{Error, Result};
use crate::weights::WeightRecipe;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridConfig {
    pub n: usize,
    pub l: f64,
    pub g: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorConfig {
    /// `exp(-S/scale) / S^{mn}` quadrature kernel.
    ModelKernel { scale: f64 },
    /// Order-zero model symbol applied through the DFT.
    ModelSymbol,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MaximalConfig {
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Dyadic decay exponent; `mn + n + 1` when absent.
    #[serde(default)]
    pub decay: Option<f64>,
    /// Truncation depth; `ceil(log2(2L/kappa)) + 1` when absent.
    #[serde(default)]
    pub kmax: Option<u32>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_kappa() -> f64 {
    1.0
}
fn default_alpha() -> f64 {
    4.0
}
fn default_beta() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    0.3
}

impl Default for MaximalConfig {
    fn default() -> Self {
        MaximalConfig {
            kappa: 1.0,
            decay: None,
            kmax: None,
            alpha: 4.0,
            beta: 1.0,
            delta: 0.3,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymbolConfig {
    #[serde(flatten)]
    pub recipe: SymbolRecipe,
    pub theta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub kind: FamilyKind,
    pub count: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    GaussianPacket,
    TrigBand,
    BumpTrain,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallFamilyConfig {
    /// Center stride on the base grid (scaled with refinement so centers
    /// stay physically fixed).
    pub stride: usize,
    pub radii: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default = "default_lo")]
    pub stability_lo: f64,
    #[serde(default = "default_hi")]
    pub stability_hi: f64,
}

fn default_lo() -> f64 {
    0.5
}
fn default_hi() -> f64 {
    2.0
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            stability_lo: 0.5,
            stability_hi: 2.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub grid: GridConfig,
    /// Integrability exponents of the strong checks, one per input slot.
    pub exponents: Vec<f64>,
    /// Exponents of the weak-endpoint check; at least one equal to 1.
    #[serde(default)]
    pub weak_exponents: Option<Vec<f64>>,
    /// Inner exponent of the maximal-operator checks.
    #[serde(default = "default_s")]
    pub s: f64,
    pub weights: Vec<WeightRecipe>,
    pub operator: OperatorConfig,
    #[serde(default)]
    pub maximal: MaximalConfig,
    #[serde(default)]
    pub symbols: Vec<SymbolConfig>,
    /// Inner exponent of the commutator pointwise bounds (> 1).
    #[serde(default = "default_inner_p")]
    pub commutator_inner_p: f64,
    /// Exponent between delta and 1/m for the sharp commutator bound.
    #[serde(default = "default_sharp_s")]
    pub sharp_s: f64,
    /// Exponent of the local maximal-control comparison.
    #[serde(default = "default_fs_p")]
    pub fs_p: f64,
    pub family: FamilyConfig,
    #[serde(default)]
    pub ball_family: Option<BallFamilyConfig>,
    pub checks: Vec<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub json_mirror: bool,
}

fn default_s() -> f64 {
    0.5
}
fn default_inner_p() -> f64 {
    2.0
}
fn default_sharp_s() -> f64 {
    0.45
}
fn default_fs_p() -> f64 {
    1.5
}

/// The checks a campaign can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    Strong,
    Weak,
    Commutator,
    PointwiseCritical,
    PointwiseSharp,
    PointwiseCriticalComm,
    PointwiseSharpComm,
    MaximalFrakStrong,
    MaximalLocStrong,
    MaximalLocWeak,
    MaximalScalarLoc,
    FsLocal,
}

impl CheckKind {
    pub fn id(&self) -> &'static str {
        match self {
            CheckKind::Strong => "strong",
            CheckKind::Weak => "weak",
            CheckKind::Commutator => "commutator",
            CheckKind::PointwiseCritical => "p-critical",
            CheckKind::PointwiseSharp => "p-sharp",
            CheckKind::PointwiseCriticalComm => "p-critical-comm",
            CheckKind::PointwiseSharpComm => "p-sharp-comm",
            CheckKind::MaximalFrakStrong => "max-frak-strong",
            CheckKind::MaximalLocStrong => "max-loc-strong",
            CheckKind::MaximalLocWeak => "max-loc-weak",
            CheckKind::MaximalScalarLoc => "max-scalar-loc",
            CheckKind::FsLocal => "fs-local",
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        Ok(match id {
            "strong" => CheckKind::Strong,
            "weak" => CheckKind::Weak,
            "commutator" => CheckKind::Commutator,
            "p-critical" => CheckKind::PointwiseCritical,
            "p-sharp" => CheckKind::PointwiseSharp,
            "p-critical-comm" => CheckKind::PointwiseCriticalComm,
            "p-sharp-comm" => CheckKind::PointwiseSharpComm,
            "max-frak-strong" => CheckKind::MaximalFrakStrong,
            "max-loc-strong" => CheckKind::MaximalLocStrong,
            "max-loc-weak" => CheckKind::MaximalLocWeak,
            "max-scalar-loc" => CheckKind::MaximalScalarLoc,
            "fs-local" => CheckKind::FsLocal,
            other => return Err(Error::BadConfig(format!("unknown check id '{other}'"))),
        })
    }

    pub fn all() -> [CheckKind; 12] {
        [
            CheckKind::Strong,
            CheckKind::Weak,
            CheckKind::Commutator,
            CheckKind::PointwiseCritical,
            CheckKind::PointwiseSharp,
            CheckKind::PointwiseCriticalComm,
            CheckKind::PointwiseSharpComm,
            CheckKind::MaximalFrakStrong,
            CheckKind::MaximalLocStrong,
            CheckKind::MaximalLocWeak,
            CheckKind::MaximalScalarLoc,
            CheckKind::FsLocal,
        ]
    }

    pub fn needs_operator(&self) -> bool {
        matches!(
            self,
            CheckKind::Strong
                | CheckKind::Weak
                | CheckKind::PointwiseCritical
                | CheckKind::PointwiseSharp
                | CheckKind::PointwiseSharpComm
        )
    }

    pub fn needs_commutator(&self) -> bool {
        matches!(
            self,
            CheckKind::Commutator | CheckKind::PointwiseCriticalComm | CheckKind::PointwiseSharpComm
        )
    }
}

impl CampaignConfig {
    pub fn arity(&self) -> usize {
        self.weights.len()
    }

    /// Deduplicated check list in config order; duplicate ids are reported
    /// back to the caller as warnings.
    pub fn check_list(&self) -> Result<(Vec<CheckKind>, Vec<String>)> {
        let mut seen = Vec::new();
        let mut warnings = Vec::new();
        for id in &self.checks {
            let kind = CheckKind::parse(id)?;
            if seen.contains(&kind) {
                warnings.push(format!("duplicate check id '{id}' ignored"));
            } else {
                seen.push(kind);
            }
        }
        Ok((seen, warnings))
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.arity();
        if m == 0 || m > 2 {
            return Err(Error::BadConfig(format!("{m} weight slots (need 1 or 2)")));
        }
        if self.exponents.len() != m {
            return Err(Error::BadConfig(format!(
                "{} exponents for {m} weights",
                self.exponents.len()
            )));
        }
        crate::grid::GridSpec::new(self.grid.n, self.grid.l, self.grid.g)
            .map_err(|e| Error::BadConfig(format!("grid: {e}")))?;
        for rec in &self.weights {
            rec.validate(self.grid.n)
                .map_err(|e| Error::BadConfig(format!("weight recipe: {e}")))?;
        }
        if !(self.s > 0.0) {
            return Err(Error::BadConfig(format!("s = {} must be positive", self.s)));
        }
        if !(self.maximal.delta > 0.0 && self.maximal.delta < 1.0 / m as f64) {
            return Err(Error::BadConfig(format!(
                "delta = {} outside (0, 1/m)",
                self.maximal.delta
            )));
        }
        let (checks, _) = self.check_list()?;
        for kind in &checks {
            match kind {
                CheckKind::Strong | CheckKind::Commutator => {
                    if self.exponents.iter().any(|p| *p <= 1.0) {
                        return Err(Error::BadConfig(format!(
                            "{} requires every exponent above 1",
                            kind.id()
                        )));
                    }
                }
                CheckKind::Weak => {
                    let weak = self.weak_exponents_or_default();
                    if weak.len() != m
                        || weak.iter().any(|p| *p < 1.0)
                        || !weak.iter().any(|p| *p == 1.0)
                    {
                        return Err(Error::BadConfig(
                            "weak exponents must be >= 1 with at least one equal to 1".into(),
                        ));
                    }
                }
                CheckKind::MaximalFrakStrong | CheckKind::MaximalLocWeak => {
                    if self.exponents.iter().any(|p| *p < self.s) {
                        return Err(Error::BadConfig(format!(
                            "{} requires every exponent at least s = {}",
                            kind.id(),
                            self.s
                        )));
                    }
                }
                CheckKind::MaximalLocStrong => {
                    if self.exponents.iter().any(|p| *p <= self.s) {
                        return Err(Error::BadConfig(format!(
                            "{} requires every exponent above s = {}",
                            kind.id(),
                            self.s
                        )));
                    }
                }
                _ => {}
            }
            if kind.needs_commutator() {
                if self.symbols.len() != m {
                    return Err(Error::BadConfig(format!(
                        "{} requires {m} symbols, got {}",
                        kind.id(),
                        self.symbols.len()
                    )));
                }
                if !(self.commutator_inner_p > 1.0) {
                    return Err(Error::BadConfig(
                        "commutator_inner_p must exceed 1".into(),
                    ));
                }
            }
            if *kind == CheckKind::PointwiseSharpComm
                && !(self.maximal.delta < self.sharp_s && self.sharp_s < 1.0 / m as f64)
            {
                return Err(Error::BadConfig(format!(
                    "sharp_s = {} outside (delta, 1/m)",
                    self.sharp_s
                )));
            }
        }
        if self.family.count == 0 {
            return Err(Error::BadConfig("instance count must be positive".into()));
        }
        Ok(())
    }

    pub fn weak_exponents_or_default(&self) -> Vec<f64> {
        self.weak_exponents
            .clone()
            .unwrap_or_else(|| vec![1.0; self.arity()])
    }

    /// Compact parameter record attached to every report row.
    pub fn params_summary(&self) -> String {
        serde_json::json!({
            "m": self.arity(),
            "n": self.grid.n,
            "l": self.grid.l,
            "p": self.exponents,
            "s": self.s,
            "delta": self.maximal.delta,
            "kappa": self.maximal.kappa,
            "alpha": self.maximal.alpha,
            "beta": self.maximal.beta,
            "inner_p": self.commutator_inner_p,
            "sharp_s": self.sharp_s,
            "fs_p": self.fs_p,
            "operator": self.operator,
            "family": self.family.kind,
            "count": self.family.count,
            "seed": self.family.seed,
        })
        .to_string()
    }
}
