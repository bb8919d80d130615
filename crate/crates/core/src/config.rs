//! Declarative run configuration, as read from JSON.
//!
//! Every section except `equation` has defaults, so `{"equation": {"alpha": 1}}`
//! is a complete config. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dispersion::{DispersionSymbol, SymbolKind};
use crate::error::{Error, Result};
use crate::experiments::ExperimentKind;
use crate::solver::SolverConfig;
use crate::spectral::{Field, SpectralGrid};

fn one() -> f64 {
    1.0
}

fn pure_power() -> SymbolKind {
    SymbolKind::PurePower
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationConfig {
    #[serde(rename = "type", default = "pure_power")]
    pub kind: SymbolKind,
    pub alpha: f64,
    #[serde(default = "one")]
    pub tau: f64,
    #[serde(default = "one")]
    pub xi0: f64,
}

impl EquationConfig {
    pub fn symbol(&self) -> Result<DispersionSymbol> {
        DispersionSymbol::new(self.kind, self.alpha, self.tau, self.xi0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 256,
            length: std::f64::consts::TAU,
        }
    }
}

impl GridConfig {
    pub fn grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.n, self.length)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    #[default]
    Cosine,
    Gaussian,
    /// Random coefficients on `1 <= k <= kmax`, scaled to a target `H^s` norm.
    RandomHs,
    /// `cos(mode·x) + ½ cos(high_mode·x)`.
    Multiscale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialParams {
    pub mode: i64,
    pub high_mode: i64,
    pub width: f64,
    /// Center of the bump; `None` means the middle of the period.
    pub center: Option<f64>,
    /// Sobolev index of the target norm for `random_hs`.
    pub s: f64,
    pub kmax: i64,
}

impl Default for InitialParams {
    fn default() -> Self {
        Self {
            mode: 1,
            high_mode: 32,
            width: 0.5,
            center: None,
            s: 0.0,
            kmax: 16,
        }
    }
}

/// Initial-data recipe. `amplitude` is the peak coefficient scale, or the
/// target `H^s` norm for `random_hs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialData {
    pub kind: InitialKind,
    pub amplitude: f64,
    pub params: InitialParams,
    pub seed: u64,
}

impl Default for InitialData {
    fn default() -> Self {
        Self {
            kind: InitialKind::Cosine,
            amplitude: 0.1,
            params: InitialParams::default(),
            seed: 0,
        }
    }
}

impl InitialData {
    pub fn cosine(amplitude: f64) -> Self {
        Self {
            amplitude,
            ..Self::default()
        }
    }

    pub fn random_hs(amplitude: f64, s: f64, kmax: i64, seed: u64) -> Self {
        Self {
            kind: InitialKind::RandomHs,
            amplitude,
            params: InitialParams {
                s,
                kmax,
                ..InitialParams::default()
            },
            seed,
        }
    }

    pub fn build(&self, grid: SpectralGrid) -> Result<Field> {
        let p = &self.params;
        let a = self.amplitude;
        let k0 = std::f64::consts::TAU / grid.length();
        let half = (grid.n() / 2) as i64;
        let check_mode = |k: i64| {
            if k.abs() >= half {
                Err(Error::config(format!("mode {k} is not resolved by n = {}", grid.n())))
            } else {
                Ok(())
            }
        };
        match self.kind {
            InitialKind::Cosine => {
                check_mode(p.mode)?;
                Field::cosine(grid, p.mode, a)
            }
            InitialKind::Multiscale => {
                check_mode(p.mode)?;
                check_mode(p.high_mode)?;
                Ok(&Field::cosine(grid, p.mode, a)? + &Field::cosine(grid, p.high_mode, 0.5 * a)?)
            }
            InitialKind::Gaussian => {
                if !(p.width > 0.0) {
                    return Err(Error::config("gaussian width must be positive"));
                }
                let len = grid.length();
                let c = p.center.unwrap_or(len / 2.0);
                Ok(Field::from_fn(grid, |x| {
                    // nearest periodic image
                    let d = (x - c) - len * ((x - c) / len).round();
                    a * (-(d / p.width).powi(2)).exp()
                }))
            }
            InitialKind::RandomHs => {
                if p.kmax < 1 {
                    return Err(Error::config("random_hs needs kmax >= 1"));
                }
                check_mode(p.kmax)?;
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let modes: Vec<(i64, Complex64)> = (1..=p.kmax)
                    .map(|k| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        let decay = (1.0 + (k as f64 * k0).powi(2)).powf(-(p.s + 0.5) / 2.0);
                        (k, Complex64::new(re, im) * decay)
                    })
                    .collect();
                let f = Field::from_modes(grid, &modes)?;
                let norm = f.sobolev_norm(p.s);
                Ok(f.scaled(a / norm))
            }
        }
    }
}

/// Parameters of the modified-energy diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Diagnostics {
    pub s: f64,
    pub sigma: f64,
    pub n0: f64,
    pub b: f64,
    /// Evaluate the energies on every `every`-th recorded snapshot; 0 disables.
    pub every: usize,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            s: 1.0,
            sigma: -0.2,
            n0: 64.0,
            b: 0.5,
            every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Defaults to `$DBL_OUTPUT_DIR/<subcommand>`, then `./output/<subcommand>`.
    pub dir: Option<PathBuf>,
}

impl OutputConfig {
    pub fn resolve(&self, subcommand: &str) -> PathBuf {
        match &self.dir {
            Some(d) => d.clone(),
            None => std::env::var_os("DBL_OUTPUT_DIR")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("output"))
                .join(subcommand),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymbolCheck {
    pub xi_min: f64,
    pub xi_max: f64,
    pub beta_max: u32,
}

impl Default for SymbolCheck {
    fn default() -> Self {
        Self {
            xi_min: 2.0,
            xi_max: 100.0,
            beta_max: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceCheck {
    pub samples: usize,
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
    pub same_sign: bool,
    /// Largest admissible `max/min` spread of the sampled ratio.
    pub max_spread: f64,
}

impl Default for ResonanceCheck {
    fn default() -> Self {
        Self {
            samples: 100_000,
            lo: 1.0,
            hi: 1e3,
            seed: 0,
            same_sign: false,
            max_spread: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MultiplierCheck {
    /// Dyadic scale of the commutator identity.
    pub n: f64,
    /// Grid size for the commutator fields; the check ignores `grid.n`.
    pub points: usize,
    pub seeds: u64,
    pub tolerance: f64,
    pub kmax: i64,
    /// Highest derivative order in the Marcinkiewicz checks.
    pub beta_max: u32,
}

impl Default for MultiplierCheck {
    fn default() -> Self {
        Self {
            n: 64.0,
            points: 512,
            seeds: 20,
            tolerance: 1e-8,
            kmax: 160,
            beta_max: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyCheck {
    /// Random unit-norm fields for the coercivity search.
    pub fields: usize,
    pub seed: u64,
    pub kmax: i64,
    pub difference: bool,
}

impl Default for EnergyCheck {
    fn default() -> Self {
        Self {
            fields: 10,
            seed: 0,
            kmax: 80,
            difference: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Checks {
    pub symbol: SymbolCheck,
    pub resonance: ResonanceCheck,
    pub multiplier: MultiplierCheck,
    pub energy: EnergyCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    pub dts: Vec<f64>,
    pub min_slope: f64,
    pub max_slope: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            dts: vec![4e-3, 2e-3, 1e-3],
            min_slope: 3.7,
            max_slope: 4.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    /// Resume from a field snapshot written by a previous run.
    pub resume_from: Option<PathBuf>,
    /// Time of the resumed snapshot.
    pub resume_time: f64,
    /// Write a field snapshot every this many records; 0 disables.
    pub snapshot_every: usize,
}

/// Full configuration of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: String,
    pub equation: EquationConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub time: SolverConfig,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub diagnostics: Diagnostics,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default)]
    pub experiment: Option<ExperimentKind>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.equation.symbol()?;
        self.grid.grid()?;
        self.time.validate()?;
        if !(self.diagnostics.n0 >= 2.0) {
            return Err(Error::config("diagnostics.n0 must be at least 2"));
        }
        Ok(())
    }

    pub fn symbol(&self) -> Result<DispersionSymbol> {
        self.equation.symbol()
    }

    pub fn grid(&self) -> Result<SpectralGrid> {
        self.grid.grid()
    }

    pub fn initial_field(&self) -> Result<Field> {
        self.initial.build(self.grid()?)
    }

    /// The resolved config with every default written out.
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
