//! Scripted experiments tying the solver to the analytic objects.
//!
//! Each experiment writes `spec.json` (the resolved config), `results.csv`
//! and `summary.json` into its own directory. The X^{s,b} and Strichartz
//! numbers are torus proxies; no inequality is asserted for them.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{Diagnostics, InitialData, RunConfig};
use crate::dispersion::DispersionSymbol;
use crate::energies::{corrector_e1, corrector_e1_rate, hbar_norm, modified_energy, check_sigma};
use crate::error::{Error, Result};
use crate::io::{write_json_pretty, CsvWriter};
use crate::littlewood_paley::{project, space_time_transform};
use crate::solver::{evolve, evolve_backward, run, time_derivative, SolverConfig};
use crate::spectral::{Field, SpectralGrid, TrajectoryRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LipschitzParams {
    /// Perturbation sizes, decreasing.
    pub epsilons: Vec<f64>,
    pub t_prime: f64,
    /// Fixed perturbation profile `p`.
    pub profile: InitialData,
    pub max_ratio: f64,
    /// Largest admissible `(max − min)/min` of the final ratios.
    pub max_variation: f64,
    /// Admissible window for the measured residual order.
    pub order_window: [f64; 2],
}

impl Default for LipschitzParams {
    fn default() -> Self {
        Self {
            epsilons: vec![1e-2, 1e-3, 1e-4],
            t_prime: 0.5,
            profile: InitialData::random_hs(1.0, 0.0, 16, 101),
            max_ratio: 10.0,
            max_variation: 0.5,
            order_window: [1.8, 2.2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriftParams {
    /// Finite-difference steps of the chain-rule check.
    pub deltas: Vec<f64>,
    /// Dyadic scale of the check; `None` picks the largest corrector.
    pub scale: Option<f64>,
    pub order_window: [f64; 2],
}

impl Default for DriftParams {
    fn default() -> Self {
        Self {
            deltas: vec![1e-3, 5e-4],
            scale: None,
            order_window: [1.8, 2.2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct XsbParams {
    /// Values of `b` tabulated next to the configured one.
    pub extra_b: Vec<f64>,
}

impl Default for XsbParams {
    fn default() -> Self {
        Self {
            extra_b: vec![0.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrichartzParams {
    pub scales: Vec<f64>,
    /// Members of the random ensemble, seeded from `initial.seed`.
    pub ensemble: usize,
    pub t_max: f64,
    /// Time samples of the quadrature.
    pub times: usize,
}

impl Default for StrichartzParams {
    fn default() -> Self {
        Self {
            scales: vec![4.0, 8.0, 16.0, 32.0, 64.0, 128.0],
            ensemble: 4,
            t_max: 1.0,
            times: 257,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentKind {
    Lipschitz(LipschitzParams),
    EnergyDrift(DriftParams),
    Xsb(XsbParams),
    Strichartz(StrichartzParams),
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Lipschitz(_) => "lipschitz",
            ExperimentKind::EnergyDrift(_) => "energy_drift",
            ExperimentKind::Xsb(_) => "xsb",
            ExperimentKind::Strichartz(_) => "strichartz",
        }
    }
}

/// Everything an experiment needs, resolved from a [`RunConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub symbol: DispersionSymbol,
    pub grid: SpectralGrid,
    pub initial: InitialData,
    pub solver: SolverConfig,
    pub diagnostics: Diagnostics,
    pub kind: ExperimentKind,
}

impl ExperimentSpec {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let kind = cfg
            .experiment
            .clone()
            .ok_or_else(|| Error::config("missing `experiment` section"))?;
        Ok(Self {
            name: if cfg.name.is_empty() {
                kind.name().to_string()
            } else {
                cfg.name.clone()
            },
            symbol: cfg.symbol()?,
            grid: cfg.grid()?,
            initial: cfg.initial.clone(),
            solver: cfg.time.clone(),
            diagnostics: cfg.diagnostics,
            kind,
        })
    }
}

/// One named property of an experiment; `pass` is `None` for reported data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Property {
    pub name: String,
    pub value: f64,
    pub pass: Option<bool>,
}

impl Property {
    fn checked(name: &str, value: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            pass: Some(pass),
        }
    }

    fn reported(name: &str, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
            pass: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub kind: String,
    pub properties: Vec<Property>,
    pub pass: bool,
}

impl ExperimentSummary {
    fn new(name: &str, kind: &str, properties: Vec<Property>) -> Self {
        let pass = properties.iter().all(|p| p.pass != Some(false));
        Self {
            name: name.into(),
            kind: kind.into(),
            properties,
            pass,
        }
    }

    pub fn failed(&self) -> Vec<&str> {
        self.properties
            .iter()
            .filter(|p| p.pass == Some(false))
            .map(|p| p.name.as_str())
            .collect()
    }
}

/// Run to `T`, keeping what was recorded if the run blows up.
fn run_tolerant(u0: &Field, sym: &DispersionSymbol, cfg: &SolverConfig) -> Result<(TrajectoryRecord, bool)> {
    match run(u0, sym, cfg, None) {
        Ok(out) => Ok((out.record, false)),
        Err(Error::BlowUp { partial, .. }) => Ok((*partial, true)),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzRow {
    pub epsilon: f64,
    /// `‖w(T′)‖/‖w(0)‖` in `H̄^σ`.
    pub ratio_final: f64,
    pub ratio_max: f64,
    pub blow_up: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualCheck {
    pub dt: f64,
    /// Largest `‖∂ₜw + Lw − ∂ₓ(zw)‖_{L²}` at `dt` and `dt/2`.
    pub residual: [f64; 2],
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzTable {
    pub rows: Vec<LipschitzRow>,
    /// `(ε, t, ratio)` for every recorded time.
    pub curves: Vec<(f64, f64, f64)>,
    pub residual: Option<ResidualCheck>,
}

/// Largest residual of the difference equation, with `∂ₜw` by centered
/// differences between consecutive records.
pub fn difference_residual(u: &TrajectoryRecord, v: &TrajectoryRecord, sym: &DispersionSymbol) -> Result<f64> {
    let h = u.uniform_step()?;
    if v.times() != u.times() {
        return Err(Error::config("records are not sampled at the same times"));
    }
    let (su, sv) = (u.snapshots(), v.snapshots());
    let mut worst = 0.0f64;
    for i in 1..su.len().saturating_sub(1) {
        let w = &su[i] - &sv[i];
        let z = &su[i] + &sv[i];
        let fd = (&(&su[i + 1] - &sv[i + 1]) - &(&su[i - 1] - &sv[i - 1])).scaled(0.5 / h);
        let lw = w.apply_multiplier(|xi| Complex64::new(0.0, sym.omega(xi)))?;
        let flux = z.dealiased_product(&w).derivative();
        worst = worst.max((&(&fd + &lw) - &flux).l2_norm());
    }
    Ok(worst)
}

pub fn difference_experiment(spec: &ExperimentSpec, epsilons: &[f64]) -> Result<LipschitzTable> {
    let params = match &spec.kind {
        ExperimentKind::Lipschitz(p) => p.clone(),
        _ => LipschitzParams::default(),
    };
    let sym = &spec.symbol;
    let d = spec.diagnostics;
    check_sigma(sym.alpha, d.s, d.sigma)?;
    if epsilons.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::config("perturbation sizes must decrease"));
    }
    let u0 = spec.initial.build(spec.grid)?;
    let p = params.profile.build(spec.grid)?;
    let mut cfg = spec.solver.clone();
    cfg.t_final = params.t_prime;
    let (ru, u_blew) = run_tolerant(&u0, sym, &cfg)?;
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for &eps in epsilons {
        if eps == 0.0 {
            rows.push(LipschitzRow {
                epsilon: 0.0,
                ratio_final: 1.0,
                ratio_max: 1.0,
                blow_up: u_blew,
            });
            continue;
        }
        let (rv, v_blew) = run_tolerant(&(&u0 + &p.scaled(eps)), sym, &cfg)?;
        let len = ru.len().min(rv.len());
        let w0 = hbar_norm(&(&ru.snapshots()[0] - &rv.snapshots()[0]), d.sigma);
        let mut ratio_max = 0.0f64;
        let mut ratio = 1.0;
        for i in 0..len {
            ratio = hbar_norm(&(&ru.snapshots()[i] - &rv.snapshots()[i]), d.sigma) / w0;
            ratio_max = ratio_max.max(ratio);
            curves.push((eps, ru.times()[i], ratio));
        }
        rows.push(LipschitzRow {
            epsilon: eps,
            ratio_final: ratio,
            ratio_max,
            blow_up: u_blew || v_blew,
        });
    }
    let residual = match epsilons.iter().find(|&&e| e != 0.0) {
        Some(&eps) if !u_blew => {
            let v0 = &u0 + &p.scaled(eps);
            let mut r = [0.0; 2];
            for (i, dt) in [cfg.dt, cfg.dt / 2.0].into_iter().enumerate() {
                let mut c = cfg.clone();
                c.dt = dt;
                c.record_every = 1;
                let ru = run(&u0, sym, &c, None)?.record;
                let rv = run(&v0, sym, &c, None)?.record;
                r[i] = difference_residual(&ru, &rv, sym)?;
            }
            Some(ResidualCheck {
                dt: cfg.dt,
                residual: r,
                order: (r[0] / r[1]).log2(),
            })
        }
        _ => None,
    };
    Ok(LipschitzTable {
        rows,
        curves,
        residual,
    })
}

fn lipschitz_summary(spec: &ExperimentSpec, params: &LipschitzParams, t: &LipschitzTable) -> Vec<Property> {
    let finals: Vec<f64> = t
        .rows
        .iter()
        .filter(|r| r.epsilon != 0.0)
        .map(|r| r.ratio_final)
        .collect();
    let max = finals.iter().cloned().fold(0.0, f64::max);
    let min = finals.iter().cloned().fold(f64::INFINITY, f64::min);
    let variation = if finals.is_empty() { 0.0 } else { (max - min) / min };
    let blow_up = t.rows.iter().any(|r| r.blow_up);
    let mut props = vec![
        Property::checked("no_blow_up", blow_up as u8 as f64, !blow_up),
        Property::checked("ratio_bounded", max, max <= params.max_ratio),
        Property::checked("ratio_stable", variation, variation < params.max_variation),
    ];
    if let Some(r) = &t.residual {
        let [lo, hi] = params.order_window;
        props.push(Property::checked("residual_order", r.order, r.order >= lo && r.order <= hi));
        props.push(Property::reported("residual_dt", r.residual[0]));
        props.push(Property::reported("residual_dt_half", r.residual[1]));
    }
    props.push(Property::reported("sigma", spec.diagnostics.sigma));
    props
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRuleCheck {
    pub n: f64,
    /// `dE¹_N/dt` from the equation.
    pub analytic: f64,
    pub deltas: Vec<f64>,
    /// `|(E¹_N(u(δ)) − E¹_N(u(−δ)))/(2δ) − analytic|` per `δ`.
    pub errors: Vec<f64>,
    /// Observed order in `δ`; `None` when the corrector vanishes identically.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftComparison {
    pub times: Vec<f64>,
    pub modified: Vec<f64>,
    pub plain: Vec<f64>,
    pub corrector_share: Vec<f64>,
    pub chain_rule: ChainRuleCheck,
    /// Largest relative change of any `E_N` over the run (free flow only).
    pub linear_variation: Option<f64>,
}

impl DriftComparison {
    pub fn modified_drift(&self) -> Vec<f64> {
        self.modified.iter().map(|e| (e - self.modified[0]).abs()).collect()
    }

    pub fn plain_drift(&self) -> Vec<f64> {
        self.plain.iter().map(|e| (e - self.plain[0]).abs()).collect()
    }
}

/// Compare `dE¹_N/dt` from the equation with centered differences of
/// `E¹_N` along the flow.
pub fn chain_rule_check(
    u: &Field,
    sym: &DispersionSymbol,
    cfg: &SolverConfig,
    s: f64,
    scale: Option<f64>,
    deltas: &[f64],
) -> Result<ChainRuleCheck> {
    let n = match scale {
        Some(n) => n,
        None => {
            let rep = modified_energy(u, sym, s, 2.0)?;
            rep.terms
                .iter()
                .filter(|t| t.n >= 2.0)
                .fold((0.0, 0.0f64), |best, t| {
                    if t.corrector.abs() > best.1 {
                        (t.n, t.corrector.abs())
                    } else {
                        best
                    }
                })
                .0
        }
    };
    if n == 0.0 {
        return Ok(ChainRuleCheck {
            n,
            analytic: 0.0,
            deltas: deltas.to_vec(),
            errors: vec![0.0; deltas.len()],
            rate: None,
        });
    }
    let udot = time_derivative(u, sym, cfg)?;
    let analytic = corrector_e1_rate(u, &udot, sym, s, n);
    let mut errors = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let mut c = cfg.clone();
        c.dt = delta;
        c.t_final = delta;
        let fwd = corrector_e1(&evolve(u, sym, &c)?, sym, s, n).0;
        let bwd = corrector_e1(&evolve_backward(u, sym, &c)?, sym, s, n).0;
        errors.push(((fwd - bwd) / (2.0 * delta) - analytic).abs());
    }
    let rate = if deltas.len() >= 2 {
        let k = deltas.len() - 1;
        Some((errors[0] / errors[k]).ln() / (deltas[0] / deltas[k]).ln())
    } else {
        None
    };
    Ok(ChainRuleCheck {
        n,
        analytic,
        deltas: deltas.to_vec(),
        errors,
        rate,
    })
}

pub fn modified_energy_drift(spec: &ExperimentSpec) -> Result<DriftComparison> {
    let params = match &spec.kind {
        ExperimentKind::EnergyDrift(p) => p.clone(),
        _ => DriftParams::default(),
    };
    let sym = &spec.symbol;
    let d = spec.diagnostics;
    if d.s <= sym.lwp_threshold() {
        return Err(Error::config(format!(
            "s = {} must exceed 3/2 - 5 alpha/4 = {}",
            d.s,
            sym.lwp_threshold()
        )));
    }
    let u0 = spec.initial.build(spec.grid)?;
    let out = run(&u0, sym, &spec.solver, None)?;
    let mut cmp = DriftComparison {
        times: vec![],
        modified: vec![],
        plain: vec![],
        corrector_share: vec![],
        chain_rule: chain_rule_check(&u0, sym, &spec.solver, d.s, params.scale, &params.deltas)?,
        linear_variation: None,
    };
    let mut first_terms: Option<Vec<f64>> = None;
    let mut variation = 0.0f64;
    for (&t, u) in out.record.times().iter().zip(out.record.snapshots()) {
        let rep = modified_energy(u, sym, d.s, d.n0)?;
        let e_n: Vec<f64> = rep
            .terms
            .iter()
            .map(|term| {
                term.plain
                    + if term.n > d.n0 {
                        crate::energies::CORRECTOR_C * term.corrector
                    } else {
                        0.0
                    }
            })
            .collect();
        match &first_terms {
            None => first_terms = Some(e_n),
            Some(e0) => {
                for (a, b) in e0.iter().zip(&e_n) {
                    if a.abs() > 0.0 {
                        variation = variation.max((b - a).abs() / a.abs());
                    }
                }
            }
        }
        cmp.times.push(t);
        cmp.plain.push(rep.plain_energy());
        cmp.modified.push(rep.modified);
        cmp.corrector_share.push(rep.corrector_share);
    }
    if !spec.solver.nonlinear {
        cmp.linear_variation = Some(variation);
    }
    Ok(cmp)
}

fn drift_summary(params: &DriftParams, c: &DriftComparison) -> Vec<Property> {
    let [lo, hi] = params.order_window;
    let mut props = vec![];
    match c.chain_rule.rate {
        Some(r) => props.push(Property::checked("chain_rule_rate", r, r >= lo && r <= hi)),
        None => props.push(Property::reported("chain_rule_rate", 0.0)),
    }
    props.push(Property::reported("chain_rule_scale", c.chain_rule.n));
    props.push(Property::reported(
        "max_modified_drift",
        c.modified_drift().into_iter().fold(0.0, f64::max),
    ));
    props.push(Property::reported(
        "max_plain_drift",
        c.plain_drift().into_iter().fold(0.0, f64::max),
    ));
    if let Some(v) = c.linear_variation {
        props.push(Property::reported("linear_energy_variation", v));
    }
    props
}

/// `‖r‖_{X^{s,b}}² = L·M·Δt Σ ⟨ξ⟩^{2s}⟨τ − ω(ξ)⟩^{2b} |r̃(τ, ξ)|²` over the
/// windowed space-time transform.
///
/// With `s = b = 0` this is `Δt Σ_m ‖w_m u(t_m)‖²_{L²}`.
pub fn xsb_norm(record: &TrajectoryRecord, sym: &DispersionSymbol, s: f64, b: f64) -> Result<f64> {
    let st = space_time_transform(record)?;
    let n = st.grid.n();
    let mut acc = 0.0;
    for q in 0..st.m {
        let tau = st.tau(q);
        for j in 0..n {
            let c = st.data[q * n + j];
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let xi = st.grid.frequency(j);
            let m = tau - sym.omega(xi);
            acc += (1.0 + xi * xi).powf(s) * (1.0 + m * m).powf(b) * c.norm_sqr();
        }
    }
    Ok((acc * st.grid.length() * st.m as f64 * st.dt).sqrt())
}

/// `(Δt Σ_m w_m² ‖u(t_m)‖²_{L²})^{1/2}` by quadrature in physical space.
pub fn windowed_l2(record: &TrajectoryRecord) -> Result<f64> {
    let dt = record.uniform_step()?;
    let w = crate::littlewood_paley::time_window(record.len());
    let dx = record.grid().dx();
    let s: f64 = record
        .snapshots()
        .iter()
        .zip(&w)
        .map(|(u, wm)| wm * wm * u.to_samples().iter().map(|v| v * v).sum::<f64>() * dx)
        .sum();
    Ok((s * dt).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzRow {
    pub n: f64,
    pub member: usize,
    /// `‖P_N D^{(α−1)/4} U(t)u₀‖_{L⁴_t L^∞_x} / ‖P_N u₀‖_{L²}`.
    pub ratio: f64,
}

/// Ratios over the free evolution on `[0, t_max]`; rows with an empty band
/// are skipped. The sup in `x` is taken on an 8× refined grid and the time
/// integral by the trapezoid rule on `times` points.
pub fn strichartz_ratio(
    sym: &DispersionSymbol,
    scales: &[f64],
    ensemble: &[Field],
    t_max: f64,
    times: usize,
) -> Result<Vec<StrichartzRow>> {
    if times < 2 || !(t_max > 0.0) {
        return Err(Error::config("need t_max > 0 and at least two time samples"));
    }
    let gamma = (sym.alpha - 1.0) / 4.0;
    let h = t_max / (times - 1) as f64;
    let mut rows = Vec::new();
    for (member, u0) in ensemble.iter().enumerate() {
        for &n in scales {
            let band = project(u0, n)?;
            let norm = band.l2_norm();
            if norm == 0.0 {
                continue;
            }
            let shaped = band.apply_real_multiplier(|xi| if xi == 0.0 { 0.0 } else { xi.abs().powf(gamma) })?;
            let sup4: Vec<f64> = (0..times)
                .map(|i| {
                    let t = i as f64 * h;
                    let v = shaped
                        .apply_multiplier(|xi| Complex64::from_polar(1.0, -sym.omega(xi) * t))
                        .expect("unimodular multiplier");
                    v.to_samples_refined(8).iter().fold(0.0f64, |m, x| m.max(x.abs())).powi(4)
                })
                .collect();
            let integral = h * (sup4.iter().sum::<f64>() - 0.5 * (sup4[0] + sup4[times - 1]));
            rows.push(StrichartzRow {
                n,
                member,
                ratio: integral.powf(0.25) / norm,
            });
        }
    }
    Ok(rows)
}

/// Run the experiment named in `cfg` and write `spec.json`, `results.csv`
/// and `summary.json` into `dir`.
pub fn run_to_dir(cfg: &RunConfig, dir: &Path) -> Result<ExperimentSummary> {
    let spec = ExperimentSpec::from_config(cfg)?;
    std::fs::create_dir_all(dir)?;
    let mut echo = cfg.clone();
    echo.output.dir = Some(dir.to_path_buf());
    std::fs::write(dir.join("spec.json"), echo.to_json_pretty() + "\n")?;
    let csv = dir.join("results.csv");
    let summary = match &spec.kind {
        ExperimentKind::Lipschitz(p) => {
            let t = difference_experiment(&spec, &p.epsilons)?;
            let mut w = CsvWriter::create(&csv, &["epsilon", "t", "ratio"])?;
            for &(e, t, r) in &t.curves {
                w.row(&[e, t, r])?;
            }
            w.flush()?;
            ExperimentSummary::new(&spec.name, "lipschitz", lipschitz_summary(&spec, p, &t))
        }
        ExperimentKind::EnergyDrift(p) => {
            let c = modified_energy_drift(&spec)?;
            let mut w = CsvWriter::create(
                &csv,
                &["t", "modified", "modified_drift", "plain", "plain_drift", "corrector_share"],
            )?;
            let (md, pd) = (c.modified_drift(), c.plain_drift());
            for i in 0..c.times.len() {
                w.row(&[c.times[i], c.modified[i], md[i], c.plain[i], pd[i], c.corrector_share[i]])?;
            }
            w.flush()?;
            ExperimentSummary::new(&spec.name, "energy_drift", drift_summary(p, &c))
        }
        ExperimentKind::Xsb(p) => {
            let u0 = spec.initial.build(spec.grid)?;
            let record = run(&u0, &spec.symbol, &spec.solver, None)?.record;
            let s = spec.diagnostics.s;
            let mut bs = vec![spec.diagnostics.b];
            bs.extend(p.extra_b.iter().copied());
            let mut w = CsvWriter::create(&csv, &["s", "b", "norm"])?;
            for &b in &bs {
                for s in [0.0, s] {
                    w.row(&[s, b, xsb_norm(&record, &spec.symbol, s, b)?])?;
                }
            }
            w.flush()?;
            let anchor = xsb_norm(&record, &spec.symbol, 0.0, 0.0)?;
            let direct = windowed_l2(&record)?;
            let defect = (anchor - direct).abs() / direct.max(f64::MIN_POSITIVE);
            ExperimentSummary::new(
                &spec.name,
                "xsb",
                vec![
                    Property::checked("l2_anchor", defect, defect < 1e-10),
                    Property::reported("norm", xsb_norm(&record, &spec.symbol, s, spec.diagnostics.b)?),
                ],
            )
        }
        ExperimentKind::Strichartz(p) => {
            let ensemble = (0..p.ensemble)
                .map(|i| {
                    let mut d = spec.initial.clone();
                    d.seed = d.seed.wrapping_add(i as u64);
                    d.build(spec.grid).map(|f| {
                        let mean_free = f.coeffs().iter().enumerate().map(|(j, c)| if j == 0 { Complex64::default() } else { *c }).collect();
                        Field::from_coeffs(spec.grid, mean_free).expect("same grid")
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let rows = strichartz_ratio(&spec.symbol, &p.scales, &ensemble, p.t_max, p.times)?;
            let mut w = CsvWriter::create(&csv, &["n", "member", "ratio"])?;
            for r in &rows {
                w.row(&[r.n, r.member as f64, r.ratio])?;
            }
            w.flush()?;
            let finite = rows.iter().all(|r| r.ratio.is_finite());
            ExperimentSummary::new(
                &spec.name,
                "strichartz",
                vec![
                    Property::checked("finite_ratios", rows.len() as f64, finite && !rows.is_empty()),
                ],
            )
        }
    };
    write_json_pretty(dir.join("summary.json"), &summary)?;
    Ok(summary)
}
