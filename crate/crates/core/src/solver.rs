//! Time integration of `∂ₜu + L u = ∂ₓ(u²)` on the torus.
//!
//! In Fourier variables `∂ₜĉ = −iω(ξ)ĉ + iξ (u²)^`. The linear part is
//! diagonal and is integrated exactly, either through an integrating factor
//! (classical RK4 on `e^{iωt}ĉ`) or with exponential time differencing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionSymbol;
use crate::energies::{modified_energy, EnergyReport};
use crate::error::{Error, Result};
use crate::spectral::{fft_forward, fft_inverse, Field, RecordMetadata, TrajectoryRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Ifrk4,
    Etdrk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_final: f64,
    pub record_every: usize,
    pub dealias: bool,
    /// Drop `∂ₓ(u²)` and run the free flow.
    pub nonlinear: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::new(Scheme::Ifrk4, 1e-3, 1.0)
    }
}

impl SolverConfig {
    pub fn new(scheme: Scheme, dt: f64, t_final: f64) -> Self {
        Self {
            scheme,
            dt,
            t_final,
            record_every: 1,
            dealias: true,
            nonlinear: true,
        }
    }

    pub fn with_record_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    pub fn linear(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::config(format!(
                "t_final must be positive, got {}",
                self.t_final
            )));
        }
        if self.record_every == 0 {
            return Err(Error::config("record_every must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps; `steps · dt` is within half a step of `t_final`.
    pub fn steps(&self) -> usize {
        ((self.t_final / self.dt).round() as usize).max(1)
    }
}

/// Coefficients larger than this count as blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// Contour points for the ETDRK4 coefficients.
const ETD_CONTOUR: usize = 32;

/// Precomputed propagators for one `(grid, symbol, config)`.
pub struct Stepper {
    cfg: SolverConfig,
    xi: Vec<f64>,
    nyquist: usize,
    kmax: i64,
    wavenumbers: Vec<i64>,
    half: Vec<Complex64>,
    full: Vec<Complex64>,
    etd: Option<EtdCoefficients>,
    scratch: Vec<Complex64>,
}

struct EtdCoefficients {
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

impl EtdCoefficients {
    fn new(omega: &[f64], h: f64) -> Self {
        let m = ETD_CONTOUR;
        let roots: Vec<Complex64> = (0..m)
            .map(|j| Complex64::from_polar(1.0, std::f64::consts::PI * (j as f64 + 0.5) / m as f64 * 2.0))
            .collect();
        let mut q = Vec::with_capacity(omega.len());
        let mut f1 = Vec::with_capacity(omega.len());
        let mut f2 = Vec::with_capacity(omega.len());
        let mut f3 = Vec::with_capacity(omega.len());
        for &w in omega {
            let lh = Complex64::new(0.0, -w * h);
            let (mut a, mut b, mut c, mut d) = (Complex64::default(), Complex64::default(), Complex64::default(), Complex64::default());
            for r in &roots {
                let z = lh + r;
                let ez = z.exp();
                let z3 = z * z * z;
                a += ((z / 2.0).exp() - 1.0) / z;
                b += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                c += (2.0 + z + ez * (z - 2.0)) / z3;
                d += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
            }
            let s = h / m as f64;
            q.push(a * s);
            f1.push(b * s);
            f2.push(c * s);
            f3.push(d * s);
        }
        Self { q, f1, f2, f3 }
    }
}

impl Stepper {
    pub fn new(grid: &crate::spectral::SpectralGrid, sym: &DispersionSymbol, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let xi = grid.frequencies();
        let omega = sym.omega_table(grid);
        let half = omega
            .iter()
            .map(|&w| Complex64::from_polar(1.0, -w * cfg.dt / 2.0))
            .collect();
        let full = omega
            .iter()
            .map(|&w| Complex64::from_polar(1.0, -w * cfg.dt))
            .collect();
        let etd = match cfg.scheme {
            Scheme::Etdrk4 => Some(EtdCoefficients::new(&omega, cfg.dt)),
            Scheme::Ifrk4 => None,
        };
        Ok(Self {
            cfg: cfg.clone(),
            nyquist: grid.nyquist_index(),
            kmax: grid.dealias_cutoff(),
            wavenumbers: (0..grid.n()).map(|j| grid.wavenumber(j)).collect(),
            xi,
            half,
            full,
            etd,
            scratch: vec![Complex64::default(); grid.n()],
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// `iξ (u²)^`, truncated to `|k| <= n/3` when dealiasing.
    fn nonlinear(&mut self, c: &[Complex64], out: &mut [Complex64]) {
        if !self.cfg.nonlinear {
            out.iter_mut().for_each(|o| *o = Complex64::default());
            return;
        }
        let n = c.len();
        let s = &mut self.scratch;
        for j in 0..n {
            let keep = !self.cfg.dealias || self.wavenumbers[j].abs() <= self.kmax;
            s[j] = if keep && j != self.nyquist { c[j] } else { Complex64::default() };
        }
        fft_inverse(s);
        for v in s.iter_mut() {
            *v = Complex64::new(v.re * v.re, 0.0);
        }
        fft_forward(s);
        let scale = 1.0 / n as f64;
        for j in 0..n {
            let keep = !self.cfg.dealias || self.wavenumbers[j].abs() <= self.kmax;
            out[j] = if keep && j != self.nyquist {
                Complex64::new(0.0, self.xi[j]) * s[j] * scale
            } else {
                Complex64::default()
            };
        }
    }

    /// Advance the coefficients by one step in place.
    pub fn advance(&mut self, c: &mut [Complex64]) {
        let n = c.len();
        let h = self.cfg.dt;
        let mut k1 = vec![Complex64::default(); n];
        let mut k2 = vec![Complex64::default(); n];
        let mut k3 = vec![Complex64::default(); n];
        let mut k4 = vec![Complex64::default(); n];
        let mut tmp = vec![Complex64::default(); n];
        let half = std::mem::take(&mut self.half);
        let full = std::mem::take(&mut self.full);
        match self.etd.take() {
            None => {
                self.nonlinear(c, &mut k1);
                for j in 0..n {
                    tmp[j] = half[j] * (c[j] + k1[j] * (h / 2.0));
                }
                self.nonlinear(&tmp, &mut k2);
                for j in 0..n {
                    tmp[j] = half[j] * c[j] + k2[j] * (h / 2.0);
                }
                self.nonlinear(&tmp, &mut k3);
                for j in 0..n {
                    tmp[j] = full[j] * c[j] + half[j] * k3[j] * h;
                }
                self.nonlinear(&tmp, &mut k4);
                for j in 0..n {
                    c[j] = full[j] * c[j]
                        + (full[j] * k1[j] + half[j] * (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
                }
            }
            Some(e) => {
                let mut a = vec![Complex64::default(); n];
                let mut b = vec![Complex64::default(); n];
                self.nonlinear(c, &mut k1);
                for j in 0..n {
                    a[j] = half[j] * c[j] + e.q[j] * k1[j];
                }
                self.nonlinear(&a, &mut k2);
                for j in 0..n {
                    b[j] = half[j] * c[j] + e.q[j] * k2[j];
                }
                self.nonlinear(&b, &mut k3);
                for j in 0..n {
                    tmp[j] = half[j] * a[j] + e.q[j] * (k3[j] * 2.0 - k1[j]);
                }
                self.nonlinear(&tmp, &mut k4);
                for j in 0..n {
                    c[j] = full[j] * c[j]
                        + k1[j] * e.f1[j]
                        + (k2[j] + k3[j]) * e.f2[j] * 2.0
                        + k4[j] * e.f3[j];
                }
                self.etd = Some(e);
            }
        }
        c[self.nyquist] = Complex64::default();
        self.half = half;
        self.full = full;
    }
}

fn blown_up(c: &[Complex64]) -> bool {
    c.iter()
        .any(|z| !(z.re.is_finite() && z.im.is_finite()) || z.norm() > BLOWUP_THRESHOLD)
}

/// One step of the configured scheme.
pub fn step(u: &Field, sym: &DispersionSymbol, cfg: &SolverConfig) -> Result<Field> {
    let mut stepper = Stepper::new(u.grid(), sym, cfg)?;
    let mut c = u.coeffs().to_vec();
    stepper.advance(&mut c);
    if blown_up(&c) {
        let mut partial = TrajectoryRecord::new(*u.grid());
        partial.push(0.0, u.clone())?;
        return Err(Error::BlowUp {
            last_valid_time: 0.0,
            partial: Box::new(partial),
        });
    }
    Field::from_coeffs(*u.grid(), c)
}

/// `∂ₜu = −Lu + ∂ₓ(u²)` with the nonlinearity exactly as the stepper forms it.
pub fn time_derivative(u: &Field, sym: &DispersionSymbol, cfg: &SolverConfig) -> Result<Field> {
    let mut stepper = Stepper::new(u.grid(), sym, cfg)?;
    let mut nl = vec![Complex64::default(); u.grid().n()];
    stepper.nonlinear(u.coeffs(), &mut nl);
    let grid = u.grid();
    let c: Vec<Complex64> = u
        .coeffs()
        .iter()
        .zip(&nl)
        .enumerate()
        .map(|(j, (c, n))| Complex64::new(0.0, -sym.omega(grid.frequency(j))) * c + n)
        .collect();
    let mut f = Field::from_coeffs(*grid, c)?;
    f.coeffs_mut()[grid.nyquist_index()] = Complex64::default();
    Ok(f)
}

/// `u(x) ↦ u(−x)`.
pub fn reflect(u: &Field) -> Field {
    let n = u.grid().n();
    let c = u.coeffs();
    Field::from_coeffs(*u.grid(), (0..n).map(|j| c[(n - j) % n]).collect())
        .expect("same grid")
}

/// State at time `−cfg.t_final` from `u` at time zero.
///
/// If `u(x, t)` solves the equation then so does `u(−x, −t)`, so the
/// backward flow is the forward flow conjugated by [`reflect`].
pub fn evolve_backward(u: &Field, sym: &DispersionSymbol, cfg: &SolverConfig) -> Result<Field> {
    let mut c = cfg.clone();
    c.record_every = usize::MAX;
    let out = run(&reflect(u), sym, &c, None)?;
    Ok(reflect(out.record.last().expect("at least one snapshot").1))
}

/// State at time `cfg.t_final`.
pub fn evolve(u: &Field, sym: &DispersionSymbol, cfg: &SolverConfig) -> Result<Field> {
    let mut c = cfg.clone();
    c.record_every = usize::MAX;
    let out = run(u, sym, &c, None)?;
    Ok(out.record.last().expect("at least one snapshot").1.clone())
}

/// Parameters of the modified energy reported alongside a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyDiagnostics {
    pub s: f64,
    pub n0: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: TrajectoryRecord,
    pub energies: Vec<EnergyReport>,
}

/// Integrate from `u0` at time zero to `cfg.t_final`.
pub fn run(
    u0: &Field,
    sym: &DispersionSymbol,
    cfg: &SolverConfig,
    diag: Option<EnergyDiagnostics>,
) -> Result<RunOutput> {
    run_from(u0, 0.0, sym, cfg, diag, |_, _, _| Ok(()))
}

/// Integrate from `u0` at time `t0` up to `cfg.t_final`, calling `observe`
/// on every recorded snapshot (the initial one included).
///
/// On blow-up the error carries every snapshot recorded so far.
pub fn run_from(
    u0: &Field,
    t0: f64,
    sym: &DispersionSymbol,
    cfg: &SolverConfig,
    diag: Option<EnergyDiagnostics>,
    mut observe: impl FnMut(f64, &Field, Option<&EnergyReport>) -> Result<()>,
) -> Result<RunOutput> {
    let mut stepper = Stepper::new(u0.grid(), sym, cfg)?;
    if t0 >= cfg.t_final {
        return Err(Error::config(format!(
            "start time {t0} is not before t_final = {}",
            cfg.t_final
        )));
    }
    let grid = *u0.grid();
    let steps = (((cfg.t_final - t0) / cfg.dt).round() as usize).max(1);
    let record_every = cfg.record_every;
    let mut record = TrajectoryRecord::new(grid).with_metadata(RecordMetadata {
        symbol: Some(*sym),
        solver: Some(cfg.clone()),
    });
    let mut energies = Vec::new();
    let mut emit = |t: f64, u: Field, record: &mut TrajectoryRecord| -> Result<()> {
        let rep = match diag {
            Some(d) => Some(modified_energy(&u, sym, d.s, d.n0)?.at(t)),
            None => None,
        };
        observe(t, &u, rep.as_ref())?;
        if let Some(r) = rep {
            energies.push(r);
        }
        record.push(t, u)
    };
    emit(t0, u0.clone(), &mut record)?;
    let mut c = u0.coeffs().to_vec();
    for k in 1..=steps {
        stepper.advance(&mut c);
        if blown_up(&c) {
            let last_valid_time = record.last().map(|(t, _)| t).unwrap_or(t0);
            return Err(Error::BlowUp {
                last_valid_time,
                partial: Box::new(record),
            });
        }
        if k % record_every == 0 || k == steps {
            let t = t0 + k as f64 * cfg.dt;
            emit(t, Field::from_coeffs(grid, c.clone())?, &mut record)?;
        }
    }
    Ok(RunOutput { record, energies })
}

/// Rescaled-run comparison for a pure-power symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub lambda: f64,
    pub alpha: f64,
    /// `max_t ‖λ^α u(λ·, λ^{α+1}t) − v(·, t)‖_∞ / ‖v(·, t)‖_∞`.
    pub discrepancy: f64,
    /// `|‖u_λ‖ − ‖u‖| / ‖u‖` in `Ḣ^{1/2−α}` at `t = 0`.
    pub critical_norm_defect: f64,
}

/// Compare the run from `u0` with the run from `λ^α u0(λ·)`.
///
/// The second run uses period `L/λ`, the same `n`, time step `dt/λ^{α+1}`
/// and final time `t_final/λ^{α+1}`, so both record at matched times.
pub fn scaling_check(
    u0: &Field,
    sym: &DispersionSymbol,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<ScalingReport> {
    if sym.kind != crate::dispersion::SymbolKind::PurePower {
        return Err(Error::config("scaling check needs a pure_power symbol"));
    }
    if !(lambda >= 1.0 && crate::littlewood_paley::is_dyadic(lambda)) {
        return Err(Error::config(format!("lambda must be a power of two, got {lambda}")));
    }
    let a = sym.alpha;
    let grid = *u0.grid();
    let small = crate::spectral::SpectralGrid::new(grid.n(), grid.length() / lambda)?;
    // same coefficients on the shorter period: λ^α u0(λx)
    let v0 = Field::from_coeffs(small, u0.coeffs().iter().map(|c| c * lambda.powf(a)).collect())?;
    let crit = sym.scaling_critical_index();
    let nu = u0.homogeneous_sobolev_norm(crit);
    let nv = v0.homogeneous_sobolev_norm(crit);
    let critical_norm_defect = if nu == 0.0 { (nv - nu).abs() } else { (nv - nu).abs() / nu };
    let time_scale = lambda.powf(a + 1.0);
    let mut cfg_v = cfg.clone();
    cfg_v.dt = cfg.dt / time_scale;
    cfg_v.t_final = cfg.t_final / time_scale;
    let ru = run(u0, sym, cfg, None)?.record;
    let rv = run(&v0, sym, &cfg_v, None)?.record;
    let mut discrepancy: f64 = 0.0;
    for (fu, fv) in ru.snapshots().iter().zip(rv.snapshots()) {
        let scaled = Field::from_coeffs(small, fu.coeffs().iter().map(|c| c * lambda.powf(a)).collect())?;
        let su = scaled.to_samples();
        let sv = fv.to_samples();
        let diff = su.iter().zip(&sv).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let norm = sv.iter().map(|y| y.abs()).fold(0.0, f64::max);
        discrepancy = discrepancy.max(if norm == 0.0 { diff } else { diff / norm });
    }
    Ok(ScalingReport {
        lambda,
        alpha: a,
        discrepancy,
        critical_norm_defect,
    })
}

/// Self-convergence of the integrator over a list of time steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    /// `‖u_dt(T) − u_ref(T)‖_{L²}` against a run with `dt_min / 8`.
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log dt`.
    pub slope: f64,
}

pub fn convergence_study(
    u0: &Field,
    sym: &DispersionSymbol,
    cfg: &SolverConfig,
    dts: &[f64],
) -> Result<ConvergenceReport> {
    if dts.len() < 2 {
        return Err(Error::config("convergence study needs at least two time steps"));
    }
    for &dt in dts {
        let steps = (cfg.t_final / dt).round();
        if !(dt > 0.0) || (steps * dt - cfg.t_final).abs() > 1e-9 * cfg.t_final {
            return Err(Error::config(format!(
                "dt = {dt} does not divide t_final = {}",
                cfg.t_final
            )));
        }
    }
    let final_state = |dt: f64| -> Result<Field> {
        let mut c = cfg.clone();
        c.dt = dt;
        c.record_every = usize::MAX;
        let out = run(u0, sym, &c, None)?;
        Ok(out.record.last().unwrap().1.clone())
    };
    let dt_min = dts.iter().cloned().fold(f64::INFINITY, f64::min);
    let reference = final_state(dt_min / 8.0)?;
    let mut errors = Vec::with_capacity(dts.len());
    for &dt in dts {
        errors.push((&final_state(dt)? - &reference).l2_norm());
    }
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    Ok(ConvergenceReport {
        dts: dts.to_vec(),
        errors,
        slope: least_squares_slope(&xs, &ys),
    })
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
