//! Smooth dyadic cutoffs and the frequency and modulation projectors built
//! from them.
//!
//! Dyadic scales are powers of two stored as `f64`; on a long torus the
//! lowest nonzero frequency is below 1 and homogeneous ladders reach negative
//! exponents.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionSymbol;
use crate::error::{Error, Result};
use crate::io::CsvWriter;
use crate::spectral::{fft_forward, fft_inverse, Field, SpectralGrid, TrajectoryRecord};

fn g(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

fn g_prime(t: f64) -> f64 {
    if t > 0.0 {
        g(t) / (t * t)
    } else {
        0.0
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`.
fn step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = g(t);
        a / (a + g(1.0 - t))
    }
}

fn step_prime(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        return 0.0;
    }
    let (a, b) = (g(t), g(1.0 - t));
    (g_prime(t) * b + a * g_prime(1.0 - t)) / ((a + b) * (a + b))
}

/// `η`: 1 on `[−1, 1]`, 0 outside `(−2, 2)`.
pub fn eta(xi: f64) -> f64 {
    step(2.0 - xi.abs())
}

pub fn eta_prime(xi: f64) -> f64 {
    -xi.signum() * step_prime(2.0 - xi.abs())
}

/// `φ(ξ) = η(ξ) − η(2ξ)`, supported in `1/2 < |ξ| < 2`.
pub fn phi(xi: f64) -> f64 {
    eta(xi) - eta(2.0 * xi)
}

pub fn phi_prime(xi: f64) -> f64 {
    eta_prime(xi) - 2.0 * eta_prime(2.0 * xi)
}

/// `φ_N(ξ) = φ(ξ/N)`.
pub fn phi_n(n: f64, xi: f64) -> f64 {
    phi(xi / n)
}

/// Fattened band cutoff: 1 on `3/8 <= |ξ| <= 8/3`, 0 outside `(1/4, 4)`.
///
/// The plateau covers every `ξ₂` with `|ξ₁ + ξ₂| ∈ [1/2, 2]` and
/// `|ξ₁| <= 1/16`, so `φ̃_N(ξ₂) φ_N(ξ₁+ξ₂) = φ_N(ξ₁+ξ₂)` on the low-high
/// interactions used by the correctors.
pub fn tilde_phi(xi: f64) -> f64 {
    let a = xi.abs();
    step((a - 0.25) * 8.0) * step((4.0 - a) * 0.75)
}

pub fn tilde_phi_n(n: f64, xi: f64) -> f64 {
    tilde_phi(xi / n)
}

/// Modulation cutoff `ψ_L(x)` with `x = τ − ω(ξ)`: `η(x)` for `L = 1`,
/// `φ_L(x)` for `L >= 2`.
pub fn psi(l: f64, x: f64) -> f64 {
    if l <= 1.0 {
        eta(x)
    } else {
        phi_n(l, x)
    }
}

/// Is `x` an integer power of two (negative exponents allowed)?
pub fn is_dyadic(x: f64) -> bool {
    x > 0.0 && x.is_finite() && {
        let e = x.log2().round();
        2f64.powi(e as i32) == x
    }
}

fn require_dyadic(n: f64) -> Result<()> {
    if is_dyadic(n) {
        Ok(())
    } else {
        Err(Error::config(format!("{n} is not a dyadic scale")))
    }
}

/// Dyadic scales covering the nonzero frequencies of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicLadder {
    scales: Vec<f64>,
    homogeneous: bool,
}

impl DyadicLadder {
    /// Homogeneous ladder from the largest scale `<= min |ξ|` to the smallest
    /// scale `>= max |ξ|`, so `Σ_N φ_N = 1` at every nonzero grid frequency.
    pub fn homogeneous(grid: &SpectralGrid) -> Self {
        let xi_min = grid.xi_of(1);
        let xi_max = grid.xi_of((grid.n() / 2) as i64);
        let lo = xi_min.log2().floor() as i32;
        let hi = xi_max.log2().ceil() as i32;
        Self {
            scales: (lo..=hi).map(|e| 2f64.powi(e)).collect(),
            homogeneous: true,
        }
    }

    /// Nonhomogeneous ladder `1, 2, 4, …`; the scale 1 carries `η`, which
    /// keeps the mean and every frequency below 1 together.
    pub fn nonhomogeneous(grid: &SpectralGrid) -> Self {
        let xi_max = grid.xi_of((grid.n() / 2) as i64);
        let hi = xi_max.log2().ceil().max(0.0) as i32;
        Self {
            scales: (0..=hi).map(|e| 2f64.powi(e)).collect(),
            homogeneous: false,
        }
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    /// The cutoff attached to scale `n` in this ladder.
    pub fn cutoff(&self, n: f64, xi: f64) -> f64 {
        if !self.homogeneous && n <= 1.0 {
            eta(xi)
        } else {
            phi_n(n, xi)
        }
    }

    /// `Σ_N` of the ladder cutoffs at `ξ`.
    pub fn sum(&self, xi: f64) -> f64 {
        self.scales.iter().map(|&n| self.cutoff(n, xi)).sum()
    }

    pub fn piece(&self, f: &Field, n: f64) -> Field {
        f.apply_real_multiplier(|xi| self.cutoff(n, xi))
            .expect("cutoffs are finite")
    }
}

/// `P_N f`: multiply by `φ_N`.
pub fn project(f: &Field, n: f64) -> Result<Field> {
    require_dyadic(n)?;
    f.apply_real_multiplier(|xi| phi_n(n, xi))
}

/// Frequency bands relative to a dyadic scale `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    /// `P_{≤N}`, symbol `η(ξ/N)`; keeps the mean.
    Le,
    /// `P_{≥N} = Σ_{K≥N} P_K`, symbol `1 − η(2ξ/N)`.
    Ge,
    /// `P_{∼N}`, symbol `φ̃_N`.
    Sim,
    /// `P_{≲N} = P_{≤4N}`.
    Lesssim,
    /// `P_{≳N} = P_{≥N/4}`.
    Gtrsim,
    /// `P_{≪N} = P_{≤N/32}`, supported in `|ξ| <= N/16`.
    Ll,
}

impl Band {
    pub fn symbol(self, n: f64, xi: f64) -> f64 {
        match self {
            Band::Le => eta(xi / n),
            Band::Ge => 1.0 - eta(2.0 * xi / n),
            Band::Sim => tilde_phi_n(n, xi),
            Band::Lesssim => eta(xi / (4.0 * n)),
            Band::Gtrsim => 1.0 - eta(8.0 * xi / n),
            Band::Ll => eta(32.0 * xi / n),
        }
    }
}

pub fn project_band(f: &Field, band: Band, n: f64) -> Result<Field> {
    require_dyadic(n)?;
    f.apply_real_multiplier(|xi| band.symbol(n, xi))
}

/// Windowed space-time transform of a uniformly sampled record.
///
/// `data[q * n + j]` is `(1/M) Σ_m w_m c_j(t_m) e^{+iτ_q t_m}`, so a free
/// wave `c_j(t) = e^{−iω t}` peaks at `τ = ω(ξ_j)`.
#[derive(Debug, Clone)]
pub struct SpaceTime {
    pub grid: SpectralGrid,
    pub dt: f64,
    pub m: usize,
    pub data: Vec<Complex64>,
    pub window: Vec<f64>,
}

impl SpaceTime {
    /// Temporal frequency of row `q`.
    pub fn tau(&self, q: usize) -> f64 {
        let m = self.m as i64;
        let q = q as i64;
        let signed = if q <= m / 2 { q } else { q - m };
        std::f64::consts::TAU * signed as f64 / (m as f64 * self.dt)
    }
}

/// Raised-cosine taper over the first and last 10% of `m` samples.
pub fn time_window(m: usize) -> Vec<f64> {
    let ramp = ((m as f64) * 0.1).floor() as usize;
    (0..m)
        .map(|i| {
            let d = i.min(m - 1 - i);
            if ramp == 0 || d >= ramp {
                1.0
            } else {
                0.5 * (1.0 - (std::f64::consts::PI * d as f64 / ramp as f64).cos())
            }
        })
        .collect()
}

pub fn space_time_transform(r: &TrajectoryRecord) -> Result<SpaceTime> {
    let dt = r.uniform_step()?;
    let m = r.len();
    let n = r.grid().n();
    let window = time_window(m);
    let mut data = vec![Complex64::new(0.0, 0.0); m * n];
    let mut column = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..n {
        for (i, snap) in r.snapshots().iter().enumerate() {
            column[i] = snap.coeffs()[j] * window[i];
        }
        fft_inverse(&mut column);
        for (q, c) in column.iter().enumerate() {
            data[q * n + j] = c / m as f64;
        }
    }
    Ok(SpaceTime {
        grid: *r.grid(),
        dt,
        m,
        data,
        window,
    })
}

/// Invert [`space_time_transform`] after multiplying by `weight(ξ, τ)`.
/// The temporal window is not undone.
fn filtered_record(
    r: &TrajectoryRecord,
    st: &SpaceTime,
    weight: impl Fn(f64, f64) -> f64,
) -> TrajectoryRecord {
    let n = st.grid.n();
    let m = st.m;
    let mut out: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; m];
    let mut column = vec![Complex64::new(0.0, 0.0); m];
    for j in 0..n {
        let xi = st.grid.frequency(j);
        for q in 0..m {
            column[q] = st.data[q * n + j] * weight(xi, st.tau(q));
        }
        fft_forward(&mut column);
        for (i, c) in column.iter().enumerate() {
            out[i][j] = *c;
        }
    }
    let mut coeffs = out.into_iter();
    let rec = r.map_snapshots(|_| {
        Field::from_coeffs(st.grid, coeffs.next().expect("one row per snapshot"))
            .expect("row length matches the grid")
    });
    rec
}

/// `Q_L r`: multiply the space-time transform by `ψ_L(τ − ω(ξ))`.
pub fn modulation_project(
    r: &TrajectoryRecord,
    l: f64,
    sym: &DispersionSymbol,
) -> Result<TrajectoryRecord> {
    if !(l >= 1.0 && is_dyadic(l)) {
        return Err(Error::config(format!("modulation scale must be dyadic and >= 1, got {l}")));
    }
    let st = space_time_transform(r)?;
    Ok(filtered_record(r, &st, |xi, tau| psi(l, tau - sym.omega(xi))))
}

/// `Q_{≤L} r`: multiply by `η((τ − ω(ξ))/L)`.
pub fn modulation_project_le(
    r: &TrajectoryRecord,
    l: f64,
    sym: &DispersionSymbol,
) -> Result<TrajectoryRecord> {
    if !(l >= 1.0 && is_dyadic(l)) {
        return Err(Error::config(format!("modulation scale must be dyadic and >= 1, got {l}")));
    }
    let st = space_time_transform(r)?;
    Ok(filtered_record(r, &st, |xi, tau| eta((tau - sym.omega(xi)) / l)))
}

/// Modulation scales `1, 2, …` up to the first one `>= max |τ − ω|` on the
/// space-time grid of `r`.
pub fn modulation_ladder(st: &SpaceTime, sym: &DispersionSymbol) -> Vec<f64> {
    let mut top = 0.0f64;
    for q in 0..st.m {
        for j in 0..st.grid.n() {
            top = top.max((st.tau(q) - sym.omega(st.grid.frequency(j))).abs());
        }
    }
    let hi = top.log2().ceil().max(0.0) as i32;
    (0..=hi).map(|e| 2f64.powi(e)).collect()
}

/// Largest `|Σ_L ψ_L − 1|` over the space-time grid of `r`.
pub fn modulation_partition_defect(r: &TrajectoryRecord, sym: &DispersionSymbol) -> Result<f64> {
    let st = space_time_transform(r)?;
    let ladder = modulation_ladder(&st, sym);
    let mut worst = 0.0f64;
    for q in 0..st.m {
        for j in 0..st.grid.n() {
            let x = st.tau(q) - sym.omega(st.grid.frequency(j));
            let s: f64 = ladder.iter().map(|&l| psi(l, x)).sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    Ok(worst)
}

/// Write `ξ, η(ξ), φ_{N_1}(ξ), …` rows for plotting.
pub fn write_cutoff_table(out: impl Write, xis: &[f64], scales: &[f64]) -> Result<()> {
    let names: Vec<String> = std::iter::once("xi".to_string())
        .chain(std::iter::once("eta".to_string()))
        .chain(scales.iter().map(|n| format!("phi_{n}")))
        .collect();
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut w = CsvWriter::new(out, &header)?;
    for &xi in xis {
        let mut row = vec![xi, eta(xi)];
        row.extend(scales.iter().map(|&n| phi_n(n, xi)));
        w.row(&row)?;
    }
    w.flush()
}
