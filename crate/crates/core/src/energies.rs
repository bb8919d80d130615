//! Conserved functionals and the Fourier-defined modified energies.
//!
//! For `N > N₀` the dyadic energy `½‖P_N u‖²` is corrected by the cubic term
//!
//! ```text
//! E¹_N(u) = L Σ (χ₁/Ω₂)(ξ₁,ξ₂) ξ₁ a_{k₁} b_{k₂} b_{−k₁−k₂},
//! a = P_{≪N} u,  b = P_{∼N} u,
//! ```
//!
//! whose time derivative under the linear flow equals the low-high flux
//! `L Σ iχ₁ ξ₁ a b b` of `½‖P_N u‖²`. With `∂ₜĉ = −iωĉ` the flux enters
//! `d/dt ½‖P_N u‖²` with a plus sign, so the corrector is subtracted:
//! [`CORRECTOR_C`] is `−1`. The same computation for the difference
//! equation gives [`CORRECTOR_C1_TILDE`] `= +1` and [`CORRECTOR_C2_TILDE`] `= −1`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{check_hyp2, DispersionSymbol};
use crate::error::{Error, Result};
use crate::io::write_jsonl_row;
use crate::littlewood_paley::{project_band, Band, DyadicLadder};
use crate::multilinear::{
    bracket_ratio, chi1_over_omega2, chi_tilde2_value, inv_bracket_sq, OMEGA2_GUARD,
};
use crate::resonance::omega2;
use crate::spectral::Field;

pub const CORRECTOR_C: f64 = -1.0;
pub const CORRECTOR_C1_TILDE: f64 = 1.0;
pub const CORRECTOR_C2_TILDE: f64 = -1.0;

/// `M(u) = ∫u² dx`.
pub fn mass(f: &Field) -> f64 {
    f.l2_norm().powi(2)
}

/// `½ L Σ (−ω(ξ)/ξ)|c_k|² + ⅓∫u³ dx`.
///
/// For pure powers `−ω/ξ = |ξ|^α` and this is `½‖D^{α/2}u‖² + ⅓∫u³`. The
/// cubic term uses the 2/3-truncated field, which is the quantity conserved
/// by the dealiased semi-discrete flow.
pub fn hamiltonian(f: &Field, sym: &DispersionSymbol) -> Result<f64> {
    let hyp2 = check_hyp2(sym);
    if !hyp2.pass {
        return Err(Error::config(format!(
            "low-frequency bound fails (sup |omega/xi| = {})",
            hyp2.sup
        )));
    }
    let grid = f.grid();
    let quad: f64 = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| -sym.omega_over_xi(grid.frequency(j)) * c.norm_sqr())
        .sum();
    let cubic = f.dealiased_square().inner(f);
    Ok(0.5 * grid.length() * quad + cubic / 3.0)
}

/// `L Σ_{k₁≠0, k₂} w(ξ₁,ξ₂) x_{k₁} y_{k₂} z_{−k₁−k₂}` over nonzero modes.
///
/// Weights returning `None` are dropped and counted.
pub fn trilinear_sum(
    x: &Field,
    y: &Field,
    z: &Field,
    weight: impl Fn(f64, f64) -> Option<f64> + Sync,
) -> (Complex64, u64) {
    let grid = *x.grid();
    let zero = Complex64::new(0.0, 0.0);
    let nyq = grid.nyquist_index();
    let modes = |f: &Field| -> Vec<(i64, f64, Complex64)> {
        f.coeffs()
            .iter()
            .enumerate()
            .filter(|&(j, c)| j != nyq && *c != zero)
            .map(|(j, &c)| (grid.wavenumber(j), grid.frequency(j), c))
            .collect()
    };
    let xs: Vec<_> = modes(x).into_iter().filter(|m| m.0 != 0).collect();
    let ys = modes(y);
    let partial: Vec<(Complex64, u64)> = xs
        .par_iter()
        .map(|&(k1, x1, c1)| {
            let mut acc = zero;
            let mut skipped = 0u64;
            for &(k2, x2, c2) in &ys {
                let c3 = z.coeff(-k1 - k2);
                if c3 == zero {
                    continue;
                }
                match weight(x1, x2) {
                    Some(w) => acc += c1 * c2 * c3 * w,
                    None => skipped += 1,
                }
            }
            (acc, skipped)
        })
        .collect();
    let (sum, skipped) = partial
        .into_iter()
        .fold((zero, 0), |(s, n), (a, m)| (s + a, n + m));
    (sum * grid.length(), skipped)
}

/// Low and band pieces `P_{≪N}u`, `P_{∼N}u`.
fn bands(u: &Field, n: f64) -> (Field, Field) {
    (
        project_band(u, Band::Ll, n).expect("ladder scales are dyadic"),
        project_band(u, Band::Sim, n).expect("ladder scales are dyadic"),
    )
}

/// `E¹_N(u)` and the number of guarded terms.
pub fn corrector_e1(u: &Field, sym: &DispersionSymbol, s: f64, n: f64) -> (f64, u64) {
    let (a, b) = bands(u, n);
    let (v, skipped) = trilinear_sum(&a, &b, &b, |x1, x2| {
        chi1_over_omega2(sym, n, s, x1, x2).map(|q| q * x1)
    });
    (v.re, skipped)
}

/// `dE¹_N/dt` along a trajectory with `∂ₜu = udot`, by the product rule.
pub fn corrector_e1_rate(u: &Field, udot: &Field, sym: &DispersionSymbol, s: f64, n: f64) -> f64 {
    let (a, b) = bands(u, n);
    let (ad, bd) = bands(udot, n);
    let w = |x1: f64, x2: f64| chi1_over_omega2(sym, n, s, x1, x2).map(|q| q * x1);
    let t1 = trilinear_sum(&ad, &b, &b, w).0;
    let t2 = trilinear_sum(&a, &bd, &b, w).0;
    let t3 = trilinear_sum(&a, &b, &bd, w).0;
    (t1 + t2 + t3).re
}

/// `L Σ iχ₁ ξ₁ a b b`: the low-high flux of `½‖P_N u‖²` that the linear-flow
/// derivative of `E¹_N` reproduces.
pub fn low_high_flux(u: &Field, s: f64, n: f64) -> f64 {
    let (a, b) = bands(u, n);
    // i χ₁ ξ₁ = (χ₁/Ω₂) · iΩ₂ ξ₁; summed against a b b it is real.
    let (v, _) = trilinear_sum(&a, &b, &b, |x1, x2| {
        Some(crate::multilinear::chi1_value(n, s, x1, x2) * x1)
    });
    (v * Complex64::new(0.0, 1.0)).re
}

/// One dyadic block of the modified energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTerm {
    pub n: f64,
    /// `½‖P_N u‖²`.
    pub plain: f64,
    /// `E¹_N(u)` (computed for every `N`, used only above `N₀`).
    pub corrector: f64,
    /// `⟨N⟩^{2s}|E_N(u, N₀)|`.
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub s: f64,
    pub n0: f64,
    pub mass: f64,
    pub hamiltonian: f64,
    pub hs_norm: f64,
    /// `E^s(u, N₀) = Σ ⟨N⟩^{2s}|E_N(u, N₀)|` over the nonhomogeneous ladder.
    pub modified: f64,
    pub terms: Vec<EnergyTerm>,
    /// `Σ_{N>N₀} ⟨N⟩^{2s}|E¹_N(u)|`.
    pub corrector_share: f64,
    pub guard_skips: u64,
}

impl EnergyReport {
    pub fn at(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// `½ Σ ⟨N⟩^{2s}‖P_N u‖²`.
    pub fn plain_energy(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| bracket(t.n).powf(2.0 * self.s) * t.plain)
            .sum()
    }

    pub fn write_jsonl(&self, out: impl Write) -> Result<()> {
        write_jsonl_row(out, self)
    }
}

/// `⟨N⟩ = (1 + N²)^{1/2}`.
pub fn bracket(n: f64) -> f64 {
    (1.0 + n * n).sqrt()
}

/// Per-scale plain energies and correctors; independent of `N₀`.
#[derive(Debug, Clone)]
struct Blocks {
    scales: Vec<f64>,
    plain: Vec<f64>,
    corrector: Vec<f64>,
    skips: Vec<u64>,
}

fn energy_blocks(u: &Field, sym: &DispersionSymbol, s: f64) -> Blocks {
    let ladder = DyadicLadder::nonhomogeneous(u.grid());
    let scales = ladder.scales().to_vec();
    let mut plain = Vec::with_capacity(scales.len());
    let mut corrector = Vec::with_capacity(scales.len());
    let mut skips = Vec::with_capacity(scales.len());
    for &n in &scales {
        plain.push(0.5 * ladder.piece(u, n).l2_norm().powi(2));
        // N = 1 never exceeds N₀ >= 2
        let (c, k) = if n >= 2.0 {
            corrector_e1(u, sym, s, n)
        } else {
            (0.0, 0)
        };
        corrector.push(c);
        skips.push(k);
    }
    Blocks {
        scales,
        plain,
        corrector,
        skips,
    }
}

fn assemble(blocks: &Blocks, s: f64, n0: f64) -> (f64, Vec<EnergyTerm>, f64, u64) {
    let mut total = 0.0;
    let mut share = 0.0;
    let mut skips = 0;
    let mut terms = Vec::with_capacity(blocks.scales.len());
    for i in 0..blocks.scales.len() {
        let n = blocks.scales[i];
        let w = bracket(n).powf(2.0 * s);
        let mut e = blocks.plain[i];
        if n > n0 {
            e += CORRECTOR_C * blocks.corrector[i];
            share += w * blocks.corrector[i].abs();
            skips += blocks.skips[i];
        }
        total += w * e.abs();
        terms.push(EnergyTerm {
            n,
            plain: blocks.plain[i],
            corrector: blocks.corrector[i],
            weighted: w * e.abs(),
        });
    }
    (total, terms, share, skips)
}

fn check_n0(n0: f64) -> Result<()> {
    if !(n0 >= 2.0 && n0.is_finite()) {
        return Err(Error::config(format!("N0 must be at least 2, got {n0}")));
    }
    Ok(())
}

/// `E^s(u, N₀)` with its dyadic breakdown, mass, Hamiltonian and `H^s` norm.
pub fn modified_energy(u: &Field, sym: &DispersionSymbol, s: f64, n0: f64) -> Result<EnergyReport> {
    check_n0(n0)?;
    let blocks = energy_blocks(u, sym, s);
    let (modified, terms, corrector_share, guard_skips) = assemble(&blocks, s, n0);
    Ok(EnergyReport {
        t: 0.0,
        s,
        n0,
        mass: mass(u),
        hamiltonian: hamiltonian(u, sym)?,
        hs_norm: u.sobolev_norm(s),
        modified,
        terms,
        corrector_share,
        guard_skips,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityAttempt {
    pub n0: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub attempts: Vec<CoercivityAttempt>,
    /// First `N₀` at which the inequality held.
    pub n0_pass: Option<f64>,
    pub pass: bool,
    /// The passing attempt had both sides zero.
    pub trivial: bool,
}

/// Maximum number of times `N₀` is doubled by the coercivity searches.
pub const MAX_DOUBLINGS: usize = 10;

fn doubling_search(n0: f64, mut side: impl FnMut(f64) -> (f64, f64)) -> CoercivityReport {
    let mut attempts = Vec::new();
    let mut n = n0;
    for _ in 0..=MAX_DOUBLINGS {
        let (lhs, rhs) = side(n);
        let pass = lhs <= rhs;
        attempts.push(CoercivityAttempt { n0: n, lhs, rhs, pass });
        if pass {
            return CoercivityReport {
                attempts,
                n0_pass: Some(n),
                pass: true,
                trivial: lhs == 0.0 && rhs == 0.0,
            };
        }
        n *= 2.0;
    }
    CoercivityReport {
        attempts,
        n0_pass: None,
        pass: false,
        trivial: false,
    }
}

/// `|E^s(u,N₀) − ½Σ⟨N⟩^{2s}‖P_Nu‖²| <= ⅛ Σ_{N>N₀} ⟨N⟩^{2s}‖P_Nu‖²`,
/// doubling `N₀` up to ten times until it holds.
pub fn coercivity_check(
    u: &Field,
    sym: &DispersionSymbol,
    s: f64,
    n0: f64,
) -> Result<CoercivityReport> {
    check_n0(n0)?;
    if s <= sym.lwp_threshold() {
        return Err(Error::config(format!(
            "s = {s} must exceed 3/2 - 5 alpha/4 = {}",
            sym.lwp_threshold()
        )));
    }
    let blocks = energy_blocks(u, sym, s);
    let plain: f64 = blocks
        .scales
        .iter()
        .zip(&blocks.plain)
        .map(|(&n, &p)| bracket(n).powf(2.0 * s) * p)
        .sum();
    Ok(doubling_search(n0, |n0| {
        let (total, _, _, _) = assemble(&blocks, s, n0);
        let rhs: f64 = blocks
            .scales
            .iter()
            .zip(&blocks.plain)
            .filter(|(&n, _)| n > n0)
            .map(|(&n, &p)| bracket(n).powf(2.0 * s) * 2.0 * p)
            .sum::<f64>()
            / 8.0;
        ((total - plain).abs(), rhs)
    }))
}

/// Admissible `σ`: `−½ + α/4 < σ < min(0, s − 2 + 3α/2)`. The upper end
/// is admitted within `1e-12`.
pub fn sigma_window(alpha: f64, s: f64) -> (f64, f64) {
    (-0.5 + alpha / 4.0, f64::min(0.0, s - 2.0 + 1.5 * alpha))
}

pub fn check_sigma(alpha: f64, s: f64, sigma: f64) -> Result<()> {
    let (lo, hi) = sigma_window(alpha, s);
    if sigma > lo && sigma <= hi + 1e-12 {
        Ok(())
    } else {
        Err(Error::config(format!(
            "sigma = {sigma} lies outside the window ({lo}, {hi}) for alpha = {alpha}, s = {s}"
        )))
    }
}

/// `‖w‖_{H̄^σ} = (L Σ_{k≠0} (1 + ξ⁻²)⟨ξ⟩^{2σ}|c_k|²)^{1/2}`.
pub fn hbar_norm(w: &Field, sigma: f64) -> f64 {
    let grid = w.grid();
    let s: f64 = w
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| {
            let xi = grid.frequency(j);
            (1.0 + 1.0 / (xi * xi)) * (1.0 + xi * xi).powf(sigma) * c.norm_sqr()
        })
        .sum();
    (grid.length() * s).sqrt()
}

/// `Ẽ¹_N(z, w)` with `χ̃₁ = −½⟨N⁻¹⟩²χ₁(·; σ)`.
pub fn difference_corrector_1(
    z: &Field,
    w: &Field,
    sym: &DispersionSymbol,
    sigma: f64,
    n: f64,
) -> (f64, u64) {
    let (z_low, _) = bands(z, n);
    let (_, w_band) = bands(w, n);
    let f = -0.5 * inv_bracket_sq(n);
    let (v, k) = trilinear_sum(&z_low, &w_band, &w_band, |x1, x2| {
        chi1_over_omega2(sym, n, sigma, x1, x2).map(|q| f * q * x1)
    });
    (v.re, k)
}

/// `Ẽ²_N(z, w) = L Σ (χ̃₂/Ω₂)(ξ₁,ξ₂)(ξ₁+ξ₂) ŵ_{≪N} ẑ_{∼N} ŵ_{∼N}`.
pub fn difference_corrector_2(
    z: &Field,
    w: &Field,
    sym: &DispersionSymbol,
    sigma: f64,
    n: f64,
) -> (f64, u64) {
    let (w_low, w_band) = bands(w, n);
    let (_, z_band) = bands(z, n);
    let na = n.powf(sym.alpha);
    let (v, k) = trilinear_sum(&w_low, &z_band, &w_band, |x1, x2| {
        let c = chi_tilde2_value(n, sigma, x1, x2);
        if c == 0.0 {
            return Some(0.0);
        }
        let om = omega2(sym, x1, x2);
        if om.abs() < OMEGA2_GUARD * x1.abs() * na {
            return None;
        }
        Some(c / om * (x1 + x2))
    });
    (v.re, k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceTerm {
    pub n: f64,
    pub plain: f64,
    pub e1: f64,
    pub e2: f64,
    /// `⟨N⁻¹⟩²⟨N⟩^{2σ}|Ẽ_N|`.
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceEnergyReport {
    pub t: f64,
    pub sigma: f64,
    pub n0: f64,
    /// `Σ ⟨N⁻¹⟩²⟨N⟩^{2σ}‖P_N w‖²`.
    pub weighted_norm: f64,
    /// `Ẽ^σ(z, w, N₀)`.
    pub modified: f64,
    pub terms: Vec<DifferenceTerm>,
    pub corrector1_share: f64,
    pub corrector2_share: f64,
    pub guard_skips: u64,
}

struct DiffBlocks {
    scales: Vec<f64>,
    plain: Vec<f64>,
    e1: Vec<f64>,
    e2: Vec<f64>,
    skips: Vec<u64>,
}

fn difference_blocks(z: &Field, w: &Field, sym: &DispersionSymbol, sigma: f64) -> DiffBlocks {
    let ladder = DyadicLadder::homogeneous(w.grid());
    let scales = ladder.scales().to_vec();
    let mut b = DiffBlocks {
        scales: scales.clone(),
        plain: vec![],
        e1: vec![],
        e2: vec![],
        skips: vec![],
    };
    for &n in &scales {
        b.plain.push(0.5 * ladder.piece(w, n).l2_norm().powi(2));
        let (e1, k1) = difference_corrector_1(z, w, sym, sigma, n);
        let (e2, k2) = difference_corrector_2(z, w, sym, sigma, n);
        b.e1.push(e1);
        b.e2.push(e2);
        b.skips.push(k1 + k2);
    }
    b
}

fn diff_weight(n: f64, sigma: f64) -> f64 {
    inv_bracket_sq(n) * bracket(n).powf(2.0 * sigma)
}

fn assemble_difference(b: &DiffBlocks, sigma: f64, n0: f64, t: f64) -> DifferenceEnergyReport {
    let mut rep = DifferenceEnergyReport {
        t,
        sigma,
        n0,
        weighted_norm: 0.0,
        modified: 0.0,
        terms: vec![],
        corrector1_share: 0.0,
        corrector2_share: 0.0,
        guard_skips: 0,
    };
    for i in 0..b.scales.len() {
        let n = b.scales[i];
        let wt = diff_weight(n, sigma);
        let mut e = b.plain[i];
        if n > n0 {
            e += CORRECTOR_C1_TILDE * b.e1[i] + CORRECTOR_C2_TILDE * b.e2[i];
            rep.corrector1_share += wt * b.e1[i].abs();
            rep.corrector2_share += wt * b.e2[i].abs();
            rep.guard_skips += b.skips[i];
        }
        rep.weighted_norm += wt * 2.0 * b.plain[i];
        rep.modified += wt * e.abs();
        rep.terms.push(DifferenceTerm {
            n,
            plain: b.plain[i],
            e1: b.e1[i],
            e2: b.e2[i],
            weighted: wt * e.abs(),
        });
    }
    rep
}

/// `Ẽ^σ(z, w, N₀)` over the homogeneous ladder.
pub fn difference_energy(
    z: &Field,
    w: &Field,
    sym: &DispersionSymbol,
    s: f64,
    sigma: f64,
    n0: f64,
) -> Result<DifferenceEnergyReport> {
    check_n0(n0)?;
    check_sigma(sym.alpha, s, sigma)?;
    if z.grid() != w.grid() {
        return Err(Error::config("z and w live on different grids"));
    }
    let b = difference_blocks(z, w, sym, sigma);
    Ok(assemble_difference(&b, sigma, n0, 0.0))
}

/// `|Ẽ^σ − ½Σ⟨N⁻¹⟩²⟨N⟩^{2σ}‖P_Nw‖²| <= ⅛Σ_{N>N₀}⟨N⁻¹⟩²⟨N⟩^{2σ}‖P_Nw‖²`,
/// with the same doubling search as [`coercivity_check`].
pub fn difference_coercivity_check(
    z: &Field,
    w: &Field,
    sym: &DispersionSymbol,
    s: f64,
    sigma: f64,
    n0: f64,
) -> Result<CoercivityReport> {
    check_n0(n0)?;
    check_sigma(sym.alpha, s, sigma)?;
    let b = difference_blocks(z, w, sym, sigma);
    Ok(doubling_search(n0, |n0| {
        let rep = assemble_difference(&b, sigma, n0, 0.0);
        let rhs: f64 = b
            .scales
            .iter()
            .zip(&b.plain)
            .filter(|(&n, _)| n > n0)
            .map(|(&n, &p)| diff_weight(n, sigma) * 2.0 * p)
            .sum::<f64>()
            / 8.0;
        ((rep.modified - 0.5 * rep.weighted_norm).abs(), rhs)
    }))
}

/// `(⟨N⟩/N)^{2s}`, re-exported for callers assembling their own sums.
pub fn corrector_weight(n: f64, s: f64) -> f64 {
    bracket_ratio(n, s)
}
