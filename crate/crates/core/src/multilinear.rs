//! Multilinear Fourier multipliers `Π^n_χ`, the Marcinkiewicz checker, and
//! the concrete symbols used by the modified energies.
//!
//! `Π^n_χ(f₁,…,f_n)` has coefficients
//! `d_m = Σ_{k₁+…+k_n=m} χ(ξ_{k₁},…,ξ_{k_n}) c¹_{k₁}⋯cⁿ_{k_n}`,
//! evaluated by direct summation over the nonzero input modes.

use std::fmt;
use std::io::Write;
use std::num::NonZeroUsize;
use std::sync::{Arc, OnceLock};

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionSymbol;
use crate::error::{Error, Result};
use crate::io::CsvWriter;
use crate::littlewood_paley::{phi_n, phi_prime, project, project_band, tilde_phi_n, Band};
use crate::resonance::omega2;
use crate::spectral::{Field, SpectralGrid, TrajectoryRecord};

type Eval = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// A symbol `χ(ξ₁,…,ξ_n)` of arity 2 or 3.
#[derive(Clone)]
pub struct MultiplierSymbol {
    arity: usize,
    name: String,
    eval: Arc<Eval>,
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSymbol")
            .field("arity", &self.arity)
            .field("name", &self.name)
            .finish()
    }
}

impl MultiplierSymbol {
    pub fn new(
        arity: usize,
        name: impl Into<String>,
        eval: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        assert!(arity == 2 || arity == 3, "arity must be 2 or 3");
        Self {
            arity,
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn bilinear(
        name: impl Into<String>,
        f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(2, name, move |x| f(x[0], x[1]))
    }

    pub fn trilinear(
        name: impl Into<String>,
        f: impl Fn(f64, f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(3, name, move |x| f(x[0], x[1], x[2]))
    }

    /// `χ ≡ 1`.
    pub fn one(arity: usize) -> Self {
        Self::new(arity, "one", |_| Complex64::new(1.0, 0.0))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        debug_assert_eq!(xi.len(), self.arity);
        (self.eval)(xi)
    }

    /// Pointwise product of two symbols of the same arity.
    pub fn product(&self, other: &MultiplierSymbol) -> Result<MultiplierSymbol> {
        if self.arity != other.arity {
            return Err(Error::config(format!(
                "cannot multiply symbols of arity {} and {}",
                self.arity, other.arity
            )));
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Ok(Self::new(
            self.arity,
            format!("({})*({})", self.name, other.name),
            move |x| a(x) * b(x),
        ))
    }

    pub fn scaled(&self, c: f64) -> MultiplierSymbol {
        let a = self.eval.clone();
        Self::new(self.arity, format!("{c}*({})", self.name), move |x| a(x) * c)
    }

    /// `∂^β χ(ξ)` by fourth-order centered differences with step
    /// `1e-3·|ξ_i|` in each direction. Components of `β` may not exceed 3.
    pub fn partial(&self, beta: &[u32], xi: &[f64]) -> Result<Complex64> {
        if beta.len() != self.arity || xi.len() != self.arity {
            return Err(Error::config("multi-index length must match the arity"));
        }
        let mut stencils = Vec::with_capacity(self.arity);
        for (&b, &x) in beta.iter().zip(xi) {
            let h = 1e-3 * x.abs();
            if b > 0 && h == 0.0 {
                return Err(Error::domain("derivatives need nonzero frequencies"));
            }
            let st = stencil(b).ok_or_else(|| Error::domain(format!("order {b} exceeds 3")))?;
            stencils.push((st, h, b));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut point = xi.to_vec();
        let mut idx = vec![0usize; self.arity];
        loop {
            let mut w = 1.0;
            for d in 0..self.arity {
                let (st, h, b) = &stencils[d];
                let (off, wt) = st[idx[d]];
                point[d] = xi[d] + off * h;
                w *= wt / h.powi(*b as i32);
            }
            acc += self.eval(&point) * w;
            // odometer over the stencil product
            let mut d = 0;
            loop {
                if d == self.arity {
                    return Ok(acc);
                }
                idx[d] += 1;
                if idx[d] < stencils[d].0.len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }
}

/// `(offset, weight)` pairs; divide by `h^order`.
fn stencil(order: u32) -> Option<&'static [(f64, f64)]> {
    const S0: [(f64, f64); 1] = [(0.0, 1.0)];
    const S1: [(f64, f64); 4] = [
        (-2.0, 1.0 / 12.0),
        (-1.0, -8.0 / 12.0),
        (1.0, 8.0 / 12.0),
        (2.0, -1.0 / 12.0),
    ];
    const S2: [(f64, f64); 5] = [
        (-2.0, -1.0 / 12.0),
        (-1.0, 16.0 / 12.0),
        (0.0, -30.0 / 12.0),
        (1.0, 16.0 / 12.0),
        (2.0, -1.0 / 12.0),
    ];
    const S3: [(f64, f64); 6] = [
        (-3.0, 1.0 / 8.0),
        (-2.0, -1.0),
        (-1.0, 13.0 / 8.0),
        (1.0, -13.0 / 8.0),
        (2.0, 1.0),
        (3.0, -1.0 / 8.0),
    ];
    match order {
        0 => Some(&S0),
        1 => Some(&S1),
        2 => Some(&S2),
        3 => Some(&S3),
        _ => None,
    }
}

/// Nonzero modes `(k, ξ_k, c_k)` with `|k| <= kmax`; the Nyquist mode is dropped.
fn retained(f: &Field, kmax: i64) -> Vec<(i64, f64, Complex64)> {
    let grid = f.grid();
    f.coeffs()
        .iter()
        .enumerate()
        .filter(|&(j, c)| j != grid.nyquist_index() && *c != Complex64::new(0.0, 0.0))
        .map(|(j, &c)| (grid.wavenumber(j), grid.frequency(j), c))
        .filter(|&(k, _, _)| k.abs() <= kmax)
        .collect()
}

/// Dense lookup `k ↦ (ξ_k, c_k)` for `|k| <= kmax`.
struct ModeTable {
    kmax: i64,
    slots: Vec<Option<(f64, Complex64)>>,
}

impl ModeTable {
    fn new(modes: &[(i64, f64, Complex64)]) -> Self {
        let kmax = modes.iter().map(|m| m.0.abs()).max().unwrap_or(0);
        let mut slots = vec![None; (2 * kmax + 1) as usize];
        for &(k, xi, c) in modes {
            slots[(k + kmax) as usize] = Some((xi, c));
        }
        Self { kmax, slots }
    }

    fn get(&self, k: i64) -> Option<(f64, Complex64)> {
        if k.abs() > self.kmax {
            None
        } else {
            self.slots[(k + self.kmax) as usize]
        }
    }
}

/// The input grid, doubled until every `|m| <= kmax_out` is representable
/// without touching the Nyquist mode.
fn output_grid(grid: &SpectralGrid, kmax_out: i64) -> Result<SpectralGrid> {
    let mut n = grid.n();
    while kmax_out >= (n / 2) as i64 {
        n *= 2;
    }
    grid.with_n(n)
}

fn same_grid(fields: &[&Field]) -> Result<SpectralGrid> {
    let g = *fields[0].grid();
    if fields.iter().any(|f| *f.grid() != g) {
        return Err(Error::config("multiplier inputs live on different grids"));
    }
    Ok(g)
}

fn check_arity(chi: &MultiplierSymbol, arity: usize) -> Result<()> {
    if chi.arity != arity {
        return Err(Error::config(format!(
            "symbol {} has arity {}, expected {arity}",
            chi.name, chi.arity
        )));
    }
    Ok(())
}

/// `Π²_χ(f, g)`. The output grid is the input grid, enlarged by doubling
/// when the sum frequencies do not fit.
pub fn apply_pi2(chi: &MultiplierSymbol, f: &Field, g: &Field) -> Result<Field> {
    check_arity(chi, 2)?;
    let grid = same_grid(&[f, g])?;
    let a = retained(f, i64::MAX);
    let b = retained(g, i64::MAX);
    let kmax = |m: &[(i64, f64, Complex64)]| m.iter().map(|x| x.0.abs()).max().unwrap_or(0);
    let out = output_grid(&grid, kmax(&a) + kmax(&b))?;
    let tb = ModeTable::new(&b);
    let nyq = out.nyquist_index();
    let coeffs: Vec<Complex64> = (0..out.n())
        .into_par_iter()
        .map(|j| {
            if j == nyq {
                return Complex64::new(0.0, 0.0);
            }
            let m = out.wavenumber(j);
            let mut acc = Complex64::new(0.0, 0.0);
            for &(k1, x1, c1) in &a {
                if let Some((x2, c2)) = tb.get(m - k1) {
                    acc += chi.eval(&[x1, x2]) * c1 * c2;
                }
            }
            acc
        })
        .collect();
    Field::from_coeffs(out, coeffs)
}

/// Per-slot truncation applied by [`apply_pi3`].
pub const PI3_MAX_MODE: i64 = 512;

/// `Π³_χ(f, g, h)` over modes with `|k| <= 512` in each slot.
pub fn apply_pi3(chi: &MultiplierSymbol, f: &Field, g: &Field, h: &Field) -> Result<Field> {
    check_arity(chi, 3)?;
    let grid = same_grid(&[f, g, h])?;
    let a = retained(f, PI3_MAX_MODE);
    let b = retained(g, PI3_MAX_MODE);
    let c = retained(h, PI3_MAX_MODE);
    let kmax = |m: &[(i64, f64, Complex64)]| m.iter().map(|x| x.0.abs()).max().unwrap_or(0);
    let out = output_grid(&grid, kmax(&a) + kmax(&b) + kmax(&c))?;
    let tc = ModeTable::new(&c);
    let nyq = out.nyquist_index();
    let coeffs: Vec<Complex64> = (0..out.n())
        .into_par_iter()
        .map(|j| {
            if j == nyq {
                return Complex64::new(0.0, 0.0);
            }
            let m = out.wavenumber(j);
            let mut acc = Complex64::new(0.0, 0.0);
            for &(k1, x1, c1) in &a {
                for &(k2, x2, c2) in &b {
                    if let Some((x3, c3)) = tc.get(m - k1 - k2) {
                        acc += chi.eval(&[x1, x2, x3]) * c1 * c2 * c3;
                    }
                }
            }
            acc
        })
        .collect();
    Field::from_coeffs(out, coeffs)
}

/// `∫ F G dx` for fields of the same period but possibly different `n`.
pub fn pairing(f: &Field, g: &Field) -> f64 {
    debug_assert_eq!(f.grid().length(), g.grid().length());
    let grid = f.grid();
    let s: f64 = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| (c * g.coeff(-grid.wavenumber(j))).re)
        .sum();
    grid.length() * s
}

/// `∫_0^t ∫ Π^n_χ(u₁,…,u_n) u_{n+1} dx dt'` by the trapezoidal rule, with `t`
/// measured from the first record time. The last partial interval is
/// integrated with a linearly interpolated integrand.
pub fn gt_functional(chi: &MultiplierSymbol, records: &[&TrajectoryRecord], t: f64) -> Result<f64> {
    if records.len() != chi.arity + 1 {
        return Err(Error::config(format!(
            "symbol of arity {} needs {} records, got {}",
            chi.arity,
            chi.arity + 1,
            records.len()
        )));
    }
    let first = records[0];
    for r in records {
        if r.grid() != first.grid() || r.times() != first.times() {
            return Err(Error::config("records must share grid and time samples"));
        }
    }
    let times = first.times();
    if times.is_empty() {
        return Err(Error::config("empty record"));
    }
    let t0 = times[0];
    let span = times[times.len() - 1] - t0;
    if !(0.0..=span * (1.0 + 1e-12)).contains(&t) {
        return Err(Error::config(format!("t = {t} lies outside [0, {span}]")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let integrand = |i: usize| -> Result<f64> {
        let s = |r: usize| &records[r].snapshots()[i];
        let prod = match chi.arity {
            2 => apply_pi2(chi, s(0), s(1))?,
            _ => apply_pi3(chi, s(0), s(1), s(2))?,
        };
        Ok(pairing(&prod, s(chi.arity)))
    };
    let mut total = 0.0;
    let mut prev = integrand(0)?;
    for i in 1..times.len() {
        let (ta, tb) = (times[i - 1] - t0, times[i] - t0);
        let cur = integrand(i)?;
        if tb <= t {
            total += 0.5 * (tb - ta) * (prev + cur);
        } else {
            let theta = (t - ta) / (tb - ta);
            let mid = prev + theta * (cur - prev);
            total += 0.5 * (t - ta) * (prev + mid);
            break;
        }
        prev = cur;
    }
    Ok(total)
}

/// Per-variable magnitude ranges `|ξ_i| ∈ [lo_i, hi_i]`, both signs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreqBox {
    pub ranges: Vec<(f64, f64)>,
}

impl FreqBox {
    pub fn new(ranges: Vec<(f64, f64)>) -> Self {
        Self { ranges }
    }

    /// `|ξ_i| ∈ [N_i/2, 2N_i]`.
    pub fn dyadic(scales: &[f64]) -> Self {
        Self::new(scales.iter().map(|&n| (n / 2.0, 2.0 * n)).collect())
    }

    /// 16 log-spaced magnitudes per range, each with both signs.
    fn axis(&self, d: usize) -> Vec<f64> {
        let (lo, hi) = self.ranges[d];
        (0..16)
            .map(|i| lo * (hi / lo).powf(i as f64 / 15.0))
            .flat_map(|x| [x, -x])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarcinkiewiczEntry {
    pub beta: Vec<u32>,
    /// `max |∂^β χ(ξ)| Π|ξ_i|^{β_i}` over the sampled points.
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarcinkiewiczReport {
    pub symbol: String,
    pub entries: Vec<MarcinkiewiczEntry>,
    pub window: f64,
    pub worst: f64,
    pub pass: bool,
}

/// Pass threshold for the normalized derivatives.
pub const MARCINKIEWICZ_WINDOW: f64 = 1e3;

fn multi_indices(arity: usize, beta_max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                (0..=3).map(move |b| {
                    let mut p = prefix.clone();
                    p.push(b);
                    p
                })
            })
            .collect();
    }
    out.retain(|b| b.iter().sum::<u32>() <= beta_max);
    out
}

/// Normalized derivatives `|∂^β χ| Π|ξ_i|^{β_i}` for `|β| <= beta_max` on
/// 32 points per box dimension; passes when all stay below `10³`.
pub fn check_marcinkiewicz(
    chi: &MultiplierSymbol,
    boxes: &[FreqBox],
    beta_max: u32,
) -> Result<MarcinkiewiczReport> {
    if beta_max > 3 {
        return Err(Error::config("beta_max must be at most 3"));
    }
    let betas = multi_indices(chi.arity, beta_max);
    let mut maxima = vec![0.0f64; betas.len()];
    for b in boxes {
        if b.ranges.len() != chi.arity {
            return Err(Error::config("box dimension must match the symbol arity"));
        }
        if b.ranges.iter().any(|&(lo, hi)| !(lo > 0.0 && hi >= lo)) {
            return Err(Error::config("box ranges must be positive and ordered"));
        }
        let axes: Vec<Vec<f64>> = (0..chi.arity).map(|d| b.axis(d)).collect();
        let total: usize = axes.iter().map(Vec::len).product();
        let local: Vec<Result<Vec<f64>>> = (0..total)
            .into_par_iter()
            .map(|mut flat| {
                let mut point = Vec::with_capacity(chi.arity);
                for ax in &axes {
                    point.push(ax[flat % ax.len()]);
                    flat /= ax.len();
                }
                betas
                    .iter()
                    .map(|beta| {
                        let d = chi.partial(beta, &point)?.norm();
                        let w: f64 = beta
                            .iter()
                            .zip(&point)
                            .map(|(&bi, &x)| x.abs().powi(bi as i32))
                            .product();
                        Ok(d * w)
                    })
                    .collect()
            })
            .collect();
        for row in local {
            for (m, v) in maxima.iter_mut().zip(row?) {
                *m = if v.is_nan() { f64::INFINITY } else { m.max(v) };
            }
        }
    }
    let worst = maxima.iter().cloned().fold(0.0, f64::max);
    Ok(MarcinkiewiczReport {
        symbol: chi.name.clone(),
        entries: betas
            .into_iter()
            .zip(maxima)
            .map(|(beta, max)| MarcinkiewiczEntry { beta, max })
            .collect(),
        window: MARCINKIEWICZ_WINDOW,
        worst,
        pass: worst.is_finite() && worst <= MARCINKIEWICZ_WINDOW,
    })
}

fn gauss_legendre_32() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(32).unwrap()))
}

/// `∫_0^1 φ'((θξ₁ + ξ₂)/N) dθ` by 32-point Gauss–Legendre; `χ = −i` times this.
pub fn commutator_integral(n: f64, xi1: f64, xi2: f64) -> f64 {
    let a = xi2 / n;
    let b = (xi1 + xi2) / n;
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    // φ' vanishes for |x| <= 1/2 and |x| >= 2
    if hi <= -2.0 || lo >= 2.0 || (lo >= -0.5 && hi <= 0.5) {
        return 0.0;
    }
    if xi1 == 0.0 {
        return phi_prime(a);
    }
    gauss_legendre_32().integrate(0.0, 1.0, |theta| phi_prime(a + theta * (b - a)))
}

/// `χ(ξ₁,ξ₂) = −i ∫_0^1 φ'(N⁻¹(θξ₁+ξ₂)) dθ`, the symbol with
/// `P_N(u_{≪N}u) = u_{≪N}P_N u + N⁻¹ Π²_χ(∂ₓu_{≪N}, u)`.
pub fn symbol_chi_commutator(n: f64) -> MultiplierSymbol {
    MultiplierSymbol::bilinear(format!("chi_commutator(N={n})"), move |x1, x2| {
        Complex64::new(0.0, -commutator_integral(n, x1, x2))
    })
}

/// Relative `L²` residual of `P_N(u_{≪N}u) = u_{≪N}P_N u + N⁻¹Π²_χ(∂ₓu_{≪N}, u)`.
pub fn commutator_residual(u: &Field, n: f64) -> Result<f64> {
    let low = project_band(u, Band::Ll, n)?;
    let one = MultiplierSymbol::one(2);
    let lhs = project(&apply_pi2(&one, &low, u)?, n)?;
    let a = apply_pi2(&one, &low, &project(u, n)?)?;
    let b = apply_pi2(&symbol_chi_commutator(n), &low.derivative(), u)?;
    let resid = &(&lhs - &a) - &b.scaled(1.0 / n);
    let scale = lhs.l2_norm();
    Ok(if scale == 0.0 { resid.l2_norm() } else { resid.l2_norm() / scale })
}

/// `(⟨N⟩/N)^{2s}`.
pub fn bracket_ratio(n: f64, s: f64) -> f64 {
    ((1.0 + n * n).sqrt() / n).powf(2.0 * s)
}

/// `χ₁(ξ₁,ξ₂) = (⟨N⟩/N)^{2s}(φ_N(ξ₂) + 2i((ξ₁+ξ₂)/N)χ(ξ₁,ξ₂)φ̃_N(ξ₂))φ_N(ξ₁+ξ₂)`.
///
/// `χ` is purely imaginary, so `χ₁` is real.
pub fn chi1_value(n: f64, s: f64, xi1: f64, xi2: f64) -> f64 {
    let outer = phi_n(n, xi1 + xi2);
    if outer == 0.0 {
        return 0.0;
    }
    let mut inner = phi_n(n, xi2);
    let t = tilde_phi_n(n, xi2);
    if t != 0.0 {
        inner += 2.0 * (xi1 + xi2) / n * commutator_integral(n, xi1, xi2) * t;
    }
    bracket_ratio(n, s) * inner * outer
}

pub fn symbol_chi1(n: f64, s: f64) -> MultiplierSymbol {
    MultiplierSymbol::bilinear(format!("chi1(N={n}, s={s})"), move |x1, x2| {
        Complex64::new(chi1_value(n, s, x1, x2), 0.0)
    })
}

/// Relative size of `|Ω₂|` below which `χ₁/Ω₂` is treated as resonant.
pub const OMEGA2_GUARD: f64 = 1e-10;

/// `χ₁/Ω₂`, or `None` when the guard `|Ω₂| < 1e-10·|ξ₁|·N^α` (which
/// includes `ξ₁ = 0`) fires on a nonzero `χ₁`.
pub fn chi1_over_omega2(sym: &DispersionSymbol, n: f64, s: f64, xi1: f64, xi2: f64) -> Option<f64> {
    let c = chi1_value(n, s, xi1, xi2);
    if c == 0.0 {
        return Some(0.0);
    }
    let om = omega2(sym, xi1, xi2);
    if xi1 == 0.0 || om.abs() < OMEGA2_GUARD * xi1.abs() * n.powf(sym.alpha) {
        return None;
    }
    Some(c / om)
}

/// [`chi1_over_omega2`] restricted to `|ξ₁| <= N/16`, `N/4 <= |ξ₂| <= 4N`.
pub fn chi1_over_omega2_checked(
    sym: &DispersionSymbol,
    n: f64,
    s: f64,
    xi1: f64,
    xi2: f64,
) -> Result<Option<f64>> {
    let a2 = xi2.abs();
    if xi1.abs() > n / 16.0 || a2 < n / 4.0 || a2 > 4.0 * n {
        return Err(Error::domain(format!(
            "(xi1, xi2) = ({xi1}, {xi2}) lies outside |xi1| <= N/16, N/4 <= |xi2| <= 4N for N = {n}"
        )));
    }
    Ok(chi1_over_omega2(sym, n, s, xi1, xi2))
}

/// `χ₁/Ω₂` as a bilinear symbol; guarded points evaluate to 0.
pub fn symbol_chi1_over_omega2(sym: &DispersionSymbol, n: f64, s: f64) -> MultiplierSymbol {
    let sym = *sym;
    MultiplierSymbol::bilinear(format!("chi1/Omega2(N={n}, s={s})"), move |x1, x2| {
        Complex64::new(chi1_over_omega2(&sym, n, s, x1, x2).unwrap_or(0.0), 0.0)
    })
}

/// `⟨N⁻¹⟩² = 1 + N⁻²`.
pub fn inv_bracket_sq(n: f64) -> f64 {
    1.0 + 1.0 / (n * n)
}

/// `χ̃₁ = −½⟨N⁻¹⟩² χ₁`, with `χ₁` built at exponent `σ`.
pub fn chi_tilde1_value(n: f64, sigma: f64, xi1: f64, xi2: f64) -> f64 {
    -0.5 * inv_bracket_sq(n) * chi1_value(n, sigma, xi1, xi2)
}

/// `χ̃₂ = ⟨N⁻¹⟩²(⟨N⟩/N)^{2σ} φ_N²(ξ₁+ξ₂)`.
pub fn chi_tilde2_value(n: f64, sigma: f64, xi1: f64, xi2: f64) -> f64 {
    let p = phi_n(n, xi1 + xi2);
    inv_bracket_sq(n) * bracket_ratio(n, sigma) * p * p
}

pub fn symbol_chi_tilde1(n: f64, sigma: f64) -> MultiplierSymbol {
    MultiplierSymbol::bilinear(format!("chi_tilde1(N={n}, sigma={sigma})"), move |x1, x2| {
        Complex64::new(chi_tilde1_value(n, sigma, x1, x2), 0.0)
    })
}

pub fn symbol_chi_tilde2(n: f64, sigma: f64) -> MultiplierSymbol {
    MultiplierSymbol::bilinear(format!("chi_tilde2(N={n}, sigma={sigma})"), move |x1, x2| {
        Complex64::new(chi_tilde2_value(n, sigma, x1, x2), 0.0)
    })
}

/// Sample a bilinear symbol on `xs1 × xs2` as CSV `xi1,xi2,re,im`.
pub fn write_symbol_dump(
    out: impl Write,
    chi: &MultiplierSymbol,
    xs1: &[f64],
    xs2: &[f64],
) -> Result<()> {
    check_arity(chi, 2)?;
    let mut w = CsvWriter::new(out, &["xi1", "xi2", "re", "im"])?;
    for &a in xs1 {
        for &b in xs2 {
            let v = chi.eval(&[a, b]);
            w.row(&[a, b, v.re, v.im])?;
        }
    }
    w.flush()
}
