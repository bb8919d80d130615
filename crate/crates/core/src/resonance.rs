//! Resonance functions and sampled comparability checks.
//!
//! `Ω₂(ξ₁,ξ₂) = ω(ξ₁+ξ₂) − ω(ξ₁) − ω(ξ₂)` should be comparable to
//! `|ξ_min||ξ_max|^α`, and `Ω₃` to `|ξ_thd||ξ_max|^α` once the smallest
//! frequency is well separated from the third largest.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::DispersionSymbol;
use crate::error::{Error, Result};

/// Sum of three terms that does not depend on their order.
fn sum3(mut v: [f64; 3]) -> f64 {
    v.sort_by(f64::total_cmp);
    v[0] + v[1] + v[2]
}

pub fn omega2(sym: &DispersionSymbol, xi1: f64, xi2: f64) -> f64 {
    sym.omega(xi1 + xi2) - (sym.omega(xi1) + sym.omega(xi2))
}

pub fn omega3(sym: &DispersionSymbol, xi1: f64, xi2: f64, xi3: f64) -> f64 {
    sym.omega(sum3([xi1, xi2, xi3])) - sum3([sym.omega(xi1), sym.omega(xi2), sym.omega(xi3)])
}

/// One interaction with its closing frequency and ordered magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSample {
    pub xi: Vec<f64>,
    pub xi_last: f64,
    /// Magnitudes of all frequencies including `xi_last`, largest first.
    pub magnitudes: Vec<f64>,
    pub omega: f64,
    pub ratio: f64,
}

impl ResonanceSample {
    pub fn order2(sym: &DispersionSymbol, xi1: f64, xi2: f64) -> Self {
        let last = -(xi1 + xi2);
        let mut mags = vec![xi1.abs(), xi2.abs(), last.abs()];
        mags.sort_by(|a, b| b.total_cmp(a));
        let omega = omega2(sym, xi1, xi2);
        let ratio = omega.abs() / (mags[2] * mags[0].powf(sym.alpha));
        Self {
            xi: vec![xi1, xi2],
            xi_last: last,
            magnitudes: mags,
            omega,
            ratio,
        }
    }

    pub fn order3(sym: &DispersionSymbol, xi1: f64, xi2: f64, xi3: f64) -> Self {
        let last = -sum3([xi1, xi2, xi3]);
        let mut mags = vec![xi1.abs(), xi2.abs(), xi3.abs(), last.abs()];
        mags.sort_by(|a, b| b.total_cmp(a));
        let omega = omega3(sym, xi1, xi2, xi3);
        let ratio = omega.abs() / (mags[2] * mags[0].powf(sym.alpha));
        Self {
            xi: vec![xi1, xi2, xi3],
            xi_last: last,
            magnitudes: mags,
            omega,
            ratio,
        }
    }

    pub fn xi_max(&self) -> f64 {
        self.magnitudes[0]
    }

    /// Smallest magnitude.
    pub fn xi_min(&self) -> f64 {
        *self.magnitudes.last().unwrap()
    }

    /// Third largest magnitude (`ξ_min` for order 2, `ξ_thd` for order 3).
    pub fn xi_thd(&self) -> f64 {
        self.magnitudes[2]
    }
}

/// Sampling parameters shared by both checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceSampling {
    pub n_samples: usize,
    /// Magnitudes are drawn log-uniformly from `[lo, hi]`.
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub seed: u64,
    /// Draw `ξ₁, ξ₂` with a common sign (order 2 only).
    #[serde(default)]
    pub same_sign: bool,
    /// Required ratio `|ξ_thd| / |ξ_min|` (order 3 only).
    #[serde(default = "default_separation")]
    pub separation: f64,
}

fn default_separation() -> f64 {
    32.0
}

impl ResonanceSampling {
    pub fn new(n_samples: usize, lo: f64, hi: f64, seed: u64) -> Self {
        Self {
            n_samples,
            lo,
            hi,
            seed,
            same_sign: false,
            separation: default_separation(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::config("n_samples must be positive"));
        }
        if !(self.lo > 0.0 && self.hi > self.lo && self.hi.is_finite()) {
            return Err(Error::config(format!(
                "invalid magnitude range [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub alpha: f64,
    pub n_samples: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub rejected: u64,
    pub seed: u64,
}

impl ResonanceReport {
    /// `ratio_max / ratio_min`.
    pub fn spread(&self) -> f64 {
        self.ratio_max / self.ratio_min
    }
}

const CHUNK: usize = 4096;
const MAX_ATTEMPTS_PER_SAMPLE: u64 = 1000;

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn random_sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Run `draw` in parallel chunks, one generator stream per chunk, and fold
/// the accepted ratios. `draw` returns `None` for a rejected draw.
fn sample_ratios(
    cfg: &ResonanceSampling,
    alpha: f64,
    draw: impl Fn(&mut ChaCha8Rng) -> Option<f64> + Sync,
) -> Result<ResonanceReport> {
    let chunks = cfg.n_samples.div_ceil(CHUNK);
    let partial: Vec<Result<(f64, f64, u64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(cfg.n_samples - c * CHUNK);
            let (mut lo, mut hi, mut rejected) = (f64::INFINITY, 0.0f64, 0u64);
            for _ in 0..count {
                let mut attempts = 0u64;
                let r = loop {
                    if let Some(r) = draw(&mut rng) {
                        break r;
                    }
                    rejected += 1;
                    attempts += 1;
                    if attempts > MAX_ATTEMPTS_PER_SAMPLE {
                        return Err(Error::config(
                            "sampling constraint is infeasible for the requested range",
                        ));
                    }
                };
                lo = lo.min(r);
                hi = hi.max(r);
            }
            Ok((lo, hi, rejected))
        })
        .collect();
    let mut report = ResonanceReport {
        alpha,
        n_samples: cfg.n_samples,
        ratio_min: f64::INFINITY,
        ratio_max: 0.0,
        rejected: 0,
        seed: cfg.seed,
    };
    for p in partial {
        let (lo, hi, rej) = p?;
        report.ratio_min = report.ratio_min.min(lo);
        report.ratio_max = report.ratio_max.max(hi);
        report.rejected += rej;
    }
    Ok(report)
}

/// Sampled `|Ω₂| / (|ξ_min||ξ_max|^α)`.
///
/// Draws with any of `|ξ₁|, |ξ₂|, |ξ₁+ξ₂|` below `max(ξ₀, lo)` are redrawn
/// and counted in `rejected`.
pub fn verify_res2(sym: &DispersionSymbol, cfg: &ResonanceSampling) -> Result<ResonanceReport> {
    cfg.validate()?;
    let floor = sym.xi0.max(cfg.lo);
    sample_ratios(cfg, sym.alpha, |rng| {
        let s1 = random_sign(rng);
        let s2 = if cfg.same_sign { s1 } else { random_sign(rng) };
        let x1 = s1 * log_uniform(rng, cfg.lo, cfg.hi);
        let x2 = s2 * log_uniform(rng, cfg.lo, cfg.hi);
        let s = ResonanceSample::order2(sym, x1, x2);
        (s.xi_min() >= floor).then_some(s.ratio)
    })
}

/// Sampled `|Ω₃| / (|ξ_thd||ξ_max|^α)` under `|ξ_min| <= |ξ_thd| / separation`.
///
/// One frequency is drawn from `[lo, hi/separation]`, the other two from
/// `[lo, hi]`; draws violating the separation or the `ξ₀` floor are redrawn.
pub fn verify_res3(sym: &DispersionSymbol, cfg: &ResonanceSampling) -> Result<ResonanceReport> {
    cfg.validate()?;
    let sep = cfg.separation;
    if !(sep >= 32.0) {
        return Err(Error::config(format!("separation must be at least 32, got {sep}")));
    }
    if cfg.hi < sep * cfg.lo {
        return Err(Error::config(format!(
            "range [{}, {}] cannot hold two scales separated by {sep}",
            cfg.lo, cfg.hi
        )));
    }
    let floor = sym.xi0.max(cfg.lo);
    sample_ratios(cfg, sym.alpha, |rng| {
        let x1 = random_sign(rng) * log_uniform(rng, cfg.lo, cfg.hi / sep);
        let x2 = random_sign(rng) * log_uniform(rng, cfg.lo, cfg.hi);
        let x3 = random_sign(rng) * log_uniform(rng, cfg.lo, cfg.hi);
        let s = ResonanceSample::order3(sym, x1, x2, x3);
        (s.xi_min() >= floor && s.xi_min() * sep <= s.xi_thd()).then_some(s.ratio)
    })
}
