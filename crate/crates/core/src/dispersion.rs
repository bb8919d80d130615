//! Dispersion symbols `ω(ξ)` of the linear operator `L`, which acts as the
//! Fourier multiplier `iω(ξ)`, and the checks that a symbol behaves like
//! `|ξ|^{α+1}` at high frequency and like `|ξ|` at low frequency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralGrid;

/// Built-in symbol families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    /// `ω(ξ) = −ξ|ξ|^α`.
    PurePower,
    /// `ω(ξ) = ξ (tanh ξ / ξ)^{1/2} (1 + τξ²)^{1/2}`, `α = 1/2`.
    Whitham,
    /// `ω(ξ) = ξ² coth ξ`, `α = 1`.
    Ilw,
}

/// Below this `|ξ|` the removable singularities are evaluated by series.
const SERIES_EPS: f64 = 1e-4;
/// Below this `|ξ|` the derivative formulas switch to series (cancellation).
const DERIV_SERIES_EPS: f64 = 0.05;

/// `tanh ξ / ξ = Σ TANH_OVER_X[k] ξ^{2k}`.
const TANH_OVER_X: [f64; 7] = [
    1.0,
    -1.0 / 3.0,
    2.0 / 15.0,
    -17.0 / 315.0,
    62.0 / 2835.0,
    -1382.0 / 155925.0,
    21844.0 / 6081075.0,
];

/// `ξ coth ξ = Σ X_COTH[k] ξ^{2k}`.
const X_COTH: [f64; 7] = [
    1.0,
    1.0 / 3.0,
    -1.0 / 45.0,
    2.0 / 945.0,
    -1.0 / 4725.0,
    2.0 / 93555.0,
    -1382.0 / 638512875.0,
];

/// Value, first and second derivative of the even series `Σ c_k x^{2k}`.
fn even_series(c: &[f64], x: f64) -> [f64; 3] {
    let x2 = x * x;
    let (mut f, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for (k, &ck) in c.iter().enumerate().rev() {
        let k = k as f64;
        f = f * x2 + ck;
        if k >= 1.0 {
            // d/dx x^{2k} = 2k x^{2k-1}; d²/dx² x^{2k} = 2k(2k-1) x^{2k-2}
            d1 = d1 * x2 + 2.0 * k * ck;
            d2 = d2 * x2 + 2.0 * k * (2.0 * k - 1.0) * ck;
        }
    }
    [f, d1 * x, d2]
}

/// `T(ξ) = tanh ξ / ξ` with two derivatives.
fn tanh_over_x(x: f64) -> [f64; 3] {
    if x.abs() < DERIV_SERIES_EPS {
        return even_series(&TANH_OVER_X, x);
    }
    let t = x.tanh();
    let s2 = 1.0 - t * t;
    let d1 = s2 / x - t / (x * x);
    let d2 = -2.0 * t * s2 / x - 2.0 * s2 / (x * x) + 2.0 * t / (x * x * x);
    [t / x, d1, d2]
}

/// `K(ξ) = ξ coth ξ` with two derivatives.
fn x_coth(x: f64) -> [f64; 3] {
    if x.abs() < DERIV_SERIES_EPS {
        return even_series(&X_COTH, x);
    }
    let coth = 1.0 / x.tanh();
    let csch2 = coth * coth - 1.0;
    let d1 = coth - x * csch2;
    let d2 = -2.0 * csch2 + 2.0 * x * csch2 * coth;
    [x * coth, d1, d2]
}

/// A dispersion symbol together with its order `α` and threshold `ξ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionSymbol {
    pub kind: SymbolKind,
    pub alpha: f64,
    /// Surface tension; only read by [`SymbolKind::Whitham`].
    #[serde(default = "one")]
    pub tau: f64,
    #[serde(default = "one")]
    pub xi0: f64,
}

fn one() -> f64 {
    1.0
}

impl DispersionSymbol {
    pub fn new(kind: SymbolKind, alpha: f64, tau: f64, xi0: f64) -> Result<Self> {
        let sym = Self {
            kind,
            alpha,
            tau,
            xi0,
        };
        sym.validate()?;
        Ok(sym)
    }

    pub fn pure_power(alpha: f64) -> Result<Self> {
        Self::new(SymbolKind::PurePower, alpha, 1.0, 1.0)
    }

    pub fn whitham(tau: f64) -> Result<Self> {
        Self::new(SymbolKind::Whitham, 0.5, tau, 1.0)
    }

    pub fn ilw() -> Self {
        Self::new(SymbolKind::Ilw, 1.0, 1.0, 1.0).expect("valid ilw parameters")
    }

    pub fn with_xi0(mut self, xi0: f64) -> Result<Self> {
        self.xi0 = xi0;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.xi0.is_finite() && self.xi0 > 0.0) {
            return Err(Error::config(format!("xi0 must be positive, got {}", self.xi0)));
        }
        match self.kind {
            SymbolKind::PurePower => {}
            SymbolKind::Whitham => {
                if self.alpha != 0.5 {
                    return Err(Error::config("the whitham symbol has alpha = 0.5"));
                }
                if !(self.tau.is_finite() && self.tau > 0.0) {
                    return Err(Error::config(format!("tau must be positive, got {}", self.tau)));
                }
            }
            SymbolKind::Ilw => {
                if self.alpha != 1.0 {
                    return Err(Error::config("the ilw symbol has alpha = 1"));
                }
            }
        }
        Ok(())
    }

    /// `ω(ξ)`.
    pub fn omega(&self, xi: f64) -> f64 {
        match self.kind {
            SymbolKind::PurePower => -xi * xi.abs().powf(self.alpha),
            _ => xi * self.omega_over_xi(xi),
        }
    }

    /// `ω(ξ)/ξ`, extended continuously to `ξ = 0`. Even in `ξ`.
    pub fn omega_over_xi(&self, xi: f64) -> f64 {
        match self.kind {
            SymbolKind::PurePower => -xi.abs().powf(self.alpha),
            SymbolKind::Whitham => {
                let t = if xi.abs() < SERIES_EPS {
                    even_series(&TANH_OVER_X[..4], xi)[0]
                } else {
                    xi.tanh() / xi
                };
                (t * (1.0 + self.tau * xi * xi)).sqrt()
            }
            SymbolKind::Ilw => {
                if xi.abs() < SERIES_EPS {
                    even_series(&X_COTH[..4], xi)[0]
                } else {
                    xi / xi.tanh()
                }
            }
        }
    }

    /// `ω, ω', ω''` from closed forms. For pure powers with `α < 1`, `ω''(0)`
    /// is infinite and returned as NaN.
    fn analytic_derivatives(&self, xi: f64) -> [f64; 3] {
        match self.kind {
            SymbolKind::PurePower => {
                let a = self.alpha;
                let ax = xi.abs();
                let d2 = if xi == 0.0 {
                    if a == 1.0 {
                        0.0
                    } else {
                        f64::NAN
                    }
                } else {
                    -(a + 1.0) * a * xi.signum() * ax.powf(a - 1.0)
                };
                [-xi * ax.powf(a), -(a + 1.0) * ax.powf(a), d2]
            }
            SymbolKind::Whitham => {
                let [t, t1, t2] = tanh_over_x(xi);
                let q = 1.0 + self.tau * xi * xi;
                let q1 = 2.0 * self.tau * xi;
                let q2 = 2.0 * self.tau;
                let p = t * q;
                let p1 = t1 * q + t * q1;
                let p2 = t2 * q + 2.0 * t1 * q1 + t * q2;
                let h = p.sqrt();
                let h1 = p1 / (2.0 * h);
                let h2 = p2 / (2.0 * h) - p1 * p1 / (4.0 * h * h * h);
                [xi * h, h + xi * h1, 2.0 * h1 + xi * h2]
            }
            SymbolKind::Ilw => {
                let [k, k1, k2] = x_coth(xi);
                [xi * k, k + xi * k1, 2.0 * k1 + xi * k2]
            }
        }
    }

    /// `∂^β ω(ξ)`. Orders up to 2 are analytic; orders 3 and 4 are fourth-order
    /// centered differences of the analytic `ω''`.
    pub fn derivative(&self, xi: f64, beta: u32) -> Result<f64> {
        if beta <= 2 {
            return Ok(self.analytic_derivatives(xi)[beta as usize]);
        }
        let h = 1e-3 * xi.abs().max(1.0);
        let w2 = |x: f64| self.analytic_derivatives(x)[2];
        match beta {
            3 => Ok((w2(xi - 2.0 * h) - 8.0 * w2(xi - h) + 8.0 * w2(xi + h) - w2(xi + 2.0 * h))
                / (12.0 * h)),
            4 => Ok((-w2(xi - 2.0 * h) + 16.0 * w2(xi - h) - 30.0 * w2(xi)
                + 16.0 * w2(xi + h)
                - w2(xi + 2.0 * h))
                / (12.0 * h * h)),
            _ => Err(Error::domain(format!("derivative order {beta} is not supported (max 4)"))),
        }
    }

    /// `ω(ξ_j)` at every storage index of `grid`.
    pub fn omega_table(&self, grid: &SpectralGrid) -> Vec<f64> {
        (0..grid.n()).map(|j| self.omega(grid.frequency(j))).collect()
    }

    /// `1/2 − α`, the exponent left invariant by the scaling of the pure-power equation.
    pub fn scaling_critical_index(&self) -> f64 {
        0.5 - self.alpha
    }

    /// `3/2 − 5α/4`, the regularity threshold for the energy method.
    pub fn lwp_threshold(&self) -> f64 {
        1.5 - 1.25 * self.alpha
    }
}

/// Min and max of `|∂^β ω(ξ)| / |ξ|^{α+1−β}` over the sampled range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaRatio {
    pub beta: u32,
    pub min: f64,
    pub max: f64,
    /// `None` when no window applies at this order.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyp2Report {
    /// `sup_{0<ξ≤1} |ω(ξ)|/|ξ|`.
    pub sup: f64,
    pub argmax: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub symbol: DispersionSymbol,
    pub xi_min: f64,
    pub xi_max: f64,
    pub samples: usize,
    pub window: [f64; 2],
    pub ratios: Vec<BetaRatio>,
    pub hyp2: Hyp2Report,
    pub pass: bool,
}

impl HypothesisReport {
    pub fn ratio(&self, beta: u32) -> Option<&BetaRatio> {
        self.ratios.iter().find(|r| r.beta == beta)
    }
}

/// Comparability window for the derivative ratios.
pub const HYPOTHESIS_WINDOW: [f64; 2] = [1.0 / 50.0, 50.0];

const HYPOTHESIS_SAMPLES: usize = 400;

/// Sample the derivative ratios on a log-spaced grid over `xi_range`.
///
/// Orders `β ≤ 2` must stay within [`HYPOTHESIS_WINDOW`], order 3 must stay
/// below its upper end, and order 4 is reported only.
pub fn check_hypothesis1(
    sym: &DispersionSymbol,
    xi_range: (f64, f64),
    beta_max: u32,
) -> Result<HypothesisReport> {
    let (lo, hi) = xi_range;
    if lo < sym.xi0 {
        return Err(Error::domain(format!(
            "range starts at {lo}, below the threshold xi0 = {}",
            sym.xi0
        )));
    }
    if !(hi > lo && hi.is_finite()) {
        return Err(Error::config(format!("invalid frequency range [{lo}, {hi}]")));
    }
    if !(2..=4).contains(&beta_max) {
        return Err(Error::config(format!("beta_max must lie in 2..=4, got {beta_max}")));
    }
    let m = HYPOTHESIS_SAMPLES;
    let xis: Vec<f64> = (0..m)
        .map(|i| lo * (hi / lo).powf(i as f64 / (m - 1) as f64))
        .collect();
    let [wlo, whi] = HYPOTHESIS_WINDOW;
    let mut ratios = Vec::new();
    for beta in 0..=beta_max {
        let mut min = f64::INFINITY;
        let mut max = 0.0f64;
        for &xi in &xis {
            let d = sym.derivative(xi, beta)?.abs();
            let r = d / xi.powf(sym.alpha + 1.0 - beta as f64);
            min = min.min(r);
            max = max.max(r);
        }
        let pass = match beta {
            0..=2 => Some(min >= wlo && max <= whi && min.is_finite() && max.is_finite()),
            3 => Some(max <= whi),
            _ => None,
        };
        ratios.push(BetaRatio {
            beta,
            min,
            max,
            pass,
        });
    }
    let hyp2 = check_hyp2(sym);
    let pass = hyp2.pass && ratios.iter().all(|r| r.pass != Some(false));
    Ok(HypothesisReport {
        symbol: *sym,
        xi_min: lo,
        xi_max: hi,
        samples: m,
        window: HYPOTHESIS_WINDOW,
        ratios,
        hyp2,
        pass,
    })
}

/// Scan `|ω(ξ)|/|ξ|` over `(0, 1]`; passes when the supremum is at most 10.
pub fn check_hyp2(sym: &DispersionSymbol) -> Hyp2Report {
    const M: usize = 4000;
    let mut sup = 0.0f64;
    let mut argmax = 1.0;
    // half linear, half log-spaced down to 1e-8; both include ξ = 1
    let lin = (1..=M).map(|i| i as f64 / M as f64);
    let log = (0..M).map(|i| 10f64.powf(-8.0 * i as f64 / M as f64));
    for xi in lin.chain(log) {
        let r = sym.omega_over_xi(xi).abs();
        if r > sup || !r.is_finite() {
            sup = r;
            argmax = xi;
        }
    }
    Hyp2Report {
        sup,
        argmax,
        pass: sup.is_finite() && sup <= 10.0,
    }
}

/// `Λ^{α/2}`: the even multiplier `|ω(ξ)/ξ|^{1/2}`, continuous at `ξ = 0`.
pub fn lambda_half_multiplier(sym: &DispersionSymbol) -> impl Fn(f64) -> f64 + Copy + '_ {
    move |xi| sym.omega_over_xi(xi).abs().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    // √(2 tanh 1) and (2 tanh 1)^{1/4} at 50 digits, rounded to f64.
    const WHITHAM_OMEGA_1: f64 = 1.2341751544701950;
    const WHITHAM_LAMBDA_1: f64 = 1.1109343610088739;
    const COTH_1: f64 = 1.3130352854993313;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn omega_examples() {
        let p1 = DispersionSymbol::pure_power(1.0).unwrap();
        assert_eq!(p1.omega(2.0), -4.0);
        for a in [0.25, 0.5, 1.0] {
            assert_eq!(DispersionSymbol::pure_power(a).unwrap().omega(0.0), 0.0);
        }
        let w = DispersionSymbol::whitham(1.0).unwrap();
        assert!(close(w.omega(1.0), WHITHAM_OMEGA_1, 1e-15));
        assert_eq!(w.omega(0.0), 0.0);
        assert_eq!(DispersionSymbol::ilw().omega(0.0), 0.0);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(DispersionSymbol::pure_power(0.0).is_err());
        assert!(DispersionSymbol::pure_power(1.5).is_err());
        assert!(DispersionSymbol::whitham(-1.0).is_err());
        assert!(DispersionSymbol::new(SymbolKind::Ilw, 0.5, 1.0, 1.0).is_err());
        assert!(DispersionSymbol::ilw().with_xi0(0.0).is_err());
    }

    #[test]
    fn omega_is_odd_on_a_grid() {
        let grid = SpectralGrid::new(256, 40.0).unwrap();
        for sym in [
            DispersionSymbol::pure_power(0.5).unwrap(),
            DispersionSymbol::whitham(1.0).unwrap(),
            DispersionSymbol::ilw(),
        ] {
            let xs = grid.frequencies();
            let max = xs.iter().map(|&x| sym.omega(x).abs()).fold(0.0, f64::max);
            for &x in &xs {
                assert!((sym.omega(x) + sym.omega(-x)).abs() < 1e-13 * max);
            }
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_the_switch() {
        let w = DispersionSymbol::whitham(2.0).unwrap();
        let i = DispersionSymbol::ilw();
        for sym in [w, i] {
            let a = sym.omega_over_xi(SERIES_EPS * (1.0 - 1e-9));
            let b = sym.omega_over_xi(SERIES_EPS * (1.0 + 1e-9));
            assert!((a - b).abs() < 1e-14);
            let below = sym.analytic_derivatives(DERIV_SERIES_EPS * (1.0 - 1e-12));
            let above = sym.analytic_derivatives(DERIV_SERIES_EPS * (1.0 + 1e-12));
            for b in 0..3 {
                assert!((below[b] - above[b]).abs() < 1e-11, "beta {b}");
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let syms = [
            DispersionSymbol::pure_power(0.5).unwrap(),
            DispersionSymbol::whitham(1.0).unwrap(),
            DispersionSymbol::ilw(),
        ];
        for sym in syms {
            for &xi in &[0.3f64, 1.0, 2.5, 17.0, -4.0] {
                let h = 1e-3 * f64::max(xi.abs(), 1.0);
                for beta in 1..=2 {
                    let f = |x: f64| sym.analytic_derivatives(x)[beta - 1];
                    let fd = (f(xi - 2.0 * h) - 8.0 * f(xi - h) + 8.0 * f(xi + h) - f(xi + 2.0 * h))
                        / (12.0 * h);
                    let an = sym.analytic_derivatives(xi)[beta];
                    assert!(
                        (fd - an).abs() <= 1e-6 * an.abs().max(1e-3),
                        "{:?} xi={xi} beta={beta}: {fd} vs {an}",
                        sym.kind
                    );
                }
            }
        }
    }

    #[test]
    fn pure_power_ratios_are_constant() {
        let sym = DispersionSymbol::pure_power(0.5).unwrap();
        let rep = check_hypothesis1(&sym, (1.0, 1000.0), 3).unwrap();
        let r0 = rep.ratio(0).unwrap();
        assert!(close(r0.min, 1.0, 1e-14) && close(r0.max, 1.0, 1e-14));
        assert!(rep.pass);
    }

    #[test]
    fn whitham_and_ilw_satisfy_the_window() {
        for sym in [DispersionSymbol::whitham(1.0).unwrap(), DispersionSymbol::ilw()] {
            let rep = check_hypothesis1(&sym, (2.0, 100.0), 3).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn range_below_threshold_is_a_domain_error() {
        let sym = DispersionSymbol::ilw();
        assert!(matches!(check_hypothesis1(&sym, (0.5, 10.0), 2), Err(Error::Domain(_))));
    }

    #[test]
    fn hyp2_suprema() {
        let p = check_hyp2(&DispersionSymbol::pure_power(1.0).unwrap());
        assert_eq!(p.sup, 1.0);
        assert_eq!(p.argmax, 1.0);
        let w = check_hyp2(&DispersionSymbol::whitham(1.0).unwrap());
        assert!(close(w.sup, WHITHAM_OMEGA_1, 1e-15));
        let i = check_hyp2(&DispersionSymbol::ilw());
        assert!(close(i.sup, COTH_1, 1e-15));
        assert!(p.pass && w.pass && i.pass);
    }

    #[test]
    fn lambda_half_values() {
        let p = DispersionSymbol::pure_power(1.0).unwrap();
        assert_eq!(lambda_half_multiplier(&p)(4.0), 2.0);
        assert_eq!(lambda_half_multiplier(&p)(0.0), 0.0);
        let i = DispersionSymbol::ilw();
        assert_eq!(lambda_half_multiplier(&i)(0.0), 1.0);
        assert!(close(lambda_half_multiplier(&i)(1e-9), 1.0, 1e-15));
        let w = DispersionSymbol::whitham(1.0).unwrap();
        assert!(close(lambda_half_multiplier(&w)(1.0), WHITHAM_LAMBDA_1, 1e-15));
    }

    #[test]
    fn ilw_approaches_its_pure_power() {
        let r = DispersionSymbol::ilw().omega(50.0).abs() / 2500.0;
        assert!((0.99..=1.01).contains(&r));
    }

    #[test]
    fn thresholds() {
        let s = DispersionSymbol::pure_power(1.0).unwrap();
        assert_eq!(s.scaling_critical_index(), -0.5);
        assert_eq!(s.lwp_threshold(), 0.25);
    }
}
