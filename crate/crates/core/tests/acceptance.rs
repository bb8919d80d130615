//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p dispburgers --test acceptance`.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dispburgers::config::InitialData;
use dispburgers::dispersion::{check_hypothesis1, DispersionSymbol};
use dispburgers::energies::{
    coercivity_check, corrector_e1, difference_coercivity_check, difference_corrector_2, MAX_DOUBLINGS,
};
use dispburgers::experiments::{chain_rule_check, difference_experiment, run_to_dir, ExperimentSpec};
use dispburgers::littlewood_paley::{eta, phi, phi_n, psi, tilde_phi, DyadicLadder};
use dispburgers::multilinear::{
    check_marcinkiewicz, chi1_over_omega2, chi1_value, commutator_residual, symbol_chi1_over_omega2,
    FreqBox, MultiplierSymbol, OMEGA2_GUARD,
};
use dispburgers::resonance::{omega2, omega3, verify_res2, ResonanceSampling};
use dispburgers::solver::{self, convergence_study, scaling_check, Scheme, SolverConfig};
use dispburgers::{Field, RunConfig, SpectralGrid};

const PARTITION_TOL: f64 = 1e-12;
const PARTITION_BUDGET: Duration = Duration::from_secs(1);
const COMMUTATOR_TOL: f64 = 1e-8;
const COMMUTATOR_BUDGET: Duration = Duration::from_secs(30);
const RES2_MAX_SPREAD: f64 = 50.0;
const SAME_SIGN_SLACK: f64 = 1e-12;
const OMEGA3_TOL: f64 = 1e-12;
const RESONANCE_BUDGET: Duration = Duration::from_secs(60);
const HYPOTHESIS_BUDGET: Duration = Duration::from_secs(5);
const ILW_RATIO_WINDOW: [f64; 2] = [0.99, 1.01];
const MASS_TOL: f64 = 1e-10;
const HAMILTONIAN_TOL: f64 = 1e-8;
const CONSERVATION_BUDGET: Duration = Duration::from_secs(60);
const SLOPE_WINDOW: [f64; 2] = [3.7, 4.3];
const LINEAR_PHASE_TOL: f64 = 1e-12;
const SCALING_TOL: f64 = 1e-6;
const CRITICAL_NORM_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-10;
const CANCELLATION_TOL: f64 = 1e-12;
const RATE_WINDOW: [f64; 2] = [1.8, 2.2];
const LIPSCHITZ_MAX_RATIO: f64 = 10.0;
const LIPSCHITZ_MAX_VARIATION: f64 = 0.5;
const MARCINKIEWICZ_BETA: u32 = 2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let o = f();
    (o, start.elapsed())
}

fn grid(n: usize) -> SpectralGrid {
    SpectralGrid::standard(n).unwrap()
}

fn random_field(g: SpectralGrid, modes: impl Iterator<Item = i64>, rng: &mut ChaCha8Rng) -> Field {
    let m: Vec<(i64, Complex64)> = modes
        .map(|k| (k, Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
        .collect();
    Field::from_modes(g, &m).unwrap()
}

fn bo() -> DispersionSymbol {
    DispersionSymbol::pure_power(1.0).unwrap()
}

fn partition_of_unity() -> Outcome {
    let (o, elapsed) = timed(|| {
        let mut worst = 0.0f64;
        for (n, length) in [(512, 2.0 * std::f64::consts::PI), (256, 50.0), (128, 3.0)] {
            let g = SpectralGrid::new(n, length).unwrap();
            let ladder = DyadicLadder::homogeneous(&g);
            let nonhom = DyadicLadder::nonhomogeneous(&g);
            for j in 1..n / 2 {
                let xi = g.xi_of(j as i64);
                for x in [xi, -xi] {
                    let direct: f64 = (-30..=30).map(|e| phi_n(2f64.powi(e), x)).sum();
                    worst = worst
                        .max((direct - 1.0).abs())
                        .max((ladder.sum(x) - 1.0).abs())
                        .max((nonhom.sum(x) - 1.0).abs());
                }
            }
        }
        let mut worst_psi = 0.0f64;
        for i in 0..20001 {
            let x = -5000.0 + 0.5 * i as f64;
            let total: f64 = (0..=20).map(|e| psi(2f64.powi(e), x)).sum();
            worst_psi = worst_psi.max((total - 1.0).abs());
        }
        outcome(
            worst < PARTITION_TOL && worst_psi < PARTITION_TOL,
            format!("max |sum phi_N - 1| = {worst:.2e}, max |sum psi_L - 1| = {worst_psi:.2e}"),
        )
    });
    budget(o, elapsed, PARTITION_BUDGET)
}

fn budget(o: Outcome, elapsed: Duration, limit: Duration) -> Outcome {
    let ok = elapsed <= limit;
    outcome(
        o.pass && ok,
        format!("{}, {:.2} s (limit {} s)", o.detail, elapsed.as_secs_f64(), limit.as_secs()),
    )
}

fn commutator_identity() -> Outcome {
    let (o, elapsed) = timed(|| {
        let g = grid(512);
        let mut worst = 0.0f64;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let u = random_field(g, 1..=170, &mut rng);
            worst = worst.max(commutator_residual(&u, 64.0).unwrap());
        }
        outcome(worst < COMMUTATOR_TOL, format!("worst relative residual {worst:.2e} over 20 seeds"))
    });
    budget(o, elapsed, COMMUTATOR_BUDGET)
}

fn resonance_comparability() -> Outcome {
    let (o, elapsed) = timed(|| {
        let mut pass = true;
        let mut parts = Vec::new();
        for (alpha, seed) in [(0.5, 11), (1.0, 12)] {
            let sym = DispersionSymbol::pure_power(alpha).unwrap();
            let rep = verify_res2(&sym, &ResonanceSampling::new(100_000, 1.0, 1e3, seed)).unwrap();
            pass &= rep.spread() <= RES2_MAX_SPREAD;
            parts.push(format!("spread(alpha={alpha}) = {:.3}", rep.spread()));
        }
        let mut same = ResonanceSampling::new(100_000, 1.0, 1e3, 13);
        same.same_sign = true;
        let rep = verify_res2(&bo(), &same).unwrap();
        pass &= rep.ratio_min >= 1.0 - SAME_SIGN_SLACK && rep.ratio_max <= 2.0 + SAME_SIGN_SLACK;
        parts.push(format!("same-sign ratio in [{:.12}, {:.12}]", rep.ratio_min, rep.ratio_max));
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut worst = 0.0f64;
        for alpha in [0.5, 1.0] {
            let sym = DispersionSymbol::pure_power(alpha).unwrap();
            for _ in 0..100_000 {
                let [a, b, c]: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1e3..1e3));
                let scale = [a, b, c, a + b + c]
                    .iter()
                    .map(|x| sym.omega(*x).abs())
                    .fold(1.0, f64::max);
                let d = omega3(&sym, a, b, c) - omega2(&sym, b + c, a) - omega2(&sym, b, c);
                worst = worst.max(d.abs() / scale);
            }
        }
        pass &= worst <= OMEGA3_TOL;
        parts.push(format!("omega3 decomposition defect {worst:.2e}"));
        outcome(pass, parts.join(", "))
    });
    budget(o, elapsed, RESONANCE_BUDGET)
}

fn symbol_hypotheses() -> Outcome {
    let (o, elapsed) = timed(|| {
        let whitham = check_hypothesis1(&DispersionSymbol::whitham(1.0).unwrap(), (2.0, 100.0), 2).unwrap();
        let ilw_sym = DispersionSymbol::ilw();
        let ilw = check_hypothesis1(&ilw_sym, (2.0, 100.0), 2).unwrap();
        let ratio = ilw_sym.omega(50.0).abs() / 2500.0;
        let in_window = ratio >= ILW_RATIO_WINDOW[0] && ratio <= ILW_RATIO_WINDOW[1];
        outcome(
            whitham.pass && ilw.pass && in_window,
            format!(
                "whitham pass={} (hyp2 sup {:.3}), ilw pass={} (hyp2 sup {:.3}), ilw |omega(50)|/2500 = {ratio:.6}",
                whitham.pass, whitham.hyp2.sup, ilw.pass, ilw.hyp2.sup
            ),
        )
    });
    budget(o, elapsed, HYPOTHESIS_BUDGET)
}

fn conservation() -> Outcome {
    let (o, elapsed) = timed(|| {
        let g = grid(256);
        let sym = bo();
        let u0 = Field::cosine(g, 1, 0.1).unwrap();
        let cfg = SolverConfig::new(Scheme::Ifrk4, 1e-3, 1.0).with_record_every(50);
        let out = solver::run(&u0, &sym, &cfg, None).unwrap();
        let m0 = dispburgers::energies::mass(&u0);
        let h0 = dispburgers::energies::hamiltonian(&u0, &sym).unwrap();
        let (mut dm, mut dh) = (0.0f64, 0.0f64);
        for u in out.record.snapshots() {
            dm = dm.max(((dispburgers::energies::mass(u) - m0) / m0).abs());
            dh = dh.max(((dispburgers::energies::hamiltonian(u, &sym).unwrap() - h0) / h0).abs());
        }
        outcome(
            dm < MASS_TOL && dh < HAMILTONIAN_TOL,
            format!("relative mass drift {dm:.2e}, Hamiltonian drift {dh:.2e}"),
        )
    });
    budget(o, elapsed, CONSERVATION_BUDGET)
}

fn temporal_order() -> Outcome {
    let g = grid(128);
    let sym = bo();
    let u0 = Field::from_modes(
        g,
        &[(1, Complex64::new(0.25, 0.0)), (2, Complex64::new(0.0, -0.1)), (3, Complex64::new(0.05, 0.05))],
    )
    .unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for scheme in [Scheme::Ifrk4, Scheme::Etdrk4] {
        let cfg = SolverConfig::new(scheme, 1e-3, 0.2);
        let rep = convergence_study(&u0, &sym, &cfg, &[4e-3, 2e-3, 1e-3]).unwrap();
        pass &= rep.slope >= SLOPE_WINDOW[0] && rep.slope <= SLOPE_WINDOW[1];
        parts.push(format!("{scheme:?} slope {:.3}", rep.slope));
        let lin = SolverConfig::new(scheme, 1e-2, 1.0).linear();
        let out = solver::run(&u0, &sym, &lin, None).unwrap();
        let mut worst = 0.0f64;
        for (&t, u) in out.record.times().iter().zip(out.record.snapshots()) {
            for k in 1..=3i64 {
                let xi = g.xi_of(k);
                let exact = u0.coeff(k) * Complex64::from_polar(1.0, -sym.omega(xi) * t);
                worst = worst.max((u.coeff(k) - exact).norm());
            }
        }
        pass &= worst < LINEAR_PHASE_TOL;
        parts.push(format!("{scheme:?} linear phase error {worst:.2e}"));
    }
    outcome(pass, parts.join(", "))
}

fn scaling_invariance() -> Outcome {
    let g = grid(128);
    let sym = DispersionSymbol::pure_power(0.5).unwrap();
    let u0 = Field::from_modes(g, &[(1, Complex64::new(0.1, 0.0)), (2, Complex64::new(0.0, 0.05))]).unwrap();
    let cfg = SolverConfig::new(Scheme::Ifrk4, 1e-3, 0.5).with_record_every(50);
    let rep = scaling_check(&u0, &sym, 2.0, &cfg).unwrap();
    outcome(
        rep.discrepancy < SCALING_TOL && rep.critical_norm_defect < CRITICAL_NORM_TOL,
        format!(
            "sup-norm discrepancy {:.2e}, critical norm defect {:.2e}",
            rep.discrepancy, rep.critical_norm_defect
        ),
    )
}

/// `φ_N(ξ₂) + 2((ξ₁+ξ₂)/ξ₁)(φ_N(ξ₁+ξ₂) − φ_N(ξ₂))φ̃_N(ξ₂)`, times the outer
/// cutoff and bracket factor: the commutator integral in closed form.
fn chi1_closed_form(n: f64, s: f64, x1: f64, x2: f64) -> f64 {
    let outer = phi(x1 / n + x2 / n);
    if outer == 0.0 {
        return 0.0;
    }
    let ratio = ((1.0 + n * n).sqrt() / n).powf(2.0 * s);
    let inner = phi(x2 / n) + 2.0 * (x1 + x2) / x1 * (phi((x1 + x2) / n) - phi(x2 / n)) * tilde_phi(x2 / n);
    ratio * inner * outer
}

/// Triple sum over all `k₁ + k₂ + k₃ = 0` of the full coefficient arrays,
/// with the band cutoffs applied inside the loop.
fn e1_oracle(u: &Field, sym: &DispersionSymbol, s: f64, n: f64) -> (f64, f64) {
    let g = u.grid();
    let half = (g.n() / 2) as i64;
    let na = n.powf(sym.alpha);
    let (mut sum, mut scale) = (0.0, 0.0);
    for k1 in (-half + 1)..half {
        if k1 == 0 {
            continue;
        }
        let x1 = g.xi_of(k1);
        let a = u.coeff(k1) * eta(32.0 * x1 / n);
        for k2 in (-half + 1)..half {
            let k3 = -k1 - k2;
            if k3.abs() >= half {
                continue;
            }
            let x2 = g.xi_of(k2);
            let x3 = g.xi_of(k3);
            let b = u.coeff(k2) * tilde_phi(x2 / n);
            let c = u.coeff(k3) * tilde_phi(x3 / n);
            let chi = chi1_closed_form(n, s, x1, x2);
            if chi == 0.0 {
                continue;
            }
            let om = sym.omega(x1 + x2) - sym.omega(x1) - sym.omega(x2);
            if om.abs() < OMEGA2_GUARD * x1.abs() * na {
                continue;
            }
            let term = a * b * c * (chi / om * x1);
            sum += term.re;
            scale += term.norm();
        }
    }
    (g.length() * sum, g.length() * scale)
}

fn e2_oracle(z: &Field, w: &Field, sym: &DispersionSymbol, sigma: f64, n: f64) -> (f64, f64) {
    let g = w.grid();
    let half = (g.n() / 2) as i64;
    let na = n.powf(sym.alpha);
    let pre = (1.0 + 1.0 / (n * n)) * ((1.0 + n * n).sqrt() / n).powf(2.0 * sigma);
    let (mut sum, mut scale) = (0.0, 0.0);
    for k1 in (-half + 1)..half {
        if k1 == 0 {
            continue;
        }
        let x1 = g.xi_of(k1);
        let a = w.coeff(k1) * eta(32.0 * x1 / n);
        for k2 in (-half + 1)..half {
            let k3 = -k1 - k2;
            if k3.abs() >= half {
                continue;
            }
            let x2 = g.xi_of(k2);
            let x3 = g.xi_of(k3);
            let b = z.coeff(k2) * tilde_phi(x2 / n);
            let c = w.coeff(k3) * tilde_phi(x3 / n);
            let p = phi((x1 + x2) / n);
            if p == 0.0 {
                continue;
            }
            let om = sym.omega(x1 + x2) - sym.omega(x1) - sym.omega(x2);
            if om.abs() < OMEGA2_GUARD * x1.abs() * na {
                continue;
            }
            let term = a * b * c * (pre * p * p / om * (x1 + x2));
            sum += term.re;
            scale += term.norm();
        }
    }
    (g.length() * sum, g.length() * scale)
}

/// Low modes `1..=3` plus a band around `k_hi`, random coefficients.
fn multiscale(g: SpectralGrid, k_hi: i64, rng: &mut ChaCha8Rng) -> Field {
    random_field(g, (1..=3).chain(k_hi - 12..=k_hi + 12), rng)
}

fn modified_energy_correctness() -> Outcome {
    let g = grid(128);
    let n = 32.0;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut worst_e1 = 0.0f64;
    let mut worst_e2 = 0.0f64;
    for (i, alpha) in [0.5, 1.0].into_iter().cycle().take(10).enumerate() {
        let sym = DispersionSymbol::pure_power(alpha).unwrap();
        let k_hi = 28 + 2 * i as i64;
        let u = multiscale(g, k_hi, &mut rng);
        let (lib, _) = corrector_e1(&u, &sym, 0.3, n);
        let (oracle, scale) = e1_oracle(&u, &sym, 0.3, n);
        worst_e1 = worst_e1.max((lib - oracle).abs() / scale.max(f64::MIN_POSITIVE));
        let z = multiscale(g, k_hi, &mut rng);
        let w = multiscale(g, k_hi + 1, &mut rng);
        let (lib2, _) = difference_corrector_2(&z, &w, &sym, -0.2, n);
        let (oracle2, scale2) = e2_oracle(&z, &w, &sym, -0.2, n);
        worst_e2 = worst_e2.max((lib2 - oracle2).abs() / scale2.max(f64::MIN_POSITIVE));
    }
    let mut worst_cancel = 0.0f64;
    let mut checked = 0;
    for alpha in [0.5, 1.0] {
        let sym = DispersionSymbol::pure_power(alpha).unwrap();
        for _ in 0..20_000 {
            let nn = 2f64.powi(rng.random_range(4..10));
            let x1 = rng.random_range(-nn / 16.0..nn / 16.0);
            let x2 = rng.random_range(nn / 4.0..4.0 * nn) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            if let Some(q) = chi1_over_omega2(&sym, nn, 0.3, x1, x2) {
                let chi = chi1_value(nn, 0.3, x1, x2);
                worst_cancel = worst_cancel.max((q * omega2(&sym, x1, x2) - chi).abs() / chi.abs().max(1.0));
                checked += 1;
            }
        }
    }
    let g2 = grid(128);
    let u = multiscale(g2, 30, &mut ChaCha8Rng::seed_from_u64(22)).scaled(0.05);
    let cfg = SolverConfig::new(Scheme::Ifrk4, 1e-3, 1.0);
    let chain = chain_rule_check(&u, &bo(), &cfg, 0.3, None, &[1e-3, 5e-4]).unwrap();
    let rate = chain.rate.unwrap_or(f64::NAN);
    let rate_ok = chain.n > 0.0 && rate >= RATE_WINDOW[0] && rate <= RATE_WINDOW[1];
    outcome(
        worst_e1 < ORACLE_TOL && worst_e2 < ORACLE_TOL && worst_cancel < CANCELLATION_TOL && rate_ok,
        format!(
            "E1 vs oracle {worst_e1:.2e}, E2 vs oracle {worst_e2:.2e}, cancellation {worst_cancel:.2e} on {checked} points, chain-rule rate {rate:.3} at N = {}",
            chain.n
        ),
    )
}

fn coercivity() -> Outcome {
    let g = grid(256);
    let sym = bo();
    let n0 = 64.0;
    let limit = n0 * 2f64.powi(MAX_DOUBLINGS as i32);
    let (mut pass, mut trivial, mut worst, mut worst_diff) = (true, 0, 0.0f64, 0.0f64);
    for i in 0..10u64 {
        let u = InitialData::random_hs(1.0, 0.3, 80, 300 + i).build(g).unwrap();
        let rep = coercivity_check(&u, &sym, 0.3, n0).unwrap();
        let found = rep.n0_pass.filter(|&n| n <= limit);
        pass &= rep.pass && found.is_some();
        trivial += rep.trivial as usize;
        worst = worst.max(found.unwrap_or(f64::INFINITY));
        let z = InitialData::random_hs(1.0, 0.3, 80, 400 + i).build(g).unwrap();
        let w = InitialData::random_hs(1.0, -0.2, 80, 500 + i).build(g).unwrap();
        let rep = difference_coercivity_check(&z, &w, &sym, 0.3, -0.2, n0).unwrap();
        let found = rep.n0_pass.filter(|&n| n <= limit);
        pass &= rep.pass && found.is_some();
        trivial += rep.trivial as usize;
        worst_diff = worst_diff.max(found.unwrap_or(f64::INFINITY));
    }
    outcome(
        pass,
        format!("largest passing N0 {worst} (difference {worst_diff}), {trivial} of 20 passes trivial"),
    )
}

fn lipschitz() -> Outcome {
    let cfg = RunConfig::from_json(
        r#"{"equation": {"alpha": 1.0}, "grid": {"n": 128},
            "time": {"dt": 1e-3, "t_final": 0.5, "record_every": 1},
            "initial": {"kind": "random_hs", "amplitude": 1.0, "params": {"s": 0.3, "kmax": 16}, "seed": 7},
            "diagnostics": {"s": 0.3, "sigma": -0.2},
            "experiment": {"kind": "lipschitz", "epsilons": [1e-2, 1e-3, 1e-4], "t_prime": 0.5}}"#,
    )
    .unwrap();
    let spec = ExperimentSpec::from_config(&cfg).unwrap();
    let table = difference_experiment(&spec, &[1e-2, 1e-3, 1e-4]).unwrap();
    let finals: Vec<f64> = table.rows.iter().map(|r| r.ratio_final).collect();
    let max = finals.iter().cloned().fold(0.0, f64::max);
    let min = finals.iter().cloned().fold(f64::INFINITY, f64::min);
    let variation = (max - min) / min;
    let blow_up = table.rows.iter().any(|r| r.blow_up);
    let order = table.residual.as_ref().map(|r| r.order).unwrap_or(f64::NAN);
    outcome(
        !blow_up
            && max <= LIPSCHITZ_MAX_RATIO
            && variation < LIPSCHITZ_MAX_VARIATION
            && order >= RATE_WINDOW[0]
            && order <= RATE_WINDOW[1],
        format!("ratios {finals:.4?}, variation {variation:.2e}, residual order {order:.3}"),
    )
}

fn tensor(n1: f64, n2: f64) -> MultiplierSymbol {
    MultiplierSymbol::bilinear(format!("phi_{n1} x phi_{n2}"), move |a, b| {
        (phi_n(n1, a) * phi_n(n2, b)).into()
    })
}

/// `N₁N₂^α/Ω₂`, the bare resonance symbol on `|ξ₁| ∼ N₁`, `|ξ₂| ∼ N₂`.
fn inverse_resonance(alpha: f64, n1: f64, n2: f64) -> MultiplierSymbol {
    let sym = DispersionSymbol::pure_power(alpha).unwrap();
    MultiplierSymbol::bilinear(format!("N1 N2^a / Omega2 (a={alpha})"), move |a, b| {
        (n1 * n2.powf(alpha) / omega2(&sym, a, b)).into()
    })
}

fn marcinkiewicz() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut tensor_worst = 0.0f64;
    for (n1, n2) in [(1.0, 64.0), (2.0, 64.0), (4.0, 256.0)] {
        let r = check_marcinkiewicz(&tensor(n1, n2), &[FreqBox::dyadic(&[n1, n2])], MARCINKIEWICZ_BETA).unwrap();
        pass &= r.pass;
        tensor_worst = tensor_worst.max(r.worst);
    }
    parts.push(format!("tensor worst {tensor_worst:.1}"));
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut pairs = 0;
    let mut closure_worst = 0.0f64;
    let mut closure_ok = true;
    while pairs < 5 {
        let n1 = 2f64.powi(rng.random_range(0..4));
        let n2 = n1 * 2f64.powi(rng.random_range(5..8));
        let alpha = if rng.random::<bool>() { 0.5 } else { 1.0 };
        let boxes = [FreqBox::dyadic(&[n1, n2])];
        let a = tensor(n1, n2);
        let b = inverse_resonance(alpha, n1, n2);
        let ra = check_marcinkiewicz(&a, &boxes, MARCINKIEWICZ_BETA).unwrap();
        let rb = check_marcinkiewicz(&b, &boxes, MARCINKIEWICZ_BETA).unwrap();
        if !(ra.pass && rb.pass) {
            continue;
        }
        let rp = check_marcinkiewicz(&a.product(&b).unwrap(), &boxes, MARCINKIEWICZ_BETA).unwrap();
        closure_ok &= rp.pass;
        closure_worst = closure_worst.max(rp.worst);
        pairs += 1;
    }
    pass &= closure_ok;
    parts.push(format!("closure worst {closure_worst:.1} on {pairs} pairs"));
    for alpha in [0.5, 1.0] {
        let sym = DispersionSymbol::pure_power(alpha).unwrap();
        for n in [64.0, 256.0] {
            for n1 in [n / 32.0, n / 64.0] {
                let base = symbol_chi1_over_omega2(&sym, n, 0.3);
                let scale = n1 * n.powf(alpha);
                let chi = MultiplierSymbol::bilinear("normalized chi1/Omega2", move |a, b| base.eval(&[a, b]) * scale);
                let r = check_marcinkiewicz(&chi, &[FreqBox::dyadic(&[n1, n])], MARCINKIEWICZ_BETA).unwrap();
                pass &= r.pass;
                parts.push(format!("chi1/Omega2(a={alpha}, N={n}, N1={n1}) worst {:.0}", r.worst));
            }
        }
    }
    outcome(pass, parts.join(", "))
}

fn rerun_matches(cfg: &RunConfig, dir: &Path) -> bool {
    let first = dir.join("first");
    let second = dir.join("second");
    run_to_dir(cfg, &first).unwrap();
    let echo = RunConfig::load(first.join("spec.json")).unwrap();
    run_to_dir(&echo, &second).unwrap();
    std::fs::read(first.join("results.csv")).unwrap() == std::fs::read(second.join("results.csv")).unwrap()
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let base = r#""equation": {"alpha": 1.0}, "grid": {"n": 64},
        "initial": {"kind": "random_hs", "amplitude": 0.3, "params": {"s": 0.3, "kmax": 20}, "seed": 9},
        "diagnostics": {"s": 0.3, "sigma": -0.2, "n0": 8}"#;
    let experiments = [
        ("lipschitz", r#""time": {"dt": 2e-3, "t_final": 0.1}, "experiment": {"kind": "lipschitz", "t_prime": 0.1}"#),
        ("energy_drift", r#""time": {"dt": 2e-3, "t_final": 0.1, "record_every": 10}, "experiment": {"kind": "energy_drift"}"#),
        ("xsb", r#""time": {"dt": 5e-3, "t_final": 0.5}, "experiment": {"kind": "xsb"}"#),
        ("strichartz", r#""experiment": {"kind": "strichartz", "scales": [4, 8, 16], "ensemble": 2, "times": 33}"#),
    ];
    let mut same = Vec::new();
    for (name, extra) in experiments {
        let cfg = RunConfig::from_json(&format!("{{{base}, {extra}}}")).unwrap();
        same.push((name, rerun_matches(&cfg, &tmp.path().join(name))));
    }
    outcome(
        same.iter().all(|s| s.1),
        same.iter().map(|(n, s)| format!("{n} identical={s}")).collect::<Vec<_>>().join(", "),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("partition of unity", partition_of_unity),
        ("commutator identity", commutator_identity),
        ("resonance comparability", resonance_comparability),
        ("symbol hypotheses", symbol_hypotheses),
        ("conservation", conservation),
        ("temporal order", temporal_order),
        ("scaling invariance", scaling_invariance),
        ("modified-energy correctness", modified_energy_correctness),
        ("coercivity", coercivity),
        ("lipschitz experiment", lipschitz),
        ("marcinkiewicz checker", marcinkiewicz),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut out = std::io::stdout();
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let o = check();
        failed += !o.pass as usize;
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        writeln!(out, "criterion {:2} {name}: {verdict} ({})", i + 1, o.detail).unwrap();
        out.flush().unwrap();
    }
    if failed > 0 {
        writeln!(out, "{failed} criterion(s) failed").unwrap();
        std::process::exit(1);
    }
}
