use dispburgers::config::InitialData;
use dispburgers::energies::{hamiltonian, mass, modified_energy};
use dispburgers::littlewood_paley::{project_band, Band, DyadicLadder};
use dispburgers::multilinear::chi1_over_omega2;
use dispburgers::resonance::omega2;
use dispburgers::solver::{evolve, evolve_backward, run, Scheme, SolverConfig};
use dispburgers::{DispersionSymbol, Field, SpectralGrid};
use proptest::prelude::*;

fn small_data(seed: u64, amp: f64) -> Field {
    InitialData::random_hs(amp, 0.0, 10, seed)
        .build(SpectralGrid::standard(64).unwrap())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn short_runs_conserve_mass_and_hamiltonian(seed in 0u64..1000, alpha in 0.3f64..1.0) {
        let sym = DispersionSymbol::pure_power(alpha).unwrap();
        let u0 = small_data(seed, 0.2);
        let cfg = SolverConfig::new(Scheme::Etdrk4, 5e-4, 0.1);
        let out = run(&u0, &sym, &cfg, None).unwrap();
        let (_, u) = out.record.last().unwrap();
        let dm = (mass(u) - mass(&u0)).abs() / mass(&u0);
        prop_assert!(dm <= 1e-10, "{dm}");
        let h0 = hamiltonian(&u0, &sym).unwrap();
        prop_assert!((hamiltonian(u, &sym).unwrap() - h0).abs() <= 1e-8 * h0.abs());
    }

    #[test]
    fn backward_undoes_forward(seed in 0u64..1000) {
        let sym = DispersionSymbol::whitham(1.0).unwrap();
        let u0 = small_data(seed, 0.2);
        let cfg = SolverConfig::new(Scheme::Ifrk4, 1e-3, 0.05);
        let back = evolve_backward(&evolve(&u0, &sym, &cfg).unwrap(), &sym, &cfg).unwrap();
        let err = back.coeffs().iter().zip(u0.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn dyadic_pieces_reassemble(seed in 0u64..1000) {
        let u = InitialData::random_hs(1.0, 0.0, 100, seed).build(SpectralGrid::standard(256).unwrap()).unwrap();
        for ladder in [DyadicLadder::homogeneous(u.grid()), DyadicLadder::nonhomogeneous(u.grid())] {
            let mut acc = vec![num_complex::Complex64::new(0.0, 0.0); u.coeffs().len()];
            for &n in ladder.scales() {
                for (a, p) in acc.iter_mut().zip(ladder.piece(&u, n).coeffs()) {
                    *a += p;
                }
            }
            // the homogeneous ladder drops the mean
            acc[0] += if ladder.is_homogeneous() { u.coeffs()[0] } else { 0.0.into() };
            let err = acc.iter().zip(u.coeffs()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(err < 1e-13);
        }
    }

    #[test]
    fn band_projections_are_real_and_contracting(seed in 0u64..1000, e in 3i32..7) {
        let u = small_data(seed, 1.0);
        let n = 2f64.powi(e);
        for band in [Band::Ll, Band::Sim] {
            let p = project_band(&u, band, n).unwrap();
            prop_assert!(p.l2_norm() <= u.l2_norm() * (1.0 + 1e-14));
            for k in 1..32 {
                prop_assert!((p.coeff(k) - p.coeff(-k).conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn corrector_symbol_is_odd_under_reflection(x1 in -2.0f64..2.0, x2 in 20.0f64..120.0, alpha in 0.3f64..1.0) {
        let sym = DispersionSymbol::pure_power(alpha).unwrap();
        let a = chi1_over_omega2(&sym, 64.0, 0.3, x1, x2);
        let b = chi1_over_omega2(&sym, 64.0, 0.3, -x1, -x2);
        prop_assert_eq!(a.is_some(), b.is_some());
        if let (Some(a), Some(b)) = (a, b) {
            prop_assert!((a + b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
        prop_assert!((omega2(&sym, x1, x2) + omega2(&sym, -x1, -x2)).abs() < 1e-9);
    }

    #[test]
    fn modified_energy_reduces_to_plain_energy_below_n0(seed in 0u64..1000) {
        let u = small_data(seed, 1.0);
        let sym = DispersionSymbol::pure_power(1.0).unwrap();
        let rep = modified_energy(&u, &sym, 0.5, 1e6).unwrap();
        prop_assert_eq!(rep.corrector_share, 0.0);
        prop_assert!((rep.modified - rep.plain_energy()).abs() <= 1e-13 * rep.modified);
    }
}
