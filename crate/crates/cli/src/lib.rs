//! Command-line driver: every numeric parameter comes from a JSON config,
//! flags only pick the subcommand and the paths.
//!
//! Exit codes: 0 on success, 1 on a configuration or input error, 2 when an
//! assertable check fails.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dispburgers::config::{InitialData, RunConfig};
use dispburgers::energies::{self, coercivity_check, difference_coercivity_check};
use dispburgers::experiments::{self, ExperimentSummary, Property};
use dispburgers::io::{write_json_pretty, write_jsonl_row, CsvWriter};
use dispburgers::littlewood_paley::phi_n;
use dispburgers::multilinear::{
    check_marcinkiewicz, commutator_residual, symbol_chi1_over_omega2, write_symbol_dump, FreqBox,
    MarcinkiewiczReport, MultiplierSymbol,
};
use dispburgers::resonance::{verify_res2, verify_res3, ResonanceSampling};
use dispburgers::solver;
use dispburgers::{dispersion, Error, Field, SymbolKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CHECK: i32 = 2;

/// Largest accepted `max/min` spread of the sampled `Ω₃` ratio.
pub const RES3_MAX_SPREAD: f64 = 100.0;

#[derive(Debug, Parser)]
#[command(name = "dispburgers", version, about = "Pseudospectral lab for dispersive Burgers equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the equation and write conservation diagnostics.
    Simulate(Paths),
    /// Check the dispersion symbol hypotheses.
    CheckSymbol(Paths),
    /// Sample the resonance functions.
    CheckResonance(Paths),
    /// Commutator identity and Marcinkiewicz checks.
    CheckMultiplier(Paths),
    /// Coercivity of the modified energies on random fields.
    CheckEnergy(Paths),
    /// Run the experiment named in the config.
    Experiment(Paths),
    /// Self-convergence study of the time integrator.
    Convergence(Paths),
}

#[derive(Debug, Args)]
struct Paths {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::CheckSymbol(_) => "check-symbol",
            Command::CheckResonance(_) => "check-resonance",
            Command::CheckMultiplier(_) => "check-multiplier",
            Command::CheckEnergy(_) => "check-energy",
            Command::Experiment(_) => "experiment",
            Command::Convergence(_) => "convergence",
        }
    }

    fn paths(&self) -> &Paths {
        match self {
            Command::Simulate(p)
            | Command::CheckSymbol(p)
            | Command::CheckResonance(p)
            | Command::CheckMultiplier(p)
            | Command::CheckEnergy(p)
            | Command::Experiment(p)
            | Command::Convergence(p) => p,
        }
    }
}

/// Parse `argv` (program name first), run the subcommand and return the
/// exit code. Messages go to stdout and stderr.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let name = cli.command.name();
    let paths = cli.command.paths();
    let mut cfg = match RunConfig::load(&paths.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", paths.config.display());
            return EXIT_CONFIG;
        }
    };
    let dir = paths.out.clone().unwrap_or_else(|| cfg.output.resolve(name));
    cfg.output.dir = Some(dir.clone());
    let result = std::fs::create_dir_all(&dir)
        .map_err(Error::from)
        .and_then(|_| write_echo(&cfg, &dir))
        .and_then(|_| match &cli.command {
            Command::Simulate(_) => simulate(&cfg, &dir),
            Command::CheckSymbol(_) => check_symbol(&cfg, &dir),
            Command::CheckResonance(_) => check_resonance(&cfg, &dir),
            Command::CheckMultiplier(_) => check_multiplier(&cfg, &dir),
            Command::CheckEnergy(_) => check_energy(&cfg, &dir),
            Command::Experiment(_) => experiments::run_to_dir(&cfg, &dir),
            Command::Convergence(_) => convergence(&cfg, &dir),
        });
    match result {
        Ok(summary) => finish(name, &summary, &dir),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn finish(name: &str, summary: &ExperimentSummary, dir: &Path) -> i32 {
    if let Err(e) = write_json_pretty(dir.join("summary.json"), summary) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    let failed = summary.failed();
    if failed.is_empty() {
        println!("{name}: ok ({})", dir.display());
        EXIT_OK
    } else {
        for p in &failed {
            eprintln!("{name}: check failed: {p}");
        }
        EXIT_CHECK
    }
}

fn write_echo(cfg: &RunConfig, dir: &Path) -> dispburgers::Result<()> {
    std::fs::write(dir.join("spec.json"), cfg.to_json_pretty() + "\n")?;
    Ok(())
}

fn summary(cfg: &RunConfig, kind: &str, properties: Vec<Property>) -> ExperimentSummary {
    let pass = properties.iter().all(|p| p.pass != Some(false));
    ExperimentSummary {
        name: if cfg.name.is_empty() { kind.to_string() } else { cfg.name.clone() },
        kind: kind.into(),
        properties,
        pass,
    }
}

fn checked(name: impl Into<String>, value: f64, pass: bool) -> Property {
    Property {
        name: name.into(),
        value,
        pass: Some(pass),
    }
}

fn reported(name: impl Into<String>, value: f64) -> Property {
    Property {
        name: name.into(),
        value,
        pass: None,
    }
}

fn write_report(dir: &Path, value: &impl Serialize) -> dispburgers::Result<()> {
    write_json_pretty(dir.join("report.json"), value)
}

fn relative_drift(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        (b - a).abs()
    } else {
        ((b - a) / a).abs()
    }
}

const SIMULATE_COLUMNS: [&str; 7] = [
    "t",
    "mass",
    "hamiltonian",
    "hs_norm",
    "modified_energy",
    "corrector_share",
    "guard_skips",
];

fn simulate(cfg: &RunConfig, dir: &Path) -> dispburgers::Result<ExperimentSummary> {
    let sym = cfg.symbol()?;
    let grid = cfg.grid()?;
    let (u0, t0) = match &cfg.simulate.resume_from {
        Some(path) => {
            let u = Field::read_csv(BufReader::new(File::open(path)?))?;
            if *u.grid() != grid {
                return Err(Error::Config(format!(
                    "snapshot {} does not match the configured grid",
                    path.display()
                )));
            }
            (u, cfg.simulate.resume_time)
        }
        None => (cfg.initial_field()?, 0.0),
    };
    let d = cfg.diagnostics;
    if d.every == 0 {
        return Err(Error::Config("diagnostics.every must be at least 1".into()));
    }
    let snapshots = dir.join("snapshots");
    if cfg.simulate.snapshot_every > 0 {
        std::fs::create_dir_all(&snapshots)?;
    }
    let mut csv = CsvWriter::create(dir.join("results.csv"), &SIMULATE_COLUMNS)?;
    let mut jsonl = BufWriter::new(File::create(dir.join("energies.jsonl"))?);
    let mut first: Option<(f64, f64)> = None;
    let mut last = (0.0, 0.0, t0);
    let mut index = 0usize;
    let t_end = cfg.time.t_final;
    let half_step = 0.5 * cfg.time.dt;
    let outcome = solver::run_from(&u0, t0, &sym, &cfg.time, None, |t, u, _| {
        let is_last = (t - t_end).abs() < half_step;
        if index % d.every == 0 || is_last {
            let rep = energies::modified_energy(u, &sym, d.s, d.n0)?.at(t);
            csv.row(&[
                t,
                rep.mass,
                rep.hamiltonian,
                rep.hs_norm,
                rep.modified,
                rep.corrector_share,
                rep.guard_skips as f64,
            ])?;
            write_jsonl_row(&mut jsonl, &rep)?;
            first.get_or_insert((rep.mass, rep.hamiltonian));
            last = (rep.mass, rep.hamiltonian, t);
        }
        let every = cfg.simulate.snapshot_every;
        if every > 0 && (index % every == 0 || is_last) {
            let mut w = BufWriter::new(File::create(snapshots.join(format!("u_{index:06}.csv")))?);
            u.write_csv(&mut w)?;
            w.flush()?;
        }
        index += 1;
        Ok(())
    });
    csv.flush()?;
    jsonl.flush()?;
    let (blow_up, final_field) = match outcome {
        Ok(out) => (false, out.record.last().map(|(_, u)| u.clone())),
        Err(Error::BlowUp { partial, .. }) => (true, partial.last().map(|(_, u)| u.clone())),
        Err(e) => return Err(e),
    };
    if let Some(u) = final_field {
        let mut w = BufWriter::new(File::create(dir.join("final.csv"))?);
        u.write_csv(&mut w)?;
        w.flush()?;
    }
    let (m0, h0) = first.unwrap_or((0.0, 0.0));
    let (m1, h1, t1) = last;
    Ok(summary(
        cfg,
        "simulate",
        vec![
            checked("no_blow_up", t1, !blow_up),
            reported("mass_drift", relative_drift(m0, m1)),
            reported("hamiltonian_drift", relative_drift(h0, h1)),
        ],
    ))
}

fn check_symbol(cfg: &RunConfig, dir: &Path) -> dispburgers::Result<ExperimentSummary> {
    let sym = cfg.symbol()?;
    let c = &cfg.checks.symbol;
    let rep = dispersion::check_hypothesis1(&sym, (c.xi_min, c.xi_max), c.beta_max)?;
    write_report(dir, &rep)?;
    println!("{}", serde_json::to_string_pretty(&rep)?);
    let mut csv = CsvWriter::create(dir.join("results.csv"), &["beta", "min", "max"])?;
    let mut props = Vec::new();
    for r in &rep.ratios {
        csv.row(&[r.beta as f64, r.min, r.max])?;
        let name = format!("hypothesis1_beta{}", r.beta);
        props.push(match r.pass {
            Some(p) => checked(name, r.max, p),
            None => reported(name, r.max),
        });
    }
    csv.flush()?;
    props.push(checked("hypothesis2", rep.hyp2.sup, rep.hyp2.pass));
    if sym.kind == SymbolKind::Ilw {
        let xi = 50.0;
        props.push(reported("ilw_high_frequency_ratio", sym.omega(xi).abs() / (xi * xi)));
    }
    Ok(summary(cfg, "check-symbol", props))
}

#[derive(Serialize)]
struct ResonanceOutput {
    res2: dispburgers::resonance::ResonanceReport,
    res3: Option<dispburgers::resonance::ResonanceReport>,
}

fn check_resonance(cfg: &RunConfig, dir: &Path) -> dispburgers::Result<ExperimentSummary> {
    let sym = cfg.symbol()?;
    let c = &cfg.checks.resonance;
    let mut sampling = ResonanceSampling::new(c.samples, c.lo, c.hi, c.seed);
    sampling.same_sign = c.same_sign;
    let res2 = verify_res2(&sym, &sampling)?;
    let mut props = vec![checked("res2_spread", res2.spread(), res2.spread() <= c.max_spread)];
    if c.same_sign && sym.kind == SymbolKind::PurePower && sym.alpha == 1.0 {
        let ok = res2.ratio_min >= 1.0 - 1e-12 && res2.ratio_max <= 2.0 + 1e-12;
        props.push(checked("res2_same_sign_bounds", res2.ratio_max, ok));
    }
    let res3 = if c.same_sign || c.hi < sampling.separation * c.lo {
        None
    } else {
        sampling.same_sign = false;
        Some(verify_res3(&sym, &sampling)?)
    };
    if let Some(r) = &res3 {
        props.push(checked("res3_spread", r.spread(), r.spread() <= RES3_MAX_SPREAD));
    }
    let mut csv = CsvWriter::create(dir.join("results.csv"), &["order", "ratio_min", "ratio_max", "rejected"])?;
    csv.row(&[2.0, res2.ratio_min, res2.ratio_max, res2.rejected as f64])?;
    if let Some(r) = &res3 {
        csv.row(&[3.0, r.ratio_min, r.ratio_max, r.rejected as f64])?;
    }
    csv.flush()?;
    write_report(dir, &ResonanceOutput { res2, res3 })?;
    Ok(summary(cfg, "check-resonance", props))
}

/// `φ_{N₁}(ξ₁)φ_{N₂}(ξ₂)`.
fn tensor_cutoff(n1: f64, n2: f64) -> MultiplierSymbol {
    MultiplierSymbol::bilinear(format!("phi_{n1} x phi_{n2}"), move |a, b| {
        (phi_n(n1, a) * phi_n(n2, b)).into()
    })
}

#[derive(Serialize)]
struct MultiplierOutput {
    commutator_residuals: Vec<f64>,
    tensor: MarcinkiewiczReport,
    chi1_over_omega2: MarcinkiewiczReport,
}

fn check_multiplier(cfg: &RunConfig, dir: &Path) -> dispburgers::Result<ExperimentSummary> {
    let sym = cfg.symbol()?;
    let c = &cfg.checks.multiplier;
    let grid = dispburgers::SpectralGrid::new(c.points, cfg.grid.length)?;
    let mut residuals = Vec::new();
    let mut csv = CsvWriter::create(dir.join("results.csv"), &["seed", "residual"])?;
    for seed in 0..c.seeds {
        let u = InitialData::random_hs(1.0, 0.0, c.kmax, seed).build(grid)?;
        let r = commutator_residual(&u, c.n)?;
        csv.row(&[seed as f64, r])?;
        residuals.push(r);
    }
    csv.flush()?;
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    let n = c.n;
    let n1 = n / 32.0;
    let tensor = check_marcinkiewicz(&tensor_cutoff(n1, n), &[FreqBox::dyadic(&[n1, n])], c.beta_max)?;
    let base = symbol_chi1_over_omega2(&sym, n, cfg.diagnostics.s);
    let scale = n1 * n.powf(sym.alpha);
    let normalized = MultiplierSymbol::bilinear(format!("N1 N^alpha {}", base.name()), move |a, b| {
        base.eval(&[a, b]) * scale
    });
    let chi = check_marcinkiewicz(&normalized, &[FreqBox::dyadic(&[n1, n])], c.beta_max)?;
    let xs1: Vec<f64> = (1..=16).map(|i| i as f64 * n1 / 8.0).collect();
    let xs2: Vec<f64> = (0..64).map(|i| n / 2.0 + i as f64 * 1.5 * n / 63.0).collect();
    let dump = BufWriter::new(File::create(dir.join("symbol.csv"))?);
    write_symbol_dump(dump, &symbol_chi1_over_omega2(&sym, n, cfg.diagnostics.s), &xs1, &xs2)?;
    let props = vec![
        checked("commutator_identity", worst, worst < c.tolerance),
        checked("marcinkiewicz_tensor", tensor.worst, tensor.pass),
        checked("marcinkiewicz_chi1_over_omega2", chi.worst, chi.pass),
    ];
    write_report(
        dir,
        &MultiplierOutput {
            commutator_residuals: residuals,
            tensor,
            chi1_over_omega2: chi,
        },
    )?;
    Ok(summary(cfg, "check-multiplier", props))
}

fn check_energy(cfg: &RunConfig, dir: &Path) -> dispburgers::Result<ExperimentSummary> {
    let sym = cfg.symbol()?;
    let grid = cfg.grid()?;
    let c = &cfg.checks.energy;
    let d = cfg.diagnostics;
    let mut csv = CsvWriter::create(dir.join("results.csv"), &["field", "n0_pass", "difference_n0_pass"])?;
    let (mut all, mut all_diff) = (true, true);
    let (mut worst, mut worst_diff) = (0.0f64, 0.0f64);
    let mut reports = Vec::new();
    for i in 0..c.fields {
        let seed = c.seed.wrapping_add(3 * i as u64);
        let u = InitialData::random_hs(1.0, d.s, c.kmax, seed).build(grid)?;
        let rep = coercivity_check(&u, &sym, d.s, d.n0)?;
        all &= rep.pass;
        let n0 = rep.n0_pass.unwrap_or(f64::NAN);
        worst = worst.max(n0);
        let mut diff_n0 = f64::NAN;
        let diff = if c.difference {
            let z = InitialData::random_hs(1.0, d.s, c.kmax, seed + 1).build(grid)?;
            let w = InitialData::random_hs(1.0, d.sigma, c.kmax, seed + 2).build(grid)?;
            let r = difference_coercivity_check(&z, &w, &sym, d.s, d.sigma, d.n0)?;
            all_diff &= r.pass;
            diff_n0 = r.n0_pass.unwrap_or(f64::NAN);
            worst_diff = worst_diff.max(diff_n0);
            Some(r)
        } else {
            None
        };
        csv.row(&[i as f64, n0, diff_n0])?;
        reports.push((rep, diff));
    }
    csv.flush()?;
    write_report(dir, &reports)?;
    let mut props = vec![checked("coercivity", worst, all)];
    if c.difference {
        props.push(checked("difference_coercivity", worst_diff, all_diff));
    }
    Ok(summary(cfg, "check-energy", props))
}

fn convergence(cfg: &RunConfig, dir: &Path) -> dispburgers::Result<ExperimentSummary> {
    let sym = cfg.symbol()?;
    let u0 = cfg.initial_field()?;
    let c = &cfg.convergence;
    let rep = solver::convergence_study(&u0, &sym, &cfg.time, &c.dts)?;
    let mut csv = CsvWriter::create(dir.join("results.csv"), &["dt", "error"])?;
    for (dt, e) in rep.dts.iter().zip(&rep.errors) {
        csv.row(&[*dt, *e])?;
    }
    csv.flush()?;
    write_report(dir, &rep)?;
    let ok = rep.slope >= c.min_slope && rep.slope <= c.max_slope;
    Ok(summary(cfg, "convergence", vec![checked("slope", rep.slope, ok)]))
}
