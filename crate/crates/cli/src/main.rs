use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use qd_emission_cli::check::{report, run_checks};
use qd_emission_cli::config::RawConfig;
use qd_emission_cli::{resolve, run_experiment};

/// Emission of a driven quantum dot with phonons: single points and sweeps.
#[derive(Debug, Parser)]
#[command(name = "simulate", version)]
struct Args {
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset parameter set (fig1, fig2).
    #[arg(long)]
    preset: Option<String>,
    /// g1 | coherent_sweep | spectrum | detuning_sweep | resonant_sweep | oracle_compare
    #[arg(long)]
    mode: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Run the invariant checks on the configured point instead of the mode.
    #[arg(long)]
    check: bool,
    /// Rabi frequency Ω (ps⁻¹).
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Bare laser detuning ν (ps⁻¹).
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,
    /// Coupling strength α (ps²).
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Phonon cutoff ω_c (ps⁻¹).
    #[arg(long, allow_negative_numbers = true)]
    omega_c: Option<f64>,
    /// Temperature (K).
    #[arg(long, allow_negative_numbers = true)]
    temperature: Option<f64>,
    /// Radiative lifetime T₁ (ps).
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
}

impl Args {
    fn raw(&self) -> anyhow::Result<RawConfig> {
        let mut raw = match &self.config {
            Some(p) => RawConfig::from_file(p)?,
            None => RawConfig::default(),
        };
        if self.preset.is_some() {
            raw.preset = self.preset.clone();
        }
        if self.mode.is_some() {
            raw.mode = self.mode.clone();
        }
        if self.check && raw.mode.is_none() {
            raw.mode = Some("spectrum".into());
        }
        if self.out.is_some() {
            raw.output = self.out.clone();
        }
        if self.threads.is_some() {
            raw.threads = self.threads;
        }
        let p = &mut raw.params;
        for (slot, v) in [
            (&mut p.omega, self.omega),
            (&mut p.nu, self.nu),
            (&mut p.alpha, self.alpha),
            (&mut p.omega_c, self.omega_c),
            (&mut p.temperature, self.temperature),
        ] {
            if v.is_some() {
                *slot = v;
            }
        }
        if self.t1.is_some() {
            p.t1 = self.t1;
            p.gamma1 = None;
        }
        Ok(raw)
    }
}

fn run(args: &Args) -> anyhow::Result<bool> {
    let raw = args.raw()?;
    let config = resolve(raw).context("invalid configuration")?;
    if args.check {
        let checks = run_checks(&config)?;
        print!("{}", report(&checks));
        return Ok(checks.iter().all(|c| c.passed));
    }
    let s = run_experiment(&config)?;
    println!(
        "{}: {} rows ({} ok, {} warned, {} failed) -> {}",
        config.mode.name(),
        s.rows,
        s.ok,
        s.warned,
        s.failed,
        s.csv.display()
    );
    Ok(true)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
