//! End-to-end acceptance checks. Each check prints one PASS/FAIL line.
//! With `ACCEPTANCE_STRICT=1` the process exits non-zero when any check
//! fails; otherwise the summary line is the verdict.

use std::time::Instant;

use qd_emission::dynamics::{propagate, tau_grid};
use qd_emission::oracles::{
    g1_coh_pd, g1_inc_pd, sideband_width_detuned, PolaronPropagator,
    PureDephasingRates,
};
use qd_emission::pipeline::{full_model, pure_dephasing_model, DetuningSpec, FullModel};
use qd_emission::spectrum::{extract_observables, fit_triplet, TripletObservables};
use qd_emission::{DensityMatrix, PhysicalParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fig1(omega: f64) -> PhysicalParams {
    PhysicalParams::preset("fig1", omega).unwrap()
}

fn fig2(omega: f64) -> PhysicalParams {
    PhysicalParams::preset("fig2", omega).unwrap()
}

fn triplet(model: &FullModel) -> Result<TripletObservables, String> {
    let spec = model.spectrum(None).map_err(|e| e.to_string())?;
    let fit = fit_triplet(&spec, None).map_err(|e| e.to_string())?;
    Ok(extract_observables(&fit))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let points = [
        (0.05, 4.0, 700.0),
        (0.1, 4.0, 700.0),
        (0.2, 4.0, 700.0),
        (0.4, 4.0, 700.0),
        (0.8, 4.0, 700.0),
        (1.6, 4.0, 700.0),
        (4.0, 4.0, 700.0),
        (0.1, 10.0, 400.0),
        (0.5, 2.0, 400.0),
        (0.03, 10.0, 1000.0),
    ];
    let mut worst = 0.0f64;
    for (omega, temp, t1) in points {
        let p = PhysicalParams::new(0.0, omega, 0.027, 2.2, temp, 1.0 / t1).unwrap();
        let m = pure_dephasing_model(&p, DetuningSpec::Resonant).map_err(|e| e.to_string())?;
        let (or, g1, gpd) = (m.solution.omega_r, p.gamma1, m.rates.gamma_pd);
        let taus = tau_grid(20.0 / g1, 2000);
        let series = m.correlation(Some(&taus)).map_err(|e| e.to_string())?;
        let coh = g1_coh_pd(or, g1, gpd);
        let g0 = series.g1[0].re;
        for (t, v) in taus.iter().zip(&series.g1) {
            let a = g1_inc_pd(*t, or, g1, gpd).map_err(|e| e.to_string())? + coh;
            worst = worst.max((v - a).norm() / g0);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < 1e-8 && secs < 10.0,
        format!("max |g1 - analytic| / g1(0) = {worst:.2e} over 10 points (< 1e-8), {secs:.1} s (< 10 s)"),
    )
}

fn thermalisation_identity() -> Outcome {
    let mut worst = 0.0f64;
    let mut undecayed = 0;
    for temp in [2.0, 4.0, 10.0] {
        let p = fig1(1.0).with_temperature(temp);
        let prop = PolaronPropagator::new(&p).map_err(|e| e.to_string())?;
        for or in [0.01, 0.1, 0.5, 1.0, 2.0, 4.0] {
            let r = PureDephasingRates::compute(&prop, or, p.gamma1).map_err(|e| e.to_string())?;
            let th = (0.5 * p.beta() * or).tanh();
            worst = worst.max((r.kappa / r.gamma_pd - th).abs());
            undecayed += usize::from(!r.decayed);
        }
    }
    check(
        worst < 1e-6,
        format!("max |kappa/gamma_PD - tanh(beta Omega_r/2)| = {worst:.2e} (< 1e-6), {undecayed} undecayed windows"),
    )
}

fn headline_coherence() -> Outcome {
    let m = full_model(&fig1(4.0), DetuningSpec::Resonant).map_err(|e| e.to_string())?;
    let c = m.g1_coh();
    check((0.20..=0.30).contains(&c), format!("g1_coh(Omega = 4) = {c:.4} (in [0.20, 0.30])"))
}

fn coherent_fractions() -> Outcome {
    let full = |p: PhysicalParams| full_model(&p, DetuningSpec::Resonant).map(|m| m.coherent_fraction());
    let pd = |p: PhysicalParams| pure_dephasing_model(&p, DetuningSpec::Resonant).map(|m| m.coherent_fraction());
    let f1 = full(fig1(0.157)).map_err(|e| e.to_string())?;
    let p1 = pd(fig1(0.157)).map_err(|e| e.to_string())?;
    let f2 = full(fig1(0.63)).map_err(|e| e.to_string())?;
    let p2 = pd(fig1(0.63)).map_err(|e| e.to_string())?;
    let f3 = full(fig1(0.63).with_temperature(2.0)).map_err(|e| e.to_string())?;
    let checks = [
        ("full(0.157)", f1, (0.005..=0.02).contains(&f1), "[0.5, 2]%"),
        ("pd(0.157)", p1, (3e-5..=3e-4).contains(&p1), "[0.003, 0.03]%"),
        ("full(0.63)", f2, (0.10..=0.20).contains(&f2), "[10, 20]%"),
        ("pd(0.63)", p2, p2 < 1e-5, "< 0.001%"),
        ("full(0.63, 2 K)", f3, (0.28..=0.42).contains(&f3), "[28, 42]%"),
    ];
    let detail = checks
        .iter()
        .map(|(n, v, ok, range)| format!("{n} = {:.4}% {range}{}", 100.0 * v, if *ok { "" } else { " MISS" }))
        .collect::<Vec<_>>()
        .join("; ");
    check(checks.iter().all(|c| c.2), detail)
}

fn monotonic_enhancement() -> Outcome {
    let n = 16;
    let omegas: Vec<f64> = (0..n)
        .map(|k| 0.3 * (4.0f64 / 0.3).powf(k as f64 / (n - 1) as f64))
        .collect();
    let rows: Vec<(f64, f64)> = omegas
        .par_iter()
        .map(|&om| {
            let full = full_model(&fig1(om), DetuningSpec::Resonant).unwrap().g1_coh();
            let pd = pure_dephasing_model(&fig1(om), DetuningSpec::Resonant).unwrap();
            let closed = g1_coh_pd(pd.solution.omega_r, pd.params.gamma1, pd.rates.gamma_pd);
            (full, closed)
        })
        .collect();
    let full_up = rows.windows(2).all(|w| w[1].0 > w[0].0);
    let pd_down = rows.windows(2).all(|w| w[1].1 < w[0].1);
    let peak = (0..n).max_by(|&a, &b| rows[a].0.total_cmp(&rows[b].0)).unwrap();
    check(
        full_up && pd_down,
        format!(
            "full g1_coh {:.5} -> {:.5} increasing: {full_up} (maximum {:.5} at Omega = {:.3}); pure-dephasing {:.2e} -> {:.2e} decreasing: {pd_down} ({n} points)",
            rows[0].0,
            rows[n - 1].0,
            rows[peak].0,
            omegas[peak],
            rows[0].1,
            rows[n - 1].1
        ),
    )
}

fn atomic_mollow() -> Outcome {
    let g1 = 1.0 / 700.0;
    let omega = 20.0 * g1;
    let p = fig1(omega).with_alpha(0.0);
    let m = full_model(&p, DetuningSpec::Resonant).map_err(|e| e.to_string())?;
    let spec = m.spectrum(None).map_err(|e| e.to_string())?;
    let fit = fit_triplet(&spec, None).map_err(|e| e.to_string())?;
    let red = fit.red().position / -omega - 1.0;
    let blue = fit.blue().position / omega - 1.0;
    let rw = fit.red().fwhm / (1.5 * g1) - 1.0;
    let bw = fit.blue().fwhm / (1.5 * g1) - 1.0;
    let cw = fit.central().fwhm / g1 - 1.0;
    check(
        red.abs() < 0.01 && blue.abs() < 0.01 && rw.abs() < 0.02 && bw.abs() < 0.02 && cw.abs() < 0.02,
        format!(
            "position errors {:.3}% / {:.3}% (< 1%), sideband FWHM errors {:.3}% / {:.3}%, central {:.3}% (< 2%)",
            100.0 * red,
            100.0 * blue,
            100.0 * rw,
            100.0 * bw,
            100.0 * cw
        ),
    )
}

struct DetuningRow {
    ratio: f64,
    obs: TripletObservables,
    law: f64,
    prediction: f64,
}

fn detuning_rows() -> Result<Vec<DetuningRow>, String> {
    let omega = 0.025;
    [0.0, 0.25, 0.5, 0.75, 1.0]
        .par_iter()
        .map(|&ratio| {
            let p = fig2(omega);
            let eps = ratio * omega;
            let m = full_model(&p, DetuningSpec::Renormalized(eps)).map_err(|e| e.to_string())?;
            let obs = triplet(&m)?;
            let law = 2.0 * m.solution.omega_r.hypot(eps);
            let pd = pure_dephasing_model(&p, DetuningSpec::Renormalized(eps)).map_err(|e| e.to_string())?;
            let prediction = sideband_width_detuned(p.gamma1, pd.rates.gamma_pd, eps, pd.solution.omega_r);
            Ok(DetuningRow {
                ratio,
                obs,
                law,
                prediction,
            })
        })
        .collect()
}

fn splitting_law(rows: &[DetuningRow]) -> Outcome {
    let errs: Vec<f64> = rows.iter().map(|r| r.obs.splitting / r.law - 1.0).collect();
    let detail = rows
        .iter()
        .zip(&errs)
        .map(|(r, e)| format!("eps/Omega={:.2}: {:+.3}%", r.ratio, 100.0 * e))
        .collect::<Vec<_>>()
        .join(", ");
    check(errs.iter().all(|e| e.abs() < 0.01), format!("splitting vs 2 sqrt(Omega_r^2 + eps^2) (< 1%): {detail}"))
}

fn narrowing(rows: &[DetuningRow]) -> Outcome {
    let red_down = rows.windows(2).all(|w| w[1].obs.red_width < w[0].obs.red_width);
    let blue_down = rows.windows(2).all(|w| w[1].obs.blue_width < w[0].obs.blue_width);
    let mut worst = 0.0f64;
    for r in rows.iter().filter(|r| r.ratio <= 0.5) {
        for w in [r.obs.red_width, r.obs.blue_width] {
            worst = worst.max((w / r.prediction - 1.0).abs());
        }
    }
    let n = 8;
    let sweep: Result<Vec<TripletObservables>, String> = (0..n)
        .into_par_iter()
        .map(|k| {
            let om = 0.025 + (0.094 - 0.025) * k as f64 / (n - 1) as f64;
            let m = full_model(&fig2(om), DetuningSpec::Resonant).map_err(|e| e.to_string())?;
            triplet(&m)
        })
        .collect();
    let sweep = sweep?;
    let up = sweep
        .windows(2)
        .all(|w| w[1].red_width > w[0].red_width && w[1].blue_width > w[0].blue_width);
    check(
        red_down && blue_down && worst < 0.05 && up,
        format!(
            "detuned widths decreasing: red {red_down}, blue {blue_down}; max deviation from expansion (eps <= Omega/2) {:.2}% (< 5%); resonant widths {:.5} -> {:.5} increasing: {up}",
            100.0 * worst,
            sweep[0].red_width,
            sweep[n - 1].red_width
        ),
    )
}

fn structural_invariants() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let points: Vec<(PhysicalParams, f64)> = (0..100)
        .map(|_| {
            let omega = 10f64.powf(rng.random_range(-2.0..0.6));
            let p = PhysicalParams::new(
                0.0,
                omega,
                rng.random_range(0.0..0.05),
                rng.random_range(1.0..3.0),
                rng.random_range(1.0..20.0),
                1.0 / rng.random_range(200.0..1000.0),
            )
            .unwrap();
            (p, rng.random_range(-1.0..1.0) * omega)
        })
        .collect();
    let results: Vec<Result<[f64; 5], String>> = points
        .par_iter()
        .map(|(p, eps)| {
            let m = full_model(p, DetuningSpec::Renormalized(*eps)).map_err(|e| e.to_string())?;
            let rho = m.steady_state;
            let evolved = propagate(&m.liouvillian, DensityMatrix::ground().matrix(), 10.0 / p.gamma1);
            let drift = (evolved.trace().re - 1.0).abs().max(evolved.trace().im.abs());
            let residual = (m.liouvillian.matrix * qd_emission::operators::vectorize(rho.matrix())).norm();
            let f_lo = m.solution.f_values.iter().copied().fold(f64::INFINITY, f64::min);
            let f_hi = m.solution.f_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let f_out = (-f_lo).max(f_hi - 1.0).max(0.0);
            Ok([drift, residual, -rho.eigenvalues()[0], m.solution.residual, f_out])
        })
        .collect();
    let mut worst = [0.0f64; 5];
    let mut failures = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => {
                for i in 0..5 {
                    worst[i] = worst[i].max(v[i]);
                }
            }
            Err(e) => failures.push(format!("point {k}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = failures.is_empty()
        && worst[0] < 1e-12
        && worst[1] < 1e-12
        && worst[2] <= 1e-10
        && worst[3] < 1e-10
        && worst[4] == 0.0
        && secs < 60.0;
    check(
        ok,
        format!(
            "trace drift {:.1e}, steady-state residual {:.1e}, min eigenvalue {:.1e}, self-consistency {:.1e}, F outside [0,1] by {:.1e}, {} failures, {secs:.1} s{}",
            worst[0],
            worst[1],
            -worst[2],
            worst[3],
            worst[4],
            failures.len(),
            failures.first().map(|f| format!(" ({f})")).unwrap_or_default()
        ),
    )
}

fn breakdown() -> Outcome {
    let weak_full = full_model(&fig1(0.05), DetuningSpec::Resonant).map_err(|e| e.to_string())?;
    let weak_pd = pure_dephasing_model(&fig1(0.05), DetuningSpec::Resonant).map_err(|e| e.to_string())?;
    let taus = tau_grid(20.0 / weak_full.params.gamma1, 2000);
    let a = weak_full.correlation(Some(&taus)).map_err(|e| e.to_string())?;
    let b = weak_pd.correlation(Some(&taus)).map_err(|e| e.to_string())?;
    let g0 = a.g1[0].re;
    let dev = a.g1.iter().zip(&b.g1).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / g0;

    let strong_full = full_model(&fig1(4.0), DetuningSpec::Resonant).map_err(|e| e.to_string())?;
    let strong_pd = pure_dephasing_model(&fig1(4.0), DetuningSpec::Resonant).map_err(|e| e.to_string())?;
    let gap = (strong_full.g1_coh() - strong_pd.g1_coh()).abs();
    check(
        dev < 0.02 && gap > 0.15,
        format!("Omega = 0.05: max |full - pd| / g1(0) = {:.3}% (< 2%); Omega = 4: asymptote gap {gap:.4} (> 0.15)", 100.0 * dev),
    )
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let rows = detuning_rows();
    let outcomes: Vec<(usize, &str, Outcome)> = vec![
        (1, "oracle equivalence", oracle_equivalence()),
        (2, "thermalisation identity", thermalisation_identity()),
        (3, "headline coherent fraction", headline_coherence()),
        (4, "coherent-fraction checkpoints", coherent_fractions()),
        (5, "monotonic enhancement", monotonic_enhancement()),
        (6, "atomic-limit Mollow", atomic_mollow()),
        (7, "splitting law", rows.as_ref().map_err(|e| e.clone()).and_then(|r| splitting_law(r))),
        (8, "off-resonant narrowing", rows.as_ref().map_err(|e| e.clone()).and_then(|r| narrowing(r))),
        (9, "structural invariants", structural_invariants()),
        (10, "breakdown reproduction", breakdown()),
    ];
    let mut failed = 0;
    for (n, name, o) in &outcomes {
        match o {
            Ok(d) => println!("criterion {n:>2} PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {d}");
            }
        }
    }
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && failed > 0 {
        std::process::exit(1);
    }
}
