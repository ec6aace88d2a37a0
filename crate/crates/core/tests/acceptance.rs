//! Exit criteria for the solver. Each test prints one PASS/FAIL line.
//!
//! Run with `cargo test -p msdiff --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

use msdiff::diagnostics::{convergence_study, total_moles, uphill_mask, StudyCase};
use msdiff::io::{read_snapshot_csv, write_snapshot_csv};
use msdiff::mixture::{FluxMatrix2, FluxSystem, NodeComposition};
use msdiff::scenarios::{scenario_catalog, Scenario, DUNCAN_TOOR_ASYMPTOTIC, UPHILL_SEMIDEGENERATE};
use msdiff::schemes::{
    compute_fluxes, run_simulation, step_global, step_richardson, DtPolicy, MixtureState,
    SchemeConfig, Simulation,
};
use msdiff::{l1_error, Grid1D, Snapshot, TimeSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

const J: usize = 140;

const INVERSE_IDENTITY_TOL: f64 = 1e-12;
const INVERSE_SAMPLES: usize = 1000;
const CONSERVATION_REL_TOL: f64 = 1e-12;
const EQUIVALENCE_TOL: f64 = 1e-15;
const EQUIVALENCE_STEPS: usize = 100;
const UPHILL_WINDOW: f64 = 0.3;
const UPHILL_DEPARTURE: f64 = 0.01;
const UPHILL_MIN_SAMPLES: usize = 10;
const FLATTENING_FRACTION: f64 = 0.25;
const MEAN_DRIFT_TOL: f64 = 2e-3;
const CONVERGENCE_RATIO: f64 = 1.5;
const BOUND_SLACK: f64 = 1e-6;
const LARGE_STEP_DT: f64 = 1.0 / 100.0;
const LARGE_STEP_K: usize = 800;
const LARGE_STEP_ERROR_FACTOR: f64 = 3.0;

fn verdict(n: u32, name: &str, pass: bool, detail: impl AsRef<str>) -> bool {
    println!(
        "criterion {n} [{}] {name}: {}",
        if pass { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    pass
}

fn grid() -> Grid1D {
    Grid1D::new(J).unwrap()
}

fn scenario(name: &str) -> Scenario {
    scenario_catalog(name).unwrap()
}

fn simplex_sample(rng: &mut ChaCha8Rng) -> NodeComposition {
    let (u, v): (f64, f64) = (rng.gen(), rng.gen());
    if u + v <= 1.0 {
        NodeComposition::new(u, v)
    } else {
        NodeComposition::new(1.0 - u, 1.0 - v)
    }
}

#[test]
fn criterion_1_inverse_identity() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for name in [UPHILL_SEMIDEGENERATE, DUNCAN_TOOR_ASYMPTOTIC] {
        let sys = FluxSystem::new(scenario(name).spec);
        for _ in 0..INVERSE_SAMPLES {
            let node = simplex_sample(&mut rng);
            let prod = sys.matrix(node).mul(&sys.inverse(node).unwrap());
            worst = worst.max(prod.max_abs_diff(&FluxMatrix2::IDENTITY));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let pass = worst < INVERSE_IDENTITY_TOL && secs < 1.0;
    assert!(verdict(
        1,
        "inverse identity",
        pass,
        format!("max |M M^-1 - I| = {worst:.3e} over 2x{INVERSE_SAMPLES} samples in {secs:.3}s")
    ));
}

#[test]
fn criterion_2_conservation() {
    let g = grid();
    let mut details = Vec::new();
    let mut pass = true;
    for name in [UPHILL_SEMIDEGENERATE, DUNCAN_TOOR_ASYMPTOTIC] {
        let sc = scenario(name);
        let dt = DtPolicy::CFL.resolve(&g, &sc.spec, sc.t_end).unwrap();
        // K = 1 is the only sweep count that is stable at the full explicit bound.
        for cfg in [
            SchemeConfig::global(dt, sc.t_end),
            SchemeConfig::richardson(dt, 1, sc.t_end),
        ] {
            let mut sim = Simulation::new(sc.initial_state(&g), cfg, sc.spec, g).unwrap();
            let m0 = total_moles(sim.state(), &g);
            let mut drift: f64 = 0.0;
            while sim.advance().unwrap() {
                let m = total_moles(sim.state(), &g);
                for i in 0..3 {
                    drift = drift.max(((m[i] - m0[i]) / m0[i]).abs());
                }
            }
            pass &= drift < CONSERVATION_REL_TOL;
            details.push(format!("{name}/{}: {drift:.2e} over {} steps", cfg.kind, sim.n_steps()));
        }
    }
    assert!(verdict(2, "conservation", pass, details.join("; ")));
}

#[test]
fn criterion_3_scheme_equivalence() {
    let g = grid();
    let sc = scenario(UPHILL_SEMIDEGENERATE);
    let sys = FluxSystem::new(sc.spec);
    let dt = DtPolicy::CFL.resolve(&g, &sc.spec, sc.t_end).unwrap();
    let mut global = sc.initial_state(&g);
    let mut flux = compute_fluxes(&global, &sys, &g).unwrap();
    let mut rich = global.clone();
    for _ in 0..EQUIVALENCE_STEPS {
        (global, flux) = step_global(&global, &flux, dt, &sys, &g).unwrap();
        (rich, _) = step_richardson(&rich, dt, 1, &sys, &g).unwrap();
    }
    let diff = global.xi1.max_abs_diff(&rich.xi1).max(global.xi2.max_abs_diff(&rich.xi2));
    assert!(verdict(
        3,
        "Richardson K=1 equals global",
        diff <= EQUIVALENCE_TOL,
        format!("max difference after {EQUIVALENCE_STEPS} steps = {diff:e}")
    ));
}

#[test]
fn criterion_4_uphill_diffusion() {
    let g = grid();
    let sc = scenario(UPHILL_SEMIDEGENERATE);
    let dt = DtPolicy::CFL.resolve(&g, &sc.spec, UPHILL_WINDOW).unwrap();
    let cfg = SchemeConfig::global(dt, UPHILL_WINDOW).with_stride(20);
    let mut sim = Simulation::new(sc.initial_state(&g), cfg, sc.spec, g).unwrap();
    let mut departure: f64 = 0.0;
    let mut snaps = vec![sim.snapshot()];
    while sim.advance().unwrap() {
        departure = sim.state().xi2.iter().map(|v| (v - 0.2).abs()).fold(departure, f64::max);
        if sim.step_index().is_multiple_of(cfg.snapshot_stride) || sim.is_finished() {
            snaps.push(sim.snapshot());
        }
    }
    let series = TimeSeries::new(g, snaps, None);
    let mask = uphill_mask(&series).unwrap();
    let marked = mask.count_until(UPHILL_WINDOW);
    let pass = departure > UPHILL_DEPARTURE && marked > UPHILL_MIN_SAMPLES;
    assert!(verdict(
        4,
        "uphill diffusion",
        pass,
        format!(
            "max |xi2 - 0.2| for t <= {UPHILL_WINDOW} = {departure:.4}; uphill samples = {marked} of {}",
            mask.times.len() * g.node_count()
        )
    ));
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(", ")
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn criterion_5_asymptotic_behaviour() {
    let g = grid();
    let sc = scenario(DUNCAN_TOOR_ASYMPTOTIC);
    let dt = DtPolicy::CFL.resolve(&g, &sc.spec, sc.t_end).unwrap();
    let init = sc.initial_state(&g);
    let series = run_simulation(init.clone(), SchemeConfig::global(dt, sc.t_end).with_stride(usize::MAX), sc.spec, g)
        .unwrap();
    let last = &series.last().unwrap().state;
    let spread = |s: &MixtureState| {
        let max = s.xi1.iter().cloned().fold(f64::MIN, f64::max);
        let min = s.xi1.iter().cloned().fold(f64::MAX, f64::min);
        max - min
    };
    let (s0, s1) = (spread(&init), spread(last));
    let drift = (mean(&last.xi1) - mean(&init.xi1)).abs();
    let pass = s1 < FLATTENING_FRACTION * s0 && drift < MEAN_DRIFT_TOL;
    assert!(verdict(
        5,
        "asymptotic flattening",
        pass,
        format!(
            "max-min xi1 {s0:.3} -> {s1:.4} (limit {:.3}); mean {:.6} -> {:.6}",
            FLATTENING_FRACTION * s0,
            mean(&init.xi1),
            mean(&last.xi1)
        )
    ));
}

#[test]
fn criterion_6_temporal_self_convergence() {
    let started = Instant::now();
    let g = grid();
    let cases = [1, 2, 4].map(|d| StudyCase::global(DtPolicy::Cfl { divisor: d }));
    let mut pass = true;
    let mut details = Vec::new();
    for name in [UPHILL_SEMIDEGENERATE, DUNCAN_TOOR_ASYMPTOTIC] {
        let report =
            convergence_study(&scenario(name), &g, &cases, DtPolicy::Cfl { divisor: 8 }).unwrap();
        let errs: Vec<f64> = report.rows.iter().map(|r| r.l1_error).collect();
        let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
        let ok = errs.iter().all(|e| e.is_finite())
            && errs.windows(2).all(|w| w[0] > w[1])
            && ratios.iter().all(|&r| r >= CONVERGENCE_RATIO);
        pass &= ok;
        details.push(format!("{name}: errors {}, ratios {ratios:.2?}", fmt_list(&errs)));
    }
    let secs = started.elapsed().as_secs_f64();
    pass &= secs < 60.0;
    details.push(format!("{secs:.1}s"));
    assert!(verdict(6, "temporal self-convergence", pass, details.join("; ")));
}

#[test]
fn criterion_7_large_step_richardson() {
    let started = Instant::now();
    let g = grid();
    let sc = scenario(UPHILL_SEMIDEGENERATE);
    let report = convergence_study(
        &sc,
        &g,
        &[StudyCase::global(DtPolicy::CFL)],
        DtPolicy::Cfl { divisor: 8 },
    )
    .unwrap();
    let explicit_err = report.rows[0].l1_error;
    let threshold = LARGE_STEP_ERROR_FACTOR * explicit_err;

    // Drive the large-step run by hand so every step's bounds are checked.
    let cfg = SchemeConfig::richardson(LARGE_STEP_DT, LARGE_STEP_K, sc.t_end);
    let mut sim = Simulation::new(sc.initial_state(&g), cfg, sc.spec, g).unwrap();
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    let outcome = loop {
        match sim.advance() {
            Ok(true) => {
                let s = sim.state();
                for j in 0..g.node_count() {
                    let x3 = 1.0 - s.xi1[j] - s.xi2[j];
                    for v in [s.xi1[j], s.xi2[j], x3] {
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
            }
            Ok(false) => break Ok(()),
            Err(e) => break Err(e),
        }
    };
    let secs = started.elapsed().as_secs_f64();
    let detail;
    let pass = match outcome {
        Ok(()) => {
            let reference = {
                let dt = DtPolicy::Cfl { divisor: 8 }.resolve(&g, &sc.spec, sc.t_end).unwrap();
                let n = msdiff::schemes::step_count(sc.t_end, dt).unwrap();
                run_simulation(
                    sc.initial_state(&g),
                    SchemeConfig::global(dt, sc.t_end).with_stride(n),
                    sc.spec,
                    g,
                )
                .unwrap()
            };
            let candidate = TimeSeries::new(g, vec![sim.snapshot()], None);
            let err = l1_error(&candidate, &reference, sc.t_end).unwrap();
            let bounded = lo >= -BOUND_SLACK && hi <= 1.0 + BOUND_SLACK;
            detail = format!(
                "range [{lo:.3e}, {hi:.6}]; L1 error {err:.3e} vs limit {threshold:.3e} \
                 (3x explicit at dt_CFL); {secs:.1}s"
            );
            bounded && err <= threshold && secs < 60.0
        }
        Err(e) => {
            detail = format!(
                "run aborted after {} of 100 steps: {e}; plain fixed-point sweeps diverge for \
                 dt above dt_CFL/2 (explicit error to beat: {threshold:.3e})",
                sim.step_index()
            );
            false
        }
    };
    assert!(verdict(7, "large-step Richardson (N=100, K=800)", pass, detail));
}

#[test]
fn criterion_8_metric_and_round_trip() {
    let started = Instant::now();
    let g = Grid1D::new(24).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let random_series = |rng: &mut ChaCha8Rng| {
        let (a, b): (Vec<f64>, Vec<f64>) = (0..g.node_count())
            .map(|_| {
                let n = simplex_sample(rng);
                (n.xi1, n.xi2)
            })
            .unzip();
        let state = MixtureState::new(a.into(), b.into(), 0.0);
        TimeSeries::new(g, vec![Snapshot::new(state, msdiff::FluxField::zeros(&g))], None)
    };
    let mut metric_ok = true;
    for _ in 0..200 {
        let (a, b, c) = (random_series(&mut rng), random_series(&mut rng), random_series(&mut rng));
        let d = |x: &TimeSeries, y: &TimeSeries| l1_error(x, y, 0.0).unwrap();
        metric_ok &= d(&a, &a) == 0.0
            && d(&a, &b) > 0.0
            && d(&a, &b) == d(&b, &a)
            && d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-15;
    }

    let sc = scenario(UPHILL_SEMIDEGENERATE);
    let dt = DtPolicy::CFL.resolve(&g, &sc.spec, 0.05).unwrap();
    let series = run_simulation(
        sc.initial_state(&g),
        SchemeConfig::global(dt, 0.05).with_stride(7),
        sc.spec,
        g,
    )
    .unwrap();
    let mut buf = Vec::new();
    write_snapshot_csv(&series, &mut buf).unwrap();
    let back = read_snapshot_csv(&buf[..]).unwrap();
    let round_trip_ok = back.grid == series.grid
        && back.snapshots.len() == series.snapshots.len()
        && back.snapshots.iter().zip(&series.snapshots).all(|(a, b)| {
            a.t().to_bits() == b.t().to_bits()
                && [
                    (&a.state.xi1, &b.state.xi1),
                    (&a.state.xi2, &b.state.xi2),
                    (&a.flux.n1, &b.flux.n1),
                    (&a.flux.n2, &b.flux.n2),
                ]
                .iter()
                .all(|(x, y)| x.iter().zip(y.iter()).all(|(p, q)| p.to_bits() == q.to_bits()))
        });
    let secs = started.elapsed().as_secs_f64();
    let pass = metric_ok && round_trip_ok && secs < 1.0;
    assert!(verdict(
        8,
        "metric axioms and CSV round trip",
        pass,
        format!(
            "metric on 200 triples: {metric_ok}; {} snapshots round-trip bit-exact: {round_trip_ok}; {secs:.3}s",
            series.snapshots.len()
        )
    ));
}
