//! Acceptance suite. Runs without the libtest harness so each criterion
//! prints exactly one PASS or FAIL line; the process exits non-zero if any
//! criterion fails.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use common::{analyze, clicks_audio, expected_off_fraction, grid_search, oracle, pose_error, reachable_target, tempos};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tambor::actuators::{LogLine, SnippetLibrary};
use tambor::analysis::AnalysisConfig;
use tambor::pipeline::{poisson_stop_times, run, run_soak, InputSource, Mode, RunConfig, SoakConfig};
use tambor::rhythmgen::{filled_slot_count, generate_pattern, GenParams};
use tambor::synth::{ClickSpec, PoissonSpec};
use tambor::trajectory::{
    fit_gp, gp_predict, retarget, select_solution, solve_ik, ArmModel, GpParams, RetargetOptions,
};
use tambor::SimTime;

type Verdict = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn micros(s: f64) -> i64 {
    SimTime::from_secs(s).micros()
}

fn click_run(bpm: f64, duration: f64, seed: u64) -> RunConfig {
    RunConfig {
        input: Some(InputSource::Click(ClickSpec::new(bpm, duration))),
        seed: Some(seed),
        ..RunConfig::default()
    }
}

fn strikes(lines: &[LogLine]) -> impl Iterator<Item = &LogLine> {
    lines.iter().filter(|l| l.is_strike())
}

/// 1. Every ok strike sounds exactly 120 ms after its dispatch.
fn latency_constant() -> Verdict {
    let mut stopped = click_run(120.0, 60.0, 1);
    stopped.safety_stops_s = vec![20.0, 40.0];
    let inputs = [
        click_run(120.0, 60.0, 42),
        click_run(97.0, 60.0, 7),
        stopped,
        RunConfig {
            input: Some(InputSource::Poisson(PoissonSpec {
                rate: 3.0,
                duration_s: 60.0,
                seed: 5,
            })),
            ..RunConfig::default()
        },
    ];
    let mut n = 0;
    for cfg in &inputs {
        let out = run(cfg).map_err(|e| e.to_string())?;
        for l in strikes(&out.events).filter(|l| l.is_ok()) {
            let sounded = l.t_strike_actual.ok_or("ok strike without a sound time")?;
            check(
                micros(sounded) - micros(l.t_dispatch) == 120_000,
                format!("strike at {sounded} dispatched at {}", l.t_dispatch),
            )?;
            n += 1;
        }
    }
    check(n > 100, format!("only {n} strikes"))?;
    Ok(format!("{n} ok strikes, all exactly 120.000 ms"))
}

/// 2. Patterns change every 32 bars on a constant-density input.
fn regeneration_cadence() -> Verdict {
    let bpm = 120.0;
    let out = run(&click_run(bpm, 600.0, 11)).map_err(|e| e.to_string())?;
    let mut starts: BTreeMap<u64, (f64, Vec<u32>)> = BTreeMap::new();
    for l in out.events.iter().filter(|l| l.pattern_id.is_some() && !l.is_strike()) {
        let e = starts.entry(l.pattern_id.unwrap()).or_insert((l.t_strike, Vec::new()));
        e.1.push(l.bar_index.unwrap());
    }
    check(starts.len() >= 5, format!("only {} patterns", starts.len()))?;
    let bar = 4.0 * 60.0 / bpm;
    let complete: Vec<_> = starts.values().collect();
    let expected_bars: Vec<u32> = (0..32).step_by(2).collect();
    for (i, w) in complete.windows(2).enumerate() {
        check(w[0].1 == expected_bars, format!("pattern {i} cycles start at bars {:?}", w[0].1))?;
        let bars = (w[1].0 - w[0].0) / bar;
        check((bars - 32.0).abs() < 0.01, format!("pattern {i} lasted {bars:.3} bars"))?;
    }
    Ok(format!("{} pattern changes, each after 32 bars", complete.len() - 1))
}

fn settled_tempo(bpm: f64, cfg: AnalysisConfig) -> Result<(f64, f64), String> {
    let spec = ClickSpec::new(bpm, 30.0);
    let est = tempos(&analyze(clicks_audio(&spec.times(), 30.0), cfg));
    let late: Vec<f64> = est.iter().filter(|e| e.time >= 10.0).map(|e| e.bpm).collect();
    if late.is_empty() {
        return Err(format!("{bpm} BPM: no estimate after 10 s"));
    }
    let lo = late.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = late.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// 3. Click tracks read within 2 BPM after 10 s; double time folds.
fn tempo_accuracy() -> Verdict {
    let default = AnalysisConfig::default();
    let wide = AnalysisConfig {
        bpm_min: 50.0,
        ..AnalysisConfig::default()
    };
    let mut notes = Vec::new();
    for (bpm, expect, cfg, label) in [
        (60.0, 60.0, &wide, "60 in [50,180]"),
        (90.0, 90.0, &default, "90"),
        (120.0, 120.0, &default, "120"),
        (180.0, 180.0, &default, "180"),
        (240.0, 120.0, &default, "240 folds"),
        (60.0, 120.0, &default, "60 folds in [70,180]"),
    ] {
        let (lo, hi) = settled_tempo(bpm, cfg.clone())?;
        check(
            (lo - expect).abs() <= 2.0 && (hi - expect).abs() <= 2.0,
            format!("{label}: estimates span {lo:.2}..{hi:.2}, want {expect} +/- 2"),
        )?;
        notes.push(format!("{label} -> {lo:.1}..{hi:.1}"));
    }
    Ok(notes.join(", "))
}

/// 4. Unsteady and silent inputs never reach the drums.
fn gating() -> Verdict {
    let mut total = 0;
    for seed in 0..5 {
        let cfg = RunConfig {
            input: Some(InputSource::Click(ClickSpec::new(120.0, 60.0).with_jitter(25.0, seed))),
            ..RunConfig::default()
        };
        let out = run(&cfg).map_err(|e| e.to_string())?;
        let n = strikes(&out.events).count();
        check(n == 0, format!("jitter seed {seed}: {n} strike lines"))?;
        total += out.events.len();
    }
    let silent = run(&RunConfig {
        input: Some(InputSource::Silence { duration_s: 60.0 }),
        ..RunConfig::default()
    })
    .map_err(|e| e.to_string())?;
    let n = strikes(&silent.events).count();
    check(n == 0, format!("silence: {n} strike lines"))?;
    Ok(format!("25% jitter x5 and silence: 0 strikes ({} log lines total)", total + silent.events.len()))
}

/// 5. Filled-slot law and the syncopation shift.
fn rhythm_statistics() -> Verdict {
    let mut worst: f64 = 0.0;
    for d in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let want = (4.0f64 + 24.0 * d).round() as usize;
        let mut off = [0.0; 2];
        for (k, s) in [0.0, 1.0].into_iter().enumerate() {
            for seed in 0..1000 {
                let p = generate_pattern(&GenParams::new(d, s, seed));
                check(p.filled_count() == want, format!("d={d} seed {seed}: {} filled", p.filled_count()))?;
                off[k] += p.off_beat_fraction() / 1000.0;
            }
            let n = filled_slot_count(d);
            let expect = expected_off_fraction(n, s);
            worst = worst.max((off[k] - expect).abs());
            check(
                (off[k] - expect).abs() <= 0.03,
                format!("d={d} s={s}: off-beat share {:.4} vs {expect:.4}", off[k]),
            )?;
        }
        if d > 0.0 && d < 1.0 {
            check(off[1] > off[0], format!("d={d}: syncopation did not raise the off-beat share"))?;
        }
    }
    let per_draw = |s: f64| {
        let w = 1.0 + 3.0 * s;
        24.0 * w / (8.0 + 24.0 * w)
    };
    let m: Vec<f64> = [0.0, 1.0]
        .iter()
        .map(|&s| (0..1000).map(|seed| generate_pattern(&GenParams::new(0.5, s, seed)).off_beat_fraction()).sum::<f64>() / 1000.0)
        .collect();
    for (k, s) in [0.0, 1.0].into_iter().enumerate() {
        check(
            (m[k] - per_draw(s)).abs() <= 0.03,
            format!("d=0.5 s={s}: {:.4} vs per-draw weight {:.4}", m[k], per_draw(s)),
        )?;
    }
    Ok(format!("counts exact; worst off-beat deviation {worst:.4}; d=0.5 shares {:.3} -> {:.3}", m[0], m[1]))
}

/// 6. GP posterior against a dense solve.
fn gp_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = rng.random_range(2..=50);
        let mut times: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
        times.sort_by(f64::total_cmp);
        times.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let ys: Vec<f64> = times.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let l = rng.random_range(0.05..0.6);
        let noise = rng.random_range(1e-3..1e-1);
        let model = fit_gp(&times, &[ys.clone()], GpParams::new(l, noise)).map_err(|e| e.to_string())?;
        let q: Vec<f64> = (0..10).map(|_| rng.random_range(-0.5..3.5)).collect();
        let p = gp_predict(&model, &q);
        for (i, &t) in q.iter().enumerate() {
            let (m, v) = oracle(&times, &ys, l, noise, t);
            let err = (p.mean[0][i] - m).abs().max((p.variance[i] - v).abs());
            worst = worst.max(err);
            check(err < 1e-9, format!("case {case}: error {err:e}"))?;
        }
    }
    let times: Vec<f64> = (0..30).map(|i| i as f64 / 29.0).collect();
    let ys: Vec<f64> = times.iter().map(|t| (5.0 * t).sin()).collect();
    let model = fit_gp(&times, &[ys.clone()], GpParams::new(0.1, 1e-12)).map_err(|e| e.to_string())?;
    let interp = model.predict_mean(&times)[0]
        .iter()
        .zip(&ys)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check(interp < 1e-6, format!("noiseless interpolation error {interp:e}"))?;
    Ok(format!("oracle error <= {worst:.1e}, interpolation error {interp:.1e}"))
}

/// 7. IK round trip, branch argmin, and grid search.
fn ik_correctness() -> Verdict {
    let arm = ArmModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut matched = 0;
    for _ in 0..1000 {
        let (_, t) = reachable_target(&arm, &mut rng);
        let sols = solve_ik(&arm, &t);
        check(!sols.is_empty(), "reachable target without a solution")?;
        for q in &sols {
            worst = worst.max(pose_error(&arm, q, &t));
        }
        let reference: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        let dist = |q: &Vec<f64>| q.iter().zip(&reference).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let best = sols.iter().min_by(|a, b| dist(a).total_cmp(&dist(b))).unwrap();
        if &select_solution(&sols, &reference, &arm.selection_weights).map_err(|e| e.to_string())? == best {
            matched += 1;
        }
    }
    check(worst < 1e-9, format!("FK round-trip error {worst:e}"))?;
    check(matched == 1000, format!("branch selection matched {matched}/1000"))?;
    for _ in 0..10 {
        let (_, t) = reachable_target(&arm, &mut rng);
        let analytic = solve_ik(&arm, &t)
            .iter()
            .map(|q| pose_error(&arm, q, &t))
            .fold(f64::INFINITY, f64::min);
        let (grid, _) = grid_search(&arm, &t);
        check(analytic <= grid + 1e-12, format!("grid search beat IK: {grid:e} < {analytic:e}"))?;
    }
    Ok(format!("round trip <= {worst:.1e}, argmin 1000/1000, grid search found nothing better"))
}

/// 8. Bundled snippets retarget cleanly at the default length-scale only.
fn retargeting_validity() -> Verdict {
    let arm = ArmModel::default();
    let demos = SnippetLibrary::bundled_demos().map_err(|e| e.to_string())?;
    let mut counts = Vec::new();
    for (i, demo) in demos.iter().enumerate() {
        let clean = retarget(demo, &arm, &RetargetOptions::default(), &arm.rest_config).map_err(|e| e.to_string())?;
        check(
            clean.report.is_clean(),
            format!("snippet {}: {} violations at default", i + 1, clean.report.violation_count()),
        )?;
        let rough =
            retarget(demo, &arm, &RetargetOptions::with_length_scale(0.001), &arm.rest_config).map_err(|e| e.to_string())?;
        check(!rough.report.is_clean(), format!("snippet {}: clean at 0.001 s", i + 1))?;
        counts.push(rough.report.violation_count());
    }
    Ok(format!("0 violations at 0.05 s; {counts:?} at 0.001 s"))
}

/// 9. Three weeks with three arm stops, and a Poisson-stop variant.
fn reliability_soak() -> Verdict {
    let weeks3 = 21.0 * 24.0 * 3600.0;
    let seed = 2019;
    let base = run_soak(&SoakConfig::new(weeks3, seed), |_| {}).map_err(|e| e.to_string())?;

    let mut cfg = SoakConfig::new(weeks3, seed);
    cfg.safety_stops_s = vec![3.2 * 86_400.0, 9.7 * 86_400.0, 16.1 * 86_400.0];
    let cycle = 8.0 * 60.0 / cfg.bpm;
    let stops = cfg.safety_stops_s.clone();
    let mut gap_near_stop: f64 = 0.0;
    let mut last_strike: Option<f64> = None;
    let faulted = run_soak(&cfg, |l| {
        if l.is_strike() && l.is_ok() {
            let t = l.t_strike_actual.unwrap();
            if let Some(prev) = last_strike {
                if stops.iter().any(|&s| prev <= s + 10.0 && t >= s - 10.0) {
                    gap_near_stop = gap_near_stop.max(t - prev);
                }
            }
            last_strike = Some(t);
        }
    })
    .map_err(|e| e.to_string())?;

    check(faulted.safety_stops == 3, format!("{} stops logged", faulted.safety_stops))?;
    check(faulted.watchdog_resets == 3, format!("{} watchdog resets", faulted.watchdog_resets))?;
    for (s, r) in &faulted.recoveries {
        check((r - s - 5.0).abs() < 1e-6, format!("stop at {s} recovered at {r}"))?;
    }
    check(faulted.drum_digest == base.drum_digest, "drum stream differs from the stop-free run")?;
    check(faulted.drum_ok == base.drum_ok && faulted.drum_dropped == 0, "drum strikes lost")?;
    check(gap_near_stop <= cycle, format!("drum gap {gap_near_stop:.3} s around a stop"))?;
    check(faulted.commands_dispatched == faulted.command_lines, "commands without log lines")?;

    let mut poisson = SoakConfig::new(weeks3, seed);
    poisson.safety_stops_s = poisson_stop_times(3.0, weeks3, 77);
    let p = run_soak(&poisson, |_| {}).map_err(|e| e.to_string())?;
    // A stop that lands while the arm is already down starts no new outage.
    let mut up_at = f64::NEG_INFINITY;
    let mut outages = 0;
    for &s in &poisson.safety_stops_s {
        if s >= up_at && s + 5.0 <= weeks3 {
            outages += 1;
            up_at = s + 5.0;
        }
    }
    check(p.safety_stops as usize == poisson.safety_stops_s.len(), "Poisson stops went unlogged")?;
    check(
        p.watchdog_resets == outages && p.recoveries.len() as u64 == outages,
        format!("{} resets for {outages} outages", p.watchdog_resets),
    )?;
    for (s, r) in &p.recoveries {
        check((r - s - 5.0).abs() < 1e-6, format!("Poisson stop at {s} recovered at {r}"))?;
    }
    check(p.arm_uptime > 0.99, format!("arm uptime {:.4}", p.arm_uptime))?;
    check(p.drum_digest == base.drum_digest, "Poisson stops changed the drum stream")?;

    Ok(format!(
        "{} ok strikes over 21 days; 3 stops recovered at +5 s; drum stream identical to the fault-free run; \
         worst gap near a stop {gap_near_stop:.3} s (cycle {cycle:.1} s); Poisson variant {} stops in {outages} outages, uptime {:.4}",
        faulted.drum_ok, p.safety_stops, p.arm_uptime
    ))
}

/// 10. Same input and seed, same bytes, offline and live.
fn determinism() -> Verdict {
    let offline = click_run(120.0, 60.0, 42);
    let a = run(&offline).map_err(|e| e.to_string())?.event_log_text();
    let b = run(&offline).map_err(|e| e.to_string())?.event_log_text();
    check(a == b, "offline runs differ")?;
    check(a.lines().count() > 50, "offline log is nearly empty")?;
    let live = RunConfig {
        mode: Mode::Live,
        live_speed: 20.0,
        ..offline
    };
    let c = run(&live).map_err(|e| e.to_string())?.event_log_text();
    let d = run(&live).map_err(|e| e.to_string())?.event_log_text();
    check(c == d, "live runs differ")?;
    check(a == c, "live log differs from offline")?;
    Ok(format!("{} lines, identical across 2 offline and 2 live runs", a.lines().count()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("latency constant", latency_constant),
        ("regeneration cadence", regeneration_cadence),
        ("tempo accuracy", tempo_accuracy),
        ("gating", gating),
        ("rhythm statistics", rhythm_statistics),
        ("GP oracle equivalence", gp_oracle),
        ("IK correctness", ik_correctness),
        ("retargeting validity", retargeting_validity),
        ("reliability soak", reliability_soak),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let verdict = f();
        let secs = started.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
