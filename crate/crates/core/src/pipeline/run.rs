use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{mpsc, Arc};
use std::time::{Duration, Instant};

use crossbeam_queue::ArrayQueue;
use serde::Serialize;

use super::config::{InputSource, Mode, RunConfig};
use crate::actuators::{render_strikes, ActuatorHost, LogKind, LogLine, SnippetLibrary, VirtualArm, VirtualDrumBank,
    RENDER_SAMPLE_RATE};
use crate::analysis::{Analyzer, AudioFrame, Feature, ANALYSIS_SAMPLE_RATE};
use crate::conductor::{Conductor, ScheduledEvent};
use crate::io::{read_wav, write_wav};
use crate::synth::render_clicks;
use crate::{Error, Result, SimDuration, SimTime};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub mode: String,
    pub duration_s: f64,
    pub features: usize,
    pub strikes_ok: usize,
    pub strikes_dropped: usize,
    pub arm_ok: usize,
    pub arm_dropped: usize,
    pub safety_stops: usize,
    pub watchdog_resets: usize,
    pub patterns: u64,
    pub cycles_skipped: u64,
    pub events_cancelled: u64,
    pub bus_dropped: u64,
    pub wall_time_s: f64,
}

pub struct RunOutput {
    pub events: Vec<LogLine>,
    pub features: Vec<Feature>,
    pub summary: RunSummary,
}

impl RunOutput {
    pub fn event_log_text(&self) -> String {
        jsonl(self.events.iter().map(LogLine::to_json))
    }

    pub fn feature_log_text(&self) -> String {
        jsonl(self.features.iter().map(|f| serde_json::to_string(f).expect("features serialize")))
    }
}

fn jsonl(lines: impl Iterator<Item = String>) -> String {
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

/// Materializes the configured input as mono audio at the analysis rate.
pub fn load_input(input: &InputSource) -> Result<AudioFrame> {
    let sr = ANALYSIS_SAMPLE_RATE;
    Ok(match input {
        InputSource::Wav { path } => read_wav(path)?,
        InputSource::Click(c) => {
            c.validate()?;
            AudioFrame::new(render_clicks(&c.times(), c.duration_s), sr, 0.0)
        }
        InputSource::Poisson(p) => {
            p.validate()?;
            AudioFrame::new(render_clicks(&p.times(), p.duration_s), sr, 0.0)
        }
        InputSource::Silence { duration_s } => {
            AudioFrame::new(vec![0.0; (duration_s * sr as f64).round() as usize], sr, 0.0)
        }
    })
}

/// Every stateful stage of a run, built from one config.
struct Stages {
    analyzer: Analyzer,
    conductor: Conductor,
    host: ActuatorHost,
}

fn build(cfg: &RunConfig) -> Result<Stages> {
    cfg.validate()?;
    let seed = cfg.seed();
    let analyzer = Analyzer::new(cfg.analysis())?;
    let conductor = Conductor::new(cfg.conductor(), cfg.arm.clone(), seed)?;
    let bank = VirtualDrumBank::new(&cfg.drums())?;
    let snippets = SnippetLibrary::load(cfg.snippet_dir.as_deref(), &cfg.arm, &cfg.retarget_options())?;
    let arm_cfg = cfg.arm_config();
    let arm = VirtualArm::new(
        cfg.arm.rest_config.clone(),
        SimDuration::from_secs(arm_cfg.start_latency_s),
        Arc::new(snippets),
    );
    let stops = cfg.safety_stops_s.iter().map(|&t| SimTime::from_secs(t)).collect();
    let host = ActuatorHost::new(bank, arm, SimDuration::from_secs(arm_cfg.recovery_delay_s), seed).with_safety_stops(stops);
    Ok(Stages {
        analyzer,
        conductor,
        host,
    })
}

fn block_end(samples_done: usize) -> SimTime {
    SimTime((samples_done as i64 * 1_000_000 + ANALYSIS_SAMPLE_RATE as i64 / 2) / ANALYSIS_SAMPLE_RATE as i64)
}

/// Runs the full chain and writes whichever outputs the config names.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let started = Instant::now();
    let mut stages = build(cfg)?;
    let audio = load_input(cfg.input.as_ref().expect("validated"))?;
    let (events, features, bus_dropped) = match cfg.mode {
        Mode::Offline => run_offline(&mut stages, &audio, cfg.hop_size)?,
        Mode::Live => run_live(stages, &audio, cfg)?,
    };
    let mut out = summarize(cfg, audio.duration(), events, features, bus_dropped);
    out.summary.wall_time_s = started.elapsed().as_secs_f64();
    write_outputs(cfg, &out)?;
    Ok(out)
}

fn summarize(cfg: &RunConfig, duration: f64, events: (Vec<LogLine>, ConductorTotals), features: Vec<Feature>, bus_dropped: u64) -> RunOutput {
    let (events, totals) = events;
    let count = |f: &dyn Fn(&LogLine) -> bool| events.iter().filter(|l| f(l)).count();
    let is_arm_cmd = |l: &LogLine| {
        matches!(l.kind, LogKind::Snippet1 | LogKind::Snippet2 | LogKind::Snippet3 | LogKind::RandomPose)
    };
    let summary = RunSummary {
        seed: cfg.seed(),
        mode: format!("{:?}", cfg.mode).to_lowercase(),
        duration_s: duration,
        features: features.len(),
        strikes_ok: count(&|l| l.is_strike() && l.is_ok()),
        strikes_dropped: count(&|l| l.is_strike() && !l.is_ok()),
        arm_ok: count(&|l| is_arm_cmd(l) && l.is_ok()),
        arm_dropped: count(&|l| is_arm_cmd(l) && !l.is_ok()),
        safety_stops: count(&|l| l.kind == LogKind::SafetyStop),
        watchdog_resets: count(&|l| l.kind == LogKind::WatchdogReset),
        patterns: totals.patterns,
        cycles_skipped: totals.cycles_skipped,
        events_cancelled: totals.events_cancelled,
        bus_dropped,
        wall_time_s: 0.0,
    };
    RunOutput {
        events,
        features,
        summary,
    }
}

fn write_outputs(cfg: &RunConfig, out: &RunOutput) -> Result<()> {
    let write = |path: &Path, text: &str| -> Result<()> {
        let f = File::create(path).map_err(|e| Error::file(path, e))?;
        let mut w = BufWriter::new(f);
        w.write_all(text.as_bytes()).map_err(|e| Error::file(path, e))?;
        w.flush().map_err(|e| Error::file(path, e))
    };
    if let Some(p) = &cfg.event_log {
        write(p, &out.event_log_text())?;
    }
    if let Some(p) = &cfg.feature_log {
        write(p, &out.feature_log_text())?;
    }
    if let Some(p) = &cfg.render_wav {
        write_wav(p, &render_strikes(&out.events, out.summary.duration_s), RENDER_SAMPLE_RATE)?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default)]
struct ConductorTotals {
    patterns: u64,
    cycles_skipped: u64,
    events_cancelled: u64,
}

impl ConductorTotals {
    fn of(c: &Conductor) -> Self {
        let s = c.stats();
        ConductorTotals {
            patterns: s.patterns_generated,
            cycles_skipped: s.cycles_skipped,
            events_cancelled: s.events_cancelled,
        }
    }
}

type Collected = ((Vec<LogLine>, ConductorTotals), Vec<Feature>, u64);

fn run_offline(stages: &mut Stages, audio: &AudioFrame, hop: usize) -> Result<Collected> {
    let mut lines = Vec::new();
    let mut features = Vec::new();
    let mut done = 0usize;
    for block in audio.samples.chunks(hop) {
        let frame = AudioFrame::new(block.to_vec(), ANALYSIS_SAMPLE_RATE, done as f64 / ANALYSIS_SAMPLE_RATE as f64);
        done += block.len();
        let now = block_end(done);
        for f in stages.analyzer.push(&frame)? {
            stages.conductor.on_feature(&f);
            features.push(f);
        }
        for e in stages.conductor.step(now) {
            stages.host.dispatch(&e, &mut lines)?;
        }
    }
    stages.host.advance_to(block_end(done), &mut lines);
    Ok(((lines, ConductorTotals::of(&stages.conductor)), features, 0))
}

enum BusMsg {
    Feature(Feature),
    Tick(SimTime),
    End,
}

enum ActuatorMsg {
    Dispatch(Vec<ScheduledEvent>),
    End(SimTime),
}

/// Analysis, conductor, and actuators on their own threads. Audio is paced
/// against the wall clock at `live_speed`; every record still carries
/// simulated time, so the logs match an offline run.
fn run_live(stages: Stages, audio: &AudioFrame, cfg: &RunConfig) -> Result<Collected> {
    let Stages {
        mut analyzer,
        mut conductor,
        mut host,
    } = stages;
    let bus = Arc::new(ArrayQueue::<BusMsg>::new(cfg.bus_capacity));
    let dropped = Arc::new(AtomicU64::new(0));
    let (tx, rx) = mpsc::channel::<ActuatorMsg>();
    let hop = cfg.hop_size;
    let speed = cfg.live_speed;

    std::thread::scope(|scope| {
        let producer_bus = Arc::clone(&bus);
        let producer_dropped = Arc::clone(&dropped);
        let producer = scope.spawn(move || -> Result<()> {
            let push = |m: BusMsg| {
                if producer_bus.force_push(m).is_some() {
                    producer_dropped.fetch_add(1, Ordering::Relaxed);
                }
            };
            let wall_start = Instant::now();
            let mut done = 0usize;
            let result = (|| {
                for block in audio.samples.chunks(hop) {
                    let frame =
                        AudioFrame::new(block.to_vec(), ANALYSIS_SAMPLE_RATE, done as f64 / ANALYSIS_SAMPLE_RATE as f64);
                    done += block.len();
                    let now = block_end(done);
                    let due = Duration::from_secs_f64(now.as_secs() / speed);
                    if let Some(wait) = due.checked_sub(wall_start.elapsed()) {
                        std::thread::sleep(wait);
                    }
                    for f in analyzer.push(&frame)? {
                        push(BusMsg::Feature(f));
                    }
                    push(BusMsg::Tick(now));
                }
                Ok(())
            })();
            push(BusMsg::Tick(block_end(done)));
            push(BusMsg::End);
            result
        });

        let conductor_bus = Arc::clone(&bus);
        let conductor_thread = scope.spawn(move || {
            let mut features = Vec::new();
            let mut last = SimTime::ZERO;
            loop {
                let Some(msg) = conductor_bus.pop() else {
                    std::thread::sleep(Duration::from_micros(200));
                    continue;
                };
                match msg {
                    BusMsg::Feature(f) => {
                        conductor.on_feature(&f);
                        features.push(f);
                    }
                    BusMsg::Tick(now) => {
                        last = now;
                        let due = conductor.step(now);
                        if !due.is_empty() && tx.send(ActuatorMsg::Dispatch(due)).is_err() {
                            break;
                        }
                    }
                    BusMsg::End => break,
                }
            }
            let _ = tx.send(ActuatorMsg::End(last));
            (features, ConductorTotals::of(&conductor))
        });

        let actuator_thread = scope.spawn(move || -> Result<Vec<LogLine>> {
            let mut lines = Vec::new();
            for msg in rx {
                match msg {
                    ActuatorMsg::Dispatch(events) => {
                        for e in &events {
                            host.dispatch(e, &mut lines)?;
                        }
                    }
                    ActuatorMsg::End(t) => {
                        host.advance_to(t, &mut lines);
                        break;
                    }
                }
            }
            Ok(lines)
        });

        producer.join().expect("analysis thread panicked")?;
        let (features, totals) = conductor_thread.join().expect("conductor thread panicked");
        let lines = actuator_thread.join().expect("actuator thread panicked")?;
        Ok(((lines, totals), features, dropped.load(Ordering::Relaxed)))
    })
}
