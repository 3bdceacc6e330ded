use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use tambor::io::{demo_to_csv, read_demo_file, write_wav};
use tambor::pipeline::{run, Mode, RunConfig};
use tambor::synth::{render_clicks, snippet_demo, ArcSpec, ClickSpec, PoissonSpec};
use tambor::trajectory::{retarget, ArmModel, RetargetOptions};
use tambor::{analysis::ANALYSIS_SAMPLE_RATE, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_STRICT: u8 = 3;

#[derive(Parser)]
#[command(name = "tambor", version, about = "Beat-following drum and arm conductor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze an input, conduct, and log every actuator event.
    Run(RunArgs),
    /// Smooth a pose demonstration and map it onto the arm's joints.
    Retarget(RetargetArgs),
    /// Write a synthetic fixture plus its ground truth.
    #[command(subcommand)]
    Gen(GenKind),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    render: Option<PathBuf>,
    /// Overrides the config's mode.
    #[arg(long, value_parser = ["offline", "live"])]
    mode: Option<String>,
}

#[derive(Args)]
struct RetargetArgs {
    /// Demo file, CSV (`t,x,y,z,qw,qx,qy,qz`) or JSON.
    #[arg(long)]
    demo: PathBuf,
    #[arg(long, default_value_t = RetargetOptions::default().length_scale)]
    length_scale: f64,
    #[arg(long, default_value_t = RetargetOptions::default().noise_variance)]
    noise_variance: f64,
    /// Arm model JSON; defaults to the built-in planar arm.
    #[arg(long)]
    arm: Option<PathBuf>,
    /// Output path for the joint trajectory and report; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 if the report lists any violation.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum GenKind {
    /// Click track WAV; sidecar lists the click times.
    Click {
        #[arg(long)]
        bpm: f64,
        #[arg(long)]
        duration: f64,
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Poisson onset WAV; sidecar lists the event times.
    Poisson {
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        duration: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Planar shaking arc as a demo CSV; sidecar holds the clean poses.
    Arc {
        #[arg(long)]
        freq: f64,
        #[arg(long)]
        duration: f64,
        #[arg(long, default_value_t = 300.0)]
        rate: f64,
        #[arg(long, default_value_t = 0.0)]
        position_noise: f64,
        #[arg(long, default_value_t = 0.0)]
        yaw_noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// One of the bundled caxixi snippet demos.
    Snippet {
        #[arg(long)]
        id: u8,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Input(String),
    Strict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Retarget(a) => cmd_retarget(a),
        Command::Gen(k) => cmd_gen(k),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Strict(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_STRICT)
        }
    }
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let mut cfg = match RunConfig::load(&a.config) {
        Ok(c) => c,
        Err(e @ Error::File { .. }) => return Err(Failure::Input(e.to_string())),
        Err(e) => return Err(usage(e)),
    };
    if a.seed.is_some() {
        cfg.seed = a.seed;
    }
    if a.render.is_some() {
        cfg.render_wav = a.render;
    }
    match a.mode.as_deref() {
        Some("live") => cfg.mode = Mode::Live,
        Some(_) => cfg.mode = Mode::Offline,
        None => {}
    }
    if cfg.seed.is_none() {
        eprintln!("seed: {} (default)", cfg.seed());
    }
    let out = run(&cfg)?;
    println!("{}", serde_json::to_string(&out.summary).expect("summary serializes"));
    Ok(())
}

fn load_arm(path: Option<&Path>) -> Result<ArmModel, Failure> {
    let Some(path) = path else {
        return Ok(ArmModel::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let arm: ArmModel =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    arm.validate().map_err(usage)?;
    Ok(arm)
}

fn cmd_retarget(a: RetargetArgs) -> Result<(), Failure> {
    if !(a.length_scale > 0.0) || !(a.noise_variance >= 0.0) {
        return Err(Failure::Usage(
            "--length-scale must be positive and --noise-variance non-negative".into(),
        ));
    }
    let arm = load_arm(a.arm.as_deref())?;
    let demo = read_demo_file(&a.demo)?;
    let opts = RetargetOptions {
        length_scale: a.length_scale,
        noise_variance: a.noise_variance,
        ..RetargetOptions::default()
    };
    let result = retarget(&demo, &arm, &opts, &arm.rest_config)?;
    let text = serde_json::to_string(&result).expect("trajectory serializes");
    match &a.out {
        Some(p) => write_text(p, &text)?,
        None => println!("{text}"),
    }
    let n = result.report.violation_count();
    eprintln!(
        "{} samples, {} position and {} velocity violations",
        result.trajectory.times.len(),
        result.report.position_violations.len(),
        result.report.velocity_violations.len()
    );
    if a.strict && n > 0 {
        return Err(Failure::Strict(format!("{n} joint-limit violations")));
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn sidecar(out: &Path) -> PathBuf {
    out.with_extension("truth.json")
}

fn cmd_gen(kind: GenKind) -> Result<(), Failure> {
    match kind {
        GenKind::Click {
            bpm,
            duration,
            jitter,
            seed,
            out,
        } => {
            let spec = ClickSpec::new(bpm, duration).with_jitter(jitter, seed);
            spec.validate().map_err(usage)?;
            let times = spec.times();
            write_wav(&out, &render_clicks(&times, duration), ANALYSIS_SAMPLE_RATE)?;
            let truth = json!({ "spec": spec, "count": times.len(), "times": times });
            write_text(&sidecar(&out), &truth.to_string())
        }
        GenKind::Poisson {
            rate,
            duration,
            seed,
            out,
        } => {
            let spec = PoissonSpec {
                rate,
                duration_s: duration,
                seed,
            };
            spec.validate().map_err(usage)?;
            let times = spec.times();
            write_wav(&out, &render_clicks(&times, duration), ANALYSIS_SAMPLE_RATE)?;
            let truth = json!({ "spec": spec, "count": times.len(), "times": times });
            write_text(&sidecar(&out), &truth.to_string())
        }
        GenKind::Arc {
            freq,
            duration,
            rate,
            position_noise,
            yaw_noise,
            seed,
            out,
        } => {
            let spec = ArcSpec {
                rate_hz: rate,
                position_noise_m: position_noise,
                yaw_noise_rad: yaw_noise,
                seed,
                ..ArcSpec::new(freq, duration)
            };
            spec.validate().map_err(usage)?;
            let demo = spec.recorded();
            write_text(&out, &demo_to_csv(&demo))?;
            let clean = spec.clean();
            let truth = json!({ "spec": spec, "count": clean.samples.len(), "poses": clean.samples });
            write_text(&sidecar(&out), &truth.to_string())
        }
        GenKind::Snippet { id, out } => {
            let demo = snippet_demo(id).map_err(usage)?;
            write_text(&out, &demo_to_csv(&demo))?;
            let truth = json!({ "id": id, "count": demo.samples.len(), "duration_s": demo.duration() });
            write_text(&sidecar(&out), &truth.to_string())
        }
    }
}
