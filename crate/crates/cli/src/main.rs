mod serve;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use cwip_avr_core::calibration::{
    boxplot_fences, calibrate_threshold, SpeedSampleSet, DEFAULT_ROUNDING,
};
use cwip_avr_core::config::EngineConfig;
use cwip_avr_core::geometry::{RoomModel, Vec2};
use cwip_avr_core::sim::{self, GaitKind, GaitParams, SimConfig};

#[derive(Parser)]
#[command(
    name = "cwip-avr",
    version,
    about = "Walking-mode classification and room hazard warnings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a skeleton trace through the pipeline and write its frame log.
    Simulate {
        #[arg(long)]
        room: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize a skeleton trace.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON file with gait parameters; flags given here override it.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Waypoints as "x,z;x,z;..." for natural walking.
        #[arg(long)]
        path: Option<String>,
        #[arg(long)]
        speed: Option<f64>,
        #[arg(long)]
        step_rate: Option<f64>,
        #[arg(long)]
        knee_lift: Option<f64>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Derive the walking-speed threshold from speed samples (CSV, first column).
    Calibrate {
        #[arg(long)]
        speeds: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ROUNDING)]
        rounding: f64,
    },
    /// Recompute metrics from a frame log.
    Metrics {
        #[arg(long)]
        log: PathBuf,
    },
    /// Host interactive sessions.
    Serve {
        #[arg(long)]
        room: PathBuf,
        #[arg(long)]
        port: u16,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = serve::Transport::Ws)]
        transport: serve::Transport,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Stationary,
    NaturalWalk,
    WalkInPlace,
    MixedScript,
}

impl From<Kind> for GaitKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Stationary => GaitKind::Stationary,
            Kind::NaturalWalk => GaitKind::NaturalWalk,
            Kind::WalkInPlace => GaitKind::WalkInPlace,
            Kind::MixedScript => GaitKind::MixedScript,
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_room(path: &Path) -> Result<RoomModel> {
    RoomModel::from_json(&read_text(path)?).with_context(|| format!("room file {}", path.display()))
}

fn load_config(path: Option<&Path>) -> Result<EngineConfig> {
    match path {
        Some(p) => EngineConfig::from_json(&read_text(p)?)
            .with_context(|| format!("config file {}", p.display())),
        None => Ok(EngineConfig::default()),
    }
}

fn parse_path(text: &str) -> Result<Vec<Vec2>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (x, z) = pair
                .split_once(',')
                .with_context(|| format!("waypoint {pair:?} is not x,z"))?;
            Ok(Vec2::new(x.trim().parse()?, z.trim().parse()?))
        })
        .collect()
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    serde_json::to_writer_pretty(&mut lock, value)?;
    writeln!(lock)?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate {
            room,
            trace,
            config,
            out,
        } => {
            let cfg = SimConfig {
                room: load_room(&room)?,
                engine: load_config(config.as_deref())?,
            };
            let file =
                File::open(&trace).with_context(|| format!("opening {}", trace.display()))?;
            let frames = sim::read_trace(BufReader::new(file))
                .with_context(|| format!("trace {}", trace.display()))?;
            let result = sim::run_trace(&cfg, &frames)?;
            let mut w = BufWriter::new(
                File::create(&out).with_context(|| format!("creating {}", out.display()))?,
            );
            sim::write_log(&mut w, &cfg, &result.frames)?;
            w.flush()?;
            print_json(&result.metrics)
        }
        Command::Generate {
            kind,
            seed,
            params,
            path,
            speed,
            step_rate,
            knee_lift,
            noise,
            rate,
            duration,
            out,
        } => {
            let mut p: GaitParams = match &params {
                Some(file) => serde_json::from_str(&read_text(file)?)
                    .with_context(|| format!("params {}", file.display()))?,
                None => GaitParams::default(),
            };
            p.kind = kind.into();
            p.seed = seed;
            if let Some(text) = path {
                p.path = parse_path(&text)?;
            }
            if let Some(v) = speed {
                p.ground_speed = v;
            }
            if let Some(v) = step_rate {
                p.step_rate = v;
            }
            if let Some(v) = knee_lift {
                p.knee_lift = v;
            }
            if let Some(v) = noise {
                p.noise_sigma = v;
            }
            if let Some(v) = rate {
                p.frame_rate = v;
            }
            if let Some(v) = duration {
                p.duration = v;
            }
            let frames = sim::generate_gait(&p)?;
            let mut w = BufWriter::new(
                File::create(&out).with_context(|| format!("creating {}", out.display()))?,
            );
            sim::write_trace(&mut w, &frames)?;
            w.flush()?;
            eprintln!("wrote {} frames to {}", frames.len(), out.display());
            Ok(())
        }
        Command::Calibrate { speeds, rounding } => {
            let set = SpeedSampleSet::from_csv(&read_text(&speeds)?, speeds.display().to_string())?;
            let v_t = calibrate_threshold(&set, rounding)?;
            print_json(&serde_json::json!({
                "samples": set.samples.len(),
                "fences": boxplot_fences(&set)?,
                "v_t": v_t,
            }))
        }
        Command::Metrics { log } => {
            let file = File::open(&log).with_context(|| format!("opening {}", log.display()))?;
            let (cfg, frames) = sim::read_log(BufReader::new(file))
                .with_context(|| format!("log {}", log.display()))?;
            print_json(&sim::metrics_from_log(&cfg, &frames))
        }
        Command::Serve {
            room,
            port,
            config,
            transport,
            host,
        } => {
            let room = load_room(&room)?;
            let config = load_config(config.as_deref())?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(serve::run(&host, port, transport, room, config))
        }
    }
}
