//! `gsd` command-line front end.
//!
//! Settings come from, in increasing precedence: built-in defaults, a flat
//! TOML file (`--config` or `$GSD_CONFIG`), then command-line flags. Tabular
//! output is CSV with a leading `#` comment carrying the tool version and a
//! hash of the resolved configuration; structured records are JSON.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bits::BitString;
use crate::circuit::{self, MzTree};
use crate::info::{self, MAX_ENUM_LEVELS};
use crate::noise::{self, PhysicalParams};
use crate::optics::StageNoise;
use crate::protocol::{self, Agent, ClickResult, DetectorAssignment};
use crate::timing::{self, Geometry, DEFAULT_RATIO_THRESHOLD};

pub const CONFIG_ENV: &str = "GSD_CONFIG";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: u8 = 0;
pub const EXIT_ABORT: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config file {path}: {msg}")]
    Config { path: PathBuf, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn usage_from<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "gsd", version, about = "Single-photon two-way signaling simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Play one round and report the click, both decodes and the verdict.
    Play,
    /// Bob's gain for the eight two-level detector patterns.
    Table1,
    /// Total information gain for every Bob share m.
    GainSweep,
    /// Success rate versus number of levels.
    LossCurve,
    /// Time-multiplexed delay of every leaf.
    Delays,
    /// Quantum time window versus the classical baseline.
    Timing,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Play => "play",
            Command::Table1 => "table1",
            Command::GainSweep => "gain-sweep",
            Command::LossCurve => "loss-curve",
            Command::Delays => "delays",
            Command::Timing => "timing",
        }
    }
}

/// Every setting, optional so file and flag layers can be merged.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Flags {
    /// Number of levels (loss-curve: largest level).
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Alice's input string, level 1 first.
    #[arg(long, global = true)]
    pub x: Option<String>,
    /// Bob's input string, level 1 first.
    #[arg(long, global = true)]
    pub y: Option<String>,
    /// balanced | level-parity:K | single-alice[:LEAF] | split (with --m) | two-detector | explicit pattern like A,B,B,A
    #[arg(long, global = true)]
    pub assignment: Option<String>,
    /// Bob's detector count for `--assignment split`.
    #[arg(long, global = true)]
    pub m: Option<u64>,
    /// Single-photon emission probability per pulse.
    #[arg(long, global = true)]
    pub p1: Option<f64>,
    /// Optical loss per stage.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Detector efficiency.
    #[arg(long = "eta-d", global = true)]
    pub eta_d: Option<f64>,
    /// Phase jitter half-width per interferometer, radians.
    #[arg(long, global = true)]
    pub jitter: Option<f64>,
    /// Alice-Bob distance, meters.
    #[arg(long, global = true)]
    pub d: Option<f64>,
    /// Inter-level path length, meters.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Carrier speed, m/s.
    #[arg(long, global = true)]
    pub c: Option<f64>,
    /// Time slack, seconds.
    #[arg(long, global = true)]
    pub slack: Option<f64>,
    /// Required ratio d / (2^n delta) for the feasibility bound.
    #[arg(long, global = true)]
    pub ratio: Option<f64>,
    /// Monte Carlo pulses per level (loss-curve).
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// RNG seed; required for any stochastic run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Config file (defaults to $GSD_CONFIG).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Flags {
    /// `self` wins over `base` field by field.
    fn over(self, base: Flags) -> Flags {
        Flags {
            n: self.n.or(base.n),
            x: self.x.or(base.x),
            y: self.y.or(base.y),
            assignment: self.assignment.or(base.assignment),
            m: self.m.or(base.m),
            p1: self.p1.or(base.p1),
            eps: self.eps.or(base.eps),
            eta_d: self.eta_d.or(base.eta_d),
            jitter: self.jitter.or(base.jitter),
            d: self.d.or(base.d),
            delta: self.delta.or(base.delta),
            c: self.c.or(base.c),
            slack: self.slack.or(base.slack),
            ratio: self.ratio.or(base.ratio),
            trials: self.trials.or(base.trials),
            seed: self.seed.or(base.seed),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            config: self.config.or(base.config),
        }
    }
}

pub fn load_config_file(path: &Path) -> Result<Flags, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config { path: path.to_owned(), msg: e.to_string() })?;
    toml::from_str(&text).map_err(|e| CliError::Config { path: path.to_owned(), msg: e.to_string() })
}

/// Fully resolved settings for one command. Its JSON form is what gets hashed.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub n: u32,
    pub x: Option<String>,
    pub y: Option<String>,
    pub assignment: String,
    pub m: Option<u64>,
    pub params: PhysicalParams,
    /// Per-stage loss used by `play` (0 unless set explicitly).
    pub play_loss: f64,
    pub jitter: f64,
    pub geometry: Geometry,
    pub ratio: f64,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(command: Command, flags: Flags) -> Result<Self, CliError> {
        let defaults = PhysicalParams::REFERENCE;
        let params = PhysicalParams::new(
            flags.p1.unwrap_or(defaults.p1),
            flags.eps.unwrap_or(defaults.eps_stage),
            flags.eta_d.unwrap_or(defaults.eta_d),
        )
        .map_err(usage_from)?;
        let geometry = Geometry::new(
            flags.d.unwrap_or(300.0),
            flags.delta.unwrap_or(1.0),
            flags.c.unwrap_or(Geometry::SPEED_OF_LIGHT),
            flags.slack.unwrap_or(0.0),
        )
        .map_err(usage_from)?;
        let default_n = match command {
            Command::LossCurve => 40,
            _ => 2,
        };
        let default_format = match command {
            Command::Play => Format::Json,
            _ => Format::Csv,
        };
        let n = flags.n.unwrap_or(default_n);
        if n == 0 {
            return Err(usage("--n must be at least 1"));
        }
        Ok(Self {
            command: command.name(),
            n,
            x: flags.x,
            y: flags.y,
            assignment: flags.assignment.unwrap_or_else(|| "balanced".to_string()),
            m: flags.m,
            params,
            play_loss: flags.eps.unwrap_or(0.0),
            jitter: flags.jitter.unwrap_or(0.0),
            geometry,
            ratio: flags.ratio.unwrap_or(DEFAULT_RATIO_THRESHOLD),
            trials: flags.trials,
            seed: flags.seed,
            format: flags.format.unwrap_or(default_format),
            out: flags.out,
        })
    }

    /// First 16 hex digits of SHA-256 over the JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&json);
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn comment(&self) -> String {
        format!("# gsd {VERSION} command={} config={}\n", self.command, self.hash())
    }
}

/// Parses an assignment spec for an `n`-level tree.
pub fn parse_assignment(spec: &str, n: u32, m: Option<u64>) -> Result<DetectorAssignment, CliError> {
    let spec = spec.trim();
    let (head, arg) = match spec.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (spec, None),
    };
    let num = |a: Option<&str>, what: &str| -> Result<u64, CliError> {
        a.ok_or_else(|| usage(format!("{what} needs a value")))?
            .parse()
            .map_err(|_| usage(format!("bad {what} value in {spec:?}")))
    };
    let assignment = match head.to_ascii_lowercase().as_str() {
        "balanced" => DetectorAssignment::balanced(n),
        "level-parity" | "level" => DetectorAssignment::level_parity(n, num(arg, "level-parity")? as u32),
        "single-alice" => {
            let leaf = match arg {
                Some(_) => num(arg, "single-alice")?,
                None => 1u64 << n,
            };
            DetectorAssignment::single_alice(n, leaf)
        }
        "split" => {
            let m = m.ok_or_else(|| usage("--assignment split needs --m"))?;
            DetectorAssignment::bob_first(n, m)
        }
        "two-detector" => DetectorAssignment::two_detector(n),
        _ => {
            let a = DetectorAssignment::parse_pattern(spec).map_err(usage_from)?;
            if a.levels() != n {
                return Err(usage(format!(
                    "pattern {spec:?} covers {} leaves but n = {n}",
                    a.leaf_count()
                )));
            }
            Ok(a)
        }
    };
    assignment.map_err(usage_from)
}

/// Result of a command: text for the output sink, optional human summary,
/// and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub record: String,
    pub summary: Option<String>,
    pub exit: u8,
}

impl CommandOutput {
    fn data(record: String) -> Self {
        Self { record, summary: None, exit: EXIT_OK }
    }
}

fn csv_table(cfg: &RunConfig, header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| usage(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| usage(e.to_string()))?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| usage(e.to_string()))?)
        .expect("csv output is utf-8");
    Ok(cfg.comment() + &body)
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("record serializes");
    s.push('\n');
    s
}

fn bits_arg(value: &Option<String>, name: &str, n: u32) -> Result<BitString, CliError> {
    let raw = value.as_deref().ok_or_else(|| usage(format!("play needs --{name}")))?;
    let bits: BitString = raw.parse().map_err(|e| usage(format!("--{name}: {e}")))?;
    if bits.len() != n {
        return Err(usage(format!("--{name} has {} bits but n = {n}", bits.len())));
    }
    Ok(bits)
}

#[derive(Debug, Serialize)]
struct PlayRecord {
    tool_version: &'static str,
    config_hash: String,
    n: u32,
    x: BitString,
    y: BitString,
    assignment: String,
    m: u64,
    result: ClickResult,
    alice_view: protocol::View,
    bob_view: protocol::View,
    clicker: Option<Agent>,
    clicker_decoded: Option<BitString>,
    clicker_decode_correct: Option<bool>,
    silent: Option<Agent>,
    silent_compatible_count: Option<usize>,
    silent_bits_gained: Option<f64>,
    win: bool,
}

pub fn cmd_play(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let n = cfg.n;
    let x = bits_arg(&cfg.x, "x", n)?;
    let y = bits_arg(&cfg.y, "y", n)?;
    let assignment = parse_assignment(&cfg.assignment, n, cfg.m)?;
    let noise = StageNoise::new(cfg.play_loss, cfg.jitter).map_err(usage_from)?;

    let report = if noise.is_ideal() {
        protocol::play(&x, &y, &assignment, &noise, None)
    } else {
        let seed = cfg.seed.ok_or_else(|| usage("noisy play needs --seed"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        protocol::play(&x, &y, &assignment, &noise, Some(&mut rng))
    }
    .map_err(usage_from)?;

    let truth = |agent: Agent| match agent {
        Agent::Alice => y,
        Agent::Bob => x,
    };
    let summary = match (&report.clicker_decode, &report.silent_knowledge) {
        (Some((clicker, decoded)), Some((silent, knowledge))) => {
            let other = if *clicker == Agent::Alice { 'y' } else { 'x' };
            let gain = knowledge.bits_gained;
            let unit = if (gain - 1.0).abs() < 1e-12 { "bit" } else { "bits" };
            format!(
                "{clicker} clicks; {clicker} decodes {other}={decoded}; {silent} gains {} {unit}; {}",
                fmt_gain(gain),
                if report.win { "WIN" } else { "NO WIN" }
            )
        }
        _ => "photon lost; ABORT".to_string(),
    };

    let record = PlayRecord {
        tool_version: VERSION,
        config_hash: cfg.hash(),
        n,
        x,
        y,
        assignment: assignment.pattern(),
        m: assignment.m(),
        result: report.outcome.result,
        alice_view: report.outcome.alice_view,
        bob_view: report.outcome.bob_view,
        clicker: report.clicker_decode.map(|(a, _)| a),
        clicker_decoded: report.clicker_decode.map(|(_, s)| s),
        clicker_decode_correct: report.clicker_decode.map(|(a, s)| s == truth(a)),
        silent: report.silent_knowledge.as_ref().map(|(a, _)| *a),
        silent_compatible_count: report.silent_knowledge.as_ref().map(|(_, k)| k.compatible.len()),
        silent_bits_gained: report.silent_knowledge.as_ref().map(|(_, k)| k.bits_gained),
        win: report.win,
    };

    let text = match cfg.format {
        Format::Json => json(&record),
        Format::Csv => {
            let (leaf, owner, delay) = match record.result {
                ClickResult::Click { leaf, owner, delay } => {
                    (leaf.to_string(), owner.to_string(), delay.to_string())
                }
                ClickResult::Lost => (String::new(), String::new(), String::new()),
            };
            let opt = |v: Option<String>| v.unwrap_or_default();
            csv_table(
                cfg,
                &["n", "x", "y", "assignment", "leaf", "owner", "delay", "clicker_decoded", "silent_bits_gained", "win"],
                vec![vec![
                    n.to_string(),
                    x.to_string(),
                    y.to_string(),
                    record.assignment.clone(),
                    leaf,
                    owner,
                    delay,
                    opt(record.clicker_decoded.map(|s| s.to_string())),
                    opt(record.silent_bits_gained.map(|g| g.to_string())),
                    record.win.to_string(),
                ]],
            )?
        }
    };
    Ok(CommandOutput {
        record: text,
        summary: Some(summary),
        exit: if report.win { EXIT_OK } else { EXIT_ABORT },
    })
}

fn fmt_gain(g: f64) -> String {
    if (g - g.round()).abs() < 1e-12 {
        format!("{}", g.round() as i64)
    } else {
        format!("{g:.6}")
    }
}

pub fn cmd_table1(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let rows = info::table1_report().map_err(usage_from)?;
    let text = match cfg.format {
        Format::Json => json(&rows),
        Format::Csv => csv_table(
            cfg,
            &["case", "pattern", "bob_gain", "reference_gain"],
            rows.iter()
                .map(|r| {
                    vec![
                        r.case.to_string(),
                        r.pattern.clone(),
                        r.bob_gain.to_string(),
                        r.reference_gain.to_string(),
                    ]
                })
                .collect(),
        )?,
    };
    Ok(CommandOutput::data(text))
}

#[derive(Debug, Serialize)]
struct SweepRow {
    m: u64,
    analytic_total: f64,
    enumerated_total: Option<f64>,
    mirror_total: f64,
    is_max: bool,
}

pub fn cmd_gain_sweep(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let n = cfg.n;
    if n > info::MAX_SCAN_LEVELS {
        return Err(usage(format!("gain-sweep supports n <= {}", info::MAX_SCAN_LEVELS)));
    }
    let best = info::optimal_m(n).map_err(usage_from)?;
    let leaves = 1u64 << n;
    let mut rows = Vec::with_capacity(leaves as usize + 1);
    for m in 0..=leaves {
        let enumerated = if n <= MAX_ENUM_LEVELS {
            let a = DetectorAssignment::bob_first(n, m).map_err(usage_from)?;
            Some(info::enumerate_gains(n, &a).map_err(usage_from)?.total)
        } else {
            None
        };
        rows.push(SweepRow {
            m,
            analytic_total: info::analytic_total(n, m).map_err(usage_from)?,
            enumerated_total: enumerated,
            mirror_total: info::analytic_total(n, leaves - m).map_err(usage_from)?,
            is_max: m == best,
        });
    }
    let text = match cfg.format {
        Format::Json => json(&rows),
        Format::Csv => csv_table(
            cfg,
            &["m", "analytic_total", "enumerated_total", "mirror_total", "is_max"],
            rows.iter()
                .map(|r| {
                    vec![
                        r.m.to_string(),
                        r.analytic_total.to_string(),
                        r.enumerated_total.map(|v| v.to_string()).unwrap_or_default(),
                        r.mirror_total.to_string(),
                        r.is_max.to_string(),
                    ]
                })
                .collect(),
        )?,
    };
    Ok(CommandOutput::data(text))
}

#[derive(Debug, Serialize)]
struct LossRow {
    n: u32,
    success_rate: f64,
    mc_rate: Option<f64>,
    mc_std_error: Option<f64>,
}

pub fn cmd_loss_curve(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let curve = noise::loss_curve(1, cfg.n, &cfg.params).map_err(usage_from)?;
    let seed = match cfg.trials {
        Some(_) => Some(cfg.seed.ok_or_else(|| usage("--trials needs --seed"))?),
        None => None,
    };
    let mut rows = Vec::with_capacity(curve.len());
    for (n, rate) in curve {
        let mc = match (cfg.trials, seed) {
            (Some(trials), Some(seed)) => {
                Some(noise::monte_carlo_rate(n, &cfg.params, trials, seed).map_err(usage_from)?)
            }
            _ => None,
        };
        rows.push(LossRow {
            n,
            success_rate: rate,
            mc_rate: mc.map(|e| e.rate),
            mc_std_error: mc.map(|e| e.std_error),
        });
    }
    let text = match cfg.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let with_mc = cfg.trials.is_some();
            let mut header = vec!["n", "success_rate"];
            if with_mc {
                header.extend(["mc_rate", "mc_std_error"]);
            }
            let body = rows
                .iter()
                .map(|r| {
                    let mut row = vec![r.n.to_string(), r.success_rate.to_string()];
                    if with_mc {
                        row.push(r.mc_rate.map(|v| v.to_string()).unwrap_or_default());
                        row.push(r.mc_std_error.map(|v| v.to_string()).unwrap_or_default());
                    }
                    row
                })
                .collect();
            csv_table(cfg, &header, body)?
        }
    };
    Ok(CommandOutput::data(text))
}

#[derive(Debug, Serialize)]
struct DelayRow {
    leaf: u64,
    parity: String,
    final_mz: u64,
    delay_units: u64,
    detector: Agent,
}

pub fn cmd_delays(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let tree = MzTree::new(cfg.n).map_err(usage_from)?;
    let schedule = circuit::delay_schedule(cfg.n).map_err(usage_from)?;
    let two = DetectorAssignment::two_detector(cfg.n).map_err(usage_from)?;
    let rows = tree
        .leaves()
        .map(|leaf| {
            Ok(DelayRow {
                leaf,
                parity: tree.parity_of_leaf(leaf).map_err(usage_from)?.to_string(),
                final_mz: schedule.final_mz(leaf).map_err(usage_from)?,
                delay_units: schedule.leaf_delay(leaf).map_err(usage_from)?,
                detector: two.owner(leaf),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let text = match cfg.format {
        Format::Json => json(&rows),
        Format::Csv => csv_table(
            cfg,
            &["leaf", "parity", "final_mz", "delay_units", "detector"],
            rows.iter()
                .map(|r| {
                    vec![
                        r.leaf.to_string(),
                        r.parity.clone(),
                        r.final_mz.to_string(),
                        r.delay_units.to_string(),
                        r.detector.to_string(),
                    ]
                })
                .collect(),
        )?,
    };
    Ok(CommandOutput::data(text))
}

#[derive(Debug, Serialize)]
struct TimingRecord {
    n: u32,
    d: f64,
    delta: f64,
    c: f64,
    slack: f64,
    t_lo: f64,
    t_hi: f64,
    classical_time: f64,
    window_valid: bool,
    classical_bits: u64,
    quantum_total_bits: u32,
    feasible_max_n: u32,
}

pub fn cmd_timing(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let g = &cfg.geometry;
    let w = timing::quantum_window(cfg.n, g);
    let rec = TimingRecord {
        n: cfg.n,
        d: g.d,
        delta: g.delta,
        c: g.c,
        slack: g.slack,
        t_lo: w.t_lo,
        t_hi: w.t_hi,
        classical_time: timing::classical_time(cfg.n, g),
        window_valid: timing::validate_window(cfg.n, g),
        classical_bits: timing::classical_bits_within(w.t_hi, g),
        quantum_total_bits: cfg.n + 1,
        feasible_max_n: timing::feasibility_max_n(g, cfg.ratio).map_err(usage_from)?,
    };
    let text = match cfg.format {
        Format::Json => json(&rec),
        Format::Csv => csv_table(
            cfg,
            &[
                "n", "d", "delta", "c", "slack", "t_lo", "t_hi", "classical_time", "window_valid",
                "classical_bits", "quantum_total_bits", "feasible_max_n",
            ],
            vec![vec![
                rec.n.to_string(),
                rec.d.to_string(),
                rec.delta.to_string(),
                rec.c.to_string(),
                rec.slack.to_string(),
                rec.t_lo.to_string(),
                rec.t_hi.to_string(),
                rec.classical_time.to_string(),
                rec.window_valid.to_string(),
                rec.classical_bits.to_string(),
                rec.quantum_total_bits.to_string(),
                rec.feasible_max_n.to_string(),
            ]],
        )?,
    };
    Ok(CommandOutput::data(text))
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    match command {
        Command::Play => cmd_play(cfg),
        Command::Table1 => cmd_table1(cfg),
        Command::GainSweep => cmd_gain_sweep(cfg),
        Command::LossCurve => cmd_loss_curve(cfg),
        Command::Delays => cmd_delays(cfg),
        Command::Timing => cmd_timing(cfg),
    }
}

/// Resolves layers and runs. `env_config` is the value of `$GSD_CONFIG`.
pub fn run(cli: Cli, env_config: Option<PathBuf>) -> Result<(RunConfig, CommandOutput), CliError> {
    let config_path = cli.flags.config.clone().or(env_config);
    let file = match &config_path {
        Some(p) => load_config_file(p)?,
        None => Flags::default(),
    };
    let flags = cli.flags.over(file);
    let cfg = RunConfig::resolve(cli.command, flags)?;
    let out = execute(cli.command, &cfg)?;
    Ok((cfg, out))
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let env_config = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
    match run(cli, env_config).and_then(|(cfg, out)| emit(&cfg, &out).map(|_| out.exit)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gsd: {e}");
            EXIT_USAGE
        }
    }
}

fn emit(cfg: &RunConfig, out: &CommandOutput) -> Result<(), CliError> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    if let Some(summary) = &out.summary {
        writeln!(lock, "{summary}")?;
    }
    match &cfg.out {
        Some(path) => std::fs::write(path, &out.record)?,
        None => lock.write_all(out.record.as_bytes())?,
    }
    Ok(())
}
