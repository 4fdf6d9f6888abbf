//! `udisc`: theory reports, QASM export, and noisy discrimination sweeps.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use udisc::circuit::{
    assemble_scheme, black_box_pair, qasm::emit_qasm, Example, Hypothesis, MeasurementKind,
    Primitive,
};
use udisc::experiment::{run_experiment, run_suboptimal, ExperimentConfig, OutputFormat, Shapes};
use udisc::simulator::NoiseModel;
use udisc::theory::{discrimination_report, multi_copy_bound};
use udisc::Error;

#[derive(Parser)]
#[command(name = "udisc", version, about = "Discrimination of qubit unitary channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Arc, ν, diamond norm and Helstrom bound for a pair.
    Theory(Common),
    /// Emit OpenQASM 3 for one scheme and hypothesis.
    Build {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        w: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value_t = HypArg::H0)]
        hypothesis: HypArg,
    },
    /// Run the shapes listed in a config file.
    Run(Common),
    /// Run every factorization of N.
    Sweep(Common),
    /// Majority vote over independent single-qubit sequential runs.
    Suboptimal {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        w: usize,
        #[arg(long)]
        d: usize,
    },
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in example pair, 1 or 2.
    #[arg(long)]
    example: Option<u8>,
    /// Number of black-box uses N.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Shots per hypothesis.
    #[arg(long)]
    shots: Option<u64>,
    /// `p1,p2,p_read` with an optional fourth over-rotation angle.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long, value_enum)]
    primitive: Option<PrimitiveArg>,
    #[arg(long, value_enum)]
    measurement: Option<MeasurementArg>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrimitiveArg {
    Cnot,
    Ecr,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasurementArg {
    Short,
    Xor,
    Parity,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum HypArg {
    H0,
    H1,
}

fn parse_noise(s: &str) -> Result<NoiseModel, Error> {
    let vals = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Error::InvalidConfig(format!("bad --noise value `{s}`")))?;
    let model = match vals[..] {
        [p1, p2, pr] => NoiseModel::new(p1, p2, pr),
        [p1, p2, pr, eps] => NoiseModel::new(p1, p2, pr).and_then(|m| m.with_over_rotation(eps)),
        _ => return Err(Error::InvalidConfig("--noise takes 3 or 4 comma-separated values".into())),
    };
    model.map_err(|e| Error::InvalidConfig(e.to_string()))
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match (&self.config, self.example, self.n) {
            (Some(path), _, _) => ExperimentConfig::load(path)?,
            (None, Some(e), Some(n)) => ExperimentConfig::new(example_from(e)?, n),
            _ => {
                return Err(Error::InvalidConfig(
                    "need --config, or both --example and --n".into(),
                ))
            }
        };
        if self.config.is_some() {
            if let Some(e) = self.example {
                cfg.example = example_from(e)?;
            }
            if let Some(n) = self.n {
                cfg.n_copies = n;
            }
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(s) = self.shots {
            cfg.shots = s;
        }
        if let Some(n) = &self.noise {
            cfg.noise = parse_noise(n)?;
        }
        if let Some(p) = self.primitive {
            cfg.primitive = match p {
                PrimitiveArg::Cnot => Primitive::Cnot,
                PrimitiveArg::Ecr => Primitive::Ecr,
            };
        }
        if let Some(m) = self.measurement {
            cfg.measurement = match m {
                MeasurementArg::Short => MeasurementKind::Short,
                MeasurementArg::Xor => MeasurementKind::Xor,
                MeasurementArg::Parity => MeasurementKind::Parity,
            };
        }
        if let Some(o) = &self.out {
            cfg.output = Some(o.clone());
        }
        if let Some(f) = self.format {
            cfg.format = match f {
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            };
        }
        Ok(cfg)
    }
}

fn example_from(e: u8) -> Result<Example, Error> {
    match e {
        1 => Ok(Example::Example1),
        2 => Ok(Example::Example2),
        other => Err(Error::InvalidConfig(format!("--example must be 1 or 2, got {other}"))),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn theory(cfg: &ExperimentConfig) -> Result<String, Error> {
    let pair = black_box_pair(&cfg.example, cfg.n_copies)?;
    let r = discrimination_report(&pair)?;
    Ok(format!(
        "theta = {}\ntheta_over_pi = {}\nnu = {}\ndiamond = {}\np_succ_single = {}\nmin_copies = {}\np_succ_n{} = {}\n",
        r.theta,
        r.theta / std::f64::consts::PI,
        r.nu,
        r.diamond,
        r.p_succ_bound,
        r.min_copies,
        cfg.n_copies,
        multi_copy_bound(r.theta, cfg.n_copies),
    ))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Theory(common) => {
            let cfg = common.config()?;
            emit(&theory(&cfg)?, cfg.output.as_ref())
        }
        Command::Build { common, w, d, hypothesis } => {
            let cfg = common.config()?;
            let spec = cfg.spec(w, d);
            spec.validate().map_err(|e| Error::InvalidConfig(e.to_string()))?;
            let hyp = match hypothesis {
                HypArg::H0 => Hypothesis::H0,
                HypArg::H1 => Hypothesis::H1,
            };
            emit(&emit_qasm(&assemble_scheme(&spec, hyp)?)?, cfg.output.as_ref())
        }
        Command::Run(common) => {
            if common.config.is_none() {
                return Err(Error::InvalidConfig("`run` needs --config".into()));
            }
            let cfg = common.config()?;
            let res = run_experiment(&cfg)?;
            emit(&res.render(cfg.format)?, cfg.output.as_ref())
        }
        Command::Sweep(common) => {
            let mut cfg = common.config()?;
            cfg.shapes = Shapes::All;
            let res = run_experiment(&cfg)?;
            emit(&res.render(cfg.format)?, cfg.output.as_ref())
        }
        Command::Suboptimal { common, w, d } => {
            let mut cfg = match (&common.config, common.example) {
                (None, None) => Common { example: Some(2), n: common.n.or(Some(w * d)), ..common }.config()?,
                _ => common.config()?,
            };
            if cfg.n_copies == 0 {
                cfg.n_copies = w * d;
            }
            let report = run_suboptimal(cfg.n_copies, w, d, &cfg)?;
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            emit(&(text + "\n"), cfg.output.as_ref())
        }
    }
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidConfig(_) | Error::InvalidSpec(_) | Error::InvalidNoise(_) | Error::Io { .. }
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_config_error(&e) { 1 } else { 2 })
        }
    }
}
