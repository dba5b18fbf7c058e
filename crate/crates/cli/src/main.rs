use clap::{Parser, Subcommand, ValueEnum};
use cskct::ArrivalModel;
use cskct_cli::commands::{self, McOptions};
use cskct_cli::{comment_header, CliError, Config};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "cskct",
    version,
    about = "CSK-CT and benchmark CSK design, error analysis and simulation"
)]
struct Cli {
    /// key=value configuration file
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Override a configuration key (repeatable), e.g. --set rho=1.24
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Write output here instead of stdout
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,

    /// Omit the wall-clock header line so output is byte-reproducible
    #[arg(long, global = true)]
    no_timestamp: bool,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Arrival {
    Binomial,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignFormat {
    Text,
    Csv,
    Kv,
}

#[derive(Subcommand)]
enum Command {
    /// Concentrations and thresholds for the configured scheme
    Design {
        #[arg(long, value_enum, default_value = "text")]
        format: DesignFormat,
    },
    /// Gamma ratio over a grid of symbol periods and far distances
    GammaSweep {
        #[arg(long, default_value = "1.28:32:1.28")]
        t_sym: String,
        #[arg(long, default_value = "17:21:1")]
        y_max: String,
    },
    /// Network symbol error probability while one parameter varies
    Ser {
        /// t_sym, y_max, d_bar, rho, M, scheme or k_memory
        #[arg(long)]
        vary: String,
        /// Comma list; numeric ranges as start:stop:step
        #[arg(long)]
        values: String,
        /// Add simulated SER with a 95% Wilson interval
        #[arg(long)]
        montecarlo: bool,
        #[arg(long)]
        rounds: Option<u64>,
        #[arg(long, value_enum, default_value = "binomial")]
        arrival: Arrival,
    },
    /// Threshold and CIR counts per receiver
    Complexity {
        #[arg(long, default_value = "1:100:1")]
        k: String,
        #[arg(long, default_value = "2,4,8")]
        m: String,
    },
    /// Simulated error rates next to the analytic ones
    Montecarlo {
        #[arg(long)]
        rounds: Option<u64>,
        #[arg(long, value_enum, default_value = "binomial")]
        arrival: Arrival,
    },
    /// Per-transmitter and distance-averaged CIRs
    CirDump,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Design { .. } => "design",
            Command::GammaSweep { .. } => "gamma-sweep",
            Command::Ser { .. } => "ser",
            Command::Complexity { .. } => "complexity",
            Command::Montecarlo { .. } => "montecarlo",
            Command::CirDump => "cir-dump",
        }
    }
}

fn arrival(a: Arrival) -> ArrivalModel {
    match a {
        Arrival::Binomial => ArrivalModel::Binomial,
        Arrival::Gaussian => ArrivalModel::Gaussian,
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => Config::from_file(path)?,
        None => Config::default(),
    };
    for pair in &cli.overrides {
        cfg.apply_pair(pair)?;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    cfg.warn_out_of_range();
    let workers = cli.threads.unwrap_or(0);

    let mut extra = Vec::new();
    let body = match &cli.command {
        Command::Design { format } => {
            let report = commands::design(&cfg)?;
            match format {
                DesignFormat::Text => report.text,
                DesignFormat::Csv => report.csv,
                DesignFormat::Kv => report.design.to_kv(),
            }
        }
        Command::GammaSweep { t_sym, y_max } => {
            extra.push(format!("t_sym_values={t_sym}"));
            extra.push(format!("y_max_values={y_max}"));
            commands::gamma_sweep_spec(&cfg, t_sym, y_max)?
        }
        Command::Ser {
            vary,
            values,
            montecarlo,
            rounds,
            arrival: a,
        } => {
            extra.push(format!("vary={vary}"));
            extra.push(format!("values={values}"));
            let mc = montecarlo.then(|| McOptions {
                rounds: rounds.unwrap_or(cfg.rounds),
                workers,
                arrival: arrival(*a),
            });
            if let Some(o) = mc {
                extra.push(format!("mc_rounds={}", o.rounds));
            }
            commands::ser_spec(&cfg, vary, values, mc)?
        }
        Command::Complexity { k, m } => {
            extra.push(format!("K_values={k}"));
            extra.push(format!("M_values={m}"));
            commands::complexity_spec(k, m)?
        }
        Command::Montecarlo { rounds, arrival: a } => {
            let opts = McOptions {
                rounds: rounds.unwrap_or(cfg.rounds),
                workers,
                arrival: arrival(*a),
            };
            extra.push(format!("mc_rounds={}", opts.rounds));
            extra.push(format!(
                "arrival={}",
                if matches!(a, Arrival::Binomial) {
                    "binomial"
                } else {
                    "gaussian"
                }
            ));
            commands::run_montecarlo(&cfg, opts)?
        }
        Command::CirDump => commands::cir_dump(&cfg)?,
    };

    let text = comment_header(cli.command.name(), &cfg, &extra, !cli.no_timestamp) + &body;
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cskct: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
