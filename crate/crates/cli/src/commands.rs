//! Subcommand bodies. Each returns CSV (or text) without the comment header.

use crate::config::Config;
use crate::CliError;
use cskct::montecarlo::SIM_CSV_HEADER;
use cskct::{
    count_threshold_computations, gamma_ratio, montecarlo, network_error_prob, ArrivalModel,
    CsvContext, ModulationDesign, Scheme, Thresholds, TrialConfig,
};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::str::FromStr;

/// Parameters a `ser` sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    TSym,
    YMax,
    DBar,
    Rho,
    M,
    Scheme,
    KMemory,
}

impl SweepParam {
    /// Column name in the output CSV.
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::TSym => "t_sym",
            SweepParam::YMax => "y_max",
            SweepParam::DBar => "d_bar",
            SweepParam::Rho => "rho",
            SweepParam::M => "M",
            SweepParam::Scheme => "scheme",
            SweepParam::KMemory => "k_memory",
        }
    }

    fn config_key(self) -> &'static str {
        match self {
            SweepParam::TSym => "t_sym_s",
            SweepParam::YMax => "y_max_um",
            SweepParam::DBar => "d_bar_um",
            SweepParam::Rho => "rho",
            SweepParam::M => "M",
            SweepParam::Scheme => "scheme",
            SweepParam::KMemory => "k_memory",
        }
    }
}

impl FromStr for SweepParam {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "t_sym" | "t_sym_s" => SweepParam::TSym,
            "y_max" | "y_max_um" => SweepParam::YMax,
            "d_bar" | "d_bar_um" => SweepParam::DBar,
            "rho" => SweepParam::Rho,
            "M" => SweepParam::M,
            "scheme" => SweepParam::Scheme,
            "k_memory" => SweepParam::KMemory,
            _ => {
                return Err(CliError::Config(format!(
                    "cannot sweep '{s}' (choose t_sym, y_max, d_bar, rho, M, scheme, k_memory)"
                )))
            }
        })
    }
}

/// Expands `a,b,start:stop:step,...` into individual values. Range endpoints
/// are inclusive; generated values are rounded to 1e-9 so `1:4:0.04` yields
/// `2.56`, not `2.5600000000000005`.
pub fn parse_values(spec: &str) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [single] => out.push(single.to_string()),
            [start, stop, step] => {
                let num = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|_| CliError::Config(format!("bad range bound '{s}' in '{item}'")))
                };
                let (a, b, h) = (num(start)?, num(stop)?, num(step)?);
                if h.is_nan() || h <= 0.0 || b < a {
                    return Err(CliError::Config(format!(
                        "range '{item}' needs start <= stop and step > 0"
                    )));
                }
                let n = ((b - a) / h + 1e-9).floor() as usize;
                out.extend(
                    (0..=n)
                        .map(|i| ((a + i as f64 * h) * 1e9).round() / 1e9)
                        .map(|v| v.to_string()),
                );
            }
            _ => {
                return Err(CliError::Config(format!(
                    "cannot parse sweep value '{item}'"
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("empty value list".into()));
    }
    Ok(out)
}

fn parse_f64_list(spec: &str) -> Result<Vec<f64>, CliError> {
    parse_values(spec)?
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Config(format!("'{s}' is not a number")))
        })
        .collect()
}

fn parse_usize_list(spec: &str) -> Result<Vec<usize>, CliError> {
    parse_values(spec)?
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Config(format!("'{s}' is not a count")))
        })
        .collect()
}

pub struct DesignReport {
    pub design: ModulationDesign,
    pub text: String,
    pub csv: String,
}

fn fmt_list(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.4}"))
        .collect::<Vec<_>>()
        .join("  ")
}

pub fn design(cfg: &Config) -> Result<DesignReport, CliError> {
    let table = cfg.table()?;
    let d = cfg.design(&table)?;

    let mut text = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(text, "{k:<12}{v}");
    };
    line("scheme", d.scheme.to_string());
    line("M", d.symbols().to_string());
    line("K", table.transmitters().to_string());
    line("d_bar", cfg.effective_d_bar().to_string());
    line("k_memory", d.isi_memory.to_string());
    if let Some(rho) = d.rho {
        line("rho", rho.to_string());
    }
    if let Some(g) = d.gamma {
        line("gamma", format!("{g:.6}"));
    }
    let q: Vec<String> = d
        .concentrations
        .levels()
        .iter()
        .map(u64::to_string)
        .collect();
    line("Q", q.join("  "));
    match &d.thresholds {
        Thresholds::Common(t) => line("tau", fmt_list(t)),
        Thresholds::PerTransmitter(rows) => {
            for (k, row) in rows.iter().enumerate() {
                line(
                    &format!("tau[{k}]"),
                    format!("y={:<6}{}", table.distances()[k], fmt_list(row)),
                );
            }
        }
    }
    if let Some(s) = &d.limits_spacing {
        line("spacing", fmt_list(s));
    }

    let mut csv = String::from("quantity,tx_index,index,value\n");
    if let Some(g) = d.gamma {
        let _ = writeln!(csv, "gamma,,,{g}");
    }
    for (j, q) in d.concentrations.levels().iter().enumerate() {
        let _ = writeln!(csv, "Q,,{j},{q}");
    }
    match &d.thresholds {
        Thresholds::Common(t) => t.iter().enumerate().for_each(|(j, v)| {
            let _ = writeln!(csv, "tau,,{j},{v}");
        }),
        Thresholds::PerTransmitter(rows) => {
            for (k, row) in rows.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let _ = writeln!(csv, "tau,{k},{j},{v}");
                }
            }
        }
    }
    if let Some(s) = &d.limits_spacing {
        for (j, v) in s.iter().enumerate() {
            let _ = writeln!(csv, "spacing,,{j},{v}");
        }
    }
    Ok(DesignReport {
        design: d,
        text,
        csv,
    })
}

pub const GAMMA_CSV_HEADER: &str = "t_sym_s,y_max_um,gamma";

/// Γ on the grid `y_max × t_sym`, grouped by `y_max`.
pub fn gamma_sweep(cfg: &Config, t_syms: &[f64], y_maxes: &[f64]) -> Result<String, CliError> {
    let base = cfg.params()?;
    let points: Vec<(f64, f64)> = y_maxes
        .iter()
        .flat_map(|&y| t_syms.iter().map(move |&t| (t, y)))
        .collect();
    let gammas = points
        .par_iter()
        .map(|&(t, y)| Ok(gamma_ratio(&base.with_symbol_period(t)?, cfg.y_min, y)?))
        .collect::<Result<Vec<f64>, CliError>>()?;
    let mut out = format!("{GAMMA_CSV_HEADER}\n");
    for ((t, y), g) in points.iter().zip(gammas) {
        let _ = writeln!(out, "{t},{y},{g}");
    }
    Ok(out)
}

pub fn gamma_sweep_spec(cfg: &Config, t_syms: &str, y_maxes: &str) -> Result<String, CliError> {
    gamma_sweep(cfg, &parse_f64_list(t_syms)?, &parse_f64_list(y_maxes)?)
}

/// Monte Carlo settings for `ser --montecarlo` and `montecarlo`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    pub rounds: u64,
    pub workers: usize,
    pub arrival: ArrivalModel,
}

/// Result of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: String,
    pub scheme: Scheme,
    pub m: usize,
    pub rho: Option<f64>,
    pub k_memory: Option<usize>,
    /// `ok`, `infeasible` or `error`.
    pub status: &'static str,
    pub p_error: Option<f64>,
    pub montecarlo: Option<montecarlo::Rate>,
}

fn evaluate(
    cfg: &Config,
    mc: Option<McOptions>,
) -> Result<(ModulationDesign, f64, Option<montecarlo::Rate>), CliError> {
    let table = cfg.table()?;
    let design = cfg.design(&table)?;
    let report = network_error_prob(&design, &table)?;
    let rate = match mc {
        Some(o) => {
            let trial = TrialConfig {
                workers: o.workers,
                arrival_model: o.arrival,
                ..TrialConfig::new(o.rounds, cfg.seed)
            };
            Some(montecarlo::run(&design, &table, &trial)?.network())
        }
        None => None,
    };
    Ok((design, report.network, rate))
}

/// Network error probability at each value of `param`. Points are evaluated
/// in parallel and returned in input order; failing points are kept with a
/// status flag instead of aborting the sweep.
pub fn ser_points(
    cfg: &Config,
    param: SweepParam,
    values: &[String],
    mc: Option<McOptions>,
) -> Result<Vec<SweepPoint>, CliError> {
    let configs = values
        .iter()
        .map(|v| {
            let mut c = cfg.clone();
            c.set(param.config_key(), v)?;
            c.warn_out_of_range();
            Ok(c)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(configs
        .par_iter()
        .zip(values)
        .map(|(c, v)| {
            let mut point = SweepPoint {
                value: v.clone(),
                scheme: c.scheme,
                m: c.m,
                rho: (c.scheme == Scheme::CskCt).then_some(c.rho),
                k_memory: c.topology().ok().map(|t| t.isi_memory()),
                status: "ok",
                p_error: None,
                montecarlo: None,
            };
            match evaluate(c, mc) {
                Ok((_, p, rate)) => {
                    point.p_error = Some(p);
                    point.montecarlo = rate;
                }
                Err(e) => {
                    log::warn!("{}={v}: {e}", param.name());
                    point.status = if matches!(e, CliError::Infeasible(_)) {
                        "infeasible"
                    } else {
                        "error"
                    };
                }
            }
            point
        })
        .collect())
}

pub fn ser(
    cfg: &Config,
    param: SweepParam,
    values: &[String],
    mc: Option<McOptions>,
) -> Result<String, CliError> {
    let points = ser_points(cfg, param, values, mc)?;
    let mut out = format!(
        "sweep_{},scheme,M,rho,k_memory,status,p_error",
        param.name()
    );
    if mc.is_some() {
        out += ",ser_mc,ci_lo,ci_hi";
    }
    out.push('\n');
    for p in points {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let _ = write!(
            out,
            "{},{},{},{},{},{},{}",
            p.value,
            p.scheme,
            p.m,
            opt(p.rho.map(|r| r.to_string())),
            opt(p.k_memory.map(|k| k.to_string())),
            p.status,
            opt(p.p_error.map(|e| format!("{e:e}")))
        );
        if mc.is_some() {
            match p.montecarlo {
                Some(r) => {
                    let _ = write!(out, ",{:e},{:e},{:e}", r.value, r.ci_lo, r.ci_hi);
                }
                None => out += ",,,",
            }
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn ser_spec(
    cfg: &Config,
    param: &str,
    values: &str,
    mc: Option<McOptions>,
) -> Result<String, CliError> {
    ser(cfg, param.parse()?, &parse_values(values)?, mc)
}

pub const COMPLEXITY_CSV_HEADER: &str = "K,scheme,M,threshold_count,cir_count";

pub fn complexity(ks: &[usize], ms: &[usize]) -> Result<String, CliError> {
    let mut out = format!("{COMPLEXITY_CSV_HEADER}\n");
    for &k in ks {
        for scheme in [Scheme::CskCt, Scheme::Benchmark] {
            for &m in ms {
                let c = count_threshold_computations(scheme, k, m)?;
                let _ = writeln!(out, "{k},{scheme},{m},{},{}", c.thresholds, c.cirs);
            }
        }
    }
    Ok(out)
}

pub fn complexity_spec(ks: &str, ms: &str) -> Result<String, CliError> {
    complexity(&parse_usize_list(ks)?, &parse_usize_list(ms)?)
}

/// Simulated error rates followed by the analytic rows for the same design.
pub fn run_montecarlo(cfg: &Config, opts: McOptions) -> Result<String, CliError> {
    let table = cfg.table()?;
    let design = cfg.design(&table)?;
    let analytic = network_error_prob(&design, &table)?;
    let trial = TrialConfig {
        workers: opts.workers,
        arrival_model: opts.arrival,
        ..TrialConfig::new(opts.rounds, cfg.seed)
    };
    let sim = montecarlo::run(&design, &table, &trial)?;
    let mut buf = Vec::new();
    let ctx = CsvContext {
        d_bar: cfg.effective_d_bar(),
        t_sym: cfg.t_sym,
    };
    sim.write_csv(&mut buf, ctx, Some(&analytic), true)?;
    debug_assert!(buf.starts_with(SIM_CSV_HEADER.as_bytes()));
    String::from_utf8(buf).map_err(|e| CliError::Numerical(e.to_string()))
}

pub const CIR_CSV_HEADER: &str = "row,tx_index,y_um,period,h";

/// Per-transmitter CIRs, then the distance-averaged ones.
pub fn cir_dump(cfg: &Config) -> Result<String, CliError> {
    let table = cfg.table()?;
    let mut out = format!("{CIR_CSV_HEADER}\n");
    for (k, (row, y)) in table.rows().iter().zip(table.distances()).enumerate() {
        for (i, h) in row.iter().enumerate() {
            let _ = writeln!(out, "tx,{k},{y},{},{h:e}", i + 1);
        }
    }
    for (i, h) in table.averaged().iter().enumerate() {
        let _ = writeln!(out, "averaged,,,{},{h:e}", i + 1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_lists_and_ranges() {
        assert_eq!(parse_values("1,2.5").unwrap(), ["1", "2.5"]);
        let rho = parse_values("1:4:0.04").unwrap();
        assert_eq!(rho.len(), 76);
        assert_eq!(rho[39], "2.56");
        assert_eq!(rho.last().unwrap(), "4");
        assert_eq!(
            parse_values("11.5:13.5:0.5").unwrap(),
            ["11.5", "12", "12.5", "13", "13.5"]
        );
        assert!(parse_values("3:1:1").is_err());
        assert!(parse_values("1:2").is_err());
        assert!(parse_values("").is_err());
    }

    #[test]
    fn gamma_sweep_schema() {
        let csv = gamma_sweep_spec(&Config::default(), "1.28,21.12", "17,21").unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t_sym_s,y_max_um,gamma");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("21.12,17,2.38"));
        assert!(lines[4].starts_with("21.12,21,3.02"));
    }

    #[test]
    fn design_text_and_csv() {
        let mut cfg = Config::default();
        cfg.apply_text("M=4\nd_bar_um=13.5").unwrap();
        let r = design(&cfg).unwrap();
        assert_eq!(r.design.concentrations.levels()[1], 3025);
        assert!(r.text.lines().any(|l| l.starts_with("gamma       3.02")));
        assert!(r
            .csv
            .starts_with("quantity,tx_index,index,value\ngamma,,,3.02"));
        assert_eq!(r.csv.lines().filter(|l| l.starts_with("tau,")).count(), 3);
    }

    #[test]
    fn benchmark_design_emits_matrix() {
        let mut cfg = Config::default();
        cfg.apply_text("scheme=benchmark\nM=4").unwrap();
        let r = design(&cfg).unwrap();
        assert_eq!(
            r.csv.lines().filter(|l| l.starts_with("tau,")).count(),
            12 * 3
        );
        assert!(r.text.contains("tau[11]"));
    }

    #[test]
    fn infeasible_design_reports_exit_3() {
        let mut cfg = Config::default();
        cfg.apply_text("scheme=benchmark\nM=2\nQ=1000,1500")
            .unwrap();
        assert!(design(&cfg).is_ok());
        // y_max close to y_min with a tiny Q0 cannot satisfy the strict ordering
        let mut cfg = Config::default();
        cfg.apply_text("y_max_um=17\nQ0=1\nM=8\nrho=1.0000001")
            .unwrap();
        let err = design(&cfg).err().unwrap();
        assert_eq!(err.exit_code(), 3, "{err}");
    }

    #[test]
    fn ser_keeps_order_and_flags_failures() {
        let mut cfg = Config::default();
        cfg.apply_text("M=2\nrho=1.36").unwrap();
        let csv = ser_spec(&cfg, "d_bar", "11.5,12,5", None).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "sweep_d_bar,scheme,M,rho,k_memory,status,p_error");
        assert!(lines[1].starts_with("11.5,csk-ct,2,1.36,11,ok,"));
        assert!(lines[2].starts_with("12,csk-ct,2,1.36,12,ok,"));
        assert!(
            lines[3].starts_with("5,csk-ct,2,1.36,,error,"),
            "{}",
            lines[3]
        );
        assert!(ser_spec(&cfg, "colour", "1", None).is_err());
        assert!(ser_spec(&cfg, "M", "two", None).is_err());
    }

    #[test]
    fn complexity_rows() {
        let csv = complexity_spec("16", "4").unwrap();
        assert_eq!(
            csv,
            "K,scheme,M,threshold_count,cir_count\n16,csk-ct,4,3,2\n16,benchmark,4,48,16\n"
        );
    }

    #[test]
    fn cir_dump_rows() {
        let csv = cir_dump(&Config::default()).unwrap();
        assert_eq!(csv.lines().next().unwrap(), CIR_CSV_HEADER);
        assert_eq!(
            csv.lines().filter(|l| l.starts_with("tx,")).count(),
            12 * 12
        );
        assert_eq!(
            csv.lines().filter(|l| l.starts_with("averaged,")).count(),
            12
        );
    }

    #[test]
    fn montecarlo_output_is_worker_independent() {
        let mut cfg = Config::default();
        cfg.apply_text("rho=1.12\nk_memory=1\nseed=7").unwrap();
        let one = McOptions {
            rounds: 3000,
            workers: 1,
            arrival: ArrivalModel::Binomial,
        };
        let a = run_montecarlo(&cfg, one).unwrap();
        let b = run_montecarlo(&cfg, McOptions { workers: 4, ..one }).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with(SIM_CSV_HEADER));
        assert!(a.contains(",analytic,,"));
    }
}
