//! Flat `key=value` run configuration.

use crate::CliError;
use cskct::{ChannelParams, CirTable, ConcentrationSet, ModulationDesign, Scheme, Topology};
use std::fmt::Write as _;
use std::path::Path;

/// Keys accepted in config files and `--set` overrides.
pub const KEYS: &[&str] = &[
    "D_um2_per_s",
    "r_um",
    "t_sym_s",
    "dt_s",
    "y_min_um",
    "y_max_um",
    "d_bar_um",
    "K",
    "rho",
    "Q0",
    "Q",
    "M",
    "scheme",
    "k_memory",
    "seed",
    "rounds",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub diffusion: f64,
    pub radius: f64,
    pub t_sym: f64,
    pub dt: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// When set, overrides `y_max` with `2·d_bar − y_min` and `K` with the 1 µm grid count.
    pub d_bar: Option<f64>,
    /// Transmitter count; `None` places one transmitter per micrometre.
    pub k: Option<usize>,
    pub rho: f64,
    pub q0: u64,
    /// Benchmark release concentrations; defaults depend on `M`.
    pub q_levels: Option<Vec<u64>>,
    pub m: usize,
    pub scheme: Scheme,
    /// `None` is full memory, `K − 1`.
    pub k_memory: Option<usize>,
    pub seed: u64,
    pub rounds: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            diffusion: 79.4,
            radius: 5.0,
            t_sym: 21.12,
            dt: 0.32,
            y_min: 6.0,
            y_max: 17.0,
            d_bar: None,
            k: None,
            rho: 1.0,
            q0: 1000,
            q_levels: None,
            m: 2,
            scheme: Scheme::CskCt,
            k_memory: None,
            seed: 1,
            rounds: 100_000,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value '{value}' for {key}")))
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.apply_pair(line)
                .map_err(|e| CliError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got '{pair}'")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "D_um2_per_s" => self.diffusion = parse(key, value)?,
            "r_um" => self.radius = parse(key, value)?,
            "t_sym_s" | "t_sym" => self.t_sym = parse(key, value)?,
            "dt_s" => self.dt = parse(key, value)?,
            "y_min_um" | "y_min" => self.y_min = parse(key, value)?,
            "y_max_um" | "y_max" => {
                self.y_max = parse(key, value)?;
                self.d_bar = None;
            }
            "d_bar_um" | "d_bar" => {
                self.d_bar = Some(parse(key, value)?);
                self.k = None;
            }
            "K" => self.k = Some(parse(key, value)?),
            "rho" => self.rho = parse(key, value)?,
            "Q0" => self.q0 = parse(key, value)?,
            "Q" => {
                let levels = value
                    .split(',')
                    .map(|s| parse(key, s.trim()))
                    .collect::<Result<Vec<u64>, _>>()?;
                self.q_levels = Some(levels);
            }
            "M" => self.m = parse(key, value)?,
            "scheme" => {
                self.scheme = value
                    .parse()
                    .map_err(|e: cskct::Error| CliError::Config(e.to_string()))?
            }
            "k_memory" => {
                self.k_memory = if value == "full" {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "seed" => self.seed = parse(key, value)?,
            "rounds" => self.rounds = parse(key, value)?,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown key '{key}' (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn effective_y_max(&self) -> f64 {
        self.d_bar.map_or(self.y_max, |d| 2.0 * d - self.y_min)
    }

    pub fn effective_d_bar(&self) -> f64 {
        0.5 * (self.y_min + self.effective_y_max())
    }

    pub fn params(&self) -> Result<ChannelParams, CliError> {
        Ok(ChannelParams::new(
            self.diffusion,
            self.radius,
            self.t_sym,
            self.dt,
        )?)
    }

    pub fn topology(&self) -> Result<Topology, CliError> {
        let y_max = self.effective_y_max();
        let topo = match self.k {
            _ if self.y_min == y_max => Topology::point(self.y_min, self.k.unwrap_or(1))?,
            Some(k) => Topology::evenly_spaced(self.y_min, y_max, k)?,
            None => Topology::uniform(self.y_min, y_max, 1.0)?,
        };
        Ok(match self.k_memory {
            Some(mem) => topo.with_isi_memory(mem)?,
            None => topo,
        })
    }

    pub fn table(&self) -> Result<CirTable, CliError> {
        Ok(CirTable::build(&self.params()?, &self.topology()?)?)
    }

    /// Concentrations for the benchmark scheme: the `Q` key, or the defaults
    /// for `M = 2` and `M = 4`.
    pub fn benchmark_levels(&self) -> Result<ConcentrationSet, CliError> {
        let levels = match (&self.q_levels, self.m) {
            (Some(q), m) if q.len() == m => q.clone(),
            (Some(q), m) => {
                return Err(CliError::Config(format!(
                    "Q lists {} levels but M = {m}",
                    q.len()
                )));
            }
            (None, 2) => vec![1000, 1500],
            (None, 4) => vec![1000, 1500, 2000, 3000],
            (None, m) => {
                return Err(CliError::Config(format!(
                    "benchmark with M = {m} needs an explicit Q list"
                )))
            }
        };
        Ok(ConcentrationSet::new(levels)?)
    }

    pub fn design(&self, table: &CirTable) -> Result<ModulationDesign, CliError> {
        Ok(match self.scheme {
            Scheme::CskCt => ModulationDesign::csk_ct(table, self.q0, self.rho, self.m)?,
            Scheme::Benchmark => ModulationDesign::benchmark(table, self.benchmark_levels()?)?,
        })
    }

    /// Logs a warning for every value outside the ranges of the reference study.
    pub fn warn_out_of_range(&self) {
        let check = |name: &str, v: f64, lo: f64, hi: f64| {
            if v < lo || v > hi {
                log::warn!("{name} = {v} is outside the studied range [{lo}, {hi}]");
            }
        };
        check("t_sym_s", self.t_sym, 1.28, 32.0);
        check("y_max_um", self.effective_y_max(), 17.0, 21.0);
        check("d_bar_um", self.effective_d_bar(), 11.5, 13.5);
        check("rho", self.rho, 1.0, 4.0);
        if let Some(k) = self.k {
            check("K", k as f64, 12.0, 16.0);
        }
    }

    /// Every effective parameter as `# key=value` lines.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let topo = self.topology().ok();
        let k = topo
            .as_ref()
            .map(|t| t.len().to_string())
            .unwrap_or_default();
        let k_memory = topo
            .as_ref()
            .map(|t| t.isi_memory().to_string())
            .unwrap_or_default();
        let q = self.q_levels.as_deref().map(join).unwrap_or_default();
        let fields: [(&str, String); 16] = [
            ("D_um2_per_s", self.diffusion.to_string()),
            ("r_um", self.radius.to_string()),
            ("t_sym_s", self.t_sym.to_string()),
            ("dt_s", self.dt.to_string()),
            ("y_min_um", self.y_min.to_string()),
            ("y_max_um", self.effective_y_max().to_string()),
            ("d_bar_um", self.effective_d_bar().to_string()),
            ("K", k),
            ("rho", self.rho.to_string()),
            ("Q0", self.q0.to_string()),
            ("Q", q),
            ("M", self.m.to_string()),
            ("scheme", self.scheme.to_string()),
            ("k_memory", k_memory),
            ("seed", self.seed.to_string()),
            ("rounds", self.rounds.to_string()),
        ];
        for (key, value) in fields {
            let _ = writeln!(out, "# {key}={value}");
        }
        out
    }
}
