//! Release-concentration and threshold design for CSK-CT and the benchmark
//! per-transmitter CSK.

use crate::channel::{cum_hit, ChannelParams, CirTable, Position};
use crate::error::{domain, Error, Result};
use crate::link::{expected_isi, ConcentrationSet};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// One threshold set per transmitter (geometric mean of its conditional means).
    Benchmark,
    /// One threshold set shared by every transmitter.
    CskCt,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Benchmark => "benchmark",
            Scheme::CskCt => "csk-ct",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "benchmark" | "csk" => Ok(Scheme::Benchmark),
            "csk-ct" | "cskct" | "csk_ct" => Ok(Scheme::CskCt),
            other => Err(Error::Parse(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Thresholds {
    Common(Vec<f64>),
    /// `rows[k][j] = τ_{k,j}`
    PerTransmitter(Vec<Vec<f64>>),
}

impl Thresholds {
    /// The threshold row that applies to transmitter `k`.
    pub fn for_tx(&self, k: usize) -> &[f64] {
        match self {
            Thresholds::Common(t) => t,
            Thresholds::PerTransmitter(rows) => &rows[k],
        }
    }

    /// Total number of stored threshold values.
    pub fn count(&self) -> usize {
        match self {
            Thresholds::Common(t) => t.len(),
            Thresholds::PerTransmitter(rows) => rows.iter().map(Vec::len).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulationDesign {
    pub scheme: Scheme,
    /// Scaling exponent, CSK-CT only.
    pub rho: Option<f64>,
    /// h(y_min,1)/h(y_max,1), CSK-CT only.
    pub gamma: Option<f64>,
    pub concentrations: ConcentrationSet,
    pub thresholds: Thresholds,
    /// CSK-CT only; see [`limits_spacing`].
    pub limits_spacing: Option<Vec<f64>>,
    /// ISI memory the thresholds were designed for.
    pub isi_memory: usize,
}

fn is_unit_rho(rho: f64) -> bool {
    (rho - 1.0).abs() <= 1e-12
}

/// Ratio of the signal CIRs at the two distance limits, `h(y_min,1)/h(y_max,1)`.
pub fn gamma_ratio(params: &ChannelParams, y_min: f64, y_max: f64) -> Result<f64> {
    if !(y_min < y_max) {
        return domain(format!("gamma needs y_min < y_max, got [{y_min}, {y_max}]"));
    }
    let near = cum_hit(params, y_min, params.symbol_period)?;
    let far = cum_hit(params, y_max, params.symbol_period)?;
    if !(far > 0.0) {
        return Err(Error::Numerical(format!(
            "h(y_max = {y_max}, 1) underflowed to zero"
        )));
    }
    Ok(near / far)
}

/// `Q_0 · Γ^(jρ)` before rounding.
pub fn nominal_levels(q0: u64, gamma: f64, rho: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| q0 as f64 * gamma.powf(j as f64 * rho))
        .collect()
}

/// `Q_j = round(Q_0 · Γ^(jρ))`.
pub fn design_concentrations(q0: u64, gamma: f64, rho: f64, m: usize) -> Result<ConcentrationSet> {
    if q0 < 1 {
        return domain("Q_0 must be at least 1");
    }
    if !(gamma > 1.0) || !gamma.is_finite() {
        return domain(format!("gamma must exceed 1, got {gamma}"));
    }
    if !(rho >= 1.0) || !rho.is_finite() {
        return domain(format!("scaling exponent must be >= 1, got {rho}"));
    }
    if m < 2 {
        return domain(format!("need at least two symbols, got M = {m}"));
    }
    let levels = nominal_levels(q0, gamma, rho, m)
        .into_iter()
        .map(|q| {
            if q < u64::MAX as f64 {
                Ok(q.round() as u64)
            } else {
                Err(Error::Numerical(format!(
                    "release concentration {q:e} overflows"
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ConcentrationSet::new(levels)
}

/// Limits of received strength: `lower[j] = E_tot|Q_j,y_min` and
/// `upper[j] = E_tot|Q_{j+1},y_max` for `j = 0..M-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthLimits {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

pub fn strength_limits(cset: &ConcentrationSet, table: &CirTable) -> Result<StrengthLimits> {
    let isi = expected_isi(cset.mean(), table.averaged(), table.isi_memory())?;
    let near = table.signal_cir(Position::Nearest)?;
    let far = table.signal_cir(Position::Farthest)?;
    let q = cset.levels();
    let lower = q[..q.len() - 1]
        .iter()
        .map(|&qj| qj as f64 * near + isi)
        .collect();
    let upper = q[1..].iter().map(|&qj| qj as f64 * far + isi).collect();
    Ok(StrengthLimits { lower, upper })
}

/// Common thresholds: `τ_j = E_tot|Q_{j+1},y_max` for ρ = 1, otherwise the
/// geometric mean of the two limits.
///
/// Limits must be ordered (`lower_j <= upper_j`, strictly for ρ > 1). For
/// ρ = 1 the comparison allows the slack introduced by rounding `Q_j` and
/// `Q_{j+1}` to integers (half a molecule each).
pub fn design_thresholds_cskct(
    cset: &ConcentrationSet,
    rho: f64,
    table: &CirTable,
) -> Result<Vec<f64>> {
    if !(rho >= 1.0) || !rho.is_finite() {
        return domain(format!("scaling exponent must be >= 1, got {rho}"));
    }
    let limits = strength_limits(cset, table)?;
    let unit = is_unit_rho(rho);
    let slack = if unit {
        0.5 * (table.signal_cir(Position::Nearest)? + table.signal_cir(Position::Farthest)?)
    } else {
        0.0
    };
    for (j, (&lo, &hi)) in limits.lower.iter().zip(&limits.upper).enumerate() {
        let ordered = if unit { lo <= hi + slack } else { lo < hi };
        if !ordered {
            return Err(Error::Infeasible {
                index: j,
                lower: lo,
                upper: hi,
            });
        }
    }
    let tau = if unit {
        limits.upper
    } else {
        limits
            .lower
            .iter()
            .zip(&limits.upper)
            .map(|(lo, hi)| (lo * hi).sqrt())
            .collect()
    };
    Ok(tau)
}

/// `τ_{k,j} = sqrt(E_tot|Q_j,y_k · E_tot|Q_{j+1},y_k)` for every transmitter.
pub fn design_thresholds_benchmark(
    cset: &ConcentrationSet,
    table: &CirTable,
) -> Result<Vec<Vec<f64>>> {
    let isi = expected_isi(cset.mean(), table.averaged(), table.isi_memory())?;
    Ok(table
        .rows()
        .iter()
        .map(|row| {
            let h1 = row[0];
            cset.levels()
                .windows(2)
                .map(|w| ((w[0] as f64 * h1 + isi) * (w[1] as f64 * h1 + isi)).sqrt())
                .collect()
        })
        .collect())
}

/// `E_tot|Q_{j+1},y_max - E_tot|Q_j,y_min` for the given level values.
///
/// The ISI term cancels, so only the signal CIRs at the limits matter. The
/// design evaluates it on the pre-rounding levels, where it is exactly zero
/// for ρ = 1.
pub fn limits_spacing(levels: &[f64], table: &CirTable) -> Result<Vec<f64>> {
    let near = table.signal_cir(Position::Nearest)?;
    let far = table.signal_cir(Position::Farthest)?;
    Ok(levels
        .windows(2)
        .map(|w| w[1] * far - w[0] * near)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityCount {
    pub thresholds: usize,
    pub cirs: usize,
}

/// Thresholds and CIRs a receiver must compute for `k` transmitters and `m` symbols.
pub fn count_threshold_computations(scheme: Scheme, k: usize, m: usize) -> Result<ComplexityCount> {
    if k < 1 || m < 2 {
        return domain(format!("need K >= 1 and M >= 2, got K = {k}, M = {m}"));
    }
    Ok(match scheme {
        Scheme::CskCt => ComplexityCount {
            thresholds: m - 1,
            cirs: 2,
        },
        Scheme::Benchmark => ComplexityCount {
            thresholds: k * (m - 1),
            cirs: k,
        },
    })
}

impl ModulationDesign {
    /// Full CSK-CT design over the table's topology.
    pub fn csk_ct(table: &CirTable, q0: u64, rho: f64, m: usize) -> Result<Self> {
        if table.y_min() == table.y_max() {
            return domain("CSK-CT needs y_min < y_max (gamma is 1 on a point topology)");
        }
        let near = table.signal_cir(Position::Nearest)?;
        let far = table.signal_cir(Position::Farthest)?;
        if !(far > 0.0) {
            return Err(Error::Numerical("h(y_max, 1) underflowed to zero".into()));
        }
        let gamma = near / far;
        let concentrations = design_concentrations(q0, gamma, rho, m)?;
        let tau = design_thresholds_cskct(&concentrations, rho, table)?;
        let spacing = limits_spacing(&nominal_levels(q0, gamma, rho, m), table)?;
        Ok(Self {
            scheme: Scheme::CskCt,
            rho: Some(rho),
            gamma: Some(gamma),
            concentrations,
            thresholds: Thresholds::Common(tau),
            limits_spacing: Some(spacing),
            isi_memory: table.isi_memory(),
        })
    }

    /// Benchmark design with externally chosen concentrations.
    pub fn benchmark(table: &CirTable, concentrations: ConcentrationSet) -> Result<Self> {
        let rows = design_thresholds_benchmark(&concentrations, table)?;
        Ok(Self {
            scheme: Scheme::Benchmark,
            rho: None,
            gamma: None,
            concentrations,
            thresholds: Thresholds::PerTransmitter(rows),
            limits_spacing: None,
            isi_memory: table.isi_memory(),
        })
    }

    pub fn symbols(&self) -> usize {
        self.concentrations.len()
    }

    pub fn thresholds_for(&self, k: usize) -> &[f64] {
        self.thresholds.for_tx(k)
    }

    /// Flat `key=value` text, one entry per line.
    pub fn to_kv(&self) -> String {
        fn join<T: ToString>(v: &[T]) -> String {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        }
        let mut out = format!("scheme={}\nM={}\n", self.scheme, self.symbols());
        if let Some(rho) = self.rho {
            out += &format!("rho={rho}\n");
        }
        if let Some(gamma) = self.gamma {
            out += &format!("gamma={gamma}\n");
        }
        out += &format!("isi_memory={}\n", self.isi_memory);
        out += &format!("Q={}\n", join(self.concentrations.levels()));
        match &self.thresholds {
            Thresholds::Common(t) => out += &format!("tau={}\n", join(t)),
            Thresholds::PerTransmitter(rows) => {
                for (k, row) in rows.iter().enumerate() {
                    out += &format!("tau[{k}]={}\n", join(row));
                }
            }
        }
        if let Some(s) = &self.limits_spacing {
            out += &format!("spacing={}\n", join(s));
        }
        out
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
            v.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<T>()
                        .map_err(|_| Error::Parse(format!("bad value '{s}' for {key}")))
                })
                .collect()
        }
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.trim()
                .parse::<T>()
                .map_err(|_| Error::Parse(format!("bad value '{v}' for {key}")))
        }

        let mut scheme = None;
        let mut m: Option<usize> = None;
        let mut rho = None;
        let mut gamma = None;
        let mut isi_memory = 0;
        let mut levels: Option<Vec<u64>> = None;
        let mut common: Option<Vec<f64>> = None;
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
        let mut spacing = None;

        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
        {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got '{line}'")))?;
            let key = key.trim();
            match key {
                "scheme" => scheme = Some(value.parse::<Scheme>()?),
                "M" => m = Some(num(key, value)?),
                "rho" => rho = Some(num(key, value)?),
                "gamma" => gamma = Some(num(key, value)?),
                "isi_memory" => isi_memory = num(key, value)?,
                "Q" => levels = Some(list(key, value)?),
                "tau" => common = Some(list(key, value)?),
                "spacing" => spacing = Some(list(key, value)?),
                k if k.starts_with("tau[") && k.ends_with(']') => {
                    let idx = num("tau index", &k[4..k.len() - 1])?;
                    rows.push((idx, list(key, value)?));
                }
                other => return Err(Error::Parse(format!("unknown key '{other}'"))),
            }
        }

        let scheme = scheme.ok_or_else(|| Error::Parse("missing scheme".into()))?;
        let concentrations =
            ConcentrationSet::new(levels.ok_or_else(|| Error::Parse("missing Q".into()))?)?;
        if let Some(m) = m {
            if m != concentrations.len() {
                return Err(Error::Parse(format!(
                    "M = {m} but {} levels given",
                    concentrations.len()
                )));
            }
        }
        let thresholds = match scheme {
            Scheme::CskCt => {
                Thresholds::Common(common.ok_or_else(|| Error::Parse("missing tau".into()))?)
            }
            Scheme::Benchmark => {
                rows.sort_by_key(|r| r.0);
                if rows.iter().enumerate().any(|(i, r)| r.0 != i) || rows.is_empty() {
                    return Err(Error::Parse("tau[k] rows must be numbered 0..K".into()));
                }
                Thresholds::PerTransmitter(rows.into_iter().map(|r| r.1).collect())
            }
        };
        let expected = concentrations.len() - 1;
        let row_ok = |t: &[f64]| t.len() == expected && t.windows(2).all(|w| w[0] < w[1]);
        let valid = match &thresholds {
            Thresholds::Common(t) => row_ok(t),
            Thresholds::PerTransmitter(rows) => rows.iter().all(|r| row_ok(r)),
        };
        if !valid {
            return Err(Error::Parse(format!(
                "thresholds must be {expected} strictly increasing values"
            )));
        }
        Ok(Self {
            scheme,
            rho,
            gamma,
            concentrations,
            thresholds,
            limits_spacing: spacing,
            isi_memory,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Topology;
    use crate::link::conditional_moments;
    use proptest::prelude::*;

    fn table(y_max: f64) -> CirTable {
        let topo = Topology::uniform(6.0, y_max, 1.0).unwrap();
        CirTable::build(&ChannelParams::reference(), &topo).unwrap()
    }

    #[test]
    fn gamma_matches_reported_values() {
        let p = ChannelParams::reference();
        assert!((gamma_ratio(&p, 6.0, 17.0).unwrap() - 2.386).abs() < 0.005);
        assert!((gamma_ratio(&p, 6.0, 21.0).unwrap() - 3.025).abs() < 0.005);
        // mpmath
        assert!((gamma_ratio(&p, 6.0, 17.0).unwrap() - 2.3858476011669575553).abs() < 1e-12);
        assert!(gamma_ratio(&p, 6.0, 6.0).is_err());
        assert!(gamma_ratio(&p, 7.0, 6.0).is_err());
    }

    #[test]
    fn concentrations_follow_powers() {
        let c = design_concentrations(1, 2.0, 1.0, 3).unwrap();
        assert_eq!(c.levels(), &[1, 2, 4]);
        let c = design_concentrations(1000, 2.386, 1.0, 4).unwrap();
        assert_eq!(c.levels(), &[1000, 2386, 5693, 13583]);
        let c = design_concentrations(1000, 2.386, 1.24, 2).unwrap();
        assert_eq!(c.levels(), &[1000, 2940]);
    }

    #[test]
    fn concentrations_reject_bad_input() {
        assert!(design_concentrations(1000, 2.0, 0.99, 2).is_err());
        assert!(design_concentrations(1000, 1.0, 1.0, 2).is_err());
        assert!(design_concentrations(0, 2.0, 1.0, 2).is_err());
        assert!(design_concentrations(1000, 2.0, 1.0, 1).is_err());
        // rounding collapses adjacent levels
        assert!(design_concentrations(1, 1.1, 1.0, 3).is_err());
        assert!(matches!(
            design_concentrations(1000, 1e6, 4.0, 8),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn unit_rho_thresholds_sit_on_upper_limit() {
        let t = table(17.0);
        let d = ModulationDesign::csk_ct(&t, 1000, 1.0, 4).unwrap();
        let limits = strength_limits(&d.concentrations, &t).unwrap();
        assert_eq!(d.thresholds.for_tx(0), limits.upper.as_slice());
        for s in d.limits_spacing.as_ref().unwrap() {
            assert!(s.abs() < 1e-9);
        }
    }

    #[test]
    fn geometric_branch_collapses_when_limits_meet() {
        // with lower == upper the geometric mean is the common value
        let t = table(17.0);
        let d = ModulationDesign::csk_ct(&t, 1000, 1.0, 4).unwrap();
        let limits = strength_limits(&d.concentrations, &t).unwrap();
        for &hi in &limits.upper {
            let g = (hi * hi).sqrt();
            assert!((g - hi).abs() <= 1e-12 * hi);
        }
    }

    #[test]
    fn scaled_design_opens_spacing() {
        let t = table(19.0);
        let d = ModulationDesign::csk_ct(&t, 1000, 1.12, 4).unwrap();
        let s = d.limits_spacing.unwrap();
        assert!(s.iter().all(|&x| x > 0.0));
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        let limits = strength_limits(&d.concentrations, &t).unwrap();
        if let Thresholds::Common(tau) = &d.thresholds {
            for ((lo, t), hi) in limits.lower.iter().zip(tau).zip(&limits.upper) {
                assert!(lo < t && t < hi);
            }
        } else {
            panic!("csk-ct design must carry common thresholds");
        }
    }

    #[test]
    fn spacing_grows_with_mean_distance() {
        let near = ModulationDesign::csk_ct(&table(17.0), 1000, 1.12, 4).unwrap();
        let far = ModulationDesign::csk_ct(&table(20.0), 1000, 1.12, 4).unwrap();
        for (a, b) in near
            .limits_spacing
            .unwrap()
            .iter()
            .zip(far.limits_spacing.unwrap())
        {
            assert!(b > *a);
        }
    }

    #[test]
    fn infeasible_design_names_index() {
        let t = table(17.0);
        let cset = ConcentrationSet::new(vec![1000, 1500, 2000]).unwrap();
        match design_thresholds_cskct(&cset, 1.2, &t) {
            Err(Error::Infeasible { index, .. }) => assert_eq!(index, 0),
            other => panic!("expected infeasible, got {other:?}"),
        }
        assert!(design_thresholds_cskct(&cset, 0.5, &t).is_err());
    }

    #[test]
    fn benchmark_thresholds_bracketed_and_ordered() {
        let t = table(17.0);
        let cset = ConcentrationSet::new(vec![1000, 1500]).unwrap();
        let d = ModulationDesign::benchmark(&t, cset.clone()).unwrap();
        let Thresholds::PerTransmitter(rows) = &d.thresholds else {
            panic!()
        };
        assert_eq!(rows.len(), 12);
        for (k, row) in rows.iter().enumerate() {
            let lo = conditional_moments(1000, Position::Tx(k), &cset, &t)
                .unwrap()
                .mean();
            let hi = conditional_moments(1500, Position::Tx(k), &cset, &t)
                .unwrap()
                .mean();
            assert!(lo < row[0] && row[0] < hi);
        }
        for w in rows.windows(2) {
            assert!(w[1][0] < w[0][0]);
        }

        let cset4 = ConcentrationSet::new(vec![1000, 1500, 2000, 3000]).unwrap();
        let d = ModulationDesign::benchmark(&t, cset4).unwrap();
        for k in 0..12 {
            assert!(d.thresholds_for(k).windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn benchmark_without_isi_is_scaled_geometric_mean() {
        let topo = Topology::uniform(6.0, 17.0, 1.0)
            .unwrap()
            .with_isi_memory(0)
            .unwrap();
        let t = CirTable::build(&ChannelParams::reference(), &topo).unwrap();
        let cset = ConcentrationSet::new(vec![250, 1000]).unwrap();
        let rows = design_thresholds_benchmark(&cset, &t).unwrap();
        for (k, row) in rows.iter().enumerate() {
            let want = 2.0 * 250.0 * t.per_tx(k)[0];
            assert!((row[0] - want).abs() < 1e-9 * want);
        }
    }

    #[test]
    fn complexity_counts() {
        assert_eq!(
            count_threshold_computations(Scheme::CskCt, 100, 2)
                .unwrap()
                .thresholds,
            1
        );
        assert_eq!(
            count_threshold_computations(Scheme::CskCt, 100, 4)
                .unwrap()
                .thresholds,
            3
        );
        assert_eq!(
            count_threshold_computations(Scheme::Benchmark, 10, 4)
                .unwrap()
                .thresholds,
            30
        );
        let c = count_threshold_computations(Scheme::Benchmark, 16, 4).unwrap();
        assert_eq!((c.thresholds, c.cirs), (48, 16));
        assert!(count_threshold_computations(Scheme::CskCt, 0, 4).is_err());
        assert!(count_threshold_computations(Scheme::CskCt, 4, 1).is_err());
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("csk-ct".parse::<Scheme>().unwrap(), Scheme::CskCt);
        assert_eq!("Benchmark".parse::<Scheme>().unwrap(), Scheme::Benchmark);
        assert!("qam".parse::<Scheme>().is_err());
        assert_eq!(Scheme::CskCt.to_string(), "csk-ct");
    }

    #[test]
    fn kv_round_trip_both_schemes() {
        let t = table(17.0);
        let d = ModulationDesign::csk_ct(&t, 1000, 1.24, 4).unwrap();
        assert_eq!(ModulationDesign::from_kv(&d.to_kv()).unwrap(), d);
        let b = ModulationDesign::benchmark(&t, ConcentrationSet::new(vec![1000, 1500]).unwrap())
            .unwrap();
        assert_eq!(ModulationDesign::from_kv(&b.to_kv()).unwrap(), b);
    }

    #[test]
    fn kv_rejects_malformed() {
        assert!(ModulationDesign::from_kv("scheme=csk-ct\nQ=1,2\n").is_err());
        assert!(ModulationDesign::from_kv("scheme=csk-ct\nQ=1,2\ntau=3,4\n").is_err());
        assert!(ModulationDesign::from_kv("scheme=benchmark\nQ=1,2\ntau[1]=3\n").is_err());
        assert!(ModulationDesign::from_kv("scheme=csk-ct\nQ=1,2\ntau=3\nbogus=1\n").is_err());
        assert!(ModulationDesign::from_kv("scheme=csk-ct\nM=3\nQ=1,2\ntau=3\n").is_err());
        assert!(ModulationDesign::from_kv("no equals sign").is_err());
    }

    proptest! {
        #[test]
        fn kv_round_trip(rho in 1.0f64..3.0, m in 2usize..6, gamma in 1.5f64..4.0) {
            let cset = design_concentrations(1000, gamma, rho, m).unwrap();
            let tau: Vec<f64> = cset.levels().windows(2).map(|w| ((w[0] * w[1]) as f64).sqrt() * 0.3).collect();
            let d = ModulationDesign {
                scheme: Scheme::CskCt,
                rho: Some(rho),
                gamma: Some(gamma),
                concentrations: cset,
                thresholds: Thresholds::Common(tau),
                limits_spacing: Some(vec![rho * 0.1; m - 1]),
                isi_memory: 7,
            };
            prop_assert_eq!(ModulationDesign::from_kv(&d.to_kv()).unwrap(), d);
        }

        #[test]
        fn rounded_ratios_stay_close(rho in 1.0f64..1.5, gamma in 2.0f64..3.1) {
            let c = design_concentrations(1000, gamma, rho, 4).unwrap();
            let target = gamma.powf(rho);
            for w in c.levels().windows(2) {
                let ratio = w[1] as f64 / w[0] as f64;
                prop_assert!((ratio / target - 1.0).abs() < 1e-3);
            }
        }
    }
}
