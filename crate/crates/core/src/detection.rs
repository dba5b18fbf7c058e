//! Threshold detection and Gaussian-tail symbol error probabilities.

use crate::channel::{CirTable, Position};
use crate::error::{domain, Error, Result};
use crate::link::conditional_moments;
use crate::modulation::{ModulationDesign, Scheme};
use crate::numeric::{lower_tail, upper_tail};
use std::io::{self, Write};

/// Maps an observed count to a symbol index. A count equal to a threshold
/// belongs to the upper region.
pub fn decode(observed: f64, thresholds: &[f64]) -> Result<usize> {
    if thresholds.is_empty() {
        return domain("decoding needs at least one threshold");
    }
    Ok(decode_unchecked(observed, thresholds))
}

#[inline]
pub(crate) fn decode_unchecked(observed: f64, thresholds: &[f64]) -> usize {
    thresholds.partition_point(|&t| t <= observed)
}

/// Probability that symbol `j` is mis-detected when the received count is
/// `N(mean, sd^2)`, given the thresholds that apply to its transmitter.
pub fn symbol_error_prob(j: usize, thresholds: &[f64], mean: f64, sd: f64) -> Result<f64> {
    let m = thresholds.len() + 1;
    if thresholds.is_empty() || j >= m {
        return domain(format!(
            "symbol {j} out of range for {} thresholds",
            thresholds.len()
        ));
    }
    let mut p = 0.0;
    if j > 0 {
        p += lower_tail(thresholds[j - 1], mean, sd);
    }
    if j < m - 1 {
        p += upper_tail(thresholds[j], mean, sd);
    }
    Ok(p.min(1.0))
}

/// Per-symbol, per-transmitter and network error probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub scheme: Scheme,
    pub rho: Option<f64>,
    pub isi_memory: usize,
    /// `per_symbol[k][j] = P_e,k(S_j)`
    pub per_symbol: Vec<Vec<f64>>,
    pub per_tx: Vec<f64>,
    pub network: f64,
}

impl ErrorReport {
    pub fn symbols(&self) -> usize {
        self.per_symbol.first().map_or(0, Vec::len)
    }
}

/// Analytic error probabilities of `design` over the transmitters in `table`.
pub fn network_error_prob(design: &ModulationDesign, table: &CirTable) -> Result<ErrorReport> {
    let k_count = table.transmitters();
    if let crate::modulation::Thresholds::PerTransmitter(rows) = &design.thresholds {
        if rows.len() != k_count {
            return Err(Error::Dimension(format!(
                "design has {} threshold rows for {k_count} transmitters",
                rows.len()
            )));
        }
    }
    if design.isi_memory != table.isi_memory() {
        return Err(Error::Dimension(format!(
            "design assumes ISI memory {}, table has {}",
            design.isi_memory,
            table.isi_memory()
        )));
    }
    let cset = &design.concentrations;
    let m = cset.len();
    let per_symbol = (0..k_count)
        .map(|k| {
            let tau = design.thresholds_for(k);
            cset.levels()
                .iter()
                .enumerate()
                .map(|(j, &q)| {
                    let mom = conditional_moments(q, Position::Tx(k), cset, table)?;
                    symbol_error_prob(j, tau, mom.mean(), mom.sd())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let per_tx: Vec<f64> = per_symbol
        .iter()
        .map(|row| row.iter().sum::<f64>() / m as f64)
        .collect();
    let network = per_tx.iter().sum::<f64>() / k_count as f64;
    Ok(ErrorReport {
        scheme: design.scheme,
        rho: design.rho,
        isi_memory: design.isi_memory,
        per_symbol,
        per_tx,
        network,
    })
}

/// Sweep coordinates written alongside every CSV row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvContext {
    pub d_bar: f64,
    pub t_sym: f64,
}

pub const REPORT_CSV_HEADER: &str = "scheme,M,rho,d_bar,t_sym,k_memory,tx_index,symbol,p_error";

pub(crate) fn fmt_rho(rho: Option<f64>) -> String {
    rho.map_or_else(String::new, |r| r.to_string())
}

impl ErrorReport {
    /// One row per (transmitter, symbol), then one per transmitter with
    /// `symbol=all`, then the network row with `tx_index=all`.
    pub fn write_csv<W: Write>(&self, mut w: W, ctx: CsvContext, header: bool) -> io::Result<()> {
        if header {
            writeln!(w, "{REPORT_CSV_HEADER}")?;
        }
        let prefix = format!(
            "{},{},{},{},{},{}",
            self.scheme,
            self.symbols(),
            fmt_rho(self.rho),
            ctx.d_bar,
            ctx.t_sym,
            self.isi_memory
        );
        for (k, row) in self.per_symbol.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                writeln!(w, "{prefix},{k},{j},{p:e}")?;
            }
        }
        for (k, p) in self.per_tx.iter().enumerate() {
            writeln!(w, "{prefix},{k},all,{p:e}")?;
        }
        writeln!(w, "{prefix},all,all,{:e}", self.network)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelParams, Topology};
    use crate::link::ConcentrationSet;
    use proptest::prelude::*;

    #[test]
    fn decode_regions() {
        let tau = [10.0, 20.0, 30.0];
        assert_eq!(decode(0.0, &tau).unwrap(), 0);
        assert_eq!(decode(9.999, &tau).unwrap(), 0);
        assert_eq!(decode(10.0, &tau).unwrap(), 1);
        assert_eq!(decode(25.0, &tau).unwrap(), 2);
        assert_eq!(decode(30.0, &tau).unwrap(), 3);
        assert_eq!(decode(1e9, &tau).unwrap(), 3);
        assert!(decode(1.0, &[]).is_err());
    }

    #[test]
    fn symbol_error_edges() {
        let tau = [100.0];
        assert_eq!(symbol_error_prob(0, &tau, 100.0, 5.0).unwrap(), 0.5);
        assert!(symbol_error_prob(0, &tau, 40.0, 5.0).unwrap() < 1e-20);
        assert!(symbol_error_prob(1, &tau, 160.0, 5.0).unwrap() < 1e-20);
        assert!(symbol_error_prob(2, &tau, 160.0, 5.0).is_err());
        assert_eq!(symbol_error_prob(0, &tau, 90.0, 0.0).unwrap(), 0.0);
        assert_eq!(symbol_error_prob(0, &tau, 110.0, 0.0).unwrap(), 1.0);
        assert_eq!(symbol_error_prob(1, &tau, 100.0, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn middle_symbol_has_two_tails() {
        // equally spaced symmetric case
        let tau = [10.0, 20.0, 30.0];
        let sd = 3.0;
        let edge0 = symbol_error_prob(0, &tau, 5.0, sd).unwrap();
        let mid = symbol_error_prob(1, &tau, 15.0, sd).unwrap();
        let mid2 = symbol_error_prob(2, &tau, 25.0, sd).unwrap();
        let edge3 = symbol_error_prob(3, &tau, 35.0, sd).unwrap();
        assert!(mid >= edge0 && mid >= edge3);
        assert!((mid - 2.0 * edge0).abs() < 1e-15);
        assert!((mid - mid2).abs() < 1e-15);
    }

    fn reference_table() -> CirTable {
        CirTable::build(
            &ChannelParams::reference(),
            &Topology::uniform(6.0, 17.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn report_identities() {
        let t = reference_table();
        let d = ModulationDesign::csk_ct(&t, 1000, 1.24, 4).unwrap();
        let r = network_error_prob(&d, &t).unwrap();
        assert_eq!(r.per_symbol.len(), 12);
        for (row, ptx) in r.per_symbol.iter().zip(&r.per_tx) {
            assert!(row.iter().all(|p| (0.0..=1.0).contains(p)));
            assert!((row.iter().sum::<f64>() / 4.0 - ptx).abs() < 1e-18);
        }
        assert!((r.per_tx.iter().sum::<f64>() / 12.0 - r.network).abs() < 1e-18);
    }

    #[test]
    fn single_transmitter_network_is_its_own_error() {
        let topo = Topology::point(8.0, 1).unwrap();
        let t = CirTable::build(&ChannelParams::reference(), &topo).unwrap();
        let d = ModulationDesign::benchmark(&t, ConcentrationSet::new(vec![100, 300]).unwrap())
            .unwrap();
        let r = network_error_prob(&d, &t).unwrap();
        assert_eq!(r.network, r.per_tx[0]);
    }

    #[test]
    fn identical_distances_give_identical_errors() {
        let topo = Topology::point(9.0, 2).unwrap();
        let t = CirTable::build(&ChannelParams::reference(), &topo).unwrap();
        let d = ModulationDesign::benchmark(&t, ConcentrationSet::new(vec![100, 300]).unwrap())
            .unwrap();
        let r = network_error_prob(&d, &t).unwrap();
        assert_eq!(r.per_tx[0], r.per_tx[1]);
    }

    #[test]
    fn top_symbol_error_improves_toward_y_min() {
        let t = reference_table();
        let d = ModulationDesign::csk_ct(&t, 1000, 1.24, 4).unwrap();
        let r = network_error_prob(&d, &t).unwrap();
        let top: Vec<f64> = r.per_symbol.iter().map(|row| row[3]).collect();
        for w in top.windows(2) {
            assert!(w[0] <= w[1], "{top:?}");
        }
        assert!(top[0] < top[11]);
    }

    #[test]
    fn mismatched_design_rejected() {
        let t = reference_table();
        let d = ModulationDesign::csk_ct(&t, 1000, 1.24, 2).unwrap();
        let t0 = CirTable::build(
            &ChannelParams::reference(),
            &Topology::uniform(6.0, 17.0, 1.0)
                .unwrap()
                .with_isi_memory(0)
                .unwrap(),
        )
        .unwrap();
        assert!(network_error_prob(&d, &t0).is_err());
    }

    #[test]
    fn csv_layout() {
        let t = reference_table();
        let d = ModulationDesign::csk_ct(&t, 1000, 1.24, 2).unwrap();
        let r = network_error_prob(&d, &t).unwrap();
        let mut buf = Vec::new();
        r.write_csv(
            &mut buf,
            CsvContext {
                d_bar: 11.5,
                t_sym: 21.12,
            },
            true,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], REPORT_CSV_HEADER);
        assert_eq!(lines.len(), 1 + 12 * 2 + 12 + 1);
        assert!(lines[1].starts_with("csk-ct,2,1.24,11.5,21.12,11,0,0,"));
        assert!(lines
            .last()
            .unwrap()
            .starts_with("csk-ct,2,1.24,11.5,21.12,11,all,all,"));
    }

    proptest! {
        #[test]
        fn error_is_shift_invariant(shift in -1e4f64..1e4, mean in 50.0f64..150.0, sd in 1.0f64..30.0) {
            let tau = [80.0, 120.0];
            for j in 0..3 {
                let a = symbol_error_prob(j, &tau, mean, sd).unwrap();
                let shifted = [tau[0] + shift, tau[1] + shift];
                let b = symbol_error_prob(j, &shifted, mean + shift, sd).unwrap();
                prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-300) + 1e-15);
            }
        }

        #[test]
        fn decode_is_monotone(a in -10.0f64..100.0, b in -10.0f64..100.0) {
            let tau = [0.0, 25.0, 50.0, 75.0];
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(decode(lo, &tau).unwrap() <= decode(hi, &tau).unwrap());
        }
    }
}
