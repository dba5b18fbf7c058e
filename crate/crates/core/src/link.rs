//! Received signal strength, ISI and the Gaussian moments used for detection.

use crate::channel::{CirTable, Position};
use crate::error::{domain, Error, Result};

/// Release concentrations `Q_0 < Q_1 < ... < Q_{M-1}`, equiprobable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcentrationSet {
    levels: Vec<u64>,
}

impl ConcentrationSet {
    pub fn new(levels: Vec<u64>) -> Result<Self> {
        if levels.len() < 2 {
            return domain(format!(
                "need at least two concentration levels, got {}",
                levels.len()
            ));
        }
        if let Some(w) = levels.windows(2).find(|w| w[0] >= w[1]) {
            return domain(format!(
                "concentrations must be strictly increasing ({} >= {})",
                w[0], w[1]
            ));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[u64] {
        &self.levels
    }

    /// Number of symbols, M.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Arithmetic mean of the levels, Q̄.
    pub fn mean(&self) -> f64 {
        self.levels.iter().map(|&q| q as f64).sum::<f64>() / self.levels.len() as f64
    }

    /// `log2 M` when M is a power of two.
    pub fn bits_per_symbol(&self) -> Option<u32> {
        let m = self.levels.len();
        m.is_power_of_two().then(|| m.trailing_zeros())
    }

    pub fn index_of(&self, q: u64) -> Option<usize> {
        self.levels.binary_search(&q).ok()
    }
}

/// Mean and variance of the received count, with their signal/ISI split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalMoments {
    pub signal_mean: f64,
    pub isi_mean: f64,
    pub signal_variance: f64,
    pub isi_variance: f64,
}

impl SignalMoments {
    pub fn mean(&self) -> f64 {
        self.signal_mean + self.isi_mean
    }

    pub fn variance(&self) -> f64 {
        self.signal_variance + self.isi_variance
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }
}

pub fn expected_signal(q_mean: f64, h1: f64) -> f64 {
    q_mean * h1
}

fn isi_terms(averaged: &[f64], k: usize) -> Result<&[f64]> {
    averaged.get(1..=k).ok_or_else(|| {
        Error::Dimension(format!(
            "ISI memory {k} needs H[2..={}], table has {} entries",
            k + 1,
            averaged.len()
        ))
    })
}

/// `Q̄ · Σ_{i=2}^{k+1} H[i]`, with `averaged[0] = H[1]`.
pub fn expected_isi(q_mean: f64, averaged: &[f64], k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    Ok(q_mean * isi_terms(averaged, k)?.iter().sum::<f64>())
}

/// `Q̄ · Σ_{i=2}^{k+1} H[i] (1 - H[i])`.
pub fn isi_variance(q_mean: f64, averaged: &[f64], k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    Ok(q_mean
        * isi_terms(averaged, k)?
            .iter()
            .map(|h| h * (1.0 - h))
            .sum::<f64>())
}

/// Expected total strength `Q̄ Σ_{i=1}^{k+1} H[i]`.
pub fn expected_total(q_mean: f64, averaged: &[f64], k: usize) -> Result<f64> {
    let h1 = *averaged
        .first()
        .ok_or_else(|| Error::Dimension("averaged CIR vector is empty".into()))?;
    Ok(expected_signal(q_mean, h1) + expected_isi(q_mean, averaged, k)?)
}

/// Signal and ISI moments for the given level and signal CIR `h1`.
///
/// The signal part uses `h1` directly; the ISI part uses the averaged CIRs
/// weighted by `q_mean`.
pub fn moments_for(
    q: f64,
    h1: f64,
    q_mean: f64,
    averaged: &[f64],
    k: usize,
) -> Result<SignalMoments> {
    Ok(SignalMoments {
        signal_mean: q * h1,
        isi_mean: expected_isi(q_mean, averaged, k)?,
        signal_variance: q * h1 * (1.0 - h1),
        isi_variance: isi_variance(q_mean, averaged, k)?,
    })
}

/// Moments of the received count when `q` is released from `at`, using the
/// table's full ISI memory and the set's mean for the interferers.
pub fn conditional_moments(
    q: u64,
    at: Position,
    cset: &ConcentrationSet,
    table: &CirTable,
) -> Result<SignalMoments> {
    if cset.index_of(q).is_none() {
        return domain(format!(
            "{q} is not one of the design levels {:?}",
            cset.levels()
        ));
    }
    let h1 = table.signal_cir(at)?;
    moments_for(
        q as f64,
        h1,
        cset.mean(),
        table.averaged(),
        table.isi_memory(),
    )
}
