//! Diffusive channel with a fully absorbing spherical receiver.
//!
//! Lengths are in micrometres and times in seconds. Distances are measured
//! from the transmitter to the nearest point of the receiver surface.

use crate::error::{domain, Error, Result};
use crate::numeric::{erfc, integrate};
use std::f64::consts::PI;

/// Absolute tolerance on every distance-averaged CIR value.
pub const AVERAGED_CIR_TOL: f64 = 1e-10;

/// Physical constants of the medium and receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// D, µm²/s
    pub diffusion_coefficient: f64,
    /// r, µm
    pub receiver_radius: f64,
    /// t_sym, s
    pub symbol_period: f64,
    /// Δt, s. Carried as metadata; no analytic expression uses it.
    pub sampling_period: f64,
}

impl ChannelParams {
    pub fn new(
        diffusion_coefficient: f64,
        receiver_radius: f64,
        symbol_period: f64,
        sampling_period: f64,
    ) -> Result<Self> {
        let check = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                domain(format!("{name} must be positive and finite, got {v}"))
            }
        };
        check("diffusion coefficient", diffusion_coefficient)?;
        check("receiver radius", receiver_radius)?;
        check("symbol period", symbol_period)?;
        check("sampling period", sampling_period)?;
        Ok(Self {
            diffusion_coefficient,
            receiver_radius,
            symbol_period,
            sampling_period,
        })
    }

    /// D = 79.4 µm²/s, r = 5 µm, t_sym = 21.12 s, Δt = 0.32 s.
    pub fn reference() -> Self {
        Self {
            diffusion_coefficient: 79.4,
            receiver_radius: 5.0,
            symbol_period: 21.12,
            sampling_period: 0.32,
        }
    }

    pub fn with_symbol_period(self, symbol_period: f64) -> Result<Self> {
        Self::new(
            self.diffusion_coefficient,
            self.receiver_radius,
            symbol_period,
            self.sampling_period,
        )
    }

    /// Fraction of molecules eventually absorbed from distance `y`, `r / (y + r)`.
    pub fn absorption_bound(&self, y: f64) -> f64 {
        self.receiver_radius / (y + self.receiver_radius)
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self::reference()
    }
}

/// Transmitter placement around the receiver and the ISI memory length.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    y_min: f64,
    y_max: f64,
    distances: Vec<f64>,
    isi_memory: usize,
}

impl Topology {
    pub fn new(y_min: f64, y_max: f64, distances: Vec<f64>, isi_memory: usize) -> Result<Self> {
        if !(y_min > 0.0 && y_min.is_finite() && y_max.is_finite()) {
            return domain(format!(
                "distance bounds must be positive and finite, got [{y_min}, {y_max}]"
            ));
        }
        if y_max < y_min {
            return domain(format!("y_max = {y_max} is below y_min = {y_min}"));
        }
        if distances.is_empty() {
            return domain("topology needs at least one transmitter");
        }
        if let Some(bad) = distances.iter().find(|&&y| !(y >= y_min && y <= y_max)) {
            return domain(format!("distance {bad} lies outside [{y_min}, {y_max}]"));
        }
        let topo = Self {
            y_min,
            y_max,
            distances,
            isi_memory: 0,
        };
        topo.with_isi_memory(isi_memory)
    }

    /// Transmitters at `y_min, y_min + spacing, ..., y_max` with full channel memory.
    pub fn uniform(y_min: f64, y_max: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) {
            return domain(format!("spacing must be positive, got {spacing}"));
        }
        if y_max < y_min {
            return domain(format!("y_max = {y_max} is below y_min = {y_min}"));
        }
        let steps = ((y_max - y_min) / spacing).round();
        if ((y_min + steps * spacing) - y_max).abs() > 1e-9 * y_max.max(1.0) {
            return domain(format!(
                "[{y_min}, {y_max}] is not a whole multiple of spacing {spacing}"
            ));
        }
        let count = steps as usize + 1;
        let distances: Vec<f64> = (0..count)
            .map(|i| {
                if i + 1 == count {
                    y_max
                } else {
                    y_min + i as f64 * spacing
                }
            })
            .collect();
        Self::new(y_min, y_max, distances, count - 1)
    }

    /// 1 µm grid with mean distance `d_bar`, so `y_max = 2 d_bar - y_min` and
    /// `K = y_max - y_min + 1`.
    pub fn from_mean_distance(d_bar: f64, y_min: f64) -> Result<Self> {
        Self::uniform(y_min, 2.0 * d_bar - y_min, 1.0)
    }

    /// `count` transmitters evenly spread over `[y_min, y_max]` (endpoints included).
    pub fn evenly_spaced(y_min: f64, y_max: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return domain("topology needs at least one transmitter");
        }
        if count == 1 && y_min != y_max {
            return domain("a single transmitter needs y_min = y_max");
        }
        let distances = (0..count)
            .map(|i| {
                if count == 1 {
                    y_min
                } else {
                    y_min + (y_max - y_min) * i as f64 / (count - 1) as f64
                }
            })
            .collect();
        Self::new(y_min, y_max, distances, count - 1)
    }

    /// Every transmitter at the same distance. `count = 1` is the single-link model.
    pub fn point(y: f64, count: usize) -> Result<Self> {
        Self::new(y, y, vec![y; count], count.saturating_sub(1))
    }

    /// Overrides the ISI memory. Zero gives the ISI-free model.
    pub fn with_isi_memory(mut self, isi_memory: usize) -> Result<Self> {
        let k = self.distances.len();
        if isi_memory > k - 1 {
            return domain(format!("ISI memory {isi_memory} exceeds K - 1 = {}", k - 1));
        }
        self.isi_memory = isi_memory;
        Ok(self)
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    pub fn mean_distance(&self) -> f64 {
        0.5 * (self.y_min + self.y_max)
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    /// Number of transmitters, K.
    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn isi_memory(&self) -> usize {
        self.isi_memory
    }

    /// `y_min == y_max`: averaged quantities equal the point values.
    pub fn is_point(&self) -> bool {
        self.y_min == self.y_max
    }
}

fn check_distance(y: f64) -> Result<()> {
    if y > 0.0 && y.is_finite() {
        Ok(())
    } else {
        domain(format!("distance must be positive, got {y}"))
    }
}

/// Hitting rate of molecules released at distance `y`, at time `t` (1/s).
pub fn hit_rate(params: &ChannelParams, y: f64, t: f64) -> Result<f64> {
    check_distance(y)?;
    if !(t > 0.0) {
        return domain(format!("time must be positive, got {t}"));
    }
    let d = params.diffusion_coefficient;
    let density = y / (4.0 * PI * d * t * t * t).sqrt() * (-y * y / (4.0 * d * t)).exp();
    Ok(params.absorption_bound(y) * density)
}

/// Fraction of molecules absorbed by time `t`.
pub fn cum_hit(params: &ChannelParams, y: f64, t: f64) -> Result<f64> {
    check_distance(y)?;
    if !(t >= 0.0) {
        return domain(format!("time must be non-negative, got {t}"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let arg = y / (4.0 * params.diffusion_coefficient * t).sqrt();
    Ok(params.absorption_bound(y) * erfc(arg))
}

/// Probability that a molecule released at the start of a slot is absorbed
/// during the `i`-th symbol period (`i >= 1`).
pub fn cir(params: &ChannelParams, y: f64, i: usize) -> Result<f64> {
    if i < 1 {
        return domain("symbol period index starts at 1");
    }
    let ts = params.symbol_period;
    let upper = cum_hit(params, y, i as f64 * ts)?;
    let lower = cum_hit(params, y, (i - 1) as f64 * ts)?;
    Ok((upper - lower).max(0.0))
}

/// CIR of period `i` averaged over a uniform distance on `[y_min, y_max]`.
pub fn averaged_cir_between(
    params: &ChannelParams,
    y_min: f64,
    y_max: f64,
    i: usize,
) -> Result<f64> {
    check_distance(y_min)?;
    if !(y_max > y_min) {
        return Err(Error::DegenerateInterval { y_min, y_max });
    }
    if i < 1 {
        return domain("symbol period index starts at 1");
    }
    let width = y_max - y_min;
    let ts = params.symbol_period;
    let integrand = |y: f64| {
        let upper = cum_hit(params, y, i as f64 * ts).unwrap_or(f64::NAN);
        let lower = cum_hit(params, y, (i - 1) as f64 * ts).unwrap_or(f64::NAN);
        upper - lower
    };
    let q = integrate(integrand, y_min, y_max, AVERAGED_CIR_TOL * width)?;
    Ok((q.value / width).clamp(0.0, 1.0))
}

/// Distance-averaged CIR H[i] for the topology's distance range.
///
/// Fails with [`Error::DegenerateInterval`] on a point topology; callers that
/// want the point value use [`CirTable`], which substitutes `cir(y_min, i)`.
pub fn averaged_cir(params: &ChannelParams, topo: &Topology, i: usize) -> Result<f64> {
    averaged_cir_between(params, topo.y_min(), topo.y_max(), i)
}

/// Which signal CIR to use when conditioning on a transmitter distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    /// Transmitter index into the topology (0-based).
    Tx(usize),
    /// y_min, the strongest link.
    Nearest,
    /// y_max, the weakest link.
    Farthest,
}

/// Materialized CIRs over a topology.
#[derive(Debug, Clone, PartialEq)]
pub struct CirTable {
    distances: Vec<f64>,
    y_min: f64,
    y_max: f64,
    /// `per_tx[k][i - 1] = h(y_k, i)`
    per_tx: Vec<Vec<f64>>,
    /// `averaged[i - 1] = H[i]`
    averaged: Vec<f64>,
    nearest: f64,
    farthest: f64,
}

impl CirTable {
    pub fn build(params: &ChannelParams, topo: &Topology) -> Result<Self> {
        let periods = topo.isi_memory() + 1;
        let per_tx = topo
            .distances()
            .iter()
            .map(|&y| {
                (1..=periods)
                    .map(|i| cir(params, y, i))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let averaged = (1..=periods)
            .map(|i| {
                if topo.is_point() {
                    cir(params, topo.y_min(), i)
                } else {
                    averaged_cir(params, topo, i)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            distances: topo.distances().to_vec(),
            y_min: topo.y_min(),
            y_max: topo.y_max(),
            per_tx,
            averaged,
            nearest: cir(params, topo.y_min(), 1)?,
            farthest: cir(params, topo.y_max(), 1)?,
        })
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn y_min(&self) -> f64 {
        self.y_min
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    /// Number of transmitters, K.
    pub fn transmitters(&self) -> usize {
        self.per_tx.len()
    }

    pub fn isi_memory(&self) -> usize {
        self.averaged.len() - 1
    }

    /// Row `k`: `h(y_k, 1), ..., h(y_k, isi_memory + 1)`.
    pub fn per_tx(&self, k: usize) -> &[f64] {
        &self.per_tx[k]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.per_tx
    }

    /// `H[1], ..., H[isi_memory + 1]`.
    pub fn averaged(&self) -> &[f64] {
        &self.averaged
    }

    /// h(y, 1) at the requested position.
    pub fn signal_cir(&self, at: Position) -> Result<f64> {
        match at {
            Position::Tx(k) => self.per_tx.get(k).map(|row| row[0]).ok_or_else(|| {
                Error::Dimension(format!(
                    "transmitter {k} out of range (K = {})",
                    self.per_tx.len()
                ))
            }),
            Position::Nearest => Ok(self.nearest),
            Position::Farthest => Ok(self.farthest),
        }
    }
}

/// Free-function form of [`CirTable::build`].
pub fn build_cir_table(params: &ChannelParams, topo: &Topology) -> Result<CirTable> {
    CirTable::build(params, topo)
}
