//! Time-window arithmetic and the one-bit-per-hop classical baseline.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative slack when counting completed hops, so `tau = k d / c` computed in
/// floating point still counts as `k` hops.
const HOP_ROUNDING: f64 = 1e-9;

pub const DEFAULT_RATIO_THRESHOLD: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimingError {
    #[error("{name} = {value} is invalid ({rule})")]
    Invalid { name: &'static str, value: f64, rule: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Alice-Bob distance, meters.
    pub d: f64,
    /// Inter-level path length, meters.
    pub delta: f64,
    /// Carrier speed, m/s.
    pub c: f64,
    /// Extra time allowed after the nominal arrival, seconds.
    pub slack: f64,
}

impl Geometry {
    pub const SPEED_OF_LIGHT: f64 = 3.0e8;

    pub fn new(d: f64, delta: f64, c: f64, slack: f64) -> Result<Self, TimingError> {
        let positive = |name, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(TimingError::Invalid { name, value, rule: "must be > 0" })
            }
        };
        positive("d", d)?;
        positive("delta", delta)?;
        positive("c", c)?;
        if !slack.is_finite() || slack < 0.0 {
            return Err(TimingError::Invalid { name: "slack", value: slack, rule: "must be >= 0" });
        }
        Ok(Self { d, delta, c, slack })
    }

    /// One-way hop time `d / c`.
    pub fn hop(&self) -> f64 {
        self.d / self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub t_lo: f64,
    pub t_hi: f64,
}

/// `t_lo = (n d + (n-1) delta) / c`, `t_hi = t_lo + slack`.
pub fn quantum_window(n: u32, geom: &Geometry) -> Window {
    let n = f64::from(n);
    let t_lo = (n * geom.d + (n - 1.0).max(0.0) * geom.delta) / geom.c;
    Window { t_lo, t_hi: t_lo + geom.slack }
}

/// Time a classical scheme needs for `n + 1` one-bit hops.
pub fn classical_time(n: u32, geom: &Geometry) -> f64 {
    f64::from(n + 1) * geom.hop()
}

/// True iff the window closes strictly before one more classical hop could land.
pub fn validate_window(n: u32, geom: &Geometry) -> bool {
    quantum_window(n, geom).t_hi < classical_time(n, geom)
}

/// Number of one-way one-bit hops that complete within `tau`.
pub fn classical_bits_within(tau: f64, geom: &Geometry) -> u64 {
    if tau.is_nan() || tau <= 0.0 {
        return 0;
    }
    let hops = tau / geom.hop();
    (hops * (1.0 + HOP_ROUNDING)).floor() as u64
}

/// Largest `n` with `2^n delta <= d / ratio_threshold`, or 0 if none.
pub fn feasibility_max_n(geom: &Geometry, ratio_threshold: f64) -> Result<u32, TimingError> {
    if !ratio_threshold.is_finite() || ratio_threshold <= 1.0 {
        return Err(TimingError::Invalid {
            name: "ratio_threshold",
            value: ratio_threshold,
            rule: "must be > 1",
        });
    }
    let budget = geom.d / ratio_threshold;
    let mut n = 0;
    while n < 62 && 2f64.powi(n as i32 + 1) * geom.delta <= budget {
        n += 1;
    }
    Ok(n)
}
