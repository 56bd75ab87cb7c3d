//! Success rate of a physical run: one-photon emission, per-stage survival,
//! detection.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Trials per independently seeded RNG stream. Fixed so results do not
/// depend on how many worker threads run.
const BLOCK_TRIALS: u64 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("{name} = {value} outside [0, 1]")]
    OutOfUnitRange { name: &'static str, value: f64 },
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("level range {lo}..={hi} invalid (need 1 <= lo <= hi)")]
    BadRange { lo: u32, hi: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Probability the source emits exactly one photon per pulse.
    pub p1: f64,
    /// Optical loss per interferometer stage.
    pub eps_stage: f64,
    /// Detector efficiency.
    pub eta_d: f64,
}

impl PhysicalParams {
    /// Quantum-dot source, 1.5% loss per stage, SNSPD detectors.
    pub const REFERENCE: PhysicalParams = PhysicalParams { p1: 0.72, eps_stage: 0.015, eta_d: 0.85 };
    pub const PERFECT: PhysicalParams = PhysicalParams { p1: 1.0, eps_stage: 0.0, eta_d: 1.0 };

    pub fn new(p1: f64, eps_stage: f64, eta_d: f64) -> Result<Self, NoiseError> {
        for (name, value) in [("p1", p1), ("eps_stage", eps_stage), ("eta_d", eta_d)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(NoiseError::OutOfUnitRange { name, value });
            }
        }
        Ok(Self { p1, eps_stage, eta_d })
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::REFERENCE
    }
}

/// `p1 * (1 - eps)^n * eta_d`.
pub fn success_rate(n: u32, params: &PhysicalParams) -> f64 {
    params.p1 * (1.0 - params.eps_stage).powi(n as i32) * params.eta_d
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub rate: f64,
    pub std_error: f64,
    pub trials: u64,
    pub successes: u64,
}

fn run_block(n: u32, params: &PhysicalParams, seed: u64, block: u64, trials: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    let mut hits = 0;
    for _ in 0..trials {
        if rng.gen::<f64>() >= params.p1 {
            continue;
        }
        if !(0..n).all(|_| rng.gen::<f64>() >= params.eps_stage) {
            continue;
        }
        if rng.gen::<f64>() < params.eta_d {
            hits += 1;
        }
    }
    hits
}

/// Simulates `trials` independent pulses. Bit-identical for a given seed on
/// any platform and thread count.
pub fn monte_carlo_rate(
    n: u32,
    params: &PhysicalParams,
    trials: u64,
    seed: u64,
) -> Result<McEstimate, NoiseError> {
    if trials == 0 {
        return Err(NoiseError::NoTrials);
    }
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let successes: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let len = BLOCK_TRIALS.min(trials - b * BLOCK_TRIALS);
            run_block(n, params, seed, b, len)
        })
        .sum();
    let rate = successes as f64 / trials as f64;
    let std_error = (rate * (1.0 - rate) / trials as f64).sqrt();
    Ok(McEstimate { rate, std_error, trials, successes })
}

pub fn loss_curve(n_min: u32, n_max: u32, params: &PhysicalParams) -> Result<Vec<(u32, f64)>, NoiseError> {
    if n_min == 0 || n_min > n_max {
        return Err(NoiseError::BadRange { lo: n_min, hi: n_max });
    }
    Ok((n_min..=n_max).map(|n| (n, success_rate(n, params))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        for n in [1, 7, 40] {
            assert_eq!(success_rate(n, &PhysicalParams::PERFECT), 1.0);
        }
        let r1 = success_rate(1, &PhysicalParams::REFERENCE);
        assert!((r1 - 0.72 * 0.985 * 0.85).abs() < 1e-15);
        assert!((r1 - 0.60282).abs() < 1e-12);
        // 0.612 * 0.985^30, computed separately as exp(30 ln 0.985).
        let r30 = success_rate(30, &PhysicalParams::REFERENCE);
        assert!((r30 - 0.612 * (30.0 * 0.985f64.ln()).exp()).abs() < 1e-12);
        assert!((r30 - 0.388_900_352_751_585_6).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(PhysicalParams::new(1.1, 0.0, 1.0).is_err());
        assert!(PhysicalParams::new(0.5, -0.1, 1.0).is_err());
        assert!(PhysicalParams::new(0.5, 0.1, f64::NAN).is_err());
        assert!(PhysicalParams::new(0.72, 0.015, 0.85).is_ok());
    }

    #[test]
    fn monte_carlo_examples() {
        let perfect = monte_carlo_rate(12, &PhysicalParams::PERFECT, 5000, 1).unwrap();
        assert_eq!(perfect.rate, 1.0);
        assert_eq!(perfect.std_error, 0.0);

        let est = monte_carlo_rate(1, &PhysicalParams::REFERENCE, 100_000, 42).unwrap();
        let exact = success_rate(1, &PhysicalParams::REFERENCE);
        assert!((est.rate - exact).abs() <= 3.0 * est.std_error, "{est:?} vs {exact}");

        let again = monte_carlo_rate(1, &PhysicalParams::REFERENCE, 100_000, 42).unwrap();
        assert_eq!(est.rate.to_bits(), again.rate.to_bits());

        assert_eq!(monte_carlo_rate(1, &PhysicalParams::REFERENCE, 0, 1), Err(NoiseError::NoTrials));
    }

    #[test]
    fn partial_blocks_count_exactly() {
        let est = monte_carlo_rate(3, &PhysicalParams::PERFECT, BLOCK_TRIALS + 7, 9).unwrap();
        assert_eq!(est.successes, BLOCK_TRIALS + 7);
    }

    #[test]
    fn loss_curve_examples() {
        let curve = loss_curve(1, 40, &PhysicalParams::REFERENCE).unwrap();
        assert_eq!(curve.len(), 40);
        assert!((curve[0].1 - 0.60282).abs() < 1e-12);
        assert!(curve.windows(2).all(|w| w[1].1 < w[0].1));

        let flat = PhysicalParams::new(0.72, 0.0, 0.85).unwrap();
        assert!(loss_curve(1, 10, &flat).unwrap().iter().all(|(_, r)| (*r - 0.612).abs() < 1e-15));

        let dark = PhysicalParams::new(0.0, 0.015, 0.85).unwrap();
        assert!(loss_curve(1, 10, &dark).unwrap().iter().all(|(_, r)| *r == 0.0));

        assert!(loss_curve(0, 3, &flat).is_err());
        assert!(loss_curve(4, 3, &flat).is_err());
    }
}
