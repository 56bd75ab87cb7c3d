//! Two-port amplitude algebra and the single Mach-Zehnder stage.
//!
//! Conventions (fixed crate-wide):
//!
//! - Beam splitter: `U = (1/sqrt 2) [[1, i], [i, 1]]`.
//! - The photon enters port 0 of BS1. Port 0 is Alice's arm, port 1 is Bob's.
//! - Each agent inserts a pi phase on their arm iff their bit is 0.
//! - With these choices equal bits leave BS2 on port 1 ([`EVEN_PORT`]) and
//!   unequal bits on port 0 ([`ODD_PORT`]).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Amplitude = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error("loss {0} outside [0, 1)")]
    InvalidLoss(f64),
    #[error("phase jitter half-width {0} must be finite and >= 0")]
    InvalidJitter(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Port {
    Zero,
    One,
}

impl Port {
    pub fn index(self) -> usize {
        match self {
            Port::Zero => 0,
            Port::One => 1,
        }
    }
}

/// Output port that carries the photon when `bit_a == bit_b`.
pub const EVEN_PORT: Port = Port::One;
/// Output port that carries the photon when `bit_a != bit_b`.
pub const ODD_PORT: Port = Port::Zero;
/// Arm on which Alice encodes.
pub const ALICE_ARM: Port = Port::Zero;
/// Arm on which Bob encodes.
pub const BOB_ARM: Port = Port::One;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPortState {
    pub a0: Amplitude,
    pub a1: Amplitude,
}

impl TwoPortState {
    pub const ZERO: TwoPortState = TwoPortState {
        a0: Complex64::new(0.0, 0.0),
        a1: Complex64::new(0.0, 0.0),
    };

    pub fn new(a0: Amplitude, a1: Amplitude) -> Self {
        Self { a0, a1 }
    }

    /// Unit amplitude on one input port.
    pub fn single(port: Port) -> Self {
        let one = Complex64::new(1.0, 0.0);
        match port {
            Port::Zero => Self::new(one, Complex64::new(0.0, 0.0)),
            Port::One => Self::new(Complex64::new(0.0, 0.0), one),
        }
    }

    pub fn amplitude(&self, port: Port) -> Amplitude {
        match port {
            Port::Zero => self.a0,
            Port::One => self.a1,
        }
    }

    pub fn probability(&self, port: Port) -> f64 {
        self.amplitude(port).norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    pub fn scale(&self, factor: Amplitude) -> Self {
        Self::new(self.a0 * factor, self.a1 * factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageNoise {
    loss_per_stage: f64,
    phase_jitter_halfwidth: f64,
}

impl Default for StageNoise {
    fn default() -> Self {
        Self::ideal()
    }
}

impl StageNoise {
    pub fn new(loss_per_stage: f64, phase_jitter_halfwidth: f64) -> Result<Self, OpticsError> {
        check_loss(loss_per_stage)?;
        if !phase_jitter_halfwidth.is_finite() || phase_jitter_halfwidth < 0.0 {
            return Err(OpticsError::InvalidJitter(phase_jitter_halfwidth));
        }
        Ok(Self { loss_per_stage, phase_jitter_halfwidth })
    }

    pub fn ideal() -> Self {
        Self { loss_per_stage: 0.0, phase_jitter_halfwidth: 0.0 }
    }

    pub fn lossy(loss_per_stage: f64) -> Result<Self, OpticsError> {
        Self::new(loss_per_stage, 0.0)
    }

    pub fn loss_per_stage(&self) -> f64 {
        self.loss_per_stage
    }

    pub fn phase_jitter_halfwidth(&self) -> f64 {
        self.phase_jitter_halfwidth
    }

    pub fn has_jitter(&self) -> bool {
        self.phase_jitter_halfwidth > 0.0
    }

    pub fn is_ideal(&self) -> bool {
        self.loss_per_stage == 0.0 && !self.has_jitter()
    }

    /// Uniform draw in `[-halfwidth, +halfwidth]`; no RNG consumed when jitter is off.
    pub fn draw_jitter<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.has_jitter() {
            rng.gen_range(-self.phase_jitter_halfwidth..=self.phase_jitter_halfwidth)
        } else {
            0.0
        }
    }
}

fn check_loss(loss: f64) -> Result<(), OpticsError> {
    if (0.0..1.0).contains(&loss) {
        Ok(())
    } else {
        Err(OpticsError::InvalidLoss(loss))
    }
}

/// 50/50 beam splitter.
pub fn apply_beam_splitter(state: TwoPortState) -> TwoPortState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::i();
    TwoPortState::new(
        (state.a0 + i * state.a1) * s,
        (i * state.a0 + state.a1) * s,
    )
}

pub fn apply_phase(state: TwoPortState, port: Port, phi: f64) -> TwoPortState {
    let factor = Complex64::from_polar(1.0, phi);
    match port {
        Port::Zero => TwoPortState::new(state.a0 * factor, state.a1),
        Port::One => TwoPortState::new(state.a0, state.a1 * factor),
    }
}

pub fn apply_loss(state: TwoPortState, loss: f64) -> Result<TwoPortState, OpticsError> {
    check_loss(loss)?;
    let t = (1.0 - loss).sqrt();
    Ok(TwoPortState::new(state.a0 * t, state.a1 * t))
}

/// Which bit value triggers the pi phase modulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PhaseConvention {
    #[default]
    PiOnZero,
    PiOnOne,
}

impl PhaseConvention {
    pub fn phase_for(self, bit: u8) -> f64 {
        let fires = match self {
            PhaseConvention::PiOnZero => bit == 0,
            PhaseConvention::PiOnOne => bit == 1,
        };
        if fires {
            PI
        } else {
            0.0
        }
    }
}

/// Output amplitudes of one MZ stage for a photon entering BS1 port 0 with
/// unit amplitude. `jitter` is an extra phase (radians) on Alice's arm.
pub fn mz_transfer(
    bit_a: u8,
    bit_b: u8,
    noise: &StageNoise,
    jitter: Option<f64>,
) -> Result<TwoPortState, OpticsError> {
    mz_transfer_with(PhaseConvention::default(), bit_a, bit_b, noise, jitter)
}

pub fn mz_transfer_with(
    convention: PhaseConvention,
    bit_a: u8,
    bit_b: u8,
    noise: &StageNoise,
    jitter: Option<f64>,
) -> Result<TwoPortState, OpticsError> {
    let mut state = apply_beam_splitter(TwoPortState::single(Port::Zero));
    state = apply_phase(state, ALICE_ARM, convention.phase_for(bit_a));
    state = apply_phase(state, BOB_ARM, convention.phase_for(bit_b));
    if let Some(phi) = jitter {
        state = apply_phase(state, ALICE_ARM, phi);
    }
    state = apply_loss(state, noise.loss_per_stage)?;
    Ok(apply_beam_splitter(state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    const TOL: f64 = 1e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: TwoPortState, b: TwoPortState) -> bool {
        (a.a0 - b.a0).norm() < TOL && (a.a1 - b.a1).norm() < TOL
    }

    #[test]
    fn beam_splitter_examples() {
        let out = apply_beam_splitter(TwoPortState::single(Port::Zero));
        assert!(close(out, TwoPortState::new(c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2))));
        // Two passes send everything to the other port with a factor i.
        let twice = apply_beam_splitter(out);
        assert!(close(twice, TwoPortState::new(c(0.0, 0.0), c(0.0, 1.0))));
        assert_eq!(apply_beam_splitter(TwoPortState::ZERO), TwoPortState::ZERO);
    }

    #[test]
    fn phase_examples() {
        let out = apply_phase(TwoPortState::single(Port::Zero), Port::Zero, PI);
        assert!(close(out, TwoPortState::new(c(-1.0, 0.0), c(0.0, 0.0))));

        let split = TwoPortState::new(c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2));
        assert!(close(apply_phase(split, Port::One, 0.0), split));

        let out = apply_phase(TwoPortState::single(Port::One), Port::One, PI / 2.0);
        assert!(close(out, TwoPortState::new(c(0.0, 0.0), c(0.0, 1.0))));
    }

    #[test]
    fn loss_examples() {
        let one = TwoPortState::single(Port::Zero);
        assert!(close(apply_loss(one, 0.0).unwrap(), one));
        let out = apply_loss(one, 0.015).unwrap();
        assert!(close(out, TwoPortState::new(c(0.985f64.sqrt(), 0.0), c(0.0, 0.0))));

        let even = TwoPortState::new(c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0));
        let out = apply_loss(even, 0.19).unwrap();
        let v = 0.405f64.sqrt();
        assert!(close(out, TwoPortState::new(c(v, 0.0), c(v, 0.0))));
    }

    #[test]
    fn loss_rejects_out_of_range() {
        let one = TwoPortState::single(Port::Zero);
        assert!(apply_loss(one, 1.0).is_err());
        assert!(apply_loss(one, -0.1).is_err());
        assert!(apply_loss(one, f64::NAN).is_err());
        assert!(StageNoise::new(1.0, 0.0).is_err());
        assert!(StageNoise::new(0.1, -1.0).is_err());
    }

    #[test]
    fn mz_routes_by_parity() {
        let ideal = StageNoise::ideal();
        let same = mz_transfer(0, 0, &ideal, None).unwrap();
        assert!((same.probability(EVEN_PORT) - 1.0).abs() < TOL);
        let diff = mz_transfer(0, 1, &ideal, None).unwrap();
        assert!((diff.probability(ODD_PORT) - 1.0).abs() < TOL);
    }

    #[test]
    fn mz_jitter_matches_cos_squared() {
        // Independent route: explicit 2x2 matrix product BS * diag(e^{i phi}, 1) * BS.
        let s = FRAC_1_SQRT_2;
        let bs = [[c(s, 0.0), c(0.0, s)], [c(0.0, s), c(s, 0.0)]];
        for &phi in &[0.0, 0.1, 0.7, 1.3, PI / 2.0, 2.9, -0.4] {
            let d = [Complex64::from_polar(1.0, phi), c(1.0, 0.0)];
            // column 0 of BS * D * BS
            let mid = [d[0] * bs[0][0], d[1] * bs[1][0]];
            let even = bs[1][0] * mid[0] + bs[1][1] * mid[1];

            let out = mz_transfer(1, 1, &StageNoise::ideal(), Some(phi)).unwrap();
            let expected = (phi / 2.0).cos().powi(2);
            assert!((out.probability(EVEN_PORT) - expected).abs() < TOL);
            assert!((even.norm_sqr() - expected).abs() < TOL);
        }
    }

    #[test]
    fn draw_jitter_within_halfwidth() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let noise = StageNoise::new(0.0, 0.05).unwrap();
        for _ in 0..1000 {
            let j = noise.draw_jitter(&mut rng);
            assert!(j.abs() <= 0.05);
        }
        assert_eq!(StageNoise::ideal().draw_jitter(&mut rng), 0.0);
    }
}
