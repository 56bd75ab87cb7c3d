//! The n-level interferometer tree.
//!
//! Level `i` holds `2^(i-1)` MZ nodes, numbered left to right from 0. Each
//! node's odd output port feeds its left child and its even output port its
//! right child, at every level. Leaves (detectors) are numbered `1..=2^n` from
//! the left, so the all-odd path ends on leaf 1 and the all-even path on leaf
//! `2^n`.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bits::{BitString, BitsError, ParityString};
use crate::optics::{self, Amplitude, OpticsError, Port, StageNoise, EVEN_PORT, ODD_PORT};

/// Largest tree we are willing to build (leaf distributions are dense).
pub const MAX_LEVELS: u32 = 20;

/// Amplitudes with `|a|^2` below this are treated as exactly dark and pruned.
/// Only float residue of a complete destructive interference falls under it.
pub const DARK_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("tree depth {0} outside 1..={MAX_LEVELS}")]
    InvalidLevels(u32),
    #[error("input strings have length {got}, tree has {levels} levels")]
    WrongInputLength { got: u32, levels: u32 },
    #[error("leaf {leaf} outside 1..={count}")]
    LeafOutOfRange { leaf: u64, count: u64 },
    #[error("delay {delay} (in units of delta) does not match any final interferometer")]
    DelayOutOfRange { delay: u64 },
    #[error("phase jitter enabled but no random source supplied")]
    JitterNeedsRng,
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error(transparent)]
    Optics(#[from] OpticsError),
}

/// Direction taken out of an interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Branch {
    /// `x_k != y_k`, left child.
    Odd,
    /// `x_k == y_k`, right child.
    Even,
}

impl Branch {
    pub fn of_parity(bit: u8) -> Self {
        if bit == 1 {
            Branch::Odd
        } else {
            Branch::Even
        }
    }

    pub fn port(self) -> Port {
        match self {
            Branch::Odd => ODD_PORT,
            Branch::Even => EVEN_PORT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId {
    /// 1-based level.
    pub level: u32,
    /// 0-based position within the level.
    pub position: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Child {
    Node(NodeId),
    /// 1-based detector index.
    Leaf(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MzTree {
    levels: u32,
}

pub fn build_tree(n: u32) -> Result<MzTree, CircuitError> {
    MzTree::new(n)
}

impl MzTree {
    pub fn new(levels: u32) -> Result<Self, CircuitError> {
        if levels == 0 || levels > MAX_LEVELS {
            return Err(CircuitError::InvalidLevels(levels));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn nodes_at(&self, level: u32) -> impl Iterator<Item = NodeId> {
        let count = if level >= 1 && level <= self.levels { 1u64 << (level - 1) } else { 0 };
        (0..count).map(move |position| NodeId { level, position })
    }

    pub fn node_count(&self) -> u64 {
        (1u64 << self.levels) - 1
    }

    pub fn leaf_count(&self) -> u64 {
        1u64 << self.levels
    }

    pub fn leaves(&self) -> impl Iterator<Item = u64> {
        1..=self.leaf_count()
    }

    pub fn root(&self) -> NodeId {
        NodeId { level: 1, position: 0 }
    }

    /// `(left, right)` children: odd port on the left, even port on the right.
    pub fn children(&self, node: NodeId) -> (Child, Child) {
        let left = 2 * node.position;
        let right = left + 1;
        if node.level == self.levels {
            (Child::Leaf(left + 1), Child::Leaf(right + 1))
        } else {
            let level = node.level + 1;
            (
                Child::Node(NodeId { level, position: left }),
                Child::Node(NodeId { level, position: right }),
            )
        }
    }

    pub fn child(&self, node: NodeId, branch: Branch) -> Child {
        let (left, right) = self.children(node);
        match branch {
            Branch::Odd => left,
            Branch::Even => right,
        }
    }

    pub fn check_leaf(&self, leaf: u64) -> Result<(), CircuitError> {
        if leaf == 0 || leaf > self.leaf_count() {
            return Err(CircuitError::LeafOutOfRange { leaf, count: self.leaf_count() });
        }
        Ok(())
    }

    /// Leaf reached by a parity string: `1 + sum_k (1 - p_k) 2^(n-k)`.
    pub fn leaf_of(&self, parity: &ParityString) -> Result<u64, CircuitError> {
        self.check_len(parity.levels())?;
        Ok(1 + parity.as_bits().complement().value())
    }

    /// Inverse of [`MzTree::leaf_of`].
    pub fn parity_of_leaf(&self, leaf: u64) -> Result<ParityString, CircuitError> {
        self.check_leaf(leaf)?;
        let position = BitString::new(leaf - 1, self.levels)?;
        Ok(ParityString::from_bits(position.complement()))
    }

    fn check_len(&self, got: u32) -> Result<(), CircuitError> {
        if got != self.levels {
            return Err(CircuitError::WrongInputLength { got, levels: self.levels });
        }
        Ok(())
    }
}

/// Parities of the bit pairs and the leaf they select.
pub fn parity_route(x: &BitString, y: &BitString) -> Result<(ParityString, u64), CircuitError> {
    let parity = ParityString::of(x, y)?;
    let tree = MzTree::new(parity.levels())?;
    let leaf = tree.leaf_of(&parity)?;
    Ok((parity, leaf))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafDistribution {
    /// `probs[i]` is the click probability of leaf `i + 1`.
    pub probs: Vec<f64>,
    pub lost: f64,
}

impl LeafDistribution {
    pub fn prob(&self, leaf: u64) -> f64 {
        leaf.checked_sub(1)
            .and_then(|i| self.probs.get(i as usize))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn click_total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Leaf with the largest click probability (lowest index on ties).
    pub fn most_likely(&self) -> u64 {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best as u64 + 1
    }

    /// Inverse-CDF sample from a uniform `u` in `[0, 1)`. `None` means lost.
    pub fn sample(&self, u: f64) -> Option<u64> {
        let mut acc = 0.0;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return Some(i as u64 + 1);
            }
        }
        None
    }
}

/// Exact propagation with no jitter. Errors if `noise` asks for jitter.
pub fn propagate(
    tree: &MzTree,
    x: &BitString,
    y: &BitString,
    noise: &StageNoise,
) -> Result<LeafDistribution, CircuitError> {
    if noise.has_jitter() {
        return Err(CircuitError::JitterNeedsRng);
    }
    propagate_inner(tree, x, y, noise, &mut || None)
}

/// Exact propagation with one jitter draw per visited interferometer.
pub fn propagate_with_jitter<R: Rng + ?Sized>(
    tree: &MzTree,
    x: &BitString,
    y: &BitString,
    noise: &StageNoise,
    rng: &mut R,
) -> Result<LeafDistribution, CircuitError> {
    propagate_inner(tree, x, y, noise, &mut || {
        noise.has_jitter().then(|| noise.draw_jitter(rng))
    })
}

fn propagate_inner(
    tree: &MzTree,
    x: &BitString,
    y: &BitString,
    noise: &StageNoise,
    jitter: &mut dyn FnMut() -> Option<f64>,
) -> Result<LeafDistribution, CircuitError> {
    tree.check_len(x.len())?;
    tree.check_len(y.len())?;

    // Live wavefront: (position within the level, amplitude entering BS1).
    let mut front: Vec<(u64, Amplitude)> = vec![(0, Amplitude::new(1.0, 0.0))];
    for level in 1..=tree.levels() {
        let (xa, yb) = (x.bit(level), y.bit(level));
        let mut next = Vec::with_capacity(front.len() * 2);
        for (position, amp) in front {
            let out = optics::mz_transfer(xa, yb, noise, jitter())?.scale(amp);
            for (branch, offset) in [(Branch::Odd, 0), (Branch::Even, 1)] {
                let a = out.amplitude(branch.port());
                if a.norm_sqr() > DARK_FLOOR {
                    next.push((2 * position + offset, a));
                }
            }
        }
        front = next;
    }

    let mut probs = vec![0.0; tree.leaf_count() as usize];
    for (position, amp) in front {
        probs[position as usize] += amp.norm_sqr();
    }
    let lost = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    Ok(LeafDistribution { probs, lost })
}

/// Fiber delays of the two-detector, time-multiplexed layout, in units of delta.
///
/// An edge leaving level `i < n` costs 1 on the left (odd) side and
/// `1 + 2^(n-i-1)` on the right (even) side. Both outputs of a final-level
/// interferometer cost 1. The root-to-leaf total is therefore
/// `n + (position of the final interferometer)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DelaySchedule {
    levels: u32,
}

/// Output side of a final-level interferometer in the two-detector layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FinalPort {
    Left,
    Right,
}

pub fn delay_schedule(n: u32) -> Result<DelaySchedule, CircuitError> {
    MzTree::new(n)?;
    Ok(DelaySchedule { levels: n })
}

impl DelaySchedule {
    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// Delay of the edge leaving a level-`level` interferometer on `branch`.
    pub fn edge_delay(&self, level: u32, branch: Branch) -> u64 {
        match branch {
            Branch::Odd => 1,
            Branch::Even if level >= self.levels => 1,
            Branch::Even => 1 + (1u64 << (self.levels - level - 1)),
        }
    }

    /// 0-based position of the final interferometer feeding `leaf`.
    pub fn final_mz(&self, leaf: u64) -> Result<u64, CircuitError> {
        MzTree { levels: self.levels }.check_leaf(leaf)?;
        Ok((leaf - 1) >> 1)
    }

    pub fn leaf_delay(&self, leaf: u64) -> Result<u64, CircuitError> {
        Ok(u64::from(self.levels) + self.final_mz(leaf)?)
    }

    pub fn port_of_leaf(&self, leaf: u64) -> Result<FinalPort, CircuitError> {
        MzTree { levels: self.levels }.check_leaf(leaf)?;
        Ok(if (leaf - 1) & 1 == 0 { FinalPort::Left } else { FinalPort::Right })
    }

    /// Recover the leaf from the detector side and the arrival delay.
    pub fn leaf_from_port_and_delay(&self, port: FinalPort, delay: u64) -> Result<u64, CircuitError> {
        let n = u64::from(self.levels);
        let finals = 1u64 << (self.levels - 1);
        let position = delay
            .checked_sub(n)
            .filter(|p| *p < finals)
            .ok_or(CircuitError::DelayOutOfRange { delay })?;
        Ok(match port {
            FinalPort::Left => 2 * position + 1,
            FinalPort::Right => 2 * position + 2,
        })
    }

    /// Leaf delays in leaf order.
    pub fn all_delays(&self) -> Vec<u64> {
        let n = u64::from(self.levels);
        (0..(1u64 << self.levels)).map(|i| n + (i >> 1)).collect()
    }
}
