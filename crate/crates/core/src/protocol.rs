//! Game runs: detector ownership, outcomes, and what each agent can decode.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{BitString, BitsError};
use crate::circuit::{self, CircuitError, DelaySchedule, FinalPort, MzTree};
use crate::optics::StageNoise;

/// Gains at or above `1 - WIN_TOLERANCE` bits count as "at least one bit".
const WIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("assignment covers {got} leaves, tree has {expected}")]
    AssignmentSize { got: usize, expected: u64 },
    #[error("level {k} outside 1..={n}")]
    LevelOutOfRange { k: u32, n: u32 },
    #[error("bob share m={m} outside 0..={max}")]
    ShareOutOfRange { m: u64, max: u64 },
    #[error("{0} owns every detector, so silence carries no information")]
    OwnsAllDetectors(Agent),
    #[error("noisy run needs a random source")]
    NeedsRng,
    #[error("cannot parse detector pattern {0:?} (expected A/B per leaf)")]
    BadPattern(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Bits(#[from] BitsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Agent {
    Alice,
    Bob,
}

impl Agent {
    pub fn other(self) -> Agent {
        match self {
            Agent::Alice => Agent::Bob,
            Agent::Bob => Agent::Alice,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Agent::Alice => 'A',
            Agent::Bob => 'B',
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Agent::Alice => "Alice",
            Agent::Bob => "Bob",
        })
    }
}

/// Owner of each of the `2^n` leaf detectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DetectorAssignment {
    levels: u32,
    owners: Vec<Agent>,
}

impl DetectorAssignment {
    /// `owners[i]` owns leaf `i + 1`.
    pub fn from_owners(n: u32, owners: Vec<Agent>) -> Result<Self, ProtocolError> {
        let tree = MzTree::new(n)?;
        if owners.len() as u64 != tree.leaf_count() {
            return Err(ProtocolError::AssignmentSize {
                got: owners.len(),
                expected: tree.leaf_count(),
            });
        }
        Ok(Self { levels: n, owners })
    }

    /// Reads a pattern such as `"AABB"` or `"A,A,B,B"`; the depth follows from its length.
    pub fn parse_pattern(pattern: &str) -> Result<Self, ProtocolError> {
        let bad = || ProtocolError::BadPattern(pattern.to_string());
        let owners = pattern
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c.to_ascii_uppercase() {
                'A' => Ok(Agent::Alice),
                'B' => Ok(Agent::Bob),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let len = owners.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(bad());
        }
        Self::from_owners(len.trailing_zeros(), owners)
    }

    /// Alice owns the leaves reached through an even-`k` path, Bob the odd-`k` ones.
    pub fn level_parity(n: u32, k: u32) -> Result<Self, ProtocolError> {
        let tree = MzTree::new(n)?;
        if k == 0 || k > n {
            return Err(ProtocolError::LevelOutOfRange { k, n });
        }
        let owners = tree
            .leaves()
            .map(|leaf| {
                let parity = tree.parity_of_leaf(leaf)?;
                Ok(if parity.is_odd(k) { Agent::Bob } else { Agent::Alice })
            })
            .collect::<Result<Vec<_>, ProtocolError>>()?;
        Ok(Self { levels: n, owners })
    }

    /// Bob owns leaves `1..=m`, Alice the rest.
    pub fn bob_first(n: u32, m: u64) -> Result<Self, ProtocolError> {
        let tree = MzTree::new(n)?;
        if m > tree.leaf_count() {
            return Err(ProtocolError::ShareOutOfRange { m, max: tree.leaf_count() });
        }
        let owners = tree
            .leaves()
            .map(|leaf| if leaf <= m { Agent::Bob } else { Agent::Alice })
            .collect();
        Ok(Self { levels: n, owners })
    }

    /// Even split: Bob holds the left half. Coincides with `level_parity(n, 1)`.
    pub fn balanced(n: u32) -> Result<Self, ProtocolError> {
        Self::bob_first(n, 1u64 << (n.clamp(1, 63) - 1))
    }

    /// Alice holds only `leaf`, Bob everything else.
    pub fn single_alice(n: u32, leaf: u64) -> Result<Self, ProtocolError> {
        let tree = MzTree::new(n)?;
        tree.check_leaf(leaf)?;
        let owners = tree
            .leaves()
            .map(|l| if l == leaf { Agent::Alice } else { Agent::Bob })
            .collect();
        Ok(Self { levels: n, owners })
    }

    /// Two-detector layout: every left output of a final interferometer goes
    /// to Alice's detector, every right output to Bob's.
    pub fn two_detector(n: u32) -> Result<Self, ProtocolError> {
        let schedule = circuit::delay_schedule(n)?;
        let owners = (1..=1u64 << n)
            .map(|leaf| match schedule.port_of_leaf(leaf) {
                Ok(FinalPort::Left) => Ok(Agent::Alice),
                Ok(FinalPort::Right) => Ok(Agent::Bob),
                Err(e) => Err(e.into()),
            })
            .collect::<Result<Vec<_>, ProtocolError>>()?;
        Ok(Self { levels: n, owners })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn leaf_count(&self) -> u64 {
        self.owners.len() as u64
    }

    /// Owner of a 1-based leaf. Panics on an out-of-range leaf.
    pub fn owner(&self, leaf: u64) -> Agent {
        self.owners[(leaf - 1) as usize]
    }

    pub fn owners(&self) -> &[Agent] {
        &self.owners
    }

    pub fn leaves_of(&self, agent: Agent) -> impl Iterator<Item = u64> + '_ {
        self.owners
            .iter()
            .enumerate()
            .filter(move |(_, a)| **a == agent)
            .map(|(i, _)| i as u64 + 1)
    }

    pub fn count(&self, agent: Agent) -> u64 {
        self.owners.iter().filter(|a| **a == agent).count() as u64
    }

    /// Bob's share `m`.
    pub fn m(&self) -> u64 {
        self.count(Agent::Bob)
    }

    pub fn pattern(&self) -> String {
        self.owners.iter().map(|a| a.letter()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClickResult {
    Click { leaf: u64, owner: Agent, delay: u64 },
    Lost,
}

/// What one agent sees during the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum View {
    /// One of the agent's own detectors clicked, `delay` in units of delta.
    Click { leaf: u64, delay: u64 },
    Silence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GameOutcome {
    pub result: ClickResult,
    pub alice_view: View,
    pub bob_view: View,
}

impl GameOutcome {
    fn from_click(leaf: Option<u64>, assignment: &DetectorAssignment, schedule: &DelaySchedule) -> Result<Self, ProtocolError> {
        let Some(leaf) = leaf else {
            return Ok(Self { result: ClickResult::Lost, alice_view: View::Silence, bob_view: View::Silence });
        };
        let owner = assignment.owner(leaf);
        let delay = schedule.leaf_delay(leaf)?;
        let click = View::Click { leaf, delay };
        let (alice_view, bob_view) = match owner {
            Agent::Alice => (click, View::Silence),
            Agent::Bob => (View::Silence, click),
        };
        Ok(Self { result: ClickResult::Click { leaf, owner, delay }, alice_view, bob_view })
    }

    pub fn clicker(&self) -> Option<Agent> {
        match self.result {
            ClickResult::Click { owner, .. } => Some(owner),
            ClickResult::Lost => None,
        }
    }

    pub fn view(&self, agent: Agent) -> View {
        match agent {
            Agent::Alice => self.alice_view,
            Agent::Bob => self.bob_view,
        }
    }
}

/// The other party's strings still consistent with an agent's observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Knowledge {
    pub compatible: Vec<BitString>,
    pub bits_gained: f64,
}

impl Knowledge {
    pub fn exact(other: BitString) -> Self {
        Self { compatible: vec![other], bits_gained: f64::from(other.len()) }
    }

    fn from_set(n: u32, compatible: Vec<BitString>) -> Self {
        let bits_gained = f64::from(n) - (compatible.len() as f64).log2();
        Self { compatible, bits_gained }
    }

    pub fn is_exact(&self) -> bool {
        self.compatible.len() == 1
    }

    pub fn contains(&self, s: &BitString) -> bool {
        self.compatible.contains(s)
    }
}

fn check_assignment(tree: &MzTree, assignment: &DetectorAssignment) -> Result<(), ProtocolError> {
    if assignment.leaf_count() != tree.leaf_count() {
        return Err(ProtocolError::AssignmentSize {
            got: assignment.owners.len(),
            expected: tree.leaf_count(),
        });
    }
    Ok(())
}

/// Plays one round. Noise-free runs are deterministic and ignore `rng`;
/// lossy or jittery runs sample the click from the exact leaf distribution.
pub fn run_game(
    x: &BitString,
    y: &BitString,
    assignment: &DetectorAssignment,
    noise: &StageNoise,
    rng: Option<&mut dyn RngCore>,
) -> Result<GameOutcome, ProtocolError> {
    let tree = MzTree::new(x.len())?;
    check_assignment(&tree, assignment)?;
    let schedule = circuit::delay_schedule(tree.levels())?;

    let leaf = if noise.is_ideal() {
        let dist = circuit::propagate(&tree, x, y, noise)?;
        Some(dist.most_likely())
    } else {
        let rng = rng.ok_or(ProtocolError::NeedsRng)?;
        let dist = circuit::propagate_with_jitter(&tree, x, y, noise, rng)?;
        dist.sample(rng.gen::<f64>())
    };
    GameOutcome::from_click(leaf, assignment, &schedule)
}

/// The clicking agent reads every parity off the leaf and XORs its own string.
pub fn decode_clicker(leaf: u64, own: &BitString) -> Result<BitString, ProtocolError> {
    let tree = MzTree::new(own.len())?;
    let parity = tree.parity_of_leaf(leaf)?;
    Ok(own.xor(parity.as_bits())?)
}

/// Two-detector decode: the detector side plus the arrival delay pin down the leaf.
pub fn decode_time_multiplexed(owner: Agent, delay: u64, own: &BitString) -> Result<BitString, ProtocolError> {
    let schedule = circuit::delay_schedule(own.len())?;
    let port = match owner {
        Agent::Alice => FinalPort::Left,
        Agent::Bob => FinalPort::Right,
    };
    let leaf = schedule.leaf_from_port_and_delay(port, delay)?;
    decode_clicker(leaf, own)
}

/// What `owner` learns from hearing nothing: the other's string must route
/// the photon onto a leaf `owner` does not hold.
pub fn decode_silent(
    assignment: &DetectorAssignment,
    own: &BitString,
    owner: Agent,
) -> Result<Knowledge, ProtocolError> {
    let n = own.len();
    let tree = MzTree::new(n)?;
    check_assignment(&tree, assignment)?;
    if assignment.count(owner.other()) == 0 {
        return Err(ProtocolError::OwnsAllDetectors(owner));
    }
    let mut compatible = Vec::new();
    for other in BitString::all(n)? {
        let (_, leaf) = circuit::parity_route(own, &other)?;
        if assignment.owner(leaf) != owner {
            compatible.push(other);
        }
    }
    Ok(Knowledge::from_set(n, compatible))
}

/// Win iff the clicker knows the other string exactly and the silent agent
/// gained at least one bit. Lost photons never win.
pub fn check_win(outcome: &GameOutcome, clicker: &Knowledge, silent: &Knowledge) -> bool {
    match outcome.result {
        ClickResult::Lost => false,
        ClickResult::Click { .. } => {
            clicker.is_exact() && silent.bits_gained >= 1.0 - WIN_TOLERANCE
        }
    }
}

/// Full record of one round: outcome, both decodes, verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct GameReport {
    pub x: BitString,
    pub y: BitString,
    pub outcome: GameOutcome,
    /// `(clicker, decoded other string)`.
    pub clicker_decode: Option<(Agent, BitString)>,
    pub silent_knowledge: Option<(Agent, Knowledge)>,
    pub win: bool,
}

pub fn play(
    x: &BitString,
    y: &BitString,
    assignment: &DetectorAssignment,
    noise: &StageNoise,
    rng: Option<&mut dyn RngCore>,
) -> Result<GameReport, ProtocolError> {
    let outcome = run_game(x, y, assignment, noise, rng)?;
    let ClickResult::Click { leaf, owner, .. } = outcome.result else {
        return Ok(GameReport {
            x: *x,
            y: *y,
            outcome,
            clicker_decode: None,
            silent_knowledge: None,
            win: false,
        });
    };
    let (own, silent_own) = match owner {
        Agent::Alice => (x, y),
        Agent::Bob => (y, x),
    };
    let decoded = decode_clicker(leaf, own)?;
    let silent = decode_silent(assignment, silent_own, owner.other())?;
    let win = check_win(&outcome, &Knowledge::exact(decoded), &silent);
    Ok(GameReport {
        x: *x,
        y: *y,
        outcome,
        clicker_decode: Some((owner, decoded)),
        silent_knowledge: Some((owner.other(), silent)),
        win,
    })
}

impl FromStr for Agent {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" | "alice" => Ok(Agent::Alice),
            "b" | "bob" => Ok(Agent::Bob),
            _ => Err(ProtocolError::BadPattern(s.to_string())),
        }
    }
}
