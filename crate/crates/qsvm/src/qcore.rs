//! Dense statevector simulator for circuits of up to 12 qubits.
//!
//! States are vectors of 2ⁿ complex amplitudes. Qubit 0 is the **most
//! significant bit** of the basis-state index, so for a 4-qubit state the
//! amplitude `a[i]` belongs to the ket |q₁q₂q₃q₄⟩ whose bits spell `i` in
//! binary, q₁ first. This keeps amplitude indices a₀…a₁₅ aligned with the
//! usual written ordering of kets.
//!
//! Exact execution applies each gate's unitary to the statevector. Noisy
//! execution is trajectory-based: after every gate, a uniformly random
//! non-identity Pauli is applied to the touched qubits with the configured
//! depolarizing probability, and measured bits are flipped independently
//! with the readout error probability. Every trajectory draws from its own
//! seeded stream (`seed + trajectory index`), so results are reproducible
//! regardless of how trajectories are scheduled.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuits::Circuit;

pub type C64 = Complex64;

/// Construction tolerance: unitarity, norm of hand-built states.
pub const TOL_CONSTRUCT: f64 = 1e-10;
/// Propagation tolerance: norms and density matrices after circuit execution.
pub const TOL_PROPAGATE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum QcoreError {
    #[error("amplitude vector has length {got}, expected {expected}")]
    BadLength { got: usize, expected: usize },
    #[error("state norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("matrix is not unitary (max |U†U - I| = {0:.3e})")]
    NotUnitary(f64),
    #[error("gate acts on {arity} qubit(s) but {given} target(s) were given")]
    ArityMismatch { arity: usize, given: usize },
    #[error("target qubit {qubit} out of range for {num_qubits}-qubit state")]
    TargetOutOfRange { qubit: usize, num_qubits: usize },
    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),
    #[error("circuit acts on {circuit} qubits but the state has {state}")]
    QubitCountMismatch { circuit: usize, state: usize },
    #[error("shots must be positive")]
    ZeroShots,
    #[error("noise probability {name} = {value} outside [0, 1]")]
    BadProbability { name: &'static str, value: f64 },
    #[error("counts table is empty")]
    EmptyCounts,
    #[error("matrix dimension {0} is not a power of two")]
    BadDimension(usize),
}

// ---------------------------------------------------------------------------
// StateVector
// ---------------------------------------------------------------------------

/// A pure n-qubit state: 2ⁿ complex amplitudes with unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// The all-zeros basis state |0…0⟩.
    pub fn zero(num_qubits: usize) -> Self {
        assert!(num_qubits >= 1, "at least one qubit");
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[0] = C64::new(1.0, 0.0);
        Self { num_qubits, amplitudes }
    }

    /// The computational basis state with the given index (qubit 0 = MSB).
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        assert!(index < (1 << num_qubits));
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { num_qubits, amplitudes }
    }

    /// Builds a state from raw amplitudes, validating length and unit norm.
    pub fn new(num_qubits: usize, amplitudes: Vec<C64>) -> Result<Self, QcoreError> {
        let expected = 1usize << num_qubits;
        if amplitudes.len() != expected {
            return Err(QcoreError::BadLength { got: amplitudes.len(), expected });
        }
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > TOL_CONSTRUCT {
            return Err(QcoreError::NotNormalized((norm2 - 1.0).abs()));
        }
        Ok(Self { num_qubits, amplitudes })
    }

    pub(crate) fn from_raw(num_qubits: usize, amplitudes: Vec<C64>) -> Self {
        Self { num_qubits, amplitudes }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Born-rule probabilities |aᵢ|² for every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Bitstring for a basis index, qubit 0 first.
    pub fn bitstring(&self, index: usize) -> String {
        index_to_bitstring(index, self.num_qubits)
    }

    /// Compares two states up to a global phase.
    pub fn approx_eq_up_to_phase(&self, other: &Self, tol: f64) -> bool {
        if self.num_qubits != other.num_qubits {
            return false;
        }
        // Align phase on the largest amplitude of `self`.
        let (k, _) = self
            .amplitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().partial_cmp(&b.1.norm_sqr()).unwrap())
            .unwrap();
        if other.amplitudes[k].norm() < tol {
            return false;
        }
        let phase = self.amplitudes[k] / other.amplitudes[k];
        let phase = phase / C64::new(phase.norm(), 0.0);
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .all(|(a, b)| (a - b * phase).norm() <= tol)
    }
}

pub fn index_to_bitstring(index: usize, num_bits: usize) -> String {
    (0..num_bits)
        .map(|q| if index >> (num_bits - 1 - q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn bitstring_to_index(bits: &str) -> usize {
    bits.chars().fold(0, |acc, c| (acc << 1) | usize::from(c == '1'))
}

// ---------------------------------------------------------------------------
// GateMatrix
// ---------------------------------------------------------------------------

/// A 2ᵏ×2ᵏ unitary acting on k qubits, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GateMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl GateMatrix {
    /// Validates the unitarity condition U†U = UU† = I within 1e-10.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self, QcoreError> {
        if !dim.is_power_of_two() || dim < 2 {
            return Err(QcoreError::BadDimension(dim));
        }
        if entries.len() != dim * dim {
            return Err(QcoreError::BadLength { got: entries.len(), expected: dim * dim });
        }
        let m = Self { dim, entries };
        let dev = m.unitarity_deviation();
        if dev > TOL_CONSTRUCT {
            return Err(QcoreError::NotUnitary(dev));
        }
        Ok(m)
    }

    fn from_rows_unchecked(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            entries.extend_from_slice(row);
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of qubits the gate acts on (log₂ of the dimension).
    pub fn arity(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entry(r, c).conj();
            }
        }
        Self { dim: d, entries }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut entries = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entry(r, k);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for c in 0..d {
                    entries[r * d + c] += a * rhs.entry(k, c);
                }
            }
        }
        Self { dim: d, entries }
    }

    /// max |U†U − I| over all entries.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.dagger().matmul(self);
        let d = self.dim;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let expect = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((p.entry(r, c) - expect).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Named gates
// ---------------------------------------------------------------------------

/// Named gates understood by the simulator. Controlled tags list the control
/// first in the target vector; `CcRy` lists both controls before the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", content = "params", rename_all = "kebab-case")]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    /// Ry(φ) = [[cos φ/2, −sin φ/2], [sin φ/2, cos φ/2]].
    Ry(f64),
    /// H(θ) = [[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]]; Hermitian and unitary.
    HTheta(f64),
    Cnot,
    /// X on the target when the control is |0⟩.
    ZeroCx,
    CRy(f64),
    /// Doubly-controlled Ry; targets are (control, control, target).
    CcRy(f64),
    /// H(θ) on the target when the control is |1⟩.
    CHTheta(f64),
    /// H(θ) on the target when the control is |0⟩.
    ZeroCHTheta(f64),
    /// diag(1, 1, 1, e^{iφ}).
    CPhase(f64),
    Swap,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::H
            | GateKind::X
            | GateKind::Y
            | GateKind::Z
            | GateKind::S
            | GateKind::Sdg
            | GateKind::Ry(_)
            | GateKind::HTheta(_) => 1,
            GateKind::Cnot
            | GateKind::ZeroCx
            | GateKind::CRy(_)
            | GateKind::CHTheta(_)
            | GateKind::ZeroCHTheta(_)
            | GateKind::CPhase(_)
            | GateKind::Swap => 2,
            GateKind::CcRy(_) => 3,
        }
    }
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}
const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

fn ry_matrix(phi: f64) -> GateMatrix {
    let (s, c) = (phi / 2.0).sin_cos();
    GateMatrix::from_rows_unchecked(&[&[re(c), re(-s)], &[re(s), re(c)]])
}

fn htheta_matrix(theta: f64) -> GateMatrix {
    let (s, c) = (2.0 * theta).sin_cos();
    GateMatrix::from_rows_unchecked(&[&[re(c), re(s)], &[re(s), re(-c)]])
}

/// Embeds a 2×2 matrix as the one-controlled block of a 4×4 gate; with
/// `on_zero` the gate instead fires when the control is |0⟩.
fn controlled(u: &GateMatrix, on_zero: bool) -> GateMatrix {
    assert_eq!(u.dim, 2);
    let mut rows = [[ZERO; 4]; 4];
    let (idle, act) = if on_zero { (1, 0) } else { (0, 1) };
    for b in 0..2 {
        rows[idle * 2 + b][idle * 2 + b] = ONE;
        for c in 0..2 {
            rows[act * 2 + b][act * 2 + c] = u.entry(b, c);
        }
    }
    GateMatrix::from_rows_unchecked(&[&rows[0], &rows[1], &rows[2], &rows[3]])
}

/// Returns the exact unitary for a named gate.
pub fn gate_matrix(kind: &GateKind) -> GateMatrix {
    let h = GateMatrix::from_rows_unchecked(&[
        &[re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)],
        &[re(FRAC_1_SQRT_2), re(-FRAC_1_SQRT_2)],
    ]);
    match kind {
        GateKind::H => h,
        GateKind::X => GateMatrix::from_rows_unchecked(&[&[ZERO, ONE], &[ONE, ZERO]]),
        GateKind::Y => GateMatrix::from_rows_unchecked(&[
            &[ZERO, C64::new(0.0, -1.0)],
            &[C64::new(0.0, 1.0), ZERO],
        ]),
        GateKind::Z => GateMatrix::from_rows_unchecked(&[&[ONE, ZERO], &[ZERO, re(-1.0)]]),
        GateKind::S => GateMatrix::from_rows_unchecked(&[&[ONE, ZERO], &[ZERO, C64::new(0.0, 1.0)]]),
        GateKind::Sdg => {
            GateMatrix::from_rows_unchecked(&[&[ONE, ZERO], &[ZERO, C64::new(0.0, -1.0)]])
        }
        GateKind::Ry(phi) => ry_matrix(*phi),
        GateKind::HTheta(theta) => htheta_matrix(*theta),
        GateKind::Cnot => controlled(&gate_matrix(&GateKind::X), false),
        GateKind::ZeroCx => controlled(&gate_matrix(&GateKind::X), true),
        GateKind::CRy(phi) => controlled(&ry_matrix(*phi), false),
        GateKind::CHTheta(theta) => controlled(&htheta_matrix(*theta), false),
        GateKind::ZeroCHTheta(theta) => controlled(&htheta_matrix(*theta), true),
        GateKind::CPhase(phi) => {
            let mut rows = [[ZERO; 4]; 4];
            for i in 0..3 {
                rows[i][i] = ONE;
            }
            rows[3][3] = C64::from_polar(1.0, *phi);
            GateMatrix::from_rows_unchecked(&[&rows[0], &rows[1], &rows[2], &rows[3]])
        }
        GateKind::Swap => {
            let mut rows = [[ZERO; 4]; 4];
            rows[0][0] = ONE;
            rows[1][2] = ONE;
            rows[2][1] = ONE;
            rows[3][3] = ONE;
            GateMatrix::from_rows_unchecked(&[&rows[0], &rows[1], &rows[2], &rows[3]])
        }
        GateKind::CcRy(phi) => {
            // block-diag(I₆, Ry(φ)) on |c₁c₂t⟩: rotation only for c₁ = c₂ = 1.
            let r = ry_matrix(*phi);
            let mut rows = vec![vec![ZERO; 8]; 8];
            for i in 0..6 {
                rows[i][i] = ONE;
            }
            for b in 0..2 {
                for c in 0..2 {
                    rows[6 + b][6 + c] = r.entry(b, c);
                }
            }
            let refs: Vec<&[C64]> = rows.iter().map(|r| r.as_slice()).collect();
            GateMatrix::from_rows_unchecked(&refs)
        }
    }
}

// ---------------------------------------------------------------------------
// GateApplication
// ---------------------------------------------------------------------------

/// A gate placed on specific qubits. For controlled gates the first target is
/// the control; `Raw` wraps an arbitrary unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum GateSpec {
    Named(GateKind),
    Raw(GateMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateApplication {
    pub gate: GateSpec,
    pub targets: Vec<usize>,
}

impl GateApplication {
    pub fn named(kind: GateKind, targets: Vec<usize>) -> Self {
        Self { gate: GateSpec::Named(kind), targets }
    }

    pub fn raw(matrix: GateMatrix, targets: Vec<usize>) -> Self {
        Self { gate: GateSpec::Raw(matrix), targets }
    }

    pub fn arity(&self) -> usize {
        match &self.gate {
            GateSpec::Named(k) => k.arity(),
            GateSpec::Raw(m) => m.arity(),
        }
    }

    pub fn matrix(&self) -> GateMatrix {
        match &self.gate {
            GateSpec::Named(k) => gate_matrix(k),
            GateSpec::Raw(m) => m.clone(),
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<(), QcoreError> {
        if self.arity() != self.targets.len() {
            return Err(QcoreError::ArityMismatch { arity: self.arity(), given: self.targets.len() });
        }
        for (i, &q) in self.targets.iter().enumerate() {
            if q >= num_qubits {
                return Err(QcoreError::TargetOutOfRange { qubit: q, num_qubits });
            }
            if self.targets[..i].contains(&q) {
                return Err(QcoreError::DuplicateTarget(q));
            }
        }
        Ok(())
    }
}

impl fmt::Display for GateApplication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.gate {
            GateSpec::Named(k) => write!(f, "{:?} on {:?}", k, self.targets),
            GateSpec::Raw(m) => write!(f, "unitary({}×{}) on {:?}", m.dim, m.dim, self.targets),
        }
    }
}

// ---------------------------------------------------------------------------
// Gate application and exact execution
// ---------------------------------------------------------------------------

fn apply_matrix_in_place(amps: &mut [C64], num_qubits: usize, targets: &[usize], m: &GateMatrix) {
    let k = targets.len();
    let local_dim = 1usize << k;
    debug_assert_eq!(m.dim, local_dim);
    // Bit shift of each target within the global index; targets[0] is the
    // most significant bit of the gate-local index.
    let shifts: Vec<usize> = targets.iter().map(|&q| num_qubits - 1 - q).collect();
    let target_mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
    let full_dim = amps.len();

    let mut gathered = vec![ZERO; local_dim];
    let mut base = 0usize;
    loop {
        // `base` iterates over all indices whose target bits are zero.
        for (l, g) in gathered.iter_mut().enumerate() {
            let mut idx = base;
            for (j, &s) in shifts.iter().enumerate() {
                if l >> (k - 1 - j) & 1 == 1 {
                    idx |= 1 << s;
                }
            }
            *g = amps[idx];
        }
        for l in 0..local_dim {
            let mut acc = ZERO;
            for (c, g) in gathered.iter().enumerate() {
                acc += m.entry(l, c) * g;
            }
            let mut idx = base;
            for (j, &s) in shifts.iter().enumerate() {
                if l >> (k - 1 - j) & 1 == 1 {
                    idx |= 1 << s;
                }
            }
            amps[idx] = acc;
        }
        // Advance `base` to the next index with zeroed target bits.
        base = (base | target_mask) + 1;
        if base >= full_dim {
            break;
        }
        base &= !target_mask;
    }
}

/// Applies one gate to the state, embedding its unitary on the target qubits.
pub fn apply_gate(state: &StateVector, app: &GateApplication) -> Result<StateVector, QcoreError> {
    app.validate(state.num_qubits)?;
    let m = app.matrix();
    if let GateSpec::Raw(raw) = &app.gate {
        let dev = raw.unitarity_deviation();
        if dev > TOL_CONSTRUCT {
            return Err(QcoreError::NotUnitary(dev));
        }
    }
    let mut amps = state.amplitudes.clone();
    apply_matrix_in_place(&mut amps, state.num_qubits, &app.targets, &m);
    Ok(StateVector::from_raw(state.num_qubits, amps))
}

/// Runs a circuit exactly, returning the final statevector.
pub fn run_exact(circuit: &Circuit, initial: &StateVector) -> Result<StateVector, QcoreError> {
    if circuit.num_qubits() != initial.num_qubits {
        return Err(QcoreError::QubitCountMismatch {
            circuit: circuit.num_qubits(),
            state: initial.num_qubits,
        });
    }
    let mut amps = initial.amplitudes.clone();
    for app in circuit.gates() {
        app.validate(initial.num_qubits)?;
        if let GateSpec::Raw(raw) = &app.gate {
            let dev = raw.unitarity_deviation();
            if dev > TOL_CONSTRUCT {
                return Err(QcoreError::NotUnitary(dev));
            }
        }
        apply_matrix_in_place(&mut amps, initial.num_qubits, &app.targets, &app.matrix());
    }
    Ok(StateVector::from_raw(initial.num_qubits, amps))
}

// ---------------------------------------------------------------------------
// Sampling and noise
// ---------------------------------------------------------------------------

/// Measurement record: a histogram of observed bitstrings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub shots: u64,
    pub num_qubits: usize,
    pub table: BTreeMap<String, u64>,
}

impl Counts {
    pub fn get(&self, bits: &str) -> u64 {
        self.table.get(bits).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.table.values().sum()
    }

    /// Relative frequency of a bitstring.
    pub fn frequency(&self, bits: &str) -> f64 {
        self.get(bits) as f64 / self.shots as f64
    }
}

/// Per-gate depolarizing plus independent readout-flip noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub depolarizing_prob_1q: f64,
    pub depolarizing_prob_2q: f64,
    pub readout_flip_prob: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64, readout: f64, seed: u64) -> Result<Self, QcoreError> {
        for (name, value) in [
            ("depolarizing_prob_1q", p1),
            ("depolarizing_prob_2q", p2),
            ("readout_flip_prob", readout),
        ] {
            if !(0.0..=1.0).contains(&value) || !value.is_finite() {
                return Err(QcoreError::BadProbability { name, value });
            }
        }
        Ok(Self {
            depolarizing_prob_1q: p1,
            depolarizing_prob_2q: p2,
            readout_flip_prob: readout,
            seed,
        })
    }

    /// Representative 2019-era superconducting-device error rates; these are
    /// configurable placeholders, not calibrated values.
    pub fn default_device(seed: u64) -> Self {
        Self {
            depolarizing_prob_1q: 0.004,
            depolarizing_prob_2q: 0.03,
            readout_flip_prob: 0.03,
            seed,
        }
    }

    pub fn noiseless(seed: u64) -> Self {
        Self { depolarizing_prob_1q: 0.0, depolarizing_prob_2q: 0.0, readout_flip_prob: 0.0, seed }
    }

    pub fn is_zero(&self) -> bool {
        self.depolarizing_prob_1q == 0.0
            && self.depolarizing_prob_2q == 0.0
            && self.readout_flip_prob == 0.0
    }
}

fn draw_index(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn flip_bits(index: usize, num_qubits: usize, p: f64, rng: &mut ChaCha8Rng) -> usize {
    if p == 0.0 {
        return index;
    }
    let mut out = index;
    for q in 0..num_qubits {
        if rng.gen::<f64>() < p {
            out ^= 1 << (num_qubits - 1 - q);
        }
    }
    out
}

/// Samples measurement shots from a state's Born distribution.
///
/// With a noise model attached, each measured bit is flipped independently
/// with `readout_flip_prob`; gate noise does not apply here (see
/// [`run_noisy`] for trajectory simulation). The draw stream is seeded by
/// `seed`, so identical inputs give identical counts.
pub fn sample(
    state: &StateVector,
    shots: u64,
    noise: Option<&NoiseModel>,
    seed: u64,
) -> Result<Counts, QcoreError> {
    if shots == 0 {
        return Err(QcoreError::ZeroShots);
    }
    let probs = state.probabilities();
    let flip = noise.map_or(0.0, |n| n.readout_flip_prob);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table: BTreeMap<String, u64> = BTreeMap::new();
    for _ in 0..shots {
        let drawn = draw_index(&probs, &mut rng);
        let observed = flip_bits(drawn, state.num_qubits, flip, &mut rng);
        *table.entry(index_to_bitstring(observed, state.num_qubits)).or_insert(0) += 1;
    }
    Ok(Counts { shots, num_qubits: state.num_qubits, table })
}

/// All 4ᵏ−1 non-identity Pauli labels on k qubits, encoded base-4
/// (0 = I, 1 = X, 2 = Y, 3 = Z per touched qubit).
fn apply_random_pauli(
    amps: &mut [C64],
    num_qubits: usize,
    targets: &[usize],
    rng: &mut ChaCha8Rng,
) {
    let k = targets.len();
    let combos = 4usize.pow(k as u32) - 1;
    let pick = rng.gen_range(1..=combos);
    let paulis = [GateKind::X, GateKind::Y, GateKind::Z];
    let mut code = pick;
    for &q in targets {
        let c = code % 4;
        code /= 4;
        if c > 0 {
            let m = gate_matrix(&paulis[c - 1]);
            apply_matrix_in_place(amps, num_qubits, &[q], &m);
        }
    }
}

fn run_one_trajectory(
    circuit: &Circuit,
    initial: &StateVector,
    noise: &NoiseModel,
    trajectory: u64,
) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed.wrapping_add(trajectory));
    let n = initial.num_qubits;
    let mut amps = initial.amplitudes.clone();
    for app in circuit.gates() {
        apply_matrix_in_place(&mut amps, n, &app.targets, &app.matrix());
        let p = if app.targets.len() == 1 {
            noise.depolarizing_prob_1q
        } else {
            noise.depolarizing_prob_2q
        };
        if p > 0.0 && rng.gen::<f64>() < p {
            apply_random_pauli(&mut amps, n, &app.targets, &mut rng);
        }
    }
    let probs: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
    let drawn = draw_index(&probs, &mut rng);
    flip_bits(drawn, n, noise.readout_flip_prob, &mut rng)
}

/// Monte-Carlo trajectory simulation of a circuit under depolarizing and
/// readout noise. Each shot is one trajectory with its own random stream
/// (`seed + trajectory index`); results are deterministic for a given seed
/// regardless of parallel scheduling.
pub fn run_noisy(
    circuit: &Circuit,
    initial: &StateVector,
    noise: &NoiseModel,
    shots: u64,
) -> Result<Counts, QcoreError> {
    if shots == 0 {
        return Err(QcoreError::ZeroShots);
    }
    if circuit.num_qubits() != initial.num_qubits {
        return Err(QcoreError::QubitCountMismatch {
            circuit: circuit.num_qubits(),
            state: initial.num_qubits,
        });
    }
    for app in circuit.gates() {
        app.validate(initial.num_qubits)?;
    }
    let n = initial.num_qubits;
    let outcomes: Vec<usize> = (0..shots)
        .into_par_iter()
        .map(|t| run_one_trajectory(circuit, initial, noise, t))
        .collect();
    let mut table: BTreeMap<String, u64> = BTreeMap::new();
    for o in outcomes {
        *table.entry(index_to_bitstring(o, n)).or_insert(0) += 1;
    }
    Ok(Counts { shots, num_qubits: n, table })
}

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

/// A single-qubit density matrix: 2×2 Hermitian, PSD, trace one.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix2 {
    entries: [[C64; 2]; 2],
}

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("trace deviates from 1 by {0:.3e}")]
    BadTrace(f64),
    #[error("negative eigenvalue {0:.3e}")]
    NotPositive(f64),
}

impl DensityMatrix2 {
    pub fn new(entries: [[C64; 2]; 2]) -> Result<Self, DensityError> {
        let herm = (entries[0][1] - entries[1][0].conj()).norm().max(
            entries[0][0].im.abs().max(entries[1][1].im.abs()),
        );
        if herm > TOL_PROPAGATE {
            return Err(DensityError::NotHermitian(herm));
        }
        let trace = entries[0][0].re + entries[1][1].re;
        if (trace - 1.0).abs() > TOL_PROPAGATE {
            return Err(DensityError::BadTrace((trace - 1.0).abs()));
        }
        let rho = Self { entries };
        let (lo, _) = rho.eigenvalues();
        if lo < -TOL_PROPAGATE {
            return Err(DensityError::NotPositive(lo));
        }
        Ok(rho)
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.entries[r][c]
    }

    pub fn trace(&self) -> f64 {
        self.entries[0][0].re + self.entries[1][1].re
    }

    /// Eigenvalues (ascending); real because the matrix is Hermitian.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let tr = self.trace();
        let det = (self.entries[0][0] * self.entries[1][1]
            - self.entries[0][1] * self.entries[1][0])
            .re;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        ((tr - disc) / 2.0, (tr + disc) / 2.0)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.entries[r][c] - other.entries[r][c]).norm());
            }
        }
        worst
    }
}

/// Reduced density matrix of one qubit: the partial trace of |ψ⟩⟨ψ| over all
/// other qubits.
pub fn reduced_density_matrix(
    state: &StateVector,
    keep_qubit: usize,
) -> Result<DensityMatrix2, QcoreError> {
    if keep_qubit >= state.num_qubits {
        return Err(QcoreError::TargetOutOfRange { qubit: keep_qubit, num_qubits: state.num_qubits });
    }
    let shift = state.num_qubits - 1 - keep_qubit;
    let bit = 1usize << shift;
    let mut rho = [[ZERO; 2]; 2];
    for (i, a) in state.amplitudes.iter().enumerate() {
        let bi = (i >> shift) & 1;
        for bj in 0..2 {
            let j = (i & !bit) | (bj << shift);
            rho[bi][bj] += a * state.amplitudes[j].conj();
        }
    }
    DensityMatrix2::new(rho).map_err(|e| match e {
        // A pure-state partial trace can only fail these checks through
        // numerical drift; surface it as a norm problem.
        DensityError::BadTrace(d) => QcoreError::NotNormalized(d),
        DensityError::NotHermitian(d) | DensityError::NotPositive(d) => {
            QcoreError::NotNormalized(d.abs())
        }
    })
}
