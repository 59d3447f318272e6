//! Circuit constructions and analysis.
//!
//! Builds the two training-data oracles, the short-depth HHL circuit for the
//! fixed matrix [[1, 0.5], [0.5, 1]] (eigenvalues 0.5 and 1.5), and the
//! deeper phase-estimation baseline it replaces; decomposes controlled
//! rotations into elementary gates; counts circuit depth by greedy ASAP
//! layering (gates on disjoint qubits share a layer, every elementary gate
//! occupies one layer slot); validates gate placement against a directed
//! coupling map.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_4;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::{C64, GateApplication, GateKind, GateMatrix, GateSpec};

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("expected {expected} angle(s), got {got}")]
    BadAngleCount { expected: String, got: usize },
    #[error("training-data size {0} must be a power of two and at least 2")]
    BadTrainingSize(u64),
    #[error("constructed oracle only supports M in {{2, 4}}, got {0}")]
    UnsupportedOracleSize(u64),
    #[error("angle is not finite")]
    NonFiniteAngle,
    #[error("control and target must differ")]
    SameQubit,
    #[error("circuit qubit {0} has no physical mapping")]
    UnmappedQubit(usize),
    #[error("coupling edge ({0}, {1}) references a qubit outside the device")]
    BadEdge(usize, usize),
    #[error("logical-to-physical mapping is not injective")]
    NonInjectiveMapping,
    #[error("unknown gate tag '{0}'")]
    UnknownTag(String),
    #[error("gate record is malformed: {0}")]
    BadGateRecord(String),
    #[error(transparent)]
    Core(#[from] crate::qcore::QcoreError),
}

// ---------------------------------------------------------------------------
// Circuit
// ---------------------------------------------------------------------------

/// An ordered list of gate applications on a fixed qubit register.
///
/// Qubit 0 is the most significant bit of basis-state indices (see
/// [`crate::qcore`]); circuits are immutable values once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    label: String,
    gates: Vec<GateApplication>,
}

impl Circuit {
    pub fn new(num_qubits: usize, label: impl Into<String>) -> Self {
        Self { num_qubits, label: label.into(), gates: Vec::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn gates(&self) -> &[GateApplication] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, kind: GateKind, targets: Vec<usize>) {
        debug_assert!(targets.iter().all(|&q| q < self.num_qubits));
        self.gates.push(GateApplication::named(kind, targets));
    }

    pub fn push_app(&mut self, app: GateApplication) {
        debug_assert!(app.targets.iter().all(|&q| q < self.num_qubits));
        self.gates.push(app);
    }

    pub fn extend(&mut self, apps: impl IntoIterator<Item = GateApplication>) {
        for app in apps {
            self.push_app(app);
        }
    }

    pub fn depth(&self) -> usize {
        depth(self)
    }
}

/// Circuit depth: the length of the longest gate path, computed by greedy
/// ASAP layering. Each gate lands on layer `1 + max(busy layer of its
/// qubits)`; gates on disjoint qubits share a layer.
pub fn depth(circuit: &Circuit) -> usize {
    let mut busy = vec![0usize; circuit.num_qubits()];
    let mut max_layer = 0;
    for app in circuit.gates() {
        let layer = 1 + app.targets.iter().map(|&q| busy[q]).max().unwrap_or(0);
        for &q in &app.targets {
            busy[q] = layer;
        }
        max_layer = max_layer.max(layer);
    }
    max_layer
}

// ---------------------------------------------------------------------------
// JSON serialization: {num_qubits, label, gates: [{tag, targets, params}]}
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct GateRecord {
    tag: String,
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    params: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CircuitDoc {
    num_qubits: usize,
    label: String,
    gates: Vec<GateRecord>,
}

fn gate_to_record(app: &GateApplication) -> GateRecord {
    let (tag, params): (&str, Vec<f64>) = match &app.gate {
        GateSpec::Named(kind) => match kind {
            GateKind::H => ("h", vec![]),
            GateKind::X => ("x", vec![]),
            GateKind::Y => ("y", vec![]),
            GateKind::Z => ("z", vec![]),
            GateKind::S => ("s", vec![]),
            GateKind::Sdg => ("sdg", vec![]),
            GateKind::Ry(p) => ("ry", vec![*p]),
            GateKind::HTheta(p) => ("htheta", vec![*p]),
            GateKind::Cnot => ("cnot", vec![]),
            GateKind::ZeroCx => ("zcx", vec![]),
            GateKind::CRy(p) => ("cry", vec![*p]),
            GateKind::CcRy(p) => ("ccry", vec![*p]),
            GateKind::CHTheta(p) => ("chtheta", vec![*p]),
            GateKind::ZeroCHTheta(p) => ("zchtheta", vec![*p]),
            GateKind::CPhase(p) => ("cphase", vec![*p]),
            GateKind::Swap => ("swap", vec![]),
        },
        GateSpec::Raw(m) => {
            let mut params = Vec::with_capacity(2 * m.entries().len());
            for e in m.entries() {
                params.push(e.re);
                params.push(e.im);
            }
            ("unitary", params)
        }
    };
    GateRecord { tag: tag.to_string(), targets: app.targets.clone(), params }
}

fn record_to_gate(rec: &GateRecord) -> Result<GateApplication, CircuitError> {
    fn one_param(rec: &GateRecord) -> Result<f64, CircuitError> {
        rec.params
            .first()
            .copied()
            .ok_or_else(|| CircuitError::BadGateRecord(format!("'{}' needs one parameter", rec.tag)))
    }
    let kind = match rec.tag.as_str() {
        "h" => GateKind::H,
        "x" => GateKind::X,
        "y" => GateKind::Y,
        "z" => GateKind::Z,
        "s" => GateKind::S,
        "sdg" => GateKind::Sdg,
        "ry" => GateKind::Ry(one_param(rec)?),
        "htheta" => GateKind::HTheta(one_param(rec)?),
        "cnot" => GateKind::Cnot,
        "zcx" => GateKind::ZeroCx,
        "cry" => GateKind::CRy(one_param(rec)?),
        "ccry" => GateKind::CcRy(one_param(rec)?),
        "chtheta" => GateKind::CHTheta(one_param(rec)?),
        "zchtheta" => GateKind::ZeroCHTheta(one_param(rec)?),
        "cphase" => GateKind::CPhase(one_param(rec)?),
        "swap" => GateKind::Swap,
        "unitary" => {
            let dim = 1usize << rec.targets.len();
            if rec.params.len() != 2 * dim * dim {
                return Err(CircuitError::BadGateRecord(format!(
                    "unitary on {} qubit(s) needs {} parameters, got {}",
                    rec.targets.len(),
                    2 * dim * dim,
                    rec.params.len()
                )));
            }
            let entries: Vec<C64> =
                rec.params.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
            let m = GateMatrix::new(dim, entries)?;
            return Ok(GateApplication::raw(m, rec.targets.clone()));
        }
        other => return Err(CircuitError::UnknownTag(other.to_string())),
    };
    Ok(GateApplication::named(kind, rec.targets.clone()))
}

pub fn circuit_to_json(circuit: &Circuit) -> String {
    let doc = CircuitDoc {
        num_qubits: circuit.num_qubits,
        label: circuit.label.clone(),
        gates: circuit.gates.iter().map(gate_to_record).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("circuit documents always serialize")
}

pub fn circuit_from_json(json: &str) -> Result<Circuit, CircuitError> {
    let doc: CircuitDoc =
        serde_json::from_str(json).map_err(|e| CircuitError::BadGateRecord(e.to_string()))?;
    let mut circuit = Circuit::new(doc.num_qubits, doc.label);
    for rec in &doc.gates {
        circuit.push_app(record_to_gate(rec)?);
    }
    Ok(circuit)
}

// ---------------------------------------------------------------------------
// Controlled-rotation decompositions
// ---------------------------------------------------------------------------

/// Controlled-Ry(θ) as four elementary gates:
/// CNOT, Ry(−θ/2), CNOT, Ry(θ/2). The X conjugation flips the rotation sign,
/// so the halves cancel when the control is |0⟩ and add to θ when it is |1⟩.
pub fn decompose_controlled_ry(
    theta: f64,
    control: usize,
    target: usize,
) -> Result<Vec<GateApplication>, CircuitError> {
    if control == target {
        return Err(CircuitError::SameQubit);
    }
    if !theta.is_finite() {
        return Err(CircuitError::NonFiniteAngle);
    }
    Ok(vec![
        GateApplication::named(GateKind::Cnot, vec![control, target]),
        GateApplication::named(GateKind::Ry(-theta / 2.0), vec![target]),
        GateApplication::named(GateKind::Cnot, vec![control, target]),
        GateApplication::named(GateKind::Ry(theta / 2.0), vec![target]),
    ])
}

/// Zero-controlled Ry(θ) in the same four-gate pattern with both half-angles
/// positive; fires when the control is |0⟩.
fn decompose_zero_controlled_ry(theta: f64, control: usize, target: usize) -> Vec<GateApplication> {
    vec![
        GateApplication::named(GateKind::Cnot, vec![control, target]),
        GateApplication::named(GateKind::Ry(theta / 2.0), vec![target]),
        GateApplication::named(GateKind::Cnot, vec![control, target]),
        GateApplication::named(GateKind::Ry(theta / 2.0), vec![target]),
    ]
}

/// Doubly-controlled Ry firing on a chosen control pattern, as an
/// alternating CNOT/Ry multiplexor whose four quarter-angles are the Walsh
/// coefficients of the firing pattern, closed by a redundant X pair on the
/// target. All ten gates touch the target, so the unit occupies ten layers.
fn cc_ry_unit(
    theta: f64,
    fire_on: (u8, u8),
    c1: usize,
    c2: usize,
    target: usize,
) -> Vec<GateApplication> {
    let sign = |v: u8| if v == 1 { -1.0 } else { 1.0 };
    let q = theta / 4.0;
    let a1 = q * sign(fire_on.1);
    let a2 = q * sign(fire_on.0) * sign(fire_on.1);
    let a3 = q * sign(fire_on.0);
    let a4 = q;
    vec![
        GateApplication::named(GateKind::Cnot, vec![c2, target]),
        GateApplication::named(GateKind::Ry(a1), vec![target]),
        GateApplication::named(GateKind::Cnot, vec![c1, target]),
        GateApplication::named(GateKind::Ry(a2), vec![target]),
        GateApplication::named(GateKind::Cnot, vec![c2, target]),
        GateApplication::named(GateKind::Ry(a3), vec![target]),
        GateApplication::named(GateKind::Cnot, vec![c1, target]),
        GateApplication::named(GateKind::Ry(a4), vec![target]),
        GateApplication::named(GateKind::X, vec![target]),
        GateApplication::named(GateKind::X, vec![target]),
    ]
}

/// CC-Ry(θ) (both controls on |1⟩) as exactly ten elementary gates.
pub fn decompose_cc_ry(
    theta: f64,
    controls: (usize, usize),
    target: usize,
) -> Result<Vec<GateApplication>, CircuitError> {
    let (c1, c2) = controls;
    if c1 == c2 || c1 == target || c2 == target {
        return Err(CircuitError::SameQubit);
    }
    if !theta.is_finite() {
        return Err(CircuitError::NonFiniteAngle);
    }
    Ok(cc_ry_unit(theta, (1, 1), c1, c2, target))
}

// ---------------------------------------------------------------------------
// Training-data oracles
// ---------------------------------------------------------------------------

/// The original training-data oracle. For two angles it is a 2-qubit circuit
/// (index qubit 0, data qubit 1): H on the index, a controlled rotation
/// Ry(2θ₁) on index |0⟩ and Ry(2θ₂) on index |1⟩, each in the four-gate
/// form, for nine elementary gates and depth 9. Four angles build the
/// 3-qubit variant whose four doubly-controlled rotations cost ten gates
/// each (depth 41).
pub fn build_oracle_original(angles: &[f64]) -> Result<Circuit, CircuitError> {
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(CircuitError::NonFiniteAngle);
    }
    match angles.len() {
        2 => {
            let mut c = Circuit::new(2, "oracle-original-m2");
            c.push(GateKind::H, vec![0]);
            c.extend(decompose_zero_controlled_ry(2.0 * angles[0], 0, 1));
            c.extend(decompose_controlled_ry(2.0 * angles[1], 0, 1)?);
            Ok(c)
        }
        4 => {
            let mut c = Circuit::new(3, "oracle-original-m4");
            c.push(GateKind::H, vec![0]);
            c.push(GateKind::H, vec![1]);
            for (i, &theta) in angles.iter().enumerate() {
                let fire = ((i >> 1) as u8, (i & 1) as u8);
                c.extend(cc_ry_unit(2.0 * theta, fire, 0, 1, 2));
            }
            Ok(c)
        }
        n => Err(CircuitError::BadAngleCount { expected: "2 or 4".into(), got: n }),
    }
}

/// The shallow training-data oracle: one Ry(2θᵢ) per qubit, no entanglement,
/// depth 1 at any size.
pub fn build_oracle_new(angles: &[f64]) -> Result<Circuit, CircuitError> {
    if angles.is_empty() {
        return Err(CircuitError::BadAngleCount { expected: "at least 1".into(), got: 0 });
    }
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(CircuitError::NonFiniteAngle);
    }
    let mut c = Circuit::new(angles.len(), "oracle-new");
    for (q, &theta) in angles.iter().enumerate() {
        c.push(GateKind::Ry(2.0 * theta), vec![q]);
    }
    Ok(c)
}

/// Depth of the original oracle as a function of the training-data count:
/// 3M² − 2M + 1 for M a power of two.
pub fn oracle_depth_formula(m: u64) -> Result<u64, CircuitError> {
    if m < 2 || !m.is_power_of_two() {
        return Err(CircuitError::BadTrainingSize(m));
    }
    Ok(3 * m * m - 2 * m + 1)
}

/// Qubit counts of the two oracles for M training data: (original, new).
pub fn oracle_qubit_counts(m: u64) -> Result<(u64, u64), CircuitError> {
    if m < 2 || !m.is_power_of_two() {
        return Err(CircuitError::BadTrainingSize(m));
    }
    Ok((m.trailing_zeros() as u64 + 1, m))
}

// ---------------------------------------------------------------------------
// HHL circuits
// ---------------------------------------------------------------------------

/// Rotation angles for the eigenvalue-inversion stage, with the ancilla
/// amplitude sin(2θ) = C/λ and C = 0.5 (the smaller eigenvalue):
/// θ_r1 = π/4 for λ = 0.5 and θ_r2 = arcsin(1/3)/2 for λ = 1.5.
pub fn paper_hhl_angles() -> (f64, f64) {
    (FRAC_PI_4, (1.0f64 / 3.0).asin() / 2.0)
}

/// Prepares (cos θ, sin θ) = (1, −1)/√2, the label vector of the fixed
/// two-point problem, on the solution register.
pub const BASELINE_Y_PREP_ANGLE: f64 = -FRAC_PI_4;

/// The qubit whose marginal carries the hyperplane coefficients in the
/// baseline circuit (the third register qubit).
pub const BASELINE_MEASURED_QUBIT: usize = 2;

fn hhl_gates(theta_r1: f64, theta_r2: f64, redundant_x_pair: bool) -> Circuit {
    let mut c = Circuit::new(4, "hhl-optimized");
    // Part A, phase estimation compiled for eigenvalues 0.5 and 1.5:
    // GHZ prep, then the zero-controlled X re-encodes the eigenvalue
    // register so the branches read |01⟩ (λ = 0.5) and |11⟩ (λ = 1.5).
    c.push(GateKind::H, vec![0]);
    c.push(GateKind::Cnot, vec![0, 1]);
    c.push(GateKind::Cnot, vec![1, 2]);
    c.push(GateKind::ZeroCx, vec![0, 1]);
    c.push(GateKind::X, vec![2]);
    if redundant_x_pair {
        // The figure's cancelling X pair; kept only for depth accounting.
        c.push(GateKind::X, vec![2]);
        c.push(GateKind::X, vec![2]);
    }
    c.push(GateKind::H, vec![0]);
    // Part B, eigenvalue inversion: the X maps the register values to their
    // reciprocal encoding, then each branch rotates the ancilla by its
    // 1/λ-proportional angle (the branch marker sits on qubit 2 here).
    c.push(GateKind::X, vec![1]);
    c.push(GateKind::CHTheta(theta_r1), vec![2, 3]);
    c.push(GateKind::ZeroCHTheta(theta_r2), vec![2, 3]);
    // Part C, inverse phase estimation.
    c.push(GateKind::H, vec![0]);
    c.push(GateKind::H, vec![2]);
    c
}

/// The short-depth HHL circuit for F = [[1, 0.5], [0.5, 1]] with
/// y = (1, −1): 4 qubits, 11 elementary gates, depth 7.
///
/// After exact execution the ancilla-flagged solution sits on the third
/// qubit: the amplitudes of |0001⟩ and |0011⟩ are proportional to the two
/// components of F⁻¹y.
pub fn build_hhl_optimized(theta_r1: f64, theta_r2: f64) -> Circuit {
    hhl_gates(theta_r1, theta_r2, false)
}

/// Same circuit with the cancelling X pair from the printed diagram left in
/// place. Functionally identical; only depth accounting differs.
pub fn build_hhl_optimized_with_x_pair(theta_r1: f64, theta_r2: f64) -> Circuit {
    hhl_gates(theta_r1, theta_r2, true)
}

/// The optimized-baseline classification circuit: textbook two-bit phase
/// estimation of e^{iπF} on the solution register, eigenvalue-inversion
/// rotations on the ancilla, and inverse phase estimation. 4 qubits,
/// depth 18, with the readout marginal on qubit 2 (the third qubit).
///
/// For the fixed F the controlled-U² degenerates to Z on the top register
/// qubit and controlled-U to S†+CNOT, since U = e^{iπF} = −iX.
pub fn build_baseline_qsvm(y_prep_angle: f64, theta_r1: f64, theta_r2: f64) -> Circuit {
    use GateKind::*;
    let mut c = Circuit::new(4, "baseline-qsvm");
    c.push(Ry(2.0 * y_prep_angle), vec![2]);
    // Forward phase estimation.
    c.push(H, vec![0]);
    c.push(H, vec![1]);
    c.push(Z, vec![0]);
    c.push(Sdg, vec![1]);
    c.push(Cnot, vec![1, 2]);
    c.push(H, vec![0]);
    c.push(CPhase(-std::f64::consts::FRAC_PI_2), vec![0, 1]);
    c.push(H, vec![1]);
    c.push(Cnot, vec![0, 1]);
    c.push(Cnot, vec![1, 0]);
    c.push(Cnot, vec![0, 1]);
    // Eigenvalue inversion, conditioned on the register marker qubit 0.
    c.push(ZeroCHTheta(theta_r1), vec![0, 3]);
    c.push(CHTheta(theta_r2), vec![0, 3]);
    // Inverse phase estimation (exact reversal of the forward block).
    c.push(Cnot, vec![0, 1]);
    c.push(Cnot, vec![1, 0]);
    c.push(Cnot, vec![0, 1]);
    c.push(H, vec![1]);
    c.push(CPhase(std::f64::consts::FRAC_PI_2), vec![0, 1]);
    c.push(H, vec![0]);
    c.push(Cnot, vec![1, 2]);
    c.push(S, vec![1]);
    c.push(Z, vec![0]);
    c.push(H, vec![1]);
    c.push(H, vec![0]);
    c
}

// ---------------------------------------------------------------------------
// Coupling-map validation
// ---------------------------------------------------------------------------

/// A directed device connectivity graph plus the logical-to-physical qubit
/// assignment. A 2-qubit gate is placeable iff its (control, target) pair
/// maps onto a directed edge.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingMap {
    pub num_physical_qubits: usize,
    pub directed_edges: BTreeSet<(usize, usize)>,
    pub logical_to_physical: BTreeMap<usize, usize>,
}

impl CouplingMap {
    pub fn new(
        num_physical_qubits: usize,
        directed_edges: BTreeSet<(usize, usize)>,
        logical_to_physical: BTreeMap<usize, usize>,
    ) -> Result<Self, CircuitError> {
        for &(a, b) in &directed_edges {
            if a >= num_physical_qubits || b >= num_physical_qubits {
                return Err(CircuitError::BadEdge(a, b));
            }
        }
        let mut seen = BTreeSet::new();
        for &p in logical_to_physical.values() {
            if !seen.insert(p) {
                return Err(CircuitError::NonInjectiveMapping);
            }
        }
        Ok(Self { num_physical_qubits, directed_edges, logical_to_physical })
    }

    /// The 5-qubit IBMQX2 device: arrows run from the allowed control to the
    /// allowed target.
    pub fn ibmqx2(logical_to_physical: BTreeMap<usize, usize>) -> Result<Self, CircuitError> {
        let edges: BTreeSet<(usize, usize)> =
            [(1, 0), (2, 0), (2, 1), (3, 2), (3, 4), (4, 2)].into_iter().collect();
        Self::new(5, edges, logical_to_physical)
    }
}

/// One disallowed gate placement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingViolation {
    pub gate_index: usize,
    pub gate: String,
    pub logical: (usize, usize),
    pub physical: (usize, usize),
}

impl fmt::Display for CouplingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gate #{} ({}) maps ({}, {}) onto Q{}→Q{}, which is not a directed edge",
            self.gate_index,
            self.gate,
            self.logical.0,
            self.logical.1,
            self.physical.0,
            self.physical.1
        )
    }
}

/// Checks every 2-qubit gate of the circuit against the coupling map.
/// Returns the empty list iff all placements are legal.
pub fn validate_coupling(
    circuit: &Circuit,
    map: &CouplingMap,
) -> Result<Vec<CouplingViolation>, CircuitError> {
    let mut violations = Vec::new();
    for (i, app) in circuit.gates().iter().enumerate() {
        if app.targets.len() != 2 {
            continue;
        }
        let (lc, lt) = (app.targets[0], app.targets[1]);
        let pc = *map.logical_to_physical.get(&lc).ok_or(CircuitError::UnmappedQubit(lc))?;
        let pt = *map.logical_to_physical.get(&lt).ok_or(CircuitError::UnmappedQubit(lt))?;
        if !map.directed_edges.contains(&(pc, pt)) {
            violations.push(CouplingViolation {
                gate_index: i,
                gate: app.to_string(),
                logical: (lc, lt),
                physical: (pc, pt),
            });
        }
    }
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{self, gate_matrix, run_exact, GateKind, StateVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Composes a gate list into its full unitary on `n` qubits by running
    /// it on every basis state.
    fn compose_unitary(gates: &[GateApplication], n: usize) -> Vec<Vec<C64>> {
        let dim = 1 << n;
        let mut cols = Vec::with_capacity(dim);
        for b in 0..dim {
            let mut state = StateVector::basis(n, b);
            for g in gates {
                state = qcore::apply_gate(&state, g).unwrap();
            }
            cols.push(state.amplitudes().to_vec());
        }
        // cols[b][r] = U[r][b]; transpose into rows.
        (0..dim).map(|r| (0..dim).map(|b| cols[b][r]).collect()).collect()
    }

    fn max_diff_vs(kind: &GateKind, gates: &[GateApplication], n: usize) -> f64 {
        let direct = gate_matrix(kind);
        let composed = compose_unitary(gates, n);
        let mut worst = 0.0f64;
        for r in 0..direct.dim() {
            for c in 0..direct.dim() {
                worst = worst.max((composed[r][c] - direct.entry(r, c)).norm());
            }
        }
        worst
    }

    #[test]
    fn controlled_ry_decomposition_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let theta = rng.gen_range(-6.0..6.0);
            let gates = decompose_controlled_ry(theta, 0, 1).unwrap();
            assert_eq!(gates.len(), 4);
            assert!(max_diff_vs(&GateKind::CRy(theta), &gates, 2) < 1e-9);
        }
    }

    #[test]
    fn controlled_ry_zero_angle_is_identity() {
        let gates = decompose_controlled_ry(0.0, 0, 1).unwrap();
        let u = compose_unitary(&gates, 2);
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((u[r][c] - C64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn controlled_ry_inactive_control_leaves_target() {
        let gates = decompose_controlled_ry(1.3, 0, 1).unwrap();
        let mut state = StateVector::basis(2, 0b01);
        for g in &gates {
            state = qcore::apply_gate(&state, g).unwrap();
        }
        assert!((state.amplitude(0b01).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cc_ry_decomposition_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..100 {
            let theta = rng.gen_range(-6.0..6.0);
            let gates = decompose_cc_ry(theta, (0, 1), 2).unwrap();
            assert_eq!(gates.len(), 10);
            assert!(max_diff_vs(&GateKind::CcRy(theta), &gates, 3) < 1e-9);
        }
    }

    #[test]
    fn cc_ry_controls_zero_leave_target() {
        let gates = decompose_cc_ry(2.1, (0, 1), 2).unwrap();
        let mut state = StateVector::zero(3);
        for g in &gates {
            state = qcore::apply_gate(&state, g).unwrap();
        }
        assert!((state.amplitude(0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cc_ry_controls_one_apply_rotation() {
        let theta = std::f64::consts::PI;
        let gates = decompose_cc_ry(theta, (0, 1), 2).unwrap();
        let mut state = StateVector::basis(3, 0b110);
        for g in &gates {
            state = qcore::apply_gate(&state, g).unwrap();
        }
        // Ry(π)|0⟩ = |1⟩.
        assert!((state.amplitude(0b111).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_depths_match_their_table() {
        let m2 = build_oracle_original(&[0.3, 0.9]).unwrap();
        assert_eq!(depth(&m2), 9);
        assert_eq!(m2.num_qubits(), 2);
        let m4 = build_oracle_original(&[0.1, 0.5, 0.9, 1.3]).unwrap();
        assert_eq!(depth(&m4), 41);
        assert_eq!(m4.num_qubits(), 3);
        for m in [2usize, 4, 8] {
            let new = build_oracle_new(&vec![0.4; m]).unwrap();
            assert_eq!(depth(&new), 1);
            assert_eq!(new.num_qubits(), m);
        }
    }

    #[test]
    fn depth_formula_matches_construction() {
        assert_eq!(oracle_depth_formula(2).unwrap(), 9);
        assert_eq!(oracle_depth_formula(4).unwrap(), 41);
        assert_eq!(oracle_depth_formula(8).unwrap(), 177);
        assert!(matches!(oracle_depth_formula(3), Err(CircuitError::BadTrainingSize(3))));
        assert!(matches!(oracle_depth_formula(1), Err(CircuitError::BadTrainingSize(1))));
        assert_eq!(depth(&build_oracle_original(&[0.2, 0.8]).unwrap()) as u64, oracle_depth_formula(2).unwrap());
        assert_eq!(
            depth(&build_oracle_original(&[0.2, 0.8, 1.1, 0.4]).unwrap()) as u64,
            oracle_depth_formula(4).unwrap()
        );
    }

    #[test]
    fn oracle_qubit_count_table() {
        assert_eq!(oracle_qubit_counts(2).unwrap(), (2, 2));
        assert_eq!(oracle_qubit_counts(4).unwrap(), (3, 4));
        assert_eq!(oracle_qubit_counts(8).unwrap(), (4, 8));
    }

    #[test]
    fn oracle_original_zero_angles_leave_data_qubit() {
        let c = build_oracle_original(&[0.0, 0.0]).unwrap();
        let state = run_exact(&c, &StateVector::zero(2)).unwrap();
        let rho = qcore::reduced_density_matrix(&state, 1).unwrap();
        assert!((rho.entry(0, 0).re - 1.0).abs() < 1e-12);
        assert!(rho.entry(1, 1).norm() < 1e-12);
    }

    #[test]
    fn oracle_original_prepares_stacked_state() {
        let (t1, t2) = (0.3, 1.1);
        let c = build_oracle_original(&[t1, t2]).unwrap();
        let state = run_exact(&c, &StateVector::zero(2)).unwrap();
        let w = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [w * t1.cos(), w * t1.sin(), w * t2.cos(), w * t2.sin()];
        for (i, e) in expect.iter().enumerate() {
            assert!((state.amplitude(i) - C64::new(*e, 0.0)).norm() < 1e-12, "slot {i}");
        }
    }

    #[test]
    fn oracle_m4_prepares_indexed_rotations() {
        let angles = [0.2, 0.7, 1.2, 1.7];
        let c = build_oracle_original(&angles).unwrap();
        let state = run_exact(&c, &StateVector::zero(3)).unwrap();
        for (i, &theta) in angles.iter().enumerate() {
            let c0 = state.amplitude(i << 1);
            let c1 = state.amplitude((i << 1) | 1);
            assert!((c0 - C64::new(theta.cos() / 2.0, 0.0)).norm() < 1e-12, "branch {i}");
            assert!((c1 - C64::new(theta.sin() / 2.0, 0.0)).norm() < 1e-12, "branch {i}");
        }
    }

    #[test]
    fn oracle_new_identity_at_zero_angles() {
        let c = build_oracle_new(&[0.0, 0.0]).unwrap();
        let state = run_exact(&c, &StateVector::zero(2)).unwrap();
        assert!((state.amplitude(0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hhl_depth_is_seven() {
        let (r1, r2) = paper_hhl_angles();
        assert_eq!(depth(&build_hhl_optimized(r1, r2)), 7);
    }

    #[test]
    fn hhl_x_pair_variant_matches_default_state() {
        let (r1, r2) = paper_hhl_angles();
        let a = run_exact(&build_hhl_optimized(r1, r2), &StateVector::zero(4)).unwrap();
        let b =
            run_exact(&build_hhl_optimized_with_x_pair(r1, r2), &StateVector::zero(4)).unwrap();
        assert!(a.approx_eq_up_to_phase(&b, 1e-12));
    }

    #[test]
    fn hhl_prefix_is_ghz() {
        let (r1, r2) = paper_hhl_angles();
        let c = build_hhl_optimized(r1, r2);
        let mut state = StateVector::zero(4);
        for g in &c.gates()[..3] {
            state = qcore::apply_gate(&state, g).unwrap();
        }
        let w = std::f64::consts::FRAC_1_SQRT_2;
        assert!((state.amplitude(0b0000) - C64::new(w, 0.0)).norm() < 1e-12);
        assert!((state.amplitude(0b1110) - C64::new(w, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn hhl_part_a_register_support() {
        // After the full phase-estimation part, only the |01⟩ and |11⟩
        // branches of the first two qubits carry amplitude.
        let (r1, r2) = paper_hhl_angles();
        let c = build_hhl_optimized(r1, r2);
        let mut state = StateVector::zero(4);
        for g in &c.gates()[..6] {
            state = qcore::apply_gate(&state, g).unwrap();
        }
        for (i, amp) in state.amplitudes().iter().enumerate() {
            let reg = i >> 2;
            if reg == 0b00 || reg == 0b10 {
                assert!(amp.norm() < 1e-9, "index {i}: {amp}");
            }
        }
    }

    #[test]
    fn baseline_depth_is_eighteen() {
        let (r1, r2) = paper_hhl_angles();
        assert_eq!(depth(&build_baseline_qsvm(BASELINE_Y_PREP_ANGLE, r1, r2)), 18);
    }

    #[test]
    fn empty_circuit_depth_zero() {
        assert_eq!(depth(&Circuit::new(3, "empty")), 0);
    }

    #[test]
    fn disjoint_gates_share_layers() {
        let mut c = Circuit::new(2, "parallel");
        c.push(GateKind::H, vec![0]);
        c.push(GateKind::H, vec![1]);
        assert_eq!(depth(&c), 1);
    }

    #[test]
    fn json_round_trip_preserves_circuit() {
        let (r1, r2) = paper_hhl_angles();
        let c = build_baseline_qsvm(BASELINE_Y_PREP_ANGLE, r1, r2);
        let json = circuit_to_json(&c);
        let back = circuit_from_json(&json).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn json_rejects_unknown_tag() {
        let doc = r#"{"num_qubits":1,"label":"x","gates":[{"tag":"frobnicate","targets":[0]}]}"#;
        assert!(matches!(circuit_from_json(doc), Err(CircuitError::UnknownTag(_))));
    }

    fn paper_mapping() -> BTreeMap<usize, usize> {
        // Algorithm qubits q1..q4 (indices 0..3) onto device Q2, Q1, Q0, Q3.
        [(0, 2), (1, 1), (2, 0), (3, 3)].into_iter().collect()
    }

    #[test]
    fn ghz_cnots_fit_ibmqx2() {
        let (r1, r2) = paper_hhl_angles();
        let c = build_hhl_optimized(r1, r2);
        let map = CouplingMap::ibmqx2(paper_mapping()).unwrap();
        let violations = validate_coupling(&c, &map).unwrap();
        // The GHZ-prep CNOTs (gates 1 and 2) must be legal under the
        // published assignment.
        assert!(!violations.iter().any(|v| v.gate_index == 1 || v.gate_index == 2), "{violations:?}");
    }

    #[test]
    fn non_edge_cnot_is_flagged() {
        let mut c = Circuit::new(2, "bad");
        c.push(GateKind::Cnot, vec![0, 1]);
        // Q0 → Q3 is not an edge.
        let map = CouplingMap::ibmqx2([(0, 0), (1, 3)].into_iter().collect()).unwrap();
        let violations = validate_coupling(&c, &map).unwrap();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].gate_index, 0);
        assert!(violations[0].to_string().contains("Q0→Q3"));
    }

    #[test]
    fn reversed_edge_direction_is_flagged() {
        let mut c = Circuit::new(2, "reversed");
        c.push(GateKind::Cnot, vec![0, 1]);
        // (1, 0) is an edge; (0, 1) is its reversal.
        let map = CouplingMap::ibmqx2([(0, 0), (1, 1)].into_iter().collect()).unwrap();
        let violations = validate_coupling(&c, &map).unwrap();
        assert_eq!(violations.len(), 1);
    }

    #[test]
    fn unmapped_qubit_errors() {
        let mut c = Circuit::new(2, "unmapped");
        c.push(GateKind::Cnot, vec![0, 1]);
        let map = CouplingMap::ibmqx2([(0, 0)].into_iter().collect()).unwrap();
        assert!(matches!(validate_coupling(&c, &map), Err(CircuitError::UnmappedQubit(1))));
    }
}
