//! Statevector simulation of ansatz circuits and self-inverse term
//! application.
//!
//! Terms apply two ways. The direct path multiplies the permutation and
//! phase straight into the system amplitudes — fast, no bookkeeping. The
//! oracle-faithful path runs the full register sequence an oracle-based
//! machine would: copy the partner into an ancilla register, mark the sign
//! on a sign ancilla, apply the entry as a controlled phase, uncompute the
//! sign, swap system and copy, uncompute the copy — charging one neighbor
//! query for each copy step and one entry query for each sign step against
//! the term's parent. Both paths produce the same system state; the
//! faithful path additionally proves the ancillas come back to zero
//! exactly, which holds because every step is a permutation or a unit
//! phase (no additive interference ever touches the ancillas).
//!
//! Registers live in one statevector, system qubits lowest: system [0, n),
//! then the partner-copy register [n, 2n), the sign ancilla at 2n, and the
//! test ancilla (for Hadamard tests) last.

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::sparse::{BasisIndex, ParentQueryCost, PhaseClass, QueryCounter, SelfInverseTerm};

/// One gate in an ansatz circuit. Rotation gates carry the index of the
/// parameter slot they read, not an angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    S(usize),
    SDagger(usize),
    /// (qubit, parameter slot)
    Rx(usize, usize),
    Ry(usize, usize),
    Rz(usize, usize),
    /// (control, target)
    Cnot(usize, usize),
    /// (qubit, qubit) — symmetric
    Cz(usize, usize),
}

impl Gate {
    fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::H(q)
            | Gate::S(q)
            | Gate::SDagger(q)
            | Gate::Rx(q, _)
            | Gate::Ry(q, _)
            | Gate::Rz(q, _) => (q, None),
            Gate::Cnot(c, t) => (c, Some(t)),
            Gate::Cz(a, b) => (a, Some(b)),
        }
    }

    fn parameter_slot(&self) -> Option<usize> {
        match *self {
            Gate::Rx(_, s) | Gate::Ry(_, s) | Gate::Rz(_, s) => Some(s),
            _ => None,
        }
    }
}

/// Parameterized circuit over a fixed gate set. Equality is structural
/// (same gates, same slots), which is what lets the estimator recognize
/// that a bra and ket preparation are the same circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzCircuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    parameter_count: usize,
}

/// Ansatz template file:
/// `{"layers": k, "entangler": "cnot_ring"|"cz_line", "rotations": ["ry", ...]}`.
#[derive(Deserialize)]
struct TemplateFile {
    layers: usize,
    entangler: String,
    rotations: Vec<String>,
}

impl AnsatzCircuit {
    pub fn new(num_qubits: usize, gates: Vec<Gate>, parameter_count: usize) -> Result<Self> {
        for gate in &gates {
            let (a, b) = gate.qubits();
            if a >= num_qubits || b.is_some_and(|b| b >= num_qubits) {
                return Err(Error::BadInput(format!(
                    "gate {gate:?} targets a qubit outside the {num_qubits}-qubit register"
                )));
            }
            if b == Some(a) {
                return Err(Error::BadInput(format!(
                    "gate {gate:?} uses the same qubit twice"
                )));
            }
            if let Some(slot) = gate.parameter_slot() {
                if slot >= parameter_count {
                    return Err(Error::BadInput(format!(
                        "gate {gate:?} reads parameter slot {slot} but only {parameter_count} \
                         exist"
                    )));
                }
            }
        }
        Ok(AnsatzCircuit {
            num_qubits,
            gates,
            parameter_count,
        })
    }

    /// The empty circuit (identity preparation).
    pub fn identity(num_qubits: usize) -> Self {
        AnsatzCircuit {
            num_qubits,
            gates: Vec::new(),
            parameter_count: 0,
        }
    }

    /// Expand a hardware-efficient template for `num_qubits` qubits: a
    /// rotation layer, then `layers` repetitions of entangler block plus
    /// rotation layer. Each rotation layer applies every requested rotation
    /// kind to every qubit, consuming parameter slots in order, so the
    /// circuit has (layers+1)·num_qubits·|rotations| parameters. The
    /// `cnot_ring` entangler links qubit q to q+1 cyclically (omitted on a
    /// single qubit); `cz_line` links neighbors without the wraparound.
    pub fn from_template_json(text: &str, num_qubits: usize) -> Result<Self> {
        let file: TemplateFile = serde_json::from_str(text)
            .map_err(|e| Error::BadInput(format!("ansatz template parse: {e}")))?;
        if num_qubits == 0 {
            return Err(Error::BadInput("ansatz needs at least one qubit".into()));
        }
        if file.rotations.is_empty() {
            return Err(Error::BadInput(
                "ansatz template lists no rotation gates".into(),
            ));
        }
        let mut gates = Vec::new();
        let mut next_slot = 0usize;
        let mut rotation_layer = |gates: &mut Vec<Gate>| -> Result<()> {
            for q in 0..num_qubits {
                for kind in &file.rotations {
                    let gate = match kind.as_str() {
                        "rx" => Gate::Rx(q, next_slot),
                        "ry" => Gate::Ry(q, next_slot),
                        "rz" => Gate::Rz(q, next_slot),
                        other => {
                            return Err(Error::BadInput(format!(
                                "rotation {other:?} is not one of rx, ry, rz"
                            )));
                        }
                    };
                    gates.push(gate);
                    next_slot += 1;
                }
            }
            Ok(())
        };
        rotation_layer(&mut gates)?;
        for _ in 0..file.layers {
            match file.entangler.as_str() {
                "cnot_ring" => {
                    if num_qubits >= 2 {
                        for q in 0..num_qubits {
                            gates.push(Gate::Cnot(q, (q + 1) % num_qubits));
                        }
                    }
                }
                "cz_line" => {
                    for q in 0..num_qubits.saturating_sub(1) {
                        gates.push(Gate::Cz(q, q + 1));
                    }
                }
                other => {
                    return Err(Error::BadInput(format!(
                        "entangler {other:?} is not one of cnot_ring, cz_line"
                    )));
                }
            }
            rotation_layer(&mut gates)?;
        }
        AnsatzCircuit::new(num_qubits, gates, next_slot)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_count
    }
}

/// Which registers a statevector carries. The system register always
/// starts at qubit 0; optional registers stack above it in a fixed order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    num_system: usize,
    has_oracle_ancillas: bool,
    has_test: bool,
}

impl RegisterLayout {
    /// System qubits only.
    pub fn system_only(num_system: usize) -> Self {
        RegisterLayout {
            num_system,
            has_oracle_ancillas: false,
            has_test: false,
        }
    }

    /// System plus a test ancilla (direct-mode Hadamard tests).
    pub fn with_test(num_system: usize) -> Self {
        RegisterLayout {
            num_system,
            has_oracle_ancillas: false,
            has_test: true,
        }
    }

    /// System, partner-copy register, and sign ancilla.
    pub fn oracle(num_system: usize) -> Self {
        RegisterLayout {
            num_system,
            has_oracle_ancillas: true,
            has_test: false,
        }
    }

    /// All registers: system, copy, sign, test.
    pub fn oracle_with_test(num_system: usize) -> Self {
        RegisterLayout {
            num_system,
            has_oracle_ancillas: true,
            has_test: true,
        }
    }

    pub fn num_system(&self) -> usize {
        self.num_system
    }

    pub fn total_qubits(&self) -> usize {
        self.num_system
            + if self.has_oracle_ancillas {
                self.num_system + 1
            } else {
                0
            }
            + usize::from(self.has_test)
    }

    /// First qubit of the partner-copy register, when present.
    pub fn copy_offset(&self) -> Option<usize> {
        self.has_oracle_ancillas.then_some(self.num_system)
    }

    pub fn sign_qubit(&self) -> Option<usize> {
        self.has_oracle_ancillas.then_some(2 * self.num_system)
    }

    pub fn test_qubit(&self) -> Option<usize> {
        self.has_test.then(|| {
            self.num_system
                + if self.has_oracle_ancillas {
                    self.num_system + 1
                } else {
                    0
                }
        })
    }
}

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn gate_matrix(gate: &Gate, theta: &[f64], adjoint: bool) -> [[Complex64; 2]; 2] {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let angle_of = |slot: usize| if adjoint { -theta[slot] } else { theta[slot] };
    match *gate {
        Gate::X(_) | Gate::Cnot(..) => [[zero, one], [one, zero]],
        Gate::Y(_) => [[zero, -i], [i, zero]],
        Gate::Z(_) | Gate::Cz(..) => [[one, zero], [zero, -one]],
        Gate::H(_) => {
            let h = Complex64::new(SQRT_HALF, 0.0);
            [[h, h], [h, -h]]
        }
        Gate::S(_) => [[one, zero], [zero, if adjoint { -i } else { i }]],
        Gate::SDagger(_) => [[one, zero], [zero, if adjoint { i } else { -i }]],
        Gate::Rx(_, slot) => {
            let half = angle_of(slot) / 2.0;
            let (c, s) = (half.cos(), half.sin());
            [
                [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
            ]
        }
        Gate::Ry(_, slot) => {
            let half = angle_of(slot) / 2.0;
            let (c, s) = (half.cos(), half.sin());
            [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ]
        }
        Gate::Rz(_, slot) => {
            let half = angle_of(slot) / 2.0;
            [
                [Complex64::from_polar(1.0, -half), zero],
                [zero, Complex64::from_polar(1.0, half)],
            ]
        }
    }
}

/// State of every register as one amplitude vector, system qubits least
/// significant.
#[derive(Clone, Debug)]
pub struct StateVector {
    layout: RegisterLayout,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// All registers in |0⟩.
    pub fn zero_state(layout: RegisterLayout) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << layout.total_qubits()];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        StateVector { layout, amplitudes }
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.total_qubits()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch(format!(
                "states have {} and {} amplitudes",
                self.amplitudes.len(),
                other.amplitudes.len()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    /// Probability of measuring |0⟩ on one qubit.
    pub fn probability_zero(&self, qubit: usize) -> f64 {
        let bit = 1usize << qubit;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx & bit == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Apply a 2×2 unitary to `target`, restricted to amplitudes where all
    /// `controls` are |1⟩.
    fn apply_unitary(&mut self, m: [[Complex64; 2]; 2], target: usize, controls: &[usize]) {
        let bit = 1usize << target;
        let control_mask: usize = controls.iter().map(|&c| 1usize << c).sum();
        for idx in 0..self.amplitudes.len() {
            if idx & bit != 0 || idx & control_mask != control_mask {
                continue;
            }
            let j = idx | bit;
            let a0 = self.amplitudes[idx];
            let a1 = self.amplitudes[j];
            self.amplitudes[idx] = m[0][0] * a0 + m[0][1] * a1;
            self.amplitudes[j] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    /// Hadamard on one qubit (test-ancilla preparation).
    pub fn hadamard(&mut self, qubit: usize) {
        self.apply_unitary(gate_matrix(&Gate::H(0), &[], false), qubit, &[]);
    }

    /// S† on one qubit (turns |+⟩ into the |−i⟩ test state).
    pub fn s_dagger(&mut self, qubit: usize) {
        self.apply_unitary(gate_matrix(&Gate::SDagger(0), &[], false), qubit, &[]);
    }
}

/// Apply an ansatz circuit to the system register. Gates run in listed
/// order, or reversed and individually inverted when `adjoint`. A control
/// qubit (outside the system register) promotes every gate to its
/// controlled version.
pub fn apply_circuit(
    circuit: &AnsatzCircuit,
    theta: &[f64],
    state: &mut StateVector,
    adjoint: bool,
    control: Option<usize>,
) -> Result<()> {
    if circuit.num_qubits != state.layout.num_system() {
        return Err(Error::RegisterMismatch(format!(
            "circuit on {} qubits applied to a {}-qubit system register",
            circuit.num_qubits,
            state.layout.num_system()
        )));
    }
    if theta.len() != circuit.parameter_count {
        return Err(Error::DimensionMismatch(format!(
            "circuit has {} parameters, got {}",
            circuit.parameter_count,
            theta.len()
        )));
    }
    if let Some(c) = control {
        if c < state.layout.num_system() || c >= state.num_qubits() {
            return Err(Error::RegisterMismatch(format!(
                "control qubit {c} is not an ancilla of this layout"
            )));
        }
    }
    let gates: Box<dyn Iterator<Item = &Gate>> = if adjoint {
        Box::new(circuit.gates.iter().rev())
    } else {
        Box::new(circuit.gates.iter())
    };
    for gate in gates {
        let m = gate_matrix(gate, theta, adjoint);
        let mut controls: Vec<usize> = Vec::with_capacity(2);
        if let Some(c) = control {
            controls.push(c);
        }
        let target = match *gate {
            Gate::Cnot(c, t) => {
                controls.push(c);
                t
            }
            Gate::Cz(a, b) => {
                controls.push(a);
                b
            }
            _ => gate.qubits().0,
        };
        state.apply_unitary(m, target, &controls);
    }
    Ok(())
}

fn check_system_size(g: &SelfInverseTerm, state: &StateVector) -> Result<()> {
    if g.num_qubits() != state.layout.num_system() {
        return Err(Error::RegisterMismatch(format!(
            "term on {} qubits applied to a {}-qubit system register",
            g.num_qubits(),
            state.layout.num_system()
        )));
    }
    Ok(())
}

fn check_ancilla_control(state: &StateVector, control: Option<usize>) -> Result<()> {
    if let Some(c) = control {
        let n = state.layout.num_system();
        let oracle_top = state.layout.sign_qubit().map_or(n, |s| s + 1);
        if c < oracle_top || c >= state.num_qubits() {
            return Err(Error::RegisterMismatch(format!(
                "control qubit {c} overlaps the working registers"
            )));
        }
    }
    Ok(())
}

/// Multiply a self-inverse term straight into the system amplitudes:
/// out[x] = value(x)·in[partner(x)] per system basis state, all other
/// registers untouched. No oracle counters are charged.
pub fn apply_term_direct(
    g: &SelfInverseTerm,
    state: &mut StateVector,
    control: Option<usize>,
) -> Result<()> {
    check_system_size(g, state)?;
    check_ancilla_control(state, control)?;
    let n = state.layout.num_system();
    let dim = 1usize << n;
    let control_mask = control.map_or(0usize, |c| 1usize << c);
    let blocks = state.amplitudes.len() >> n;
    for rest in 0..blocks {
        let base = rest << n;
        if base & control_mask != control_mask {
            continue;
        }
        for x in 0..dim {
            let y = g.partner(x);
            if y < x {
                continue;
            }
            let i = base | x;
            let j = base | y;
            if x == y {
                self_apply_diag(&mut state.amplitudes, i, g.value(x));
            } else {
                let ai = state.amplitudes[i];
                let aj = state.amplitudes[j];
                state.amplitudes[i] = g.value(x) * aj;
                state.amplitudes[j] = g.value(y) * ai;
            }
        }
    }
    Ok(())
}

fn self_apply_diag(amplitudes: &mut [Complex64], idx: usize, value: Complex64) {
    amplitudes[idx] *= value;
}

fn ancillas_exactly_zero(state: &StateVector) -> bool {
    let n = state.layout.num_system();
    let copy_mask = ((1usize << n) - 1) << n;
    let sign_mask = 1usize << (2 * n);
    let zero = Complex64::new(0.0, 0.0);
    state
        .amplitudes
        .iter()
        .enumerate()
        .all(|(idx, a)| idx & (copy_mask | sign_mask) == 0 || *a == zero)
}

/// Apply a self-inverse term through the oracle register sequence.
///
/// Steps, on system s, copy register a₁, sign ancilla a₂ (subscripts are
/// register names): O_F xors partner(s) into a₁; O_H flips a₂ where the
/// term's sign at s is negative; the entry phase (±1, or ±i on imaginary
/// off-diagonal positions) multiplies in, controlled by a₂, the
/// position-comparison s ≠ a₁, and the external control; O_H⁻¹ and a
/// controlled swap(s, a₁) and O_F⁻¹ finish. Only the phase and the swap
/// are controlled externally — with the control off, the O_F/O_H pairs
/// cancel on their own.
///
/// Each O_F/O_F⁻¹ charges one neighbor query and each O_H/O_H⁻¹ one entry
/// query against the term's parent (four queries per application), which
/// the counter converts to original-oracle totals at the parent's
/// advertised rate. Ancillas must enter zeroed and are checked to leave
/// zeroed — exactly, since every step is a permutation or a unit phase.
pub fn apply_term_oracle_faithful(
    g: &SelfInverseTerm,
    state: &mut StateVector,
    counter: &QueryCounter,
    control: Option<usize>,
) -> Result<()> {
    check_system_size(g, state)?;
    check_ancilla_control(state, control)?;
    let n = state.layout.num_system();
    if state.layout.copy_offset() != Some(n) || state.layout.sign_qubit() != Some(2 * n) {
        return Err(Error::RegisterMismatch(
            "oracle-faithful application needs copy and sign registers".into(),
        ));
    }
    if !ancillas_exactly_zero(state) {
        return Err(Error::AncillaNotZeroed);
    }

    let parent_cost = g
        .parent()
        .map_or(ParentQueryCost::NATIVE, |p| p.parent_cost());
    let charge_of = || {
        counter.add_of(1);
        counter.add_parent_of(parent_cost.of_per_of);
    };
    let charge_oh = || {
        counter.add_oh(1);
        counter.add_parent_oh(parent_cost.oh_per_oh);
    };

    let dim = 1usize << n;
    let sys_mask = dim - 1;
    let sign_bit = 1usize << (2 * n);
    let control_mask = control.map_or(0usize, |c| 1usize << c);

    // Partner and sign tables for the sweep; the queries these stand for
    // are charged per oracle invocation below, not per table row — the
    // circuit calls each oracle once per step regardless of superposition
    // width.
    let partner: Vec<BasisIndex> = (0..dim).map(|x| g.partner(x)).collect();
    let negative: Vec<bool> = (0..dim).map(|x| g.sign(x) < 0).collect();

    let xor_partner_into_copy = |state: &mut StateVector| {
        let amps = &mut state.amplitudes;
        for idx in 0..amps.len() {
            let x = idx & sys_mask;
            let shift = partner[x] << n;
            let target = idx ^ shift;
            if target > idx {
                amps.swap(idx, target);
            }
        }
    };
    let flip_sign_ancilla = |state: &mut StateVector| {
        let amps = &mut state.amplitudes;
        for idx in 0..amps.len() {
            if negative[idx & sys_mask] && idx & sign_bit == 0 {
                amps.swap(idx, idx | sign_bit);
            }
        }
    };

    // O_F: |x⟩_s|c⟩_{a₁} → |x⟩_s|c ⊕ partner(x)⟩_{a₁}.
    charge_of();
    xor_partner_into_copy(state);

    // O_H: flip a₂ where the sign at the system row is negative.
    charge_oh();
    flip_sign_ancilla(state);

    // Entry phase, controlled externally: −1 where a₂ is set, times ±i on
    // imaginary off-diagonal positions (system ≠ copy).
    {
        let imaginary = g.phase_class() == PhaseClass::Imaginary;
        let amps = &mut state.amplitudes;
        for (idx, amp) in amps.iter_mut().enumerate() {
            if idx & control_mask != control_mask {
                continue;
            }
            let x = idx & sys_mask;
            let y = (idx >> n) & sys_mask;
            let mut phase = Complex64::new(1.0, 0.0);
            if idx & sign_bit != 0 {
                phase = -phase;
            }
            if imaginary && x != y {
                // The transition sends |x⟩ to |y⟩, so the multiplier is the
                // entry at row y, the conjugate of value(x): −i·sign(x).
                phase *= Complex64::new(0.0, -1.0);
            }
            *amp *= phase;
        }
    }

    // O_H⁻¹.
    charge_oh();
    flip_sign_ancilla(state);

    // Controlled swap of system and copy registers.
    {
        let amps = &mut state.amplitudes;
        for idx in 0..amps.len() {
            if idx & control_mask != control_mask {
                continue;
            }
            let x = idx & sys_mask;
            let y = (idx >> n) & sys_mask;
            if x < y {
                let swapped = (idx & !(sys_mask | (sys_mask << n))) | (y & sys_mask) | (x << n);
                amps.swap(idx, swapped);
            }
        }
    }

    // O_F⁻¹: with the swap done, partner(system) equals the copy content,
    // so the xor clears the register.
    charge_of();
    xor_partner_into_copy(state);

    if !ancillas_exactly_zero(state) {
        return Err(Error::AncillaResidue);
    }
    Ok(())
}
