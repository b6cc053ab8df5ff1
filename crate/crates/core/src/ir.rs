//! Circuit intermediate representation, gate taxonomy, machine description.

use crate::angle::Angle;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    V,
    Rx(Angle),
    Ry(Angle),
    Rz(Angle),
    /// Arbitrary single-qubit unitary `e^(id) [[e^(ia)cos b, e^(ic)sin b],
    /// [-e^(-ic)sin b, e^(-ia)cos b]]`.
    U2(f64, f64, f64, f64),
    /// Physical single-qubit pulse.
    R(Angle, Angle),
    Cnot,
    Cz,
    Cxpow(f64),
    Cypow(f64),
    Czpow(f64),
    Toffoli,
    Toffoli4,
    Swap,
    /// Physical two-qubit pulse.
    Xx(Angle),
    /// Opaque sub-circuit reference; no rewrite may cross its boundary.
    Oracle(String),
    /// Internal optimization fence on the listed qubits.
    Barrier,
}

impl GateKind {
    /// Fixed operand count, or `None` for variable-arity kinds.
    pub fn arity(&self) -> Option<usize> {
        use GateKind::*;
        match self {
            H | X | Y | Z | S | Sdg | T | Tdg | V | Rx(_) | Ry(_) | Rz(_) | U2(..) | R(..) => {
                Some(1)
            }
            Cnot | Cz | Cxpow(_) | Cypow(_) | Czpow(_) | Swap | Xx(_) => Some(2),
            Toffoli => Some(3),
            Toffoli4 => Some(4),
            Oracle(_) | Barrier => None,
        }
    }

    pub fn mnemonic(&self) -> &'static str {
        use GateKind::*;
        match self {
            H => "h",
            X => "x",
            Y => "y",
            Z => "z",
            S => "s",
            Sdg => "sdg",
            T => "t",
            Tdg => "tdg",
            V => "v",
            Rx(_) => "rx",
            Ry(_) => "ry",
            Rz(_) => "rz",
            U2(..) => "u2",
            R(..) => "r",
            Cnot => "cnot",
            Cz => "cz",
            Cxpow(_) => "cxp",
            Cypow(_) => "cyp",
            Czpow(_) => "czp",
            Toffoli => "toffoli",
            Toffoli4 => "toffoli4",
            Swap => "swap",
            Xx(_) => "xx",
            Oracle(_) => "oracle",
            Barrier => "barrier",
        }
    }

    pub fn is_pulse(&self) -> bool {
        matches!(self, GateKind::R(..) | GateKind::Xx(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Gate {
        Gate { kind, qubits }
    }

    pub fn r(q: usize, theta: Angle, phi: Angle) -> Gate {
        Gate::new(GateKind::R(theta, phi), vec![q])
    }

    pub fn rx(q: usize, theta: Angle) -> Gate {
        Gate::new(GateKind::Rx(theta), vec![q])
    }

    pub fn ry(q: usize, theta: Angle) -> Gate {
        Gate::new(GateKind::Ry(theta), vec![q])
    }

    pub fn xx(a: usize, b: usize, chi: Angle) -> Gate {
        Gate::new(GateKind::Xx(chi), vec![a, b])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Logical,
    Physical,
}

#[derive(Clone, Debug, Default)]
pub struct Circuit {
    pub n: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize) -> Circuit {
        Circuit { n, gates: Vec::new() }
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn level(&self) -> Level {
        if self
            .gates
            .iter()
            .all(|g| g.kind.is_pulse() || matches!(g.kind, GateKind::Barrier))
        {
            Level::Physical
        } else {
            Level::Logical
        }
    }

    pub fn xx_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g.kind, GateKind::Xx(_)))
            .count()
    }

    pub fn pulse_1q_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g.kind, GateKind::R(..) | GateKind::Rx(_) | GateKind::Ry(_)))
            .count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorModel {
    E1,
    E2,
}

#[derive(Clone, Debug)]
pub struct MachineConfig {
    pub n: usize,
    /// Duration of a full-pi single-qubit rotation, microseconds.
    pub tau_1q_us: f64,
    /// Duration of one XX interaction, microseconds.
    pub tau_2q_us: f64,
    /// Single-qubit error magnitude.
    pub epsilon: f64,
    /// Two-qubit error magnitude (default for every pair).
    pub big_e: f64,
    /// Hardware-fixed sign of chi per unordered ion pair, 0-indexed.
    chi_sign: Vec<i8>,
    /// Optional per-pair override of `big_e`.
    e_pair: Vec<Option<f64>>,
    pub error_model: ErrorModel,
}

impl MachineConfig {
    pub fn uniform(n: usize, tau_1q_us: f64, tau_2q_us: f64, epsilon: f64, big_e: f64) -> Self {
        MachineConfig {
            n,
            tau_1q_us,
            tau_2q_us,
            epsilon,
            big_e,
            chi_sign: vec![1; n * n],
            e_pair: vec![None; n * n],
            error_model: ErrorModel::E1,
        }
    }

    pub fn set_sign(&mut self, i: usize, j: usize, sign: i8) {
        assert!(i < self.n && j < self.n && i != j && (sign == 1 || sign == -1));
        self.chi_sign[i * self.n + j] = sign;
        self.chi_sign[j * self.n + i] = sign;
    }

    pub fn sign(&self, i: usize, j: usize) -> i8 {
        self.chi_sign[i * self.n + j]
    }

    pub fn set_pair_e(&mut self, i: usize, j: usize, e: f64) {
        self.e_pair[i * self.n + j] = Some(e);
        self.e_pair[j * self.n + i] = Some(e);
    }

    pub fn pair_e(&self, i: usize, j: usize) -> f64 {
        self.e_pair[i * self.n + j].unwrap_or(self.big_e)
    }
}

/// The five-ion machine the benchmarks target: tau_1q 20 us, tau_2q 235 us,
/// eps 0.01, E 0.04, chi negative on (1-indexed) pairs 13, 15, 24 and
/// positive elsewhere.
pub fn default_machine() -> MachineConfig {
    let mut m = MachineConfig::uniform(5, 20.0, 235.0, 0.01, 0.04);
    for (i, j) in [(0, 2), (0, 4), (1, 3)] {
        m.set_sign(i, j, -1);
    }
    m
}

#[derive(Clone, Debug)]
pub struct Diagnostic {
    pub gate_index: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.gate_index {
            Some(i) => write!(f, "gate {}: {}", i, self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

/// Structural and machine-compatibility checks; one diagnostic per
/// violation. Empty result means the circuit is well-formed.
pub fn validate(c: &Circuit, m: &MachineConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let physical = c.level() == Level::Physical;
    if physical && c.n > m.n {
        out.push(Diagnostic {
            gate_index: None,
            message: format!("physical circuit uses {} ions, machine has {}", c.n, m.n),
        });
    }
    for (i, g) in c.gates.iter().enumerate() {
        let diag = |msg: String| Diagnostic {
            gate_index: Some(i),
            message: msg,
        };
        if let Some(a) = g.kind.arity() {
            if g.qubits.len() != a {
                out.push(diag(format!(
                    "{} expects {} qubits, got {}",
                    g.kind.mnemonic(),
                    a,
                    g.qubits.len()
                )));
                continue;
            }
        }
        let mut seen = Vec::new();
        for &q in &g.qubits {
            if q >= c.n {
                out.push(diag(format!("qubit {} out of range (n={})", q, c.n)));
            }
            if seen.contains(&q) {
                out.push(diag(format!("duplicate qubit {}", q)));
            }
            seen.push(q);
        }
        match &g.kind {
            GateKind::Xx(chi) => {
                if chi.val().abs() > std::f64::consts::FRAC_PI_2 + 1e-9 {
                    out.push(diag(format!(
                        "chi out of range: |{}| > pi/2",
                        chi.val()
                    )));
                }
                if physical && g.qubits.len() == 2 && g.qubits.iter().all(|&q| q < m.n) {
                    let hw = m.sign(g.qubits[0], g.qubits[1]);
                    let v = chi.val();
                    if v != 0.0 && (v > 0.0) != (hw > 0) {
                        out.push(diag(format!(
                            "chi sign mismatch: pair ({},{}) requires {}",
                            g.qubits[0] + 1,
                            g.qubits[1] + 1,
                            if hw > 0 { "+" } else { "-" }
                        )));
                    }
                }
            }
            GateKind::Cxpow(a) | GateKind::Cypow(a) | GateKind::Czpow(a) => {
                if a.abs() > 1.0 + 1e-12 {
                    out.push(diag(format!("alpha out of range: {}", a)));
                }
            }
            _ => {}
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum IrError {
    #[error("oracle gates have no inverse")]
    OracleInverse,
}

/// Inverse of a gate, expressed within the gate set.
pub fn inverse(g: &Gate) -> Result<Gate, IrError> {
    use GateKind::*;
    let kind = match &g.kind {
        H => H,
        X => X,
        Y => Y,
        Z => Z,
        S => Sdg,
        Sdg => S,
        T => Tdg,
        Tdg => T,
        V => Rx(Angle::pi(-1, 2)),
        Rx(t) => Rx(t.neg()),
        Ry(t) => Ry(t.neg()),
        Rz(t) => Rz(t.neg()),
        U2(a, b, c, d) => U2(-a, *b, c + std::f64::consts::PI, -d),
        R(t, p) => R(*t, p.sub(Angle::PI)),
        Cnot => Cnot,
        Cz => Cz,
        Cxpow(a) => Cxpow(-a),
        Cypow(a) => Cypow(-a),
        Czpow(a) => Czpow(-a),
        Toffoli => Toffoli,
        Toffoli4 => Toffoli4,
        Swap => Swap,
        Xx(chi) => Xx(chi.neg()),
        Oracle(_) => return Err(IrError::OracleInverse),
        Barrier => Barrier,
    };
    Ok(Gate::new(kind, g.qubits.clone()))
}

/// Reduces an R pulse to `theta` in `(-pi, pi]` (phase-equivalent; each
/// dropped full turn flips the sign of the matrix) and `phi` in `(-pi, pi]`
/// (exact). Other gates pass through.
pub fn normalize_r(g: &Gate) -> Gate {
    match &g.kind {
        GateKind::R(t, p) => Gate::r(g.qubits[0], t.norm(), p.norm()),
        _ => g.clone(),
    }
}

/// Free sign choices attached to a decomposed gate instance.
#[derive(Clone, Copy, Debug)]
pub struct SignChoice {
    /// Direction of the RY conjugation pair, where the decomposition has one.
    pub v: i8,
    /// Second free sign (the other wire of a CZ).
    pub v2: i8,
    /// Hadamard variant: 1 = RX then RY, 2 = RY then RX.
    pub h_variant: u8,
    /// Z-rotation shape: false = RY/RX/RY triple, true = two R(pi,.) pulses.
    pub rz_two_pulse: bool,
}

impl Default for SignChoice {
    fn default() -> Self {
        SignChoice {
            v: 1,
            v2: 1,
            h_variant: 1,
            rz_two_pulse: false,
        }
    }
}

/// Per-gate sign assignments for a circuit, indexed in step with
/// `Circuit::gates`.
#[derive(Clone, Debug, Default)]
pub struct SignVars {
    pub per_gate: Vec<SignChoice>,
}
