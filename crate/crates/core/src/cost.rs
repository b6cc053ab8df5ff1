//! Pulse cost model: durations, error ledgers, fidelity estimates.
//!
//! A rotation by `theta` costs `|theta|/pi * tau_1q` and carries error
//! `|sin theta| eps` under the first model or `(|theta| mod pi) eps` under
//! the second; an XX interaction costs `tau_2q` with error `|sin 2chi| E`
//! or `1 E`. Error totals are kept as symbolic ledgers (count times
//! coefficient per unit) so reports can show exact coefficients instead of
//! a single lossy float.

use std::f64::consts::PI;
use thiserror::Error;

use crate::angle::{fmt_fixed, fmt_sig, Angle};
use crate::ir::{Circuit, Gate, GateKind, MachineConfig};

#[derive(Debug, Error)]
pub enum CostError {
    #[error("cost undefined for logical gate {0}")]
    NotLowered(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ErrorUnit {
    Eps,
    BigE,
}

/// One merged ledger line: `count` occurrences of an error contribution
/// rendered as `label` (for example `0.707107ε` or `πε/4` or `E`).
#[derive(Clone, Debug)]
pub struct LedgerTerm {
    pub label: String,
    pub value: f64,
    pub unit: ErrorUnit,
    pub count: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Ledger {
    pub terms: Vec<LedgerTerm>,
}

impl Ledger {
    fn add(&mut self, label: String, value: f64, unit: ErrorUnit) {
        if let Some(t) = self
            .terms
            .iter_mut()
            .find(|t| t.unit == unit && t.label == label)
        {
            t.count += 1;
        } else {
            self.terms.push(LedgerTerm {
                label,
                value,
                unit,
                count: 1,
            });
        }
    }

    pub fn merge(&mut self, other: &Ledger) {
        for t in &other.terms {
            if let Some(mine) = self
                .terms
                .iter_mut()
                .find(|m| m.unit == t.unit && m.label == t.label)
            {
                mine.count += t.count;
            } else {
                self.terms.push(t.clone());
            }
        }
    }

    /// Numeric total with the machine's error magnitudes substituted in.
    pub fn total(&self, eps: f64, big_e: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let scale = match t.unit {
                    ErrorUnit::Eps => eps,
                    ErrorUnit::BigE => big_e,
                };
                t.count as f64 * t.value * scale
            })
            .sum()
    }

    /// `count × label` terms joined with plus signs, eps terms first, then
    /// ascending coefficient.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut sorted = self.terms.clone();
        sorted.sort_by(|a, b| {
            a.unit
                .cmp(&b.unit)
                .then(a.value.partial_cmp(&b.value).unwrap())
        });
        sorted
            .iter()
            .map(|t| format!("{} × {}", t.count, t.label))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn unit_glyph(unit: ErrorUnit) -> &'static str {
    match unit {
        ErrorUnit::Eps => "ε",
        ErrorUnit::BigE => "E",
    }
}

fn amplitude_label(coeff: f64, unit: ErrorUnit) -> String {
    let s = fmt_fixed(coeff, 6);
    if s == "1" {
        unit_glyph(unit).to_string()
    } else {
        format!("{}{}", s, unit_glyph(unit))
    }
}

fn angle_label(theta: Angle) -> String {
    match theta {
        Angle::Pi(n, d) => {
            debug_assert!(n > 0);
            let head = if n == 1 {
                "π".to_string()
            } else {
                format!("{n}π")
            };
            if d == 1 {
                format!("{head}ε")
            } else {
                format!("{head}ε/{d}")
            }
        }
        Angle::F(v) => format!("{}πε", fmt_sig(v / PI, 6)),
    }
}

#[derive(Clone, Debug, Default)]
pub struct CostVector {
    pub duration_us: f64,
    pub e1: Ledger,
    pub e2: Ledger,
}

impl CostVector {
    pub fn accumulate(&mut self, other: &CostVector) {
        self.duration_us += other.duration_us;
        self.e1.merge(&other.e1);
        self.e2.merge(&other.e2);
    }

    /// Total under the machine's active error model.
    pub fn error_total(&self, m: &MachineConfig) -> f64 {
        match m.error_model {
            crate::ir::ErrorModel::E1 => self.e1.total(m.epsilon, m.big_e),
            crate::ir::ErrorModel::E2 => self.e2.total(m.epsilon, m.big_e),
        }
    }
}

fn rotation_cost(theta: Angle, m: &MachineConfig) -> CostVector {
    let mut cv = CostVector {
        duration_us: theta.val().abs() / PI * m.tau_1q_us,
        ..Default::default()
    };
    let s = theta.sin().abs();
    if s > 0.0 {
        cv.e1.add(amplitude_label(s, ErrorUnit::Eps), s, ErrorUnit::Eps);
    }
    let residue = theta.abs_mod_pi();
    if !residue.is_zero() {
        cv.e2
            .add(angle_label(residue), residue.val(), ErrorUnit::Eps);
    }
    cv
}

fn xx_cost(chi: Angle, m: &MachineConfig) -> CostVector {
    let mut cv = CostVector {
        duration_us: m.tau_2q_us,
        ..Default::default()
    };
    let s = chi.scale(2, 1).sin().abs();
    if s > 0.0 {
        cv.e1
            .add(amplitude_label(s, ErrorUnit::BigE), s, ErrorUnit::BigE);
    }
    cv.e2.add("E".into(), 1.0, ErrorUnit::BigE);
    cv
}

/// Cost of one pulse. RX/RY sugar is costed as the R pulse it denotes;
/// barriers are free; logical gates have no cost.
pub fn gate_cost(g: &Gate, m: &MachineConfig) -> Result<CostVector, CostError> {
    match &g.kind {
        GateKind::R(t, _) | GateKind::Rx(t) | GateKind::Ry(t) => Ok(rotation_cost(*t, m)),
        GateKind::Xx(chi) => Ok(xx_cost(*chi, m)),
        GateKind::Barrier => Ok(CostVector::default()),
        other => Err(CostError::NotLowered(other.mnemonic().into())),
    }
}

/// Serial sum of pulse costs over the whole circuit.
pub fn circuit_cost(c: &Circuit, m: &MachineConfig) -> Result<CostVector, CostError> {
    let mut total = CostVector::default();
    for g in &c.gates {
        total.accumulate(&gate_cost(g, m)?);
    }
    Ok(total)
}

/// Fidelity estimates under both error models: the product of
/// `1 - error` over every pulse, using per-pair interaction strengths
/// where the machine overrides them.
pub fn fidelity(c: &Circuit, m: &MachineConfig) -> Result<(f64, f64), CostError> {
    let mut f1 = 1.0;
    let mut f2 = 1.0;
    for g in &c.gates {
        match &g.kind {
            GateKind::R(t, _) | GateKind::Rx(t) | GateKind::Ry(t) => {
                f1 *= 1.0 - t.sin().abs() * m.epsilon;
                f2 *= 1.0 - t.abs_mod_pi().val() * m.epsilon;
            }
            GateKind::Xx(chi) => {
                let e = m.pair_e(g.qubits[0], g.qubits[1]);
                f1 *= 1.0 - chi.scale(2, 1).sin().abs() * e;
                f2 *= 1.0 - e;
            }
            GateKind::Barrier => {}
            other => return Err(CostError::NotLowered(other.mnemonic().into())),
        }
    }
    Ok((f1, f2))
}

/// Worst-case budget for compiling any `n`-qubit circuit with `two_q`
/// two-qubit interactions: every inter-interaction layer compresses to at
/// most two pulses per touched wire.
#[derive(Clone, Copy, Debug)]
pub struct Lemma1Bound {
    pub pulses_1q: usize,
    pub gates_total: usize,
    pub duration_1q_us: f64,
    pub error_eps_units: f64,
}

pub fn lemma1_bound(n: usize, two_q: usize, m: &MachineConfig) -> Lemma1Bound {
    let k = n + 2 * two_q;
    Lemma1Bound {
        pulses_1q: 2 * k,
        gates_total: 2 * k + two_q,
        duration_1q_us: 2.0 * m.tau_1q_us * k as f64,
        error_eps_units: k as f64,
    }
}

/// Microseconds rendered without trailing zeros.
pub fn fmt_duration(us: f64) -> String {
    fmt_fixed(us, 4)
}
