//! End-to-end compilation: composite expansion, swap elimination, ion
//! placement, sign selection, pulse decomposition, rewrite passes, and
//! unitary verification of the result.

use num_complex::Complex64;
use thiserror::Error;

use crate::angle::Angle;
use crate::cost::{circuit_cost, fidelity, lemma1_bound, CostVector, Lemma1Bound};
use crate::gatelib::{
    compile_zcz, dec_cnot, dec_cxpow, dec_cz, dec_h, dec_rz_2pulse, dec_rz_3pulse, dec_toffoli,
    dec_toffoli4_ancilla, dec_toffoli4_ladder, dec_u2, u2_matrix, GatelibError,
};
use crate::ir::{validate, Circuit, Gate, GateKind, MachineConfig};
use crate::linalg::{simulate, StateVector};
use crate::mapper::{eliminate_swaps, find_mapping, MapError};
use crate::optimizer::{choose_signs, optimize, Objective, OptError, PassStat, RewritePlan};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid circuit:\n{0}")]
    Invalid(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Gate(#[from] GatelibError),
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error("unknown oracle '{0}'")]
    UnknownOracle(String),
    #[error("oracle '{0}' takes {1} qubits, got {2}")]
    OracleArity(String, usize, usize),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Verified { defect: f64 },
    Failed { defect: f64 },
    Skipped { reason: String },
}

impl Verdict {
    pub fn ok(&self) -> bool {
        !matches!(self, Verdict::Failed { .. })
    }
}

#[derive(Clone, Debug)]
pub struct CompileOptions {
    pub plan: RewritePlan,
    pub verify: bool,
    pub tol: f64,
    pub mapping_override: Option<Vec<usize>>,
    pub oracles: Vec<(String, Circuit)>,
    pub zcz_fast_path: bool,
    pub name: String,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            plan: RewritePlan::time(),
            verify: true,
            tol: 1e-8,
            mapping_override: None,
            oracles: Vec::new(),
            zcz_fast_path: true,
            name: "circuit".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CompilationReport {
    pub name: String,
    pub logical_qubits: usize,
    pub logical_gates: usize,
    pub machine_ions: usize,
    pub objective: Objective,
    /// Input wire -> ion.
    pub mapping: Vec<usize>,
    /// Output position -> ion (differs from `mapping` when swaps were
    /// removed by relabeling).
    pub output_perm: Vec<usize>,
    pub ancilla_ion: Option<usize>,
    pub pulses_1q: usize,
    pub pulses_xx: usize,
    pub cost: CostVector,
    pub f1: f64,
    pub f2: f64,
    pub pass_stats: Vec<PassStat>,
    pub verdict: Verdict,
    pub lemma1: Lemma1Bound,
    pub lemma1_ok: bool,
    /// Pulses left in RX form (azimuth 0 mod pi) and whether they stay
    /// within one per ion; reported for the error objective.
    pub rx_form_pulses: Option<usize>,
    pub rx_bound_ok: Option<bool>,
    /// Whether a three-control Toffoli compiled to at most 11 XX gates.
    pub toffoli4_xx_target: Option<bool>,
    pub zcz_fast_path: bool,
}

#[derive(Clone, Debug)]
pub struct CompileResult {
    pub schedule: Circuit,
    pub report: CompilationReport,
}

fn relabel(c: &Circuit, map: &[usize], n: usize) -> Circuit {
    let mut out = Circuit::new(n);
    for g in &c.gates {
        out.push(Gate::new(
            g.kind.clone(),
            g.qubits.iter().map(|&q| map[q]).collect(),
        ));
    }
    out
}

fn inline_oracles(c: &Circuit, oracles: &[(String, Circuit)]) -> Result<Circuit, PipelineError> {
    let mut cur = c.clone();
    for _ in 0..4 {
        if !cur
            .gates
            .iter()
            .any(|g| matches!(g.kind, GateKind::Oracle(_)))
        {
            return Ok(cur);
        }
        let mut out = Circuit::new(cur.n);
        for g in &cur.gates {
            let name = match &g.kind {
                GateKind::Oracle(name) => name,
                _ => {
                    out.push(g.clone());
                    continue;
                }
            };
            let body = oracles
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, b)| b)
                .ok_or_else(|| PipelineError::UnknownOracle(name.clone()))?;
            if body.n != g.qubits.len() {
                return Err(PipelineError::OracleArity(
                    name.clone(),
                    body.n,
                    g.qubits.len(),
                ));
            }
            // black-box boundary: no rewrites may cross it
            out.push(Gate::new(GateKind::Barrier, g.qubits.clone()));
            for bg in &body.gates {
                out.push(Gate::new(
                    bg.kind.clone(),
                    bg.qubits.iter().map(|&q| g.qubits[q]).collect(),
                ));
            }
            out.push(Gate::new(GateKind::Barrier, g.qubits.clone()));
        }
        cur = out;
    }
    Err(PipelineError::Internal("oracle nesting too deep".into()))
}

/// Rewrites multi-control and conjugated-power gates down to the directly
/// decomposable set. A three-control Toffoli borrows a spare ion as a
/// `|0>`-in, `|0>`-out ancilla when one exists, otherwise uses the
/// 13-interaction ladder.
fn expand_composites(c: &Circuit, m: &MachineConfig) -> (Circuit, Option<usize>) {
    let mut cur = c.clone();
    let mut ancilla = None;
    if cur
        .gates
        .iter()
        .any(|g| matches!(g.kind, GateKind::Toffoli4))
        && m.n > cur.n
    {
        ancilla = Some(cur.n);
        cur.n += 1;
    }
    loop {
        let mut changed = false;
        let mut out = Circuit::new(cur.n);
        for g in &cur.gates {
            let q = &g.qubits;
            match &g.kind {
                GateKind::Toffoli => {
                    out.gates.extend(dec_toffoli(q[0], q[1], q[2]).gates);
                    changed = true;
                }
                GateKind::Toffoli4 => {
                    let dec = match ancilla {
                        Some(a) => dec_toffoli4_ancilla(q[0], q[1], q[2], q[3], a),
                        None => dec_toffoli4_ladder(q[0], q[1], q[2], q[3]),
                    };
                    out.gates.extend(dec.gates);
                    changed = true;
                }
                GateKind::Cypow(al) => {
                    out.push(Gate::new(GateKind::Sdg, vec![q[1]]));
                    out.push(Gate::new(GateKind::Cxpow(*al), q.clone()));
                    out.push(Gate::new(GateKind::S, vec![q[1]]));
                    changed = true;
                }
                GateKind::Czpow(al) => {
                    out.push(Gate::new(GateKind::H, vec![q[1]]));
                    out.push(Gate::new(GateKind::Cxpow(*al), q.clone()));
                    out.push(Gate::new(GateKind::H, vec![q[1]]));
                    changed = true;
                }
                _ => out.push(g.clone()),
            }
        }
        cur = out;
        if !changed {
            return (cur, ancilla);
        }
    }
}

fn zfamily_theta(kind: &GateKind) -> Option<Angle> {
    Some(match kind {
        GateKind::Z => Angle::PI,
        GateKind::S => Angle::pi(1, 2),
        GateKind::Sdg => Angle::pi(-1, 2),
        GateKind::T => Angle::pi(1, 4),
        GateKind::Tdg => Angle::pi(-1, 4),
        GateKind::Rz(t) => *t,
        _ => return None,
    })
}

fn is_zcz(c: &Circuit) -> bool {
    !c.gates.is_empty()
        && c.gates
            .iter()
            .all(|g| zfamily_theta(&g.kind).is_some() || matches!(g.kind, GateKind::Cz))
}

fn decompose(
    c: &Circuit,
    vars: &crate::ir::SignVars,
    m: &MachineConfig,
) -> Result<Circuit, PipelineError> {
    let mut out = Circuit::new(c.n);
    for (i, g) in c.gates.iter().enumerate() {
        let sc = vars.per_gate[i];
        let q = &g.qubits;
        let push_on = |out: &mut Circuit, gates: &[Gate], wire: usize| {
            for dg in gates {
                out.push(Gate::new(dg.kind.clone(), vec![wire]));
            }
        };
        match &g.kind {
            GateKind::H => push_on(&mut out, &dec_h(sc.h_variant).gates, q[0]),
            GateKind::X => out.push(Gate::rx(q[0], Angle::PI)),
            GateKind::Y => out.push(Gate::ry(q[0], Angle::PI)),
            GateKind::V => out.push(Gate::rx(q[0], Angle::pi(1, 2))),
            GateKind::Rx(t) => out.push(Gate::rx(q[0], *t)),
            GateKind::Ry(t) => out.push(Gate::ry(q[0], *t)),
            GateKind::R(t, p) => out.push(Gate::r(q[0], *t, *p)),
            GateKind::U2(a, b, cc, d) => {
                let dec = dec_u2(&u2_matrix(*a, *b, *cc, *d))?;
                push_on(&mut out, &dec.gates, q[0]);
            }
            kind if zfamily_theta(kind).is_some() => {
                let theta = zfamily_theta(kind).unwrap();
                let dec = if sc.rz_two_pulse {
                    dec_rz_2pulse(theta, Angle::ZERO)
                } else {
                    dec_rz_3pulse(theta, sc.v)
                };
                push_on(&mut out, &dec.gates, q[0]);
            }
            GateKind::Cnot => {
                let dec = dec_cnot(q[0], q[1], m.sign(q[0], q[1]), sc.v);
                out.gates.extend(dec.gates);
            }
            GateKind::Cz => {
                let dec = dec_cz(q[0], q[1], m.sign(q[0], q[1]), sc.v, sc.v2)?;
                out.gates.extend(dec.gates);
            }
            GateKind::Cxpow(al) => {
                let dec = dec_cxpow(q[0], q[1], *al, m.sign(q[0], q[1]))?;
                out.gates.extend(dec.gates);
            }
            GateKind::Xx(chi) => {
                let want = if chi.val() >= 0.0 { 1 } else { -1 };
                if chi.is_zero() || want == m.sign(q[0], q[1]) {
                    out.push(g.clone());
                } else {
                    // YI conjugation flips the interaction sign exactly
                    out.push(Gate::ry(q[0], Angle::PI));
                    out.push(Gate::xx(q[0], q[1], chi.neg()));
                    out.push(Gate::ry(q[0], Angle::pi(-1, 1)));
                }
            }
            GateKind::Barrier => out.push(g.clone()),
            other => {
                return Err(PipelineError::Internal(format!(
                    "unexpanded gate {} reached decomposition",
                    other.mnemonic()
                )))
            }
        }
    }
    Ok(out)
}

/// Compares a pulse schedule against a logical circuit column by column on
/// the machine state space. Logical wire `w` enters at ion `map[w]`; the
/// output qubit at position `p` is read from ion `out_perm[p]`. Every other
/// ion (unused or ancilla) must start and end in `|0>`. A single global
/// phase is fixed on the first column.
pub fn verify_schedule(
    logical: &Circuit,
    schedule: &Circuit,
    map: &[usize],
    out_perm: &[usize],
    m: &MachineConfig,
    tol: f64,
) -> Verdict {
    if m.n > 6 {
        return Verdict::Skipped {
            reason: format!("machine space of {} ions is too large to simulate", m.n),
        };
    }
    let n0 = logical.n;
    let dim0 = 1usize << n0;
    let silent: Vec<usize> = (0..m.n).filter(|ion| !out_perm.contains(ion)).collect();
    let mut lambda: Option<Complex64> = None;
    let mut defect: f64 = 0.0;
    for x in 0..dim0 {
        let mut machine_in = 0usize;
        for w in 0..n0 {
            let bit = (x >> (n0 - 1 - w)) & 1;
            machine_in |= bit << (m.n - 1 - map[w]);
        }
        let phys = match simulate(schedule, &StateVector::basis(m.n, machine_in)) {
            Ok(s) => s,
            Err(e) => {
                return Verdict::Skipped {
                    reason: format!("schedule not simulable: {e}"),
                }
            }
        };
        let expect = match simulate(logical, &StateVector::basis(n0, x)) {
            Ok(s) => s,
            Err(e) => {
                return Verdict::Skipped {
                    reason: format!("logical circuit not simulable: {e}"),
                }
            }
        };
        // expected machine amplitude: logical output placed at out_perm,
        // zero wherever a silent ion is excited
        let expected_at = |k: usize| -> Complex64 {
            for &ion in &silent {
                if (k >> (m.n - 1 - ion)) & 1 == 1 {
                    return Complex64::new(0.0, 0.0);
                }
            }
            let mut y = 0usize;
            for (p, &ion) in out_perm.iter().enumerate() {
                let bit = (k >> (m.n - 1 - ion)) & 1;
                y |= bit << (n0 - 1 - p);
            }
            expect.amp[y]
        };
        if lambda.is_none() {
            let mut best = 0usize;
            let mut best_norm = -1.0;
            for k in 0..(1usize << m.n) {
                let nn = expected_at(k).norm();
                if nn > best_norm {
                    best_norm = nn;
                    best = k;
                }
            }
            lambda = Some(phys.amp[best] / expected_at(best));
        }
        let l = lambda.unwrap();
        for k in 0..(1usize << m.n) {
            let d = (phys.amp[k] - l * expected_at(k)).norm();
            if d > defect {
                defect = d;
            }
        }
    }
    let l = lambda.unwrap_or_else(|| Complex64::new(1.0, 0.0));
    if defect <= tol && (l.norm() - 1.0).abs() <= tol.max(1e-6) {
        Verdict::Verified { defect }
    } else {
        Verdict::Failed { defect }
    }
}

/// Compiles a logical circuit to a verified pulse schedule on `m`.
pub fn compile(
    input: &Circuit,
    m: &MachineConfig,
    opts: &CompileOptions,
) -> Result<CompileResult, PipelineError> {
    let diags = validate(input, m);
    if !diags.is_empty() {
        let msg = diags
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join("\n");
        return Err(PipelineError::Invalid(msg));
    }

    let reference = inline_oracles(input, &opts.oracles)?;
    let had_toffoli4 = reference
        .gates
        .iter()
        .any(|g| matches!(g.kind, GateKind::Toffoli4));
    let (expanded, ancilla_wire) = expand_composites(&reference, m);
    let (no_swaps, wire_perm) = eliminate_swaps(&expanded);

    let map_full = match &opts.mapping_override {
        Some(v) => {
            let mut seen = vec![false; m.n];
            let inject = v.len() == no_swaps.n
                && v.iter().all(|&ion| {
                    ion < m.n && !std::mem::replace(&mut seen[ion], true)
                });
            if !inject {
                return Err(MapError::BadOverride(no_swaps.n, m.n).into());
            }
            v.clone()
        }
        None => find_mapping(&no_swaps, m)?,
    };
    let placed = relabel(&no_swaps, &map_full, m.n);

    let use_zcz = opts.zcz_fast_path && is_zcz(&no_swaps);
    let pulses = if use_zcz {
        let v = vec![1i8; m.n];
        Circuit {
            n: m.n,
            gates: compile_zcz(&placed, &v, m)?.gates,
        }
    } else {
        let vars = choose_signs(&placed, m, opts.plan.objective);
        decompose(&placed, &vars, m)?
    };

    let (schedule, pass_stats) = optimize(&pulses, &opts.plan, m)?;
    let post = validate(&schedule, m);
    if !post.is_empty() {
        return Err(PipelineError::Internal(format!(
            "compiled schedule fails validation: {}",
            post[0]
        )));
    }

    let n0 = input.n;
    let mapping: Vec<usize> = map_full[..n0].to_vec();
    let output_perm: Vec<usize> = (0..n0).map(|p| map_full[wire_perm[p]]).collect();

    let verdict = if opts.verify {
        verify_schedule(&reference, &schedule, &mapping, &output_perm, m, opts.tol)
    } else {
        Verdict::Skipped {
            reason: "verification disabled".into(),
        }
    };

    let cost = circuit_cost(&schedule, m).map_err(|e| PipelineError::Internal(e.to_string()))?;
    let (f1, f2) = fidelity(&schedule, m).map_err(|e| PipelineError::Internal(e.to_string()))?;
    let lemma1 = lemma1_bound(expanded.n, schedule.xx_count(), m);
    let lemma1_ok = schedule.pulse_1q_count() <= lemma1.pulses_1q
        && schedule.gates.len() <= lemma1.gates_total
        && cost.e1.total(m.epsilon, 0.0) <= lemma1.error_eps_units * m.epsilon + 1e-9;
    let (rx_form_pulses, rx_bound_ok) = if matches!(opts.plan.objective, Objective::Error) {
        let count = schedule
            .gates
            .iter()
            .filter(|g| match &g.kind {
                GateKind::R(_, phi) => phi.sin().abs() < 1e-9,
                _ => false,
            })
            .count();
        (Some(count), Some(count <= m.n))
    } else {
        (None, None)
    };

    let report = CompilationReport {
        name: opts.name.clone(),
        logical_qubits: n0,
        logical_gates: input.gates.len(),
        machine_ions: m.n,
        objective: opts.plan.objective,
        mapping,
        output_perm,
        ancilla_ion: ancilla_wire.map(|w| map_full[w]),
        pulses_1q: schedule.pulse_1q_count(),
        pulses_xx: schedule.xx_count(),
        cost,
        f1,
        f2,
        pass_stats,
        verdict,
        lemma1,
        lemma1_ok,
        rx_form_pulses,
        rx_bound_ok,
        toffoli4_xx_target: had_toffoli4.then(|| schedule.xx_count() <= 11),
        zcz_fast_path: use_zcz,
    };
    Ok(CompileResult { schedule, report })
}
