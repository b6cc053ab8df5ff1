//! Gate matrices and pulse-level decompositions.
//!
//! Every supported gate has a unitary here, and every lowering used by the
//! pipeline is expressed as a short pulse circuit together with the global
//! phase it introduces, so decompositions can be verified by exact matrix
//! comparison rather than only up to phase.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

use crate::angle::Angle;
use crate::ir::{Circuit, Gate, GateKind, MachineConfig};
use crate::linalg::{embed, Mat, C};

#[derive(Debug, Error)]
pub enum GatelibError {
    #[error("gate has no defined matrix: {0}")]
    NoMatrix(String),
    #[error("matrix is not unitary (defect {0:.2e})")]
    NonUnitary(f64),
    #[error("{0}")]
    BadInput(String),
}

fn c(re: f64, im: f64) -> C {
    Complex64::new(re, im)
}

/// `R(theta, phi)`: rotation by `theta` about the equatorial axis at
/// azimuth `phi`.
pub fn r_matrix(theta: f64, phi: f64) -> Mat {
    let ct = (theta / 2.0).cos();
    let st = (theta / 2.0).sin();
    let off = c(0.0, -1.0) * st;
    Mat::from_rows(&[
        &[c(ct, 0.0), off * Complex64::from_polar(1.0, -phi)],
        &[off * Complex64::from_polar(1.0, phi), c(ct, 0.0)],
    ])
}

/// `XX(chi)`: Ising-type interaction, `cos chi` on the diagonal and
/// `-i sin chi` on the anti-diagonal.
pub fn xx_matrix(chi: f64) -> Result<Mat, GatelibError> {
    if chi.abs() > FRAC_PI_2 + 1e-9 {
        return Err(GatelibError::BadInput(format!(
            "|chi| must be at most pi/2, got {chi}"
        )));
    }
    let d = c(chi.cos(), 0.0);
    let a = c(0.0, -chi.sin());
    let z = c(0.0, 0.0);
    Ok(Mat::from_rows(&[
        &[d, z, z, a],
        &[z, d, a, z],
        &[z, a, d, z],
        &[a, z, z, d],
    ]))
}

fn x_pow(alpha: f64) -> Mat {
    // X^alpha = H diag(1, e^(i pi alpha)) H
    let e = Complex64::from_polar(1.0, PI * alpha);
    let one = c(1.0, 0.0);
    let h = 0.5;
    Mat::from_rows(&[
        &[(one + e) * h, (one - e) * h],
        &[(one - e) * h, (one + e) * h],
    ])
}

fn controlled(u: &Mat) -> Mat {
    let mut out = Mat::identity(4);
    for i in 0..2 {
        for j in 0..2 {
            out[(2 + i, 2 + j)] = u[(i, j)];
        }
    }
    out
}

pub fn u2_matrix(a: f64, b: f64, cc: f64, d: f64) -> Mat {
    let ph = Complex64::from_polar(1.0, d);
    let cb = b.cos();
    let sb = b.sin();
    Mat::from_rows(&[
        &[
            ph * Complex64::from_polar(cb, a),
            ph * Complex64::from_polar(sb, cc),
        ],
        &[
            -ph * Complex64::from_polar(sb, -cc),
            ph * Complex64::from_polar(cb, -a),
        ],
    ])
}

/// Unitary of any gate kind with a defined matrix (everything except
/// oracles and barriers).
pub fn gate_matrix(g: &Gate) -> Result<Mat, GatelibError> {
    use GateKind::*;
    let one = c(1.0, 0.0);
    let z = c(0.0, 0.0);
    let i = c(0.0, 1.0);
    Ok(match &g.kind {
        H => {
            let s = 1.0 / 2f64.sqrt();
            Mat::from_rows(&[&[c(s, 0.0), c(s, 0.0)], &[c(s, 0.0), c(-s, 0.0)]])
        }
        X => Mat::from_rows(&[&[z, one], &[one, z]]),
        Y => Mat::from_rows(&[&[z, -i], &[i, z]]),
        Z => Mat::from_rows(&[&[one, z], &[z, -one]]),
        S => Mat::from_rows(&[&[one, z], &[z, i]]),
        Sdg => Mat::from_rows(&[&[one, z], &[z, -i]]),
        T => Mat::from_rows(&[&[one, z], &[z, Complex64::from_polar(1.0, PI / 4.0)]]),
        Tdg => Mat::from_rows(&[&[one, z], &[z, Complex64::from_polar(1.0, -PI / 4.0)]]),
        V => {
            let p = 0.5;
            Mat::from_rows(&[
                &[c(p, p), c(p, -p)],
                &[c(p, -p), c(p, p)],
            ])
        }
        Rx(t) => r_matrix(t.val(), 0.0),
        Ry(t) => r_matrix(t.val(), FRAC_PI_2),
        Rz(t) => {
            let h = t.val() / 2.0;
            Mat::from_rows(&[
                &[Complex64::from_polar(1.0, -h), z],
                &[z, Complex64::from_polar(1.0, h)],
            ])
        }
        U2(a, b, cc, d) => u2_matrix(*a, *b, *cc, *d),
        R(t, p) => r_matrix(t.val(), p.val()),
        Cnot => controlled(&gate_matrix(&Gate::new(X, vec![0]))?),
        Cz => controlled(&gate_matrix(&Gate::new(Z, vec![0]))?),
        Cxpow(a) => controlled(&x_pow(*a)),
        Cypow(a) => {
            let s = gate_matrix(&Gate::new(S, vec![0]))?;
            let y_pow = s.mul(&x_pow(*a)).mul(&s.dagger());
            controlled(&y_pow)
        }
        Czpow(a) => {
            let mut m = Mat::identity(4);
            m[(3, 3)] = Complex64::from_polar(1.0, PI * a);
            m
        }
        Toffoli => {
            let mut m = Mat::identity(8);
            m[(6, 6)] = z;
            m[(7, 7)] = z;
            m[(6, 7)] = one;
            m[(7, 6)] = one;
            m
        }
        Toffoli4 => {
            let mut m = Mat::identity(16);
            m[(14, 14)] = z;
            m[(15, 15)] = z;
            m[(14, 15)] = one;
            m[(15, 14)] = one;
            m
        }
        Swap => {
            let mut m = Mat::identity(4);
            m[(1, 1)] = z;
            m[(2, 2)] = z;
            m[(1, 2)] = one;
            m[(2, 1)] = one;
            m
        }
        Xx(chi) => xx_matrix(chi.val())?,
        Oracle(tag) => return Err(GatelibError::NoMatrix(format!("oracle {tag}"))),
        Barrier => return Err(GatelibError::NoMatrix("barrier".into())),
    })
}

/// A pulse (or mixed RX/RY/pulse) circuit realizing a target gate, with the
/// exact global phase: product of gate matrices right-to-left equals
/// `global_phase * target`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub gates: Vec<Gate>,
    pub global_phase: C,
}

impl Decomposition {
    /// Product of the gate matrices in circuit order over `n` qubits.
    pub fn matrix(&self, n: usize) -> Result<Mat, GatelibError> {
        let mut acc = Mat::identity(1 << n);
        for g in &self.gates {
            if matches!(g.kind, GateKind::Barrier) {
                continue;
            }
            let u = gate_matrix(g)?;
            let full = embed(&u, &g.qubits, n)
                .map_err(|e| GatelibError::BadInput(e.to_string()))?;
            acc = full.mul(&acc);
        }
        Ok(acc)
    }
}

/// Reads the scalar `lambda` with `product = lambda * target` off the
/// largest entry of `target`; the pair must already be proportional.
fn phase_between(product: &Mat, target: &Mat) -> C {
    let mut best = (0, 0);
    let mut best_norm = -1.0;
    for i in 0..target.rows {
        for j in 0..target.cols {
            let nn = target[(i, j)].norm();
            if nn > best_norm {
                best_norm = nn;
                best = (i, j);
            }
        }
    }
    product[best] / target[best]
}

pub fn dec_rx(theta: Angle) -> Decomposition {
    Decomposition {
        gates: vec![Gate::r(0, theta, Angle::ZERO)],
        global_phase: c(1.0, 0.0),
    }
}

pub fn dec_ry(theta: Angle) -> Decomposition {
    Decomposition {
        gates: vec![Gate::r(0, theta, Angle::pi(1, 2))],
        global_phase: c(1.0, 0.0),
    }
}

/// `RZ(theta)` as the RY/RX/RY conjugation; `v` flips the conjugation
/// direction and is free.
pub fn dec_rz_3pulse(theta: Angle, v: i8) -> Decomposition {
    let v = v as i64;
    Decomposition {
        gates: vec![
            Gate::ry(0, Angle::pi(v, 2)),
            Gate::rx(0, theta.scale(v, 1)),
            Gate::ry(0, Angle::pi(-v, 2)),
        ],
        global_phase: c(1.0, 0.0),
    }
}

/// `RZ(theta)` as two half-turn pulses; the azimuth `x` is free and the
/// construction carries a global phase of -1.
pub fn dec_rz_2pulse(theta: Angle, x: Angle) -> Decomposition {
    Decomposition {
        gates: vec![
            Gate::r(0, Angle::PI, x.sub(theta.scale(1, 2))),
            Gate::r(0, Angle::PI, x),
        ],
        global_phase: c(-1.0, 0.0),
    }
}

/// Hadamard: variant 1 is RX(pi) then RY(-pi/2) (phase -i), variant 2 is
/// RY(pi/2) then RX(-pi) (phase i).
pub fn dec_h(variant: u8) -> Decomposition {
    match variant {
        1 => Decomposition {
            gates: vec![Gate::rx(0, Angle::PI), Gate::ry(0, Angle::pi(-1, 2))],
            global_phase: c(0.0, -1.0),
        },
        2 => Decomposition {
            gates: vec![Gate::ry(0, Angle::pi(1, 2)), Gate::rx(0, Angle::pi(-1, 1))],
            global_phase: c(0.0, 1.0),
        },
        _ => panic!("hadamard variant must be 1 or 2"),
    }
}

/// Factors a 2x2 unitary as `e^(id) [[e^(ia)cos b, e^(ic)sin b],
/// [-e^(-ic)sin b, e^(-ia)cos b]]` with `b` in `[0, pi/2]`. When `sin b = 0`
/// the azimuth `c` is not determined and is set to 0; when `cos b = 0`,
/// likewise `a = 0`.
pub fn u2_params(u: &Mat) -> Result<(f64, f64, f64, f64), GatelibError> {
    if u.rows != 2 || u.cols != 2 {
        return Err(GatelibError::BadInput("u2_params needs a 2x2 matrix".into()));
    }
    if !u.is_unitary(1e-9) {
        let defect = u.mul(&u.dagger()).max_abs_diff(&Mat::identity(2));
        return Err(GatelibError::NonUnitary(defect));
    }
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let d = det.arg() / 2.0;
    let ph = Complex64::from_polar(1.0, -d);
    let u00 = u[(0, 0)] * ph;
    let u01 = u[(0, 1)] * ph;
    let b = u01.norm().atan2(u00.norm());
    let a = if u00.norm() > 1e-9 { u00.arg() } else { 0.0 };
    let cc = if u01.norm() > 1e-9 { u01.arg() } else { 0.0 };
    Ok((a, b, cc, d))
}

/// Any single-qubit unitary as at most two R pulses:
/// `u = e^(id) R(-pi, -c-pi/2) . R(2b+pi, a-c-pi/2)` (matrix order). Pulses
/// that normalize to a zero angle are dropped; a unitary proportional to the
/// identity produces no pulses at all.
pub fn dec_u2(u: &Mat) -> Result<Decomposition, GatelibError> {
    let (a, b, cc, d) = u2_params(u)?;
    let mut phase = Complex64::from_polar(1.0, -d);
    if b.sin().abs() < 1e-9 && a.sin().abs() < 1e-9 {
        // proportional to the identity
        phase *= c(a.cos().round(), 0.0);
        return Ok(Decomposition {
            gates: vec![],
            global_phase: phase,
        });
    }
    let mut gates = Vec::new();
    let pulses = [
        (
            Angle::from_f64(2.0 * b + PI),
            Angle::from_f64(a - cc - FRAC_PI_2),
        ),
        (
            Angle::pi(-1, 1),
            Angle::from_f64(-cc - FRAC_PI_2),
        ),
    ];
    for (theta, phi) in pulses {
        let (t, turns) = theta.norm_turns();
        if turns % 2 != 0 {
            phase = -phase;
        }
        if !t.is_zero() {
            gates.push(Gate::r(0, t, phi.norm()));
        }
    }
    Ok(Decomposition {
        gates,
        global_phase: phase,
    })
}

/// CNOT over one XX interaction. `s` is the hardware sign of the pair's
/// chi; `v` is free. Carries global phase `(-1)^(-v s / 4)`.
pub fn dec_cnot(ctrl: usize, tgt: usize, s: i8, v: i8) -> Decomposition {
    let (s, v) = (s as i64, v as i64);
    Decomposition {
        gates: vec![
            Gate::ry(ctrl, Angle::pi(v, 2)),
            Gate::xx(ctrl, tgt, Angle::pi(s, 4)),
            Gate::rx(ctrl, Angle::pi(-s, 2)),
            Gate::rx(tgt, Angle::pi(-v * s, 2)),
            Gate::ry(ctrl, Angle::pi(-v, 2)),
        ],
        global_phase: Complex64::from_polar(1.0, (v * s) as f64 * PI / 4.0),
    }
}

/// Controlled-X^alpha over one XX interaction. The applied chi is
/// `s alpha pi/4` with `s = s_hw * sign(alpha)` so its sign always matches
/// the hardware sign `s_hw` of the pair.
pub fn dec_cxpow(ctrl: usize, tgt: usize, alpha: f64, s_hw: i8) -> Result<Decomposition, GatelibError> {
    if alpha.abs() > 1.0 + 1e-12 {
        return Err(GatelibError::BadInput(format!(
            "alpha must be in [-1, 1], got {alpha}"
        )));
    }
    let s = if alpha < 0.0 { -s_hw } else { s_hw } as i64;
    let chi = Angle::from_f64(s as f64 * alpha * PI / 4.0);
    let gates = vec![
        Gate::ry(ctrl, Angle::pi(-s, 2)),
        Gate::xx(ctrl, tgt, chi),
        Gate::rx(ctrl, Angle::from_f64(-s as f64 * alpha * FRAC_PI_2)),
        Gate::rx(tgt, Angle::from_f64(alpha * FRAC_PI_2)),
        Gate::ry(ctrl, Angle::pi(s, 2)),
    ];
    let dec = Decomposition {
        gates,
        global_phase: c(1.0, 0.0),
    };
    let target = embed(
        &gate_matrix(&Gate::new(GateKind::Cxpow(alpha), vec![0, 1]))?,
        &[0, 1],
        2,
    )
    .unwrap();
    let product = relabel_two(&dec, ctrl, tgt)?;
    let phase = phase_between(&product, &target);
    Ok(Decomposition {
        gates: dec.gates,
        global_phase: phase,
    })
}

/// Computes the 4x4 matrix of a two-qubit decomposition whose gates touch
/// only `a` and `b`, with `a` mapped to qubit 0 and `b` to qubit 1.
fn relabel_two(dec: &Decomposition, a: usize, b: usize) -> Result<Mat, GatelibError> {
    let mut acc = Mat::identity(4);
    for g in &dec.gates {
        let mut q = g.qubits.clone();
        for x in &mut q {
            debug_assert!(*x == a || *x == b);
            *x = if *x == a { 0 } else { 1 };
        }
        let u = gate_matrix(g)?;
        let full = embed(&u, &q, 2).map_err(|e| GatelibError::BadInput(e.to_string()))?;
        acc = full.mul(&acc);
    }
    Ok(acc)
}

/// Controlled-Y^alpha: conjugate controlled-X^alpha by the phase gate on
/// the target.
pub fn dec_cypow(ctrl: usize, tgt: usize, alpha: f64, s_hw: i8) -> Result<Decomposition, GatelibError> {
    conjugated_cxpow(ctrl, tgt, alpha, s_hw, GateKind::Sdg, GateKind::S, GateKind::Cypow(alpha))
}

/// Controlled-Z^alpha: conjugate controlled-X^alpha by Hadamard on the
/// target.
pub fn dec_czpow(ctrl: usize, tgt: usize, alpha: f64, s_hw: i8) -> Result<Decomposition, GatelibError> {
    conjugated_cxpow(ctrl, tgt, alpha, s_hw, GateKind::H, GateKind::H, GateKind::Czpow(alpha))
}

fn conjugated_cxpow(
    ctrl: usize,
    tgt: usize,
    alpha: f64,
    s_hw: i8,
    pre: GateKind,
    post: GateKind,
    target_kind: GateKind,
) -> Result<Decomposition, GatelibError> {
    let inner = dec_cxpow(ctrl, tgt, alpha, s_hw)?;
    let mut gates = vec![Gate::new(pre, vec![tgt])];
    gates.extend(inner.gates);
    gates.push(Gate::new(post, vec![tgt]));
    let dec = Decomposition {
        gates,
        global_phase: c(1.0, 0.0),
    };
    let product = relabel_two(&dec, ctrl, tgt)?;
    let target = gate_matrix(&Gate::new(target_kind, vec![0, 1]))?;
    let phase = phase_between(&product, &target);
    Ok(Decomposition {
        gates: dec.gates,
        global_phase: phase,
    })
}

/// Controlled-Z over one XX interaction; both conjugation directions are
/// free and the printed form cross-couples them in the RX layer.
pub fn dec_cz(a: usize, b: usize, s: i8, v1: i8, v2: i8) -> Result<Decomposition, GatelibError> {
    let (s, v1, v2) = (s as i64, v1 as i64, v2 as i64);
    let gates = vec![
        Gate::ry(a, Angle::pi(v1, 2)),
        Gate::ry(b, Angle::pi(v2, 2)),
        Gate::xx(a, b, Angle::pi(s, 4)),
        Gate::rx(a, Angle::pi(-v2 * s, 2)),
        Gate::rx(b, Angle::pi(-v1 * s, 2)),
        Gate::ry(a, Angle::pi(-v1, 2)),
        Gate::ry(b, Angle::pi(-v2, 2)),
    ];
    let dec = Decomposition {
        gates,
        global_phase: c(1.0, 0.0),
    };
    let product = relabel_two(&dec, a, b)?;
    let target = gate_matrix(&Gate::new(GateKind::Cz, vec![0, 1]))?;
    let phase = phase_between(&product, &target);
    Ok(Decomposition {
        gates: dec.gates,
        global_phase: phase,
    })
}

/// Toffoli over five two-qubit gates: controlled square roots of NOT onto
/// the target plus a CNOT pair between the controls.
pub fn dec_toffoli(a: usize, b: usize, t: usize) -> Circuit {
    let mut c = Circuit::new([a, b, t].iter().max().unwrap() + 1);
    c.push(Gate::new(GateKind::Cxpow(0.5), vec![a, t]));
    c.push(Gate::new(GateKind::Cxpow(0.5), vec![b, t]));
    c.push(Gate::new(GateKind::Cnot, vec![a, b]));
    c.push(Gate::new(GateKind::Cxpow(-0.5), vec![b, t]));
    c.push(Gate::new(GateKind::Cnot, vec![a, b]));
    c
}

/// Toffoli up to a diagonal relative phase, over three CNOTs. Used as the
/// compute/uncompute shell of the four-control construction; the sandwich
/// cancels the phase exactly.
pub fn dec_margolus(a: usize, b: usize, t: usize) -> Circuit {
    let mut c = Circuit::new([a, b, t].iter().max().unwrap() + 1);
    c.push(Gate::ry(t, Angle::pi(1, 4)));
    c.push(Gate::new(GateKind::Cnot, vec![b, t]));
    c.push(Gate::ry(t, Angle::pi(1, 4)));
    c.push(Gate::new(GateKind::Cnot, vec![a, t]));
    c.push(Gate::ry(t, Angle::pi(-1, 4)));
    c.push(Gate::new(GateKind::Cnot, vec![b, t]));
    c.push(Gate::ry(t, Angle::pi(-1, 4)));
    c
}

/// Triply-controlled NOT on (a,b,c;y) without ancilla: a ladder of
/// controlled fourth roots of NOT and CNOTs, 13 two-qubit gates.
pub fn dec_toffoli4_ladder(a: usize, b: usize, cq: usize, y: usize) -> Circuit {
    let mut out = Circuit::new([a, b, cq, y].iter().max().unwrap() + 1);
    let cw = |x: usize, alpha: f64| Gate::new(GateKind::Cxpow(alpha), vec![x, y]);
    let cnot = |x: usize, z: usize| Gate::new(GateKind::Cnot, vec![x, z]);
    out.push(cw(a, 0.25));
    out.push(cw(b, 0.25));
    out.push(cnot(a, b)); // b := a xor b
    out.push(cw(b, -0.25));
    out.push(cw(cq, 0.25));
    out.push(cnot(b, cq)); // c := a xor b xor c
    out.push(cw(cq, 0.25));
    out.push(cnot(a, cq)); // c := b xor c
    out.push(cw(cq, -0.25));
    out.push(cnot(b, cq)); // c := a xor c
    out.push(cw(cq, -0.25));
    out.push(cnot(a, cq)); // restore c
    out.push(cnot(a, b)); // restore b
    out
}

/// Triply-controlled NOT using one ancilla wire `anc` (required to start
/// and end in |0>): compute `a AND b` into the ancilla with a
/// relative-phase Toffoli, use it as a control, uncompute. 11 two-qubit
/// gates after lowering.
pub fn dec_toffoli4_ancilla(a: usize, b: usize, cq: usize, y: usize, anc: usize) -> Circuit {
    let mut out = Circuit::new([a, b, cq, y, anc].iter().max().unwrap() + 1);
    for g in dec_margolus(a, b, anc).gates {
        out.push(g);
    }
    out.push(Gate::new(GateKind::Toffoli, vec![anc, cq, y]));
    let m = dec_margolus(a, b, anc);
    for g in m.gates.iter().rev() {
        out.push(crate::ir::inverse(g).unwrap());
    }
    out
}

/// Lowers a circuit of Z-axis rotations and CZ gates directly to pulses:
/// one XX per CZ inside a single RY/RX/RY conjugation shell. `v` gives one
/// free sign per qubit.
pub fn compile_zcz(
    circuit: &Circuit,
    v: &[i8],
    m: &MachineConfig,
) -> Result<Decomposition, GatelibError> {
    use GateKind::*;
    let n = circuit.n;
    if v.len() != n {
        return Err(GatelibError::BadInput(format!(
            "need one v sign per qubit: {} != {}",
            v.len(),
            n
        )));
    }
    let mut t = vec![Angle::ZERO; n];
    let mut czs: Vec<(usize, usize)> = Vec::new();
    let mut active = vec![false; n];
    for g in &circuit.gates {
        let q = g.qubits[0];
        match &g.kind {
            Z => t[q] = t[q].add(Angle::PI),
            S => t[q] = t[q].add(Angle::pi(1, 2)),
            Sdg => t[q] = t[q].add(Angle::pi(-1, 2)),
            T => t[q] = t[q].add(Angle::pi(1, 4)),
            Tdg => t[q] = t[q].add(Angle::pi(-1, 4)),
            Rz(theta) => t[q] = t[q].add(*theta),
            Cz => czs.push((g.qubits[0], g.qubits[1])),
            other => {
                return Err(GatelibError::BadInput(format!(
                    "compile_zcz accepts only Z-axis rotations and CZ, got {}",
                    other.mnemonic()
                )))
            }
        }
        for &q in &g.qubits {
            active[q] = true;
        }
    }
    let mut gates = Vec::new();
    for q in 0..n {
        if active[q] {
            gates.push(Gate::ry(q, Angle::pi(v[q] as i64, 2)));
        }
    }
    let mut phase = c(1.0, 0.0);
    for q in 0..n {
        if !active[q] {
            continue;
        }
        // own-sign rotation aggregate, minus a quarter turn per incident CZ
        // weighted by the partner's sign and the pair's hardware sign
        let mut cz_sum = 0i64;
        for &(x, y) in &czs {
            if x == q {
                cz_sum += v[y] as i64 * m.sign(x, y) as i64;
            } else if y == q {
                cz_sum += v[x] as i64 * m.sign(x, y) as i64;
            }
        }
        let angle = t[q]
            .scale(v[q] as i64, 1)
            .add(Angle::pi(-cz_sum, 2));
        let (norm, turns) = angle.norm_turns();
        if turns % 2 != 0 {
            phase = -phase;
        }
        if !norm.is_zero() {
            gates.push(Gate::rx(q, norm));
        }
    }
    for &(x, y) in &czs {
        gates.push(Gate::xx(x, y, Angle::pi(m.sign(x, y) as i64, 4)));
    }
    for q in 0..n {
        if active[q] {
            gates.push(Gate::ry(q, Angle::pi(-(v[q] as i64), 2)));
        }
    }
    let dec = Decomposition {
        gates,
        global_phase: phase,
    };
    let product = dec.matrix(n)?;
    let target = crate::linalg::circuit_unitary(circuit)
        .map_err(|e| GatelibError::BadInput(e.to_string()))?;
    let phase = phase_between(&product, &target);
    Ok(Decomposition {
        gates: dec.gates,
        global_phase: phase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{circuit_unitary, equiv_global_phase};

    fn assert_dec_equals(dec: &Decomposition, target: &Mat, n: usize, what: &str) {
        let product = dec.matrix(n).unwrap();
        let expect = target.scaled(dec.global_phase);
        let diff = product.max_abs_diff(&expect);
        assert!(diff < 1e-9, "{what}: defect {diff:.2e}");
    }

    #[test]
    fn r_matrix_pinned_values() {
        let m = r_matrix(0.0, 1.23);
        assert!(m.max_abs_diff(&Mat::identity(2)) < 1e-15);
        // R(pi, 0) = -i X
        let m = r_matrix(PI, 0.0);
        let x = gate_matrix(&Gate::new(GateKind::X, vec![0])).unwrap();
        assert!(m.max_abs_diff(&x.scaled(c(0.0, -1.0))) < 1e-15);
        // R(pi/2, pi/2) is the RY(pi/2) rotation
        let m = r_matrix(FRAC_PI_2, FRAC_PI_2);
        let ry = gate_matrix(&Gate::ry(0, Angle::pi(1, 2))).unwrap();
        assert!(m.max_abs_diff(&ry) < 1e-15);
    }

    #[test]
    fn xx_matrix_pinned_values() {
        assert!(xx_matrix(0.0).unwrap().max_abs_diff(&Mat::identity(4)) < 1e-15);
        let m = xx_matrix(PI / 4.0).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((m[(0, 0)] - c(s, 0.0)).norm() < 1e-12);
        assert!((m[(0, 3)] - c(0.0, -s)).norm() < 1e-12);
        assert!(xx_matrix(0.6 * PI).is_err());
    }

    #[test]
    fn xx_commutes_with_rx_on_either_qubit() {
        let xx = embed(&xx_matrix(0.31).unwrap(), &[0, 1], 2).unwrap();
        for q in 0..2 {
            let rx = embed(&r_matrix(0.77, 0.0), &[q], 2).unwrap();
            assert!(xx.mul(&rx).max_abs_diff(&rx.mul(&xx)) < 1e-12);
        }
        // ...but not with RY
        let ry = embed(&r_matrix(0.77, FRAC_PI_2), &[0], 2).unwrap();
        assert!(xx.mul(&ry).max_abs_diff(&ry.mul(&xx)) > 1e-3);
    }

    #[test]
    fn rz_decompositions() {
        for &v in &[1i8, -1] {
            let dec = dec_rz_3pulse(Angle::pi(1, 4), v);
            let t = gate_matrix(&Gate::new(GateKind::Rz(Angle::pi(1, 4)), vec![0])).unwrap();
            assert_dec_equals(&dec, &t, 1, "rz 3-pulse");
            // matches T up to phase
            let tg = gate_matrix(&Gate::new(GateKind::T, vec![0])).unwrap();
            assert!(equiv_global_phase(&dec.matrix(1).unwrap(), &tg, 1e-9));
        }
        for &(th, x) in &[(Angle::ZERO, Angle::ZERO), (Angle::pi(1, 2), Angle::ZERO), (Angle::pi(-3, 4), Angle::pi(1, 3))] {
            let dec = dec_rz_2pulse(th, x);
            let t = gate_matrix(&Gate::new(GateKind::Rz(th), vec![0])).unwrap();
            assert_dec_equals(&dec, &t, 1, "rz 2-pulse");
        }
        // S gate via the 2-pulse form
        let dec = dec_rz_2pulse(Angle::pi(1, 2), Angle::ZERO);
        let s = gate_matrix(&Gate::new(GateKind::S, vec![0])).unwrap();
        assert!(equiv_global_phase(&dec.matrix(1).unwrap(), &s, 1e-9));
    }

    #[test]
    fn h_decompositions() {
        let h = gate_matrix(&Gate::new(GateKind::H, vec![0])).unwrap();
        for variant in [1, 2] {
            let dec = dec_h(variant);
            assert_dec_equals(&dec, &h, 1, "hadamard");
        }
    }

    #[test]
    fn u2_params_reconstructs() {
        let h = gate_matrix(&Gate::new(GateKind::H, vec![0])).unwrap();
        let (a, b, cc, d) = u2_params(&h).unwrap();
        assert!(u2_matrix(a, b, cc, d).max_abs_diff(&h) < 1e-9);
        let (a, b, cc, d) = u2_params(&Mat::identity(2)).unwrap();
        assert!((a, b, cc, d) == (0.0, 0.0, 0.0, 0.0));
        let mut bad = Mat::identity(2);
        bad[(0, 0)] = c(2.0, 0.0);
        assert!(u2_params(&bad).is_err());
    }

    #[test]
    fn dec_u2_examples() {
        let h = gate_matrix(&Gate::new(GateKind::H, vec![0])).unwrap();
        let dec = dec_u2(&h).unwrap();
        assert!(dec.gates.len() <= 2);
        assert_dec_equals(&dec, &h, 1, "u2 of H");

        let rx = r_matrix(0.7, 0.0);
        let dec = dec_u2(&rx).unwrap();
        assert_dec_equals(&dec, &rx, 1, "u2 of RX");

        let dec = dec_u2(&Mat::identity(2)).unwrap();
        assert!(dec.gates.is_empty());
        let minus = Mat::identity(2).scaled(c(-1.0, 0.0));
        let dec = dec_u2(&minus).unwrap();
        assert!(dec.gates.is_empty());
        assert_dec_equals(&dec, &minus, 1, "u2 of -I");
    }

    #[test]
    fn dec_u2_drops_second_pulse_at_b_half_pi() {
        // b = pi/2 makes the 2b+pi pulse a full turn
        let u = u2_matrix(0.0, FRAC_PI_2, 0.4, 0.0);
        let dec = dec_u2(&u).unwrap();
        assert_eq!(dec.gates.len(), 1);
        assert_dec_equals(&dec, &u, 1, "u2 single-pulse case");
    }

    #[test]
    fn cnot_all_sign_choices() {
        let target = gate_matrix(&Gate::new(GateKind::Cnot, vec![0, 1])).unwrap();
        for &s in &[1i8, -1] {
            for &v in &[1i8, -1] {
                let dec = dec_cnot(0, 1, s, v);
                assert_dec_equals(&dec, &target, 2, "cnot");
                // the residual phase is a vs-dependent eighth turn
                let expect = Complex64::from_polar(1.0, (v as f64) * (s as f64) * PI / 4.0);
                assert!((dec.global_phase - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cxpow_matches_target() {
        for &alpha in &[1.0, 0.5, -0.5, 0.25, -1.0, 0.0, 0.37] {
            for &s_hw in &[1i8, -1] {
                let dec = dec_cxpow(0, 1, alpha, s_hw).unwrap();
                let target =
                    gate_matrix(&Gate::new(GateKind::Cxpow(alpha), vec![0, 1])).unwrap();
                assert_dec_equals(&dec, &target, 2, "cxpow");
                // emitted chi sign always matches hardware
                for g in &dec.gates {
                    if let GateKind::Xx(chi) = g.kind {
                        let v = chi.val();
                        assert!(v == 0.0 || (v > 0.0) == (s_hw > 0));
                    }
                }
            }
        }
        assert!(dec_cxpow(0, 1, 1.5, 1).is_err());
    }

    #[test]
    fn cypow_czpow_match_targets() {
        for &alpha in &[1.0, 0.5, -0.5, 0.0] {
            let dec = dec_cypow(0, 1, alpha, 1).unwrap();
            let target = gate_matrix(&Gate::new(GateKind::Cypow(alpha), vec![0, 1])).unwrap();
            assert_dec_equals(&dec, &target, 2, "cypow");
            let dec = dec_czpow(0, 1, alpha, -1).unwrap();
            let target = gate_matrix(&Gate::new(GateKind::Czpow(alpha), vec![0, 1])).unwrap();
            assert_dec_equals(&dec, &target, 2, "czpow");
        }
        // Czpow(0.5) has the quarter phase on |11>
        let m = gate_matrix(&Gate::new(GateKind::Czpow(0.5), vec![0, 1])).unwrap();
        assert!((m[(3, 3)] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn cz_all_eight_sign_choices() {
        let target = gate_matrix(&Gate::new(GateKind::Cz, vec![0, 1])).unwrap();
        for &s in &[1i8, -1] {
            for &v1 in &[1i8, -1] {
                for &v2 in &[1i8, -1] {
                    let dec = dec_cz(0, 1, s, v1, v2).unwrap();
                    assert_eq!(
                        dec.gates
                            .iter()
                            .filter(|g| !matches!(g.kind, GateKind::Xx(_)))
                            .count(),
                        6
                    );
                    assert_dec_equals(&dec, &target, 2, "cz");
                }
            }
        }
    }

    #[test]
    fn toffoli_five_two_qubit_gates() {
        let circ = dec_toffoli(0, 1, 2);
        assert_eq!(circ.gates.len(), 5);
        let u = circuit_unitary(&circ).unwrap();
        let target = gate_matrix(&Gate::new(GateKind::Toffoli, vec![0, 1, 2])).unwrap();
        assert!(equiv_global_phase(&u, &target, 1e-9));
    }

    #[test]
    fn margolus_is_toffoli_up_to_diagonal() {
        let u = circuit_unitary(&dec_margolus(0, 1, 2)).unwrap();
        let tof = gate_matrix(&Gate::new(GateKind::Toffoli, vec![0, 1, 2])).unwrap();
        let d = tof.dagger().mul(&u);
        // must be diagonal with unit entries
        for i in 0..8 {
            for j in 0..8 {
                if i == j {
                    assert!((d[(i, j)].norm() - 1.0).abs() < 1e-9, "diag {i}");
                } else {
                    assert!(d[(i, j)].norm() < 1e-9, "off-diag {i},{j}");
                }
            }
        }
    }

    #[test]
    fn toffoli4_ladder_exact() {
        let circ = dec_toffoli4_ladder(0, 1, 2, 3);
        assert_eq!(circ.gates.len(), 13);
        let u = circuit_unitary(&circ).unwrap();
        let target = gate_matrix(&Gate::new(GateKind::Toffoli4, vec![0, 1, 2, 3])).unwrap();
        assert!(equiv_global_phase(&u, &target, 1e-9));
    }

    #[test]
    fn toffoli4_ancilla_on_zero_subspace() {
        let circ = dec_toffoli4_ancilla(0, 1, 2, 3, 4);
        let u = circuit_unitary(&circ).unwrap();
        let target = gate_matrix(&Gate::new(GateKind::Toffoli4, vec![0, 1, 2, 3])).unwrap();
        // ancilla (qubit 4) is the low bit: compare columns with anc = 0
        for col in 0..16 {
            let full_col = col << 1;
            for row in 0..16 {
                let got = u[(row << 1, full_col)];
                let want = target[(row, col)];
                assert!((got - want).norm() < 1e-9, "entry {row},{col}");
            }
            // no leakage into anc = 1
            for row in 0..16 {
                assert!(u[((row << 1) | 1, full_col)].norm() < 1e-9);
            }
        }
    }

    #[test]
    fn zcz_basic_cases() {
        let m = crate::ir::default_machine();
        // a single CZ
        let mut c1 = Circuit::new(2);
        c1.push(Gate::new(GateKind::Cz, vec![0, 1]));
        let dec = compile_zcz(&c1, &[1, 1], &m).unwrap();
        assert_eq!(dec.gates.iter().filter(|g| matches!(g.kind, GateKind::Xx(_))).count(), 1);
        let target = circuit_unitary(&c1).unwrap();
        assert_dec_equals(&dec, &target, 2, "zcz single cz");

        // a lone T gate
        let mut c2 = Circuit::new(1);
        c2.push(Gate::new(GateKind::T, vec![0]));
        let dec = compile_zcz(&c2, &[1], &m).unwrap();
        let target = circuit_unitary(&c2).unwrap();
        assert_dec_equals(&dec, &target, 1, "zcz lone T");

        // untouched qubits receive no pulses
        let mut c3 = Circuit::new(3);
        c3.push(Gate::new(GateKind::S, vec![1]));
        let dec = compile_zcz(&c3, &[1, 1, 1], &m).unwrap();
        assert!(dec.gates.iter().all(|g| g.qubits == vec![1]));

        // rejects non-Z gates
        let mut c4 = Circuit::new(1);
        c4.push(Gate::new(GateKind::H, vec![0]));
        assert!(compile_zcz(&c4, &[1], &m).is_err());
    }

    #[test]
    fn zcz_three_qubit_example() {
        let m = crate::ir::default_machine();
        let mut c = Circuit::new(3);
        c.push(Gate::new(GateKind::Cz, vec![0, 1]));
        c.push(Gate::new(GateKind::Cz, vec![1, 2]));
        c.push(Gate::new(GateKind::S, vec![1]));
        let dec = compile_zcz(&c, &[1, 1, 1], &m).unwrap();
        assert_eq!(dec.gates.iter().filter(|g| matches!(g.kind, GateKind::Xx(_))).count(), 2);
        let target = circuit_unitary(&c).unwrap();
        assert_dec_equals(&dec, &target, 3, "zcz 3q");
        // uniform v gives uniform RY layers
        let rys: Vec<_> = dec
            .gates
            .iter()
            .filter_map(|g| match g.kind {
                GateKind::Ry(t) => Some(t),
                _ => None,
            })
            .collect();
        assert_eq!(rys.len(), 6);
        assert!(rys[..3].iter().all(|t| t.close_to(Angle::pi(1, 2), 0.0)));
        assert!(rys[3..].iter().all(|t| t.close_to(Angle::pi(-1, 2), 0.0)));
    }
}
