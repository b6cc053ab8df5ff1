//! Text formats: gate circuits, pulse schedules, and machine
//! configuration files. Angles read and print as exact multiples of pi
//! ("pi/4", "-3pi/8", "0.25pi") or as plain radians.

use std::fmt;

use crate::angle::Angle;
use crate::ir::{Circuit, ErrorModel, Gate, GateKind, MachineConfig};

#[derive(Debug, Clone)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

struct Tok<'a> {
    col: usize,
    s: &'a str,
}

fn tokenize(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices().chain([(line.len(), ' ')]) {
        if ch == '#' {
            if let Some(s) = start.take() {
                out.push(Tok {
                    col: s + 1,
                    s: &line[s..i],
                });
            }
            return out;
        }
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Tok {
                    col: s + 1,
                    s: &line[s..i],
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    out
}

fn err(line: usize, tok: &Tok, message: String) -> ParseError {
    ParseError {
        line,
        col: tok.col,
        message,
    }
}

/// Parses "pi/4", "-3pi/8", "0.25pi", "2pi", or a plain radian value.
pub fn parse_angle(s: &str) -> Option<Angle> {
    if let Some(idx) = s.find("pi") {
        let coef = &s[..idx];
        let rest = &s[idx + 2..];
        let den: i64 = if rest.is_empty() {
            1
        } else {
            rest.strip_prefix('/')?.parse().ok().filter(|&d| d > 0)?
        };
        if coef.contains('.') {
            let c: f64 = coef.parse().ok()?;
            return Some(Angle::from_f64(c * std::f64::consts::PI / den as f64));
        }
        let num: i64 = match coef {
            "" => 1,
            "-" => -1,
            _ => coef.parse().ok()?,
        };
        return Some(Angle::pi(num, den));
    }
    s.parse::<f64>().ok().map(Angle::from_f64)
}

/// Plain number: integer, decimal, or a "p/q" fraction.
fn parse_number(s: &str) -> Option<f64> {
    if let Some((p, q)) = s.split_once('/') {
        let p: f64 = p.parse().ok()?;
        let q: f64 = q.parse().ok()?;
        if q == 0.0 {
            return None;
        }
        return Some(p / q);
    }
    s.parse().ok()
}

/// A parsed schedule file: the pulse circuit plus the optional placement
/// (`MAP`, input wire to ion) and readout (`PERM`, output position to ion)
/// lines that compiled schedules carry.
pub struct ParsedFile {
    pub circuit: Circuit,
    pub map: Option<Vec<usize>>,
    pub perm: Option<Vec<usize>>,
}

pub fn parse_file(src: &str) -> Result<ParsedFile, ParseError> {
    let mut n: Option<usize> = None;
    let mut circuit = Circuit::new(0);
    let mut map = None;
    let mut perm = None;
    for (li, line) in src.lines().enumerate() {
        let lineno = li + 1;
        let toks = tokenize(line);
        if toks.is_empty() {
            continue;
        }
        let head = toks[0].s.to_ascii_lowercase();
        let args = &toks[1..];
        if head == "qubits" {
            if n.is_some() {
                return Err(err(lineno, &toks[0], "duplicate qubits line".into()));
            }
            if args.len() != 1 {
                return Err(err(lineno, &toks[0], "qubits takes one count".into()));
            }
            let count: usize = args[0]
                .s
                .parse()
                .map_err(|_| err(lineno, &args[0], format!("bad qubit count '{}'", args[0].s)))?;
            n = Some(count);
            circuit = Circuit::new(count);
            continue;
        }
        let n = n.ok_or_else(|| {
            err(lineno, &toks[0], "expected a 'qubits N' line first".into())
        })?;
        let qubit = |t: &Tok| -> Result<usize, ParseError> {
            let q: usize = t
                .s
                .parse()
                .map_err(|_| err(lineno, t, format!("bad qubit index '{}'", t.s)))?;
            if q >= n {
                return Err(err(lineno, t, format!("qubit {} out of range (n={})", q, n)));
            }
            Ok(q)
        };
        let angle = |t: &Tok| -> Result<Angle, ParseError> {
            parse_angle(t.s).ok_or_else(|| err(lineno, t, format!("bad angle '{}'", t.s)))
        };
        let number = |t: &Tok| -> Result<f64, ParseError> {
            parse_number(t.s).ok_or_else(|| err(lineno, t, format!("bad number '{}'", t.s)))
        };
        let want = |count: usize| -> Result<(), ParseError> {
            if args.len() != count {
                Err(err(
                    lineno,
                    &toks[0],
                    format!("{} takes {} arguments, got {}", head, count, args.len()),
                ))
            } else {
                Ok(())
            }
        };
        let kind_1q = |kind: GateKind| -> Result<Gate, ParseError> {
            want(1)?;
            Ok(Gate::new(kind, vec![qubit(&args[0])?]))
        };
        let gate = match head.as_str() {
            "h" => kind_1q(GateKind::H)?,
            "x" => kind_1q(GateKind::X)?,
            "y" => kind_1q(GateKind::Y)?,
            "z" => kind_1q(GateKind::Z)?,
            "s" => kind_1q(GateKind::S)?,
            "sdg" => kind_1q(GateKind::Sdg)?,
            "t" => kind_1q(GateKind::T)?,
            "tdg" => kind_1q(GateKind::Tdg)?,
            "v" => kind_1q(GateKind::V)?,
            "rx" | "ry" | "rz" => {
                want(2)?;
                let q = qubit(&args[0])?;
                let a = angle(&args[1])?;
                let kind = match head.as_str() {
                    "rx" => GateKind::Rx(a),
                    "ry" => GateKind::Ry(a),
                    _ => GateKind::Rz(a),
                };
                Gate::new(kind, vec![q])
            }
            "r" => {
                want(3)?;
                Gate::new(
                    GateKind::R(angle(&args[1])?, angle(&args[2])?),
                    vec![qubit(&args[0])?],
                )
            }
            "u2" => {
                want(5)?;
                Gate::new(
                    GateKind::U2(
                        angle(&args[1])?.val(),
                        angle(&args[2])?.val(),
                        angle(&args[3])?.val(),
                        angle(&args[4])?.val(),
                    ),
                    vec![qubit(&args[0])?],
                )
            }
            "cnot" | "cz" | "swap" => {
                want(2)?;
                let kind = match head.as_str() {
                    "cnot" => GateKind::Cnot,
                    "cz" => GateKind::Cz,
                    _ => GateKind::Swap,
                };
                Gate::new(kind, vec![qubit(&args[0])?, qubit(&args[1])?])
            }
            "cxp" | "cyp" | "czp" => {
                want(3)?;
                let al = number(&args[2])?;
                let kind = match head.as_str() {
                    "cxp" => GateKind::Cxpow(al),
                    "cyp" => GateKind::Cypow(al),
                    _ => GateKind::Czpow(al),
                };
                Gate::new(kind, vec![qubit(&args[0])?, qubit(&args[1])?])
            }
            "toffoli" => {
                want(3)?;
                Gate::new(
                    GateKind::Toffoli,
                    vec![qubit(&args[0])?, qubit(&args[1])?, qubit(&args[2])?],
                )
            }
            "toffoli4" => {
                want(4)?;
                Gate::new(
                    GateKind::Toffoli4,
                    vec![
                        qubit(&args[0])?,
                        qubit(&args[1])?,
                        qubit(&args[2])?,
                        qubit(&args[3])?,
                    ],
                )
            }
            "xx" => {
                want(3)?;
                Gate::new(
                    GateKind::Xx(angle(&args[2])?),
                    vec![qubit(&args[0])?, qubit(&args[1])?],
                )
            }
            "oracle" => {
                if args.len() < 2 {
                    return Err(err(lineno, &toks[0], "oracle takes a name and qubits".into()));
                }
                let qs = args[1..]
                    .iter()
                    .map(qubit)
                    .collect::<Result<Vec<_>, _>>()?;
                Gate::new(GateKind::Oracle(args[0].s.to_string()), qs)
            }
            "barrier" => {
                let qs = args.iter().map(qubit).collect::<Result<Vec<_>, _>>()?;
                Gate::new(GateKind::Barrier, qs)
            }
            "map" | "perm" => {
                let ions = args
                    .iter()
                    .map(|t| {
                        t.s.parse::<usize>()
                            .map_err(|_| err(lineno, t, format!("bad ion index '{}'", t.s)))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if head == "map" {
                    map = Some(ions);
                } else {
                    perm = Some(ions);
                }
                continue;
            }
            other => {
                return Err(err(lineno, &toks[0], format!("unknown gate '{}'", other)));
            }
        };
        // reject duplicate qubits up front so errors carry positions
        let mut seen = Vec::new();
        for (k, &q) in gate.qubits.iter().enumerate() {
            if seen.contains(&q) {
                let t = &args[if head == "oracle" { k + 1 } else { k }];
                return Err(err(lineno, t, format!("duplicate qubit {}", q)));
            }
            seen.push(q);
        }
        circuit.push(gate);
    }
    if n.is_none() {
        return Err(ParseError {
            line: 1,
            col: 1,
            message: "missing 'qubits N' line".into(),
        });
    }
    Ok(ParsedFile { circuit, map, perm })
}

pub fn parse_circuit(src: &str) -> Result<Circuit, ParseError> {
    parse_file(src).map(|p| p.circuit)
}

/// Renders a compiled pulse schedule. The header summarizes size and
/// duration; MAP gives the ion of each input wire, PERM the ion holding
/// each output position.
pub fn emit_schedule(
    schedule: &Circuit,
    mapping: &[usize],
    perm: &[usize],
    duration_us: f64,
) -> String {
    let mut out = String::new();
    out.push_str("# compiled pulse schedule\n");
    out.push_str(&format!(
        "# ions: {}, pulses: {} ({} single-qubit + {} xx), duration: {} us\n",
        schedule.n,
        schedule.pulse_1q_count() + schedule.xx_count(),
        schedule.pulse_1q_count(),
        schedule.xx_count(),
        crate::cost::fmt_duration(duration_us),
    ));
    out.push_str(&format!("qubits {}\n", schedule.n));
    for g in &schedule.gates {
        match &g.kind {
            GateKind::R(t, p) => {
                out.push_str(&format!("R {} {} {}\n", g.qubits[0], t, p));
            }
            GateKind::Xx(chi) => {
                out.push_str(&format!("XX {} {} {}\n", g.qubits[0], g.qubits[1], chi));
            }
            other => {
                // compiled schedules are pulses only; anything else is a bug
                panic!("cannot emit {} in a schedule", other.mnemonic());
            }
        }
    }
    let join = |v: &[usize]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    out.push_str(&format!("MAP {}\n", join(mapping)));
    out.push_str(&format!("PERM {}\n", join(perm)));
    out
}

/// Parses a machine description: `key=value` scalars (n, tau1q_us,
/// tau2q_us, epsilon, E, error_model), one `sign i j +|-` line per ion pair
/// (1-based, all pairs required), and optional `E i j <value>` overrides.
pub fn parse_machine(src: &str) -> Result<MachineConfig, ParseError> {
    let mut n: Option<usize> = None;
    let mut tau1: Option<f64> = None;
    let mut tau2: Option<f64> = None;
    let mut eps: Option<f64> = None;
    let mut big_e: Option<f64> = None;
    let mut model = ErrorModel::E1;
    let mut signs: Vec<(usize, usize, i8, usize, usize)> = Vec::new();
    let mut overrides: Vec<(usize, usize, f64)> = Vec::new();
    for (li, line) in src.lines().enumerate() {
        let lineno = li + 1;
        let toks = tokenize(line);
        if toks.is_empty() {
            continue;
        }
        if toks[0].s.contains('=') {
            if toks.len() != 1 {
                return Err(err(lineno, &toks[1], "unexpected trailing tokens".into()));
            }
            let (key, value) = toks[0].s.split_once('=').unwrap();
            let fval = |v: &str| -> Result<f64, ParseError> {
                v.parse()
                    .map_err(|_| err(lineno, &toks[0], format!("bad value '{}'", v)))
            };
            match key {
                "n" => {
                    n = Some(value.parse().map_err(|_| {
                        err(lineno, &toks[0], format!("bad ion count '{}'", value))
                    })?)
                }
                "tau1q_us" => tau1 = Some(fval(value)?),
                "tau2q_us" => tau2 = Some(fval(value)?),
                "epsilon" => eps = Some(fval(value)?),
                "E" => big_e = Some(fval(value)?),
                "error_model" => {
                    model = match value {
                        "e1" => ErrorModel::E1,
                        "e2" => ErrorModel::E2,
                        other => {
                            return Err(err(
                                lineno,
                                &toks[0],
                                format!("error_model must be e1 or e2, got '{}'", other),
                            ))
                        }
                    }
                }
                other => {
                    return Err(err(lineno, &toks[0], format!("unknown key '{}'", other)));
                }
            }
            continue;
        }
        match toks[0].s {
            "sign" => {
                if toks.len() != 4 {
                    return Err(err(lineno, &toks[0], "sign takes: i j +|-".into()));
                }
                let i: usize = toks[1].s.parse().map_err(|_| {
                    err(lineno, &toks[1], format!("bad ion '{}'", toks[1].s))
                })?;
                let j: usize = toks[2].s.parse().map_err(|_| {
                    err(lineno, &toks[2], format!("bad ion '{}'", toks[2].s))
                })?;
                let s = match toks[3].s {
                    "+" => 1i8,
                    "-" => -1i8,
                    other => {
                        return Err(err(
                            lineno,
                            &toks[3],
                            format!("sign must be + or -, got '{}'", other),
                        ))
                    }
                };
                signs.push((i, j, s, lineno, toks[1].col));
            }
            "E" => {
                if toks.len() != 4 {
                    return Err(err(lineno, &toks[0], "E takes: i j value".into()));
                }
                let i: usize = toks[1].s.parse().map_err(|_| {
                    err(lineno, &toks[1], format!("bad ion '{}'", toks[1].s))
                })?;
                let j: usize = toks[2].s.parse().map_err(|_| {
                    err(lineno, &toks[2], format!("bad ion '{}'", toks[2].s))
                })?;
                let v: f64 = toks[3].s.parse().map_err(|_| {
                    err(lineno, &toks[3], format!("bad value '{}'", toks[3].s))
                })?;
                overrides.push((i, j, v));
            }
            other => {
                return Err(err(lineno, &toks[0], format!("unknown directive '{}'", other)));
            }
        }
    }
    let missing = |what: &str| ParseError {
        line: 1,
        col: 1,
        message: format!("missing '{}'", what),
    };
    let n = n.ok_or_else(|| missing("n=<ions>"))?;
    let tau1 = tau1.ok_or_else(|| missing("tau1q_us=<us>"))?;
    let tau2 = tau2.ok_or_else(|| missing("tau2q_us=<us>"))?;
    let eps = eps.ok_or_else(|| missing("epsilon=<value>"))?;
    let big_e = big_e.ok_or_else(|| missing("E=<value>"))?;
    if n == 0 || tau1 <= 0.0 || tau2 <= 0.0 || eps < 0.0 || big_e < 0.0 {
        return Err(ParseError {
            line: 1,
            col: 1,
            message: "n must be positive, durations positive, errors non-negative".into(),
        });
    }
    let mut m = MachineConfig::uniform(n, tau1, tau2, eps, big_e);
    m.error_model = model;
    let mut covered = vec![vec![false; n]; n];
    for (i, j, s, lineno, col) in signs {
        let bad = |msg: String| ParseError {
            line: lineno,
            col,
            message: msg,
        };
        if i < 1 || i > n || j < 1 || j > n || i == j {
            return Err(bad(format!("bad ion pair {} {}", i, j)));
        }
        m.set_sign(i - 1, j - 1, s);
        covered[i - 1][j - 1] = true;
        covered[j - 1][i - 1] = true;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if !covered[i][j] {
                return Err(ParseError {
                    line: 1,
                    col: 1,
                    message: format!("missing sign entry for ions {} {}", i + 1, j + 1),
                });
            }
        }
    }
    for (i, j, v) in overrides {
        if i < 1 || i > n || j < 1 || j > n || i == j || v < 0.0 {
            return Err(ParseError {
                line: 1,
                col: 1,
                message: format!("bad E override for ions {} {}", i, j),
            });
        }
        m.set_pair_e(i - 1, j - 1, v);
    }
    Ok(m)
}

/// The bundled five-ion machine description.
pub fn default_machine_text() -> &'static str {
    include_str!("../data/default.machine")
}
