//! Benchmark circuits (Toffoli variants, QFT, Grover search) and the
//! frozen expected-results table they are checked against.

use crate::ir::{Circuit, Gate, GateKind, MachineConfig};
use crate::optimizer::RewritePlan;
use crate::pipeline::{compile, CompileOptions, CompileResult, PipelineError, Verdict};
use crate::report::objective_label;

pub const BENCH_NAMES: [&str; 8] = [
    "toffoli",
    "grover-011-111",
    "grover-011-101",
    "grover-010-100",
    "grover-000-111",
    "qft4",
    "qft5",
    "toffoli4",
];

fn bits3(s: &str) -> Result<[u8; 3], String> {
    let b: Vec<u8> = s
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(format!("bad bitstring '{s}'")),
        })
        .collect::<Result<_, _>>()?;
    if b.len() != 3 {
        return Err(format!("bitstring '{s}' must have 3 bits"));
    }
    Ok([b[0], b[1], b[2]])
}

pub fn qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for i in 0..n {
        c.push(Gate::new(GateKind::H, vec![i]));
        for j in (i + 1)..n {
            c.push(Gate::new(
                GateKind::Czpow(0.5f64.powi((j - i) as i32)),
                vec![j, i],
            ));
        }
    }
    for i in 0..n / 2 {
        c.push(Gate::new(GateKind::Swap, vec![i, n - 1 - i]));
    }
    c
}

fn x_where_zero(c: &mut Circuit, t: &[u8]) {
    for (q, &bit) in t.iter().enumerate() {
        if bit == 0 {
            c.push(Gate::new(GateKind::X, vec![q]));
        }
    }
}

/// Flips qubit 3 exactly on the two marked 3-bit strings, specialized by
/// the Hamming distance between them.
fn mark_pair(c: &mut Circuit, t1: [u8; 3], t2: [u8; 3]) {
    let diff: Vec<usize> = (0..3).filter(|&i| t1[i] != t2[i]).collect();
    match diff.len() {
        1 => {
            let agree: Vec<usize> = (0..3).filter(|&i| t1[i] == t2[i]).collect();
            let mask: Vec<u8> = (0..3)
                .map(|i| if agree.contains(&i) { t1[i] } else { 1 })
                .collect();
            x_where_zero(c, &mask);
            c.push(Gate::new(GateKind::Toffoli, vec![agree[0], agree[1], 3]));
            x_where_zero(c, &mask);
        }
        2 => {
            let (dj, dk) = (diff[0], diff[1]);
            let m = (0..3).find(|i| !diff.contains(i)).unwrap();
            c.push(Gate::new(GateKind::Cnot, vec![dj, dk]));
            if t1[m] == 0 {
                c.push(Gate::new(GateKind::X, vec![m]));
            }
            c.push(Gate::new(GateKind::Toffoli, vec![dk, m, 3]));
            if t1[m] == 0 {
                c.push(Gate::new(GateKind::X, vec![m]));
            }
            c.push(Gate::new(GateKind::Cnot, vec![dj, dk]));
        }
        3 => {
            // after conjugation the marked pair is {000, 111}; with
            // w = x0+x1+x2 and p = w mod 2, X * V^(w+p) flips the target
            // exactly at w = 0 and w = 3, using 8 interactions
            x_where_zero(c, &t1);
            c.push(Gate::new(GateKind::X, vec![3]));
            for q in 0..3 {
                c.push(Gate::new(GateKind::Cxpow(0.5), vec![q, 3]));
            }
            c.push(Gate::new(GateKind::Cnot, vec![0, 2]));
            c.push(Gate::new(GateKind::Cnot, vec![1, 2]));
            c.push(Gate::new(GateKind::Cxpow(0.5), vec![2, 3]));
            c.push(Gate::new(GateKind::Cnot, vec![1, 2]));
            c.push(Gate::new(GateKind::Cnot, vec![0, 2]));
            x_where_zero(c, &t1);
        }
        _ => unreachable!("distinct targets"),
    }
}

/// Inversion about the mean on the three search qubits.
fn diffusion3(c: &mut Circuit) {
    for q in 0..3 {
        c.push(Gate::new(GateKind::H, vec![q]));
        c.push(Gate::new(GateKind::X, vec![q]));
    }
    c.push(Gate::new(GateKind::H, vec![2]));
    c.push(Gate::new(GateKind::Toffoli, vec![0, 1, 2]));
    c.push(Gate::new(GateKind::H, vec![2]));
    for q in 0..3 {
        c.push(Gate::new(GateKind::X, vec![q]));
        c.push(Gate::new(GateKind::H, vec![q]));
    }
}

/// One Grover iteration marking two of eight strings with a bit-flip
/// oracle; qubit 3 is the oracle output, prepared in |->.
pub fn grover_pair(t1: [u8; 3], t2: [u8; 3]) -> Circuit {
    let mut c = Circuit::new(4);
    c.push(Gate::new(GateKind::X, vec![3]));
    c.push(Gate::new(GateKind::H, vec![3]));
    for q in 0..3 {
        c.push(Gate::new(GateKind::H, vec![q]));
    }
    mark_pair(&mut c, t1, t2);
    diffusion3(&mut c);
    c
}

/// One Grover iteration marking a single string of eight with a bit-flip
/// oracle built from a three-control Toffoli.
pub fn grover_single(t: [u8; 3]) -> Circuit {
    let mut c = Circuit::new(4);
    c.push(Gate::new(GateKind::X, vec![3]));
    c.push(Gate::new(GateKind::H, vec![3]));
    for q in 0..3 {
        c.push(Gate::new(GateKind::H, vec![q]));
    }
    x_where_zero(&mut c, &t);
    c.push(Gate::new(GateKind::Toffoli4, vec![0, 1, 2, 3]));
    x_where_zero(&mut c, &t);
    diffusion3(&mut c);
    c
}

/// One Grover iteration over three qubits with a phase oracle. The oracle
/// is the algebraic normal form of the two-target indicator; the cubic
/// terms of the two indicators always cancel, leaving Z and CZ phases.
pub fn grover_phase_pair(t1: [u8; 3], t2: [u8; 3]) -> Circuit {
    let mut c = Circuit::new(3);
    for q in 0..3 {
        c.push(Gate::new(GateKind::H, vec![q]));
    }
    let as_index = |t: [u8; 3]| (t[0] as usize) << 2 | (t[1] as usize) << 1 | t[2] as usize;
    let mut f = [0u8; 8];
    f[as_index(t1)] ^= 1;
    f[as_index(t2)] ^= 1;
    let mut a = f;
    for bit in 0..3 {
        for x in 0..8 {
            if x & (1 << bit) != 0 {
                a[x] ^= a[x & !(1 << bit)];
            }
        }
    }
    assert_eq!(a[0b111], 0, "cubic coefficient must cancel");
    for s in 1..8usize {
        if a[s] == 0 {
            continue;
        }
        let qs: Vec<usize> = (0..3).filter(|&q| s & (1 << (2 - q)) != 0).collect();
        match qs.len() {
            1 => c.push(Gate::new(GateKind::Z, qs)),
            2 => c.push(Gate::new(GateKind::Cz, qs)),
            _ => unreachable!(),
        }
    }
    diffusion3(&mut c);
    c
}

/// One Grover iteration over three qubits, single marked string, phase
/// oracle built from an X-conjugated doubly-controlled Z.
pub fn grover_phase_single(t: [u8; 3]) -> Circuit {
    let mut c = Circuit::new(3);
    for q in 0..3 {
        c.push(Gate::new(GateKind::H, vec![q]));
    }
    x_where_zero(&mut c, &t);
    c.push(Gate::new(GateKind::H, vec![2]));
    c.push(Gate::new(GateKind::Toffoli, vec![0, 1, 2]));
    c.push(Gate::new(GateKind::H, vec![2]));
    x_where_zero(&mut c, &t);
    diffusion3(&mut c);
    c
}

pub fn toffoli_bench() -> Circuit {
    let mut c = Circuit::new(3);
    c.push(Gate::new(GateKind::Toffoli, vec![0, 1, 2]));
    c
}

pub fn toffoli4_bench() -> Circuit {
    let mut c = Circuit::new(4);
    c.push(Gate::new(GateKind::Toffoli4, vec![0, 1, 2, 3]));
    c
}

/// Builds a benchmark circuit by name, returning the circuit and an
/// optional pinned ion placement.
pub fn build_benchmark(name: &str) -> Result<(Circuit, Option<Vec<usize>>), String> {
    if name == "toffoli" {
        return Ok((toffoli_bench(), Some(vec![1, 3, 4])));
    }
    if name == "toffoli4" {
        return Ok((toffoli4_bench(), None));
    }
    if name == "qft4" {
        return Ok((qft(4), None));
    }
    if name == "qft5" {
        return Ok((qft(5), None));
    }
    if let Some(rest) = name.strip_prefix("grover-phase-") {
        let parts: Vec<&str> = rest.split('-').collect();
        return match parts.as_slice() {
            [t] => Ok((grover_phase_single(bits3(t)?), None)),
            [t1, t2] if t1 != t2 => {
                Ok((grover_phase_pair(bits3(t1)?, bits3(t2)?), None))
            }
            _ => Err(format!("bad grover spec '{name}'")),
        };
    }
    if let Some(rest) = name.strip_prefix("grover-") {
        let parts: Vec<&str> = rest.split('-').collect();
        return match parts.as_slice() {
            [t] => Ok((grover_single(bits3(t)?), None)),
            [t1, t2] if t1 != t2 => Ok((grover_pair(bits3(t1)?, bits3(t2)?), None)),
            _ => Err(format!("bad grover spec '{name}'")),
        };
    }
    Err(format!(
        "unknown benchmark '{name}' (known: {}, grover-<bits>[-<bits>], grover-phase-<bits>[-<bits>])",
        BENCH_NAMES.join(", ")
    ))
}

/// Named oracle bodies usable from circuit files via the `oracle` mnemonic.
pub fn oracle_registry() -> Vec<(String, Circuit)> {
    let mut out = Vec::new();
    let pairs = [
        ([0, 1, 1], [1, 1, 1]),
        ([0, 1, 1], [1, 0, 1]),
        ([0, 1, 0], [1, 0, 0]),
        ([0, 0, 0], [1, 1, 1]),
    ];
    for (t1, t2) in pairs {
        let mut body = Circuit::new(4);
        mark_pair(&mut body, t1, t2);
        let tag = |t: [u8; 3]| t.map(|b| b.to_string()).join("");
        out.push((format!("mark-{}-{}", tag(t1), tag(t2)), body));
    }
    out
}

#[derive(Debug)]
pub enum BenchError {
    Unknown(String),
    Compile(PipelineError),
}

impl std::fmt::Display for BenchError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BenchError::Unknown(s) => write!(f, "{s}"),
            BenchError::Compile(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for BenchError {}

pub fn run_benchmark(
    name: &str,
    m: &MachineConfig,
    plan: RewritePlan,
) -> Result<CompileResult, BenchError> {
    let (circuit, mapping) = build_benchmark(name).map_err(BenchError::Unknown)?;
    let opts = CompileOptions {
        plan,
        mapping_override: mapping,
        name: name.into(),
        ..CompileOptions::default()
    };
    compile(&circuit, m, &opts).map_err(BenchError::Compile)
}

/// One benchmark result as a stable pipe-separated row.
pub fn row_line(r: &CompileResult) -> String {
    let rep = &r.report;
    let verified = match &rep.verdict {
        Verdict::Verified { .. } => "yes".to_string(),
        Verdict::Failed { .. } => "no".to_string(),
        Verdict::Skipped { reason } => format!("skipped:{reason}"),
    };
    format!(
        "{}|{}|{}|{}|{}|{}|{}|{}",
        rep.name,
        rep.logical_qubits,
        rep.pulses_xx,
        rep.pulses_1q,
        crate::cost::fmt_duration(rep.cost.duration_us),
        rep.cost.e1.render(),
        rep.cost.e2.render(),
        verified
    )
}

pub fn expected_rows() -> Vec<(String, String)> {
    include_str!("../data/expected_bench.txt")
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|l| {
            let name = l.split('|').next().unwrap_or("").to_string();
            (name, l.to_string())
        })
        .collect()
}

pub struct BenchOutcome {
    pub name: String,
    pub actual: String,
    pub expected: Option<String>,
    pub pass: bool,
}

/// Runs one benchmark under the time objective and compares the full row
/// against the frozen table.
pub fn check_benchmark(name: &str, m: &MachineConfig) -> Result<BenchOutcome, BenchError> {
    let result = run_benchmark(name, m, RewritePlan::time())?;
    let actual = row_line(&result);
    let expected = expected_rows()
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, row)| row);
    let pass = expected.as_deref() == Some(actual.as_str());
    Ok(BenchOutcome {
        name: name.into(),
        actual,
        expected,
        pass,
    })
}

pub fn objective_for_table() -> String {
    objective_label(RewritePlan::time().objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{circuit_unitary, dft, equiv_global_phase, simulate, StateVector};

    fn marked_probability(c: &Circuit, marked: &[[u8; 3]]) -> f64 {
        // marginal over everything but the three search qubits
        let out = simulate(c, &StateVector::zero(c.n)).unwrap();
        let rest = c.n - 3;
        let mut p = 0.0;
        for t in marked {
            let x = ((t[0] as usize) << 2 | (t[1] as usize) << 1 | t[2] as usize) << rest;
            for low in 0..(1 << rest) {
                p += out.probability(x | low);
            }
        }
        p
    }

    #[test]
    fn qft_matches_fourier_transform() {
        for n in [2, 3, 4] {
            let u = circuit_unitary(&qft(n)).unwrap();
            assert!(
                equiv_global_phase(&u, &dft(1 << n), 1e-9),
                "qft({n}) is not the transform"
            );
        }
    }

    #[test]
    fn grover_pairs_find_both_targets_with_certainty() {
        let cases = [
            ([0, 1, 1], [1, 1, 1]),
            ([0, 1, 1], [1, 0, 1]),
            ([0, 1, 0], [1, 0, 0]),
            ([0, 0, 0], [1, 1, 1]),
        ];
        for (t1, t2) in cases {
            let c = grover_pair(t1, t2);
            let p = marked_probability(&c, &[t1, t2]);
            assert!((p - 1.0).abs() < 1e-9, "pair {t1:?} {t2:?}: p={p}");
        }
    }

    #[test]
    fn grover_single_probability_is_25_of_32() {
        let c = grover_single([0, 1, 1]);
        let p = marked_probability(&c, &[[0, 1, 1]]);
        assert!((p - 25.0 / 32.0).abs() < 1e-9, "p={p}");
    }

    #[test]
    fn grover_phase_variants_behave() {
        let c = grover_phase_pair([0, 1, 1], [1, 1, 1]);
        let p = marked_probability(&c, &[[0, 1, 1], [1, 1, 1]]);
        assert!((p - 1.0).abs() < 1e-9);
        // single CZ oracle for this pair
        let czs = c
            .gates
            .iter()
            .filter(|g| matches!(g.kind, GateKind::Cz))
            .count();
        assert_eq!(czs, 1);

        let c = grover_phase_single([1, 0, 1]);
        let p = marked_probability(&c, &[[1, 0, 1]]);
        assert!((p - 25.0 / 32.0).abs() < 1e-9);
    }

    #[test]
    fn pair_oracle_interaction_budget() {
        // hamming distance picks the construction: 5, 7, or 8 interactions
        let count_2q = |t1, t2| {
            let mut c = Circuit::new(4);
            mark_pair(&mut c, t1, t2);
            c.gates
                .iter()
                .map(|g| match g.kind {
                    GateKind::Toffoli => 5,
                    GateKind::Cnot | GateKind::Cxpow(_) => 1,
                    _ => 0,
                })
                .sum::<usize>()
        };
        assert_eq!(count_2q([0, 1, 1], [1, 1, 1]), 5);
        assert_eq!(count_2q([0, 1, 1], [1, 0, 1]), 7);
        assert_eq!(count_2q([0, 0, 0], [1, 1, 1]), 8);
    }

    #[test]
    fn benchmark_names_build() {
        for name in BENCH_NAMES {
            build_benchmark(name).unwrap();
        }
        assert!(build_benchmark("grover-01-11").is_err());
        assert!(build_benchmark("nonesuch").is_err());
    }
}
