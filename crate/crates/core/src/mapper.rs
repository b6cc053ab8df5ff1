//! Placement of logical wires onto ions and compile-time removal of SWAP
//! gates by wire relabeling.

use thiserror::Error;

use crate::ir::{Circuit, Gate, GateKind, MachineConfig};

#[derive(Debug, Error)]
pub enum MapError {
    #[error("circuit needs {0} wires but the machine has {1} ions")]
    TooManyQubits(usize, usize),
    #[error("mapping override is not an injection of {0} wires into {1} ions")]
    BadOverride(usize, usize),
}

fn is_control(g: &Gate, q: usize) -> bool {
    match g.kind {
        GateKind::Cnot | GateKind::Cxpow(_) | GateKind::Cypow(_) | GateKind::Czpow(_) => {
            g.qubits[0] == q
        }
        GateKind::Cz | GateKind::Xx(_) => true,
        _ => false,
    }
}

/// Scores a placement (`map[wire] = ion`). Primary: summed per-pair
/// amplitude-error magnitudes of the two-qubit gates (lower is better).
/// Secondary: number of wire-adjacent two-qubit gate pairs that share the
/// wire as a control and land on equal-sign ion pairs, whose boundary
/// rotations can cancel (higher is better).
pub fn score_mapping(c: &Circuit, map: &[usize], m: &MachineConfig) -> (f64, usize) {
    let mut e_sum = 0.0;
    for g in &c.gates {
        if g.kind.arity() == Some(2) {
            e_sum += m.pair_e(map[g.qubits[0]], map[g.qubits[1]]);
        }
    }
    let sign_of = |g: &Gate| m.sign(map[g.qubits[0]], map[g.qubits[1]]);
    let mut cancels = 0usize;
    for q in 0..c.n {
        let on_wire: Vec<&Gate> = c.gates.iter().filter(|g| g.qubits.contains(&q)).collect();
        for pair in on_wire.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a.kind.arity() == Some(2)
                && b.kind.arity() == Some(2)
                && is_control(a, q)
                && is_control(b, q)
                && sign_of(a) == sign_of(b)
            {
                cancels += 1;
            }
        }
    }
    (e_sum, cancels)
}

fn better(cand: (f64, usize), best: (f64, usize)) -> bool {
    cand.0 < best.0 - 1e-12 || ((cand.0 - best.0).abs() <= 1e-12 && cand.1 > best.1)
}

fn exhaustive(c: &Circuit, m: &MachineConfig) -> Vec<usize> {
    let mut best: Option<(Vec<usize>, (f64, usize))> = None;
    let mut map = Vec::with_capacity(c.n);
    let mut used = vec![false; m.n];
    fn rec(
        c: &Circuit,
        m: &MachineConfig,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        best: &mut Option<(Vec<usize>, (f64, usize))>,
    ) {
        if map.len() == c.n {
            let s = score_mapping(c, map, m);
            if best.as_ref().map(|(_, bs)| better(s, *bs)).unwrap_or(true) {
                *best = Some((map.clone(), s));
            }
            return;
        }
        for ion in 0..m.n {
            if !used[ion] {
                used[ion] = true;
                map.push(ion);
                rec(c, m, map, used, best);
                map.pop();
                used[ion] = false;
            }
        }
    }
    rec(c, m, &mut map, &mut used, &mut best);
    best.unwrap().0
}

fn greedy(c: &Circuit, m: &MachineConfig) -> Vec<usize> {
    let mut weight = vec![vec![0usize; c.n]; c.n];
    let mut deg = vec![0usize; c.n];
    for g in &c.gates {
        if g.kind.arity() == Some(2) {
            let (a, b) = (g.qubits[0], g.qubits[1]);
            weight[a][b] += 1;
            weight[b][a] += 1;
            deg[a] += 1;
            deg[b] += 1;
        }
    }
    let mut order: Vec<usize> = (0..c.n).collect();
    order.sort_by_key(|&q| (std::cmp::Reverse(deg[q]), q));
    let mut map = vec![usize::MAX; c.n];
    let mut used = vec![false; m.n];
    for q in order {
        let mut best_ion = usize::MAX;
        let mut best_cost = f64::INFINITY;
        for ion in 0..m.n {
            if used[ion] {
                continue;
            }
            let cost: f64 = (0..c.n)
                .filter(|&p| map[p] != usize::MAX && weight[q][p] > 0)
                .map(|p| weight[q][p] as f64 * m.pair_e(ion, map[p]))
                .sum();
            if cost < best_cost - 1e-12 {
                best_cost = cost;
                best_ion = ion;
            }
        }
        map[q] = best_ion;
        used[best_ion] = true;
    }
    map
}

/// Chooses an injection of circuit wires into ions: exhaustive search up to
/// seven wires (lexicographically first among score ties), greedy
/// heaviest-pair-first placement beyond that.
pub fn find_mapping(c: &Circuit, m: &MachineConfig) -> Result<Vec<usize>, MapError> {
    if c.n > m.n {
        return Err(MapError::TooManyQubits(c.n, m.n));
    }
    if c.n == 0 {
        return Ok(Vec::new());
    }
    Ok(if c.n <= 7 {
        exhaustive(c, m)
    } else {
        greedy(c, m)
    })
}

/// Removes every SWAP by relabeling the gates that follow it. Returns the
/// rewritten circuit (acting on the original wire labels throughout) and
/// the final wire placement: `perm[p]` is the original wire whose qubit
/// ends at position `p` of the input circuit.
pub fn eliminate_swaps(c: &Circuit) -> (Circuit, Vec<usize>) {
    let mut loc: Vec<usize> = (0..c.n).collect();
    let mut out = Circuit::new(c.n);
    for g in &c.gates {
        match g.kind {
            GateKind::Swap => {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                loc.swap(a, b);
            }
            _ => {
                let qs: Vec<usize> = g.qubits.iter().map(|&q| loc[q]).collect();
                out.push(Gate::new(g.kind.clone(), qs));
            }
        }
    }
    (out, loc)
}
