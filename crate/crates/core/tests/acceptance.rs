//! Release acceptance checks. Each test covers one shipped guarantee and
//! prints a single `acceptance NN <label>: PASS|FAIL` line; run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::f64::consts::PI;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ionc::angle::Angle;
use ionc::bench::{
    check_benchmark, grover_phase_pair, grover_single, qft, run_benchmark, BENCH_NAMES,
};
use ionc::gatelib::{
    dec_cnot, dec_cxpow, dec_cypow, dec_cz, dec_czpow, dec_h, dec_margolus, dec_rx, dec_ry,
    dec_rz_2pulse, dec_rz_3pulse, dec_toffoli, dec_toffoli4_ancilla, dec_toffoli4_ladder, dec_u2,
    gate_matrix, r_matrix, u2_matrix, Decomposition,
};
use ionc::ir::{default_machine, Circuit, Gate, GateKind, MachineConfig};
use ionc::linalg::{
    circuit_unitary, dft, equiv_global_phase, simulate, Mat, StateVector,
};
use ionc::optimizer::{template_cd, RewritePlan};
use ionc::pipeline::{compile, CompileOptions, CompileResult, Verdict};
use ionc::report::{render, ReportFormat};
use ionc::text::parse_file;

fn check(label: &str, body: impl FnOnce()) {
    let result = catch_unwind(AssertUnwindSafe(body));
    match &result {
        Ok(()) => println!("acceptance {label}: PASS"),
        Err(_) => println!("acceptance {label}: FAIL"),
    }
    if let Err(e) = result {
        resume_unwind(e);
    }
}

fn rand_angle(rng: &mut ChaCha8Rng) -> Angle {
    Angle::from_f64(rng.gen_range(-PI..PI))
}

fn assert_dec(dec: &Decomposition, target: &Mat, n: usize, what: &str) {
    let u = dec.matrix(n).unwrap();
    assert!(equiv_global_phase(&u, target, 1e-9), "{what}");
}

/// The schedule's action on the logical qubits: inputs placed via the
/// mapping, outputs read at the recorded output permutation, amplitude on
/// unused ions required to vanish.
fn logical_unitary(res: &CompileResult, m: &MachineConfig) -> Mat {
    let n0 = res.report.logical_qubits;
    let map = &res.report.mapping;
    let perm = &res.report.output_perm;
    let silent: Vec<usize> = (0..m.n).filter(|ion| !perm.contains(ion)).collect();
    let dim0 = 1usize << n0;
    let mut u = Mat::zeros(dim0, dim0);
    for x in 0..dim0 {
        let mut machine_in = 0usize;
        for w in 0..n0 {
            let bit = (x >> (n0 - 1 - w)) & 1;
            machine_in |= bit << (m.n - 1 - map[w]);
        }
        let phys = simulate(&res.schedule, &StateVector::basis(m.n, machine_in)).unwrap();
        for (k, amp) in phys.amp.iter().enumerate() {
            if silent.iter().any(|&ion| (k >> (m.n - 1 - ion)) & 1 == 1) {
                assert!(amp.norm() < 1e-9, "leakage onto unused ion");
            }
        }
        for y in 0..dim0 {
            let mut k = 0usize;
            for (p, &ion) in perm.iter().enumerate() {
                let bit = (y >> (n0 - 1 - p)) & 1;
                k |= bit << (m.n - 1 - ion);
            }
            u[(y, x)] = phys.amp[k];
        }
    }
    u
}

fn kind_matrix(kind: GateKind, qubits: Vec<usize>) -> Mat {
    gate_matrix(&Gate::new(kind, qubits)).unwrap()
}

#[test]
fn criterion_01_decomposition_equivalence() {
    check("01 decomposition equivalence", || {
        let t0 = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let th = rand_angle(&mut rng);
            let rx = kind_matrix(GateKind::Rx(th), vec![0]);
            let ry = kind_matrix(GateKind::Ry(th), vec![0]);
            let rz = kind_matrix(GateKind::Rz(th), vec![0]);
            assert_dec(&dec_rx(th), &rx, 1, "rx");
            assert_dec(&dec_ry(th), &ry, 1, "ry");
            for v in [1i8, -1] {
                assert_dec(&dec_rz_3pulse(th, v), &rz, 1, "rz 3-pulse");
            }
            let x = rand_angle(&mut rng);
            assert_dec(&dec_rz_2pulse(th, x), &rz, 1, "rz 2-pulse");

            let u = u2_matrix(
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
                rng.gen_range(-PI..PI),
            );
            assert_dec(&dec_u2(&u).unwrap(), &u, 1, "u2 resynthesis");

            let alpha: f64 = rng.gen_range(-1.0..=1.0);
            let cx = kind_matrix(GateKind::Cxpow(alpha), vec![0, 1]);
            let cy = kind_matrix(GateKind::Cypow(alpha), vec![0, 1]);
            let cp = kind_matrix(GateKind::Czpow(alpha), vec![0, 1]);
            for s in [1i8, -1] {
                assert_dec(&dec_cxpow(0, 1, alpha, s).unwrap(), &cx, 2, "cxpow");
                assert_dec(&dec_cypow(0, 1, alpha, s).unwrap(), &cy, 2, "cypow");
                assert_dec(&dec_czpow(0, 1, alpha, s).unwrap(), &cp, 2, "czpow");
            }
        }

        let h = kind_matrix(GateKind::H, vec![0]);
        assert_dec(&dec_h(1), &h, 1, "h variant 1");
        assert_dec(&dec_h(2), &h, 1, "h variant 2");

        let cnot = kind_matrix(GateKind::Cnot, vec![0, 1]);
        let cz = kind_matrix(GateKind::Cz, vec![0, 1]);
        for s in [1i8, -1] {
            for v in [1i8, -1] {
                assert_dec(&dec_cnot(0, 1, s, v), &cnot, 2, "cnot");
                for v2 in [1i8, -1] {
                    assert_dec(&dec_cz(0, 1, s, v, v2).unwrap(), &cz, 2, "cz");
                }
            }
        }

        let tof = kind_matrix(GateKind::Toffoli, vec![0, 1, 2]);
        let u = circuit_unitary(&dec_toffoli(0, 1, 2)).unwrap();
        assert!(equiv_global_phase(&u, &tof, 1e-9), "toffoli");

        // the simplified three-qubit AND agrees with Toffoli up to a
        // diagonal of unit phases
        let u = circuit_unitary(&dec_margolus(0, 1, 2)).unwrap();
        let d = tof.dagger().mul(&u);
        for i in 0..8 {
            for j in 0..8 {
                if i == j {
                    assert!((d[(i, j)].norm() - 1.0).abs() < 1e-9, "margolus diag");
                } else {
                    assert!(d[(i, j)].norm() < 1e-9, "margolus off-diag");
                }
            }
        }

        let tof4 = kind_matrix(GateKind::Toffoli4, vec![0, 1, 2, 3]);
        let u = circuit_unitary(&dec_toffoli4_ladder(0, 1, 2, 3)).unwrap();
        assert!(equiv_global_phase(&u, &tof4, 1e-9), "toffoli4 ladder");

        // ancilla form: exact on the ancilla = |0> subspace, no leakage
        let u = circuit_unitary(&dec_toffoli4_ancilla(0, 1, 2, 3, 4)).unwrap();
        for col in 0..16 {
            for row in 0..16 {
                assert!(
                    (u[(row << 1, col << 1)] - tof4[(row, col)]).norm() < 1e-9,
                    "toffoli4 ancilla"
                );
                assert!(u[((row << 1) | 1, col << 1)].norm() < 1e-9, "ancilla leak");
            }
        }

        assert!(t0.elapsed().as_secs_f64() < 10.0, "suite exceeded 10 s");
    });
}

#[test]
fn criterion_02_template_matches_brute_force() {
    check("02 axis-rotation template", || {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10_000 {
            let a = rand_angle(&mut rng);
            let b = rand_angle(&mut rng);
            match template_cd(a, b) {
                Some((c, d)) => {
                    // RX(a) RY(b) = R(c,d) RX(-a) as exact matrices
                    let lhs = r_matrix(a.val(), 0.0).mul(&r_matrix(b.val(), PI / 2.0));
                    let rhs = r_matrix(c.val(), d.val()).mul(&r_matrix(-a.val(), 0.0));
                    assert!(lhs.max_abs_diff(&rhs) < 1e-9, "template mismatch");
                }
                None => {
                    let k = a.cos() * b.scale(1, 2).cos();
                    assert!(k.abs() >= 1.0 - 1e-9, "spurious degenerate template");
                }
            }
        }
        let (c, d) = template_cd(Angle::pi(1, 2), Angle::pi(-1, 2)).unwrap();
        assert!(c.close_to(Angle::PI, 1e-9), "instance c");
        assert!(d.close_to(Angle::pi(-1, 4), 1e-9), "instance d");
    });
}

#[test]
fn criterion_03_cnot_cost() {
    check("03 cnot cost", || {
        let m = default_machine();
        let mut c = Circuit::new(2);
        c.push(Gate::new(GateKind::Cnot, vec![0, 1]));
        let res = compile(&c, &m, &CompileOptions::default()).unwrap();
        let rep = &res.report;
        assert!(matches!(rep.verdict, Verdict::Verified { .. }), "verify");
        assert_eq!(rep.cost.duration_us, 275.0, "duration");
        assert_eq!(rep.cost.e1.render(), "4 × ε + 1 × E", "e1 ledger");
        assert_eq!(rep.pulses_xx, 1, "one xx");
        assert!(rep.pulses_1q <= 4, "at most four pulses");
    });
}

#[test]
fn criterion_04_toffoli_both_objectives() {
    check("04 toffoli on ions 2,4,5", || {
        let m = default_machine();
        let time = run_benchmark("toffoli", &m, RewritePlan::time()).unwrap();
        let rep = &time.report;
        assert_eq!(rep.mapping, vec![1, 3, 4], "ions 2,4,5");
        assert_eq!(rep.pulses_xx, 5, "five xx");
        assert_eq!(rep.cost.duration_us, 1285.0, "time duration");
        assert_eq!(
            rep.cost.e1.render(),
            "4 × 0.707107ε + 4 × ε + 3 × 0.707107E + 2 × E",
            "time e1 ledger"
        );
        assert!(matches!(rep.verdict, Verdict::Verified { .. }), "time verify");

        let err = run_benchmark("toffoli", &m, RewritePlan::error()).unwrap();
        let rep = &err.report;
        assert_eq!(rep.pulses_xx, 5, "five xx under error objective");
        assert_eq!(rep.pulses_1q, 9, "nine pulses under error objective");
        assert!(rep.cost.duration_us <= 1295.0, "error duration");
        assert!(matches!(rep.verdict, Verdict::Verified { .. }), "error verify");
    });
}

#[test]
fn criterion_05_pulse_count_bounds() {
    check("05 pulse-count bounds", || {
        let m = default_machine();
        for name in BENCH_NAMES {
            let res = run_benchmark(name, &m, RewritePlan::time()).unwrap();
            let rep = &res.report;
            let bound = 2 * (rep.logical_qubits + 2 * rep.pulses_xx);
            assert!(rep.pulses_1q <= bound, "{name}: {} > {bound}", rep.pulses_1q);
            assert!(rep.lemma1_ok, "{name}: reported bound flag");

            let err = run_benchmark(name, &m, RewritePlan::error()).unwrap();
            let rx_form = err.report.rx_form_pulses.expect("rx-form pulses reported");
            assert!(
                rx_form <= err.report.logical_qubits,
                "{name}: {rx_form} axis pulses exceed wire count"
            );
            assert_eq!(err.report.rx_bound_ok, Some(true), "{name}: rx bound flag");
        }
        let qft5 = run_benchmark("qft5", &m, RewritePlan::time()).unwrap();
        let total = qft5.report.pulses_1q + qft5.report.pulses_xx;
        assert!(total <= 60, "qft5 total gate bound");
    });
}

#[test]
fn criterion_06_qft_shapes_and_unitaries() {
    check("06 qft4/qft5 figures and unitary", || {
        let m = default_machine();

        let res = run_benchmark("qft5", &m, RewritePlan::time()).unwrap();
        let rep = &res.report;
        assert_eq!(rep.pulses_xx, 10, "qft5 xx");
        assert!(rep.pulses_1q <= 22, "qft5 single-qubit pulses");
        if rep.pulses_1q < 22 {
            println!(
                "  note: qft5 compiled to {} single-qubit pulses (bound 22)",
                rep.pulses_1q
            );
        }
        assert!(rep.cost.duration_us <= 2669.0, "qft5 duration");
        assert!(matches!(rep.verdict, Verdict::Verified { .. }), "qft5 verify");
        // the recorded output permutation is the bit reversal
        for p in 0..5 {
            assert_eq!(rep.output_perm[p], rep.mapping[4 - p], "qft5 bit reversal");
        }
        let u = logical_unitary(&res, &m);
        assert!(equiv_global_phase(&u, &dft(32), 1e-9), "qft5 is the dft");

        let res = run_benchmark("qft4", &m, RewritePlan::time()).unwrap();
        let rep = &res.report;
        assert_eq!(rep.pulses_xx, 6, "qft4 xx");
        assert!(rep.pulses_1q <= 13, "qft4 single-qubit pulses");
        assert!(rep.cost.duration_us <= 1582.0, "qft4 duration");
        assert!(matches!(rep.verdict, Verdict::Verified { .. }), "qft4 verify");
        for p in 0..4 {
            assert_eq!(rep.output_perm[p], rep.mapping[3 - p], "qft4 bit reversal");
        }
        let u = logical_unitary(&res, &m);
        assert!(equiv_global_phase(&u, &dft(16), 1e-9), "qft4 is the dft");

        // the builder itself agrees with the analytic transform
        let u = circuit_unitary(&qft(4)).unwrap();
        assert!(equiv_global_phase(&u, &dft(16), 1e-9), "qft builder");
    });
}

#[test]
fn criterion_07_toffoli4_target() {
    check("07 three-control toffoli", || {
        let m = default_machine();
        let res = run_benchmark("toffoli4", &m, RewritePlan::time()).unwrap();
        let rep = &res.report;
        assert!(matches!(rep.verdict, Verdict::Verified { .. }), "verify");
        assert!(rep.pulses_xx <= 14, "hard xx bound");
        assert_eq!(
            rep.toffoli4_xx_target,
            Some(rep.pulses_xx <= 11),
            "report flags the 11-xx target"
        );
        let text = render(rep, ReportFormat::Text);
        assert!(text.contains("toffoli xx target"), "target line in report");
        println!(
            "  note: toffoli4 compiled to {} xx gates (11-gate target {})",
            rep.pulses_xx,
            if rep.pulses_xx <= 11 { "met" } else { "missed" }
        );
    });
}

#[test]
fn criterion_08_grover() {
    check("08 grover searches", || {
        let m = default_machine();

        // single-iteration search for one of eight items, bit-flip oracle
        let target = [1u8, 0, 1];
        let circuit = grover_single(target);
        let opts = CompileOptions {
            name: "grover-101".into(),
            ..CompileOptions::default()
        };
        let res = compile(&circuit, &m, &opts).unwrap();
        assert!(matches!(res.report.verdict, Verdict::Verified { .. }));
        let phys = simulate(&res.schedule, &StateVector::basis(m.n, 0)).unwrap();
        let perm = &res.report.output_perm;
        let mut p_marked = 0.0;
        for (k, amp) in phys.amp.iter().enumerate() {
            let hit = (0..3).all(|w| ((k >> (m.n - 1 - perm[w])) & 1) as u8 == target[w]);
            if hit {
                p_marked += amp.norm_sqr();
            }
        }
        assert!((p_marked - 0.78125).abs() <= 1e-9, "marked probability");

        // phase-oracle searches for every pair of marked items stay within
        // six to eight xx gates
        for t1 in 0..8u8 {
            for t2 in (t1 + 1)..8 {
                let bits = |t: u8| [(t >> 2) & 1, (t >> 1) & 1, t & 1];
                let c = grover_phase_pair(bits(t1), bits(t2));
                let opts = CompileOptions {
                    name: format!("grover-phase-{t1}-{t2}"),
                    ..CompileOptions::default()
                };
                let res = compile(&c, &m, &opts).unwrap();
                assert!(matches!(res.report.verdict, Verdict::Verified { .. }));
                let xx = res.report.pulses_xx;
                assert!((6..=8).contains(&xx), "pair {t1},{t2}: {xx} xx");
            }
        }

        // published two-qubit counts for the table rows are match-or-beat
        for (name, xx_target) in [
            ("grover-011-111", 10),
            ("grover-011-101", 12),
            ("grover-010-100", 12),
            ("grover-000-111", 13),
        ] {
            let res = run_benchmark(name, &m, RewritePlan::time()).unwrap();
            assert!(
                res.report.pulses_xx <= xx_target,
                "{name}: {} xx",
                res.report.pulses_xx
            );
        }
    });
}

#[test]
fn criterion_09_z_cz_fast_path() {
    check("09 z/cz fast path", || {
        let m = default_machine();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for round in 0..100 {
            let n = rng.gen_range(2..=4usize);
            let mut pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
                .collect();
            // repeated CZ on one pair cancels outright, so draw distinct pairs
            for i in (1..pairs.len()).rev() {
                pairs.swap(i, rng.gen_range(0..=i));
            }
            let n_cz = rng.gen_range(0..=pairs.len().min(6));
            let n_z = rng.gen_range(if n_cz == 0 { 1 } else { 0 }..=(10 - n_cz).min(6));
            let mut c = Circuit::new(n);
            for &(a, b) in pairs.iter().take(n_cz) {
                c.push(Gate::new(GateKind::Cz, vec![a, b]));
            }
            for _ in 0..n_z {
                c.push(Gate::new(GateKind::Z, vec![rng.gen_range(0..n)]));
            }
            for i in (1..c.gates.len()).rev() {
                c.gates.swap(i, rng.gen_range(0..=i));
            }

            let fast = compile(
                &c,
                &m,
                &CompileOptions {
                    name: format!("zcz-{round}"),
                    ..CompileOptions::default()
                },
            )
            .unwrap();
            let generic = compile(
                &c,
                &m,
                &CompileOptions {
                    name: format!("zcz-{round}-generic"),
                    zcz_fast_path: false,
                    ..CompileOptions::default()
                },
            )
            .unwrap();
            assert!(matches!(fast.report.verdict, Verdict::Verified { .. }));
            assert!(matches!(generic.report.verdict, Verdict::Verified { .. }));
            assert!(fast.report.zcz_fast_path, "fast path taken");

            let uf = logical_unitary(&fast, &m);
            let ug = logical_unitary(&generic, &m);
            assert!(equiv_global_phase(&uf, &ug, 1e-9), "round {round}: paths differ");

            assert_eq!(fast.report.pulses_xx, n_cz, "round {round}: xx per cz");
            let active: usize = (0..n)
                .filter(|&q| c.gates.iter().any(|g| g.qubits.contains(&q)))
                .count();
            assert!(
                fast.report.pulses_1q <= 2 * n + active,
                "round {round}: {} single-qubit pulses",
                fast.report.pulses_1q
            );
        }
    });
}

#[test]
fn criterion_10_round_trip_and_determinism() {
    check("10 round-trip and determinism", || {
        let m = default_machine();
        let res = run_benchmark("qft4", &m, RewritePlan::time()).unwrap();
        let text = ionc::text::emit_schedule(
            &res.schedule,
            &res.report.mapping,
            &res.report.output_perm,
            res.report.cost.duration_us,
        );
        let parsed = parse_file(&text).unwrap();
        assert_eq!(parsed.map.as_deref(), Some(&res.report.mapping[..]));
        assert_eq!(parsed.perm.as_deref(), Some(&res.report.output_perm[..]));
        let u0 = circuit_unitary(&res.schedule).unwrap();
        let u1 = circuit_unitary(&parsed.circuit).unwrap();
        assert!(u0.max_abs_diff(&u1) < 1e-9, "round-trip unitary");

        let table = || -> String {
            BENCH_NAMES
                .iter()
                .map(|name| {
                    let out = check_benchmark(name, &m).unwrap();
                    assert!(out.pass, "{name} drifted from the frozen row");
                    out.actual
                })
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(table(), table(), "table not deterministic");
    });
}
