use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ionc::bench::{check_benchmark, oracle_registry, BENCH_NAMES};
use ionc::ir::{default_machine, Circuit, Level, MachineConfig};
use ionc::linalg::{simulate, StateVector};
use ionc::optimizer::{Direction, Objective, RewritePlan};
use ionc::pipeline::{compile, verify_schedule, CompileOptions, Verdict};
use ionc::report::{render, ReportFormat};
use ionc::text::{emit_schedule, parse_circuit, parse_file, parse_machine};

/// Compiles logical circuits to trapped-ion pulse schedules.
#[derive(Parser)]
#[command(name = "ionc", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a gate circuit to a verified pulse schedule
    Compile {
        /// Circuit file
        circuit: PathBuf,
        /// Machine description (default: bundled five-ion chain)
        #[arg(long)]
        machine: Option<PathBuf>,
        /// time, error, or balanced=<lambda>
        #[arg(long, default_value = "time")]
        objective: String,
        /// Sweep direction for the error objective: left or right
        #[arg(long, default_value = "left")]
        rx_direction: String,
        /// Skip unitary verification
        #[arg(long)]
        no_verify: bool,
        /// Write the pulse schedule here (default: stdout)
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Write the report here instead of stdout
        #[arg(long)]
        report: Option<PathBuf>,
        /// Report format: text or structured
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Check a pulse schedule against a logical circuit
    Verify {
        logical: PathBuf,
        schedule: PathBuf,
        #[arg(long)]
        machine: Option<PathBuf>,
    },
    /// Run a circuit on basis input and print the output state
    Simulate {
        circuit: PathBuf,
        /// Initial basis state as a bitstring (default: all zeros)
        #[arg(long)]
        state: Option<String>,
        /// Print probabilities instead of amplitudes
        #[arg(long)]
        probs: bool,
    },
    /// Compile benchmarks and compare against the frozen table
    Bench {
        /// Benchmark name (default: the whole table)
        name: Option<String>,
        #[arg(long)]
        machine: Option<PathBuf>,
    },
    /// Print wire-counting bounds next to compiled actuals
    LemmaBounds {
        circuit: PathBuf,
        #[arg(long)]
        machine: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load_machine(path: &Option<PathBuf>) -> Result<MachineConfig, String> {
    match path {
        None => Ok(default_machine()),
        Some(p) => {
            let src = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            parse_machine(&src).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

fn load_circuit(path: &Path) -> Result<Circuit, String> {
    let src = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_circuit(&src).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_objective(s: &str, dir: &str) -> Result<RewritePlan, String> {
    let rx_direction = match dir {
        "left" => Direction::Left,
        "right" => Direction::Right,
        other => return Err(format!("rx-direction must be left or right, got '{other}'")),
    };
    let objective = if s == "time" {
        Objective::Time
    } else if s == "error" {
        Objective::Error
    } else if let Some(l) = s.strip_prefix("balanced=") {
        let l: f64 = l.parse().map_err(|_| format!("bad lambda '{l}'"))?;
        if !(0.0..=1.0).contains(&l) {
            return Err(format!("lambda must be in [0, 1], got {l}"));
        }
        Objective::Balanced(l)
    } else {
        return Err(format!(
            "objective must be time, error, or balanced=<lambda>, got '{s}'"
        ));
    };
    Ok(RewritePlan {
        objective,
        rx_direction,
    })
}

fn tolerance() -> Result<f64, String> {
    match std::env::var("ION_COMPILE_TOL") {
        Err(_) => Ok(1e-8),
        Ok(v) => v
            .parse::<f64>()
            .ok()
            .filter(|t| *t > 0.0)
            .ok_or_else(|| format!("ION_COMPILE_TOL must be a positive number, got '{v}'")),
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Compile {
            circuit,
            machine,
            objective,
            rx_direction,
            no_verify,
            schedule,
            report,
            format,
        } => {
            let m = load_machine(&machine)?;
            let input = load_circuit(&circuit)?;
            let plan = parse_objective(&objective, &rx_direction)?;
            let fmt = match format.as_str() {
                "text" => ReportFormat::Text,
                "structured" => ReportFormat::Structured,
                other => return Err(format!("format must be text or structured, got '{other}'")),
            };
            let name = circuit
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "circuit".into());
            let opts = CompileOptions {
                plan,
                verify: !no_verify,
                tol: tolerance()?,
                oracles: oracle_registry(),
                name,
                ..CompileOptions::default()
            };
            let out = compile(&input, &m, &opts).map_err(|e| e.to_string())?;
            let text = emit_schedule(
                &out.schedule,
                &out.report.mapping,
                &out.report.output_perm,
                out.report.cost.duration_us,
            );
            match &schedule {
                Some(p) => fs::write(p, &text).map_err(|e| format!("{}: {e}", p.display()))?,
                None => print!("{text}"),
            }
            let rendered = render(&out.report, fmt);
            match &report {
                Some(p) => fs::write(p, &rendered).map_err(|e| format!("{}: {e}", p.display()))?,
                None => print!("{rendered}"),
            }
            if let Verdict::Failed { defect } = out.report.verdict {
                eprintln!("verification FAILED (defect {defect:.2e})");
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify {
            logical,
            schedule,
            machine,
        } => {
            let m = load_machine(&machine)?;
            let logical_c = load_circuit(&logical)?;
            let src = fs::read_to_string(&schedule)
                .map_err(|e| format!("{}: {e}", schedule.display()))?;
            let parsed = parse_file(&src).map_err(|e| format!("{}: {e}", schedule.display()))?;
            if parsed.circuit.level() != Level::Physical {
                return Err("schedule file must contain only R and XX pulses".into());
            }
            let map = parsed
                .map
                .ok_or_else(|| "schedule file is missing its MAP line".to_string())?;
            let perm = parsed
                .perm
                .ok_or_else(|| "schedule file is missing its PERM line".to_string())?;
            if map.len() != logical_c.n || perm.len() != logical_c.n {
                return Err(format!(
                    "MAP/PERM cover {} wires but the logical circuit has {}",
                    map.len(),
                    logical_c.n
                ));
            }
            if logical_c
                .gates
                .iter()
                .any(|g| matches!(g.kind, ionc::ir::GateKind::Oracle(_)))
            {
                return Err("verify does not resolve oracle tags; compile the file instead".into());
            }
            match verify_schedule(&logical_c, &parsed.circuit, &map, &perm, &m, tolerance()?) {
                Verdict::Verified { defect } => {
                    println!("verified: yes (defect {defect:.2e})");
                    Ok(ExitCode::SUCCESS)
                }
                Verdict::Failed { defect } => {
                    println!("verified: NO (defect {defect:.2e})");
                    Ok(ExitCode::from(2))
                }
                Verdict::Skipped { reason } => {
                    println!("verified: skipped ({reason})");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Cmd::Simulate {
            circuit,
            state,
            probs,
        } => {
            let input = load_circuit(&circuit)?;
            let index = match &state {
                None => 0usize,
                Some(bits) => {
                    if bits.len() != input.n || !bits.chars().all(|c| c == '0' || c == '1') {
                        return Err(format!(
                            "state must be {} bits of 0/1, got '{bits}'",
                            input.n
                        ));
                    }
                    bits.chars()
                        .fold(0usize, |acc, c| acc << 1 | (c == '1') as usize)
                }
            };
            let out = simulate(&input, &StateVector::basis(input.n, index))
                .map_err(|e| e.to_string())?;
            for (i, amp) in out.amp.iter().enumerate() {
                let p = amp.norm_sqr();
                if p <= 1e-12 {
                    continue;
                }
                let bits: String = (0..input.n)
                    .map(|q| {
                        if (i >> (input.n - 1 - q)) & 1 == 1 {
                            '1'
                        } else {
                            '0'
                        }
                    })
                    .collect();
                if probs {
                    println!("{bits} {:.6}", p);
                } else {
                    println!("{bits} {:+.6}{:+.6}i", amp.re, amp.im);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Bench { name, machine } => {
            let m = load_machine(&machine)?;
            let names: Vec<String> = match name {
                Some(n) if n != "all" => vec![n],
                _ => BENCH_NAMES.iter().map(|s| s.to_string()).collect(),
            };
            let mut all_pass = true;
            for n in &names {
                let outcome = check_benchmark(n, &m).map_err(|e| e.to_string())?;
                if outcome.pass {
                    println!("PASS {}", outcome.actual);
                } else {
                    all_pass = false;
                    println!("FAIL {}", outcome.actual);
                    match &outcome.expected {
                        Some(e) => println!("  expected {e}"),
                        None => println!("  expected (no frozen row for '{}')", outcome.name),
                    }
                }
            }
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::LemmaBounds { circuit, machine } => {
            let m = load_machine(&machine)?;
            let input = load_circuit(&circuit)?;
            let opts = CompileOptions {
                oracles: oracle_registry(),
                name: "lemma-bounds".into(),
                ..CompileOptions::default()
            };
            let out = compile(&input, &m, &opts).map_err(|e| e.to_string())?;
            let r = &out.report;
            println!(
                "wires: {} logical + {} interactions -> k = {}",
                r.logical_qubits,
                r.pulses_xx,
                r.logical_qubits + 2 * r.pulses_xx
            );
            println!(
                "single-qubit pulses: {} (bound {})",
                r.pulses_1q, r.lemma1.pulses_1q
            );
            println!(
                "total gates: {} (bound {})",
                r.pulses_1q + r.pulses_xx,
                r.lemma1.gates_total
            );
            println!(
                "single-qubit duration bound: {} us",
                ionc::cost::fmt_duration(r.lemma1.duration_1q_us)
            );
            println!("bounds hold: {}", if r.lemma1_ok { "yes" } else { "NO" });
            Ok(if r.lemma1_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
