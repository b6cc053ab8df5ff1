//! Rendering of compilation reports, either as readable text or as stable
//! line-oriented key=value pairs for tooling.

use std::fmt::Write;

use crate::angle::fmt_sig;
use crate::cost::fmt_duration;
use crate::optimizer::Objective;
use crate::pipeline::{CompilationReport, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Structured,
}

pub fn objective_label(obj: Objective) -> String {
    match obj {
        Objective::Time => "time".into(),
        Objective::Error => "error".into(),
        Objective::Balanced(l) => format!("balanced={}", fmt_sig(l, 6)),
    }
}

fn ions_1based(v: &[usize]) -> String {
    v.iter()
        .map(|&i| (i + 1).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn verdict_word(v: &Verdict) -> String {
    match v {
        Verdict::Verified { .. } => "yes".into(),
        Verdict::Failed { .. } => "no".into(),
        Verdict::Skipped { reason } => format!("skipped:{}", reason),
    }
}

pub fn render(report: &CompilationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(report),
        ReportFormat::Structured => render_structured(report),
    }
}

fn render_text(r: &CompilationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "== {} ==", r.name);
    let _ = writeln!(
        s,
        "input: {} qubits, {} gates; objective: {}",
        r.logical_qubits,
        r.logical_gates,
        objective_label(r.objective)
    );
    let _ = writeln!(s, "machine: {} ions", r.machine_ions);
    let _ = writeln!(s, "mapping (wire -> ion): {}", ions_1based(&r.mapping));
    let _ = writeln!(s, "readout (position -> ion): {}", ions_1based(&r.output_perm));
    if let Some(a) = r.ancilla_ion {
        let _ = writeln!(s, "ancilla ion: {}", a + 1);
    }
    if r.zcz_fast_path {
        let _ = writeln!(s, "compiled through the shared z/cz shell");
    }
    let _ = writeln!(s, "passes:");
    for p in &r.pass_stats {
        let _ = writeln!(
            s,
            "  {:<18} {:>3} 1q + {:>2} xx  {:>10} us  score {}",
            p.name,
            p.pulses_1q,
            p.pulses_2q,
            fmt_duration(p.duration_us),
            fmt_duration(p.score)
        );
    }
    let _ = writeln!(s, "pulses: {} single-qubit + {} xx", r.pulses_1q, r.pulses_xx);
    let _ = writeln!(s, "duration: {} \u{b5}s", fmt_duration(r.cost.duration_us));
    let _ = writeln!(s, "e1: {}", r.cost.e1.render());
    let _ = writeln!(s, "e2: {}", r.cost.e2.render());
    let _ = writeln!(
        s,
        "fidelity: f1={} f2={}",
        fmt_sig(r.f1, 6),
        fmt_sig(r.f2, 6)
    );
    let _ = writeln!(
        s,
        "wire-count bounds: {} 1q pulses (limit {}), {} gates (limit {}) -> {}",
        r.pulses_1q,
        r.lemma1.pulses_1q,
        r.pulses_1q + r.pulses_xx,
        r.lemma1.gates_total,
        if r.lemma1_ok { "pass" } else { "FAIL" }
    );
    if let (Some(count), Some(ok)) = (r.rx_form_pulses, r.rx_bound_ok) {
        let _ = writeln!(
            s,
            "rx-form pulses: {} (limit {}) -> {}",
            count,
            r.machine_ions,
            if ok { "pass" } else { "FAIL" }
        );
    }
    if let Some(met) = r.toffoli4_xx_target {
        let _ = writeln!(
            s,
            "three-control toffoli xx target (11): {}",
            if met { "met" } else { "missed" }
        );
    }
    let line = match &r.verdict {
        Verdict::Verified { defect } => format!("verified: yes (defect {:.2e})", defect),
        Verdict::Failed { defect } => format!("verified: NO (defect {:.2e})", defect),
        Verdict::Skipped { reason } => format!("verified: skipped ({})", reason),
    };
    let _ = writeln!(s, "{}", line);
    s
}

fn render_structured(r: &CompilationReport) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{}={}", k, v);
    };
    kv("name", r.name.clone());
    kv("qubits", r.logical_qubits.to_string());
    kv("gates", r.logical_gates.to_string());
    kv("ions", r.machine_ions.to_string());
    kv("objective", objective_label(r.objective));
    kv("mapping", ions_1based(&r.mapping));
    kv("perm", ions_1based(&r.output_perm));
    kv(
        "ancilla",
        r.ancilla_ion.map(|a| (a + 1).to_string()).unwrap_or_else(|| "none".into()),
    );
    kv("zcz_fast_path", if r.zcz_fast_path { "yes" } else { "no" }.into());
    kv("pulses_1q", r.pulses_1q.to_string());
    kv("pulses_xx", r.pulses_xx.to_string());
    kv("duration_us", fmt_duration(r.cost.duration_us));
    kv("e1", r.cost.e1.render());
    kv("e2", r.cost.e2.render());
    kv("f1", fmt_sig(r.f1, 6));
    kv("f2", fmt_sig(r.f2, 6));
    kv("lemma1_ok", if r.lemma1_ok { "yes" } else { "no" }.into());
    if let Some(count) = r.rx_form_pulses {
        kv("rx_form_pulses", count.to_string());
        kv(
            "rx_bound_ok",
            if r.rx_bound_ok == Some(true) { "yes" } else { "no" }.into(),
        );
    }
    if let Some(met) = r.toffoli4_xx_target {
        kv("toffoli4_xx_target", if met { "met" } else { "missed" }.into());
    }
    for (i, p) in r.pass_stats.iter().enumerate() {
        kv(&format!("pass.{}.name", i), p.name.into());
        kv(&format!("pass.{}.pulses_1q", i), p.pulses_1q.to_string());
        kv(&format!("pass.{}.pulses_xx", i), p.pulses_2q.to_string());
        kv(
            &format!("pass.{}.duration_us", i),
            fmt_duration(p.duration_us),
        );
    }
    kv("verified", verdict_word(&r.verdict));
    s
}
