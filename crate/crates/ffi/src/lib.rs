//! C interface to the pulse compiler: opaque handles over parsed circuits,
//! machine configurations, and compilation results, with a thread-local
//! last-error slot.
//!
//! Every pointer returned by an `ionc_*` constructor is owned by the caller
//! and must be released with the matching `ionc_*_free`; accessor results
//! borrow from their handle and are invalidated when it is freed.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ionc::ir::{Circuit, MachineConfig};
use ionc::optimizer::RewritePlan;
use ionc::pipeline::{compile, CompileOptions, Verdict};
use ionc::report::{render, ReportFormat};
use ionc::text::{default_machine_text, emit_schedule, parse_circuit, parse_machine};

pub const IONC_OK: c_int = 0;
pub const IONC_ERR_ARG: c_int = 1;
pub const IONC_ERR_PARSE: c_int = 2;
pub const IONC_ERR_COMPILE: c_int = 3;
pub const IONC_ERR_VERIFY: c_int = 4;
pub const IONC_ERR_PANIC: c_int = 5;

pub const IONC_OBJECTIVE_TIME: c_int = 0;
pub const IONC_OBJECTIVE_ERROR: c_int = 1;
pub const IONC_OBJECTIVE_BALANCED: c_int = 2;

thread_local! {
    static LAST_ERROR: RefCell<(c_int, CString)> =
        RefCell::new((IONC_OK, CString::default()));
}

fn set_error(code: c_int, message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = (code, message));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = (IONC_OK, CString::default()));
}

/// An immutable logical circuit.
pub struct IoncCircuit(Circuit);

/// An immutable machine description.
pub struct IoncMachine(MachineConfig);

/// A finished compilation: the schedule and report are rendered once and
/// handed out as borrowed C strings.
pub struct IoncResult {
    schedule: CString,
    report: CString,
    duration_us: f64,
    pulses_1q: usize,
    pulses_xx: usize,
    verified: bool,
}

unsafe fn str_arg<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, ()> {
    if ptr.is_null() {
        set_error(IONC_ERR_ARG, format!("{what} is null"));
        return Err(());
    }
    match unsafe { CStr::from_ptr(ptr) }.to_str() {
        Ok(s) => Ok(s),
        Err(_) => {
            set_error(IONC_ERR_ARG, format!("{what} is not valid UTF-8"));
            Err(())
        }
    }
}

fn guard<T>(body: impl FnOnce() -> *mut T) -> *mut T {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(p) => p,
        Err(_) => {
            set_error(IONC_ERR_PANIC, "internal panic".into());
            std::ptr::null_mut()
        }
    }
}

/// Parses a circuit file (same format as the `ionc` CLI accepts).
/// Returns null on failure; see `ionc_last_error_message`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string or null.
#[no_mangle]
pub unsafe extern "C" fn ionc_circuit_parse(text: *const c_char) -> *mut IoncCircuit {
    guard(|| {
        let Ok(src) = (unsafe { str_arg(text, "circuit text") }) else {
            return std::ptr::null_mut();
        };
        match parse_circuit(src) {
            Ok(c) => {
                clear_error();
                Box::into_raw(Box::new(IoncCircuit(c)))
            }
            Err(e) => {
                set_error(IONC_ERR_PARSE, e.to_string());
                std::ptr::null_mut()
            }
        }
    })
}

/// Number of logical qubits in the circuit, or -1 for a null handle.
///
/// # Safety
/// `circuit` must be null or a live pointer from `ionc_circuit_parse`.
#[no_mangle]
pub unsafe extern "C" fn ionc_circuit_qubits(circuit: *const IoncCircuit) -> c_int {
    match unsafe { circuit.as_ref() } {
        Some(c) => c.0.n as c_int,
        None => {
            set_error(IONC_ERR_ARG, "circuit is null".into());
            -1
        }
    }
}

/// # Safety
/// `circuit` must be null or a pointer from `ionc_circuit_parse` that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn ionc_circuit_free(circuit: *mut IoncCircuit) {
    if !circuit.is_null() {
        drop(unsafe { Box::from_raw(circuit) });
    }
}

/// The built-in five-ion machine.
#[no_mangle]
pub extern "C" fn ionc_machine_default() -> *mut IoncMachine {
    guard(|| {
        let m = parse_machine(default_machine_text()).expect("built-in machine parses");
        clear_error();
        Box::into_raw(Box::new(IoncMachine(m)))
    })
}

/// Parses a machine configuration file. Returns null on failure.
///
/// # Safety
/// `text` must be a valid NUL-terminated string or null.
#[no_mangle]
pub unsafe extern "C" fn ionc_machine_parse(text: *const c_char) -> *mut IoncMachine {
    guard(|| {
        let Ok(src) = (unsafe { str_arg(text, "machine text") }) else {
            return std::ptr::null_mut();
        };
        match parse_machine(src) {
            Ok(m) => {
                clear_error();
                Box::into_raw(Box::new(IoncMachine(m)))
            }
            Err(e) => {
                set_error(IONC_ERR_PARSE, e.to_string());
                std::ptr::null_mut()
            }
        }
    })
}

/// # Safety
/// `machine` must be null or a pointer from a machine constructor that has
/// not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn ionc_machine_free(machine: *mut IoncMachine) {
    if !machine.is_null() {
        drop(unsafe { Box::from_raw(machine) });
    }
}

/// Compiles `circuit` for `machine`. `objective` is one of the
/// `IONC_OBJECTIVE_*` constants; `lambda` weighs duration against error for
/// the balanced objective (ignored otherwise) and must lie in [0, 1].
/// When `verify` is nonzero the schedule is checked against the input
/// unitary and a mismatch fails the call with `IONC_ERR_VERIFY`.
/// Returns null on failure.
///
/// # Safety
/// `circuit` and `machine` must be live pointers from the respective
/// constructors, or null.
#[no_mangle]
pub unsafe extern "C" fn ionc_compile(
    circuit: *const IoncCircuit,
    machine: *const IoncMachine,
    objective: c_int,
    lambda: c_double,
    verify: c_int,
) -> *mut IoncResult {
    guard(|| {
        let Some(circuit) = (unsafe { circuit.as_ref() }) else {
            set_error(IONC_ERR_ARG, "circuit is null".into());
            return std::ptr::null_mut();
        };
        let Some(machine) = (unsafe { machine.as_ref() }) else {
            set_error(IONC_ERR_ARG, "machine is null".into());
            return std::ptr::null_mut();
        };
        let plan = match objective {
            IONC_OBJECTIVE_TIME => RewritePlan::time(),
            IONC_OBJECTIVE_ERROR => RewritePlan::error(),
            IONC_OBJECTIVE_BALANCED if (0.0..=1.0).contains(&lambda) => {
                RewritePlan::balanced(lambda)
            }
            IONC_OBJECTIVE_BALANCED => {
                set_error(IONC_ERR_ARG, format!("lambda {lambda} outside [0, 1]"));
                return std::ptr::null_mut();
            }
            _ => {
                set_error(IONC_ERR_ARG, format!("unknown objective {objective}"));
                return std::ptr::null_mut();
            }
        };
        let opts = CompileOptions {
            plan,
            verify: verify != 0,
            ..CompileOptions::default()
        };
        let result = match compile(&circuit.0, &machine.0, &opts) {
            Ok(r) => r,
            Err(e) => {
                set_error(IONC_ERR_COMPILE, e.to_string());
                return std::ptr::null_mut();
            }
        };
        if let Verdict::Failed { defect } = result.report.verdict {
            set_error(
                IONC_ERR_VERIFY,
                format!("schedule does not match the circuit (defect {defect:.2e})"),
            );
            return std::ptr::null_mut();
        }
        let schedule = emit_schedule(
            &result.schedule,
            &result.report.mapping,
            &result.report.output_perm,
            result.report.cost.duration_us,
        );
        let report = render(&result.report, ReportFormat::Text);
        let sanitize =
            |s: String| CString::new(s.replace('\0', " ")).unwrap_or_default();
        clear_error();
        Box::into_raw(Box::new(IoncResult {
            schedule: sanitize(schedule),
            report: sanitize(report),
            duration_us: result.report.cost.duration_us,
            pulses_1q: result.report.pulses_1q,
            pulses_xx: result.report.pulses_xx,
            verified: matches!(result.report.verdict, Verdict::Verified { .. }),
        }))
    })
}

/// The emitted schedule text. Borrowed from `result`; do not free.
///
/// # Safety
/// `result` must be null or a live pointer from `ionc_compile`.
#[no_mangle]
pub unsafe extern "C" fn ionc_result_schedule(result: *const IoncResult) -> *const c_char {
    match unsafe { result.as_ref() } {
        Some(r) => r.schedule.as_ptr(),
        None => {
            set_error(IONC_ERR_ARG, "result is null".into());
            std::ptr::null()
        }
    }
}

/// The human-readable compilation report. Borrowed from `result`.
///
/// # Safety
/// `result` must be null or a live pointer from `ionc_compile`.
#[no_mangle]
pub unsafe extern "C" fn ionc_result_report(result: *const IoncResult) -> *const c_char {
    match unsafe { result.as_ref() } {
        Some(r) => r.report.as_ptr(),
        None => {
            set_error(IONC_ERR_ARG, "result is null".into());
            std::ptr::null()
        }
    }
}

/// Total schedule duration in microseconds, or a negative value for a null
/// handle.
///
/// # Safety
/// `result` must be null or a live pointer from `ionc_compile`.
#[no_mangle]
pub unsafe extern "C" fn ionc_result_duration_us(result: *const IoncResult) -> c_double {
    match unsafe { result.as_ref() } {
        Some(r) => r.duration_us,
        None => {
            set_error(IONC_ERR_ARG, "result is null".into());
            -1.0
        }
    }
}

/// Number of single-qubit pulses, or -1 for a null handle.
///
/// # Safety
/// `result` must be null or a live pointer from `ionc_compile`.
#[no_mangle]
pub unsafe extern "C" fn ionc_result_pulses_1q(result: *const IoncResult) -> c_int {
    match unsafe { result.as_ref() } {
        Some(r) => r.pulses_1q as c_int,
        None => {
            set_error(IONC_ERR_ARG, "result is null".into());
            -1
        }
    }
}

/// Number of two-qubit XX pulses, or -1 for a null handle.
///
/// # Safety
/// `result` must be null or a live pointer from `ionc_compile`.
#[no_mangle]
pub unsafe extern "C" fn ionc_result_xx_count(result: *const IoncResult) -> c_int {
    match unsafe { result.as_ref() } {
        Some(r) => r.pulses_xx as c_int,
        None => {
            set_error(IONC_ERR_ARG, "result is null".into());
            -1
        }
    }
}

/// 1 when the schedule was verified against the input unitary, 0 when
/// verification was skipped or disabled, -1 for a null handle.
///
/// # Safety
/// `result` must be null or a live pointer from `ionc_compile`.
#[no_mangle]
pub unsafe extern "C" fn ionc_result_verified(result: *const IoncResult) -> c_int {
    match unsafe { result.as_ref() } {
        Some(r) => r.verified as c_int,
        None => {
            set_error(IONC_ERR_ARG, "result is null".into());
            -1
        }
    }
}

/// # Safety
/// `result` must be null or a pointer from `ionc_compile` that has not been
/// freed yet. Strings borrowed from it become dangling.
#[no_mangle]
pub unsafe extern "C" fn ionc_result_free(result: *mut IoncResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Status of the most recent `ionc_*` call on this thread.
#[no_mangle]
pub extern "C" fn ionc_last_error_code() -> c_int {
    LAST_ERROR.with(|e| e.borrow().0)
}

/// Message for the most recent failure on this thread; empty after a
/// success. Borrowed; valid until the next `ionc_*` call on this thread.
#[no_mangle]
pub extern "C" fn ionc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().1.as_ptr())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cstr(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn compile_through_the_c_surface() {
        unsafe {
            let machine = ionc_machine_default();
            assert!(!machine.is_null());
            let src = cstr("qubits 2\ncnot 0 1\n");
            let circuit = ionc_circuit_parse(src.as_ptr());
            assert!(!circuit.is_null());
            assert_eq!(ionc_circuit_qubits(circuit), 2);

            let result = ionc_compile(circuit, machine, IONC_OBJECTIVE_TIME, 0.0, 1);
            assert!(!result.is_null(), "compile failed");
            assert_eq!(ionc_last_error_code(), IONC_OK);
            assert_eq!(ionc_result_verified(result), 1);
            assert_eq!(ionc_result_xx_count(result), 1);
            assert!(ionc_result_pulses_1q(result) <= 4);
            assert!((ionc_result_duration_us(result) - 275.0).abs() < 1e-9);
            let sched = CStr::from_ptr(ionc_result_schedule(result));
            assert!(sched.to_str().unwrap().contains("XX"));
            let report = CStr::from_ptr(ionc_result_report(result));
            assert!(report.to_str().unwrap().contains("verified"));

            ionc_result_free(result);
            ionc_circuit_free(circuit);
            ionc_machine_free(machine);
        }
    }

    #[test]
    fn balanced_objective_validates_lambda() {
        unsafe {
            let machine = ionc_machine_default();
            let src = cstr("qubits 2\ncnot 0 1\n");
            let circuit = ionc_circuit_parse(src.as_ptr());

            let ok = ionc_compile(circuit, machine, IONC_OBJECTIVE_BALANCED, 0.5, 1);
            assert!(!ok.is_null());
            ionc_result_free(ok);

            let bad = ionc_compile(circuit, machine, IONC_OBJECTIVE_BALANCED, 1.5, 1);
            assert!(bad.is_null());
            assert_eq!(ionc_last_error_code(), IONC_ERR_ARG);

            ionc_circuit_free(circuit);
            ionc_machine_free(machine);
        }
    }

    #[test]
    fn errors_set_code_and_message() {
        unsafe {
            let bad = cstr("qubits 2\ncnot 0 5\n");
            let circuit = ionc_circuit_parse(bad.as_ptr());
            assert!(circuit.is_null());
            assert_eq!(ionc_last_error_code(), IONC_ERR_PARSE);
            let msg = CStr::from_ptr(ionc_last_error_message());
            assert!(msg.to_str().unwrap().contains("line 2"));

            let circuit = ionc_circuit_parse(std::ptr::null());
            assert!(circuit.is_null());
            assert_eq!(ionc_last_error_code(), IONC_ERR_ARG);

            assert_eq!(ionc_circuit_qubits(std::ptr::null()), -1);
            assert!(ionc_result_schedule(std::ptr::null()).is_null());
            ionc_circuit_free(std::ptr::null_mut());
            ionc_result_free(std::ptr::null_mut());
            ionc_machine_free(std::ptr::null_mut());
        }
    }
}
