//! Angles as exact rational multiples of pi with a float fallback.
//!
//! Pulse parameters that arise in practice are overwhelmingly small rational
//! multiples of pi (the error ledger depends on `|theta| mod pi` being exact
//! for them), so arithmetic stays in the rational form as long as it can and
//! floats are snapped back to rationals when they land close enough.

use std::fmt;

pub const SNAP_TOL: f64 = 1e-12;
/// Largest denominator recognized when snapping floats or printing exact
/// pi-fractions.
pub const MAX_DEN: i64 = 64;

#[derive(Clone, Copy, Debug)]
pub enum Angle {
    /// `Pi(n, d)` is the angle `n/d * pi`, reduced, `d >= 1`.
    Pi(i64, i64),
    F(f64),
}

impl PartialEq for Angle {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Angle::Pi(a, b), Angle::Pi(c, d)) => a == c && b == d,
            _ => self.val() == other.val(),
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Angle {
    pub const ZERO: Angle = Angle::Pi(0, 1);
    pub const PI: Angle = Angle::Pi(1, 1);

    pub fn pi(n: i64, d: i64) -> Angle {
        assert!(d != 0, "zero denominator");
        let (mut n, mut d) = if d < 0 { (-n, -d) } else { (n, d) };
        let g = gcd(n, d);
        if g > 1 {
            n /= g;
            d /= g;
        }
        if n == 0 {
            d = 1;
        }
        Angle::Pi(n, d)
    }

    /// Snaps `x` (radians) to `n/d * pi` when within [`SNAP_TOL`] for some
    /// `d <= MAX_DEN`, otherwise keeps the float.
    pub fn from_f64(x: f64) -> Angle {
        if !x.is_finite() {
            return Angle::F(x);
        }
        for d in 1..=MAX_DEN {
            let n = (x / std::f64::consts::PI * d as f64).round();
            if n.abs() > 1e6 {
                break;
            }
            if (x - n * std::f64::consts::PI / d as f64).abs() < SNAP_TOL {
                return Angle::pi(n as i64, d);
            }
        }
        Angle::F(x)
    }

    pub fn val(self) -> f64 {
        match self {
            Angle::Pi(n, d) => n as f64 * std::f64::consts::PI / d as f64,
            Angle::F(x) => x,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Angle::Pi(n, _) => n == 0,
            Angle::F(x) => x.abs() < SNAP_TOL,
        }
    }

    pub fn neg(self) -> Angle {
        match self {
            Angle::Pi(n, d) => Angle::Pi(-n, d),
            Angle::F(x) => Angle::F(-x),
        }
    }

    pub fn abs(self) -> Angle {
        match self {
            Angle::Pi(n, d) => Angle::Pi(n.abs(), d),
            Angle::F(x) => Angle::F(x.abs()),
        }
    }

    pub fn add(self, other: Angle) -> Angle {
        match (self, other) {
            (Angle::Pi(n1, d1), Angle::Pi(n2, d2)) => {
                let n = n1 as i128 * d2 as i128 + n2 as i128 * d1 as i128;
                let d = d1 as i128 * d2 as i128;
                let g = gcd_i128(n, d);
                let (n, d) = (n / g, d / g);
                if n.abs() <= i64::MAX as i128 && d <= i64::MAX as i128 {
                    Angle::pi(n as i64, d as i64)
                } else {
                    Angle::F(self.val() + other.val())
                }
            }
            _ => Angle::from_f64(self.val() + other.val()),
        }
    }

    pub fn sub(self, other: Angle) -> Angle {
        self.add(other.neg())
    }

    /// Multiplies by the rational `p/q`.
    pub fn scale(self, p: i64, q: i64) -> Angle {
        match self {
            Angle::Pi(n, d) => {
                let num = n as i128 * p as i128;
                let den = d as i128 * q as i128;
                if den != 0 && num.abs() <= i64::MAX as i128 && den.abs() <= i64::MAX as i128 {
                    Angle::pi(num as i64, den as i64)
                } else {
                    Angle::F(self.val() * p as f64 / q as f64)
                }
            }
            Angle::F(x) => Angle::F(x * p as f64 / q as f64),
        }
    }

    /// Normalizes into `(-pi, pi]`, dropping whole turns. The dropped turns
    /// flip the global phase once per `2*pi`; callers that track phase use
    /// [`Angle::norm_turns`] instead.
    pub fn norm(self) -> Angle {
        self.norm_turns().0
    }

    /// Normalizes into `(-pi, pi]` and reports how many whole turns of
    /// `2*pi` were removed (each removed turn contributes a `-1` phase for
    /// `R` pulses).
    pub fn norm_turns(self) -> (Angle, i64) {
        match self {
            Angle::Pi(n, d) => {
                let two = 2 * d;
                let mut m = n.rem_euclid(two);
                if m > d {
                    m -= two;
                }
                let turns = (n - m) / two;
                (Angle::pi(m, d), turns)
            }
            Angle::F(x) => {
                let tau = 2.0 * std::f64::consts::PI;
                let mut m = x.rem_euclid(tau);
                if m > std::f64::consts::PI + SNAP_TOL {
                    m -= tau;
                }
                let turns = ((x - m) / tau).round() as i64;
                (Angle::from_f64(m), turns)
            }
        }
    }

    /// `|theta| mod pi` with `|theta|` reduced into `[0, 2*pi)` first; the
    /// angle-proportional error coefficient of an `R` pulse.
    pub fn abs_mod_pi(self) -> Angle {
        match self {
            Angle::Pi(n, d) => Angle::pi(n.abs().rem_euclid(d), d),
            Angle::F(x) => {
                let m = x.abs().rem_euclid(std::f64::consts::PI);
                if m > std::f64::consts::PI - SNAP_TOL {
                    Angle::ZERO
                } else {
                    Angle::from_f64(m)
                }
            }
        }
    }

    pub fn sin(self) -> f64 {
        match self {
            Angle::Pi(n, d) => {
                // Exact zeros for whole multiples of pi keep ledgers clean.
                if n % d == 0 {
                    0.0
                } else {
                    self.val().sin()
                }
            }
            Angle::F(x) => x.sin(),
        }
    }

    pub fn cos(self) -> f64 {
        self.val().cos()
    }

    /// Exact-value equality within `tol` radians.
    pub fn close_to(self, other: Angle, tol: f64) -> bool {
        match (self, other) {
            (Angle::Pi(a, b), Angle::Pi(c, d)) => a == c && b == d,
            _ => (self.val() - other.val()).abs() <= tol,
        }
    }

    /// Congruence modulo `2*pi` within `tol`.
    pub fn congruent(self, other: Angle, tol: f64) -> bool {
        let d = self.sub(other).norm();
        d.is_zero() || d.val().abs() <= tol || (d.val().abs() - 2.0 * std::f64::consts::PI).abs() <= tol
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    if a == 0 {
        1
    } else {
        a
    }
}

/// Formats a value to `sig` significant digits, trimming trailing zeros.
pub fn fmt_sig(v: f64, sig: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, v);
    trim_zeros(&s)
}

/// Rounds to `decimals` places and trims trailing zeros.
pub fn fmt_fixed(v: f64, decimals: usize) -> String {
    trim_zeros(&format!("{:.*}", decimals, v))
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    let t = if t == "-0" { "0" } else { t };
    t.to_string()
}

impl fmt::Display for Angle {
    /// Schedule-text form: exact pi-fractions up to denominator [`MAX_DEN`]
    /// (`pi`, `-3pi/8`), otherwise 12 significant digits in radians.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Angle::Pi(0, _) => write!(f, "0"),
            Angle::Pi(n, d) if d <= MAX_DEN => {
                let sign = if n < 0 { "-" } else { "" };
                let n = n.abs();
                match (n, d) {
                    (1, 1) => write!(f, "{sign}pi"),
                    (_, 1) => write!(f, "{sign}{n}pi"),
                    (1, _) => write!(f, "{sign}pi/{d}"),
                    _ => write!(f, "{sign}{n}pi/{d}"),
                }
            }
            a => write!(f, "{}", fmt_sig(a.val(), 12)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn construction_reduces() {
        assert!(matches!(Angle::pi(2, 4), Angle::Pi(1, 2)));
        assert!(matches!(Angle::pi(-2, -4), Angle::Pi(1, 2)));
        assert!(matches!(Angle::pi(3, -4), Angle::Pi(-3, 4)));
        assert!(matches!(Angle::pi(0, 7), Angle::Pi(0, 1)));
    }

    #[test]
    fn snapping() {
        assert!(matches!(Angle::from_f64(PI / 4.0), Angle::Pi(1, 4)));
        assert!(matches!(Angle::from_f64(-3.0 * PI / 8.0), Angle::Pi(-3, 8)));
        assert!(matches!(Angle::from_f64(PI / 64.0), Angle::Pi(1, 64)));
        // arcsin(sqrt(2/3)) is not a small rational multiple of pi
        let a = (2.0f64 / 3.0).sqrt().asin();
        assert!(matches!(Angle::from_f64(a), Angle::F(_)));
    }

    #[test]
    fn arithmetic_stays_exact() {
        let a = Angle::pi(1, 4).add(Angle::pi(1, 2));
        assert!(matches!(a, Angle::Pi(3, 4)));
        let b = Angle::pi(1, 3).sub(Angle::pi(1, 4));
        assert!(matches!(b, Angle::Pi(1, 12)));
        let c = Angle::pi(3, 4).scale(2, 3);
        assert!(matches!(c, Angle::Pi(1, 2)));
    }

    #[test]
    fn normalization() {
        let (a, t) = Angle::pi(3, 2).norm_turns();
        assert!(matches!(a, Angle::Pi(-1, 2)));
        assert_eq!(t, 1);
        assert!(matches!(Angle::pi(1, 1).norm(), Angle::Pi(1, 1)));
        assert!(matches!(Angle::pi(-1, 1).norm(), Angle::Pi(1, 1)));
        assert!(matches!(Angle::pi(2, 1).norm(), Angle::Pi(0, 1)));
        let (f, t) = Angle::F(5.0 * PI).norm_turns();
        assert!(matches!(f, Angle::Pi(1, 1)));
        assert_eq!(t, 2);
    }

    #[test]
    fn mod_pi_coefficient() {
        assert!(matches!(Angle::pi(3, 4).abs_mod_pi(), Angle::Pi(3, 4)));
        assert!(matches!(Angle::pi(-3, 4).abs_mod_pi(), Angle::Pi(3, 4)));
        assert!(matches!(Angle::pi(1, 1).abs_mod_pi(), Angle::Pi(0, 1)));
        assert!(matches!(Angle::pi(5, 4).abs_mod_pi(), Angle::Pi(1, 4)));
        assert!(matches!(Angle::pi(-7, 4).abs_mod_pi(), Angle::Pi(3, 4)));
    }

    #[test]
    fn display_forms() {
        assert_eq!(Angle::pi(1, 4).to_string(), "pi/4");
        assert_eq!(Angle::pi(-3, 8).to_string(), "-3pi/8");
        assert_eq!(Angle::pi(1, 1).to_string(), "pi");
        assert_eq!(Angle::pi(-1, 1).to_string(), "-pi");
        assert_eq!(Angle::ZERO.to_string(), "0");
        assert_eq!(Angle::pi(2, 1).to_string(), "2pi");
        let f = Angle::F(2.356194490192);
        assert_eq!(f.to_string(), "2.35619449019");
    }

    #[test]
    fn display_roundtrip_tolerance() {
        let x = 1.234567890123456;
        let s = fmt_sig(x, 12);
        let y: f64 = s.parse().unwrap();
        assert!((x - y).abs() < 1e-9);
    }

    #[test]
    fn exact_sin_zero() {
        assert_eq!(Angle::pi(1, 1).sin(), 0.0);
        assert_eq!(Angle::pi(-2, 1).sin(), 0.0);
        assert!((Angle::pi(1, 2).sin() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fixed_formatting() {
        assert_eq!(fmt_fixed(0.7071067811865476, 6), "0.707107");
        assert_eq!(fmt_fixed(1.0, 6), "1");
        assert_eq!(fmt_fixed(0.5, 6), "0.5");
        assert_eq!(fmt_fixed(0.8660254037844386, 6), "0.866025");
    }
}
