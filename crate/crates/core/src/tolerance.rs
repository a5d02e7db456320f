//! Numerical tolerances used by the identity and inequality checks.

/// Relative tolerance for identities between two exact evaluation routes.
pub const IDENTITY_REL: f64 = 1e-10;

/// Absolute slack added to inequalities that may hold with equality.
pub const INEQUALITY_SLACK: f64 = 1e-12;

/// `|a - b| <= rel · max(|a|, |b|) + abs`.
pub fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
}

/// Relative deviation `|a - b| / |b|`, or `|a - b|` when `b` is zero.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() }
}
