//! Central tolerance discipline. All floating-point comparisons in the
//! library and its tests go through these constants so the slack is pinned
//! in exactly one place.

/// Relative tolerance for exact algebraic identities.
pub const IDENTITY_REL: f64 = 1e-12;
/// Relative tolerance for general real-valued invariants.
pub const INVARIANT_REL: f64 = 1e-9;
/// Absolute floor under any relative comparison.
pub const ABS_FLOOR: f64 = 1e-12;
/// Slack for one-sided inequalities, scaled by the size of both sides.
pub const INEQ_SLACK: f64 = 1e-9;
/// Relative agreement required between potential pairing and energy.
pub const ENERGY_REL: f64 = 1e-10;
/// Default KKT residual tolerance for the capacity solver.
pub const QP_TOL: f64 = 1e-8;
/// Default relative Rayleigh-quotient tolerance for power iteration.
pub const EIG_TOL: f64 = 1e-10;
/// Iteration cap for power iteration.
pub const EIG_MAX_ITERS: usize = 100_000;

/// `a == b` up to relative tolerance `rel` with the absolute floor.
pub fn approx_eq(a: f64, b: f64, rel: f64) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= rel * scale + ABS_FLOOR
}

/// One-sided check `lhs <= rhs` with slack proportional to both sides.
pub fn leq_slack(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + INEQ_SLACK * lhs.abs().max(rhs.abs()) + ABS_FLOOR
}
