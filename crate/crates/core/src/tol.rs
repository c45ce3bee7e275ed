//! Default tolerances. All of them are relative to the max-abs coefficient of the
//! tensor being checked.

/// Membership of randomly generated elements.
pub const GENERATED: f64 = 1e-11;
/// Membership of algebraically constructed elements.
pub const CONSTRUCTED: f64 = 1e-12;
/// Identities, reconstructions and trace formulas.
pub const IDENTITY: f64 = 1e-10;
/// Disagreement between an implementation route and a closed-form oracle.
pub const HARD: f64 = 1e-9;
/// Relative QR pivot below which a direction counts as null.
pub const RANK_CUTOFF: f64 = 1e-8;

/// Scale used to turn an absolute residual into a relative one.
pub fn scale(max_abs: f64) -> f64 {
    if max_abs > 0.0 && max_abs.is_finite() {
        max_abs
    } else {
        1.0
    }
}
