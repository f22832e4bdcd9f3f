//! Bernoulli weight of the exponential-fitted flux.

/// `B(z) = z / (e^z - 1)`, evaluated stably for every finite `z`.
///
/// Both signs route through `expm1` of the negative argument, so neither
/// branch cancels or overflows: the drift-dominated limits `B(z) -> 0`
/// (large positive `z`) and `B(z) -> -z` (large negative `z`) fall out
/// naturally, and the reflection identity `B(z) + z = B(-z)` holds to
/// rounding because the two branches share the same `expm1` value.  Below
/// `|z| = 1e-4` a short series replaces the quotient.
pub fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        (1.0 + z * z / 12.0) - 0.5 * z
    } else if z > 0.0 {
        let em = (-z).exp_m1(); // in (-1, 0)
        z * (-z).exp() / (-em)
    } else {
        z / z.exp_m1()
    }
}
