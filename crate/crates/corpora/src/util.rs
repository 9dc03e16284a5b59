//! Small numeric helpers used across the solver modules.

/// Compensated (Kahan-Babuska-Neumaier) summation.
///
/// Keeps the accumulated rounding error at O(eps) independent of the
/// number of terms, which the uniform-solution residual checks rely on.
pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// x log x with the continuous extension 0 at x = 0.
pub(crate) fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Angular distance on the circle, in [0, pi].
pub(crate) fn circle_dist(a: f64, b: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let d = (a - b).rem_euclid(two_pi);
    d.min(two_pi - d)
}
