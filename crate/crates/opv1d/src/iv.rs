//! Current-voltage sweeps and their scalar figures of merit.
//!
//! A sweep is a list of [`IVPoint`]s over the built-in drop `v_diff`; the
//! applied voltage is `v_applied = v_diff + v_int` and the delivered power
//! density is `p = j * v_applied`, negative while the device generates.
//! [`IVCurve::from_points`] sorts the points and annotates the curve with
//! the short-circuit current (at `v_applied = 0`), the open-circuit drop
//! (sign change of `j`), the optimal-power point, and the fill factor
//!
//! ```text
//! FF = p_max / (|j_sc| * (v_oc + v_int)).
//! ```
//!
//! Nonconvergence of an individual bias never aborts a sweep: the point is
//! recorded with its flag cleared and the annotations simply skip it.

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::Mesh;
use crate::scaling::ScaledParams;
use crate::solver::{compute_currents, solve_steady_state, DeviceState, SolverError, SolverOptions};

/// Hard bias window for numeric sweeps; beyond it the scaled model leaves
/// the regime the discretization was sized for.
pub const BIAS_RANGE: (f64, f64) = (-25.0, 15.0);

/// Current threshold for declaring open circuit during bisection.
pub const OC_CURRENT_TOL: f64 = 0.05;

#[derive(Debug, Error)]
pub enum IVError {
    #[error("bias {v_diff} outside the supported window [{lo}, {hi}]", lo = BIAS_RANGE.0, hi = BIAS_RANGE.1)]
    BiasOutOfRange { v_diff: f64 },
    #[error(
        "no open-circuit crossing in [{lo}, {hi}]: j({lo}) = {j_lo}, j({hi}) = {j_hi} share a sign"
    )]
    NoCrossing { lo: f64, hi: f64, j_lo: f64, j_hi: f64 },
    #[error("the device generates no power over the scanned biases; nothing to maximize")]
    NoGeneratedPower,
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// One bias point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IVPoint {
    pub v_diff: f64,
    /// `v_diff + v_int`.
    pub v_applied: f64,
    /// Device current (median over interior faces for numeric points).
    pub j: f64,
    /// Delivered power density `j * v_applied`; negative when generating.
    pub p: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// A sorted, annotated current-voltage curve.
#[derive(Debug, Clone)]
pub struct IVCurve {
    /// Points sorted by `v_diff`.
    pub points: Vec<IVPoint>,
    pub v_int: f64,
    /// Current at `v_applied = 0`, interpolated if not sampled exactly.
    pub j_sc: Option<f64>,
    /// Built-in drop where `j` crosses zero, interpolated between samples.
    pub v_oc: Option<f64>,
    /// Built-in drop of the sampled point with the most generated power.
    pub v_opp: Option<f64>,
    /// Magnitude of the generated power at that point.
    pub p_max: Option<f64>,
    pub fill_factor: Option<f64>,
}

impl IVCurve {
    /// Sort the points and derive the scalar annotations from the converged
    /// ones.
    pub fn from_points(mut points: Vec<IVPoint>, v_int: f64) -> Self {
        points.sort_by(|a, b| a.v_diff.partial_cmp(&b.v_diff).unwrap());
        let good: Vec<&IVPoint> = points
            .iter()
            .filter(|pt| pt.converged && pt.j.is_finite())
            .collect();

        let j_sc = interpolate_current(&good, -v_int);
        let mut v_oc = None;
        for pair in good.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a.j < 0.0 && b.j >= 0.0 {
                v_oc = Some(a.v_diff - a.j * (b.v_diff - a.v_diff) / (b.j - a.j));
                break;
            }
        }
        let best = good
            .iter()
            .filter(|pt| pt.p < 0.0)
            .min_by(|a, b| a.p.partial_cmp(&b.p).unwrap());
        let (v_opp, p_max) = match best {
            Some(pt) => (Some(pt.v_diff), Some(pt.p.abs())),
            None => (None, None),
        };
        let fill_factor = match (j_sc, v_oc, p_max) {
            (Some(j_sc), Some(v_oc), Some(p_max)) if j_sc != 0.0 => {
                Some(p_max / (j_sc.abs() * (v_oc + v_int)))
            }
            _ => None,
        };
        IVCurve {
            points,
            v_int,
            j_sc,
            v_oc,
            v_opp,
            p_max,
            fill_factor,
        }
    }

    /// Converged points, in sweep order.
    pub fn converged_points(&self) -> impl Iterator<Item = &IVPoint> {
        self.points.iter().filter(|pt| pt.converged)
    }
}

fn interpolate_current(sorted: &[&IVPoint], v: f64) -> Option<f64> {
    for pt in sorted {
        if (pt.v_diff - v).abs() < 1e-9 {
            return Some(pt.j);
        }
    }
    for pair in sorted.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.v_diff < v && v < b.v_diff {
            return Some(a.j + (v - a.v_diff) * (b.j - a.j) / (b.v_diff - a.v_diff));
        }
    }
    None
}

fn solve_point(
    mesh: &Mesh,
    params: &ScaledParams,
    options: &SolverOptions,
    v_diff: f64,
    warm: Option<&DeviceState>,
) -> Result<(IVPoint, DeviceState), SolverError> {
    let (state, diag) = solve_steady_state(mesh, params, v_diff, options, warm)?;
    let currents = compute_currents(mesh, params, options, &state);
    let point = IVPoint {
        v_diff,
        v_applied: v_diff + params.v_int,
        j: currents.j,
        p: currents.j * (v_diff + params.v_int),
        converged: diag.converged,
        iterations: diag.iterations,
    };
    Ok((point, state))
}

/// Solve the device over a list of biases and annotate the curve.
///
/// Sequential sweeps walk the sorted biases and warm-start each solve from
/// its neighbor; `parallel` trades the warm starts for one cold solve per
/// bias across the thread pool.  A bias that fails to converge is recorded
/// as such and the sweep moves on.
pub fn run_iv_sweep(
    mesh: &Mesh,
    params: &ScaledParams,
    options: &SolverOptions,
    biases: &[f64],
    parallel: bool,
) -> Result<IVCurve, IVError> {
    for &v in biases {
        if !(BIAS_RANGE.0..=BIAS_RANGE.1).contains(&v) {
            return Err(IVError::BiasOutOfRange { v_diff: v });
        }
    }
    let mut sorted = biases.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let points = if parallel {
        sorted
            .par_iter()
            .map(|&v| solve_point(mesh, params, options, v, None).map(|(pt, _)| pt))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        let mut out = Vec::with_capacity(sorted.len());
        let mut warm: Option<DeviceState> = None;
        for &v in &sorted {
            let (pt, state) = solve_point(mesh, params, options, v, warm.as_ref())?;
            // Only a converged state is worth chaining into the next bias.
            if pt.converged {
                warm = Some(state);
            }
            out.push(pt);
        }
        out
    };
    Ok(IVCurve::from_points(points, params.v_int))
}

/// Locate the open-circuit drop by bisection on `[lo, hi]`.
///
/// Stops once `|j| <` [`OC_CURRENT_TOL`]; reports the endpoint currents if
/// they fail to bracket a crossing.
pub fn find_open_circuit(
    mesh: &Mesh,
    params: &ScaledParams,
    options: &SolverOptions,
    lo: f64,
    hi: f64,
) -> Result<f64, IVError> {
    let (pt_lo, state_lo) = solve_point(mesh, params, options, lo, None)?;
    let (pt_hi, state_hi) = solve_point(mesh, params, options, hi, Some(&state_lo))?;
    let (mut lo, mut hi) = (lo, hi);
    let (mut j_lo, j_hi) = (pt_lo.j, pt_hi.j);
    if j_lo.signum() == j_hi.signum() {
        return Err(IVError::NoCrossing { lo, hi, j_lo, j_hi });
    }
    let mut warm = if j_lo.abs() < j_hi.abs() { state_lo } else { state_hi };
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..60 {
        mid = 0.5 * (lo + hi);
        let (pt, state) = solve_point(mesh, params, options, mid, Some(&warm))?;
        if pt.converged {
            warm = state;
        }
        if pt.j.abs() < OC_CURRENT_TOL {
            return Ok(mid);
        }
        if pt.j.signum() == j_lo.signum() {
            lo = mid;
            j_lo = pt.j;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Minimize delivered power over `[lo, hi]` given a power evaluator:
/// unit-step coarse scan, then golden-section refinement to a bracket
/// narrower than 0.1.  Returns `(v, |p|)` at the optimum.
pub fn minimize_power(
    mut power: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64), IVError> {
    let mut best_v = lo;
    let mut best_p = f64::INFINITY;
    let mut v = lo;
    while v <= hi + 1e-9 {
        let p = power(v.min(hi));
        if p < best_p {
            best_p = p;
            best_v = v.min(hi);
        }
        v += 1.0;
    }
    if !(best_p < 0.0) {
        return Err(IVError::NoGeneratedPower);
    }
    let mut a = (best_v - 1.0).max(lo);
    let mut b = (best_v + 1.0).min(hi);
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut p_c = power(c);
    let mut p_d = power(d);
    while b - a > 0.1 {
        if p_c < p_d {
            b = d;
            d = c;
            p_d = p_c;
            c = b - inv_phi * (b - a);
            p_c = power(c);
        } else {
            a = c;
            c = d;
            p_c = p_d;
            d = a + inv_phi * (b - a);
            p_d = power(d);
        }
    }
    let (v_opt, p_opt) = if p_c < p_d { (c, p_c) } else { (d, p_d) };
    if p_opt < best_p {
        Ok((v_opt, p_opt.abs()))
    } else {
        Ok((best_v, best_p.abs()))
    }
}

/// Locate the optimal-power drop for the device itself.
///
/// Scans `[-v_int, hi]` (pass the open-circuit drop as `hi` when known, or
/// the upper bias limit otherwise), warm-starting each solve from the last.
pub fn find_optimal_power(
    mesh: &Mesh,
    params: &ScaledParams,
    options: &SolverOptions,
    hi: f64,
) -> Result<(f64, f64), IVError> {
    let mut warm: Option<DeviceState> = None;
    let mut failed: Option<SolverError> = None;
    let result = minimize_power(
        |v| {
            if failed.is_some() {
                return f64::INFINITY;
            }
            match solve_point(mesh, params, options, v, warm.as_ref()) {
                Ok((pt, state)) => {
                    if pt.converged {
                        warm = Some(state);
                    }
                    pt.p
                }
                Err(err) => {
                    failed = Some(err);
                    f64::INFINITY
                }
            }
        },
        -params.v_int,
        hi,
    );
    if let Some(err) = failed {
        return Err(err.into());
    }
    result
}

/// First bias where the curvature of `j(v)` flips sign inside `[lo, hi]`.
///
/// Uses divided-difference second derivatives over the converged points, so
/// the sweep grid does not need to be uniform.  The returned value is the
/// center point of the first sign-flipping pair of curvatures.
pub fn curvature_sign_change(curve: &IVCurve, lo: f64, hi: f64) -> Option<f64> {
    let pts: Vec<&IVPoint> = curve
        .points
        .iter()
        .filter(|pt| pt.converged && pt.v_diff >= lo && pt.v_diff <= hi)
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let second = |w: &[&IVPoint]| -> f64 {
        let (a, b, c) = (w[0], w[1], w[2]);
        2.0 * ((c.j - b.j) / (c.v_diff - b.v_diff) - (b.j - a.j) / (b.v_diff - a.v_diff))
            / (c.v_diff - a.v_diff)
    };
    let mut prev: Option<(f64, f64)> = None;
    for w in pts.windows(3) {
        let d2 = second(w);
        if let Some((v_prev, d2_prev)) = prev {
            if d2_prev != 0.0 && d2 != 0.0 && d2_prev.signum() != d2.signum() {
                return Some(0.5 * (v_prev + w[1].v_diff));
            }
        }
        prev = Some((w[1].v_diff, d2));
    }
    None
}

/// Largest pointwise violation of the superposition picture
/// `j_full ~ j_photo + j_dark` over the biases the three curves share.
pub fn superposition_residual(full: &IVCurve, photo: &IVCurve, dark: &IVCurve) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for pt in full.converged_points() {
        let matching = |curve: &IVCurve, v: f64| -> Option<f64> {
            curve
                .converged_points()
                .find(|q| (q.v_diff - v).abs() < 1e-9)
                .map(|q| q.j)
        };
        if let (Some(j_photo), Some(j_dark)) =
            (matching(photo, pt.v_diff), matching(dark, pt.v_diff))
        {
            let gap = (pt.j - j_photo - j_dark).abs();
            worst = Some(worst.map_or(gap, |w: f64| w.max(gap)));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_mesh;
    use crate::scaling::default_params;

    /// Diode-like synthetic curve: photocurrent plateau plus injection.
    fn synthetic(v: f64) -> f64 {
        -300.0 + 0.002 * (v - 2.0).exp()
    }

    fn synthetic_curve(v_int: f64) -> IVCurve {
        let points: Vec<IVPoint> = (0..140)
            .map(|i| {
                let v = -19.3 + 0.25 * i as f64;
                let j = synthetic(v);
                IVPoint {
                    v_diff: v,
                    v_applied: v + v_int,
                    j,
                    p: j * (v + v_int),
                    converged: true,
                    iterations: 1,
                }
            })
            .collect();
        IVCurve::from_points(points, v_int)
    }

    #[test]
    fn annotations_recover_the_synthetic_figures_of_merit() {
        let curve = synthetic_curve(19.3);
        // Exact sample at v_applied = 0.
        assert!((curve.j_sc.unwrap() - synthetic(-19.3)).abs() < 1e-12);
        // Analytic crossing of the synthetic diode.
        let v_oc_true = 2.0 + (300.0 / 0.002_f64).ln();
        let v_oc = curve.v_oc.unwrap();
        assert!((v_oc - v_oc_true).abs() < 0.05, "v_oc {v_oc} vs {v_oc_true}");
        let (v_opp, p_max) = (curve.v_opp.unwrap(), curve.p_max.unwrap());
        assert!(v_opp > 5.0 && v_opp < v_oc);
        assert!(p_max > 0.0);
        let ff = curve.fill_factor.unwrap();
        let ff_want = p_max / (curve.j_sc.unwrap().abs() * (v_oc + 19.3));
        assert!((ff - ff_want).abs() < 1e-12);
        assert!(ff > 0.5 && ff < 1.0, "synthetic diode ff = {ff}");
    }

    #[test]
    fn unconverged_points_are_kept_but_ignored_by_annotations() {
        let mut points: Vec<IVPoint> = (0..5)
            .map(|i| {
                let v = -19.3 + i as f64;
                IVPoint {
                    v_diff: v,
                    v_applied: v + 19.3,
                    j: -300.0,
                    p: -300.0 * (v + 19.3),
                    converged: true,
                    iterations: 1,
                }
            })
            .collect();
        points[1].converged = false;
        points[1].j = 17.0; // bogus value from a stalled solve
        let curve = IVCurve::from_points(points, 19.3);
        assert_eq!(curve.points.len(), 5);
        assert!((curve.j_sc.unwrap() + 300.0).abs() < 1e-12);
        // The bogus positive sample would fake a crossing if the flag were
        // ignored; honoring it leaves the curve without one.
        assert!(curve.v_oc.is_none());
    }

    #[test]
    fn power_minimizer_finds_an_interior_optimum() {
        // Parabolic generated power, optimum at v = 11.7.
        let power = |v: f64| 10.0 * (v - 11.7).powi(2) - 4000.0;
        let (v, p) = minimize_power(power, -19.3, 15.0).unwrap();
        assert!((v - 11.7).abs() < 0.1, "optimum at {v}");
        assert!((p - 4000.0).abs() < 10.0 * 0.1 * 0.1 + 1e-9);
        // A device that never generates is an error, not a silent zero.
        assert!(matches!(
            minimize_power(|v| (v - 3.0).powi(2) + 1.0, -19.3, 15.0),
            Err(IVError::NoGeneratedPower)
        ));
    }

    #[test]
    fn curvature_flip_is_located_on_a_synthetic_s_curve() {
        // tanh-shaped current: curvature flips exactly at v = -3.
        let points: Vec<IVPoint> = (0..41)
            .map(|i| {
                let v = -5.0 + 0.1 * i as f64;
                let j = -300.0 + 40.0 * (v + 3.0).tanh();
                IVPoint {
                    v_diff: v,
                    v_applied: v + 19.3,
                    j,
                    p: j * (v + 19.3),
                    converged: true,
                    iterations: 1,
                }
            })
            .collect();
        let curve = IVCurve::from_points(points, 19.3);
        let kink = curvature_sign_change(&curve, -5.0, -1.0).expect("flip found");
        assert!((kink + 3.0).abs() < 0.15, "kink at {kink}");
        // A convex stretch has no flip to report.
        assert!(curvature_sign_change(&curve, -5.0, -3.5).is_none());
    }

    #[test]
    fn superposition_residual_vanishes_when_built_to_match() {
        let v_int = 19.3;
        let mk = |offset: f64, scale: f64| -> IVCurve {
            let points: Vec<IVPoint> = (0..10)
                .map(|i| {
                    let v = -19.3 + 2.0 * i as f64;
                    let j = offset + scale * v;
                    IVPoint {
                        v_diff: v,
                        v_applied: v + v_int,
                        j,
                        p: j * (v + v_int),
                        converged: true,
                        iterations: 1,
                    }
                })
                .collect();
            IVCurve::from_points(points, v_int)
        };
        let photo = mk(-300.0, 0.5);
        let dark = mk(2.0, 0.25);
        let full = mk(-298.0, 0.75);
        let residual = superposition_residual(&full, &photo, &dark).unwrap();
        assert!(residual < 1e-12, "residual {residual}");
    }

    #[test]
    fn out_of_window_biases_are_rejected_before_any_solve() {
        let p = default_params();
        let mesh = build_mesh(&p, 120, 1.3).unwrap();
        let err = run_iv_sweep(&mesh, &p, &SolverOptions::default(), &[-30.0], false);
        assert!(matches!(err, Err(IVError::BiasOutOfRange { .. })));
    }

    #[test]
    fn short_reverse_sweep_converges_and_rises_monotonically() {
        let p = default_params();
        let mesh = build_mesh(&p, 300, 1.3).unwrap();
        let curve = run_iv_sweep(
            &mesh,
            &p,
            &SolverOptions::default(),
            &[-19.3, -15.0, -10.0, -5.0],
            false,
        )
        .unwrap();
        assert!(curve.points.iter().all(|pt| pt.converged));
        let j_sc = curve.j_sc.expect("short-circuit sample");
        assert!(j_sc > -360.0 && j_sc < -310.0, "j_sc = {j_sc}");
        for pair in curve.points.windows(2) {
            assert!(
                pair[1].j >= pair[0].j - 1e-9,
                "current not monotone: {} then {}",
                pair[0].j,
                pair[1].j
            );
        }
        // Every reverse-bias point generates power (none at short circuit
        // itself, where the applied voltage is zero).
        assert!(curve.points.iter().all(|pt| pt.p <= 0.0));
        assert!(curve.points.iter().filter(|pt| pt.v_applied > 0.1).all(|pt| pt.p < 0.0));
    }
}
