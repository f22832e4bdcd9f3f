//! Leading-order exciton balance, decoupled from the carriers.
//!
//! With the bimolecular source dropped, the exciton density solves
//! `-D_X X'' = GT - (k_d + k_r) X` with no-flux ends and region-wise
//! constant rates (dissociation is evaluated at the leading-order field in
//! the interface strip).  Each region then relaxes exponentially, over the
//! reaction length `l = sqrt(D_X/(k_d+k_r))`, toward its local equilibrium
//! plateau `GT/(k_d+k_r)`.  The six exponential amplitudes follow from the
//! two no-flux ends plus value/flux continuity at the strip edges.
//!
//! The basis uses only decaying exponentials measured from each region's
//! nearest edge, so nothing overflows even though the bulk regions are
//! hundreds of reaction lengths wide.

use crate::materials::{dissociation_rate, Region};
use crate::scaling::ScaledParams;

/// Closed-form exciton profile: plateaus plus edge boundary layers.
#[derive(Debug, Clone)]
pub struct ExcitonZeroth {
    bounds: [(f64, f64); 3],
    ell: [f64; 3],
    x_eq: [f64; 3],
    coef: [f64; 6],
    kd: [f64; 3],
}

/// Dense Gaussian elimination with partial pivoting for the 6x6 coupling
/// system.  The matrix is provably nonsingular for positive rates, so a
/// vanishing pivot indicates a construction bug rather than bad input.
fn solve6(mut a: [[f64; 6]; 6], mut rhs: [f64; 6]) -> [f64; 6] {
    let n = 6;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        let pivot = a[col][col];
        assert!(
            pivot.abs() > 1e-300,
            "singular exciton coupling system (row {col})"
        );
        for row in col + 1..n {
            let factor = a[row][col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = [0.0; 6];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}

/// Profile with the strip dissociation rate taken from the field-dependent
/// branch formulas at the supplied leading-order field.
pub fn exciton_zeroth(p: &ScaledParams, e0: f64) -> ExcitonZeroth {
    exciton_zeroth_with_strip_rate(p, dissociation_rate(e0, Region::Interface, p))
}

/// Profile with an explicitly prescribed strip dissociation rate (used by
/// the constant-rate experiment).
pub fn exciton_zeroth_with_strip_rate(p: &ScaledParams, kd_strip: f64) -> ExcitonZeroth {
    let bounds = [(p.x0, p.x_l), (p.x_l, p.x_r), (p.x_r, p.x_end)];
    let kd = [p.kd_out, kd_strip, p.kd_out];
    let kr = [p.kr_out, p.kr_in, p.kr_out];
    let mut ell = [0.0; 3];
    let mut x_eq = [0.0; 3];
    for j in 0..3 {
        let k = kd[j] + kr[j];
        ell[j] = (p.d_x / k).sqrt();
        x_eq[j] = p.gt / k;
    }

    // unknowns: (a_j, b_j) per region, X_j = x_eq_j + a_j e^{-(x-L_j)/l_j}
    //                                          + b_j e^{-(R_j-x)/l_j}
    let val = |j: usize, x: f64| -> (f64, f64) {
        let (lo, hi) = bounds[j];
        ((-(x - lo) / ell[j]).exp(), (-(hi - x) / ell[j]).exp())
    };
    let der = |j: usize, x: f64| -> (f64, f64) {
        let (va, vb) = val(j, x);
        (-va / ell[j], vb / ell[j])
    };

    let mut a = [[0.0; 6]; 6];
    let mut rhs = [0.0; 6];
    // no flux at the left end
    let (da, db) = der(0, p.x0);
    a[0][0] = da;
    a[0][1] = db;
    // value and flux continuity at each strip edge (D_X is uniform, so flux
    // continuity reduces to slope continuity)
    for (base, (edge, left, right)) in [(1, (p.x_l, 0usize, 1usize)), (3, (p.x_r, 1, 2))] {
        let (va, vb) = val(left, edge);
        let (wa, wb) = val(right, edge);
        a[base][2 * left] = va;
        a[base][2 * left + 1] = vb;
        a[base][2 * right] = -wa;
        a[base][2 * right + 1] = -wb;
        rhs[base] = x_eq[right] - x_eq[left];
        let (da, db) = der(left, edge);
        let (ea, eb) = der(right, edge);
        a[base + 1][2 * left] = da;
        a[base + 1][2 * left + 1] = db;
        a[base + 1][2 * right] = -ea;
        a[base + 1][2 * right + 1] = -eb;
    }
    // no flux at the right end
    let (da, db) = der(2, p.x_end);
    a[5][4] = da;
    a[5][5] = db;

    let coef = solve6(a, rhs);
    ExcitonZeroth {
        bounds,
        ell,
        x_eq,
        coef,
        kd,
    }
}

impl ExcitonZeroth {
    fn region_index(&self, x: f64) -> usize {
        if x <= self.bounds[0].1 {
            0
        } else if x <= self.bounds[1].1 {
            1
        } else {
            2
        }
    }

    /// Local equilibrium plateaus per region (donor bulk, strip, acceptor
    /// bulk).
    pub fn plateau(&self) -> [f64; 3] {
        self.x_eq
    }

    /// Dissociation rates per region, as baked into the profile.
    pub fn kd_rates(&self) -> [f64; 3] {
        self.kd
    }

    pub fn eval(&self, x: f64) -> f64 {
        let j = self.region_index(x);
        let (lo, hi) = self.bounds[j];
        let x = x.clamp(lo, hi);
        let va = (-(x - lo) / self.ell[j]).exp();
        let vb = (-(hi - x) / self.ell[j]).exp();
        self.x_eq[j] + self.coef[2 * j] * va + self.coef[2 * j + 1] * vb
    }

    pub fn slope(&self, x: f64) -> f64 {
        let j = self.region_index(x);
        let (lo, hi) = self.bounds[j];
        let x = x.clamp(lo, hi);
        let va = (-(x - lo) / self.ell[j]).exp();
        let vb = (-(hi - x) / self.ell[j]).exp();
        (-self.coef[2 * j] * va + self.coef[2 * j + 1] * vb) / self.ell[j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::default_params;

    const E0_SC: f64 = -19.3 / 1.5;

    #[test]
    fn uniform_rates_collapse_to_the_equilibrium_plateau() {
        let mut p = default_params();
        p.kr_in = p.kr_out;
        let x = exciton_zeroth_with_strip_rate(&p, p.kd_out);
        let want = p.gt / (p.kd_out + p.kr_out);
        for pos in [0.0, 0.3, 0.49, 0.5, 0.51, 1.0, 1.5] {
            assert!(
                (x.eval(pos) - want).abs() < 1e-10 * want,
                "X({pos}) = {} vs {want}",
                x.eval(pos)
            );
            assert!(x.slope(pos).abs() < 1e-8 * want);
        }
    }

    #[test]
    fn default_plateaus_match_the_local_equilibria() {
        let p = default_params();
        let x = exciton_zeroth(&p, E0_SC);
        let pl = x.plateau();
        assert!((pl[0] - 4.395860284605433).abs() < 1e-9);
        assert!((pl[2] - 4.395860284605433).abs() < 1e-9);
        assert!((pl[1] - 6.209588457134686).abs() < 1e-6, "strip {}", pl[1]);
        // bulk contact value sits exactly on the plateau (hundreds of
        // reaction lengths from the strip)
        assert!((x.eval(0.0) - pl[0]).abs() < 1e-9);
        assert!((x.eval(1.5) - pl[2]).abs() < 1e-9);
        // strip midpoint dips slightly below the strip plateau
        let mid = x.eval(0.5);
        assert!(mid > 6.14 && mid < pl[1], "X(x_m) = {mid}");
    }

    #[test]
    fn ends_are_no_flux_and_edges_are_continuous() {
        let p = default_params();
        let x = exciton_zeroth(&p, E0_SC);
        assert!(x.slope(0.0).abs() < 1e-6);
        assert!(x.slope(1.5).abs() < 1e-6);
        for edge in [p.x_l, p.x_r] {
            let e = 1e-12;
            let jump = (x.eval(edge - e) - x.eval(edge + e)).abs();
            assert!(jump < 1e-8, "value jump {jump} at {edge}");
            let slope_jump = (x.slope(edge - e) - x.slope(edge + e)).abs();
            let scale = x.slope(edge - e).abs().max(1.0);
            assert!(slope_jump < 1e-6 * scale, "slope jump {slope_jump} at {edge}");
        }
    }

    #[test]
    fn closed_form_satisfies_the_reaction_diffusion_equation() {
        let p = default_params();
        let x = exciton_zeroth(&p, E0_SC);
        let h = 2e-6;
        for (pos, rate) in [
            (0.2, p.kd_out + p.kr_out),
            (0.495, x.kd_rates()[1] + p.kr_in),
            (0.5, x.kd_rates()[1] + p.kr_in),
            (0.505, x.kd_rates()[1] + p.kr_in),
            (0.9, p.kd_out + p.kr_out),
        ] {
            let second = (x.eval(pos + h) - 2.0 * x.eval(pos) + x.eval(pos - h)) / (h * h);
            let residual = -p.d_x * second + rate * x.eval(pos) - p.gt;
            assert!(
                residual.abs() < 1e-3 * p.gt,
                "residual {residual} at {pos}"
            );
        }
    }

    #[test]
    fn strip_gradient_is_small_in_the_interface_dipole_sense() {
        let p = default_params();
        let x = exciton_zeroth(&p, E0_SC);
        let mut max_slope: f64 = 0.0;
        let mut pos = p.x_l - 0.005;
        while pos <= p.x_r + 0.005 {
            max_slope = max_slope.max(x.slope(pos).abs());
            pos += 1e-5;
        }
        // the dipole weight in the field equation is (h/L)/(lambda_D^2 |V|);
        // the profile only makes sense if that weighted slope is small
        let weighted = max_slope * p.h_over_l / (p.lambda_d2() * 19.3);
        assert!(weighted < 0.1, "weighted slope {weighted}");
        assert!(weighted > 1e-4, "suspiciously flat strip: {weighted}");
    }

    #[test]
    fn zero_generation_gives_the_zero_profile() {
        let mut p = default_params();
        p.gt = 0.0;
        let x = exciton_zeroth(&p, E0_SC);
        for pos in [0.0, 0.49, 0.5, 1.5] {
            assert_eq!(x.eval(pos), 0.0);
            assert_eq!(x.slope(pos), 0.0);
        }
    }
}
