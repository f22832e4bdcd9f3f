//! Exact single-carrier space-charge solutions in one transport layer.
//!
//! Away from the interface strip only one carrier species matters: holes in
//! `[x0, x_l]`, electrons in `[x_r, x_end]`.  Dropping the minority density
//! and the source couples Poisson to a single drift-diffusion flux,
//!
//! ```text
//! holes:      p =  lambda_d^2 E_x,    j = mu_p (p E - p_x),
//! electrons:  n = -lambda_d^2 E_x,    j = mu_n (n_x + n E),
//! ```
//!
//! with a constant current `j` and the mobility frozen at a caller-chosen
//! field (the mean field, in practice).  Eliminating the density gives a
//! first integral
//!
//! ```text
//! E_x ∓ E^2/2 = -j x / (lambda_d^2 mu) + C      (- holes, + electrons)
//! ```
//!
//! whose Riccati form linearizes through `E = ∓2 (ln y)_x`: `y` solves the
//! Airy equation `y'' = xi y` in the stretched coordinate
//! `xi = c (x - x_c)`, `c^3 = ∓kappa/8`, `kappa = -4j/(lambda_d^2 mu)`,
//! `x_c = -4C/kappa`.  The boundary data — density and field at a single
//! point, either a contact or a strip edge — fix the Airy combination
//! `y = alpha Ai + beta Bi` up to the irrelevant overall scale, which the
//! Wronskian normalization pins at `y(xi_b) = 1/pi`.  Zero current reduces
//! the first integral to constant coefficients and `y'' = a y` is solved
//! with hyperbolic or trigonometric functions instead.
//!
//! The construction is exact for the stated reduced model; its practical
//! limits are poles (zeros of `y`, where the layer solution breaks down —
//! [`UnipolarSolution::pole_in`] locates them) and boundary data steep
//! enough to push `xi` past roughly `+-100`, where the fundamental pair
//! leaves the f64 range and the constructor reports
//! [`AsymptoticsError::AiryRange`].

use super::airy::airy;
use super::zeroth::AsymptoticsError;
use crate::materials::{mobility_n, mobility_p};
use crate::scaling::ScaledParams;

/// Which carrier populates the layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarrierSide {
    /// Donor-side layer `[x0, x_l]`.
    Holes,
    /// Acceptor-side layer `[x_r, x_end]`.
    Electrons,
}

/// Density and field at one point of the layer (a contact or a strip edge).
#[derive(Debug, Clone, Copy)]
pub struct UnipolarBoundary {
    pub x: f64,
    pub density: f64,
    pub field: f64,
}

#[derive(Debug, Clone, Copy)]
enum Branch {
    /// `y'' = xi y` in the stretched coordinate.
    Airy { c: f64, x_c: f64, alpha: f64, beta: f64 },
    /// Zero current: `y'' = a y` about the boundary point.
    Constant { a: f64, r_b: f64 },
}

/// Closed-form field, potential and density of one carrier layer.
#[derive(Debug, Clone)]
pub struct UnipolarSolution {
    side: CarrierSide,
    boundary: UnipolarBoundary,
    j: f64,
    mu: f64,
    lambda_d2: f64,
    /// First-integral constant `C`.
    c_int: f64,
    branch: Branch,
}

/// Build the layer solution from boundary data and the layer current.
///
/// `e_freeze` is the field at which the (constant) mobility is evaluated;
/// pass the mean field to stay consistent with the zeroth-order profiles.
pub fn unipolar_solve(
    p: &ScaledParams,
    side: CarrierSide,
    boundary: UnipolarBoundary,
    j: f64,
    e_freeze: f64,
) -> Result<UnipolarSolution, AsymptoticsError> {
    let lambda_d2 = p.lambda_d2();
    let mu = match side {
        CarrierSide::Holes => mobility_p(e_freeze, p),
        CarrierSide::Electrons => mobility_n(e_freeze, p),
    };
    let (x_b, rho_b, e_b) = (boundary.x, boundary.density, boundary.field);
    let drift = j * x_b / (lambda_d2 * mu);
    let c_int = match side {
        CarrierSide::Holes => rho_b / lambda_d2 - 0.5 * e_b * e_b + drift,
        CarrierSide::Electrons => -rho_b / lambda_d2 + 0.5 * e_b * e_b + drift,
    };
    let kappa = -4.0 * j / (lambda_d2 * mu);
    let branch = if kappa == 0.0 {
        let (a, r_b) = match side {
            CarrierSide::Holes => (-0.5 * c_int, -0.5 * e_b),
            CarrierSide::Electrons => (0.5 * c_int, 0.5 * e_b),
        };
        Branch::Constant { a, r_b }
    } else {
        let c = match side {
            CarrierSide::Holes => (-kappa / 8.0).cbrt(),
            CarrierSide::Electrons => (kappa / 8.0).cbrt(),
        };
        let x_c = -4.0 * c_int / kappa;
        let xi_b = c * (x_b - x_c);
        let v = airy(xi_b);
        let r_b = match side {
            CarrierSide::Holes => -e_b / (2.0 * c),
            CarrierSide::Electrons => e_b / (2.0 * c),
        };
        let alpha = v.bi_prime - r_b * v.bi;
        let beta = -(v.ai_prime - r_b * v.ai);
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(AsymptoticsError::AiryRange { xi: xi_b });
        }
        Branch::Airy { c, x_c, alpha, beta }
    };
    Ok(UnipolarSolution {
        side,
        boundary,
        j,
        mu,
        lambda_d2,
        c_int,
        branch,
    })
}

impl UnipolarSolution {
    /// Mobility the solution was built with.
    pub fn mobility(&self) -> f64 {
        self.mu
    }

    /// Layer current the solution was built with.
    pub fn current(&self) -> f64 {
        self.j
    }

    /// Stretched Airy coordinate at `x`, when the current is nonzero.
    pub fn airy_argument(&self, x: f64) -> Option<f64> {
        match self.branch {
            Branch::Airy { c, x_c, .. } => Some(c * (x - x_c)),
            Branch::Constant { .. } => None,
        }
    }

    /// Right-hand side of the first integral, `-j x / (lambda_d^2 mu) + C`.
    fn drive(&self, x: f64) -> f64 {
        -self.j * x / (self.lambda_d2 * self.mu) + self.c_int
    }

    /// `(y, dy/dx)` of the linearizing function, in its internal scale.
    fn y_and_slope(&self, x: f64) -> (f64, f64) {
        match self.branch {
            Branch::Airy { c, x_c, alpha, beta } => {
                let v = airy(c * (x - x_c));
                (
                    alpha * v.ai + beta * v.bi,
                    c * (alpha * v.ai_prime + beta * v.bi_prime),
                )
            }
            Branch::Constant { a, r_b } => {
                let d = x - self.boundary.x;
                if a > 0.0 {
                    let s = a.sqrt();
                    let (ch, sh) = ((s * d).cosh(), (s * d).sinh());
                    (ch + r_b / s * sh, s * sh + r_b * ch)
                } else if a == 0.0 {
                    (1.0 + r_b * d, r_b)
                } else {
                    let s = (-a).sqrt();
                    let (cs, sn) = ((s * d).cos(), (s * d).sin());
                    (cs + r_b / s * sn, -s * sn + r_b * cs)
                }
            }
        }
    }

    /// Electric field at `x`.
    pub fn field(&self, x: f64) -> f64 {
        let (y, slope) = self.y_and_slope(x);
        match self.side {
            CarrierSide::Holes => -2.0 * slope / y,
            CarrierSide::Electrons => 2.0 * slope / y,
        }
    }

    /// Electrostatic potential at `x`, relative to the boundary point.
    ///
    /// Meaningful only on a pole-free interval containing the boundary.
    pub fn potential(&self, x: f64) -> f64 {
        let (y, _) = self.y_and_slope(x);
        let y_b = match self.branch {
            Branch::Airy { .. } => std::f64::consts::FRAC_1_PI,
            Branch::Constant { .. } => 1.0,
        };
        match self.side {
            CarrierSide::Holes => 2.0 * (y / y_b).ln(),
            CarrierSide::Electrons => -2.0 * (y / y_b).ln(),
        }
    }

    /// Carrier density at `x`, from the first integral (no second
    /// derivatives involved, so it is exact at the boundary point).
    pub fn density(&self, x: f64) -> f64 {
        let e = self.field(x);
        let q = self.drive(x);
        match self.side {
            CarrierSide::Holes => self.lambda_d2 * (0.5 * e * e + q),
            CarrierSide::Electrons => -self.lambda_d2 * (-0.5 * e * e + q),
        }
    }

    /// First zero of `y` in `(a, b)`, if any: the point where the layer
    /// solution develops a pole and stops being meaningful.
    pub fn pole_in(&self, a: f64, b: f64) -> Option<f64> {
        let m = 2000;
        let mut prev_x = a;
        let (mut prev_y, _) = self.y_and_slope(a);
        for i in 1..=m {
            let x = a + (b - a) * i as f64 / m as f64;
            let (y, _) = self.y_and_slope(x);
            if y == 0.0 {
                return Some(x);
            }
            if y.signum() != prev_y.signum() {
                let (mut lo, mut hi, mut y_lo) = (prev_x, x, prev_y);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    let (y_mid, _) = self.y_and_slope(mid);
                    if y_mid == 0.0 {
                        return Some(mid);
                    }
                    if y_mid.signum() == y_lo.signum() {
                        lo = mid;
                        y_lo = y_mid;
                    } else {
                        hi = mid;
                    }
                }
                return Some(0.5 * (lo + hi));
            }
            prev_x = x;
            prev_y = y;
        }
        None
    }

    /// Field at `x` by direct Runge-Kutta integration of the Riccati
    /// equation from the boundary point — an independent cross-check of the
    /// Airy evaluation.
    pub fn riccati_field(&self, x: f64) -> f64 {
        let mut t = self.boundary.x;
        let mut e = self.boundary.field;
        let span = x - t;
        if span == 0.0 {
            return e;
        }
        let n = ((span.abs() / 1e-4).ceil() as usize).max(100);
        let h = span / n as f64;
        let half = match self.side {
            CarrierSide::Holes => 0.5,
            CarrierSide::Electrons => -0.5,
        };
        let f = |t: f64, e: f64| half * e * e + self.drive(t);
        for _ in 0..n {
            let k1 = f(t, e);
            let k2 = f(t + 0.5 * h, e + 0.5 * h * k1);
            let k3 = f(t + 0.5 * h, e + 0.5 * h * k2);
            let k4 = f(t + h, e + h * k3);
            e += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        e
    }
}
