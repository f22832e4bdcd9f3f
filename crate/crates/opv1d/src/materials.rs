//! Constitutive relations of the bilayer: region layout, the heterojunction
//! step of the material potential, field-dependent mobilities, and the
//! exciton dissociation/recombination rates.
//!
//! All field arguments are the scaled electrostatic field `E = -dV/dx`; the
//! gradient of the material potential never enters a rate or a mobility.

use crate::scaling::ScaledParams;
use thiserror::Error;

/// Which layer a point belongs to.  The interface strip `[x_l, x_r]` is
/// closed, so both edges count as interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Donor bulk, `x < x_l`.
    Donor,
    /// Interface strip, `x_l <= x <= x_r`.
    Interface,
    /// Acceptor bulk, `x > x_r`.
    Acceptor,
}

/// Classifies a position against the interface strip.
pub fn region_of(x: f64, p: &ScaledParams) -> Region {
    if x < p.x_l {
        Region::Donor
    } else if x > p.x_r {
        Region::Acceptor
    } else {
        Region::Interface
    }
}

/// Shape of the material-potential ramp across the interface strip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UProfileKind {
    /// Two parabolic arcs with zero slope at both strip edges; the profile
    /// and its derivative are continuous everywhere.
    #[default]
    QuadraticC1,
    /// A straight ramp; the derivative jumps at the strip edges.
    Linear,
}

/// Evaluation outside the device.
#[derive(Debug, Error, PartialEq)]
#[error("position {x} lies outside the device [{x0}, {x_end}]")]
pub struct OutOfDomain {
    pub x: f64,
    pub x0: f64,
    pub x_end: f64,
}

/// Material potential `U(x)`: zero in the donor, `delta_u` in the acceptor,
/// ramping across the interface strip.
#[derive(Debug, Clone, Copy)]
pub struct UProfile {
    pub kind: UProfileKind,
    delta_u: f64,
    x0: f64,
    x_l: f64,
    x_r: f64,
    x_end: f64,
}

impl UProfile {
    pub fn new(kind: UProfileKind, p: &ScaledParams) -> Self {
        UProfile {
            kind,
            delta_u: p.delta_u,
            x0: p.x0,
            x_l: p.x_l,
            x_r: p.x_r,
            x_end: p.x_end,
        }
    }

    /// Potential and slope at `x`.
    ///
    /// For the linear ramp the slope at the strip edges is taken from the
    /// interface side.  Positions outside the device are rejected.
    pub fn u_and_slope(&self, x: f64) -> Result<(f64, f64), OutOfDomain> {
        if !(self.x0..=self.x_end).contains(&x) {
            return Err(OutOfDomain {
                x,
                x0: self.x0,
                x_end: self.x_end,
            });
        }
        let w = self.x_r - self.x_l;
        Ok(match self.kind {
            UProfileKind::QuadraticC1 => {
                if x <= self.x_l {
                    (0.0, 0.0)
                } else if x >= self.x_r {
                    (self.delta_u, 0.0)
                } else if x <= 0.5 * (self.x_l + self.x_r) {
                    let t = (x - self.x_l) / w;
                    (2.0 * self.delta_u * t * t, 4.0 * self.delta_u * t / w)
                } else {
                    let s = (self.x_r - x) / w;
                    (
                        self.delta_u * (1.0 - 2.0 * s * s),
                        4.0 * self.delta_u * s / w,
                    )
                }
            }
            UProfileKind::Linear => {
                if x < self.x_l {
                    (0.0, 0.0)
                } else if x > self.x_r {
                    (self.delta_u, 0.0)
                } else {
                    (self.delta_u * (x - self.x_l) / w, self.delta_u / w)
                }
            }
        })
    }
}

/// Electron mobility at field `e`; grows as `exp(gamma_n sqrt(|e|))`.
pub fn mobility_n(e: f64, p: &ScaledParams) -> f64 {
    p.mu_n0 * (p.gamma_n * e.abs().sqrt()).exp()
}

/// Hole mobility at field `e`.
pub fn mobility_p(e: f64, p: &ScaledParams) -> f64 {
    p.mu_p0 * (p.gamma_p * e.abs().sqrt()).exp()
}

/// Dimensionless field strength entering the dissociation model.
pub fn dissociation_m(e: f64, p: &ScaledParams) -> f64 {
    p.a_m * e.abs().sqrt()
}

/// Exciton dissociation rate at field `e` in the given region.
///
/// Outside the interface strip the rate is the constant decay `kd_out`.
/// Inside the strip the pair separates against the field: a field pointing
/// from acceptor to donor (`e < 0`) pulls the pair apart and the rate grows
/// exponentially with `M = a_m sqrt(|e|)`, while a forward field (`e >= 0`)
/// pushes the carriers back together and the rate decays like `1/M^2`.  Both
/// branches reduce to `kd_in0` at zero field; a Taylor expansion replaces
/// them below `M = 1e-3` where the closed forms lose significance.
pub fn dissociation_rate(e: f64, region: Region, p: &ScaledParams) -> f64 {
    if region != Region::Interface {
        return p.kd_out;
    }
    let m = dissociation_m(e, p);
    if e < 0.0 {
        if m < 1e-3 {
            p.kd_in0 * (1.0 + 2.0 * m / 3.0)
        } else {
            2.0 * p.kd_in0 / m * (m.exp() * (1.0 - 1.0 / m) + 1.0 / m)
        }
    } else if m < 1e-3 {
        p.kd_in0 * (1.0 - m * m / 8.0)
    } else {
        4.0 * p.kd_in0 / (m * m) * (1.0 - (-m * m / 4.0).exp())
    }
}

/// Bimolecular recombination coefficient of free carriers.
pub fn recombination_coefficient(p: &ScaledParams) -> f64 {
    p.c_r
}

/// Exciton recombination (decay to ground) rate in the given region.
pub fn geminate_rate(region: Region, p: &ScaledParams) -> f64 {
    if region == Region::Interface {
        p.kr_in
    } else {
        p.kr_out
    }
}

/// Photogeneration rate of excitons (uniform across the device).
pub fn generation_rate(p: &ScaledParams) -> f64 {
    p.gt
}

/// Collapse of interfacial dissociation once the local field stops sweeping
/// the separated pair apart.
///
/// The reverse-field branch of [`dissociation_rate`] describes escape against
/// a field that carries each carrier into its transport layer.  When the
/// field at the heterojunction turns around, the separated pair is driven
/// back together and re-forms an exciton instead of contributing free
/// carriers, so the effective dissociation collapses near `e = -threshold`.
/// The logistic shape keeps the rate smooth, which the damped iteration
/// needs to converge near the collapse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateParams {
    pub enabled: bool,
    /// Field at which the escape probability has dropped to one half, in
    /// scaled field units (the gate is centred at `e = -threshold`).
    pub threshold: f64,
    /// Width of the collapse in scaled field units.
    pub width: f64,
}

impl Default for GateParams {
    fn default() -> Self {
        GateParams {
            enabled: true,
            threshold: 0.5,
            width: 0.15,
        }
    }
}

/// Escape probability of the separated pair at field `e`; 1 for strongly
/// negative fields, 0 for positive ones.
pub fn escape_gate(e: f64, gate: &GateParams) -> f64 {
    if !gate.enabled {
        return 1.0;
    }
    let z = ((e + gate.threshold) / gate.width).clamp(-60.0, 60.0);
    1.0 / (1.0 + z.exp())
}

/// Interfacial dissociation rate actually used by the solver: the escape
/// branch of [`dissociation_rate`] weighted by the escape probability.  With
/// the gate disabled this is exactly [`dissociation_rate`].
pub fn interface_dissociation(e: f64, p: &ScaledParams, gate: &GateParams) -> f64 {
    if !gate.enabled {
        return dissociation_rate(e, Region::Interface, p);
    }
    dissociation_rate(e.min(0.0), Region::Interface, p) * escape_gate(e, gate)
}
