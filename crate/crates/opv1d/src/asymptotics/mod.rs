//! Closed-form approximations to the steady device state.
//!
//! For a strong built-in field the drift-diffusion system splits into a
//! hierarchy of explicitly solvable pieces:
//!
//! - a constant leading-order field (`zeroth_field`) with piecewise-linear
//!   potential;
//! - an exciton balance decoupled from the carriers, solved region-by-region
//!   in hyperbolic functions ([`exciton`]);
//! - carrier densities and currents in quadrature form over the Slotboom
//!   weight `e^{±phi}` ([`zeroth`]);
//! - a first-order field correction from one more integration of the
//!   charge density;
//! - single-carrier bulk models whose field solves a Riccati equation and
//!   reduces to a ratio of Airy functions ([`unipolar`], [`airy`]).
//!
//! Everything here is pure evaluation: no meshes, no iteration.  The
//! numeric solver in [`crate::solver`] is the reference these formulas are
//! compared against.

pub mod airy;
pub mod exciton;
pub mod quad;
pub mod unipolar;
pub mod zeroth;

pub use airy::{airy, AiryValues};
pub use exciton::{exciton_zeroth, exciton_zeroth_with_strip_rate, ExcitonZeroth};
pub use quad::GaussRule;
pub use unipolar::{unipolar_solve, CarrierSide, UnipolarBoundary, UnipolarSolution};
pub use zeroth::{
    asymptotic_iv, calf_integrals, f_integral, first_order_field, leading_order_current,
    phi_integrals, zeroth_currents, zeroth_densities, zeroth_field, AsymptoticSweep,
    AsymptoticsError, FirstOrderField, ZerothCurrents, ZerothOrderContext,
};
