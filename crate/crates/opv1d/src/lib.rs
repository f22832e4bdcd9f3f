//! Steady-state simulator for bilayer organic photovoltaic devices in one
//! spatial dimension, together with the analytic approximations used to
//! cross-check it.
//!
//! The device model couples three pieces on a scaled domain `[x0, x_end]`:
//!
//! * Poisson's equation for the electrostatic potential, driven by the net
//!   space charge and by the dipole carried by excitons straddling the
//!   donor/acceptor interface;
//! * drift-diffusion continuity equations for electrons and holes, with
//!   field-dependent mobilities and a heterojunction step in the material
//!   potential;
//! * a reaction-diffusion equation for excitons, generated by illumination
//!   and by bimolecular recombination, and consumed by field-dependent
//!   dissociation back into free carriers.
//!
//! [`solver`] resolves the coupled system by damped Gummel iteration on an
//! exponentially fitted (Scharfetter-Gummel) finite-volume discretization
//! built in [`grid`]. [`asymptotics`] provides independent closed-form
//! approximations — a zeroth-order interface-layer model, its first-order
//! field correction, and a unipolar space-charge solution built on Airy
//! functions — that the numeric solution is compared against in [`iv`] and
//! by the `opv-bench` command-line tool.
//!
//! All quantities are dimensionless; [`scaling`] maps laboratory units onto
//! the scaled system and provides the default parameter set used throughout
//! the tests.

pub mod asymptotics;
pub mod config;
pub mod grid;
pub mod iv;
pub mod materials;
pub mod scaling;
pub mod solver;

pub use config::Config;
pub use scaling::{default_params, PhysicalParams, ScaledParams};
