//! Finite-volume assembly of the three linearized device equations.
//!
//! Each assembly integrates its equation over node-centered control volumes
//! and returns a [`TridiagonalSystem`] whose row `i` balances the two face
//! fluxes of node `i` against the volume-integrated reactions.  Fluxes are
//! exponential-fitted (Scharfetter-Gummel), so the systems stay an M-matrix
//! no matter how drift-dominated the cells become.

use crate::grid::bernoulli::bernoulli;
use crate::grid::mesh::Mesh;
use crate::grid::tridiag::TridiagonalSystem;
use crate::materials::{interface_dissociation, mobility_n, mobility_p, GateParams};
use crate::scaling::ScaledParams;

/// Which continuity equation is being discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carrier {
    Electron,
    Hole,
}

/// Exponential-fitted two-point flux through one cell face.
///
/// With `dphi = phi_right - phi_left` and `B` the Bernoulli weight, the
/// electron flux `mu (u_x - u phi_x)` discretizes to
/// `(mu/h)(B(dphi) u_right - B(-dphi) u_left)` and the hole flux
/// `-mu (u_x + u phi_x)` to `-(mu/h)(B(-dphi) u_right - B(dphi) u_left)`;
/// both vanish identically on the Boltzmann profiles (`e^phi` for electrons,
/// `e^-phi` for holes) and reduce to central diffusion differences at
/// `dphi = 0`.
pub fn sg_edge_flux(
    u_left: f64,
    u_right: f64,
    phi_left: f64,
    phi_right: f64,
    mu_edge: f64,
    h_edge: f64,
    carrier: Carrier,
) -> f64 {
    let dphi = phi_right - phi_left;
    match carrier {
        Carrier::Electron => {
            mu_edge / h_edge * (bernoulli(dphi) * u_right - bernoulli(-dphi) * u_left)
        }
        Carrier::Hole => {
            -(mu_edge / h_edge) * (bernoulli(-dphi) * u_right - bernoulli(dphi) * u_left)
        }
    }
}

/// Rate closure shared by the carrier and exciton assemblies: how the
/// dissociation/recombination coefficients are evaluated on each cell.
#[derive(Debug, Clone)]
pub struct RateModel<'a> {
    pub params: &'a ScaledParams,
    /// Escape gate applied to the interfacial dissociation.
    pub gate: GateParams,
    /// Fixed interfacial dissociation rate overriding the field dependence
    /// (and the gate) when set.
    pub kd_const: Option<f64>,
    /// Exciton photogeneration actually applied (set to 0 for dark solves).
    pub generation: f64,
}

impl<'a> RateModel<'a> {
    /// Field-dependent rates with the default gate and full illumination.
    pub fn standard(params: &'a ScaledParams) -> Self {
        RateModel {
            params,
            gate: GateParams::default(),
            kd_const: None,
            generation: params.gt,
        }
    }

    /// Dissociation rate on a cell at face field `e`.
    pub fn kd_cell(&self, e: f64, in_interface: bool) -> f64 {
        if !in_interface {
            return self.params.kd_out;
        }
        match self.kd_const {
            Some(kd) => kd,
            None => interface_dissociation(e, self.params, &self.gate),
        }
    }

    /// Exciton recombination rate on a cell.
    pub fn kr_cell(&self, in_interface: bool) -> f64 {
        if in_interface {
            self.params.kr_in
        } else {
            self.params.kr_out
        }
    }
}

/// Electrostatic field `E = -dV/dx` on each cell (face midpoints).
pub fn face_field(mesh: &Mesh, v: &[f64]) -> Vec<f64> {
    (0..mesh.n_cells())
        .map(|j| -(v[j + 1] - v[j]) / mesh.widths[j])
        .collect()
}

/// Poisson system for the new potential given the current densities:
/// `-lambda^2 eps_r V_xx = p - n + (h/L) X_x` restricted to the strip, with
/// `V(x0) = v_diff` and `V(x_end) = 0`.
///
/// The dipole term integrates `X_x` over each control volume using the
/// cells flagged as interface, so its support is exactly the strip.
pub fn assemble_poisson(
    mesh: &Mesh,
    params: &ScaledParams,
    n: &[f64],
    p: &[f64],
    x_exciton: &[f64],
    v_diff: f64,
) -> TridiagonalSystem {
    let nn = mesh.n_nodes();
    let lam = params.lambda_d2();
    let mut sys = TridiagonalSystem::zeros(nn);
    sys.diag[0] = 1.0;
    sys.rhs[0] = v_diff;
    sys.diag[nn - 1] = 1.0;
    sys.rhs[nn - 1] = 0.0;
    for i in 1..nn - 1 {
        let hl = mesh.widths[i - 1];
        let hr = mesh.widths[i];
        sys.sub[i] = -lam / hl;
        sys.sup[i] = -lam / hr;
        sys.diag[i] = lam * (1.0 / hl + 1.0 / hr);
        let dip_left = if mesh.cell_in_interface[i - 1] {
            x_exciton[i] - x_exciton[i - 1]
        } else {
            0.0
        };
        let dip_right = if mesh.cell_in_interface[i] {
            x_exciton[i + 1] - x_exciton[i]
        } else {
            0.0
        };
        sys.rhs[i] = mesh.volumes[i] * (p[i] - n[i])
            + params.h_over_l * 0.5 * (dip_left + dip_right);
    }
    sys
}

/// Continuity system for one carrier on the freshest potential.
///
/// `phi` is the drift potential `U + V` at the nodes; `e_face` the
/// electrostatic field per cell (mobility and dissociation argument);
/// `other_prev` the previous iterate of the opposite carrier (implicit
/// recombination partner); `x_prev` the previous exciton iterate feeding the
/// generation term `kd(E) X`.  Dirichlet rows impose `bc` at the contacts.
#[allow(clippy::too_many_arguments)]
pub fn assemble_continuity(
    mesh: &Mesh,
    model: &RateModel,
    carrier: Carrier,
    phi: &[f64],
    e_face: &[f64],
    other_prev: &[f64],
    x_prev: &[f64],
    bc: (f64, f64),
) -> TridiagonalSystem {
    let nn = mesh.n_nodes();
    let p = model.params;
    let mu: Vec<f64> = e_face
        .iter()
        .map(|&e| match carrier {
            Carrier::Electron => mobility_n(e, p),
            Carrier::Hole => mobility_p(e, p),
        })
        .collect();
    let kd: Vec<f64> = e_face
        .iter()
        .zip(&mesh.cell_in_interface)
        .map(|(&e, &inside)| model.kd_cell(e, inside))
        .collect();

    let mut sys = TridiagonalSystem::zeros(nn);
    sys.diag[0] = 1.0;
    sys.rhs[0] = bc.0;
    sys.diag[nn - 1] = 1.0;
    sys.rhs[nn - 1] = bc.1;
    for i in 1..nn - 1 {
        let hl = mesh.widths[i - 1];
        let hr = mesh.widths[i];
        let dphi_l = phi[i] - phi[i - 1];
        let dphi_r = phi[i + 1] - phi[i];
        let (bl_in, bl_out, br_in, br_out) = match carrier {
            // Coefficients of (u_{i-1}, u_i) on the left face and
            // (u_i, u_{i+1}) on the right face in the flux divergence.
            Carrier::Electron => (
                bernoulli(-dphi_l),
                bernoulli(dphi_l),
                bernoulli(-dphi_r),
                bernoulli(dphi_r),
            ),
            Carrier::Hole => (
                bernoulli(dphi_l),
                bernoulli(-dphi_l),
                bernoulli(dphi_r),
                bernoulli(-dphi_r),
            ),
        };
        sys.sub[i] = -(mu[i - 1] / hl) * bl_in;
        sys.sup[i] = -(mu[i] / hr) * br_out;
        sys.diag[i] = (mu[i] / hr) * br_in + (mu[i - 1] / hl) * bl_out
            + mesh.volumes[i] * p.c_r * other_prev[i].max(0.0);
        let src = 0.5 * (hl * kd[i - 1] + hr * kd[i]);
        sys.rhs[i] = src * x_prev[i].max(0.0);
    }
    sys
}

/// Exciton reaction-diffusion system on the freshest field.
///
/// Implicit diffusion and reaction `(kd(E) + kr) X`, right-hand side
/// `c_r' n_prev p_prev + G`; homogeneous Neumann closures at both ends
/// (half-volume balance, equivalent to a mirror node).
pub fn assemble_exciton(
    mesh: &Mesh,
    model: &RateModel,
    e_face: &[f64],
    n_prev: &[f64],
    p_prev: &[f64],
) -> TridiagonalSystem {
    let nn = mesh.n_nodes();
    let p = model.params;
    let dx = p.d_x;
    let ktot: Vec<f64> = e_face
        .iter()
        .zip(&mesh.cell_in_interface)
        .map(|(&e, &inside)| model.kd_cell(e, inside) + model.kr_cell(inside))
        .collect();
    let source = |i: usize| p.c_r_prime * n_prev[i].max(0.0) * p_prev[i].max(0.0) + model.generation;

    let mut sys = TridiagonalSystem::zeros(nn);
    for i in 1..nn - 1 {
        let hl = mesh.widths[i - 1];
        let hr = mesh.widths[i];
        sys.sub[i] = -dx / hl;
        sys.sup[i] = -dx / hr;
        sys.diag[i] = dx * (1.0 / hl + 1.0 / hr) + 0.5 * (hl * ktot[i - 1] + hr * ktot[i]);
        sys.rhs[i] = mesh.volumes[i] * source(i);
    }
    let h0 = mesh.widths[0];
    sys.diag[0] = dx / h0 + 0.5 * h0 * ktot[0];
    sys.sup[0] = -dx / h0;
    sys.rhs[0] = 0.5 * h0 * source(0);
    let hn = mesh.widths[nn - 2];
    sys.diag[nn - 1] = dx / hn + 0.5 * hn * ktot[nn - 2];
    sys.sub[nn - 1] = -dx / hn;
    sys.rhs[nn - 1] = 0.5 * hn * source(nn - 1);
    sys
}
