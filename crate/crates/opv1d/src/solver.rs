//! Damped Gummel fixed-point iteration over `(V, n, p, X)` at a fixed bias,
//! plus current extraction and convergence diagnostics.
//!
//! Each step solves Poisson from the current densities, then — on the
//! freshest potential and field — the electron, hole and exciton systems
//! independently, and blends the candidate into the state with a damping
//! factor.  The first few steps are heavily damped to survive the rough
//! initial guess; afterwards the configured factor applies, and an optional
//! rescue halves it when the residual stalls (the iteration can limit-cycle
//! near the open-circuit knee otherwise) or decays too slowly to reach the
//! tolerance within the remaining iteration budget.

use crate::grid::{
    assemble_continuity, assemble_exciton, assemble_poisson, face_field, sg_edge_flux,
    solve_tridiagonal, Carrier, Mesh, PivotBreakdown, RateModel,
};
use crate::materials::{mobility_n, mobility_p, GateParams, UProfile, UProfileKind};
use crate::scaling::ScaledParams;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Solver configuration; `Default` reproduces the reference setup.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Combined relative L2 change below which the iteration stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Damping factor after warm-up, in (0, 1].
    pub damping: f64,
    /// Damping factor for the first `warmup_steps` iterations.
    pub warmup_damping: f64,
    pub warmup_steps: usize,
    /// Halve the damping factor (down to 0.05) when the residual stalls or
    /// is on pace to miss the tolerance within `max_iterations`.
    pub stall_rescue: bool,
    pub u_profile: UProfileKind,
    pub gate: GateParams,
    /// Fixed interfacial dissociation rate, bypassing field dependence.
    pub kd_const: Option<f64>,
    /// Illumination switch; off zeroes the exciton generation term.
    pub generation_on: bool,
    /// Electron density at (x0, x_end), overriding the parameter set.
    pub n_bc: Option<(f64, f64)>,
    /// Hole density at (x0, x_end), overriding the parameter set.
    pub p_bc: Option<(f64, f64)>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-7,
            max_iterations: 500,
            damping: 0.6,
            warmup_damping: 0.01,
            warmup_steps: 3,
            stall_rescue: true,
            u_profile: UProfileKind::QuadraticC1,
            gate: GateParams::default(),
            kd_const: None,
            generation_on: true,
            n_bc: None,
            p_bc: None,
        }
    }
}

/// The discrete unknowns at one bias.
#[derive(Debug, Clone)]
pub struct DeviceState {
    pub v_diff: f64,
    pub generation_on: bool,
    pub v: Vec<f64>,
    pub n: Vec<f64>,
    pub p: Vec<f64>,
    pub x: Vec<f64>,
    pub converged: bool,
}

impl DeviceState {
    /// Nodal electrostatic field `E = -dV/dx` by centered differences
    /// (one-sided at the contacts).
    pub fn nodal_field(&self, mesh: &Mesh) -> Vec<f64> {
        let nn = mesh.n_nodes();
        let mut e = vec![0.0; nn];
        e[0] = -(self.v[1] - self.v[0]) / mesh.widths[0];
        e[nn - 1] = -(self.v[nn - 1] - self.v[nn - 2]) / mesh.widths[nn - 2];
        for i in 1..nn - 1 {
            e[i] = -(self.v[i + 1] - self.v[i - 1]) / (mesh.nodes[i + 1] - mesh.nodes[i - 1]);
        }
        e
    }
}

/// Convergence record of one solve.
#[derive(Debug, Clone)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    /// Combined relative L2 change per iteration.
    pub residual_history: Vec<f64>,
    /// Per-field relative L2 change per iteration, ordered (V, n, p, X).
    pub field_changes: Vec<[f64; 4]>,
    pub final_residual: f64,
    /// Damping factor applied at each iteration.
    pub damping_used: Vec<f64>,
    pub wall_time: Duration,
}

/// Face-by-face currents of a converged state.
#[derive(Debug, Clone)]
pub struct CurrentProfile {
    pub j_n: Vec<f64>,
    pub j_p: Vec<f64>,
    pub j_total: Vec<f64>,
    /// Device current: median of `j_total` over interior faces.
    pub j: f64,
    /// Max relative deviation of `j_total` from `j` over interior faces.
    pub max_rel_variation: f64,
    /// Set when the variation exceeds 1e-3 (under-resolved mesh warning).
    pub under_resolved: bool,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("damping factor must lie in (0, 1], got {0}")]
    BadDamping(f64),
    #[error("linear solve failed in the {equation} system: {source}")]
    Pivot {
        equation: &'static str,
        source: PivotBreakdown,
    },
    #[error("state and mesh disagree: state has {state} nodes, mesh {mesh}")]
    SizeMismatch { state: usize, mesh: usize },
}

fn boundary_densities(params: &ScaledParams, options: &SolverOptions) -> ((f64, f64), (f64, f64)) {
    (
        options.n_bc.unwrap_or((params.n_x0, params.n_xend)),
        options.p_bc.unwrap_or((params.p_x0, params.p_xend)),
    )
}

fn rate_model<'a>(params: &'a ScaledParams, options: &SolverOptions) -> RateModel<'a> {
    RateModel {
        params,
        gate: options.gate,
        kd_const: options.kd_const,
        generation: if options.generation_on { params.gt } else { 0.0 },
    }
}

/// Default initial guess: linear potential between the bias and ground,
/// linear carrier interpolants of their Dirichlet data, no excitons.
pub fn initial_state(
    mesh: &Mesh,
    params: &ScaledParams,
    v_diff: f64,
    options: &SolverOptions,
) -> DeviceState {
    let ((n0, n1), (p0, p1)) = boundary_densities(params, options);
    let span = params.x_end - params.x0;
    let frac: Vec<f64> = mesh.nodes.iter().map(|&x| (x - params.x0) / span).collect();
    DeviceState {
        v_diff,
        generation_on: options.generation_on,
        v: frac.iter().map(|&t| v_diff * (1.0 - t)).collect(),
        n: frac.iter().map(|&t| n0 + (n1 - n0) * t).collect(),
        p: frac.iter().map(|&t| p0 + (p1 - p0) * t).collect(),
        x: vec![0.0; mesh.n_nodes()],
        converged: false,
    }
}

/// One undamped Gummel update: Poisson from the current densities, then the
/// three continuity systems on the freshest potential, each seeing only the
/// previous iterate of the other fields.
pub fn gummel_step(
    mesh: &Mesh,
    params: &ScaledParams,
    options: &SolverOptions,
    state: &DeviceState,
) -> Result<DeviceState, SolverError> {
    let nn = mesh.n_nodes();
    if state.v.len() != nn {
        return Err(SolverError::SizeMismatch {
            state: state.v.len(),
            mesh: nn,
        });
    }
    let model = rate_model(params, options);
    let ((nbc0, nbc1), (pbc0, pbc1)) = boundary_densities(params, options);
    let profile = UProfile::new(options.u_profile, params);

    let sys = assemble_poisson(mesh, params, &state.n, &state.p, &state.x, state.v_diff);
    let v_new = solve_tridiagonal(&sys).map_err(|source| SolverError::Pivot {
        equation: "Poisson",
        source,
    })?;

    let phi: Vec<f64> = mesh
        .nodes
        .iter()
        .zip(&v_new)
        .map(|(&x, &v)| profile.u_and_slope(x).expect("mesh node inside device").0 + v)
        .collect();
    let e_face = face_field(mesh, &v_new);

    let sys = assemble_continuity(
        mesh,
        &model,
        Carrier::Electron,
        &phi,
        &e_face,
        &state.p,
        &state.x,
        (nbc0, nbc1),
    );
    let n_new = solve_tridiagonal(&sys).map_err(|source| SolverError::Pivot {
        equation: "electron continuity",
        source,
    })?;

    let sys = assemble_continuity(
        mesh,
        &model,
        Carrier::Hole,
        &phi,
        &e_face,
        &state.n,
        &state.x,
        (pbc0, pbc1),
    );
    let p_new = solve_tridiagonal(&sys).map_err(|source| SolverError::Pivot {
        equation: "hole continuity",
        source,
    })?;

    let sys = assemble_exciton(mesh, &model, &e_face, &state.n, &state.p);
    let x_new = solve_tridiagonal(&sys).map_err(|source| SolverError::Pivot {
        equation: "exciton",
        source,
    })?;

    Ok(DeviceState {
        v_diff: state.v_diff,
        generation_on: state.generation_on,
        v: v_new,
        n: n_new,
        p: p_new,
        x: x_new,
        converged: false,
    })
}

/// Convex blend `state + alpha (candidate - state)` per field.  Both inputs
/// satisfy the boundary conditions, so the blend does too.
pub fn apply_damping(
    state: &DeviceState,
    candidate: &DeviceState,
    alpha: f64,
) -> Result<DeviceState, SolverError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SolverError::BadDamping(alpha));
    }
    let blend = |a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter()
            .zip(b)
            .map(|(&old, &new)| old + alpha * (new - old))
            .collect()
    };
    Ok(DeviceState {
        v_diff: state.v_diff,
        generation_on: state.generation_on,
        v: blend(&state.v, &candidate.v),
        n: blend(&state.n, &candidate.n),
        p: blend(&state.p, &candidate.p),
        x: blend(&state.x, &candidate.x),
        converged: false,
    })
}

fn rel_change(new: &[f64], old: &[f64]) -> f64 {
    let mut diff2 = 0.0;
    let mut norm2 = 0.0;
    for (&a, &b) in new.iter().zip(old) {
        diff2 += (a - b) * (a - b);
        norm2 += a * a;
    }
    diff2.sqrt() / (norm2.sqrt() + 1.0)
}

/// Iterates [`gummel_step`] + [`apply_damping`] until the combined relative
/// L2 change drops below tolerance or the iteration budget runs out.
///
/// A non-converged run is not an error: the last state is returned flagged,
/// with the full residual history in the diagnostics.
pub fn solve_steady_state(
    mesh: &Mesh,
    params: &ScaledParams,
    v_diff: f64,
    options: &SolverOptions,
    warm_start: Option<&DeviceState>,
) -> Result<(DeviceState, SolverDiagnostics), SolverError> {
    let start = Instant::now();
    let ((nbc0, nbc1), (pbc0, pbc1)) = boundary_densities(params, options);
    let mut state = match warm_start {
        Some(prev) if prev.v.len() == mesh.n_nodes() => {
            let mut s = prev.clone();
            s.v_diff = v_diff;
            s.generation_on = options.generation_on;
            // Re-impose the boundary data of this solve.
            let last = s.v.len() - 1;
            s.v[0] = v_diff;
            s.v[last] = 0.0;
            s.n[0] = nbc0;
            s.n[last] = nbc1;
            s.p[0] = pbc0;
            s.p[last] = pbc1;
            s
        }
        _ => initial_state(mesh, params, v_diff, options),
    };

    let mut diag = SolverDiagnostics {
        iterations: 0,
        converged: false,
        residual_history: Vec::new(),
        field_changes: Vec::new(),
        final_residual: f64::INFINITY,
        damping_used: Vec::new(),
        wall_time: Duration::ZERO,
    };
    let mut alpha_run = options.damping;
    let mut res_checkpoint = f64::INFINITY;

    for it in 0..options.max_iterations {
        let alpha = if it < options.warmup_steps {
            options.warmup_damping
        } else {
            alpha_run
        };
        let candidate = gummel_step(mesh, params, options, &state)?;
        let next = apply_damping(&state, &candidate, alpha)?;
        let changes = [
            rel_change(&next.v, &state.v),
            rel_change(&next.n, &state.n),
            rel_change(&next.p, &state.p),
            rel_change(&next.x, &state.x),
        ];
        let res: f64 = changes.iter().sum();
        state = next;
        diag.iterations = it + 1;
        diag.damping_used.push(alpha);
        diag.field_changes.push(changes);
        diag.residual_history.push(res);
        diag.final_residual = res;
        if res < options.tolerance {
            diag.converged = true;
            break;
        }
        // Shrink the blend (never grow it back within one solve) when the
        // candidate is overshooting — residual stalled — or when steady
        // decay is too slow to reach the tolerance before the budget runs
        // out, which would otherwise fail just as surely.
        if options.stall_rescue && it > 20 && it % 60 == 0 {
            let stalled = res > 0.5 * res_checkpoint;
            let crawling = {
                let rate = (res / res_checkpoint).powf(1.0 / 60.0);
                let left = (options.max_iterations - diag.iterations) as f64;
                rate < 1.0 && (options.tolerance / res).ln() / rate.ln() > left
            };
            if (stalled || crawling) && alpha_run > 0.05 {
                alpha_run = (alpha_run * 0.5).max(0.05);
            }
            res_checkpoint = res;
        }
    }
    state.converged = diag.converged;
    diag.wall_time = start.elapsed();
    Ok((state, diag))
}

/// Face currents of a state, with the same fitted fluxes used in assembly,
/// so discrete conservation carries over exactly.
pub fn compute_currents(
    mesh: &Mesh,
    params: &ScaledParams,
    options: &SolverOptions,
    state: &DeviceState,
) -> CurrentProfile {
    let profile = UProfile::new(options.u_profile, params);
    let e_face = face_field(mesh, &state.v);
    let phi: Vec<f64> = mesh
        .nodes
        .iter()
        .zip(&state.v)
        .map(|(&x, &v)| profile.u_and_slope(x).expect("mesh node inside device").0 + v)
        .collect();
    let nc = mesh.n_cells();
    let mut j_n = vec![0.0; nc];
    let mut j_p = vec![0.0; nc];
    let mut j_total = vec![0.0; nc];
    for f in 0..nc {
        let h = mesh.widths[f];
        j_n[f] = sg_edge_flux(
            state.n[f],
            state.n[f + 1],
            phi[f],
            phi[f + 1],
            mobility_n(e_face[f], params),
            h,
            Carrier::Electron,
        );
        j_p[f] = sg_edge_flux(
            state.p[f],
            state.p[f + 1],
            phi[f],
            phi[f + 1],
            mobility_p(e_face[f], params),
            h,
            Carrier::Hole,
        );
        j_total[f] = j_n[f] + j_p[f];
    }
    let interior = &j_total[1..nc.max(2) - 1];
    let mut sorted = interior.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let j = if sorted.is_empty() {
        0.0
    } else if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let max_rel_variation = interior
        .iter()
        .map(|&v| (v - j).abs())
        .fold(0.0f64, f64::max)
        / j.abs().max(1e-300);
    CurrentProfile {
        j_n,
        j_p,
        j_total,
        j,
        max_rel_variation,
        under_resolved: max_rel_variation > 1e-3,
    }
}
