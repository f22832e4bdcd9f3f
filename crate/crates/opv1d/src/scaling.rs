//! Nondimensionalization of the device model.
//!
//! Laboratory inputs (SI units plus the thermal voltage) are mapped onto the
//! scaled system in which the solver works: lengths in units of a reference
//! length `L`, densities in units of `N_r`, potentials in units of the
//! thermal voltage `U_T`, mobilities in units of `mu_0`, and time in units
//! of `T = L^2 / (mu_0 U_T)`.  Rate constants are multiplied by `T`, so a
//! scaled rate of 1 means one event per transit time.
//!
//! [`default_params`] returns the dimensionless parameter set used by all
//! tests and by the benchmark CLI when no configuration file is given.
//! [`build_scaled_params`] performs the same reduction starting from
//! laboratory numbers; on the default laboratory inputs it reproduces
//! [`default_params`] to well within one percent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vacuum permittivity [F/m].
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Elementary charge [C].
pub const Q_E: f64 = 1.602_176_634e-19;

/// Device description in laboratory units.
///
/// Field-dependence factors `gamma_*` are Poole-Frenkel coefficients against
/// the square root of the field in V/m; they are converted to the scaled
/// field unit `U_T / L` by [`build_scaled_params`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Thermal voltage `U_T = k_B T / q` [V].
    pub thermal_voltage: f64,
    /// Reference length `L` [m]; the interface sits near `0.5 L`.
    pub length_scale: f64,
    /// Total device length [m]; the scaled domain ends at `device_length / L`.
    pub device_length: f64,
    /// Position of the donor/acceptor interface centre [m].
    pub interface_center: f64,
    /// Half-width `d` of the interface strip [m].
    pub interface_half_width: f64,
    /// Electron/hole pair separation `h` carried by an interfacial exciton [m].
    pub pair_separation: f64,
    /// Reference number density `N_r` [1/m^3].
    pub density_scale: f64,
    /// Reference mobility `mu_0` [m^2/(V s)].
    pub mobility_scale: f64,
    /// Relative permittivity of both layers.
    pub eps_r: f64,
    /// Zero-field electron mobility [m^2/(V s)].
    pub mu_n0: f64,
    /// Electron Poole-Frenkel factor [(m/V)^(1/2)].
    pub gamma_n: f64,
    /// Zero-field hole mobility [m^2/(V s)].
    pub mu_p0: f64,
    /// Hole Poole-Frenkel factor [(m/V)^(1/2)].
    pub gamma_p: f64,
    /// Exciton diffusion mobility `mu_1` [m^2/(V s)]; the scaled exciton
    /// diffusivity is `mu_1 / mu_0`.
    pub exciton_mobility: f64,
    /// Photogeneration rate of excitons [1/(m^3 s)].
    pub generation: f64,
    /// Zero-field exciton dissociation rate inside the interface strip [1/s].
    pub kd_interface0: f64,
    /// Exciton decay rate outside the strip [1/s].
    pub kd_outside: f64,
    /// Exciton recombination rate inside the strip [1/s].
    pub kr_interface: f64,
    /// Exciton recombination rate outside the strip [1/s].
    pub kr_outside: f64,
    /// Heterojunction step of the material potential, in units of `U_T`.
    pub delta_u: f64,
    /// Fraction of bimolecular recombination events that regenerate excitons.
    pub exciton_fraction: f64,
    /// Majority-carrier contact density relative to `N_r` (holes at `x0`,
    /// electrons at `x_end`).
    pub majority_density: f64,
    /// Minority-carrier contact density relative to `N_r`.
    pub minority_density: f64,
    /// Built-in potential drop, in units of `U_T`; relates the applied
    /// voltage to the potential difference imposed across the device.
    pub v_int: f64,
}

impl Default for PhysicalParams {
    /// Laboratory numbers that reduce to [`default_params`]: a 150 nm
    /// bilayer with a 2 nm interface strip at 50 nm, scaled by
    /// `L = 100 nm`, `N_r = 1e20 m^-3`, `mu_0 = 1e-10 m^2/(Vs)` at room
    /// temperature.
    fn default() -> Self {
        PhysicalParams {
            thermal_voltage: 0.0258,
            length_scale: 1.0e-7,
            device_length: 1.5e-7,
            interface_center: 0.5e-7,
            interface_half_width: 1.0e-9,
            pair_separation: 1.0e-9,
            density_scale: 1.0e20,
            mobility_scale: 1.0e-10,
            eps_r: 4.0,
            mu_n0: 3.0e-10,
            gamma_n: 1.551_373e-3,
            mu_p0: 1.0e-10,
            gamma_p: 3.012_183e-4,
            exciton_mobility: 1.0e-12,
            generation: 4.383_42e26,
            kd_interface0: 99_588.0,
            kd_outside: 258.0,
            kr_interface: 995.88,
            kr_outside: 996_912.0,
            delta_u: 12.0,
            exciton_fraction: 1.0,
            majority_density: 0.04,
            minority_density: 4.0e-7,
            v_int: 19.3,
        }
    }
}

/// Dimensionless parameter set consumed by the solver and the asymptotics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    /// Squared scaled Debye length `lambda^2 = eps0 U_T / (q L^2 N_r)`.
    pub lambda2: f64,
    /// Relative permittivity; `lambda_d2() = lambda2 * eps_r` is the
    /// coefficient actually multiplying the potential Laplacian.
    pub eps_r: f64,
    /// Time scale `T = L^2 / (mu_0 U_T)` [s]; kept for unscaling output.
    pub t_ref: f64,
    /// Scaled photogeneration rate of excitons, `G T / N_r`.
    pub gt: f64,
    /// Bimolecular recombination coefficient (loss term in the carrier
    /// continuity equations).
    pub c_r: f64,
    /// Share of bimolecular recombination feeding the exciton equation.
    pub c_r_prime: f64,
    /// Zero-field interfacial dissociation rate `k_d,in(0) T`.
    pub kd_in0: f64,
    /// Exciton decay rate outside the strip, `k_d,out T`.
    pub kd_out: f64,
    /// Exciton recombination rate inside the strip, `k_r,in T`.
    pub kr_in: f64,
    /// Exciton recombination rate outside the strip, `k_r,out T`.
    pub kr_out: f64,
    /// Zero-field electron mobility, units of `mu_0`.
    pub mu_n0: f64,
    /// Electron field factor against `sqrt(|E|)` with `E` in `U_T / L`.
    pub gamma_n: f64,
    /// Zero-field hole mobility, units of `mu_0`.
    pub mu_p0: f64,
    /// Hole field factor.
    pub gamma_p: f64,
    /// Exciton diffusivity `mu_1 / mu_0`.
    pub d_x: f64,
    /// Pair separation over the reference length, `h / L`; weights the
    /// exciton dipole in Poisson's equation.
    pub h_over_l: f64,
    /// Heterojunction step of the material potential.
    pub delta_u: f64,
    /// Field-normalization factor of the dissociation model,
    /// `M = a_m sqrt(|E|)`.
    pub a_m: f64,
    /// Left edge of the device.
    pub x0: f64,
    /// Left edge of the interface strip.
    pub x_l: f64,
    /// Interface centre (heterojunction midpoint).
    pub x_m: f64,
    /// Right edge of the interface strip.
    pub x_r: f64,
    /// Right edge of the device.
    pub x_end: f64,
    /// Electron density at `x0` (minority side).
    pub n_x0: f64,
    /// Electron density at `x_end` (majority side).
    pub n_xend: f64,
    /// Hole density at `x0` (majority side).
    pub p_x0: f64,
    /// Hole density at `x_end` (minority side).
    pub p_xend: f64,
    /// Built-in potential drop; `V_applied = V_diff + v_int`.
    pub v_int: f64,
}

impl ScaledParams {
    /// Coefficient of the Laplacian in Poisson's equation.
    pub fn lambda_d2(&self) -> f64 {
        self.lambda2 * self.eps_r
    }

    /// Half-width of the interface strip.
    pub fn interface_half_width(&self) -> f64 {
        0.5 * (self.x_r - self.x_l)
    }

    /// Checks the parameter set for values the model cannot accept.
    ///
    /// Returns every complaint rather than the first one, so a configuration
    /// file can be fixed in one pass.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut problems = Vec::new();
        let positive: [(&str, f64); 8] = [
            ("lambda2", self.lambda2),
            ("eps_r", self.eps_r),
            ("t_ref", self.t_ref),
            ("mu_n0", self.mu_n0),
            ("mu_p0", self.mu_p0),
            ("d_x", self.d_x),
            ("a_m", self.a_m),
            ("kr_out", self.kr_out),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                problems.push(format!("{name} must be positive, got {value}"));
            }
        }
        let nonnegative: [(&str, f64); 12] = [
            ("gt", self.gt),
            ("c_r", self.c_r),
            ("c_r_prime", self.c_r_prime),
            ("kd_in0", self.kd_in0),
            ("kd_out", self.kd_out),
            ("kr_in", self.kr_in),
            ("gamma_n", self.gamma_n),
            ("gamma_p", self.gamma_p),
            ("h_over_l", self.h_over_l),
            ("n_x0", self.n_x0),
            ("n_xend", self.n_xend),
            ("p_x0", self.p_x0),
        ];
        for (name, value) in nonnegative {
            if !(value >= 0.0) || !value.is_finite() {
                problems.push(format!("{name} must be non-negative, got {value}"));
            }
        }
        if !(self.p_xend >= 0.0) || !self.p_xend.is_finite() {
            problems.push(format!(
                "p_xend must be non-negative, got {}",
                self.p_xend
            ));
        }
        if !(self.x0 < self.x_l && self.x_l < self.x_m && self.x_m < self.x_r && self.x_r < self.x_end)
        {
            problems.push(format!(
                "geometry must satisfy x0 < x_l < x_m < x_r < x_end, got \
                 {} < {} < {} < {} < {}",
                self.x0, self.x_l, self.x_m, self.x_r, self.x_end
            ));
        } else {
            let mid = 0.5 * (self.x_l + self.x_r);
            if (self.x_m - mid).abs() > 1e-9 * (self.x_end - self.x0) {
                problems.push(format!(
                    "x_m must be the midpoint of the interface strip, got {} vs {}",
                    self.x_m, mid
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }
}

/// Failure of the physical-to-scaled reduction.
#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("physical parameter {name} must be positive, got {value}")]
    NonPositiveScale { name: &'static str, value: f64 },
    #[error("device geometry is inconsistent: {0}")]
    Geometry(String),
}

/// Reduces laboratory inputs to the dimensionless parameter set.
pub fn build_scaled_params(phys: &PhysicalParams) -> Result<ScaledParams, ScalingError> {
    let scales: [(&str, f64); 5] = [
        ("thermal_voltage", phys.thermal_voltage),
        ("length_scale", phys.length_scale),
        ("density_scale", phys.density_scale),
        ("mobility_scale", phys.mobility_scale),
        ("eps_r", phys.eps_r),
    ];
    for (name, value) in scales {
        if !(value > 0.0) || !value.is_finite() {
            return Err(ScalingError::NonPositiveScale { name, value });
        }
    }
    let l = phys.length_scale;
    let u_t = phys.thermal_voltage;
    let n_r = phys.density_scale;
    let mu0 = phys.mobility_scale;

    let lambda2 = EPS0 * u_t / (Q_E * l * l * n_r);
    let t_ref = l * l / (mu0 * u_t);
    // Scaled Poole-Frenkel factor: gamma_SI * sqrt(E_SI) with
    // E_SI = E_scaled * U_T / L.
    let field_unit = (u_t / l).sqrt();
    // Dissociation field normalization; `l^3 n_r` is the dimensionless pair
    // volume entering the escape model.
    let a_m = 1.0 / (lambda2.sqrt() * (l * l * l * n_r * std::f64::consts::PI * phys.eps_r).sqrt());

    let x_m = phys.interface_center / l;
    let d = phys.interface_half_width / l;
    let x_end = phys.device_length / l;
    if !(d > 0.0 && x_m - d > 0.0 && x_m + d < x_end) {
        return Err(ScalingError::Geometry(format!(
            "interface strip [{}, {}] must lie strictly inside (0, {})",
            x_m - d,
            x_m + d,
            x_end
        )));
    }

    let c_r = (phys.mu_n0 + phys.mu_p0) / mu0 / (lambda2 * phys.eps_r);
    let scaled = ScaledParams {
        lambda2,
        eps_r: phys.eps_r,
        t_ref,
        gt: phys.generation * t_ref / n_r,
        c_r,
        c_r_prime: phys.exciton_fraction * c_r,
        kd_in0: phys.kd_interface0 * t_ref,
        kd_out: phys.kd_outside * t_ref,
        kr_in: phys.kr_interface * t_ref,
        kr_out: phys.kr_outside * t_ref,
        mu_n0: phys.mu_n0 / mu0,
        gamma_n: phys.gamma_n * field_unit,
        mu_p0: phys.mu_p0 / mu0,
        gamma_p: phys.gamma_p * field_unit,
        d_x: phys.exciton_mobility / mu0,
        h_over_l: phys.pair_separation / l,
        delta_u: phys.delta_u,
        a_m,
        x0: 0.0,
        x_l: x_m - d,
        x_m,
        x_r: x_m + d,
        x_end,
        n_x0: phys.minority_density,
        n_xend: phys.majority_density,
        p_x0: phys.majority_density,
        p_xend: phys.minority_density,
        v_int: phys.v_int,
    };
    scaled
        .validate()
        .map_err(|problems| ScalingError::Geometry(problems.join("; ")))?;
    Ok(scaled)
}

/// The dimensionless parameter set used throughout the tests: a symmetric
/// 150 nm bilayer with a 2 nm interface strip, moderate Poole-Frenkel
/// mobilities and strongly field-assisted interfacial dissociation.
pub fn default_params() -> ScaledParams {
    ScaledParams {
        lambda2: 1.43,
        eps_r: 4.0,
        t_ref: 0.00386,
        gt: 16_990.0,
        c_r: 0.6987,
        c_r_prime: 0.6987,
        kd_in0: 386.0,
        kd_out: 1.0,
        kr_in: 3.86,
        kr_out: 3864.0,
        mu_n0: 3.0,
        gamma_n: 0.788,
        mu_p0: 1.0,
        gamma_p: 0.153,
        d_x: 0.01,
        h_over_l: 0.01,
        delta_u: 12.0,
        a_m: 0.745_979_768_5,
        x0: 0.0,
        x_l: 0.49,
        x_m: 0.5,
        x_r: 0.51,
        x_end: 1.5,
        n_x0: 4.0e-7,
        n_xend: 0.04,
        p_x0: 0.04,
        p_xend: 4.0e-7,
        v_int: 19.3,
    }
}
