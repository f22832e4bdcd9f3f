//! CSV emission: comma-separated, `.` decimal, LF line endings, one header
//! row.  Floats print in Rust's shortest round-trip form; fields that do not
//! apply (e.g. the unipolar density outside its own layer) print as `nan`.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use opv1d::asymptotics::{
    zeroth_densities, ExcitonZeroth, FirstOrderField, UnipolarSolution, ZerothOrderContext,
};
use opv1d::grid::Mesh;
use opv1d::iv::IVCurve;
use opv1d::solver::{CurrentProfile, DeviceState};

/// Writer for `path`, with `-` meaning stdout.
pub fn open_out(path: &str) -> io::Result<Box<dyn Write>> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout())))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

/// Face currents averaged to the nodes (one-sided at the contacts), for
/// plotting alongside the nodal profiles.
pub fn node_currents(mesh: &Mesh, currents: &CurrentProfile) -> (Vec<f64>, Vec<f64>) {
    let nn = mesh.n_nodes();
    let average = |faces: &[f64]| -> Vec<f64> {
        let mut nodes = vec![0.0; nn];
        nodes[0] = faces[0];
        nodes[nn - 1] = faces[nn - 2];
        for i in 1..nn - 1 {
            nodes[i] = 0.5 * (faces[i - 1] + faces[i]);
        }
        nodes
    };
    (average(&currents.j_n), average(&currents.j_p))
}

/// Spatial profile of one converged solve: `x,n,p,X,V,E,Jn,Jp`.
pub fn write_profile(
    w: &mut dyn Write,
    mesh: &Mesh,
    state: &DeviceState,
    currents: &CurrentProfile,
) -> io::Result<()> {
    let e = state.nodal_field(mesh);
    let (j_n, j_p) = node_currents(mesh, currents);
    writeln!(w, "x,n,p,X,V,E,Jn,Jp")?;
    for i in 0..mesh.n_nodes() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt(mesh.nodes[i]),
            fmt(state.n[i]),
            fmt(state.p[i]),
            fmt(state.x[i]),
            fmt(state.v[i]),
            fmt(e[i]),
            fmt(j_n[i]),
            fmt(j_p[i]),
        )?;
    }
    Ok(())
}

/// Current-voltage curve: `V_diff,V_applied,J,P,converged,iters`.
pub fn write_iv(w: &mut dyn Write, curve: &IVCurve) -> io::Result<()> {
    writeln!(w, "V_diff,V_applied,J,P,converged,iters")?;
    for pt in &curve.points {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt(pt.v_diff),
            fmt(pt.v_applied),
            fmt(pt.j),
            fmt(pt.p),
            pt.converged,
            pt.iterations,
        )?;
    }
    Ok(())
}

/// Analytic profiles on a grid: `x,n0,p0,X0,E1`.
pub fn write_asymptotics(
    w: &mut dyn Write,
    xs: &[f64],
    ctx: &ZerothOrderContext,
    exciton: &ExcitonZeroth,
    field: &FirstOrderField,
) -> io::Result<()> {
    writeln!(w, "x,n0,p0,X0,E1")?;
    for &x in xs {
        let (n0, p0) = zeroth_densities(ctx, x);
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt(x),
            fmt(n0),
            fmt(p0),
            fmt(exciton.eval(x)),
            fmt(field.eval(x)),
        )?;
    }
    Ok(())
}

/// Everything needed to write the numeric-vs-analytic comparison table.
pub struct CompareInputs<'a> {
    pub mesh: &'a Mesh,
    pub state: &'a DeviceState,
    pub ctx: &'a ZerothOrderContext,
    pub exciton: &'a ExcitonZeroth,
    pub field: &'a FirstOrderField,
    /// Hole-layer solution, when its construction succeeded.
    pub holes: Option<&'a UnipolarSolution>,
    /// Electron-layer solution, when its construction succeeded.
    pub electrons: Option<&'a UnipolarSolution>,
    /// `(x_l, x_r)` strip edges bounding the unipolar layers.
    pub strip: (f64, f64),
}

/// Side-by-side table:
/// `x,n_num,p_num,X_num,E_num,n0,p0,X0,E1,p_unipolar,n_unipolar`.
pub fn write_compare(w: &mut dyn Write, inputs: &CompareInputs) -> io::Result<()> {
    let e_num = inputs.state.nodal_field(inputs.mesh);
    writeln!(w, "x,n_num,p_num,X_num,E_num,n0,p0,X0,E1,p_unipolar,n_unipolar")?;
    for i in 0..inputs.mesh.n_nodes() {
        let x = inputs.mesh.nodes[i];
        let (n0, p0) = zeroth_densities(inputs.ctx, x);
        let p_uni = match inputs.holes {
            Some(sol) if x <= inputs.strip.0 => sol.density(x),
            _ => f64::NAN,
        };
        let n_uni = match inputs.electrons {
            Some(sol) if x >= inputs.strip.1 => sol.density(x),
            _ => f64::NAN,
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt(x),
            fmt(inputs.state.n[i]),
            fmt(inputs.state.p[i]),
            fmt(inputs.state.x[i]),
            fmt(e_num[i]),
            fmt(n0),
            fmt(p0),
            fmt(inputs.exciton.eval(x)),
            fmt(inputs.field.eval(x)),
            fmt(p_uni),
            fmt(n_uni),
        )?;
    }
    Ok(())
}

/// Superposition study table: `V_diff,J_full,J_photo,J_dark,residual`.
pub fn write_shunt(
    w: &mut dyn Write,
    rows: &[(f64, f64, f64, f64)],
) -> io::Result<()> {
    writeln!(w, "V_diff,J_full,J_photo,J_dark,residual")?;
    for &(v, j_full, j_photo, j_dark) in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt(v),
            fmt(j_full),
            fmt(j_photo),
            fmt(j_dark),
            fmt((j_full - j_photo - j_dark).abs()),
        )?;
    }
    Ok(())
}
