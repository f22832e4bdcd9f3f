//! Command-line driver for the bilayer device model.
//!
//! Subcommands cover the full study workflow: single solves with spatial
//! profiles (`solve`), current-voltage sweeps (`sweep`, `kdconst`), scalar
//! locators (`oc`, `opp`), the numeric-versus-analytic comparison table
//! (`compare`), and the superposition study (`shunt`).  All tabular output
//! is CSV with a single header row; `--out -` streams it to stdout, in which
//! case the scalar summary moves to stderr.
//!
//! Exit codes: `0` success, `2` the numerics failed (nonconvergence, no
//! crossing or optimum in range), `3` bad invocation (flags, config file,
//! parameter values, unwritable output).

mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use opv1d::asymptotics::{
    asymptotic_iv, exciton_zeroth_with_strip_rate, first_order_field, leading_order_current,
    unipolar_solve, zeroth_field, AsymptoticsError, CarrierSide, UnipolarBoundary,
    ZerothOrderContext,
};
use opv1d::config::Config;
use opv1d::grid::{build_mesh, Mesh};
use opv1d::iv::{
    find_open_circuit, find_optimal_power, run_iv_sweep, superposition_residual, IVCurve, IVError,
};
use opv1d::scaling::ScaledParams;
use opv1d::solver::{compute_currents, solve_steady_state, SolverOptions};

#[derive(Parser)]
#[command(
    name = "opv-bench",
    version,
    about = "Steady-state bilayer organic photovoltaic simulator and analytic toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config with parameter and solver overrides.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output CSV path (`-` streams to stdout).
    #[arg(long, default_value = "-", value_name = "PATH")]
    out: String,
    /// Zero the carrier densities at both contacts.
    #[arg(long)]
    zero_bc: bool,
    /// Switch exciton generation off (dark device).
    #[arg(long)]
    no_generation: bool,
    /// Pin the strip dissociation rate to a constant value.
    #[arg(long, value_name = "RATE")]
    kd_const: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// First built-in drop of the sweep (default: short circuit).
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    /// Last built-in drop of the sweep.
    #[arg(long, default_value_t = 15.0, allow_hyphen_values = true)]
    to: f64,
    /// Bias increment.
    #[arg(long, default_value_t = 0.5)]
    step: f64,
    /// Solve the biases concurrently (cold starts) instead of walking them
    /// with warm starts, on THREADS workers (0 or no value: one per core).
    #[arg(long, value_name = "THREADS", num_args = 0..=1, default_missing_value = "0")]
    parallel: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one bias and write the spatial profile.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Built-in drop (default: config `v_diff`, else short circuit).
        #[arg(long, allow_hyphen_values = true)]
        vdiff: Option<f64>,
        /// Also write the analytic profiles to `<out>_asym.csv`.
        #[arg(long)]
        with_asymptotics: bool,
    },
    /// Sweep the built-in drop and write the annotated IV curve.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Sweep the analytic leading-order current instead of the solver.
        #[arg(long)]
        asymptotic: bool,
    },
    /// Locate the open-circuit drop by bisection.
    Oc {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 15.0, allow_hyphen_values = true)]
        hi: f64,
    },
    /// Locate the optimal-power drop.
    Opp {
        #[command(flatten)]
        common: CommonArgs,
        /// Upper end of the scan (pass the open-circuit drop when known).
        #[arg(long, default_value_t = 15.0)]
        hi: f64,
    },
    /// Numeric versus analytic profiles at one bias, as one table.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, allow_hyphen_values = true)]
        vdiff: Option<f64>,
    },
    /// Superposition study: full, photo-only and dark sweeps side by side.
    Shunt {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, default_value_t = 12.0, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    /// IV sweep with the strip dissociation rate pinned to a constant.
    Kdconst {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// The pinned rate.
        #[arg(long, default_value_t = 2763.0)]
        kd: f64,
    },
}

/// Failure with the exit code it maps to.
enum Failure {
    /// Exit 2: the model or its numerics, not the invocation.
    Numerics(String),
    /// Exit 3: flags, config, parameters, or output destination.
    Config(String),
}

type RunResult<T> = Result<T, Failure>;

fn cfg<E: std::fmt::Display>(err: E) -> Failure {
    Failure::Config(err.to_string())
}

fn num<E: std::fmt::Display>(err: E) -> Failure {
    Failure::Numerics(err.to_string())
}

fn from_iv(err: IVError) -> Failure {
    match err {
        IVError::BiasOutOfRange { .. } => cfg(err),
        other => num(other),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Numerics(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> RunResult<()> {
    match command {
        Command::Solve { common, vdiff, with_asymptotics } => {
            cmd_solve(common, vdiff, with_asymptotics)
        }
        Command::Sweep { common, sweep, asymptotic } => cmd_sweep(common, sweep, None, asymptotic),
        Command::Oc { common, lo, hi } => cmd_oc(common, lo, hi),
        Command::Opp { common, hi } => cmd_opp(common, hi),
        Command::Compare { common, vdiff } => cmd_compare(common, vdiff),
        Command::Shunt { common, from, to, step } => cmd_shunt(common, from, to, step),
        Command::Kdconst { common, sweep, kd } => cmd_sweep(common, sweep, Some(kd), false),
    }
}

/// Everything a subcommand needs, resolved from config plus flags.
struct Run {
    params: ScaledParams,
    options: SolverOptions,
    mesh: Mesh,
    /// Bias for single solves when no `--vdiff` is given.
    v_default: f64,
    /// Where the scalar summary goes: stdout, or stderr when the CSV owns
    /// stdout.
    info_to_stderr: bool,
}

impl Run {
    fn info(&self) -> Box<dyn Write> {
        if self.info_to_stderr {
            Box::new(std::io::stderr())
        } else {
            Box::new(std::io::stdout())
        }
    }
}

fn prepare(common: &CommonArgs) -> RunResult<Run> {
    let config = match &common.config {
        Some(path) => Config::load(path).map_err(cfg)?,
        None => Config::default(),
    };
    let params = config.scaled_params().map_err(cfg)?;
    let mut options = config.solver_options().map_err(cfg)?;
    if common.zero_bc {
        options.n_bc = Some((0.0, 0.0));
        options.p_bc = Some((0.0, 0.0));
    }
    if common.no_generation {
        options.generation_on = false;
    }
    if let Some(kd) = common.kd_const {
        if kd < 0.0 {
            return Err(Failure::Config(format!(
                "--kd-const must be nonnegative, got {kd}"
            )));
        }
        options.kd_const = Some(kd);
    }
    let (n_cells, grading) = config.mesh_spec();
    let mesh = build_mesh(&params, n_cells, grading).map_err(cfg)?;
    let v_default = config.v_diff.unwrap_or(-params.v_int);
    Ok(Run {
        v_default,
        info_to_stderr: common.out == "-",
        params,
        options,
        mesh,
    })
}

/// The parameter set the reduced models should see: boundary and
/// illumination overrides from the flags folded back in.
fn analytic_params(run: &Run) -> ScaledParams {
    let mut p = run.params.clone();
    if !run.options.generation_on {
        p.gt = 0.0;
    }
    if let Some((a, b)) = run.options.n_bc {
        p.n_x0 = a;
        p.n_xend = b;
    }
    if let Some((a, b)) = run.options.p_bc {
        p.p_x0 = a;
        p.p_xend = b;
    }
    p
}

fn zeroth_context(run: &Run, v: f64) -> Result<ZerothOrderContext, AsymptoticsError> {
    let p = analytic_params(run);
    match run.options.kd_const {
        Some(kd) => ZerothOrderContext::with_strip_rate(&p, v, kd),
        None => ZerothOrderContext::new(&p, v),
    }
}

/// `profile.csv` -> `profile_asym.csv`, next to the original.
fn asym_path(path: &str) -> String {
    let p = Path::new(path);
    let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = p.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    p.with_file_name(format!("{stem}_asym.{ext}"))
        .display()
        .to_string()
}

fn bias_grid(from: f64, to: f64, step: f64) -> RunResult<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Failure::Config(format!("--step must be positive, got {step}")));
    }
    if to < from {
        return Err(Failure::Config(format!(
            "--to ({to}) must not be below --from ({from})"
        )));
    }
    let mut biases = Vec::new();
    let mut k = 0usize;
    loop {
        let v = from + k as f64 * step;
        if v > to + 1e-9 {
            break;
        }
        biases.push(v.min(to));
        k += 1;
    }
    Ok(biases)
}

fn show(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.6}"),
        None => "n/a".to_string(),
    }
}

fn print_curve_stats(info: &mut dyn Write, curve: &IVCurve) -> std::io::Result<()> {
    let unconverged = curve.points.iter().filter(|pt| !pt.converged).count();
    writeln!(info, "points = {} ({} unconverged)", curve.points.len(), unconverged)?;
    writeln!(info, "j_sc = {}", show(curve.j_sc))?;
    writeln!(info, "v_oc = {}", show(curve.v_oc))?;
    writeln!(info, "v_opp = {}", show(curve.v_opp))?;
    writeln!(info, "p_max = {}", show(curve.p_max))?;
    writeln!(info, "ff = {}", show(curve.fill_factor))?;
    Ok(())
}

fn cmd_solve(common: CommonArgs, vdiff: Option<f64>, with_asymptotics: bool) -> RunResult<()> {
    if with_asymptotics && common.out == "-" {
        return Err(Failure::Config(
            "--with-asymptotics writes a second CSV, so --out must name a file".into(),
        ));
    }
    let run = prepare(&common)?;
    let v = vdiff.unwrap_or(run.v_default);
    let (state, diag) =
        solve_steady_state(&run.mesh, &run.params, v, &run.options, None).map_err(num)?;
    let currents = compute_currents(&run.mesh, &run.params, &run.options, &state);
    let mut w = output::open_out(&common.out).map_err(cfg)?;
    output::write_profile(&mut *w, &run.mesh, &state, &currents).map_err(cfg)?;
    w.flush().map_err(cfg)?;

    let mut info = run.info();
    writeln!(info, "v_diff = {v}").map_err(cfg)?;
    writeln!(
        info,
        "converged = {} after {} iterations (residual {:.3e}, {} ms)",
        diag.converged,
        diag.iterations,
        diag.final_residual,
        diag.wall_time.as_millis()
    )
    .map_err(cfg)?;
    writeln!(
        info,
        "j = {:.6} (face spread {:.3e})",
        currents.j, currents.max_rel_variation
    )
    .map_err(cfg)?;

    if with_asymptotics {
        let ctx = zeroth_context(&run, v).map_err(cfg)?;
        let ap = analytic_params(&run);
        let exciton = exciton_zeroth_with_strip_rate(&ap, ctx.kd_strip());
        let field = first_order_field(&ctx, &exciton);
        let path = asym_path(&common.out);
        let mut w2 = output::open_out(&path).map_err(cfg)?;
        output::write_asymptotics(&mut *w2, &run.mesh.nodes, &ctx, &exciton, &field)
            .map_err(cfg)?;
        w2.flush().map_err(cfg)?;
        writeln!(info, "asymptotics = {path}").map_err(cfg)?;
        writeln!(info, "j_lead = {:.6}", leading_order_current(&ctx)).map_err(cfg)?;
    }

    if !diag.converged {
        let tail: Vec<String> = diag
            .residual_history
            .iter()
            .rev()
            .take(5)
            .rev()
            .map(|r| format!("{r:.3e}"))
            .collect();
        eprintln!("residual tail: {}", tail.join(", "));
        return Err(Failure::Numerics(format!(
            "bias {v} did not converge within {} iterations (final residual {:.3e})",
            diag.iterations, diag.final_residual
        )));
    }
    Ok(())
}

fn cmd_sweep(
    common: CommonArgs,
    sweep: SweepArgs,
    kd_pin: Option<f64>,
    asymptotic: bool,
) -> RunResult<()> {
    let mut run = prepare(&common)?;
    if let Some(kd) = kd_pin {
        if kd < 0.0 {
            return Err(Failure::Config(format!("--kd must be nonnegative, got {kd}")));
        }
        run.options.kd_const = Some(kd);
    }
    let from = sweep.from.unwrap_or(-run.params.v_int);
    let biases = bias_grid(from, sweep.to, sweep.step)?;

    let curve = if asymptotic {
        let ap = analytic_params(&run);
        let result = asymptotic_iv(&ap, &biases, run.options.kd_const);
        for (v, err) in &result.skipped {
            eprintln!("skipped v_diff = {v}: {err}");
        }
        result.curve
    } else {
        let solve_all =
            |par: bool| run_iv_sweep(&run.mesh, &run.params, &run.options, &biases, par);
        match sweep.parallel {
            None => solve_all(false),
            Some(0) => solve_all(true),
            Some(threads) => rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Failure::Config(format!("cannot build thread pool: {e}")))?
                .install(|| solve_all(true)),
        }
        .map_err(from_iv)?
    };

    let mut w = output::open_out(&common.out).map_err(cfg)?;
    output::write_iv(&mut *w, &curve).map_err(cfg)?;
    w.flush().map_err(cfg)?;

    let mut info = run.info();
    if let Some(kd) = run.options.kd_const {
        writeln!(info, "kd_const = {kd}").map_err(cfg)?;
    }
    print_curve_stats(&mut *info, &curve).map_err(cfg)?;

    let unconverged: Vec<f64> = curve
        .points
        .iter()
        .filter(|pt| !pt.converged)
        .map(|pt| pt.v_diff)
        .collect();
    if !unconverged.is_empty() {
        return Err(Failure::Numerics(format!(
            "{} of {} biases did not converge: {:?}",
            unconverged.len(),
            curve.points.len(),
            unconverged
        )));
    }
    Ok(())
}

fn cmd_oc(common: CommonArgs, lo: f64, hi: f64) -> RunResult<()> {
    let run = prepare(&common)?;
    let v_oc = find_open_circuit(&run.mesh, &run.params, &run.options, lo, hi).map_err(from_iv)?;
    let mut info = run.info();
    writeln!(info, "v_oc = {v_oc:.6}").map_err(cfg)?;
    writeln!(info, "v_oc_applied = {:.6}", v_oc + run.params.v_int).map_err(cfg)?;
    Ok(())
}

fn cmd_opp(common: CommonArgs, hi: f64) -> RunResult<()> {
    let run = prepare(&common)?;
    let (v_opp, p_max) =
        find_optimal_power(&run.mesh, &run.params, &run.options, hi).map_err(from_iv)?;
    let mut info = run.info();
    writeln!(info, "v_opp = {v_opp:.6}").map_err(cfg)?;
    writeln!(info, "p_max = {p_max:.6}").map_err(cfg)?;
    Ok(())
}

fn cmd_compare(common: CommonArgs, vdiff: Option<f64>) -> RunResult<()> {
    let run = prepare(&common)?;
    let v = vdiff.unwrap_or(run.v_default);
    let (state, diag) =
        solve_steady_state(&run.mesh, &run.params, v, &run.options, None).map_err(num)?;
    if !diag.converged {
        return Err(Failure::Numerics(format!(
            "bias {v} did not converge within {} iterations; no comparison written",
            diag.iterations
        )));
    }
    let currents = compute_currents(&run.mesh, &run.params, &run.options, &state);
    let ctx = zeroth_context(&run, v).map_err(cfg)?;
    let ap = analytic_params(&run);
    let exciton = exciton_zeroth_with_strip_rate(&ap, ctx.kd_strip());
    let field = first_order_field(&ctx, &exciton);
    let e_num = state.nodal_field(&run.mesh);
    let e0 = zeroth_field(&ap, v);
    let last = run.mesh.n_nodes() - 1;

    // The layer solutions take their data from the numeric solve: density
    // and field at the contact, plus the device current.
    let warn = |side: &str, err: AsymptoticsError| {
        eprintln!("unipolar {side} layer unavailable: {err}");
    };
    let holes = match unipolar_solve(
        &ap,
        CarrierSide::Holes,
        UnipolarBoundary { x: ap.x0, density: state.p[0], field: e_num[0] },
        currents.j,
        e0,
    ) {
        Ok(sol) => Some(sol),
        Err(err) => {
            warn("hole", err);
            None
        }
    };
    let electrons = match unipolar_solve(
        &ap,
        CarrierSide::Electrons,
        UnipolarBoundary { x: ap.x_end, density: state.n[last], field: e_num[last] },
        currents.j,
        e0,
    ) {
        Ok(sol) => Some(sol),
        Err(err) => {
            warn("electron", err);
            None
        }
    };

    let mut w = output::open_out(&common.out).map_err(cfg)?;
    output::write_compare(
        &mut *w,
        &output::CompareInputs {
            mesh: &run.mesh,
            state: &state,
            ctx: &ctx,
            exciton: &exciton,
            field: &field,
            holes: holes.as_ref(),
            electrons: electrons.as_ref(),
            strip: (ap.x_l, ap.x_r),
        },
    )
    .map_err(cfg)?;
    w.flush().map_err(cfg)?;

    let mut info = run.info();
    writeln!(info, "v_diff = {v}").map_err(cfg)?;
    writeln!(info, "j_num = {:.6}", currents.j).map_err(cfg)?;
    let cur = ctx.currents();
    writeln!(info, "j0_tot = {:.6}", cur.j_tot).map_err(cfg)?;
    writeln!(info, "j0_approx = {:.6}", cur.j_approx).map_err(cfg)?;
    writeln!(info, "j_lead = {:.6}", leading_order_current(&ctx)).map_err(cfg)?;
    Ok(())
}

fn cmd_shunt(common: CommonArgs, from: Option<f64>, to: f64, step: f64) -> RunResult<()> {
    if common.zero_bc || common.no_generation {
        return Err(Failure::Config(
            "shunt builds its own photo-only and dark variants; drop --zero-bc/--no-generation"
                .into(),
        ));
    }
    let run = prepare(&common)?;
    let from = from.unwrap_or(-run.params.v_int);
    let biases = bias_grid(from, to, step)?;

    let full = run_iv_sweep(&run.mesh, &run.params, &run.options, &biases, false)
        .map_err(from_iv)?;
    let mut photo_options = run.options.clone();
    photo_options.n_bc = Some((0.0, 0.0));
    photo_options.p_bc = Some((0.0, 0.0));
    let photo = run_iv_sweep(&run.mesh, &run.params, &photo_options, &biases, false)
        .map_err(from_iv)?;
    let mut dark_options = run.options.clone();
    dark_options.generation_on = false;
    let dark = run_iv_sweep(&run.mesh, &run.params, &dark_options, &biases, false)
        .map_err(from_iv)?;

    let rows: Vec<(f64, f64, f64, f64)> = full
        .points
        .iter()
        .zip(&photo.points)
        .zip(&dark.points)
        .map(|((f, p), d)| (f.v_diff, f.j, p.j, d.j))
        .collect();
    let mut w = output::open_out(&common.out).map_err(cfg)?;
    output::write_shunt(&mut *w, &rows).map_err(cfg)?;
    w.flush().map_err(cfg)?;

    let residual = superposition_residual(&full, &photo, &dark);
    let mut info = run.info();
    writeln!(info, "j_sc_full = {}", show(full.j_sc)).map_err(cfg)?;
    match (residual, full.j_sc) {
        (Some(res), Some(j_sc)) => {
            let threshold = (0.02 * j_sc.abs()).max(1.0);
            writeln!(info, "max_residual = {res:.6}").map_err(cfg)?;
            writeln!(info, "threshold = {threshold:.6}").map_err(cfg)?;
            writeln!(info, "within_tolerance = {}", res <= threshold).map_err(cfg)?;
        }
        _ => {
            writeln!(info, "max_residual = n/a").map_err(cfg)?;
        }
    }
    Ok(())
}
