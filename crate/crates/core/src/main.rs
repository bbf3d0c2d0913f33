//! Scenario runner: binds the potential, classical-dynamics, quantum and
//! analysis modules behind named subcommands with a declarative config
//! file and deterministic file outputs.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde_json::json;

use saddlescar::analysis::{
    default_tube, density_comparison_1d, peak_and_decay_analysis, scar_rank,
    transverse_localization_energy,
};
use saddlescar::config::ScenarioConfig;
use saddlescar::critical::{find_critical_point, CriticalPoint, SaddleFrame};
use saddlescar::dynamics::{
    action_of_orbit, closed_orbit_period, coefficients_from_monodromy, integrate_monodromy,
    multi_pass_coefficients, w_zero, IntegratorOrder, MonodromyMatrix, SaddleOrbitSpec,
    TransverseCoefficients,
};
use saddlescar::potential::PotentialField;
use saddlescar::quantum::{
    propagate_splitstep, solve_grid_2d, solve_periodic_1d, GridBox, PacketSpec, PropagationGrid,
};
use saddlescar::report::{fmt_float, OutputWriter};
use saddlescar::scar::{passing_sum, scar_energy_estimate, transverse_first_node, PassingSum,
    ScarDensityModel};
use saddlescar::{Error, Result};

#[derive(Parser)]
#[command(
    name = "saddlescar",
    version,
    about = "Semiclassical scar prediction at potential saddle points, with exact quantum cross-checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario configuration file (sectioned key-value text or JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for data files and manifest.json.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Configuration override `section.key=value` (repeatable).
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Suppress per-stage summary lines.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Locate the critical point of the potential and report its frame.
    CriticalPoints,
    /// One-period monodromy of the closed orbit on the stable axis.
    Monodromy,
    /// Semiclassical prediction: transverse coefficients, passing table,
    /// scar-energy ladder.
    ScarPredict,
    /// 1D periodic eigensolve in a plane-wave basis.
    Solve1d,
    /// 2D Dirichlet-box eigensolve.
    Solve2d,
    /// Split-step wave-packet run: C(t), S(E), peak analysis.
    Wavepacket,
    /// Rank exact 2D eigenstates against the predicted scar density.
    DetectScars,
    /// Exact vs semiclassical 1D ridge-state density comparison.
    Fig1,
    /// Hessian signature of the regularized three-body Coulomb saddle.
    CoulombSaddle,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config PATH is required".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let config = ScenarioConfig::parse(&text, &cli.overrides)?;
    let mut out = OutputWriter::new(&cli.out)?;
    let quiet = cli.quiet;
    match cli.command {
        Command::CriticalPoints => cmd_critical_points(&config, &mut out, quiet)?,
        Command::Monodromy => cmd_monodromy(&config, &mut out, quiet)?,
        Command::ScarPredict => cmd_scar_predict(&config, &mut out, quiet)?,
        Command::Solve1d => cmd_solve1d(&config, &mut out, quiet)?,
        Command::Solve2d => cmd_solve2d(&config, &mut out, quiet)?,
        Command::Wavepacket => cmd_wavepacket(&config, &mut out, quiet)?,
        Command::DetectScars => cmd_detect_scars(&config, &mut out, quiet)?,
        Command::Fig1 => cmd_fig1(&config, &mut out, quiet)?,
        Command::CoulombSaddle => cmd_coulomb_saddle(&config, &mut out, quiet)?,
    }
    let manifest = out.finalize(&config.canonical_json())?;
    say(quiet, format!("manifest: {}", manifest.display()));
    Ok(())
}

fn say(quiet: bool, line: String) {
    if !quiet {
        println!("{line}");
    }
}

// ---------------------------------------------------------------------
// shared plumbing

fn build_potential(config: &ScenarioConfig) -> Result<PotentialField<f64>> {
    let p = &config.potential;
    match p.kind.as_str() {
        "cosine" => Ok(PotentialField::cosine(p.g.expect("validated"))),
        "quadratic-saddle" | "quadratic-saddle-confined" => {
            let sigmas = p.sigmas.clone().expect("validated");
            let quartic = p.quartic.clone().unwrap_or_else(|| vec![0.0; sigmas.len()]);
            if quartic.len() != sigmas.len() {
                return Err(Error::Config(format!(
                    "need {} quartic coefficients, got {}",
                    sigmas.len(),
                    quartic.len()
                )));
            }
            Ok(PotentialField::quadratic_saddle_confined(&sigmas, &quartic))
        }
        "coulomb" => PotentialField::coulomb_regularized(p.eps.expect("validated")),
        other => Err(Error::Config(format!("unknown potential kind `{other}`"))),
    }
}

/// Accept a per-axis list, or broadcast a single repeated value.
fn per_axis(values: &[f64], d: usize, what: &str) -> Result<Vec<f64>> {
    if values.len() == d {
        return Ok(values.to_vec());
    }
    if !values.is_empty() && values.iter().all(|&v| v == values[0]) {
        return Ok(vec![values[0]; d]);
    }
    Err(Error::Config(format!(
        "need {d} `{what}` entries (or one shared value), got {}",
        values.len()
    )))
}

fn locate(
    config: &ScenarioConfig,
    potential: &PotentialField<f64>,
) -> Result<(CriticalPoint<f64>, SaddleFrame<f64>)> {
    let d = potential.dimension;
    let masses = per_axis(&config.frame.masses, d, "frame.masses")?;
    let start = per_axis(&config.frame.start, d, "frame.start")?;
    let cp = find_critical_point(
        potential,
        &DVector::from_vec(start),
        config.frame.newton_tol,
    )?;
    let frame = if cp.index == d {
        SaddleFrame::transverse_at_maximum(potential, &cp, &masses, config.frame.hbar)?
    } else {
        SaddleFrame::from_critical_point(potential, &cp, &masses, config.frame.hbar)?
    };
    Ok((cp, frame))
}

fn integrator_order(config: &ScenarioConfig) -> IntegratorOrder {
    match config.dynamics.integrator.as_str() {
        "second" => IntegratorOrder::Second,
        _ => IntegratorOrder::Fourth,
    }
}

/// Closed-orbit monodromy on the first stable axis: shoot for the true
/// period, integrate the variational equations, extract (D, W, theta).
fn monodromy_pipeline(
    config: &ScenarioConfig,
    potential: &PotentialField<f64>,
    frame: &SaddleFrame<f64>,
) -> Result<(SaddleOrbitSpec<f64>, MonodromyMatrix<f64>, TransverseCoefficients<f64>)> {
    let stable = *frame
        .stable_axes()
        .first()
        .ok_or_else(|| Error::NotASaddle("no stable axis to carry a closed orbit".into()))?;
    let spec = SaddleOrbitSpec::new(frame.clone(), stable, config.dynamics.amplitude)?;
    let dt = spec.period * config.dynamics.dt_fraction;
    let period = closed_orbit_period(potential, &spec, dt, 1e-8)?;
    let spec = spec.with_period(period);
    let m = integrate_monodromy(potential, &spec, dt, integrator_order(config))?;
    let coeffs = coefficients_from_monodromy(&m)?;
    Ok((spec, m, coeffs))
}

/// Ambient coordinate axis closest to a principal frame axis.
fn ambient_axis_of(frame: &SaddleFrame<f64>, axis: usize) -> usize {
    let col = frame.axes.column(axis);
    (0..col.len())
        .max_by(|&a, &b| col[a].abs().partial_cmp(&col[b].abs()).unwrap())
        .unwrap()
}

/// Localization energy along the first unstable axis, solved on the 2D
/// box extent of the matching ambient coordinate.
fn localization_energy(
    config: &ScenarioConfig,
    potential: &PotentialField<f64>,
    frame: &SaddleFrame<f64>,
) -> Result<f64> {
    let unstable = *frame
        .unstable_axes()
        .first()
        .ok_or_else(|| Error::NotASaddle("no unstable axis".into()))?;
    let d = potential.dimension;
    let lo = per_axis(&config.solver.box_lo, d, "solver.box_lo")?;
    let hi = per_axis(&config.solver.box_hi, d, "solver.box_hi")?;
    let n = usize_per_axis(&config.solver.grid_n, d, "solver.grid_n")?;
    let a = ambient_axis_of(frame, unstable);
    transverse_localization_energy(potential, frame, unstable, lo[a], hi[a], n[a])
}

fn usize_per_axis(values: &[usize], d: usize, what: &str) -> Result<Vec<usize>> {
    if values.len() == d {
        return Ok(values.to_vec());
    }
    if !values.is_empty() && values.iter().all(|&v| v == values[0]) {
        return Ok(vec![values[0]; d]);
    }
    Err(Error::Config(format!(
        "need {d} `{what}` entries (or one shared value), got {}",
        values.len()
    )))
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn require_2d(potential: &PotentialField<f64>) -> Result<()> {
    if potential.dimension != 2 {
        return Err(Error::Config(format!(
            "this pipeline needs a two-dimensional potential, got dimension {}",
            potential.dimension
        )));
    }
    Ok(())
}

fn grid_box(config: &ScenarioConfig) -> Result<GridBox<f64>> {
    let lo = per_axis(&config.solver.box_lo, 2, "solver.box_lo")?;
    let hi = per_axis(&config.solver.box_hi, 2, "solver.box_hi")?;
    let n = usize_per_axis(&config.solver.grid_n, 2, "solver.grid_n")?;
    Ok(GridBox {
        lo: [lo[0], lo[1]],
        hi: [hi[0], hi[1]],
        n: [n[0], n[1]],
    })
}

// ---------------------------------------------------------------------
// subcommands

fn cmd_critical_points(config: &ScenarioConfig, out: &mut OutputWriter, quiet: bool) -> Result<()> {
    let potential = build_potential(config)?;
    let (cp, frame) = locate(config, &potential)?;
    out.write_json(
        "critical_point.json",
        &json!({
            "location": cp.location.as_slice(),
            "potential_value": frame.v_saddle,
            "dimension": potential.dimension,
            "morse_index": cp.index,
            "hessian_eigenvalues": cp.eigenvalues.as_slice(),
            "sigmas": frame.sigmas.as_slice(),
            "axes": matrix_rows(&frame.axes),
            "masses": frame.masses.as_slice(),
            "hbar": frame.hbar,
            "potential": &config.potential,
        }),
    )?;
    say(
        quiet,
        format!(
            "critical point: V = {}, Morse index {} of {} ({} stable / {} unstable)",
            fmt_float(frame.v_saddle),
            cp.index,
            potential.dimension,
            frame.stable_axes().len(),
            frame.unstable_axes().len()
        ),
    );
    Ok(())
}

fn cmd_monodromy(config: &ScenarioConfig, out: &mut OutputWriter, quiet: bool) -> Result<()> {
    let potential = build_potential(config)?;
    let (_, frame) = locate(config, &potential)?;
    let (spec, m, coeffs) = monodromy_pipeline(config, &potential, &frame)?;
    out.write_json(
        "monodromy.json",
        &json!({
            "stable_axis": spec.stable_axis,
            "amplitude": spec.amplitude,
            "period": spec.period,
            "m11": matrix_rows(&m.m11),
            "m12": matrix_rows(&m.m12),
            "m21": matrix_rows(&m.m21),
            "m22": matrix_rows(&m.m22),
            "symplectic_defect": m.symplectic_defect(),
            "determinant": m.determinant(),
            "d_coeff": coeffs.d_coeff,
            "w": matrix_rows(&coeffs.w),
            "theta": coeffs.theta,
            "lyapunov": coeffs.lyapunov,
        }),
    )?;
    say(
        quiet,
        format!(
            "monodromy: period {} -> theta {}, D {}, symplectic defect {}",
            fmt_float(spec.period),
            fmt_float(coeffs.theta),
            fmt_float(coeffs.d_coeff),
            fmt_float(m.symplectic_defect())
        ),
    );
    Ok(())
}

fn cmd_scar_predict(config: &ScenarioConfig, out: &mut OutputWriter, quiet: bool) -> Result<()> {
    let potential = build_potential(config)?;
    let (_, frame) = locate(config, &potential)?;
    let unstable = *frame
        .unstable_axes()
        .first()
        .ok_or_else(|| Error::NotASaddle("no unstable axis".into()))?;
    let w0 = w_zero(&frame, unstable)?;
    let e_loc = localization_energy(config, &potential, &frame)?;
    let mut payload = json!({
        "v_saddle": frame.v_saddle,
        "w_zero": w0,
        "first_node_w_zero": transverse_first_node(w0, frame.hbar)?,
        "e_loc": e_loc,
    });
    let obj = payload.as_object_mut().unwrap();

    let energies: Vec<_> = config
        .analysis
        .n_values
        .iter()
        .map(|&n| {
            scar_energy_estimate(&frame, n, e_loc).map(|e| json!({"n": n, "energy": e}))
        })
        .collect::<Result<_>>()?;
    obj.insert("energies".into(), json!(energies));

    if frame.stable_axes().is_empty() {
        say(
            quiet,
            format!(
                "prediction (pure maximum): W0 {}, E_loc {}, E {}",
                fmt_float(w0),
                fmt_float(e_loc),
                fmt_float(frame.v_saddle + e_loc)
            ),
        );
    } else {
        let (spec, _, coeffs) = monodromy_pipeline(config, &potential, &frame)?;
        let w = coeffs.w_scalar();
        let passings: Vec<_> = (1..=config.dynamics.n_pass)
            .map(|n| {
                multi_pass_coefficients(&coeffs, n).map(|(d_n, w_n)| {
                    json!({"n": n, "d": d_n, "w": w_n})
                })
            })
            .collect::<Result<_>>()?;
        let n0 = *config.analysis.n_values.first().unwrap_or(&0);
        let energy0 = scar_energy_estimate(&frame, n0, e_loc)?;
        let action = action_of_orbit(&spec, energy0)?;
        let ps = PassingSum {
            coefficients: coeffs.clone(),
            action,
            nu: config.dynamics.nu,
            hbar: frame.hbar,
            n_max: config.dynamics.n_pass,
        };
        let sum = passing_sum(&ps, 0.0)?;
        obj.insert("period".into(), json!(spec.period));
        obj.insert("theta".into(), json!(coeffs.theta));
        obj.insert("lyapunov".into(), json!(coeffs.lyapunov));
        obj.insert("d_coeff".into(), json!(coeffs.d_coeff));
        obj.insert("w".into(), json!(w));
        obj.insert("first_node_w".into(), json!(transverse_first_node(w, frame.hbar)?));
        obj.insert("passings".into(), json!(passings));
        obj.insert(
            "passing_sum_at_origin".into(),
            json!({
                "action": action,
                "nu": config.dynamics.nu,
                "n_max": config.dynamics.n_pass,
                "abs": (sum.sum.re * sum.sum.re + sum.sum.im * sum.sum.im).sqrt(),
                "last_term_magnitude": sum.last_term_magnitude,
            }),
        );
        say(
            quiet,
            format!(
                "prediction: theta {}, W {}, W0 {}, E_loc {}, ladder start {}",
                fmt_float(coeffs.theta),
                fmt_float(w),
                fmt_float(w0),
                fmt_float(e_loc),
                fmt_float(energy0)
            ),
        );
    }
    out.write_json("prediction.json", &payload)?;
    Ok(())
}

fn cmd_solve1d(config: &ScenarioConfig, out: &mut OutputWriter, quiet: bool) -> Result<()> {
    let g = match config.potential.kind.as_str() {
        "cosine" => config.potential.g.expect("validated"),
        other => {
            return Err(Error::Config(format!(
                "solve1d needs the periodic cosine potential, got `{other}`"
            )))
        }
    };
    let mass = per_axis(&config.frame.masses, 1, "frame.masses")?[0];
    let spectrum = solve_periodic_1d(
        mass,
        config.frame.hbar,
        &[(1, 2.0 * g)],
        config.solver.k_half,
        config.solver.n_levels,
    )?;
    out.write_csv(
        "levels.csv",
        &["index", "energy"],
        spectrum
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &e)| vec![i.to_string(), fmt_float(e)]),
    )?;
    let coefficients: Vec<Vec<f64>> = (0..spectrum.eigenvalues.len())
        .map(|l| spectrum.eigenvectors.column(l).iter().copied().collect())
        .collect();
    out.write_json_compact(
        "spectrum1d.json",
        &json!({
            "eigenvalues": spectrum.eigenvalues,
            "plane_wave_coefficients": coefficients,
            "k_half": spectrum.k_half,
            "mass": spectrum.mass,
            "hbar": spectrum.hbar,
            "potential": &config.potential,
        }),
    )?;
    say(
        quiet,
        format!(
            "solve1d: {} levels in [{}, {}] (K = {})",
            spectrum.eigenvalues.len(),
            fmt_float(spectrum.eigenvalues[0]),
            fmt_float(*spectrum.eigenvalues.last().unwrap()),
            spectrum.k_half
        ),
    );
    Ok(())
}

fn cmd_solve2d(config: &ScenarioConfig, out: &mut OutputWriter, quiet: bool) -> Result<()> {
    let potential = build_potential(config)?;
    require_2d(&potential)?;
    let masses = per_axis(&config.frame.masses, 2, "frame.masses")?;
    let grid = grid_box(config)?;
    let spectrum = solve_grid_2d(
        [masses[0], masses[1]],
        config.frame.hbar,
        &potential,
        grid,
        config.solver.n_levels,
    )?;
    out.write_csv(
        "levels.csv",
        &["index", "energy"],
        spectrum
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &e)| vec![i.to_string(), fmt_float(e)]),
    )?;
    // row-major interior grids, x1 fastest
    let vectors: Vec<&[f64]> = spectrum.eigenvectors.iter().map(|v| v.as_slice()).collect();
    out.write_json_compact(
        "spectrum2d.json",
        &json!({
            "eigenvalues": spectrum.eigenvalues,
            "eigenvectors": vectors,
            "grid": {
                "lo": spectrum.grid.lo,
                "hi": spectrum.grid.hi,
                "n": spectrum.grid.n,
                "spacing": spectrum.grid.spacing(),
                "layout": "row-major, x1 fastest, interior points only",
            },
            "masses": spectrum.masses,
            "hbar": spectrum.hbar,
            "potential": &config.potential,
        }),
    )?;
    say(
        quiet,
        format!(
            "solve2d: {} levels in [{}, {}] on a {}x{} grid",
            spectrum.eigenvalues.len(),
            fmt_float(spectrum.eigenvalues[0]),
            fmt_float(*spectrum.eigenvalues.last().unwrap()),
            spectrum.grid.n[0],
            spectrum.grid.n[1]
        ),
    );
    Ok(())
}

fn cmd_wavepacket(config: &ScenarioConfig, out: &mut OutputWriter, quiet: bool) -> Result<()> {
    let potential = build_potential(config)?;
    require_2d(&potential)?;
    let masses = per_axis(&config.frame.masses, 2, "frame.masses")?;
    let wp = &config.wavepacket;
    let lo = per_axis(&wp.grid_lo, 2, "wavepacket.grid_lo")?;
    let length = per_axis(&wp.grid_length, 2, "wavepacket.grid_length")?;
    let n = usize_per_axis(&wp.grid_n, 2, "wavepacket.grid_n")?;
    let center = per_axis(&wp.center, 2, "wavepacket.center")?;
    let momentum = per_axis(&wp.momentum, 2, "wavepacket.momentum")?;
    let mut width = per_axis(&wp.width, 2, "wavepacket.width")?;
    if width.iter().any(|&w| w == 0.0) {
        // zeros select the ground-state width of the stable-direction
        // oscillator, evaluated with each axis's own mass
        let (_, frame) = locate(config, &potential)?;
        let stable = *frame.stable_axes().first().ok_or_else(|| {
            Error::Config("no stable axis: packet widths must be given explicitly".into())
        })?;
        let omega1 = frame.omega(stable)?;
        for (i, w) in width.iter_mut().enumerate() {
            if *w == 0.0 {
                *w = (config.frame.hbar / (2.0 * masses[i] * omega1)).sqrt();
            }
        }
    }
    let packet = PacketSpec {
        center: center.clone(),
        momentum: momentum.clone(),
        width: width.clone(),
    };
    let grid = PropagationGrid {
        lo: [lo[0], lo[1]],
        length: [length[0], length[1]],
        n: [n[0], n[1]],
    };
    let run = propagate_splitstep(
        &potential,
        [masses[0], masses[1]],
        config.frame.hbar,
        grid,
        &packet,
        wp.dt,
        wp.steps,
    )?;
    out.write_csv(
        "autocorrelation.csv",
        &["time", "re", "im", "abs", "norm"],
        run.times.iter().enumerate().map(|(k, &t)| {
            let c = run.overlaps[k];
            vec![
                fmt_float(t),
                fmt_float(c.re),
                fmt_float(c.im),
                fmt_float((c.re * c.re + c.im * c.im).sqrt()),
                fmt_float(run.norms[k]),
            ]
        }),
    )?;
    let a = &config.analysis;
    let weights = run.spectrum(config.frame.hbar, a.e_min, a.e_max, a.n_energies, None)?;
    out.write_csv(
        "spectral_density.csv",
        &["energy", "s"],
        weights
            .energies
            .iter()
            .zip(&weights.s_values)
            .map(|(&e, &s)| vec![fmt_float(e), fmt_float(s)]),
    )?;
    let c_abs: Vec<f64> = run
        .overlaps
        .iter()
        .map(|c| (c.re * c.re + c.im * c.im).sqrt())
        .collect();
    let mut peak_rows: Vec<Vec<String>> = Vec::new();
    let mut peak_summary = String::from("no resolvable peak structure");
    match peak_and_decay_analysis(&run.times, &c_abs, &weights) {
        Ok(pa) => {
            for p in &pa.time_peaks {
                peak_rows.push(vec![
                    "time".into(),
                    fmt_float(p.position),
                    fmt_float(p.width),
                    fmt_float(p.mass),
                ]);
            }
            for p in &pa.energy_peaks {
                peak_rows.push(vec![
                    "energy".into(),
                    fmt_float(p.position),
                    fmt_float(p.width),
                    fmt_float(p.mass),
                ]);
            }
            peak_summary = format!(
                "{} time peaks (decay rate {}), {} energy peaks (mean spacing {})",
                pa.time_peaks.len(),
                fmt_float(pa.decay_rate),
                pa.energy_peaks.len(),
                fmt_float(pa.mean_energy_spacing)
            );
        }
        Err(Error::InsufficientSignal(_)) => {}
        Err(e) => return Err(e),
    }
    out.write_csv("peaks.csv", &["kind", "position", "width", "mass"], peak_rows)?;
    out.write_json(
        "wavepacket.json",
        &json!({
            "dt": run.dt,
            "steps": wp.steps,
            "max_norm_error": run.max_norm_error,
            "grid": {"lo": run.grid.lo, "length": run.grid.length, "n": run.grid.n},
            "packet": {"center": center, "momentum": momentum, "width": width},
            "masses": masses,
            "hbar": config.frame.hbar,
            "potential": &config.potential,
        }),
    )?;
    say(
        quiet,
        format!(
            "wavepacket: {} steps, max norm error {}; {}",
            wp.steps,
            fmt_float(run.max_norm_error),
            peak_summary
        ),
    );
    Ok(())
}

fn cmd_detect_scars(config: &ScenarioConfig, out: &mut OutputWriter, quiet: bool) -> Result<()> {
    let potential = build_potential(config)?;
    require_2d(&potential)?;
    let (_, frame) = locate(config, &potential)?;
    let (spec, _, coeffs) = monodromy_pipeline(config, &potential, &frame)?;
    let w = coeffs.w_scalar();
    let e_loc = localization_energy(config, &potential, &frame)?;
    let masses = per_axis(&config.frame.masses, 2, "frame.masses")?;
    let spectrum = solve_grid_2d(
        [masses[0], masses[1]],
        config.frame.hbar,
        &potential,
        grid_box(config)?,
        config.solver.n_levels,
    )?;
    let mut ladder = Vec::new();
    let mut first_scores = None;
    for &n in &config.analysis.n_values {
        let model = ScarDensityModel::new(frame.clone(), spec.stable_axis, n, w)?;
        let tube = default_tube(&model)?;
        let scores = scar_rank(&spectrum, &model, &tube)?;
        let predicted = scar_energy_estimate(&frame, n, e_loc)?;
        let top: Vec<_> = scores
            .iter()
            .take(3)
            .map(|s| json!({"state_index": s.state_index, "energy": s.energy, "score": s.score}))
            .collect();
        say(
            quiet,
            format!(
                "n = {n}: predicted E {} -> top state {} at E {} (score {})",
                fmt_float(predicted),
                scores[0].state_index,
                fmt_float(scores[0].energy),
                fmt_float(scores[0].score)
            ),
        );
        ladder.push(json!({"n": n, "predicted_energy": predicted, "top": top}));
        if first_scores.is_none() {
            first_scores = Some(scores);
        }
    }
    let first_scores = first_scores
        .ok_or_else(|| Error::Config("analysis.n_values must not be empty".into()))?;
    out.write_csv(
        "scores.csv",
        &["state_index", "energy", "score"],
        first_scores.iter().map(|s| {
            vec![
                s.state_index.to_string(),
                fmt_float(s.energy),
                fmt_float(s.score),
            ]
        }),
    )?;
    out.write_json(
        "detections.json",
        &json!({
            "theta": coeffs.theta,
            "w": w,
            "w_zero": w_zero(&frame, frame.unstable_axes()[0])?,
            "e_loc": e_loc,
            "period": spec.period,
            "ladder": ladder,
        }),
    )?;
    Ok(())
}

fn cmd_fig1(config: &ScenarioConfig, out: &mut OutputWriter, quiet: bool) -> Result<()> {
    let g = match config.potential.kind.as_str() {
        "cosine" => config.potential.g.expect("validated"),
        other => {
            return Err(Error::Config(format!(
                "fig1 needs the periodic cosine potential, got `{other}`"
            )))
        }
    };
    let potential = build_potential(config)?;
    let (_, frame) = locate(config, &potential)?;
    let w0 = w_zero(&frame, 0)?;
    let mass = frame.masses[0];
    let spectrum = solve_periodic_1d(
        mass,
        frame.hbar,
        &[(1, 2.0 * g)],
        config.solver.k_half,
        config.solver.n_levels,
    )?;
    let cmp = density_comparison_1d(
        &spectrum,
        w0,
        frame.hbar,
        config.analysis.target_energy,
        config.analysis.energy_window,
        config.solver.density_grid,
    )?;
    out.write_csv(
        "fig1.csv",
        &["x", "exact_density", "semiclassical_density"],
        cmp.rows
            .iter()
            .map(|&(x, d, m)| vec![fmt_float(x), fmt_float(d), fmt_float(m)]),
    )?;
    out.write_json(
        "comparison.json",
        &json!({
            "selected_index": cmp.selected_index,
            "selected_energy": cmp.selected_energy,
            "target_energy": config.analysis.target_energy,
            "w_zero": w0,
            "first_node": transverse_first_node(w0, frame.hbar)?,
            "max_rel_dev": cmp.max_rel_dev,
            "mean_rel_dev": cmp.mean_rel_dev,
            "rows": cmp.rows.len(),
        }),
    )?;
    say(
        quiet,
        format!(
            "fig1: selected level {} at E {} (target {}); mean deviation {} over {} rows",
            cmp.selected_index,
            fmt_float(cmp.selected_energy),
            fmt_float(config.analysis.target_energy),
            fmt_float(cmp.mean_rel_dev),
            cmp.rows.len()
        ),
    );
    Ok(())
}

fn cmd_coulomb_saddle(config: &ScenarioConfig, out: &mut OutputWriter, quiet: bool) -> Result<()> {
    if config.potential.kind != "coulomb" {
        return Err(Error::Config(format!(
            "coulomb-saddle needs the coulomb potential, got `{}`",
            config.potential.kind
        )));
    }
    let potential = build_potential(config)?;
    let (cp, frame) = locate(config, &potential)?;
    // cross-check the analytic Hessian against central differences
    let fd = potential
        .clone()
        .with_finite_differences(saddlescar::DEFAULT_FD_STEP);
    let h_fd = fd.hessian(&cp.location)?;
    let mut max_dev = 0.0f64;
    for i in 0..h_fd.nrows() {
        for j in 0..h_fd.ncols() {
            let dev = (h_fd[(i, j)] - cp.hessian[(i, j)]).abs();
            max_dev = max_dev.max(dev / (1.0 + cp.hessian[(i, j)].abs()));
        }
    }
    out.write_json(
        "saddle.json",
        &json!({
            "location": cp.location.as_slice(),
            "eps": config.potential.eps,
            "potential_value": frame.v_saddle,
            "morse_index": cp.index,
            "hessian_eigenvalues": cp.eigenvalues.as_slice(),
            "sigmas": frame.sigmas.as_slice(),
            "n_stable": frame.stable_axes().len(),
            "n_unstable": frame.unstable_axes().len(),
            "hessian_fd_max_deviation": max_dev,
        }),
    )?;
    say(
        quiet,
        format!(
            "coulomb saddle: signature {} stable / {} unstable, sigma range [{}, {}], FD deviation {}",
            frame.stable_axes().len(),
            frame.unstable_axes().len(),
            fmt_float(frame.sigmas.min()),
            fmt_float(frame.sigmas.max()),
            fmt_float(max_dev)
        ),
    );
    Ok(())
}
