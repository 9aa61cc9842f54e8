//! Subcommand implementations. Each returns the text (or JSON) destined for
//! standard output and writes its files under the output directory.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use er3bp_core::center_manifold::{CMModel, KappaOrder, Mode};
use er3bp_core::dynamics::{effective_potential_w, integrate, Sampling};
use er3bp_core::geometry::CollinearFrame;
use er3bp_core::linear::linearize;
use er3bp_core::refinement::{refine_report, RefinementConfig, RefinementReport};
use er3bp_core::series::OrbitSeriesTable;
use er3bp_core::synthesis::{aic_from_series, synthesize, AnalyticOrbitSpec, AnomalyModel, Family};
use er3bp_core::{ExtendedState, Point, PulsatingState, SystemParams};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Cli, Command, FamilyArg, IntegrateArgs, LinearArgs, OrbitArgs, Resolved};
use crate::error::{io_at, CliError, CliResult};
use crate::svg::{self, Curve, Projection};
use crate::table::{self, Row, Source};

/// Runs a parsed command line. `env_tol` is the raw tolerance override from
/// the environment.
pub fn run(cli: Cli, env_tol: Option<&str>) -> CliResult<String> {
    let cfg = Resolved::from_args(&cli.global, env_tol)?;
    match cli.command {
        Command::Points => points(&cfg),
        Command::Linear(args) => linear(&cfg, &args),
        Command::Orbit(args) => orbit(&cfg, &args),
        Command::Bifurcation => bifurcation(&cfg),
        Command::Integrate(args) => integrate_cmd(&cfg, &args),
        Command::Model => Ok(pretty(&load_model(&cfg)?)),
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory JSON serialization");
    s.push('\n');
    s
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(io_at(dir))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(io_at(path))
}

fn write_rows(path: &Path, rows: &[Row]) -> CliResult<()> {
    let file = fs::File::create(path).map_err(io_at(path))?;
    table::write_rows(std::io::BufWriter::new(file), rows)
}

/// The normal form for the configured system: a model file if given,
/// otherwise the built-in Earth-Moon L1 table.
pub fn load_model(cfg: &Resolved) -> CliResult<CMModel> {
    match &cfg.model {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(io_at(path))?;
            let model: CMModel =
                serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.clone(), source })?;
            Ok(model.with_eccentricity(cfg.params.e)?)
        }
        None if cfg.point == Point::L1 && cfg.params.mu == SystemParams::EARTH_MOON_MU => {
            Ok(CMModel::earth_moon_l1(cfg.params.e)?)
        }
        None => Err(CliError::validation(
            "normal-form tables are built in for the Earth-Moon L1 point only; supply one with --model",
        )),
    }
}

#[derive(Debug, Serialize)]
struct PointRow {
    point: Point,
    gamma: f64,
    a_offset: f64,
    x: f64,
    residual: f64,
    c2: f64,
    jacobi: f64,
}

fn points(cfg: &Resolved) -> CliResult<String> {
    let mu = cfg.params.mu;
    let mut rows = Vec::new();
    for point in Point::ALL {
        let frame = CollinearFrame::new(point, mu)?;
        rows.push(PointRow {
            point,
            gamma: frame.gamma,
            a_offset: frame.a_offset,
            x: frame.synodic_x(),
            residual: frame.quintic_residual(),
            c2: frame.c_n(2)?,
            jacobi: 2.0 * effective_potential_w(frame.synodic_x(), 0.0, 0.0, mu)?,
        });
    }
    if cfg.json {
        return Ok(pretty(&json!({ "mu": mu, "points": rows })));
    }
    let mut out = format!("mu = {mu}\n{:<5}{:>22}{:>22}{:>22}{:>12}{:>22}\n", "", "gamma", "a", "X", "residual", "C");
    for r in &rows {
        out += &format!(
            "{:<5}{:>22.16}{:>22.16}{:>22.16}{:>12.1e}{:>22.16}\n",
            r.point, r.gamma, r.a_offset, r.x, r.residual, r.jacobi
        );
    }
    Ok(out)
}

fn linear(cfg: &Resolved, args: &LinearArgs) -> CliResult<String> {
    let lin = linearize(cfg.point, cfg.params.mu)?;
    let model = load_model(cfg).ok();
    let series = model.as_ref().map(|m| {
        json!({
            "e": m.e(),
            "omega_y": m.omega_eval(Mode::Y),
            "omega_z": m.omega_eval(Mode::Z),
            "delta": m.series_detuning(),
        })
    });
    let mut files = Vec::new();
    if args.sweep_e {
        let model = load_model(cfg)?;
        if args.e_steps < 2 || !(args.e_max > 0.0 && args.e_max < 1.0) {
            return Err(CliError::validation("the sweep needs --e-steps >= 2 and --e-max in (0, 1)"));
        }
        ensure_dir(&cfg.output_dir)?;
        let path = cfg.output_path("omega_sweep.csv");
        let file = fs::File::create(&path).map_err(io_at(&path))?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
        w.write_record(["e", "Omega_y", "Omega_z", "delta"])?;
        for k in 0..args.e_steps {
            let e = args.e_max * k as f64 / (args.e_steps - 1) as f64;
            let m = model.with_eccentricity(e)?;
            let (wy, wz) = (m.omega_eval(Mode::Y), m.omega_eval(Mode::Z));
            w.write_record([e, wy, wz, wy - wz].map(table::format_value))?;
        }
        w.flush().map_err(io_at(&path))?;
        files.push(path);
    }
    if cfg.json {
        return Ok(pretty(&json!({ "linear": lin, "series": series, "files": files })));
    }
    let mut out = format!(
        "{} at mu = {}\n  c2       {:.16}\n  omega_y  {:.16}\n  omega_z  {:.16}\n  lambda_x {:.16}\n  delta    {:.16}\n",
        lin.point, lin.mu, lin.c2, lin.omega_y, lin.omega_z, lin.lambda_x, lin.delta
    );
    if let Some(m) = &model {
        out += &format!(
            "series at e = {}\n  Omega_y  {:.16}\n  Omega_z  {:.16}\n  delta    {:.16}\n",
            m.e(),
            m.omega_eval(Mode::Y),
            m.omega_eval(Mode::Z),
            m.series_detuning()
        );
    }
    for f in &files {
        out += &format!("wrote {}\n", f.display());
    }
    Ok(out)
}

fn bifurcation(cfg: &Resolved) -> CliResult<String> {
    let model = load_model(cfg)?;
    let energy = model.halo_bifurcation_energy()?;
    let frame = CollinearFrame::new(model.point, model.params.mu)?;
    let synodic = frame.energy_synodic_from_local(energy.value);
    let action = model.action_from_energy(energy.value);
    let birth = model.halo_birth_action()?;
    if cfg.json {
        return Ok(pretty(&json!({
            "local": energy,
            "synodic": synodic,
            "total_action": action,
            "reduced_flow_birth_action": birth,
        })));
    }
    Ok(format!(
        "halo bifurcation at e = {e}\n  local energy    {c:.8} + {k:.8} e^2 = {v:.8}\n  synodic energy  {s:.12}\n  total action    {a:.8}\n  reduced-flow birth action {b:.8}\n",
        e = energy.e,
        c = energy.constant,
        k = energy.e2_coefficient,
        v = energy.value,
        s = synodic,
        a = action,
        b = birth,
    ))
}

fn family_name(f: FamilyArg) -> &'static str {
    match f {
        FamilyArg::Planar => "planar",
        FamilyArg::Vertical => "vertical",
        FamilyArg::Halo => "halo",
        FamilyArg::Lissajous => "lissajous",
    }
}

fn require(v: Option<f64>, flag: &str, family: &str) -> CliResult<f64> {
    v.ok_or_else(|| CliError::validation(format!("{family} orbits need {flag} (or --resonance)")))
}

fn build_spec(model: &CMModel, args: &OrbitArgs) -> CliResult<AnalyticOrbitSpec> {
    let family: Family = args.family.into();
    let order: KappaOrder = args.kappa_order.resolve(model.e());
    let name = family_name(args.family);
    let mut spec = match (args.family, args.resonance) {
        (FamilyArg::Planar | FamilyArg::Vertical, Some(r)) => {
            AnalyticOrbitSpec::resonant(model, family, r.m, r.n, order, args.max_action)?
        }
        (_, Some(_)) => return Err(CliError::validation("--resonance applies to planar and vertical orbits")),
        (FamilyArg::Planar, None) => AnalyticOrbitSpec::planar(require(args.jy, "--jy", name)?),
        (FamilyArg::Vertical, None) => AnalyticOrbitSpec::vertical(require(args.jz, "--jz", name)?),
        (FamilyArg::Lissajous, None) => {
            AnalyticOrbitSpec::lissajous(require(args.jy, "--jy", name)?, require(args.jz, "--jz", name)?)
        }
        (FamilyArg::Halo, None) => {
            let ecal = match (args.ecal, args.energy) {
                (Some(e), _) => e,
                (None, Some(energy)) => model.action_from_energy(energy),
                (None, None) => return Err(CliError::validation("halo orbits need --energy or --ecal")),
            };
            AnalyticOrbitSpec::halo(model, ecal, args.branch.into())?
        }
    };
    spec.theta_y0 = args.theta_y0;
    spec.theta_z0 = args.theta_z0;
    spec.anomaly_model = args.anomaly.into();
    spec.kappa_order = order;
    spec.samples = args.samples;
    let periods = args.periods.or(args.resonance.map(|r| r.n)).unwrap_or(1);
    spec.f_end = TAU * periods as f64;
    spec.validate()?;
    Ok(spec)
}

/// Symmetric planar start for refinement. The angle arguments use the true
/// anomaly so the velocity matches the physical one at `f = 0`.
fn refinement_start(
    spec: &AnalyticOrbitSpec,
    model: &CMModel,
    table: &OrbitSeriesTable,
    frame: &CollinearFrame,
) -> CliResult<PulsatingState> {
    let mut s = *spec;
    s.anomaly_model = AnomalyModel::True;
    let aic = aic_from_series(&s, model, table, frame, 0.0)?;
    if aic.y.abs() > 1e-12 || aic.xp.abs() > 1e-12 || aic.yp == 0.0 {
        return Err(CliError::validation(
            "refinement needs a start on the symmetric section: use --theta-y0 0 or pi",
        ));
    }
    Ok(PulsatingState::new([aic.x, 0.0, 0.0], [0.0, aic.yp, 0.0], 0.0))
}

fn orbit(cfg: &Resolved, args: &OrbitArgs) -> CliResult<String> {
    let model = load_model(cfg)?;
    let params = model.params;
    let table = OrbitSeriesTable::earth_moon_l1()?;
    let frame = CollinearFrame::new(model.point, params.mu)?;
    let spec = build_spec(&model, args)?;
    let name = family_name(args.family);

    ensure_dir(&cfg.output_dir)?;
    let samples = synthesize(&spec, &model, &table, &frame)?;
    let rows = samples.iter().map(|s| Row::from_analytic(s, &params)).collect::<CliResult<Vec<_>>>()?;
    let mut files: Vec<PathBuf> = Vec::new();
    let path = cfg.output_path(&format!("orbit_{name}.csv"));
    write_rows(&path, &rows)?;
    files.push(path);
    let analytic: Vec<[f64; 3]> = samples.iter().map(|s| s.synodic).collect();

    let mut summary = json!({
        "family": name,
        "mu": params.mu,
        "e": params.e,
        "jy": spec.jy,
        "jz": spec.jz,
        "rates": spec.rates,
        "theta_y0": spec.theta_y0,
        "theta_z0": spec.theta_z0,
    });
    if args.family == FamilyArg::Halo {
        let sol = model.halo_equilibrium(spec.jy + spec.jz, spec.branch)?;
        let threshold = model.halo_bifurcation_energy()?.value;
        summary["halo"] = json!({
            "ecal": sol.ecal,
            "r_eq": sol.r_eq,
            "omega_h": sol.omega_h,
            "branch": spec.branch,
            "energy": sol.ecal * model.omega_eval(Mode::Z),
            "threshold_energy": threshold,
        });
    }

    let mut refined_points: Vec<[f64; 3]> = Vec::new();
    let mut failure = None;
    if args.refine {
        if args.family != FamilyArg::Planar {
            return Err(CliError::validation("--refine supports planar orbits only"));
        }
        let start = refinement_start(&spec, &model, &table, &frame)?;
        let mut config = match args.resonance {
            Some(r) => RefinementConfig::resonant(r.m, r.n),
            None => RefinementConfig::default(),
        };
        config.epsilon = args.epsilon;
        config.max_iters = args.max_iters;
        config.bracket_width = args.bracket_width;
        if let Some(t) = cfg.tolerance {
            config.rel_tol = t;
            config.abs_tol = t;
        }
        let report = refine_report(&start, &config, &params)?;
        let path = cfg.output_path("refinement.json");
        write_text(&path, &pretty(&report))?;
        files.push(path);
        summary["refinement"] = refinement_summary(&report);
        if report.converged {
            let begin = ExtendedState::with_null_action(report.state(), &params)?;
            let traj = integrate(
                &begin,
                report.period,
                &params,
                &config.integrator_options(),
                &Sampling::Uniform(args.samples.max(2)),
                &[],
            )?;
            let rows = traj
                .samples
                .iter()
                .map(|s| Row::from_extended(s, &params, Some(Source::Refined)))
                .collect::<CliResult<Vec<_>>>()?;
            refined_points = traj.samples.iter().map(|s| s.state.position()).collect();
            let path = cfg.output_path(&format!("orbit_{name}_refined.csv"));
            write_rows(&path, &rows)?;
            files.push(path);
        } else {
            failure = Some(report.failure.clone().unwrap_or_else(|| "unknown".into()));
        }
    }

    for projection in Projection::ALL {
        let mut curves = vec![Curve { label: "analytic", points: &analytic }];
        if !refined_points.is_empty() {
            curves.push(Curve { label: "refined", points: &refined_points });
        }
        let path = cfg.output_path(&format!("orbit_{name}_{}.svg", projection.suffix()));
        write_text(&path, &svg::render(projection, &curves))?;
        files.push(path);
    }
    summary["files"] = json!(files);
    if let Some(reason) = failure {
        return Err(CliError::NotConverged(reason));
    }
    if cfg.json {
        return Ok(pretty(&summary));
    }
    Ok(orbit_text(&summary))
}

fn refinement_summary(r: &RefinementReport) -> Value {
    json!({
        "converged": r.converged,
        "x0": r.x0,
        "y0p": r.y0p,
        "period": r.period,
        "f_error": r.f_error,
        "g_error": r.g_error,
        "closure": r.closure,
        "iterations": r.iterations,
        "jacobi_aic": r.jacobi_aic,
        "jacobi_refined": r.jacobi_refined,
        "failure": r.failure,
    })
}

fn orbit_text(s: &Value) -> String {
    let mut out = format!(
        "{} orbit, mu = {}, e = {}\n  Jy = {}\n  Jz = {}\n",
        s["family"].as_str().unwrap_or("?"),
        s["mu"],
        s["e"],
        s["jy"],
        s["jz"]
    );
    if let Some(h) = s.get("halo") {
        out += &format!(
            "  halo: E = {}, R_eq = {}, Omega_H = {}, energy {} (threshold {})\n",
            h["ecal"], h["r_eq"], h["omega_h"], h["energy"], h["threshold_energy"]
        );
    }
    if let Some(r) = s.get("refinement") {
        out += &format!(
            "  refined: X0 = {}, Y0' = {}, F = {}, G = {}, closure = {}\n",
            r["x0"], r["y0p"], r["f_error"], r["g_error"], r["closure"]
        );
    }
    for f in s["files"].as_array().into_iter().flatten() {
        out += &format!("wrote {}\n", f.as_str().unwrap_or_default());
    }
    out
}

fn integrate_cmd(cfg: &Resolved, args: &IntegrateArgs) -> CliResult<String> {
    let params = cfg.params;
    let state = args.state.0;
    if !args.f0.is_finite() {
        return Err(CliError::validation("initial anomaly must be finite"));
    }
    let f_end = match (args.f_end, args.span) {
        (Some(f), _) => f,
        (None, Some(span)) => args.f0 + span,
        (None, None) => return Err(CliError::validation("give --f-end or --span")),
    };
    let start = ExtendedState::with_null_action(PulsatingState::from_array(state, args.f0), &params)?;
    let sampling = match args.samples {
        Some(n) if n >= 2 => Sampling::Uniform(n),
        Some(_) => return Err(CliError::validation("--samples must be at least 2")),
        None => Sampling::Steps,
    };
    let traj = integrate(&start, f_end, &params, &cfg.integrator_options(), &sampling, &[])?;
    let drift = traj.extended_hamiltonian_drift(&params)?;
    let rows = traj.samples.iter().map(|s| Row::from_extended(s, &params, None)).collect::<CliResult<Vec<_>>>()?;
    ensure_dir(&cfg.output_dir)?;
    let path = cfg.output_path("trajectory.csv");
    write_rows(&path, &rows)?;
    let last = traj.last.state.to_array();
    if cfg.json {
        return Ok(pretty(&json!({
            "f0": args.f0,
            "f_end": traj.last.state.f,
            "final_state": last,
            "hamiltonian_drift": drift,
            "steps": traj.stats.accepted,
            "rows": rows.len(),
            "file": path,
        })));
    }
    Ok(format!(
        "integrated f = {} -> {} in {} steps\n  final state {:?}\n  H+F drift {:.3e}\nwrote {}\n",
        args.f0,
        traj.last.state.f,
        traj.stats.accepted,
        last,
        drift,
        path.display()
    ))
}
