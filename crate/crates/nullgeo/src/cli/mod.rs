//! Scenario-driven front end: configuration parsing, batch execution of
//! the library modules, CSV emission, run manifests and static SVG plots.

mod config;
mod plot;

pub use config::{parse_config, Scenario, ScenarioConfig, SCENARIO_NAMES};
pub use plot::line_plot;

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use crate::congruence::{
    cone_congruence, raychaudhuri_evolve, riccati_evolve, support_cone_at, write_weingarten_csv,
};
use crate::error::{Error, Result};
use crate::geodesic::{drift_tolerance, integrate_geodesic, Sigma2Source};
use crate::graphop::{
    slabs, solve_theta, theta_of_graph, GraphGrid, NewtonOptions, SlabChart, ThetaTarget,
};
use crate::linalg::Mat;
use crate::maxprin::{
    check_touching_hypotheses, coincidence_check, discrete_theta_tol, measure_weingarten,
    null_hypersurface, verify_totally_geodesic, TouchingPair,
};
use crate::ode::StepControl;
use crate::spacetime::{catalog, CURVATURE_TOL_ANALYTIC, CURVATURE_TOL_FD};

/// Map items in parallel with plain scoped threads, capped by the
/// NULLGEO_THREADS environment variable.  Order is preserved.
pub fn parallel_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let cap = std::env::var("NULLGEO_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let threads = cap.min(items.len().max(1));
    if threads <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let fr = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(fr).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

/// Everything one scenario run produces before it reaches the disk.
struct Artifacts {
    /// (file name, contents) for CSV data files.
    files: Vec<(String, Vec<u8>)>,
    /// Scalar results recorded in the manifest.
    metrics: BTreeMap<String, String>,
    /// Named pass/fail assertions; any failure makes the run exit 1.
    assertions: Vec<(String, bool)>,
    /// (file name, svg) written only when plotting is requested.
    plots: Vec<(String, String)>,
}

impl Artifacts {
    fn new() -> Self {
        Artifacts {
            files: Vec::new(),
            metrics: BTreeMap::new(),
            assertions: Vec::new(),
            plots: Vec::new(),
        }
    }
    fn metric(&mut self, key: &str, value: impl std::fmt::Display) {
        self.metrics.insert(key.to_string(), value.to_string());
    }
    fn assert(&mut self, name: &str, pass: bool) {
        self.assertions.push((name.to_string(), pass));
    }
}

pub struct RunOutcome {
    pub manifest_path: PathBuf,
    pub assertions: Vec<(String, bool)>,
    pub passed: bool,
}

/// Execute a parsed scenario: run the owning module, write data files,
/// optional plots and the run manifest into `out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path, plot: bool) -> Result<RunOutcome> {
    let started = Instant::now();
    let art = match cfg.scenario {
        Scenario::Curvature => run_curvature(cfg)?,
        Scenario::Geodesic => run_geodesic(cfg)?,
        Scenario::Congruence => run_congruence(cfg)?,
        Scenario::FocusingSweep => run_focusing_sweep(cfg)?,
        Scenario::Cone => run_cone(cfg)?,
        Scenario::GraphTheta => run_graph_theta(cfg)?,
        Scenario::Solve => run_solve(cfg)?,
        Scenario::Maxprin => run_maxprin(cfg)?,
        Scenario::SplittingVerify => run_splitting_verify(cfg)?,
    };

    std::fs::create_dir_all(out_dir)?;
    let mut checksums: BTreeMap<String, String> = BTreeMap::new();
    for (name, bytes) in &art.files {
        std::fs::write(out_dir.join(name), bytes)?;
        checksums.insert(name.clone(), sha256_hex(bytes));
    }
    if plot {
        for (name, svg) in &art.plots {
            std::fs::write(out_dir.join(name), svg.as_bytes())?;
            checksums.insert(name.clone(), sha256_hex(svg.as_bytes()));
        }
    }

    let mut m = String::new();
    m.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    m.push_str(&format!("scenario = {}\n", cfg.scenario));
    for (k, v) in &cfg.values {
        m.push_str(&format!("config.{k} = {v}\n"));
    }
    for (k, v) in &art.metrics {
        m.push_str(&format!("metric.{k} = {v}\n"));
    }
    for (name, pass) in &art.assertions {
        m.push_str(&format!("assert.{name} = {}\n", if *pass { "pass" } else { "fail" }));
    }
    for (name, sum) in &checksums {
        m.push_str(&format!("checksum.{name} = {sum}\n"));
    }
    m.push_str(&format!("wall_clock_ms = {}\n", started.elapsed().as_millis()));
    let manifest_path = out_dir.join("manifest.txt");
    std::fs::write(&manifest_path, m.as_bytes())?;

    let passed = art.assertions.iter().all(|(_, p)| *p);
    Ok(RunOutcome { manifest_path, assertions: art.assertions, passed })
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_csv_row(buf: &mut Vec<u8>, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            buf.push(b',');
        }
        let _ = write!(buf, "{v:.17e}");
    }
    buf.push(b'\n');
}

fn step_control() -> StepControl<f64> {
    StepControl::default()
}

/// Affine-parameter stations (0, span] used for trajectory output.
fn stations(span: f64, samples: usize) -> Vec<f64> {
    (1..=samples).map(|i| span * i as f64 / samples as f64).collect()
}

fn checked_point(model: &crate::spacetime::MetricModel<f64>, cfg: &ScenarioConfig, key: &str) -> Result<Vec<f64>> {
    let pt = cfg.f64_list(key)?;
    if pt.len() != model.n {
        return Err(Error::Validation(format!(
            "key `{key}` needs {} components for `{}`, got {}",
            model.n,
            model.name,
            pt.len()
        )));
    }
    Ok(pt)
}

// ---------------------------------------------------------------------
// scenario runners
// ---------------------------------------------------------------------

fn run_curvature(cfg: &ScenarioConfig) -> Result<Artifacts> {
    let model = catalog::from_spec::<f64>(cfg.str("metric"))?;
    let coords = checked_point(&model, cfg, "point")?;
    let sample = model.curvature_at(&model.point(&coords))?;
    let tol = cfg.opt_f64("tol")?.unwrap_or(if model.has_analytic_christoffel() {
        CURVATURE_TOL_ANALYTIC
    } else {
        CURVATURE_TOL_FD
    });
    let n = model.n;

    let mut art = Artifacts::new();
    let mut csv = b"mu,nu,rho,sigma,riemann_up,riemann_low\n".to_vec();
    for mu in 0..n {
        for nu in 0..n {
            for rho in 0..n {
                for sig in 0..n {
                    let _ = write!(
                        csv,
                        "{mu},{nu},{rho},{sig},{:.17e},{:.17e}\n",
                        sample.riemann.get(mu, nu, rho, sig),
                        sample.riemann_low.get(mu, nu, rho, sig)
                    );
                }
            }
        }
    }
    art.files.push(("curvature.csv".into(), csv));
    let mut ricci = b"mu,nu,ricci\n".to_vec();
    for mu in 0..n {
        for nu in 0..n {
            let _ = write!(ricci, "{mu},{nu},{:.17e}\n", sample.ricci[(mu, nu)]);
        }
    }
    art.files.push(("ricci.csv".into(), ricci));
    let violation = sample.symmetry_violation();
    art.metric("symmetry_violation", format!("{violation:.17e}"));
    art.metric("tol", format!("{tol:.17e}"));
    art.assert("riemann_symmetries", violation <= tol);
    Ok(art)
}

fn run_geodesic(cfg: &ScenarioConfig) -> Result<Artifacts> {
    let model = catalog::from_spec::<f64>(cfg.str("metric"))?;
    let coords = checked_point(&model, cfg, "point")?;
    let tangent = checked_point(&model, cfg, "tangent")?;
    let span = cfg.f64("span")?;
    let samples = cfg.usize("samples")?;
    let p = model.point(&coords);
    let v = model.tangent(&coords, &tangent);
    let traj = integrate_geodesic(
        &model,
        &p,
        &v,
        span,
        &stations(span, samples),
        &step_control(),
        false,
    )?;

    let mut art = Artifacts::new();
    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    art.files.push(("geodesic.csv".into(), csv));
    art.metric("max_null_drift", format!("{:.17e}", traj.max_null_drift));
    art.assert("null_drift", traj.max_null_drift <= drift_tolerance::<f64>());
    let pts: Vec<(f64, f64)> = traj.samples.iter().map(|s| (s.s, s.null_residual)).collect();
    art.plots.push((
        "null_residual.svg".into(),
        line_plot("null constraint drift", "s", "<K,K>", &pts),
    ));
    Ok(art)
}

fn parse_b0(cfg: &ScenarioConfig, pdim: usize) -> Result<Mat<f64>> {
    let spec = cfg.str("b0");
    if spec == "zero" {
        return Ok(Mat::zeros(pdim, pdim));
    }
    let entries = cfg.f64_list("b0")?;
    if entries.len() != pdim * pdim {
        return Err(Error::Validation(format!(
            "key `b0` needs {} entries (row-major {pdim}x{pdim}) or `zero`, got {}",
            pdim * pdim,
            entries.len()
        )));
    }
    Ok(Mat::from_fn(pdim, pdim, |i, j| entries[i * pdim + j]))
}

fn run_congruence(cfg: &ScenarioConfig) -> Result<Artifacts> {
    let model = catalog::from_spec::<f64>(cfg.str("metric"))?;
    let coords = checked_point(&model, cfg, "point")?;
    let tangent = checked_point(&model, cfg, "tangent")?;
    let span = cfg.f64("span")?;
    let samples = cfg.usize("samples")?;
    let tol = cfg.f64("tol")?;
    let b0 = parse_b0(cfg, model.n - 2)?;
    let p = model.point(&coords);
    let v = model.tangent(&coords, &tangent);
    let nodes = stations(span, samples);
    let ctrl = step_control();
    let wein = riccati_evolve(&model, &p, &v, &b0, span, &nodes, &ctrl)?;
    let ray = raychaudhuri_evolve(
        &model,
        &p,
        &v,
        b0.trace(),
        Sigma2Source::FromRiccati,
        Some(&b0),
        span,
        &nodes,
        &ctrl,
    )?;

    let mut art = Artifacts::new();
    let mut csv = Vec::new();
    write_weingarten_csv(&wein, &mut csv)?;
    art.files.push(("weingarten.csv".into(), csv));
    let mut rcsv = b"s,theta\n".to_vec();
    for s in &ray {
        write_csv_row(&mut rcsv, &[s.s, s.theta]);
    }
    art.files.push(("raychaudhuri.csv".into(), rcsv));

    let mut max_dev: f64 = 0.0;
    for (w, t) in wein.iter().zip(&ray) {
        if (w.s - t.s).abs() < 1e-9 {
            max_dev = max_dev.max((w.theta - t.theta).abs());
        }
    }
    art.metric("max_theta_deviation", format!("{max_dev:.17e}"));
    art.assert("raychaudhuri_consistency", max_dev <= tol);
    let pts: Vec<(f64, f64)> = wein.iter().map(|s| (s.s, s.theta)).collect();
    art.plots.push(("theta.svg".into(), line_plot("expansion along the generator", "s", "theta", &pts)));
    Ok(art)
}

fn run_focusing_sweep(cfg: &ScenarioConfig) -> Result<Artifacts> {
    let model = catalog::from_spec::<f64>(cfg.str("metric"))?;
    let coords = checked_point(&model, cfg, "point")?;
    let tangent = checked_point(&model, cfg, "tangent")?;
    let radii = cfg.f64_list("radii")?;
    let tol = cfg.f64("tol")?;
    let ctrl = step_control();
    let p = model.point(&coords);
    let k = model.tangent(&coords, &tangent);
    let runs = parallel_map(&radii, |&r| {
        support_cone_at(&model, &p, &k, &[r], &ctrl).map(|mut v| v.remove(0))
    });

    let mut art = Artifacts::new();
    let mut csv = b"r,theta,focusing_margin\n".to_vec();
    let mut min_margin = f64::INFINITY;
    let mut pts = Vec::new();
    for run in runs {
        let rep = run?;
        write_csv_row(&mut csv, &[rep.r, rep.theta, rep.focusing_margin]);
        min_margin = min_margin.min(rep.focusing_margin);
        pts.push((rep.r, rep.focusing_margin));
    }
    art.files.push(("focusing.csv".into(), csv));
    art.metric("min_focusing_margin", format!("{min_margin:.17e}"));
    art.assert("focusing_bound", min_margin >= -tol);
    art.plots.push((
        "focusing_margin.svg".into(),
        line_plot("focusing margin theta + (n-2)/r", "r", "margin", &pts),
    ));
    Ok(art)
}

fn run_cone(cfg: &ScenarioConfig) -> Result<Artifacts> {
    let model = catalog::from_spec::<f64>(cfg.str("metric"))?;
    let coords = checked_point(&model, cfg, "point")?;
    let tangent = checked_point(&model, cfg, "tangent")?;
    let span = cfg.f64("span")?;
    let samples = cfg.usize("samples")?;
    let p = model.point(&coords);
    let k = model.tangent(&coords, &tangent);
    let taus = stations(span, samples);
    let cone = cone_congruence(&model, &p, &k, &taus, &step_control())?;

    let mut art = Artifacts::new();
    let mut csv = b"tau,theta,det_a\n".to_vec();
    let mut pts = Vec::new();
    for s in &cone {
        write_csv_row(&mut csv, &[s.tau, s.theta, s.det_a]);
        pts.push((s.tau, s.theta));
    }
    art.files.push(("cone.csv".into(), csv));
    if let Some(c) = cfg.opt_f64("expect_theta_times_tau")? {
        let tol = cfg.f64("tol")?;
        let worst = cone
            .iter()
            .map(|s| (s.theta * s.tau - c).abs())
            .fold(0.0f64, f64::max);
        art.metric("max_theta_tau_deviation", format!("{worst:.17e}"));
        art.assert("cone_expansion_profile", worst <= tol);
    }
    art.plots.push(("cone_theta.svg".into(), line_plot("cone expansion", "tau", "theta", &pts)));
    Ok(art)
}

/// Named graph profiles used to seed grids from a config file.
fn graph_profile(
    spec: &str,
    lo: &[f64],
    hi: &[f64],
) -> Result<Box<dyn Fn(&[f64]) -> f64 + Send + Sync>> {
    let spec = spec.trim();
    let (name, args) = match spec.find('{') {
        Some(i) if spec.ends_with('}') => (&spec[..i], &spec[i + 1..spec.len() - 1]),
        Some(_) => return Err(Error::Validation(format!("malformed graph spec `{spec}`"))),
        None => (spec, ""),
    };
    let mut params: BTreeMap<String, f64> = BTreeMap::new();
    for pair in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Validation(format!("bad graph parameter `{pair}`")))?;
        let val = v
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Validation(format!("non-numeric graph parameter `{pair}`")))?;
        params.insert(k.trim().to_string(), val);
    }
    let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
    match name {
        // u = c + sum_i ai x_i
        "linear" => {
            let c = get("c", 0.0);
            let slopes: Vec<f64> = (0..lo.len()).map(|i| get(&format!("a{i}"), 0.0)).collect();
            Ok(Box::new(move |x: &[f64]| {
                c + x.iter().zip(&slopes).map(|(xi, ai)| xi * ai).sum::<f64>()
            }))
        }
        // u = t0 + sqrt(|x|^2 + z0^2): slice of a null cone in the flat slab
        "cone" => {
            let z0 = get("z0", 1.0);
            let t0 = get("t0", 0.0);
            if z0 <= 0.0 {
                return Err(Error::Validation("graph `cone` needs z0 > 0".into()));
            }
            Ok(Box::new(move |x: &[f64]| {
                t0 + (x.iter().map(|xi| xi * xi).sum::<f64>() + z0 * z0).sqrt()
            }))
        }
        // u = c + amp * prod_i (1 - xi_i^2)^2 in box-normalized coordinates
        "bump" => {
            let amp = get("amp", 0.1);
            let c = get("c", 0.0);
            let lo = lo.to_vec();
            let hi = hi.to_vec();
            Ok(Box::new(move |x: &[f64]| {
                let mut b = amp;
                for i in 0..x.len() {
                    let xi = (2.0 * x[i] - lo[i] - hi[i]) / (hi[i] - lo[i]);
                    let w = 1.0 - xi * xi;
                    b *= w * w;
                }
                c + b
            }))
        }
        // u = rho cos(x0): null-hyperplane slice of the cylinder slab
        "coscyl" => {
            let rho = get("rho", 1.0);
            Ok(Box::new(move |x: &[f64]| rho * x[0].cos()))
        }
        _ => Err(Error::Validation(format!(
            "unknown graph profile `{name}`; valid: linear, cone, bump, coscyl"
        ))),
    }
}

fn grid_from_cfg(cfg: &ScenarioConfig, slab: &SlabChart<f64>, key: &str) -> Result<GraphGrid<f64>> {
    let lo = cfg.f64_list("lo")?;
    let hi = cfg.f64_list("hi")?;
    let shape = cfg.usize_list("shape")?;
    if lo.len() != slab.d || hi.len() != slab.d || shape.len() != slab.d {
        return Err(Error::Validation(format!(
            "`lo`, `hi`, `shape` need {} entries for slab `{}`",
            slab.d, slab.name
        )));
    }
    if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
        return Err(Error::Validation("`lo` must be strictly below `hi` on every axis".into()));
    }
    let profile = graph_profile(cfg.str(key), &lo, &hi)?;
    Ok(GraphGrid::from_fn(lo, hi, shape, |x| profile(x)))
}

fn run_graph_theta(cfg: &ScenarioConfig) -> Result<Artifacts> {
    let slab = slabs::from_spec::<f64>(cfg.str("slab"))?;
    let grid = grid_from_cfg(cfg, &slab, "graph")?;
    let field = theta_of_graph(&slab, &grid)?;

    let mut art = Artifacts::new();
    let mut csv = Vec::new();
    field.write_csv(&grid, &mut csv)?;
    art.files.push(("theta.csv".into(), csv));
    let vals: Vec<f64> = field.values.iter().flatten().copied().collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    art.metric("theta_interior_max", format!("{max:.17e}"));
    art.metric("theta_interior_min", format!("{min:.17e}"));
    if let Some(expect) = cfg.opt_f64("expect_theta")? {
        let tol = cfg
            .opt_f64("theta_tol")?
            .unwrap_or_else(|| discrete_theta_tol(&grid));
        let worst = vals.iter().map(|t| (t - expect).abs()).fold(0.0f64, f64::max);
        art.metric("max_theta_deviation", format!("{worst:.17e}"));
        art.metric("theta_tol", format!("{tol:.17e}"));
        art.assert("theta_matches_expectation", worst <= tol);
    }
    Ok(art)
}

fn run_solve(cfg: &ScenarioConfig) -> Result<Artifacts> {
    let slab = slabs::from_spec::<f64>(cfg.str("slab"))?;
    let init = grid_from_cfg(cfg, &slab, "graph")?;
    let target = ThetaTarget::Constant(cfg.f64("theta")?);
    let opts = NewtonOptions {
        max_iter: cfg.usize("max_iter")?,
        residual_tol: cfg.f64("residual_tol")?,
        ..NewtonOptions::default()
    };
    let report = solve_theta(&slab, &init, &target, &opts)?;

    let mut art = Artifacts::new();
    let mut csv = Vec::new();
    report.grid.write_csv(&mut csv)?;
    art.files.push(("solution.csv".into(), csv));
    let mut rcsv = b"iteration,residual\n".to_vec();
    let mut pts = Vec::new();
    for (i, r) in report.residual_history.iter().enumerate() {
        let _ = write!(rcsv, "{i},{r:.17e}\n");
        pts.push((i as f64, r.max(1e-300).log10()));
    }
    art.files.push(("residuals.csv".into(), rcsv));
    art.metric("iterations", report.iterations);
    art.metric("residual_norm", format!("{:.17e}", report.residual_norm));
    art.assert("newton_converged", report.residual_norm <= opts.residual_tol);
    art.plots.push((
        "residuals.svg".into(),
        line_plot("Newton convergence", "iteration", "log10 residual", &pts),
    ));
    Ok(art)
}

fn run_maxprin(cfg: &ScenarioConfig) -> Result<Artifacts> {
    let slab = slabs::from_spec::<f64>(cfg.str("slab"))?;
    let lower = grid_from_cfg(cfg, &slab, "lower")?;
    let upper = grid_from_cfg(cfg, &slab, "upper")?;
    let tol = cfg
        .opt_f64("theta_tol")?
        .unwrap_or_else(|| discrete_theta_tol(&lower));
    let pair = TouchingPair { slab: &slab, lower: &lower, upper: &upper };
    let report = check_touching_hypotheses(&pair, tol)?;
    let co = coincidence_check(&lower, &upper, tol)?;

    let mut art = Artifacts::new();
    let mut csv = Vec::new();
    for a in 0..lower.d {
        let _ = write!(csv, "x{a},");
    }
    csv.extend_from_slice(b"lower,upper,gap\n");
    for idx in 0..lower.len() {
        let mut row = lower.coords(idx);
        row.push(lower.u[idx]);
        row.push(upper.u[idx]);
        row.push(upper.u[idx] - lower.u[idx]);
        write_csv_row(&mut csv, &row);
    }
    art.files.push(("maxprin.csv".into(), csv));
    art.metric("touch_gap", format!("{:.17e}", report.touch_gap));
    art.metric("theta_lower_min", format!("{:.17e}", report.theta_lower_min));
    art.metric("theta_upper_max", format!("{:.17e}", report.theta_upper_max));
    art.metric("theta_tol", format!("{tol:.17e}"));
    art.metric("hypotheses_met", report.hypotheses_met);
    art.metric(
        "violations",
        if report.violations.is_empty() {
            "none".to_string()
        } else {
            report.violations.join(" | ")
        },
    );
    art.metric("max_gap", format!("{:.17e}", co.max_gap));
    art.metric("coincide", co.coincide);
    // The rigidity statement: hypotheses can only hold for coinciding
    // graphs; a pair that meets them and still differs is a failure.
    art.assert("maximum_principle_consistent", !(report.hypotheses_met && !co.coincide));
    Ok(art)
}

fn run_splitting_verify(cfg: &ScenarioConfig) -> Result<Artifacts> {
    let surf = null_hypersurface::<f64>(cfg.str("hypersurface"))?;
    let span = cfg.f64("span")?;
    let tol = cfg.f64("tol")?;
    let report = verify_totally_geodesic(&surf, span, &step_control())?;
    let norms = parallel_map(surf.sample_points(), |coords| {
        measure_weingarten(&surf, coords).map(|b| b.max_abs())
    });

    let mut art = Artifacts::new();
    let n = surf.model.n;
    let mut csv = b"index".to_vec();
    for i in 0..n {
        let _ = write!(csv, ",x{i}");
    }
    csv.extend_from_slice(b",b_max\n");
    for (idx, (coords, norm)) in surf.sample_points().iter().zip(&norms).enumerate() {
        let norm = match norm {
            Ok(v) => *v,
            Err(e) => return Err(Error::Validation(format!("sample {idx}: {e}"))),
        };
        let _ = write!(csv, "{idx}");
        for c in coords {
            let _ = write!(csv, ",{c:.17e}");
        }
        let _ = write!(csv, ",{norm:.17e}\n");
    }
    art.files.push(("splitting.csv".into(), csv));
    art.metric("max_B_norm", format!("{:.17e}", report.max_direct));
    art.metric("max_riccati_B_norm", format!("{:.17e}", report.max_riccati));
    art.assert(
        "totally_geodesic",
        report.max_direct <= tol && report.max_riccati <= tol,
    );
    Ok(art)
}
