//! Pipelines behind each subcommand. Each returns report results plus named artifacts.

use cylinder_core::apps::{elasticity_table, fkpp_sigma, fkpp_table};
use cylinder_core::conjugate::{Fault, Scalar};
use cylinder_core::hierarchy::{PsiTable, DEFAULT_D_MAX};
use cylinder_core::orbit::{connect, connect_fkpp, linearize_along, Orbit};
use cylinder_core::reduced::ReducedOde;
use cylinder_core::verify::{self, VerifyConfig, VerifyReport};
use cylinder_core::waterwave::WaterwaveModel;
use cylinder_core::wavefield::{Streamline, TraceOptions, WaveField};
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{Application, Format, RunConfig};
use crate::error::CliError;
use crate::report::{num, to_value};
use crate::svg::{plot, Series};

/// A file destined for the output directory.
pub struct Artifact {
    pub name: String,
    pub format: Format,
    pub contents: String,
}

impl Artifact {
    fn new(name: impl Into<String>, format: Format, contents: String) -> Self {
        Self { name: name.into(), format, contents }
    }
}

/// Results of one pipeline run.
pub struct Outcome {
    pub results: Value,
    pub artifacts: Vec<Artifact>,
    /// Failed acceptance criteria, if the run checks any.
    pub failures: Vec<u8>,
}

impl Outcome {
    fn new(results: Value, artifacts: Vec<Artifact>) -> Self {
        Self { results, artifacts, failures: Vec::new() }
    }
}

pub fn run(app: Application, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match app {
        Application::Spectrum => spectrum(cfg),
        Application::Elasticity => elasticity(cfg),
        Application::Fkpp => fkpp(cfg),
        Application::Waterwave => waterwave(cfg),
        Application::Conjugate => conjugate(cfg),
        Application::Verify => verify(cfg),
    }
}

/// Nonzero float values of the ε list; orbits need a finite scaling.
fn orbit_eps(cfg: &RunConfig, app: Application) -> Result<Vec<f64>, CliError> {
    let eps: Vec<f64> = cfg.eps(app).iter().map(Scalar::to_f64).collect();
    if eps.is_empty() {
        return Err(CliError::Config("the eps list is empty".into()));
    }
    if let Some(bad) = eps.iter().find(|e| **e == 0.0 || !e.is_finite()) {
        return Err(CliError::Config(format!("eps = {bad} cannot be used for an orbit")));
    }
    Ok(eps)
}

fn coefficient_map(table: &PsiTable) -> Value {
    Value::Object(table.entries().map(|(idx, _)| (format!("{},{},{}", idx[0], idx[1], idx[2]), num(table.coefficient(*idx)))).collect())
}

fn orbit_summary(orbit: &Orbit) -> Value {
    json!({
        "endpoint_error": num(orbit.endpoint_error),
        "from": num(orbit.from),
        "to": num(orbit.to),
        "mismatch": num(orbit.mismatch),
        "max_error_ratio": num(orbit.max_local_error),
        "v_left": num(orbit.eval(orbit.x_lo)[0]),
        "v_right": num(orbit.eval(orbit.x_hi)[0]),
        "window": [num(orbit.x_lo), num(orbit.x_hi)],
    })
}

fn phase_plots(orbit: &Orbit, samples: usize, title: &str) -> (String, String) {
    let pts = orbit.sample(samples);
    let profile = plot(title, "X", "V", &[Series::new("V(X)", pts.iter().map(|p| [p[0], p[1]]).collect())]);
    let phase = plot(title, "V", "W", &[Series::new("(V, W)", pts.iter().map(|p| [p[1], p[2]]).collect())]);
    (profile, phase)
}

fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let section = cfg.spectrum.as_ref().ok_or_else(|| CliError::Config("missing [spectrum] section".into()))?;
    if section.count == 0 {
        return Err(CliError::Config("spectrum.count must be positive".into()));
    }
    let op = section.operator(cfg.grid())?;
    let pairs = op.eigen_lowest(section.count)?;
    let mut rows = Vec::new();
    for (k, p) in pairs.iter().enumerate() {
        rows.push(json!({
            "index": k,
            "value": num(p.value),
            "discrete_value": num(p.discrete_value),
            "residual": num(p.residual),
            "rayleigh": num(op.rayleigh(&p.vector)?),
        }));
    }
    let gap = if pairs.len() > 1 { num(pairs[0].value - pairs[1].value) } else { Value::Null };
    let results = json!({
        "eigenpairs": rows,
        "eval_point": num(op.eval_point()),
        "gap": gap,
        "grid": cfg.grid(),
    });
    let g = op.grid();
    let series: Vec<Series> = pairs
        .iter()
        .enumerate()
        .map(|(k, p)| Series::new(format!("phi{k} (nu = {:.6})", p.value), g.nodes().zip(&p.vector).map(|(y, v)| [y, *v]).collect()))
        .collect();
    Ok(Outcome::new(
        results,
        vec![
            Artifact::new("eigenpairs.csv", Format::Csv, op.eigen_csv(&pairs)),
            Artifact::new("eigenfunctions.svg", Format::Svg, plot("Transversal eigenfunctions", "y", "phi", &series)),
        ],
    ))
}

fn elasticity(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.elasticity.ok_or_else(|| CliError::Config("missing [elasticity] section".into()))?;
    let table = elasticity_table(&p, cfg.grid(), DEFAULT_D_MAX)?;
    let ode = ReducedOde::elasticity(&p)?;
    let mut artifacts = Vec::new();
    let mut runs = Vec::new();
    for (i, eps) in orbit_eps(cfg, Application::Elasticity)?.into_iter().enumerate() {
        let orbit = connect(&ode, eps, cfg.window())?;
        let lin = linearize_along(&ode, eps, &orbit)?;
        let mut deviation: f64 = 0.0;
        for [x, v, _] in orbit.sample(cfg.samples()) {
            deviation = deviation.max((v - ode.truncated_profile(eps, x)?.v_scaled).abs());
        }
        runs.push(json!({
            "eps": num(eps),
            "equilibria": to_value(&ode.equilibria(eps)?),
            "profile": to_value(&ode.profile_shape(eps)?),
            "orbit": orbit_summary(&orbit),
            "truncated_deviation": num(deviation),
            "tangent_residual": num(lin.tangent_residual),
            "csv": format!("orbit_{i}.csv"),
        }));
        artifacts.push(Artifact::new(format!("orbit_{i}.csv"), Format::Csv, orbit.to_csv(&ode, eps, cfg.samples())));
        let (profile, phase) = phase_plots(&orbit, cfg.samples(), &format!("Elasticity orbit, eps = {eps}"));
        artifacts.push(Artifact::new(format!("orbit_{i}.svg"), Format::Svg, profile));
        artifacts.push(Artifact::new(format!("phase_{i}.svg"), Format::Svg, phase));
    }
    let results = json!({
        "parameters": to_value(&p),
        "closed_form": {"f102": num(p.f102()), "f300": num(p.f300())},
        "coefficients": coefficient_map(&table),
        "point_residual": num(table.point_residual()),
        "reversible": ode.is_reversible(),
        "runs": runs,
    });
    Ok(Outcome::new(results, artifacts))
}

fn fkpp(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.fkpp.ok_or_else(|| CliError::Config("missing [fkpp] section".into()))?;
    let (crit, table) = fkpp_table(&p, cfg.grid(), DEFAULT_D_MAX)?;
    let ode = ReducedOde::fkpp(&p, crit.parameter)?;
    let mut artifacts = Vec::new();
    let mut runs = Vec::new();
    for (i, eps) in orbit_eps(cfg, Application::Fkpp)?.into_iter().enumerate() {
        let (orbit, tri) = connect_fkpp(&ode, eps, cfg.window())?;
        let margin = orbit.sample(cfg.samples()).iter().map(|[_, v, w]| tri.margin(*v, *w)).fold(f64::INFINITY, f64::min);
        runs.push(json!({
            "eps": num(eps),
            "orbit": orbit_summary(&orbit),
            "triangle": to_value(&tri),
            "triangle_margin": num(margin),
            "csv": format!("front_{i}.csv"),
        }));
        artifacts.push(Artifact::new(format!("front_{i}.csv"), Format::Csv, orbit.to_csv(&ode, eps, cfg.samples())));
        let (profile, phase) = phase_plots(&orbit, cfg.samples(), &format!("Fisher-KPP front, eps = {eps}"));
        artifacts.push(Artifact::new(format!("front_{i}.svg"), Format::Svg, profile));
        artifacts.push(Artifact::new(format!("phase_{i}.svg"), Format::Svg, phase));
    }
    let sigma = fkpp_sigma(crit.parameter);
    let results = json!({
        "parameters": to_value(&p),
        "critical": to_value(&crit),
        "sigma": num(sigma),
        "saddle": num(1.0 / sigma),
        "coefficients": coefficient_map(&table),
        "point_residual": num(table.point_residual()),
        "runs": runs,
    });
    Ok(Outcome::new(results, artifacts))
}

fn model(cfg: &RunConfig) -> Result<WaterwaveModel, CliError> {
    let section = cfg.waterwave.as_ref().ok_or_else(|| CliError::Config("missing [waterwave] section".into()))?;
    Ok(WaterwaveModel::new(section.params()?, Fault::None)?)
}

fn model_summary(m: &WaterwaveModel) -> Value {
    json!({
        "parameters": to_value(&m.params),
        "c0": to_value(&m.c0),
        "admissibility": to_value(&m.admissibility),
        "series": to_value(&m.series),
        "coefficients": to_value(&m.coefficients),
    })
}

/// Downstream seed column: evenly spaced heights plus two inside the eye.
fn seeds(field: &WaveField, count: usize, x: f64) -> Vec<[f64; 2]> {
    let top = field.h + field.interface_scaled(x).eta;
    let mut ys: Vec<f64> = (0..count).map(|k| (k as f64 + 0.5) / count as f64).filter(|y| (y - top).abs() > 1e-3).collect();
    if let Ok(eye) = field.eye_bounds() {
        ys.push(eye.center - 0.5 * eye.half_width);
        ys.push(eye.center + 0.5 * eye.half_width);
    }
    ys.sort_by(f64::total_cmp);
    ys.into_iter().map(|y| [x, y]).collect()
}

fn decimate(points: &[[f64; 2]], max: usize) -> Vec<[f64; 2]> {
    let stride = points.len().div_ceil(max.max(2)).max(1);
    let mut out: Vec<[f64; 2]> = points.iter().step_by(stride).copied().collect();
    if let (Some(last), Some(kept)) = (points.last(), out.last()) {
        if last != kept {
            out.push(*last);
        }
    }
    out
}

fn streamline_summary(s: &Streamline) -> Value {
    json!({
        "seed": [num(s.seed[0]), num(s.seed[1])],
        "level": num(s.level),
        "layer": to_value(&s.layer),
        "kind": to_value(&s.kind),
        "exits": to_value(&s.exits),
        "opens_right": s.opens_right(),
        "turning_points": to_value(&s.turning_points),
        "points": s.points.len(),
    })
}

fn or_reason<T: serde::Serialize>(r: cylinder_core::Result<T>) -> Value {
    match r {
        Ok(v) => to_value(&v),
        Err(e) => json!({"absent": e.to_string()}),
    }
}

fn waterwave(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = model(cfg)?;
    let section = cfg.waterwave.clone().unwrap_or_default();
    let (count, seed_x) = (section.streamlines.unwrap_or(9), section.seed_x.unwrap_or(30.0));
    let window = cfg.window();
    let mut artifacts = Vec::new();
    let mut runs = Vec::new();
    for (i, eps) in orbit_eps(cfg, Application::Waterwave)?.into_iter().enumerate() {
        let field = WaveField::reconstruct(&m, eps)?;
        let critical = field.critical_layer(cfg.samples().min(801));
        let opts = TraceOptions { window, ..TraceOptions::default() };
        let lines: Vec<Streamline> =
            seeds(&field, count, seed_x).par_iter().map(|s| field.streamline(*s, &opts)).collect::<cylinder_core::Result<_>>()?;

        let xs: Vec<f64> = (0..cfg.samples()).map(|k| -window + 2.0 * window * k as f64 / (cfg.samples() - 1) as f64).collect();
        let mut interface_csv = String::from("X,x,eta,eta_x\n");
        let mut interface_pts = Vec::with_capacity(xs.len());
        for &x in &xs {
            let it = field.interface_scaled(x);
            interface_csv.push_str(&format!("{x:.16e},{:.16e},{:.16e},{:.16e}\n", x / field.scale(), it.eta, it.eta_x));
            interface_pts.push([x, field.h + it.eta]);
        }
        let mut stream_csv = String::from("line,kind,X,Y\n");
        let mut series = vec![Series::new("interface", interface_pts)];
        for (k, s) in lines.iter().enumerate() {
            let pts = decimate(&s.points, cfg.samples());
            for p in &pts {
                stream_csv.push_str(&format!("{k},{:?},{:.16e},{:.16e}\n", s.kind, p[0], p[1]));
            }
            series.push(Series::new(format!("streamline {k} ({:?})", s.kind), pts));
        }
        if let Ok(cl) = &critical {
            let mut csv = String::from("X,Y\n");
            for (x, y) in cl.xs.iter().zip(&cl.ys) {
                csv.push_str(&format!("{x:.16e},{y:.16e}\n"));
            }
            artifacts.push(Artifact::new(format!("critical_layer_{i}.csv"), Format::Csv, csv));
            series.push(Series::new("critical layer", cl.xs.iter().zip(&cl.ys).map(|(x, y)| [*x, *y]).collect()).dashed());
        }
        artifacts.push(Artifact::new(format!("interface_{i}.csv"), Format::Csv, interface_csv));
        artifacts.push(Artifact::new(format!("streamlines_{i}.csv"), Format::Csv, stream_csv));
        artifacts.push(Artifact::new(format!("streamlines_{i}.svg"), Format::Svg, plot(&format!("Bore streamlines, eps = {eps}"), "X", "Y", &series)));

        let mut critical_value = or_reason(critical);
        if let Value::Object(map) = &mut critical_value {
            // The sampled curve lives in the CSV.
            map.remove("xs");
            map.remove("ys");
        }
        runs.push(json!({
            "eps": num(eps),
            "state": {"h": num(field.h), "hp": num(field.hp), "c": num(field.c), "amplitude": num(field.amplitude),
                      "lambda1": num(field.lambda1), "m1": num(field.m1()), "m2": num(field.m2()), "bernoulli": num(field.bernoulli())},
            "residuals": to_value(&field.residuals(cfg.samples())),
            "flow_force_drift": num(field.flow_force_drift(201)),
            "critical_layer": critical_value,
            "eye": or_reason(field.eye_bounds()),
            "monotonicity": to_value(&field.monotonicity(cfg.samples().min(801), 9)),
            "streamlines": lines.iter().map(streamline_summary).collect::<Vec<_>>(),
        }));
    }
    let mut results = model_summary(&m);
    if let Value::Object(map) = &mut results {
        map.insert("runs".into(), Value::Array(runs));
    }
    Ok(Outcome::new(results, artifacts))
}

fn conjugate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = model(cfg)?;
    let eps = cfg.eps(Application::Conjugate);
    if eps.is_empty() {
        return Err(CliError::Config("the eps list is empty".into()));
    }
    let floats: Vec<f64> = eps.iter().map(Scalar::to_f64).collect();
    let branch = m.flows.sample_branch(&m.series, &floats)?;
    let mut exact = Vec::new();
    for e in &eps {
        let entry = match e.exact().and_then(|q| m.series.predict_exact(q)) {
            Some([h, hp, c]) => {
                let r = m.flows.residual_exact(&h, &hp, &c);
                json!({
                    "eps": e.to_string(),
                    "h": Scalar::Exact(h).to_string(),
                    "hp": Scalar::Exact(hp).to_string(),
                    "c": Scalar::Exact(c).to_string(),
                    "residual_zero": r.map(|r| r.iter().all(Zero::is_zero)),
                })
            }
            None => json!({"eps": e.to_string(), "residual_zero": Value::Null}),
        };
        exact.push(entry);
    }
    let (dhp, dc) = m.flows.fd_slopes(&m.series, 1e-4)?;
    let mut csv = String::from("eps,h,hp,c,residual,flow_force_gap,bernoulli_gap,flux_gap,series_gap\n");
    for s in &branch {
        csv.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            s.eps, s.h, s.hp, s.c, s.residual, s.flow_force_gap, s.bernoulli_gap, s.flux_gap, s.series_gap
        ));
    }
    let plot_svg = plot(
        "Conjugate branch",
        "eps",
        "value",
        &[
            Series::new("h+", branch.iter().map(|s| [s.eps, s.hp]).collect()),
            Series::new("c", branch.iter().map(|s| [s.eps, s.c]).collect()),
        ],
    );
    let mut results = model_summary(&m);
    if let Value::Object(map) = &mut results {
        let extra: Map<String, Value> = [
            ("certificate".to_string(), to_value(&m.flows.polys.certificate)),
            ("critical_froude".to_string(), or_reason(m.flows.critical_froude(&m.params.h0))),
            ("slopes".to_string(), json!({"hp1": to_value(&m.series.hp1), "c1": to_value(&m.series.c1)})),
            ("fd_slopes".to_string(), json!({"hp1": num(dhp), "c1": num(dc), "delta": num(1e-4)})),
            ("branch".to_string(), to_value(&branch)),
            ("exact_branch".to_string(), Value::Array(exact)),
        ]
        .into_iter()
        .collect();
        map.extend(extra);
    }
    Ok(Outcome::new(
        results,
        vec![Artifact::new("branch.csv", Format::Csv, csv), Artifact::new("branch.svg", Format::Svg, plot_svg)],
    ))
}

/// The acceptance matrix; failures are reported through [`Outcome::failures`].
fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let section = cfg.verify.clone().unwrap_or_default();
    let defaults = VerifyConfig::default();
    let vc = VerifyConfig {
        eps: cfg.eps(Application::Verify),
        fault: section.fault.unwrap_or(defaults.fault),
        seed: section.seed.unwrap_or(defaults.seed),
        draws: section.draws.unwrap_or(defaults.draws),
        grid: cfg.grid(),
    };
    let report: VerifyReport = verify::run(&vc)?;
    let mut outcome = Outcome::new(json!({"verify": to_value(&vc), "all_pass": report.all_pass(), "criteria": to_value(&report.criteria)}), Vec::new());
    outcome.failures = report.failures();
    Ok(outcome)
}
