use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::integrate::{
    default_record_every, norm2, poincare, run, step_count, Method, RunError, Section, SectionSpec,
    Status,
};
use crate::oracle::{jacobian_det, rk45_endpoint, RkOptions};
use crate::polyfield::{format_exponent, MultiIndex, SparsePolynomial};
use crate::splitting::{decompose_diagonal, Flow, Order, SingularPolicy, SplitError, SplitScheme};

use super::output::{write_section_csv, write_trajectory_csv};
use super::problem::{Problem, SampleRegion};
use super::{CliError, DecomposeArgs, IntegrateArgs, OrderArgs, PoincareArgs, RkArgs, VerifyArgs};

/// Tolerance of the reference solutions used for per-flow exactness errors.
const FLOW_REFERENCE_TOL: f64 = 1e-12;
/// Cap on draws per requested sample before verification gives up.
const MAX_DRAWS_PER_SAMPLE: usize = 1000;

/// A JSON report with the exit code it implies.
#[derive(Clone, Debug)]
pub struct Report {
    pub json: Value,
    pub code: i32,
}

impl Report {
    fn ok(json: Value) -> Self {
        Self { json, code: 0 }
    }

    /// Writes the report to `path`, or to `out` when no path is given.
    pub fn emit(self, path: Option<&Path>, out: &mut dyn Write) -> Result<i32, CliError> {
        let text = serde_json::to_string_pretty(&self.json).expect("reports are plain JSON");
        match path {
            Some(p) => std::fs::write(p, text + "\n")?,
            None => writeln!(out, "{text}")?,
        }
        Ok(self.code)
    }
}

fn split_input_error(problem: &Problem, e: SplitError) -> CliError {
    CliError::Input(format!("{}: {e}", problem.name))
}

fn run_error(e: RunError) -> CliError {
    match e {
        RunError::DimensionMismatch { .. } => CliError::Usage(e.to_string()),
        RunError::InvalidStep(_) | RunError::InvalidHorizon(_) => CliError::Usage(e.to_string()),
        RunError::NonFiniteState => CliError::Usage(e.to_string()),
    }
}

fn build_scheme(problem: &Problem, order: Order, substep: bool) -> Result<SplitScheme, CliError> {
    let scheme =
        SplitScheme::build(&problem.field, order).map_err(|e| split_input_error(problem, e))?;
    Ok(if substep {
        scheme.with_policy(SingularPolicy::Substep)
    } else {
        scheme
    })
}

fn rk_options(rk: &RkArgs) -> Result<RkOptions, CliError> {
    let opts = RkOptions {
        rel_tol: rk.rel_tol,
        abs_tol: rk.abs_tol,
        ..RkOptions::default()
    };
    opts.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(opts)
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn exponents_json(k: &MultiIndex) -> Value {
    Value::Array(
        k.exps()
            .iter()
            .map(|e| {
                if e.is_integer() {
                    json!(*e.numer())
                } else {
                    json!(format_exponent(e))
                }
            })
            .collect(),
    )
}

fn polynomial_json(p: &SparsePolynomial) -> Value {
    Value::Array(
        p.terms()
            .map(|(k, c)| json!({ "exp": exponents_json(k), "coef": c }))
            .collect(),
    )
}

fn status_json(status: &Status) -> Value {
    serde_json::to_value(status).expect("status serializes")
}

/// Elementary fields, shears and per-monomial divergence residuals.
pub fn cmd_decompose(args: &DecomposeArgs) -> Result<Report, CliError> {
    let problem = args.problem.resolve()?;
    let (diag, offdiag) = problem.field.diag_offdiag_split();
    let edfvfs = decompose_diagonal(&diag).map_err(|e| split_input_error(&problem, e))?;
    let scheme = build_scheme(&problem, Order::First, false)?;

    let edfvf_json: Vec<Value> = edfvfs
        .iter()
        .map(|e| {
            json!({
                "j": exponents_json(e.j()),
                "a": e.a(),
                "c": e.c(),
                "r": e.r(),
                "branch": if e.is_exponential_branch() { "exponential" } else { "power" },
                "frozen_axes": e.frozen_axes().iter().map(|k| k + 1).collect::<Vec<_>>(),
            })
        })
        .collect();
    let shear_json: Vec<Value> = scheme
        .flows()
        .iter()
        .filter_map(|f| match f {
            Flow::Shear { axis, g } => {
                Some(json!({ "axis": axis + 1, "terms": polynomial_json(g) }))
            }
            Flow::Elementary(_) => None,
        })
        .collect();
    // The off-diagonal part never contributes to the divergence, so the
    // coefficient of x^j is a . (j + 1) of the elementary field with index j.
    let residuals: Vec<Value> = edfvfs
        .iter()
        .map(|e| {
            let res: f64 = e
                .a()
                .iter()
                .zip(e.j().to_f64_vec())
                .map(|(a, j)| a * (j + 1.0))
                .sum();
            json!({ "monomial": exponents_json(e.j()), "residual": res })
        })
        .collect();
    log::info!(
        "{}: {} elementary fields, {} shears, {} off-diagonal terms",
        problem.name,
        edfvfs.len(),
        shear_json.len(),
        offdiag.components().iter().map(|c| c.len()).sum::<usize>()
    );
    Ok(Report::ok(json!({
        "problem": problem.name,
        "dim": problem.dim(),
        "edfvfs": edfvf_json,
        "shears": shear_json,
        "divergence": residuals,
    })))
}

fn open_output(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Integrates one trajectory. The CSV goes to `--output` (summary to `out`),
/// or to `out` when no file is given (summary to stderr).
pub fn cmd_integrate(args: &IntegrateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let problem = args.problem.resolve()?;
    let x0 = problem.initial_state(args.x0.as_ref().map(|p| p.0.as_slice()))?;
    let h = positive("--h", args.h.unwrap_or_else(|| problem.default_h()))?;
    let t_end = args.t_end.unwrap_or_else(|| problem.default_horizon());

    let scheme;
    let (method, every) = match args.method.order() {
        Some(order) => {
            scheme = build_scheme(&problem, order, args.substep)?;
            let every = args
                .every
                .unwrap_or_else(|| default_record_every(step_count(h, t_end)));
            (Method::Split(&scheme), every)
        }
        None => (
            Method::Rk45 {
                field: &problem.field,
                opts: rk_options(&args.rk)?,
            },
            args.every.unwrap_or(1),
        ),
    };

    log::info!(
        "integrating {} with {} h={h} T={t_end}",
        problem.name,
        args.method.name()
    );
    let start = Instant::now();
    let traj = run(&method, &x0, h, t_end, every).map_err(run_error)?;
    let wall_time = start.elapsed().as_secs_f64();

    let summary = json!({
        "problem": problem.name,
        "method": args.method.name(),
        "h": h,
        "T": t_end,
        "x0": x0,
        "final_time": traj.final_time(),
        "final_state": traj.final_state(),
        "status": status_json(traj.status()),
        "steps": traj.steps(),
        "rows": traj.len(),
        "max_norm": traj.max_norm(),
        "wall_time": wall_time,
    });
    let summary = serde_json::to_string_pretty(&summary).expect("plain JSON");
    match &args.output {
        Some(path) => {
            let mut w = open_output(path)?;
            write_trajectory_csv(&mut w, &traj, problem.dim())?;
            w.flush()?;
            writeln!(out, "{summary}")?;
        }
        None => {
            write_trajectory_csv(out, &traj, problem.dim())?;
            eprintln!("{summary}");
        }
    }
    Ok(if traj.is_completed() { 0 } else { 1 })
}

/// Section points of one or more orbits, computed in parallel.
pub fn cmd_poincare(args: &PoincareArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let problem = args.problem.resolve()?;
    let order = args
        .method
        .order()
        .ok_or_else(|| CliError::Usage("poincare requires --method split1 or split2".into()))?;
    if args.axis == 0 || args.axis > problem.dim() {
        return Err(CliError::Usage(format!(
            "--axis must be between 1 and {}, got {}",
            problem.dim(),
            args.axis
        )));
    }
    let x0s: Vec<Vec<f64>> = if args.x0.is_empty() {
        vec![problem.initial_state(None)?]
    } else {
        args.x0
            .iter()
            .map(|x| problem.initial_state(Some(&x.0)))
            .collect::<Result<_, _>>()?
    };
    let h = positive("--h", args.h.unwrap_or_else(|| problem.default_h()))?;
    let t_end = args.t_end.unwrap_or_else(|| problem.default_horizon());
    let scheme = build_scheme(&problem, order, args.substep)?;
    let sec = SectionSpec {
        axis: args.axis - 1,
        level: args.level,
        direction: args.direction,
    };

    let start = Instant::now();
    let sections: Vec<Section> = x0s
        .par_iter()
        .map(|x0| poincare(&scheme, x0, h, t_end, &sec))
        .collect::<Result<_, _>>()
        .map_err(run_error)?;
    let wall_time = start.elapsed().as_secs_f64();

    let orbits: Vec<Value> = x0s
        .iter()
        .zip(&sections)
        .map(|(x0, s)| json!({ "x0": x0, "points": s.points.len(), "status": status_json(&s.status) }))
        .collect();
    let summary = json!({
        "problem": problem.name,
        "method": args.method.name(),
        "h": h,
        "T": t_end,
        "axis": args.axis,
        "level": args.level,
        "direction": args.direction,
        "orbits": orbits,
        "wall_time": wall_time,
    });
    let summary = serde_json::to_string_pretty(&summary).expect("plain JSON");
    match &args.output {
        Some(path) => {
            let mut w = open_output(path)?;
            write_section_csv(&mut w, &sections, problem.dim(), sec.axis)?;
            w.flush()?;
            writeln!(out, "{summary}")?;
        }
        None => {
            write_section_csv(out, &sections, problem.dim(), sec.axis)?;
            eprintln!("{summary}");
        }
    }
    Ok(if sections.iter().all(|s| s.status.is_completed()) {
        0
    } else {
        1
    })
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `prod |x_i|^b_i`; flows keep coordinate signs, so this is conserved whenever `x^b` is.
fn abs_monomial(x: &[f64], b: &[f64]) -> f64 {
    x.iter()
        .zip(b)
        .map(|(xi, bi)| if *bi == 0.0 { 1.0 } else { xi.abs().powf(*bi) })
        .product()
}

/// Volume preservation, per-flow exactness and first-integral drift at seeded random points.
///
/// A point is admissible when the map under test is defined and finite at twice
/// the step, which keeps samples away from blow-up times where the
/// finite-difference Jacobian is meaningless.
pub fn cmd_verify(args: &VerifyArgs) -> Result<Report, CliError> {
    let problem = args.problem.resolve()?;
    let h = positive("--h", args.h.unwrap_or_else(|| problem.default_h()))?;
    let delta = positive("--delta", args.delta)?;
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let rk_opts = rk_options(&args.rk)?;
    let scheme = match args.method.order() {
        Some(order) => Some(build_scheme(&problem, order, false)?),
        None => SplitScheme::build(&problem.field, Order::First).ok(),
    };
    let field = &problem.field;
    let step = |x: &[f64], dt: f64| -> Result<Vec<f64>, String> {
        let y = match (args.method.order(), &scheme) {
            (Some(_), Some(s)) => s.step(x, dt).map_err(|e| e.to_string())?,
            _ => {
                let opts = RkOptions {
                    h_init: dt,
                    ..rk_opts
                };
                rk45_endpoint(|x, o| field.evaluate_into(x, o), x, dt, &opts)
                    .map_err(|e| e.to_string())?
            }
        };
        if y.iter().all(|v| v.is_finite()) {
            Ok(y)
        } else {
            Err("non-finite state".into())
        }
    };

    let region = problem.sample_region();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut points = Vec::with_capacity(args.samples);
    let mut det_devs = Vec::with_capacity(args.samples);
    let mut rejected = 0usize;
    let max_draws = args.samples * MAX_DRAWS_PER_SAMPLE;
    while points.len() < args.samples {
        if points.len() + rejected >= max_draws {
            return Err(CliError::Runtime(format!(
                "only {} of {} admissible sample points found in {max_draws} draws",
                points.len(),
                args.samples
            )));
        }
        let x = region.sample(problem.dim(), &mut rng);
        if step(&x, 2.0 * h).is_err() {
            rejected += 1;
            continue;
        }
        match jacobian_det(|y| step(y, h), &x, delta, args.stencil.into()) {
            Ok(det) if det.is_finite() => {
                det_devs.push((det - 1.0).abs());
                points.push(x);
            }
            _ => rejected += 1,
        }
    }
    let max_det_dev = det_devs.iter().copied().fold(0.0, f64::max);
    log::info!(
        "{}: max |det - 1| = {max_det_dev:e} over {} points",
        problem.name,
        points.len()
    );

    let mut flow_reports = Vec::new();
    let mut integral_reports = Vec::new();
    if let Some(scheme) = &scheme {
        let reference = RkOptions::with_tol(FLOW_REFERENCE_TOL);
        for flow in scheme.flows() {
            let (mut max_err, mut skipped) = (0.0f64, 0usize);
            for x in &points {
                let mut exact = x.clone();
                if flow.apply(&mut exact, h).is_err() {
                    skipped += 1;
                    continue;
                }
                let opts = RkOptions {
                    h_init: h,
                    ..reference
                };
                let rhs = |y: &[f64], o: &mut [f64]| -> Result<(), SplitError> {
                    o.copy_from_slice(&flow.generator(y)?);
                    Ok(())
                };
                match rk45_endpoint(rhs, x, h, &opts) {
                    Ok(r) => {
                        let scale = r.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                        max_err = max_err.max(max_abs_diff(&exact, &r) / scale);
                    }
                    Err(_) => skipped += 1,
                }
            }
            flow_reports.push(match flow {
                Flow::Elementary(e) => json!({
                    "kind": "edfvf", "j": exponents_json(e.j()), "max_error": max_err, "skipped": skipped,
                }),
                Flow::Shear { axis, .. } => json!({
                    "kind": "shear", "axis": axis + 1, "max_error": max_err, "skipped": skipped,
                }),
            });
        }

        for e in scheme.edfvfs() {
            let basis = e
                .integrals_basis()
                .map_err(|err| CliError::Runtime(err.to_string()))?;
            let mut drift = 0.0f64;
            for x in &points {
                let Ok(y) = e.flow(x, h) else { continue };
                for b in &basis {
                    let before = abs_monomial(x, b);
                    let after = abs_monomial(&y, b);
                    if before.is_finite() && after.is_finite() && before != 0.0 {
                        drift = drift.max((after - before).abs() / before.abs());
                    }
                }
            }
            integral_reports.push(json!({
                "j": exponents_json(e.j()),
                "integrals": basis.len(),
                "max_drift": drift,
            }));
        }
    }
    let fold_max =
        |v: &[Value], key: &str| v.iter().filter_map(|r| r[key].as_f64()).fold(0.0, f64::max);

    Ok(Report::ok(json!({
        "problem": problem.name,
        "method": args.method.name(),
        "h": h,
        "samples": points.len(),
        "rejected": rejected,
        "seed": args.seed,
        "delta": delta,
        "stencil": match args.stencil { super::StencilArg::Two => 2, super::StencilArg::Four => 4 },
        "region": match region {
            SampleRegion::UnitBall => json!({ "kind": "unit_ball" }),
            SampleRegion::Orthants { lo, hi, signed } => json!({ "kind": "orthants", "lo": lo, "hi": hi, "signed": signed }),
        },
        "max_det_dev": max_det_dev,
        "det_devs": det_devs,
        "max_flow_error": fold_max(&flow_reports, "max_error"),
        "flows": flow_reports,
        "max_integral_drift": fold_max(&integral_reports, "max_drift"),
        "integral_drifts": integral_reports,
    })))
}

/// Least-squares slope of `ln err` against `ln h`.
pub fn fit_slope(hs: &[f64], errors: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = hs
        .iter()
        .zip(errors)
        .filter(|(h, e)| **h > 0.0 && **e > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Endpoint errors at `h0 / 2^k` against a tight rk45 reference, with the fitted order.
pub fn cmd_order(args: &OrderArgs) -> Result<Report, CliError> {
    let problem = args.problem.resolve()?;
    let order = args
        .method
        .order()
        .ok_or_else(|| CliError::Usage("order requires --method split1 or split2".into()))?;
    let x0 = problem.initial_state(args.x0.as_ref().map(|p| p.0.as_slice()))?;
    let h0 = positive("--h", args.h.unwrap_or_else(|| problem.default_h()))?;
    let t_end = positive("--T", args.t_end)?;
    let ref_tol = positive("--ref-tol", args.ref_tol)?;
    if args.levels < 2 {
        return Err(CliError::Usage("--levels must be at least 2".into()));
    }
    let scheme = build_scheme(&problem, order, false)?;

    let field = &problem.field;
    let reference = rk45_endpoint(
        |x, o| field.evaluate_into(x, o),
        &x0,
        t_end,
        &RkOptions::with_tol(ref_tol),
    )
    .map_err(|e| CliError::Runtime(format!("reference solution failed: {e}")))?;

    let hs: Vec<f64> = (0..args.levels)
        .map(|k| h0 / f64::from(1u32 << k))
        .collect();
    let mut errors = Vec::with_capacity(hs.len());
    for &h in &hs {
        let traj = run(&Method::Split(&scheme), &x0, h, t_end, usize::MAX).map_err(run_error)?;
        if !traj.is_completed() {
            return Ok(Report {
                json: json!({
                    "problem": problem.name,
                    "method": args.method.name(),
                    "h": h,
                    "status": status_json(traj.status()),
                }),
                code: 1,
            });
        }
        let diff: Vec<f64> = traj
            .final_state()
            .iter()
            .zip(&reference)
            .map(|(a, b)| a - b)
            .collect();
        errors.push(norm2(&diff));
    }
    let slope = fit_slope(&hs, &errors);
    log::info!("{} {}: slope {slope:?}", problem.name, args.method.name());
    Ok(Report::ok(json!({
        "problem": problem.name,
        "method": args.method.name(),
        "T": t_end,
        "x0": x0,
        "reference": reference,
        "reference_tol": ref_tol,
        "hs": hs,
        "errors": errors,
        "slope": slope,
    })))
}
