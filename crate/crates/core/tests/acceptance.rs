//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed; exits non-zero
//! if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use vpsplit::cli::{cmd_order, cmd_verify, Cli, Command, Problem};
use vpsplit::integrate::problems::{self, Builtin, ProblemParams};
use vpsplit::integrate::{norm2, poincare, run, Direction, Method, SectionSpec};
use vpsplit::oracle::{rk45_endpoint, RkOptions};
use vpsplit::polyfield::MultiIndex;
use vpsplit::splitting::{real_monomial, SplitError};
use vpsplit::{Edfvf, Order, SplitScheme, VectorField};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn builtin_field(b: Builtin) -> VectorField {
    b.field(&ProblemParams::default()).unwrap()
}

fn admissible_point(b: Builtin, rng: &mut ChaCha8Rng) -> Vec<f64> {
    Problem::resolve(b.name(), &ProblemParams::default())
        .unwrap()
        .sample_region()
        .sample(b.default_x0().len(), rng)
}

fn cli_report(args: &[&str]) -> Value {
    let cli = Cli::try_parse_from(std::iter::once("vps").chain(args.iter().copied())).unwrap();
    let report = match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Order(a) => cmd_order(a),
        _ => unreachable!(),
    };
    report.unwrap().json
}

fn edfvf_reference(e: &Edfvf, x0: &[f64], h: f64, tol: f64) -> Vec<f64> {
    let rhs = |x: &[f64], out: &mut [f64]| -> Result<(), SplitError> {
        out.copy_from_slice(&e.evaluate(x)?);
        Ok(())
    };
    rk45_endpoint(rhs, x0, h, &RkOptions::with_tol(tol)).unwrap()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Blow-up time of `x_i' = a_i x_i x^j` from `x`, computed from scratch.
fn analytic_blowup(j: &[f64], a: &[f64], x: &[f64]) -> Option<f64> {
    let c: f64 = a.iter().zip(j).map(|(p, q)| p * q).sum();
    let m0: f64 = x.iter().zip(j).map(|(xi, ji)| xi.powf(*ji)).product();
    (c * m0 > 0.0).then(|| 1.0 / (c * m0))
}

fn decomposition_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = 0.0f64;
    for b in Builtin::ALL {
        let f = builtin_field(b);
        let scheme = SplitScheme::build(&f, Order::Second).unwrap();
        for _ in 0..200 {
            let x = admissible_point(b, &mut rng);
            let want = f.evaluate(&x).unwrap();
            let got = scheme.generator_sum(&x).unwrap();
            let scale = want.iter().fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
            worst = worst.max(max_abs_diff(&got, &want) / scale);
        }
    }
    let quad = SplitScheme::build(&builtin_field(Builtin::QuadStokes), Order::First).unwrap();
    let q: Vec<&Edfvf> = quad.edfvfs().collect();
    let quad_ok = q.len() == 1
        && q[0].j() == &MultiIndex::from_ints(&[0, 1, 0])
        && q[0].a() == [-8.0, 3.0, 2.0]
        && q[0].c() == 3.0
        && max_abs_diff(q[0].r().unwrap(), &[-8.0 / 3.0, 1.0, 2.0 / 3.0]) < 1e-15;
    // x1' = 3 x1^-2 x2^2 + 2 x1^3 x2^-3, x2' = 2 x1^-3 x2^3 + 3 x1^2 x2^-2
    let laurent = SplitScheme::build(&builtin_field(Builtin::Laurent), Order::First).unwrap();
    let l: Vec<&Edfvf> = laurent.edfvfs().collect();
    let laurent_ok = l.len() == 2
        && laurent.flows().len() == 2
        && l[0].j() == &MultiIndex::from_ints(&[-3, 2])
        && l[0].a() == [3.0, 2.0]
        && l[1].j() == &MultiIndex::from_ints(&[2, -3])
        && l[1].a() == [2.0, 3.0]
        && l.iter().all(|e| e.c() == -5.0);
    outcome(
        worst <= 1e-12 && quad_ok && laurent_ok,
        format!("max rel generator error {worst:.1e}; quad_stokes edfvf ok: {quad_ok}; laurent edfvfs ok: {laurent_ok}"),
    )
}

fn edfvf_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = 0.0f64;
    let mut count = 0;
    for b in Builtin::ALL {
        let f = builtin_field(b);
        let scheme = SplitScheme::build(&f, Order::First).unwrap();
        for e in scheme.edfvfs() {
            let mut cases = 0;
            while cases < 50 {
                let x = admissible_point(b, &mut rng);
                let mut h: f64 = rng.gen_range(0.001..0.1);
                if let Some(t) = e.blowup_time(&x).unwrap().filter(|t| *t > 0.0) {
                    h = h.min(0.5 * t);
                }
                let exact = e.flow(&x, h).unwrap();
                worst = worst.max(max_abs_diff(&exact, &edfvf_reference(e, &x, h, 1e-12)));
                cases += 1;
                count += 1;
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("max |flow - rk45(1e-12)| = {worst:.2e} over {count} cases"),
    )
}

fn first_integrals() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = 0.0f64;
    let mut edfvfs: Vec<Edfvf> = Builtin::ALL
        .iter()
        .flat_map(|b| {
            SplitScheme::build(&builtin_field(*b), Order::First)
                .unwrap()
                .edfvfs()
                .cloned()
                .collect::<Vec<_>>()
        })
        .collect();
    let figure = Edfvf::new(
        MultiIndex::from_ints(&[1, 1, 1]),
        vec![-5.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0],
    )
    .unwrap();
    edfvfs.push(figure.clone());
    for e in &edfvfs {
        let basis = e.integrals_basis().unwrap();
        if basis.len() != e.dim() - 1 {
            return outcome(
                false,
                format!("basis of x^{} has {} vectors", e.j(), basis.len()),
            );
        }
        for _ in 0..20 {
            let x: Vec<f64> = (0..e.dim()).map(|_| rng.gen_range(0.1..1.5)).collect();
            let mut h: f64 = rng.gen_range(0.001..0.1);
            if let Some(t) = e.blowup_time(&x).unwrap().filter(|t| *t > 0.0) {
                h = h.min(0.5 * t);
            }
            let y = e.flow(&x, h).unwrap();
            for b in &basis {
                let (before, after) = (real_monomial(&x, b), real_monomial(&y, b));
                worst = worst.max((after - before).abs() / before.abs());
            }
        }
    }
    // b2 = a x (j + 1) for the figure example
    let a = figure.a();
    let u = [2.0, 2.0, 2.0];
    let cross = [
        a[1] * u[2] - a[2] * u[1],
        a[2] * u[0] - a[0] * u[2],
        a[0] * u[1] - a[1] * u[0],
    ];
    let b2 = &figure.integrals_basis().unwrap()[1];
    let norm = cross.iter().map(|v| v * v).sum::<f64>().sqrt();
    let cos: f64 = b2.iter().zip(&cross).map(|(p, q)| p * q / norm).sum();
    let parallel = (cos.abs() - 1.0).abs() < 1e-12;
    outcome(
        worst <= 1e-10 && parallel,
        format!("max relative drift {worst:.2e}; figure b2 parallel to a x (j+1): {parallel}"),
    )
}

fn volume_preservation() -> Outcome {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for b in Builtin::ALL {
        for method in ["split1", "split2"] {
            let r = cli_report(&[
                "verify",
                "--problem",
                b.name(),
                "--method",
                method,
                "--h",
                "0.01",
                "--samples",
                "20",
                "--delta",
                "1e-5",
            ]);
            let dev = r["max_det_dev"].as_f64().unwrap();
            worst = worst.max(dev);
            parts.push(format!("{} {method} {dev:.1e}", b.name()));
        }
    }
    outcome(
        worst <= 1e-6,
        format!("max |det - 1| = {worst:.2e} ({})", parts.join(", ")),
    )
}

fn convergence_orders() -> Outcome {
    let s1 = cli_report(&[
        "order",
        "--problem",
        "quad_stokes",
        "--method",
        "split1",
        "--h",
        "0.01",
        "--T",
        "1",
    ]);
    let s2 = cli_report(&[
        "order",
        "--problem",
        "quad_stokes",
        "--method",
        "split2",
        "--h",
        "0.01",
        "--T",
        "1",
    ]);
    let p1 = s1["slope"].as_f64().unwrap_or(f64::NAN);
    let p2 = s2["slope"].as_f64().unwrap_or(f64::NAN);
    outcome(
        (p1 - 1.0).abs() <= 0.2 && (p2 - 2.0).abs() <= 0.2,
        format!("split1 slope {p1:.3}, split2 slope {p2:.3}"),
    )
}

fn quadratic_long_run() -> Outcome {
    let f = builtin_field(Builtin::QuadStokes);
    let scheme = SplitScheme::build(&f, Order::Second).unwrap();
    let x0 = [0.0, 0.0, 0.96];
    let a = run(&Method::Split(&scheme), &x0, 0.01, 500.0, usize::MAX).unwrap();
    let b = run(&Method::Split(&scheme), &x0, 0.05, 1e4, usize::MAX).unwrap();
    outcome(
        a.is_completed() && a.max_norm() <= 1.1 && b.is_completed() && b.max_norm() <= 1.1,
        format!(
            "h=0.01 T=500: {} max |x| {:.4}; h=0.05 T=1e4: {} max |x| {:.4}",
            status_word(a.is_completed()),
            a.max_norm(),
            status_word(b.is_completed()),
            b.max_norm()
        ),
    )
}

fn status_word(completed: bool) -> &'static str {
    if completed {
        "completed"
    } else {
        "aborted"
    }
}

fn baseline_contrast(long_run_passed: bool) -> Outcome {
    let f = builtin_field(Builtin::QuadStokes);
    let opts = RkOptions {
        rel_tol: 1e-3,
        ..RkOptions::default()
    };
    let traj = run(
        &Method::Rk45 { field: &f, opts },
        &[0.0, 0.0, 0.96],
        0.01,
        500.0,
        1,
    )
    .unwrap();
    let exit = traj
        .times()
        .iter()
        .zip(traj.states())
        .find(|(_, x)| norm2(x) > 1.5)
        .map(|(t, _)| *t);
    let unstable = !traj.is_completed() || exit.is_some();
    outcome(
        unstable && long_run_passed,
        format!(
            "rk45(rel 1e-3): {} at t = {:.2}, first leaves |x| <= 1.5 at t = {}; splitting run bounded: {long_run_passed}",
            status_word(traj.is_completed()),
            traj.final_time(),
            exit.map_or("never".to_string(), |t| format!("{t:.2}")),
        ),
    )
}

fn cubic_sections() -> Outcome {
    let x0 = Builtin::CubicStokes.default_x0();
    let sec = SectionSpec {
        axis: 1,
        level: 0.0,
        direction: Direction::Both,
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (w, theta) in [(1.5, 0.275 * PI), (2.5, 0.2 * PI)] {
        let f = problems::cubic_stokes(1.0, w, theta).unwrap();
        let scheme = SplitScheme::build(&f, Order::Second).unwrap();
        let s = poincare(&scheme, &x0, 0.01, 2000.0, &sec).unwrap();
        let max_r = s.points.iter().map(|p| norm2(p)).fold(0.0, f64::max);
        pass &= s.status.is_completed() && s.points.len() >= 50 && max_r < 1.0;
        parts.push(format!(
            "|w|={w}: {} points, max radius {max_r:.4}",
            s.points.len()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn laurent_problem() -> Outcome {
    let f = builtin_field(Builtin::Laurent);
    let scheme = SplitScheme::build(&f, Order::Second).unwrap();
    let x0 = Builtin::Laurent.default_x0();
    let traj = run(&Method::Split(&scheme), &x0, 0.001, 10.0, usize::MAX).unwrap();
    let reference = rk45_endpoint(
        |x, o| f.evaluate_into(x, o),
        &x0,
        10.0,
        &RkOptions::with_tol(1e-10),
    )
    .unwrap();
    let err = max_abs_diff(traj.final_state(), &reference);
    let endpoint_ok = traj.is_completed() && err <= 1e-4;

    // step bound: random elementary fields of the built-in problems at random points
    let edfvfs: Vec<Edfvf> = Builtin::ALL
        .iter()
        .flat_map(|b| {
            SplitScheme::build(&builtin_field(*b), Order::First)
                .unwrap()
                .edfvfs()
                .cloned()
                .collect::<Vec<_>>()
        })
        .filter(|e| !e.is_exponential_branch())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (mut cases, mut mismatches) = (0, 0);
    while cases < 100 {
        let e = &edfvfs[rng.gen_range(0..edfvfs.len())];
        let x: Vec<f64> = (0..e.dim()).map(|_| rng.gen_range(0.1..1.5)).collect();
        let Some(t_star) = analytic_blowup(&e.j().to_f64_vec(), e.a(), &x) else {
            continue;
        };
        let u = if cases % 2 == 0 {
            rng.gen_range(0.5..0.999)
        } else {
            rng.gen_range(1.001..2.0)
        };
        let raised = matches!(e.flow(&x, u * t_star), Err(SplitError::SingularStep { .. }));
        if raised != (u >= 1.0) {
            mismatches += 1;
        }
        cases += 1;
    }
    outcome(
        endpoint_ok && mismatches == 0,
        format!(
            "endpoint {} |x - rk45(1e-10)| = {err:.2e}; step bound mismatches {mismatches}/{cases}",
            status_word(traj.is_completed())
        ),
    )
}

fn timing_report() -> String {
    let f = builtin_field(Builtin::QuadStokes);
    let scheme = SplitScheme::build(&f, Order::Second).unwrap();
    let x0 = [0.0, 0.0, 0.96];
    let start = Instant::now();
    run(&Method::Split(&scheme), &x0, 0.01, 500.0, usize::MAX).unwrap();
    let split = start.elapsed();
    let start = Instant::now();
    let opts = RkOptions::with_tol(1e-8);
    let rk = run(
        &Method::Rk45 { field: &f, opts },
        &x0,
        0.01,
        500.0,
        usize::MAX,
    )
    .unwrap();
    let rk_time = start.elapsed();
    format!(
        "quad_stokes T=500: split2 h=0.01 {:.3} s, rk45(1e-8) {:.3} s ({}); not a gate",
        split.as_secs_f64(),
        rk_time.as_secs_f64(),
        status_word(rk.is_completed())
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |id: u32,
                      name: &str,
                      limit: Option<Duration>,
                      check: &mut dyn FnMut() -> Outcome|
     -> bool {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let in_time = limit.is_none_or(|l| elapsed <= l);
        let pass = o.pass && in_time;
        if !pass {
            failures += 1;
        }
        let limit_note = limit.map_or(String::new(), |l| format!(" / limit {} s", l.as_secs()));
        println!(
            "{} [{id}] {name}: {} ({:.2} s{limit_note})",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
        o.pass
    };

    let secs = Duration::from_secs;
    report(
        1,
        "decomposition fidelity",
        Some(secs(1)),
        &mut decomposition_fidelity,
    );
    report(
        2,
        "elementary flow exactness",
        Some(secs(30)),
        &mut edfvf_exactness,
    );
    report(3, "first integrals", None, &mut first_integrals);
    report(
        4,
        "volume preservation",
        Some(secs(10)),
        &mut volume_preservation,
    );
    report(
        5,
        "convergence orders",
        Some(secs(10)),
        &mut convergence_orders,
    );
    let long_run = report(
        6,
        "quadratic Stokes long run",
        Some(secs(60)),
        &mut quadratic_long_run,
    );
    report(7, "baseline contrast", None, &mut || {
        baseline_contrast(long_run)
    });
    report(8, "cubic Stokes sections", None, &mut cubic_sections);
    report(9, "Laurent problem", None, &mut laurent_problem);
    println!("INFO [10] timings: {}", timing_report());

    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
