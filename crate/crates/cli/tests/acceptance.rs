//! Acceptance checks. Each criterion prints one PASS/FAIL line; the test fails if
//! the set of failing criteria differs from the documented known deviations.

use std::path::Path;
use std::process::Command;

use pia_core::fraccalc::{caputo, rl_integral};
use pia_core::oracle::{
    caputo_numeric, eval_expr_numeric, residual_sup_norm, rl_integral_numeric, unit_grid, NumericState, QuadSpec,
};
use pia_core::problem::{eval_expr, Expr, IntegralKind, KernelMonomial};
use pia_core::report::{fmt_fixed, fmt_sci, PublishedTable, TABLE1, TABLE2};
use pia_core::{builtin, gamma, solve, trajectory, FracOrder, FracSeries, PiaConfig, RationalExp, Term};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

// Pinned tolerances.
const COEFF_TOL_EXACT: f64 = 1e-14;
const CLOSED_FORM_REL: f64 = 1e-10;
const INVERSE_REL: f64 = 1e-12;
const ORACLE_ABS: f64 = 1e-8;
const EXACT_RESIDUAL_MAX: f64 = 1e-8;
const SEED: u64 = 20_240_917;

/// Criteria expected to fail, with the reason recorded alongside the project notes.
const KNOWN_FAILURES: &[(usize, &str)] = &[(
    5,
    "printed u error at t = 0.1 is 1.591577E-10; the series gives 1.5915782206E-10 in exact arithmetic",
)];

type Outcome = Result<String, String>;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fide-pia"))
}

fn run_ok(args: &[&str]) -> Result<String, String> {
    let out = bin().args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "fide-pia {} exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn order(n: i64, d: i64) -> FracOrder {
    FracOrder::new(RationalExp::new(n, d).unwrap()).unwrap()
}

fn quiet(iters: usize) -> PiaConfig {
    PiaConfig {
        max_iter: iters,
        residual_points: 0,
        ..Default::default()
    }
}

fn criterion_1() -> Outcome {
    let stdout = run_ok(&["solve", "example1", "--iters", "1"])?;
    check(stdout.lines().next() == Some("u1(t) = t - 0.125*t^2"), || format!("solve printed {stdout:?}"))?;
    let p = builtin("example1").map_err(|e| e.to_string())?;
    let u1 = solve(&p, &quiet(1)).map_err(|e| e.to_string())?.iterates.remove(0);
    let exps: Vec<RationalExp> = u1.terms().iter().map(|t| t.exp).collect();
    check(exps == [RationalExp::ONE, RationalExp::integer(2)], || format!("u1 exponents {exps:?}"))?;
    check(
        (u1.coeff(RationalExp::ONE) - 1.0).abs() <= COEFF_TOL_EXACT
            && (u1.coeff(RationalExp::integer(2)) + 0.125).abs() <= COEFF_TOL_EXACT,
        || format!("u1 = {u1}"),
    )?;
    let u2 = solve(&p, &quiet(2)).map_err(|e| e.to_string())?.iterates.remove(0);
    check(u2.len() == 2 && (u2.coeff(RationalExp::integer(2)) + 91.0 / 3840.0).abs() <= COEFF_TOL_EXACT, || {
        format!("u2 = {u2}")
    })?;
    let at1 = u2.eval(1.0).map_err(|e| e.to_string())?;
    check(format!("{at1:.6}") == "0.976302", || format!("u2(1) = {at1}"))?;
    Ok(format!("u1 = {u1}; u2(1) = {at1:.6}"))
}

/// Compares a CSV file cell by cell with a published table (errata applied).
fn compare_csv(path: &Path, table: &PublishedTable) -> Result<Vec<String>, String> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    let headers: Vec<String> = rd.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    let rows: Vec<csv::StringRecord> = rd.records().collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let mut mismatches = Vec::new();
    for (r, prow) in table.rows.iter().enumerate() {
        let row = rows
            .iter()
            .find(|row| &row[0] == prow[0])
            .ok_or_else(|| format!("row t = {} missing", prow[0]))?;
        for (c, h) in table.headers.iter().enumerate().skip(1) {
            let col = headers.iter().position(|x| x == h).ok_or_else(|| format!("column {h} missing"))?;
            let want = table.corrected(r, c);
            if &row[col] != want {
                mismatches.push(format!("t = {} {h}: printed {want}, got {}", prow[0], &row[col]));
            }
        }
    }
    Ok(mismatches)
}

fn criterion_2() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let csv = dir.path().join("t1.csv");
    run_ok(&["table", "example1", "--iters", "5", "--columns", "2,3,4,5", "--csv", csv.to_str().unwrap()])?;
    let mism = compare_csv(&csv, &TABLE1)?;
    check(mism.is_empty(), || mism.join("; "))?;
    Ok("66/66 cells of table1 match (u5(0.1) compared as the corrected 0.099998)".into())
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for alpha in [order(1, 2), order(3, 4)] {
        let p = builtin("example1").unwrap().with_orders(&[alpha]).map_err(|e| e.to_string())?;
        let u2 = solve(&p, &quiet(2)).map_err(|e| e.to_string())?.iterates.remove(0);
        let a = alpha.to_f64();
        let g = gamma(4.0 - a).unwrap();
        for t in [0.25f64, 0.5, 1.0] {
            let closed = 2.0 * t - 571.0 * t * t / 3840.0 + t.powf(2.0 - a) * (t + 4.0 * (a - 3.0)) / (4.0 * g);
            let got = u2.eval(t).unwrap();
            worst = worst.max((got - closed).abs() / closed.abs());
            check(rel_close(got, closed, CLOSED_FORM_REL), || {
                format!("alpha = {alpha}, t = {t}: {got} vs closed form {closed}")
            })?;
        }
    }
    Ok(format!("max relative deviation {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let p = builtin("example2").unwrap();
    let s1 = solve(&p, &quiet(1)).map_err(|e| e.to_string())?;
    let u1 = FracSeries::normalize([Term::new(1.0, RationalExp::ONE), Term::new(1.0 / 6.0, RationalExp::integer(3))]);
    let k1 = FracSeries::normalize([Term::new(1.0, RationalExp::ZERO), Term::new(0.5, RationalExp::integer(2))]);
    check(
        s1.iterates[0].approx_eq(&u1, COEFF_TOL_EXACT) && s1.iterates[1].approx_eq(&k1, COEFF_TOL_EXACT),
        || format!("iteration 1: u = {}, k = {}", s1.iterates[0], s1.iterates[1]),
    )?;
    let mut worst = 0.0f64;
    for alpha in [order(1, 2), FracOrder::one()] {
        let p = builtin("example2").unwrap().with_orders(&[alpha]).map_err(|e| e.to_string())?;
        let s = solve(&p, &quiet(2)).map_err(|e| e.to_string())?;
        let a = alpha.to_f64();
        for t in [0.25f64, 0.5, 1.0] {
            let u = t * (1008.0 + 168.0 * t.powi(2) + 21.0 * t.powi(4) + t.powi(6)) / 504.0
                - t.powf(2.0 - a) * (12.0 + t * t + (a - 7.0) * a) / gamma(5.0 - a).unwrap();
            let k = 1.0 + t.powi(2) + t.powi(4) / 24.0 + t.powi(6) / 240.0 + t.powi(8) / 2016.0
                - t.powf(3.0 - a) / gamma(4.0 - a).unwrap();
            for (got, want, name) in [(s.iterates[0].eval(t).unwrap(), u, "u2"), (s.iterates[1].eval(t).unwrap(), k, "k2")] {
                worst = worst.max((got - want).abs() / want.abs());
                check(rel_close(got, want, CLOSED_FORM_REL), || {
                    format!("{name}, alpha = {alpha}, t = {t}: {got} vs closed form {want}")
                })?;
            }
        }
    }
    Ok(format!("iteration 1 exact; iteration 2 max relative deviation {worst:.1e}"))
}

fn criterion_5() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    run_ok(&["reproduce", "example2", "--outdir", dir.path().to_str().unwrap()])?;
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).map_err(|e| e.to_string())?;
    for flag in ["erratum t = 0.9 u3", "erratum t = 1.0 u3", "erratum t = 0.0 k_exact"] {
        check(summary.contains(flag), || format!("summary lacks {flag:?}"))?;
    }
    let mism = compare_csv(&dir.path().join("table2.csv"), &TABLE2)?;
    check(mism.is_empty(), || format!("{} of 66 cells differ: {}", mism.len(), mism.join("; ")))?;
    Ok("66/66 cells of table2 match after restoring dropped digits; errata flagged".into())
}

fn random_series(rng: &mut StdRng, smooth: bool) -> FracSeries {
    let n = rng.gen_range(1..=10);
    FracSeries::normalize((0..n).map(|_| {
        let den = rng.gen_range(1..=4i64);
        let mut exp = RationalExp::new(rng.gen_range(0..=8 * den), den).unwrap();
        if smooth && exp.to_f64() > 0.0 && exp.to_f64() < 1.0 {
            exp = RationalExp::ZERO;
        }
        let mag = rng.gen_range(0.01..10.0);
        Term::new(if rng.gen() { mag } else { -mag }, exp)
    }))
}

fn coeffwise_close(a: &FracSeries, b: &FracSeries, tol: f64) -> bool {
    let exps = a.terms().iter().chain(b.terms()).map(|t| t.exp);
    exps.into_iter().all(|e| {
        let (x, y) = (a.coeff(e), b.coeff(e));
        (x - y).abs() <= tol * x.abs().max(y.abs()).max(f64::MIN_POSITIVE) || (x - y).abs() <= 1e-15
    })
}

fn criterion_6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let orders = [order(1, 4), order(1, 2), order(3, 4), FracOrder::one()];
    for case in 0..200 {
        let alpha = orders[case % 4];
        let u = random_series(&mut rng, alpha.is_integer());
        let e = |x: pia_core::Error| format!("case {case}: {x}");
        let lhs5 = caputo(&rl_integral(&u, alpha).map_err(e)?, alpha).map_err(e)?;
        check(coeffwise_close(&lhs5, &u, INVERSE_REL), || format!("case {case}, alpha {alpha}: D J u = {lhs5}, u = {u}"))?;
        let lhs6 = rl_integral(&caputo(&u, alpha).map_err(e)?, alpha).map_err(e)?;
        let rhs6 = u.sub(&FracSeries::constant(u.constant_term()));
        check(coeffwise_close(&lhs6, &rhs6, INVERSE_REL), || {
            format!("case {case}, alpha {alpha}: J D u = {lhs6}, u - u(0) = {rhs6}")
        })?;
    }
    Ok("200 random series, both identities hold coefficientwise".into())
}

fn random_kernel(rng: &mut StdRng, separable: bool) -> KernelMonomial {
    let pick = |rng: &mut StdRng, xs: &[(i64, i64)]| {
        let (n, d) = xs[rng.gen_range(0..xs.len())];
        RationalExp::new(n, d).unwrap()
    };
    let a = pick(rng, &[(0, 1), (1, 2), (1, 1)]);
    let b = pick(rng, &[(0, 1), (1, 2), (1, 1), (2, 1)]);
    let g = if separable {
        RationalExp::ZERO
    } else {
        pick(rng, &[(-1, 2), (-1, 4), (0, 1), (1, 2), (1, 1)])
    };
    KernelMonomial::new(rng.gen_range(0.25..2.0), a, b, g).unwrap()
}

fn criterion_7() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED + 1);
    let orders = [order(1, 4), order(1, 2), order(2, 3), order(3, 4), FracOrder::one()];
    let spec = QuadSpec::default();
    let mut worst = 0.0f64;
    for case in 0..100 {
        let u = random_series(&mut rng, true);
        let k = random_series(&mut rng, true);
        let alpha = orders[rng.gen_range(0..orders.len())];
        let ts: Vec<f64> = (0..10).map(|_| rng.gen_range(0.050_001..=1.0)).collect();
        let e = |x: pia_core::Error| format!("case {case}: {x}");
        let (sym, kind) = match case % 4 {
            0 => (caputo(&u, alpha).map_err(e)?, "Caputo"),
            1 => (rl_integral(&u, alpha).map_err(e)?, "RL integral"),
            _ => {
                let fredholm = case % 4 == 3;
                let kernel = (0..rng.gen_range(1..=2)).map(|_| random_kernel(&mut rng, fredholm)).collect();
                let integrand = match rng.gen_range(0..3) {
                    0 => Expr::Unknown(0),
                    1 => Expr::IntPow(Box::new(Expr::Unknown(0)), 2),
                    _ => Expr::Product(vec![Expr::Unknown(0), Expr::Unknown(1)]),
                };
                let kind = if fredholm { IntegralKind::Fredholm } else { IntegralKind::Volterra };
                let expr = Expr::integral(kind, kernel, integrand);
                let state = vec![u.clone(), k.clone()];
                let sym = eval_expr(&expr, &state).map_err(e)?;
                let ns = NumericState::new(&state);
                for &t in &ts {
                    let num = eval_expr_numeric(&expr, &ns, t, spec).map_err(e)?;
                    let d = (sym.eval(t).unwrap() - num).abs();
                    worst = worst.max(d);
                    check(d <= ORACLE_ABS, || format!("case {case} {kind:?} at t = {t}: deviation {d:e}"))?;
                }
                continue;
            }
        };
        for &t in &ts {
            let num = if kind == "Caputo" {
                caputo_numeric(&u, alpha, t, spec)
            } else {
                rl_integral_numeric(&u, alpha, t, spec)
            }
            .map_err(e)?;
            let d = (sym.eval(t).unwrap() - num).abs();
            worst = worst.max(d);
            check(d <= ORACLE_ABS, || format!("case {case} {kind}, alpha {alpha}, t = {t}: deviation {d:e}"))?;
        }
    }
    Ok(format!("100 cases x 10 points, max deviation {worst:.1e}"))
}

fn criterion_8() -> Outcome {
    let p = builtin("example1").unwrap();
    let grid = unit_grid(21);
    let spec = QuadSpec::default();
    let states = trajectory(&p, &quiet(5)).map_err(|e| e.to_string())?;
    let norms: Vec<f64> = states
        .iter()
        .map(|s| residual_sup_norm(&p, &s.iterates, &grid, spec))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    check(norms[1..].windows(2).all(|w| w[1] < w[0]), || format!("norms {norms:?}"))?;
    let exact = residual_sup_norm(&p, &[FracSeries::t()], &grid, spec).map_err(|e| e.to_string())?;
    check(exact <= EXACT_RESIDUAL_MAX, || format!("exact solution residual {exact:e}"))?;
    let cli = run_ok(&["residual", "example1", "--iters", "5"])?;
    check(cli.lines().count() == 6, || format!("residual printed {cli:?}"))?;
    let shown: Vec<String> = norms[1..].iter().map(|n| format!("{n:.3e}")).collect();
    Ok(format!("n = 1..5: {}; exact solution {exact:.1e}", shown.join(" > ")))
}

fn criterion_9() -> Outcome {
    let p = builtin("example1").unwrap();
    let u5 = solve(&p, &quiet(5)).map_err(|e| e.to_string())?.iterates.remove(0);
    let ratios: Vec<String> = (1..=10)
        .map(|i| {
            let t = i as f64 / 10.0;
            fmt_sci((u5.eval(t).unwrap() - t).abs() / (t * t), 7)
        })
        .collect();
    check(ratios.iter().all(|r| r == "1.872712E-4"), || format!("err/t^2 = {ratios:?}"))?;
    let row1 = fmt_sci((u5.eval(0.1).unwrap() - 0.1).abs(), 7);
    check(row1 == "1.872712E-6", || format!("err(0.1) = {row1}"))?;
    check(fmt_fixed(u5.eval(1.0).unwrap(), 6) == "0.999812", || "u5(1)".into())?;
    Ok("err(t)/t^2 = 1.872712E-4 at all ten rows".into())
}

fn acceptance() {
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = Vec::new();
    for (id, f) in criteria {
        match f() {
            Ok(detail) => println!("criterion {id}: PASS ({detail})"),
            Err(why) => {
                println!("criterion {id}: FAIL ({why})");
                failed.push(id);
            }
        }
    }
    for (id, reason) in KNOWN_FAILURES {
        if failed.contains(id) {
            println!("criterion {id}: known deviation: {reason}");
        }
    }
    let expected: Vec<usize> = KNOWN_FAILURES.iter().map(|(id, _)| *id).collect();
    assert_eq!(failed, expected, "unexpected set of failing criteria");
}

/// The known table2 deviation must stay confined to that single cell.
fn table2_deviation_is_one_cell() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["reproduce", "example2", "--outdir", dir.path().to_str().unwrap()]).unwrap();
    let mism = compare_csv(&dir.path().join("table2.csv"), &TABLE2).unwrap();
    assert_eq!(mism, vec!["t = 0.1 u_abs_error: printed 1.591577E-10, got 1.591578E-10".to_string()]);
}

// Runs without the libtest harness so the per-criterion lines are never captured.
fn main() {
    acceptance();
    table2_deviation_is_one_cell();
    println!("acceptance: ok");
}
