use std::io::Write;

use anyhow::{bail, ensure, Result};
use hoairy::acceptance;
use hoairy::fredholm::{self, DEFAULT_M_X, DEFAULT_M_Y, DEFAULT_M_Z, DEFAULT_SIGMA_M_Z, DEFAULT_STEP_M};
use hoairy::hierarchy_cas::{mkdv_member, pii_member, render, to_json, to_ode};
use hoairy::idpii_solver::{seed, trajectory, SolverConfig};
use hoairy::mkdv_check::{fermi_via_mkdv, residual_order};
use hoairy::specfun;
use hoairy::weights::{make_fermi, parse_weight};
use rayon::prelude::*;

use crate::cli::*;
use crate::output::{num, write_csv};

const MAX_POINTS: usize = 100_000;

fn check_n(n: u32) -> Result<()> {
    ensure!(n >= 1, "n must be at least 1, got {n}");
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    ensure!((0.0..=1.0).contains(&lambda), "lambda must lie in [0, 1], got {lambda}");
    Ok(())
}

fn check_m(name: &str, m: Option<usize>) -> Result<()> {
    if let Some(m) = m {
        ensure!(m >= 4, "--{name} must be at least 4, got {m}");
    }
    Ok(())
}

/// Inclusive grid `from, from+step, …, to`.
fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    ensure!(step > 0.0 && step.is_finite(), "step must be positive, got {step}");
    ensure!(to >= from, "range end {to} lies below its start {from}");
    let k = ((to - from) / step + 1e-9).floor() as usize;
    ensure!(k < MAX_POINTS, "range has more than {MAX_POINTS} points");
    Ok((0..=k).map(|i| from + step * i as f64).collect())
}

/// `None` for a single point (printed bare), otherwise the range.
fn points(single: Option<f64>, from: Option<f64>, to: Option<f64>, step: f64, default: f64) -> Result<(bool, Vec<f64>)> {
    match (single, from, to) {
        (Some(_), Some(_), _) => bail!("give either a single point or a range, not both"),
        (_, Some(a), Some(b)) => Ok((false, grid(a, b, step)?)),
        (s, _, _) => Ok((true, vec![s.unwrap_or(default)])),
    }
}

pub fn ai(a: &AiArgs, out: &mut dyn Write) -> Result<()> {
    check_n(a.n)?;
    ensure!(a.deriv <= 2 * a.n as usize, "--deriv must be at most 2n = {}", 2 * a.n);
    let (single, xs) = points(a.x, a.x_from, a.x_to, a.x_step, 0.0)?;
    let vals = xs
        .par_iter()
        .map(|&x| specfun::ai_deriv(a.n, x, a.deriv))
        .collect::<hoairy::Result<Vec<f64>>>()?;
    if single {
        writeln!(out, "{}", num(vals[0]))?;
        return Ok(());
    }
    let rows: Vec<Vec<String>> = xs
        .iter()
        .zip(&vals)
        .map(|(x, v)| vec![a.n.to_string(), a.deriv.to_string(), num(*x), num(*v)])
        .collect();
    write_csv(out, &["n", "j", "x", "value"], &rows)
}

pub fn det(a: &DetArgs, out: &mut dyn Write) -> Result<()> {
    check_n(a.n)?;
    check_lambda(a.lambda)?;
    check_m("m-x", a.m_x)?;
    check_m("m-z", a.m_z)?;
    let w = parse_weight(&a.weight)?;
    let (single, ts) = points(a.t.t, a.t.t_from, a.t.t_to, a.t.t_step, 0.0)?;
    let vals = ts
        .par_iter()
        .map(|&t| match a.route {
            Route::Halfline => {
                fredholm::det_halfline(a.n, t, a.lambda, &w, a.m_x.unwrap_or(DEFAULT_M_X), a.m_z.unwrap_or(DEFAULT_M_Z))
            }
            Route::Sigma => fredholm::det_sigma(
                a.n,
                t,
                a.lambda,
                &w,
                a.m_z.unwrap_or(DEFAULT_SIGMA_M_Z),
                a.m_x.unwrap_or(DEFAULT_M_Y),
            ),
            Route::Step => fredholm::det_step(a.n, t, a.lambda, a.m_x.unwrap_or(DEFAULT_STEP_M)),
        })
        .collect::<hoairy::Result<Vec<f64>>>()?;
    if single {
        writeln!(out, "{}", num(vals[0]))?;
        return Ok(());
    }
    let label = if a.route == Route::Step { "step".to_string() } else { w.label.clone() };
    let rows: Vec<Vec<String>> = ts
        .iter()
        .zip(&vals)
        .map(|(t, d)| vec![a.n.to_string(), num(*t), num(a.lambda), label.clone(), num(*d)])
        .collect();
    write_csv(out, &["n", "t", "lambda", "weight", "det"], &rows)
}

fn solver_config(a: &SolveArgs) -> Result<SolverConfig> {
    check_m("grid-m", a.grid_m)?;
    let base = SolverConfig::for_order(a.n);
    let cfg = SolverConfig {
        t0: a.t0.unwrap_or(base.t0),
        tol: a.tol.unwrap_or(base.tol),
        grid_m: a.grid_m.unwrap_or(base.grid_m),
        tail_cut: a.tail_cut.unwrap_or(base.tail_cut),
        ..base
    };
    ensure!(cfg.tol > 0.0, "--tol must be positive");
    Ok(cfg)
}

/// Rows `t, u(t|x_ref), Q(t), logD_tw, logD_det, diff` in ascending t.
pub fn solve(a: &SolveArgs, out: &mut dyn Write) -> Result<()> {
    check_n(a.n)?;
    check_lambda(a.lambda)?;
    let cfg = solver_config(a)?;
    let w = parse_weight(&a.weight)?;
    let (_, mut ts) = points(a.t.t, a.t.t_from, a.t.t_to, a.t.t_step, 0.0)?;
    ensure!(ts.iter().all(|&t| t < cfg.t0), "every t must lie below T0 = {}", cfg.t0);
    ts.sort_by(|x, y| y.total_cmp(x));
    let s = seed(a.n, a.lambda, cfg.t0, &cfg.grid(&w)?)?;
    let states = trajectory(&s, &ts, cfg.tol)?;
    let dets = ts
        .par_iter()
        .map(|&t| fredholm::det_halfline(a.n, t, a.lambda, &w, DEFAULT_M_X, DEFAULT_M_Z))
        .collect::<hoairy::Result<Vec<f64>>>()?;
    let mut rows = Vec::with_capacity(ts.len());
    for ((t, st), d) in ts.iter().zip(&states).zip(&dets).rev() {
        let det_log = d.ln();
        rows.push(vec![
            num(*t),
            num(st.interpolate(0, a.x_ref)?),
            num(st.q()),
            num(st.log_d),
            num(det_log),
            num(st.log_d - det_log),
        ]);
    }
    write_csv(out, &["t", "u_x_ref", "q", "log_d_tw", "log_d_det", "diff"], &rows)
}

pub fn hierarchy(a: &HierarchyArgs, out: &mut dyn Write) -> Result<()> {
    check_n(a.n)?;
    let m = match a.kind {
        Kind::Pii => pii_member(a.n)?,
        Kind::Mkdv => mkdv_member(a.n)?,
    };
    match a.format {
        TextFormat::Text => writeln!(out, "{}", render(&m))?,
        TextFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&to_json(&m))?)?,
        TextFormat::Ode => writeln!(out, "{}", to_ode(&m)?.render())?,
    }
    Ok(())
}

pub fn mkdv_check(a: &MkdvArgs, out: &mut dyn Write) -> Result<()> {
    check_n(a.n)?;
    let w = parse_weight(&a.weight)?;
    let r = residual_order(a.n, &w, a.tau, a.delta_tau, a.t1, a.x, &SolverConfig::for_order(a.n))?;
    let row = vec![
        a.n.to_string(),
        num(a.tau),
        num(a.delta_tau),
        num(a.t1),
        num(a.x),
        num(r.coarse.at_x),
        num(r.fine.at_x),
        num(r.order),
    ];
    write_csv(out, &["n", "tau", "delta_tau", "t1", "x", "residual", "residual_half_step", "order"], &[row])
}

pub fn table(a: &TableArgs, out: &mut dyn Write) -> Result<()> {
    check_n(a.n)?;
    let w = make_fermi(a.alpha)?;
    let ts = grid(a.t_from, a.t_to, a.t_step)?;
    let h = 1e-4;
    let cfg = SolverConfig::for_order(a.n);
    let rows = ts
        .par_iter()
        .map(|&t| -> Result<Vec<String>> {
            let f = |t: f64| fredholm::det_halfline(a.n, t, 1.0, &w, DEFAULT_M_X, DEFAULT_M_Z);
            let value = f(t)?;
            let slope = (f(t + h)? - f(t - h)?) / (2.0 * h);
            let mut row = vec![a.n.to_string(), num(a.alpha), num(t), num(value), num(slope)];
            if a.via_mkdv {
                let v = fermi_via_mkdv(a.n, a.alpha, t, &cfg)?;
                row.push(num(v));
                row.push(num(v - value));
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut header = vec!["n", "alpha", "t", "f", "df_dt"];
    if a.via_mkdv {
        header.extend(["f_mkdv", "diff"]);
    }
    write_csv(out, &header, &rows)
}

/// Returns whether every criterion passed.
pub fn selftest(a: &SelftestArgs, out: &mut dyn Write) -> Result<bool> {
    let reports = acceptance::run_all(a.quick);
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    writeln!(out, "{passed} of {} criteria passed", reports.len())?;
    Ok(passed == reports.len())
}
