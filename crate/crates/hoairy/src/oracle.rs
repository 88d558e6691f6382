//! Reference computations that share no code with the contour evaluator.
//!
//! The classical Airy pair `(Ai, Ai′)` is started from the large-argument asymptotic
//! series at `x = 12` and carried to smaller `x` by Taylor steps of `y″ = xy`
//! (the direction in which `Ai` dominates, so the recursion is stable).

use std::sync::OnceLock;

use nalgebra::DMatrix;
use ode_solvers::{Dop853, OutputType, System, Vector3};

use crate::error::{Error, Result};
use crate::quadrature::composite;

const START: f64 = 12.0;
const STEP: f64 = 0.0625;
const LOWEST: f64 = -80.0;
const TAYLOR_TERMS: usize = 48;

/// `(Ai(x), Ai′(x))` from the asymptotic series, accurate for `x ≥ 10`.
fn airy_asymptotic(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let mut u = 1.0;
    let mut sa = 1.0;
    let mut sd = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        let term = u / zeta.powi(k);
        if term.abs() > last || term.abs() < 1e-18 {
            break;
        }
        last = term.abs();
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        sa += sign * term;
        sd += sign * v / zeta.powi(k);
    }
    let pre = (-zeta).exp() / (2.0 * std::f64::consts::PI.sqrt());
    (pre * sa / x.powf(0.25), -pre * x.powf(0.25) * sd)
}

fn taylor_coeffs(x0: f64, y0: f64, d0: f64) -> [f64; TAYLOR_TERMS] {
    let mut c = [0.0; TAYLOR_TERMS];
    c[0] = y0;
    c[1] = d0;
    c[2] = x0 * y0 / 2.0;
    for k in 1..TAYLOR_TERMS - 2 {
        c[k + 2] = (x0 * c[k] + c[k - 1]) / ((k + 2) as f64 * (k + 1) as f64);
    }
    c
}

fn taylor_eval(c: &[f64; TAYLOR_TERMS], h: f64) -> (f64, f64) {
    let mut y = 0.0;
    let mut d = 0.0;
    for k in (0..TAYLOR_TERMS).rev() {
        y = y * h + c[k];
        if k >= 1 {
            d = d * h + k as f64 * c[k];
        }
    }
    (y, d)
}

fn grid() -> &'static Vec<(f64, f64)> {
    static GRID: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    GRID.get_or_init(|| {
        let steps = ((START - LOWEST) / STEP).round() as usize;
        let mut out = Vec::with_capacity(steps + 1);
        let (mut y, mut d) = airy_asymptotic(START);
        out.push((y, d));
        for k in 0..steps {
            let x0 = START - k as f64 * STEP;
            let c = taylor_coeffs(x0, y, d);
            let next = taylor_eval(&c, -STEP);
            y = next.0;
            d = next.1;
            out.push((y, d));
        }
        out.reverse();
        out
    })
}

/// Classical `(Ai(x), Ai′(x))` for `x ≥ −80`.
pub fn airy(x: f64) -> Result<(f64, f64)> {
    if x >= START {
        return Ok(airy_asymptotic(x));
    }
    if x < LOWEST {
        return Err(Error::InvalidArgument(format!("classical Airy oracle covers x >= {LOWEST}")));
    }
    let g = grid();
    let k = ((x - LOWEST) / STEP).round() as usize;
    let x0 = LOWEST + k as f64 * STEP;
    let (y0, d0) = g[k];
    Ok(taylor_eval(&taylor_coeffs(x0, y0, d0), x - x0))
}

/// Classical Airy kernel `(Ai(x)Ai′(y) − Ai′(x)Ai(y))/(x − y)`.
pub fn airy_kernel(x: f64, y: f64) -> Result<f64> {
    let (ax, dx) = airy(x)?;
    if (x - y).abs() < 1e-9 {
        return Ok(dx * dx - x * ax * ax);
    }
    let (ay, dy) = airy(y)?;
    Ok((ax * dy - dx * ay) / (x - y))
}

/// `det(I − λ K_Airy)` on `L²(t, ∞)` by Nyström discretisation, `m` nodes.
pub fn airy_kernel_det(t: f64, lambda: f64, m: usize) -> Result<f64> {
    let upper = t.max(0.0) + 18.0;
    let panels = m.div_ceil(20).max(1);
    let rule = composite(t, upper, panels, 20);
    let k = rule.len();
    let mut mat = DMatrix::<f64>::identity(k, k);
    for i in 0..k {
        for j in 0..k {
            let kij = airy_kernel(rule.nodes[i], rule.nodes[j])?;
            mat[(i, j)] -= lambda * rule.weights[i].sqrt() * kij * rule.weights[j].sqrt();
        }
    }
    Ok(mat.determinant())
}

/// `q″ = sq + 2q³` with `s` carried as a third component (see the note in `idpii_solver`).
struct ClassicalPii;

impl System<f64, Vector3<f64>> for ClassicalPii {
    fn system(&self, _x: f64, y: &Vector3<f64>, dy: &mut Vector3<f64>) {
        dy[0] = y[1];
        dy[1] = y[2] * y[0] + 2.0 * y[0].powi(3);
        dy[2] = 1.0;
    }
}

/// Hastings–McLeod solution `q″ = sq + 2q³`, `q ~ Ai(s)`, at `points` (all `≤ 8`),
/// integrated backwards from `s = 8`.
pub fn hastings_mcleod(points: &[f64]) -> Result<Vec<f64>> {
    let s0 = 8.0;
    let (a, d) = airy(s0)?;
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[j].total_cmp(&points[i]));
    let mut out = vec![0.0; points.len()];
    let mut s = s0;
    let mut y = Vector3::new(a, d, s0);
    for i in order {
        let p = points[i];
        if p > s0 {
            return Err(Error::InvalidArgument(format!("{p} lies above the start s = {s0}")));
        }
        if p < s {
            let mut solver = Dop853::new(ClassicalPii, s, p, p - s, y, 1e-13, 1e-15);
            solver.set_output(OutputType::Sparse);
            solver
                .integrate()
                .map_err(|e| Error::Integration(e.to_string()))?;
            y = *solver
                .y_out()
                .last()
                .ok_or_else(|| Error::Integration("no steps taken".into()))?;
            s = p;
        }
        out[i] = y[0];
    }
    Ok(out)
}
