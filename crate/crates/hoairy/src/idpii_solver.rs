//! Backward shooting for the integro-differential Painlevé-II problem
//! `−(t+x)u = (L₊L₋)^n u`, `u(t|x) ∼ λ^{1/2} Ai_n(t+x)` as `t → +∞`.
//!
//! The field is carried on the nodes of a σ-quadrature together with its first `2n−1`
//! t-derivatives. Two extra components accumulate `log D` along the path:
//! `(log D)″ = −Q` with `Q(t) = ⟨u,u⟩(t)`, started from the tail integrals of the seed.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use ode_solvers::{DVector, Dop853, OutputType, System};

use crate::error::{Error, Result};
use crate::hierarchy_cas::{differentiated_ode, pii_member, to_ode, OdeForm};
use crate::quadrature::composite;
use crate::specfun::{shared_table, AiryTable};
use crate::weights::{sigma_quadrature_cut, SigmaQuadrature, Weight};

pub const DEFAULT_T0: f64 = 12.0;
/// Seeding time for `n ≥ 2`; see [`SolverConfig::for_order`].
pub const DEFAULT_T0_HIGHER: f64 = 20.0;
pub const DEFAULT_GRID_M: usize = 240;
/// `w′` level at which the grid is cut for `n ≥ 2`.
pub const DEFAULT_TAIL_CUT_HIGHER: f64 = 1e-6;
pub const DEFAULT_BLOWUP: f64 = 1e6;
pub const DEFAULT_TOL: f64 = 1e-12;
/// Largest admissible seeded bracket `λ⟨Ai_n, Ai_n⟩(T₀)`.
pub const SEED_BRACKET_MAX: f64 = 1e-4;
/// Length of the s-interval past `T₀` covered by the tail integrals.
const TAIL_SPAN: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub t0: f64,
    pub tol: f64,
    pub blowup: f64,
    pub grid_m: usize,
    /// The σ-grid covers the interval where `w′ ≥ tail_cut`.
    pub tail_cut: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { t0: DEFAULT_T0, tol: DEFAULT_TOL, blowup: DEFAULT_BLOWUP, grid_m: DEFAULT_GRID_M, tail_cut: 1e-16 }
    }
}

impl SolverConfig {
    /// Defaults tuned per order. For `n ≥ 2` the linearised equation has a real exponential
    /// mode wherever `t + x < 0`, growing like `exp(c|t+x|^{(2n+1)/2n})` backwards in t.
    /// The seed's neglected O(Q(T₀)) correction feeds it, so `T₀` moves out and the far-left
    /// nodes (where that growth is largest) are dropped.
    pub fn for_order(n: u32) -> Self {
        if n <= 1 {
            Self::default()
        } else {
            Self { t0: DEFAULT_T0_HIGHER, tail_cut: DEFAULT_TAIL_CUT_HIGHER, ..Self::default() }
        }
    }

    pub fn grid(&self, w: &Weight) -> Result<SigmaQuadrature> {
        sigma_quadrature_cut(w, self.grid_m, self.tail_cut, 1e-10 + 10.0 * self.tail_cut)
    }
}

/// `log D` and its t-derivative at the seeding time, from the asymptotic seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub log_d: f64,
    pub dlog_d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub n: u32,
    pub lambda_sqrt: f64,
    pub grid: SigmaQuadrature,
    /// `values[j][i] = u^{(j)}(t|x_i)`, `j < 2n`.
    pub values: Vec<Vec<f64>>,
    pub log_d: f64,
    pub dlog_d: f64,
    pub seed_t: f64,
    pub tail: TailEstimate,
}

impl FieldState {
    pub fn bracket(&self, i: usize, j: usize) -> f64 {
        bracket(&self.grid.weights, &self.values[i], &self.values[j])
    }

    /// `Q(t) = ⟨u,u⟩`.
    pub fn q(&self) -> f64 {
        self.bracket(0, 0)
    }

    fn rows(&self) -> Vec<&[f64]> {
        self.values.iter().map(|v| v.as_slice()).collect()
    }

    /// `u^{(2n)}` at every node from the member equation.
    pub fn highest(&self) -> Result<Vec<f64>> {
        let odes = member_odes(self.n)?;
        let mut out = vec![0.0; self.grid.len()];
        odes.ode.evaluate(self.t, &self.grid.nodes, &self.grid.weights, &self.rows(), &mut out);
        Ok(out)
    }

    /// `u^{(j)}` for all `j ≤ 2n+1`, the top two from the member equation and its t-derivative.
    pub fn all_derivatives(&self) -> Result<Vec<Vec<f64>>> {
        let odes = member_odes(self.n)?;
        let mut rows = self.values.clone();
        rows.push(self.highest()?);
        let mut top = vec![0.0; self.grid.len()];
        let refs: Vec<&[f64]> = rows.iter().map(|v| v.as_slice()).collect();
        odes.derived.evaluate(self.t, &self.grid.nodes, &self.grid.weights, &refs, &mut top);
        rows.push(top);
        Ok(rows)
    }

    /// `u^{(j)}(t|x)` by cubic interpolation through the four nodes nearest `x`.
    pub fn interpolate(&self, j: usize, x: f64) -> Result<f64> {
        interpolate_cubic(&self.grid.nodes, &self.values[j], x)
    }

    /// Residual of the member equation with `u^{(2n)}` supplied from outside.
    pub fn member_residual(&self, highest: &[f64]) -> Result<f64> {
        let own = self.highest()?;
        Ok(own.iter().zip(highest).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    fn pack(&self) -> DVector<f64> {
        let mut y = DVector::zeros(self.values.len() * self.grid.len() + 3);
        let m = self.grid.len();
        for (j, row) in self.values.iter().enumerate() {
            y.as_mut_slice()[j * m..(j + 1) * m].copy_from_slice(row);
        }
        let k = y.len();
        y[k - 3] = self.log_d;
        y[k - 2] = self.dlog_d;
        y[k - 1] = self.t;
        y
    }

    fn unpack(&self, t: f64, y: &DVector<f64>) -> Self {
        let m = self.grid.len();
        let values = (0..self.values.len())
            .map(|j| y.as_slice()[j * m..(j + 1) * m].to_vec())
            .collect();
        let k = y.len();
        Self { t, values, log_d: y[k - 3], dlog_d: y[k - 2], ..self.clone() }
    }
}

/// Local cubic Lagrange interpolation on sorted nodes; errors outside their hull.
pub fn interpolate_cubic(nodes: &[f64], values: &[f64], x: f64) -> Result<f64> {
    let m = nodes.len();
    if m < 4 {
        return Err(Error::InvalidArgument("interpolation needs at least four nodes".into()));
    }
    if !(x >= nodes[0] && x <= nodes[m - 1]) {
        return Err(Error::OutsideHull { x, lo: nodes[0], hi: nodes[m - 1] });
    }
    let k = nodes.partition_point(|&v| v < x);
    let lo = k.saturating_sub(2).min(m - 4);
    let idx = lo..lo + 4;
    let mut acc = 0.0;
    for a in idx.clone() {
        let mut l = 1.0;
        for b in idx.clone() {
            if a != b {
                l *= (x - nodes[b]) / (nodes[a] - nodes[b]);
            }
        }
        acc += l * values[a];
    }
    Ok(acc)
}

fn bracket(sigma: &[f64], a: &[f64], b: &[f64]) -> f64 {
    sigma.iter().zip(a).zip(b).map(|((s, x), y)| s * (x * y)).sum()
}

/// Compiled member equation and its first t-derivative.
pub struct MemberOdes {
    pub ode: OdeForm,
    pub derived: OdeForm,
}

pub fn member_odes(n: u32) -> Result<Arc<MemberOdes>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<MemberOdes>>>> = OnceLock::new();
    let map = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(o) = map.lock().unwrap_or_else(|e| e.into_inner()).get(&n) {
        return Ok(o.clone());
    }
    let member = pii_member(n)?;
    let odes = Arc::new(MemberOdes { ode: to_ode(&member)?, derived: differentiated_ode(&member)? });
    map.lock().unwrap_or_else(|e| e.into_inner()).insert(n, odes.clone());
    Ok(odes)
}

/// `Ai_n^{(j)}(x)` from the shared table; zero past its right end, where `Ai_n` underflows
/// any tolerance in use here.
fn seed_value(table: &AiryTable, x: f64, j: usize) -> Result<f64> {
    let (lo, hi) = table.range();
    if x >= hi {
        return Ok(0.0);
    }
    if x < lo {
        return Err(Error::InvalidArgument(format!("seed argument {x} is left of the Airy table")));
    }
    table.eval(x, j)
}

/// `λ⟨Ai_n(s+·), Ai_n(s+·)⟩` on the grid.
fn seeded_q(table: &AiryTable, grid: &SigmaQuadrature, lambda: f64, s: f64) -> Result<f64> {
    let mut q = 0.0;
    for (x, w) in grid.nodes.iter().zip(&grid.weights) {
        let a = seed_value(table, s + x, 0)?;
        q += w * a * a;
    }
    Ok(lambda * q)
}

fn tail_estimate(table: &AiryTable, grid: &SigmaQuadrature, lambda: f64, t0: f64) -> Result<TailEstimate> {
    let rule = composite(t0, t0 + TAIL_SPAN, TAIL_SPAN as usize, 20);
    let mut log_d = 0.0;
    let mut dlog_d = 0.0;
    for (s, w) in rule.nodes.iter().zip(&rule.weights) {
        let q = seeded_q(table, grid, lambda, *s)?;
        log_d -= w * (s - t0) * q;
        dlog_d += w * q;
    }
    Ok(TailEstimate { log_d, dlog_d })
}

/// Default grid for a weight and order.
pub fn default_grid(n: u32, w: &Weight) -> Result<SigmaQuadrature> {
    SolverConfig::for_order(n).grid(w)
}

/// State at `T₀` seeded by `u = λ^{1/2} Ai_n(T₀ + x)` on the principal branch `λ^{1/2} ≥ 0`.
pub fn seed(n: u32, lambda: f64, t0: f64, grid: &SigmaQuadrature) -> Result<FieldState> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!("lambda must lie in [0,1], got {lambda}")));
    }
    seed_branch(n, lambda.sqrt(), t0, grid)
}

/// As [`seed`] with an explicit branch `λ^{1/2}` (either sign).
pub fn seed_branch(n: u32, lambda_sqrt: f64, t0: f64, grid: &SigmaQuadrature) -> Result<FieldState> {
    if n == 0 {
        return Err(Error::InvalidArgument("order n must be at least 1".into()));
    }
    if !lambda_sqrt.is_finite() || lambda_sqrt.abs() > 1.0 {
        return Err(Error::InvalidArgument(format!("branch value {lambda_sqrt} outside [-1,1]")));
    }
    let table = shared_table(n)?;
    let lambda = lambda_sqrt * lambda_sqrt;
    let q0 = seeded_q(&table, grid, 1.0, t0)?;
    if q0 > SEED_BRACKET_MAX {
        return Err(Error::InvalidArgument(format!(
            "T0 = {t0} is too small: seeded bracket <Ai_n,Ai_n> = {q0:.3e} exceeds {SEED_BRACKET_MAX:.0e}"
        )));
    }
    let values = (0..2 * n as usize)
        .map(|j| {
            grid.nodes
                .iter()
                .map(|x| seed_value(&table, t0 + x, j).map(|a| lambda_sqrt * a))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let tail = if lambda == 0.0 {
        TailEstimate { log_d: 0.0, dlog_d: 0.0 }
    } else {
        tail_estimate(&table, grid, lambda, t0)?
    };
    Ok(FieldState {
        t: t0,
        n,
        lambda_sqrt,
        grid: grid.clone(),
        values,
        log_d: tail.log_d,
        dlog_d: tail.dlog_d,
        seed_t: t0,
        tail,
    })
}

struct Rhs<'a> {
    odes: &'a MemberOdes,
    grid: &'a SigmaQuadrature,
    rows: usize,
    /// The field is integrated as `scale · u` so that its seed is O(1); with a scalar
    /// absolute tolerance a field far below `tol` would otherwise go unresolved.
    scale: f64,
    blowup: f64,
    blown: Option<f64>,
}

impl System<f64, DVector<f64>> for Rhs<'_> {
    // Time is carried as the last state component: the Dop853 tableau shipped with
    // ode_solvers 0.6 has c₁₂ = 0 instead of 1, which breaks non-autonomous systems.
    fn system(&self, _x: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let m = self.grid.len();
        let ys = y.as_slice();
        let k = ys.len();
        let t = ys[k - 1];
        let field: Vec<f64> = ys[..self.rows * m].iter().map(|v| v / self.scale).collect();
        let derivs: Vec<&[f64]> = field.chunks(m).collect();
        let out = dy.as_mut_slice();
        out[..(self.rows - 1) * m].copy_from_slice(&ys[m..self.rows * m]);
        let top = &mut out[(self.rows - 1) * m..self.rows * m];
        self.odes.ode.evaluate(t, &self.grid.nodes, &self.grid.weights, &derivs, top);
        for v in top.iter_mut() {
            *v *= self.scale;
        }
        let q = bracket(&self.grid.weights, derivs[0], derivs[0]);
        out[k - 3] = ys[k - 2];
        out[k - 2] = -q;
        out[k - 1] = 1.0;
    }

    fn solout(&mut self, t: f64, y: &DVector<f64>, _dy: &DVector<f64>) -> bool {
        let m = self.grid.len();
        let bound = self.blowup * self.scale;
        let big = y.as_slice()[..m].iter().any(|v| !v.is_finite() || v.abs() > bound);
        if big {
            self.blown = Some(t);
        }
        big
    }
}

/// Integrate backwards to `t_target` with relative and absolute tolerance `tol`.
pub fn step_to(state: &FieldState, t_target: f64, tol: f64) -> Result<FieldState> {
    step_to_guarded(state, t_target, tol, DEFAULT_BLOWUP)
}

pub fn step_to_guarded(state: &FieldState, t_target: f64, tol: f64, blowup: f64) -> Result<FieldState> {
    let odes = member_odes(state.n)?;
    step_with(&odes, state, t_target, tol, blowup)
}

/// [`step_to_guarded`] with an explicitly supplied equation.
pub fn step_with(odes: &MemberOdes, state: &FieldState, t_target: f64, tol: f64, blowup: f64) -> Result<FieldState> {
    if t_target > state.t {
        return Err(Error::InvalidArgument(format!(
            "integration runs backwards: target {t_target} is after {}",
            state.t
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    if t_target == state.t {
        return Ok(state.clone());
    }
    let peak = state.values.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
    let scale = if peak > 0.0 && peak < 1.0 { 1.0 / peak } else { 1.0 };
    let rows = state.values.len();
    let m = state.grid.len();
    let mut y0 = state.pack();
    for v in &mut y0.as_mut_slice()[..rows * m] {
        *v *= scale;
    }
    let rhs = Rhs { odes, grid: &state.grid, rows, scale, blowup, blown: None };
    let mut solver = Dop853::new(rhs, state.t, t_target, t_target - state.t, y0, tol, tol);
    solver.set_output(OutputType::Sparse);
    solver.integrate().map_err(|e| Error::Integration(e.to_string()))?;
    let (ts, ys) = (solver.x_out(), solver.y_out());
    let mut last = ys.last().ok_or_else(|| Error::Integration("solver produced no steps".into()))?.clone();
    for v in &mut last.as_mut_slice()[..rows * m] {
        *v /= scale;
    }
    let t_last = *ts.last().unwrap_or(&state.t);
    if let Some(v) = last.as_slice()[..m].iter().find(|v| !v.is_finite() || v.abs() > blowup) {
        return Err(Error::BlowUp { t: t_last, bound: v.abs().max(blowup) });
    }
    if (t_last - t_target).abs() > 1e-9 * (1.0 + t_target.abs()) {
        return Err(Error::Integration(format!("stopped at t = {t_last} short of {t_target}")));
    }
    Ok(state.unpack(t_target, &last))
}

/// States at each of `ts` (descending), integrating through them in order.
pub fn trajectory(state: &FieldState, ts: &[f64], tol: f64) -> Result<Vec<FieldState>> {
    let mut cur = state.clone();
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        cur = step_to(&cur, t, tol)?;
        out.push(cur.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwRepresentation {
    pub d: f64,
    pub log_d: f64,
    pub tail: TailEstimate,
    pub state: FieldState,
}

/// `D_n(t, λ) = exp(−∫_t^∞ (s−t) Q(s) ds)` from the solved field.
pub fn tw_representation(n: u32, lambda: f64, w: &Weight, t: f64, cfg: &SolverConfig) -> Result<TwRepresentation> {
    let grid = cfg.grid(w)?;
    let s = seed(n, lambda, cfg.t0, &grid)?;
    tw_from_seed(&s, t, cfg)
}

pub fn tw_from_seed(seeded: &FieldState, t: f64, cfg: &SolverConfig) -> Result<TwRepresentation> {
    let state = if t < seeded.t {
        step_to_guarded(seeded, t, cfg.tol, cfg.blowup)?
    } else {
        return Err(Error::InvalidArgument(format!("t = {t} must lie below T0 = {}", seeded.t)));
    };
    Ok(TwRepresentation { d: state.log_d.exp(), log_d: state.log_d, tail: seeded.tail, state })
}

/// Max over the grid of `|u − λ^{1/2}Ai_n(t+x)| / (|λ^{1/2}Ai_n(t+x)| + 1e-30)`.
pub fn asymptotic_check(state: &FieldState) -> Result<f64> {
    let table = shared_table(state.n)?;
    let mut worst: f64 = 0.0;
    for (x, u) in state.grid.nodes.iter().zip(&state.values[0]) {
        let a = state.lambda_sqrt * seed_value(&table, state.t + x, 0)?;
        let dev = (u - a).abs();
        if dev == 0.0 {
            continue;
        }
        worst = worst.max(dev / (a.abs() + 1e-30));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::make_fermi;

    fn grid() -> SigmaQuadrature {
        default_grid(1, &make_fermi(1.0).unwrap()).unwrap()
    }

    #[test]
    fn zero_lambda_stays_zero() {
        let g = grid();
        let s = seed(1, 0.0, DEFAULT_T0, &g).unwrap();
        assert!(s.values.iter().flatten().all(|v| *v == 0.0));
        let later = step_to(&s, 0.0, 1e-10).unwrap();
        assert!(later.values.iter().flatten().all(|v| *v == 0.0));
        assert_eq!(later.log_d, 0.0);
        assert_eq!(asymptotic_check(&later).unwrap(), 0.0);
    }

    #[test]
    fn seeding_is_exact_and_odd_in_the_branch() {
        let g = grid();
        let table = shared_table(1).unwrap();
        let s = seed(1, 0.25, DEFAULT_T0, &g).unwrap();
        assert_eq!(s.values[1][7], 0.5 * table.eval(DEFAULT_T0 + g.nodes[7], 1).unwrap());
        assert_eq!(asymptotic_check(&s).unwrap(), 0.0);
        let flipped = seed_branch(1, -0.5, DEFAULT_T0, &g).unwrap();
        for (a, b) in s.values.iter().flatten().zip(flipped.values.iter().flatten()) {
            assert_eq!(*a, -*b);
        }
        assert_eq!(s.bracket(0, 1), s.bracket(1, 0));
        let q = s.q();
        assert!(q > 0.0 && q < SEED_BRACKET_MAX, "{q}");
    }

    #[test]
    fn rejects_bad_input() {
        let g = grid();
        assert!(seed(1, 1.5, DEFAULT_T0, &g).is_err());
        assert!(seed(1, 1.0, 2.0, &g).is_err());
        let s = seed(1, 1.0, DEFAULT_T0, &g).unwrap();
        assert!(step_to(&s, 13.0, 1e-10).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        let g = grid();
        let s = seed(1, 1.0, DEFAULT_T0, &g).unwrap();
        match step_to_guarded(&s, 0.0, 1e-10, 1e-3) {
            Err(Error::BlowUp { t, .. }) => assert!(t < DEFAULT_T0),
            other => panic!("expected a blow-up, got {other:?}"),
        }
    }

    #[test]
    fn tail_matches_direct_sum_shape() {
        let g = grid();
        let s = seed(1, 1.0, DEFAULT_T0, &g).unwrap();
        assert!(s.tail.log_d < 0.0 && s.tail.dlog_d > 0.0);
        // the seeded Q decays roughly like e^{-s}, so ∫(s−T0)Q ≈ ∫Q
        let ratio = -s.tail.log_d / s.tail.dlog_d;
        assert!(ratio > 0.5 && ratio < 1.5, "{ratio}");
    }
}
