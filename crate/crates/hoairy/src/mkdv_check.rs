//! Scaling reduction from the Painlevé-II hierarchy to the integro-differential mKdV
//! hierarchy, checked numerically.
//!
//! With `t₁ = τt`, `t_{2n+1} = τ^{2n+1}/(2n+1)` and `v(t₁, t_{2n+1}|x) = u(t|x/τ)/τ`, where
//! `u` solves the Painlevé-II member for the weight `w(τ·)`, the field `v` solves
//! `∂v/∂t_{2n+1} = (L₋L₊)^n ∂v/∂t₁` for the weight `w`. Taking the u-grid to be the
//! v-grid divided by `τ` puts `v` on the same x-nodes for every τ.

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::fredholm::{det_halfline, DEFAULT_M_X, DEFAULT_M_Z};
use crate::hierarchy_cas::{evaluate_terms, member_terms, mkdv_member};
use crate::idpii_solver::{interpolate_cubic, seed, step_to_guarded, trajectory, FieldState, SolverConfig};
use crate::quadrature::composite;
use crate::weights::{make_fermi, SigmaQuadrature, Weight};

/// `v` and its `t₁`-derivatives on the v-grid at one `(t₁, t_{2n+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct MkdvFrame {
    pub n: u32,
    pub tau: f64,
    pub t1: f64,
    /// `t_{2n+1} = τ^{2n+1}/(2n+1)`.
    pub t_odd: f64,
    pub grid: SigmaQuadrature,
    /// `values[k][i] = ∂^k v/∂t₁^k (x_i)`, `k ≤ 2n+1`.
    pub values: Vec<Vec<f64>>,
}

impl MkdvFrame {
    pub fn bracket(&self, i: usize, j: usize) -> f64 {
        self.grid.weights.iter().zip(&self.values[i]).zip(&self.values[j]).map(|((s, a), b)| s * (a * b)).sum()
    }

    /// `∂^k v/∂t₁^k` at an arbitrary `x` inside the grid.
    pub fn value_at(&self, k: usize, x: f64) -> Result<f64> {
        interpolate_cubic(&self.grid.nodes, &self.values[k], x)
    }

    /// `(L₋L₊)^n ∂v/∂t₁` at every node.
    pub fn flow(&self) -> Result<Vec<f64>> {
        let member = mkdv_member(self.n)?;
        let terms = member_terms(&member);
        let rows: Vec<&[f64]> = self.values.iter().map(|v| v.as_slice()).collect();
        let mut out = vec![0.0; self.grid.len()];
        evaluate_terms(&terms, self.t1, &self.grid.nodes, &self.grid.weights, &rows, &mut out);
        let s = member.lhs_sign as f64;
        Ok(out.into_iter().map(|v| s * v).collect())
    }
}

pub fn t_odd(n: u32, tau: f64) -> f64 {
    tau.powi(2 * n as i32 + 1) / (2 * n + 1) as f64
}

/// The v-frame of a solver state whose grid is the v-grid divided by `tau`.
pub fn scaling_reduce(state: &FieldState, tau: f64) -> Result<MkdvFrame> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be positive")));
    }
    let derivs = state.all_derivatives()?;
    let values = derivs
        .into_iter()
        .enumerate()
        .map(|(k, row)| {
            let f = tau.powi(-(k as i32) - 1);
            row.into_iter().map(|u| f * u).collect()
        })
        .collect();
    let grid = SigmaQuadrature {
        nodes: state.grid.nodes.iter().map(|y| tau * y).collect(),
        weights: state.grid.weights.clone(),
        order: state.grid.order,
    };
    Ok(MkdvFrame { n: state.n, tau, t1: tau * state.t, t_odd: t_odd(state.n, tau), grid, values })
}

/// Solve for `u` on `v_grid / τ` and return the v-frame at `t₁`.
pub fn frame_at(
    n: u32,
    lambda: f64,
    v_grid: &SigmaQuadrature,
    tau: f64,
    t1: f64,
    cfg: &SolverConfig,
) -> Result<MkdvFrame> {
    let u_grid = v_grid.scaled(tau);
    let s = seed(n, lambda, cfg.t0, &u_grid)?;
    let st = step_to_guarded(&s, t1 / tau, cfg.tol, cfg.blowup)?;
    let mut frame = scaling_reduce(&st, tau)?;
    // undo the round trip τ·(x/τ) so both τ-runs share bit-identical nodes
    frame.grid.nodes.clone_from(&v_grid.nodes);
    Ok(frame)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MkdvResidual {
    pub delta_tau: f64,
    /// `∂v/∂t_{2n+1} − (L₋L₊)^n ∂v/∂t₁` per node.
    pub per_node: Vec<f64>,
    /// The same, interpolated to the requested `x`.
    pub at_x: f64,
}

/// Centered difference of `v` in `t_{2n+1}` (via τ ± δτ at fixed `t₁`) against the flow.
pub fn mkdv_residual(
    n: u32,
    w: &Weight,
    lambda: f64,
    tau: f64,
    delta_tau: f64,
    t1: f64,
    x: f64,
    cfg: &SolverConfig,
) -> Result<MkdvResidual> {
    if !(delta_tau > 0.0 && delta_tau < tau) {
        return Err(Error::InvalidArgument(format!("delta_tau = {delta_tau} must lie in (0, tau)")));
    }
    let v_grid = cfg.grid(w)?;
    let (centre, (plus, minus)) = rayon::join(
        || frame_at(n, lambda, &v_grid, tau, t1, cfg),
        || {
            rayon::join(
                || frame_at(n, lambda, &v_grid, tau + delta_tau, t1, cfg),
                || frame_at(n, lambda, &v_grid, tau - delta_tau, t1, cfg),
            )
        },
    );
    let (centre, plus, minus) = (centre?, plus?, minus?);
    let dt = t_odd(n, tau + delta_tau) - t_odd(n, tau - delta_tau);
    let flow = centre.flow()?;
    let per_node: Vec<f64> = plus.values[0]
        .iter()
        .zip(&minus.values[0])
        .zip(&flow)
        .map(|((p, m), f)| (p - m) / dt - f)
        .collect();
    let at_x = interpolate_cubic(&v_grid.nodes, &per_node, x)?;
    Ok(MkdvResidual { delta_tau, per_node, at_x })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualOrder {
    pub coarse: MkdvResidual,
    pub fine: MkdvResidual,
    /// `log₂(|r(δτ)| / |r(δτ/2)|)` at the requested point.
    pub order: f64,
}

pub fn residual_order(
    n: u32,
    w: &Weight,
    tau: f64,
    delta_tau: f64,
    t1: f64,
    x: f64,
    cfg: &SolverConfig,
) -> Result<ResidualOrder> {
    let coarse = mkdv_residual(n, w, 1.0, tau, delta_tau, t1, x, cfg)?;
    let fine = mkdv_residual(n, w, 1.0, tau, delta_tau / 2.0, t1, x, cfg)?;
    let order = (coarse.at_x.abs() / fine.at_x.abs()).log2();
    Ok(ResidualOrder { coarse, fine, order })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiDistribution {
    pub det: f64,
    /// `exp(−∫_{αt}^∞ (s−αt)⟨v,v⟩(s) ds)` from the v-frame at `τ = α`.
    pub via_mkdv: f64,
    pub diff: f64,
}

/// `F_n^α(t)` as a Fredholm determinant and through the mKdV frame with Fermi weight α = 1.
pub fn fermi_distribution(n: u32, alpha: f64, t: f64) -> Result<FermiDistribution> {
    let det = det_halfline(n, t, 1.0, &make_fermi(alpha)?, DEFAULT_M_X, DEFAULT_M_Z)?;
    let via_mkdv = fermi_via_mkdv(n, alpha, t, &SolverConfig::for_order(n))?;
    Ok(FermiDistribution { det, via_mkdv, diff: via_mkdv - det })
}

pub fn fermi_via_mkdv(n: u32, alpha: f64, t: f64, cfg: &SolverConfig) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must be positive")));
    }
    let v_grid = cfg.grid(&make_fermi(1.0)?)?;
    let u_grid = v_grid.scaled(alpha);
    // the u-grid widens like 1/α, and so must the seeding time
    let t0 = cfg.t0 / alpha.min(1.0);
    if t <= -t0 || t >= t0 {
        return Err(Error::InvalidArgument(format!("t = {t} outside the supported window (-{t0}, {t0})")));
    }
    let s0 = seed(n, 1.0, t0, &u_grid)?;
    // s-integral in the t₁ variable over [αt, αT₀], closed by the seeded tail
    let (a, b) = (alpha * t, alpha * t0);
    let panels = ((b - a).ceil() as usize).max(1);
    let rule = composite(a, b, panels, 20);
    let mut order: Vec<usize> = (0..rule.nodes.len()).collect();
    order.sort_by(|&i, &j| rule.nodes[j].total_cmp(&rule.nodes[i]));
    let ts: Vec<f64> = order.iter().map(|&i| rule.nodes[i] / alpha).collect();
    let states = trajectory(&s0, &ts, cfg.tol)?;
    let mut integral = 0.0;
    for (&i, st) in order.iter().zip(&states) {
        let frame_q = st.q() / (alpha * alpha);
        integral += rule.weights[i] * (rule.nodes[i] - a) * frame_q;
    }
    let tail = s0.tail;
    integral += -tail.log_d + (t0 - t) * tail.dlog_d;
    Ok((-integral).exp())
}

/// `(e_n, f_n) = (n/((n+1)(2n+1)), 2n²/((n+1)(2n+1)))`.
pub fn scaling_exponents(n: u32) -> Result<(Rational64, Rational64)> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let n = n as i64;
    let den = (n + 1) * (2 * n + 1);
    Ok((Rational64::new(n, den), Rational64::new(2 * n * n, den)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        assert_eq!(scaling_exponents(1).unwrap(), (Rational64::new(1, 6), Rational64::new(1, 3)));
        assert_eq!(scaling_exponents(2).unwrap(), (Rational64::new(2, 15), Rational64::new(8, 15)));
        for n in 1..=12 {
            let (e, f) = scaling_exponents(n).unwrap();
            assert_eq!(e + f, Rational64::new(n as i64, n as i64 + 1));
        }
        assert!(scaling_exponents(0).is_err());
    }

    #[test]
    fn unit_tau_is_the_identity() {
        let w = make_fermi(1.0).unwrap();
        let cfg = SolverConfig::default();
        let g = cfg.grid(&w).unwrap();
        let st = seed(1, 1.0, cfg.t0, &g).unwrap();
        let f = scaling_reduce(&st, 1.0).unwrap();
        assert_eq!(f.values[0], st.values[0]);
        assert_eq!(f.values[1], st.values[1]);
        assert_eq!(f.grid.nodes, st.grid.nodes);
        assert_eq!((f.t1, f.t_odd), (st.t, 1.0 / 3.0));
        assert!((t_odd(2, 1.0) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn bracket_scales_with_the_measure() {
        let w = make_fermi(1.0).unwrap();
        let cfg = SolverConfig::default();
        let g = cfg.grid(&w).unwrap();
        let tau = 1.3;
        let st = seed(1, 1.0, cfg.t0, &g.scaled(tau)).unwrap();
        let f = scaling_reduce(&st, tau).unwrap();
        // direct rule for ∫ v(x)² w′(x) dx with v = Ai(T₀ + x/τ)/τ on a finer grid
        let fine = crate::weights::sigma_quadrature(&w, 480).unwrap();
        let table = crate::specfun::shared_table(1).unwrap();
        let direct = fine.integrate(|x| {
            let a = table.eval(cfg.t0 + x / tau, 0).unwrap() / tau;
            a * a
        });
        assert!((f.bracket(0, 0) - direct).abs() < 1e-8);
        assert!((f.bracket(0, 0) - st.q() / (tau * tau)).abs() < 1e-15);
    }

    #[test]
    fn zero_lambda_residual_vanishes() {
        let w = make_fermi(1.0).unwrap();
        let r = mkdv_residual(1, &w, 0.0, 1.0, 1e-2, 0.0, 0.0, &SolverConfig::default()).unwrap();
        assert!(r.per_node.iter().all(|v| *v == 0.0));
    }
}
