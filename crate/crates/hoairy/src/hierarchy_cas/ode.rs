//! Explicit ODE forms `u^{(k)} = F(t, x, u, …)` compiled from hierarchy members.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::calculus::diff_diag;
use super::expr::*;
use super::members::{check_local, HierarchyMember, MemberKind};
use super::text::{field_name, parse_expr, render_expr};
use crate::error::{Error, Result};

/// One term `coeff · (t+x)^p · u^{(a)} · Π⟨u^{(i)}, u^{(j)}⟩` of an explicit right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeTerm {
    pub coeff: BigRational,
    pub value: f64,
    pub derivative_order: u32,
    pub brackets: Vec<BracketFactor>,
    pub t_plus_x_power: u32,
}

/// `u^{(order)} = Σ terms`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeForm {
    pub n: u32,
    pub order: u32,
    pub rhs: DiagExpr,
    pub terms: Vec<OdeTerm>,
}

fn highest(e: &DiagExpr) -> u32 {
    let slot = e
        .iter()
        .map(|(k, _)| match k.slot {
            Slot::D(a) => a,
            Slot::Unit => 0,
        })
        .max()
        .unwrap_or(0);
    let br = e
        .iter()
        .flat_map(|(k, _)| k.scalar.brackets.iter().map(|b| b.j))
        .max()
        .unwrap_or(0);
    slot.max(br)
}

/// Solve `e = 0` for its highest derivative, which must occur exactly once and linearly.
fn solve_for_highest(n: u32, e: &DiagExpr) -> Result<OdeForm> {
    let order = highest(e);
    let lead_key = DiagKey::field(order);
    let lead = e.coeff(&lead_key);
    if lead.is_zero() || !lead.im.is_zero() {
        return Err(Error::Algebra(format!("highest derivative {order} does not appear linearly and alone")));
    }
    let mut rest = DiagExpr::zero();
    for (k, c) in e.iter() {
        if *k == lead_key {
            continue;
        }
        let touches = k.slot == Slot::D(order) || k.scalar.brackets.iter().any(|b| b.j == order);
        if touches {
            return Err(Error::Algebra(format!("derivative {order} enters nonlinearly")));
        }
        rest.add_term(k.clone(), c.clone());
    }
    let rhs = rest.scale(&(-Coeff::one() / lead));
    OdeForm::from_rhs(n, order, rhs)
}

impl OdeForm {
    fn from_rhs(n: u32, order: u32, rhs: DiagExpr) -> Result<Self> {
        check_local(&rhs)?;
        let mut keys: Vec<(&DiagKey, &Coeff)> = rhs.iter().collect();
        keys.sort_by(|a, b| super::members::display_order(a.0, b.0));
        let terms = keys
            .into_iter()
            .map(|(k, c)| OdeTerm {
                coeff: c.re.clone(),
                value: c.re.to_f64().unwrap_or(f64::NAN),
                derivative_order: match k.slot {
                    Slot::D(a) => a,
                    Slot::Unit => 0,
                },
                brackets: k.scalar.brackets.clone(),
                t_plus_x_power: k.tx,
            })
            .collect();
        Ok(Self { n, order, rhs, terms })
    }

    /// Highest derivative order that the right-hand side reads (slot or bracket).
    pub fn max_input_order(&self) -> u32 {
        highest(&self.rhs)
    }

    pub fn render(&self) -> String {
        format!("{} = {}", field_name('u', self.order), render_expr(&self.rhs, 'u'))
    }

    pub fn parse(n: u32, s: &str) -> Result<Self> {
        let (lhs, rhs) = s
            .split_once('=')
            .ok_or_else(|| Error::Parse("expected 'u^(k) = ...'".into()))?;
        let l = parse_expr(lhs, 'u')?;
        let order = match l.iter().next() {
            Some((k, c)) if l.len() == 1 && c.is_one() && k.tx == 0 && k.scalar.is_one() => match k.slot {
                Slot::D(a) => a,
                Slot::Unit => return Err(Error::Parse("left side must be a derivative of u".into())),
            },
            _ => return Err(Error::Parse("left side must be a single derivative of u".into())),
        };
        Self::from_rhs(n, order, parse_expr(rhs, 'u')?)
    }

    /// The member `lhs_sign (t+x) u = rhs` equivalent to this form.
    pub fn to_member(&self) -> Result<HierarchyMember> {
        if self.order != 2 * self.n {
            return Err(Error::Algebra("only order-2n forms correspond to members".into()));
        }
        let tx_key = DiagKey { slot: Slot::D(0), tx: 1, scalar: Scalar::one() };
        let c = self.rhs.coeff(&tx_key);
        let sign = if c == real(1) {
            1
        } else if c == real(-1) {
            -1
        } else {
            return Err(Error::Algebra("the (t+x)u coefficient must be ±1".into()));
        };
        let eq = DiagExpr::single(DiagKey::field(self.order), Coeff::one()).sub(&self.rhs);
        let rhs = eq.add(&DiagExpr::single(tx_key, real(sign as i64)));
        HierarchyMember::new(self.n, MemberKind::Painleve2, sign, rhs)
    }

    /// Evaluate the right-hand side at every node. `derivs[j][i]` holds `u^{(j)}(t|x_i)` for
    /// `j ≤ max_input_order()`; `sigma[i]` are the dσ weights at the nodes `xs`.
    pub fn evaluate(&self, t: f64, xs: &[f64], sigma: &[f64], derivs: &[&[f64]], out: &mut [f64]) {
        evaluate_terms(&self.terms, t, xs, sigma, derivs, out)
    }
}

/// Numeric evaluation shared by ODE forms and member right-hand sides.
pub fn evaluate_terms(terms: &[OdeTerm], t: f64, xs: &[f64], sigma: &[f64], derivs: &[&[f64]], out: &mut [f64]) {
    let top = derivs.len();
    let mut br = vec![vec![f64::NAN; top]; top];
    for t in terms {
        for b in &t.brackets {
            let (i, j) = (b.i as usize, b.j as usize);
            if br[i][j].is_nan() {
                br[i][j] = sigma.iter().zip(derivs[i].iter()).zip(derivs[j].iter()).map(|((s, a), b)| s * a * b).sum();
            }
        }
    }
    for v in out.iter_mut() {
        *v = 0.0;
    }
    for term in terms {
        let scal = term.value * term.brackets.iter().map(|b| br[b.i as usize][b.j as usize]).product::<f64>();
        let field = derivs[term.derivative_order as usize];
        for (k, v) in out.iter_mut().enumerate() {
            let tx = if term.t_plus_x_power == 0 { 1.0 } else { (t + xs[k]).powi(term.t_plus_x_power as i32) };
            *v += scal * tx * field[k];
        }
    }
}

/// `u^{(2n)} = F(…)` from a Painlevé-II member.
pub fn to_ode(m: &HierarchyMember) -> Result<OdeForm> {
    if m.kind != MemberKind::Painleve2 {
        return Err(Error::Algebra("only Painlevé-II members compile to an ODE".into()));
    }
    let eq = m.rhs.sub(&DiagExpr::single(
        DiagKey { slot: Slot::D(0), tx: 1, scalar: Scalar::one() },
        real(m.lhs_sign as i64),
    ));
    solve_for_highest(m.n, &eq)
}

/// `u^{(2n+1)} = G(…)` obtained by differentiating a Painlevé-II member once in t.
pub fn differentiated_ode(m: &HierarchyMember) -> Result<OdeForm> {
    if m.kind != MemberKind::Painleve2 {
        return Err(Error::Algebra("only Painlevé-II members compile to an ODE".into()));
    }
    let eq = m.rhs.sub(&DiagExpr::single(
        DiagKey { slot: Slot::D(0), tx: 1, scalar: Scalar::one() },
        real(m.lhs_sign as i64),
    ));
    solve_for_highest(m.n, &diff_diag(&eq))
}

/// Numeric terms of a member's right-hand side (for mKdV residuals).
pub fn member_terms(m: &HierarchyMember) -> Vec<OdeTerm> {
    m.terms()
        .into_iter()
        .map(|t| OdeTerm {
            value: t.coeff.to_f64().unwrap_or(f64::NAN),
            coeff: t.coeff,
            derivative_order: t.derivative_order,
            brackets: t.brackets,
            t_plus_x_power: t.t_plus_x_power,
        })
        .collect()
}
