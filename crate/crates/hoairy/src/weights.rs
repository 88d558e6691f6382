//! Weight functions `w` and quadrature for `dσ = w′(x) dx`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{composite_split, gauss_legendre};

type Map = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Family the weight was built from, used for labels and CLI round-trips.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightKind {
    Fermi { alpha: f64 },
    StepApprox { steepness: f64 },
    Custom,
}

/// A strictly increasing differentiable weight with exponentially decaying derivative.
///
/// The decay data promise `0 < w′(x) ≤ exp(−ω|x|)` for `|x| ≥ x0`.
#[derive(Clone)]
pub struct Weight {
    value: Map,
    derivative: Map,
    pub decay_rate: f64,
    pub decay_onset: f64,
    pub label: String,
    pub kind: WeightKind,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight")
            .field("label", &self.label)
            .field("decay_rate", &self.decay_rate)
            .field("decay_onset", &self.decay_onset)
            .finish()
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn logistic_density(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

impl Weight {
    /// A user supplied weight; call [`Weight::validate`] before trusting it.
    pub fn custom<V, D>(value: V, derivative: D, decay_rate: f64, decay_onset: f64, label: &str) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            decay_rate,
            decay_onset,
            label: label.to_string(),
            kind: WeightKind::Custom,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    /// `x ↦ w(τx)`.
    pub fn scaled(&self, tau: f64) -> Self {
        let v = self.value.clone();
        let d = self.derivative.clone();
        let kind = match self.kind {
            WeightKind::Fermi { alpha } => WeightKind::Fermi { alpha: alpha * tau },
            WeightKind::StepApprox { steepness } => WeightKind::StepApprox {
                steepness: steepness * tau,
            },
            WeightKind::Custom => WeightKind::Custom,
        };
        let label = match kind {
            WeightKind::Fermi { alpha } => format!("fermi:alpha={alpha}"),
            WeightKind::StepApprox { steepness } => format!("step-approx:k={steepness}"),
            WeightKind::Custom => format!("{}@tau={tau}", self.label),
        };
        Self {
            value: Arc::new(move |x| v(tau * x)),
            derivative: Arc::new(move |x| tau * d(tau * x)),
            decay_rate: self.decay_rate * tau,
            decay_onset: self.decay_onset / tau,
            label,
            kind,
        }
    }

    /// Half-width beyond which `w′ < eps`, by the decay data.
    pub fn tail_point(&self, eps: f64) -> f64 {
        self.decay_onset.max((1.0 / eps).ln() / self.decay_rate)
    }

    /// Sampled checks of monotonicity, limits, decay bound and unit mass.
    pub fn validate(&self) -> Result<()> {
        let om = self.decay_rate;
        let x0 = self.decay_onset;
        if !(om > 0.0) || !(x0 > 0.0) {
            return Err(Error::Weight(format!("decay data ω = {om}, x0 = {x0} must be positive")));
        }
        let big = x0 + 20.0 / om;
        let lo = self.value(-big);
        let hi = 1.0 - self.value(big);
        if !(lo < 1e-6 && hi < 1e-6) {
            return Err(Error::Weight(format!("limits w(-X) = {lo:e}, 1 - w(X) = {hi:e}")));
        }
        let m = 4001;
        let mut prev = f64::NEG_INFINITY;
        for k in 0..m {
            let x = -big + 2.0 * big * k as f64 / (m - 1) as f64;
            let v = self.value(x);
            // resolution limit of f64 near the saturated ends
            if !(v > prev) && v.min(1.0 - v) > 1e-12 {
                return Err(Error::Weight(format!("w not increasing at x = {x}")));
            }
            prev = v;
            let d = self.derivative(x);
            if !(d > 0.0) && (x.abs() < x0 || d < 0.0) {
                return Err(Error::Weight(format!("w'({x}) = {d} not positive")));
            }
            if x.abs() >= x0 && d > (-om * x.abs()).exp() * (1.0 + 1e-12) {
                return Err(Error::Weight(format!("decay bound violated at x = {x}")));
            }
        }
        let mass = self.mass(self.tail_point(1e-18));
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::Weight(format!("total mass {mass} differs from 1")));
        }
        Ok(())
    }

    /// `∫_{-X}^{X} w′ dx` by a fine composite rule.
    pub fn mass(&self, half_width: f64) -> f64 {
        let scale = 1.0 / self.decay_rate.max(1e-300);
        let panels = ((2.0 * half_width / scale).ceil() as usize).clamp(8, 20_000);
        let rule = composite_split(-half_width, half_width, 0.0, panels * 20, 20);
        rule.integrate(|x| self.derivative(x))
    }
}

/// Fermi factor `w_α(x) = e^{αx}/(1 + e^{αx})`.
pub fn make_fermi(alpha: f64) -> Result<Weight> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must be positive")));
    }
    // w′ = α e^{-α|x|}/(1+e^{-α|x|})² ≤ e^{-0.9α|x|} once α ≤ e^{0.1α|x|}
    let omega = 0.9 * alpha;
    let x0 = (1.1 * alpha.max(1.0).ln() / (0.1 * alpha)).max(1.0 / alpha);
    Ok(Weight {
        value: Arc::new(move |x| logistic(alpha * x)),
        derivative: Arc::new(move |x| alpha * logistic_density(alpha * x)),
        decay_rate: omega,
        decay_onset: x0,
        label: format!("fermi:alpha={alpha}"),
        kind: WeightKind::Fermi { alpha },
    })
}

/// Steep Fermi factor standing in for the zero-temperature step `χ_{R+}`.
pub fn make_smoothed_step(steepness: f64) -> Result<Weight> {
    let mut w = make_fermi(steepness)?;
    w.label = format!("step-approx:k={steepness}");
    w.kind = WeightKind::StepApprox { steepness };
    Ok(w)
}

/// Parse `fermi:alpha=1.0` or `step-approx:k=200`.
pub fn parse_weight(spec: &str) -> Result<Weight> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let param = |key: &str| -> Result<f64> {
        let (k, v) = rest
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("weight '{spec}': expected {key}=<value>")))?;
        if k.trim() != key {
            return Err(Error::Parse(format!("weight '{spec}': unknown parameter '{k}'")));
        }
        v.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("weight '{spec}': {e}")))
    };
    match name.trim() {
        "fermi" => make_fermi(param("alpha")?),
        "step-approx" => make_smoothed_step(param("k")?),
        other => Err(Error::Parse(format!("unknown weight family '{other}'"))),
    }
}

/// Quadrature for the probability measure `dσ = w′ dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

/// Nodes per panel of the composite rule behind [`sigma_quadrature`].
pub const SIGMA_PANEL_ORDER: usize = 20;

/// `m`-node rule for `dσ`: composite Gauss-Legendre on the interval where `w′ ≥ 1e-16`,
/// multiplied by `w′` and normalised to unit mass. A raw mass off by more than
/// `1e-10` means the rule cannot resolve `w′` and is rejected.
pub fn sigma_quadrature(w: &Weight, m: usize) -> Result<SigmaQuadrature> {
    sigma_quadrature_tol(w, m, 1e-10)
}

pub fn sigma_quadrature_tol(w: &Weight, m: usize, mass_tol: f64) -> Result<SigmaQuadrature> {
    sigma_quadrature_cut(w, m, 1e-16, mass_tol)
}

/// As [`sigma_quadrature_tol`] on the interval where `w′ ≥ eps`.
pub fn sigma_quadrature_cut(w: &Weight, m: usize, eps: f64, mass_tol: f64) -> Result<SigmaQuadrature> {
    if m < 4 {
        return Err(Error::InvalidArgument(format!("sigma quadrature needs m >= 4, got {m}")));
    }
    if !(eps > 0.0 && eps < 1e-2) {
        return Err(Error::InvalidArgument(format!("tail cut {eps} outside (0, 1e-2)")));
    }
    let half = w.tail_point(eps);
    let panels = m.div_ceil(SIGMA_PANEL_ORDER).max(1);
    let base = m / panels;
    let extra = m % panels;
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for p in 0..panels {
        let a = -half + 2.0 * half * p as f64 / panels as f64;
        let b = -half + 2.0 * half * (p + 1) as f64 / panels as f64;
        let q = base + usize::from(p < extra);
        let (g, gw) = gauss_legendre(q);
        for (x, wt) in g.iter().zip(&gw) {
            let xi = 0.5 * (a + b) + 0.5 * (b - a) * x;
            nodes.push(xi);
            weights.push(0.5 * (b - a) * wt * w.derivative(xi));
        }
    }
    let mass: f64 = weights.iter().sum();
    if (mass - 1.0).abs() > mass_tol {
        return Err(Error::Quadrature(format!(
            "{m}-node rule for {} has mass {mass:.12} (off by {:.2e})",
            w.label,
            (mass - 1.0).abs()
        )));
    }
    for v in weights.iter_mut() {
        *v /= mass;
    }
    Ok(SigmaQuadrature { nodes, weights, order: m })
}

impl SigmaQuadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Rule for `w(τ·)`: nodes divided by `τ`, weights unchanged.
    pub fn scaled(&self, tau: f64) -> Self {
        Self {
            nodes: self.nodes.iter().map(|x| x / tau).collect(),
            weights: self.weights.clone(),
            order: self.order,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fermi_basics() {
        let w = make_fermi(1.0).unwrap();
        assert_eq!(w.value(0.0), 0.5);
        assert_eq!(make_fermi(2.0).unwrap().derivative(0.0), 0.5);
        assert_abs_diff_eq!(w.mass(40.0), 1.0, epsilon = 1e-12);
        w.validate().unwrap();
        for a in [0.25, 1.0, 3.0, 50.0, 200.0] {
            make_fermi(a).unwrap().validate().unwrap();
        }
        assert!(make_fermi(0.0).is_err());
    }

    #[test]
    fn step_approximant_saturates() {
        let w = make_smoothed_step(50.0).unwrap();
        assert!(w.value(0.2) > 0.9999);
        assert!(w.value(-0.2) < 1e-4);
        assert_eq!(w.label, "step-approx:k=50");
    }

    #[test]
    fn parse_specs() {
        assert_eq!(parse_weight("fermi:alpha=1.5").unwrap().kind, WeightKind::Fermi { alpha: 1.5 });
        assert_eq!(
            parse_weight("step-approx:k=200").unwrap().kind,
            WeightKind::StepApprox { steepness: 200.0 }
        );
        assert!(parse_weight("fermi:beta=1").is_err());
        assert!(parse_weight("gauss:alpha=1").is_err());
        assert!(parse_weight("fermi:alpha=-1").is_err());
    }

    #[test]
    fn broken_weight_rejected() {
        let w = Weight::custom(|x| 0.5 + 0.5 * x.tanh(), |x| 0.5 / x.cosh().powi(2), 3.0, 0.5, "tanh");
        // 0.5 sech² x ≈ 2e^{-2|x|} is not bounded by e^{-3|x|}
        assert!(w.validate().is_err());
    }

    #[test]
    fn sigma_rule_mass_and_moments() {
        let w = make_fermi(1.0).unwrap();
        let q = sigma_quadrature(&w, 200).unwrap();
        assert_eq!(q.len(), 200);
        assert!(q.nodes.windows(2).all(|p| p[0] < p[1]));
        assert_abs_diff_eq!(q.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q.integrate(|_| 1.0), 1.0, epsilon = 1e-14);
        // ∫ w w′ dx = 1/2
        assert_abs_diff_eq!(q.integrate(|x| w.value(x)), 0.5, epsilon = 1e-8);
        assert!(sigma_quadrature(&w, 3).is_err());
    }

    #[test]
    fn scaled_rule_matches_scaled_weight() {
        let w = make_fermi(1.0).unwrap();
        let tau = 1.3;
        let q = sigma_quadrature(&w, 200).unwrap().scaled(tau);
        let ws = w.scaled(tau);
        // ∫ f(y) τ w′(τy) dy = ∫ f(x/τ) w′(x) dx
        let direct = ws.mass(ws.tail_point(1e-18));
        assert_abs_diff_eq!(direct, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.integrate(|y| y * y),
            sigma_quadrature(&w, 200).unwrap().integrate(|x| (x / tau).powi(2)), epsilon = 1e-13);
    }
}
