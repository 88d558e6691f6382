//! Higher order Airy functions
//!
//! `Ai_n(x) = (1/π) ∫_0^∞ cos(y^{2n+1}/(2n+1) + x y) dy`, evaluated through the
//! contour form `(1/2π) ∫_Γ exp(i ψ_n(λ, x)) dλ` with `ψ_n(λ, x) = λ^{2n+1}/(2n+1) + xλ`.
//!
//! The path is written as `λ(s) = s + i Y(s)`, `s ∈ R`:
//!
//! * `x ≥ 0`: a horizontal line through the two saddles nearest the real axis,
//!   `Y = max(|x|^{1/2n} sin(π/2n), h0)`.
//! * `x < 0`: `Y(s) = tan θ (s² − r²)/sqrt(s² + q²)` with `r = |x|^{1/2n}`, which
//!   crosses the real saddles `±r` and leaves along the rays of angle `θ` and `π − θ`.
//!
//! On both paths the integrand is trapezoid-summed after truncation where its
//! modulus has fallen 18 decades below the on-path maximum. The trapezoid rule is
//! spectrally accurate for these double-exponentially decaying integrands, so the
//! refinement test (halving the step) is a reliable convergence check.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Which half-axis the asymptotic formula describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `Ai_n(x)` for `x → +∞`.
    Positive,
    /// `Ai_n(−x)` for `x → +∞`.
    Negative,
}

/// Shape parameters of the integration path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    /// Asymptotic angle of the `x < 0` path as a fraction of `π/(2n+1)`; must lie in (0, 1).
    pub sector_fraction: f64,
    /// Lower bound for the width `q` of the hyperbola core.
    pub core_width: f64,
    /// Lower bound for the height of the `x ≥ 0` line.
    pub min_height: f64,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            sector_fraction: 0.5,
            core_width: 1.0,
            min_height: 0.8,
        }
    }
}

/// Contour + quadrature configuration producing `Ai_n` and its derivatives.
///
/// Immutable after construction; safe to share between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct HigherAiryEvaluator {
    n: u32,
    pub contour: ContourSpec,
    /// Initial number of trapezoid panels.
    pub quad_points: usize,
    /// Largest admissible number of panels before giving up.
    pub max_points: usize,
    /// The path is never followed beyond `|s| = truncation_radius`.
    pub truncation_radius: f64,
    /// Beyond `|x| > switch_x` the value (not the derivatives) comes from the
    /// leading-order asymptotics. Leading order only: the relative error there is
    /// of order `x^{-(2n+1)/2n}`, so this is an accuracy cliff.
    pub switch_x: f64,
    /// Convergence tolerance relative to the on-path integrand scale.
    pub tol: f64,
}

/// Output of one contour evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourValues {
    /// `Ai_n^{(j)}(x)`, `j = 0..=jmax`.
    pub values: Vec<f64>,
    /// Imaginary parts left over by the quadrature (zero in exact arithmetic).
    pub imag: Vec<f64>,
    /// Integrand scale `max |exp(iψ)|` on the path.
    pub scale: f64,
    /// Final number of trapezoid panels.
    pub points: usize,
    /// Truncation interval in the path parameter.
    pub interval: (f64, f64),
    /// Integrand modulus at the two truncation endpoints relative to the maximum.
    pub endpoint_ratio: (f64, f64),
}

const LOG_CUT: f64 = 41.44653167389282; // ln(1e18)

struct Path {
    n: u32,
    x: f64,
    kind: PathKind,
}

enum PathKind {
    Line { h: f64 },
    Hyperbola { tan: f64, r: f64, q: f64 },
}

impl Path {
    fn point(&self, s: f64) -> (Complex64, Complex64) {
        match self.kind {
            PathKind::Line { h } => (Complex64::new(s, h), Complex64::new(1.0, 0.0)),
            PathKind::Hyperbola { tan, r, q } => {
                let d = s * s + q * q;
                let sq = d.sqrt();
                let y = tan * (s * s - r * r) / sq;
                let dy = tan * s * (s * s + 2.0 * q * q + r * r) / (d * sq);
                (Complex64::new(s, y), Complex64::new(1.0, dy))
            }
        }
    }

    /// Real part of `i ψ_n(λ(s), x)`.
    fn log_modulus(&self, s: f64) -> f64 {
        let (lam, _) = self.point(s);
        (Complex64::i() * psi(self.n, self.x, lam)).re
    }
}

fn psi(n: u32, x: f64, lam: Complex64) -> Complex64 {
    let m = 2 * n + 1;
    lam.powu(m) / m as f64 + x * lam
}

impl HigherAiryEvaluator {
    /// Evaluator with the default configuration (`switch_x = 12`).
    pub fn new(n: u32) -> Self {
        assert!(n >= 1, "hierarchy index must be positive");
        Self {
            n,
            contour: ContourSpec::default(),
            quad_points: 64,
            max_points: 1 << 16,
            truncation_radius: 80.0,
            switch_x: 12.0,
            tol: 1e-13,
        }
    }

    /// Evaluator that never switches to the asymptotic formula.
    pub fn contour_only(n: u32) -> Self {
        Self {
            switch_x: f64::INFINITY,
            ..Self::new(n)
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    fn path(&self, x: f64) -> Path {
        let n = self.n;
        let r = x.abs().powf(1.0 / (2 * n) as f64);
        let kind = if x >= 0.0 {
            let h = (r * (PI / (2 * n) as f64).sin()).max(self.contour.min_height);
            PathKind::Line { h }
        } else {
            let theta = self.contour.sector_fraction * PI / (2 * n + 1) as f64;
            PathKind::Hyperbola {
                tan: theta.tan(),
                r,
                q: r.max(self.contour.core_width),
            }
        };
        Path { n, x, kind }
    }

    /// Asymptotic angles `(a, b)` of the path used at `x`.
    pub fn path_angles(&self, x: f64) -> (f64, f64) {
        match self.path(x).kind {
            PathKind::Line { .. } => (PI, 0.0),
            PathKind::Hyperbola { tan, .. } => (PI - tan.atan(), tan.atan()),
        }
    }

    fn truncate(&self, path: &Path, extra: &dyn Fn(f64) -> f64) -> Result<(f64, f64, f64)> {
        let g = |s: f64| path.log_modulus(s) + extra(s);
        let r = path.x.abs().powf(1.0 / (2 * path.n) as f64);
        let step = 0.05 * r.max(1.0);
        let mut gmax = g(0.0);
        let mut brackets = [(0.0f64, 0.0f64); 2];
        for (k, dir) in [1.0f64, -1.0].into_iter().enumerate() {
            let mut s_prev = 0.0;
            let mut s = 0.0;
            loop {
                s += dir * step;
                if s.abs() > self.truncation_radius {
                    return Err(Error::Truncation {
                        n: self.n,
                        x: path.x,
                        radius: self.truncation_radius,
                    });
                }
                let v = g(s);
                if v > gmax {
                    gmax = v;
                }
                if s.abs() > r + 1.0 && v < gmax - LOG_CUT {
                    break;
                }
                s_prev = s;
            }
            brackets[k] = (s_prev, s);
        }
        // g is decreasing on the tails; locate the cuts by bisection
        let mut ends = [0.0f64; 2];
        for (k, &(inner, outer)) in brackets.iter().enumerate() {
            let (mut lo, mut hi) = (inner, outer);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if g(mid) < gmax - LOG_CUT {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            ends[k] = hi;
        }
        Ok((ends[1], ends[0], gmax))
    }

    /// `Ai_n^{(j)}(x)` for `j = 0..=jmax` by contour quadrature, with diagnostics.
    pub fn contour_values(&self, x: f64, jmax: usize) -> Result<ContourValues> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("x = {x} is not finite")));
        }
        let path = self.path(x);
        let jm = jmax as f64;
        let extra = |s: f64| {
            if jmax == 0 {
                0.0
            } else {
                let (lam, dl) = path.point(s);
                jm * lam.norm().max(1e-300).ln() + dl.norm().ln()
            }
        };
        let (a, b, shift) = self.truncate(&path, &extra)?;
        let g0max = if jmax == 0 {
            shift
        } else {
            self.truncate(&path, &|_| 0.0)?.2
        };
        let integrand = |s: f64, acc: &mut [Complex64]| {
            let (lam, dl) = path.point(s);
            let e = (Complex64::i() * psi(self.n, x, lam) - shift).exp() * dl;
            let il = Complex64::i() * lam;
            let mut term = e;
            for slot in acc.iter_mut() {
                *slot += term;
                term *= il;
            }
        };

        let mut panels = self.quad_points.max(8);
        let mut h = (b - a) / panels as f64;
        let mut sums = vec![Complex64::new(0.0, 0.0); jmax + 1];
        integrand(a, &mut sums);
        integrand(b, &mut sums);
        for v in sums.iter_mut() {
            *v *= 0.5;
        }
        for k in 1..panels {
            integrand(a + k as f64 * h, &mut sums);
        }
        let mut prev: Vec<Complex64> = sums.iter().map(|v| v * h).collect();
        // in units of exp(shift); log-convexity in j bounds every order by the two ends
        let scale = (b - a) * (g0max - shift).exp().max(1.0);
        loop {
            if panels * 2 > self.max_points {
                return Err(Error::NonConvergence {
                    n: self.n,
                    x,
                    residual: f64::NAN,
                    points: panels,
                });
            }
            let mut mids = vec![Complex64::new(0.0, 0.0); jmax + 1];
            for k in 0..panels {
                integrand(a + (k as f64 + 0.5) * h, &mut mids);
            }
            for (s, m) in sums.iter_mut().zip(&mids) {
                *s += m;
            }
            panels *= 2;
            h *= 0.5;
            let cur: Vec<Complex64> = sums.iter().map(|v| v * h).collect();
            let resid = cur
                .iter()
                .zip(&prev)
                .map(|(c, p)| (c - p).norm())
                .fold(0.0, f64::max);
            prev = cur;
            if resid <= self.tol * scale {
                break;
            }
            if panels * 2 > self.max_points {
                return Err(Error::NonConvergence {
                    n: self.n,
                    x,
                    residual: resid * shift.exp() / (2.0 * PI),
                    points: panels,
                });
            }
        }
        let factor = shift.exp() / (2.0 * PI);
        let values = prev.iter().map(|v| v.re * factor).collect();
        let imag = prev.iter().map(|v| v.im * factor).collect();
        let ratio_a = (path.log_modulus(a) - g0max).exp();
        let ratio_b = (path.log_modulus(b) - g0max).exp();
        Ok(ContourValues {
            values,
            imag,
            scale: g0max.exp(),
            points: panels,
            interval: (a, b),
            endpoint_ratio: (ratio_a, ratio_b),
        })
    }

    /// `Ai_n(x)`.
    pub fn ai(&self, x: f64) -> Result<f64> {
        self.ai_deriv(x, 0)
    }

    /// `Ai_n^{(j)}(x)`, `0 ≤ j ≤ 2n`.
    pub fn ai_deriv(&self, x: f64, j: usize) -> Result<f64> {
        if j > 2 * self.n as usize {
            return Err(Error::InvalidArgument(format!(
                "derivative order {j} exceeds 2n = {}",
                2 * self.n
            )));
        }
        if j == 0 && x.abs() > self.switch_x {
            let side = if x > 0.0 { Side::Positive } else { Side::Negative };
            return Ok(ai_asymptotic(self.n, x.abs(), side));
        }
        Ok(self.contour_values(x, j)?.values[j])
    }

    /// `[Ai_n(x), Ai_n'(x), …, Ai_n^{(jmax)}(x)]` from one contour pass (no asymptotic switch).
    pub fn ai_all(&self, x: f64, jmax: usize) -> Result<Vec<f64>> {
        Ok(self.contour_values(x, jmax)?.values)
    }
}

/// `Ai_n(x)` with the default evaluator.
pub fn ai(n: u32, x: f64) -> Result<f64> {
    HigherAiryEvaluator::new(n).ai(x)
}

/// `Ai_n^{(j)}(x)` with the default evaluator.
pub fn ai_deriv(n: u32, x: f64, j: usize) -> Result<f64> {
    HigherAiryEvaluator::new(n).ai_deriv(x, j)
}

/// Leading-order behaviour of `Ai_n(x)` (positive side) or `Ai_n(−x)` (negative side), `x > 0`.
///
/// Positive side:
/// `c_n (nπ)^{-1/2} x^{-(2n-1)/4n} exp(-(2n/(2n+1)) sin(π/2n) x^{(2n+1)/2n}) cos φ_n(x)`
/// with `φ_n(x) = (2n/(2n+1)) x^{(2n+1)/2n} cos(π/2n) − π/4 + π/4n`, `c_1 = 1/2`, `c_n = 1` for `n ≥ 2`
/// (for `n = 1` the two dominant saddles merge into one).
pub fn ai_asymptotic(n: u32, x: f64, side: Side) -> f64 {
    let nf = n as f64;
    let p = (2.0 * nf + 1.0) / (2.0 * nf);
    let amp = (nf * PI).powf(-0.5) * x.powf(-(2.0 * nf - 1.0) / (4.0 * nf));
    let big = 2.0 * nf / (2.0 * nf + 1.0) * x.powf(p);
    match side {
        Side::Negative => amp * (big - PI / 4.0).cos(),
        Side::Positive => {
            let c = if n == 1 { 0.5 } else { 1.0 };
            let decay = (-(big * (PI / (2.0 * nf)).sin())).exp();
            c * amp * decay * asymptotic_phase(n, x).cos()
        }
    }
}

/// The phase `φ_n(x)` of the positive-side asymptotics.
pub fn asymptotic_phase(n: u32, x: f64) -> f64 {
    let nf = n as f64;
    let p = (2.0 * nf + 1.0) / (2.0 * nf);
    2.0 * nf / (2.0 * nf + 1.0) * x.powf(p) * (PI / (2.0 * nf)).cos() + 0.5 * (-PI / 2.0 + PI / (2.0 * nf))
}

/// Piecewise Chebyshev table of `Ai_n^{(j)}`, `j = 0..=jmax`, on `[lo, hi]`.
///
/// Built once from contour values and checked against fresh contour evaluations at
/// one off-node point per panel.
#[derive(Debug, Clone)]
pub struct AiryTable {
    n: u32,
    lo: f64,
    width: f64,
    jmax: usize,
    // coeffs[panel][j][k]
    coeffs: Vec<Vec<Vec<f64>>>,
    evaluator: HigherAiryEvaluator,
}

const TABLE_DEGREE: usize = 24;
const TABLE_WIDTH: f64 = 0.5;

impl AiryTable {
    pub fn new(evaluator: &HigherAiryEvaluator, lo: f64, hi: f64, jmax: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidArgument(format!("empty table range [{lo}, {hi}]")));
        }
        let ev = HigherAiryEvaluator {
            switch_x: f64::INFINITY,
            ..evaluator.clone()
        };
        let panels = ((hi - lo) / TABLE_WIDTH).ceil() as usize;
        let m = TABLE_DEGREE + 1;
        let cheb: Vec<f64> = (0..m)
            .map(|k| (PI * (k as f64 + 0.5) / m as f64).cos())
            .collect();
        let coeffs: Vec<Result<Vec<Vec<f64>>>> = (0..panels)
            .into_par_iter()
            .map(|p| {
                let a = lo + p as f64 * TABLE_WIDTH;
                let mid = a + 0.5 * TABLE_WIDTH;
                let mut samples = vec![vec![0.0; m]; jmax + 1];
                for (k, c) in cheb.iter().enumerate() {
                    let v = ev.ai_all(mid + 0.5 * TABLE_WIDTH * c, jmax)?;
                    for j in 0..=jmax {
                        samples[j][k] = v[j];
                    }
                }
                let mut out = Vec::with_capacity(jmax + 1);
                for samp in samples {
                    let mut c = vec![0.0; m];
                    for (i, ci) in c.iter_mut().enumerate() {
                        let s: f64 = samp
                            .iter()
                            .enumerate()
                            .map(|(k, f)| f * (PI * i as f64 * (k as f64 + 0.5) / m as f64).cos())
                            .sum();
                        *ci = 2.0 * s / m as f64;
                    }
                    c[0] *= 0.5;
                    out.push(c);
                }
                // off-node check
                let xc = a + 0.3172 * TABLE_WIDTH;
                let direct = ev.ai_all(xc, jmax)?;
                for j in 0..=jmax {
                    let approx = clenshaw(&out[j], (xc - mid) / (0.5 * TABLE_WIDTH));
                    let err = (approx - direct[j]).abs();
                    let tol = 1e-12 * (1.0 + direct[j].abs());
                    if err > tol {
                        return Err(Error::Interpolation { x: xc, error: err, tol });
                    }
                }
                Ok(out)
            })
            .collect();
        let coeffs = coeffs.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n: evaluator.n,
            lo,
            width: TABLE_WIDTH,
            jmax,
            coeffs,
            evaluator: ev,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.lo + self.width * self.coeffs.len() as f64)
    }

    /// `Ai_n^{(j)}(x)`; falls back to the contour outside the tabulated range.
    pub fn eval(&self, x: f64, j: usize) -> Result<f64> {
        if j > self.jmax {
            return Err(Error::InvalidArgument(format!(
                "table holds derivatives up to {}, asked for {j}",
                self.jmax
            )));
        }
        let pos = (x - self.lo) / self.width;
        if pos < 0.0 || pos >= self.coeffs.len() as f64 {
            return Ok(self.evaluator.ai_all(x, j)?[j]);
        }
        let p = pos as usize;
        let mid = self.lo + (p as f64 + 0.5) * self.width;
        Ok(clenshaw(&self.coeffs[p][j], (x - mid) / (0.5 * self.width)))
    }

    /// Table value without the out-of-range fallback; `None` outside.
    pub fn get(&self, x: f64, j: usize) -> Option<f64> {
        let pos = (x - self.lo) / self.width;
        if j > self.jmax || pos < 0.0 || pos >= self.coeffs.len() as f64 {
            return None;
        }
        let p = pos as usize;
        let mid = self.lo + (p as f64 + 0.5) * self.width;
        Some(clenshaw(&self.coeffs[p][j], (x - mid) / (0.5 * self.width)))
    }
}

fn clenshaw(c: &[f64], u: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * u * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    u * b1 - b2 + c[0]
}

/// Smallest `a` beyond which the positive-side envelope of `|Ai_n|` stays below `eps`.
pub fn decay_point(n: u32, eps: f64) -> f64 {
    let nf = n as f64;
    let p = (2.0 * nf + 1.0) / (2.0 * nf);
    let c = if n == 1 { 0.5 } else { 1.0 };
    let envelope = |x: f64| {
        c * (nf * PI).powf(-0.5)
            * x.powf(-(2.0 * nf - 1.0) / (4.0 * nf))
            * (-(2.0 * nf / (2.0 * nf + 1.0) * (PI / (2.0 * nf)).sin() * x.powf(p))).exp()
    };
    let (mut lo, mut hi) = (1.0, 400.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if envelope(mid) > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Range of the process-wide tables returned by [`shared_table`].
pub const SHARED_TABLE_RANGE: (f64, f64) = (-80.0, 80.0);

/// Process-wide table of `Ai_n^{(j)}`, `j ≤ 2n`, on [`SHARED_TABLE_RANGE`], built on first use.
pub fn shared_table(n: u32) -> Result<Arc<AiryTable>> {
    static TABLES: OnceLock<Mutex<HashMap<u32, Arc<AiryTable>>>> = OnceLock::new();
    if n == 0 {
        return Err(Error::InvalidArgument("order n must be at least 1".into()));
    }
    let map = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(t) = guard.get(&n) {
        return Ok(t.clone());
    }
    let (lo, hi) = SHARED_TABLE_RANGE;
    let table = Arc::new(AiryTable::new(&HigherAiryEvaluator::contour_only(n), lo, hi, 2 * n as usize)?);
    guard.insert(n, table.clone());
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn classical_values_at_zero() {
        let ev = HigherAiryEvaluator::new(1);
        assert_abs_diff_eq!(ev.ai(0.0).unwrap(), 0.355_028_053_887_817_2, epsilon = 1e-14);
        assert_abs_diff_eq!(ev.ai_deriv(0.0, 1).unwrap(), -0.258_819_403_792_806_8, epsilon = 1e-14);
    }

    #[test]
    fn derivative_zero_is_ai() {
        for n in 1..=3 {
            let ev = HigherAiryEvaluator::new(n);
            for &x in &[-13.0, -2.5, 0.0, 1.5, 13.0] {
                assert_eq!(ev.ai_deriv(x, 0).unwrap(), ev.ai(x).unwrap());
            }
        }
    }

    #[test]
    fn derivative_cap() {
        let ev = HigherAiryEvaluator::new(2);
        assert!(ev.ai_deriv(0.0, 4).is_ok());
        assert!(matches!(ev.ai_deriv(0.0, 5), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn imaginary_part_vanishes() {
        for n in 1..=4 {
            let ev = HigherAiryEvaluator::new(n);
            for &x in &[-20.0, -3.0, -0.1, 0.0, 0.7, 5.0, 20.0] {
                let c = ev.contour_values(x, 0).unwrap();
                assert!(c.imag[0].abs() <= 1e-12 * c.scale.max(c.values[0].abs()), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn endpoints_are_negligible() {
        for n in 1..=3 {
            let ev = HigherAiryEvaluator::new(n);
            for &x in &[-30.0, -1.0, 0.0, 2.0, 30.0] {
                let c = ev.contour_values(x, 0).unwrap();
                assert!(c.endpoint_ratio.0 < 1e-16 && c.endpoint_ratio.1 < 1e-16);
            }
        }
    }

    #[test]
    fn angles_in_sectors() {
        for n in 1..=4 {
            let ev = HigherAiryEvaluator::new(n);
            let m = (2 * n + 1) as f64;
            for &x in &[-5.0, 5.0] {
                let (a, b) = ev.path_angles(x);
                assert!(a > 2.0 * n as f64 * PI / m && a <= PI);
                assert!((0.0..PI / m).contains(&b));
            }
        }
    }

    #[test]
    fn positive_asymptotics_n1() {
        // Ai(x) ~ e^{-ζ}/(2√π x^{1/4}), ζ = 2x^{3/2}/3
        let x: f64 = 9.0;
        let z = 2.0 / 3.0 * x.powf(1.5);
        let lead = (-z).exp() / (2.0 * PI.sqrt() * x.powf(0.25));
        assert_abs_diff_eq!(ai_asymptotic(1, x, Side::Positive), lead, epsilon = 1e-20);
        assert_abs_diff_eq!(asymptotic_phase(1, x), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn table_matches_contour() {
        let ev = HigherAiryEvaluator::contour_only(2);
        let t = AiryTable::new(&ev, -6.0, 6.0, 2).unwrap();
        for &x in &[-5.9, -1.234, 0.0, 3.3, 5.99] {
            for j in 0..=2 {
                assert_abs_diff_eq!(t.eval(x, j).unwrap(), ev.ai_all(x, j).unwrap()[j], epsilon = 1e-13);
            }
        }
        // outside the range the contour is used
        assert_eq!(t.eval(7.5, 1).unwrap(), ev.ai_all(7.5, 1).unwrap()[1]);
        assert!(t.get(7.5, 1).is_none());
    }

    #[test]
    fn decay_point_bounds_values() {
        for n in 1..=3 {
            let a = decay_point(n, 1e-9);
            for k in 0..20 {
                let x = a + 0.37 * k as f64;
                assert!(ai(n, x).unwrap().abs() < 2e-9, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn shared_table_is_cached() {
        let start = std::time::Instant::now();
        let a = shared_table(2).unwrap();
        let b = shared_table(2).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        eprintln!("table n=2 built in {:?}", start.elapsed());
        let ev = HigherAiryEvaluator::contour_only(2);
        for &x in &[-79.3, -33.3, 0.1, 41.7] {
            assert_abs_diff_eq!(a.eval(x, 0).unwrap(), ev.ai(x).unwrap(), epsilon = 1e-13);
        }
    }
}
