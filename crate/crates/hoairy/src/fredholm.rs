//! Fredholm determinants of the finite-temperature higher order Airy kernel
//!
//! `K_{t,n}(x, y) = ∫ Ai_n(x+z+t) Ai_n(z+y+t) w(z) dz` on `L²(0, ∞)`.
//!
//! Both determinant routes factor the kernel as `G Gᵀ` with
//! `G[i][k] = √ω_i Ai_n(x_i + z_k + t) √(ω_k w(z_k))`. The half-line route takes the
//! determinant of `I − λ G Gᵀ` (size `m_x`), the σ-side route that of `I − λ Hᵀ H`
//! built on independent z and y rules (size `m_z`).

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{composite, composite_on_edges, Rule};
use crate::specfun::{decay_point, shared_table, AiryTable};
use crate::weights::Weight;

/// Where the weight is treated as zero on the left.
const WEIGHT_EPS: f64 = 1e-16;
/// Where a single `Ai_n` factor is treated as zero on the right.
const AIRY_EPS: f64 = 1e-9;
/// Eigenvalues above `1 + SPECTRUM_TOL` are reported as an assembly failure.
pub const SPECTRUM_TOL: f64 = 1e-6;

const X_ORDER: usize = 16;
const Z_ORDER: usize = 16;
const SIGMA_Z_ORDER: usize = 20;
const Y_ORDER: usize = 12;

pub const DEFAULT_M_X: usize = 160;
pub const DEFAULT_M_Z: usize = 240;
pub const DEFAULT_SIGMA_M_Z: usize = 300;
pub const DEFAULT_M_Y: usize = 240;
pub const DEFAULT_STEP_M: usize = 120;

/// Nyström matrix `λ √ω_i K(x_i, x_j) √ω_j` with its quadrature metadata.
#[derive(Debug, Clone)]
pub struct KernelDiscretization {
    pub n: u32,
    pub t: f64,
    pub lambda: f64,
    pub x_nodes: Vec<f64>,
    pub x_weights: Vec<f64>,
    pub z_nodes: Vec<f64>,
    pub z_weights: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

impl KernelDiscretization {
    pub fn symmetry_defect(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Determinant of `I − matrix` with the spectrum check.
    pub fn determinant(&self) -> Result<DetResult> {
        det_from_matrix(&self.matrix, self.lambda)
    }
}

/// A determinant together with its logarithm and the extreme eigenvalues of the
/// discretized `λK`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetResult {
    pub det: f64,
    pub logdet: f64,
    pub min_eig: f64,
    pub max_eig: f64,
    pub size: usize,
}

fn det_from_matrix(m: &DMatrix<f64>, lambda: f64) -> Result<DetResult> {
    let size = m.nrows();
    if size == 0 {
        return Ok(DetResult { det: 1.0, logdet: 0.0, min_eig: 0.0, max_eig: 0.0, size });
    }
    let eig = SymmetricEigen::new(m.clone()).eigenvalues;
    let max_eig = eig.max();
    let min_eig = eig.min();
    if (0.0..=1.0).contains(&lambda) && max_eig > 1.0 + SPECTRUM_TOL {
        return Err(Error::Spectrum { eigenvalue: max_eig });
    }
    let mut logdet = 0.0;
    let mut sign = 1.0;
    for &mu in eig.iter() {
        let f = 1.0 - mu;
        if f < 0.0 {
            sign = -sign;
        }
        logdet += f.abs().ln();
    }
    Ok(DetResult { det: sign * logdet.exp(), logdet, min_eig, max_eig, size })
}

fn check_common(t: f64, lambda: f64, sizes: &[usize]) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t = {t}")));
    }
    if !(lambda.abs() <= 1.0) {
        return Err(Error::InvalidArgument(format!("|lambda| must be at most 1, got {lambda}")));
    }
    if let Some(m) = sizes.iter().find(|&&m| m < 8) {
        return Err(Error::InvalidArgument(format!("node count {m} below 8")));
    }
    Ok(())
}

/// Composite rule on `[lo, hi]` with about `m` nodes, panel edges at `split` and at
/// `0, ±s, ±2s, …, ±32s` (`s` the weight's transition width) so that steep weights
/// are resolved.
fn z_rule(lo: f64, hi: f64, split: f64, w: &Weight, m: usize, order: usize) -> Rule {
    let panels = m.div_ceil(order).max(1);
    let s = 1.0 / w.decay_rate;
    let mut cuts = vec![0.0];
    for k in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
        cuts.push(k * s);
        cuts.push(-k * s);
    }
    let mut edges: Vec<f64> = Vec::with_capacity(panels + 12);
    let h = (hi - lo) / panels as f64;
    let mut grid: Vec<f64> = if split > lo && split < hi {
        let left = (((split - lo) / (hi - lo)) * panels as f64).round().clamp(1.0, (panels.max(2) - 1) as f64) as usize;
        let right = panels.max(2) - left;
        let mut g: Vec<f64> = (0..=left).map(|k| lo + (split - lo) * k as f64 / left as f64).collect();
        g.extend((1..=right).map(|k| split + (hi - split) * k as f64 / right as f64));
        g
    } else {
        (0..=panels).map(|k| lo + h * k as f64).collect()
    };
    grid.extend(cuts.into_iter().filter(|&c| c > lo && c < hi));
    grid.sort_by(|a, b| a.total_cmp(b));
    for e in grid {
        if edges.last().is_none_or(|&l| e > l + 1e-9) {
            edges.push(e);
        }
    }
    composite_on_edges(&edges, order)
}

/// Kernel and determinant evaluator for a fixed order `n`, sharing one Airy table.
#[derive(Debug, Clone)]
pub struct Fredholm {
    n: u32,
    table: Arc<AiryTable>,
    decay: f64,
}

impl Fredholm {
    pub fn new(n: u32) -> Result<Self> {
        Ok(Self { n, table: shared_table(n)?, decay: decay_point(n, AIRY_EPS) })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Point beyond which a single `Ai_n` factor is negligible.
    pub fn decay(&self) -> f64 {
        self.decay
    }

    fn ai(&self, x: f64) -> Result<f64> {
        if x > self.decay + 40.0 {
            return Ok(0.0);
        }
        self.table.eval(x, 0)
    }

    /// z-range `[lo, hi]` where `w(z) Ai_n(·+z+t)²` can matter for arguments `≥ t`.
    fn z_range(&self, t: f64, w: &Weight) -> (f64, f64) {
        let lo = -w.tail_point(WEIGHT_EPS);
        let hi = (self.decay - t).max(lo + 1.0);
        (lo, hi)
    }

    /// Length of the half-line past which the kernel diagonal is negligible.
    fn x_extent(&self, t: f64, w: &Weight) -> f64 {
        (w.tail_point(WEIGHT_EPS).max(self.decay) - t).max(1.0)
    }

    fn factor(&self, rows: &[(f64, f64)], cols: &[(f64, f64)], shift: f64) -> Result<DMatrix<f64>> {
        let entries: Vec<Result<Vec<f64>>> = rows
            .par_iter()
            .map(|&(xi, si)| {
                cols.iter()
                    .map(|&(zk, sk)| Ok(si * self.ai(xi + zk + shift)? * sk))
                    .collect()
            })
            .collect();
        let mut g = DMatrix::zeros(rows.len(), cols.len());
        for (i, row) in entries.into_iter().enumerate() {
            for (k, v) in row?.into_iter().enumerate() {
                g[(i, k)] = v;
            }
        }
        Ok(g)
    }

    /// `K_{t,n}(x, y)`: the z-integral with panel edges at the sign changes `−t−x`, `−t−y`,
    /// refined until two successive node doublings agree.
    pub fn kernel_value(&self, t: f64, w: &Weight, x: f64, y: f64) -> Result<f64> {
        if x < 0.0 || y < 0.0 {
            return Err(Error::InvalidArgument(format!("kernel arguments must be non-negative, got ({x}, {y})")));
        }
        let (a, b) = (x.min(y), x.max(y));
        let lo = -w.tail_point(WEIGHT_EPS);
        let hi = (self.decay - t - b).max(lo + 1.0);
        let integrand = |z: f64| -> Result<f64> { Ok(w.value(z) * self.ai(a + z + t)? * self.ai(b + z + t)?) };
        let mut prev = f64::NAN;
        let mut panels = 8;
        while panels <= 2048 {
            let mut edges = vec![lo];
            let sw = 1.0 / w.decay_rate;
            let mut cuts = vec![-t - b, -t - a, 0.0, sw, -sw, 4.0 * sw, -4.0 * sw];
            cuts.sort_by(|p, q| p.total_cmp(q));
            for c in cuts {
                if c > lo && c < hi && edges.last().is_none_or(|&e| c > e + 1e-12) {
                    edges.push(c);
                }
            }
            edges.push(hi);
            let mut fine = Vec::new();
            for e in edges.windows(2) {
                let k = (((e[1] - e[0]) / (hi - lo)) * panels as f64).ceil().max(1.0) as usize;
                for j in 0..k {
                    fine.push(e[0] + (e[1] - e[0]) * j as f64 / k as f64);
                }
            }
            fine.push(hi);
            let rule = composite_on_edges(&fine, Z_ORDER);
            let mut v = 0.0;
            for (z, wt) in rule.nodes.iter().zip(&rule.weights) {
                v += wt * integrand(*z)?;
            }
            if (v - prev).abs() <= 1e-14 * (1.0 + v.abs()) {
                return Ok(v);
            }
            prev = v;
            panels *= 2;
        }
        Err(Error::Quadrature(format!("kernel value at ({x}, {y}) did not converge")))
    }

    /// Half-line Nyström discretization with `m_x` x-nodes and `m_z` z-nodes.
    pub fn assemble_halfline(&self, t: f64, lambda: f64, w: &Weight, m_x: usize, m_z: usize) -> Result<KernelDiscretization> {
        check_common(t, lambda, &[m_x, m_z])?;
        let xr = composite(0.0, self.x_extent(t, w), m_x.div_ceil(X_ORDER), X_ORDER);
        let (lo, hi) = self.z_range(t, w);
        let zr = z_rule(lo, hi, -t, w, m_z, Z_ORDER);
        let rows: Vec<(f64, f64)> = xr.nodes.iter().zip(&xr.weights).map(|(&x, &o)| (x, o.sqrt())).collect();
        let cols: Vec<(f64, f64)> = zr
            .nodes
            .iter()
            .zip(&zr.weights)
            .map(|(&z, &o)| (z, (o * w.value(z)).sqrt()))
            .collect();
        let g = self.factor(&rows, &cols, t)?;
        let matrix = (&g * g.transpose()) * lambda;
        Ok(KernelDiscretization {
            n: self.n,
            t,
            lambda,
            x_nodes: xr.nodes,
            x_weights: xr.weights,
            z_nodes: zr.nodes,
            z_weights: zr.weights,
            matrix,
        })
    }

    pub fn det_halfline(&self, t: f64, lambda: f64, w: &Weight, m_x: usize, m_z: usize) -> Result<DetResult> {
        if lambda == 0.0 {
            check_common(t, lambda, &[m_x, m_z])?;
            return Ok(DetResult { det: 1.0, logdet: 0.0, min_eig: 0.0, max_eig: 0.0, size: m_x });
        }
        self.assemble_halfline(t, lambda, w, m_x, m_z)?.determinant()
    }

    fn sigma_side(&self, t: f64, lambda: f64, zr: &Rule, wz: &dyn Fn(f64) -> f64, y_len: f64, m_y: usize) -> Result<DetResult> {
        let yr = composite(0.0, y_len, m_y.div_ceil(Y_ORDER), Y_ORDER);
        let rows: Vec<(f64, f64)> = zr
            .nodes
            .iter()
            .zip(&zr.weights)
            .map(|(&z, &o)| (z, (o * wz(z)).sqrt()))
            .collect();
        let cols: Vec<(f64, f64)> = yr.nodes.iter().zip(&yr.weights).map(|(&y, &o)| (y, o.sqrt())).collect();
        let h = self.factor(&rows, &cols, t)?;
        let matrix = (&h * h.transpose()) * lambda;
        det_from_matrix(&matrix, lambda)
    }

    /// The σ-side route: `M(z, z′) = √w(z) ∫_0^∞ Ai_n(z+y+t) Ai_n(y+z′+t) dy √w(z′)`.
    pub fn det_sigma(&self, t: f64, lambda: f64, w: &Weight, m_z: usize, m_y: usize) -> Result<DetResult> {
        check_common(t, lambda, &[m_z, m_y])?;
        if lambda == 0.0 {
            return Ok(DetResult { det: 1.0, logdet: 0.0, min_eig: 0.0, max_eig: 0.0, size: m_z });
        }
        let (lo, hi) = self.z_range(t, w);
        let zr = z_rule(lo, hi, -t, w, m_z, SIGMA_Z_ORDER);
        let y_len = (self.decay - t - lo).max(1.0);
        self.sigma_side(t, lambda, &zr, &|z| w.value(z), y_len, m_y)
    }

    /// Determinant for the exact step weight `χ_{(0,∞)}`: the z-integral runs over `z > 0` only.
    pub fn det_step(&self, t: f64, lambda: f64, m: usize) -> Result<DetResult> {
        check_common(t, lambda, &[m])?;
        if lambda == 0.0 {
            return Ok(DetResult { det: 1.0, logdet: 0.0, min_eig: 0.0, max_eig: 0.0, size: m });
        }
        let len = (self.decay - t).max(1.0);
        let zr = composite(0.0, len, m.div_ceil(SIGMA_Z_ORDER), SIGMA_Z_ORDER);
        self.sigma_side(t, lambda, &zr, &|_| 1.0, len, m)
    }

    /// `∫_0^∞ Ai_n(x + a)² dx`.
    fn tail_square(&self, a: f64, order: usize) -> Result<f64> {
        let hi = self.decay.max(a + 1.0);
        let lo = a.min(hi);
        let panels = ((hi - lo) / 1.0).ceil().max(1.0) as usize;
        let r = composite(lo, hi, panels, order);
        let mut s = 0.0;
        for (x, wt) in r.nodes.iter().zip(&r.weights) {
            let v = self.ai(*x)?;
            s += wt * v * v;
        }
        Ok(s)
    }

    /// `tr K_{t,n} = ∫_0^∞ K_{t,n}(x, x) dx`, computed as `∫ w(z) ∫_0^∞ Ai_n(x+z+t)² dx dz`.
    pub fn trace_kernel(&self, t: f64, w: &Weight) -> Result<f64> {
        let (lo, hi) = self.z_range(t, w);
        let mut prev = f64::NAN;
        let mut m = 120;
        while m <= 3840 {
            let zr = z_rule(lo, hi, -t, w, m, SIGMA_Z_ORDER);
            let parts: Vec<Result<f64>> = zr
                .nodes
                .par_iter()
                .zip(&zr.weights)
                .map(|(&z, &o)| Ok(o * w.value(z) * self.tail_square(z + t, 20)?))
                .collect();
            let mut v = 0.0;
            for p in parts {
                v += p?;
            }
            if (v - prev).abs() <= 1e-12 * (1.0 + v.abs()) {
                return Ok(v);
            }
            prev = v;
            m *= 2;
        }
        Err(Error::Quadrature(format!("trace at t = {t} did not converge")))
    }
}

/// `K_{t,n}(x, y)`.
pub fn kernel_value(n: u32, t: f64, w: &Weight, x: f64, y: f64) -> Result<f64> {
    Fredholm::new(n)?.kernel_value(t, w, x, y)
}

/// `D_n(t, λ)` on the half-line.
pub fn det_halfline(n: u32, t: f64, lambda: f64, w: &Weight, m_x: usize, m_z: usize) -> Result<f64> {
    Ok(Fredholm::new(n)?.det_halfline(t, lambda, w, m_x, m_z)?.det)
}

/// `D_n(t, λ)` through the σ-side factorization.
pub fn det_sigma(n: u32, t: f64, lambda: f64, w: &Weight, m_z: usize, m_y: usize) -> Result<f64> {
    Ok(Fredholm::new(n)?.det_sigma(t, lambda, w, m_z, m_y)?.det)
}

/// Determinant for the zero-temperature step weight.
pub fn det_step(n: u32, t: f64, lambda: f64, m: usize) -> Result<f64> {
    Ok(Fredholm::new(n)?.det_step(t, lambda, m)?.det)
}

/// `tr K_{t,n}`.
pub fn trace_kernel(n: u32, t: f64, w: &Weight) -> Result<f64> {
    Fredholm::new(n)?.trace_kernel(t, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::composite_split;
    use crate::oracle;
    use crate::weights::{make_fermi, make_smoothed_step};

    #[test]
    fn known_values_n1_fermi() {
        let f = Fredholm::new(1).unwrap();
        let w = make_fermi(1.0).unwrap();
        // frozen from an independent scipy Nyström computation
        for (t, want) in [(-1.0, 0.598_380_816_590_452), (0.0, 0.790_690_099_519_549), (1.0, 0.905_848_458_096)] {
            let d = f.det_halfline(t, 1.0, &w, DEFAULT_M_X, DEFAULT_M_Z).unwrap();
            assert!((d.det - want).abs() < 1e-10, "t={t}: {} vs {want}", d.det);
            let s = f.det_sigma(t, 1.0, &w, DEFAULT_SIGMA_M_Z, DEFAULT_M_Y).unwrap();
            assert!((s.det - want).abs() < 1e-10, "sigma t={t}: {} vs {want}", s.det);
        }
    }

    #[test]
    fn lambda_zero_is_one() {
        let w = make_fermi(1.0).unwrap();
        assert_eq!(det_halfline(2, 0.3, 0.0, &w, 16, 16).unwrap(), 1.0);
        assert_eq!(det_sigma(2, 0.3, 0.0, &w, 16, 16).unwrap(), 1.0);
        assert_eq!(det_step(1, 0.3, 0.0, 16).unwrap(), 1.0);
    }

    #[test]
    fn bad_arguments() {
        let w = make_fermi(1.0).unwrap();
        assert!(det_halfline(1, 0.0, 1.5, &w, 64, 64).is_err());
        assert!(det_halfline(1, 0.0, 1.0, &w, 4, 64).is_err());
        assert!(kernel_value(1, 0.0, &w, -1.0, 0.0).is_err());
    }

    #[test]
    fn discretization_invariants() {
        let f = Fredholm::new(2).unwrap();
        let w = make_fermi(1.0).unwrap();
        let k = f.assemble_halfline(-1.0, 1.0, &w, DEFAULT_M_X, DEFAULT_M_Z).unwrap();
        assert!(k.symmetry_defect() < 1e-12);
        let ev = k.eigenvalues();
        assert!(ev[0] > -1e-8 && *ev.last().unwrap() < 1.0 + 1e-8, "{:?}", (ev[0], ev.last()));
    }

    #[test]
    fn kernel_symmetric_and_damped() {
        let f = Fredholm::new(2).unwrap();
        let w = make_fermi(1.0).unwrap();
        let a = f.kernel_value(0.3, &w, 0.7, 2.1).unwrap();
        let b = f.kernel_value(0.3, &w, 2.1, 0.7).unwrap();
        assert!((a - b).abs() < 1e-12);
        let steeper = make_fermi(2.0).unwrap();
        for n in 1..=3 {
            assert!(kernel_value(n, 15.0, &steeper, 0.0, 0.0).unwrap() < 1e-8);
        }
        // with α = 1 the weight tail e^{-t} dominates: mpmath quadrature gives 9.3792665423e-8
        let k = kernel_value(1, 15.0, &w, 0.0, 0.0).unwrap();
        assert!((k / 9.379_266_542_348_9e-8 - 1.0).abs() < 1e-8, "{k}");
    }

    #[test]
    fn kernel_matches_nystrom_entry() {
        let f = Fredholm::new(1).unwrap();
        let w = make_fermi(1.0).unwrap();
        let k = f.assemble_halfline(0.0, 1.0, &w, DEFAULT_M_X, DEFAULT_M_Z).unwrap();
        let (i, j) = (5, 17);
        let direct = f.kernel_value(0.0, &w, k.x_nodes[i], k.x_nodes[j]).unwrap();
        let scaled = k.matrix[(i, j)] / (k.x_weights[i] * k.x_weights[j]).sqrt();
        assert!((direct - scaled).abs() < 1e-12, "{direct} {scaled}");
    }

    #[test]
    fn kernel_step_limit_is_airy_kernel() {
        let w = make_smoothed_step(200.0).unwrap();
        for (x, y) in [(0.0, 0.5), (1.0, 2.0), (0.3, 0.3)] {
            let k = kernel_value(1, -0.5, &w, x, y).unwrap();
            let a = oracle::airy_kernel(x - 0.5, y - 0.5).unwrap();
            assert!((k - a).abs() < 1e-4, "({x},{y}): {k} vs {a}");
        }
    }

    #[test]
    fn step_matches_classical_tracy_widom() {
        let f = Fredholm::new(1).unwrap();
        for t in [-2.0, 0.0, 2.0] {
            let d = f.det_step(t, 1.0, DEFAULT_STEP_M).unwrap().det;
            let o = oracle::airy_kernel_det(t, 1.0, 120).unwrap();
            assert!((d - o).abs() < 1e-8, "t={t}: {d} vs {o}");
        }
    }

    #[test]
    fn trace_matches_exact_n1_formula() {
        // For n = 1, ∫_0^∞ Ai(x+a)² dx = Ai′(a)² − a Ai(a)².
        let f = Fredholm::new(1).unwrap();
        let w = make_fermi(1.0).unwrap();
        let rule = composite_split(-45.0, 12.0, 0.0, 1200, 20);
        let exact: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&z, &o)| {
                let (a, d) = oracle::airy(z).unwrap();
                o * w.value(z) * (d * d - z * a * a)
            })
            .sum();
        let tr = f.trace_kernel(0.0, &w).unwrap();
        assert!((tr - exact).abs() < 1e-10, "{tr} vs {exact}");
    }

    #[test]
    fn trace_dominates_eigenvalue_sum() {
        let f = Fredholm::new(2).unwrap();
        let w = make_fermi(1.0).unwrap();
        let tr = f.trace_kernel(0.0, &w).unwrap();
        let s: f64 = f.assemble_halfline(0.0, 1.0, &w, DEFAULT_M_X, DEFAULT_M_Z).unwrap().eigenvalues().iter().sum();
        assert!(tr >= s - 1e-6 && (tr - s).abs() < 1e-6, "{tr} {s}");
    }
}
