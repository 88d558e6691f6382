use thiserror::Error;

/// Errors raised by the numerical and symbolic routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contour quadrature for Ai_{n}({x}) did not converge (residual {residual:.3e} after {points} points)")]
    NonConvergence {
        n: u32,
        x: f64,
        residual: f64,
        points: usize,
    },

    #[error("contour for Ai_{n}({x}) could not be truncated within radius {radius}")]
    Truncation { n: u32, x: f64, radius: f64 },

    #[error("table interpolation error {error:.3e} at x = {x} exceeds {tol:.1e}")]
    Interpolation { x: f64, error: f64, tol: f64 },

    #[error("weight check failed: {0}")]
    Weight(String),

    #[error("kernel eigenvalue {eigenvalue} outside [0, 1] (assembly inaccurate)")]
    Spectrum { eigenvalue: f64 },

    #[error("quadrature: {0}")]
    Quadrature(String),

    #[error("algebra: {0}")]
    Algebra(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("solution left the bound {bound:e} at t = {t}")]
    BlowUp { t: f64, bound: f64 },

    #[error("ODE integration failed: {0}")]
    Integration(String),

    #[error("x = {x} lies outside the grid hull [{lo}, {hi}]")]
    OutsideHull { x: f64, lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
