//! Update matrix `M = A^-1 B`, its spectrum and the stability verdict.

use num_complex::Complex64;

use crate::assembly::UpdatePair;
use crate::error::Result;
use crate::linalg::{eigen, DenseMatrix};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Relative solve residual above which `update_matrix` logs a warning.
pub const RESIDUAL_WARN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Marginal => "marginal",
            Stability::Unstable => "unstable",
        }
    }
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Stability {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stable" => Ok(Stability::Stable),
            "marginal" => Ok(Stability::Marginal),
            "unstable" => Ok(Stability::Unstable),
            _ => Err(crate::Error::Config(format!("unknown class `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub lambda_max: f64,
    /// Relative backward error of the Schur factorization.
    pub residual_bound: f64,
}

/// Forms `M = A^-1 B` column by column from one factorization of `A`.
pub fn update_matrix(pair: &UpdatePair) -> Result<DenseMatrix> {
    let n = pair.n();
    let lu = pair.a.factor()?;
    let mut m = DenseMatrix::zeros(n, n);
    let mut col = vec![0.0; n];
    for j in 0..n {
        col.iter_mut().for_each(|v| *v = 0.0);
        for i in j.saturating_sub(1)..(j + 2).min(n) {
            col[i] = pair.b.get(i, j);
        }
        lu.solve_in_place(&mut col);
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }

    let b_norm = pair.b.norm_inf();
    let mut resid: f64 = 0.0;
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            let mut am = pair.a.get(i, i) * m[(i, j)];
            if i > 0 {
                am += pair.a.get(i, i - 1) * m[(i - 1, j)];
            }
            if i + 1 < n {
                am += pair.a.get(i, i + 1) * m[(i + 1, j)];
            }
            row_sum += (am - pair.b.get(i, j)).abs();
        }
        resid = resid.max(row_sum);
    }
    let rel = if b_norm > 0.0 { resid / b_norm } else { resid };
    if rel > RESIDUAL_WARN {
        log::warn!("update matrix solve residual {rel:e} exceeds {RESIDUAL_WARN:e} (n = {n})");
    }
    Ok(m)
}

/// All eigenvalues of `m` with a Schur backward-error bound.
pub fn eigen_spectrum(m: &DenseMatrix) -> Result<Spectrum> {
    let schur = eigen::real_schur(m)?;
    let lambda_max = max_modulus(&schur.eigenvalues);
    Ok(Spectrum {
        eigenvalues: schur.eigenvalues,
        lambda_max,
        residual_bound: schur.backward_error,
    })
}

/// Spectral radius via the eigenvalue-only path.
pub fn spectral_radius(m: &DenseMatrix) -> Result<f64> {
    Ok(max_modulus(&eigen::eigenvalues(m)?))
}

/// Spectral radius of `A^-1 B` for an assembled pair.
pub fn pair_lambda_max(pair: &UpdatePair) -> Result<f64> {
    spectral_radius(&update_matrix(pair)?)
}

pub fn pair_spectrum(pair: &UpdatePair) -> Result<Spectrum> {
    eigen_spectrum(&update_matrix(pair)?)
}

fn max_modulus(e: &[Complex64]) -> f64 {
    e.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn classify(lambda_max: f64, tol: f64) -> Stability {
    if lambda_max > 1.0 + tol {
        Stability::Unstable
    } else if lambda_max < 1.0 - tol {
        Stability::Stable
    } else {
        Stability::Marginal
    }
}

/// Stable or marginal.
pub fn is_bounded(lambda_max: f64, tol: f64) -> bool {
    lambda_max <= 1.0 + tol
}
