//! Tridiagonal storage and direct solvers.
//!
//! Every update matrix in this crate is tridiagonal (the interface coupling
//! entries sit on the first off-diagonals), so one banded kernel serves all
//! schemes.

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Relative pivot threshold below which a system is declared singular.
pub const PIVOT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    /// `sub[i]` is entry (i+1, i).
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    /// `sup[i]` is entry (i, i+1).
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::Dimension(format!(
                "tridiagonal bands of length {}/{}/{}",
                sub.len(),
                n,
                sup.len()
            )));
        }
        Ok(Self { sub, diag, sup })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            sub: vec![0.0; n.saturating_sub(1)],
            diag: vec![1.0; n],
            sup: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if i + 1 == j {
            self.sup[i]
        } else if j + 1 == i {
            self.sub[j]
        } else {
            0.0
        }
    }

    /// Sets entry (i, j); panics if it lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        if i == j {
            self.diag[i] = v;
        } else if i + 1 == j {
            self.sup[i] = v;
        } else if j + 1 == i {
            self.sub[j] = v;
        } else {
            panic!("entry ({i}, {j}) is outside the tridiagonal band");
        }
    }

    pub fn row_scale(&self, i: usize) -> f64 {
        let mut s = self.diag[i].abs();
        if i > 0 {
            s = s.max(self.sub[i - 1].abs());
        }
        if i + 1 < self.n() {
            s = s.max(self.sup[i].abs());
        }
        s
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        debug_assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.sup[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.n();
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.sup[i];
                m[(i + 1, i)] = self.sub[i];
            }
        }
        m
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n())
            .map(|i| self.diag[i].abs() + self.off_diagonal_sum(i))
            .fold(0.0, f64::max)
    }

    /// |a_ii| >= sum of off-diagonal magnitudes in every row.
    pub fn is_diagonally_dominant(&self) -> bool {
        (0..self.n()).all(|i| self.diag[i].abs() >= self.off_diagonal_sum(i))
    }

    /// |a_ii| > sum of off-diagonal magnitudes in every row.
    pub fn is_strictly_diagonally_dominant(&self) -> bool {
        (0..self.n()).all(|i| self.diag[i].abs() > self.off_diagonal_sum(i))
    }

    fn off_diagonal_sum(&self, i: usize) -> f64 {
        let mut s = 0.0;
        if i > 0 {
            s += self.sub[i - 1].abs();
        }
        if i + 1 < self.n() {
            s += self.sup[i].abs();
        }
        s
    }

    /// Number of stored entries that are nonzero.
    pub fn nonzeros(&self) -> usize {
        self.sub
            .iter()
            .chain(&self.diag)
            .chain(&self.sup)
            .filter(|v| **v != 0.0)
            .count()
    }

    /// Whether the matrix is lower bidiagonal-plus-diagonal across the split
    /// `(0..k, k..n)`, i.e. block lower triangular with the (0,1) block zero.
    pub fn is_block_lower_triangular(&self, k: usize) -> bool {
        k == 0 || k >= self.n() || self.sup[k - 1] == 0.0
    }

    pub fn factor(&self) -> Result<TridiagonalLu> {
        TridiagonalLu::new(self)
    }
}

/// LU factors of a tridiagonal matrix, reusable for many right-hand sides.
#[derive(Debug, Clone)]
pub enum TridiagonalLu {
    /// Thomas elimination, used when the matrix is diagonally dominant.
    Thomas {
        lower: Vec<f64>,
        pivots: Vec<f64>,
        sup: Vec<f64>,
    },
    /// Partially pivoted band LU (second super-diagonal fill-in).
    Pivoted {
        dl: Vec<f64>,
        d: Vec<f64>,
        du: Vec<f64>,
        du2: Vec<f64>,
        swapped: Vec<bool>,
    },
}

impl TridiagonalLu {
    pub fn new(a: &Tridiagonal) -> Result<Self> {
        if a.is_diagonally_dominant() {
            Self::thomas(a)
        } else {
            Self::pivoted(a)
        }
    }

    fn thomas(a: &Tridiagonal) -> Result<Self> {
        let n = a.n();
        let mut lower = vec![0.0; n.saturating_sub(1)];
        let mut pivots = vec![0.0; n];
        pivots[0] = a.diag[0];
        check_pivot(pivots[0], a.row_scale(0), 0)?;
        for i in 1..n {
            let m = a.sub[i - 1] / pivots[i - 1];
            lower[i - 1] = m;
            pivots[i] = a.diag[i] - m * a.sup[i - 1];
            check_pivot(pivots[i], a.row_scale(i), i)?;
        }
        Ok(TridiagonalLu::Thomas {
            lower,
            pivots,
            sup: a.sup.clone(),
        })
    }

    fn pivoted(a: &Tridiagonal) -> Result<Self> {
        let n = a.n();
        let mut dl = a.sub.clone();
        let mut d = a.diag.clone();
        let mut du = a.sup.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        for (i, &p) in d.iter().enumerate() {
            let mut scale = a.row_scale(i);
            if i + 1 < n {
                scale = scale.max(a.row_scale(i + 1));
            }
            check_pivot(p, scale, i)?;
        }
        Ok(TridiagonalLu::Pivoted {
            dl,
            d,
            du,
            du2,
            swapped,
        })
    }

    pub fn n(&self) -> usize {
        match self {
            TridiagonalLu::Thomas { pivots, .. } => pivots.len(),
            TridiagonalLu::Pivoted { d, .. } => d.len(),
        }
    }

    /// Solves in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n();
        debug_assert_eq!(b.len(), n);
        match self {
            TridiagonalLu::Thomas { lower, pivots, sup } => {
                for i in 1..n {
                    b[i] -= lower[i - 1] * b[i - 1];
                }
                b[n - 1] /= pivots[n - 1];
                for i in (0..n - 1).rev() {
                    b[i] = (b[i] - sup[i] * b[i + 1]) / pivots[i];
                }
            }
            TridiagonalLu::Pivoted {
                dl,
                d,
                du,
                du2,
                swapped,
            } => {
                for i in 0..n - 1 {
                    if swapped[i] {
                        let temp = b[i];
                        b[i] = b[i + 1];
                        b[i + 1] = temp - dl[i] * b[i];
                    } else {
                        b[i + 1] -= dl[i] * b[i];
                    }
                }
                b[n - 1] /= d[n - 1];
                if n > 1 {
                    b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
                }
                for i in (0..n.saturating_sub(2)).rev() {
                    b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
                }
            }
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

fn check_pivot(pivot: f64, scale: f64, row: usize) -> Result<()> {
    if !pivot.is_finite() || pivot.abs() <= PIVOT_TOL * scale || scale == 0.0 {
        return Err(Error::Singular { row, pivot, scale });
    }
    Ok(())
}

/// Solves `a x = rhs`.
pub fn tridiagonal_solve(a: &Tridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != a.n() {
        return Err(Error::Dimension(format!(
            "rhs of length {} for {}x{} system",
            rhs.len(),
            a.n(),
            a.n()
        )));
    }
    Ok(a.factor()?.solve(rhs))
}

/// max |a x - b| / (|a|_inf |x|_inf + |b|_inf).
pub fn relative_residual(a: &Tridiagonal, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let num = ax.iter().zip(b).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
    let xn = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let bn = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let den = a.norm_inf() * xn + bn;
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}
