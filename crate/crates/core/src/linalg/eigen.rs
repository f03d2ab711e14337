//! Dense real nonsymmetric eigenvalues: diagonal balancing, Householder
//! reduction to upper Hessenberg form, then Francis double-shift QR with
//! deflation.

use num_complex::Complex64;

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Largest matrix dimension accepted by the eigensolver.
pub const MAX_DIM: usize = 2048;

/// Real Schur decomposition `Q^T D^-1 M D Q = T` of a balanced matrix.
#[derive(Debug, Clone)]
pub struct RealSchur {
    /// Quasi upper triangular factor.
    pub t: DenseMatrix,
    /// Orthogonal Schur vectors of the balanced matrix.
    pub q: DenseMatrix,
    /// Diagonal balancing scales `D`.
    pub scaling: Vec<f64>,
    pub eigenvalues: Vec<Complex64>,
    /// ||D^-1 M D Q - Q T||_F / ||D^-1 M D||_F.
    pub backward_error: f64,
}

/// All eigenvalues of a square matrix, without Schur vectors.
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    check_input(m)?;
    let mut h = m.clone();
    balance(&mut h);
    hessenberg(&mut h, None);
    francis_qr(&mut h, None, false)
}

/// Eigenvalues together with the Schur factors and a measured backward error.
pub fn real_schur(m: &DenseMatrix) -> Result<RealSchur> {
    check_input(m)?;
    let n = m.rows();
    let mut h = m.clone();
    let scaling = balance(&mut h);
    let balanced = h.clone();
    let mut q = DenseMatrix::identity(n);
    hessenberg(&mut h, Some(&mut q));
    let eigenvalues = francis_qr(&mut h, Some(&mut q), true)?;
    let lhs = balanced.matmul(&q)?;
    let rhs = q.matmul(&h)?;
    let denom = balanced.norm_fro();
    let backward_error = if denom == 0.0 {
        0.0
    } else {
        lhs.sub(&rhs)?.norm_fro() / denom
    };
    Ok(RealSchur {
        t: h,
        q,
        scaling,
        eigenvalues,
        backward_error,
    })
}

fn check_input(m: &DenseMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if m.rows() == 0 || m.rows() > MAX_DIM {
        return Err(Error::Dimension(format!(
            "matrix dimension {} outside 1..={MAX_DIM}",
            m.rows()
        )));
    }
    if !m.is_finite() {
        return Err(Error::ParameterDomain("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Scales rows and columns by powers of two so that row and column norms
/// are comparable. Returns the diagonal of `D` with `D^-1 M D` stored in `m`.
pub fn balance(m: &mut DenseMatrix) -> Vec<f64> {
    const RADIX: f64 = 2.0;
    let n = m.rows();
    let mut scale = vec![1.0; n];
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                scale[i] *= f;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
    scale
}

/// Householder reflector `I - beta v v^T` mapping `x` onto a multiple of e1.
/// Returns `None` when `x` is already zero.
fn householder<const K: usize>(x: [f64; K]) -> Option<([f64; K], f64)> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    let alpha = if x[0] >= 0.0 { -norm } else { norm };
    let mut v = x;
    v[0] -= alpha;
    let vv: f64 = v.iter().map(|a| a * a).sum();
    if vv == 0.0 {
        return None;
    }
    Some((v, 2.0 / vv))
}

#[inline]
fn reflect_rows<const K: usize>(
    h: &mut DenseMatrix,
    row0: usize,
    cols: std::ops::Range<usize>,
    v: &[f64; K],
    beta: f64,
) {
    for j in cols {
        let mut s = 0.0;
        for (t, vt) in v.iter().enumerate() {
            s += vt * h[(row0 + t, j)];
        }
        s *= beta;
        for (t, vt) in v.iter().enumerate() {
            h[(row0 + t, j)] -= s * vt;
        }
    }
}

#[inline]
fn reflect_cols<const K: usize>(
    h: &mut DenseMatrix,
    col0: usize,
    rows: std::ops::Range<usize>,
    v: &[f64; K],
    beta: f64,
) {
    for i in rows {
        let row = h.row_mut(i);
        let mut s = 0.0;
        for (t, vt) in v.iter().enumerate() {
            s += vt * row[col0 + t];
        }
        s *= beta;
        for (t, vt) in v.iter().enumerate() {
            row[col0 + t] -= s * vt;
        }
    }
}

/// Reduces `h` to upper Hessenberg form in place, accumulating the
/// orthogonal factor into `q` when given.
pub fn hessenberg(h: &mut DenseMatrix, mut q: Option<&mut DenseMatrix>) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let len = n - k - 1;
        let x: Vec<f64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let tail: f64 = x[1..].iter().map(|a| a * a).sum();
        if tail == 0.0 {
            continue;
        }
        let norm = (x[0] * x[0] + tail).sqrt();
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        v[..len].copy_from_slice(&x);
        v[0] -= alpha;
        let vv: f64 = v[..len].iter().map(|a| a * a).sum();
        let beta = 2.0 / vv;

        for j in k..n {
            let s: f64 = (0..len).map(|t| v[t] * h[(k + 1 + t, j)]).sum::<f64>() * beta;
            for t in 0..len {
                h[(k + 1 + t, j)] -= s * v[t];
            }
        }
        for i in 0..n {
            let row = h.row_mut(i);
            let s: f64 = (0..len).map(|t| v[t] * row[k + 1 + t]).sum::<f64>() * beta;
            for t in 0..len {
                row[k + 1 + t] -= s * v[t];
            }
        }
        if let Some(q) = q.as_deref_mut() {
            for i in 0..n {
                let row = q.row_mut(i);
                let s: f64 = (0..len).map(|t| v[t] * row[k + 1 + t]).sum::<f64>() * beta;
                for t in 0..len {
                    row[k + 1 + t] -= s * v[t];
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
}

/// Eigenvalues of a real 2x2 block `[[a, b], [c, d]]`.
fn eig2(a: f64, b: f64, c: f64, d: f64) -> (Complex64, Complex64) {
    let mean = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let disc = half_diff * half_diff + b * c;
    if disc >= 0.0 {
        let root = disc.sqrt();
        let big = if mean >= 0.0 { mean + root } else { mean - root };
        let det = a * d - b * c;
        let small = if big != 0.0 { det / big } else { mean - root.copysign(mean) };
        (Complex64::new(big, 0.0), Complex64::new(small, 0.0))
    } else {
        let im = (-disc).sqrt();
        (Complex64::new(mean, im), Complex64::new(mean, -im))
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix.
///
/// With `want_t` the full quasi-triangular form is produced (and `q`
/// updated); otherwise only the active window is iterated. The total
/// number of double-shift sweeps is capped at `100 n`.
pub fn francis_qr(
    h: &mut DenseMatrix,
    mut q: Option<&mut DenseMatrix>,
    want_t: bool,
) -> Result<Vec<Complex64>> {
    let n = h.rows();
    let cap = 100 * n;
    let eps = f64::EPSILON;
    let mut eig: Vec<Option<Complex64>> = vec![None; n];
    let norm = h.as_slice().iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);

    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n - 1;
    loop {
        // Locate the start of the unreduced block ending at `hi`.
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                h[(l, l - 1)] = 0.0;
                break;
            }
            l -= 1;
        }

        if l == hi {
            eig[hi] = Some(Complex64::new(h[(hi, hi)], 0.0));
            its = 0;
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }
        if l + 1 == hi {
            let (e1, e2) = eig2(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            );
            eig[hi - 1] = Some(e1);
            eig[hi] = Some(e2);
            its = 0;
            if hi < 2 {
                break;
            }
            hi -= 2;
            continue;
        }

        if total >= cap {
            return Err(Error::NoConvergence {
                iterations: total,
                n,
                partial: eig.into_iter().flatten().collect(),
            });
        }
        total += 1;
        its += 1;

        // Shift polynomial H^2 - s H + t I.
        let (s, t) = if its % 10 == 0 {
            let w = h[(hi, hi - 1)].abs() + h[(hi - 1, hi - 2)].abs();
            let base = h[(hi, hi)] + 0.75 * w;
            (2.0 * base, base * base + 0.4375 * w * w)
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            (a + d, a * d - b * c)
        };

        let mut x = h[(l, l)] * h[(l, l)] + h[(l, l + 1)] * h[(l + 1, l)] - s * h[(l, l)] + t;
        let mut y = h[(l + 1, l)] * (h[(l, l)] + h[(l + 1, l + 1)] - s);
        let mut z = h[(l + 2, l + 1)] * h[(l + 1, l)];
        let col_end = if want_t { n } else { hi + 1 };
        let row_start = if want_t { 0 } else { l };

        for k in l..hi - 1 {
            if let Some((v, beta)) = householder([x, y, z]) {
                let c0 = if k > l { k - 1 } else { l };
                reflect_rows(h, k, c0..col_end, &v, beta);
                let r1 = (k + 3).min(hi) + 1;
                reflect_cols(h, k, row_start..r1, &v, beta);
                if let Some(q) = q.as_deref_mut() {
                    reflect_cols(q, k, 0..n, &v, beta);
                }
                if k > l {
                    h[(k + 1, k - 1)] = 0.0;
                    h[(k + 2, k - 1)] = 0.0;
                }
            }
            x = h[(k + 1, k)];
            y = h[(k + 2, k)];
            if k + 3 <= hi {
                z = h[(k + 3, k)];
            }
        }
        if let Some((v, beta)) = householder([x, y]) {
            reflect_rows(h, hi - 1, hi - 2..col_end, &v, beta);
            reflect_cols(h, hi - 1, row_start..hi + 1, &v, beta);
            if let Some(q) = q.as_deref_mut() {
                reflect_cols(q, hi - 1, 0..n, &v, beta);
            }
            h[(hi, hi - 2)] = 0.0;
        }
    }

    Ok(eig.into_iter().map(|e| e.expect("every index deflated")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn diagonal_matrix() {
        let m = DenseMatrix::from_diagonal(&[0.5, 2.0]);
        let e = sorted(eigenvalues(&m).unwrap());
        assert_eq!(e, vec![Complex64::new(0.5, 0.0), Complex64::new(2.0, 0.0)]);
    }

    #[test]
    fn rotation_has_conjugate_pair() {
        let m = DenseMatrix::from_rows(&[[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 3.0]]).unwrap();
        let e = sorted(eigenvalues(&m).unwrap());
        assert!((e[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        assert!((e[2] - Complex64::new(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn schur_residual_is_small_for_nonnormal_matrix() {
        let n = 12;
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = ((i * 7 + j * 3) % 11) as f64 - 5.0 + if j > i { 10.0 } else { 0.0 };
            }
        }
        let s = real_schur(&m).unwrap();
        assert!(s.backward_error < 1e-13, "{}", s.backward_error);
        // Trace is preserved.
        let tr: f64 = (0..n).map(|i| m[(i, i)]).sum();
        let sum: Complex64 = s.eigenvalues.iter().sum();
        assert!((sum.re - tr).abs() < 1e-10 * tr.abs().max(1.0));
        assert!(sum.im.abs() < 1e-10);
        // T is quasi-triangular.
        for i in 2..n {
            for j in 0..i - 1 {
                assert_eq!(s.t[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn companion_matrix_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let m = DenseMatrix::from_rows(&[[6.0, -11.0, 6.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        let e = sorted(eigenvalues(&m).unwrap());
        for (got, want) in e.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(eigenvalues(&DenseMatrix::zeros(2, 3)).is_err());
        let mut m = DenseMatrix::identity(2);
        m[(0, 1)] = f64::NAN;
        assert!(eigenvalues(&m).is_err());
    }

    #[test]
    fn balancing_preserves_spectrum_of_badly_scaled_matrix() {
        let m = DenseMatrix::from_rows(&[[1.0, 1e8, 0.0], [1e-8, 2.0, 1e6], [0.0, 1e-6, 3.0]]).unwrap();
        let mut b = m.clone();
        let d = balance(&mut b);
        for i in 0..3 {
            for j in 0..3 {
                let back = b[(i, j)] * d[i] / d[j];
                assert!((back - m[(i, j)]).abs() <= 1e-15 * m[(i, j)].abs());
            }
        }
        assert!(b.max_abs() < 1e4);
    }
}
