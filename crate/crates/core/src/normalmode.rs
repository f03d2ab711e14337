//! Normal-mode (GKS) analysis: spatial root selection, dispersion residuals
//! for each scheme, root scans in `|A| > 1`, and closed-form one-way results.
//!
//! A mode is `T_j^n = A^n c_- kappa_-^j` on the negative side and
//! `A^n c_+ kappa_+^j` on the positive side. Far-field boundedness requires
//! `|kappa_+| <= 1` and `|kappa_-^{-1}| <= 1`; both come from the
//! small-modulus root of `kappa^2 - 2(1+s) kappa + 1 = 0`.

use num_complex::Complex64;

use crate::assembly::{assemble, Direction, Formulation, Integrator, Interface, SchemeSpec};
use crate::error::{Error, Result};
use crate::linalg::{eigen, DenseMatrix};
use crate::params::DimensionlessParams;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Admissibility slack on `|kappa|`.
pub const KAPPA_TOL: f64 = 1e-12;

/// Inner radius offset of the scanned annulus.
pub const ANNULUS_GAP: f64 = 1e-6;

/// Amplification factor, allowing the limit `A -> infinity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Amplification {
    Finite(Complex64),
    Infinite,
}

impl From<Complex64> for Amplification {
    fn from(a: Complex64) -> Self {
        Amplification::Finite(a)
    }
}

impl From<f64> for Amplification {
    fn from(a: f64) -> Self {
        Amplification::Finite(Complex64::new(a, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSolution {
    pub amplification: Complex64,
    /// Absent for the one-way model.
    pub kappa_plus: Option<Complex64>,
    pub kappa_minus_inv: Complex64,
    pub admissible: bool,
}

/// Roots of `kappa^2 - 2(1+s) kappa + 1`, larger modulus first.
fn kappa_pair(s: Complex64) -> (Complex64, Complex64) {
    let q = ONE + s;
    let disc = (s * (s + 2.0)).sqrt();
    let (k1, k2) = (q + disc, q - disc);
    let big = if k1.norm() >= k2.norm() { k1 } else { k2 };
    (big, big.inv())
}

fn small_root(s: Complex64) -> Complex64 {
    kappa_pair(s).1
}

/// `d (1 - kappa)` with `kappa` the small root for shift `num / (2d)`;
/// tends to zero with `d`.
fn flux_term(d: f64, num: Complex64) -> (Complex64, Complex64) {
    if d == 0.0 {
        return (ZERO, ZERO);
    }
    let k = small_root(num / (2.0 * d));
    (d * (ONE - k), k)
}

/// Small-modulus spatial root for backward-Euler interiors,
/// `s = (1 - A^-1) / (2d)`.
pub fn kappa_root(a: impl Into<Amplification>, d: f64) -> Result<Complex64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::ParameterDomain(format!("kappa_root needs d > 0, got {d}")));
    }
    let a = a.into();
    let w = match a {
        Amplification::Infinite => ZERO,
        Amplification::Finite(z) => {
            if z == ZERO || !z.is_finite() {
                return Err(Error::Singularity(z));
            }
            z.inv()
        }
    };
    let s = (ONE - w) / (2.0 * d);
    if s == ZERO {
        return Ok(ONE);
    }
    let (big, small) = kappa_pair(s);
    if big.norm() <= 1.0 + KAPPA_TOL {
        let amplification = match a {
            Amplification::Finite(z) => z,
            Amplification::Infinite => Complex64::new(f64::INFINITY, 0.0),
        };
        return Err(Error::MarginalMode { amplification });
    }
    Ok(small)
}

/// Scale that makes each residual O(1).
fn residual_scale(scheme: &SchemeSpec, p: &DimensionlessParams) -> f64 {
    let (dm, dp, bm, bp, r) = (p.d_minus, p.d_plus, p.beta_minus, p.beta_plus, p.r);
    match (scheme.direction, scheme.interface, scheme.integrator) {
        (Direction::OneWayNegative, _, _) => 1.0 + dm + bm,
        (_, Interface::Bulk, _) => (1.0 + dm + bm) * (1.0 + dp + bp),
        (_, Interface::DirichletNeumann, Integrator::Explicit) => 1.0 + r + 2.0 * dm + 2.0 * dp * r,
        (_, Interface::DirichletNeumann, Integrator::Implicit) => 2.0 * (1.0 + r + 2.0 * dm) + 2.0 * dp * r,
    }
}

/// Normalized residual without argument checks.
fn residual(scheme: &SchemeSpec, p: &DimensionlessParams, a: Complex64) -> Complex64 {
    raw_residual(scheme, p, a) / residual_scale(scheme, p)
}

fn raw_residual(scheme: &SchemeSpec, p: &DimensionlessParams, a: Complex64) -> Complex64 {
    let (dm, dp, bm, bp, r) = (p.d_minus, p.d_plus, p.beta_minus, p.beta_plus, p.r);
    let w = a.inv();
    let one_w = ONE - w;
    match (scheme.direction, scheme.interface, scheme.integrator) {
        (Direction::OneWayNegative, _, _) => {
            let th = scheme.theta as f64;
            let sigma = th + (1.0 - th) * w;
            one_w + flux_term(dm, one_w).0 + bm * sigma
        }
        (_, Interface::Bulk, _) => {
            let th = scheme.theta as f64;
            let ga = scheme.gamma as f64;
            let sigma = th + (1.0 - th) * w;
            let tau = ga + (1.0 - ga) * w;
            let tau_minus = if scheme.formulation == Formulation::Sequential { w } else { tau };
            let m11 = one_w + flux_term(dm, one_w).0 + bm * sigma;
            let m22 = one_w + flux_term(dp, one_w).0 + bp * sigma;
            m11 * m22 - bm * bp * tau_minus * tau
        }
        (_, Interface::DirichletNeumann, Integrator::Explicit) => {
            let am1 = a - ONE;
            am1 * (1.0 + r) + 2.0 * flux_term(dm, am1).0 + 2.0 * r * flux_term(dp, am1).0
        }
        (_, Interface::DirichletNeumann, Integrator::Implicit) => {
            let x = one_w * (1.0 + r) + 2.0 * flux_term(dm, one_w).0;
            let kp = if dp == 0.0 { ZERO } else { small_root(one_w / (2.0 * dp)) };
            x * (ONE - kp + kp * w) + 2.0 * dp * r * (ONE - kp) * w
        }
    }
}

/// Residual of the scheme's interface equations at amplification `a`, with
/// spatial factors from the small-root branch. Zero exactly at admissible
/// normal modes.
///
/// The bulk residual is the determinant of the 2x2 system in the two
/// interface amplitudes. The implicit Dirichlet-Neumann residual is that
/// determinant multiplied by `2 kappa_+ / d_+`, which removes its pole at
/// `kappa_+ = 0`. Residuals are scaled to order one.
pub fn dispersion_residual(scheme: &SchemeSpec, p: &DimensionlessParams, a: Complex64) -> Result<Complex64> {
    scheme.validate()?;
    p.validate()?;
    if a == ZERO || a == ONE || !a.is_finite() {
        return Err(Error::Singularity(a));
    }
    Ok(residual(scheme, p, a))
}

/// Spatial factors and admissibility at amplification `a`.
pub fn mode_at(scheme: &SchemeSpec, p: &DimensionlessParams, a: Complex64) -> ModeSolution {
    let num = match scheme.integrator {
        Integrator::Explicit => a - ONE,
        Integrator::Implicit => ONE - a.inv(),
    };
    let kappa = |d: f64| flux_term(d, num).1;
    let kappa_minus_inv = kappa(p.d_minus);
    let kappa_plus = (scheme.direction == Direction::TwoWay).then(|| kappa(p.d_plus));
    let admissible = kappa_minus_inv.norm() <= 1.0 + KAPPA_TOL
        && kappa_plus.is_none_or(|k| k.norm() <= 1.0 + KAPPA_TOL);
    ModeSolution {
        amplification: a,
        kappa_plus,
        kappa_minus_inv,
        admissible,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub radius_max: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    pub refine_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            radius_max: 10.0,
            n_radial: 64,
            n_angular: 256,
            refine_tol: 1e-10,
        }
    }
}

impl ScanOptions {
    /// Defaults with the radius widened to cover every possible eigenvalue
    /// of the scheme (see [`amplification_bound`]).
    pub fn covering(scheme: &SchemeSpec, p: &DimensionlessParams) -> Result<Self> {
        let bound = amplification_bound(scheme, p)?;
        Ok(Self {
            radius_max: (1.05 * bound).max(10.0),
            ..Self::default()
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.radius_max > 1.0 + ANNULUS_GAP) || self.n_radial < 16 || self.n_angular < 16 || !(self.refine_tol > 0.0) {
            return Err(Error::ParameterDomain(format!("invalid scan options {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GksVerdict {
    Stable,
    Unstable,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub amplification: Complex64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    /// Polished admissible roots with `|A| > 1`, sorted by position.
    pub roots: Vec<ModeSolution>,
    /// Local minima where refinement failed to converge.
    pub unconfirmed: Vec<Candidate>,
}

impl ScanResult {
    pub fn verdict(&self) -> GksVerdict {
        if !self.roots.is_empty() {
            GksVerdict::Unstable
        } else if self.unconfirmed.is_empty() {
            GksVerdict::Stable
        } else {
            GksVerdict::Inconclusive
        }
    }
}

/// Damped Newton with a central-difference derivative and backtracking on
/// `|f|`. Returns the final point, `|f|` there, and whether `tol` was met.
fn newton<F: Fn(Complex64) -> Complex64>(f: F, z0: Complex64, tol: f64, max_iter: usize) -> (Complex64, f64, bool) {
    let mut z = z0;
    let mut fz = f(z);
    if !fz.is_finite() {
        return (z, f64::INFINITY, false);
    }
    for _ in 0..max_iter {
        if fz.norm() <= tol {
            return (z, fz.norm(), true);
        }
        let h = 1e-7 * z.norm().max(1e-3);
        let df = (f(z + h) - f(z - h)) / (2.0 * h);
        if df == ZERO || !df.is_finite() {
            break;
        }
        let step = -fz / df;
        let mut lam = 1.0;
        let mut accepted = None;
        while lam > 1e-10 {
            let zn = z + step * lam;
            let fnew = f(zn);
            if fnew.is_finite() && fnew.norm() < (1.0 - 1e-4 * lam) * fz.norm() {
                accepted = Some((zn, fnew));
                break;
            }
            lam *= 0.5;
        }
        match accepted {
            Some((zn, fnew)) => {
                let moved = (zn - z).norm();
                z = zn;
                fz = fnew;
                if moved <= 1e-15 * z.norm().max(1.0) {
                    break;
                }
            }
            None => break,
        }
    }
    let r = fz.norm();
    (z, r, r <= tol)
}

/// Refines a root of the scheme's dispersion residual from `start`.
///
/// Roots at a branch point of the spatial factors behave like
/// `sqrt(A - A*)`, so `|R|` cannot fall much below `sqrt(eps)` there. When
/// Newton on `R` stalls, Newton on `R^2` is tried and accepted against
/// `tol` on `|R|^2`. Returns the root and `|R|` at it.
pub fn refine_root(
    scheme: &SchemeSpec,
    p: &DimensionlessParams,
    start: Complex64,
    tol: f64,
) -> Option<(Complex64, f64)> {
    let f = |a: Complex64| residual(scheme, p, a);
    let excluded = |z: Complex64| z.norm() <= 1e-8 || (z - ONE).norm() <= 1e-8;
    let (z, r, ok) = newton(f, start, tol, 200);
    if ok && !excluded(z) {
        return Some((z, r));
    }
    let from = if excluded(z) { start } else { z };
    let (z2, r2, ok2) = newton(|a| f(a) * f(a), from, tol, 200);
    (ok2 && !excluded(z2)).then(|| (z2, r2.sqrt()))
}

/// Samples the residual on the annulus `1 + 1e-6 <= |A| <= radius_max`,
/// polishes every local minimum of `|R|` by damped Newton, and returns the
/// admissible roots with `|A| > 1`.
pub fn gks_scan(scheme: &SchemeSpec, p: &DimensionlessParams, opts: &ScanOptions) -> Result<ScanResult> {
    scheme.validate()?;
    p.validate()?;
    opts.validate()?;
    let (nr, na) = (opts.n_radial, opts.n_angular);
    let t0 = ANNULUS_GAP.log10();
    let t1 = (opts.radius_max - 1.0).log10();
    let radii: Vec<f64> = (0..nr)
        .map(|i| 1.0 + 10f64.powf(t0 + (t1 - t0) * i as f64 / (nr - 1) as f64))
        .collect();
    let angles: Vec<Complex64> = (0..na)
        .map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / na as f64))
        .collect();
    let point = |i: usize, j: usize| angles[j] * radii[i];
    let mut vals = vec![0.0; nr * na];
    for i in 0..nr {
        for j in 0..na {
            let v = residual(scheme, p, point(i, j)).norm();
            vals[i * na + j] = if v.is_finite() { v } else { f64::INFINITY };
        }
    }

    let mut seeds = Vec::new();
    for i in 0..nr {
        for j in 0..na {
            let v = vals[i * na + j];
            let mut is_min = v.is_finite();
            'nb: for di in -1i64..=1 {
                let ii = i as i64 + di;
                if ii < 0 || ii >= nr as i64 {
                    continue;
                }
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let jj = (j as i64 + dj).rem_euclid(na as i64) as usize;
                    if vals[ii as usize * na + jj] < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                seeds.push((i, j, v));
            }
        }
    }

    let inner = 1.0 + ANNULUS_GAP;
    let mut found: Vec<Complex64> = Vec::new();
    let mut unconfirmed: Vec<Candidate> = Vec::new();
    for &(i, j, v) in &seeds {
        let start = point(i, j);
        let (z, r, ok) = newton(|a| residual(scheme, p, a), start, opts.refine_tol, 200);
        if ok {
            if z.norm() >= inner && mode_at(scheme, p, z).admissible {
                found.push(z);
            }
        } else if i > 0 && i + 1 < nr {
            // Edge minima lean on a root outside the annulus; interior ones
            // that fail to converge are kept for inspection.
            unconfirmed.push(Candidate {
                amplification: if r < v { z } else { start },
                residual: r.min(v),
            });
        }
    }

    let roots = merge(found)
        .into_iter()
        .map(|a| mode_at(scheme, p, a))
        .collect();
    let mut unconfirmed = unconfirmed;
    unconfirmed.sort_by(|x, y| cmp_complex(x.amplification, y.amplification));
    unconfirmed.dedup_by(|x, y| close(x.amplification, y.amplification));
    Ok(ScanResult { roots, unconfirmed })
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-6 * a.norm().max(1.0)
}

fn cmp_complex(a: Complex64, b: Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn merge(mut zs: Vec<Complex64>) -> Vec<Complex64> {
    zs.sort_by(|a, b| cmp_complex(*a, *b));
    let mut out: Vec<Complex64> = Vec::new();
    for z in zs {
        if !out.iter().any(|o| close(*o, z)) {
            out.push(z);
        }
    }
    out
}

/// Whether the subdomain interiors are von Neumann stable on their own.
pub fn interior_stable(scheme: &SchemeSpec, p: &DimensionlessParams) -> bool {
    match scheme.integrator {
        Integrator::Implicit => true,
        Integrator::Explicit => p.d_minus <= 0.5 && (scheme.direction == Direction::OneWayNegative || p.d_plus <= 0.5),
    }
}

/// Normal-mode stability verdict: interior stability plus an empty root scan.
/// For the explicit Dirichlet-Neumann scheme the interior condition decides.
pub fn normal_mode_verdict(scheme: &SchemeSpec, p: &DimensionlessParams, opts: &ScanOptions) -> Result<GksVerdict> {
    if !interior_stable(scheme, p) {
        return Ok(GksVerdict::Unstable);
    }
    if scheme.interface == Interface::DirichletNeumann && scheme.integrator == Integrator::Explicit {
        return Ok(GksVerdict::Stable);
    }
    Ok(gks_scan(scheme, p, opts)?.verdict())
}

/// Upper bound on `|A|` for any mode of the scheme: `||A^-1|| ||B||` in the
/// max norm, with `||A^-1||` bounded through diagonal dominance. Row types
/// do not depend on the grid size, so a small assembly suffices.
pub fn amplification_bound(scheme: &SchemeSpec, p: &DimensionlessParams) -> Result<f64> {
    let pair = assemble(scheme, p, 3, 3)?;
    let n = pair.n();
    let mut excess = f64::INFINITY;
    for i in 0..n {
        let off: f64 = [i.checked_sub(1), (i + 1 < n).then_some(i + 1)]
            .into_iter()
            .flatten()
            .map(|j| pair.a.get(i, j).abs())
            .sum();
        excess = excess.min(pair.a.get(i, i).abs() - off);
    }
    if excess <= 0.0 {
        return Err(Error::Scheme(format!("{scheme}: A is not strictly diagonally dominant")));
    }
    Ok(pair.b.norm_inf() / excess)
}

/// Real roots of `d A^2 - (beta + d) A - beta (beta - 1) = 0`, larger first.
pub fn one_way_explicit_roots(beta: f64, d: f64) -> (f64, f64) {
    let disc = (beta + d).powi(2) + 4.0 * beta * (beta - 1.0) * d;
    debug_assert!(disc >= -1e-12 * (beta + d).powi(2), "negative discriminant {disc}");
    let root = disc.max(0.0).sqrt();
    ((beta + d + root) / (2.0 * d), (beta + d - root) / (2.0 * d))
}

/// Largest stable bulk Courant number for the one-way model with explicit flux.
pub fn one_way_explicit_bound(d: f64) -> f64 {
    1.0 + (1.0 + 2.0 * d).sqrt()
}

/// The single candidate mode of the one-way model with implicit flux.
/// Fails with [`Error::KappaPole`] at `beta = d`, where `A = 0`.
pub fn one_way_implicit_mode(beta: f64, d: f64) -> Result<ModeSolution> {
    if !(beta >= 0.0 && d > 0.0 && beta.is_finite() && d.is_finite()) {
        return Err(Error::ParameterDomain(format!("need beta >= 0 and d > 0, got {beta}, {d}")));
    }
    let amplification = Complex64::new((beta - d) / (beta - d + beta * beta), 0.0);
    if beta == d {
        return Err(Error::KappaPole { amplification });
    }
    let kappa_minus_inv = Complex64::new(d / (d - beta), 0.0);
    Ok(ModeSolution {
        amplification,
        kappa_plus: None,
        kappa_minus_inv,
        admissible: kappa_minus_inv.norm() <= 1.0 + KAPPA_TOL,
    })
}

/// Empirical stability limit `2 + d^0.55` for the one-way explicit model.
pub fn beljaars_bound(d: f64) -> f64 {
    2.0 + d.sqrt().powf(1.1)
}

/// Coefficients (highest degree first) of the large-`r` limit polynomial
/// `-A^4 + A^3 + 2A^2 - 2A + 4 d_+` of the implicit Dirichlet-Neumann scheme.
pub fn dn_implicit_large_r_quartic(d_plus: f64) -> [f64; 5] {
    [-1.0, 1.0, 2.0, -2.0, 4.0 * d_plus]
}

/// Roots of a real polynomial (highest degree first) as eigenvalues of its
/// companion matrix.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let lead = coeffs.iter().position(|c| *c != 0.0).ok_or_else(|| {
        Error::ParameterDomain("zero polynomial".into())
    })?;
    let c = &coeffs[lead..];
    let deg = c.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let mut m = DenseMatrix::zeros(deg, deg);
    for j in 0..deg {
        m[(0, j)] = -c[j + 1] / c[0];
    }
    for i in 1..deg {
        m[(i, i - 1)] = 1.0;
    }
    eigen::eigenvalues(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::FluxTreatment;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pm(d_plus: f64, d_minus: f64, beta_plus: f64, beta_minus: f64, r: f64) -> DimensionlessParams {
        DimensionlessParams::new(d_plus, d_minus, beta_plus, beta_minus, r).unwrap()
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| 10f64.powf(lo.log10() + (hi.log10() - lo.log10()) * i as f64 / (n - 1) as f64))
            .collect()
    }

    #[test]
    fn kappa_hand_values() {
        assert_eq!(kappa_root(1.0, 0.3).unwrap(), ONE);
        let k = kappa_root(Amplification::Infinite, 0.5).unwrap();
        assert_abs_diff_eq!(k.re, 2.0 - 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(k.im, 0.0);
        let k = kappa_root(-1.0, 0.25).unwrap();
        assert_abs_diff_eq!(k.re, 5.0 - 24f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn kappa_errors() {
        // A = 1/(1+4d) puts s = -2: double root -1 on the unit circle.
        assert!(matches!(kappa_root(1.0 / 3.0, 0.5), Err(Error::MarginalMode { .. })));
        assert!(matches!(kappa_root(0.0, 0.5), Err(Error::Singularity(_))));
        assert!(kappa_root(2.0, 0.0).is_err());
    }

    #[test]
    fn kappa_satisfies_quadratic_and_pairs_with_reciprocal() {
        for &d in &[0.01, 0.5, 3.0, 200.0] {
            for &(re, im) in &[(1.5, 0.0), (-2.0, 0.1), (0.0, 1.3), (7.0, -4.0), (-1.01, 0.0)] {
                let a = Complex64::new(re, im);
                let k = kappa_root(a, d).unwrap();
                assert!(k.norm() <= 1.0);
                for kk in [k, k.inv()] {
                    let lhs = ONE - a.inv();
                    let rhs = d * (kk - 2.0 + kk.inv());
                    assert!((lhs - rhs).norm() <= 1e-12 * (lhs.norm() + d * (2.0 + kk.norm() + kk.inv().norm())));
                }
            }
        }
    }

    #[test]
    fn residual_singularities() {
        let s = SchemeSpec::bulk_explicit();
        let p = pm(1.0, 1.0, 1.0, 1.0, 1.0);
        assert!(dispersion_residual(&s, &p, ONE).is_err());
        assert!(dispersion_residual(&s, &p, ZERO).is_err());
        assert!(dispersion_residual(&s, &p, c(2.0)).is_ok());
    }

    #[test]
    fn one_way_roots_hand_values() {
        assert_eq!(one_way_explicit_roots(0.0, 2.0), (1.0, 0.0));
        assert_eq!(one_way_explicit_roots(1.0, 1.0), (2.0, 0.0));
        let (a, b) = one_way_explicit_roots(4.0, 1.0);
        assert_abs_diff_eq!(a, (5.0 + 73f64.sqrt()) / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b, (5.0 - 73f64.sqrt()) / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn bounds_hand_values() {
        assert_abs_diff_eq!(one_way_explicit_bound(1e-12), 2.0, epsilon = 1e-11);
        assert_eq!(one_way_explicit_bound(1.5), 3.0);
        assert_eq!(one_way_explicit_bound(4.0), 4.0);
        assert_eq!(beljaars_bound(0.0), 2.0);
        assert_eq!(beljaars_bound(1.0), 3.0);
        assert_abs_diff_eq!(beljaars_bound(4.0), 2.0 + 2f64.powf(1.1), epsilon = 1e-15);
        assert_abs_diff_eq!(beljaars_bound(4.0), 4.14354, epsilon = 1e-5);
    }

    #[test]
    fn implicit_mode_hand_values() {
        assert!(matches!(
            one_way_implicit_mode(0.7, 0.7),
            Err(Error::KappaPole { amplification }) if amplification == ZERO
        ));
        let m = one_way_implicit_mode(2.0, 1.0).unwrap();
        assert_abs_diff_eq!(m.amplification.re, 0.2, epsilon = 1e-15);
        assert_eq!(m.kappa_minus_inv, c(-1.0));
        assert!(m.admissible);
        let m = one_way_implicit_mode(1.0, 4.0).unwrap();
        assert_abs_diff_eq!(m.amplification.re, 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.kappa_minus_inv.re, 4.0 / 3.0, epsilon = 1e-15);
        assert!(!m.admissible);
    }

    #[test]
    fn implicit_mode_solves_residual() {
        let s = SchemeSpec::one_way(FluxTreatment::Implicit);
        for &(beta, d) in &[(2.0, 1.0), (5.0, 0.3), (0.1, 4.0)] {
            let m = one_way_implicit_mode(beta, d).unwrap();
            let a = m.amplification;
            // Residual with the mode's own kappa, independent of branch choice.
            let w = a.inv();
            let r = (ONE - w) + d * (ONE - m.kappa_minus_inv) + beta;
            assert!(r.norm() < 1e-12, "{r}");
            if m.admissible {
                // beta = 2d puts kappa on the branch point, where the residual is O(sqrt(eps)).
                let p = pm(0.0, d, 0.0, beta, 1.0);
                assert!(dispersion_residual(&s, &p, a).unwrap().norm() < 1e-7);
            }
        }
    }

    #[test]
    fn theorem_two_grid() {
        for &beta in &log_grid(1e-3, 1e3, 20) {
            for &d in &log_grid(1e-3, 1e3, 20) {
                match one_way_implicit_mode(beta, d) {
                    Ok(m) if m.admissible => assert!(m.amplification.norm() <= 1.0 + 1e-12, "{beta} {d}"),
                    Ok(_) => {}
                    Err(Error::KappaPole { .. }) => {}
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }

    #[test]
    fn minus_branch_bounded_for_small_beta() {
        for &beta in &[0.0, 0.1, 0.5, 0.9, 0.999] {
            for &d in &log_grid(1e-2, 1e3, 25) {
                let (_, am) = one_way_explicit_roots(beta, d);
                assert!(am <= 1.0, "{beta} {d} {am}");
                assert!(am.abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn one_way_explicit_residual_vanishes_on_closed_form_roots() {
        let s = SchemeSpec::one_way(FluxTreatment::Explicit);
        for &(beta, d) in &[(4.0, 1.0), (6.0, 0.5), (30.0, 100.0)] {
            let (ap, am) = one_way_explicit_roots(beta, d);
            let p = pm(0.0, d, 0.0, beta, 1.0);
            assert!(am < -1.0);
            assert!(dispersion_residual(&s, &p, c(am)).unwrap().norm() < 1e-12);
            // The other root needs the growing kappa branch.
            assert!(dispersion_residual(&s, &p, c(ap)).unwrap().norm() > 1e-3);
            let k = kappa_root(ap, d).unwrap().inv();
            let r = (ONE - 1.0 / ap) + d * (ONE - k) + beta / ap;
            assert!(r.norm() < 1e-10);
        }
    }

    #[test]
    fn scan_finds_one_way_root() {
        let s = SchemeSpec::one_way(FluxTreatment::Explicit);
        let p = pm(0.0, 1.0, 0.0, 4.0, 1.0);
        let res = gks_scan(&s, &p, &ScanOptions::default()).unwrap();
        assert_eq!(res.roots.len(), 1, "{res:?}");
        assert_abs_diff_eq!(res.roots[0].amplification.re, (5.0 - 73f64.sqrt()) / 2.0, epsilon = 1e-8);
        assert!(res.roots[0].admissible);
        assert_eq!(res.verdict(), GksVerdict::Unstable);
        for root in &res.roots {
            assert!(dispersion_residual(&s, &p, root.amplification).unwrap().norm() <= 1e-10);
        }

        let p = pm(0.0, 1.0, 0.0, 1.0, 1.0);
        let res = gks_scan(&s, &p, &ScanOptions::default()).unwrap();
        assert!(res.roots.is_empty(), "{res:?}");
        assert_eq!(res.verdict(), GksVerdict::Stable);
    }

    #[test]
    fn theorem_one_agreement() {
        let s = SchemeSpec::one_way(FluxTreatment::Explicit);
        for &d in &log_grid(1e-2, 1e3, 25) {
            let bound = one_way_explicit_bound(d);
            for &f in &[0.9, 0.999, 1.001, 1.1] {
                let beta = bound * f;
                let p = pm(0.0, d, 0.0, beta, 1.0);
                let res = gks_scan(&s, &p, &ScanOptions::default()).unwrap();
                assert_eq!(!res.roots.is_empty(), beta > bound + 1e-6, "d={d} beta={beta} {res:?}");
                assert!(res.unconfirmed.is_empty(), "d={d} beta={beta} {res:?}");
            }
        }
    }

    #[test]
    fn partially_implicit_bulk_has_no_roots() {
        let s = SchemeSpec::bulk_partial();
        let g = log_grid(1e-2, 1e2, 4);
        for &dp in &g {
            for &dm in &g {
                for &bp in &g {
                    for &bm in &g {
                        let p = pm(dp, dm, bp, bm, 1.0);
                        let res = gks_scan(&s, &p, &ScanOptions::covering(&s, &p).unwrap()).unwrap();
                        assert_eq!(res.verdict(), GksVerdict::Stable, "{p:?} {res:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn bulk_explicit_small_beta_plus_limit() {
        // A = 1 is the steady mode; the residual vanishes there for any coupling.
        let s = SchemeSpec::bulk_explicit();
        let p = pm(1.0, 1.0, 1e-12, 0.5, 1.0);
        let r = dispersion_residual(&s, &p, c(1.0 + 1e-9)).unwrap();
        assert!(r.norm() < 1e-4);
    }

    #[test]
    fn dn_implicit_small_r_root() {
        let s = SchemeSpec::dn_implicit();
        for &dm in &[0.1, 1.0, 10.0] {
            let p = pm(0.37, dm, 0.0, 0.0, 1e-12);
            let target = 1.0 / (4.0 * dm + 1.0);
            // Start left of the branch cut [target, 1].
            let (z, _) = refine_root(&s, &p, c(target * 0.7), 1e-12).expect("converges");
            assert!((z.norm() - target).abs() < 1e-6, "{dm}: {z} vs {target}");
        }
    }

    #[test]
    fn quartic_roots_outside_unit_circle() {
        let roots = polynomial_roots(&dn_implicit_large_r_quartic(1.0)).unwrap();
        assert_eq!(roots.len(), 4);
        for z in &roots {
            assert!(z.norm() > 1.0, "{z}");
            let q = dn_implicit_large_r_quartic(1.0);
            let v = q.iter().fold(ZERO, |acc, &k| acc * z + k);
            assert!(v.norm() < 1e-12);
        }
        assert!(roots.iter().any(|z| (z - c(2.0)).norm() < 1e-12));
    }

    #[test]
    fn bound_covers_matrix_spectrum() {
        let p = pm(0.7, 2.0, 5.0, 3.0, 4.0);
        for s in SchemeSpec::all_variants() {
            let b = amplification_bound(&s, &p).unwrap();
            let pair = assemble(&s, &p, 15, 12).unwrap();
            let lm = crate::spectral::pair_lambda_max(&pair).unwrap();
            assert!(lm <= b * (1.0 + 1e-12), "{s}: {lm} > {b}");
        }
    }
}
