//! Monolithic update pairs `A T^{n+1} = B T^n` for every coupling scheme.
//!
//! Unknowns are ordered negative domain first (farthest cell first), then
//! the shared interface node for Dirichlet-Neumann grids, then the positive
//! domain (interface-adjacent cell first). Every `A` and `B` produced here
//! is tridiagonal under that ordering.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Tridiagonal};
use crate::params::DimensionlessParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interface {
    Bulk,
    DirichletNeumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Integrator {
    Explicit,
    /// Backward Euler.
    Implicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formulation {
    Simultaneous,
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    TwoWay,
    /// Negative domain forced by a fixed positive-side state.
    OneWayNegative,
}

/// Flux evaluation for the one-way model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FluxTreatment {
    Explicit,
    Implicit,
}

/// Closure beyond the outermost cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FarField {
    /// Homogeneous Dirichlet value one cell beyond the grid.
    #[default]
    Dirichlet,
    /// Zero flux through the outer face. Used to check conservation.
    Reflective,
}

/// Which interface condition, flux coupling and formulation a scheme uses.
///
/// `theta = 1` evaluates the own-side interface state at the new time level,
/// `gamma = 1` does the same for the opposite side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeSpec {
    pub interface: Interface,
    pub integrator: Integrator,
    pub theta: u8,
    pub gamma: u8,
    pub formulation: Formulation,
    pub direction: Direction,
}

impl SchemeSpec {
    fn bulk(theta: u8, gamma: u8, formulation: Formulation) -> Self {
        Self {
            interface: Interface::Bulk,
            integrator: Integrator::Implicit,
            theta,
            gamma,
            formulation,
            direction: Direction::TwoWay,
        }
    }

    pub fn bulk_explicit() -> Self {
        Self::bulk(0, 0, Formulation::Simultaneous)
    }

    pub fn bulk_partial() -> Self {
        Self::bulk(1, 0, Formulation::Simultaneous)
    }

    pub fn bulk_implicit() -> Self {
        Self::bulk(1, 1, Formulation::Simultaneous)
    }

    pub fn bulk_sequential() -> Self {
        Self::bulk(1, 1, Formulation::Sequential)
    }

    pub fn dn_explicit() -> Self {
        Self {
            interface: Interface::DirichletNeumann,
            integrator: Integrator::Explicit,
            theta: 0,
            gamma: 0,
            formulation: Formulation::Simultaneous,
            direction: Direction::TwoWay,
        }
    }

    pub fn dn_implicit() -> Self {
        Self {
            integrator: Integrator::Implicit,
            ..Self::dn_explicit()
        }
    }

    pub fn one_way(flux: FluxTreatment) -> Self {
        Self {
            interface: Interface::Bulk,
            integrator: Integrator::Implicit,
            theta: match flux {
                FluxTreatment::Explicit => 0,
                FluxTreatment::Implicit => 1,
            },
            gamma: 0,
            formulation: Formulation::Simultaneous,
            direction: Direction::OneWayNegative,
        }
    }

    /// The named variants, in a fixed order.
    pub fn all_variants() -> [SchemeSpec; 8] {
        [
            Self::bulk_explicit(),
            Self::bulk_partial(),
            Self::bulk_implicit(),
            Self::bulk_sequential(),
            Self::dn_explicit(),
            Self::dn_implicit(),
            Self::one_way(FluxTreatment::Explicit),
            Self::one_way(FluxTreatment::Implicit),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta > 1 || self.gamma > 1 {
            return Err(Error::Scheme(format!(
                "theta and gamma must be 0 or 1 (got {}, {})",
                self.theta, self.gamma
            )));
        }
        if self.formulation == Formulation::Sequential {
            if self.integrator != Integrator::Implicit {
                return Err(Error::Scheme("sequential formulation requires the implicit integrator".into()));
            }
            if self.interface != Interface::Bulk || self.direction != Direction::TwoWay {
                return Err(Error::Scheme("sequential formulation is defined for two-way bulk coupling only".into()));
            }
        }
        match (self.interface, self.direction) {
            (Interface::Bulk, _) if self.integrator == Integrator::Explicit => Err(Error::Scheme(
                "bulk coupling is assembled with backward-Euler subdomains only".into(),
            )),
            (Interface::DirichletNeumann, Direction::OneWayNegative) => {
                Err(Error::Scheme("one-way coupling uses the bulk interface".into()))
            }
            (Interface::Bulk, Direction::OneWayNegative) if self.gamma != 0 => Err(Error::Scheme(
                "one-way coupling has no opposite-side unknowns (gamma must be 0)".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn flux_treatment(&self) -> FluxTreatment {
        if self.theta == 1 {
            FluxTreatment::Implicit
        } else {
            FluxTreatment::Explicit
        }
    }

    /// Number of unknowns for the given subdomain sizes.
    pub fn dimension(&self, n_minus: usize, n_plus: usize) -> usize {
        match (self.interface, self.direction) {
            (_, Direction::OneWayNegative) => n_minus,
            (Interface::Bulk, _) => n_minus + n_plus,
            (Interface::DirichletNeumann, _) => n_minus + n_plus + 1,
        }
    }

    /// Short name of a named variant, or a generic description.
    pub fn name(&self) -> String {
        for (s, name) in Self::all_variants().iter().zip(VARIANT_NAMES) {
            if s == self {
                return name.to_string();
            }
        }
        format!(
            "{:?}/{:?}/theta={}/gamma={}/{:?}/{:?}",
            self.interface, self.integrator, self.theta, self.gamma, self.formulation, self.direction
        )
    }
}

pub const VARIANT_NAMES: [&str; 8] = [
    "bulk-explicit",
    "bulk-partial",
    "bulk-implicit",
    "bulk-sequential",
    "dn-explicit",
    "dn-implicit",
    "one-way-explicit",
    "one-way-implicit",
];

impl FromStr for SchemeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        VARIANT_NAMES
            .iter()
            .position(|n| *n == key)
            .map(|i| Self::all_variants()[i])
            .ok_or_else(|| {
                Error::Scheme(format!("unknown scheme `{s}` (expected one of {})", VARIANT_NAMES.join(", ")))
            })
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Coupling pattern of `A` across the subdomain split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AStructure {
    /// Both cross entries nonzero.
    Tridiagonal,
    /// Only the lower cross entry is nonzero.
    BlockLowerTriangular,
    BlockDiagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub n_minus: usize,
    pub n_plus: usize,
    /// Dirichlet-Neumann grids carry one shared interface node at index `n_minus`.
    pub shared_node: bool,
    /// First index of the positive-domain block (equals `n` for one-way).
    pub split: usize,
    pub a_structure: AStructure,
    pub far_field: FarField,
}

/// `A` and `B` of the monolithic update, both stored tridiagonally.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdatePair {
    pub a: Tridiagonal,
    pub b: Tridiagonal,
    pub layout: Layout,
}

impl UpdatePair {
    fn new(a: Tridiagonal, b: Tridiagonal, n_minus: usize, n_plus: usize, shared_node: bool, far_field: FarField) -> Self {
        let n = a.n();
        let split = if n_plus == 0 {
            n
        } else if shared_node {
            n_minus + 1
        } else {
            n_minus
        };
        let a_structure = if split == 0 || split >= n {
            AStructure::BlockDiagonal
        } else {
            match (a.get(split - 1, split) != 0.0, a.get(split, split - 1) != 0.0) {
                (false, false) => AStructure::BlockDiagonal,
                (false, true) => AStructure::BlockLowerTriangular,
                _ => AStructure::Tridiagonal,
            }
        };
        Self {
            a,
            b,
            layout: Layout {
                n_minus,
                n_plus,
                shared_node,
                split,
                a_structure,
                far_field,
            },
        }
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn dense_a(&self) -> DenseMatrix {
        self.a.to_dense()
    }

    pub fn dense_b(&self) -> DenseMatrix {
        self.b.to_dense()
    }
}

fn check_sizes(n_minus: usize, n_plus: usize, need_plus: bool) -> Result<()> {
    if n_minus == 0 || (need_plus && n_plus == 0) {
        return Err(Error::ParameterDomain(format!(
            "cell counts must be at least 1 (n_minus={n_minus}, n_plus={n_plus})"
        )));
    }
    Ok(())
}

fn check_flag(name: &str, v: u8) -> Result<f64> {
    match v {
        0 => Ok(0.0),
        1 => Ok(1.0),
        _ => Err(Error::Scheme(format!("{name} must be 0 or 1, got {v}"))),
    }
}

/// Backward-Euler rows `[-d, 1+2d, -d]` on `range` of `a`, with the
/// far-field closure applied to row `outer`.
fn implicit_block(a: &mut Tridiagonal, range: std::ops::Range<usize>, d: f64, outer: usize, far: FarField) {
    for i in range.clone() {
        a.set(i, i, 1.0 + 2.0 * d);
        if i > range.start {
            a.set(i, i - 1, -d);
        }
        if i + 1 < range.end {
            a.set(i, i + 1, -d);
        }
    }
    if far == FarField::Reflective {
        a.set(outer, outer, 1.0 + d);
    }
}

/// Explicit rows `[d, 1-2d, d]`.
fn explicit_block(b: &mut Tridiagonal, range: std::ops::Range<usize>, d: f64, outer: usize, far: FarField) {
    for i in range.clone() {
        b.set(i, i, 1.0 - 2.0 * d);
        if i > range.start {
            b.set(i, i - 1, d);
        }
        if i + 1 < range.end {
            b.set(i, i + 1, d);
        }
    }
    if far == FarField::Reflective {
        b.set(outer, outer, 1.0 - d);
    }
}

/// Two-way bulk coupling with flux flags `theta`, `gamma`.
pub fn assemble_bulk(
    p: &DimensionlessParams,
    n_minus: usize,
    n_plus: usize,
    theta: u8,
    gamma: u8,
    formulation: Formulation,
) -> Result<UpdatePair> {
    assemble_bulk_with(p, n_minus, n_plus, theta, gamma, formulation, FarField::Dirichlet)
}

pub fn assemble_bulk_with(
    p: &DimensionlessParams,
    n_minus: usize,
    n_plus: usize,
    theta: u8,
    gamma: u8,
    formulation: Formulation,
    far: FarField,
) -> Result<UpdatePair> {
    p.validate()?;
    check_sizes(n_minus, n_plus, true)?;
    let th = check_flag("theta", theta)?;
    let ga = check_flag("gamma", gamma)?;
    let n = n_minus + n_plus;
    let (im, ip) = (n_minus - 1, n_minus);
    let (dm, dp, bm, bp) = (p.d_minus, p.d_plus, p.beta_minus, p.beta_plus);

    let mut a = Tridiagonal::identity(n);
    implicit_block(&mut a, 0..n_minus, dm, 0, far);
    implicit_block(&mut a, n_minus..n, dp, n - 1, far);
    a.set(im, im, 1.0 + dm + th * bm);
    a.set(im, ip, -ga * bm);
    a.set(ip, ip, 1.0 + dp + th * bp);
    a.set(ip, im, -ga * bp);

    let mut b = Tridiagonal::identity(n);
    b.set(im, im, 1.0 - (1.0 - th) * bm);
    b.set(im, ip, (1.0 - ga) * bm);
    b.set(ip, im, (1.0 - ga) * bp);
    b.set(ip, ip, 1.0 - (1.0 - th) * bp);

    if formulation == Formulation::Sequential {
        a.set(im, ip, 0.0);
        b.set(im, ip, bm);
    }
    Ok(UpdatePair::new(a, b, n_minus, n_plus, false, far))
}

/// Explicit Dirichlet-Neumann coupling on the shared-node grid.
pub fn assemble_dn_explicit(p: &DimensionlessParams, n_minus: usize, n_plus: usize) -> Result<UpdatePair> {
    assemble_dn_explicit_with(p, n_minus, n_plus, FarField::Dirichlet)
}

pub fn assemble_dn_explicit_with(
    p: &DimensionlessParams,
    n_minus: usize,
    n_plus: usize,
    far: FarField,
) -> Result<UpdatePair> {
    p.validate()?;
    check_sizes(n_minus, n_plus, true)?;
    let n = n_minus + n_plus + 1;
    let k = n_minus;
    let (dm, dp, r) = (p.d_minus, p.d_plus, p.r);
    let w = 0.5 * (1.0 + r);

    let mut a = Tridiagonal::identity(n);
    a.set(k, k, w);

    let mut b = Tridiagonal::identity(n);
    explicit_block(&mut b, 0..k + 1, dm, 0, far);
    explicit_block(&mut b, k..n, dp, n - 1, far);
    b.set(k, k - 1, dm);
    b.set(k, k, w - dm - dp * r);
    b.set(k, k + 1, dp * r);
    Ok(UpdatePair::new(a, b, n_minus, n_plus, true, far))
}

/// Backward-Euler subdomains with explicit Dirichlet-Neumann interface data.
pub fn assemble_dn_implicit(p: &DimensionlessParams, n_minus: usize, n_plus: usize) -> Result<UpdatePair> {
    assemble_dn_implicit_with(p, n_minus, n_plus, FarField::Dirichlet)
}

pub fn assemble_dn_implicit_with(
    p: &DimensionlessParams,
    n_minus: usize,
    n_plus: usize,
    far: FarField,
) -> Result<UpdatePair> {
    p.validate()?;
    check_sizes(n_minus, n_plus, true)?;
    let n = n_minus + n_plus + 1;
    let k = n_minus;
    let (dm, dp, r) = (p.d_minus, p.d_plus, p.r);
    let w = 0.5 * (1.0 + r);

    let mut a = Tridiagonal::identity(n);
    implicit_block(&mut a, 0..k + 1, dm, 0, far);
    a.set(k, k, w + dm);
    implicit_block(&mut a, k + 1..n, dp, n - 1, far);
    a.set(k + 1, k + 1, 1.0 + dp);
    if far == FarField::Reflective && n_plus == 1 {
        a.set(k + 1, k + 1, 1.0);
    }

    let mut b = Tridiagonal::identity(n);
    b.set(k, k, w - dp * r);
    b.set(k, k + 1, dp * r);
    b.set(k + 1, k, dp);
    b.set(k + 1, k + 1, 1.0 - dp);
    Ok(UpdatePair::new(a, b, n_minus, n_plus, true, far))
}

/// Negative domain forced through a fixed zero positive-side state.
pub fn assemble_one_way(p: &DimensionlessParams, n_minus: usize, flux: FluxTreatment) -> Result<UpdatePair> {
    assemble_one_way_with(p, n_minus, flux, FarField::Dirichlet)
}

pub fn assemble_one_way_with(
    p: &DimensionlessParams,
    n_minus: usize,
    flux: FluxTreatment,
    far: FarField,
) -> Result<UpdatePair> {
    p.validate()?;
    check_sizes(n_minus, 0, false)?;
    let n = n_minus;
    let (dm, bm) = (p.d_minus, p.beta_minus);
    let mut a = Tridiagonal::identity(n);
    implicit_block(&mut a, 0..n, dm, 0, far);
    let mut b = Tridiagonal::identity(n);
    match flux {
        FluxTreatment::Explicit => {
            a.set(n - 1, n - 1, 1.0 + dm);
            b.set(n - 1, n - 1, 1.0 - bm);
        }
        FluxTreatment::Implicit => a.set(n - 1, n - 1, 1.0 + dm + bm),
    }
    Ok(UpdatePair::new(a, b, n_minus, 0, false, far))
}

/// Assembles the pair for any admissible scheme.
pub fn assemble(scheme: &SchemeSpec, p: &DimensionlessParams, n_minus: usize, n_plus: usize) -> Result<UpdatePair> {
    assemble_with(scheme, p, n_minus, n_plus, FarField::Dirichlet)
}

pub fn assemble_with(
    scheme: &SchemeSpec,
    p: &DimensionlessParams,
    n_minus: usize,
    n_plus: usize,
    far: FarField,
) -> Result<UpdatePair> {
    scheme.validate()?;
    match (scheme.direction, scheme.interface, scheme.integrator) {
        (Direction::OneWayNegative, _, _) => assemble_one_way_with(p, n_minus, scheme.flux_treatment(), far),
        (Direction::TwoWay, Interface::Bulk, _) => {
            assemble_bulk_with(p, n_minus, n_plus, scheme.theta, scheme.gamma, scheme.formulation, far)
        }
        (Direction::TwoWay, Interface::DirichletNeumann, Integrator::Explicit) => {
            assemble_dn_explicit_with(p, n_minus, n_plus, far)
        }
        (Direction::TwoWay, Interface::DirichletNeumann, Integrator::Implicit) => {
            assemble_dn_implicit_with(p, n_minus, n_plus, far)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(d_plus: f64, d_minus: f64, beta_plus: f64, beta_minus: f64, r: f64) -> DimensionlessParams {
        DimensionlessParams::new(d_plus, d_minus, beta_plus, beta_minus, r).unwrap()
    }

    fn dense(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn no_dynamics_gives_identity() {
        let p = params(0.0, 0.0, 0.0, 0.0, 1.0);
        for (th, ga) in [(0, 0), (1, 0), (1, 1)] {
            let pair = assemble_bulk(&p, 3, 2, th, ga, Formulation::Simultaneous).unwrap();
            assert_eq!(pair.dense_a(), DenseMatrix::identity(5));
            assert_eq!(pair.dense_b(), DenseMatrix::identity(5));
        }
    }

    #[test]
    fn bulk_explicit_interface_block() {
        let d = 0.7;
        let p = params(d, d, 0.3, 0.2, 1.0);
        let pair = assemble_bulk(&p, 2, 2, 0, 0, Formulation::Simultaneous).unwrap();
        let a = pair.dense_a();
        let b = pair.dense_b();
        assert_eq!(a[(1, 1)], 1.0 + d);
        assert_eq!(a[(2, 2)], 1.0 + d);
        assert_eq!(a[(1, 2)], 0.0);
        assert_eq!(a[(2, 1)], 0.0);
        assert_eq!(a[(0, 0)], 1.0 + 2.0 * d);
        assert_eq!(b.block(1..3, 1..3), dense(&[&[1.0 - 0.2, 0.2], &[0.3, 1.0 - 0.3]]));
        assert_eq!(pair.layout.a_structure, AStructure::BlockDiagonal);
    }

    #[test]
    fn bulk_single_cells_beta_two() {
        let p = params(0.0, 0.0, 2.0, 2.0, 1.0);
        let pair = assemble_bulk(&p, 1, 1, 0, 0, Formulation::Simultaneous).unwrap();
        assert_eq!(pair.dense_a(), DenseMatrix::identity(2));
        assert_eq!(pair.dense_b(), dense(&[&[-1.0, 2.0], &[2.0, -1.0]]));
    }

    #[test]
    fn bulk_implicit_rows() {
        let p = params(0.5, 0.25, 3.0, 2.0, 1.0);
        let a = assemble_bulk(&p, 3, 3, 1, 1, Formulation::Simultaneous).unwrap().dense_a();
        assert_eq!(a.row(2)[1..4], [-0.25, 1.0 + 0.25 + 2.0, -2.0]);
        assert_eq!(a.row(3)[2..5], [-3.0, 1.0 + 0.5 + 3.0, -0.5]);
        assert_eq!(a.row(1)[0..3], [-0.25, 1.5, -0.25]);
        assert_eq!(a.row(5)[4..6], [-0.5, 2.0]);
    }

    #[test]
    fn sequential_is_block_lower_triangular() {
        let p = params(0.5, 0.25, 3.0, 2.0, 1.0);
        let pair = assemble_bulk(&p, 3, 2, 1, 1, Formulation::Sequential).unwrap();
        assert_eq!(pair.layout.a_structure, AStructure::BlockLowerTriangular);
        assert!(pair.a.is_block_lower_triangular(3));
        assert_eq!(pair.b.get(2, 3), 2.0);
        assert_eq!(pair.b.get(2, 2), 1.0);

        let det = |m: &DenseMatrix| -> f64 {
            let e = crate::linalg::eigen::eigenvalues(m).unwrap();
            e.iter().fold(num_complex::Complex64::new(1.0, 0.0), |acc, v| acc * v).re
        };
        let a = pair.dense_a();
        let whole = det(&a);
        let parts = det(&a.block(0..3, 0..3)) * det(&a.block(3..5, 3..5));
        assert!((whole - parts).abs() < 1e-10 * whole.abs());
    }

    #[test]
    fn dn_explicit_rows() {
        let p = params(0.0, 0.0, 0.0, 0.0, 3.0);
        let pair = assemble_dn_explicit(&p, 2, 2).unwrap();
        assert_eq!(pair.a.get(2, 2), 2.0);
        assert_eq!(pair.b.get(2, 2), 2.0);

        let d = 0.3;
        let p = params(d, d, 0.0, 0.0, 1.0);
        let pair = assemble_dn_explicit(&p, 3, 3).unwrap();
        assert_eq!(pair.a.get(3, 3), 1.0);
        let b = pair.dense_b();
        assert_eq!(b[(3, 2)], d);
        assert_eq!(b[(3, 4)], d);
        approx::assert_abs_diff_eq!(b[(3, 3)], 1.0 - 2.0 * d, epsilon = 1e-15);

        let p = params(0.5, 0.5, 0.0, 0.0, 7.0);
        let b = assemble_dn_explicit(&p, 3, 3).unwrap().dense_b();
        assert_eq!(b.row(1)[0..3], [0.5, 0.0, 0.5]);
        assert_eq!(b.row(5)[4..7], [0.5, 0.0, 0.5]);
        assert_eq!(b.row(6)[5..7], [0.5, 0.0]);
    }

    #[test]
    fn dn_implicit_rows() {
        let p = params(0.0, 0.4, 0.0, 0.0, 1.0);
        let pair = assemble_dn_implicit(&p, 2, 3).unwrap();
        assert_eq!(pair.a.get(3, 3), 1.0);
        assert_eq!(pair.a.get(3, 4), 0.0);
        assert_eq!(pair.b.get(3, 2), 0.0);
        assert_eq!(pair.b.get(3, 3), 1.0);

        let p = params(0.0, 0.4, 0.0, 0.0, 1e-300);
        let pair = assemble_dn_implicit(&p, 2, 3).unwrap();
        assert_eq!([pair.a.get(2, 1), pair.a.get(2, 2)], [-0.4, 0.5 + 0.4]);
        assert_eq!([pair.b.get(2, 2), pair.b.get(2, 3)], [0.5, 0.0]);

        let p = params(1.0, 0.4, 0.0, 0.0, 1.0);
        let pair = assemble_dn_implicit(&p, 2, 3).unwrap();
        assert_eq!([pair.b.get(2, 2), pair.b.get(2, 3)], [0.0, 1.0]);
        assert_eq!(pair.a.get(2, 2), 1.4);
        assert_eq!(pair.dense_a().row(3)[3..5], [2.0, -1.0]);
        assert_eq!(pair.dense_a().row(4)[3..6], [-1.0, 3.0, -1.0]);
        assert_eq!(pair.layout.a_structure, AStructure::BlockDiagonal);
    }

    #[test]
    fn one_way_single_cell() {
        let p = params(0.0, 0.5, 0.0, 0.25, 1.0);
        let e = assemble_one_way(&p, 1, FluxTreatment::Explicit).unwrap();
        assert_eq!(e.b.get(0, 0) / e.a.get(0, 0), 0.75 / 1.5);
        let i = assemble_one_way(&p, 1, FluxTreatment::Implicit).unwrap();
        assert_eq!(i.b.get(0, 0) / i.a.get(0, 0), 1.0 / 1.75);

        let p = params(0.0, 0.5, 0.0, 0.0, 1.0);
        assert_eq!(
            assemble_one_way(&p, 4, FluxTreatment::Explicit).unwrap().dense_a(),
            assemble_one_way(&p, 4, FluxTreatment::Implicit).unwrap().dense_a()
        );
    }

    #[test]
    fn one_way_matches_bulk_upper_left_block() {
        let p = params(0.8, 0.3, 1.7, 2.2, 1.0);
        for (flux, theta) in [(FluxTreatment::Explicit, 0), (FluxTreatment::Implicit, 1)] {
            let one = assemble_one_way(&p, 4, flux).unwrap();
            let two = assemble_bulk(&p, 4, 3, theta, 0, Formulation::Simultaneous).unwrap();
            assert_eq!(one.dense_a(), two.dense_a().block(0..4, 0..4));
            assert_eq!(one.dense_b(), two.dense_b().block(0..4, 0..4));
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in SchemeSpec::all_variants() {
            s.validate().unwrap();
            assert_eq!(s.name().parse::<SchemeSpec>().unwrap(), s);
        }
        assert!("bulk-magic".parse::<SchemeSpec>().is_err());
    }

    #[test]
    fn invalid_schemes_rejected() {
        let mut s = SchemeSpec::bulk_explicit();
        s.theta = 2;
        assert!(s.validate().is_err());
        let p = DimensionlessParams::default();
        assert!(assemble_bulk(&p, 2, 2, 0, 3, Formulation::Simultaneous).is_err());
        let mut s = SchemeSpec::dn_explicit();
        s.formulation = Formulation::Sequential;
        assert!(s.validate().is_err());
        let mut s = SchemeSpec::dn_implicit();
        s.direction = Direction::OneWayNegative;
        assert!(s.validate().is_err());
        assert!(assemble_bulk(&p, 0, 2, 0, 0, Formulation::Simultaneous).is_err());
    }

    #[test]
    fn reflective_closure_rows_sum_to_one() {
        let p = params(0.4, 0.7, 0.0, 0.0, 1.0);
        for s in SchemeSpec::all_variants() {
            let pair = assemble_with(&s, &p, 4, 3, FarField::Reflective).unwrap();
            let a = pair.dense_a();
            let b = pair.dense_b();
            for j in 0..pair.n() {
                if pair.layout.shared_node && j == pair.layout.n_minus {
                    continue;
                }
                let ca: f64 = (0..pair.n()).map(|i| a[(i, j)]).sum();
                let cb: f64 = (0..pair.n()).map(|i| b[(i, j)]).sum();
                if s.interface == Interface::Bulk {
                    assert!((ca - 1.0).abs() < 1e-15 && (cb - 1.0).abs() < 1e-15, "{s} column {j}");
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn positive() -> impl Strategy<Value = f64> {
            (-3.0f64..3.0).prop_map(|e| 10f64.powf(e))
        }

        proptest! {
            #[test]
            fn implicit_a_strictly_dominant(
                dp in positive(), dm in positive(), bp in positive(), bm in positive(), r in positive(),
                nm in 1usize..8, np in 1usize..8,
            ) {
                let p = params(dp, dm, bp, bm, r);
                for s in SchemeSpec::all_variants() {
                    if s.integrator != Integrator::Implicit {
                        continue;
                    }
                    let pair = assemble(&s, &p, nm, np).unwrap();
                    prop_assert!(pair.a.is_strictly_diagonally_dominant(), "{}", s);
                }
            }

            #[test]
            fn stored_band_is_tridiagonal(
                dp in positive(), dm in positive(), bp in positive(), bm in positive(), r in positive(),
                nm in 1usize..8, np in 1usize..8,
            ) {
                let p = params(dp, dm, bp, bm, r);
                for s in SchemeSpec::all_variants() {
                    let pair = assemble(&s, &p, nm, np).unwrap();
                    prop_assert_eq!(pair.n(), s.dimension(nm, np));
                    prop_assert!(pair.dense_a().is_tridiagonal());
                    prop_assert!(pair.dense_b().is_tridiagonal());
                    prop_assert!(pair.a.nonzeros() <= 3 * pair.n());
                }
            }
        }
    }
}
