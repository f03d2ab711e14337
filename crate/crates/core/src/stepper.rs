//! Time stepping: the monolithic matrix iteration and partitioned steppers
//! that advance each subdomain with its own solve and exchange interface
//! data in the scheme's order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{
    assemble_with, Direction, FarField, Formulation, Integrator, Interface, Layout, SchemeSpec, UpdatePair,
};
use crate::error::{Error, Result};
use crate::linalg::{Tridiagonal, TridiagonalLu};
use crate::params::DimensionlessParams;

/// Temperatures on both subdomains.
///
/// `t_minus[0]` is the farthest negative cell and `t_minus[n-1]` touches the
/// interface; `t_plus[0]` touches the interface. The Dirichlet-Neumann shared
/// node is owned by the negative side.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t_minus: Vec<f64>,
    pub t_plus: Vec<f64>,
    pub shared_node: Option<f64>,
    pub step_index: u64,
}

impl State {
    pub fn zeros(layout: &Layout) -> Self {
        Self {
            t_minus: vec![0.0; layout.n_minus],
            t_plus: vec![0.0; layout.n_plus],
            shared_node: layout.shared_node.then_some(0.0),
            step_index: 0,
        }
    }

    /// Unpacks a vector in monolithic ordering.
    pub fn from_vector(layout: &Layout, v: &[f64], step_index: u64) -> Result<Self> {
        let n = layout.n_minus + layout.n_plus + usize::from(layout.shared_node);
        if v.len() != n {
            return Err(Error::Dimension(format!("state vector of length {} for {n} unknowns", v.len())));
        }
        let k = layout.n_minus;
        let (shared_node, plus_start) = if layout.shared_node { (Some(v[k]), k + 1) } else { (None, k) };
        Ok(Self {
            t_minus: v[..k].to_vec(),
            t_plus: v[plus_start..].to_vec(),
            shared_node,
            step_index,
        })
    }

    /// Packs into monolithic ordering.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(&self.t_minus);
        v.extend(self.shared_node);
        v.extend_from_slice(&self.t_plus);
        v
    }

    pub fn len(&self) -> usize {
        self.t_minus.len() + self.t_plus.len() + usize::from(self.shared_node.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_norm(&self) -> f64 {
        self.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.t_minus.iter().chain(self.shared_node.iter()).chain(self.t_plus.iter()).copied()
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(f64::is_finite)
    }

    fn scaled(&self, s: f64) -> Self {
        Self {
            t_minus: self.t_minus.iter().map(|v| v * s).collect(),
            t_plus: self.t_plus.iter().map(|v| v * s).collect(),
            shared_node: self.shared_node.map(|v| v * s),
            step_index: self.step_index,
        }
    }

    fn check(&self, layout: &Layout) -> Result<()> {
        if self.t_minus.len() != layout.n_minus
            || self.t_plus.len() != layout.n_plus
            || self.shared_node.is_some() != layout.shared_node
        {
            return Err(Error::Dimension(format!(
                "state ({}, {}, shared={}) does not match grid ({}, {}, shared={})",
                self.t_minus.len(),
                self.t_plus.len(),
                self.shared_node.is_some(),
                layout.n_minus,
                layout.n_plus,
                layout.shared_node
            )));
        }
        Ok(())
    }
}

/// Pseudo-random state with unit Euclidean norm.
pub fn random_state(layout: &Layout, seed: u64) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = layout.n_minus + layout.n_plus + usize::from(layout.shared_node);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    State::from_vector(layout, &v, 0).expect("length matches layout")
}

pub trait Stepper {
    fn layout(&self) -> &Layout;
    fn step(&self, state: &State) -> Result<State>;
}

/// `A T^{n+1} = B T^n` with `A` factored once.
#[derive(Debug, Clone)]
pub struct MonolithicStepper {
    pair: UpdatePair,
    lu: TridiagonalLu,
}

impl MonolithicStepper {
    pub fn new(pair: UpdatePair) -> Result<Self> {
        let lu = pair.a.factor()?;
        Ok(Self { pair, lu })
    }

    pub fn pair(&self) -> &UpdatePair {
        &self.pair
    }
}

impl Stepper for MonolithicStepper {
    fn layout(&self) -> &Layout {
        &self.pair.layout
    }

    fn step(&self, state: &State) -> Result<State> {
        state.check(&self.pair.layout)?;
        let mut v = self.pair.b.matvec(&state.to_vector());
        self.lu.solve_in_place(&mut v);
        State::from_vector(&self.pair.layout, &v, state.step_index + 1)
    }
}

/// One step of the matrix iteration.
pub fn step_monolithic(pair: &UpdatePair, state: &State) -> Result<State> {
    MonolithicStepper::new(pair.clone())?.step(state)
}

/// Factored backward-Euler block for one subdomain.
#[derive(Debug, Clone)]
struct Block {
    lu: TridiagonalLu,
}

impl Block {
    fn new(a: Tridiagonal) -> Result<Self> {
        Ok(Self { lu: a.factor()? })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.lu.solve(rhs)
    }
}

/// Backward-Euler rows on `n` cells; `outer` is the far-field row, the
/// opposite end row is left for the caller's interface treatment.
fn be_block(n: usize, d: f64, outer: usize, far: FarField) -> Tridiagonal {
    let mut a = Tridiagonal::identity(n);
    for i in 0..n {
        a.set(i, i, 1.0 + 2.0 * d);
        if i > 0 {
            a.set(i, i - 1, -d);
        }
        if i + 1 < n {
            a.set(i, i + 1, -d);
        }
    }
    if far == FarField::Reflective {
        a.set(outer, outer, 1.0 + d);
    }
    a
}

/// Explicit diffusion update `T + d (T_{j-1} - 2 T_j + T_{j+1})` of `t`, with
/// `left`/`right` supplying the neighbours beyond each end (`None` for a
/// reflective end).
fn explicit_diffuse(t: &[f64], d: f64, left: Option<f64>, right: Option<f64>) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|j| {
            let l = if j > 0 { t[j - 1] } else { left.unwrap_or(t[j]) };
            let r = if j + 1 < n { t[j + 1] } else { right.unwrap_or(t[j]) };
            t[j] + d * (l - 2.0 * t[j] + r)
        })
        .collect()
}

#[derive(Debug, Clone)]
enum Plan {
    /// Bulk flux with lagged opposite state: two independent solves.
    BulkLagged { neg: Block, pos: Block },
    /// Bulk flux with fresh opposite state on both sides: two solves per
    /// subdomain and a 2x2 interface system.
    BulkCoupled {
        neg: Block,
        pos: Block,
        v_neg: Vec<f64>,
        v_pos: Vec<f64>,
    },
    /// Negative side first with lagged positive state, then positive side
    /// with the fresh negative state.
    BulkSequential { neg: Block, pos: Block },
    DnExplicit,
    DnImplicit { neg: Block, pos: Block },
    OneWay { neg: Block },
}

/// Partitioned stepper for any scheme.
#[derive(Debug, Clone)]
pub struct PartitionedStepper {
    scheme: SchemeSpec,
    p: DimensionlessParams,
    layout: Layout,
    far: FarField,
    plan: Plan,
}

impl PartitionedStepper {
    pub fn new(scheme: &SchemeSpec, p: &DimensionlessParams, n_minus: usize, n_plus: usize) -> Result<Self> {
        Self::with_far_field(scheme, p, n_minus, n_plus, FarField::Dirichlet)
    }

    pub fn with_far_field(
        scheme: &SchemeSpec,
        p: &DimensionlessParams,
        n_minus: usize,
        n_plus: usize,
        far: FarField,
    ) -> Result<Self> {
        scheme.validate()?;
        p.validate()?;
        // Only the layout is taken from assembly; the subdomain operators
        // below are built independently.
        let layout = assemble_with(scheme, p, n_minus, n_plus, far)?.layout;
        let (dm, dp, bm, bp) = (p.d_minus, p.d_plus, p.beta_minus, p.beta_plus);
        let th = f64::from(scheme.theta);
        let ga = f64::from(scheme.gamma);
        let (nm, np) = (n_minus, n_plus);

        let plan = match (scheme.direction, scheme.interface, scheme.integrator) {
            (Direction::OneWayNegative, _, _) => {
                let mut a = be_block(nm, dm, 0, far);
                a.set(nm - 1, nm - 1, 1.0 + dm + th * bm);
                Plan::OneWay { neg: Block::new(a)? }
            }
            (Direction::TwoWay, Interface::Bulk, _) => {
                let mut an = be_block(nm, dm, 0, far);
                an.set(nm - 1, nm - 1, 1.0 + dm + th * bm);
                let mut ap = be_block(np, dp, np - 1, far);
                ap.set(0, 0, 1.0 + dp + th * bp);
                let (neg, pos) = (Block::new(an)?, Block::new(ap)?);
                if scheme.formulation == Formulation::Sequential {
                    Plan::BulkSequential { neg, pos }
                } else if scheme.gamma == 0 {
                    Plan::BulkLagged { neg, pos }
                } else {
                    let mut e = vec![0.0; nm];
                    e[nm - 1] = ga * bm;
                    let v_neg = neg.solve(&e);
                    let mut e = vec![0.0; np];
                    e[0] = ga * bp;
                    let v_pos = pos.solve(&e);
                    Plan::BulkCoupled { neg, pos, v_neg, v_pos }
                }
            }
            (Direction::TwoWay, Interface::DirichletNeumann, Integrator::Explicit) => Plan::DnExplicit,
            (Direction::TwoWay, Interface::DirichletNeumann, Integrator::Implicit) => {
                // Negative cells plus the shared node.
                let mut an = be_block(nm + 1, dm, 0, far);
                an.set(nm, nm, 0.5 * (1.0 + p.r) + dm);
                let mut ap = be_block(np, dp, np - 1, far);
                if far == FarField::Reflective && np == 1 {
                    ap.set(0, 0, 1.0);
                } else {
                    ap.set(0, 0, 1.0 + dp);
                }
                Plan::DnImplicit {
                    neg: Block::new(an)?,
                    pos: Block::new(ap)?,
                }
            }
        };
        Ok(Self {
            scheme: *scheme,
            p: *p,
            layout,
            far,
            plan,
        })
    }

    pub fn scheme(&self) -> &SchemeSpec {
        &self.scheme
    }
}

impl Stepper for PartitionedStepper {
    fn layout(&self) -> &Layout {
        &self.layout
    }

    fn step(&self, s: &State) -> Result<State> {
        s.check(&self.layout)?;
        let (dm, dp, bm, bp, r) = (self.p.d_minus, self.p.d_plus, self.p.beta_minus, self.p.beta_plus, self.p.r);
        let th = f64::from(self.scheme.theta);
        let ga = f64::from(self.scheme.gamma);
        let nm = self.layout.n_minus;
        let reflective = self.far == FarField::Reflective;
        let far_value = if reflective { None } else { Some(0.0) };

        let (t_minus, t_plus, shared_node) = match &self.plan {
            Plan::OneWay { neg } => {
                let mut rhs = s.t_minus.clone();
                rhs[nm - 1] -= (1.0 - th) * bm * s.t_minus[nm - 1];
                (neg.solve(&rhs), Vec::new(), None)
            }
            Plan::BulkLagged { neg, pos } => {
                let (tn, tp) = (s.t_minus[nm - 1], s.t_plus[0]);
                let mut rn = s.t_minus.clone();
                rn[nm - 1] += -(1.0 - th) * bm * tn + bm * tp;
                let mut rp = s.t_plus.clone();
                rp[0] += -(1.0 - th) * bp * tp + bp * tn;
                (neg.solve(&rn), pos.solve(&rp), None)
            }
            Plan::BulkCoupled { neg, pos, v_neg, v_pos } => {
                let (tn, tp) = (s.t_minus[nm - 1], s.t_plus[0]);
                let mut rn = s.t_minus.clone();
                rn[nm - 1] += -(1.0 - th) * bm * tn + (1.0 - ga) * bm * tp;
                let mut rp = s.t_plus.clone();
                rp[0] += -(1.0 - th) * bp * tp + (1.0 - ga) * bp * tn;
                let un = neg.solve(&rn);
                let up = pos.solve(&rp);
                // x = u_neg + y v_neg, y = u_pos + x v_pos at the interface cells.
                let (a, b) = (un[nm - 1], v_neg[nm - 1]);
                let (c, e) = (up[0], v_pos[0]);
                let det = 1.0 - b * e;
                if det.abs() <= f64::EPSILON {
                    return Err(Error::Singular { row: nm - 1, pivot: det, scale: 1.0 });
                }
                let x = (a + b * c) / det;
                let y = c + e * x;
                let t_minus = un.iter().zip(v_neg).map(|(u, v)| u + y * v).collect();
                let t_plus = up.iter().zip(v_pos).map(|(u, v)| u + x * v).collect();
                (t_minus, t_plus, None)
            }
            Plan::BulkSequential { neg, pos } => {
                let (tn, tp) = (s.t_minus[nm - 1], s.t_plus[0]);
                let mut rn = s.t_minus.clone();
                rn[nm - 1] += -(1.0 - th) * bm * tn + bm * tp;
                let t_minus = neg.solve(&rn);
                let fresh = t_minus[nm - 1];
                let mut rp = s.t_plus.clone();
                rp[0] += -(1.0 - th) * bp * tp + ga * bp * fresh + (1.0 - ga) * bp * tn;
                (t_minus, pos.solve(&rp), None)
            }
            Plan::DnExplicit => {
                let t0 = s.shared_node.expect("checked layout");
                // Dirichlet value to the positive side, advance it.
                let t_plus = explicit_diffuse(&s.t_plus, dp, Some(t0), far_value);
                // Lagged flux back, advance the negative side and the node.
                let flux = dp * (s.t_plus[0] - t0);
                let t_minus = explicit_diffuse(&s.t_minus, dm, far_value, Some(t0));
                let w = 0.5 * (1.0 + r);
                let node = t0 + (dm * (s.t_minus[nm - 1] - t0) + r * flux) / w;
                (t_minus, t_plus, Some(node))
            }
            Plan::DnImplicit { neg, pos } => {
                let t0 = s.shared_node.expect("checked layout");
                // First positive face is explicit, the rest implicit.
                let mut rp = s.t_plus.clone();
                rp[0] += dp * (t0 - s.t_plus[0]);
                let t_plus = pos.solve(&rp);
                let flux = dp * (s.t_plus[0] - t0);
                let mut rn = s.t_minus.clone();
                rn.push(0.5 * (1.0 + r) * t0 + r * flux);
                let mut sol = neg.solve(&rn);
                let node = sol.pop();
                (sol, t_plus, node)
            }
        };
        Ok(State {
            t_minus,
            t_plus,
            shared_node,
            step_index: s.step_index + 1,
        })
    }
}

/// One partitioned step.
pub fn step_partitioned(
    scheme: &SchemeSpec,
    p: &DimensionlessParams,
    n_minus: usize,
    n_plus: usize,
    state: &State,
) -> Result<State> {
    PartitionedStepper::new(scheme, p, n_minus, n_plus)?.step(state)
}

/// States and their max-norms. With renormalization each stored state has
/// unit max-norm and `log_scale[k]` carries the accumulated growth.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub norms: Vec<f64>,
    pub log_scale: Vec<f64>,
}

impl Trajectory {
    /// Natural log of the unnormalized max-norm at each step.
    pub fn log_norms(&self) -> Vec<f64> {
        self.norms.iter().zip(&self.log_scale).map(|(n, s)| n.ln() + s).collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Runs `steps` steps from `initial`. With `renormalize`, each state is
/// scaled to unit max-norm after the step (power iteration form).
pub fn simulate<S: Stepper + ?Sized>(stepper: &S, initial: &State, steps: usize, renormalize: bool) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    let mut scale = 0.0;
    let mut cur = initial.clone();
    for k in 0..=steps {
        if k > 0 {
            cur = stepper.step(&cur)?;
        }
        let mut norm = cur.max_norm();
        if renormalize && norm > 0.0 && norm.is_finite() {
            scale += norm.ln();
            cur = cur.scaled(1.0 / norm);
            norm = cur.max_norm();
        }
        traj.states.push(cur.clone());
        traj.norms.push(norm);
        traj.log_scale.push(scale);
    }
    Ok(traj)
}

pub const DEFAULT_BURN_IN: usize = 50;
pub const DEFAULT_WINDOW: usize = 200;

/// Per-step growth factor: `exp` of the least-squares slope of the log
/// max-norms over at most [`DEFAULT_WINDOW`] steps after `burn_in`.
pub fn growth_rate(traj: &Trajectory, burn_in: usize) -> Result<f64> {
    if traj.len() < burn_in + 10 {
        return Err(Error::ParameterDomain(format!(
            "growth estimate needs at least {} steps, trajectory has {}",
            burn_in + 10,
            traj.len()
        )));
    }
    let end = traj.len().min(burn_in + DEFAULT_WINDOW);
    let logs = traj.log_norms();
    let mut last = None;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in burn_in..end {
        if !(traj.norms[k] > 0.0) || !logs[k].is_finite() {
            return Err(Error::DecayBelowFloor { last_estimate: last });
        }
        xs.push(k as f64);
        ys.push(logs[k]);
        if xs.len() >= 2 {
            last = Some(slope(&xs, &ys).exp());
        }
    }
    Ok(slope(&xs, &ys).exp())
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Writes `step,norm,growth_estimate` rows; the estimate is the running
/// per-step ratio of unnormalized norms.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let logs = traj.log_norms();
    let mut out = String::from("step,norm,growth_estimate\n");
    for (k, st) in traj.states.iter().enumerate() {
        let g = if k == 0 { f64::NAN } else { (logs[k] - logs[k - 1]).exp() };
        let norm = logs[k].exp();
        out.push_str(&format!("{},{},{}\n", st.step_index, norm, g));
    }
    out
}
