//! Cross-checks between the normal-mode theory, closed forms and the matrix
//! analysis, grouped into suites for the `validate` subcommand.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{assemble, FluxTreatment, SchemeSpec};
use crate::error::{Error, Result};
use crate::normalmode::{
    dn_implicit_large_r_quartic, normal_mode_verdict, one_way_explicit_bound, one_way_explicit_roots,
    polynomial_roots, refine_root, GksVerdict, ScanOptions,
};
use crate::params::DimensionlessParams;
use crate::spectral::{classify, pair_lambda_max, Stability, DEFAULT_TOL};
use crate::stepper::{random_state, MonolithicStepper, PartitionedStepper, Stepper};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    OneWay,
    Bulk,
    Dn,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-way" => Ok(Suite::OneWay),
            "bulk" => Ok(Suite::Bulk),
            "dn" => Ok(Suite::Dn),
            "all" => Ok(Suite::All),
            _ => Err(Error::Config(format!("unknown suite `{s}` (expected one-way, bulk, dn or all)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn summary(&self) -> String {
        format!("{} checks, {} passed, {} failures", self.checks.len(), self.checks.len() - self.failures(), self.failures())
    }

    fn push(&mut self, name: &str, outcome: Result<(bool, String)>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.checks.push(Check { name: name.to_string(), passed, detail });
    }
}

pub fn run_suite(suite: Suite) -> Report {
    let mut report = Report::default();
    if matches!(suite, Suite::OneWay | Suite::All) {
        report.push("one-way explicit crossing", theorem_one_crossing(&[0.1, 1.0, 10.0], 200, 0.02));
        report.push("one-way implicit unconditionally stable", one_way_implicit_stable(15, 20));
        report.push("one-way unstable root magnitude", unstable_root_magnitude(&[0.5, 5.0, 50.0], 200, 1e-2));
        for flux in [FluxTreatment::Explicit, FluxTreatment::Implicit] {
            let s = SchemeSpec::one_way(flux);
            report.push(&format!("{s} normal mode vs matrix"), gks_agreement(&s, 20, 60, 1));
        }
    }
    if matches!(suite, Suite::Bulk | Suite::All) {
        for s in [SchemeSpec::bulk_partial(), SchemeSpec::bulk_implicit(), SchemeSpec::bulk_sequential()] {
            report.push(&format!("{s} unconditionally stable"), bulk_unconditional(&s, 4, 10, 8));
        }
        report.push("uncoupled spectrum is a union", spectrum_union(8, 6, 1e-8));
        for s in [SchemeSpec::bulk_explicit(), SchemeSpec::bulk_partial(), SchemeSpec::bulk_sequential()] {
            report.push(&format!("{s} normal mode vs matrix"), gks_agreement(&s, 10, 60, 2));
        }
    }
    if matches!(suite, Suite::Dn | Suite::All) {
        report.push("dn-explicit independent of r", dn_explicit_r_independence(11, 10));
        report.push("dn-implicit small-r root", dn_small_r_check(&[0.1, 1.0, 10.0], 0.37, 1e-6));
        report.push("dn-implicit large-r quartic", dn_large_r_quartic(1.0));
        report.push("dn-implicit normal mode vs matrix", gks_agreement(&SchemeSpec::dn_implicit(), 10, 60, 3));
    }
    if suite == Suite::All {
        report.push("partitioned matches monolithic", partitioned_equivalence(5, 100, 1e-10));
    }
    report
}

/// Bisection on `beta` for the sign change of `lambda_max - 1`.
pub fn one_way_crossing(d: f64, n: usize, lo: f64, hi: f64) -> Result<f64> {
    let s = SchemeSpec::one_way(FluxTreatment::Explicit);
    let excess = |beta: f64| -> Result<f64> {
        let p = DimensionlessParams { d_minus: d, beta_minus: beta, ..Default::default() };
        Ok(pair_lambda_max(&assemble(&s, &p, n, 1)?)? - 1.0 - DEFAULT_TOL)
    };
    let (mut lo, mut hi) = (lo, hi);
    if excess(lo)? > 0.0 || excess(hi)? <= 0.0 {
        return Err(Error::ParameterDomain(format!("[{lo}, {hi}] does not bracket the crossing at d = {d}")));
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn theorem_one_crossing(ds: &[f64], n: usize, rel: f64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for &d in ds {
        let bound = one_way_explicit_bound(d);
        let beta = one_way_crossing(d, n, 0.5 * bound, 2.0 * bound)?;
        worst = worst.max((beta - bound).abs() / bound);
    }
    Ok((worst <= rel, format!("max relative offset {worst:.3e} (limit {rel})")))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

fn one_way_implicit_stable(points: usize, n: usize) -> Result<(bool, String)> {
    let s = SchemeSpec::one_way(FluxTreatment::Implicit);
    let g = log_grid(1e-2, 1e3, points);
    let mut worst: f64 = 0.0;
    for &d in &g {
        for &beta in &g {
            let p = DimensionlessParams { d_minus: d, beta_minus: beta, ..Default::default() };
            worst = worst.max(pair_lambda_max(&assemble(&s, &p, n, 1)?)?);
        }
    }
    Ok((worst <= 1.0 + DEFAULT_TOL, format!("max lambda {worst}")))
}

fn unstable_root_magnitude(ds: &[f64], n: usize, rel: f64) -> Result<(bool, String)> {
    let s = SchemeSpec::one_way(FluxTreatment::Explicit);
    let mut worst: f64 = 0.0;
    for &d in ds {
        let beta = 2.0 * one_way_explicit_bound(d);
        let p = DimensionlessParams { d_minus: d, beta_minus: beta, ..Default::default() };
        let lm = pair_lambda_max(&assemble(&s, &p, n, 1)?)?;
        let (_, a_minus) = one_way_explicit_roots(beta, d);
        worst = worst.max((lm - a_minus.abs()).abs() / a_minus.abs());
    }
    Ok((worst <= rel, format!("max relative difference {worst:.3e} (limit {rel})")))
}

/// Log-uniform random parameters: `d`, `beta` in `[1e-2, 1e2]`, `r` in
/// `[1e-4, 10^3.5]`.
pub fn random_params(rng: &mut ChaCha8Rng) -> DimensionlessParams {
    let mut lg = |lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
    DimensionlessParams {
        d_plus: lg(-2.0, 2.0),
        d_minus: lg(-2.0, 2.0),
        beta_plus: lg(-2.0, 2.0),
        beta_minus: lg(-2.0, 2.0),
        r: lg(-4.0, 3.5),
    }
}

/// Outcome of comparing normal-mode verdicts with matrix classification.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Agreement {
    pub compared: usize,
    pub marginal: usize,
    pub disagreements: Vec<(DimensionlessParams, f64, GksVerdict)>,
}

pub fn gks_vs_matrix(scheme: &SchemeSpec, samples: usize, n: usize, seed: u64) -> Result<Agreement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Agreement::default();
    for _ in 0..samples {
        let p = random_params(&mut rng);
        let lm = pair_lambda_max(&assemble(scheme, &p, n, n)?)?;
        let class = classify(lm, DEFAULT_TOL);
        if class == Stability::Marginal {
            out.marginal += 1;
            continue;
        }
        let verdict = normal_mode_verdict(scheme, &p, &ScanOptions::covering(scheme, &p)?)?;
        out.compared += 1;
        let agree = matches!(
            (class, verdict),
            (Stability::Stable, GksVerdict::Stable) | (Stability::Unstable, GksVerdict::Unstable)
        );
        if !agree {
            out.disagreements.push((p, lm, verdict));
        }
    }
    Ok(out)
}

fn gks_agreement(scheme: &SchemeSpec, samples: usize, n: usize, seed: u64) -> Result<(bool, String)> {
    let a = gks_vs_matrix(scheme, samples, n, seed)?;
    Ok((
        a.disagreements.is_empty(),
        format!("{} compared, {} marginal skipped, {} disagreements", a.compared, a.marginal, a.disagreements.len()),
    ))
}

fn bulk_unconditional(scheme: &SchemeSpec, per_axis: usize, nm: usize, np: usize) -> Result<(bool, String)> {
    let g = log_grid(1e-2, 1e2, per_axis);
    let mut worst: f64 = 0.0;
    for &dp in &g {
        for &dm in &g {
            for &bp in &g {
                for &bm in &g {
                    let p = DimensionlessParams::new(dp, dm, bp, bm, 1.0)?;
                    worst = worst.max(pair_lambda_max(&assemble(scheme, &p, nm, np)?)?);
                }
            }
        }
    }
    Ok((worst <= 1.0 + DEFAULT_TOL, format!("max lambda {worst}")))
}

/// Eigenvalues of the coupled update with `beta = 0` against those of each
/// subdomain assembled on its own.
pub fn spectrum_union_distance(scheme: &SchemeSpec, p: &DimensionlessParams, nm: usize, np: usize) -> Result<f64> {
    let p = DimensionlessParams { beta_plus: 0.0, beta_minus: 0.0, ..*p };
    let full = crate::spectral::pair_spectrum(&assemble(scheme, &p, nm, np)?)?.eigenvalues;
    let neg_only = SchemeSpec::one_way(FluxTreatment::Implicit);
    let neg = crate::spectral::pair_spectrum(&assemble(&neg_only, &p, nm, 1)?)?.eigenvalues;
    let mirrored = DimensionlessParams { d_minus: p.d_plus, ..p };
    let pos = crate::spectral::pair_spectrum(&assemble(&neg_only, &mirrored, np, 1)?)?.eigenvalues;
    let mut union: Vec<Complex64> = neg.into_iter().chain(pos).collect();
    if union.len() != full.len() {
        return Err(Error::Dimension(format!("{} block eigenvalues for {} coupled", union.len(), full.len())));
    }
    let mut worst: f64 = 0.0;
    for z in &full {
        let (k, dist) = union
            .iter()
            .enumerate()
            .map(|(k, w)| (k, (z - w).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        worst = worst.max(dist);
        union.swap_remove(k);
    }
    Ok(worst)
}

fn spectrum_union(nm: usize, np: usize, tol: f64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for s in [SchemeSpec::bulk_explicit(), SchemeSpec::bulk_partial(), SchemeSpec::bulk_implicit(), SchemeSpec::bulk_sequential()] {
        for _ in 0..5 {
            let p = random_params(&mut rng);
            worst = worst.max(spectrum_union_distance(&s, &p, nm, np)?);
        }
    }
    Ok((worst <= tol, format!("max eigenvalue distance {worst:.3e} (limit {tol})")))
}

fn dn_explicit_r_independence(points: usize, n: usize) -> Result<(bool, String)> {
    let s = SchemeSpec::dn_explicit();
    let g: Vec<f64> = (0..points).map(|i| 0.05 + 0.95 * i as f64 / (points - 1) as f64).collect();
    let mut mismatches = 0;
    for &dm in &g {
        for &dp in &g {
            let classes: Vec<bool> = crate::sweep::FIG_R_VALUES
                .iter()
                .map(|&r| {
                    let p = DimensionlessParams::new(dp, dm, 0.0, 0.0, r)?;
                    Ok(classify(pair_lambda_max(&assemble(&s, &p, n, n)?)?, DEFAULT_TOL) == Stability::Unstable)
                })
                .collect::<Result<_>>()?;
            let expected = dm > 0.5 || dp > 0.5;
            if classes.iter().any(|c| *c != expected) {
                mismatches += 1;
            }
        }
    }
    Ok((mismatches == 0, format!("{mismatches} of {} points differ from d <= 1/2", g.len() * g.len())))
}

/// Root of the implicit Dirichlet-Neumann residual near `1/(4 d_- + 1)` for
/// vanishing `r`.
pub fn dn_small_r_root(d_minus: f64, d_plus: f64) -> Result<Complex64> {
    let s = SchemeSpec::dn_implicit();
    let p = DimensionlessParams::new(d_plus, d_minus, 0.0, 0.0, 1e-12)?;
    let target = 1.0 / (4.0 * d_minus + 1.0);
    refine_root(&s, &p, Complex64::new(0.7 * target, 0.0), 1e-12)
        .map(|(z, _)| z)
        .ok_or_else(|| Error::ParameterDomain(format!("no root found near {target} for d_minus = {d_minus}")))
}

fn dn_small_r_check(ds: &[f64], d_plus: f64, tol: f64) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for &dm in ds {
        let z = dn_small_r_root(dm, d_plus)?;
        worst = worst.max((z.norm() - 1.0 / (4.0 * dm + 1.0)).abs());
    }
    Ok((worst <= tol, format!("max |A| offset {worst:.3e} (limit {tol})")))
}

fn dn_large_r_quartic(d_plus: f64) -> Result<(bool, String)> {
    let roots = polynomial_roots(&dn_implicit_large_r_quartic(d_plus))?;
    let min = roots.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    Ok((roots.len() == 4 && min > 1.0, format!("{} roots, smallest modulus {min}", roots.len())))
}

/// Largest relative max-norm drift between partitioned and monolithic
/// trajectories for every scheme.
pub fn partitioned_drift(seeds: u64, steps: usize, nm: usize, np: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for s in SchemeSpec::all_variants() {
        for seed in 0..seeds {
            let p = random_params(&mut rng);
            let mono = MonolithicStepper::new(assemble(&s, &p, nm, np)?)?;
            let part = PartitionedStepper::new(&s, &p, nm, np)?;
            let mut a = random_state(mono.layout(), seed);
            let mut b = a.clone();
            for _ in 0..steps {
                a = mono.step(&a)?;
                b = part.step(&b)?;
                let scale = a.max_norm();
                if scale > 0.0 && scale.is_finite() {
                    let diff = a.to_vector().iter().zip(b.to_vector()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                    worst = worst.max(diff / scale);
                }
            }
        }
    }
    Ok(worst)
}

fn partitioned_equivalence(seeds: u64, steps: usize, tol: f64) -> Result<(bool, String)> {
    let worst = partitioned_drift(seeds, steps, 7, 5)?;
    Ok((worst <= tol, format!("max relative drift {worst:.3e} (limit {tol})")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("one-way".parse::<Suite>().unwrap(), Suite::OneWay);
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("none".parse::<Suite>().is_err());
    }

    #[test]
    fn one_way_suite_passes() {
        let r = run_suite(Suite::OneWay);
        assert!(r.passed(), "{r:#?}");
        assert!(r.summary().ends_with("0 failures"));
    }

    #[test]
    fn crossing_brackets_required() {
        assert!(one_way_crossing(1.0, 20, 3.0, 3.1).is_err());
    }

    #[test]
    fn union_distance_small_for_sequential() {
        let p = DimensionlessParams::new(0.3, 2.0, 4.0, 1.0, 1.0).unwrap();
        assert!(spectrum_union_distance(&SchemeSpec::bulk_sequential(), &p, 6, 4).unwrap() < 1e-10);
    }
}
