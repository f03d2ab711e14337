//! Stability-region sweeps over two dimensionless parameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, SchemeSpec};
use crate::error::{Error, Result};
use crate::params::{DimensionlessParams, ParamVar};
use crate::spectral::{self, Stability, DEFAULT_TOL};

pub const WORKERS_ENV: &str = "COUPSTAB_WORKERS";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_N_MINUS: usize = 20;
pub const DEFAULT_N_PLUS: usize = 10;
pub const DEFAULT_POINTS: usize = 101;
pub const DEFAULT_RANGE: (f64, f64) = (1e-2, 1e3);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisScale {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub var: ParamVar,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: AxisScale,
}

impl Axis {
    pub fn log(var: ParamVar, min: f64, max: f64, points: usize) -> Self {
        Self { var, min, max, points, scale: AxisScale::Log }
    }

    pub fn linear(var: ParamVar, min: f64, max: f64, points: usize) -> Self {
        Self { var, min, max, points, scale: AxisScale::Linear }
    }

    /// Default log-spaced axis.
    pub fn default_for(var: ParamVar) -> Self {
        Self::log(var, DEFAULT_RANGE.0, DEFAULT_RANGE.1, DEFAULT_POINTS)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Config(format!("axis {} needs at least 2 points", self.var)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min > 0.0 && self.max > self.min) {
            return Err(Error::Config(format!(
                "axis {} range [{}, {}] must be positive and increasing",
                self.var, self.min, self.max
            )));
        }
        Ok(())
    }

    /// Grid coordinates, endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i + 1 == self.points {
                    return self.max;
                }
                let t = i as f64 / last;
                match self.scale {
                    AxisScale::Linear => self.min + t * (self.max - self.min),
                    AxisScale::Log => {
                        let (a, b) = (self.min.log10(), self.max.log10());
                        10f64.powf(a + t * (b - a))
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scheme: SchemeSpec,
    pub axis_x: Axis,
    pub axis_y: Axis,
    /// Values of the variables not on an axis.
    pub fixed: DimensionlessParams,
    pub n_minus: usize,
    pub n_plus: usize,
    pub tol: f64,
    /// Recorded in the output metadata; the sweep itself is deterministic.
    pub seed: u64,
}

impl SweepSpec {
    pub fn new(scheme: SchemeSpec, axis_x: Axis, axis_y: Axis, fixed: DimensionlessParams) -> Self {
        Self {
            scheme,
            axis_x,
            axis_y,
            fixed,
            n_minus: DEFAULT_N_MINUS,
            n_plus: DEFAULT_N_PLUS,
            tol: DEFAULT_TOL,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        self.axis_x.validate()?;
        self.axis_y.validate()?;
        if self.axis_x.var == self.axis_y.var {
            return Err(Error::Config(format!("both axes sweep {}", self.axis_x.var)));
        }
        if self.n_minus == 0 || self.n_plus == 0 {
            return Err(Error::Config("cell counts must be at least 1".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::Config(format!("tolerance must be finite and >= 0, got {}", self.tol)));
        }
        self.fixed.validate()
    }

    /// Parameters at axis values `(x, y)`.
    pub fn params_at(&self, x: f64, y: f64) -> DimensionlessParams {
        self.fixed.with(self.axis_x.var, x).with(self.axis_y.var, y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMetadata {
    pub scheme: String,
    pub fixed: DimensionlessParams,
    pub n_minus: usize,
    pub n_plus: usize,
    pub tol: f64,
    pub seed: u64,
    pub tool_version: String,
}

/// `lambda_max[iy * nx + ix]`: x varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityField {
    pub x_name: String,
    pub y_name: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub lambda_max: Vec<f64>,
    /// `None` where the eigensolver failed.
    pub class: Vec<Option<Stability>>,
    pub metadata: FieldMetadata,
    pub warnings: usize,
}

impl StabilityField {
    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx() + ix
    }

    pub fn lambda(&self, ix: usize, iy: usize) -> f64 {
        self.lambda_max[self.index(ix, iy)]
    }

    pub fn class_at(&self, ix: usize, iy: usize) -> Option<Stability> {
        self.class[self.index(ix, iy)]
    }

    /// Number of points classified as `s`.
    pub fn count(&self, s: Stability) -> usize {
        self.class.iter().filter(|c| **c == Some(s)).count()
    }
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|n| *n > 0)
}

/// Runs the sweep on a pool sized by [`WORKERS_ENV`] (default: all cores).
pub fn run_sweep(spec: &SweepSpec) -> Result<StabilityField> {
    run_sweep_with_workers(spec, workers_from_env())
}

pub fn run_sweep_with_workers(spec: &SweepSpec, workers: Option<usize>) -> Result<StabilityField> {
    spec.validate()?;
    let xs = spec.axis_x.values();
    let ys = spec.axis_y.values();
    let nx = xs.len();
    let points: Vec<(f64, f64)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
    let eval = |&(x, y): &(f64, f64)| -> Option<f64> {
        let p = spec.params_at(x, y);
        match assemble(&spec.scheme, &p, spec.n_minus, spec.n_plus).and_then(|pair| spectral::pair_lambda_max(&pair)) {
            Ok(l) => Some(l),
            Err(e) => {
                log::warn!("{} at {}={x}, {}={y}: {e}", spec.scheme, spec.axis_x.var, spec.axis_y.var);
                None
            }
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Option<f64>> = pool.install(|| points.par_iter().map(eval).collect());

    let warnings = results.iter().filter(|r| r.is_none()).count();
    let lambda_max: Vec<f64> = results.iter().map(|r| r.unwrap_or(f64::NAN)).collect();
    let class = results.iter().map(|r| r.map(|l| spectral::classify(l, spec.tol))).collect();
    debug_assert_eq!(lambda_max.len(), nx * ys.len());
    Ok(StabilityField {
        x_name: spec.axis_x.var.name().to_string(),
        y_name: spec.axis_y.var.name().to_string(),
        xs,
        ys,
        lambda_max,
        class,
        metadata: FieldMetadata {
            scheme: spec.scheme.name(),
            fixed: spec.fixed,
            n_minus: spec.n_minus,
            n_plus: spec.n_plus,
            tol: spec.tol,
            seed: spec.seed,
            tool_version: TOOL_VERSION.to_string(),
        },
        warnings,
    })
}

/// One panel of a figure preset.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub label: String,
    pub spec: SweepSpec,
}

pub const PRESET_NAMES: [&str; 7] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

pub const FIG_R_VALUES: [f64; 3] = [2000.0, 1.0, 5e-4];

fn bulk_schemes() -> [SchemeSpec; 3] {
    [SchemeSpec::bulk_explicit(), SchemeSpec::bulk_partial(), SchemeSpec::bulk_implicit()]
}

fn fmt_label(parts: &[(&str, f64)]) -> String {
    parts.iter().map(|(k, v)| format!("{k}{v}")).collect::<Vec<_>>().join("_")
}

/// Sweeps behind the stability-region figures. Negative-domain planes use
/// `x = d_minus, y = beta_minus`; positive-domain planes `x = d_plus,
/// y = beta_plus`; Dirichlet-Neumann planes `x = d_minus, y = d_plus`.
pub fn preset(name: &str) -> Result<Vec<Panel>> {
    let neg = (Axis::default_for(ParamVar::DMinus), Axis::default_for(ParamVar::BetaMinus));
    let pos = (Axis::default_for(ParamVar::DPlus), Axis::default_for(ParamVar::BetaPlus));
    let dn = (Axis::default_for(ParamVar::DMinus), Axis::default_for(ParamVar::DPlus));
    let base = DimensionlessParams::default();
    let panel = |scheme: SchemeSpec, axes: (Axis, Axis), fixed: DimensionlessParams, label: String| Panel {
        label: if label.is_empty() { scheme.name() } else { format!("{}_{label}", scheme.name()) },
        spec: SweepSpec::new(scheme, axes.0, axes.1, fixed),
    };
    let panels = match name {
        "fig3" => {
            let fixed = DimensionlessParams { beta_plus: 1.125, d_plus: 2.025, ..base };
            bulk_schemes()
                .into_iter()
                .map(|s| panel(s, neg, fixed, fmt_label(&[("beta_plus", 1.125), ("d_plus", 2.025)])))
                .collect()
        }
        "fig4" => [(2.375, 9.025), (4.875, 38.025), (9.875, 156.025)]
            .into_iter()
            .map(|(b, d)| {
                let fixed = DimensionlessParams { beta_plus: b, d_plus: d, ..base };
                panel(SchemeSpec::bulk_explicit(), neg, fixed, fmt_label(&[("beta_plus", b), ("d_plus", d)]))
            })
            .collect(),
        "fig5" => {
            let fixed = DimensionlessParams { beta_minus: 0.005938, d_minus: 9.025, ..base };
            bulk_schemes()
                .into_iter()
                .map(|s| panel(s, pos, fixed, fmt_label(&[("beta_minus", 0.005938), ("d_minus", 9.025)])))
                .collect()
        }
        "fig6" => [(0.012188, 38.025), (0.024688, 156.025), (0.049688, 632.025)]
            .into_iter()
            .map(|(b, d)| {
                let fixed = DimensionlessParams { beta_minus: b, d_minus: d, ..base };
                panel(SchemeSpec::bulk_explicit(), pos, fixed, fmt_label(&[("beta_minus", b), ("d_minus", d)]))
            })
            .collect(),
        "fig7" => [crate::assembly::FluxTreatment::Explicit, crate::assembly::FluxTreatment::Implicit]
            .into_iter()
            .map(|f| panel(SchemeSpec::one_way(f), neg, base, String::new()))
            .collect(),
        "fig8" | "fig9" => {
            let scheme = if name == "fig8" { SchemeSpec::dn_explicit() } else { SchemeSpec::dn_implicit() };
            FIG_R_VALUES
                .into_iter()
                .map(|r| panel(scheme, dn, DimensionlessParams { r, ..base }, fmt_label(&[("r", r)])))
                .collect()
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown preset `{name}` (expected one of {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(panels)
}
