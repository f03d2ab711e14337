//! TOML sweep configuration.
//!
//! ```toml
//! [scheme]
//! name = "bulk-explicit"
//!
//! [axes.x]
//! var = "d_minus"
//! min = 0.01
//! max = 1000.0
//! points = 101
//! scale = "log"
//!
//! [axes.y]
//! var = "beta_minus"
//! min = 0.01
//! max = 1000.0
//! points = 101
//!
//! [fixed]
//! d_plus = 2.025
//! beta_plus = 1.125
//!
//! [grid]
//! n_minus = 20
//! n_plus = 10
//!
//! [output]
//! csv = "field.csv"
//! pgm = "field.pgm"
//! seed = 0
//! tol = 1e-8
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::assembly::SchemeSpec;
use crate::error::{Error, Result};
use crate::params::DimensionlessParams;
use crate::spectral::DEFAULT_TOL;
use crate::sweep::{Axis, SweepSpec, DEFAULT_N_MINUS, DEFAULT_N_PLUS};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub name: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxesSection {
    pub x: Axis,
    pub y: Axis,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedSection {
    pub d_plus: Option<f64>,
    pub d_minus: Option<f64>,
    pub beta_plus: Option<f64>,
    pub beta_minus: Option<f64>,
    pub r: Option<f64>,
}

impl FixedSection {
    pub fn params(&self) -> DimensionlessParams {
        let base = DimensionlessParams::default();
        DimensionlessParams {
            d_plus: self.d_plus.unwrap_or(base.d_plus),
            d_minus: self.d_minus.unwrap_or(base.d_minus),
            beta_plus: self.beta_plus.unwrap_or(base.beta_plus),
            beta_minus: self.beta_minus.unwrap_or(base.beta_minus),
            r: self.r.unwrap_or(base.r),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_n_minus")]
    pub n_minus: usize,
    #[serde(default = "default_n_plus")]
    pub n_plus: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n_minus: DEFAULT_N_MINUS,
            n_plus: DEFAULT_N_PLUS,
        }
    }
}

fn default_n_minus() -> usize {
    DEFAULT_N_MINUS
}

fn default_n_plus() -> usize {
    DEFAULT_N_PLUS
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    pub pgm: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub scheme: SchemeSection,
    pub axes: AxesSection,
    #[serde(default)]
    pub fixed: FixedSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let scheme: SchemeSpec = self.scheme.name.parse()?;
        let mut spec = SweepSpec::new(scheme, self.axes.x, self.axes.y, self.fixed.params());
        spec.n_minus = self.grid.n_minus;
        spec.n_plus = self.grid.n_plus;
        spec.tol = self.output.tol.unwrap_or(DEFAULT_TOL);
        spec.seed = self.output.seed;
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamVar;
    use crate::sweep::AxisScale;

    const EXAMPLE: &str = r#"
[scheme]
name = "bulk-partial"

[axes.x]
var = "d_minus"
min = 0.01
max = 100.0
points = 11

[axes.y]
var = "beta_minus"
min = 0.5
max = 2.0
points = 4
scale = "linear"

[fixed]
d_plus = 2.025
beta_plus = 1.125

[grid]
n_minus = 8

[output]
csv = "out/field.csv"
seed = 7
"#;

    #[test]
    fn parses_example() {
        let c = SweepConfig::parse(EXAMPLE).unwrap();
        let s = c.sweep_spec().unwrap();
        assert_eq!(s.scheme, SchemeSpec::bulk_partial());
        assert_eq!(s.axis_x.scale, AxisScale::Log);
        assert_eq!(s.axis_y.scale, AxisScale::Linear);
        assert_eq!(s.axis_y.var, ParamVar::BetaMinus);
        assert_eq!(s.fixed.d_plus, 2.025);
        assert_eq!(s.fixed.r, 1.0);
        assert_eq!((s.n_minus, s.n_plus), (8, DEFAULT_N_PLUS));
        assert_eq!(s.seed, 7);
        assert_eq!(s.tol, DEFAULT_TOL);
        assert_eq!(c.output.csv.as_deref(), Some(Path::new("out/field.csv")));
        assert!(c.output.pgm.is_none());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(SweepConfig::parse("[scheme]\nname = \"bulk-explicit\"\n").is_err());
        let unknown = EXAMPLE.replace("[grid]", "[grid]\nbogus = 1");
        assert!(SweepConfig::parse(&unknown).is_err());
        let bad_scheme = EXAMPLE.replace("bulk-partial", "bulk-magic");
        assert!(SweepConfig::parse(&bad_scheme).unwrap().sweep_spec().is_err());
        let same_axes = EXAMPLE.replace("\"beta_minus\"", "\"d_minus\"");
        assert!(SweepConfig::parse(&same_axes).unwrap().sweep_spec().is_err());
        assert!(matches!(SweepConfig::load(Path::new("/nonexistent/c.toml")), Err(Error::Io { .. })));
    }
}
