//! Dimensional and dimensionless parameters of the two-domain diffusion model.
//!
//! Everything downstream consumes [`DimensionlessParams`]; the physical
//! description is a convenience front end.
//!
//! Sign convention: `plus` is the upper domain (atmosphere, z > 0), `minus`
//! the lower domain (ocean, z < 0).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical properties of both domains and the bulk exchange coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Density, kg m^-3.
    pub rho_plus: f64,
    pub rho_minus: f64,
    /// Heat capacity, J kg^-1 K^-1.
    pub c_plus: f64,
    pub c_minus: f64,
    /// Dynamic diffusivity, J s^-1 m^-1 K^-1.
    pub nu_plus: f64,
    pub nu_minus: f64,
    /// Bulk coefficient, J s^-1 m^-2 K^-1.
    pub b: f64,
    /// Exchange coefficient at reference height (dimensionless).
    #[serde(default)]
    pub c_h: Option<f64>,
    /// Wind speed, m s^-1.
    #[serde(default)]
    pub u_norm: Option<f64>,
}

impl PhysicalParams {
    /// Builds parameters whose bulk coefficient is derived from the exchange
    /// coefficient and wind speed.
    #[allow(clippy::too_many_arguments)]
    pub fn with_exchange(
        rho_plus: f64,
        rho_minus: f64,
        c_plus: f64,
        c_minus: f64,
        nu_plus: f64,
        nu_minus: f64,
        c_h: f64,
        u_norm: f64,
    ) -> Result<Self> {
        let b = bulk_coefficient(c_h, u_norm, rho_plus, c_plus)?;
        let p = Self {
            rho_plus,
            rho_minus,
            c_plus,
            c_minus,
            nu_plus,
            nu_minus,
            b,
            c_h: Some(c_h),
            u_norm: Some(u_norm),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho_plus", self.rho_plus),
            ("rho_minus", self.rho_minus),
            ("c_plus", self.c_plus),
            ("c_minus", self.c_minus),
            ("nu_plus", self.nu_plus),
            ("nu_minus", self.nu_minus),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::ParameterDomain(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(self.b.is_finite() && self.b >= 0.0) {
            return Err(Error::ParameterDomain(format!(
                "b must be finite and >= 0, got {}",
                self.b
            )));
        }
        match (self.c_h, self.u_norm) {
            (Some(c_h), Some(u)) => {
                let expected = bulk_coefficient(c_h, u, self.rho_plus, self.c_plus)?;
                let scale = expected.abs().max(self.b.abs());
                if (expected - self.b).abs() > 1e-12 * scale {
                    return Err(Error::ParameterDomain(format!(
                        "b = {} inconsistent with rho_plus*c_plus*C_H*|U| = {expected}",
                        self.b
                    )));
                }
            }
            (None, None) => {}
            _ => {
                return Err(Error::ParameterDomain(
                    "C_H and U_norm must be given together".into(),
                ))
            }
        }
        Ok(())
    }

    /// Eddy diffusivity K = nu / (rho c) of the upper domain, m^2 s^-1.
    pub fn eddy_diffusivity_plus(&self) -> f64 {
        self.nu_plus / (self.rho_plus * self.c_plus)
    }

    /// Eddy diffusivity of the lower domain, m^2 s^-1.
    pub fn eddy_diffusivity_minus(&self) -> f64 {
        self.nu_minus / (self.rho_minus * self.c_minus)
    }
}

/// Grid spacing, cell counts and time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dz_plus: f64,
    pub dz_minus: f64,
    pub n_plus: usize,
    pub n_minus: usize,
    pub dt: f64,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("dz_plus", self.dz_plus),
            ("dz_minus", self.dz_minus),
            ("dt", self.dt),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::ParameterDomain(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if self.n_plus == 0 || self.n_minus == 0 {
            return Err(Error::ParameterDomain(format!(
                "cell counts must be >= 1, got n_plus={} n_minus={}",
                self.n_plus, self.n_minus
            )));
        }
        Ok(())
    }
}

/// The complete stability state: diffusion Courant numbers `d`, bulk Courant
/// numbers `beta` and the interface heat-content ratio `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    pub d_plus: f64,
    pub d_minus: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub r: f64,
}

impl Default for DimensionlessParams {
    fn default() -> Self {
        Self {
            d_plus: 0.0,
            d_minus: 0.0,
            beta_plus: 0.0,
            beta_minus: 0.0,
            r: 1.0,
        }
    }
}

impl DimensionlessParams {
    pub fn new(d_plus: f64, d_minus: f64, beta_plus: f64, beta_minus: f64, r: f64) -> Result<Self> {
        let p = Self {
            d_plus,
            d_minus,
            beta_plus,
            beta_minus,
            r,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d_plus", self.d_plus),
            ("d_minus", self.d_minus),
            ("beta_plus", self.beta_plus),
            ("beta_minus", self.beta_minus),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::ParameterDomain(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "r must be finite and > 0, got {}",
                self.r
            )));
        }
        Ok(())
    }

    pub fn get(&self, var: ParamVar) -> f64 {
        match var {
            ParamVar::DPlus => self.d_plus,
            ParamVar::DMinus => self.d_minus,
            ParamVar::BetaPlus => self.beta_plus,
            ParamVar::BetaMinus => self.beta_minus,
            ParamVar::R => self.r,
        }
    }

    pub fn set(&mut self, var: ParamVar, value: f64) {
        match var {
            ParamVar::DPlus => self.d_plus = value,
            ParamVar::DMinus => self.d_minus = value,
            ParamVar::BetaPlus => self.beta_plus = value,
            ParamVar::BetaMinus => self.beta_minus = value,
            ParamVar::R => self.r = value,
        }
    }

    /// Copy with one variable replaced.
    pub fn with(mut self, var: ParamVar, value: f64) -> Self {
        self.set(var, value);
        self
    }
}

/// Names of the dimensionless variables; used for sweep axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamVar {
    DPlus,
    DMinus,
    BetaPlus,
    BetaMinus,
    R,
}

impl ParamVar {
    pub const ALL: [ParamVar; 5] = [
        ParamVar::DPlus,
        ParamVar::DMinus,
        ParamVar::BetaPlus,
        ParamVar::BetaMinus,
        ParamVar::R,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamVar::DPlus => "d_plus",
            ParamVar::DMinus => "d_minus",
            ParamVar::BetaPlus => "beta_plus",
            ParamVar::BetaMinus => "beta_minus",
            ParamVar::R => "r",
        }
    }
}

impl std::str::FromStr for ParamVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParamVar::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown parameter name `{s}`")))
    }
}

impl std::fmt::Display for ParamVar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Maps physical parameters and a grid onto Courant numbers and `r`.
pub fn derive_dimensionless(phys: &PhysicalParams, grid: &GridSpec) -> Result<DimensionlessParams> {
    phys.validate()?;
    grid.validate()?;
    let heat_plus = phys.rho_plus * phys.c_plus;
    let heat_minus = phys.rho_minus * phys.c_minus;
    let p = DimensionlessParams {
        d_plus: phys.nu_plus * grid.dt / (heat_plus * grid.dz_plus * grid.dz_plus),
        d_minus: phys.nu_minus * grid.dt / (heat_minus * grid.dz_minus * grid.dz_minus),
        beta_plus: phys.b * grid.dt / (heat_plus * grid.dz_plus),
        beta_minus: phys.b * grid.dt / (heat_minus * grid.dz_minus),
        r: heat_plus * grid.dz_plus / (heat_minus * grid.dz_minus),
    };
    p.validate()?;
    Ok(p)
}

/// Bulk coefficient b = rho_plus c_plus C_H |U|.
pub fn bulk_coefficient(c_h: f64, u_norm: f64, rho_plus: f64, c_plus: f64) -> Result<f64> {
    for (name, v) in [
        ("C_H", c_h),
        ("U_norm", u_norm),
        ("rho_plus", rho_plus),
        ("c_plus", c_plus),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::ParameterDomain(format!(
                "{name} must be finite and >= 0, got {v}"
            )));
        }
    }
    Ok(rho_plus * c_plus * c_h * u_norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_phys() -> PhysicalParams {
        PhysicalParams {
            rho_plus: 1.0,
            rho_minus: 1.0,
            c_plus: 1.0,
            c_minus: 1.0,
            nu_plus: 1.0,
            nu_minus: 1.0,
            b: 1.0,
            c_h: None,
            u_norm: None,
        }
    }

    fn unit_grid() -> GridSpec {
        GridSpec {
            dz_plus: 1.0,
            dz_minus: 1.0,
            n_plus: 4,
            n_minus: 4,
            dt: 1.0,
        }
    }

    #[test]
    fn unit_inputs_give_unit_numbers() {
        let p = derive_dimensionless(&unit_phys(), &unit_grid()).unwrap();
        assert_eq!(p, DimensionlessParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap());
    }

    #[test]
    fn typical_heat_capacities_give_small_r() {
        let phys = PhysicalParams {
            rho_plus: 1.0,
            c_plus: 1000.0,
            rho_minus: 1000.0,
            c_minus: 4000.0,
            ..unit_phys()
        };
        let p = derive_dimensionless(&phys, &unit_grid()).unwrap();
        assert!((p.r - 2.5e-4).abs() < 1e-18);
    }

    #[test]
    fn bulk_courant_hand_value() {
        let phys = PhysicalParams {
            rho_plus: 1.0,
            c_plus: 1000.0,
            b: 100.0,
            ..unit_phys()
        };
        let grid = GridSpec {
            dz_plus: 10.0,
            dt: 100.0,
            ..unit_grid()
        };
        let p = derive_dimensionless(&phys, &grid).unwrap();
        assert_eq!(p.beta_plus, 1.0);
    }

    #[test]
    fn bulk_coefficient_values() {
        assert_eq!(bulk_coefficient(0.0, 5.0, 1.0, 1000.0).unwrap(), 0.0);
        assert!((bulk_coefficient(1e-3, 5.0, 1.0, 1000.0).unwrap() - 5.0).abs() < 1e-12);
        assert!((bulk_coefficient(1e-3, 100.0, 1.0, 1000.0).unwrap() - 100.0).abs() < 1e-12);
        assert!(bulk_coefficient(-1e-3, 5.0, 1.0, 1000.0).is_err());
    }

    #[test]
    fn nonpositive_inputs_rejected() {
        let phys = PhysicalParams {
            nu_minus: 0.0,
            ..unit_phys()
        };
        assert!(matches!(
            derive_dimensionless(&phys, &unit_grid()),
            Err(Error::ParameterDomain(_))
        ));
        let grid = GridSpec {
            dt: -1.0,
            ..unit_grid()
        };
        assert!(derive_dimensionless(&unit_phys(), &grid).is_err());
        let grid = GridSpec {
            n_minus: 0,
            ..unit_grid()
        };
        assert!(derive_dimensionless(&unit_phys(), &grid).is_err());
    }

    #[test]
    fn exchange_coefficient_consistency_checked() {
        let mut phys = PhysicalParams::with_exchange(1.0, 1000.0, 1000.0, 4000.0, 300.0, 4e5, 1e-3, 5.0)
            .unwrap();
        assert!((phys.b - 5.0).abs() < 1e-12);
        phys.b = 5.1;
        assert!(phys.validate().is_err());
    }

    #[test]
    fn scaling_relations_are_exact() {
        let phys = PhysicalParams {
            rho_plus: 1.0,
            c_plus: 1000.0,
            rho_minus: 1000.0,
            c_minus: 4000.0,
            nu_plus: 300.0,
            nu_minus: 4e5,
            b: 20.0,
            c_h: None,
            u_norm: None,
        };
        let grid = GridSpec {
            dz_plus: 8.0,
            dz_minus: 2.0,
            n_plus: 10,
            n_minus: 20,
            dt: 64.0,
        };
        let base = derive_dimensionless(&phys, &grid).unwrap();

        // Powers of two keep every relation exact in binary floating point.
        let scaled = derive_dimensionless(&phys, &GridSpec { dt: 4.0 * grid.dt, ..grid }).unwrap();
        assert_eq!(scaled.d_plus, 4.0 * base.d_plus);
        assert_eq!(scaled.d_minus, 4.0 * base.d_minus);
        assert_eq!(scaled.beta_plus, 4.0 * base.beta_plus);
        assert_eq!(scaled.beta_minus, 4.0 * base.beta_minus);
        assert_eq!(scaled.r, base.r);

        let halved = derive_dimensionless(
            &phys,
            &GridSpec {
                dz_minus: grid.dz_minus / 2.0,
                ..grid
            },
        )
        .unwrap();
        assert_eq!(halved.d_minus, 4.0 * base.d_minus);
        assert_eq!(halved.beta_minus, 2.0 * base.beta_minus);
        assert_eq!(halved.r, 2.0 * base.r);
        assert_eq!(halved.d_plus, base.d_plus);
    }

    #[test]
    fn eddy_diffusivity_is_nu_over_heat_capacity() {
        let phys = PhysicalParams {
            rho_plus: 1.0,
            c_plus: 1000.0,
            nu_plus: 300.0,
            ..unit_phys()
        };
        assert!((phys.eddy_diffusivity_plus() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn param_var_round_trips_through_name() {
        for v in ParamVar::ALL {
            assert_eq!(v.name().parse::<ParamVar>().unwrap(), v);
        }
    }
}
