use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Ibi,
    Rel,
    Ihnc,
    Hncn,
    Lwr,
    Pyv,
    Hncgn,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Ibi,
        Scheme::Rel,
        Scheme::Ihnc,
        Scheme::Hncn,
        Scheme::Lwr,
        Scheme::Pyv,
        Scheme::Hncgn,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Scheme::Ibi => "IBI",
            Scheme::Rel => "REL",
            Scheme::Ihnc => "IHNC",
            Scheme::Hncn => "HNCN",
            Scheme::Lwr => "LWR",
            Scheme::Pyv => "PYV",
            Scheme::Hncgn => "HNCGN",
        }
    }

    /// Whether the update needs the OZ linearization at the target.
    pub fn uses_target_linearization(self) -> bool {
        !matches!(self, Scheme::Ibi | Scheme::Rel)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForwardKind {
    Hnc,
    Md,
}

impl FromStr for ForwardKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hnc" => Ok(ForwardKind::Hnc),
            "md" => Ok(ForwardKind::Md),
            _ => Err(Error::InvalidArgument(format!("unknown forward operator {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub max_iterations: usize,
    /// Stop once the relative data fit drops to this value.
    pub tolerance: f64,
    /// `gamma` in the weights `(1 + r^2)^gamma`; 0 means no weighting.
    pub weight_exponent: f64,
    pub pressure_target: Option<f64>,
    pub forward: ForwardKind,
}

impl SchemeConfig {
    pub const DEFAULT_MAX_ITERATIONS: usize = 30;
    pub const HNC_TOLERANCE: f64 = 1e-6;
    pub const MD_TOLERANCE: f64 = 0.05;

    pub fn new(scheme: Scheme, forward: ForwardKind) -> Self {
        let tolerance = match forward {
            ForwardKind::Hnc => Self::HNC_TOLERANCE,
            ForwardKind::Md => Self::MD_TOLERANCE,
        };
        Self {
            scheme,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
            tolerance,
            weight_exponent: 0.0,
            pressure_target: None,
            forward,
        }
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_pressure_target(mut self, p: f64) -> Self {
        self.pressure_target = Some(p);
        self
    }

    pub fn with_weight_exponent(mut self, gamma: f64) -> Self {
        self.weight_exponent = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.pressure_target.is_some() && self.scheme != Scheme::Hncgn {
            return Err(Error::InvalidArgument(format!(
                "a pressure target requires the HNCGN scheme, not {}",
                self.scheme
            )));
        }
        if let Some(p) = self.pressure_target {
            if !p.is_finite() {
                return Err(Error::InvalidArgument(format!("pressure target {p} is not finite")));
            }
        }
        if !(self.weight_exponent >= 0.0 && self.weight_exponent.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weight exponent must be >= 0, got {}",
                self.weight_exponent
            )));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be >= 0, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.tag().parse::<Scheme>().unwrap(), s);
        }
        assert!("ihnc".parse::<Scheme>().is_ok());
        assert!("IMC".parse::<Scheme>().is_err());
    }

    #[test]
    fn pressure_target_needs_hncgn() {
        let cfg = SchemeConfig::new(Scheme::Ihnc, ForwardKind::Hnc).with_pressure_target(1.0);
        assert!(cfg.validate().is_err());
        let cfg = SchemeConfig::new(Scheme::Hncgn, ForwardKind::Hnc).with_pressure_target(1.0);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn default_tolerances() {
        assert_eq!(SchemeConfig::new(Scheme::Ibi, ForwardKind::Md).tolerance, 0.05);
        assert_eq!(SchemeConfig::new(Scheme::Ibi, ForwardKind::Hnc).tolerance, 1e-6);
    }
}
