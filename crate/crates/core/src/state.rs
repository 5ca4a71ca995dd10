use crate::error::{Error, Result};

/// Thermodynamic state: number density, temperature and (for simulations)
/// particle count. Reduced units with `k_B = 1` unless a Boltzmann constant
/// is given explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePoint {
    pub density: f64,
    pub temperature: f64,
    pub beta: f64,
    pub particles: usize,
}

impl StatePoint {
    pub fn new(density: f64, temperature: f64) -> Result<Self> {
        Self::with_boltzmann(density, temperature, 1.0)
    }

    pub fn with_boltzmann(density: f64, temperature: f64, kb: f64) -> Result<Self> {
        if !(density >= 0.0 && density.is_finite()) {
            return Err(Error::InvalidArgument(format!("density must be >= 0, got {density}")));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "temperature must be > 0, got {temperature}"
            )));
        }
        if !(kb > 0.0) {
            return Err(Error::InvalidArgument(format!("Boltzmann constant must be > 0, got {kb}")));
        }
        Ok(Self { density, temperature, beta: 1.0 / (kb * temperature), particles: 0 })
    }

    pub fn with_particles(mut self, particles: usize) -> Self {
        self.particles = particles;
        self
    }

    /// Thermal energy `1/beta`.
    #[inline]
    pub fn kt(&self) -> f64 {
        1.0 / self.beta
    }

    /// Ideal-gas pressure `rho/beta`.
    pub fn ideal_pressure(&self) -> f64 {
        self.density / self.beta
    }
}
