use serde::{Deserialize, Serialize};

use super::potential::PotentialSpec;
use crate::error::{Error, Result};

/// Required ratio of the potential at the truncation points to
/// `λ_max + 1`.
pub const SAFETY_FACTOR: f64 = 4.0;

/// Required decay exponent `∫ sqrt(Φ - λ_max)` between the well and each
/// truncation point; `e^{-2·20}` is far below solver tolerance.
pub const AGMON_EXPONENT: f64 = 20.0;

const MAX_HALF_WIDTH: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Boundary {
    /// Zero boundary values at `center ± half_width`.
    Dirichlet,
    /// Periodic on `[center - period/2, center + period/2)`.
    Periodic { period: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DomainSpec {
    pub center: f64,
    pub half_width: f64,
    /// Number of grid intervals.
    pub grid: usize,
    pub boundary: Boundary,
}

pub const MIN_GRID: usize = 16;

impl DomainSpec {
    pub fn dirichlet(center: f64, half_width: f64, grid: usize) -> Result<Self> {
        let d = Self { center, half_width, grid, boundary: Boundary::Dirichlet };
        d.validate()?;
        Ok(d)
    }

    pub fn periodic(period: f64, grid: usize) -> Result<Self> {
        let d = Self {
            center: 0.5 * period,
            half_width: 0.5 * period,
            grid,
            boundary: Boundary::Periodic { period },
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0) || !self.half_width.is_finite() || !self.center.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid half width {}", self.half_width)));
        }
        if self.grid < MIN_GRID {
            return Err(Error::InvalidArgument(format!(
                "grid {} is below the minimum {MIN_GRID}",
                self.grid
            )));
        }
        if let Boundary::Periodic { period } = self.boundary {
            if !(period > 0.0) || (period - 2.0 * self.half_width).abs() > 1e-12 * period {
                return Err(Error::InvalidArgument(format!("invalid period {period}")));
            }
        }
        Ok(())
    }

    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.grid as f64
    }

    pub fn with_grid(&self, grid: usize) -> Self {
        Self { grid, ..*self }
    }

    /// Grid node `j` (`0..=grid`).
    pub fn node(&self, j: usize) -> f64 {
        self.lower() + j as f64 * self.step()
    }

    /// Midpoint between nodes `j` and `j + 1`.
    pub fn half_node(&self, j: usize) -> f64 {
        self.lower() + (j as f64 + 0.5) * self.step()
    }
}

/// Checks the truncation rule `min Φ(center ± L) >= SAFETY_FACTOR · (λ_max + 1)`.
pub fn check_truncation(potential: &PotentialSpec, dom: &DomainSpec, lambda_max: f64) -> Result<()> {
    if dom.boundary != Boundary::Dirichlet {
        return Ok(());
    }
    let boundary = potential.value(dom.lower()).min(potential.value(dom.upper()));
    let required = SAFETY_FACTOR * (lambda_max + 1.0);
    if boundary < required {
        return Err(Error::DomainTooSmall { boundary, required });
    }
    Ok(())
}

/// Smallest half-integer `L` such that the truncation rule holds and the
/// Agmon decay exponent from the well to `center ± L` is at least
/// [`AGMON_EXPONENT`] on both sides.
pub fn auto_domain(potential: &PotentialSpec, center: f64, lambda_max: f64, grid: usize) -> Result<DomainSpec> {
    if !potential.is_confining() {
        return Err(Error::NotConfining);
    }
    let required = SAFETY_FACTOR * (lambda_max + 1.0);
    let side = |dir: f64| -> Result<f64> {
        let mut agmon = 0.0;
        let mut l = 0.0;
        let dz = 0.005;
        let weight = |z: f64| (potential.value(z) - lambda_max).max(0.0).sqrt();
        loop {
            let next = l + 0.5;
            let steps = (0.5 / dz) as usize;
            for s in 0..steps {
                let a = center + dir * (l + s as f64 * dz);
                let b = a + dir * dz;
                agmon += 0.5 * dz * (weight(a) + weight(b));
            }
            l = next;
            if potential.value(center + dir * l) >= required && agmon >= AGMON_EXPONENT {
                return Ok(l);
            }
            if l > MAX_HALF_WIDTH {
                return Err(Error::NotConfining);
            }
        }
    };
    let l = side(-1.0)?.max(side(1.0)?);
    DomainSpec::dirichlet(center, l, grid)
}
