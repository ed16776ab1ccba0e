//! Uniform 1D sample grids in position or transverse-wavevector domain.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Representation tag for an axis: real space or transverse wavevector space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Position coordinate, meters.
    Position,
    /// Transverse wavevector coordinate, rad/m.
    Momentum,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Position => "position",
            Domain::Momentum => "momentum",
        }
    }
}

/// Uniform sample grid: `coordinate(j) = center + (j - n/2) * spacing`.
///
/// `n` is a power of two (>= 16) so transforms run on fast FFT sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    n: usize,
    spacing: f64,
    center: f64,
    domain: Domain,
}

impl Axis {
    pub fn new(n: usize, spacing: f64, center: f64, domain: Domain) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "axis sample count must be a power of two >= 16, got {n}"
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::Config(format!("axis spacing must be positive, got {spacing}")));
        }
        if !center.is_finite() {
            return Err(Error::Config("axis center must be finite".into()));
        }
        Ok(Self { n, spacing, center, domain })
    }

    /// Symmetric grid centered at zero.
    pub fn centered(n: usize, spacing: f64, domain: Domain) -> Result<Self> {
        Self::new(n, spacing, 0.0, domain)
    }

    /// Centered grid chosen by half-extent: spacing = 2*halfwidth / n.
    pub fn centered_from_halfwidth(n: usize, halfwidth: f64, domain: Domain) -> Result<Self> {
        if !(halfwidth > 0.0) {
            return Err(Error::Config(format!("axis halfwidth must be positive, got {halfwidth}")));
        }
        Self::centered(n, 2.0 * halfwidth / n as f64, domain)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        self.center + (j as f64 - (self.n / 2) as f64) * self.spacing
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.coordinate(j)).collect()
    }

    /// Half-extent of the grid, `(n/2) * spacing`.
    pub fn halfwidth(&self) -> f64 {
        (self.n / 2) as f64 * self.spacing
    }

    pub fn is_centered(&self) -> bool {
        self.center == 0.0
    }

    pub fn require_centered(&self) -> Result<()> {
        if self.is_centered() {
            Ok(())
        } else {
            Err(Error::NonCenteredAxis { center: self.center })
        }
    }

    /// Conjugate grid under the unitary transform: spacing 2*pi/(n*spacing),
    /// centered at zero, opposite domain tag. `dp * dx * n = 2*pi` exactly.
    pub fn conjugate(&self) -> Axis {
        let domain = match self.domain {
            Domain::Position => Domain::Momentum,
            Domain::Momentum => Domain::Position,
        };
        Axis {
            n: self.n,
            spacing: 2.0 * PI / (self.n as f64 * self.spacing),
            center: 0.0,
            domain,
        }
    }

    /// Index of the grid cell whose center is nearest to `value`.
    pub fn nearest_index(&self, value: f64) -> Result<usize> {
        let rel = (value - self.center) / self.spacing + (self.n / 2) as f64;
        let j = rel.round();
        if j < 0.0 || j >= self.n as f64 {
            return Err(Error::OutOfRange(format!(
                "coordinate {value:.6e} lies outside the grid [{:.6e}, {:.6e}]",
                self.coordinate(0),
                self.coordinate(self.n - 1)
            )));
        }
        Ok(j as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_are_centered() {
        let ax = Axis::centered(16, 0.5, Domain::Position).unwrap();
        assert_eq!(ax.coordinate(8), 0.0);
        assert_eq!(ax.coordinate(0), -4.0);
        assert_eq!(ax.coordinate(15), 3.5);
    }

    #[test]
    fn conjugate_satisfies_grid_relation() {
        let ax = Axis::centered(64, 1.25e-6, Domain::Position).unwrap();
        let cj = ax.conjugate();
        assert_eq!(cj.domain(), Domain::Momentum);
        let prod = cj.spacing() * ax.spacing() * ax.n() as f64;
        assert_eq!(prod, 2.0 * PI);
        // conjugate of conjugate restores the spacing
        let back = cj.conjugate();
        assert!((back.spacing() - ax.spacing()).abs() <= f64::EPSILON * ax.spacing());
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Axis::centered(8, 1.0, Domain::Position).is_err());
        assert!(Axis::centered(48, 1.0, Domain::Position).is_err());
        assert!(Axis::centered(64, 0.0, Domain::Position).is_err());
        assert!(Axis::centered(64, -1.0, Domain::Position).is_err());
    }

    #[test]
    fn nearest_index_rejects_outside() {
        let ax = Axis::centered(16, 1.0, Domain::Position).unwrap();
        assert_eq!(ax.nearest_index(0.2).unwrap(), 8);
        assert_eq!(ax.nearest_index(-8.0).unwrap(), 0);
        assert!(ax.nearest_index(9.0).is_err());
        assert!(ax.nearest_index(-8.6).is_err());
    }
}
