//! Half-sphere grids and local tangent-plane charts.
//!
//! Every objective in this crate is even in each direction (l and -l give
//! the same projector), so scans cover the upper half sphere only.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;

use crate::error::GridError;
use crate::state::unit_from_angles;

/// Grid resolution: `azimuthal` points around z and `polar` rings from the
/// pole to the equator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub azimuthal: usize,
    pub polar: usize,
}

impl GridSpec {
    /// Smallest accepted number of points per angle.
    pub const MIN_POINTS: usize = 16;

    pub fn new(azimuthal: usize, polar: usize) -> Result<Self, GridError> {
        if azimuthal < Self::MIN_POINTS || polar < Self::MIN_POINTS {
            return Err(GridError::TooCoarse {
                azimuthal,
                polar,
                min: Self::MIN_POINTS,
            });
        }
        Ok(Self { azimuthal, polar })
    }

    /// Same resolution in both angles, doubled.
    pub fn doubled(&self) -> Self {
        Self {
            azimuthal: 2 * self.azimuthal,
            polar: 2 * self.polar,
        }
    }

    /// Number of grid directions, counting the pole once.
    pub fn len(&self) -> usize {
        self.azimuthal * self.polar + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Typical angular spacing between neighbouring grid points.
    pub fn spacing(&self) -> f64 {
        (2.0 * PI / self.azimuthal as f64).max(FRAC_PI_2 / self.polar as f64)
    }

    /// Grid directions: the pole first, then ring by ring towards the equator.
    ///
    /// Polar angles are `j * (pi/2) / polar` for `j = 1..=polar` and azimuths
    /// `i * 2pi / azimuthal`, so doubling both counts gives a superset.
    pub fn points(&self) -> Vec<Vector3<f64>> {
        let mut pts = Vec::with_capacity(self.len());
        pts.push(Vector3::z());
        for j in 1..=self.polar {
            let theta = j as f64 * FRAC_PI_2 / self.polar as f64;
            for i in 0..self.azimuthal {
                let phi = i as f64 * 2.0 * PI / self.azimuthal as f64;
                pts.push(unit_from_angles(theta, phi));
            }
        }
        pts
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            azimuthal: 64,
            polar: 32,
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.azimuthal, self.polar)
    }
}

impl FromStr for GridSpec {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_err = || GridError::Parse(s.to_string());
        let (a, b) = s.split_once(['x', 'X']).ok_or_else(parse_err)?;
        let a = a.trim().parse().map_err(|_| parse_err())?;
        let b = b.trim().parse().map_err(|_| parse_err())?;
        GridSpec::new(a, b)
    }
}

/// Orthonormal chart around a unit vector `c`: `c`, `e1`, `e2` form a right-handed frame.
#[derive(Debug, Clone, Copy)]
pub struct TangentChart {
    pub center: Vector3<f64>,
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
}

impl TangentChart {
    pub fn new(center: Vector3<f64>) -> Self {
        let c = center.normalize();
        // Pick the axis least aligned with c to seed the frame.
        let seed = if c.x.abs() <= c.y.abs() && c.x.abs() <= c.z.abs() {
            Vector3::x()
        } else if c.y.abs() <= c.z.abs() {
            Vector3::y()
        } else {
            Vector3::z()
        };
        let e1 = (seed - c * c.dot(&seed)).normalize();
        let e2 = c.cross(&e1);
        Self { center: c, e1, e2 }
    }

    /// Point on the sphere at tangent coordinates (u, v).
    pub fn at(&self, u: f64, v: f64) -> Vector3<f64> {
        (self.center + self.e1 * u + self.e2 * v).normalize()
    }
}

/// Whether two directions coincide up to sign within `cos_tol`.
pub fn same_axis(a: &Vector3<f64>, b: &Vector3<f64>, cos_tol: f64) -> bool {
    a.dot(b).abs() >= cos_tol
}
