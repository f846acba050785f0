//! Regular-grid geometry shared by every stage: dimensions, axes, boundary
//! rules, and node linearization.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positions and directions in domain units.
pub type Vec3 = nalgebra::Vector3<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// Tie-break order used wherever axes compete.
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// The in-plane axes `(u, v)` of the plane normal to `self`, ordered so
    /// that `u × v = self` (counter-clockwise about `+self`).
    pub fn in_plane(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::Z, Axis::X),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }

    pub fn unit(self) -> Vec3 {
        let mut v = Vec3::zeros();
        v[self.index()] = 1.0;
        v
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::contract(format!("unknown axis {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Clamped,
    Periodic,
}

impl Boundary {
    pub fn code(self) -> u8 {
        match self {
            Boundary::Clamped => 0,
            Boundary::Periodic => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Boundary::Clamped),
            1 => Some(Boundary::Periodic),
            _ => None,
        }
    }
}

/// Grid dimensions `(nx, ny, nz)`; nodes are linearized x-fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims(pub [usize; 3]);

impl Dims {
    /// Smallest admissible extent along any axis.
    pub const MIN: usize = 4;

    pub fn new(nx: usize, ny: usize, nz: usize) -> Result<Self> {
        let dims = Dims([nx, ny, nz]);
        dims.validate()?;
        Ok(dims)
    }

    pub fn cube(n: usize) -> Result<Self> {
        Self::new(n, n, n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|&n| n < Self::MIN) {
            return Err(Error::contract(format!(
                "grid dims {:?} must be at least {} along every axis",
                self.0,
                Self::MIN
            )));
        }
        Ok(())
    }

    pub fn nx(&self) -> usize {
        self.0[0]
    }

    pub fn ny(&self) -> usize {
        self.0[1]
    }

    pub fn nz(&self) -> usize {
        self.0[2]
    }

    pub fn len(&self) -> usize {
        self.0.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn linear(&self, [i, j, k]: [usize; 3]) -> usize {
        i + self.0[0] * (j + self.0[1] * k)
    }

    #[inline]
    pub fn coords(&self, linear: usize) -> [usize; 3] {
        let [nx, ny, _] = self.0;
        [linear % nx, (linear / nx) % ny, linear / (nx * ny)]
    }

    pub fn contains(&self, index: [usize; 3]) -> bool {
        index.iter().zip(self.0).all(|(&i, n)| i < n)
    }

    /// Neighbor of `index` displaced by `delta`, wrapping when periodic.
    /// Returns `None` when a clamped grid has no such node.
    #[inline]
    pub fn offset(&self, index: [usize; 3], delta: [i64; 3], boundary: Boundary) -> Option<[usize; 3]> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            let n = self.0[a] as i64;
            let c = index[a] as i64 + delta[a];
            out[a] = match boundary {
                Boundary::Periodic => c.rem_euclid(n) as usize,
                Boundary::Clamped if (0..n).contains(&c) => c as usize,
                Boundary::Clamped => return None,
            };
        }
        Some(out)
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.0[0], self.0[1], self.0[2])
    }
}

/// Spatial frame of a grid: spacing plus the periodic box, if any. Used to
/// measure displacements between sub-grid points consistently.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridFrame {
    pub spacing: f64,
    pub period: Option<Vec3>,
}

impl GridFrame {
    pub fn new(dims: Dims, spacing: f64, boundary: Boundary) -> Self {
        let period = match boundary {
            Boundary::Periodic => Some(Vec3::new(
                dims.nx() as f64 * spacing,
                dims.ny() as f64 * spacing,
                dims.nz() as f64 * spacing,
            )),
            Boundary::Clamped => None,
        };
        GridFrame { spacing, period }
    }

    /// Displacement `to - from`, taken to the nearest periodic image.
    pub fn delta(&self, from: &Vec3, to: &Vec3) -> Vec3 {
        let mut d = to - from;
        if let Some(period) = self.period {
            for a in 0..3 {
                d[a] -= period[a] * (d[a] / period[a]).round();
            }
        }
        d
    }

    pub fn distance(&self, a: &Vec3, b: &Vec3) -> f64 {
        self.delta(a, b).norm()
    }

    /// Canonical representative of `p` (wrapped into `[0, L)` when periodic).
    pub fn canonical(&self, p: Vec3) -> Vec3 {
        match self.period {
            Some(period) => Vec3::from_fn(|a, _| {
                let w = p[a].rem_euclid(period[a]);
                // rem_euclid may round up to exactly the period
                if w >= period[a] {
                    0.0
                } else {
                    w
                }
            }),
            None => p,
        }
    }
}
