use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::{ConstrainedZonotope, Zonotope};

/// Axis-aligned box `[lower, upper]`; degenerate (flat) boxes are allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxDoc", into = "BoxDoc")]
pub struct Hyperbox {
    lower: DVector<f64>,
    upper: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxDoc {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<BoxDoc> for Hyperbox {
    type Error = Error;
    fn try_from(d: BoxDoc) -> Result<Self> {
        Hyperbox::new(DVector::from_vec(d.lower), DVector::from_vec(d.upper))
    }
}

impl From<Hyperbox> for BoxDoc {
    fn from(b: Hyperbox) -> Self {
        BoxDoc {
            lower: b.lower.iter().copied().collect(),
            upper: b.upper.iter().copied().collect(),
        }
    }
}

impl Hyperbox {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::dim(format!(
                "box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for i in 0..lower.len() {
            if !(lower[i] <= upper[i]) || !lower[i].is_finite() || !upper[i].is_finite() {
                return Err(Error::InvalidInput(format!(
                    "box coordinate {i}: [{}, {}]",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(Hyperbox { lower, upper })
    }

    pub fn from_slices(lower: &[f64], upper: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(lower), DVector::from_column_slice(upper))
    }

    pub fn from_center_radius(center: &DVector<f64>, radius: &DVector<f64>) -> Result<Self> {
        Self::new(center - radius, center + radius)
    }

    /// Single-point box.
    pub fn point(x: &DVector<f64>) -> Self {
        Hyperbox {
            lower: x.clone(),
            upper: x.clone(),
        }
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn center(&self) -> DVector<f64> {
        (&self.lower + &self.upper) * 0.5
    }

    pub fn radius(&self) -> DVector<f64> {
        (&self.upper - &self.lower) * 0.5
    }

    pub fn widths(&self) -> DVector<f64> {
        &self.upper - &self.lower
    }

    pub fn volume(&self) -> f64 {
        self.widths().iter().product()
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        x.len() == self.dim()
            && (0..x.len()).all(|i| x[i] >= self.lower[i] - tol && x[i] <= self.upper[i] + tol)
    }

    /// `other ⊆ self` with slack `tol`.
    pub fn contains_box(&self, other: &Hyperbox, tol: f64) -> bool {
        other.dim() == self.dim()
            && (0..self.dim())
                .all(|i| other.lower[i] >= self.lower[i] - tol && other.upper[i] <= self.upper[i] + tol)
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &Hyperbox) -> Hyperbox {
        Hyperbox {
            lower: self.lower.zip_map(&other.lower, f64::min),
            upper: self.upper.zip_map(&other.upper, f64::max),
        }
    }

    pub fn hull_point(&self, x: &DVector<f64>) -> Hyperbox {
        self.hull(&Hyperbox::point(x))
    }

    pub fn to_zonotope(&self) -> Zonotope {
        Zonotope::new(DMatrix::from_diagonal(&self.radius()), self.center())
            .expect("box data is consistent")
    }

    pub fn to_cz(&self) -> ConstrainedZonotope {
        self.to_zonotope().to_cz()
    }
}
