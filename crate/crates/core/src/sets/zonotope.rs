use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::sets::{ConstrainedZonotope, Hyperbox};

/// Zonotope `⟨G, c⟩ = {Gθ + c | θ ∈ [-1, 1]^N}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ZonoDoc", into = "ZonoDoc")]
pub struct Zonotope {
    g: DMatrix<f64>,
    c: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZonoDoc {
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
    c: Vec<f64>,
}

impl TryFrom<ZonoDoc> for Zonotope {
    type Error = Error;
    fn try_from(d: ZonoDoc) -> Result<Self> {
        let width = d.g.first().map_or(0, Vec::len);
        let g = linalg::from_rows(&d.g, width)
            .ok_or_else(|| Error::dim("G: rows have different lengths"))?;
        let g = if d.g.is_empty() {
            DMatrix::zeros(d.c.len(), 0)
        } else {
            g
        };
        Zonotope::new(g, DVector::from_vec(d.c))
    }
}

impl From<Zonotope> for ZonoDoc {
    fn from(z: Zonotope) -> Self {
        ZonoDoc {
            g: linalg::to_rows(&z.g),
            c: z.c.iter().copied().collect(),
        }
    }
}

impl Zonotope {
    pub fn new(g: DMatrix<f64>, c: DVector<f64>) -> Result<Self> {
        if g.nrows() != c.len() {
            return Err(Error::dim(format!(
                "G has {} rows but c has length {}",
                g.nrows(),
                c.len()
            )));
        }
        if g.iter().chain(c.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("zonotope data must be finite".into()));
        }
        Ok(Zonotope { g, c })
    }

    pub fn point(c: DVector<f64>) -> Self {
        Zonotope {
            g: DMatrix::zeros(c.len(), 0),
            c,
        }
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn num_generators(&self) -> usize {
        self.g.ncols()
    }

    /// hᵀc + ‖hᵀG‖₁.
    pub fn support(&self, h: &DVector<f64>) -> f64 {
        h.dot(&self.c) + (h.transpose() * &self.g).iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn interval_hull(&self) -> Hyperbox {
        let r = linalg::abs_row_sums(&self.g);
        Hyperbox::from_center_radius(&self.c, &r).expect("finite zonotope")
    }

    pub fn to_cz(&self) -> ConstrainedZonotope {
        ConstrainedZonotope::from_zonotope(self)
    }

    pub fn minkowski_sum(&self, other: &Zonotope) -> Result<Zonotope> {
        if self.dim() != other.dim() {
            return Err(Error::dim("Minkowski sum of zonotopes in different dimensions"));
        }
        Zonotope::new(linalg::hcat(&self.g, &other.g), &self.c + &other.c)
    }

    pub fn linear_map(&self, m: &DMatrix<f64>) -> Result<Zonotope> {
        if m.ncols() != self.dim() {
            return Err(Error::dim("linear map width differs from zonotope dimension"));
        }
        Zonotope::new(m * &self.g, m * &self.c)
    }

    /// Drops generators with Euclidean norm below `tol` and merges parallel
    /// generators (exact: `αg ⊕ βg = (|α|+|β|) g` as sets).
    pub fn simplify(&self, tol: f64) -> Zonotope {
        let mut kept: Vec<DVector<f64>> = Vec::new();
        for col in self.g.column_iter() {
            let v = col.clone_owned();
            let norm = v.norm();
            if norm < tol {
                continue;
            }
            let mut merged = false;
            for k in kept.iter_mut() {
                let kn = k.norm();
                let dot = k.dot(&v);
                if (dot.abs() - kn * norm).abs() <= 1e-12 * kn * norm {
                    let s = if dot >= 0.0 { 1.0 } else { -1.0 };
                    *k += v.clone() * s;
                    merged = true;
                    break;
                }
            }
            if !merged {
                kept.push(v);
            }
        }
        let g = if kept.is_empty() {
            DMatrix::zeros(self.dim(), 0)
        } else {
            DMatrix::from_columns(&kept)
        };
        Zonotope { g, c: self.c.clone() }
    }

    pub fn is_singleton(&self) -> bool {
        self.g.iter().all(|v| *v == 0.0)
    }
}
