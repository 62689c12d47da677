use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{LinearProgram, LpStatus};
use crate::sets::Hyperbox;

/// Tolerance of [`HPolytope::contains`].
pub const HPOLY_TOL: f64 = 1e-9;

/// `{x | Hx ≤ a}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HDoc", into = "HDoc")]
pub struct HPolytope {
    h: DMatrix<f64>,
    a: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HDoc {
    #[serde(rename = "H")]
    h: Vec<Vec<f64>>,
    a: Vec<f64>,
}

impl TryFrom<HDoc> for HPolytope {
    type Error = Error;
    fn try_from(d: HDoc) -> Result<Self> {
        let n = d.h.first().map_or(0, Vec::len);
        let h = linalg::from_rows(&d.h, n).ok_or_else(|| Error::dim("H: rows have different lengths"))?;
        HPolytope::new(h, DVector::from_vec(d.a))
    }
}

impl From<HPolytope> for HDoc {
    fn from(p: HPolytope) -> Self {
        HDoc {
            h: linalg::to_rows(&p.h),
            a: p.a.iter().copied().collect(),
        }
    }
}

impl HPolytope {
    pub fn new(h: DMatrix<f64>, a: DVector<f64>) -> Result<Self> {
        if h.nrows() != a.len() {
            return Err(Error::dim(format!("H has {} rows but a has length {}", h.nrows(), a.len())));
        }
        if h.iter().chain(a.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("H-polytope data must be finite".into()));
        }
        Ok(HPolytope { h, a })
    }

    pub fn from_box(b: &Hyperbox) -> Self {
        let n = b.dim();
        let mut h = DMatrix::zeros(2 * n, n);
        let mut a = DVector::zeros(2 * n);
        for i in 0..n {
            h[(i, i)] = 1.0;
            a[i] = b.upper()[i];
            h[(n + i, i)] = -1.0;
            a[n + i] = -b.lower()[i];
        }
        HPolytope { h, a }
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }
    pub fn a(&self) -> &DVector<f64> {
        &self.a
    }
    pub fn dim(&self) -> usize {
        self.h.ncols()
    }
    pub fn num_halfspaces(&self) -> usize {
        self.h.nrows()
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.h.row(i).transpose()
    }

    /// `Hx ≤ a` elementwise with tolerance `HPOLY_TOL`.
    pub fn contains(&self, x: &DVector<f64>) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(Error::dim(format!("point has length {}, polytope dimension {}", x.len(), self.dim())));
        }
        Ok(self.max_violation(x) <= HPOLY_TOL)
    }

    /// `max_i (Hx - a)_i`, or `-inf` without rows.
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        (&self.h * x - &self.a).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Appends the rows of `other`.
    pub fn intersect(&self, other: &HPolytope) -> Result<HPolytope> {
        if self.dim() != other.dim() {
            return Err(Error::dim("intersection of H-polytopes in different dimensions"));
        }
        HPolytope::new(linalg::vcat(&self.h, &other.h), linalg::vcat_vec(&self.a, &other.a))
    }

    /// Drops rows with `h_i = 0`. Errors if such a row is infeasible (`a_i < 0`).
    pub fn without_zero_rows(&self) -> Result<HPolytope> {
        let mut keep = Vec::new();
        for i in 0..self.num_halfspaces() {
            if self.h.row(i).iter().all(|v| *v == 0.0) {
                if self.a[i] < 0.0 {
                    return Err(Error::EmptySet(format!("row {i} reads 0 ≤ {}", self.a[i])));
                }
            } else {
                keep.push(i);
            }
        }
        Ok(HPolytope {
            h: self.h.select_rows(&keep),
            a: self.a.select_rows(&keep),
        })
    }

    fn lp_over(&self, objective: DVector<f64>) -> LinearProgram {
        let mut lp = LinearProgram::new(self.dim());
        lp.objective = objective;
        lp.a_in = self.h.clone();
        lp.b_in = self.a.clone();
        lp
    }

    /// `max hᵀx`; `Ok(None)` if empty, `Err(Unbounded)` if unbounded above.
    pub fn support(&self, d: &DVector<f64>) -> Result<Option<f64>> {
        let sol = self.lp_over(-d).solve()?;
        match sol.status {
            LpStatus::Optimal => Ok(Some(-sol.objective_value.expect("optimal"))),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(Error::Unbounded("H-polytope support is unbounded".into())),
        }
    }

    pub fn is_empty(&self) -> Result<bool> {
        let sol = self.lp_over(DVector::zeros(self.dim())).solve()?;
        Ok(sol.status == LpStatus::Infeasible)
    }

    /// Interval closure; `Ok(None)` if empty, error if unbounded.
    pub fn bounding_box(&self) -> Result<Option<Hyperbox>> {
        let n = self.dim();
        let mut lo = DVector::zeros(n);
        let mut hi = DVector::zeros(n);
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            match (self.support(&e)?, self.support(&-e)?) {
                (Some(u), Some(l)) => {
                    hi[i] = u;
                    lo[i] = (-l).min(u);
                }
                _ => return Ok(None),
            }
        }
        Ok(Some(Hyperbox::new(lo, hi)?))
    }

    /// Center and radius of the largest inscribed ball; `None` if empty.
    pub fn chebyshev_center(&self) -> Result<Option<(DVector<f64>, f64)>> {
        let n = self.dim();
        let l = self.num_halfspaces();
        let mut lp = LinearProgram::new(n + 1);
        lp.objective[n] = -1.0;
        let mut a_in = DMatrix::zeros(l, n + 1);
        for i in 0..l {
            let norm = self.h.row(i).norm();
            for j in 0..n {
                a_in[(i, j)] = self.h[(i, j)];
            }
            a_in[(i, n)] = norm;
        }
        lp.a_in = a_in;
        lp.b_in = self.a.clone();
        lp.lower[n] = 0.0;
        let sol = lp.solve()?;
        match sol.status {
            LpStatus::Optimal => {
                let x = sol.x.expect("optimal");
                Ok(Some((x.rows(0, n).into_owned(), x[n])))
            }
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(Error::Unbounded("H-polytope contains arbitrarily large balls".into())),
        }
    }
}

/// Union of H-polytopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<HPolytope>", into = "Vec<HPolytope>")]
pub struct SafeSet {
    pieces: Vec<HPolytope>,
}

impl TryFrom<Vec<HPolytope>> for SafeSet {
    type Error = Error;
    fn try_from(pieces: Vec<HPolytope>) -> Result<Self> {
        SafeSet::new(pieces)
    }
}

impl From<SafeSet> for Vec<HPolytope> {
    fn from(s: SafeSet) -> Self {
        s.pieces
    }
}

impl SafeSet {
    pub fn new(pieces: Vec<HPolytope>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::InvalidInput("safe set needs at least one piece".into()));
        };
        let n = first.dim();
        if pieces.iter().any(|p| p.dim() != n) {
            return Err(Error::dim("safe-set pieces live in different dimensions"));
        }
        Ok(SafeSet { pieces })
    }

    /// The whole space, as a single piece without halfspaces.
    pub fn everything(n: usize) -> Self {
        SafeSet {
            pieces: vec![HPolytope::new(DMatrix::zeros(0, n), DVector::zeros(0)).expect("empty rows")],
        }
    }

    pub fn single(p: HPolytope) -> Self {
        SafeSet { pieces: vec![p] }
    }

    pub fn pieces(&self) -> &[HPolytope] {
        &self.pieces
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].dim()
    }

    pub fn contains(&self, x: &DVector<f64>) -> Result<bool> {
        for p in &self.pieces {
            if p.contains(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn example2_safe() -> HPolytope {
        HPolytope::new(DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 2.0, 1.0]), v(&[2.0, 5.0])).unwrap()
    }

    #[test]
    fn halfline_membership() {
        let p = HPolytope::new(DMatrix::from_row_slice(1, 1, &[1.0]), v(&[1.0])).unwrap();
        assert!(p.contains(&v(&[0.0])).unwrap());
        assert!(!p.contains(&v(&[2.0])).unwrap());
    }

    #[test]
    fn example2_safe_contains_target_center() {
        assert!(example2_safe().contains(&v(&[1.5, 0.0])).unwrap());
        assert!(example2_safe().contains(&v(&[1.0, 2.0])).is_ok());
        assert!(example2_safe().contains(&v(&[1.0])).is_err());
    }

    #[test]
    fn chebyshev_of_box() {
        let b = Hyperbox::from_slices(&[0.0, 0.0], &[2.0, 4.0]).unwrap();
        let (c, r) = HPolytope::from_box(&b).chebyshev_center().unwrap().unwrap();
        assert!((r - 1.0).abs() < 1e-9);
        assert!((c[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_detection() {
        assert!(example2_safe().bounding_box().is_err());
        let b = Hyperbox::from_slices(&[-1.0], &[2.0]).unwrap();
        assert_eq!(HPolytope::from_box(&b).bounding_box().unwrap().unwrap(), b);
    }

    #[test]
    fn zero_rows() {
        let p = HPolytope::new(DMatrix::from_row_slice(2, 1, &[0.0, 1.0]), v(&[1.0, 3.0])).unwrap();
        assert_eq!(p.without_zero_rows().unwrap().num_halfspaces(), 1);
        let bad = HPolytope::new(DMatrix::from_row_slice(1, 1, &[0.0]), v(&[-1.0])).unwrap();
        assert!(bad.without_zero_rows().is_err());
    }

    #[test]
    fn safe_set_json() {
        let s = SafeSet::single(example2_safe());
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"[{"H":[[-1.0,0.0],[2.0,1.0]],"a":[2.0,5.0]}]"#);
        let back: SafeSet = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<SafeSet>("[]").is_err());
    }
}
