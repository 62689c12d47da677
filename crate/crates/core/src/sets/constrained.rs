use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, blkdiag, hcat, vcat, vcat_vec};
use crate::lp::{LinearProgram, LpStatus};
use crate::sets::{Hyperbox, Zonotope};

/// Tolerance on the membership residual.
pub const MEMBERSHIP_TOL: f64 = 1e-7;

/// Constrained zonotope `⟨G, c, A, b⟩ = {Gθ + c | θ ∈ [-1, 1]^N, Aθ = b}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CzDoc", into = "CzDoc")]
pub struct ConstrainedZonotope {
    g: DMatrix<f64>,
    c: DVector<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CzDoc {
    #[serde(rename = "G")]
    g: Vec<Vec<f64>>,
    c: Vec<f64>,
    #[serde(rename = "A", default)]
    a: Vec<Vec<f64>>,
    #[serde(default)]
    b: Vec<f64>,
}

impl TryFrom<CzDoc> for ConstrainedZonotope {
    type Error = Error;
    fn try_from(d: CzDoc) -> Result<Self> {
        let n_gen = d.g.first().map_or(0, Vec::len);
        let g = if d.g.is_empty() {
            DMatrix::zeros(d.c.len(), 0)
        } else {
            linalg::from_rows(&d.g, n_gen)
                .ok_or_else(|| Error::dim("G: rows have different lengths"))?
        };
        let a = linalg::from_rows(&d.a, n_gen).ok_or_else(|| {
            Error::dim(format!("A: every row must have {n_gen} entries (one per generator)"))
        })?;
        ConstrainedZonotope::new(g, DVector::from_vec(d.c), a, DVector::from_vec(d.b))
    }
}

impl From<ConstrainedZonotope> for CzDoc {
    fn from(z: ConstrainedZonotope) -> Self {
        CzDoc {
            g: linalg::to_rows(&z.g),
            c: z.c.iter().copied().collect(),
            a: linalg::to_rows(&z.a),
            b: z.b.iter().copied().collect(),
        }
    }
}

impl ConstrainedZonotope {
    pub fn new(g: DMatrix<f64>, c: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if g.nrows() != c.len() {
            return Err(Error::dim(format!(
                "G has {} rows but c has length {}",
                g.nrows(),
                c.len()
            )));
        }
        if a.ncols() != g.ncols() {
            return Err(Error::dim(format!(
                "A has {} columns but G has {}",
                a.ncols(),
                g.ncols()
            )));
        }
        if a.nrows() != b.len() {
            return Err(Error::dim(format!(
                "A has {} rows but b has length {}",
                a.nrows(),
                b.len()
            )));
        }
        let finite = g.iter().chain(c.iter()).chain(a.iter()).chain(b.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("constrained zonotope data must be finite".into()));
        }
        Ok(ConstrainedZonotope { g, c, a, b })
    }

    pub fn from_zonotope(z: &Zonotope) -> Self {
        ConstrainedZonotope {
            g: z.g().clone(),
            c: z.c().clone(),
            a: DMatrix::zeros(0, z.num_generators()),
            b: DVector::zeros(0),
        }
    }

    pub fn from_box(b: &Hyperbox) -> Self {
        b.to_cz()
    }

    pub fn point(c: DVector<f64>) -> Self {
        Self::from_zonotope(&Zonotope::point(c))
    }

    /// A canonical empty set: one generator under the constraint `0·θ = 1`.
    pub fn empty(n: usize) -> Self {
        ConstrainedZonotope {
            g: DMatrix::zeros(n, 1),
            c: DVector::zeros(n),
            a: DMatrix::zeros(1, 1),
            b: DVector::from_element(1, 1.0),
        }
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }
    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }
    pub fn num_generators(&self) -> usize {
        self.g.ncols()
    }
    pub fn num_constraints(&self) -> usize {
        self.a.nrows()
    }

    /// `⟨G, c⟩` with the constraints dropped: an outer zonotope.
    pub fn drop_constraints(&self) -> Zonotope {
        Zonotope::new(self.g.clone(), self.c.clone()).expect("consistent data")
    }

    /// Maps a parameter vector to its point `Gθ + c`.
    pub fn point_of(&self, theta: &DVector<f64>) -> DVector<f64> {
        &self.g * theta + &self.c
    }

    fn check_dim(&self, n: usize, what: &str) -> Result<()> {
        if n == self.dim() {
            Ok(())
        } else {
            Err(Error::dim(format!("{what}: expected dimension {}, got {n}", self.dim())))
        }
    }

    pub fn translate(&self, v: &DVector<f64>) -> Result<Self> {
        self.check_dim(v.len(), "translation")?;
        let mut out = self.clone();
        out.c += v;
        Ok(out)
    }

    /// `⟨MG, Mc, A, b⟩`.
    pub fn linear_map(&self, m: &DMatrix<f64>) -> Result<Self> {
        self.check_dim(m.ncols(), "linear map width")?;
        Ok(ConstrainedZonotope {
            g: m * &self.g,
            c: m * &self.c,
            a: self.a.clone(),
            b: self.b.clone(),
        })
    }

    pub fn minkowski_sum(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim(), "Minkowski sum")?;
        Ok(ConstrainedZonotope {
            g: hcat(&self.g, &other.g),
            c: &self.c + &other.c,
            a: blkdiag(&self.a, &other.a),
            b: vcat_vec(&self.b, &other.b),
        })
    }

    pub fn minkowski_sum_zonotope(&self, z: &Zonotope) -> Result<Self> {
        self.minkowski_sum(&z.to_cz())
    }

    /// `⟨[G1, 0], c1, [blkdiag(A1, A2); [G1, -G2]], [b1; b2; c2 - c1]⟩`.
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim(), "intersection")?;
        let n2 = other.num_generators();
        let g = hcat(&self.g, &DMatrix::zeros(self.dim(), n2));
        let a = vcat(&blkdiag(&self.a, &other.a), &hcat(&self.g, &(-&other.g)));
        let b = vcat_vec(&vcat_vec(&self.b, &other.b), &(&other.c - &self.c));
        Ok(ConstrainedZonotope {
            g,
            c: self.c.clone(),
            a,
            b,
        })
    }

    /// Intersection with `{x | hᵀx ≤ a}`. Errors when the intersection is
    /// empty (the construction is only valid for a nonempty result).
    pub fn intersect_halfspace(&self, h: &DVector<f64>, a: f64) -> Result<Self> {
        self.check_dim(h.len(), "halfspace normal")?;
        let lowest = -self.support(&-h)?;
        if lowest > a + MEMBERSHIP_TOL * (1.0 + a.abs()) {
            return Err(Error::EmptyIntersection);
        }
        Ok(self.append_halfspace(h, a))
    }

    /// Halfspace encoding with one slack generator, without the emptiness check.
    pub(crate) fn append_halfspace(&self, h: &DVector<f64>, a: f64) -> Self {
        let hg = h.transpose() * &self.g;
        let hc = h.dot(&self.c);
        let d = a - hc + hg.iter().map(|v| v.abs()).sum::<f64>();
        let n = self.num_generators();
        let m = self.num_constraints();
        let g = hcat(&self.g, &DMatrix::zeros(self.dim(), 1));
        let mut a_new = DMatrix::zeros(m + 1, n + 1);
        a_new.view_mut((0, 0), (m, n)).copy_from(&self.a);
        a_new.view_mut((m, 0), (1, n)).copy_from(&hg);
        a_new[(m, n)] = d / 2.0;
        let mut b_new = DVector::zeros(m + 1);
        b_new.rows_mut(0, m).copy_from(&self.b);
        b_new[m] = a - hc - d / 2.0;
        ConstrainedZonotope {
            g,
            c: self.c.clone(),
            a: a_new,
            b: b_new,
        }
    }

    /// Intersection with `{x | hᵀx ≤ a}` that classifies the cut first:
    /// `None` if the result is empty, an unchanged clone if the cut is
    /// redundant, the appended representation otherwise.
    pub fn cut(&self, h: &DVector<f64>, a: f64) -> Result<Option<Self>> {
        self.check_dim(h.len(), "halfspace normal")?;
        let tol = MEMBERSHIP_TOL * (1.0 + a.abs());
        let Some(hi) = self.try_support(h)? else {
            return Ok(None);
        };
        if hi <= a + tol {
            return Ok(Some(self.clone()));
        }
        let lo = -self.support(&-h)?;
        if lo > a + tol {
            return Ok(None);
        }
        Ok(Some(self.append_halfspace(h, a)))
    }

    /// `⟨blkdiag(G1, G2), [c1; c2], blkdiag(A1, A2), [b1; b2]⟩`.
    pub fn product(&self, other: &Self) -> Self {
        ConstrainedZonotope {
            g: blkdiag(&self.g, &other.g),
            c: vcat_vec(&self.c, &other.c),
            a: blkdiag(&self.a, &other.a),
            b: vcat_vec(&self.b, &other.b),
        }
    }

    fn param_lp(&self) -> LinearProgram {
        let n = self.num_generators();
        let mut lp = LinearProgram::new(n);
        lp.a_eq = self.a.clone();
        lp.b_eq = self.b.clone();
        lp.lower = DVector::from_element(n, -1.0);
        lp.upper = DVector::from_element(n, 1.0);
        lp
    }

    /// Maximizer parameter of `hᵀx`, or `None` when the set is empty.
    pub fn support_parameter(&self, h: &DVector<f64>) -> Result<Option<DVector<f64>>> {
        self.check_dim(h.len(), "support direction")?;
        let hg = self.g.transpose() * h;
        if self.num_constraints() == 0 {
            return Ok(Some(hg.map(|v| if v >= 0.0 { 1.0 } else { -1.0 })));
        }
        let mut lp = self.param_lp();
        lp.objective = -hg;
        let sol = lp.solve()?;
        match sol.status {
            LpStatus::Optimal => Ok(sol.x),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(Error::Numerical("bounded LP reported unbounded".into())),
        }
    }

    /// `max hᵀx` over the set, `None` if empty.
    pub fn try_support(&self, h: &DVector<f64>) -> Result<Option<f64>> {
        self.check_dim(h.len(), "support direction")?;
        if self.num_constraints() == 0 {
            let hg = self.g.transpose() * h;
            return Ok(Some(h.dot(&self.c) + hg.iter().map(|v| v.abs()).sum::<f64>()));
        }
        Ok(self
            .support_parameter(h)?
            .map(|theta| h.dot(&self.point_of(&theta))))
    }

    /// `max hᵀx` over the set.
    pub fn support(&self, h: &DVector<f64>) -> Result<f64> {
        self.try_support(h)?
            .ok_or_else(|| Error::EmptySet("support of an empty constrained zonotope".into()))
    }

    /// Smallest `t` such that some `θ ∈ [-1,1]^N` has
    /// `‖Gθ + c - x‖∞ ≤ t` and `‖Aθ - b‖∞ ≤ t`.
    pub fn membership_residual(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x.len(), "point")?;
        let n = self.num_generators();
        let rows_g = self.dim();
        let rows_a = self.num_constraints();
        let k = rows_g + rows_a;
        let stacked = vcat(&self.g, &self.a);
        let target = vcat_vec(&(x - &self.c), &self.b);
        let mut lp = LinearProgram::new(n + 1);
        lp.objective[n] = 1.0;
        let mut a_in = DMatrix::zeros(2 * k, n + 1);
        let mut b_in = DVector::zeros(2 * k);
        for i in 0..k {
            for j in 0..n {
                a_in[(i, j)] = stacked[(i, j)];
                a_in[(k + i, j)] = -stacked[(i, j)];
            }
            a_in[(i, n)] = -1.0;
            a_in[(k + i, n)] = -1.0;
            b_in[i] = target[i];
            b_in[k + i] = -target[i];
        }
        lp.a_in = a_in;
        lp.b_in = b_in;
        for j in 0..n {
            lp.lower[j] = -1.0;
            lp.upper[j] = 1.0;
        }
        lp.lower[n] = 0.0;
        let sol = lp.solve()?;
        match sol.status {
            LpStatus::Optimal => Ok(sol.objective_value.unwrap_or(f64::INFINITY).max(0.0)),
            _ => Err(Error::Numerical("membership residual LP did not solve".into())),
        }
    }

    pub fn contains_point_tol(&self, x: &DVector<f64>, tol: f64) -> Result<bool> {
        Ok(self.membership_residual(x)? <= tol)
    }

    /// LP membership test at [`MEMBERSHIP_TOL`].
    pub fn contains_point(&self, x: &DVector<f64>) -> Result<bool> {
        self.contains_point_tol(x, MEMBERSHIP_TOL)
    }

    /// Checks a parameter witness directly: `θ` in the box, `Aθ = b` and `Gθ + c = x`.
    pub fn witness_ok(&self, theta: &DVector<f64>, x: &DVector<f64>, tol: f64) -> bool {
        if theta.len() != self.num_generators() || x.len() != self.dim() {
            return false;
        }
        if theta.iter().any(|t| t.abs() > 1.0 + tol) {
            return false;
        }
        let rx = (self.point_of(theta) - x).amax();
        let ra = if self.num_constraints() > 0 {
            (&self.a * theta - &self.b).amax()
        } else {
            0.0
        };
        rx <= tol && ra <= tol
    }

    /// Some admissible parameter, or `None` if the set is empty.
    pub fn feasible_parameter(&self) -> Result<Option<DVector<f64>>> {
        if self.num_constraints() == 0 {
            return Ok(Some(DVector::zeros(self.num_generators())));
        }
        let sol = self.param_lp().solve()?;
        Ok(match sol.status {
            LpStatus::Optimal => sol.x,
            _ => None,
        })
    }

    pub fn is_empty(&self) -> Result<bool> {
        Ok(self.feasible_parameter()?.is_none())
    }

    /// Parameter maximizing the distance to the box faces within `Aθ = b`,
    /// together with that margin.
    pub fn interior_parameter(&self) -> Result<Option<(DVector<f64>, f64)>> {
        let n = self.num_generators();
        if self.num_constraints() == 0 {
            return Ok(Some((DVector::zeros(n), 1.0)));
        }
        let mut lp = LinearProgram::new(n + 1);
        lp.objective[n] = -1.0;
        lp.a_eq = hcat(&self.a, &DMatrix::zeros(self.num_constraints(), 1));
        lp.b_eq = self.b.clone();
        let mut a_in = DMatrix::zeros(2 * n, n + 1);
        for j in 0..n {
            a_in[(j, j)] = 1.0;
            a_in[(j, n)] = 1.0;
            a_in[(n + j, j)] = -1.0;
            a_in[(n + j, n)] = 1.0;
        }
        lp.a_in = a_in;
        lp.b_in = DVector::from_element(2 * n, 1.0);
        lp.lower[n] = 0.0;
        lp.upper[n] = 1.0;
        let sol = lp.solve()?;
        Ok(match sol.status {
            LpStatus::Optimal => {
                let x = sol.x.expect("optimal");
                Some((x.rows(0, n).into_owned(), x[n]))
            }
            _ => None,
        })
    }

    /// Smallest enclosing axis-aligned box (2n LPs; closed form without constraints).
    pub fn interval_closure(&self) -> Result<Hyperbox> {
        if self.num_constraints() == 0 {
            return Ok(self.drop_constraints().interval_hull());
        }
        let n = self.dim();
        let mut lo = DVector::zeros(n);
        let mut hi = DVector::zeros(n);
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = 1.0;
            hi[i] = self.support(&e)?;
            lo[i] = -self.support(&-e)?;
            if lo[i] > hi[i] {
                // Both values come from LP optima of the same problem; any
                // inversion is round-off.
                let mid = 0.5 * (lo[i] + hi[i]);
                lo[i] = mid;
                hi[i] = mid;
            }
        }
        Hyperbox::new(lo, hi)
    }

    /// Removes generator columns that are zero in both `G` and `A`, and
    /// constraint rows that are identically `0 = 0`.
    pub fn compact(&self) -> Self {
        let keep_cols: Vec<usize> = (0..self.num_generators())
            .filter(|&j| {
                self.g.column(j).iter().any(|v| *v != 0.0) || self.a.column(j).iter().any(|v| *v != 0.0)
            })
            .collect();
        let keep_rows: Vec<usize> = (0..self.num_constraints())
            .filter(|&i| self.a.row(i).iter().any(|v| *v != 0.0) || self.b[i] != 0.0)
            .collect();
        let g = self.g.select_columns(&keep_cols);
        let a = self.a.select_rows(&keep_rows).select_columns(&keep_cols);
        let b = self.b.select_rows(&keep_rows);
        ConstrainedZonotope {
            g,
            c: self.c.clone(),
            a,
            b,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::sampling::Sampler;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn unit_square() -> ConstrainedZonotope {
        Hyperbox::from_slices(&[-1.0, -1.0], &[1.0, 1.0]).unwrap().to_cz()
    }

    fn interval(lo: f64, hi: f64) -> ConstrainedZonotope {
        Hyperbox::from_slices(&[lo], &[hi]).unwrap().to_cz()
    }

    pub(crate) fn example1() -> ConstrainedZonotope {
        ConstrainedZonotope::new(
            DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.1, 0.0, 1.0, 0.0, 0.8]),
            DVector::zeros(2),
            DMatrix::from_row_slice(1, 4, &[-1.0, 1.0, 0.3, 1.0]),
            v(&[1.0]),
        )
        .unwrap()
    }

    fn closure_1d(s: &ConstrainedZonotope) -> (f64, f64) {
        let b = s.interval_closure().unwrap();
        (b.lower()[0], b.upper()[0])
    }

    #[test]
    fn identity_map_is_noop() {
        let s = example1();
        assert_eq!(s.linear_map(&DMatrix::identity(2, 2)).unwrap(), s);
    }

    #[test]
    fn zero_map_is_origin() {
        let s = example1();
        let z = s.linear_map(&DMatrix::zeros(1, 2)).unwrap();
        assert_eq!(z.dim(), 1);
        assert!(z.g().iter().all(|v| *v == 0.0));
        assert!(z.contains_point(&v(&[0.0])).unwrap());
        assert!(!z.contains_point(&v(&[0.1])).unwrap());
    }

    #[test]
    fn scaling_map_by_sampling() {
        let sq = unit_square();
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        let big = sq.linear_map(&m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = Sampler::new(&sq).unwrap().points(1000, &mut rng);
        for p in pts {
            let q = &m * p;
            assert!(q.amax() <= 2.0 + 1e-12);
            assert!(big.contains_point(&q).unwrap());
        }
        let b = big.interval_closure().unwrap();
        assert_eq!(b.upper(), &v(&[2.0, 2.0]));
    }

    #[test]
    fn sum_with_origin() {
        let s = example1();
        let sum = s.minkowski_sum(&ConstrainedZonotope::point(DVector::zeros(2))).unwrap();
        for d in linalg::test_directions(2, 16, 3) {
            assert!((sum.support(&d).unwrap() - s.support(&d).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn interval_sum() {
        let s = interval(-1.0, 1.0).minkowski_sum(&interval(-2.0, 2.0)).unwrap();
        assert_eq!(closure_1d(&s), (-3.0, 3.0));
    }

    #[test]
    fn sum_support_additivity() {
        let s = example1();
        let sq = unit_square();
        let sum = s.minkowski_sum(&sq).unwrap();
        for d in linalg::test_directions(2, 8, 11) {
            let lhs = sum.support(&d).unwrap();
            let rhs = s.support(&d).unwrap() + sq.support(&d).unwrap();
            assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p1 = Sampler::new(&s).unwrap().points(50, &mut rng);
        let p2 = Sampler::new(&sq).unwrap().points(50, &mut rng);
        for (a, b) in p1.iter().zip(&p2) {
            assert!(sum.contains_point(&(a + b)).unwrap());
        }
    }

    #[test]
    fn interval_intersection() {
        let s = interval(-1.0, 1.0).intersect(&interval(0.5, 3.0)).unwrap();
        let (lo, hi) = closure_1d(&s);
        assert!((lo - 0.5).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn self_intersection_same_set() {
        let s = example1();
        let ss = s.intersect(&s).unwrap();
        for d in linalg::test_directions(2, 16, 5) {
            assert!((ss.support(&d).unwrap() - s.support(&d).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn intersection_pointwise_oracle() {
        let s1 = example1();
        let s2 = Zonotope::new(
            DMatrix::from_row_slice(2, 3, &[1.0, 0.5, 0.0, -0.3, 1.0, 0.4]),
            v(&[0.4, -0.2]),
        )
        .unwrap()
        .to_cz();
        let both = s1.intersect(&s2).unwrap();
        let mut disagreements = 0;
        for i in 0..32 {
            for j in 0..32 {
                let x = v(&[-1.6 + 3.2 * i as f64 / 31.0, -1.6 + 3.2 * j as f64 / 31.0]);
                let lhs = both.membership_residual(&x).unwrap();
                let r1 = s1.membership_residual(&x).unwrap();
                let r2 = s2.membership_residual(&x).unwrap();
                let strict_in = lhs <= 1e-9;
                let strict_both = r1 <= 1e-9 && r2 <= 1e-9;
                // Points right on a boundary may be resolved either way.
                if strict_in != strict_both && lhs.min(r1.max(r2)) > 1e-6 {
                    disagreements += 1;
                }
            }
        }
        assert_eq!(disagreements, 0);
    }

    #[test]
    fn halfspace_cuts() {
        let s = interval(-1.0, 1.0).intersect_halfspace(&v(&[1.0]), 0.0).unwrap();
        let (lo, hi) = closure_1d(&s);
        assert!((lo + 1.0).abs() < 1e-9 && hi.abs() < 1e-9);
        assert!(matches!(
            interval(-1.0, 1.0).intersect_halfspace(&v(&[1.0]), -2.0),
            Err(Error::EmptyIntersection)
        ));
    }

    #[test]
    fn redundant_halfspace_on_target_set() {
        let x0 = Zonotope::new(DMatrix::from_diagonal(&v(&[0.5, 0.5])), v(&[1.5, 0.0]))
            .unwrap()
            .to_cz();
        let h = v(&[2.0, 1.0]);
        assert!((x0.support(&h).unwrap() - 4.5).abs() < 1e-12);
        let cut = x0.intersect_halfspace(&h, 5.0).unwrap();
        for d in linalg::test_directions(2, 64, 9) {
            assert!((cut.support(&d).unwrap() - x0.support(&d).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn product_and_projection() {
        let p = interval(-1.0, 1.0).product(&interval(-1.0, 1.0));
        assert_eq!(p.interval_closure().unwrap(), unit_square().interval_closure().unwrap());
        let s1 = example1();
        let prod = s1.product(&unit_square());
        assert_eq!(prod.dim(), 4);
        let sel = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let back = prod.linear_map(&sel).unwrap();
        for d in linalg::test_directions(2, 16, 4) {
            assert!((back.support(&d).unwrap() - s1.support(&d).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn support_grid_oracle() {
        // max x2 over the gap example's set, brute force over a parameter grid.
        let s = example1();
        let lp_value = s.support(&v(&[0.0, 1.0])).unwrap();
        let mut best = f64::NEG_INFINITY;
        let k = 21;
        for i in 0..k {
            for j in 0..k {
                for l in 0..k {
                    let t1 = -1.0 + 2.0 * i as f64 / (k - 1) as f64;
                    let t2 = -1.0 + 2.0 * j as f64 / (k - 1) as f64;
                    let t3 = -1.0 + 2.0 * l as f64 / (k - 1) as f64;
                    // Solve the constraint for θ4.
                    let t4 = 1.0 + t1 - t2 - 0.3 * t3;
                    if t4.abs() <= 1.0 {
                        best = best.max(t2 + 0.8 * t4);
                    }
                }
            }
        }
        assert!(best <= lp_value + 1e-9);
        assert!(lp_value - best < 1e-3, "lp {lp_value} grid {best}");
    }

    #[test]
    fn membership_basics() {
        let s = unit_square();
        assert!(s.contains_point(s.c()).unwrap());
        assert!(!s.contains_point(&v(&[1.5, 0.0])).unwrap());
        // Origin of the gap example: θ1=θ2=θ4=0 forces 0.3θ3 = 1, impossible; but
        // other parameter combinations may reach the origin.
        let e = example1();
        let lp = e.contains_point(&v(&[0.0, 0.0])).unwrap();
        // θ = (-0.5, 0.4, 0.1/0.3 ... ) hand witness: solve G θ = 0 with θ4 = t.
        let mut found = false;
        for i in 0..=200 {
            let t4 = -1.0 + i as f64 / 100.0;
            let t1 = -0.1 * t4;
            let t2 = -0.8 * t4;
            let t3 = (1.0 + t1 - t2 - t4) / 0.3;
            if t1.abs() <= 1.0 && t2.abs() <= 1.0 && t3.abs() <= 1.0 {
                found = true;
            }
        }
        assert_eq!(lp, found);
    }

    #[test]
    fn emptiness() {
        assert!(!unit_square().is_empty().unwrap());
        let e = ConstrainedZonotope::new(
            DMatrix::from_row_slice(1, 1, &[1.0]),
            v(&[0.0]),
            DMatrix::from_row_slice(1, 1, &[1.0]),
            v(&[2.0]),
        )
        .unwrap();
        assert!(e.is_empty().unwrap());
        assert!(e.support(&v(&[1.0])).is_err());
    }

    #[test]
    fn closure_of_zonotope_matches_lp_route() {
        let z = Zonotope::new(
            DMatrix::from_row_slice(2, 3, &[1.0, 0.5, -0.2, 0.3, -1.0, 0.7]),
            v(&[0.1, -0.4]),
        )
        .unwrap();
        let closed = z.interval_hull();
        // Same set with a vacuous constraint forces the LP route.
        let cz = z.to_cz();
        let lp_route = ConstrainedZonotope::new(
            cz.g().clone(),
            cz.c().clone(),
            DMatrix::zeros(1, 3),
            v(&[0.0]),
        )
        .unwrap()
        .interval_closure()
        .unwrap();
        assert!((closed.lower() - lp_route.lower()).amax() < 1e-7);
        assert!((closed.upper() - lp_route.upper()).amax() < 1e-7);
    }

    #[test]
    fn simplex_closure() {
        // Unit simplex {x ≥ 0, Σx ≤ 1} in 2-D: x = 0.5(1+θ1), y = 0.5(1+θ2),
        // slack 0.5(1+θ3)·... written as x + y + s = 1 with s ∈ [0,1].
        let g = DMatrix::from_row_slice(2, 3, &[0.5, 0.0, 0.0, 0.0, 0.5, 0.0]);
        let c = v(&[0.5, 0.5]);
        let a = DMatrix::from_row_slice(1, 3, &[0.5, 0.5, 0.5]);
        let b = v(&[1.0 - 1.5]);
        let s = ConstrainedZonotope::new(g, c, a, b).unwrap();
        let bx = s.interval_closure().unwrap();
        assert!((bx.lower() - v(&[0.0, 0.0])).amax() < 1e-9);
        assert!((bx.upper() - v(&[1.0, 1.0])).amax() < 1e-9);
    }

    #[test]
    fn example1_closure_brackets_members() {
        let s = example1();
        let bx = s.interval_closure().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for p in Sampler::new(&s).unwrap().points(10_000, &mut rng) {
            assert!(bx.contains(&p, 1e-9));
        }
    }

    #[test]
    fn json_field_names() {
        let s = example1();
        let j = serde_json::to_value(&s).unwrap();
        for key in ["G", "c", "A", "b"] {
            assert!(j.get(key).is_some());
        }
        let back: ConstrainedZonotope = serde_json::from_value(j).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"G":[[1,0]],"c":[0],"A":[[1]],"b":[0]}"#;
        assert!(serde_json::from_str::<ConstrainedZonotope>(bad).is_err());
        let unknown = r#"{"G":[[1]],"c":[0],"extra":1}"#;
        assert!(serde_json::from_str::<ConstrainedZonotope>(unknown).is_err());
    }

    #[test]
    fn compact_drops_dead_columns() {
        let s = ConstrainedZonotope::new(
            DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]),
            v(&[0.0]),
            DMatrix::from_row_slice(2, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]),
            v(&[0.5, 0.0]),
        )
        .unwrap();
        let c = s.compact();
        assert_eq!(c.num_generators(), 2);
        assert_eq!(c.num_constraints(), 1);
    }
}
