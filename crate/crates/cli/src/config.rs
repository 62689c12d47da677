//! Config documents and their conversion into core types. Structural problems
//! (unknown keys, wrong JSON types) are caught by serde; shapes and dimensions
//! are checked here so that every complaint names the offending field.

use std::path::Path;

use czreach::acceptance::Tolerances;
use czreach::brs::Method;
use czreach::sets::{ConstrainedZonotope, HPolytope, Hyperbox, SafeSet, Zonotope};
use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::failure::Failure;

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::schema("", format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        Failure::schema(path, e.into_inner().to_string())
    })
}

/// Dense row-major matrix with every row `width` long (the first row's
/// length when `None`).
pub fn matrix(rows: &[Vec<f64>], width: Option<usize>, path: &str) -> Result<DMatrix<f64>, Failure> {
    let w = width.unwrap_or_else(|| rows.first().map_or(0, Vec::len));
    for (i, r) in rows.iter().enumerate() {
        if r.len() != w {
            return Err(Failure::schema(
                format!("{path}[{i}]"),
                format!("row has {} entries, expected {w}", r.len()),
            ));
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(Failure::schema(format!("{path}[{i}][{j}]"), "entry is not finite"));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), w, |i, j| rows[i][j]))
}

pub fn vector(v: &[f64], len: Option<usize>, path: &str) -> Result<DVector<f64>, Failure> {
    if let Some(n) = len {
        if v.len() != n {
            return Err(Failure::schema(path, format!("has {} entries, expected {n}", v.len())));
        }
    }
    if let Some(j) = v.iter().position(|x| !x.is_finite()) {
        return Err(Failure::schema(format!("{path}[{j}]"), "entry is not finite"));
    }
    Ok(DVector::from_column_slice(v))
}

/// A set literal: either `{G, c, A?, b?}` or a box `{lower, upper}`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetDoc {
    #[serde(rename = "G")]
    pub g: Option<Vec<Vec<f64>>>,
    pub c: Option<Vec<f64>>,
    #[serde(rename = "A")]
    pub a: Option<Vec<Vec<f64>>>,
    pub b: Option<Vec<f64>>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

pub enum SetLiteral {
    Box(Hyperbox),
    Cz(ConstrainedZonotope),
}

impl SetLiteral {
    pub fn to_cz(&self) -> ConstrainedZonotope {
        match self {
            SetLiteral::Box(b) => b.to_cz(),
            SetLiteral::Cz(z) => z.clone(),
        }
    }
}

impl SetDoc {
    pub fn literal(&self, path: &str) -> Result<SetLiteral, Failure> {
        let boxed = self.lower.is_some() || self.upper.is_some();
        let zono = self.g.is_some() || self.c.is_some() || self.a.is_some() || self.b.is_some();
        if boxed && zono {
            return Err(Failure::schema(path, "give either {lower, upper} or {G, c, A, b}, not both"));
        }
        if boxed {
            let lo = self.lower.as_deref().ok_or_else(|| Failure::schema(format!("{path}.lower"), "missing"))?;
            let hi = self.upper.as_deref().ok_or_else(|| Failure::schema(format!("{path}.upper"), "missing"))?;
            let lo = vector(lo, None, &format!("{path}.lower"))?;
            let hi = vector(hi, Some(lo.len()), &format!("{path}.upper"))?;
            return Hyperbox::new(lo, hi)
                .map(SetLiteral::Box)
                .map_err(|e| Failure::schema(path, e.to_string()));
        }
        let g = self.g.as_deref().ok_or_else(|| Failure::schema(format!("{path}.G"), "missing"))?;
        let c = self.c.as_deref().ok_or_else(|| Failure::schema(format!("{path}.c"), "missing"))?;
        let c = vector(c, None, &format!("{path}.c"))?;
        let g = if g.is_empty() {
            DMatrix::zeros(c.len(), 0)
        } else {
            matrix(g, None, &format!("{path}.G"))?
        };
        if g.nrows() != c.len() {
            return Err(Failure::schema(
                format!("{path}.c"),
                format!("has {} entries but G has {} rows", c.len(), g.nrows()),
            ));
        }
        let a = matrix(self.a.as_deref().unwrap_or(&[]), Some(g.ncols()), &format!("{path}.A"))?;
        let b = vector(self.b.as_deref().unwrap_or(&[]), Some(a.nrows()), &format!("{path}.b"))?;
        ConstrainedZonotope::new(g, c, a, b)
            .map(SetLiteral::Cz)
            .map_err(|e| Failure::schema(path, e.to_string()))
    }

    pub fn zonotope(&self, path: &str) -> Result<Zonotope, Failure> {
        if self.a.as_ref().is_some_and(|a| !a.is_empty()) || self.b.as_ref().is_some_and(|b| !b.is_empty()) {
            return Err(Failure::schema(format!("{path}.A"), "must be a zonotope (no equality constraints)"));
        }
        match self.literal(path)? {
            SetLiteral::Box(b) => Ok(b.to_zonotope()),
            SetLiteral::Cz(z) => Ok(z.drop_constraints()),
        }
    }
}

/// `{x | Hx ≤ a}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfDoc {
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
    pub a: Vec<f64>,
}

impl HalfDoc {
    pub fn polytope(&self, dim: Option<usize>, path: &str) -> Result<HPolytope, Failure> {
        let h = matrix(&self.h, dim, &format!("{path}.H"))?;
        let a = vector(&self.a, Some(h.nrows()), &format!("{path}.a"))?;
        HPolytope::new(h, a).map_err(|e| Failure::schema(path, e.to_string()))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearDoc {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReachConfig {
    /// A builtin model name ...
    pub model: Option<String>,
    /// ... or explicit `x⁺ = A x + B u`.
    pub linear: Option<LinearDoc>,
    pub target: SetDoc,
    pub inputs: SetDoc,
    pub disturbance: SetDoc,
    /// Union of polytopes; the whole space when absent.
    pub safe: Option<Vec<HalfDoc>>,
    pub horizon: usize,
    pub method: Method,
    pub alpha: Option<f64>,
    pub l_bar: Option<Vec<f64>>,
    pub max_branches: Option<usize>,
    pub max_scale_iters: Option<usize>,
    pub max_split_depth: Option<usize>,
    /// Sampled points per step written to `points.csv`.
    #[serde(default = "default_samples")]
    pub samples_per_step: usize,
    /// Monte-Carlo samples for the final-step volume; planar runs default
    /// to 100000, higher dimensions skip it unless asked.
    pub volume_samples: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub emit_svg: bool,
    /// 1-based state indices of the projection.
    pub plot_axes: Option<[usize; 2]>,
    pub out: Option<String>,
}

fn default_samples() -> usize {
    200
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchDoc {
    pub instances: usize,
    #[serde(default = "default_diff_samples")]
    pub diff_samples: usize,
    #[serde(default = "default_sub_samples")]
    pub sub_samples: usize,
    #[serde(default = "default_lp_pairs")]
    pub lp_pairs: usize,
}

fn default_diff_samples() -> usize {
    1000
}
fn default_sub_samples() -> usize {
    100
}
fn default_lp_pairs() -> usize {
    10
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinkdiffConfig {
    /// CZ or box minuend.
    pub minuend: Option<SetDoc>,
    /// Polytope minuend.
    pub minuend_hrep: Option<HalfDoc>,
    pub subtrahend: Option<SetDoc>,
    /// Fixed shrink factors instead of a subtrahend: the difference is then
    /// taken with `⟨G diag(σ̄), c_s, A diag(σ̄), 0⟩`.
    pub sigma_bar: Option<Vec<f64>>,
    pub c_s: Option<Vec<f64>>,
    #[serde(default)]
    pub ensure_nonempty: bool,
    #[serde(default = "default_directions")]
    pub directions: usize,
    /// Grid resolution of the planar oracle.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Difference samples checked against the minuend.
    #[serde(default = "default_check_samples")]
    pub samples: usize,
    pub batch: Option<BatchDoc>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub emit_svg: bool,
    pub plot_axes: Option<[usize; 2]>,
    pub out: Option<String>,
}

fn default_directions() -> usize {
    64
}
fn default_resolution() -> usize {
    200
}
fn default_check_samples() -> usize {
    200
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub tolerances: Tolerances,
    /// Criterion ids to run; all when empty.
    pub only: Vec<usize>,
    pub seed: Option<u64>,
    pub out: Option<String>,
}

pub fn safe_set(docs: Option<&[HalfDoc]>, n: usize) -> Result<SafeSet, Failure> {
    let Some(docs) = docs else {
        return Ok(SafeSet::everything(n));
    };
    let pieces = docs
        .iter()
        .enumerate()
        .map(|(i, d)| d.polytope(Some(n), &format!("safe[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    SafeSet::new(pieces).map_err(|e| Failure::schema("safe", e.to_string()))
}

/// 0-based projection axes from the 1-based config value.
pub fn axes(v: Option<[usize; 2]>, n: usize, path: &str) -> Result<(usize, usize), Failure> {
    let [i, j] = v.unwrap_or([1, 2]);
    if n < 2 {
        return Err(Failure::schema(path, "plots need at least two state dimensions"));
    }
    if i == 0 || j == 0 || i > n || j > n || i == j {
        return Err(Failure::schema(path, format!("need two distinct axes in 1..={n}, got [{i}, {j}]")));
    }
    Ok((i - 1, j - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(v: serde_json::Value) -> SetDoc {
        serde_json::from_value(v).unwrap()
    }

    fn path_of(f: Failure) -> String {
        match f {
            Failure::Schema { path, .. } => path,
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn literal_rebuilds_the_set(n in 1usize..4, k in 0usize..5, m in 0usize..3, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut mat = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.gen_range(-2.0..2.0));
            let m = if k == 0 { 0 } else { m };
            let cz = ConstrainedZonotope::new(mat(n, k), mat(n, 1).column(0).into(), mat(m, k), mat(m, 1).column(0).into()).unwrap();
            let d: SetDoc = serde_json::from_str(&serde_json::to_string(&cz).unwrap()).unwrap();
            match d.literal("s").unwrap() {
                SetLiteral::Cz(back) => prop_assert_eq!(back, cz),
                SetLiteral::Box(_) => prop_assert!(false),
            }
        }
    }

    #[test]
    fn boxes_and_zonotopes() {
        let b = doc(serde_json::json!({"lower": [0.0, 1.0], "upper": [1.0, 3.0]}));
        let z = b.zonotope("w").unwrap();
        assert_eq!(z.interval_hull(), Hyperbox::from_slices(&[0.0, 1.0], &[1.0, 3.0]).unwrap());
        let c = doc(serde_json::json!({"G": [[1.0]], "c": [0.0], "A": [[1.0]], "b": [0.5]}));
        assert_eq!(path_of(c.zonotope("w").err().unwrap()), "w.A");
    }

    #[test]
    fn shape_errors_carry_paths() {
        let cases = [
            (serde_json::json!({"lower": [0.0], "upper": [1.0, 2.0]}), "s.upper"),
            (serde_json::json!({"lower": [2.0], "upper": [1.0]}), "s"),
            (serde_json::json!({"G": [[1.0, 0.0]], "c": [0.0, 0.0]}), "s.c"),
            (serde_json::json!({"G": [[1.0, 0.0]], "c": [0.0], "b": [1.0]}), "s.b"),
            (serde_json::json!({"c": [0.0]}), "s.G"),
            (serde_json::json!({"G": [[1.0]], "c": [0.0], "lower": [0.0]}), "s"),
        ];
        for (v, want) in cases {
            assert_eq!(path_of(doc(v).literal("s").err().unwrap()), want);
        }
    }

    #[test]
    fn plot_axes_are_one_based() {
        assert_eq!(axes(None, 3, "p").unwrap(), (0, 1));
        assert_eq!(axes(Some([3, 1]), 3, "p").unwrap(), (2, 0));
        for bad in [[0, 1], [1, 1], [1, 4]] {
            assert!(axes(Some(bad), 3, "p").is_err());
        }
    }
}
