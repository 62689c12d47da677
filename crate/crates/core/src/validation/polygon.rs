//! Vertices and facets of planar constrained zonotopes, recovered from support
//! queries alone.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::sets::ConstrainedZonotope;

/// Tolerance deciding that a support query exposed no new vertex.
const EDGE_TOL: f64 = 1e-9;
const MAX_VERTICES: usize = 20_000;

/// A convex polygon with vertices in counter-clockwise order.
#[derive(Clone, Debug)]
pub struct Polygon {
    vertices: Vec<DVector<f64>>,
    /// Outward normals and offsets, `nᵀx ≤ d`, one per edge.
    facets: Vec<(DVector<f64>, f64)>,
}

impl Polygon {
    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    /// Point test with slack `tol`; degenerate polygons (segments, points)
    /// use the distance to the hull.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        match self.vertices.len() {
            1 => (x - &self.vertices[0]).norm() <= tol,
            2 => segment_distance(x, &self.vertices[0], &self.vertices[1]) <= tol,
            _ => self.facets.iter().all(|(n, d)| n.dot(x) <= d + tol),
        }
    }

    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        let k = v.len();
        if k < 3 {
            return 0.0;
        }
        0.5 * (0..k).map(|i| {
            let (p, q) = (&v[i], &v[(i + 1) % k]);
            p[0] * q[1] - q[0] * p[1]
        }).sum::<f64>()
    }

    pub fn support(&self, h: &DVector<f64>) -> f64 {
        self.vertices.iter().map(|v| h.dot(v)).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn segment_distance(x: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (x - a).norm();
    }
    let t = ((x - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (x - (a + ab * t)).norm()
}

fn support_point(s: &ConstrainedZonotope, h: &DVector<f64>) -> Result<DVector<f64>> {
    let theta = s
        .support_parameter(h)?
        .ok_or_else(|| Error::EmptySet("polygon of an empty set".into()))?;
    Ok(s.point_of(&theta))
}

/// Exact polygon of a 2-D constrained zonotope: support points are refined
/// between neighbours until every edge normal exposes nothing new.
pub fn polygon_2d(s: &ConstrainedZonotope) -> Result<Polygon> {
    if s.dim() != 2 {
        return Err(Error::dim(format!("polygon extraction needs a planar set, got dimension {}", s.dim())));
    }
    let scale = s.interval_closure()?.widths().amax().max(1e-12);
    let tol = EDGE_TOL * (1.0 + scale);
    let mut ring: Vec<DVector<f64>> = Vec::new();
    for k in 0..8 {
        let t = std::f64::consts::PI * k as f64 / 4.0;
        let p = support_point(s, &DVector::from_vec(vec![t.cos(), t.sin()]))?;
        if ring.last().map_or(true, |q: &DVector<f64>| (q - &p).norm() > tol) {
            ring.push(p);
        }
    }
    while ring.len() > 1 && (&ring[0] - ring.last().unwrap()).norm() <= tol {
        ring.pop();
    }
    if ring.len() >= 2 {
        let mut i = 0;
        while i < ring.len() {
            if ring.len() > MAX_VERTICES {
                return Err(Error::Numerical("polygon refinement did not settle".into()));
            }
            let a = ring[i].clone();
            let b = ring[(i + 1) % ring.len()].clone();
            let e = &b - &a;
            let normal = DVector::from_vec(vec![e[1], -e[0]]) / e.norm();
            let p = support_point(s, &normal)?;
            let gain = normal.dot(&p) - normal.dot(&a);
            if gain > tol && (&p - &a).norm() > tol && (&p - &b).norm() > tol {
                ring.insert(i + 1, p);
            } else {
                i += 1;
            }
        }
    }
    let facets = (0..ring.len())
        .filter_map(|i| {
            let a = &ring[i];
            let b = &ring[(i + 1) % ring.len()];
            let e = b - a;
            let len = e.norm();
            (len > 0.0).then(|| {
                let n = DVector::from_vec(vec![e[1], -e[0]]) / len;
                let d = n.dot(a);
                (n, d)
            })
        })
        .collect();
    Ok(Polygon { vertices: ring, facets })
}
