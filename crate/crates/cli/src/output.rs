//! File writers: JSON documents, point CSVs and SVG projections. Everything
//! is formatted deterministically (no timings, no maps with random order).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use czreach::sets::Hyperbox;
use nalgebra::DVector;
use serde::Serialize;

use crate::failure::Failure;

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(path).map_err(|e| Failure::runtime(format!("cannot create {}: {e}", path.display())))?;
        Ok(OutDir(path.to_path_buf()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        let p = self.path(name);
        fs::write(&p, contents).map_err(|e| Failure::runtime(format!("cannot write {}: {e}", p.display())))
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), Failure> {
        let mut s = serde_json::to_string_pretty(value).map_err(Failure::runtime)?;
        s.push('\n');
        self.write(name, &s)
    }
}

/// One CSV row per point, prefixed by integer labels.
pub fn points_csv(label_names: &[&str], n: usize, rows: &[(Vec<usize>, DVector<f64>)]) -> String {
    let mut s = label_names.join(",");
    for i in 1..=n {
        let _ = write!(s, ",x{i}");
    }
    s.push('\n');
    for (labels, x) in rows {
        let mut first = true;
        for l in labels {
            if !first {
                s.push(',');
            }
            first = false;
            let _ = write!(s, "{l}");
        }
        for v in x.iter() {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// A layer of the plot: rectangles and points in one colour.
pub struct Layer {
    pub label: String,
    pub color: String,
    pub rects: Vec<Hyperbox>,
    pub points: Vec<DVector<f64>>,
}

const SIZE: f64 = 640.0;
const MARGIN: f64 = 48.0;

/// Projection onto axes `(i, j)`: interval-closure rectangles and point
/// clouds, later layers on top.
pub fn svg(layers: &[Layer], i: usize, j: usize) -> String {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    let mut grow = |x: f64, y: f64| {
        lo = [lo[0].min(x), lo[1].min(y)];
        hi = [hi[0].max(x), hi[1].max(y)];
    };
    for l in layers {
        for r in &l.rects {
            grow(r.lower()[i], r.lower()[j]);
            grow(r.upper()[i], r.upper()[j]);
        }
        for p in &l.points {
            grow(p[i], p[j]);
        }
    }
    if !lo[0].is_finite() {
        lo = [-1.0, -1.0];
        hi = [1.0, 1.0];
    }
    for k in 0..2 {
        let pad = 0.05 * (hi[k] - lo[k]).max(1e-9);
        lo[k] -= pad;
        hi[k] += pad;
    }
    let span = SIZE - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + (x - lo[0]) / (hi[0] - lo[0]) * span;
    let sy = |y: f64| SIZE - MARGIN - (y - lo[1]) / (hi[1] - lo[1]) * span;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{span}" height="{span}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">x{}</text>"#,
        SIZE / 2.0,
        SIZE - 12.0,
        i + 1
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.1})">x{}</text>"#,
        SIZE / 2.0,
        SIZE / 2.0,
        j + 1
    );
    for (k, (a, b)) in [(lo[0], lo[1]), (hi[0], hi[1])].iter().enumerate() {
        let anchor = if k == 0 { "start" } else { "end" };
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="{anchor}">{a:.4}</text>"#,
            sx(*a),
            SIZE - MARGIN + 14.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{b:.4}</text>"#,
            MARGIN - 4.0,
            sy(*b) + 4.0
        );
    }
    for l in layers {
        let _ = writeln!(s, r#"<g id="{}" stroke="{}" fill="{}">"#, l.label, l.color, l.color);
        for r in &l.rects {
            let (x0, x1) = (sx(r.lower()[i]), sx(r.upper()[i]));
            let (y0, y1) = (sy(r.upper()[j]), sy(r.lower()[j]));
            let _ = writeln!(
                s,
                r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke-width="1" stroke-opacity="0.6"/>"#,
                x1 - x0,
                y1 - y0
            );
        }
        for p in &l.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.2" stroke="none" fill-opacity="0.6"/>"#, sx(p[i]), sy(p[j]));
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

/// Blue at `t = 0` to orange at `t = 1`.
pub fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let mix = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(31.0, 230.0), mix(119.0, 126.0), mix(180.0, 34.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let rows = vec![(vec![0, 1], DVector::from_vec(vec![0.5, -2.0]))];
        assert_eq!(points_csv(&["step", "piece"], 2, &rows), "step,piece,x1,x2\n0,1,0.5,-2\n");
    }

    #[test]
    fn svg_maps_boxes_inside_the_frame() {
        let layer = Layer {
            label: "a".into(),
            color: ramp(0.5),
            rects: vec![Hyperbox::from_slices(&[0.0, 0.0, 5.0], &[1.0, 2.0, 6.0]).unwrap()],
            points: vec![DVector::from_vec(vec![0.5, 1.0, 5.5])],
        };
        let s = svg(&[layer], 0, 1);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<circle").count(), 1);
        assert_eq!(s.matches("<rect").count(), 3);
        assert!(s.contains(r#"cx="320.00" cy="320.00""#));
    }

    #[test]
    fn ramp_ends() {
        assert_eq!(ramp(0.0), "#1f77b4");
        assert_eq!(ramp(2.0), "#e67e22");
    }
}
