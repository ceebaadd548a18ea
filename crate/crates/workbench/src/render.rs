//! Plane drawings of tropical curves and their SVG output.

use std::fmt::Write;

use num_traits::{ToPrimitive, Zero};
use tropcount_core::Rational;

use crate::error::Failure;
use crate::problem::parse_rational;
use crate::result::CurveEntry;

/// A linear map `ℚⁿ → ℚ²`, given as two rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub rows: [Vec<Rational>; 2],
}

impl Projection {
    pub fn identity() -> Self {
        let one = Rational::from_integer(1.into());
        let zero = Rational::zero();
        Projection { rows: [vec![one.clone(), zero.clone()], vec![zero, one]] }
    }

    /// `a,b,c;d,e,f`.
    pub fn parse(text: &str, rank: usize) -> Result<Self, Failure> {
        let rows: Vec<Vec<Rational>> = text
            .split(';')
            .map(|row| row.split(',').map(parse_rational).collect::<Result<Vec<_>, _>>())
            .collect::<Result<_, _>>()?;
        if rows.len() != 2 || rows.iter().any(|r| r.len() != rank) {
            return Err(Failure::parse(format!("projection must be 2 rows of {rank} entries separated by ';'")));
        }
        let mut it = rows.into_iter();
        Ok(Projection { rows: [it.next().unwrap(), it.next().unwrap()] })
    }

    pub fn apply(&self, v: &[Rational]) -> [Rational; 2] {
        let dot = |row: &[Rational]| row.iter().zip(v).fold(Rational::zero(), |acc, (a, b)| acc + a * b);
        [dot(&self.rows[0]), dot(&self.rows[1])]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub from: usize,
    pub to: usize,
    /// Projected slope from `from` to `to`.
    pub direction: [Rational; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ray {
    pub vertex: usize,
    /// 0-based end index.
    pub end: usize,
    pub direction: [Rational; 2],
}

/// Exact combinatorial picture of one curve in the plane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneDrawing {
    pub vertices: Vec<[Rational; 2]>,
    pub segments: Vec<Segment>,
    pub rays: Vec<Ray>,
    /// Contracted ends: marked points sitting at a vertex.
    pub marked: Vec<(usize, usize)>,
}

impl PlaneDrawing {
    pub fn from_curve(curve: &CurveEntry, degrees: &[Vec<i64>], projection: &Projection) -> Result<Self, Failure> {
        let to_q = |v: &[i64]| -> Vec<Rational> { v.iter().map(|&x| Rational::from_integer(x.into())).collect() };
        let vertices = curve
            .positions
            .iter()
            .map(|p| {
                let p = p.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?;
                Ok(projection.apply(&p))
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        let segments = curve
            .tree
            .edges
            .iter()
            .zip(&curve.slopes)
            .map(|(&[from, to], slope)| Segment { from, to, direction: projection.apply(&to_q(slope)) })
            .collect();
        let mut rays = Vec::new();
        let mut marked = Vec::new();
        for (end, (&vertex, degree)) in curve.tree.ends.iter().zip(degrees).enumerate() {
            let direction = projection.apply(&to_q(degree));
            if direction.iter().all(Zero::is_zero) {
                marked.push((end, vertex));
            } else {
                rays.push(Ray { vertex, end, direction });
            }
        }
        Ok(PlaneDrawing { vertices, segments, rays, marked })
    }

    pub fn to_svg(&self, bbox: [f64; 4]) -> String {
        let [xmin, ymin, xmax, ymax] = bbox;
        let scale = 480.0 / (xmax - xmin).max(ymax - ymin);
        let pad = 10.0;
        let width = (xmax - xmin) * scale + 2.0 * pad;
        let height = (ymax - ymin) * scale + 2.0 * pad;
        let px = |x: f64, y: f64| (pad + (x - xmin) * scale, pad + (ymax - y) * scale);
        let f = |q: &Rational| q.to_f64().unwrap_or(f64::NAN);
        let pt = |v: &[Rational; 2]| (f(&v[0]), f(&v[1]));

        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.2}\" height=\"{height:.2}\" viewBox=\"0 0 {width:.2} {height:.2}\">"
        );
        let _ = writeln!(out, "<rect x=\"0\" y=\"0\" width=\"{width:.2}\" height=\"{height:.2}\" fill=\"white\"/>");
        out.push_str("<g stroke=\"black\" stroke-width=\"2\" stroke-linecap=\"round\">\n");
        for s in &self.segments {
            let (a, b) = (pt(&self.vertices[s.from]), pt(&self.vertices[s.to]));
            if let Some((p, q)) = clip(a, (b.0 - a.0, b.1 - a.1), 0.0, 1.0, bbox) {
                let ((x1, y1), (x2, y2)) = (px(p.0, p.1), px(q.0, q.1));
                let _ = writeln!(out, "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\"/>");
            }
        }
        let mut labels = String::new();
        for r in &self.rays {
            let a = pt(&self.vertices[r.vertex]);
            let d = pt(&r.direction);
            if let Some((p, q)) = clip(a, d, 0.0, f64::INFINITY, bbox) {
                let ((x1, y1), (x2, y2)) = (px(p.0, p.1), px(q.0, q.1));
                let _ = writeln!(out, "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"#555\"/>");
                let _ = writeln!(
                    labels,
                    "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" font-family=\"sans-serif\">{}</text>",
                    (x2 + 3.0).min(width - 12.0),
                    (y2 - 3.0).max(12.0),
                    r.end + 1
                );
            }
        }
        out.push_str("</g>\n<g fill=\"black\">\n");
        for v in &self.vertices {
            let (x, y) = pt(v);
            if inside((x, y), bbox) {
                let (cx, cy) = px(x, y);
                let _ = writeln!(out, "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"3\"/>");
            }
        }
        out.push_str("</g>\n<g fill=\"none\" stroke=\"#c00\" stroke-width=\"1.5\">\n");
        for &(end, vertex) in &self.marked {
            let (x, y) = pt(&self.vertices[vertex]);
            if inside((x, y), bbox) {
                let (cx, cy) = px(x, y);
                let _ = writeln!(out, "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"6\"/>");
                let _ = writeln!(
                    labels,
                    "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" font-family=\"sans-serif\" fill=\"#c00\">{}</text>",
                    cx + 7.0,
                    cy - 7.0,
                    end + 1
                );
            }
        }
        out.push_str("</g>\n");
        out.push_str(&labels);
        out.push_str("</svg>\n");
        out
    }
}

fn inside(p: (f64, f64), [xmin, ymin, xmax, ymax]: [f64; 4]) -> bool {
    (xmin..=xmax).contains(&p.0) && (ymin..=ymax).contains(&p.1)
}

/// Liang–Barsky: the part of `a + s·d`, `s ∈ [lo, hi]`, inside the box.
fn clip(a: (f64, f64), d: (f64, f64), lo: f64, hi: f64, [xmin, ymin, xmax, ymax]: [f64; 4]) -> Option<((f64, f64), (f64, f64))> {
    let (mut s0, mut s1) = (lo, hi);
    for (p, q) in [(-d.0, a.0 - xmin), (d.0, xmax - a.0), (-d.1, a.1 - ymin), (d.1, ymax - a.1)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let s = q / p;
            if p < 0.0 {
                s0 = s0.max(s);
            } else {
                s1 = s1.min(s);
            }
        }
    }
    if s0 > s1 || !s1.is_finite() {
        return None;
    }
    Some(((a.0 + s0 * d.0, a.1 + s0 * d.1), (a.0 + s1 * d.0, a.1 + s1 * d.1)))
}

pub fn parse_bbox(text: &str) -> Result<[f64; 4], Failure> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::parse(format!("bbox must be xmin,ymin,xmax,ymax, got {text:?}")))?;
    match values[..] {
        [xmin, ymin, xmax, ymax] if xmin < xmax && ymin < ymax && values.iter().all(|v| v.is_finite()) => {
            Ok([xmin, ymin, xmax, ymax])
        }
        _ => Err(Failure::parse(format!("bbox must be xmin,ymin,xmax,ymax with min < max, got {text:?}"))),
    }
}
