//! CSV, SVG and JSON renderings of a traced locus.

use std::fmt::{Display, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::locus::{Locus, LocusPoint};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("the locus has no finite points")]
    EmptyLocus,
}

/// Shortest representation that parses back to the same value; `-0` is
/// written as `0`.
fn num<T: Real + Display>(v: T) -> String {
    if v == T::zero() {
        "0".to_string()
    } else {
        v.to_string()
    }
}

/// `x,y,re_t,im_t` rows, arcs separated by one blank line, points at
/// infinity as comment rows.
pub fn emit_csv<T: Real + Display>(locus: &Locus<T>) -> String {
    let mut out = String::from("x,y,re_t,im_t\n");
    let mut first = true;
    for arc in locus.arcs.iter().filter(|a| !a.is_empty()) {
        if !first {
            out.push('\n');
        }
        first = false;
        for p in arc {
            match p.affine() {
                Some((x, y)) => {
                    let t = p.t();
                    let _ = writeln!(out, "{},{},{},{}", num(x), num(y), num(t.re), num(t.im));
                }
                None => {
                    let [x, y, z] = p.coords;
                    let _ = writeln!(out, "# infinity: {}:{}:{}", num(x), num(y), num(z));
                }
            }
        }
    }
    out
}

/// One polyline per finite run of the locus, fitted into a `width × height`
/// canvas with the y-axis pointing up.
pub fn emit_svg<T: Real>(
    locus: &Locus<T>,
    width: f64,
    height: f64,
    margin_fraction: f64,
) -> Result<String, EmitError> {
    let runs: Vec<Vec<(f64, f64)>> = locus
        .polylines()
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|(x, y)| (x.to_f64_lossy(), y.to_f64_lossy()))
                .collect()
        })
        .collect();
    let mut pts = runs.iter().flatten();
    let Some(&(x0, y0)) = pts.next() else {
        return Err(EmitError::EmptyLocus);
    };
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (x0, x0, y0, y0);
    for &(x, y) in pts {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let span = (xmax - xmin).max(ymax - ymin);
    let pad = if span > 0.0 {
        span * margin_fraction
    } else {
        1.0
    };
    let (xmin, xmax, ymin, ymax) = (xmin - pad, xmax + pad, ymin - pad, ymax + pad);
    let scale = (width / (xmax - xmin)).min(height / (ymax - ymin));
    let ox = (width - (xmax - xmin) * scale) / 2.0;
    let oy = (height - (ymax - ymin) * scale) / 2.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for run in &runs {
        let coords: Vec<String> = run
            .iter()
            .map(|&(x, y)| {
                format!(
                    "{:.4},{:.4}",
                    ox + (x - xmin) * scale,
                    oy + (ymax - y) * scale
                )
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="gray" stroke-width="1.5" stroke-linejoin="round" points="{}"/>"#,
            coords.join(" ")
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonMetadata {
    pub variant: String,
    pub eps: f64,
    pub detour_steps: usize,
    pub orientation: String,
    pub reversal_count: usize,
    pub detours_used: usize,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonInfinitePoint {
    /// Index of the arc the point ends.
    pub arc: usize,
    pub coords: [f64; 3],
    pub t: [Option<f64>; 2],
}

/// Serialized form of a locus. Finite points are `[x, y, re_t, im_t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonLocus {
    pub metadata: JsonMetadata,
    pub arcs: Vec<Vec<[f64; 4]>>,
    pub infinite_points: Vec<JsonInfinitePoint>,
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl JsonLocus {
    pub fn from_locus<T: Real>(locus: &Locus<T>) -> Self {
        let m = &locus.metadata;
        let mut arcs = Vec::new();
        let mut infinite_points = Vec::new();
        for (i, arc) in locus.arcs.iter().enumerate() {
            let mut rows = Vec::new();
            for p in arc {
                let t = p.t();
                match p.affine() {
                    Some((x, y)) => rows.push([x, y, t.re, t.im].map(Real::to_f64_lossy)),
                    None => infinite_points.push(JsonInfinitePoint {
                        arc: i,
                        coords: p.coords.map(Real::to_f64_lossy),
                        t: [
                            finite_or_none(t.re.to_f64_lossy()),
                            finite_or_none(t.im.to_f64_lossy()),
                        ],
                    }),
                }
            }
            arcs.push(rows);
        }
        JsonLocus {
            metadata: JsonMetadata {
                variant: m.variant.to_string(),
                eps: m.eps.to_f64_lossy(),
                detour_steps: m.detour_steps,
                orientation: m.orientation.to_string(),
                reversal_count: m.reversal_count,
                detours_used: m.detours_used,
                closed: m.closed,
            },
            arcs,
            infinite_points,
        }
    }
}

pub fn emit_json<T: Real>(locus: &Locus<T>) -> String {
    serde_json::to_string_pretty(&JsonLocus::from_locus(locus)).expect("plain data serializes")
        + "\n"
}

/// Parses the numeric rows of CSV output back into points, one vector per
/// arc.
pub fn parse_csv_rows(text: &str) -> Vec<Vec<[f64; 4]>> {
    let mut arcs = vec![Vec::new()];
    for line in text.lines().skip(1) {
        if line.is_empty() {
            arcs.push(Vec::new());
        } else if !line.starts_with('#') {
            let v: Vec<f64> = line
                .split(',')
                .map(|f| f.parse().expect("numeric field"))
                .collect();
            arcs.last_mut().unwrap().push([v[0], v[1], v[2], v[3]]);
        }
    }
    arcs
}

/// Finite points of the locus as `[x, y, re_t, im_t]`.
pub fn rows<T: Real>(locus: &Locus<T>) -> Vec<[T; 4]> {
    locus
        .points()
        .filter_map(|p: &LocusPoint<T>| {
            let (x, y) = p.affine()?;
            let t = p.t();
            Some([x, y, t.re, t.im])
        })
        .collect()
}
