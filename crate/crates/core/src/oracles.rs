//! Independent checks for traced loci: implicit curve residuals, conic
//! fitting, a direct linkage simulation, Hausdorff distance and angles.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix6, SVD};
use thiserror::Error;

use crate::locus::Locus;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("degenerate configuration: kernel has dimension {kernel_dim}")]
    DegenerateConfiguration { kernel_dim: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("at least 8 samples are required, got {0}")]
    TooFewSamples(usize),
}

/// Real bivariate polynomial, keyed by exponents of `x` and `y`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<(u32, u32), f64>,
}

impl Poly {
    pub fn constant(c: f64) -> Self {
        Poly::monomial(c, 0, 0)
    }

    pub fn monomial(c: f64, i: u32, j: u32) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0.0 {
            terms.insert((i, j), c);
        }
        Poly { terms }
    }

    pub fn x() -> Self {
        Poly::monomial(1.0, 1, 0)
    }

    pub fn y() -> Self {
        Poly::monomial(1.0, 0, 1)
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Poly::constant(1.0), |acc, _| &acc * self)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn coefficient(&self, i: u32, j: u32) -> f64 {
        self.terms.get(&(i, j)).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| c * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let mut g = (0.0, 0.0);
        for (&(i, j), c) in &self.terms {
            if i > 0 {
                g.0 += c * i as f64 * x.powi(i as i32 - 1) * y.powi(j as i32);
            }
            if j > 0 {
                g.1 += c * j as f64 * x.powi(i as i32) * y.powi(j as i32 - 1);
            }
        }
        g
    }

    fn add_term(&mut self, key: (u32, u32), c: f64) {
        let v = self.terms.entry(key).or_insert(0.0);
        *v += c;
        if *v == 0.0 {
            self.terms.remove(&key);
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (&k, &c) in &rhs.terms {
            out.add_term(k, c);
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(&k, &c)| (k, -c)).collect(),
        }
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::default();
        for (&(i, j), &a) in &self.terms {
            for (&(k, l), &b) in &rhs.terms {
                out.add_term((i + k, j + l), a * b);
            }
        }
        out
    }
}

impl Mul<f64> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: f64) -> Poly {
        self * &Poly::constant(rhs)
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly { (&self).$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Mul<f64> for Poly {
    type Output = Poly;
    fn mul(self, rhs: f64) -> Poly {
        &self * rhs
    }
}

/// A named plane curve `f(x, y) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitCurve {
    pub name: String,
    pub parameters: Vec<f64>,
    pub poly: Poly,
}

impl ImplicitCurve {
    pub fn new(name: impl Into<String>, parameters: Vec<f64>, poly: Poly) -> Self {
        ImplicitCurve {
            name: name.into(),
            parameters,
            poly,
        }
    }

    /// The line `x = 2`, squared.
    pub fn projline() -> Self {
        let f = Poly::x() - Poly::constant(2.0);
        ImplicitCurve::new("projline", vec![], f.pow(2))
    }

    /// Conchoid with pole at the origin, base line `y = -a` and distance `b`.
    pub fn conchoid(a: f64, b: f64) -> Self {
        let (x, y) = (Poly::x(), Poly::y());
        let f = (&y + &Poly::constant(a)).pow(2) * (x.pow(2) + y.pow(2)) - y.pow(2) * (b * b);
        ImplicitCurve::new("conchoid", vec![a, b], f)
    }

    /// Watt curve of the linkage with fixed pivots `(±a, 0)`, arms `b` and
    /// coupler `2c`.
    pub fn watt(a: f64, b: f64, c: f64) -> Self {
        let r2 = Poly::x().pow(2) + Poly::y().pow(2);
        let f = &r2 * &(&r2 - &Poly::constant(a * a + b * b - c * c)).pow(2)
            + Poly::y().pow(2) * (&r2 - &Poly::constant(b * b)) * (4.0 * a * a);
        ImplicitCurve::new("watt", vec![a, b, c], f)
    }

    /// Coupler midpoint curve of the four-bar linkage with bars 4, 1, 4, 2.
    pub fn fourbar_sextic() -> Self {
        let (x, y) = (Poly::x(), Poly::y());
        let lead = Poly::constant(6.0) + &x * 5.0 - x.pow(3) * 2.0;
        let inner =
            Poly::constant(-45.0) + &x * &(Poly::constant(-2.0) + &x * 2.0 + x.pow(3)) * 4.0;
        let f = lead.pow(2)
            + &inner * &y.pow(2) * 3.0
            + (Poly::constant(11.0) + x.pow(2) * 3.0) * y.pow(4) * 4.0
            + y.pow(6) * 4.0;
        ImplicitCurve::new("fourbar-sextic", vec![], f)
    }

    /// Conic with coefficients of `x², xy, y², x, y, 1`.
    pub fn conic(c: [f64; 6]) -> Self {
        let f = [(2, 0), (1, 1), (0, 2), (1, 0), (0, 1), (0, 0)]
            .iter()
            .zip(c)
            .fold(Poly::default(), |acc, (&(i, j), k)| {
                acc + Poly::monomial(k, i, j)
            });
        ImplicitCurve::new("conic", c.to_vec(), f)
    }

    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        self.poly.eval(x, y)
    }

    pub fn natural_scale(&self, x: f64, y: f64) -> f64 {
        let (gx, gy) = self.poly.gradient(x, y);
        gx.hypot(gy) + 1.0
    }

    pub fn normalized_residual(&self, x: f64, y: f64) -> f64 {
        self.evaluate(x, y).abs() / self.natural_scale(x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub max: f64,
    pub evaluated: usize,
    pub infinite_skipped: usize,
}

pub fn residual_points(curve: &ImplicitCurve, points: &[(f64, f64)]) -> f64 {
    points
        .iter()
        .map(|&(x, y)| curve.normalized_residual(x, y))
        .fold(0.0, f64::max)
}

/// Largest normalized residual over the finite points of a locus.
pub fn residual_implicit(curve: &ImplicitCurve, locus: &Locus<f64>) -> ResidualReport {
    let finite = locus.finite_points();
    ResidualReport {
        max: residual_points(curve, &finite),
        evaluated: finite.len(),
        infinite_skipped: locus.len() - finite.len(),
    }
}

/// Unit-norm coefficients of the conic through five points, first nonzero
/// coefficient positive.
pub fn conic_through_five(p: &[(f64, f64); 5]) -> Result<[f64; 6], OracleError> {
    let mut m = Matrix6::zeros();
    for (r, &(x, y)) in p.iter().enumerate() {
        let row = [x * x, x * y, y * y, x, y, 1.0];
        for (k, v) in row.into_iter().enumerate() {
            m[(r, k)] = v;
        }
    }
    let svd = SVD::new(m, false, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let tol = 1e-10 * smax.max(1.0);
    let kernel_dim = sv.iter().filter(|&&v| v <= tol).count();
    if kernel_dim != 1 {
        return Err(OracleError::DegenerateConfiguration { kernel_dim });
    }
    let k = sv.imin();
    let vt = svd.v_t.expect("requested");
    let mut c = [0.0; 6];
    for (j, v) in c.iter_mut().enumerate() {
        *v = vt[(k, j)];
    }
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    let lead = c.iter().copied().find(|v| v.abs() > 1e-12).unwrap_or(1.0);
    let sign = if lead < 0.0 { -1.0 } else { 1.0 };
    for v in &mut c {
        *v *= sign / norm;
    }
    Ok(c)
}

/// Symmetric Hausdorff distance, brute force.
pub fn hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    directed(a, b).max(directed(b, a))
}

fn directed(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.iter()
        .map(|p| {
            b.iter()
                .map(|q| (p.0 - q.0).hypot(p.1 - q.1))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Bar lengths of a four-bar linkage; the ground bar lies on the x-axis
/// centred at the origin with the crank at `(-ground/2, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linkage {
    pub ground: f64,
    pub crank: f64,
    pub coupler: f64,
    pub rocker: f64,
}

/// Coupler midpoints over `n` crank angles evenly spaced in `[0, 2π)`.
pub fn linkage_oracle(l: &Linkage, n: usize) -> Result<Vec<(f64, f64)>, OracleError> {
    if n < 8 {
        return Err(OracleError::TooFewSamples(n));
    }
    let a = l.ground / 2.0;
    let mut out = Vec::new();
    for k in 0..n {
        let th = std::f64::consts::TAU * k as f64 / n as f64;
        let c = (-a + l.crank * th.cos(), l.crank * th.sin());
        for d in circle_pair((a, 0.0), l.rocker, c, l.coupler) {
            out.push(((c.0 + d.0) / 2.0, (c.1 + d.1) / 2.0));
        }
    }
    Ok(out)
}

fn circle_pair(p: (f64, f64), rp: f64, q: (f64, f64), rq: f64) -> Vec<(f64, f64)> {
    let (dx, dy) = (q.0 - p.0, q.1 - p.1);
    let d = dx.hypot(dy);
    if d == 0.0 {
        return vec![];
    }
    let along = (rp * rp - rq * rq + d * d) / (2.0 * d);
    let h2 = rp * rp - along * along;
    if h2 < 0.0 {
        return vec![];
    }
    let h = h2.sqrt();
    let (ux, uy) = (dx / d, dy / d);
    let m = (p.0 + along * ux, p.1 + along * uy);
    vec![(m.0 - h * uy, m.1 + h * ux), (m.0 + h * uy, m.1 - h * ux)]
}

/// Angle `∠P apex Q` in `[0, π]`.
pub fn angle_at(p: (f64, f64), apex: (f64, f64), q: (f64, f64)) -> Result<f64, OracleError> {
    let u = (p.0 - apex.0, p.1 - apex.1);
    let v = (q.0 - apex.0, q.1 - apex.1);
    let (nu, nv) = (u.0.hypot(u.1), v.0.hypot(v.1));
    if nu == 0.0 || nv == 0.0 {
        return Err(OracleError::DegenerateInput("zero-length arm"));
    }
    // atan2 keeps full accuracy near 0 and π, unlike acos of the dot product.
    Ok((u.0 * v.1 - u.1 * v.0).abs().atan2(u.0 * v.0 + u.1 * v.1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleHit {
    pub point: (f64, f64),
    /// Index into [`Locus::polylines`].
    pub polyline: usize,
    pub segment: usize,
    /// Position along the segment in `[0, 1]`.
    pub param: f64,
}

/// Intersections of the polylines of a locus with a circle, in order along
/// each polyline.
pub fn polyline_circle_intersections(
    locus: &Locus<f64>,
    center: (f64, f64),
    radius: f64,
) -> Vec<CircleHit> {
    let mut hits = Vec::new();
    for (pi, run) in locus.polylines().iter().enumerate() {
        hits.extend(polyline_hits(run, center, radius).into_iter().map(|mut h| {
            h.polyline = pi;
            h
        }));
    }
    hits
}

pub fn polyline_hits(run: &[(f64, f64)], center: (f64, f64), radius: f64) -> Vec<CircleHit> {
    let merge_tol = 1e-9 * radius.max(1.0);
    let mut hits: Vec<CircleHit> = Vec::new();
    for (k, w) in run.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let d = (b.0 - a.0, b.1 - a.1);
        let f = (a.0 - center.0, a.1 - center.1);
        let qa = d.0 * d.0 + d.1 * d.1;
        if qa == 0.0 {
            continue;
        }
        let qb = 2.0 * (f.0 * d.0 + f.1 * d.1);
        let qc = f.0 * f.0 + f.1 * f.1 - radius * radius;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let q = -0.5 * (qb + if qb >= 0.0 { sq } else { -sq });
        let mut roots = if q == 0.0 {
            vec![0.0]
        } else {
            vec![q / qa, qc / q]
        };
        roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for u in roots {
            if !(-1e-12..=1.0 + 1e-12).contains(&u) {
                continue;
            }
            let u = u.clamp(0.0, 1.0);
            let point = (a.0 + u * d.0, a.1 + u * d.1);
            if hits
                .last()
                .is_some_and(|h| (h.point.0 - point.0).hypot(h.point.1 - point.1) <= merge_tol)
            {
                continue;
            }
            hits.push(CircleHit {
                point,
                polyline: 0,
                segment: k,
                param: u,
            });
        }
    }
    hits
}
