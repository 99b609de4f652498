//! Complex homogeneous coordinates: points, lines, circles and the
//! incidence primitives a construction is built from.
//!
//! Every primitive is a pure function. The two intersection primitives
//! involving circles are two-valued and return their candidates in no
//! particular order; choosing between them is the job of the construction
//! engine.

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::{cre, cx, is_finite, Cx, Real};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
}

pub type GeomResult<T> = Result<T, GeomError>;

/// Numerical thresholds shared by the geometry and the tracer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    /// Largest imaginary part (after normalization) still considered real.
    pub tol_real: T,
    /// Relative threshold below which a vector counts as zero.
    pub tol_degenerate: T,
    /// Loop-closure threshold on time, position and direction.
    pub tol_return: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            tol_real: T::lit(1e-9),
            tol_degenerate: T::lit(1e-12),
            tol_return: T::lit(1e-6),
        }
    }
}

impl<T: Real> Tolerances<T> {
    pub fn is_valid(&self) -> bool {
        self.tol_real > T::zero() && self.tol_degenerate > T::zero() && self.tol_return > T::zero()
    }
}

/// Shared behaviour of homogeneous 3-vectors.
pub trait Homogeneous<T: Real>: Copy + Sized {
    fn coords(&self) -> [Cx<T>; 3];
    fn from_coords(c: [Cx<T>; 3]) -> Self;

    fn norm(&self) -> T {
        norm3(&self.coords())
    }

    fn conj(&self) -> Self {
        let [a, b, c] = self.coords();
        Self::from_coords([a.conj(), b.conj(), c.conj()])
    }

    fn scale(&self, k: Cx<T>) -> Self {
        let [a, b, c] = self.coords();
        Self::from_coords([a * k, b * k, c * k])
    }

    fn is_finite(&self) -> bool {
        self.coords().iter().all(|&z| is_finite(z))
    }
}

/// A point `(x : y : z)` of the complex projective plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomPoint<T> {
    pub x: Cx<T>,
    pub y: Cx<T>,
    pub z: Cx<T>,
}

/// A line `a·x + b·y + c·z = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomLine<T> {
    pub a: Cx<T>,
    pub b: Cx<T>,
    pub c: Cx<T>,
}

impl<T: Real> Homogeneous<T> for HomPoint<T> {
    fn coords(&self) -> [Cx<T>; 3] {
        [self.x, self.y, self.z]
    }
    fn from_coords([x, y, z]: [Cx<T>; 3]) -> Self {
        HomPoint { x, y, z }
    }
}

impl<T: Real> Homogeneous<T> for HomLine<T> {
    fn coords(&self) -> [Cx<T>; 3] {
        [self.a, self.b, self.c]
    }
    fn from_coords([a, b, c]: [Cx<T>; 3]) -> Self {
        HomLine { a, b, c }
    }
}

impl<T: Real> HomPoint<T> {
    pub fn new(x: Cx<T>, y: Cx<T>, z: Cx<T>) -> Self {
        HomPoint { x, y, z }
    }

    pub fn real(x: T, y: T, z: T) -> Self {
        HomPoint::new(cre(x), cre(y), cre(z))
    }

    pub fn affine(x: T, y: T) -> Self {
        HomPoint::real(x, y, T::one())
    }

    /// Affine coordinates, or `None` for a point at infinity.
    pub fn to_affine(&self, tol: T) -> Option<(Cx<T>, Cx<T>)> {
        if self.z.norm() <= tol * self.norm() {
            None
        } else {
            Some((self.x / self.z, self.y / self.z))
        }
    }
}

impl<T: Real> HomLine<T> {
    pub fn new(a: Cx<T>, b: Cx<T>, c: Cx<T>) -> Self {
        HomLine { a, b, c }
    }

    pub fn real(a: T, b: T, c: T) -> Self {
        HomLine::new(cre(a), cre(b), cre(c))
    }

    /// Incidence form `⟨l, P⟩`.
    pub fn apply(&self, p: &HomPoint<T>) -> Cx<T> {
        self.a * p.x + self.b * p.y + self.c * p.z
    }
}

/// Circle with a (possibly complex) centre and a fixed squared radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle<T> {
    pub center: HomPoint<T>,
    pub radius_sq: Cx<T>,
}

impl<T: Real> Circle<T> {
    pub fn new(center: HomPoint<T>, radius_sq: Cx<T>) -> Self {
        Circle { center, radius_sq }
    }

    pub fn real(cx_: T, cy: T, radius: T) -> Self {
        Circle::new(HomPoint::affine(cx_, cy), cre(radius * radius))
    }

    pub fn conj(&self) -> Self {
        Circle::new(self.center.conj(), self.radius_sq.conj())
    }

    /// Homogeneous membership form; zero exactly on the circle.
    ///
    /// Scale-free in the centre, quadratic in the point.
    pub fn quadratic_form(&self, p: &HomPoint<T>) -> Cx<T> {
        self.bilinear_form(p, p)
    }

    fn bilinear_form(&self, p: &HomPoint<T>, q: &HomPoint<T>) -> Cx<T> {
        let c = &self.center;
        let px = p.x * c.z - c.x * p.z;
        let py = p.y * c.z - c.y * p.z;
        let qx = q.x * c.z - c.x * q.z;
        let qy = q.y * c.z - c.y * q.z;
        px * qx + py * qy - self.radius_sq * p.z * q.z * c.z * c.z
    }

    /// `|Q(P)|` relative to the magnitude of the terms it is made of.
    pub fn relative_residual(&self, p: &HomPoint<T>) -> T {
        let c = normalize(&self.center).unwrap_or(self.center);
        let pn = normalize(p).unwrap_or(*p);
        let circle = Circle::new(c, self.radius_sq);
        let scale = (T::one() + self.radius_sq.norm()) * pn.norm().powi(2);
        circle.quadratic_form(&pn).norm() / scale
    }
}

pub(crate) fn norm3<T: Real>(v: &[Cx<T>; 3]) -> T {
    let m = max_modulus(v);
    if m == T::zero() || !m.is_finite() {
        return m;
    }
    let s = v
        .iter()
        .map(|z| (*z / m).norm_sqr())
        .fold(T::zero(), |a, b| a + b);
    m * s.sqrt()
}

fn max_modulus<T: Real>(v: &[Cx<T>; 3]) -> T {
    v.iter().map(|z| z.norm()).fold(T::zero(), T::max)
}

pub(crate) fn cross3<T: Real>(p: &[Cx<T>; 3], q: &[Cx<T>; 3]) -> [Cx<T>; 3] {
    [
        p[1] * q[2] - p[2] * q[1],
        p[2] * q[0] - p[0] * q[2],
        p[0] * q[1] - p[1] * q[0],
    ]
}

fn checked<T: Real, H: Homogeneous<T>>(v: H, what: &'static str) -> GeomResult<H> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GeomError::NonFinite(what))
    }
}

/// Rescales to a bounded representative without changing direction.
fn tame<T: Real, H: Homogeneous<T>>(v: &H) -> H {
    let m = max_modulus(&v.coords());
    if m > T::zero() && m.is_finite() {
        v.scale(cre(m.recip()))
    } else {
        *v
    }
}

fn cross_checked<T: Real, A: Homogeneous<T>, B: Homogeneous<T>, R: Homogeneous<T>>(
    p: &A,
    q: &B,
    tol: &Tolerances<T>,
    what: &'static str,
) -> GeomResult<R> {
    let (p, q) = (tame(p), tame(q));
    let r = cross3(&p.coords(), &q.coords());
    let scale = p.norm() * q.norm();
    if !(norm3(&r) > tol.tol_degenerate * scale) {
        return Err(GeomError::DegenerateInput(what));
    }
    checked(R::from_coords(r), what)
}

/// Line through two projectively distinct points.
pub fn join<T: Real>(
    p: &HomPoint<T>,
    q: &HomPoint<T>,
    tol: &Tolerances<T>,
) -> GeomResult<HomLine<T>> {
    cross_checked(p, q, tol, "join of coincident points")
}

/// Intersection point of two projectively distinct lines.
pub fn meet<T: Real>(
    l: &HomLine<T>,
    m: &HomLine<T>,
    tol: &Tolerances<T>,
) -> GeomResult<HomPoint<T>> {
    cross_checked(l, m, tol, "meet of coincident lines")
}

/// Line through `p` perpendicular to `l`.
pub fn perpendicular_through<T: Real>(
    l: &HomLine<T>,
    p: &HomPoint<T>,
    tol: &Tolerances<T>,
) -> GeomResult<HomLine<T>> {
    let (l, p) = (tame(l), tame(p));
    let r = HomLine::new(-l.b * p.z, l.a * p.z, l.b * p.x - l.a * p.y);
    if !(r.norm() > tol.tol_degenerate * l.norm() * p.norm()) {
        return Err(GeomError::DegenerateInput(
            "perpendicular through a point at infinity",
        ));
    }
    checked(r, "perpendicular")
}

/// Midpoint of two finite points.
pub fn midpoint<T: Real>(
    p: &HomPoint<T>,
    q: &HomPoint<T>,
    tol: &Tolerances<T>,
) -> GeomResult<HomPoint<T>> {
    let (p, q) = (tame(p), tame(q));
    if !(p.z.norm() > tol.tol_degenerate * p.norm())
        || !(q.z.norm() > tol.tol_degenerate * q.norm())
    {
        return Err(GeomError::DegenerateInput(
            "midpoint with a point at infinity",
        ));
    }
    let r = HomPoint::new(
        p.x * q.z + q.x * p.z,
        p.y * q.z + q.y * p.z,
        cre(T::lit(2.0)) * p.z * q.z,
    );
    checked(r, "midpoint")
}

/// Divides by the component of largest modulus, so that component becomes
/// exactly `1`.
pub fn normalize<T: Real, H: Homogeneous<T>>(v: &H) -> GeomResult<H> {
    let c = v.coords();
    let m = max_modulus(&c);
    if !(m > T::min_positive_value()) || !m.is_finite() {
        return Err(GeomError::DegenerateInput(
            "normalizing a zero or non-finite vector",
        ));
    }
    // First component within a few ulps of the maximum, so that a second
    // pass picks the same pivot.
    let cutoff = m * (T::one() - T::lit(4.0) * T::epsilon());
    let k = c.iter().position(|z| z.norm() >= cutoff).unwrap_or(0);
    let pivot = c[k];
    let mut out = [c[0] / pivot, c[1] / pivot, c[2] / pivot];
    out[k] = Complex::new(T::one(), T::zero());
    checked(H::from_coords(out), "normalize")
}

/// Chordal distance `‖P×Q‖ / (‖P‖·‖Q‖)` between projective points.
pub fn projective_distance<T: Real, H: Homogeneous<T>>(p: &H, q: &H) -> T {
    let (p, q) = (tame(p), tame(q));
    let r = cross3(&p.coords(), &q.coords());
    norm3(&r) / (p.norm() * q.norm())
}

/// Real up to a global complex phase.
pub fn is_real_point<T: Real>(p: &HomPoint<T>, tol_real: T) -> bool {
    match normalize(p) {
        Ok(n) => max_imag(&n) <= tol_real,
        Err(_) => false,
    }
}

/// Largest imaginary part of the components of an already normalized vector.
pub fn max_imag<T: Real, H: Homogeneous<T>>(n: &H) -> T {
    n.coords()
        .iter()
        .map(|z| z.im.abs())
        .fold(T::zero(), T::max)
}

/// Roots of `a·λ² + b·λ + c` via the cancellation-free pairing
/// `q = −(b + σ√disc)/2`, roots `q/a` and `c/q`.
pub fn stable_quadratic_roots<T: Real>(a: Cx<T>, b: Cx<T>, c: Cx<T>) -> Option<(Cx<T>, Cx<T>)> {
    if a.norm() == T::zero() {
        return None;
    }
    let four = cre(T::lit(4.0));
    let disc = b * b - four * a * c;
    let mut sq = disc.sqrt();
    if (b.conj() * sq).re < T::zero() {
        sq = -sq;
    }
    let q = -(b + sq) * cre(T::lit(0.5));
    if q.norm() == T::zero() {
        return Some((q, q));
    }
    Some((q / a, c / q))
}

/// Both intersections of a circle with a line, possibly complex or coincident.
pub fn circle_line_meet<T: Real>(
    circle: &Circle<T>,
    l: &HomLine<T>,
    tol: &Tolerances<T>,
) -> GeomResult<(HomPoint<T>, HomPoint<T>)> {
    if !(l.norm() > T::zero()) {
        return Err(GeomError::DegenerateInput("zero line"));
    }
    let l = normalize(l)?;
    let center = normalize(&circle.center)?;
    if !(center.z.norm() > tol.tol_degenerate) {
        return Err(GeomError::DegenerateInput("circle centre at infinity"));
    }
    let circle = Circle::new(center, circle.radius_sq);
    let (a, b) = (l.a, l.b);
    let cz = center.z;
    // Direction of l (its point at infinity) and the foot of the
    // perpendicular from the centre.
    let dir = HomPoint::new(b, -a, cre(T::zero()));
    let perp = HomLine::new(-b * cz, a * cz, b * center.x - a * center.y);
    let foot = HomPoint::from_coords(cross3(&l.coords(), &perp.coords()));

    let qa = circle.quadratic_form(&dir);
    let scale = cz.norm_sqr() * (a.norm_sqr() + b.norm_sqr());
    if !(qa.norm() > tol.tol_degenerate * (scale + tol.tol_degenerate)) || scale == T::zero() {
        return Err(GeomError::DegenerateInput(
            "line at infinity or isotropic line",
        ));
    }
    let qb = cre(T::lit(2.0)) * circle.bilinear_form(&foot, &dir);
    let qc = circle.quadratic_form(&foot);
    let (r0, r1) = stable_quadratic_roots(qa, qb, qc)
        .ok_or(GeomError::DegenerateInput("vanishing leading coefficient"))?;
    let at = |lam: Cx<T>| HomPoint::new(foot.x + lam * dir.x, foot.y + lam * dir.y, foot.z);
    let (p0, p1) = (
        checked(at(r0), "circle-line meet")?,
        checked(at(r1), "circle-line meet")?,
    );
    Ok((p0, p1))
}

/// Both intersections of two circles, computed through their radical line.
pub fn circle_circle_meet<T: Real>(
    c1: &Circle<T>,
    c2: &Circle<T>,
    tol: &Tolerances<T>,
) -> GeomResult<(HomPoint<T>, HomPoint<T>)> {
    let n1 = normalize(&c1.center)?;
    let n2 = normalize(&c2.center)?;
    if !(n1.z.norm() > tol.tol_degenerate) || !(n2.z.norm() > tol.tol_degenerate) {
        return Err(GeomError::DegenerateInput("circle centre at infinity"));
    }
    let (x1, y1) = (n1.x / n1.z, n1.y / n1.z);
    let (x2, y2) = (n2.x / n2.z, n2.y / n2.z);
    let (dx, dy) = (x1 - x2, y1 - y2);
    let size = T::one() + x1.norm() + y1.norm() + x2.norm() + y2.norm();
    if !(dx.norm() + dy.norm() > tol.tol_degenerate * size) {
        return Err(GeomError::DegenerateInput("concentric circles"));
    }
    let k1 = x1 * x1 + y1 * y1 - c1.radius_sq;
    let k2 = x2 * x2 + y2 * y2 - c2.radius_sq;
    let m2 = cre(T::lit(-2.0));
    let radical = HomLine::new(m2 * dx, m2 * dy, k1 - k2);
    let affine_c1 = Circle::new(HomPoint::new(x1, y1, cx(T::one(), T::zero())), c1.radius_sq);
    circle_line_meet(&affine_c1, &radical, tol)
}
