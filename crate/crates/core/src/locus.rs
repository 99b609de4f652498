//! Traced loci: ordered arcs of real tracer positions with their times.

use std::fmt;

use crate::construction::{Chart, ConstructionState, TimeParam};
use crate::projective::HomPoint;
use crate::scalar::{Cx, Real};

/// Relative size of `z` below which a recorded point counts as lying on the
/// line at infinity.
pub const INFINITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    #[default]
    A,
    B,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::A => "A",
            Variant::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Anticlockwise,
    Clockwise,
}

impl Orientation {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Orientation::Anticlockwise => T::one(),
            Orientation::Clockwise => -T::one(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Anticlockwise => Orientation::Clockwise,
            Orientation::Clockwise => Orientation::Anticlockwise,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Anticlockwise => "acw",
            Orientation::Clockwise => "cw",
        })
    }
}

/// One recorded real tracer position.
#[derive(Debug, Clone, PartialEq)]
pub struct LocusPoint<T> {
    /// Real parts of the max-modulus normalized tracer; `z` is exactly zero
    /// for points at infinity.
    pub coords: [T; 3],
    pub time: TimeParam<T>,
    pub state: Option<ConstructionState<T>>,
}

impl<T: Real> LocusPoint<T> {
    pub fn finite(x: T, y: T, t: Cx<T>) -> Self {
        LocusPoint::from_coords([x, y, T::one()], TimeParam::direct(t))
    }

    /// Builds a point from real homogeneous coordinates, snapping `z` to zero
    /// when the point lies at infinity.
    pub fn from_coords(c: [T; 3], time: TimeParam<T>) -> Self {
        let m = c.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let mut coords = if m > T::zero() {
            [c[0] / m, c[1] / m, c[2] / m]
        } else {
            c
        };
        if coords[2].abs() <= T::lit(INFINITY_TOL) {
            for v in &mut coords {
                if v.abs() <= T::lit(INFINITY_TOL) {
                    *v = T::zero();
                }
            }
        }
        LocusPoint {
            coords,
            time,
            state: None,
        }
    }

    pub fn from_tracer(
        p: &HomPoint<T>,
        time: TimeParam<T>,
        state: Option<ConstructionState<T>>,
    ) -> Self {
        let mut lp = LocusPoint::from_coords([p.x.re, p.y.re, p.z.re], time);
        lp.state = state;
        lp
    }

    pub fn is_infinite(&self) -> bool {
        self.coords[2] == T::zero()
    }

    pub fn affine(&self) -> Option<(T, T)> {
        if self.is_infinite() {
            None
        } else {
            Some((
                self.coords[0] / self.coords[2],
                self.coords[1] / self.coords[2],
            ))
        }
    }

    /// Time value `t`, infinite when recorded at `t = ∞`.
    pub fn t(&self) -> Cx<T> {
        self.time.value()
    }
}

/// A detour disc in one time chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetourDisc<T> {
    pub chart: Chart,
    pub center: Cx<T>,
    pub radius: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocusMetadata<T> {
    pub variant: Variant,
    pub eps: T,
    pub detour_steps: usize,
    pub orientation: Orientation,
    pub reversal_count: usize,
    pub detours_used: usize,
    pub closed: bool,
    /// Detours at which the direction of movement was reversed.
    pub reversals: Vec<DetourDisc<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Locus<T> {
    pub arcs: Vec<Vec<LocusPoint<T>>>,
    pub metadata: LocusMetadata<T>,
}

impl<T: Real> Locus<T> {
    pub fn new(arcs: Vec<Vec<LocusPoint<T>>>, metadata: LocusMetadata<T>) -> Self {
        Locus { arcs, metadata }
    }

    pub fn points(&self) -> impl Iterator<Item = &LocusPoint<T>> {
        self.arcs.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.arcs.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn finite_points(&self) -> Vec<(T, T)> {
        self.points().filter_map(LocusPoint::affine).collect()
    }

    pub fn infinite_points(&self) -> Vec<&LocusPoint<T>> {
        self.points().filter(|p| p.is_infinite()).collect()
    }

    /// Maximal runs of consecutive finite points within each arc.
    pub fn finite_runs(&self) -> Vec<Vec<&LocusPoint<T>>> {
        let mut out = Vec::new();
        for arc in &self.arcs {
            for run in arc.split(|p| p.is_infinite()) {
                if !run.is_empty() {
                    out.push(run.iter().collect());
                }
            }
        }
        out
    }

    /// Affine coordinates of [`Locus::finite_runs`].
    pub fn polylines(&self) -> Vec<Vec<(T, T)>> {
        self.finite_runs()
            .into_iter()
            .map(|run| run.into_iter().filter_map(LocusPoint::affine).collect())
            .collect()
    }

    /// Largest gap between consecutive finite points of a polyline.
    pub fn sampling_density(&self) -> T {
        self.polylines()
            .iter()
            .flat_map(|run| run.windows(2).map(|w| dist(w[0], w[1])))
            .fold(T::zero(), T::max)
    }

    /// Points along every polyline with spacing at most `h`, endpoints
    /// included.
    pub fn resampled(&self, h: T) -> Vec<(T, T)> {
        assert!(h > T::zero(), "resampling step must be positive");
        let mut out = Vec::new();
        for run in self.polylines() {
            out.push(run[0]);
            for w in run.windows(2) {
                let d = dist(w[0], w[1]);
                let n = (d / h).ceil().to_usize().unwrap_or(1).max(1);
                for k in 1..=n {
                    let f = T::from_usize(k).unwrap() / T::from_usize(n).unwrap();
                    out.push((
                        w[0].0 + (w[1].0 - w[0].0) * f,
                        w[0].1 + (w[1].1 - w[0].1) * f,
                    ));
                }
            }
        }
        out
    }

    pub fn first(&self) -> Option<&LocusPoint<T>> {
        self.points().next()
    }

    pub fn last(&self) -> Option<&LocusPoint<T>> {
        self.arcs.iter().rev().flat_map(|a| a.iter().rev()).next()
    }

    /// Drops the stored construction states.
    pub fn without_states(mut self) -> Self {
        for p in self.arcs.iter_mut().flatten() {
            p.state = None;
        }
        self
    }
}

fn dist<T: Real>(a: (T, T), b: (T, T)) -> T {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Accumulates records and splits them into arcs.
#[derive(Debug, Clone)]
pub(crate) struct ArcBuilder<T> {
    arcs: Vec<Vec<LocusPoint<T>>>,
    /// Speed estimate `|Δx| / Δt` of the last finite step in the current arc.
    speed: Option<T>,
    eps: T,
}

impl<T: Real> ArcBuilder<T> {
    pub fn new(eps: T) -> Self {
        ArcBuilder {
            arcs: vec![Vec::new()],
            speed: None,
            eps,
        }
    }

    pub fn last(&self) -> Option<&LocusPoint<T>> {
        self.arcs.iter().rev().flat_map(|a| a.iter().rev()).next()
    }

    fn break_arc(&mut self) {
        if self.arcs.last().is_some_and(|a| !a.is_empty()) {
            self.arcs.push(Vec::new());
        }
        self.speed = None;
    }

    /// Appends a record reached after a time step of length `dt`; `crossed`
    /// forces a new arc (the tracer passed through infinity).
    pub fn push(&mut self, p: LocusPoint<T>, dt: T, crossed: bool) {
        let prev = self.last().cloned();
        match (&prev, p.is_infinite()) {
            (_, true) => {
                // A point at infinity closes the arc that approached it.
                self.arcs.last_mut().unwrap().push(p);
                self.break_arc();
                return;
            }
            (Some(q), false) if !q.is_infinite() => {
                let (a, b) = (q.affine().unwrap(), p.affine().unwrap());
                let d = dist(a, b);
                let split = crossed
                    || match self.speed {
                        Some(v) => d > T::lit(10.0) * self.eps.max(dt) * v.max(T::lit(1e-3)),
                        None => false,
                    };
                if split {
                    self.break_arc();
                } else if dt > T::zero() {
                    self.speed = Some(d / dt);
                }
            }
            _ => {}
        }
        self.arcs.last_mut().unwrap().push(p);
    }

    pub fn finish(mut self) -> Vec<Vec<LocusPoint<T>>> {
        if self.arcs.last().is_some_and(Vec::is_empty) && self.arcs.len() > 1 {
            self.arcs.pop();
        }
        if self.arcs.len() == 1 && self.arcs[0].is_empty() {
            self.arcs.clear();
        }
        self.arcs
    }
}
