//! Locus generation by complex detours of the time parameter.
//!
//! The time walks along small circles in the complex plane whose diameters
//! are the real steps one would otherwise take, so that singular real
//! parameters are passed around instead of through. Two recording modes are
//! provided: [`Variant::A`] records the tracer only at real times and
//! reverses the direction of movement when a detour has to be completed to
//! find a real tracer; [`Variant::B`] records every real tracer position met
//! on a detour and steers along them.

use thiserror::Error;

use crate::construction::{
    evaluate, initial_state, Chart, Construction, ConstructionState, EngineConfig, EngineError,
    TimeParam,
};
use crate::locus::{
    ArcBuilder, DetourDisc, Locus, LocusMetadata, LocusPoint, Orientation, Variant,
};
use crate::projective::{
    is_real_point, max_imag, projective_distance, HomPoint, Homogeneous, Tolerances,
};
use crate::scalar::{cre, cx, Cx, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceConfig<T> {
    pub variant: Variant,
    /// Diameter of a detour circle.
    pub eps: T,
    /// Substeps per full detour circle.
    pub detour_steps: usize,
    pub orientation: Orientation,
    pub max_detours: usize,
    pub tolerances: Tolerances<T>,
    /// Halvings of a single substep (or bisection levels) before giving up.
    pub max_refine_depth: u32,
    pub margin_floor: T,
    pub proximity_ratio: T,
    /// Consecutive halvings of `eps` tried on one detour.
    pub max_eps_halvings: u32,
    /// Real times, besides the start time, that the walk lands on exactly.
    pub waypoints: Vec<TimeParam<T>>,
    /// Require the whole construction, not only the tracer, to return.
    pub strict_return: bool,
}

impl<T: Real> Default for TraceConfig<T> {
    fn default() -> Self {
        TraceConfig {
            variant: Variant::A,
            eps: T::lit(0.05),
            detour_steps: 32,
            orientation: Orientation::Anticlockwise,
            max_detours: 200_000,
            tolerances: Tolerances::default(),
            max_refine_depth: 60,
            margin_floor: T::lit(1e-9),
            proximity_ratio: T::lit(0.25),
            max_eps_halvings: 24,
            waypoints: Vec::new(),
            strict_return: false,
        }
    }
}

impl<T: Real> TraceConfig<T> {
    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn engine(&self) -> EngineConfig<T> {
        EngineConfig {
            tol: self.tolerances,
            margin_floor: self.margin_floor,
            proximity_ratio: self.proximity_ratio,
            ..EngineConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.eps > T::zero() && self.eps.is_finite()) {
            return Err("eps must be positive and finite");
        }
        if self.detour_steps < 4 {
            return Err("detour_steps must be at least 4");
        }
        if self.max_detours < 1 {
            return Err("max_detours must be at least 1");
        }
        if !self.tolerances.is_valid() {
            return Err("tolerances must be positive and finite");
        }
        if !(self.margin_floor >= T::zero() && self.proximity_ratio > T::zero()) {
            return Err("margin_floor must be nonnegative and proximity_ratio positive");
        }
        if self.waypoints.iter().any(|w| w.local.im != T::zero()) {
            return Err("waypoints must be real");
        }
        Ok(())
    }
}

/// Centre and radius of the detour circle whose diameter runs from `t` to
/// `t + s·eps`.
pub fn detour_circle<T: Real>(t: Cx<T>, s: Cx<T>, eps: T) -> (Cx<T>, T) {
    let r = eps / T::lit(2.0);
    (t + s * r, r)
}

/// Position on one detour circle together with the construction there.
#[derive(Debug, Clone, PartialEq)]
pub struct DetourState<T> {
    pub chart: Chart,
    pub start: Cx<T>,
    /// Antipode of the start, `start + s·eps`.
    pub end: Cx<T>,
    pub s: Cx<T>,
    pub center: Cx<T>,
    pub eps: T,
    /// Signed angle travelled from the start.
    pub phase: T,
    pub state: ConstructionState<T>,
}

impl<T: Real> DetourState<T> {
    pub fn new(state: ConstructionState<T>, s: Cx<T>, eps: T) -> Self {
        let start = state.time.local;
        let (center, _) = detour_circle(start, s, eps);
        DetourState {
            chart: state.time.chart,
            start,
            end: start + s * cre(eps),
            s,
            center,
            eps,
            phase: T::zero(),
            state,
        }
    }

    pub fn radius(&self) -> T {
        self.eps / T::lit(2.0)
    }

    /// Absolute angle of the current position around the centre.
    pub fn theta(&self) -> T {
        (-self.s).arg() + self.phase
    }

    pub fn t(&self) -> Cx<T> {
        self.state.time.local
    }

    pub fn time_at(&self, phase: T) -> TimeParam<T> {
        let a = phase.abs();
        let local = if a == T::zero() || a == T::PI() + T::PI() {
            self.start
        } else if a == T::PI() {
            self.end
        } else {
            let (sn, cs) = phase.sin_cos();
            self.center - self.s * cx(cs, sn) * cre(self.radius())
        };
        TimeParam {
            chart: self.chart,
            local,
        }
    }

    pub fn disc(&self) -> DetourDisc<T> {
        DetourDisc {
            chart: self.chart,
            center: self.center,
            radius: self.radius(),
        }
    }

    fn at(&self, phase: T, state: ConstructionState<T>) -> Self {
        DetourState {
            phase,
            state,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetourError {
    #[error("step refinement exhausted at detour phase {phase}")]
    RefinementExhausted { phase: f64 },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("time is not representable in the requested chart")]
    Chart,
}

#[derive(Debug, Error)]
pub enum TraceError<T: Real> {
    #[error("invalid trace configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("cannot start tracing: {0}")]
    Start(#[from] EngineError),
    #[error("refinement exhausted near t = {t} after {halvings} halvings of eps")]
    RefinementExhausted {
        t: Cx<T>,
        halvings: u32,
        partial: Box<Locus<T>>,
    },
    #[error("trace did not close within {max_detours} detours")]
    NonTerminating {
        max_detours: usize,
        partial: Box<Locus<T>>,
    },
}

impl<T: Real> TraceError<T> {
    /// The locus recorded before the failure, if any.
    pub fn partial(&self) -> Option<&Locus<T>> {
        match self {
            TraceError::RefinementExhausted { partial, .. }
            | TraceError::NonTerminating { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

/// Walks the time from `time(from)` to `time(to)` along a one-parameter path,
/// halving the parameter step whenever proximity cannot tell the branches
/// apart.
#[allow(clippy::too_many_arguments)]
fn walk<T: Real>(
    c: &Construction<T>,
    state: &ConstructionState<T>,
    from: T,
    to: T,
    time: &dyn Fn(T) -> TimeParam<T>,
    max_depth: u32,
    budget: Option<usize>,
    engine: &EngineConfig<T>,
    obs: &mut dyn FnMut(T, &ConstructionState<T>),
) -> Result<ConstructionState<T>, DetourError> {
    let mut cur = state.clone();
    let mut at = from;
    let mut h = to - from;
    let mut depth = 0u32;
    let mut evaluations = 0usize;
    while at != to {
        evaluations += 1;
        if budget.is_some_and(|b| evaluations > b) {
            return Err(DetourError::RefinementExhausted {
                phase: at.to_f64_lossy(),
            });
        }
        let next = if (to - at).abs() <= h.abs() {
            to
        } else {
            at + h
        };
        if next == at {
            return Err(DetourError::RefinementExhausted {
                phase: at.to_f64_lossy(),
            });
        }
        match evaluate(c, time(next), &cur, engine) {
            Ok(ev) => {
                cur = ev.state;
                at = next;
                obs(at, &cur);
                if depth > 0 {
                    depth -= 1;
                    h = h + h;
                }
            }
            Err(EngineError::AmbiguousStep { .. }) => {
                depth += 1;
                if depth > max_depth {
                    return Err(DetourError::RefinementExhausted {
                        phase: at.to_f64_lossy(),
                    });
                }
                h = h / T::lit(2.0);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(cur)
}

fn advance<T: Real>(
    ds: &DetourState<T>,
    target: T,
    c: &Construction<T>,
    cfg: &TraceConfig<T>,
    engine: &EngineConfig<T>,
    obs: &mut dyn FnMut(T, &ConstructionState<T>),
) -> Result<DetourState<T>, DetourError> {
    let state = walk(
        c,
        &ds.state,
        ds.phase,
        target,
        &|p| ds.time_at(p),
        cfg.max_refine_depth,
        None,
        engine,
        obs,
    )?;
    Ok(ds.at(target, state))
}

/// Phases of the nominal substeps of one full detour, with the antipode
/// included exactly.
fn detour_phases<T: Real>(cfg: &TraceConfig<T>) -> Vec<T> {
    let n = cfg.detour_steps;
    let sign: T = cfg.orientation.sign();
    let mut ks: Vec<(usize, usize)> = (1..=n).map(|k| (2 * k, n)).collect();
    if n % 2 == 1 {
        ks.push((1, 1));
        ks.sort_by(|a, b| (a.0 * b.1).cmp(&(b.0 * a.1)));
    }
    ks.into_iter()
        .map(|(num, den)| {
            sign * T::PI() * (T::from_usize(num).unwrap() / T::from_usize(den).unwrap())
        })
        .collect()
}

/// Advances one nominal substep along the detour in the configured
/// orientation.
pub fn step_on_detour<T: Real>(
    ds: &DetourState<T>,
    c: &Construction<T>,
    cfg: &TraceConfig<T>,
) -> Result<DetourState<T>, DetourError> {
    let n = T::from_usize(cfg.detour_steps).unwrap();
    let two_pi = T::PI() + T::PI();
    let k = (ds.phase.abs() * n / two_pi).round() + T::one();
    let target = cfg.orientation.sign::<T>() * T::PI() * (k + k) / n;
    advance(ds, target, c, cfg, &cfg.engine(), &mut |_, _| {})
}

fn tracer_realness<T: Real>(c: &Construction<T>, s: &ConstructionState<T>) -> T {
    max_imag(s.tracer(c))
}

fn pivot<T: Real>(p: &HomPoint<T>) -> usize {
    let v = p.coords();
    let mut k = 0;
    for j in 1..3 {
        if v[j].norm() > v[k].norm() {
            k = j;
        }
    }
    k
}

fn imag_signature<T: Real>(p: &HomPoint<T>, k: usize) -> [T; 3] {
    let v = p.coords();
    let mut g = [T::zero(); 3];
    for j in 0..3 {
        if j != k {
            g[j] = (v[j] / v[k]).im;
        }
    }
    g
}

/// Bisects the detour between `lo` and `hi`, to full precision, for a phase
/// at which the tracer is real. `None` when the interval holds no crossing.
pub fn refine_real_crossing<T: Real>(
    c: &Construction<T>,
    lo: &DetourState<T>,
    hi: &DetourState<T>,
    cfg: &TraceConfig<T>,
) -> Result<Option<DetourState<T>>, DetourError> {
    let tol = cfg.tolerances.tol_real;
    let (rl, rh) = (tracer_realness(c, &lo.state), tracer_realness(c, &hi.state));
    if rl <= tol {
        return Ok(Some(lo.clone()));
    }
    if rh <= tol {
        return Ok(Some(hi.clone()));
    }
    let k = pivot(lo.state.tracer(c));
    let mut ga = imag_signature(lo.state.tracer(c), k);
    let gb = imag_signature(hi.state.tracer(c), k);
    let Some(j) = (0..3).find(|&j| j != k && ga[j] * gb[j] < T::zero()) else {
        return Ok(None);
    };
    let engine = cfg.engine();
    let (mut a, mut b) = (lo.clone(), hi.clone());
    let (mut best, mut best_r) = if rl <= rh {
        (lo.clone(), rl)
    } else {
        (hi.clone(), rh)
    };
    for _ in 0..cfg.max_refine_depth {
        let mid = (a.phase + b.phase) / T::lit(2.0);
        if mid == a.phase || mid == b.phase {
            break;
        }
        let m = advance(&a, mid, c, cfg, &engine, &mut |_, _| {})?;
        let r = tracer_realness(c, &m.state);
        if r < best_r {
            best = m.clone();
            best_r = r;
        }
        let gm = imag_signature(m.state.tracer(c), k);
        if gm[j] * ga[j] > T::zero() {
            ga = gm;
            a = m;
        } else {
            b = m;
        }
    }
    Ok((best_r <= tol.sqrt()).then_some(best))
}

/// Evaluates the construction at `target`, continuing from `from` along a
/// straight segment in the target's chart with steps of at most `max_step`.
pub fn continue_to<T: Real>(
    c: &Construction<T>,
    from: &ConstructionState<T>,
    target: TimeParam<T>,
    max_step: T,
    cfg: &TraceConfig<T>,
) -> Result<ConstructionState<T>, DetourError> {
    let start = from
        .time
        .in_chart(target.chart)
        .ok_or(DetourError::Chart)?
        .local;
    let delta = target.local - start;
    let n = (delta.norm() / max_step)
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let nf = T::from_usize(n).unwrap();
    let time = |p: T| {
        let local = if p == nf {
            target.local
        } else {
            start + delta * cre(p / nf)
        };
        TimeParam {
            chart: target.chart,
            local,
        }
    };
    let mut state = from.clone();
    state.time = TimeParam {
        chart: target.chart,
        local: start,
    };
    let budget = 64 * n + 4096;
    walk(
        c,
        &state,
        T::zero(),
        nf,
        &time,
        cfg.max_refine_depth,
        Some(budget),
        &cfg.engine(),
        &mut |_, _| {},
    )
}

/// Bisects along the straight time segment between two recorded states for
/// a root of `f(tracer)`, which must change sign between them.
pub fn bisect_between<T: Real>(
    c: &Construction<T>,
    a: &ConstructionState<T>,
    b: &ConstructionState<T>,
    cfg: &TraceConfig<T>,
    f: &dyn Fn(&HomPoint<T>) -> T,
) -> Result<Option<ConstructionState<T>>, DetourError> {
    let tb = b.time;
    let ta = a.time.in_chart(tb.chart).ok_or(DetourError::Chart)?;
    let step = (tb.local - ta.local).norm() / T::lit(8.0);
    let (mut lo, mut hi) = (a.clone(), b.clone());
    lo.time = ta;
    let (mut flo, fhi) = (f(lo.tracer(c)), f(hi.tracer(c)));
    if flo == T::zero() {
        return Ok(Some(lo));
    }
    if fhi == T::zero() {
        return Ok(Some(hi));
    }
    if flo * fhi > T::zero() {
        return Ok(None);
    }
    for _ in 0..cfg.max_refine_depth.max(80) {
        let mid_local = (lo.time.local + hi.time.local) * cre(T::lit(0.5));
        if mid_local == lo.time.local || mid_local == hi.time.local {
            break;
        }
        let mid = TimeParam {
            chart: tb.chart,
            local: mid_local,
        };
        let m = continue_to(c, &lo, mid, step, cfg)?;
        let fm = f(m.tracer(c));
        if fm == T::zero() {
            return Ok(Some(m));
        }
        if fm * flo > T::zero() {
            flo = fm;
            lo = m;
        } else {
            hi = m;
        }
    }
    let (fl, fh) = (f(lo.tracer(c)).abs(), f(hi.tracer(c)).abs());
    Ok(Some(if fl <= fh { lo } else { hi }))
}

enum Outcome<T> {
    /// Tracer real at the antipode.
    Forward(DetourState<T>),
    /// Tracer real only after the full circle.
    Bounce(DetourState<T>),
    /// Real tracer met somewhere on the circle.
    Crossing(DetourState<T>),
    /// No real tracer on the way.
    Complex,
}

struct Tracer<'a, T: Real, F> {
    c: &'a Construction<T>,
    cfg: &'a TraceConfig<T>,
    engine: EngineConfig<T>,
    phases: Vec<T>,
    obs: F,
    arcs: ArcBuilder<T>,
    detours_used: usize,
    reversals: Vec<DetourDisc<T>>,
}

impl<'a, T: Real, F: FnMut(&ConstructionState<T>)> Tracer<'a, T, F> {
    fn realness(&self, s: &ConstructionState<T>) -> T {
        tracer_realness(self.c, s)
    }

    fn is_real(&self, s: &ConstructionState<T>) -> bool {
        is_real_point(s.tracer(self.c), self.cfg.tolerances.tol_real)
    }

    fn detour_a(&mut self, ds: DetourState<T>) -> Result<Outcome<T>, DetourError> {
        let mut ds = ds;
        let obs = &mut self.obs;
        for &target in &self.phases {
            ds = advance(&ds, target, self.c, self.cfg, &self.engine, &mut |_, s| {
                obs(s)
            })?;
            if target.abs() == T::PI()
                && is_real_point(ds.state.tracer(self.c), self.cfg.tolerances.tol_real)
            {
                return Ok(Outcome::Forward(ds));
            }
        }
        Ok(if self.is_real(&ds.state) {
            Outcome::Bounce(ds)
        } else {
            Outcome::Complex
        })
    }

    fn detour_b(&mut self, ds: DetourState<T>) -> Result<Outcome<T>, DetourError> {
        let two_pi = T::PI() + T::PI();
        let nominal = two_pi / T::from_usize(self.cfg.detour_steps).unwrap();
        let mut ds = ds;
        let mut prev = ds.clone();
        for i in 0..self.phases.len() {
            let target = self.phases[i];
            let mut accepted = Vec::new();
            {
                let obs = &mut self.obs;
                ds = advance(&ds, target, self.c, self.cfg, &self.engine, &mut |p, s| {
                    obs(s);
                    accepted.push((p, s.clone()));
                })?;
            }
            for (p, s) in accepted {
                let hi = ds.at(p, s);
                let mut lo = std::mem::replace(&mut prev, hi.clone());
                let mut hi = hi;
                // The detour starts and ends on a real tracer; look only past
                // the nearest probe where it is not.
                if lo.phase == T::zero() {
                    match self.probe(&lo, T::zero(), hi.phase.signum(), nominal)? {
                        Some(p) => lo = p,
                        None => continue,
                    }
                }
                if hi.phase.abs() == two_pi {
                    match self.probe(&lo, hi.phase, -hi.phase.signum(), nominal)? {
                        Some(p) => hi = p,
                        None => continue,
                    }
                }
                if self.realness(&hi.state) <= self.cfg.tolerances.tol_real {
                    return Ok(Outcome::Crossing(hi));
                }
                if let Some(x) = refine_real_crossing(self.c, &lo, &hi, self.cfg)? {
                    if self.is_real(&x.state) {
                        return Ok(Outcome::Crossing(x));
                    }
                }
            }
        }
        Ok(if self.is_real(&ds.state) {
            Outcome::Bounce(ds)
        } else {
            Outcome::Complex
        })
    }

    /// First state at geometrically growing offsets `delta` from the phase
    /// `anchor`, towards `dir`, whose tracer is not real. The offsets stay
    /// on the far side of `from`.
    fn probe(
        &self,
        from: &DetourState<T>,
        anchor: T,
        dir: T,
        nominal: T,
    ) -> Result<Option<DetourState<T>>, DetourError> {
        let mut delta = nominal * T::lit(1e-3);
        while delta < nominal / T::lit(2.0) {
            let target = anchor + dir * delta;
            if (target - from.phase) * (anchor - from.phase) < T::zero() {
                break;
            }
            let p = advance(from, target, self.c, self.cfg, &self.engine, &mut |_, _| {})?;
            if self.realness(&p.state) > self.cfg.tolerances.tol_real {
                return Ok(Some(p));
            }
            delta = delta * T::lit(4.0);
        }
        Ok(None)
    }

    /// Shortened detour ending exactly on the nearest waypoint ahead, if one
    /// lies within reach.
    fn landing(
        &self,
        cur: &ConstructionState<T>,
        s: Cx<T>,
        eps: T,
        t0: TimeParam<T>,
    ) -> Option<(T, Cx<T>)> {
        if s.im != T::zero() || cur.time.local.im != T::zero() {
            return None;
        }
        let t = cur.time.local.re;
        std::iter::once(&t0)
            .chain(self.cfg.waypoints.iter())
            .filter_map(|w| w.in_chart(cur.time.chart))
            .filter(|w| w.local.im == T::zero())
            .map(|w| ((w.local.re - t) * s.re, w.local))
            .filter(|(d, _)| *d > T::zero() && *d <= eps)
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
    }

    /// Records a real tracer position, looking for a passage through
    /// infinity since the previous record.
    fn record(&mut self, s: &ConstructionState<T>, dt: T) {
        let p = LocusPoint::from_tracer(s.tracer(self.c), s.time, Some(s.clone()));
        let mut crossed = false;
        if let Some(prev) = self.arcs.last() {
            if !prev.is_infinite() && !p.is_infinite() && crosses_infinity(prev, &p) {
                crossed = true;
                if let Some(q) = self.refine_infinity(prev, &p) {
                    self.arcs.push(q, T::zero(), true);
                }
            }
        }
        self.arcs.push(p, dt, crossed);
    }

    /// Secant iteration on `z / pivot` of the tracer between two records.
    fn refine_infinity(&self, p1: &LocusPoint<T>, p2: &LocusPoint<T>) -> Option<LocusPoint<T>> {
        let (s1, s2) = (p1.state.as_ref()?, p2.state.as_ref()?);
        let chart = p2.time.chart;
        let t1 = p1.time.in_chart(chart)?.local;
        let t2 = p2.time.local;
        let span = (t2 - t1).norm();
        if span == T::zero() {
            return None;
        }
        let k = if p1.coords[0].abs() >= p1.coords[1].abs() {
            0
        } else {
            1
        };
        let h = |s: &ConstructionState<T>| {
            let v = s.tracer(self.c).coords();
            v[2] / v[k]
        };
        let mid = (t1 + t2) * cre(T::lit(0.5));
        let (mut ta, mut ha, mut sa) = (t1, h(s1), s1.clone());
        let (mut tb, mut hb, mut sb) = (t2, h(s2), s2.clone());
        for _ in 0..60 {
            let d = hb - ha;
            if d.norm() == T::zero() {
                break;
            }
            let tn = tb - hb * (tb - ta) / d;
            if !(tn.re.is_finite() && tn.im.is_finite()) || (tn - mid).norm() > span + span {
                return None;
            }
            let from = if (tn - ta).norm() < (tn - tb).norm() {
                &sa
            } else {
                &sb
            };
            let sn = continue_to(
                self.c,
                from,
                TimeParam { chart, local: tn },
                span / T::lit(8.0),
                self.cfg,
            )
            .ok()?;
            let hn = h(&sn);
            (ta, ha, sa) = (tb, hb, sb);
            (tb, hb, sb) = (tn, hn, sn);
            if hb.norm() <= T::lit(1e-15)
                || (tb - ta).norm() <= T::lit(1e-15) * (T::one() + tb.norm())
            {
                break;
            }
        }
        if hb.norm() > T::lit(1e-10) || !self.is_real(&sb) {
            return None;
        }
        let v = sb.tracer(self.c);
        let mut lp = LocusPoint::from_coords([v.x.re, v.y.re, T::zero()], sb.time);
        lp.state = Some(sb);
        Some(lp)
    }

    fn partial(&self, closed: bool) -> Locus<T> {
        self.locus(self.arcs.clone().finish(), closed)
    }

    fn locus(&self, arcs: Vec<Vec<LocusPoint<T>>>, closed: bool) -> Locus<T> {
        Locus::new(
            arcs,
            LocusMetadata {
                variant: self.cfg.variant,
                eps: self.cfg.eps,
                detour_steps: self.cfg.detour_steps,
                orientation: self.cfg.orientation,
                reversal_count: self.reversals.len(),
                detours_used: self.detours_used,
                closed,
                reversals: self.reversals.clone(),
            },
        )
    }

    fn run(mut self, start: ConstructionState<T>) -> Result<Locus<T>, TraceError<T>> {
        let cfg = self.cfg;
        let c = self.c;
        let t0 = start.time;
        let tracer0 = *start.tracer(c);
        let tol_return = cfg.tolerances.tol_return;
        self.record(&start, T::zero());
        let mut cur = start.clone();
        let mut s = cre(T::one());
        loop {
            let mut eps = cfg.eps;
            let mut end = None;
            if let Some((d, w)) = self.landing(&cur, s, eps, t0) {
                eps = d;
                end = Some(w);
            }
            let mut halvings = 0;
            let (outcome, used_eps) = loop {
                if self.detours_used >= cfg.max_detours {
                    return Err(TraceError::NonTerminating {
                        max_detours: cfg.max_detours,
                        partial: Box::new(self.partial(false)),
                    });
                }
                self.detours_used += 1;
                let mut ds = DetourState::new(cur.clone(), s, eps);
                if let Some(w) = end {
                    ds.end = w;
                }
                let res = match cfg.variant {
                    Variant::A => self.detour_a(ds),
                    Variant::B => self.detour_b(ds),
                };
                match res {
                    Ok(Outcome::Complex) | Err(_) => {
                        halvings += 1;
                        if halvings > cfg.max_eps_halvings {
                            return Err(TraceError::RefinementExhausted {
                                t: cur.time.value(),
                                halvings,
                                partial: Box::new(self.partial(false)),
                            });
                        }
                        eps = eps / T::lit(2.0);
                        end = None;
                    }
                    Ok(o) => break (o, eps),
                }
            };
            match outcome {
                Outcome::Forward(ds) => {
                    cur = ds.state;
                    self.record(&cur, used_eps);
                }
                Outcome::Bounce(ds) => {
                    self.reversals.push(ds.disc());
                    s = -s;
                    cur = ds.state;
                    self.record(&cur, T::zero());
                }
                Outcome::Crossing(ds) => {
                    let x = ds.t();
                    let dir = x - ds.center;
                    s = dir / cre(dir.norm());
                    cur = ds.state;
                    // A crossing on the real axis continues along it.
                    let near_real =
                        x.im.abs() <= cfg.tolerances.tol_real.sqrt() * (T::one() + x.norm());
                    if near_real && dir.re != T::zero() {
                        if x.im == T::zero() {
                            s = cre(dir.re.signum());
                        } else {
                            let snapped = TimeParam {
                                chart: cur.time.chart,
                                local: cre(x.re),
                            };
                            if let Ok(ev) = evaluate(c, snapped, &cur, &self.engine) {
                                if self.is_real(&ev.state) {
                                    cur = ev.state;
                                    s = cre(dir.re.signum());
                                }
                            }
                        }
                    }
                    self.record(&cur, used_eps);
                }
                Outcome::Complex => unreachable!("complex detours are retried"),
            }
            let t = cur.time.local;
            if t.norm() > T::lit(2.0) {
                let other = match cur.time.chart {
                    Chart::Direct => Chart::Inverted,
                    Chart::Inverted => Chart::Direct,
                };
                cur.time = cur.time.in_chart(other).expect("nonzero local time");
                let turned = s * t.conj() * t.conj();
                s = turned / cre(turned.norm());
                if s.im == T::zero() {
                    s = cre(s.re.signum());
                }
            }
            let back = cur
                .time
                .in_chart(t0.chart)
                .is_some_and(|tc| (tc.local - t0.local).norm() <= tol_return)
                && (s - cre(T::one())).norm() <= tol_return
                && projective_distance(cur.tracer(c), &tracer0) <= tol_return
                && (!cfg.strict_return || cur.distance(&start) <= tol_return);
            if back {
                let arcs =
                    ArcBuilder::finish(std::mem::replace(&mut self.arcs, ArcBuilder::new(cfg.eps)));
                return Ok(self.locus(arcs, true));
            }
        }
    }
}

/// Whether the tracer passed through the line at infinity between two
/// finite records, judged by the sign of `z` relative to a common pivot.
fn crosses_infinity<T: Real>(p1: &LocusPoint<T>, p2: &LocusPoint<T>) -> bool {
    let k = if p1.coords[0].abs() >= p1.coords[1].abs() {
        0
    } else {
        1
    };
    if p2.coords[k] == T::zero() {
        return false;
    }
    (p1.coords[2] / p1.coords[k]) * (p2.coords[2] / p2.coords[k]) < T::zero()
}

/// Traces the locus of the construction's tracer starting at real time `t0`,
/// calling `observer` with every construction state accepted on a detour.
pub fn trace_observed<T: Real, F: FnMut(&ConstructionState<T>)>(
    c: &Construction<T>,
    t0: T,
    cfg: &TraceConfig<T>,
    observer: F,
) -> Result<Locus<T>, TraceError<T>> {
    cfg.validate().map_err(TraceError::InvalidConfig)?;
    let engine = cfg.engine();
    let start = initial_state(c, cre(t0), &engine)?;
    let tracer = Tracer {
        c,
        cfg,
        engine,
        phases: detour_phases(cfg),
        obs: observer,
        arcs: ArcBuilder::new(cfg.eps),
        detours_used: 0,
        reversals: Vec::new(),
    };
    tracer.run(start)
}

/// Traces with the variant named in `cfg`.
pub fn trace<T: Real>(
    c: &Construction<T>,
    t0: T,
    cfg: &TraceConfig<T>,
) -> Result<Locus<T>, TraceError<T>> {
    trace_observed(c, t0, cfg, |_| {})
}

pub fn trace_variant_a<T: Real>(
    c: &Construction<T>,
    t0: T,
    cfg: &TraceConfig<T>,
) -> Result<Locus<T>, TraceError<T>> {
    trace(c, t0, &cfg.clone().with_variant(Variant::A))
}

pub fn trace_variant_b<T: Real>(
    c: &Construction<T>,
    t0: T,
    cfg: &TraceConfig<T>,
) -> Result<Locus<T>, TraceError<T>> {
    trace(c, t0, &cfg.clone().with_variant(Variant::B))
}
