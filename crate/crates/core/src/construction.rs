//! Constructions as straight-line programs over projective values, evaluated
//! at complex times with proximity-based resolution of two-valued nodes.

use std::cmp::Ordering;

use thiserror::Error;

use crate::projective::{
    circle_circle_meet, circle_line_meet, is_real_point, join, meet, midpoint, normalize,
    perpendicular_through, projective_distance, Circle, GeomError, HomLine, HomPoint, Homogeneous,
    Tolerances,
};
use crate::scalar::{cmp_tol, cre, Cx, Real};

pub type NodeId = usize;

/// Which affine chart of the time line `ℂ ∪ {∞}` a local coordinate lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    /// `t = local`.
    Direct,
    /// `t = −1/local`; covers `t = ∞` at `local = 0`.
    Inverted,
}

/// A point of the projective time line in one of two charts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeParam<T> {
    pub chart: Chart,
    pub local: Cx<T>,
}

impl<T: Real> TimeParam<T> {
    pub fn direct(t: Cx<T>) -> Self {
        TimeParam {
            chart: Chart::Direct,
            local: t,
        }
    }

    pub fn inverted(u: Cx<T>) -> Self {
        TimeParam {
            chart: Chart::Inverted,
            local: u,
        }
    }

    /// Homogeneous time `(p, q)` with `t = p/q`.
    pub fn homogeneous(&self) -> (Cx<T>, Cx<T>) {
        match self.chart {
            Chart::Direct => (self.local, cre(T::one())),
            Chart::Inverted => (cre(-T::one()), self.local),
        }
    }

    /// The time value `t`; infinite at `t = ∞`.
    pub fn value(&self) -> Cx<T> {
        match self.chart {
            Chart::Direct => self.local,
            Chart::Inverted => {
                if self.local.norm() == T::zero() {
                    cre(T::infinity())
                } else {
                    -self.local.inv()
                }
            }
        }
    }

    pub fn conj(&self) -> Self {
        TimeParam {
            chart: self.chart,
            local: self.local.conj(),
        }
    }

    /// Re-expresses the time in the requested chart, if it is representable
    /// there.
    pub fn in_chart(&self, chart: Chart) -> Option<Self> {
        if chart == self.chart {
            return Some(*self);
        }
        if self.local.norm() == T::zero() {
            return None;
        }
        Some(TimeParam {
            chart,
            local: -self.local.inv(),
        })
    }
}

/// Rational parameterizations of the one moving element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoverParam {
    /// Point on the circle node.
    PointOnCircle(NodeId),
    /// Line rotating about the point node.
    LineThroughPoint(NodeId),
    /// Point sliding along the line node.
    PointOnLine(NodeId),
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind<T> {
    FreePoint(HomPoint<T>),
    FreeLine(HomLine<T>),
    CircleCR { center: NodeId, radius: T },
    Mover(MoverParam),
    Join(NodeId, NodeId),
    Meet(NodeId, NodeId),
    PerpThrough { line: NodeId, point: NodeId },
    CircleLineMeet { circle: NodeId, line: NodeId },
    CircleCircleMeet(NodeId, NodeId),
    Midpoint(NodeId, NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Point,
    Line,
    Circle,
}

impl std::fmt::Display for ValueKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ValueKind::Point => "point",
            ValueKind::Line => "line",
            ValueKind::Circle => "circle",
        })
    }
}

impl<T> NodeKind<T> {
    pub fn output_kind(&self, nodes: &[Node<T>]) -> ValueKind {
        use NodeKind::*;
        match self {
            FreePoint(_)
            | Meet(..)
            | CircleLineMeet { .. }
            | CircleCircleMeet(..)
            | Midpoint(..) => ValueKind::Point,
            FreeLine(_) | Join(..) | PerpThrough { .. } => ValueKind::Line,
            CircleCR { .. } => ValueKind::Circle,
            Mover(MoverParam::LineThroughPoint(_)) => ValueKind::Line,
            Mover(_) => {
                let _ = nodes;
                ValueKind::Point
            }
        }
    }

    pub fn is_ambiguous(&self) -> bool {
        matches!(
            self,
            NodeKind::CircleLineMeet { .. } | NodeKind::CircleCircleMeet(..)
        )
    }

    /// Operands with the kind each must have.
    pub fn operands(&self) -> Vec<(NodeId, ValueKind)> {
        use NodeKind::*;
        use ValueKind as K;
        match *self {
            FreePoint(_) | FreeLine(_) => vec![],
            CircleCR { center, .. } => vec![(center, K::Point)],
            Mover(MoverParam::PointOnCircle(c)) => vec![(c, K::Circle)],
            Mover(MoverParam::LineThroughPoint(p)) => vec![(p, K::Point)],
            Mover(MoverParam::PointOnLine(l)) => vec![(l, K::Line)],
            Join(p, q) | Midpoint(p, q) => vec![(p, K::Point), (q, K::Point)],
            Meet(l, m) => vec![(l, K::Line), (m, K::Line)],
            PerpThrough { line, point } => vec![(line, K::Line), (point, K::Point)],
            CircleLineMeet { circle, line } => vec![(circle, K::Circle), (line, K::Line)],
            CircleCircleMeet(a, b) => vec![(a, K::Circle), (b, K::Circle)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node<T> {
    pub name: String,
    pub kind: NodeKind<T>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructionError {
    #[error("node {node} refers to node {operand}, which is not declared before it")]
    ForwardReference { node: NodeId, operand: NodeId },
    #[error("node {node}: operand {operand} must be a {expected}, found a {found}")]
    TypeMismatch {
        node: NodeId,
        operand: NodeId,
        expected: ValueKind,
        found: ValueKind,
    },
    #[error("a construction needs exactly one mover, found {0}")]
    MoverCount(usize),
    #[error("node {0} is not the mover")]
    NotMover(NodeId),
    #[error("tracer node {0} is not a point")]
    TracerNotPoint(NodeId),
    #[error("expected {expected} initial branches, got {got}")]
    BranchCount { expected: usize, got: usize },
    #[error("initial branch for node {0} must be 0 or 1")]
    BranchValue(NodeId),
    #[error("node index {0} out of range")]
    OutOfRange(NodeId),
    #[error("circle radius of node {0} must be finite and nonnegative")]
    BadRadius(NodeId),
}

/// Ordered program of geometric nodes with one mover and one tracer.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction<T> {
    nodes: Vec<Node<T>>,
    mover: NodeId,
    tracer: NodeId,
    initial_branches: Vec<u8>,
    ambiguous: Vec<NodeId>,
}

impl<T: Real> Construction<T> {
    pub fn new(
        nodes: Vec<Node<T>>,
        mover: NodeId,
        tracer: NodeId,
        initial_branches: Vec<u8>,
    ) -> Result<Self, ConstructionError> {
        for (i, node) in nodes.iter().enumerate() {
            for (op, expected) in node.kind.operands() {
                if op >= i {
                    return Err(ConstructionError::ForwardReference {
                        node: i,
                        operand: op,
                    });
                }
                let found = nodes[op].kind.output_kind(&nodes);
                if found != expected {
                    return Err(ConstructionError::TypeMismatch {
                        node: i,
                        operand: op,
                        expected,
                        found,
                    });
                }
            }
            if let NodeKind::CircleCR { radius, .. } = node.kind {
                if !radius.is_finite() || radius < T::zero() {
                    return Err(ConstructionError::BadRadius(i));
                }
            }
        }
        let movers: Vec<_> = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n.kind, NodeKind::Mover(_)))
            .map(|(i, _)| i)
            .collect();
        if movers.len() != 1 {
            return Err(ConstructionError::MoverCount(movers.len()));
        }
        for id in [mover, tracer] {
            if id >= nodes.len() {
                return Err(ConstructionError::OutOfRange(id));
            }
        }
        if movers[0] != mover {
            return Err(ConstructionError::NotMover(mover));
        }
        if nodes[tracer].kind.output_kind(&nodes) != ValueKind::Point {
            return Err(ConstructionError::TracerNotPoint(tracer));
        }
        let ambiguous: Vec<_> = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind.is_ambiguous())
            .map(|(i, _)| i)
            .collect();
        if initial_branches.len() != ambiguous.len() {
            return Err(ConstructionError::BranchCount {
                expected: ambiguous.len(),
                got: initial_branches.len(),
            });
        }
        if let Some(pos) = initial_branches.iter().position(|&b| b > 1) {
            return Err(ConstructionError::BranchValue(ambiguous[pos]));
        }
        Ok(Construction {
            nodes,
            mover,
            tracer,
            initial_branches,
            ambiguous,
        })
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn mover(&self) -> NodeId {
        self.mover
    }

    pub fn tracer(&self) -> NodeId {
        self.tracer
    }

    pub fn initial_branches(&self) -> &[u8] {
        &self.initial_branches
    }

    pub fn ambiguous_nodes(&self) -> &[NodeId] {
        &self.ambiguous
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// Copy with every free element conjugated.
    pub fn conj(&self) -> Self {
        let mut c = self.clone();
        for n in &mut c.nodes {
            match &mut n.kind {
                NodeKind::FreePoint(p) => *p = p.conj(),
                NodeKind::FreeLine(l) => *l = l.conj(),
                _ => {}
            }
        }
        c
    }
}

/// Current value of a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value<T> {
    Point(HomPoint<T>),
    Line(HomLine<T>),
    Circle(Circle<T>),
}

impl<T: Real> Value<T> {
    pub fn as_point(&self) -> Option<&HomPoint<T>> {
        match self {
            Value::Point(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_line(&self) -> Option<&HomLine<T>> {
        match self {
            Value::Line(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_circle(&self) -> Option<&Circle<T>> {
        match self {
            Value::Circle(c) => Some(c),
            _ => None,
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            Value::Point(p) => Value::Point(p.conj()),
            Value::Line(l) => Value::Line(l.conj()),
            Value::Circle(c) => Value::Circle(c.conj()),
        }
    }

    /// Projective distance between values of the same kind; circles compare
    /// centres and radii.
    pub fn distance(&self, other: &Self) -> T {
        match (self, other) {
            (Value::Point(a), Value::Point(b)) => projective_distance(a, b),
            (Value::Line(a), Value::Line(b)) => projective_distance(a, b),
            (Value::Circle(a), Value::Circle(b)) => {
                projective_distance(&a.center, &b.center) + (a.radius_sq - b.radius_sq).norm()
            }
            _ => T::infinity(),
        }
    }
}

/// Values of every node at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionState<T> {
    pub time: TimeParam<T>,
    pub values: Vec<Value<T>>,
}

impl<T: Real> ConstructionState<T> {
    pub fn t(&self) -> Cx<T> {
        self.time.value()
    }

    pub fn point(&self, id: NodeId) -> Option<&HomPoint<T>> {
        self.values.get(id).and_then(Value::as_point)
    }

    pub fn tracer<'a>(&'a self, c: &Construction<T>) -> &'a HomPoint<T> {
        self.point(c.tracer()).expect("tracer is a point node")
    }

    pub fn conj(&self) -> Self {
        ConstructionState {
            time: self.time.conj(),
            values: self.values.iter().map(Value::conj).collect(),
        }
    }

    /// Largest node-wise distance to another state of the same construction.
    pub fn distance(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.distance(b))
            .fold(T::zero(), T::max)
    }
}

/// Knobs of the proximity resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig<T> {
    pub tol: Tolerances<T>,
    /// Smallest acceptable gap between the distances to the two candidates.
    pub margin_floor: T,
    /// The chosen candidate must lie closer than this fraction of the
    /// candidates' separation.
    pub proximity_ratio: T,
    /// Candidate separation below which a start time counts as singular.
    pub start_separation: T,
}

impl<T: Real> Default for EngineConfig<T> {
    fn default() -> Self {
        EngineConfig {
            tol: Tolerances::default(),
            margin_floor: T::lit(1e-9),
            proximity_ratio: T::lit(0.25),
            start_separation: T::lit(1e-6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("node {node} ({name}) degenerated: {source}")]
    DegenerateOp {
        node: NodeId,
        name: String,
        source: GeomError,
    },
    #[error("ambiguous step at node {node}: margin {margin:e}")]
    AmbiguousStep { node: NodeId, margin: f64 },
    #[error("singular start: {0}")]
    SingularStart(String),
}

/// Result of one evaluation with the per-node ambiguity margins.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T> {
    pub state: ConstructionState<T>,
    /// `(node, distance to rejected − distance to chosen)` per ambiguous node.
    pub margins: Vec<(NodeId, T)>,
}

fn two<T: Real>() -> Cx<T> {
    cre(T::lit(2.0))
}

/// Position of the mover at homogeneous time `(p, q)`.
pub fn mover_position_hom<T: Real>(
    param: MoverParam,
    values: &[Value<T>],
    (p, q): (Cx<T>, Cx<T>),
    tol: &Tolerances<T>,
) -> Result<Value<T>, GeomError> {
    let (pp, qq, pq) = (p * p, q * q, p * q);
    let operand = |id: NodeId| {
        values
            .get(id)
            .ok_or(GeomError::DegenerateInput("missing operand"))
    };
    let value = match param {
        MoverParam::PointOnCircle(c) => {
            let circle = operand(c)?
                .as_circle()
                .ok_or(GeomError::DegenerateInput("operand is not a circle"))?;
            let (cx_, cy) = circle
                .center
                .to_affine(tol.tol_degenerate)
                .ok_or(GeomError::DegenerateInput("circle centre at infinity"))?;
            let r = circle.radius_sq.sqrt();
            let s = qq + pp;
            let d = qq - pp;
            Value::Point(HomPoint::new(
                cx_ * s + r * d,
                cy * s + r * two::<T>() * pq,
                s,
            ))
        }
        MoverParam::LineThroughPoint(f) => {
            let pivot = operand(f)?
                .as_point()
                .ok_or(GeomError::DegenerateInput("operand is not a point"))?;
            let dir = HomPoint::new(qq - pp, two::<T>() * pq, cre(T::zero()));
            Value::Line(join(pivot, &dir, tol)?)
        }
        MoverParam::PointOnLine(l) => {
            let line = operand(l)?
                .as_line()
                .ok_or(GeomError::DegenerateInput("operand is not a line"))?;
            let n2 = line.a * line.a + line.b * line.b;
            if !(n2.norm() > tol.tol_degenerate * Homogeneous::norm(line).powi(2)) {
                return Err(GeomError::DegenerateInput(
                    "mover line at infinity or isotropic",
                ));
            }
            let root = n2.sqrt();
            let w = qq - pp;
            let s = two::<T>() * pq;
            Value::Point(HomPoint::new(
                -line.a * line.c * w + line.b * root * s,
                -line.b * line.c * w - line.a * root * s,
                n2 * w,
            ))
        }
    };
    normalize_value(value)
}

/// Position of the mover at time `t`.
pub fn mover_position<T: Real>(
    param: MoverParam,
    values: &[Value<T>],
    t: Cx<T>,
    tol: &Tolerances<T>,
) -> Result<Value<T>, GeomError> {
    mover_position_hom(param, values, (t, cre(T::one())), tol)
}

fn normalize_value<T: Real>(v: Value<T>) -> Result<Value<T>, GeomError> {
    Ok(match v {
        Value::Point(p) => Value::Point(normalize(&p)?),
        Value::Line(l) => Value::Line(normalize(&l)?),
        Value::Circle(c) => Value::Circle(Circle::new(normalize(&c.center)?, c.radius_sq)),
    })
}

enum Candidates<T> {
    One(Value<T>),
    Two(HomPoint<T>, HomPoint<T>),
}

fn compute_node<T: Real>(
    c: &Construction<T>,
    id: NodeId,
    values: &[Value<T>],
    time: &TimeParam<T>,
    tol: &Tolerances<T>,
) -> Result<Candidates<T>, GeomError> {
    use NodeKind::*;
    let pt = |i: NodeId| values[i].as_point().expect("type-checked point operand");
    let ln = |i: NodeId| values[i].as_line().expect("type-checked line operand");
    let ci = |i: NodeId| values[i].as_circle().expect("type-checked circle operand");
    let one = |v: Value<T>| -> Result<Candidates<T>, GeomError> {
        Ok(Candidates::One(normalize_value(v)?))
    };
    match &c.nodes[id].kind {
        FreePoint(p) => one(Value::Point(*p)),
        FreeLine(l) => one(Value::Line(*l)),
        CircleCR { center, radius } => {
            let ctr = pt(*center);
            if ctr.to_affine(tol.tol_degenerate).is_none() {
                return Err(GeomError::DegenerateInput("circle centre at infinity"));
            }
            one(Value::Circle(Circle::new(*ctr, cre(*radius * *radius))))
        }
        Mover(param) => Ok(Candidates::One(mover_position_hom(
            *param,
            values,
            time.homogeneous(),
            tol,
        )?)),
        Join(p, q) => one(Value::Line(join(pt(*p), pt(*q), tol)?)),
        Meet(l, m) => one(Value::Point(meet(ln(*l), ln(*m), tol)?)),
        PerpThrough { line, point } => one(Value::Line(perpendicular_through(
            ln(*line),
            pt(*point),
            tol,
        )?)),
        Midpoint(p, q) => one(Value::Point(midpoint(pt(*p), pt(*q), tol)?)),
        CircleLineMeet { circle, line } => {
            let (a, b) = circle_line_meet(ci(*circle), ln(*line), tol)?;
            Ok(Candidates::Two(normalize(&a)?, normalize(&b)?))
        }
        CircleCircleMeet(a, b) => {
            let (p, q) = circle_circle_meet(ci(*a), ci(*b), tol)?;
            Ok(Candidates::Two(normalize(&p)?, normalize(&q)?))
        }
    }
}

fn lex_key<T: Real>(p: &HomPoint<T>) -> [T; 6] {
    [p.x.re, p.x.im, p.y.re, p.y.im, p.z.re, p.z.im]
}

/// Orders two candidates lexicographically by their normalized components,
/// treating differences below `1e-9` as ties.
pub fn order_candidates<T: Real>(a: HomPoint<T>, b: HomPoint<T>) -> (HomPoint<T>, HomPoint<T>) {
    let tol = T::lit(1e-9);
    let (ka, kb) = (lex_key(&a), lex_key(&b));
    let ord = ka
        .iter()
        .zip(kb.iter())
        .map(|(x, y)| cmp_tol(*x, *y, tol))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal);
    if ord == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    }
}

fn degenerate<T: Real>(c: &Construction<T>, node: NodeId, source: GeomError) -> EngineError {
    EngineError::DegenerateOp {
        node,
        name: c.nodes[node].name.clone(),
        source,
    }
}

/// Evaluates the construction at a real start time, taking the initial
/// branch of every ambiguous node.
pub fn initial_state<T: Real>(
    c: &Construction<T>,
    t0: Cx<T>,
    cfg: &EngineConfig<T>,
) -> Result<ConstructionState<T>, EngineError> {
    if t0.im != T::zero() || !t0.re.is_finite() {
        return Err(EngineError::SingularStart(format!(
            "start time {t0} is not real"
        )));
    }
    initial_state_at(c, TimeParam::direct(t0), cfg)
}

/// As [`initial_state`], for a start time given in either chart.
pub fn initial_state_at<T: Real>(
    c: &Construction<T>,
    time: TimeParam<T>,
    cfg: &EngineConfig<T>,
) -> Result<ConstructionState<T>, EngineError> {
    if time.local.im != T::zero() {
        return Err(EngineError::SingularStart("start time is not real".into()));
    }
    let mut values: Vec<Value<T>> = Vec::with_capacity(c.nodes.len());
    let mut branch = c.initial_branches.iter();
    for id in 0..c.nodes.len() {
        let cand = compute_node(c, id, &values, &time, &cfg.tol)
            .map_err(|e| EngineError::SingularStart(degenerate(c, id, e).to_string()))?;
        let v = match cand {
            Candidates::One(v) => v,
            Candidates::Two(a, b) => {
                if projective_distance(&a, &b) < cfg.start_separation {
                    return Err(EngineError::SingularStart(format!(
                        "the two intersections of node {id} ({}) coincide at the start time",
                        c.nodes[id].name
                    )));
                }
                let (first, second) = order_candidates(a, b);
                let pick = *branch.next().expect("one branch per ambiguous node");
                Value::Point(if pick == 0 { first } else { second })
            }
        };
        values.push(v);
    }
    let state = ConstructionState { time, values };
    if !is_real_point(state.tracer(c), cfg.tol.tol_real) {
        return Err(EngineError::SingularStart(
            "tracer is not real at the start time".into(),
        ));
    }
    Ok(state)
}

/// Evaluates the construction at `time`, continuing each ambiguous node from
/// its value in `prev`.
pub fn evaluate<T: Real>(
    c: &Construction<T>,
    time: TimeParam<T>,
    prev: &ConstructionState<T>,
    cfg: &EngineConfig<T>,
) -> Result<Evaluation<T>, EngineError> {
    let mut values: Vec<Value<T>> = Vec::with_capacity(c.nodes.len());
    let mut margins = Vec::with_capacity(c.ambiguous.len());
    for id in 0..c.nodes.len() {
        let cand =
            compute_node(c, id, &values, &time, &cfg.tol).map_err(|e| degenerate(c, id, e))?;
        let v = match cand {
            Candidates::One(v) => v,
            Candidates::Two(a, b) => {
                let old = prev.values[id]
                    .as_point()
                    .expect("ambiguous nodes hold points");
                let (da, db) = (projective_distance(old, &a), projective_distance(old, &b));
                let separation = projective_distance(&a, &b);
                let (chosen, d_chosen, margin) = if da <= db {
                    (a, da, db - da)
                } else {
                    (b, db, da - db)
                };
                // Capped at half the separation, so that a small enough step
                // can always reach it.
                let floor = cfg.margin_floor.min(separation / T::lit(2.0));
                if separation > cfg.margin_floor
                    && (margin < floor || d_chosen > cfg.proximity_ratio * separation)
                {
                    return Err(EngineError::AmbiguousStep {
                        node: id,
                        margin: margin.to_f64_lossy(),
                    });
                }
                margins.push((id, margin));
                Value::Point(chosen)
            }
        };
        values.push(v);
    }
    Ok(Evaluation {
        state: ConstructionState { time, values },
        margins,
    })
}

/// Largest relative residual of the defining equations over all nodes.
pub fn consistency_residual<T: Real>(c: &Construction<T>, s: &ConstructionState<T>) -> T {
    use NodeKind::*;
    let pt = |i: NodeId| s.values[i].as_point().copied();
    let ln = |i: NodeId| s.values[i].as_line().copied();
    let ci = |i: NodeId| s.values[i].as_circle().copied();
    let inc = |l: HomLine<T>, p: HomPoint<T>| l.apply(&p).norm() / (l.norm() * p.norm());
    let mut worst = T::zero();
    for (id, node) in c.nodes.iter().enumerate() {
        let r = match node.kind {
            Join(p, q) => {
                let l = ln(id).unwrap();
                inc(l, pt(p).unwrap()).max(inc(l, pt(q).unwrap()))
            }
            Meet(l, m) => {
                let p = pt(id).unwrap();
                inc(ln(l).unwrap(), p).max(inc(ln(m).unwrap(), p))
            }
            PerpThrough { line, point } => {
                let a = ln(id).unwrap();
                let b = ln(line).unwrap();
                let ortho = (a.a * b.a + a.b * b.b).norm() / (a.norm() * b.norm());
                inc(a, pt(point).unwrap()).max(ortho)
            }
            CircleLineMeet { circle, line } => {
                let p = pt(id).unwrap();
                ci(circle)
                    .unwrap()
                    .relative_residual(&p)
                    .max(inc(ln(line).unwrap(), p))
            }
            CircleCircleMeet(a, b) => {
                let p = pt(id).unwrap();
                ci(a)
                    .unwrap()
                    .relative_residual(&p)
                    .max(ci(b).unwrap().relative_residual(&p))
            }
            Midpoint(p, q) => {
                let m = pt(id).unwrap();
                let (p, q) = (pt(p).unwrap(), pt(q).unwrap());
                let (Some((mx, my)), Some((px, py)), Some((qx, qy))) = (
                    m.to_affine(T::lit(1e-14)),
                    p.to_affine(T::lit(1e-14)),
                    q.to_affine(T::lit(1e-14)),
                ) else {
                    continue;
                };
                let half = cre(T::lit(0.5));
                let scale = T::one() + px.norm() + py.norm() + qx.norm() + qy.norm();
                ((mx - (px + qx) * half).norm() + (my - (py + qy) * half).norm()) / scale
            }
            Mover(MoverParam::PointOnCircle(circle)) => {
                ci(circle).unwrap().relative_residual(&pt(id).unwrap())
            }
            Mover(MoverParam::LineThroughPoint(p)) => inc(ln(id).unwrap(), pt(p).unwrap()),
            Mover(MoverParam::PointOnLine(l)) => inc(ln(l).unwrap(), pt(id).unwrap()),
            FreePoint(_) | FreeLine(_) | CircleCR { .. } => T::zero(),
        };
        worst = worst.max(r);
    }
    worst
}
