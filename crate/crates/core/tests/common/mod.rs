//! Randomized property checks shared by the `properties` and `acceptance`
//! test targets. Every check runs 1000 cases from a fixed seed.

#![allow(dead_code)]

use std::sync::OnceLock;

use detour_locus::bundled::{CONCHOID, FOURBAR, PASCAL, PROJLINE, WATT};
use detour_locus::construction::{
    consistency_residual, evaluate, initial_state, Chart, Construction, EngineConfig, TimeParam,
};
use detour_locus::io::emit::{emit_csv, parse_csv_rows, rows};
use detour_locus::io::parser::parse_construction;
use detour_locus::locus::{Locus, LocusMetadata, LocusPoint, Orientation, Variant};
use detour_locus::oracles::{
    angle_at, conic_through_five, hausdorff, linkage_oracle, polyline_circle_intersections,
    residual_implicit, ImplicitCurve, Linkage,
};
use detour_locus::projective::{
    circle_circle_meet, circle_line_meet, join, meet, midpoint, normalize, perpendicular_through,
    projective_distance, Circle, HomLine, HomPoint, Homogeneous, Tolerances,
};
use detour_locus::tracer::{bisect_between, trace, trace_observed, TraceConfig, TraceError};
use num_complex::Complex64 as C;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 1000;

pub type Property = fn() -> Result<(), String>;

fn run<S: Strategy>(
    seed: u64,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &bytes));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn tol() -> Tolerances<f64> {
    Tolerances::default()
}

fn coord() -> impl Strategy<Value = f64> {
    -10.0f64..10.0
}

fn complex() -> impl Strategy<Value = C> {
    (coord(), coord()).prop_map(|(a, b)| C::new(a, b))
}

/// Mostly real, sometimes complex scalar.
fn maybe_complex() -> impl Strategy<Value = C> {
    prop_oneof![3 => coord().prop_map(|a| C::new(a, 0.0)), 1 => complex()]
}

fn point() -> impl Strategy<Value = HomPoint<f64>> {
    (maybe_complex(), maybe_complex(), maybe_complex()).prop_map(|(x, y, z)| HomPoint::new(x, y, z))
}

fn line() -> impl Strategy<Value = HomLine<f64>> {
    (maybe_complex(), maybe_complex(), maybe_complex()).prop_map(|(a, b, c)| HomLine::new(a, b, c))
}

fn circle() -> impl Strategy<Value = Circle<f64>> {
    (
        maybe_complex(),
        maybe_complex(),
        maybe_complex(),
        0.1f64..10.0,
    )
        .prop_map(|(x, y, r2i, r)| {
            Circle::new(
                HomPoint::new(x, y, C::new(1.0, 0.0)),
                C::new(r * r, 0.0) + r2i * 0.1,
            )
        })
}

fn incidence(l: &HomLine<f64>, p: &HomPoint<f64>) -> f64 {
    l.apply(p).norm() / (l.norm() * p.norm())
}

fn pair_distance(a: (HomPoint<f64>, HomPoint<f64>), b: (HomPoint<f64>, HomPoint<f64>)) -> f64 {
    let straight = projective_distance(&a.0, &b.0).max(projective_distance(&a.1, &b.1));
    let crossed = projective_distance(&a.0, &b.1).max(projective_distance(&a.1, &b.0));
    straight.min(crossed)
}

pub fn join_meet_incidence() -> Result<(), String> {
    run(
        0x5eed_0001,
        (point(), point(), line(), line()),
        |(p, q, l, m)| {
            if projective_distance(&p, &q) > 1e-3 {
                let j = join(&p, &q, &tol()).map_err(|e| TestCaseError::fail(e.to_string()))?;
                let r = incidence(&j, &p).max(incidence(&j, &q));
                check(r <= 1e-12, || format!("join incidence {r:e}"))?;
            }
            if projective_distance(&l, &m) > 1e-3 {
                let x = meet(&l, &m, &tol()).map_err(|e| TestCaseError::fail(e.to_string()))?;
                let r = incidence(&l, &x).max(incidence(&m, &x));
                check(r <= 1e-12, || format!("meet incidence {r:e}"))?;
            }
            Ok(())
        },
    )
}

pub fn intersection_residuals() -> Result<(), String> {
    run(0x5eed_0002, (circle(), circle(), line()), |(c1, c2, l)| {
        if let Ok((a, b)) = circle_line_meet(&c1, &l, &tol()) {
            for p in [a, b] {
                let r = c1.relative_residual(&p).max(incidence(&l, &p));
                check(r <= 1e-10, || format!("circle-line residual {r:e}"))?;
            }
        }
        if let Ok((a, b)) = circle_circle_meet(&c1, &c2, &tol()) {
            for p in [a, b] {
                let r = c1.relative_residual(&p).max(c2.relative_residual(&p));
                check(r <= 1e-10, || format!("circle-circle residual {r:e}"))?;
            }
        }
        Ok(())
    })
}

pub fn conjugation_equivariance() -> Result<(), String> {
    run(
        0x5eed_0003,
        (point(), point(), line(), line(), circle(), circle()),
        |(p, q, l, m, c1, c2)| {
            let t = tol();
            let single = |a: Option<HomPoint<f64>>, b: Option<HomPoint<f64>>| match (a, b) {
                (Some(a), Some(b)) => projective_distance(&a.conj(), &b),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            };
            let line_d = |a: Option<HomLine<f64>>, b: Option<HomLine<f64>>| match (a, b) {
                (Some(a), Some(b)) => projective_distance(&a.conj(), &b),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            };
            let pair =
                |a: Option<(HomPoint<f64>, HomPoint<f64>)>,
                 b: Option<(HomPoint<f64>, HomPoint<f64>)>| match (a, b) {
                    (Some(a), Some(b)) => pair_distance((a.0.conj(), a.1.conj()), b),
                    (None, None) => 0.0,
                    _ => f64::INFINITY,
                };
            let d = [
                line_d(join(&p, &q, &t).ok(), join(&p.conj(), &q.conj(), &t).ok()),
                single(meet(&l, &m, &t).ok(), meet(&l.conj(), &m.conj(), &t).ok()),
                line_d(
                    perpendicular_through(&l, &p, &t).ok(),
                    perpendicular_through(&l.conj(), &p.conj(), &t).ok(),
                ),
                single(
                    midpoint(&p, &q, &t).ok(),
                    midpoint(&p.conj(), &q.conj(), &t).ok(),
                ),
                pair(
                    circle_line_meet(&c1, &l, &t).ok(),
                    circle_line_meet(&c1.conj(), &l.conj(), &t).ok(),
                ),
                pair(
                    circle_circle_meet(&c1, &c2, &t).ok(),
                    circle_circle_meet(&c1.conj(), &c2.conj(), &t).ok(),
                ),
            ];
            check(d.iter().all(|&x| x <= 1e-10), || {
                format!("conjugate mismatch {d:?}")
            })
        },
    )
}

pub fn distance_pseudometric() -> Result<(), String> {
    run(0x5eed_0004, (point(), point(), complex()), |(p, q, k)| {
        check(
            projective_distance(&p, &q) == projective_distance(&q, &p),
            || "asymmetric".into(),
        )?;
        check(projective_distance(&p, &p) == 0.0, || "d(p, p) != 0".into())?;
        if k.norm() > 1e-3 {
            let d = projective_distance(&p, &p.scale(k));
            check(d <= 1e-14, || format!("d(p, kp) = {d:e}"))?;
        }
        let d = projective_distance(&p, &q);
        let (a, b) = (
            normalize(&p).unwrap().coords(),
            normalize(&q).unwrap().coords(),
        );
        // proportional iff every 2x2 minor vanishes
        let minors = [(0, 1), (1, 2), (0, 2)]
            .iter()
            .map(|&(i, j)| (a[i] * b[j] - a[j] * b[i]).norm())
            .fold(0.0, f64::max);
        check(d > 0.0 || minors <= 1e-12, || {
            format!("distance 0 between distinct points, minors {minors:e}")
        })
    })
}

pub fn normalize_idempotent() -> Result<(), String> {
    run(0x5eed_0005, (point(), complex()), |(p, k)| {
        let p = p.scale(k);
        let Ok(n) = normalize(&p) else {
            return Ok(());
        };
        let nn = normalize(&n).unwrap();
        check(nn == n, || format!("{n:?} renormalized to {nn:?}"))?;
        let d = projective_distance(&n, &p);
        check(d <= 1e-14, || format!("normalize moved the point by {d:e}"))
    })
}

#[derive(Debug, Clone, Copy)]
pub enum Example {
    Projline,
    Pascal,
    Conchoid,
    Watt,
    Fourbar,
}

impl Example {
    pub const ALL: [Example; 5] = [
        Example::Projline,
        Example::Pascal,
        Example::Conchoid,
        Example::Watt,
        Example::Fourbar,
    ];

    pub fn source(self) -> &'static str {
        match self {
            Example::Projline => PROJLINE,
            Example::Pascal => PASCAL,
            Example::Conchoid => CONCHOID,
            Example::Watt => WATT,
            Example::Fourbar => FOURBAR,
        }
    }

    pub fn construction(self) -> Construction<f64> {
        parse_construction(self.source()).expect("bundled example parses")
    }

    pub fn curve(self) -> ImplicitCurve {
        match self {
            Example::Projline => ImplicitCurve::projline(),
            Example::Pascal => ImplicitCurve::conic(
                conic_through_five(&[
                    (-2.0, 0.0),
                    (-1.0, 1.5),
                    (1.0, 1.8),
                    (2.2, 0.3),
                    (0.5, -1.5),
                ])
                .unwrap(),
            ),
            Example::Conchoid => ImplicitCurve::conchoid(2.0, 2.0),
            Example::Watt => ImplicitCurve::watt(2.0, 2.5, 1.5),
            Example::Fourbar => ImplicitCurve::fourbar_sextic(),
        }
    }
}

fn example() -> impl Strategy<Value = Example> {
    prop::sample::select(Example::ALL.to_vec())
}

fn engine() -> EngineConfig<f64> {
    TraceConfig::<f64>::default().engine()
}

/// A state reached from a real start by one complex step, if the engine
/// accepts both.
fn random_state(
    ex: Example,
    t0: f64,
    step: C,
) -> Option<(
    Construction<f64>,
    detour_locus::construction::ConstructionState<f64>,
    C,
)> {
    let c = ex.construction();
    let s0 = initial_state(&c, C::new(t0, 0.0), &engine()).ok()?;
    let t = C::new(t0, 0.0) + step;
    Some((c, s0, t))
}

fn small_step() -> impl Strategy<Value = C> {
    (0.0f64..0.05, 0.0f64..std::f64::consts::TAU).prop_map(|(r, a)| C::from_polar(r, a))
}

pub fn reevaluation_consistency() -> Result<(), String> {
    run(
        0x5eed_0011,
        (example(), -3.0f64..3.0, small_step()),
        |(ex, t0, step)| {
            let Some((c, s0, t)) = random_state(ex, t0, step) else {
                return Ok(());
            };
            let r0 = consistency_residual(&c, &s0);
            check(r0 <= 1e-9, || format!("{ex:?} start residual {r0:e}"))?;
            if let Ok(ev) = evaluate(&c, TimeParam::direct(t), &s0, &engine()) {
                let r = consistency_residual(&c, &ev.state);
                check(r <= 1e-9, || format!("{ex:?} residual {r:e} at {t}"))?;
            }
            Ok(())
        },
    )
}

pub fn evaluation_conjugation_symmetry() -> Result<(), String> {
    run(
        0x5eed_0012,
        (example(), -3.0f64..3.0, small_step()),
        |(ex, t0, step)| {
            let Some((c, s0, t)) = random_state(ex, t0, step) else {
                return Ok(());
            };
            let a = evaluate(&c, TimeParam::direct(t), &s0, &engine());
            let b = evaluate(&c, TimeParam::direct(t.conj()), &s0.conj(), &engine());
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    let d = a.state.conj().distance(&b.state);
                    check(d <= 1e-10, || format!("{ex:?} conjugate distance {d:e}"))
                }
                (Err(_), Err(_)) => Ok(()),
                (a, b) => Err(TestCaseError::fail(format!(
                    "{ex:?}: {:?} vs {:?}",
                    a.err(),
                    b.err()
                ))),
            }
        },
    )
}

pub fn branch_stability() -> Result<(), String> {
    run(
        0x5eed_0013,
        (example(), -3.0f64..3.0, 0.0f64..std::f64::consts::TAU),
        |(ex, t0, angle)| {
            let c = ex.construction();
            let Ok(s0) = initial_state(&c, C::new(t0, 0.0), &engine()) else {
                return Ok(());
            };
            let dir = C::from_polar(1.0, angle);
            let mut last = f64::INFINITY;
            for h in [1e-3, 1e-5, 1e-7] {
                let Ok(ev) = evaluate(
                    &c,
                    TimeParam::direct(C::new(t0, 0.0) + dir * h),
                    &s0,
                    &engine(),
                ) else {
                    return Ok(());
                };
                let d = ev.state.distance(&s0);
                check(d <= last.max(1e-12), || {
                    format!("{ex:?} at t0={t0}: distance {d:e} after {last:e}")
                })?;
                last = d;
            }
            check(last <= 1e-4, || {
                format!("{ex:?} at t0={t0}: step 1e-7 moved {last:e}")
            })
        },
    )
}

pub fn evaluation_determinism() -> Result<(), String> {
    run(
        0x5eed_0014,
        (example(), -3.0f64..3.0, small_step()),
        |(ex, t0, step)| {
            let Some((c, s0, t)) = random_state(ex, t0, step) else {
                return Ok(());
            };
            let again = initial_state(&c, C::new(t0, 0.0), &engine()).unwrap();
            check(again == s0, || "initial state differs".into())?;
            let a = evaluate(&c, TimeParam::direct(t), &s0, &engine());
            let b = evaluate(&c, TimeParam::direct(t), &s0, &engine());
            check(a == b, || format!("{ex:?} evaluation differs"))
        },
    )
}

#[derive(Debug, Clone)]
struct Run {
    ex: Example,
    eps: f64,
    steps: usize,
}

fn trace_run() -> impl Strategy<Value = Run> {
    (
        example(),
        0.03f64..0.1,
        prop::sample::select(vec![16usize, 24, 32, 48]),
    )
        .prop_map(|(ex, eps, steps)| Run { ex, eps, steps })
}

fn config(r: &Run) -> TraceConfig<f64> {
    TraceConfig {
        eps: r.eps,
        detour_steps: r.steps,
        ..TraceConfig::default()
    }
}

fn traced(r: &Run, cfg: &TraceConfig<f64>) -> Result<Locus<f64>, TestCaseError> {
    trace(&r.ex.construction(), 0.0, cfg).map_err(|e| TestCaseError::fail(format!("{r:?}: {e}")))
}

pub fn conjugate_run_symmetry() -> Result<(), String> {
    run(0x5eed_0021, trace_run(), |r| {
        let c = r.ex.construction();
        let (mut acw, mut cw) = (Vec::new(), Vec::new());
        let cfg = config(&r);
        trace_observed(&c, 0.0, &cfg, |s| acw.push(s.clone()))
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let cfg = cfg.with_orientation(Orientation::Clockwise);
        trace_observed(&c, 0.0, &cfg, |s| cw.push(s.clone()))
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        check(acw.len() == cw.len(), || {
            format!("{r:?}: {} vs {} substeps", acw.len(), cw.len())
        })?;
        let d = acw
            .iter()
            .zip(&cw)
            .map(|(a, b)| a.conj().distance(b))
            .fold(0.0, f64::max);
        check(d <= 1e-8, || {
            format!("{r:?}: conjugate substep distance {d:e}")
        })
    })
}

pub fn orientation_independence() -> Result<(), String> {
    run(0x5eed_0022, trace_run(), |r| {
        let cfg = config(&r);
        let a = traced(&r, &cfg)?;
        let b = traced(&r, &cfg.clone().with_orientation(Orientation::Clockwise))?;
        let density = a.sampling_density().max(b.sampling_density());
        let h = density / 4.0;
        let d = hausdorff(&a.resampled(h), &b.resampled(h));
        check(d <= 2.0 * density, || {
            format!("{r:?}: hausdorff {d:e} > 2 x {density:e}")
        })
    })
}

/// Detour budget for randomized traces; termination is not guaranteed for
/// every configuration, so runs that exhaust it are checked on their partial
/// locus.
const RANDOM_MAX_DETOURS: usize = 3000;

fn traced_or_partial(r: &Run, cfg: &TraceConfig<f64>) -> Result<Locus<f64>, TestCaseError> {
    match trace(&r.ex.construction(), 0.0, cfg) {
        Ok(l) => Ok(l),
        Err(TraceError::NonTerminating { partial, .. }) => Ok(*partial),
        Err(e) => Err(TestCaseError::fail(format!("{r:?}: {e}"))),
    }
}

pub fn locus_residual() -> Result<(), String> {
    run(0x5eed_0023, (trace_run(), prop::bool::ANY), |(r, b)| {
        let variant = if b { Variant::B } else { Variant::A };
        let cfg = TraceConfig {
            max_detours: RANDOM_MAX_DETOURS,
            ..config(&r).with_variant(variant)
        };
        let l = traced_or_partial(&r, &cfg)?;
        let rep = residual_implicit(&r.ex.curve(), &l);
        check(rep.max <= 1e-6, || {
            format!("{r:?} {variant}: residual {:e}", rep.max)
        })
    })
}

/// Parameters where the Watt crank puts `C` at distance `5.5` or `0.5` from
/// the far pivot, from `|CB|² = 22.25 − 20·cos θ` and `cos θ = (1 − t²)/(1 + t²)`.
fn watt_tangencies() -> Vec<C> {
    let mut roots = Vec::new();
    for r2 in [5.5f64 * 5.5, 0.5 * 0.5] {
        let t2 = C::new((r2 - 2.25) / (42.25 - r2), 0.0);
        let t = t2.sqrt();
        roots.push(t);
        roots.push(-t);
    }
    roots
}

pub fn watt_bounce_correctness() -> Result<(), String> {
    let roots = watt_tangencies();
    run(
        0x5eed_0024,
        (
            0.03f64..0.1,
            prop::sample::select(vec![16usize, 24, 32, 48]),
        ),
        |(eps, steps)| {
            let r = Run {
                ex: Example::Watt,
                eps,
                steps,
            };
            let l = traced(&r, &config(&r))?;
            let discs = &l.metadata.reversals;
            check(discs.len() >= 2 && discs.len() % 2 == 0, || {
                format!("{r:?}: {} reversals", discs.len())
            })?;
            for d in discs {
                let hit = roots.iter().any(|&t| {
                    let local = match d.chart {
                        Chart::Direct => t,
                        Chart::Inverted => -1.0 / t,
                    };
                    (local - d.center).norm() <= d.radius * (1.0 + 1e-9)
                });
                check(hit, || {
                    format!("{r:?}: reversal disc {d:?} holds no tangency")
                })?;
            }
            Ok(())
        },
    )
}

pub fn loop_closure() -> Result<(), String> {
    run(0x5eed_0025, (trace_run(), prop::bool::ANY), |(r, b)| {
        let variant = if b { Variant::B } else { Variant::A };
        let cfg = TraceConfig {
            max_detours: RANDOM_MAX_DETOURS,
            ..config(&r).with_variant(variant)
        };
        let l = traced_or_partial(&r, &cfg)?;
        if !l.metadata.closed {
            return Ok(());
        }
        let (p, q) = (l.first().unwrap(), l.last().unwrap());
        let d = projective_distance(
            &HomPoint::real(p.coords[0], p.coords[1], p.coords[2]),
            &HomPoint::real(q.coords[0], q.coords[1], q.coords[2]),
        );
        check(d <= cfg.tolerances.tol_return, || {
            format!("{r:?} {variant}: ends {d:e} apart")
        })
    })
}

fn free_point_source() -> impl Strategy<Value = String> {
    let num =
        (-1000i32..1000, 0u32..4).prop_map(|(m, e)| format!("{}", m as f64 / 10f64.powi(e as i32)));
    (prop::collection::vec((num.clone(), num), 2), 0.1f64..5.0, 0usize..3).prop_map(|(p, r, pad)| {
        let sp = " ".repeat(pad);
        format!(
            "# random\npoint P ={sp}({}, {})\npoint Q = ({},{sp}{})\ncircle k = circle(P, {r})\n\
             point M = mover on_circle(k)\nline l = join(M, Q)\n\npoint X = meet_cl(k, l, branch=1)\n\
             trace mover=M tracer=X\n",
            p[0].0, p[0].1, p[1].0, p[1].1
        )
    })
}

pub fn parse_determinism() -> Result<(), String> {
    run(0x5eed_0031, free_point_source(), |src| {
        let a = parse_construction::<f64>(&src);
        let b = parse_construction::<f64>(&src);
        check(a == b, || format!("parses differ for\n{src}"))?;
        check(a.is_ok(), || format!("{src}\n{:?}", a.err()))
    })
}

/// Node counts of the bundled examples, one node per construction step.
pub const NODE_COUNTS: [(Example, usize); 5] = [
    (Example::Projline, 6),
    (Example::Pascal, 16),
    (Example::Conchoid, 6),
    (Example::Watt, 8),
    (Example::Fourbar, 8),
];

pub fn bundled_examples_parse() -> Result<(), String> {
    let noise = prop::collection::vec(prop::sample::select(vec!["", "# note", "   "]), 0..4);
    run(
        0x5eed_0032,
        (prop::sample::select(NODE_COUNTS.to_vec()), noise),
        |((ex, n), noise)| {
            let mut src = noise.join("\n");
            src.push('\n');
            src.push_str(ex.source());
            let c = parse_construction::<f64>(&src)
                .map_err(|e| TestCaseError::fail(format!("{ex:?}: {e}")))?;
            check(c.nodes().len() == n, || {
                format!("{ex:?}: {} nodes", c.nodes().len())
            })
        },
    )
}

fn any_finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        prop::num::f64::NORMAL
            | prop::num::f64::SUBNORMAL
            | prop::num::f64::ZERO
            | prop::num::f64::POSITIVE
            | prop::num::f64::NEGATIVE,
        -10.0f64..10.0,
    ]
    .prop_filter("finite", |v| v.is_finite())
}

pub fn csv_round_trip() -> Result<(), String> {
    run(
        0x5eed_0033,
        prop::collection::vec(
            prop::collection::vec(
                [any_finite(), any_finite(), any_finite(), any_finite()],
                1..20,
            ),
            1..4,
        ),
        |arcs| {
            let locus = Locus::new(
                arcs.iter()
                    .map(|a| {
                        a.iter()
                            .map(|v| LocusPoint::finite(v[0], v[1], C::new(v[2], v[3])))
                            .collect()
                    })
                    .collect(),
                LocusMetadata {
                    variant: Variant::A,
                    eps: 0.05,
                    detour_steps: 32,
                    orientation: Orientation::Anticlockwise,
                    reversal_count: 0,
                    detours_used: 0,
                    closed: true,
                    reversals: vec![],
                },
            );
            let back = parse_csv_rows(&emit_csv(&locus));
            let flat: Vec<[f64; 4]> = back.concat();
            let expected = rows(&locus);
            check(flat.len() == expected.len(), || "row count".into())?;
            for (a, b) in flat.iter().zip(&expected) {
                // -0 is written as 0
                let same = a
                    .iter()
                    .zip(b)
                    .all(|(x, y)| x.to_bits() == y.to_bits() || (*x == 0.0 && *y == 0.0));
                check(same, || format!("{a:?} read back for {b:?}"))?;
            }
            check(back.len() == arcs.len(), || {
                format!("{} arcs read back", back.len())
            })
        },
    )
}

fn watt_oracle() -> &'static [(f64, f64)] {
    static ORACLE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    ORACLE.get_or_init(|| {
        linkage_oracle(
            &Linkage {
                ground: 4.0,
                crank: 2.5,
                coupler: 3.0,
                rocker: 2.5,
            },
            2000,
        )
        .unwrap()
    })
}

pub fn watt_oracle_agreement() -> Result<(), String> {
    run(
        0x5eed_0041,
        (
            0.03f64..0.1,
            prop::sample::select(vec![16usize, 24, 32, 48]),
        ),
        |(eps, steps)| {
            let r = Run {
                ex: Example::Watt,
                eps,
                steps,
            };
            let l = traced(&r, &config(&r))?;
            let d = hausdorff(&l.resampled(0.01), watt_oracle());
            check(d <= 3.0 * eps, || format!("{r:?}: hausdorff {d:e}"))
        },
    )
}

fn plane_point() -> impl Strategy<Value = (f64, f64)> {
    (-3.0f64..3.0, -3.0f64..3.0)
}

pub fn conic_normalization() -> Result<(), String> {
    run(
        0x5eed_0042,
        (
            prop::array::uniform5(plane_point()),
            any::<prop::sample::Index>(),
        ),
        |(pts, rot)| {
            let Ok(c) = conic_through_five(&pts) else {
                return Ok(());
            };
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            check((norm - 1.0).abs() <= 1e-12, || format!("norm {norm}"))?;
            let lead = c.iter().find(|v| **v != 0.0).copied().unwrap_or(0.0);
            check(lead > 0.0, || format!("leading coefficient {lead}"))?;
            check(conic_through_five(&pts) == Ok(c), || {
                "not reproducible".into()
            })?;
            let mut rotated = pts;
            rotated.rotate_left(rot.index(5));
            if let Ok(c2) = conic_through_five(&rotated) {
                let d = c
                    .iter()
                    .zip(&c2)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                check(d <= 1e-6, || {
                    format!("point order changes the conic by {d:e}")
                })?;
            }
            Ok(())
        },
    )
}

/// Angle `DEF` with `E` at the origin, `F = (1, 0)` and `|ED| = 1`; the
/// conchoid of base line `EF` with pole `D` and distance `1` cuts the unit
/// circle at `G`, and `DG` meets the base line at `H`.
pub fn trisect(deg: f64) -> Result<f64, String> {
    let phi = deg.to_radians();
    let d = 1.0;
    let (dx, dy) = (d * phi.cos(), d * phi.sin());
    let src = format!(
        "line l = (0, 1, 0)\npoint D = ({dx}, {dy})\npoint A = mover on_line(l)\ncircle c0 = circle(A, {d})\n\
         line h = join(A, D)\npoint C = meet_cl(c0, h, branch=0)\ntrace mover=A tracer=C\n"
    );
    let c = parse_construction::<f64>(&src).map_err(|e| e.to_string())?;
    let cfg = TraceConfig::default();
    let l = trace(&c, 0.0, &cfg).map_err(|e| e.to_string())?;
    if !l.metadata.closed {
        return Err(format!("{deg} degrees: conchoid not closed"));
    }
    let runs = l.finite_runs();
    let base_point = |g: (f64, f64)| (dx + dy / (dy - g.1) * (g.0 - dx), 0.0);
    let mut found = Vec::new();
    for hit in polyline_circle_intersections(&l, (0.0, 0.0), d) {
        let p = hit.point;
        if p.1 <= 1e-9 || (p.0 - dx).hypot(p.1 - dy) <= 0.01 || base_point(p).0 >= 0.0 {
            continue;
        }
        let (a, b) = (
            &runs[hit.polyline][hit.segment],
            &runs[hit.polyline][hit.segment + 1],
        );
        let (Some(sa), Some(sb)) = (&a.state, &b.state) else {
            return Err(format!("{deg}: hit without states"));
        };
        let refined = bisect_between(&c, sa, sb, &cfg, &|p| {
            let (x, y) = p.to_affine(1e-12).expect("finite tracer");
            x.re * x.re + y.re * y.re - d * d
        })
        .map_err(|e| e.to_string())?
        .ok_or_else(|| format!("{deg}: no sign change on the hit segment"))?;
        let (gx, gy) = refined
            .tracer(&c)
            .to_affine(1e-12)
            .ok_or("tracer at infinity")?;
        found.push((gx.re, gy.re));
    }
    let [g] = found[..] else {
        return Err(format!("{deg} degrees: {} candidates for G", found.len()));
    };
    let angle = angle_at(base_point(g), (0.0, 0.0), g).map_err(|e| e.to_string())?;
    Ok((angle - phi / 3.0).abs())
}

pub fn trisection_random() -> Result<(), String> {
    run(0x5eed_0043, 17.0f64..85.0, |deg| {
        let err = trisect(deg).map_err(TestCaseError::fail)?;
        check(err <= 1e-6, || format!("{deg} degrees: error {err:e} rad"))
    })
}

pub fn all() -> Vec<(&'static str, Property)> {
    vec![
        ("join_meet_incidence", join_meet_incidence),
        ("intersection_residuals", intersection_residuals),
        ("conjugation_equivariance", conjugation_equivariance),
        ("distance_pseudometric", distance_pseudometric),
        ("normalize_idempotent", normalize_idempotent),
        ("reevaluation_consistency", reevaluation_consistency),
        (
            "evaluation_conjugation_symmetry",
            evaluation_conjugation_symmetry,
        ),
        ("branch_stability", branch_stability),
        ("evaluation_determinism", evaluation_determinism),
        ("conjugate_run_symmetry", conjugate_run_symmetry),
        ("orientation_independence", orientation_independence),
        ("locus_residual", locus_residual),
        ("watt_bounce_correctness", watt_bounce_correctness),
        ("loop_closure", loop_closure),
        ("parse_determinism", parse_determinism),
        ("bundled_examples_parse", bundled_examples_parse),
        ("csv_round_trip", csv_round_trip),
        ("watt_oracle_agreement", watt_oracle_agreement),
        ("conic_normalization", conic_normalization),
        ("trisection_random", trisection_random),
    ]
}
