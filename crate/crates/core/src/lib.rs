//! Locus generation for dynamic geometry constructions.
//!
//! A construction is a straight-line program over complex projective points,
//! lines and circles driven by one mover. The tracer's locus is generated by
//! letting the mover's time parameter take small complex detours around the
//! real steps, which carries every ambiguous choice through singular real
//! times by analytic continuation.
//!
//! ```
//! use detour_locus::{bundled, io::parser::parse_construction, tracer::{trace, TraceConfig}};
//!
//! let c = parse_construction::<f64>(bundled::PROJLINE).unwrap();
//! let locus = trace(&c, 0.0, &TraceConfig::default()).unwrap();
//! assert!(locus.metadata.closed);
//! assert!(locus.finite_points().iter().all(|&(x, _)| (x - 2.0).abs() < 1e-9));
//! ```

pub mod bundled;
pub mod construction;
pub mod io;
pub mod locus;
pub mod oracles;
pub mod projective;
pub mod scalar;
pub mod tracer;

pub type HomPoint64 = projective::HomPoint<f64>;
pub type HomLine64 = projective::HomLine<f64>;
pub type Circle64 = projective::Circle<f64>;
pub type Construction64 = construction::Construction<f64>;
pub type Locus64 = locus::Locus<f64>;
pub type TraceConfig64 = tracer::TraceConfig<f64>;

pub type HomPoint32 = projective::HomPoint<f32>;
pub type HomLine32 = projective::HomLine<f32>;
pub type Circle32 = projective::Circle<f32>;
pub type Construction32 = construction::Construction<f32>;
pub type Locus32 = locus::Locus<f32>;
pub type TraceConfig32 = tracer::TraceConfig<f32>;
