//! The `locus` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bundled::EXAMPLES;
use crate::construction::{Construction, NodeKind};
use crate::io::emit::{emit_csv, emit_json, emit_svg};
use crate::io::parser::parse_construction;
use crate::locus::{Locus, Orientation, Variant};
use crate::oracles::{conic_through_five, residual_implicit, ImplicitCurve};
use crate::tracer::{trace, TraceConfig, TraceError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NON_TERMINATING: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "locus",
    version,
    about = "Trace loci of geometric constructions by complex detours"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace a construction file and write the locus.
    Trace {
        file: PathBuf,
        #[command(flatten)]
        opts: TraceOpts,
        /// Output as FMT:PATH with FMT one of csv, svg, json; repeatable.
        #[arg(long = "out", value_parser = parse_output)]
        out: Vec<Output>,
    },
    /// Trace a construction file and check the locus against a curve equation.
    Validate {
        file: PathBuf,
        #[command(flatten)]
        opts: TraceOpts,
        /// projline, conchoid:A,B, watt:A,B,C, fourbar-sextic or conic5[:X1,Y1,...,X5,Y5].
        #[arg(long)]
        curve: String,
        #[arg(long, default_value_t = 1e-6)]
        max_residual: f64,
    },
    /// Write the bundled example construction files.
    Examples {
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

#[derive(Args, Debug)]
struct TraceOpts {
    #[arg(long, value_enum, default_value = "A")]
    variant: VariantArg,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = 32)]
    detour_steps: usize,
    #[arg(long, value_enum, default_value = "acw")]
    orientation: OrientationArg,
    #[arg(long, default_value_t = 200_000)]
    max_detours: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    t0: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VariantArg {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum OrientationArg {
    Acw,
    Cw,
}

impl TraceOpts {
    fn config(&self) -> TraceConfig<f64> {
        TraceConfig {
            variant: match self.variant {
                VariantArg::A => Variant::A,
                VariantArg::B => Variant::B,
            },
            eps: self.eps,
            detour_steps: self.detour_steps,
            orientation: match self.orientation {
                OrientationArg::Acw => Orientation::Anticlockwise,
                OrientationArg::Cw => Orientation::Clockwise,
            },
            max_detours: self.max_detours,
            ..TraceConfig::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Svg,
    Json,
}

#[derive(Clone, Debug)]
struct Output {
    format: Format,
    path: PathBuf,
}

fn parse_output(s: &str) -> Result<Output, String> {
    let (fmt, path) = s
        .split_once(':')
        .ok_or_else(|| format!("expected FMT:PATH, got `{s}`"))?;
    let format = match fmt {
        "csv" => Format::Csv,
        "svg" => Format::Svg,
        "json" => Format::Json,
        _ => return Err(format!("unknown output format `{fmt}`")),
    };
    if path.is_empty() {
        return Err("empty output path".into());
    }
    Ok(Output {
        format,
        path: PathBuf::from(path),
    })
}

/// Builds the curve named on the command line.
fn parse_curve(arg: &str, c: &Construction<f64>) -> Result<ImplicitCurve, String> {
    let (name, params) = match arg.split_once(':') {
        Some((n, p)) => {
            let v: Result<Vec<f64>, _> = p.split(',').map(|x| x.trim().parse::<f64>()).collect();
            (
                n,
                v.map_err(|e| format!("bad curve parameter in `{arg}`: {e}"))?,
            )
        }
        None => (arg, vec![]),
    };
    let arity = |n: usize| {
        if params.len() == n {
            Ok(())
        } else {
            Err(format!(
                "curve `{name}` takes {n} parameters, got {}",
                params.len()
            ))
        }
    };
    match name {
        "projline" => arity(0).map(|_| ImplicitCurve::projline()),
        "fourbar-sextic" => arity(0).map(|_| ImplicitCurve::fourbar_sextic()),
        "conchoid" => arity(2).map(|_| ImplicitCurve::conchoid(params[0], params[1])),
        "watt" => arity(3).map(|_| ImplicitCurve::watt(params[0], params[1], params[2])),
        "conic5" => {
            let pts: Vec<(f64, f64)> = if params.is_empty() {
                c.nodes()
                    .iter()
                    .filter_map(|n| match &n.kind {
                        NodeKind::FreePoint(p) => p.to_affine(1e-12).map(|(x, y)| (x.re, y.re)),
                        _ => None,
                    })
                    .take(5)
                    .collect()
            } else {
                arity(10)?;
                params.chunks(2).map(|w| (w[0], w[1])).collect()
            };
            let pts: [(f64, f64); 5] = pts
                .try_into()
                .map_err(|_| "conic5 needs five points".to_string())?;
            conic_through_five(&pts)
                .map(ImplicitCurve::conic)
                .map_err(|e| e.to_string())
        }
        _ => Err(format!("unknown curve `{name}`")),
    }
}

fn load(file: &Path, err: &mut dyn Write) -> Result<Construction<f64>, i32> {
    let text = std::fs::read_to_string(file).map_err(|e| {
        let _ = writeln!(err, "error: cannot read {}: {e}", file.display());
        EXIT_FAILURE
    })?;
    parse_construction(&text).map_err(|e| {
        let _ = writeln!(err, "{}:{e}", file.display());
        EXIT_PARSE
    })
}

fn run_trace(
    c: &Construction<f64>,
    opts: &TraceOpts,
    err: &mut dyn Write,
) -> Result<Locus<f64>, i32> {
    trace(c, opts.t0, &opts.config()).map_err(|e| {
        let _ = writeln!(err, "error: {e}");
        match e {
            TraceError::NonTerminating { .. } => EXIT_NON_TERMINATING,
            _ => EXIT_FAILURE,
        }
    })
}

fn write_outputs(locus: &Locus<f64>, outs: &[Output], err: &mut dyn Write) -> Result<(), i32> {
    for o in outs {
        let text = match o.format {
            Format::Csv => emit_csv(locus),
            Format::Json => emit_json(locus),
            Format::Svg => emit_svg(locus, 800.0, 600.0, 0.05).map_err(|e| {
                let _ = writeln!(err, "error: {e}");
                EXIT_FAILURE
            })?,
        };
        std::fs::write(&o.path, text).map_err(|e| {
            let _ = writeln!(err, "error: cannot write {}: {e}", o.path.display());
            EXIT_FAILURE
        })?;
    }
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), i32> {
    match cli.command {
        Command::Trace {
            file,
            opts,
            out: outs,
        } => {
            let c = load(&file, err)?;
            let locus = run_trace(&c, &opts, err)?;
            write_outputs(&locus, &outs, err)?;
            let m = &locus.metadata;
            let _ = writeln!(
                out,
                "points={} arcs={} detours={} reversals={} closed={}",
                locus.len(),
                locus.arcs.len(),
                m.detours_used,
                m.reversal_count,
                m.closed
            );
            Ok(())
        }
        Command::Validate {
            file,
            opts,
            curve,
            max_residual,
        } => {
            let c = load(&file, err)?;
            let curve = parse_curve(&curve, &c).map_err(|e| {
                let _ = writeln!(err, "error: {e}");
                EXIT_FAILURE
            })?;
            let locus = run_trace(&c, &opts, err)?;
            let r = residual_implicit(&curve, &locus);
            let pass = r.max <= max_residual;
            let _ = writeln!(
                out,
                "{}: max residual {:e} over {} points ({} at infinity skipped), limit {:e}: {}",
                curve.name,
                r.max,
                r.evaluated,
                r.infinite_skipped,
                max_residual,
                if pass { "pass" } else { "FAIL" }
            );
            if pass {
                Ok(())
            } else {
                Err(EXIT_FAILURE)
            }
        }
        Command::Examples { dir } => {
            for e in &EXAMPLES {
                let path = dir.join(e.file_name);
                std::fs::write(&path, e.source).map_err(|er| {
                    let _ = writeln!(err, "error: cannot write {}: {er}", path.display());
                    EXIT_FAILURE
                })?;
                let _ = writeln!(out, "{}", path.display());
            }
            Ok(())
        }
    }
}

/// Runs the command line with explicit streams and returns the exit code.
pub fn cli_run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(code) => code,
    }
}
