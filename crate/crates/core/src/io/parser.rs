//! Line-oriented construction language.
//!
//! ```text
//! # Watt curve
//! point A = (-2, 0)
//! point B = (2, 0)
//! circle c0 = circle(A, 2.5)
//! circle c1 = circle(B, 2.5)
//! point C = mover on_circle(c0)
//! circle c2 = circle(C, 3)
//! point D = meet_cc(c1, c2, branch=0)
//! point E = midpoint(C, D)
//! trace mover=C tracer=E
//! ```

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::construction::{Construction, MoverParam, Node, NodeId, NodeKind, ValueKind};
use crate::projective::{HomLine, HomPoint};
use crate::scalar::Real;

/// 1-based position of a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownIdentifier,
    TypeMismatch,
    ForwardReference,
    DuplicateName,
    NoTraceDirective,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::UnknownIdentifier => "unknown identifier",
            ParseErrorKind::TypeMismatch => "type mismatch",
            ParseErrorKind::ForwardReference => "forward reference",
            ParseErrorKind::DuplicateName => "duplicate name",
            ParseErrorKind::NoTraceDirective => "missing trace directive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {kind}: {message}")]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub kind: ParseErrorKind,
}

const RESERVED: &[&str] = &[
    "point",
    "line",
    "circle",
    "mover",
    "trace",
    "meet",
    "meet_cl",
    "meet_cc",
    "midpoint",
    "join",
    "perp",
    "line_through",
    "on_circle",
    "on_line",
    "branch",
    "tracer",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn err(kind: ParseErrorKind, span: SourceSpan, message: impl Into<String>) -> ParseError {
    ParseError {
        span,
        message: message.into(),
        kind,
    }
}

fn lex_line(line: &str, lineno: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let span = |len: usize| SourceSpan {
            line: lineno,
            column: i + 1,
            length: len.max(1),
        };
        if ch == '#' {
            break;
        }
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Ident(text),
                span: SourceSpan {
                    line: lineno,
                    column: start + 1,
                    length: i - start,
                },
            });
        } else if ch.is_ascii_digit()
            || ((ch == '-' || ch == '+' || ch == '.')
                && chars
                    .get(i + 1)
                    .is_some_and(|c| c.is_ascii_digit() || *c == '.'))
        {
            let start = i;
            if ch == '-' || ch == '+' {
                i += 1;
            }
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let sp = SourceSpan {
                line: lineno,
                column: start + 1,
                length: i - start,
            };
            let value: f64 = text.parse().map_err(|_| {
                err(
                    ParseErrorKind::Syntax,
                    sp,
                    format!("malformed number `{text}`"),
                )
            })?;
            out.push(Token {
                tok: Tok::Num(value),
                span: sp,
            });
        } else if "(),=".contains(ch) {
            out.push(Token {
                tok: Tok::Punct(ch),
                span: span(1),
            });
            i += 1;
        } else {
            return Err(err(
                ParseErrorKind::Syntax,
                span(1),
                format!("unexpected character `{ch}`"),
            ));
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    /// Span just past the last token, for errors at end of line.
    eol: SourceSpan,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> SourceSpan {
        self.peek().map_or(self.eol, |t| t.span)
    }

    fn next(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn describe(t: Option<&Token>) -> String {
        match t.map(|t| &t.tok) {
            None => "end of line".into(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Num(v)) => format!("number {v}"),
            Some(Tok::Punct(c)) => format!("`{c}`"),
        }
    }

    fn punct(&mut self, c: char) -> Result<(), ParseError> {
        let span = self.here();
        match self.next() {
            Some(Token {
                tok: Tok::Punct(p), ..
            }) if *p == c => Ok(()),
            t => Err(err(
                ParseErrorKind::Syntax,
                span,
                format!("expected `{c}`, found {}", Self::describe(t)),
            )),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        let span = self.here();
        match self.next() {
            Some(Token {
                tok: Tok::Ident(s),
                span,
            }) => Ok((s.clone(), *span)),
            t => Err(err(
                ParseErrorKind::Syntax,
                span,
                format!("expected {what}, found {}", Self::describe(t)),
            )),
        }
    }

    fn name(&mut self) -> Result<(String, SourceSpan), ParseError> {
        let (s, span) = self.ident("a name")?;
        if RESERVED.contains(&s.as_str()) {
            return Err(err(
                ParseErrorKind::Syntax,
                span,
                format!("`{s}` is a reserved word"),
            ));
        }
        Ok((s, span))
    }

    fn keyword(&mut self, kw: &str) -> Result<SourceSpan, ParseError> {
        let span = self.here();
        match self.next() {
            Some(Token {
                tok: Tok::Ident(s),
                span,
            }) if s == kw => Ok(*span),
            t => Err(err(
                ParseErrorKind::Syntax,
                span,
                format!("expected `{kw}`, found {}", Self::describe(t)),
            )),
        }
    }

    fn number(&mut self) -> Result<(f64, SourceSpan), ParseError> {
        let span = self.here();
        match self.next() {
            Some(Token {
                tok: Tok::Num(v),
                span,
            }) => Ok((*v, *span)),
            t => Err(err(
                ParseErrorKind::Syntax,
                span,
                format!("expected a number, found {}", Self::describe(t)),
            )),
        }
    }

    fn end(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(err(
                ParseErrorKind::Syntax,
                t.span,
                format!("unexpected {}", Self::describe(Some(t))),
            )),
        }
    }

    fn is_punct(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(p), .. }) if *p == c)
    }
}

struct Declared {
    id: NodeId,
    kind: ValueKind,
}

struct Parser<T> {
    nodes: Vec<Node<T>>,
    names: HashMap<String, Declared>,
    /// Every name declared anywhere in the file, with its line.
    all_names: HashMap<String, usize>,
    mover: Option<NodeId>,
    branches: Vec<u8>,
}

impl<T: Real> Parser<T> {
    fn resolve(
        &self,
        name: &str,
        span: SourceSpan,
        expected: ValueKind,
    ) -> Result<NodeId, ParseError> {
        match self.names.get(name) {
            Some(d) if d.kind == expected => Ok(d.id),
            Some(d) => Err(err(
                ParseErrorKind::TypeMismatch,
                span,
                format!("`{name}` is a {}, expected a {expected}", d.kind),
            )),
            None => match self.all_names.get(name) {
                Some(line) => Err(err(
                    ParseErrorKind::ForwardReference,
                    span,
                    format!("`{name}` is used before its declaration on line {line}"),
                )),
                None => Err(err(
                    ParseErrorKind::UnknownIdentifier,
                    span,
                    format!("`{name}` is not declared"),
                )),
            },
        }
    }

    fn operand(&self, cur: &mut Cursor<'_>, expected: ValueKind) -> Result<NodeId, ParseError> {
        let (name, span) = cur.name()?;
        self.resolve(&name, span, expected)
    }

    fn pair(
        &self,
        cur: &mut Cursor<'_>,
        a: ValueKind,
        b: ValueKind,
    ) -> Result<(NodeId, NodeId), ParseError> {
        cur.punct('(')?;
        let x = self.operand(cur, a)?;
        cur.punct(',')?;
        let y = self.operand(cur, b)?;
        Ok((x, y))
    }

    fn branch(&mut self, cur: &mut Cursor<'_>) -> Result<(), ParseError> {
        cur.punct(',')?;
        cur.keyword("branch")?;
        cur.punct('=')?;
        let (v, span) = cur.number()?;
        if v != 0.0 && v != 1.0 {
            return Err(err(ParseErrorKind::Syntax, span, "branch must be 0 or 1"));
        }
        self.branches.push(v as u8);
        Ok(())
    }

    fn mover(&mut self, span: SourceSpan) -> Result<(), ParseError> {
        if self.mover.is_some() {
            return Err(err(
                ParseErrorKind::Syntax,
                span,
                "a construction has exactly one mover",
            ));
        }
        self.mover = Some(self.nodes.len());
        Ok(())
    }

    fn point_expr(&mut self, cur: &mut Cursor<'_>) -> Result<NodeKind<T>, ParseError> {
        use ValueKind::*;
        if cur.is_punct('(') {
            cur.punct('(')?;
            let (x, _) = cur.number()?;
            cur.punct(',')?;
            let (y, _) = cur.number()?;
            cur.punct(')')?;
            return Ok(NodeKind::FreePoint(HomPoint::affine(T::lit(x), T::lit(y))));
        }
        let (head, span) = cur.ident("a point expression")?;
        let kind = match head.as_str() {
            "mover" => {
                self.mover(span)?;
                let (m, mspan) = cur.ident("`on_circle` or `on_line`")?;
                let param = match m.as_str() {
                    "on_circle" => {
                        cur.punct('(')?;
                        MoverParam::PointOnCircle(self.operand(cur, Circle)?)
                    }
                    "on_line" => {
                        cur.punct('(')?;
                        MoverParam::PointOnLine(self.operand(cur, Line)?)
                    }
                    _ => {
                        return Err(err(
                            ParseErrorKind::Syntax,
                            mspan,
                            format!("expected `on_circle` or `on_line`, found `{m}`"),
                        ))
                    }
                };
                NodeKind::Mover(param)
            }
            "meet" => {
                let (l, m) = self.pair(cur, Line, Line)?;
                NodeKind::Meet(l, m)
            }
            "meet_cl" => {
                let (circle, line) = self.pair(cur, Circle, Line)?;
                self.branch(cur)?;
                NodeKind::CircleLineMeet { circle, line }
            }
            "meet_cc" => {
                let (a, b) = self.pair(cur, Circle, Circle)?;
                self.branch(cur)?;
                NodeKind::CircleCircleMeet(a, b)
            }
            "midpoint" => {
                let (p, q) = self.pair(cur, Point, Point)?;
                NodeKind::Midpoint(p, q)
            }
            _ => {
                return Err(err(
                    ParseErrorKind::Syntax,
                    span,
                    format!("`{head}` is not a point expression"),
                ))
            }
        };
        cur.punct(')')?;
        Ok(kind)
    }

    fn line_expr(&mut self, cur: &mut Cursor<'_>) -> Result<NodeKind<T>, ParseError> {
        use ValueKind::*;
        if cur.is_punct('(') {
            cur.punct('(')?;
            let (a, _) = cur.number()?;
            cur.punct(',')?;
            let (b, _) = cur.number()?;
            cur.punct(',')?;
            let (c, _) = cur.number()?;
            cur.punct(')')?;
            return Ok(NodeKind::FreeLine(HomLine::real(
                T::lit(a),
                T::lit(b),
                T::lit(c),
            )));
        }
        let (head, span) = cur.ident("a line expression")?;
        let kind = match head.as_str() {
            "join" => {
                let (p, q) = self.pair(cur, Point, Point)?;
                NodeKind::Join(p, q)
            }
            "perp" => {
                let (line, point) = self.pair(cur, Line, Point)?;
                NodeKind::PerpThrough { line, point }
            }
            "mover" => {
                self.mover(span)?;
                cur.keyword("line_through")?;
                cur.punct('(')?;
                NodeKind::Mover(MoverParam::LineThroughPoint(self.operand(cur, Point)?))
            }
            _ => {
                return Err(err(
                    ParseErrorKind::Syntax,
                    span,
                    format!("`{head}` is not a line expression"),
                ))
            }
        };
        cur.punct(')')?;
        Ok(kind)
    }

    fn circle_expr(&mut self, cur: &mut Cursor<'_>) -> Result<NodeKind<T>, ParseError> {
        cur.keyword("circle")?;
        cur.punct('(')?;
        let center = self.operand(cur, ValueKind::Point)?;
        cur.punct(',')?;
        let (r, span) = cur.number()?;
        if !(r >= 0.0 && r.is_finite()) {
            return Err(err(
                ParseErrorKind::Syntax,
                span,
                "radius must be a nonnegative number",
            ));
        }
        cur.punct(')')?;
        Ok(NodeKind::CircleCR {
            center,
            radius: T::lit(r),
        })
    }
}

/// Parses a construction file.
pub fn parse_construction<T: Real>(text: &str) -> Result<Construction<T>, ParseError> {
    let mut lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let toks = lex_line(line, i + 1)?;
        if !toks.is_empty() {
            let eol = SourceSpan {
                line: i + 1,
                column: line.chars().count() + 1,
                length: 1,
            };
            lines.push((toks, eol));
        }
    }
    let mut all_names = HashMap::new();
    for (toks, _) in &lines {
        if let [Token {
            tok: Tok::Ident(kw),
            ..
        }, Token {
            tok: Tok::Ident(name),
            span,
        }, ..] = toks.as_slice()
        {
            if matches!(kw.as_str(), "point" | "line" | "circle") {
                all_names.entry(name.clone()).or_insert(span.line);
            }
        }
    }
    let mut p = Parser::<T> {
        nodes: Vec::new(),
        names: HashMap::new(),
        all_names,
        mover: None,
        branches: Vec::new(),
    };
    let mut trace: Option<(NodeId, NodeId)> = None;
    for (toks, eol) in &lines {
        let mut cur = Cursor {
            toks,
            pos: 0,
            eol: *eol,
        };
        if trace.is_some() {
            return Err(err(
                ParseErrorKind::Syntax,
                cur.here(),
                "nothing may follow the trace directive",
            ));
        }
        let (head, hspan) = cur.ident("a statement")?;
        let kind = match head.as_str() {
            "point" => ValueKind::Point,
            "line" => ValueKind::Line,
            "circle" => ValueKind::Circle,
            "trace" => {
                cur.keyword("mover")?;
                cur.punct('=')?;
                let (m, mspan) = cur.name()?;
                let mover = p.resolve_any(&m, mspan)?;
                if Some(mover) != p.mover {
                    return Err(err(
                        ParseErrorKind::TypeMismatch,
                        mspan,
                        format!("`{m}` is not a mover"),
                    ));
                }
                cur.keyword("tracer")?;
                cur.punct('=')?;
                let (t, tspan) = cur.name()?;
                let tracer = p.resolve(&t, tspan, ValueKind::Point)?;
                cur.end()?;
                trace = Some((mover, tracer));
                continue;
            }
            _ => {
                return Err(err(
                    ParseErrorKind::Syntax,
                    hspan,
                    format!("expected `point`, `line`, `circle` or `trace`, found `{head}`"),
                ))
            }
        };
        let (name, nspan) = cur.name()?;
        if p.names.contains_key(&name) {
            return Err(err(
                ParseErrorKind::DuplicateName,
                nspan,
                format!("`{name}` is already declared"),
            ));
        }
        cur.punct('=')?;
        let node = match kind {
            ValueKind::Point => p.point_expr(&mut cur)?,
            ValueKind::Line => p.line_expr(&mut cur)?,
            ValueKind::Circle => p.circle_expr(&mut cur)?,
        };
        cur.end()?;
        p.names.insert(
            name.clone(),
            Declared {
                id: p.nodes.len(),
                kind,
            },
        );
        p.nodes.push(Node { name, kind: node });
    }
    let Some((mover, tracer)) = trace else {
        let line = text.lines().count().max(1);
        return Err(err(
            ParseErrorKind::NoTraceDirective,
            SourceSpan {
                line,
                column: 1,
                length: 1,
            },
            "expected `trace mover=NAME tracer=NAME` at the end of the file",
        ));
    };
    Construction::new(p.nodes, mover, tracer, p.branches).map_err(|e| {
        err(
            ParseErrorKind::Syntax,
            SourceSpan {
                line: 1,
                column: 1,
                length: 1,
            },
            e.to_string(),
        )
    })
}

impl<T: Real> Parser<T> {
    fn resolve_any(&self, name: &str, span: SourceSpan) -> Result<NodeId, ParseError> {
        match self.names.get(name) {
            Some(d) => Ok(d.id),
            None => self.resolve(name, span, ValueKind::Point),
        }
    }
}
