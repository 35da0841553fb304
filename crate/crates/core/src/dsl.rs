//! The `.apeq` text format for symbols and sums.
//!
//! ```text
//! # comments run to end of line
//! symbol L2 = 0.693147180559945309417232121458;
//! sum f = (1, 0)*exp(3/2*s) + (1, 1/2)*exp(19/6*s);
//! sum g = (1, 0)*exp(-1*L2*s);
//! sum h = <0.5, -1.25>*exp(1 + 2*L2*s);
//! ```
//!
//! Exact coefficients are `(modulus, phase)` with the phase in **turns**
//! (one turn is 2π radians), so `(1, 1/4)` is `i`. Numeric coefficients
//! are `<re, im>`. The exponent `lin*s` is a rational combination of
//! declared symbols and the implicit unit; `1 - 1/2*L2*s` means
//! `(1 − L2/2)·s`.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;
use thiserror::Error;

use crate::exactlin::Rational;
use crate::exponents::{parse_decimal, significant_digits, SymbolTable};
use crate::json::rational_to_string;
use crate::sums::{Coefficient, ExactCoefficient, ExponentialSum, Term};

pub const RESERVED: [&str; 5] = ["s", "exp", "sum", "symbol", "1"];
pub const MIN_SYMBOL_DIGITS: usize = 30;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),
    #[error("`{0}` is reserved")]
    Reserved(String),
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("bad value for symbol `{0}`")]
    BadSymbolValue(String),
    #[error("sum `{0}` declared twice")]
    DuplicateSum(String),
    #[error("sum `{sum}`: term {second} repeats the exponent of term {first}")]
    DuplicateExponent { sum: String, first: usize, second: usize },
    #[error("sum `{0}` mixes exact and numeric coefficients")]
    MixedModes(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {kind}")]
pub struct DslError {
    pub line: usize,
    pub col: usize,
    pub kind: DslErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DslWarning {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for DslWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: warning: {}", self.line, self.col, self.message)
    }
}

/// Parsed file: one shared symbol table and named sums in declaration order.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub table: Arc<SymbolTable>,
    pub sums: Vec<ExponentialSum>,
    pub file: Option<String>,
    /// Line of each sum's declaration.
    pub lines: HashMap<String, usize>,
    pub warnings: Vec<DslWarning>,
}

impl PartialEq for Workspace {
    /// Content equality; provenance and warnings are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.table == other.table && self.sums == other.sums
    }
}

impl Workspace {
    pub fn get(&self, name: &str) -> Option<&ExponentialSum> {
        self.sums.iter().find(|f| f.name() == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.sums.iter().map(|f| f.name()).collect()
    }

    /// Canonical text form; parsing it gives back an equal workspace.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        for s in self.table.declared() {
            let _ = writeln!(out, "symbol {} = {};", s.name, s.literal);
        }
        if !self.table.declared().is_empty() && !self.sums.is_empty() {
            out.push('\n');
        }
        for f in &self.sums {
            out.push_str(&pretty_sum(f));
        }
        out
    }
}

fn pretty_term(t: &Term, table: &SymbolTable) -> String {
    let coeff = match &t.coefficient {
        Coefficient::Exact(c) => format!(
            "({}, {})",
            rational_to_string(c.modulus()),
            rational_to_string(c.turns())
        ),
        Coefficient::Numeric(z) => format!("<{:?}, {:?}>", z.re, z.im),
    };
    format!("{coeff}*exp({}*s)", t.exponent.display(table))
}

pub fn pretty_sum(f: &ExponentialSum) -> String {
    let table = f.table();
    let terms: Vec<String> = f.terms().iter().map(|t| pretty_term(t, table)).collect();
    if terms.len() <= 2 {
        format!("sum {} = {};\n", f.name(), terms.join(" + "))
    } else {
        format!("sum {} =\n    {};\n", f.name(), terms.join("\n  + "))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    /// Numeric literal text; `int` when it has no point or exponent.
    Num {
        text: String,
        int: bool,
    },
    Punct(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, m: String| DslError {
        line,
        col,
        kind: DslErrorKind::Syntax(m),
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: l0,
                col: c0,
            });
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut int = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                int = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    int = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push(Token {
                tok: Tok::Num {
                    text: chars[start..i].iter().collect(),
                    int,
                },
                line: l0,
                col: c0,
            });
        } else if "()<>,*+-/=;".contains(c) {
            i += 1;
            out.push(Token {
                tok: Tok::Punct(c),
                line: l0,
                col: c0,
            });
        } else {
            return Err(err(l0, c0, format!("unexpected character {c:?}")));
        }
        col += i - start;
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

enum RawCoeff {
    Exact(Rational, Rational),
    Numeric(Complex64),
}

struct RawTerm {
    coeff: RawCoeff,
    /// (coefficient, symbol name or None for the unit, position)
    parts: Vec<(Rational, Option<String>, (usize, usize))>,
    pos: (usize, usize),
}

struct RawSum {
    name: String,
    pos: (usize, usize),
    terms: Vec<RawTerm>,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, DslError> {
        let t = self.peek();
        let found = match &t.tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num { text, .. } => format!("`{text}`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".to_string(),
        };
        Err(DslError {
            line: t.line,
            col: t.col,
            kind: DslErrorKind::Syntax(format!("expected {}, found {found}", msg.into())),
        })
    }

    fn is_punct(&self, c: char) -> bool {
        self.peek().tok == Tok::Punct(c)
    }

    fn expect(&mut self, c: char) -> Result<(), DslError> {
        if self.is_punct(c) {
            self.next();
            Ok(())
        } else {
            self.fail(format!("`{c}`"))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), DslError> {
        match &self.peek().tok {
            Tok::Ident(s) if s == kw => {
                self.next();
                Ok(())
            }
            _ => self.fail(format!("`{kw}`")),
        }
    }

    fn name(&mut self) -> Result<(String, (usize, usize)), DslError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Ident(s) => {
                if RESERVED.contains(&s.as_str()) {
                    return Err(DslError {
                        line: t.line,
                        col: t.col,
                        kind: DslErrorKind::Reserved(s),
                    });
                }
                self.next();
                Ok((s, (t.line, t.col)))
            }
            _ => self.fail("a name"),
        }
    }

    fn sign(&mut self) -> bool {
        if self.is_punct('-') {
            self.next();
            true
        } else {
            if self.is_punct('+') {
                self.next();
            }
            false
        }
    }

    fn integer(&mut self) -> Result<BigInt, DslError> {
        match &self.peek().tok {
            Tok::Num { text, int: true } => {
                let v = text.parse().expect("digits");
                self.next();
                Ok(v)
            }
            _ => self.fail("an integer"),
        }
    }

    fn rat(&mut self) -> Result<Rational, DslError> {
        let neg = self.sign();
        let n = self.integer()?;
        let d = if self.is_punct('/') {
            self.next();
            let d = self.integer()?;
            if d.is_zero() {
                return Err(DslError {
                    line: self.toks[self.pos - 1].line,
                    col: self.toks[self.pos - 1].col,
                    kind: DslErrorKind::Syntax("zero denominator".into()),
                });
            }
            d
        } else {
            BigInt::from(1)
        };
        let q = Rational::new(n, d);
        Ok(if neg { -q } else { q })
    }

    /// Signed decimal literal text.
    fn decimal(&mut self) -> Result<(String, (usize, usize)), DslError> {
        let pos = (self.peek().line, self.peek().col);
        let neg = self.sign();
        match &self.peek().tok {
            Tok::Num { text, .. } => {
                let t = format!("{}{text}", if neg { "-" } else { "" });
                self.next();
                Ok((t, pos))
            }
            _ => self.fail("a decimal number"),
        }
    }

    fn coeff(&mut self) -> Result<RawCoeff, DslError> {
        if self.is_punct('(') {
            self.next();
            let m = self.rat()?;
            self.expect(',')?;
            let p = self.rat()?;
            self.expect(')')?;
            Ok(RawCoeff::Exact(m, p))
        } else if self.is_punct('<') {
            self.next();
            let (re, _) = self.decimal()?;
            self.expect(',')?;
            let (im, _) = self.decimal()?;
            self.expect('>')?;
            let re: f64 = re.parse().expect("lexed decimal");
            let im: f64 = im.parse().expect("lexed decimal");
            Ok(RawCoeff::Numeric(Complex64::new(re, im)))
        } else {
            self.fail("`(` or `<` starting a coefficient")
        }
    }

    fn term(&mut self) -> Result<RawTerm, DslError> {
        let pos = (self.peek().line, self.peek().col);
        let coeff = self.coeff()?;
        self.expect('*')?;
        self.keyword("exp")?;
        self.expect('(')?;
        let mut parts = Vec::new();
        loop {
            let ppos = (self.peek().line, self.peek().col);
            let q = self.rat()?;
            let sym = match (self.peek_at(0), self.peek_at(1)) {
                (Tok::Punct('*'), Tok::Ident(n)) if n != "s" => {
                    self.next();
                    Some(self.name()?.0)
                }
                _ => None,
            };
            parts.push((q, sym, ppos));
            if self.is_punct('+') || self.is_punct('-') {
                // the sign is re-read by the next part
                if self.is_punct('+') {
                    self.next();
                }
                continue;
            }
            break;
        }
        self.expect('*')?;
        self.keyword("s")?;
        self.expect(')')?;
        Ok(RawTerm { coeff, parts, pos })
    }

    fn sum(&mut self) -> Result<RawSum, DslError> {
        self.keyword("sum")?;
        let (name, pos) = self.name()?;
        self.expect('=')?;
        let mut terms = vec![self.term()?];
        while self.is_punct('+') {
            self.next();
            terms.push(self.term()?);
        }
        self.expect(';')?;
        Ok(RawSum { name, pos, terms })
    }
}

pub fn parse(src: &str) -> Result<Workspace, DslError> {
    parse_file(src, None)
}

/// Parses a file; symbols may be declared anywhere in it.
pub fn parse_file(src: &str, file: Option<&str>) -> Result<Workspace, DslError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let mut table = SymbolTable::new();
    let mut raw_sums: Vec<RawSum> = Vec::new();
    let mut warnings = Vec::new();
    loop {
        match &p.peek().tok {
            Tok::Eof => break,
            Tok::Ident(k) if k == "symbol" => {
                p.next();
                let (name, pos) = p.name()?;
                p.expect('=')?;
                let (lit, lpos) = p.decimal()?;
                p.expect(';')?;
                let at = |kind| DslError {
                    line: pos.0,
                    col: pos.1,
                    kind,
                };
                if table.index_of(&name).is_some() {
                    return Err(at(DslErrorKind::DuplicateSymbol(name)));
                }
                if parse_decimal(&lit).is_err() || table.declare(&name, &lit).is_err() {
                    return Err(at(DslErrorKind::BadSymbolValue(name)));
                }
                let digits = significant_digits(&lit);
                if digits < MIN_SYMBOL_DIGITS {
                    warnings.push(DslWarning {
                        line: lpos.0,
                        col: lpos.1,
                        message: format!(
                            "symbol `{name}` has {digits} significant digits; at least {MIN_SYMBOL_DIGITS} are recommended"
                        ),
                    });
                }
            }
            Tok::Ident(k) if k == "sum" => {
                let s = p.sum()?;
                if raw_sums.iter().any(|r| r.name == s.name) {
                    return Err(DslError {
                        line: s.pos.0,
                        col: s.pos.1,
                        kind: DslErrorKind::DuplicateSum(s.name),
                    });
                }
                raw_sums.push(s);
            }
            _ => return p.fail("`symbol` or `sum`"),
        }
    }

    let table = Arc::new(table);
    let mut sums = Vec::with_capacity(raw_sums.len());
    let mut lines = HashMap::new();
    for rs in raw_sums {
        let at = |pos: (usize, usize), kind| DslError {
            line: pos.0,
            col: pos.1,
            kind,
        };
        let mut terms = Vec::with_capacity(rs.terms.len());
        let mut seen: HashMap<Vec<Rational>, usize> = HashMap::new();
        let mut mode = None;
        for (i, rt) in rs.terms.iter().enumerate() {
            let mut coords = vec![Rational::zero(); table.len()];
            for (q, sym, ppos) in &rt.parts {
                let k = match sym {
                    None => 0,
                    Some(n) => table
                        .index_of(n)
                        .ok_or_else(|| at(*ppos, DslErrorKind::UndeclaredSymbol(n.clone())))?,
                };
                coords[k] += q;
            }
            if let Some(&first) = seen.get(&coords) {
                return Err(at(
                    rt.pos,
                    DslErrorKind::DuplicateExponent {
                        sum: rs.name.clone(),
                        first,
                        second: i,
                    },
                ));
            }
            seen.insert(coords.clone(), i);
            let e = table.exponent(coords).expect("table length");
            let term = match &rt.coeff {
                RawCoeff::Exact(m, p) => Term::exact(e, ExactCoefficient::new(m.clone(), p.clone())),
                RawCoeff::Numeric(z) => Term::numeric(e, *z),
            };
            let m = term.coefficient.mode();
            if *mode.get_or_insert(m) != m {
                return Err(at(rt.pos, DslErrorKind::MixedModes(rs.name.clone())));
            }
            terms.push(term);
        }
        let f = ExponentialSum::new(rs.name.clone(), table.clone(), terms)
            .map_err(|e| at(rs.pos, DslErrorKind::Syntax(e.to_string())))?;
        lines.insert(rs.name, rs.pos.0);
        sums.push(f);
    }
    Ok(Workspace {
        table,
        sums,
        file: file.map(str::to_string),
        lines,
        warnings,
    })
}
