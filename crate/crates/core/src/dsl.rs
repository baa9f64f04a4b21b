//! The `.map` text format.
//!
//! ```text
//! # comment
//! map F(x, y, z) = (y + x^2, z + y^2, x) inverse = (z, x - z^2, y - (x - z^2)^2)
//! ```
//!
//! Expressions use `+ - * ^`, parentheses, integer and rational literals
//! (`3`, `1/2`) and the imaginary unit `i`. `^` takes a non-negative
//! integer literal and binds tighter than unary minus, which binds tighter
//! than `*`. There is no implicit multiplication.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::automorphism::{MapError, PolyMap};
use crate::poly::{Budget, Polynomial};
use crate::scalar::GaussianRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message} (at {token})")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub token: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapDefinition {
    pub name: String,
    pub variables: Vec<String>,
    pub components: Vec<Polynomial>,
    pub inverse_components: Option<Vec<Polynomial>>,
}

impl MapDefinition {
    /// The map with its claimed inverse attached (not yet verified).
    pub fn to_polymap(&self) -> Result<PolyMap, MapError> {
        let f = PolyMap::new(self.components.clone())?;
        match &self.inverse_components {
            Some(inv) => f.with_inverse(PolyMap::new(inv.clone())?),
            None => Ok(f),
        }
    }

    pub fn from_polymap(name: &str, variables: Vec<String>, f: &PolyMap) -> Self {
        Self {
            name: name.to_string(),
            variables,
            components: f.components().to_vec(),
            inverse_components: f.claimed_inverse().map(|g| g.components().to_vec()),
        }
    }
}

impl fmt::Display for MapDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Rational(BigRational),
    Sym(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Int(n) => write!(f, "'{n}'"),
            Tok::Rational(r) => write!(f, "'{r}'"),
            Tok::Sym(c) => write!(f, "'{c}'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, token: String, message: &str| ParseError {
        line,
        col,
        token,
        message: message.to_string(),
    };
    while i < chars.len() {
        let c = chars[i];
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
        let (start_line, start_col) = (line, col);
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let num: BigInt = chars[start..i].iter().collect::<String>().parse().unwrap();
            let mut tok = Tok::Int(num.clone());
            if i < chars.len() && chars[i] == '/' {
                let slash = i;
                i += 1;
                let dstart = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if dstart == i {
                    return Err(err(
                        line,
                        col + (slash - start),
                        "'/'".into(),
                        "'/' is only allowed inside a rational literal a/b",
                    ));
                }
                let den: BigInt = chars[dstart..i].iter().collect::<String>().parse().unwrap();
                if den.is_zero() {
                    return Err(err(
                        start_line,
                        start_col,
                        format!("'{}'", chars[start..i].iter().collect::<String>()),
                        "zero denominator",
                    ));
                }
                tok = Tok::Rational(BigRational::new(num, den));
            }
            col += i - start;
            out.push(Spanned {
                tok,
                line: start_line,
                col: start_col,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: start_line,
                col: start_col,
            });
            continue;
        }
        if "+-*^(),=".contains(c) {
            i += 1;
            col += 1;
            out.push(Spanned {
                tok: Tok::Sym(c),
                line: start_line,
                col: start_col,
            });
            continue;
        }
        let message = if c == '/' {
            "'/' is only allowed inside a rational literal a/b"
        } else if c == '.' {
            "floating-point literals are not supported; use a/b"
        } else {
            "unexpected character"
        };
        return Err(err(line, col, format!("'{c}'"), message));
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    vars: Vec<String>,
    budget: Budget,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, t: &Spanned, message: impl Into<String>) -> ParseError {
        ParseError {
            line: t.line,
            col: t.col,
            token: t.tok.to_string(),
            message: message.into(),
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        let t = self.bump();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            Err(self.error_at(&t, format!("expected '{c}'")))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Ident(s) if s == kw => Ok(()),
            _ => Err(self.error_at(&t, format!("expected '{kw}'"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Spanned), ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            _ => Err(self.error_at(&t, format!("expected {what}"))),
        }
    }

    fn k(&self) -> usize {
        self.vars.len()
    }

    fn definition(&mut self) -> Result<MapDefinition, ParseError> {
        self.expect_keyword("map")?;
        let (name, _) = self.ident("a map name")?;
        self.expect_sym('(')?;
        self.vars.clear();
        loop {
            let (v, t) = self.ident("a variable name")?;
            if v == "i" || v == "map" || v == "inverse" {
                return Err(self.error_at(&t, format!("'{v}' is reserved")));
            }
            if self.vars.contains(&v) {
                return Err(self.error_at(&t, "duplicate variable"));
            }
            self.vars.push(v);
            let t = self.bump();
            match t.tok {
                Tok::Sym(',') => continue,
                Tok::Sym(')') => break,
                _ => return Err(self.error_at(&t, "expected ',' or ')'")),
            }
        }
        self.expect_sym('=')?;
        let components = self.tuple()?;
        let inverse_components = match &self.peek().tok {
            Tok::Ident(s) if s == "inverse" => {
                self.bump();
                self.expect_sym('=')?;
                Some(self.tuple()?)
            }
            _ => None,
        };
        Ok(MapDefinition {
            name,
            variables: self.vars.clone(),
            components,
            inverse_components,
        })
    }

    fn tuple(&mut self) -> Result<Vec<Polynomial>, ParseError> {
        let open = self.peek().clone();
        self.expect_sym('(')?;
        let mut out = vec![self.expr()?];
        loop {
            let t = self.bump();
            match t.tok {
                Tok::Sym(',') => out.push(self.expr()?),
                Tok::Sym(')') => break,
                _ => return Err(self.error_at(&t, "expected ',' or ')'")),
            }
        }
        if out.len() != self.k() {
            return Err(self.error_at(
                &open,
                format!("expected {} components, found {}", self.k(), out.len()),
            ));
        }
        Ok(out)
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Sym('-') => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.unary()?;
        while self.peek().tok == Tok::Sym('*') {
            let t = self.bump();
            let rhs = self.unary()?;
            acc = acc
                .mul_within(&rhs, &self.budget)
                .map_err(|e| self.error_at(&t, e.to_string()))?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial, ParseError> {
        if self.peek().tok == Tok::Sym('-') {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.primary()?;
        if self.peek().tok != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let t = self.bump();
        let e = match &t.tok {
            Tok::Int(n) => u32::try_from(n)
                .map_err(|_| self.error_at(&t, "exponent too large"))?,
            _ => return Err(self.error_at(&t, "expected a non-negative integer exponent")),
        };
        if self.peek().tok == Tok::Sym('^') {
            let t = self.peek().clone();
            return Err(self.error_at(&t, "chained '^' is ambiguous; add parentheses"));
        }
        base.pow(e, &self.budget)
            .map_err(|err| self.error_at(&t, err.to_string()))
    }

    fn primary(&mut self) -> Result<Polynomial, ParseError> {
        let t = self.bump();
        let k = self.k();
        match &t.tok {
            Tok::Int(n) => Ok(Polynomial::from_scalar(
                k,
                BigRational::from_integer(n.clone()).into(),
            )),
            Tok::Rational(r) => Ok(Polynomial::from_scalar(k, r.clone().into())),
            Tok::Ident(s) if s == "i" => Ok(Polynomial::from_scalar(k, GaussianRational::i())),
            Tok::Ident(s) => match self.vars.iter().position(|v| v == s) {
                Some(idx) => Ok(Polynomial::x(k, idx)),
                None => Err(self.error_at(&t, "undeclared variable")),
            },
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            _ => Err(self.error_at(&t, "expected an expression")),
        }
    }
}

/// Parses every `map` declaration in a `.map` file.
pub fn parse_file(text: &str) -> Result<Vec<MapDefinition>, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars: Vec::new(),
        budget: Budget::default(),
    };
    let mut defs: Vec<MapDefinition> = Vec::new();
    while p.peek().tok != Tok::Eof {
        let start = p.peek().clone();
        let def = p.definition()?;
        if defs.iter().any(|d| d.name == def.name) {
            return Err(p.error_at(&start, format!("map '{}' defined twice", def.name)));
        }
        defs.push(def);
    }
    Ok(defs)
}

/// Parses text holding exactly one `map` declaration.
pub fn parse(text: &str) -> Result<MapDefinition, ParseError> {
    let mut defs = parse_file(text)?;
    match defs.len() {
        1 => Ok(defs.pop().unwrap()),
        n => {
            let (line, col) = end_position(text);
            Err(ParseError {
                line,
                col,
                token: "end of input".into(),
                message: format!("expected exactly one map declaration, found {n}"),
            })
        }
    }
}

/// Parses a single expression over the given variables.
pub fn parse_expression(text: &str, variables: &[String]) -> Result<Polynomial, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars: variables.to_vec(),
        budget: Budget::default(),
    };
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::Eof {
        return Err(p.error_at(&t, "unexpected token after expression"));
    }
    Ok(e)
}

fn end_position(text: &str) -> (usize, usize) {
    let line = text.lines().count().max(1);
    let col = text.lines().last().map_or(1, |l| l.chars().count().max(1));
    (line, col)
}

/// Canonical rendering; `parse(&print(d)) == Ok(d)`.
pub fn print(def: &MapDefinition) -> String {
    let tuple = |ps: &[Polynomial]| {
        let parts: Vec<String> = ps.iter().map(|p| p.render(&def.variables, &[])).collect();
        format!("({})", parts.join(", "))
    };
    let mut out = format!(
        "map {}({}) = {}",
        def.name,
        def.variables.join(", "),
        tuple(&def.components)
    );
    if let Some(inv) = &def.inverse_components {
        out.push_str(" inverse = ");
        out.push_str(&tuple(inv));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automorphism::verify_inverse;

    const CUBIC: &str =
        "map F(x,y,z) = (y + x^2, z + y^2, x) inverse = (z, x - z^2, y - (x - z^2)^2)";

    #[test]
    fn parses_cubic_example_with_verified_inverse() {
        let d = parse(CUBIC).unwrap();
        assert_eq!(d.name, "F");
        assert_eq!(d.variables, ["x", "y", "z"]);
        let f = d.to_polymap().unwrap();
        assert!(verify_inverse(&f, f.claimed_inverse().unwrap(), &Budget::default()).unwrap());
        assert_eq!(
            print(&d),
            "map F(x, y, z) = (x^2 + y, y^2 + z, x) inverse = (z, -z^2 + x, -z^4 + 2*x*z^2 - x^2 + y)"
        );
    }

    #[test]
    fn identity_in_one_variable() {
        let d = parse("map I(x) = (x)").unwrap();
        assert!(d.to_polymap().unwrap().is_identity());
    }

    #[test]
    fn rational_coefficient() {
        let d = parse("map B(x,y) = (y, y^2 + 1/2 - x)").unwrap();
        assert_eq!(d.variables.len(), 2);
        assert_eq!(print(&d), "map B(x, y) = (y, y^2 - x + 1/2)");
        assert_eq!(parse(&print(&d)).unwrap(), d);
    }

    #[test]
    fn precedence_rules() {
        let a = parse("map A(x) = (-x^2)").unwrap();
        let b = parse("map A(x) = (-(x^2))").unwrap();
        assert_eq!(a, b);
        let c = parse("map C(x,y) = (2*-x + y*y*3, x - y - 1)").unwrap();
        let d = parse("map C(x,y) = (3*y^2 - 2*x, x - (y + 1))").unwrap();
        assert_eq!(c, d);
        let e = parse("map E(x) = ((1 + 2*i)*x^2 - i)").unwrap();
        assert_eq!(print(&e), "map E(x) = ((1+2*i)*x^2 - i)");
    }

    #[test]
    fn zero_component_prints_as_zero() {
        let d = parse("map Z(x, y) = (x - x, y)").unwrap();
        assert_eq!(print(&d), "map Z(x, y) = (0, y)");
        assert_eq!(parse(&print(&d)).unwrap(), d);
    }

    #[test]
    fn comments_and_multiple_maps() {
        let text = "# two maps\nmap A(x) = (x) # trailing\n\nmap B(u, v) = (v, u)\n";
        let defs = parse_file(text).unwrap();
        assert_eq!(defs.len(), 2);
        assert_eq!(defs[1].name, "B");
    }

    fn err(text: &str) -> ParseError {
        parse_file(text).unwrap_err()
    }

    #[test]
    fn error_positions() {
        let e = err("map F(x) = (2x)");
        assert_eq!((e.line, e.col), (1, 14));
        assert_eq!(e.token, "'x'");

        let e = err("map F(x) = (y)");
        assert_eq!((e.line, e.col), (1, 13));
        assert!(e.message.contains("undeclared"));

        let e = err("map F(x) =\n  (x/2)");
        assert_eq!((e.line, e.col), (2, 5));

        let e = err("map F(x, y) = (x)");
        assert!(e.message.contains("expected 2 components"));

        let e = err("map F(x) = (x^2^3)");
        assert_eq!((e.line, e.col), (1, 16));

        let e = err("map F(x) = (x^-1)");
        assert!(e.message.contains("non-negative"));

        let e = err("map F(x) = (1/0)");
        assert!(e.message.contains("zero denominator"));

        let e = err("map F(i) = (i)");
        assert!(e.message.contains("reserved"));

        let e = err("map F(x) = (x");
        assert_eq!(e.token, "end of input");

        let e = err("map F(x) = (1.5*x)");
        assert_eq!((e.line, e.col), (1, 14));
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(err("map A(x) = (x)\nmap A(y) = (y)").message.contains("twice"));
        assert!(err("map A(x, x) = (x, x)").message.contains("duplicate"));
    }
}
