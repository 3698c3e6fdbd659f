//! Recursive-descent parser for the template language.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{Affine, Expr, Monomial, PochFactor, QBase, SeriesTemplate, TemplateKind};
use crate::error::ParseError;
use crate::qpoch::PochLength;

const RESERVED: &[&str] = &["n", "binom", "inf", "pm", "poch", "phi", "W", "q"];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(i) => format!("number `{i}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let bytes: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < bytes.len() {
        let (off, c) = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].1.is_ascii_digit() {
                i += 1;
            }
            let text: String = bytes[start..i].iter().map(|(_, c)| c).collect();
            out.push(Token { tok: Tok::Int(text.parse().expect("digits")), offset: off });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].1.is_ascii_alphanumeric() || bytes[i].1 == '_') {
                i += 1;
            }
            let text: String = bytes[start..i].iter().map(|(_, c)| c).collect();
            out.push(Token { tok: Tok::Ident(text), offset: off });
        } else if "*/^()[],;=+-".contains(c) {
            out.push(Token { tok: Tok::Sym(c), offset: off });
            i += 1;
        } else {
            let (line, column) = position(src, off);
            return Err(ParseError { line, column, message: format!("unexpected character `{c}`"), expected: vec![] });
        }
    }
    out.push(Token { tok: Tok::End, offset: src.len() });
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
    /// Sign substituted for `^pm` while parsing a list item; `None` outside lists.
    pm: Option<i64>,
    saw_pm: bool,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> PResult<Self> {
        Ok(Parser { src, toks: tokenize(src)?, pos: 0, pm: None, saw_pm: false })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, pos: usize, message: impl Into<String>, expected: &[&str]) -> ParseError {
        let (line, column) = position(self.src, self.toks[pos].offset);
        ParseError {
            line,
            column,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        self.error_at(self.pos, format!("unexpected {}", describe(self.peek())), expected)
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.is_sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> PResult<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            Err(self.unexpected(&[&format!("`{c}`")]))
        }
    }

    fn int(&mut self) -> PResult<i64> {
        match self.peek().clone() {
            Tok::Int(v) => {
                let p = self.pos;
                self.bump();
                i64::try_from(v).map_err(|_| self.error_at(p, "integer too large", &[]))
            }
            _ => Err(self.unexpected(&["integer"])),
        }
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat_sym('-');
        let v = self.int()?;
        Ok(if neg { -v } else { v })
    }

    // --- expressions -------------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        let mut acc = self.signed_term()?;
        loop {
            if self.is_sym('*') {
                let p = self.pos;
                self.bump();
                let rhs = self.signed_term()?;
                acc = acc.mul(&rhs).map_err(|m| self.error_at(p, m, &[]))?;
            } else if self.is_sym('/') {
                let p = self.pos;
                self.bump();
                let rhs = self.signed_term()?;
                let inv = rhs.inv().map_err(|m| self.error_at(p, m, &[]))?;
                acc = acc.mul(&inv).map_err(|m| self.error_at(p, m, &[]))?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn signed_term(&mut self) -> PResult<Expr> {
        if self.eat_sym('-') {
            let mut e = self.power()?;
            e.prefactor = e.prefactor.neg();
            Ok(e)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let base = self.atom()?;
        if !self.eat_sym('^') {
            return Ok(base);
        }
        let exp_pos = self.pos;
        let e = self.exponent()?;
        match base.as_monomial() {
            Some(m) => {
                let m = m.pow(&e).map_err(|msg| self.error_at(exp_pos, msg, &[]))?;
                Ok(Expr { prefactor: m, pochs: Vec::new(), series: None })
            }
            None => {
                if !e.is_constant() || base.series.is_some() {
                    return Err(self.error_at(start, "only monomials and products of Pochhammer symbols take exponents", &[]));
                }
                let unit = if e.c0 < 0 { base.inv().expect("no series") } else { base };
                let mut acc = Expr::one();
                for _ in 0..e.c0.abs() {
                    acc = acc.mul(&unit).expect("no series");
                }
                Ok(acc)
            }
        }
    }

    fn exponent(&mut self) -> PResult<Affine> {
        if self.is_ident("pm") {
            let p = self.pos;
            self.bump();
            return match self.pm {
                Some(s) => {
                    self.saw_pm = true;
                    Ok(Affine::constant(s))
                }
                None => Err(self.error_at(p, "`^pm` is only allowed inside argument lists", &[])),
            };
        }
        if self.eat_sym('(') {
            let a = self.affine(true)?;
            self.expect_sym(')')?;
            return Ok(a);
        }
        let neg = self.eat_sym('-');
        let a = self.affine_term(true)?;
        Ok(if neg { a.neg() } else { a })
    }

    /// `INT`, `INT n`, `INT*n`, `n`, `binom`, and the same with `binom`.
    fn affine_term(&mut self, allow_binom: bool) -> PResult<Affine> {
        let unit = |p: &mut Self| -> Option<Affine> {
            match p.peek() {
                Tok::Ident(s) if s == "n" => Some(Affine::N),
                Tok::Ident(s) if s == "binom" && allow_binom => Some(Affine::BINOM),
                _ => None,
            }
        };
        if let Some(u) = unit(self) {
            self.bump();
            return Ok(u);
        }
        let expected: &[&str] = if allow_binom { &["integer", "`n`", "`binom`"] } else { &["integer", "`n`"] };
        let k = match self.peek() {
            Tok::Int(_) => self.int()?,
            _ => return Err(self.unexpected(expected)),
        };
        if let Some(u) = unit(self) {
            self.bump();
            return Ok(u.scale(k));
        }
        if self.is_sym('*') {
            if let Tok::Ident(s) = self.peek_at(1) {
                if s == "n" || (s == "binom" && allow_binom) {
                    self.bump();
                    let u = unit(self).expect("checked");
                    self.bump();
                    return Ok(u.scale(k));
                }
            }
        }
        Ok(Affine::constant(k))
    }

    fn affine(&mut self, allow_binom: bool) -> PResult<Affine> {
        let neg = self.eat_sym('-');
        let first = self.affine_term(allow_binom)?;
        let mut acc = if neg { first.neg() } else { first };
        loop {
            if self.eat_sym('+') {
                acc = acc.add(&self.affine_term(allow_binom)?);
            } else if self.eat_sym('-') {
                acc = acc.add(&self.affine_term(allow_binom)?.neg());
            } else {
                return Ok(acc);
            }
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        let p = self.pos;
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                if v == BigInt::from(0) {
                    return Err(self.error_at(p, "zero is not a monomial; use the p index for zero parameters", &[]));
                }
                Ok(mono(Monomial::constant(BigRational::from_integer(v))))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "q" => {
                    self.bump();
                    Ok(mono(Monomial::q_pow(Affine::constant(1))))
                }
                "poch" => self.poch(),
                "phi" => self.series(false),
                "W" => self.series(true),
                other if RESERVED.contains(&other) => {
                    Err(self.error_at(p, format!("`{other}` is reserved and cannot be used here"), &[]))
                }
                _ => {
                    self.bump();
                    Ok(mono(Monomial::param(&name)))
                }
            },
            _ => Err(self.unexpected(&["number", "parameter", "`(`", "`poch`", "`phi`", "`W`"])),
        }
    }

    fn monomial(&mut self) -> PResult<Monomial> {
        let p = self.pos;
        let e = self.expr()?;
        e.as_monomial().cloned().ok_or_else(|| self.error_at(p, "expected a monomial", &[]))
    }

    /// One list item, expanded into two when it contains `^pm`.
    fn item(&mut self) -> PResult<Vec<Monomial>> {
        let start = self.pos;
        let outer = (self.pm, self.saw_pm);
        self.pm = Some(1);
        self.saw_pm = false;
        let first = self.monomial();
        let result = match first {
            Ok(m) if self.saw_pm => {
                let end = self.pos;
                self.pos = start;
                self.pm = Some(-1);
                let second = self.monomial()?;
                debug_assert_eq!(self.pos, end);
                Ok(vec![m, second])
            }
            Ok(m) => Ok(vec![m]),
            Err(e) => Err(e),
        };
        (self.pm, self.saw_pm) = outer;
        result
    }

    /// A comma list ending before `;` or `)`; empty or `-` for none.
    fn list(&mut self) -> PResult<Vec<Monomial>> {
        let mut out = Vec::new();
        if self.is_sym(';') || self.is_sym(')') {
            return Ok(out);
        }
        if self.is_sym('-') && matches!(self.peek_at(1), Tok::Sym(';') | Tok::Sym(')')) {
            self.bump();
            return Ok(out);
        }
        loop {
            out.extend(self.item()?);
            if !self.eat_sym(',') {
                return Ok(out);
            }
        }
    }

    fn base(&mut self) -> PResult<QBase> {
        if !self.is_ident("q") {
            return Err(self.unexpected(&["`q`", "`q^-1`", "`q^k`"]));
        }
        self.bump();
        if !self.eat_sym('^') {
            return Ok(QBase::Q);
        }
        let p = self.pos;
        let k = if self.eat_sym('(') {
            let k = self.signed_int()?;
            self.expect_sym(')')?;
            k
        } else {
            self.signed_int()?
        };
        if k == 0 {
            return Err(self.error_at(p, "base q^0 is not allowed", &[]));
        }
        Ok(QBase(k))
    }

    fn length(&mut self) -> PResult<PochLength> {
        if self.is_ident("inf") {
            self.bump();
            return Ok(PochLength::Infinite);
        }
        let paren = self.eat_sym('(');
        let a = self.affine(false)?;
        if paren {
            self.expect_sym(')')?;
        }
        Ok(PochLength::Finite { constant: a.c0, per_n: a.c1 })
    }

    fn poch(&mut self) -> PResult<Expr> {
        self.bump();
        self.expect_sym('(')?;
        let p = self.pos;
        let args = self.list()?;
        if args.is_empty() {
            return Err(self.error_at(p, "a Pochhammer symbol needs at least one argument", &[]));
        }
        self.expect_sym(';')?;
        let base = self.base()?;
        self.expect_sym(';')?;
        let length = self.length()?;
        self.expect_sym(')')?;
        Ok(Expr { prefactor: Monomial::one(), pochs: vec![PochFactor { inverse: false, base, length, args }], series: None })
    }

    fn zeros_index(&mut self) -> PResult<i64> {
        if !self.eat_sym('[') {
            return Ok(0);
        }
        if !self.is_ident("p") {
            return Err(self.unexpected(&["`p`"]));
        }
        self.bump();
        self.expect_sym('=')?;
        let k = self.signed_int()?;
        self.expect_sym(']')?;
        Ok(k)
    }

    fn series(&mut self, is_w: bool) -> PResult<Expr> {
        let start = self.pos;
        self.bump();
        let zeros = self.zeros_index()?;
        self.expect_sym('(')?;
        let head = if is_w {
            let h = self.monomial()?;
            self.expect_sym(';')?;
            Some(h)
        } else {
            None
        };
        let num_pos = self.pos;
        let mut numerator = self.list()?;
        self.expect_sym(';')?;
        let denominator = if is_w { Vec::new() } else { self.list()? };
        if !is_w {
            self.expect_sym(';')?;
        }
        let base = self.base()?;
        self.expect_sym(';')?;
        let argument = self.monomial()?;
        self.expect_sym(')')?;
        if numerator.is_empty() {
            return Err(self.error_at(num_pos, "the numerator list of a series cannot be empty", &["`q^-n`"]));
        }
        let marker = Monomial::q_pow(Affine::new(0, -base.0, 0));
        let terminating = numerator[0] == marker;
        if terminating {
            numerator.remove(0);
        } else if is_w {
            return Err(self.error_at(num_pos, "a W series must start its list with the terminating entry", &["`q^-n`"]));
        }
        let _ = start;
        let kind = match head {
            Some(head) => TemplateKind::W { head },
            None => TemplateKind::Phi,
        };
        let s = SeriesTemplate { kind, zeros, terminating, numerator, denominator, base, argument };
        Ok(Expr { prefactor: Monomial::one(), pochs: Vec::new(), series: Some(s) })
    }

    fn finish(&self) -> PResult<()> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(self.unexpected(&["`*`", "`/`", "end of input"]))
        }
    }
}

fn mono(m: Monomial) -> Expr {
    Expr { prefactor: m, pochs: Vec::new(), series: None }
}

/// Parses a full template expression.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses a single monomial such as `q^(n+1)*a/c`.
pub fn parse_monomial(src: &str) -> Result<Monomial, ParseError> {
    let mut p = Parser::new(src)?;
    let m = p.monomial()?;
    p.finish()?;
    Ok(m)
}

/// Parses a comma-separated list of monomials, expanding `^pm`.
pub fn parse_item_list(src: &str) -> Result<Vec<Monomial>, ParseError> {
    let mut p = Parser::new(src)?;
    let l = p.list()?;
    p.finish()?;
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pochhammer_factor() {
        let e = parse_expr("poch(a*q^n; q; n)").unwrap();
        assert_eq!(e.pochs.len(), 1);
        assert!(e.prefactor.is_one());
        assert_eq!(e.pochs[0].args[0], Monomial::param("a").mul(&Monomial::q_pow(Affine::N)));
        assert_eq!(e.pochs[0].length, PochLength::N);
    }

    #[test]
    fn empty_series_is_rejected() {
        let err = parse_expr("phi[p=0](;;q;z)").unwrap_err();
        assert_eq!((err.line, err.column), (1, 10));
    }

    #[test]
    fn pm_expands_items() {
        let l = parse_item_list("a*z^pm, b").unwrap();
        assert_eq!(l.len(), 3);
        assert_eq!(l[1].params["z"], Affine::constant(-1));
        assert!(parse_expr("z^pm").is_err());
    }

    #[test]
    fn exponent_forms() {
        let m = parse_monomial("(-1)^n*q^(2binom-n+1)*a^-2*b^2n").unwrap();
        assert_eq!(m.sign, Affine::N);
        assert_eq!(m.q, Affine::new(1, -1, 2));
        assert_eq!(m.params["a"], Affine::constant(-2));
        assert_eq!(m.params["b"], Affine::new(0, 2, 0));
        assert_eq!(parse_monomial("q^2*n").unwrap(), parse_monomial("q^2n").unwrap());
        assert_eq!(parse_monomial("q^(-n)").unwrap(), parse_monomial("q^-n").unwrap());
    }

    #[test]
    fn base_inverse_series_marker() {
        let e = parse_expr("phi[p=1](q^n, a; b; q^-1; z)").unwrap();
        let s = e.series.unwrap();
        assert!(s.terminating);
        assert_eq!(s.base, QBase::Q_INV);
        let e = parse_expr("phi(a; b; q; z)").unwrap();
        assert!(!e.series.unwrap().terminating);
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_expr("poch(a; q; n) *\n  poch(b; r; n)").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.column, 11);
        assert!(parse_expr("2^n").is_err());
        assert!(parse_expr("a $ b").is_err());
        assert!(parse_expr("phi(q^-n; ; q; z) * phi(q^-n; ; q; z)").is_err());
        assert!(parse_expr("W[p=0](a; b; q; z)").is_err());
    }
}
