//! Rendering templates back to source text. `parse_expr(render_expr(e))`
//! reproduces `e`.

use std::fmt::{self, Write};

use num_traits::One;

use super::{Affine, Expr, Monomial, PochFactor, QBase, SeriesTemplate, TemplateKind};
use crate::qpoch::PochLength;

fn affine_text(a: &Affine) -> String {
    let mut terms: Vec<(i64, &str)> = Vec::new();
    if a.c2 != 0 {
        terms.push((a.c2, "binom"));
    }
    if a.c1 != 0 {
        terms.push((a.c1, "n"));
    }
    if a.c0 != 0 || terms.is_empty() {
        terms.push((a.c0, ""));
    }
    let mut s = String::new();
    for (i, (k, unit)) in terms.iter().enumerate() {
        let mag = k.abs();
        if *k < 0 {
            s.push('-');
        } else if i > 0 {
            s.push('+');
        }
        if unit.is_empty() || mag != 1 {
            let _ = write!(s, "{mag}");
        }
        s.push_str(unit);
    }
    s
}

fn exponent_text(a: &Affine) -> String {
    let nonzero = [a.c0, a.c1, a.c2].iter().filter(|c| **c != 0).count();
    if nonzero <= 1 {
        affine_text(a)
    } else {
        format!("({})", affine_text(a))
    }
}

pub(crate) fn monomial_text(m: &Monomial) -> String {
    let mut parts: Vec<String> = Vec::new();
    let negative = m.sign == Affine::constant(1);
    if !m.sign.is_zero() && !negative {
        parts.push(format!("(-1)^{}", exponent_text(&m.sign)));
    }
    let numer = m.coeff.numer();
    let denom = m.coeff.denom();
    if !numer.is_one() {
        parts.push(numer.to_string());
    }
    if !m.q.is_zero() {
        parts.push(if m.q == Affine::constant(1) { "q".into() } else { format!("q^{}", exponent_text(&m.q)) });
    }
    for (name, e) in &m.params {
        parts.push(if *e == Affine::constant(1) { name.clone() } else { format!("{name}^{}", exponent_text(e)) });
    }
    let mut s = parts.join("*");
    if !denom.is_one() {
        if s.is_empty() {
            s.push('1');
        }
        let _ = write!(s, "/{denom}");
    } else if s.is_empty() {
        s.push('1');
    }
    if negative {
        format!("-{s}")
    } else {
        s
    }
}

fn list_text(ms: &[Monomial]) -> String {
    if ms.is_empty() {
        "-".into()
    } else {
        ms.iter().map(monomial_text).collect::<Vec<_>>().join(", ")
    }
}

fn base_text(b: QBase) -> String {
    match b.0 {
        1 => "q".into(),
        k => format!("q^{k}"),
    }
}

fn length_text(l: &PochLength) -> String {
    match l {
        PochLength::Infinite => "inf".into(),
        PochLength::Finite { constant, per_n } => affine_text(&Affine::new(*constant, *per_n, 0)),
    }
}

pub(crate) fn poch_text(p: &PochFactor) -> String {
    format!("poch({}; {}; {})", list_text(&p.args), base_text(p.base), length_text(&p.length))
}

fn series_text(s: &SeriesTemplate) -> String {
    let marker = Monomial::q_pow(Affine::new(0, -s.base.0, 0));
    let mut numerator = Vec::new();
    if s.terminating {
        numerator.push(marker);
    }
    numerator.extend(s.numerator.iter().cloned());
    let zeros = if s.zeros == 0 { String::new() } else { format!("[p={}]", s.zeros) };
    let base = base_text(s.base);
    let arg = monomial_text(&s.argument);
    match &s.kind {
        TemplateKind::Phi => {
            format!("phi{zeros}({}; {}; {base}; {arg})", list_text(&numerator), list_text(&s.denominator))
        }
        TemplateKind::W { head } => {
            format!("W{zeros}({}; {}; {base}; {arg})", monomial_text(head), list_text(&numerator))
        }
    }
}

/// Source text for `e`.
pub fn render_expr(e: &Expr) -> String {
    let mut s = String::new();
    let mut first = true;
    if !e.prefactor.is_one() || (e.pochs.first().map_or(true, |p| p.inverse) && e.series.is_none()) {
        s.push_str(&monomial_text(&e.prefactor));
        first = false;
    }
    for p in &e.pochs {
        if p.inverse {
            if first {
                s.push('1');
            }
            s.push_str(" / ");
        } else if !first {
            s.push_str(" * ");
        }
        s.push_str(&poch_text(p));
        first = false;
    }
    if let Some(ser) = &e.series {
        if !first {
            s.push_str(" * ");
        }
        s.push_str(&series_text(ser));
    }
    s
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_expr(self))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&monomial_text(self))
    }
}
