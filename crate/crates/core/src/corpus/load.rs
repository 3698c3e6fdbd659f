//! Corpus file parsing and role expansion. The format is documented in
//! `docs/dsl.md`.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{Guard, Identity, IdentityKind, Member, Remark};
use crate::error::CorpusError;
use crate::expr::{parse_expr, parse_monomial, Expr, Monomial};

/// Identities and remarks from one or more corpus files.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub identities: Vec<Identity>,
    pub remarks: Vec<Remark>,
}

impl Corpus {
    /// Appends `other`, rejecting duplicate identity ids and remarks that
    /// point at unknown identities.
    pub fn extend(&mut self, other: Corpus) -> Result<(), CorpusError> {
        for ident in other.identities {
            if self.identities.iter().any(|i| i.id == ident.id) {
                return Err(CorpusError {
                    file: ident.file.clone(),
                    line: ident.line,
                    message: format!("duplicate identity id `{}`", ident.id),
                });
            }
            self.identities.push(ident);
        }
        self.remarks.extend(other.remarks);
        Ok(())
    }

    /// Checks that every remark refers to a known identity and member.
    pub fn validate(&self) -> Result<(), CorpusError> {
        for r in &self.remarks {
            let err = |message: String| CorpusError { file: r.file.clone(), line: r.line, message };
            let source = self.identity(&r.source).ok_or_else(|| err(format!("unknown source identity `{}`", r.source)))?;
            if self.find_member(&r.target).is_none() {
                return Err(err(format!("unknown target member `{}`", r.target)));
            }
            for p in r.permute.iter().chain(r.map.keys()) {
                if !source.params.contains(p) {
                    return Err(err(format!("`{p}` is not a parameter of `{}`", r.source)));
                }
            }
        }
        Ok(())
    }

    pub fn identity(&self, id: &str) -> Option<&Identity> {
        self.identities.iter().find(|i| i.id == id)
    }

    /// The identity holding a member with this label, and the member.
    pub fn find_member(&self, label: &str) -> Option<(&Identity, &super::Member)> {
        self.identities.iter().find_map(|i| i.member(label).map(|m| (i, m)))
    }
}

struct Cursor<'a> {
    file: &'a str,
    line: usize,
}

impl Cursor<'_> {
    fn err(&self, message: impl Into<String>) -> CorpusError {
        CorpusError { file: self.file.to_string(), line: self.line, message: message.into() }
    }
}

#[derive(Default)]
struct Draft {
    id: String,
    kind: Option<IdentityKind>,
    reference: String,
    quote: String,
    line: usize,
    roles: Option<(Vec<String>, Vec<String>)>,
    guards: Vec<Guard>,
    solve: Vec<(String, Monomial)>,
    templates: Vec<Member>,
    closed: Option<Expr>,
}

enum Block {
    None,
    Identity(Draft),
    Remark(Remark),
}

/// Header attributes `key=value` or `key="quoted value"`.
fn attributes(text: &str, cur: &Cursor) -> Result<(String, BTreeMap<String, String>), CorpusError> {
    let mut chars = text.trim().char_indices().peekable();
    let text = text.trim();
    let mut id = String::new();
    while let Some(&(_, c)) = chars.peek() {
        if c.is_whitespace() {
            break;
        }
        id.push(c);
        chars.next();
    }
    if id.is_empty() {
        return Err(cur.err("missing id in header"));
    }
    let mut attrs = BTreeMap::new();
    loop {
        while chars.peek().is_some_and(|(_, c)| c.is_whitespace()) {
            chars.next();
        }
        let Some(&(start, _)) = chars.peek() else { break };
        let Some(eq) = text[start..].find('=') else {
            return Err(cur.err(format!("expected key=value in header near `{}`", &text[start..])));
        };
        let key = text[start..start + eq].trim().to_string();
        let rest = &text[start + eq + 1..];
        let (value, consumed) = if let Some(stripped) = rest.strip_prefix('"') {
            let end = stripped.find('"').ok_or_else(|| cur.err("unterminated quoted value"))?;
            (stripped[..end].to_string(), eq + 1 + end + 2)
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            (rest[..end].to_string(), eq + 1 + end)
        };
        attrs.insert(key, value);
        let target = start + consumed;
        while chars.peek().is_some_and(|(i, _)| *i < target) {
            chars.next();
        }
    }
    Ok((id, attrs))
}

fn monomial(src: &str, cur: &Cursor) -> Result<Monomial, CorpusError> {
    parse_monomial(src.trim()).map_err(|e| cur.err(format!("in `{}`: {e}", src.trim())))
}

fn guard(src: &str, cur: &Cursor) -> Result<Vec<Guard>, CorpusError> {
    let src = src.trim();
    let open = src.find('(').ok_or_else(|| cur.err(format!("malformed guard `{src}`")))?;
    let body = src[open + 1..].strip_suffix(')').ok_or_else(|| cur.err(format!("malformed guard `{src}`")))?;
    match &src[..open] {
        "ne" => {
            let parts: Vec<&str> = body.split(',').collect();
            if parts.len() != 2 {
                return Err(cur.err("ne() takes two monomials"));
            }
            Ok(vec![Guard::Ne(monomial(parts[0], cur)?, monomial(parts[1], cur)?)])
        }
        "nonzero" => body.split(',').map(|p| Ok(Guard::NonZero(monomial(p, cur)?))).collect(),
        "notomega" => {
            let (m, len) = body.split_once(';').ok_or_else(|| cur.err("notomega(m; length)"))?;
            let len = monomial(&format!("q^({})", len.trim()), cur)?;
            Ok(vec![Guard::NotOmega(monomial(m, cur)?, len.q)])
        }
        other => Err(cur.err(format!("unknown guard `{other}`"))),
    }
}

/// Splits on `sep` outside parentheses.
fn split_top_level(s: &str, sep: char) -> impl Iterator<Item = &str> {
    let mut depth = 0i32;
    let mut start = 0;
    let mut parts = Vec::new();
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts.into_iter()
}

/// All injective assignments of `roles` to `targets`, as rename maps.
fn role_maps(roles: &[String], targets: &[String]) -> Vec<BTreeMap<String, String>> {
    fn go(
        roles: &[String],
        targets: &[String],
        used: &mut Vec<bool>,
        cur: &mut BTreeMap<String, String>,
        out: &mut Vec<BTreeMap<String, String>>,
    ) {
        let Some(role) = roles.get(cur.len()) else {
            out.push(cur.clone());
            return;
        };
        for (i, t) in targets.iter().enumerate() {
            if !used[i] {
                used[i] = true;
                cur.insert(role.clone(), t.clone());
                go(roles, targets, used, cur, out);
                cur.remove(role);
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(roles, targets, &mut vec![false; targets.len()], &mut BTreeMap::new(), &mut out);
    out
}

fn finish(d: Draft, file: &str) -> Result<Identity, CorpusError> {
    let cur = Cursor { file, line: d.line };
    let kind = d.kind.ok_or_else(|| cur.err(format!("identity `{}` has no kind", d.id)))?;
    if d.templates.is_empty() {
        return Err(cur.err(format!("identity `{}` has no members", d.id)));
    }
    if kind == IdentityKind::Summation && d.closed.is_none() {
        return Err(cur.err(format!("summation `{}` needs a closed form", d.id)));
    }
    if kind != IdentityKind::Summation && d.templates.len() < 2 {
        return Err(cur.err(format!("identity `{}` needs at least two members", d.id)));
    }
    let solve_map: BTreeMap<String, Monomial> = d.solve.iter().cloned().collect();
    let solved = |e: &Expr| e.substitute(&solve_map).map_err(|m| cur.err(m));

    let maps = match &d.roles {
        Some((roles, targets)) => role_maps(roles, targets),
        None => vec![BTreeMap::new()],
    };
    let mut members = Vec::new();
    let mut seen = HashSet::new();
    for (ti, t) in d.templates.iter().enumerate() {
        for map in &maps {
            let expr = solved(&t.expr.rename(map))?;
            if !seen.insert(expr.canonical()) {
                continue;
            }
            let label = if map.is_empty() {
                t.label.clone()
            } else {
                let order: Vec<&str> = d.roles.as_ref().unwrap().0.iter().map(|r| map[r].as_str()).collect();
                format!("{}@{}", t.label, order.join(","))
            };
            members.push(Member { label, expr, template: ti });
        }
    }
    let mut guards = Vec::new();
    for g in &d.guards {
        for map in &maps {
            let g = g.rename(map);
            if !guards.contains(&g) {
                guards.push(g);
            }
        }
    }
    let closed_form = d.closed.as_ref().map(solved).transpose()?;

    let params = members[0].expr.free_params();
    for m in &members[1..] {
        let p = m.expr.free_params();
        if p != params {
            return Err(cur.err(format!(
                "member `{}` of `{}` has parameters {:?}, expected {:?}",
                m.label, d.id, p, params
            )));
        }
    }
    if let Some(c) = &closed_form {
        let extra: BTreeSet<String> = c.free_params().difference(&params).cloned().collect();
        if !extra.is_empty() {
            return Err(cur.err(format!("closed form of `{}` uses unknown parameters {extra:?}", d.id)));
        }
    }
    let uses_z = members.iter().any(|m| m.expr.uses_z());
    Ok(Identity {
        id: d.id,
        kind,
        reference: d.reference,
        quote: d.quote,
        file: file.to_string(),
        line: d.line,
        templates: d.templates,
        members,
        closed_form,
        guards,
        solved: d.solve,
        params: params.into_iter().collect(),
        uses_z,
    })
}

/// Parses one corpus file.
pub fn parse_corpus(file: &str, text: &str) -> Result<Corpus, CorpusError> {
    let mut out = Corpus::default();
    let mut block = Block::None;
    // (line, field, accumulated text) of the entry being continued
    let mut pending: Option<(usize, String, String)> = None;

    let flush = |pending: &mut Option<(usize, String, String)>, block: &mut Block| -> Result<(), CorpusError> {
        let Some((line, field, body)) = pending.take() else { return Ok(()) };
        let cur = Cursor { file, line };
        match block {
            Block::None => Err(cur.err(format!("`{field}` outside an identity or remark"))),
            Block::Identity(d) => {
                let expr = |s: &str| parse_expr(s).map_err(|e| cur.err(format!("{e}")));
                if let Some(label) = field.strip_prefix("member") {
                    let label = label
                        .strip_prefix('[')
                        .and_then(|l| l.strip_suffix(']'))
                        .map(str::to_string)
                        .unwrap_or_else(|| format!("{}:{}", d.id, d.templates.len() + 1));
                    if d.templates.iter().any(|m| m.label == label) {
                        return Err(cur.err(format!("duplicate member label `{label}`")));
                    }
                    let template = d.templates.len();
                    d.templates.push(Member { label, expr: expr(&body)?, template });
                    return Ok(());
                }
                match field.as_str() {
                    "closed" => d.closed = Some(expr(&body)?),
                    "guard" => {
                        for g in split_top_level(&body, ';').filter(|g| !g.trim().is_empty()) {
                            d.guards.extend(guard(g, &cur)?);
                        }
                    }
                    "solve" => {
                        let (name, value) = body.split_once('=').ok_or_else(|| cur.err("solve: name = monomial"))?;
                        d.solve.push((name.trim().to_string(), monomial(value, &cur)?));
                    }
                    "roles" => {
                        let (from, to) = body.split_once("->").ok_or_else(|| cur.err("roles: r1 r2 -> p1 p2"))?;
                        let from: Vec<String> = from.split_whitespace().map(str::to_string).collect();
                        let to: Vec<String> = to.split_whitespace().map(str::to_string).collect();
                        if from.len() > to.len() || from.is_empty() {
                            return Err(cur.err("roles need at least as many targets as roles"));
                        }
                        d.roles = Some((from, to));
                    }
                    other => return Err(cur.err(format!("unknown field `{other}` in identity"))),
                }
                Ok(())
            }
            Block::Remark(r) => {
                if field != "map" {
                    return Err(cur.err(format!("unknown field `{field}` in remark")));
                }
                for part in body.split(';').filter(|p| !p.trim().is_empty()) {
                    let (name, value) = part.split_once('=').ok_or_else(|| cur.err("map: name = monomial; ..."))?;
                    r.map.insert(name.trim().to_string(), monomial(value, &cur)?);
                }
                Ok(())
            }
        }
    };

    let close = |block: &mut Block, out: &mut Corpus| -> Result<(), CorpusError> {
        match std::mem::replace(block, Block::None) {
            Block::None => {}
            Block::Identity(d) => out.identities.push(finish(d, file)?),
            Block::Remark(r) => out.remarks.push(r),
        }
        Ok(())
    };

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let cur = Cursor { file, line };
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        if raw.starts_with(char::is_whitespace) {
            match &mut pending {
                Some((_, _, body)) => {
                    body.push(' ');
                    body.push_str(content.trim());
                    continue;
                }
                None => return Err(cur.err("continuation line without an entry")),
            }
        }
        flush(&mut pending, &mut block)?;
        let trimmed = content.trim();
        if let Some(header) = trimmed.strip_prefix('[') {
            let header = header.strip_suffix(']').ok_or_else(|| cur.err("unterminated header"))?;
            close(&mut block, &mut out)?;
            if let Some(rest) = header.strip_prefix("identity ") {
                let (id, attrs) = attributes(rest, &cur)?;
                let kind = attrs.get("kind").ok_or_else(|| cur.err("identity header needs kind="))?;
                block = Block::Identity(Draft {
                    id,
                    kind: Some(kind.parse().map_err(|e: String| cur.err(e))?),
                    reference: attrs.get("ref").cloned().unwrap_or_default(),
                    quote: attrs.get("quote").cloned().unwrap_or_default(),
                    line,
                    ..Draft::default()
                });
            } else if let Some(rest) = header.strip_prefix("remark ") {
                let (id, attrs) = attributes(rest, &cur)?;
                let need = |k: &str| attrs.get(k).cloned().ok_or_else(|| cur.err(format!("remark header needs {k}=")));
                block = Block::Remark(Remark {
                    id,
                    source: need("source")?,
                    target: need("target")?,
                    permute: need("permute")?.split(',').map(|s| s.trim().to_string()).collect(),
                    map: BTreeMap::new(),
                    file: file.to_string(),
                    line,
                });
            } else {
                return Err(cur.err(format!("unknown header `[{header}]`")));
            }
            continue;
        }
        let (field, body) = trimmed.split_once(':').ok_or_else(|| cur.err(format!("expected `field: value`, got `{trimmed}`")))?;
        // member labels may themselves contain ':'
        let (field, body) = if field.starts_with("member[") && !field.contains(']') {
            let close_at = trimmed.find("]:").ok_or_else(|| cur.err("unterminated member label"))?;
            (&trimmed[..close_at + 1], &trimmed[close_at + 2..])
        } else {
            (field, body)
        };
        pending = Some((line, field.trim().to_string(), body.trim().to_string()));
    }
    flush(&mut pending, &mut block)?;
    close(&mut block, &mut out)?;
    Ok(out)
}
