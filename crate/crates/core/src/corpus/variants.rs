//! Counting permutation-and-rearrangement variants of the very-well-poised
//! transformation blocks.
//!
//! A group pairs two blocks: the very-well-poised members of one zero count
//! taken from a transformation chain, and the interchange family that
//! rewrites the chain's member of the opposite zero count. Every member of a
//! block is counted once per permutation of the block's symmetric
//! parameters. This reading of "permutations and rearrangements" is an
//! inferred convention, reported alongside the count.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{lookup, Identity};
use crate::expr::TemplateKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantGroup {
    ThreeparamQ,
    ThreeparamQinv,
    TwoparamQ,
    TwoparamQinv,
}

impl VariantGroup {
    pub const ALL: [VariantGroup; 4] =
        [VariantGroup::ThreeparamQ, VariantGroup::ThreeparamQinv, VariantGroup::TwoparamQ, VariantGroup::TwoparamQinv];

    pub fn name(self) -> &'static str {
        match self {
            VariantGroup::ThreeparamQ => "threeparam_q",
            VariantGroup::ThreeparamQinv => "threeparam_qinv",
            VariantGroup::TwoparamQ => "twoparam_q",
            VariantGroup::TwoparamQinv => "twoparam_qinv",
        }
    }

    /// (identity, zero count of the counted W members) per block, and the
    /// permuted parameters.
    fn blocks(self) -> (&'static [(&'static str, i64)], &'static [&'static str]) {
        match self {
            VariantGroup::ThreeparamQ => (&[("cor4.3", -1), ("cor4.4", 1)], &["c", "d", "e"]),
            VariantGroup::ThreeparamQinv => (&[("cor4.13", 1), ("cor4.12-W", -1)], &["c", "d", "e"]),
            VariantGroup::TwoparamQ => (&[("cor5.8", -2), ("cor5.5", 2)], &["c", "d"]),
            VariantGroup::TwoparamQinv => (&[("cor5.14b", 2), ("cor5.14", -2)], &["c", "d"]),
        }
    }
}

impl fmt::Display for VariantGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariantGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VariantGroup::ALL.into_iter().find(|g| g.name() == s).ok_or_else(|| format!("unknown variant group `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VariantCount {
    pub group: VariantGroup,
    /// members × permutations, summed over the blocks
    pub count: usize,
    /// Per block: (identity, members counted, permutations).
    pub blocks: Vec<(String, usize, usize)>,
    /// Variants that differ as expressions after sorting argument lists.
    pub structurally_distinct: usize,
    pub convention: &'static str,
}

const CONVENTION: &str = "inferred: each very-well-poised member of a block counted once per permutation of the symmetric parameters";

fn block_members(ident: &Identity, zeros: i64) -> Vec<&crate::expr::Expr> {
    ident
        .members
        .iter()
        .map(|m| &m.expr)
        .filter(|e| e.series.as_ref().is_some_and(|s| matches!(s.kind, TemplateKind::W { .. }) && s.zeros == zeros))
        .collect()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

pub fn enumerate_variants(group: VariantGroup) -> VariantCount {
    let (blocks, params) = group.blocks();
    let perms = permutations(params.len());
    let mut seen = HashSet::new();
    let mut count = 0;
    let mut detail = Vec::new();
    for (id, zeros) in blocks {
        let ident = lookup(id).unwrap_or_else(|| panic!("variant block `{id}` missing from the corpus"));
        let members = block_members(ident, *zeros);
        detail.push((id.to_string(), members.len(), perms.len()));
        for e in members {
            for p in &perms {
                let map = params.iter().enumerate().map(|(i, name)| (name.to_string(), params[p[i]].to_string())).collect();
                seen.insert(e.rename(&map).canonical());
                count += 1;
            }
        }
    }
    VariantCount { group, count, blocks: detail, structurally_distinct: seen.len(), convention: CONVENTION }
}
