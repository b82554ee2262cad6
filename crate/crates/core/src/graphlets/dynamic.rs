//! Temporal event graphlets.
//!
//! An instance is a set of distinct events `(edge, week)` such that
//!
//! * it has at most `max_events` events on at most `max_nodes` nodes;
//! * grouping the events by week, consecutive distinct weeks are at most
//!   `max_gap` apart;
//! * every prefix of week groups forms a connected graph, i.e. the events can
//!   be ordered by week so that each one touches a node seen before.
//!
//! Events in the same week are simultaneous: the instance is a sequence of
//! edge *sets*, so each set of same-week events is counted once regardless of
//! labels. The type of an instance for a member node is the class of the
//! group sequence under relabelings that send that node to `0`. Gap lengths
//! are not part of the type.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::atlas::{pair_bit, pair_count, permutations, permute_mask};
use super::{GdvKind, GdvMatrix};
use crate::error::{Error, Result};
use crate::netmodel::DynamicNetwork;

pub(crate) const MAX_DYN_NODES: usize = 4;
pub(crate) const MAX_DYN_EVENTS: usize = 6;
const TOKENS: usize = 2 * MAX_DYN_EVENTS - 1;
const SEP: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicGraphletConfig {
    pub max_nodes: usize,
    pub max_events: usize,
    /// Largest allowed gap, in weeks, between consecutive events.
    pub max_gap: usize,
}

impl Default for DynamicGraphletConfig {
    fn default() -> Self {
        DynamicGraphletConfig {
            max_nodes: 3,
            max_events: 3,
            max_gap: 1,
        }
    }
}

impl DynamicGraphletConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_DYN_NODES).contains(&self.max_nodes) {
            return Err(Error::invalid(format!(
                "dynamic graphlet max_nodes must be in 2..={MAX_DYN_NODES}, got {}",
                self.max_nodes
            )));
        }
        if self.max_events + 1 < self.max_nodes || self.max_events > MAX_DYN_EVENTS {
            return Err(Error::invalid(format!(
                "dynamic graphlet max_events must be in {}..={MAX_DYN_EVENTS}, got {}",
                self.max_nodes - 1,
                self.max_events
            )));
        }
        Ok(())
    }

    /// Largest week span an instance can cover.
    pub(crate) fn span(&self) -> usize {
        self.max_gap * (self.max_events - 1)
    }
}

/// Packs a group sequence, relabeled by `perm`, into an order-preserving code.
fn sequence_code(n: usize, groups: &[u32], perm: &[usize]) -> u64 {
    let mut code = n as u64;
    let mut len = 0;
    for (gi, &g) in groups.iter().enumerate() {
        if gi > 0 {
            code = code << 4 | SEP;
            len += 1;
        }
        let mut bits = permute_mask(g, n, perm);
        while bits != 0 {
            code = code << 4 | (bits.trailing_zeros() as u64 + 1);
            len += 1;
            bits &= bits - 1;
        }
    }
    code << (4 * (TOKENS - len))
}

/// Permutations of `0..n` sending `focal` to 0, indexed `[n][focal]`.
struct RootedPerms(Vec<Vec<Vec<Vec<usize>>>>);

impl RootedPerms {
    fn new() -> Self {
        let mut by_n = vec![Vec::new(); MAX_DYN_NODES + 1];
        for (n, slot) in by_n.iter_mut().enumerate().skip(1) {
            let all = permutations(n);
            *slot = (0..n)
                .map(|f| all.iter().filter(|p| p[f] == 0).cloned().collect())
                .collect();
        }
        RootedPerms(by_n)
    }

    fn get(&self, n: usize, focal: usize) -> &[Vec<usize>] {
        &self.0[n][focal]
    }
}

/// Smallest code of the sequence over relabelings that send `focal` to 0, with the minimizing relabeling.
fn rooted_code<'a>(rp: &'a RootedPerms, n: usize, groups: &[u32], focal: usize) -> (u64, &'a [usize]) {
    rp.get(n, focal)
        .iter()
        .map(|p| (sequence_code(n, groups, p), p.as_slice()))
        .min_by_key(|&(c, _)| c)
        .expect("at least one rooted permutation")
}

fn nodes_of(mask: u32, n: usize) -> u32 {
    let mut seen = 0u32;
    for j in 1..n {
        for i in 0..j {
            if mask & pair_bit(i, j) != 0 {
                seen |= 1 << i | 1 << j;
            }
        }
    }
    seen
}

/// Whether every prefix of `groups` is connected on the nodes it touches.
fn prefixes_connected(n: usize, groups: &[u32]) -> bool {
    let mut acc = 0u32;
    for &g in groups {
        acc |= g;
        let touched = nodes_of(acc, n);
        let start = touched.trailing_zeros() as usize;
        let mut seen = 1u32 << start;
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if v != u && seen & (1 << v) == 0 && acc & pair_bit(u, v) != 0 {
                    seen |= 1 << v;
                    stack.push(v);
                }
            }
        }
        if seen != touched {
            return false;
        }
    }
    true
}

/// One dynamic graphlet type: `n` nodes, focal node 0, week groups as pair masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicType {
    pub nodes: usize,
    pub groups: Vec<u32>,
    code: u64,
}

impl DynamicType {
    pub fn events(&self) -> usize {
        self.groups.iter().map(|g| g.count_ones() as usize).sum()
    }

    pub fn name(&self) -> String {
        let mut s = String::from("dg");
        for &g in &self.groups {
            s.push('_');
            let mut first = true;
            for j in 1..self.nodes {
                for i in 0..j {
                    if g & pair_bit(i, j) != 0 {
                        if !first {
                            s.push('+');
                        }
                        first = false;
                        s.push_str(&format!("{i}{j}"));
                    }
                }
            }
        }
        s
    }
}

/// The full, ordered set of types for one configuration.
pub struct DynamicTypes {
    pub config: DynamicGraphletConfig,
    types: Vec<DynamicType>,
    index: HashMap<u64, usize>,
    perms: RootedPerms,
}

impl DynamicTypes {
    pub fn new(config: DynamicGraphletConfig) -> Result<Self> {
        config.validate()?;
        let perms = RootedPerms::new();
        let mut found: HashMap<u64, DynamicType> = HashMap::new();

        fn rec(
            n: usize,
            budget: usize,
            groups: &mut Vec<u32>,
            perms: &RootedPerms,
            found: &mut HashMap<u64, DynamicType>,
        ) {
            let full = (1u32 << n) - 1;
            if !groups.is_empty() {
                let all = groups.iter().fold(0, |a, &g| a | g);
                if nodes_of(all, n) == full {
                    for f in 0..n {
                        let (code, p) = rooted_code(perms, n, groups, f);
                        found.entry(code).or_insert_with(|| DynamicType {
                            nodes: n,
                            groups: groups.iter().map(|&g| permute_mask(g, n, p)).collect(),
                            code,
                        });
                    }
                }
            }
            for g in 1u32..(1 << pair_count(n)) {
                let size = g.count_ones() as usize;
                if size > budget {
                    continue;
                }
                groups.push(g);
                if prefixes_connected(n, groups) {
                    rec(n, budget - size, groups, perms, found);
                }
                groups.pop();
            }
        }

        for n in 2..=config.max_nodes {
            rec(n, config.max_events, &mut Vec::new(), &perms, &mut found);
        }
        let mut types: Vec<DynamicType> = found.into_values().collect();
        types.sort_by_key(|t| (t.events(), t.nodes, t.code));
        let index = types.iter().enumerate().map(|(i, t)| (t.code, i)).collect();
        Ok(DynamicTypes {
            config,
            types,
            index,
            perms,
        })
    }

    pub fn types(&self) -> &[DynamicType] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn columns(&self) -> Vec<String> {
        self.types.iter().map(DynamicType::name).collect()
    }

    /// Type index for `focal` in a local group sequence; `None` if the sequence is outside the family.
    pub(crate) fn classify(&self, n: usize, groups: &[u32], focal: usize) -> Option<usize> {
        let (code, _) = rooted_code(&self.perms, n, groups, focal);
        self.index.get(&code).copied()
    }
}

/// Events of a network sorted by `(week, u, v)`, with per-node incidence lists.
pub(crate) struct EventIndex {
    /// `(week, u, v)` with `u < v`.
    pub events: Vec<(u32, u32, u32)>,
    by_node: Vec<Vec<u32>>,
}

impl EventIndex {
    pub fn new(d: &DynamicNetwork) -> Self {
        let mut events = Vec::new();
        for s in d.snapshots() {
            for &(u, v) in s.graph.edges() {
                events.push((s.week as u32, u as u32, v as u32));
            }
        }
        events.sort_unstable();
        let mut by_node = vec![Vec::new(); d.node_count()];
        for (i, &(_, u, v)) in events.iter().enumerate() {
            by_node[u as usize].push(i as u32);
            by_node[v as usize].push(i as u32);
        }
        EventIndex { events, by_node }
    }

    #[inline]
    fn adjacent(&self, a: u32, b: u32, span: u32) -> bool {
        let (wa, ua, va) = self.events[a as usize];
        let (wb, ub, vb) = self.events[b as usize];
        wa.abs_diff(wb) <= span && (ua == ub || ua == vb || va == ub || va == vb)
    }

    /// Events sharing a node with `e` within `span` weeks, ids `> floor`.
    fn neighbors(&self, e: u32, span: u32, floor: u32, out: &mut Vec<u32>) {
        out.clear();
        let (w, u, v) = self.events[e as usize];
        let lo = w.saturating_sub(span);
        let hi = w + span;
        for x in [u, v] {
            let list = &self.by_node[x as usize];
            let start = list.partition_point(|&id| self.events[id as usize].0 < lo);
            for &id in &list[start..] {
                if self.events[id as usize].0 > hi {
                    break;
                }
                if id != e && id > floor {
                    out.push(id);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}

/// Checks an event set against the instance rules and reports `(node, type)`
/// for each member. `ids` must be sorted (hence by week).
pub(crate) fn classify_event_set(
    idx: &EventIndex,
    types: &DynamicTypes,
    ids: &[u32],
    mut emit: impl FnMut(usize, usize),
) {
    let cfg = &types.config;
    let mut local = [u32::MAX; MAX_DYN_NODES];
    let mut n = 0usize;
    let mut groups = [0u32; MAX_DYN_EVENTS];
    let mut ng = 0usize;
    let mut last_week = None;
    for &id in ids {
        let (w, u, v) = idx.events[id as usize];
        let mut slot = |x: u32| -> Option<usize> {
            if let Some(p) = local[..n].iter().position(|&y| y == x) {
                return Some(p);
            }
            if n == cfg.max_nodes {
                return None;
            }
            local[n] = x;
            n += 1;
            Some(n - 1)
        };
        let (Some(lu), Some(lv)) = (slot(u), slot(v)) else {
            return;
        };
        match last_week {
            Some(lw) if lw == w => {}
            Some(lw) => {
                if (w - lw) as usize > cfg.max_gap {
                    return;
                }
                ng += 1;
            }
            None => ng = 1,
        }
        last_week = Some(w);
        groups[ng - 1] |= pair_bit(lu, lv);
    }
    let groups = &groups[..ng];
    if !prefixes_connected(n, groups) {
        return;
    }
    for (f, &node) in local.iter().enumerate().take(n) {
        let t = types
            .classify(n, groups, f)
            .expect("valid instance belongs to the type family");
        emit(node as usize, t);
    }
}

struct Enumerator<'a> {
    idx: &'a EventIndex,
    types: &'a DynamicTypes,
    span: u32,
    counts: &'a mut [u64],
    ncols: usize,
    scratch: Vec<u32>,
}

impl Enumerator<'_> {
    fn node_count(&self, sub: &[u32]) -> usize {
        let mut nodes = [u32::MAX; 2 * MAX_DYN_EVENTS];
        let mut n = 0;
        for &id in sub {
            let (_, u, v) = self.idx.events[id as usize];
            for x in [u, v] {
                if !nodes[..n].contains(&x) {
                    nodes[n] = x;
                    n += 1;
                }
            }
        }
        n
    }

    fn week_span(&self, sub: &[u32]) -> u32 {
        let ws = sub.iter().map(|&id| self.idx.events[id as usize].0);
        ws.clone().max().unwrap_or(0) - ws.min().unwrap_or(0)
    }

    fn visit(&mut self, sub: &[u32]) {
        let mut sorted = [0u32; MAX_DYN_EVENTS];
        sorted[..sub.len()].copy_from_slice(sub);
        let sorted = &mut sorted[..sub.len()];
        sorted.sort_unstable();
        let ncols = self.ncols;
        let counts = &mut *self.counts;
        classify_event_set(self.idx, self.types, sorted, |v, t| counts[v * ncols + t] += 1);
    }

    fn extend(&mut self, root: u32, sub: &mut Vec<u32>, mut ext: Vec<u32>) {
        self.visit(sub);
        let cfg = self.types.config;
        if sub.len() == cfg.max_events {
            return;
        }
        while let Some(w) = ext.pop() {
            sub.push(w);
            let prune = self.node_count(sub) > cfg.max_nodes || self.week_span(sub) as usize > cfg.span();
            sub.pop();
            if prune {
                continue;
            }
            let mut next = ext.clone();
            let mut nb = std::mem::take(&mut self.scratch);
            self.idx.neighbors(w, self.span, root, &mut nb);
            for &u in &nb {
                if !sub.contains(&u) && !sub.iter().any(|&s| self.idx.adjacent(s, u, self.span)) {
                    next.push(u);
                }
            }
            self.scratch = nb;
            sub.push(w);
            self.extend(root, sub, next);
            sub.pop();
        }
    }
}

/// Per-node counts of every dynamic graphlet type.
pub fn dynamic_gdv(d: &DynamicNetwork, cfg: DynamicGraphletConfig) -> Result<GdvMatrix> {
    let types = DynamicTypes::new(cfg)?;
    let idx = EventIndex::new(d);
    let n = d.node_count();
    let ncols = types.len();
    let span = cfg.span() as u32;
    let counts = (0..idx.events.len() as u32)
        .into_par_iter()
        .fold(
            || vec![0u64; n * ncols],
            |mut acc, root| {
                let mut ext = Vec::new();
                idx.neighbors(root, span, root, &mut ext);
                let mut en = Enumerator {
                    idx: &idx,
                    types: &types,
                    span,
                    counts: &mut acc,
                    ncols,
                    scratch: Vec::new(),
                };
                en.extend(root, &mut vec![root], ext);
                acc
            },
        )
        .reduce(
            || vec![0u64; n * ncols],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(GdvMatrix::from_counts(
        GdvKind::DynamicGdv,
        types.columns(),
        n,
        counts,
    ))
}
