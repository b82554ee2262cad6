//! Exhaustive reference implementations for small inputs.
//!
//! These enumerate every node subset (or every event subset) directly and
//! classify it without the lookup tables or the ESU enumeration used by the
//! fast paths. Orbits on up to 4 nodes are assigned by explicit degree rules;
//! 5-node orbits by brute-force matching against the atlas representatives.

use super::atlas::{self, atlas};
use super::dynamic::{DynamicTypes, EventIndex};
use super::got::{check_got_args, got_column, got_columns};
use super::{DynamicGraphletConfig, GdvKind, GdvMatrix};
use crate::error::{Error, Result};
use crate::netmodel::{DynamicNetwork, Graph};

pub const MAX_STATIC_NODES: usize = 10;
pub const MAX_DYNAMIC_NODES: usize = 8;
pub const MAX_DYNAMIC_WEEKS: usize = 5;

fn adjacency(g: &Graph, nodes: &[usize]) -> Vec<Vec<bool>> {
    nodes
        .iter()
        .map(|&u| nodes.iter().map(|&v| u != v && g.has_edge(u, v)).collect())
        .collect()
}

fn connected(adj: &[Vec<bool>]) -> bool {
    let k = adj.len();
    let mut seen = vec![false; k];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(u) = stack.pop() {
        for v in 0..k {
            if adj[u][v] && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Orbit of every position of a connected subgraph, `None` when disconnected.
fn classify(adj: &[Vec<bool>]) -> Option<Vec<usize>> {
    let k = adj.len();
    if !connected(adj) {
        return None;
    }
    let deg: Vec<usize> = adj.iter().map(|r| r.iter().filter(|&&b| b).count()).collect();
    let edges = deg.iter().sum::<usize>() / 2;
    let max_deg = deg.iter().copied().max().unwrap_or(0);
    let by_degree = |table: &[(usize, usize)]| -> Vec<usize> {
        deg.iter()
            .map(|d| table.iter().find(|(dd, _)| dd == d).expect("degree in graphlet").1)
            .collect()
    };
    Some(match (k, edges, max_deg) {
        (2, 1, _) => vec![0, 0],
        (3, 2, _) => by_degree(&[(1, 1), (2, 2)]),
        (3, 3, _) => vec![3; 3],
        (4, 3, 2) => by_degree(&[(1, 4), (2, 5)]),
        (4, 3, 3) => by_degree(&[(1, 6), (3, 7)]),
        (4, 4, 2) => vec![8; 4],
        (4, 4, 3) => by_degree(&[(1, 9), (2, 10), (3, 11)]),
        (4, 5, _) => by_degree(&[(2, 12), (3, 13)]),
        (4, 6, _) => vec![14; 4],
        (5, _, _) => classify_five(adj),
        _ => unreachable!("connected graph on {k} nodes with {edges} edges"),
    })
}

fn classify_five(adj: &[Vec<bool>]) -> Vec<usize> {
    let at = atlas();
    for info in at.graphlets().iter().filter(|g| g.size == 5) {
        for p in atlas::permutations(5) {
            // p maps local position i onto representative position p[i]
            let matches = (0..5).all(|i| {
                (0..5).all(|j| {
                    i == j || adj[i][j] == (info.canonical_mask & atlas::pair_bit(p[i], p[j]) != 0)
                })
            });
            if matches {
                return (0..5).map(|i| info.orbits[p[i]] as usize).collect();
            }
        }
    }
    unreachable!("every connected 5-node graph is in the atlas")
}

fn subsets(n: usize, min: usize, max: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << n)).filter_map(move |m| {
        let c = m.count_ones() as usize;
        (min..=max)
            .contains(&c)
            .then(|| (0..n).filter(|&i| m & (1 << i) != 0).collect())
    })
}

pub fn oracle_static_gdv(g: &Graph, max_size: usize) -> Result<GdvMatrix> {
    let n = g.node_count();
    if n > MAX_STATIC_NODES {
        return Err(Error::OracleTooLarge(format!(
            "{n} nodes (limit {MAX_STATIC_NODES})"
        )));
    }
    if !(4..=5).contains(&max_size) {
        return Err(Error::invalid(format!("static graphlet size must be 4 or 5, got {max_size}")));
    }
    let orbits = atlas().orbit_count(max_size);
    let columns = (0..orbits).map(|o| format!("o{o}")).collect();
    let mut m = GdvMatrix::zeros(GdvKind::StaticGdv, columns, n);
    for nodes in subsets(n, 2, max_size) {
        if let Some(orb) = classify(&adjacency(g, &nodes)) {
            for (&v, o) in nodes.iter().zip(orb) {
                m.add(v, o, 1);
            }
        }
    }
    Ok(m)
}

fn check_dynamic_bounds(d: &DynamicNetwork) -> Result<()> {
    if d.node_count() > MAX_DYNAMIC_NODES || d.num_weeks() > MAX_DYNAMIC_WEEKS {
        return Err(Error::OracleTooLarge(format!(
            "{} nodes x {} weeks (limit {MAX_DYNAMIC_NODES} x {MAX_DYNAMIC_WEEKS})",
            d.node_count(),
            d.num_weeks()
        )));
    }
    Ok(())
}

pub fn oracle_got(d: &DynamicNetwork, k: usize) -> Result<GdvMatrix> {
    check_dynamic_bounds(d)?;
    check_got_args(d, k)?;
    let orbit_count = atlas().orbit_count(k);
    let n = d.node_count();
    let mut m = GdvMatrix::zeros(GdvKind::Got, got_columns(k), n);
    let snaps = d.snapshots();
    let label = |o: Option<&Vec<usize>>, i: usize| o.map_or(atlas::DISCONNECTED, |o| o[i] as u8);
    for t in 0..snaps.len() - 1 {
        for nodes in subsets(n, k, k) {
            let before = classify(&adjacency(&snaps[t].graph, &nodes));
            let after = classify(&adjacency(&snaps[t + 1].graph, &nodes));
            if before.is_none() && after.is_none() {
                continue;
            }
            for (i, &v) in nodes.iter().enumerate() {
                let col = got_column(label(before.as_ref(), i), label(after.as_ref(), i), orbit_count);
                m.add(v, col, 1);
            }
        }
    }
    Ok(m)
}

/// Whether the events (given as `(week, u, v)`) admit an ordering by week in
/// which each event touches an earlier one and consecutive events are at most
/// `max_gap` weeks apart. Tries every ordering.
fn admits_sequence(events: &[(u32, u32, u32)], max_gap: usize) -> bool {
    let k = events.len();
    atlas::permutations(k).into_iter().any(|order| {
        let mut nodes: Vec<u32> = Vec::new();
        for (pos, &i) in order.iter().enumerate() {
            let (w, u, v) = events[i];
            if pos > 0 {
                let (pw, _, _) = events[order[pos - 1]];
                if w < pw || (w - pw) as usize > max_gap {
                    return false;
                }
                if !nodes.contains(&u) && !nodes.contains(&v) {
                    return false;
                }
            }
            for x in [u, v] {
                if !nodes.contains(&x) {
                    nodes.push(x);
                }
            }
        }
        true
    })
}

/// Finds the type whose week groups match the instance under some bijection sending `focal` to 0.
fn match_type(types: &DynamicTypes, events: &[(u32, u32, u32)], focal: u32) -> usize {
    let mut nodes: Vec<u32> = events.iter().flat_map(|&(_, u, v)| [u, v]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    let mut weeks: Vec<u32> = events.iter().map(|e| e.0).collect();
    weeks.sort_unstable();
    weeks.dedup();
    let n = nodes.len();
    for (ti, t) in types.types().iter().enumerate() {
        if t.nodes != n || t.groups.len() != weeks.len() {
            continue;
        }
        for p in atlas::permutations(n) {
            let local = |x: u32| p[nodes.binary_search(&x).unwrap()];
            if local(focal) != 0 {
                continue;
            }
            let ok = weeks.iter().zip(&t.groups).all(|(&w, &g)| {
                let mut mask = 0u32;
                for &(ew, u, v) in events {
                    if ew == w {
                        mask |= atlas::pair_bit(local(u), local(v));
                    }
                }
                mask == g
            });
            if ok {
                return ti;
            }
        }
    }
    panic!("instance {events:?} matches no dynamic graphlet type");
}

pub fn oracle_dynamic_gdv(d: &DynamicNetwork, cfg: DynamicGraphletConfig) -> Result<GdvMatrix> {
    check_dynamic_bounds(d)?;
    let types = DynamicTypes::new(cfg)?;
    let events = EventIndex::new(d).events;
    let n = d.node_count();
    let mut m = GdvMatrix::zeros(GdvKind::DynamicGdv, types.columns(), n);

    fn combos(len: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            out(cur);
            return;
        }
        for i in start..len {
            cur.push(i);
            combos(len, k, i + 1, cur, out);
            cur.pop();
        }
    }

    for k in 1..=cfg.max_events {
        combos(events.len(), k, 0, &mut Vec::new(), &mut |ids: &[usize]| {
            let chosen: Vec<(u32, u32, u32)> = ids.iter().map(|&i| events[i]).collect();
            let mut nodes: Vec<u32> = chosen.iter().flat_map(|&(_, u, v)| [u, v]).collect();
            nodes.sort_unstable();
            nodes.dedup();
            if nodes.len() > cfg.max_nodes || !admits_sequence(&chosen, cfg.max_gap) {
                return;
            }
            for &f in &nodes {
                m.add(f as usize, match_type(&types, &chosen, f), 1);
            }
        });
    }
    Ok(m)
}
