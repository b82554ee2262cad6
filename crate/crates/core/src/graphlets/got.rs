use rayon::prelude::*;

use super::atlas::{atlas, DISCONNECTED};
use super::{for_each_connected_subset, Adjacency, induced_mask, GdvKind, GdvMatrix};
use crate::error::{Error, Result};
use crate::netmodel::DynamicNetwork;

/// Column labels for `k`-node transitions: every ordered pair over the orbits
/// of graphlets on at most `k` nodes plus `x` (disconnected), minus `x -> x`.
/// Row-major, so `(from, to)` sits at `from * (L + 1) + to` with `x` as `L`.
pub fn got_columns(k: usize) -> Vec<String> {
    let labels = atlas().orbit_count(k) + 1;
    let name = |l: usize| {
        if l == labels - 1 {
            "x".to_string()
        } else {
            l.to_string()
        }
    };
    let mut cols = Vec::with_capacity(labels * labels - 1);
    for a in 0..labels {
        for b in 0..labels {
            if a == labels - 1 && b == labels - 1 {
                continue;
            }
            cols.push(format!("got_{}_{}", name(a), name(b)));
        }
    }
    cols
}

#[inline]
pub(crate) fn got_column(from: u8, to: u8, orbit_count: usize) -> usize {
    let label = |o: u8| {
        if o == DISCONNECTED {
            orbit_count
        } else {
            o as usize
        }
    };
    label(from) * (orbit_count + 1) + label(to)
}

pub(crate) fn check_got_args(d: &DynamicNetwork, k: usize) -> Result<()> {
    if d.num_weeks() < 2 {
        return Err(Error::invalid("graphlet-orbit transitions need at least 2 snapshots"));
    }
    if !(3..=4).contains(&k) {
        return Err(Error::invalid(format!("transition subset size must be 3 or 4, got {k}")));
    }
    Ok(())
}

/// Graphlet-orbit transitions of fixed `k`-node subsets across each pair of
/// consecutive snapshots, counted per member node.
pub fn got(d: &DynamicNetwork, k: usize) -> Result<GdvMatrix> {
    check_got_args(d, k)?;
    let at = atlas();
    let orbit_count = at.orbit_count(k);
    let columns = got_columns(k);
    let ncols = columns.len();
    let n = d.node_count();
    let snaps = d.snapshots();

    let counts = (0..snaps.len() - 1)
        .into_par_iter()
        .map(|t| {
            let (before, after) = (&snaps[t].graph, &snaps[t + 1].graph);
            let union = before.union(after);
            let (adj_u, adj_b, adj_a) = (Adjacency::new(&union), Adjacency::new(before), Adjacency::new(after));
            let mut acc = vec![0u64; n * ncols];
            for root in 0..n {
                for_each_connected_subset(&adj_u, root, k, &mut |sub: &[usize]| {
                    if sub.len() != k {
                        return;
                    }
                    let ob = at.orbits(k, induced_mask(&adj_b, sub));
                    let oa = at.orbits(k, induced_mask(&adj_a, sub));
                    if ob[0] == DISCONNECTED && oa[0] == DISCONNECTED {
                        return;
                    }
                    for i in 0..k {
                        acc[sub[i] * ncols + got_column(ob[i], oa[i], orbit_count)] += 1;
                    }
                });
            }
            acc
        })
        .reduce(
            || vec![0u64; n * ncols],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(GdvMatrix::from_counts(GdvKind::Got, columns, n, counts))
}
