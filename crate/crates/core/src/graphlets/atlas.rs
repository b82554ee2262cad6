//! Orbit tables for connected induced subgraphs on 2..=5 nodes.
//!
//! Every subgraph on `k` local positions is encoded as a bitmask over node
//! pairs in colex order: pair `(i, j)`, `i < j`, is bit `j*(j-1)/2 + i`. The
//! table maps each mask to the orbit of every local position, or to
//! [`DISCONNECTED`] when the mask is not connected.
//!
//! Graphlets are ordered by (size, edge count, maximum degree, canonical
//! mask) and orbits within a graphlet by (degree, neighbour degrees,
//! canonical position). For 2..=4 nodes this reproduces the usual numbering
//! (orbit 0 edge, 1-2 three-node path, 3 triangle, ..., 14 four-clique); the
//! 5-node orbits 15..=72 follow the same rule.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

/// Orbit label for a position whose subset is disconnected.
pub const DISCONNECTED: u8 = u8::MAX;

pub const MAX_GRAPHLET_SIZE: usize = 5;

#[inline]
pub fn pair_bit(i: usize, j: usize) -> u32 {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    1 << (j * (j - 1) / 2 + i)
}

#[inline]
pub fn pair_count(k: usize) -> usize {
    k * (k - 1) / 2
}

pub(crate) fn permute_mask(mask: u32, k: usize, perm: &[usize]) -> u32 {
    let mut out = 0;
    for j in 1..k {
        for i in 0..j {
            if mask & pair_bit(i, j) != 0 {
                out |= pair_bit(perm[i], perm[j]);
            }
        }
    }
    out
}

pub(crate) fn degrees(mask: u32, k: usize) -> [usize; MAX_GRAPHLET_SIZE] {
    let mut deg = [0; MAX_GRAPHLET_SIZE];
    for j in 1..k {
        for i in 0..j {
            if mask & pair_bit(i, j) != 0 {
                deg[i] += 1;
                deg[j] += 1;
            }
        }
    }
    deg
}

pub(crate) fn is_connected(mask: u32, k: usize) -> bool {
    let mut seen = 1u32;
    let mut stack = vec![0usize];
    while let Some(u) = stack.pop() {
        for v in 0..k {
            if v != u && seen & (1 << v) == 0 && mask & pair_bit(u, v) != 0 {
                seen |= 1 << v;
                stack.push(v);
            }
        }
    }
    seen.count_ones() as usize == k
}

/// All permutations of `0..k` in lexicographic order.
pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

#[derive(Debug, Clone)]
pub struct GraphletInfo {
    pub size: usize,
    pub canonical_mask: u32,
    pub edges: usize,
    /// Orbit of each position of the canonical mask.
    pub orbits: Vec<u8>,
}

#[derive(Debug)]
pub struct Atlas {
    /// `tables[k][mask]` holds the orbit of each local position (first `k` entries).
    tables: Vec<Vec<[u8; MAX_GRAPHLET_SIZE]>>,
    graphlets: Vec<GraphletInfo>,
    /// Number of orbits over graphlets with at most `k` nodes, indexed by `k`.
    orbits_upto: Vec<usize>,
    /// Graphlet index of every orbit.
    orbit_graphlet: Vec<usize>,
}

impl Atlas {
    fn build() -> Atlas {
        let perms: Vec<Vec<Vec<usize>>> = (0..=MAX_GRAPHLET_SIZE).map(permutations).collect();
        let mut graphlets = Vec::new();
        let mut orbit_graphlet = Vec::new();
        let mut orbits_upto = vec![0; MAX_GRAPHLET_SIZE + 1];
        let mut tables = vec![Vec::new(); MAX_GRAPHLET_SIZE + 1];
        let mut next_orbit = 0usize;

        for k in 2..=MAX_GRAPHLET_SIZE {
            let nmasks = 1usize << pair_count(k);
            let mut canon_of = vec![u32::MAX; nmasks];
            let mut to_canon: Vec<Vec<usize>> = vec![Vec::new(); nmasks];
            let mut classes: BTreeSet<u32> = BTreeSet::new();
            for mask in 0..nmasks as u32 {
                if !is_connected(mask, k) {
                    continue;
                }
                let mut best = u32::MAX;
                let mut best_perm = Vec::new();
                for p in &perms[k] {
                    let m = permute_mask(mask, k, p);
                    if m < best {
                        best = m;
                        best_perm = p.clone();
                    }
                }
                canon_of[mask as usize] = best;
                to_canon[mask as usize] = best_perm;
                classes.insert(best);
            }

            let mut reps: Vec<u32> = classes.into_iter().collect();
            reps.sort_by_key(|&m| {
                let deg = degrees(m, k);
                (m.count_ones(), deg[..k].iter().copied().max().unwrap_or(0), m)
            });

            let mut orbit_at: BTreeMap<u32, Vec<u8>> = BTreeMap::new();
            for &rep in &reps {
                // The automorphisms form a group, so the smallest image of a
                // position identifies its orbit.
                let autos: Vec<&Vec<usize>> = perms[k]
                    .iter()
                    .filter(|p| permute_mask(rep, k, p) == rep)
                    .collect();
                let class_of: Vec<usize> = (0..k)
                    .map(|i| autos.iter().map(|p| p[i]).min().unwrap_or(i))
                    .collect();
                let deg = degrees(rep, k);
                let nbr_key = |i: usize| {
                    let mut ds: Vec<usize> = (0..k)
                        .filter(|&j| j != i && rep & pair_bit(i, j) != 0)
                        .map(|j| deg[j])
                        .collect();
                    ds.sort_unstable();
                    ds
                };
                let mut class_reps: Vec<usize> = class_of.clone();
                class_reps.sort_unstable();
                class_reps.dedup();
                class_reps.sort_by_key(|&c| (deg[c], nbr_key(c), c));
                let gidx = graphlets.len();
                let mut orbits = vec![0u8; k];
                for (slot, &c) in class_reps.iter().enumerate() {
                    let id = (next_orbit + slot) as u8;
                    orbit_graphlet.push(gidx);
                    for i in 0..k {
                        if class_of[i] == c {
                            orbits[i] = id;
                        }
                    }
                }
                next_orbit += class_reps.len();
                orbit_at.insert(rep, orbits.clone());
                graphlets.push(GraphletInfo {
                    size: k,
                    canonical_mask: rep,
                    edges: rep.count_ones() as usize,
                    orbits,
                });
            }
            orbits_upto[k] = next_orbit;

            let table = &mut tables[k];
            table.resize(nmasks, [DISCONNECTED; MAX_GRAPHLET_SIZE]);
            for mask in 0..nmasks {
                if canon_of[mask] == u32::MAX {
                    continue;
                }
                let orbits = &orbit_at[&canon_of[mask]];
                let p = &to_canon[mask];
                for i in 0..k {
                    table[mask][i] = orbits[p[i]];
                }
            }
        }

        Atlas {
            tables,
            graphlets,
            orbits_upto,
            orbit_graphlet,
        }
    }

    /// Orbit of every local position for a `k`-node mask; `DISCONNECTED` entries if not connected.
    #[inline]
    pub fn orbits(&self, k: usize, mask: u32) -> &[u8] {
        &self.tables[k][mask as usize][..k]
    }

    /// Number of orbits over graphlets on at most `k` nodes (15 for `k = 4`, 73 for `k = 5`).
    pub fn orbit_count(&self, k: usize) -> usize {
        self.orbits_upto[k]
    }

    pub fn graphlets(&self) -> &[GraphletInfo] {
        &self.graphlets
    }

    pub fn graphlet_of_orbit(&self, orbit: usize) -> usize {
        self.orbit_graphlet[orbit]
    }
}

pub fn atlas() -> &'static Atlas {
    static ATLAS: OnceLock<Atlas> = OnceLock::new();
    ATLAS.get_or_init(Atlas::build)
}
