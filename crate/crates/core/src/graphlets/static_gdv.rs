use rayon::prelude::*;

use super::atlas::atlas;
use super::{for_each_connected_subset, Adjacency, induced_mask, GdvKind, GdvMatrix};
use crate::error::{Error, Result};
use crate::netmodel::Graph;

/// Orbit counts of every node over connected induced subgraphs on at most
/// `max_size` nodes (4: orbits 0..=14, 5: orbits 0..=72).
pub fn static_gdv(g: &Graph, max_size: usize) -> Result<GdvMatrix> {
    if !(4..=5).contains(&max_size) {
        return Err(Error::invalid(format!(
            "static graphlet size must be 4 or 5, got {max_size}"
        )));
    }
    let at = atlas();
    let orbits = at.orbit_count(max_size);
    let n = g.node_count();
    let adj = Adjacency::new(g);
    let counts = (0..n)
        .into_par_iter()
        .fold(
            || vec![0u64; n * orbits],
            |mut acc, root| {
                for_each_connected_subset(&adj, root, max_size, &mut |sub: &[usize]| {
                    let k = sub.len();
                    if k < 2 {
                        return;
                    }
                    let mask = induced_mask(&adj, sub);
                    for (&v, &o) in sub.iter().zip(at.orbits(k, mask)) {
                        acc[v * orbits + o as usize] += 1;
                    }
                });
                acc
            },
        )
        .reduce(
            || vec![0u64; n * orbits],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let columns = (0..orbits).map(|o| format!("o{o}")).collect();
    Ok(GdvMatrix::from_counts(GdvKind::StaticGdv, columns, n, counts))
}
