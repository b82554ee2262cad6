//! Interaction events, weekly snapshots, the static flattening and trait labels.
//!
//! Events are undirected: `(a, b, week)` and `(b, a, week)` put the same edge
//! into snapshot `week`. Multiplicity is kept in the event list (the raw SMS
//! feature counts it) but collapses in the snapshots.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Participant identifier. Restricted to `[A-Za-z0-9_-]+` so it never needs CSV quoting.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::invalid("empty node id"));
        }
        if !id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
        {
            return Err(Error::invalid(format!(
                "node id {id:?} has characters outside [A-Za-z0-9_-]"
            )));
        }
        Ok(NodeId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub a: NodeId,
    pub b: NodeId,
    pub week: usize,
}

impl Event {
    pub fn new(a: NodeId, b: NodeId, week: usize) -> Result<Self> {
        if a == b {
            return Err(Error::invalid(format!("self-loop event on {a}")));
        }
        Ok(Event { a, b, week })
    }
}

/// Simple undirected graph over nodes `0..n` with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from an edge list, dropping duplicates and orientation.
    ///
    /// Panics on a self-loop or an endpoint `>= n`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut es: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| {
                assert!(u != v, "self-loop on node {u}");
                assert!(u < n && v < n, "edge ({u}, {v}) outside 0..{n}");
                if u < v {
                    (u, v)
                } else {
                    (v, u)
                }
            })
            .collect();
        es.sort_unstable();
        es.dedup();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &es {
            adj[u].push(v);
            adj[v].push(u);
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        Graph { adj, edges: es }
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
            edges: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Union of two graphs on the same node set.
    pub fn union(&self, other: &Graph) -> Graph {
        assert_eq!(self.node_count(), other.node_count());
        Graph::from_edges(
            self.node_count(),
            self.edges.iter().chain(other.edges.iter()).copied(),
        )
    }

    /// Relabels node `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        Graph::from_edges(
            self.node_count(),
            self.edges.iter().map(|&(u, v)| (perm[u], perm[v])),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub week: usize,
    pub graph: Graph,
}

/// Weekly snapshots over a fixed node universe; isolated nodes belong to every snapshot.
#[derive(Debug, Clone)]
pub struct DynamicNetwork {
    nodes: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    snapshots: Vec<Snapshot>,
}

impl DynamicNetwork {
    /// Assembles a network from per-week edge lists over node indices.
    pub fn from_snapshots(nodes: Vec<NodeId>, weekly_edges: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        let index = index_nodes(&nodes)?;
        if weekly_edges.is_empty() {
            return Err(Error::invalid("a dynamic network needs at least one week"));
        }
        let n = nodes.len();
        let mut snapshots = Vec::with_capacity(weekly_edges.len());
        for (week, es) in weekly_edges.into_iter().enumerate() {
            if let Some(&(u, v)) = es.iter().find(|&&(u, v)| u == v || u >= n || v >= n) {
                return Err(Error::invalid(format!("week {week}: bad edge ({u}, {v})")));
            }
            snapshots.push(Snapshot {
                week,
                graph: Graph::from_edges(n, es),
            });
        }
        Ok(DynamicNetwork {
            nodes,
            index,
            snapshots,
        })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn index_of(&self, id: &NodeId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn num_weeks(&self) -> usize {
        self.snapshots.len()
    }

    /// The same network with time running backwards.
    pub fn reversed(&self) -> DynamicNetwork {
        let w = self.num_weeks();
        let snapshots = self
            .snapshots
            .iter()
            .rev()
            .enumerate()
            .map(|(week, s)| Snapshot {
                week,
                graph: s.graph.clone(),
            })
            .collect();
        debug_assert_eq!(w, self.num_weeks());
        DynamicNetwork {
            nodes: self.nodes.clone(),
            index: self.index.clone(),
            snapshots,
        }
    }

    /// Relabels node `v` as `perm[v]`, reordering the node universe to match.
    pub fn permuted(&self, perm: &[usize]) -> DynamicNetwork {
        let mut nodes = self.nodes.clone();
        for (v, id) in self.nodes.iter().enumerate() {
            nodes[perm[v]] = id.clone();
        }
        let index = index_nodes(&nodes).expect("permutation keeps ids unique");
        let snapshots = self
            .snapshots
            .iter()
            .map(|s| Snapshot {
                week: s.week,
                graph: s.graph.permuted(perm),
            })
            .collect();
        DynamicNetwork {
            nodes,
            index,
            snapshots,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StaticNetwork {
    pub nodes: Vec<NodeId>,
    pub graph: Graph,
}

fn index_nodes(nodes: &[NodeId]) -> Result<HashMap<NodeId, usize>> {
    let mut index = HashMap::with_capacity(nodes.len());
    for (i, id) in nodes.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(Error::invalid(format!("duplicate node id {id}")));
        }
    }
    Ok(index)
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

/// Reads all records; returns `(line, fields)` for every data row after checking the header.
fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<(u64, Vec<String>)>> {
    let mut rdr = open_csv(path)?;
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut rows = Vec::new();
    let mut seen_header = false;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let fields: Vec<String> = rec.iter().map(str::to_owned).collect();
        if !seen_header {
            seen_header = true;
            if fields != header {
                return Err(parse_err(
                    line,
                    format!("expected header `{}`", header.join(",")),
                ));
            }
            continue;
        }
        if fields.len() != header.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", header.len(), fields.len()),
            ));
        }
        rows.push((line, fields));
    }
    Ok(rows)
}

/// Parses an events file (`node_a,node_b,week`), keeping every row in file order.
pub fn load_events(path: impl AsRef<Path>) -> Result<Vec<Event>> {
    let path = path.as_ref();
    let rows = read_rows(path, &["node_a", "node_b", "week"])?;
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    rows.into_iter()
        .map(|(line, f)| {
            let a = NodeId::new(f[0].as_str()).map_err(|e| parse_err(line, e.to_string()))?;
            let b = NodeId::new(f[1].as_str()).map_err(|e| parse_err(line, e.to_string()))?;
            let week: usize = f[2]
                .parse()
                .map_err(|_| parse_err(line, format!("week {:?} is not a non-negative integer", f[2])))?;
            Event::new(a, b, week).map_err(|e| parse_err(line, e.to_string()))
        })
        .collect()
}

pub fn write_events(path: impl AsRef<Path>, events: &[Event]) -> Result<()> {
    let path = path.as_ref();
    let mut out = std::io::BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "node_a,node_b,week")?;
        for e in events {
            writeln!(out, "{},{},{}", e.a, e.b, e.week)?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

/// Builds one snapshot per week. The universe defaults to all event endpoints in
/// first-appearance order.
pub fn build_dynamic(
    events: &[Event],
    num_weeks: usize,
    node_universe: Option<&[NodeId]>,
) -> Result<DynamicNetwork> {
    if num_weeks == 0 {
        return Err(Error::invalid("num_weeks must be at least 1"));
    }
    let nodes: Vec<NodeId> = match node_universe {
        Some(u) => u.to_vec(),
        None => {
            let mut seen = HashMap::new();
            let mut order = Vec::new();
            for e in events {
                for id in [&e.a, &e.b] {
                    if !seen.contains_key(id) {
                        seen.insert(id.clone(), order.len());
                        order.push(id.clone());
                    }
                }
            }
            order
        }
    };
    let index = index_nodes(&nodes)?;
    let mut unknown: Vec<String> = Vec::new();
    let mut weekly: Vec<Vec<(usize, usize)>> = vec![Vec::new(); num_weeks];
    for e in events {
        if e.week >= num_weeks {
            return Err(Error::WeekOutOfRange {
                week: e.week,
                num_weeks,
            });
        }
        match (index.get(&e.a), index.get(&e.b)) {
            (Some(&u), Some(&v)) => weekly[e.week].push((u, v)),
            (a, b) => {
                if a.is_none() {
                    unknown.push(e.a.to_string());
                }
                if b.is_none() {
                    unknown.push(e.b.to_string());
                }
            }
        }
    }
    if !unknown.is_empty() {
        unknown.sort();
        unknown.dedup();
        return Err(Error::invalid(format!(
            "event endpoint(s) outside the node universe: {}",
            unknown.join(", ")
        )));
    }
    let n = nodes.len();
    let snapshots = weekly
        .into_iter()
        .enumerate()
        .map(|(week, es)| Snapshot {
            week,
            graph: Graph::from_edges(n, es),
        })
        .collect();
    Ok(DynamicNetwork {
        nodes,
        index,
        snapshots,
    })
}

/// Static network with an edge wherever any snapshot has one.
pub fn flatten(d: &DynamicNetwork) -> StaticNetwork {
    let n = d.node_count();
    let graph = Graph::from_edges(
        n,
        d.snapshots
            .iter()
            .flat_map(|s| s.graph.edges().iter().copied()),
    );
    StaticNetwork {
        nodes: d.nodes.clone(),
        graph,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trait {
    Depressed,
    Anxious,
}

impl Trait {
    pub const ALL: [Trait; 2] = [Trait::Depressed, Trait::Anxious];

    pub fn name(self) -> &'static str {
        match self {
            Trait::Depressed => "depressed",
            Trait::Anxious => "anxious",
        }
    }

    pub fn parse(s: &str) -> Option<Trait> {
        match s {
            "depressed" => Some(Trait::Depressed),
            "anxious" => Some(Trait::Anxious),
            _ => None,
        }
    }
}

impl fmt::Display for Trait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraitLabels {
    pub depressed: Option<bool>,
    pub anxious: Option<bool>,
}

impl TraitLabels {
    pub fn get(&self, t: Trait) -> Option<bool> {
        match t {
            Trait::Depressed => self.depressed,
            Trait::Anxious => self.anxious,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TraitCounts {
    pub labeled: usize,
    pub positive: usize,
}

impl TraitCounts {
    pub fn prevalence(&self) -> f64 {
        if self.labeled == 0 {
            0.0
        } else {
            self.positive as f64 / self.labeled as f64
        }
    }
}

/// Nodes labeled for one trait, in node-universe order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cohort {
    pub trait_: Trait,
    /// Node-universe indices of the labeled nodes.
    pub indices: Vec<usize>,
    pub ids: Vec<NodeId>,
    pub labels: Vec<bool>,
}

impl Cohort {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraitTable {
    rows: BTreeMap<NodeId, TraitLabels>,
}

impl TraitTable {
    /// Builds a table, rejecting labeled nodes outside `universe`.
    pub fn new(rows: BTreeMap<NodeId, TraitLabels>, universe: &[NodeId]) -> Result<Self> {
        let known: std::collections::HashSet<&NodeId> = universe.iter().collect();
        let unknown: Vec<String> = rows
            .keys()
            .filter(|id| !known.contains(id))
            .map(|id| id.to_string())
            .collect();
        if !unknown.is_empty() {
            return Err(Error::UnknownNodes(unknown));
        }
        Ok(TraitTable { rows })
    }

    pub fn get(&self, id: &NodeId) -> Option<&TraitLabels> {
        self.rows.get(id)
    }

    pub fn rows(&self) -> impl Iterator<Item = (&NodeId, &TraitLabels)> {
        self.rows.iter()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn counts(&self, t: Trait) -> TraitCounts {
        let mut c = TraitCounts {
            labeled: 0,
            positive: 0,
        };
        for l in self.rows.values().filter_map(|r| r.get(t)) {
            c.labeled += 1;
            c.positive += usize::from(l);
        }
        c
    }

    /// The labeled cohort for `t`, in the order of `universe`.
    pub fn cohort(&self, t: Trait, universe: &[NodeId]) -> Cohort {
        let mut c = Cohort {
            trait_: t,
            indices: Vec::new(),
            ids: Vec::new(),
            labels: Vec::new(),
        };
        for (i, id) in universe.iter().enumerate() {
            if let Some(l) = self.rows.get(id).and_then(|r| r.get(t)) {
                c.indices.push(i);
                c.ids.push(id.clone());
                c.labels.push(l);
            }
        }
        c
    }
}

fn parse_label(s: &str) -> Option<Option<bool>> {
    match s {
        "0" => Some(Some(false)),
        "1" => Some(Some(true)),
        "NA" => Some(None),
        _ => None,
    }
}

/// Parses a labels file (`node_id,depressed,anxious`, values `0`/`1`/`NA`).
pub fn load_labels(path: impl AsRef<Path>, universe: &[NodeId]) -> Result<TraitTable> {
    let path = path.as_ref();
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut rows = BTreeMap::new();
    for (line, f) in read_rows(path, &["node_id", "depressed", "anxious"])? {
        let id = NodeId::new(f[0].as_str()).map_err(|e| parse_err(line, e.to_string()))?;
        let mut vals = [None; 2];
        for (slot, raw) in vals.iter_mut().zip(&f[1..]) {
            *slot = parse_label(raw)
                .ok_or_else(|| parse_err(line, format!("label {raw:?} is not 0, 1 or NA")))?;
        }
        let labels = TraitLabels {
            depressed: vals[0],
            anxious: vals[1],
        };
        if rows.insert(id.clone(), labels).is_some() {
            return Err(parse_err(line, format!("duplicate labels for {id}")));
        }
    }
    let table = TraitTable::new(rows, universe)?;
    for t in Trait::ALL {
        let c = table.counts(t);
        log::info!("{t}: {} labeled, {} positive", c.labeled, c.positive);
    }
    Ok(table)
}

pub fn write_labels(path: impl AsRef<Path>, table: &TraitTable) -> Result<()> {
    let path = path.as_ref();
    let fmt_label = |l: Option<bool>| match l {
        Some(true) => "1",
        Some(false) => "0",
        None => "NA",
    };
    let mut out = std::io::BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "node_id,depressed,anxious")?;
        for (id, l) in &table.rows {
            writeln!(out, "{id},{},{}", fmt_label(l.depressed), fmt_label(l.anxious))?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn id(s: &str) -> NodeId {
        NodeId::new(s).unwrap()
    }

    fn ev(a: &str, b: &str, w: usize) -> Event {
        Event::new(id(a), id(b), w).unwrap()
    }

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_events_in_order_with_multiplicity() {
        let f = write_tmp("node_a,node_b,week\nu,v,4\nu,v,4\nv,w,0\n");
        let events = load_events(f.path()).unwrap();
        assert_eq!(events, vec![ev("u", "v", 4), ev("u", "v", 4), ev("v", "w", 0)]);
    }

    #[test]
    fn self_loop_row_names_its_line() {
        let f = write_tmp("node_a,node_b,week\na,b,1\nu,u,4\n");
        match load_events(f.path()) {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("self-loop"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_rows_rejected() {
        for bad in ["a,b\n", "a,b,x\n", "a,b,-1\n", "a,b,1,2\n", "a b,c,1\n"] {
            let f = write_tmp(&format!("node_a,node_b,week\n{bad}"));
            assert!(
                matches!(load_events(f.path()), Err(Error::Parse { line: 2, .. })),
                "{bad:?}"
            );
        }
        let f = write_tmp("a,b,week\nx,y,1\n");
        assert!(matches!(load_events(f.path()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn build_dynamic_fills_empty_weeks() {
        let events = vec![ev("a", "b", 0), ev("b", "c", 2)];
        let d = build_dynamic(&events, 31, None).unwrap();
        assert_eq!(d.num_weeks(), 31);
        assert_eq!(d.node_count(), 3);
        for (w, s) in d.snapshots().iter().enumerate() {
            assert_eq!(s.week, w);
            let expect = usize::from(w == 0 || w == 2);
            assert_eq!(s.graph.edge_count(), expect, "week {w}");
            assert_eq!(s.graph.node_count(), 3);
        }
    }

    #[test]
    fn duplicate_events_collapse_in_snapshot() {
        let events = vec![ev("u", "v", 4), ev("v", "u", 4), ev("u", "v", 4)];
        let d = build_dynamic(&events, 5, None).unwrap();
        assert_eq!(d.snapshots()[4].graph.edge_count(), 1);
    }

    #[test]
    fn week_out_of_range() {
        let events = vec![ev("u", "v", 5)];
        assert!(matches!(
            build_dynamic(&events, 5, None),
            Err(Error::WeekOutOfRange { week: 5, num_weeks: 5 })
        ));
        assert!(build_dynamic(&events, 0, None).is_err());
    }

    #[test]
    fn explicit_universe_keeps_isolated_nodes() {
        let universe = vec![id("z"), id("u"), id("v")];
        let d = build_dynamic(&[ev("u", "v", 0)], 2, Some(&universe)).unwrap();
        assert_eq!(d.nodes(), &universe[..]);
        assert_eq!(d.snapshots()[0].graph.degree(0), 0);
        assert!(build_dynamic(&[ev("u", "q", 0)], 2, Some(&universe)).is_err());
    }

    #[test]
    fn flatten_is_union() {
        let mut events = vec![ev("a", "b", 5), ev("c", "d", 1)];
        for w in 0..31 {
            events.push(ev("x", "y", w));
        }
        let d = build_dynamic(&events, 31, None).unwrap();
        let s = flatten(&d);
        assert_eq!(s.graph.edge_count(), 3);
        assert_eq!(s.nodes, d.nodes());
        let a = d.index_of(&id("a")).unwrap();
        let b = d.index_of(&id("b")).unwrap();
        assert!(s.graph.has_edge(a, b));

        let empty = build_dynamic(&[], 3, Some(&[id("a"), id("b")])).unwrap();
        assert_eq!(flatten(&empty).graph.edge_count(), 0);
    }

    #[test]
    fn labels_restricted_and_counted() {
        let universe = vec![id("a"), id("b"), id("c")];
        let f = write_tmp("node_id,depressed,anxious\na,1,0\nb,NA,1\nc,0,NA\n");
        let t = load_labels(f.path(), &universe).unwrap();
        assert_eq!(t.counts(Trait::Depressed), TraitCounts { labeled: 2, positive: 1 });
        assert_eq!(t.counts(Trait::Anxious), TraitCounts { labeled: 2, positive: 1 });
        let dep = t.cohort(Trait::Depressed, &universe);
        assert_eq!(dep.indices, vec![0, 2]);
        assert_eq!(dep.labels, vec![true, false]);
        let anx = t.cohort(Trait::Anxious, &universe);
        assert_eq!(anx.indices, vec![0, 1]);
    }

    #[test]
    fn labels_errors() {
        let universe = vec![id("a")];
        let f = write_tmp("node_id,depressed,anxious\na,1,0\nq,0,0\nr,1,1\n");
        match load_labels(f.path(), &universe) {
            Err(Error::UnknownNodes(ids)) => assert_eq!(ids, vec!["q", "r"]),
            other => panic!("{other:?}"),
        }
        let f = write_tmp("node_id,depressed,anxious\na,2,0\n");
        assert!(matches!(load_labels(f.path(), &universe), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn empty_label_file() {
        let f = write_tmp("node_id,depressed,anxious\n");
        let t = load_labels(f.path(), &[id("a")]).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.counts(Trait::Depressed).labeled, 0);
    }

    #[test]
    fn paper_scale_prevalence() {
        let universe: Vec<NodeId> = (0..274).map(|i| id(&format!("p{i}"))).collect();
        let rows = universe
            .iter()
            .enumerate()
            .map(|(i, n)| {
                (
                    n.clone(),
                    TraitLabels {
                        depressed: Some(i < 67),
                        anxious: Some(i < 106),
                    },
                )
            })
            .collect();
        let t = TraitTable::new(rows, &universe).unwrap();
        let c = t.counts(Trait::Depressed);
        assert_eq!((c.labeled, c.positive), (274, 67));
        assert!((c.prevalence() - 0.2445).abs() < 1e-4);
    }

    #[test]
    fn label_file_roundtrip() {
        let universe = vec![id("a"), id("b")];
        let f = write_tmp("node_id,depressed,anxious\na,1,NA\nb,0,1\n");
        let t = load_labels(f.path(), &universe).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_labels(out.path(), &t).unwrap();
        assert_eq!(load_labels(out.path(), &universe).unwrap(), t);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn weekly_edges() -> impl Strategy<Value = (usize, Vec<Vec<(usize, usize)>>)> {
            (2usize..9, 1usize..6).prop_flat_map(|(n, w)| {
                let edge = (0..n, 0..n).prop_filter("no loops", |(a, b)| a != b);
                (
                    Just(n),
                    proptest::collection::vec(proptest::collection::vec(edge, 0..12), w),
                )
            })
        }

        proptest! {
            #[test]
            fn flatten_edge_count_bounds((n, weeks) in weekly_edges()) {
                let nodes: Vec<NodeId> = (0..n).map(|i| id(&format!("n{i}"))).collect();
                let d = DynamicNetwork::from_snapshots(nodes, weeks.clone()).unwrap();
                let s = flatten(&d);
                let per: Vec<usize> = d.snapshots().iter().map(|s| s.graph.edge_count()).collect();
                prop_assert!(s.graph.edge_count() <= per.iter().sum::<usize>());
                prop_assert!(s.graph.edge_count() >= per.iter().copied().max().unwrap_or(0));
                // Re-flattening a one-snapshot network is the identity.
                let one = DynamicNetwork::from_snapshots(d.nodes().to_vec(), vec![s.graph.edges().to_vec()]).unwrap();
                prop_assert_eq!(flatten(&one).graph, s.graph.clone());
            }

            #[test]
            fn events_recover_weekly_edges((n, weeks) in weekly_edges()) {
                let nodes: Vec<NodeId> = (0..n).map(|i| id(&format!("n{i}"))).collect();
                let mut events = Vec::new();
                for (w, es) in weeks.iter().enumerate() {
                    for &(a, b) in es {
                        events.push(Event::new(nodes[a].clone(), nodes[b].clone(), w).unwrap());
                    }
                }
                let d = build_dynamic(&events, weeks.len(), Some(&nodes)).unwrap();
                for (w, es) in weeks.iter().enumerate() {
                    prop_assert_eq!(&d.snapshots()[w].graph, &Graph::from_edges(n, es.iter().copied()));
                }
            }
        }
    }
}
