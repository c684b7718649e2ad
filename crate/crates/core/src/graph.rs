//! Weighted undirected graphs, named generators and the JSON graph format.
//!
//! Node ordering of the generators:
//!
//! | generator       | nodes                 | ordering                                             |
//! |-----------------|-----------------------|------------------------------------------------------|
//! | `ring:N`        | `N`                   | edges `(k, k+1 mod N)`                               |
//! | `complete:N`    | `N`                   | all pairs `(i, j)`, `i < j`                          |
//! | `hypercube:d`   | `2^d`                 | node = bit string, edges flip one bit                |
//! | `tree:g`        | `2^(g+1) - 1`         | breadth first, children of `k` are `2k+1`, `2k+2`    |
//! | `cross:m`       | `m + 1`               | center `0`, arm tips `1..=m`                         |
//! | `square_center` | `5`                   | center `0`, corners `1..=4` on the cycle `1-2-3-4-1` |
//! | `lattice:WxH`   | `W·H`                 | node `y·W + x`, periodic in both directions          |

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{HermitianMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// An undirected graph with real edge weights and on-site energies.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    node_count: usize,
    edges: Vec<Edge>,
    onsite: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl WeightedGraph {
    pub fn new(
        node_count: usize,
        edges: Vec<Edge>,
        onsite: Vec<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        if onsite.len() != node_count {
            return Err(Error::InvalidGraph(format!(
                "{} on-site energies for {node_count} nodes",
                onsite.len()
            )));
        }
        if let Some(l) = &labels {
            if l.len() != node_count {
                return Err(Error::InvalidGraph(format!(
                    "{} labels for {node_count} nodes",
                    l.len()
                )));
            }
        }
        if let Some(k) = onsite.iter().position(|e| !e.is_finite()) {
            return Err(Error::InvalidGraph(format!(
                "on-site energy of node {k} is not finite"
            )));
        }
        let mut seen = BTreeSet::new();
        for e in &edges {
            if e.i >= node_count || e.j >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) references a node outside 0..{node_count}",
                    e.i, e.j
                )));
            }
            if e.i == e.j {
                return Err(Error::InvalidGraph(format!("self-loop on node {}", e.i)));
            }
            if !e.w.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "weight of edge ({}, {}) is not finite",
                    e.i, e.j
                )));
            }
            if !seen.insert((e.i.min(e.j), e.i.max(e.j))) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    e.i, e.j
                )));
            }
        }
        Ok(Self {
            node_count,
            edges,
            onsite,
            labels,
        })
    }

    /// Unit weights, zero on-site energies, no labels.
    pub fn unweighted(
        node_count: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let edges = pairs
            .into_iter()
            .map(|(i, j)| Edge { i, j, w: 1.0 })
            .collect();
        Self::new(node_count, edges, vec![0.0; node_count], None)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Symmetric weighted adjacency matrix.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.node_count;
        let mut a = DMatrix::zeros(n, n);
        for e in &self.edges {
            a[(e.i, e.j)] = e.w;
            a[(e.j, e.i)] = e.w;
        }
        a
    }

    /// Number of incident edges per node.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.node_count];
        for e in &self.edges {
            d[e.i] += 1;
            d[e.j] += 1;
        }
        d
    }
}

/// `H = -gamma · A + diag(onsite)`.
pub fn hamiltonian(g: &WeightedGraph, gamma: f64) -> HermitianMatrix {
    let n = g.node_count();
    let mut h = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for (k, &e) in g.onsite().iter().enumerate() {
        h[(k, k)] = C64::new(e, 0.0);
    }
    for e in g.edges() {
        let v = C64::new(-gamma * e.w, 0.0);
        h[(e.i, e.j)] = v;
        h[(e.j, e.i)] = v;
    }
    HermitianMatrix::new(h).expect("real symmetric assembly is Hermitian")
}

fn param<T: std::str::FromStr>(name: &str, raw: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::GeneratorParameter {
        name: name.to_string(),
        message: format!("cannot parse parameter `{raw}`"),
    })
}

fn check_range(name: &str, value: usize, lo: usize, hi: usize) -> Result<()> {
    if value < lo || value > hi {
        return Err(Error::GeneratorParameter {
            name: name.to_string(),
            message: format!("parameter {value} outside {lo}..={hi}"),
        });
    }
    Ok(())
}

/// Builds one of the named graphs, e.g. `ring:6`, `tree:2`, `lattice:4x4`.
pub fn build_named(spec: &str) -> Result<WeightedGraph> {
    let spec = spec.trim();
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let need = || {
        arg.ok_or_else(|| Error::GeneratorParameter {
            name: name.to_string(),
            message: "missing parameter".into(),
        })
    };
    match name {
        "ring" => {
            let n: usize = param(name, need()?)?;
            check_range(name, n, 3, 4096)?;
            WeightedGraph::unweighted(n, (0..n).map(|k| (k, (k + 1) % n)))
        }
        "complete" => {
            let n: usize = param(name, need()?)?;
            check_range(name, n, 2, 512)?;
            let pairs = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)));
            WeightedGraph::unweighted(n, pairs)
        }
        "hypercube" => {
            let d: usize = param(name, need()?)?;
            check_range(name, d, 1, 10)?;
            let n = 1usize << d;
            let pairs = (0..n).flat_map(|i| {
                (0..d)
                    .map(move |b| (i, i ^ (1 << b)))
                    .filter(|&(i, j)| i < j)
            });
            WeightedGraph::unweighted(n, pairs)
        }
        "tree" => {
            let g: usize = param(name, need()?)?;
            check_range(name, g, 1, 10)?;
            let n = (1usize << (g + 1)) - 1;
            let internal = (1usize << g) - 1;
            let pairs = (0..internal).flat_map(|k| [(k, 2 * k + 1), (k, 2 * k + 2)]);
            WeightedGraph::unweighted(n, pairs)
        }
        "cross" => {
            let m: usize = param(name, need()?)?;
            check_range(name, m, 1, 511)?;
            WeightedGraph::unweighted(m + 1, (1..=m).map(|k| (0, k)))
        }
        "square_center" => {
            if arg.is_some() {
                return Err(Error::GeneratorParameter {
                    name: name.to_string(),
                    message: "takes no parameter".into(),
                });
            }
            let ring = [(1, 2), (2, 3), (3, 4), (4, 1)];
            let spokes = (1..=4).map(|k| (0, k));
            WeightedGraph::unweighted(5, ring.into_iter().chain(spokes))
        }
        "lattice" => {
            let a = need()?;
            let (w, h) = a
                .split_once(['x', 'X'])
                .ok_or_else(|| Error::GeneratorParameter {
                    name: name.to_string(),
                    message: format!("expected WxH, got `{a}`"),
                })?;
            let (w, h): (usize, usize) = (param(name, w)?, param(name, h)?);
            check_range(name, w, 3, 64)?;
            check_range(name, h, 3, 64)?;
            let idx = move |x: usize, y: usize| y * w + x;
            let pairs = (0..h).flat_map(|y| {
                (0..w).flat_map(move |x| {
                    [
                        (idx(x, y), idx((x + 1) % w, y)),
                        (idx(x, y), idx(x, (y + 1) % h)),
                    ]
                })
            });
            WeightedGraph::unweighted(w * h, pairs)
        }
        _ => Err(Error::UnknownGenerator(spec.to_string())),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EdgeRepr {
    Weighted(usize, usize, f64),
    Unit(usize, usize),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    nodes: usize,
    #[serde(default)]
    edges: Vec<EdgeRepr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    onsite: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

/// Parses the JSON graph format
/// `{"nodes": n, "edges": [[i, j, w], ...], "onsite": [...], "labels": [...]}`.
pub fn load_graph(bytes: &[u8]) -> Result<WeightedGraph> {
    let f: GraphFile = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let edges = f
        .edges
        .into_iter()
        .map(|e| match e {
            EdgeRepr::Weighted(i, j, w) => Edge { i, j, w },
            EdgeRepr::Unit(i, j) => Edge { i, j, w: 1.0 },
        })
        .collect();
    let onsite = f.onsite.unwrap_or_else(|| vec![0.0; f.nodes]);
    WeightedGraph::new(f.nodes, edges, onsite, f.labels)
}

/// Serializes `g`; doubles use the shortest representation that re-parses
/// to the same bits.
pub fn save_graph(g: &WeightedGraph) -> Vec<u8> {
    let f = GraphFile {
        nodes: g.node_count,
        edges: g
            .edges
            .iter()
            .map(|e| EdgeRepr::Weighted(e.i, e.j, e.w))
            .collect(),
        onsite: Some(g.onsite.clone()),
        labels: g.labels.clone(),
    };
    let mut out = serde_json::to_vec_pretty(&f).expect("graph serialization cannot fail");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(g: &WeightedGraph) -> Vec<(usize, usize)> {
        g.edges().iter().map(|e| (e.i, e.j)).collect()
    }

    #[test]
    fn ring6_edges() {
        let g = build_named("ring:6").unwrap();
        assert_eq!(g.node_count(), 6);
        assert_eq!(
            pairs(&g),
            vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]
        );
        assert!(g.edges().iter().all(|e| e.w == 1.0));
    }

    #[test]
    fn tree2_matches_printed_hamiltonian() {
        #[rustfmt::skip]
        let printed = [
            [0, 1, 1, 0, 0, 0, 0],
            [1, 0, 0, 1, 1, 0, 0],
            [1, 0, 0, 0, 0, 1, 1],
            [0, 1, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 0, 0],
            [0, 0, 1, 0, 0, 0, 0],
            [0, 0, 1, 0, 0, 0, 0],
        ];
        let h = hamiltonian(&build_named("tree:2").unwrap(), 1.0);
        for (i, row) in printed.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                assert_eq!(h.matrix()[(i, j)], C64::new(-(a as f64), 0.0));
            }
        }
    }

    #[test]
    fn cross4_is_a_star() {
        let g = build_named("cross:4").unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!(pairs(&g), vec![(0, 1), (0, 2), (0, 3), (0, 4)]);
    }

    #[test]
    fn complete2_hamiltonian() {
        let h = hamiltonian(&build_named("complete:2").unwrap(), 1.0);
        let z = C64::new(0.0, 0.0);
        let m = C64::new(-1.0, 0.0);
        assert_eq!(h.matrix().as_slice(), &[z, m, m, z]);
    }

    #[test]
    fn degree_sequences() {
        assert!(build_named("ring:9")
            .unwrap()
            .degrees()
            .iter()
            .all(|&d| d == 2));
        for d in 1..=6 {
            let g = build_named(&format!("hypercube:{d}")).unwrap();
            assert_eq!(g.node_count(), 1 << d);
            assert!(g.degrees().iter().all(|&k| k == d));
        }
        let g = build_named("complete:7").unwrap();
        assert!(g.degrees().iter().all(|&k| k == 6));
        let g = build_named("lattice:4x5").unwrap();
        assert_eq!(g.node_count(), 20);
        assert!(g.degrees().iter().all(|&k| k == 4));
        let g = build_named("square_center").unwrap();
        assert_eq!(g.degrees(), vec![4, 3, 3, 3, 3]);
    }

    #[test]
    fn adjacency_is_symmetric_for_all_generators() {
        for spec in [
            "ring:7",
            "complete:5",
            "hypercube:3",
            "tree:3",
            "cross:6",
            "square_center",
            "lattice:3x4",
        ] {
            let a = build_named(spec).unwrap().adjacency();
            assert_eq!(a, a.transpose(), "{spec}");
        }
    }

    #[test]
    fn hamiltonian_is_linear_in_gamma() {
        let g = build_named("lattice:3x3").unwrap();
        let h1 = hamiltonian(&g, 0.37);
        let h2 = hamiltonian(&g, 0.74);
        for (a, b) in h1.matrix().iter().zip(h2.matrix().iter()) {
            assert_eq!(*b, *a * 2.0);
        }
    }

    #[test]
    fn generator_errors() {
        assert!(matches!(
            build_named("moebius:4"),
            Err(Error::UnknownGenerator(_))
        ));
        assert!(matches!(
            build_named("ring:2"),
            Err(Error::GeneratorParameter { .. })
        ));
        assert!(matches!(
            build_named("hypercube:11"),
            Err(Error::GeneratorParameter { .. })
        ));
        assert!(matches!(
            build_named("ring"),
            Err(Error::GeneratorParameter { .. })
        ));
        assert!(matches!(
            build_named("lattice:4"),
            Err(Error::GeneratorParameter { .. })
        ));
        assert!(matches!(
            build_named("ring:x"),
            Err(Error::GeneratorParameter { .. })
        ));
    }

    #[test]
    fn minimal_file() {
        let g = load_graph(br#"{"nodes": 2, "edges": [[0, 1]]}"#).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edges(), &[Edge { i: 0, j: 1, w: 1.0 }]);
        assert_eq!(g.onsite(), &[0.0, 0.0]);
    }

    #[test]
    fn round_trip_named() {
        let g = build_named("cross:4").unwrap();
        assert_eq!(load_graph(&save_graph(&g)).unwrap(), g);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(
            load_graph(br#"{"nodes": 2, "edges": [[0, 0, 1]]}"#),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            load_graph(br#"{"nodes": 3, "edges": [[0, 1], [1, 0, 2.0]]}"#),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            load_graph(br#"{"nodes": 2, "edges": [[0, 2]]}"#),
            Err(Error::InvalidGraph(_))
        ));
        match load_graph(b"{\"nodes\": 2,\n \"edges\": [[0, \"a\"]]}") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
