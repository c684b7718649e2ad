//! Graph automorphisms, stabilizers of the detection state and the
//! quantities derived from them: `ν`, the symmetry projector `P_S`, the
//! auxiliary uniform state and the upper bound `P_det(ψ) ≤ ⟨ψ|P_S|ψ⟩`.
//!
//! A permutation `S` acts on basis states as `S|i⟩ = |image[i]⟩`.

use std::collections::{HashMap, HashSet, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::detection::bright_eigenstates;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::spectral::SpectralDecomposition;
use crate::state::{check_dim, inner, HermitianMatrix, QuantumState, C64};

/// Membership tolerance for stabilizer elements.
pub const STABILIZER_TOL: f64 = 1e-10;
/// Relative singular value cutoff for `ν`.
pub const RANK_TOL: f64 = 1e-10;
/// `⟨ψ|P_S|ψ⟩` below this leaves the AUS undefined.
pub const AUS_MIN_WEIGHT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &i in &image {
            if i >= image.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidState(format!("{image:?} is not a bijection")));
            }
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).collect(),
        }
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            image: other.image.iter().map(|&i| self.image[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (i, &j) in self.image.iter().enumerate() {
            inv[j] = i;
        }
        Self { image: inv }
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(v.len());
        for (i, &j) in self.image.iter().enumerate() {
            out[j] = v[i];
        }
        out
    }

    pub fn matrix(&self) -> DMatrix<C64> {
        let n = self.image.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &j) in self.image.iter().enumerate() {
            m[(j, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn fixed_points(&self) -> usize {
        self.image
            .iter()
            .enumerate()
            .filter(|(i, j)| i == *j)
            .count()
    }
}

/// A finite permutation group given by all of its elements.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    elements: Vec<Permutation>,
    generators: Vec<Permutation>,
}

impl SymmetryGroup {
    /// Closes `generators` under composition.
    pub fn generated_by(n: usize, generators: Vec<Permutation>) -> Result<Self> {
        for g in &generators {
            check_dim(n, g.len())?;
        }
        let mut seen: HashSet<Permutation> = HashSet::new();
        let id = Permutation::identity(n);
        seen.insert(id.clone());
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in &generators {
                let y = g.compose(&x);
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        let mut elements: Vec<Permutation> = seen.into_iter().collect();
        elements.sort();
        let generators = minimal_generators(&elements);
        Ok(Self {
            elements,
            generators,
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn degree(&self) -> usize {
        self.elements[0].len()
    }

    /// Sorted lexicographically by image; the identity comes first.
    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    /// Identity, inverses and closure, checked by enumeration.
    pub fn is_group(&self) -> bool {
        let set: HashSet<&Permutation> = self.elements.iter().collect();
        set.contains(&Permutation::identity(self.degree()))
            && self.elements.iter().all(|a| set.contains(&a.inverse()))
            && self
                .elements
                .iter()
                .all(|a| self.generators.iter().all(|g| set.contains(&g.compose(a))))
    }

    /// `max_S ‖SH - HS‖_max`.
    pub fn commutator_norm(&self, h: &HermitianMatrix) -> f64 {
        let m = h.matrix();
        let n = m.nrows();
        self.elements
            .iter()
            .map(|s| {
                let p = s.image();
                let mut worst = 0.0_f64;
                for i in 0..n {
                    for j in 0..n {
                        worst = worst.max((m[(p[i], p[j])] - m[(i, j)]).norm());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }
}

/// Greedy generating set: walk the sorted elements and keep every element not
/// yet generated by the ones kept so far.
fn minimal_generators(elements: &[Permutation]) -> Vec<Permutation> {
    let Some(first) = elements.first() else {
        return Vec::new();
    };
    let mut gens: Vec<Permutation> = Vec::new();
    let mut span: HashSet<Permutation> = HashSet::from([Permutation::identity(first.len())]);
    for e in elements {
        if span.contains(e) {
            continue;
        }
        gens.push(e.clone());
        let mut queue: VecDeque<Permutation> = span.iter().cloned().collect();
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let y = g.compose(&x);
                if span.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        if span.len() == elements.len() {
            break;
        }
    }
    gens
}

#[derive(Clone, Copy, Debug)]
pub struct AutomorphismOptions {
    pub max_nodes: usize,
    pub max_order: usize,
}

impl Default for AutomorphismOptions {
    fn default() -> Self {
        Self {
            max_nodes: 64,
            max_order: 1_000_000,
        }
    }
}

/// Totally ordered bit key of a float (with `-0.0 == 0.0`).
fn fkey(x: f64) -> u64 {
    let b = (x + 0.0).to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Weighted adjacency with on-site energies on the diagonal, as sortable keys.
struct Colored {
    n: usize,
    onsite: Vec<u64>,
    nbrs: Vec<Vec<(usize, u64)>>,
    weight: Vec<Vec<u64>>,
}

impl Colored {
    fn new(g: &WeightedGraph) -> Self {
        let n = g.node_count();
        let zero = fkey(0.0);
        let mut weight = vec![vec![zero; n]; n];
        let mut nbrs = vec![Vec::new(); n];
        for e in g.edges() {
            if e.w == 0.0 {
                continue;
            }
            let k = fkey(e.w);
            weight[e.i][e.j] = k;
            weight[e.j][e.i] = k;
            nbrs[e.i].push((e.j, k));
            nbrs[e.j].push((e.i, k));
        }
        Self {
            n,
            onsite: g.onsite().iter().map(|&x| fkey(x)).collect(),
            nbrs,
            weight,
        }
    }

    fn initial(&self) -> Vec<Vec<usize>> {
        let key = |v: usize| {
            let mut ws: Vec<u64> = self.nbrs[v].iter().map(|&(_, w)| w).collect();
            ws.sort_unstable();
            (self.onsite[v], ws)
        };
        split_by(vec![(0..self.n).collect()], key)
    }

    /// Splits cells until every vertex of a cell sees the same multiset of
    /// (cell, weight) pairs.
    fn refine(&self, mut cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        loop {
            let mut cell_of = vec![0; self.n];
            for (c, cell) in cells.iter().enumerate() {
                for &v in cell {
                    cell_of[v] = c;
                }
            }
            let before = cells.len();
            cells = split_by(cells, |v| {
                let mut sig: Vec<(usize, u64)> =
                    self.nbrs[v].iter().map(|&(u, w)| (cell_of[u], w)).collect();
                sig.sort_unstable();
                sig
            });
            if cells.len() == before {
                return cells;
            }
        }
    }

    fn is_automorphism(&self, p: &[usize]) -> bool {
        (0..self.n).all(|i| {
            self.onsite[p[i]] == self.onsite[i]
                && self.nbrs[i]
                    .iter()
                    .all(|&(j, w)| self.weight[p[i]][p[j]] == w)
        }) && (0..self.n).all(|i| self.nbrs[i].len() == self.nbrs[p[i]].len())
    }
}

/// Splits every cell by `key`, keeping sub-cells in key order.
fn split_by<K: Ord>(cells: Vec<Vec<usize>>, key: impl Fn(usize) -> K) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(cells.len());
    for cell in cells {
        if cell.len() == 1 {
            out.push(cell);
            continue;
        }
        let mut keyed: Vec<(K, usize)> = cell.into_iter().map(|v| (key(v), v)).collect();
        keyed.sort();
        let mut current: Vec<usize> = Vec::new();
        for k in 0..keyed.len() {
            if k > 0 && keyed[k].0 != keyed[k - 1].0 {
                out.push(std::mem::take(&mut current));
            }
            current.push(keyed[k].1);
        }
        out.push(current);
    }
    out
}

fn individualize(cells: &[Vec<usize>], c: usize, v: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(cells.len() + 1);
    out.extend_from_slice(&cells[..c]);
    out.push(vec![v]);
    out.push(cells[c].iter().copied().filter(|&x| x != v).collect());
    out.extend_from_slice(&cells[c + 1..]);
    out
}

fn shape(cells: &[Vec<usize>]) -> Vec<usize> {
    cells.iter().map(Vec::len).collect()
}

struct Search<'a> {
    graph: &'a Colored,
    /// Equitable partitions along the reference path, and the target cell at each level.
    path: Vec<(Vec<Vec<usize>>, usize)>,
    leaf: Vec<usize>,
    found: Vec<Permutation>,
    limit: usize,
}

impl Search<'_> {
    fn dfs(&mut self, level: usize, cells: Vec<Vec<usize>>) -> Result<()> {
        if level == self.path.len() {
            let mut image = vec![0; self.graph.n];
            for (k, &v) in self.leaf.iter().enumerate() {
                image[v] = cells[k][0];
            }
            if self.graph.is_automorphism(&image) {
                if self.found.len() == self.limit {
                    return Err(Error::GroupTooLarge { limit: self.limit });
                }
                self.found.push(Permutation { image });
            }
            return Ok(());
        }
        let target = self.path[level].1;
        let want = shape(&self.path.get(level + 1).map_or_else(
            || self.leaf.iter().map(|&v| vec![v]).collect::<Vec<_>>(),
            |p| p.0.clone(),
        ));
        let mut candidates = cells[target].clone();
        candidates.sort_unstable();
        for w in candidates {
            let next = self.graph.refine(individualize(&cells, target, w));
            if shape(&next) == want {
                self.dfs(level + 1, next)?;
            }
        }
        Ok(())
    }
}

/// Full automorphism group of the weighted graph with on-site energies.
///
/// Individualization-refinement: one reference path is fixed by always
/// individualizing the first vertex of the first non-singleton cell; every
/// other leaf of the search tree whose induced map preserves weights and
/// on-site energies is an automorphism, and every automorphism is reached
/// exactly once.
pub fn automorphisms(g: &WeightedGraph) -> Result<SymmetryGroup> {
    automorphisms_with(g, &AutomorphismOptions::default())
}

pub fn automorphisms_with(g: &WeightedGraph, opts: &AutomorphismOptions) -> Result<SymmetryGroup> {
    if g.node_count() > opts.max_nodes {
        return Err(Error::NodeCap {
            nodes: g.node_count(),
            cap: opts.max_nodes,
        });
    }
    let colored = Colored::new(g);
    let root = colored.refine(colored.initial());

    let mut path = Vec::new();
    let mut cells = root.clone();
    while let Some(target) = cells.iter().position(|c| c.len() > 1) {
        let v = *cells[target].iter().min().unwrap();
        let next = colored.refine(individualize(&cells, target, v));
        path.push((cells, target));
        cells = next;
    }
    let leaf: Vec<usize> = cells.iter().map(|c| c[0]).collect();

    let mut search = Search {
        graph: &colored,
        path,
        leaf,
        found: Vec::new(),
        limit: opts.max_order,
    };
    search.dfs(0, root)?;
    let mut elements = search.found;
    elements.sort();
    let generators = minimal_generators(&elements);
    Ok(SymmetryGroup {
        elements,
        generators,
    })
}

/// Exhaustive search over all `n!` permutations; test oracle for `n ≤ 8`.
#[doc(hidden)]
pub fn brute_force_automorphisms(g: &WeightedGraph) -> Vec<Permutation> {
    assert!(g.node_count() <= 8, "brute force is limited to 8 nodes");
    let colored = Colored::new(g);
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..g.node_count()).collect();
    heap_permutations(&mut perm, g.node_count(), &mut |p| {
        if colored.is_automorphism(p) {
            out.push(Permutation { image: p.to_vec() });
        }
    });
    out.sort();
    out
}

fn heap_permutations(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k <= 1 {
        f(p);
        return;
    }
    for i in 0..k {
        heap_permutations(p, k - 1, f);
        if k.is_multiple_of(2) {
            p.swap(i, k - 1);
        } else {
            p.swap(0, k - 1);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilizerElement {
    pub perm: Permutation,
    /// `e^{iλ(S)} = ⟨ψ_d|S|ψ_d⟩`.
    #[serde(serialize_with = "ser_complex")]
    pub phase: C64,
}

fn ser_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// Symmetries mapping the detection state onto itself up to a phase.
#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    dim: usize,
    elements: Vec<StabilizerElement>,
}

impl StabilizerGroup {
    /// Builds a stabilizer from explicit elements.
    pub fn from_elements(dim: usize, elements: Vec<StabilizerElement>) -> Result<Self> {
        for e in &elements {
            check_dim(dim, e.perm.len())?;
        }
        Ok(Self { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[StabilizerElement] {
        &self.elements
    }

    pub fn all_phases_trivial(&self) -> bool {
        self.elements
            .iter()
            .all(|e| (e.phase - C64::new(1.0, 0.0)).norm() < STABILIZER_TOL)
    }

    /// Closure under composition, checked by enumeration.
    pub fn is_closed(&self) -> bool {
        let set: HashSet<&Permutation> = self.elements.iter().map(|e| &e.perm).collect();
        set.contains(&Permutation::identity(self.dim))
            && self.elements.iter().all(|a| {
                self.elements
                    .iter()
                    .all(|b| set.contains(&a.perm.compose(&b.perm)))
            })
    }

    /// Node orbits, each sorted, ordered by their smallest node.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut class = vec![usize::MAX; self.dim];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for v in 0..self.dim {
            if class[v] != usize::MAX {
                continue;
            }
            let mut orbit: Vec<usize> = self.elements.iter().map(|e| e.perm.image[v]).collect();
            orbit.push(v);
            orbit.sort_unstable();
            orbit.dedup();
            for &u in &orbit {
                class[u] = out.len();
            }
            out.push(orbit);
        }
        out
    }

    /// `P_S v = (1/|S|) Σ e^{-iλ(S)} S v`.
    pub fn project(&self, v: &DVector<C64>) -> DVector<C64> {
        let mut acc = DVector::zeros(self.dim);
        for e in &self.elements {
            let w = e.phase.conj();
            for (i, &j) in e.perm.image.iter().enumerate() {
                acc[j] += w * v[i];
            }
        }
        acc / C64::new(self.elements.len() as f64, 0.0)
    }

    /// `tr P_S`, the dimension of the symmetric subspace.
    pub fn symmetric_dim(&self) -> usize {
        let tr: C64 = self
            .elements
            .iter()
            .map(|e| e.phase.conj() * e.perm.fixed_points() as f64)
            .sum();
        (tr.re / self.elements.len() as f64).round() as usize
    }

    /// States `e^{-iλ(S)} S|r⟩` physically equivalent to `|r⟩`, one per
    /// orbit node, starting with `|r⟩` itself.
    pub fn equivalent_states(&self, r: usize) -> Vec<DVector<C64>> {
        let mut by_node: HashMap<usize, C64> = HashMap::new();
        for e in &self.elements {
            by_node.entry(e.perm.image[r]).or_insert(e.phase.conj());
        }
        let mut nodes: Vec<usize> = by_node.keys().copied().filter(|&x| x != r).collect();
        nodes.sort_unstable();
        nodes.insert(0, r);
        nodes
            .into_iter()
            .map(|x| {
                let mut v = DVector::zeros(self.dim);
                v[x] = by_node[&x];
                v
            })
            .collect()
    }
}

/// Elements of `group` with `S ψ_d = e^{iλ(S)} ψ_d`.
pub fn stabilizer(group: &SymmetryGroup, psi_d: &QuantumState) -> Result<StabilizerGroup> {
    check_dim(group.degree(), psi_d.dim())?;
    let d = psi_d.vector();
    let elements: Vec<StabilizerElement> = group
        .elements()
        .iter()
        .filter_map(|s| {
            let sd = s.apply(d);
            let p = inner(d, &sd);
            let ok =
                (p.norm() - 1.0).abs() < STABILIZER_TOL && (&sd - d * p).norm() < STABILIZER_TOL;
            ok.then(|| StabilizerElement {
                perm: s.clone(),
                phase: p,
            })
        })
        .collect();
    let stab = StabilizerGroup {
        dim: psi_d.dim(),
        elements,
    };
    let set: HashSet<&Permutation> = stab.elements.iter().map(|e| &e.perm).collect();
    let gens = minimal_generators(
        &stab
            .elements
            .iter()
            .map(|e| e.perm.clone())
            .collect::<Vec<_>>(),
    );
    let closed = stab
        .elements
        .iter()
        .all(|a| gens.iter().all(|g| set.contains(&g.compose(&a.perm))));
    if !closed {
        return Err(Error::Unsupported(
            "stabilizer elements do not form a group within tolerance".into(),
        ));
    }
    Ok(stab)
}

/// Numerical rank of `[S_1 ψ, S_2 ψ, ...]` with relative cutoff [`RANK_TOL`].
pub fn nu(stab: &StabilizerGroup, psi_in: &QuantumState) -> Result<usize> {
    check_dim(stab.dim(), psi_in.dim())?;
    let n = stab.dim();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut cols: Vec<DVector<C64>> = Vec::new();
    for e in stab.elements() {
        let v = e.perm.apply(psi_in.vector());
        let key: Vec<i64> = v
            .iter()
            .flat_map(|z| [(z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64])
            .collect();
        if seen.insert(key) {
            cols.push(v);
        }
    }
    Ok(numerical_rank(n, &cols, RANK_TOL))
}

/// Rank of the column set, compressing in chunks so that at most `2n`
/// columns enter any single SVD. The compression keeps `M M†` unchanged.
fn numerical_rank(n: usize, cols: &[DVector<C64>], rel_tol: f64) -> usize {
    let mut carry: Option<DMatrix<C64>> = None;
    let mut sv: Vec<f64> = Vec::new();
    for chunk in cols.chunks(n.max(1)) {
        let prev = carry.as_ref().map_or(0, |m| m.ncols());
        let mut m = DMatrix::zeros(n, prev + chunk.len());
        if let Some(c) = &carry {
            m.columns_mut(0, prev).copy_from(c);
        }
        for (k, v) in chunk.iter().enumerate() {
            m.set_column(prev + k, v);
        }
        let svd = m.svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let keep = svd.singular_values.len().min(n);
        let mut next = DMatrix::zeros(n, keep);
        for k in 0..keep {
            next.set_column(k, &(u.column(k) * C64::new(svd.singular_values[k], 0.0)));
        }
        sv = svd.singular_values.iter().copied().collect();
        carry = Some(next);
    }
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// `P_S = (1/|S|) Σ e^{-iλ(S)} S`.
pub fn symmetry_projector(stab: &StabilizerGroup) -> HermitianMatrix {
    let n = stab.dim();
    let mut m = DMatrix::zeros(n, n);
    for e in stab.elements() {
        let w = e.phase.conj();
        for (i, &j) in e.perm.image.iter().enumerate() {
            m[(j, i)] += w;
        }
    }
    m /= C64::new(stab.order() as f64, 0.0);
    HermitianMatrix::hermitize(m)
}

/// Auxiliary uniform state `u = P_S ψ / √⟨ψ|P_S|ψ⟩`.
#[derive(Clone, Debug)]
pub struct Aus {
    pub state: QuantumState,
    /// `⟨ψ|P_S|ψ⟩`.
    pub weight: f64,
}

pub fn aus(stab: &StabilizerGroup, psi_in: &QuantumState) -> Result<Aus> {
    check_dim(stab.dim(), psi_in.dim())?;
    let p = stab.project(psi_in.vector());
    let weight = inner(psi_in.vector(), &p).re;
    if weight < AUS_MIN_WEIGHT {
        return Err(Error::AusUndefined { weight });
    }
    let state = QuantumState::normalized(p)?;
    Ok(Aus { state, weight })
}

/// `P_det(ψ) ≤ ⟨ψ|P_S|ψ⟩`; equals `1/ν` for localized states with trivial phases.
pub fn upper_bound(stab: &StabilizerGroup, psi_in: &QuantumState) -> Result<f64> {
    check_dim(stab.dim(), psi_in.dim())?;
    let p = stab.project(psi_in.vector());
    Ok(inner(psi_in.vector(), &p).re.clamp(0.0, 1.0))
}

/// Dark states `δ_j = (j·r_j - Σ_{m<j} r_m)/√(j(j+1))`, `j = 1..ν-1`, for
/// orthonormal, physically equivalent `r_0 .. r_{ν-1}`.
pub fn equivalent_dark_basis(orbit: &[DVector<C64>]) -> Result<Vec<DVector<C64>>> {
    let mut worst = 0.0_f64;
    for (a, x) in orbit.iter().enumerate() {
        for (b, y) in orbit.iter().enumerate() {
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((inner(x, y) - C64::new(want, 0.0)).norm());
        }
    }
    if worst > 1e-10 {
        return Err(Error::NotOrthonormal { deviation: worst });
    }
    let mut out = Vec::new();
    let mut prefix = match orbit.first() {
        Some(r0) => r0.clone(),
        None => return Ok(out),
    };
    for (j, rj) in orbit.iter().enumerate().skip(1) {
        let jf = j as f64;
        let v = (rj * C64::new(jf, 0.0) - &prefix) / C64::new((jf * (jf + 1.0)).sqrt(), 0.0);
        out.push(v);
        prefix += rj;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Saturation {
    pub saturates: bool,
    pub symmetric_dark_dim: usize,
    pub symmetric_dim: usize,
    pub bright_count: usize,
}

/// The bound is exact for every initial state iff the symmetric subspace
/// holds no dark state, i.e. `dim(P_S H) == #bright eigenstates`.
pub fn saturation_check(
    sd: &SpectralDecomposition,
    stab: &StabilizerGroup,
    psi_d: &QuantumState,
) -> Result<Saturation> {
    check_dim(sd.dim(), stab.dim())?;
    let bright_count = bright_eigenstates(sd, psi_d)?.bright.len();
    let symmetric_dim = stab.symmetric_dim();
    let symmetric_dark_dim = symmetric_dim.saturating_sub(bright_count);
    Ok(Saturation {
        saturates: symmetric_dark_dim == 0,
        symmetric_dark_dim,
        symmetric_dim,
        bright_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_named, Edge};

    fn named(spec: &str) -> WeightedGraph {
        build_named(spec).unwrap()
    }

    fn loc(n: usize, r: usize) -> QuantumState {
        QuantumState::localized(n, r).unwrap()
    }

    #[test]
    fn known_group_orders() {
        for (spec, order) in [
            ("ring:8", 16),
            ("ring:6", 12),
            ("tree:2", 8),
            ("complete:4", 24),
            ("hypercube:3", 48),
            ("cross:4", 24),
            ("square_center", 8),
            ("lattice:4x4", 384),
            ("lattice:3x3", 72),
        ] {
            let g = automorphisms(&named(spec)).unwrap();
            assert_eq!(g.order(), order, "{spec}");
            assert!(g.is_group(), "{spec}");
            assert!(g.elements()[0].is_identity());
        }
    }

    #[test]
    fn matches_brute_force() {
        let specs = [
            "ring:5",
            "ring:8",
            "tree:2",
            "cross:3",
            "square_center",
            "complete:5",
            "hypercube:3",
        ];
        for spec in specs {
            let g = named(spec);
            let fast: Vec<Permutation> = automorphisms(&g).unwrap().elements().to_vec();
            assert_eq!(fast, brute_force_automorphisms(&g), "{spec}");
        }
    }

    #[test]
    fn weights_and_onsite_break_symmetry() {
        let edges = vec![
            Edge { i: 0, j: 1, w: 1.0 },
            Edge { i: 1, j: 2, w: 1.0 },
            Edge { i: 2, j: 3, w: 2.0 },
            Edge { i: 3, j: 0, w: 1.0 },
        ];
        let g = WeightedGraph::new(4, edges, vec![0.0; 4], None).unwrap();
        let a = automorphisms(&g).unwrap();
        assert_eq!(a.order(), 2);
        assert_eq!(a.elements().to_vec(), brute_force_automorphisms(&g));

        let ring = named("ring:6");
        let mut onsite = vec![0.0; 6];
        onsite[0] = 0.5;
        let g = WeightedGraph::new(6, ring.edges().to_vec(), onsite, None).unwrap();
        assert_eq!(automorphisms(&g).unwrap().order(), 2);
    }

    #[test]
    fn caps() {
        let opts = AutomorphismOptions {
            max_nodes: 64,
            max_order: 100,
        };
        assert!(matches!(
            automorphisms_with(&named("complete:6"), &opts),
            Err(Error::GroupTooLarge { limit: 100 })
        ));
        assert!(matches!(
            automorphisms(&named("ring:65")),
            Err(Error::NodeCap { nodes: 65, cap: 64 })
        ));
    }

    #[test]
    fn group_commutes_with_hamiltonian() {
        for spec in ["tree:3", "lattice:4x4", "hypercube:4"] {
            let g = named(spec);
            let h = crate::graph::hamiltonian(&g, 1.0);
            assert!(automorphisms(&g).unwrap().commutator_norm(&h) < 1e-10);
        }
    }

    #[test]
    fn ring8_detection_stabilizer() {
        let group = automorphisms(&named("ring:8")).unwrap();
        let stab = stabilizer(&group, &loc(8, 0)).unwrap();
        assert_eq!(stab.order(), 2);
        assert!(stab.all_phases_trivial());
        let reflection = stab
            .elements()
            .iter()
            .find(|e| !e.perm.is_identity())
            .unwrap();
        assert_eq!(reflection.perm.image(), &[0, 7, 6, 5, 4, 3, 2, 1]);
        for r in 0..8 {
            let expect = if r == 0 || r == 4 { 1 } else { 2 };
            assert_eq!(nu(&stab, &loc(8, r)).unwrap(), expect);
        }
        let p = symmetry_projector(&stab);
        let expect = (DMatrix::identity(8, 8) + reflection.perm.matrix()) / C64::new(2.0, 0.0);
        assert!((p.matrix() - expect).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn tree_root_stabilizer_is_whole_group() {
        let group = automorphisms(&named("tree:2")).unwrap();
        assert_eq!(stabilizer(&group, &loc(7, 0)).unwrap().order(), 8);
        assert_eq!(stabilizer(&group, &loc(7, 1)).unwrap().order(), 4);
        assert_eq!(stabilizer(&group, &loc(7, 3)).unwrap().order(), 2);
    }

    #[test]
    fn ring_eigenstate_detection_has_translation_phases() {
        let l = 6;
        let group = automorphisms(&named("ring:6")).unwrap();
        for kd in [1i32, 2] {
            let amps: Vec<C64> = (0..l)
                .map(|x| {
                    C64::from_polar(
                        1.0 / (l as f64).sqrt(),
                        std::f64::consts::TAU * (kd * x) as f64 / l as f64,
                    )
                })
                .collect();
            let d = QuantumState::new(DVector::from_vec(amps)).unwrap();
            let stab = stabilizer(&group, &d).unwrap();
            assert_eq!(stab.order(), l as usize);
            for e in stab.elements() {
                // translation by ξ has image[0] = ξ
                let xi = e.perm.image()[0];
                assert_eq!(e.perm.image()[1], (xi + 1) % 6, "no reflections");
                let want = C64::from_polar(
                    1.0,
                    -std::f64::consts::TAU * (kd as f64) * xi as f64 / l as f64,
                );
                assert!((e.phase - want).norm() < 1e-12);
            }
            assert!(stab.is_closed());
            for r in 0..6 {
                assert_eq!(nu(&stab, &loc(6, r)).unwrap(), 6);
                assert!((upper_bound(&stab, &loc(6, r)).unwrap() - 1.0 / 6.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cross_aus_and_weights() {
        let group = automorphisms(&named("cross:4")).unwrap();
        let stab = stabilizer(&group, &loc(5, 0)).unwrap();
        assert_eq!(nu(&stab, &loc(5, 1)).unwrap(), 4);
        let a = aus(&stab, &loc(5, 1)).unwrap();
        assert!((a.weight - 0.25).abs() < 1e-14);
        let want = QuantumState::from_real(&[0.0, 0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!((a.state.vector() - want.vector()).norm() < 1e-14);
        let fixed = aus(&stab, &want).unwrap();
        assert!((fixed.weight - 1.0).abs() < 1e-14);
        for alpha in [0.0, 0.4, std::f64::consts::FRAC_PI_2, 2.5] {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut v = DVector::zeros(5);
            v[1] = C64::new(h, 0.0);
            v[2] = C64::from_polar(h, alpha);
            let psi = QuantumState::new(v).unwrap();
            let w = aus(&stab, &psi).unwrap().weight;
            assert!((w - (1.0 + f64::cos(alpha)) / 4.0).abs() < 1e-14);
        }
        let mut v = DVector::zeros(5);
        v[1] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[2] = C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
        assert!(matches!(
            aus(&stab, &QuantumState::new(v).unwrap()),
            Err(Error::AusUndefined { .. })
        ));
    }

    #[test]
    fn dark_basis_shapes() {
        let e = |k: usize| {
            let mut v = DVector::zeros(4);
            v[k] = C64::new(1.0, 0.0);
            v
        };
        let two = equivalent_dark_basis(&[e(0), e(1)]).unwrap();
        assert_eq!(two.len(), 1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((&two[0] - (e(1) - e(0)) * C64::new(h, 0.0)).norm() < 1e-15);
        assert!(equivalent_dark_basis(&[e(2)]).unwrap().is_empty());
        let four = equivalent_dark_basis(&[e(0), e(1), e(2), e(3)]).unwrap();
        assert_eq!(four.len(), 3);
        let uniform = DVector::from_element(4, C64::new(0.5, 0.0));
        for (a, x) in four.iter().enumerate() {
            assert!((x.norm() - 1.0).abs() < 1e-14);
            assert!(inner(&uniform, x).norm() < 1e-14);
            for y in &four[a + 1..] {
                assert!(inner(x, y).norm() < 1e-14);
            }
        }
        let bad = [e(0), e(0) * C64::new(2.0, 0.0)];
        assert!(matches!(
            equivalent_dark_basis(&bad),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn trivial_stabilizer_projector_is_identity() {
        let stab = StabilizerGroup::from_elements(
            3,
            vec![StabilizerElement {
                perm: Permutation::identity(3),
                phase: C64::new(1.0, 0.0),
            }],
        )
        .unwrap();
        let p = symmetry_projector(&stab);
        assert_eq!(p.matrix(), &DMatrix::identity(3, 3));
        assert_eq!(stab.symmetric_dim(), 3);
    }

    #[test]
    fn orbits_and_equivalent_states() {
        let group = automorphisms(&named("ring:8")).unwrap();
        let stab = stabilizer(&group, &loc(8, 0)).unwrap();
        assert_eq!(
            stab.orbits(),
            vec![vec![0], vec![1, 7], vec![2, 6], vec![3, 5], vec![4]]
        );
        let eq = stab.equivalent_states(7);
        assert_eq!(eq.len(), 2);
        assert_eq!(eq[0][7], C64::new(1.0, 0.0));
        assert_eq!(eq[1][1], C64::new(1.0, 0.0));
    }

    #[test]
    fn permutation_algebra() {
        let a = Permutation::new(vec![1, 2, 0]).unwrap();
        let b = Permutation::new(vec![0, 2, 1]).unwrap();
        assert!(a.compose(&a.inverse()).is_identity());
        assert_eq!(a.compose(&b).image(), &[1, 0, 2]);
        let v = DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(2.0, 0.0),
            C64::new(3.0, 0.0),
        ]);
        let direct = a.apply(&b.apply(&v));
        assert_eq!(direct, a.compose(&b).apply(&v));
        assert_eq!(a.matrix() * &v, a.apply(&v));
        assert!(Permutation::new(vec![0, 0]).is_err());
    }
}
