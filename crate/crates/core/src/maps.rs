//! Rooted planar maps as rotation systems.
//!
//! Darts are `0..n_darts`. `alpha` pairs the two darts of an edge, `sigma`
//! sends a dart to the next dart counterclockwise around its source vertex.
//! Faces are the orbits of `phi = sigma ∘ alpha`, i.e. `phi(d) =
//! sigma(alpha(d))`; each face lies to the right of the darts that trace it,
//! so the root face is the orbit of the root dart.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trees::LabeledTree;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CombinatorialMap {
    pub n_darts: usize,
    pub alpha: Vec<usize>,
    pub sigma: Vec<usize>,
    pub root: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub darts: Vec<usize>,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceReport {
    pub faces: Vec<Face>,
    pub root_face_index: usize,
    /// degree -> number of faces with that degree
    pub degree_histogram: BTreeMap<usize, usize>,
}

impl FaceReport {
    pub fn root_face(&self) -> &Face {
        &self.faces[self.root_face_index]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapViolation {
    ArrayLength { which: &'static str, len: usize },
    NotPermutation(&'static str),
    AlphaFixedPoint(usize),
    AlphaNotInvolution(usize),
    RootOutOfRange(usize),
    Disconnected,
    NotPlanar { vertices: usize, edges: usize, faces: usize },
    Empty,
}

impl fmt::Display for MapViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapViolation::ArrayLength { which, len } => {
                write!(f, "{which} has length {len}, expected n_darts")
            }
            MapViolation::NotPermutation(which) => write!(f, "{which} is not a permutation"),
            MapViolation::AlphaFixedPoint(d) => write!(f, "alpha not fixed-point-free (dart {d})"),
            MapViolation::AlphaNotInvolution(d) => write!(f, "alpha not an involution (dart {d})"),
            MapViolation::RootOutOfRange(d) => write!(f, "root dart {d} out of range"),
            MapViolation::Disconnected => write!(f, "alpha and sigma do not act transitively"),
            MapViolation::NotPlanar {
                vertices,
                edges,
                faces,
            } => write!(f, "V - E + F = {vertices} - {edges} + {faces} ≠ 2"),
            MapViolation::Empty => write!(f, "map has no darts"),
        }
    }
}

/// Byte string identifying a rooted map up to dart relabeling.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(pub Vec<u8>);

fn orbits(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut d = start;
        while !seen[d] {
            seen[d] = true;
            cycle.push(d);
            d = perm[d];
        }
        out.push(cycle);
    }
    out
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

impl CombinatorialMap {
    pub fn new(alpha: Vec<usize>, sigma: Vec<usize>, root: usize) -> Self {
        CombinatorialMap {
            n_darts: alpha.len(),
            alpha,
            sigma,
            root,
        }
    }

    /// One edge between two distinct vertices.
    pub fn single_edge() -> Self {
        Self::new(vec![1, 0], vec![0, 1], 0)
    }

    pub fn validate(&self) -> std::result::Result<(), MapViolation> {
        let n = self.n_darts;
        if n == 0 {
            return Err(MapViolation::Empty);
        }
        for (which, arr) in [("alpha", &self.alpha), ("sigma", &self.sigma)] {
            if arr.len() != n {
                return Err(MapViolation::ArrayLength {
                    which,
                    len: arr.len(),
                });
            }
            if !is_permutation(arr) {
                return Err(MapViolation::NotPermutation(which));
            }
        }
        for d in 0..n {
            if self.alpha[d] == d {
                return Err(MapViolation::AlphaFixedPoint(d));
            }
            if self.alpha[self.alpha[d]] != d {
                return Err(MapViolation::AlphaNotInvolution(d));
            }
        }
        if self.root >= n {
            return Err(MapViolation::RootOutOfRange(self.root));
        }
        // transitivity
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(d) = stack.pop() {
            for e in [self.alpha[d], self.sigma[d]] {
                if !seen[e] {
                    seen[e] = true;
                    reached += 1;
                    stack.push(e);
                }
            }
        }
        if reached != n {
            return Err(MapViolation::Disconnected);
        }
        let (v, e, f) = (self.vertex_count(), n / 2, orbits(&self.phi()).len());
        if v + f != e + 2 {
            return Err(MapViolation::NotPlanar {
                vertices: v,
                edges: e,
                faces: f,
            });
        }
        Ok(())
    }

    pub(crate) fn checked(&self) -> Result<&Self> {
        self.validate()
            .map_err(|v| Error::InvalidMap(v.to_string()))?;
        Ok(self)
    }

    pub fn edge_count(&self) -> usize {
        self.n_darts / 2
    }

    pub fn phi(&self) -> Vec<usize> {
        (0..self.n_darts).map(|d| self.sigma[self.alpha[d]]).collect()
    }

    /// Source-vertex index for each dart, numbering vertices by first dart.
    pub fn dart_vertices(&self) -> Vec<usize> {
        let mut vertex = vec![0; self.n_darts];
        for (i, cyc) in orbits(&self.sigma).iter().enumerate() {
            for &d in cyc {
                vertex[d] = i;
            }
        }
        vertex
    }

    pub fn vertex_count(&self) -> usize {
        orbits(&self.sigma).len()
    }

    pub fn face_count(&self) -> usize {
        orbits(&self.phi()).len()
    }

    /// Endpoint pairs `(source(d), source(alpha(d)))` for one dart `d` per edge.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let vert = self.dart_vertices();
        (0..self.n_darts)
            .filter(|&d| d < self.alpha[d])
            .map(|d| (vert[d], vert[self.alpha[d]]))
            .collect()
    }
}

pub fn validate_map(m: &CombinatorialMap) -> std::result::Result<(), MapViolation> {
    m.validate()
}

pub fn faces(m: &CombinatorialMap) -> Result<FaceReport> {
    m.checked()?;
    let faces: Vec<Face> = orbits(&m.phi())
        .into_iter()
        .map(|darts| Face {
            degree: darts.len(),
            darts,
        })
        .collect();
    let root_face_index = faces
        .iter()
        .position(|f| f.darts.contains(&m.root))
        .expect("root dart lies on some face");
    let mut degree_histogram = BTreeMap::new();
    for f in &faces {
        *degree_histogram.entry(f.degree).or_insert(0) += 1;
    }
    Ok(FaceReport {
        faces,
        root_face_index,
        degree_histogram,
    })
}

/// No loops, no cut vertex, at least one edge.
pub fn is_nonseparable(m: &CombinatorialMap) -> Result<bool> {
    m.checked()?;
    let edges = m.edges();
    if edges.iter().any(|&(u, v)| u == v) {
        return Ok(false);
    }
    let n = m.vertex_count();
    let mut adj = vec![Vec::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, i));
        adj[v].push((u, i));
    }
    Ok(!has_articulation_point(&adj))
}

/// Iterative Tarjan low-link over a connected multigraph given as
/// `(neighbor, edge id)` adjacency lists.
fn has_articulation_point(adj: &[Vec<(usize, usize)>]) -> bool {
    let n = adj.len();
    if n < 3 {
        return false;
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut timer = 0;
    // (vertex, parent edge, next adjacency index)
    let mut stack = vec![(0usize, usize::MAX, 0usize)];
    disc[0] = 0;
    low[0] = 0;
    timer += 1;
    let mut root_children = 0;
    while let Some(&mut (v, pe, ref mut idx)) = stack.last_mut() {
        if *idx < adj[v].len() {
            let (w, e) = adj[v][*idx];
            *idx += 1;
            if e == pe {
                continue;
            }
            if disc[w] == usize::MAX {
                disc[w] = timer;
                low[w] = timer;
                timer += 1;
                if v == 0 {
                    root_children += 1;
                }
                stack.push((w, e, 0));
            } else {
                low[v] = low[v].min(disc[w]);
            }
        } else {
            stack.pop();
            if let Some(&(p, _, _)) = stack.last() {
                low[p] = low[p].min(low[v]);
                if p != 0 && low[v] >= disc[p] {
                    return true;
                }
            }
        }
    }
    root_children > 1
}

/// Two distinct edges sharing the same unordered pair of endpoints.
pub fn has_multiple_edges(m: &CombinatorialMap) -> Result<bool> {
    m.checked()?;
    let mut seen = HashSet::new();
    Ok(!m
        .edges()
        .into_iter()
        .all(|(u, v)| seen.insert((u.min(v), u.max(v)))))
}

/// Breadth-first traversal from the root dart; each dart is expanded by its
/// sigma-successor, then its alpha-mate. The code lists, in visit order, the
/// visit ranks of `sigma(d)` and `alpha(d)`.
pub fn canonical_code(m: &CombinatorialMap) -> Result<CanonicalCode> {
    m.checked()?;
    Ok(canonical_code_unchecked(m))
}

pub(crate) fn canonical_code_unchecked(m: &CombinatorialMap) -> CanonicalCode {
    let n = m.n_darts;
    let mut rank = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    rank[m.root] = 0;
    order.push(m.root);
    let mut head = 0;
    while head < order.len() {
        let d = order[head];
        head += 1;
        for e in [m.sigma[d], m.alpha[d]] {
            if rank[e] == usize::MAX {
                rank[e] = order.len();
                order.push(e);
            }
        }
    }
    let mut bytes = Vec::with_capacity(2 * n + 2);
    push_varint(&mut bytes, n);
    for &d in &order {
        push_varint(&mut bytes, rank[m.sigma[d]]);
        push_varint(&mut bytes, rank[m.alpha[d]]);
    }
    CanonicalCode(bytes)
}

fn push_varint(out: &mut Vec<u8>, mut x: usize) {
    loop {
        let byte = (x & 0x7f) as u8;
        x >>= 7;
        if x == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

/// Number of faces of degree 2 other than the root face.
pub fn internal_2face_count(m: &CombinatorialMap) -> Result<usize> {
    let report = faces(m)?;
    Ok(report
        .faces
        .iter()
        .enumerate()
        .filter(|&(i, f)| i != report.root_face_index && f.degree == 2)
        .count())
}

/// A submap under construction, identified by its root dart (leaving the
/// root vertex R along the outer face) and the position of its star vertex
/// on the outer face, counted from R along `phi`.
struct Piece {
    root: usize,
    star: u32,
}

struct Builder {
    alpha: Vec<usize>,
    sigma: Vec<usize>,
}

impl Builder {
    fn phi(&self, d: usize) -> usize {
        self.sigma[self.alpha[d]]
    }

    fn phi_pow(&self, mut d: usize, k: u32) -> usize {
        for _ in 0..k {
            d = self.phi(d);
        }
        d
    }

    fn phi_inverse(&self, d: usize) -> usize {
        let mut e = d;
        loop {
            let next = self.phi(e);
            if next == d {
                return e;
            }
            e = next;
        }
    }

    fn new_edge(&mut self) -> (usize, usize) {
        let a = self.alpha.len();
        let b = a + 1;
        self.alpha.extend([b, a]);
        self.sigma.extend([a, b]);
        (a, b)
    }

    fn leaf(&mut self) -> Piece {
        let (a, _) = self.new_edge();
        Piece { root: a, star: 1 }
    }

    /// Glues star(M_j) to R(M_{j+1}) and closes the chain with a new root
    /// edge from star(M_m) to R(M_1). Returns the new root dart.
    fn join(&mut self, pieces: &[Piece]) -> usize {
        struct Corners {
            root: usize,
            into_star: usize,
            out_of_star: usize,
            into_root: usize,
        }
        let corners: Vec<Corners> = pieces
            .iter()
            .map(|p| {
                let into_star = self.phi_pow(p.root, p.star - 1);
                Corners {
                    root: p.root,
                    into_star,
                    out_of_star: self.phi(into_star),
                    into_root: self.phi_inverse(p.root),
                }
            })
            .collect();
        for w in corners.windows(2) {
            let (cur, next) = (&w[0], &w[1]);
            self.sigma[self.alpha[cur.into_star]] = next.root;
            self.sigma[self.alpha[next.into_root]] = cur.out_of_star;
        }
        let first = &corners[0];
        let last = &corners[corners.len() - 1];
        let (a, b) = self.new_edge();
        self.sigma[self.alpha[last.into_star]] = a;
        self.sigma[a] = last.out_of_star;
        self.sigma[self.alpha[first.into_root]] = b;
        self.sigma[b] = first.root;
        a
    }

    fn build(&mut self, t: &LabeledTree, is_root: bool) -> Piece {
        if t.is_leaf() {
            return self.leaf();
        }
        let pieces: Vec<Piece> = t.children.iter().map(|c| self.build(c, false)).collect();
        let root = self.join(&pieces);
        Piece {
            root,
            star: if is_root { 0 } else { t.label },
        }
    }
}

/// The rooted non-separable planar map of a β(1,0)-tree.
///
/// Leaves become single edges R→star. An internal node chains its children's
/// maps star-to-R, adds a new root edge from the last star back to the
/// first R, and puts the new star on the `label`-th outer vertex after the
/// new root vertex. Darts are numbered in creation order.
pub fn tree_to_map(t: &LabeledTree) -> Result<CombinatorialMap> {
    t.checked()?;
    Ok(tree_to_map_unchecked(t))
}

pub(crate) fn tree_to_map_unchecked(t: &LabeledTree) -> CombinatorialMap {
    let mut b = Builder {
        alpha: Vec::new(),
        sigma: Vec::new(),
    };
    let piece = b.build(t, true);
    CombinatorialMap::new(b.alpha, b.sigma, piece.root)
}

/// Compact JSON object with `n_darts`, `alpha`, `sigma`, `root`.
pub fn format_map(m: &CombinatorialMap) -> String {
    serde_json::to_string(m).expect("map serializes")
}

/// Parses a JSON map record and checks that `alpha` and `sigma` are
/// permutations of the declared dart set.
pub fn parse_map(text: &str) -> Result<CombinatorialMap> {
    let m: CombinatorialMap = serde_json::from_str(text).map_err(|e| {
        let pos = text
            .lines()
            .take(e.line().saturating_sub(1))
            .map(|l| l.len() + 1)
            .sum::<usize>()
            + e.column().saturating_sub(1);
        Error::parse(pos, e.to_string())
    })?;
    for (which, arr) in [("alpha", &m.alpha), ("sigma", &m.sigma)] {
        if arr.len() != m.n_darts {
            return Err(Error::InvalidMap(format!(
                "{which} has length {} but n_darts is {}",
                arr.len(),
                m.n_darts
            )));
        }
        if !is_permutation(arr) {
            return Err(Error::InvalidMap(format!("{which} is not a permutation")));
        }
    }
    Ok(m)
}

impl fmt::Display for CombinatorialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_map(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{parse_tree, tree_stats};

    fn digon(root: usize) -> CombinatorialMap {
        CombinatorialMap::new(vec![1, 0, 3, 2], vec![2, 3, 0, 1], root)
    }

    fn tree_map(s: &str) -> CombinatorialMap {
        tree_to_map(&parse_tree(s).unwrap()).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert_eq!(validate_map(&CombinatorialMap::single_edge()), Ok(()));
        let m = digon(0);
        assert_eq!(validate_map(&m), Ok(()));
        assert_eq!((m.vertex_count(), m.edge_count(), m.face_count()), (2, 2, 2));
        let bad = CombinatorialMap::new(vec![0, 1], vec![0, 1], 0);
        assert_eq!(
            validate_map(&bad).unwrap_err().to_string(),
            "alpha not fixed-point-free (dart 0)"
        );
        let disconnected = CombinatorialMap::new(vec![1, 0, 3, 2], vec![0, 1, 2, 3], 0);
        assert_eq!(validate_map(&disconnected), Err(MapViolation::Disconnected));
        // one vertex, two interleaved loops: a torus
        let torus = CombinatorialMap::new(vec![2, 3, 0, 1], vec![1, 2, 3, 0], 0);
        assert!(matches!(validate_map(&torus), Err(MapViolation::NotPlanar { .. })));
        let short = CombinatorialMap {
            n_darts: 4,
            alpha: vec![1, 0],
            sigma: vec![0, 1, 2, 3],
            root: 0,
        };
        assert!(matches!(validate_map(&short), Err(MapViolation::ArrayLength { .. })));
        assert!(matches!(
            validate_map(&CombinatorialMap::new(vec![1, 0], vec![0, 1], 2)),
            Err(MapViolation::RootOutOfRange(2))
        ));
    }

    #[test]
    fn face_examples() {
        let r = faces(&CombinatorialMap::single_edge()).unwrap();
        assert_eq!(r.faces.len(), 1);
        assert_eq!(r.root_face().degree, 2);

        let cycle = tree_map("(3 (1) (1) (1))");
        let r = faces(&cycle).unwrap();
        assert_eq!(r.degree_histogram, BTreeMap::from([(4, 2)]));

        let parallel = tree_map("(1 (1 (1 (1))))");
        let r = faces(&parallel).unwrap();
        assert_eq!(r.degree_histogram, BTreeMap::from([(2, 4)]));
        assert_eq!(r.root_face().degree, 2);
        let total: usize = r.faces.iter().map(|f| f.degree).sum();
        assert_eq!(total, parallel.n_darts);
    }

    #[test]
    fn nonseparable_examples() {
        assert!(is_nonseparable(&CombinatorialMap::single_edge()).unwrap());
        let loop_map = CombinatorialMap::new(vec![1, 0], vec![1, 0], 0);
        assert!(!is_nonseparable(&loop_map).unwrap());

        // two triangles u-v-w and u-x-y sharing u
        let mut alpha = Vec::new();
        let mut ends = Vec::new();
        for (a, b) in [(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)] {
            let d = alpha.len();
            alpha.extend([d + 1, d]);
            ends.extend([a, b]);
        }
        // darts around each vertex in the order they appear
        let mut sigma = vec![0; ends.len()];
        for v in 0..5 {
            let ds: Vec<usize> = (0..ends.len()).filter(|&d| ends[d] == v).collect();
            for (i, &d) in ds.iter().enumerate() {
                sigma[d] = ds[(i + 1) % ds.len()];
            }
        }
        // at u: 0 (to v), 5 (from w side), 6 (to x), 11 (from y): keep the
        // two triangles in separate sectors
        sigma[0] = 5;
        sigma[5] = 6;
        sigma[6] = 11;
        sigma[11] = 0;
        let bowtie = CombinatorialMap::new(alpha, sigma, 0);
        assert_eq!(validate_map(&bowtie), Ok(()));
        assert!(!is_nonseparable(&bowtie).unwrap());
    }

    #[test]
    fn multiple_edge_examples() {
        assert!(has_multiple_edges(&digon(0)).unwrap());
        assert!(!has_multiple_edges(&tree_map("(3 (1) (1) (1))")).unwrap());
        assert!(!has_multiple_edges(&CombinatorialMap::single_edge()).unwrap());
    }

    #[test]
    fn canonical_code_ignores_relabeling() {
        let m = tree_map("(4 (2 (1 (1)) (1) (1)) (1) (1 (2 (1) (1))))");
        let n = m.n_darts;
        // conjugate by a rotation of the dart set
        let shift = |d: usize| (d + 5) % n;
        let mut alpha = vec![0; n];
        let mut sigma = vec![0; n];
        for d in 0..n {
            alpha[shift(d)] = shift(m.alpha[d]);
            sigma[shift(d)] = shift(m.sigma[d]);
        }
        let relabeled = CombinatorialMap::new(alpha, sigma, shift(m.root));
        assert_eq!(canonical_code(&m).unwrap(), canonical_code(&relabeled).unwrap());
        let swapped = CombinatorialMap::new(vec![1, 0], vec![0, 1], 1);
        assert_eq!(
            canonical_code(&CombinatorialMap::single_edge()).unwrap(),
            canonical_code(&swapped).unwrap()
        );
        assert_eq!(canonical_code(&digon(0)).unwrap(), canonical_code(&digon(1)).unwrap());
    }

    #[test]
    fn single_node_tree_gives_single_edge() {
        let m = tree_map("(1)");
        assert_eq!(m, CombinatorialMap::single_edge());
    }

    #[test]
    fn figure_three_statistics() {
        let m = tree_map("(4 (2 (1 (1)) (1) (1)) (1) (1 (2 (1) (1))))");
        assert_eq!(m.edge_count(), 11);
        assert_eq!(m.vertex_count(), 7);
        assert_eq!(m.face_count(), 6);
        assert_eq!(faces(&m).unwrap().root_face().degree, 5);
        assert_eq!(internal_2face_count(&m).unwrap(), 2);
        assert!(is_nonseparable(&m).unwrap());
    }

    #[test]
    fn internal_two_faces() {
        assert_eq!(internal_2face_count(&tree_map("(1 (1 (1 (1))))")).unwrap(), 3);
        assert_eq!(internal_2face_count(&tree_map("(3 (1) (1) (1))")).unwrap(), 0);
    }

    #[test]
    fn table_one_small_trees() {
        for n in 1..=6 {
            for t in crate::trees::enumerate_trees(n).unwrap() {
                let m = tree_to_map(&t).unwrap();
                let s = tree_stats(&t).unwrap();
                assert_eq!(validate_map(&m), Ok(()), "{t}");
                assert_eq!(m.edge_count(), s.nodes);
                assert_eq!(m.vertex_count(), s.leaves + 1);
                assert_eq!(m.face_count(), s.internal_nodes + 1);
                assert_eq!(faces(&m).unwrap().root_face().degree as u32, s.root_label + 1);
            }
        }
    }

    #[test]
    fn json_round_trip_and_errors() {
        let m = digon(0);
        let text = format_map(&m);
        assert_eq!(text, r#"{"n_darts":4,"alpha":[1,0,3,2],"sigma":[2,3,0,1],"root":0}"#);
        assert_eq!(parse_map(&text).unwrap(), m);
        assert!(matches!(parse_map("{\"n_darts\":2"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_map(r#"{"n_darts":2,"alpha":[1,1],"sigma":[0,1],"root":0}"#),
            Err(Error::InvalidMap(_))
        ));
        assert!(matches!(
            parse_map(r#"{"n_darts":3,"alpha":[1,0],"sigma":[0,1],"root":0}"#),
            Err(Error::InvalidMap(_))
        ));
    }
}
