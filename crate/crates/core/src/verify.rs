//! Exhaustive cross-check suites.
//!
//! Every suite rebuilds the quantities it compares through the small
//! reference implementations in [`oracle`] instead of trusting the main code
//! paths: pattern occurrences by scanning all index subsets, faces and
//! vertices by walking orbits, cut vertices by deleting each vertex.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::maps::{canonical_code, format_map, tree_to_map};
use crate::perms::{
    self, classical_3142, generate_av_levels, insert_largest, mesh_m, mesh_m_prime, mesh_n,
    one_step_expansions, perm_to_tree, reduce_to_primitive, tree_to_perm, vincular_2_41_3,
    MeshPattern, Pattern, Permutation, VincularPattern,
};
use crate::series::{
    b2_closed_form, b3_phi_constants, b3_singularity, relative_errors, series, solve_equation,
    tutte_count, AsymptoticName, EquationSpec, RationalSeries, SeriesName,
};
use crate::trees::{
    enumerate_restricted_trees, enumerate_trees, format_tree, is_k_face_free_tree,
    is_primitive_tree, k_face_free_unchecked, mef_necessary, tree_stats, ForbiddenRootLabel,
    LabeledTree,
};

pub const MAX_TREE_NODES: usize = 10;
pub const MAX_RESTRICTED_NODES: usize = 12;
pub const MAX_PERM_LEN: usize = 9;
pub const MAX_SERIES_ORDER: usize = 30;
const MAX_STORED_WITNESSES: usize = 10;

/// Map codes, permutations and tree count for one size.
type SizeTally = (BTreeSet<Vec<u8>>, BTreeSet<Permutation>, usize);
/// Value to number of objects.
type Histogram = BTreeMap<usize, usize>;

pub mod oracle {
    //! Deliberately naive reference implementations.

    use std::collections::{HashSet, VecDeque};

    use crate::maps::CombinatorialMap;
    use crate::perms::Pattern;
    use crate::trees::LabeledTree;

    /// Occurrences found by trying every index subset and classifying every
    /// other letter into its grid cell.
    pub fn occurrences(pattern: &Pattern, perm: &[u32]) -> usize {
        let base = pattern.base().values();
        let k = base.len();
        let n = perm.len();
        if k > n {
            return 0;
        }
        let mut idx: Vec<usize> = (0..k).collect();
        let mut count = 0;
        loop {
            if matches(pattern, base, perm, &idx) {
                count += 1;
            }
            // next k-subset in lexicographic order
            let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
                break;
            };
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            if k == 0 {
                break;
            }
        }
        count
    }

    fn matches(pattern: &Pattern, base: &[u32], perm: &[u32], idx: &[usize]) -> bool {
        let k = idx.len();
        for a in 0..k {
            for b in 0..k {
                if (perm[idx[a]] < perm[idx[b]]) != (base[a] < base[b]) {
                    return false;
                }
            }
        }
        match pattern {
            Pattern::Classical(_) => true,
            Pattern::Vincular(v) => v.adjacent.iter().all(|&i| idx[i] == idx[i - 1] + 1),
            Pattern::Mesh(m) => (0..perm.len()).filter(|j| !idx.contains(j)).all(|j| {
                let col = idx.iter().filter(|&&p| p < j).count();
                let row = idx.iter().filter(|&&p| perm[p] < perm[j]).count();
                !m.shaded.contains(&(col, row))
            }),
        }
    }

    pub fn avoids_all(perm: &[u32], patterns: &[Pattern]) -> bool {
        patterns.iter().all(|p| occurrences(p, perm) == 0)
    }

    /// Vertex id of every dart, by walking `sigma` orbits.
    pub fn vertex_ids(m: &CombinatorialMap) -> (Vec<usize>, usize) {
        let mut id = vec![usize::MAX; m.n_darts];
        let mut next = 0;
        for d in 0..m.n_darts {
            if id[d] != usize::MAX {
                continue;
            }
            let mut e = d;
            loop {
                id[e] = next;
                e = m.sigma[e];
                if e == d {
                    break;
                }
            }
            next += 1;
        }
        (id, next)
    }

    /// Face degrees (each face walked as "cross the edge, turn to the next
    /// dart around the vertex") and the degree of the face holding the root.
    pub struct FaceCensus {
        pub degrees: Vec<usize>,
        pub root_degree: usize,
        pub vertices: usize,
    }

    pub fn face_census(m: &CombinatorialMap) -> FaceCensus {
        let mut seen = vec![false; m.n_darts];
        let mut degrees = Vec::new();
        let mut root_degree = 0;
        for d in 0..m.n_darts {
            if seen[d] {
                continue;
            }
            let mut len = 0;
            let mut has_root = false;
            let mut e = d;
            while !seen[e] {
                seen[e] = true;
                has_root |= e == m.root;
                len += 1;
                e = m.sigma[m.alpha[e]];
            }
            if has_root {
                root_degree = len;
            }
            degrees.push(len);
        }
        FaceCensus {
            degrees,
            root_degree,
            vertices: vertex_ids(m).1,
        }
    }

    /// Non-root faces of degree 2.
    pub fn internal_two_faces(m: &CombinatorialMap) -> usize {
        let c = face_census(m);
        c.degrees.iter().filter(|&&d| d == 2).count() - usize::from(c.root_degree == 2)
    }

    pub fn has_face_of_degree(m: &CombinatorialMap, k: usize) -> bool {
        face_census(m).degrees.contains(&k)
    }

    pub fn has_multiple_edge(m: &CombinatorialMap) -> bool {
        let (id, _) = vertex_ids(m);
        let mut seen = HashSet::new();
        (0..m.n_darts)
            .filter(|&d| d < m.alpha[d])
            .any(|d| {
                let (a, b) = (id[d], id[m.alpha[d]]);
                !seen.insert((a.min(b), a.max(b)))
            })
    }

    /// No loop, and deleting any single vertex leaves the rest connected.
    pub fn is_nonseparable(m: &CombinatorialMap) -> bool {
        let (id, v) = vertex_ids(m);
        let edges: Vec<(usize, usize)> = (0..m.n_darts)
            .filter(|&d| d < m.alpha[d])
            .map(|d| (id[d], id[m.alpha[d]]))
            .collect();
        if edges.is_empty() || edges.iter().any(|&(a, b)| a == b) {
            return false;
        }
        (0..v).all(|cut| {
            let start = (0..v).find(|&u| u != cut);
            let Some(start) = start else { return true };
            let mut reached = vec![false; v];
            reached[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &(a, b) in &edges {
                    for (x, y) in [(a, b), (b, a)] {
                        if x == u && y != cut && !reached[y] {
                            reached[y] = true;
                            queue.push_back(y);
                        }
                    }
                }
            }
            (0..v).all(|u| u == cut || reached[u])
        })
    }

    /// Non-root nodes that are an only child and carry the largest label
    /// allowed (leaves always do).
    pub fn single_child_max(t: &LabeledTree) -> usize {
        let here = match t.children.as_slice() {
            [only] => {
                let sum: u32 = only.children.iter().map(|c| c.label).sum();
                usize::from(only.children.is_empty() || only.label == sum)
            }
            _ => 0,
        };
        here + t.children.iter().map(single_child_max).sum::<usize>()
    }

    pub fn no_only_children(t: &LabeledTree) -> bool {
        t.children.len() != 1 && t.children.iter().all(no_only_children)
    }

    pub fn leaves(t: &LabeledTree) -> usize {
        if t.children.is_empty() {
            1
        } else {
            t.children.iter().map(leaves).sum()
        }
    }

    pub fn nodes(t: &LabeledTree) -> usize {
        1 + t.children.iter().map(nodes).sum::<usize>()
    }

    /// All permutations of `1..=n`, by recursive insertion.
    pub fn all_permutations(n: usize) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for v in 1..=n as u32 {
            out = out
                .into_iter()
                .flat_map(|p: Vec<u32>| {
                    (0..=p.len()).map(move |i| {
                        let mut q = p.clone();
                        q.insert(i, v);
                        q
                    })
                })
                .collect();
        }
        out.sort();
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub object: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub params: BTreeMap<String, usize>,
    pub status: Status,
    /// Total number of failed checks; at most a few are kept as witnesses.
    pub failures: usize,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
    pub runtime_secs: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(
            f,
            "{}: {} ({}) {:.2}s",
            self.suite,
            match self.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
            },
            params.join(", "),
            self.runtime_secs
        )?;
        for n in &self.notes {
            writeln!(f, "  {n}")?;
        }
        if self.failures > self.witnesses.len() {
            writeln!(f, "  {} failures, first {} shown", self.failures, self.witnesses.len())?;
        }
        for w in &self.witnesses {
            writeln!(f, "  witness {}: expected {}, got {}", w.object, w.expected, w.actual)?;
        }
        Ok(())
    }
}

struct Recorder {
    suite: &'static str,
    params: BTreeMap<String, usize>,
    failures: usize,
    witnesses: Vec<Witness>,
    notes: Vec<String>,
    start: Instant,
}

impl Recorder {
    fn new(suite: &'static str, params: &[(&str, usize)]) -> Self {
        Recorder {
            suite,
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            failures: 0,
            witnesses: Vec::new(),
            notes: Vec::new(),
            start: Instant::now(),
        }
    }

    fn fail(&mut self, object: impl fmt::Display, expected: impl fmt::Display, actual: impl fmt::Display) {
        self.failures += 1;
        if self.witnesses.len() < MAX_STORED_WITNESSES {
            self.witnesses.push(Witness {
                object: object.to_string(),
                expected: expected.to_string(),
                actual: actual.to_string(),
            });
        }
    }

    fn check<T: PartialEq + fmt::Display>(&mut self, object: impl fmt::Display, expected: T, actual: T) -> bool {
        if expected == actual {
            true
        } else {
            self.fail(object, expected, actual);
            false
        }
    }

    /// Folds per-object failures gathered in parallel.
    fn absorb(&mut self, found: Vec<Witness>) {
        for w in found {
            self.fail(w.object, w.expected, w.actual);
        }
    }

    fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    fn finish(self) -> VerificationReport {
        VerificationReport {
            suite: self.suite.to_string(),
            params: self.params,
            status: if self.failures == 0 { Status::Pass } else { Status::Fail },
            failures: self.failures,
            witnesses: self.witnesses,
            notes: self.notes,
            runtime_secs: self.start.elapsed().as_secs_f64(),
        }
    }
}

fn witness(object: impl fmt::Display, expected: impl fmt::Display, actual: impl fmt::Display) -> Witness {
    Witness {
        object: object.to_string(),
        expected: expected.to_string(),
        actual: actual.to_string(),
    }
}

fn guard(what: &'static str, value: usize, lo: usize, hi: usize) -> Result<()> {
    if value < lo || value > hi {
        return Err(Error::OutOfRange {
            what,
            value,
            allowed: format!("{lo}..={hi}"),
        });
    }
    Ok(())
}

fn class_patterns() -> [Pattern; 2] {
    [classical_3142().into(), vincular_2_41_3().into()]
}

/// All permutations of length `n ≤ 9` avoiding 3142 and 2-41-3, by filtering
/// every permutation through the reference matcher.
pub fn brute_force_av(n: usize) -> Result<Vec<Permutation>> {
    brute_force_av_with(n, Exec::default())
}

pub fn brute_force_av_with(n: usize, exec: Exec) -> Result<Vec<Permutation>> {
    guard("permutation length", n, 0, MAX_PERM_LEN)?;
    let pats = class_patterns();
    let all = oracle::all_permutations(n);
    let kept = exec.filter(&all, |p| oracle::avoids_all(p, &pats));
    kept.into_iter().map(Permutation::new).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    Counts,
    Table1,
    Theorem5,
    KFaceFree,
    Bounds,
    Primitive,
    Closure,
    Series,
    Asymptotics,
    Patterns,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Counts,
        Suite::Table1,
        Suite::Theorem5,
        Suite::KFaceFree,
        Suite::Bounds,
        Suite::Primitive,
        Suite::Closure,
        Suite::Series,
        Suite::Asymptotics,
        Suite::Patterns,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Counts => "counts",
            Suite::Table1 => "table1",
            Suite::Theorem5 => "theorem5",
            Suite::KFaceFree => "kfacefree",
            Suite::Bounds => "bounds",
            Suite::Primitive => "primitive",
            Suite::Closure => "closure",
            Suite::Series => "series",
            Suite::Asymptotics => "asymptotics",
            Suite::Patterns => "patterns",
        }
    }

    /// The size used when none is given; `None` for suites without one.
    pub fn default_size(self) -> Option<usize> {
        match self {
            Suite::Counts => Some(9),
            Suite::Table1 | Suite::Theorem5 | Suite::KFaceFree => Some(9),
            Suite::Bounds => Some(8),
            Suite::Primitive => Some(10),
            Suite::Closure => Some(8),
            Suite::Series => Some(30),
            Suite::Asymptotics => None,
            Suite::Patterns => Some(6),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

/// Runs the suites with a chosen execution strategy.
#[derive(Clone, Copy, Debug, Default)]
pub struct Verifier {
    pub exec: Exec,
}

impl Verifier {
    pub fn new(exec: Exec) -> Self {
        Verifier { exec }
    }

    /// Runs `suite` at `size`, or at its default size.
    pub fn run(&self, suite: Suite, size: Option<usize>) -> Result<VerificationReport> {
        let size = size.or(suite.default_size()).unwrap_or(0);
        match suite {
            Suite::Counts => self.check_counts(size),
            Suite::Table1 => self.check_table1(size),
            Suite::Theorem5 => self.check_theorem5(size),
            Suite::KFaceFree => self.check_kfacefree(size),
            Suite::Bounds => self.check_bounds(size, MAX_RESTRICTED_NODES.min(size + 4)),
            Suite::Primitive => self.check_primitive_series(size),
            Suite::Closure => self.check_closure(size),
            Suite::Series => self.check_series_identities(size),
            Suite::Asymptotics => self.check_asymptotics(),
            Suite::Patterns => self.check_patterns(size),
        }
    }

    fn trees_up_to(&self, max_nodes: usize) -> Result<Vec<LabeledTree>> {
        let sizes: Vec<usize> = (1..=max_nodes).collect();
        let levels = self.exec.map(&sizes, |&n| enumerate_trees(n));
        let mut out = Vec::new();
        for level in levels {
            out.extend(level?);
        }
        Ok(out)
    }

    /// Trees on 2..=n_max+1 nodes (n_max edges) against the closed form,
    /// and class members of length ≤ min(n_max, 8) generated structurally
    /// and by brute force.
    pub fn check_counts(&self, n_max: usize) -> Result<VerificationReport> {
        guard("max edges", n_max, 1, MAX_TREE_NODES - 1)?;
        let mut r = Recorder::new("counts", &[("max_edges", n_max)]);
        let sizes: Vec<usize> = (1..=n_max).collect();
        let counts = self.exec.map(&sizes, |&e| enumerate_trees(e + 1).map(|v| v.len()));
        let mut table = Vec::new();
        for (&e, c) in sizes.iter().zip(counts) {
            let c = c?;
            table.push(c.to_string());
            r.check(format!("trees on {} nodes", e + 1), tutte_count(e), BigInt::from(c));
        }
        r.note(format!("trees on 2..={} nodes: {}", n_max + 1, table.join(", ")));
        let perm_max = n_max.min(8);
        let levels = generate_av_levels(perm_max, self.exec);
        for (len, level) in levels.iter().enumerate().skip(1) {
            r.check(format!("generate_av({len})"), tutte_count(len), BigInt::from(level.len()));
            let brute = brute_force_av_with(len, self.exec)?;
            r.check(format!("brute_force_av({len})"), level.len(), brute.len());
        }
        r.note(format!(
            "class sizes 1..={perm_max}: {}",
            levels[1..].iter().map(|l| l.len().to_string()).collect::<Vec<_>>().join(", ")
        ));
        Ok(r.finish())
    }

    /// Table 1 statistics on every tree with ≤ n_max nodes, plus the rest
    /// of the bijection triangle: tree → perm → tree is the identity, the
    /// maps are pairwise non-isomorphic and the permutations distinct.
    pub fn check_table1(&self, n_max: usize) -> Result<VerificationReport> {
        guard("max nodes", n_max, 1, MAX_TREE_NODES)?;
        let mut r = Recorder::new("table1", &[("max_nodes", n_max)]);
        let trees = self.trees_up_to(n_max)?;
        let pats = class_patterns();
        let results = self.exec.map(&trees, |t| {
            let mut bad = Vec::new();
            let m = match tree_to_map(t) {
                Ok(m) => m,
                Err(e) => return (bad_one(t, "a map", e), None, None),
            };
            let c = oracle::face_census(&m);
            let tt = format_tree(t);
            let nodes = oracle::nodes(t);
            let leaves = oracle::leaves(t);
            let checks = [
                ("edges", nodes, m.n_darts / 2),
                ("vertices", leaves + 1, c.vertices),
                ("faces", nodes - leaves + 1, c.degrees.len()),
                ("root-face degree", t.label as usize + 1, c.root_degree),
            ];
            for (what, want, got) in checks {
                if want != got {
                    bad.push(witness(&tt, format!("{what} {want}"), format!("{what} {got}")));
                }
            }
            if !oracle::is_nonseparable(&m) {
                bad.push(witness(&tt, "nonseparable map", format_map(&m)));
            }
            let perm = tree_to_perm(t);
            let mut perm_out = None;
            match perm {
                Ok(p) => {
                    if !oracle::avoids_all(p.values(), &pats) {
                        bad.push(witness(&tt, "class member", &p));
                    }
                    match perm_to_tree(&p) {
                        Ok(back) if &back == t => {}
                        Ok(back) => bad.push(witness(&tt, &tt, format_tree(&back))),
                        Err(e) => bad.push(witness(&tt, &tt, e)),
                    }
                    perm_out = Some(p);
                }
                Err(e) => bad.push(witness(&tt, "a permutation", e)),
            }
            let code = canonical_code(&m).ok();
            (bad, code, perm_out)
        });
        let mut per_size: BTreeMap<usize, SizeTally> = BTreeMap::new();
        for (t, (bad, code, perm)) in trees.iter().zip(results) {
            r.absorb(bad);
            let entry = per_size.entry(t.size()).or_default();
            entry.2 += 1;
            if let Some(c) = code {
                entry.0.insert(c.0);
            }
            if let Some(p) = perm {
                entry.1.insert(p);
            }
        }
        for (nodes, (codes, perms, total)) in per_size {
            let want = if nodes == 1 { BigInt::one() } else { tutte_count(nodes - 1) };
            r.check(format!("distinct maps on {nodes} edges"), want.clone(), BigInt::from(codes.len()));
            r.check(format!("distinct permutations of length {}", nodes - 1), total, perms.len());
        }
        r.note(format!("{} trees checked", trees.len()));
        Ok(r.finish())
    }

    /// M-occurrences = single-child-max nodes = internal 2-faces on every
    /// tree with ≤ n_max nodes, with the surrounding lemmas and corollary.
    pub fn check_theorem5(&self, n_max: usize) -> Result<VerificationReport> {
        guard("max nodes", n_max, 2, MAX_TREE_NODES)?;
        let mut r = Recorder::new("theorem5", &[("max_nodes", n_max)]);
        let trees = self.trees_up_to(n_max)?;
        let m_pat: Pattern = mesh_m().into();
        let m_prime: Pattern = mesh_m_prime().into();
        struct Row {
            size: usize,
            occ: usize,
            scm: usize,
            faces: usize,
            top_max: Option<(bool, bool, bool)>,
            bad: Vec<Witness>,
        }
        let rows = self.exec.map(&trees, |t| -> Result<Row> {
            let tt = format_tree(t);
            let perm = tree_to_perm(t)?;
            let map = tree_to_map(t)?;
            let occ = oracle::occurrences(&m_pat, perm.values());
            let scm = oracle::single_child_max(t);
            let faces = oracle::internal_two_faces(&map);
            let mut bad = Vec::new();
            if !(occ == scm && scm == faces) {
                bad.push(witness(
                    format!("{tt} -> {perm}"),
                    "M-occurrences = single-child-max = internal 2-faces",
                    format!("{occ}, {scm}, {faces}"),
                ));
            }
            if tree_stats(t)?.single_child_max_nodes != scm {
                bad.push(witness(&tt, format!("single_child_max_nodes {scm}"), "tree_stats disagrees"));
            }
            if is_primitive_tree(t)? != (faces == 0) {
                bad.push(witness(&tt, format!("primitive = {}", faces == 0), "is_primitive_tree disagrees"));
            }
            let mut top_max = None;
            if t.children.len() == 1 && t.size() <= 8 {
                let child = &t.children[0];
                let want = child.has_max_label();
                let has = oracle::occurrences(&m_prime, perm.values()) >= 1;
                if want != has {
                    bad.push(witness(format!("{tt} -> {perm}"), format!("M′ present = {want}"), has));
                }
                top_max = Some((want == has, child.is_leaf(), want));
            }
            Ok(Row { size: t.size(), occ, scm, faces, top_max, bad })
        });
        let mut scm_faces = 0;
        let mut occ_scm = 0;
        let mut top = [0usize; 3];
        let mut hist: BTreeMap<usize, (Histogram, Histogram)> = BTreeMap::new();
        for row in rows {
            let row = row?;
            scm_faces += usize::from(row.scm != row.faces);
            occ_scm += usize::from(row.occ != row.scm);
            if let Some((ok, leaf, _)) = row.top_max {
                top[0] += 1;
                if !ok {
                    top[if leaf { 1 } else { 2 }] += 1;
                }
            }
            let h = hist.entry(row.size).or_default();
            *h.0.entry(row.occ).or_default() += 1;
            *h.1.entry(row.faces).or_default() += 1;
            r.absorb(row.bad);
        }
        r.note(format!("single-child-max vs internal 2-faces: {scm_faces} of {} trees disagree", trees.len()));
        r.note(format!("M-occurrences vs single-child-max: {occ_scm} of {} trees disagree", trees.len()));
        r.note(format!(
            "M′ vs maximal root child on {} indecomposable trees: {} disagree with a leaf child, {} with an internal child",
            top[0], top[1], top[2]
        ));
        let show = |m: &BTreeMap<usize, usize>| {
            m.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(" ")
        };
        for (size, (occ, faces)) in hist.iter().filter(|(s, _)| (2..=6).contains(*s)) {
            r.note(format!(
                "length {}: M-count distribution {{{}}}, maps on {size} edges by internal 2-faces {{{}}}",
                size - 1,
                show(occ),
                show(faces)
            ));
        }
        r.note(format!("{} trees checked", trees.len()));

        // insertion before left-to-right maxima and the M-count
        let occ_len = n_max.saturating_sub(2).min(7);
        let levels = generate_av_levels(occ_len, self.exec);
        let members: Vec<Permutation> = levels.into_iter().flatten().collect();
        let occ_bad = self.exec.flat_map(&members, |p| {
            let before = oracle::occurrences(&m_pat, p.values());
            let k = perms::insertion_choices(p);
            (1..=k)
                .filter_map(|a| {
                    let q = insert_largest(p, a).ok()?;
                    let after = oracle::occurrences(&m_pat, q.values());
                    let want = before + usize::from(a == k && !p.is_empty());
                    (after != want).then(|| {
                        witness(format!("{p} at left-to-right maximum {a}"), want, after)
                    })
                })
                .collect()
        });
        let occ_failed = !occ_bad.is_empty();
        r.absorb(occ_bad);
        r.note(format!(
            "M-count under insertion (left-to-right reading) {} on {} members of length ≤ {occ_len}",
            if occ_failed { "FAILS" } else { "holds" },
            members.len()
        ));

        // {M, N}-avoiders vs 2-face-free maps
        let mn = [m_pat.clone(), Pattern::from(mesh_n())];
        let cor_len = n_max - 1;
        let levels = generate_av_levels(cor_len.min(8), self.exec);
        for (len, level) in levels.iter().enumerate().skip(1) {
            let avoiders = self.exec.count(level, |p| oracle::avoids_all(p.values(), &mn));
            let trees = enumerate_trees(len + 1)?;
            let free = self
                .exec
                .count(&trees, |t| tree_to_map(t).map(|m| !oracle::has_face_of_degree(&m, 2)).unwrap_or(false));
            let by_rule = self
                .exec
                .count(&trees, |t| t.label != 1 && is_primitive_tree(t).unwrap_or(false));
            r.check(format!("{{M, N}}-avoiders of length {len}"), free, avoiders);
            r.check(format!("root label ≠ 1 and primitive on {} nodes", len + 1), free, by_rule);
        }
        Ok(r.finish())
    }

    /// The k-face-free rule against face degrees for k = 2, 3, 4, the
    /// multiple-edge lemma, and the necessary conditions.
    pub fn check_kfacefree(&self, n_max: usize) -> Result<VerificationReport> {
        guard("max nodes", n_max, 1, MAX_TREE_NODES)?;
        let mut r = Recorder::new("kfacefree", &[("max_nodes", n_max)]);
        let trees = self.trees_up_to(n_max)?;
        let results = self.exec.map(&trees, |t| -> Result<(Vec<Witness>, [bool; 3])> {
            let tt = format_tree(t);
            let map = tree_to_map(t)?;
            let census = oracle::face_census(&map);
            let mut bad = Vec::new();
            let mut prose_agrees = [true; 3];
            for k in 2..=4u32 {
                let truth = !census.degrees.contains(&(k as usize));
                let rule = is_k_face_free_tree(t, k)?;
                if rule != truth {
                    bad.push(witness(format!("{tt} k={k}"), truth, rule));
                }
                prose_agrees[k as usize - 2] = k_face_free_unchecked(t, k, ForbiddenRootLabel::K) == truth;
            }
            let multi = oracle::has_multiple_edge(&map);
            if oracle::no_only_children(t) && multi {
                bad.push(witness(&tt, "no multiple edge (no only children)", "multiple edge"));
            }
            if !multi && !mef_necessary(t)? && t.size() >= 2 {
                bad.push(witness(&tt, "necessary conditions hold on a multiple-edge-free map", false));
            }
            if oracle::no_only_children(t) && t.size() >= 2 && !mef_necessary(t)? {
                bad.push(witness(&tt, "no only children implies necessary conditions", false));
            }
            if t.size() >= 2 && census.degrees.contains(&2) && !multi {
                bad.push(witness(&tt, "a 2-face forces a multiple edge", "simple map"));
            }
            Ok((bad, prose_agrees))
        });
        let mut prose_misses = [0usize; 3];
        for res in results {
            let (bad, prose) = res?;
            r.absorb(bad);
            for (miss, ok) in prose_misses.iter_mut().zip(prose) {
                *miss += usize::from(!ok);
            }
        }
        for (i, miss) in prose_misses.iter().enumerate() {
            let k = i + 2;
            r.note(if *miss == 0 {
                format!("k={k}: root label k rule also matches the faces on every tree")
            } else {
                format!("k={k}: root label k rule disagrees with the faces on {miss} trees; root label k−1 rule used")
            });
        }
        r.note(format!("{} trees checked", trees.len()));
        Ok(r.finish())
    }

    /// Restricted-tree series against enumeration for ≤ `restricted_max`
    /// nodes, and for 2 ≤ m ≤ n_max edges the chain
    /// cap-3 trees without only children ≤ multiple-edge-free maps ≤ 2-face-free maps.
    pub fn check_bounds(&self, n_max: usize, restricted_max: usize) -> Result<VerificationReport> {
        guard("max edges", n_max, 2, MAX_TREE_NODES)?;
        guard("max restricted nodes", restricted_max, 1, MAX_RESTRICTED_NODES)?;
        let mut r = Recorder::new("bounds", &[("max_edges", n_max), ("max_restricted_nodes", restricted_max)]);
        for (cap, name) in [(1, SeriesName::B1), (2, SeriesName::B2), (3, SeriesName::B3)] {
            let s = series(name, restricted_max)?;
            let sizes: Vec<usize> = (1..=restricted_max).collect();
            let counts = self.exec.map(&sizes, |&m| {
                enumerate_restricted_trees(m, cap, true).map(|v| {
                    debug_assert!(v.iter().all(|t| t.nodes().skip(1).all(|u| u.label <= cap)));
                    v.iter().filter(|t| oracle::no_only_children(t)).count()
                })
            });
            let mut row = Vec::new();
            for (&m, c) in sizes.iter().zip(counts) {
                let c = c?;
                row.push(c.to_string());
                r.check(
                    format!("{name} at {m} nodes"),
                    s.coeff(m).clone(),
                    BigRational::from_integer(c.into()),
                );
            }
            r.note(format!("cap {cap}, 1..={restricted_max} nodes: {}", row.join(", ")));
        }
        for m in 2..=n_max {
            let trees = enumerate_trees(m)?;
            let maps: Vec<_> = self.exec.map(&trees, tree_to_map).into_iter().collect::<Result<_>>()?;
            let mef = self.exec.count(&maps, |x| !oracle::has_multiple_edge(x));
            let two_free = self.exec.count(&maps, |x| !oracle::has_face_of_degree(x, 2));
            let lower = enumerate_restricted_trees(m, 3, true)?.len();
            r.note(format!("{m} edges: {lower} ≤ {mef} ≤ {two_free}"));
            if !(lower <= mef && mef <= two_free) {
                r.fail(format!("{m} edges"), "lower ≤ multiple-edge-free ≤ 2-face-free", format!("{lower}, {mef}, {two_free}"));
            }
        }
        Ok(r.finish())
    }

    /// Primitive-map counts pₘ for m ≤ n_max edges against the
    /// substitution series.
    pub fn check_primitive_series(&self, n_max: usize) -> Result<VerificationReport> {
        guard("max edges", n_max, 2, MAX_TREE_NODES)?;
        let mut r = Recorder::new("primitive", &[("max_edges", n_max)]);
        let mut p = vec![0usize; n_max + 1];
        let mut all = vec![0usize; n_max + 1];
        for m in 1..=n_max {
            let trees = enumerate_trees(m)?;
            all[m] = trees.len();
            p[m] = self
                .exec
                .count(&trees, |t| tree_to_map(t).map(|x| oracle::internal_two_faces(&x) == 0).unwrap_or(false));
        }
        r.note(format!(
            "primitive maps on 1..={n_max} edges: {}",
            p[1..].iter().map(usize::to_string).collect::<Vec<_>>().join(", ")
        ));
        let ps = series(SeriesName::P, n_max - 1)?;
        for n in 1..n_max {
            r.check(
                format!("[x^{n}]P"),
                ps.coeff(n).clone(),
                BigRational::from_integer((p[n + 1] + p[n]).into()),
            );
        }
        let to_series = |v: &[usize]| {
            RationalSeries::from_coeffs(v.iter().map(|&c| BigRational::from_integer(c.into())).collect())
        };
        let m_series = to_series(&all);
        let pm = to_series(&p);
        let x = RationalSeries::x(n_max);
        let sub = x.div(&(&RationalSeries::one(n_max) - &x))?;
        let composed = pm.compose(&sub)?;
        for n in 0..=n_max {
            r.check(format!("[x^{n}]M vs P_M(x/(1−x))"), m_series.coeff(n).clone(), composed.coeff(n).clone());
        }
        Ok(r.finish())
    }

    /// Structural generation against brute force for length ≤ n_max; the
    /// insertion closure and the reduction for length ≤ n_max − 1.
    pub fn check_closure(&self, n_max: usize) -> Result<VerificationReport> {
        guard("max length", n_max, 1, MAX_PERM_LEN)?;
        let mut r = Recorder::new("closure", &[("max_length", n_max)]);
        let levels = generate_av_levels(n_max, self.exec);
        for (n, level) in levels.iter().enumerate() {
            let brute = brute_force_av_with(n, self.exec)?;
            if &brute != level {
                let a: BTreeSet<_> = brute.iter().collect();
                let b: BTreeSet<_> = level.iter().collect();
                for p in a.symmetric_difference(&b) {
                    r.fail(
                        format!("generate_av({n}): {p}"),
                        if a.contains(p) { "member" } else { "non-member" },
                        if b.contains(p) { "generated" } else { "not generated" },
                    );
                }
            }
        }
        let m_pat: Pattern = mesh_m().into();
        let small = n_max.saturating_sub(1);
        let mut prev: Vec<Permutation> = vec![Permutation::empty()];
        let mut narrow_prev: Vec<Permutation> = prev.clone();
        let mut confluent = true;
        for (n, level) in levels.iter().enumerate().take(small + 1).skip(1) {
            let prim: BTreeSet<Permutation> = level
                .iter()
                .filter(|p| oracle::occurrences(&m_pat, p.values()) == 0)
                .cloned()
                .collect();
            let grown = self.exec.flat_map(&prev, |p| {
                one_step_expansions(p).map(|s| s.into_iter().collect()).unwrap_or_default()
            });
            let narrow_grown = self.exec.flat_map(&narrow_prev, |p| {
                perms::mesh_expansions(p).map(|s| s.into_iter().collect()).unwrap_or_default()
            });
            let narrow: BTreeSet<Permutation> = prim.iter().cloned().chain(narrow_grown).collect();
            let layer: BTreeSet<Permutation> = prim.into_iter().chain(grown).collect();
            let want: BTreeSet<Permutation> = level.iter().cloned().collect();
            for p in want.symmetric_difference(&layer) {
                r.fail(
                    format!("closure at length {n}: {p}"),
                    if want.contains(p) { "member" } else { "non-member" },
                    if layer.contains(p) { "reached" } else { "missed" },
                );
            }
            if narrow.len() != want.len() {
                r.note(format!(
                    "length {n}: closure under the INS₁/INS₂ rule reaches {} of {}",
                    narrow.len(),
                    want.len()
                ));
            }
            prev = layer.into_iter().collect();
            narrow_prev = narrow.into_iter().collect();

            let bad = self.exec.flat_map(level, |p| match reduce_to_primitive(p) {
                Ok(q) => {
                    let mut out = Vec::new();
                    if oracle::occurrences(&m_pat, q.values()) != 0 || !oracle::avoids_all(q.values(), &class_patterns()) {
                        out.push(witness(p, "M-free class member", &q));
                    }
                    out
                }
                Err(e) => vec![witness(p, "reduction", e)],
            });
            r.absorb(bad);
            let keeps_chains = self.exec.count(level, |p| {
                reduce_to_primitive(p)
                    .and_then(|q| perm_to_tree(&q))
                    .map(|t| oracle::single_child_max(&t) != 0)
                    .unwrap_or(false)
            });
            if keeps_chains > 0 {
                r.note(format!(
                    "length {n}: {keeps_chains} reduced permutations still map to trees with single-child-max nodes"
                ));
            }
            let splits = self.exec.flat_map(level, |p| {
                let ends = perms::all_reductions(p);
                if ends.len() == 1 {
                    Vec::new()
                } else {
                    vec![(p.clone(), ends)]
                }
            });
            if let Some((p, ends)) = splits.first() {
                confluent = false;
                r.note(format!(
                    "removal order matters at length {n}: {p} reduces to {}",
                    ends.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" | ")
                ));
            }
        }
        if confluent {
            r.note(format!("every removal order reaches the same primitive permutation for length ≤ {small}"));
        }
        Ok(r.finish())
    }

    /// The three expressions for A(x), solver residuals, the B₂ closed form
    /// and the printed B₃ terms.
    pub fn check_series_identities(&self, order: usize) -> Result<VerificationReport> {
        guard("series order", order, 10, MAX_SERIES_ORDER)?;
        let mut r = Recorder::new("series", &[("order", order)]);
        let a = series(SeriesName::AFormula, order)?;
        for other in [SeriesName::AZeil, SeriesName::AHyp] {
            let s = series(other, order)?;
            for n in 0..=order {
                r.check(format!("[x^{n}]{other}"), a.coeff(n).clone(), s.coeff(n).clone());
            }
        }
        for (name, spec) in [
            ("cubic", EquationSpec::zeilberger_cubic()),
            ("B2", EquationSpec::b2_quadratic()),
            ("B3", EquationSpec::b3_quartic()),
        ] {
            let y = solve_equation(&spec, order)?;
            let res = spec.q.eval_series(&y);
            r.check(format!("{name} residual"), true, res.is_zero());
        }
        let b2 = series(SeriesName::B2, order)?;
        r.check("B2 closed form", b2_closed_form(order)?, b2);
        let b3 = series(SeriesName::B3, order)?;
        let printed = [1i64, 0, 1, 1, 5, 13, 48, 160, 578, 2078];
        for (i, &v) in printed.iter().enumerate() {
            r.check(format!("[x^{}]B3", i + 1), BigRational::from_integer(v.into()), b3.coeff(i + 1).clone());
        }
        let p = series(SeriesName::P, order)?;
        let pp = series(SeriesName::PPrime, order)?;
        r.note(format!("[x^1]PPRIME = {} (boundary term of (1 − x)P)", pp.coeff(1)));
        r.check("[x^0]P", BigRational::from_integer(2.into()), p.coeff(0).clone());
        Ok(r.finish())
    }

    /// Relative errors of the first-order estimates and the singularity
    /// constants, with the tolerances quoted alongside them.
    pub fn check_asymptotics(&self) -> Result<VerificationReport> {
        let mut r = Recorder::new("asymptotics", &[]);
        let ladder = [50usize, 100, 200, 400, 800];
        let targets = [
            (AsymptoticName::A, 1000, 1e-2),
            (AsymptoticName::P, 1000, 1e-2),
            (AsymptoticName::PPrime, 1000, 1e-2),
            (AsymptoticName::B1, 1000, 1e-3),
            (AsymptoticName::B2, 1000, 1e-3),
            (AsymptoticName::B3, 100, 1e-3),
        ];
        let results = self.exec.map(&targets, |&(name, n, tol)| {
            let mut ns = ladder.to_vec();
            ns.push(n);
            relative_errors(name, &ns).map(|e| (name, n, tol, e))
        });
        for res in results {
            let (name, n, tol, errs) = res?;
            let at = errs[ladder.len()];
            let ladder_errs = &errs[..ladder.len()];
            let convention = if name == AsymptoticName::A { " (maps on n edges)" } else { "" };
            r.note(format!(
                "{name}{convention}: relative error {at:+.3e} at n = {n}; ladder {}",
                ladder_errs.iter().map(|e| format!("{e:+.2e}")).collect::<Vec<_>>().join(" ")
            ));
            if at.abs() > tol {
                r.fail(format!("{name} at n = {n}"), format!("|relative error| ≤ {tol}"), format!("{at:+.4e}"));
            }
            if !ladder_errs.windows(2).all(|w| w[1].abs() < w[0].abs()) {
                r.fail(
                    format!("{name} over n = 50..800"),
                    "shrinking relative error",
                    ladder_errs.iter().map(|e| format!("{e:+.2e}")).collect::<Vec<_>>().join(" "),
                );
            }
        }
        let s = b3_singularity()?;
        r.note(format!(
            "B3 singularity: tau {:.7}, rho {:.7}, gamma {:.7}; coefficient ratio at 200: {:.5}",
            s.tau, s.rho, s.gamma, s.empirical_ratio
        ));
        for (what, got, want, tol) in [
            ("tau", s.tau, 0.28525, 5e-6),
            ("rho", s.rho, 4.24121, 1e-5),
            ("gamma", s.gamma, 0.12347, 1e-5),
        ] {
            if (got - want).abs() > tol {
                r.fail(format!("B3 {what}"), format!("{want} ± {tol:e}"), format!("{got:.7}"));
            }
        }
        let (_, gamma_rounded) = b3_phi_constants(0.28525)?;
        r.note(format!("gamma evaluated at the rounded tau 0.28525: {gamma_rounded:.7}"));
        Ok(r.finish())
    }

    /// Quoted occurrence facts, and the mesh matcher against the reference
    /// on every shading of every pattern of length ≤ 2.
    pub fn check_patterns(&self, n_max: usize) -> Result<VerificationReport> {
        guard("max length", n_max, 1, 7)?;
        let mut r = Recorder::new("patterns", &[("max_length", n_max)]);
        let p = |s: &str| s.parse::<Permutation>().expect("literal permutation");
        let quoted: [(Pattern, &str, &str); 3] = [
            (classical_3142().into(), "462531", "4253"),
            (vincular_2_41_3().into(), "365241", "3524"),
            (mesh_m().into(), "25314", "31"),
        ];
        for (pat, text, at) in quoted {
            let pi = p(text);
            let occ = perms::occurrences(&pat, &pi);
            let got: Vec<String> = occ
                .iter()
                .map(|o| o.iter().map(|&i| pi.values()[i].to_string()).collect())
                .collect();
            r.check(format!("{pat} in {text}"), at.to_string(), got.join(","));
            r.check(format!("{pat} in {text} (reference)"), 1, oracle::occurrences(&pat, pi.values()));
        }
        r.check("32541 avoids 3142", true, perms::avoids(&p("32541"), &[classical_3142().into()]));
        r.check("253164 avoids 2-41-3", true, perms::avoids(&p("253164"), &[vincular_2_41_3().into()]));
        r.check("2413 contains 2-41-3", false, perms::avoids(&p("2413"), &[vincular_2_41_3().into()]));

        let mut patterns: Vec<Pattern> = Vec::new();
        for base in [vec![1], vec![1, 2], vec![2, 1]] {
            let k = base.len();
            let cells: Vec<(usize, usize)> = (0..=k).flat_map(|a| (0..=k).map(move |b| (a, b))).collect();
            for mask in 0u32..(1 << cells.len()) {
                let shaded = cells.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &c)| c);
                patterns.push(MeshPattern::new(Permutation::new(base.clone())?, shaded)?.into());
            }
        }
        for base in [vec![2, 4, 1, 3], vec![3, 1, 4, 2], vec![1, 3, 2]] {
            let k = base.len();
            for adj in 0u32..(1 << (k - 1)) {
                let adjacent = (1..k).filter(|i| adj >> (i - 1) & 1 == 1);
                patterns.push(VincularPattern::new(Permutation::new(base.clone())?, adjacent)?.into());
            }
        }
        let perms_all: Vec<Vec<u32>> = (0..=n_max).flat_map(oracle::all_permutations).collect();
        let bad = self.exec.flat_map(&patterns, |pat| {
            perms_all
                .iter()
                .filter_map(|q| {
                    let pi = Permutation::new(q.clone()).ok()?;
                    let fast = perms::count_occurrences(pat, &pi);
                    let slow = oracle::occurrences(pat, q);
                    (fast != slow).then(|| witness(format!("{pat} in {pi}"), slow, fast))
                })
                .collect()
        });
        r.absorb(bad);
        r.note(format!(
            "{} patterns against {} permutations of length ≤ {n_max}",
            patterns.len(),
            perms_all.len()
        ));
        Ok(r.finish())
    }

    /// Every suite at its default size.
    pub fn run_all(&self) -> Result<Vec<VerificationReport>> {
        Suite::ALL.iter().map(|&s| self.run(s, None)).collect()
    }
}

fn bad_one(t: &LabeledTree, expected: &str, e: Error) -> Vec<Witness> {
    vec![witness(format_tree(t), expected, e)]
}
