//! Permutations, classical/vincular/mesh patterns, the class
//! Av(3142, 2-41-3) and its bijection with β(1,0)-trees.
//!
//! A β(1,0)-tree on `n` edges corresponds to a class member of length `n`;
//! the single-node tree corresponds to the empty permutation.
//!
//! Both families are built the same way. Decomposable objects are sums of
//! indecomposable ones (children glued under a common root, resp. a direct
//! sum of blocks). An indecomposable tree puts a new root above a tree with
//! root label `k` and relabels the old root `a ∈ 1..=k`; the matching
//! permutation step inserts the new maximum before the `a`-th left-to-right
//! maximum (counted from the left) and then moves the blocks around so the
//! result is indecomposable, see [`insert_largest`].

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::trees::LabeledTree;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation(Vec<u32>);

impl Permutation {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![false; n + 1];
        for &v in &values {
            if v == 0 || v as usize > n || std::mem::replace(&mut seen[v as usize], true) {
                return Err(Error::InvalidPermutation(format!(
                    "{values:?} is not a permutation of 1..={n}"
                )));
            }
        }
        Ok(Permutation(values))
    }

    pub fn empty() -> Self {
        Permutation(Vec::new())
    }

    pub fn identity(n: usize) -> Self {
        Permutation((1..=n as u32).collect())
    }

    /// Order-isomorphic relabeling of distinct values onto `1..=len`.
    pub fn flatten(values: &[u32]) -> Self {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by_key(|&i| values[i]);
        let mut out = vec![0; values.len()];
        for (rank, i) in idx.into_iter().enumerate() {
            out[i] = rank as u32 + 1;
        }
        Permutation(out)
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Positions (0-based) of the left-to-right maxima.
    pub fn left_to_right_maxima(&self) -> Vec<usize> {
        let mut best = 0;
        let mut out = Vec::new();
        for (i, &v) in self.0.iter().enumerate() {
            if v > best {
                best = v;
                out.push(i);
            }
        }
        out
    }

    /// Split into indecomposable blocks; every block is flattened.
    pub fn components(&self) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut start = 0;
        let mut max = 0;
        for (i, &v) in self.0.iter().enumerate() {
            max = max.max(v);
            if max as usize == i + 1 {
                out.push(Permutation::flatten(&self.0[start..=i]));
                start = i + 1;
            }
        }
        out
    }

    pub fn is_indecomposable(&self) -> bool {
        self.components().len() == 1
    }

    pub fn direct_sum(parts: &[Permutation]) -> Permutation {
        let mut out = Vec::with_capacity(parts.iter().map(Permutation::len).sum());
        let mut shift = 0;
        for p in parts {
            out.extend(p.0.iter().map(|v| v + shift));
            shift += p.len() as u32;
        }
        Permutation(out)
    }

    /// Removes the letter at `pos` and flattens.
    pub fn remove_at(&self, pos: usize) -> Permutation {
        let removed = self.0[pos];
        Permutation(
            self.0
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != pos)
                .map(|(_, &v)| if v > removed { v - 1 } else { v })
                .collect(),
        )
    }

    /// Inserts a letter of value `value` (1..=len+1) at `pos`, shifting
    /// letters `>= value` up by one.
    pub fn insert_at(&self, pos: usize, value: u32) -> Permutation {
        let mut out: Vec<u32> = self
            .0
            .iter()
            .map(|&v| if v >= value { v + 1 } else { v })
            .collect();
        out.insert(pos, value);
        Permutation(out)
    }

    /// All permutations of length `n` in lexicographic order.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut cur: Vec<u32> = (1..=n as u32).collect();
        let mut out = vec![Permutation(cur.clone())];
        while next_permutation(&mut cur) {
            out.push(Permutation(cur.clone()));
        }
        out
    }
}

fn next_permutation(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Space-separated ranks, or a compact digit string for lengths up to 9.
pub fn parse_perm(text: &str) -> Result<Permutation> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(Permutation::empty());
    }
    let values: Vec<u32> = if trimmed.contains(char::is_whitespace) || trimmed.contains(',') {
        let mut out = Vec::new();
        let mut pos = text.len() - text.trim_start().len();
        for tok in trimmed.split(|c: char| c.is_whitespace() || c == ',') {
            if !tok.is_empty() {
                out.push(
                    tok.parse()
                        .map_err(|_| Error::parse(pos, format!("bad rank {tok:?}")))?,
                );
            }
            pos += tok.len() + 1;
        }
        out
    } else {
        if trimmed.len() > 9 {
            return Err(Error::parse(0, "compact form is limited to length 9"));
        }
        trimmed
            .chars()
            .enumerate()
            .map(|(i, c)| {
                c.to_digit(10)
                    .ok_or_else(|| Error::parse(i, format!("bad digit {c:?}")))
            })
            .collect::<Result<_>>()?
    };
    Permutation::new(values)
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_perm(s)
    }
}

/// Base permutation plus shaded cells `(column, row)`, both in `0..=k`,
/// column 0 left of everything and row 0 below everything.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeshPattern {
    pub base: Permutation,
    pub shaded: BTreeSet<(usize, usize)>,
}

impl MeshPattern {
    pub fn new(base: Permutation, shaded: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let k = base.len();
        let shaded: BTreeSet<_> = shaded.into_iter().collect();
        if let Some(&(a, b)) = shaded.iter().find(|&&(a, b)| a > k || b > k) {
            return Err(Error::OutOfRange {
                what: "shaded cell",
                value: a.max(b),
                allowed: format!("0..={k}"),
            });
        }
        Ok(MeshPattern { base, shaded })
    }

    fn of(base: &[u32], cells: &[(usize, usize)]) -> Self {
        MeshPattern {
            base: Permutation(base.to_vec()),
            shaded: cells.iter().copied().collect(),
        }
    }
}

impl fmt::Display for MeshPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in self.base.values() {
            write!(f, "{v}")?;
        }
        f.write_str("/")?;
        let cells: Vec<String> = self.shaded.iter().map(|(a, b)| format!("({a},{b})")).collect();
        f.write_str(&cells.join(","))
    }
}

/// `21/(1,0),(1,1),(1,2),(2,1)`
pub fn parse_mesh(text: &str) -> Result<MeshPattern> {
    let (base, cells) = text
        .split_once('/')
        .ok_or_else(|| Error::parse(0, "expected base/cells"))?;
    let base = parse_perm(base)?;
    let offset = base_len(text);
    let mut shaded = Vec::new();
    let body: String = cells.chars().filter(|c| !c.is_whitespace()).collect();
    let mut rest = body.as_str();
    while !rest.is_empty() {
        let consumed = body.len() - rest.len();
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.split_once(')'))
            .ok_or_else(|| Error::parse(offset + consumed, "expected (a,b)"))?;
        let (a, b) = inner
            .0
            .split_once(',')
            .ok_or_else(|| Error::parse(offset + consumed, "expected (a,b)"))?;
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(offset + consumed, format!("bad cell index {s:?}")))
        };
        shaded.push((parse(a)?, parse(b)?));
        rest = inner.1.strip_prefix(',').unwrap_or(inner.1);
    }
    MeshPattern::new(base, shaded)
}

fn base_len(text: &str) -> usize {
    text.find('/').map_or(0, |i| i + 1)
}

/// Base permutation plus the 1-based positions `i` whose letters must sit
/// next to the letter at `i + 1` in an occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VincularPattern {
    pub base: Permutation,
    pub adjacent: BTreeSet<usize>,
}

impl VincularPattern {
    pub fn new(base: Permutation, adjacent: impl IntoIterator<Item = usize>) -> Result<Self> {
        let k = base.len();
        let adjacent: BTreeSet<_> = adjacent.into_iter().collect();
        if let Some(&i) = adjacent.iter().find(|&&i| i == 0 || i >= k) {
            return Err(Error::OutOfRange {
                what: "adjacency position",
                value: i,
                allowed: format!("1..{k}"),
            });
        }
        Ok(VincularPattern { base, adjacent })
    }
}

/// Dashed notation: letters in one dash-free group must be adjacent.
impl fmt::Display for VincularPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.base.values().iter().enumerate() {
            if i > 0 && !self.adjacent.contains(&i) {
                f.write_str("-")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Parses dashed notation such as `2-41-3`.
pub fn parse_vincular(text: &str) -> Result<VincularPattern> {
    let mut digits = Vec::new();
    let mut adjacent = Vec::new();
    let mut glued = false;
    for (i, c) in text.trim().chars().enumerate() {
        match c {
            '-' => glued = false,
            d if d.is_ascii_digit() => {
                if glued {
                    adjacent.push(digits.len());
                }
                digits.push(d.to_digit(10).unwrap());
                glued = true;
            }
            other => return Err(Error::parse(i, format!("unexpected {other:?}"))),
        }
    }
    VincularPattern::new(Permutation::new(digits)?, adjacent)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pattern {
    Classical(Permutation),
    Vincular(VincularPattern),
    Mesh(MeshPattern),
}

impl Pattern {
    pub fn base(&self) -> &Permutation {
        match self {
            Pattern::Classical(p) => p,
            Pattern::Vincular(v) => &v.base,
            Pattern::Mesh(m) => &m.base,
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Classical(p) => {
                for v in p.values() {
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            Pattern::Vincular(v) => v.fmt(f),
            Pattern::Mesh(m) => m.fmt(f),
        }
    }
}

impl From<Permutation> for Pattern {
    fn from(p: Permutation) -> Self {
        Pattern::Classical(p)
    }
}

impl From<VincularPattern> for Pattern {
    fn from(p: VincularPattern) -> Self {
        Pattern::Vincular(p)
    }
}

impl From<MeshPattern> for Pattern {
    fn from(p: MeshPattern) -> Self {
        Pattern::Mesh(p)
    }
}

pub fn classical_3142() -> Permutation {
    Permutation(vec![3, 1, 4, 2])
}

pub fn vincular_2_41_3() -> VincularPattern {
    VincularPattern {
        base: Permutation(vec![2, 4, 1, 3]),
        adjacent: BTreeSet::from([2]),
    }
}

/// A descent `xy` with nothing to the right of `y` valued between them.
pub fn mesh_m() -> MeshPattern {
    MeshPattern::of(&[2, 1], &[(1, 0), (1, 1), (1, 2), (2, 1)])
}

/// [`mesh_m`] where `x` is also the largest letter.
pub fn mesh_m_prime() -> MeshPattern {
    MeshPattern::of(&[2, 1], &[(1, 0), (1, 1), (1, 2), (2, 1), (0, 2), (2, 2)])
}

/// Occurs exactly when the permutation starts with its largest letter.
pub fn mesh_n() -> MeshPattern {
    MeshPattern::of(&[1], &[(0, 0), (0, 1), (1, 1)])
}

/// Avoided exactly by the indecomposable permutations.
pub fn mesh_indecomposable() -> MeshPattern {
    MeshPattern::of(&[1, 2], &[(0, 1), (0, 2), (1, 1), (1, 2), (2, 0)])
}

/// Allowed insertion descents for growing from primitive members.
pub fn mesh_ins1() -> MeshPattern {
    MeshPattern::of(&[2, 1], &[(0, 1), (1, 0), (1, 1), (1, 2), (2, 1)])
}

pub fn mesh_ins2() -> MeshPattern {
    MeshPattern::of(&[2, 1], &[(0, 0), (1, 0), (1, 1), (1, 2), (2, 1)])
}

/// All occurrences, as 0-based position tuples in lexicographic order.
pub fn occurrences(pattern: &Pattern, perm: &Permutation) -> Vec<Vec<usize>> {
    let base = pattern.base().values();
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(base.len());
    search(pattern, base, perm.values(), 0, &mut chosen, &mut out);
    out
}

pub fn count_occurrences(pattern: &Pattern, perm: &Permutation) -> usize {
    occurrences(pattern, perm).len()
}

fn search(
    pattern: &Pattern,
    base: &[u32],
    text: &[u32],
    start: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let depth = chosen.len();
    if depth == base.len() {
        if side_conditions_hold(pattern, text, chosen) {
            out.push(chosen.clone());
        }
        return;
    }
    let need = base.len() - depth;
    for pos in start..=text.len().saturating_sub(need) {
        if text.len() < need {
            break;
        }
        if let Pattern::Vincular(v) = pattern {
            if depth > 0 && v.adjacent.contains(&depth) && pos != chosen[depth - 1] + 1 {
                continue;
            }
        }
        // order-isomorphic with the base so far
        let consistent = chosen
            .iter()
            .enumerate()
            .all(|(j, &p)| (text[p] < text[pos]) == (base[j] < base[depth]));
        if !consistent {
            continue;
        }
        chosen.push(pos);
        search(pattern, base, text, pos + 1, chosen, out);
        chosen.pop();
    }
}

fn side_conditions_hold(pattern: &Pattern, text: &[u32], chosen: &[usize]) -> bool {
    let Pattern::Mesh(mesh) = pattern else {
        return true;
    };
    let k = chosen.len();
    let n = text.len();
    let mut values: Vec<u32> = chosen.iter().map(|&p| text[p]).collect();
    values.sort_unstable();
    mesh.shaded.iter().all(|&(a, b)| {
        let lo_pos = if a == 0 { 0 } else { chosen[a - 1] + 1 };
        let hi_pos = if a == k { n } else { chosen[a] };
        let lo_val = if b == 0 { 0 } else { values[b - 1] };
        let hi_val = if b == k { n as u32 + 1 } else { values[b] };
        (lo_pos..hi_pos).all(|j| !(lo_val < text[j] && text[j] < hi_val))
    })
}

pub fn avoids(perm: &Permutation, patterns: &[Pattern]) -> bool {
    patterns.iter().all(|p| count_occurrences(p, perm) == 0)
}

/// Membership in Av(3142, 2-41-3).
pub fn in_class(perm: &Permutation) -> bool {
    avoids(
        perm,
        &[classical_3142().into(), vincular_2_41_3().into()],
    )
}

fn require_member(perm: &Permutation) -> Result<()> {
    if in_class(perm) {
        Ok(())
    } else {
        Err(Error::NotInClass(perm.to_string()))
    }
}

pub fn m_count(perm: &Permutation) -> usize {
    count_occurrences(&mesh_m().into(), perm)
}

/// Number of admissible insertion points for the next maximum: the number
/// of left-to-right maxima, or 1 for the empty permutation.
pub fn insertion_choices(perm: &Permutation) -> usize {
    perm.left_to_right_maxima().len().max(1)
}

/// Inserts `n + 1` before the `which`-th (1-based, from the left)
/// left-to-right maximum of `perm`, then rewrites the result `A ⊕ (B n C)`
/// (with `B n C` its last indecomposable block) as `B̃ Ã n C̃`, where the
/// letters of `A` are lifted above those of `B` and `C`.
pub fn insert_largest(perm: &Permutation, which: usize) -> Result<Permutation> {
    let choices = insertion_choices(perm);
    if which == 0 || which > choices {
        return Err(Error::OutOfRange {
            what: "left-to-right maximum index",
            value: which,
            allowed: format!("1..={choices}"),
        });
    }
    let n = perm.len() as u32 + 1;
    if perm.is_empty() {
        return Ok(Permutation(vec![1]));
    }
    let pos = perm.left_to_right_maxima()[which - 1];
    let mut sigma = perm.0.clone();
    sigma.insert(pos, n);
    // last split point: prefix of length i holds exactly 1..=i
    let mut split = 0;
    let mut max = 0;
    for (i, &v) in sigma.iter().enumerate().take(pos) {
        max = max.max(v);
        if max as usize == i + 1 {
            split = i + 1;
        }
    }
    let a_len = split as u32;
    let (a, rest) = sigma.split_at(split);
    let n_at = pos - split;
    let (b, c) = (&rest[..n_at], &rest[n_at + 1..]);
    let lift = (b.len() + c.len()) as u32;
    let mut out = Vec::with_capacity(sigma.len());
    out.extend(b.iter().map(|v| v - a_len));
    out.extend(a.iter().map(|v| v + lift));
    out.push(n);
    out.extend(c.iter().map(|v| v - a_len));
    Ok(Permutation(out))
}

/// Undoes [`insert_largest`] on an indecomposable class member: returns the
/// shorter permutation and the left-to-right-maximum index used.
///
/// Writing the input as `B̃ Ã n C̃`, the candidate `Ã` blocks are the runs
/// ending right before `n` whose letters are exactly the values just below
/// `n`; the longest one that replays to the input wins.
pub fn remove_largest(perm: &Permutation) -> Result<(Permutation, usize)> {
    let n = perm.len();
    if n == 0 {
        return Err(Error::InvalidPermutation("empty permutation has no largest letter".into()));
    }
    if n == 1 {
        return Ok((Permutation::empty(), 1));
    }
    let v = perm.values();
    let q = v.iter().position(|&x| x as usize == n).unwrap();
    for t in (0..=q).rev() {
        let a_tilde = &v[q - t..q];
        let lo = (n - 1 - t) as u32;
        if !a_tilde.iter().all(|&x| x > lo) {
            continue;
        }
        let (b_tilde, c_tilde) = (&v[..q - t], &v[q + 1..]);
        if c_tilde.is_empty() {
            continue;
        }
        let t32 = t as u32;
        let mut prev: Vec<u32> = Vec::with_capacity(n - 1);
        prev.extend(a_tilde.iter().map(|x| x - lo));
        prev.extend(b_tilde.iter().map(|x| x + t32));
        prev.extend(c_tilde.iter().map(|x| x + t32));
        let prev = Permutation(prev);
        let Some(which) = prev.left_to_right_maxima().iter().position(|&p| p == q) else {
            continue;
        };
        if insert_largest(&prev, which + 1).as_ref() == Ok(perm) {
            return Ok((prev, which + 1));
        }
    }
    Err(Error::NotInClass(format!(
        "{perm} is not produced by inserting a maximum"
    )))
}

/// Av(3142, 2-41-3) of length `n`, built structurally and sorted
/// lexicographically.
pub fn generate_av(n: usize) -> Vec<Permutation> {
    generate_av_with(n, Exec::default())
}

pub fn generate_av_with(n: usize, exec: Exec) -> Vec<Permutation> {
    generate_av_levels(n, exec).pop().unwrap()
}

/// `Av(0), ..., Av(n)`.
pub fn generate_av_levels(n: usize, exec: Exec) -> Vec<Vec<Permutation>> {
    let mut av: Vec<Vec<Permutation>> = vec![vec![Permutation::empty()]];
    let mut indec: Vec<Vec<Permutation>> = vec![Vec::new()];
    for m in 1..=n {
        let grown = exec.flat_map(&av[m - 1], |p| {
            (1..=insertion_choices(p))
                .map(|a| insert_largest(p, a).expect("index in range"))
                .collect()
        });
        let mut level: Vec<Permutation> = grown.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        indec.push(std::mem::take(&mut level));
        let mut all = BTreeSet::new();
        for first in 1..=m {
            for head in &indec[first] {
                for tail in &av[m - first] {
                    all.insert(Permutation::direct_sum(&[head.clone(), tail.clone()]));
                }
            }
        }
        av.push(all.into_iter().collect());
    }
    av
}

pub fn tree_to_perm(t: &LabeledTree) -> Result<Permutation> {
    t.checked()?;
    Ok(tree_to_perm_unchecked(t))
}

pub(crate) fn tree_to_perm_unchecked(t: &LabeledTree) -> Permutation {
    match t.children.len() {
        0 => Permutation::empty(),
        1 => {
            let child = &t.children[0];
            let mut below = child.clone();
            below.label = below.max_label();
            let inner = tree_to_perm_unchecked(&below);
            insert_largest(&inner, child.label as usize).expect("label within root label of subtree")
        }
        _ => {
            let parts: Vec<Permutation> = t
                .children
                .iter()
                .map(|c| tree_to_perm_unchecked(&LabeledTree::node(c.label, vec![c.clone()])))
                .collect();
            Permutation::direct_sum(&parts)
        }
    }
}

pub fn perm_to_tree(perm: &Permutation) -> Result<LabeledTree> {
    require_member(perm)?;
    perm_to_tree_unchecked(perm)
}

fn perm_to_tree_unchecked(perm: &Permutation) -> Result<LabeledTree> {
    if perm.is_empty() {
        return Ok(LabeledTree::leaf());
    }
    let blocks = perm.components();
    if blocks.len() > 1 {
        let children = blocks
            .iter()
            .map(|b| perm_to_tree_unchecked(b).map(|mut t| t.children.remove(0)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(LabeledTree::root_over(children));
    }
    let (prev, which) = remove_largest(perm)?;
    let mut child = perm_to_tree_unchecked(&prev)?;
    child.label = which as u32;
    Ok(LabeledTree::node(which as u32, vec![child]))
}

/// Class members avoiding `M`.
pub fn is_primitive_perm(perm: &Permutation) -> Result<bool> {
    require_member(perm)?;
    Ok(m_count(perm) == 0)
}

/// Removes the smaller letter of the leftmost `M` occurrence until none is
/// left. Every intermediate result is checked for class membership.
pub fn reduce_to_primitive(perm: &Permutation) -> Result<Permutation> {
    require_member(perm)?;
    let m = Pattern::from(mesh_m());
    let mut cur = perm.clone();
    while let Some(occ) = occurrences(&m, &cur).into_iter().next() {
        cur = cur.remove_at(occ[1]);
        if !in_class(&cur) {
            return Err(Error::NotInClass(format!(
                "reduction of {perm} left the class at {cur}"
            )));
        }
    }
    Ok(cur)
}

/// Every M-free permutation reachable by removing smaller letters of `M`
/// occurrences in any order.
pub fn all_reductions(perm: &Permutation) -> BTreeSet<Permutation> {
    let m = Pattern::from(mesh_m());
    let mut seen = HashSet::new();
    let mut stack = vec![perm.clone()];
    let mut ends = BTreeSet::new();
    while let Some(cur) = stack.pop() {
        if !seen.insert(cur.clone()) {
            continue;
        }
        let occ = occurrences(&m, &cur);
        if occ.is_empty() {
            ends.insert(cur);
            continue;
        }
        for o in occ {
            stack.push(cur.remove_at(o[1]));
        }
    }
    ends
}

/// Inserts a new smaller letter `y` right after some letter `x`, keeping
/// the class members in which the new descent `xy` is an occurrence of `M`.
pub fn one_step_expansions(perm: &Permutation) -> Result<BTreeSet<Permutation>> {
    require_member(perm)?;
    Ok(one_step_expansions_unchecked(perm))
}

pub(crate) fn one_step_expansions_unchecked(perm: &Permutation) -> BTreeSet<Permutation> {
    let m = [Pattern::from(mesh_m())];
    expand_with(perm, &m, true)
}

/// The narrower rule that keeps only descents matching [`mesh_ins1`] or
/// [`mesh_ins2`]. Its closure misses class members from length 4 on
/// (1342 is the first).
pub fn mesh_expansions(perm: &Permutation) -> Result<BTreeSet<Permutation>> {
    require_member(perm)?;
    let ins = [Pattern::from(mesh_ins1()), Pattern::from(mesh_ins2())];
    Ok(expand_with(perm, &ins, false))
}

fn expand_with(perm: &Permutation, patterns: &[Pattern], need_member: bool) -> BTreeSet<Permutation> {
    let mut out = BTreeSet::new();
    for (pos, &x) in perm.values().iter().enumerate() {
        for y in 1..=x {
            let grown = perm.insert_at(pos + 1, y);
            let target = [pos, pos + 1];
            let ok = patterns
                .iter()
                .any(|p| occurrences(p, &grown).iter().any(|o| o[..] == target));
            if ok && (!need_member || in_class(&grown)) {
                out.insert(grown);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{format_tree, parse_tree};

    fn p(s: &str) -> Permutation {
        parse_perm(s).unwrap()
    }

    fn positions_to_values(perm: &Permutation, occ: &[usize]) -> String {
        occ.iter().map(|&i| perm.values()[i].to_string()).collect()
    }

    #[test]
    fn quoted_occurrences() {
        let pi = p("462531");
        let occ = occurrences(&classical_3142().into(), &pi);
        assert_eq!(occ.len(), 1);
        assert_eq!(positions_to_values(&pi, &occ[0]), "4253");

        let pi = p("365241");
        let occ = occurrences(&vincular_2_41_3().into(), &pi);
        assert_eq!(occ.len(), 1);
        assert_eq!(positions_to_values(&pi, &occ[0]), "3524");

        let pi = p("25314");
        let occ = occurrences(&mesh_m().into(), &pi);
        assert_eq!(occ.len(), 1);
        assert_eq!(positions_to_values(&pi, &occ[0]), "31");

        for n in 0..7 {
            assert_eq!(m_count(&Permutation::identity(n)), 0);
        }
    }

    #[test]
    fn quoted_avoidance() {
        assert!(avoids(&p("32541"), &[classical_3142().into()]));
        assert!(avoids(&p("253164"), &[vincular_2_41_3().into()]));
        assert!(!avoids(&p("2413"), &[vincular_2_41_3().into()]));
        assert!(!in_class(&p("2413")));
        assert!(!in_class(&p("3142")));
    }

    #[test]
    fn small_classes() {
        assert_eq!(generate_av(0), vec![Permutation::empty()]);
        assert_eq!(generate_av(3), Permutation::all(3));
        assert_eq!(generate_av(4).len(), 22);
        assert_eq!(generate_av(5).len(), 91);
    }

    #[test]
    fn insertion_example_chain() {
        assert_eq!(insert_largest(&p("12"), 2).unwrap(), p("231"));
        assert_eq!(insert_largest(&p("231"), 1).unwrap(), p("4231"));
        assert_eq!(insert_largest(&p("4231"), 1).unwrap(), p("54231"));
        assert_eq!(insert_largest(&p("12"), 1).unwrap(), p("312"));
        assert!(insert_largest(&p("4231"), 2).is_err());
        assert!(insert_largest(&p("4231"), 0).is_err());
        assert_eq!(insert_largest(&Permutation::empty(), 1).unwrap(), p("1"));
    }

    #[test]
    fn figure_thirteen_trees() {
        let pairs = [
            ("(2 (1) (1))", "12"),
            ("(2 (2 (1) (1)))", "231"),
            ("(1 (1 (2 (1) (1))))", "4231"),
            ("(1 (1 (1 (2 (1) (1)))))", "54231"),
        ];
        for (tree, perm) in pairs {
            let t = parse_tree(tree).unwrap();
            assert_eq!(tree_to_perm(&t).unwrap(), p(perm), "{tree}");
            assert_eq!(format_tree(&perm_to_tree(&p(perm)).unwrap()), tree);
        }
        assert_eq!(tree_to_perm(&LabeledTree::leaf()).unwrap(), Permutation::empty());
        assert_eq!(perm_to_tree(&Permutation::empty()).unwrap(), LabeledTree::leaf());
        assert_eq!(format_tree(&perm_to_tree(&p("1")).unwrap()), "(1 (1))");
    }

    #[test]
    fn perm_to_tree_rejects_non_members() {
        assert!(matches!(perm_to_tree(&p("2413")), Err(Error::NotInClass(_))));
        assert!(matches!(perm_to_tree(&p("3142")), Err(Error::NotInClass(_))));
    }

    #[test]
    fn bijection_round_trip() {
        for n in 1..=7 {
            let trees = crate::trees::enumerate_trees(n).unwrap();
            let mut perms = BTreeSet::new();
            for t in &trees {
                let pi = tree_to_perm(t).unwrap();
                assert_eq!(pi.len(), n - 1);
                assert!(in_class(&pi), "{t} -> {pi}");
                assert_eq!(&perm_to_tree(&pi).unwrap(), t);
                perms.insert(pi);
            }
            assert_eq!(perms.len(), trees.len());
        }
    }

    #[test]
    fn primitive_examples() {
        assert!(!is_primitive_perm(&p("25314")).unwrap());
        assert!(is_primitive_perm(&p("1423")).unwrap());
        assert!(is_primitive_perm(&p("1")).unwrap());
        assert!(is_primitive_perm(&p("2413")).is_err());
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(reduce_to_primitive(&p("25314")).unwrap(), p("1423"));
        assert_eq!(reduce_to_primitive(&p("1423")).unwrap(), p("1423"));
        assert!(reduce_to_primitive(&p("3142")).is_err());
    }

    #[test]
    fn expansions_stay_in_class() {
        for n in 0..=5 {
            for pi in generate_av(n) {
                let grown = one_step_expansions(&pi).unwrap();
                for q in &grown {
                    assert!(in_class(q), "{pi} -> {q}");
                    assert_eq!(m_count(q), m_count(&pi) + 1, "{pi} -> {q}");
                }
                let narrow = mesh_expansions(&pi).unwrap();
                assert!(narrow.is_subset(&grown), "{pi}");
                for q in &narrow {
                    assert!(in_class(q), "{pi} -> {q}");
                }
            }
        }
        let grown = one_step_expansions(&p("1423")).unwrap();
        assert!(grown.contains(&p("25314")), "{grown:?}");
        assert!(one_step_expansions(&p("123")).unwrap().contains(&p("1342")));
        assert!(!mesh_expansions(&p("123")).unwrap().contains(&p("1342")));
    }

    #[test]
    fn text_formats() {
        assert_eq!(p("2 5 3 1 4"), p("25314"));
        assert_eq!(p("2 5 3 1 4").to_string(), "2 5 3 1 4");
        assert_eq!(parse_perm("").unwrap(), Permutation::empty());
        assert_eq!(parse_perm("10 1 2 3 4 5 6 7 8 9").unwrap().len(), 10);
        assert!(matches!(parse_perm("1 x"), Err(Error::Parse { pos: 2, .. })));
        assert!(parse_perm("1 1").is_err());
        assert!(parse_perm("0").is_err());
        assert!(parse_perm("12345678910").is_err());

        let m = parse_mesh("21/(1,0),(1,1),(1,2),(2,1)").unwrap();
        assert_eq!(m, mesh_m());
        assert_eq!(m.to_string(), "21/(1,0),(1,1),(1,2),(2,1)");
        assert_eq!(parse_mesh("21/").unwrap().shaded.len(), 0);
        assert!(parse_mesh("21/(3,0)").is_err());
        assert!(parse_mesh("21/(1,0").is_err());
        assert!(parse_mesh("21").is_err());

        assert_eq!(parse_vincular("2-41-3").unwrap(), vincular_2_41_3());
        assert_eq!(vincular_2_41_3().to_string(), "2-41-3");
        assert!(parse_vincular("2-4x").is_err());
    }

    #[test]
    fn structural_mesh_patterns() {
        let n_pat = Pattern::from(mesh_n());
        let indec = Pattern::from(mesh_indecomposable());
        for n in 1..=6 {
            for pi in Permutation::all(n) {
                assert_eq!(
                    count_occurrences(&n_pat, &pi) > 0,
                    pi.values()[0] as usize == n,
                    "{pi}"
                );
                assert_eq!(count_occurrences(&indec, &pi) == 0, pi.is_indecomposable(), "{pi}");
            }
        }
    }

    #[test]
    fn components_and_sums() {
        let pi = p("213564");
        let parts = pi.components();
        assert_eq!(parts, vec![p("21"), p("1"), p("231")]);
        assert_eq!(Permutation::direct_sum(&parts), pi);
        assert_eq!(p("4231").left_to_right_maxima(), vec![0]);
        assert_eq!(p("2314").left_to_right_maxima(), vec![0, 1, 3]);
    }
}
