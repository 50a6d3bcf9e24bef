//! β(1,0)-trees: rooted plane trees with positive integer labels where every
//! leaf is labeled 1, the root carries the sum of its children's labels, and
//! every other node carries a label between 1 and that sum.
//!
//! Besides validation and exhaustive generation this module hosts the
//! structural predicates that mirror restricted map classes (primitive,
//! k-face-free, multiple-edge-free bounds). Their map-side meaning is checked
//! in [`crate::verify`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A leaf counts as carrying its maximum label.
///
/// The map of a leaf is a single edge from the root vertex to the star
/// vertex, which is exactly the "separated by a single edge" situation that
/// defines maximality for internal nodes.
pub const LEAF_HAS_MAX_LABEL: bool = true;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabeledTree {
    pub label: u32,
    pub children: Vec<LabeledTree>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeStats {
    pub nodes: usize,
    pub leaves: usize,
    pub internal_nodes: usize,
    pub root_label: u32,
    pub single_child_max_nodes: usize,
    pub decomposable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    LeafLabel(u32),
    RootLabel { label: u32, child_sum: u32 },
    ZeroLabel,
    LabelAboveChildSum { label: u32, child_sum: u32 },
}

/// First violated invariant, located by the child-index path from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeViolation {
    pub path: Vec<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::LeafLabel(l) => write!(f, "leaf label {l} ≠ 1")?,
            ViolationKind::RootLabel { label, child_sum } => {
                write!(f, "root label ≠ child sum ({label} vs {child_sum})")?
            }
            ViolationKind::ZeroLabel => write!(f, "label 0")?,
            ViolationKind::LabelAboveChildSum { label, child_sum } => {
                write!(f, "label {label} exceeds child sum {child_sum}")?
            }
        }
        write!(f, " at path {:?}", self.path)
    }
}

impl LabeledTree {
    pub fn leaf() -> Self {
        LabeledTree {
            label: 1,
            children: Vec::new(),
        }
    }

    pub fn node(label: u32, children: Vec<LabeledTree>) -> Self {
        LabeledTree { label, children }
    }

    /// Builds a root over `children`, labeled with their sum.
    pub fn root_over(children: Vec<LabeledTree>) -> Self {
        if children.is_empty() {
            return Self::leaf();
        }
        let label = children.iter().map(|c| c.label).sum();
        LabeledTree { label, children }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(LabeledTree::size).sum::<usize>()
    }

    /// Largest label this node may carry: the sum of its children's labels,
    /// or 1 for a leaf.
    pub fn max_label(&self) -> u32 {
        if self.is_leaf() {
            1
        } else {
            self.children.iter().map(|c| c.label).sum()
        }
    }

    pub fn has_max_label(&self) -> bool {
        (LEAF_HAS_MAX_LABEL && self.is_leaf()) || self.label == self.max_label()
    }

    /// `max_label - label`; zero for leaves.
    pub fn deficit(&self) -> u32 {
        self.max_label().saturating_sub(self.label)
    }

    pub fn validate(&self) -> std::result::Result<(), TreeViolation> {
        if self.is_leaf() {
            if self.label != 1 {
                return Err(TreeViolation {
                    path: vec![],
                    kind: ViolationKind::LeafLabel(self.label),
                });
            }
            return Ok(());
        }
        let child_sum = self.max_label();
        if self.label != child_sum {
            return Err(TreeViolation {
                path: vec![],
                kind: ViolationKind::RootLabel {
                    label: self.label,
                    child_sum,
                },
            });
        }
        let mut path = Vec::new();
        for (i, c) in self.children.iter().enumerate() {
            path.push(i);
            c.validate_inner(&mut path)?;
            path.pop();
        }
        Ok(())
    }

    fn validate_inner(&self, path: &mut Vec<usize>) -> std::result::Result<(), TreeViolation> {
        let kind = if self.is_leaf() {
            (self.label != 1).then_some(ViolationKind::LeafLabel(self.label))
        } else if self.label == 0 {
            Some(ViolationKind::ZeroLabel)
        } else {
            let child_sum = self.max_label();
            (self.label > child_sum).then_some(ViolationKind::LabelAboveChildSum {
                label: self.label,
                child_sum,
            })
        };
        if let Some(kind) = kind {
            return Err(TreeViolation {
                path: path.clone(),
                kind,
            });
        }
        for (i, c) in self.children.iter().enumerate() {
            path.push(i);
            c.validate_inner(path)?;
            path.pop();
        }
        Ok(())
    }

    pub(crate) fn checked(&self) -> Result<&Self> {
        self.validate()
            .map_err(|v| Error::InvalidTree(v.to_string()))?;
        Ok(self)
    }

    /// Pre-order walk over all nodes.
    pub fn nodes(&self) -> impl Iterator<Item = &LabeledTree> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let t = stack.pop()?;
            stack.extend(t.children.iter().rev());
            Some(t)
        })
    }

    /// Nodes that are the only child of their parent and carry maximum label.
    fn count_single_child_max(&self) -> usize {
        self.nodes()
            .filter(|v| v.children.len() == 1 && v.children[0].has_max_label())
            .count()
    }
}

pub fn validate_tree(t: &LabeledTree) -> std::result::Result<(), TreeViolation> {
    t.validate()
}

pub fn tree_stats(t: &LabeledTree) -> Result<TreeStats> {
    t.checked()?;
    let nodes = t.size();
    let leaves = t.nodes().filter(|v| v.is_leaf()).count();
    Ok(TreeStats {
        nodes,
        leaves,
        internal_nodes: nodes - leaves,
        root_label: t.label,
        single_child_max_nodes: t.count_single_child_max(),
        decomposable: t.children.len() >= 2,
    })
}

/// No node has a single child carrying maximum label.
pub fn is_primitive_tree(t: &LabeledTree) -> Result<bool> {
    Ok(t.checked()?.count_single_child_max() == 0)
}

/// Forbidden configurations for maps without faces of degree `k`.
///
/// A node with `m` children closes a new inner face of degree
/// `m + 1 + Σ deficit(child)`, and the root face ends with degree
/// `root label + 1`. The tree is k-face-free iff neither quantity equals `k`.
pub fn is_k_face_free_tree(t: &LabeledTree, k: u32) -> Result<bool> {
    if !(2..=4).contains(&k) {
        return Err(Error::OutOfRange {
            what: "k",
            value: k as usize,
            allowed: "2..=4".into(),
        });
    }
    t.checked()?;
    Ok(k_face_free_unchecked(t, k, ForbiddenRootLabel::KMinusOne))
}

/// Which root label is forbidden for the k-face-free rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForbiddenRootLabel {
    /// `k - 1`, as drawn in the forbidden-subtree figures.
    KMinusOne,
    /// `k`, as stated in the accompanying prose; kept for comparison only.
    K,
}

pub fn k_face_free_unchecked(t: &LabeledTree, k: u32, root_rule: ForbiddenRootLabel) -> bool {
    let forbidden_root = match root_rule {
        ForbiddenRootLabel::KMinusOne => k - 1,
        ForbiddenRootLabel::K => k,
    };
    if t.label == forbidden_root {
        return false;
    }
    !t.nodes().any(|v| {
        let m = v.children.len() as u32;
        if m == 0 || m > k - 1 {
            return false;
        }
        let deficit: u32 = v.children.iter().map(LabeledTree::deficit).sum();
        deficit == k - m - 1
    })
}

/// Necessary conditions for the map to be multiple-edge-free: no single
/// child with maximum label, root label ≠ 1, and no internal node whose only
/// child is labeled 1.
pub fn mef_necessary(t: &LabeledTree) -> Result<bool> {
    t.checked()?;
    if t.label == 1 {
        return Ok(false);
    }
    let bad = t.nodes().any(|v| {
        v.children.len() == 1 && (v.children[0].has_max_label() || v.children[0].label == 1)
    });
    Ok(!bad)
}

pub fn has_no_only_children(t: &LabeledTree) -> Result<bool> {
    Ok(!t.checked()?.nodes().any(|v| v.children.len() == 1))
}

/// Restrictions applied during generation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TreeFilter {
    /// Upper bound on every non-root label.
    pub label_cap: Option<u32>,
    /// Reject trees where some node has exactly one child.
    pub forbid_only_children: bool,
}

/// All β(1,0)-trees on `nodes` nodes.
///
/// Order: a tree is its ordered child sequence; sequences compare first by
/// the size of the first child, then by the first child itself (recursively
/// in this same order, with a node's own label as the innermost key,
/// ascending), then by the rest of the sequence.
pub fn enumerate_trees(nodes: usize) -> Result<Vec<LabeledTree>> {
    enumerate_filtered(nodes, TreeFilter::default())
}

/// The subsequence of [`enumerate_trees`] obeying the label cap (root
/// exempt) and, optionally, the no-only-child rule. Restrictions are pushed
/// into the generator rather than applied afterwards.
pub fn enumerate_restricted_trees(
    nodes: usize,
    label_cap: u32,
    forbid_only_children: bool,
) -> Result<Vec<LabeledTree>> {
    if label_cap == 0 {
        return Err(Error::OutOfRange {
            what: "label_cap",
            value: 0,
            allowed: ">= 1".into(),
        });
    }
    enumerate_filtered(
        nodes,
        TreeFilter {
            label_cap: Some(label_cap),
            forbid_only_children,
        },
    )
}

pub fn enumerate_filtered(nodes: usize, filter: TreeFilter) -> Result<Vec<LabeledTree>> {
    if nodes == 0 {
        return Err(Error::EmptyTree);
    }
    let gen = Generator::new(nodes - 1, filter);
    let mut out = Vec::new();
    if nodes == 1 {
        out.push(LabeledTree::leaf());
        return Ok(out);
    }
    gen.forests(nodes - 1, &mut Vec::new(), &mut |forest| {
        out.push(LabeledTree::root_over(forest.iter().map(|&c| c.clone()).collect()));
    });
    Ok(out)
}

/// Memoized non-root subtrees by size.
struct Generator {
    filter: TreeFilter,
    subtrees: Vec<Vec<LabeledTree>>,
}

impl Generator {
    fn new(max_size: usize, filter: TreeFilter) -> Self {
        let mut gen = Generator {
            filter,
            subtrees: vec![Vec::new()],
        };
        for s in 1..=max_size {
            let mut level = Vec::new();
            if s == 1 {
                level.push(LabeledTree::leaf());
            } else {
                gen.forests(s - 1, &mut Vec::new(), &mut |forest| {
                    let sum: u32 = forest.iter().map(|c| c.label).sum();
                    let top = filter.label_cap.map_or(sum, |cap| cap.min(sum));
                    for label in 1..=top {
                        level.push(LabeledTree::node(
                            label,
                            forest.iter().map(|&c| c.clone()).collect(),
                        ));
                    }
                });
            }
            gen.subtrees.push(level);
        }
        gen
    }

    fn forests<'a>(
        &'a self,
        remaining: usize,
        prefix: &mut Vec<&'a LabeledTree>,
        emit: &mut dyn FnMut(&[&'a LabeledTree]),
    ) {
        if remaining == 0 {
            if !(self.filter.forbid_only_children && prefix.len() == 1) {
                emit(prefix);
            }
            return;
        }
        for first in 1..=remaining {
            if self.filter.forbid_only_children && prefix.is_empty() && first == remaining {
                continue;
            }
            for t in &self.subtrees[first] {
                prefix.push(t);
                self.forests(remaining - first, prefix, emit);
                prefix.pop();
            }
        }
    }
}

/// Parenthesized text: `(label child child ...)`.
pub fn format_tree(t: &LabeledTree) -> String {
    let mut s = String::new();
    write_tree(t, &mut s);
    s
}

fn write_tree(t: &LabeledTree, out: &mut String) {
    out.push('(');
    out.push_str(&t.label.to_string());
    for c in &t.children {
        out.push(' ');
        write_tree(c, out);
    }
    out.push(')');
}

impl fmt::Display for LabeledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_tree(self))
    }
}

/// Parses the parenthesized format. Only syntax is checked here; use
/// [`validate_tree`] for the labeling rules.
pub fn parse_tree(text: &str) -> Result<LabeledTree> {
    let bytes = text.as_bytes();
    let mut pos = skip_ws(bytes, 0);
    let t = parse_node(bytes, &mut pos)?;
    pos = skip_ws(bytes, pos);
    if pos != bytes.len() {
        return Err(Error::parse(pos, "trailing input"));
    }
    Ok(t)
}

fn skip_ws(b: &[u8], mut pos: usize) -> usize {
    while pos < b.len() && b[pos].is_ascii_whitespace() {
        pos += 1;
    }
    pos
}

fn parse_node(b: &[u8], pos: &mut usize) -> Result<LabeledTree> {
    if b.get(*pos) != Some(&b'(') {
        return Err(Error::parse(*pos, "expected '('"));
    }
    *pos = skip_ws(b, *pos + 1);
    let start = *pos;
    while *pos < b.len() && b[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::parse(start, "expected label"));
    }
    let label: u32 = std::str::from_utf8(&b[start..*pos])
        .expect("ascii digits")
        .parse()
        .map_err(|_| Error::parse(start, "label too large"))?;
    let mut children = Vec::new();
    loop {
        *pos = skip_ws(b, *pos);
        match b.get(*pos) {
            Some(b')') => {
                *pos += 1;
                return Ok(LabeledTree { label, children });
            }
            Some(b'(') => children.push(parse_node(b, pos)?),
            Some(_) => return Err(Error::parse(*pos, "expected '(' or ')'")),
            None => return Err(Error::parse(*pos, "unexpected end of input")),
        }
    }
}

impl FromStr for LabeledTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_tree(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> LabeledTree {
        parse_tree(s).unwrap()
    }

    pub(crate) const FIG3: &str = "(4 (2 (1 (1)) (1) (1)) (1) (1 (2 (1) (1))))";

    #[test]
    fn validation_examples() {
        assert_eq!(validate_tree(&t("(1)")), Ok(()));
        assert_eq!(validate_tree(&t("(2 (1) (1))")), Ok(()));
        let v = validate_tree(&t("(3 (1) (1))")).unwrap_err();
        assert!(v.to_string().starts_with("root label ≠ child sum"));
        assert_eq!(v.path, Vec::<usize>::new());
        let v = validate_tree(&t("(3 (2 (1)) (1))")).unwrap_err();
        assert_eq!(v.path, vec![0]);
        assert!(matches!(v.kind, ViolationKind::LabelAboveChildSum { .. }));
        let v = validate_tree(&t("(2 (2) )")).unwrap_err();
        assert!(matches!(v.kind, ViolationKind::LeafLabel(2)));
        assert!(validate_tree(&t("(2)")).is_err());
        assert!(validate_tree(&t("(1 (0 (1)))")).is_err());
        assert!(validate_tree(&t(FIG3)).is_ok());
    }

    #[test]
    fn enumeration_small_counts() {
        assert_eq!(enumerate_trees(1).unwrap(), vec![LabeledTree::leaf()]);
        assert_eq!(enumerate_trees(2).unwrap().len(), 1);
        assert_eq!(enumerate_trees(4).unwrap().len(), 6);
        assert_eq!(enumerate_trees(6).unwrap().len(), 91);
        assert_eq!(enumerate_trees(0), Err(Error::EmptyTree));
    }

    #[test]
    fn figure_two_trees_are_the_four_node_trees() {
        let mut fig2: Vec<_> = [
            "(1 (1 (1 (1))))",
            "(1 (1 (1) (1)))",
            "(2 (2 (1) (1)))",
            "(2 (1) (1 (1)))",
            "(2 (1 (1)) (1))",
            "(3 (1) (1) (1))",
        ]
        .iter()
        .map(|s| t(s))
        .collect();
        let mut got = enumerate_trees(4).unwrap();
        fig2.sort();
        got.sort();
        assert_eq!(got, fig2);
    }

    #[test]
    fn enumeration_is_duplicate_free_and_valid() {
        for n in 1..=7 {
            let all = enumerate_trees(n).unwrap();
            let mut sorted = all.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), all.len());
            assert!(all.iter().all(|x| x.validate().is_ok() && x.size() == n));
        }
    }

    #[test]
    fn restricted_examples() {
        assert!(enumerate_restricted_trees(2, 1, true).unwrap().is_empty());
        assert_eq!(enumerate_restricted_trees(5, 3, true).unwrap().len(), 5);
        assert_eq!(enumerate_restricted_trees(5, 1, true).unwrap().len(), 3);
        assert!(enumerate_restricted_trees(3, 0, true).is_err());
        assert_eq!(enumerate_restricted_trees(0, 1, true), Err(Error::EmptyTree));
    }

    #[test]
    fn restricted_is_ordered_subsequence_of_full() {
        for n in 1..=8 {
            let all = enumerate_trees(n).unwrap();
            for cap in 1..=3 {
                for forbid in [false, true] {
                    let expected: Vec<_> = all
                        .iter()
                        .filter(|x| {
                            x.nodes().skip(1).all(|v| v.label <= cap)
                                && (!forbid || x.nodes().all(|v| v.children.len() != 1))
                        })
                        .cloned()
                        .collect();
                    assert_eq!(
                        enumerate_restricted_trees(n, cap, forbid).unwrap(),
                        expected,
                        "n={n} cap={cap} forbid={forbid}"
                    );
                }
            }
        }
    }

    #[test]
    fn stats_examples() {
        let path = t("(1 (1 (1 (1))))");
        let s = tree_stats(&path).unwrap();
        assert_eq!(s.single_child_max_nodes, 3);
        assert!(!s.decomposable);

        let s = tree_stats(&t(FIG3)).unwrap();
        assert_eq!(
            s,
            TreeStats {
                nodes: 11,
                leaves: 6,
                internal_nodes: 5,
                root_label: 4,
                single_child_max_nodes: 2,
                decomposable: true,
            }
        );

        let s = tree_stats(&LabeledTree::leaf()).unwrap();
        assert_eq!((s.nodes, s.leaves, s.single_child_max_nodes), (1, 1, 0));
        assert!(!s.decomposable);
        assert!(tree_stats(&t("(3 (1) (1))")).is_err());
    }

    #[test]
    fn primitive_examples() {
        assert!(is_primitive_tree(&t("(1 (1 (1) (1)))")).unwrap());
        assert!(is_primitive_tree(&t("(3 (1) (1) (1))")).unwrap());
        assert!(!is_primitive_tree(&t(FIG3)).unwrap());
    }

    #[test]
    fn k_face_free_examples() {
        let six = t("(3 (1) (1) (1))");
        assert!(is_k_face_free_tree(&six, 2).unwrap());
        assert!(!is_k_face_free_tree(&six, 4).unwrap());
        assert!(!is_k_face_free_tree(&t("(1 (1 (1) (1)))"), 2).unwrap());
        assert!(is_k_face_free_tree(&six, 5).is_err());
        assert!(is_k_face_free_tree(&six, 1).is_err());
    }

    #[test]
    fn mef_and_only_children_examples() {
        assert!(mef_necessary(&t("(3 (1) (1) (1))")).unwrap());
        assert!(!mef_necessary(&t("(1 (1 (1 (1))))")).unwrap());
        assert!(has_no_only_children(&t("(2 (1) (1))")).unwrap());
        assert!(!has_no_only_children(&t("(1 (1))")).unwrap());
        assert!(!has_no_only_children(&t(FIG3)).unwrap());
    }

    #[test]
    fn only_child_freedom_implies_mef_necessary() {
        for n in 2..=8 {
            for x in enumerate_trees(n).unwrap() {
                if has_no_only_children(&x).unwrap() {
                    assert!(mef_necessary(&x).unwrap(), "{x}");
                }
            }
        }
    }

    #[test]
    fn parse_round_trip_and_errors() {
        for s in ["(1)", "(2 (1) (1))", FIG3] {
            assert_eq!(format_tree(&t(s)), s);
        }
        assert_eq!(format_tree(&t("  ( 2(1)\n(1) ) ")), "(2 (1) (1))");
        assert_eq!(t("(1)"), LabeledTree::leaf());
        assert!(matches!(parse_tree("(2 (1)"), Err(Error::Parse { pos: 6, .. })));
        assert!(matches!(parse_tree("1"), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(parse_tree("( )"), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse_tree("(1) x"), Err(Error::Parse { pos: 4, .. })));
        assert!(matches!(parse_tree("(1 x)"), Err(Error::Parse { pos: 3, .. })));
    }
}
