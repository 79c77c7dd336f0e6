//! Exact construction of the characteristic-vector graph for
//! equicontractive RIFS: net-interval children with their measure-flow
//! matrices, breadth-first enumeration, the measure recursion, the essential
//! class with its per-letter count matrices, and column pseudo-norm bounds.
//!
//! Geometry convention: a node is the reduced characteristic vector
//! `(l, V)` of a net interval at some level n. Everything is computed in
//! parent-normalized units, where the parent net interval spans `[0, l]`
//! at scale `r^n` and each neighbour offset `a_i` stands for a covering
//! image `[-a_i, -a_i + 1]`. Neighbour tuples are stored in increasing
//! offset order and matrices are indexed accordingly (rows: parent
//! neighbours, columns: child neighbours).

use std::cmp::Ordering;
use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;
use thiserror::Error;

use crate::field::{FieldError, FieldScalar};
use crate::model::{EnvironmentWord, ModelError, Rifs};
use crate::precision::{to_f64, Ctx};
use crate::rng::stream;

pub const DEFAULT_NODE_CAP: usize = 100_000;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("characteristic-vector count exceeded cap {cap}; not finite type up to cap")]
    FiniteTypeBudgetExceeded { cap: usize },
    #[error("not an admissible path: {0}")]
    NotAPath(String),
    #[error("{0} terminal strongly-connected classes found, expected exactly one")]
    MultipleTerminalSccs(usize),
    #[error("finite-type construction requires an equicontractive system")]
    NotEquicontractive,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Reduced characteristic vector: normalized length and neighbour offsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ReducedCv {
    pub length: FieldScalar,
    pub neighbours: Vec<FieldScalar>,
}

impl ReducedCv {
    fn lex_key(&self) -> (Vec<BigRational>, Vec<BigRational>) {
        let mut flat = Vec::new();
        for nb in &self.neighbours {
            flat.extend_from_slice(nb.coeffs());
        }
        (self.length.coeffs().to_vec(), flat)
    }
}

/// Dense rational matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    #[serde(with = "crate::field::rational_serde::vec")]
    pub data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.cols + j]
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: &BigRational) {
        self.data[i * self.cols + j] += v;
    }

    /// Row vector times matrix.
    pub fn row_apply(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![BigRational::zero(); self.cols];
        for (i, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                let cell = self.get(i, j);
                if !cell.is_zero() {
                    out[j] += x * cell;
                }
            }
        }
        out
    }

    /// Sum of all entries.
    pub fn norm_sum(&self) -> BigRational {
        self.data.iter().sum()
    }

    pub fn col_sums(&self) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.cols];
        for i in 0..self.rows {
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.get(i, j);
            }
        }
        out
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data
            .iter()
            .map(|q| {
                let n: f64 = q.numer().to_string().parse().unwrap_or(f64::NAN);
                let d: f64 = q.denom().to_string().parse().unwrap_or(f64::NAN);
                n / d
            })
            .collect()
    }
}

/// One parent-to-child step.
#[derive(Debug, Clone, Serialize)]
pub struct ChildEdge {
    pub cv: ReducedCv,
    /// 1-based ordinal among siblings with the same reduced vector
    pub ordinal: u32,
    pub matrix: RatMatrix,
    /// child interval `[h, h']` in parent-normalized units
    pub span: (FieldScalar, FieldScalar),
}

/// Children of a reduced characteristic vector under one letter, left to
/// right, with their primitive transition matrices.
pub fn children(rifs: &Rifs, cv: &ReducedCv, letter: usize) -> Result<Vec<ChildEdge>, GraphError> {
    children_scan(rifs, cv, letter).map(|(kids, _)| kids)
}

/// Like [`children`], also reporting whether any candidate window between
/// consecutive cut points was left uncovered by every image (a gap window).
fn children_scan(
    rifs: &Rifs,
    cv: &ReducedCv,
    letter: usize,
) -> Result<(Vec<ChildEdge>, bool), GraphError> {
    let ratio = rifs.common_ratio().ok_or(GraphError::NotEquicontractive)?.clone();
    let sys = &rifs.systems()[letter];
    let field = rifs.field();
    let ell = &cv.length;
    let zero = field.zero();

    // sub-images [L, L + r] from every (neighbour, map) pair
    struct Sub {
        parent: usize,
        map: usize,
        left: FieldScalar,
        right: FieldScalar,
    }
    let mut subs = Vec::with_capacity(cv.neighbours.len() * sys.len());
    for (i, a) in cv.neighbours.iter().enumerate() {
        for (k, m) in sys.maps().iter().enumerate() {
            let left = m.translation.sub(a)?;
            let right = left.add(&ratio)?;
            subs.push(Sub { parent: i, map: k, left, right });
        }
    }

    // candidate endpoints inside [0, l]
    let mut cuts: Vec<FieldScalar> = vec![zero.clone(), ell.clone()];
    for s in &subs {
        for e in [&s.left, &s.right] {
            if e.compare(&zero) == Ordering::Greater && e.compare(ell) == Ordering::Less {
                cuts.push(e.clone());
            }
        }
    }
    cuts.sort_by(|a, b| a.compare(b));
    cuts.dedup();

    let mut out = Vec::new();
    let mut saw_gap = false;
    let mut ordinal_count: HashMap<ReducedCv, u32> = HashMap::new();
    for w in cuts.windows(2) {
        let (h, h2) = (&w[0], &w[1]);
        let coverers: Vec<&Sub> = subs
            .iter()
            .filter(|s| {
                s.left.compare(h) != Ordering::Greater && h2.compare(&s.right) != Ordering::Greater
            })
            .collect();
        if coverers.is_empty() {
            saw_gap = true;
            continue; // uncovered gap between images
        }
        let mut offsets: Vec<FieldScalar> = coverers
            .iter()
            .map(|s| h.sub(&s.left).unwrap().div(&ratio).unwrap())
            .collect();
        offsets.sort_by(|a, b| a.compare(b));
        offsets.dedup();
        let length = h2.sub(h)?.div(&ratio)?;
        let child = ReducedCv { length, neighbours: offsets };

        let mut matrix = RatMatrix::zeros(cv.neighbours.len(), child.neighbours.len());
        for s in &coverers {
            let off = h.sub(&s.left)?.div(&ratio)?;
            let u = child.neighbours.iter().position(|o| *o == off).unwrap();
            matrix.add_at(s.parent, u, &sys.probs()[s.map]);
        }
        debug_assert!(matrix.col_sums().iter().all(|c| !c.is_zero()));

        let t = ordinal_count.entry(child.clone()).or_insert(0);
        *t += 1;
        out.push(ChildEdge { cv: child, ordinal: *t, matrix, span: (h.clone(), h2.clone()) });
    }
    Ok((out, saw_gap))
}

#[derive(Debug, Clone, Serialize)]
pub struct CvNode {
    pub cv: ReducedCv,
    /// breadth-first discovery level
    pub level: u32,
    /// witness for reconstruction: (parent id, letter, edge index)
    pub parent: Option<(usize, u8, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphEdge {
    pub child: usize,
    pub ordinal: u32,
    pub matrix: RatMatrix,
    pub span: (FieldScalar, FieldScalar),
}

/// The full characteristic-vector graph. Node 0 is the root `(1, (0))`;
/// ids are canonical: breadth-first level, then lexicographic on the
/// `(l, V)` coefficient vectors.
///
/// Every node has at least one child under at least one letter, but a
/// letter's child list can be empty when the attractor lacks full support:
/// the window then sits inside a gap of every covering image for that
/// continuation, i.e. no environment word with that next letter keeps the
/// interval alive.
#[derive(Debug, Clone, Serialize)]
pub struct CvGraph {
    pub nodes: Vec<CvNode>,
    /// `edges[node][letter]` = ordered child list
    pub edges: Vec<Vec<Vec<GraphEdge>>>,
    pub ratio: FieldScalar,
    pub letters: usize,
    pub cap: usize,
    /// true when some expansion produced an uncovered gap window, i.e. the
    /// attractors do not have full support
    pub has_gap_class: bool,
}

impl CvGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Vector count in the reporting convention: all net-interval classes
    /// plus one catch-all class for the uncovered gap windows when any
    /// exist. Systems with full-support attractors have no gap class, so
    /// both counts coincide there.
    pub fn vector_count(&self) -> usize {
        self.nodes.len() + usize::from(self.has_gap_class)
    }

    pub fn find(&self, cv: &ReducedCv) -> Option<usize> {
        self.nodes.iter().position(|n| n.cv == *cv)
    }

    /// Letters of the witness word from the root to `node`, with the edge
    /// trail (letter, edge index) in root-to-node order.
    pub fn witness_path(&self, node: usize) -> Vec<(usize, u8, usize)> {
        let mut trail = Vec::new();
        let mut cur = node;
        while let Some((parent, letter, edge)) = self.nodes[cur].parent {
            trail.push((parent, letter, edge));
            cur = parent;
        }
        trail.reverse();
        trail
    }
}

/// Breadth-first enumeration of all reduced characteristic vectors.
pub fn enumerate(rifs: &Rifs, cap: usize) -> Result<CvGraph, GraphError> {
    let ratio = rifs.common_ratio().ok_or(GraphError::NotEquicontractive)?.clone();
    let field = rifs.field();
    let letters = rifs.alphabet_len();

    let root = ReducedCv { length: field.one(), neighbours: vec![field.zero()] };
    let mut nodes = vec![CvNode { cv: root.clone(), level: 0, parent: None }];
    let mut index: HashMap<ReducedCv, usize> = HashMap::from([(root, 0usize)]);
    let mut edges: Vec<Vec<Vec<GraphEdge>>> = Vec::new();

    let mut start = 0usize;
    let mut has_gap_class = false;
    while start < nodes.len() {
        let end = nodes.len();
        // expand every node of this level once per letter
        let mut expansions: Vec<Vec<Vec<ChildEdge>>> = Vec::with_capacity(end - start);
        for id in start..end {
            let mut per_letter = Vec::with_capacity(letters);
            for letter in 0..letters {
                let (kids, saw_gap) = children_scan(rifs, &nodes[id].cv, letter)?;
                has_gap_class |= saw_gap;
                per_letter.push(kids);
            }
            expansions.push(per_letter);
        }
        // stage unseen reduced vectors, canonical order within the level
        type Key = (Vec<BigRational>, Vec<BigRational>);
        let mut staged: std::collections::BTreeMap<Key, (ReducedCv, (usize, u8, usize))> =
            std::collections::BTreeMap::new();
        for (off, per_letter) in expansions.iter().enumerate() {
            let id = start + off;
            for (letter, kids) in per_letter.iter().enumerate() {
                for (edge_idx, kid) in kids.iter().enumerate() {
                    if !index.contains_key(&kid.cv) {
                        staged
                            .entry(kid.cv.lex_key())
                            .or_insert_with(|| (kid.cv.clone(), (id, letter as u8, edge_idx)));
                    }
                }
            }
        }
        for (_, (cv, parent)) in staged {
            let id = nodes.len();
            if id >= cap {
                return Err(GraphError::FiniteTypeBudgetExceeded { cap });
            }
            index.insert(cv.clone(), id);
            nodes.push(CvNode {
                cv,
                level: nodes[parent.0].level + 1,
                parent: Some(parent),
            });
        }
        // record edges now that every child has an id
        for per_letter in expansions {
            let node_edges = per_letter
                .into_iter()
                .map(|kids| {
                    kids.into_iter()
                        .map(|k| GraphEdge {
                            child: index[&k.cv],
                            ordinal: k.ordinal,
                            matrix: k.matrix,
                            span: k.span,
                        })
                        .collect()
                })
                .collect();
            edges.push(node_edges);
        }
        start = end;
    }

    Ok(CvGraph { nodes, edges, ratio, letters, cap, has_gap_class })
}

/// Sufficient finite-type check: enumerate the single-IFS system pooling all
/// contractions. Success proves the RIFS is finite type; hitting the cap is
/// inconclusive. Returns the pooled vector count.
pub fn finite_type_union_check(rifs: &Rifs, cap: usize) -> Result<usize, GraphError> {
    let pooled = rifs.pooled()?;
    let graph = enumerate(&pooled, cap)?;
    Ok(graph.node_count())
}

/// One step of a symbolic path through the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PathStep {
    pub letter: u8,
    pub child: usize,
    pub ordinal: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureVector {
    pub level: usize,
    #[serde(with = "crate::field::rational_serde::vec")]
    pub entries: Vec<BigRational>,
}

impl MeasureVector {
    pub fn norm_sum(&self) -> BigRational {
        self.entries.iter().sum()
    }
}

fn find_edge<'a>(
    graph: &'a CvGraph,
    node: usize,
    step: &PathStep,
) -> Result<&'a GraphEdge, GraphError> {
    graph.edges[node][step.letter as usize]
        .iter()
        .find(|e| e.child == step.child && e.ordinal == step.ordinal)
        .ok_or_else(|| {
            GraphError::NotAPath(format!(
                "node {} has no child {} (ordinal {}) under letter {}",
                node, step.child, step.ordinal, step.letter
            ))
        })
}

/// Exact measure recursion along a path from the root: the row vector of
/// per-neighbour measure contributions at each step.
pub fn measure_vector(
    graph: &CvGraph,
    word: &EnvironmentWord,
    path: &[PathStep],
) -> Result<MeasureVector, GraphError> {
    if path.len() > word.len() {
        return Err(GraphError::NotAPath("path longer than the environment word".into()));
    }
    let mut node = 0usize;
    let mut q = vec![BigRational::from_integer(1.into())];
    for (i, step) in path.iter().enumerate() {
        if word.letters[i] != step.letter {
            return Err(GraphError::NotAPath(format!(
                "letter mismatch at position {i}: word has {}, path has {}",
                word.letters[i], step.letter
            )));
        }
        let edge = find_edge(graph, node, step)?;
        q = edge.matrix.row_apply(&q);
        node = step.child;
    }
    Ok(MeasureVector { level: path.len(), entries: q })
}

/// Actual net interval `[a, b]` reached by a path from the root.
pub fn path_interval(
    graph: &CvGraph,
    path: &[PathStep],
) -> Result<(FieldScalar, FieldScalar), GraphError> {
    let field = graph.ratio.field().clone();
    let mut node = 0usize;
    let mut left = field.zero();
    let mut scale = field.one();
    for step in path {
        let edge = find_edge(graph, node, step)?;
        left = left.add(&scale.mul(&edge.span.0)?)?;
        scale = scale.mul(&graph.ratio)?;
        node = step.child;
    }
    let len = scale.mul(&graph.nodes[node].cv.length)?;
    let right = left.add(&len)?;
    Ok((left, right))
}

/// Independent brute-force oracle for the measure recursion: enumerate all
/// codings along the word whose images cover `[a, b]`, pruning as soon as an
/// image stops covering, and group their weights by neighbour offset.
pub fn covering_weight_oracle(
    rifs: &Rifs,
    word: &EnvironmentWord,
    target: &(FieldScalar, FieldScalar),
    n: usize,
) -> Result<Vec<(FieldScalar, BigRational)>, GraphError> {
    let field = rifs.field();
    let (a, b) = target;
    struct Img {
        left: FieldScalar,
        weight: BigRational,
    }
    let mut scale = field.one();
    let mut active = vec![Img { left: field.zero(), weight: BigRational::from_integer(1.into()) }];
    for i in 0..n {
        let sys = &rifs.systems()[word.letters[i] as usize];
        let next_scale = scale.mul(&sys.maps()[0].ratio)?; // equicontractive
        let mut next = Vec::new();
        for img in &active {
            for (k, m) in sys.maps().iter().enumerate() {
                let left = img.left.add(&scale.mul(&m.translation)?)?;
                let right = left.add(&next_scale)?;
                // keep only images still covering [a, b]
                if left.compare(a) != Ordering::Greater && b.compare(&right) != Ordering::Greater {
                    next.push(Img { left, weight: &img.weight * &sys.probs()[k] });
                }
            }
        }
        active = next;
        scale = next_scale;
    }
    let mut grouped: Vec<(FieldScalar, BigRational)> = Vec::new();
    for img in active {
        let offset = a.sub(&img.left)?.div(&scale)?;
        match grouped.iter_mut().find(|(o, _)| *o == offset) {
            Some((_, w)) => *w += img.weight,
            None => grouped.push((offset, img.weight)),
        }
    }
    grouped.sort_by(|(o1, _), (o2, _)| o1.compare(o2));
    Ok(grouped)
}

/// The essential class: node ids plus the per-letter child count matrices
/// (with ordinal multiplicity).
#[derive(Debug, Clone, Serialize)]
pub struct EssentialClass {
    pub nodes: Vec<usize>,
    /// `count_matrices[letter]` is NxN row-major over `nodes` order
    pub count_matrices: Vec<Vec<u64>>,
}

pub fn essential_class(graph: &CvGraph) -> Result<EssentialClass, GraphError> {
    let n = graph.node_count();
    let mut g = DiGraph::<(), ()>::with_capacity(n, n * 2);
    let idx: Vec<NodeIndex> = (0..n).map(|_| g.add_node(())).collect();
    for (i, per_letter) in graph.edges.iter().enumerate() {
        for kids in per_letter {
            for e in kids {
                g.update_edge(idx[i], idx[e.child], ());
            }
        }
    }
    let sccs = tarjan_scc(&g);
    let mut terminal: Vec<Vec<usize>> = Vec::new();
    for scc in &sccs {
        let members: Vec<usize> = scc.iter().map(|ix| ix.index()).collect();
        let inside = |x: usize| members.contains(&x);
        let closed = members.iter().all(|&m| {
            graph.edges[m]
                .iter()
                .all(|kids| kids.iter().all(|e| inside(e.child)))
        });
        if closed {
            terminal.push(members);
        }
    }
    if terminal.len() != 1 {
        return Err(GraphError::MultipleTerminalSccs(terminal.len()));
    }
    let mut nodes = terminal.pop().unwrap();
    nodes.sort_unstable();
    let pos: HashMap<usize, usize> = nodes.iter().enumerate().map(|(p, &id)| (id, p)).collect();
    let m = nodes.len();
    let mut count_matrices = vec![vec![0u64; m * m]; graph.letters];
    for &id in &nodes {
        for (letter, kids) in graph.edges[id].iter().enumerate() {
            for e in kids {
                let row = pos[&id];
                let col = pos[&e.child];
                count_matrices[letter][row * m + col] += 1;
            }
        }
    }
    Ok(EssentialClass { nodes, count_matrices })
}

/// Column pseudo-norm extremes of a matrix list, with the dimension bounds
/// they imply at contraction ratio `r`.
#[derive(Debug, Clone, Serialize)]
pub struct PseudoNormBounds {
    #[serde(with = "crate::field::rational_serde")]
    pub min_col_sum: BigRational,
    #[serde(with = "crate::field::rational_serde")]
    pub max_col_sum: BigRational,
    pub dim_lower: f64,
    pub dim_upper: f64,
}

pub fn pseudo_norm_bounds(
    matrices: &[RatMatrix],
    ratio: &FieldScalar,
    ctx: &Ctx,
) -> PseudoNormBounds {
    assert!(!matrices.is_empty(), "need at least one matrix");
    let mut min_col: Option<BigRational> = None;
    let mut max_col: Option<BigRational> = None;
    for m in matrices {
        for c in m.col_sums() {
            if min_col.as_ref().is_none_or(|v| c < *v) {
                min_col = Some(c.clone());
            }
            if max_col.as_ref().is_none_or(|v| c > *v) {
                max_col = Some(c);
            }
        }
    }
    let min_col = min_col.unwrap();
    let max_col = max_col.unwrap();
    let ln_r = to_f64(&ratio.ln_big(ctx));
    let dim_lower = to_f64(&ctx.ln_rational(&max_col)) / ln_r;
    let dim_upper = to_f64(&ctx.ln_rational(&min_col)) / ln_r;
    PseudoNormBounds { min_col_sum: min_col, max_col_sum: max_col, dim_lower, dim_upper }
}

/// Expand random codings below each retained vector and look for a cylinder
/// image strictly inside its interior. Returns ids of nodes with no witness
/// found (candidates for the phantom-gap condition).
pub fn validate_liveness(
    graph: &CvGraph,
    rifs: &Rifs,
    depth: usize,
    attempts: usize,
    seed: u64,
) -> Result<Vec<usize>, GraphError> {
    let field = rifs.field();
    let letters = rifs.alphabet_len();
    let mut failures = Vec::new();
    for id in 0..graph.node_count() {
        let trail = graph.witness_path(id);
        let steps: Vec<PathStep> = trail
            .iter()
            .map(|&(node, letter, edge)| {
                let e = &graph.edges[node][letter as usize][edge];
                PathStep { letter, child: e.child, ordinal: e.ordinal }
            })
            .collect();
        let (a, b) = path_interval(graph, &steps)?;
        let level = graph.nodes[id].level as usize;
        let mut scale = field.one();
        for _ in 0..level {
            scale = scale.mul(&graph.ratio)?;
        }
        let mut found = false;
        'attempt: for attempt in 0..attempts {
            let mut rng = stream(seed, "liveness", (id as u64) << 16 | attempt as u64);
            // start from the covering images of the node
            let mut active: Vec<FieldScalar> = graph.nodes[id]
                .cv
                .neighbours
                .iter()
                .map(|off| a.sub(&scale.mul(off).unwrap()).unwrap())
                .collect();
            let mut cur_scale = scale.clone();
            for _ in 0..depth {
                let letter = (rand::Rng::random_range(&mut rng, 0..letters as u32)) as usize;
                let sys = &rifs.systems()[letter];
                let next_scale = cur_scale.mul(&graph.ratio)?;
                let mut next = Vec::new();
                for l in &active {
                    for m in sys.maps() {
                        let left = l.add(&cur_scale.mul(&m.translation)?)?;
                        let right = left.add(&next_scale)?;
                        if left.compare(&b) == Ordering::Less && a.compare(&right) == Ordering::Less
                        {
                            if a.compare(&left) == Ordering::Less
                                && right.compare(&b) == Ordering::Less
                            {
                                found = true;
                                break 'attempt;
                            }
                            if next.len() < 2048 {
                                next.push(left);
                            }
                        }
                    }
                }
                active = next;
                cur_scale = next_scale;
                if active.is_empty() {
                    break;
                }
            }
        }
        if !found {
            failures.push(id);
        }
    }
    Ok(failures)
}
