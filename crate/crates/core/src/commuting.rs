//! Sink detection, neck-length distribution, brute-force block extremes and
//! the closed-form almost-sure local-dimension interval for commuting
//! systems.
//!
//! A sink word funnels every characteristic vector to a single one; when
//! that vector has one neighbour, every sink-to-sink block matrix is a
//! scalar, the per-neck extremes are exact rationals from exhaustive path
//! enumeration, and the interval endpoints reduce to expectations over the
//! neck-length law.

use std::collections::HashSet;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::field::FieldScalar;
use crate::netgraph::{CvGraph, GraphError, RatMatrix};
use crate::precision::{to_f64, Ctx};
use crate::rng::{stream, CategoricalSampler};

#[derive(Debug, Error)]
pub enum CommutingError {
    #[error("neck-length cap {cap} leaves residual mass {deficit}")]
    CapTooSmall { cap: usize, deficit: f64 },
    #[error("block path enumeration exceeded budget {budget}")]
    ExplosionGuard { budget: usize },
    #[error("no sink word of length <= {0} found")]
    NoSink(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Serialize)]
pub struct SinkInfo {
    /// letters of the sink word (0-based)
    pub word: Vec<u8>,
    /// the sink characteristic vector's node id
    pub node: usize,
    /// single-neighbour sink: all sink-to-sink blocks are scalars
    pub commuting: bool,
}

/// Per-node child sets under one letter, deduplicated.
fn letter_relation(graph: &CvGraph) -> Vec<Vec<Vec<usize>>> {
    (0..graph.letters)
        .map(|letter| {
            graph
                .edges
                .iter()
                .map(|per_letter| {
                    let mut kids: Vec<usize> =
                        per_letter[letter].iter().map(|e| e.child).collect();
                    kids.sort_unstable();
                    kids.dedup();
                    kids
                })
                .collect()
        })
        .collect()
}

/// Breadth-first search for the shortest sink word: a word whose descendant
/// set from every node is the same singleton. States (descendant-set maps)
/// are deduplicated, so the search also terminates on systems with no sink.
pub fn find_sink(graph: &CvGraph, max_len: usize) -> Option<SinkInfo> {
    let n = graph.node_count();
    let rel = letter_relation(graph);
    let words = |sets: &[Vec<bool>]| -> Option<usize> {
        let mut target = None;
        for set in sets {
            let members: Vec<usize> =
                (0..n).filter(|&i| set[i]).collect();
            if members.len() != 1 {
                return None;
            }
            match target {
                None => target = Some(members[0]),
                Some(t) if t == members[0] => {}
                _ => return None,
            }
        }
        target
    };

    let identity: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i == j).collect())
        .collect();
    let mut frontier: Vec<(Vec<u8>, Vec<Vec<bool>>)> = vec![(Vec::new(), identity)];
    let mut seen: HashSet<Vec<Vec<bool>>> = HashSet::new();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for (word, sets) in &frontier {
            for letter in 0..graph.letters {
                let stepped: Vec<Vec<bool>> = sets
                    .iter()
                    .map(|set| {
                        let mut out = vec![false; n];
                        for i in 0..n {
                            if set[i] {
                                for &k in &rel[letter][i] {
                                    out[k] = true;
                                }
                            }
                        }
                        out
                    })
                    .collect();
                let mut word = word.clone();
                word.push(letter as u8);
                if let Some(node) = words(&stepped) {
                    let commuting = graph.nodes[node].cv.neighbours.len() == 1;
                    return Some(SinkInfo { word, node, commuting });
                }
                if seen.insert(stepped.clone()) {
                    next.push((word, stepped));
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    None
}

/// Prefix automaton of the sink word: `delta[state][letter]`, with state =
/// matched prefix length and the full match `k` absorbing.
fn occurrence_automaton(word: &[u8], letters: usize) -> Vec<Vec<usize>> {
    let k = word.len();
    // failure links
    let mut fail = vec![0usize; k];
    for i in 1..k {
        let mut f = fail[i - 1];
        loop {
            if word[i] == word[f] {
                fail[i] = f + 1;
                break;
            }
            if f == 0 {
                fail[i] = 0;
                break;
            }
            f = fail[f - 1];
        }
    }
    let mut delta = vec![vec![0usize; letters]; k];
    for s in 0..k {
        for a in 0..letters {
            delta[s][a] = if a == word[s] as usize {
                s + 1
            } else if s == 0 {
                0
            } else {
                let mut f = fail[s - 1];
                loop {
                    if a == word[f] as usize {
                        break f + 1;
                    }
                    if f == 0 {
                        break 0;
                    }
                    f = fail[f - 1];
                }
            };
        }
    }
    delta
}

#[derive(Debug, Clone, Serialize)]
pub struct NeckDistribution {
    pub word: Vec<u8>,
    /// P(N1 = n) for n = 1..=cap, exact
    #[serde(with = "crate::field::rational_serde::vec")]
    pub pmf: Vec<BigRational>,
    /// 1 - sum(pmf): mass beyond the cap
    #[serde(with = "crate::field::rational_serde")]
    pub deficit: BigRational,
    /// exact E(N1) from the absorbing chain
    #[serde(with = "crate::field::rational_serde")]
    pub expectation: BigRational,
}

/// Exact first-occurrence law of the sink word under i.i.d. letters:
/// absorbing Markov chain on the prefix automaton. `max_deficit` guards the
/// truncation (pass 1.0 to disable the check).
pub fn neck_distribution(
    theta: &[BigRational],
    sink: &SinkInfo,
    cap: usize,
    max_deficit: f64,
) -> Result<NeckDistribution, CommutingError> {
    let k = sink.word.len();
    let delta = occurrence_automaton(&sink.word, theta.len());
    let mut state_mass = vec![BigRational::zero(); k];
    state_mass[0] = BigRational::one();
    let mut pmf = Vec::with_capacity(cap);
    for _ in 1..=cap {
        let mut next = vec![BigRational::zero(); k];
        let mut absorbed = BigRational::zero();
        for (s, mass) in state_mass.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            for (a, th) in theta.iter().enumerate() {
                let target = delta[s][a];
                let add = mass * th;
                if target == k {
                    absorbed += add;
                } else {
                    next[target] += add;
                }
            }
        }
        pmf.push(absorbed);
        state_mass = next;
    }
    let total: BigRational = pmf.iter().sum();
    let deficit = BigRational::one() - total;
    if to_f64_rational(&deficit) > max_deficit {
        return Err(CommutingError::CapTooSmall {
            cap,
            deficit: to_f64_rational(&deficit),
        });
    }

    // E(N1): solve (I - Q) x = 1 over the transient states, exactly.
    let mut a = vec![vec![BigRational::zero(); k + 1]; k];
    for s in 0..k {
        a[s][s] = BigRational::one();
        for (letter, th) in theta.iter().enumerate() {
            let target = delta[s][letter];
            if target < k {
                a[s][target] -= th;
            }
        }
        a[s][k] = BigRational::one();
    }
    let x = solve_rational(&mut a);
    let expectation = x[0].clone();

    Ok(NeckDistribution { word: sink.word.clone(), pmf, deficit, expectation })
}

fn to_f64_rational(q: &BigRational) -> f64 {
    let n: f64 = q.numer().to_string().parse().unwrap_or(f64::NAN);
    let d: f64 = q.denom().to_string().parse().unwrap_or(f64::NAN);
    n / d
}

/// Gaussian elimination on an augmented k x (k+1) rational system.
fn solve_rational(a: &mut [Vec<BigRational>]) -> Vec<BigRational> {
    let k = a.len();
    for col in 0..k {
        let pivot = (col..k).find(|&r| !a[r][col].is_zero()).expect("singular chain system");
        a.swap(col, pivot);
        let inv = BigRational::one() / a[col][col].clone();
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (c, cell) in row.iter_mut().enumerate() {
                    let sub = &f * &pivot_row[c];
                    *cell -= sub;
                }
            }
        }
    }
    (0..k).map(|r| a[r][k].clone()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockRow {
    pub n: usize,
    /// minimal block over all neck strings and admissible paths
    #[serde(with = "crate::field::rational_serde")]
    pub min: BigRational,
    #[serde(with = "crate::field::rational_serde")]
    pub max: BigRational,
    pub paths: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockExtremes {
    pub rows: Vec<BlockRow>,
    /// scalars (commuting) or sum-norm bounds (non-commuting, labeled)
    pub exact_scalars: bool,
}

/// Exhaustive sink-to-sink block extremes per neck length: enumerate every
/// letter string whose first sink occurrence terminates it, and every
/// admissible path along it. This is the brute-force replacement for the
/// invariant-convex-set certification.
pub fn block_extremes(
    graph: &CvGraph,
    sink: &SinkInfo,
    n_max: usize,
    budget: usize,
) -> Result<BlockExtremes, CommutingError> {
    let delta = occurrence_automaton(&sink.word, graph.letters);
    let k = sink.word.len();
    let mut rows = Vec::with_capacity(n_max);
    let mut paths_used = 0usize;

    // product states: (automaton state, node, matrix from sink)
    struct State {
        auto: usize,
        node: usize,
        prod: RatMatrix,
    }
    let start_dim = graph.nodes[sink.node].cv.neighbours.len();
    let mut identity = RatMatrix::zeros(start_dim, start_dim);
    for i in 0..start_dim {
        identity.data[i * start_dim + i] = BigRational::one();
    }

    for n in 1..=n_max {
        let mut states = vec![State { auto: 0, node: sink.node, prod: identity.clone() }];
        for step in 0..n {
            let final_step = step + 1 == n;
            let mut next = Vec::new();
            for st in &states {
                for letter in 0..graph.letters {
                    let auto = delta[st.auto][letter];
                    // the first occurrence must land exactly at position n
                    if (auto == k) != final_step {
                        continue;
                    }
                    for e in &graph.edges[st.node][letter] {
                        paths_used += 1;
                        if paths_used > budget {
                            return Err(CommutingError::ExplosionGuard { budget });
                        }
                        let prod = mat_mul(&st.prod, &e.matrix);
                        next.push(State { auto, node: e.child, prod });
                    }
                }
            }
            states = next;
        }
        let mut min: Option<BigRational> = None;
        let mut max: Option<BigRational> = None;
        let mut count = 0u64;
        for st in &states {
            debug_assert_eq!(st.node, sink.node, "sink word must land on the sink");
            if sink.commuting {
                debug_assert_eq!(st.prod.data.len(), 1, "commuting blocks must be scalars");
            }
            let value = st.prod.norm_sum();
            count += 1;
            if min.as_ref().is_none_or(|m| value < *m) {
                min = Some(value.clone());
            }
            if max.as_ref().is_none_or(|m| value > *m) {
                max = Some(value);
            }
        }
        let (min, max) = match (min, max) {
            (Some(a), Some(b)) => (a, b),
            _ => (BigRational::zero(), BigRational::zero()),
        };
        rows.push(BlockRow { n, min, max, paths: count });
    }
    Ok(BlockExtremes { rows, exact_scalars: sink.commuting })
}

fn mat_mul(a: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    assert_eq!(a.cols, b.rows);
    let mut out = RatMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let x = a.get(i, k).clone();
            if x.is_zero() {
                continue;
            }
            for j in 0..b.cols {
                let add = &x * b.get(k, j);
                out.data[i * b.cols + j] += add;
            }
        }
    }
    out
}

/// Geometric pattern `B(n) = A * g^n` detected over the enumerated range.
#[derive(Debug, Clone, Serialize)]
pub struct GeometricLaw {
    #[serde(with = "crate::field::rational_serde")]
    pub base: BigRational,
    #[serde(with = "crate::field::rational_serde")]
    pub ratio: BigRational,
}

impl GeometricLaw {
    pub fn symbolic(&self, e_n1: &BigRational, contraction: &BigRational) -> String {
        format!(
            "(log({}) + ({})*log({})) / (({})*log({}))",
            crate::field::format_rational(&self.base),
            crate::field::format_rational(e_n1),
            crate::field::format_rational(&self.ratio),
            crate::field::format_rational(e_n1),
            crate::field::format_rational(contraction),
        )
    }
}

fn detect_geometric(rows: &[BlockRow], pick_min: bool) -> Option<GeometricLaw> {
    if rows.len() < 3 {
        return None;
    }
    let value = |r: &BlockRow| if pick_min { r.min.clone() } else { r.max.clone() };
    let g = value(&rows[1]) / value(&rows[0]);
    for w in rows.windows(2) {
        if value(&w[1]) / value(&w[0]) != g {
            return None;
        }
    }
    let base = value(&rows[0]) / &g;
    Some(GeometricLaw { base, ratio: g })
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalResult {
    pub lo: f64,
    pub hi: f64,
    /// truncation error bounds (zero on the closed-form path)
    pub lo_error: f64,
    pub hi_error: f64,
    #[serde(with = "crate::field::rational_serde")]
    pub expectation_n1: BigRational,
    /// detected geometric laws for the max and min blocks
    pub max_law: Option<GeometricLaw>,
    pub min_law: Option<GeometricLaw>,
    pub lo_symbolic: Option<String>,
    pub hi_symbolic: Option<String>,
    /// false when the system is not commuting and the endpoints are only
    /// norm bounds
    pub exact_endpoints: bool,
}

/// Almost-sure local-dimension interval endpoints:
/// lo = E(log Bmax)/(E(N1) log r), hi = E(log Bmin)/(E(N1) log r).
///
/// When the per-length extremes follow an exact geometric law the
/// expectations collapse to the closed form log(A) + E(N1) log(g); otherwise
/// the series is truncated at the enumerated range with the tail bounded
/// through the per-step column-sum extremes (`step_log_bound`).
pub fn local_dim_interval(
    extremes: &BlockExtremes,
    neck: &NeckDistribution,
    ratio: &FieldScalar,
    step_log_bound: f64,
    ctx: &Ctx,
) -> IntervalResult {
    let ln_r = to_f64(&ratio.ln_big(ctx));
    let e_n1 = &neck.expectation;
    let e_big = ctx.from_rational(e_n1);
    let ln_r_big = ratio.ln_big(ctx);
    let denom = ctx.mul(&e_big, &ln_r_big);

    let max_law = detect_geometric(&extremes.rows, false);
    let min_law = detect_geometric(&extremes.rows, true);

    let closed_form = |law: &GeometricLaw| -> f64 {
        let num = ctx.add(
            &ctx.ln_rational(&law.base),
            &ctx.mul(&e_big, &ctx.ln_rational(&law.ratio)),
        );
        to_f64(&ctx.div(&num, &denom))
    };
    let series = |pick_min: bool| -> (f64, f64) {
        // sum over the enumerated range; bound the rest by
        // step_log_bound * E(N1 * 1{N1 > range})
        let mut acc = ctx.zero();
        let mut weighted_n = BigRational::zero();
        for (row, p) in extremes.rows.iter().zip(&neck.pmf) {
            let b = if pick_min { &row.min } else { &row.max };
            let term = ctx.mul(&ctx.from_rational(p), &ctx.ln_rational(b));
            acc = ctx.add(&acc, &term);
            weighted_n += p * BigRational::from_integer(row.n.into());
        }
        let tail_n = e_n1 - &weighted_n;
        let err = step_log_bound * to_f64_rational(&tail_n).abs()
            / (to_f64_rational(e_n1) * ln_r.abs());
        (to_f64(&ctx.div(&acc, &denom)), err)
    };

    let (lo, lo_error) = match &max_law {
        Some(law) => (closed_form(law), 0.0),
        None => series(false),
    };
    let (hi, hi_error) = match &min_law {
        Some(law) => (closed_form(law), 0.0),
        None => series(true),
    };
    let contraction = rational_of(ratio);
    let lo_symbolic = max_law
        .as_ref()
        .zip(contraction.as_ref())
        .map(|(law, c)| law.symbolic(e_n1, c));
    let hi_symbolic = min_law
        .as_ref()
        .zip(contraction.as_ref())
        .map(|(law, c)| law.symbolic(e_n1, c));
    IntervalResult {
        lo,
        hi,
        lo_error,
        hi_error,
        expectation_n1: e_n1.clone(),
        max_law,
        min_law,
        lo_symbolic,
        hi_symbolic,
        exact_endpoints: extremes.exact_scalars,
    }
}

fn rational_of(x: &FieldScalar) -> Option<BigRational> {
    x.as_rational().cloned()
}

/// Largest per-step |log column sum| over all primitive matrices, used for
/// the truncation tail bound.
pub fn step_log_bound(graph: &CvGraph, ctx: &Ctx) -> f64 {
    let mut bound = 0.0f64;
    for per_node in &graph.edges {
        for per_letter in per_node {
            for e in per_letter {
                for c in e.matrix.col_sums() {
                    if c.is_positive() {
                        let v = to_f64(&ctx.ln_rational(&c)).abs();
                        bound = bound.max(v);
                    }
                }
            }
        }
    }
    bound
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpolationSample {
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
}

/// Simulate paths choosing the minimal block with probability `t` and the
/// maximal with `1 - t`; the estimates sweep the interval monotonically.
pub fn interpolation_check(
    extremes: &BlockExtremes,
    theta: &[BigRational],
    sink: &SinkInfo,
    ratio: &FieldScalar,
    t_grid: &[f64],
    depth: usize,
    trials: usize,
    seed: u64,
    ctx: &Ctx,
) -> Vec<InterpolationSample> {
    let delta = occurrence_automaton(&sink.word, theta.len());
    let k = sink.word.len();
    let sampler = CategoricalSampler::new(theta);
    let ln_r = to_f64(&ratio.ln_big(ctx));
    // per-length logs (extrapolated geometrically beyond the table)
    let min_law = detect_geometric(&extremes.rows, true);
    let max_law = detect_geometric(&extremes.rows, false);
    let log_of = |n: usize, pick_min: bool| -> f64 {
        if n <= extremes.rows.len() {
            let row = &extremes.rows[n - 1];
            to_f64_rational(if pick_min { &row.min } else { &row.max }).ln()
        } else {
            let law = if pick_min { &min_law } else { &max_law };
            match law {
                Some(l) => {
                    to_f64_rational(&l.base).ln() + n as f64 * to_f64_rational(&l.ratio).ln()
                }
                // clamp: reuse the deepest enumerated length
                None => {
                    let row = extremes.rows.last().unwrap();
                    to_f64_rational(if pick_min { &row.min } else { &row.max }).ln()
                }
            }
        }
    };

    t_grid
        .iter()
        .map(|&t| {
            let values: Vec<f64> = (0..trials as u64)
                .map(|trial| {
                    let mut rng = stream(seed, "interpolate", trial);
                    let mut total = 0usize;
                    let mut acc = 0.0f64;
                    let mut auto = 0usize;
                    let mut neck_len = 0usize;
                    while total < depth {
                        let letter = sampler.draw(&mut rng);
                        neck_len += 1;
                        total += 1;
                        auto = delta[auto][letter];
                        if auto == k {
                            let pick_min = rng.random::<f64>() < t;
                            acc += log_of(neck_len, pick_min);
                            auto = 0;
                            neck_len = 0;
                        }
                    }
                    // drop the unfinished tail block
                    let completed = (total - neck_len).max(1);
                    acc / (completed as f64 * ln_r)
                })
                .collect();
            let trials_f = values.len() as f64;
            let mean = values.iter().sum::<f64>() / trials_f;
            let stderr = if values.len() > 1 {
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                    / (trials_f - 1.0);
                (var / trials_f).sqrt()
            } else {
                0.0
            };
            InterpolationSample { t, value: mean, stderr }
        })
        .collect()
}
