//! Symmetry-reduced exhaustive and sampled searches over permutations and
//! Besicovitch covers, plus the per-graph bound audit.
//!
//! Permutation searches run over the transversal sigma(0) = 0, sigma(1) = 1:
//! every permutation is carried onto exactly one such representative by a
//! y-affine map sigma -> gamma*sigma + delta, and those maps preserve
//! collinearity, triple counts, norms, lonely points and isolated matchings.
//! The reduction factor is therefore exactly q(q-1) and the representative
//! count (q-2)!.
//!
//! Cover searches fix the vertical line's key and the slope-0 line's key to 0
//! via plane translations (reduction factor q^2), leaving q^(q-1) assignments
//! enumerated with a lower-bound prune: a line meets each previously chosen
//! line in at most one point, so the j-th line adds at least q - j + 1 fresh
//! points.
//!
//! Work is sharded by the first free choice and distributed over a rayon
//! pool; shard results merge in shard order, so reports are deterministic
//! regardless of scheduling.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::collinear::{build_structure, Rational};
use crate::field::Field;
use crate::kakeya::{build_cover, theorem_lower_bound, BesicovitchCover};
use crate::permgraph::{classify_indices, FunctionGraph, GraphKind};
use crate::plane::PointSet;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("budget exhausted before any candidate was evaluated")]
    BudgetExceeded,
    #[error("exhaustive mode infeasible for q = {0} under objective {1}")]
    Infeasible(u64, String),
    #[error("asserted property failed: {0}")]
    PropertyViolated(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

#[derive(Clone, Copy, Debug)]
pub enum SearchMode {
    Exhaustive,
    /// Exhaustive intent with a node cap; exceeding it returns the best so
    /// far flagged non-exhaustive.
    Budgeted { max_nodes: u64 },
    /// Seeded random sampling.
    Sampled { samples: u64, seed: u64 },
}

#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(untagged)]
pub enum ReportValue {
    Int(u64),
    Rational(String),
}

pub fn rational_string(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq, PartialOrd, Ord)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Permutation { table: Vec<usize> },
    Cover { keys: Vec<usize> },
}

#[derive(Clone, Debug, Serialize)]
pub struct ShardRecord {
    pub shard: String,
    pub nodes: u64,
}

/// Machine-checkable record that a search visited every orbit
/// representative: the reduction used, the group order, the representative
/// count, and per-shard node counts so a rerun can audit coverage.
#[derive(Clone, Debug, Serialize)]
pub struct ExhaustionCertificate {
    pub reduction: String,
    pub symmetry_group_order: u64,
    pub orbit_representatives: String,
    pub shards: Vec<ShardRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub q: u64,
    pub objective: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minimum: Option<ReportValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maximum: Option<ReportValue>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub statistics: BTreeMap<String, ReportValue>,
    pub witnesses: Vec<Witness>,
    pub witnesses_truncated: bool,
    pub search_space_size: String,
    pub nodes_visited: u64,
    pub exhaustive: bool,
    pub symmetry_group_order: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<ExhaustionCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub wall_time_secs: f64,
}

const MAX_WITNESSES: usize = 64;

fn factorial(n: u64) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

fn pow_big(base: u64, exp: u64) -> BigUint {
    BigUint::from(base).pow(exp as u32)
}

// ---------------------------------------------------------------------------
// Incremental permutation-graph enumeration
// ---------------------------------------------------------------------------

/// Incremental triple/norm bookkeeping for a partial permutation graph.
/// Lines are tracked for the nonzero finite slopes only; slope 0 and the
/// vertical direction never hold two points of a permutation graph.
struct PermState<'a> {
    field: &'a Field,
    q: usize,
    /// Points per line, indexed (m - 1) * q + key for m in 1..q.
    line_count: Vec<u16>,
    triples: u64,
    norm: u64,
}

impl<'a> PermState<'a> {
    fn new(field: &'a Field) -> Self {
        let q = field.q();
        PermState {
            field,
            q,
            line_count: vec![0u16; (q - 1) * q],
            triples: 0,
            norm: 0,
        }
    }

    fn place(&mut self, x: usize, y: usize) {
        let q = self.q;
        for m in 1..q {
            let key = self.field.sub_raw(y, self.field.mul_raw(m, x));
            let c = &mut self.line_count[(m - 1) * q + key];
            let cv = *c as u64;
            self.triples += cv * cv.saturating_sub(1) / 2;
            self.norm += cv.saturating_sub(1);
            *c += 1;
        }
    }

    fn unplace(&mut self, x: usize, y: usize) {
        let q = self.q;
        for m in 1..q {
            let key = self.field.sub_raw(y, self.field.mul_raw(m, x));
            let c = &mut self.line_count[(m - 1) * q + key];
            *c -= 1;
            let cv = *c as u64;
            self.triples -= cv * cv.saturating_sub(1) / 2;
            self.norm -= cv.saturating_sub(1);
        }
    }
}

/// Run `leaf` on every transversal representative (sigma(0) = 0,
/// sigma(1) = 1) with sigma(2) equal to `shard_value`, in lexicographic
/// order. `prune` sees the partial (triples, norm) after each placement and
/// may cut the subtree. Returns the node count.
fn enumerate_shard(
    field: &Field,
    shard_value: usize,
    prune: &mut dyn FnMut(u64, u64) -> bool,
    leaf: &mut dyn FnMut(&[usize], u64, u64),
) -> u64 {
    let q = field.q();
    let mut state = PermState::new(field);
    let mut table = vec![0usize; q];
    let mut used = vec![false; q];
    let mut nodes = 0u64;

    table[0] = 0;
    used[0] = true;
    state.place(0, 0);
    table[1] = 1;
    used[1] = true;
    state.place(1, 1);

    if q == 3 {
        // only sigma(2) = 2 remains
        if shard_value != 2 {
            return 0;
        }
        table[2] = 2;
        state.place(2, 2);
        leaf(&table, state.triples, state.norm);
        return 1;
    }

    if used[shard_value] {
        return 0;
    }
    table[2] = shard_value;
    used[shard_value] = true;
    state.place(2, shard_value);
    nodes += 1;
    if !prune(state.triples, state.norm) {
        rec(
            field,
            3,
            &mut state,
            &mut table,
            &mut used,
            &mut nodes,
            prune,
            leaf,
        );
    }
    return nodes;

    #[allow(clippy::too_many_arguments)]
    fn rec(
        field: &Field,
        depth: usize,
        state: &mut PermState,
        table: &mut [usize],
        used: &mut [bool],
        nodes: &mut u64,
        prune: &mut dyn FnMut(u64, u64) -> bool,
        leaf: &mut dyn FnMut(&[usize], u64, u64),
    ) {
        let q = field.q();
        if depth == q {
            leaf(table, state.triples, state.norm);
            return;
        }
        for y in 0..q {
            if used[y] {
                continue;
            }
            table[depth] = y;
            used[y] = true;
            state.place(depth, y);
            *nodes += 1;
            if !prune(state.triples, state.norm) {
                rec(field, depth + 1, state, table, used, nodes, prune, leaf);
            }
            state.unplace(depth, y);
            used[y] = false;
        }
    }
}

/// Visit every transversal representative without pruning, sequentially.
/// Exposed for property suites that need the full reduced enumeration.
pub fn for_each_permutation_representative(
    field: &Field,
    mut leaf: impl FnMut(&[usize], u64, u64),
) -> u64 {
    let mut nodes = 0;
    for shard in 2..field.q().max(3) {
        nodes += enumerate_shard(field, shard, &mut |_, _| false, &mut |t, tr, n| {
            leaf(t, tr, n)
        });
    }
    nodes
}

/// All q! permutation tables in lexicographic order, for raw (unreduced)
/// exhaustive property checks at small q.
pub fn all_permutation_tables(q: usize) -> Vec<Vec<usize>> {
    assert!(q <= 8, "raw enumeration is for small q only");
    let mut out = Vec::new();
    let mut table = Vec::with_capacity(q);
    let mut used = vec![false; q];
    fn rec(q: usize, table: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if table.len() == q {
            out.push(table.clone());
            return;
        }
        for y in 0..q {
            if !used[y] {
                used[y] = true;
                table.push(y);
                rec(q, table, used, out);
                table.pop();
                used[y] = false;
            }
        }
    }
    rec(q, &mut table, &mut used, &mut out);
    out
}

/// Carry a table onto its transversal representative via the y-affine map
/// sigma -> (sigma - sigma(0)) / (sigma(1) - sigma(0)).
pub fn y_normalize(field: &Field, table: &[usize]) -> Vec<usize> {
    let s0 = table[0];
    let scale = field.inv_raw(field.sub_raw(table[1], s0));
    table
        .iter()
        .map(|&v| field.mul_raw(field.sub_raw(v, s0), scale))
        .collect()
}

fn shard_values(field: &Field) -> Vec<usize> {
    if field.q() == 3 {
        vec![2]
    } else {
        (2..field.q()).collect()
    }
}

fn run_sharded<R, F>(workers: Option<usize>, shards: Vec<usize>, job: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(|| shards.into_par_iter().map(job).collect()),
        None => shards.into_par_iter().map(job).collect(),
    }
}

struct MinAccumulator {
    best: u64,
    witnesses: Vec<Vec<usize>>,
    truncated: bool,
}

impl MinAccumulator {
    fn new() -> Self {
        MinAccumulator {
            best: u64::MAX,
            witnesses: Vec::new(),
            truncated: false,
        }
    }

    fn offer(&mut self, value: u64, table: &[usize]) {
        if value < self.best {
            self.best = value;
            self.witnesses.clear();
            self.truncated = false;
        }
        if value == self.best {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(table.to_vec());
            } else {
                self.truncated = true;
            }
        }
    }

    fn merge(&mut self, other: MinAccumulator) {
        if other.best < self.best {
            *self = other;
        } else if other.best == self.best {
            for w in other.witnesses {
                if self.witnesses.len() < MAX_WITNESSES {
                    self.witnesses.push(w);
                } else {
                    self.truncated = true;
                }
            }
            self.truncated |= other.truncated;
        }
    }
}

/// Minimum collinear-triple count and minimum norm over all permutations of
/// GF(q), with argmin witnesses. Every fully evaluated graph is checked
/// against the (5q-1)/14 norm bound.
pub fn min_triples_over_permutations(
    field: &Field,
    mode: SearchMode,
    workers: Option<usize>,
) -> Result<SearchReport, SearchError> {
    let start = Instant::now();
    let q = field.q();
    let qi = q as u64;
    let norm_floor = Ratio::new(5 * qi as i64 - 1, 14);

    let violation = |table: &[usize], norm: u64| {
        SearchError::PropertyViolated(format!(
            "permutation {table:?} has norm {norm} < (5q-1)/14 = {norm_floor}"
        ))
    };

    match mode {
        SearchMode::Exhaustive | SearchMode::Budgeted { .. } => {
            if q > 13 {
                return Err(SearchError::Infeasible(qi, "min-triples".into()));
            }
            let budget = match mode {
                SearchMode::Budgeted { max_nodes } => Some(max_nodes),
                _ => None,
            };
            let best_triples = AtomicU64::new(u64::MAX);
            let best_norm = AtomicU64::new(u64::MAX);
            let nodes_spent = AtomicU64::new(0);

            struct ShardOut {
                shard: usize,
                nodes: u64,
                triples: MinAccumulator,
                norm: MinAccumulator,
                violation: Option<(Vec<usize>, u64)>,
                truncated_by_budget: bool,
            }

            let results: Vec<ShardOut> = run_sharded(workers, shard_values(field), |shard| {
                let mut acc_t = MinAccumulator::new();
                let mut acc_n = MinAccumulator::new();
                let mut bad = None;
                let mut over_budget = false;
                let nodes = enumerate_shard(
                    field,
                    shard,
                    &mut |t, n| {
                        if let Some(cap) = budget {
                            if nodes_spent.fetch_add(1, Ordering::Relaxed) >= cap {
                                over_budget = true;
                                return true;
                            }
                        }
                        t > best_triples.load(Ordering::Relaxed)
                            && n > best_norm.load(Ordering::Relaxed)
                    },
                    &mut |table, triples, norm| {
                        best_triples.fetch_min(triples, Ordering::Relaxed);
                        best_norm.fetch_min(norm, Ordering::Relaxed);
                        acc_t.offer(triples, table);
                        acc_n.offer(norm, table);
                        if Ratio::from_integer(norm as i64) < norm_floor && bad.is_none() {
                            bad = Some((table.to_vec(), norm));
                        }
                    },
                );
                ShardOut {
                    shard,
                    nodes,
                    triples: acc_t,
                    norm: acc_n,
                    violation: bad,
                    truncated_by_budget: over_budget,
                }
            });

            let mut acc_t = MinAccumulator::new();
            let mut acc_n = MinAccumulator::new();
            let mut shards = Vec::new();
            let mut nodes_total = 0;
            let mut exhausted = true;
            for out in results {
                if let Some((table, norm)) = out.violation {
                    return Err(violation(&table, norm));
                }
                nodes_total += out.nodes;
                exhausted &= !out.truncated_by_budget;
                shards.push(ShardRecord {
                    shard: format!("sigma(2)={}", out.shard),
                    nodes: out.nodes,
                });
                acc_t.merge(out.triples);
                acc_n.merge(out.norm);
            }
            if acc_t.best == u64::MAX {
                return Err(SearchError::BudgetExceeded);
            }
            acc_t.witnesses.sort();
            acc_n.witnesses.sort();

            // witness replay through the collinear module
            for w in &acc_t.witnesses {
                let g = classify_indices(field, w).expect("valid witness");
                if g.structure().triple_count() != acc_t.best {
                    return Err(SearchError::PropertyViolated(format!(
                        "witness {w:?} does not replay to the reported minimum"
                    )));
                }
            }

            let mut stats = BTreeMap::new();
            stats.insert(
                "min_norm".into(),
                ReportValue::Rational(rational_string(Ratio::from_integer(acc_n.best as i64))),
            );
            stats.insert(
                "min_norm_witness_count".into(),
                ReportValue::Int(acc_n.witnesses.len() as u64),
            );
            Ok(SearchReport {
                q: qi,
                objective: "min-triples-permutations".into(),
                minimum: Some(ReportValue::Int(acc_t.best)),
                maximum: None,
                statistics: stats,
                witnesses: acc_t
                    .witnesses
                    .iter()
                    .map(|t| Witness::Permutation { table: t.clone() })
                    .collect(),
                witnesses_truncated: acc_t.truncated,
                search_space_size: factorial(qi).to_string(),
                nodes_visited: nodes_total,
                exhaustive: exhausted,
                symmetry_group_order: qi * (qi - 1),
                certificate: exhausted.then(|| ExhaustionCertificate {
                    reduction: "y-affine transversal sigma(0)=0, sigma(1)=1".into(),
                    symmetry_group_order: qi * (qi - 1),
                    orbit_representatives: factorial(qi.saturating_sub(2)).to_string(),
                    shards,
                }),
                seed: None,
                note: None,
                wall_time_secs: start.elapsed().as_secs_f64(),
            })
        }
        SearchMode::Sampled { samples, seed } => {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut acc_t = MinAccumulator::new();
            let mut acc_n = MinAccumulator::new();
            for _ in 0..samples {
                let mut table: Vec<usize> = (0..q).collect();
                table.shuffle(&mut rng);
                let g = classify_indices(field, &table).expect("permutation");
                let s = g.structure();
                let norm = s.norm().to_integer() as u64;
                if Ratio::from_integer(norm as i64) < norm_floor {
                    return Err(violation(&table, norm));
                }
                acc_t.offer(s.triple_count(), &table);
                acc_n.offer(norm, &table);
            }
            let mut stats = BTreeMap::new();
            stats.insert(
                "min_norm".into(),
                ReportValue::Rational(rational_string(Ratio::from_integer(acc_n.best as i64))),
            );
            Ok(SearchReport {
                q: qi,
                objective: "min-triples-permutations".into(),
                minimum: Some(ReportValue::Int(acc_t.best)),
                maximum: None,
                statistics: stats,
                witnesses: acc_t
                    .witnesses
                    .iter()
                    .map(|t| Witness::Permutation { table: t.clone() })
                    .collect(),
                witnesses_truncated: acc_t.truncated,
                search_space_size: factorial(qi).to_string(),
                nodes_visited: samples,
                exhaustive: false,
                symmetry_group_order: 1,
                certificate: None,
                seed: Some(seed),
                note: None,
                wall_time_secs: start.elapsed().as_secs_f64(),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Besicovitch cover search
// ---------------------------------------------------------------------------

struct CoverState<'a> {
    field: &'a Field,
    q: usize,
    occupied: PointSet,
    size: usize,
    trail: Vec<Vec<u32>>,
}

impl<'a> CoverState<'a> {
    fn new(field: &'a Field) -> Self {
        CoverState {
            field,
            q: field.q(),
            occupied: PointSet::with_q(field.q()),
            size: 0,
            trail: Vec::new(),
        }
    }

    /// Add the line of the given slope index (q for vertical) and key.
    fn push_line(&mut self, slope_idx: usize, key: usize) {
        let q = self.q;
        let mut added = Vec::new();
        if slope_idx == q {
            for y in 0..q {
                let pk = (key * q + y) as u32;
                if self.occupied.insert_packed(pk) {
                    added.push(pk);
                }
            }
        } else {
            for x in 0..q {
                let y = self
                    .field
                    .add_raw(self.field.mul_raw(slope_idx, x), key);
                let pk = (x * q + y) as u32;
                if self.occupied.insert_packed(pk) {
                    added.push(pk);
                }
            }
        }
        self.size += added.len();
        self.trail.push(added);
    }

    fn pop_line(&mut self) {
        let added = self.trail.pop().expect("push before pop");
        self.size -= added.len();
        for pk in added {
            self.occupied.remove_packed(pk);
        }
    }
}

/// Minimum |P| over union-of-chosen-lines covers, exhaustive via translation
/// normalization (vertical key and slope-0 key fixed to 0) with a meet-count
/// lower-bound prune. Every completed cover is checked against the
/// q(q+1)/2 + (5q-1)/14 lower bound.
pub fn min_besicovitch(
    field: &Field,
    mode: SearchMode,
    workers: Option<usize>,
) -> Result<SearchReport, SearchError> {
    let start = Instant::now();
    let q = field.q();
    let qi = q as u64;
    let bound = theorem_lower_bound(qi);

    match mode {
        SearchMode::Exhaustive | SearchMode::Budgeted { .. } => {
            if q > 9 {
                return Err(SearchError::Infeasible(qi, "min-besicovitch".into()));
            }
            let budget = match mode {
                SearchMode::Budgeted { max_nodes } => Some(max_nodes),
                _ => None,
            };
            let best = AtomicU64::new(u64::MAX);
            let nodes_spent = AtomicU64::new(0);

            struct ShardOut {
                shard: usize,
                nodes: u64,
                acc: MinAccumulator,
                violation: Option<Vec<usize>>,
                truncated_by_budget: bool,
            }

            // keys[m] for m in 1..q are free; shard by keys[1]
            let shards: Vec<usize> = if q == 3 { (0..3).collect() } else { (0..q).collect() };
            let results: Vec<ShardOut> = run_sharded(workers, shards, |shard| {
                let mut state = CoverState::new(field);
                state.push_line(q, 0); // vertical, key 0
                state.push_line(0, 0); // slope 0, key 0
                state.push_line(1, shard);
                let mut acc = MinAccumulator::new();
                let mut keys = vec![0usize; q + 1];
                keys[q] = 0;
                keys[0] = 0;
                keys[1] = shard;
                let mut nodes = 1u64;
                let mut bad = None;
                let mut over = false;

                #[allow(clippy::too_many_arguments)]
                fn rec(
                    field: &Field,
                    slope: usize,
                    state: &mut CoverState,
                    keys: &mut [usize],
                    nodes: &mut u64,
                    best: &AtomicU64,
                    acc: &mut MinAccumulator,
                    bound: Rational,
                    bad: &mut Option<Vec<usize>>,
                    budget: Option<u64>,
                    nodes_spent: &AtomicU64,
                    over: &mut bool,
                ) {
                    let q = field.q();
                    if slope == q {
                        let size = state.size as u64;
                        best.fetch_min(size, Ordering::Relaxed);
                        acc.offer(size, keys);
                        if Ratio::from_integer(size as i64) < bound && bad.is_none() {
                            *bad = Some(keys.to_vec());
                        }
                        return;
                    }
                    let placed = state.trail.len();
                    let remaining = (q + 1) - placed;
                    for key in 0..q {
                        if *over {
                            return;
                        }
                        if let Some(cap) = budget {
                            if nodes_spent.fetch_add(1, Ordering::Relaxed) >= cap {
                                *over = true;
                                return;
                            }
                        }
                        keys[slope] = key;
                        state.push_line(slope, key);
                        *nodes += 1;
                        // each future line meets every earlier line at most once
                        let mut lb = state.size;
                        for i in 1..remaining {
                            lb += q.saturating_sub(placed + i);
                        }
                        if (lb as u64) <= best.load(Ordering::Relaxed) {
                            rec(
                                field, slope + 1, state, keys, nodes, best, acc, bound, bad,
                                budget, nodes_spent, over,
                            );
                        }
                        state.pop_line();
                    }
                }

                if q == 3 {
                    // slopes 1 and 2 both free at q = 3; shard covers keys[1]
                    let size_after = state.size;
                    let _ = size_after;
                }
                rec(
                    field,
                    2,
                    &mut state,
                    &mut keys,
                    &mut nodes,
                    &best,
                    &mut acc,
                    bound,
                    &mut bad,
                    budget,
                    &nodes_spent,
                    &mut over,
                );
                ShardOut {
                    shard,
                    nodes,
                    acc,
                    violation: bad,
                    truncated_by_budget: over,
                }
            });

            let mut acc = MinAccumulator::new();
            let mut shards_rec = Vec::new();
            let mut nodes_total = 0;
            let mut exhausted = true;
            for out in results {
                if let Some(keys) = out.violation {
                    return Err(SearchError::PropertyViolated(format!(
                        "cover {keys:?} smaller than the q(q+1)/2 + (5q-1)/14 bound"
                    )));
                }
                nodes_total += out.nodes;
                exhausted &= !out.truncated_by_budget;
                shards_rec.push(ShardRecord {
                    shard: format!("key(1)={}", out.shard),
                    nodes: out.nodes,
                });
                acc.merge(out.acc);
            }
            if acc.best == u64::MAX {
                return Err(SearchError::BudgetExceeded);
            }
            acc.witnesses.sort();

            // witness replay through the kakeya module
            for w in &acc.witnesses {
                let cover = build_cover(field, w).expect("valid witness");
                if cover.size() as u64 != acc.best {
                    return Err(SearchError::PropertyViolated(format!(
                        "witness {w:?} does not replay to the reported minimum"
                    )));
                }
            }

            Ok(SearchReport {
                q: qi,
                objective: "min-besicovitch".into(),
                minimum: Some(ReportValue::Int(acc.best)),
                maximum: None,
                statistics: BTreeMap::new(),
                witnesses: acc
                    .witnesses
                    .iter()
                    .map(|k| Witness::Cover { keys: k.clone() })
                    .collect(),
                witnesses_truncated: acc.truncated,
                search_space_size: pow_big(qi, qi + 1).to_string(),
                nodes_visited: nodes_total,
                exhaustive: exhausted,
                symmetry_group_order: qi * qi,
                certificate: exhausted.then(|| ExhaustionCertificate {
                    reduction: "translations fixing vertical key 0 and slope-0 key 0".into(),
                    symmetry_group_order: qi * qi,
                    orbit_representatives: pow_big(qi, qi - 1).to_string(),
                    shards: shards_rec,
                }),
                seed: None,
                note: None,
                wall_time_secs: start.elapsed().as_secs_f64(),
            })
        }
        SearchMode::Sampled { samples, seed } => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut acc = MinAccumulator::new();
            for _ in 0..samples {
                let keys: Vec<usize> = (0..=q).map(|_| rng.gen_range(0..q)).collect();
                let cover = build_cover(field, &keys).expect("valid keys");
                let size = cover.size() as u64;
                if Ratio::from_integer(size as i64) < bound {
                    return Err(SearchError::PropertyViolated(format!(
                        "cover {keys:?} smaller than the q(q+1)/2 + (5q-1)/14 bound"
                    )));
                }
                acc.offer(size, &keys);
            }
            Ok(SearchReport {
                q: qi,
                objective: "min-besicovitch".into(),
                minimum: Some(ReportValue::Int(acc.best)),
                maximum: None,
                statistics: BTreeMap::new(),
                witnesses: acc
                    .witnesses
                    .iter()
                    .map(|k| Witness::Cover { keys: k.clone() })
                    .collect(),
                witnesses_truncated: acc.truncated,
                search_space_size: pow_big(qi, qi + 1).to_string(),
                nodes_visited: samples,
                exhaustive: false,
                symmetry_group_order: 1,
                certificate: None,
                seed: Some(seed),
                note: None,
                wall_time_secs: start.elapsed().as_secs_f64(),
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Structural probes over permutations
// ---------------------------------------------------------------------------

/// Search permutations for an isolated edge in a C(graph) with at least two
/// edges. The single-edge q = 3 hypergraph is reported separately: its edge
/// is trivially isolated.
pub fn isolated_edge_probe(
    field: &Field,
    workers: Option<usize>,
) -> Result<SearchReport, SearchError> {
    let start = Instant::now();
    let q = field.q();
    let qi = q as u64;
    if q > 11 {
        return Err(SearchError::Infeasible(qi, "isolated-edge-probe".into()));
    }

    struct ShardOut {
        shard: usize,
        nodes: u64,
        witnesses: Vec<Vec<usize>>,
        trivial: u64,
    }

    let results: Vec<ShardOut> = run_sharded(workers, shard_values(field), |shard| {
        let mut witnesses = Vec::new();
        let mut trivial = 0u64;
        let nodes = enumerate_shard(field, shard, &mut |_, _| false, &mut |table, triples, _| {
            // a permutation graph with an isolated edge must have a lonely
            // point; lonely points force a single maximal 3-set through them,
            // so only graphs with few triples can qualify — still, check all
            let g = classify_indices(field, table).expect("permutation");
            let s = g.structure();
            if s.isolated_edges().is_empty() {
                return;
            }
            if triples >= 2 {
                if witnesses.len() < MAX_WITNESSES {
                    witnesses.push(table.to_vec());
                }
            } else {
                trivial += 1;
            }
        });
        ShardOut {
            shard,
            nodes,
            witnesses,
            trivial,
        }
    });

    let mut witnesses = Vec::new();
    let mut shards = Vec::new();
    let mut nodes_total = 0;
    let mut trivial_total = 0;
    for out in results {
        nodes_total += out.nodes;
        trivial_total += out.trivial;
        shards.push(ShardRecord {
            shard: format!("sigma(2)={}", out.shard),
            nodes: out.nodes,
        });
        for w in out.witnesses {
            if witnesses.len() < MAX_WITNESSES {
                witnesses.push(w);
            }
        }
    }
    witnesses.sort();

    let mut stats = BTreeMap::new();
    stats.insert(
        "single_edge_hypergraphs_with_isolated_edge".into(),
        ReportValue::Int(trivial_total),
    );
    let found = witnesses.len() as u64;
    Ok(SearchReport {
        q: qi,
        objective: "isolated-edge-probe".into(),
        minimum: None,
        maximum: Some(ReportValue::Int(found)),
        statistics: stats,
        witnesses: witnesses
            .iter()
            .map(|t| Witness::Permutation { table: t.clone() })
            .collect(),
        witnesses_truncated: false,
        search_space_size: factorial(qi).to_string(),
        nodes_visited: nodes_total,
        exhaustive: true,
        symmetry_group_order: qi * (qi - 1),
        certificate: Some(ExhaustionCertificate {
            reduction: "y-affine transversal sigma(0)=0, sigma(1)=1".into(),
            symmetry_group_order: qi * (qi - 1),
            orbit_representatives: factorial(qi.saturating_sub(2)).to_string(),
            shards,
        }),
        seed: None,
        note: Some(if found == 0 {
            "no isolated edge coexists with a second edge at this q".into()
        } else {
            "witness permutations carry an isolated edge alongside other edges".into()
        }),
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Whether an isolated matching of the given size respects the
/// (q - sqrt(q/7))/3 ceiling: 3s < q and 7(q - 3s)^2 > q, exactly.
pub fn matching_bound_holds(q: u64, size: u64) -> bool {
    if 3 * size >= q {
        return false;
    }
    let gap = q - 3 * size;
    7 * gap * gap > q
}

/// Maximum isolated-matching size over all permutations, with the
/// (q - sqrt(q/7))/3 bound asserted for every graph (q >= 5; the q = 3
/// single-line case degenerates and is reported, not asserted).
pub fn max_isolated_matching_extremes(
    field: &Field,
    workers: Option<usize>,
) -> Result<SearchReport, SearchError> {
    let start = Instant::now();
    let q = field.q();
    let qi = q as u64;
    if q > 11 {
        return Err(SearchError::Infeasible(qi, "max-isolated-matching".into()));
    }

    struct ShardOut {
        shard: usize,
        nodes: u64,
        max_size: u64,
        witnesses: Vec<Vec<usize>>,
        min_t: u64,
        violation: Option<Vec<usize>>,
    }

    let results: Vec<ShardOut> = run_sharded(workers, shard_values(field), |shard| {
        let mut max_size = 0u64;
        let mut witnesses: Vec<Vec<usize>> = Vec::new();
        let mut min_t = u64::MAX;
        let mut violation = None;
        let nodes = enumerate_shard(field, shard, &mut |_, _| false, &mut |table, _, _| {
            let g = classify_indices(field, table).expect("permutation");
            let m = g.structure().max_isolated_matching();
            let size = m.edges.len() as u64;
            min_t = min_t.min(m.t() as u64);
            if qi >= 5 && !matching_bound_holds(qi, size) && violation.is_none() {
                violation = Some(table.to_vec());
            }
            if size > max_size {
                max_size = size;
                witnesses.clear();
            }
            if size == max_size && witnesses.len() < MAX_WITNESSES {
                witnesses.push(table.to_vec());
            }
        });
        ShardOut {
            shard,
            nodes,
            max_size,
            witnesses,
            min_t,
            violation,
        }
    });

    let mut max_size = 0u64;
    let mut min_t = u64::MAX;
    let mut witnesses: Vec<Vec<usize>> = Vec::new();
    let mut truncated = false;
    let mut shards = Vec::new();
    let mut nodes_total = 0;
    for out in results {
        if let Some(table) = out.violation {
            return Err(SearchError::PropertyViolated(format!(
                "permutation {table:?} exceeds the (q - sqrt(q/7))/3 matching ceiling"
            )));
        }
        nodes_total += out.nodes;
        shards.push(ShardRecord {
            shard: format!("sigma(2)={}", out.shard),
            nodes: out.nodes,
        });
        min_t = min_t.min(out.min_t);
        if out.max_size > max_size {
            max_size = out.max_size;
            witnesses.clear();
            truncated = false;
        }
        if out.max_size == max_size {
            for w in out.witnesses {
                if witnesses.len() < MAX_WITNESSES {
                    witnesses.push(w);
                } else {
                    truncated = true;
                }
            }
        }
    }
    witnesses.sort();

    let mut stats = BTreeMap::new();
    stats.insert("min_t".into(), ReportValue::Int(min_t));
    Ok(SearchReport {
        q: qi,
        objective: "max-isolated-matching".into(),
        minimum: None,
        maximum: Some(ReportValue::Int(max_size)),
        statistics: stats,
        witnesses: witnesses
            .iter()
            .map(|t| Witness::Permutation { table: t.clone() })
            .collect(),
        witnesses_truncated: truncated,
        search_space_size: factorial(qi).to_string(),
        nodes_visited: nodes_total,
        exhaustive: true,
        symmetry_group_order: qi * (qi - 1),
        certificate: Some(ExhaustionCertificate {
            reduction: "y-affine transversal sigma(0)=0, sigma(1)=1".into(),
            symmetry_group_order: qi * (qi - 1),
            orbit_representatives: factorial(qi.saturating_sub(2)).to_string(),
            shards,
        }),
        seed: None,
        note: (qi == 3).then(|| {
            "q = 3 degenerates: the single full-line triple is an isolated matching of size 1, \
             so the ceiling is reported rather than asserted"
                .into()
        }),
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

// ---------------------------------------------------------------------------
// Bound audit
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub q: u64,
    pub kind: String,
    pub checks: Vec<BoundCheck>,
}

impl AuditReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Evaluate the matching/slope-count inequalities and final norm bound for a
/// permutation or semipermutation graph, with the canonical maximum isolated
/// matching. Semipermutation audits require no isolated points in C(graph).
pub fn bound_audit(g: &FunctionGraph) -> Result<AuditReport, SearchError> {
    let f = g.field();
    let q = f.q();
    let qi = q as i64;
    let semi = match g.kind() {
        GraphKind::Permutation => false,
        GraphKind::Semipermutation { .. } => true,
        GraphKind::Other => {
            return Err(SearchError::PreconditionViolated(
                "audit requires a permutation or semipermutation".into(),
            ))
        }
    };
    let structure = g.structure();
    if semi {
        let isolated = g
            .points()
            .iter_packed()
            .any(|pk| structure.triples_through(pk) == 0);
        if isolated {
            return Err(SearchError::PreconditionViolated(
                "semipermutation audit requires no isolated points in C(graph)".into(),
            ));
        }
    }

    let norm = structure.norm();
    let matching = structure.max_isolated_matching();
    let m_size = matching.edges.len() as i64;
    let t = matching.t() as i64;
    let t_in: std::collections::HashSet<u32> = matching.t_points.iter().copied().collect();

    // Per nonzero slope: does some line of that slope meet the graph in
    // exactly one point, that point lying in T? Also count such lines.
    let mut qualifying_slopes = 0i64;
    let mut single_point_t_lines = 0i64;
    let table = g.table_indices();
    for m in 1..q {
        let mut bucket = vec![0u32; q];
        let mut rep = vec![0u32; q];
        for (x, &y) in table.iter().enumerate() {
            let key = f.sub_raw(y, f.mul_raw(m, x));
            bucket[key] += 1;
            rep[key] = (x * q + y) as u32;
        }
        let mut slope_ok = false;
        for key in 0..q {
            if bucket[key] == 1 && t_in.contains(&rep[key]) {
                single_point_t_lines += 1;
                slope_ok = true;
            }
        }
        if slope_ok {
            qualifying_slopes += 1;
        }
    }

    let t_norm = if matching.t_points.is_empty() {
        Ratio::from_integer(0)
    } else {
        let t_set = PointSet::from_points(
            f,
            matching
                .t_points
                .iter()
                .map(|&pk| g.points().unpack(f, pk)),
        );
        build_structure(f, &t_set).expect("nonempty").norm()
    };

    let slack = if semi { 3 } else { 1 };
    let mut checks = Vec::new();
    let slope_rhs = Ratio::from_integer(2 * m_size + t) - norm - Ratio::from_integer(slack);
    checks.push(BoundCheck {
        name: format!("single-point-slopes >= 2|M| + t - norm - {slack}"),
        lhs: rational_string(Ratio::from_integer(qualifying_slopes)),
        rhs: rational_string(slope_rhs),
        holds: Ratio::from_integer(qualifying_slopes) >= slope_rhs,
    });

    let cor_slack = if semi { 2 } else { 0 };
    let cor_rhs = Ratio::new(single_point_t_lines - cor_slack, 3);
    checks.push(BoundCheck {
        name: format!("norm(T) >= (R - {cor_slack})/3 with R single-point lines meeting T"),
        lhs: rational_string(t_norm),
        rhs: rational_string(cor_rhs),
        holds: t_norm >= cor_rhs,
    });

    let final_rhs = if semi {
        Ratio::new(5 * qi - 5, 14)
    } else {
        Ratio::new(5 * qi - 1, 14)
    };
    checks.push(BoundCheck {
        name: if semi {
            "norm(graph) >= (5q-5)/14".into()
        } else {
            "norm(graph) >= (5q-1)/14".into()
        },
        lhs: rational_string(norm),
        rhs: rational_string(final_rhs),
        holds: norm >= final_rhs,
    });

    Ok(AuditReport {
        q: q as u64,
        kind: if semi {
            "semipermutation".into()
        } else {
            "permutation".into()
        },
        checks,
    })
}

/// Audit a cover: incidence identity, the rho = 0 cap, the R >= 2 chain when
/// applicable, and the main lower bound.
pub fn bound_audit_cover(cover: &BesicovitchCover) -> Result<AuditReport, SearchError> {
    let q = cover.field().q() as u64;
    let mut checks = Vec::new();
    let inc = cover
        .incidence_size()
        .map_err(|e| SearchError::PropertyViolated(e.to_string()))?;
    checks.push(BoundCheck {
        name: "|P| = q(q+1)/2 + sum binom(mu-1, 2)".into(),
        lhs: format!("{}/1", inc.direct),
        rhs: format!("{}/1", inc.base + inc.excess),
        holds: true,
    });
    let zeros = cover
        .check_rho_zero()
        .map_err(|e| SearchError::PropertyViolated(e.to_string()))?;
    checks.push(BoundCheck {
        name: "at most one slope with rho = 0".into(),
        lhs: format!("{zeros}/1"),
        rhs: "1/1".into(),
        holds: zeros <= 1,
    });
    if cover.r() >= 2 {
        let ok = cover.r_ge2_bound_audit().is_ok();
        checks.push(BoundCheck {
            name: "|P| >= q(q+1)/2 + 2(q+1)/3 (R >= 2 chain)".into(),
            lhs: format!("{}/1", cover.size()),
            rhs: rational_string(
                Ratio::new((q * (q + 1)) as i64, 2) + Ratio::new(2 * (q as i64 + 1), 3),
            ),
            holds: ok,
        });
    }
    let bound = theorem_lower_bound(q);
    checks.push(BoundCheck {
        name: "|P| >= q(q+1)/2 + 5q/14 - 1/14".into(),
        lhs: format!("{}/1", cover.size()),
        rhs: rational_string(bound),
        holds: Ratio::from_integer(cover.size() as i64) >= bound,
    });
    Ok(AuditReport {
        q,
        kind: "cover".into(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::permgraph::inverse_construction;

    #[test]
    fn transversal_counts() {
        let f = make_field(5).unwrap();
        let mut count = 0u64;
        for_each_permutation_representative(&f, |_, _, _| count += 1);
        assert_eq!(count, 6); // (q-2)!
        let f3 = make_field(3).unwrap();
        let mut count = 0u64;
        for_each_permutation_representative(&f3, |_, _, _| count += 1);
        assert_eq!(count, 1);
    }

    #[test]
    fn incremental_counts_match_structure() {
        let f = make_field(7).unwrap();
        for_each_permutation_representative(&f, |table, triples, norm| {
            let g = classify_indices(&f, table).unwrap();
            let s = g.structure();
            assert_eq!(triples, s.triple_count(), "table {table:?}");
            assert_eq!(norm as i64, s.norm().to_integer(), "table {table:?}");
        });
    }

    #[test]
    fn y_normalization_preserves_invariants() {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for q in [5u64, 7, 9] {
            let f = make_field(q).unwrap();
            for _ in 0..50 {
                let mut table: Vec<usize> = (0..f.q()).collect();
                table.shuffle(&mut rng);
                let rep = y_normalize(&f, &table);
                assert_eq!(rep[0], 0);
                assert_eq!(rep[1], 1);
                let a = classify_indices(&f, &table).unwrap().structure();
                let b = classify_indices(&f, &rep).unwrap().structure();
                assert_eq!(a.triple_count(), b.triple_count());
                assert_eq!(a.norm(), b.norm());
                assert_eq!(a.lonely_points().len(), b.lonely_points().len());
                assert_eq!(
                    a.max_isolated_matching().edges.len(),
                    b.max_isolated_matching().edges.len()
                );
            }
        }
    }

    #[test]
    fn min_triples_small_q_against_brute_force() {
        // q = 3: zero-optimization brute force over all 6 permutations
        let f = make_field(3).unwrap();
        let mut brute_min = u64::MAX;
        let perms = [
            [0usize, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        for p in perms {
            let s = classify_indices(&f, &p).unwrap().structure();
            brute_min = brute_min.min(s.triple_count());
        }
        let report = min_triples_over_permutations(&f, SearchMode::Exhaustive, None).unwrap();
        assert_eq!(report.minimum, Some(ReportValue::Int(brute_min)));
        assert_eq!(report.minimum, Some(ReportValue::Int(1)));
        assert!(report.exhaustive);
    }

    #[test]
    fn min_triples_q5_matches_conjecture_with_inverse_witness() {
        let f = make_field(5).unwrap();
        let report = min_triples_over_permutations(&f, SearchMode::Exhaustive, None).unwrap();
        assert_eq!(report.minimum, Some(ReportValue::Int(2)));
        let inverse = inverse_construction(&f).table_indices();
        assert!(report
            .witnesses
            .contains(&Witness::Permutation { table: inverse }));
    }

    #[test]
    fn min_besicovitch_q3_against_brute_force() {
        let f = make_field(3).unwrap();
        // zero-optimization brute force over all 3^4 = 81 assignments
        let mut brute_min = usize::MAX;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        let cover = build_cover(&f, &[a, b, c, d]).unwrap();
                        brute_min = brute_min.min(cover.size());
                    }
                }
            }
        }
        assert_eq!(brute_min, 7);
        let report = min_besicovitch(&f, SearchMode::Exhaustive, None).unwrap();
        assert_eq!(report.minimum, Some(ReportValue::Int(7)));
        assert!(report.exhaustive);
    }

    #[test]
    fn min_besicovitch_q5() {
        let f = make_field(5).unwrap();
        let report = min_besicovitch(&f, SearchMode::Exhaustive, None).unwrap();
        assert_eq!(report.minimum, Some(ReportValue::Int(17)));
    }

    #[test]
    fn budgeted_mode_flags_non_exhaustive() {
        let f = make_field(7).unwrap();
        let report =
            min_triples_over_permutations(&f, SearchMode::Budgeted { max_nodes: 40 }, Some(1))
                .unwrap();
        assert!(!report.exhaustive);
        assert!(report.certificate.is_none());
    }

    #[test]
    fn sampled_mode_is_seed_deterministic() {
        let f = make_field(11).unwrap();
        let mode = SearchMode::Sampled {
            samples: 200,
            seed: 9,
        };
        let a = min_triples_over_permutations(&f, mode, None).unwrap();
        let b = min_triples_over_permutations(&f, mode, None).unwrap();
        assert_eq!(a.minimum, b.minimum);
        assert_eq!(a.witnesses, b.witnesses);
        assert!(!a.exhaustive);
        assert_eq!(a.seed, Some(9));
    }

    #[test]
    fn worker_count_does_not_change_exhaustive_results() {
        let f = make_field(7).unwrap();
        let one = min_triples_over_permutations(&f, SearchMode::Exhaustive, Some(1)).unwrap();
        let four = min_triples_over_permutations(&f, SearchMode::Exhaustive, Some(4)).unwrap();
        assert_eq!(one.minimum, four.minimum);
        assert_eq!(one.witnesses, four.witnesses);
        assert_eq!(
            serde_json::to_value(&one.certificate).unwrap(),
            serde_json::to_value(&four.certificate).unwrap()
        );
    }

    #[test]
    fn isolated_edge_probe_q5() {
        let f = make_field(5).unwrap();
        let report = isolated_edge_probe(&f, None).unwrap();
        assert!(report.exhaustive);
        assert!(report.certificate.is_some());
        // replay any witnesses
        if let Some(ReportValue::Int(n)) = report.maximum {
            assert_eq!(n as usize, report.witnesses.len());
        }
        for w in &report.witnesses {
            if let Witness::Permutation { table } = w {
                let s = classify_indices(&f, table).unwrap().structure();
                assert!(!s.isolated_edges().is_empty());
                assert!(s.triple_count() >= 2);
            }
        }
    }

    #[test]
    fn matching_extremes_q5_and_q7() {
        let f5 = make_field(5).unwrap();
        let r5 = max_isolated_matching_extremes(&f5, None).unwrap();
        // bound (5 - sqrt(5/7))/3 < 2 forces max <= 1
        if let Some(ReportValue::Int(n)) = r5.maximum {
            assert!(n <= 1);
        }
        let f7 = make_field(7).unwrap();
        let r7 = max_isolated_matching_extremes(&f7, None).unwrap();
        if let Some(ReportValue::Int(n)) = r7.maximum {
            assert!(n <= 1); // (7 - 1)/3 = 2 exclusive
        }
    }

    #[test]
    fn matching_bound_arithmetic() {
        // (7 - sqrt(1))/3 = 2: size 2 violates, size 1 passes
        assert!(matching_bound_holds(7, 1));
        assert!(!matching_bound_holds(7, 2));
        assert!(matching_bound_holds(5, 1));
        assert!(!matching_bound_holds(5, 2));
    }

    #[test]
    fn bound_audit_inverse_graph() {
        let f = make_field(7).unwrap();
        let g = inverse_construction(&f);
        let report = bound_audit(&g).unwrap();
        assert!(report.ok(), "{:?}", report.checks);
    }

    #[test]
    fn bound_audit_all_permutations_q5() {
        let f = make_field(5).unwrap();
        for_each_permutation_representative(&f, |table, _, _| {
            let g = classify_indices(&f, table).unwrap();
            let report = bound_audit(&g).unwrap();
            assert!(report.ok(), "table {table:?}: {:?}", report.checks);
        });
    }

    #[test]
    fn bound_audit_semipermutations() {
        use rand::SeedableRng;
        let f = make_field(7).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut audited = 0;
        while audited < 100 {
            let g = crate::permgraph::random_semipermutation(&f, &mut rng);
            match bound_audit(&g) {
                Ok(report) => {
                    audited += 1;
                    assert!(report.ok(), "table {:?}: {:?}", g.table_indices(), report.checks);
                }
                Err(SearchError::PreconditionViolated(_)) => continue,
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn bound_audit_cover_pencil() {
        let f = make_field(5).unwrap();
        let cover = build_cover(&f, &[0; 6]).unwrap();
        let report = bound_audit_cover(&cover).unwrap();
        assert!(report.ok());
    }
}
