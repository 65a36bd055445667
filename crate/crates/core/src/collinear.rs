//! The collinear-triple hypergraph C(S) and maximal-collinear hypergraph
//! L(S) of a plane point set, together with the exact-rational norms, lonely
//! points, isolated edges and isolated matchings.
//!
//! Maximal collinear sets are computed per line (all q(q+1) of them), not per
//! triple, which is O(q^3) instead of O(q^6) and yields L(S) directly.
//! Size-2 maximal sets are kept — slope profiles need 2-point lines — but
//! contribute 0 to all norms. No floating point anywhere in this module.

use num_rational::Ratio;

use crate::field::Field;
use crate::plane::{Line, Point, PointSet, Slope};
use thiserror::Error;

pub type Rational = Ratio<i64>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CollinearError {
    #[error("point set must be nonempty")]
    EmptySet,
    #[error("point is not in the underlying set")]
    PointNotInSet,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("norm ratio {ratio} below 2/5 for t = {t}")]
    RatioBelowBound { ratio: Rational, t: usize },
}

/// A maximal collinear subset of S (size >= 2), annotated with its line.
#[derive(Clone, Debug)]
pub struct MaximalSet {
    pub line: Line,
    /// Packed point indices, sorted.
    pub points: Vec<u32>,
}

impl MaximalSet {
    pub fn size(&self) -> usize {
        self.points.len()
    }
}

/// An isolated matching M of C(S): pairwise-disjoint triples untouched by
/// every other edge, with T = S \ (union of M).
#[derive(Clone, Debug)]
pub struct IsolatedMatching {
    pub edges: Vec<[u32; 3]>,
    pub t_points: Vec<u32>,
}

impl IsolatedMatching {
    pub fn t(&self) -> usize {
        self.t_points.len()
    }
}

/// C(S) and L(S) for a point set S, with all derived statistics.
pub struct CollinearStructure {
    field: Field,
    points: PointSet,
    maximal_sets: Vec<MaximalSet>,
    triple_count: u64,
    norm: Rational,
    /// Number of triples through each packed point (0 outside S).
    triples_through: Vec<u64>,
    /// Indices into `maximal_sets` through each packed point.
    sets_through: Vec<Vec<u32>>,
}

fn binom2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

fn binom3(n: u64) -> u64 {
    if n < 3 {
        0
    } else {
        n * (n - 1) * (n - 2) / 6
    }
}

/// phi(k) = (k-1)(k-2)/(2k), the per-point share of a maximal k-set's norm.
pub fn phi(k: usize) -> Rational {
    let k = k as i64;
    Ratio::new((k - 1) * (k - 2), 2 * k)
}

/// Build C(S)/L(S) by intersecting S with every line of the plane.
pub fn build_structure(field: &Field, s: &PointSet) -> Result<CollinearStructure, CollinearError> {
    if s.is_empty() {
        return Err(CollinearError::EmptySet);
    }
    let q = field.q();
    let packed: Vec<u32> = s.iter_packed().collect();

    let mut maximal_sets: Vec<MaximalSet> = Vec::new();
    // One parallel class at a time: bucket the points of S by line key.
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); q];
    for slope_idx in 0..=q {
        for b in buckets.iter_mut() {
            b.clear();
        }
        for &pk in &packed {
            let (x, y) = ((pk as usize) / q, (pk as usize) % q);
            let key = if slope_idx == q {
                x
            } else {
                field.sub_raw(y, field.mul_raw(slope_idx, x))
            };
            buckets[key].push(pk);
        }
        for (key, b) in buckets.iter().enumerate() {
            if b.len() >= 2 {
                maximal_sets.push(MaximalSet {
                    line: Line {
                        slope: Slope::from_index(field, slope_idx),
                        key: field.element(key),
                    },
                    points: b.clone(),
                });
            }
        }
    }

    let mut triple_count = 0u64;
    let mut norm = Ratio::from_integer(0i64);
    let mut triples_through = vec![0u64; q * q];
    let mut sets_through = vec![Vec::new(); q * q];
    for (i, ms) in maximal_sets.iter().enumerate() {
        let k = ms.points.len() as u64;
        triple_count += binom3(k);
        norm += Ratio::from_integer(((k - 1) * (k - 2) / 2) as i64);
        for &pk in &ms.points {
            triples_through[pk as usize] += binom2(k - 1);
            sets_through[pk as usize].push(i as u32);
        }
    }

    Ok(CollinearStructure {
        field: field.clone(),
        points: s.clone(),
        maximal_sets,
        triple_count,
        norm,
        triples_through,
        sets_through,
    })
}

impl CollinearStructure {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn point_set(&self) -> &PointSet {
        &self.points
    }

    /// Edges of L(S) restricted to size >= 2, in canonical line order.
    pub fn maximal_sets(&self) -> &[MaximalSet] {
        &self.maximal_sets
    }

    /// |C(S)|.
    pub fn triple_count(&self) -> u64 {
        self.triple_count
    }

    /// ||S|| = sum over maximal sets e of (|e|-1)(|e|-2)/2.
    pub fn norm(&self) -> Rational {
        self.norm
    }

    /// (h, epsilon): the edge count and aggregate edge-size sum over maximal
    /// sets of size >= 3.
    pub fn edge_stats(&self) -> (u64, u64) {
        let mut h = 0;
        let mut eps = 0;
        for ms in &self.maximal_sets {
            if ms.points.len() >= 3 {
                h += 1;
                eps += ms.points.len() as u64;
            }
        }
        (h, eps)
    }

    /// All edges of C(S), derived from the maximal sets, sorted.
    pub fn triples(&self) -> Vec<[u32; 3]> {
        let mut out = Vec::with_capacity(self.triple_count as usize);
        for ms in &self.maximal_sets {
            let pts = &ms.points;
            let n = pts.len();
            for i in 0..n {
                for j in i + 1..n {
                    for l in j + 1..n {
                        out.push([pts[i], pts[j], pts[l]]);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn triples_through(&self, packed: u32) -> u64 {
        self.triples_through[packed as usize]
    }

    /// ||x||: sum of phi(k) over maximal collinear k-sets through x, k >= 3.
    pub fn point_norm(&self, x: Point) -> Result<Rational, CollinearError> {
        if !self.points.contains(x) {
            return Err(CollinearError::PointNotInSet);
        }
        let pk = self.points.pack(x);
        let mut acc = Ratio::from_integer(0i64);
        for &si in &self.sets_through[pk as usize] {
            let k = self.maximal_sets[si as usize].points.len();
            if k >= 3 {
                acc += phi(k);
            }
        }
        Ok(acc)
    }

    /// Points belonging to exactly one collinear triple.
    pub fn lonely_points(&self) -> Vec<u32> {
        self.points
            .iter_packed()
            .filter(|&pk| self.triples_through[pk as usize] == 1)
            .collect()
    }

    /// Edges of C(S) all three of whose points are lonely. Any such edge is a
    /// maximal 3-set, since a triple inside a larger collinear set puts its
    /// points on >= 3 triples.
    pub fn isolated_edges(&self) -> Vec<[u32; 3]> {
        let mut out = Vec::new();
        for ms in &self.maximal_sets {
            if ms.points.len() == 3
                && ms
                    .points
                    .iter()
                    .all(|&pk| self.triples_through[pk as usize] == 1)
            {
                out.push([ms.points[0], ms.points[1], ms.points[2]]);
            }
        }
        out.sort_unstable();
        out
    }

    /// The maximum isolated matching. Isolated edges are pairwise disjoint
    /// and mutually non-intersected, so this is exactly the set of all
    /// isolated edges (reported in lexicographic order).
    pub fn max_isolated_matching(&self) -> IsolatedMatching {
        let edges = self.isolated_edges();
        let mut covered = std::collections::HashSet::new();
        for e in &edges {
            covered.extend(e.iter().copied());
        }
        let t_points = self
            .points
            .iter_packed()
            .filter(|pk| !covered.contains(pk))
            .collect();
        IsolatedMatching { edges, t_points }
    }

    /// Norm-to-size ratio ||S||/|S|, asserted >= 2/5. Precondition: the
    /// hypergraph has no isolated points and no isolated edges.
    pub fn ratio_check(&self) -> Result<Rational, CollinearError> {
        if let Some(&pk) = self
            .points
            .iter_packed()
            .collect::<Vec<_>>()
            .iter()
            .find(|&&pk| self.triples_through[pk as usize] == 0)
        {
            return Err(CollinearError::PreconditionViolated(format!(
                "isolated point at packed index {pk}"
            )));
        }
        if !self.isolated_edges().is_empty() {
            return Err(CollinearError::PreconditionViolated(
                "hypergraph has an isolated edge".into(),
            ));
        }
        let t = self.points.len();
        let ratio = self.norm / Ratio::from_integer(t as i64);
        if ratio < Ratio::new(2, 5) {
            return Err(CollinearError::RatioBelowBound { ratio, t });
        }
        Ok(ratio)
    }
}
