//! Graphs of functions GF(q) -> GF(q), their classification as permutations
//! or semipermutations, per-point slope profiles, and the pointwise product
//! identities those classes satisfy.

use serde::Serialize;
use thiserror::Error;

use crate::collinear::{build_structure, CollinearStructure};
use crate::field::{Field, FieldElement};
use crate::plane::{Point, PointSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PermGraphError {
    #[error("table has wrong length or out-of-range entries")]
    BadTable,
    #[error("point is not on the graph")]
    PointNotInGraph,
    #[error("operation requires a permutation or semipermutation")]
    WrongKind,
}

/// Classification of a function table. A semipermutation misses exactly one
/// value `b` and doubles exactly one value `a = sigma(z1) = sigma(z2)`,
/// with z1 < z2 in canonical index order.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GraphKind {
    Permutation,
    Semipermutation {
        a: FieldElement,
        b: FieldElement,
        z1: FieldElement,
        z2: FieldElement,
    },
    Other,
}

/// The graph of a function sigma: GF(q) -> GF(q), i.e. the point set
/// {(j, sigma(j))}.
#[derive(Clone)]
pub struct FunctionGraph {
    field: Field,
    table: Vec<FieldElement>,
    kind: GraphKind,
    points: PointSet,
}

/// Build and classify the graph of the given table (one value per element of
/// GF(q) in index order). Kind `Other` is a valid result, not an error.
pub fn classify(field: &Field, table: Vec<FieldElement>) -> FunctionGraph {
    let q = field.q();
    assert_eq!(table.len(), q, "table must have exactly q entries");
    let mut count = vec![0u32; q];
    for &v in &table {
        count[v.index()] += 1;
    }
    let range = count.iter().filter(|&&c| c > 0).count();
    let kind = if range == q {
        GraphKind::Permutation
    } else if range == q - 1 {
        let a_idx = count.iter().position(|&c| c == 2).expect("doubled value");
        let b_idx = count.iter().position(|&c| c == 0).expect("missing value");
        let mut zs = (0..q).filter(|&j| table[j].index() == a_idx);
        let z1 = zs.next().unwrap();
        let z2 = zs.next().unwrap();
        GraphKind::Semipermutation {
            a: field.element(a_idx),
            b: field.element(b_idx),
            z1: field.element(z1),
            z2: field.element(z2),
        }
    } else {
        GraphKind::Other
    };
    let points = PointSet::from_points(
        field,
        table
            .iter()
            .enumerate()
            .map(|(j, &v)| Point::new(field.element(j), v)),
    );
    FunctionGraph {
        field: field.clone(),
        table,
        kind,
        points,
    }
}

/// Classify a table of canonical element indices.
pub fn classify_indices(field: &Field, table: &[usize]) -> Result<FunctionGraph, PermGraphError> {
    if table.len() != field.q() || table.iter().any(|&v| v >= field.q()) {
        return Err(PermGraphError::BadTable);
    }
    Ok(classify(
        field,
        table.iter().map(|&v| field.element(v)).collect(),
    ))
}

/// The permutation sigma(0) = 0, sigma(s) = s^{-1}: the conjecturally
/// extremal construction with (q-1)/2 collinear triples.
pub fn inverse_construction(field: &Field) -> FunctionGraph {
    let table = field
        .elements()
        .map(|s| {
            if s == field.zero() {
                field.zero()
            } else {
                field.inv(s).expect("nonzero")
            }
        })
        .collect();
    classify(field, table)
}

impl FunctionGraph {
    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn kind(&self) -> GraphKind {
        self.kind
    }
    pub fn table(&self) -> &[FieldElement] {
        &self.table
    }
    pub fn table_indices(&self) -> Vec<usize> {
        self.table.iter().map(|v| v.index()).collect()
    }
    pub fn points(&self) -> &PointSet {
        &self.points
    }
    pub fn point(&self, j: FieldElement) -> Point {
        Point::new(j, self.table[j.index()])
    }
    pub fn is_permutation(&self) -> bool {
        self.kind == GraphKind::Permutation
    }

    pub fn structure(&self) -> CollinearStructure {
        build_structure(&self.field, &self.points).expect("graph is nonempty")
    }
}

/// The partition of the nonzero finite slopes at a graph point by how many
/// graph points the corresponding line contains (1, 2, or >= 3).
#[derive(Clone, Debug)]
pub struct SlopeProfile {
    pub at: Point,
    pub m1: Vec<FieldElement>,
    pub m2: Vec<FieldElement>,
    /// Slopes whose line holds >= 3 graph points, with the intersection size.
    pub m3plus: Vec<(FieldElement, usize)>,
}

impl SlopeProfile {
    /// A: the number of slopes whose line holds >= 3 points.
    pub fn a_count(&self) -> usize {
        self.m3plus.len()
    }
    /// B: the number of slopes whose line holds only the point itself.
    pub fn b_count(&self) -> usize {
        self.m1.len()
    }
    pub fn intersection_sizes(&self) -> Vec<usize> {
        self.m3plus.iter().map(|&(_, k)| k).collect()
    }
}

/// Profile of the lines through `x` over the slopes in F_q*.
pub fn slope_profile(g: &FunctionGraph, x: Point) -> Result<SlopeProfile, PermGraphError> {
    if !g.points.contains(x) {
        return Err(PermGraphError::PointNotInGraph);
    }
    let f = &g.field;
    let q = f.q();
    // Count graph points per slope as seen from x; all lines considered pass
    // through x, so the slope determines the line.
    let mut cnt = vec![0usize; q];
    for (j, &v) in g.table.iter().enumerate() {
        let p = Point::new(f.element(j), v);
        if p == x {
            continue;
        }
        if p.x == x.x {
            continue; // vertical: outside F_q*
        }
        let m = f
            .div(f.sub(p.y, x.y), f.sub(p.x, x.x))
            .expect("dx nonzero");
        cnt[m.index()] += 1;
    }
    let mut profile = SlopeProfile {
        at: x,
        m1: Vec::new(),
        m2: Vec::new(),
        m3plus: Vec::new(),
    };
    for m in f.nonzero_elements() {
        match cnt[m.index()] + 1 {
            1 => profile.m1.push(m),
            2 => profile.m2.push(m),
            k => profile.m3plus.push((m, k)),
        }
    }
    Ok(profile)
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityViolation {
    /// P1/P2/P3 for permutations, S1/S2 for semipermutations.
    pub identity: String,
    pub point: [usize; 2],
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub q: u64,
    pub kind: String,
    pub checked_points: usize,
    pub violations: Vec<IdentityViolation>,
}

impl IdentityReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check, pointwise, every product identity the graph's class must satisfy:
///
/// * P1 — no point of a permutation graph is isolated in C;
/// * P2 — at quadruple-free points of a permutation, |M1| = |M3| and
///   prod(M1) = -prod(M3);
/// * P3 — at lonely points of a permutation, the unique empty direction is
///   the negation of the triple's slope;
/// * S1 — at lonely points of a semipermutation away from z1, z2,
///   m_perp = -m (sigma(j)-b)/(sigma(j)-a);
/// * S2 — at a lonely z1 or z2, the two empty directions multiply to
///   m (a-b)/(z2-z1) (sign per which of the two the point is).
///
/// Violations come back as counterexample certificates, never panics.
pub fn verify_point_identities(g: &FunctionGraph) -> Result<IdentityReport, PermGraphError> {
    let f = &g.field;
    let q = f.q();
    let structure = g.structure();
    let mut violations = Vec::new();

    let semi = match g.kind {
        GraphKind::Permutation => None,
        GraphKind::Semipermutation { a, b, z1, z2 } => Some((a, b, z1, z2)),
        GraphKind::Other => return Err(PermGraphError::WrongKind),
    };

    for j in f.elements() {
        let x = g.point(j);
        let pk = structure.point_set().pack(x);
        let triples_here = structure.triples_through(pk);
        let profile = slope_profile(g, x).expect("graph point");

        if semi.is_none() {
            // P1
            if triples_here == 0 {
                violations.push(IdentityViolation {
                    identity: "P1".into(),
                    point: [x.x.index(), x.y.index()],
                    detail: "isolated point in C(graph)".into(),
                });
            }
            // P2: only meaningful when no collinear quadruple passes through x
            if profile.m3plus.iter().all(|&(_, k)| k == 3) {
                let m3: Vec<FieldElement> = profile.m3plus.iter().map(|&(m, _)| m).collect();
                let prod = |els: &[FieldElement]| {
                    els.iter().fold(f.one(), |acc, &m| f.mul(acc, m))
                };
                let lhs = prod(&profile.m1);
                let rhs = f.neg(prod(&m3));
                if profile.m1.len() != m3.len() || lhs != rhs {
                    violations.push(IdentityViolation {
                        identity: "P2".into(),
                        point: [x.x.index(), x.y.index()],
                        detail: format!(
                            "|M1| = {}, |M3| = {}, prod(M1) = {}, -prod(M3) = {}",
                            profile.m1.len(),
                            m3.len(),
                            lhs.index(),
                            rhs.index()
                        ),
                    });
                }
            }
            // P3
            if triples_here == 1 {
                let shape_ok = profile.m3plus.len() == 1
                    && profile.m3plus[0].1 == 3
                    && profile.m1.len() == 1;
                if !shape_ok {
                    violations.push(IdentityViolation {
                        identity: "P3".into(),
                        point: [x.x.index(), x.y.index()],
                        detail: format!(
                            "lonely point with A = {}, B = {}",
                            profile.a_count(),
                            profile.b_count()
                        ),
                    });
                } else {
                    let m_j = profile.m3plus[0].0;
                    let m_perp = profile.m1[0];
                    if m_perp != f.neg(m_j) {
                        violations.push(IdentityViolation {
                            identity: "P3".into(),
                            point: [x.x.index(), x.y.index()],
                            detail: format!(
                                "m_perp = {} but -m = {}",
                                m_perp.index(),
                                f.neg(m_j).index()
                            ),
                        });
                    }
                }
            }
        } else if triples_here == 1 {
            let (a, b, z1, z2) = semi.unwrap();
            if j != z1 && j != z2 {
                // S1
                let shape_ok = profile.m3plus.len() == 1
                    && profile.m3plus[0].1 == 3
                    && profile.m1.len() == 1;
                if !shape_ok {
                    violations.push(IdentityViolation {
                        identity: "S1".into(),
                        point: [x.x.index(), x.y.index()],
                        detail: format!(
                            "lonely point with A = {}, B = {}",
                            profile.a_count(),
                            profile.b_count()
                        ),
                    });
                } else {
                    let m_j = profile.m3plus[0].0;
                    let m_perp = profile.m1[0];
                    let sj = g.table[j.index()];
                    let expected = f.neg(f.mul(
                        m_j,
                        f.div(f.sub(sj, b), f.sub(sj, a)).expect("sigma(j) != a"),
                    ));
                    if m_perp != expected {
                        violations.push(IdentityViolation {
                            identity: "S1".into(),
                            point: [x.x.index(), x.y.index()],
                            detail: format!(
                                "m_perp = {} but expected {}",
                                m_perp.index(),
                                expected.index()
                            ),
                        });
                    }
                }
            } else {
                // S2: lonely z1 or z2
                let shape_ok = profile.m3plus.len() == 1
                    && profile.m3plus[0].1 == 3
                    && profile.m1.len() == 2;
                if !shape_ok {
                    violations.push(IdentityViolation {
                        identity: "S2".into(),
                        point: [x.x.index(), x.y.index()],
                        detail: format!(
                            "lonely z-point with A = {}, B = {}",
                            profile.a_count(),
                            profile.b_count()
                        ),
                    });
                } else {
                    let m_j = profile.m3plus[0].0;
                    let product = f.mul(profile.m1[0], profile.m1[1]);
                    // denominator z2 - z1 at j = z1, z1 - z2 at j = z2
                    let denom = if j == z1 {
                        f.sub(z2, z1)
                    } else {
                        f.sub(z1, z2)
                    };
                    let expected =
                        f.mul(m_j, f.div(f.sub(a, b), denom).expect("z1 != z2"));
                    if product != expected {
                        violations.push(IdentityViolation {
                            identity: "S2".into(),
                            point: [x.x.index(), x.y.index()],
                            detail: format!(
                                "product of empty directions = {} but expected {}",
                                product.index(),
                                expected.index()
                            ),
                        });
                    }
                }
            }
        }
        let _ = q;
    }

    Ok(IdentityReport {
        q: q as u64,
        kind: match g.kind {
            GraphKind::Permutation => "permutation".into(),
            GraphKind::Semipermutation { .. } => "semipermutation".into(),
            GraphKind::Other => unreachable!(),
        },
        checked_points: q,
        violations,
    })
}

/// Uniform random semipermutation table, for sampled verification runs.
pub fn random_semipermutation(field: &Field, rng: &mut impl rand::Rng) -> FunctionGraph {
    use rand::seq::SliceRandom;
    let q = field.q();
    loop {
        let z1 = rng.gen_range(0..q);
        let z2 = rng.gen_range(0..q);
        if z1 == z2 {
            continue;
        }
        let a = rng.gen_range(0..q);
        let b = rng.gen_range(0..q);
        if a == b {
            continue;
        }
        let mut rest: Vec<usize> = (0..q).filter(|&v| v != a && v != b).collect();
        rest.shuffle(rng);
        let mut table = vec![0usize; q];
        let mut it = rest.into_iter();
        for j in 0..q {
            table[j] = if j == z1 || j == z2 {
                a
            } else {
                it.next().unwrap()
            };
        }
        return classify_indices(field, &table).unwrap();
    }
}
