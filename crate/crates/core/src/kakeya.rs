//! Besicovitch covers of the plane: one chosen line per slope of PG(1,q),
//! the incidence formula, the excess function rho, the reduction to
//! (semi)permutations by duality, and the parabola-envelope construction.

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::collinear::Rational;
use crate::field::{Field, FieldElement};
use crate::permgraph::{classify, FunctionGraph, GraphKind};
use crate::plane::{line_points, Line, Point, PointSet, Slope};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KakeyaError {
    #[error("assignment must supply one line key per slope (q + 1 entries)")]
    MissingSlope,
    #[error("line key {0} out of range")]
    BadKey(usize),
    #[error("incidence formula mismatch: direct {direct}, formula {formula}")]
    IncidenceMismatch { direct: u64, formula: u64 },
    #[error("{count} slopes have rho = 0 (at most one is possible)")]
    RhoZeroViolation { count: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("dual graph is neither a permutation nor a semipermutation")]
    DegenerateDual,
    #[error("operation requires a permutation or semipermutation")]
    WrongKind,
}

/// A Besicovitch cover in union-of-chosen-lines form: one line per slope,
/// with the multiplicity mu of every covered point and the per-slope excess
/// rho(m) = sum of mu(y) - 2 over points y of the slope-m line with
/// mu(y) >= 3. R is the minimum of rho over all q + 1 slopes.
#[derive(Clone)]
pub struct BesicovitchCover {
    field: Field,
    /// Indexed by canonical slope index; entry i is the chosen line of slope i.
    assignment: Vec<Line>,
    points: PointSet,
    mu: Vec<u8>,
    rho: Vec<u32>,
    r: u32,
}

/// Build a cover from the chosen line key per slope (canonical slope order:
/// finite 0..q-1, then infinity).
pub fn build_cover(field: &Field, keys: &[usize]) -> Result<BesicovitchCover, KakeyaError> {
    let q = field.q();
    if keys.len() != q + 1 {
        return Err(KakeyaError::MissingSlope);
    }
    if let Some(&k) = keys.iter().find(|&&k| k >= q) {
        return Err(KakeyaError::BadKey(k));
    }
    let assignment: Vec<Line> = keys
        .iter()
        .enumerate()
        .map(|(i, &k)| Line {
            slope: Slope::from_index(field, i),
            key: field.element(k),
        })
        .collect();

    let mut mu = vec![0u8; q * q];
    let mut points = PointSet::new(field);
    for line in &assignment {
        for p in line_points(field, *line) {
            points.insert(p);
            mu[p.x.index() * q + p.y.index()] += 1;
        }
    }
    let mut rho = vec![0u32; q + 1];
    for (i, line) in assignment.iter().enumerate() {
        for p in line_points(field, *line) {
            let m = mu[p.x.index() * q + p.y.index()] as u32;
            if m >= 3 {
                rho[i] += m - 2;
            }
        }
    }
    let r = *rho.iter().min().expect("q + 1 slopes");
    Ok(BesicovitchCover {
        field: field.clone(),
        assignment,
        points,
        mu,
        rho,
        r,
    })
}

/// Both sides of the incidence formula: the direct count |P| and
/// q(q+1)/2 + sum of binom(mu(y)-1, 2).
#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct IncidenceDecomposition {
    pub direct: u64,
    pub base: u64,
    pub excess: u64,
}

impl BesicovitchCover {
    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn size(&self) -> usize {
        self.points.len()
    }
    pub fn point_set(&self) -> &PointSet {
        &self.points
    }
    pub fn assignment(&self) -> &[Line] {
        &self.assignment
    }
    pub fn keys(&self) -> Vec<usize> {
        self.assignment.iter().map(|l| l.key.index()).collect()
    }
    pub fn mu(&self, p: Point) -> u32 {
        self.mu[p.x.index() * self.field.q() + p.y.index()] as u32
    }
    pub fn rho(&self) -> &[u32] {
        &self.rho
    }
    pub fn r(&self) -> u32 {
        self.r
    }

    /// Sum of multiplicities; always q(q+1) exactly.
    pub fn total_multiplicity(&self) -> u64 {
        self.mu.iter().map(|&m| m as u64).sum()
    }

    /// Evaluate the incidence formula and assert both sides agree.
    pub fn incidence_size(&self) -> Result<IncidenceDecomposition, KakeyaError> {
        let q = self.field.q() as u64;
        let base = q * (q + 1) / 2;
        let excess: u64 = self
            .mu
            .iter()
            .filter(|&&m| m >= 2)
            .map(|&m| {
                let m = m as u64 - 1;
                m * (m - 1) / 2
            })
            .sum();
        let direct = self.size() as u64;
        let formula = base + excess;
        if direct != formula {
            return Err(KakeyaError::IncidenceMismatch { direct, formula });
        }
        Ok(IncidenceDecomposition {
            direct,
            base,
            excess,
        })
    }

    /// Count slopes with rho = 0, asserted <= 1.
    pub fn check_rho_zero(&self) -> Result<usize, KakeyaError> {
        let count = self.rho.iter().filter(|&&r| r == 0).count();
        if count > 1 {
            return Err(KakeyaError::RhoZeroViolation { count });
        }
        Ok(count)
    }

    /// For covers with R >= 2, audit the chain inequality: |P| is at least
    /// q(q+1)/2 + sum(rho)/3 and at least q(q+1)/2 + 2(q+1)/3.
    pub fn r_ge2_bound_audit(&self) -> Result<(), KakeyaError> {
        if self.r < 2 {
            return Err(KakeyaError::PreconditionViolated(format!(
                "R = {} but the chain inequality needs R >= 2",
                self.r
            )));
        }
        let q = self.field.q() as i64;
        let size = Ratio::from_integer(self.size() as i64);
        let base = Ratio::new(q * (q + 1), 2);
        let rho_sum: i64 = self.rho.iter().map(|&r| r as i64).sum();
        let mid = base + Ratio::new(rho_sum, 3);
        let end = base + Ratio::new(2 * (q + 1), 3);
        if size < mid {
            return Err(KakeyaError::PreconditionViolated(format!(
                "|P| = {size} < q(q+1)/2 + sum(rho)/3 = {mid}"
            )));
        }
        if size < end {
            return Err(KakeyaError::PreconditionViolated(format!(
                "|P| = {size} < q(q+1)/2 + 2(q+1)/3 = {end}"
            )));
        }
        Ok(())
    }

    /// For covers with R in {0, 1}: apply the affine normalization that sends
    /// the rho-minimizing line (smallest canonical slope index among ties) to
    /// the vertical through the origin, then dualize the nonvertical lines
    /// under {y = mx + b} -> (m, b). The result is a permutation graph when
    /// R = 0 and a semipermutation graph when R = 1.
    pub fn normalize_and_dualize(&self) -> Result<(FunctionGraph, u32), KakeyaError> {
        if self.r >= 2 {
            return Err(KakeyaError::PreconditionViolated(format!(
                "R = {} but dualization needs R <= 1",
                self.r
            )));
        }
        let f = &self.field;
        let q = f.q();
        let min_idx = self
            .rho
            .iter()
            .position(|&r| r == self.r)
            .expect("minimum is attained");

        // Transformed lines: table[m] = key of the transformed nonvertical
        // line of slope m.
        let mut table = vec![usize::MAX; q];
        if min_idx == q {
            // Minimizing line is the vertical x = c: translate x by -c.
            let c = self.assignment[q].key;
            for line in &self.assignment[..q] {
                let m = match line.slope {
                    Slope::Finite(m) => m,
                    Slope::Infinity => unreachable!(),
                };
                // y = m(x + c) + b
                let key = f.add(line.key, f.mul(m, c));
                table[m.index()] = key.index();
            }
        } else {
            // Minimizing line is y = m0 x + b0: apply (x, y) -> (y - m0 x - b0, x).
            let m0 = f.element(min_idx);
            let b0 = self.assignment[min_idx].key;
            for (i, line) in self.assignment.iter().enumerate() {
                if i == min_idx {
                    continue;
                }
                match line.slope {
                    Slope::Finite(m) => {
                        // y = mx + b maps to slope 1/(m - m0), key -(b - b0)/(m - m0)
                        let d = f.sub(m, m0);
                        let new_m = f.inv(d).expect("distinct slopes");
                        let new_b = f
                            .div(f.neg(f.sub(line.key, b0)), d)
                            .expect("distinct slopes");
                        table[new_m.index()] = new_b.index();
                    }
                    Slope::Infinity => {
                        // x = c maps to the slope-0 line y = c
                        table[0] = line.key.index();
                    }
                }
            }
        }
        debug_assert!(table.iter().all(|&v| v != usize::MAX));
        let graph = classify(f, table.iter().map(|&v| f.element(v)).collect());
        match (self.r, graph.kind()) {
            (0, GraphKind::Permutation) | (1, GraphKind::Semipermutation { .. }) => {
                Ok((graph, self.r))
            }
            _ => Err(KakeyaError::DegenerateDual),
        }
    }
}

/// Inverse of the dual map: line y = mx + sigma(m) for each finite slope m,
/// plus the vertical line with the given key.
pub fn primalize(
    g: &FunctionGraph,
    vertical_key: FieldElement,
) -> Result<BesicovitchCover, KakeyaError> {
    if matches!(g.kind(), GraphKind::Other) {
        return Err(KakeyaError::WrongKind);
    }
    let mut keys = g.table_indices();
    keys.push(vertical_key.index());
    build_cover(g.field(), &keys)
}

/// Primalize with the vertical key that minimizes |P| (smallest key among
/// ties).
pub fn best_primalize(g: &FunctionGraph) -> Result<(BesicovitchCover, FieldElement), KakeyaError> {
    let f = g.field().clone();
    let mut best: Option<(BesicovitchCover, FieldElement)> = None;
    for key in f.elements() {
        let cover = primalize(g, key)?;
        if best.as_ref().map_or(true, |(b, _)| cover.size() < b.size()) {
            best = Some((cover, key));
        }
    }
    Ok(best.expect("q >= 3 candidate keys"))
}

/// The tangent-envelope construction: the lines y = mx - m^2/4 (tangents of
/// the parabola y = x^2) plus the vertical line whose key minimizes |P|.
/// Its size is q(q+1)/2 + (q-1)/2 for every supported odd q.
pub fn parabola_construction(field: &Field) -> BesicovitchCover {
    let quarter = field
        .inv(field.scalar(4))
        .expect("4 != 0 in odd characteristic");
    let mut keys: Vec<usize> = field
        .elements()
        .map(|m| field.neg(field.mul(field.mul(m, m), quarter)).index())
        .collect();

    // Occupancy of the q tangent lines, to pick the cheapest vertical.
    let mut occupied = PointSet::new(field);
    for (i, &key) in keys.iter().enumerate() {
        let line = Line {
            slope: Slope::Finite(field.element(i)),
            key: field.element(key),
        };
        for p in line_points(field, line) {
            occupied.insert(p);
        }
    }
    let best_key = field
        .elements()
        .min_by_key(|&c| {
            let new_points = field
                .elements()
                .filter(|&y| !occupied.contains(Point::new(c, y)))
                .count();
            (new_points, c.index())
        })
        .expect("q >= 3");
    keys.push(best_key.index());
    build_cover(field, &keys).expect("well-formed assignment")
}

/// The conjectured minimal size q(q+1)/2 + (q-1)/2.
pub fn conjectured_minimum(q: u64) -> u64 {
    q * (q + 1) / 2 + (q - 1) / 2
}

/// The proven lower bound q(q+1)/2 + 5q/14 - 1/14, as an exact rational.
pub fn theorem_lower_bound(q: u64) -> Rational {
    let q = q as i64;
    Ratio::new(q * (q + 1), 2) + Ratio::new(5 * q - 1, 14)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collinear::build_structure;
    use crate::field::make_field;
    use crate::permgraph::{classify_indices, inverse_construction};

    /// All lines through the origin.
    fn pencil(f: &Field) -> BesicovitchCover {
        let mut keys = vec![0usize; f.q() + 1];
        keys.iter_mut().for_each(|k| *k = 0);
        build_cover(f, &keys).unwrap()
    }

    #[test]
    fn pencil_q5() {
        let f = make_field(5).unwrap();
        let c = pencil(&f);
        assert_eq!(c.size(), 25);
        let origin = Point::new(f.element(0), f.element(0));
        assert_eq!(c.mu(origin), 6);
        for p in c.point_set().points(&f) {
            if p != origin {
                assert_eq!(c.mu(p), 1);
            }
        }
        for &r in c.rho() {
            assert_eq!(r, 4); // (q+1) - 2
        }
        let inc = c.incidence_size().unwrap();
        assert_eq!((inc.direct, inc.base, inc.excess), (25, 15, 10));
        assert_eq!(c.check_rho_zero().unwrap(), 0);
        assert_eq!(c.total_multiplicity(), 30);
        c.r_ge2_bound_audit().unwrap();
    }

    #[test]
    fn concurrent_cover_q3() {
        // lines y = j(x + 1), j = 0,1,2, plus the vertical x = 0
        let f = make_field(3).unwrap();
        let c = build_cover(&f, &[0, 1, 2, 0]).unwrap();
        assert_eq!(c.size(), 7);
        let inc = c.incidence_size().unwrap();
        assert_eq!((inc.direct, inc.base, inc.excess), (7, 6, 1));
        assert_eq!(c.check_rho_zero().unwrap(), 1); // only the vertical
        assert_eq!(c.r(), 0);
        assert!(c.r_ge2_bound_audit().is_err());

        let (g, r) = c.normalize_and_dualize().unwrap();
        assert_eq!(r, 0);
        assert!(g.is_permutation());
        let norm = g.structure().norm();
        assert_eq!(norm, Ratio::from_integer(1));
        assert_eq!(c.size() as i64, 6 + norm.to_integer());
    }

    #[test]
    fn bad_assignments_rejected() {
        let f = make_field(5).unwrap();
        assert_eq!(
            build_cover(&f, &[0, 0, 0]).err(),
            Some(KakeyaError::MissingSlope)
        );
        assert_eq!(
            build_cover(&f, &[0, 0, 0, 0, 0, 9]).err(),
            Some(KakeyaError::BadKey(9))
        );
    }

    #[test]
    fn incidence_formula_random_covers() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let f = make_field(7).unwrap();
        for _ in 0..2000 {
            let keys: Vec<usize> = (0..8).map(|_| rng.gen_range(0..7)).collect();
            let c = build_cover(&f, &keys).unwrap();
            c.incidence_size().unwrap();
            assert!(c.check_rho_zero().unwrap() <= 1);
            assert_eq!(c.total_multiplicity(), 56);
            if c.r() >= 2 {
                c.r_ge2_bound_audit().unwrap();
            }
        }
    }

    #[test]
    fn primalize_identity_q3() {
        let f = make_field(3).unwrap();
        let g = classify_indices(&f, &[0, 1, 2]).unwrap();
        let c = primalize(&g, f.element(0)).unwrap();
        assert_eq!(c.size(), 7); // q(q+1)/2 + ||graph|| = 6 + 1
        let c = primalize(&g, f.element(2)).unwrap();
        assert_eq!(c.size(), 9); // vertical through the concurrency point
    }

    #[test]
    fn primalize_inverse_q5_attains_conjectured_minimum() {
        let f = make_field(5).unwrap();
        let g = inverse_construction(&f);
        let (cover, _) = best_primalize(&g).unwrap();
        assert_eq!(cover.size(), 17);
        assert_eq!(conjectured_minimum(5), 17);
    }

    #[test]
    fn dualize_roundtrip_r0() {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let f = make_field(5).unwrap();
        let mut found = 0;
        while found < 50 {
            let mut table: Vec<usize> = (0..5).collect();
            table.shuffle(&mut rng);
            let g = classify_indices(&f, &table).unwrap();
            let key = f.element(rand::Rng::gen_range(&mut rng, 0..5));
            let cover = primalize(&g, key).unwrap();
            if cover.r() != 0 {
                continue;
            }
            found += 1;
            let (dual, r) = cover.normalize_and_dualize().unwrap();
            assert_eq!(r, 0);
            // |P| = q(q+1)/2 + ||dual graph||
            let norm = build_structure(&f, dual.points()).unwrap().norm();
            assert_eq!(cover.size() as i64, 15 + norm.to_integer());
            // round-trip: primalizing the dual at the origin key reproduces
            // the normalized cover, so |P| and the multiset of mu values match
            let back = primalize(&dual, f.element(0)).unwrap();
            assert_eq!(back.size(), cover.size());
            let mus = |c: &BesicovitchCover| {
                let mut v: Vec<u32> = c.point_set().points(&f).map(|p| c.mu(p)).collect();
                v.sort_unstable();
                v
            };
            assert_eq!(mus(&back), mus(&cover));
            // and the best vertical key can never do worse than that
            let (best, _) = best_primalize(&dual).unwrap();
            assert_eq!(best.size(), cover.size());
        }
    }

    #[test]
    fn r1_covers_dualize_to_semipermutations() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let f = make_field(7).unwrap();
        let mut found = 0;
        while found < 20 {
            let keys: Vec<usize> = (0..8).map(|_| rng.gen_range(0..7)).collect();
            let c = build_cover(&f, &keys).unwrap();
            if c.r() != 1 {
                continue;
            }
            found += 1;
            let (g, r) = c.normalize_and_dualize().unwrap();
            assert_eq!(r, 1);
            assert!(matches!(g.kind(), GraphKind::Semipermutation { .. }));
            // |P| = 1 + q(q+1)/2 + ||graph||
            let norm = build_structure(&f, g.points()).unwrap().norm();
            assert_eq!(c.size() as i64, 1 + 28 + norm.to_integer());
        }
    }

    #[test]
    fn high_multiplicity_points_match_collinear_tuples() {
        // for an R = 0 cover, points with mu >= 3 off the vertical correspond
        // to maximal collinear mu-subsets of the dual graph
        use rand::{seq::SliceRandom, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let f = make_field(7).unwrap();
        for _ in 0..50 {
            let mut table: Vec<usize> = (0..7).collect();
            table.shuffle(&mut rng);
            let g = classify_indices(&f, &table).unwrap();
            let (cover, key) = best_primalize(&g).unwrap();
            let structure = g.structure();
            let mut cover_mults: Vec<u32> = cover
                .point_set()
                .points(&f)
                .filter(|p| p.x != key && cover.mu(*p) >= 3)
                .map(|p| cover.mu(p))
                .collect();
            cover_mults.sort_unstable();
            // sets whose slope is -key sit on the chosen vertical in the
            // primal picture, so they are excluded from the off-vertical count
            let excluded = crate::plane::Slope::Finite(f.neg(key));
            let mut graph_mults: Vec<u32> = structure
                .maximal_sets()
                .iter()
                .filter(|ms| ms.size() >= 3 && ms.line.slope != excluded)
                .map(|ms| ms.size() as u32)
                .collect();
            graph_mults.sort_unstable();
            assert_eq!(cover_mults, graph_mults);
        }
    }

    #[test]
    fn parabola_sizes_small_q() {
        for q in [5u64, 7, 9] {
            let f = make_field(q).unwrap();
            let c = parabola_construction(&f);
            assert_eq!(c.size() as u64, conjectured_minimum(q), "q = {q}");
            c.incidence_size().unwrap();
        }
    }
}
