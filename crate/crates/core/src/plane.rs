//! Points, slopes (PG(1,q)) and lines of the affine plane over GF(q).
//!
//! A line is canonically named by `(slope, key)`: the y-intercept for a
//! finite slope (y = mx + b), the x-coordinate for the vertical direction.
//! This naming is a bijection onto the q(q+1) lines of the plane, so sets of
//! lines deduplicate exactly.

use crate::field::{Field, FieldElement};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlaneError {
    #[error("slope between identical points is undefined")]
    IdenticalPoints,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Point {
    pub x: FieldElement,
    pub y: FieldElement,
}

impl Point {
    pub fn new(x: FieldElement, y: FieldElement) -> Self {
        Point { x, y }
    }
}

/// An element of PG(1,q): one of the q finite slopes or the vertical
/// direction. Canonical index order: finite slopes 0..q-1, then infinity.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Slope {
    Finite(FieldElement),
    Infinity,
}

impl Slope {
    /// Canonical index in `[0, q]`; infinity maps to q.
    pub fn index(self, q: usize) -> usize {
        match self {
            Slope::Finite(m) => m.index(),
            Slope::Infinity => q,
        }
    }

    pub fn from_index(field: &Field, idx: usize) -> Slope {
        if idx == field.q() {
            Slope::Infinity
        } else {
            Slope::Finite(field.element(idx))
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Line {
    pub slope: Slope,
    pub key: FieldElement,
}

/// Slope of the line through two distinct points; symmetric in its arguments.
pub fn slope_between(field: &Field, p1: Point, p2: Point) -> Result<Slope, PlaneError> {
    if p1 == p2 {
        return Err(PlaneError::IdenticalPoints);
    }
    if p1.x == p2.x {
        return Ok(Slope::Infinity);
    }
    let dy = field.sub(p2.y, p1.y);
    let dx = field.sub(p2.x, p1.x);
    Ok(Slope::Finite(field.div(dy, dx).expect("dx nonzero")))
}

/// The canonical line through `base` with the given slope.
pub fn line_through(field: &Field, base: Point, slope: Slope) -> Line {
    let key = match slope {
        Slope::Finite(m) => field.sub(base.y, field.mul(m, base.x)),
        Slope::Infinity => base.x,
    };
    Line { slope, key }
}

pub fn line_contains(field: &Field, line: Line, p: Point) -> bool {
    match line.slope {
        Slope::Finite(m) => p.y == field.add(field.mul(m, p.x), line.key),
        Slope::Infinity => p.x == line.key,
    }
}

/// The q points of a line, in x order (finite slope) or y order (vertical).
pub fn line_points(field: &Field, line: Line) -> Vec<Point> {
    match line.slope {
        Slope::Finite(m) => field
            .elements()
            .map(|x| Point::new(x, field.add(field.mul(m, x), line.key)))
            .collect(),
        Slope::Infinity => field.elements().map(|y| Point::new(line.key, y)).collect(),
    }
}

/// The q pairwise-disjoint lines of a slope, partitioning the plane, in key
/// order.
pub fn lines_of_slope(field: &Field, slope: Slope) -> Vec<Line> {
    field.elements().map(|key| Line { slope, key }).collect()
}

/// All q + 1 slopes in canonical order.
pub fn all_slopes(field: &Field) -> Vec<Slope> {
    let mut v: Vec<Slope> = field.elements().map(Slope::Finite).collect();
    v.push(Slope::Infinity);
    v
}

/// A subset of the q^2 plane points: occupancy bitmask keyed by the packed
/// index x*q + y, with O(1) membership for inner search loops.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PointSet {
    q: usize,
    words: Vec<u64>,
    len: usize,
}

impl PointSet {
    pub fn new(field: &Field) -> Self {
        Self::with_q(field.q())
    }

    pub(crate) fn with_q(q: usize) -> Self {
        PointSet {
            q,
            words: vec![0u64; (q * q + 63) / 64],
            len: 0,
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn pack(&self, p: Point) -> u32 {
        (p.x.index() * self.q + p.y.index()) as u32
    }

    pub fn unpack(&self, field: &Field, packed: u32) -> Point {
        let packed = packed as usize;
        Point::new(field.element(packed / self.q), field.element(packed % self.q))
    }

    pub fn insert(&mut self, p: Point) -> bool {
        self.insert_packed((p.x.index() * self.q + p.y.index()) as u32)
    }

    pub(crate) fn insert_packed(&mut self, packed: u32) -> bool {
        let (w, b) = (packed as usize / 64, packed as usize % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        if fresh {
            self.words[w] |= 1 << b;
            self.len += 1;
        }
        fresh
    }

    pub(crate) fn remove_packed(&mut self, packed: u32) {
        let (w, b) = (packed as usize / 64, packed as usize % 64);
        if self.words[w] & (1 << b) != 0 {
            self.words[w] &= !(1 << b);
            self.len -= 1;
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.contains_packed((p.x.index() * self.q + p.y.index()) as u32)
    }

    pub(crate) fn contains_packed(&self, packed: u32) -> bool {
        self.words[packed as usize / 64] & (1 << (packed as usize % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Packed indices in sorted order.
    pub fn iter_packed(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            let mut rest = bits;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros();
                    rest &= rest - 1;
                    Some((w * 64) as u32 + b)
                }
            })
        })
    }

    pub fn points<'a>(&'a self, field: &'a Field) -> impl Iterator<Item = Point> + 'a {
        self.iter_packed().map(move |i| self.unpack(field, i))
    }

    pub fn from_points(field: &Field, pts: impl IntoIterator<Item = Point>) -> Self {
        let mut s = Self::new(field);
        for p in pts {
            s.insert(p);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    fn pt(f: &Field, x: usize, y: usize) -> Point {
        Point::new(f.element(x), f.element(y))
    }

    #[test]
    fn slope_between_examples() {
        let f7 = make_field(7).unwrap();
        assert_eq!(
            slope_between(&f7, pt(&f7, 1, 2), pt(&f7, 3, 6)).unwrap(),
            Slope::Finite(f7.element(2))
        );
        let f5 = make_field(5).unwrap();
        assert_eq!(
            slope_between(&f5, pt(&f5, 2, 1), pt(&f5, 2, 4)).unwrap(),
            Slope::Infinity
        );
        assert_eq!(
            slope_between(&f5, pt(&f5, 0, 0), pt(&f5, 4, 3)).unwrap(),
            Slope::Finite(f5.element(2))
        );
        assert_eq!(
            slope_between(&f5, pt(&f5, 2, 1), pt(&f5, 2, 1)),
            Err(PlaneError::IdenticalPoints)
        );
        // symmetry
        assert_eq!(
            slope_between(&f7, pt(&f7, 3, 6), pt(&f7, 1, 2)).unwrap(),
            slope_between(&f7, pt(&f7, 1, 2), pt(&f7, 3, 6)).unwrap()
        );
    }

    #[test]
    fn line_through_examples() {
        let f5 = make_field(5).unwrap();
        let l = line_through(&f5, pt(&f5, 0, 0), Slope::Finite(f5.element(2)));
        let pts: Vec<(usize, usize)> = line_points(&f5, l)
            .iter()
            .map(|p| (p.x.index(), p.y.index()))
            .collect();
        assert_eq!(pts, vec![(0, 0), (1, 2), (2, 4), (3, 1), (4, 3)]);

        let f3 = make_field(3).unwrap();
        let v = line_through(&f3, pt(&f3, 2, 1), Slope::Infinity);
        assert_eq!(v.key.index(), 2);
        let pts: Vec<(usize, usize)> = line_points(&f3, v)
            .iter()
            .map(|p| (p.x.index(), p.y.index()))
            .collect();
        assert_eq!(pts, vec![(2, 0), (2, 1), (2, 2)]);

        let f7 = make_field(7).unwrap();
        let h = line_through(&f7, pt(&f7, 1, 1), Slope::Finite(f7.element(0)));
        assert_eq!(h.key.index(), 1);
    }

    #[test]
    fn two_points_determine_one_line() {
        let f = make_field(9).unwrap();
        for p1 in (0..f.q() * f.q()).map(|i| pt(&f, i / f.q(), i % f.q())) {
            for p2 in (0..f.q() * f.q()).map(|i| pt(&f, i / f.q(), i % f.q())) {
                if p1 == p2 {
                    continue;
                }
                let m = slope_between(&f, p1, p2).unwrap();
                let l = line_through(&f, p1, m);
                assert!(line_contains(&f, l, p1) && line_contains(&f, l, p2));
                assert_eq!(line_through(&f, p2, m), l);
            }
        }
    }

    #[test]
    fn parallel_classes_partition_plane() {
        let f = make_field(9).unwrap();
        for slope in all_slopes(&f) {
            let lines = lines_of_slope(&f, slope);
            assert_eq!(lines.len(), f.q());
            let mut seen = PointSet::new(&f);
            for l in &lines {
                for p in line_points(&f, *l) {
                    assert!(seen.insert(p), "overlap at {p:?} for slope {slope:?}");
                }
            }
            assert_eq!(seen.len(), f.q() * f.q());
        }
    }

    #[test]
    fn pointset_roundtrip() {
        let f = make_field(5).unwrap();
        let pts = vec![pt(&f, 0, 0), pt(&f, 3, 2), pt(&f, 4, 4)];
        let s = PointSet::from_points(&f, pts.clone());
        assert_eq!(s.len(), 3);
        for p in &pts {
            assert!(s.contains(*p));
        }
        assert!(!s.contains(pt(&f, 1, 1)));
        let back: Vec<Point> = s.points(&f).collect();
        assert_eq!(back.len(), 3);
        for p in pts {
            assert!(back.contains(&p));
        }
    }
}
