//! Exact arithmetic in GF(q) for odd prime powers q.
//!
//! Elements are canonical indices in `[0, q)`: for q = p the residue itself,
//! for q = p^k the coefficient vector of the representing polynomial written
//! in base p (low coefficient = least significant digit). Index 0 is the
//! additive identity and index 1 the multiplicative identity.
//!
//! Multiplication goes through exp/log tables keyed by a generator of the
//! multiplicative group (smallest index that generates it), so products and
//! inverses are O(1) in the hot search loops. Addition is digit-wise mod p
//! via a precomputed q x q table.

use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("q = {0} is not an odd prime power")]
    NotOddPrimePower(u64),
    #[error("q = {0} is outside the supported range (p^k with p odd, k <= 3, q <= 343)")]
    Unsupported(u64),
    #[error("division by zero in GF({0})")]
    DivisionByZero(usize),
}

/// Fixed moduli for the supported extension fields, low coefficient first.
/// Each is monic and irreducible over GF(p); irreducibility is re-checked at
/// construction by root search (sufficient for degree <= 3).
const MODULI: &[(usize, usize, &[u16])] = &[
    (3, 2, &[1, 0, 1]),    // x^2 + 1
    (5, 2, &[1, 1, 1]),    // x^2 + x + 1
    (7, 2, &[1, 0, 1]),    // x^2 + 1
    (11, 2, &[1, 0, 1]),   // x^2 + 1
    (13, 2, &[2, 0, 1]),   // x^2 + 2
    (17, 2, &[3, 0, 1]),   // x^2 + 3
    (3, 3, &[1, 2, 0, 1]), // x^3 + 2x + 1
    (5, 3, &[1, 1, 0, 1]), // x^3 + x + 1
    (7, 3, &[1, 1, 0, 1]), // x^3 + x + 1
];

const MAX_Q: usize = 343;

static NEXT_FIELD_ID: AtomicU32 = AtomicU32::new(1);

/// An element of a particular GF(q), tagged with its field context so that
/// mixed-field operations are rejected.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct FieldElement {
    idx: u16,
    field_id: u32,
}

impl FieldElement {
    /// Canonical index in `[0, q)`.
    pub fn index(self) -> usize {
        self.idx as usize
    }
}

struct FieldInner {
    id: u32,
    q: usize,
    p: usize,
    k: usize,
    modulus: Vec<u16>,
    add: Vec<u16>, // q*q
    neg: Vec<u16>,
    exp: Vec<u16>, // 2(q-1) entries, exp[i] = g^i
    log: Vec<u16>, // log[a] for a in [1, q)
    generator: u16,
}

/// An odd-prime-power field context. Cheap to clone; all tables are immutable
/// after construction and safe to share among concurrent readers.
#[derive(Clone)]
pub struct Field(Arc<FieldInner>);

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("q", &self.0.q)
            .field("p", &self.0.p)
            .field("k", &self.0.k)
            .finish()
    }
}

fn factor_prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            let mut rest = q;
            let mut k = 0;
            while rest % p == 0 {
                rest /= p;
                k += 1;
            }
            return if rest == 1 { Some((p, k)) } else { None };
        }
        p += 1;
    }
    Some((q, 1))
}

/// Construct GF(q). Rejects even q, q = 1 and non-prime-powers with
/// `NotOddPrimePower`; odd prime powers outside the fixed modulus table
/// (k > 3 or q > 343) are `Unsupported`.
pub fn make_field(q: u64) -> Result<Field, FieldError> {
    let (p, k) = factor_prime_power(q).ok_or(FieldError::NotOddPrimePower(q))?;
    if p == 2 || q < 3 {
        return Err(FieldError::NotOddPrimePower(q));
    }
    if q as usize > MAX_Q || k > 3 {
        return Err(FieldError::Unsupported(q));
    }
    let (p, k, q) = (p as usize, k as usize, q as usize);

    let modulus: Vec<u16> = if k == 1 {
        Vec::new()
    } else {
        MODULI
            .iter()
            .find(|&&(mp, mk, _)| mp == p && mk == k)
            .map(|&(_, _, m)| m.to_vec())
            .ok_or(FieldError::Unsupported(q as u64))?
    };

    // Degree <= 3, so irreducible over GF(p) iff it has no root there.
    if k > 1 {
        for x in 0..p as u64 {
            let mut acc = 0u64;
            for &c in modulus.iter().rev() {
                acc = (acc * x + c as u64) % p as u64;
            }
            assert!(acc != 0, "modulus for GF({q}) has root {x} mod {p}");
        }
    }

    let to_digits = |mut idx: usize| -> Vec<usize> {
        let mut d = vec![0usize; k];
        for slot in d.iter_mut() {
            *slot = idx % p;
            idx /= p;
        }
        d
    };
    let from_digits = |d: &[usize]| -> usize {
        let mut idx = 0;
        for &c in d.iter().rev() {
            idx = idx * p + c;
        }
        idx
    };

    let mut add = vec![0u16; q * q];
    for a in 0..q {
        let da = to_digits(a);
        for b in 0..q {
            let db = to_digits(b);
            let sum: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
            add[a * q + b] = from_digits(&sum) as u16;
        }
    }
    let mut neg = vec![0u16; q];
    for a in 0..q {
        let d: Vec<usize> = to_digits(a).iter().map(|&x| (p - x) % p).collect();
        neg[a] = from_digits(&d) as u16;
    }

    // Bootstrap multiplication as polynomial product reduced mod the modulus.
    let poly_mul = |a: usize, b: usize| -> usize {
        let da = to_digits(a);
        let db = to_digits(b);
        let mut prod = vec![0usize; 2 * k - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        // modulus is monic of degree k
        for deg in (k..prod.len()).rev() {
            let c = prod[deg];
            if c != 0 {
                prod[deg] = 0;
                for (i, &m) in modulus.iter().enumerate().take(k) {
                    let t = &mut prod[deg - k + i];
                    *t = (*t + p * p - (c * m as usize) % p) % p;
                }
            }
        }
        from_digits(&prod[..k])
    };

    // Smallest index generating the multiplicative group.
    let mut generator = 0u16;
    'outer: for g in 2..q {
        let mut x = g;
        let mut order = 1;
        while x != 1 {
            x = poly_mul(x, g);
            order += 1;
            if order > q - 1 {
                continue 'outer;
            }
        }
        if order == q - 1 {
            generator = g as u16;
            break;
        }
    }
    assert!(generator != 0, "no generator found for GF({q})");

    let mut exp = vec![0u16; 2 * (q - 1)];
    let mut log = vec![0u16; q];
    let mut x = 1usize;
    for i in 0..q - 1 {
        exp[i] = x as u16;
        log[x] = i as u16;
        x = poly_mul(x, generator as usize);
    }
    for i in q - 1..2 * (q - 1) {
        exp[i] = exp[i - (q - 1)];
    }

    let id = NEXT_FIELD_ID.fetch_add(1, Ordering::Relaxed);
    Ok(Field(Arc::new(FieldInner {
        id,
        q,
        p,
        k,
        modulus,
        add,
        neg,
        exp,
        log,
        generator,
    })))
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}
impl Eq for Field {}

impl Field {
    pub fn q(&self) -> usize {
        self.0.q
    }
    pub fn p(&self) -> usize {
        self.0.p
    }
    pub fn k(&self) -> usize {
        self.0.k
    }
    /// Coefficient vector of the modulus, low first; empty for prime fields.
    pub fn modulus(&self) -> &[u16] {
        &self.0.modulus
    }
    pub fn generator(&self) -> FieldElement {
        self.element(self.0.generator as usize)
    }

    fn check(&self, a: FieldElement) -> usize {
        assert_eq!(
            a.field_id, self.0.id,
            "mixed-field operation: element of another field context"
        );
        a.idx as usize
    }

    fn wrap(&self, idx: usize) -> FieldElement {
        debug_assert!(idx < self.0.q);
        FieldElement {
            idx: idx as u16,
            field_id: self.0.id,
        }
    }

    /// The element with the given canonical index.
    pub fn element(&self, idx: usize) -> FieldElement {
        assert!(idx < self.0.q, "index {idx} out of range for GF({})", self.0.q);
        self.wrap(idx)
    }

    pub fn zero(&self) -> FieldElement {
        self.wrap(0)
    }
    pub fn one(&self) -> FieldElement {
        self.wrap(1)
    }

    /// Embed an integer via the prime subfield (n mod p).
    pub fn scalar(&self, n: i64) -> FieldElement {
        let p = self.0.p as i64;
        self.wrap(n.rem_euclid(p) as usize)
    }

    /// All q elements in canonical index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.0.q).map(move |i| self.wrap(i))
    }

    /// The q - 1 nonzero elements in canonical index order.
    pub fn nonzero_elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (1..self.0.q).map(move |i| self.wrap(i))
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let (a, b) = (self.check(a), self.check(b));
        self.wrap(self.add_raw(a, b))
    }
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        let a = self.check(a);
        self.wrap(self.neg_raw(a))
    }
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let (a, b) = (self.check(a), self.check(b));
        self.wrap(self.add_raw(a, self.neg_raw(b)))
    }
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let (a, b) = (self.check(a), self.check(b));
        self.wrap(self.mul_raw(a, b))
    }
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        let a = self.check(a);
        if a == 0 {
            return Err(FieldError::DivisionByZero(self.0.q));
        }
        Ok(self.wrap(self.inv_raw(a)))
    }
    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        let (a, b) = (self.check(a), self.check(b));
        if b == 0 {
            return Err(FieldError::DivisionByZero(self.0.q));
        }
        Ok(self.wrap(self.mul_raw(a, self.inv_raw(b))))
    }

    /// Product of all elements of the multiplicative group; -1 for every
    /// supported q (the Wilson-type fact used by the no-isolated-point proof).
    pub fn product_of_nonzero(&self) -> FieldElement {
        let mut acc = 1usize;
        for a in 1..self.0.q {
            acc = self.mul_raw(acc, a);
        }
        self.wrap(acc)
    }

    // Raw index arithmetic for inner loops.
    #[inline]
    pub(crate) fn add_raw(&self, a: usize, b: usize) -> usize {
        self.0.add[a * self.0.q + b] as usize
    }
    #[inline]
    pub(crate) fn neg_raw(&self, a: usize) -> usize {
        self.0.neg[a] as usize
    }
    #[inline]
    pub(crate) fn sub_raw(&self, a: usize, b: usize) -> usize {
        self.add_raw(a, self.neg_raw(b))
    }
    #[inline]
    pub(crate) fn mul_raw(&self, a: usize, b: usize) -> usize {
        if a == 0 || b == 0 {
            0
        } else {
            self.0.exp[self.0.log[a] as usize + self.0.log[b] as usize] as usize
        }
    }
    #[inline]
    pub(crate) fn inv_raw(&self, a: usize) -> usize {
        debug_assert!(a != 0);
        let n = self.0.q - 1;
        self.0.exp[(n - self.0.log[a] as usize) % n] as usize
    }
}

/// The odd prime powers q with p^k, k <= 3, q <= 343 — exactly the values
/// `make_field` accepts.
pub fn supported_q() -> Vec<u64> {
    (3..=MAX_Q as u64)
        .filter(|&q| {
            matches!(factor_prime_power(q), Some((p, k)) if p % 2 == 1 && k <= 3)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_basics() {
        let f = make_field(7).unwrap();
        assert_eq!((f.q(), f.p(), f.k()), (7, 7, 1));
        assert!(f.modulus().is_empty());
    }

    #[test]
    fn gf9_has_expected_modulus() {
        let f = make_field(9).unwrap();
        assert_eq!((f.p(), f.k()), (3, 2));
        assert_eq!(f.modulus(), &[1, 0, 1]); // x^2 + 1
    }

    #[test]
    fn rejects_non_odd_prime_powers() {
        assert_eq!(make_field(8), Err(FieldError::NotOddPrimePower(8)));
        assert_eq!(make_field(1), Err(FieldError::NotOddPrimePower(1)));
        assert_eq!(make_field(15), Err(FieldError::NotOddPrimePower(15)));
        assert_eq!(make_field(2), Err(FieldError::NotOddPrimePower(2)));
        assert_eq!(make_field(243), Err(FieldError::Unsupported(243))); // 3^5
        assert_eq!(make_field(347 * 347), Err(FieldError::Unsupported(347 * 347)));
    }

    #[test]
    fn inversion_examples() {
        let f = make_field(7).unwrap();
        assert_eq!(f.inv(f.element(3)).unwrap(), f.element(5));
        let f5 = make_field(5).unwrap();
        assert_eq!(f5.inv(f5.one()).unwrap(), f5.one());
        // GF(9) with modulus x^2+1: x * (-x) = -x^2 = 1
        let f9 = make_field(9).unwrap();
        let x = f9.element(3); // the polynomial x has digits (0,1), index p = 3
        assert_eq!(f9.inv(x).unwrap(), f9.element(6)); // -x = 2x, index 2p
        assert_eq!(f9.inv(f9.zero()), Err(FieldError::DivisionByZero(9)));
    }

    #[test]
    fn product_of_nonzero_is_minus_one() {
        for q in [3u64, 5, 7, 9, 25, 27, 49] {
            let f = make_field(q).unwrap();
            assert_eq!(f.product_of_nonzero(), f.scalar(-1), "q = {q}");
        }
    }

    #[test]
    fn field_axioms_exhaustive_small_q() {
        for q in [3u64, 5, 7, 9, 25, 27] {
            let f = make_field(q).unwrap();
            let els: Vec<_> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, f.zero()), a);
                assert_eq!(f.mul(a, f.one()), a);
                assert_eq!(f.add(a, f.neg(a)), f.zero());
                if a != f.zero() {
                    let ai = f.inv(a).unwrap();
                    assert_eq!(f.mul(a, ai), f.one());
                    assert_eq!(f.inv(ai).unwrap(), a);
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for &c in &els {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(
                            f.mul(a, f.add(b, c)),
                            f.add(f.mul(a, b), f.mul(a, c))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn square_count_is_half_of_nonzero() {
        for q in [3u64, 5, 7, 9, 11, 25, 27] {
            let f = make_field(q).unwrap();
            let squares: std::collections::HashSet<_> =
                f.nonzero_elements().map(|a| f.mul(a, a)).collect();
            assert_eq!(squares.len(), (f.q() - 1) / 2, "q = {q}");
        }
    }

    #[test]
    fn enumeration_order_is_deterministic() {
        let f1 = make_field(27).unwrap();
        let f2 = make_field(27).unwrap();
        let v1: Vec<usize> = f1.elements().map(|e| e.index()).collect();
        let v2: Vec<usize> = f2.elements().map(|e| e.index()).collect();
        assert_eq!(v1, v2);
        assert_eq!(f1.generator().index(), f2.generator().index());
    }

    #[test]
    fn supported_q_list() {
        let qs = supported_q();
        assert!(qs.contains(&3) && qs.contains(&343) && qs.contains(&125));
        assert!(!qs.contains(&243) && !qs.contains(&8) && !qs.contains(&15));
        for &q in &qs {
            make_field(q).unwrap();
        }
    }

    #[test]
    #[should_panic(expected = "mixed-field")]
    fn mixed_field_rejected() {
        let f5 = make_field(5).unwrap();
        let f7 = make_field(7).unwrap();
        let a = f5.element(2);
        let b = f7.element(2);
        let _ = f5.add(a, b);
    }
}
