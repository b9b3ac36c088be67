//! Valuations, angular components, residues modulo prime powers and the
//! structure of the unit groups (Z/p^e)^×.
//!
//! The base field is fixed to Q_p, so the residue cardinality is p and the
//! uniformizer is p itself. Everything here is exact: residues are stored as
//! arbitrary-precision nonnegative integers and never reduced through any
//! lossy shortcut.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// A validated prime, the residue cardinality q of the fixed field Q_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    /// Validates primality: trial division for small inputs, deterministic
    /// Miller-Rabin witnesses for the rest of the u64 range.
    pub fn new(p: u64) -> Result<Self> {
        if is_prime_u64(p) {
            Ok(Prime(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn big(self) -> BigUint {
        BigUint::from(self.0)
    }

    pub fn big_int(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// p^k as an arbitrary-precision integer.
    pub fn power(self, k: u32) -> BigUint {
        self.big().pow(k)
    }
}

impl std::fmt::Display for Prime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let mut d = 41u64;
    while d <= 1_000_000 && d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    if d.saturating_mul(d) > n {
        return true;
    }
    miller_rabin(n)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

// Deterministic for all u64 with this witness set.
fn miller_rabin(n: u64) -> bool {
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let a = a % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The ring Z/p^i. Level 0 is the one-element ring.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Modulus {
    prime: Prime,
    level: u32,
    value: BigUint,
}

impl Modulus {
    pub fn new(prime: Prime, level: u32) -> Self {
        Modulus {
            prime,
            level,
            value: prime.power(level),
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// The modulus value p^i.
    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn is_one_element(&self) -> bool {
        self.level == 0
    }

    pub fn residue(&self, value: impl Into<BigInt>) -> Residue {
        Residue::new(value, self.clone())
    }
}

impl std::fmt::Display for Modulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}^{}", self.prime, self.level)
    }
}

/// An element of Z/p^i in canonical form: 0 <= value < p^i.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Residue {
    value: BigUint,
    modulus: Modulus,
}

impl Residue {
    pub fn new(value: impl Into<BigInt>, modulus: Modulus) -> Self {
        let value = canonical(&value.into(), modulus.value());
        Residue { value, modulus }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        if self.modulus.is_one_element() {
            return false;
        }
        !(&self.value % self.modulus.prime.big()).is_zero()
    }

    fn check_same(&self, other: &Residue) {
        assert_eq!(
            self.modulus, other.modulus,
            "residue arithmetic requires matching moduli"
        );
    }

    pub fn add(&self, other: &Residue) -> Residue {
        self.check_same(other);
        let mut v = &self.value + &other.value;
        if v >= *self.modulus.value() {
            v -= self.modulus.value();
        }
        Residue {
            value: v,
            modulus: self.modulus.clone(),
        }
    }

    pub fn sub(&self, other: &Residue) -> Residue {
        self.check_same(other);
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Residue) -> Residue {
        self.check_same(other);
        Residue {
            value: (&self.value * &other.value) % self.modulus.value(),
            modulus: self.modulus.clone(),
        }
    }

    pub fn neg(&self) -> Residue {
        let v = if self.value.is_zero() {
            BigUint::zero()
        } else {
            self.modulus.value() - &self.value
        };
        Residue {
            value: v,
            modulus: self.modulus.clone(),
        }
    }

    pub fn pow(&self, mut e: u64) -> Residue {
        let mut acc = self.modulus.residue(1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a unit; non-units have none.
    pub fn invert(&self) -> Result<Residue> {
        if !self.is_unit() {
            return Err(Error::InvalidInput(format!(
                "{} is not a unit mod {}",
                self.value, self.modulus
            )));
        }
        let m = BigInt::from(self.modulus.value().clone());
        let a = BigInt::from(self.value.clone());
        let ext = a.extended_gcd(&m);
        debug_assert!(ext.gcd.is_one());
        Ok(Residue::new(ext.x, self.modulus.clone()))
    }
}

impl std::fmt::Display for Residue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

fn canonical(value: &BigInt, modulus: &BigUint) -> BigUint {
    if modulus.is_one() {
        return BigUint::zero();
    }
    let m = BigInt::from(modulus.clone());
    let r = value.mod_floor(&m);
    r.to_biguint().expect("mod_floor of positive modulus")
}

/// ord_p extended by +infinity at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtValuation {
    Finite(i64),
    Infinity,
}

impl ExtValuation {
    pub fn is_infinite(self) -> bool {
        matches!(self, ExtValuation::Infinity)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            ExtValuation::Finite(v) => Some(v),
            ExtValuation::Infinity => None,
        }
    }

    /// True when the valuation is at least `bound` (infinity passes).
    pub fn at_least(self, bound: i64) -> bool {
        match self {
            ExtValuation::Finite(v) => v >= bound,
            ExtValuation::Infinity => true,
        }
    }
}

impl PartialOrd for ExtValuation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtValuation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use ExtValuation::*;
        match (self, other) {
            (Infinity, Infinity) => std::cmp::Ordering::Equal,
            (Infinity, Finite(_)) => std::cmp::Ordering::Greater,
            (Finite(_), Infinity) => std::cmp::Ordering::Less,
            (Finite(a), Finite(b)) => a.cmp(b),
        }
    }
}

impl std::fmt::Display for ExtValuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtValuation::Finite(v) => write!(f, "{v}"),
            ExtValuation::Infinity => write!(f, "+inf"),
        }
    }
}

/// Largest k with p^k | z, or infinity for z = 0.
pub fn ord_int(z: &BigInt, p: Prime) -> ExtValuation {
    if z.is_zero() {
        return ExtValuation::Infinity;
    }
    let p = p.big_int();
    let mut v = 0i64;
    let mut m = z.abs();
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return ExtValuation::Finite(v);
        }
        v += 1;
        m = q;
    }
}

/// ord_p of an exact rational: v(numerator) - v(denominator).
pub fn ord_rational(z: &BigRational, p: Prime) -> ExtValuation {
    if z.is_zero() {
        return ExtValuation::Infinity;
    }
    let vn = ord_int(z.numer(), p).finite().expect("nonzero numerator");
    let vd = ord_int(z.denom(), p).finite().expect("nonzero denominator");
    ExtValuation::Finite(vn - vd)
}

/// ac z = z / p^(ord z) reduced mod p^e; a unit. Undefined at zero.
pub fn angular_component(z: &BigInt, p: Prime, e: u32) -> Result<Residue> {
    if z.is_zero() {
        return Err(Error::AngularOfZero);
    }
    let v = ord_int(z, p).finite().expect("nonzero");
    let unit = z / p.big_int().pow(v as u32);
    Ok(Residue::new(unit, Modulus::new(p, e)))
}

/// Generators of (Z/p^e)^× with a deterministic enumeration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitGroup {
    prime: Prime,
    exponent: u32,
    generators: Vec<(u64, u64)>,
}

/// Anything larger would make unit enumeration and discrete logs unusable.
const UNIT_GROUP_LIMIT: u64 = 1 << 24;

/// Generators of (Z/p^e)^×: one generator for odd p, the pair (-1, 5) for
/// p = 2 and e >= 3, at most one generator for p = 2 and e <= 2.
pub fn unit_group(p: Prime, e: u32) -> Result<UnitGroup> {
    assert!(e >= 1, "unit group needs e >= 1");
    let pe = p.power(e);
    let pe = pe
        .to_u64()
        .filter(|&v| v <= UNIT_GROUP_LIMIT)
        .ok_or_else(|| Error::UnitGroupTooLarge(p.power(e).to_string()))?;
    let generators = if p.get() == 2 {
        match e {
            1 => vec![],
            2 => vec![(3, 2)],
            _ => vec![(pe - 1, 2), (5, 1 << (e - 2))],
        }
    } else {
        let g = primitive_root_mod_p_power(p.get());
        let order = p.get().pow(e - 1) * (p.get() - 1);
        vec![(g % pe, order)]
    };
    Ok(UnitGroup {
        prime: p,
        exponent: e,
        generators,
    })
}

/// Smallest primitive root mod p, adjusted so it generates mod p^e for all e.
fn primitive_root_mod_p_power(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let factors = prime_factors(p - 1);
    let g = (2..p)
        .find(|&g| {
            factors
                .iter()
                .all(|&q| pow_mod(g, (p - 1) / q, p) != 1)
        })
        .expect("every odd prime has a primitive root");
    // A generator mod p generates mod p^e unless g^(p-1) = 1 mod p^2.
    if p <= u32::MAX as u64 && pow_mod(g, p - 1, p * p) == 1 {
        g + p
    } else {
        g
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl UnitGroup {
    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    /// (generator, order) pairs; the generated group is all of (Z/p^e)^×.
    pub fn generators(&self) -> &[(u64, u64)] {
        &self.generators
    }

    pub fn modulus_value(&self) -> u64 {
        self.prime
            .power(self.exponent)
            .to_u64()
            .expect("checked at construction")
    }

    /// φ(p^e) = p^(e-1)(p-1).
    pub fn order(&self) -> u64 {
        let p = self.prime.get();
        p.pow(self.exponent - 1) * (p - 1)
    }

    /// All units, as products of generator powers in lexicographic exponent
    /// order. Deterministic and repetition-free.
    pub fn enumerate(&self) -> Vec<u64> {
        self.enumerate_with_exponents()
            .into_iter()
            .map(|(u, _)| u)
            .collect()
    }

    /// Units paired with the exponent tuple that produced them.
    pub fn enumerate_with_exponents(&self) -> Vec<(u64, Vec<u64>)> {
        let m = self.modulus_value();
        let mut out = vec![(1u64 % m, vec![0u64; self.generators.len()])];
        for (idx, &(g, order)) in self.generators.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * order as usize);
            let mut g_pow = 1u64 % m;
            for a in 0..order {
                for (u, exps) in &out {
                    let mut exps = exps.clone();
                    exps[idx] = a;
                    next.push((mul_mod(*u, g_pow, m), exps));
                }
                g_pow = mul_mod(g_pow, g, m);
            }
            out = next;
        }
        // Generator exponents vary slowest-first; re-sort to lexicographic.
        out.sort_by(|a, b| a.1.cmp(&b.1));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    #[test]
    fn primality_check() {
        assert!(Prime::new(2).is_ok());
        assert!(Prime::new(3).is_ok());
        assert!(Prime::new(9973).is_ok());
        assert!(Prime::new(1_000_000_007).is_ok());
        assert_eq!(Prime::new(1), Err(Error::NotPrime(1)));
        assert_eq!(Prime::new(0), Err(Error::NotPrime(0)));
        assert!(Prime::new(4).is_err());
        assert!(Prime::new(1_000_000_008).is_err());
        assert!(Prime::new(3_215_031_751).is_err()); // strong pseudoprime to 2,3,5,7
    }

    #[test]
    fn ord_examples() {
        assert_eq!(ord_int(&BigInt::from(12), p(2)), ExtValuation::Finite(2));
        assert_eq!(ord_int(&BigInt::from(0), p(5)), ExtValuation::Infinity);
        let q = BigRational::new(BigInt::from(20), BigInt::from(8));
        assert_eq!(ord_rational(&q, p(2)), ExtValuation::Finite(-1));
        assert_eq!(ord_int(&BigInt::from(-54), p(3)), ExtValuation::Finite(3));
    }

    #[test]
    fn angular_component_examples() {
        let ac = angular_component(&BigInt::from(12), p(2), 2).unwrap();
        assert_eq!(ac.value(), &BigUint::from(3u32));
        let ac = angular_component(&BigInt::from(5), p(3), 1).unwrap();
        assert_eq!(ac.value(), &BigUint::from(2u32));
        let ac = angular_component(&BigInt::from(-9), p(3), 2).unwrap();
        assert_eq!(ac.value(), &BigUint::from(8u32));
        assert_eq!(
            angular_component(&BigInt::from(0), p(7), 1),
            Err(Error::AngularOfZero)
        );
    }

    #[test]
    fn angular_component_reconstructs_value() {
        // z = p^ord(z) * u with u = ac(z) mod p^e, for e <= 6.
        for z in [-1000i64, -37, -4, 3, 12, 500, 9 * 243] {
            for pr in [p(2), p(3), p(5)] {
                for e in 1..=6u32 {
                    let z = BigInt::from(z);
                    let v = ord_int(&z, pr).finite().unwrap() as u32;
                    let ac = angular_component(&z, pr, e).unwrap();
                    assert!(ac.is_unit());
                    let m = Modulus::new(pr, e + v);
                    let lhs = Residue::new(z.clone(), m.clone());
                    let rhs = Residue::new(
                        BigInt::from(pr.power(v)) * BigInt::from(ac.value().clone()),
                        m,
                    );
                    // Equality holds mod p^(e+v) since u is only known mod p^e.
                    assert_eq!(lhs, rhs, "z={z} p={pr} e={e}");
                }
            }
        }
    }

    #[test]
    fn unit_group_examples() {
        let g = unit_group(p(3), 2).unwrap();
        assert_eq!(g.generators(), &[(2, 6)]);
        let units: HashSet<u64> = g.enumerate().into_iter().collect();
        assert_eq!(units, HashSet::from([1, 2, 4, 5, 7, 8]));
        assert_eq!(g.enumerate().len(), 6);

        let g = unit_group(p(2), 1).unwrap();
        assert!(g.generators().is_empty());
        assert_eq!(g.enumerate(), vec![1]);

        let g = unit_group(p(2), 3).unwrap();
        assert_eq!(g.generators(), &[(7, 2), (5, 2)]);
        let units: HashSet<u64> = g.enumerate().into_iter().collect();
        assert_eq!(units, HashSet::from([1, 3, 5, 7]));
    }

    #[test]
    fn unit_group_enumeration_distinct_and_coprime() {
        for (pr, e) in [(p(2), 4), (p(3), 3), (p(5), 2), (p(7), 1), (p(11), 2)] {
            let g = unit_group(pr, e).unwrap();
            let units = g.enumerate();
            assert_eq!(units.len() as u64, g.order());
            let set: HashSet<u64> = units.iter().copied().collect();
            assert_eq!(set.len(), units.len(), "repetition for p={pr} e={e}");
            for u in units {
                assert_ne!(u % pr.get(), 0, "non-unit enumerated for p={pr}");
            }
        }
    }

    #[test]
    fn residue_arithmetic_matches_integers() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for pr in [p(2), p(3), p(5)] {
            for level in 1..=4u32 {
                let m = Modulus::new(pr, level);
                let mv = m.value().to_u64().unwrap() as i64;
                for _ in 0..1000 {
                    let a: i64 = rng.gen_range(-500..500);
                    let b: i64 = rng.gen_range(-500..500);
                    let ra = m.residue(a);
                    let rb = m.residue(b);
                    assert_eq!(ra.add(&rb), m.residue((a + b).rem_euclid(mv)));
                    assert_eq!(ra.mul(&rb), m.residue((a * b).rem_euclid(mv)));
                    assert_eq!(ra.neg(), m.residue((-a).rem_euclid(mv)));
                }
            }
        }
    }

    #[test]
    fn residue_inverse() {
        let m = Modulus::new(p(5), 3);
        let r = m.residue(7);
        let inv = r.invert().unwrap();
        assert_eq!(r.mul(&inv), m.residue(1));
        assert!(m.residue(10).invert().is_err());
    }

    #[test]
    fn level_zero_is_one_element() {
        let m = Modulus::new(p(3), 0);
        assert!(m.is_one_element());
        assert_eq!(m.residue(17), m.residue(0));
    }
}
