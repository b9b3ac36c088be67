//! Exact elements of Z[ξ], ξ a primitive m-th root of unity, in the power
//! basis {1, ξ, ..., ξ^(φ(m)-1)} modulo the m-th cyclotomic polynomial.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// Euler's totient.
pub fn euler_phi(m: u64) -> u64 {
    let mut n = m;
    let mut phi = m;
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            phi = phi / d * (d - 1);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        phi = phi / n * (n - 1);
    }
    phi
}

fn trim(v: &mut Vec<BigInt>) {
    while v.last().is_some_and(Zero::is_zero) {
        v.pop();
    }
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

/// Remainder of a by the monic divisor d, over Z.
fn poly_rem_monic(a: &[BigInt], d: &[BigInt]) -> Vec<BigInt> {
    debug_assert!(d.last().is_some_and(One::is_one), "divisor must be monic");
    let mut rem: Vec<BigInt> = a.to_vec();
    trim(&mut rem);
    let dd = d.len() - 1;
    while rem.len() > dd {
        let lead = rem.last().expect("nonempty").clone();
        let shift = rem.len() - 1 - dd;
        if !lead.is_zero() {
            for (j, c) in d.iter().enumerate() {
                let delta = c * &lead;
                rem[shift + j] -= delta;
            }
        }
        rem.pop();
        trim(&mut rem);
    }
    rem
}

/// Exact quotient of a by the monic divisor d; the division must be exact.
fn poly_div_exact_monic(a: &[BigInt], d: &[BigInt]) -> Vec<BigInt> {
    let mut rem: Vec<BigInt> = a.to_vec();
    trim(&mut rem);
    let dd = d.len() - 1;
    if rem.len() <= dd {
        assert!(rem.is_empty(), "inexact cyclotomic division");
        return Vec::new();
    }
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    while rem.len() > dd {
        let lead = rem.last().expect("nonempty").clone();
        let shift = rem.len() - 1 - dd;
        if !lead.is_zero() {
            quot[shift] = lead.clone();
            for (j, c) in d.iter().enumerate() {
                let delta = c * &lead;
                rem[shift + j] -= delta;
            }
        }
        rem.pop();
        trim(&mut rem);
    }
    assert!(rem.is_empty(), "inexact cyclotomic division");
    quot
}

/// Φ_m, ascending coefficients, computed by dividing x^m - 1 by the
/// cyclotomic polynomials of the proper divisors of m.
pub fn cyclotomic_polynomial(m: u64) -> Vec<BigInt> {
    assert!(m >= 1);
    // x^m - 1
    let mut num = vec![BigInt::zero(); m as usize + 1];
    num[0] = -BigInt::one();
    num[m as usize] = BigInt::one();
    let mut result = num;
    for d in 1..m {
        if m.is_multiple_of(d) {
            let phi_d = cyclotomic_polynomial(d);
            result = poly_div_exact_monic(&result, &phi_d);
        }
    }
    result
}

/// Σ a_k ξ^k in the power basis, reduced mod Φ_m. When every coordinate
/// except index 0 vanishes the value is the rational integer a_0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclotomicInt {
    m: u64,
    coords: Vec<BigInt>,
}

impl CyclotomicInt {
    pub fn zero(m: u64) -> Self {
        CyclotomicInt {
            m,
            coords: vec![BigInt::zero(); euler_phi(m) as usize],
        }
    }

    pub fn from_int(m: u64, value: BigInt) -> Self {
        let mut out = CyclotomicInt::zero(m);
        out.coords[0] = value;
        out
    }

    pub fn one(m: u64) -> Self {
        CyclotomicInt::from_int(m, BigInt::one())
    }

    /// ξ^k reduced into the power basis.
    pub fn root_power(m: u64, k: u64) -> Self {
        let k = (k % m) as usize;
        let phi = euler_phi(m) as usize;
        if k < phi {
            let mut out = CyclotomicInt::zero(m);
            out.coords[k] = BigInt::one();
            return out;
        }
        let mut poly = vec![BigInt::zero(); k + 1];
        poly[k] = BigInt::one();
        let rem = poly_rem_monic(&poly, &cyclotomic_polynomial(m));
        CyclotomicInt::from_coords(m, rem)
    }

    fn from_coords(m: u64, mut coords: Vec<BigInt>) -> Self {
        let phi = euler_phi(m) as usize;
        debug_assert!(coords.len() <= phi);
        coords.resize(phi, BigInt::zero());
        CyclotomicInt { m, coords }
    }

    pub fn order(&self) -> u64 {
        self.m
    }

    /// Power-basis coordinates, length φ(m).
    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn coord(&self, k: usize) -> &BigInt {
        &self.coords[k]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    /// Some(a_0) when the value is a rational integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.coords[1..].iter().all(Zero::is_zero) {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    fn check_order(&self, other: &CyclotomicInt) -> Result<()> {
        if self.m != other.m {
            Err(Error::CyclotomicOrderMismatch(self.m, other.m))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &CyclotomicInt) -> Result<CyclotomicInt> {
        self.check_order(other)?;
        Ok(CyclotomicInt {
            m: self.m,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &CyclotomicInt) -> Result<CyclotomicInt> {
        self.check_order(other)?;
        Ok(CyclotomicInt {
            m: self.m,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn scale(&self, c: &BigInt) -> CyclotomicInt {
        CyclotomicInt {
            m: self.m,
            coords: self.coords.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &CyclotomicInt) -> Result<CyclotomicInt> {
        self.check_order(other)?;
        let product = poly_mul(&self.coords, &other.coords);
        let rem = poly_rem_monic(&product, &cyclotomic_polynomial(self.m));
        Ok(CyclotomicInt::from_coords(self.m, rem))
    }
}

/// Exact product in Z[ξ], reduced mod Φ_m. The operands must share m.
pub fn cyclo_mul(a: &CyclotomicInt, b: &CyclotomicInt) -> Result<CyclotomicInt> {
    a.mul(b)
}
