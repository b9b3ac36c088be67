//! Sparse multivariate polynomials over Z with exact evaluation,
//! differentiation and the shift-and-scale substitution x -> b + p^k z that
//! drives the lifting counters.
//!
//! Coefficients are arbitrary-precision: the substitution inflates them by
//! p^(k·degree) and nothing here is allowed to lose exactness. Exponent
//! vectors are stored densely; every supported workload has few variables.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::padic::{ord_int, ExtValuation, Modulus, Prime, Residue};
use crate::{Error, Result};

/// f = Σ c_e x^e with no zero coefficients stored; the zero polynomial is
/// the empty term map.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars >= 1, "polynomials need at least one variable");
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: impl Into<BigInt>) -> Self {
        let mut f = MultiPoly::zero(nvars);
        f.add_term(vec![0; nvars], c.into());
        f
    }

    /// x_j (0-based).
    pub fn variable(nvars: usize, j: usize) -> Self {
        assert!(j < nvars);
        let mut exps = vec![0; nvars];
        exps[j] = 1;
        let mut f = MultiPoly::zero(nvars);
        f.add_term(exps, BigInt::one());
        f
    }

    pub fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, BigInt)>,
    ) -> Result<Self> {
        let mut f = MultiPoly::zero(nvars);
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    got: exps.len(),
                });
            }
            f.add_term(exps, c);
        }
        Ok(f)
    }

    fn add_term(&mut self, exps: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigInt)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    /// Coefficient of x_j (the degree-1 monomial in x_j alone).
    pub fn linear_coefficient(&self, j: usize) -> BigInt {
        let mut exps = vec![0; self.nvars];
        exps[j] = 1;
        self.terms.get(&exps).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&x| x == 0))
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn sub_constant(&self, c: &BigInt) -> MultiPoly {
        let mut out = self.clone();
        out.add_term(vec![0; self.nvars], -c);
        out
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = MultiPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exps, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut acc = MultiPoly::constant(self.nvars, 1);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact value at an integer point.
    pub fn evaluate(&self, point: &[BigInt]) -> Result<BigInt> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        let mut acc = BigInt::zero();
        for (exps, c) in &self.terms {
            let mut term = c.clone();
            for (x, &e) in point.iter().zip(exps) {
                for _ in 0..e {
                    term *= x;
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Exact value at a residue point, reduced mod p^i.
    pub fn evaluate_mod(&self, point: &[Residue], modulus: &Modulus) -> Result<Residue> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        for r in point {
            if r.modulus() != modulus {
                return Err(Error::ModulusMismatch(
                    r.modulus().to_string(),
                    modulus.to_string(),
                ));
            }
        }
        let ints: Vec<BigInt> = point
            .iter()
            .map(|r| BigInt::from(r.value().clone()))
            .collect();
        Ok(Residue::new(self.evaluate(&ints)?, modulus.clone()))
    }

    /// Exact formal partial derivative with respect to x_j (0-based).
    pub fn partial_derivative(&self, j: usize) -> Result<MultiPoly> {
        if j >= self.nvars {
            return Err(Error::VariableIndex {
                index: j,
                nvars: self.nvars,
            });
        }
        let mut out = MultiPoly::zero(self.nvars);
        for (exps, c) in &self.terms {
            let e = exps[j];
            if e == 0 {
                continue;
            }
            let mut exps = exps.clone();
            exps[j] = e - 1;
            out.add_term(exps, c * BigInt::from(e));
        }
        Ok(out)
    }

    pub fn gradient(&self) -> Vec<MultiPoly> {
        (0..self.nvars)
            .map(|j| self.partial_derivative(j).expect("index in range"))
            .collect()
    }

    /// h(z) = f(b + p^k z), expanded exactly. For k >= 1 the degree-r
    /// coefficients of h all lie in P^(rk).
    pub fn shift_scale(&self, b: &[BigInt], k: u32, p: Prime) -> Result<MultiPoly> {
        if b.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: b.len(),
            });
        }
        let scale = p.big_int().pow(k);
        let mut current = self.clone();
        for j in 0..self.nvars {
            let mut next = MultiPoly::zero(self.nvars);
            for (exps, c) in &current.terms {
                let e = exps[j];
                // (b_j + p^k z_j)^e = Σ_r C(e,r) b_j^(e-r) p^(kr) z_j^r
                let mut binom = BigInt::one();
                for r in 0..=e {
                    let coeff = c * &binom * b[j].pow(e - r) * scale.pow(r);
                    if !coeff.is_zero() {
                        let mut exps = exps.clone();
                        exps[j] = r;
                        next.add_term(exps, coeff);
                    }
                    if r < e {
                        binom = binom * BigInt::from(e - r) / BigInt::from(r + 1);
                    }
                }
            }
            current = next;
        }
        Ok(current)
    }

    /// Minimum ord_p over all coefficients; infinity for the zero polynomial.
    pub fn content_valuation(&self, p: Prime) -> ExtValuation {
        self.terms
            .values()
            .map(|c| ord_int(c, p))
            .min()
            .unwrap_or(ExtValuation::Infinity)
    }

    /// Divides every coefficient by p^k exactly; the content must allow it.
    pub fn divide_by_p_power(&self, p: Prime, k: u32) -> Result<MultiPoly> {
        if k == 0 {
            return Ok(self.clone());
        }
        if !self.content_valuation(p).at_least(k as i64) {
            return Err(Error::ContentTooSmall {
                content: self.content_valuation(p).to_string(),
                requested: k,
            });
        }
        let q = p.big_int().pow(k);
        Ok(MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c / &q))
                .collect(),
        })
    }

    /// Canonical text form: terms by total degree descending, then by
    /// exponent vector descending. Round-trips through the CLI grammar.
    pub fn to_canonical_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut terms: Vec<(&Vec<u32>, &BigInt)> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then(b.0.cmp(a.0))
        });
        let mut out = String::new();
        for (idx, (exps, c)) in terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            let mut parts: Vec<String> = Vec::new();
            let is_const = exps.iter().all(|&e| e == 0);
            if !mag.is_one() || is_const {
                parts.push(mag.to_string());
            }
            for (j, &e) in exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => parts.push(format!("x{}", j + 1)),
                    _ => parts.push(format!("x{}^{}", j + 1, e)),
                }
            }
            out.push_str(&parts.join("*"));
        }
        out
    }
}

impl std::fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_canonical_string())
    }
}

pub(crate) fn reduce_mod_u64(c: &BigInt, m: u64) -> u64 {
    let r = c.mod_floor(&BigInt::from(m));
    r.to_u64().expect("canonical residue fits")
}
