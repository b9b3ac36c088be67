//! The counting layer: M_i(u) = #{x in (Z/p^i)^n : f(x) = u mod p^i}.
//!
//! Three algorithms compute the same numbers. `brute_force_count` enumerates
//! the whole box and is the oracle the others are checked against.
//! `lift_count` recurses through first-digit branches, applying Hensel's
//! lemma on nonsingular branches and dividing out p^2 on singular ones.
//! `stratified_count` partitions the solution set by gradient valuation and
//! counts each stratum in closed form.
//!
//! Budgets are accounted in evaluation steps, not wall time, so refusals are
//! deterministic.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::multipoly::MultiPoly;
use crate::padic::{ord_int, ExtValuation, Prime};
use crate::{Error, Result};

/// Default evaluation-step budget for enumeration-backed counting.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Which algorithm produced a count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    BruteForce,
    Lift,
    Stratified,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Algorithm::BruteForce => write!(f, "brute"),
            Algorithm::Lift => write!(f, "lift"),
            Algorithm::Stratified => write!(f, "stratified"),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" | "brute_force" | "brute-force" => Ok(Algorithm::BruteForce),
            "lift" => Ok(Algorithm::Lift),
            "stratified" | "strat" => Ok(Algorithm::Stratified),
            other => Err(Error::InvalidInput(format!("unknown algorithm {other:?}"))),
        }
    }
}

fn check_budget(steps: &BigUint, budget: u64) -> Result<()> {
    if *steps > BigUint::from(budget) {
        Err(Error::BudgetExceeded {
            required: steps.to_string(),
            budget,
        })
    } else {
        Ok(())
    }
}

fn reduce_target(u: &BigUint, modulus: &BigUint) -> BigUint {
    if modulus.is_one() {
        BigUint::zero()
    } else {
        u % modulus
    }
}

/// Polynomial compiled for repeated evaluation in a fixed u64 modulus.
struct CompiledPoly {
    terms: Vec<(u64, Vec<(usize, u32)>)>,
    m: u64,
}

impl CompiledPoly {
    fn new(f: &MultiPoly, m: u64) -> Self {
        let mut terms = Vec::new();
        for (exps, c) in f.terms() {
            let c = crate::multipoly::reduce_mod_u64(c, m);
            if c == 0 {
                continue;
            }
            let vars: Vec<(usize, u32)> = exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, &e)| (j, e))
                .collect();
            terms.push((c, vars));
        }
        CompiledPoly { terms, m }
    }

    fn eval(&self, point: &[u64]) -> u64 {
        let m = self.m as u128;
        let mut acc: u128 = 0;
        for (c, vars) in &self.terms {
            let mut term = *c as u128;
            for &(j, e) in vars {
                let mut base = point[j] as u128 % m;
                let mut k = e;
                let mut pw: u128 = 1;
                while k > 0 {
                    if k & 1 == 1 {
                        pw = pw * base % m;
                    }
                    base = base * base % m;
                    k >>= 1;
                }
                term = term * pw % m;
            }
            acc = (acc + term) % m;
        }
        acc as u64
    }
}

fn decode_point(mut idx: u64, m: u64, n: usize) -> Vec<u64> {
    let mut pt = vec![0u64; n];
    for d in pt.iter_mut() {
        *d = idx % m;
        idx /= m;
    }
    pt
}

fn advance_point(pt: &mut [u64], m: u64) {
    for d in pt.iter_mut() {
        *d += 1;
        if *d < m {
            return;
        }
        *d = 0;
    }
}

fn split_range(total: u64, pieces: u64) -> Vec<(u64, u64)> {
    let pieces = pieces.clamp(1, total.max(1));
    let base = total / pieces;
    let extra = total % pieces;
    let mut out = Vec::with_capacity(pieces as usize);
    let mut start = 0u64;
    for i in 0..pieces {
        let len = base + u64::from(i < extra);
        out.push((start, start + len));
        start += len;
    }
    out
}

/// M_i(u) by full enumeration of (Z/p^i)^n. The oracle.
pub fn brute_force_count(
    f: &MultiPoly,
    p: Prime,
    i: u32,
    u: &BigUint,
    budget: u64,
) -> Result<BigInt> {
    let n = f.nvars();
    let modulus = p.power(i);
    let steps = modulus.pow(n as u32);
    check_budget(&steps, budget)?;
    if i == 0 {
        return Ok(BigInt::one());
    }
    let m = modulus.to_u64().expect("within budget");
    let target = reduce_target(u, &modulus).to_u64().expect("within budget");
    let total = steps.to_u64().expect("within budget");
    let compiled = CompiledPoly::new(f, m);
    let count: u64 = split_range(total, 256)
        .into_par_iter()
        .map(|(start, end)| {
            let mut pt = decode_point(start, m, n);
            let mut c = 0u64;
            for _ in start..end {
                if compiled.eval(&pt) == target {
                    c += 1;
                }
                advance_point(&mut pt, m);
            }
            c
        })
        .sum();
    Ok(BigInt::from(count))
}

/// Full histogram of M_i(u) for every u in [0, p^i), by one enumeration pass.
pub fn brute_force_level(f: &MultiPoly, p: Prime, i: u32, budget: u64) -> Result<Vec<u64>> {
    let n = f.nvars();
    let modulus = p.power(i);
    let steps = modulus.pow(n as u32);
    check_budget(&steps, budget)?;
    check_budget(&modulus, budget)?; // histogram allocation
    if i == 0 {
        return Ok(vec![1]);
    }
    let m = modulus.to_u64().expect("within budget");
    let total = steps.to_u64().expect("within budget");
    let compiled = CompiledPoly::new(f, m);
    let hist = split_range(total, 64)
        .into_par_iter()
        .fold(
            || vec![0u64; m as usize],
            |mut h, (start, end)| {
                let mut pt = decode_point(start, m, n);
                for _ in start..end {
                    h[compiled.eval(&pt) as usize] += 1;
                    advance_point(&mut pt, m);
                }
                h
            },
        )
        .reduce(
            || vec![0u64; m as usize],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(hist)
}

/// M_i(u) by the first-digit branch recursion.
///
/// For each b in {0..p-1}^n the branch polynomial h(z) = (f-u)(b + pz) is
/// classified by its constant and linear coefficients: unit constant kills
/// the branch, a unit partial derivative yields the Hensel count
/// p^((n-1)(i-1)), and a doubly-singular branch divides out p^2 and recurses
/// two levels down.
pub fn lift_count(f: &MultiPoly, p: Prime, i: u32, u: &BigUint) -> BigInt {
    let modulus = p.power(i);
    let target = BigInt::from(reduce_target(u, &modulus));
    let shifted = f.sub_constant(&target);
    lift_zero(&shifted, p, i, true)
}

fn lift_zero(f: &MultiPoly, p: Prime, i: u32, parallel: bool) -> BigInt {
    let n = f.nvars();
    // Constant polynomials (including 0) are counted directly.
    if f.is_constant() {
        return if ord_int(&f.constant_term(), p).at_least(i as i64) {
            BigInt::from(p.power(i * n as u32))
        } else {
            BigInt::zero()
        };
    }
    if i == 0 {
        return BigInt::one();
    }
    if i == 1 {
        let m = p.get();
        let compiled = CompiledPoly::new(f, m);
        let total = m.pow(n as u32);
        let mut pt = vec![0u64; n];
        let mut count = 0u64;
        for _ in 0..total {
            if compiled.eval(&pt) == 0 {
                count += 1;
            }
            advance_point(&mut pt, m);
        }
        return BigInt::from(count);
    }

    let branch = |pt: &[u64]| -> BigInt {
        let b: Vec<BigInt> = pt.iter().map(|&x| BigInt::from(x)).collect();
        let h = f.shift_scale(&b, 1, p).expect("dimensions match");
        let const_ord = ord_int(&h.constant_term(), p);
        if const_ord == ExtValuation::Finite(0) {
            return BigInt::zero();
        }
        let unit_partial = (0..n)
            .any(|j| ord_int(&h.linear_coefficient(j), p) == ExtValuation::Finite(1));
        if unit_partial {
            // Hensel's lemma: one solution per choice of the other
            // coordinates.
            return BigInt::from(p.power((n as u32 - 1) * (i - 1)));
        }
        if !const_ord.at_least(2) {
            return BigInt::zero();
        }
        if i == 2 {
            return BigInt::from(p.power(n as u32));
        }
        let reduced = h.divide_by_p_power(p, 2).expect("content >= 2");
        BigInt::from(p.power(n as u32)) * lift_zero(&reduced, p, i - 2, false)
    };

    let m = p.get();
    let total = m.pow(n as u32);
    if parallel && total >= 16 {
        split_range(total, total.min(64))
            .into_par_iter()
            .map(|(start, end)| {
                let mut pt = decode_point(start, m, n);
                let mut acc = BigInt::zero();
                for _ in start..end {
                    acc += branch(&pt);
                    advance_point(&mut pt, m);
                }
                acc
            })
            .reduce(BigInt::zero, |a, b| a + b)
    } else {
        let mut pt = vec![0u64; n];
        let mut acc = BigInt::zero();
        for _ in 0..total {
            acc += branch(&pt);
            advance_point(&mut pt, m);
        }
        acc
    }
}

/// M_i(u) by partitioning solutions on gradient valuation.
///
/// Strata k in {0..r-1} (r = floor(i/2)) are enumerated by representatives
/// mod p^(k+1); each cell that meets the solution set contributes the Hensel
/// count p^(nk + (n-1)(i-2k-1)). The deep-singular stratum is enumerated by
/// representatives mod p^(i-r); each solution cell is a full box of p^(rn)
/// points.
pub fn stratified_count(
    f: &MultiPoly,
    p: Prime,
    i: u32,
    u: &BigUint,
    budget: u64,
) -> Result<BigInt> {
    let n = f.nvars() as u32;
    if i == 0 {
        return Ok(BigInt::one());
    }
    let modulus = p.power(i);
    let target = BigInt::from(reduce_target(u, &modulus));
    let g = f.sub_constant(&target);
    let r = i / 2;

    let mut steps = BigUint::zero();
    for k in 0..r {
        steps += p.power((k + 1) * n);
    }
    steps += p.power((i - r) * n);
    check_budget(&steps, budget)?;

    let grad = g.gradient();
    let pi_u64 = p
        .power(i)
        .to_u64()
        .expect("budget bound keeps p^i within u64");
    let g_mod = CompiledPoly::new(&g, pi_u64);
    let grad_mod: Vec<CompiledPoly> =
        grad.iter().map(|d| CompiledPoly::new(d, pi_u64)).collect();

    // ord_p of v mod p^i, capped at i.
    let capped_ord = |v: u64| -> u32 {
        if v == 0 {
            return i;
        }
        let mut v = v;
        let mut ord = 0;
        while v.is_multiple_of(p.get()) {
            v /= p.get();
            ord += 1;
        }
        ord.min(i)
    };

    let mut total = BigInt::zero();

    for k in 0..r {
        let rep = p.power(k + 1).to_u64().expect("within budget");
        let cells = rep.pow(n);
        let contribution = BigInt::from(p.power(n * k + (n - 1) * (i - 2 * k - 1)));
        let count: u64 = split_range(cells, 64)
            .into_par_iter()
            .map(|(start, end)| {
                let mut pt = decode_point(start, rep, n as usize);
                let mut hits = 0u64;
                for _ in start..end {
                    // Gradient valuation exactly k on this cell?
                    let mut min_ord = i;
                    for d in &grad_mod {
                        min_ord = min_ord.min(capped_ord(d.eval(&pt)));
                        if min_ord < k {
                            break;
                        }
                    }
                    if min_ord == k && capped_ord(g_mod.eval(&pt)) > 2 * k {
                        hits += 1;
                    }
                    advance_point(&mut pt, rep);
                }
                hits
            })
            .sum();
        total += contribution * BigInt::from(count);
    }

    // Deep-singular stratum: gradient in (P^r)^n, cell is a solution box.
    let rep = p.power(i - r).to_u64().expect("within budget");
    let cells = rep.pow(n);
    let box_size = BigInt::from(p.power(r * n));
    let count: u64 = split_range(cells, 64)
        .into_par_iter()
        .map(|(start, end)| {
            let mut pt = decode_point(start, rep, n as usize);
            let mut hits = 0u64;
            for _ in start..end {
                let singular = grad_mod.iter().all(|d| capped_ord(d.eval(&pt)) >= r);
                if singular && g_mod.eval(&pt) == 0 {
                    hits += 1;
                }
                advance_point(&mut pt, rep);
            }
            hits
        })
        .sum();
    total += box_size * BigInt::from(count);

    Ok(total)
}

/// One computed entry of a count table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableEntry {
    pub count: BigInt,
    pub algorithm: Algorithm,
}

/// The numbers M_i(u) for one polynomial and prime, with per-entry
/// algorithm tags. Levels recorded in `complete_levels` carry every target
/// u in [0, p^i).
#[derive(Debug, Clone)]
pub struct CountTable {
    f: MultiPoly,
    prime: Prime,
    n: u32,
    entries: BTreeMap<(u32, BigUint), TableEntry>,
    complete_levels: BTreeSet<u32>,
}

impl CountTable {
    pub fn new(f: MultiPoly, prime: Prime, n: u32) -> Result<Self> {
        if (n as usize) < f.nvars() {
            return Err(Error::InvalidInput(format!(
                "declared dimension {n} is smaller than the polynomial's {} variables",
                f.nvars()
            )));
        }
        let mut table = CountTable {
            f,
            prime,
            n,
            entries: BTreeMap::new(),
            complete_levels: BTreeSet::new(),
        };
        // M_0(0) = 1: the one-element ring.
        table.insert(0, BigUint::zero(), BigInt::one(), Algorithm::BruteForce);
        table.complete_levels.insert(0);
        Ok(table)
    }

    pub fn polynomial(&self) -> &MultiPoly {
        &self.f
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// Declared dimension; dummy variables beyond the polynomial's own are
    /// already folded into the stored counts.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn insert(&mut self, i: u32, u: BigUint, count: BigInt, algorithm: Algorithm) {
        self.entries.insert((i, u), TableEntry { count, algorithm });
    }

    pub fn mark_complete(&mut self, i: u32) {
        self.complete_levels.insert(i);
    }

    pub fn is_complete(&self, i: u32) -> bool {
        self.complete_levels.contains(&i)
    }

    pub fn get(&self, i: u32, u: &BigUint) -> Option<&TableEntry> {
        self.entries.get(&(i, u.clone()))
    }

    pub fn zero_count(&self, i: u32) -> Result<&BigInt> {
        self.get(i, &BigUint::zero())
            .map(|e| &e.count)
            .ok_or(Error::MissingLevel(i))
    }

    /// M_0(0), ..., M_h(0).
    pub fn zero_counts_upto(&self, horizon: u32) -> Result<Vec<BigInt>> {
        (0..=horizon).map(|i| self.zero_count(i).cloned()).collect()
    }

    pub fn max_level(&self) -> u32 {
        self.entries.keys().map(|(i, _)| *i).max().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, &BigUint, &TableEntry)> {
        self.entries.iter().map(|((i, u), e)| (*i, u, e))
    }

    pub fn level_entries(&self, i: u32) -> impl Iterator<Item = (&BigUint, &TableEntry)> {
        self.entries
            .range((i, BigUint::zero())..(i + 1, BigUint::zero()))
            .map(|((_, u), e)| (u, e))
    }

    /// Σ_u M_i(u) = p^(ni) whenever level i is complete.
    pub fn mass_conserved(&self, i: u32) -> Option<bool> {
        if !self.is_complete(i) {
            return None;
        }
        let sum: BigInt = self.level_entries(i).map(|(_, e)| e.count.clone()).sum();
        Some(sum == BigInt::from(self.prime.power(self.n * i)))
    }
}

/// What to compute in a count table.
#[derive(Debug, Clone)]
pub struct TableRequest {
    pub i_max: u32,
    /// Populate every target u for levels up to this bound.
    pub full_target_max: Option<u32>,
    /// None picks brute force when it fits comfortably, lifting otherwise.
    pub algorithm: Option<Algorithm>,
    pub budget: u64,
}

impl Default for TableRequest {
    fn default() -> Self {
        TableRequest {
            i_max: 8,
            full_target_max: None,
            algorithm: None,
            budget: DEFAULT_BUDGET,
        }
    }
}

const AUTO_BRUTE_LIMIT: u64 = 1_000_000;

fn pick_algorithm(req: &TableRequest, f: &MultiPoly, p: Prime, i: u32) -> Algorithm {
    match req.algorithm {
        Some(a) => a,
        None => {
            let steps = p.power(i * f.nvars() as u32);
            if steps <= BigUint::from(AUTO_BRUTE_LIMIT.min(req.budget)) {
                Algorithm::BruteForce
            } else {
                Algorithm::Lift
            }
        }
    }
}

fn count_one(
    f: &MultiPoly,
    p: Prime,
    i: u32,
    u: &BigUint,
    algorithm: Algorithm,
    budget: u64,
) -> Result<BigInt> {
    match algorithm {
        Algorithm::BruteForce => brute_force_count(f, p, i, u, budget),
        Algorithm::Lift => Ok(lift_count(f, p, i, u)),
        Algorithm::Stratified => stratified_count(f, p, i, u, budget),
    }
}

/// Batch driver: M_i(0) for i <= i_max, plus all targets for levels up to
/// `full_target_max`. Dummy variables declared by `n` multiply every count
/// at level i by p^(i·extra), exactly.
pub fn count_table(f: &MultiPoly, p: Prime, n: u32, req: &TableRequest) -> Result<CountTable> {
    let mut table = CountTable::new(f.clone(), p, n)?;
    let extra = n - f.nvars() as u32;
    let dummy_scale = |i: u32| BigInt::from(p.power(i * extra));

    for i in 1..=req.i_max {
        let algo = pick_algorithm(req, f, p, i);
        let full = req.full_target_max.is_some_and(|cap| i <= cap);
        if full {
            match algo {
                Algorithm::BruteForce => {
                    let hist = brute_force_level(f, p, i, req.budget)?;
                    for (u, &count) in hist.iter().enumerate() {
                        table.insert(
                            i,
                            BigUint::from(u),
                            BigInt::from(count) * dummy_scale(i),
                            algo,
                        );
                    }
                }
                _ => {
                    let pi = p
                        .power(i)
                        .to_u64()
                        .filter(|&v| v <= req.budget)
                        .ok_or_else(|| Error::BudgetExceeded {
                            required: p.power(i).to_string(),
                            budget: req.budget,
                        })?;
                    for u in 0..pi {
                        let u = BigUint::from(u);
                        let c = count_one(f, p, i, &u, algo, req.budget)?;
                        table.insert(i, u, c * dummy_scale(i), algo);
                    }
                }
            }
            table.mark_complete(i);
        } else {
            let c = count_one(f, p, i, &BigUint::zero(), algo, req.budget)?;
            table.insert(i, BigUint::zero(), c * dummy_scale(i), algo);
        }
    }
    Ok(table)
}

/// ceil((n/2)(i-1)), the divisibility exponent.
pub fn divisibility_exponent(n: u32, i: u32) -> u64 {
    if i == 0 {
        return 0;
    }
    (u64::from(n) * u64::from(i - 1)).div_ceil(2)
}

/// One failed divisibility check.
#[derive(Debug, Clone)]
pub struct DivisibilityFailure {
    pub level: u32,
    pub target: BigUint,
    pub count: BigInt,
    pub ord: ExtValuation,
    pub required: u64,
}

/// Outcome of checking p^ceil((n/2)(i-1)) | M_i(u) over a table.
#[derive(Debug, Clone)]
pub struct Theorem23Report {
    pub checked: usize,
    pub failures: Vec<DivisibilityFailure>,
}

impl Theorem23Report {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first_failure(&self) -> Option<&DivisibilityFailure> {
        self.failures.first()
    }
}

/// Checks ord_p(M_i(u)) >= ceil((n/2)(i-1)) for every entry with i >= 1.
/// Zero counts are divisible by everything.
pub fn verify_theorem23(table: &CountTable, n: u32) -> Result<Theorem23Report> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let p = table.prime();
    let mut checked = 0;
    let mut failures = Vec::new();
    for (i, u, entry) in table.entries() {
        if i == 0 {
            continue;
        }
        checked += 1;
        let required = divisibility_exponent(n, i);
        let ord = ord_int(&entry.count, p);
        if !ord.at_least(required as i64) {
            failures.push(DivisibilityFailure {
                level: i,
                target: u.clone(),
                count: entry.count.clone(),
                ord,
                required,
            });
        }
    }
    Ok(Theorem23Report { checked, failures })
}

/// Same check against a raw histogram for level i; returns the first failing
/// target, if any.
pub fn check_histogram_divisibility(hist: &[u64], p: Prime, n: u32, i: u32) -> Option<u64> {
    if i == 0 {
        return None;
    }
    let required = divisibility_exponent(n, i);
    let pv = p.get();
    'outer: for (u, &count) in hist.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let mut c = count;
        for _ in 0..required {
            if !c.is_multiple_of(pv) {
                return Some(u as u64);
            }
            c /= pv;
            if c == 0 {
                continue 'outer;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn u(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn xy() -> MultiPoly {
        MultiPoly::from_terms(2, [(vec![1, 1], big(1))]).unwrap()
    }

    fn x1_in_2() -> MultiPoly {
        MultiPoly::from_terms(2, [(vec![1, 0], big(1))]).unwrap()
    }

    fn sum_of_squares() -> MultiPoly {
        MultiPoly::from_terms(2, [(vec![2, 0], big(1)), (vec![0, 2], big(1))]).unwrap()
    }

    #[test]
    fn brute_force_examples() {
        // x1 = 0 mod 9 in two variables: x2 free.
        assert_eq!(
            brute_force_count(&x1_in_2(), p(3), 2, &u(0), DEFAULT_BUDGET).unwrap(),
            big(9)
        );
        assert_eq!(
            brute_force_count(&xy(), p(2), 3, &u(0), DEFAULT_BUDGET).unwrap(),
            big(20)
        );
        assert_eq!(
            brute_force_count(&xy(), p(2), 2, &u(1), DEFAULT_BUDGET).unwrap(),
            big(2)
        );
        assert_eq!(
            brute_force_count(&sum_of_squares(), p(3), 1, &u(0), DEFAULT_BUDGET).unwrap(),
            big(1)
        );
    }

    #[test]
    fn brute_force_budget_refusal() {
        let err = brute_force_count(&xy(), p(2), 20, &u(0), 1000).unwrap_err();
        match err {
            Error::BudgetExceeded { required, budget } => {
                assert_eq!(required, (1u64 << 40).to_string());
                assert_eq!(budget, 1000);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn lift_examples() {
        assert_eq!(lift_count(&xy(), p(2), 3, &u(0)), big(20));
        // Cross-checked against the oracle at i = 6 (4096 points).
        assert_eq!(
            lift_count(&xy(), p(2), 6, &u(0)),
            brute_force_count(&xy(), p(2), 6, &u(0), DEFAULT_BUDGET).unwrap()
        );
        assert_eq!(lift_count(&xy(), p(2), 6, &u(0)), big(256));
        // Unit constant has no zeros.
        let one = MultiPoly::constant(2, 1);
        assert_eq!(lift_count(&one, p(5), 4, &u(0)), big(0));
        // One-element ring.
        assert_eq!(lift_count(&xy(), p(7), 0, &u(0)), big(1));
    }

    #[test]
    fn lift_handles_degenerate_polynomials() {
        let zero = MultiPoly::zero(2);
        assert_eq!(lift_count(&zero, p(3), 4, &u(0)), big(3i64.pow(8)));
        let c18 = MultiPoly::constant(2, 18);
        assert_eq!(lift_count(&c18, p(3), 2, &u(0)), big(81));
        assert_eq!(lift_count(&c18, p(3), 3, &u(0)), big(0));
    }

    #[test]
    fn stratified_examples() {
        assert_eq!(
            stratified_count(&xy(), p(2), 3, &u(0), DEFAULT_BUDGET).unwrap(),
            big(20)
        );
        assert_eq!(
            stratified_count(&x1_in_2(), p(3), 2, &u(0), DEFAULT_BUDGET).unwrap(),
            big(9)
        );
        let oracle = brute_force_count(&sum_of_squares(), p(3), 2, &u(0), DEFAULT_BUDGET).unwrap();
        assert_eq!(
            stratified_count(&sum_of_squares(), p(3), 2, &u(0), DEFAULT_BUDGET).unwrap(),
            oracle
        );
    }

    #[test]
    fn count_table_full_targets() {
        let req = TableRequest {
            i_max: 3,
            full_target_max: Some(2),
            ..Default::default()
        };
        let table = count_table(&xy(), p(2), 2, &req).unwrap();
        let level2: Vec<BigInt> = table
            .level_entries(2)
            .map(|(_, e)| e.count.clone())
            .collect();
        assert_eq!(level2, vec![big(8), big(2), big(4), big(2)]);
        assert!(table.is_complete(2));
        assert_eq!(table.mass_conserved(2), Some(true));
        assert_eq!(table.zero_count(3).unwrap(), &big(20));
    }

    #[test]
    fn count_table_level_zero_only() {
        let req = TableRequest {
            i_max: 0,
            ..Default::default()
        };
        let table = count_table(&xy(), p(2), 2, &req).unwrap();
        assert_eq!(table.zero_count(0).unwrap(), &big(1));
        assert_eq!(table.max_level(), 0);
    }

    #[test]
    fn count_table_m_sequence() {
        let req = TableRequest {
            i_max: 6,
            ..Default::default()
        };
        let table = count_table(&xy(), p(2), 2, &req).unwrap();
        let m = table.zero_counts_upto(6).unwrap();
        let expect: Vec<BigInt> = [1, 3, 8, 20, 48, 112, 256].map(big).to_vec();
        assert_eq!(m, expect);
        // Oracle agreement for the levels the oracle can reach.
        for i in 0..=4u32 {
            assert_eq!(
                &brute_force_count(&xy(), p(2), i, &u(0), DEFAULT_BUDGET).unwrap(),
                table.zero_count(i).unwrap()
            );
        }
    }

    #[test]
    fn dummy_variables_scale_counts() {
        // x1 in two declared variables at p = 3: M_i = 3^i.
        let f = MultiPoly::variable(1, 0);
        let req = TableRequest {
            i_max: 4,
            ..Default::default()
        };
        let table = count_table(&f, p(3), 2, &req).unwrap();
        for i in 0..=4u32 {
            assert_eq!(table.zero_count(i).unwrap(), &big(3i64.pow(i)));
        }
    }

    #[test]
    fn theorem23_report() {
        let req = TableRequest {
            i_max: 3,
            full_target_max: Some(2),
            ..Default::default()
        };
        let table = count_table(&xy(), p(2), 2, &req).unwrap();
        let report = verify_theorem23(&table, 2).unwrap();
        assert!(report.pass());
        assert!(report.checked > 0);
        // ord_2(20) = 2 >= ceil(1*2) = 2 at the boundary.
        assert_eq!(divisibility_exponent(2, 3), 2);

        assert_eq!(
            verify_theorem23(&table, 1).unwrap_err(),
            Error::DimensionTooSmall(1)
        );
    }

    #[test]
    fn theorem23_level_one_is_trivial() {
        assert_eq!(divisibility_exponent(2, 1), 0);
        assert_eq!(divisibility_exponent(4, 1), 0);
        assert_eq!(divisibility_exponent(3, 4), 5); // ceil(4.5)
    }

    #[test]
    fn theorem23_four_variables() {
        // f = x1 x2 + x3 x4 at p = 3, level 2: 9 | M_2(u) for every u.
        let f = MultiPoly::from_terms(
            4,
            [(vec![1, 1, 0, 0], big(1)), (vec![0, 0, 1, 1], big(1))],
        )
        .unwrap();
        let hist = brute_force_level(&f, p(3), 2, DEFAULT_BUDGET).unwrap();
        assert_eq!(hist.iter().sum::<u64>(), 3u64.pow(8));
        assert_eq!(check_histogram_divisibility(&hist, p(3), 4, 2), None);
    }

    #[test]
    fn oracle_equivalence_small_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let nvars = rng.gen_range(2..=3usize);
            let nterms = rng.gen_range(1..=5usize);
            let terms: Vec<(Vec<u32>, BigInt)> = (0..nterms)
                .map(|_| {
                    let mut exps = vec![0u32; nvars];
                    let deg = rng.gen_range(0..=3u32);
                    for _ in 0..deg {
                        exps[rng.gen_range(0..nvars)] += 1;
                    }
                    (exps, big(rng.gen_range(-9..=9)))
                })
                .collect();
            let f = MultiPoly::from_terms(nvars, terms).unwrap();
            for pv in [2u64, 3] {
                let pr = p(pv);
                for i in 1..=3u32 {
                    for target in [u(0), u(1)] {
                        let oracle =
                            brute_force_count(&f, pr, i, &target, DEFAULT_BUDGET).unwrap();
                        assert_eq!(
                            lift_count(&f, pr, i, &target),
                            oracle,
                            "lift disagrees on {f} p={pv} i={i} u={target}"
                        );
                        assert_eq!(
                            stratified_count(&f, pr, i, &target, DEFAULT_BUDGET).unwrap(),
                            oracle,
                            "stratified disagrees on {f} p={pv} i={i} u={target}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn lift_consistency_between_levels() {
        // Each point mod p^i has exactly p^n lifts mod p^(i+1).
        let f = sum_of_squares();
        let pr = p(3);
        for i in 1..=2u32 {
            let lower = brute_force_level(&f, pr, i, DEFAULT_BUDGET).unwrap();
            let upper = brute_force_level(&f, pr, i + 1, DEFAULT_BUDGET).unwrap();
            let pi = 3u64.pow(i);
            for (ul, &count) in lower.iter().enumerate() {
                let lifted: u64 = upper
                    .iter()
                    .enumerate()
                    .filter(|(uu, _)| *uu as u64 % pi == ul as u64)
                    .map(|(_, &c)| c)
                    .sum();
                assert_eq!(lifted, count * 9);
            }
        }
    }

    #[test]
    fn hensel_count_is_exact() {
        use num_integer::Integer;
        // b = (1, 2): f(b) = 1 + 4 = 5 = 0 mod 5, df/dx1 = 2x1 = 2 is a unit.
        let f = sum_of_squares();
        let _ = p(5);
        for i in 2..=3u32 {
            let m = 5u64.pow(i);
            let mut count = 0u64;
            let total = m * m;
            let mut pt = vec![0u64; 2];
            for _ in 0..total {
                if pt[0] % 5 == 1 && pt[1] % 5 == 2 {
                    let val = f
                        .evaluate(&[big(pt[0] as i64), big(pt[1] as i64)])
                        .unwrap();
                    if val.mod_floor(&big(m as i64)).is_zero() {
                        count += 1;
                    }
                }
                advance_point(&mut pt, m);
            }
            assert_eq!(count, 5u64.pow(i - 1), "i={i}");
        }
    }
}
