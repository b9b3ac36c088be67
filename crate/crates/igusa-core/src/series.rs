//! The generating-series layer: Poincaré series P(t) = Σ M_i (p^-n t)^i,
//! zeta coefficients via Z(t) = P(t) - (P(t)-1)/t, exact rational
//! reconstruction from coefficient prefixes, factor peeling, pole reports,
//! and the valuation analytics relating ord_p(M_i) to the smallest pole
//! real part.
//!
//! Reconstruction is exact linear algebra over the rationals with a guard
//! band that rejects recurrences fitted to noise; floating point only enters
//! in the numeric fallback for denominator factors the exact peel cannot
//! reach, with documented tolerances (1e-9 roots, 1e-6 clustering).

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::counting::CountTable;
use crate::padic::{ord_int, Prime};
use crate::qpoly::RatPoly;
use crate::{Error, Result};

/// A prefix of an exact power series, with the prime and dimension it was
/// computed for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSeries {
    pub p: u64,
    pub n: u32,
    pub provenance: String,
    coeffs: Vec<BigRational>,
}

impl RationalSeries {
    pub fn new(p: u64, n: u32, coeffs: Vec<BigRational>, provenance: impl Into<String>) -> Self {
        RationalSeries {
            p,
            n,
            provenance: provenance.into(),
            coeffs,
        }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_identically_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

/// P(t) truncated at degree L: coefficients M_i(0) p^(-ni), exact.
pub fn poincare_series(table: &CountTable, n: u32, l_max: u32) -> Result<RationalSeries> {
    if n != table.n() {
        return Err(Error::InvalidInput(format!(
            "dimension {n} does not match the table's {}",
            table.n()
        )));
    }
    let p = table.prime();
    let mut coeffs = Vec::with_capacity(l_max as usize + 1);
    for i in 0..=l_max {
        let m = table.zero_count(i)?;
        let scale = BigInt::from(p.power(n * i));
        coeffs.push(BigRational::new(m.clone(), scale));
    }
    Ok(RationalSeries::new(p.get(), n, coeffs, "poincare"))
}

/// The t-expansion of Z_f: c_i = P_i - P_(i+1), one coefficient shorter
/// than the input.
pub fn zeta_coefficients(p_series: &RationalSeries) -> Result<RationalSeries> {
    if p_series.len() < 2 {
        return Err(Error::SeriesTooShort {
            have: p_series.len(),
            need: 2,
        });
    }
    if !p_series.coeff(0).is_one() {
        return Err(Error::MalformedPoincare);
    }
    let coeffs: Vec<BigRational> = (0..p_series.len() - 1)
        .map(|i| p_series.coeff(i) - p_series.coeff(i + 1))
        .collect();
    Ok(RationalSeries::new(
        p_series.p,
        p_series.n,
        coeffs,
        "zeta",
    ))
}

/// One denominator factor (1 - p^-nu t^N)^multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DenominatorFactor {
    pub nu: u32,
    /// The t-exponent N.
    pub n_exp: u32,
    pub multiplicity: u32,
}

impl DenominatorFactor {
    /// Pole real part -nu/N contributed by this factor.
    pub fn real_part(&self) -> BigRational {
        BigRational::new(-BigInt::from(self.nu), BigInt::from(self.n_exp))
    }

    pub fn polynomial(&self, p: u64) -> RatPoly {
        let base = factor_polynomial(p, self.nu, self.n_exp);
        let mut out = RatPoly::one();
        for _ in 0..self.multiplicity {
            out = out.mul(&base);
        }
        out
    }
}

fn factor_polynomial(p: u64, nu: u32, n_exp: u32) -> RatPoly {
    let c = BigRational::new(-BigInt::one(), BigInt::from(p).pow(nu));
    RatPoly::one().add(&RatPoly::monomial(c, n_exp as usize))
}

/// A reconstructed rational function N(t)/D(t) with D(0) = 1, N and D
/// coprime, and a factored view of the denominator. The peeled factors
/// times the remainder multiply out to the denominator exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    pub p: u64,
    pub n: u32,
    numerator: RatPoly,
    denominator: RatPoly,
    factors: Vec<DenominatorFactor>,
    remainder: RatPoly,
}

impl RationalFunction {
    /// Normalizes N/D (reduction, D(0) = 1) and peels candidate factors.
    pub fn from_parts(
        p: u64,
        n: u32,
        numerator: RatPoly,
        denominator: RatPoly,
        nu_max: u32,
        n_exp_max: u32,
    ) -> Result<Self> {
        if denominator.coeff(0).is_zero() {
            return Err(Error::InvalidInput(
                "denominator must be a unit at t = 0".into(),
            ));
        }
        let (numerator, denominator) = reduce_fraction(numerator, denominator);
        let (factors, remainder) = peel_denominator(&denominator, p, nu_max, n_exp_max);
        Ok(RationalFunction {
            p,
            n,
            numerator,
            denominator,
            factors,
            remainder,
        })
    }

    pub fn numerator(&self) -> &RatPoly {
        &self.numerator
    }

    pub fn denominator(&self) -> &RatPoly {
        &self.denominator
    }

    pub fn factors(&self) -> &[DenominatorFactor] {
        &self.factors
    }

    /// Unfactored denominator part; 1 when the peel was complete.
    pub fn remainder(&self) -> &RatPoly {
        &self.remainder
    }

    /// First `len` power-series coefficients.
    pub fn expand(&self, len: usize) -> Vec<BigRational> {
        self.numerator.series_quotient(&self.denominator, len)
    }

    pub fn evaluate(&self, t: &BigRational) -> Option<BigRational> {
        let d = self.denominator.evaluate(t);
        if d.is_zero() {
            None
        } else {
            Some(self.numerator.evaluate(t) / d)
        }
    }

    /// Z(1); the anchor identity for zeta functions of nonzero polynomials.
    pub fn value_at_one(&self) -> Option<BigRational> {
        self.evaluate(&BigRational::one())
    }
}

fn reduce_fraction(num: RatPoly, den: RatPoly) -> (RatPoly, RatPoly) {
    if num.is_zero() {
        return (RatPoly::zero(), RatPoly::one());
    }
    let g = num.gcd(&den);
    let (num, den) = if g.is_constant() {
        (num, den)
    } else {
        (
            num.divide_exact(&g).expect("gcd divides"),
            den.divide_exact(&g).expect("gcd divides"),
        )
    };
    let c = den.coeff(0);
    debug_assert!(!c.is_zero());
    let inv = c.recip();
    (num.scale(&inv), den.scale(&inv))
}

/// Exact factor peeling: looks for a complete factorization of `den` into
/// candidates (1 - p^-nu t^N), backtracking so that a reducible candidate
/// like 1 - p^-2 t^2 is not shadowed by its own divisors; falls back to a
/// greedy partial peel when no complete factorization exists.
pub fn peel_denominator(
    den: &RatPoly,
    p: u64,
    nu_max: u32,
    n_exp_max: u32,
) -> (Vec<DenominatorFactor>, RatPoly) {
    if den.is_constant() {
        return (Vec::new(), den.clone());
    }
    let mut candidates: Vec<(u32, u32, RatPoly)> = Vec::new();
    for n_exp in 1..=n_exp_max.max(1) {
        if n_exp as usize > den.degree() {
            break;
        }
        for nu in 1..=nu_max.max(1) {
            candidates.push((nu, n_exp, factor_polynomial(p, nu, n_exp)));
        }
    }

    fn dfs(cur: &RatPoly, cands: &[(u32, u32, RatPoly)], start: usize, acc: &mut Vec<usize>) -> bool {
        if cur.is_one() {
            return true;
        }
        if cur.is_constant() {
            return false;
        }
        for idx in start..cands.len() {
            if cands[idx].2.degree() > cur.degree() {
                continue;
            }
            if let Some(q) = cur.divide_exact(&cands[idx].2) {
                acc.push(idx);
                if dfs(&q, cands, idx, acc) {
                    return true;
                }
                acc.pop();
            }
        }
        false
    }

    let mut picked = Vec::new();
    if dfs(den, &candidates, 0, &mut picked) {
        return (group_factors(&candidates, &picked), RatPoly::one());
    }

    // Greedy partial peel.
    let mut picked = Vec::new();
    let mut current = den.clone();
    'peel: loop {
        for (idx, cand) in candidates.iter().enumerate() {
            if cand.2.degree() > current.degree() {
                continue;
            }
            if let Some(q) = current.divide_exact(&cand.2) {
                picked.push(idx);
                current = q;
                continue 'peel;
            }
        }
        break;
    }
    (group_factors(&candidates, &picked), current)
}

fn group_factors(candidates: &[(u32, u32, RatPoly)], picked: &[usize]) -> Vec<DenominatorFactor> {
    let mut counts: std::collections::BTreeMap<(u32, u32), u32> = std::collections::BTreeMap::new();
    for &idx in picked {
        let (nu, n_exp, _) = candidates[idx];
        *counts.entry((n_exp, nu)).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|((n_exp, nu), multiplicity)| DenominatorFactor {
            nu,
            n_exp,
            multiplicity,
        })
        .collect()
}

/// Options for `reconstruct_with`. `reconstruct_rational` fills the peel
/// bounds with the defaults 4n and 2n.
#[derive(Debug, Clone)]
pub struct ReconstructOptions {
    pub max_num_deg: usize,
    pub max_den_deg: usize,
    pub guard: usize,
    pub nu_max: u32,
    pub n_exp_max: u32,
}

/// Finds the minimal-degree denominator D with D(0) = 1 such that D·S is a
/// polynomial of degree <= max_num_deg, by an exact linear solve over all
/// available coefficients; at least `guard` coefficients beyond the
/// determined part corroborate the recurrence. Then peels exact candidate
/// factors (1 - p^-nu t^N) for nu <= 4n, N <= 2n.
pub fn reconstruct_rational(
    s: &RationalSeries,
    max_num_deg: usize,
    max_den_deg: usize,
    guard: usize,
) -> Result<RationalFunction> {
    let n = s.n.max(1);
    reconstruct_with(
        s,
        &ReconstructOptions {
            max_num_deg,
            max_den_deg,
            guard,
            nu_max: 4 * n,
            n_exp_max: 2 * n,
        },
    )
}

pub fn reconstruct_with(s: &RationalSeries, opts: &ReconstructOptions) -> Result<RationalFunction> {
    let coeffs = s.coeffs();
    let l = coeffs.len();
    let need = opts.max_num_deg + opts.max_den_deg + opts.guard;
    if l < need {
        return Err(Error::SeriesTooShort { have: l, need });
    }

    let solve_region = |upto: usize, dd: usize| -> Option<Vec<BigRational>> {
        // Equations: sum_j d_j c_(k-j) = 0 for max_num_deg < k < upto, d_0 = 1.
        let rows: Vec<usize> = (opts.max_num_deg + 1..upto).collect();
        let matrix: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|&k| {
                (1..=dd)
                    .map(|j| {
                        if j <= k {
                            coeffs[k - j].clone()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let rhs: Vec<BigRational> = rows.iter().map(|&k| -coeffs[k].clone()).collect();
        solve_linear(matrix, rhs)
    };

    for dd in 0..=opts.max_den_deg {
        let Some(solution) = solve_region(l, dd) else {
            continue;
        };
        let mut den_coeffs = vec![BigRational::one()];
        den_coeffs.extend(solution);
        let den = RatPoly::new(den_coeffs);
        // Numerator = D * S truncated; the solve guarantees the tail vanishes.
        let num_coeffs: Vec<BigRational> = (0..=opts.max_num_deg.min(l - 1))
            .map(|k| {
                (0..=k.min(den.degree()))
                    .map(|j| den.coeff(j) * &coeffs[k - j])
                    .sum()
            })
            .collect();
        let num = RatPoly::new(num_coeffs);
        let function = RationalFunction::from_parts(
            s.p,
            s.n,
            num,
            den,
            opts.nu_max,
            opts.n_exp_max,
        )?;
        debug_assert_eq!(function.expand(l).as_slice(), coeffs, "solver postcondition");
        return Ok(function);
    }

    // No denominator matches every coefficient. If one matches the
    // pre-guard region the recurrence is spurious, otherwise the bounds are
    // simply too small.
    let truncated = l - opts.guard;
    for dd in 0..=opts.max_den_deg {
        if solve_region(truncated, dd).is_some() {
            return Err(Error::SpuriousRecurrence);
        }
    }
    Err(Error::ReconstructionFailed)
}

/// Exact Gaussian elimination; returns the particular solution with free
/// variables set to zero, or None when inconsistent.
fn solve_linear(
    mut matrix: Vec<Vec<BigRational>>,
    mut rhs: Vec<BigRational>,
) -> Option<Vec<BigRational>> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !matrix[r][col].is_zero()) else {
            continue;
        };
        matrix.swap(rank, pivot);
        rhs.swap(rank, pivot);
        let inv = matrix[rank][col].clone().recip();
        for cell in matrix[rank].iter_mut().skip(col) {
            *cell = &*cell * &inv;
        }
        rhs[rank] = &rhs[rank] * &inv;
        let pivot_row = matrix[rank].clone();
        let pivot_rhs = rhs[rank].clone();
        for (r, row) in matrix.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let factor = std::mem::replace(&mut row[col], BigRational::zero());
            for (cell, pivot_cell) in row.iter_mut().zip(&pivot_row).skip(col + 1) {
                *cell -= pivot_cell * &factor;
            }
            rhs[r] -= &pivot_rhs * &factor;
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    if rhs[rank..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut solution = vec![BigRational::zero(); cols];
    for (col, pivot) in pivot_of_col.iter().enumerate() {
        if let Some(row) = pivot {
            solution[col] = rhs[*row].clone();
        }
    }
    Some(solution)
}

/// A pole real part: exact when it came from a peeled factor.
#[derive(Debug, Clone, PartialEq)]
pub enum PoleRealPart {
    Exact(BigRational),
    Approx(f64),
}

impl PoleRealPart {
    pub fn as_f64(&self) -> f64 {
        match self {
            PoleRealPart::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            PoleRealPart::Approx(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            PoleRealPart::Exact(r) => Some(r),
            PoleRealPart::Approx(_) => None,
        }
    }
}

impl std::fmt::Display for PoleRealPart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PoleRealPart::Exact(r) => write!(f, "{r}"),
            PoleRealPart::Approx(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleEntry {
    pub re: PoleRealPart,
    pub order: u32,
    /// Distinct factors shared this real part; the reported order is their
    /// maximum and cancellations between them are not resolved.
    pub shared: bool,
}

/// Pole real parts sorted ascending; the first entry is the minimum.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoleReport {
    pub entries: Vec<PoleEntry>,
}

impl PoleReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_real_part(&self) -> Option<&PoleRealPart> {
        self.entries.first().map(|e| &e.re)
    }
}

/// Pole real parts of a reconstructed function: each peeled factor
/// (1 - p^-nu t^N)^m contributes -nu/N with order m; roots of any
/// unfactored remainder are located numerically (1e-9) and clustered
/// (1e-6).
pub fn pole_report(function: &RationalFunction, p: Prime) -> PoleReport {
    let mut exact: std::collections::BTreeMap<BigRational, (u32, u32)> =
        std::collections::BTreeMap::new();
    for f in function.factors() {
        let re = f.real_part();
        let slot = exact.entry(re).or_insert((0, 0));
        slot.0 = slot.0.max(f.multiplicity);
        slot.1 += 1;
    }
    let mut entries: Vec<PoleEntry> = exact
        .into_iter()
        .map(|(re, (order, contributors))| PoleEntry {
            re: PoleRealPart::Exact(re),
            order,
            shared: contributors > 1,
        })
        .collect();

    let remainder = function.remainder();
    if remainder.degree() >= 1 {
        let coeffs: Vec<f64> = remainder
            .coeffs()
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect();
        let roots = polynomial_roots(&coeffs);
        let ln_p = (p.get() as f64).ln();
        let mut parts: Vec<f64> = roots.iter().map(|z| -(z.norm().ln() / ln_p)).collect();
        parts.sort_by(|a, b| a.partial_cmp(b).expect("finite real parts"));
        let mut idx = 0;
        while idx < parts.len() {
            let mut end = idx + 1;
            while end < parts.len() && (parts[end] - parts[idx]).abs() < 1e-6 {
                end += 1;
            }
            entries.push(PoleEntry {
                re: PoleRealPart::Approx(parts[idx]),
                order: (end - idx) as u32,
                shared: false,
            });
            idx = end;
        }
    }

    entries.sort_by(|a, b| {
        a.re.as_f64()
            .partial_cmp(&b.re.as_f64())
            .expect("finite real parts")
    });
    PoleReport { entries }
}

/// True iff the minimum pole real part is >= -n/2. Also asserts the
/// minimum exceeds -n, which holds for every function in scope here.
pub fn check_min_pole_bound(report: &PoleReport, n: u32) -> Result<bool> {
    let min = report.min_real_part().ok_or(Error::EmptyPoleReport)?;
    let neg_n = BigRational::from_integer(BigInt::from(-(n as i64)));
    let half_bound = BigRational::new(BigInt::from(-(n as i64)), BigInt::from(2));
    match min {
        PoleRealPart::Exact(r) => {
            if *r <= neg_n {
                return Err(Error::PoleBelowDimension(r.to_string()));
            }
            Ok(*r >= half_bound)
        }
        PoleRealPart::Approx(v) => {
            if *v <= -(n as f64) {
                return Err(Error::PoleBelowDimension(v.to_string()));
            }
            Ok(*v >= -(n as f64) / 2.0 - 1e-9)
        }
    }
}

/// ceil of an exact rational.
pub fn ceil_rational(q: &BigRational) -> BigInt {
    q.ceil().to_integer()
}

/// The divisibility property of a series at (n, l): the coefficient of
/// t^i/p^(ni), i.e. c_i p^(ni), is an integer multiple of p^ceil((n+l)i)
/// for every i up to the horizon.
pub fn divisibility_property(
    s: &RationalSeries,
    n: u32,
    l: &BigRational,
    horizon: usize,
) -> bool {
    let p = BigInt::from(s.p);
    let n_plus_l = BigRational::from_integer(BigInt::from(n)) + l;
    for i in 0..=horizon.min(s.len().saturating_sub(1)) {
        let x = s.coeff(i) * BigRational::from_integer(p.pow(n * i as u32));
        let m = ceil_rational(&(&n_plus_l * BigRational::from_integer(BigInt::from(i))));
        let scaled = scale_by_p_power(&x, &p, -m.to_i64().expect("small exponent"));
        if !scaled.is_integer() {
            return false;
        }
    }
    true
}

fn scale_by_p_power(x: &BigRational, p: &BigInt, exp: i64) -> BigRational {
    if exp >= 0 {
        x * BigRational::from_integer(p.pow(exp as u32))
    } else {
        x / BigRational::from_integer(p.pow((-exp) as u32))
    }
}

/// Outcome of checking ord_p(M_i) >= ceil((n+l')i - a) over a horizon.
#[derive(Debug, Clone)]
pub struct ValuationBoundReport {
    pub l_prime: BigRational,
    /// Minimal integer offset a valid over the whole horizon.
    pub offset: i64,
    /// Per-level deficit (n+l')i - ord_p(M_i); None where M_i = 0 (vacuous).
    pub deficits: Vec<Option<BigRational>>,
    /// Minimal offset over each prefix 0..=i.
    pub prefix_offsets: Vec<i64>,
    /// Heuristic: the offset grew from the half-horizon to the full one,
    /// indicating l' > l.
    pub diverging: bool,
}

/// Finds the smallest integer a with ord_p(M_i) >= ceil((n+l')i - a) for
/// all i <= horizon, and tracks how the deficit grows along the prefix.
pub fn check_valuation_lower_bound(
    table: &CountTable,
    n: u32,
    l_prime: &BigRational,
    horizon: u32,
) -> Result<ValuationBoundReport> {
    let p = table.prime();
    let counts = table.zero_counts_upto(horizon)?;
    let n_plus_l = BigRational::from_integer(BigInt::from(n)) + l_prime;
    let mut deficits = Vec::with_capacity(counts.len());
    let mut prefix_offsets = Vec::with_capacity(counts.len());
    let mut running: Option<BigRational> = None;
    for (i, m) in counts.iter().enumerate() {
        let deficit = ord_int(m, p).finite().map(|ord| {
            &n_plus_l * BigRational::from_integer(BigInt::from(i))
                - BigRational::from_integer(BigInt::from(ord))
        });
        if let Some(d) = &deficit {
            running = Some(match running.take() {
                Some(r) => r.max(d.clone()),
                None => d.clone(),
            });
        }
        deficits.push(deficit);
        let offset = running
            .as_ref()
            .map(|r| ceil_rational(r).to_i64().expect("small offset"))
            .unwrap_or(0);
        prefix_offsets.push(offset);
    }
    let offset = *prefix_offsets.last().expect("horizon >= 0");
    let half = prefix_offsets[(horizon as usize) / 2];
    Ok(ValuationBoundReport {
        l_prime: l_prime.clone(),
        offset,
        deficits,
        prefix_offsets,
        diverging: offset > half,
    })
}

/// An arithmetic progression iR + c along which the valuation lower bound
/// is tight: ord_p(M_(iR+c)) - (n+l)(iR+c) <= a for every verified index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharpnessWitness {
    /// The period R.
    pub period: u32,
    /// The offset c < R.
    pub offset: u32,
    /// The bound a, minimal within the searched window [0, a_max].
    pub a: i64,
    pub verified_indices: Vec<u32>,
}

/// Searches periods R <= horizon/4 and offsets c < R for the sharpest
/// progression (smallest a, then most verified indices). Absence of a
/// witness is an inconclusive outcome, not an error.
pub fn find_sharpness_witness(
    table: &CountTable,
    n: u32,
    l: &BigRational,
    horizon: u32,
) -> Result<Option<SharpnessWitness>> {
    let p = table.prime();
    let counts = table.zero_counts_upto(horizon)?;
    let n_plus_l = BigRational::from_integer(BigInt::from(n)) + l;
    let r_max = horizon / 4;
    let a_max = i64::from(2 * n + 4);

    let mut best: Option<(i64, usize, u32, u32, Vec<u32>)> = None;
    for period in 1..=r_max {
        for offset in 0..period {
            let indices: Vec<u32> = (0..)
                .map(|i| i * period + offset)
                .take_while(|&idx| idx <= horizon)
                .collect();
            if indices.len() < 4 {
                continue;
            }
            let mut max_deficit: Option<BigRational> = None;
            let mut ok = true;
            for &idx in &indices {
                let Some(ord) = ord_int(&counts[idx as usize], p).finite() else {
                    ok = false; // zero count: the bound is vacuous here
                    break;
                };
                let deficit = BigRational::from_integer(BigInt::from(ord))
                    - &n_plus_l * BigRational::from_integer(BigInt::from(idx));
                max_deficit = Some(match max_deficit.take() {
                    Some(m) => m.max(deficit),
                    None => deficit,
                });
            }
            if !ok {
                continue;
            }
            let max_deficit = max_deficit.expect("at least 4 indices");
            let a = ceil_rational(&max_deficit)
                .to_i64()
                .expect("small offset")
                .max(0);
            if a > a_max {
                continue;
            }
            let candidate = (a, indices.len(), period, offset, indices);
            let better = match &best {
                None => true,
                Some((ba, bcount, bp, bc, _)) => {
                    (candidate.0, std::cmp::Reverse(candidate.1), candidate.2, candidate.3)
                        < (*ba, std::cmp::Reverse(*bcount), *bp, *bc)
                }
            };
            if better {
                best = Some(candidate);
            }
        }
    }
    Ok(best.map(|(a, _, period, offset, verified_indices)| SharpnessWitness {
        period,
        offset,
        a,
        verified_indices,
    }))
}

/// An estimate of l with its degeneracy flag (slope n means the series has
/// no p-power decay at all, as for f = 0).
#[derive(Debug, Clone, PartialEq)]
pub struct MinPoleEstimate {
    pub estimate: BigRational,
    pub degenerate: bool,
}

/// Heuristic estimator: the slope of the dominant segment of the lower
/// convex envelope of (i, ord_p(M_i)), minus n. Converges to l as the
/// horizon grows.
pub fn estimate_min_pole(table: &CountTable, n: u32) -> Result<MinPoleEstimate> {
    let p = table.prime();
    let horizon = table.max_level();
    let mut points: Vec<(i64, BigInt)> = Vec::new();
    for i in 0..=horizon {
        let Ok(m) = table.zero_count(i) else {
            continue;
        };
        if m.is_zero() {
            continue;
        }
        let ord = ord_int(m, p).finite().expect("nonzero count");
        points.push((i as i64, BigInt::from(ord)));
    }
    if points.is_empty() {
        return Err(Error::EstimatorUndefined("all counts are zero"));
    }
    if points.len() < 6 {
        return Err(Error::EstimatorUndefined(
            "need at least 6 nonzero counts",
        ));
    }

    // Lower convex hull; collinear points collapse into one segment.
    let mut hull: Vec<(i64, BigInt)> = Vec::new();
    for pt in points {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            let cross = (BigInt::from(b.0 - a.0)) * (&pt.1 - &a.1)
                - (&b.1 - &a.1) * BigInt::from(pt.0 - a.0);
            if cross <= BigInt::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }

    let mut best: Option<(i64, i64, BigRational)> = None; // (length, end, slope)
    for w in hull.windows(2) {
        let (x1, y1) = &w[0];
        let (x2, y2) = &w[1];
        let length = x2 - x1;
        let slope = BigRational::new(y2 - y1, BigInt::from(length));
        let better = match &best {
            None => true,
            Some((blen, bend, _)) => (length, *x2) > (*blen, *bend),
        };
        if better {
            best = Some((length, *x2, slope));
        }
    }
    let slope = best.expect("at least two hull points").2;
    let estimate = slope - BigRational::from_integer(BigInt::from(n));
    Ok(MinPoleEstimate {
        degenerate: estimate.is_zero(),
        estimate,
    })
}

/// Durand-Kerner root finder; good to ~1e-9 on the small polynomials the
/// numeric fallback sees.
fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let mut coeffs: Vec<f64> = coeffs.to_vec();
    while coeffs.last().is_some_and(|c| *c == 0.0) {
        coeffs.pop();
    }
    if coeffs.len() < 2 {
        return Vec::new();
    }
    let deg = coeffs.len() - 1;
    let lead = *coeffs.last().expect("nonempty");
    let monic: Vec<Complex64> = coeffs
        .iter()
        .map(|c| Complex64::new(c / lead, 0.0))
        .collect();
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..1000 {
        let mut delta_max = 0.0f64;
        for k in 0..deg {
            let zk = roots[k];
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, zj) in roots.iter().enumerate() {
                if j != k {
                    denom *= zk - zj;
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = eval(zk) / denom;
            roots[k] = zk - step;
            delta_max = delta_max.max(step.norm() / (1.0 + zk.norm()));
        }
        if delta_max < 1e-12 {
            break;
        }
    }
    roots
}

/// Pads or truncates a zeta coefficient stream out of a count table:
/// convenience for the common pipeline.
pub fn zeta_series_from_table(table: &CountTable, horizon: u32) -> Result<RationalSeries> {
    let p_series = poincare_series(table, table.n(), horizon)?;
    zeta_coefficients(&p_series)
}

/// True when the expansion of `function` matches the series prefix exactly.
pub fn expansion_matches(function: &RationalFunction, s: &RationalSeries, len: usize) -> bool {
    let len = len.min(s.len());
    function.expand(len).as_slice() == &s.coeffs()[..len]
}
