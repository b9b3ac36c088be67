//! Characters of (Z/p^e)^×, the twisted coefficient stream
//! T_i = Σ_u χ(u) M_(i+e)(p^i u), its decomposition into φ(m) integer
//! component series, and the twisted divisibility and pole checks.
//!
//! Characters are specified by exponents on the canonical generators of the
//! unit group, so every value is an exact root of unity and no floating
//! point appears anywhere in the twist pipeline.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::counting::{lift_count, CountTable};
use crate::cyclotomic::{euler_phi, CyclotomicInt};
use crate::multipoly::MultiPoly;
use crate::padic::{ord_rational, unit_group, Prime, Residue, UnitGroup};
use crate::series::{
    pole_report, reconstruct_with, PoleEntry, PoleReport, RationalFunction, RationalSeries,
    ReconstructOptions,
};
use crate::{Error, Result};

/// χ(u): zero on non-units, otherwise the exponent k of ξ_m^k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharValue {
    Zero,
    Power(u64),
}

impl CharValue {
    pub fn is_one(self) -> bool {
        self == CharValue::Power(0)
    }
}

/// A character of (Z/p^e)^× with minimal conductor e, given by exponents on
/// the canonical generators: χ(g_j) = exp(2πi a_j / order(g_j)).
#[derive(Debug, Clone)]
pub struct UnitCharacter {
    prime: Prime,
    conductor: u32,
    group: UnitGroup,
    exps: Vec<u64>,
    order: u64,
    values: HashMap<u64, u64>,
}

impl UnitCharacter {
    pub fn new(p: Prime, conductor: u32, exps: Vec<u64>) -> Result<Self> {
        assert!(conductor >= 1, "conductor must be at least 1");
        let group = unit_group(p, conductor)?;
        let gens = group.generators();
        if exps.len() != gens.len() {
            return Err(Error::CharacterExponents {
                expected: gens.len(),
                got: exps.len(),
            });
        }
        let exps: Vec<u64> = exps
            .iter()
            .zip(gens)
            .map(|(&a, &(_, order))| a % order)
            .collect();
        // Order of χ: lcm of the orders of the generator images.
        let mut m = 1u64;
        for (&a, &(_, order)) in exps.iter().zip(gens) {
            let image_order = order / order.gcd(&a);
            m = m.lcm(&image_order);
        }
        // Exponent of ξ_m at each unit, from the discrete log table.
        let mut values = HashMap::new();
        for (u, tuple) in group.enumerate_with_exponents() {
            let mut k: u128 = 0;
            for ((&a, &(_, order)), &x) in exps.iter().zip(gens).zip(&tuple) {
                // a/order of a full turn, expressed in m-ths of a turn.
                k += u128::from(a) * u128::from(m) / u128::from(order) * u128::from(x);
            }
            values.insert(u, (k % u128::from(m)) as u64);
        }
        let chi = UnitCharacter {
            prime: p,
            conductor,
            group,
            exps,
            order: m,
            values,
        };
        chi.check_conductor_minimal()?;
        Ok(chi)
    }

    pub fn trivial(p: Prime) -> Self {
        UnitCharacter::new(p, 1, vec![0; unit_group(p, 1).expect("e = 1").generators().len()])
            .expect("trivial character is always valid")
    }

    /// A nontrivial χ must not vanish on all of 1 + P^(e-1); otherwise its
    /// conductor is smaller than claimed.
    fn check_conductor_minimal(&self) -> Result<()> {
        if self.conductor == 1 {
            return Ok(());
        }
        let p = self.prime.get();
        let pe = self.group.modulus_value();
        let step = pe / p; // p^(e-1)
        let nontrivial = (1..p).any(|k| {
            let u = (1 + step * k) % pe;
            !matches!(self.value_u64(u), CharValue::Power(0))
        });
        if nontrivial {
            Ok(())
        } else {
            Err(Error::NonMinimalConductor)
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    /// m, the order of the character; its values are m-th roots of unity.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn generators(&self) -> &[(u64, u64)] {
        self.group.generators()
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exps
    }

    /// The units of (Z/p^e)^× in the group's deterministic order.
    pub fn units(&self) -> Vec<u64> {
        self.group.enumerate()
    }

    pub fn value_u64(&self, u: u64) -> CharValue {
        let pe = self.group.modulus_value();
        let u = u % pe;
        match self.values.get(&u) {
            Some(&k) => CharValue::Power(k),
            None => CharValue::Zero,
        }
    }

    /// χ at a residue mod p^e.
    pub fn value(&self, u: &Residue) -> Result<CharValue> {
        let m = u.modulus();
        if m.prime() != self.prime || m.level() != self.conductor {
            return Err(Error::ModulusMismatch(
                m.to_string(),
                format!("{}^{}", self.prime, self.conductor),
            ));
        }
        let v = u
            .value()
            .to_u64()
            .expect("conductor modulus fits in u64");
        Ok(self.value_u64(v))
    }

    /// χ(u) as an exact cyclotomic integer.
    pub fn value_cyclotomic(&self, u: u64) -> CyclotomicInt {
        match self.value_u64(u) {
            CharValue::Zero => CyclotomicInt::zero(self.order),
            CharValue::Power(k) => CyclotomicInt::root_power(self.order, k),
        }
    }
}

/// A counting callback: level and canonical target to M_level(target).
pub type Counter<'a> = dyn FnMut(u32, &BigUint) -> Result<BigInt> + 'a;

/// T_i = Σ_(u unit mod p^e) χ(u) M_(i+e)(p^i u), exact in Z[ξ]. The
/// counter owns the polynomial; it maps (level, target) to M_level(target).
pub fn twisted_coefficient(
    chi: &UnitCharacter,
    i: u32,
    counter: &mut Counter<'_>,
) -> Result<CyclotomicInt> {
    let p = chi.prime();
    let e = chi.conductor();
    let level = i + e;
    let modulus = p.power(level);
    let shift = p.power(i);
    let mut acc = CyclotomicInt::zero(chi.order());
    for u in chi.units() {
        let target = (BigUint::from(u) * &shift) % &modulus;
        let count = counter(level, &target)?;
        let xi_k = chi.value_cyclotomic(u);
        acc = acc.add(&xi_k.scale(&count)).expect("same order");
    }
    Ok(acc)
}

/// A prefix of the twisted coefficient stream.
#[derive(Debug, Clone)]
pub struct TwistedCoefficients {
    pub chi: UnitCharacter,
    pub n: u32,
    coeffs: Vec<CyclotomicInt>,
}

impl TwistedCoefficients {
    pub fn coeffs(&self) -> &[CyclotomicInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &CyclotomicInt {
        &self.coeffs[i]
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The integer coordinates M̃_(i+e,k) of component k.
    pub fn component_integers(&self, k: usize) -> Vec<BigInt> {
        self.coeffs.iter().map(|t| t.coord(k).clone()).collect()
    }

    /// Σ_k component_k(i) ξ^k must reproduce T_i; true by construction,
    /// checkable against an independently recombined value.
    pub fn recombine(&self, i: usize) -> CyclotomicInt {
        let m = self.chi.order();
        let mut acc = CyclotomicInt::zero(m);
        for k in 0..euler_phi(m) as usize {
            let xi_k = CyclotomicInt::root_power(m, k as u64);
            acc = acc
                .add(&xi_k.scale(self.coeffs[i].coord(k)))
                .expect("same order");
        }
        acc
    }
}

/// Computes T_0..T_horizon using lift counting; dummy variables beyond the
/// polynomial's own multiply each count at level i+e by p^((i+e)·extra).
pub fn twisted_stream(
    f: &MultiPoly,
    chi: &UnitCharacter,
    n: u32,
    horizon: u32,
) -> Result<TwistedCoefficients> {
    if (n as usize) < f.nvars() {
        return Err(Error::InvalidInput(format!(
            "declared dimension {n} is smaller than the polynomial's {} variables",
            f.nvars()
        )));
    }
    let p = chi.prime();
    let extra = n - f.nvars() as u32;
    let mut counter = |level: u32, target: &BigUint| -> Result<BigInt> {
        let scale = BigInt::from(p.power(level * extra));
        Ok(lift_count(f, p, level, target) * scale)
    };
    let coeffs: Vec<CyclotomicInt> = (0..=horizon)
        .map(|i| twisted_coefficient(chi, i, &mut counter))
        .collect::<Result<_>>()?;
    Ok(TwistedCoefficients {
        chi: chi.clone(),
        n,
        coeffs,
    })
}

/// The φ(m) component series: component k has coefficients
/// M̃_(i+e,k) p^(-n(i+e)), read off the power-basis coordinates of T_i.
pub fn component_series(stream: &TwistedCoefficients) -> Vec<RationalSeries> {
    let chi = &stream.chi;
    let p = chi.prime();
    let e = chi.conductor();
    let n = stream.n;
    let phi = euler_phi(chi.order()) as usize;
    (0..phi)
        .map(|k| {
            let coeffs: Vec<BigRational> = stream
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let scale = BigInt::from(p.power(n * (i as u32 + e)));
                    BigRational::new(t.coord(k).clone(), scale)
                })
                .collect();
            RationalSeries::new(
                p.get(),
                n,
                coeffs,
                format!("twist component {k} (e={e}, m={})", chi.order()),
            )
        })
        .collect()
}

/// One failed twisted divisibility check.
#[derive(Debug, Clone)]
pub struct TwistedDivisibilityFailure {
    pub component: usize,
    pub index: u32,
    pub value: BigInt,
    pub required: u64,
}

#[derive(Debug, Clone)]
pub struct TwistedDivisibilityReport {
    pub checked: usize,
    pub failures: Vec<TwistedDivisibilityFailure>,
}

impl TwistedDivisibilityReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks p^ceil((n/2)(i+e-1)) | M̃_(i+e,k) for every component and every
/// i <= horizon. Zero is divisible by everything.
pub fn verify_twisted_divisibility(
    components: &[RationalSeries],
    p: Prime,
    n: u32,
    e: u32,
    horizon: u32,
) -> Result<TwistedDivisibilityReport> {
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    let mut checked = 0;
    let mut failures = Vec::new();
    for (k, series) in components.iter().enumerate() {
        for i in 0..=horizon.min(series.len().saturating_sub(1) as u32) {
            let coeff = series.coeff(i as usize);
            let scaled = coeff * BigRational::from_integer(BigInt::from(p.power(n * (i + e))));
            if !scaled.is_integer() {
                return Err(Error::InvalidInput(format!(
                    "component {k} coefficient {i} is not p^(-n(i+e)) times an integer"
                )));
            }
            let value = scaled.to_integer();
            checked += 1;
            let required = crate::counting::divisibility_exponent(n, i + e);
            if !ord_rational(&BigRational::from_integer(value.clone()), p)
                .at_least(required as i64)
            {
                failures.push(TwistedDivisibilityFailure {
                    component: k,
                    index: i,
                    value,
                    required,
                });
            }
        }
    }
    Ok(TwistedDivisibilityReport { checked, failures })
}

/// Outcome of reconstructing one component.
#[derive(Debug, Clone)]
pub struct ComponentOutcome {
    pub index: usize,
    /// None for identically-zero components (the zero function has no poles).
    pub function: Option<RationalFunction>,
    pub report: Option<PoleReport>,
    pub error: Option<String>,
}

/// Twisted pole data: per-component reconstructions and the union of their
/// pole real parts.
#[derive(Debug, Clone)]
pub struct TwistedPoleReport {
    pub components: Vec<ComponentOutcome>,
    pub combined: PoleReport,
}

impl TwistedPoleReport {
    pub fn all_reconstructed(&self) -> bool {
        self.components.iter().all(|c| c.error.is_none())
    }
}

/// Reconstructs each component as a rational function and takes the union
/// of the pole real parts across components. Failures are recorded per
/// component rather than aborting the rest.
pub fn twisted_pole_report(
    components: &[RationalSeries],
    opts: &ReconstructOptions,
) -> TwistedPoleReport {
    let mut outcomes = Vec::with_capacity(components.len());
    let mut combined: Vec<PoleEntry> = Vec::new();
    for (index, series) in components.iter().enumerate() {
        if series.is_identically_zero() {
            outcomes.push(ComponentOutcome {
                index,
                function: None,
                report: None,
                error: None,
            });
            continue;
        }
        let p = Prime::new(series.p).expect("series carries a valid prime");
        match reconstruct_with(series, opts) {
            Ok(function) => {
                let report = pole_report(&function, p);
                combined.extend(report.entries.iter().cloned());
                outcomes.push(ComponentOutcome {
                    index,
                    function: Some(function),
                    report: Some(report),
                    error: None,
                });
            }
            Err(err) => outcomes.push(ComponentOutcome {
                index,
                function: None,
                report: None,
                error: Some(err.to_string()),
            }),
        }
    }
    combined.sort_by(|a, b| {
        a.re.as_f64()
            .partial_cmp(&b.re.as_f64())
            .expect("finite real parts")
    });
    TwistedPoleReport {
        components: outcomes,
        combined: PoleReport { entries: combined },
    }
}

/// Zeta coefficients recovered from the trivial character: with e = 1 and
/// χ = 1 the single component series is exactly the zeta stream of Z_f.
pub fn trivial_component_matches_zeta(
    stream: &TwistedCoefficients,
    table: &CountTable,
    horizon: u32,
) -> Result<bool> {
    let components = component_series(stream);
    let zeta = crate::series::zeta_series_from_table(table, horizon + 1)?;
    let comp = &components[0];
    let upto = (horizon as usize + 1).min(comp.len()).min(zeta.len());
    Ok((0..upto).all(|i| comp.coeff(i) == zeta.coeff(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{brute_force_count, count_table, TableRequest, DEFAULT_BUDGET};

    fn p(v: u64) -> Prime {
        Prime::new(v).unwrap()
    }

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn quadratic_mod3() -> UnitCharacter {
        // (Z/3)^× generated by 2 of order 2; χ(2) = -1.
        UnitCharacter::new(p(3), 1, vec![1]).unwrap()
    }

    #[test]
    fn char_value_examples() {
        let chi = quadratic_mod3();
        assert_eq!(chi.order(), 2);
        assert_eq!(chi.value_u64(2), CharValue::Power(1));
        assert_eq!(chi.value_u64(1), CharValue::Power(0));
        assert_eq!(chi.value_u64(3), CharValue::Zero);

        let trivial = UnitCharacter::trivial(p(3));
        assert!(trivial.is_trivial());
        assert_eq!(trivial.value_u64(2), CharValue::Power(0));

        // Order-4 character mod 5 sending the generator 2 to ξ: 4 = 2^2
        // maps to ξ^2.
        let chi = UnitCharacter::new(p(5), 1, vec![1]).unwrap();
        assert_eq!(chi.order(), 4);
        assert_eq!(chi.value_u64(4), CharValue::Power(2));
    }

    #[test]
    fn char_value_modulus_mismatch() {
        let chi = quadratic_mod3();
        let wrong = crate::padic::Modulus::new(p(3), 2);
        assert!(matches!(
            chi.value(&wrong.residue(2)),
            Err(Error::ModulusMismatch(..))
        ));
        let right = crate::padic::Modulus::new(p(3), 1);
        assert_eq!(chi.value(&right.residue(2)).unwrap(), CharValue::Power(1));
    }

    #[test]
    fn homomorphism_property() {
        for chi in [
            quadratic_mod3(),
            UnitCharacter::new(p(5), 1, vec![1]).unwrap(),
            UnitCharacter::new(p(5), 1, vec![2]).unwrap(),
            UnitCharacter::new(p(3), 2, vec![1]).unwrap(),
            UnitCharacter::new(p(2), 3, vec![1, 1]).unwrap(),
        ] {
            let m = chi.order();
            let pe = chi.prime().power(chi.conductor()).to_u64().unwrap();
            for &u in &chi.units() {
                for &v in &chi.units() {
                    let (CharValue::Power(a), CharValue::Power(b)) =
                        (chi.value_u64(u), chi.value_u64(v))
                    else {
                        panic!("units must have nonzero character values");
                    };
                    let CharValue::Power(c) = chi.value_u64(u * v % pe) else {
                        panic!("product of units is a unit");
                    };
                    assert_eq!((a + b) % m, c, "χ({u})χ({v}) != χ({u}·{v})");
                }
            }
        }
    }

    #[test]
    fn orthogonality_of_nontrivial_characters() {
        for chi in [
            quadratic_mod3(),
            UnitCharacter::new(p(5), 1, vec![1]).unwrap(),
            UnitCharacter::new(p(5), 1, vec![2]).unwrap(),
            UnitCharacter::new(p(3), 2, vec![1]).unwrap(),
            UnitCharacter::new(p(2), 3, vec![0, 1]).unwrap(),
            UnitCharacter::new(p(2), 3, vec![1, 1]).unwrap(),
        ] {
            let mut acc = CyclotomicInt::zero(chi.order());
            for u in chi.units() {
                acc = acc.add(&chi.value_cyclotomic(u)).unwrap();
            }
            assert!(acc.is_zero(), "Σ χ(u) != 0 for {:?}", chi.exponents());
        }
    }

    #[test]
    fn conductor_minimality_is_enforced() {
        // χ(2 mod 9) = ξ_6^3 = -1 is trivial on 1 + 3Z/9, so its true
        // conductor is 1.
        assert_eq!(
            UnitCharacter::new(p(3), 2, vec![3]).unwrap_err(),
            Error::NonMinimalConductor
        );
        // Exponent 1 genuinely needs conductor 2.
        assert!(UnitCharacter::new(p(3), 2, vec![1]).is_ok());
        // The trivial assignment at e = 2 is also non-minimal.
        assert_eq!(
            UnitCharacter::new(p(3), 2, vec![0]).unwrap_err(),
            Error::NonMinimalConductor
        );
    }

    #[test]
    fn twisted_coefficient_examples() {
        // f = x1 in two variables, p = 3.
        let f = MultiPoly::variable(2, 0);
        let chi = quadratic_mod3();
        let stream = twisted_stream(&f, &chi, 2, 3).unwrap();
        // Orthogonality: M_(i+1)(3^i u) = 3^(i+1) for both units, so the
        // character sum vanishes at every i.
        for i in 0..=3 {
            assert!(stream.coeff(i).is_zero(), "T_{i} != 0");
        }

        // Trivial character: T_i = 2 * 3^(i+1).
        let trivial = UnitCharacter::trivial(p(3));
        let stream = twisted_stream(&f, &trivial, 2, 3).unwrap();
        for i in 0..=3u32 {
            assert_eq!(
                stream.coeff(i as usize).as_integer(),
                Some(big(2) * big(3).pow(i + 1))
            );
        }
        // Cross-check one value against the oracle.
        let m22 = brute_force_count(&f, p(3), 2, &BigUint::from(3u32), DEFAULT_BUDGET).unwrap();
        assert_eq!(m22, big(9));

        // f = 0: full character sums vanish for nontrivial χ.
        let zero = MultiPoly::zero(2);
        let stream = twisted_stream(&zero, &chi, 2, 2).unwrap();
        for i in 0..=2 {
            assert!(stream.coeff(i).is_zero());
        }
    }

    #[test]
    fn component_recombination() {
        let f = MultiPoly::from_terms(2, [(vec![1, 1], big(1))]).unwrap();
        let chi = UnitCharacter::new(p(5), 1, vec![1]).unwrap();
        let stream = twisted_stream(&f, &chi, 2, 4).unwrap();
        for i in 0..stream.len() {
            assert_eq!(&stream.recombine(i), stream.coeff(i));
        }
        let components = component_series(&stream);
        assert_eq!(components.len(), euler_phi(4) as usize);
    }

    #[test]
    fn trivial_component_reduces_to_zeta() {
        let f = MultiPoly::from_terms(2, [(vec![1, 1], big(1))]).unwrap();
        let trivial = UnitCharacter::trivial(p(2));
        let stream = twisted_stream(&f, &trivial, 2, 5).unwrap();
        let table = count_table(
            &f,
            p(2),
            2,
            &TableRequest {
                i_max: 7,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(trivial_component_matches_zeta(&stream, &table, 5).unwrap());
    }

    #[test]
    fn twisted_divisibility_and_poles() {
        // Quadratic character on x1^2 + x2^2 at p = 3.
        let f = MultiPoly::from_terms(2, [(vec![2, 0], big(1)), (vec![0, 2], big(1))]).unwrap();
        let chi = quadratic_mod3();
        let stream = twisted_stream(&f, &chi, 2, 9).unwrap();
        let components = component_series(&stream);
        let report = verify_twisted_divisibility(&components, p(3), 2, 1, 6).unwrap();
        assert!(report.pass(), "failures: {:?}", report.failures);

        let opts = ReconstructOptions {
            max_num_deg: 2,
            max_den_deg: 3,
            guard: 4,
            nu_max: 8,
            n_exp_max: 4,
        };
        let poles = twisted_pole_report(&components, &opts);
        assert!(poles.all_reconstructed());
        if let Some(min) = poles.combined.min_real_part() {
            assert!(min.as_f64() >= -1.0 - 1e-9, "min {min} below -n/2");
        }

        // Nontrivial character on f = x1: the zero function, no poles.
        let f = MultiPoly::variable(2, 0);
        let stream = twisted_stream(&f, &chi, 2, 6).unwrap();
        let components = component_series(&stream);
        assert!(components[0].is_identically_zero());
        let poles = twisted_pole_report(&components, &opts);
        assert!(poles.combined.is_empty());
        assert!(poles.all_reconstructed());
    }

    #[test]
    fn nonzero_twist_reconstructs() {
        // f = x1^2 + 3 x2^2 keeps the angular component a square whenever
        // x1 is a unit, so the quadratic twist does not vanish.
        let f = MultiPoly::from_terms(2, [(vec![2, 0], big(1)), (vec![0, 2], big(3))]).unwrap();
        let chi = quadratic_mod3();
        let stream = twisted_stream(&f, &chi, 2, 10).unwrap();
        assert!(!stream.coeff(0).is_zero());
        let components = component_series(&stream);
        let opts = ReconstructOptions {
            max_num_deg: 3,
            max_den_deg: 3,
            guard: 4,
            nu_max: 8,
            n_exp_max: 4,
        };
        let poles = twisted_pole_report(&components, &opts);
        assert!(poles.all_reconstructed());
        let min = poles.combined.min_real_part().expect("has a pole");
        assert!(min.as_f64() >= -1.0 - 1e-9);
        assert!(crate::series::check_min_pole_bound(&poles.combined, 2).unwrap());
    }
}
