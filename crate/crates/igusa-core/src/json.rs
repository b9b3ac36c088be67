//! JSON documents for series, rational functions, pole reports, characters
//! and cyclotomic integers. All rationals are decimal-string pairs
//! ["num", "den"], so documents are bit-exact and independent of platform
//! float formatting except for the approximate pole entries, which are
//! tagged.

use num_rational::BigRational;
use serde::Serialize;

use crate::characters::UnitCharacter;
use crate::cyclotomic::CyclotomicInt;
use crate::series::{
    DenominatorFactor, PoleRealPart, PoleReport, RationalFunction, RationalSeries,
};

/// ["num", "den"], reduced, denominator positive.
pub fn rational_pair(q: &BigRational) -> [String; 2] {
    [q.numer().to_string(), q.denom().to_string()]
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesDoc {
    pub p: u64,
    pub n: u32,
    pub provenance: String,
    pub coeffs: Vec<[String; 2]>,
}

impl From<&RationalSeries> for SeriesDoc {
    fn from(s: &RationalSeries) -> Self {
        SeriesDoc {
            p: s.p,
            n: s.n,
            provenance: s.provenance.clone(),
            coeffs: s.coeffs().iter().map(rational_pair).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorDoc {
    pub nu: u32,
    #[serde(rename = "N")]
    pub n_exp: u32,
    pub mult: u32,
}

impl From<&DenominatorFactor> for FactorDoc {
    fn from(f: &DenominatorFactor) -> Self {
        FactorDoc {
            nu: f.nu,
            n_exp: f.n_exp,
            mult: f.multiplicity,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum RealPartDoc {
    Exact([String; 2]),
    Approx(f64),
}

impl From<&PoleRealPart> for RealPartDoc {
    fn from(re: &PoleRealPart) -> Self {
        match re {
            PoleRealPart::Exact(r) => RealPartDoc::Exact(rational_pair(r)),
            PoleRealPart::Approx(v) => RealPartDoc::Approx(*v),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PoleDoc {
    pub re: RealPartDoc,
    pub order: u32,
    pub exact: bool,
    /// Distinct factors shared this real part; order cancellations between
    /// them are not resolved.
    pub shared: bool,
}

/// The combined document for a reconstructed zeta function.
#[derive(Debug, Clone, Serialize)]
pub struct ZetaDocument {
    pub p: u64,
    pub n: u32,
    pub coeffs: Vec<[String; 2]>,
    pub numerator: Vec<[String; 2]>,
    pub denominator: Vec<[String; 2]>,
    pub factors: Vec<FactorDoc>,
    pub poles: Vec<PoleDoc>,
}

pub fn pole_docs(report: &PoleReport) -> Vec<PoleDoc> {
    report
        .entries
        .iter()
        .map(|e| PoleDoc {
            re: (&e.re).into(),
            order: e.order,
            exact: matches!(e.re, PoleRealPart::Exact(_)),
            shared: e.shared,
        })
        .collect()
}

pub fn zeta_document(
    series: &RationalSeries,
    function: &RationalFunction,
    report: &PoleReport,
) -> ZetaDocument {
    ZetaDocument {
        p: series.p,
        n: series.n,
        coeffs: series.coeffs().iter().map(rational_pair).collect(),
        numerator: function
            .numerator()
            .coeffs()
            .iter()
            .map(rational_pair)
            .collect(),
        denominator: function
            .denominator()
            .coeffs()
            .iter()
            .map(rational_pair)
            .collect(),
        factors: function.factors().iter().map(FactorDoc::from).collect(),
        poles: pole_docs(report),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CharacterDoc {
    pub p: u64,
    pub e: u32,
    pub gens: Vec<u64>,
    pub exps: Vec<u64>,
    pub m: u64,
}

impl From<&UnitCharacter> for CharacterDoc {
    fn from(chi: &UnitCharacter) -> Self {
        CharacterDoc {
            p: chi.prime().get(),
            e: chi.conductor(),
            gens: chi.generators().iter().map(|&(g, _)| g).collect(),
            exps: chi.exponents().to_vec(),
            m: chi.order(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CyclotomicDoc {
    pub m: u64,
    pub coords: Vec<String>,
}

impl From<&CyclotomicInt> for CyclotomicDoc {
    fn from(c: &CyclotomicInt) -> Self {
        CyclotomicDoc {
            m: c.order(),
            coords: c.coords().iter().map(|x| x.to_string()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpoly::ratio;

    #[test]
    fn rational_pairs_are_reduced_decimal_strings() {
        assert_eq!(rational_pair(&ratio(20, 8)), ["5", "2"]);
        assert_eq!(rational_pair(&ratio(-1, 2)), ["-1", "2"]);
        assert_eq!(rational_pair(&ratio(0, 7)), ["0", "1"]);
    }

    #[test]
    fn series_doc_shape() {
        let s = RationalSeries::new(2, 2, vec![ratio(1, 1), ratio(1, 4)], "zeta");
        let doc = SeriesDoc::from(&s);
        let json = serde_json::to_string(&doc).unwrap();
        assert_eq!(
            json,
            r#"{"p":2,"n":2,"provenance":"zeta","coeffs":[["1","1"],["1","4"]]}"#
        );
    }

    #[test]
    fn factor_doc_uses_capital_n() {
        let f = DenominatorFactor {
            nu: 3,
            n_exp: 2,
            multiplicity: 1,
        };
        let json = serde_json::to_string(&FactorDoc::from(&f)).unwrap();
        assert_eq!(json, r#"{"nu":3,"N":2,"mult":1}"#);
    }
}
