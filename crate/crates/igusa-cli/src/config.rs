//! Job configuration shared by the command line and corpus files. A corpus
//! file is a JSON list of these fragments.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use igusa_core::counting::DEFAULT_BUDGET;

pub const BUDGET_ENV: &str = "IGUSA_BUDGET";
/// The CLI keeps p small; the library itself accepts any u64 prime.
pub const MAX_CLI_PRIME: u64 = 10_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterSpec {
    pub conductor: u32,
    pub exps: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub poly: String,
    pub p: u64,
    #[serde(default)]
    pub n: Option<u32>,
    pub imax: u32,
    #[serde(default)]
    pub all_targets_imax: Option<u32>,
    #[serde(default)]
    pub algorithm: Option<String>,
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub horizon: Option<u32>,
    #[serde(default)]
    pub lprime: Option<String>,
    #[serde(default)]
    pub num_deg: Option<usize>,
    #[serde(default)]
    pub den_deg: Option<usize>,
    #[serde(default)]
    pub guard: Option<usize>,
    #[serde(default)]
    pub character: Option<CharacterSpec>,
}

impl JobConfig {
    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("{}@p={}", self.poly, self.p))
    }
}

/// The bundled corpus: the attaining families, a linear polynomial, and the
/// degenerate constants.
pub const DEFAULT_CORPUS: &str = include_str!("../corpus/default.json");

pub fn load_corpus(source: &str) -> Result<Vec<JobConfig>, String> {
    let text = if source == "default" {
        DEFAULT_CORPUS.to_string()
    } else {
        std::fs::read_to_string(source)
            .map_err(|e| format!("cannot read corpus {source}: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| format!("malformed corpus {source}: {e}"))
}

/// Budget resolution: flag, then the environment variable, then the
/// default.
pub fn resolve_budget(flag: Option<u64>) -> u64 {
    if let Some(b) = flag {
        return b;
    }
    if let Ok(text) = std::env::var(BUDGET_ENV) {
        if let Ok(v) = text.trim().parse::<u64>() {
            return v;
        }
    }
    DEFAULT_BUDGET
}

/// Parses "a", "-a", "a/b" into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, String> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| format!("malformed rational {text:?}"))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| format!("malformed rational {text:?}"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in {text:?}"));
    }
    Ok(BigRational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_corpus_parses() {
        let corpus = load_corpus("default").unwrap();
        assert!(corpus.len() >= 6);
        assert!(corpus.iter().any(|c| c.poly.contains('*')));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("-1").unwrap(), BigRational::from_integer((-1).into()));
        assert_eq!(
            parse_rational("-3/2").unwrap(),
            BigRational::new((-3).into(), 2.into())
        );
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }
}
