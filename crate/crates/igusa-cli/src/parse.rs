//! The polynomial expression grammar.
//!
//! ```text
//! expr     := ["+"|"-"] term { ("+"|"-") term }
//! term     := factor { "*" factor }
//! factor   := atom [ "^" exponent ]
//! atom     := INT | VAR | "(" expr ")"
//! exponent := INT | "(" ["+"|"-"] INT ")"
//! ```
//!
//! Variables are x1..x9, with x, y, z, w as aliases for x1..x4. `^` binds
//! tightest, then `*`, then the additive operators. Implicit multiplication
//! is rejected. Exponents must be nonnegative integer literals.

use num_bigint::BigInt;
use num_traits::Zero;

use igusa_core::MultiPoly;

const MAX_VARS: usize = 9;
const MAX_EXPONENT: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "syntax error at byte {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

/// A parsed polynomial together with its source text. The canonical printed
/// form re-parses to an equal polynomial.
#[derive(Debug, Clone)]
pub struct PolyExpr {
    pub source: String,
    pub poly: MultiPoly,
}

impl PolyExpr {
    pub fn canonical(&self) -> String {
        self.poly.to_canonical_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Var(usize), // 1-based index
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn err<T>(position: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        position,
        message: message.into(),
    })
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                out.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                out.push((Tok::Star, i));
                i += 1;
            }
            '^' => {
                out.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let value: BigInt = text[start..i].parse().expect("digits");
                out.push((Tok::Int(value), start));
            }
            'x' | 'y' | 'z' | 'w' => {
                let start = i;
                i += 1;
                let mut digits = String::new();
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    digits.push(bytes[i] as char);
                    i += 1;
                }
                let index = if digits.is_empty() {
                    match c {
                        'x' => 1,
                        'y' => 2,
                        'z' => 3,
                        'w' => 4,
                        _ => unreachable!(),
                    }
                } else {
                    if c != 'x' {
                        return err(start, format!("indexed variables use x1..x{MAX_VARS}"));
                    }
                    let index: usize = digits
                        .parse()
                        .map_err(|_| ParseError {
                            position: start,
                            message: "variable index out of range".into(),
                        })?;
                    if index == 0 || index > MAX_VARS {
                        return err(start, format!("variable index must be 1..{MAX_VARS}"));
                    }
                    index
                };
                out.push((Tok::Var(index), start));
            }
            other => return err(i, format!("unexpected character {other:?}")),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&(Tok, usize)> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn expr(&mut self) -> Result<MultiPoly, ParseError> {
        let mut negate = false;
        if let Some((tok, _)) = self.peek() {
            match tok {
                Tok::Plus => {
                    self.pos += 1;
                }
                Tok::Minus => {
                    negate = true;
                    self.pos += 1;
                }
                _ => {}
            }
        }
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        while let Some((tok, _)) = self.peek() {
            match tok {
                Tok::Plus => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.add(&t);
                }
                Tok::Minus => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.sub(&t);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<MultiPoly, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some((Tok::Star, _)) => {
                    self.pos += 1;
                    let f = self.factor()?;
                    acc = acc.mul(&f);
                }
                Some((Tok::Int(_) | Tok::Var(_) | Tok::LParen, p)) => {
                    return err(*p, "missing operator; implicit multiplication is not allowed");
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<MultiPoly, ParseError> {
        let base = self.atom()?;
        if let Some((Tok::Caret, _)) = self.peek() {
            self.pos += 1;
            let e = self.exponent()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly, ParseError> {
        let here = self.here();
        match self.next() {
            Some((Tok::Int(v), _)) => Ok(MultiPoly::constant(MAX_VARS, v.clone())),
            Some((Tok::Var(j), _)) => Ok(MultiPoly::variable(MAX_VARS, j - 1)),
            Some((Tok::LParen, open)) => {
                let open = *open;
                let inner = self.expr()?;
                match self.next() {
                    Some((Tok::RParen, _)) => Ok(inner),
                    _ => err(open, "unclosed parenthesis"),
                }
            }
            Some((_, p)) => err(*p, "expected a number, variable or parenthesized expression"),
            None => err(here, "unexpected end of input"),
        }
    }

    fn exponent(&mut self) -> Result<u32, ParseError> {
        let here = self.here();
        match self.next() {
            Some((Tok::Int(v), p)) => int_exponent(v.clone(), *p),
            Some((Tok::LParen, _)) => {
                let mut negative = false;
                if let Some((Tok::Plus | Tok::Minus, _)) = self.peek() {
                    if matches!(self.peek(), Some((Tok::Minus, _))) {
                        negative = true;
                    }
                    self.pos += 1;
                }
                let (value, vp) = match self.next() {
                    Some((Tok::Int(v), p)) => (v.clone(), *p),
                    Some((_, p)) => {
                        return err(*p, "exponent must be a nonnegative integer literal")
                    }
                    None => return err(here, "unexpected end of input in exponent"),
                };
                match self.next() {
                    Some((Tok::RParen, _)) => {}
                    _ => return err(here, "unclosed parenthesis in exponent"),
                }
                let value = if negative { -value } else { value };
                int_exponent(value, vp)
            }
            Some((_, p)) => err(*p, "exponent must be a nonnegative integer literal"),
            None => err(here, "unexpected end of input in exponent"),
        }
    }
}

fn int_exponent(v: BigInt, pos: usize) -> Result<u32, ParseError> {
    if v < BigInt::zero() {
        return err(pos, "negative exponent");
    }
    use num_traits::ToPrimitive;
    match v.to_u32() {
        Some(e) if e <= MAX_EXPONENT => Ok(e),
        _ => err(pos, format!("exponent exceeds the supported maximum {MAX_EXPONENT}")),
    }
}

/// Shrinks the exponent vectors to the variables actually used (at least
/// one variable so constants stay representable).
fn compress(poly: &MultiPoly) -> MultiPoly {
    let mut max_used = 0usize;
    for (exps, _) in poly.terms() {
        for (j, &e) in exps.iter().enumerate() {
            if e > 0 {
                max_used = max_used.max(j + 1);
            }
        }
    }
    let nvars = max_used.max(1);
    MultiPoly::from_terms(
        nvars,
        poly.terms()
            .map(|(exps, c)| (exps[..nvars].to_vec(), c.clone())),
    )
    .expect("compression preserves shape")
}

/// Parses an expression into a sparse polynomial. The variable count is the
/// highest index used.
pub fn parse_poly(text: &str) -> Result<PolyExpr, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return err(0, "empty polynomial");
    }
    let mut parser = Parser {
        toks: &toks,
        pos: 0,
        end: text.len(),
    };
    let poly = parser.expr()?;
    if let Some((_, p)) = parser.peek() {
        return err(*p, "trailing input after expression");
    }
    Ok(PolyExpr {
        source: text.to_string(),
        poly: compress(&poly),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn grammar_examples() {
        let e = parse_poly("x1^2*x2 - 3*x2 + 1").unwrap();
        let expect = MultiPoly::from_terms(
            2,
            [
                (vec![2, 1], big(1)),
                (vec![0, 1], big(-3)),
                (vec![0, 0], big(1)),
            ],
        )
        .unwrap();
        assert_eq!(e.poly, expect);

        let e = parse_poly("x*y + z^2").unwrap();
        let expect = MultiPoly::from_terms(
            3,
            [(vec![1, 1, 0], big(1)), (vec![0, 0, 2], big(1))],
        )
        .unwrap();
        assert_eq!(e.poly, expect);

        let err = parse_poly("x1^(-1)").unwrap_err();
        assert!(err.message.contains("negative exponent"), "{err}");
    }

    #[test]
    fn aliases_and_parentheses() {
        assert_eq!(parse_poly("w").unwrap().poly, MultiPoly::variable(4, 3));
        let a = parse_poly("(x + y)^2").unwrap().poly;
        let b = parse_poly("x^2 + 2*x*y + y^2").unwrap().poly;
        assert_eq!(a, b);
        let neg = parse_poly("-x + 2").unwrap().poly;
        let expect =
            MultiPoly::from_terms(1, [(vec![1], big(-1)), (vec![0], big(2))]).unwrap();
        assert_eq!(neg, expect);
    }

    #[test]
    fn error_positions() {
        let err = parse_poly("x1 + @").unwrap_err();
        assert_eq!(err.position, 5);
        let err = parse_poly("2x").unwrap_err();
        assert!(err.message.contains("implicit multiplication"), "{err}");
        let err = parse_poly("x^y").unwrap_err();
        assert!(err.message.contains("nonnegative integer literal"), "{err}");
        let err = parse_poly("x10").unwrap_err();
        assert!(err.message.contains("1..9"), "{err}");
        assert!(parse_poly("").is_err());
        assert!(parse_poly("(x").is_err());
    }

    #[test]
    fn constants_have_one_variable() {
        let e = parse_poly("7").unwrap();
        assert_eq!(e.poly.nvars(), 1);
        assert_eq!(e.poly.constant_term(), big(7));
        let zero = parse_poly("0").unwrap();
        assert!(zero.poly.is_zero());
    }

    #[test]
    fn canonical_roundtrip() {
        for src in [
            "x1^2*x2 - 3*x2 + 1",
            "x*y + z^2",
            "(x + y)^3 - 7",
            "0",
            "-5*x1^4 + x2*x3",
        ] {
            let parsed = parse_poly(src).unwrap();
            let reparsed = parse_poly(&parsed.canonical()).unwrap();
            assert_eq!(parsed.poly, reparsed.poly, "roundtrip failed for {src}");
        }
    }
}
