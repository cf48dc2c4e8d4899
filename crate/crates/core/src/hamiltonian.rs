//! Polynomials h(A, B, C) in the basic O(N) invariants.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use crate::error::{Error, Result};

/// One of the three basic invariants A = Σq²/2, B = Σ(qp+pq)/2, C = Σp²/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Invariant {
    A,
    B,
    C,
}

impl Invariant {
    pub const ALL: [Invariant; 3] = [Invariant::A, Invariant::B, Invariant::C];

    fn index(self) -> usize {
        match self {
            Invariant::A => 0,
            Invariant::B => 1,
            Invariant::C => 2,
        }
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Invariant::A => "A",
            Invariant::B => "B",
            Invariant::C => "C",
        };
        f.write_str(s)
    }
}

/// Exponents (a, b, c) of the monomial A^a B^b C^c.
pub type Exponents = [u32; 3];

/// A finite real polynomial in (A, B, C) with N-independent coefficients.
///
/// The polynomial is a commutative object; operator ordering is chosen when
/// it is turned into a matrix (see [`crate::rep::OperatorOrdering`]).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HamiltonianPolynomial {
    terms: BTreeMap<Exponents, f64>,
}

impl HamiltonianPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut h = Self::zero();
        h.add_term([0, 0, 0], c);
        h
    }

    pub fn invariant(which: Invariant) -> Self {
        let mut e = [0u32; 3];
        e[which.index()] = 1;
        let mut h = Self::zero();
        h.add_term(e, 1.0);
        h
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponents, f64)>>(terms: I) -> Self {
        let mut h = Self::zero();
        for (e, c) in terms {
            h.add_term(e, c);
        }
        h
    }

    /// Adds `coef · A^a B^b C^c`, merging with an existing term; zero results
    /// are dropped so the representation stays canonical.
    pub fn add_term(&mut self, exps: Exponents, coef: f64) {
        let entry = self.terms.entry(exps).or_insert(0.0);
        *entry += coef;
        if *entry == 0.0 {
            self.terms.remove(&exps);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &f64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e[0] + e[1] + e[2])
            .max()
            .unwrap_or(0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, c)| (*e, c * s)))
    }

    /// Evaluates h at commuting numerical arguments.
    pub fn evaluate(&self, a: f64, b: f64, c: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, coef)| {
                coef * a.powi(e[0] as i32) * b.powi(e[1] as i32) * c.powi(e[2] as i32)
            })
            .sum()
    }
}

impl Add for &HamiltonianPolynomial {
    type Output = HamiltonianPolynomial;
    fn add(self, rhs: &HamiltonianPolynomial) -> HamiltonianPolynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, *c);
        }
        out
    }
}

impl Mul for &HamiltonianPolynomial {
    type Output = HamiltonianPolynomial;
    fn mul(self, rhs: &HamiltonianPolynomial) -> HamiltonianPolynomial {
        let mut out = HamiltonianPolynomial::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term([e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]], c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for HamiltonianPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            if i == 0 {
                if sign == "-" {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mut factors = Vec::new();
            for (letter, p) in Invariant::ALL.iter().zip(e.iter()) {
                match p {
                    0 => {}
                    1 => factors.push(letter.to_string()),
                    _ => factors.push(format!("{letter}^{p}")),
                }
            }
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag == 1.0 {
                f.write_str(&factors.join("*"))?;
            } else {
                write!(f, "{mag}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Parses expressions like `C + 0.5*A^2 - 2*A*B + 3`.
///
/// Grammar: terms joined by `+`/`-`; a term is a product of factors joined by
/// `*`, each factor a number or one of `A`, `B`, `C` with an optional
/// non-negative integer power `^p`.
impl FromStr for HamiltonianPolynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let src: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if src.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut h = HamiltonianPolynomial::zero();
        let chars: Vec<char> = src.chars().collect();
        let mut pieces: Vec<(f64, String)> = Vec::new();
        let mut sign = 1.0;
        let mut cur = String::new();
        for (i, &ch) in chars.iter().enumerate() {
            let exponent_sign =
                i >= 2 && matches!(chars[i - 1], 'e' | 'E') && chars[i - 2].is_ascii_digit();
            if (ch == '+' || ch == '-') && !exponent_sign {
                if !cur.is_empty() {
                    pieces.push((sign, std::mem::take(&mut cur)));
                } else if i != 0 {
                    return Err(Error::Parse(format!("dangling operator in `{s}`")));
                }
                sign = if ch == '-' { -1.0 } else { 1.0 };
            } else {
                cur.push(ch);
            }
        }
        if cur.is_empty() {
            return Err(Error::Parse(format!("empty term in `{s}`")));
        }
        pieces.push((sign, cur));
        for (sign, piece) in pieces {
            let mut coef = sign;
            let mut exps = [0u32; 3];
            for factor in piece.split('*') {
                let (base, power) = match factor.split_once('^') {
                    Some((b, p)) => (
                        b,
                        p.parse::<u32>()
                            .map_err(|_| Error::Parse(format!("bad exponent in `{factor}`")))?,
                    ),
                    None => (factor, 1),
                };
                match base {
                    "A" => exps[0] += power,
                    "B" => exps[1] += power,
                    "C" => exps[2] += power,
                    num => {
                        let v: f64 = num
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad factor `{factor}`")))?;
                        if !v.is_finite() {
                            return Err(Error::Parse(format!("non-finite coefficient `{num}`")));
                        }
                        coef *= v.powi(power as i32);
                    }
                }
            }
            h.add_term(exps, coef);
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_free_and_anharmonic() {
        let h: HamiltonianPolynomial = "C".parse().unwrap();
        assert_eq!(h, HamiltonianPolynomial::invariant(Invariant::C));

        let h: HamiltonianPolynomial = "C + A^2/2".replace("/2", "*0.5").parse().unwrap();
        assert_eq!(h, HamiltonianPolynomial::from_terms([([0, 0, 1], 1.0), ([2, 0, 0], 0.5)]));

        let h: HamiltonianPolynomial = "-2*A*B + 3 - B*A".parse().unwrap();
        assert_eq!(h, HamiltonianPolynomial::from_terms([([1, 1, 0], -3.0), ([0, 0, 0], 3.0)]));
        assert_eq!(h.degree(), 2);
    }

    #[test]
    fn parse_scientific_coefficients() {
        let h: HamiltonianPolynomial = "1e-3*A + 2.5E+1*C".parse().unwrap();
        assert_eq!(h, HamiltonianPolynomial::from_terms([([1, 0, 0], 1e-3), ([0, 0, 1], 25.0)]));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("".parse::<HamiltonianPolynomial>().is_err());
        assert!("D".parse::<HamiltonianPolynomial>().is_err());
        assert!("A^x".parse::<HamiltonianPolynomial>().is_err());
        assert!("A + ".parse::<HamiltonianPolynomial>().is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["C", "0.5*A^2 + C", "-A*B*C + 2", "0"] {
            let h: HamiltonianPolynomial = s.parse().unwrap();
            let again: HamiltonianPolynomial = h.to_string().parse().unwrap();
            assert_eq!(h, again, "{s}");
        }
    }

    #[test]
    fn cancelling_terms_vanish() {
        let h: HamiltonianPolynomial = "A - A".parse().unwrap();
        assert!(h.is_zero());
        assert_eq!(h.to_string(), "0");
    }
}
