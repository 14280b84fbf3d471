use std::collections::BTreeMap;
use std::fmt;

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

use crate::error::{MetroError, Result};
use crate::network::NetworkUnitary;

/// Highest total degree a monomial may carry.
pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ladder {
    A,
    ADag,
    B,
    BDag,
}

impl Ladder {
    pub fn is_dagger(self) -> bool {
        matches!(self, Ladder::ADag | Ladder::BDag)
    }

    pub fn is_mode_a(self) -> bool {
        matches!(self, Ladder::A | Ladder::ADag)
    }
}

impl fmt::Display for Ladder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ladder::A => "a",
            Ladder::ADag => "a+",
            Ladder::B => "b",
            Ladder::BDag => "b+",
        })
    }
}

/// Exponents of the canonical monomial `a^dag^p a^q b^dag^r b^s`.
///
/// Field order is the canonical sort order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Exponents {
    pub a_dag: usize,
    pub a: usize,
    pub b_dag: usize,
    pub b: usize,
}

impl Exponents {
    pub fn degree(&self) -> usize {
        self.a_dag + self.a + self.b_dag + self.b
    }

    pub fn word(&self) -> Vec<Ladder> {
        let mut w = Vec::with_capacity(self.degree());
        w.extend(std::iter::repeat_n(Ladder::ADag, self.a_dag));
        w.extend(std::iter::repeat_n(Ladder::A, self.a));
        w.extend(std::iter::repeat_n(Ladder::BDag, self.b_dag));
        w.extend(std::iter::repeat_n(Ladder::B, self.b));
        w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: C64,
    pub word: Vec<Ladder>,
}

/// Finite sum of ordered products of `a, a^dag, b, b^dag`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OperatorPolynomial {
    terms: Vec<Monomial>,
}

fn check_degree(word: &[Ladder]) -> Result<()> {
    if word.len() > MAX_DEGREE {
        Err(MetroError::DegreeTooHigh {
            degree: word.len(),
            max: MAX_DEGREE,
        })
    } else {
        Ok(())
    }
}

impl OperatorPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self {
            terms: vec![Monomial {
                coeff: C64::new(1.0, 0.0),
                word: Vec::new(),
            }],
        }
    }

    pub fn word(coeff: C64, word: &[Ladder]) -> Result<Self> {
        check_degree(word)?;
        Ok(Self {
            terms: vec![Monomial {
                coeff,
                word: word.to_vec(),
            }],
        })
    }

    pub fn letter(letter: Ladder) -> Self {
        Self {
            terms: vec![Monomial {
                coeff: C64::new(1.0, 0.0),
                word: vec![letter],
            }],
        }
    }

    pub fn number_a() -> Self {
        Self::word(C64::new(1.0, 0.0), &[Ladder::ADag, Ladder::A]).unwrap()
    }

    pub fn number_b() -> Self {
        Self::word(C64::new(1.0, 0.0), &[Ladder::BDag, Ladder::B]).unwrap()
    }

    pub fn from_terms(terms: Vec<Monomial>) -> Result<Self> {
        for t in &terms {
            check_degree(&t.word)?;
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.word.len()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Monomial {
                    coeff: t.coeff * c,
                    word: t.word.clone(),
                })
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for l in &self.terms {
            for r in &other.terms {
                let mut word = l.word.clone();
                word.extend_from_slice(&r.word);
                check_degree(&word)?;
                terms.push(Monomial {
                    coeff: l.coeff * r.coeff,
                    word,
                });
            }
        }
        Ok(Self { terms })
    }

    /// Canonical coefficients keyed by exponents; exact zeros are dropped.
    pub fn normal_form(&self) -> BTreeMap<Exponents, C64> {
        let mut out: BTreeMap<Exponents, C64> = BTreeMap::new();
        for term in &self.terms {
            // distinct modes commute, so split the word preserving order within each mode
            let mode_a: Vec<bool> = term
                .word
                .iter()
                .filter(|l| l.is_mode_a())
                .map(|l| l.is_dagger())
                .collect();
            let mode_b: Vec<bool> = term
                .word
                .iter()
                .filter(|l| !l.is_mode_a())
                .map(|l| l.is_dagger())
                .collect();
            let na = single_mode_normal_order(&mode_a);
            let nb = single_mode_normal_order(&mode_b);
            for (&(p, q), &ca) in &na {
                for (&(r, s), &cb) in &nb {
                    let key = Exponents {
                        a_dag: p,
                        a: q,
                        b_dag: r,
                        b: s,
                    };
                    *out.entry(key).or_insert(C64::new(0.0, 0.0)) += term.coeff * (ca * cb);
                }
            }
        }
        out.retain(|_, c| *c != C64::new(0.0, 0.0));
        out
    }

    pub fn is_normal_ordered(&self) -> bool {
        self.terms.iter().all(|t| {
            let rank = |l: &Ladder| match l {
                Ladder::ADag => 0,
                Ladder::A => 1,
                Ladder::BDag => 2,
                Ladder::B => 3,
            };
            t.word.windows(2).all(|w| rank(&w[0]) <= rank(&w[1]))
        })
    }
}

/// Normal-orders a single-mode word given as dagger flags, using
/// `a^dag^p a^q a^dag = a^dag^{p+1} a^q + q a^dag^p a^{q-1}`.
fn single_mode_normal_order(daggers: &[bool]) -> BTreeMap<(usize, usize), f64> {
    let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    acc.insert((0, 0), 1.0);
    for &dag in daggers {
        let mut next = BTreeMap::new();
        for (&(p, q), &c) in &acc {
            if dag {
                *next.entry((p + 1, q)).or_insert(0.0) += c;
                if q > 0 {
                    *next.entry((p, q - 1)).or_insert(0.0) += c * q as f64;
                }
            } else {
                *next.entry((p, q + 1)).or_insert(0.0) += c;
            }
        }
        acc = next;
    }
    acc
}

/// Rewrites into canonical normally ordered form: all daggers left within
/// each mode, the `a` block before the `b` block, like terms collected.
pub fn normal_order(poly: &OperatorPolynomial) -> OperatorPolynomial {
    OperatorPolynomial {
        terms: poly
            .normal_form()
            .into_iter()
            .map(|(e, coeff)| Monomial {
                coeff,
                word: e.word(),
            })
            .collect(),
    }
}

/// `letter -> m_{i0} a + m_{i1} b` (conjugated for daggers).
fn letter_image(letter: Ladder, m: &Matrix2<C64>) -> [(C64, Ladder); 2] {
    match letter {
        Ladder::A => [(m[(0, 0)], Ladder::A), (m[(0, 1)], Ladder::B)],
        Ladder::B => [(m[(1, 0)], Ladder::A), (m[(1, 1)], Ladder::B)],
        Ladder::ADag => [(m[(0, 0)].conj(), Ladder::ADag), (m[(0, 1)].conj(), Ladder::BDag)],
        Ladder::BDag => [(m[(1, 0)].conj(), Ladder::ADag), (m[(1, 1)].conj(), Ladder::BDag)],
    }
}

/// Replaces the letter at position `k` of every word by its image under
/// `pick(k)` and expands.
fn substitute_with<'m>(
    poly: &OperatorPolynomial,
    pick: impl Fn(usize) -> &'m Matrix2<C64>,
) -> OperatorPolynomial {
    let mut terms = Vec::new();
    for term in &poly.terms {
        let images: Vec<[(C64, Ladder); 2]> = term
            .word
            .iter()
            .enumerate()
            .map(|(k, &l)| letter_image(l, pick(k)))
            .collect();
        let len = images.len();
        for choice in 0..(1usize << len) {
            let mut coeff = term.coeff;
            let mut word = Vec::with_capacity(len);
            for (k, img) in images.iter().enumerate() {
                let (c, l) = img[(choice >> k) & 1];
                coeff *= c;
                word.push(l);
            }
            if coeff != C64::new(0.0, 0.0) {
                terms.push(Monomial { coeff, word });
            }
        }
    }
    normal_order(&OperatorPolynomial { terms })
}

/// Expresses a polynomial in output-mode operators through the input modes,
/// `(a_out, b_out)^T = U (a_in, b_in)^T`, expanded and normally ordered.
pub fn heisenberg_substitute(poly: &OperatorPolynomial, network: &NetworkUnitary) -> OperatorPolynomial {
    let m = network.matrix();
    substitute_with(poly, |_| m)
}

/// Derivative of [`heisenberg_substitute`] along a one-parameter family of
/// networks `U(t)`, given `U` and `dU/dt` at the point: the product rule over
/// every letter of every word.
pub fn heisenberg_derivative(
    poly: &OperatorPolynomial,
    network: &NetworkUnitary,
    derivative: &Matrix2<C64>,
) -> OperatorPolynomial {
    let m = network.matrix();
    let mut out = OperatorPolynomial::zero();
    for k in 0..poly.degree() {
        let shifted: Vec<Monomial> = poly
            .terms
            .iter()
            .filter(|t| t.word.len() > k)
            .cloned()
            .collect();
        let part = substitute_with(
            &OperatorPolynomial { terms: shifted },
            |pos| if pos == k { derivative } else { m },
        );
        out = out.add(&part);
    }
    normal_order(&out)
}
