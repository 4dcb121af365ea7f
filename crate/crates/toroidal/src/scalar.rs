//! Sparse multivariate polynomials over arbitrary-precision rationals.
//!
//! All coefficients anywhere in the crate are [`ParamPoly`] values: exact
//! rational polynomials in a fixed set of formal parameters. Keeping `mu`,
//! `ell`, `alpha`, ... formal means a vanishing residual is a polynomial
//! identity, not a lucky sample.
//!
//! # Key Operations
//! - [`ffact`]: the falling factorial a^(r) = a(a-1)...(a-r+1) as a polynomial
//! - [`ParamPoly::specialize`]: substitute rationals for a subset of parameters
//! - full ring arithmetic via `+`, `-`, `*` on references
//!
//! # Design Notes
//! - Terms live in a `BTreeMap` keyed by exponent vectors, so iteration order,
//!   printing, and serialized output are deterministic.
//! - No zero coefficient is ever stored; equality is plain structural equality.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exact scalar type used everywhere in the crate.
pub type Rational = BigRational;

/// Convenience constructor for an integer rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Convenience constructor for the fraction n/d.
pub fn ratq(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// The formal parameters the engine computes with.
///
/// `Mu` is the cocycle twist, `Ell` the level, `Alpha`/`Beta` the loop-module
/// shifts, `CC` the Virasoro central charge, and the rest are free scalars for
/// the combinatorial identities (`A0`..`B1` for derivation coefficients,
/// `I`..`N` for formal indices).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum Param {
    Mu,
    Ell,
    Alpha,
    Beta,
    CC,
    A,
    B,
    A0,
    A1,
    B0,
    B1,
    I,
    J,
    M,
    N,
}

/// Number of formal parameters.
pub const PARAM_COUNT: usize = 15;

impl Param {
    /// All parameters in canonical order.
    pub const ALL: [Param; PARAM_COUNT] = [
        Param::Mu,
        Param::Ell,
        Param::Alpha,
        Param::Beta,
        Param::CC,
        Param::A,
        Param::B,
        Param::A0,
        Param::A1,
        Param::B0,
        Param::B1,
        Param::I,
        Param::J,
        Param::M,
        Param::N,
    ];

    fn idx(self) -> usize {
        Param::ALL.iter().position(|p| *p == self).unwrap()
    }

    /// Display / parse name.
    pub fn name(self) -> &'static str {
        match self {
            Param::Mu => "mu",
            Param::Ell => "ell",
            Param::Alpha => "alpha",
            Param::Beta => "beta",
            Param::CC => "c",
            Param::A => "a",
            Param::B => "b",
            Param::A0 => "a0",
            Param::A1 => "a1",
            Param::B0 => "b0",
            Param::B1 => "b1",
            Param::I => "i",
            Param::J => "j",
            Param::M => "m",
            Param::N => "n",
        }
    }

    /// Inverse of [`Param::name`].
    pub fn parse(s: &str) -> Option<Param> {
        Param::ALL.iter().copied().find(|p| p.name() == s)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A monomial: one exponent per parameter, in `Param::ALL` order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash, Default)]
pub struct Mono {
    exps: [u16; PARAM_COUNT],
}

impl Mono {
    /// The empty monomial (constant term key).
    pub fn one() -> Mono {
        Mono::default()
    }

    /// Single parameter to the first power.
    pub fn param(p: Param) -> Mono {
        let mut m = Mono::default();
        m.exps[p.idx()] = 1;
        m
    }

    /// True for the constant-term key.
    pub fn is_one(&self) -> bool {
        self.exps.iter().all(|e| *e == 0)
    }

    /// Exponent of one parameter.
    pub fn exp(&self, p: Param) -> u16 {
        self.exps[p.idx()]
    }

    /// Total degree.
    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|e| *e as u32).sum()
    }

    fn mul(&self, other: &Mono) -> Mono {
        let mut m = Mono::default();
        for k in 0..PARAM_COUNT {
            m.exps[k] = self.exps[k]
                .checked_add(other.exps[k])
                .expect("monomial exponent overflow");
        }
        m
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut first = true;
        for p in Param::ALL {
            let e = self.exps[p.idx()];
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{}", p)?;
            } else {
                write!(f, "{}^{}", p, e)?;
            }
        }
        Ok(())
    }
}

/// Sparse polynomial in the formal parameters with `Rational` coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ParamPoly {
    terms: BTreeMap<Mono, Rational>,
}

impl ParamPoly {
    /// The zero polynomial.
    pub fn zero() -> ParamPoly {
        ParamPoly::default()
    }

    /// The constant 1.
    pub fn one() -> ParamPoly {
        ParamPoly::constant(Rational::one())
    }

    /// A constant polynomial.
    pub fn constant(c: Rational) -> ParamPoly {
        let mut p = ParamPoly::default();
        if !c.is_zero() {
            p.terms.insert(Mono::one(), c);
        }
        p
    }

    /// A constant integer polynomial.
    pub fn int(n: i64) -> ParamPoly {
        ParamPoly::constant(rat(n))
    }

    /// A single formal parameter.
    pub fn param(p: Param) -> ParamPoly {
        let mut q = ParamPoly::default();
        q.terms.insert(Mono::param(p), Rational::one());
        q
    }

    /// True iff no terms are stored.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True iff the polynomial is the constant 1.
    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Mono::one())
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    /// The constant term.
    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Mono::one())
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// If the polynomial is constant, its value.
    pub fn as_constant(&self) -> Option<Rational> {
        if self.terms.is_empty() {
            return Some(Rational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Mono::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    /// Iterate terms in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    /// Total degree, or 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Mono::degree).max().unwrap_or(0)
    }

    fn insert_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Multiply by a rational scalar.
    pub fn scale(&self, c: &Rational) -> ParamPoly {
        if c.is_zero() {
            return ParamPoly::zero();
        }
        let mut out = ParamPoly::default();
        for (m, a) in &self.terms {
            out.terms.insert(m.clone(), a * c);
        }
        out
    }

    /// Integer power.
    pub fn pow(&self, e: u32) -> ParamPoly {
        let mut out = ParamPoly::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Substitute rationals for the assigned parameters; others stay formal.
    pub fn specialize(&self, assignment: &BTreeMap<Param, Rational>) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Mono::default();
            for p in Param::ALL {
                let e = m.exp(p);
                if e == 0 {
                    continue;
                }
                if let Some(v) = assignment.get(&p) {
                    for _ in 0..e {
                        coeff *= v;
                    }
                } else {
                    rest.exps[p.idx()] = e;
                }
            }
            out.insert_term(rest, coeff);
        }
        out
    }

    /// Substitute a polynomial for each assigned parameter; others stay formal.
    pub fn subst(&self, assignment: &BTreeMap<Param, ParamPoly>) -> ParamPoly {
        let mut out = ParamPoly::zero();
        for (m, c) in &self.terms {
            let mut term = ParamPoly::constant(c.clone());
            for p in Param::ALL {
                let e = m.exp(p);
                if e == 0 {
                    continue;
                }
                let factor = assignment
                    .get(&p)
                    .cloned()
                    .unwrap_or_else(|| ParamPoly::param(p));
                term = &term * &factor.pow(e as u32);
            }
            out = &out + &term;
        }
        out
    }
}

impl Add for &ParamPoly {
    type Output = ParamPoly;
    fn add(self, rhs: &ParamPoly) -> ParamPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &ParamPoly {
    type Output = ParamPoly;
    fn sub(self, rhs: &ParamPoly) -> ParamPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &ParamPoly {
    type Output = ParamPoly;
    fn neg(self) -> ParamPoly {
        let mut out = ParamPoly::default();
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &ParamPoly {
    type Output = ParamPoly;
    fn mul(self, rhs: &ParamPoly) -> ParamPoly {
        let mut out = ParamPoly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.insert_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
                first = false;
            } else if neg {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if m.is_one() {
                write!(f, "{}", abs)?;
            } else if abs.is_one() {
                write!(f, "{}", m)?;
            } else {
                write!(f, "{}*{}", abs, m)?;
            }
        }
        Ok(())
    }
}

/// Falling factorial a^(r) = a(a-1)(a-2)...(a-r+1), with a^(0) = 1.
pub fn ffact(a: &ParamPoly, r: u32) -> ParamPoly {
    let mut out = ParamPoly::one();
    for k in 0..r {
        let factor = a - &ParamPoly::int(k as i64);
        out = &out * &factor;
    }
    out
}

/// Falling factorial on plain integers, a^(0) = 1.
pub fn ffact_int(a: i64, r: u32) -> i64 {
    let mut out = 1i64;
    for k in 0..r {
        out *= a - k as i64;
    }
    out
}

/// Binomial coefficient with integer arguments, zero for k > n.
pub fn binom(n: u32, k: u32) -> Rational {
    if k > n {
        return Rational::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for s in 0..k {
        num *= BigInt::from(n - s);
        den *= BigInt::from(s + 1);
    }
    Rational::new(num, den)
}
