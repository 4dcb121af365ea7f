//! Bracket engine for the nullity-two toroidal Lie algebra over a simple
//! coefficient algebra.
//!
//! Elements are finite sums of canonical symbols with `ParamPoly`
//! coefficients: loops `t0^{m0} t1^{m1} (x)` for a basis element `x` of the
//! simple algebra, the one-form classes `k0`, `k1` and `kmn(m, n)`, and the
//! raw derivations `t0^{m0} t1^{m1} d_i`.  The one-form part of every result
//! is reduced to the standard basis (`k0`, `k1`, and `kmn` away from the
//! origin), so equality of elements is literal equality of coefficient maps.
//!
//! The simple algebra is described by structure constants.  `sl2` ships as a
//! builtin; arbitrary algebras can be loaded from a TOML file and are
//! validated (antisymmetry, the Jacobi identity, form symmetry and
//! invariance, root triple normalization) before use.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::path::Path;
use std::str::FromStr;

use num::{One, Signed, Zero};
use serde::Deserialize;
use thiserror::Error;

use crate::scalar::{rat, ratq, Param, ParamPoly, Rational};

/// Errors from structure-constant handling and name lookup.
#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid structure constants: {0}")]
    Invalid(String),
    #[error("unknown algebra name: {0}")]
    UnknownAlgebra(String),
    #[error("no root triple with index {0}")]
    UnknownRoot(usize),
}

/// A distinguished `sl2`-triple inside the simple algebra, together with the
/// normalization constant `epsilon = <e, f> = <h, h> / 2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootTriple {
    pub e: u8,
    pub h: u8,
    pub f: u8,
    pub epsilon: Rational,
}

/// A finite-dimensional Lie algebra given by structure constants, with an
/// invariant symmetric bilinear form and a list of root triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleAlgebra {
    name: String,
    basis: Vec<String>,
    brackets: Vec<Vec<Vec<(u8, Rational)>>>,
    form: Vec<Vec<Rational>>,
    roots: Vec<RootTriple>,
}

#[derive(Deserialize)]
struct AlgebraFile {
    name: String,
    basis: Vec<String>,
    #[serde(default)]
    bracket: Vec<BracketRow>,
    #[serde(default)]
    form: Vec<FormRow>,
    #[serde(default)]
    root: Vec<RootRow>,
}

#[derive(Deserialize)]
struct BracketRow {
    left: String,
    right: String,
    result: Vec<(String, String)>,
}

#[derive(Deserialize)]
struct FormRow {
    left: String,
    right: String,
    value: String,
}

#[derive(Deserialize)]
struct RootRow {
    e: String,
    h: String,
    f: String,
}

fn parse_rational(s: &str) -> Result<Rational, AlgebraError> {
    Rational::from_str(s.trim())
        .map_err(|e| AlgebraError::Parse(format!("bad rational {:?}: {}", s, e)))
}

impl SimpleAlgebra {
    /// Builds and validates an algebra from index-based structure data.
    /// Bracket rows list `[x_i, x_j]` as `(i, j, [(k, c), ...])`; missing
    /// opposite pairs are filled by antisymmetry.
    pub fn from_parts(
        name: String,
        basis: Vec<String>,
        brackets: Vec<(usize, usize, Vec<(usize, Rational)>)>,
        form: Vec<(usize, usize, Rational)>,
        roots: Vec<(usize, usize, usize)>,
    ) -> Result<SimpleAlgebra, AlgebraError> {
        let dim = basis.len();
        if dim == 0 || dim > 255 {
            return Err(AlgebraError::Invalid(format!(
                "basis size {} out of range 1..=255",
                dim
            )));
        }
        let mut seen = BTreeSet::new();
        for b in &basis {
            if b.is_empty() {
                return Err(AlgebraError::Invalid("empty basis name".into()));
            }
            if !seen.insert(b.clone()) {
                return Err(AlgebraError::Invalid(format!("duplicate basis name {:?}", b)));
            }
        }

        let normalize = |v: Vec<(usize, Rational)>| -> Result<Vec<(u8, Rational)>, AlgebraError> {
            let mut acc: BTreeMap<u8, Rational> = BTreeMap::new();
            for (k, c) in v {
                if k >= dim {
                    return Err(AlgebraError::Invalid(format!(
                        "basis index {} out of range",
                        k
                    )));
                }
                let e = acc.entry(k as u8).or_insert_with(Rational::zero);
                *e += c;
            }
            Ok(acc.into_iter().filter(|(_, c)| !c.is_zero()).collect())
        };

        let mut table: Vec<Vec<Option<Vec<(u8, Rational)>>>> = vec![vec![None; dim]; dim];
        for (i, j, v) in brackets {
            if i >= dim || j >= dim {
                return Err(AlgebraError::Invalid(format!(
                    "bracket row indices ({}, {}) out of range",
                    i, j
                )));
            }
            if table[i][j].is_some() {
                return Err(AlgebraError::Invalid(format!(
                    "duplicate bracket row for ({}, {})",
                    basis[i], basis[j]
                )));
            }
            table[i][j] = Some(normalize(v)?);
        }
        for i in 0..dim {
            if let Some(v) = &table[i][i] {
                if !v.is_empty() {
                    return Err(AlgebraError::Invalid(format!(
                        "[{x}, {x}] must vanish",
                        x = basis[i]
                    )));
                }
            }
            table[i][i] = Some(Vec::new());
        }
        let negate =
            |v: &[(u8, Rational)]| -> Vec<(u8, Rational)> { v.iter().map(|(k, c)| (*k, -c)).collect() };
        for i in 0..dim {
            for j in (i + 1)..dim {
                match (table[i][j].clone(), table[j][i].clone()) {
                    (Some(a), Some(b)) => {
                        if negate(&a) != b {
                            return Err(AlgebraError::Invalid(format!(
                                "brackets for ({x}, {y}) and ({y}, {x}) are not antisymmetric",
                                x = basis[i],
                                y = basis[j]
                            )));
                        }
                    }
                    (Some(a), None) => table[j][i] = Some(negate(&a)),
                    (None, Some(b)) => table[i][j] = Some(negate(&b)),
                    (None, None) => {
                        table[i][j] = Some(Vec::new());
                        table[j][i] = Some(Vec::new());
                    }
                }
            }
        }
        let bk: Vec<Vec<Vec<(u8, Rational)>>> = table
            .into_iter()
            .map(|row| row.into_iter().map(|v| v.unwrap()).collect())
            .collect();

        // Jacobi identity over all basis triples.
        for i in 0..dim {
            for j in (i + 1)..dim {
                for k in (j + 1)..dim {
                    let mut acc = vec![Rational::zero(); dim];
                    for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                        for (w, cw) in &bk[a][b] {
                            for (x, cx) in &bk[*w as usize][c] {
                                acc[*x as usize] += cw * cx;
                            }
                        }
                    }
                    if acc.iter().any(|c| !c.is_zero()) {
                        return Err(AlgebraError::Invalid(format!(
                            "Jacobi identity fails on ({}, {}, {})",
                            basis[i], basis[j], basis[k]
                        )));
                    }
                }
            }
        }

        let mut fm = vec![vec![Rational::zero(); dim]; dim];
        let mut given = vec![vec![false; dim]; dim];
        for (i, j, c) in form {
            if i >= dim || j >= dim {
                return Err(AlgebraError::Invalid(format!(
                    "form row indices ({}, {}) out of range",
                    i, j
                )));
            }
            if given[i][j] {
                return Err(AlgebraError::Invalid(format!(
                    "duplicate form row for ({}, {})",
                    basis[i], basis[j]
                )));
            }
            given[i][j] = true;
            fm[i][j] = c;
        }
        for i in 0..dim {
            for j in 0..dim {
                if given[i][j] && given[j][i] && fm[i][j] != fm[j][i] {
                    return Err(AlgebraError::Invalid(format!(
                        "form is not symmetric on ({}, {})",
                        basis[i], basis[j]
                    )));
                }
                if given[i][j] && !given[j][i] {
                    fm[j][i] = fm[i][j].clone();
                    given[j][i] = true;
                }
            }
        }
        // Invariance <[x, y], z> = <x, [y, z]> over all basis triples.
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let mut lhs = Rational::zero();
                    for (w, c) in &bk[i][j] {
                        lhs += c * &fm[*w as usize][k];
                    }
                    let mut rhs = Rational::zero();
                    for (w, c) in &bk[j][k] {
                        rhs += c * &fm[i][*w as usize];
                    }
                    if lhs != rhs {
                        return Err(AlgebraError::Invalid(format!(
                            "form is not invariant on ({}, {}, {})",
                            basis[i], basis[j], basis[k]
                        )));
                    }
                }
            }
        }

        let mut rts = Vec::new();
        for (e, h, f) in roots {
            if e >= dim || h >= dim || f >= dim {
                return Err(AlgebraError::Invalid("root triple index out of range".into()));
            }
            let expect = |got: &[(u8, Rational)], want: Vec<(u8, Rational)>, what: &str| {
                if got != want.as_slice() {
                    Err(AlgebraError::Invalid(format!("root triple: {} fails", what)))
                } else {
                    Ok(())
                }
            };
            expect(&bk[e][f], vec![(h as u8, rat(1))], "[e, f] = h")?;
            expect(&bk[h][e], vec![(e as u8, rat(2))], "[h, e] = 2e")?;
            expect(&bk[h][f], vec![(f as u8, rat(-2))], "[h, f] = -2f")?;
            let eps = fm[e][f].clone();
            if eps.is_zero() {
                return Err(AlgebraError::Invalid("root triple: <e, f> vanishes".into()));
            }
            if fm[h][h] != rat(2) * &eps {
                return Err(AlgebraError::Invalid(
                    "root triple: <h, h> differs from 2<e, f>".into(),
                ));
            }
            rts.push(RootTriple {
                e: e as u8,
                h: h as u8,
                f: f as u8,
                epsilon: eps,
            });
        }

        Ok(SimpleAlgebra {
            name,
            basis,
            brackets: bk,
            form: fm,
            roots: rts,
        })
    }

    /// The builtin `sl2` with basis `e, h, f`, `[e, f] = h`, `[h, e] = 2e`,
    /// `[h, f] = -2f`, `<e, f> = 1`, `<h, h> = 2`, and one root triple.
    pub fn sl2() -> SimpleAlgebra {
        SimpleAlgebra::from_parts(
            "sl2".into(),
            vec!["e".into(), "h".into(), "f".into()],
            vec![
                (0, 2, vec![(1, rat(1))]),
                (1, 0, vec![(0, rat(2))]),
                (1, 2, vec![(2, rat(-2))]),
            ],
            vec![(0, 2, rat(1)), (1, 1, rat(2))],
            vec![(0, 1, 2)],
        )
        .expect("builtin sl2 structure constants are valid")
    }

    /// Loads an algebra from TOML text.  Rationals are written as strings
    /// such as `"2"` or `"-1/2"`; see `data/sl2.toml` for the layout.
    pub fn from_toml_str(text: &str) -> Result<SimpleAlgebra, AlgebraError> {
        let file: AlgebraFile =
            toml::from_str(text).map_err(|e| AlgebraError::Parse(e.to_string()))?;
        let index: BTreeMap<&str, usize> = file
            .basis
            .iter()
            .enumerate()
            .map(|(i, b)| (b.as_str(), i))
            .collect();
        let look = |s: &str| -> Result<usize, AlgebraError> {
            index
                .get(s)
                .copied()
                .ok_or_else(|| AlgebraError::Parse(format!("unknown basis symbol {:?}", s)))
        };
        let mut brackets = Vec::new();
        for row in &file.bracket {
            let mut v = Vec::new();
            for (name, c) in &row.result {
                v.push((look(name)?, parse_rational(c)?));
            }
            brackets.push((look(&row.left)?, look(&row.right)?, v));
        }
        let mut form = Vec::new();
        for row in &file.form {
            form.push((look(&row.left)?, look(&row.right)?, parse_rational(&row.value)?));
        }
        let mut roots = Vec::new();
        for row in &file.root {
            roots.push((look(&row.e)?, look(&row.h)?, look(&row.f)?));
        }
        SimpleAlgebra::from_parts(file.name, file.basis, brackets, form, roots)
    }

    /// Loads an algebra from a TOML file.
    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<SimpleAlgebra, AlgebraError> {
        SimpleAlgebra::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis_names(&self) -> &[String] {
        &self.basis
    }

    pub fn basis_name(&self, i: u8) -> &str {
        &self.basis[i as usize]
    }

    pub fn index_of(&self, name: &str) -> Option<u8> {
        self.basis.iter().position(|b| b == name).map(|i| i as u8)
    }

    /// Expansion of `[x_i, x_j]` over the basis.
    pub fn bracket_basis(&self, i: u8, j: u8) -> &[(u8, Rational)] {
        &self.brackets[i as usize][j as usize]
    }

    /// The bilinear form `<x_i, x_j>`.
    pub fn form(&self, i: u8, j: u8) -> &Rational {
        &self.form[i as usize][j as usize]
    }

    pub fn roots(&self) -> &[RootTriple] {
        &self.roots
    }
}

/// A canonical symbol.  The declaration order fixes the display order of
/// terms: loops, then derivations, then one-form classes.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum TorSym {
    /// `t0^{m0} t1^{m1}` times the simple-algebra basis element `u`.
    Loop { m0: i64, m1: i64, u: u8 },
    /// `t0^{m0} t1^{m1} d_i` with `i` in `{0, 1}`.
    Der { m0: i64, m1: i64, i: u8 },
    /// The one-form class `kmn(m0, m1)`; the origin is never stored.
    Kmn { m0: i64, m1: i64 },
    K0,
    K1,
}

/// An element: a finite coefficient map over canonical symbols.  Zero
/// coefficients and the vanishing class `kmn(0, 0)` are never stored.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct TorElem {
    terms: BTreeMap<TorSym, ParamPoly>,
}

impl TorElem {
    pub fn zero() -> TorElem {
        TorElem::default()
    }

    /// A single symbol with coefficient 1.
    pub fn from_sym(s: TorSym) -> TorElem {
        TorElem::term(s, ParamPoly::one())
    }

    /// A single symbol with the given coefficient.
    pub fn term(s: TorSym, c: ParamPoly) -> TorElem {
        let mut x = TorElem::zero();
        x.add_term(s, c);
        x
    }

    pub fn loop_gen(m0: i64, m1: i64, u: u8) -> TorElem {
        TorElem::from_sym(TorSym::Loop { m0, m1, u })
    }

    pub fn der_gen(m0: i64, m1: i64, i: u8) -> TorElem {
        TorElem::from_sym(TorSym::Der { m0, m1, i })
    }

    pub fn k0() -> TorElem {
        TorElem::from_sym(TorSym::K0)
    }

    pub fn k1() -> TorElem {
        TorElem::from_sym(TorSym::K1)
    }

    /// The basis class `kmn(m0, m1)`; the origin gives the zero element.
    pub fn kmn(m0: i64, m1: i64) -> TorElem {
        if (m0, m1) == (0, 0) {
            TorElem::zero()
        } else {
            TorElem::from_sym(TorSym::Kmn { m0, m1 })
        }
    }

    /// Adds `c` times the symbol, dropping zero sums and `kmn(0, 0)`.
    pub fn add_term(&mut self, s: TorSym, c: ParamPoly) {
        if c.is_zero() {
            return;
        }
        if let TorSym::Kmn { m0: 0, m1: 0 } = s {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(s) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, s: &TorSym) -> Option<&ParamPoly> {
        self.terms.get(s)
    }

    /// Iterate terms in canonical symbol order.
    pub fn iter(&self) -> impl Iterator<Item = (&TorSym, &ParamPoly)> {
        self.terms.iter()
    }

    /// Multiply by a coefficient polynomial.
    pub fn scale(&self, c: &ParamPoly) -> TorElem {
        let mut out = TorElem::zero();
        for (s, v) in self.iter() {
            out.add_term(*s, v * c);
        }
        out
    }

    /// Multiply by a rational scalar.
    pub fn scale_rat(&self, c: &Rational) -> TorElem {
        let mut out = TorElem::zero();
        for (s, v) in self.iter() {
            out.add_term(*s, v.scale(c));
        }
        out
    }

    /// Multiply by an integer.
    pub fn times(&self, n: i64) -> TorElem {
        self.scale_rat(&rat(n))
    }

    /// Substitute rational values for parameters in every coefficient.
    pub fn specialize(&self, assignment: &BTreeMap<Param, Rational>) -> TorElem {
        let mut out = TorElem::zero();
        for (s, v) in self.iter() {
            out.add_term(*s, v.specialize(assignment));
        }
        out
    }

    /// The element with all one-form terms removed.
    pub fn without_k(&self) -> TorElem {
        let mut out = TorElem::zero();
        for (s, v) in self.iter() {
            match s {
                TorSym::K0 | TorSym::K1 | TorSym::Kmn { .. } => {}
                _ => out.add_term(*s, v.clone()),
            }
        }
        out
    }
}

impl Add for &TorElem {
    type Output = TorElem;

    fn add(self, other: &TorElem) -> TorElem {
        let mut out = self.clone();
        for (s, v) in other.iter() {
            out.add_term(*s, v.clone());
        }
        out
    }
}

impl AddAssign<&TorElem> for TorElem {
    fn add_assign(&mut self, other: &TorElem) {
        for (s, v) in other.iter() {
            self.add_term(*s, v.clone());
        }
    }
}

impl Sub for &TorElem {
    type Output = TorElem;

    fn sub(self, other: &TorElem) -> TorElem {
        let mut out = self.clone();
        for (s, v) in other.iter() {
            out.add_term(*s, -v);
        }
        out
    }
}

impl Neg for &TorElem {
    type Output = TorElem;

    fn neg(self) -> TorElem {
        let mut out = TorElem::zero();
        for (s, v) in self.iter() {
            out.add_term(*s, -v);
        }
        out
    }
}

/// Expands `a t0^m t1^n k0 + b t0^m t1^n k1` over the one-form basis:
/// `(a n - b m) kmn(m, n)` away from the origin, `a k0 + b k1` at it.
pub fn reduce_k(m: i64, n: i64, a: &ParamPoly, b: &ParamPoly) -> TorElem {
    let mut out = TorElem::zero();
    if (m, n) == (0, 0) {
        out.add_term(TorSym::K0, a.clone());
        out.add_term(TorSym::K1, b.clone());
    } else {
        out.add_term(TorSym::Kmn { m0: m, m1: n }, &a.scale(&rat(n)) - &b.scale(&rat(m)));
    }
    out
}

/// The skew derivation `m0 t0^{m0} t1^{m1} d1 - m1 t0^{m0} t1^{m1} d0`.
pub fn dtilde(m0: i64, m1: i64) -> TorElem {
    let mut out = TorElem::zero();
    out.add_term(TorSym::Der { m0, m1, i: 1 }, ParamPoly::int(m0));
    out.add_term(TorSym::Der { m0, m1, i: 0 }, ParamPoly::int(-m1));
    out
}

/// The shifted skew derivation `(n+1) t0^n t1^m d1 - m t0^n t1^m d0`.
pub fn dbar(n: i64, m: i64) -> TorElem {
    let mut out = TorElem::zero();
    out.add_term(TorSym::Der { m0: n, m1: m, i: 1 }, ParamPoly::int(n + 1));
    out.add_term(TorSym::Der { m0: n, m1: m, i: 0 }, ParamPoly::int(-m));
    out
}

/// `dbar(n, m)` plus its one-form correction `mu (n + 1/2) m^2 kmn(n, m)`.
pub fn dvar(n: i64, m: i64) -> TorElem {
    let a = ParamPoly::param(Param::Mu).scale(&(rat(m) * ratq(2 * n + 1, 2)));
    &dbar(n, m) + &reduce_k(n, m, &a, &ParamPoly::zero())
}

fn sym_grade(s: &TorSym) -> (i64, i64) {
    match *s {
        TorSym::Loop { m0, m1, .. } => (-m0, m1),
        TorSym::Der { m0, m1, .. } => (-m0, m1),
        TorSym::Kmn { m0, m1 } => (-m0, m1),
        TorSym::K0 | TorSym::K1 => (0, 0),
    }
}

/// The bidegree of a homogeneous element: eigenvalues under the adjoint
/// action of `-d0` and of `d1`.  Mixed elements have no bidegree; the zero
/// element reports `(0, 0)`.
pub fn grade(x: &TorElem) -> Option<(i64, i64)> {
    let mut it = x.iter();
    let first = match it.next() {
        None => return Some((0, 0)),
        Some((s, _)) => sym_grade(s),
    };
    for (s, _) in it {
        if sym_grade(s) != first {
            return None;
        }
    }
    Some(first)
}

/// The named subalgebras recognized by `membership`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Subalgebra {
    /// The whole algebra.
    Full,
    /// Loops plus one-forms, no derivations.
    Toroidal,
    /// Divergence-zero derivations only.
    Ddiv,
    /// The derived subalgebra of `Ddiv`.
    Ddiv1,
    /// Loops, one-forms, and `Ddiv`.
    Ttilde,
    /// Loops, one-forms, and the derived subalgebra of `Ddiv` extended by `d1`.
    That,
    /// Derivations with zero shifted divergence (free basis `t0^{-1} d0, d1`).
    DdivPrime,
    /// The derived subalgebra of `DdivPrime`.
    DdivPrime1,
    /// Loops, one-forms, and `DdivPrime`.
    TtildeO,
    /// Loops, one-forms, and the derived subalgebra of `DdivPrime` extended
    /// by `t0^{-1} d1`.
    ThatO,
}

/// Parses a subalgebra name.  Case-insensitive; accepts a prime written as
/// `'` or a prime character, and `-o` written as a degree sign.
pub fn parse_subalgebra(name: &str) -> Result<Subalgebra, AlgebraError> {
    let s = name
        .trim()
        .to_lowercase()
        .replace('\u{2032}', "'")
        .replace('\u{00b0}', "-o")
        .replace(' ', "")
        .replace("(1)", "1");
    Ok(match s.as_str() {
        "full" => Subalgebra::Full,
        "toroidal" => Subalgebra::Toroidal,
        "ddiv" => Subalgebra::Ddiv,
        "ddiv1" => Subalgebra::Ddiv1,
        "ttilde" | "t~" => Subalgebra::Ttilde,
        "that" | "t^" => Subalgebra::That,
        "ddiv'" => Subalgebra::DdivPrime,
        "ddiv'1" => Subalgebra::DdivPrime1,
        "ttilde-o" | "ttildeo" => Subalgebra::TtildeO,
        "that-o" | "thato" => Subalgebra::ThatO,
        _ => return Err(AlgebraError::UnknownAlgebra(name.into())),
    })
}

/// Tests whether `x` lies in the named subalgebra.
pub fn membership(x: &TorElem, algebra: &str) -> Result<bool, AlgebraError> {
    let which = parse_subalgebra(algebra)?;
    let mut has_loop = false;
    let mut has_k = false;
    let mut der: BTreeMap<(i64, i64), (ParamPoly, ParamPoly)> = BTreeMap::new();
    for (s, c) in x.iter() {
        match *s {
            TorSym::Loop { .. } => has_loop = true,
            TorSym::K0 | TorSym::K1 | TorSym::Kmn { .. } => has_k = true,
            TorSym::Der { m0, m1, i } => {
                let e = der.entry((m0, m1)).or_default();
                if i == 0 {
                    e.0 = c.clone();
                } else {
                    e.1 = c.clone();
                }
            }
        }
    }
    // Divergence conditions per bidegree: the coefficient pair (c0, c1) of
    // t0^{m0} t1^{m1} d0 and d1 must satisfy m0 c0 + m1 c1 = 0, or the
    // shifted variant (m0 + 1) c0 + m1 c1 = 0.
    let ddiv = der
        .iter()
        .all(|((m0, m1), (c0, c1))| (&c0.scale(&rat(*m0)) + &c1.scale(&rat(*m1))).is_zero());
    let ddiv_p = der
        .iter()
        .all(|((m0, m1), (c0, c1))| (&c0.scale(&rat(*m0 + 1)) + &c1.scale(&rat(*m1))).is_zero());
    let absent = |key: (i64, i64)| der.get(&key).map_or(true, |(c0, c1)| c0.is_zero() && c1.is_zero());
    let d0_absent = |key: (i64, i64)| der.get(&key).map_or(true, |(c0, _)| c0.is_zero());
    let pure_der = !has_loop && !has_k;
    Ok(match which {
        Subalgebra::Full => true,
        Subalgebra::Toroidal => der.is_empty(),
        Subalgebra::Ddiv => pure_der && ddiv,
        Subalgebra::Ddiv1 => pure_der && ddiv && absent((0, 0)),
        Subalgebra::Ttilde => ddiv,
        Subalgebra::That => ddiv && d0_absent((0, 0)),
        Subalgebra::DdivPrime => pure_der && ddiv_p,
        Subalgebra::DdivPrime1 => pure_der && ddiv_p && absent((-1, 0)),
        Subalgebra::TtildeO => ddiv_p,
        Subalgebra::ThatO => ddiv_p && d0_absent((-1, 0)),
    })
}

/// A generator of the affine algebra being embedded by `Toroidal::rho`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AffineGen {
    E(i64),
    F(i64),
    H(i64),
    Central,
}

/// Raw generator forms used internally by the bracket: a loop,
/// `t0^{m0} t1^{m1} k_j`, or `t0^{m0} t1^{m1} d_i`.
#[derive(Clone, Copy)]
enum Raw {
    L { m0: i64, m1: i64, u: u8 },
    K { m0: i64, m1: i64, j: u8 },
    D { m0: i64, m1: i64, i: u8 },
}

fn raw_form(sym: TorSym) -> (Rational, Raw) {
    match sym {
        TorSym::Loop { m0, m1, u } => (Rational::one(), Raw::L { m0, m1, u }),
        TorSym::K0 => (Rational::one(), Raw::K { m0: 0, m1: 0, j: 0 }),
        TorSym::K1 => (Rational::one(), Raw::K { m0: 0, m1: 0, j: 1 }),
        TorSym::Kmn { m0, m1 } => {
            if m1 != 0 {
                (ratq(1, m1), Raw::K { m0, m1, j: 0 })
            } else {
                (ratq(-1, m0), Raw::K { m0, m1: 0, j: 1 })
            }
        }
        TorSym::Der { m0, m1, i } => (Rational::one(), Raw::D { m0, m1, i }),
    }
}

/// Bracket engine bound to a fixed simple coefficient algebra.
pub struct Toroidal {
    g: SimpleAlgebra,
}

impl Toroidal {
    pub fn new(g: SimpleAlgebra) -> Toroidal {
        Toroidal { g }
    }

    pub fn sl2() -> Toroidal {
        Toroidal::new(SimpleAlgebra::sl2())
    }

    pub fn algebra(&self) -> &SimpleAlgebra {
        &self.g
    }

    /// The Lie bracket, bilinear over coefficient polynomials, with the
    /// one-form part of the result reduced to the basis.
    pub fn bracket(&self, x: &TorElem, y: &TorElem) -> TorElem {
        let mut out = TorElem::zero();
        for (sx, cx) in x.iter() {
            let (rx, raw_x) = raw_form(*sx);
            for (sy, cy) in y.iter() {
                let (ry, raw_y) = raw_form(*sy);
                let part = self.bracket_raw(raw_x, raw_y);
                if part.is_zero() {
                    continue;
                }
                let c = (cx * cy).scale(&(rx.clone() * &ry));
                if c.is_zero() {
                    continue;
                }
                out += &part.scale(&c);
            }
        }
        out
    }

    fn bracket_raw(&self, x: Raw, y: Raw) -> TorElem {
        match (x, y) {
            (Raw::K { .. }, Raw::K { .. })
            | (Raw::L { .. }, Raw::K { .. })
            | (Raw::K { .. }, Raw::L { .. }) => TorElem::zero(),
            (Raw::L { m0, m1, u }, Raw::L { m0: n0, m1: n1, u: v }) => {
                let mut out = TorElem::zero();
                for (w, c) in self.g.bracket_basis(u, v) {
                    out.add_term(
                        TorSym::Loop { m0: m0 + n0, m1: m1 + n1, u: *w },
                        ParamPoly::constant(c.clone()),
                    );
                }
                let pairing = self.g.form(u, v);
                if !pairing.is_zero() {
                    let a = ParamPoly::constant(pairing * &rat(m0));
                    let b = ParamPoly::constant(pairing * &rat(m1));
                    out += &reduce_k(m0 + n0, m1 + n1, &a, &b);
                }
                out
            }
            (Raw::D { m0, m1, i }, Raw::L { m0: n0, m1: n1, u }) => {
                let ni = if i == 0 { n0 } else { n1 };
                TorElem::term(
                    TorSym::Loop { m0: m0 + n0, m1: m1 + n1, u },
                    ParamPoly::int(ni),
                )
            }
            (Raw::L { .. }, Raw::D { .. }) | (Raw::K { .. }, Raw::D { .. }) => {
                -&self.bracket_raw(y, x)
            }
            (Raw::D { m0, m1, i }, Raw::K { m0: n0, m1: n1, j }) => {
                let ni = if i == 0 { n0 } else { n1 };
                let mut a = ParamPoly::int(if j == 0 { ni } else { 0 });
                let mut b = ParamPoly::int(if j == 1 { ni } else { 0 });
                if i == j {
                    a = &a + &ParamPoly::int(m0);
                    b = &b + &ParamPoly::int(m1);
                }
                reduce_k(m0 + n0, m1 + n1, &a, &b)
            }
            (Raw::D { m0, m1, i }, Raw::D { m0: n0, m1: n1, i: j }) => {
                let ni = if i == 0 { n0 } else { n1 };
                let mj = if j == 0 { m0 } else { m1 };
                let mut out = TorElem::zero();
                out.add_term(TorSym::Der { m0: m0 + n0, m1: m1 + n1, i: j }, ParamPoly::int(ni));
                out.add_term(TorSym::Der { m0: m0 + n0, m1: m1 + n1, i }, ParamPoly::int(-mj));
                let c = ParamPoly::param(Param::Mu).scale(&rat(-mj * ni));
                if !c.is_zero() {
                    out += &reduce_k(m0 + n0, m1 + n1, &c.scale(&rat(m0)), &c.scale(&rat(m1)));
                }
                out
            }
        }
    }

    /// `[[x, y], z] + [[y, z], x] + [[z, x], y]`; zero for every input.
    pub fn jacobi_residual(&self, x: &TorElem, y: &TorElem, z: &TorElem) -> TorElem {
        let a = self.bracket(&self.bracket(x, y), z);
        let b = self.bracket(&self.bracket(y, z), x);
        let c = self.bracket(&self.bracket(z, x), y);
        &(&a + &b) + &c
    }

    /// The embedding of the affine algebra attached to root triple `root`
    /// at winding index `m`: `t^n e` goes to the loop `t0^n t1^m (e)`,
    /// `t^n f` to `t0^n t1^{-m} (f)`, `t^n h` to `t0^n (h + m epsilon k1)`,
    /// and the canonical central element to `epsilon k0`.
    pub fn rho(&self, m: i64, root: usize, gen: AffineGen) -> Result<TorElem, AlgebraError> {
        let rt = self
            .g
            .roots()
            .get(root)
            .ok_or(AlgebraError::UnknownRoot(root))?;
        Ok(match gen {
            AffineGen::E(n) => TorElem::loop_gen(n, m, rt.e),
            AffineGen::F(n) => TorElem::loop_gen(n, -m, rt.f),
            AffineGen::H(n) => {
                let c = ParamPoly::constant(rt.epsilon.clone() * rat(m));
                &TorElem::loop_gen(n, 0, rt.h) + &reduce_k(n, 0, &ParamPoly::zero(), &c)
            }
            AffineGen::Central => TorElem::term(TorSym::K0, ParamPoly::constant(rt.epsilon.clone())),
        })
    }

    /// Canonical text form of an element; see `show_elem`.
    pub fn show(&self, x: &TorElem) -> String {
        show_elem(x, &self.g)
    }
}

fn sym_text(s: &TorSym, g: &SimpleAlgebra) -> String {
    match *s {
        TorSym::Loop { m0, m1, u } => format!("loop({},{},{})", m0, m1, g.basis_name(u)),
        TorSym::Der { m0, m1, i } => format!("der({},{},{})", m0, m1, i),
        TorSym::Kmn { m0, m1 } => format!("kmn({},{})", m0, m1),
        TorSym::K0 => "k0".into(),
        TorSym::K1 => "k1".into(),
    }
}

fn coeff_text(c: &ParamPoly) -> (bool, String) {
    let terms: Vec<_> = c.iter().collect();
    if terms.len() == 1 {
        let (m, r) = terms[0];
        let neg = r.is_negative();
        let abs = r.abs();
        let text = if m.is_one() {
            if abs.is_one() {
                String::new()
            } else {
                abs.to_string()
            }
        } else if abs.is_one() {
            m.to_string()
        } else {
            format!("{}*{}", abs, m)
        };
        (neg, text)
    } else {
        (false, format!("({})", c))
    }
}

/// Canonical text form of an element.  Derivation pairs proportional to a
/// skew derivation print as `dtilde(m0, m1)`; all other symbols print in
/// expression-grammar form (`loop`, `der`, `kmn`, `k0`, `k1`).
pub fn show_elem(x: &TorElem, g: &SimpleAlgebra) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let mut parts: Vec<(String, ParamPoly)> = Vec::new();
    let mut iter = x.iter().peekable();
    while let Some((s, c)) = iter.next() {
        if let TorSym::Der { m0, m1, i: 0 } = *s {
            if m0 != 0 && m1 != 0 {
                let mate = TorSym::Der { m0, m1, i: 1 };
                if let Some((s2, c2)) = iter.peek() {
                    if **s2 == mate && (&c.scale(&rat(m0)) + &c2.scale(&rat(m1))).is_zero() {
                        parts.push((format!("dtilde({},{})", m0, m1), c.scale(&ratq(-1, m1))));
                        iter.next();
                        continue;
                    }
                }
            }
        }
        parts.push((sym_text(s, g), c.clone()));
    }
    let mut out = String::new();
    for (idx, (sym, c)) in parts.iter().enumerate() {
        let (neg, mag) = coeff_text(c);
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if mag.is_empty() {
            out.push_str(sym);
        } else {
            out.push_str(&mag);
            out.push('*');
            out.push_str(sym);
        }
    }
    out
}

impl fmt::Display for TorSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TorSym::Loop { m0, m1, u } => write!(f, "loop({},{},#{})", m0, m1, u),
            TorSym::Der { m0, m1, i } => write!(f, "der({},{},{})", m0, m1, i),
            TorSym::Kmn { m0, m1 } => write!(f, "kmn({},{})", m0, m1),
            TorSym::K0 => f.write_str("k0"),
            TorSym::K1 => f.write_str("k1"),
        }
    }
}
