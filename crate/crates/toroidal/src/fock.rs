//! Free field realization on a rank two Heisenberg lattice space.
//!
//! The carrier algebra here is the twisted Virasoro affine algebra `fbar`:
//! loops over the one dimensional extension `f = g + C I` of the finite
//! algebra, a Virasoro family `L(m)`, and four central symbols `k`, `k_I`,
//! `k_VI`, `k_Vir`.  Its Fock module, tensored with the lattice module of the
//! rank two Heisenberg pair `bk`, `bd` (with `<bk,bk> = <bd,bd> = 0` and
//! `<bk,bd> = 1` and markers `e^{(alpha+r)bk}`), becomes a module for the full
//! toroidal algebra through five explicit field families:
//!
//! * `sum_j (t0^j t1^n k0) z^{-j-1} = ell Y(e^{n bk},z)` for `n != 0`,
//! * `sum_j (t0^j k1) z^{-j-1} = ell Y(bk,z)`,
//! * `sum_j (t0^j t1^m (x) u) z^{-j-1} = Y(u,z) Y(e^{m bk},z)`,
//! * `sum_j (t0^j t1^m d1) z^{-j-1} = :Y(bd + m I,z) Y(e^{m bk},z):`,
//! * `sum_j (-t0^j t1^m d0 + mu (j+1/2) t0^j t1^m k0) z^{-j-2}` given by the
//!   conformal vector term `:Y(omega,z) Y(e^{m bk},z):` plus
//!   `Y(I,z) Y(m bk,z) Y(e^{m bk},z)` plus
//!   `(ell mu - 1) (d/dz Y(m bk,z)) Y(e^{m bk},z)`.
//!
//! Dropping the `I` direction and replacing the Virasoro brackets by a plain
//! central charge `24 mu ell - 2` cuts the space down to the subalgebra
//! generated by the finite algebra, `bk`, `bd`, the markers, and the conformal
//! vector.  The degree preserving map `eta` with `L(m) -> L(m) + (m+1) I(m)`
//! and `k_Vir -> k_Vir + 24 k_VI - 12 k_I` embeds that smaller picture into
//! the full one, and the restricted fields
//! `d1(z) = Y(bd,z)`, `t0^-1 d0 = -L(-1)`, and
//! `D_n(z) = n Y(omega_-1 e^{n bk},z) - d/dz Y(bd_-1 e^{n bk},z)
//!           + n (ell mu - 1) Y((n bk)_-2 e^{n bk},z)`
//! act there directly.  [`embed`] transports vectors along `eta` so the two
//! routes can be compared; [`theta_image`] records the generator states of the
//! induced vertex algebra inside the restricted space.
//!
//! Conventions.  `E^-(-m bk,z) = exp(sum_{r>=1} (m/r) bk(-r) z^r)` and
//! `E^+(-m bk,z) = exp(-sum_{r>=1} (m/r) bk(r) z^{-r})`, so that
//! `Y(e^{m bk},z)` applied to a bare marker keeps only the raising half.  A
//! normal ordered product `:A(z)B(z):` splits `A` at its mode index: modes
//! `a_n` with `n < 0` act after `B`, the rest act before.  For a weight two
//! field such as the conformal one, the operator `L(-1)` therefore belongs to
//! the right hand half.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use thiserror::Error;

use crate::genfun::Gen;
use crate::liealg::{SimpleAlgebra, TorElem, TorSym, Toroidal};
use crate::pbw::{decompose, sl2_weight_action, Letter, ModuleKind, Op};
use crate::scalar::{rat, ratq, Param, ParamPoly, Rational};

fn ell() -> ParamPoly {
    ParamPoly::param(Param::Ell)
}

fn mu() -> ParamPoly {
    ParamPoly::param(Param::Mu)
}

fn beta() -> ParamPoly {
    ParamPoly::param(Param::Beta)
}

/// Errors reported by the realization operators.
#[derive(Error, Debug, PartialEq)]
pub enum FockError {
    /// The element does not act on the requested space.
    #[error("element is not supported on this space: {0}")]
    Unsupported(String),
    /// The operation requires the other flavor of space.
    #[error("wrong space flavor: {0}")]
    Flavor(String),
}

// ---------------------------------------------------------------------------
// The abstract carrier algebra.
// ---------------------------------------------------------------------------

/// Basis symbol of the carrier algebra: loop modes over the finite algebra,
/// loop modes of the extra direction `I`, Virasoro modes, and the four
/// central symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FSym {
    /// `u(m) = t^m (x) u` with `u` a basis index of the finite algebra.
    U { m: i64, u: u8 },
    /// `I(m) = t^m (x) I`.
    I { m: i64 },
    /// `L(m) = -t^{m+1} d/dt`.
    L { m: i64 },
    /// Central symbol paired with the loop cocycle.
    K,
    /// Central symbol paired with the `I` loop cocycle.
    KI,
    /// Central symbol coupling the Virasoro and `I` directions.
    KVI,
    /// The Virasoro central symbol.
    KVir,
}

/// Linear combination of carrier algebra symbols.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FbarElem {
    terms: BTreeMap<FSym, ParamPoly>,
}

impl FbarElem {
    pub fn zero() -> FbarElem {
        FbarElem::default()
    }

    pub fn sym(s: FSym) -> FbarElem {
        let mut e = FbarElem::zero();
        e.add_sym(s, &ParamPoly::one());
        e
    }

    pub fn u_mode(m: i64, u: u8) -> FbarElem {
        FbarElem::sym(FSym::U { m, u })
    }

    pub fn i_mode(m: i64) -> FbarElem {
        FbarElem::sym(FSym::I { m })
    }

    pub fn l_mode(m: i64) -> FbarElem {
        FbarElem::sym(FSym::L { m })
    }

    pub fn add_sym(&mut self, s: FSym, c: &ParamPoly) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(s).or_insert_with(ParamPoly::zero);
        *entry = &*entry + c;
        if entry.is_zero() {
            self.terms.remove(&s);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FSym, &ParamPoly)> {
        self.terms.iter()
    }

    pub fn get(&self, s: &FSym) -> ParamPoly {
        self.terms.get(s).cloned().unwrap_or_else(ParamPoly::zero)
    }

    pub fn scale(&self, c: &ParamPoly) -> FbarElem {
        let mut out = FbarElem::zero();
        for (s, v) in &self.terms {
            out.add_sym(*s, &(v * c));
        }
        out
    }

    pub fn scale_rat(&self, c: &Rational) -> FbarElem {
        self.scale(&ParamPoly::constant(c.clone()))
    }

    pub fn times(&self, n: i64) -> FbarElem {
        self.scale(&ParamPoly::int(n))
    }
}

impl Add for &FbarElem {
    type Output = FbarElem;
    fn add(self, rhs: &FbarElem) -> FbarElem {
        let mut out = self.clone();
        for (s, c) in &rhs.terms {
            out.add_sym(*s, c);
        }
        out
    }
}

impl Sub for &FbarElem {
    type Output = FbarElem;
    fn sub(self, rhs: &FbarElem) -> FbarElem {
        self + &(-rhs)
    }
}

impl Neg for &FbarElem {
    type Output = FbarElem;
    fn neg(self) -> FbarElem {
        self.scale_rat(&rat(-1))
    }
}

fn pair_bracket(g: &SimpleAlgebra, x: FSym, y: FSym) -> FbarElem {
    let mut out = FbarElem::zero();
    match (x, y) {
        (FSym::U { m, u }, FSym::U { m: n, u: v }) => {
            for (w, c) in g.bracket_basis(u, v) {
                out.add_sym(FSym::U { m: m + n, u: *w }, &ParamPoly::constant(c.clone()));
            }
            if m + n == 0 {
                out.add_sym(FSym::K, &ParamPoly::constant(g.form(u, v).clone()).scale(&rat(m)));
            }
        }
        (FSym::I { m }, FSym::I { m: n }) => {
            if m + n == 0 {
                out.add_sym(FSym::KI, &ParamPoly::int(m));
            }
        }
        (FSym::L { m }, FSym::U { m: n, u }) => {
            out.add_sym(FSym::U { m: m + n, u }, &ParamPoly::int(-n));
        }
        (FSym::U { m: n, u }, FSym::L { m }) => {
            out.add_sym(FSym::U { m: m + n, u }, &ParamPoly::int(n));
        }
        (FSym::L { m }, FSym::I { m: n }) => {
            out.add_sym(FSym::I { m: m + n }, &ParamPoly::int(-n));
            if m + n == 0 {
                out.add_sym(FSym::KVI, &ParamPoly::int(-(m * m + m)));
            }
        }
        (FSym::I { m: n }, FSym::L { m }) => {
            out.add_sym(FSym::I { m: m + n }, &ParamPoly::int(n));
            if m + n == 0 {
                out.add_sym(FSym::KVI, &ParamPoly::int(m * m + m));
            }
        }
        (FSym::L { m }, FSym::L { m: n }) => {
            out.add_sym(FSym::L { m: m + n }, &ParamPoly::int(m - n));
            if m + n == 0 {
                out.add_sym(FSym::KVir, &ParamPoly::constant(ratq(m * m * m - m, 12)));
            }
        }
        _ => {}
    }
    out
}

/// Bracket of the carrier algebra: loop against loop produces the finite
/// bracket plus `m delta <u,v> k` (with `a b k_I` on the `I` components),
/// `[L(m), L(n)] = (m-n) L(m+n) + ((m^3-m)/12) delta k_Vir`, and
/// `[L(m), (u + a I)(n)] = -n (u + a I)(m+n) - (m^2+m) a delta k_VI`.
pub fn fbar_bracket(g: &SimpleAlgebra, x: &FbarElem, y: &FbarElem) -> FbarElem {
    let mut out = FbarElem::zero();
    for (sx, cx) in x.iter() {
        for (sy, cy) in y.iter() {
            let part = pair_bracket(g, *sx, *sy).scale(&(cx * cy));
            out = &out + &part;
        }
    }
    out
}

/// The graded embedding of the Virasoro affine subalgebra: identity on loop
/// and `k` symbols, `L(m) -> L(m) + (m+1) I(m)`, and
/// `k_Vir -> k_Vir + 24 k_VI - 12 k_I`.
pub fn eta(x: &FbarElem) -> FbarElem {
    let mut out = FbarElem::zero();
    for (s, c) in x.iter() {
        match *s {
            FSym::U { .. } | FSym::K => out.add_sym(*s, c),
            FSym::L { m } => {
                out.add_sym(FSym::L { m }, c);
                out.add_sym(FSym::I { m }, &c.scale(&rat(m + 1)));
            }
            FSym::KVir => {
                out.add_sym(FSym::KVir, c);
                out.add_sym(FSym::KVI, &c.scale(&rat(24)));
                out.add_sym(FSym::KI, &c.scale(&rat(-12)));
            }
            FSym::I { .. } | FSym::KI | FSym::KVI => {
                panic!("eta domain excludes the I direction")
            }
        }
    }
    out
}

/// Central character of the level `ell` Fock space: `k -> ell`,
/// `k_I -> 1 - mu ell`, `k_VI -> 1/2`, `k_Vir -> 12 mu ell - 2`.
/// Returns `None` on non central symbols.
pub fn gamma_ell(s: &FSym) -> Option<ParamPoly> {
    match s {
        FSym::K => Some(ell()),
        FSym::KI => Some(&ParamPoly::one() - &(&mu() * &ell())),
        FSym::KVI => Some(ParamPoly::constant(ratq(1, 2))),
        FSym::KVir => Some(&(&mu() * &ell()).scale(&rat(12)) - &ParamPoly::int(2)),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Fock vectors.
// ---------------------------------------------------------------------------

/// Creation letter on the carrier algebra side of a basis monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FLet {
    /// `u(m)` with `m < 0`.
    G { m: i64, u: u8 },
    /// `I(m)` with `m < 0` (full flavor only).
    I { m: i64 },
    /// `L(m)` with `m <= -2` over a vacuum, `m <= -1` over a weight space.
    L { m: i64 },
}

/// Creation letter on the Heisenberg side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum HLet {
    /// `bk(m)` with `m < 0`.
    K { m: i64 },
    /// `bd(m)` with `m < 0`.
    D { m: i64 },
}

/// One basis monomial: a normally ordered carrier word, a multiset of
/// Heisenberg creators, the lattice marker offset `r` in `e^{(alpha+r) bk}`,
/// and the index of the lowest space vector the word is applied to.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FockKey {
    pub fword: Vec<FLet>,
    pub hword: Vec<HLet>,
    pub marker: i64,
    pub low: u8,
}

/// Exact linear combination of basis monomials.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FockVec {
    terms: BTreeMap<FockKey, ParamPoly>,
}

impl FockVec {
    pub fn zero() -> FockVec {
        FockVec::default()
    }

    /// The vacuum over marker offset zero.
    pub fn vacuum() -> FockVec {
        FockVec::marker(0)
    }

    /// The vacuum shifted to marker offset `r`.
    pub fn marker(r: i64) -> FockVec {
        FockVec::lowest(0, r)
    }

    /// Lowest space vector number `k` at marker offset `r`.
    pub fn lowest(k: u8, r: i64) -> FockVec {
        let mut v = FockVec::zero();
        v.add_term(
            FockKey { fword: Vec::new(), hword: Vec::new(), marker: r, low: k },
            &ParamPoly::one(),
        );
        v
    }

    pub fn add_term(&mut self, key: FockKey, c: &ParamPoly) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(key.clone()).or_insert_with(ParamPoly::zero);
        *entry = &*entry + c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockKey, &ParamPoly)> {
        self.terms.iter()
    }

    pub fn get(&self, key: &FockKey) -> ParamPoly {
        self.terms.get(key).cloned().unwrap_or_else(ParamPoly::zero)
    }

    pub fn scale(&self, c: &ParamPoly) -> FockVec {
        let mut out = FockVec::zero();
        for (k, v) in &self.terms {
            out.add_term(k.clone(), &(v * c));
        }
        out
    }

    pub fn scale_rat(&self, c: &Rational) -> FockVec {
        self.scale(&ParamPoly::constant(c.clone()))
    }

    pub fn times(&self, n: i64) -> FockVec {
        self.scale(&ParamPoly::int(n))
    }
}

impl Add for &FockVec {
    type Output = FockVec;
    fn add(self, rhs: &FockVec) -> FockVec {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c);
        }
        out
    }
}

impl Sub for &FockVec {
    type Output = FockVec;
    fn sub(self, rhs: &FockVec) -> FockVec {
        self + &rhs.times(-1)
    }
}

impl Neg for &FockVec {
    type Output = FockVec;
    fn neg(self) -> FockVec {
        self.times(-1)
    }
}

/// Renders a vector with letters `a(u,m)`, `i(m)`, `vir(m)`, `hk(m)`,
/// `hd(m)`, marker `ex(r)`, and lowest index `wk`.
pub fn show_fock(v: &FockVec, g: &SimpleAlgebra) -> String {
    if v.is_zero() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for (key, c) in v.iter() {
        let mut bits = Vec::new();
        for l in &key.fword {
            bits.push(match l {
                FLet::G { m, u } => format!("a({},{})", g.basis_name(*u), m),
                FLet::I { m } => format!("i({})", m),
                FLet::L { m } => format!("vir({})", m),
            });
        }
        for h in &key.hword {
            bits.push(match h {
                HLet::K { m } => format!("hk({})", m),
                HLet::D { m } => format!("hd({})", m),
            });
        }
        bits.push(format!("ex({})", key.marker));
        if key.low != 0 {
            bits.push(format!("w{}", key.low));
        }
        let body = bits.join(" ");
        let coeff = format!("{}", c);
        if coeff == "1" {
            parts.push(body);
        } else if coeff.contains(" + ") || coeff.contains(" - ") {
            parts.push(format!("({}) {}", coeff, body));
        } else {
            parts.push(format!("{} {}", coeff, body));
        }
    }
    parts.join(" + ")
}

// ---------------------------------------------------------------------------
// The two flavors of Fock space.
// ---------------------------------------------------------------------------

/// Which carrier acts on the space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    /// The full carrier algebra with the `I` direction and character
    /// `gamma_ell`.
    Full,
    /// The subalgebra without `I`; Virasoro brackets close on the plain
    /// central charge stored in the space.
    Restricted,
}

/// What the creation words are applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lowest {
    /// The one dimensional vacuum.
    Vacuum,
    /// A finite dimensional lowest space of highest weight `lambda` with
    /// `L(0)` acting as the formal scalar `beta`.
    Weight { lambda: u8 },
}

/// A concrete Fock module: flavor, lowest space, marker origin `alpha`, and
/// the Virasoro central charge used in the restricted flavor.
#[derive(Clone, Debug)]
pub struct Fock {
    pub flavor: Flavor,
    pub lowest: Lowest,
    pub alpha: ParamPoly,
    pub vir_c: ParamPoly,
}

impl Fock {
    /// The full space over the vacuum with a formal marker origin.
    pub fn billig() -> Fock {
        Fock {
            flavor: Flavor::Full,
            lowest: Lowest::Vacuum,
            alpha: ParamPoly::param(Param::Alpha),
            vir_c: gamma_ell(&FSym::KVir).unwrap(),
        }
    }

    /// The full space over the vacuum with marker origin zero, the target of
    /// [`embed`].
    pub fn billig_plain() -> Fock {
        Fock { alpha: ParamPoly::zero(), ..Fock::billig() }
    }

    /// The restricted vacuum space with central charge `24 mu ell - 2`.
    pub fn voa() -> Fock {
        Fock {
            flavor: Flavor::Restricted,
            lowest: Lowest::Vacuum,
            alpha: ParamPoly::zero(),
            vir_c: &(&mu() * &ell()).scale(&rat(24)) - &ParamPoly::int(2),
        }
    }

    /// The restricted vacuum space with a formal central charge.
    pub fn voa_formal_c() -> Fock {
        Fock { vir_c: ParamPoly::param(Param::CC), ..Fock::voa() }
    }

    /// The restricted space over a lowest weight space, with formal `alpha`
    /// and `beta`.
    pub fn module(lambda: u8) -> Fock {
        Fock {
            flavor: Flavor::Restricted,
            lowest: Lowest::Weight { lambda },
            alpha: ParamPoly::param(Param::Alpha),
            vir_c: &(&mu() * &ell()).scale(&rat(24)) - &ParamPoly::int(2),
        }
    }

    fn l_creator_floor(&self) -> i64 {
        match self.lowest {
            Lowest::Vacuum => -2,
            Lowest::Weight { .. } => -1,
        }
    }
}

fn f_is_creator(fk: &Fock, s: &FSym) -> bool {
    match s {
        FSym::U { m, .. } | FSym::I { m } => *m < 0,
        FSym::L { m } => *m <= fk.l_creator_floor(),
        _ => false,
    }
}

fn flet_sym(l: &FLet) -> FSym {
    match l {
        FLet::G { m, u } => FSym::U { m: *m, u: *u },
        FLet::I { m } => FSym::I { m: *m },
        FLet::L { m } => FSym::L { m: *m },
    }
}

fn sym_flet(s: &FSym) -> FLet {
    match s {
        FSym::U { m, u } => FLet::G { m: *m, u: *u },
        FSym::I { m } => FLet::I { m: *m },
        FSym::L { m } => FLet::L { m: *m },
        _ => panic!("central symbols are not letters"),
    }
}

/// Central values seen by the module: the full flavor uses `gamma_ell`, the
/// restricted one keeps `k -> ell` and routes the Virasoro charge through the
/// space.
fn central_value(fk: &Fock, s: &FSym) -> ParamPoly {
    match (fk.flavor, s) {
        (Flavor::Restricted, FSym::KVir) => fk.vir_c.clone(),
        (Flavor::Restricted, FSym::KI) | (Flavor::Restricted, FSym::KVI) => {
            panic!("restricted flavor has no I direction centrals")
        }
        _ => gamma_ell(s).expect("central symbol"),
    }
}

// ---------------------------------------------------------------------------
// Carrier side action.
// ---------------------------------------------------------------------------

fn lowest_action(g: &SimpleAlgebra, fk: &Fock, s: &FSym, key: &FockKey) -> FockVec {
    let mut out = FockVec::zero();
    match (fk.lowest, s) {
        (Lowest::Vacuum, _) => {}
        (Lowest::Weight { lambda }, FSym::U { m: 0, u }) => {
            for (k2, c) in sl2_weight_action(g, *u, key.low, lambda) {
                let mut nk = key.clone();
                nk.low = k2;
                out.add_term(nk, &ParamPoly::constant(c));
            }
        }
        (Lowest::Weight { .. }, FSym::L { m: 0 }) => {
            out.add_term(key.clone(), &beta());
        }
        _ => {}
    }
    out
}

/// Applies a single carrier symbol to one monomial, rewriting into the normal
/// order.  `word` is the not yet consumed left part of the carrier word.
fn f_act(g: &SimpleAlgebra, fk: &Fock, s: &FSym, word: &[FLet], key: &FockKey) -> FockVec {
    if matches!(s, FSym::K | FSym::KI | FSym::KVI | FSym::KVir) {
        let c = central_value(fk, s);
        let mut nk = key.clone();
        nk.fword = word.to_vec();
        let mut out = FockVec::zero();
        out.add_term(nk, &c);
        return out;
    }
    if word.is_empty() {
        if f_is_creator(fk, s) {
            let mut nk = key.clone();
            nk.fword = vec![sym_flet(s)];
            let mut out = FockVec::zero();
            out.add_term(nk, &ParamPoly::one());
            return out;
        }
        return lowest_action(g, fk, s, &FockKey { fword: Vec::new(), ..key.clone() });
    }
    let head = word[0];
    let rest = &word[1..];
    if f_is_creator(fk, s) && sym_flet(s) >= head {
        let mut nk = key.clone();
        nk.fword = Vec::with_capacity(word.len() + 1);
        nk.fword.push(sym_flet(s));
        nk.fword.extend_from_slice(word);
        let mut out = FockVec::zero();
        out.add_term(nk, &ParamPoly::one());
        return out;
    }
    // Swap past the head and add the bracket correction.  The head goes
    // back on through the straightening path because the recursive result
    // can surface letters that sort above it.
    let moved = f_apply(g, fk, &flet_sym(&head), &f_act(g, fk, s, rest, key));
    let mut corr = FockVec::zero();
    for (bs, bc) in pair_bracket(g, *s, flet_sym(&head)).iter() {
        corr = &corr + &f_act(g, fk, bs, rest, key).scale(bc);
    }
    &moved + &corr
}

/// Applies one carrier algebra symbol (a mode or a central) to a vector.
pub fn f_apply(g: &SimpleAlgebra, fk: &Fock, s: &FSym, v: &FockVec) -> FockVec {
    if matches!(s, FSym::I { .. } | FSym::KI | FSym::KVI) && fk.flavor == Flavor::Restricted {
        panic!("restricted flavor has no I direction");
    }
    let mut out = FockVec::zero();
    for (key, c) in v.iter() {
        let word = key.fword.clone();
        out = &out + &f_act(g, fk, s, &word, key).scale(c);
    }
    out
}

/// Applies a full carrier element termwise.
pub fn fbar_apply(g: &SimpleAlgebra, fk: &Fock, x: &FbarElem, v: &FockVec) -> FockVec {
    let mut out = FockVec::zero();
    for (s, c) in x.iter() {
        out = &out + &f_apply(g, fk, s, v).scale(c);
    }
    out
}

// ---------------------------------------------------------------------------
// Heisenberg side action.
// ---------------------------------------------------------------------------

/// Which Heisenberg direction a mode belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HKind {
    /// The isotropic lattice direction `bk`.
    BK,
    /// Its dual `bd`.
    BD,
}

/// Applies `bk(m)` or `bd(m)`.  Negative modes create, `bk(0)` vanishes,
/// `bd(0)` reads the marker as `alpha + r`, and positive modes contract
/// against the dual creators with factor `m`.
pub fn h_apply(fk: &Fock, h: HKind, m: i64, v: &FockVec) -> FockVec {
    let mut out = FockVec::zero();
    for (key, c) in v.iter() {
        if m < 0 {
            let letter = match h {
                HKind::BK => HLet::K { m },
                HKind::BD => HLet::D { m },
            };
            let mut nk = key.clone();
            let pos = nk.hword.partition_point(|l| *l >= letter);
            nk.hword.insert(pos, letter);
            out.add_term(nk, c);
        } else if m == 0 {
            if h == HKind::BD {
                let eigen = &fk.alpha + &ParamPoly::int(key.marker);
                out.add_term(key.clone(), &(c * &eigen));
            }
        } else {
            let dual = match h {
                HKind::BK => HLet::D { m: -m },
                HKind::BD => HLet::K { m: -m },
            };
            for (i, l) in key.hword.iter().enumerate() {
                if *l == dual {
                    let mut nk = key.clone();
                    nk.hword.remove(i);
                    out.add_term(nk, &c.scale(&rat(m)));
                }
            }
        }
    }
    out
}

fn shift_marker(m: i64, v: &FockVec) -> FockVec {
    let mut out = FockVec::zero();
    for (key, c) in v.iter() {
        let mut nk = key.clone();
        nk.marker += m;
        out.add_term(nk, c);
    }
    out
}

fn key_depth(letters: &[HLet], want: HKind) -> i64 {
    letters
        .iter()
        .map(|l| match (l, want) {
            (HLet::K { m }, HKind::BK) => -m,
            (HLet::D { m }, HKind::BD) => -m,
            _ => 0,
        })
        .sum()
}

fn ddepth(v: &FockVec) -> i64 {
    v.iter().map(|(k, _)| key_depth(&k.hword, HKind::BD)).max().unwrap_or(0)
}

fn kdepth(v: &FockVec) -> i64 {
    v.iter().map(|(k, _)| key_depth(&k.hword, HKind::BK)).max().unwrap_or(0)
}

fn fdepth(v: &FockVec) -> i64 {
    v.iter()
        .map(|(k, _)| {
            k.fword
                .iter()
                .map(|l| match l {
                    FLet::G { m, .. } | FLet::I { m } | FLet::L { m } => -m,
                })
                .sum::<i64>()
        })
        .max()
        .unwrap_or(0)
}

/// Total conformal weight bound of the heaviest monomial, counting each
/// creation mode `x(-n)` as `n` and markers as weight zero.
pub fn weight_bound(v: &FockVec) -> i64 {
    v.iter()
        .map(|(k, _)| {
            let f: i64 = k
                .fword
                .iter()
                .map(|l| match l {
                    FLet::G { m, .. } | FLet::I { m } | FLet::L { m } => -m,
                })
                .sum();
            f + key_depth(&k.hword, HKind::BK) + key_depth(&k.hword, HKind::BD)
        })
        .max()
        .unwrap_or(0)
}

/// The total Virasoro mode: the carrier side `L(n)` plus the Heisenberg side
/// quadratic sum over `:bk(j) bd(n-j):`.
pub fn l_total(g: &SimpleAlgebra, fk: &Fock, n: i64, v: &FockVec) -> FockVec {
    let mut out = f_apply(g, fk, &FSym::L { m: n }, v);
    let dd = ddepth(v);
    let kd = kdepth(v);
    for j in (n - kd - 1)..=-1 {
        if j == 0 {
            continue;
        }
        out = &out + &h_apply(fk, HKind::BK, j, &h_apply(fk, HKind::BD, n - j, v));
    }
    for j in 1..=dd {
        out = &out + &h_apply(fk, HKind::BD, n - j, &h_apply(fk, HKind::BK, j, v));
    }
    out
}

// ---------------------------------------------------------------------------
// Exponential lattice fields.
// ---------------------------------------------------------------------------

/// Coefficient of `z^s` in `Y(e^{m bk},z) v`: shift the marker by `m`, apply
/// the lowering half `exp(-sum (m/r) bk(r) z^-r)`, then the raising half
/// `exp(sum (m/r) bk(-r) z^r)`.
pub fn y_exp(fk: &Fock, m: i64, s: i64, v: &FockVec) -> FockVec {
    let shifted = shift_marker(m, v);
    let qmax = ddepth(&shifted);
    let mut lowered = vec![shifted];
    for q in 1..=qmax {
        let mut acc = FockVec::zero();
        for r in 1..=q {
            acc = &acc + &h_apply(fk, HKind::BK, r, &lowered[(q - r) as usize]).times(-m);
        }
        lowered.push(acc.scale_rat(&ratq(1, q)));
    }
    let mut out = FockVec::zero();
    for (q, base) in lowered.iter().enumerate() {
        let p = s + q as i64;
        if p < 0 || base.is_zero() {
            continue;
        }
        let mut raised = vec![base.clone()];
        for i in 1..=p {
            let mut acc = FockVec::zero();
            for r in 1..=i {
                acc = &acc + &h_apply(fk, HKind::BK, -r, &raised[(i - r) as usize]).times(m);
            }
            raised.push(acc.scale_rat(&ratq(1, i)));
        }
        out = &out + &raised[p as usize];
    }
    out
}

// ---------------------------------------------------------------------------
// The five field families.
// ---------------------------------------------------------------------------

/// Label of one field family on the full space, with its loop index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BLabel {
    /// `sum_j (t0^j t1^n k0) z^{-j-1}`, requires `n != 0`.
    KZero { n: i64 },
    /// `sum_j (t0^j k1) z^{-j-1}`.
    KOne,
    /// `sum_j (t0^j t1^m (x) u) z^{-j-1}`.
    Loop { m: i64, u: u8 },
    /// `sum_j (t0^j t1^m d1) z^{-j-1}`.
    DOne { m: i64 },
    /// `sum_j (-t0^j t1^m d0 + mu (j+1/2) t0^j t1^m k0) z^{-j-2}`.
    DZero { m: i64 },
}

pub(crate) fn loop_mode(g: &SimpleAlgebra, fk: &Fock, m: i64, u: u8, j: i64, v: &FockVec) -> FockVec {
    let dd = ddepth(v);
    let fd = fdepth(v);
    let mut out = FockVec::zero();
    for n in (j - dd)..=fd.max(0) {
        let inner = y_exp(fk, m, n - j, v);
        if inner.is_zero() {
            continue;
        }
        out = &out + &f_apply(g, fk, &FSym::U { m: n, u }, &inner);
    }
    out
}

fn done_mode(g: &SimpleAlgebra, fk: &Fock, m: i64, j: i64, v: &FockVec) -> FockVec {
    let dd = ddepth(v);
    let kd = kdepth(v);
    let fd = fdepth(v);
    let mut out = FockVec::zero();
    let half = |p: i64, w: &FockVec| -> FockVec {
        let mut part = h_apply(fk, HKind::BD, p, w);
        if m != 0 && fk.flavor == Flavor::Full {
            part = &part + &f_apply(g, fk, &FSym::I { m: p }, w).times(m);
        }
        part
    };
    for p in (j - dd)..=-1 {
        out = &out + &half(p, &y_exp(fk, m, p - j, v));
    }
    for p in 0..=kd.max(fd).max(0) {
        out = &out + &y_exp(fk, m, p - j, &half(p, v));
    }
    out
}

/// Coefficient of `z^{-j-2}` in `:Y(omega,z) Y(e^{m bk},z): v`.  Virasoro
/// modes below `-1` act after the exponential, the rest before.
pub(crate) fn omega_exp_mode(g: &SimpleAlgebra, fk: &Fock, m: i64, j: i64, v: &FockVec) -> FockVec {
    let dd = ddepth(v);
    let lbound = fdepth(v) + kdepth(v) + dd + 1;
    let mut out = FockVec::zero();
    for n in (j - dd)..=-2 {
        let inner = y_exp(fk, m, n - j, v);
        if inner.is_zero() {
            continue;
        }
        out = &out + &l_total(g, fk, n, &inner);
    }
    for n in -1..=lbound {
        let inner = l_total(g, fk, n, v);
        if inner.is_zero() {
            continue;
        }
        out = &out + &y_exp(fk, m, n - j, &inner);
    }
    out
}

/// Coefficient of `z^{-j-2}` in `Y(I,z) Y(m bk,z) Y(e^{m bk},z) v`.
fn i_kk_exp_mode(g: &SimpleAlgebra, fk: &Fock, m: i64, j: i64, v: &FockVec) -> FockVec {
    if m == 0 {
        return FockVec::zero();
    }
    let dd = ddepth(v);
    let fd = fdepth(v);
    let inner_coeff = |q: i64| -> FockVec {
        let mut acc = FockVec::zero();
        for p in (-q - 1 - dd)..=dd {
            if p == 0 {
                continue;
            }
            let w = y_exp(fk, m, q + p + 1, v);
            if w.is_zero() {
                continue;
            }
            acc = &acc + &h_apply(fk, HKind::BK, p, &w).times(m);
        }
        acc
    };
    let mut out = FockVec::zero();
    for ni in (j - 2 * dd - 1)..=fd.max(0) {
        let w = inner_coeff(ni - j - 1);
        if w.is_zero() {
            continue;
        }
        out = &out + &f_apply(g, fk, &FSym::I { m: ni }, &w);
    }
    out
}

/// Coefficient of `z^{-j-2}` in `(d/dz Y(m bk,z)) Y(e^{m bk},z) v`.
pub(crate) fn dk_exp_mode(fk: &Fock, m: i64, j: i64, v: &FockVec) -> FockVec {
    if m == 0 {
        return FockVec::zero();
    }
    let dd = ddepth(v);
    let mut out = FockVec::zero();
    for p in (j - dd)..=dd {
        if p == 0 {
            continue;
        }
        let w = y_exp(fk, m, p - j, v);
        if w.is_zero() {
            continue;
        }
        out = &out + &h_apply(fk, HKind::BK, p, &w).times(m * (-p - 1));
    }
    out
}

/// Coefficient of `z^s` in `:Y(bd,z) Y(e^{m bk},z): v`.
pub(crate) fn d_exp_coeff(fk: &Fock, m: i64, s: i64, v: &FockVec) -> FockVec {
    let dd = ddepth(v);
    let kd = kdepth(v);
    let mut out = FockVec::zero();
    for p in (-s - 1 - dd)..=-1 {
        out = &out + &h_apply(fk, HKind::BD, p, &y_exp(fk, m, s + p + 1, v));
    }
    // The p = 0 term reads the marker even with no bk creators present.
    for p in 0..=kd {
        out = &out + &y_exp(fk, m, s + p + 1, &h_apply(fk, HKind::BD, p, v));
    }
    out
}

/// Coefficient of `z^s` in `:Y(bk,z) Y(e^{m bk},z): v`.  Unlike the `bd`
/// column there is no zero-mode term: `bk(0)` kills everything because the
/// form is isotropic on `bk`.
pub(crate) fn k_exp_coeff(fk: &Fock, m: i64, s: i64, v: &FockVec) -> FockVec {
    let dd = ddepth(v);
    let mut out = FockVec::zero();
    for p in (-s - 1 - dd)..=-1 {
        out = &out + &h_apply(fk, HKind::BK, p, &y_exp(fk, m, s + p + 1, v));
    }
    for p in 1..=dd {
        out = &out + &y_exp(fk, m, s + p + 1, &h_apply(fk, HKind::BK, p, v));
    }
    out
}

/// Coefficient of `z^s` in `(d/dz Y(bk,z)) Y(e^{m bk},z) v`.  Same mode sum
/// as `k_exp_coeff` but each `bk(p)` carries the derivative factor `-p-1`.
/// For `m != 0` this is `dk_exp_mode` divided by `m`; keeping it separate
/// makes the `m = 0` case well defined.
pub(crate) fn k2_exp_coeff(fk: &Fock, m: i64, s: i64, v: &FockVec) -> FockVec {
    let dd = ddepth(v);
    let mut out = FockVec::zero();
    for p in (-s - 2 - dd)..=-1 {
        let w = y_exp(fk, m, s + p + 2, v);
        out = &out + &h_apply(fk, HKind::BK, p, &w).times(-p - 1);
    }
    for p in 1..=dd {
        let w = h_apply(fk, HKind::BK, p, v);
        out = &out + &y_exp(fk, m, s + p + 2, &w).times(-p - 1);
    }
    out
}

fn dzero_mode(g: &SimpleAlgebra, fk: &Fock, m: i64, j: i64, v: &FockVec) -> FockVec {
    let omega = omega_exp_mode(g, fk, m, j, v);
    let ikk = i_kk_exp_mode(g, fk, m, j, v);
    let corr = dk_exp_mode(fk, m, j, v);
    let lm1 = &(&ell() * &mu()) - &ParamPoly::one();
    &(&omega + &ikk) + &corr.scale(&lm1)
}

/// One mode of a field family on the full space, applied to `v`.  The mode
/// `j` is the coefficient of `z^{-j-w}` where `w` is the conformal weight of
/// the family: `0` for the exponential column `KZero`, `2` for the derivation
/// family `DZero`, and `1` for everything else.  The uniform weight grading
/// is what makes the brackets close on the right modes; pairing the
/// weight-zero column against `z^{-j-1}` shifts every commutator with the
/// derivation fields off by one.
pub fn billig_field(t: &Toroidal, fk: &Fock, label: BLabel, j: i64, v: &FockVec) -> FockVec {
    let g = t.algebra();
    match label {
        BLabel::KZero { n } => {
            assert!(n != 0, "the n = 0 column is carried by KOne");
            y_exp(fk, n, -j, v).scale(&ell())
        }
        BLabel::KOne => h_apply(fk, HKind::BK, j, v).scale(&ell()),
        BLabel::Loop { m, u } => loop_mode(g, fk, m, u, j, v),
        BLabel::DOne { m } => done_mode(g, fk, m, j, v),
        BLabel::DZero { m } => dzero_mode(g, fk, m, j, v),
    }
}

/// The window `lo..=hi` of modes of a field family applied to `v`.
pub fn billig_window(
    t: &Toroidal,
    fk: &Fock,
    label: BLabel,
    v: &FockVec,
    lo: i64,
    hi: i64,
) -> Vec<(i64, FockVec)> {
    (lo..=hi).map(|j| (j, billig_field(t, fk, label, j, v))).collect()
}

// ---------------------------------------------------------------------------
// The realized action of the toroidal algebra.
// ---------------------------------------------------------------------------

fn realize_k0_column(fk: &Fock, m0: i64, m1: i64, v: &FockVec) -> FockVec {
    // t0^m0 t1^m1 k0 as an operator: the z^{-m0} coefficient of the
    // weight-zero column ell Y(e^{m1 bk},z).  At m1 = 0 the column collapses
    // to the level: t0^s k0 vanishes in the algebra for s != 0 and the s = 0
    // coefficient of the identity field is the constant ell.
    if m1 != 0 {
        y_exp(fk, m1, -m0, v).scale(&ell())
    } else if m0 == 0 {
        v.scale(&ell())
    } else {
        FockVec::zero()
    }
}

fn realize_full(t: &Toroidal, fk: &Fock, x: &TorElem, v: &FockVec) -> FockVec {
    let mut out = FockVec::zero();
    for (sym, c) in x.iter() {
        let part = match sym {
            TorSym::Loop { m0, m1, u } => {
                billig_field(t, fk, BLabel::Loop { m: *m1, u: *u }, *m0, v)
            }
            TorSym::K0 => v.scale(&ell()),
            TorSym::K1 => billig_field(t, fk, BLabel::KOne, 0, v),
            TorSym::Kmn { m0, m1 } => {
                if *m1 != 0 {
                    billig_field(t, fk, BLabel::KZero { n: *m1 }, *m0, v).scale_rat(&ratq(1, *m1))
                } else {
                    billig_field(t, fk, BLabel::KOne, *m0, v).scale_rat(&ratq(-1, *m0))
                }
            }
            TorSym::Der { m0, m1, i: 1 } => billig_field(t, fk, BLabel::DOne { m: *m1 }, *m0, v),
            TorSym::Der { m0, m1, i: 0 } => {
                let minus = billig_field(t, fk, BLabel::DZero { m: *m1 }, *m0, v);
                let k0part = realize_k0_column(fk, *m0, *m1, v);
                &(-&minus) + &k0part.scale(&mu().scale(&ratq(2 * m0 + 1, 2)))
            }
            TorSym::Der { .. } => unreachable!("derivation index is 0 or 1"),
        };
        out = &out + &part.scale(c);
    }
    out
}

fn restricted_letter(t: &Toroidal, fk: &Fock, l: &Letter, v: &FockVec) -> FockVec {
    let g = t.algebra();
    match l {
        Letter::Loop { a, m, u } => loop_mode(g, fk, *m, *u, *a, v),
        Letter::T1 { a } => h_apply(fk, HKind::BD, *a, v),
        Letter::K { a, m } => {
            if *m != 0 {
                y_exp(fk, *m, -a, v).scale(&ell()).scale_rat(&ratq(1, *m))
            } else {
                h_apply(fk, HKind::BK, *a, v).scale(&ell()).scale_rat(&ratq(-1, *a))
            }
        }
        Letter::D { a, m } => dbig_mode(t, fk, *m, *a, v),
    }
}

/// Coefficient of `z^{-j-2}` in the restricted derivation field
/// `D_n(z) = n Y(omega_-1 e^{n bk},z) - d/dz Y(bd_-1 e^{n bk},z)
///           + n (ell mu - 1) Y((n bk)_-2 e^{n bk},z)`.
fn dbig_mode(t: &Toroidal, fk: &Fock, n: i64, j: i64, v: &FockVec) -> FockVec {
    let g = t.algebra();
    let omega = omega_exp_mode(g, fk, n, j, v).times(n);
    let dpart = d_exp_coeff(fk, n, -j - 1, v).times(j + 1);
    let lm1 = &(&ell() * &mu()) - &ParamPoly::one();
    let corr = dk_exp_mode(fk, n, j, v).scale(&lm1).times(n);
    &(&omega + &dpart) + &corr
}

fn realize_restricted(t: &Toroidal, fk: &Fock, x: &TorElem, v: &FockVec) -> Result<FockVec, FockError> {
    let parts = decompose(&ModuleKind::Vacuum, x)
        .map_err(|e| FockError::Unsupported(e.to_string()))?;
    let mut out = FockVec::zero();
    for (c, op) in parts {
        let part = match op {
            Op::Letter(l) => restricted_letter(t, fk, &l, v),
            Op::Level => v.scale(&ell()),
            Op::Central1 => FockVec::zero(),
            Op::Translate => l_total(t.algebra(), fk, -1, v).times(-1),
            Op::Degree => {
                return Err(FockError::Unsupported(
                    "d0 alone does not act on the restricted space".to_string(),
                ))
            }
        };
        out = &out + &part.scale(&c);
    }
    Ok(out)
}

/// Applies a toroidal algebra element to a vector through the field
/// dictionary of the given space.
pub fn realize(t: &Toroidal, fk: &Fock, x: &TorElem, v: &FockVec) -> Result<FockVec, FockError> {
    match fk.flavor {
        Flavor::Full => Ok(realize_full(t, fk, x, v)),
        Flavor::Restricted => realize_restricted(t, fk, x, v),
    }
}

/// Residual of the module axiom for the realized action:
/// `x (y v) - y (x v) - [x,y] v`.
pub fn realization_residual(
    t: &Toroidal,
    fk: &Fock,
    x: &TorElem,
    y: &TorElem,
    v: &FockVec,
) -> Result<FockVec, FockError> {
    let xy = realize(t, fk, x, &realize(t, fk, y, v)?)?;
    let yx = realize(t, fk, y, &realize(t, fk, x, v)?)?;
    let br = realize(t, fk, &t.bracket(x, y), v)?;
    Ok(&(&xy - &yx) - &br)
}

// ---------------------------------------------------------------------------
// Restricted fields and the embedding.
// ---------------------------------------------------------------------------

/// Label of a field family on the restricted space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RLabel {
    /// Same as the full flavor family of `t1^n k0` loops, `n != 0`.
    KZero { n: i64 },
    /// Same as the full flavor `k1` family.
    KOne,
    /// Loop family over the finite algebra.
    Loop { m: i64, u: u8 },
    /// `d1(z) = Y(bd,z)`.
    DOne,
    /// The derivation family `D_n(z)`, `n != 0`.
    DBig { n: i64 },
    /// The translation operator `t0^-1 d0 = -L(-1)`, mode index ignored.
    Translate,
}

/// One mode of a restricted field family.  The space must carry the
/// restricted flavor.
pub fn restricted_field(
    t: &Toroidal,
    fk: &Fock,
    label: RLabel,
    j: i64,
    v: &FockVec,
) -> Result<FockVec, FockError> {
    if fk.flavor != Flavor::Restricted {
        return Err(FockError::Flavor("restricted_field needs the restricted space".to_string()));
    }
    let g = t.algebra();
    Ok(match label {
        RLabel::KZero { n } => {
            assert!(n != 0);
            y_exp(fk, n, -j, v).scale(&ell())
        }
        RLabel::KOne => h_apply(fk, HKind::BK, j, v).scale(&ell()),
        RLabel::Loop { m, u } => loop_mode(g, fk, m, u, j, v),
        RLabel::DOne => h_apply(fk, HKind::BD, j, v),
        RLabel::DBig { n } => {
            assert!(n != 0);
            dbig_mode(t, fk, n, j, v)
        }
        RLabel::Translate => l_total(g, fk, -1, v).times(-1),
    })
}

/// Transports a restricted vacuum vector into the full space along the
/// graded embedding: `L(m)` letters become `L(m) + (m+1) I(m)` operators,
/// everything else is carried over unchanged.
pub fn embed(t: &Toroidal, fk_res: &Fock, v: &FockVec) -> FockVec {
    assert!(fk_res.flavor == Flavor::Restricted && fk_res.lowest == Lowest::Vacuum);
    let g = t.algebra();
    let full = Fock::billig_plain();
    let mut out = FockVec::zero();
    for (key, c) in v.iter() {
        let mut w = FockVec::zero();
        w.add_term(
            FockKey { fword: Vec::new(), hword: key.hword.clone(), marker: key.marker, low: 0 },
            c,
        );
        for l in key.fword.iter().rev() {
            w = match l {
                FLet::G { m, u } => f_apply(g, &full, &FSym::U { m: *m, u: *u }, &w),
                FLet::L { m } => {
                    let base = f_apply(g, &full, &FSym::L { m: *m }, &w);
                    &base + &f_apply(g, &full, &FSym::I { m: *m }, &w).times(m + 1)
                }
                FLet::I { .. } => unreachable!("restricted vectors carry no I letters"),
            };
        }
        out = &out + &w;
    }
    out
}

/// The three summand residues of the zero mode `d_{0,n}` acting on a lowest
/// space vector `u` at marker offset `r`: the `bd` part, the conformal part
/// (already scaled by `n`), and the derivative correction part.  The triple
/// is `(alpha + r, n beta, 0)`.
pub fn zero_mode_eigen(t: &Toroidal, fk: &Fock, n: i64, u: u8, r: i64) -> (ParamPoly, ParamPoly, ParamPoly) {
    assert!(matches!(fk.lowest, Lowest::Weight { .. }), "needs a lowest weight space");
    let g = t.algebra();
    let base = FockVec::lowest(u, r);
    let shifted = FockKey { fword: Vec::new(), hword: Vec::new(), marker: r + n, low: u };
    let dpart = d_exp_coeff(fk, n, -1, &base);
    let wpart = omega_exp_mode(g, fk, n, 0, &base).times(n);
    let lm1 = &(&ell() * &mu()) - &ParamPoly::one();
    let cpart = dk_exp_mode(fk, n, 0, &base).scale(&lm1).times(n);
    let extract = |w: &FockVec| -> ParamPoly {
        let c = w.get(&shifted);
        let mut rest = w.clone();
        rest.add_term(shifted.clone(), &(-&c));
        assert!(rest.is_zero(), "residue is not a multiple of the shifted base vector");
        c
    };
    (extract(&dpart), extract(&wpart), extract(&cpart))
}

/// The generator states of the induced vertex algebra inside the restricted
/// vacuum space: loops go to `u(-1) e^{m bk}`, `k1` to `ell bk(-1)`, `d1` to
/// `bd(-1)`, `K_n` to `(ell/n) e^{n bk}`, and `D_n` to
/// `n L(-2) e^{n bk} - L(-1) (bd(-1) e^{n bk}) + n (mu ell - 1) n bk(-2) e^{n bk}`.
pub fn theta_image(t: &Toroidal, gen: Gen) -> Result<FockVec, FockError> {
    let g = t.algebra();
    let fk = Fock::voa();
    Ok(match gen {
        Gen::Loop { m, u } => {
            f_apply(g, &fk, &FSym::U { m: -1, u }, &FockVec::marker(m))
        }
        Gen::K1 => h_apply(&fk, HKind::BK, -1, &FockVec::vacuum()).scale(&ell()),
        Gen::D1 => h_apply(&fk, HKind::BD, -1, &FockVec::vacuum()),
        Gen::BigK(n) => {
            if n == 0 {
                return Err(FockError::Unsupported("K_0 is not a generator".to_string()));
            }
            FockVec::marker(n).scale(&ell()).scale_rat(&ratq(1, n))
        }
        Gen::BigD(n) => {
            if n == 0 {
                return Err(FockError::Unsupported("D_0 is not a generator".to_string()));
            }
            let e = FockVec::marker(n);
            let lpart = l_total(g, &fk, -2, &e).times(n);
            let dpart = l_total(g, &fk, -1, &h_apply(&fk, HKind::BD, -1, &e));
            let lm1 = &(&mu() * &ell()) - &ParamPoly::one();
            let kpart = h_apply(&fk, HKind::BK, -2, &e).times(n * n).scale(&lm1);
            &(&lpart - &dpart) + &kpart
        }
    })
}
