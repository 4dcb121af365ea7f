//! Induced modules over the extended algebra, with PBW normal ordering.
//!
//! Three inductions are implemented, differing in the base space the
//! enveloping algebra is applied to:
//!
//! * the vacuum module: the base is a single vector `1`; the upper
//!   triangular part acts as zero and `k0` acts as the level `ell`,
//! * the `q`-line module: the base is `C[q, q^-1]`; the degree-zero
//!   subalgebra acts on it with the finite algebra acting as zero,
//!   `t1^m k0` shifting by `q^m` times `ell`, and `d_{0,m}` reading off
//!   the `q`-exponent,
//! * the weighted `q`-module: the base is `C[q, q^-1]` tensored with the
//!   irreducible sl2 module of highest weight `lambda`, with the degree
//!   reading twisted to `n + alpha + beta m`.
//!
//! A vector is a linear combination of normal-ordered words of creation
//! letters applied to a base vector.  [`act`] rewrites any element of the
//! acting algebra against such a vector by repeated bracketing: each
//! out-of-order pair is swapped at the cost of one bracket term of shorter
//! length, and whatever reaches the base is resolved by the module rules.
//! The letter order is fixed (loops, then the k family, then `t0^a d1`,
//! then the d family, each sorted by modes), which makes normal forms and
//! therefore vector equality canonical.
//!
//! The vacuum module also carries the translation operator, acting as the
//! negative of `t0^-1 d0`, and the loop inductions carry the diagonal
//! action of `d0` itself, reading the negative of the word degree.

use std::collections::BTreeMap;

use num::Zero;
use thiserror::Error;

use crate::genfun::Gen;
use crate::liealg::{dvar, reduce_k, SimpleAlgebra, TorElem, TorSym, Toroidal};
use crate::scalar::{rat, ratq, Param, ParamPoly, Rational};

#[derive(Error, Debug, PartialEq)]
pub enum PbwError {
    #[error("element outside the acting algebra: {0}")]
    OutsideAlgebra(String),
    #[error("vector does not belong to the module: {0}")]
    BaseMismatch(String),
    #[error("the level must be a rational number here, not a formal parameter")]
    FormalLevel,
}

/// A creation or annihilation letter, one basis element of the acting
/// algebra apart from the two central lines `k0` and `k1`.
///
/// The derived order (variant first, then fields) is the normal-ordering
/// order of the engine.  Any fixed total order would do; this one keeps
/// words readable, with loops leftmost inside each degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Letter {
    /// `t0^a t1^m (x) u` with `u` a basis index of the finite algebra.
    Loop { a: i64, m: i64, u: u8 },
    /// `k_{a,m}`, defined for `(a, m) != (0, 0)`.
    K { a: i64, m: i64 },
    /// `t0^a d1`.
    T1 { a: i64 },
    /// `d_{a,m}` with `m != 0`, mu correction included.
    D { a: i64, m: i64 },
}

impl Letter {
    fn elem(&self) -> TorElem {
        match *self {
            Letter::Loop { a, m, u } => TorElem::loop_gen(a, m, u),
            Letter::K { a, m } => TorElem::kmn(a, m),
            Letter::T1 { a } => TorElem::der_gen(a, 0, 1),
            Letter::D { a, m } => dvar(a, m),
        }
    }

    fn t0deg(&self) -> i64 {
        match *self {
            Letter::Loop { a, .. } | Letter::K { a, .. } | Letter::T1 { a } | Letter::D { a, .. } => {
                a
            }
        }
    }

    /// Eigenvalue under the adjoint action of `d1`.
    fn weight(&self) -> i64 {
        match *self {
            Letter::Loop { m, .. } | Letter::K { m, .. } | Letter::D { m, .. } => m,
            Letter::T1 { .. } => 0,
        }
    }

    fn text(&self, g: &SimpleAlgebra) -> String {
        match *self {
            Letter::Loop { a, m, u } => format!("loop({},{},{})", a, m, g.basis_name(u)),
            Letter::K { a, m } => format!("kmn({},{})", a, m),
            Letter::T1 { a } => format!("der({},0,1)", a),
            Letter::D { a, m } => format!("dvar({},{})", a, m),
        }
    }
}

/// A basis vector of the base space of an induction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Base {
    /// The vacuum vector.
    One,
    /// `q^n` on the Laurent line.
    Q(i64),
    /// `q^n (x) w_k` in the weighted module, `w_0` the highest vector.
    Qw(i64, u8),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModuleKind {
    Vacuum,
    QLine,
    QTensor { lambda: u8 },
}

/// A module descriptor: which induction, and the scalars of the base.
///
/// The level and the twist parameters are polynomials so that the default
/// modules act with them fully formal; specialize by building with
/// constants instead.
#[derive(Clone, Debug)]
pub struct Module {
    pub kind: ModuleKind,
    pub ell: ParamPoly,
    pub alpha: ParamPoly,
    pub beta: ParamPoly,
}

impl Module {
    pub fn vacuum() -> Module {
        Module {
            kind: ModuleKind::Vacuum,
            ell: ParamPoly::param(Param::Ell),
            alpha: ParamPoly::zero(),
            beta: ParamPoly::zero(),
        }
    }

    /// The vacuum module at a concrete rational level.
    pub fn vacuum_level(ell: Rational) -> Module {
        Module {
            ell: ParamPoly::constant(ell),
            ..Module::vacuum()
        }
    }

    pub fn q_line() -> Module {
        Module {
            kind: ModuleKind::QLine,
            ell: ParamPoly::param(Param::Ell),
            alpha: ParamPoly::zero(),
            beta: ParamPoly::zero(),
        }
    }

    pub fn q_tensor(lambda: u8) -> Module {
        Module {
            kind: ModuleKind::QTensor { lambda },
            ell: ParamPoly::param(Param::Ell),
            alpha: ParamPoly::param(Param::Alpha),
            beta: ParamPoly::param(Param::Beta),
        }
    }
}

/// A finite linear combination of normal-ordered words applied to base
/// vectors, with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ModVec {
    terms: BTreeMap<(Vec<Letter>, Base), ParamPoly>,
}

impl ModVec {
    pub fn zero() -> ModVec {
        ModVec::default()
    }

    /// The vacuum vector of the vacuum module.
    pub fn vacuum() -> ModVec {
        ModVec::word(Vec::new(), Base::One)
    }

    /// The base vector `q^n` of the `q`-line module.
    pub fn base_q(n: i64) -> ModVec {
        ModVec::word(Vec::new(), Base::Q(n))
    }

    /// The base vector `q^n (x) w_k` of the weighted module.
    pub fn base_qw(n: i64, k: u8) -> ModVec {
        ModVec::word(Vec::new(), Base::Qw(n, k))
    }

    /// A single word applied to a base vector.  The word must already be
    /// normal ordered, largest letter first.
    pub fn word(word: Vec<Letter>, base: Base) -> ModVec {
        assert!(
            word.windows(2).all(|w| w[0] >= w[1]),
            "word is not normal ordered"
        );
        let mut v = ModVec::zero();
        v.add_term(word, base, &ParamPoly::one());
        v
    }

    pub fn add_term(&mut self, word: Vec<Letter>, base: Base, c: &ParamPoly) {
        if c.is_zero() {
            return;
        }
        let key = (word, base);
        let sum = match self.terms.get(&key) {
            Some(old) => old + c,
            None => c.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Vec<Letter>, Base), &ParamPoly)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &ModVec) -> ModVec {
        let mut out = self.clone();
        for ((w, b), c) in &other.terms {
            out.add_term(w.clone(), *b, c);
        }
        out
    }

    pub fn neg(&self) -> ModVec {
        self.scale(&-&ParamPoly::one())
    }

    pub fn sub(&self, other: &ModVec) -> ModVec {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &ParamPoly) -> ModVec {
        let mut out = ModVec::zero();
        for ((w, b), old) in &self.terms {
            out.add_term(w.clone(), *b, &(old * c));
        }
        out
    }

    pub fn scale_rat(&self, r: &Rational) -> ModVec {
        self.scale(&ParamPoly::constant(r.clone()))
    }
}

/// Largest word degree appearing in `v`, where a letter of `t0`-mode `a`
/// contributes `-a` and every base vector sits in degree zero.  `None` for
/// the zero vector.
pub fn degree_bound(v: &ModVec) -> Option<i64> {
    v.iter()
        .map(|((w, _), _)| w.iter().map(|l| -l.t0deg()).sum())
        .max()
}

/// Renders a vector the way [`crate::liealg::show_elem`] renders algebra
/// elements: words of letters, then the base vector.
pub fn show_modvec(v: &ModVec, g: &SimpleAlgebra) -> String {
    if v.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (idx, ((word, base), c)) in v.iter().enumerate() {
        if idx > 0 {
            out.push_str(" + ");
        }
        let coeff = format!("{}", c);
        if coeff != "1" {
            if coeff.contains(" + ") || coeff.contains(" - ") {
                out.push('(');
                out.push_str(&coeff);
                out.push(')');
            } else {
                out.push_str(&coeff);
            }
            out.push('*');
        }
        for l in word {
            out.push_str(&l.text(g));
            out.push(' ');
        }
        match *base {
            Base::One => out.push('1'),
            Base::Q(n) => out.push_str(&format!("q^{}", n)),
            Base::Qw(n, k) => out.push_str(&format!("q^{} w{}", n, k)),
        }
    }
    out
}

enum Class {
    Creator,
    Annihilator,
    DegreeZero,
}

fn classify(kind: &ModuleKind, l: &Letter) -> Class {
    match kind {
        ModuleKind::Vacuum => {
            let creator = match *l {
                Letter::Loop { a, .. } => a <= -1,
                Letter::K { a, .. } => a <= 0,
                Letter::T1 { a } => a <= -1,
                Letter::D { a, .. } => a <= -2,
            };
            if creator {
                Class::Creator
            } else {
                Class::Annihilator
            }
        }
        ModuleKind::QLine | ModuleKind::QTensor { .. } => match l.t0deg() {
            a if a <= -1 => Class::Creator,
            0 => Class::DegreeZero,
            _ => Class::Annihilator,
        },
    }
}

fn check_base(module: &Module, base: &Base) -> Result<(), PbwError> {
    match (&module.kind, base) {
        (ModuleKind::Vacuum, Base::One) => Ok(()),
        (ModuleKind::QLine, Base::Q(_)) => Ok(()),
        (ModuleKind::QTensor { lambda }, Base::Qw(_, k)) if *k <= *lambda => Ok(()),
        _ => Err(PbwError::BaseMismatch(format!(
            "base {:?} in a {:?} module",
            base, module.kind
        ))),
    }
}

/// Action of a degree-zero letter directly on a base vector of one of the
/// two loop inductions.
fn base_apply(
    module: &Module,
    g: &SimpleAlgebra,
    l: &Letter,
    base: Base,
) -> Result<ModVec, PbwError> {
    let mut out = ModVec::zero();
    match (&module.kind, base) {
        (ModuleKind::QLine, Base::Q(n)) => match *l {
            Letter::Loop { .. } => {}
            Letter::K { m, .. } => {
                out.add_term(Vec::new(), Base::Q(n + m), &module.ell.scale(&ratq(1, m)));
            }
            Letter::T1 { .. } => {
                out.add_term(Vec::new(), Base::Q(n), &ParamPoly::int(n));
            }
            Letter::D { m, .. } => {
                out.add_term(Vec::new(), Base::Q(n + m), &ParamPoly::int(n));
            }
        },
        (ModuleKind::QTensor { lambda }, Base::Qw(n, k)) => {
            let lambda = *lambda;
            match *l {
                Letter::Loop { m, u, .. } => {
                    if g.dim() != 3 {
                        return Err(PbwError::BaseMismatch(
                            "the weighted module needs an sl2-shaped finite algebra".into(),
                        ));
                    }
                    for (k2, c) in sl2_weight_action(g, u, k, lambda) {
                        out.add_term(Vec::new(), Base::Qw(n + m, k2), &ParamPoly::constant(c));
                    }
                }
                Letter::K { m, .. } => {
                    out.add_term(Vec::new(), Base::Qw(n + m, k), &module.ell.scale(&ratq(1, m)));
                }
                Letter::T1 { .. } => {
                    let c = &ParamPoly::int(n) + &module.alpha;
                    out.add_term(Vec::new(), Base::Qw(n, k), &c);
                }
                Letter::D { m, .. } => {
                    let c = &(&ParamPoly::int(n) + &module.alpha) + &module.beta.scale(&rat(m));
                    out.add_term(Vec::new(), Base::Qw(n + m, k), &c);
                }
            }
        }
        _ => unreachable!("degree-zero base action in a vacuum module"),
    }
    Ok(out)
}

/// Action of a finite algebra basis element on the weight basis `w_0`
/// (highest) through `w_lambda` of the irreducible sl2 module.
pub(crate) fn sl2_weight_action(
    g: &SimpleAlgebra,
    u: u8,
    k: u8,
    lambda: u8,
) -> Vec<(u8, Rational)> {
    assert!(g.dim() == 3, "the weight action needs an sl2-shaped finite algebra");
    match u {
        0 => {
            if k >= 1 {
                vec![(k - 1, rat(i64::from(k) * (i64::from(lambda) - i64::from(k) + 1)))]
            } else {
                Vec::new()
            }
        }
        1 => vec![(k, rat(i64::from(lambda) - 2 * i64::from(k)))],
        _ => {
            if k < lambda {
                vec![(k + 1, rat(1))]
            } else {
                Vec::new()
            }
        }
    }
}

/// One summand of a decomposed algebra element.
pub(crate) enum Op {
    Letter(Letter),
    /// `k0`, acting as the level everywhere.
    Level,
    /// `k1`, acting as zero everywhere.
    Central1,
    /// `t0^-1 d0`, the negated translation operator of the vacuum module.
    Translate,
    /// `d0`, diagonal on the graded loop inductions.
    Degree,
}

/// Splits an algebra element into letters and special operators, checking
/// membership in the acting algebra of the given module kind.
///
/// The derivation plane at `t1`-index `m != 0` admits only the direction
/// `-m d0 + (a+1) d1`; its multiple is rewritten as `d_{a,m}` minus the mu
/// correction, which lands on the `k_{a,m}` letter.
pub(crate) fn decompose(kind: &ModuleKind, x: &TorElem) -> Result<Vec<(ParamPoly, Op)>, PbwError> {
    let mut ops: Vec<(ParamPoly, Op)> = Vec::new();
    let mut kmap: BTreeMap<(i64, i64), ParamPoly> = BTreeMap::new();
    let mut der: BTreeMap<(i64, i64), [ParamPoly; 2]> = BTreeMap::new();
    for (sym, c) in x.iter() {
        match *sym {
            TorSym::Loop { m0, m1, u } => {
                ops.push((c.clone(), Op::Letter(Letter::Loop { a: m0, m: m1, u })));
            }
            TorSym::Kmn { m0, m1 } => {
                let entry = kmap.entry((m0, m1)).or_insert_with(ParamPoly::zero);
                *entry = &*entry + c;
            }
            TorSym::K0 => ops.push((c.clone(), Op::Level)),
            TorSym::K1 => ops.push((c.clone(), Op::Central1)),
            TorSym::Der { m0, m1, i } => {
                let entry = der.entry((m0, m1)).or_insert([ParamPoly::zero(), ParamPoly::zero()]);
                entry[usize::from(i)] = &entry[usize::from(i)] + c;
            }
        }
    }
    let mu = ParamPoly::param(Param::Mu);
    for ((p, m), [c0, c1]) in der {
        if m == 0 {
            if !c0.is_zero() {
                let op = match (p, kind) {
                    (-1, ModuleKind::Vacuum) => Op::Translate,
                    (0, ModuleKind::QLine) | (0, ModuleKind::QTensor { .. }) => Op::Degree,
                    _ => {
                        return Err(PbwError::OutsideAlgebra(format!(
                            "t0^{} d0 is not available here",
                            p
                        )))
                    }
                };
                ops.push((c0, op));
            }
            if !c1.is_zero() {
                ops.push((c1, Op::Letter(Letter::T1 { a: p })));
            }
        } else {
            let lam = c0.scale(&ratq(-1, m));
            let resid = &c1 - &lam.scale(&rat(p + 1));
            if !resid.is_zero() {
                return Err(PbwError::OutsideAlgebra(format!(
                    "derivation at bidegree ({},{}) leaves the admissible line",
                    p, m
                )));
            }
            if lam.is_zero() {
                continue;
            }
            let corr = (&lam * &mu).scale(&ratq(-(2 * p + 1) * m * m, 2));
            let entry = kmap.entry((p, m)).or_insert_with(ParamPoly::zero);
            *entry = &*entry + &corr;
            ops.push((lam, Op::Letter(Letter::D { a: p, m })));
        }
    }
    for ((a, m), c) in kmap {
        if !c.is_zero() {
            ops.push((c, Op::Letter(Letter::K { a, m })));
        }
    }
    Ok(ops)
}

fn act_elem(
    t: &Toroidal,
    module: &Module,
    x: &TorElem,
    word: &[Letter],
    base: Base,
) -> Result<ModVec, PbwError> {
    let mut out = ModVec::zero();
    for (c, op) in decompose(&module.kind, x)? {
        let part = act_op(t, module, &op, word, base)?;
        out = out.add(&part.scale(&c));
    }
    Ok(out)
}

fn act_op(
    t: &Toroidal,
    module: &Module,
    op: &Op,
    word: &[Letter],
    base: Base,
) -> Result<ModVec, PbwError> {
    match op {
        Op::Level => Ok(ModVec::word(word.to_vec(), base).scale(&module.ell)),
        Op::Central1 => Ok(ModVec::zero()),
        Op::Degree => {
            let eigen: i64 = word.iter().map(Letter::t0deg).sum();
            Ok(ModVec::word(word.to_vec(), base).scale(&ParamPoly::int(eigen)))
        }
        Op::Translate => match word.split_first() {
            None => Ok(ModVec::zero()),
            Some((h, rest)) => {
                let inner = act_op(t, module, op, rest, base)?;
                let moved = prepend(t, module, *h, &inner)?;
                let br = t.bracket(&TorElem::der_gen(-1, 0, 0), &h.elem());
                let swapped = act_elem(t, module, &br, rest, base)?;
                Ok(moved.add(&swapped))
            }
        },
        Op::Letter(l) => {
            let creator = matches!(classify(&module.kind, l), Class::Creator);
            match word.split_first() {
                None => match classify(&module.kind, l) {
                    Class::Creator => Ok(ModVec::word(vec![*l], base)),
                    Class::Annihilator => Ok(ModVec::zero()),
                    Class::DegreeZero => base_apply(module, t.algebra(), l, base),
                },
                Some((h, rest)) => {
                    if creator && *l >= *h {
                        let mut w = Vec::with_capacity(word.len() + 1);
                        w.push(*l);
                        w.extend_from_slice(word);
                        Ok(ModVec::word(w, base))
                    } else {
                        let inner = act_op(t, module, &Op::Letter(*l), rest, base)?;
                        let moved = prepend(t, module, *h, &inner)?;
                        let br = t.bracket(&l.elem(), &h.elem());
                        let swapped = act_elem(t, module, &br, rest, base)?;
                        Ok(moved.add(&swapped))
                    }
                }
            }
        }
    }
}

/// Left-multiplies every term of `v` by the creation letter `h`,
/// re-sorting where `h` is no longer the largest letter.
fn prepend(t: &Toroidal, module: &Module, h: Letter, v: &ModVec) -> Result<ModVec, PbwError> {
    let mut out = ModVec::zero();
    for ((word, base), c) in v.iter() {
        let part = if word.first().map_or(true, |w| h >= *w) {
            let mut w = Vec::with_capacity(word.len() + 1);
            w.push(h);
            w.extend_from_slice(word);
            ModVec::word(w, *base)
        } else {
            act_op(t, module, &Op::Letter(h), word, *base)?
        };
        out = out.add(&part.scale(c));
    }
    Ok(out)
}

/// Applies an algebra element to a module vector, returning the normal
/// form of the result.
pub fn act(t: &Toroidal, module: &Module, x: &TorElem, v: &ModVec) -> Result<ModVec, PbwError> {
    let mut out = ModVec::zero();
    for ((word, base), c) in v.iter() {
        check_base(module, base)?;
        let part = act_elem(t, module, x, word, *base)?;
        out = out.add(&part.scale(c));
    }
    Ok(out)
}

/// The module axiom residual `[x,y]v - x(yv) + y(xv)`; zero whenever the
/// action is consistent.
pub fn rep_consistency(
    t: &Toroidal,
    module: &Module,
    x: &TorElem,
    y: &TorElem,
    v: &ModVec,
) -> Result<ModVec, PbwError> {
    let br = act(t, module, &t.bracket(x, y), v)?;
    let xy = act(t, module, x, &act(t, module, y, v)?)?;
    let yx = act(t, module, y, &act(t, module, x, v)?)?;
    Ok(br.sub(&xy).add(&yx))
}

/// The canonical derivation of the vacuum module, the action of the
/// negative of `t0^-1 d0`.  It kills the vacuum and satisfies
/// `[translation, a(n)] = -n a(n-1)` on field modes.
pub fn translation(t: &Toroidal, module: &Module, v: &ModVec) -> Result<ModVec, PbwError> {
    if module.kind != ModuleKind::Vacuum {
        return Err(PbwError::BaseMismatch(
            "the translation operator lives on the vacuum module".into(),
        ));
    }
    act(t, module, &-&TorElem::der_gen(-1, 0, 0), v)
}

/// The mode `a(n)` of a generating field, as an algebra element: loops,
/// `k1` and `d1` at `t0`-mode `n`, the `K` family shifted up once, the `D`
/// family shifted down once.
pub fn gen_mode(gen: Gen, mode: i64) -> Result<TorElem, PbwError> {
    match gen {
        Gen::Loop { m, u } => Ok(TorElem::loop_gen(mode, m, u)),
        Gen::K1 => Ok(reduce_k(mode, 0, &ParamPoly::zero(), &ParamPoly::one())),
        Gen::D1 => Ok(TorElem::der_gen(mode, 0, 1)),
        Gen::BigK(n) if n != 0 => Ok(TorElem::kmn(mode + 1, n)),
        Gen::BigD(n) if n != 0 => Ok(dvar(mode - 1, n)),
        _ => Err(PbwError::OutsideAlgebra(
            "the index-zero K and D series are not generators of the mode algebra".into(),
        )),
    }
}

fn mode_t0deg(gen: Gen, mode: i64) -> i64 {
    match gen {
        Gen::Loop { .. } | Gen::K1 | Gen::D1 => mode,
        Gen::BigK(_) => mode + 1,
        Gen::BigD(_) => mode - 1,
    }
}

/// `a(n) v` for one generator mode.
pub fn field_coeff(
    t: &Toroidal,
    module: &Module,
    gen: Gen,
    mode: i64,
    v: &ModVec,
) -> Result<ModVec, PbwError> {
    act(t, module, &gen_mode(gen, mode)?, v)
}

/// All coefficients `a(n) v` for `n` in `lo..=hi`.  Also asserts the
/// truncation the grading forces: modes whose `t0`-degree exceeds the
/// degree bound of `v` must give zero, a couple of modes past the window
/// included.
pub fn field_window(
    t: &Toroidal,
    module: &Module,
    gen: Gen,
    v: &ModVec,
    lo: i64,
    hi: i64,
) -> Result<Vec<(i64, ModVec)>, PbwError> {
    let bound = degree_bound(v).unwrap_or(i64::MIN);
    let mut out = Vec::new();
    for n in lo..=hi.max(lo) {
        let coeff = field_coeff(t, module, gen, n, v)?;
        if mode_t0deg(gen, n) > bound {
            assert!(
                coeff.is_zero(),
                "field coefficient {:?}({}) fails to truncate",
                gen,
                n
            );
        }
        out.push((n, coeff));
    }
    for n in hi + 1..=hi + 2 {
        if mode_t0deg(gen, n) > bound {
            assert!(
                field_coeff(t, module, gen, n, v)?.is_zero(),
                "field coefficient {:?}({}) fails to truncate",
                gen,
                n
            );
        }
    }
    Ok(out)
}

/// Whether every coefficient of the `k`-th power of the loop field of the
/// isotropic vector `u` (at `t1`-index `m`) kills `v` across the given
/// range of total modes.  The module level must be a concrete rational.
///
/// The coefficient at total mode `M` is the sum of `a(n_1)...a(n_k) v`
/// over mode tuples summing to `M`.  Since the modes of an isotropic root
/// vector commute, a factor with `t0`-degree above the degree bound of `v`
/// can be moved to the right where it acts as zero, so the sum is finite.
pub fn nilpotency_probe(
    t: &Toroidal,
    module: &Module,
    m: i64,
    u: u8,
    v: &ModVec,
    k: u32,
    lo: i64,
    hi: i64,
) -> Result<bool, PbwError> {
    if module.ell.as_constant().is_none() {
        return Err(PbwError::FormalLevel);
    }
    let g = t.algebra();
    if !g.form(u, u).is_zero() || !g.bracket_basis(u, u).is_empty() {
        return Err(PbwError::OutsideAlgebra(
            "the power probe needs an isotropic vector with [u,u] = 0".into(),
        ));
    }
    assert!(k >= 1, "the field power must be positive");
    let bound = match degree_bound(v) {
        Some(b) => b,
        None => return Ok(true),
    };
    for total in lo..=hi {
        let coeff = power_apply(t, module, m, u, k, total, total - (i64::from(k) - 1) * bound, bound, v)?;
        if !coeff.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn power_apply(
    t: &Toroidal,
    module: &Module,
    m: i64,
    u: u8,
    k: u32,
    total: i64,
    box_lo: i64,
    box_hi: i64,
    v: &ModVec,
) -> Result<ModVec, PbwError> {
    if k == 1 {
        if total < box_lo || total > box_hi {
            return Ok(ModVec::zero());
        }
        return act(t, module, &TorElem::loop_gen(total, m, u), v);
    }
    let rest = i64::from(k) - 1;
    let n_lo = box_lo.max(total - rest * box_hi);
    let n_hi = box_hi.min(total - rest * box_lo);
    let mut out = ModVec::zero();
    for n in n_lo..=n_hi {
        let applied = act(t, module, &TorElem::loop_gen(n, m, u), v)?;
        if applied.is_zero() {
            continue;
        }
        let inner = power_apply(t, module, m, u, k - 1, total - n, box_lo, box_hi, &applied)?;
        out = out.add(&inner);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{dbar, grade, show_elem};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const E: u8 = 0;
    const H: u8 = 1;
    const F: u8 = 2;

    fn ell() -> ParamPoly {
        ParamPoly::param(Param::Ell)
    }

    fn mu() -> ParamPoly {
        ParamPoly::param(Param::Mu)
    }

    fn t1k0(n: i64) -> TorElem {
        reduce_k(0, n, &ParamPoly::one(), &ParamPoly::zero())
    }

    #[test]
    fn vacuum_annihilation_and_level() {
        let t = Toroidal::sl2();
        let md = Module::vacuum();
        let one = ModVec::vacuum();
        let level = act(&t, &md, &TorElem::k0(), &one).unwrap();
        assert_eq!(level, one.scale(&ell()));
        for killer in [
            TorElem::loop_gen(0, 3, E),
            TorElem::loop_gen(2, -1, H),
            reduce_k(1, 0, &ParamPoly::zero(), &ParamPoly::one()),
            TorElem::der_gen(0, 0, 1),
            TorElem::k1(),
            dvar(-1, 5),
            TorElem::kmn(1, 2),
        ] {
            let out = act(&t, &md, &killer, &one).unwrap();
            assert!(out.is_zero(), "{} should kill the vacuum", show_elem(&killer, t.algebra()));
        }
        let created = act(&t, &md, &TorElem::kmn(0, 5), &one).unwrap();
        assert_eq!(created, ModVec::word(vec![Letter::K { a: 0, m: 5 }], Base::One));
        let created = act(&t, &md, &dvar(-2, 3), &one).unwrap();
        assert_eq!(created, ModVec::word(vec![Letter::D { a: -2, m: 3 }], Base::One));
        let created = act(&t, &md, &TorElem::der_gen(-1, 0, 1), &one).unwrap();
        assert_eq!(created, ModVec::word(vec![Letter::T1 { a: -1 }], Base::One));
    }

    #[test]
    fn commuting_creators_share_a_normal_form() {
        let t = Toroidal::sl2();
        let md = Module::vacuum();
        let one = ModVec::vacuum();
        let e1 = TorElem::loop_gen(-1, 0, E);
        let e2 = TorElem::loop_gen(-2, 0, E);
        let ab = act(&t, &md, &e1, &act(&t, &md, &e2, &one).unwrap()).unwrap();
        let ba = act(&t, &md, &e2, &act(&t, &md, &e1, &one).unwrap()).unwrap();
        assert_eq!(ab, ba);
        assert_eq!(
            ab,
            ModVec::word(
                vec![Letter::Loop { a: -1, m: 0, u: E }, Letter::Loop { a: -2, m: 0, u: E }],
                Base::One
            )
        );
    }

    #[test]
    fn swapping_creators_produces_the_bracket_correction() {
        let t = Toroidal::sl2();
        let md = Module::vacuum();
        let one = ModVec::vacuum();
        let h1 = TorElem::loop_gen(-1, 0, H);
        let e1 = TorElem::loop_gen(-1, 0, E);
        let he = act(&t, &md, &h1, &act(&t, &md, &e1, &one).unwrap()).unwrap();
        let sorted = ModVec::word(
            vec![Letter::Loop { a: -1, m: 0, u: H }, Letter::Loop { a: -1, m: 0, u: E }],
            Base::One,
        );
        assert_eq!(he, sorted);
        let eh = act(&t, &md, &e1, &act(&t, &md, &h1, &one).unwrap()).unwrap();
        let correction = ModVec::word(vec![Letter::Loop { a: -2, m: 0, u: E }], Base::One);
        assert_eq!(eh, sorted.add(&correction.scale(&ParamPoly::int(-2))));
    }

    #[test]
    fn derivation_letters_absorb_the_mu_correction() {
        let t = Toroidal::sl2();
        let md = Module::vacuum();
        let one = ModVec::vacuum();
        let out = act(&t, &md, &dbar(-3, 2), &one).unwrap();
        let mut want = ModVec::word(vec![Letter::D { a: -3, m: 2 }], Base::One);
        want.add_term(
            vec![Letter::K { a: -3, m: 2 }],
            Base::One,
            &mu().scale(&rat(10)),
        );
        assert_eq!(out, want);
    }

    #[test]
    fn q_line_base_rules() {
        let t = Toroidal::sl2();
        let md = Module::q_line();
        for m in [-2i64, 0, 3] {
            for n in [-1i64, 0, 2] {
                let out = act(&t, &md, &t1k0(m), &ModVec::base_q(n)).unwrap();
                assert_eq!(out, ModVec::base_q(n + m).scale(&ell()));
                let out = act(&t, &md, &dvar(0, m), &ModVec::base_q(n)).unwrap();
                assert_eq!(out, ModVec::base_q(n + m).scale(&ParamPoly::int(n)));
            }
        }
        assert!(act(&t, &md, &TorElem::loop_gen(0, 2, E), &ModVec::base_q(1))
            .unwrap()
            .is_zero());
        assert!(act(&t, &md, &TorElem::k1(), &ModVec::base_q(1)).unwrap().is_zero());
    }

    #[test]
    fn weighted_base_rules() {
        let t = Toroidal::sl2();
        let md = Module::q_tensor(2);
        let alpha = ParamPoly::param(Param::Alpha);
        let beta = ParamPoly::param(Param::Beta);
        let out = act(&t, &md, &dvar(0, 3), &ModVec::base_qw(1, 1)).unwrap();
        let coeff = &(&ParamPoly::int(1) + &alpha) + &beta.scale(&rat(3));
        assert_eq!(out, ModVec::base_qw(4, 1).scale(&coeff));
        let out = act(&t, &md, &TorElem::loop_gen(0, 2, H), &ModVec::base_qw(0, 1)).unwrap();
        assert!(out.is_zero(), "middle weight vector of lambda = 2 has h-eigenvalue 0");
        let out = act(&t, &md, &TorElem::loop_gen(0, 1, E), &ModVec::base_qw(0, 1)).unwrap();
        assert_eq!(out, ModVec::base_qw(1, 0).scale(&ParamPoly::int(2)));
        let out = act(&t, &md, &TorElem::loop_gen(0, 0, F), &ModVec::base_qw(2, 2)).unwrap();
        assert!(out.is_zero(), "f kills the lowest weight vector");
        let out = act(&t, &md, &TorElem::k0(), &ModVec::base_qw(0, 2)).unwrap();
        assert_eq!(out, ModVec::base_qw(0, 2).scale(&ell()));
    }

    #[test]
    fn module_axiom_spot_checks() {
        let t = Toroidal::sl2();
        let md = Module::vacuum();
        let one = ModVec::vacuum();
        let x = dvar(1, -2);
        let y = TorElem::kmn(-1, 2);
        assert!(rep_consistency(&t, &md, &x, &y, &one).unwrap().is_zero());
        let central = act(&t, &md, &t.bracket(&x, &y), &one).unwrap();
        assert_eq!(central, one.scale(&ell().scale(&rat(2))));
        let e = TorElem::loop_gen(-1, 0, E);
        let f = TorElem::loop_gen(-1, 0, F);
        assert!(rep_consistency(&t, &md, &e, &f, &one).unwrap().is_zero());
        let x = dvar(-2, 1);
        let v = ModVec::word(vec![Letter::K { a: 0, m: 1 }], Base::One);
        assert!(rep_consistency(&t, &md, &x, &x, &v).unwrap().is_zero());
    }

    fn sample_pool(rng: &mut StdRng) -> TorElem {
        let a = rng.gen_range(-2..=2);
        let m = rng.gen_range(-2..=2);
        match rng.gen_range(0..5) {
            0 => TorElem::loop_gen(a, m, rng.gen_range(0..3)),
            1 => {
                if (a, m) == (0, 0) {
                    TorElem::k0()
                } else {
                    TorElem::kmn(a, m)
                }
            }
            2 => TorElem::der_gen(a, 0, 1),
            3 => {
                if m == 0 {
                    TorElem::der_gen(a, 0, 1)
                } else {
                    dvar(a, m)
                }
            }
            _ => reduce_k(a, m, &ParamPoly::one(), &ParamPoly::zero()),
        }
    }

    fn sample_word(rng: &mut StdRng, kind: &ModuleKind) -> Vec<Letter> {
        let len = rng.gen_range(0..=2);
        let mut word: Vec<Letter> = (0..len)
            .map(|_| {
                let m = rng.gen_range(-2..=2);
                match rng.gen_range(0..4) {
                    0 => Letter::Loop { a: rng.gen_range(-2..=-1), m, u: rng.gen_range(0..3) },
                    1 => {
                        let a = match kind {
                            ModuleKind::Vacuum => rng.gen_range(-2..=0),
                            _ => rng.gen_range(-2..=-1),
                        };
                        let m = if a == 0 { rng.gen_range(1..=2) } else { m };
                        Letter::K { a, m }
                    }
                    2 => Letter::T1 { a: rng.gen_range(-2..=-1) },
                    _ => {
                        let a = match kind {
                            ModuleKind::Vacuum => rng.gen_range(-3..=-2),
                            _ => rng.gen_range(-2..=-1),
                        };
                        Letter::D { a, m: if m == 0 { 1 } else { m } }
                    }
                }
            })
            .collect();
        word.sort();
        word.reverse();
        word
    }

    #[test]
    fn module_axiom_sampled() {
        let t = Toroidal::sl2();
        let modules = [Module::vacuum(), Module::q_line(), Module::q_tensor(2)];
        let mut rng = StdRng::seed_from_u64(42);
        for md in &modules {
            for _ in 0..30 {
                let x = sample_pool(&mut rng);
                let y = sample_pool(&mut rng);
                let word = sample_word(&mut rng, &md.kind);
                let base = match md.kind {
                    ModuleKind::Vacuum => Base::One,
                    ModuleKind::QLine => Base::Q(rng.gen_range(-2..=2)),
                    ModuleKind::QTensor { .. } => {
                        Base::Qw(rng.gen_range(-2..=2), rng.gen_range(0..=2))
                    }
                };
                let v = ModVec::word(word, base);
                let res = rep_consistency(&t, md, &x, &y, &v).unwrap();
                assert!(
                    res.is_zero(),
                    "axiom residual {} for x = {}, y = {}",
                    show_modvec(&res, t.algebra()),
                    show_elem(&x, t.algebra()),
                    show_elem(&y, t.algebra())
                );
            }
        }
    }

    #[test]
    fn translation_examples() {
        let t = Toroidal::sl2();
        let md = Module::vacuum();
        let one = ModVec::vacuum();
        assert!(translation(&t, &md, &one).unwrap().is_zero());
        let v = ModVec::word(vec![Letter::Loop { a: -1, m: 0, u: E }], Base::One);
        let out = translation(&t, &md, &v).unwrap();
        assert_eq!(out, ModVec::word(vec![Letter::Loop { a: -2, m: 0, u: E }], Base::One));
        let v = ModVec::word(vec![Letter::K { a: 0, m: 3 }], Base::One);
        let out = translation(&t, &md, &v).unwrap();
        assert_eq!(out, ModVec::word(vec![Letter::K { a: -1, m: 3 }], Base::One));
        assert_eq!(
            translation(&t, &Module::q_line(), &ModVec::base_q(0)),
            Err(PbwError::BaseMismatch(
                "the translation operator lives on the vacuum module".into()
            ))
        );
    }

    #[test]
    fn translation_commutes_like_a_mode_shift() {
        let t = Toroidal::sl2();
        let md = Module::vacuum();
        let vectors = [
            ModVec::vacuum(),
            ModVec::word(vec![Letter::Loop { a: -1, m: 1, u: F }], Base::One),
            ModVec::word(vec![Letter::D { a: -2, m: 1 }, Letter::K { a: 0, m: -1 }], Base::One),
        ];
        let gens = [
            Gen::Loop { m: 2, u: E },
            Gen::K1,
            Gen::D1,
            Gen::BigK(-1),
            Gen::BigD(2),
        ];
        for v in &vectors {
            for &gen in &gens {
                for n in [-2i64, 0, 1] {
                    let av = field_coeff(&t, &md, gen, n, v).unwrap();
                    let lhs = translation(&t, &md, &av)
                        .unwrap()
                        .sub(&field_coeff(&t, &md, gen, n, &translation(&t, &md, v).unwrap()).unwrap());
                    let rhs = field_coeff(&t, &md, gen, n - 1, v)
                        .unwrap()
                        .scale(&ParamPoly::int(-n));
                    assert_eq!(lhs, rhs, "derivation rule at {:?}({})", gen, n);
                }
            }
        }
    }

    fn term_bigrade(word: &[Letter]) -> (i64, i64) {
        (
            word.iter().map(|l| -l.t0deg()).sum(),
            word.iter().map(Letter::weight).sum(),
        )
    }

    #[test]
    fn vacuum_action_respects_the_bigrading() {
        let t = Toroidal::sl2();
        let md = Module::vacuum();
        let v = ModVec::word(vec![Letter::D { a: -2, m: 1 }, Letter::K { a: 0, m: 2 }], Base::One);
        let vgrade = (2i64, 3i64);
        for x in [
            TorElem::loop_gen(-2, 3, E),
            dvar(-3, 2),
            TorElem::kmn(-1, 4),
            reduce_k(-2, 0, &ParamPoly::zero(), &ParamPoly::one()),
            TorElem::der_gen(-1, 0, 1),
            TorElem::loop_gen(1, -2, F),
        ] {
            let (d, w) = grade(&x).expect("homogeneous generator");
            let out = act(&t, &md, &x, &v).unwrap();
            for ((word, _), _) in out.iter() {
                assert_eq!(term_bigrade(word), (vgrade.0 + d, vgrade.1 + w));
            }
        }
    }

    #[test]
    fn field_coefficients_and_truncation() {
        let t = Toroidal::sl2();
        let md = Module::vacuum();
        let one = ModVec::vacuum();
        assert!(field_coeff(&t, &md, Gen::BigK(2), 0, &one).unwrap().is_zero());
        let out = field_coeff(&t, &md, Gen::Loop { m: 1, u: E }, -1, &one).unwrap();
        assert_eq!(out, ModVec::word(vec![Letter::Loop { a: -1, m: 1, u: E }], Base::One));
        let window = field_window(&t, &md, Gen::BigD(2), &one, -3, 3).unwrap();
        for (n, coeff) in &window {
            if *n >= 0 {
                assert!(coeff.is_zero(), "annihilating mode {}", n);
            }
        }
        let minus_one = window.iter().find(|(n, _)| *n == -1).unwrap();
        assert_eq!(minus_one.1, ModVec::word(vec![Letter::D { a: -2, m: 2 }], Base::One));
        assert!(matches!(
            field_coeff(&t, &md, Gen::BigK(0), -1, &one),
            Err(PbwError::OutsideAlgebra(_))
        ));
    }

    #[test]
    fn power_probe_reports_windowed_vanishing() {
        let t = Toroidal::sl2();
        let trivial = Module::vacuum_level(rat(0));
        let one = ModVec::vacuum();
        assert!(nilpotency_probe(&t, &trivial, 0, E, &one, 2, -1, 2).unwrap());
        let generic = Module::vacuum_level(rat(1));
        assert!(!nilpotency_probe(&t, &generic, 0, E, &one, 1, -2, 0).unwrap());
        let deep = ModVec::word(vec![Letter::Loop { a: -1, m: 0, u: E }], Base::One);
        assert!(!nilpotency_probe(&t, &generic, 0, E, &deep, 2, -4, -1).unwrap());
        assert_eq!(
            nilpotency_probe(&t, &Module::vacuum(), 0, E, &one, 2, -1, 1),
            Err(PbwError::FormalLevel)
        );
        assert!(matches!(
            nilpotency_probe(&t, &generic, 0, H, &one, 2, -1, 1),
            Err(PbwError::OutsideAlgebra(_))
        ));
    }

    #[test]
    fn acting_algebra_boundaries() {
        let t = Toroidal::sl2();
        let vac = Module::vacuum();
        let one = ModVec::vacuum();
        assert!(matches!(
            act(&t, &vac, &TorElem::der_gen(0, 0, 0), &one),
            Err(PbwError::OutsideAlgebra(_))
        ));
        assert!(matches!(
            act(&t, &vac, &TorElem::der_gen(2, 3, 1), &one),
            Err(PbwError::OutsideAlgebra(_))
        ));
        let line = Module::q_line();
        assert!(matches!(
            act(&t, &line, &TorElem::der_gen(-1, 0, 0), &ModVec::base_q(0)),
            Err(PbwError::OutsideAlgebra(_))
        ));
        let d0 = TorElem::der_gen(0, 0, 0);
        assert!(act(&t, &line, &d0, &ModVec::base_q(2)).unwrap().is_zero());
        let v = act(&t, &line, &TorElem::loop_gen(-1, 1, E), &ModVec::base_q(0)).unwrap();
        let out = act(&t, &line, &d0, &v).unwrap();
        assert_eq!(out, v.scale(&ParamPoly::int(-1)));
        assert!(matches!(
            act(&t, &vac, &TorElem::zero(), &ModVec::base_q(0)),
            Err(PbwError::BaseMismatch(_))
        ));
    }

    #[test]
    fn degree_zero_relations_act_consistently() {
        let t = Toroidal::sl2();
        let md = Module::q_tensor(1);
        let k1 = TorElem::k1();
        for m in -3i64..=3 {
            for n in -3i64..=3 {
                let dm = dvar(0, m);
                let dn = dvar(0, n);
                let mut want = dvar(0, m + n).scale_rat(&rat(n - m));
                if m + n == 0 {
                    want = &want + &k1.scale(&mu().scale(&rat(2 * m * m * m)));
                }
                assert_eq!(t.bracket(&dm, &dn), want);
                // The central tail is nm k1: substitute n k_{0,n} = t1^n k0
                // into the k family bracket.  A linear tail m k1 is listed
                // in some displays of this relation; the two are
                // indistinguishable on the loop modules, where k1 acts as
                // zero, but only the bilinear one matches the structure
                // constants.
                let mut want = t1k0(m + n).scale_rat(&rat(n));
                if m + n == 0 {
                    want = &want + &k1.scale_rat(&rat(n * m));
                }
                assert_eq!(t.bracket(&dm, &t1k0(n)), want);
                assert_eq!(
                    t.bracket(&dm, &TorElem::loop_gen(0, n, H)),
                    TorElem::loop_gen(0, m + n, H).scale(&ParamPoly::int(n))
                );
                assert!(t.bracket(&t1k0(m), &t1k0(n)).is_zero());
                assert!(t.bracket(&t1k0(m), &TorElem::loop_gen(0, n, E)).is_zero());
                let loops = t.bracket(&TorElem::loop_gen(0, m, E), &TorElem::loop_gen(0, n, F));
                let mut want = TorElem::loop_gen(0, m + n, H);
                if m + n == 0 {
                    want = &want + &k1.scale_rat(&rat(m));
                }
                assert_eq!(loops, want);
                for base in [ModVec::base_qw(0, 0), ModVec::base_qw(-1, 1)] {
                    for (x, y) in [
                        (dm.clone(), dn.clone()),
                        (dm.clone(), t1k0(n)),
                        (dm.clone(), TorElem::loop_gen(0, n, F)),
                        (t1k0(m), TorElem::loop_gen(0, n, E)),
                        (TorElem::loop_gen(0, m, E), TorElem::loop_gen(0, n, F)),
                    ] {
                        assert!(rep_consistency(&t, &md, &x, &y, &base).unwrap().is_zero());
                    }
                    // Under act the central tail drops out, so the variant
                    // with the linear tail agrees as well.
                    let mut printed = t1k0(m + n).scale_rat(&rat(n));
                    if m + n == 0 {
                        printed = &printed + &k1.scale_rat(&rat(m));
                    }
                    assert_eq!(
                        act(&t, &md, &t.bracket(&dm, &t1k0(n)), &base).unwrap(),
                        act(&t, &md, &printed, &base).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn rendering_reads_like_the_bracket_engine() {
        let t = Toroidal::sl2();
        let mut v = ModVec::word(
            vec![Letter::D { a: -2, m: 1 }, Letter::Loop { a: -1, m: 0, u: E }],
            Base::One,
        );
        v.add_term(vec![Letter::T1 { a: -1 }], Base::One, &ell());
        assert_eq!(
            show_modvec(&v, t.algebra()),
            "ell*der(-1,0,1) 1 + dvar(-2,1) loop(-1,0,e) 1"
        );
        assert_eq!(show_modvec(&ModVec::zero(), t.algebra()), "0");
        assert_eq!(show_modvec(&ModVec::base_qw(2, 1), t.algebra()), "q^2 w1");
    }
}
