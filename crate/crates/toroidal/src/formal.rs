//! Windowed formal distributions and truncated Laurent series.
//!
//! A generating function in one or two formal variables is stored as a
//! [`DistWindow`]: a finite table of coefficients indexed by literal powers of
//! `z` and `w`, together with explicit window bounds.  The bounds are part of
//! the data and mean "every power in this range is known exactly"; a missing
//! entry inside the window is a known zero, while anything outside is simply
//! not represented.  Arithmetic intersects windows, so a result never claims
//! more than its inputs support.  Derivatives shift the window accordingly.
//!
//! Series with a logarithmic tail (the `K0` generating function carries a
//! `k1 log z` term) keep those coefficients in separate slots, one per
//! combination of `log z` and `log w` factors.  Differentiation folds a log
//! slot back into the plain table via `d/dz (log z * c) = c * z^-1`; a product
//! of two series that both carry a log in the same variable is rejected.
//!
//! [`delta_term`] expands the building block of every closed commutator
//! formula, `A(w)` times a derivative of a delta distribution, into window
//! coefficients.  Both delta conventions appear:
//!
//! * square style, `A(w) (w d/dw)^r delta(w/z)` with
//!   `delta(w/z) = sum_i w^i z^-i`,
//! * round style, `A(w) (d/dw)^r [z^-1 delta(w/z)]` with
//!   `z^-1 delta(w/z) = sum_i w^i z^-i-1`.
//!
//! Each collapses to a single re-indexed copy of `A`, so the expansion is
//! exact whenever the window of `A` is wide enough; too narrow a window is a
//! panic, never a silent truncation.
//!
//! [`LaurentSeries`] is the one-variable companion used by the change of
//! coordinates: a coefficient vector with an explicit truncation order, exact
//! rational or polynomial entries, and inversion for series with an
//! invertible leading term.  [`series_product_suite`] pins down the handful
//! of log-power expansions that the square-bracket mode combinations rely on.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::liealg::TorElem;
use crate::scalar::{ffact_int, rat, ParamPoly, Rational};

/// Errors from series inversion.
#[derive(Debug, Error)]
pub enum FormalError {
    /// The zero series has no inverse at any truncation order.
    #[error("cannot invert a series with no known nonzero term")]
    ZeroSeries,
    /// Inversion needs a nonzero constant leading coefficient.
    #[error("leading coefficient {0} is not an invertible constant")]
    NotInvertible(String),
}

/// Inclusive power bounds for the two formal variables.
///
/// A univariate series in `z` uses `wlo = whi = 0` and keeps all its
/// coefficients at `w` power zero, and symmetrically for a series in `w`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Window {
    pub zlo: i64,
    pub zhi: i64,
    pub wlo: i64,
    pub whi: i64,
}

impl Window {
    pub fn new(zlo: i64, zhi: i64, wlo: i64, whi: i64) -> Window {
        assert!(zlo <= zhi && wlo <= whi, "empty window bounds");
        Window { zlo, zhi, wlo, whi }
    }

    /// Same range for both variables.
    pub fn square(lo: i64, hi: i64) -> Window {
        Window::new(lo, hi, lo, hi)
    }

    /// Univariate window in `z`.
    pub fn z_only(lo: i64, hi: i64) -> Window {
        Window::new(lo, hi, 0, 0)
    }

    /// Univariate window in `w`.
    pub fn w_only(lo: i64, hi: i64) -> Window {
        Window::new(0, 0, lo, hi)
    }

    /// Intersection; may come out empty, which `contains` then reports.
    pub fn intersect(self, other: Window) -> Window {
        Window {
            zlo: self.zlo.max(other.zlo),
            zhi: self.zhi.min(other.zhi),
            wlo: self.wlo.max(other.wlo),
            whi: self.whi.min(other.whi),
        }
    }

    pub fn contains(self, a: i64, b: i64) -> bool {
        self.zlo <= a && a <= self.zhi && self.wlo <= b && b <= self.whi
    }

    pub fn contains_window(self, other: Window) -> bool {
        self.zlo <= other.zlo
            && other.zhi <= self.zhi
            && self.wlo <= other.wlo
            && other.whi <= self.whi
    }

    pub fn is_empty(self) -> bool {
        self.zlo > self.zhi || self.wlo > self.whi
    }
}

/// Which combination of log factors a coefficient multiplies.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Slot {
    Plain,
    LogZ,
    LogW,
    LogZW,
}

impl Slot {
    pub const ALL: [Slot; 4] = [Slot::Plain, Slot::LogZ, Slot::LogW, Slot::LogZW];

    fn idx(self) -> usize {
        match self {
            Slot::Plain => 0,
            Slot::LogZ => 1,
            Slot::LogW => 2,
            Slot::LogZW => 3,
        }
    }

    fn flags(self) -> (bool, bool) {
        match self {
            Slot::Plain => (false, false),
            Slot::LogZ => (true, false),
            Slot::LogW => (false, true),
            Slot::LogZW => (true, true),
        }
    }

    fn from_flags(z: bool, w: bool) -> Slot {
        match (z, w) {
            (false, false) => Slot::Plain,
            (true, false) => Slot::LogZ,
            (false, true) => Slot::LogW,
            (true, true) => Slot::LogZW,
        }
    }

    fn has_log(self, var: Var) -> bool {
        let (z, w) = self.flags();
        match var {
            Var::Z => z,
            Var::W => w,
        }
    }

    fn without_log(self, var: Var) -> Slot {
        let (z, w) = self.flags();
        match var {
            Var::Z => Slot::from_flags(false, w),
            Var::W => Slot::from_flags(z, false),
        }
    }

    /// Slot of a product, or `None` when both factors carry the same log.
    pub fn combine(self, other: Slot) -> Option<Slot> {
        let (z1, w1) = self.flags();
        let (z2, w2) = other.flags();
        if (z1 && z2) || (w1 && w2) {
            return None;
        }
        Some(Slot::from_flags(z1 || z2, w1 || w2))
    }
}

/// The two formal variables.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Var {
    Z,
    W,
}

/// Derivative operators understood by [`diff_log`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DiffOp {
    /// Plain `d/dvar`; shifts the window down by one.
    Plain,
    /// Euler operator `var * d/dvar`; keeps the window.
    Euler,
}

/// Delta expansion conventions.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BracketStyle {
    /// `z^-1 delta(w/z) = sum_i w^i z^-i-1`, differentiated by `d/dw`.
    Round,
    /// `delta(w/z) = sum_i w^i z^-i`, differentiated by `w d/dw`.
    Square,
}

/// Coefficient values a [`DistWindow`] can hold.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn scale_int(&self, n: i64) -> Self;
    fn scale_poly(&self, c: &ParamPoly) -> Self;
}

impl Coeff for ParamPoly {
    fn zero() -> Self {
        ParamPoly::zero()
    }

    fn is_zero(&self) -> bool {
        ParamPoly::is_zero(self)
    }

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }

    fn scale_int(&self, n: i64) -> Self {
        self.scale(&rat(n))
    }

    fn scale_poly(&self, c: &ParamPoly) -> Self {
        self * c
    }
}

impl Coeff for TorElem {
    fn zero() -> Self {
        TorElem::zero()
    }

    fn is_zero(&self) -> bool {
        TorElem::is_zero(self)
    }

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }

    fn scale_int(&self, n: i64) -> Self {
        self.times(n)
    }

    fn scale_poly(&self, c: &ParamPoly) -> Self {
        self.scale(c)
    }
}

/// A windowed table of coefficients of `z^a w^b`, `log z * z^a w^b`,
/// `log w * z^a w^b` and `log z log w * z^a w^b`.
///
/// Entries outside the window are dropped on insertion; zero values are never
/// stored, so a missing entry inside the window is an exact zero.
#[derive(Clone, PartialEq, Debug)]
pub struct DistWindow<V> {
    bounds: Window,
    slots: [BTreeMap<(i64, i64), V>; 4],
}

impl<V: Coeff> DistWindow<V> {
    pub fn new(bounds: Window) -> DistWindow<V> {
        DistWindow {
            bounds,
            slots: Default::default(),
        }
    }

    pub fn bounds(&self) -> Window {
        self.bounds
    }

    /// Add `v` to the coefficient at `z^a w^b` in the given slot.  Positions
    /// outside the window are silently dropped; that is the windowing.
    pub fn add_at(&mut self, slot: Slot, a: i64, b: i64, v: V) {
        if !self.bounds.contains(a, b) || v.is_zero() {
            return;
        }
        let map = &mut self.slots[slot.idx()];
        let merged = match map.remove(&(a, b)) {
            Some(old) => old.add_ref(&v),
            None => v,
        };
        if !merged.is_zero() {
            map.insert((a, b), merged);
        }
    }

    /// Stored value at a position, `None` meaning zero inside the window.
    pub fn get(&self, slot: Slot, a: i64, b: i64) -> Option<&V> {
        self.slots[slot.idx()].get(&(a, b))
    }

    /// Coefficient at a position that must lie inside the window.
    pub fn coeff(&self, slot: Slot, a: i64, b: i64) -> V {
        assert!(
            self.bounds.contains(a, b),
            "coefficient z^{a} w^{b} lies outside the window"
        );
        self.get(slot, a, b).cloned().unwrap_or_else(V::zero)
    }

    pub fn entries(&self, slot: Slot) -> impl Iterator<Item = (&(i64, i64), &V)> {
        self.slots[slot.idx()].iter()
    }

    /// True when every slot is empty, i.e. the series vanishes on its window.
    pub fn data_is_zero(&self) -> bool {
        self.slots.iter().all(|m| m.is_empty())
    }

    /// Depends on `w` only: univariate z-bounds and no `log z` content.
    pub fn is_w_only(&self) -> bool {
        self.bounds.zlo == 0
            && self.bounds.zhi == 0
            && self.slots[Slot::LogZ.idx()].is_empty()
            && self.slots[Slot::LogZW.idx()].is_empty()
    }

    /// Restrict to the intersection with `bounds`, dropping what falls out.
    pub fn restrict(&self, bounds: Window) -> DistWindow<V> {
        let inter = self.bounds.intersect(bounds);
        let mut out = DistWindow::new(inter);
        for slot in Slot::ALL {
            for (&(a, b), v) in self.entries(slot) {
                out.add_at(slot, a, b, v.clone());
            }
        }
        out
    }

    /// Sum on the intersection of the two windows.
    pub fn add(&self, other: &DistWindow<V>) -> DistWindow<V> {
        let inter = self.bounds.intersect(other.bounds);
        let mut out = self.restrict(inter);
        for slot in Slot::ALL {
            for (&(a, b), v) in other.entries(slot) {
                out.add_at(slot, a, b, v.clone());
            }
        }
        out
    }

    pub fn sub(&self, other: &DistWindow<V>) -> DistWindow<V> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DistWindow<V> {
        self.scale_int(-1)
    }

    pub fn scale_int(&self, n: i64) -> DistWindow<V> {
        let mut out = DistWindow::new(self.bounds);
        for slot in Slot::ALL {
            for (&(a, b), v) in self.entries(slot) {
                out.add_at(slot, a, b, v.scale_int(n));
            }
        }
        out
    }

    pub fn scale_poly(&self, c: &ParamPoly) -> DistWindow<V> {
        let mut out = DistWindow::new(self.bounds);
        for slot in Slot::ALL {
            for (&(a, b), v) in self.entries(slot) {
                out.add_at(slot, a, b, v.scale_poly(c));
            }
        }
        out
    }

    /// Swap the roles of `z` and `w`, slots included.
    pub fn transpose(&self) -> DistWindow<V> {
        let b0 = self.bounds;
        let mut out = DistWindow::new(Window {
            zlo: b0.wlo,
            zhi: b0.whi,
            wlo: b0.zlo,
            whi: b0.zhi,
        });
        for slot in Slot::ALL {
            let (zf, wf) = slot.flags();
            let swapped = Slot::from_flags(wf, zf);
            for (&(a, b), v) in self.entries(slot) {
                out.add_at(swapped, b, a, v.clone());
            }
        }
        out
    }

    /// Multiply by `w^k`, shifting coefficients and window alike.
    pub fn shift_w(&self, k: i64) -> DistWindow<V> {
        let b0 = self.bounds;
        let mut out = DistWindow::new(Window {
            zlo: b0.zlo,
            zhi: b0.zhi,
            wlo: b0.wlo + k,
            whi: b0.whi + k,
        });
        for slot in Slot::ALL {
            for (&(a, b), v) in self.entries(slot) {
                out.add_at(slot, a, b + k, v.clone());
            }
        }
        out
    }

    /// Coefficientwise equality on `bounds`, which must lie inside both
    /// windows; comparing unknown territory is a caller error.
    pub fn same_on(&self, other: &DistWindow<V>, bounds: Window) -> bool {
        assert!(
            self.bounds.contains_window(bounds) && other.bounds.contains_window(bounds),
            "comparison window exceeds the known region"
        );
        for slot in Slot::ALL {
            for a in bounds.zlo..=bounds.zhi {
                for b in bounds.wlo..=bounds.whi {
                    let equal = match (self.get(slot, a, b), other.get(slot, a, b)) {
                        (None, None) => true,
                        (Some(v), None) | (None, Some(v)) => v.is_zero(),
                        (Some(x), Some(y)) => x == y,
                    };
                    if !equal {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Expand `A(w)` times a delta derivative into window coefficients.
///
/// Square style gives `A(w) (w d/dw)^r delta(w/z)`, round style gives
/// `A(w) (d/dw)^r [z^-1 delta(w/z)]`.  Both collapse to one re-indexed copy
/// of `A` per output coefficient:
///
/// * square: `coeff(z^p w^q) = A<p + q> * (-p)^r`,
/// * round:  `coeff(z^p w^q) = A<p + q + 1 + r> * (-p - 1)^(r)`,
///
/// where `A<s>` is the `w^s` coefficient and `x^(r)` the falling factorial.
/// Panics when the window of `A` misses a needed power, because the result
/// would not be exact.
pub fn delta_term<V: Coeff>(
    style: BracketStyle,
    a: &DistWindow<V>,
    r: u32,
    bounds: Window,
) -> DistWindow<V> {
    assert!(a.is_w_only(), "delta_term expects a series in w only");
    let mut out = DistWindow::new(bounds);
    for p in bounds.zlo..=bounds.zhi {
        for q in bounds.wlo..=bounds.whi {
            let (pos, factor) = match style {
                BracketStyle::Square => (p + q, (-p).pow(r)),
                BracketStyle::Round => (p + q + 1 + r as i64, ffact_int(-p - 1, r)),
            };
            assert!(
                a.bounds().wlo <= pos && pos <= a.bounds().whi,
                "delta_term: field window [{}, {}] does not determine the \
                 w^{} coefficient needed at z^{} w^{}",
                a.bounds().wlo,
                a.bounds().whi,
                pos,
                p,
                q
            );
            for slot in [Slot::Plain, Slot::LogW] {
                if let Some(v) = a.get(slot, 0, pos) {
                    out.add_at(slot, p, q, v.scale_int(factor));
                }
            }
        }
    }
    out
}

/// The bare delta expansion on a window: `sum_i w^i z^-i` in square style,
/// `sum_i w^i z^-i-1` in round style.
pub fn delta_window(style: BracketStyle, bounds: Window) -> DistWindow<ParamPoly> {
    let mut out = DistWindow::new(bounds);
    for p in bounds.zlo..=bounds.zhi {
        let q = match style {
            BracketStyle::Square => -p,
            BracketStyle::Round => -p - 1,
        };
        out.add_at(Slot::Plain, p, q, ParamPoly::one());
    }
    out
}

/// Apply `d/dvar` or `var * d/dvar`, folding log slots back into the plain
/// table: `d/dz (log z * c) = c * z^-1` and `z d/dz (log z * c) = c`.
pub fn diff_log<V: Coeff>(s: &DistWindow<V>, op: DiffOp, var: Var) -> DistWindow<V> {
    let b0 = s.bounds();
    let out_bounds = match (op, var) {
        (DiffOp::Plain, Var::Z) => Window {
            zlo: b0.zlo - 1,
            zhi: b0.zhi - 1,
            ..b0
        },
        (DiffOp::Plain, Var::W) => Window {
            wlo: b0.wlo - 1,
            whi: b0.whi - 1,
            ..b0
        },
        (DiffOp::Euler, _) => b0,
    };
    let mut out = DistWindow::new(out_bounds);
    for slot in Slot::ALL {
        for (&(a, b), v) in s.entries(slot) {
            let exp = match var {
                Var::Z => a,
                Var::W => b,
            };
            let (a2, b2) = match (op, var) {
                (DiffOp::Plain, Var::Z) => (a - 1, b),
                (DiffOp::Plain, Var::W) => (a, b - 1),
                (DiffOp::Euler, _) => (a, b),
            };
            out.add_at(slot, a2, b2, v.scale_int(exp));
            if slot.has_log(var) {
                out.add_at(slot.without_log(var), a2, b2, v.clone());
            }
        }
    }
    out
}

/// Product of a series in `w` with finite stored support and a windowed
/// two-variable series, on an explicit output window.
///
/// Exactness rule: every position of `s` the convolution touches must lie in
/// the window of `s`, otherwise this panics.  A log in the same variable on
/// both factors is rejected.
pub fn mul_w_series<V: Coeff>(
    a: &DistWindow<V>,
    s: &DistWindow<ParamPoly>,
    bounds: Window,
) -> DistWindow<V> {
    assert!(a.is_w_only(), "mul_w_series expects a series in w only");
    let mut out = DistWindow::new(bounds);
    for p in bounds.zlo..=bounds.zhi {
        for q in bounds.wlo..=bounds.whi {
            for a_slot in [Slot::Plain, Slot::LogW] {
                for (&(_, b), va) in a.entries(a_slot) {
                    assert!(
                        s.bounds().contains(p, q - b),
                        "mul_w_series: window of the second factor does not \
                         determine z^{} w^{}",
                        p,
                        q - b
                    );
                    for s_slot in Slot::ALL {
                        let vs = match s.get(s_slot, p, q - b) {
                            Some(vs) => vs,
                            None => continue,
                        };
                        let slot = a_slot.combine(s_slot).unwrap_or_else(|| {
                            panic!("product of two series carrying the same log factor")
                        });
                        out.add_at(slot, p, q, va.scale_poly(vs));
                    }
                }
            }
        }
    }
    out
}

/// A truncated Laurent series with exact coefficients.
///
/// `coeffs[k]` is the coefficient of `z^(lowest + k)`; everything below
/// `lowest` is zero and everything from `lowest + coeffs.len()` on is unknown,
/// so the truncation order is part of the data.  Leading zeros are trimmed,
/// which makes "zero up to order n" the empty vector with `lowest = n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentSeries {
    lowest: i64,
    coeffs: Vec<ParamPoly>,
}

impl LaurentSeries {
    pub fn from_terms(lowest: i64, coeffs: Vec<ParamPoly>) -> LaurentSeries {
        let mut s = LaurentSeries { lowest, coeffs };
        while s.coeffs.first().is_some_and(|c| c.is_zero()) {
            s.coeffs.remove(0);
            s.lowest += 1;
        }
        s
    }

    /// The zero series, known to be zero below `z^order`.
    pub fn zero_to(order: i64) -> LaurentSeries {
        LaurentSeries {
            lowest: order,
            coeffs: Vec::new(),
        }
    }

    /// The constant one, known below `z^order`.
    pub fn one_to(order: i64) -> LaurentSeries {
        assert!(order > 0);
        let mut coeffs = vec![ParamPoly::zero(); order as usize];
        coeffs[0] = ParamPoly::one();
        LaurentSeries::from_terms(0, coeffs)
    }

    /// First exponent whose coefficient may be nonzero.
    pub fn lowest(&self) -> i64 {
        self.lowest
    }

    /// Truncation order: coefficients of `z^e` for `e < order` are known.
    pub fn order(&self) -> i64 {
        self.lowest + self.coeffs.len() as i64
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Known coefficient of `z^e`; panics at or beyond the truncation order.
    pub fn coeff(&self, e: i64) -> ParamPoly {
        assert!(
            e < self.order(),
            "coefficient of z^{} is beyond the truncation O(z^{})",
            e,
            self.order()
        );
        if e < self.lowest {
            ParamPoly::zero()
        } else {
            self.coeffs[(e - self.lowest) as usize].clone()
        }
    }

    pub fn add(&self, other: &LaurentSeries) -> LaurentSeries {
        let order = self.order().min(other.order());
        let lo = self.lowest.min(other.lowest);
        let mut coeffs = Vec::new();
        for e in lo..order {
            coeffs.push(&self.coeff_or_zero(e) + &other.coeff_or_zero(e));
        }
        LaurentSeries::from_terms(lo, coeffs)
    }

    pub fn neg(&self) -> LaurentSeries {
        self.scale_poly(&ParamPoly::int(-1))
    }

    pub fn sub(&self, other: &LaurentSeries) -> LaurentSeries {
        self.add(&other.neg())
    }

    pub fn scale_poly(&self, c: &ParamPoly) -> LaurentSeries {
        LaurentSeries::from_terms(self.lowest, self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn scale_rat(&self, c: &Rational) -> LaurentSeries {
        self.scale_poly(&ParamPoly::constant(c.clone()))
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: i64) -> LaurentSeries {
        LaurentSeries {
            lowest: self.lowest + k,
            coeffs: self.coeffs.clone(),
        }
    }

    /// Product, truncated to the order the factors support.
    pub fn mul(&self, other: &LaurentSeries) -> LaurentSeries {
        let order = (self.order() + other.lowest).min(other.order() + self.lowest);
        let lo = self.lowest + other.lowest;
        let mut coeffs = vec![ParamPoly::zero(); (order - lo).max(0) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let e = self.lowest + i as i64 + other.lowest + j as i64;
                if e < order {
                    let slot = &mut coeffs[(e - lo) as usize];
                    *slot = &*slot + &(a * b);
                }
            }
        }
        LaurentSeries::from_terms(lo, coeffs)
    }

    pub fn pow(&self, n: u32) -> LaurentSeries {
        assert!(n >= 1, "use one_to for the empty power");
        let mut out = self.clone();
        for _ in 1..n {
            out = out.mul(self);
        }
        out
    }

    /// Term-by-term derivative `d/dz`.
    pub fn derivative(&self) -> LaurentSeries {
        let mut coeffs = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            let e = self.lowest + k as i64;
            coeffs.push(c.scale(&rat(e)));
        }
        LaurentSeries::from_terms(self.lowest - 1, coeffs)
    }

    fn coeff_or_zero(&self, e: i64) -> ParamPoly {
        if e < self.lowest || e >= self.order() {
            ParamPoly::zero()
        } else {
            self.coeffs[(e - self.lowest) as usize].clone()
        }
    }
}

impl fmt::Display for LaurentSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = self.lowest + k as i64;
            let (neg, body) = signed_factor(c, e);
            if first {
                if neg {
                    write!(f, "-{}", body)?;
                } else {
                    write!(f, "{}", body)?;
                }
                first = false;
            } else if neg {
                write!(f, " - {}", body)?;
            } else {
                write!(f, " + {}", body)?;
            }
        }
        if first {
            write!(f, "O(z^{})", self.order())
        } else {
            write!(f, " + O(z^{})", self.order())
        }
    }
}

/// Render one series term, splitting off the sign when the coefficient is a
/// single monomial so sums print as `a - b + c`.
fn signed_factor(c: &ParamPoly, e: i64) -> (bool, String) {
    let terms: Vec<_> = c.iter().collect();
    let (neg, coeff_text) = if terms.len() == 1 {
        let (mono, q) = terms[0];
        let mag = q.abs();
        let text = if mono.is_one() {
            format!("{}", mag)
        } else if mag.is_one() {
            format!("{}", mono)
        } else {
            format!("{}*{}", mag, mono)
        };
        (q.is_negative(), text)
    } else {
        (false, format!("({})", c))
    };
    let body = if e == 0 {
        coeff_text
    } else {
        let power = if e == 1 {
            "z".to_string()
        } else {
            format!("z^{}", e)
        };
        if coeff_text == "1" {
            power
        } else {
            format!("{}*{}", coeff_text, power)
        }
    };
    (neg, body)
}

/// Invert a series whose leading coefficient is a nonzero constant.
///
/// Returns the inverse with `order` coefficients past the leading term, or
/// fewer if the input does not support that many.
pub fn series_invert(s: &LaurentSeries, order: u32) -> Result<LaurentSeries, FormalError> {
    if s.is_zero() {
        return Err(FormalError::ZeroSeries);
    }
    let c0 = match s.coeffs[0].as_constant() {
        Some(c) if !c.is_zero() => c,
        _ => return Err(FormalError::NotInvertible(s.coeffs[0].to_string())),
    };
    let len = (order as usize).min(s.coeffs.len());
    // Relative series u with s = c0 * z^lowest * (1 + u), as a plain
    // coefficient vector of length len indexed by relative power.
    let inv_c0 = ParamPoly::constant(Rational::one() / c0);
    let mut u = vec![ParamPoly::zero(); len];
    for (k, c) in s.coeffs.iter().enumerate().take(len).skip(1) {
        u[k] = c * &inv_c0;
    }
    // acc = (1 + u)^-1 by iterating acc <- 1 - u * acc, which converges
    // because u has positive valuation.
    let mut acc = vec![ParamPoly::zero(); len];
    acc[0] = ParamPoly::one();
    for _ in 0..len {
        let mut next = vec![ParamPoly::zero(); len];
        next[0] = ParamPoly::one();
        for i in 1..len {
            for j in 0..i {
                let prod = &u[i - j] * &acc[j];
                next[i] = &next[i] - &prod;
            }
        }
        acc = next;
    }
    let coeffs = acc.iter().map(|c| c * &inv_c0).collect();
    Ok(LaurentSeries::from_terms(-s.lowest, coeffs))
}

/// `log(1 + z) = z - z^2/2 + z^3/3 - ...`, known below `z^order`.
pub fn log1p(order: i64) -> LaurentSeries {
    assert!(order >= 2);
    let mut coeffs = Vec::new();
    for e in 1..order {
        let sign = if e % 2 == 1 { 1 } else { -1 };
        coeffs.push(ParamPoly::constant(Rational::new(
            sign.into(),
            e.into(),
        )));
    }
    LaurentSeries::from_terms(1, coeffs)
}

/// `(1 + z)^e` for any integer `e`, known below `z^order`.
pub fn binomial_series(e: i64, order: i64) -> LaurentSeries {
    assert!(order >= 1);
    let mut coeffs = Vec::with_capacity(order as usize);
    let mut c = Rational::one();
    coeffs.push(ParamPoly::constant(c.clone()));
    for k in 1..order {
        c = c * Rational::new((e - k + 1).into(), k.into());
        coeffs.push(ParamPoly::constant(c.clone()));
    }
    LaurentSeries::from_terms(0, coeffs)
}

/// One comparison from [`series_product_suite`].
#[derive(Clone, Debug)]
pub struct SeriesCheck {
    pub name: &'static str,
    pub pass: bool,
    pub got: String,
    pub want: String,
}

/// Fixed catalog of log-power expansions behind the square-bracket mode
/// combinations: the log series itself, its inverse powers, and their
/// products with the geometric series, each against frozen coefficients.
pub fn series_product_suite() -> Vec<SeriesCheck> {
    fn q(n: i64, d: i64) -> ParamPoly {
        ParamPoly::constant(Rational::new(n.into(), d.into()))
    }
    fn expected(lowest: i64, cs: &[(i64, i64)]) -> LaurentSeries {
        LaurentSeries::from_terms(lowest, cs.iter().map(|&(n, d)| q(n, d)).collect())
    }
    let log = log1p(5);
    let inv = series_invert(&log, 4).expect("log series starts with z");
    let invsq = inv.mul(&inv);
    let geom = binomial_series(-1, 4);
    let cases: Vec<(&'static str, LaurentSeries, LaurentSeries)> = vec![
        (
            "log-series",
            log.clone(),
            expected(1, &[(1, 1), (-1, 2), (1, 3), (-1, 4)]),
        ),
        (
            "inverse",
            inv.clone(),
            expected(-1, &[(1, 1), (1, 2), (-1, 12), (1, 24)]),
        ),
        (
            "inverse-square",
            invsq.clone(),
            expected(-2, &[(1, 1), (1, 1), (1, 12), (0, 1)]),
        ),
        (
            "inverse-times-geometric",
            inv.mul(&geom),
            expected(-1, &[(1, 1), (-1, 2), (5, 12), (-3, 8)]),
        ),
        (
            "inverse-square-times-geometric",
            invsq.mul(&geom),
            expected(-2, &[(1, 1), (0, 1), (1, 12), (-1, 12)]),
        ),
        (
            "inverse-roundtrip",
            log.mul(&inv),
            expected(0, &[(1, 1), (0, 1), (0, 1), (0, 1)]),
        ),
    ];
    cases
        .into_iter()
        .map(|(name, got, want)| SeriesCheck {
            name,
            pass: got == want,
            got: got.to_string(),
            want: want.to_string(),
        })
        .collect()
}
