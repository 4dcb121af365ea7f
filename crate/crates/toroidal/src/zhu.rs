//! Square-bracket modes and the φ-coordinated field calculus on the free
//! field spaces.
//!
//! The realization in [`crate::fock`] works with round modes `a_{(p)}` of
//! fields `Y(a, z)`.  A second coordinate pairs the same fields against
//! `(log(1+z))^m (1+z)^{wt a - 1}` instead of plain powers, which produces
//! square modes `a[m]` and, state by state, a change of coordinates `T` with
//!
//! ```text
//! Y_phi(v, z) = Y(z^{L(0)} T v, z).
//! ```
//!
//! `T` fixes primary states, sends the conformal vector to
//! `omega - (c/24) 1`, and intertwines translation through
//! `T L(-1) = (L(-1) + L(0)) T`.  Those three rules cover every state the
//! derivation family needs, so the module implements `T` on that finite
//! list (the [`Atom`] span) rather than in general.
//!
//! On top of the atom calculus sit the windowed φ-field tables, the
//! assembled derivation family `D_n[z]`, the φ-action of the toroidal
//! algebra by square modes, and the delta-expansion commutator check
//!
//! ```text
//! [u[m], v[n]] = sum_j (m^j / j!) (u_{(j)} v)[m+n].
//! ```

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fock::{
    self, f_apply, h_apply, l_total, show_fock, weight_bound, y_exp, FLet, FSym, Fock, FockKey,
    FockVec, HKind, HLet,
};
use crate::liealg::{TorElem, TorSym, Toroidal};
use crate::scalar::{rat, ratq, Param, ParamPoly, Rational};

#[derive(Debug, Error)]
pub enum ZhuError {
    /// The vector cannot be written in the supported atom span.
    #[error("vector is outside the supported span: {0}")]
    Span(String),
    /// A mode input mixes conformal weights.
    #[error("input mixes conformal weights: {0}")]
    Weight(String),
}

fn ell() -> ParamPoly {
    ParamPoly::param(Param::Ell)
}

fn mu() -> ParamPoly {
    ParamPoly::param(Param::Mu)
}

/// Central charge of the whole space: the carrier charge plus 2 from the
/// hyperbolic Heisenberg pair.
pub fn total_charge(fk: &Fock) -> ParamPoly {
    &fk.vir_c + &ParamPoly::int(2)
}

// ---------------------------------------------------------------------------
// The supported states.
// ---------------------------------------------------------------------------

/// A generator state over a marker, written multiplicatively on `e^{n bk}`.
/// These are exactly the states whose `T`-images the change of coordinates
/// needs, closed under one translation layer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    /// `e^{n bk}`, weight 0.
    Exp(i64),
    /// `u(-1) e^{n bk}` for a basis element `u`, weight 1.
    Loop(u8, i64),
    /// `bk(-1) e^{n bk}`, weight 1.
    KOne(i64),
    /// `bd(-1) e^{n bk}`, weight 1.
    DOne(i64),
    /// `omega_{(-1)} e^{n bk}`, weight 2; at `n = 0` the conformal vector.
    Omega(i64),
    /// `bk(-2) e^{n bk}`, weight 2.
    KTwo(i64),
    /// `L(-1)` applied to another atom.
    Trans(Box<Atom>),
}

pub fn atom_weight(a: &Atom) -> i64 {
    match a {
        Atom::Exp(_) => 0,
        Atom::Loop(..) | Atom::KOne(_) | Atom::DOne(_) => 1,
        Atom::Omega(_) | Atom::KTwo(_) => 2,
        Atom::Trans(x) => atom_weight(x) + 1,
    }
}

/// The atom as a vector of the vacuum space.
pub fn atom_vec(t: &Toroidal, a: &Atom) -> FockVec {
    let g = t.algebra();
    let fk = Fock::voa();
    match a {
        Atom::Exp(n) => FockVec::marker(*n),
        Atom::Loop(u, n) => f_apply(g, &fk, &FSym::U { m: -1, u: *u }, &FockVec::marker(*n)),
        Atom::KOne(n) => h_apply(&fk, HKind::BK, -1, &FockVec::marker(*n)),
        Atom::DOne(n) => h_apply(&fk, HKind::BD, -1, &FockVec::marker(*n)),
        Atom::Omega(n) => l_total(g, &fk, -2, &FockVec::marker(*n)),
        Atom::KTwo(n) => h_apply(&fk, HKind::BK, -2, &FockVec::marker(*n)),
        Atom::Trans(x) => l_total(g, &fk, -1, &atom_vec(t, x)),
    }
}

/// Round Borcherds mode `a_{(p)}` of an atom, acting on `w`.  Every case is
/// a closed form over the column coefficients of [`crate::fock`]; the
/// translation layer differentiates, `(L(-1)a)_{(p)} = -p a_{(p-1)}`.
pub fn atom_mode(t: &Toroidal, fk: &Fock, a: &Atom, p: i64, w: &FockVec) -> FockVec {
    let g = t.algebra();
    match a {
        Atom::Exp(n) => y_exp(fk, *n, -p - 1, w),
        Atom::Loop(u, n) => fock::loop_mode(g, fk, *n, *u, p, w),
        Atom::KOne(n) => fock::k_exp_coeff(fk, *n, -p - 1, w),
        Atom::DOne(n) => fock::d_exp_coeff(fk, *n, -p - 1, w),
        Atom::Omega(n) => fock::omega_exp_mode(g, fk, *n, p - 1, w),
        Atom::KTwo(n) => fock::k2_exp_coeff(fk, *n, -p - 1, w),
        Atom::Trans(x) => atom_mode(t, fk, x, p - 1, w).times(-p),
    }
}

// ---------------------------------------------------------------------------
// The change of coordinates.
// ---------------------------------------------------------------------------

/// `T` applied to an atom, as a combination of atoms.  Weight 0 and weight 1
/// primary states are fixed; `bd(-1) e^{n bk}` picks up `(n/2) e^{n bk}`;
/// the weight 2 states expand through the conformal correction, and
/// translation layers unfold with `T L(-1) = (L(-1) + L(0)) T`.
pub fn t_image(fk: &Fock, a: &Atom) -> Vec<(ParamPoly, Atom)> {
    let one = ParamPoly::one();
    match a {
        Atom::Exp(n) => vec![(one, Atom::Exp(*n))],
        Atom::Loop(u, n) => vec![(one, Atom::Loop(*u, *n))],
        Atom::KOne(n) => vec![(one, Atom::KOne(*n))],
        Atom::DOne(n) => vec![
            (one, Atom::DOne(*n)),
            (ParamPoly::constant(ratq(*n, 2)), Atom::Exp(*n)),
        ],
        Atom::Omega(n) => vec![
            (one, Atom::Omega(*n)),
            (ParamPoly::constant(ratq(3, 2)), Atom::Trans(Box::new(Atom::Exp(*n)))),
            (total_charge(fk).scale(&ratq(-1, 24)), Atom::Exp(*n)),
        ],
        Atom::KTwo(n) => vec![(one.clone(), Atom::KTwo(*n)), (one, Atom::KOne(*n))],
        Atom::Trans(x) => {
            let mut out = Vec::new();
            for (c, b) in t_image(fk, x) {
                out.push((c.clone(), Atom::Trans(Box::new(b.clone()))));
                let h = atom_weight(&b);
                if h != 0 {
                    out.push((&c * &ParamPoly::int(h), b));
                }
            }
            out
        }
    }
}

/// Writes a vacuum space vector as a combination of atoms, or reports the
/// part that does not fit.  Peeling goes from the most decorated signature
/// key down to the bare marker, so overlapping tails cancel in order.
pub fn recognize(t: &Toroidal, v: &FockVec) -> Result<Vec<(ParamPoly, Atom)>, ZhuError> {
    let g = t.algebra();
    let key = |fword: Vec<FLet>, hword: Vec<HLet>, n: i64| FockKey {
        fword,
        hword,
        marker: n,
        low: 0,
    };
    let mut markers = BTreeSet::new();
    for (k, _) in v.iter() {
        if k.low != 0 {
            return Err(ZhuError::Span(show_fock(v, g)));
        }
        markers.insert(k.marker);
    }
    let mut rest = v.clone();
    let mut out = Vec::new();
    for &n in &markers {
        let mut sigs: Vec<(FockKey, Atom)> = vec![
            (key(vec![], vec![HLet::D { m: -2 }], n), Atom::Trans(Box::new(Atom::DOne(n)))),
            (key(vec![FLet::L { m: -2 }], vec![], n), Atom::Omega(n)),
            (key(vec![], vec![HLet::K { m: -2 }], n), Atom::KTwo(n)),
            (key(vec![], vec![HLet::D { m: -1 }], n), Atom::DOne(n)),
        ];
        for u in 0..g.dim() as u8 {
            sigs.push((key(vec![FLet::G { m: -1, u }], vec![], n), Atom::Loop(u, n)));
        }
        sigs.push((key(vec![], vec![HLet::K { m: -1 }], n), Atom::KOne(n)));
        sigs.push((key(vec![], vec![], n), Atom::Exp(n)));
        for (sig, atom) in sigs {
            let c = rest.get(&sig);
            if !c.is_zero() {
                rest = &rest - &atom_vec(t, &atom).scale(&c);
                out.push((c, atom));
            }
        }
    }
    if !rest.is_zero() {
        return Err(ZhuError::Span(show_fock(&rest, g)));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// φ-coordinated coefficients and windows.
// ---------------------------------------------------------------------------

/// Coefficient of `z^{-n}` in `Y_phi(a, z) w`.  Each `T`-image component of
/// weight `h` contributes its round mode at index `n + h - 1`, which is the
/// effect of the `z^{L(0)}` twist.
pub fn phi_coeff(t: &Toroidal, fk: &Fock, a: &Atom, n: i64, w: &FockVec) -> FockVec {
    let mut out = FockVec::zero();
    for (c, b) in t_image(fk, a) {
        let h = atom_weight(&b);
        out = &out + &atom_mode(t, fk, &b, n + h - 1, w).scale(&c);
    }
    out
}

/// [`phi_coeff`] for a vector written in the atom span.
pub fn phi_coeff_vec(
    t: &Toroidal,
    fk: &Fock,
    v: &FockVec,
    n: i64,
    w: &FockVec,
) -> Result<FockVec, ZhuError> {
    let combo = recognize(t, v)?;
    let mut out = FockVec::zero();
    for (c, a) in &combo {
        out = &out + &phi_coeff(t, fk, a, n, w).scale(c);
    }
    Ok(out)
}

/// Windowed coefficients of `Y_phi(v, z)` applied to one target.
pub fn phi_field(
    t: &Toroidal,
    fk: &Fock,
    v: &FockVec,
    lo: i64,
    hi: i64,
    w: &FockVec,
) -> Result<Vec<(i64, FockVec)>, ZhuError> {
    let combo = recognize(t, v)?;
    let mut out = Vec::new();
    for n in lo..=hi {
        let mut c_n = FockVec::zero();
        for (c, a) in &combo {
            c_n = &c_n + &phi_coeff(t, fk, a, n, w).scale(c);
        }
        out.push((n, c_n));
    }
    Ok(out)
}

/// A φ-coordinated field together with its windowed operator table on a
/// list of sampled targets.
pub struct PhiField {
    /// The state, decomposed in the atom span.
    pub states: Vec<(ParamPoly, Atom)>,
    /// Common conformal weight of the atoms, when there is one.
    pub weight: Option<i64>,
    pub lo: i64,
    pub hi: i64,
    /// `table[k]` lists `(n, coefficient applied to target k)` over the window.
    pub table: Vec<Vec<(i64, FockVec)>>,
}

impl PhiField {
    pub fn coeff(&self, target: usize, n: i64) -> Option<&FockVec> {
        self.table
            .get(target)?
            .iter()
            .find(|(m, _)| *m == n)
            .map(|(_, v)| v)
    }
}

/// Builds the windowed table of `Y_phi(v, z)` on the sampled targets.
pub fn phi_table(
    t: &Toroidal,
    fk: &Fock,
    v: &FockVec,
    lo: i64,
    hi: i64,
    targets: &[FockVec],
) -> Result<PhiField, ZhuError> {
    let states = recognize(t, v)?;
    let mut weights: Vec<i64> = states.iter().map(|(_, a)| atom_weight(a)).collect();
    weights.dedup();
    let weight = match weights.as_slice() {
        [h] => Some(*h),
        _ => None,
    };
    let mut table = Vec::new();
    for w in targets {
        let mut col = Vec::new();
        for n in lo..=hi {
            let mut c_n = FockVec::zero();
            for (c, a) in &states {
                c_n = &c_n + &phi_coeff(t, fk, a, n, w).scale(c);
            }
            col.push((n, c_n));
        }
        table.push(col);
    }
    Ok(PhiField { states, weight, lo, hi, table })
}

/// Windowed coefficients of `Y_phi(L(-1) v, z)` computed on the logarithmic
/// derivative side: `z d/dz` multiplies the `z^{-n}` coefficient by `-n`.
pub fn lminus1_phi(
    t: &Toroidal,
    fk: &Fock,
    v: &FockVec,
    lo: i64,
    hi: i64,
    w: &FockVec,
) -> Result<Vec<(i64, FockVec)>, ZhuError> {
    let combo = recognize(t, v)?;
    let mut out = Vec::new();
    for n in lo..=hi {
        let mut c_n = FockVec::zero();
        for (c, a) in &combo {
            c_n = &c_n + &phi_coeff(t, fk, a, n, w).scale(c);
        }
        out.push((n, c_n.times(-n)));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Square-bracket series and modes.
// ---------------------------------------------------------------------------

fn series_mul(a: &[Rational], b: &[Rational], n: usize) -> Vec<Rational> {
    let mut out = vec![rat(0); n];
    for (i, x) in a.iter().enumerate().take(n) {
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

fn series_inv(a: &[Rational], n: usize) -> Vec<Rational> {
    assert!(a[0] == rat(1), "only unit series with leading 1 are inverted");
    let mut out = vec![rat(0); n];
    out[0] = rat(1);
    for k in 1..n {
        let mut s = rat(0);
        for i in 1..=k {
            if i < a.len() {
                s = &s + &(&a[i] * &out[k - i]);
            }
        }
        out[k] = -s;
    }
    out
}

fn unit_pow(a: &[Rational], e: i64, n: usize) -> Vec<Rational> {
    let base = if e < 0 { series_inv(a, n) } else { a.to_vec() };
    let mut out = vec![rat(0); n];
    out[0] = rat(1);
    for _ in 0..e.unsigned_abs() {
        out = series_mul(&out, &base, n);
    }
    out
}

fn binom_series(h: i64, n: usize) -> Vec<Rational> {
    let mut out = vec![rat(0); n];
    out[0] = rat(1);
    for i in 0..n - 1 {
        out[i + 1] = &out[i] * &ratq(h - i as i64, i as i64 + 1);
    }
    out
}

/// The first `nterms` coefficients `s_i` of
/// `(log(1+z)/z)^m (1+z)^{h-1} = sum_i s_i z^i`, so that a square mode of a
/// weight `h` state expands as `a[m] = sum_i s_i a_{(m+i)}`.
pub fn sq_series(m: i64, h: i64, nterms: usize) -> Vec<Rational> {
    if nterms == 0 {
        return Vec::new();
    }
    let log_over_z: Vec<Rational> = (0..nterms)
        .map(|r| ratq(if r % 2 == 0 { 1 } else { -1 }, r as i64 + 1))
        .collect();
    let lhs = unit_pow(&log_over_z, m, nterms);
    series_mul(&lhs, &binom_series(h - 1, nterms), nterms)
}

/// Square mode `a[m]` applied to `v`.  The state `a` must lie in the atom
/// span with one common weight; the series truncates at the annihilation
/// order of `v`, which is what keeps the sum finite.
pub fn square_mode(
    t: &Toroidal,
    fk: &Fock,
    a: &FockVec,
    m: i64,
    v: &FockVec,
) -> Result<FockVec, ZhuError> {
    let combo = recognize(t, a)?;
    let mut weights: Vec<i64> = combo.iter().map(|(_, x)| atom_weight(x)).collect();
    weights.sort_unstable();
    weights.dedup();
    let h = match weights.as_slice() {
        [] => return Ok(FockVec::zero()),
        [h] => *h,
        _ => return Err(ZhuError::Weight(show_fock(a, t.algebra()))),
    };
    let imax = weight_bound(v) + h - 1 - m;
    if imax < 0 {
        return Ok(FockVec::zero());
    }
    let series = sq_series(m, h, imax as usize + 1);
    let mut out = FockVec::zero();
    for (i, s) in series.iter().enumerate() {
        if s == &rat(0) {
            continue;
        }
        for (c, x) in &combo {
            out = &out + &atom_mode(t, fk, x, m + i as i64, v).scale(c).scale_rat(s);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The derivation family.
// ---------------------------------------------------------------------------

/// The generator state of the degree `n` derivation field, as an atom
/// combination: `n omega_{(-1)} e^{n bk} - L(-1)(bd(-1) e^{n bk})
/// + n^2 (mu ell - 1) bk(-2) e^{n bk}`.
pub fn theta_states(n: i64) -> Vec<(ParamPoly, Atom)> {
    assert!(n != 0, "the degree zero family has no generator state");
    let lm1 = &(&mu() * &ell()) - &ParamPoly::one();
    vec![
        (ParamPoly::int(n), Atom::Omega(n)),
        (ParamPoly::int(-1), Atom::Trans(Box::new(Atom::DOne(n)))),
        (lm1.scale(&rat(n * n)), Atom::KTwo(n)),
    ]
}

/// Coefficient of `z^{-j}` in the assembled derivation field `D_n[z]`
/// applied to `w`: the conformal summand, the logarithmic derivative
/// corrections, the central charge shift, the `bd` column, and the scaled
/// `bk` tail.
pub fn sq_bigd(t: &Toroidal, fk: &Fock, n: i64, j: i64, w: &FockVec) -> FockVec {
    assert!(n != 0, "the degree zero family has no square field");
    let g = t.algebra();
    let lm1 = &(&mu() * &ell()) - &ParamPoly::one();
    let s1 = fock::omega_exp_mode(g, fk, n, j, w).times(n);
    let s2 = y_exp(fk, n, -j, w).times(-n * j);
    let s3 = y_exp(fk, n, -j, w).scale(&total_charge(fk).scale(&ratq(-n, 24)));
    let s4 = fock::d_exp_coeff(fk, n, -j - 1, w).times(j);
    let s5 = (&fock::k2_exp_coeff(fk, n, -j - 2, w) + &fock::k_exp_coeff(fk, n, -j - 1, w))
        .times(n * n)
        .scale(&lm1);
    &(&(&(&s1 + &s2) + &s3) + &s4) + &s5
}

/// Windowed coefficients of `D_n[z]` on one target.  Mode by mode this
/// equals the φ-field of the generator state returned by [`theta_states`].
pub fn dn_square_field(
    t: &Toroidal,
    fk: &Fock,
    n: i64,
    lo: i64,
    hi: i64,
    w: &FockVec,
) -> Vec<(i64, FockVec)> {
    (lo..=hi).map(|j| (j, sq_bigd(t, fk, n, j, w))).collect()
}

// ---------------------------------------------------------------------------
// The φ-action of the algebra.
// ---------------------------------------------------------------------------

/// Action of a toroidal element through the square-bracket dictionary:
/// loops, the `bd` column, the one-form classes, and the derivation lines go
/// to their field modes; `k0` acts by the level.  Derivation terms are
/// grouped by bidegree and must lie on the skew line `j d1 - n d0`, which is
/// the part of the derivation plane the square family carries.
pub fn phi_act(t: &Toroidal, fk: &Fock, x: &TorElem, w: &FockVec) -> Result<FockVec, ZhuError> {
    let g = t.algebra();
    let mut out = FockVec::zero();
    let mut ders: BTreeMap<(i64, i64), (ParamPoly, ParamPoly)> = BTreeMap::new();
    for (sym, c) in x.iter() {
        match *sym {
            TorSym::Loop { m0, m1, u } => {
                out = &out + &fock::loop_mode(g, fk, m1, u, m0, w).scale(c);
            }
            TorSym::K0 => {
                out = &out + &w.scale(&(&ell() * c));
            }
            // k1 itself acts by bk(0), which vanishes on every vector.
            TorSym::K1 => {}
            TorSym::Kmn { m0, m1 } => {
                if m1 != 0 {
                    let coeff = ell().scale(&ratq(1, m1));
                    out = &out + &y_exp(fk, m1, -m0, w).scale(&(&coeff * c));
                } else {
                    let coeff = ell().scale(&ratq(-1, m0));
                    out = &out + &h_apply(fk, HKind::BK, m0, w).scale(&(&coeff * c));
                }
            }
            TorSym::Der { m0, m1, i } => {
                let slot = ders.entry((m0, m1)).or_insert_with(|| (ParamPoly::zero(), ParamPoly::zero()));
                if i == 0 {
                    slot.0 = &slot.0 + c;
                } else {
                    slot.1 = &slot.1 + c;
                }
            }
        }
    }
    for ((m0, m1), (c0, c1)) in ders {
        if m1 == 0 {
            if !c0.is_zero() {
                return Err(ZhuError::Span(format!(
                    "t0^{m0} d0 lies outside the square family"
                )));
            }
            out = &out + &h_apply(fk, HKind::BD, m0, w).scale(&c1);
        } else {
            let lam = c0.scale(&ratq(-1, m1));
            let resid = &c1 - &(&lam * &ParamPoly::int(m0));
            if !resid.is_zero() {
                return Err(ZhuError::Span(format!(
                    "derivation term at bidegree ({m0}, {m1}) leaves the skew line"
                )));
            }
            if !lam.is_zero() {
                out = &out + &sq_bigd(t, fk, m1, m0, w).scale(&lam);
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Products and the commutator expansion.
// ---------------------------------------------------------------------------

/// Round product `u_{(j)} v` of two atoms, decomposed back into the span.
pub fn atom_product(
    t: &Toroidal,
    u: &Atom,
    j: i64,
    v: &Atom,
) -> Result<Vec<(ParamPoly, Atom)>, ZhuError> {
    let fk = Fock::voa();
    let w = atom_mode(t, &fk, u, j, &atom_vec(t, v));
    recognize(t, &w)
}

fn factorial(j: u32) -> i64 {
    (1..=j as i64).product()
}

/// Residual of the φ-mode commutator expansion
/// `[u[m], v[n]] - sum_j (m^j / j!) (u_{(j)} v)[m+n]` on one target.  The
/// sum stops at the joint weight, past which every product vanishes.
pub fn phi_commutator_check(
    t: &Toroidal,
    fk: &Fock,
    u: &Atom,
    v: &Atom,
    m: i64,
    n: i64,
    w: &FockVec,
) -> Result<FockVec, ZhuError> {
    let uv = phi_coeff(t, fk, u, m, &phi_coeff(t, fk, v, n, w));
    let vu = phi_coeff(t, fk, v, n, &phi_coeff(t, fk, u, m, w));
    let mut rhs = FockVec::zero();
    for j in 0..=(atom_weight(u) + atom_weight(v)) as u32 {
        if m == 0 && j > 0 {
            break;
        }
        let prod = atom_mode(t, &Fock::voa(), u, j as i64, &atom_vec(t, v));
        if prod.is_zero() {
            continue;
        }
        let scale = ratq(m.pow(j), factorial(j));
        for (c, a) in recognize(t, &prod)? {
            rhs = &rhs + &phi_coeff(t, fk, &a, m + n, w).scale(&c).scale_rat(&scale);
        }
    }
    Ok(&(&uv - &vu) - &rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::theta_image;
    use crate::genfun::Gen;
    use crate::liealg::dtilde;

    const E: u8 = 0;
    const H: u8 = 1;
    const F: u8 = 2;

    fn q(n: i64, d: i64) -> Rational {
        ratq(n, d)
    }

    fn module_targets(fk: &Fock) -> Vec<FockVec> {
        let t = Toroidal::sl2();
        let g = t.algebra();
        let w1 = FockVec::lowest(0, 0);
        let w2 = h_apply(fk, HKind::BK, -1, &f_apply(g, fk, &FSym::U { m: -1, u: E }, &FockVec::lowest(1, 1)));
        let w3 = h_apply(fk, HKind::BD, -1, &h_apply(fk, HKind::BK, -2, &FockVec::lowest(0, -1)));
        vec![w1, w2, w3]
    }

    #[test]
    fn square_series_low_terms_are_the_frozen_tuples() {
        let rows: Vec<(i64, i64, Vec<Rational>)> = vec![
            (-1, 0, vec![q(1, 1), q(-1, 2), q(5, 12), q(-3, 8)]),
            (-2, 0, vec![q(1, 1), q(0, 1), q(1, 12), q(-1, 12)]),
            (-1, 1, vec![q(1, 1), q(1, 2), q(-1, 12), q(1, 24)]),
            (-2, 1, vec![q(1, 1), q(1, 1), q(1, 12), q(0, 1)]),
            (-1, 2, vec![q(1, 1), q(3, 2), q(5, 12), q(-1, 24), q(11, 720)]),
            (0, 2, vec![q(1, 1), q(1, 1), q(0, 1), q(0, 1)]),
        ];
        for (m, h, want) in rows {
            assert_eq!(sq_series(m, h, want.len()), want, "series ({m}, {h})");
        }
    }

    #[test]
    fn square_modes_compose_the_frozen_series_with_round_modes() {
        let t = Toroidal::sl2();
        let fk = Fock::module(1);
        let v = h_apply(&fk, HKind::BK, -1, &h_apply(&fk, HKind::BK, -2, &FockVec::lowest(0, 0)));

        // Weight one state, mode -1: the series against single bd modes.
        let a = atom_vec(&t, &Atom::DOne(0));
        let coeffs = [q(1, 1), q(1, 2), q(-1, 12), q(1, 24), q(-19, 720)];
        let mut want = FockVec::zero();
        for (i, s) in coeffs.iter().enumerate() {
            want = &want + &h_apply(&fk, HKind::BD, i as i64 - 1, &v).scale_rat(s);
        }
        assert_eq!(square_mode(&t, &fk, &a, -1, &v).unwrap(), want);

        // Weight zero state, mode -2: note the vanishing second coefficient.
        let a = atom_vec(&t, &Atom::Exp(1));
        let coeffs = [q(1, 1), q(0, 1), q(1, 12), q(-1, 12), q(19, 240)];
        let mut want = FockVec::zero();
        for (i, s) in coeffs.iter().enumerate() {
            want = &want + &y_exp(&fk, 1, 1 - i as i64, &v).scale_rat(s);
        }
        assert_eq!(square_mode(&t, &fk, &a, -2, &v).unwrap(), want);

        // The conformal vector, mode -1, on a shallow target.
        let g = t.algebra();
        let a = atom_vec(&t, &Atom::Omega(0));
        let v = FockVec::lowest(0, 0);
        let coeffs = [q(1, 1), q(3, 2), q(5, 12)];
        let mut want = FockVec::zero();
        for (i, s) in coeffs.iter().enumerate() {
            want = &want + &l_total(g, &fk, i as i64 - 2, &v).scale_rat(s);
        }
        assert_eq!(square_mode(&t, &fk, &a, -1, &v).unwrap(), want);
    }

    #[test]
    fn change_of_coordinates_images_take_their_catalog_values() {
        let one = ParamPoly::one();
        let fk = Fock::voa();
        assert_eq!(
            t_image(&fk, &Atom::DOne(2)),
            vec![(one.clone(), Atom::DOne(2)), (ParamPoly::int(1), Atom::Exp(2))]
        );
        assert_eq!(
            t_image(&fk, &Atom::DOne(1)),
            vec![(one.clone(), Atom::DOne(1)), (ParamPoly::constant(q(1, 2)), Atom::Exp(1))]
        );
        // On the standard space the central charge is 24 mu ell, so the
        // conformal correction is -mu ell.
        let mul = &mu() * &ell();
        assert_eq!(
            t_image(&fk, &Atom::Omega(2)),
            vec![
                (one.clone(), Atom::Omega(2)),
                (ParamPoly::constant(q(3, 2)), Atom::Trans(Box::new(Atom::Exp(2)))),
                (mul.scale(&rat(-1)), Atom::Exp(2)),
            ]
        );
        assert_eq!(
            t_image(&fk, &Atom::KTwo(2)),
            vec![(one.clone(), Atom::KTwo(2)), (one.clone(), Atom::KOne(2))]
        );
        assert_eq!(
            t_image(&fk, &Atom::Trans(Box::new(Atom::DOne(2)))),
            vec![
                (one.clone(), Atom::Trans(Box::new(Atom::DOne(2)))),
                (one.clone(), Atom::DOne(2)),
                (ParamPoly::int(1), Atom::Trans(Box::new(Atom::Exp(2)))),
            ]
        );
    }

    #[test]
    fn generator_states_weights_and_central_charge() {
        let t = Toroidal::sl2();
        let g = t.algebra();
        let fk = Fock::voa();
        let primaries = [Atom::Exp(2), Atom::Exp(-1), Atom::Loop(E, 1), Atom::Loop(H, -2), Atom::KOne(1)];
        for a in &primaries {
            let v = atom_vec(&t, a);
            assert!(l_total(g, &fk, 1, &v).is_zero(), "{a:?} should be primary");
            assert!(l_total(g, &fk, 2, &v).is_zero(), "{a:?} should be primary");
            assert_eq!(l_total(g, &fk, 0, &v), v.times(atom_weight(a)), "{a:?} weight");
        }
        // bd(-1) e^{n bk} is only quasi primary: L(1) reads the marker.
        let v = atom_vec(&t, &Atom::DOne(3));
        assert_eq!(l_total(g, &fk, 1, &v), atom_vec(&t, &Atom::Exp(3)).times(3));
        assert_eq!(l_total(g, &fk, 0, &v), v);
        // The conformal vector fixes the total charge: carrier plus two.
        let omega = atom_vec(&t, &Atom::Omega(0));
        assert!(l_total(g, &fk, 1, &omega).is_zero());
        assert_eq!(
            l_total(g, &fk, 2, &omega),
            FockVec::vacuum().scale(&total_charge(&fk).scale(&q(1, 2)))
        );
        assert_eq!(total_charge(&fk), (&mu() * &ell()).scale(&rat(24)));
    }

    #[test]
    fn weight_two_field_picks_up_the_central_shift() {
        let t = Toroidal::sl2();
        let g = t.algebra();
        let fk = Fock::voa_formal_c();
        let shift = total_charge(&fk).scale(&q(1, 24));
        let targets = [
            FockVec::vacuum(),
            f_apply(g, &fk, &FSym::U { m: -1, u: E }, &FockVec::marker(1)),
            h_apply(&fk, HKind::BK, -1, &h_apply(&fk, HKind::BD, -1, &FockVec::vacuum())),
        ];
        for w in &targets {
            for p in -2..=2 {
                let mut want = l_total(g, &fk, p, w);
                if p == 0 {
                    want = &want - &w.scale(&shift);
                }
                assert_eq!(phi_coeff(&t, &fk, &Atom::Omega(0), p, w), want, "mode {p}");
            }
        }
    }

    #[test]
    fn exponential_column_obeys_the_translation_ward_identity() {
        let fk = Fock::module(1);
        for w in &module_targets(&fk) {
            for n in [-2i64, 1, 2] {
                for p in -3i64..=3 {
                    assert_eq!(
                        fock::k_exp_coeff(&fk, n, -p - 1, w).times(n),
                        y_exp(&fk, n, -p, w).times(-p),
                        "marker {n}, mode {p}"
                    );
                }
                for j in -2i64..=2 {
                    assert_eq!(
                        fock::dk_exp_mode(&fk, n, j, w),
                        fock::k2_exp_coeff(&fk, n, -j - 2, w).times(n),
                        "marker {n}, mode {j}"
                    );
                }
            }
        }
    }

    #[test]
    fn translation_image_fields_are_logarithmic_derivatives() {
        let t = Toroidal::sl2();
        let g = t.algebra();
        let fk = Fock::module(1);
        let voa = Fock::voa();
        let states = [
            atom_vec(&t, &Atom::DOne(2)),
            atom_vec(&t, &Atom::Exp(-1)),
            FockVec::vacuum(),
        ];
        for v in &states {
            let lv = l_total(g, &voa, -1, v);
            for w in &module_targets(&fk) {
                assert_eq!(
                    lminus1_phi(&t, &fk, v, -2, 2, w).unwrap(),
                    phi_field(&t, &fk, &lv, -2, 2, w).unwrap()
                );
            }
        }
    }

    #[test]
    fn derivation_field_assembles_from_its_generator_state() {
        let t = Toroidal::sl2();
        let fk = Fock::module(1);
        for n in [-2i64, -1, 1, 2] {
            // The atom combination is the generator state computed by the
            // realization module.
            let mut vec_sum = FockVec::zero();
            for (c, a) in theta_states(n) {
                vec_sum = &vec_sum + &atom_vec(&t, &a).scale(&c);
            }
            assert_eq!(vec_sum, theta_image(&t, Gen::BigD(n)).unwrap(), "state {n}");
            // Mode by mode the closed assembly equals the φ-field path.
            for j in -2i64..=2 {
                for w in &module_targets(&fk) {
                    let mut phi_sum = FockVec::zero();
                    for (c, a) in theta_states(n) {
                        phi_sum = &phi_sum + &phi_coeff(&t, &fk, &a, j, w).scale(&c);
                    }
                    assert_eq!(sq_bigd(&t, &fk, n, j, w), phi_sum, "degree {n}, mode {j}");
                }
            }
        }
    }

    #[test]
    fn doubled_marker_variant_changes_the_field() {
        // A variant reading of the bk tail doubles the marker shift,
        // collapsing the two-factor product onto e^{2n bk}.  The resulting
        // summand differs from the one the assembly uses, so the two
        // readings give different operators.
        let fk = Fock::module(1);
        let lm1 = &(&mu() * &ell()) - &ParamPoly::one();
        let (n, j) = (1i64, 1i64);
        let w = h_apply(&fk, HKind::BD, -1, &FockVec::lowest(0, 0));
        let tail = (&fock::k2_exp_coeff(&fk, n, -j - 2, &w) + &fock::k_exp_coeff(&fk, n, -j - 1, &w))
            .times(n * n)
            .scale(&lm1);
        let doubled = y_exp(&fk, 2 * n, -j, &w).scale(&lm1.scale(&q(-n * j, 2)));
        assert!(!doubled.is_zero());
        assert_ne!(tail, doubled);
    }

    #[test]
    fn phi_action_respects_the_bracket_on_the_square_family() {
        let t = Toroidal::sl2();
        let fk = Fock::module(1);
        let xs: Vec<TorElem> = vec![
            TorElem::loop_gen(0, 1, E),
            TorElem::loop_gen(-1, 2, H),
            TorElem::loop_gen(1, -2, F),
            dtilde(0, 1),
            dtilde(1, -2),
            dtilde(-1, 2),
            TorElem::der_gen(1, 0, 1),
            TorElem::der_gen(-1, 0, 1),
            TorElem::kmn(1, 1),
            TorElem::kmn(-1, -2),
            TorElem::kmn(2, 0),
            TorElem::k1(),
        ];
        let targets = module_targets(&fk);
        for x in &xs {
            for y in &xs {
                let z = t.bracket(x, y);
                for w in &targets {
                    let xy = phi_act(&t, &fk, x, &phi_act(&t, &fk, y, w).unwrap()).unwrap();
                    let yx = phi_act(&t, &fk, y, &phi_act(&t, &fk, x, w).unwrap()).unwrap();
                    let direct = phi_act(&t, &fk, &z, w).unwrap();
                    assert_eq!(&xy - &yx, direct, "bracket [{x:?}, {y:?}]");
                }
            }
        }
        // Off the skew line the action is undefined.
        assert!(phi_act(&t, &fk, &TorElem::der_gen(1, 0, 0), &targets[0]).is_err());
        assert!(phi_act(&t, &fk, &TorElem::der_gen(1, 2, 1), &targets[0]).is_err());
    }

    #[test]
    fn mode_commutators_match_the_delta_expansion() {
        let t = Toroidal::sl2();
        let fk = Fock::module(1);
        let pairs = [
            (Atom::Exp(1), Atom::Exp(-1)),
            (Atom::Exp(2), Atom::DOne(-1)),
            (Atom::DOne(1), Atom::Exp(1)),
            (Atom::DOne(1), Atom::DOne(-2)),
            (Atom::KOne(1), Atom::DOne(1)),
            (Atom::KOne(2), Atom::Exp(1)),
            (Atom::Loop(E, 1), Atom::Loop(F, -1)),
            (Atom::Loop(H, 1), Atom::Exp(1)),
            (Atom::Omega(0), Atom::Exp(2)),
            (Atom::Omega(0), Atom::DOne(1)),
        ];
        let targets = module_targets(&fk);
        for (u, v) in &pairs {
            for (m, n) in [(1i64, -1i64), (0, 2), (-2, 1)] {
                for w in &targets {
                    let r = phi_commutator_check(&t, &fk, u, v, m, n, w).unwrap();
                    assert!(r.is_zero(), "pair {u:?}, {v:?} at ({m}, {n})");
                }
            }
        }
    }

    #[test]
    fn degenerate_columns_reduce_to_single_modes() {
        let fk = Fock::module(1);
        for w in &module_targets(&fk) {
            for s in -3i64..=3 {
                let want = if s == 0 { w.clone() } else { FockVec::zero() };
                assert_eq!(y_exp(&fk, 0, s, w), want, "marker zero at {s}");
                let kd = if s == -1 {
                    FockVec::zero()
                } else {
                    h_apply(&fk, HKind::BK, -s - 1, w)
                };
                assert_eq!(fock::k_exp_coeff(&fk, 0, s, w), kd, "bk column at {s}");
                assert_eq!(
                    fock::d_exp_coeff(&fk, 0, s, w),
                    h_apply(&fk, HKind::BD, -s - 1, w),
                    "bd column at {s}"
                );
            }
        }
        let t = Toroidal::sl2();
        let g = t.algebra();
        for w in &module_targets(&fk) {
            for j in -2i64..=2 {
                assert_eq!(fock::omega_exp_mode(g, &fk, 0, j, w), l_total(g, &fk, j, w));
            }
        }
    }

    #[test]
    fn windowed_tables_agree_with_pointwise_coefficients() {
        let t = Toroidal::sl2();
        let fk = Fock::module(1);
        let targets = module_targets(&fk);
        let v = atom_vec(&t, &Atom::DOne(1));
        let table = phi_table(&t, &fk, &v, -1, 1, &targets).unwrap();
        assert_eq!(table.weight, Some(1));
        for (k, w) in targets.iter().enumerate() {
            for n in -1..=1 {
                assert_eq!(
                    table.coeff(k, n).unwrap(),
                    &phi_coeff_vec(&t, &fk, &v, n, w).unwrap()
                );
            }
        }
        // A vector with a stray word stays outside the span.
        let voa = Fock::voa();
        let bad = h_apply(&voa, HKind::BK, -1, &h_apply(&voa, HKind::BK, -1, &FockVec::vacuum()));
        assert!(recognize(&t, &bad).is_err());
    }
}
