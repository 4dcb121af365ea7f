//! Combinatorial identity checkers for falling factorials.
//!
//! Three families feed the derivation-bracket computations:
//! a binomial exchange identity mixing two falling factorials, the Newton
//! expansion of (a+b)^(q), and the cubic coefficient identity behind the
//! closed-form derivation bracket. Each checker returns LHS - RHS as a
//! polynomial; the contract everywhere is the zero polynomial.

use crate::scalar::{binom, ffact, Param, ParamPoly};

/// LHS - RHS of the exchange identity
/// `sum_r C(p,r) alpha^(p-r) a^((p-r)) (-beta)^r b^((r))
///  = sum_t C(p,t) (alpha+beta)^(p-t) a^((p-t)) beta^t (-a-b-1+p)^((t))`
/// in the four formal parameters a, b, alpha, beta.
pub fn lemma35_residual(p: u32) -> ParamPoly {
    let a = ParamPoly::param(Param::A);
    let b = ParamPoly::param(Param::B);
    let alpha = ParamPoly::param(Param::Alpha);
    let beta = ParamPoly::param(Param::Beta);

    let mut lhs = ParamPoly::zero();
    for r in 0..=p {
        let mut term = ParamPoly::constant(binom(p, r));
        term = &term * &alpha.pow(p - r);
        term = &term * &ffact(&a, p - r);
        term = &term * &(-&beta).pow(r);
        term = &term * &ffact(&b, r);
        lhs = &lhs + &term;
    }

    let mut rhs = ParamPoly::zero();
    let apb = &alpha + &beta;
    let shifted = &(&(-&a) - &b) + &ParamPoly::int(p as i64 - 1);
    for t in 0..=p {
        let mut term = ParamPoly::constant(binom(p, t));
        term = &term * &apb.pow(p - t);
        term = &term * &ffact(&a, p - t);
        term = &term * &beta.pow(t);
        term = &term * &ffact(&shifted, t);
        rhs = &rhs + &term;
    }

    &lhs - &rhs
}

/// LHS - RHS of `(a+b)^((q)) = sum_i C(q,i) a^((i)) b^((q-i))` in formal a, b.
pub fn newton_residual(q: u32) -> ParamPoly {
    let a = ParamPoly::param(Param::A);
    let b = ParamPoly::param(Param::B);
    let lhs = ffact(&(&a + &b), q);
    let mut rhs = ParamPoly::zero();
    for i in 0..=q {
        let term = &ffact(&a, i) * &ffact(&b, q - i);
        rhs = &rhs + &term.scale(&binom(q, i));
    }
    &lhs - &rhs
}

/// Difference of the two cubic coefficient sums
/// `sum_r C(3,r) n^(3-r) (i+1)^((3-r)) (-m)^r (j+1)^((r))` and
/// `sum_s C(3,s) (m+n)^(3-s) (i+1)^((3-s)) m^s (-i-j)^((s))`,
/// taken with polynomial arguments so integer instances and the full
/// 4-variable identity share one code path.
pub fn bre5_coefficient_check(
    i: &ParamPoly,
    j: &ParamPoly,
    m: &ParamPoly,
    n: &ParamPoly,
) -> ParamPoly {
    let ip1 = i + &ParamPoly::one();
    let jp1 = j + &ParamPoly::one();
    let mut lhs = ParamPoly::zero();
    for r in 0..=3u32 {
        let mut term = ParamPoly::constant(binom(3, r));
        term = &term * &n.pow(3 - r);
        term = &term * &ffact(&ip1, 3 - r);
        term = &term * &(-m).pow(r);
        term = &term * &ffact(&jp1, r);
        lhs = &lhs + &term;
    }
    let mpn = m + n;
    let mipj = &(-i) - j;
    let mut rhs = ParamPoly::zero();
    for s in 0..=3u32 {
        let mut term = ParamPoly::constant(binom(3, s));
        term = &term * &mpn.pow(3 - s);
        term = &term * &ffact(&ip1, 3 - s);
        term = &term * &m.pow(s);
        term = &term * &ffact(&mipj, s);
        rhs = &rhs + &term;
    }
    &lhs - &rhs
}

/// The same check with concrete integer indices.
pub fn bre5_coefficient_check_int(i: i64, j: i64, m: i64, n: i64) -> ParamPoly {
    bre5_coefficient_check(
        &ParamPoly::int(i),
        &ParamPoly::int(j),
        &ParamPoly::int(m),
        &ParamPoly::int(n),
    )
}
