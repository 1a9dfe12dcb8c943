//! 2-isogenies: Vélu's formulas, the modular polynomial `Phi_2`, its
//! rational parametrization, and the valuation patterns of 2-isogenous
//! `j`-invariants.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::elem::{Elem, Valuation};
use crate::error::{Error, Result};
use crate::field::Regime;
use crate::weierstrass::WeierstrassEq;

/// `(i, j, c)`: the monomial `c X^i Y^j` of `Phi_2`.
pub const PHI2_TERMS: [(u32, u32, i64); 11] = [
    (3, 0, 1),
    (2, 2, -1),
    (2, 1, 1488),
    (2, 0, -162_000),
    (1, 2, 1488),
    (1, 1, 40_773_375),
    (1, 0, 8_748_000_000),
    (0, 3, 1),
    (0, 2, -162_000),
    (0, 1, 8_748_000_000),
    (0, 0, -157_464_000_000_000),
];

/// The two arithmetics `Phi_2` is evaluated in.
pub trait PhiRing: Clone {
    fn constant(&self, c: i64) -> Result<Self>;
    fn add(&self, other: &Self) -> Result<Self>;
    fn mul(&self, other: &Self) -> Result<Self>;
    fn div(&self, other: &Self) -> Result<Self>;
    fn is_nil(&self) -> bool;
}

impl PhiRing for BigRational {
    fn constant(&self, c: i64) -> Result<Self> {
        Ok(BigRational::from_integer(BigInt::from(c)))
    }
    fn add(&self, other: &Self) -> Result<Self> {
        Ok(self + other)
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        Ok(self * other)
    }
    fn div(&self, other: &Self) -> Result<Self> {
        if Zero::is_zero(other) {
            return Err(Error::DivisionByZero);
        }
        Ok(self / other)
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl PhiRing for Elem {
    fn constant(&self, c: i64) -> Result<Self> {
        Ok(Elem::from_int(self.ctx(), c))
    }
    fn add(&self, other: &Self) -> Result<Self> {
        Elem::add(self, other)
    }
    fn mul(&self, other: &Self) -> Result<Self> {
        Elem::mul(self, other)
    }
    fn div(&self, other: &Self) -> Result<Self> {
        Elem::div(self, other)
    }
    fn is_nil(&self) -> bool {
        self.is_exact_zero()
    }
}

fn pow<R: PhiRing>(x: &R, n: u32) -> Result<R> {
    let mut acc = x.constant(1)?;
    for _ in 0..n {
        acc = acc.mul(x)?;
    }
    Ok(acc)
}

pub fn phi2_eval<R: PhiRing>(x: &R, y: &R) -> Result<R> {
    let mut acc = x.constant(0)?;
    for (i, j, c) in PHI2_TERMS {
        let term = x.constant(c)?.mul(&pow(x, i)?)?.mul(&pow(y, j)?)?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// `t -> ((t + 16)^3 / t, (t + 256)^3 / t^2)`, a point on `Phi_2 = 0`.
pub fn phi2_parametrization<R: PhiRing>(t: &R) -> Result<(R, R)> {
    if t.is_nil() {
        return Err(Error::DivisionByZero);
    }
    let x = pow(&t.add(&t.constant(16)?)?, 3)?.div(t)?;
    let y = pow(&t.add(&t.constant(256)?)?, 3)?.div(&t.mul(t)?)?;
    Ok((x, y))
}

/// The parameter giving the swapped pair: `2^12 / t`.
pub fn swap_parameter<R: PhiRing>(t: &R) -> Result<R> {
    t.constant(4096)?.div(t)
}

/// Which valuation pattern a pair of 2-isogenous `j`-invariants follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IsogenyValuationCase {
    /// `v(j1) = v(j2) = 6 v(2)`.
    Equal,
    /// `v(j1) < 4 v(2)` and `v(j2) = 2 v(j1)`.
    Doubled,
    /// `4 v(2) < v(j1) < 6 v(2)` and `v(j2) = 12 v(2) - v(j1)`.
    Reflected,
    /// `v(j1) = 4 v(2)` and `v(j2) = 8 v(2) + 3r`; `r` infinite when `j2 = 0`.
    Shifted { r: Valuation },
    /// No pattern applies: the valuations cannot come from a 2-isogeny.
    Inconsistent,
}

impl fmt::Display for IsogenyValuationCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IsogenyValuationCase::Equal => f.write_str("equal: v(j1) = v(j2) = 6v(2)"),
            IsogenyValuationCase::Doubled => f.write_str("doubled: v(j2) = 2v(j1)"),
            IsogenyValuationCase::Reflected => f.write_str("reflected: v(j2) = 12v(2) - v(j1)"),
            IsogenyValuationCase::Shifted { r } => write!(f, "shifted: v(j2) = 8v(2) + 3r, r = {r}"),
            IsogenyValuationCase::Inconsistent => f.write_str("inconsistent"),
        }
    }
}

/// Classifies positive valuations of 2-isogenous `j`-invariants (in either
/// order). With `strict_shift`, the shifted case needs `r >= 1`, which holds
/// when both `j`-invariants lie in `Q_2` over the maximal unramified extension.
pub fn classify_2isogeny_valuations(vj1: Valuation, vj2: Valuation, v2: u32, strict_shift: bool) -> Result<IsogenyValuationCase> {
    if vj1 <= Valuation::Finite(0) || vj2 <= Valuation::Finite(0) {
        return Err(Error::InconsistentInput("j-invariant valuations must be positive".into()));
    }
    let (lo, hi) = if vj1 <= vj2 { (vj1, vj2) } else { (vj2, vj1) };
    let e = i64::from(v2);
    let Valuation::Finite(a) = lo else {
        return Ok(IsogenyValuationCase::Inconsistent);
    };
    use IsogenyValuationCase::*;
    let case = match hi {
        Valuation::Finite(b) if b == a => {
            if a == 6 * e {
                Equal
            } else {
                Inconsistent
            }
        }
        _ if a >= 6 * e => Inconsistent,
        Valuation::Infinite => {
            if a == 4 * e {
                Shifted { r: Valuation::Infinite }
            } else {
                Inconsistent
            }
        }
        Valuation::Finite(b) => {
            if a < 4 * e {
                if b == 2 * a {
                    Doubled
                } else {
                    Inconsistent
                }
            } else if a > 4 * e {
                if b == 12 * e - a {
                    Reflected
                } else {
                    Inconsistent
                }
            } else if b >= 8 * e && (b - 8 * e) % 3 == 0 && (!strict_shift || b > 8 * e) {
                Shifted { r: Valuation::Finite((b - 8 * e) / 3) }
            } else {
                Inconsistent
            }
        }
    };
    Ok(case)
}

/// The case forced by the parameter `t` of the pair `(j1, j2)`, read off
/// from `v(t)` alone (and `v(t + 16)` in the shifted case).
pub fn expected_case_from_parameter(t: &Elem) -> Result<IsogenyValuationCase> {
    let e = i64::from(t.ctx().v2().ok_or(Error::RegimeMismatch)?);
    let n = match t.valuation()? {
        Valuation::Finite(n) => n,
        Valuation::Infinite => return Err(Error::DivisionByZero),
    };
    if n <= 0 || n >= 12 * e {
        return Err(Error::InconsistentInput(format!("v(t) = {n} gives a non-positive j-valuation")));
    }
    if n > 6 * e {
        return expected_case_from_parameter(&swap_parameter(t)?);
    }
    Ok(if n < 4 * e {
        IsogenyValuationCase::Doubled
    } else if n == 4 * e {
        let shifted = t.add(&Elem::from_int(t.ctx(), 16))?;
        let r = match shifted.valuation()? {
            Valuation::Finite(v) => Valuation::Finite(v - 4 * e),
            Valuation::Infinite => Valuation::Infinite,
        };
        IsogenyValuationCase::Shifted { r }
    } else if n < 6 * e {
        IsogenyValuationCase::Reflected
    } else {
        IsogenyValuationCase::Equal
    })
}

/// Whether two 2-isogenous additive curves with good supersingular
/// reduction over a quadratic extension with break `s` share their type.
pub fn same_type_2isogeny(vj1: Valuation, vj2: Valuation, s: u32, v2: u32) -> bool {
    let bound = Valuation::Finite(4 * i64::from(s) - 4);
    let six = Valuation::Finite(6 * i64::from(v2));
    vj1.min(vj2) > bound || (vj1 == six && vj2 == six)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoIsogenyPair {
    /// The source in the form `y^2 = x^3 + a2 x^2 + a4 x + a6`.
    pub source: WeierstrassEq,
    pub target: WeierstrassEq,
    pub kernel_x: Elem,
}

/// The quotient of `E` by the 2-torsion point with abscissa `x0`.
///
/// With `f(x) = x^3 + a2 x^2 + a4 x + a6`, `t = f'(x0)` and `w = x0 t`,
/// the target is `y^2 = x^3 + a2 x^2 + (a4 - 5t) x + a6 - 4 a2 t - 7w`.
pub fn velu_2isogeny(e: &WeierstrassEq, x0: &Elem) -> Result<TwoIsogenyPair> {
    let ctx = e.ctx();
    if ctx.regime() != Regime::Mixed {
        return Err(Error::RegimeUnsupported);
    }
    if x0.ctx() != ctx {
        return Err(Error::CtxMismatch);
    }
    let n = |k: i64| Elem::from_int(ctx, k);
    let inv = e.invariants()?;
    let a2 = inv.b2.div(&n(4))?;
    let a4 = inv.b4.div(&n(2))?;
    let a6 = inv.b6.div(&n(4))?;
    let zero = Elem::zero(ctx);
    let source = WeierstrassEq::new([zero.clone(), a2.clone(), zero.clone(), a4.clone(), a6.clone()])?;
    let cubic = x0.pow(3)?.add(&a2.mul(&x0.square())?)?.add(&a4.mul(x0)?)?.add(&a6)?;
    if !cubic.is_zero_to_precision() {
        return Err(Error::NotTwoTorsion);
    }
    let t = n(3).mul(&x0.square())?.add(&n(2).mul(&a2)?.mul(x0)?)?.add(&a4)?;
    let w = x0.mul(&t)?;
    let t4 = a4.sub(&n(5).mul(&t)?)?;
    let t6 = a6.sub(&n(4).mul(&a2)?.mul(&t)?)?.sub(&n(7).mul(&w)?)?;
    let target = WeierstrassEq::new([zero.clone(), a2, zero, t4, t6])?;
    Ok(TwoIsogenyPair { source, target, kernel_x: x0.clone() })
}

/// Exact rational `j` when the element lies in `Q`.
pub fn rational_j(e: &WeierstrassEq) -> Result<Option<BigRational>> {
    Ok(e.j()?.as_rational())
}

/// `2^4 3^3 5^3`, the `j`-invariant 2-isogenous to `j = 0`.
pub fn j_partner_of_zero() -> BigRational {
    BigRational::from_integer(BigInt::from(54000))
}
