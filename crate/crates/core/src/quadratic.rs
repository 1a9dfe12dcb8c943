//! Quadratic extensions `L/K`, their ramification break `s`, and twists.
//!
//! `L` is never built as a field. The break is read off from the
//! presentation, and independently from the valuation of the different
//! `v_L(g'(pi_L))` for an Eisenstein generator `pi_L` with minimal
//! polynomial `g`.

use std::fmt;

use crate::elem::{Elem, ElemTarget, Valuation};
use crate::error::{Error, ParseError, Result};
use crate::expr::{eval, Parser};
use crate::field::{FieldCtx, Regime};
use crate::weierstrass::WeierstrassEq;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtensionSpec {
    /// Splitting field of `z^2 + z + D` (equal characteristic).
    ArtinSchreier { d: Elem },
    /// `K(sqrt D)` with `v(D)` in `{0, 1}` (mixed characteristic).
    SqrtD { d: Elem },
    /// Splitting field of the Eisenstein polynomial `z^2 + a z + b`.
    Eisenstein2 { a: Elem, b: Elem },
}

fn finite(v: Valuation) -> Option<i64> {
    v.finite()
}

impl ExtensionSpec {
    pub fn ctx(&self) -> &FieldCtx {
        match self {
            ExtensionSpec::ArtinSchreier { d } | ExtensionSpec::SqrtD { d } => d.ctx(),
            ExtensionSpec::Eisenstein2 { a, .. } => a.ctx(),
        }
    }

    pub fn parse(ctx: &FieldCtx, text: &str) -> Result<Self> {
        ExtensionSpec::parse_with_gen(ctx, text, &Elem::gen(ctx))
    }

    /// Parses `as(D=..)`, `sqrt(..)` or `eis(a=..,b=..)`.
    pub fn parse_with_gen(ctx: &FieldCtx, text: &str, g: &Elem) -> Result<Self> {
        let target = ElemTarget { ctx, g };
        let mut p = Parser::new(text)?;
        let (kind, pos) = p.expect_ident()?;
        p.expect_punct('(')?;
        let named = |p: &mut Parser, name: &str| -> Result<Elem> {
            let (key, kpos) = p.expect_ident()?;
            if key != name {
                return Err(ParseError::new(kpos, format!("expected '{name}'")).into());
            }
            p.expect_punct('=')?;
            eval(&p.expr()?, &target)
        };
        let spec = match kind.as_str() {
            "as" => ExtensionSpec::ArtinSchreier { d: named(&mut p, "D")? },
            "sqrt" => ExtensionSpec::SqrtD { d: eval(&p.expr()?, &target)? },
            "eis" => {
                let a = named(&mut p, "a")?;
                p.expect_punct(',')?;
                let b = named(&mut p, "b")?;
                ExtensionSpec::Eisenstein2 { a, b }
            }
            _ => return Err(ParseError::new(pos, "expected 'as', 'sqrt' or 'eis'").into()),
        };
        p.expect_punct(')')?;
        p.finish()?;
        Ok(spec)
    }

    /// The break `s_{L/K}`; validates the presentation on the way.
    pub fn break_s(&self) -> Result<u32> {
        let s = match self {
            ExtensionSpec::ArtinSchreier { d } => {
                let d = normalize_as(d)?;
                -finite(d.valuation()?).expect("normalized D is nonzero")
            }
            ExtensionSpec::SqrtD { d } => {
                if d.ctx().regime() != Regime::Mixed {
                    return Err(Error::RegimeMismatch);
                }
                match d.valuation()? {
                    Valuation::Finite(1) => 2 * v2_of(d.ctx()),
                    Valuation::Finite(0) => {
                        let (a, b) = to_eisenstein(d)?;
                        return ExtensionSpec::Eisenstein2 { a, b }.break_s();
                    }
                    _ => return Err(Error::InvalidExtension("sqrt(D) needs v(D) in {0, 1}".into())),
                }
            }
            ExtensionSpec::Eisenstein2 { a, b } => 2 * check_eisenstein2(a, b)? - 1,
        };
        Ok(s as u32)
    }

    /// `v_L` of the different, computed from an explicit uniformizer of `L`.
    pub fn different_valuation(&self) -> Result<u32> {
        let (p, q) = match self {
            ExtensionSpec::Eisenstein2 { a, b } => (a.clone(), b.clone()),
            ExtensionSpec::SqrtD { d } => {
                if d.ctx().regime() != Regime::Mixed {
                    return Err(Error::RegimeMismatch);
                }
                match d.valuation()? {
                    Valuation::Finite(1) => (Elem::zero(d.ctx()), d.neg()),
                    Valuation::Finite(0) => to_eisenstein(d)?,
                    _ => return Err(Error::InvalidExtension("sqrt(D) needs v(D) in {0, 1}".into())),
                }
            }
            ExtensionSpec::ArtinSchreier { d } => {
                // alpha^2 + alpha + D = 0 with v(D) = -r odd. pi_L = pi^m alpha
                // with 2m - r = 1 has trace -pi^m and norm pi^(2m) D.
                let d = normalize_as(d)?;
                let r = -finite(d.valuation()?).expect("nonzero");
                let m = (r + 1) / 2;
                let trace = Elem::pi_pow(d.ctx(), m).neg();
                let norm = d.mul_pi_pow(2 * m);
                (trace.neg(), norm)
            }
        };
        // g(Z) = Z^2 + pZ + q must be Eisenstein.
        let vq = q.valuation()?;
        let vp = p.valuation()?;
        if vq != Valuation::Finite(1) || vp < Valuation::Finite(1) {
            return Err(Error::Internal(format!("generator polynomial is not Eisenstein: v(p)={vp}, v(q)={vq}")));
        }
        // g'(pi_L) = p + 2 pi_L, and v_L(x + y pi_L) = min(2 v(x), 2 v(y) + 1).
        let two = Elem::from_int(p.ctx(), 2);
        let vx = vp.finite().map(|v| 2 * v);
        let vy = two.valuation()?.finite().map(|v| 2 * v + 1);
        let v = match (vx, vy) {
            (Some(x), Some(y)) => x.min(y),
            (Some(x), None) => x,
            (None, Some(y)) => y,
            (None, None) => return Err(Error::Internal("inseparable generator".into())),
        };
        Ok(v as u32)
    }

    /// The scalar `D` with `L = K(sqrt D)`, mixed characteristic only.
    pub fn twisting_scalar(&self) -> Result<Elem> {
        match self {
            ExtensionSpec::SqrtD { d } => Ok(d.clone()),
            ExtensionSpec::Eisenstein2 { a, b } => a.square().sub(&Elem::from_int(a.ctx(), 4).mul(b)?),
            ExtensionSpec::ArtinSchreier { .. } => Err(Error::RegimeMismatch),
        }
    }
}

impl fmt::Display for ExtensionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtensionSpec::ArtinSchreier { d } => write!(f, "as(D={d})"),
            ExtensionSpec::SqrtD { d } => write!(f, "sqrt({d})"),
            ExtensionSpec::Eisenstein2 { a, b } => write!(f, "eis(a={a},b={b})"),
        }
    }
}

fn v2_of(ctx: &FieldCtx) -> i64 {
    i64::from(ctx.v2().expect("mixed characteristic"))
}

/// Returns `v(a)` after checking `v(b) = 1` and `1 <= v(a) <= v(2)`.
fn check_eisenstein2(a: &Elem, b: &Elem) -> Result<i64> {
    if a.ctx() != b.ctx() {
        return Err(Error::CtxMismatch);
    }
    if b.valuation()? != Valuation::Finite(1) {
        return Err(Error::InvalidExtension("eis(a,b) needs v(b) = 1".into()));
    }
    let va = a.valuation()?;
    let cap = a.ctx().v2().map_or(Valuation::Infinite, |e| Valuation::Finite(i64::from(e)));
    match va {
        Valuation::Finite(v) if v >= 1 && Valuation::Finite(v) <= cap => Ok(v),
        _ => Err(Error::InvalidExtension(format!("eis(a,b) needs 1 <= v(a) <= v(2), got v(a)={va}"))),
    }
}

/// Rewrites `z^2 + z + D` by `z -> z + b/pi^m` until `v(D)` is negative and odd.
pub fn normalize_as(d: &Elem) -> Result<Elem> {
    let ctx = d.ctx();
    if ctx.regime() != Regime::Equichar {
        return Err(Error::RegimeMismatch);
    }
    let mut d = d.clone();
    loop {
        let v = match d.valuation()? {
            Valuation::Finite(v) if v < 0 => v,
            _ => return Err(Error::ReducibleExtension),
        };
        if v % 2 != 0 {
            return Ok(d);
        }
        let m = -v / 2;
        let lead = d.digit(v).expect("equal characteristic");
        let b = Elem::from_residue(ctx, &lead.sqrt());
        let beta = b.mul_pi_pow(-m);
        d = d.add(&beta.square())?.add(&beta)?;
    }
}

/// Presents `K(sqrt D)`, `D` a non-square unit, as `z^2 + a z + b` Eisenstein
/// with `a^2 - 4b = D c^2`.
pub fn to_eisenstein(d: &Elem) -> Result<(Elem, Elem)> {
    let ctx = d.ctx();
    let e = match ctx.v2() {
        Some(e) => i64::from(e),
        None => return Err(Error::RegimeMismatch),
    };
    if d.valuation()? != Valuation::Finite(0) {
        return Err(Error::NotANonSquareUnit);
    }
    let mut w = Elem::from_residue(ctx, &d.residue()?.sqrt());
    let depth = loop {
        let diff = d.sub(&w.square())?;
        let dv = match diff.valuation()? {
            Valuation::Finite(v) => v,
            Valuation::Infinite => return Err(Error::NotANonSquareUnit),
        };
        // From depth 2 v(2) on, D is a square over the algebraic closure of the residue field.
        if dv >= 2 * e {
            return Err(Error::NotANonSquareUnit);
        }
        if dv % 2 == 1 {
            break dv;
        }
        let r = diff.mul_pi_pow(-dv).residue()?.sqrt();
        w = w.add(&Elem::from_residue(ctx, &r).mul_pi_pow(dv / 2))?;
    };
    let vc = (1 + 2 * e - depth) / 2;
    let c = Elem::pi_pow(ctx, vc);
    let a = c.mul(&w)?;
    let four = Elem::from_int(ctx, 4);
    let b = c.square().mul(&w.square().sub(d)?)?.div(&four)?;
    let lhs = a.square().sub(&four.mul(&b)?)?;
    if !lhs.sub(&d.mul(&c.square())?)?.is_zero_to_precision() {
        return Err(Error::Internal("a^2 - 4b != D c^2".into()));
    }
    Ok((a, b))
}

/// Whether `s` is a possible break of a ramified quadratic extension of `K`.
pub fn break_is_admissible(ctx: &FieldCtx, s: u32) -> bool {
    match ctx.v2() {
        None => s % 2 == 1,
        Some(e) => (s % 2 == 1 && s < 2 * e) || s == 2 * e,
    }
}

/// Admissible breaks up to `max` (inclusive), in increasing order.
pub fn admissible_breaks(ctx: &FieldCtx, max: u32) -> Vec<u32> {
    (1..=max).filter(|&s| break_is_admissible(ctx, s)).collect()
}

/// An extension with break exactly `s`.
pub fn construct_extension_with_s(ctx: &FieldCtx, s: u32) -> Result<ExtensionSpec> {
    if !break_is_admissible(ctx, s) {
        return Err(Error::InvalidBreak { s });
    }
    let pi = Elem::pi(ctx);
    Ok(match ctx.v2() {
        None => ExtensionSpec::ArtinSchreier { d: Elem::pi_pow(ctx, -i64::from(s)) },
        Some(e) if s == 2 * e => ExtensionSpec::SqrtD { d: pi },
        Some(_) => ExtensionSpec::Eisenstein2 { a: Elem::pi_pow(ctx, i64::from(s + 1) / 2), b: pi },
    })
}

/// The quadratic twist of `E` by `L/K`.
///
/// Equal characteristic: `a2 += D a1^2`, `a6 += D a3^2`. Mixed:
/// `y^2 = x^3 + D b2 x^2 + 8 D^2 b4 x + 16 D^3 b6`.
pub fn twist(e: &WeierstrassEq, ext: &ExtensionSpec) -> Result<WeierstrassEq> {
    if e.ctx() != ext.ctx() {
        return Err(Error::CtxMismatch);
    }
    match (e.ctx().regime(), ext) {
        (Regime::Equichar, ExtensionSpec::ArtinSchreier { d }) => {
            let [a1, a2, a3, a4, a6] = e.coeffs().clone();
            let a2 = a2.add(&d.mul(&a1.square())?)?;
            let a6 = a6.add(&d.mul(&a3.square())?)?;
            WeierstrassEq::new([a1, a2, a3, a4, a6])
        }
        (Regime::Mixed, ExtensionSpec::SqrtD { .. } | ExtensionSpec::Eisenstein2 { .. }) => {
            let d = ext.twisting_scalar()?;
            let ctx = e.ctx();
            let inv = e.invariants()?;
            let zero = Elem::zero(ctx);
            let a2 = d.mul(&inv.b2)?;
            let a4 = Elem::from_int(ctx, 8).mul(&d.square())?.mul(&inv.b4)?;
            let a6 = Elem::from_int(ctx, 16).mul(&d.pow(3)?)?.mul(&inv.b6)?;
            WeierstrassEq::new([zero.clone(), a2, zero, a4, a6])
        }
        _ => Err(Error::RegimeMismatch),
    }
}
