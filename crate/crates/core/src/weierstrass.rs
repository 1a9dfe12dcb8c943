//! Weierstrass equations `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.

use std::fmt;

use crate::elem::{Elem, ElemTarget, Valuation};
use crate::error::{Error, ParseError, Result};
use crate::expr::{eval, Parser};
use crate::field::FieldCtx;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeierstrassEq {
    ctx: FieldCtx,
    a: [Elem; 5],
}

/// The standard quantities attached to a Weierstrass equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StdInvariants {
    pub b2: Elem,
    pub b4: Elem,
    pub b6: Elem,
    pub b8: Elem,
    pub c4: Elem,
    pub c6: Elem,
    pub delta: Elem,
}

impl WeierstrassEq {
    pub fn new(a: [Elem; 5]) -> Result<Self> {
        let ctx = a[0].ctx().clone();
        if a.iter().any(|x| *x.ctx() != ctx) {
            return Err(Error::CtxMismatch);
        }
        Ok(WeierstrassEq { ctx, a })
    }

    /// Builds `[a1, a2, a3, a4, a6]` from integers.
    pub fn from_ints(ctx: &FieldCtx, a: [i64; 5]) -> Self {
        WeierstrassEq { ctx: ctx.clone(), a: a.map(|n| Elem::from_int(ctx, n)) }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[Elem; 5] {
        &self.a
    }

    pub fn a1(&self) -> &Elem {
        &self.a[0]
    }
    pub fn a2(&self) -> &Elem {
        &self.a[1]
    }
    pub fn a3(&self) -> &Elem {
        &self.a[2]
    }
    pub fn a4(&self) -> &Elem {
        &self.a[3]
    }
    pub fn a6(&self) -> &Elem {
        &self.a[4]
    }

    pub fn invariants(&self) -> Result<StdInvariants> {
        let c = &self.ctx;
        let n = |k: i64| Elem::from_int(c, k);
        let [a1, a2, a3, a4, a6] = &self.a;
        let b2 = a1.square().add(&n(4).mul(a2)?)?;
        let b4 = n(2).mul(a4)?.add(&a1.mul(a3)?)?;
        let b6 = a3.square().add(&n(4).mul(a6)?)?;
        let b8 = a1
            .square()
            .mul(a6)?
            .add(&n(4).mul(a2)?.mul(a6)?)?
            .sub(&a1.mul(a3)?.mul(a4)?)?
            .add(&a2.mul(&a3.square())?)?
            .sub(&a4.square())?;
        let c4 = b2.square().sub(&n(24).mul(&b4)?)?;
        let c6 = b2.pow(3)?.neg().add(&n(36).mul(&b2)?.mul(&b4)?)?.sub(&n(216).mul(&b6)?)?;
        let delta = b2
            .square()
            .mul(&b8)?
            .neg()
            .sub(&n(8).mul(&b4.pow(3)?)?)?
            .sub(&n(27).mul(&b6.square())?)?
            .add(&n(9).mul(&b2)?.mul(&b4)?.mul(&b6)?)?;
        Ok(StdInvariants { b2, b4, b6, b8, c4, c6, delta })
    }

    pub fn discriminant(&self) -> Result<Elem> {
        Ok(self.invariants()?.delta)
    }

    /// `j = c4^3 / delta`.
    pub fn j(&self) -> Result<Elem> {
        let inv = self.invariants()?;
        if inv.delta.is_exact_zero() {
            return Err(Error::SingularCurve);
        }
        inv.c4.pow(3)?.div(&inv.delta)
    }

    /// `v(j) = 3 v(c4) - v(delta)`, infinite when `c4 = 0`.
    pub fn j_valuation(&self) -> Result<Valuation> {
        let inv = self.invariants()?;
        let vd = match inv.delta.valuation()? {
            Valuation::Finite(v) => v,
            Valuation::Infinite => return Err(Error::SingularCurve),
        };
        Ok(match inv.c4.valuation()? {
            Valuation::Finite(v) => Valuation::Finite(3 * v - vd),
            Valuation::Infinite => Valuation::Infinite,
        })
    }

    /// The change of variables `x = u^2 x' + r`, `y = u^3 y' + s u^2 x' + t`.
    pub fn transform(&self, u: &Elem, r: &Elem, s: &Elem, t: &Elem) -> Result<Self> {
        let shifted = self.rst(r, s, t)?;
        let ui = u.inv()?;
        let mut a = shifted.a;
        let mut p = Elem::one(&self.ctx);
        let mut pows = Vec::with_capacity(7);
        for _ in 0..=6 {
            pows.push(p.clone());
            p = p.mul(&ui)?;
        }
        for (x, w) in a.iter_mut().zip([1usize, 2, 3, 4, 6]) {
            *x = x.mul(&pows[w])?;
        }
        Ok(WeierstrassEq { ctx: self.ctx.clone(), a })
    }

    /// The transformation with `u = 1`.
    pub fn rst(&self, r: &Elem, s: &Elem, t: &Elem) -> Result<Self> {
        let c = &self.ctx;
        let n = |k: i64| Elem::from_int(c, k);
        let [a1, a2, a3, a4, a6] = &self.a;
        let b1 = a1.add(&n(2).mul(s)?)?;
        let b2 = a2.sub(&s.mul(a1)?)?.add(&n(3).mul(r)?)?.sub(&s.square())?;
        let b3 = a3.add(&r.mul(a1)?)?.add(&n(2).mul(t)?)?;
        let b4 = a4
            .sub(&s.mul(a3)?)?
            .add(&n(2).mul(r)?.mul(a2)?)?
            .sub(&t.add(&r.mul(s)?)?.mul(a1)?)?
            .add(&n(3).mul(&r.square())?)?
            .sub(&n(2).mul(s)?.mul(t)?)?;
        let b6 = a6
            .add(&r.mul(a4)?)?
            .add(&r.square().mul(a2)?)?
            .add(&r.pow(3)?)?
            .sub(&t.mul(a3)?)?
            .sub(&t.square())?
            .sub(&r.mul(t)?.mul(a1)?)?;
        Ok(WeierstrassEq { ctx: self.ctx.clone(), a: [b1, b2, b3, b4, b6] })
    }

    /// The transformation with `u = pi^m`, `r = s = t = 0`: `a_i -> a_i / pi^(i m)`.
    pub fn scale_pi(&self, m: i64) -> Self {
        let a = [1i64, 2, 3, 4, 6];
        let mut out = self.a.clone();
        for (x, w) in out.iter_mut().zip(a) {
            *x = x.mul_pi_pow(-w * m);
        }
        WeierstrassEq { ctx: self.ctx.clone(), a: out }
    }

    /// Valuations (lower bounds where undetermined) of `a1, a2, a3, a4, a6`.
    pub fn valuations(&self) -> [Valuation; 5] {
        self.a.clone().map(|x| x.valuation_lower_bound())
    }

    /// Human-readable equation, e.g. `y^2 + pi*x*y + y = x^3`.
    pub fn equation(&self) -> String {
        let mut lhs = String::from("y^2");
        let mut rhs = String::from("x^3");
        let term = |c: &Elem, mono: &str, out: &mut String| {
            if c.is_exact_zero() {
                return;
            }
            let s = c.to_string();
            if s == "1" {
                out.push_str(&format!(" + {mono}"));
            } else if mono.is_empty() {
                out.push_str(&format!(" + ({s})"));
            } else {
                out.push_str(&format!(" + ({s})*{mono}"));
            }
        };
        term(&self.a[0], "x*y", &mut lhs);
        term(&self.a[2], "y", &mut lhs);
        term(&self.a[1], "x^2", &mut rhs);
        term(&self.a[3], "x", &mut rhs);
        let a6 = &self.a[4];
        if !a6.is_exact_zero() {
            let s = a6.to_string();
            rhs.push_str(&if s == "1" { " + 1".to_string() } else { format!(" + ({s})") });
        }
        format!("{lhs} = {rhs}")
    }

    pub fn parse(ctx: &FieldCtx, text: &str) -> Result<Self> {
        WeierstrassEq::parse_with_gen(ctx, text, &Elem::gen(ctx))
    }

    /// Parses `[a1,a2,a3,a4,a6]`.
    pub fn parse_with_gen(ctx: &FieldCtx, text: &str, g: &Elem) -> Result<Self> {
        let mut p = Parser::new(text)?;
        p.expect_punct('[')?;
        let target = ElemTarget { ctx, g };
        let mut a = Vec::with_capacity(5);
        loop {
            a.push(eval(&p.expr()?, &target)?);
            if p.eat_punct(']') {
                break;
            }
            p.expect_punct(',')?;
        }
        p.finish()?;
        let a: [Elem; 5] =
            a.try_into().map_err(|v: Vec<Elem>| ParseError::new(0, format!("expected 5 coefficients, found {}", v.len())))?;
        WeierstrassEq::new(a)
    }
}

impl fmt::Display for WeierstrassEq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{},{},{}]", self.a[0], self.a[1], self.a[2], self.a[3], self.a[4])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_field;

    fn curve(ctx: &FieldCtx, s: &str) -> WeierstrassEq {
        WeierstrassEq::parse(ctx, s).unwrap()
    }

    #[test]
    fn invariants_of_y2_plus_y() {
        let q = parse_field("mixed(k=1,eis=\"z-2\")").unwrap();
        let e = curve(&q, "[0,0,1,0,0]");
        let inv = e.invariants().unwrap();
        let n = |k| Elem::from_int(&q, k);
        assert_eq!(inv.b2, n(0));
        assert_eq!(inv.b4, n(0));
        assert_eq!(inv.b6, n(1));
        assert_eq!(inv.b8, n(0));
        assert_eq!(inv.c4, n(0));
        assert_eq!(inv.delta, n(-27));
        assert_eq!(e.j().unwrap(), n(0));
        assert_eq!(e.j_valuation().unwrap(), Valuation::Infinite);
    }

    #[test]
    fn lemma_curve_has_vj_12u() {
        for (eis, e) in [("z^2-2", 2i64), ("z^3-2", 3)] {
            let f = parse_field(&format!("mixed(k=1,eis=\"{eis}\")")).unwrap();
            for u in 1..e {
                let c = curve(&f, &format!("[pi^{u},0,1,0,0]"));
                assert_eq!(c.j_valuation().unwrap(), Valuation::Finite(12 * u));
            }
        }
        let f = FieldCtx::equichar(1, 64).unwrap();
        let c = curve(&f, "[pi^2,0,1,0,0]");
        assert_eq!(c.j_valuation().unwrap(), Valuation::Finite(24));
    }

    #[test]
    fn sums_of_cubes_have_j_zero() {
        let f = parse_field("mixed(k=1,eis=\"z^3-2\")").unwrap();
        assert_eq!(curve(&f, "[0,0,0,0,pi^3]").j().unwrap(), Elem::zero(&f));
    }

    #[test]
    fn identity_and_translation() {
        let q = parse_field("mixed(k=1,eis=\"z-2\")").unwrap();
        let e = curve(&q, "[0,0,1,0,0]");
        let one = Elem::one(&q);
        let zero = Elem::zero(&q);
        assert_eq!(e.transform(&one, &zero, &zero, &zero).unwrap(), e);
        let t = e.rst(&one, &zero, &zero).unwrap();
        // (X+1)^3 = X^3 + 3X^2 + 3X + 1
        assert_eq!(t, curve(&q, "[0,3,1,3,1]"));
        assert_eq!(t.j().unwrap(), e.j().unwrap());
    }

    #[test]
    fn dilation_lowers_discriminant_by_twelve() {
        let f = parse_field("mixed(k=1,eis=\"z^2-2\")").unwrap();
        let e = curve(&f, "[pi,pi^2,pi^3,pi^4,pi^6+pi^7]");
        let d0 = e.discriminant().unwrap().valuation().unwrap().finite().unwrap();
        let pi = Elem::pi(&f);
        let z = Elem::zero(&f);
        let d1 = e.transform(&pi, &z, &z, &z).unwrap().discriminant().unwrap().valuation().unwrap().finite().unwrap();
        assert_eq!(d1, d0 - 12);
        assert_eq!(e.scale_pi(1), e.transform(&pi, &z, &z, &z).unwrap());
    }

    #[test]
    fn print_and_parse() {
        let f = FieldCtx::equichar(2, 64).unwrap();
        let e = curve(&f, "[pi, g, 1, 0, pi^-3 + g*pi]");
        assert_eq!(curve(&f, &e.to_string()), e);
        assert_eq!(e.equation(), "y^2 + (pi)*x*y + y = x^3 + (g)*x^2 + (pi^-3+g*pi)");
        assert!(WeierstrassEq::parse(&f, "[1,2,3]").is_err());
        assert!(WeierstrassEq::parse(&f, "[1,2,3,4,5,6]").is_err());
        assert!(WeierstrassEq::parse(&f, "(1,2,3,4,5)").is_err());
    }
}
