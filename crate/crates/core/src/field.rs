//! Field descriptors for the two regimes.
//!
//! `Equichar` is `F_{2^k}((pi))`. `Mixed` is `W[pi]/(e(pi))` where `W` is
//! the unramified extension of `Z_2` of degree `k`, presented as
//! `Z_2[g]/(m(g))` with `m` the integer lift of the residue modulus, and
//! `e` is an Eisenstein polynomial with integer coefficients.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, ParseError, Result};
use crate::expr::{parse_int_poly, IntPoly, Parser};
use crate::residue::ResCtx;

pub const DEFAULT_PREC: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    Equichar,
    Mixed,
}

#[derive(Clone, PartialEq, Eq)]
pub(crate) struct MixedData {
    pub eis: IntPoly,
    /// Ramification index, the degree of `eis`.
    pub e: usize,
    /// Lift of the residue modulus, lowest degree first, length `k + 1`.
    pub modulus: Vec<i64>,
    /// `pi^-1` in the `[i * k + j]` coefficient layout.
    pub pi_inv: Vec<BigRational>,
}

#[derive(Clone, PartialEq, Eq)]
struct Inner {
    residue: ResCtx,
    prec: u32,
    mixed: Option<MixedData>,
}

/// A local field of residue characteristic 2 together with its working precision.
#[derive(Clone)]
pub struct FieldCtx(Arc<Inner>);

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for FieldCtx {}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldCtx({self})")
    }
}

impl FieldCtx {
    /// `F_{2^k}((pi))`.
    pub fn equichar(k: u32, prec: u32) -> Result<Self> {
        let residue = ResCtx::new(k)?;
        check_prec(prec)?;
        Ok(FieldCtx(Arc::new(Inner { residue, prec, mixed: None })))
    }

    /// Totally ramified extension of the unramified degree-`k` extension of `Q_2`.
    pub fn mixed(k: u32, eis: IntPoly, prec: u32) -> Result<Self> {
        let residue = ResCtx::new(k)?;
        check_prec(prec)?;
        let e = eis.degree().ok_or_else(|| Error::InvalidField("zero polynomial".into()))?;
        if e == 0 {
            return Err(Error::InvalidField("Eisenstein polynomial must have positive degree".into()));
        }
        if e > 64 {
            return Err(Error::TooLarge);
        }
        if !eis.coeff(e).is_one() {
            return Err(Error::InvalidField(format!("{eis} is not monic")));
        }
        let two = BigInt::from(2);
        for i in 0..e {
            if !eis.coeff(i).is_multiple_of(&two) {
                return Err(Error::InvalidField(format!("{eis} is not Eisenstein: odd coefficient of z^{i}")));
            }
        }
        if eis.coeff(0).is_multiple_of(&BigInt::from(4)) {
            return Err(Error::InvalidField(format!("{eis} is not Eisenstein: constant term divisible by 4")));
        }
        let eis = IntPoly(eis.0[..=e].to_vec());
        let modulus = (0..=k).map(|i| i64::from(residue.modulus() >> i & 1)).collect();
        let kk = k as usize;
        let mut pi_inv = vec![BigRational::zero(); e * kk];
        let c0 = BigRational::from_integer(eis.coeff(0));
        for i in 0..e {
            pi_inv[i * kk] = -BigRational::from_integer(eis.coeff(i + 1)) / &c0;
        }
        Ok(FieldCtx(Arc::new(Inner { residue, prec, mixed: Some(MixedData { eis, e, modulus, pi_inv }) })))
    }

    pub fn regime(&self) -> Regime {
        if self.0.mixed.is_some() {
            Regime::Mixed
        } else {
            Regime::Equichar
        }
    }

    pub fn residue(&self) -> &ResCtx {
        &self.0.residue
    }

    pub fn residue_degree(&self) -> u32 {
        self.0.residue.degree()
    }

    pub fn prec(&self) -> u32 {
        self.0.prec
    }

    /// Ramification index over `Q_2`; `None` in equal characteristic.
    pub fn ram_index(&self) -> Option<u32> {
        self.0.mixed.as_ref().map(|m| m.e as u32)
    }

    /// `v(2)`: the ramification index, or `None` for infinity (2 = 0).
    pub fn v2(&self) -> Option<u32> {
        self.ram_index()
    }

    pub fn eisenstein(&self) -> Option<&IntPoly> {
        self.0.mixed.as_ref().map(|m| &m.eis)
    }

    pub(crate) fn mixed_data(&self) -> Option<&MixedData> {
        self.0.mixed.as_ref()
    }

    /// Relative precision, in uniformizer digits, kept by truncated operations.
    pub fn rel_prec(&self) -> i64 {
        i64::from(self.0.prec) * i64::from(self.ram_index().unwrap_or(1))
    }

    pub fn with_prec(&self, prec: u32) -> Result<Self> {
        check_prec(prec)?;
        let mut inner = (*self.0).clone();
        inner.prec = prec;
        Ok(FieldCtx(Arc::new(inner)))
    }

    /// Same tower over the residue field of degree `k`.
    pub fn with_residue_degree(&self, k: u32) -> Result<Self> {
        match &self.0.mixed {
            None => FieldCtx::equichar(k, self.0.prec),
            Some(m) => FieldCtx::mixed(k, m.eis.clone(), self.0.prec),
        }
    }
}

fn check_prec(prec: u32) -> Result<()> {
    if prec == 0 {
        return Err(Error::InvalidField("precision must be positive".into()));
    }
    if prec > 1 << 14 {
        return Err(Error::TooLarge);
    }
    Ok(())
}

impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.mixed {
            None => write!(f, "equichar(k={},prec={})", self.residue_degree(), self.0.prec),
            Some(m) => write!(f, "mixed(k={},eis=\"{}\",prec={})", self.residue_degree(), m.eis, self.0.prec),
        }
    }
}

/// Parses `equichar(k=..,prec=..)` or `mixed(k=..,eis="..",prec=..)`.
///
/// `prec` may be omitted and defaults to [`DEFAULT_PREC`].
pub fn parse_field(text: &str) -> Result<FieldCtx> {
    let mut p = Parser::new(text)?;
    let (kind, kind_pos) = p.expect_ident()?;
    p.expect_punct('(')?;
    let mut k = None;
    let mut eis = None;
    let mut prec = None;
    loop {
        let (key, pos) = p.expect_ident()?;
        p.expect_punct('=')?;
        match key.as_str() {
            "k" if k.is_none() => k = Some(p.expect_uint()?),
            "prec" if prec.is_none() => prec = Some(p.expect_uint()?),
            "eis" if eis.is_none() && kind == "mixed" => {
                let s_pos = p.pos();
                let s = p.expect_string()?;
                let poly = parse_int_poly(&s).map_err(|e| match e {
                    Error::Parse(pe) => Error::Parse(ParseError::new(s_pos + 1 + pe.pos, pe.msg)),
                    other => other,
                })?;
                eis = Some(poly);
            }
            _ => return Err(ParseError::new(pos, format!("unexpected or repeated key '{key}'")).into()),
        }
        if p.eat_punct(')') {
            break;
        }
        p.expect_punct(',')?;
    }
    p.finish()?;
    let k = k.ok_or_else(|| ParseError::new(kind_pos, "missing k"))?;
    let k = u32::try_from(k).map_err(|_| Error::UnsupportedDegree(u32::MAX))?;
    let prec = match prec {
        None => DEFAULT_PREC,
        Some(p) => u32::try_from(p).map_err(|_| Error::TooLarge)?,
    };
    match kind.as_str() {
        "equichar" => FieldCtx::equichar(k, prec),
        "mixed" => {
            let eis = eis.ok_or_else(|| ParseError::new(kind_pos, "missing eis"))?;
            FieldCtx::mixed(k, eis, prec)
        }
        _ => Err(ParseError::new(kind_pos, "expected 'equichar' or 'mixed'").into()),
    }
}

impl FromStr for FieldCtx {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_field(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let f = parse_field("mixed(k=1,eis=\"z^3-2\",prec=64)").unwrap();
        assert_eq!(f.to_string(), "mixed(k=1,eis=\"z^3-2\",prec=64)");
        assert_eq!(f.v2(), Some(3));
        assert_eq!(f.regime(), Regime::Mixed);
        let g = parse_field("equichar(k=2,prec=32)").unwrap();
        assert_eq!(g.to_string(), "equichar(k=2,prec=32)");
        assert_eq!(g.v2(), None);
        assert_eq!(parse_field(&g.to_string()).unwrap(), g);
        assert_eq!(parse_field("equichar(k=4)").unwrap().prec(), DEFAULT_PREC);
        let h = parse_field("mixed(k=2, eis=\"z^2-2*z+2\")").unwrap();
        assert_eq!(h.ram_index(), Some(2));
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!(matches!(parse_field("mixed(k=1,eis=\"z^2-4\")"), Err(Error::InvalidField(_))));
        assert!(matches!(parse_field("mixed(k=1,eis=\"z^2-3\")"), Err(Error::InvalidField(_))));
        assert!(matches!(parse_field("mixed(k=1,eis=\"2*z^2-2\")"), Err(Error::InvalidField(_))));
        assert!(matches!(parse_field("mixed(k=5,eis=\"z-2\")"), Err(Error::UnsupportedDegree(5))));
        assert!(matches!(parse_field("equichar(k=2,k=3)"), Err(Error::Parse(_))));
        assert!(matches!(parse_field("equichar(k=2,eis=\"z-2\")"), Err(Error::Parse(_))));
        assert!(matches!(parse_field("mixed(k=1)"), Err(Error::Parse(_))));
        assert!(matches!(parse_field("equichar(k=2,prec=0)"), Err(Error::InvalidField(_))));
        assert!(parse_field("padic(k=1)").is_err());
        let e = parse_field("mixed(k=1,eis=\"z^2-$\")").unwrap_err();
        assert_eq!(e, Error::Parse(ParseError::new(19, "unexpected character '$'")));
    }

    #[test]
    fn pi_inverse_table() {
        let f = parse_field("mixed(k=1,eis=\"z^2-2\")").unwrap();
        let m = f.mixed_data().unwrap();
        // pi^-1 = pi/2
        assert_eq!(m.pi_inv, vec![BigRational::zero(), BigRational::new(1.into(), 2.into())]);
    }
}
