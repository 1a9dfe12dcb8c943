//! Elements of a [`FieldCtx`] with valuation and precision tracking.
//!
//! An element is either exact or known modulo `pi^prec` (an absolute
//! horizon). Equal-characteristic elements are finite Laurent
//! polynomials in `pi` with residue-field digits. Mixed-characteristic
//! elements are vectors of rational coefficients on the basis
//! `pi^i g^j` (`i < e`, `j < k`); rationals keep exact values exact under
//! division, and non-exact values are reduced to dyadic integers.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, ParseError, Result};
use crate::expr::{eval, parse_expr, EvalTarget};
use crate::field::{FieldCtx, MixedData, Regime};
use crate::residue::{clmul, AsRoot, ResCtx, ResElem};

/// A valuation in `Z ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Valuation::Infinite
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
            (Valuation::Infinite, _) => Ordering::Greater,
            (_, Valuation::Infinite) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Valuation {
    type Output = Valuation;

    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl From<i64> for Valuation {
    fn from(v: i64) -> Self {
        Valuation::Finite(v)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Valuation {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        match s.trim() {
            "inf" | "∞" | "infinity" => Ok(Valuation::Infinite),
            t => t.parse().map(Valuation::Finite).map_err(|_| ParseError::new(0, "expected an integer or 'inf'")),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_i64(*v),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(i64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(Valuation::Finite(n)),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
enum Repr {
    /// Digit `i` is the coefficient of `pi^(lo + i)`; no leading or trailing zero digits.
    Eq { lo: i64, digits: Vec<u32> },
    /// Coefficient of `pi^i g^j` at index `i * k + j`.
    Mx(Vec<BigRational>),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Elem {
    ctx: FieldCtx,
    repr: Repr,
    /// Absolute precision; `None` means exact.
    prec: Option<i64>,
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

/// 2-adic valuation of a nonzero rational.
fn v2q(c: &BigRational) -> i64 {
    let n = c.numer().trailing_zeros().unwrap_or(0) as i64;
    let d = c.denom().trailing_zeros().unwrap_or(0) as i64;
    n - d
}

fn pow2(n: i64) -> BigRational {
    if n >= 0 {
        BigRational::from_integer(BigInt::one() << n as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-n) as usize)
    }
}

/// Reduces `c` modulo `2^m` to a symmetric dyadic representative.
fn reduce_dyadic(c: &BigRational, m: i64) -> BigRational {
    if c.is_zero() {
        return BigRational::zero();
    }
    let w = v2q(c);
    if w >= m {
        return BigRational::zero();
    }
    let n = (m - w) as usize;
    let on = c.numer() >> c.numer().trailing_zeros().unwrap_or(0) as usize;
    let od = c.denom() >> c.denom().trailing_zeros().unwrap_or(0) as usize;
    let modulus = BigInt::one() << n;
    let inv = od.extended_gcd(&modulus).x.mod_floor(&modulus);
    let mut x = (on * inv).mod_floor(&modulus);
    if x > (&modulus >> 1usize) {
        x -= &modulus;
    }
    BigRational::from_integer(x) * pow2(w)
}

fn eq_normalize(lo: i64, mut digits: Vec<u32>) -> Repr {
    let first = digits.iter().position(|d| *d != 0);
    match first {
        None => Repr::Eq { lo: 0, digits: Vec::new() },
        Some(f) => {
            let last = digits.iter().rposition(|d| *d != 0).unwrap_or(f);
            digits.truncate(last + 1);
            digits.drain(..f);
            Repr::Eq { lo: lo + f as i64, digits }
        }
    }
}

fn mx_valuation(c: &[BigRational], e: usize, k: usize) -> Option<i64> {
    let mut best: Option<i64> = None;
    for (idx, x) in c.iter().enumerate() {
        if !x.is_zero() {
            let v = e as i64 * v2q(x) + (idx / k) as i64;
            best = Some(best.map_or(v, |b| b.min(v)));
        }
    }
    best
}

fn mx_truncate(c: &mut [BigRational], e: usize, k: usize, prec: i64) {
    for (idx, x) in c.iter_mut().enumerate() {
        if !x.is_zero() {
            let i = (idx / k) as i64;
            *x = reduce_dyadic(x, ceil_div(prec - i, e as i64));
        }
    }
}

fn mx_mul(md: &MixedData, k: usize, a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let e = md.e;
    let mut tmp = vec![vec![BigRational::zero(); 2 * k - 1]; 2 * e - 1];
    for (ia, ca) in a.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
        for (ib, cb) in b.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            tmp[ia / k + ib / k][ia % k + ib % k] += ca * cb;
        }
    }
    for row in tmp.iter_mut() {
        for d in (k..2 * k - 1).rev() {
            if row[d].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut row[d]);
            for t in 0..k {
                if md.modulus[t] != 0 {
                    row[d - k + t] -= &c;
                }
            }
        }
    }
    for n in (e..2 * e - 1).rev() {
        let row = std::mem::take(&mut tmp[n]);
        if row.iter().all(|c| c.is_zero()) {
            continue;
        }
        for t in 0..e {
            let et = md.eis.coeff(t);
            if et.is_zero() {
                continue;
            }
            let et = BigRational::from_integer(et);
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    tmp[n - e + t][j] -= &et * c;
                }
            }
        }
    }
    tmp.into_iter().take(e).flat_map(|r| r.into_iter().take(k)).collect()
}

/// Exact inverse by solving the multiplication-by-`b` linear system.
fn mx_inverse(md: &MixedData, k: usize, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = md.e * k;
    let mut m = vec![vec![BigRational::zero(); n + 1]; n];
    for c in 0..n {
        let mut basis = vec![BigRational::zero(); n];
        basis[c] = BigRational::one();
        for (r, v) in mx_mul(md, k, b, &basis).into_iter().enumerate() {
            m[r][c] = v;
        }
    }
    m[0][n] = BigRational::one();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let inv = m[col][col].recip();
        for x in m[col].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *x -= &f * p;
                    }
                }
            }
        }
    }
    Some(m.into_iter().map(|mut row| row.pop().unwrap_or_default()).collect())
}

impl Elem {
    fn new(ctx: &FieldCtx, repr: Repr, prec: Option<i64>) -> Elem {
        let mut e = Elem { ctx: ctx.clone(), repr, prec };
        if let Some(p) = prec {
            e.drop_beyond(p);
        }
        e
    }

    fn mk(k: usize) -> Vec<BigRational> {
        vec![BigRational::zero(); k]
    }

    fn dims(&self) -> (usize, usize) {
        let e = self.ctx.ram_index().unwrap_or(1) as usize;
        (e, self.ctx.residue_degree() as usize)
    }

    fn drop_beyond(&mut self, p: i64) {
        let (e, k) = self.dims();
        match &mut self.repr {
            Repr::Eq { lo, digits } => {
                let keep = (p - *lo).clamp(0, digits.len() as i64) as usize;
                digits.truncate(keep);
                self.repr = eq_normalize(*lo, std::mem::take(digits));
            }
            Repr::Mx(c) => mx_truncate(c, e, k, p),
        }
    }

    pub fn zero(ctx: &FieldCtx) -> Elem {
        match ctx.regime() {
            Regime::Equichar => Elem::new(ctx, Repr::Eq { lo: 0, digits: vec![] }, None),
            Regime::Mixed => {
                let n = (ctx.ram_index().unwrap_or(1) * ctx.residue_degree()) as usize;
                Elem::new(ctx, Repr::Mx(Elem::mk(n)), None)
            }
        }
    }

    pub fn one(ctx: &FieldCtx) -> Elem {
        Elem::from_int(ctx, 1)
    }

    /// Zero known only modulo `pi^prec`.
    pub fn big_o(ctx: &FieldCtx, prec: i64) -> Elem {
        let mut z = Elem::zero(ctx);
        z.prec = Some(prec);
        z
    }

    pub fn from_int(ctx: &FieldCtx, n: i64) -> Elem {
        Elem::from_bigint(ctx, &BigInt::from(n))
    }

    pub fn from_bigint(ctx: &FieldCtx, n: &BigInt) -> Elem {
        match ctx.regime() {
            Regime::Equichar => {
                let d = u32::from(n.bit(0));
                Elem::new(ctx, eq_normalize(0, vec![d]), None)
            }
            Regime::Mixed => {
                let mut z = Elem::zero(ctx);
                if let Repr::Mx(c) = &mut z.repr {
                    c[0] = BigRational::from_integer(n.clone());
                }
                z
            }
        }
    }

    /// Embeds a rational number; in equal characteristic its denominator must be odd.
    pub fn from_rational(ctx: &FieldCtx, q: &BigRational) -> Result<Elem> {
        match ctx.regime() {
            Regime::Equichar => {
                if !q.denom().bit(0) {
                    return Err(Error::DivisionByZero);
                }
                Ok(Elem::from_bigint(ctx, q.numer()))
            }
            Regime::Mixed => {
                let mut z = Elem::zero(ctx);
                if let Repr::Mx(c) = &mut z.repr {
                    c[0] = q.clone();
                }
                Ok(z)
            }
        }
    }

    /// The uniformizer `pi`.
    pub fn pi(ctx: &FieldCtx) -> Elem {
        match ctx.mixed_data() {
            None => Elem::new(ctx, Repr::Eq { lo: 1, digits: vec![1] }, None),
            Some(md) => {
                let k = ctx.residue_degree() as usize;
                let mut c = Elem::mk(md.e * k);
                if md.e == 1 {
                    c[0] = BigRational::from_integer(-md.eis.coeff(0));
                } else {
                    c[k] = BigRational::one();
                }
                Elem::new(ctx, Repr::Mx(c), None)
            }
        }
    }

    pub fn pi_pow(ctx: &FieldCtx, n: i64) -> Elem {
        Elem::one(ctx).mul_pi_pow(n)
    }

    /// The residue-field generator `g`, lifted.
    pub fn gen(ctx: &FieldCtx) -> Elem {
        Elem::from_residue(ctx, &ctx.residue().gen())
    }

    /// Lifts a residue class with 0/1 coefficients.
    pub fn from_residue(ctx: &FieldCtx, r: &ResElem) -> Elem {
        debug_assert_eq!(r.ctx(), *ctx.residue());
        match ctx.regime() {
            Regime::Equichar => Elem::new(ctx, eq_normalize(0, vec![r.bits()]), None),
            Regime::Mixed => {
                let mut z = Elem::zero(ctx);
                if let Repr::Mx(c) = &mut z.repr {
                    for (j, x) in c.iter_mut().enumerate().take(ctx.residue_degree() as usize) {
                        if r.bits() >> j & 1 == 1 {
                            *x = BigRational::one();
                        }
                    }
                }
                z
            }
        }
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    pub fn prec(&self) -> Option<i64> {
        self.prec
    }

    /// True for the exact zero.
    pub fn is_exact_zero(&self) -> bool {
        self.prec.is_none() && self.visible_valuation().is_none()
    }

    fn visible_valuation(&self) -> Option<i64> {
        let (e, k) = self.dims();
        match &self.repr {
            Repr::Eq { lo, digits } => (!digits.is_empty()).then_some(*lo),
            Repr::Mx(c) => mx_valuation(c, e, k),
        }
    }

    pub fn valuation(&self) -> Result<Valuation> {
        match (self.visible_valuation(), self.prec) {
            (Some(v), _) => Ok(Valuation::Finite(v)),
            (None, None) => Ok(Valuation::Infinite),
            (None, Some(_)) => Err(Error::PrecisionLoss),
        }
    }

    /// True when no nonzero digit is visible: exact zero, or zero to the known precision.
    pub fn is_zero_to_precision(&self) -> bool {
        self.visible_valuation().is_none()
    }

    /// Valuation if determined, otherwise the known lower bound.
    pub fn valuation_lower_bound(&self) -> Valuation {
        match (self.visible_valuation(), self.prec) {
            (Some(v), _) => Valuation::Finite(v),
            (None, None) => Valuation::Infinite,
            (None, Some(p)) => Valuation::Finite(p),
        }
    }

    /// Decides `v(self) >= n`, or reports that precision is insufficient.
    pub fn val_at_least(&self, n: i64) -> Result<bool> {
        match self.visible_valuation() {
            Some(v) => Ok(v >= n),
            None => match self.prec {
                None => Ok(true),
                Some(p) if p >= n => Ok(true),
                Some(_) => Err(Error::PrecisionLoss),
            },
        }
    }

    pub fn residue(&self) -> Result<ResElem> {
        let rctx = *self.ctx.residue();
        if let Some(v) = self.visible_valuation() {
            if v < 0 {
                return Err(Error::NegativeValuation);
            }
        }
        if self.prec.is_some_and(|p| p <= 0) {
            return Err(Error::PrecisionLoss);
        }
        match &self.repr {
            Repr::Eq { lo, digits } => Ok(if *lo == 0 && !digits.is_empty() { rctx.from_bits(digits[0]) } else { rctx.zero() }),
            Repr::Mx(c) => {
                let mut bits = 0u32;
                for (j, x) in c.iter().take(rctx.degree() as usize).enumerate() {
                    if !x.is_zero() && v2q(x) == 0 {
                        bits |= 1 << j;
                    }
                }
                Ok(rctx.from_bits(bits))
            }
        }
    }

    fn check(&self, other: &Elem) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::CtxMismatch);
        }
        Ok(())
    }

    fn combine_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    pub fn add(&self, other: &Elem) -> Result<Elem> {
        self.check(other)?;
        let prec = Elem::combine_prec(self.prec, other.prec);
        let repr = match (&self.repr, &other.repr) {
            (Repr::Eq { lo: la, digits: da }, Repr::Eq { lo: lb, digits: db }) => {
                if da.is_empty() {
                    other.repr.clone()
                } else if db.is_empty() {
                    self.repr.clone()
                } else {
                    let lo = (*la).min(*lb);
                    let hi = (la + da.len() as i64).max(lb + db.len() as i64);
                    let mut out = vec![0u32; (hi - lo) as usize];
                    for (i, d) in da.iter().enumerate() {
                        out[(la - lo) as usize + i] ^= d;
                    }
                    for (i, d) in db.iter().enumerate() {
                        out[(lb - lo) as usize + i] ^= d;
                    }
                    eq_normalize(lo, out)
                }
            }
            (Repr::Mx(a), Repr::Mx(b)) => Repr::Mx(a.iter().zip(b).map(|(x, y)| x + y).collect()),
            _ => return Err(Error::CtxMismatch),
        };
        Ok(Elem::new(&self.ctx, repr, prec))
    }

    pub fn neg(&self) -> Elem {
        match &self.repr {
            Repr::Eq { .. } => self.clone(),
            Repr::Mx(c) => Elem { ctx: self.ctx.clone(), repr: Repr::Mx(c.iter().map(|x| -x).collect()), prec: self.prec },
        }
    }

    pub fn sub(&self, other: &Elem) -> Result<Elem> {
        self.add(&other.neg())
    }

    fn mul_prec(&self, other: &Elem) -> Option<i64> {
        let bound = |p: Option<i64>, v: Valuation| match (p, v) {
            (Some(p), Valuation::Finite(v)) => Some(p + v),
            _ => None,
        };
        match (bound(self.prec, other.valuation_lower_bound()), bound(other.prec, self.valuation_lower_bound())) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    pub fn mul(&self, other: &Elem) -> Result<Elem> {
        self.check(other)?;
        if self.is_exact_zero() || other.is_exact_zero() {
            return Ok(Elem::zero(&self.ctx));
        }
        let prec = self.mul_prec(other);
        let k = self.ctx.residue_degree() as usize;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Eq { lo: la, digits: da }, Repr::Eq { lo: lb, digits: db }) => {
                if da.is_empty() || db.is_empty() {
                    Repr::Eq { lo: 0, digits: vec![] }
                } else {
                    let lo = la + lb;
                    let mut len = da.len() + db.len() - 1;
                    if let Some(p) = prec {
                        len = len.min((p - lo).max(0) as usize);
                    }
                    let mut acc = vec![0u64; len];
                    for (i, x) in da.iter().enumerate() {
                        if i >= len {
                            break;
                        }
                        for (j, y) in db.iter().enumerate().take(len - i) {
                            acc[i + j] ^= clmul(*x, *y);
                        }
                    }
                    let rctx = self.ctx.residue();
                    eq_normalize(lo, acc.into_iter().map(|v| reduce_wide(v, rctx)).collect())
                }
            }
            (Repr::Mx(a), Repr::Mx(b)) => {
                let md = self.ctx.mixed_data().ok_or(Error::CtxMismatch)?;
                Repr::Mx(mx_mul(md, k, a, b))
            }
            _ => return Err(Error::CtxMismatch),
        };
        Ok(Elem::new(&self.ctx, repr, prec))
    }

    pub fn square(&self) -> Elem {
        self.mul(self).expect("same context")
    }

    /// Multiplies by `pi^n`; exact.
    pub fn mul_pi_pow(&self, n: i64) -> Elem {
        match &self.repr {
            Repr::Eq { lo, digits } => {
                let repr = if digits.is_empty() { self.repr.clone() } else { Repr::Eq { lo: lo + n, digits: digits.clone() } };
                Elem { ctx: self.ctx.clone(), repr, prec: self.prec.map(|p| p + n) }
            }
            Repr::Mx(_) => {
                let md = self.ctx.mixed_data().expect("mixed context");
                let k = self.ctx.residue_degree() as usize;
                let step = if n >= 0 { Elem::pi(&self.ctx) } else { Elem::new(&self.ctx, Repr::Mx(md.pi_inv.clone()), None) };
                let mut factor = Elem::one(&self.ctx);
                let mut base = step;
                let mut m = n.unsigned_abs();
                while m > 0 {
                    if m & 1 == 1 {
                        factor = factor.mul(&base).expect("same context");
                    }
                    m >>= 1;
                    if m > 0 {
                        base = base.square();
                    }
                }
                let Repr::Mx(c) = &self.repr else { unreachable!() };
                let Repr::Mx(f) = &factor.repr else { unreachable!() };
                Elem::new(&self.ctx, Repr::Mx(mx_mul(md, k, c, f)), self.prec.map(|p| p + n))
            }
        }
    }

    /// Multiplicative inverse. Exact for exact mixed elements and for exact
    /// equal-characteristic monomials; otherwise truncated at relative
    /// precision `rel_prec`.
    pub fn inv(&self) -> Result<Elem> {
        let v = match self.valuation() {
            Ok(Valuation::Finite(v)) => v,
            Ok(Valuation::Infinite) => return Err(Error::DivisionByZero),
            Err(e) => return Err(e),
        };
        let mut rel = self.ctx.rel_prec();
        if let Some(p) = self.prec {
            rel = rel.min(p - v);
        }
        match &self.repr {
            Repr::Eq { digits, .. } => {
                let rctx = *self.ctx.residue();
                let u: Vec<ResElem> = digits.iter().map(|d| rctx.from_bits(*d)).collect();
                let u0inv = u[0].inv()?;
                if self.is_exact() && u.len() == 1 {
                    return Ok(Elem::new(&self.ctx, Repr::Eq { lo: -v, digits: vec![u0inv.bits()] }, None));
                }
                let n = rel.max(0) as usize;
                let mut w: Vec<ResElem> = Vec::with_capacity(n);
                for i in 0..n {
                    if i == 0 {
                        w.push(u0inv);
                        continue;
                    }
                    let mut s = rctx.zero();
                    for j in 1..=i.min(u.len() - 1) {
                        s = s.add(&u[j].mul_unchecked(&w[i - j]))?;
                    }
                    w.push(s.mul_unchecked(&u0inv));
                }
                let repr = eq_normalize(-v, w.into_iter().map(|x| x.bits()).collect());
                Ok(Elem::new(&self.ctx, repr, Some(-v + rel)))
            }
            Repr::Mx(c) => {
                let md = self.ctx.mixed_data().ok_or(Error::CtxMismatch)?;
                let k = self.ctx.residue_degree() as usize;
                let inv = mx_inverse(md, k, c).ok_or(Error::DivisionByZero)?;
                let prec = self.prec.map(|_| -v + rel);
                Ok(Elem::new(&self.ctx, Repr::Mx(inv), prec))
            }
        }
    }

    pub fn div(&self, other: &Elem) -> Result<Elem> {
        self.check(other)?;
        if other.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_exact_zero() {
            other.valuation()?;
            return Ok(Elem::zero(&self.ctx));
        }
        self.mul(&other.inv()?)
    }

    pub fn pow(&self, n: i64) -> Result<Elem> {
        let mut acc = Elem::one(&self.ctx);
        let mut base = self.clone();
        let mut m = n.unsigned_abs();
        while m > 0 {
            if m & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            m >>= 1;
            if m > 0 {
                base = base.square();
            }
        }
        if n < 0 {
            acc = acc.inv()?;
        }
        Ok(acc)
    }

    /// Forgets everything at or beyond `pi^p`.
    pub fn truncate(&self, p: i64) -> Elem {
        let prec = Some(self.prec.map_or(p, |q| q.min(p)));
        Elem::new(&self.ctx, self.repr.clone(), prec)
    }

    /// The visible digits as an exact element.
    pub fn approximation(&self) -> Elem {
        Elem { ctx: self.ctx.clone(), repr: self.repr.clone(), prec: None }
    }

    /// Residue digit of `pi^n` (equal characteristic only).
    pub fn digit(&self, n: i64) -> Option<ResElem> {
        match &self.repr {
            Repr::Eq { lo, digits } => {
                let rctx = *self.ctx.residue();
                let i = n - lo;
                Some(if i >= 0 && (i as usize) < digits.len() { rctx.from_bits(digits[i as usize]) } else { rctx.zero() })
            }
            Repr::Mx(_) => None,
        }
    }

    /// Coefficients on `pi^i g^j` at index `i * k + j` (mixed characteristic only).
    pub fn mixed_coeffs(&self) -> Option<&[BigRational]> {
        match &self.repr {
            Repr::Mx(c) => Some(c),
            Repr::Eq { .. } => None,
        }
    }

    /// Rational value when the element lies in `Q` (mixed) or `F_2` (equal characteristic).
    pub fn as_rational(&self) -> Option<BigRational> {
        if !self.is_exact() {
            return None;
        }
        match &self.repr {
            Repr::Mx(c) => c[1..].iter().all(|x| x.is_zero()).then(|| c[0].clone()),
            Repr::Eq { lo, digits } => match digits.as_slice() {
                [] => Some(BigRational::zero()),
                [1] if *lo == 0 => Some(BigRational::one()),
                _ => None,
            },
        }
    }

    /// Rough storage size, for guarding against runaway inputs.
    pub fn size(&self) -> usize {
        match &self.repr {
            Repr::Eq { digits, .. } => digits.len(),
            Repr::Mx(c) => c.iter().map(|x| (x.numer().bits() + x.denom().bits()) as usize).sum(),
        }
    }

    /// Square root of an element of even valuation.
    ///
    /// Equal characteristic: exact digit-wise root, `NoSquareRoot` when an
    /// odd-exponent digit is nonzero. Mixed: approximation `b` refined until
    /// `v(a - b^2) > 2 v(2)`, then Newton iteration; `ResidueFieldTooSmall`
    /// when the refinement at depth `2 v(2)` needs an Artin-Schreier root
    /// outside the current residue field. Exact square roots are returned
    /// exactly, with the sign making the first nonzero coefficient positive.
    pub fn unit_sqrt(&self) -> Result<Elem> {
        let v = match self.valuation()? {
            Valuation::Infinite => return Ok(self.clone()),
            Valuation::Finite(v) => v,
        };
        if v.rem_euclid(2) != 0 {
            return Err(Error::NoSquareRoot);
        }
        match &self.repr {
            Repr::Eq { lo, digits } => {
                let rctx = *self.ctx.residue();
                let mut out = Vec::with_capacity(digits.len() / 2 + 1);
                for (i, d) in digits.iter().enumerate() {
                    let exp = lo + i as i64;
                    if exp.rem_euclid(2) == 1 {
                        if *d != 0 {
                            return Err(Error::NoSquareRoot);
                        }
                    } else {
                        out.push(rctx.from_bits(*d).sqrt().bits());
                    }
                }
                let prec = self.prec.map(|p| ceil_div(p, 2));
                Ok(Elem::new(&self.ctx, eq_normalize(lo / 2, out), prec))
            }
            Repr::Mx(_) => {
                let h = v / 2;
                let unit = self.mul_pi_pow(-v);
                Ok(unit.mixed_unit_sqrt()?.mul_pi_pow(h))
            }
        }
    }

    fn mixed_unit_sqrt(&self) -> Result<Elem> {
        let ctx = &self.ctx;
        let e = ctx.ram_index().expect("mixed") as i64;
        let rctx = *ctx.residue();
        // Target absolute precision of the root.
        let mut target = ctx.rel_prec();
        if let Some(p) = self.prec {
            target = target.min(p - e);
        }
        let a = self;
        let mut b = Elem::from_residue(ctx, &a.residue()?.sqrt());
        let four = Elem::from_int(ctx, 4);
        for _ in 0..(4 * target.max(1) + 64) {
            let diff = a.sub(&b.square())?;
            if diff.is_exact_zero() {
                return Ok(canonical_sign(b));
            }
            let d = match diff.visible_valuation() {
                Some(d) => d,
                None => break,
            };
            if d >= target + e {
                break;
            }
            if d < 2 * e {
                if d % 2 == 1 {
                    return Err(Error::NoSquareRoot);
                }
                let c = diff.mul_pi_pow(-d).residue()?;
                let y = Elem::from_residue(ctx, &c.sqrt());
                b = b.add(&y.mul_pi_pow(d / 2))?;
            } else if d == 2 * e {
                let c = diff.div(&four.mul(&b.square())?)?.residue()?;
                match c.artin_schreier() {
                    AsRoot::Root(z) => {
                        let z = Elem::from_residue(ctx, &z);
                        b = b.mul(&Elem::one(ctx).add(&Elem::from_int(ctx, 2).mul(&z)?)?)?;
                    }
                    AsRoot::Unsolvable { required_degree } => {
                        return Err(Error::ResidueFieldTooSmall { current: rctx.degree(), required: required_degree });
                    }
                }
            } else {
                let two = Elem::from_int(ctx, 2);
                let next = b.add(&a.approximation().div(&b)?)?.div(&two)?;
                b = next.truncate(target + e).approximation();
            }
        }
        let root = b.truncate(target);
        if self.is_exact() {
            let t = root.approximation();
            for cand in [t.clone(), t.neg()] {
                if cand.square() == *self {
                    return Ok(canonical_sign(cand));
                }
            }
        }
        let check = a.sub(&root.square())?;
        if !check.val_at_least(target.min(a.prec.unwrap_or(i64::MAX)))? {
            return Err(Error::Internal("square root refinement did not converge".into()));
        }
        Ok(root)
    }

    pub fn parse(ctx: &FieldCtx, text: &str) -> Result<Elem> {
        Elem::parse_with_gen(ctx, text, &Elem::gen(ctx))
    }

    /// Parses with `g` bound to the given element rather than the generator.
    pub fn parse_with_gen(ctx: &FieldCtx, text: &str, g: &Elem) -> Result<Elem> {
        let expr = parse_expr(text)?;
        eval(&expr, &ElemTarget { ctx, g })
    }
}

fn canonical_sign(b: Elem) -> Elem {
    if let Repr::Mx(c) = &b.repr {
        if let Some(first) = c.iter().find(|x| !x.is_zero()) {
            if first.is_negative() {
                return b.neg();
            }
        }
    }
    b
}

fn reduce_wide(v: u64, ctx: &ResCtx) -> u32 {
    ctx.reduce_u64(v)
}

pub(crate) struct ElemTarget<'a> {
    pub ctx: &'a FieldCtx,
    pub g: &'a Elem,
}

impl EvalTarget for ElemTarget<'_> {
    type Value = Elem;

    fn int(&self, n: &BigInt) -> Result<Elem> {
        Ok(Elem::from_bigint(self.ctx, n))
    }
    fn symbol(&self, name: &str, pos: usize) -> Result<Elem> {
        match name {
            "pi" => Ok(Elem::pi(self.ctx)),
            "g" => Ok(self.g.clone()),
            _ => Err(ParseError::new(pos, format!("unknown symbol '{name}'")).into()),
        }
    }
    fn add(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        a.add(b)
    }
    fn sub(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        a.sub(b)
    }
    fn mul(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        a.mul(b)
    }
    fn div(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        a.div(b)
    }
    fn neg(&self, a: &Elem) -> Result<Elem> {
        Ok(a.neg())
    }
    fn one(&self) -> Elem {
        Elem::one(self.ctx)
    }
    fn size(&self, a: &Elem) -> usize {
        let span = match &a.repr {
            Repr::Eq { lo, digits } => (lo.unsigned_abs() as usize).saturating_add(digits.len()),
            Repr::Mx(_) => 0,
        };
        a.size().max(span)
    }
    fn big_o(&self, arg: &Elem, pos: usize) -> Result<Elem> {
        match arg.valuation()? {
            Valuation::Finite(p) => Ok(Elem::big_o(self.ctx, p)),
            Valuation::Infinite => Err(ParseError::new(pos, "O(0) is meaningless").into()),
        }
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(bool, String)> = Vec::new();
        match &self.repr {
            Repr::Eq { lo, digits } => {
                let rctx = *self.ctx.residue();
                for (i, d) in digits.iter().enumerate() {
                    if *d == 0 {
                        continue;
                    }
                    let n = lo + i as i64;
                    let r = rctx.from_bits(*d);
                    let mono = pi_mono(n);
                    let s = match (r.is_one(), mono.is_empty()) {
                        (true, true) => "1".to_string(),
                        (true, false) => mono,
                        (false, true) => r.to_string(),
                        (false, false) if r.is_compound() => format!("({r})*{mono}"),
                        (false, false) => format!("{r}*{mono}"),
                    };
                    parts.push((false, s));
                }
            }
            Repr::Mx(c) => {
                let k = self.ctx.residue_degree() as usize;
                for (idx, x) in c.iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let (i, j) = (idx / k, idx % k);
                    let mut mono = Vec::new();
                    let pm = pi_mono(i as i64);
                    if !pm.is_empty() {
                        mono.push(pm);
                    }
                    match j {
                        0 => {}
                        1 => mono.push("g".into()),
                        _ => mono.push(format!("g^{j}")),
                    }
                    let mag = x.abs();
                    let mut s = String::new();
                    if !(mag.is_one() && !mono.is_empty()) {
                        s.push_str(&mag.to_string());
                        if !mono.is_empty() {
                            s.push('*');
                        }
                    }
                    s.push_str(&mono.join("*"));
                    parts.push((x.is_negative(), s));
                }
            }
        }
        if let Some(p) = self.prec {
            parts.push((false, format!("O(pi^{p})")));
        }
        if parts.is_empty() {
            return f.write_str("0");
        }
        for (n, (neg, s)) in parts.iter().enumerate() {
            match (n, neg) {
                (0, true) => write!(f, "-{s}")?,
                (0, false) => f.write_str(s)?,
                (_, true) => write!(f, "-{s}")?,
                (_, false) => write!(f, "+{s}")?,
            }
        }
        Ok(())
    }
}

fn pi_mono(n: i64) -> String {
    match n {
        0 => String::new(),
        1 => "pi".into(),
        _ => format!("pi^{n}"),
    }
}

impl fmt::Debug for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Elem({self})")
    }
}

/// The image of the old residue generator inside a larger residue field,
/// lifted (Hensel-lifted in mixed characteristic) into `new_ctx`.
pub fn embed_generator(new_ctx: &FieldCtx, old: &ResCtx) -> Result<Elem> {
    let rnew = *new_ctx.residue();
    if !rnew.degree().is_multiple_of(old.degree()) {
        return Err(Error::Internal(format!("F_2^{} does not contain F_2^{}", rnew.degree(), old.degree())));
    }
    let m = old.modulus();
    let kold = old.degree();
    let eval_res = |x: &ResElem| {
        let mut acc = rnew.zero();
        for i in (0..=kold).rev() {
            acc = acc.mul_unchecked(x);
            if m >> i & 1 == 1 {
                acc = acc.add(&rnew.one()).expect("same field");
            }
        }
        acc
    };
    let root = rnew.elements().find(|x| eval_res(x).is_zero()).ok_or_else(|| Error::Internal("no root of the old modulus".into()))?;
    let mut x = Elem::from_residue(new_ctx, &root);
    if new_ctx.regime() == Regime::Equichar {
        return Ok(x);
    }
    // Newton on the lifted modulus m(X) with integer 0/1 coefficients.
    let target = new_ctx.rel_prec();
    let poly = |x: &Elem| -> Result<(Elem, Elem)> {
        let mut f = Elem::zero(new_ctx);
        let mut df = Elem::zero(new_ctx);
        for i in (0..=kold).rev() {
            df = df.mul(x)?.add(&f)?;
            f = f.mul(x)?;
            if m >> i & 1 == 1 {
                f = f.add(&Elem::one(new_ctx))?;
            }
        }
        Ok((f, df))
    };
    for _ in 0..64 {
        let (f, df) = poly(&x)?;
        if f.val_at_least(target)? {
            return Ok(x.truncate(target));
        }
        x = x.sub(&f.div(&df)?)?.truncate(target).approximation();
    }
    Err(Error::Internal("generator embedding did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_field;

    fn eq(k: u32) -> FieldCtx {
        FieldCtx::equichar(k, 64).unwrap()
    }

    fn mx(eis: &str) -> FieldCtx {
        parse_field(&format!("mixed(k=1,eis=\"{eis}\")")).unwrap()
    }

    fn p(ctx: &FieldCtx, s: &str) -> Elem {
        Elem::parse(ctx, s).unwrap()
    }

    #[test]
    fn valuation_order() {
        assert!(Valuation::Infinite > Valuation::Finite(1 << 40));
        assert_eq!(Valuation::Finite(2) + Valuation::Infinite, Valuation::Infinite);
        assert_eq!("inf".parse::<Valuation>().unwrap(), Valuation::Infinite);
        assert_eq!(serde_json::to_string(&Valuation::Infinite).unwrap(), "\"inf\"");
        assert_eq!(serde_json::from_str::<Valuation>("12").unwrap(), Valuation::Finite(12));
    }

    #[test]
    fn equichar_basics() {
        let f = eq(1);
        let pi = Elem::pi(&f);
        let prod = pi.mul(&pi.inv().unwrap()).unwrap();
        assert_eq!(prod, Elem::one(&f));
        assert!(prod.is_exact());
        assert_eq!(p(&f, "pi^3+pi^5").valuation().unwrap(), Valuation::Finite(3));
        assert_eq!(Elem::zero(&f).valuation().unwrap(), Valuation::Infinite);
        assert_eq!(p(&f, "pi^-3").valuation().unwrap(), Valuation::Finite(-3));
        assert!(p(&f, "1+pi").residue().unwrap().is_one());
        assert!(Elem::pi(&f).residue().unwrap().is_zero());
        let f4 = eq(2);
        let x = p(&f4, "g*pi");
        assert_eq!(x.valuation().unwrap(), Valuation::Finite(1));
        assert_eq!(x.digit(1).unwrap(), f4.residue().gen());
        assert_eq!(p(&f, "2"), Elem::zero(&f));
    }

    #[test]
    fn mixed_basics() {
        let f = mx("z^2-2");
        let pi = Elem::pi(&f);
        let sq = pi.square();
        assert_eq!(sq, Elem::from_int(&f, 2));
        assert!(sq.is_exact());
        assert_eq!(sq.valuation().unwrap(), Valuation::Finite(2));
        assert!(p(&f, "3").residue().unwrap().is_one());

        let f3 = mx("z^3-2");
        let cube = p(&f3, "(pi+1)^3");
        // pi^3 + 3pi^2 + 3pi + 1 with pi^3 = 2
        assert_eq!(cube, p(&f3, "3*pi^2+3*pi+3"));
        assert_eq!(cube.valuation().unwrap(), Valuation::Finite(0));
        assert_eq!(p(&f3, "2").valuation().unwrap(), Valuation::Finite(3));
        assert_eq!(p(&f3, "2+3*pi").valuation().unwrap(), Valuation::Finite(1));
        assert_eq!(p(&f3, "pi").valuation().unwrap(), Valuation::Finite(1));
        let third = p(&f3, "1/3");
        assert_eq!(third.valuation().unwrap(), Valuation::Finite(0));
        assert_eq!(p(&f3, "1/(1+pi)").mul(&p(&f3, "1+pi")).unwrap(), Elem::one(&f3));
    }

    #[test]
    fn unramified_tower_pi_is_two() {
        let f = mx("z-2");
        assert_eq!(Elem::pi(&f), Elem::from_int(&f, 2));
        assert_eq!(p(&f, "pi^-1*4"), Elem::from_int(&f, 2));
    }

    #[test]
    fn negative_residue_and_loss() {
        let f = eq(1);
        assert_eq!(p(&f, "pi^-1").residue(), Err(Error::NegativeValuation));
        let z = Elem::big_o(&f, 5);
        assert_eq!(z.valuation(), Err(Error::PrecisionLoss));
        assert_eq!(z.val_at_least(3), Ok(true));
        assert_eq!(z.val_at_least(7), Err(Error::PrecisionLoss));
        let m = mx("z^2-2");
        assert_eq!(Elem::big_o(&m, 3).valuation(), Err(Error::PrecisionLoss));
    }

    #[test]
    fn precision_propagation() {
        let f = eq(1);
        let a = p(&f, "1+pi+O(pi^10)");
        let b = p(&f, "pi^2");
        let c = a.mul(&b).unwrap();
        assert_eq!(c.prec(), Some(12));
        let d = a.add(&p(&f, "pi^20")).unwrap();
        assert_eq!(d.prec(), Some(10));
        assert_eq!(d, a);
        let inv = p(&f, "1+pi").inv().unwrap();
        assert_eq!(inv.prec(), Some(64));
        assert_eq!(inv.mul(&p(&f, "1+pi")).unwrap().truncate(64), Elem::one(&f).truncate(64));
    }

    #[test]
    fn unit_sqrt_examples() {
        let f = eq(1);
        assert_eq!(p(&f, "1+pi^2").unit_sqrt().unwrap(), p(&f, "1+pi"));
        assert_eq!(p(&f, "1").unit_sqrt().unwrap(), p(&f, "1"));
        assert_eq!(p(&f, "1+pi").unit_sqrt(), Err(Error::NoSquareRoot));
        let q = mx("z-2");
        let r = p(&q, "9").unit_sqrt().unwrap();
        assert_eq!(r, p(&q, "3"));
        assert!(r.is_exact());
        assert_eq!(p(&q, "3").unit_sqrt(), Err(Error::NoSquareRoot));
        // 17 = square in Z_2 with no rational root
        let s = p(&q, "17").unit_sqrt().unwrap();
        assert!(!s.is_exact());
        assert!(p(&q, "17").sub(&s.square()).unwrap().val_at_least(60).unwrap());
        // 5 needs an Artin-Schreier root of 1 over F_2
        assert_eq!(p(&q, "5").unit_sqrt(), Err(Error::ResidueFieldTooSmall { current: 1, required: 2 }));
        let q4 = parse_field("mixed(k=2,eis=\"z-2\")").unwrap();
        let s5 = p(&q4, "5").unit_sqrt().unwrap();
        assert!(p(&q4, "5").sub(&s5.square()).unwrap().val_at_least(60).unwrap());
        let r2 = mx("z^2-2");
        let root = p(&r2, "1+pi^2*3").unit_sqrt();
        // 1 + 3 pi^2 = 7: not a square in Q_2(sqrt 2)? v(7 - 1) = v(6) = 2 = even -> refine
        match root {
            Ok(x) => assert!(p(&r2, "7").sub(&x.square()).unwrap().val_at_least(100).unwrap()),
            Err(e) => assert!(matches!(e, Error::NoSquareRoot | Error::ResidueFieldTooSmall { .. })),
        }
    }

    #[test]
    fn display_round_trip() {
        let f = eq(2);
        for s in ["0", "1", "g", "g+1", "(g+1)*pi^-2+g*pi+1", "pi^3", "g*pi^2+O(pi^5)", "O(pi^-1)"] {
            let x = p(&f, s);
            assert_eq!(p(&f, &x.to_string()), x, "{s}");
        }
        assert_eq!(p(&f, "(g+1)*pi^-2+g*pi+1").to_string(), "(g+1)*pi^-2+1+g*pi");
        let m = parse_field("mixed(k=2,eis=\"z^3-2\")").unwrap();
        for s in ["0", "-3", "1/3*pi", "-pi^2*g+7/5", "pi^-1", "g^2"] {
            let x = p(&m, s);
            assert_eq!(p(&m, &x.to_string()), x, "{s}");
        }
        assert_eq!(p(&m, "pi^-1").to_string(), "1/2*pi^2");
    }

    #[test]
    fn exhaustive_residue_reduction_matches_bits() {
        let f = eq(2);
        for r in f.residue().elements() {
            let x = Elem::from_residue(&f, &r).add(&Elem::pi(&f)).unwrap();
            assert_eq!(x.residue().unwrap(), r);
        }
    }

    #[test]
    fn generator_embedding() {
        let old = *eq(2).residue();
        let new = eq(4);
        let g = embed_generator(&new, &old).unwrap();
        // g^2 + g + 1 = 0
        let val = g.square().add(&g).unwrap().add(&Elem::one(&new)).unwrap();
        assert!(val.is_exact_zero());
        let m = parse_field("mixed(k=4,eis=\"z^2-2\")").unwrap();
        let g = embed_generator(&m, &old).unwrap();
        let val = g.square().add(&g).unwrap().add(&Elem::one(&m)).unwrap();
        assert!(val.val_at_least(100).unwrap());
    }
}
