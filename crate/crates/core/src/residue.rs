//! Arithmetic in the residue field F_{2^k}.
//!
//! Elements are bit vectors in the polynomial basis `1, g, ..., g^(k-1)`
//! where `g` is a root of a fixed irreducible modulus. Bit `i` of the
//! vector is the coefficient of `g^i`. The algebraically closed residue
//! field of the theory is approximated by these finite fields; callers
//! that need a root the current field lacks get [`AsRoot::Unsolvable`]
//! and restart in the degree-`2k` field.

use std::fmt;

use crate::error::{Error, ParseError, Result};

/// Fixed moduli, one per supported degree. Bit `i` is the coefficient of `x^i`.
const MODULI: [(u32, u32); 8] = [
    (1, 0b11),       // x + 1
    (2, 0b111),      // x^2 + x + 1
    (3, 0b1011),     // x^3 + x + 1
    (4, 0b1_0011),   // x^4 + x + 1
    (6, 0b101_1011), // x^6 + x^4 + x^3 + x + 1
    (8, 0x11d),      // x^8 + x^4 + x^3 + x^2 + 1
    (12, 0x10eb),    // x^12 + x^7 + x^6 + x^5 + x^3 + x + 1
    (16, 0x1_002d),  // x^16 + x^5 + x^3 + x^2 + 1
];

/// Degrees with a shipped modulus.
pub const SUPPORTED_DEGREES: [u32; 8] = [1, 2, 3, 4, 6, 8, 12, 16];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ResCtx {
    degree: u32,
    modulus: u32,
}

impl ResCtx {
    pub fn new(degree: u32) -> Result<Self> {
        MODULI
            .iter()
            .find(|(k, _)| *k == degree)
            .map(|&(degree, modulus)| ResCtx { degree, modulus })
            .ok_or(Error::UnsupportedDegree(degree))
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// The modulus as a bit mask including the leading `x^k` bit.
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// Context of degree `2k`, if shipped.
    pub fn doubled(&self) -> Result<Self> {
        ResCtx::new(self.degree * 2)
    }

    pub fn size(&self) -> u64 {
        1u64 << self.degree
    }

    pub fn zero(&self) -> ResElem {
        ResElem { ctx: *self, bits: 0 }
    }

    pub fn one(&self) -> ResElem {
        ResElem { ctx: *self, bits: 1 }
    }

    /// The generator `g`, i.e. the class of `x` modulo the modulus.
    pub fn gen(&self) -> ResElem {
        ResElem { ctx: *self, bits: reduce_bits(0b10, self) }
    }

    pub fn from_bits(&self, bits: u32) -> ResElem {
        ResElem { ctx: *self, bits: reduce_bits(bits as u64, self) }
    }

    pub fn from_int(&self, n: i64) -> ResElem {
        if n.rem_euclid(2) == 1 {
            self.one()
        } else {
            self.zero()
        }
    }

    /// Every element, in increasing bit order. Only sensible for small `k`.
    pub fn elements(&self) -> impl Iterator<Item = ResElem> + '_ {
        (0..self.size()).map(move |b| ResElem { ctx: *self, bits: b as u32 })
    }

    pub(crate) fn reduce_u64(&self, v: u64) -> u32 {
        reduce_bits(v, self)
    }

    pub fn parse(&self, text: &str) -> Result<ResElem> {
        let expr = crate::expr::parse_expr(text)?;
        crate::expr::eval_residue(&expr, self)
    }
}

/// Reduces a carry-less product modulo the context modulus.
fn reduce_bits(mut v: u64, ctx: &ResCtx) -> u32 {
    let k = ctx.degree;
    let m = ctx.modulus as u64;
    for i in (k..64).rev() {
        if v >> i & 1 == 1 {
            v ^= m << (i - k);
        }
    }
    v as u32
}

pub(crate) fn clmul(a: u32, b: u32) -> u64 {
    let mut acc = 0u64;
    let a = a as u64;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ResElem {
    ctx: ResCtx,
    bits: u32,
}

/// Result of solving `z^2 + z = c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AsRoot {
    Root(ResElem),
    /// No root in the current field; one exists in the field of this degree.
    Unsolvable {
        required_degree: u32,
    },
}

impl ResElem {
    pub fn ctx(&self) -> ResCtx {
        self.ctx
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn is_one(&self) -> bool {
        self.bits == 1
    }

    fn check(&self, other: &ResElem) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::CtxMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &ResElem) -> Result<ResElem> {
        self.check(other)?;
        Ok(ResElem { ctx: self.ctx, bits: self.bits ^ other.bits })
    }

    pub fn mul(&self, other: &ResElem) -> Result<ResElem> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &ResElem) -> ResElem {
        ResElem { ctx: self.ctx, bits: reduce_bits(clmul(self.bits, other.bits), &self.ctx) }
    }

    pub fn square(&self) -> ResElem {
        self.mul_unchecked(self)
    }

    pub fn pow(&self, mut e: u64) -> ResElem {
        let mut base = *self;
        let mut acc = self.ctx.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            base = base.square();
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, `a^(2^k - 2)`.
    pub fn inv(&self) -> Result<ResElem> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(self.ctx.size() - 2))
    }

    pub fn div(&self, other: &ResElem) -> Result<ResElem> {
        self.check(other)?;
        Ok(self.mul_unchecked(&other.inv()?))
    }

    /// The unique square root, `a^(2^(k-1))`.
    pub fn sqrt(&self) -> ResElem {
        let mut x = *self;
        for _ in 1..self.ctx.degree {
            x = x.square();
        }
        x
    }

    /// Absolute trace to F_2.
    pub fn trace(&self) -> bool {
        let mut acc = 0u32;
        let mut x = *self;
        for _ in 0..self.ctx.degree {
            acc ^= x.bits;
            x = x.square();
        }
        debug_assert!(acc <= 1);
        acc == 1
    }

    /// Solves `z^2 + z = self`, returning the root whose constant bit is clear.
    pub fn artin_schreier(&self) -> AsRoot {
        if self.trace() {
            return AsRoot::Unsolvable { required_degree: 2 * self.ctx.degree };
        }
        let k = self.ctx.degree as usize;
        // Columns of the F_2-linear map z -> z^2 + z on the basis g^i.
        let cols: Vec<u32> = (0..k)
            .map(|i| {
                let b = self.ctx.from_bits(1 << i);
                b.square().bits ^ b.bits
            })
            .collect();
        // Row-reduce the augmented system; unknowns are the bits of z.
        let mut rows: Vec<(u32, bool)> = (0..k)
            .map(|r| {
                let mut row = 0u32;
                for (c, col) in cols.iter().enumerate() {
                    if col >> r & 1 == 1 {
                        row |= 1 << c;
                    }
                }
                (row, self.bits >> r & 1 == 1)
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        // Column 0 is the kernel direction (z -> z + 1), so pivot it last.
        let order: Vec<usize> = (1..k).chain(std::iter::once(0)).collect();
        for &c in &order {
            if let Some(p) = (rank..k).find(|&r| rows[r].0 >> c & 1 == 1) {
                rows.swap(rank, p);
                let pivot = rows[rank];
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank && row.0 >> c & 1 == 1 {
                        row.0 ^= pivot.0;
                        row.1 ^= pivot.1;
                    }
                }
                pivots.push(c);
                rank += 1;
            }
        }
        let mut z = 0u32;
        for (r, &c) in pivots.iter().enumerate() {
            if rows[r].1 {
                z |= 1 << c;
            }
        }
        let root = self.ctx.from_bits(z & !1);
        let root = if root.square().add(&root).ok() == Some(*self) { root } else { self.ctx.from_bits(z | 1) };
        debug_assert_eq!(root.square().bits ^ root.bits, self.bits);
        AsRoot::Root(root)
    }

    pub(crate) fn format_with(&self, symbol: &str) -> String {
        if self.bits == 0 {
            return "0".to_string();
        }
        let mut terms = Vec::new();
        for i in (0..self.ctx.degree).rev() {
            if self.bits >> i & 1 == 1 {
                terms.push(match i {
                    0 => "1".to_string(),
                    1 => symbol.to_string(),
                    _ => format!("{symbol}^{i}"),
                });
            }
        }
        terms.join("+")
    }

    /// True when printing needs parentheses to be used as a factor.
    pub(crate) fn is_compound(&self) -> bool {
        self.bits.count_ones() > 1
    }
}

impl fmt::Display for ResElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_with("g"))
    }
}

impl std::str::FromStr for ResCtx {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        let k: u32 = s.trim().parse().map_err(|_| ParseError::new(0, "expected a degree"))?;
        ResCtx::new(k).map_err(|e| ParseError::new(0, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f4() -> ResCtx {
        ResCtx::new(2).unwrap()
    }

    /// Exhaustive trial division by every polynomial of degree 1..=k/2.
    fn is_irreducible(modulus: u32, k: u32) -> bool {
        for d in 1..=k / 2 {
            for low in 0u32..(1 << d) {
                let divisor = (1u32 << d) | low;
                let mut rem = modulus as u64;
                for i in (d..=k).rev() {
                    if rem >> i & 1 == 1 {
                        rem ^= (divisor as u64) << (i - d);
                    }
                }
                if rem == 0 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn shipped_moduli_are_irreducible() {
        for (k, m) in MODULI {
            assert_eq!(m >> k, 1, "degree {k} modulus not monic of degree k");
            assert!(is_irreducible(m, k), "degree {k} modulus reducible");
        }
    }

    #[test]
    fn f2_and_f4_small_cases() {
        let f2 = ResCtx::new(1).unwrap();
        assert!(f2.one().add(&f2.one()).unwrap().is_zero());
        let c = f4();
        let g = c.gen();
        assert!(g.add(&g).unwrap().is_zero());
        // g + 1 = g^2 since g^2 = g + 1
        assert_eq!(g.add(&c.one()).unwrap(), g.square());
        assert_eq!(g.mul(&g).unwrap(), g.add(&c.one()).unwrap());
        assert_eq!(g.inv().unwrap(), g.add(&c.one()).unwrap());
        assert_eq!(c.one().inv().unwrap(), c.one());
        assert_eq!(g.sqrt(), g.square());
        assert_eq!(c.zero().sqrt(), c.zero());
        assert_eq!(f2.one().sqrt(), f2.one());
    }

    #[test]
    fn inverse_matches_exhaustive_search() {
        let c = f4();
        let g = c.gen();
        let found: Vec<_> = c.elements().filter(|x| g.mul(x).unwrap().is_one()).collect();
        assert_eq!(found, vec![g.inv().unwrap()]);
    }

    #[test]
    fn artin_schreier_cases() {
        let f2 = ResCtx::new(1).unwrap();
        assert_eq!(f2.one().artin_schreier(), AsRoot::Unsolvable { required_degree: 2 });
        assert_eq!(f2.zero().artin_schreier(), AsRoot::Root(f2.zero()));
        let c = f4();
        assert_eq!(c.one().artin_schreier(), AsRoot::Root(c.gen()));
    }

    #[test]
    fn exhaustive_small_fields() {
        for k in [1, 2, 3, 4] {
            let c = ResCtx::new(k).unwrap();
            let mut squares = std::collections::HashSet::new();
            for a in c.elements() {
                assert_eq!(a.sqrt().square(), a);
                squares.insert(a.square());
                if !a.is_zero() {
                    assert!(a.mul(&a.inv().unwrap()).unwrap().is_one());
                }
                let brute: Vec<_> = c.elements().filter(|z| z.square().add(z).unwrap() == a).collect();
                match a.artin_schreier() {
                    AsRoot::Root(z) => {
                        assert_eq!(brute.len(), 2);
                        assert_eq!(z, brute[0]);
                        let z1 = z.add(&c.one()).unwrap();
                        assert_eq!(z1.square().add(&z1).unwrap(), a);
                    }
                    AsRoot::Unsolvable { required_degree } => {
                        assert!(brute.is_empty());
                        assert_eq!(required_degree, 2 * k);
                    }
                }
            }
            assert_eq!(squares.len() as u64, c.size(), "Frobenius not bijective for k={k}");
        }
    }

    #[test]
    fn large_degree_field_axioms() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for k in [6, 8, 12, 16] {
            let c = ResCtx::new(k).unwrap();
            for _ in 0..200 {
                let a = c.from_bits(rng.gen());
                let b = c.from_bits(rng.gen());
                assert_eq!(a.sqrt().square(), a);
                if !a.is_zero() {
                    assert!(a.mul(&a.inv().unwrap()).unwrap().is_one());
                }
                let lhs = a.add(&b).unwrap().square();
                let rhs = a.square().add(&b.square()).unwrap();
                assert_eq!(lhs, rhs);
                if let AsRoot::Root(z) = a.artin_schreier() {
                    assert_eq!(z.square().add(&z).unwrap(), a);
                    assert!(!a.trace());
                } else {
                    assert!(a.trace());
                }
            }
        }
    }

    #[test]
    fn ctx_mismatch_is_an_error() {
        let a = ResCtx::new(2).unwrap().one();
        let b = ResCtx::new(4).unwrap().one();
        assert_eq!(a.add(&b), Err(Error::CtxMismatch));
        assert_eq!(a.mul(&b), Err(Error::CtxMismatch));
    }

    #[test]
    fn display_and_parse() {
        let c = ResCtx::new(4).unwrap();
        let x = c.parse("g^3+g+1").unwrap();
        assert_eq!(x.to_string(), "g^3+g+1");
        assert_eq!(c.parse(&x.to_string()).unwrap(), x);
        assert_eq!(c.parse("g^4").unwrap(), c.parse("g+1").unwrap());
        assert!(c.parse("pi").is_err());
        assert_eq!(f4().parse("g + 1").unwrap().to_string(), "g+1");
    }
}
