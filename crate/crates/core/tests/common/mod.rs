#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;

use wildtate::isogeny::PHI2_TERMS;
use wildtate::{tate, Elem, FieldCtx, ResCtx, WeierstrassEq};

/// Integer polynomial in a fixed number of variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, BigInt>,
}

impl Poly {
    pub fn constant(nvars: usize, c: i64) -> Poly {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(vec![0; nvars], BigInt::from(c));
        }
        Poly { nvars, terms }
    }

    pub fn var(nvars: usize, i: usize) -> Poly {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Poly { nvars, terms: BTreeMap::from([(e, BigInt::one())]) }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (e, c) in &o.terms {
            let slot = terms.entry(e.clone()).or_insert_with(BigInt::zero);
            *slot += c;
            if slot.is_zero() {
                terms.remove(e);
            }
        }
        Poly { nvars: self.nvars, terms }
    }

    pub fn scale(&self, c: i64) -> Poly {
        self.mul(&Poly::constant(self.nvars, c))
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(-1))
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::constant(self.nvars, 0);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                let mut single = BTreeMap::new();
                single.insert(e, c1 * c2);
                out = out.add(&Poly { nvars: self.nvars, terms: single });
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        (0..n).fold(Poly::constant(self.nvars, 1), |acc, _| acc.mul(self))
    }

    /// Exact division by variable `i`; `None` if some term lacks it.
    pub fn div_var(&self, i: usize) -> Option<Poly> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                return None;
            }
            let mut e = e.clone();
            e[i] -= 1;
            terms.insert(e, c.clone());
        }
        Some(Poly { nvars: self.nvars, terms })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `t^6 Phi_2((t+16)^3/t, (t+256)^3/t^2)` as a polynomial in `t`.
pub fn cleared_parametrization() -> Poly {
    let t = Poly::var(1, 0);
    let xn = t.add(&Poly::constant(1, 16)).pow(3);
    let yn = t.add(&Poly::constant(1, 256)).pow(3);
    PHI2_TERMS.iter().fold(Poly::constant(1, 0), |acc, &(i, j, c)| acc.add(&xn.pow(i).mul(&yn.pow(j)).mul(&t.pow(6 - i - 2 * j)).scale(c)))
}

/// Checks the linear-in-`t` combination that eliminates the cubic terms of
/// the parametrization, and the resultant of its two coefficients.
pub fn check_elimination_identities() -> Result<(), String> {
    // variables: t, j1, j2
    let (t, j1, j2) = (Poly::var(3, 0), Poly::var(3, 1), Poly::var(3, 2));
    let c = |n: i64| Poly::constant(3, n);
    let alpha = t.add(&c(256)).pow(3).sub(&j1.mul(&t.pow(2)));
    let beta = t.add(&c(16)).pow(3).sub(&j2.mul(&t));
    let quotient = alpha.sub(&beta.scale(4096)).div_var(0).ok_or("alpha - 4096 beta is not divisible by t")?;
    let lhs = alpha.sub(&beta).scale(4095).add(&c(720).sub(&j1).mul(&quotient));
    let p = j1.pow(2).add(&j1.scale(195120)).add(&j2.scale(4095)).add(&c(660_960_000));
    let q = j1.mul(&j2).scale(-4096).add(&j1.scale(2_949_120)).add(&j2.scale(2_949_120)).add(&c(66_562_560_000));
    if !lhs.sub(&p.mul(&t).add(&q)).is_zero() {
        return Err("linear combination differs from the displayed polynomial".into());
    }
    // eliminate j2 from p = a j2 + b, q = c j2 + d: a d - b c
    let a = c(4095);
    let b = j1.pow(2).add(&j1.scale(195120)).add(&c(660_960_000));
    let cc = j1.scale(-4096).add(&c(2_949_120));
    let d = j1.scale(2_949_120).add(&c(66_562_560_000));
    let res = a.mul(&d).sub(&b.mul(&cc));
    let factored = j1.add(&c(3375)).mul(&j1.pow(2).add(&j1.scale(191025)).add(&c(-121_287_375))).scale(4096);
    if !res.sub(&factored).is_zero() {
        return Err("resultant does not factor as expected".into());
    }
    Ok(())
}

/// `c0 + c1 pi + .. ` with small coefficients, times `g^m` for a residue generator.
pub fn random_elem(ctx: &FieldCtx, rng: &mut impl Rng, lo: i64, terms: usize) -> Elem {
    let g = Elem::gen(ctx);
    let mut acc = Elem::zero(ctx);
    for i in 0..terms {
        let c = Elem::from_int(ctx, rng.gen_range(-3..=3));
        let c = c.mul(&g.pow(rng.gen_range(0..3)).unwrap()).unwrap();
        acc = acc.add(&c.mul_pi_pow(lo + i as i64)).unwrap();
    }
    acc
}

pub fn random_unit(ctx: &FieldCtx, rng: &mut impl Rng) -> Elem {
    loop {
        let e = random_elem(ctx, rng, 0, 3);
        if e.valuation().unwrap() == wildtate::Valuation::Finite(0) {
            return e;
        }
    }
}

pub fn check_valuation_axioms(a: &Elem, b: &Elem) -> Result<(), String> {
    let (va, vb) = (a.valuation().unwrap(), b.valuation().unwrap());
    let prod = a.mul(b).unwrap().valuation().unwrap();
    if prod != va + vb {
        return Err(format!("v({a} * {b}) = {prod}"));
    }
    let sum = a.add(b).unwrap().valuation().unwrap();
    if sum < va.min(vb) || (va != vb && sum != va.min(vb)) {
        return Err(format!("v({a} + {b}) = {sum}"));
    }
    Ok(())
}

/// Field axioms, square roots and Artin-Schreier roots over all of `F_{2^k}`.
pub fn check_residue_field(k: u32) -> Result<(), String> {
    let f = ResCtx::new(k).map_err(|e| e.to_string())?;
    let all: Vec<_> = f.elements().collect();
    for a in &all {
        if a.sqrt().square() != *a {
            return Err(format!("sqrt({a:?})"));
        }
        if !a.is_zero() && !a.mul(&a.inv().unwrap()).unwrap().is_one() {
            return Err(format!("inverse of {a:?}"));
        }
        match a.artin_schreier() {
            wildtate::AsRoot::Root(z) => {
                if z.square().add(&z).unwrap() != *a {
                    return Err(format!("AS root of {a:?}"));
                }
            }
            wildtate::AsRoot::Unsolvable { .. } => {
                if !a.trace() {
                    return Err(format!("AS unsolvable with trace 0: {a:?}"));
                }
            }
        }
        for b in &all {
            for c in &all {
                let l = a.mul(&b.add(c).unwrap()).unwrap();
                let r = a.mul(b).unwrap().add(&a.mul(c).unwrap()).unwrap();
                if l != r {
                    return Err("distributivity".into());
                }
            }
        }
    }
    Ok(())
}

/// `j` is unchanged and `Delta` scales by `u^-12` under `(u, r, s, t)`, up
/// to the working precision (equal-characteristic division by a non-monomial
/// unit is a truncated series).
pub fn check_transform_laws(e: &WeierstrassEq, u: &Elem, r: &Elem, s: &Elem, t: &Elem) -> Result<(), String> {
    let e2 = e.transform(u, r, s, t).map_err(|x| x.to_string())?;
    if !e.j().unwrap().sub(&e2.j().unwrap()).unwrap().is_zero_to_precision() {
        return Err(format!("j changed under transform of {e}"));
    }
    let lhs = e2.discriminant().unwrap().mul(&u.pow(12).unwrap()).unwrap();
    if !lhs.sub(&e.discriminant().unwrap()).unwrap().is_zero_to_precision() {
        return Err(format!("Delta * u^12 law fails for {e}"));
    }
    Ok(())
}

/// Tate's algorithm gives the same type and minimal discriminant after `(u, r, s, t)`.
pub fn check_tate_invariance(e: &WeierstrassEq, u: &Elem, r: &Elem, s: &Elem, t: &Elem) -> Result<(), String> {
    let e2 = e.transform(u, r, s, t).map_err(|x| x.to_string())?;
    let (a, b) = (tate(e).map_err(|x| x.to_string())?, tate(&e2).map_err(|x| x.to_string())?);
    if (a.kodaira, a.v_delta_min) != (b.kodaira, b.v_delta_min) {
        return Err(format!("{e}: {} / {} vs {} / {}", a.kodaira, a.v_delta_min, b.kodaira, b.v_delta_min));
    }
    Ok(())
}

/// Base curves for the transform suites, one per reduction behaviour.
pub fn base_curves(ctx: &FieldCtx) -> Vec<WeierstrassEq> {
    ["[0,0,1,0,0]", "[1,0,0,0,pi]", "[0,0,pi,0,pi]", "[0,0,pi,0,pi^3]", "[pi,pi,pi,pi^2,pi^5]"]
        .iter()
        .map(|s| WeierstrassEq::parse(ctx, s).unwrap())
        .collect()
}
