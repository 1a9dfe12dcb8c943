//! Tate's algorithm in residue characteristic 2.
//!
//! The general-`p` form of the algorithm, specialized to `p = 2`: every
//! quadratic that needs a root in the residue field has zero linear term
//! there, so only residue square roots are used. The residue field
//! `F_{2^k}` stands in for its algebraic closure, so there are no
//! split/non-split distinctions.

use std::fmt;
use std::str::FromStr;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::elem::{Elem, Valuation};
use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::residue::ResElem;
use crate::weierstrass::WeierstrassEq;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KodairaType {
    I0,
    In(u32),
    II,
    III,
    IV,
    IStar0,
    IStarN(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl KodairaType {
    /// Number of irreducible components of the special fibre of the minimal regular model.
    pub fn component_count(self) -> u32 {
        match self {
            KodairaType::I0 | KodairaType::II => 1,
            KodairaType::In(n) => n,
            KodairaType::III => 2,
            KodairaType::IV => 3,
            KodairaType::IStar0 => 5,
            KodairaType::IStarN(n) => n + 5,
            KodairaType::IVStar => 7,
            KodairaType::IIIStar => 8,
            KodairaType::IIStar => 9,
        }
    }

    pub fn is_additive(self) -> bool {
        !matches!(self, KodairaType::I0 | KodairaType::In(_))
    }

    /// `I*n` with `n = 0` folded into `I*0`.
    pub fn istar(n: u32) -> KodairaType {
        if n == 0 {
            KodairaType::IStar0
        } else {
            KodairaType::IStarN(n)
        }
    }
}

impl fmt::Display for KodairaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KodairaType::I0 => f.write_str("I0"),
            KodairaType::In(n) => write!(f, "I{n}"),
            KodairaType::II => f.write_str("II"),
            KodairaType::III => f.write_str("III"),
            KodairaType::IV => f.write_str("IV"),
            KodairaType::IStar0 => f.write_str("I*0"),
            KodairaType::IStarN(n) => write!(f, "I*{n}"),
            KodairaType::IVStar => f.write_str("IV*"),
            KodairaType::IIIStar => f.write_str("III*"),
            KodairaType::IIStar => f.write_str("II*"),
        }
    }
}

impl FromStr for KodairaType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InconsistentInput(format!("unknown Kodaira symbol '{s}'"));
        Ok(match s {
            "I0" => KodairaType::I0,
            "II" => KodairaType::II,
            "III" => KodairaType::III,
            "IV" => KodairaType::IV,
            "I*0" => KodairaType::IStar0,
            "IV*" => KodairaType::IVStar,
            "III*" => KodairaType::IIIStar,
            "II*" => KodairaType::IIStar,
            _ => {
                let (star, digits) = match s.strip_prefix("I*") {
                    Some(d) => (true, d),
                    None => (false, s.strip_prefix('I').ok_or_else(bad)?),
                };
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
                    return Err(bad());
                }
                let n: u32 = digits.parse().map_err(|_| bad())?;
                if star {
                    KodairaType::IStarN(n)
                } else {
                    KodairaType::In(n)
                }
            }
        })
    }
}

impl Serialize for KodairaType {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for KodairaType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Default)]
pub struct TateConfig {
    /// When set, every lifted residue value gets a random multiple of `pi`
    /// added. The type must not depend on it.
    pub perturb_seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub step: String,
    pub vals: [Valuation; 5],
    pub decision: String,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.vals.iter().map(|v| v.to_string()).collect();
        write!(f, "step {}: v(a1,a2,a3,a4,a6)=({}) -> {}", self.step, v.join(","), self.decision)
    }
}

#[derive(Clone, Debug)]
pub struct TateReport {
    pub kodaira: KodairaType,
    pub v_delta_min: u32,
    pub minimal_model: WeierstrassEq,
    /// Number of `u = pi` rescalings needed to reach a minimal model.
    pub restarts: u32,
    pub trace: Vec<TraceStep>,
}

struct Lifter {
    ctx: FieldCtx,
    rng: Option<StdRng>,
}

impl Lifter {
    fn lift(&mut self, r: &ResElem) -> Elem {
        let base = Elem::from_residue(&self.ctx, r);
        match &mut self.rng {
            None => base,
            Some(rng) => {
                let res = self.ctx.residue();
                let noise = res.from_bits(rng.gen_range(0..res.size()) as u32);
                let pow = rng.gen_range(1..=2);
                base.add(&Elem::from_residue(&self.ctx, &noise).mul_pi_pow(pow)).expect("same field")
            }
        }
    }
}

fn res(x: &Elem) -> Result<ResElem> {
    x.residue()
}

fn val_lt(x: &Elem, n: i64) -> Result<bool> {
    Ok(!x.val_at_least(n)?)
}

pub fn tate(e: &WeierstrassEq) -> Result<TateReport> {
    tate_with(e, &TateConfig::default())
}

pub fn tate_with(e: &WeierstrassEq, cfg: &TateConfig) -> Result<TateReport> {
    let ctx = e.ctx().clone();
    let mut lf = Lifter { ctx: ctx.clone(), rng: cfg.perturb_seed.map(StdRng::seed_from_u64) };
    let mut trace = Vec::new();
    let mut note = |step: &str, c: &WeierstrassEq, decision: String| {
        trace.push(TraceStep { step: step.to_string(), vals: c.valuations(), decision });
    };
    let zero = Elem::zero(&ctx);

    // Step 0: integral model.
    let mut k = 0i64;
    for (a, w) in e.coeffs().iter().zip([1i64, 2, 3, 4, 6]) {
        if let Valuation::Finite(v) = a.valuation_lower_bound() {
            if v < 0 {
                k = k.max((-v + w - 1) / w);
            }
        }
    }
    let mut c = if k > 0 { e.scale_pi(-k) } else { e.clone() };
    note("0", &c, format!("integral model (u = pi^-{k})"));

    let mut restarts = 0u32;
    loop {
        let inv = c.invariants()?;
        let vd = match inv.delta.valuation()? {
            Valuation::Finite(v) => v,
            Valuation::Infinite => return Err(Error::SingularCurve),
        };
        if vd < 0 {
            return Err(Error::Internal("integral model with v(delta) < 0".into()));
        }
        let done = |kod: KodairaType, c: WeierstrassEq, trace: Vec<TraceStep>| {
            Ok(TateReport { kodaira: kod, v_delta_min: vd as u32, minimal_model: c, restarts, trace })
        };
        if vd == 0 {
            note("1", &c, "v(delta) = 0: I0".into());
            return done(KodairaType::I0, c, trace);
        }

        // Step 2: move the singular point of the reduction to (0, 0).
        let b2_unit = !inv.b2.val_at_least(1)?;
        let (r, t) = if !b2_unit {
            let r0 = res(c.a4())?.sqrt();
            let a2 = res(c.a2())?;
            let a4 = res(c.a4())?;
            let a6 = res(c.a6())?;
            let t0 = r0.add(&a2)?.mul(&r0)?.add(&a4)?.mul(&r0)?.add(&a6)?.sqrt();
            (lf.lift(&r0), lf.lift(&t0))
        } else {
            let a1inv = res(c.a1())?.inv()?;
            let r0 = a1inv.mul(&res(c.a3())?)?;
            let t0 = a1inv.mul(&res(c.a4())?.add(&r0.square())?)?;
            (lf.lift(&r0), lf.lift(&t0))
        };
        c = c.rst(&r, &zero, &t)?;
        if b2_unit {
            note("2", &c, format!("b2 is a unit: I{vd}"));
            return done(KodairaType::In(vd as u32), c, trace);
        }
        note("2", &c, "singular point moved to (0,0)".into());

        if val_lt(c.a6(), 2)? {
            note("3", &c, "v(a6) < 2: II".into());
            return done(KodairaType::II, c, trace);
        }
        let inv = c.invariants()?;
        if val_lt(&inv.b8, 3)? {
            note("4", &c, "v(b8) < 3: III".into());
            return done(KodairaType::III, c, trace);
        }
        if val_lt(&inv.b6, 3)? {
            note("5", &c, "v(b6) < 3: IV".into());
            return done(KodairaType::IV, c, trace);
        }

        // Step 6: arrange pi | a1, a2; pi^2 | a3, a4; pi^3 | a6.
        let s = lf.lift(&res(c.a2())?.sqrt());
        let t = lf.lift(&res(&c.a6().mul_pi_pow(-2))?.sqrt()).mul_pi_pow(1);
        c = c.rst(&zero, &s, &t)?;
        let b = c.a2().mul_pi_pow(-1);
        let cc = c.a4().mul_pi_pow(-2);
        let d = c.a6().mul_pi_pow(-3);
        let n = |k: i64| Elem::from_int(&ctx, k);
        // Discriminant and sub-discriminant of P(T) = T^3 + b T^2 + c T + d.
        let w = n(27)
            .mul(&d.square())?
            .sub(&b.square().mul(&cc.square())?)?
            .add(&n(4).mul(&b.pow(3)?)?.mul(&d)?)?
            .sub(&n(18).mul(&b)?.mul(&cc)?.mul(&d)?)?
            .add(&n(4).mul(&cc.pow(3)?)?)?;
        let x = n(3).mul(&cc)?.sub(&b.square())?;
        if !res(&w)?.is_zero() {
            note("6", &c, "P(T) has distinct roots: I*0".into());
            return done(KodairaType::IStar0, c, trace);
        }

        if !res(&x)?.is_zero() {
            // Step 7: P has a double root; move it to 0 and run the subprocedure.
            let r = lf.lift(&res(&cc)?.sqrt()).mul_pi_pow(1);
            c = c.rst(&r, &zero, &zero)?;
            note("7", &c, "double root of P(T) moved to 0".into());
            let (mut ix, mut iy, mut mx, mut my) = (3i64, 3i64, 2i64, 2i64);
            loop {
                if ix + iy - 5 > vd {
                    return Err(Error::Internal("Tate subprocedure did not terminate".into()));
                }
                let a3t = c.a3().mul_pi_pow(-my);
                let a6t = c.a6().mul_pi_pow(-mx - my);
                if !res(&a3t.square().add(&n(4).mul(&a6t)?)?)?.is_zero() {
                    break;
                }
                let t = lf.lift(&res(&a6t)?.sqrt()).mul_pi_pow(my);
                c = c.rst(&zero, &zero, &t)?;
                my += 1;
                iy += 1;
                note(&format!("7.{}", ix + iy - 6), &c, "y-translation".into());
                let a2t = c.a2().mul_pi_pow(-1);
                let a4t = c.a4().mul_pi_pow(-1 - mx);
                let a6t = c.a6().mul_pi_pow(-mx - my);
                if !res(&a4t.square().sub(&n(4).mul(&a2t)?.mul(&a6t)?)?)?.is_zero() {
                    break;
                }
                let r = lf.lift(&res(&a6t)?.div(&res(&a2t)?)?.sqrt()).mul_pi_pow(mx);
                c = c.rst(&r, &zero, &zero)?;
                mx += 1;
                ix += 1;
                note(&format!("7.{}", ix + iy - 6), &c, "x-translation".into());
            }
            let m = (ix + iy - 5) as u32;
            note("7", &c, format!("subprocedure stops: I*{m}"));
            return done(KodairaType::IStarN(m), c, trace);
        }

        // Step 8: P has a triple root; move it to 0.
        let r = lf.lift(&res(&b)?).mul_pi_pow(1);
        c = c.rst(&r, &zero, &zero)?;
        let a3t = c.a3().mul_pi_pow(-2);
        let a6t = c.a6().mul_pi_pow(-4);
        if !res(&a3t.square().add(&n(4).mul(&a6t)?)?)?.is_zero() {
            note("8", &c, "Y^2 + a3 Y - a6 has distinct roots: IV*".into());
            return done(KodairaType::IVStar, c, trace);
        }
        let t = lf.lift(&res(&a6t)?.sqrt()).mul_pi_pow(2);
        c = c.rst(&zero, &zero, &t)?;
        if val_lt(c.a4(), 4)? {
            note("9", &c, "v(a4) < 4: III*".into());
            return done(KodairaType::IIIStar, c, trace);
        }
        if val_lt(c.a6(), 6)? {
            note("10", &c, "v(a6) < 6: II*".into());
            return done(KodairaType::IIStar, c, trace);
        }
        c = c.scale_pi(1);
        restarts += 1;
        note("11", &c, "model not minimal; rescaled by u = pi".into());
    }
}
