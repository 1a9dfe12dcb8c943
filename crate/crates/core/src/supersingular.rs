//! Curves with potentially good supersingular reduction: detection,
//! the reduction type predicted from `v(j)` and the break `s`, and
//! constructions realizing every allowed type.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::elem::{Elem, Valuation};
use crate::error::{Error, Result};
use crate::field::{FieldCtx, Regime};
use crate::quadratic::{admissible_breaks, twist, ExtensionSpec};
use crate::tate::{tate, KodairaType};
use crate::weierstrass::WeierstrassEq;

/// Good reduction with supersingular special fibre.
///
/// Decided on the minimal model by `a1 = 0` and `a3 != 0` in the residue
/// field, and cross-checked against `v(j) > 0`.
pub fn is_good_supersingular(e: &WeierstrassEq) -> Result<bool> {
    let r = tate(e)?;
    if r.kodaira != KodairaType::I0 {
        return Ok(false);
    }
    let m = &r.minimal_model;
    let by_coeffs = m.a1().residue()?.is_zero() && !m.a3().residue()?.is_zero();
    let by_j = e.j_valuation()? > Valuation::Finite(0);
    if by_coeffs != by_j {
        return Err(Error::Internal(format!("supersingularity tests disagree on {e}")));
    }
    Ok(by_coeffs)
}

/// `y^2 + pi^u xy + y = x^3`, which has good supersingular reduction and
/// `v(j) = 12u`. `None` gives `y^2 + y = x^3` (`j = 0`); in mixed
/// characteristic `u = 0` means the same curve.
pub fn construct_supersingular_with_vj(ctx: &FieldCtx, u: Option<u32>) -> Result<WeierstrassEq> {
    let a1 = match (ctx.v2(), u) {
        (_, None) | (Some(_), Some(0)) => Elem::zero(ctx),
        (Some(e), Some(u)) if u < e => Elem::pi_pow(ctx, i64::from(u)),
        (None, Some(u)) if u >= 1 => Elem::pi_pow(ctx, i64::from(u)),
        (_, Some(u)) => return Err(Error::InvalidU(u)),
    };
    let z = Elem::zero(ctx);
    WeierstrassEq::new([a1, z.clone(), Elem::one(ctx), z.clone(), z])
}

/// Exponents `u` accepted by [`construct_supersingular_with_vj`] up to `max` (plus `None`).
pub fn admissible_u(ctx: &FieldCtx, max: u32) -> Vec<Option<u32>> {
    let hi = ctx.v2().map_or(max, |e| max.min(e.saturating_sub(1)));
    (1..=hi).map(Some).chain(std::iter::once(None)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PredictionCase {
    /// `v(j) <= 4s - 4`: type `I*_{4s - v(j)}`.
    A,
    /// `v(j) > 4s - 4`: type fixed by `f = 2s + 3 mod 6`.
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Prediction {
    pub kodaira: KodairaType,
    pub f: Option<u32>,
    pub case: PredictionCase,
}

/// Reduction type of an additive curve that acquires good supersingular
/// reduction over a quadratic extension with break `s`.
pub fn predicted_type(vj: Valuation, s: u32) -> Result<Prediction> {
    if vj <= Valuation::Finite(0) {
        return Err(Error::InconsistentInput(format!("v(j) = {vj} must be positive")));
    }
    if s == 0 {
        return Err(Error::InconsistentInput("s must be positive".into()));
    }
    let bound = 4 * i64::from(s) - 4;
    match vj {
        Valuation::Finite(v) if v <= bound => {
            if v % 12 != 0 {
                return Err(Error::InconsistentInput(format!("v(j) = {v} <= 4s - 4 but 12 does not divide it")));
            }
            let n = (4 * i64::from(s) - v) as u32;
            Ok(Prediction { kodaira: KodairaType::IStarN(n), f: None, case: PredictionCase::A })
        }
        _ => {
            let f = (2 * s + 3) % 6;
            let kodaira = match f {
                1 => KodairaType::II,
                3 => KodairaType::IStar0,
                _ => KodairaType::IIStar,
            };
            Ok(Prediction { kodaira, f: Some(f), case: PredictionCase::B })
        }
    }
}

/// The `m` for which `I*_{4m}` occurs when `v(2) = v2`.
pub fn allowed_istar_multiples(v2: u32) -> BTreeSet<u32> {
    let v2 = i64::from(v2);
    (1..=2 * v2 - 3).filter(|&m| m != 2 * v2 - 5).map(|m| m as u32).collect()
}

/// Possible types of an additive curve with good supersingular reduction
/// over a quadratic extension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllowedTypes {
    pub types: BTreeSet<KodairaType>,
    /// Equal characteristic: every `I*_{4m}`, `m >= 1`, is also possible.
    pub every_istar_multiple_of_4: bool,
}

impl AllowedTypes {
    pub fn contains(&self, t: KodairaType) -> bool {
        self.types.contains(&t) || (self.every_istar_multiple_of_4 && matches!(t, KodairaType::IStarN(n) if n % 4 == 0))
    }
}

impl fmt::Display for AllowedTypes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.types.iter().map(|t| t.to_string()).collect();
        write!(f, "{{{}", v.join(", "))?;
        if self.every_istar_multiple_of_4 {
            f.write_str(", I*4m for all m >= 1")?;
        }
        f.write_str("}")
    }
}

/// `v2 = None` is equal characteristic.
pub fn allowed_types(v2: Option<u32>) -> AllowedTypes {
    let mut types = BTreeSet::new();
    match v2 {
        None => {
            for s in [1u32, 3, 5] {
                types.insert(predicted_type(Valuation::Infinite, s).expect("valid").kodaira);
            }
            AllowedTypes { types, every_istar_multiple_of_4: true }
        }
        Some(e) => {
            let breaks = (1..=2 * e).filter(|&s| s == 2 * e || s % 2 == 1);
            for s in breaks {
                types.insert(predicted_type(Valuation::Infinite, s).expect("valid").kodaira);
            }
            for m in allowed_istar_multiples(e) {
                types.insert(KodairaType::IStarN(4 * m));
            }
            AllowedTypes { types, every_istar_multiple_of_4: false }
        }
    }
}

/// One checked instance of the prediction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationRecord {
    pub field: String,
    pub ext: String,
    pub s: u32,
    pub vj: Valuation,
    pub predicted: KodairaType,
    pub computed: KodairaType,
    #[serde(rename = "match")]
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verification {
    Checked(VerificationRecord),
    /// The hypotheses fail: `E` is not additive, or its twist is not good supersingular.
    NotApplicable(String),
}

/// Compares the predicted and computed type of `E`, provided `E` is
/// additive and its twist by `ext` has good supersingular reduction.
pub fn verify(e: &WeierstrassEq, ext: &ExtensionSpec) -> Result<Verification> {
    let back = twist(e, ext)?;
    if !is_good_supersingular(&back)? {
        return Ok(Verification::NotApplicable("twist is not good supersingular".into()));
    }
    let computed = tate(e)?.kodaira;
    if !computed.is_additive() {
        return Ok(Verification::NotApplicable(format!("reduction type {computed} is not additive")));
    }
    let s = ext.break_s()?;
    let vj = e.j_valuation()?;
    let predicted = predicted_type(vj, s)?.kodaira;
    let mut matched = predicted == computed;
    if let (KodairaType::IStarN(n), Valuation::Finite(v)) = (computed, vj) {
        matched &= i64::from(n) == 4 * i64::from(s) - v;
    }
    Ok(Verification::Checked(VerificationRecord { field: e.ctx().to_string(), ext: ext.to_string(), s, vj, predicted, computed, matched }))
}

/// The `(s, u)` that realizes `I*_{4m}` in the converse construction.
pub fn istar_recipe(v2: u32, m: u32) -> Option<(u32, u32)> {
    if !allowed_istar_multiples(v2).contains(&m) {
        return None;
    }
    let s = if m == 2 * v2 - 3 || m.is_multiple_of(2) { m + 3 } else { m + 6 };
    Some((s, (s - m) / 3))
}

/// All `(s, u)` pairs of the supersingular sweep over `ctx`; `u = None` is `j = 0`.
pub fn sweep_grid(ctx: &FieldCtx, max_s: u32, max_u: u32) -> Vec<(u32, Option<u32>)> {
    let max_s = match ctx.regime() {
        Regime::Mixed => 2 * ctx.v2().expect("mixed"),
        Regime::Equichar => max_s,
    };
    let us = admissible_u(ctx, max_u);
    admissible_breaks(ctx, max_s).into_iter().flat_map(|s| us.iter().map(move |&u| (s, u))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::parse_field;
    use crate::quadratic::construct_extension_with_s;

    fn mixed(eis: &str) -> FieldCtx {
        parse_field(&format!("mixed(k=1,eis=\"{eis}\")")).unwrap()
    }

    #[test]
    fn supersingular_detection() {
        for f in [mixed("z-2"), FieldCtx::equichar(1, 64).unwrap()] {
            assert!(is_good_supersingular(&WeierstrassEq::parse(&f, "[0,0,1,0,0]").unwrap()).unwrap());
            assert!(!is_good_supersingular(&WeierstrassEq::parse(&f, "[1,0,0,0,1]").unwrap()).unwrap());
        }
        let f2 = mixed("z^2-2");
        assert!(is_good_supersingular(&WeierstrassEq::parse(&f2, "[pi,0,1,0,0]").unwrap()).unwrap());
        // additive: not good at all
        assert!(!is_good_supersingular(&WeierstrassEq::parse(&f2, "[0,0,0,0,pi]").unwrap()).unwrap());
    }

    #[test]
    fn constructions() {
        let f3 = mixed("z^3-2");
        let e = construct_supersingular_with_vj(&f3, Some(1)).unwrap();
        assert_eq!(e.j_valuation().unwrap(), Valuation::Finite(12));
        assert_eq!(construct_supersingular_with_vj(&f3, Some(3)), Err(Error::InvalidU(3)));
        assert_eq!(construct_supersingular_with_vj(&f3, Some(0)).unwrap().j_valuation().unwrap(), Valuation::Infinite);
        let f = FieldCtx::equichar(1, 64).unwrap();
        assert_eq!(construct_supersingular_with_vj(&f, Some(2)).unwrap().j_valuation().unwrap(), Valuation::Finite(24));
        assert_eq!(construct_supersingular_with_vj(&f, None).unwrap().j_valuation().unwrap(), Valuation::Infinite);
        assert_eq!(construct_supersingular_with_vj(&f, Some(0)), Err(Error::InvalidU(0)));
        assert_eq!(admissible_u(&f3, 6), vec![Some(1), Some(2), None]);
    }

    #[test]
    fn predictions() {
        let t = |vj: Valuation, s| predicted_type(vj, s).unwrap().kodaira;
        assert_eq!(t(Valuation::Finite(12), 7), KodairaType::IStarN(16));
        assert_eq!(t(Valuation::Finite(24), 3), KodairaType::IStar0);
        assert_eq!(t(Valuation::Infinite, 1), KodairaType::IIStar);
        assert_eq!(t(Valuation::Finite(12), 4), KodairaType::IStarN(4));
        assert!(matches!(predicted_type(Valuation::Finite(8), 4), Err(Error::InconsistentInput(_))));
        assert!(matches!(predicted_type(Valuation::Finite(0), 4), Err(Error::InconsistentInput(_))));
        assert_eq!(predicted_type(Valuation::Finite(13), 4).unwrap().f, Some(5));
    }

    #[test]
    fn allowed_sets() {
        let set = |v: &[u32]| v.iter().copied().collect::<BTreeSet<u32>>();
        assert_eq!(allowed_istar_multiples(2), set(&[1]));
        assert_eq!(allowed_istar_multiples(3), set(&[2, 3]));
        assert_eq!(allowed_istar_multiples(4), set(&[1, 2, 4, 5]));
        use KodairaType::*;
        let types = |v: &[KodairaType]| v.iter().copied().collect::<BTreeSet<_>>();
        assert_eq!(allowed_types(Some(1)).types, types(&[II, IIStar]));
        assert_eq!(allowed_types(Some(2)).types, types(&[IStar0, IIStar, IStarN(4)]));
        assert_eq!(allowed_types(Some(3)).types, types(&[II, IStar0, IIStar, IStarN(8), IStarN(12)]));
        let eq = allowed_types(None);
        assert!(eq.contains(IStarN(40)) && !eq.contains(IStarN(6)) && eq.contains(II));
    }

    #[test]
    fn recipe_matches_prediction() {
        for v2 in 2..=6 {
            for m in allowed_istar_multiples(v2) {
                let (s, u) = istar_recipe(v2, m).unwrap();
                assert!(u >= 1 && u < v2, "v2={v2} m={m}");
                assert!(s % 2 == 1 && s < 2 * v2 || s == 2 * v2);
                let p = predicted_type(Valuation::Finite(12 * i64::from(u)), s).unwrap();
                assert_eq!(p.kodaira, KodairaType::IStarN(4 * m));
            }
        }
    }

    #[test]
    fn verification_examples() {
        let f = FieldCtx::equichar(1, 64).unwrap();
        let ext = construct_extension_with_s(&f, 3).unwrap();
        let e = twist(&construct_supersingular_with_vj(&f, None).unwrap(), &ext).unwrap();
        let Verification::Checked(r) = verify(&e, &ext).unwrap() else { panic!() };
        assert_eq!((r.predicted, r.computed, r.matched), (KodairaType::IStar0, KodairaType::IStar0, true));
        let ext = construct_extension_with_s(&f, 7).unwrap();
        let e = twist(&construct_supersingular_with_vj(&f, Some(1)).unwrap(), &ext).unwrap();
        let Verification::Checked(r) = verify(&e, &ext).unwrap() else { panic!() };
        assert_eq!((r.predicted, r.computed, r.matched), (KodairaType::IStarN(16), KodairaType::IStarN(16), true));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"match\":true") && json.contains("\"vj\":12"), "{json}");
        let f2 = mixed("z^2-2");
        let e = WeierstrassEq::parse(&f2, "[0,0,0,0,pi]").unwrap();
        let ext = construct_extension_with_s(&f2, 3).unwrap();
        assert!(matches!(verify(&e, &ext).unwrap(), Verification::NotApplicable(_)));
    }
}
