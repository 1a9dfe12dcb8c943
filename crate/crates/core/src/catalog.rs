//! Named curves from number fields, localized at the prime above 2.
//!
//! Coefficients use the LMFDB text form `a1;a2;a3;a4;a6`, each entry a
//! comma-separated list of coordinates in the power basis `1, y, y^2, ..`.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::elem::{Elem, Valuation};
use crate::error::{Error, Result};
use crate::field::{parse_field, FieldCtx};
use crate::isogeny::{phi2_eval, same_type_2isogeny, velu_2isogeny, PhiRing};
use crate::quadratic::ExtensionSpec;
use crate::tate::{tate, KodairaType};
use crate::weierstrass::WeierstrassEq;

/// The number fields the catalog knows how to localize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NumberField {
    #[serde(rename = "1.1.1.1")]
    Rationals,
    /// `Q(sqrt 2)`, `y = sqrt 2` maps to the uniformizer of `z^2 - 2`.
    #[serde(rename = "2.2.8.1")]
    RealSqrt2,
    /// `Q(i)`, `i` maps to `pi - 1` where `pi^2 - 2 pi + 2 = 0`.
    #[serde(rename = "2.0.4.1")]
    Gaussian,
    /// `Q(2^(1/3))`, `y` maps to the uniformizer of `z^3 - 2`.
    #[serde(rename = "3.1.108.1")]
    PureCubic2,
}

impl NumberField {
    pub fn label(self) -> &'static str {
        match self {
            NumberField::Rationals => "1.1.1.1",
            NumberField::RealSqrt2 => "2.2.8.1",
            NumberField::Gaussian => "2.0.4.1",
            NumberField::PureCubic2 => "3.1.108.1",
        }
    }

    /// Defining polynomial of `y`, low degree first.
    pub fn defining_poly(self) -> &'static [i64] {
        match self {
            NumberField::Rationals => &[0, 1],
            NumberField::RealSqrt2 => &[-2, 0, 1],
            NumberField::Gaussian => &[1, 0, 1],
            NumberField::PureCubic2 => &[-2, 0, 0, 1],
        }
    }

    /// The completion at the prime above 2.
    pub fn local_field(self) -> FieldCtx {
        let eis = match self {
            NumberField::Rationals => "z-2",
            NumberField::RealSqrt2 => "z^2-2",
            NumberField::Gaussian => "z^2-2*z+2",
            NumberField::PureCubic2 => "z^3-2",
        };
        parse_field(&format!("mixed(k=1,eis=\"{eis}\")")).expect("built-in field")
    }

    /// The image of `y` in [`NumberField::local_field`] (or a field with the same tower).
    pub fn generator_image(self, ctx: &FieldCtx) -> Elem {
        match self {
            NumberField::Rationals => Elem::zero(ctx),
            NumberField::RealSqrt2 | NumberField::PureCubic2 => Elem::pi(ctx),
            NumberField::Gaussian => Elem::pi(ctx).sub(&Elem::one(ctx)).expect("same field"),
        }
    }

    /// Evaluates `c0 + c1 y + ...` given as `"c0,c1,.."`.
    pub fn localize_coefficient(self, ctx: &FieldCtx, text: &str) -> Result<Elem> {
        let y = self.generator_image(ctx);
        let mut acc = Elem::zero(ctx);
        let mut power = Elem::one(ctx);
        let coords: Vec<&str> = text.split(',').map(str::trim).collect();
        if coords.len() > self.defining_poly().len() - 1 {
            return Err(Error::UnsupportedNumberField(format!(
                "{} coordinates for a field of degree {}",
                coords.len(),
                self.defining_poly().len() - 1
            )));
        }
        for c in coords {
            let q = BigRational::from_str(c).map_err(|_| Error::InconsistentInput(format!("bad coordinate {c:?}")))?;
            acc = acc.add(&Elem::from_rational(ctx, &q)?.mul(&power)?)?;
            power = power.mul(&y)?;
        }
        Ok(acc)
    }

    /// Localizes `a1;a2;a3;a4;a6`.
    pub fn localize_ainvs(self, ctx: &FieldCtx, ainvs: &str) -> Result<WeierstrassEq> {
        let parts: Vec<&str> = ainvs.split(';').collect();
        if parts.len() != 5 {
            return Err(Error::InconsistentInput(format!("expected 5 coefficients, got {}", parts.len())));
        }
        let mut a = Vec::with_capacity(5);
        for p in parts {
            a.push(self.localize_coefficient(ctx, p)?);
        }
        WeierstrassEq::new(a.try_into().expect("five"))
    }
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for NumberField {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "1.1.1.1" => NumberField::Rationals,
            "2.2.8.1" => NumberField::RealSqrt2,
            "2.0.4.1" => NumberField::Gaussian,
            "3.1.108.1" => NumberField::PureCubic2,
            _ => return Err(Error::UnsupportedNumberField(s.to_string())),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogCurve {
    pub name: String,
    pub ainvs: String,
    pub expected: Option<KodairaType>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub label: String,
    pub number_field: NumberField,
    pub curves: Vec<CatalogCurve>,
    /// For a pair: the abscissa of the kernel of `E1 -> E2`, local grammar.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_x: Option<String>,
    /// For a pair: the extension whose break decides whether types agree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ext: Option<String>,
    pub note: String,
}

const VENDORED: &str = include_str!("../fixtures/catalog.json");

pub fn catalog() -> Vec<CatalogEntry> {
    serde_json::from_str(VENDORED).expect("vendored catalog is valid")
}

pub fn lookup(label: &str) -> Result<CatalogEntry> {
    catalog().into_iter().find(|e| e.label == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CurveRun {
    pub name: String,
    pub model: String,
    pub vj: Valuation,
    pub j: Option<String>,
    pub expected: Option<KodairaType>,
    pub computed: KodairaType,
    pub v_delta_min: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairRun {
    /// The Vélu quotient of the first curve equals the second literally.
    pub velu_matches: bool,
    pub phi2_vanishes: bool,
    pub s: u32,
    pub same_type_predicted: bool,
    pub same_type_computed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogRun {
    pub label: String,
    pub field: String,
    pub curves: Vec<CurveRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairRun>,
    pub ok: bool,
}

/// Localizes every curve of `entry`, runs Tate's algorithm and, for pairs,
/// checks Vélu's quotient and the same-type criterion.
pub fn run_entry(entry: &CatalogEntry, ctx: &FieldCtx) -> Result<CatalogRun> {
    let mut curves = Vec::new();
    let mut models = Vec::new();
    for c in &entry.curves {
        let e = entry.number_field.localize_ainvs(ctx, &c.ainvs)?;
        let report = tate(&e)?;
        curves.push(CurveRun {
            name: c.name.clone(),
            model: e.to_string(),
            vj: e.j_valuation()?,
            j: e.j()?.as_rational().map(|q| q.to_string()),
            expected: c.expected,
            computed: report.kodaira,
            v_delta_min: report.v_delta_min,
        });
        models.push(e);
    }
    let pair = match (&entry.kernel_x, &entry.ext, models.as_slice()) {
        (Some(x0), Some(ext), [e1, e2]) => {
            let x0 = Elem::parse(ctx, x0)?;
            let ext = ExtensionSpec::parse(ctx, ext)?;
            let velu = velu_2isogeny(e1, &x0)?;
            let s = ext.break_s()?;
            let v2 = ctx.v2().ok_or(Error::RegimeMismatch)?;
            Some(PairRun {
                velu_matches: velu.target == *e2,
                phi2_vanishes: phi2_eval(&e1.j()?, &e2.j()?)?.is_nil(),
                s,
                same_type_predicted: same_type_2isogeny(curves[0].vj, curves[1].vj, s, v2),
                same_type_computed: curves[0].computed == curves[1].computed,
            })
        }
        (None, None, _) => None,
        _ => return Err(Error::InconsistentInput(format!("{}: a pair needs two curves, kernel_x and ext", entry.label))),
    };
    let ok = curves.iter().all(|c| c.expected.is_none_or(|t| t == c.computed))
        && pair.as_ref().is_none_or(|p| p.velu_matches && p.phi2_vanishes && p.same_type_predicted == p.same_type_computed);
    Ok(CatalogRun { label: entry.label.clone(), field: ctx.to_string(), curves, pair, ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embeddings_satisfy_defining_polynomials() {
        for nf in [NumberField::Rationals, NumberField::RealSqrt2, NumberField::Gaussian, NumberField::PureCubic2] {
            let ctx = nf.local_field();
            let y = nf.generator_image(&ctx);
            let mut acc = Elem::zero(&ctx);
            for (i, c) in nf.defining_poly().iter().enumerate() {
                acc = acc.add(&Elem::from_int(&ctx, *c).mul(&y.pow(i as i64).unwrap()).unwrap()).unwrap();
            }
            if nf != NumberField::Rationals {
                assert!(acc.is_exact_zero(), "{nf}");
            }
            assert_eq!(nf.label().parse::<NumberField>().unwrap(), nf);
        }
    }

    #[test]
    fn vendored_entries_reproduce() {
        for entry in catalog() {
            let run = run_entry(&entry, &entry.number_field.local_field()).unwrap();
            assert!(run.ok, "{}: {run:?}", entry.label);
        }
    }

    #[test]
    fn cubic_pair() {
        let entry = lookup("cubic-tower-2-isogeny").unwrap();
        let run = run_entry(&entry, &entry.number_field.local_field()).unwrap();
        assert_eq!(run.curves[0].j.as_deref(), Some("0"));
        assert_eq!(run.curves[1].j.as_deref(), Some("54000"));
        let pair = run.pair.unwrap();
        assert_eq!(pair.s, 6);
        assert!(!pair.same_type_predicted);
        assert_eq!(lookup("nope"), Err(Error::UnknownLabel("nope".into())));
    }
}
