//! The verification sweep: build good supersingular curves with prescribed
//! `v(j)`, twist them by extensions with prescribed break, and compare the
//! predicted reduction type with Tate's algorithm.

use rayon::prelude::*;
use serde::Serialize;

use crate::elem::Valuation;
use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::quadratic::{construct_extension_with_s, twist};
use crate::supersingular::{construct_supersingular_with_vj, is_good_supersingular, sweep_grid, verify, Verification, VerificationRecord};
use crate::tate::{tate, KodairaType};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRecord {
    #[serde(flatten)]
    pub record: VerificationRecord,
    /// `v(j) = 12u`; `None` for `j = 0`.
    pub u: Option<u32>,
    /// Twisting the additive curve back gives `I0` with supersingular reduction.
    pub twist_back_good: bool,
}

impl SweepRecord {
    pub fn passed(&self) -> bool {
        self.record.matched && self.twist_back_good
    }
}

/// One grid point: the supersingular curve with `v(j) = 12u`, twisted by an
/// extension with break `s`.
pub fn run_case(ctx: &FieldCtx, s: u32, u: Option<u32>) -> Result<SweepRecord> {
    let good = construct_supersingular_with_vj(ctx, u)?;
    let ext = construct_extension_with_s(ctx, s)?;
    let additive = twist(&good, &ext)?;
    let record = match verify(&additive, &ext)? {
        Verification::Checked(r) => r,
        Verification::NotApplicable(why) => return Err(Error::Internal(format!("sweep case s={s} u={u:?}: {why}"))),
    };
    let back = twist(&additive, &ext)?;
    let twist_back_good = tate(&back)?.kodaira == KodairaType::I0 && is_good_supersingular(&back)?;
    Ok(SweepRecord { record, u, twist_back_good })
}

/// Runs every grid point of `ctx` in parallel; results come back in grid order.
pub fn sweep_field(ctx: &FieldCtx, max_s: u32, max_u: u32) -> Vec<Result<SweepRecord>> {
    sweep_grid(ctx, max_s, max_u).into_par_iter().map(|(s, u)| run_case(ctx, s, u)).collect()
}

/// Grid points of several fields, flattened in field order.
pub fn sweep_fields(ctxs: &[FieldCtx], max_s: u32, max_u: u32) -> Vec<Result<SweepRecord>> {
    let grid: Vec<_> = ctxs.iter().flat_map(|c| sweep_grid(c, max_s, max_u).into_iter().map(move |(s, u)| (c, s, u))).collect();
    grid.into_par_iter().map(|(c, s, u)| run_case(c, s, u)).collect()
}

/// Explicit grid points, run in parallel, results in input order.
pub fn run_points(points: &[(FieldCtx, u32, Option<u32>)]) -> Vec<Result<SweepRecord>> {
    points.par_iter().map(|(c, s, u)| run_case(c, *s, *u)).collect()
}

/// `I*_{4m}` multiples `m` realized by case-A records.
pub fn realized_istar_multiples<'a>(records: impl IntoIterator<Item = &'a SweepRecord>) -> std::collections::BTreeSet<u32> {
    records
        .into_iter()
        .filter_map(|r| match (r.record.computed, r.record.vj) {
            (KodairaType::IStarN(n), Valuation::Finite(_)) if n % 4 == 0 => Some(n / 4),
            _ => None,
        })
        .collect()
}
