//! Retry policy: rerun a computation from its textual inputs with a larger
//! working precision or a larger residue field when it runs out of either.

use crate::error::{Error, Result};
use crate::field::FieldCtx;

pub const MAX_PRECISION_DOUBLINGS: u32 = 4;
pub const MAX_RESIDUE_DOUBLINGS: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RetryPolicy {
    pub precision_doublings: u32,
    pub residue_doublings: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { precision_doublings: MAX_PRECISION_DOUBLINGS, residue_doublings: MAX_RESIDUE_DOUBLINGS }
    }
}

impl RetryPolicy {
    /// Caps above the hard limits are clamped.
    pub fn new(precision_doublings: u32, residue_doublings: u32) -> Self {
        RetryPolicy {
            precision_doublings: precision_doublings.min(MAX_PRECISION_DOUBLINGS),
            residue_doublings: residue_doublings.min(MAX_RESIDUE_DOUBLINGS),
        }
    }
}

/// Runs `job` over `ctx`, growing the field on `PrecisionLoss` or
/// `ResidueFieldTooSmall`. `job` must rebuild all its inputs from `ctx`.
pub fn run_with_retries<T>(ctx: &FieldCtx, policy: RetryPolicy, mut job: impl FnMut(&FieldCtx) -> Result<T>) -> Result<T> {
    let mut ctx = ctx.clone();
    let (mut prec_left, mut res_left) = (policy.precision_doublings, policy.residue_doublings);
    let mut attempts = 0;
    loop {
        attempts += 1;
        let err = match job(&ctx) {
            Ok(v) => return Ok(v),
            Err(e) => e,
        };
        let grown = match &err {
            Error::PrecisionLoss if prec_left > 0 => {
                prec_left -= 1;
                ctx.with_prec(ctx.prec() * 2)
            }
            Error::ResidueFieldTooSmall { current, required } if res_left > 0 => {
                res_left -= 1;
                let mut k = current * 2;
                while k % required != 0 {
                    k *= 2;
                }
                ctx.with_residue_degree(k)
            }
            Error::PrecisionLoss | Error::ResidueFieldTooSmall { .. } => {
                return Err(Error::RetriesExhausted { attempts, last: Box::new(err) })
            }
            _ => return Err(err),
        };
        ctx = match grown {
            Ok(c) => c,
            Err(_) => return Err(Error::RetriesExhausted { attempts, last: Box::new(err) }),
        };
    }
}
