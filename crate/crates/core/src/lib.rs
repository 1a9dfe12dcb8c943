//! Tate's algorithm over local fields of residue characteristic 2, both
//! `F_{2^k}((pi))` and finite extensions of `Q_2`, with quadratic twists,
//! the reduction types of twisted supersingular curves, and 2-isogenies.

pub mod catalog;
pub mod driver;
pub mod elem;
pub mod error;
pub mod expr;
pub mod field;
pub mod isogeny;
pub mod quadratic;
pub mod residue;
pub mod supersingular;
pub mod sweep;
pub mod tate;
pub mod weierstrass;

pub use catalog::{catalog, lookup, run_entry, CatalogEntry, CatalogRun, NumberField};
pub use driver::{run_with_retries, RetryPolicy};
pub use elem::{Elem, Valuation};
pub use error::{Error, ParseError, Result};
pub use field::{parse_field, FieldCtx, Regime};
pub use isogeny::{
    classify_2isogeny_valuations, expected_case_from_parameter, phi2_eval, phi2_parametrization, same_type_2isogeny, velu_2isogeny,
    IsogenyValuationCase, TwoIsogenyPair,
};
pub use quadratic::{construct_extension_with_s, twist, ExtensionSpec};
pub use residue::{AsRoot, ResCtx, ResElem};
pub use supersingular::{
    allowed_istar_multiples, allowed_types, construct_supersingular_with_vj, is_good_supersingular, predicted_type, verify, Prediction,
    PredictionCase, Verification, VerificationRecord,
};
pub use sweep::{run_case, run_points, sweep_field, sweep_fields, SweepRecord};
pub use tate::{tate, tate_with, KodairaType, TateConfig, TateReport, TraceStep};
pub use weierstrass::{StdInvariants, WeierstrassEq};
