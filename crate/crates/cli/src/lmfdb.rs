//! Fetching curves over number fields from the LMFDB JSON API.

use serde_json::Value;
use wildtate::catalog::{CatalogCurve, CatalogEntry, NumberField};
use wildtate::Error;

use crate::CliError;

pub const DEFAULT_BASE_URL: &str = "https://www.lmfdb.org";

/// `LMFDB_BASE_URL` overrides the public site.
pub fn base_url() -> String {
    std::env::var("LMFDB_BASE_URL").unwrap_or_else(|_| DEFAULT_BASE_URL.to_string())
}

/// Normalizes the API's `ainvs` (a `;`-joined string or a list of
/// coordinate lists) to `c0,c1;..`.
pub fn ainvs_text(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.replace(' ', "")),
        Value::Array(items) => {
            let parts: Option<Vec<String>> = items
                .iter()
                .map(|c| match c {
                    Value::Array(cs) => Some(
                        cs.iter().map(|x| x.as_str().map(str::to_string).unwrap_or_else(|| x.to_string())).collect::<Vec<_>>().join(","),
                    ),
                    Value::String(s) => Some(s.clone()),
                    Value::Number(n) => Some(n.to_string()),
                    _ => None,
                })
                .collect();
            parts.map(|p| p.join(";"))
        }
        _ => None,
    }
}

pub fn entry_from_record(label: &str, rec: &Value, source: &str) -> Result<CatalogEntry, CliError> {
    let field_label =
        rec.get("field_label").and_then(Value::as_str).ok_or_else(|| CliError::Network(format!("{label}: no field_label")))?;
    let number_field: NumberField = field_label.parse()?;
    let ainvs = rec.get("ainvs").and_then(ainvs_text).ok_or_else(|| CliError::Network(format!("{label}: no ainvs")))?;
    Ok(CatalogEntry {
        label: label.to_string(),
        number_field,
        curves: vec![CatalogCurve { name: "E".into(), ainvs, expected: None }],
        kernel_x: None,
        ext: None,
        note: format!("fetched from {source}"),
    })
}

#[cfg(feature = "lmfdb")]
pub fn fetch(label: &str) -> Result<CatalogEntry, CliError> {
    let url = format!("{}/api/ec_nfcurves/?label={label}&_format=json", base_url());
    let body: Value =
        ureq::get(&url).call().map_err(|e| CliError::Network(e.to_string()))?.into_json().map_err(|e| CliError::Network(e.to_string()))?;
    let rec = body.get("data").and_then(|d| d.get(0)).ok_or_else(|| CliError::Lib(Error::UnknownLabel(label.to_string())))?;
    entry_from_record(label, rec, &url)
}

#[cfg(not(feature = "lmfdb"))]
pub fn fetch(label: &str) -> Result<CatalogEntry, CliError> {
    Err(CliError::Lib(Error::UnknownLabel(format!("{label} (not vendored; rebuild with --features lmfdb to fetch)"))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn ainvs_forms() {
        assert_eq!(ainvs_text(&json!("0,0;0,9;4,0")).unwrap(), "0,0;0,9;4,0");
        assert_eq!(ainvs_text(&json!([["0", "1"], ["2"], [3, 4]])).unwrap(), "0,1;2;3,4");
        let e = entry_from_record("x", &json!({"field_label": "2.2.8.1", "ainvs": "0;0,9;4;216,108;-3136,-2160"}), "test").unwrap();
        assert_eq!(e.number_field, NumberField::RealSqrt2);
        assert!(matches!(
            entry_from_record("x", &json!({"field_label": "2.2.5.1", "ainvs": "0;0;0;0;1"}), "test"),
            Err(CliError::Lib(Error::UnsupportedNumberField(_)))
        ));
    }
}
