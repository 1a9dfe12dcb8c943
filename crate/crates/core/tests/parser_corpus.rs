//! Replays the fuzz corpus seeds through the parsers and checks that
//! arbitrary text never makes them panic.

use std::path::PathBuf;

use proptest::prelude::*;
use wildtate::expr::{parse_int_poly, parse_rational};
use wildtate::{parse_field, Elem, ExtensionSpec, FieldCtx, KodairaType, Valuation, WeierstrassEq};

fn field(sel: u8) -> FieldCtx {
    let text = match sel % 4 {
        0 => "equichar(k=1,prec=32)",
        1 => "equichar(k=2,prec=32)",
        2 => "mixed(k=1,eis=\"z^2-2\",prec=32)",
        _ => "mixed(k=2,eis=\"z^3-2\",prec=32)",
    };
    parse_field(text).unwrap()
}

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut files: Vec<_> = std::fs::read_dir(&dir).unwrap_or_else(|_| panic!("{}", dir.display())).map(|e| e.unwrap().path()).collect();
    files.sort();
    files.into_iter().map(|p| std::fs::read(p).unwrap()).collect()
}

fn split(seed: &[u8]) -> (FieldCtx, &str) {
    let (&sel, rest) = seed.split_first().unwrap();
    (field(sel), std::str::from_utf8(rest).unwrap())
}

#[test]
fn field_seeds_round_trip() {
    for s in seeds("parse_field") {
        let f = parse_field(std::str::from_utf8(&s).unwrap()).unwrap();
        assert_eq!(parse_field(&f.to_string()).unwrap().to_string(), f.to_string());
    }
}

#[test]
fn element_curve_extension_seeds_round_trip() {
    for s in seeds("parse_elem") {
        let (ctx, text) = split(&s);
        let e = Elem::parse(&ctx, text).unwrap();
        assert_eq!(Elem::parse(&ctx, &e.to_string()).unwrap(), e, "{text}");
    }
    for s in seeds("parse_curve") {
        let (ctx, text) = split(&s);
        let e = WeierstrassEq::parse(&ctx, text).unwrap();
        assert_eq!(WeierstrassEq::parse(&ctx, &e.to_string()).unwrap(), e, "{text}");
    }
    for s in seeds("parse_extension") {
        let (ctx, text) = split(&s);
        let e = ExtensionSpec::parse(&ctx, text).unwrap();
        assert_eq!(ExtensionSpec::parse(&ctx, &e.to_string()).unwrap(), e, "{text}");
        assert_eq!(e.break_s().unwrap() + 1, e.different_valuation().unwrap(), "{text}");
    }
}

#[test]
fn small_grammar_seeds_round_trip() {
    for s in seeds("parse_kodaira") {
        let k: KodairaType = std::str::from_utf8(&s).unwrap().parse().unwrap();
        assert_eq!(k.to_string().parse::<KodairaType>().unwrap(), k);
    }
    for s in seeds("parse_valuation") {
        let v: Valuation = std::str::from_utf8(&s).unwrap().parse().unwrap();
        assert_eq!(v.to_string().parse::<Valuation>().unwrap(), v);
    }
    for s in seeds("parse_rational") {
        let q = parse_rational(std::str::from_utf8(&s).unwrap()).unwrap();
        assert_eq!(parse_rational(&q.to_string()).unwrap(), q);
    }
    for s in seeds("parse_int_poly") {
        assert!(parse_int_poly(std::str::from_utf8(&s).unwrap()).unwrap().degree().is_some());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 512, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn parsers_never_panic(sel: u8, text in "[-+*/^()\\[\\],=.0-9a-zOI\" ]{0,40}") {
        let ctx = field(sel);
        let _ = parse_field(&text);
        if let Ok(e) = Elem::parse(&ctx, &text) {
            prop_assert_eq!(Elem::parse(&ctx, &e.to_string()).unwrap(), e);
        }
        if let Ok(e) = WeierstrassEq::parse(&ctx, &text) {
            prop_assert_eq!(WeierstrassEq::parse(&ctx, &e.to_string()).unwrap(), e);
        }
        if let Ok(x) = ExtensionSpec::parse(&ctx, &text) {
            let _ = x.break_s();
            let _ = x.different_valuation();
        }
        let _ = text.parse::<KodairaType>();
        let _ = text.parse::<Valuation>();
        let _ = parse_rational(&text);
        let _ = parse_int_poly(&text);
    }
}
