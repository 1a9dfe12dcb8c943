#![no_main]
use libfuzzer_sys::fuzz_target;
use wildtate::{parse_field, Elem, FieldCtx};

fn field(sel: u8) -> FieldCtx {
    let text = match sel % 4 {
        0 => "equichar(k=1,prec=32)",
        1 => "equichar(k=2,prec=32)",
        2 => "mixed(k=1,eis=\"z^2-2\",prec=32)",
        _ => "mixed(k=2,eis=\"z^3-2\",prec=32)",
    };
    parse_field(text).unwrap()
}

fuzz_target!(|data: &[u8]| {
    let Some((&sel, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let ctx = field(sel);
    if let Ok(e) = Elem::parse(&ctx, text) {
        let back = Elem::parse(&ctx, &e.to_string()).expect("printed element parses");
        assert_eq!(back, e);
    }
});
