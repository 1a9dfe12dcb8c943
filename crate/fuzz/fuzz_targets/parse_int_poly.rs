#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = wildtate::expr::parse_int_poly(text) {
        let _ = p.degree();
    }
});
