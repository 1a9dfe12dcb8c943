#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(q) = wildtate::expr::parse_rational(text) {
        assert_eq!(wildtate::expr::parse_rational(&q.to_string()).unwrap(), q);
    }
});
