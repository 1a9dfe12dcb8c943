#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = wildtate::parse_field(text) {
        let again = wildtate::parse_field(&f.to_string()).expect("printed field parses");
        assert_eq!(again.to_string(), f.to_string());
    }
});
