#![no_main]
use libfuzzer_sys::fuzz_target;
use wildtate::KodairaType;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(k) = text.parse::<KodairaType>() {
        assert_eq!(k.to_string().parse::<KodairaType>().unwrap(), k);
    }
});
