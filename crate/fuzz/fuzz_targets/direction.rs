#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(d) = tristeer::parse::direction(s) {
            assert_eq!(tristeer::parse::direction(&d.to_string()).unwrap(), d);
            assert_eq!(d.reversed().reversed(), d);
        }
    }
});
