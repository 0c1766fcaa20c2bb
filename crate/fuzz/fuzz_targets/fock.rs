#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(f) = tristeer::parse::fock(s) {
            assert_eq!(tristeer::parse::fock(&f.to_string()).unwrap(), f);
        }
    }
});
