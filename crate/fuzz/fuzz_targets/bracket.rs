#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok((lo, hi)) = tristeer::parse::bracket(s) {
            assert!(lo.is_finite() && hi.is_finite() && lo < hi);
        }
        if let Ok(v) = tristeer::parse::real(s) {
            assert!(v.is_finite());
        }
    }
});
