#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(obs) = tristeer::parse::observable(s) {
            let printed = obs.to_string();
            let again = tristeer::parse::observable(&printed).expect("printed observable reparses");
            assert_eq!(again.to_string(), printed);
        }
    }
});
