#![no_main]
use libfuzzer_sys::fuzz_target;
use tristeer::steering::FockClass;
use tristeer::sweep::{ClassFilter, Format};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(p) = tristeer::parse::path(s) {
        assert_eq!(tristeer::parse::path(&p.to_string()).unwrap(), p);
    }
    if let Ok(c) = s.parse::<FockClass>() {
        assert_eq!(c.to_string().parse::<FockClass>().unwrap(), c);
    }
    if let Ok(f) = s.parse::<Format>() {
        assert_eq!(f.to_string().parse::<Format>().unwrap(), f);
    }
    let _ = s.parse::<ClassFilter>();
});
