#![no_main]

use libfuzzer_sys::fuzz_target;
use mechfluid::scenario::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(s) = Scenario::from_toml(src) else { return };
    let again = Scenario::from_toml(&s.to_toml()).expect("serialized scenario reloads");
    assert_eq!(again, s);
});
