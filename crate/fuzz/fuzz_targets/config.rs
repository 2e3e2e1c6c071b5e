#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(map) = chordkd::config::ConfigMap::parse(text) {
            assert_eq!(chordkd::config::ConfigMap::parse(&map.to_text()).unwrap(), map);
        }
    }
});
