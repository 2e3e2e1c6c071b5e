#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(seq) = chordkd::annotation::parse_lab(text) {
            let _ = chordkd::annotation::parse_lab(&chordkd::annotation::format_lab(&seq)).unwrap();
        }
    }
});
