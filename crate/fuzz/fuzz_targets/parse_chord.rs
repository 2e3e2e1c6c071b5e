#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(label) = chordkd::chord::parse_chord(text) {
            let again = chordkd::chord::parse_chord(&chordkd::chord::format_chord(&label)).unwrap();
            assert_eq!(again, label);
        }
    }
});
