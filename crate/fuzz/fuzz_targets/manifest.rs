#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = chordkd::features::CorpusManifest::parse(text) {
            assert_eq!(chordkd::features::CorpusManifest::parse(&m.to_text()).unwrap(), m);
        }
    }
});
