#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(spec) = chordkd::features::Spectrogram::from_bytes(data) {
        assert_eq!(spec.to_bytes(), data);
    }
});
