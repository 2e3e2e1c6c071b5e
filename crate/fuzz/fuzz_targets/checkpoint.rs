#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ckpt) = chordkd::model::Checkpoint::from_bytes(data) {
        let _ = chordkd::model::Checkpoint::from_bytes(&ckpt.to_bytes()).unwrap();
    }
});
