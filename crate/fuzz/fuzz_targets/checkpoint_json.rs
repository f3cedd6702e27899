#![no_main]

use cocreate_core::neural::Checkpoint;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ck) = Checkpoint::from_json_bytes(data) {
        let params = ck.to_params().expect("validated checkpoint converts");
        let mut state = params.initial_state();
        let input = vec![0.0; params.config().input_dim];
        let _ = params.step(&input, &mut state);
    }
});
