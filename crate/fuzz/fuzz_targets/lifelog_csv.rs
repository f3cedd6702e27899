#![no_main]

use cocreate_core::behavior::{correlate_readiness, fit_profiles, parse_lifelog};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(log) = parse_lifelog(data) {
        let _ = fit_profiles(&log.records);
        let _ = correlate_readiness(&log.records);
    }
});
