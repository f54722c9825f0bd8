#![no_main]

use conceptflow::pipeline::ReprojectRequest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(req) = ReprojectRequest::from_json(data) {
        let back = serde_json::to_vec(&req).unwrap();
        assert_eq!(ReprojectRequest::from_json(&back).unwrap(), req);
    }
});
