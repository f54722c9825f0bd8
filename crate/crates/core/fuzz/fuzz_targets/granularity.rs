#![no_main]

use conceptflow::slicing::parse_granularity;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(secs) = parse_granularity(data) {
        assert!(secs > 0);
    }
});
