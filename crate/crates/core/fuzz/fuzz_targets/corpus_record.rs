#![no_main]

use conceptflow::ingest::{parse_record, parse_timestamp};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(doc) = parse_record(data) {
        assert!(!doc.id.is_empty());
        assert!(!doc.topic.trim().is_empty());
        assert_eq!(doc.timestamp.timestamp_subsec_nanos(), 0);
    }
    let _ = parse_timestamp(data);
});
