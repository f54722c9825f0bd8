#![no_main]

use conceptflow::layout::{to_svg, Layout};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(layout) = serde_json::from_slice::<Layout>(data) {
        let _ = to_svg(&layout);
        let back: Layout = serde_json::from_str(&layout.to_json()).unwrap();
        assert_eq!(back.lines.len(), layout.lines.len());
    }
});
