#![no_main]

use conceptflow::features::EmbeddingTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = EmbeddingTable::from_reader(data) {
        for token in table.tokens() {
            let v = table.get(token).unwrap();
            assert_eq!(v.len(), table.dim());
            assert!(v.iter().all(|x| x.is_finite()));
        }
    }
});
