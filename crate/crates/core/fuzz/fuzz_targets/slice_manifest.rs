#![no_main]

use conceptflow::ingest::{Concept, Document};
use conceptflow::pipeline::{slices_from_manifest, SliceManifestEntry};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(manifest) = serde_json::from_slice::<Vec<SliceManifestEntry>>(data) else { return };
    let docs: Vec<Document> = (0..4)
        .map(|i| Document {
            id: i.to_string(),
            timestamp: format!("2013-01-0{}T12:00:00Z", i + 1).parse().unwrap(),
            text: String::new(),
            group: "g".into(),
            topic: "t".into(),
        })
        .collect();
    let concepts = vec![Concept { token: "budget".into(), topic: "t".into(), corpus_doc_freq: 1 }];
    if let Ok(slices) = slices_from_manifest(&manifest, &docs, &concepts) {
        assert_eq!(slices.iter().map(|s| s.docs.len()).sum::<usize>(), docs.len());
    }
});
