#![no_main]

use conceptflow::ingest::Tokenizer;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let (stop, text) = data.split_once('\0').unwrap_or(("", data));
    for tok in [Tokenizer::default(), Tokenizer::from_stopword_text(stop)] {
        for t in tok.tokenize(text) {
            assert!(!t.is_empty());
            assert!(!t.chars().any(char::is_whitespace));
        }
    }
});
