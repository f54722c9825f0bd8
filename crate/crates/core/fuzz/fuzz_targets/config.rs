#![no_main]

use conceptflow::pipeline::PipelineConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(cfg) = PipelineConfig::from_json(data) {
        cfg.slicing_params().expect("validated config has slicing params");
        cfg.projection_params().validate().expect("validated config has projection params");
    }
});
