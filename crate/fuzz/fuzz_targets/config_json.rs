#![no_main]

use libfuzzer_sys::fuzz_target;
use pswf_radon::io::{read_config, read_sidecar};

fuzz_target!(|bytes: &[u8]| {
    if let Ok(config) = read_config(bytes) {
        // a validated config must describe a usable grid and order
        config.order().expect("validated order");
        config.out_grid().expect("validated grid");
    }
    let _ = read_sidecar(bytes);
});
