#![no_main]

use libfuzzer_sys::fuzz_target;
use pswf_radon::io::{read_sinogram_csv, write_sinogram_csv};

fuzz_target!(|bytes: &[u8]| {
    if let Ok(sino) = read_sinogram_csv(bytes) {
        let mut out = Vec::new();
        write_sinogram_csv(&mut out, &sino).expect("write accepted sinogram");
        read_sinogram_csv(out.as_slice()).expect("re-read written sinogram");
    }
});
