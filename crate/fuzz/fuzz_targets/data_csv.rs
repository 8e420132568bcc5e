#![no_main]

use libfuzzer_sys::fuzz_target;
use pswf_radon::io::{read_data_csv, read_function_csv, write_data_csv};

fuzz_target!(|bytes: &[u8]| {
    if let Ok(h) = read_data_csv(bytes) {
        // anything accepted must survive a round trip unchanged
        let mut out = Vec::new();
        write_data_csv(&mut out, &h).expect("write accepted data");
        let again = read_data_csv(out.as_slice()).expect("re-read written data");
        assert_eq!(again.values, h.values);
    }
    let _ = read_function_csv(bytes);
});
