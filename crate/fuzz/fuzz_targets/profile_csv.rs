#![no_main]

use libfuzzer_sys::fuzz_target;
use pswf_radon::io::read_profile_csv;

fuzz_target!(|bytes: &[u8]| {
    let Some((&n, rest)) = bytes.split_first() else {
        return;
    };
    let _ = read_profile_csv(rest, i32::from(n as i8));
});
