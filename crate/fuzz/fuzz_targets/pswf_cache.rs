#![no_main]

use libfuzzer_sys::fuzz_target;
use pswf_radon::PswfBasis;

fuzz_target!(|bytes: &[u8]| {
    if let Ok(basis) = PswfBasis::from_cache_bytes(bytes) {
        let _ = basis.eval_psi(0, &[-1.0, 0.0, 0.5, 1.0]);
        let _ = basis.m_max();
    }
});
