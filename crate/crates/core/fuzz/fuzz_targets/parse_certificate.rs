#![no_main]

use libfuzzer_sys::fuzz_target;
use lsip_rescale::io::parse_certificate;

fuzz_target!(|data: &[u8]| {
    let _ = parse_certificate(data);
});
