#![no_main]

use libfuzzer_sys::fuzz_target;
use lsip_rescale::io::{parse_problem, ProblemFile};

fuzz_target!(|data: &[u8]| {
    if let Ok(inst) = parse_problem(data) {
        // anything accepted must round-trip
        let file = ProblemFile::from_instance(&inst).expect("built-in instance serializes");
        let again = file.to_instance().expect("round-trip reparses");
        assert_eq!(ProblemFile::from_instance(&again).unwrap(), file);
    }
});
