#![no_main]

use libfuzzer_sys::fuzz_target;
use lsip_rescale::io::parse_problem;
use lsip_rescale::{Separation, SeparationOracle};

// Input: problem JSON, a NUL byte, then little-endian f64 query coordinates.
fuzz_target!(|data: &[u8]| {
    let (json, tail) = match data.iter().position(|&b| b == 0) {
        Some(i) => (&data[..i], &data[i + 1..]),
        None => (data, &[][..]),
    };
    let Ok(inst) = parse_problem(json) else { return };
    let m = inst.dim();
    let mut y: Vec<f64> = tail
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .take(m)
        .collect();
    y.resize(m, 1.0);
    if let Ok(Separation::Violated(w)) = inst.query(&y) {
        let col = inst.resolve(&w.witness).expect("own witness resolves");
        assert_eq!(col.len(), m);
        let dot: f64 = col.iter().zip(&y).map(|(a, b)| a * b).sum();
        let scale: f64 = col.iter().chain(&y).map(|v| v.abs()).sum();
        if scale.is_finite() {
            assert!(dot <= 1e-9 * (1.0 + scale * scale), "unsound separation: {dot}");
        }
    }
});
