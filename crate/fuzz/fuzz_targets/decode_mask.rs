#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|input: (u8, &[u8])| {
    let (k, bytes) = input;
    let k = k as usize;
    if let Ok(mask) = seghdc::io::decode_mask(bytes, k) {
        assert!(mask.labels().iter().all(|&l| (l as usize) < k));
        // labels survive a round trip through the level encoding
        let png = seghdc::io::encode_mask_png(&mask, k).unwrap();
        assert_eq!(seghdc::io::decode_mask(&png, k).unwrap(), mask);
    }
});
