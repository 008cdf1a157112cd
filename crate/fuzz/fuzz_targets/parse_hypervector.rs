#![no_main]
use libfuzzer_sys::fuzz_target;
use seghdc::Hypervector;

fuzz_target!(|s: &str| {
    if let Ok(hv) = s.parse::<Hypervector>() {
        assert_eq!(hv.dim(), s.len());
        assert_eq!(hv.to_string().parse::<Hypervector>().unwrap(), hv);
        assert_eq!(hv.count_ones(), s.bytes().filter(|&b| b == b'1').count());
    }
});
