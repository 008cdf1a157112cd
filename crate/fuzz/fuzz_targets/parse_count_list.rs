#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(list) = seghdc::cli::parse_count_list(s) {
        assert!(!list.0.is_empty());
        assert!(list.0.iter().all(|&n| n > 0));
    }
});
