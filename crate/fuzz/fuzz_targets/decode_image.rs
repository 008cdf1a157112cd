#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = seghdc::io::decode_image(data) {
        assert_eq!(img.data().len(), img.height() * img.width() * img.channels());
        assert!(matches!(img.channels(), 1 | 3));
    }
});
