#![no_main]

use libfuzzer_sys::fuzz_target;
use solmap_core::holo::PowerSeries;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = PowerSeries::read_csv(data) {
        let mut out = Vec::new();
        s.write_csv(&mut out).expect("write");
        assert_eq!(PowerSeries::read_csv(out.as_slice()).expect("reread"), s);
    }
});
