#![no_main]

use libfuzzer_sys::fuzz_target;
use solmap_core::{CylFn, GridFn1D};

fuzz_target!(|data: &[u8]| {
    if let Ok(g) = GridFn1D::read_csv(data) {
        let mut out = Vec::new();
        g.write_csv(&mut out).expect("write");
        assert_eq!(GridFn1D::read_csv(out.as_slice()).expect("reread"), g);
    }
    let _ = CylFn::read_csv(data);
});
