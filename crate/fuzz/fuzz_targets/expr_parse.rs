#![no_main]

use libfuzzer_sys::fuzz_target;
use solmap_core::transport::VARS;
use solmap_core::Expression;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(e) = Expression::parse(text, &VARS) else {
        return;
    };
    let printed = e.to_string();
    let back = Expression::parse(&printed, &VARS).expect("printed expression parses");
    assert_eq!(back.to_string(), printed);
    let _ = e.eval(&[0.25, 0.5, -0.75]);
    for v in VARS {
        if let Ok(d) = e.differentiate(v) {
            let _ = d.eval(&[0.25, 0.5, -0.75]);
        }
    }
});
