#![no_main]

use libfuzzer_sys::fuzz_target;
use solmap_cli::data::{parse_list, DataSource};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(v) = parse_list(text) {
        assert!(!v.is_empty() && v.iter().all(|x| x.is_finite()));
        let rendered = format!(
            "[{}]",
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(",")
        );
        assert_eq!(parse_list(&rendered).expect("rendered list parses"), v);
    }
    if text.trim_start().starts_with('[') {
        if let Ok(source) = DataSource::parse(text) {
            let _ = source.sample("eta", 0.0, 1.0, 8, true);
        }
    }
});
