#![no_main]

use libfuzzer_sys::fuzz_target;
use solmap_cli::config::{parse_flags, parse_kv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(map) = parse_kv(text) {
        let rendered: String = map.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        if !map.values().any(|v| v.contains('#') || v.starts_with('"')) {
            assert_eq!(parse_kv(&rendered).expect("rendered config parses"), map);
        }
    }
    let args: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    let _ = parse_flags(&args);
});
