//! Replays the fuzz corpus through the parsers the fuzz targets drive.

use std::path::PathBuf;

use solmap_cli::config::{parse_flags, parse_kv};
use solmap_cli::data::parse_list;
use solmap_core::holo::PowerSeries;
use solmap_core::transport::VARS;
use solmap_core::{CylFn, Expression, GridFn1D};

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut paths: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    assert!(!paths.is_empty());
    paths.iter().map(|p| std::fs::read(p).unwrap()).collect()
}

#[test]
fn expression_seeds() {
    let mut parsed = 0;
    for s in seeds("expr_parse") {
        let e = Expression::parse(std::str::from_utf8(&s).unwrap(), &VARS).unwrap();
        let back = Expression::parse(&e.to_string(), &VARS).unwrap();
        assert_eq!(back.to_string(), e.to_string());
        parsed += 1;
    }
    assert!(parsed >= 3);
}

#[test]
fn grid_seeds() {
    let outcomes: Vec<(bool, bool)> = seeds("grid_csv")
        .iter()
        .map(|s| {
            (
                GridFn1D::read_csv(s.as_slice()).is_ok(),
                CylFn::read_csv(s.as_slice()).is_ok(),
            )
        })
        .collect();
    assert_eq!(outcomes, vec![(false, true), (true, false), (false, false)]);
}

#[test]
fn series_seeds() {
    let ok: Vec<bool> = seeds("series_csv")
        .iter()
        .map(|s| PowerSeries::read_csv(s.as_slice()).is_ok())
        .collect();
    assert_eq!(ok, vec![false, true]);
}

#[test]
fn config_seeds() {
    let all = seeds("config_kv");
    let flags: Vec<String> = std::str::from_utf8(&all[0])
        .unwrap()
        .split_whitespace()
        .map(str::to_string)
        .collect();
    assert_eq!(parse_flags(&flags).unwrap().1["phi"], "xi^2");
    assert_eq!(
        parse_kv(std::str::from_utf8(&all[1]).unwrap()).unwrap()["label"],
        "a b"
    );
    assert_eq!(
        parse_kv(std::str::from_utf8(&all[2]).unwrap()).unwrap()["n"],
        "256"
    );
}

#[test]
fn list_seeds() {
    let lists: Vec<_> = seeds("data_list")
        .iter()
        .map(|s| parse_list(std::str::from_utf8(s).unwrap()).ok())
        .collect();
    assert_eq!(
        lists,
        vec![None, Some(vec![0.5, 0.25, 0.125]), Some(vec![-1e-3, 2.0])]
    );
}
