//! Golden-file tests over the netlist corpus in `tests/netlists`.
//!
//! `valid/*.net` must parse, format to `*.golden`, and reformat to the same
//! text. `invalid/*.net` must fail with exactly the diagnostic in `*.err`.
//! Run with `UPDATE_GOLDEN=1` to rewrite the golden files.

use std::fs;
use std::path::{Path, PathBuf};

use oamsort::netlist::parse_netlist;

fn corpus(dir: &str) -> Vec<PathBuf> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/netlists")
        .join(dir);
    let mut files: Vec<_> = fs::read_dir(root)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "net"))
        .collect();
    files.sort();
    files
}

fn bless() -> bool {
    std::env::var_os("UPDATE_GOLDEN").is_some()
}

#[test]
fn valid_netlists_match_golden_and_round_trip() {
    let files = corpus("valid");
    assert!(
        files.len() >= 10,
        "corpus has only {} valid netlists",
        files.len()
    );
    for path in files {
        let text = fs::read_to_string(&path).unwrap();
        let parsed = parse_netlist(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let formatted = parsed.format();
        let again = parse_netlist(&formatted).unwrap();
        assert_eq!(again, parsed, "{}", path.display());
        assert_eq!(again.format(), formatted, "{}", path.display());
        parsed.build().unwrap();

        let golden = path.with_extension("golden");
        if bless() {
            fs::write(&golden, &formatted).unwrap();
        }
        let expected =
            fs::read_to_string(&golden).unwrap_or_else(|_| panic!("missing {}", golden.display()));
        assert_eq!(formatted, expected, "{}", path.display());
    }
}

#[test]
fn invalid_netlists_report_expected_diagnostics() {
    let files = corpus("invalid");
    assert!(
        files.len() >= 10,
        "corpus has only {} invalid netlists",
        files.len()
    );
    for path in files {
        let text = fs::read_to_string(&path).unwrap();
        let err = match parse_netlist(&text) {
            Ok(n) => panic!("{} parsed: {n:?}", path.display()),
            Err(e) => e,
        };
        let expected_path = path.with_extension("err");
        if bless() {
            fs::write(&expected_path, format!("{err}\n")).unwrap();
        }
        let expected = fs::read_to_string(&expected_path).unwrap();
        assert_eq!(err.to_string(), expected.trim_end(), "{}", path.display());
    }
}
