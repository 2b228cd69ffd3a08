use std::fs;
use std::path::Path;

use proptest::prelude::*;
use utm::config::parse_config;
use utm::dispersion::parse_omega;
use utm::points::parse_points;

fn seeds(target: &str) -> Vec<String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<String> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with("seed_"))
        .map(|e| fs::read_to_string(e.path()).unwrap())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn fuzz_seeds_parse() {
    for s in seeds("parse_config") {
        parse_config(&s).unwrap_or_else(|e| panic!("{e}\n{s}"));
    }
    for s in seeds("parse_omega") {
        parse_omega(&s).unwrap_or_else(|e| panic!("{e}: {s}"));
    }
    for s in seeds("parse_points") {
        parse_points(&s).unwrap_or_else(|e| panic!("{e}: {s}"));
    }
}

#[test]
fn config_errors_carry_position() {
    let err = parse_config("{\n  \"dispersion\": [0, 1],\n  \"bogus\": 1\n}").unwrap_err().to_string();
    assert!(err.contains("line"), "{err}");
}

proptest! {
    #[test]
    fn parsers_do_not_panic(s in "\\PC{0,200}") {
        let _ = parse_config(&s);
        let _ = parse_omega(&s);
        let _ = parse_points(&s);
    }

    #[test]
    fn omega_parser_survives_polynomial_noise(s in "[-+0-9.ek*^ ]{0,40}") {
        if let Ok(d) = parse_omega(&s) {
            prop_assert!(d.degree() >= 2);
        }
    }

    #[test]
    fn points_round_trip(pts in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..40)) {
        let text: String = pts.iter().map(|(x, t)| format!("{x:e} {t:e}\n")).collect();
        prop_assert_eq!(parse_points(&text).unwrap(), pts);
    }
}
