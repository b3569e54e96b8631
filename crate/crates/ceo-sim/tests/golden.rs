use std::path::Path;

use ceo_sim::config::ExperimentConfig;
use ceo_sim::harness::run_distortion_sweep;
use ceo_sim::io::{csv_string, DistortionRow};

const CONFIG: &str = include_str!("golden/small.toml");
const EXPECTED: &str = include_str!("golden/small_distortion.csv");

fn render() -> String {
    let cfg = ExperimentConfig::from_str(CONFIG, Path::new("golden/small.toml")).unwrap();
    let rows: Vec<DistortionRow> =
        run_distortion_sweep(&cfg).unwrap().iter().map(|p| DistortionRow::new(p, cfg.r, cfg.rule, cfg.seed)).collect();
    csv_string(&rows).unwrap()
}

#[test]
fn distortion_csv_matches_golden_file() {
    let got = render();
    if std::env::var_os("CEO_BLESS").is_some() {
        std::fs::write(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/small_distortion.csv"), &got).unwrap();
        return;
    }
    assert_eq!(got, EXPECTED);
}
