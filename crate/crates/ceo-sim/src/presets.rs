//! Configurations shipped with the binary.

use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::{Result, SimError};

pub const PRESETS: [(&str, &str); 6] = [
    ("gaussian_r2", include_str!("../presets/gaussian_r2.toml")),
    ("gaussian_r3", include_str!("../presets/gaussian_r3.toml")),
    ("uniform_r1", include_str!("../presets/uniform_r1.toml")),
    ("uniform_r2", include_str!("../presets/uniform_r2.toml")),
    ("gaussian_sweep", include_str!("../presets/gaussian_sweep.toml")),
    ("equivalence", include_str!("../presets/equivalence.toml")),
];

pub fn text(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn load(name: &str) -> Result<ExperimentConfig> {
    let text = text(name).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        SimError::config(format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })?;
    ExperimentConfig::from_str(text, Path::new(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate() {
        for (name, _) in PRESETS {
            load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(load("nope").is_err());
    }
}
