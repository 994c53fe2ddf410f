//! Default experiment configs printed as TOML and parsed back.

use semilinear_lab::config::{default_experiment_suite, ExperimentConfig};

fn main() -> semilinear_lab::Result<()> {
    for (name, cfg) in default_experiment_suite() {
        let text = cfg.to_toml_string()?;
        let back = ExperimentConfig::from_toml_str(&text)?;
        assert_eq!(back, cfg);
        println!("# {name}\n{text}");
    }
    Ok(())
}
