//! Drives the pipeline from an inline TOML configuration, as the CLI does.

use slwave::config::RunConfig;
use slwave::pipeline::{run_model, run_recover};

fn main() -> slwave::Result<()> {
    let mut cfg = RunConfig::from_toml(
        r#"
[problem]
grid_n = 1000
potential = "1 + sin(0.5, 4)"

[output]
format = "json"
"#,
    )?;
    cfg.output.dir = std::env::temp_dir().join("slwave-example");
    for outcome in [run_model(&cfg)?, run_recover(&cfg)?] {
        for f in outcome.files {
            println!("wrote {}", f.display());
        }
    }
    println!("{}", cfg.to_toml());
    Ok(())
}
