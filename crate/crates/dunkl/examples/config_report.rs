//! Parse a config, run a suite in-process and print the JSON report.
use dunkl::config::{ExperimentConfig, OutputFormat};
use dunkl::report::rows_to_string;
use dunkl::suites::{run_suite, Suite};

const CONFIG: &str = r#"
k = [1.0]
generators = ["jordan"]

[tolerances]
calculus = 1e-8

[output]
format = "json"
"#;

fn main() -> dunkl::Result<()> {
    let cfg = ExperimentConfig::parse(CONFIG, false)?;
    cfg.validate()?;
    let rows = run_suite(Suite::Calculus, &cfg)?;
    print!("{}", rows_to_string(&rows, OutputFormat::Json)?);
    eprintln!("{} of {} checks passed", rows.iter().filter(|r| r.pass).count(), rows.len());
    match ExperimentConfig::parse("k = [1.0]\ntypo = 1\n", false) {
        Err(e) => eprintln!("rejected: {e}"),
        Ok(_) => unreachable!("unknown keys are rejected"),
    }
    Ok(())
}
