//! Building an instance in code, running it and printing the report the
//! binary would write.

use borno::cli::{fixture_instance, run_instance, Command, Config, Instance};
use serde_json::json;

fn main() -> borno::Result<()> {
    let inst = Instance::new(
        Command::Jsr,
        json!({ "generators": [[[1, 1], [0, 1]], [[1, 0], [1, 1]]] }),
        Config { depth: Some(10), gap: Some(1e-3), ..Config::default() },
    );
    let out = run_instance(&inst);
    println!("{}", serde_json::to_string_pretty(&out.report).unwrap_or_default());
    println!("exit code {}", out.code);
    let fixture = fixture_instance("geometric-cauchy")?;
    let out = run_instance(&fixture);
    println!("geometric-cauchy: {} (exit {})", out.report["verdict"], out.code);
    Ok(())
}
