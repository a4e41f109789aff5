//! Drives the batch layer from code: write a config, run `evolve` at two
//! SUB-N levels, and read the manifest summary back.

use tdccm::cli::{self, Command, Options};

fn main() -> tdccm::Result<()> {
    let dir = std::env::temp_dir().join("tdccm-batch-example");
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("run.toml");
    std::fs::write(
        &config,
        "model.g = 0.1\nspace.n_b = 20\nmethod.sub_n = 4\nsweep.levels = [4, 6]\nintegrator.t1 = 5.0\nintegrator.output_interval = 0.1\n",
    )?;
    let opts = Options { config: Some(config), out: Some(dir.clone()), ..Default::default() };
    let outcome = cli::execute(Command::Evolve, &opts)?;
    println!("exit code {}", outcome.exit_code);
    println!("{}", serde_json::to_string_pretty(&outcome.manifest.summary)?);
    println!("files in {}: {:?}", dir.display(), outcome.manifest.outputs);
    Ok(())
}
