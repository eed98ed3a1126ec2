use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fs;
use std::io;
use std::path::Path;
use surftrap::laplace::SolverSettings;

/// Everything needed to repeat a run. Carries no timestamps or host data, so
/// identical invocations produce identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub geometry_hash: Option<String>,
    pub solver: Option<SolverSettings>,
    pub tool: String,
    pub version: String,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
}

/// What a subcommand produced.
pub struct Output {
    pub result: Value,
    /// Extra artifacts as (file name, contents).
    pub files: Vec<(String, String)>,
    pub geometry_hash: Option<String>,
    pub solver: Option<SolverSettings>,
    /// Printed instead of the JSON result when set.
    pub stdout: Option<String>,
}

impl Output {
    pub fn json(result: Value) -> Self {
        Output { result, files: Vec::new(), geometry_hash: None, solver: None, stdout: None }
    }

    pub fn file(mut self, name: &str, contents: String) -> Self {
        self.files.push((name.to_string(), contents));
        self
    }
}

pub fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable output");
    s.push('\n');
    s
}

/// Writes `result.json`, the artifacts and `manifest.json` into `dir`.
pub fn write_run(dir: &Path, command: &str, parameters: Value, seed: Option<u64>, out: &Output) -> io::Result<RunManifest> {
    fs::create_dir_all(dir)?;
    let mut outputs = vec!["result.json".to_string()];
    fs::write(dir.join("result.json"), pretty(&out.result))?;
    for (name, text) in &out.files {
        fs::write(dir.join(name), text)?;
        outputs.push(name.clone());
    }
    let m = RunManifest {
        command: command.to_string(),
        parameters,
        geometry_hash: out.geometry_hash.clone(),
        solver: out.solver,
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        outputs,
    };
    fs::write(dir.join("manifest.json"), pretty(&m))?;
    Ok(m)
}
