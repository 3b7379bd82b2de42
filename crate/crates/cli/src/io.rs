use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use su2q::fourier::FunctionFile;
use su2q::group::GridFile;
use su2q::serial::{complex_from_json, complex_to_json, JsonComplex};
use su2q::symbols::SymbolFile;
use su2q::{BandLimitedFunction, Complex, QuadratureGrid, Symbol};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Malformed(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Malformed(_) => 2,
        }
    }
}

impl From<su2q::Error> for CliError {
    fn from(e: su2q::Error) -> Self {
        CliError::Malformed(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Node values in grid order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SamplesFile {
    pub values: Vec<JsonComplex>,
}

impl SamplesFile {
    pub fn new(values: &[Complex]) -> Self {
        SamplesFile { values: values.iter().map(|&z| complex_to_json(z)).collect() }
    }

    pub fn values(&self) -> Vec<Complex> {
        self.values.iter().map(|&v| complex_from_json(v)).collect()
    }
}

fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Malformed(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Malformed(format!("{} is not a valid {what} file: {e}", path.display())))
}

pub fn read_grid(path: &Path) -> CliResult<QuadratureGrid> {
    Ok(QuadratureGrid::from_file(read_json::<GridFile>(path, "grid")?)?)
}

pub fn read_function(path: &Path) -> CliResult<BandLimitedFunction> {
    Ok(BandLimitedFunction::from_file(&read_json::<FunctionFile>(path, "function")?)?)
}

pub fn read_symbol(path: &Path) -> CliResult<Symbol> {
    Ok(Symbol::from_file(&read_json::<SymbolFile>(path, "symbol")?)?)
}

pub fn read_samples(path: &Path) -> CliResult<Vec<Complex>> {
    Ok(read_json::<SamplesFile>(path, "samples")?.values())
}

/// Pretty JSON to `out`, or to stdout when no path is given.
pub fn write_json<T: Serialize>(value: &T, out: Option<&PathBuf>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Malformed(e.to_string()))?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Malformed(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Malformed(format!("cannot write to stdout: {e}"))),
    }
}
