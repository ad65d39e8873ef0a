use std::path::Path;

use dtea_core::params::{validate, Preset};

use crate::error::{CliError, Result};
use crate::io::{read_json, to_json_string, write_json};

pub const PRESET_KIND: &str = "preset";

/// Directory holding one JSON file per built-in preset.
pub const PRESET_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/presets");

/// A built-in preset name, or a path to a preset JSON file.
pub fn resolve_preset(arg: &str) -> Result<Preset> {
    if let Some(p) = Preset::builtin(arg) {
        return Ok(p);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "--preset {arg:?} is neither a built-in ({}) nor an existing file",
            dtea_core::params::PRESET_NAMES.join(", ")
        )));
    }
    let preset: Preset = read_json(path, PRESET_KIND)?;
    validate(&preset)?;
    Ok(preset)
}

pub fn preset_json(preset: &Preset) -> String {
    to_json_string(PRESET_KIND, preset).expect("presets hold only finite numbers and strings")
}

pub fn save_preset(path: &Path, preset: &Preset) -> Result<()> {
    write_json(path, PRESET_KIND, preset)
}
