//! Layering of a JSON config file under the command-line flags.
//!
//! The config file is an object with optional top-level `out` and `seed` keys
//! and one optional object per subcommand, keyed by the subcommand name, whose
//! keys are the flag names with `_` for `-`. A flag given on the command line
//! always wins.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

pub fn load(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::Format(format!("{}: config must be a JSON object", path.display()))),
        Err(e) => Err(CliError::Format(format!("{}: {e}", path.display()))),
    }
}

fn unset(v: &Value) -> bool {
    match v {
        Value::Null | Value::Bool(false) => true,
        Value::Array(a) => a.is_empty(),
        _ => false,
    }
}

/// Fills every flag left unset on the command line from `section`.
pub fn merge<T: Serialize + DeserializeOwned>(args: T, section: Option<&Value>, name: &str) -> Result<T, CliError> {
    let Some(section) = section else { return Ok(args) };
    let Value::Object(section) = section else {
        return Err(CliError::Usage(format!("config section '{name}' must be an object")));
    };
    let mut current = serde_json::to_value(&args).expect("argument structs serialise");
    let fields = current.as_object_mut().expect("argument structs are objects");
    for (key, value) in section {
        match fields.get_mut(key) {
            Some(slot) if unset(slot) => *slot = value.clone(),
            Some(_) => {}
            None => return Err(CliError::Usage(format!("unknown key '{key}' in config section '{name}'"))),
        }
    }
    serde_json::from_value(current).map_err(|e| CliError::Usage(format!("config section '{name}': {e}")))
}
