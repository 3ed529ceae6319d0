//! Config files and flag merging.
//!
//! A config file is TOML with one table per subcommand:
//!
//! ```toml
//! [gen]
//! space = "circle"
//! L = 5.0
//! n = 4000
//!
//! [alpha]
//! sizes = [200, 500]
//! neighborhood = "coordinate_ball"
//! ```
//!
//! Keys are the long flag names with `-` written as `_`. A flag given on
//! the command line replaces the file value; anything set nowhere takes the
//! built-in default. The merged record is what every command echoes.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Default)]
pub struct ConfigFile {
    table: toml::Table,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let table = text
            .parse::<toml::Table>()
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        Ok(ConfigFile { table })
    }

    /// `name` may be dotted (`urysohn.extend`) for nested tables.
    fn section(&self, name: &str) -> Result<Map<String, Value>, CliError> {
        let mut table = &self.table;
        for part in name.split('.') {
            match table.get(part) {
                None => return Ok(Map::new()),
                Some(toml::Value::Table(t)) => table = t,
                Some(_) => return Err(CliError::Usage(format!("config key {part} must be a [{name}] table"))),
            }
        }
        // Sub-tables belong to nested commands, not to this one.
        let own: toml::Table = table
            .iter()
            .filter(|(_, v)| !v.is_table())
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        match serde_json::to_value(own) {
            Ok(Value::Object(m)) => Ok(m),
            _ => Err(CliError::Usage(format!("config section [{name}] is not a table"))),
        }
    }

    /// File section overlaid with the flags that were given, read into the
    /// resolved config type.
    pub fn resolve<T: DeserializeOwned>(&self, name: &str, flags: &impl Serialize) -> Result<T, CliError> {
        let mut merged = self.section(name)?;
        let Value::Object(given) = serde_json::to_value(flags).map_err(|e| CliError::Usage(e.to_string()))? else {
            return Err(CliError::Usage("flags are not a record".into()));
        };
        for (k, v) in given {
            // Absent options and unset switches leave the file value alone.
            if !v.is_null() && v != Value::Bool(false) {
                merged.insert(k, v);
            }
        }
        serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("[{name}]: {e}")))
    }
}

pub fn echo(config: &impl Serialize) -> Value {
    serde_json::to_value(config).expect("configs serialize")
}
