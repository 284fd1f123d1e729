//! `--set key=value` overrides applied to the parsed config table.
//!
//! Keys are dotted paths; numeric segments index arrays, e.g.
//! `protocol.kicks.1.width=13`. Values are TOML literals, falling back to a
//! bare string.

use toml::{Table, Value};

use crate::error::CliError;

pub fn apply_overrides(table: &mut Table, overrides: &[String]) -> Result<(), CliError> {
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{item}`")))?;
        let path: Vec<&str> = key.trim().split('.').collect();
        if path.iter().any(|s| s.is_empty()) {
            return Err(CliError::Config(format!("--set has an empty key segment in `{key}`")));
        }
        set_path(table, &path, parse_value(raw.trim()), key)?;
    }
    Ok(())
}

fn parse_value(raw: &str) -> Value {
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => Value::String(raw.to_string()),
    }
}

fn set_path(table: &mut Table, path: &[&str], value: Value, key: &str) -> Result<(), CliError> {
    let (head, rest) = path.split_first().expect("nonempty path");
    if rest.is_empty() {
        table.insert(head.to_string(), value);
        return Ok(());
    }
    let entry = table
        .entry(head.to_string())
        .or_insert_with(|| Value::Table(Table::new()));
    set_in_value(entry, rest, value, key)
}

fn set_in_value(node: &mut Value, path: &[&str], value: Value, key: &str) -> Result<(), CliError> {
    match node {
        Value::Table(t) => set_path(t, path, value, key),
        Value::Array(items) => {
            let (head, rest) = path.split_first().expect("nonempty path");
            let idx: usize = head
                .parse()
                .map_err(|_| CliError::Config(format!("--set `{key}`: `{head}` must index an array")))?;
            let slot = items
                .get_mut(idx)
                .ok_or_else(|| CliError::Config(format!("--set `{key}`: index {idx} out of range")))?;
            if rest.is_empty() {
                *slot = value;
                Ok(())
            } else {
                set_in_value(slot, rest, value, key)
            }
        }
        _ => Err(CliError::Config(format!("--set `{key}` descends into a non-table value"))),
    }
}
