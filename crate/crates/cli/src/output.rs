//! In-memory artifact collection. Nothing touches the disk until every
//! computation succeeded, so a failed run leaves no partial outputs.

use std::fs;
use std::path::{Path, PathBuf};

use kicklens::observables::export::{fmt_float, UNITS_LINE};
use toml::{Table, Value};

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.toml";

/// A CSV file with the standard units line, built row by row.
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        let header: Vec<&str> = columns.iter().map(|c| c.as_ref()).collect();
        Self { text: format!("{UNITS_LINE}\n{}\n", header.join(",")), columns: header.len() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns, "row width");
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn floats(&mut self, values: &[f64]) {
        self.row(values.iter().map(|&v| fmt_float(v)).collect());
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub fn cell(v: f64) -> String {
    fmt_float(v)
}

pub fn floats(values: &[f64]) -> Value {
    Value::Array(values.iter().map(|&v| Value::Float(v)).collect())
}

#[derive(Default)]
pub struct Artifacts {
    files: Vec<(String, String)>,
    pub params: Table,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        let name = name.into();
        assert!(self.files.iter().all(|(n, _)| *n != name), "duplicate artifact {name}");
        self.files.push((name, contents));
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    /// Table `key` in the parameters, created on first use.
    pub fn section(&mut self, key: &str) -> &mut Table {
        self.params
            .entry(key.to_string())
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .expect("section is a table")
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn contents(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    /// Manifest text: command, crate version, every file and the resolved
    /// natural-unit parameters.
    pub fn manifest(&self, command: &str) -> String {
        let mut run = Table::new();
        run.insert("command".into(), command.into());
        run.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        run.insert("library_version".into(), kicklens::VERSION.into());
        run.insert("units".into(), "natural: hbar = m = omega0 = k_B = 1; widths also given in units of dx_i".into());
        let mut files: Vec<Value> = self.files.iter().map(|(n, _)| Value::from(n.as_str())).collect();
        files.push(MANIFEST.into());
        run.insert("files".into(), Value::Array(files));
        let mut top = Table::new();
        top.insert("run".into(), Value::Table(run));
        top.insert("parameters".into(), Value::Table(self.params.clone()));
        toml::to_string(&top).expect("manifest serializes")
    }

    pub fn write(self, dir: &Path, command: &str) -> Result<Vec<PathBuf>, CliError> {
        let manifest = self.manifest(command);
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| CliError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::new();
        for (name, contents) in self.files.iter().map(|(n, c)| (n.as_str(), c.as_str())).chain([(MANIFEST, manifest.as_str())]) {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(io(&path))?;
            written.push(path);
        }
        Ok(written)
    }
}
