//! Artifact writers. Floats use `{:.16e}` (17 significant digits), which
//! round-trips every finite `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::RunError;

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Row-oriented CSV builder.
pub struct Csv {
    text: String,
    columns: usize,
}

pub enum Cell {
    F(f64),
    I(u64),
    B(bool),
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { text: format!("{}\n", header.join(",")), columns: header.len() }
    }

    pub fn with_header(header: Vec<String>) -> Self {
        Self { text: format!("{}\n", header.join(",")), columns: header.len() }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        debug_assert_eq!(cells.len(), self.columns);
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match c {
                Cell::F(x) => self.text.push_str(&float(*x)),
                Cell::I(n) => write!(self.text, "{n}").unwrap(),
                Cell::B(b) => write!(self.text, "{b}").unwrap(),
            }
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Collects the files written by one run.
pub struct Artifacts {
    dir: PathBuf,
    pub files: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), files: vec![] })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn text(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| RunError::Io { path, source })?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    pub fn csv(&mut self, name: &str, csv: Csv) -> Result<(), RunError> {
        self.text(name, &csv.into_string())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), RunError> {
        let mut s = serde_json::to_string_pretty(value).expect("artifact values serialize");
        s.push('\n');
        self.text(name, &s)
    }
}
