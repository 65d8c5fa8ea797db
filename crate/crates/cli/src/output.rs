//! Artifacts: CSV tables, gnuplot data files and the run manifest. All three
//! are built in memory and written by [`Artifacts::write_all`].

use std::fmt::Write as _;
use std::fs;

use solmap_core::grid::fmt17;

use crate::config::RunConfig;
use crate::error::CliError;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => fmt17(*x),
            Cell::Num(x) => format!("{x}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render())
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map(Into::into).unwrap_or(Cell::Text(String::new()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Column whose changes start a new gnuplot block.
    pub block_column: Option<usize>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            block_column: None,
        }
    }

    pub fn blocked_by(mut self, column: usize) -> Self {
        self.block_column = Some(column);
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))
                .map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }

    /// Whitespace separated; text cells are quoted, blank lines separate
    /// blocks.
    pub fn to_dat(&self) -> String {
        let mut s = format!("# {}\n", self.header.join(" "));
        let mut last: Option<String> = None;
        for row in &self.rows {
            if let Some(c) = self.block_column {
                let key = row[c].render();
                if last.as_ref().is_some_and(|l| *l != key) {
                    s.push('\n');
                }
                last = Some(key);
            }
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Text(t) => format!("\"{t}\""),
                    other => other.render(),
                })
                .collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

/// Everything a run writes, collected before anything touches the disk.
#[derive(Debug, Default)]
pub struct Artifacts {
    tables: Vec<(String, Table, bool)>,
    manifest: Vec<(String, String)>,
}

impl Artifacts {
    /// `name.csv`, and `name.dat` when `plot` is set.
    pub fn table(&mut self, name: &str, table: Table, plot: bool) {
        self.tables.push((name.to_string(), table, plot));
    }

    pub fn record(&mut self, key: &str, value: impl ToString) {
        self.manifest.push((key.to_string(), value.to_string()));
    }

    pub fn num(&mut self, key: &str, value: f64) {
        self.record(key, Cell::Num(value).render());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.manifest
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn manifest_text(&self, cfg: &RunConfig, exit_code: u8) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "subcommand={}", cfg.subcommand);
        let _ = writeln!(s, "config_sha256={}", cfg.hash());
        for line in cfg.canonical().lines().skip(1) {
            let _ = writeln!(s, "config.{line}");
        }
        for (k, v) in &self.manifest {
            let _ = writeln!(s, "{k}={}", v.replace('\n', " "));
        }
        let mut files: Vec<String> = Vec::new();
        for (name, _, plot) in &self.tables {
            files.push(format!("{name}.csv"));
            if *plot {
                files.push(format!("{name}.dat"));
            }
        }
        let _ = writeln!(s, "files={}", files.join(","));
        let _ = writeln!(s, "exit_code={exit_code}");
        s
    }

    pub fn write_all(&self, cfg: &RunConfig, exit_code: u8) -> Result<(), CliError> {
        fs::create_dir_all(cfg.out_dir())?;
        for (name, table, plot) in &self.tables {
            fs::write(cfg.out_path(&format!("{name}.csv")), table.to_csv()?)?;
            if *plot {
                fs::write(cfg.out_path(&format!("{name}.dat")), table.to_dat())?;
            }
        }
        fs::write(
            cfg.out_path("manifest.txt"),
            self.manifest_text(cfg, exit_code),
        )?;
        Ok(())
    }
}
