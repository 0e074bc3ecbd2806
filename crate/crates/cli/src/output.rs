use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, clap::Args)]
pub struct OutputArgs {
    /// Write the CSV table here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write a JSON report of the run.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Shortest round-tripping decimal.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub struct Run<'a, C: Serialize> {
    pub command: &'static str,
    pub config: &'a C,
    pub table: Table,
    /// Extra `# key: value` lines after the config.
    pub notes: Vec<String>,
    pub results: Value,
}

fn header<C: Serialize>(run: &Run<'_, C>) -> Result<String, CliError> {
    let mut out = format!(
        "# deltaprime {VERSION}\n# command: {}\n# config:\n",
        run.command
    );
    let cfg = toml::to_string(run.config)
        .map_err(|e| CliError::Usage(format!("config not serializable: {e}")))?;
    for line in cfg.lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            out.push_str("#   ");
            out.push_str(line);
            out.push('\n');
        }
    }
    for n in &run.notes {
        out.push_str("# ");
        out.push_str(n);
        out.push('\n');
    }
    Ok(out)
}

pub fn emit<C: Serialize>(run: Run<'_, C>, args: &OutputArgs) -> Result<(), CliError> {
    let mut sink: Box<dyn Write> = match &args.output {
        Some(p) => {
            Box::new(File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?)
        }
        None => Box::new(io::stdout().lock()),
    };
    let head = header(&run)?;
    sink.write_all(head.as_bytes())
        .map_err(|e| CliError::Io(e.to_string()))?;
    {
        let mut w = csv::Writer::from_writer(&mut sink);
        w.write_record(&run.table.columns)
            .map_err(|e| CliError::Io(e.to_string()))?;
        for r in &run.table.rows {
            w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    }
    if let Some(p) = &args.report {
        let columns: Vec<&str> = run.table.columns.clone();
        let report = json!({
            "tool": "deltaprime",
            "version": VERSION,
            "command": run.command,
            "config": serde_json::to_value(run.config).map_err(|e| CliError::Io(e.to_string()))?,
            "notes": run.notes,
            "columns": columns,
            "rows": run.table.rows,
            "results": run.results,
        });
        let text =
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(p, text + "\n")
            .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}
