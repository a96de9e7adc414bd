//! Line-oriented reports: `key value` lines, then CSV tables.
//!
//! ```text
//! blockholo-report v1
//! command hull
//! config.h 0.03125
//! verdict COMPACT-LIKE
//! status pass
//! elapsed_ms 812
//! table cells
//! flat,z1_re,...
//! end table
//! ```
//!
//! Everything except `elapsed_ms` is a function of the configuration.

use std::fmt::{self, Write as _};
use std::path::Path;

use crate::error::Result;

pub const REPORT_MAGIC: &str = "blockholo-report v1";

/// Outcome carried by a report; maps onto the process exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 2,
            Status::Inconclusive => 3,
        }
    }

    /// Fail dominates inconclusive, which dominates pass.
    pub fn combine(self, other: Status) -> Status {
        match (self, other) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Inconclusive, _) | (_, Status::Inconclusive) => Status::Inconclusive,
            _ => Status::Pass,
        }
    }

    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub config: Vec<(String, String)>,
    pub entries: Vec<(String, String)>,
    pub tables: Vec<(String, String)>,
    pub status: Status,
    pub elapsed_ms: u128,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            config: Vec::new(),
            entries: Vec::new(),
            tables: Vec::new(),
            status: Status::Pass,
            elapsed_ms: 0,
        }
    }

    pub fn config(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.config.push((key.to_string(), value.to_string()));
        self
    }

    pub fn entry(&mut self, key: &str, value: impl fmt::Display) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    /// Adds a CSV table; `csv` must end with a newline.
    pub fn table(&mut self, name: &str, csv: String) -> &mut Self {
        self.tables.push((name.to_string(), csv));
        self
    }

    pub fn fold_status(&mut self, s: Status) -> &mut Self {
        self.status = self.status.combine(s);
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{REPORT_MAGIC}");
        let _ = writeln!(out, "command {}", self.command);
        for (k, v) in &self.config {
            let _ = writeln!(out, "config.{k} {v}");
        }
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} {v}");
        }
        let _ = writeln!(out, "status {}", self.status);
        let _ = writeln!(out, "elapsed_ms {}", self.elapsed_ms);
        for (name, csv) in &self.tables {
            let _ = writeln!(out, "table {name}");
            out.push_str(csv);
            let _ = writeln!(out, "end table");
        }
        out
    }

    /// The report text without the `elapsed_ms` line.
    pub fn deterministic_text(&self) -> String {
        self.to_text().lines().filter(|l| !l.starts_with("elapsed_ms ")).map(|l| format!("{l}\n")).collect()
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}
