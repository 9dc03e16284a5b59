//! Output assembly: deterministic headers and number formatting.
//!
//! Every file starts with a header recording version, seed, and the full
//! parameter set; the timestamp line is the only part excluded from
//! byte-for-byte reproducibility.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

pub fn fmt_num(x: f64) -> String {
    format!("{x:.12e}")
}

pub struct Report {
    buf: String,
}

impl Report {
    pub fn new(seed: u64, params: &str) -> Self {
        let mut buf = String::new();
        let _ = writeln!(buf, "# corpora {}", env!("CARGO_PKG_VERSION"));
        let ts = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let _ = writeln!(buf, "# timestamp: {ts}");
        let _ = writeln!(buf, "# seed: {seed}");
        let _ = writeln!(buf, "# params: {params}");
        Report { buf }
    }

    pub fn line(&mut self, s: &str) {
        let _ = writeln!(self.buf, "{s}");
    }

    pub fn csv_row(&mut self, fields: &[String]) {
        let _ = writeln!(self.buf, "{}", fields.join(","));
    }

    pub fn into_string(self) -> String {
        self.buf
    }

    pub fn write(self, out: Option<&Path>) -> std::io::Result<()> {
        match out {
            Some(path) => std::fs::write(path, self.buf),
            None => {
                print!("{}", self.buf);
                Ok(())
            }
        }
    }
}
