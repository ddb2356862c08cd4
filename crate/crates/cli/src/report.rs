use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

/// Line-delimited JSON report: a header, then one object per line.
pub struct Report {
    out: Box<dyn Write>,
}

impl Report {
    /// Opens `path`, or standard output when `path` is `None`.
    pub fn open(path: Option<&Path>) -> io::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Report { out })
    }

    pub fn header(&mut self, command: &str, config: &RunConfig) -> io::Result<()> {
        self.record(
            "header",
            &serde_json::json!({
                "tool": env!("CARGO_PKG_NAME"),
                "version": env!("CARGO_PKG_VERSION"),
                "command": command,
                "config": config,
            }),
        )
    }

    /// Writes `body` (a struct or map) with an added `"type": kind` field.
    pub fn record(&mut self, kind: &str, body: &impl Serialize) -> io::Result<()> {
        let mut value = serde_json::to_value(body).map_err(io::Error::other)?;
        if let Value::Object(map) = &mut value {
            map.insert("type".to_string(), Value::String(kind.to_string()));
        }
        serde_json::to_writer(&mut self.out, &value).map_err(io::Error::other)?;
        self.out.write_all(b"\n")
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}
