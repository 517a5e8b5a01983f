use serde::Serialize;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// CSV writer whose first line is a version comment.
pub fn csv_writer(path: Option<&Path>, header: &[&str]) -> io::Result<csv::Writer<Box<dyn Write>>> {
    let mut w = sink(path)?;
    writeln!(w, "# slocc-mbqc {VERSION}")?;
    let mut c = csv::Writer::from_writer(w);
    c.write_record(header)?;
    Ok(c)
}

/// One JSON object per line on stderr.
pub fn log<S: Serialize>(event: &str, fields: S) {
    let line = serde_json::json!({ "event": event, "data": fields });
    eprintln!("{line}");
}

pub fn fmt(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.12e}")
    }
}
