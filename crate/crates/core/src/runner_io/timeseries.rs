//! Diagnostic time series as CSV, one [`DiagnosticRecord`] per row.

use super::{io_context, Result};
use crate::diagnostics::DiagnosticRecord;
use std::fs::File;
use std::path::Path;

/// Append-only writer; the header is written on creation and every row is
/// flushed as soon as it is added.
pub struct TimeseriesWriter {
    inner: csv::Writer<File>,
}

impl TimeseriesWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = io_context(File::create(path), || format!("creating {}", path.display()))?;
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        inner.write_record(DiagnosticRecord::columns())?;
        inner.flush().map_err(csv::Error::from)?;
        Ok(Self { inner })
    }

    pub fn append(&mut self, record: &DiagnosticRecord) -> Result<()> {
        self.inner.serialize(record)?;
        self.inner.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

pub fn write_timeseries(records: &[DiagnosticRecord], path: &Path) -> Result<()> {
    let mut w = TimeseriesWriter::create(path)?;
    for r in records {
        w.append(r)?;
    }
    Ok(())
}

pub fn read_timeseries(path: &Path) -> Result<Vec<DiagnosticRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != DiagnosticRecord::columns() {
        return Err(super::RunnerError::Failed(format!("{}: unexpected CSV header", path.display())));
    }
    Ok(r.deserialize().collect::<std::result::Result<Vec<DiagnosticRecord>, _>>()?)
}
