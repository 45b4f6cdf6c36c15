//! File sinks: observable CSV and snapshot directory.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::snapshot::write_snapshot;
use super::{FieldGrid, RunSink};
use crate::observables::ObservableRecord;
use crate::Real;

/// `t,norm,energy,momentum_x[,momentum_y],width_x[,width_y],peak[,energy_imag]`.
pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
    complex_energy: bool,
}

impl<W: Write> CsvSink<W> {
    pub fn new(w: W, dim: usize, complex_energy: bool) -> io::Result<Self> {
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(ObservableRecord::<f64>::csv_header(dim, complex_energy))?;
        Ok(CsvSink { writer, complex_energy })
    }
}

impl CsvSink<BufWriter<File>> {
    pub fn create(path: &Path, dim: usize, complex_energy: bool) -> io::Result<Self> {
        Self::new(BufWriter::new(File::create(path)?), dim, complex_energy)
    }
}

impl<T: Real, W: Write> RunSink<T> for CsvSink<W> {
    fn observe(&mut self, record: &ObservableRecord<T>) -> io::Result<()> {
        self.writer.write_record(record.csv_row(self.complex_energy))?;
        Ok(())
    }

    fn finish(&mut self) -> io::Result<()> {
        self.writer.flush()
    }
}

/// Writes `snap_<index>.nlsf` files into a directory.
pub struct SnapshotSink {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl SnapshotSink {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(SnapshotSink {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

impl<T: Real> RunSink<T> for SnapshotSink {
    fn snapshot(&mut self, index: usize, t: T, field: &FieldGrid<T>) -> io::Result<()> {
        let path = self.dir.join(format!("snap_{index}.nlsf"));
        write_snapshot(BufWriter::new(File::create(&path)?), field, t)?;
        self.written.push(path);
        Ok(())
    }
}
