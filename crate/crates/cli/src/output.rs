//! CSV and JSON writers. Every float is printed with 17 significant digits so it
//! parses back to the same bits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{CliError, CliResult};

pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Compact JSON whose floats go through [`fmt17`].
struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser).expect("serializing plain data cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io("create directory", dir))
}

/// Buffered output file that reports failures with its path.
pub struct OutFile {
    path: PathBuf,
    inner: BufWriter<File>,
}

impl OutFile {
    pub fn create(dir: &Path, name: &str) -> CliResult<OutFile> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(CliError::io("create", path.clone()))?;
        Ok(OutFile { path, inner: BufWriter::new(file) })
    }

    pub fn line(&mut self, text: &str) -> CliResult<()> {
        writeln!(self.inner, "{text}").map_err(CliError::io("write", self.path.clone()))
    }

    pub fn row(&mut self, values: impl IntoIterator<Item = f64>) -> CliResult<()> {
        let row: Vec<String> = values.into_iter().map(fmt17).collect();
        self.line(&row.join(","))
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.inner.flush().map_err(CliError::io("write", self.path.clone()))?;
        Ok(self.path)
    }
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> CliResult<PathBuf> {
    let mut out = OutFile::create(dir, name)?;
    out.line(&to_json(value))?;
    out.finish()
}
