//! Output files. Every file starts with the tool version and config hash;
//! floats carry 17 significant digits so identical runs give identical bytes.

use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::plot;

pub const TOOL: &str = "cocycle-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub subcommand: String,
    pub seed: u64,
}

/// Pretty JSON with every `f64` as `{:.16e}`.
struct SciFormatter(PrettyFormatter<'static>);

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    meta: &'a Meta,
    result: &'a T,
}

pub fn to_json<T: Serialize>(meta: &Meta, result: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::new()));
    Document { meta, result }
        .serialize(&mut ser)
        .expect("in-memory serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

pub struct Writer {
    pub dir: PathBuf,
    pub meta: Meta,
    pub svg: bool,
    pub written: Vec<PathBuf>,
}

impl Writer {
    fn write(&mut self, name: &str, body: &str) -> io::Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, body)?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, stem: &str, result: &T) -> io::Result<()> {
        let body = to_json(&self.meta, result);
        self.write(&format!("{stem}.json"), &body)
    }

    /// `table` is a CSV document with its header row.
    pub fn csv(&mut self, stem: &str, table: &str) -> io::Result<()> {
        let body = format!("{}\n{table}", self.header());
        self.write(&format!("{stem}.csv"), &body)?;
        if self.svg {
            if let Some(svg) = plot::line_plot(table, stem) {
                self.write(&format!("{stem}.svg"), &svg)?;
            }
        }
        Ok(())
    }

    pub fn header(&self) -> String {
        format!(
            "# {} {} config_sha256={}",
            self.meta.tool, self.meta.version, self.meta.config_sha256
        )
    }
}

pub fn ensure_dir(dir: &Path) -> io::Result<()> {
    std::fs::create_dir_all(dir)
}
