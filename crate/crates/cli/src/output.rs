//! Output files. Numbers are written with shortest round-trip formatting so
//! re-runs compare byte for byte.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use stablecov_core::analytic::CoverageCurve;

use crate::Failure;

/// Directory that relative `--out` paths resolve against, when set.
pub const OUT_DIR_VAR: &str = "STABLECOV_OUT_DIR";

pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn resolve(out: Option<&Path>, out_dir: Option<OsString>) -> Self {
        match (out, out_dir) {
            (None, _) => Sink::Stdout,
            (Some(p), Some(dir)) if p.is_relative() => Sink::File(PathBuf::from(dir).join(p)),
            (Some(p), _) => Sink::File(p.to_path_buf()),
        }
    }

    pub fn write(&self, bytes: &[u8]) -> Result<(), Failure> {
        match self {
            Sink::Stdout => std::io::stdout()
                .lock()
                .write_all(bytes)
                .map_err(|e| Failure::Config(format!("cannot write to standard output: {e}"))),
            Sink::File(p) => {
                std::fs::write(p, bytes).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display())))
            }
        }
    }
}

/// `# meta: {json}` then `t_db,p_c` rows.
pub fn write_curve(sink: &Sink, meta: &impl Serialize, curve: &CoverageCurve) -> Result<(), Failure> {
    let meta = serde_json::to_string(meta).map_err(|e| Failure::Config(e.to_string()))?;
    let mut out = format!("# meta: {meta}\nt_db,p_c\n");
    for p in &curve.points {
        out.push_str(&format!("{:?},{:?}\n", p.t_db, p.p_c));
    }
    sink.write(out.as_bytes())
}

pub fn write_json(sink: &Sink, value: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Config(e.to_string()))?;
    text.push('\n');
    sink.write(text.as_bytes())
}
