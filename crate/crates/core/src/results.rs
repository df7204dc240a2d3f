// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

//! Result files.
//!
//! A result is a delimited text file:
//!
//! ```text
//! # decohere-results v1
//! # tool: decohere 0.1.0
//! # seed: 0
//! # ...
//! #| mode = "annealed"          <- config echo, one line per config line
//! ## records
//! path,time,trace,kinetic_energy,position_moment,mixed_moment,purity,s2_norm
//! 0,0.5,1.0,...
//! ## table predicted
//! time,kinetic_energy,...
//! ```
//!
//! Kernel snapshots go to a binary sidecar `<file>.kernels`: the magic
//! `DCHKRNL1`, a `u64` count, then per snapshot `time: f64`, `path: u64`,
//! `rows: u64`, `cols: u64` and `rows·cols` row-major `(re, im)` pairs. All
//! numbers are little-endian.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::{parse_config, RunConfig};
use crate::error::{Error, Result};
use crate::kernel::{DensityKernel, ObservableRecord};

pub const RESULTS_HEADER: &str = "# decohere-results v1";
pub const KERNELS_MAGIC: [u8; 8] = *b"DCHKRNL1";
const CONFIG_PREFIX: &str = "#| ";
const RECORDS_MARK: &str = "## records";
const TABLE_MARK: &str = "## table ";

/// Provenance block written at the top of every result.
#[derive(Clone, Debug, PartialEq)]
pub struct Metadata {
    pub tool_version: String,
    pub seed: u64,
    pub wall_clock_seconds: f64,
    pub grid_points: usize,
    pub half_width: f64,
    /// `ok`, or a short description of what failed.
    pub status: String,
    pub snapshot_count: usize,
}

impl Metadata {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecordRow {
    pub path: usize,
    pub record: ObservableRecord,
}

/// Named auxiliary table of string cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

/// Exact text form of a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub path: u64,
    pub kernel: DensityKernel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultFile {
    pub metadata: Metadata,
    pub config: RunConfig,
    pub records: Vec<RecordRow>,
    pub tables: Vec<Table>,
    pub snapshots: Vec<Snapshot>,
}

impl ResultFile {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// The record table alone, as written to disk.
    pub fn record_table(&self) -> String {
        let mut s = String::new();
        s.push_str("path,time");
        for f in ObservableRecord::FIELDS {
            s.push(',');
            s.push_str(f);
        }
        s.push('\n');
        for r in &self.records {
            s.push_str(&r.path.to_string());
            s.push(',');
            s.push_str(&fmt_f64(r.record.time));
            for v in r.record.values() {
                s.push(',');
                s.push_str(&fmt_f64(v));
            }
            s.push('\n');
        }
        s
    }

    /// Full text form (without snapshots).
    pub fn to_text(&self) -> String {
        let m = &self.metadata;
        let mut s = String::new();
        s.push_str(RESULTS_HEADER);
        s.push('\n');
        s.push_str(&format!("# tool: decohere {}\n", m.tool_version));
        s.push_str(&format!("# seed: {}\n", m.seed));
        s.push_str(&format!("# wall_clock_seconds: {}\n", fmt_f64(m.wall_clock_seconds)));
        s.push_str(&format!("# grid_points: {}\n", m.grid_points));
        s.push_str(&format!("# half_width: {}\n", fmt_f64(m.half_width)));
        s.push_str(&format!("# status: {}\n", m.status));
        s.push_str(&format!("# snapshots: {}\n", m.snapshot_count));
        for line in self.config.to_text().lines() {
            s.push_str(CONFIG_PREFIX);
            s.push_str(line);
            s.push('\n');
        }
        s.push_str(RECORDS_MARK);
        s.push('\n');
        s.push_str(&self.record_table());
        for t in &self.tables {
            s.push_str(TABLE_MARK);
            s.push_str(&t.name);
            s.push('\n');
            s.push_str(&t.columns.join(","));
            s.push('\n');
            for r in &t.rows {
                s.push_str(&r.join(","));
                s.push('\n');
            }
        }
        s
    }

    /// Writes the file and, if there are snapshots, its sidecar. Each file is
    /// written to a temporary in the same directory and renamed into place.
    pub fn write(&self, path: &Path) -> Result<()> {
        if !self.snapshots.is_empty() {
            let mut buf = Vec::new();
            write_kernels(&self.snapshots, &mut buf)?;
            write_atomic(&kernels_path(path), &buf)?;
        }
        write_atomic(path, self.to_text().as_bytes())
    }

    /// Reads a result file and its sidecar.
    pub fn read(path: &Path) -> Result<Self> {
        let f = fs::File::open(path)?;
        let mut r = parse_result(BufReader::new(f))?;
        if r.metadata.snapshot_count > 0 {
            let f = fs::File::open(kernels_path(path))?;
            r.snapshots = read_kernels(BufReader::new(f), &r.config)?;
            if r.snapshots.len() != r.metadata.snapshot_count {
                return Err(Error::Format(format!(
                    "header announces {} snapshots, sidecar holds {}",
                    r.metadata.snapshot_count,
                    r.snapshots.len()
                )));
            }
        }
        Ok(r)
    }
}

/// Sidecar path `<path>.kernels`.
pub fn kernels_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".kernels");
    PathBuf::from(s)
}

/// Sidecar path `<path>.events`.
pub fn events_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".events");
    PathBuf::from(s)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn meta_value<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix("# ")
        .and_then(|l| l.strip_prefix(key))
        .and_then(|l| l.strip_prefix(": "))
        .ok_or_else(|| Error::Format(format!("expected `# {key}: …`, got {line:?}")))
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse()
        .map_err(|e| Error::Format(format!("bad {what} {s:?}: {e}")))
}

pub fn parse_result<R: BufRead>(input: R) -> Result<ResultFile> {
    let lines: Vec<String> = input.lines().collect::<std::io::Result<_>>()?;
    let mut it = lines.iter().map(String::as_str).peekable();
    let mut next = |what: &str| -> Result<&str> {
        it.next().ok_or_else(|| Error::Format(format!("truncated before {what}")))
    };
    if next("header")? != RESULTS_HEADER {
        return Err(Error::Format("missing result header".into()));
    }
    let tool_version = meta_value(next("tool")?, "tool")?
        .strip_prefix("decohere ")
        .ok_or_else(|| Error::Format("tool line".into()))?
        .to_string();
    let seed = parse_num(meta_value(next("seed")?, "seed")?, "seed")?;
    let wall_clock_seconds = parse_num(meta_value(next("wall clock")?, "wall_clock_seconds")?, "wall clock")?;
    let grid_points = parse_num(meta_value(next("grid")?, "grid_points")?, "grid points")?;
    let half_width = parse_num(meta_value(next("half width")?, "half_width")?, "half width")?;
    let status = meta_value(next("status")?, "status")?.to_string();
    let snapshot_count = parse_num(meta_value(next("snapshots")?, "snapshots")?, "snapshot count")?;
    drop(next);

    let mut config_text = String::new();
    while let Some(l) = it.peek().and_then(|l| l.strip_prefix(CONFIG_PREFIX)) {
        config_text.push_str(l);
        config_text.push('\n');
        it.next();
    }
    let config = parse_config(&config_text)?;

    if it.next() != Some(RECORDS_MARK) {
        return Err(Error::Format("missing records section".into()));
    }
    let columns = it.next().ok_or_else(|| Error::Format("missing record columns".into()))?;
    let expected: Vec<&str> = ["path", "time"].into_iter().chain(ObservableRecord::FIELDS).collect();
    if columns.split(',').collect::<Vec<_>>() != expected {
        return Err(Error::Format(format!("unexpected record columns {columns:?}")));
    }
    let mut records = Vec::new();
    while let Some(l) = it.peek().filter(|l| !l.starts_with(TABLE_MARK)) {
        let cells: Vec<&str> = l.split(',').collect();
        if cells.len() != expected.len() {
            return Err(Error::Format(format!("record row has {} cells: {l:?}", cells.len())));
        }
        let mut v = [0.0; 6];
        for (slot, c) in v.iter_mut().zip(&cells[2..]) {
            *slot = parse_num(c, "record value")?;
        }
        records.push(RecordRow {
            path: parse_num(cells[0], "path")?,
            record: ObservableRecord::from_values(parse_num(cells[1], "time")?, v),
        });
        it.next();
    }

    let mut tables = Vec::new();
    while let Some(l) = it.next() {
        let name = l
            .strip_prefix(TABLE_MARK)
            .ok_or_else(|| Error::Format(format!("expected a table marker, got {l:?}")))?;
        let cols = it.next().ok_or_else(|| Error::Format(format!("table {name} has no columns")))?;
        let mut t = Table {
            name: name.to_string(),
            columns: cols.split(',').map(str::to_string).collect(),
            rows: Vec::new(),
        };
        while let Some(r) = it.peek().filter(|l| !l.starts_with(TABLE_MARK)) {
            let row: Vec<String> = r.split(',').map(str::to_string).collect();
            if row.len() != t.columns.len() {
                return Err(Error::Format(format!("row width mismatch in table {name}")));
            }
            t.rows.push(row);
            it.next();
        }
        tables.push(t);
    }

    Ok(ResultFile {
        metadata: Metadata {
            tool_version,
            seed,
            wall_clock_seconds,
            grid_points,
            half_width,
            status,
            snapshot_count,
        },
        config,
        records,
        tables,
        snapshots: Vec::new(),
    })
}

pub fn write_kernels<W: Write>(snapshots: &[Snapshot], mut out: W) -> Result<()> {
    out.write_all(&KERNELS_MAGIC)?;
    out.write_all(&(snapshots.len() as u64).to_le_bytes())?;
    for s in snapshots {
        let m = s.kernel.values();
        out.write_all(&s.time.to_le_bytes())?;
        out.write_all(&s.path.to_le_bytes())?;
        out.write_all(&(m.nrows() as u64).to_le_bytes())?;
        out.write_all(&(m.ncols() as u64).to_le_bytes())?;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                out.write_all(&z.re.to_le_bytes())?;
                out.write_all(&z.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

/// Reads a snapshot sidecar; kernels are placed on the grid of `config`.
pub fn read_kernels<R: Read>(mut input: R, config: &RunConfig) -> Result<Vec<Snapshot>> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if magic != KERNELS_MAGIC {
        return Err(Error::Format("bad kernel snapshot magic".into()));
    }
    let count = read_u64(&mut input)?;
    let n = config.grid.n_points();
    let mut out = Vec::new();
    for _ in 0..count {
        let time = read_f64(&mut input)?;
        let path = read_u64(&mut input)?;
        let rows = read_u64(&mut input)? as usize;
        let cols = read_u64(&mut input)? as usize;
        if rows != n || cols != n {
            return Err(Error::Format(format!("snapshot is {rows}×{cols}, grid has {n} points")));
        }
        let mut m = DMatrix::<Complex64>::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let re = read_f64(&mut input)?;
                let im = read_f64(&mut input)?;
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        out.push(Snapshot {
            time,
            path,
            kernel: DensityKernel::new(config.grid.clone(), m)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Mode;

    fn sample() -> ResultFile {
        let config = RunConfig::new(Mode::Annealed);
        let rho = config.initial_state().unwrap();
        let mut t = Table::new("extra", &["a", "b"]);
        t.push(vec!["1".into(), fmt_f64(0.1)]);
        ResultFile {
            metadata: Metadata {
                tool_version: "0.1.0".into(),
                seed: 0,
                wall_clock_seconds: 0.25,
                grid_points: 256,
                half_width: 10.0,
                status: "ok".into(),
                snapshot_count: 1,
            },
            records: vec![RecordRow {
                path: 0,
                record: rho.observables(0.0),
            }],
            tables: vec![t],
            snapshots: vec![Snapshot {
                time: 0.0,
                path: 0,
                kernel: rho,
            }],
            config,
        }
    }

    #[test]
    fn text_and_sidecar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.csv");
        let r = sample();
        r.write(&path).unwrap();
        assert_eq!(ResultFile::read(&path).unwrap(), r);
        assert!(fs::read_dir(dir.path()).unwrap().count() == 2);
    }

    #[test]
    fn sidecar_layout() {
        let r = sample();
        let mut buf = Vec::new();
        write_kernels(&r.snapshots, &mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 8 + 32 + 256 * 256 * 16);
        assert_eq!(&buf[..8], b"DCHKRNL1");
        // entry (0, 1) follows the shape and entry (0, 0)
        let z = r.snapshots[0].kernel.values()[(0, 1)];
        let off = 8 + 8 + 32 + 16;
        assert_eq!(f64::from_le_bytes(buf[off..off + 8].try_into().unwrap()), z.re);
    }

    #[test]
    fn rejects_headerless_input() {
        assert!(parse_result("path,time\n".as_bytes()).is_err());
    }
}
