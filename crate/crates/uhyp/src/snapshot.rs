//! Snapshot files.
//!
//! Binary layout (all integers and floats little-endian):
//!
//! ```text
//! magic    4 bytes  "UHYP"
//! version  u32      currently 1
//! d        u32
//! n        u32
//! points   (1+d+n) × u32   per-axis node counts
//! extents  (1+d+n) × f64   per-axis half-lengths L
//! time     f64
//! values   N × (f64 re, f64 im)   flat grid order, s axis slowest
//! ```
//!
//! The CSV alternative is plot-ready: `#`-prefixed metadata lines carrying
//! the same header fields, one header row, then one row per node with the
//! node's coordinates and the value. Binary is the fidelity format (exact
//! round trip); CSV prints shortest round-tripping decimals.
//!
//! All writes go to a temporary sibling file which is renamed into place,
//! so readers never observe a partial snapshot.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};

pub const MAGIC: [u8; 4] = *b"UHYP";
pub const VERSION: u32 = 1;

/// Most axes a snapshot may declare; guards against garbage headers.
const MAX_AXES: usize = 16;

fn atomic_write(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::SnapshotFormat(format!("{}: not a file path", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut out = BufWriter::new(File::create(&tmp)?);
        write(&mut out)?;
        out.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_binary(path: &Path, field: &Field) -> Result<()> {
    atomic_write(path, |out| {
        let grid = field.grid();
        out.write_all(&MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&(grid.d() as u32).to_le_bytes())?;
        out.write_all(&(grid.n() as u32).to_le_bytes())?;
        for &m in grid.points_per_axis() {
            out.write_all(&(m as u32).to_le_bytes())?;
        }
        for axis in 0..grid.num_axes() {
            out.write_all(&grid.extent(axis).to_le_bytes())?;
        }
        out.write_all(&field.time().to_le_bytes())?;
        for value in field.values() {
            out.write_all(&value.re.to_le_bytes())?;
            out.write_all(&value.im.to_le_bytes())?;
        }
        Ok(())
    })
}

fn read_u32(reader: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    reader.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(reader: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    reader.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub fn read_binary(path: &Path) -> Result<Field> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(Error::SnapshotFormat(format!(
            "{}: bad magic {magic:?}",
            path.display()
        )));
    }
    let version = read_u32(&mut reader)?;
    if version != VERSION {
        return Err(Error::SnapshotFormat(format!(
            "{}: unsupported version {version}",
            path.display()
        )));
    }
    let d = read_u32(&mut reader)? as usize;
    let n = read_u32(&mut reader)? as usize;
    let axes = 1 + d + n;
    if axes > MAX_AXES {
        return Err(Error::SnapshotFormat(format!(
            "{}: implausible dimensions d = {d}, n = {n}",
            path.display()
        )));
    }
    let mut points = Vec::with_capacity(axes);
    for _ in 0..axes {
        points.push(read_u32(&mut reader)? as usize);
    }
    let mut extents = Vec::with_capacity(axes);
    for _ in 0..axes {
        extents.push(read_f64(&mut reader)?);
    }
    let time = read_f64(&mut reader)?;
    let grid = GridSpec::new(d, n, extents, points)?;
    let mut values = Vec::with_capacity(grid.total_points());
    for _ in 0..grid.total_points() {
        let re = read_f64(&mut reader)?;
        let im = read_f64(&mut reader)?;
        values.push(Complex64::new(re, im));
    }
    Field::new(grid, time, values)
}

fn axis_label(grid: &GridSpec, axis: usize) -> String {
    if axis == 0 {
        "s".to_string()
    } else if axis <= grid.d() {
        format!("x{axis}")
    } else {
        format!("y{}", axis - grid.d())
    }
}

pub fn write_csv(path: &Path, field: &Field) -> Result<()> {
    atomic_write(path, |out| {
        let grid = field.grid();
        let axes = grid.num_axes();
        writeln!(out, "# d = {}", grid.d())?;
        writeln!(out, "# n = {}", grid.n())?;
        let points: Vec<String> = grid
            .points_per_axis()
            .iter()
            .map(|m| m.to_string())
            .collect();
        writeln!(out, "# points = {}", points.join(" "))?;
        let extents: Vec<String> = (0..axes).map(|a| grid.extent(a).to_string()).collect();
        writeln!(out, "# extents = {}", extents.join(" "))?;
        writeln!(out, "# time = {}", field.time())?;
        let labels: Vec<String> = (0..axes).map(|a| axis_label(grid, a)).collect();
        writeln!(out, "{},re,im", labels.join(","))?;
        let mut coords = vec![0.0; axes];
        for (flat, value) in field.values().iter().enumerate() {
            grid.node_coords_into(flat, &mut coords);
            for c in &coords {
                write!(out, "{c},")?;
            }
            writeln!(out, "{},{}", value.re, value.im)?;
        }
        Ok(())
    })
}

fn meta_value<'a>(line: &'a str, key: &str, path: &Path) -> Result<&'a str> {
    let rest = line
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|r| r.strip_prefix(key))
        .map(str::trim)
        .and_then(|r| r.strip_prefix('='))
        .map(str::trim);
    rest.ok_or_else(|| {
        Error::SnapshotFormat(format!(
            "{}: expected metadata line \"# {key} = …\", found {line:?}",
            path.display()
        ))
    })
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str, path: &Path) -> Result<Vec<T>> {
    raw.split_whitespace()
        .map(|tok| {
            tok.parse().map_err(|_| {
                Error::SnapshotFormat(format!("{}: bad {what} entry {tok:?}", path.display()))
            })
        })
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Field> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let mut next_line = || -> Result<String> {
        lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::SnapshotFormat(format!("{}: truncated file", path.display())))
    };
    let d: usize = meta_value(&next_line()?, "d", path)?
        .parse()
        .map_err(|_| Error::SnapshotFormat(format!("{}: bad d", path.display())))?;
    let n: usize = meta_value(&next_line()?, "n", path)?
        .parse()
        .map_err(|_| Error::SnapshotFormat(format!("{}: bad n", path.display())))?;
    let points: Vec<usize> =
        parse_list(meta_value(&next_line()?, "points", path)?, "points", path)?;
    let extents: Vec<f64> =
        parse_list(meta_value(&next_line()?, "extents", path)?, "extents", path)?;
    let time: f64 = meta_value(&next_line()?, "time", path)?
        .parse()
        .map_err(|_| Error::SnapshotFormat(format!("{}: bad time", path.display())))?;
    let header = next_line()?;
    if !header.ends_with("re,im") {
        return Err(Error::SnapshotFormat(format!(
            "{}: missing column header row",
            path.display()
        )));
    }
    let grid = GridSpec::new(d, n, extents, points)?;
    let axes = grid.num_axes();
    let mut values = Vec::with_capacity(grid.total_points());
    for _ in 0..grid.total_points() {
        let row = next_line()?;
        let mut fields = row.split(',');
        // Coordinate columns are derivable; skip them.
        for _ in 0..axes {
            fields.next().ok_or_else(|| {
                Error::SnapshotFormat(format!("{}: short row {row:?}", path.display()))
            })?;
        }
        let mut parse_part = |what: &str| -> Result<f64> {
            fields
                .next()
                .and_then(|tok| tok.parse().ok())
                .ok_or_else(|| {
                    Error::SnapshotFormat(format!("{}: bad {what} in row {row:?}", path.display()))
                })
        };
        let re = parse_part("re")?;
        let im = parse_part("im")?;
        values.push(Complex64::new(re, im));
    }
    Field::new(grid, time, values)
}
