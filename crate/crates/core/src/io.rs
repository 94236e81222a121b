//! File formats: comma-separated tables and the raw field binary with its JSON
//! sidecar. Every file is written once, atomically (temporary file + rename).
//! Numbers are printed with 17 significant digits so they round-trip exactly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::amplitude::SweepRow;
use crate::bessel::RadialProfile;
use crate::error::{Error, Result};
use crate::identities::PatternKind;
use crate::pattern::{CartesianField, CartesianGrid};

/// `{:.16e}`: 17 significant digits, enough for an exact `f64` round trip.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidInput, "path has no file name")))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Pretty JSON whose floats carry 17 significant digits (`1.5000000000000000e0`).
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory JSON serialisation cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

struct SigFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for SigFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(fmt_num(value).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// A table with a header row; cells are kept as text.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|v| fmt_num(*v)).collect());
    }

    /// Comma-separated text with LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}

/// Columns `R, re_A, im_A`.
pub fn profile_table(profile: &RadialProfile) -> Table {
    let mut t = Table::new(&["R", "re_A", "im_A"]);
    for (r, v) in profile.grid.nodes().into_iter().zip(&profile.values) {
        t.push_numbers(&[r, v.re, v.im]);
    }
    t
}

/// Columns `mu_hat, max_amplitude, width`; absent values are empty cells.
pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
    let mut t = Table::new(&["mu_hat", "max_amplitude", "width"]);
    for r in rows {
        t.push(vec![fmt_num(r.mu_hat), opt(r.max_amplitude), opt(r.width)]);
    }
    t
}

/// Columns `x, y, u`, row-major like the field itself.
pub fn field_table(field: &CartesianField) -> Table {
    let g = field.grid;
    let mut t = Table::new(&["x", "y", "u"]);
    for iy in 0..g.points_per_side {
        for ix in 0..g.points_per_side {
            t.push_numbers(&[g.coord(ix), g.coord(iy), field.at(ix, iy)]);
        }
    }
    t
}

/// JSON sidecar describing a field binary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub extent: f64,
    pub points_per_side: usize,
    pub epsilon: f64,
    pub pattern: PatternKind,
    pub mu: f64,
    pub nu: f64,
    /// Always `"f64-le-row-major"`.
    pub layout: String,
}

const LAYOUT: &str = "f64-le-row-major";

/// Sidecar path for a field binary: same stem, extension `json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Writes the little-endian binary at `path` and its sidecar next to it.
pub fn write_field(path: &Path, field: &CartesianField) -> Result<()> {
    let header = FieldHeader {
        extent: field.grid.extent,
        points_per_side: field.grid.points_per_side,
        epsilon: field.epsilon,
        pattern: field.pattern,
        mu: field.mu,
        nu: field.nu,
        layout: LAYOUT.into(),
    };
    let bytes: Vec<u8> = field.values.iter().flat_map(|v| v.to_le_bytes()).collect();
    write_atomic(path, &bytes)?;
    write_atomic(&sidecar_path(path), to_json_string(&header).as_bytes())
}

/// Reads a field written by [`write_field`], validating size and contents.
pub fn read_field(path: &Path) -> Result<CartesianField> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side)?;
    let header: FieldHeader =
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", side.display())))?;
    if header.layout != LAYOUT {
        return Err(Error::Format(format!("unsupported layout {:?}", header.layout)));
    }
    let grid = CartesianGrid::new(header.extent, header.points_per_side)
        .map_err(|e| Error::Format(format!("{}: {e}", side.display())))?;
    let bytes = fs::read(path)?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::Format(format!(
            "{}: {} bytes, expected {} for a {}² grid",
            path.display(),
            bytes.len(),
            8 * grid.len(),
            grid.points_per_side
        )));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    CartesianField::new(grid, values, header.epsilon, header.pattern, header.mu, header.nu)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::RadialGrid;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, -1.0 / 3.0, 8.0 / 135.0, 1e-300, f64::MAX, 0.0] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_num(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn json_floats_have_seventeen_digits() {
        let text = to_json_string(&serde_json::json!({"a": 0.1, "b": [1, 2.5], "c": null}));
        assert!(text.contains("\"a\": 1.0000000000000001e-1"), "{text}");
        assert!(text.contains("2.5000000000000000e0"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
        assert_eq!(back["b"][0].as_i64(), Some(1));
    }

    #[test]
    fn csv_layout() {
        let p = RadialProfile::from_fn(RadialGrid::new(0.0, 1.0, 2).unwrap(), "t", |r| 2.0 * r).unwrap();
        let csv = profile_table(&p).to_csv();
        assert_eq!(
            csv,
            "R,re_A,im_A\n0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0\n\
             1.0000000000000000e0,2.0000000000000000e0,0.0000000000000000e0\n"
        );
        let rows = [SweepRow { mu_hat: 0.5, max_amplitude: None, width: None }];
        assert!(sweep_table(&rows).to_csv().ends_with("5.0000000000000000e-1,,\n"));
    }

    #[test]
    fn field_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let g = CartesianGrid::with_quarter_pi_spacing(8).unwrap();
        let mut f = CartesianField::from_fn(g, PatternKind::Rotated { alpha: 0.2 }, |x, y| x * y - 0.1);
        f.epsilon = 0.05;
        f.mu = 0.01;
        write_field(&path, &f).unwrap();
        assert_eq!(read_field(&path).unwrap(), f);
        let names: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 2, "no temporary files left behind: {names:?}");

        fs::write(&path, [0u8; 12]).unwrap();
        assert!(matches!(read_field(&path), Err(Error::Format(_))));
        fs::write(sidecar_path(&path), "{not json").unwrap();
        assert!(matches!(read_field(&path), Err(Error::Format(_))));
        assert!(matches!(read_field(&dir.path().join("missing.bin")), Err(Error::Io(_))));
    }

    #[test]
    fn non_finite_binary_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let g = CartesianGrid::with_quarter_pi_spacing(4).unwrap();
        write_field(&path, &CartesianField::zeros(g, PatternKind::Hexagon)).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[..8].copy_from_slice(&f64::NAN.to_le_bytes());
        fs::write(&path, bytes).unwrap();
        assert!(matches!(read_field(&path), Err(Error::Format(_))));
    }
}
