//! Artifact files: a plain CSV table whose first line is `# ` followed by a
//! compact JSON header.
//!
//! Numbers are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` and makes identical runs byte-identical. The header
//! always carries the hash of the run configuration that produced the file.

use crate::error::{IstError, Result};
use crate::grid::{SpatialGrid, SpectralGrid};
use crate::reconstruct::FieldState;
use crate::rhp::BCSolution;
use crate::scattering::ScatteringData;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

/// JSON header of an artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    /// What the table holds, e.g. `"scattering"` or `"field_x"`.
    pub kind: String,
    /// SHA-256 of the run configuration.
    pub config_hash: String,
    pub version: String,
    /// Column names, in order.
    pub columns: Vec<String>,
    /// Kind-specific metadata (grids, times, diagnostics).
    pub meta: Value,
}

impl Header {
    pub fn new(kind: &str, config_hash: &str, columns: &[&str], meta: Value) -> Self {
        Header {
            kind: kind.to_string(),
            config_hash: config_hash.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            meta,
        }
    }
}

/// A table read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Header,
    /// `columns[j][i]` is row `i` of column `j`.
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    /// The column called `name`.
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header.columns.iter().position(|c| c == name).map(|j| self.columns[j].as_slice())
    }
}

/// Fixed 17-significant-digit formatting.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `dir/<stem>.csv`; all columns must have the same length.
pub fn write_table(dir: &Path, stem: &str, header: &Header, columns: &[Vec<f64>]) -> Result<PathBuf> {
    if header.columns.len() != columns.len() {
        return Err(IstError::GridMismatch(format!(
            "{} column names for {} columns in {stem}",
            header.columns.len(),
            columns.len()
        )));
    }
    let rows = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != rows) {
        return Err(IstError::GridMismatch(format!("columns of {stem} differ in length")));
    }
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}.csv"));
    let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(file, "# {}", serde_json::to_string(header)?)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&header.columns)?;
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| format_value(c[i])))?;
    }
    w.flush()?;
    Ok(path)
}

/// Reads a table written by [`write_table`].
pub fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path)?;
    let (first, body) = text.split_once('\n').unwrap_or((&text, ""));
    let json = first
        .strip_prefix("# ")
        .ok_or_else(|| IstError::Config(format!("{} has no JSON header line", path.display())))?;
    let header: Header = serde_json::from_str(json)?;
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let names: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if names != header.columns {
        return Err(IstError::Config(format!("{}: CSV columns {names:?} disagree with header", path.display())));
    }
    let mut columns = vec![Vec::new(); names.len()];
    for rec in r.records() {
        for (j, field) in rec?.iter().enumerate() {
            let v = field
                .trim()
                .parse::<f64>()
                .map_err(|e| IstError::Config(format!("{}: bad number {field:?}: {e}", path.display())))?;
            columns[j].push(v);
        }
    }
    Ok(Table { header, columns })
}

/// Reads `m₀` from a CSV with columns `x,m` on a uniform, increasing grid
/// (lines starting with `#` are ignored).
pub fn read_profile_csv(path: &Path) -> Result<(SpatialGrid, Vec<f64>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_path(path)?;
    let names: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let col = |name: &str| {
        names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| IstError::Config(format!("{}: missing column {name:?}", path.display())))
    };
    let (ix, im) = (col("x")?, col("m")?);
    let (mut xs, mut ms) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        let parse = |j: usize| -> Result<f64> {
            rec.get(j)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| IstError::Config(format!("{}: bad row {:?}", path.display(), rec)))
        };
        xs.push(parse(ix)?);
        ms.push(parse(im)?);
    }
    if xs.len() < 2 {
        return Err(IstError::Config(format!("{}: need at least 2 samples", path.display())));
    }
    let grid = SpatialGrid::new(xs[0], xs[xs.len() - 1], xs.len())?;
    let h = grid.spacing();
    if let Some(i) = (0..xs.len()).find(|&i| (xs[i] - grid.node(i)).abs() > 1e-9 * h.max(1.0)) {
        return Err(IstError::GridMismatch(format!(
            "{}: x is not uniform (row {i}: {} vs {})",
            path.display(),
            xs[i],
            grid.node(i)
        )));
    }
    Ok((grid, ms))
}

fn grid_meta(g: &SpatialGrid) -> Value {
    json!({ "lo": g.lo, "hi": g.hi, "n": g.n })
}

/// Scattering data on the `k` grid: `k, Re ρ, Im ρ, Re a, Im a, Re b, Im b`
/// with `a`, `b` taken at `z₊(k)`.
pub fn write_scattering(
    dir: &Path,
    stem: &str,
    hash: &str,
    sd: &ScatteringData,
    grid: &SpectralGrid,
    meta: Value,
) -> Result<PathBuf> {
    let n = grid.n;
    let plus = |v: &[num_complex::Complex64], f: fn(&num_complex::Complex64) -> f64| -> Vec<f64> {
        v[n..].iter().map(f).collect()
    };
    let columns = vec![
        grid.k_nodes.clone(),
        sd.rho.iter().map(|v| v.re).collect(),
        sd.rho.iter().map(|v| v.im).collect(),
        plus(&sd.a_vals, |v| v.re),
        plus(&sd.a_vals, |v| v.im),
        plus(&sd.b_vals, |v| v.re),
        plus(&sd.b_vals, |v| v.im),
    ];
    let mut full = json!({
        "k_max": sd.k_max,
        "n_k": sd.n_k,
        "discrete": sd.discrete,
        "resonance_margin": sd.resonance_margin,
        "rho_norms": sd.rho_norms,
    });
    merge(&mut full, meta);
    let header = Header::new("scattering", hash, &["k", "rho_re", "rho_im", "a_re", "a_im", "b_re", "b_im"], full);
    write_table(dir, stem, &header, &columns)
}

/// A [`FieldState`] as two tables: `<stem>_y.csv` (`y, q, m_y, x`) and
/// `<stem>_x.csv` (`x, m, u, u_x`).
pub fn write_field(dir: &Path, stem: &str, hash: &str, f: &FieldState, meta: Value) -> Result<[PathBuf; 2]> {
    let mut full = json!({
        "t": f.t,
        "y_grid": grid_meta(&f.y_grid),
        "x_grid": grid_meta(&f.x_grid),
        "diagnostics": f.diagnostics,
    });
    merge(&mut full, meta);
    let hy = Header::new("field_y", hash, &["y", "q", "m", "x"], full.clone());
    let py = write_table(
        dir,
        &format!("{stem}_y"),
        &hy,
        &[f.y_grid.samples(), f.q_y.clone(), f.m_y.clone(), f.x_of_y.clone()],
    )?;
    let hx = Header::new("field_x", hash, &["x", "m", "u", "ux"], full);
    let px = write_table(
        dir,
        &format!("{stem}_x"),
        &hx,
        &[f.x_grid.samples(), f.m_x.clone(), f.u_x_frame.clone(), f.ux_x_frame.clone()],
    )?;
    Ok([py, px])
}

/// Beals–Coifman density and solver residual for one `(y, t)`: columns
/// `z, Re μ₁₁, Im μ₁₁, …, Re μ₂₂, Im μ₂₂`.
pub fn write_mu(dir: &Path, stem: &str, hash: &str, grid: &SpectralGrid, sol: &BCSolution) -> Result<PathBuf> {
    let mut columns = vec![grid.z.clone()];
    for row in &sol.mu {
        for entry in row {
            columns.push(entry.iter().map(|v| v.re).collect());
            columns.push(entry.iter().map(|v| v.im).collect());
        }
    }
    let meta = json!({
        "y": sol.phase.y,
        "t": sol.phase.t,
        "side": format!("{:?}", sol.side),
        "method": sol.method,
        "iterations": sol.iterations,
        "residual": sol.residual,
        "trace": sol.trace,
        "bounds": sol.bounds,
    });
    let names = ["z", "mu11_re", "mu11_im", "mu12_re", "mu12_im", "mu21_re", "mu21_im", "mu22_re", "mu22_im"];
    write_table(dir, stem, &Header::new("mu", hash, &names, meta), &columns)
}

/// Writes `value` as pretty JSON to `dir/<name>.json`, with `config_hash`
/// added at the top level.
pub fn write_json(dir: &Path, name: &str, hash: &str, value: Value) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut doc = json!({ "config_hash": hash, "version": env!("CARGO_PKG_VERSION") });
    merge(&mut doc, value);
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(path)
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cols = vec![vec![0.1, -1.0 / 3.0, 1e-300], vec![f64::MAX, 2.0, -0.0]];
        let h = Header::new("test", "abc", &["a", "b"], json!({"t": 0.5}));
        let p = write_table(dir.path(), "t", &h, &cols).unwrap();
        let t = read_table(&p).unwrap();
        assert_eq!(t.header, h);
        assert_eq!(t.columns, cols);
        assert_eq!(t.column("b").unwrap()[1], 2.0);
        assert!(write_table(dir.path(), "bad", &h, &cols[..1]).is_err());
    }

    #[test]
    fn profile_csv_requires_uniform_grid() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("g.csv");
        let rows: String = (0..17).map(|i| format!("{},{}\n", -1.0 + 0.125 * i as f64, 0.01 * i as f64)).collect();
        std::fs::write(&good, format!("# comment\nx,m\n{rows}")).unwrap();
        let (g, m) = read_profile_csv(&good).unwrap();
        assert_eq!((g.lo, g.hi, g.n), (-1.0, 1.0, 17));
        assert_eq!(m[3], 0.03);
        let bad = dir.path().join("b.csv");
        std::fs::write(&bad, format!("x,m\n{}", rows.replacen("-0.875,", "-0.8,", 1))).unwrap();
        assert!(matches!(read_profile_csv(&bad), Err(IstError::GridMismatch(_))));
    }
}
