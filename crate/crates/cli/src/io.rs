//! Matrix ingestion and serialization.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! save followed by a load reproduces every value bit for bit.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use icc_core::consensus::ConsensusMatrix;
use icc_core::data_model::{Clustering, CsrMatrix, DataMatrix, Storage};
use nalgebra::DMatrix;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    DenseCsv,
    LabeledCsv,
    MatrixMarket,
}

impl InputFormat {
    pub fn id(self) -> &'static str {
        match self {
            Self::DenseCsv => "dense-csv",
            Self::LabeledCsv => "labeled-csv",
            Self::MatrixMarket => "matrix-market",
        }
    }

    /// `.mtx` files are matrix-market, anything else dense CSV.
    pub fn infer(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("mtx") => Self::MatrixMarket,
            _ => Self::DenseCsv,
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for InputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dense-csv" | "csv" => Ok(Self::DenseCsv),
            "labeled-csv" => Ok(Self::LabeledCsv),
            "matrix-market" | "mtx" => Ok(Self::MatrixMarket),
            other => Err(CliError::config(format!(
                "unknown format {other:?} (expected dense-csv, labeled-csv or matrix-market)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedMatrix {
    pub data: DataMatrix,
    pub truth: Option<Clustering>,
}

/// Reads `path` as `format`. Matrix-market files whose comments declare a
/// term-document orientation are transposed so rows are objects; `transpose`
/// flips the orientation of any format.
pub fn load_matrix(path: &Path, format: InputFormat, transpose: bool) -> Result<LoadedMatrix> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let name = path.display().to_string();
    let reader = BufReader::new(file);
    let (data, truth) = match format {
        InputFormat::DenseCsv => (read_csv(reader, &name, false)?.0, None),
        InputFormat::LabeledCsv => {
            let (data, truth) = read_csv(reader, &name, true)?;
            (data, truth)
        }
        InputFormat::MatrixMarket => {
            let mm = read_matrix_market(reader, &name)?;
            let data = if mm.term_document {
                mm.data.transpose()?
            } else {
                mm.data
            };
            (data, None)
        }
    };
    let data = if transpose { data.transpose()? } else { data };
    if let Some(t) = &truth {
        if t.len() != data.nrows() {
            return Err(CliError::config(format!(
                "{name}: {} labels for {} objects after transposing",
                t.len(),
                data.nrows()
            )));
        }
    }
    Ok(LoadedMatrix { data, truth })
}

/// Parses comma-separated rows. A first line with a non-numeric cell is a
/// header. With `labeled`, the last column is a class label of any text.
pub fn read_csv<R: Read>(reader: R, source_name: &str, labeled: bool) -> Result<(DataMatrix, Option<Clustering>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let parse_err = |line: u64, reason: String| CliError::Parse {
        source_name: source_name.to_string(),
        line,
        reason,
    };

    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut width: Option<usize> = None;
    let mut first = true;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, csv::Position::line);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, csv::Position::line);
        let numeric_len = if labeled {
            record.len().saturating_sub(1)
        } else {
            record.len()
        };
        let numeric = || record.iter().take(numeric_len);
        if first {
            first = false;
            if numeric().any(|cell| cell.parse::<f64>().is_err()) {
                continue;
            }
        }
        if numeric_len == 0 {
            return Err(parse_err(line, "row has no numeric columns".into()));
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(parse_err(
                    line,
                    format!("ragged row: expected {w} fields, found {}", record.len()),
                ));
            }
            Some(_) => {}
        }
        for (c, cell) in numeric().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, format!("column {}: {cell:?} is not a number", c + 1)))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("column {}: {cell:?} is not finite", c + 1)));
            }
            values.push(v);
        }
        if labeled {
            labels.push(record[numeric_len].to_string());
        }
    }
    let Some(width) = width else {
        return Err(parse_err(0, "no data rows".into()));
    };
    let m = if labeled { width - 1 } else { width };
    let n = values.len() / m;
    let data = DataMatrix::from_dense(DMatrix::from_row_slice(n, m, &values))?;
    let truth = if labeled {
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        Some(Clustering::from_labels(&refs)?)
    } else {
        None
    };
    Ok((data, truth))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixMarket {
    pub data: DataMatrix,
    /// A comment line mentions `term-document`: columns are the objects.
    pub term_document: bool,
}

/// Parses the `coordinate` (real, integer or pattern; general or symmetric)
/// and `array` (real or integer, general) matrix-market layouts. Coordinate
/// files load as sparse storage, arrays as dense.
pub fn read_matrix_market<R: BufRead>(reader: R, source_name: &str) -> Result<MatrixMarket> {
    let err = |line: usize, reason: String| CliError::Parse {
        source_name: source_name.to_string(),
        line: line as u64,
        reason,
    };
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<Option<(usize, String)>> {
        match lines.next() {
            None => Ok(None),
            Some((i, Ok(l))) => Ok(Some((i, l))),
            Some((i, Err(e))) => Err(err(i, format!("reading {what}: {e}"))),
        }
    };

    let (_, banner) = next("banner")?.ok_or_else(|| err(1, "empty file".into()))?;
    let fields: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(err(1, format!("not a matrix-market banner: {banner:?}")));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        f => return Err(err(1, format!("unsupported layout {f:?}"))),
    };
    let pattern = match fields[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" if coordinate => true,
        f => return Err(err(1, format!("unsupported field {f:?}"))),
    };
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" if coordinate => true,
        s => return Err(err(1, format!("unsupported symmetry {s:?}"))),
    };

    let mut term_document = false;
    let (size_line, size) = loop {
        let (i, l) = next("size line")?.ok_or_else(|| err(1, "missing size line".into()))?;
        let t = l.trim();
        if let Some(comment) = t.strip_prefix('%') {
            term_document |= comment.to_ascii_lowercase().contains("term-document");
        } else if !t.is_empty() {
            break (i, t.to_string());
        }
    };
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|f| f.parse().map_err(|_| err(size_line, format!("bad size field {f:?}"))))
        .collect::<Result<_>>()?;
    let expected_fields = if coordinate { 3 } else { 2 };
    if dims.len() != expected_fields {
        return Err(err(
            size_line,
            format!("expected {expected_fields} size fields, found {}", dims.len()),
        ));
    }
    let (nrows, ncols) = (dims[0], dims[1]);
    if symmetric && nrows != ncols {
        return Err(err(size_line, "symmetric matrix must be square".into()));
    }
    let count = if coordinate { dims[2] } else { nrows * ncols };

    let number = |line: usize, f: &str| -> Result<f64> {
        let v: f64 = f.parse().map_err(|_| err(line, format!("{f:?} is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(err(line, format!("{f:?} is not finite")))
        }
    };
    let mut triplets = Vec::with_capacity(if coordinate { count } else { 0 });
    let mut dense = Vec::with_capacity(if coordinate { 0 } else { count });
    let mut last_line = size_line;
    while let Some((i, l)) = next("entry")? {
        let t = l.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        last_line = i;
        let seen = if coordinate { triplets.len() } else { dense.len() };
        if seen == count {
            return Err(err(i, format!("more than the declared {count} entries")));
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if coordinate {
            let want = if pattern { 2 } else { 3 };
            if f.len() != want {
                return Err(err(i, format!("expected {want} fields, found {}", f.len())));
            }
            let index = |s: &str, bound: usize| -> Result<usize> {
                match s.parse::<usize>() {
                    Ok(v) if (1..=bound).contains(&v) => Ok(v - 1),
                    _ => Err(err(i, format!("index {s:?} outside 1..={bound}"))),
                }
            };
            let (r, c) = (index(f[0], nrows)?, index(f[1], ncols)?);
            let v = if pattern { 1.0 } else { number(i, f[2])? };
            if symmetric && c > r {
                return Err(err(i, "symmetric files list the lower triangle only".into()));
            }
            triplets.push((r, c, v));
        } else {
            if f.len() != 1 {
                return Err(err(i, format!("expected 1 field, found {}", f.len())));
            }
            dense.push(number(i, f[0])?);
        }
    }
    let seen = if coordinate { triplets.len() } else { dense.len() };
    if seen != count {
        return Err(err(last_line, format!("declared {count} entries, found {seen}")));
    }

    let data = if coordinate {
        if symmetric {
            let mirrored: Vec<_> = triplets
                .iter()
                .filter(|t| t.0 != t.1)
                .map(|&(r, c, v)| (c, r, v))
                .collect();
            triplets.extend(mirrored);
        }
        DataMatrix::from_sparse(CsrMatrix::from_triplets(nrows, ncols, triplets)?)?
    } else {
        DataMatrix::from_dense(DMatrix::from_column_slice(nrows, ncols, &dense))?
    };
    Ok(MatrixMarket { data, term_document })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

/// Writes with `write`, mapping I/O failures to `path`.
pub(crate) fn write_file(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    write(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| CliError::io(path, e))
}

/// One row per object; with `labels`, a trailing label column.
pub fn write_csv(w: &mut dyn Write, x: &DataMatrix, labels: Option<&[usize]>) -> std::io::Result<()> {
    let d = x.dense();
    for r in 0..d.nrows() {
        let mut cells: Vec<String> = d.row(r).iter().map(|v| format!("{v:?}")).collect();
        if let Some(l) = labels {
            cells.push(l[r].to_string());
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Sparse storage is written as `coordinate`, dense as column-major `array`.
pub fn write_matrix_market(w: &mut dyn Write, x: &DataMatrix) -> std::io::Result<()> {
    match x.storage() {
        Storage::Sparse(s) => {
            writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
            writeln!(w, "{} {} {}", s.nrows(), s.ncols(), s.nnz())?;
            for (r, c, v) in s.triplets() {
                writeln!(w, "{} {} {v:?}", r + 1, c + 1)?;
            }
        }
        Storage::Dense(d) => {
            writeln!(w, "%%MatrixMarket matrix array real general")?;
            writeln!(w, "{} {}", d.nrows(), d.ncols())?;
            for v in d.iter() {
                writeln!(w, "{v:?}")?;
            }
        }
    }
    Ok(())
}

/// Lower triangle of the counts as a symmetric integer coordinate matrix.
pub fn write_consensus(w: &mut dyn Write, cm: &ConsensusMatrix) -> std::io::Result<()> {
    let counts = cm.counts();
    let n = cm.n();
    let entries: Vec<(usize, usize, u32)> = (0..n)
        .flat_map(|c| (c..n).map(move |r| (r, c)))
        .filter(|&(r, c)| counts[(r, c)] > 0)
        .map(|(r, c)| (r, c, counts[(r, c)]))
        .collect();
    writeln!(w, "%%MatrixMarket matrix coordinate integer symmetric")?;
    writeln!(w, "% consensus counts: total={} tau={:?}", cm.total(), cm.tau_applied())?;
    writeln!(w, "{n} {n} {}", entries.len())?;
    for (r, c, v) in entries {
        writeln!(w, "{} {} {v}", r + 1, c + 1)?;
    }
    Ok(())
}

/// Writes `x` to `path` in `format`; labeled CSV needs `labels`.
pub fn save_matrix(path: &Path, x: &DataMatrix, format: InputFormat, labels: Option<&Clustering>) -> Result<()> {
    match format {
        InputFormat::DenseCsv => write_file(path, |w| write_csv(w, x, None)),
        InputFormat::LabeledCsv => {
            let labels = labels.ok_or_else(|| CliError::config("labeled-csv output needs labels"))?;
            write_file(path, |w| write_csv(w, x, Some(labels.labels())))
        }
        InputFormat::MatrixMarket => write_file(path, |w| write_matrix_market(w, x)),
    }
}
