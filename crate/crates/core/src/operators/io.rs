//! Directory layout for a serialized instance:
//!
//! ```text
//! ensemble.csv   m lines of n comma-separated values
//! b.csv          m lines, one value each
//! x.csv          optional, n lines
//! meta.txt       key=value lines (m, n, generator, seed, image_height, image_width)
//! ```
//!
//! Floats are written with 17 significant digits so they parse back bit-exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::{GroundTruth, Instance, InstanceMeta, MeasurementEnsemble, Observations};
use crate::error::{Error, Result};

pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut out = String::with_capacity(m.len() * 24);
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_vector_csv(path: &Path, v: &DVector<f64>) -> Result<()> {
    let mut out = String::with_capacity(v.len() * 24);
    for &x in v.iter() {
        let _ = writeln!(out, "{}", format_f64(x));
    }
    fs::write(path, out)?;
    Ok(())
}

fn parse_cell(cell: &str, path: &Path, line: usize) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|e| {
        Error::Parse(format!(
            "{}:{}: bad number {cell:?}: {e}",
            path.display(),
            line + 1
        ))
    })
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|c| parse_cell(c, path, line_no))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "{}:{}: expected {} columns, found {}",
                    path.display(),
                    line_no + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.into_iter().flatten(),
    ))
}

pub fn read_vector_csv(path: &Path) -> Result<DVector<f64>> {
    let text = fs::read_to_string(path)?;
    let values = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_cell(l, path, i))
        .collect::<Result<Vec<f64>>>()?;
    Ok(DVector::from_vec(values))
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn read_key_values(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_key_values(&fs::read_to_string(path)?)
}

pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn write_instance(dir: &Path, instance: &Instance) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix_csv(&dir.join("ensemble.csv"), instance.ensemble.matrix())?;
    write_vector_csv(&dir.join("b.csv"), instance.b.values())?;
    let x_path = dir.join("x.csv");
    match &instance.x {
        Some(x) => write_vector_csv(&x_path, x.values())?,
        None if x_path.exists() => fs::remove_file(&x_path)?,
        None => {}
    }
    let mut meta = String::new();
    let _ = writeln!(meta, "m={}", instance.ensemble.m());
    let _ = writeln!(meta, "n={}", instance.ensemble.n());
    let _ = writeln!(meta, "generator={}", instance.meta.generator);
    if let Some(seed) = instance.meta.seed {
        let _ = writeln!(meta, "seed={seed}");
    }
    if let Some((h, w)) = instance.meta.image_dims {
        let _ = writeln!(meta, "image_height={h}");
        let _ = writeln!(meta, "image_width={w}");
    }
    fs::write(dir.join("meta.txt"), meta)?;
    Ok(())
}

fn parse_usize(map: &BTreeMap<String, String>, key: &str) -> Result<Option<usize>> {
    map.get(key)
        .map(|v| {
            v.parse::<usize>()
                .map_err(|e| Error::Parse(format!("meta key {key}: {e}")))
        })
        .transpose()
}

pub fn read_instance(dir: &Path) -> Result<Instance> {
    let meta_map = read_key_values(&dir.join("meta.txt"))?;
    let ensemble = MeasurementEnsemble::new(read_matrix_csv(&dir.join("ensemble.csv"))?)?;
    if let Some(m) = parse_usize(&meta_map, "m")? {
        crate::error::check_dim("meta m", m, ensemble.m())?;
    }
    if let Some(n) = parse_usize(&meta_map, "n")? {
        crate::error::check_dim("meta n", n, ensemble.n())?;
    }
    let b = Observations::new(read_vector_csv(&dir.join("b.csv"))?)?;
    let x_path = dir.join("x.csv");
    let x = if x_path.exists() {
        Some(GroundTruth::new(read_vector_csv(&x_path)?)?)
    } else {
        None
    };
    let seed = meta_map
        .get("seed")
        .map(|v| {
            v.parse::<u64>()
                .map_err(|e| Error::Parse(format!("meta key seed: {e}")))
        })
        .transpose()?;
    let image_dims = match (
        parse_usize(&meta_map, "image_height")?,
        parse_usize(&meta_map, "image_width")?,
    ) {
        (Some(h), Some(w)) => Some((h, w)),
        _ => None,
    };
    Instance::new(
        ensemble,
        b,
        x,
        InstanceMeta {
            generator: meta_map.get("generator").cloned().unwrap_or_default(),
            seed,
            image_dims,
        },
    )
}
