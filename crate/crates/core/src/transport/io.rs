//! Point-cloud CSV: a header naming the coordinate columns (any names,
//! e.g. `x1,...,xn`) and an optional last `weight` column, then one atom per
//! line. Without a `weight` column the cloud is uniform.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::EmpiricalDistribution;
use crate::error::{Error, Result};

pub fn read_point_cloud(path: impl AsRef<Path>) -> Result<EmpiricalDistribution> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_point_cloud(file, &path.display().to_string())
}

pub fn parse_point_cloud(reader: impl Read, origin: &str) -> Result<EmpiricalDistribution> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::parse(format!("{origin}:1"), e.to_string()))?
        .clone();
    let names: Vec<&str> = headers.iter().collect();
    let weighted = names.last() == Some(&"weight");
    let dim = names.len() - usize::from(weighted);
    if dim == 0 {
        return Err(Error::parse(format!("{origin}:1"), "no coordinate columns"));
    }
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::parse(format!("{origin}:{line}"), e.to_string()))?;
        if record.len() != names.len() {
            return Err(Error::parse(
                format!("{origin}:{line}"),
                format!("expected {} fields, found {}", names.len(), record.len()),
            ));
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::parse(
                    format!("{origin}:{line}"),
                    format!("field {} (`{field}`) is not a number", c + 1),
                )
            })?;
            if c < dim {
                coords.push(v);
            } else {
                weights.push(v);
            }
        }
    }
    let n = coords.len() / dim;
    let points = Array2::from_shape_vec((n, dim), coords)
        .map_err(|e| Error::parse(origin, e.to_string()))?;
    if weighted {
        EmpiricalDistribution::from_unnormalized(points, Array1::from(weights))
    } else {
        EmpiricalDistribution::uniform(points)
    }
}

/// Writes with a `weight` column; values use the shortest round-trip form.
pub fn write_point_cloud(path: impl AsRef<Path>, dist: &EmpiricalDistribution) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let header: Vec<String> = (1..=dist.dim()).map(|c| format!("x{c}")).collect();
    out.push_str(&header.join(","));
    out.push_str(",weight\n");
    for (row, w) in dist.points().rows().into_iter().zip(dist.weights().iter()) {
        let fields: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&fields.join(","));
        out.push_str(&format!(",{w:?}\n"));
    }
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(path, e))
}
