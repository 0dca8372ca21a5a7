//! Measure files: CSV with header `x1,...,xd,weight`, one atom per row.
//! Grid measures carry a JSON sidecar next to the CSV (same stem, `.json`)
//! holding `{"lo": [...], "hi": [...], "cells": [...]}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{BoxDomain, DiscreteMeasure, Error, Grid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSidecar {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: Vec<usize>,
}

impl GridSidecar {
    pub fn from_grid(grid: &Grid) -> Self {
        GridSidecar {
            lo: grid.domain().lo().to_vec(),
            hi: grid.domain().hi().to_vec(),
            cells: grid.cells_per_axis().to_vec(),
        }
    }

    pub fn to_grid(&self) -> Result<Grid> {
        Grid::new(BoxDomain::new(self.lo.clone(), self.hi.clone())?, self.cells.clone())
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

fn parse_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), message: message.into() }
}

pub fn read_sidecar(path: &Path) -> Result<GridSidecar> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e.to_string()))
}

/// Reads a measure CSV; if a sidecar exists the measure is tagged with its
/// grid (and must then have one atom per cell center, in grid order).
/// Weights are renormalized when they sum to 1 within `1e-6`.
pub fn read_measure(path: &Path) -> Result<DiscreteMeasure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => io_err(path, io),
            other => parse_err(path, format!("{other:?}")),
        })?;
    let headers = reader.headers().map_err(|e| parse_err(path, e.to_string()))?.clone();
    let cols = headers.len();
    if cols < 2 || &headers[cols - 1] != "weight" {
        return Err(parse_err(path, "header must be x1,...,xd,weight"));
    }
    for (i, h) in headers.iter().take(cols - 1).enumerate() {
        if h != format!("x{}", i + 1) {
            return Err(parse_err(path, format!("unexpected column `{h}`, expected `x{}`", i + 1)));
        }
    }
    let dim = cols - 1;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, e.to_string()))?;
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(path, format!("row {}: `{field}` is not a number", row + 1)))?;
            if c < dim {
                coords.push(v);
            } else {
                weights.push(v);
            }
        }
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(parse_err(path, format!("weights sum to {total}")));
    }
    let measure = DiscreteMeasure::from_unnormalized(dim, coords, weights).map_err(|e| parse_err(path, e.to_string()))?;
    let side = sidecar_path(path);
    if side.exists() {
        let grid = read_sidecar(&side)?.to_grid()?;
        if !grid.aligned_with(&measure) {
            return Err(parse_err(path, "atoms do not match the grid described by the sidecar"));
        }
        return grid.measure(measure.weights().to_vec());
    }
    Ok(measure)
}

/// Writes the CSV (and the sidecar for grid measures).
pub fn write_measure(path: &Path, m: &DiscreteMeasure) -> Result<()> {
    let mut out = String::new();
    let header: Vec<String> = (1..=m.dim()).map(|i| format!("x{i}")).chain(["weight".to_string()]).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (x, w) in m.points().zip(m.weights()) {
        for v in x {
            out.push_str(&format_float(*v));
            out.push(',');
        }
        out.push_str(&format_float(*w));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))?;
    if let Some(g) = m.grid() {
        let side = sidecar_path(path);
        let json = serde_json::to_string(&GridSidecar::from_grid(g)).expect("sidecar serializes");
        fs::write(&side, json).map_err(|e| io_err(&side, e))?;
    }
    Ok(())
}
