//! File exports: exchangeogram SVG and posterior density curves.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Write as _;
use std::path::Path;

use crate::cluster::ClusterAssignment;
use crate::error::{MemError, Result};
use crate::numerics::sample::kde_curve;
use crate::summary::MemFit;

pub const DENSITY_GRID_POINTS: usize = 512;

const CELL: f64 = 64.0;
const CHAR_WIDTH: f64 = 7.5;
/// Color ramp end points for 0 and 1.
const LOW_RGB: [f64; 3] = [247.0, 251.0, 255.0];
const HIGH_RGB: [f64; 3] = [8.0, 48.0, 107.0];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn ramp(value: f64) -> String {
    let t = value.clamp(0.0, 1.0);
    let c: Vec<u8> = (0..3).map(|i| (LOW_RGB[i] + t * (HIGH_RGB[i] - LOW_RGB[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Lower-triangle heat map of a symmetric matrix with two-decimal cell labels.
pub fn exchangeogram_svg(matrix: &[Vec<f64>], names: &[String]) -> Result<String> {
    let j = matrix.len();
    if names.len() != j || matrix.iter().any(|row| row.len() != j) {
        return Err(MemError::InvalidConfig("matrix and labels do not match".into()));
    }
    for r in 0..j {
        for c in 0..r {
            if matrix[r][c] != matrix[c][r] {
                return Err(MemError::InvalidConfig("exchangeogram matrix must be symmetric".into()));
            }
        }
    }
    let longest = names.iter().map(|n| n.chars().count()).max().unwrap_or(0) as f64;
    let left = 16.0 + longest * CHAR_WIDTH;
    let top = 16.0;
    let bottom = 16.0 + longest * CHAR_WIDTH * 0.75;
    let width = left + j as f64 * CELL + 16.0;
    let height = top + j as f64 * CELL + bottom;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    for r in 0..j {
        let y = top + r as f64 * CELL;
        let _ = writeln!(
            svg,
            r#"  <text x="{}" y="{}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            left - 6.0,
            y + CELL / 2.0,
            escape(&names[r])
        );
        for c in 0..=r {
            let x = left + c as f64 * CELL;
            let v = matrix[r][c];
            let ink = if v > 0.5 { "#ffffff" } else { "#000000" };
            let _ = writeln!(
                svg,
                r##"  <rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}" stroke="#ffffff"/>"##,
                ramp(v)
            );
            let _ = writeln!(
                svg,
                r#"  <text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" fill="{ink}">{v:.2}</text>"#,
                x + CELL / 2.0,
                y + CELL / 2.0
            );
        }
    }
    let base = top + j as f64 * CELL + 6.0;
    for (c, name) in names.iter().enumerate() {
        let x = left + c as f64 * CELL + CELL / 2.0;
        let _ = writeln!(
            svg,
            r#"  <text x="{x}" y="{base}" text-anchor="end" dominant-baseline="hanging" transform="rotate(-45 {x} {base})">{}</text>"#,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_exchangeogram(matrix: &[Vec<f64>], names: &[String], path: &Path) -> Result<()> {
    let svg = exchangeogram_svg(matrix, names)?;
    File::create(path)?.write_all(svg.as_bytes())?;
    Ok(())
}

/// Density curves of every basket and cluster as CSV rows
/// `entity_type,entity_name,x,density`.
pub fn densities_csv(fit: &MemFit, clusters: &ClusterAssignment) -> Result<Vec<u8>> {
    let draws = fit.pi_draws();
    let mut entities: Vec<(&str, &str, Vec<f64>)> = fit
        .data
        .names()
        .iter()
        .zip(draws)
        .map(|(name, d)| ("basket", name.as_str(), d.clone()))
        .collect();
    for (label, block) in clusters.labels.iter().zip(&clusters.clusters) {
        let pooled = block.iter().flat_map(|&b| draws[b].iter().copied()).collect();
        entities.push(("cluster", label.as_str(), pooled));
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["entity_type", "entity_name", "x", "density"]).map_err(csv_io)?;
    for (kind, name, samples) in &entities {
        for (x, density) in kde_curve(samples, DENSITY_GRID_POINTS)? {
            writer.write_record([*kind, *name, &x.to_string(), &density.to_string()]).map_err(csv_io)?;
        }
    }
    writer.into_inner().map_err(|e| MemError::Io(e.into_error()))
}

fn csv_io(err: csv::Error) -> MemError {
    MemError::Io(std::io::Error::other(err))
}

pub fn emit_densities(fit: &MemFit, clusters: &ClusterAssignment, path: &Path) -> Result<()> {
    let bytes = densities_csv(fit, clusters)?;
    File::create(path)?.write_all(&bytes)?;
    Ok(())
}
