//! Plain-text emission of estimation artefacts.
//!
//! Every writer produces whitespace-separated columns preceded by a single
//! `#` header line naming them. Floating-point values are printed with 17
//! significant digits so a reader recovers them bit for bit; undefined
//! values are written as the literal `nan`.

use std::io::{self, Write};

use crate::field::{SpatialSample, VariogramModel};
use crate::graph::SensorGraph;
use crate::spectral::{to_decibels, PsdStatistics};
use crate::variogram::{StationarityDiagnostic, VariogramEstimate, VariogramStatistics};

/// 17-significant-digit decimal form of `v`, or `nan` when undefined.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn write_columns<W: Write>(out: &mut W, values: &[f64]) -> io::Result<()> {
    let row: Vec<String> = values.iter().map(|&v| format_value(v)).collect();
    writeln!(out, "{}", row.join(" "))
}

/// Vertex coordinates, one row per vertex.
pub fn write_positions<W: Write>(out: &mut W, sample: &SpatialSample) -> io::Result<()> {
    writeln!(out, "# x y")?;
    for row in sample.positions().rows() {
        write_columns(out, row.as_slice().unwrap())?;
    }
    Ok(())
}

/// Ensemble signals, one row per realization, one column per vertex.
pub fn write_signals<W: Write>(out: &mut W, ensemble: &crate::field::FieldEnsemble) -> io::Result<()> {
    let names: Vec<String> = (0..ensemble.len()).map(|i| format!("x{i}")).collect();
    writeln!(out, "# {}", names.join(" "))?;
    for row in ensemble.signals().rows() {
        write_columns(out, row.as_slice().unwrap())?;
    }
    Ok(())
}

/// Graph edges with their distances and kernel weights, `i < j`, 0-based.
pub fn write_edge_list<W: Write>(out: &mut W, graph: &SensorGraph) -> io::Result<()> {
    writeln!(out, "# i j distance weight")?;
    for e in graph.edges() {
        writeln!(
            out,
            "{} {} {} {}",
            e.i,
            e.j,
            format_value(e.distance),
            format_value(e.weight)
        )?;
    }
    Ok(())
}

/// A single estimated curve: lag centers and semivariogram values.
pub fn write_estimate<W: Write>(out: &mut W, estimate: &VariogramEstimate) -> io::Result<()> {
    writeln!(out, "# h gamma pairs")?;
    for b in 0..estimate.bins().len() {
        let value = estimate.semivariogram(b).unwrap_or(f64::NAN);
        writeln!(
            out,
            "{} {} {}",
            format_value(estimate.bins().center(b)),
            format_value(value),
            estimate.pair_count(b)
        )?;
    }
    Ok(())
}

/// Ensemble variogram statistics: mean curve with a ±1 std band.
pub fn write_statistics<W: Write>(out: &mut W, stats: &VariogramStatistics) -> io::Result<()> {
    writeln!(out, "# h mean mean_plus_std mean_minus_std")?;
    for b in 0..stats.bins().len() {
        let center = stats.bins().center(b);
        match (stats.mean(b), stats.std(b)) {
            (Some(m), Some(s)) => {
                write_columns(out, &[center, m, m + s, m - s])?;
            }
            _ => {
                write_columns(out, &[center, f64::NAN, f64::NAN, f64::NAN])?;
            }
        }
    }
    Ok(())
}

/// Model semivariogram evaluated at the given lags.
pub fn write_model_curve<W: Write>(
    out: &mut W,
    model: &VariogramModel,
    lags: &[f64],
) -> io::Result<()> {
    writeln!(out, "# h gamma")?;
    for &h in lags {
        write_columns(out, &[h, model.semivariogram(h)])?;
    }
    Ok(())
}

/// Empirical PSD: normalized frequency, mean energy, ±1 std band.
///
/// With `db` set, the three energy columns are emitted in decibels; a
/// non-positive band edge (`mean − std` can dip below zero) has no decibel
/// form and is written as `nan`.
pub fn write_psd<W: Write>(out: &mut W, psd: &PsdStatistics, db: bool) -> io::Result<()> {
    let unit = if db { "db" } else { "power" };
    writeln!(
        out,
        "# normalized_frequency mean_{unit} mean_plus_std_{unit} mean_minus_std_{unit}"
    )?;
    for i in 0..psd.len() {
        let m = psd.mean()[i];
        let s = psd.std()[i];
        let mut row = [psd.normalized_frequencies()[i], m, m + s, m - s];
        if db {
            for v in row.iter_mut().skip(1) {
                *v = to_decibels(*v);
            }
        }
        write_columns(out, &row)?;
    }
    Ok(())
}

/// Stationarity scores, one row per (vertex, lag) cell.
pub fn write_scores<W: Write>(out: &mut W, diag: &StationarityDiagnostic) -> io::Result<()> {
    writeln!(out, "# k h score")?;
    let (n, bins) = (diag.scores().nrows(), diag.bins().len());
    for k in 0..n {
        for b in 0..bins {
            let score = diag.score(k, b);
            writeln!(
                out,
                "{} {} {}",
                k,
                format_value(diag.bins().center(b)),
                format_value(score)
            )?;
        }
    }
    Ok(())
}
