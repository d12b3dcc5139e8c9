//! CSV formats: iteration traces, bag datasets and diagnostics reports.
//!
//! Floats are written in the shortest form that parses back to the same
//! value, switching to exponent notation for very small or large magnitudes.

use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::diagnostics::DiagnosticRow;
use crate::engine::TraceRow;
use crate::error::{check_dim, NeAdmmError, Result};
use crate::maxop::BagDataset;
use crate::terms::DenseVector;

pub const TRACE_HEADER: [&str; 5] = ["iter", "objective", "primal_residual", "dual_residual", "rho"];
pub const TRACE_DIAGNOSTIC_HEADER: [&str; 4] = ["bound", "gap", "lyapunov", "vi_norm"];
pub const DIAGNOSTICS_HEADER: [&str; 6] = ["k", "bound", "gap", "V", "vi_norm", "flags"];

pub fn format_float(v: f64) -> String {
    if v != 0.0 && v.is_finite() && !(1e-4..1e16).contains(&v.abs()) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn parse_float(s: &str, line: u64) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| NeAdmmError::Csv(format!("line {line}: invalid number {s:?}")))
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

/// Writes a trace. With `diagnostics`, one row per trace row is appended as
/// extra columns.
pub fn write_trace<W: Write>(out: W, trace: &[TraceRow], diagnostics: Option<&[DiagnosticRow]>) -> Result<()> {
    if let Some(d) = diagnostics {
        check_dim("diagnostic rows", trace.len(), d.len())?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header: Vec<&str> = TRACE_HEADER.to_vec();
    if diagnostics.is_some() {
        header.extend(TRACE_DIAGNOSTIC_HEADER);
    }
    w.write_record(&header)?;
    for (i, row) in trace.iter().enumerate() {
        let mut fields = vec![
            row.k.to_string(),
            format_float(row.objective),
            format_float(row.r_norm),
            format_float(row.s_norm),
            format_float(row.rho),
        ];
        if let Some(d) = diagnostics {
            let d = &d[i];
            fields.extend([d.bound, d.gap, d.lyapunov, d.vi_norm].map(format_float));
        }
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the first five columns of a trace written by [`write_trace`].
pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 5 || header.iter().take(5).ne(TRACE_HEADER) {
        return Err(NeAdmmError::Csv(format!("unexpected trace header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = record_line(&rec);
        let k = rec[0]
            .trim()
            .parse()
            .map_err(|_| NeAdmmError::Csv(format!("line {line}: invalid iteration {:?}", &rec[0])))?;
        rows.push(TraceRow {
            k,
            objective: parse_float(&rec[1], line)?,
            r_norm: parse_float(&rec[2], line)?,
            s_norm: parse_float(&rec[3], line)?,
            rho: parse_float(&rec[4], line)?,
        });
    }
    Ok(rows)
}

/// `bag_id,label,f1,…,fp`, one row per instance, bags numbered from 0.
pub fn write_bags<W: Write>(out: W, data: &BagDataset) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec!["bag_id".to_string(), "label".to_string()];
    header.extend((1..=data.n_features()).map(|j| format!("f{j}")));
    w.write_record(&header)?;
    for i in 0..data.n_bags() {
        for row in data.bag_range(i) {
            let mut fields = vec![i.to_string(), format_float(data.labels[i])];
            fields.extend(data.x.row(row).iter().map(|&v| format_float(v)));
            w.write_record(&fields)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a bag CSV. Bag ids are arbitrary strings; bags keep the order of
/// first appearance and rows of a bag need not be contiguous. All rows of a
/// bag must carry the same label.
pub fn read_bags<R: Read>(input: R) -> Result<BagDataset> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 3 || &header[0] != "bag_id" || &header[1] != "label" {
        return Err(NeAdmmError::Csv(format!(
            "expected header bag_id,label,f1,...; found {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let p = header.len() - 2;
    let mut ids: Vec<String> = Vec::new();
    let mut bags: Vec<(f64, Vec<Vec<f64>>)> = Vec::new();
    let mut index = std::collections::HashMap::new();
    for rec in r.records() {
        let rec = rec?;
        let line = record_line(&rec);
        if rec.len() != p + 2 {
            return Err(NeAdmmError::Csv(format!(
                "line {line}: expected {} fields, found {}",
                p + 2,
                rec.len()
            )));
        }
        let label = parse_float(&rec[1], line)?;
        let features = (2..p + 2)
            .map(|j| parse_float(&rec[j], line))
            .collect::<Result<Vec<f64>>>()?;
        let id = rec[0].trim().to_string();
        let slot = *index.entry(id.clone()).or_insert_with(|| {
            ids.push(id.clone());
            bags.push((label, Vec::new()));
            bags.len() - 1
        });
        if bags[slot].0 != label {
            return Err(NeAdmmError::Csv(format!(
                "line {line}: bag {id} has conflicting labels"
            )));
        }
        bags[slot].1.push(features);
    }
    if bags.is_empty() {
        return Err(NeAdmmError::Csv("no instance rows".into()));
    }
    let sizes: Vec<usize> = bags.iter().map(|b| b.1.len()).collect();
    let total: usize = sizes.iter().sum();
    let flat: Vec<f64> = bags.iter().flat_map(|b| b.1.iter().flatten().copied()).collect();
    let labels = DenseVector::from_iterator(bags.len(), bags.iter().map(|b| b.0));
    BagDataset::new(labels, &sizes, DMatrix::from_row_slice(total, p, &flat))
}

pub fn write_diagnostics<W: Write>(out: W, rows: &[DiagnosticRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(DIAGNOSTICS_HEADER)?;
    for d in rows {
        let mut fields = vec![d.k.to_string()];
        fields.extend([d.bound, d.gap, d.lyapunov, d.vi_norm].map(format_float));
        fields.push(d.flags.clone());
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}
