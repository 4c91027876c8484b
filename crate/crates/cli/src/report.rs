//! CSV tables and the JSON summary of a run.
//!
//! Every number is written with 12 significant digits and nothing depends
//! on wall-clock time or thread scheduling, so identical configs give
//! byte-identical files.

use std::path::{Path, PathBuf};

use lagcurv::focal::{FocalKind, FocalRecord, ALTERNATION_TOL};
use lagcurv::reduction::FormSource;
use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::config::{OutputKind, RunConfig};
use crate::runner::RunResults;
use crate::RunError;

pub const SCHEMA_VERSION: u32 = 1;
pub const FOCAL_CSV: &str = "focal.csv";
pub const CURVATURE_CSV: &str = "curvature.csv";
pub const ALTERNATION_CSV: &str = "alternation.csv";
pub const SUMMARY_JSON: &str = "summary.json";

/// Decimal text with 12 significant digits: positional notation for
/// magnitudes in [1e-5, 1e15), scientific otherwise; trailing zeros removed.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let rounded: f64 = sci.parse().expect("round trip");
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{rounded:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// JSON number rounded to 12 significant digits (null if not finite).
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(fmt_sig(x).parse::<f64>().expect("formatted number parses"))
    } else {
        Value::Null
    }
}

fn matrix_json(m: &DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| num(m[(i, j)])).collect())).collect())
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>, RunError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| RunError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    w.into_inner().map_err(|e| RunError::Io(e.to_string()))
}

fn focal_rows(records: &[FocalRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| vec![fmt_sig(r.time), r.multiplicity.to_string(), r.kind.label().to_string()])
        .collect()
}

/// Focal table: requested kinds merged in time order.
pub fn focal_csv(cfg: &RunConfig, results: &RunResults) -> Result<Vec<u8>, RunError> {
    let mut records: Vec<FocalRecord> = Vec::new();
    if let Some(scan) = &results.focal {
        if cfg.wants(OutputKind::Focal) {
            records.extend(scan.originals.iter().cloned());
        }
        if cfg.wants(OutputKind::ReducedFocal) {
            records.extend(scan.reduceds.iter().cloned());
        }
    }
    records.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.kind.cmp(&b.kind)));
    csv_bytes(&["time", "multiplicity", "kind"], focal_rows(&records))
}

fn push_matrix(rows: &mut Vec<Vec<String>>, quantity: &str, basis: &str, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            rows.push(vec![quantity.into(), basis.into(), (i + 1).to_string(), (j + 1).to_string(), fmt_sig(m[(i, j)])]);
        }
    }
}

fn push_scalar(rows: &mut Vec<Vec<String>>, quantity: &str, value: f64) {
    rows.push(vec![quantity.into(), "scalar".into(), "1".into(), "1".into(), fmt_sig(value)]);
}

/// Curvature table: flattened matrices, one entry per row. Basis `dp` is
/// the impulse basis ∂p_i; basis `K` is the basis of D ∩ ⋂ ker dg_i listed
/// under `k_basis` (columns, in ∂p coordinates).
pub fn curvature_csv(results: &RunResults) -> Result<Vec<u8>, RunError> {
    let mut rows = Vec::new();
    if let Some(c) = &results.curvature {
        push_matrix(&mut rows, "curvature_form", "dp", &c.form);
        push_matrix(&mut rows, "curvature_operator", "dp", &c.operator);
        push_scalar(&mut rows, "ricci", c.ricci);
        if let Some(r) = &c.reduced {
            push_matrix(&mut rows, "k_basis", "dp", &r.k_basis);
            push_matrix(&mut rows, "delta_form", "K", &r.delta_form);
            push_matrix(&mut rows, "reduced_curvature_form", "K", &r.form);
            push_matrix(&mut rows, "reduced_curvature_operator", "K", &r.operator);
            push_scalar(&mut rows, "reduced_ricci", r.ricci);
            push_scalar(&mut rows, "x_term", r.x_term);
            push_scalar(&mut rows, "delta_trace", r.delta_trace);
        }
    }
    csv_bytes(&["quantity", "basis", "i", "j", "value"], rows)
}

/// Alternation table: the i-th reduced and i-th original focal times
/// (multiplicities expanded); an empty cell where one list is shorter.
pub fn alternation_csv(results: &RunResults) -> Result<Vec<u8>, RunError> {
    let mut rows = Vec::new();
    if let Some(a) = &results.alternation {
        let len = a.reduced_times.len().max(a.original_times.len());
        let cell = |v: &[f64], i: usize| v.get(i).map(|&t| fmt_sig(t)).unwrap_or_default();
        for i in 0..len {
            rows.push(vec![(i + 1).to_string(), cell(&a.reduced_times, i), cell(&a.original_times, i)]);
        }
    }
    csv_bytes(&["index", "reduced_time", "original_time"], rows)
}

fn source_label(s: FormSource) -> &'static str {
    match s {
        FormSource::Oracle => "oracle",
        FormSource::Jet => "jet",
    }
}

pub fn summary_json(cfg: &RunConfig, results: &RunResults) -> Result<Vec<u8>, RunError> {
    let res = &results.resolved;
    let mut root = Map::new();
    root.insert("schema_version".into(), json!(SCHEMA_VERSION));
    root.insert("tool".into(), json!({ "name": "dynlag", "version": env!("CARGO_PKG_VERSION") }));
    root.insert(
        "run".into(),
        json!({
            "model": res.name,
            "dof": res.model.dof(),
            "initial_state": res.state.iter().map(|&x| num(x)).collect::<Vec<_>>(),
            "integrals": res.integral_names,
            "s": res.integrals.s(),
            "window": results.window.map(|(a, b)| vec![num(a), num(b)]),
            "outputs": cfg.output_set().iter().map(|o| o.to_string()).collect::<Vec<_>>(),
            "seed": cfg.seed,
        }),
    );
    let tolerances = serde_json::to_value(cfg.tolerances).map_err(|e| RunError::Io(e.to_string()))?;
    root.insert("tolerances".into(), tolerances);

    if let Some(c) = &results.curvature {
        let mut m = Map::new();
        m.insert("source".into(), json!(source_label(c.source)));
        m.insert("curvature_form".into(), matrix_json(&c.form));
        m.insert("curvature_operator".into(), matrix_json(&c.operator));
        m.insert("ricci".into(), num(c.ricci));
        if let Some(r) = &c.reduced {
            m.insert("k_basis".into(), matrix_json(&r.k_basis));
            m.insert("delta_form".into(), matrix_json(&r.delta_form));
            m.insert("reduced_curvature_form".into(), matrix_json(&r.form));
            m.insert("reduced_curvature_operator".into(), matrix_json(&r.operator));
            m.insert("reduced_ricci".into(), num(r.ricci));
            m.insert("x_term".into(), num(r.x_term));
            m.insert("delta_trace".into(), num(r.delta_trace));
        }
        root.insert("curvature".into(), Value::Object(m));
    }

    if let (Some(scan), Some(a)) = (&results.focal, &results.alternation) {
        root.insert(
            "counts".into(),
            json!({
                "original": scan.count(FocalKind::Original),
                "reduced": scan.count(FocalKind::Reduced),
                "difference": a.count_difference,
            }),
        );
        root.insert(
            "verdicts".into(),
            json!({
                "inequality_ok": a.inequality_ok,
                "alternating_ok": a.alternating_ok,
                "first_reduced_first": a.first_reduced_first,
                "boundary_warning": scan.boundary_warning,
                "ordering_tolerance": num(ALTERNATION_TOL),
            }),
        );
        if cfg.wants(OutputKind::Alternation) {
            let len = a.reduced_times.len().max(a.original_times.len());
            let per = res.period;
            let table: Vec<Value> = (0..len)
                .map(|i| {
                    let mut row = Map::new();
                    row.insert("index".into(), json!(i + 1));
                    row.insert("reduced".into(), a.reduced_times.get(i).map_or(Value::Null, |&t| num(t)));
                    row.insert("original".into(), a.original_times.get(i).map_or(Value::Null, |&t| num(t)));
                    if let Some(p) = per {
                        row.insert("reduced_over_period".into(), a.reduced_times.get(i).map_or(Value::Null, |&t| num(t / p)));
                        row.insert("original_over_period".into(), a.original_times.get(i).map_or(Value::Null, |&t| num(t / p)));
                    }
                    Value::Object(row)
                })
                .collect();
            root.insert("alternation".into(), Value::Array(table));
        }
    }

    let refs: Map<String, Value> = results.references.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
    root.insert("references".into(), Value::Object(refs));
    let log: Vec<Value> = results
        .discrepancies
        .iter()
        .map(|d| {
            json!({
                "quantity": d.quantity,
                "computed": num(d.computed),
                "reference": num(d.reference),
                "deviation": num(d.deviation()),
                "note": d.note,
            })
        })
        .collect();
    root.insert("discrepancy_log".into(), Value::Array(log));

    let mut text = serde_json::to_vec_pretty(&Value::Object(root)).map_err(|e| RunError::Io(e.to_string()))?;
    text.push(b'\n');
    Ok(text)
}

/// Render every table, then write them in one pass (the summary last).
pub fn emit_report(cfg: &RunConfig, results: &RunResults, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let mut files: Vec<(&str, Vec<u8>)> = Vec::new();
    if cfg.wants(OutputKind::Focal) || cfg.wants(OutputKind::ReducedFocal) {
        files.push((FOCAL_CSV, focal_csv(cfg, results)?));
    }
    if cfg.wants(OutputKind::Alternation) {
        files.push((ALTERNATION_CSV, alternation_csv(results)?));
    }
    if results.curvature.is_some() {
        files.push((CURVATURE_CSV, curvature_csv(results)?));
    }
    files.push((SUMMARY_JSON, summary_json(cfg, results)?));
    std::fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_sig(-2.0), "-2");
        assert_eq!(fmt_sig(0.0625), "0.0625");
        assert_eq!(fmt_sig(1.0 / 3.0 * 1e-7), "3.33333333333e-8");
        assert_eq!(fmt_sig(123456789012345.0), "123456789012000");
        assert_eq!(fmt_sig(6.02214076e23), "6.02214076e23");
        assert_eq!(fmt_sig(-0.0), "0");
    }

    #[test]
    fn rounding_carries_into_the_exponent() {
        assert_eq!(fmt_sig(9.9999999999999), "10");
        assert_eq!(fmt_sig(0.99999999999999), "1");
    }

    #[test]
    fn json_numbers_are_rounded() {
        assert_eq!(num(std::f64::consts::PI).to_string(), "3.14159265359");
        assert_eq!(num(f64::NAN), Value::Null);
    }
}
