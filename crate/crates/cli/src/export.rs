//! JSON and CSV serialization. Reals are written with 17 significant digits
//! so every `f64` round-trips exactly.

use std::io::Write;
use std::str::FromStr;

use hbvm_core::integrator::{OrderStudy, Trajectory};
use hbvm_core::spectral::SpectralReport;
use hbvm_core::{Complex, HbvmTableau, Matrix};
use serde_json::{json, Number, Value};

/// `x` in scientific notation with 17 significant digits.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// A JSON number carrying exactly the digits of [`real`]; `null` when `x`
/// is not finite.
pub fn json_real(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    Value::Number(Number::from_str(&real(x)).expect("formatted float is a JSON number"))
}

fn json_vec(v: &[f64]) -> Value {
    Value::Array(v.iter().copied().map(json_real).collect())
}

fn json_matrix(m: &Matrix) -> Value {
    Value::Array((0..m.rows()).map(|i| json_vec(m.row(i))).collect())
}

fn json_complex(z: &[Complex]) -> Value {
    Value::Array(
        z.iter()
            .map(|z| json!({ "re": json_real(z.re), "im": json_real(z.im) }))
            .collect(),
    )
}

pub fn tableau_json(t: &HbvmTableau) -> Value {
    json!({
        "k": t.k(),
        "s": t.s(),
        "kind": t.kind().as_str(),
        "c": json_vec(t.c()),
        "b": json_vec(t.b()),
        "A": json_matrix(t.a()),
    })
}

pub fn spectrum_json(t: &HbvmTableau, r: &SpectralReport) -> Value {
    json!({
        "k": r.k,
        "s": r.s,
        "kind": t.kind().as_str(),
        "subspace_residual": json_real(r.subspace_residual),
        "nonzero_eigs_a": json_complex(&r.nonzero_eigs_a),
        "eigs_xs": json_complex(&r.eigs_xs),
        "zero_tail_max": json_real(r.zero_tail_max),
        "max_eig_mismatch": json_real(r.max_eig_mismatch),
        "gap_ratio": r.gap_ratio.map_or(Value::Null, json_real),
        "matched": r.matched,
    })
}

/// Pretty JSON followed by a newline.
pub fn write_json<W: Write>(mut w: W, v: &Value) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn trajectory_header(dim: usize) -> Vec<String> {
    let mut h: Vec<String> = ["step", "t", "H", "drift"].map(String::from).to_vec();
    h.extend((0..dim).map(|i| format!("y_{i}")));
    h
}

fn trajectory_rows(traj: &Trajectory) -> impl Iterator<Item = (usize, Vec<f64>)> + '_ {
    traj.states.iter().enumerate().map(|(n, st)| {
        let mut row = vec![st.t, traj.energies[n], traj.energy_drift[n]];
        row.extend_from_slice(&st.y);
        (n, row)
    })
}

/// `step,t,H,drift,y_0,…` with one row per state, step 0 included.
pub fn write_trajectory_csv<W: Write>(w: W, traj: &Trajectory, dim: usize) -> csv::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(trajectory_header(dim))?;
    for (n, row) in trajectory_rows(traj) {
        let mut rec = vec![n.to_string()];
        rec.extend(row.into_iter().map(real));
        out.write_record(rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Same table as the CSV: `{"columns": [...], "rows": [[...]]}` plus `meta`.
pub fn trajectory_json(traj: &Trajectory, dim: usize, meta: Value) -> Value {
    let rows: Vec<Value> = trajectory_rows(traj)
        .map(|(n, row)| {
            let mut r = vec![Value::from(n)];
            r.extend(row.into_iter().map(json_real));
            Value::Array(r)
        })
        .collect();
    json!({ "meta": meta, "columns": trajectory_header(dim), "rows": rows })
}

/// `h,error,observed_order`, then `fit,,<slope>`.
pub fn write_order_csv<W: Write>(w: W, study: &OrderStudy) -> csv::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["h", "error", "observed_order"])?;
    for p in &study.points {
        let order = p.observed_order.map(real).unwrap_or_default();
        out.write_record([real(p.h), real(p.error), order])?;
    }
    out.write_record(["fit".to_string(), String::new(), real(study.slope)])?;
    out.flush()?;
    Ok(())
}

pub fn order_json(study: &OrderStudy, meta: Value) -> Value {
    let points: Vec<Value> = study
        .points
        .iter()
        .map(|p| {
            json!({
                "h": json_real(p.h),
                "error": json_real(p.error),
                "observed_order": p.observed_order.map_or(Value::Null, json_real),
                "excluded": p.excluded,
            })
        })
        .collect();
    json!({ "meta": meta, "points": points, "slope": json_real(study.slope) })
}

/// `k,max_drift`.
pub fn write_conserve_csv<W: Write>(w: W, rows: &[(usize, f64)]) -> csv::Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["k", "max_drift"])?;
    for &(k, d) in rows {
        out.write_record([k.to_string(), real(d)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn conserve_json(rows: &[(usize, f64)], meta: Value) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|&(k, d)| json!({ "k": k, "max_drift": json_real(d) }))
        .collect();
    json!({ "meta": meta, "rows": rows })
}
