//! CSV serialisation of fields, run manifests and analysis tables.
//!
//! Floating-point values are written with 17 significant digits so a field
//! read back is bitwise identical to the one written.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use starflow_core::analysis::{DecayFit, Violation};
use starflow_core::graph::{lp_norm, mass, pointwise_bounds, tail_mass};
use starflow_core::solver::Snapshot;
use starflow_core::{EdgeGrid, GraphFunction, StarGraph};

pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `(edge_index, signed_x, value)` rows; the junction row is
/// repeated at the start of every edge.
pub fn write_field<W: Write>(out: W, u: &GraphFunction) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["edge_index", "signed_x", "value"])?;
    let g = u.graph();
    let grid = u.grid();
    for k in 0..g.edge_count() {
        let sign = g.orientation(k);
        for i in 0..=grid.cells() {
            let x = sign * grid.node(i);
            // keep the junction at +0 on incoming edges
            let x = if i == 0 { 0.0 } else { x };
            w.write_record([k.to_string(), fmt_real(x), fmt_real(u.at(k, i))])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a field written by [`write_field`] for a star with `n_in` incoming
/// edges.
pub fn read_field<R: Read>(input: R, n_in: usize) -> Result<GraphFunction> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows: Vec<(usize, f64, f64)> = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != 3 {
            bail!("row {}: expected 3 columns", line + 2);
        }
        let edge: usize = record[0].trim().parse().with_context(|| format!("row {}: edge index", line + 2))?;
        let x: f64 = record[1].trim().parse().with_context(|| format!("row {}: signed_x", line + 2))?;
        let v: f64 = record[2].trim().parse().with_context(|| format!("row {}: value", line + 2))?;
        rows.push((edge, x, v));
    }
    let edges = rows.iter().map(|r| r.0).max().map_or(0, |e| e + 1);
    if edges <= n_in {
        bail!("field has {edges} edges, need more than {n_in}");
    }
    let per_edge = rows.len() / edges;
    if per_edge * edges != rows.len() || per_edge < 3 {
        bail!("edges have unequal sample counts");
    }
    let cells = per_edge - 1;
    let length = rows[per_edge - 1].1.abs();
    let graph = StarGraph::new(n_in, edges - n_in)?;
    let grid = EdgeGrid::new(length, cells)?;
    let junction = rows[0].2;
    let mut values = Vec::with_capacity(edges * cells);
    for k in 0..edges {
        let chunk = &rows[k * per_edge..(k + 1) * per_edge];
        if chunk.iter().any(|r| r.0 != k) {
            bail!("rows of edge {k} are not contiguous");
        }
        if chunk[0].2 != junction {
            bail!("edge {k} disagrees on the junction value");
        }
        let sign = graph.orientation(k);
        if chunk[1..].iter().any(|r| r.1 * sign < 0.0) {
            bail!("edge {k} has coordinates of the wrong sign");
        }
        values.extend(chunk[1..].iter().map(|r| r.2));
    }
    Ok(GraphFunction::from_parts(graph, grid, junction, values)?)
}

/// Radius used for the tail column of the manifest.
pub fn tail_radius(length: f64) -> f64 {
    if length > 4.0 {
        length - 2.0
    } else {
        0.5 * length
    }
}

/// One row per snapshot: `time, mass, l1, l2, linf, min, max, energy_lhs,
/// junction_residual, tail_mass`.
pub fn write_manifest<W: Write>(
    out: W,
    snapshots: &[Snapshot],
    junction_residuals: &[f64],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "time",
        "mass",
        "l1",
        "l2",
        "linf",
        "min",
        "max",
        "energy_lhs",
        "junction_residual",
        "tail_mass",
    ])?;
    for (snap, residual) in snapshots.iter().zip(junction_residuals) {
        let u = &snap.field;
        let (lo, hi) = pointwise_bounds(u);
        let row = [
            snap.time,
            mass(u),
            lp_norm(u, 1.0)?,
            lp_norm(u, 2.0)?,
            lp_norm(u, f64::INFINITY)?,
            lo,
            hi,
            snap.energy_lhs,
            *residual,
            tail_mass(u, tail_radius(u.grid().length()))?,
        ];
        w.write_record(row.iter().map(|v| fmt_real(*v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Decay-fit table row.
pub struct DecayRow {
    pub p: f64,
    pub fit: DecayFit,
    pub window: (f64, f64),
}

pub fn write_decay_fits<W: Write>(out: W, rows: &[DecayRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "exponent", "intercept", "window_lo", "window_hi", "max_residual"])?;
    for r in rows {
        let p = if r.p.is_infinite() { "inf".to_string() } else { fmt_real(r.p) };
        w.write_record([
            p,
            fmt_real(r.fit.exponent),
            fmt_real(r.fit.intercept),
            fmt_real(r.window.0),
            fmt_real(r.window.1),
            fmt_real(r.fit.max_residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `(t, p, value)` rows of the scaled profile error.
pub fn write_scaled_errors<W: Write>(out: W, rows: &[(f64, f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "p", "value"])?;
    for &(t, p, v) in rows {
        w.write_record([fmt_real(t), fmt_real(p), fmt_real(v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_violations<W: Write>(out: W, rows: &[Violation]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "edge", "x", "value"])?;
    for v in rows {
        w.write_record([fmt_real(v.time), v.edge.to_string(), fmt_real(v.position), fmt_real(v.value)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip_is_bitwise() {
        let g = StarGraph::new(2, 1).unwrap();
        let grid = EdgeGrid::new(3.0, 7).unwrap();
        let u = GraphFunction::from_fn(g, grid, |k, s| (k as f64 + 0.1) * (s * 1.7).sin() + 1.0 / 3.0);
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        let back = read_field(buf.as_slice(), 2).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn field_layout() {
        let g = StarGraph::new(1, 1).unwrap();
        let grid = EdgeGrid::new(1.0, 2).unwrap();
        let u = GraphFunction::from_fn(g, grid, |k, s| if k == 0 { 1.0 - s } else { 1.0 + s });
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "edge_index,signed_x,value");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("0,0.0000000000000000e0,1.0000000000000000e0"));
        assert!(lines[3].starts_with("0,-1.0000000000000000e0,"));
        assert!(lines[4].starts_with("1,0.0000000000000000e0,1.0000000000000000e0"));
    }

    #[test]
    fn reader_rejects_inconsistent_junction() {
        let text = "edge_index,signed_x,value\n0,0,1\n0,-0.5,0\n0,-1,0\n1,0,2\n1,0.5,0\n1,1,0\n";
        assert!(read_field(text.as_bytes(), 1).is_err());
        let ok = text.replace("1,0,2", "1,0,1");
        assert!(read_field(ok.as_bytes(), 1).is_ok());
    }
}
