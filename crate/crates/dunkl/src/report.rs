//! Flat CSV reports with a stable column order, and their JSON mirror.

use std::io::Write;

use serde::Serialize;

use crate::config::OutputFormat;
use crate::error::{DunklError, Result};
use crate::heat_poisson::KernelEvaluator;
use crate::root_system::make_product_z2;

fn io_err(e: impl std::fmt::Display) -> DunklError {
    DunklError::Config(format!("writing report: {e}"))
}

/// Serializes `rows` in the given format. Field order follows the struct.
pub fn write_rows<T: Serialize, W: Write>(rows: &[T], format: OutputFormat, mut out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
            for r in rows {
                w.serialize(r).map_err(io_err)?;
            }
            w.flush().map_err(io_err)
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, rows).map_err(io_err)?;
            out.write_all(b"\n").map_err(io_err)
        }
    }
}

pub fn rows_to_string<T: Serialize>(rows: &[T], format: OutputFormat) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(rows, format, &mut buf)?;
    String::from_utf8(buf).map_err(io_err)
}

/// Kernel values and time derivatives at one (k, t, x, y).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelRow {
    pub k: f64,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub dh1: f64,
    pub dh2: f64,
    pub p: f64,
    pub dp1: f64,
    pub dp2: f64,
}

/// Rank-one kernel table over the product of the given lists.
pub fn kernel_table(ks: &[f64], ts: &[f64], xs: &[f64], ys: &[f64], tol: f64) -> Result<Vec<KernelRow>> {
    let mut rows = Vec::new();
    for &k in ks {
        let rs = make_product_z2(1, &[k])?;
        let heat = KernelEvaluator::heat(&rs);
        let pois = KernelEvaluator::poisson(&rs);
        for &t in ts {
            for &x in xs {
                for &y in ys {
                    let (a, b) = ([x], [y]);
                    rows.push(KernelRow {
                        k,
                        t,
                        x,
                        y,
                        h: heat.heat_kernel(t, &a, &b)?,
                        dh1: heat.heat_time_derivative(1, t, &a, &b)?,
                        dh2: heat.heat_time_derivative(2, t, &a, &b)?,
                        p: pois.poisson_kernel(t, &a, &b, tol)?,
                        dp1: pois.poisson_time_derivative(1, t, &a, &b, tol)?,
                        dp2: pois.poisson_time_derivative(2, t, &a, &b, tol)?,
                    });
                }
            }
        }
    }
    Ok(rows)
}
