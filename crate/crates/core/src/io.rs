//! On-disk formats: diagnostic CSV tables and binary physical-space snapshots.
//!
//! Snapshot layout (little endian): magic `NSPD1\0`, `u32` dim, `u32` components,
//! `u32` points per axis, `u64` payload length in bytes, then `f64` samples with
//! points in row-major order and the components of each point adjacent.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::diagnostics::{LifespanSample, SurvivalReport};
use crate::error::{NspdError, Result};
use crate::record::TrajectoryRecord;
use crate::spectral::{Grid, PhysicalField};

pub const SNAPSHOT_MAGIC: &[u8; 6] = b"NSPD1\0";
pub const SNAPSHOT_HEADER_LEN: usize = 26;

/// Header row of the per-step diagnostics table.
pub const DIAGNOSTICS_HEADER: &str = "step[count],t[time],v_alpha[norm],e_alpha[norm],\
max_dev[abs],y_minus[L2^2],z_plus[L2^2],energy[L2^2],divergence[ratio],grad_d_sup[abs]";

/// Format a float so that it parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt_f64)
}

pub fn diagnostics_csv(record: &TrajectoryRecord) -> String {
    let mut s = String::with_capacity(128 * (record.rows.len() + 1));
    s.push_str(DIAGNOSTICS_HEADER);
    s.push('\n');
    for r in &record.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.step,
            fmt_f64(r.t),
            fmt_f64(r.v_alpha),
            fmt_f64(r.e_alpha),
            fmt_f64(r.max_dev),
            fmt_f64(r.y_minus),
            fmt_f64(r.z_plus),
            fmt_f64(r.energy),
            fmt_f64(r.divergence),
            fmt_f64(r.grad_d_sup)
        );
    }
    s
}

/// Run summary: config hash, status and one crossing time per threshold (empty when never crossed).
pub fn summary_csv(record: &TrajectoryRecord) -> String {
    let mut s = String::from("key[-],value[-]\n");
    let _ = writeln!(s, "config_hash,{}", record.config_hash);
    let _ = writeln!(s, "traj_id,{}", record.traj_id);
    let _ = writeln!(s, "status,{}", record.status.as_str());
    let _ = writeln!(s, "exit_code,{}", record.status.exit_code());
    let _ = writeln!(s, "final_time,{}", fmt_f64(record.final_time()));
    let _ = writeln!(
        s,
        "failure_step,{}",
        record.failure_step.map_or_else(String::new, |x| x.to_string())
    );
    for (m, tau) in record.thresholds.iter().zip(&record.tau) {
        let _ = writeln!(s, "tau[{}],{}", fmt_f64(*m), fmt_opt(*tau));
    }
    s
}

/// Header of the per-trajectory ensemble table for `n_thresholds` crossing columns.
pub fn ensemble_header(thresholds: &[f64]) -> String {
    let mut s = String::from("traj_id[id],amplitude[-],status[-],t_end[time],max_dev[abs],max_divergence[ratio]");
    for i in 0..thresholds.len() {
        let _ = write!(s, ",tau_{}[time]", i + 1);
    }
    s
}

pub fn ensemble_row(record: &TrajectoryRecord, sample: &LifespanSample) -> String {
    let mut s = format!(
        "{},{},{},{},{},{}",
        sample.traj_id,
        fmt_f64(sample.amplitude),
        sample.status.as_str(),
        fmt_f64(sample.t_end),
        fmt_f64(record.max_constraint_deviation()),
        fmt_f64(record.max_divergence())
    );
    for t in &sample.tau {
        let _ = write!(s, ",{}", fmt_opt(*t));
    }
    s
}

/// Survival curves; the `group` column is `all` or the initial-data amplitude.
pub fn survival_csv(report: &SurvivalReport) -> String {
    let mut s = String::from("group[-],n[count],t[time],survival[prob],lower[prob],upper[prob]\n");
    let mut emit = |group: &str, c: &crate::diagnostics::SurvivalCurve| {
        for i in 0..c.t.len() {
            let _ = writeln!(
                s,
                "{group},{},{},{},{},{}",
                c.n,
                fmt_f64(c.t[i]),
                fmt_f64(c.survival[i]),
                fmt_f64(c.lower[i]),
                fmt_f64(c.upper[i])
            );
        }
    };
    emit("all", &report.overall);
    for (a, c) in &report.by_amplitude {
        emit(&fmt_f64(*a), c);
    }
    s
}

/// Write `contents` to `path`, creating parent directories.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

pub fn encode_snapshot(field: &PhysicalField) -> Vec<u8> {
    let g = field.grid();
    let payload = field.data().len() * 8;
    let mut out = Vec::with_capacity(SNAPSHOT_HEADER_LEN + payload);
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(field.components() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&(payload as u64).to_le_bytes());
    let comps = field.components();
    for flat in 0..g.len() {
        for c in 0..comps {
            out.extend_from_slice(&field.component(c)[flat].to_le_bytes());
        }
    }
    out
}

fn format_err(offset: usize, message: impl Into<String>) -> NspdError {
    NspdError::Format {
        offset: offset as u64,
        message: message.into(),
    }
}

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")))
        .ok_or_else(|| format_err(offset, "truncated header"))
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<PhysicalField> {
    for (i, m) in SNAPSHOT_MAGIC.iter().enumerate() {
        match bytes.get(i) {
            Some(b) if b == m => {}
            Some(_) => return Err(format_err(i, "bad magic bytes")),
            None => return Err(format_err(i, "truncated magic")),
        }
    }
    let dim = read_u32(bytes, 6)? as usize;
    let comps = read_u32(bytes, 10)? as usize;
    let n = read_u32(bytes, 14)? as usize;
    let payload = bytes
        .get(18..26)
        .map(|b| u64::from_le_bytes(b.try_into().expect("8 bytes")))
        .ok_or_else(|| format_err(18, "truncated header"))?;
    let grid = Grid::new(dim, n).map_err(|e| format_err(6, format!("invalid grid: {e}")))?;
    let expect = (comps * grid.len() * 8) as u64;
    if payload != expect {
        return Err(format_err(
            18,
            format!("payload length {payload} does not match {comps} components on {n}^{dim} points"),
        ));
    }
    let body = &bytes[SNAPSHOT_HEADER_LEN..];
    if (body.len() as u64) < payload {
        return Err(format_err(
            SNAPSHOT_HEADER_LEN + body.len() - body.len() % 8,
            format!("truncated payload: {} of {payload} bytes", body.len()),
        ));
    }
    if body.len() as u64 > payload {
        return Err(format_err(SNAPSHOT_HEADER_LEN + payload as usize, "trailing bytes"));
    }
    let len = grid.len();
    let mut data = vec![0.0; comps * len];
    for (i, c) in body.chunks_exact(8).enumerate() {
        data[(i % comps) * len + i / comps] = f64::from_le_bytes(c.try_into().expect("8 bytes"));
    }
    PhysicalField::new(grid, comps, data)
}

pub fn write_snapshot(field: &PhysicalField, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, encode_snapshot(field))?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<PhysicalField> {
    decode_snapshot(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_field, to_physical};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_field() -> PhysicalField {
        let g = Grid::new(2, 8).unwrap();
        to_physical(&random_field(g, 3, 3, 0.0, &mut ChaCha8Rng::seed_from_u64(1)))
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let f = sample_field();
        let back = decode_snapshot(&encode_snapshot(&f)).unwrap();
        assert_eq!(back.data(), f.data());
        assert_eq!(back.components(), 3);
    }

    #[test]
    fn samples_are_component_minor() {
        let f = sample_field();
        let bytes = encode_snapshot(&f);
        let at = |i: usize| f64::from_le_bytes(bytes[SNAPSHOT_HEADER_LEN + 8 * i..][..8].try_into().unwrap());
        assert_eq!(at(1), f.component(1)[0]);
        assert_eq!(at(3), f.component(0)[1]);
    }

    #[test]
    fn header_payload_length() {
        let g = Grid::new(2, 64).unwrap();
        let bytes = encode_snapshot(&PhysicalField::zeros(g, 3));
        let len = u64::from_le_bytes(bytes[18..26].try_into().unwrap());
        assert_eq!(len, 3 * 64 * 64 * 8);
        assert_eq!(bytes.len(), SNAPSHOT_HEADER_LEN + len as usize);
    }

    #[test]
    fn corruption_reports_offsets() {
        let mut bytes = encode_snapshot(&sample_field());
        let good = bytes.clone();
        bytes[0] = b'X';
        assert!(matches!(decode_snapshot(&bytes), Err(NspdError::Format { offset: 0, .. })));
        let short = &good[..good.len() - 5];
        assert!(matches!(decode_snapshot(short), Err(NspdError::Format { .. })));
        assert!(matches!(decode_snapshot(&good[..12]), Err(NspdError::Format { offset: 10, .. })));
    }

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
