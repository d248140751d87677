//! CSV formats for time series, events, trajectories, TOF and PG summaries.

use std::io::{Read, Write};

use thiserror::Error;

use crate::cooling::PgSample;
use crate::dynamics::{Event, MotTimeSeries, TrajectoryPoint};
use crate::measure::TofSeries;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
}

pub fn write_loading_csv<W: Write>(w: W, series: &MotTimeSeries) -> Result<(), CsvError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["time_s", "count", "weighted_count"])?;
    for ((t, n), c) in series.sample_times.iter().zip(&series.raw_counts).zip(&series.counts_in_region) {
        out.write_record([t.to_string(), n.to_string(), c.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_events_csv<W: Write>(w: W, events: &[Event]) -> Result<(), CsvError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["time_s", "kind", "atom_index"])?;
    for e in events {
        out.write_record([e.time.to_string(), e.kind.as_str().to_string(), e.atom_index.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trajectories_csv<W: Write>(w: W, points: &[TrajectoryPoint]) -> Result<(), CsvError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["atom_index", "t", "x", "y", "z", "vx", "vy", "vz"])?;
    for p in points {
        let (x, v) = (&p.state.position, &p.state.velocity);
        out.write_record([
            p.atom_index.to_string(),
            p.time.to_string(),
            x.x.to_string(),
            x.y.to_string(),
            x.z.to_string(),
            v.x.to_string(),
            v.y.to_string(),
            v.z.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_tof_csv<W: Write>(w: W, tof: &TofSeries) -> Result<(), CsvError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["drop_time_s", "width_h_m", "width_v_m", "survivors"])?;
    for i in 0..tof.drop_times.len() {
        out.write_record([
            tof.drop_times[i].to_string(),
            tof.widths_h[i].to_string(),
            tof.widths_v[i].to_string(),
            tof.survivors[i].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_pg_summary_csv<W: Write>(w: W, summary: &[PgSample]) -> Result<(), CsvError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "N_active", "T_H", "T_V"])?;
    for s in summary {
        out.write_record([s.t.to_string(), s.n_active.to_string(), s.t_h.to_string(), s.t_v.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads numeric columns by header name. When the header lacks one of the
/// names and the file has exactly `names.len()` columns, they are taken in
/// order, which accepts arbitrary two-column files.
pub fn read_columns<R: Read>(r: R, names: &[&str]) -> Result<Vec<Vec<f64>>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    let idx: Vec<usize> = match names.iter().map(|n| headers.iter().position(|h| h == *n)).collect::<Option<Vec<_>>>() {
        Some(idx) => idx,
        None if headers.len() == names.len() => (0..names.len()).collect(),
        None => {
            return Err(CsvError::Malformed {
                line: 1,
                message: format!("expected columns {names:?}, found {:?}", headers.iter().collect::<Vec<_>>()),
            })
        }
    };
    let mut cols = vec![Vec::new(); names.len()];
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        for (col, &i) in cols.iter_mut().zip(&idx) {
            let field = rec.get(i).ok_or_else(|| CsvError::Malformed { line, message: format!("missing column {i}") })?;
            let v = field
                .parse::<f64>()
                .map_err(|_| CsvError::Malformed { line, message: format!("not a number: {field:?}") })?;
            col.push(v);
        }
    }
    Ok(cols)
}

/// Reads a TOF CSV back into a series.
pub fn read_tof_csv<R: Read>(r: R) -> Result<TofSeries, CsvError> {
    let c = read_columns(r, &["drop_time_s", "width_h_m", "width_v_m", "survivors"])?;
    Ok(TofSeries {
        drop_times: c[0].clone(),
        widths_h: c[1].clone(),
        widths_v: c[2].clone(),
        survivors: c[3].iter().map(|v| *v as u64).collect(),
        survivor_weight: c[3].clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Region;
    use crate::Vec3;

    #[test]
    fn loading_round_trip() {
        let series = MotTimeSeries {
            sample_times: vec![0.0, 0.1, 0.2],
            raw_counts: vec![0, 3, 5],
            counts_in_region: vec![0.0, 0.75, 1.25],
            events: vec![],
            region: Region::sphere(Vec3::zeros(), 1e-3),
        };
        let mut buf = Vec::new();
        write_loading_csv(&mut buf, &series).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("time_s,count,weighted_count\n"));
        let cols = read_columns(buf.as_slice(), &["time_s", "weighted_count"]).unwrap();
        assert_eq!(cols[0], series.sample_times);
        assert_eq!(cols[1], series.counts_in_region);
    }

    #[test]
    fn two_column_fallback_and_errors() {
        let cols = read_columns("d,n\n1,2\n3,4\n".as_bytes(), &["x", "y"]).unwrap();
        assert_eq!(cols, vec![vec![1.0, 3.0], vec![2.0, 4.0]]);
        assert!(read_columns("a,b,c\n1,2,3\n".as_bytes(), &["x", "y"]).is_err());
        assert!(read_columns("x,y\n1,abc\n".as_bytes(), &["x", "y"]).is_err());
    }
}
