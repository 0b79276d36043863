//! Ensemble CSV (`line_index,time,value`) and jam-graph JSON.

use std::io::{Read, Write};

use crate::ensemble::{GridSpec, LineEnsemble, Path};
use crate::error::{Error, Result};
use crate::jam::JamGraph;

pub const CSV_HEADER: [&str; 3] = ["line_index", "time", "value"];

/// 17 significant digits, enough to round-trip any `f64`.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row per (line, grid time), lines outermost; `line_index` is one-based.
pub fn write_ensemble_csv<W: Write>(ensemble: &LineEnsemble, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    let times = ensemble.grid.times();
    for (i, line) in ensemble.lines.iter().enumerate() {
        let idx = (i + 1).to_string();
        for (t, v) in times.iter().zip(&line.values) {
            w.write_record([idx.as_str(), &fmt(*t), &fmt(*v)]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn ensemble_to_csv(ensemble: &LineEnsemble) -> String {
    let mut buf = Vec::new();
    write_ensemble_csv(ensemble, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is ascii")
}

/// Parses the CSV written by [`write_ensemble_csv`]. All lines must share
/// the same uniformly spaced times. `variance` is attached to each path
/// (it is not part of the format).
pub fn read_ensemble_csv<R: Read>(input: R, variance: f64) -> Result<LineEnsemble> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let mut lines: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let field = |k: usize| rec.get(k).ok_or_else(|| Error::Parse(format!("short record {rec:?}")));
        let idx: usize = field(0)?.parse().map_err(|e| Error::Parse(format!("line_index: {e}")))?;
        let t: f64 = field(1)?.parse().map_err(|e| Error::Parse(format!("time: {e}")))?;
        let v: f64 = field(2)?.parse().map_err(|e| Error::Parse(format!("value: {e}")))?;
        if idx == 0 || idx > lines.len() + 1 {
            return Err(Error::Parse(format!("line_index {idx} out of sequence")));
        }
        if idx == lines.len() + 1 {
            lines.push((Vec::new(), Vec::new()));
        }
        lines[idx - 1].0.push(t);
        lines[idx - 1].1.push(v);
    }
    let (times, _) = lines.first().ok_or_else(|| Error::Parse("no rows".into()))?;
    if times.len() < 2 {
        return Err(Error::Parse("need at least two grid times".into()));
    }
    let grid = GridSpec::new(times[0], *times.last().expect("nonempty"), times.len() - 1)?;
    let tol = 1e-9 * grid.spacing();
    for (i, (ts, _)) in lines.iter().enumerate() {
        if ts.len() != grid.len() || ts.iter().enumerate().any(|(j, &t)| (t - grid.time(j)).abs() > tol) {
            return Err(Error::Parse(format!("line {} is not on the uniform grid {grid:?}", i + 1)));
        }
    }
    let paths = lines
        .into_iter()
        .map(|(_, v)| Path::new(grid, v, variance, 0.0))
        .collect::<Result<Vec<_>>>()?;
    let ordered = paths.windows(2).all(|w| w[0].values.iter().zip(&w[1].values).all(|(a, b)| a > b));
    LineEnsemble::new(grid, paths, ordered)
}

pub fn write_jam_graph<W: Write>(graph: &JamGraph, mut out: W) -> Result<()> {
    out.write_all(graph.to_json().as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_jam_graph<R: Read>(mut input: R) -> Result<JamGraph> {
    let mut s = String::new();
    input.read_to_string(&mut s)?;
    JamGraph::from_json(s.trim())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> LineEnsemble {
        let g = GridSpec::new(0.0, 1.0, 3).unwrap();
        let a = Path::new(g, vec![1.0, 0.1 + 0.2, std::f64::consts::PI, 1e-300], 2.0, 0.0).unwrap();
        let b = Path::new(g, vec![-1.0, -2.0, -3.0, -1e300], 2.0, 0.0).unwrap();
        LineEnsemble::new(g, vec![a, b], true).unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let e = sample();
        let s = ensemble_to_csv(&e);
        assert!(s.starts_with("line_index,time,value\n1,0.0000000000000000e0,"));
        assert_eq!(s.lines().count(), 1 + 2 * 4);
        let back = read_ensemble_csv(s.as_bytes(), 2.0).unwrap();
        assert_eq!(back.lines, e.lines);
        assert_eq!(back.grid.steps, 3);
        assert_eq!(ensemble_to_csv(&back), s);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_ensemble_csv("a,b,c\n".as_bytes(), 1.0).is_err());
        let gap = "line_index,time,value\n1,0,1\n1,1,2\n3,0,0\n3,1,0\n";
        assert!(read_ensemble_csv(gap.as_bytes(), 1.0).is_err());
        let ragged = "line_index,time,value\n1,0,1\n1,1,2\n2,0,0\n";
        assert!(read_ensemble_csv(ragged.as_bytes(), 1.0).is_err());
        let uneven = "line_index,time,value\n1,0,1\n1,0.3,2\n1,1,2\n";
        assert!(read_ensemble_csv(uneven.as_bytes(), 1.0).is_err());
    }

    #[test]
    fn graph_round_trip() {
        let g = JamGraph { k: 3, ell: 2, delta: 0.5, edges: vec![(1, 2), (2, 1)] };
        let mut buf = Vec::new();
        write_jam_graph(&g, &mut buf).unwrap();
        assert_eq!(read_jam_graph(buf.as_slice()).unwrap(), g);
    }
}
