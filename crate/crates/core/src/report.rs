//! Trace CSV and run summaries.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::point::Point;
use crate::solver::{BestPair, IterationTrace, Residuals, Terminal, TraceEntry};

/// Writes `k,phase,sweep,gap,coord_0,…`. Inner rows, when recorded, precede the
/// outer row they produce.
pub fn write_trace_csv<W: Write>(trace: &IterationTrace, dim: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "k".to_string(),
        "phase".into(),
        "sweep".into(),
        "gap".into(),
    ];
    header.extend((0..dim).map(|i| format!("coord_{i}")));
    w.write_record(&header)?;

    let mut inner = trace.inner.iter().peekable();
    for e in &trace.iterates {
        while let Some(i) = inner.next_if(|i| i.k == e.k) {
            write_row(&mut w, i)?;
        }
        write_row(&mut w, e)?;
    }
    w.flush()?;
    Ok(())
}

fn write_row<W: Write>(w: &mut csv::Writer<W>, e: &TraceEntry) -> Result<()> {
    let mut row = vec![
        e.k.to_string(),
        e.phase.as_str().to_string(),
        e.sweep.to_string(),
        e.gap.to_string(),
    ];
    row.extend(e.x.as_slice().iter().map(|c| c.to_string()));
    w.write_record(&row)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub pair: (Point, Point),
    pub gap: f64,
    pub residuals: Residuals,
    pub terminal: Terminal,
    pub sweeps: usize,
    pub start_projected: bool,
}

impl RunSummary {
    pub fn new(trace: &IterationTrace, pair: &BestPair) -> Self {
        RunSummary {
            pair: (pair.a.clone(), pair.b.clone()),
            gap: pair.gap,
            residuals: pair.residuals,
            terminal: trace.terminal,
            sweeps: trace.sweeps,
            start_projected: trace.start_projected,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summaries always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::solver::run_ashlwb;

    #[test]
    fn csv_layout() {
        let mut p = instances::two_ball().unwrap();
        p.options.max_sweeps = 3;
        p.options.record_inner_steps = true;
        let trace = run_ashlwb(&p, &Point::zeros(2)).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&trace, 2, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,phase,sweep,gap,coord_0,coord_1");
        assert_eq!(lines[1], "0,start,0,0,0,0");
        assert!(lines[2].starts_with("1,A-inner,0,"));
        assert!(lines[3].starts_with("1,A,0,"));
        // 7 outer rows, 2 * (1 + 2 + 3) inner rows
        assert_eq!(lines.len(), 1 + 7 + 12);
    }
}
