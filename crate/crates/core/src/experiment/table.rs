use std::io::{Read, Write};
use std::time::Duration;

use super::{CellResult, CellStatus};
use crate::error::{Error, Result};
use crate::pipeline::StageTimings;
use crate::rng::Seed;

pub const CSV_HEADER: [&str; 12] = [
    "alpha", "beta", "rep", "method", "n", "gamma", "mu", "recovered", "fell_back", "unassigned",
    "runtime_ms", "seed",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One row per cell under [`CSV_HEADER`], LF line endings. `recovered` is
/// `true`, `false`, `SKIPPED` or `ERROR:<tag>`.
pub fn emit_csv<W: Write>(results: &[CellResult], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in results {
        let recovered = match &r.status {
            CellStatus::Ran { recovered } => recovered.to_string(),
            CellStatus::Skipped => "SKIPPED".to_string(),
            CellStatus::Error(tag) => format!("ERROR:{tag}"),
        };
        w.write_record([
            r.alpha.to_string(),
            r.beta.to_string(),
            r.rep.to_string(),
            r.method.to_string(),
            r.n.to_string(),
            opt(r.gamma),
            opt(r.mu),
            recovered,
            r.fell_back.to_string(),
            r.unassigned.to_string(),
            format!("{:.3}", r.runtime_ms()),
            r.seed.value().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`emit_csv`]. The runtime column comes back as solve time.
pub fn parse_csv<R: Read>(reader: R) -> Result<Vec<CellResult>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected header {header:?}"),
        });
    }
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let bad = |field: &str| Error::Parse {
            line,
            msg: format!("bad value in column '{field}'"),
        };
        let get = |k: usize| record.get(k).unwrap_or("");
        let num = |k: usize| get(k).parse::<f64>().map_err(|_| bad(CSV_HEADER[k]));
        let int = |k: usize| get(k).parse::<usize>().map_err(|_| bad(CSV_HEADER[k]));
        let opt_num = |k: usize| -> Result<Option<f64>> {
            if get(k).is_empty() {
                Ok(None)
            } else {
                num(k).map(Some)
            }
        };
        let status = match get(7) {
            "true" => CellStatus::Ran { recovered: true },
            "false" => CellStatus::Ran { recovered: false },
            "SKIPPED" => CellStatus::Skipped,
            s => match s.strip_prefix("ERROR:") {
                Some(tag) => CellStatus::Error(tag.to_string()),
                None => return Err(bad("recovered")),
            },
        };
        let runtime = num(10)?;
        out.push(CellResult {
            alpha: num(0)?,
            beta: num(1)?,
            rep: int(2)?,
            method: get(3).parse().map_err(|_| bad("method"))?,
            n: int(4)?,
            gamma: opt_num(5)?,
            mu: opt_num(6)?,
            status,
            fell_back: get(8).parse().map_err(|_| bad("fell_back"))?,
            unassigned: int(9)?,
            timings: StageTimings {
                solve: Duration::from_secs_f64(runtime.max(0.0) / 1e3),
                ..Default::default()
            },
            seed: Seed(get(11).parse().map_err(|_| bad("seed"))?),
        });
    }
    Ok(out)
}
