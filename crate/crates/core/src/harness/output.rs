use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::aggregate::SummaryRow;
use crate::harness::experiment::ResultRecord;

pub const RECORDS_VERSION: &str = "# tacts-records v1";

pub const RECORD_COLUMNS: [&str; 16] = [
    "algorithm",
    "repetition",
    "congestion",
    "fc",
    "origin",
    "destination",
    "modality_count",
    "performance_ratio",
    "realized_total_time",
    "oracle_time",
    "regret_sum",
    "steps",
    "wall_clock_micros",
    "failed",
    "failure",
    "seed",
];

fn fx(x: f64) -> String {
    format!("{x:.6}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fx).unwrap_or_default()
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn csv_err(e: csv::Error) -> Error {
    Error::Validation(format!("csv: {e}"))
}

pub fn records_csv(records: &[ResultRecord]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(RECORD_COLUMNS).expect("in-memory write");
    for r in records {
        w.write_record([
            r.algorithm.to_string(),
            r.repetition.to_string(),
            r.congestion.to_string(),
            fx(r.f_c),
            r.origin.clone(),
            r.destination.clone(),
            r.modality_count.to_string(),
            opt(r.performance_ratio),
            opt(r.realized_total_time),
            opt(r.oracle_time),
            opt(r.regret_sum),
            r.steps.to_string(),
            fx(r.wall_clock_micros),
            r.failed.to_string(),
            r.failure.clone(),
            r.seed.to_string(),
        ])
        .expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
    format!("{RECORDS_VERSION}\n{body}")
}

pub fn parse_records_csv(text: &str) -> Result<Vec<ResultRecord>> {
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.iter().ne(RECORD_COLUMNS) {
        return Err(Error::Validation(
            "records.csv header does not match the v1 schema".into(),
        ));
    }
    let mut out = Vec::new();
    for (i, row) in rd.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let line = i + 3;
        let field = |k: usize| row.get(k).unwrap_or("");
        let num = |k: usize| -> Result<f64> {
            field(k)
                .parse()
                .map_err(|_| Error::parse(line, format!("bad number in {}", RECORD_COLUMNS[k])))
        };
        let opt_num = |k: usize| -> Result<Option<f64>> {
            if field(k).is_empty() {
                Ok(None)
            } else {
                num(k).map(Some)
            }
        };
        let int = |k: usize| -> Result<u64> {
            field(k)
                .parse()
                .map_err(|_| Error::parse(line, format!("bad integer in {}", RECORD_COLUMNS[k])))
        };
        out.push(ResultRecord {
            algorithm: field(0).parse()?,
            repetition: int(1)? as usize,
            congestion: field(2).parse()?,
            f_c: num(3)?,
            origin: field(4).to_string(),
            destination: field(5).to_string(),
            modality_count: int(6)? as usize,
            performance_ratio: opt_num(7)?,
            realized_total_time: opt_num(8)?,
            oracle_time: opt_num(9)?,
            regret_sum: opt_num(10)?,
            steps: int(11)? as usize,
            wall_clock_micros: num(12)?,
            failed: field(13)
                .parse()
                .map_err(|_| Error::parse(line, "bad boolean in failed"))?,
            failure: field(14).to_string(),
            seed: int(15)?,
        });
    }
    Ok(out)
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record([
        "algorithm",
        "congestion",
        "fc",
        "episodes",
        "failures",
        "mean_ratio",
        "std_ratio",
        "mean_wall_micros",
        "time_ratio_vs_tacts",
    ])
    .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.algorithm.to_string(),
            r.congestion.to_string(),
            fx(r.f_c),
            r.episodes.to_string(),
            r.failures.to_string(),
            opt(r.mean_ratio),
            opt(r.std_ratio),
            opt(r.mean_wall_micros),
            opt(r.time_ratio_vs_tacts),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

#[derive(Serialize)]
struct RatioSeries {
    algorithm: String,
    congestion: String,
    fc: f64,
    ratios: Vec<f64>,
    mean: Option<f64>,
    std: Option<f64>,
}

#[derive(Serialize)]
struct TimeSeries {
    algorithm: String,
    congestion: String,
    fc: f64,
    mean_wall_micros: Option<f64>,
    ratio_vs_tacts: Option<f64>,
}

#[derive(Serialize)]
struct PlotData {
    performance_ratio: Vec<RatioSeries>,
    execution_time: Vec<TimeSeries>,
}

pub fn plotdata_json(records: &[ResultRecord], rows: &[SummaryRow]) -> String {
    let r6 = |x: Option<f64>| x.map(round6);
    let performance_ratio = rows
        .iter()
        .map(|s| RatioSeries {
            algorithm: s.algorithm.to_string(),
            congestion: s.congestion.to_string(),
            fc: round6(s.f_c),
            ratios: records
                .iter()
                .filter(|r| {
                    r.algorithm == s.algorithm
                        && r.congestion == s.congestion
                        && r.f_c == s.f_c
                        && !r.failed
                })
                .filter_map(|r| r.performance_ratio.map(round6))
                .collect(),
            mean: r6(s.mean_ratio),
            std: r6(s.std_ratio),
        })
        .collect();
    let execution_time = rows
        .iter()
        .map(|s| TimeSeries {
            algorithm: s.algorithm.to_string(),
            congestion: s.congestion.to_string(),
            fc: round6(s.f_c),
            mean_wall_micros: r6(s.mean_wall_micros),
            ratio_vs_tacts: r6(s.time_ratio_vs_tacts),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&PlotData {
        performance_ratio,
        execution_time,
    })
    .expect("plot data serializes");
    s.push('\n');
    s
}

/// Writes `records.csv`, `summary.csv` and `plotdata.json` into `out_dir`.
pub fn emit_results(
    records: &[ResultRecord],
    summary: &[SummaryRow],
    out_dir: &Path,
) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for (name, body) in [
        ("records.csv", records_csv(records)),
        ("summary.csv", summary_csv(summary)),
        ("plotdata.json", plotdata_json(records, summary)),
    ] {
        let path = out_dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
