use std::collections::BTreeMap;

use serde::Serialize;

use crate::harness::config::{Algorithm, Congestion};
use crate::harness::experiment::ResultRecord;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub congestion: Congestion,
    pub f_c: f64,
    pub episodes: usize,
    pub failures: usize,
    /// `None` when no episode in the cell produced a ratio.
    pub mean_ratio: Option<f64>,
    pub std_ratio: Option<f64>,
    pub mean_wall_micros: Option<f64>,
    pub time_ratio_vs_tacts: Option<f64>,
}

/// Ordered key for a (congestion, f_c, algorithm) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell(Congestion, f64, Algorithm);

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .cmp(&other.0)
            .then(self.1.total_cmp(&other.1))
            .then(self.2.cmp(&other.2))
    }
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample standard deviation; zero for a single value.
pub fn std_dev(xs: &[f64]) -> Option<f64> {
    let m = mean(xs)?;
    if xs.len() < 2 {
        return Some(0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

pub fn aggregate(records: &[ResultRecord]) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<Cell, Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        cells
            .entry(Cell(r.congestion, r.f_c, r.algorithm))
            .or_default()
            .push(r);
    }
    let mut rows: Vec<SummaryRow> = cells
        .iter()
        .map(|(Cell(congestion, f_c, algorithm), rs)| {
            let ok: Vec<&&ResultRecord> = rs.iter().filter(|r| !r.failed).collect();
            let ratios: Vec<f64> = ok.iter().filter_map(|r| r.performance_ratio).collect();
            let walls: Vec<f64> = ok.iter().map(|r| r.wall_clock_micros).collect();
            SummaryRow {
                algorithm: *algorithm,
                congestion: *congestion,
                f_c: *f_c,
                episodes: rs.len(),
                failures: rs.len() - ok.len(),
                mean_ratio: mean(&ratios),
                std_ratio: std_dev(&ratios),
                mean_wall_micros: mean(&walls),
                time_ratio_vs_tacts: None,
            }
        })
        .collect();
    let tacts: BTreeMap<(Congestion, u64), f64> = rows
        .iter()
        .filter(|r| r.algorithm == Algorithm::Tacts)
        .filter_map(|r| Some(((r.congestion, r.f_c.to_bits()), r.mean_wall_micros?)))
        .collect();
    for row in &mut rows {
        row.time_ratio_vs_tacts = match (
            row.mean_wall_micros,
            tacts.get(&(row.congestion, row.f_c.to_bits())),
        ) {
            (Some(w), Some(&t)) if t > 0.0 => Some(w / t),
            _ => None,
        };
    }
    rows
}
