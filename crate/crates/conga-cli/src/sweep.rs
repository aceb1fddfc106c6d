//! Convergence sweeps over the number of cells.

use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{write_json, write_table, Cell, Table};
use crate::registry::{find_case, run_case, CaseReport};
use crate::CliError;

/// Errors at or below this are treated as exact and get no order.
pub const EXACT_ERROR: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub dofs: usize,
    pub error: f64,
    /// `log(e_prev / e) / log(N / N_prev)`; `log₂(e_N / e_2N)` for dyadic
    /// sweeps. Absent on the first row and when either error is exact.
    pub order: Option<f64>,
    /// The error did not decrease under refinement.
    pub stalled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub case: String,
    pub degree: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn from_errors(case: &str, degree: usize, data: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(data.len());
        for (i, &(cells, dofs, error)) in data.iter().enumerate() {
            let (order, stalled) = match i.checked_sub(1).map(|j| data[j]) {
                Some((c0, _, e0)) => {
                    let exact = e0 <= EXACT_ERROR || error <= EXACT_ERROR;
                    let order = (!exact).then(|| (e0 / error).ln() / (cells as f64 / c0 as f64).ln());
                    (order, !exact && error >= e0)
                }
                None => (None, false),
            };
            rows.push(ConvergenceRow { cells, dofs, error, order, stalled });
        }
        Self { case: case.to_string(), degree, rows }
    }

    /// Observed order between the last two rows.
    pub fn last_order(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.order)
    }

    pub fn stalled(&self) -> bool {
        self.rows.iter().any(|r| r.stalled)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new("convergence", &["cells", "dofs", "error", "order", "stalled"]);
        for r in &self.rows {
            let order = r.order.map_or(Cell::Text("N/A".into()), Cell::Float);
            t.push(vec![r.cells.into(), r.dofs.into(), r.error.into(), order, Cell::Int(r.stalled as i64)]);
        }
        t
    }
}

/// Runs the case once per entry of `cells`, concurrently, each into
/// `<output>/N<cells>`, then writes `convergence.csv` and `sweep.json` into
/// the output directory.
pub fn convergence_sweep(cfg: &RunConfig, cells: &[usize]) -> Result<(ConvergenceReport, Vec<CaseReport>), CliError> {
    let info = find_case(&cfg.case)?;
    if !info.sweepable {
        return Err(CliError::Config(format!("case {} has no reference solution to sweep against", cfg.case)));
    }
    if cells.is_empty() || cells.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::Config("sweep needs a strictly increasing list of cell counts".into()));
    }
    let root = cfg.output.clone().unwrap_or_else(|| PathBuf::from("out").join(format!("{}_sweep", cfg.case)));
    let configs: Vec<RunConfig> = cells
        .iter()
        .map(|&n| {
            let mut c = cfg.clone();
            c.cells = n;
            c.output = Some(root.join(format!("N{n}")));
            c
        })
        .collect();
    let results: Vec<Result<CaseReport, CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || run_case(c))).collect();
        handles.into_iter().map(|h| h.join().expect("case thread panicked")).collect()
    });
    let reports = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut data = Vec::new();
    for (n, r) in cells.iter().zip(&reports) {
        let e = r.error.ok_or_else(|| {
            CliError::Config(format!("case {} reports no reference error for this configuration", cfg.case))
        })?;
        data.push((*n, r.dofs, e));
    }
    let report = ConvergenceReport::from_errors(&cfg.case, cfg.degree, &data);
    let mut base = cfg.clone();
    base.sweep_cells = cells.to_vec();
    base.output = None;
    let hash = base.hash()?;
    write_table(&root, &report.table(), &hash)?;
    let summary = json!({
        "config": serde_json::to_value(&base).expect("config serializes"),
        "report": report,
        "exact_error_threshold": EXACT_ERROR,
        "last_order": report.last_order(),
        "stalled": report.stalled(),
    });
    write_json(&root.join("sweep.json"), &summary, &hash)?;
    Ok((report, reports))
}
