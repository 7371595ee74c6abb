use std::io::Write;

use serde::Serialize;

use crate::Result;

fn num(x: f64) -> String {
    format!("{x}")
}

/// Statistics at one (parameter point, L).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub params: Vec<f64>,
    pub l: usize,
    /// Initial charge of the samples (`N`, `S^z`, or `N_r` for transport).
    pub n0: f64,
    pub mean_var_density: f64,
    pub mean_var: f64,
    pub mean_dn: f64,
    /// Standard error of the variance samples.
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
    #[serde(skip)]
    pub var_samples: Vec<f64>,
    #[serde(skip)]
    pub dn_samples: Vec<f64>,
    /// Largest per-sample `|S^z(t) - S^z(0)|` (spinful model only).
    pub sz_drift: Option<f64>,
    /// `(lower, upper)` bounds of the gapless transport window.
    pub frozen_window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub param_names: Vec<String>,
    pub rows: Vec<ScanRow>,
}

impl ScanResult {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let transport = self.rows.iter().any(|r| r.frozen_window.is_some());
        let mut header = self.param_names.clone();
        header.extend(["L", "mean_var_density", "mean_var", "mean_dN", "stderr", "n_samples", "seed", "N0"].map(String::from));
        if transport {
            header.extend(["frozen_below", "frozen_above"].map(String::from));
        }
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.params.iter().map(|&p| num(p)).collect();
            rec.extend([
                r.l.to_string(),
                num(r.mean_var_density),
                num(r.mean_var),
                num(r.mean_dn),
                num(r.stderr),
                r.n_samples.to_string(),
                r.seed.to_string(),
                num(r.n0),
            ]);
            if let Some((lo, hi)) = r.frozen_window.filter(|_| transport) {
                rec.extend([num(lo), num(hi)]);
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuenchPoint {
    pub t: f64,
    pub n: f64,
    pub energy: f64,
    pub boundary_on: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuenchSeries {
    pub l: usize,
    pub n0: f64,
    pub seed: u64,
    pub rows: Vec<QuenchPoint>,
}

impl QuenchSeries {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "N", "E", "boundary_on", "L", "seed"])?;
        for p in &self.rows {
            w.write_record([num(p.t), num(p.n), num(p.energy), p.boundary_on.to_string(), self.l.to_string(), self.seed.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseLabel {
    Frozen,
    Fluctuating,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCell {
    pub x: f64,
    pub y: f64,
    pub label: PhaseLabel,
    /// `δ²/L` at the largest size.
    pub density: f64,
    /// `δ²(L_max) / δ²(L_max - 2)`, when that size was run.
    pub growth: Option<f64>,
    /// `δ²/L` per size, aligned with `sizes`.
    pub densities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagram {
    pub x_param: String,
    pub y_param: String,
    pub x_values: Vec<f64>,
    pub y_values: Vec<f64>,
    pub sizes: Vec<usize>,
    pub l_max: usize,
    pub threshold: f64,
    pub growth_ratio: f64,
    pub cells: Vec<PhaseCell>,
    #[serde(skip)]
    pub scan: ScanResult,
}

impl PhaseDiagram {
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn cell(&self, x: f64, y: f64) -> Option<&PhaseCell> {
        self.cells.iter().find(|c| c.x == x && c.y == y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionRow {
    pub params: Vec<f64>,
    pub l: usize,
    pub mean_element: f64,
    pub n_pairs: usize,
    pub n_qualifying: usize,
    pub energy_tol: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionScan {
    pub param_names: Vec<String>,
    pub rows: Vec<CriterionRow>,
}

impl CriterionScan {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.param_names.clone();
        header.extend(["L", "mean_element", "n_pairs", "n_qualifying", "energy_tol", "seed"].map(String::from));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.params.iter().map(|&p| num(p)).collect();
            rec.extend([
                r.l.to_string(),
                num(r.mean_element),
                r.n_pairs.to_string(),
                r.n_qualifying.to_string(),
                num(r.energy_tol),
                r.seed.to_string(),
            ]);
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
