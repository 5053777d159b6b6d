use rayon::prelude::*;
use serde::Serialize;

use super::cycle::{run_cycle, CycleLedger, CycleSpec, Variant};
use crate::error::{Error, Result};

const VARIANTS: [Variant; 2] = [Variant::Coherent, Variant::Dephased];

/// One limit cycle of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleRow {
    pub omega_h: f64,
    pub beta_h: f64,
    pub t_cycle: f64,
    pub variant: Variant,
    pub ledger: CycleLedger,
}

fn run_rows(cells: Vec<CycleSpec>) -> Result<Vec<CycleRow>> {
    cells
        .par_iter()
        .map(|s| {
            let l = run_cycle(s)?.ledger;
            Ok(CycleRow { omega_h: s.omega_h, beta_h: s.beta_h, t_cycle: s.t_cycle, variant: s.variant(), ledger: l })
        })
        .collect()
}

/// Both variants over a grid of hot-bath gaps and temperatures, in
/// `(omega_h, beta_h, variant)` order.
pub fn cycle_grid(base: &CycleSpec, omega_hs: &[f64], beta_hs: &[f64]) -> Result<Vec<CycleRow>> {
    if omega_hs.is_empty() || beta_hs.is_empty() {
        return Err(Error::InvalidParameter("empty sweep".into()));
    }
    let mut cells = Vec::new();
    for &w in omega_hs {
        for &b in beta_hs {
            for v in VARIANTS {
                let s = base.with_hot(w, b).with_variant(v);
                s.validate()?;
                cells.push(s);
            }
        }
    }
    run_rows(cells)
}

/// Limit cycles over a list of durations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiniteTimeTable {
    pub rows: Vec<CycleRow>,
    /// Durations at which the coherent cycle produces work and the dephased one does not.
    pub coherent_only: Vec<f64>,
}

pub fn finite_time_sweep(base: &CycleSpec, t_cycles: &[f64]) -> Result<FiniteTimeTable> {
    if t_cycles.is_empty() {
        return Err(Error::InvalidParameter("empty sweep".into()));
    }
    let mut ts = t_cycles.to_vec();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut cells = Vec::new();
    for &t in &ts {
        for v in VARIANTS {
            let s = base.with_t_cycle(t).with_variant(v);
            s.validate()?;
            cells.push(s);
        }
    }
    let rows = run_rows(cells)?;
    let coherent_only = rows
        .chunks(2)
        .filter(|pair| pair[0].ledger.w_net > 0.0 && pair[1].ledger.w_net <= 0.0)
        .map(|pair| pair[0].t_cycle)
        .collect();
    Ok(FiniteTimeTable { rows, coherent_only })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherencePoint {
    pub omega_h: f64,
    pub beta_h: f64,
    pub c_max: f64,
    pub power_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceCorrelation {
    pub points: Vec<CoherencePoint>,
    pub spearman: f64,
}

/// Maximum coherence of the coherent cycle against its power advantage over
/// the dephased one.
pub fn coherence_power_correlation(
    base: &CycleSpec,
    omega_hs: &[f64],
    beta_hs: &[f64],
) -> Result<CoherenceCorrelation> {
    let rows = cycle_grid(base, omega_hs, beta_hs)?;
    let points: Vec<CoherencePoint> = rows
        .chunks(2)
        .map(|pair| CoherencePoint {
            omega_h: pair[0].omega_h,
            beta_h: pair[0].beta_h,
            c_max: pair[0].ledger.coherence_max,
            power_gap: pair[0].ledger.power - pair[1].ledger.power,
        })
        .collect();
    let x: Vec<f64> = points.iter().map(|p| p.c_max).collect();
    let y: Vec<f64> = points.iter().map(|p| p.power_gap).collect();
    Ok(CoherenceCorrelation { spearman: spearman(&x, &y), points })
}

/// Ranks starting at 1, ties sharing their mean rank.
fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = mean;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (Pearson correlation of the ranks). NaN for
/// fewer than two points or a constant input.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() || x.len() < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_values() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        // Monotone but nonlinear.
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 8.0, 27.0, 64.0]) - 1.0).abs() < 1e-15);
        assert_eq!(ranks(&[2.0, 1.0, 2.0]), vec![2.5, 1.0, 2.5]);
        assert!(spearman(&[1.0], &[1.0]).is_nan());
    }

    #[test]
    fn finite_time_orders_and_short_cycles_fail() {
        let base = CycleSpec::new(1.0, 1.5, 10.0, 0.1, 0.5, 2.0, 20.0).unwrap();
        let t = finite_time_sweep(&base, &[20.0, 0.05]).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.rows[0].t_cycle, 0.05);
        assert_eq!(t.rows[1].variant, Variant::Dephased);
        assert!(t.rows[0].ledger.w_net <= 0.0 && t.rows[1].ledger.w_net <= 0.0);
        assert!(t.rows.iter().all(|r| r.ledger.converged));
        assert!(finite_time_sweep(&base, &[]).is_err());
    }
}
