//! Regeneration of the two reference tables: deletion-substitution bounds
//! at `n = 100, 1000` against the Gallager baseline, and random insertion
//! bounds at the optimal block length.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{evaluate, gallager_bound, optimize_block_length, ChannelParams, Method};
use crate::error::Result;

/// Absolute tolerance for cells printed with four decimals.
pub const ABSOLUTE_TOLERANCE: f64 = 5e-4;
/// Relative tolerance for cells printed in scientific notation.
pub const RELATIVE_TOLERANCE: f64 = 0.01;
/// Largest block length scanned for the insertion optimum.
pub const INSERTION_SCAN_MAX: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
    Exact,
}

impl Tolerance {
    fn admits(self, computed: f64, reference: f64) -> bool {
        match self {
            Tolerance::Absolute(t) => (computed - reference).abs() <= t,
            Tolerance::Relative(t) => (computed - reference).abs() <= t * reference.abs(),
            Tolerance::Exact => computed == reference,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableCell {
    pub table: &'static str,
    /// Channel parameters of the row, e.g. `p_d=0.01 p_e=0.03`.
    pub row: String,
    pub column: &'static str,
    pub computed: f64,
    pub reference: f64,
    pub tolerance: Tolerance,
    pub within: bool,
}

impl TableCell {
    fn new(
        table: &'static str,
        row: String,
        column: &'static str,
        computed: f64,
        reference: f64,
        tol: Tolerance,
    ) -> Self {
        TableCell {
            table,
            row,
            column,
            computed,
            reference,
            tolerance: tol,
            within: tol.admits(computed, reference),
        }
    }
}

/// `(p_d, p_e, baseline, n = 1000, n = 100)`.
type DeletionRow = (f64, f64, f64, f64, f64);

/// `(p_d, p_e, 1 - LB Gallager, 1 - LB n=1000, 1 - LB n=100)`.
const DELETION_SUBSTITUTION_SMALL: [DeletionRow; 9] = [
    (1e-5, 1e-5, 3.6104e-4, 3.5817e-4, 3.5834e-4),
    (1e-5, 1e-4, 1.6535e-3, 1.6506e-3, 1.6508e-3),
    (1e-5, 1e-3, 1.15881e-2, 1.15853e-2, 1.15854e-2),
    (1e-4, 1e-5, 1.6535e-3, 1.6248e-3, 1.6264e-3),
    (1e-4, 1e-4, 2.9459e-3, 2.9172e-3, 2.9188e-3),
    (1e-4, 1e-3, 1.2879e-2, 1.2850e-2, 1.2852e-2),
    (1e-3, 1e-5, 1.1588e-2, 1.1302e-2, 1.1319e-2),
    (1e-3, 1e-4, 1.2879e-2, 1.2593e-2, 1.261e-2),
    (1e-3, 1e-3, 2.2804e-2, 2.2518e-2, 2.2535e-2),
];

/// `(p_d, p_e, LB Gallager, LB n=1000, LB n=100)`.
const DELETION_SUBSTITUTION_LARGE: [DeletionRow; 9] = [
    (0.01, 0.01, 0.8392, 0.8419, 0.8418),
    (0.01, 0.03, 0.7268, 0.7373, 0.7293),
    (0.01, 0.1, 0.4549, 0.4576, 0.4575),
    (0.05, 0.01, 0.6368, 0.6476, 0.6469),
    (0.05, 0.03, 0.5289, 0.5397, 0.5390),
    (0.05, 0.1, 0.2681, 0.2789, 0.2781),
    (0.1, 0.01, 0.4583, 0.4729, 0.4716),
    (0.1, 0.03, 0.3561, 0.3707, 0.3693),
    (0.1, 0.1, 0.1089, 0.1236, 0.1222),
];

/// `(p_i, 1 - LB Gallager, 1 - LB, optimal n)`.
const INSERTION_SMALL: [(f64, f64, f64, usize); 5] = [
    (1e-6, 2.14e-5, 2.007e-5, 121),
    (1e-5, 1.81e-4, 1.68e-4, 57),
    (1e-4, 1.47e-3, 1.35e-3, 27),
    (1e-3, 1.14e-2, 1.02e-2, 13),
    (1e-2, 8.07e-1, 7.14e-2, 7),
];

/// `(p_i, LB Gallager, LB, optimal n)`.
const INSERTION_LARGE: [(f64, f64, f64, usize); 7] = [
    (0.03, 0.8056, 0.8276, 5),
    (0.05, 0.7136, 0.7442, 5),
    (0.10, 0.5310, 0.5702, 4),
    (0.15, 0.3901, 0.4230, 4),
    (0.20, 0.2781, 0.2962, 3),
    (0.23, 0.2220, 0.2283, 3),
    (0.25, 0.1887, 0.1853, 3),
];

/// Gain of the insertion bound over the baseline at `p_i = 0.1`.
const INSERTION_GAIN_AT_TENTH: f64 = 0.0392;

/// Every cell of the deletion-substitution table.
pub fn deletion_substitution_table() -> Result<Vec<TableCell>> {
    const T: &str = "I";
    let rows: Vec<(bool, DeletionRow)> = DELETION_SUBSTITUTION_SMALL
        .iter()
        .map(|&r| (true, r))
        .chain(DELETION_SUBSTITUTION_LARGE.iter().map(|&r| (false, r)))
        .collect();
    let cells: Vec<Vec<TableCell>> = rows
        .par_iter()
        .map(
            |&(complement, (p_d, p_e, g, lb1000, lb100))| -> Result<Vec<TableCell>> {
                let params = ChannelParams::deletion_substitution(p_d, p_e)?;
                let row = format!("p_d={p_d:e} p_e={p_e:e}");
                let gal = gallager_bound(&params)?.rate;
                let at = |n| evaluate(Method::DeletionSubstitution, n, &params).map(|b| b.rate);
                let (r1000, r100) = (at(1000)?, at(100)?);
                Ok(if complement {
                    let tol = Tolerance::Relative(RELATIVE_TOLERANCE);
                    vec![
                        TableCell::new(T, row.clone(), "1-LB gallager", 1.0 - gal, g, tol),
                        TableCell::new(T, row.clone(), "1-LB n=1000", 1.0 - r1000, lb1000, tol),
                        TableCell::new(T, row, "1-LB n=100", 1.0 - r100, lb100, tol),
                    ]
                } else {
                    let tol = Tolerance::Absolute(ABSOLUTE_TOLERANCE);
                    vec![
                        TableCell::new(T, row.clone(), "LB gallager", gal, g, tol),
                        TableCell::new(T, row.clone(), "LB n=1000", r1000, lb1000, tol),
                        TableCell::new(T, row, "LB n=100", r100, lb100, tol),
                    ]
                })
            },
        )
        .collect::<Result<_>>()?;
    Ok(cells.into_iter().flatten().collect())
}

/// Every cell of the insertion table, plus the gain at `p_i = 0.1`.
pub fn insertion_table() -> Result<Vec<TableCell>> {
    const T: &str = "II";
    let rows: Vec<(bool, (f64, f64, f64, usize))> = INSERTION_SMALL
        .iter()
        .map(|&r| (true, r))
        .chain(INSERTION_LARGE.iter().map(|&r| (false, r)))
        .collect();
    let cells: Vec<Vec<TableCell>> = rows
        .par_iter()
        .map(
            |&(complement, (p_i, g, lb, n_ref))| -> Result<Vec<TableCell>> {
                let params = ChannelParams::insertion(p_i)?;
                let row = format!("p_i={p_i:e}");
                let gal = gallager_bound(&params)?.rate;
                let (n_opt, best) =
                    optimize_block_length(Method::RandomInsertion, &params, INSERTION_SCAN_MAX)?;
                let n_cell = TableCell::new(
                    T,
                    row.clone(),
                    "optimal n",
                    n_opt as f64,
                    n_ref as f64,
                    Tolerance::Exact,
                );
                let mut out = if complement {
                    let tol = Tolerance::Relative(RELATIVE_TOLERANCE);
                    vec![
                        TableCell::new(T, row.clone(), "1-LB gallager", 1.0 - gal, g, tol),
                        TableCell::new(T, row.clone(), "1-LB insertion", 1.0 - best.rate, lb, tol),
                        n_cell,
                    ]
                } else {
                    let tol = Tolerance::Absolute(ABSOLUTE_TOLERANCE);
                    vec![
                        TableCell::new(T, row.clone(), "LB gallager", gal, g, tol),
                        TableCell::new(T, row.clone(), "LB insertion", best.rate, lb, tol),
                        n_cell,
                    ]
                };
                if p_i == 0.10 {
                    out.push(TableCell::new(
                        T,
                        row,
                        "gain over gallager",
                        best.rate - gal,
                        INSERTION_GAIN_AT_TENTH,
                        Tolerance::Absolute(ABSOLUTE_TOLERANCE),
                    ));
                }
                Ok(out)
            },
        )
        .collect::<Result<_>>()?;
    Ok(cells.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insertion_table_shape() {
        let cells = insertion_table().unwrap();
        assert_eq!(cells.len(), 12 * 3 + 1);
        let off: Vec<_> = cells.iter().filter(|c| !c.within).collect();
        // The only deviating cell is the baseline at p_i = 0.01, whose
        // reference value carries a misplaced exponent (0.0808 printed as
        // 8.07e-1).
        assert_eq!(off.len(), 1, "{off:?}");
        assert_eq!(off[0].row, "p_i=1e-2");
        assert!((off[0].computed - 0.0808).abs() < 1e-4);
    }
}
