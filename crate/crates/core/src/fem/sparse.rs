//! Compressed sparse row operators assembled from triplets.

use std::io::Write;

use crate::error::FemError;

/// Tolerance for the symmetry check on operators flagged symmetric.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
    symmetric: bool,
}

impl SparseOperator {
    /// Build from (row, col, value) triplets; duplicates are accumulated.
    /// When `symmetric` is set the stored entries are verified against their
    /// transposes.
    pub fn from_triplets(
        n: usize,
        mut triplets: Vec<(u32, u32, f64)>,
        symmetric: bool,
    ) -> Result<Self, FemError> {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_counts = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(u32, u32)> = None;
        for &(r, c, v) in &triplets {
            debug_assert!((r as usize) < n && (c as usize) < n);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_counts[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        let mut row_ptr = row_counts;
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let op = SparseOperator {
            n,
            row_ptr,
            col_idx,
            values,
            symmetric,
        };
        if symmetric {
            let defect = op.symmetry_defect();
            if defect > SYMMETRY_TOL {
                return Err(FemError::AsymmetricOperator { defect });
            }
        }
        Ok(op)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// y = A x.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for row in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.col_idx[k] as usize];
            }
            y[row] = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for row in 0..self.n {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                if self.col_idx[k] as usize == row {
                    d[row] += self.values[k];
                }
            }
        }
        d
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&(col as u32)) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// Sum of all entries (equals 1ᵀ A 1).
    pub fn total_sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                self.values[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .sum()
            })
            .collect()
    }

    /// max |A_ij - A_ji| over the stored pattern.
    pub fn symmetry_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for row in 0..self.n {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                let col = self.col_idx[k] as usize;
                defect = defect.max((self.values[k] - self.entry(col, row)).abs());
            }
        }
        defect
    }

    /// Plain-text triplet dump, `row,col,value` per line, for external
    /// inspection.
    pub fn write_triplets<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "row,col,value")?;
        for row in 0..self.n {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                writeln!(w, "{},{},{:.16e}", row, self.col_idx[k], self.values[k])?;
            }
        }
        Ok(())
    }
}

/// Precomputed union pattern for fast linear combinations of operators that
/// share a dimension. The time stepper rebuilds its system matrix every step
/// through this without reallocating.
#[derive(Debug, Clone)]
pub struct OperatorCombo {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    /// For each component, entry k of its CSR maps to slot maps[comp][k].
    maps: Vec<Vec<usize>>,
}

impl OperatorCombo {
    pub fn new(components: &[&SparseOperator]) -> Self {
        assert!(!components.is_empty());
        let n = components[0].n;
        assert!(components.iter().all(|c| c.n == n));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx: Vec<u32> = Vec::new();
        for row in 0..n {
            let mut cols: Vec<u32> = components
                .iter()
                .flat_map(|c| {
                    c.col_idx[c.row_ptr[row]..c.row_ptr[row + 1]]
                        .iter()
                        .copied()
                })
                .collect();
            cols.sort_unstable();
            cols.dedup();
            row_ptr[row + 1] = row_ptr[row] + cols.len();
            col_idx.extend_from_slice(&cols);
        }
        let maps = components
            .iter()
            .map(|c| {
                let mut map = Vec::with_capacity(c.nnz());
                for row in 0..n {
                    let union = &col_idx[row_ptr[row]..row_ptr[row + 1]];
                    for k in c.row_ptr[row]..c.row_ptr[row + 1] {
                        let pos = union.binary_search(&c.col_idx[k]).unwrap();
                        map.push(row_ptr[row] + pos);
                    }
                }
                map
            })
            .collect();
        OperatorCombo {
            n,
            row_ptr,
            col_idx,
            maps,
        }
    }

    /// An operator with the union pattern and zero values, ready for
    /// `combine_into`.
    pub fn zero_operator(&self, symmetric: bool) -> SparseOperator {
        SparseOperator {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: vec![0.0; self.col_idx.len()],
            symmetric,
        }
    }

    /// out = Σ scale_i · component_i. The components must be the ones this
    /// combo was built from (same patterns); values may have changed.
    pub fn combine_into(&self, components: &[(&SparseOperator, f64)], out: &mut SparseOperator) {
        assert_eq!(components.len(), self.maps.len());
        assert_eq!(out.values.len(), self.col_idx.len());
        out.values.fill(0.0);
        for (ci, (comp, scale)) in components.iter().enumerate() {
            for (k, &slot) in self.maps[ci].iter().enumerate() {
                out.values[slot] += scale * comp.values[k];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulates_duplicates_and_multiplies() {
        let t = vec![
            (0u32, 0u32, 1.0),
            (0, 1, 2.0),
            (1, 0, 2.0),
            (1, 1, 3.0),
            (0, 0, 0.5),
        ];
        let a = SparseOperator::from_triplets(2, t, true).unwrap();
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.entry(0, 0), 1.5);
        let y = a.matvec(&[1.0, 10.0]);
        assert_eq!(y, vec![21.5, 32.0]);
    }

    #[test]
    fn symmetry_check_rejects_asymmetric() {
        let t = vec![(0u32, 1u32, 1.0), (1, 0, 2.0)];
        assert!(matches!(
            SparseOperator::from_triplets(2, t, true),
            Err(FemError::AsymmetricOperator { .. })
        ));
    }

    #[test]
    fn combo_matches_direct_sum() {
        let a = SparseOperator::from_triplets(3, vec![(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)], true)
            .unwrap();
        let b = SparseOperator::from_triplets(3, vec![(0, 1, 4.0), (1, 0, 4.0)], true).unwrap();
        let combo = OperatorCombo::new(&[&a, &b]);
        let mut out = combo.zero_operator(true);
        combo.combine_into(&[(&a, 2.0), (&b, -1.0)], &mut out);
        assert_eq!(out.entry(0, 0), 2.0);
        assert_eq!(out.entry(0, 1), -4.0);
        assert_eq!(out.entry(1, 0), -4.0);
        assert_eq!(out.entry(2, 2), 6.0);
    }

    #[test]
    fn triplet_dump_is_parsable() {
        let a = SparseOperator::from_triplets(2, vec![(0, 0, 1.0), (1, 1, 2.0)], true).unwrap();
        let mut buf = Vec::new();
        a.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("row,col,value\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
