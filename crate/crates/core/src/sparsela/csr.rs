use crate::error::{Error, Result};

/// Unordered `(row, col, value)` entries of an `n x n` matrix.
#[derive(Debug, Clone, Default)]
pub struct TripletBuffer {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuffer {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self {
            n,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push((row, col, value));
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends another buffer's entries; used to merge per-worker buffers.
    pub fn append(&mut self, other: &mut TripletBuffer) -> Result<()> {
        if other.n != self.n {
            return Err(Error::InvalidArgument(format!(
                "cannot merge {}x{} buffer into {}x{}",
                other.n, other.n, self.n, self.n
            )));
        }
        self.entries.append(&mut other.entries);
        Ok(())
    }
}

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Sums duplicate entries; rows and columns come out sorted.
pub fn to_csr(buf: &TripletBuffer) -> Result<CsrMatrix> {
    let n = buf.n;
    if let Some(&(i, j, _)) = buf.entries.iter().find(|&&(i, j, _)| i >= n || j >= n) {
        return Err(Error::InvalidArgument(format!(
            "triplet ({i}, {j}) out of range for dimension {n}"
        )));
    }
    let mut order: Vec<usize> = (0..buf.entries.len()).collect();
    // stable: duplicates are summed in insertion order
    order.sort_by_key(|&k| (buf.entries[k].0, buf.entries[k].1));

    let mut row_offsets = vec![0usize; n + 1];
    let mut col_indices = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut last: Option<(usize, usize)> = None;
    for k in order {
        let (i, j, v) = buf.entries[k];
        if last == Some((i, j)) {
            *values.last_mut().unwrap() += v;
        } else {
            col_indices.push(j);
            values.push(v);
            row_offsets[i + 1] += 1;
            last = Some((i, j));
        }
    }
    for i in 0..n {
        row_offsets[i + 1] += row_offsets[i];
    }
    Ok(CsrMatrix {
        n,
        row_offsets,
        col_indices,
        values,
    })
}

impl CsrMatrix {
    /// Matrix with the given pattern and all values zero. Columns in each row
    /// must already be sorted and unique.
    pub fn from_pattern(
        n: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
    ) -> Result<Self> {
        if row_offsets.len() != n + 1 || row_offsets[n] != col_indices.len() {
            return Err(Error::InvalidArgument("inconsistent CSR pattern".into()));
        }
        for i in 0..n {
            let row = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&j| j >= n) {
                return Err(Error::InvalidArgument(format!(
                    "row {i} columns unsorted, duplicated or out of range"
                )));
            }
        }
        let nnz = col_indices.len();
        Ok(Self {
            n,
            row_offsets,
            col_indices,
            values: vec![0.0; nnz],
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Position of `(i, j)` in the value array, if stored.
    pub fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        self.col_indices[lo..hi]
            .binary_search(&j)
            .ok()
            .map(|k| lo + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.values[k])
    }

    /// `y = A x`
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                s += self.values[k] * x[self.col_indices[k]];
            }
            *yi = s;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// `x^T A x`
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn same_pattern(&self, other: &CsrMatrix) -> bool {
        self.n == other.n
            && self.row_offsets == other.row_offsets
            && self.col_indices == other.col_indices
    }

    /// `alpha * self + beta * other` for matrices sharing one pattern.
    pub fn linear_combination(
        &self,
        alpha: f64,
        other: &CsrMatrix,
        beta: f64,
    ) -> Result<CsrMatrix> {
        if !self.same_pattern(other) {
            return Err(Error::InvalidArgument(
                "linear combination needs identical sparsity patterns".into(),
            ));
        }
        let mut out = self.clone();
        for (o, &b) in out.values.iter_mut().zip(&other.values) {
            *o = alpha * *o + beta * b;
        }
        Ok(out)
    }

    pub fn is_structurally_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]]
                .iter()
                .all(|&j| self.slot(j, i).is_some())
        })
    }

    /// `max |a_ij - a_ji|` over stored entries; infinite if the pattern is asymmetric.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                let j = self.col_indices[k];
                match self.slot(j, i) {
                    Some(t) => worst = worst.max((self.values[k] - self.values[t]).abs()),
                    None => return f64::INFINITY,
                }
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                row[self.col_indices[k]] = self.values[k];
            }
        }
        d
    }
}
