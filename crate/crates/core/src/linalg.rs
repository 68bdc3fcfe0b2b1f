//! Exact integer linear algebra: fraction-free Gauss-Jordan elimination,
//! rank, rational kernels and row-span comparisons.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IntRow = Vec<BigInt>;

pub fn to_big(row: &[i64]) -> IntRow {
    row.iter().map(|&v| BigInt::from(v)).collect()
}

/// Divides a row by the gcd of its entries (no-op on the zero row).
pub fn normalize(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for v in row.iter_mut() {
            *v /= &g;
        }
    }
}

/// Reduced echelon form over the integers: every pivot is positive and is
/// the only non-zero entry of its column.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub rows: Vec<IntRow>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl Echelon {
    pub fn new(mut rows: Vec<IntRow>, ncols: usize) -> Self {
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..ncols {
            let Some(found) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
                continue;
            };
            rows.swap(r, found);
            if rows[r][col].is_negative() {
                for v in rows[r].iter_mut() {
                    *v = -&*v;
                }
            }
            normalize(&mut rows[r]);
            let (head, tail) = rows.split_at_mut(r);
            let (pivot_row, tail) = tail.split_first_mut().expect("pivot row");
            let p = pivot_row[col].clone();
            for other in head.iter_mut().chain(tail.iter_mut()) {
                if other[col].is_zero() {
                    continue;
                }
                let f = other[col].clone();
                for (x, y) in other.iter_mut().zip(pivot_row.iter()) {
                    *x = &p * &*x - &f * y;
                }
                normalize(other);
            }
            pivots.push(col);
            r += 1;
        }
        rows.truncate(r);
        Echelon { rows, pivots, ncols }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Integer basis (gcd 1 per vector) of `{x | A x = 0}`.
    pub fn kernel(&self) -> Vec<IntRow> {
        let lcm = self
            .rows
            .iter()
            .zip(&self.pivots)
            .fold(BigInt::one(), |l, (row, &c)| l.lcm(&row[c]));
        (0..self.ncols)
            .filter(|c| !self.pivots.contains(c))
            .map(|free| {
                let mut x = vec![BigInt::zero(); self.ncols];
                x[free] = lcm.clone();
                for (row, &c) in self.rows.iter().zip(&self.pivots) {
                    x[c] = -(&row[free] * &lcm) / &row[c];
                }
                normalize(&mut x);
                x
            })
            .collect()
    }
}

pub fn rank(rows: &[IntRow], ncols: usize) -> usize {
    Echelon::new(rows.to_vec(), ncols).rank()
}

/// Kernel basis of the `nrows x ncols` matrix given row-wise.
pub fn kernel(rows: &[IntRow], ncols: usize) -> Vec<IntRow> {
    Echelon::new(rows.to_vec(), ncols).kernel()
}

pub fn in_row_span(rows: &[IntRow], v: &[BigInt]) -> bool {
    let ncols = v.len();
    let base = rank(rows, ncols);
    let mut extended = rows.to_vec();
    extended.push(v.to_vec());
    rank(&extended, ncols) == base
}

/// True iff both row sets span the same rational subspace.
pub fn same_row_span(a: &[IntRow], b: &[IntRow], ncols: usize) -> bool {
    let ra = rank(a, ncols);
    let rb = rank(b, ncols);
    if ra != rb {
        return false;
    }
    let joint: Vec<IntRow> = a.iter().chain(b).cloned().collect();
    rank(&joint, ncols) == ra
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<IntRow> {
        rows.iter().map(|r| to_big(r)).collect()
    }

    #[test]
    fn kernel_of_single_equation() {
        // -3a + b = 0
        let k = kernel(&m(&[&[-3, 1]]), 2);
        assert_eq!(k, m(&[&[1, 3]]));
    }

    #[test]
    fn kernel_of_empty_system_is_identity() {
        let k = kernel(&[], 3);
        assert_eq!(k, m(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]));
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let a = m(&[&[2, 4, -6, 1], &[1, 2, -3, 0], &[3, 6, -9, 1]]);
        let k = kernel(&a, 4);
        assert_eq!(k.len(), 4 - rank(&a, 4));
        for x in &k {
            for row in &a {
                let dot: BigInt = row.iter().zip(x).map(|(r, v)| r * v).sum();
                assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn span_comparisons() {
        let a = m(&[&[1, 0, 1], &[0, 1, 1]]);
        let b = m(&[&[1, 1, 2], &[1, -1, 0]]);
        assert!(same_row_span(&a, &b, 3));
        assert!(!same_row_span(&a, &m(&[&[1, 0, 0]]), 3));
        assert!(in_row_span(&a, &to_big(&[2, 3, 5])));
        assert!(!in_row_span(&a, &to_big(&[0, 0, 1])));
    }
}
