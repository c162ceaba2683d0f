//! Arbitrary-precision integer/rational matrices and exact lattice linear
//! algebra.
//!
//! Everything in here is exact: no floating point, no rounding. Hermite
//! normal form with an explicit transformation matrix is the single primitive
//! behind kernels and saturations, so there is one audited code path for all
//! lattice questions asked by the rest of the crate.

use num::{BigInt, BigRational, Integer, One, Signed, Zero};
use thiserror::Error;

/// Exact integer scalar used throughout the crate.
pub type Int = BigInt;
/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

/// Build an [`Int`] from a machine integer.
pub fn int(v: i64) -> Int {
    Int::from(v)
}

/// Build a [`Rat`] from a machine integer.
pub fn rat(v: i64) -> Rat {
    Rat::from_integer(Int::from(v))
}

/// Build a [`Rat`] from numerator and denominator.
pub fn ratio(num: i64, den: i64) -> Rat {
    Rat::new(Int::from(num), Int::from(den))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinAlgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("system has no solution")]
    NoSolution,
    #[error("matrix is singular")]
    Singular,
}

/// Dense matrix of exact integers, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Int::one();
        }
        m
    }

    /// Build from rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<Int>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|row| row.len() == c),
            "ragged rows in IntMatrix::from_rows"
        );
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flat_map(|row| row.iter().cloned()).collect(),
        }
    }

    /// Convenience constructor from machine integers.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            &rows
                .iter()
                .map(|r| r.iter().map(|&v| int(v)).collect())
                .collect::<Vec<_>>(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Int] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn to_rational(&self) -> RationalMatrix {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|v| Rat::from_integer(v.clone()))
                .collect(),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// row[dst] += q * row[src]
    fn add_multiple(&mut self, dst: usize, src: usize, q: &Int) {
        for j in 0..self.cols {
            let v = &self[(src, j)] * q;
            self[(dst, j)] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self[(i, j)].clone();
            self[(i, j)] = v;
        }
    }

    /// Row-style Hermite normal form with transformation: returns `(h, u)`
    /// with `u * self == h`, `u` unimodular, `h` in row echelon form with
    /// positive pivots and zero rows at the bottom.
    pub fn hnf_with_transform(&self) -> (IntMatrix, IntMatrix) {
        let mut h = self.clone();
        let mut u = IntMatrix::identity(self.rows);
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            // Clear the column below pivot_row by gcd steps.
            loop {
                // Find the row (>= pivot_row) with the smallest nonzero |entry|.
                let mut best: Option<usize> = None;
                for i in pivot_row..h.rows {
                    if !h[(i, col)].is_zero()
                        && best.map_or(true, |b| h[(i, col)].abs() < h[(b, col)].abs())
                    {
                        best = Some(i);
                    }
                }
                let Some(best) = best else { break };
                h.swap_rows(pivot_row, best);
                u.swap_rows(pivot_row, best);
                let mut done = true;
                for i in pivot_row + 1..h.rows {
                    if h[(i, col)].is_zero() {
                        continue;
                    }
                    let q = -(&h[(i, col)] / &h[(pivot_row, col)]);
                    h.add_multiple(i, pivot_row, &q);
                    u.add_multiple(i, pivot_row, &q);
                    if !h[(i, col)].is_zero() {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
            if h[(pivot_row, col)].is_zero() {
                continue;
            }
            if h[(pivot_row, col)].is_negative() {
                h.negate_row(pivot_row);
                u.negate_row(pivot_row);
            }
            // Reduce entries above the pivot into [0, pivot).
            for i in 0..pivot_row {
                let q = -h[(i, col)].div_floor(&h[(pivot_row, col)]);
                if !q.is_zero() {
                    h.add_multiple(i, pivot_row, &q);
                    u.add_multiple(i, pivot_row, &q);
                }
            }
            pivot_row += 1;
        }
        (h, u)
    }

    pub fn rank(&self) -> usize {
        let (h, _) = self.hnf_with_transform();
        (0..h.rows)
            .filter(|&i| h.row(i).iter().any(|v| !v.is_zero()))
            .count()
    }

    /// Primitive basis of the right kernel `{x : self * x = 0}`.
    ///
    /// The returned vectors generate the full saturated kernel lattice
    /// (they are rows of a unimodular matrix).
    pub fn kernel(&self) -> Vec<Vec<Int>> {
        let (h, u) = self.transpose().hnf_with_transform();
        let mut basis = Vec::new();
        for i in 0..h.rows() {
            if h.row(i).iter().all(Zero::is_zero) {
                basis.push(u.row(i).to_vec());
            }
        }
        basis
    }

    /// Exact determinant of a square matrix (rational elimination).
    pub fn det(&self) -> Int {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let d = self.to_rational().det();
        assert!(d.is_integer(), "integer matrix has integer determinant");
        d.to_integer()
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = Int;
    fn index(&self, (i, j): (usize, usize)) -> &Int {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Int {
        &mut self.data[i * self.cols + j]
    }
}

/// Saturation of the row span of `rows` inside ℤ^`ambient`: a primitive basis
/// of `span_Q(rows) ∩ ℤ^ambient`.
///
/// Computed as the kernel of the kernel: `L^⊥ = ker(rows)` and
/// `sat(L) = ker(L^⊥)`, both via the HNF primitive.
pub fn saturation(rows: &[Vec<Int>], ambient: usize) -> Vec<Vec<Int>> {
    if rows.is_empty() {
        return Vec::new();
    }
    assert!(rows.iter().all(|r| r.len() == ambient));
    let complement = IntMatrix::from_rows(rows).kernel();
    if complement.is_empty() {
        // Full rank: the saturation is all of ℤ^ambient.
        return (0..ambient)
            .map(|i| {
                let mut e = vec![Int::zero(); ambient];
                e[i] = Int::one();
                e
            })
            .collect();
    }
    IntMatrix::from_rows(&complement).kernel()
}

/// Kernel and row-span saturation of an integer matrix in one call.
pub fn kernel_and_saturation(a: &IntMatrix) -> (Vec<Vec<Int>>, Vec<Vec<Int>>) {
    let rows: Vec<Vec<Int>> = (0..a.rows()).map(|i| a.row(i).to_vec()).collect();
    (a.kernel(), saturation(&rows, a.cols()))
}

/// Dense matrix of exact rationals, row major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RationalMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Rat>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|row| row.len() == c),
            "ragged rows in RationalMatrix::from_rows"
        );
        RationalMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flat_map(|row| row.iter().cloned()).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, x.len(), "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .fold(Rat::zero(), |acc, v| acc + v)
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Gauss-Jordan elimination in place; returns pivot columns.
    fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self[(r, c)].recip();
            for j in 0..self.cols {
                let v = &self[(r, j)] * &inv;
                self[(r, j)] = v;
            }
            for i in 0..self.rows {
                if i != r && !self[(i, c)].is_zero() {
                    let f = self[(i, c)].clone();
                    for j in 0..self.cols {
                        let v = &self[(i, j)] - &f * &self[(r, j)];
                        self[(i, j)] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols, "det of non-square matrix");
        let mut m = self.clone();
        let mut det = Rat::one();
        for c in 0..m.cols {
            let Some(p) = (c..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                return Rat::zero();
            };
            if p != c {
                m.swap_rows(c, p);
                det = -det;
            }
            det *= m[(c, c)].clone();
            let inv = m[(c, c)].recip();
            for i in c + 1..m.rows {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = &m[(i, c)] * &inv;
                for j in c..m.cols {
                    let v = &m[(i, j)] - &f * &m[(c, j)];
                    m[(i, j)] = v;
                }
            }
        }
        det
    }

    /// Exact inverse of a square matrix.
    pub fn inverse(&self) -> Result<RationalMatrix, LinAlgError> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut aug = RationalMatrix::zero(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rat::one();
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots.iter().enumerate().any(|(k, &c)| c != k) {
            return Err(LinAlgError::Singular);
        }
        let mut inv = RationalMatrix::zero(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = aug[(i, n + j)].clone();
            }
        }
        Ok(inv)
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

/// Exact solution of `A x = b` (square or overdetermined consistent systems).
pub fn solve_exact(a: &RationalMatrix, b: &[Rat]) -> Result<Vec<Rat>, LinAlgError> {
    if a.rows() != b.len() {
        return Err(LinAlgError::DimensionMismatch(format!(
            "matrix has {} rows but rhs has {} entries",
            a.rows(),
            b.len()
        )));
    }
    let mut aug = RationalMatrix::zero(a.rows(), a.cols() + 1);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            aug[(i, j)] = a[(i, j)].clone();
        }
        aug[(i, a.cols())] = b[i].clone();
    }
    let pivots = aug.rref();
    // Inconsistent iff the augmented column is a pivot.
    if pivots.contains(&a.cols()) {
        return Err(LinAlgError::NoSolution);
    }
    // Underdetermined systems are a usage error for our callers: demand a
    // unique solution.
    if pivots.len() < a.cols() {
        return Err(LinAlgError::NoSolution);
    }
    let mut x = vec![Rat::zero(); a.cols()];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[(r, a.cols())].clone();
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_identity() {
        let a = RationalMatrix::identity(2);
        let b = vec![rat(3), rat(-1)];
        assert_eq!(solve_exact(&a, &b).unwrap(), b);
    }

    #[test]
    fn solve_one_by_one_division() {
        let a = RationalMatrix::from_rows(&[vec![rat(-2)]]);
        let x = solve_exact(&a, &[rat(-3)]).unwrap();
        assert_eq!(x, vec![ratio(3, 2)]);
    }

    #[test]
    fn solve_inconsistent_overdetermined() {
        let a = RationalMatrix::from_rows(&[
            vec![rat(1), rat(0)],
            vec![rat(0), rat(1)],
            vec![rat(1), rat(1)],
        ]);
        assert_eq!(
            solve_exact(&a, &[rat(1), rat(2), rat(4)]),
            Err(LinAlgError::NoSolution)
        );
    }

    #[test]
    fn solve_consistent_overdetermined() {
        let a = RationalMatrix::from_rows(&[
            vec![rat(1), rat(0)],
            vec![rat(0), rat(1)],
            vec![rat(1), rat(1)],
        ]);
        assert_eq!(
            solve_exact(&a, &[rat(1), rat(2), rat(3)]).unwrap(),
            vec![rat(1), rat(2)]
        );
    }

    #[test]
    fn kernel_of_1x2() {
        let a = IntMatrix::from_i64(&[&[1, -2]]);
        let k = a.kernel();
        assert_eq!(k.len(), 1);
        // Primitive generator of x - 2y = 0 is ±(2, 1).
        let g = &k[0];
        assert!(
            (g[0] == int(2) && g[1] == int(1)) || (g[0] == int(-2) && g[1] == int(-1)),
            "unexpected kernel generator {g:?}"
        );
    }

    #[test]
    fn kernel_of_identity_is_trivial() {
        assert!(IntMatrix::identity(3).kernel().is_empty());
    }

    #[test]
    fn saturation_of_index_two_sublattice() {
        let sat = saturation(&[vec![int(2), int(0), int(0)]], 3);
        assert_eq!(sat.len(), 1);
        let g = &sat[0];
        assert!(g[0].abs() == int(1) && g[1].is_zero() && g[2].is_zero());
    }

    #[test]
    fn hnf_transform_is_consistent() {
        let a = IntMatrix::from_i64(&[&[2, 4, 4], &[-6, 6, 12], &[10, 4, 16]]);
        let (h, u) = a.hnf_with_transform();
        // u * a == h
        for i in 0..3 {
            for j in 0..3 {
                let mut s = Int::zero();
                for k in 0..3 {
                    s += &u[(i, k)] * &a[(k, j)];
                }
                assert_eq!(s, h[(i, j)]);
            }
        }
        // u unimodular
        assert_eq!(u.det().abs(), int(1));
    }

    #[test]
    fn det_matches_hand_value() {
        let a = IntMatrix::from_i64(&[&[1, 2], &[3, 4]]);
        assert_eq!(a.det(), int(-2));
    }

    #[test]
    fn inverse_round_trip() {
        let a = IntMatrix::from_i64(&[&[1, 2], &[3, 5]]).to_rational();
        let inv = a.inverse().unwrap();
        let x = vec![ratio(7, 3), rat(-2)];
        let back = inv.mul_vec(&a.mul_vec(&x));
        assert_eq!(back, x);
    }
}
