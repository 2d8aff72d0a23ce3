//! Exact Gaussian elimination over F_p or F_p(t).

use std::fmt;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::poly::Poly;
use crate::ratfn::RatFn;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix<C> {
    p: u64,
    rows: usize,
    cols: usize,
    data: Vec<C>,
}

/// Outcome of [`linsolve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinSolution<C> {
    /// `A * particular = b`; `kernel` is a basis of the null space of `A`.
    Solved { particular: Vec<C>, kernel: Vec<Vec<C>> },
    /// `certificate^T A = 0` while `certificate^T b = 1`.
    Inconsistent { certificate: Vec<C> },
}

impl<C: Coeff> Matrix<C> {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        Matrix {
            p,
            rows,
            cols,
            data: vec![C::zero(p); rows * cols],
        }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, C::one(p));
        }
        m
    }

    pub fn from_rows(p: u64, rows: Vec<Vec<C>>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let n = rows.len();
        Ok(Matrix {
            p,
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(p: u64, rows: usize, columns: &[Vec<C>]) -> Result<Self> {
        let mut m = Self::zeros(p, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has length {}, expected {rows}",
                    col.len()
                )));
            }
            for (i, c) in col.iter().enumerate() {
                m.set(i, j, c.clone());
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &C {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, c: C) {
        self.data[i * self.cols + j] = c;
    }

    pub fn column(&self, j: usize) -> Vec<C> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.is_zero())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        let mut out = Self::zeros(self.p, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j).add(&a.mul(b));
                    out.set(i, j, cur);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C]) -> Result<Vec<C>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = C::zero(self.p);
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc.add(&a.mul(x));
                    }
                }
                acc
            })
            .collect())
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return Err(Error::DimensionMismatch("shape".into()));
        }
        Ok(Matrix {
            p: self.p,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect(),
        })
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("power of a non-square matrix".into()));
        }
        let mut acc = Self::identity(self.p, self.rows);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Stacks `self` on top of `o`.
    pub fn vstack(&self, o: &Self) -> Result<Self> {
        if self.cols != o.cols {
            return Err(Error::DimensionMismatch("vstack column count".into()));
        }
        let mut data = self.data.clone();
        data.extend(o.data.iter().cloned());
        Ok(Matrix {
            p: self.p,
            rows: self.rows + o.rows,
            cols: self.cols,
            data,
        })
    }

    /// Reduced row echelon form, pivoting only in the first `pivot_cols`
    /// columns. Returns the pivot column of each pivot row.
    fn rref_in_place(&mut self, pivot_cols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..pivot_cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    self.data.swap(pr * self.cols + j, r * self.cols + j);
                }
            }
            let inv = self.get(r, c).inv().expect("nonzero pivot");
            for j in 0..self.cols {
                let v = self.get(r, j);
                if !v.is_zero() {
                    let scaled = v.mul(&inv);
                    self.set(r, j, scaled);
                }
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..self.cols {
                    let pv = self.get(r, j);
                    if pv.is_zero() {
                        continue;
                    }
                    let v = self.get(i, j).sub(&f.mul(pv));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let piv = m.rref_in_place(self.cols);
        (m, piv)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of `{v : A v = 0}`.
    pub fn kernel(&self) -> Vec<Vec<C>> {
        let (r, pivots) = self.rref();
        let p = self.p;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![C::zero(p); self.cols];
                v[f] = C::one(p);
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = r.get(row, f).neg();
                }
                v
            })
            .collect()
    }

    /// A basis of the column space, taken from the pivot columns of `self`.
    pub fn column_space(&self) -> Vec<Vec<C>> {
        let (_, pivots) = self.rref();
        pivots.iter().map(|&c| self.column(c)).collect()
    }
}

/// Solves `A v = b` exactly, returning either a particular solution with a
/// kernel basis or a certificate that no solution exists.
pub fn linsolve<C: Coeff>(a: &Matrix<C>, b: &[C]) -> Result<LinSolution<C>> {
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side of length {} for {} rows",
            b.len(),
            a.rows
        )));
    }
    let p = a.p;
    let (n, m) = (a.rows, a.cols);
    // [A | b | I] so the row operations are recorded for the certificate.
    let width = m + 1 + n;
    let mut aug = Matrix::zeros(p, n, width);
    for (i, bi) in b.iter().enumerate() {
        for j in 0..m {
            aug.set(i, j, a.get(i, j).clone());
        }
        aug.set(i, m, bi.clone());
        aug.set(i, m + 1 + i, C::one(p));
    }
    let pivots = aug.rref_in_place(m);
    for i in pivots.len()..n {
        let rhs = aug.get(i, m).clone();
        if !rhs.is_zero() {
            let inv = rhs.inv().expect("nonzero");
            let certificate = (0..n).map(|k| aug.get(i, m + 1 + k).mul(&inv)).collect();
            return Ok(LinSolution::Inconsistent { certificate });
        }
    }
    let mut particular = vec![C::zero(p); m];
    for (row, &pc) in pivots.iter().enumerate() {
        particular[pc] = aug.get(row, m).clone();
    }
    Ok(LinSolution::Solved {
        particular,
        kernel: a.kernel(),
    })
}

/// True when `v` lies in the span of `basis` (vectors of equal length).
pub fn span_contains<C: Coeff>(p: u64, basis: &[Vec<C>], v: &[C]) -> Result<bool> {
    if basis.is_empty() {
        return Ok(v.iter().all(|c| c.is_zero()));
    }
    let a = Matrix::from_columns(p, v.len(), basis)?;
    Ok(matches!(linsolve(&a, v)?, LinSolution::Solved { .. }))
}

/// True when two families span the same subspace.
pub fn same_span<C: Coeff>(p: u64, a: &[Vec<C>], b: &[Vec<C>]) -> Result<bool> {
    for v in b {
        if !span_contains(p, a, v)? {
            return Ok(false);
        }
    }
    for v in a {
        if !span_contains(p, b, v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

impl<C: Coeff> fmt::Debug for Matrix<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Coefficients `c_k` in F_p with `v = sum_k c_k elems[k]`, if any exist.
///
/// Everything is put over a common denominator, turning the question into a
/// linear system over F_p on the numerator coefficients.
pub fn fp_combination(elems: &[RatFn], v: &RatFn) -> Result<Option<Vec<Scalar>>> {
    let p = v.modulus();
    let mut lcm = Poly::one(p);
    for r in elems.iter().chain(std::iter::once(v)) {
        if r.modulus() != p {
            return Err(Error::CharacteristicMismatch(p, r.modulus()));
        }
        let g = lcm.gcd(r.den());
        lcm = &lcm * &r.den().div_exact(&g);
    }
    let lift = |r: &RatFn| r.num() * &lcm.div_exact(r.den());
    let cols: Vec<Poly> = elems.iter().map(lift).collect();
    let target = lift(v);
    let rows = cols
        .iter()
        .chain(std::iter::once(&target))
        .map(|c| c.raw().len())
        .max()
        .unwrap_or(0)
        .max(1);
    let column = |c: &Poly| -> Vec<Scalar> { (0..rows).map(|i| c.coeff(i)).collect() };
    let b = column(&target);
    if cols.is_empty() {
        return Ok(b.iter().all(|c| c.is_zero()).then(Vec::new));
    }
    let a = Matrix::from_columns(p, rows, &cols.iter().map(column).collect::<Vec<_>>())?;
    Ok(match linsolve(&a, &b)? {
        LinSolution::Solved { particular, .. } => Some(particular),
        LinSolution::Inconsistent { .. } => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_ratfn;
    use crate::ratfn::RatFn;

    fn r(s: &str, p: u64) -> RatFn {
        parse_ratfn(s, p).unwrap()
    }

    #[test]
    fn identity_solves_to_rhs() {
        let p = 3;
        let a = Matrix::<RatFn>::identity(p, 3);
        let b = vec![r("t", p), r("1/(t+1)", p), r("2", p)];
        match linsolve(&a, &b).unwrap() {
            LinSolution::Solved { particular, kernel } => {
                assert_eq!(particular, b);
                assert!(kernel.is_empty());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn underdetermined_system_reports_kernel() {
        let p = 2;
        let a = Matrix::from_rows(p, vec![vec![r("t", p), r("1", p)], vec![r("0", p), r("0", p)]]).unwrap();
        let b = vec![r("1", p), r("0", p)];
        match linsolve(&a, &b).unwrap() {
            LinSolution::Solved { particular, kernel } => {
                assert_eq!(a.mul_vec(&particular).unwrap(), b);
                assert_eq!(kernel.len(), 1);
                assert!(a.mul_vec(&kernel[0]).unwrap().iter().all(|c| c.is_zero()));
                // (0, 1) is also a solution: it differs from the particular one by a kernel vector.
                let alt = [r("0", p), r("1", p)];
                let diff: Vec<RatFn> = alt.iter().zip(&particular).map(|(x, y)| x - y).collect();
                assert!(span_contains(p, &kernel, &diff).unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconsistent_system_has_certificate() {
        let p = 5;
        let a = Matrix::from_rows(p, vec![vec![r("t", p)], vec![r("t^2", p)]]).unwrap();
        let b = vec![r("1", p), r("1", p)];
        match linsolve(&a, &b).unwrap() {
            LinSolution::Inconsistent { certificate } => {
                let ya: RatFn = (0..2).fold(RatFn::zero(p), |acc, i| &acc + &(&certificate[i] * a.get(i, 0)));
                let yb: RatFn = (0..2).fold(RatFn::zero(p), |acc, i| &acc + &(&certificate[i] * &b[i]));
                assert!(ya.is_zero());
                assert!(yb.is_one());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rank_and_column_space() {
        let p = 3;
        let a = Matrix::from_rows(
            p,
            vec![
                vec![r("1", p), r("t", p), r("t+1", p)],
                vec![r("t", p), r("t^2", p), r("t^2+t", p)],
            ],
        )
        .unwrap();
        assert_eq!(a.rank(), 1);
        assert_eq!(a.kernel().len(), 2);
        assert_eq!(a.column_space().len(), 1);
    }

    #[test]
    fn combinations_over_the_prime_field() {
        use crate::parse::parse_ratfn;
        let p = 3;
        let r = |s: &str| parse_ratfn(s, p).unwrap();
        let elems = [r("1/t"), r("1/(t+1)")];
        let c = fp_combination(&elems, &r("(2t+1)/(t^2+t)")).unwrap().unwrap();
        assert_eq!(c, vec![Scalar::new(1, p), Scalar::new(1, p)]);
        assert!(fp_combination(&elems, &r("t/(t+1)")).unwrap().is_none());
        assert!(fp_combination(&[], &r("0")).unwrap().is_some());
        assert!(fp_combination(&[], &r("t")).unwrap().is_none());
    }
}
