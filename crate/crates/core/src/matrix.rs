//! Dense rational matrices and Smith normal form over the p-local integers.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, ppow, q, split_p, vp, Q, VINF};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    d: Vec<Q>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = (0..self.cols).map(|j| fmt_q(&self[(i, j)])).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.d[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.d[i * self.cols + j]
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, d: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Q::one();
        }
        m
    }

    pub fn scalar(n: usize, c: Q) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c.clone();
        }
        m
    }

    pub fn diag(entries: &[Q]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        Mat { rows: r, cols: c, d: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())
    }

    pub fn from_cols(cols: &[Vec<Q>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn col(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<Q> {
        self.d[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn entries(&self) -> &[Q] {
        &self.d
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        assert_eq!(self.cols, o.rows, "dimension mismatch in product");
        let mut r = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if !b.is_zero() {
                        r[(i, j)] += a * b;
                    }
                }
            }
        }
        r
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut s = Q::zero();
                for (j, x) in v.iter().enumerate() {
                    let a = &self[(i, j)];
                    if !a.is_zero() && !x.is_zero() {
                        s += a * x;
                    }
                }
                s
            })
            .collect()
    }

    pub fn add(&self, o: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat { rows: self.rows, cols: self.cols, d: self.d.iter().zip(&o.d).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat { rows: self.rows, cols: self.cols, d: self.d.iter().zip(&o.d).map(|(a, b)| a - b).collect() }
    }

    pub fn neg(&self) -> Mat {
        Mat { rows: self.rows, cols: self.cols, d: self.d.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, c: &Q) -> Mat {
        Mat { rows: self.rows, cols: self.cols, d: self.d.iter().map(|a| a * c).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.d.iter().all(|x| x.is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn diagonal(&self) -> Vec<Q> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).collect()
    }

    /// Sub-block [r0, r0+h) x [c0, c0+w).
    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Mat {
        let mut m = Mat::zeros(h, w);
        for i in 0..h {
            for j in 0..w {
                m[(i, j)] = self[(r0 + i, c0 + j)].clone();
            }
        }
        m
    }

    /// (a b; c d) from four n x n blocks.
    pub fn from_blocks(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Mat {
        let n = a.rows;
        let mut m = Mat::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = a[(i, j)].clone();
                m[(i, n + j)] = b[(i, j)].clone();
                m[(n + i, j)] = c[(i, j)].clone();
                m[(n + i, n + j)] = d[(i, j)].clone();
            }
        }
        m
    }

    /// Direct sum diag(self, o).
    pub fn direct_sum(&self, o: &Mat) -> Mat {
        let mut m = Mat::zeros(self.rows + o.rows, self.cols + o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..o.rows {
            for j in 0..o.cols {
                m[(self.rows + i, self.cols + j)] = o[(i, j)].clone();
            }
        }
        m
    }

    pub fn det(&self) -> Q {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Q::one();
        for c in 0..n {
            let Some(piv) = (c..n).find(|&r| !a[(r, c)].is_zero()) else {
                return Q::zero();
            };
            if piv != c {
                a.swap_rows(piv, c);
                det = -det;
            }
            let pv = a[(c, c)].clone();
            det *= &pv;
            for r in c + 1..n {
                if a[(r, c)].is_zero() {
                    continue;
                }
                let f = &a[(r, c)] / &pv;
                for k in c..n {
                    let t = &f * &a[(c, k)];
                    a[(r, k)] -= t;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<Mat> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(n);
        for c in 0..n {
            let piv = (c..n)
                .find(|&r| !a[(r, c)].is_zero())
                .ok_or_else(|| Error::Singular(format!("{self:?}")))?;
            a.swap_rows(piv, c);
            inv.swap_rows(piv, c);
            let pv = a[(c, c)].clone();
            for k in 0..n {
                a[(c, k)] /= &pv;
                inv[(c, k)] /= &pv;
            }
            for r in 0..n {
                if r == c || a[(r, c)].is_zero() {
                    continue;
                }
                let f = a[(r, c)].clone();
                for k in 0..n {
                    let t = &f * &a[(c, k)];
                    a[(r, k)] -= t;
                    let t = &f * &inv[(c, k)];
                    inv[(r, k)] -= t;
                }
            }
        }
        Ok(inv)
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.cols {
            self.d.swap(i * self.cols + k, j * self.cols + k);
        }
    }

    pub fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for k in 0..self.rows {
            self.d.swap(k * self.cols + i, k * self.cols + j);
        }
    }

    /// row_i += c * row_j
    fn row_axpy(&mut self, i: usize, c: &Q, j: usize) {
        for k in 0..self.cols {
            if !self[(j, k)].is_zero() {
                let t = c * &self[(j, k)];
                self[(i, k)] += t;
            }
        }
    }

    /// col_i += c * col_j
    fn col_axpy(&mut self, i: usize, c: &Q, j: usize) {
        for k in 0..self.rows {
            if !self[(k, j)].is_zero() {
                let t = c * &self[(k, j)];
                self[(k, i)] += t;
            }
        }
    }

    /// Minimum p-adic valuation of the entries (VINF for the zero matrix).
    pub fn min_val(&self, p: u64) -> i64 {
        self.d.iter().filter_map(|x| vp(x, p)).min().unwrap_or(VINF)
    }

    pub fn is_p_integral(&self, p: u64) -> bool {
        self.min_val(p) >= 0
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            (0..self.rows)
                .map(|i| serde_json::Value::Array(self.row(i).iter().map(|x| fmt_q(x).into()).collect()))
                .collect(),
        )
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Mat> {
        let bad = || Error::Parse(format!("expected a matrix of rationals, got {v}"));
        let rows = v.as_array().ok_or_else(bad)?;
        let mut out = Vec::new();
        for r in rows {
            let r = r.as_array().ok_or_else(bad)?;
            let mut row = Vec::new();
            for x in r {
                row.push(match x {
                    serde_json::Value::String(s) => parse_q(s)?,
                    serde_json::Value::Number(n) => parse_q(&n.to_string())?,
                    _ => return Err(bad()),
                });
            }
            out.push(row);
        }
        if out.is_empty() || out.iter().any(|r| r.len() != out[0].len()) {
            return Err(bad());
        }
        Ok(Mat::from_rows(out))
    }
}

/// A = U * D * V with U, V invertible over Z_(p) and D "diagonal" (rows x cols)
/// whose nonzero entries are exactly p^{e_i}, e_i ascending.
#[derive(Clone, Debug)]
pub struct Snf {
    pub u: Mat,
    pub v: Mat,
    pub u_inv: Mat,
    pub v_inv: Mat,
    /// exponents of the nonzero diagonal entries; rank = len
    pub exps: Vec<i64>,
}

pub fn snf(a: &Mat, p: u64) -> Snf {
    let (m, n) = (a.rows, a.cols);
    let mut a = a.clone();
    // a_cur = E * a * F; keep E^{-1} (=U), E, F^{-1} (=V), F.
    let mut u = Mat::identity(m);
    let mut e = Mat::identity(m);
    let mut v = Mat::identity(n);
    let mut f = Mat::identity(n);
    let mut exps = Vec::new();
    for t in 0..m.min(n) {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if let Some(val) = vp(&a[(i, j)], p) {
                    if best.map_or(true, |b| val < b.0) {
                        best = Some((val, i, j));
                    }
                }
            }
        }
        let Some((val, bi, bj)) = best else { break };
        a.swap_rows(t, bi);
        e.swap_rows(t, bi);
        u.swap_cols(t, bi);
        a.swap_cols(t, bj);
        f.swap_cols(t, bj);
        v.swap_rows(t, bj);
        // normalise the pivot to p^val
        let (_, unit) = split_p(&a[(t, t)], p);
        let uinv = Q::one() / &unit;
        for k in 0..n {
            a[(t, k)] *= &uinv;
        }
        for k in 0..m {
            e[(t, k)] *= &uinv;
            u[(k, t)] *= &unit;
        }
        let piv = a[(t, t)].clone();
        for i in t + 1..m {
            if a[(i, t)].is_zero() {
                continue;
            }
            let c = -(&a[(i, t)] / &piv);
            a.row_axpy(i, &c, t);
            e.row_axpy(i, &c, t);
            u.col_axpy(t, &(-&c), i);
        }
        for j in t + 1..n {
            if a[(t, j)].is_zero() {
                continue;
            }
            let c = -(&a[(t, j)] / &piv);
            a.col_axpy(j, &c, t);
            f.col_axpy(j, &c, t);
            v.row_axpy(t, &(-&c), j);
        }
        exps.push(val);
    }
    Snf { u, v, u_inv: e, v_inv: f, exps }
}

/// Diagonal matrix diag(p^{e_i}).
pub fn pdiag(p: u64, exps: &[i64]) -> Mat {
    Mat::diag(&exps.iter().map(|&e| ppow(p, e)).collect::<Vec<_>>())
}
