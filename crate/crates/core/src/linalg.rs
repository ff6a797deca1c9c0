//! Dense matrices over an exact field and the elimination routines built on them.

use std::ops::{Index, IndexMut};

use crate::field::{Field, Ring};
use crate::poly::Poly;

#[derive(Clone, PartialEq, Debug)]
pub struct Matrix<K> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<K>,
}

impl<K: Ring> Matrix<K> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![K::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = K::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<K>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn row(&self, i: usize) -> Vec<K> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<K> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, o: &Matrix<K>) -> Matrix<K> {
        assert_eq!(self.cols, o.rows);
        let mut r = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if !b.is_zero() {
                        r[(i, j)] = r[(i, j)].clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        r
    }

    pub fn mul_vec(&self, v: &[K]) -> Vec<K> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = K::zero();
                for j in 0..self.cols {
                    let a = &self[(i, j)];
                    if !a.is_zero() && !v[j].is_zero() {
                        acc = acc + a.clone() * v[j].clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, o: &Matrix<K>) -> Matrix<K> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }

    pub fn sub(&self, o: &Matrix<K>) -> Matrix<K> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &K) -> Matrix<K> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a.clone() * s.clone()).collect() }
    }

    pub fn map<L: Ring>(&self, f: impl Fn(&K) -> L) -> Matrix<L> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }
}

impl<K: Field> Matrix<K> {
    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else { continue };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let inv = self[(r, c)].inv().expect("nonzero pivot");
            for j in c..self.cols {
                if !self[(r, j)].is_zero() {
                    self[(r, j)] = self[(r, j)].clone() * inv.clone();
                }
            }
            for i in 0..self.rows {
                if i == r || self[(i, c)].is_zero() {
                    continue;
                }
                let f = self[(i, c)].clone();
                for j in c..self.cols {
                    if !self[(r, j)].is_zero() {
                        self[(i, j)] = self[(i, j)].clone() - f.clone() * self[(r, j)].clone();
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of the right kernel {x : A x = 0}.
    pub fn kernel(&self) -> Vec<Vec<K>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![K::zero(); self.cols];
                v[f] = K::one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -m[(r, f)].clone();
                }
                v
            })
            .collect()
    }

    /// Solve A x = b for square invertible A.
    pub fn solve(&self, b: &[K]) -> Option<Vec<K>> {
        assert_eq!(self.rows, b.len());
        let n = self.rows;
        let mut aug = Matrix::zeros(n, self.cols + 1);
        for i in 0..n {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let piv = aug.rref();
        if piv.contains(&self.cols) {
            return None;
        }
        if piv.len() < self.cols {
            return None;
        }
        Some((0..self.cols).map(|i| aug[(i, self.cols)].clone()).collect())
    }

    pub fn det(&self) -> K {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = K::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else { return K::zero() };
            if p != c {
                for j in 0..n {
                    m.data.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det = det * piv.clone();
            let inv = piv.inv().expect("nonzero");
            for i in c + 1..n {
                if m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone() * inv.clone();
                for j in c..n {
                    if !m[(c, j)].is_zero() {
                        m[(i, j)] = m[(i, j)].clone() - f.clone() * m[(c, j)].clone();
                    }
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Matrix<K>> {
        let n = self.rows;
        assert_eq!(n, self.cols);
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = K::one();
        }
        let piv = aug.rref();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = aug[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    /// Characteristic polynomial det(T·I − A) via reduction to Hessenberg form.
    pub fn charpoly(&self) -> Poly<K> {
        let n = self.rows;
        assert_eq!(n, self.cols);
        let mut h = self.clone();
        // similarity transform to upper Hessenberg form
        for c in 0..n.saturating_sub(2) {
            let Some(p) = (c + 1..n).find(|&i| !h[(i, c)].is_zero()) else { continue };
            if p != c + 1 {
                for j in 0..n {
                    h.data.swap(p * n + j, (c + 1) * n + j);
                }
                for i in 0..n {
                    h.data.swap(i * n + p, i * n + c + 1);
                }
            }
            let inv = h[(c + 1, c)].inv().expect("nonzero");
            for i in c + 2..n {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let f = h[(i, c)].clone() * inv.clone();
                for j in 0..n {
                    if !h[(c + 1, j)].is_zero() {
                        h[(i, j)] = h[(i, j)].clone() - f.clone() * h[(c + 1, j)].clone();
                    }
                }
                for k in 0..n {
                    if !h[(k, i)].is_zero() {
                        h[(k, c + 1)] = h[(k, c + 1)].clone() + f.clone() * h[(k, i)].clone();
                    }
                }
            }
        }
        // recurrence for the leading principal minors' characteristic polynomials
        let t = Poly::new(vec![K::zero(), K::one()]);
        let mut ps: Vec<Poly<K>> = vec![Poly::one()];
        for k in 0..n {
            let mut pk = (t.clone() - Poly::constant(h[(k, k)].clone())) * ps[k].clone();
            let mut prod = K::one();
            for i in (0..k).rev() {
                prod = prod * h[(i + 1, i)].clone();
                if prod.is_zero() {
                    break;
                }
                let coef = prod.clone() * h[(i, k)].clone();
                if !coef.is_zero() {
                    pk = pk - ps[i].scale(&coef);
                }
            }
            ps.push(pk);
        }
        ps.pop().unwrap()
    }
}

impl<K> Index<(usize, usize)> for Matrix<K> {
    type Output = K;
    fn index(&self, (i, j): (usize, usize)) -> &K {
        &self.data[i * self.cols + j]
    }
}

impl<K> IndexMut<(usize, usize)> for Matrix<K> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut K {
        &mut self.data[i * self.cols + j]
    }
}

// ---------------------------------------------------------------------------
// Small prime fields, used for modular rank certificates.
// ---------------------------------------------------------------------------

pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % p as u128) as u64;
        }
        b = (b as u128 * b as u128 % p as u128) as u64;
        e >>= 1;
    }
    r
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Rank of a matrix with entries in F_p (p prime, < 2³²).
pub fn rank_mod_p(rows: &[Vec<u64>], p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, piv);
        let inv = inv_mod(m[rank][c], p);
        for j in c..ncols {
            m[rank][j] = m[rank][j] * inv % p;
        }
        let prow = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == rank || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for j in c..ncols {
                row[j] = (row[j] + p - f * prow[j] % p) % p;
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::rat;
    use num_rational::BigRational;

    fn m(rows: &[&[i64]]) -> Matrix<BigRational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect())
    }

    #[test]
    fn rank_kernel_det() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let k = a.kernel();
        assert_eq!(k.len(), 1);
        assert!(a.mul_vec(&k[0]).iter().all(|x| x == &rat(0, 1)));
        assert_eq!(a.det(), rat(0, 1));
        let b = m(&[&[2, 1], &[1, 3]]);
        assert_eq!(b.det(), rat(5, 1));
        assert_eq!(b.inverse().unwrap().mul(&b), Matrix::identity(2));
    }

    #[test]
    fn charpoly_matches_det_oracle() {
        let a = m(&[&[2, 1, 0, 3], &[1, -1, 4, 0], &[0, 2, 5, 1], &[7, 0, 1, 1]]);
        let cp = a.charpoly();
        for t in [-3i64, 0, 1, 2, 9] {
            let ti = Matrix::identity(4).scale(&rat(t, 1)).sub(&a);
            assert_eq!(cp.eval(&rat(t, 1)), ti.det());
        }
        assert_eq!(cp.degree(), Some(4));
    }

    #[test]
    fn modular_rank() {
        let rows = vec![vec![1, 2, 3], vec![2, 4, 6], vec![0, 0, 7]];
        assert_eq!(rank_mod_p(&rows, 7), 1);
        assert_eq!(rank_mod_p(&rows, 11), 2);
    }
}
