//! Dense matrices over ℚ(ζ_{4p}) with labelled bases, exact elimination, and a
//! modular rank certificate.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::cyclo::{ctx, CycNum};
use crate::error::{Error, Result};

/// Dense row-major matrix; `row_basis`/`col_basis` name the bases of the target and
/// source spaces, and composition checks them.
#[derive(Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    p: usize,
    rows: usize,
    cols: usize,
    pub row_basis: String,
    pub col_basis: String,
    data: Vec<CycNum>,
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExactMatrix {}x{} [{} <- {}]", self.rows, self.cols, self.row_basis, self.col_basis)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ExactMatrix {
    pub fn zeros(p: usize, rows: usize, cols: usize) -> Self {
        Self::zeros_in(p, rows, cols, "", "")
    }

    pub fn zeros_in(p: usize, rows: usize, cols: usize, row_basis: &str, col_basis: &str) -> Self {
        ExactMatrix { p, rows, cols, row_basis: row_basis.to_string(), col_basis: col_basis.to_string(), data: vec![CycNum::zero(p); rows * cols] }
    }

    pub fn identity(p: usize, n: usize) -> Self {
        Self::identity_in(p, n, "")
    }

    pub fn identity_in(p: usize, n: usize, basis: &str) -> Self {
        let mut m = Self::zeros_in(p, n, n, basis, basis);
        for i in 0..n {
            m.set(i, i, CycNum::one(p));
        }
        m
    }

    pub fn from_fn(p: usize, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> CycNum) -> Self {
        let mut m = Self::zeros(p, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(p: usize, rows: usize, cols: &[Vec<CycNum>]) -> Self {
        Self::from_fn(p, rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn from_rows(p: usize, cols: usize, rows: &[Vec<CycNum>]) -> Self {
        Self::from_fn(p, rows.len(), cols, |i, j| rows[i][j].clone())
    }

    pub fn with_bases(mut self, row_basis: &str, col_basis: &str) -> Self {
        self.row_basis = row_basis.to_string();
        self.col_basis = col_basis.to_string();
        self
    }

    pub fn p(&self) -> usize {
        self.p
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &CycNum {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: CycNum) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_at(&mut self, i: usize, j: usize, v: &CycNum) {
        let idx = i * self.cols + j;
        self.data[idx] += v;
    }

    pub fn row(&self, i: usize) -> &[CycNum] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<CycNum> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..self.cols).all(|j| if i == j { self.get(i, j).is_one() } else { self.get(i, j).is_zero() }))
    }

    /// Label-checked product.
    pub fn compose(&self, other: &ExactMatrix) -> Result<ExactMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!("{}x{} · {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        if !self.col_basis.is_empty() && !other.row_basis.is_empty() && self.col_basis != other.row_basis {
            return Err(Error::Dimension(format!("basis {} composed with {}", self.col_basis, other.row_basis)));
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &ExactMatrix) -> ExactMatrix {
        let mut out = ExactMatrix::zeros_in(self.p, self.rows, other.cols, &self.row_basis, &other.col_basis);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[CycNum]) -> Vec<CycNum> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![CycNum::zero(self.p); self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            for (j, x) in v.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                let a = self.get(i, j);
                if !a.is_zero() {
                    *o += &(a * x);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> ExactMatrix {
        let mut t = ExactMatrix::from_fn(self.p, self.cols, self.rows, |i, j| self.get(j, i).clone());
        t.row_basis = self.col_basis.clone();
        t.col_basis = self.row_basis.clone();
        t
    }

    pub fn scale(&self, s: &CycNum) -> ExactMatrix {
        let mut m = self.clone();
        for x in m.data.iter_mut() {
            if !x.is_zero() {
                *x = &*x * s;
            }
        }
        m
    }

    pub fn add(&self, other: &ExactMatrix) -> ExactMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (x, y) in m.data.iter_mut().zip(other.data.iter()) {
            if !y.is_zero() {
                *x += y;
            }
        }
        m
    }

    pub fn sub(&self, other: &ExactMatrix) -> ExactMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (x, y) in m.data.iter_mut().zip(other.data.iter()) {
            if !y.is_zero() {
                *x -= y;
            }
        }
        m
    }

    /// Sub-matrix on the given rows and columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> ExactMatrix {
        ExactMatrix::from_fn(self.p, rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn entries(&self) -> &[CycNum] {
        &self.data
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (ExactMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(piv) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
            if piv != r {
                for j in 0..m.cols {
                    m.data.swap(piv * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m.get(r, c).inv().expect("nonzero pivot");
            for j in c..m.cols {
                let v = m.get(r, j);
                if !v.is_zero() {
                    let nv = v * &inv;
                    m.set(r, j, nv);
                }
            }
            let prow: Vec<(usize, CycNum)> = (c..m.cols).filter(|&j| !m.get(r, j).is_zero()).map(|j| (j, m.get(r, j).clone())).collect();
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for (j, v) in &prow {
                    let idx = i * m.cols + j;
                    m.data[idx] -= &(&f * v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel {x : Mx = 0}.
    pub fn kernel(&self) -> Vec<Vec<CycNum>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::new();
        for &f in &free {
            let mut v = vec![CycNum::zero(self.p); self.cols];
            v[f] = CycNum::one(self.p);
            for (ri, &pc) in pivots.iter().enumerate() {
                let a = r.get(ri, f);
                if !a.is_zero() {
                    v[pc] = -a;
                }
            }
            basis.push(v);
        }
        basis
    }

    pub fn inverse(&self) -> Result<ExactMatrix> {
        if self.rows != self.cols {
            return Err(Error::Dimension("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = ExactMatrix::zeros(self.p, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, CycNum::one(self.p));
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::DivisionByZero);
        }
        let mut inv = ExactMatrix::from_fn(self.p, n, n, |i, j| r.get(i, n + j).clone());
        inv.row_basis = self.col_basis.clone();
        inv.col_basis = self.row_basis.clone();
        Ok(inv)
    }

    /// Some x with Mx = b, if one exists.
    pub fn solve(&self, b: &[CycNum]) -> Option<Vec<CycNum>> {
        let mut aug = ExactMatrix::zeros(self.p, self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![CycNum::zero(self.p); self.cols];
        for (ri, &pc) in pivots.iter().enumerate() {
            x[pc] = r.get(ri, self.cols).clone();
        }
        Some(x)
    }

    /// λ with self = λ·other, taking λ from the first nonzero entry of `other`.
    pub fn projective_ratio(&self, other: &ExactMatrix) -> Option<CycNum> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return None;
        }
        let idx = other.data.iter().position(|x| !x.is_zero())?;
        let lambda = self.data[idx].checked_div(&other.data[idx]).ok()?;
        if self.sub(&other.scale(&lambda)).is_zero() {
            Some(lambda)
        } else {
            None
        }
    }
}

impl Serialize for ExactMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ExactMatrix", 5)?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("cols", &self.cols)?;
        st.serialize_field("row_basis", &self.row_basis)?;
        st.serialize_field("col_basis", &self.col_basis)?;
        let rows: Vec<&[CycNum]> = (0..self.rows).map(|i| self.row(i)).collect();
        st.serialize_field("entries", &rows)?;
        st.end()
    }
}

// ---------- modular certificates ----------

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            out.push(f);
            while n % f == 0 {
                n /= f;
            }
        }
        f += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A prime ℓ ≡ 1 (mod 4p) with a chosen primitive 4p-th root of unity r; reduction
/// ζ ↦ r is a ring map from the ℓ-integral part of ℚ(ζ_{4p}) to F_ℓ.
#[derive(Debug, Clone, Copy)]
pub struct ModularImage {
    pub p: usize,
    pub ell: u64,
    pub root: u64,
}

impl ModularImage {
    /// The `index`-th admissible prime below 2^61.
    pub fn new(p: usize, index: usize) -> Self {
        let m = (4 * p) as u64;
        let mut k = ((1u64 << 61) - 1) / m;
        let mut found = 0;
        loop {
            let ell = k * m + 1;
            if is_prime_u64(ell) {
                if found == index {
                    let factors = prime_factors(m);
                    let mut g = 2u64;
                    loop {
                        let r = pow_mod(g, (ell - 1) / m, ell);
                        if factors.iter().all(|&f| pow_mod(r, m / f, ell) != 1) {
                            return ModularImage { p, ell, root: r };
                        }
                        g += 1;
                    }
                }
                found += 1;
            }
            k -= 1;
        }
    }

    fn big_mod(&self, x: &BigInt) -> u64 {
        let e = BigInt::from(self.ell);
        x.mod_floor(&e).to_u64().expect("reduced")
    }

    /// Image of x, or None if its denominator vanishes mod ℓ.
    pub fn reduce(&self, x: &CycNum) -> Option<u64> {
        let (num, den) = x.parts();
        let dm = self.big_mod(&den);
        if dm == 0 {
            return None;
        }
        let dinv = pow_mod(dm, self.ell - 2, self.ell);
        let mut acc = 0u64;
        let mut rp = 1u64;
        for a in num.iter().take(ctx(self.p).d) {
            if !a.is_zero() {
                acc = (acc + mul_mod(self.big_mod(a), rp, self.ell)) % self.ell;
            }
            rp = mul_mod(rp, self.root, self.ell);
        }
        Some(mul_mod(acc, dinv, self.ell))
    }

    /// Rank over F_ℓ of the matrix with the given rows; a lower bound for the rank over
    /// ℚ(ζ_{4p}).
    pub fn rank_rows(&self, rows: &[Vec<CycNum>]) -> Option<usize> {
        let mut m: Vec<Vec<u64>> = Vec::with_capacity(rows.len());
        for r in rows {
            let mut v = Vec::with_capacity(r.len());
            for x in r {
                v.push(self.reduce(x)?);
            }
            m.push(v);
        }
        Some(rank_mod(&mut m, self.ell))
    }

    pub fn rank(&self, a: &ExactMatrix) -> Option<usize> {
        let rows: Vec<Vec<CycNum>> = (0..a.rows()).map(|i| a.row(i).to_vec()).collect();
        self.rank_rows(&rows)
    }
}

pub fn rank_mod(m: &mut [Vec<u64>], ell: u64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(piv, r);
        let inv = pow_mod(m[r][c], ell - 2, ell);
        for j in c..cols {
            m[r][j] = mul_mod(m[r][j], inv, ell);
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for j in c..cols {
                if prow[j] != 0 {
                    row[j] = (row[j] + ell - mul_mod(f, prow[j], ell)) % ell;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Dimension of the span of the given vectors, computed exactly.
pub fn span_dim(p: usize, vecs: &[Vec<CycNum>]) -> usize {
    if vecs.is_empty() {
        return 0;
    }
    ExactMatrix::from_rows(p, vecs[0].len(), vecs).rank()
}

/// Whether `v` lies in the span of `vecs`, with coordinates when it does.
pub fn in_span(p: usize, vecs: &[Vec<CycNum>], v: &[CycNum]) -> Option<Vec<CycNum>> {
    if vecs.is_empty() {
        return if v.iter().all(|x| x.is_zero()) { Some(vec![]) } else { None };
    }
    ExactMatrix::from_columns(p, v.len(), vecs).solve(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(p: usize, v: i64) -> CycNum {
        CycNum::from_i64(p, v)
    }

    #[test]
    fn inverse_round_trip() {
        let p = 3;
        let z = CycNum::zeta(p);
        let m = ExactMatrix::from_fn(p, 3, 3, |i, j| if i == j { &c(p, 2) + &z } else { c(p, (i + 2 * j) as i64) });
        let inv = m.inverse().unwrap();
        assert!(m.compose(&inv).unwrap().is_identity());
    }

    #[test]
    fn kernel_of_rank_one() {
        let p = 2;
        let m = ExactMatrix::from_fn(p, 2, 3, |i, j| c(p, ((i + 1) * (j + 1)) as i64));
        assert_eq!(m.rank(), 1);
        let k = m.kernel();
        assert_eq!(k.len(), 2);
        for v in k {
            assert!(m.apply(&v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn label_mismatch_rejected() {
        let a = ExactMatrix::identity_in(2, 2, "A");
        let b = ExactMatrix::identity_in(2, 2, "B");
        assert!(a.compose(&b).is_err());
    }

    #[test]
    fn modular_root_has_order_4p() {
        for p in 2..=5 {
            let mi = ModularImage::new(p, 0);
            let m = 4 * p as u64;
            assert_eq!(pow_mod(mi.root, m, mi.ell), 1);
            assert_eq!(mi.reduce(&CycNum::zeta_pow(p, 2 * p as i64)), Some(mi.ell - 1));
        }
    }

    #[test]
    fn modular_reduction_is_multiplicative() {
        let p = 5;
        let mi = ModularImage::new(p, 0);
        let x = &CycNum::zeta_pow(p, 3) + &CycNum::from_ratio(p, 2, 7);
        let y = &CycNum::zeta_pow(p, 11) - &CycNum::from_ratio(p, 1, 3);
        let xy = mi.reduce(&(&x * &y)).unwrap();
        assert_eq!(xy, mul_mod(mi.reduce(&x).unwrap(), mi.reduce(&y).unwrap(), mi.ell));
    }

    #[test]
    fn projective_ratio_detects_scalar() {
        let p = 2;
        let a = ExactMatrix::from_fn(p, 2, 2, |i, j| c(p, (i * 2 + j) as i64));
        let z = CycNum::zeta(p);
        assert_eq!(a.scale(&z).projective_ratio(&a), Some(z));
        assert!(a.projective_ratio(&ExactMatrix::identity(p, 2)).is_none());
    }
}
