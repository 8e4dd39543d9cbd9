//! The restricted quantum group Ū_q(sl₂) and its extension by K^{1/2}.
//!
//! Elements are finite combinations of PBW monomials E^m F^n K^{l/2}, 0 ≤ m, n < p,
//! 0 ≤ l < 4p (half units). A monomial lies in Ū_q proper iff l is even.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::cyclo::{q_binomial, q_factorial, q_hat, q_int, CycNum};
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PbwMonomial {
    pub m: u8,
    pub n: u8,
    /// Exponent of K in half units, reduced mod 4p.
    pub l: u16,
}

impl PbwMonomial {
    pub fn in_uq(&self) -> bool {
        self.l % 2 == 0
    }
}

impl Serialize for PbwMonomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PbwMonomial", 3)?;
        st.serialize_field("m", &self.m)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("l_halves", &self.l)?;
        st.end()
    }
}

/// A finite linear combination of PBW monomials; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AlgElem {
    pub terms: BTreeMap<PbwMonomial, CycNum>,
}

impl AlgElem {
    pub fn zero() -> Self {
        AlgElem { terms: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mono: PbwMonomial, c: &CycNum) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c.clone());
            }
        }
    }

    pub fn coeff(&self, mono: &PbwMonomial) -> Option<&CycNum> {
        self.terms.get(mono)
    }

    pub fn scale(&self, c: &CycNum) -> AlgElem {
        if c.is_zero() {
            return AlgElem::zero();
        }
        AlgElem { terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect() }
    }

    /// True when no half power of K occurs.
    pub fn in_uq(&self) -> bool {
        self.terms.keys().all(|k| k.in_uq())
    }
}

impl Add for &AlgElem {
    type Output = AlgElem;
    fn add(self, rhs: &AlgElem) -> AlgElem {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(*k, v);
        }
        out
    }
}

impl Sub for &AlgElem {
    type Output = AlgElem;
    fn sub(self, rhs: &AlgElem) -> AlgElem {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(*k, &-v);
        }
        out
    }
}

impl Neg for &AlgElem {
    type Output = AlgElem;
    fn neg(self) -> AlgElem {
        AlgElem { terms: self.terms.iter().map(|(k, v)| (*k, -v)).collect() }
    }
}

impl Serialize for AlgElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            m: u8,
            n: u8,
            l_halves: u16,
            coeff: &'a CycNum,
        }
        let v: Vec<Term> = self.terms.iter().map(|(k, c)| Term { m: k.m, n: k.n, l_halves: k.l, coeff: c }).collect();
        v.serialize(s)
    }
}

/// Elements of an N-fold tensor power, keyed by one monomial per leg.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tensor<const N: usize> {
    pub terms: BTreeMap<[PbwMonomial; N], CycNum>,
}

pub type TensorElem = Tensor<2>;

impl<const N: usize> Default for Tensor<N> {
    fn default() -> Self {
        Tensor { terms: BTreeMap::new() }
    }
}

impl<const N: usize> Tensor<N> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, key: [PbwMonomial; N], c: &CycNum) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c.clone());
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(*k, v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(*k, &-v);
        }
        out
    }

    pub fn scale(&self, c: &CycNum) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Tensor { terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect() }
    }

    pub fn in_uq(&self) -> bool {
        self.terms.keys().all(|k| k.iter().all(|m| m.in_uq()))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Serialize for Tensor<2> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            leg1: PbwMonomial,
            leg2: PbwMonomial,
            coeff: &'a CycNum,
        }
        let v: Vec<Term> = self.terms.iter().map(|(k, c)| Term { leg1: k[0], leg2: k[1], coeff: c }).collect();
        v.serialize(s)
    }
}

/// A linear form on Ū_q given by its values on the PBW basis, ordered
/// lexicographically in (m, n, l) with l the full power of K in 0..2p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualForm {
    pub values: Vec<CycNum>,
}

impl Serialize for DualForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.values.serialize(s)
    }
}

impl DualForm {
    pub fn zero(p: usize) -> Self {
        DualForm { values: vec![CycNum::zero(p); 2 * p * p * p] }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, o: &DualForm) -> DualForm {
        DualForm { values: self.values.iter().zip(&o.values).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &DualForm) -> DualForm {
        DualForm { values: self.values.iter().zip(&o.values).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: &CycNum) -> DualForm {
        DualForm { values: self.values.iter().map(|a| a * c).collect() }
    }
}

/// One term E^a F^b K^{r/2} with coefficient, r in half units (unreduced).
type NfTerm = (u8, u8, i64, CycNum);

/// Structure data of Ū_q and Ū_q^{1/2} for a fixed p. Read-only after construction.
pub struct Uq {
    pub p: usize,
    zeta_pows: Vec<CycNum>,
    /// `fe[n][m]`: normal form of F^n E^m.
    fe: Vec<Vec<Vec<NfTerm>>>,
    /// Closed-formula coproduct of every Ū_q basis monomial, as (index, index, coeff).
    delta_uq: Vec<Vec<(usize, usize, CycNum)>>,
    antipode_uq: Vec<AlgElem>,
    antipode_inv_uq: Vec<AlgElem>,
}

impl Uq {
    pub fn new(p: usize) -> Self {
        assert!(p >= 2, "p must be at least 2");
        let zeta_pows = (0..4 * p as i64).map(|k| CycNum::zeta_pow(p, k)).collect();
        let mut uq = Uq { p, zeta_pows, fe: Vec::new(), delta_uq: Vec::new(), antipode_uq: Vec::new(), antipode_inv_uq: Vec::new() };
        uq.fe = (0..p)
            .map(|n| {
                (0..p)
                    .map(|m| {
                        let mut cur = vec![(0u8, n as u8, 0i64, CycNum::one(p))];
                        for _ in 0..m {
                            cur = uq.nf_right_mul_e(&cur);
                        }
                        cur
                    })
                    .collect()
            })
            .collect();
        let dim = uq.dim();
        uq.delta_uq = (0..dim)
            .map(|i| {
                let mono = uq.basis_mono(i);
                uq.coproduct_mono_formula(mono)
                    .terms
                    .into_iter()
                    .map(|(k, c)| (uq.index_of(&k[0]).unwrap(), uq.index_of(&k[1]).unwrap(), c))
                    .collect()
            })
            .collect();
        uq.antipode_uq = (0..dim).map(|i| uq.antipode_mono(uq.basis_mono(i))).collect();
        uq.antipode_inv_uq = (0..dim).map(|i| uq.antipode_inv_mono(uq.basis_mono(i))).collect();
        uq
    }

    // ---------- scalars ----------

    pub fn zeta_pow(&self, k: i64) -> &CycNum {
        &self.zeta_pows[k.rem_euclid(4 * self.p as i64) as usize]
    }

    pub fn q_pow(&self, k: i64) -> &CycNum {
        self.zeta_pow(2 * k)
    }

    pub fn c(&self, v: i64) -> CycNum {
        CycNum::from_i64(self.p, v)
    }

    pub fn qhat(&self) -> CycNum {
        q_hat(self.p)
    }

    pub fn qint(&self, n: i64) -> CycNum {
        q_int(self.p, n)
    }

    // ---------- basis ----------

    /// Dimension of Ū_q, 2p³.
    pub fn dim(&self) -> usize {
        2 * self.p * self.p * self.p
    }

    /// Dimension of the extension, 4p³.
    pub fn dim_ext(&self) -> usize {
        4 * self.p * self.p * self.p
    }

    /// Ū_q basis monomial with index (m·p + n)·2p + l.
    pub fn basis_mono(&self, idx: usize) -> PbwMonomial {
        let p = self.p;
        let l = idx % (2 * p);
        let mn = idx / (2 * p);
        PbwMonomial { m: (mn / p) as u8, n: (mn % p) as u8, l: (2 * l) as u16 }
    }

    pub fn index_of(&self, mono: &PbwMonomial) -> Option<usize> {
        if !mono.in_uq() {
            return None;
        }
        let p = self.p;
        Some((mono.m as usize * p + mono.n as usize) * 2 * p + mono.l as usize / 2)
    }

    /// Extension basis monomial with index (m·p + n)·4p + l_halves.
    pub fn basis_mono_ext(&self, idx: usize) -> PbwMonomial {
        let p = self.p;
        let l = idx % (4 * p);
        let mn = idx / (4 * p);
        PbwMonomial { m: (mn / p) as u8, n: (mn % p) as u8, l: l as u16 }
    }

    pub fn mono(&self, m: usize, n: usize, l_halves: i64) -> PbwMonomial {
        assert!(m < self.p && n < self.p, "exponent out of range");
        PbwMonomial { m: m as u8, n: n as u8, l: l_halves.rem_euclid(4 * self.p as i64) as u16 }
    }

    pub fn monomial(&self, m: usize, n: usize, l_halves: i64) -> AlgElem {
        let mut x = AlgElem::zero();
        x.add_term(self.mono(m, n, l_halves), &CycNum::one(self.p));
        x
    }

    pub fn one(&self) -> AlgElem {
        self.monomial(0, 0, 0)
    }

    pub fn scalar(&self, c: &CycNum) -> AlgElem {
        self.one().scale(c)
    }

    pub fn e(&self) -> AlgElem {
        self.monomial(1, 0, 0)
    }

    pub fn f(&self) -> AlgElem {
        self.monomial(0, 1, 0)
    }

    /// K^j (integer j).
    pub fn k(&self, j: i64) -> AlgElem {
        self.monomial(0, 0, 2 * j)
    }

    /// K^{h/2}.
    pub fn k_half(&self, h: i64) -> AlgElem {
        self.monomial(0, 0, h)
    }

    /// Pivotal element g = K^{p+1}.
    pub fn pivot(&self) -> AlgElem {
        self.k(self.p as i64 + 1)
    }

    /// Casimir C = FE + (qK + q⁻¹K⁻¹)/(q − q⁻¹)².
    pub fn casimir(&self) -> AlgElem {
        let qh2 = (&self.qhat() * &self.qhat()).inv().unwrap();
        let fe = self.mul(&self.f(), &self.e());
        let mut c = fe;
        c = &c + &self.k(1).scale(&(self.q_pow(1) * &qh2));
        c = &c + &self.k(-1).scale(&(self.q_pow(-1) * &qh2));
        c
    }

    // ---------- product ----------

    fn nf_right_mul_e(&self, x: &[NfTerm]) -> Vec<NfTerm> {
        let p = self.p;
        let qh_inv = self.qhat().inv().unwrap();
        let mut out: BTreeMap<(u8, u8, i64), CycNum> = BTreeMap::new();
        let mut push = |a: u8, b: u8, r: i64, c: CycNum| {
            if c.is_zero() {
                return;
            }
            let e = out.entry((a, b, r)).or_insert_with(|| CycNum::zero(p));
            *e += &c;
        };
        for (a, b, r, c) in x {
            // K^{r/2} E = q^{r} E K^{r/2}; F^b E = E F^b − [b] F^{b−1}(q^{−(b−1)}K − q^{b−1}K^{−1})/q̂
            let c = c * self.q_pow(*r);
            if (*a as usize) + 1 < p {
                push(a + 1, *b, *r, c.clone());
            }
            if *b >= 1 {
                let bb = *b as i64;
                let base = &(&c * &self.qint(bb)) * &qh_inv;
                push(*a, b - 1, r + 2, -(&base * self.q_pow(-(bb - 1))));
                push(*a, b - 1, r - 2, &base * self.q_pow(bb - 1));
            }
        }
        let four_p = 4 * p as i64;
        let mut red: BTreeMap<(u8, u8, i64), CycNum> = BTreeMap::new();
        for ((a, b, r), c) in out {
            let e = red.entry((a, b, r.rem_euclid(four_p))).or_insert_with(|| CycNum::zero(p));
            *e += &c;
        }
        red.into_iter().filter(|(_, c)| !c.is_zero()).map(|((a, b, r), c)| (a, b, r, c)).collect()
    }

    /// Product of two monomials as a list of (monomial, coefficient).
    pub fn mul_mono(&self, x: PbwMonomial, y: PbwMonomial) -> Vec<(PbwMonomial, CycNum)> {
        let p = self.p;
        let (m, n, l) = (x.m as usize, x.n as usize, x.l as i64);
        let (m2, n2, l2) = (y.m as usize, y.n as usize, y.l as i64);
        let pref = self.q_pow(l * (m2 as i64 - n2 as i64));
        let mut out = Vec::with_capacity(self.fe[n][m2].len());
        for (a, b, r, c) in &self.fe[n][m2] {
            let ea = m + *a as usize;
            let fb = *b as usize + n2;
            if ea >= p || fb >= p {
                continue;
            }
            let coeff = &(c * pref) * self.q_pow(-r * n2 as i64);
            out.push((PbwMonomial { m: ea as u8, n: fb as u8, l: (r + l + l2).rem_euclid(4 * p as i64) as u16 }, coeff));
        }
        out
    }

    pub fn mul(&self, x: &AlgElem, y: &AlgElem) -> AlgElem {
        let mut acc: BTreeMap<PbwMonomial, CycNum> = BTreeMap::new();
        for (kx, cx) in &x.terms {
            for (ky, cy) in &y.terms {
                let cxy = cx * cy;
                for (k, c) in self.mul_mono(*kx, *ky) {
                    let v = &c * &cxy;
                    match acc.get_mut(&k) {
                        Some(e) => *e += &v,
                        None => {
                            acc.insert(k, v);
                        }
                    }
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        AlgElem { terms: acc }
    }

    pub fn mul3(&self, x: &AlgElem, y: &AlgElem, z: &AlgElem) -> AlgElem {
        self.mul(&self.mul(x, y), z)
    }

    pub fn pow(&self, x: &AlgElem, n: u32) -> AlgElem {
        let mut acc = self.one();
        for _ in 0..n {
            acc = self.mul(&acc, x);
        }
        acc
    }

    pub fn commutator(&self, x: &AlgElem, y: &AlgElem) -> AlgElem {
        &self.mul(x, y) - &self.mul(y, x)
    }

    pub fn is_central(&self, z: &AlgElem) -> bool {
        self.commutator(z, &self.e()).is_zero() && self.commutator(z, &self.f()).is_zero() && self.commutator(z, &self.k_half(1)).is_zero()
    }

    /// Inverse of an invertible element, by solving x·y = 1 in the algebra containing x.
    pub fn inverse(&self, x: &AlgElem) -> Result<AlgElem> {
        let ext = !x.in_uq();
        let dim = if ext { self.dim_ext() } else { self.dim() };
        let basis = |i: usize| if ext { self.basis_mono_ext(i) } else { self.basis_mono(i) };
        let idx = |m: &PbwMonomial| -> usize {
            if ext {
                let p = self.p;
                (m.m as usize * p + m.n as usize) * 4 * p + m.l as usize
            } else {
                self.index_of(m).unwrap()
            }
        };
        let mut mat = crate::linalg::ExactMatrix::zeros(self.p, dim, dim);
        for j in 0..dim {
            let y = basis(j);
            for (kx, cx) in &x.terms {
                for (k, c) in self.mul_mono(*kx, y) {
                    mat.add_at(idx(&k), j, &(&c * cx));
                }
            }
        }
        let mut rhs = vec![CycNum::zero(self.p); dim];
        rhs[idx(&PbwMonomial { m: 0, n: 0, l: 0 })] = CycNum::one(self.p);
        let sol = mat.solve(&rhs).ok_or(Error::DivisionByZero)?;
        let mut out = AlgElem::zero();
        for (j, c) in sol.iter().enumerate() {
            out.add_term(basis(j), c);
        }
        if !self.mul(x, &out).eq(&self.one()) {
            return Err(Error::DivisionByZero);
        }
        Ok(out)
    }

    // ---------- tensors ----------

    pub fn tensor2(&self, x: &AlgElem, y: &AlgElem) -> TensorElem {
        let mut t = TensorElem::zero();
        for (kx, cx) in &x.terms {
            for (ky, cy) in &y.terms {
                t.add_term([*kx, *ky], &(cx * cy));
            }
        }
        t
    }

    /// Leg-wise product in the N-fold tensor power.
    pub fn mul_tensor<const N: usize>(&self, x: &Tensor<N>, y: &Tensor<N>) -> Tensor<N> {
        let mut acc: BTreeMap<[PbwMonomial; N], CycNum> = BTreeMap::new();
        for (kx, cx) in &x.terms {
            for (ky, cy) in &y.terms {
                let legs: Vec<Vec<(PbwMonomial, CycNum)>> = (0..N).map(|i| self.mul_mono(kx[i], ky[i])).collect();
                if legs.iter().any(|l| l.is_empty()) {
                    continue;
                }
                let base = cx * cy;
                let mut idx = [0usize; N];
                loop {
                    let mut key = [PbwMonomial { m: 0, n: 0, l: 0 }; N];
                    let mut c = base.clone();
                    for i in 0..N {
                        key[i] = legs[i][idx[i]].0;
                        c = &c * &legs[i][idx[i]].1;
                    }
                    match acc.get_mut(&key) {
                        Some(e) => *e += &c,
                        None => {
                            acc.insert(key, c);
                        }
                    }
                    let mut i = 0;
                    loop {
                        if i == N {
                            break;
                        }
                        idx[i] += 1;
                        if idx[i] < legs[i].len() {
                            break;
                        }
                        idx[i] = 0;
                        i += 1;
                    }
                    if i == N {
                        break;
                    }
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Tensor { terms: acc }
    }

    /// Swap of the two legs.
    pub fn flip(&self, t: &TensorElem) -> TensorElem {
        TensorElem { terms: t.terms.iter().map(|(k, v)| ([k[1], k[0]], v.clone())).collect() }
    }

    /// Embed a 2-tensor into the 3-fold power at legs (i, j), the remaining leg being 1.
    pub fn embed3(&self, t: &TensorElem, i: usize, j: usize) -> Tensor<3> {
        let one = PbwMonomial { m: 0, n: 0, l: 0 };
        let mut out = Tensor::<3>::zero();
        for (k, v) in &t.terms {
            let mut key = [one; 3];
            key[i] = k[0];
            key[j] = k[1];
            out.add_term(key, v);
        }
        out
    }

    /// Apply a linear map to one leg of a tensor.
    pub fn map_leg<const N: usize>(&self, t: &Tensor<N>, leg: usize, f: impl Fn(PbwMonomial) -> AlgElem) -> Tensor<N> {
        let mut out = Tensor::<N>::zero();
        for (k, v) in &t.terms {
            for (m, c) in &f(k[leg]).terms {
                let mut key = *k;
                key[leg] = *m;
                out.add_term(key, &(v * c));
            }
        }
        out
    }

    /// m(x ⊗ y) for a 2-tensor.
    pub fn multiply_legs(&self, t: &TensorElem) -> AlgElem {
        let mut out = AlgElem::zero();
        for (k, v) in &t.terms {
            for (m, c) in self.mul_mono(k[0], k[1]) {
                out.add_term(m, &(&c * v));
            }
        }
        out
    }

    // ---------- Hopf structure ----------

    /// Δ on a monomial by the closed formula
    /// Δ(E^mF^nK^l) = Σ_{i,j} q^{i(m−i)+j(n−j)−2(m−i)(n−j)} [m i][n j]
    ///   E^{m−i}F^jK^{l+j−n} ⊗ E^iF^{n−j}K^{l+m−i}.
    pub fn coproduct_mono_formula(&self, x: PbwMonomial) -> TensorElem {
        let p = self.p;
        let (m, n, l) = (x.m as i64, x.n as i64, x.l as i64);
        let mut t = TensorElem::zero();
        for i in 0..=m {
            for j in 0..=n {
                let e = i * (m - i) + j * (n - j) - 2 * (m - i) * (n - j);
                let c = &(self.q_pow(e) * &q_binomial(p, m as u64, i as u64)) * &q_binomial(p, n as u64, j as u64);
                let a = self.mono((m - i) as usize, j as usize, l + 2 * (j - n));
                let b = self.mono(i as usize, (n - j) as usize, l + 2 * (m - i));
                t.add_term([a, b], &c);
            }
        }
        t
    }

    pub fn coproduct(&self, x: &AlgElem) -> TensorElem {
        let mut t = TensorElem::zero();
        for (k, v) in &x.terms {
            if let Some(i) = self.index_of(k) {
                for (a, b, c) in &self.delta_uq[i] {
                    t.add_term([self.basis_mono(*a), self.basis_mono(*b)], &(c * v));
                }
            } else {
                for (kk, c) in &self.coproduct_mono_formula(*k).terms {
                    t.add_term(*kk, &(c * v));
                }
            }
        }
        t
    }

    /// Δ on a monomial computed as Δ(E)^m Δ(F)^n Δ(K^{1/2})^l by tensor products.
    pub fn coproduct_mono_by_products(&self, x: PbwMonomial) -> TensorElem {
        let one = self.one();
        let de = &self.tensor2(&one, &self.e()).add(&self.tensor2(&self.e(), &self.k(1)));
        let df = &self.tensor2(&self.f(), &one).add(&self.tensor2(&self.k(-1), &self.f()));
        let dk = self.tensor2(&self.k_half(x.l as i64), &self.k_half(x.l as i64));
        let mut acc = self.tensor2(&one, &one);
        for _ in 0..x.m {
            acc = self.mul_tensor(&acc, de);
        }
        for _ in 0..x.n {
            acc = self.mul_tensor(&acc, df);
        }
        self.mul_tensor(&acc, &dk)
    }

    pub fn counit(&self, x: &AlgElem) -> CycNum {
        let mut acc = CycNum::zero(self.p);
        for (k, v) in &x.terms {
            if k.m == 0 && k.n == 0 {
                acc += v;
            }
        }
        acc
    }

    fn antipode_mono(&self, x: PbwMonomial) -> AlgElem {
        // S(E^mF^nK^{l/2}) = K^{-l/2} (−KF)^n (−EK^{-1})^m
        let se = self.mul(&self.e(), &self.k(-1)).scale(&self.c(-1));
        let sf = self.mul(&self.k(1), &self.f()).scale(&self.c(-1));
        let mut acc = self.k_half(-(x.l as i64));
        for _ in 0..x.n {
            acc = self.mul(&acc, &sf);
        }
        for _ in 0..x.m {
            acc = self.mul(&acc, &se);
        }
        acc
    }

    fn antipode_inv_mono(&self, x: PbwMonomial) -> AlgElem {
        // S⁻¹(E) = −K⁻¹E, S⁻¹(F) = −FK, S⁻¹ anti-multiplicative
        let se = self.mul(&self.k(-1), &self.e()).scale(&self.c(-1));
        let sf = self.mul(&self.f(), &self.k(1)).scale(&self.c(-1));
        let mut acc = self.k_half(-(x.l as i64));
        for _ in 0..x.n {
            acc = self.mul(&acc, &sf);
        }
        for _ in 0..x.m {
            acc = self.mul(&acc, &se);
        }
        acc
    }

    pub fn antipode(&self, x: &AlgElem) -> AlgElem {
        let mut out = AlgElem::zero();
        for (k, v) in &x.terms {
            let img = match self.index_of(k) {
                Some(i) => self.antipode_uq[i].clone(),
                None => self.antipode_mono(*k),
            };
            for (kk, c) in &img.terms {
                out.add_term(*kk, &(c * v));
            }
        }
        out
    }

    pub fn antipode_inv(&self, x: &AlgElem) -> AlgElem {
        let mut out = AlgElem::zero();
        for (k, v) in &x.terms {
            let img = match self.index_of(k) {
                Some(i) => self.antipode_inv_uq[i].clone(),
                None => self.antipode_inv_mono(*k),
            };
            for (kk, c) in &img.terms {
                out.add_term(*kk, &(c * v));
            }
        }
        out
    }

    pub fn antipode_mono_elem(&self, x: PbwMonomial) -> AlgElem {
        match self.index_of(&x) {
            Some(i) => self.antipode_uq[i].clone(),
            None => self.antipode_mono(x),
        }
    }

    pub fn antipode_inv_mono_elem(&self, x: PbwMonomial) -> AlgElem {
        match self.index_of(&x) {
            Some(i) => self.antipode_inv_uq[i].clone(),
            None => self.antipode_inv_mono(x),
        }
    }

    // ---------- integrals ----------

    /// The normalization (−1)^{p−1}·2p·[p−1]!² of the right integral.
    pub fn integral_normalization(&self) -> CycNum {
        let p = self.p;
        let f = q_factorial(p, p as u64 - 1);
        let sign = if p % 2 == 1 { 1 } else { -1 };
        &(&f * &f) * &self.c(sign * 2 * p as i64)
    }

    /// μ^r(E^aF^bK^c) = ν·δ_{a,p−1}δ_{b,p−1}δ_{c,p+1}, ν the normalization.
    pub fn integral_right(&self, x: &AlgElem) -> CycNum {
        let p = self.p;
        let target = self.mono(p - 1, p - 1, 2 * (p as i64 + 1));
        match x.coeff(&target) {
            Some(c) => c * &self.integral_normalization(),
            None => CycNum::zero(p),
        }
    }

    /// μ^l = μ^r(g² ·) with g² = K².
    pub fn integral_left(&self, x: &AlgElem) -> CycNum {
        self.integral_right(&self.mul(&self.k(2), x))
    }

    pub fn integral_right_form(&self) -> DualForm {
        self.form_from_fn(|x| self.integral_right(x))
    }

    pub fn integral_left_form(&self) -> DualForm {
        self.form_from_fn(|x| self.integral_left(x))
    }

    // ---------- dual forms ----------

    pub fn form_from_fn(&self, f: impl Fn(&AlgElem) -> CycNum) -> DualForm {
        DualForm { values: (0..self.dim()).map(|i| f(&self.monomial_elem(i))).collect() }
    }

    pub fn monomial_elem(&self, idx: usize) -> AlgElem {
        let mut x = AlgElem::zero();
        x.add_term(self.basis_mono(idx), &CycNum::one(self.p));
        x
    }

    pub fn eval(&self, phi: &DualForm, x: &AlgElem) -> CycNum {
        let mut acc = CycNum::zero(self.p);
        for (k, v) in &x.terms {
            let i = self.index_of(k).expect("linear forms are evaluated on Ū_q only");
            let w = &phi.values[i];
            if !w.is_zero() {
                acc += &(w * v);
            }
        }
        acc
    }

    /// (φ ⊗ ψ)(t).
    pub fn eval2(&self, phi: &DualForm, psi: &DualForm, t: &TensorElem) -> CycNum {
        let mut acc = CycNum::zero(self.p);
        for (k, v) in &t.terms {
            let a = &phi.values[self.index_of(&k[0]).expect("Ū_q leg")];
            let b = &psi.values[self.index_of(&k[1]).expect("Ū_q leg")];
            if !a.is_zero() && !b.is_zero() {
                acc += &(&(a * b) * v);
            }
        }
        acc
    }

    /// ε as a form.
    pub fn counit_form(&self) -> DualForm {
        self.form_from_fn(|x| self.counit(x))
    }

    /// (φψ)(x) = (φ⊗ψ)(Δx).
    pub fn dual_product(&self, phi: &DualForm, psi: &DualForm) -> DualForm {
        let p = self.p;
        let values = (0..self.dim())
            .map(|i| {
                let mut acc = CycNum::zero(p);
                for (a, b, c) in &self.delta_uq[i] {
                    let x = &phi.values[*a];
                    let y = &psi.values[*b];
                    if !x.is_zero() && !y.is_zero() {
                        acc += &(&(x * y) * c);
                    }
                }
                acc
            })
            .collect();
        DualForm { values }
    }

    /// S(φ) = φ∘S.
    pub fn dual_antipode(&self, phi: &DualForm) -> DualForm {
        DualForm { values: (0..self.dim()).map(|i| self.eval(phi, &self.antipode_uq[i])).collect() }
    }

    /// The form φ(a ? b).
    pub fn sandwich(&self, phi: &DualForm, a: &AlgElem, b: &AlgElem) -> DualForm {
        DualForm { values: (0..self.dim()).map(|i| self.eval(phi, &self.mul3(a, &self.monomial_elem(i), b))).collect() }
    }

    /// Coproduct table entries of the i-th basis monomial.
    pub fn delta_entries(&self, i: usize) -> &[(usize, usize, CycNum)] {
        &self.delta_uq[i]
    }

    /// φ symmetric iff φ(xy) = φ(yx) on generators x ∈ {E, F, K} and all basis y.
    pub fn is_symmetric(&self, phi: &DualForm) -> bool {
        let gens = [self.e(), self.f(), self.k(1)];
        (0..self.dim()).all(|i| {
            let y = self.monomial_elem(i);
            gens.iter().all(|x| self.eval(phi, &self.mul(x, &y)) == self.eval(phi, &self.mul(&y, x)))
        })
    }

    /// F^n E^m in normal form (used for integral cross-checks).
    pub fn f_then_e(&self, n: usize, m: usize, k_halves: i64) -> AlgElem {
        let mut x = AlgElem::zero();
        for (a, b, r, c) in &self.fe[n][m] {
            x.add_term(self.mono(*a as usize, *b as usize, *r + k_halves), c);
        }
        x
    }

    /// Element from an extension-indexed dense vector.
    pub fn from_dense_uq(&self, v: &[CycNum]) -> AlgElem {
        let mut x = AlgElem::zero();
        for (i, c) in v.iter().enumerate() {
            x.add_term(self.basis_mono(i), c);
        }
        x
    }

    pub fn to_dense_uq(&self, x: &AlgElem) -> Result<Vec<CycNum>> {
        let mut v = vec![CycNum::zero(self.p); self.dim()];
        for (k, c) in &x.terms {
            let i = self.index_of(k).ok_or_else(|| Error::NotInUq(format!("{k:?}")))?;
            v[i] = c.clone();
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defining_relations() {
        for p in 2..=4 {
            let uq = Uq::new(p);
            let (e, f, k) = (uq.e(), uq.f(), uq.k(1));
            let lhs = uq.mul(&e, &f);
            let qh = uq.qhat().inv().unwrap();
            let rhs = &uq.mul(&f, &e) + &(&k - &uq.k(-1)).scale(&qh);
            assert_eq!(lhs, rhs);
            assert_eq!(uq.mul(&k, &e), uq.mul(&e, &k).scale(uq.q_pow(2)));
            assert_eq!(uq.mul(&k, &f), uq.mul(&f, &k).scale(uq.q_pow(-2)));
            assert!(uq.pow(&e, p as u32).is_zero());
            assert!(uq.pow(&f, p as u32).is_zero());
            assert_eq!(uq.pow(&k, 2 * p as u32), uq.one());
            assert_eq!(uq.pow(&uq.k_half(1), 2), k);
        }
    }

    #[test]
    fn associativity_on_generator_words() {
        let uq = Uq::new(3);
        let x = &uq.mul(&uq.f(), &uq.e()) + &uq.k_half(3);
        let y = &uq.mul(&uq.e(), &uq.e()) + &uq.f();
        let z = &uq.mul(&uq.k(2), &uq.f()) + &uq.e();
        assert_eq!(uq.mul(&uq.mul(&x, &y), &z), uq.mul(&x, &uq.mul(&y, &z)));
    }

    #[test]
    fn generator_coproducts() {
        let uq = Uq::new(3);
        let de = uq.coproduct(&uq.e());
        assert_eq!(de, uq.tensor2(&uq.one(), &uq.e()).add(&uq.tensor2(&uq.e(), &uq.k(1))));
        let dk = uq.coproduct(&uq.k(2));
        assert_eq!(dk, uq.tensor2(&uq.k(2), &uq.k(2)));
    }

    #[test]
    fn coproduct_of_efk_matches_product() {
        let uq = Uq::new(3);
        let efk = uq.mono(1, 1, 2);
        assert_eq!(uq.coproduct_mono_formula(efk), uq.coproduct_mono_by_products(efk));
    }

    #[test]
    fn antipode_values() {
        let uq = Uq::new(3);
        assert_eq!(uq.antipode(&uq.f()), uq.mul(&uq.k(1), &uq.f()).scale(&uq.c(-1)));
        assert_eq!(uq.antipode(&uq.one()), uq.one());
        assert!(uq.counit(&uq.k(1)).is_one());
        let s2e = uq.antipode(&uq.antipode(&uq.e()));
        assert_eq!(s2e, uq.e().scale(uq.q_pow(2)));
        let g = uq.pivot();
        assert_eq!(s2e, uq.mul3(&g, &uq.e(), &uq.k(-(uq.p as i64) - 1)));
    }

    #[test]
    fn antipode_inverse_round_trip() {
        let uq = Uq::new(2);
        for i in 0..uq.dim() {
            let x = uq.monomial_elem(i);
            assert_eq!(uq.antipode_inv(&uq.antipode(&x)), x);
        }
    }

    #[test]
    fn integral_values() {
        for p in 2..=3 {
            let uq = Uq::new(p);
            assert!(uq.integral_right(&uq.one()).is_zero());
            let x = uq.f_then_e(p - 1, p - 1, 2 * (p as i64 + 1));
            assert_eq!(uq.integral_right(&x), uq.integral_normalization());
        }
    }

    #[test]
    fn inverse_of_group_like_and_casimir_shift() {
        let uq = Uq::new(2);
        assert_eq!(uq.inverse(&uq.k(1)).unwrap(), uq.k(-1));
        let x = &uq.one() + &uq.e();
        let xi = uq.inverse(&x).unwrap();
        assert_eq!(uq.mul(&xi, &x), uq.one());
    }
}
