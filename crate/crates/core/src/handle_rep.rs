//! The Heisenberg double acting on H* = Ū_q*, the handle algebra L_{1,0} realized by
//! operators on H*, and its genus-g extension on (H*)^{⊗g}.
//!
//! A linear operator O on H* is stored as the matrix with (Oφ)_x = Σ_y O[x][y] φ_y, where
//! φ_y = φ(y) on the PBW basis. Pulling back along a linear map F (φ ↦ φ∘F) therefore has
//! O[x][y] = coefficient of y in F(x).

use serde::Serialize;

use crate::center_slf::{sigma_matrix, Center, CenterVec, Gta};
use crate::cyclo::CycNum;
use crate::error::{Error, Result};
use crate::linalg::ExactMatrix;
use crate::ribbon::{rep_tensor, Ribbon};
use crate::uq_algebra::{AlgElem, DualForm, PbwMonomial, TensorElem, Uq};
use crate::uq_modules::{build_module, kronecker, Module, ModuleSpec, Sign};

/// Default bound on dim (H*)^{⊗g}.
pub const DEFAULT_MAX_DIM: usize = 1024;

pub fn space_tag(g: usize) -> String {
    format!("Hdual^{g}")
}

// ---------- operators on one copy of H* ----------

pub fn mono_elem(uq: &Uq, x: PbwMonomial) -> AlgElem {
    let mut e = AlgElem::zero();
    e.add_term(x, &CycNum::one(uq.p));
    e
}

/// Matrix of φ ↦ φ∘F for F given on basis monomials. F may pass through the K^{1/2}
/// extension but its values must lie in Ū_q.
pub fn pullback_op(uq: &Uq, f: impl Fn(PbwMonomial) -> AlgElem) -> Result<ExactMatrix> {
    let d = uq.dim();
    let tag = space_tag(1);
    let mut m = ExactMatrix::zeros_in(uq.p, d, d, &tag, &tag);
    for x in 0..d {
        for (k, c) in &f(uq.basis_mono(x)).terms {
            let y = uq.index_of(k).ok_or_else(|| Error::NotInUq(format!("pullback image contains {k:?}")))?;
            m.set(x, y, c.clone());
        }
    }
    Ok(m)
}

/// h ▷ φ = φ(?h).
pub fn right_mult_op(uq: &Uq, h: &AlgElem) -> Result<ExactMatrix> {
    pullback_op(uq, |x| uq.mul(&mono_elem(uq, x), h))
}

/// φ ↦ φ(h?).
pub fn left_mult_op(uq: &Uq, h: &AlgElem) -> Result<ExactMatrix> {
    pullback_op(uq, |x| uq.mul(h, &mono_elem(uq, x)))
}

/// φ ↦ φ(a?b).
pub fn sandwich_op(uq: &Uq, a: &AlgElem, b: &AlgElem) -> Result<ExactMatrix> {
    pullback_op(uq, |x| uq.mul3(a, &mono_elem(uq, x), b))
}

/// h̃ ▷ φ = φ(S⁻¹(h)?).
pub fn tilde_op(uq: &Uq, h: &AlgElem) -> Result<ExactMatrix> {
    left_mult_op(uq, &uq.antipode_inv(h))
}

/// ψ ▷ φ = ψφ.
pub fn dual_mult_op(uq: &Uq, psi: &DualForm) -> ExactMatrix {
    let d = uq.dim();
    let tag = space_tag(1);
    let mut m = ExactMatrix::zeros_in(uq.p, d, d, &tag, &tag);
    for x in 0..d {
        for (a, b, c) in uq.delta_entries(x) {
            let w = &psi.values[*a];
            if !w.is_zero() {
                m.add_at(x, *b, &(w * c));
            }
        }
    }
    m
}

/// (ψ ⊗ h) ▷ φ = ψ · φ(?h).
pub fn heis_apply(uq: &Uq, psi: &DualForm, h: &AlgElem, phi: &DualForm) -> Result<DualForm> {
    let op = right_mult_op(uq, h)?;
    Ok(uq.dual_product(psi, &DualForm { values: op.apply(&phi.values) }))
}

pub fn apply_op(op: &ExactMatrix, phi: &DualForm) -> DualForm {
    DualForm { values: op.apply(&phi.values) }
}

/// An operator on (H*)^{⊗g}, tagged by its space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HdOperator {
    pub p: usize,
    pub g: usize,
    pub matrix: ExactMatrix,
}

#[derive(Serialize)]
struct HdOperatorJson<'a> {
    p: usize,
    g: usize,
    space: String,
    rows: usize,
    cols: usize,
    entries: Vec<&'a [CycNum]>,
}

impl HdOperator {
    pub fn new(p: usize, g: usize, matrix: ExactMatrix) -> Self {
        let tag = space_tag(g);
        HdOperator { p, g, matrix: matrix.with_bases(&tag, &tag) }
    }

    pub fn compose(&self, other: &HdOperator) -> Result<HdOperator> {
        if self.g != other.g {
            return Err(Error::Dimension(format!("{} composed with {}", space_tag(self.g), space_tag(other.g))));
        }
        Ok(HdOperator { p: self.p, g: self.g, matrix: self.matrix.compose(&other.matrix)? })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let m = &self.matrix;
        serde_json::to_value(HdOperatorJson {
            p: self.p,
            g: self.g,
            space: space_tag(self.g),
            rows: m.rows(),
            cols: m.cols(),
            entries: (0..m.rows()).map(|i| m.row(i)).collect(),
        })
        .expect("serializable")
    }
}

// ---------- matrices with operator entries ----------

/// Entry type of a [`BlockOp`].
pub trait OpElem: Clone {
    fn op_mul(&self, o: &Self) -> Self;
    fn op_add(&self, o: &Self) -> Self;
    fn op_scale(&self, c: &CycNum) -> Self;
    fn op_is_zero(&self) -> bool;
    fn op_p(&self) -> usize;
}

impl OpElem for ExactMatrix {
    fn op_mul(&self, o: &Self) -> Self {
        self.compose(o).expect("operator blocks on the same space")
    }
    fn op_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn op_scale(&self, c: &CycNum) -> Self {
        self.scale(c)
    }
    fn op_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn op_p(&self) -> usize {
        self.p()
    }
}

/// An n×n matrix whose entries are operators; (XY)_{ij} = Σ_k X_{ik}Y_{kj}.
#[derive(Clone, Debug)]
pub struct BlockOp<T> {
    pub n: usize,
    pub entries: Vec<T>,
    zero: T,
    one: T,
}

impl<T: OpElem> BlockOp<T> {
    pub fn from_fn(n: usize, zero: T, one: T, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        BlockOp { n, entries, zero, one }
    }

    pub fn identity(n: usize, zero: T, one: T) -> Self {
        let (z, o) = (zero.clone(), one.clone());
        Self::from_fn(n, zero, one, |i, j| if i == j { o.clone() } else { z.clone() })
    }

    /// The scalar matrix m, i.e. m ⊗ id.
    pub fn scalar(m: &ExactMatrix, zero: T, one: T) -> Self {
        let (z, o) = (zero.clone(), one.clone());
        Self::from_fn(m.rows(), zero, one, |i, j| if m.get(i, j).is_zero() { z.clone() } else { o.op_scale(m.get(i, j)) })
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.n + j]
    }

    pub fn zero_elem(&self) -> &T {
        &self.zero
    }

    pub fn one_elem(&self) -> &T {
        &self.one
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n);
        let n = self.n;
        Self::from_fn(n, self.zero.clone(), self.one.clone(), |i, j| {
            let mut acc: Option<T> = None;
            for k in 0..n {
                let (a, b) = (self.get(i, k), o.get(k, j));
                if a.op_is_zero() || b.op_is_zero() {
                    continue;
                }
                let t = a.op_mul(b);
                acc = Some(match acc {
                    None => t,
                    Some(s) => s.op_add(&t),
                });
            }
            acc.unwrap_or_else(|| self.zero.clone())
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_fn(self.n, self.zero.clone(), self.one.clone(), |i, j| self.get(i, j).op_add(o.get(i, j)))
    }

    pub fn sub(&self, o: &Self) -> Self {
        let m1 = CycNum::from_i64(self.one.op_p(), -1);
        Self::from_fn(self.n, self.zero.clone(), self.one.clone(), |i, j| self.get(i, j).op_add(&o.get(i, j).op_scale(&m1)))
    }

    pub fn scale(&self, c: &CycNum) -> Self {
        Self::from_fn(self.n, self.zero.clone(), self.one.clone(), |i, j| self.get(i, j).op_scale(c))
    }

    /// m · X for a scalar matrix m.
    pub fn lmul_scalar(&self, m: &ExactMatrix) -> Self {
        let n = self.n;
        Self::from_fn(n, self.zero.clone(), self.one.clone(), |i, j| {
            let mut acc = self.zero.clone();
            for k in 0..n {
                let c = m.get(i, k);
                if !c.is_zero() && !self.get(k, j).op_is_zero() {
                    acc = acc.op_add(&self.get(k, j).op_scale(c));
                }
            }
            acc
        })
    }

    /// X · m for a scalar matrix m.
    pub fn rmul_scalar(&self, m: &ExactMatrix) -> Self {
        let n = self.n;
        Self::from_fn(n, self.zero.clone(), self.one.clone(), |i, j| {
            let mut acc = self.zero.clone();
            for k in 0..n {
                let c = m.get(k, j);
                if !c.is_zero() && !self.get(i, k).op_is_zero() {
                    acc = acc.op_add(&self.get(i, k).op_scale(c));
                }
            }
            acc
        })
    }

    /// X ⊗ id_k (X in the first tensor slot, index (a,b) ↦ a·k + b).
    pub fn tensor_left(&self, k: usize) -> Self {
        Self::from_fn(self.n * k, self.zero.clone(), self.one.clone(), |r, c| {
            if r % k == c % k {
                self.get(r / k, c / k).clone()
            } else {
                self.zero.clone()
            }
        })
    }

    /// id_k ⊗ X.
    pub fn tensor_right(&self, k: usize) -> Self {
        let n = self.n;
        Self::from_fn(
            n * k,
            self.zero.clone(),
            self.one.clone(),
            |r, c| {
                if r / n == c / n {
                    self.get(r % n, c % n).clone()
                } else {
                    self.zero.clone()
                }
            },
        )
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.op_is_zero())
    }

    pub fn equals(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }

    pub fn is_identity(&self) -> bool {
        self.equals(&Self::identity(self.n, self.zero.clone(), self.one.clone()))
    }

    pub fn map<U: OpElem>(&self, zero: U, one: U, f: impl Fn(&T) -> U) -> BlockOp<U> {
        BlockOp { n: self.n, entries: self.entries.iter().map(f).collect(), zero, one }
    }
}

impl BlockOp<ExactMatrix> {
    /// The (n·D)×(n·D) matrix with block (i,j) = entry (i,j).
    pub fn to_dense(&self) -> ExactMatrix {
        let d = self.one.rows();
        let p = self.one.p();
        let mut out = ExactMatrix::zeros(p, self.n * d, self.n * d);
        for bi in 0..self.n {
            for bj in 0..self.n {
                let blk = self.get(bi, bj);
                for r in 0..d {
                    for c in 0..d {
                        let v = blk.get(r, c);
                        if !v.is_zero() {
                            out.set(bi * d + r, bj * d + c, v.clone());
                        }
                    }
                }
            }
        }
        out
    }

    pub fn from_dense(m: &ExactMatrix, n: usize, zero: ExactMatrix, one: ExactMatrix) -> Self {
        let d = one.rows();
        let (rb, cb) = (one.row_basis.clone(), one.col_basis.clone());
        Self::from_fn(n, zero, one, |bi, bj| ExactMatrix::from_fn(m.p(), d, d, |r, c| m.get(bi * d + r, bj * d + c).clone()).with_bases(&rb, &cb))
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.to_dense().inverse()?;
        Ok(Self::from_dense(&inv, self.n, self.zero.clone(), self.one.clone()))
    }
}

pub fn op_identity(uq: &Uq) -> ExactMatrix {
    ExactMatrix::identity_in(uq.p, uq.dim(), &space_tag(1))
}

pub fn op_zero(uq: &Uq) -> ExactMatrix {
    let tag = space_tag(1);
    ExactMatrix::zeros_in(uq.p, uq.dim(), uq.dim(), &tag, &tag)
}

// ---------- operators on (H*)^{⊗g} as sums of tensor products ----------

/// Σ_t X_t¹ ⊗ … ⊗ X_t^g, kept reduced: the last factors of distinct terms are linearly
/// independent and the reduction recurses on the remaining factors, so the zero operator
/// has no terms.
#[derive(Clone, Debug)]
pub struct KronOp {
    pub p: usize,
    pub d: usize,
    pub g: usize,
    pub terms: Vec<Vec<ExactMatrix>>,
}

fn reduce_terms(p: usize, d: usize, g: usize, terms: Vec<Vec<ExactMatrix>>) -> Vec<Vec<ExactMatrix>> {
    if terms.is_empty() {
        return terms;
    }
    if g == 1 {
        let mut it = terms.into_iter();
        let mut acc = it.next().unwrap().pop().unwrap();
        for mut t in it {
            acc = acc.add(&t.pop().unwrap());
        }
        return if acc.is_zero() { vec![] } else { vec![vec![acc]] };
    }
    if terms.len() == 1 {
        return if terms[0].iter().any(|m| m.is_zero()) { vec![] } else { terms };
    }
    let n = terms.len();
    let ymat = ExactMatrix::from_fn(p, d * d, n, |r, t| terms[t][g - 1].entries()[r].clone());
    let (rr, piv) = ymat.rref();
    let mut out = Vec::new();
    for (r, &pc) in piv.iter().enumerate() {
        let mut head = Vec::new();
        for (t, term) in terms.iter().enumerate() {
            let c = rr.get(r, t);
            if c.is_zero() {
                continue;
            }
            let mut h = term[..g - 1].to_vec();
            h[0] = h[0].scale(c);
            head.push(h);
        }
        for mut h in reduce_terms(p, d, g - 1, head) {
            h.push(terms[pc][g - 1].clone());
            out.push(h);
        }
    }
    out
}

/// y = (id ⊗ … ⊗ m ⊗ … ⊗ id) x with m on `axis`.
fn apply_axis(x: &[CycNum], d: usize, g: usize, axis: usize, m: &ExactMatrix) -> Vec<CycNum> {
    let p = m.p();
    let stride = d.pow((g - 1 - axis) as u32);
    let outer = x.len() / (d * stride);
    let mut y = vec![CycNum::zero(p); x.len()];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * d * stride + s;
            for c in 0..d {
                let xv = &x[base + c * stride];
                if xv.is_zero() {
                    continue;
                }
                for r in 0..d {
                    let mv = m.get(r, c);
                    if !mv.is_zero() {
                        y[base + r * stride] += &(mv * xv);
                    }
                }
            }
        }
    }
    y
}

impl KronOp {
    pub fn zero(p: usize, d: usize, g: usize) -> Self {
        KronOp { p, d, g, terms: vec![] }
    }

    pub fn identity(p: usize, d: usize, g: usize) -> Self {
        let id = ExactMatrix::identity_in(p, d, &space_tag(1));
        KronOp { p, d, g, terms: vec![vec![id; g]] }
    }

    /// m acting on factor `i` (0-based).
    pub fn local(g: usize, i: usize, m: &ExactMatrix) -> Self {
        let (p, d) = (m.p(), m.rows());
        let mut k = Self::identity(p, d, g);
        if m.is_zero() {
            return Self::zero(p, d, g);
        }
        k.terms[0][i] = m.clone();
        k
    }

    pub fn from_terms(p: usize, d: usize, g: usize, terms: Vec<Vec<ExactMatrix>>) -> Self {
        KronOp { p, d, g, terms: reduce_terms(p, d, g, terms) }
    }

    pub fn dim(&self) -> usize {
        self.d.pow(self.g as u32)
    }

    pub fn apply(&self, x: &[CycNum]) -> Vec<CycNum> {
        let mut out = vec![CycNum::zero(self.p); x.len()];
        for t in &self.terms {
            let mut y = x.to_vec();
            for (axis, m) in t.iter().enumerate() {
                if !m.is_identity() {
                    y = apply_axis(&y, self.d, self.g, axis, m);
                }
            }
            for (o, v) in out.iter_mut().zip(&y) {
                if !v.is_zero() {
                    *o += v;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> ExactMatrix {
        let n = self.dim();
        let mut out = ExactMatrix::zeros(self.p, n, n);
        for t in &self.terms {
            let mut k = t[0].clone().with_bases("", "");
            for m in &t[1..] {
                k = kronecker(&k, &m.clone().with_bases("", ""));
            }
            out = out.add(&k);
        }
        out
    }

    /// λ with self = λ·other, if one exists (self ≠ 0 required for a meaningful answer).
    pub fn ratio_to(&self, other: &KronOp) -> Option<CycNum> {
        let n = self.dim();
        for j in 0..n {
            let mut e = vec![CycNum::zero(self.p); n];
            e[j] = CycNum::one(self.p);
            let a = self.apply(&e);
            let b = other.apply(&e);
            if let Some(i) = b.iter().position(|x| !x.is_zero()) {
                let lam = a[i].checked_div(&b[i]).ok()?;
                return if self.op_add(&other.op_scale(&-lam.clone())).op_is_zero() { Some(lam) } else { None };
            }
            if a.iter().any(|x| !x.is_zero()) {
                return None;
            }
        }
        None
    }
}

impl OpElem for KronOp {
    fn op_mul(&self, o: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for a in &self.terms {
            for b in &o.terms {
                let t: Vec<ExactMatrix> = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| {
                        if x.is_identity() {
                            y.clone()
                        } else if y.is_identity() {
                            x.clone()
                        } else {
                            x.compose(y).expect("same factor space")
                        }
                    })
                    .collect();
                terms.push(t);
            }
        }
        KronOp::from_terms(self.p, self.d, self.g, terms)
    }
    fn op_add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        KronOp::from_terms(self.p, self.d, self.g, terms)
    }
    fn op_scale(&self, c: &CycNum) -> Self {
        if c.is_zero() {
            return KronOp::zero(self.p, self.d, self.g);
        }
        let mut k = self.clone();
        for t in &mut k.terms {
            t[0] = t[0].scale(c);
        }
        k
    }
    fn op_is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn op_p(&self) -> usize {
        self.p
    }
}

/// Block vector v ↦ X v for X with KronOp entries; `v[j]` is the j-th component.
pub fn block_apply(x: &BlockOp<KronOp>, v: &[Vec<CycNum>]) -> Vec<Vec<CycNum>> {
    let n = x.n;
    (0..n)
        .map(|i| {
            let mut acc = vec![CycNum::zero(x.one_elem().p); v[0].len()];
            for (j, vj) in v.iter().enumerate() {
                let e = x.get(i, j);
                if e.op_is_zero() {
                    continue;
                }
                for (a, b) in acc.iter_mut().zip(e.apply(vj)) {
                    *a += &b;
                }
            }
            acc
        })
        .collect()
}

// ---------- L-matrices ----------

/// L^{(±)} and their inverses on a lifted module I, entries in the K^{1/2} extension.
#[derive(Clone, Debug)]
pub struct LMatrices {
    pub d: usize,
    /// Σ T(a_i) b_i.
    pub plus: Vec<Vec<AlgElem>>,
    /// Σ T(a_i) S⁻¹(b_i).
    pub plus_inv: Vec<Vec<AlgElem>>,
    /// Σ T(b_i) S(a_i).
    pub minus: Vec<Vec<AlgElem>>,
    /// Σ T(b_i) a_i.
    pub minus_inv: Vec<Vec<AlgElem>>,
}

fn alg_matrix(d: usize) -> Vec<Vec<AlgElem>> {
    vec![vec![AlgElem::zero(); d]; d]
}

pub fn l_matrices(uq: &Uq, r: &TensorElem, module: &Module) -> Result<LMatrices> {
    let d = module.dim;
    let (mut plus, mut plus_inv, mut minus, mut minus_inv) = (alg_matrix(d), alg_matrix(d), alg_matrix(d), alg_matrix(d));
    for (key, c) in &r.terms {
        let (a, b) = (key[0], key[1]);
        let ra = module.rep_mono(a)?;
        let rb = module.rep_mono(b)?;
        let sa = uq.antipode_mono_elem(a).scale(c);
        let sib = uq.antipode_inv_mono_elem(b).scale(c);
        let (ae, be) = (mono_elem(uq, a).scale(c), mono_elem(uq, b).scale(c));
        for i in 0..d {
            for k in 0..d {
                let x = ra.get(i, k);
                if !x.is_zero() {
                    plus[i][k] = &plus[i][k] + &be.scale(x);
                    plus_inv[i][k] = &plus_inv[i][k] + &sib.scale(x);
                }
                let y = rb.get(i, k);
                if !y.is_zero() {
                    minus[i][k] = &minus[i][k] + &sa.scale(y);
                    minus_inv[i][k] = &minus_inv[i][k] + &ae.scale(y);
                }
            }
        }
    }
    Ok(LMatrices { d, plus, plus_inv, minus, minus_inv })
}

/// Product of matrices with algebra entries.
pub fn alg_matmul(uq: &Uq, x: &[Vec<AlgElem>], y: &[Vec<AlgElem>]) -> Vec<Vec<AlgElem>> {
    let d = x.len();
    let mut out = alg_matrix(d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = AlgElem::zero();
            for k in 0..d {
                if !x[i][k].is_zero() && !y[k][j].is_zero() {
                    acc = &acc + &uq.mul(&x[i][k], &y[k][j]);
                }
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn alg_is_identity(uq: &Uq, x: &[Vec<AlgElem>]) -> bool {
    let one = uq.one();
    x.iter().enumerate().all(|(i, row)| row.iter().enumerate().all(|(j, e)| if i == j { *e == one } else { e.is_zero() }))
}

/// (T ⊗ id)(t) for a 2-tensor t.
pub fn matrix_of_tensor(module: &Module, t: &TensorElem) -> Result<Vec<Vec<AlgElem>>> {
    let d = module.dim;
    let mut out = alg_matrix(d);
    for (key, c) in &t.terms {
        let ra = module.rep_mono(key[0])?;
        for (i, row) in out.iter_mut().enumerate() {
            for (k, e) in row.iter_mut().enumerate() {
                let x = ra.get(i, k);
                if !x.is_zero() {
                    e.add_term(key[1], &(x * c));
                }
            }
        }
    }
    Ok(out)
}

/// Entry (i,j) of L T L′ acting on H*, with L = `left`, L′ = `right` and T the matrix of
/// coefficient forms of the module (T∘S when `twisted`):
/// (O φ)(x) = Σ_{k,l} T_{kl}(σ(x′h′)) φ(x″h″h₂), h = left_{ik}, h₂ = right_{lj}.
fn lt_entry(
    uq: &Uq,
    module: &Module,
    reps: &[ExactMatrix],
    left: &[Vec<AlgElem>],
    right: &[Vec<AlgElem>],
    twisted: bool,
    i: usize,
    j: usize,
) -> Result<ExactMatrix> {
    let d = module.dim;
    let mut items: Vec<(usize, usize, ExactMatrix, AlgElem)> = Vec::new();
    for k in 0..d {
        let h = &left[i][k];
        if h.is_zero() {
            continue;
        }
        for (key, c1) in &uq.coproduct(h).terms {
            let r1 = if twisted { module.rep(&uq.antipode_mono_elem(key[0]))? } else { module.rep_mono(key[0])? };
            let r1 = r1.scale(c1).with_bases("", "");
            for (l, row) in right.iter().enumerate() {
                let rt = &row[j];
                if rt.is_zero() {
                    continue;
                }
                let w = uq.mul(&mono_elem(uq, key[1]), rt);
                if !w.is_zero() {
                    items.push((k, l, r1.clone(), w));
                }
            }
        }
    }
    let p = uq.p;
    pullback_op(uq, |x| {
        let xi = uq.index_of(&x).expect("basis monomial");
        let mut acc = AlgElem::zero();
        for (a, b, c) in uq.delta_entries(xi) {
            let ra = &reps[*a];
            let xb = mono_elem(uq, uq.basis_mono(*b));
            for (k, l, r1, w) in &items {
                // T_{kl}(x′h′) = (T(x′)T(h′))_{kl}; T_{kl}(S(x′h′)) = (T(S h′) T(S x′))_{kl}
                let mut val = CycNum::zero(p);
                for m in 0..d {
                    let (u, v) = if twisted { (r1.get(*k, m), ra.get(m, *l)) } else { (ra.get(*k, m), r1.get(m, *l)) };
                    if !u.is_zero() && !v.is_zero() {
                        val += &(u * v);
                    }
                }
                if val.is_zero() {
                    continue;
                }
                acc = &acc + &uq.mul(&xb, w).scale(&(&val * c));
            }
        }
        acc
    })
}

fn basis_reps(uq: &Uq, module: &Module, twisted: bool) -> Result<Vec<ExactMatrix>> {
    (0..uq.dim())
        .map(|x| {
            let m = if twisted { module.rep(&uq.antipode_mono_elem(uq.basis_mono(x)))? } else { module.rep_mono(uq.basis_mono(x))? };
            Ok(m.with_bases("", ""))
        })
        .collect()
}

/// Entry (i,j) of the B-operator on a lifted module.
pub fn b_entry(uq: &Uq, module: &Module, l: &LMatrices, i: usize, j: usize) -> Result<ExactMatrix> {
    let reps = basis_reps(uq, module, false)?;
    lt_entry(uq, module, &reps, &l.plus, &l.minus_inv, false, i, j)
}

/// φ ↦ Σ_k φ(S⁻¹(t_{kj}) ? h_{ik}): entry (i,j) of the product h·t̃.
fn tilde_product_entry(uq: &Uq, h: &[Vec<AlgElem>], t: &[Vec<AlgElem>], i: usize, j: usize) -> Result<ExactMatrix> {
    let d = h.len();
    let pairs: Vec<(AlgElem, AlgElem)> =
        (0..d).filter(|&k| !h[i][k].is_zero() && !t[k][j].is_zero()).map(|k| (uq.antipode_inv(&t[k][j]), h[i][k].clone())).collect();
    pullback_op(uq, |x| {
        let xe = mono_elem(uq, x);
        let mut acc = AlgElem::zero();
        for (a, b) in &pairs {
            acc = &acc + &uq.mul3(a, &xe, b);
        }
        acc
    })
}

// ---------- the handle algebra L_{1,0} on H* ----------

/// Which generator matrix of L_{1,0}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Letter {
    A,
    B,
    AInv,
    BInv,
}

/// Images of A, B, A⁻¹, B⁻¹, C^{(±)} under the Heisenberg-double representation, for one
/// lifted module.
pub struct HandleOps {
    pub p: usize,
    pub module: Module,
    pub l: LMatrices,
    pub a: BlockOp<ExactMatrix>,
    pub a_inv: BlockOp<ExactMatrix>,
    pub b: BlockOp<ExactMatrix>,
    pub b_inv: BlockOp<ExactMatrix>,
    /// L^{(+)} L̃^{(+)}.
    pub c_plus: BlockOp<ExactMatrix>,
    /// L^{(−)} L̃^{(−)}.
    pub c_minus: BlockOp<ExactMatrix>,
    /// The ribbon element on the module.
    pub v_rep: ExactMatrix,
    /// The pivotal element K^{p+1} on the module.
    pub pivot: ExactMatrix,
}

impl HandleOps {
    pub fn new(uq: &Uq, rb: &Ribbon, module: &Module) -> Result<Self> {
        if module.khalf.is_none() {
            return Err(Error::InvalidModule("the handle operators need a lifted module".into()));
        }
        let d = module.dim;
        let l = l_matrices(uq, &rb.r, module)?;
        let (zero, one) = (op_zero(uq), op_identity(uq));
        let m = matrix_of_tensor(module, &rb.m)?;
        let m_inv = alg_matmul(uq, &l.minus, &l.plus_inv);
        let a = try_block(d, &zero, &one, |i, j| right_mult_op(uq, &m[i][j]))?;
        let a_inv = try_block(d, &zero, &one, |i, j| right_mult_op(uq, &m_inv[i][j]))?;
        let reps = basis_reps(uq, module, false)?;
        let reps_s = basis_reps(uq, module, true)?;
        let b = try_block(d, &zero, &one, |i, j| lt_entry(uq, module, &reps, &l.plus, &l.minus_inv, false, i, j))?;
        let b_inv = try_block(d, &zero, &one, |i, j| lt_entry(uq, module, &reps_s, &l.minus, &l.plus_inv, true, i, j))?;
        // L̃^{(+)} has the same coefficients as L^{(+)}; L̃^{(−)} = Σ T(S⁻¹(b_i)) ã_i.
        let mut lt_minus = alg_matrix(d);
        for (key, c) in &rb.r.terms {
            let rsb = module.rep(&uq.antipode_inv_mono_elem(key[1]))?;
            for (i, row) in lt_minus.iter_mut().enumerate() {
                for (k, e) in row.iter_mut().enumerate() {
                    let x = rsb.get(i, k);
                    if !x.is_zero() {
                        e.add_term(key[0], &(x * c));
                    }
                }
            }
        }
        let c_plus = try_block(d, &zero, &one, |i, j| tilde_product_entry(uq, &l.plus, &l.plus, i, j))?;
        let c_minus = try_block(d, &zero, &one, |i, j| tilde_product_entry(uq, &l.minus, &lt_minus, i, j))?;
        let v_rep = module.rep(&rb.v)?.with_bases("", "");
        let pivot = module.rep(&uq.pivot())?.with_bases("", "");
        Ok(HandleOps { p: uq.p, module: module.clone(), l, a, a_inv, b, b_inv, c_plus, c_minus, v_rep, pivot })
    }

    pub fn fundamental(uq: &Uq, rb: &Ribbon) -> Result<Self> {
        Self::new(uq, rb, &build_module(uq, &ModuleSpec::fundamental())?)
    }

    pub fn letter(&self, l: Letter) -> &BlockOp<ExactMatrix> {
        match l {
            Letter::A => &self.a,
            Letter::B => &self.b,
            Letter::AInv => &self.a_inv,
            Letter::BInv => &self.b_inv,
        }
    }

    /// The L_{1,0} generator entry as an operator on H*.
    pub fn l10_op(&self, l: Letter, i: usize, j: usize) -> HdOperator {
        HdOperator::new(self.p, 1, self.letter(l).get(i, j).clone())
    }

    /// C = v² B A⁻¹ B⁻¹ A.
    pub fn c_matrix(&self) -> BlockOp<ExactMatrix> {
        let v2 = self.v_rep.compose(&self.v_rep).expect("square");
        self.b.mul(&self.a_inv).mul(&self.b_inv).mul(&self.a).lmul_scalar(&v2)
    }

    /// C^{(+)} (C^{(−)})⁻¹.
    pub fn c_from_c_pm(&self) -> Result<BlockOp<ExactMatrix>> {
        Ok(self.c_plus.mul(&self.c_minus.inverse()?))
    }
}

fn try_block(
    n: usize,
    zero: &ExactMatrix,
    one: &ExactMatrix,
    mut f: impl FnMut(usize, usize) -> Result<ExactMatrix>,
) -> Result<BlockOp<ExactMatrix>> {
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push(f(i, j)?);
        }
    }
    Ok(BlockOp { n, entries, zero: zero.clone(), one: one.clone() })
}

/// Outcome of the single-handle relation checks (I = J = the fundamental module).
#[derive(Clone, Debug, Serialize)]
pub struct HandleRelations {
    pub inverses: bool,
    pub fusion_a: bool,
    pub fusion_b: bool,
    pub exchange: bool,
    pub c_two_routes: bool,
}

impl HandleRelations {
    pub fn all(&self) -> bool {
        self.inverses && self.fusion_a && self.fusion_b && self.exchange && self.c_two_routes
    }
}

/// R and R′ evaluated on I ⊗ J.
pub fn r_matrices(uq: &Uq, rb: &Ribbon, i: &Module, j: &Module) -> Result<(ExactMatrix, ExactMatrix)> {
    Ok((rep_tensor(&rb.r, i, j)?, rep_tensor(&uq.flip(&rb.r), i, j)?))
}

/// `single` on I, `pair` on I ⊗ I.
pub fn check_handle_relations(uq: &Uq, rb: &Ribbon, single: &HandleOps, pair: &HandleOps) -> Result<HandleRelations> {
    let d = single.module.dim;
    let (r12, r21) = r_matrices(uq, rb, &single.module, &single.module)?;
    let r12_inv = r12.inverse()?;
    let r21_inv = r21.inverse()?;
    let inverses = single.a.mul(&single.a_inv).is_identity()
        && single.a_inv.mul(&single.a).is_identity()
        && single.b.mul(&single.b_inv).is_identity()
        && single.b_inv.mul(&single.b).is_identity();
    let fusion = |u: &BlockOp<ExactMatrix>, u12: &BlockOp<ExactMatrix>| {
        let rhs = u.tensor_left(d).rmul_scalar(&r21).mul(&u.tensor_right(d)).rmul_scalar(&r21_inv);
        u12.equals(&rhs)
    };
    let fusion_a = fusion(&single.a, &pair.a);
    let fusion_b = fusion(&single.b, &pair.b);
    let b1 = single.b.tensor_left(d);
    let a2 = single.a.tensor_right(d);
    let lhs = b1.lmul_scalar(&r12).rmul_scalar(&r21).mul(&a2);
    let rhs = a2.mul(&b1.lmul_scalar(&r12).rmul_scalar(&r12_inv));
    let exchange = lhs.equals(&rhs);
    let c_two_routes = single.c_matrix().equals(&single.c_from_c_pm()?);
    Ok(HandleRelations { inverses, fusion_a, fusion_b, exchange, c_two_routes })
}

/// Common kernel of C_{ij} − δ_{ij} id over all entries, as vectors of values on the PBW basis.
pub fn c_fixed_space(c: &BlockOp<ExactMatrix>) -> Vec<Vec<CycNum>> {
    let one = c.one_elem();
    let (p, dd) = (one.p(), one.rows());
    let mut rows: Vec<Vec<CycNum>> = Vec::new();
    for i in 0..c.n {
        for j in 0..c.n {
            let m = if i == j { c.get(i, j).sub(one) } else { c.get(i, j).clone() };
            for r in 0..dd {
                if m.row(r).iter().any(|x| !x.is_zero()) {
                    rows.push(m.row(r).to_vec());
                }
            }
        }
    }
    if rows.is_empty() {
        return (0..dd).map(|k| (0..dd).map(|l| if k == l { CycNum::one(p) } else { CycNum::zero(p) }).collect()).collect();
    }
    ExactMatrix::from_rows(p, dd, &rows).kernel()
}

/// Rank of the operator images of b₁^i c₁^j d₁^k b₂^l c₂^m d₂^n (i,j,l,m ∈ {0,1}, k,n < 4),
/// with A = (a₁ b₁; c₁ d₁) and B = (a₂ b₂; c₂ d₂) on the fundamental module at p = 2.
pub fn faithfulness_rank(h: &HandleOps) -> Result<usize> {
    if h.p != 2 || h.module.dim != 2 {
        return Err(Error::Rejected("the monomial basis is stated for p = 2 and the fundamental module".into()));
    }
    let pw = |m: &ExactMatrix, e: usize| -> ExactMatrix {
        let mut acc = ExactMatrix::identity_in(m.p(), m.rows(), &m.row_basis);
        for _ in 0..e {
            acc = acc.compose(m).expect("square");
        }
        acc
    };
    let gens = [h.a.get(0, 1), h.a.get(1, 0), h.a.get(1, 1), h.b.get(0, 1), h.b.get(1, 0), h.b.get(1, 1)];
    let caps = [2usize, 2, 4, 2, 2, 4];
    let powers: Vec<Vec<ExactMatrix>> = gens.iter().zip(caps).map(|(g, c)| (0..c).map(|e| pw(g, e)).collect()).collect();
    let mut rows = Vec::new();
    let mut idx = [0usize; 6];
    loop {
        let mut m = powers[0][idx[0]].clone();
        for f in 1..6 {
            m = m.compose(&powers[f][idx[f]])?;
        }
        rows.push(m.entries().to_vec());
        let mut f = 5;
        loop {
            idx[f] += 1;
            if idx[f] < caps[f] {
                break;
            }
            idx[f] = 0;
            if f == 0 {
                break;
            }
            f -= 1;
        }
        if idx.iter().all(|&x| x == 0) {
            break;
        }
    }
    let n = rows[0].len();
    let img = crate::linalg::ModularImage::new(h.p, 0);
    if img.rank_rows(&rows) == Some(rows.len().min(n)) {
        return Ok(rows.len().min(n));
    }
    Ok(ExactMatrix::from_rows(h.p, n, &rows).rank())
}

// ---------- central elements z_A, z_B, z_{vB⁻¹A} ----------

/// The three operators attached to a central z, on SLF in GTA coordinates (column j is the
/// image of the j-th GTA form).
#[derive(Clone, Debug, Serialize)]
pub struct ZOps {
    pub z_a: ExactMatrix,
    pub z_b: ExactMatrix,
    pub z_vbinva: ExactMatrix,
}

/// ψ ↦ ψ^a = ψ(a?).
pub fn right_action(uq: &Uq, psi: &DualForm, a: &AlgElem) -> DualForm {
    uq.sandwich(psi, a, &uq.one())
}

/// z_B ▷ ψ = (D⁻¹(z) ψ^v)^{v⁻¹}.
pub fn z_b_apply(uq: &Uq, rb: &Ribbon, dz: &DualForm, psi: &DualForm) -> DualForm {
    right_action(uq, &uq.dual_product(dz, &right_action(uq, psi, &rb.v)), &rb.v_inv)
}

/// z_B on all of H* by the same formula: L(v⁻¹) ∘ (D⁻¹(z)·) ∘ L(v).
pub fn z_b_full(uq: &Uq, rb: &Ribbon, z: &AlgElem) -> Result<ExactMatrix> {
    let dz = rb.drinfeld_inverse(uq, z)?;
    left_mult_op(uq, &rb.v_inv)?.compose(&dual_mult_op(uq, &dz))?.compose(&left_mult_op(uq, &rb.v)?)
}

/// Restriction to SLF of an operator on H* preserving it, in GTA coordinates.
pub fn slf_restrict(uq: &Uq, gta: &Gta, op: &ExactMatrix) -> Result<ExactMatrix> {
    slf_matrix(uq, gta, |phi| apply_op(op, phi))
}

fn slf_matrix(uq: &Uq, gta: &Gta, f: impl Fn(&DualForm) -> DualForm) -> Result<ExactMatrix> {
    let n = gta.forms.len();
    let cols = gta.forms.iter().map(|phi| Ok(gta.coords(uq, &f(phi))?.0)).collect::<Result<Vec<_>>>()?;
    Ok(ExactMatrix::from_columns(uq.p, n, &cols))
}

pub fn z_ops(uq: &Uq, rb: &Ribbon, center: &Center, gta: &Gta, z: &CenterVec) -> Result<ZOps> {
    z_ops_elem(uq, rb, center, gta, &center.basis.combine(z))
}

/// Non-central input is rejected.
pub fn z_ops_elem(uq: &Uq, rb: &Ribbon, center: &Center, gta: &Gta, z: &AlgElem) -> Result<ZOps> {
    center.coords(uq, z)?;
    let dz = rb.drinfeld_inverse(uq, z)?;
    let one = uq.one();
    Ok(ZOps {
        z_a: slf_matrix(uq, gta, |psi| uq.sandwich(psi, z, &one))?,
        z_b: slf_matrix(uq, gta, |psi| z_b_apply(uq, rb, &dz, psi))?,
        z_vbinva: slf_matrix(uq, gta, |psi| uq.dual_product(&dz, psi))?,
    })
}

/// Σ_{ij} N_{ij} B_{ji} = tr(N B) on a lifted module.
pub fn traced_b(uq: &Uq, module: &Module, l: &LMatrices, n: &ExactMatrix) -> Result<ExactMatrix> {
    let reps = basis_reps(uq, module, false)?;
    let mut acc = op_zero(uq);
    for i in 0..module.dim {
        for j in 0..module.dim {
            let c = n.get(i, j);
            if !c.is_zero() {
                acc = acc.add(&lt_entry(uq, module, &reps, &l.plus, &l.minus_inv, false, j, i)?.scale(c));
            }
        }
    }
    Ok(acc)
}

/// z_B built from B-matrices: with D⁻¹(z) = Σ tr(Λ_I T^I) in the GTA basis,
/// z_B = Σ tr(Λ_I g B^I), using lifted simple and projective modules.
pub fn z_b_by_traces(uq: &Uq, rb: &Ribbon, gta: &Gta, z: &AlgElem) -> Result<ExactMatrix> {
    let p = uq.p;
    let coords = gta.coords(uq, &rb.drinfeld_inverse(uq, z)?)?;
    let mut acc = op_zero(uq);
    let add_module = |spec: ModuleSpec, lam: ExactMatrix, c: &CycNum, acc: &mut ExactMatrix| -> Result<()> {
        let m = build_module(uq, &spec.lifted(1))?;
        let l = l_matrices(uq, &rb.r, &m)?;
        let g = m.rep(&rb.g)?.with_bases("", "");
        let t = traced_b(uq, &m, &l, &lam.compose(&g)?)?;
        *acc = acc.add(&t.scale(c));
        Ok(())
    };
    for (idx, c) in coords.0.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if idx < 2 * p {
            let (a, s) = if idx < p { (Sign::Plus, idx + 1) } else { (Sign::Minus, idx - p + 1) };
            add_module(ModuleSpec::simple(a, s), ExactMatrix::identity(p, s), c, &mut acc)?;
        } else {
            let s = idx - 2 * p + 1;
            add_module(ModuleSpec::proj(Sign::Plus, s), sigma_matrix(p, s), c, &mut acc)?;
            add_module(ModuleSpec::proj(Sign::Minus, p - s), sigma_matrix(p, p - s), c, &mut acc)?;
        }
    }
    Ok(acc)
}

/// v_A⁻¹ ∘ B_{ij} ∘ v_A = v⁻¹ Σ_k B_{ik} A_{kj} on the fundamental module.
pub fn conjugation_law_holds(uq: &Uq, rb: &Ribbon, h: &HandleOps) -> Result<bool> {
    let va = right_mult_op(uq, &rb.v)?;
    let va_inv = right_mult_op(uq, &rb.v_inv)?;
    let ba = h.b.mul(&h.a).lmul_scalar(&h.v_rep.inverse()?);
    for i in 0..h.module.dim {
        for j in 0..h.module.dim {
            if va_inv.compose(h.b.get(i, j))?.compose(&va)? != *ba.get(i, j) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// (v_A⁻¹ v_B⁻¹ v_A⁻¹)² on SLF compared with (μ^l(v⁻¹)/μ^l(v))·S.
pub fn omega_square_law(uq: &Uq, rb: &Ribbon, center: &Center, gta: &Gta) -> Result<bool> {
    let zv = z_ops_elem(uq, rb, center, gta, &rb.v_inv)?;
    let w = zv.z_a.compose(&zv.z_b)?.compose(&zv.z_a)?;
    let w2 = w.compose(&w)?;
    let s = slf_matrix(uq, gta, |psi| uq.dual_antipode(psi))?;
    Ok(w2 == s.scale(&rb.modular_scalar(uq)?))
}

// ---------- invariants of (H*)^{⊗g} ----------

/// h^{(1)} ⊗ … ⊗ h^{(n)} as a list of legs.
pub fn iterated_coproduct(uq: &Uq, h: &AlgElem, n: usize) -> Vec<(Vec<PbwMonomial>, CycNum)> {
    let mut cur: Vec<(Vec<PbwMonomial>, CycNum)> = h.terms.iter().map(|(k, c)| (vec![*k], c.clone())).collect();
    for _ in 1..n {
        let mut next = Vec::new();
        for (legs, c) in &cur {
            let last = *legs.last().unwrap();
            for (key, c2) in &uq.coproduct(&mono_elem(uq, last)).terms {
                let mut l = legs[..legs.len() - 1].to_vec();
                l.push(key[0]);
                l.push(key[1]);
                next.push((l, c * c2));
            }
        }
        cur = next;
    }
    cur
}

/// h·(φ₁⊗…⊗φ_g) = φ₁(S⁻¹(h^{(2g−1)})?h^{(2g)}) ⊗ … ⊗ φ_g(S⁻¹(h^{(1)})?h^{(2)}).
pub fn action_h_op(uq: &Uq, h: &AlgElem, g: usize) -> Result<KronOp> {
    let mut terms = Vec::new();
    for (legs, c) in iterated_coproduct(uq, h, 2 * g) {
        let mut t = Vec::with_capacity(g);
        for i in 0..g {
            let a = 2 * (g - 1 - i);
            let m = sandwich_op(uq, &uq.antipode_inv_mono_elem(legs[a]), &mono_elem(uq, legs[a + 1]))?;
            t.push(if i == 0 { m.scale(&c) } else { m });
        }
        terms.push(t);
    }
    Ok(KronOp::from_terms(uq.p, uq.dim(), g, terms))
}

pub fn guard(uq: &Uq, g: usize, max_dim: usize) -> Result<usize> {
    let n = uq.dim().checked_pow(g as u32).unwrap_or(usize::MAX);
    if n > max_dim {
        return Err(Error::Guard(format!("dim (H*)^⊗{g} = {n} exceeds {max_dim}")));
    }
    Ok(n)
}

/// Basis of Inv((H*)^{⊗g}) = {v : h·v = ε(h)v for h ∈ {E, F, K}}.
pub fn inv_subspace(uq: &Uq, g: usize, max_dim: usize) -> Result<Vec<Vec<CycNum>>> {
    let p = uq.p;
    if g == 0 {
        return Ok(vec![vec![CycNum::one(p)]]);
    }
    let n = guard(uq, g, max_dim)?;
    let kop = action_h_op(uq, &uq.k(1), g)?.to_dense();
    // K acts diagonally; its fixed vectors are the weight-zero basis vectors
    let cols: Vec<usize> = (0..n).filter(|&j| kop.get(j, j).is_one()).collect();
    let mut rows: Vec<Vec<CycNum>> = Vec::new();
    for h in [uq.e(), uq.f()] {
        let op = action_h_op(uq, &h, g)?.to_dense();
        for r in 0..n {
            let row: Vec<CycNum> = cols.iter().map(|&c| op.get(r, c).clone()).collect();
            if row.iter().any(|x| !x.is_zero()) {
                rows.push(row);
            }
        }
    }
    let ker = if rows.is_empty() {
        (0..cols.len()).map(|k| (0..cols.len()).map(|l| if k == l { CycNum::one(p) } else { CycNum::zero(p) }).collect()).collect()
    } else {
        ExactMatrix::from_rows(p, cols.len(), &rows).kernel()
    };
    Ok(ker
        .into_iter()
        .map(|v| {
            let mut full = vec![CycNum::zero(p); n];
            for (x, &c) in v.into_iter().zip(&cols) {
                full[c] = x;
            }
            full
        })
        .collect())
}

// ---------- genus g ----------

fn embed_block(b: &BlockOp<ExactMatrix>, g: usize, i: usize) -> BlockOp<KronOp> {
    let one = b.one_elem();
    let (p, d) = (one.p(), one.rows());
    b.map(KronOp::zero(p, d, g), KronOp::identity(p, d, g), |m| KronOp::local(g, i, m))
}

/// Images of A(i), B(i), their inverses and C(i) in End((H*)^{⊗g}), i = 1..g, obtained by
/// conjugating the factor-wise operators by Λ_i = C^{(−)}(1)…C^{(−)}(i−1).
pub struct GenusOps {
    pub p: usize,
    pub g: usize,
    pub a: Vec<BlockOp<KronOp>>,
    pub b: Vec<BlockOp<KronOp>>,
    pub a_inv: Vec<BlockOp<KronOp>>,
    pub b_inv: Vec<BlockOp<KronOp>>,
    pub c: Vec<BlockOp<KronOp>>,
    pub v_rep: ExactMatrix,
    pub pivot: ExactMatrix,
}

impl GenusOps {
    pub fn new(uq: &Uq, h: &HandleOps, g: usize, max_dim: usize) -> Result<Self> {
        if g == 0 {
            return Err(Error::Rejected("genus must be positive".into()));
        }
        guard(uq, g, max_dim)?;
        let cm_inv = h.c_minus.inverse()?;
        let c = h.c_matrix();
        let n = h.module.dim;
        let id = BlockOp::identity(n, KronOp::zero(uq.p, uq.dim(), g), KronOp::identity(uq.p, uq.dim(), g));
        let (mut lam, mut lam_inv) = (id.clone(), id);
        let mut out =
            GenusOps { p: uq.p, g, a: vec![], b: vec![], a_inv: vec![], b_inv: vec![], c: vec![], v_rep: h.v_rep.clone(), pivot: h.pivot.clone() };
        for i in 0..g {
            let conj = |x: &BlockOp<ExactMatrix>| lam.mul(&embed_block(x, g, i)).mul(&lam_inv);
            out.a.push(conj(&h.a));
            out.b.push(conj(&h.b));
            out.a_inv.push(conj(&h.a_inv));
            out.b_inv.push(conj(&h.b_inv));
            out.c.push(conj(&c));
            lam = lam.mul(&embed_block(&h.c_minus, g, i));
            lam_inv = embed_block(&cm_inv, g, i).mul(&lam_inv);
        }
        Ok(out)
    }

    pub fn letter(&self, i: usize, l: Letter) -> &BlockOp<KronOp> {
        match l {
            Letter::A => &self.a[i],
            Letter::B => &self.b[i],
            Letter::AInv => &self.a_inv[i],
            Letter::BInv => &self.b_inv[i],
        }
    }

    /// Entry (r,c) of the image of `l`(i) (1-based handle index) as a dense operator.
    pub fn lgn_op(&self, i: usize, l: Letter, r: usize, c: usize) -> Result<HdOperator> {
        if i == 0 || i > self.g {
            return Err(Error::Rejected(format!("handle index {i} outside 1..={}", self.g)));
        }
        Ok(HdOperator::new(self.p, self.g, self.letter(i - 1, l).get(r, c).to_dense()))
    }

    /// C_{g,0} = C(1)…C(g).
    pub fn boundary(&self) -> BlockOp<KronOp> {
        let mut acc = self.c[0].clone();
        for c in &self.c[1..] {
            acc = acc.mul(c);
        }
        acc
    }
}

/// Whether a block operator acts as the identity matrix on each given vector.
pub fn acts_as_identity(x: &BlockOp<KronOp>, vecs: &[Vec<CycNum>]) -> bool {
    let p = x.one_elem().p;
    vecs.iter().all(|v| {
        (0..x.n).all(|j| {
            let mut input = vec![vec![CycNum::zero(p); v.len()]; x.n];
            input[j] = v.clone();
            let out = block_apply(x, &input);
            out.iter().enumerate().all(|(i, o)| if i == j { o == v } else { o.iter().all(|c| c.is_zero()) })
        })
    })
}

/// Outcome of the defining relations of L_{g,0} (I = J = the fundamental module).
#[derive(Clone, Debug, Serialize)]
pub struct GenusRelations {
    pub fusion: bool,
    pub braided_exchange: bool,
    pub handle_exchange: bool,
}

impl GenusRelations {
    pub fn all(&self) -> bool {
        self.fusion && self.braided_exchange && self.handle_exchange
    }
}

fn scalar_kron(m: &ExactMatrix) -> ExactMatrix {
    m.clone().with_bases("", "")
}

pub fn check_genus_relations(uq: &Uq, rb: &Ribbon, single: &GenusOps, pair: &GenusOps, fund: &Module) -> Result<GenusRelations> {
    let d = fund.dim;
    let (r12, r21) = r_matrices(uq, rb, fund, fund)?;
    let (r12, r21) = (scalar_kron(&r12), scalar_kron(&r21));
    let r12_inv = r12.inverse()?;
    let r21_inv = r21.inverse()?;
    let g = single.g;
    let mut fusion = true;
    for i in 0..g {
        for l in [Letter::A, Letter::B] {
            let u = single.letter(i, l);
            let rhs = u.tensor_left(d).rmul_scalar(&r21).mul(&u.tensor_right(d)).rmul_scalar(&r21_inv);
            fusion &= pair.letter(i, l).equals(&rhs);
        }
    }
    let mut braided_exchange = true;
    for i in 0..g {
        for j in i + 1..g {
            for lu in [Letter::A, Letter::B] {
                for lv in [Letter::A, Letter::B] {
                    let u1 = single.letter(i, lu).tensor_left(d).lmul_scalar(&r12).rmul_scalar(&r12_inv);
                    let v2 = single.letter(j, lv).tensor_right(d);
                    braided_exchange &= u1.mul(&v2).equals(&v2.mul(&u1));
                }
            }
        }
    }
    let mut handle_exchange = true;
    for i in 0..g {
        let b1 = single.b[i].tensor_left(d);
        let a2 = single.a[i].tensor_right(d);
        let lhs = b1.lmul_scalar(&r12).rmul_scalar(&r21).mul(&a2);
        let rhs = a2.mul(&b1.lmul_scalar(&r12).rmul_scalar(&r12_inv));
        handle_exchange &= lhs.equals(&rhs);
    }
    Ok(GenusRelations { fusion, braided_exchange, handle_exchange })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center_slf::Center;

    fn setup(p: usize) -> (Uq, Ribbon) {
        let uq = Uq::new(p);
        let center = Center::new(&uq).unwrap();
        let rb = Ribbon::new(&uq, &center, false).unwrap();
        (uq, rb)
    }

    #[test]
    fn heisenberg_trivial_actions() {
        let (uq, _) = setup(2);
        let eps = uq.counit_form();
        let phi = uq.integral_right_form();
        assert_eq!(heis_apply(&uq, &eps, &uq.one(), &phi).unwrap(), phi);
        assert_eq!(heis_apply(&uq, &eps, &uq.k(1), &eps).unwrap(), eps);
    }

    #[test]
    fn l_matrices_are_inverse() {
        let (uq, rb) = setup(2);
        let m = build_module(&uq, &ModuleSpec::fundamental()).unwrap();
        let l = l_matrices(&uq, &rb.r, &m).unwrap();
        assert!(alg_is_identity(&uq, &alg_matmul(&uq, &l.plus, &l.plus_inv)));
        assert!(alg_is_identity(&uq, &alg_matmul(&uq, &l.minus, &l.minus_inv)));
        let mm = matrix_of_tensor(&m, &rb.m).unwrap();
        assert_eq!(alg_matmul(&uq, &l.plus, &l.minus_inv), mm);
    }

    #[test]
    fn handle_relations_p2() {
        let (uq, rb) = setup(2);
        let h = HandleOps::fundamental(&uq, &rb).unwrap();
        let pair_mod = build_module(&uq, &ModuleSpec::tensor(vec![ModuleSpec::fundamental(), ModuleSpec::fundamental()])).unwrap();
        let pair = HandleOps::new(&uq, &rb, &pair_mod).unwrap();
        let rel = check_handle_relations(&uq, &rb, &h, &pair).unwrap();
        assert!(rel.all(), "{rel:?}");
        assert_eq!(c_fixed_space(&h.c_matrix()).len(), 5);
        assert_eq!(faithfulness_rank(&h).unwrap(), 256);
    }

    fn same_span(p: usize, a: &[Vec<CycNum>], b: &[Vec<CycNum>]) -> bool {
        let mut all = a.to_vec();
        all.extend(b.iter().cloned());
        crate::linalg::span_dim(p, a) == crate::linalg::span_dim(p, b) && crate::linalg::span_dim(p, &all) == crate::linalg::span_dim(p, a)
    }

    #[test]
    fn c_fixed_space_is_slf() {
        for p in [2, 3] {
            let (uq, rb) = setup(p);
            let center = Center::new(&uq).unwrap();
            let gta = Gta::new(&uq, &center).unwrap();
            let h = HandleOps::fundamental(&uq, &rb).unwrap();
            let ker = c_fixed_space(&h.c_matrix());
            assert_eq!(ker.len(), 3 * p - 1);
            let forms: Vec<Vec<CycNum>> = gta.forms.iter().map(|f| f.values.clone()).collect();
            assert!(same_span(p, &ker, &forms));
            assert!(same_span(p, &inv_subspace(&uq, 1, DEFAULT_MAX_DIM).unwrap(), &forms));
        }
    }

    #[test]
    fn z_ops_on_gta_basis() {
        let p = 3;
        let (uq, rb) = setup(p);
        let center = Center::new(&uq).unwrap();
        let gta = Gta::new(&uq, &center).unwrap();
        use crate::center_slf::{chi_plus, e_index, g_index, wp_index};
        for s in 1..=p {
            let z = z_ops(&uq, &rb, &center, &gta, &CenterVec(unit(p, e_index(s)))).unwrap();
            for t in 1..=p {
                let col = z.z_a.column(chi_plus(t));
                let want = if s == t { unit(p, chi_plus(t)) } else { vec![CycNum::zero(p); 3 * p - 1] };
                assert_eq!(col, want);
            }
        }
        for s in 1..p {
            let z = z_ops(&uq, &rb, &center, &gta, &CenterVec(unit(p, wp_index(p, s)))).unwrap();
            for t in 1..p {
                let col = z.z_a.column(g_index(p, t));
                let want = if s == t { unit(p, chi_plus(s)) } else { vec![CycNum::zero(p); 3 * p - 1] };
                assert_eq!(col, want);
            }
        }
        assert!(z_ops_elem(&uq, &rb, &center, &gta, &uq.e()).is_err());
    }

    fn unit(p: usize, i: usize) -> Vec<CycNum> {
        let mut v = vec![CycNum::zero(p); 3 * p - 1];
        v[i] = CycNum::one(p);
        v
    }

    #[test]
    fn z_b_two_routes() {
        for p in [2, 3] {
            let (uq, rb) = setup(p);
            let center = Center::new(&uq).unwrap();
            let gta = Gta::new(&uq, &center).unwrap();
            for z in [rb.v_inv.clone(), uq.casimir()] {
                assert_eq!(z_b_by_traces(&uq, &rb, &gta, &z).unwrap(), z_b_full(&uq, &rb, &z).unwrap(), "p={p}");
            }
        }
    }

    #[test]
    fn v_b_inverse_on_counit() {
        let (uq, rb) = setup(2);
        let eps = uq.counit_form();
        let dz = rb.drinfeld_inverse(&uq, &rb.v_inv).unwrap();
        let lhs = z_b_apply(&uq, &rb, &dz, &eps);
        let rhs = right_action(&uq, &rb.phi_v(&uq, true).unwrap(), &rb.v_inv);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn conjugation_and_omega_laws() {
        for p in [2, 3] {
            let (uq, rb) = setup(p);
            let center = Center::new(&uq).unwrap();
            let gta = Gta::new(&uq, &center).unwrap();
            let h = HandleOps::fundamental(&uq, &rb).unwrap();
            assert!(conjugation_law_holds(&uq, &rb, &h).unwrap());
            assert!(omega_square_law(&uq, &rb, &center, &gta).unwrap());
        }
    }

    #[test]
    fn genus_one_reduces_to_handle() {
        let (uq, rb) = setup(2);
        let h = HandleOps::fundamental(&uq, &rb).unwrap();
        let g1 = GenusOps::new(&uq, &h, 1, DEFAULT_MAX_DIM).unwrap();
        assert_eq!(g1.lgn_op(1, Letter::B, 0, 1).unwrap().matrix.with_bases("", ""), h.b.get(0, 1).clone().with_bases("", ""));
        assert!(GenusOps::new(&uq, &h, 3, DEFAULT_MAX_DIM).is_err());
        assert_eq!(inv_subspace(&uq, 0, DEFAULT_MAX_DIM).unwrap().len(), 1);
    }

    #[test]
    fn genus_two_relations_p2() {
        let (uq, rb) = setup(2);
        let fund = build_module(&uq, &ModuleSpec::fundamental()).unwrap();
        let pair_mod = build_module(&uq, &ModuleSpec::tensor(vec![ModuleSpec::fundamental(), ModuleSpec::fundamental()])).unwrap();
        let h = HandleOps::new(&uq, &rb, &fund).unwrap();
        let hp = HandleOps::new(&uq, &rb, &pair_mod).unwrap();
        let single = GenusOps::new(&uq, &h, 2, DEFAULT_MAX_DIM).unwrap();
        let pair = GenusOps::new(&uq, &hp, 2, DEFAULT_MAX_DIM).unwrap();
        let rel = check_genus_relations(&uq, &rb, &single, &pair, &fund).unwrap();
        assert!(rel.all(), "{rel:?}");
        let inv = inv_subspace(&uq, 2, DEFAULT_MAX_DIM).unwrap();
        eprintln!("dim Inv((H*)^2) at p=2: {}", inv.len());
        assert!(acts_as_identity(&single.boundary(), &inv));
    }
}
