//! Temperley–Lieb algebras, Jones–Wenzl idempotents, the reduced skein module of the solid
//! torus, and the skein-algebra action on SLF(Ū_q) through W_A and W_B.
//!
//! A TL diagram on n strands is a non-crossing perfect matching of 2n points: 0..n is the
//! top row and n..2n the bottom row, both left to right. Products stack the left factor
//! on top, so xy applies y first. Closed loops are replaced by δ = −(q+q⁻¹) eagerly.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use serde::Serialize;

use crate::center_slf::{chi_minus, chi_plus, g_index, Gta};
use crate::cyclo::{q_int, CycNum};
use crate::error::{Error, Result};
use crate::handle_rep::{inv_subspace, right_action, slf_restrict, GenusOps, HandleOps, KronOp, OpElem};
use crate::linalg::{in_span, span_dim, ExactMatrix};
use crate::loop_wilson::{algebra_membership, loop_boundary, loop_e, loop_s, wilson_op, Gen, LoopLetter, LoopWord};
use crate::mcg_sl2z::x_vector;
use crate::ribbon::{v_value, Ribbon};
use crate::uq_algebra::Uq;
use crate::uq_modules::{build_module, kronecker, Module, ModuleSpec, Sign};

pub type Matching = Vec<usize>;

// ---------- diagrams ----------

/// Position of point i on the boundary circle (top row left to right, then bottom row
/// right to left).
fn boundary_position(n: usize, i: usize) -> usize {
    if i < n {
        i
    } else {
        3 * n - 1 - i
    }
}

/// Whether `m` is a fixed-point-free involution whose chords do not cross.
pub fn is_planar(m: &[usize]) -> bool {
    if m.len() % 2 != 0 {
        return false;
    }
    let n = m.len() / 2;
    if (0..m.len()).any(|i| m[i] >= m.len() || m[i] == i || m[m[i]] != i) {
        return false;
    }
    let chords: Vec<(usize, usize)> = (0..m.len())
        .filter(|&i| i < m[i])
        .map(|i| {
            let (a, b) = (boundary_position(n, i), boundary_position(n, m[i]));
            (a.min(b), a.max(b))
        })
        .collect();
    chords.iter().all(|&(a, b)| chords.iter().all(|&(c, d)| !(a < c && c < b && b < d)))
}

fn nc_pairings(lo: usize, hi: usize) -> Vec<Vec<(usize, usize)>> {
    if lo >= hi {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for k in (lo + 1..hi).step_by(2) {
        for inner in nc_pairings(lo + 1, k) {
            for outer in nc_pairings(k + 1, hi) {
                let mut v = vec![(lo, k)];
                v.extend(inner.iter().copied());
                v.extend(outer.iter().copied());
                out.push(v);
            }
        }
    }
    out
}

/// All TL diagrams on n strands (Catalan many), sorted.
pub fn matchings(n: usize) -> Vec<Matching> {
    let point = |pos: usize| if pos < n { pos } else { 3 * n - 1 - pos };
    let mut out: Vec<Matching> = nc_pairings(0, 2 * n)
        .into_iter()
        .map(|pairs| {
            let mut m = vec![0; 2 * n];
            for (a, b) in pairs {
                let (x, y) = (point(a), point(b));
                m[x] = y;
                m[y] = x;
            }
            m
        })
        .collect();
    out.sort();
    out
}

pub fn identity_matching(n: usize) -> Matching {
    (0..2 * n).map(|i| if i < n { i + n } else { i - n }).collect()
}

/// Gluing graph in which every node has degree one (boundary) or two (interior).
struct Glue {
    adj: Vec<Vec<(usize, usize, i64)>>,
    edges: usize,
}

impl Glue {
    fn new(nodes: usize) -> Self {
        Glue { adj: vec![Vec::new(); nodes], edges: 0 }
    }

    /// Edge a–b; traversing it from a to b adds `w` to the winding.
    fn edge(&mut self, a: usize, b: usize, w: i64) {
        self.adj[a].push((self.edges, b, w));
        self.adj[b].push((self.edges, a, -w));
        self.edges += 1;
    }

    /// The partner of each boundary node and the winding of each closed loop.
    fn trace(&self) -> (Vec<Option<usize>>, Vec<i64>) {
        let n = self.adj.len();
        let mut seen = vec![false; n];
        let mut partner = vec![None; n];
        let step = |node: usize, from: Option<usize>| self.adj[node].iter().find(|e| Some(e.0) != from).copied();
        for s in 0..n {
            if self.adj[s].len() != 1 || seen[s] {
                continue;
            }
            let (mut cur, mut from) = (s, None);
            seen[s] = true;
            while let Some((id, next, _)) = step(cur, from) {
                seen[next] = true;
                cur = next;
                from = Some(id);
                if self.adj[cur].len() == 1 {
                    break;
                }
            }
            partner[s] = Some(cur);
            partner[cur] = Some(s);
        }
        let mut loops = Vec::new();
        for s in 0..n {
            if seen[s] || self.adj[s].is_empty() {
                continue;
            }
            let (mut cur, mut from, mut wind) = (s, None, 0);
            loop {
                seen[cur] = true;
                let (id, next, w) = step(cur, from).expect("interior nodes have degree two");
                wind += w;
                cur = next;
                from = Some(id);
                if cur == s {
                    break;
                }
            }
            loops.push(wind);
        }
        (partner, loops)
    }
}

/// x above y: the top of y is glued to the bottom of x. Returns the diagram and the number
/// of closed loops.
fn compose_diagrams(n: usize, x: &[usize], y: &[usize]) -> (Matching, usize) {
    let mut g = Glue::new(3 * n);
    for i in 0..2 * n {
        if i < x[i] {
            g.edge(i, x[i], 0);
        }
        if i < y[i] {
            g.edge(i + n, y[i] + n, 0);
        }
    }
    let (partner, loops) = g.trace();
    let back = |u: usize| if u < n { u } else { u - n };
    let m = (0..2 * n).map(|i| back(partner[if i < n { i } else { i + n }].expect("boundary node"))).collect();
    (m, loops.len())
}

fn tensor_diagrams(x: &[usize], y: &[usize]) -> Matching {
    let (n1, n2) = (x.len() / 2, y.len() / 2);
    let n = n1 + n2;
    let mx = |i: usize| if i < n1 { i } else { n + i - n1 };
    let my = |i: usize| if i < n2 { n1 + i } else { n + n1 + i - n2 };
    let mut m = vec![0; 2 * n];
    for i in 0..2 * n1 {
        m[mx(i)] = mx(x[i]);
    }
    for i in 0..2 * n2 {
        m[my(i)] = my(y[i]);
    }
    m
}

/// Annular closure of one diagram: (number of essential circles, number of trivial circles).
fn annular_closure(x: &[usize]) -> (usize, usize) {
    let n = x.len() / 2;
    let mut g = Glue::new(2 * n);
    for i in 0..2 * n {
        if i < x[i] {
            g.edge(i, x[i], 0);
        }
    }
    for i in 0..n {
        g.edge(i, i + n, -1);
    }
    let (_, loops) = g.trace();
    debug_assert!(loops.iter().all(|w| w.abs() <= 1));
    let ess = loops.iter().filter(|&&w| w != 0).count();
    (ess, loops.len() - ess)
}

/// Planar closure of the rightmost strand: TL_{n+1} → TL_n.
fn partial_trace_diagram(x: &[usize]) -> (Matching, usize) {
    let n1 = x.len() / 2;
    let n = n1 - 1;
    let mut g = Glue::new(2 * n1);
    for i in 0..2 * n1 {
        if i < x[i] {
            g.edge(i, x[i], 0);
        }
    }
    g.edge(n, n1 + n, 0);
    let (partner, loops) = g.trace();
    let to_old = |i: usize| if i < n { i } else { i + 1 };
    let to_new = |u: usize| if u < n { u } else { u - 1 };
    let m = (0..2 * n).map(|i| to_new(partner[to_old(i)].expect("boundary node"))).collect();
    (m, loops.len())
}

// ---------- the algebra ----------

/// Formal combination of TL diagrams on `n` strands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TlElem {
    pub p: usize,
    pub n: usize,
    pub terms: BTreeMap<Matching, CycNum>,
}

impl TlElem {
    pub fn zero(p: usize, n: usize) -> Self {
        TlElem { p, n, terms: BTreeMap::new() }
    }

    pub fn diagram(p: usize, m: Matching) -> Self {
        let n = m.len() / 2;
        let mut terms = BTreeMap::new();
        terms.insert(m, CycNum::one(p));
        TlElem { p, n, terms }
    }

    pub fn identity(p: usize, n: usize) -> Self {
        Self::diagram(p, identity_matching(n))
    }

    /// e_k (1 ≤ k < n): cap and cup joining strands k and k+1.
    pub fn generator(p: usize, n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::Rejected(format!("e_{k} does not exist on {n} strands")));
        }
        let mut m = identity_matching(n);
        let (a, b) = (k - 1, k);
        m[a] = b;
        m[b] = a;
        m[n + a] = n + b;
        m[n + b] = n + a;
        Ok(Self::diagram(p, m))
    }

    pub fn add_term(&mut self, m: Matching, c: &CycNum) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, o: &TlElem) -> TlElem {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, o: &TlElem) -> TlElem {
        self.add(&o.scale(&CycNum::from_i64(self.p, -1)))
    }

    pub fn scale(&self, c: &CycNum) -> TlElem {
        let mut out = TlElem::zero(self.p, self.n);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), &(v * c));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &[usize]) -> CycNum {
        self.terms.get(m).cloned().unwrap_or_else(|| CycNum::zero(self.p))
    }
}

/// TL algebras at q = e^{iπ/p} with Kauffman variable A = q^{1/2} = ζ.
pub struct Tl {
    pub p: usize,
    /// δ = −(q+q⁻¹).
    pub delta: CycNum,
    pub a: CycNum,
}

impl Tl {
    pub fn new(uq: &Uq) -> Self {
        Tl { p: uq.p, delta: -(uq.q_pow(1) + uq.q_pow(-1)), a: uq.zeta_pow(1).clone() }
    }

    fn delta_pow(&self, k: usize) -> CycNum {
        self.delta.pow(k as u64)
    }

    /// x above y.
    pub fn compose(&self, x: &TlElem, y: &TlElem) -> Result<TlElem> {
        if x.n != y.n {
            return Err(Error::Dimension(format!("TL product of {} and {} strands", x.n, y.n)));
        }
        let mut out = TlElem::zero(self.p, x.n);
        for (mx, cx) in &x.terms {
            for (my, cy) in &y.terms {
                let (m, loops) = compose_diagrams(x.n, mx, my);
                out.add_term(m, &(&(cx * cy) * &self.delta_pow(loops)));
            }
        }
        Ok(out)
    }

    /// x to the left of y.
    pub fn tensor(&self, x: &TlElem, y: &TlElem) -> TlElem {
        let mut out = TlElem::zero(self.p, x.n + y.n);
        for (mx, cx) in &x.terms {
            for (my, cy) in &y.terms {
                out.add_term(tensor_diagrams(mx, my), &(cx * cy));
            }
        }
        out
    }

    /// Annular closure as a polynomial in the core circle z (index = degree).
    pub fn closure(&self, x: &TlElem) -> Vec<CycNum> {
        let mut poly = vec![CycNum::zero(self.p); x.n + 1];
        for (m, c) in &x.terms {
            let (ess, triv) = annular_closure(m);
            poly[ess] += &(c * &self.delta_pow(triv));
        }
        poly
    }

    /// Closes the rightmost strand in the plane.
    pub fn partial_trace(&self, x: &TlElem) -> Result<TlElem> {
        if x.n == 0 {
            return Err(Error::Rejected("partial trace of the empty diagram".into()));
        }
        let mut out = TlElem::zero(self.p, x.n - 1);
        for (m, c) in &x.terms {
            let (d, loops) = partial_trace_diagram(m);
            out.add_term(d, &(c * &self.delta_pow(loops)));
        }
        Ok(out)
    }

    /// σ_k = A·1 + A⁻¹e_k, or its inverse A⁻¹·1 + A e_k.
    pub fn crossing(&self, n: usize, k: usize, inverse: bool) -> Result<TlElem> {
        let a_inv = self.a.inv()?;
        let (c1, ce) = if inverse { (a_inv, self.a.clone()) } else { (self.a.clone(), a_inv) };
        Ok(TlElem::identity(self.p, n).scale(&c1).add(&TlElem::generator(self.p, n, k)?.scale(&ce)))
    }

    /// A circle around n parallel strands: the last strand of σ_n⋯σ_1σ_1⋯σ_n closed off.
    pub fn meridian(&self, n: usize) -> Result<TlElem> {
        let mut acc = TlElem::identity(self.p, n + 1);
        for k in (1..=n).rev().chain(1..=n) {
            acc = self.compose(&acc, &self.crossing(n + 1, k, false)?)?;
        }
        self.partial_trace(&acc)
    }

    /// f_n as the unique element id + (diagrams with a cup) killed by every cap.
    pub fn jones_wenzl(&self, n: usize) -> Result<TlElem> {
        if n >= self.p {
            return Err(Error::Rejected(format!("f_{n} needs n ≤ p−1 = {}", self.p - 1)));
        }
        let id = identity_matching(n);
        let diagrams = matchings(n);
        let unknowns: Vec<&Matching> = diagrams.iter().filter(|m| **m != id).collect();
        if unknowns.is_empty() {
            return Ok(TlElem::identity(self.p, n));
        }
        let row_of: BTreeMap<&Matching, usize> = diagrams.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let d = diagrams.len();
        let mut mat = ExactMatrix::zeros(self.p, d * (n - 1), unknowns.len());
        let mut rhs = vec![CycNum::zero(self.p); d * (n - 1)];
        for k in 1..n {
            let e = TlElem::generator(self.p, n, k)?;
            let off = (k - 1) * d;
            for (m, c) in &self.compose(&e, &TlElem::identity(self.p, n))?.terms {
                rhs[off + row_of[m]] -= c;
            }
            for (j, u) in unknowns.iter().enumerate() {
                for (m, c) in &self.compose(&e, &TlElem::diagram(self.p, (*u).clone()))?.terms {
                    mat.add_at(off + row_of[m], j, c);
                }
            }
        }
        if mat.rank() != unknowns.len() {
            return Err(Error::Consistency(format!("f_{n} is not unique")));
        }
        let sol = mat.solve(&rhs).ok_or_else(|| Error::Consistency(format!("no f_{n}")))?;
        let mut f = TlElem::identity(self.p, n);
        for (u, c) in unknowns.iter().zip(&sol) {
            f.add_term((*u).clone(), c);
        }
        Ok(f)
    }
}

/// Properties of f_n checked directly on diagrams.
#[derive(Clone, Debug, Serialize)]
pub struct JwReport {
    pub n: usize,
    pub terms: usize,
    pub idempotent: bool,
    pub killed_by_caps: bool,
    pub killed_by_cups: bool,
    /// f_n = f_{n−1}⊗1 + [n−1]/[n]·(f_{n−1}⊗1)e_{n−1}(f_{n−1}⊗1).
    pub recursion: Option<bool>,
}

impl JwReport {
    pub fn all(&self) -> bool {
        self.idempotent && self.killed_by_caps && self.killed_by_cups && self.recursion.unwrap_or(true)
    }
}

pub fn jw_report(tl: &Tl, n: usize) -> Result<JwReport> {
    let p = tl.p;
    let f = tl.jones_wenzl(n)?;
    let idempotent = tl.compose(&f, &f)? == f;
    let mut caps = true;
    let mut cups = true;
    for k in 1..n {
        let e = TlElem::generator(p, n, k)?;
        caps &= tl.compose(&e, &f)?.is_zero();
        cups &= tl.compose(&f, &e)?.is_zero();
    }
    let recursion = if n >= 2 {
        let g = tl.tensor(&tl.jones_wenzl(n - 1)?, &TlElem::identity(p, 1));
        let e = TlElem::generator(p, n, n - 1)?;
        let c = q_int(p, n as i64 - 1).checked_div(&q_int(p, n as i64))?;
        let rhs = g.add(&tl.compose(&tl.compose(&g, &e)?, &g)?.scale(&c));
        Some(rhs == f)
    } else {
        None
    };
    Ok(JwReport { n, terms: f.terms.len(), idempotent, killed_by_caps: caps, killed_by_cups: cups, recursion })
}

// ---------- TL_n inside End(X⁺(2)^{⊗n}) ----------

/// Matrices of TL diagrams on X⁺(2)^{⊗n}, with e_1 the rank-one morphism through the
/// trivial summand normalized by e_1² = δe_1.
pub struct TlMatrixRep {
    pub n: usize,
    pub module: Module,
    pub diagrams: BTreeMap<Matching, ExactMatrix>,
}

fn plain(m: ExactMatrix) -> ExactMatrix {
    m.with_bases("", "")
}

fn stack_rows(ms: &[ExactMatrix]) -> ExactMatrix {
    let p = ms[0].p();
    let cols = ms[0].cols();
    let rows: Vec<Vec<CycNum>> = ms.iter().flat_map(|m| (0..m.rows()).map(move |i| m.row(i).to_vec())).collect();
    ExactMatrix::from_rows(p, cols, &rows)
}

impl TlMatrixRep {
    pub fn new(uq: &Uq, tl: &Tl, n: usize) -> Result<Self> {
        let p = uq.p;
        if n < 2 || n >= p {
            return Err(Error::Rejected(format!("matrix realization needs 2 ≤ n ≤ p−1, got n = {n}")));
        }
        let fund = ModuleSpec::simple(Sign::Plus, 2);
        let pair = build_module(uq, &ModuleSpec::tensor(vec![fund.clone(), fund.clone()]))?;
        let id4 = ExactMatrix::identity(p, 4);
        let (e, f, k) = (plain(pair.e.clone()), plain(pair.f.clone()), plain(pair.k.clone()));
        let km = k.sub(&id4);
        let w = stack_rows(&[e.clone(), f.clone(), km.clone()]).kernel();
        let eta = stack_rows(&[e.transpose(), f.transpose(), km.transpose()]).kernel();
        if w.len() != 1 || eta.len() != 1 {
            return Err(Error::Consistency("X⁺(2)⊗X⁺(2) has no unique trivial summand".into()));
        }
        let (w, eta) = (&w[0], &eta[0]);
        let pairing = w.iter().zip(eta).fold(CycNum::zero(p), |acc, (a, b)| &acc + &(a * b));
        let c = tl.delta.checked_div(&pairing)?;
        let e1 = ExactMatrix::from_fn(p, 4, 4, |i, j| &(&w[i] * &eta[j]) * &c);
        let id2 = ExactMatrix::identity(p, 2);
        let kron_chain = |parts: Vec<ExactMatrix>| parts.into_iter().reduce(|a, b| kronecker(&a, &b)).expect("nonempty");
        let gens: Vec<ExactMatrix> = (1..n)
            .map(|k| {
                let mut parts = vec![id2.clone(); k - 1];
                parts.push(e1.clone());
                parts.extend(vec![id2.clone(); n - k - 1]);
                plain(kron_chain(parts))
            })
            .collect();
        let dim = 1usize << n;
        let mut diagrams = BTreeMap::new();
        diagrams.insert(identity_matching(n), ExactMatrix::identity(p, dim));
        let mut frontier = vec![identity_matching(n)];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for m in &frontier {
                for (k, g) in gens.iter().enumerate() {
                    let e = TlElem::generator(p, n, k + 1)?;
                    let prod = tl.compose(&TlElem::diagram(p, m.clone()), &e)?;
                    let (d, c) = prod.terms.iter().next().expect("diagram times generator is a monomial");
                    if c.is_one() && !diagrams.contains_key(d) {
                        let mat = diagrams[m].compose(g)?;
                        diagrams.insert(d.clone(), mat);
                        next.push(d.clone());
                    }
                }
            }
            frontier = next;
        }
        if diagrams.len() != matchings(n).len() {
            return Err(Error::Consistency("generators do not reach every diagram".into()));
        }
        let parts = vec![fund; n];
        let module = build_module(uq, &ModuleSpec::tensor(parts))?;
        Ok(TlMatrixRep { n, module, diagrams })
    }

    pub fn matrix(&self, x: &TlElem) -> ExactMatrix {
        let dim = 1usize << self.n;
        let mut acc = ExactMatrix::zeros(x.p, dim, dim);
        for (m, c) in &x.terms {
            acc = acc.add(&self.diagrams[m].scale(c));
        }
        acc
    }
}

/// Cross-checks of the matrix realization on n strands.
#[derive(Clone, Debug, Serialize)]
pub struct TlMatrixReport {
    pub n: usize,
    pub jones_relations: bool,
    pub multiplicative: bool,
    pub commutes_with_uq: bool,
    pub jw_rank: usize,
}

impl TlMatrixReport {
    pub fn all(&self) -> bool {
        self.jones_relations && self.multiplicative && self.commutes_with_uq && self.jw_rank == self.n + 1
    }
}

pub fn tl_matrix_report(uq: &Uq, tl: &Tl, n: usize) -> Result<TlMatrixReport> {
    let p = uq.p;
    let rep = TlMatrixRep::new(uq, tl, n)?;
    let gens: Vec<TlElem> = (1..n).map(|k| TlElem::generator(p, n, k)).collect::<Result<_>>()?;
    let mats: Vec<ExactMatrix> = gens.iter().map(|g| rep.matrix(g)).collect();
    let mut jones = true;
    for k in 0..mats.len() {
        jones &= mats[k].compose(&mats[k])? == mats[k].scale(&tl.delta);
        if k + 1 < mats.len() {
            jones &= mats[k].compose(&mats[k + 1])?.compose(&mats[k])? == mats[k];
            jones &= mats[k + 1].compose(&mats[k])?.compose(&mats[k + 1])? == mats[k + 1];
        }
    }
    let ds = matchings(n);
    let mut multiplicative = true;
    for x in &ds {
        for y in &ds {
            let (xe, ye) = (TlElem::diagram(p, x.clone()), TlElem::diagram(p, y.clone()));
            multiplicative &= rep.matrix(&tl.compose(&xe, &ye)?) == rep.diagrams[x].compose(&rep.diagrams[y])?;
        }
    }
    let f = rep.matrix(&tl.jones_wenzl(n)?);
    let commutes = |m: &ExactMatrix| -> Result<bool> {
        let a = plain(m.clone());
        Ok(a.compose(&f)? == f.compose(&a)? && mats.iter().try_fold(true, |ok, g| -> Result<bool> { Ok(ok && a.compose(g)? == g.compose(&a)?) })?)
    };
    let commutes_with_uq = commutes(&rep.module.e)? && commutes(&rep.module.f)? && commutes(&rep.module.k)?;
    Ok(TlMatrixReport { n, jones_relations: jones, multiplicative, commutes_with_uq, jw_rank: f.rank() })
}

// ---------- the reduced skein module of the solid torus ----------

/// S^red(H_1) with basis cl(f_0), …, cl(f_{p−2}).
pub struct SkeinTorus {
    pub p: usize,
    pub tl: Tl,
    /// f_0, …, f_{p−1}.
    pub jw: Vec<TlElem>,
    /// cl(f_n) as polynomials in the core circle, n ≤ p−1.
    pub cl_basis: Vec<Vec<CycNum>>,
}

impl SkeinTorus {
    pub fn new(uq: &Uq) -> Result<Self> {
        let tl = Tl::new(uq);
        let jw = (0..uq.p).map(|n| tl.jones_wenzl(n)).collect::<Result<Vec<_>>>()?;
        let cl_basis = jw.iter().map(|f| tl.closure(f)).collect();
        Ok(SkeinTorus { p: uq.p, tl, jw, cl_basis })
    }

    pub fn dim(&self) -> usize {
        self.p - 1
    }

    /// Coordinates of a polynomial in the core circle over cl(f_0..f_{p−2}), dropping the
    /// cl(f_{p−1}) component.
    pub fn coords(&self, poly: &[CycNum]) -> Result<Vec<CycNum>> {
        let top = self.p - 1;
        let mut rest: Vec<CycNum> = poly.to_vec();
        while rest.len() > top + 1 {
            if !rest.last().expect("nonempty").is_zero() {
                return Err(Error::Rejected("class outside the span of cl(f_0..f_{p-1})".into()));
            }
            rest.pop();
        }
        rest.resize(top + 1, CycNum::zero(self.p));
        let mut out = vec![CycNum::zero(self.p); top + 1];
        for d in (0..=top).rev() {
            let lead = self.cl_basis[d][d].clone();
            let c = rest[d].checked_div(&lead)?;
            for (k, b) in self.cl_basis[d].iter().enumerate() {
                rest[k] -= &(&c * b);
            }
            out[d] = c;
        }
        out.pop();
        Ok(out)
    }

    /// ρ(a): the meridian circle around f_n.
    pub fn rho_a(&self) -> Result<ExactMatrix> {
        let cols = (0..self.dim())
            .map(|n| {
                let x = self.tl.compose(&self.jw[n], &self.tl.meridian(n)?)?;
                self.coords(&self.tl.closure(&x))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExactMatrix::from_columns(self.p, self.dim(), &cols))
    }

    /// ρ(b): a parallel copy of the core next to f_n.
    pub fn rho_b(&self) -> Result<ExactMatrix> {
        let cols = (0..self.dim())
            .map(|n| self.coords(&self.tl.closure(&self.tl.tensor(&self.jw[n], &TlElem::identity(self.p, 1)))))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExactMatrix::from_columns(self.p, self.dim(), &cols))
    }
}

/// ρ(a)cl(f_n) = −(q^{n+1}+q^{−(n+1)})cl(f_n).
pub fn rho_a_closed(uq: &Uq) -> ExactMatrix {
    let d = uq.p - 1;
    let mut m = ExactMatrix::zeros(uq.p, d, d);
    for n in 0..d {
        let k = n as i64 + 1;
        m.set(n, n, -(uq.q_pow(k) + uq.q_pow(-k)));
    }
    m
}

/// ρ(b)cl(f_n) = cl(f_{n−1}) + cl(f_{n+1}), truncated at both ends.
pub fn rho_b_closed(p: usize) -> ExactMatrix {
    let d = p - 1;
    ExactMatrix::from_fn(p, d, d, |i, j| if i + 1 == j || j + 1 == i { CycNum::one(p) } else { CycNum::zero(p) })
}

// ---------- W_A and W_B on SLF ----------

/// W_A and W_B on SLF in GTA coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct SlfSkeinOps {
    pub w_a: ExactMatrix,
    pub w_b: ExactMatrix,
}

fn vv(uq: &Uq, plus: bool, s: usize) -> CycNum {
    v_value(uq, plus, s)
}

/// v_s/v_t for the '+' labels, with v_0 = v_{X⁻(p)}.
fn v_ratio(uq: &Uq, s: usize, t: usize) -> CycNum {
    let v = |k: usize| if k == 0 { vv(uq, false, uq.p) } else { vv(uq, true, k) };
    v(s).checked_div(&v(t)).expect("v is invertible")
}

/// The closed formulas on the GTA basis.
pub fn slf_skein_closed(uq: &Uq) -> SlfSkeinOps {
    let p = uq.p;
    let n = 3 * p - 1;
    let qh = uq.qhat();
    let qsum = |s: usize| uq.q_pow(s as i64) + uq.q_pow(-(s as i64));
    let chi = |plus: bool, s: usize| if plus { chi_plus(s) } else { chi_minus(p, s) };
    let mut wa = ExactMatrix::zeros(p, n, n);
    let mut wb = ExactMatrix::zeros(p, n, n);
    for s in 1..=p {
        for plus in [true, false] {
            let col = chi(plus, s);
            let eps = if plus { 1 } else { -1 };
            wa.set(col, col, qsum(s).scale_i64(-eps));
            let v = |k: usize| vv(uq, plus, k);
            let r = |k: usize| v(s).checked_div(&v(k)).expect("v is invertible");
            if s == p {
                let c = r(p - 1).scale_i64(2);
                wb.add_at(chi(plus, p - 1), col, &c);
                wb.add_at(chi(!plus, 1), col, &c);
            } else {
                if s > 1 {
                    wb.add_at(chi(plus, s - 1), col, &r(s - 1));
                }
                wb.add_at(chi(plus, s + 1), col, &r(s + 1));
            }
        }
    }
    for s in 1..p {
        let col = g_index(p, s);
        wa.set(col, col, -qsum(s));
        let xs = x_vector(p, s);
        for (i, c) in xs.iter().enumerate() {
            wa.add_at(i, col, &-(c * &(&qh * &qh)));
        }
        let qs = uq.qint(s as i64);
        let over = |x: CycNum| x.checked_div(&qs).expect("[s] ≠ 0");
        let (lo, hi) = (v_ratio(uq, s, s - 1), v_ratio(uq, s, s + 1));
        if s > 1 {
            wb.add_at(g_index(p, s - 1), col, &over(&lo * &uq.qint(s as i64 - 1)));
        }
        if s + 1 < p {
            wb.add_at(g_index(p, s + 1), col, &over(&hi * &uq.qint(s as i64 + 1)));
        }
        let (clo, chi_) = (over(-(&qh * &lo)), over(&qh * &hi));
        for (i, c) in x_vector(p, s - 1).iter().enumerate() {
            wb.add_at(i, col, &(c * &clo));
        }
        for (i, c) in x_vector(p, s + 1).iter().enumerate() {
            wb.add_at(i, col, &(c * &chi_));
        }
    }
    SlfSkeinOps { w_a: wa, w_b: wb }
}

fn slf_op(uq: &Uq, gta: &Gta, f: impl Fn(&crate::uq_algebra::DualForm) -> crate::uq_algebra::DualForm) -> Result<ExactMatrix> {
    let cols = gta.forms.iter().map(|phi| Ok(gta.coords(uq, &f(phi))?.0)).collect::<Result<Vec<_>>>()?;
    Ok(ExactMatrix::from_columns(uq.p, gta.forms.len(), &cols))
}

/// W_A▷φ = −q̂²φ^C and W_B▷φ = (χ⁺₂φ^v)^{v⁻¹}, computed on forms.
pub fn slf_skein_forms(uq: &Uq, rb: &Ribbon, gta: &Gta) -> Result<SlfSkeinOps> {
    let qh = uq.qhat();
    let c = uq.casimir().scale(&-(&qh * &qh));
    let chi2 = &gta.forms[chi_plus(2)];
    let w_a = slf_op(uq, gta, |phi| right_action(uq, phi, &c))?;
    let w_b = slf_op(uq, gta, |phi| right_action(uq, &uq.dual_product(chi2, &right_action(uq, phi, &rb.v)), &rb.v_inv))?;
    Ok(SlfSkeinOps { w_a, w_b })
}

/// W(a_1), W(b_1) from the handle representation, restricted to SLF.
pub fn slf_skein_wilson(uq: &Uq, gta: &Gta, h: &HandleOps) -> Result<SlfSkeinOps> {
    let wa = wilson_op(h, &LoopWord::generator(1, Gen::A, 1)?)?;
    let wb = wilson_op(h, &LoopWord::generator(1, Gen::B, 1)?)?;
    Ok(SlfSkeinOps { w_a: slf_restrict(uq, gta, &wa)?, w_b: slf_restrict(uq, gta, &wb)? })
}

// ---------- the composition series ----------

/// Basis change to (X_0..X_p | χ⁺_1..χ⁺_{p−1} | G_1..G_{p−1}); columns in GTA coordinates.
pub fn series_basis(p: usize) -> ExactMatrix {
    let n = 3 * p - 1;
    let mut cols: Vec<Vec<CycNum>> = (0..=p).map(|s| x_vector(p, s)).collect();
    for s in 1..p {
        let mut v = vec![CycNum::zero(p); n];
        v[chi_plus(s)] = CycNum::one(p);
        cols.push(v);
    }
    for s in 1..p {
        let mut v = vec![CycNum::zero(p); n];
        v[g_index(p, s)] = CycNum::one(p);
        cols.push(v);
    }
    ExactMatrix::from_columns(p, n, &cols)
}

fn range(a: usize, b: usize) -> Vec<usize> {
    (a..b).collect()
}

/// Quotient dimension of the algebra generated by `gens` (including the identity).
fn generated_dim(gens: &[ExactMatrix]) -> Result<usize> {
    let n = gens[0].rows();
    Ok(algebra_membership(gens, &[], n * n)?.1)
}

/// Span of the orbit of `v` under the unital algebra generated by `gens`.
fn orbit_dim(p: usize, gens: &[ExactMatrix], v: &[CycNum]) -> usize {
    let mut basis = vec![v.to_vec()];
    let mut frontier = vec![v.to_vec()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            for g in gens {
                let y = g.apply(x);
                if in_span(p, &basis, &y).is_none() {
                    basis.push(y.clone());
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    span_dim(p, &basis)
}

/// Matrices commuting with every generator.
fn commutant(gens: &[ExactMatrix]) -> Vec<ExactMatrix> {
    let p = gens[0].p();
    let n = gens[0].rows();
    // unknown T[i][j] at column i*n+j; rows are the entries of TG − GT
    let mut rows: Vec<Vec<CycNum>> = Vec::new();
    for g in gens {
        for i in 0..n {
            for j in 0..n {
                let mut r = vec![CycNum::zero(p); n * n];
                for k in 0..n {
                    let gkj = g.get(k, j);
                    if !gkj.is_zero() {
                        r[i * n + k] += gkj;
                    }
                    let gik = g.get(i, k);
                    if !gik.is_zero() {
                        r[k * n + j] -= gik;
                    }
                }
                if r.iter().any(|x| !x.is_zero()) {
                    rows.push(r);
                }
            }
        }
    }
    ExactMatrix::from_rows(p, n * n, &rows).kernel().into_iter().map(|v| ExactMatrix::from_fn(p, n, n, |i, j| v[i * n + j].clone())).collect()
}

fn flat(m: &ExactMatrix) -> Vec<CycNum> {
    m.entries().to_vec()
}

/// Whether the commutant is scalars plus a nilpotent ideal, i.e. the module is
/// indecomposable. Returns (commutant dimension, local).
pub fn commutant_is_local(gens: &[ExactMatrix]) -> Result<(usize, bool)> {
    let p = gens[0].p();
    let n = gens[0].rows();
    let comm = commutant(gens);
    let id = ExactMatrix::identity(p, n);
    let nf = CycNum::from_i64(p, n as i64);
    let mut nil: Vec<ExactMatrix> = Vec::new();
    for b in &comm {
        let tr = (0..n).fold(CycNum::zero(p), |acc, i| &acc + b.get(i, i));
        let x = b.sub(&id.scale(&tr.checked_div(&nf)?));
        if !x.is_zero() && in_span(p, &nil.iter().map(flat).collect::<Vec<_>>(), &flat(&x)).is_none() {
            nil.push(x);
        }
    }
    if nil.len() + 1 != comm.len() {
        return Ok((comm.len(), false));
    }
    let nil_flat: Vec<Vec<CycNum>> = nil.iter().map(flat).collect();
    for x in &nil {
        for y in &nil {
            let xy = x.compose(y)?;
            if !xy.is_zero() && in_span(p, &nil_flat, &flat(&xy)).is_none() {
                return Ok((comm.len(), false));
            }
        }
    }
    let mut power = nil.clone();
    for _ in 0..n {
        let mut next: Vec<ExactMatrix> = Vec::new();
        for x in &power {
            for y in &nil {
                let xy = x.compose(y)?;
                if !xy.is_zero() && in_span(p, &next.iter().map(flat).collect::<Vec<_>>(), &flat(&xy)).is_none() {
                    next.push(xy);
                }
            }
        }
        if next.is_empty() {
            return Ok((comm.len(), true));
        }
        power = next;
    }
    Ok((comm.len(), false))
}

#[derive(Clone, Debug, Serialize)]
pub struct CompositionReport {
    pub dims: [usize; 3],
    /// J_1 and J_2 are stable under W_A and W_B.
    pub invariant: bool,
    /// (e_s)_A and (w⁺_t+w⁻_t)_A lie in the algebra generated by W_A.
    pub aux_in_wa_algebra: bool,
    /// W(b⁻¹a) = multiplication by χ⁺₂ lies in the algebra generated by W_A, W_B.
    pub chi2_in_algebra: bool,
    /// Dimension of the algebra generated on each factor, against d².
    pub quotient_algebra_dims: [usize; 3],
    pub simple_quotients: [bool; 3],
    pub x0_orbit_spans_j1: bool,
    pub g1_orbit_spans_top: bool,
    pub commutant_dim: usize,
    pub indecomposable: bool,
}

impl CompositionReport {
    pub fn all(&self) -> bool {
        let p = self.dims[1] + 1;
        self.dims == [p + 1, p - 1, p - 1]
            && self.invariant
            && self.aux_in_wa_algebra
            && self.chi2_in_algebra
            && self.simple_quotients.iter().all(|&b| b)
            && self.x0_orbit_spans_j1
            && self.g1_orbit_spans_top
            && self.indecomposable
    }
}

/// z_A ▷ φ = φ(z?) for the central elements e_s and w⁺_t + w⁻_t.
fn aux_ops(uq: &Uq, center: &crate::center_slf::Center, gta: &Gta) -> Result<Vec<ExactMatrix>> {
    let cb = &center.basis;
    let mut zs: Vec<_> = (0..=uq.p).map(|s| cb.e(s).clone()).collect();
    for t in 1..uq.p {
        zs.push(cb.wp(t) + cb.wm(t));
    }
    zs.iter().map(|z| slf_op(uq, gta, |phi| right_action(uq, phi, z))).collect()
}

pub fn composition_series(uq: &Uq, center: &crate::center_slf::Center, gta: &Gta, ops: &SlfSkeinOps) -> Result<CompositionReport> {
    let p = uq.p;
    let n = 3 * p - 1;
    let basis = series_basis(p);
    let binv = basis.inverse()?;
    let conj = |m: &ExactMatrix| binv.compose(m)?.compose(&basis);
    let (wa, wb) = (conj(&ops.w_a)?, conj(&ops.w_b)?);
    let cuts = [0, p + 1, 2 * p, n];
    let blocks: Vec<Vec<usize>> = (0..3).map(|k| range(cuts[k], cuts[k + 1])).collect();
    let invariant = [&wa, &wb].iter().all(|m| (0..3).all(|c| (c + 1..3).all(|r| m.submatrix(&blocks[r], &blocks[c]).is_zero())));
    let aux = aux_ops(uq, center, gta)?;
    let (flags, _) = algebra_membership(std::slice::from_ref(&ops.w_a), &aux, n)?;
    let aux_in_wa_algebra = flags.iter().all(|&f| f);
    let chi2 = slf_op(uq, gta, |phi| uq.dual_product(&gta.forms[chi_plus(2)], phi))?;
    let (flags, _) = algebra_membership(&[ops.w_a.clone(), ops.w_b.clone()], &[chi2], n)?;
    let chi2_in_algebra = flags[0];
    let mut qdims = [0; 3];
    let mut simple = [false; 3];
    for k in 0..3 {
        let gens = [wa.submatrix(&blocks[k], &blocks[k]), wb.submatrix(&blocks[k], &blocks[k])];
        qdims[k] = generated_dim(&gens)?;
        simple[k] = qdims[k] == blocks[k].len() * blocks[k].len();
    }
    let j1 = [wa.submatrix(&blocks[0], &blocks[0]), wb.submatrix(&blocks[0], &blocks[0])];
    let mut x0 = vec![CycNum::zero(p); p + 1];
    x0[0] = CycNum::one(p);
    let top = [wa.submatrix(&blocks[2], &blocks[2]), wb.submatrix(&blocks[2], &blocks[2])];
    let mut g1 = vec![CycNum::zero(p); p - 1];
    g1[0] = CycNum::one(p);
    let (commutant_dim, indecomposable) = commutant_is_local(&[ops.w_a.clone(), ops.w_b.clone()])?;
    Ok(CompositionReport {
        dims: [p + 1, p - 1, p - 1],
        invariant,
        aux_in_wa_algebra,
        chi2_in_algebra,
        quotient_algebra_dims: qdims,
        simple_quotients: simple,
        x0_orbit_spans_j1: orbit_dim(p, &j1, &x0) == p + 1,
        g1_orbit_spans_top: orbit_dim(p, &top, &g1) == p - 1,
        commutant_dim,
        indecomposable,
    })
}

/// Actions of W_A, W_B on J_2/J_1 in the basis χ̄⁺_1..χ̄⁺_{p−1}.
pub fn middle_quotient(p: usize, ops: &SlfSkeinOps) -> Result<(ExactMatrix, ExactMatrix)> {
    let basis = series_basis(p);
    let binv = basis.inverse()?;
    let mid = range(p + 1, 2 * p);
    let q = |m: &ExactMatrix| -> Result<ExactMatrix> { Ok(binv.compose(m)?.compose(&basis)?.submatrix(&mid, &mid)) };
    Ok((q(&ops.w_a)?, q(&ops.w_b)?))
}

// ---------- the intertwiner F ----------

#[derive(Clone, Debug, Serialize)]
pub struct IsoF {
    /// F(cl(f_n)) = v_{n+1}⁻¹χ̄⁺_{n+1}, columns indexed by n.
    pub f: ExactMatrix,
    pub residual_a: ExactMatrix,
    pub residual_b: ExactMatrix,
}

impl IsoF {
    pub fn exact(&self) -> bool {
        self.residual_a.is_zero() && self.residual_b.is_zero()
    }
}

pub fn iso_f(uq: &Uq, rho_a: &ExactMatrix, rho_b: &ExactMatrix, ops: &SlfSkeinOps) -> Result<IsoF> {
    let p = uq.p;
    let d = p - 1;
    let mut f = ExactMatrix::zeros(p, d, d);
    for n in 0..d {
        f.set(n, n, vv(uq, true, n + 1).inv()?);
    }
    let (qa, qb) = middle_quotient(p, ops)?;
    let residual_a = f.compose(rho_a)?.sub(&qa.compose(&f)?);
    let residual_b = f.compose(rho_b)?.sub(&qb.compose(&f)?);
    Ok(IsoF { f, residual_a, residual_b })
}

// ---------- the Kauffman relation on Wilson loops ----------

/// W_A W_B and W_B W_A against the two smoothings of their single crossing, A = q^{1/2}.
#[derive(Clone, Debug, Serialize)]
pub struct KauffmanReport {
    /// W_A W_B = A W(ba) + A⁻¹W(b⁻¹a).
    pub ab: bool,
    /// W_B W_A = A⁻¹W(ba) + A W(b⁻¹a).
    pub ba: bool,
}

pub fn kauffman_report<T: OpElem>(uq: &Uq, wa: &T, wb: &T, w_ba: &T, w_binv_a: &T) -> Result<KauffmanReport> {
    let a = uq.zeta_pow(1).clone();
    let ai = a.inv()?;
    let lhs_ab = wa.op_mul(wb);
    let lhs_ba = wb.op_mul(wa);
    let rhs = |x: &CycNum, y: &CycNum| w_ba.op_scale(x).op_add(&w_binv_a.op_scale(y));
    let diff = |l: &T, r: &T| l.op_add(&r.op_scale(&CycNum::from_i64(uq.p, -1))).op_is_zero();
    Ok(KauffmanReport { ab: diff(&lhs_ab, &rhs(&a, &ai)), ba: diff(&lhs_ba, &rhs(&ai, &a)) })
}

/// The relation on the handle operators (all of H*) and on SLF.
pub fn kauffman_on_handle(uq: &Uq, gta: &Gta, h: &HandleOps) -> Result<(KauffmanReport, KauffmanReport)> {
    let w = |text: &str| -> Result<ExactMatrix> { wilson_op(h, &crate::loop_wilson::parse_loop(text, 1)?) };
    let (wa, wb, wba, wbia) = (w("a1")?, w("b1")?, w("b1 a1")?, w("b1^-1 a1")?);
    let full = kauffman_report(uq, &wa, &wb, &wba, &wbia)?;
    let r = |m: &ExactMatrix| slf_restrict(uq, gta, m);
    let slf = kauffman_report(uq, &r(&wa)?, &r(&wb)?, &r(&wba)?, &r(&wbia)?)?;
    Ok((full, slf))
}

// ---------- genus two: the boundary-curve identity ----------

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryCurveReport {
    pub inv_dim: usize,
    /// (x, x⁻¹c, equal on Inv, equal on all of (H*)^{⊗2}).
    pub pairs: Vec<(String, String, bool, bool)>,
}

impl BoundaryCurveReport {
    pub fn all(&self) -> bool {
        self.pairs.iter().all(|t| t.2)
    }
}

/// ρ_inv(W(x)) = ρ_inv(W(x⁻¹c_{g,0})) for x = e_2 and x = s_1 in genus 2.
pub fn boundary_curve_report(uq: &Uq, gops: &GenusOps, max_dim: usize) -> Result<BoundaryCurveReport> {
    let g = 2;
    let inv = inv_subspace(uq, g, max_dim)?;
    let c = loop_boundary(g)?;
    let mut pairs = Vec::new();
    for x in [loop_e(g, 2)?, loop_s(g, 1)?] {
        let letters: Vec<LoopLetter> = x.inverse().letters.iter().chain(&c.letters).copied().collect();
        let xc = LoopWord::from_letters(g, letters)?.asserted_simple();
        let (w1, w2): (KronOp, KronOp) = (wilson_op(gops, &x)?, wilson_op(gops, &xc)?);
        let on_inv = inv.iter().all(|v| w1.apply(v) == w2.apply(v));
        let diff = w1.op_add(&w2.op_scale(&CycNum::from_i64(uq.p, -1)));
        pairs.push((x.to_string(), xc.to_string(), on_inv, diff.op_is_zero()));
    }
    Ok(BoundaryCurveReport { inv_dim: inv.len(), pairs })
}

// ---------- everything for one p ----------

#[derive(Clone, Debug, Serialize)]
pub struct SkeinReport {
    pub p: usize,
    pub jw: Vec<JwReport>,
    pub tl_matrices: Vec<TlMatrixReport>,
    pub rho_a: ExactMatrix,
    pub rho_b: ExactMatrix,
    pub rho_matches_closed: bool,
    pub w_a: ExactMatrix,
    pub w_b: ExactMatrix,
    pub forms_match_closed: bool,
    /// None when the handle representation was not built.
    pub wilson_matches_closed: Option<bool>,
    pub kauffman: Option<(KauffmanReport, KauffmanReport)>,
    pub composition: CompositionReport,
    pub iso_f: IsoF,
}

impl SkeinReport {
    pub fn all(&self) -> bool {
        self.jw.iter().all(|r| r.all())
            && self.tl_matrices.iter().all(|r| r.all())
            && self.rho_matches_closed
            && self.forms_match_closed
            && self.wilson_matches_closed.unwrap_or(true)
            && self.kauffman.as_ref().map_or(true, |(f, s)| f.ab && f.ba && s.ab && s.ba)
            && self.composition.all()
            && self.iso_f.exact()
    }
}

/// Runs the torus checks; `handle` enables the comparison with loop_wilson.
pub fn skein_report(uq: &Uq, center: &crate::center_slf::Center, rb: &Ribbon, gta: &Gta, handle: Option<&HandleOps>) -> Result<SkeinReport> {
    let p = uq.p;
    let torus = SkeinTorus::new(uq)?;
    let jw = (0..p).map(|n| jw_report(&torus.tl, n)).collect::<Result<Vec<_>>>()?;
    let tl_matrices = (2..p.min(5)).map(|n| tl_matrix_report(uq, &torus.tl, n)).collect::<Result<Vec<_>>>()?;
    let (rho_a, rho_b) = (torus.rho_a()?, torus.rho_b()?);
    let rho_matches_closed = rho_a == rho_a_closed(uq) && rho_b == rho_b_closed(p);
    let closed = slf_skein_closed(uq);
    let forms = slf_skein_forms(uq, rb, gta)?;
    let forms_match_closed = forms.w_a == closed.w_a && forms.w_b == closed.w_b;
    let (wilson_matches_closed, kauffman) = match handle {
        Some(h) => {
            let w = slf_skein_wilson(uq, gta, h)?;
            (Some(w.w_a == closed.w_a && w.w_b == closed.w_b), Some(kauffman_on_handle(uq, gta, h)?))
        }
        None => (None, None),
    };
    let composition = composition_series(uq, center, gta, &closed)?;
    let iso_f = iso_f(uq, &rho_a, &rho_b, &closed)?;
    Ok(SkeinReport {
        p,
        jw,
        tl_matrices,
        rho_a,
        rho_b,
        rho_matches_closed,
        w_a: closed.w_a,
        w_b: closed.w_b,
        forms_match_closed,
        wilson_matches_closed,
        kauffman,
        composition,
        iso_f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center_slf::Center;
    use crate::handle_rep::DEFAULT_MAX_DIM;
    use proptest::prelude::*;

    fn tl(p: usize) -> (Uq, Tl) {
        let uq = Uq::new(p);
        let t = Tl::new(&uq);
        (uq, t)
    }

    #[test]
    fn catalan_counts() {
        let cat = [1, 1, 2, 5, 14, 42];
        for (n, &c) in cat.iter().enumerate() {
            let ms = matchings(n);
            assert_eq!(ms.len(), c);
            assert!(ms.iter().all(|m| is_planar(m)));
        }
        assert!(!is_planar(&[3, 2, 1, 0]));
    }

    #[test]
    fn generator_relations() {
        let (uq, t) = tl(5);
        let p = uq.p;
        let e1 = TlElem::generator(p, 3, 1).unwrap();
        let e2 = TlElem::generator(p, 3, 2).unwrap();
        assert_eq!(t.compose(&e1, &e1).unwrap(), e1.scale(&t.delta));
        assert_eq!(t.compose(&t.compose(&e1, &e2).unwrap(), &e1).unwrap(), e1);
        let id = TlElem::identity(p, 3);
        assert_eq!(t.compose(&id, &e2).unwrap(), e2);
        // n disjoint circles
        let cl = t.closure(&id);
        assert!(cl[3].is_one() && cl[..3].iter().all(|c| c.is_zero()));
        assert_eq!(t.closure(&e1), vec![CycNum::zero(p), t.delta.clone(), CycNum::zero(p), CycNum::zero(p)]);
        assert!(t.compose(&e1, &TlElem::identity(p, 2)).is_err());
    }

    #[test]
    fn crossings_satisfy_braid_relations() {
        let (uq, t) = tl(4);
        let p = uq.p;
        let s1 = t.crossing(3, 1, false).unwrap();
        let s2 = t.crossing(3, 2, false).unwrap();
        let s1i = t.crossing(3, 1, true).unwrap();
        assert_eq!(t.compose(&s1, &s1i).unwrap(), TlElem::identity(p, 3));
        let lhs = t.compose(&t.compose(&s1, &s2).unwrap(), &s1).unwrap();
        let rhs = t.compose(&t.compose(&s2, &s1).unwrap(), &s2).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn jones_wenzl_small() {
        let (uq, t) = tl(3);
        let p = uq.p;
        assert_eq!(t.jones_wenzl(0).unwrap(), TlElem::identity(p, 0));
        assert_eq!(t.jones_wenzl(1).unwrap(), TlElem::identity(p, 1));
        // with loop value −[2] the idempotent is id + e_1/[2]
        let f2 = t.jones_wenzl(2).unwrap();
        let e1 = TlElem::generator(p, 2, 1).unwrap();
        let expect = TlElem::identity(p, 2).add(&e1.scale(&uq.qint(2).inv().unwrap()));
        assert_eq!(f2, expect);
        let wrong = TlElem::identity(p, 2).sub(&e1.scale(&uq.qint(2).inv().unwrap()));
        assert_ne!(t.compose(&wrong, &wrong).unwrap(), wrong);
        assert!(t.jones_wenzl(3).is_err());
    }

    #[test]
    fn jones_wenzl_properties() {
        for p in 2..=5 {
            let (_, t) = tl(p);
            for n in 0..p {
                let r = jw_report(&t, n).unwrap();
                assert!(r.all(), "p={p} n={n}: {r:?}");
            }
        }
    }

    #[test]
    fn matrix_realization() {
        for p in 3..=5 {
            let (uq, t) = tl(p);
            for n in 2..p.min(5) {
                let r = tl_matrix_report(&uq, &t, n).unwrap();
                assert!(r.all(), "p={p} n={n}: {r:?}");
            }
        }
    }

    #[test]
    fn closures_are_chebyshev() {
        let uq = Uq::new(5);
        let sk = SkeinTorus::new(&uq).unwrap();
        let p = 5;
        let c = |v: i64| CycNum::from_i64(p, v);
        assert_eq!(sk.cl_basis[2], vec![c(-1), c(0), c(1)]);
        assert_eq!(sk.cl_basis[3], vec![c(0), c(-2), c(0), c(1)]);
    }

    #[test]
    fn skein_torus_actions() {
        for p in 2..=5 {
            let uq = Uq::new(p);
            let sk = SkeinTorus::new(&uq).unwrap();
            let (a, b) = (sk.rho_a().unwrap(), sk.rho_b().unwrap());
            assert_eq!(a, rho_a_closed(&uq), "p={p}");
            assert_eq!(b, rho_b_closed(p), "p={p}");
            assert_eq!(a.get(0, 0), &-(uq.q_pow(1) + uq.q_pow(-1)));
            if p >= 3 {
                assert!(b.get(1, 0).is_one());
                assert!(b.get(p - 3, p - 2).is_one());
            }
        }
    }

    #[test]
    fn slf_operators_agree() {
        for p in 2..=3 {
            let uq = Uq::new(p);
            let center = Center::new(&uq).unwrap();
            let rb = Ribbon::new(&uq, &center, false).unwrap();
            let gta = Gta::new(&uq, &center).unwrap();
            let closed = slf_skein_closed(&uq);
            let forms = slf_skein_forms(&uq, &rb, &gta).unwrap();
            assert_eq!(forms.w_a, closed.w_a, "p={p}");
            assert_eq!(forms.w_b, closed.w_b, "p={p}");
            let h = HandleOps::fundamental(&uq, &rb).unwrap();
            let w = slf_skein_wilson(&uq, &gta, &h).unwrap();
            assert_eq!(w.w_a, closed.w_a, "p={p}");
            assert_eq!(w.w_b, closed.w_b, "p={p}");
            // W_B▷X_p = 2q^{1/2}X_{p−1}
            let img = closed.w_b.apply(&x_vector(p, p));
            let expect: Vec<CycNum> = x_vector(p, p - 1).iter().map(|c| c * &uq.zeta_pow(1).scale_i64(2)).collect();
            assert_eq!(img, expect);
            // coefficient of X_{s+1} in W_B▷G_s is −q̂q^{s+1/2}/[s]
            let s = 1;
            let col = closed.w_b.column(g_index(p, s));
            let c = -(&(&uq.qhat() * uq.zeta_pow(2 * s as i64 + 1)).checked_div(&uq.qint(s as i64)).unwrap());
            let xs1 = x_vector(p, s + 1);
            let k = xs1.iter().position(|v| v.is_one()).unwrap();
            assert_eq!(col[k], c, "p={p}");
            // W_A▷χ⁻_p = (q^p+q^{−p})χ⁻_p = −2χ⁻_p
            assert_eq!(closed.w_a.get(chi_minus(p, p), chi_minus(p, p)), &CycNum::from_i64(p, -2));
        }
    }

    #[test]
    fn kauffman_relation() {
        for p in 2..=3 {
            let uq = Uq::new(p);
            let center = Center::new(&uq).unwrap();
            let rb = Ribbon::new(&uq, &center, false).unwrap();
            let gta = Gta::new(&uq, &center).unwrap();
            let h = HandleOps::fundamental(&uq, &rb).unwrap();
            let (full, slf) = kauffman_on_handle(&uq, &gta, &h).unwrap();
            assert!(full.ab && full.ba && slf.ab && slf.ba, "p={p}: {full:?} {slf:?}");
        }
    }

    #[test]
    fn composition_series_and_intertwiner() {
        for p in 2..=4 {
            let uq = Uq::new(p);
            let center = Center::new(&uq).unwrap();
            let rb = Ribbon::new(&uq, &center, false).unwrap();
            let gta = Gta::new(&uq, &center).unwrap();
            let r = skein_report(&uq, &center, &rb, &gta, None).unwrap();
            assert!(r.composition.all(), "p={p}: {:?}", r.composition);
            assert!(r.iso_f.exact(), "p={p}");
            assert!(r.iso_f.f.get(0, 0).is_one());
            assert!(r.all(), "p={p}");
        }
    }

    #[test]
    fn genus_two_boundary_curve() {
        let uq = Uq::new(2);
        let center = Center::new(&uq).unwrap();
        let rb = Ribbon::new(&uq, &center, false).unwrap();
        let h = HandleOps::fundamental(&uq, &rb).unwrap();
        let gops = GenusOps::new(&uq, &h, 2, DEFAULT_MAX_DIM).unwrap();
        let r = boundary_curve_report(&uq, &gops, DEFAULT_MAX_DIM).unwrap();
        assert_eq!(r.inv_dim, 38);
        assert!(r.all(), "{r:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn tl_product_is_associative_and_closure_cyclic(n in 1usize..5, i in 0usize..100, j in 0usize..100, k in 0usize..100) {
            let (_, t) = tl(5);
            let ms = matchings(n);
            let pick = |x: usize| TlElem::diagram(5, ms[x % ms.len()].clone());
            let (x, y, z) = (pick(i), pick(j), pick(k));
            let xy_z = t.compose(&t.compose(&x, &y).unwrap(), &z).unwrap();
            let x_yz = t.compose(&x, &t.compose(&y, &z).unwrap()).unwrap();
            prop_assert_eq!(xy_z, x_yz);
            prop_assert_eq!(t.closure(&t.compose(&x, &y).unwrap()), t.closure(&t.compose(&y, &x).unwrap()));
        }
    }
}
