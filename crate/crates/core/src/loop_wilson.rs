//! Loop words in π₁ of the genus-g surface with one boundary component, their
//! normalization, their lifts to the graph algebra and the Wilson-loop operators.
//!
//! Gate layout: handle i carries b_i through gates (4i−3, 4i−1) and a_i through gates
//! (4i−2, 4i). A letter u enters at its left gate and exits at its right gate; u⁻¹ does
//! the reverse.

use std::fmt;

use serde::Serialize;

use crate::cyclo::CycNum;
use crate::error::{Error, Result};
use crate::handle_rep::{BlockOp, GenusOps, HandleOps, Letter, OpElem};
use crate::linalg::{in_span, ExactMatrix};
use crate::uq_algebra::Uq;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Gen {
    B,
    A,
}

/// One letter u_i^{±1}; `handle` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LoopLetter {
    pub gen: Gen,
    pub handle: usize,
    pub inverse: bool,
}

impl LoopLetter {
    pub fn new(gen: Gen, handle: usize, inverse: bool) -> Self {
        LoopLetter { gen, handle, inverse }
    }

    pub fn inv(self) -> Self {
        LoopLetter { inverse: !self.inverse, ..self }
    }

    /// (entry gate, exit gate).
    pub fn gates(self) -> (usize, usize) {
        let left = 4 * self.handle - if self.gen == Gen::B { 3 } else { 2 };
        if self.inverse {
            (left + 2, left)
        } else {
            (left, left + 2)
        }
    }

    fn letter(self) -> Letter {
        match (self.gen, self.inverse) {
            (Gen::A, false) => Letter::A,
            (Gen::A, true) => Letter::AInv,
            (Gen::B, false) => Letter::B,
            (Gen::B, true) => Letter::BInv,
        }
    }
}

impl fmt::Display for LoopLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.gen == Gen::B { 'b' } else { 'a' };
        write!(f, "{c}{}{}", self.handle, if self.inverse { "^-1" } else { "" })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn flip(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }
}

/// A freely reduced nonempty word in b_1, a_1, …, b_g, a_g.
///
/// `simple` records that the word is known (whitelisted) or asserted by the caller to be a
/// simple loop; lifts and Wilson operators are only defined for simple loops.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LoopWord {
    pub g: usize,
    pub letters: Vec<LoopLetter>,
    pub orientation: Orientation,
    pub simple: bool,
}

fn free_reduce(letters: impl IntoIterator<Item = LoopLetter>) -> Vec<LoopLetter> {
    let mut out: Vec<LoopLetter> = Vec::new();
    for l in letters {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

fn cyclic_reduce(letters: &[LoopLetter]) -> &[LoopLetter] {
    let (mut i, mut j) = (0, letters.len());
    while j - i >= 2 && letters[i] == letters[j - 1].inv() {
        i += 1;
        j -= 1;
    }
    &letters[i..j]
}

fn gate_sequence(letters: &[LoopLetter]) -> Vec<usize> {
    letters
        .iter()
        .flat_map(|l| {
            let (x, y) = l.gates();
            [x, y]
        })
        .collect()
}

/// N of a reduced nonempty word read as a based loop.
fn loop_n(letters: &[LoopLetter]) -> i64 {
    let gs = gate_sequence(letters);
    let k = letters.len();
    let ups = (0..k).filter(|&i| gs[2 * i] > gs[2 * i + 1]).count() as i64;
    let caps = (0..k - 1).filter(|&i| gs[2 * i + 1] >= gs[2 * i + 2]).count() as i64;
    ups - caps
}

/// N of the free homotopy class of a cyclically reduced nonempty word.
fn circle_n(letters: &[LoopLetter]) -> i64 {
    let gs = gate_sequence(letters);
    let closing = i64::from(gs[gs.len() - 1] >= gs[0]);
    loop_n(letters) - closing
}

/// N(x) − N([x]): 1 for positively and 0 for negatively oriented simple loops.
fn orientation_defect(letters: &[LoopLetter]) -> i64 {
    loop_n(letters) - circle_n(cyclic_reduce(letters))
}

impl LoopWord {
    /// Builds a word from letters, reducing freely and deriving the orientation from the
    /// normalization defect. Fails on the empty word, bad indices or a defect outside {0,1}.
    pub fn from_letters(g: usize, letters: impl IntoIterator<Item = LoopLetter>) -> Result<Self> {
        let letters = free_reduce(letters);
        if letters.is_empty() {
            return Err(Error::Parse("word reduces to the identity".into()));
        }
        if let Some(l) = letters.iter().find(|l| l.handle == 0 || l.handle > g) {
            return Err(Error::Parse(format!("generator index {} outside 1..={g}", l.handle)));
        }
        let orientation = match orientation_defect(&letters) {
            1 => Orientation::Positive,
            0 => Orientation::Negative,
            d => return Err(Error::Rejected(format!("normalization defect {d}: not a simple loop"))),
        };
        let mut w = LoopWord { g, letters, orientation, simple: false };
        w.simple = canonical_loops(g).iter().any(|(_, c)| c.letters == w.letters);
        Ok(w)
    }

    pub fn generator(g: usize, gen: Gen, i: usize) -> Result<Self> {
        Self::from_letters(g, [LoopLetter::new(gen, i, false)]).map(|w| w.asserted_simple())
    }

    pub fn asserted_simple(mut self) -> Self {
        self.simple = true;
        self
    }

    /// Overrides the derived orientation.
    pub fn with_orientation(mut self, o: Orientation) -> Self {
        self.orientation = o;
        self
    }

    pub fn inverse(&self) -> Self {
        let letters: Vec<_> = self.letters.iter().rev().map(|l| l.inv()).collect();
        LoopWord { g: self.g, letters, orientation: self.orientation.flip(), simple: self.simple }
    }

    /// Concatenation, reduced.
    pub fn concat(&self, o: &LoopWord) -> Result<Self> {
        Self::from_letters(self.g.max(o.g), self.letters.iter().chain(&o.letters).copied())
    }

    pub fn gates(&self) -> Vec<usize> {
        gate_sequence(&self.letters)
    }

    /// N(x), the normalization of the based loop.
    pub fn normalization(&self) -> i64 {
        loop_n(&self.letters)
    }

    /// N([x]), the normalization of the free homotopy class with its orientation.
    pub fn circle_normalization(&self) -> i64 {
        circle_n(cyclic_reduce(&self.letters))
    }
}

impl fmt::Display for LoopWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Parses `b1 a1^-1 b1^-1`; exponents may be any nonzero integer and whitespace between
/// tokens is optional.
pub fn parse_loop(text: &str, g: usize) -> Result<LoopWord> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let mut letters = Vec::new();
    let digits = |pos: &mut usize| -> String {
        let start = *pos;
        while *pos < chars.len() && chars[*pos].is_ascii_digit() {
            *pos += 1;
        }
        chars[start..*pos].iter().collect()
    };
    while pos < chars.len() {
        let c = chars[pos];
        if c.is_whitespace() {
            pos += 1;
            continue;
        }
        let gen = match c {
            'a' => Gen::A,
            'b' => Gen::B,
            _ => return Err(Error::Parse(format!("unknown token at '{}'", chars[pos..].iter().collect::<String>()))),
        };
        pos += 1;
        let idx = digits(&mut pos);
        let handle: usize = idx.parse().map_err(|_| Error::Parse(format!("missing index after '{c}'")))?;
        let mut exp: i64 = 1;
        if pos < chars.len() && chars[pos] == '^' {
            pos += 1;
            let neg = pos < chars.len() && chars[pos] == '-';
            if neg {
                pos += 1;
            }
            let e = digits(&mut pos);
            exp = e.parse().map_err(|_| Error::Parse("malformed exponent".into()))?;
            if exp == 0 {
                return Err(Error::Parse("zero exponent".into()));
            }
            if neg {
                exp = -exp;
            }
        }
        if handle == 0 || handle > g {
            return Err(Error::Parse(format!("generator index {handle} outside 1..={g}")));
        }
        let l = LoopLetter::new(gen, handle, exp < 0);
        letters.extend(std::iter::repeat(l).take(exp.unsigned_abs() as usize));
    }
    if letters.is_empty() {
        return Err(Error::Parse("empty word".into()));
    }
    LoopWord::from_letters(g, letters)
}

fn raw(g: usize, letters: Vec<LoopLetter>) -> LoopWord {
    LoopWord { g, letters, orientation: Orientation::Positive, simple: true }
}

fn l(gen: Gen, i: usize, inverse: bool) -> LoopLetter {
    LoopLetter::new(gen, i, inverse)
}

/// b_i a_i⁻¹ b_i⁻¹.
fn commutator_tail(i: usize) -> [LoopLetter; 3] {
    [l(Gen::B, i, false), l(Gen::A, i, true), l(Gen::B, i, true)]
}

/// d_1 = b_1a_1⁻¹b_1⁻¹ and d_i = a_{i−1}b_ia_i⁻¹b_i⁻¹.
pub fn loop_d(g: usize, i: usize) -> Result<LoopWord> {
    check_index(g, i)?;
    let mut w = Vec::new();
    if i > 1 {
        w.push(l(Gen::A, i - 1, false));
    }
    w.extend(commutator_tail(i));
    Ok(finish(raw(g, w)))
}

/// e_i = (b_1a_1⁻¹b_1⁻¹a_1)…(b_{i−1}a_{i−1}⁻¹b_{i−1}⁻¹a_{i−1}) b_ia_i⁻¹b_i⁻¹.
pub fn loop_e(g: usize, i: usize) -> Result<LoopWord> {
    check_index(g, i)?;
    let mut w = Vec::new();
    for k in 1..i {
        w.extend(commutator_tail(k));
        w.push(l(Gen::A, k, false));
    }
    w.extend(commutator_tail(i));
    Ok(finish(raw(g, w)))
}

/// s_i = (b_1a_1⁻¹b_1⁻¹a_1)…(b_ia_i⁻¹b_i⁻¹a_i); s_g is the boundary loop c_g.
pub fn loop_s(g: usize, i: usize) -> Result<LoopWord> {
    check_index(g, i)?;
    let mut w = Vec::new();
    for k in 1..=i {
        w.extend(commutator_tail(k));
        w.push(l(Gen::A, k, false));
    }
    Ok(finish(raw(g, w)))
}

pub fn loop_boundary(g: usize) -> Result<LoopWord> {
    loop_s(g, g)
}

fn finish(mut w: LoopWord) -> LoopWord {
    w.orientation = if orientation_defect(&w.letters) == 1 { Orientation::Positive } else { Orientation::Negative };
    w
}

fn check_index(g: usize, i: usize) -> Result<()> {
    if i == 0 || i > g {
        return Err(Error::Rejected(format!("index {i} outside 1..={g}")));
    }
    Ok(())
}

/// The whitelisted simple loops for genus g together with their inverses:
/// a_i, b_i, d_i, e_i, s_i, b_i⁻¹a_i, a_ib_i⁻¹, b_ia_i.
pub fn canonical_loops(g: usize) -> Vec<(String, LoopWord)> {
    let mut out = Vec::new();
    for i in 1..=g {
        let named: [(String, Vec<LoopLetter>); 8] = [
            (format!("a{i}"), vec![l(Gen::A, i, false)]),
            (format!("b{i}"), vec![l(Gen::B, i, false)]),
            (format!("d{i}"), loop_d(g, i).map(|w| w.letters).unwrap_or_default()),
            (format!("e{i}"), loop_e(g, i).map(|w| w.letters).unwrap_or_default()),
            (format!("s{i}"), loop_s(g, i).map(|w| w.letters).unwrap_or_default()),
            (format!("b{i}^-1 a{i}"), vec![l(Gen::B, i, true), l(Gen::A, i, false)]),
            (format!("a{i} b{i}^-1"), vec![l(Gen::A, i, false), l(Gen::B, i, true)]),
            (format!("b{i} a{i}"), vec![l(Gen::B, i, false), l(Gen::A, i, false)]),
        ];
        for (name, letters) in named {
            let w = finish(raw(g, letters));
            out.push((format!("({name})^-1"), finish(w.inverse())));
            out.push((name, w));
        }
    }
    out
}

// ---------- lifts and Wilson loops ----------

/// Operator images of the handle matrices in some representation of L_{g,0}.
pub trait Holonomy {
    type Elem: OpElem;
    fn genus(&self) -> usize;
    /// Image of `l`(i) with a 0-based handle index.
    fn block(&self, i: usize, l: Letter) -> &BlockOp<Self::Elem>;
    /// The ribbon element on the labelling module.
    fn v_rep(&self) -> &ExactMatrix;
    /// The pivotal element on the labelling module.
    fn pivot(&self) -> &ExactMatrix;
}

impl Holonomy for HandleOps {
    type Elem = ExactMatrix;
    fn genus(&self) -> usize {
        1
    }
    fn block(&self, _i: usize, l: Letter) -> &BlockOp<ExactMatrix> {
        self.letter(l)
    }
    fn v_rep(&self) -> &ExactMatrix {
        &self.v_rep
    }
    fn pivot(&self) -> &ExactMatrix {
        &self.pivot
    }
}

impl Holonomy for GenusOps {
    type Elem = crate::handle_rep::KronOp;
    fn genus(&self) -> usize {
        self.g
    }
    fn block(&self, i: usize, l: Letter) -> &BlockOp<Self::Elem> {
        self.letter(i, l)
    }
    fn v_rep(&self) -> &ExactMatrix {
        &self.v_rep
    }
    fn pivot(&self) -> &ExactMatrix {
        &self.pivot
    }
}

fn v_power(v: &ExactMatrix, n: i64) -> Result<ExactMatrix> {
    let base = if n < 0 { v.inverse()? } else { v.clone() };
    let mut acc = ExactMatrix::identity(v.p(), v.rows()).with_bases(&v.row_basis, &v.col_basis);
    for _ in 0..n.unsigned_abs() {
        acc = acc.compose(&base)?;
    }
    Ok(acc)
}

/// v^n · ev(letters), with no simplicity or normalization logic.
pub fn holonomy<H: Holonomy>(h: &H, letters: &[LoopLetter], v_exp: i64) -> Result<BlockOp<H::Elem>> {
    let first = h.block(0, Letter::A);
    let mut acc = BlockOp::identity(first.n, first.zero_elem().clone(), first.one_elem().clone());
    for lt in letters {
        if lt.handle == 0 || lt.handle > h.genus() {
            return Err(Error::Rejected(format!("letter {lt} outside genus {}", h.genus())));
        }
        acc = acc.mul(h.block(lt.handle - 1, lt.letter()));
    }
    Ok(acc.lmul_scalar(&v_power(h.v_rep(), v_exp)?))
}

/// The lift: ev(v^{N(x)}x) for positively oriented x, and the inverse of the lift of x⁻¹
/// otherwise, which equals v^{−N(x⁻¹)}ev(x).
pub fn lift_op<H: Holonomy>(h: &H, w: &LoopWord) -> Result<BlockOp<H::Elem>> {
    if !w.simple {
        return Err(Error::Rejected(format!("'{w}' is not known to be simple; assert it explicitly")));
    }
    if w.g != h.genus() {
        return Err(Error::Dimension(format!("word of genus {} on a genus-{} representation", w.g, h.genus())));
    }
    match w.orientation {
        Orientation::Positive => holonomy(h, &w.letters, w.normalization()),
        Orientation::Negative => holonomy(h, &w.letters, -w.inverse().normalization()),
    }
}

/// tr_q(X) = tr(g X) = Σ_{ij} g_{ij} X_{ji}.
pub fn qtrace_block<T: OpElem>(pivot: &ExactMatrix, x: &BlockOp<T>) -> T {
    let mut acc = x.zero_elem().clone();
    for i in 0..x.n {
        for j in 0..x.n {
            let c = pivot.get(i, j);
            if !c.is_zero() {
                acc = acc.op_add(&x.get(j, i).op_scale(c));
            }
        }
    }
    acc
}

/// W(x) = tr_q(lift of x).
pub fn wilson_op<H: Holonomy>(h: &H, w: &LoopWord) -> Result<H::Elem> {
    Ok(qtrace_block(h.pivot(), &lift_op(h, w)?))
}

/// The Wilson loop of a contractible circle: tr_q of the identity.
pub fn wilson_contractible<H: Holonomy>(h: &H) -> H::Elem {
    let first = h.block(0, Letter::A);
    qtrace_block(h.pivot(), &BlockOp::identity(first.n, first.zero_elem().clone(), first.one_elem().clone()))
}

/// Entries w∘X_{ij}.
pub fn op_left<T: OpElem>(w: &T, x: &BlockOp<T>) -> BlockOp<T> {
    BlockOp::from_fn(x.n, x.zero_elem().clone(), x.one_elem().clone(), |i, j| w.op_mul(x.get(i, j)))
}

/// Entries X_{ij}∘w.
pub fn op_right<T: OpElem>(x: &BlockOp<T>, w: &T) -> BlockOp<T> {
    BlockOp::from_fn(x.n, x.zero_elem().clone(), x.one_elem().clone(), |i, j| x.get(i, j).op_mul(w))
}

fn op_identity_of<T: OpElem>(x: &BlockOp<T>) -> BlockOp<T> {
    BlockOp::identity(x.n, x.zero_elem().clone(), x.one_elem().clone())
}

fn op_sub<T: OpElem>(a: &T, b: &T) -> T {
    a.op_add(&b.op_scale(&-CycNum::one(a.op_p())))
}

/// R_n(w) with R_0 = 0, R_1 = 1, R_{n+1} = wR_n − R_{n−1}, extended to n < 0 by the same
/// recursion.
pub fn chebyshev_r<T: OpElem>(w: &T, zero: &T, one: &T, n: i64) -> T {
    // (lo, hi) = (R_k, R_{k+1}) starting at k = 0
    let (mut lo, mut hi) = (zero.clone(), one.clone());
    if n >= 0 {
        for _ in 0..n {
            let next = op_sub(&w.op_mul(&hi), &lo);
            lo = hi;
            hi = next;
        }
        lo
    } else {
        for _ in 0..(-n) {
            let prev = op_sub(&w.op_mul(&lo), &hi);
            hi = lo;
            lo = prev;
        }
        lo
    }
}

/// M^n = (−1)^{n+1}q^{−n+1}R_n(W)M + (−1)^{n+1}q^{−n}R_{n−1}(W)𝕀 with W = tr_q(M).
pub fn m_power_holds<T: OpElem>(uq: &Uq, pivot: &ExactMatrix, m: &BlockOp<T>, m_inv: &BlockOp<T>, n: i64) -> bool {
    let w = qtrace_block(pivot, m);
    let id = op_identity_of(m);
    let mut lhs = id.clone();
    for _ in 0..n.unsigned_abs() {
        lhs = lhs.mul(if n > 0 { m } else { m_inv });
    }
    let (zero, one) = (m.zero_elem(), m.one_elem());
    let sign = if (n + 1) % 2 == 0 { CycNum::one(uq.p) } else { -CycNum::one(uq.p) };
    let c1 = &sign * uq.q_pow(1 - n);
    let c0 = &sign * uq.q_pow(-n);
    let rhs = op_left(&chebyshev_r(&w, zero, one, n).op_scale(&c1), m).add(&op_left(&chebyshev_r(&w, zero, one, n - 1).op_scale(&c0), &id));
    lhs.equals(&rhs)
}

/// M² + q⁻¹W M + q⁻²𝕀 = 0.
pub fn cayley_hamilton_holds<T: OpElem>(uq: &Uq, pivot: &ExactMatrix, m: &BlockOp<T>) -> bool {
    let w = qtrace_block(pivot, m);
    let lhs = m.mul(m).add(&op_left(&w.op_scale(uq.q_pow(-1)), m)).add(&op_identity_of(m).scale(uq.q_pow(-2)));
    lhs.is_zero()
}

/// The six commutation identities between A, B, BA and W_A, W_B, W_{BA} on handle `i`
/// (0-based), with W_X = tr_q(X).
#[derive(Clone, Debug, Serialize)]
pub struct WawbIdentities {
    pub central: bool,
    pub a_wb: bool,
    pub b_wa: bool,
    pub ba_wa: bool,
    pub ba_wb: bool,
    pub w_ba: bool,
}

impl WawbIdentities {
    pub fn all(&self) -> bool {
        self.central && self.a_wb && self.b_wa && self.ba_wa && self.ba_wb && self.w_ba
    }

    pub fn as_list(&self) -> [(&'static str, bool); 6] {
        [
            ("A,B,BA commute with their traces", self.central),
            ("A W_B = q^-1 W_B A - q qhat BA", self.a_wb),
            ("B W_A = q W_A B + q^2 qhat BA", self.b_wa),
            ("BA W_A = q^-1 W_A BA - q^-2 qhat B", self.ba_wa),
            ("BA W_B = q W_B BA + q^-1 qhat A", self.ba_wb),
            ("W_BA = q^-2 qhat^-1 W_B W_A - q^-1 qhat^-1 W_A W_B", self.w_ba),
        ]
    }
}

pub fn wawb_identities<H: Holonomy>(uq: &Uq, h: &H, i: usize) -> Result<WawbIdentities> {
    let a = h.block(i, Letter::A);
    let b = h.block(i, Letter::B);
    let ba = b.mul(a);
    let pv = h.pivot();
    let (wa, wb, wba) = (qtrace_block(pv, a), qtrace_block(pv, b), qtrace_block(pv, &ba));
    let q = |k: i64| uq.q_pow(k).clone();
    let qh = uq.qhat();
    let qh_inv = qh.inv()?;
    let commutes = |x: &BlockOp<H::Elem>, w: &H::Elem| op_right(x, w).equals(&op_left(w, x));
    let central = commutes(a, &wa) && commutes(b, &wb) && commutes(&ba, &wba);
    let a_wb = op_right(a, &wb).equals(&op_left(&wb, a).scale(&q(-1)).sub(&ba.scale(&(&q(1) * &qh))));
    let b_wa = op_right(b, &wa).equals(&op_left(&wa, b).scale(&q(1)).add(&ba.scale(&(&q(2) * &qh))));
    let ba_wa = op_right(&ba, &wa).equals(&op_left(&wa, &ba).scale(&q(-1)).sub(&b.scale(&(&q(-2) * &qh))));
    let ba_wb = op_right(&ba, &wb).equals(&op_left(&wb, &ba).scale(&q(1)).add(&a.scale(&(&q(-1) * &qh))));
    let rhs = wb.op_mul(&wa).op_scale(&(&q(-2) * &qh_inv)).op_add(&wa.op_mul(&wb).op_scale(&-(&q(-1) * &qh_inv)));
    let w_ba = op_sub(&wba, &rhs).op_is_zero();
    Ok(WawbIdentities { central, a_wb, b_wa, ba_wa, ba_wb, w_ba })
}

/// Whether each target lies in the unital algebra generated by `gens`, using monomials of
/// degree at most `max_degree`. Returns the membership flags and the dimension reached.
pub fn algebra_membership(gens: &[ExactMatrix], targets: &[ExactMatrix], max_degree: usize) -> Result<(Vec<bool>, usize)> {
    let first = gens.first().ok_or_else(|| Error::Rejected("no generators".into()))?;
    let (p, n) = (first.p(), first.rows());
    let flat = |m: &ExactMatrix| m.entries().to_vec();
    let id = ExactMatrix::identity(p, n).with_bases(&first.row_basis, &first.col_basis);
    let mut basis = vec![flat(&id)];
    let mut frontier = vec![id];
    for _ in 0..max_degree {
        let mut next = Vec::new();
        for m in &frontier {
            for g in gens {
                let prod = m.compose(g)?;
                let v = flat(&prod);
                if in_span(p, &basis, &v).is_none() {
                    basis.push(v);
                    next.push(prod);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let flags = targets.iter().map(|t| in_span(p, &basis, &flat(t)).is_some()).collect();
    Ok((flags, basis.len()))
}

/// Basepoint checks on handle 0: tr_q(vB⁻¹A) = tr_q(v⁻¹AB⁻¹), tr_q(vBA⁻¹) = tr_q(v⁻¹A⁻¹B),
/// and whether tr_q(AB) is a multiple of tr_q(BA).
#[derive(Clone, Debug, Serialize)]
pub struct BasepointReport {
    pub binv_a: bool,
    pub b_ainv: bool,
    pub ab_ba_proportional: bool,
}

pub fn basepoint_report(h: &HandleOps) -> Result<BasepointReport> {
    let (a, b, ai, bi) =
        (LoopLetter::new(Gen::A, 1, false), LoopLetter::new(Gen::B, 1, false), LoopLetter::new(Gen::A, 1, true), LoopLetter::new(Gen::B, 1, true));
    let tr = |ls: &[LoopLetter], e: i64| -> Result<ExactMatrix> { Ok(qtrace_block(&h.pivot, &holonomy(h, ls, e)?)) };
    let binv_a = tr(&[bi, a], 1)? == tr(&[a, bi], -1)?;
    let b_ainv = tr(&[b, ai], 1)? == tr(&[ai, b], -1)?;
    let (ab, ba) = (tr(&[a, b], 0)?, tr(&[b, a], 0)?);
    Ok(BasepointReport { binv_a, b_ainv, ab_ba_proportional: ab.projective_ratio(&ba).is_some() })
}

/// Whether an operator commutes with every entry of a block.
pub fn commutes_with_block<T: OpElem>(w: &T, x: &BlockOp<T>) -> bool {
    (0..x.n).all(|i| (0..x.n).all(|j| op_sub(&w.op_mul(x.get(i, j)), &x.get(i, j).op_mul(w)).op_is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center_slf::{chi_minus, chi_plus, Center, Gta, SlfVec};
    use crate::handle_rep::{action_h_op, check_handle_relations, r_matrices, slf_restrict, KronOp, DEFAULT_MAX_DIM};
    use crate::ribbon::Ribbon;
    use crate::uq_modules::{build_module, ModuleSpec};
    use proptest::prelude::*;

    fn setup(p: usize) -> (Uq, Center, Ribbon, HandleOps) {
        let uq = Uq::new(p);
        let center = Center::new(&uq).unwrap();
        let rb = Ribbon::new(&uq, &center, false).unwrap();
        let h = HandleOps::fundamental(&uq, &rb).unwrap();
        (uq, center, rb, h)
    }

    #[test]
    fn parse_examples() {
        let w = parse_loop("b1 a1^-1 b1^-1", 1).unwrap();
        assert_eq!(w.letters, vec![l(Gen::B, 1, false), l(Gen::A, 1, true), l(Gen::B, 1, true)]);
        assert_eq!(w.to_string(), "b1 a1^-1 b1^-1");
        assert!(w.simple);
        assert!(matches!(parse_loop("b1 b1^-1", 1), Err(Error::Parse(_))));
        assert!(matches!(parse_loop("a3", 2), Err(Error::Parse(_))));
        assert!(matches!(parse_loop("c1", 2), Err(Error::Parse(_))));
        assert!(matches!(parse_loop("", 2), Err(Error::Parse(_))));
        assert_eq!(parse_loop("b1a1^2", 1).unwrap().letters.len(), 3);
    }

    #[test]
    fn normalization_calibration() {
        for g in 1..=3 {
            for i in 1..=g {
                assert_eq!(LoopWord::generator(g, Gen::A, i).unwrap().normalization(), 0);
                assert_eq!(LoopWord::generator(g, Gen::B, i).unwrap().normalization(), 0);
                assert_eq!(loop_d(g, i).unwrap().normalization(), 2);
                assert_eq!(loop_e(g, i).unwrap().normalization(), 2 * i as i64);
                assert_eq!(loop_s(g, i).unwrap().normalization(), 2 * i as i64);
                for w in [loop_d(g, i).unwrap(), loop_e(g, i).unwrap(), loop_s(g, i).unwrap()] {
                    assert_eq!(w.orientation, Orientation::Positive);
                    assert_eq!(w.normalization(), w.circle_normalization() + 1);
                }
            }
        }
        let x = parse_loop("b1 a1^-1 b1^-1", 1).unwrap();
        assert_eq!(x.normalization(), 2);
        assert_eq!(x.circle_normalization(), 1);
        assert_eq!(x.gates(), vec![1, 3, 4, 2, 3, 1]);
        assert_eq!(parse_loop("a1^-1", 1).unwrap().orientation, Orientation::Negative);
    }

    #[test]
    fn normalized_twist_images() {
        // v-exponents attached to the images of the generators under the Humphries twists
        let cases = [
            ("b1^-1 a1", 1, 1),
            ("b1 a1", 1, -1),
            ("a1 b1 a1^-1 b1^-1 b1", 2, 0),
            ("b1 a1 b2 a2^-1 b2^-1", 2, 1),
            ("b2 a2 b2^-1 a1^-1 b2", 2, -1),
            ("b2 a2 b2^-1 a1^-1 b1 a1 b1^-1 b2", 2, -3),
        ];
        for (text, g, n) in cases {
            assert_eq!(parse_loop(text, g).unwrap().normalization(), n, "{text}");
        }
    }

    #[test]
    fn lifts_on_the_torus() {
        let (uq, _, rb, h) = setup(2);
        assert!(lift_op(&h, &LoopWord::generator(1, Gen::A, 1).unwrap()).unwrap().equals(&h.a));
        let s1 = loop_s(1, 1).unwrap();
        assert!(lift_op(&h, &s1).unwrap().equals(&h.c_matrix()));
        // the lift of s₁ satisfies the fusion relation
        let pair_mod = build_module(&uq, &ModuleSpec::tensor(vec![ModuleSpec::fundamental(), ModuleSpec::fundamental()]).lifted(1)).unwrap();
        let pair = HandleOps::new(&uq, &rb, &pair_mod).unwrap();
        let (_, r21) = r_matrices(&uq, &rb, &h.module, &h.module).unwrap();
        let x = lift_op(&h, &s1).unwrap();
        let rhs = x.tensor_left(2).rmul_scalar(&r21).mul(&x.tensor_right(2)).rmul_scalar(&r21.inverse().unwrap());
        assert!(lift_op(&pair, &s1).unwrap().equals(&rhs));
        assert!(check_handle_relations(&uq, &rb, &h, &pair).unwrap().all());
        // a negatively oriented loop lifts to the inverse of the lift of its inverse
        let ainv = parse_loop("a1^-1", 1).unwrap();
        assert!(lift_op(&h, &ainv).unwrap().equals(&h.a_inv));
        let x = parse_loop("a1 b1^-1", 1).unwrap();
        assert_eq!(x.orientation, Orientation::Negative);
        let prod = lift_op(&h, &x).unwrap().mul(&lift_op(&h, &x.inverse()).unwrap());
        assert!(prod.is_identity());
        assert!(lift_op(&h, &parse_loop("b1 a1 b1", 1).unwrap()).is_err());
    }

    #[test]
    fn cayley_hamilton_and_powers() {
        for p in [2, 3] {
            let (uq, _, _, h) = setup(p);
            for (m, mi) in [(&h.a, &h.a_inv), (&h.b, &h.b_inv)] {
                assert!(cayley_hamilton_holds(&uq, &h.pivot, m));
                for n in -4..=4 {
                    assert!(m_power_holds(&uq, &h.pivot, m, mi, n), "p={p} n={n}");
                }
            }
        }
    }

    #[test]
    fn inverse_formula_for_m() {
        let (uq, _, _, h) = setup(2);
        let w = qtrace_block(&h.pivot, &h.a);
        let rhs = h.a.scale(&-uq.q_pow(2).clone()).sub(&op_left(&w.op_scale(uq.q_pow(1)), &op_identity_of(&h.a)));
        assert!(h.a_inv.equals(&rhs));
    }

    #[test]
    fn wawb_identities_hold() {
        for p in [2, 3] {
            let (uq, _, _, h) = setup(p);
            let r = wawb_identities(&uq, &h, 0).unwrap();
            assert!(r.all(), "p={p}: {r:?}");
        }
    }

    #[test]
    fn wilson_on_slf() {
        for p in [2, 3] {
            let (uq, center, _, h) = setup(p);
            let gta = Gta::new(&uq, &center).unwrap();
            let wa = slf_restrict(&uq, &gta, &wilson_op(&h, &LoopWord::generator(1, Gen::A, 1).unwrap()).unwrap()).unwrap();
            for s in 1..=p {
                for (eps, idx) in [(1i64, chi_plus(s)), (-1, chi_minus(p, s))] {
                    let val = (uq.q_pow(s as i64) + uq.q_pow(-(s as i64))).scale_i64(-eps);
                    let mut e = SlfVec::unit(p, idx).0;
                    e[idx] = val;
                    assert_eq!(wa.column(idx), e, "p={p} s={s} eps={eps}");
                }
            }
            let wba = wilson_op(&h, &parse_loop("b1^-1 a1", 1).unwrap()).unwrap();
            let wba_slf = slf_restrict(&uq, &gta, &wba).unwrap();
            let chi2 = SlfVec::unit(p, chi_plus(2));
            for j in 0..3 * p - 1 {
                let expect = gta.product(&uq, &chi2, &SlfVec::unit(p, j)).unwrap();
                assert_eq!(wba_slf.column(j), expect.0);
            }
            let circle = wilson_contractible(&h);
            let qd = -(uq.q_pow(1) + uq.q_pow(-1));
            assert_eq!(circle, ExactMatrix::identity(p, uq.dim()).scale(&qd).with_bases(&circle.row_basis, &circle.col_basis));
        }
    }

    #[test]
    fn orientation_and_basepoints() {
        let (_, _, _, h) = setup(2);
        for text in ["a1", "b1", "b1^-1 a1", "b1 a1^-1 b1^-1"] {
            let w = parse_loop(text, 1).unwrap();
            assert_eq!(wilson_op(&h, &w).unwrap(), wilson_op(&h, &w.inverse()).unwrap(), "{text}");
        }
        let r = basepoint_report(&h).unwrap();
        assert!(r.binv_a && r.b_ainv && !r.ab_ba_proportional);
    }

    #[test]
    fn wilson_commutes_with_c_and_generates() {
        let (_, _, _, h) = setup(2);
        let c = h.c_matrix();
        let words: Vec<LoopWord> = canonical_loops(1).into_iter().map(|(_, w)| w).collect();
        let ws: Vec<ExactMatrix> = words.iter().map(|w| wilson_op(&h, w).unwrap()).collect();
        for w in &ws {
            assert!(commutes_with_block(w, &c));
        }
        let gens = [wilson_op(&h, &words[0]).unwrap(), wilson_op(&h, &words[2]).unwrap()];
        let (flags, _) = algebra_membership(&gens, &ws, 4).unwrap();
        assert!(flags.iter().all(|&f| f));
    }

    #[test]
    fn genus_two_wilson_is_invariant() {
        let (uq, _, _, h) = setup(2);
        let gops = GenusOps::new(&uq, &h, 2, DEFAULT_MAX_DIM).unwrap();
        let d2 = loop_d(2, 2).unwrap();
        let lift = lift_op(&gops, &d2).unwrap();
        let expected = holonomy(&gops, &d2.letters, 2).unwrap();
        assert!(lift.equals(&expected));
        let w = wilson_op(&gops, &d2).unwrap();
        for x in [uq.e(), uq.f(), uq.k(1)] {
            let act: KronOp = action_h_op(&uq, &x, 2).unwrap();
            assert!(op_sub(&w.op_mul(&act), &act.op_mul(&w)).op_is_zero());
        }
    }

    fn arb_word(g: usize) -> impl Strategy<Value = Vec<LoopLetter>> {
        prop::collection::vec((0..2u8, 1..=g, any::<bool>()), 1..8)
            .prop_map(|v| v.into_iter().map(|(k, i, inv)| LoopLetter::new(if k == 0 { Gen::B } else { Gen::A }, i, inv)).collect())
    }

    proptest! {
        #[test]
        fn printer_round_trips(ls in arb_word(2)) {
            let red = free_reduce(ls.clone());
            prop_assume!(!red.is_empty());
            let text = red.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ");
            if let Ok(w) = parse_loop(&text, 2) {
                prop_assert_eq!(w.to_string(), text);
            }
        }

        #[test]
        fn reversal_identities(ls in arb_word(2)) {
            let red = free_reduce(ls);
            prop_assume!(!red.is_empty());
            let inv: Vec<_> = red.iter().rev().map(|l| l.inv()).collect();
            let cr = cyclic_reduce(&red);
            let cr_inv: Vec<_> = cr.iter().rev().map(|l| l.inv()).collect();
            prop_assert_eq!(circle_n(cr) + circle_n(&cr_inv), 0);
            prop_assert_eq!(loop_n(&red) + loop_n(&inv), 1);
            prop_assert_eq!(orientation_defect(&red) + orientation_defect(&inv), 1);
        }
    }
}
