//! The center Z(Ū_q) in its canonical basis (e₀..e_p, w⁺₁..w⁺_{p−1}, w⁻₁..w⁻_{p−1})
//! and the GTA basis (χ⁺₁..χ⁺_p, χ⁻₁..χ⁻_p, G₁..G_{p−1}) of symmetric linear forms.
//!
//! The center is the commutant of E and F inside the weight-zero span of E^mF^mK^l;
//! e_s and w^±_t are then pinned by their action on the vectors b₀ of the projective covers.

use serde::Serialize;

use crate::cyclo::CycNum;
use crate::error::{Error, Result};
use crate::linalg::ExactMatrix;
use crate::uq_algebra::{AlgElem, DualForm, Uq};
use crate::uq_modules::{build_module, character, trace_form, Module, ModuleSpec, Sign};

/// Coordinates over the canonical basis of the center, length 3p−1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CenterVec(pub Vec<CycNum>);

/// Coordinates over the GTA basis, length 3p−1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlfVec(pub Vec<CycNum>);

impl SlfVec {
    pub fn zero(p: usize) -> Self {
        SlfVec(vec![CycNum::zero(p); 3 * p - 1])
    }
    pub fn unit(p: usize, i: usize) -> Self {
        let mut v = Self::zero(p);
        v.0[i] = CycNum::one(p);
        v
    }
    pub fn add(&self, o: &SlfVec) -> SlfVec {
        SlfVec(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
    pub fn scale(&self, c: &CycNum) -> SlfVec {
        SlfVec(self.0.iter().map(|a| a * c).collect())
    }
}

/// Index of χ⁺_s, χ⁻_s, G_s in the GTA ordering.
pub fn chi_plus(s: usize) -> usize {
    s - 1
}
pub fn chi_minus(p: usize, s: usize) -> usize {
    p + s - 1
}
pub fn g_index(p: usize, s: usize) -> usize {
    2 * p + s - 1
}

/// Index of e_s, w⁺_t, w⁻_t in the canonical center ordering.
pub fn e_index(s: usize) -> usize {
    s
}
pub fn wp_index(p: usize, t: usize) -> usize {
    p + t
}
pub fn wm_index(p: usize, t: usize) -> usize {
    2 * p - 1 + t
}

/// Human-readable GTA labels, in basis order.
pub fn gta_labels(p: usize) -> Vec<String> {
    let mut out: Vec<String> = (1..=p).map(|s| format!("chi+{s}")).collect();
    out.extend((1..=p).map(|s| format!("chi-{s}")));
    out.extend((1..p).map(|s| format!("G{s}")));
    out
}

pub fn center_labels(p: usize) -> Vec<String> {
    let mut out: Vec<String> = (0..=p).map(|s| format!("e{s}")).collect();
    out.extend((1..p).map(|t| format!("w+{t}")));
    out.extend((1..p).map(|t| format!("w-{t}")));
    out
}

/// Projective covers P⁺(s) and P⁻(p−s) of block s, plus X^±(p).
struct BlockModules {
    pplus: Vec<Module>,
    pminus: Vec<Module>,
    xp_plus: Module,
    xp_minus: Module,
}

impl BlockModules {
    fn new(uq: &Uq) -> Result<Self> {
        let p = uq.p;
        let mut pplus = Vec::new();
        let mut pminus = Vec::new();
        for s in 1..p {
            pplus.push(build_module(uq, &ModuleSpec::proj(Sign::Plus, s))?);
            pminus.push(build_module(uq, &ModuleSpec::proj(Sign::Minus, p - s))?);
        }
        Ok(BlockModules {
            pplus,
            pminus,
            xp_plus: build_module(uq, &ModuleSpec::simple(Sign::Plus, p))?,
            xp_minus: build_module(uq, &ModuleSpec::simple(Sign::Minus, p))?,
        })
    }
}

/// Indices of b₀ and a₀ in the standard basis of P^α(s).
fn b0_a0(p: usize, s: usize) -> (usize, usize) {
    (0, s + 2 * (p - s))
}

/// Signature of a central element: (λ_s on blocks, μ⁺, μ⁻, X^±(p) scalars) laid out in
/// canonical-basis order. Also checks z b₀ ∈ span(b₀, a₀) and consistency across a block.
fn signature(uq: &Uq, mods: &BlockModules, z: &AlgElem) -> Result<CenterVec> {
    let p = uq.p;
    let mut out = vec![CycNum::zero(p); 3 * p - 1];
    let scalar = |m: &Module| -> Result<CycNum> {
        let r = m.rep(z)?;
        let c = r.get(0, 0).clone();
        if r != ExactMatrix::identity_in(p, m.dim, &m.basis_label()).scale(&c) {
            return Err(Error::Consistency("central element not scalar on a simple module".into()));
        }
        Ok(c)
    };
    out[e_index(0)] = scalar(&mods.xp_minus)?;
    out[e_index(p)] = scalar(&mods.xp_plus)?;
    for s in 1..p {
        let col = |m: &Module, t: usize| -> Result<(CycNum, CycNum)> {
            let r = m.rep(z)?;
            let (b0, a0) = b0_a0(p, t);
            let v = r.column(b0);
            for (i, c) in v.iter().enumerate() {
                if i != b0 && i != a0 && !c.is_zero() {
                    return Err(Error::Consistency("z·b₀ leaves span(b₀, a₀)".into()));
                }
            }
            Ok((v[b0].clone(), v[a0].clone()))
        };
        let (lp, mp) = col(&mods.pplus[s - 1], s)?;
        let (lm, mm) = col(&mods.pminus[s - 1], p - s)?;
        if lp != lm {
            return Err(Error::Consistency(format!("block {s}: unequal scalars on P⁺({s}) and P⁻({})", p - s)));
        }
        out[e_index(s)] = lp;
        out[wp_index(p, s)] = mp;
        out[wm_index(p, s)] = mm;
    }
    Ok(CenterVec(out))
}

/// Canonical basis of Z(Ū_q).
#[derive(Clone, Debug, Serialize)]
pub struct CenterBasis {
    pub p: usize,
    pub elems: Vec<AlgElem>,
}

impl CenterBasis {
    pub fn e(&self, s: usize) -> &AlgElem {
        &self.elems[e_index(s)]
    }
    pub fn wp(&self, t: usize) -> &AlgElem {
        &self.elems[wp_index(self.p, t)]
    }
    pub fn wm(&self, t: usize) -> &AlgElem {
        &self.elems[wm_index(self.p, t)]
    }
    pub fn combine(&self, v: &CenterVec) -> AlgElem {
        let mut out = AlgElem::zero();
        for (x, c) in self.elems.iter().zip(&v.0) {
            if !c.is_zero() {
                out = &out + &x.scale(c);
            }
        }
        out
    }
}

/// Basis of the commutant of E and F in the weight-zero subalgebra, as AlgElems.
pub fn center_kernel(uq: &Uq) -> Vec<AlgElem> {
    let p = uq.p;
    let dim = uq.dim();
    let cands: Vec<AlgElem> = (0..p).flat_map(|m| (0..2 * p).map(move |l| (m, l))).map(|(m, l)| uq.monomial(m, m, 2 * l as i64)).collect();
    let mut cols = Vec::with_capacity(cands.len());
    for x in &cands {
        let mut col = vec![CycNum::zero(p); 2 * dim];
        let ce = uq.commutator(&uq.e(), x);
        let cf = uq.commutator(&uq.f(), x);
        for (k, c) in &ce.terms {
            col[uq.index_of(k).unwrap()] = c.clone();
        }
        for (k, c) in &cf.terms {
            col[dim + uq.index_of(k).unwrap()] = c.clone();
        }
        cols.push(col);
    }
    let mat = ExactMatrix::from_columns(p, 2 * dim, &cols);
    mat.kernel()
        .into_iter()
        .map(|v| {
            let mut z = AlgElem::zero();
            for (x, c) in cands.iter().zip(&v) {
                if !c.is_zero() {
                    z = &z + &x.scale(c);
                }
            }
            z
        })
        .collect()
}

/// The canonical basis, from the kernel and the signature map.
pub fn center_basis(uq: &Uq) -> Result<CenterBasis> {
    let p = uq.p;
    let ker = center_kernel(uq);
    if ker.len() != 3 * p - 1 {
        return Err(Error::Consistency(format!("center has dimension {} (expected {})", ker.len(), 3 * p - 1)));
    }
    let mods = BlockModules::new(uq)?;
    let sigs = ker.iter().map(|z| signature(uq, &mods, z).map(|v| v.0)).collect::<Result<Vec<_>>>()?;
    let sig = ExactMatrix::from_columns(p, 3 * p - 1, &sigs);
    let inv = sig.inverse().map_err(|_| Error::Consistency("signature map is singular on the center".into()))?;
    let elems = (0..3 * p - 1)
        .map(|j| {
            let mut z = AlgElem::zero();
            for (i, k) in ker.iter().enumerate() {
                let c = inv.get(i, j);
                if !c.is_zero() {
                    z = &z + &k.scale(c);
                }
            }
            z
        })
        .collect();
    Ok(CenterBasis { p, elems })
}

/// Center data bundled with the modules used to read coordinates.
pub struct Center {
    pub basis: CenterBasis,
    mods: BlockModules,
}

impl Center {
    pub fn new(uq: &Uq) -> Result<Self> {
        Ok(Center { basis: center_basis(uq)?, mods: BlockModules::new(uq)? })
    }

    /// Coordinates of a central element; non-central input is rejected.
    pub fn coords(&self, uq: &Uq, z: &AlgElem) -> Result<CenterVec> {
        if !z.in_uq() || !uq.is_central(z) {
            return Err(Error::Rejected("element is not central".into()));
        }
        let v = signature(uq, &self.mods, z)?;
        if &self.basis.combine(&v) != z {
            return Err(Error::Consistency("central coordinates do not reconstruct the element".into()));
        }
        Ok(v)
    }
}

/// C = Σ_j (q^j+q^{-j})/q̂² e_j + Σ_k (w⁺_k + w⁻_k), as a CenterVec (expected coordinates).
pub fn casimir_expected(uq: &Uq) -> CenterVec {
    let p = uq.p;
    let qh2 = (&uq.qhat() * &uq.qhat()).inv().unwrap();
    let mut v = vec![CycNum::zero(p); 3 * p - 1];
    for j in 0..=p {
        v[e_index(j)] = &(uq.q_pow(j as i64) + uq.q_pow(-(j as i64))) * &qh2;
    }
    for k in 1..p {
        v[wp_index(p, k)] = CycNum::one(p);
        v[wm_index(p, k)] = CycNum::one(p);
    }
    CenterVec(v)
}

/// Dimension of the span of 1, C, C², … (Krylov space of multiplication by C).
pub fn casimir_span_dim(uq: &Uq) -> usize {
    let p = uq.p;
    let c = uq.casimir();
    let mut vecs: Vec<Vec<CycNum>> = Vec::new();
    let mut cur = uq.one();
    for _ in 0..=3 * p {
        let v = uq.to_dense_uq(&cur).unwrap();
        let before = crate::linalg::span_dim(p, &vecs);
        vecs.push(v);
        if crate::linalg::span_dim(p, &vecs) == before {
            return before;
        }
        cur = uq.mul(&cur, &c);
    }
    crate::linalg::span_dim(p, &vecs)
}

/// Φ^α_n = (1/2p) Σ_l (α q^{-n})^l K^l.
pub fn phi_elem(uq: &Uq, a: Sign, n: usize) -> AlgElem {
    let p = uq.p;
    let inv = CycNum::from_ratio(p, 1, 2 * p as i64);
    let mut x = AlgElem::zero();
    for l in 0..2 * p as i64 {
        let sign = if a == Sign::Minus && l % 2 == 1 { -1 } else { 1 };
        let c = &(uq.q_pow(-(n as i64) * l) * &uq.c(sign)) * &inv;
        x = &x + &uq.k(l).scale(&c);
    }
    x
}

/// σ: socle a_l ↦ top b_l on P^α(s), as a matrix on the standard basis.
pub fn sigma_matrix(p: usize, s: usize) -> ExactMatrix {
    let mut m = ExactMatrix::zeros(p, 2 * p, 2 * p);
    let a0 = s + 2 * (p - s);
    for l in 0..s {
        m.set(l, a0 + l, CycNum::one(p));
    }
    m
}

/// G_s = tr(σ_s T^{P⁺(s)}) + tr(σ_{p−s} T^{P⁻(p−s)}).
pub fn g_form(uq: &Uq, s: usize) -> Result<DualForm> {
    let p = uq.p;
    let pp = build_module(uq, &ModuleSpec::proj(Sign::Plus, s))?;
    let pm = build_module(uq, &ModuleSpec::proj(Sign::Minus, p - s))?;
    Ok(trace_form(uq, &pp, &sigma_matrix(p, s))?.add(&trace_form(uq, &pm, &sigma_matrix(p, p - s))?))
}

/// GTA basis with the data needed for coordinate extraction.
pub struct Gta {
    pub p: usize,
    pub forms: Vec<DualForm>,
    /// Test elements: Φ⁺_{s−1}e_s, Φ⁻_{s−1}e_{p−s}, w⁺_s (one per basis element).
    probes: Vec<(AlgElem, CycNum)>,
}

impl Gta {
    pub fn new(uq: &Uq, center: &Center) -> Result<Self> {
        let p = uq.p;
        let mut forms = Vec::with_capacity(3 * p - 1);
        for a in [Sign::Plus, Sign::Minus] {
            for s in 1..=p {
                forms.push(character(uq, &build_module(uq, &ModuleSpec::simple(a, s))?)?);
            }
        }
        for s in 1..p {
            forms.push(g_form(uq, s)?);
        }
        let cb = &center.basis;
        let mut probes = Vec::with_capacity(3 * p - 1);
        for s in 1..=p {
            probes.push((uq.mul(&phi_elem(uq, Sign::Plus, s - 1), cb.e(s)), CycNum::one(p)));
        }
        for s in 1..=p {
            probes.push((uq.mul(&phi_elem(uq, Sign::Minus, s - 1), cb.e(p - s)), CycNum::one(p)));
        }
        for s in 1..p {
            probes.push((cb.wp(s).clone(), CycNum::from_ratio(p, 1, s as i64)));
        }
        Ok(Gta { p, forms, probes })
    }

    pub fn combine(&self, v: &SlfVec) -> DualForm {
        let mut out = DualForm::zero(self.p);
        for (f, c) in self.forms.iter().zip(&v.0) {
            if !c.is_zero() {
                out = out.add(&f.scale(c));
            }
        }
        out
    }

    /// Coordinates of a symmetric form; the reconstruction is checked exactly.
    pub fn coords(&self, uq: &Uq, phi: &DualForm) -> Result<SlfVec> {
        if !uq.is_symmetric(phi) {
            return Err(Error::Rejected("form is not symmetric".into()));
        }
        self.coords_unchecked(uq, phi)
    }

    /// Coordinates without the symmetry precheck (the residual check still applies).
    pub fn coords_unchecked(&self, uq: &Uq, phi: &DualForm) -> Result<SlfVec> {
        let v = SlfVec(self.probes.iter().map(|(x, c)| &uq.eval(phi, x) * c).collect());
        if &self.combine(&v) != phi {
            return Err(Error::Consistency("form lies outside the GTA span".into()));
        }
        Ok(v)
    }

    /// Product in SLF computed by the dual product and read back in GTA coordinates.
    pub fn product(&self, uq: &Uq, u: &SlfVec, v: &SlfVec) -> Result<SlfVec> {
        let phi = uq.dual_product(&self.combine(u), &self.combine(v));
        self.coords_unchecked(uq, &phi)
    }

    /// Full (3p−1)² table of basis products.
    pub fn product_table(&self, uq: &Uq) -> Result<Vec<Vec<SlfVec>>> {
        let n = 3 * self.p - 1;
        let mut table = vec![vec![SlfVec::zero(self.p); n]; n];
        for i in 0..n {
            for j in i..n {
                let v = self.coords_unchecked(uq, &uq.dual_product(&self.forms[i], &self.forms[j]))?;
                table[j][i] = v.clone();
                table[i][j] = v;
            }
        }
        Ok(table)
    }
}

/// The product table predicted by the fusion rules for characters and the G-rules:
/// χ⁺₂ and χ⁻₁ act by the stated formulas, χ⁺_{s+1} = χ⁺₂χ⁺_s − χ⁺_{s−1}, χ⁻_s = χ⁻₁χ⁺_s,
/// G_sG_t = 0, and the algebra is commutative.
pub fn expected_product_table(uq: &Uq) -> Vec<Vec<SlfVec>> {
    let p = uq.p;
    let n = 3 * p - 1;
    let one = CycNum::one(p);
    let qi = |k: i64| uq.qint(k);
    // multiplication by χ⁺₂
    let mut m2 = ExactMatrix::zeros(p, n, n);
    // multiplication by χ⁻₁
    let mut m1 = ExactMatrix::zeros(p, n, n);
    for (sg, idx) in [(0usize, 0usize), (1, p)] {
        let other = if sg == 0 { p } else { 0 };
        for s in 1..=p {
            let col = idx + s - 1;
            m1.set(other + s - 1, col, one.clone());
            if s < p {
                if s > 1 {
                    m2.add_at(idx + s - 2, col, &one);
                }
                m2.add_at(idx + s, col, &one);
            } else {
                m2.add_at(idx + p - 2, col, &uq.c(2));
                m2.add_at(other, col, &uq.c(2));
            }
        }
    }
    for s in 1..p {
        let col = g_index(p, s);
        m1.set(g_index(p, p - s), col, -one.clone());
        if s == 1 {
            if p > 2 {
                m2.add_at(g_index(p, 2), col, &qi(2));
            }
        } else if s == p - 1 {
            m2.add_at(g_index(p, p - 2), col, &qi(2));
        } else {
            let inv = qi(s as i64).inv().unwrap();
            m2.add_at(g_index(p, s - 1), col, &(&qi(s as i64 - 1) * &inv));
            m2.add_at(g_index(p, s + 1), col, &(&qi(s as i64 + 1) * &inv));
        }
    }
    // left multiplication operators L(χ⁺_s), L(χ⁻_s)
    let mut lplus = vec![ExactMatrix::identity(p, n)];
    lplus.push(m2.clone());
    for s in 2..p {
        let next = m2.compose(&lplus[s - 1]).unwrap().sub(&lplus[s - 2]);
        lplus.push(next);
    }
    let lminus: Vec<ExactMatrix> = lplus.iter().map(|l| m1.compose(l).unwrap()).collect();
    let mut table = vec![vec![SlfVec::zero(p); n]; n];
    for s in 1..=p {
        for j in 0..n {
            table[chi_plus(s)][j] = SlfVec(lplus[s - 1].column(j));
            table[chi_minus(p, s)][j] = SlfVec(lminus[s - 1].column(j));
        }
    }
    for s in 1..p {
        let gi = g_index(p, s);
        for j in 0..2 * p {
            table[gi][j] = table[j][gi].clone();
        }
    }
    table
}

/// Coordinates of μ^r(K^{p+1}·) predicted in closed form.
pub fn shifted_integral_expected(uq: &Uq) -> SlfVec {
    let p = uq.p;
    let mut v = SlfVec::zero(p);
    let sgn = |k: i64| if k.rem_euclid(2) == 0 { 1 } else { -1 };
    v.0[chi_plus(p)] = uq.c(sgn(p as i64 - 1));
    v.0[chi_minus(p, p)] = CycNum::one(p);
    for s in 1..p {
        let si = s as i64;
        let qq = uq.q_pow(si) + uq.q_pow(-si);
        v.0[chi_plus(s)] = &qq * &uq.c(sgn(si));
        v.0[chi_minus(p, s)] = &qq * &uq.c(sgn(p as i64 - si - 1));
        let qs = uq.qint(si);
        v.0[g_index(p, s)] = &(&qs * &qs) * &uq.c(sgn(si));
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_dimension_and_unit() {
        for p in 2..=4 {
            let uq = Uq::new(p);
            let c = center_basis(&uq).unwrap();
            assert_eq!(c.elems.len(), 3 * p - 1);
            let mut sum = AlgElem::zero();
            for s in 0..=p {
                sum = &sum + c.e(s);
            }
            assert_eq!(sum, uq.one());
            for z in &c.elems {
                assert!(uq.is_central(z));
            }
        }
    }

    #[test]
    fn center_products() {
        let p = 3;
        let uq = Uq::new(p);
        let c = center_basis(&uq).unwrap();
        for s in 0..=p {
            for t in 0..=p {
                let prod = uq.mul(c.e(s), c.e(t));
                assert_eq!(prod, if s == t { c.e(s).clone() } else { AlgElem::zero() });
            }
            for t in 1..p {
                let prod = uq.mul(c.e(s), c.wp(t));
                assert_eq!(prod, if s == t { c.wp(t).clone() } else { AlgElem::zero() });
            }
        }
        for s in 1..p {
            for t in 1..p {
                assert!(uq.mul(c.wp(s), c.wm(t)).is_zero());
                assert!(uq.mul(c.wp(s), c.wp(t)).is_zero());
            }
        }
    }

    #[test]
    fn casimir_coordinates() {
        let uq = Uq::new(3);
        let center = Center::new(&uq).unwrap();
        assert_eq!(center.coords(&uq, &uq.casimir()).unwrap(), casimir_expected(&uq));
        assert_eq!(casimir_span_dim(&uq), 2 * 3);
        assert!(center.coords(&uq, &uq.e()).is_err());
    }

    #[test]
    fn gta_basics() {
        let p = 3;
        let uq = Uq::new(p);
        let center = Center::new(&uq).unwrap();
        let gta = Gta::new(&uq, &center).unwrap();
        assert_eq!(gta.forms[chi_plus(1)], uq.counit_form());
        assert_eq!(gta.coords(&uq, &uq.counit_form()).unwrap(), SlfVec::unit(p, chi_plus(1)));
        let fe = uq.mul(&uq.f(), &uq.e());
        for s in 1..p {
            let g = &gta.forms[g_index(p, s)];
            assert!(uq.is_symmetric(g));
            for l in 0..2 * p as i64 {
                assert!(uq.eval(g, &uq.k(l)).is_zero());
            }
            assert_eq!(uq.eval(g, &fe), uq.c(p as i64));
        }
    }

    #[test]
    fn product_table_matches_rules() {
        for p in 2..=3 {
            let uq = Uq::new(p);
            let center = Center::new(&uq).unwrap();
            let gta = Gta::new(&uq, &center).unwrap();
            assert_eq!(gta.product_table(&uq).unwrap(), expected_product_table(&uq), "p = {p}");
        }
    }

    #[test]
    fn shifted_integral_coordinates() {
        let p = 3;
        let uq = Uq::new(p);
        let center = Center::new(&uq).unwrap();
        let gta = Gta::new(&uq, &center).unwrap();
        let g = uq.pivot();
        let phi = uq.form_from_fn(|x| uq.integral_right(&uq.mul(&g, x)));
        assert_eq!(gta.coords(&uq, &phi).unwrap(), shifted_integral_expected(&uq));
    }
}
