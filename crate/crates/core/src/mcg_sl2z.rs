//! Dehn twists acting on symmetric linear forms and on (H*)^{⊗g}.
//!
//! θ₁ is built twice: from the handle representation (z-operators of v^{∓1}) and from the
//! closed formulas on the GTA basis. Matrices on SLF use GTA coordinates with column j the
//! image of the j-th basis form.

use num_complex::Complex64;
use serde::Serialize;

use crate::center_slf::{chi_minus, chi_plus, e_index, g_index, wm_index, wp_index, Center, CenterVec, Gta};
use crate::cyclo::{numeric_embed, CycNum};
use crate::error::{Error, Result};
use crate::handle_rep::{
    action_h_op, guard, iterated_coproduct, left_mult_op, mono_elem, pullback_op, right_mult_op, sandwich_op, z_b_full, z_ops_elem, KronOp,
};
use crate::linalg::ExactMatrix;
use crate::ribbon::{r_inverse, v_value, Ribbon};
use crate::uq_algebra::{AlgElem, DualForm, Uq};
use crate::uq_modules::kronecker;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Twist {
    A,
    B,
    AInv,
    BInv,
}

fn sign(n: i64) -> i64 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn dim_slf(p: usize) -> usize {
    3 * p - 1
}

/// θ₁(t) = ρ_SLF(v_A^{∓1}) or ρ_SLF(v_B^{∓1}).
pub fn theta1_handle(uq: &Uq, rb: &Ribbon, center: &Center, gta: &Gta, t: Twist) -> Result<ExactMatrix> {
    let z = match t {
        Twist::A | Twist::B => &rb.v_inv,
        Twist::AInv | Twist::BInv => &rb.v,
    };
    let ops = z_ops_elem(uq, rb, center, gta, z)?;
    Ok(match t {
        Twist::A | Twist::AInv => ops.z_a,
        Twist::B | Twist::BInv => ops.z_b,
    })
}

// ---------- the scalar ξ ----------

/// Σ_{n=0}^{4p−1} ζ^{n²} = 2(1+i)√p.
pub fn gauss_sum(uq: &Uq) -> CycNum {
    let n = 4 * uq.p as i64;
    let mut acc = CycNum::zero(uq.p);
    for k in 0..n {
        acc += uq.zeta_pow((k * k) % n);
    }
    acc
}

/// The positive square root of p, exactly.
pub fn sqrt_p(uq: &Uq) -> Result<CycNum> {
    let i = uq.zeta_pow(uq.p as i64).clone();
    let den = &uq.c(2) * &(&uq.c(1) + &i);
    gauss_sum(uq).checked_div(&den)
}

/// ξ⁻¹ = (1−i)/(2√p) · q̂^{p−1}/[p−1]! · (−1)^p q^{−(p−3)/2} as printed, which assumes the
/// integral normalized by μ^r(F^{p−1}E^{p−1}K^{p+1}) = 1.
pub fn xi_printed(uq: &Uq) -> Result<CycNum> {
    let p = uq.p as i64;
    let i = uq.zeta_pow(p).clone();
    let pre = (&uq.c(1) - &i).checked_div(&(&uq.c(2) * &sqrt_p(uq)?))?;
    let mut fact = uq.c(1);
    for k in 1..p {
        fact *= &uq.qint(k);
    }
    let qh = uq.qhat().pow((p - 1) as u64);
    let tail = &uq.c(sign(p)) * uq.zeta_pow(3 - p);
    (&(&pre * &qh.checked_div(&fact)?) * &tail).inv()
}

/// ξ with μ^r normalized so that μ^r(K^{p+1}?) has the closed GTA expansion: the printed
/// value divided by ν = (−1)^{p−1}2p[p−1]!².
pub fn xi_closed(uq: &Uq) -> Result<CycNum> {
    xi_printed(uq)?.checked_div(&uq.integral_normalization())
}

fn numeric_qfact(p: usize) -> Complex64 {
    let q = Complex64::from_polar(1.0, std::f64::consts::PI / p as f64);
    let qint = |n: f64| (q.powf(n) - q.powf(-n)) / (q - q.inv());
    (1..p).map(|k| qint(k as f64)).product()
}

/// The printed formula in floating point.
pub fn xi_printed_numeric(p: usize) -> Complex64 {
    let pf = p as f64;
    let q = Complex64::from_polar(1.0, std::f64::consts::PI / pf);
    let qhat = q - q.inv();
    let inv = Complex64::new(1.0, -1.0) / (2.0 * pf.sqrt()) * qhat.powi(p as i32 - 1) / numeric_qfact(p)
        * (sign(p as i64) as f64)
        * Complex64::from_polar(1.0, -std::f64::consts::PI * (pf - 3.0) / (2.0 * pf));
    inv.inv()
}

/// `xi_closed` in floating point.
pub fn xi_numeric(p: usize) -> Complex64 {
    let f = numeric_qfact(p);
    let nu = f * f * (2.0 * p as f64 * sign(p as i64 - 1) as f64);
    xi_printed_numeric(p) / nu
}

/// ξ read off θ₁(τ_b)χ⁺₁ = ξ(−1)^{p−1}χ⁺_p − ξG₁ + …
pub fn xi_from_operator(uq: &Uq, tb: &ExactMatrix) -> CycNum {
    -tb.get(g_index(uq.p, 1), chi_plus(1))
}

// ---------- closed formulas ----------

fn v_inv(uq: &Uq, plus: bool, s: usize) -> CycNum {
    v_value(uq, plus, s).inv().expect("v is invertible")
}

pub fn theta_a_closed(uq: &Uq) -> ExactMatrix {
    let p = uq.p;
    let mut m = ExactMatrix::zeros(p, dim_slf(p), dim_slf(p));
    for s in 1..=p {
        m.set(chi_plus(s), chi_plus(s), v_inv(uq, true, s));
        m.set(chi_minus(p, s), chi_minus(p, s), v_inv(uq, false, s));
    }
    let qh = uq.qhat();
    for s in 1..p {
        let (col, vi) = (g_index(p, s), v_inv(uq, true, s));
        let over = |n: usize| uq.c(n as i64).checked_div(&uq.qint(s as i64)).expect("[s] ≠ 0");
        m.set(g_index(p, s), col, vi.clone());
        m.set(chi_plus(s), col, -(&(&vi * &qh) * &over(p - s)));
        m.set(chi_minus(p, p - s), col, &(&vi * &qh) * &over(s));
    }
    m
}

pub fn theta_b_closed(uq: &Uq, xi: &CycNum) -> ExactMatrix {
    let p = uq.p;
    let pi = p as i64;
    let mut m = ExactMatrix::zeros(p, dim_slf(p), dim_slf(p));
    let qh = uq.qhat();
    for (plus, e) in [(true, 1i64), (false, -1i64)] {
        let me = -e;
        let mepow = |k: i64| if me == 1 { 1 } else { sign(k) };
        for s in 1..=p {
            let si = s as i64;
            let col = if plus { chi_plus(s) } else { chi_minus(p, s) };
            let base = &(xi * uq.q_pow(-(si * si - 1))) * &uq.c(e);
            let lam = &base * &uq.c(mepow(pi - 1) * si);
            for l in 1..p {
                let li = l as i64;
                let c = &lam * &(&uq.c(sign(si) * mepow(pi - li)) * &(uq.q_pow(li * si) + uq.q_pow(-li * si)));
                m.add_at(chi_plus(l), col, &c);
                m.add_at(chi_minus(p, p - l), col, &c);
            }
            m.add_at(chi_plus(p), col, &lam);
            m.add_at(chi_minus(p, p), col, &(&lam * &uq.c(mepow(pi) * sign(si))));
            for j in 1..p {
                let ji = j as i64;
                let c = &(&base * &uq.c(sign(si) * mepow(ji + 1))) * &(&uq.qint(ji) * &uq.qint(ji * si));
                m.add_at(g_index(p, j), col, &c);
            }
        }
    }
    for s in 1..p {
        let si = s as i64;
        let col = g_index(p, s);
        let cs = (&(&(xi * uq.q_pow(-(si * si - 1))) * &uq.c(sign(si) * pi)) * &qh).checked_div(&uq.qint(si)).expect("[s] ≠ 0");
        for j in 1..p {
            let ji = j as i64;
            let k = &(&cs * &uq.c(sign(ji + 1))) * &(&uq.qint(ji) * &uq.qint(ji * si));
            let kq = (&k * &qh).checked_div(&uq.qint(ji)).expect("[j] ≠ 0");
            m.add_at(g_index(p, j), col, &(&k * &uq.c(2)));
            m.add_at(chi_plus(j), col, &(-(&kq * &uq.c(pi - ji))));
            m.add_at(chi_minus(p, p - j), col, &(&kq * &uq.c(ji)));
        }
    }
    m
}

/// Closed form of θ₁(t), with the given ξ.
pub fn theta1_closed(uq: &Uq, t: Twist, xi: &CycNum) -> Result<ExactMatrix> {
    match t {
        Twist::A => Ok(theta_a_closed(uq)),
        Twist::B => Ok(theta_b_closed(uq, xi)),
        Twist::AInv => theta_a_closed(uq).inverse(),
        Twist::BInv => theta_b_closed(uq, xi).inverse(),
    }
}

/// θ₁ on SLF, both constructions cross-checked.
#[derive(Clone, Debug, Serialize)]
pub struct Theta1 {
    pub a: ExactMatrix,
    pub b: ExactMatrix,
    pub a_inv: ExactMatrix,
    pub b_inv: ExactMatrix,
    pub xi: CycNum,
    /// |ξ(operator) − ξ(float formula)|.
    pub xi_numeric_error: f64,
    /// ξ(printed)/ξ(operator); equals ν.
    pub printed_ratio: CycNum,
}

/// Builds θ₁ from the handle representation and fails unless it matches the closed
/// formulas entry-wise, with ξ both extracted from the operator and given by its closed form.
pub fn theta1(uq: &Uq, rb: &Ribbon, center: &Center, gta: &Gta) -> Result<Theta1> {
    let h = |t| theta1_handle(uq, rb, center, gta, t);
    let (a, b, a_inv, b_inv) = (h(Twist::A)?, h(Twist::B)?, h(Twist::AInv)?, h(Twist::BInv)?);
    let xi_op = xi_from_operator(uq, &b);
    let xi = xi_closed(uq)?;
    if xi_op != xi {
        return Err(Error::Consistency(format!("ξ from the operator is {xi_op}, closed form gives {xi}")));
    }
    for (t, m) in [(Twist::A, &a), (Twist::B, &b), (Twist::AInv, &a_inv), (Twist::BInv, &b_inv)] {
        if &theta1_closed(uq, t, &xi)? != m {
            return Err(Error::Consistency(format!("θ₁({t:?}) differs between the two constructions")));
        }
    }
    let xi_numeric_error = (numeric_embed(&xi_op) - xi_numeric(uq.p)).norm();
    let printed_ratio = xi_printed(uq)?.checked_div(&xi)?;
    Ok(Theta1 { a, b, a_inv, b_inv, xi, xi_numeric_error, printed_ratio })
}

// ---------- relations ----------

#[derive(Clone, Debug, Serialize)]
pub struct Sl2zRelations {
    pub braid_exact: bool,
    /// λ with (θ₁(τ_a)θ₁(τ_b))³ = λ·id.
    pub cube_scalar: Option<CycNum>,
    /// μ^l(v⁻¹)/μ^l(v).
    pub expected_scalar: CycNum,
    pub sixth_scalar: Option<CycNum>,
}

impl Sl2zRelations {
    pub fn all(&self) -> bool {
        self.braid_exact
            && self.cube_scalar.as_ref() == Some(&self.expected_scalar)
            && self.sixth_scalar.as_ref() == Some(&(&self.expected_scalar * &self.expected_scalar))
    }
}

fn scalar_of(m: &ExactMatrix) -> Option<CycNum> {
    m.projective_ratio(&ExactMatrix::identity(m.p(), m.rows()))
}

fn plain(m: &ExactMatrix) -> ExactMatrix {
    m.clone().with_bases("", "")
}

pub fn sl2z_relations(uq: &Uq, rb: &Ribbon, th: &Theta1) -> Result<Sl2zRelations> {
    let (a, b) = (plain(&th.a), plain(&th.b));
    let aba = a.compose(&b)?.compose(&a)?;
    let bab = b.compose(&a)?.compose(&b)?;
    let ab = a.compose(&b)?;
    let cube = ab.compose(&ab)?.compose(&ab)?;
    let sixth = cube.compose(&cube)?;
    Ok(Sl2zRelations {
        braid_exact: aba == bab,
        cube_scalar: scalar_of(&cube),
        expected_scalar: rb.modular_scalar(uq)?,
        sixth_scalar: scalar_of(&sixth),
    })
}

// ---------- decomposition ----------

/// θ₁ in the basis (X₀,…,X_p, x₁,…,x_{p−1}, y₁,…,y_{p−1}).
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    /// Columns are the new basis vectors in GTA coordinates.
    pub basis: ExactMatrix,
    pub a: ExactMatrix,
    pub b: ExactMatrix,
    pub p_dim: usize,
    pub w_dim: usize,
    /// θ₁(τ_a), θ₁(τ_b) on W: τ_a w_s = v_s⁻¹w_s and τ_b w_s = c_s Σ_j (−1)^{j+1}[j][js] w_j.
    pub w_a: ExactMatrix,
    pub w_b: ExactMatrix,
    /// Off-diagonal blocks vanish.
    pub block_diagonal: bool,
    /// The second block equals M_a ⊗ W_a and M_b ⊗ W_b with M_a = (1 −1; 0 1), M_b = (1 0; 1 1).
    pub tensor_form: bool,
}

/// X₀ = χ⁻_p, X_s = χ⁺_s + χ⁻_{p−s}, X_p = χ⁺_p.
pub fn x_vector(p: usize, s: usize) -> Vec<CycNum> {
    let mut v = vec![CycNum::zero(p); dim_slf(p)];
    match s {
        0 => v[chi_minus(p, p)] = CycNum::one(p),
        s if s == p => v[chi_plus(p)] = CycNum::one(p),
        s => {
            v[chi_plus(s)] = CycNum::one(p);
            v[chi_minus(p, p - s)] = CycNum::one(p);
        }
    }
    v
}

/// x_s = q̂(p−s)/[s]·χ⁺_s − q̂s/[s]·χ⁻_{p−s}.
pub fn small_x(uq: &Uq, s: usize) -> Vec<CycNum> {
    let p = uq.p;
    let mut v = vec![CycNum::zero(p); dim_slf(p)];
    let f = uq.qhat().checked_div(&uq.qint(s as i64)).expect("[s] ≠ 0");
    v[chi_plus(s)] = &f * &uq.c((p - s) as i64);
    v[chi_minus(p, p - s)] = -(&f * &uq.c(s as i64));
    v
}

/// y_s = G_s − x_s.
pub fn small_y(uq: &Uq, s: usize) -> Vec<CycNum> {
    let mut v: Vec<CycNum> = small_x(uq, s).iter().map(|c| -c).collect();
    v[g_index(uq.p, s)] += &CycNum::one(uq.p);
    v
}

fn w_matrices(uq: &Uq, xi: &CycNum) -> (ExactMatrix, ExactMatrix) {
    let p = uq.p;
    let n = p - 1;
    let wa = ExactMatrix::from_fn(p, n, n, |j, s| if j == s { v_inv(uq, true, s + 1) } else { CycNum::zero(p) });
    let wb = ExactMatrix::from_fn(p, n, n, |j, s| {
        let (j, s) = ((j + 1) as i64, (s + 1) as i64);
        let cs = (&(&(xi * uq.q_pow(-(s * s - 1))) * &uq.c(sign(s) * p as i64)) * &uq.qhat()).checked_div(&uq.qint(s)).expect("[s] ≠ 0");
        &(&cs * &uq.c(sign(j + 1))) * &(&uq.qint(j) * &uq.qint(j * s))
    });
    (wa, wb)
}

pub fn decompose_rep(uq: &Uq, th: &Theta1) -> Result<Decomposition> {
    let p = uq.p;
    let mut cols: Vec<Vec<CycNum>> = (0..=p).map(|s| x_vector(p, s)).collect();
    cols.extend((1..p).map(|s| small_x(uq, s)));
    cols.extend((1..p).map(|s| small_y(uq, s)));
    let basis = ExactMatrix::from_columns(p, dim_slf(p), &cols);
    let binv = basis.inverse()?;
    let a = binv.compose(&plain(&th.a))?.compose(&basis)?;
    let b = binv.compose(&plain(&th.b))?.compose(&basis)?;
    let (pd, n) = (p + 1, dim_slf(p));
    let head: Vec<usize> = (0..pd).collect();
    let tail: Vec<usize> = (pd..n).collect();
    let block_diagonal = [&a, &b].iter().all(|m| m.submatrix(&tail, &head).is_zero() && m.submatrix(&head, &tail).is_zero());
    let (w_a, w_b) = w_matrices(uq, &th.xi);
    let ma = ExactMatrix::from_rows(p, 2, &[vec![uq.c(1), uq.c(-1)], vec![uq.c(0), uq.c(1)]]);
    let mb = ExactMatrix::from_rows(p, 2, &[vec![uq.c(1), uq.c(0)], vec![uq.c(1), uq.c(1)]]);
    let tensor_form = a.submatrix(&tail, &tail) == kronecker(&ma, &w_a) && b.submatrix(&tail, &tail) == kronecker(&mb, &w_b);
    Ok(Decomposition { basis, a, b, p_dim: pd, w_dim: p - 1, w_a, w_b, block_diagonal, tensor_form })
}

// ---------- Lyubashenko–Majid operators ----------

/// 𝒮, 𝒯 on the center (center coordinates) and the intertwiner f(z) = μ^r(gv⁻¹S(z)?) into SLF.
#[derive(Clone, Debug, Serialize)]
pub struct LmReport {
    pub s: ExactMatrix,
    pub t: ExactMatrix,
    pub f: ExactMatrix,
    /// 𝒮² = μ^l(v)μ^l(v⁻¹)·S⁻¹ on the center; the scalar is 1 once μ^l is normalized by
    /// μ^l(v)μ^l(v⁻¹) = 1.
    pub s_squared_scalar: Option<CycNum>,
    pub s_squared_expected: CycNum,
    /// S⁻¹ fixes every central basis element.
    pub antipode_trivial_on_center: bool,
    /// f∘𝒮 = μ^l(v⁻¹)·𝒮′∘f with 𝒮′ = ρ(v_Av_Bv_A).
    pub intertwines_s: bool,
    /// f∘𝒯 = 𝒯′∘f with 𝒯′ = θ₁(τ_a).
    pub intertwines_t: bool,
}

impl LmReport {
    pub fn all(&self) -> bool {
        self.s_squared_scalar.as_ref() == Some(&self.s_squared_expected)
            && self.antipode_trivial_on_center
            && self.intertwines_s
            && self.intertwines_t
    }
}

/// Σ X_k ⊗ Y_k = R⁻¹R′⁻¹ = (R′R)⁻¹, which lies in Ū_q ⊗ Ū_q.
pub fn rr_inverse(uq: &Uq, rb: &Ribbon) -> Result<crate::uq_algebra::TensorElem> {
    let ri = r_inverse(uq, &rb.r);
    let t = uq.mul_tensor(&ri, &uq.flip(&ri));
    if !t.in_uq() {
        return Err(Error::Consistency("R⁻¹R′⁻¹ has half powers of K".into()));
    }
    Ok(t)
}

/// 𝒮(z) = (id⊗μ^l)(R⁻¹(1⊗z)R′⁻¹) = Σ X_k μ^l(Y_k z) for central z.
pub fn lm_s(uq: &Uq, minv: &crate::uq_algebra::TensorElem, z: &AlgElem) -> AlgElem {
    let mut out = AlgElem::zero();
    for (k, c) in &minv.terms {
        let w = uq.integral_left(&uq.mul(&mono_elem(uq, k[1]), z));
        if !w.is_zero() {
            out.add_term(k[0], &(c * &w));
        }
    }
    out
}

/// 𝒯(z) = v⁻¹z.
pub fn lm_t(uq: &Uq, rb: &Ribbon, z: &AlgElem) -> AlgElem {
    uq.mul(&rb.v_inv, z)
}

/// f(z) = μ^r(gv⁻¹S(z)?) as a symmetric linear form.
pub fn intertwiner(uq: &Uq, rb: &Ribbon, z: &AlgElem) -> DualForm {
    let h = uq.mul3(&rb.g, &rb.v_inv, &uq.antipode(z));
    uq.form_from_fn(|x| uq.integral_right(&uq.mul(&h, x)))
}

pub fn lm_operators(uq: &Uq, rb: &Ribbon, center: &Center, gta: &Gta, th: &Theta1) -> Result<LmReport> {
    let p = uq.p;
    let n = dim_slf(p);
    let minv = rr_inverse(uq, rb)?;
    let (mut s_cols, mut t_cols, mut f_cols) = (Vec::new(), Vec::new(), Vec::new());
    let mut antipode_trivial_on_center = true;
    for i in 0..n {
        let mut e = vec![CycNum::zero(p); n];
        e[i] = CycNum::one(p);
        let z = center.basis.combine(&CenterVec(e));
        antipode_trivial_on_center &= uq.antipode_inv(&z) == z;
        s_cols.push(center.coords(uq, &lm_s(uq, &minv, &z))?.0);
        t_cols.push(center.coords(uq, &lm_t(uq, rb, &z))?.0);
        f_cols.push(gta.coords(uq, &intertwiner(uq, rb, &z))?.0);
    }
    let s = ExactMatrix::from_columns(p, n, &s_cols);
    let t = ExactMatrix::from_columns(p, n, &t_cols);
    let f = ExactMatrix::from_columns(p, n, &f_cols);
    let s_prime = plain(&th.a_inv).compose(&plain(&th.b_inv))?.compose(&plain(&th.a_inv))?;
    let mul = uq.integral_left(&rb.v_inv);
    Ok(LmReport {
        s_squared_scalar: scalar_of(&s.compose(&s)?),
        s_squared_expected: &uq.integral_left(&rb.v) * &mul,
        antipode_trivial_on_center,
        intertwines_s: f.compose(&s)? == s_prime.compose(&f)?.scale(&mul),
        intertwines_t: f.compose(&t)? == plain(&th.a).compose(&f)?,
        s,
        t,
        f,
    })
}

/// Center coordinates of v⁻¹e_s and v⁻¹w^±_t predicted by the expansion of v⁻¹ and the
/// products e_se_t = δe_s, e_sw^±_t = δw^±_s, w·w = 0.
pub fn t_expected(uq: &Uq) -> ExactMatrix {
    let p = uq.p;
    let n = dim_slf(p);
    let mut m = ExactMatrix::zeros(p, n, n);
    let qh = uq.qhat();
    for s in 0..=p {
        let vi = v_inv(uq, true, s);
        m.set(e_index(s), e_index(s), vi.clone());
        if s > 0 && s < p {
            let f = (&vi * &qh).checked_div(&uq.qint(s as i64)).expect("[s] ≠ 0");
            m.set(wp_index(p, s), e_index(s), -(&f * &uq.c((p - s) as i64)));
            m.set(wm_index(p, s), e_index(s), &f * &uq.c(s as i64));
            m.set(wp_index(p, s), wp_index(p, s), vi.clone());
            m.set(wm_index(p, s), wm_index(p, s), vi);
        }
    }
    m
}

// ---------- genus g ----------

/// Humphries-type curves; indices are 1-based.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Curve {
    A(usize),
    B(usize),
    D(usize),
    E(usize),
}

/// Ingredients of the twist operators on (H*)^{⊗g}.
pub struct GenusTwists {
    pub g: usize,
    /// θ₁(τ_a), θ₁(τ_b) on all of H*.
    pub a_full: ExactMatrix,
    pub b_full: ExactMatrix,
    /// F(φ) = φ(a_j?b_j) and F⁻¹(φ) = φ(S⁻¹(a_j)?b_j), with R = a_j ⊗ b_j.
    pub f: ExactMatrix,
    pub f_inv: ExactMatrix,
    v_inv: AlgElem,
}

impl GenusTwists {
    pub fn new(uq: &Uq, rb: &Ribbon, g: usize, max_dim: usize) -> Result<Self> {
        guard(uq, g, max_dim)?;
        let r = &rb.r;
        let f = pullback_op(uq, |x| {
            let xe = mono_elem(uq, x);
            let mut acc = AlgElem::zero();
            for (k, c) in &r.terms {
                acc = &acc + &uq.mul3(&mono_elem(uq, k[0]), &xe, &mono_elem(uq, k[1])).scale(c);
            }
            acc
        })?;
        let f_inv = pullback_op(uq, |x| {
            let xe = mono_elem(uq, x);
            let mut acc = AlgElem::zero();
            for (k, c) in &r.terms {
                acc = &acc + &uq.mul3(&uq.antipode_inv_mono_elem(k[0]), &xe, &mono_elem(uq, k[1])).scale(c);
            }
            acc
        })?;
        Ok(GenusTwists { g, a_full: left_mult_op(uq, &rb.v_inv)?, b_full: z_b_full(uq, rb, &rb.v_inv)?, f, f_inv, v_inv: rb.v_inv.clone() })
    }

    fn conj_f(&self, m: &ExactMatrix) -> Result<ExactMatrix> {
        self.f.compose(m)?.compose(&self.f_inv)
    }

    /// θ_g(τ_γ) as a sum of Kronecker products.
    pub fn op(&self, uq: &Uq, curve: Curve) -> Result<KronOp> {
        let g = self.g;
        let (i, needs_two) = match curve {
            Curve::A(i) | Curve::B(i) => (i, false),
            Curve::D(i) | Curve::E(i) => (i, true),
        };
        if i == 0 || i > g {
            return Err(Error::Rejected(format!("curve index {i} outside genus {g}")));
        }
        if needs_two && i < 2 {
            return Err(Error::Rejected(format!("{curve:?}: the closed formula needs i ≥ 2")));
        }
        let id = crate::handle_rep::op_identity(uq);
        let (p, d) = (uq.p, uq.dim());
        match curve {
            Curve::A(_) => Ok(KronOp::local(g, i - 1, &self.a_full)),
            Curve::B(_) => Ok(KronOp::local(g, i - 1, &self.b_full)),
            Curve::D(_) => {
                // φ_{i−1} ↦ φ_{i−1}(S⁻¹(a_j)a_k ? b_k v″ b_j), φ_i ↦ φ_i(S⁻¹(a_l)S⁻¹(v′)a_m ? b_m b_l).
                let mut terms = Vec::new();
                for (legs, c) in iterated_coproduct(uq, &self.v_inv, 2) {
                    let mut t = vec![id.clone(); g];
                    t[i - 2] = self.conj_f(&right_mult_op(uq, &mono_elem(uq, legs[1]))?)?.scale(&c);
                    t[i - 1] = self.conj_f(&left_mult_op(uq, &uq.antipode_inv_mono_elem(legs[0]))?)?;
                    terms.push(t);
                }
                Ok(KronOp::from_terms(p, d, g, terms))
            }
            Curve::E(_) => {
                // φ_k ↦ φ_k(S⁻¹(v^{(2(i−k))}) ? v^{(2(i−k)+1)}) for k < i, and
                // φ_i ↦ φ_i(S⁻¹(a_j)S⁻¹(v^{(1)})a_k ? b_k b_j).
                let mut terms = Vec::new();
                for (legs, c) in iterated_coproduct(uq, &self.v_inv, 2 * i - 1) {
                    let mut t = vec![id.clone(); g];
                    for k in 1..i {
                        let a = 2 * (i - k) - 1;
                        t[k - 1] = sandwich_op(uq, &uq.antipode_inv_mono_elem(legs[a]), &mono_elem(uq, legs[a + 1]))?;
                    }
                    t[i - 1] = self.conj_f(&left_mult_op(uq, &uq.antipode_inv_mono_elem(legs[0]))?)?;
                    t[0] = t[0].scale(&c);
                    terms.push(t);
                }
                Ok(KronOp::from_terms(p, d, g, terms))
            }
        }
    }
}

/// o·(h·v) = h·(o·v) for h ∈ {E, F, K} and v in `vecs`.
pub fn commutes_with_action(uq: &Uq, op: &KronOp, vecs: &[Vec<CycNum>]) -> Result<bool> {
    for h in [uq.e(), uq.f(), uq.k(1)] {
        let act = action_h_op(uq, &h, op.g)?;
        for v in vecs {
            if op.apply(&act.apply(v)) != act.apply(&op.apply(v)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Applies the word right-to-left (the last operator acts first).
pub fn apply_word(ops: &[&KronOp], v: &[CycNum]) -> Vec<CycNum> {
    ops.iter().rev().fold(v.to_vec(), |acc, o| o.apply(&acc))
}

/// λ with x(v) = λ·y(v) for every v in `vecs`, with λ from the first nonzero entry.
pub fn common_ratio(p: usize, xs: &[Vec<CycNum>], ys: &[Vec<CycNum>]) -> Option<CycNum> {
    let mut lam: Option<CycNum> = None;
    for (x, y) in xs.iter().zip(ys) {
        if lam.is_none() {
            if let Some(i) = y.iter().position(|c| !c.is_zero()) {
                lam = Some(x[i].checked_div(&y[i]).ok()?);
            }
        }
        let l = lam.clone().unwrap_or_else(|| CycNum::zero(p));
        if x.iter().zip(y).any(|(a, b)| a != &(&l * b)) {
            return None;
        }
    }
    lam
}

#[derive(Clone, Debug, Serialize)]
pub struct GenusTwistReport {
    pub g: usize,
    pub inv_dim: usize,
    /// Each twist commutes with the H-action on Inv.
    pub commutes_with_action: Vec<(String, bool)>,
    /// τ_{a₂}τ_{b₂}τ_{a₂} = λ·τ_{b₂}τ_{a₂}τ_{b₂} on Inv.
    pub braid_ab_scalar: Option<CycNum>,
    /// Same for the pairs (d₂, b₂) and (e₂, b₂), which meet once.
    pub braid_db_scalar: Option<CycNum>,
    pub braid_eb_scalar: Option<CycNum>,
    /// τ_{b₁} commutes with τ_{b₂} and τ_{a₂}; τ_{d₂} commutes with τ_{a₁} and τ_{a₂}.
    pub disjoint_commute: bool,
}

impl GenusTwistReport {
    pub fn all(&self) -> bool {
        self.commutes_with_action.iter().all(|(_, b)| *b)
            && self.braid_ab_scalar.is_some()
            && self.braid_db_scalar.is_some()
            && self.braid_eb_scalar.is_some()
            && self.disjoint_commute
    }
}

fn braid_scalar(p: usize, x: &KronOp, y: &KronOp, vecs: &[Vec<CycNum>]) -> Option<CycNum> {
    let l: Vec<_> = vecs.iter().map(|v| apply_word(&[x, y, x], v)).collect();
    let r: Vec<_> = vecs.iter().map(|v| apply_word(&[y, x, y], v)).collect();
    common_ratio(p, &l, &r)
}

fn commute_on(x: &KronOp, y: &KronOp, vecs: &[Vec<CycNum>]) -> bool {
    vecs.iter().all(|v| apply_word(&[x, y], v) == apply_word(&[y, x], v))
}

/// The genus-2 checks; `inv` is a basis of Inv((H*)^{⊗2}).
pub fn genus2_twist_report(uq: &Uq, tw: &GenusTwists, inv: &[Vec<CycNum>]) -> Result<GenusTwistReport> {
    if tw.g != 2 {
        return Err(Error::Rejected("the reference configuration is genus 2".into()));
    }
    let p = uq.p;
    let curves = [Curve::A(1), Curve::B(1), Curve::A(2), Curve::B(2), Curve::D(2), Curve::E(2)];
    let ops = curves.iter().map(|c| tw.op(uq, *c)).collect::<Result<Vec<_>>>()?;
    let [a1, b1, a2, b2, d2, e2] = [&ops[0], &ops[1], &ops[2], &ops[3], &ops[4], &ops[5]];
    let mut commutes = Vec::new();
    for (c, o) in curves.iter().zip(&ops) {
        commutes.push((format!("{c:?}"), commutes_with_action(uq, o, inv)?));
    }
    let n = a1.dim();
    let units: Vec<Vec<CycNum>> = (0..n)
        .map(|j| {
            let mut e = vec![CycNum::zero(p); n];
            e[j] = CycNum::one(p);
            e
        })
        .collect();
    let disjoint = commute_on(b1, b2, &units) && commute_on(b1, a2, &units) && commute_on(d2, a1, inv) && commute_on(d2, a2, inv);
    Ok(GenusTwistReport {
        g: 2,
        inv_dim: inv.len(),
        commutes_with_action: commutes,
        braid_ab_scalar: braid_scalar(p, a2, b2, inv),
        braid_db_scalar: braid_scalar(p, d2, b2, inv),
        braid_eb_scalar: braid_scalar(p, e2, b2, inv),
        disjoint_commute: disjoint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::handle_rep::{inv_subspace, slf_restrict, DEFAULT_MAX_DIM};

    fn setup(p: usize) -> (Uq, Center, Ribbon, Gta) {
        let uq = Uq::new(p);
        let center = Center::new(&uq).unwrap();
        let rb = Ribbon::new(&uq, &center, false).unwrap();
        let gta = Gta::new(&uq, &center).unwrap();
        (uq, center, rb, gta)
    }

    #[test]
    fn sqrt_p_is_exact() {
        for p in 2..=6 {
            let uq = Uq::new(p);
            let r = sqrt_p(&uq).unwrap();
            assert_eq!(&r * &r, uq.c(p as i64));
            assert!((numeric_embed(&r).re - (p as f64).sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_xi_matches_float_formula() {
        for p in 2..=6 {
            let uq = Uq::new(p);
            assert!((numeric_embed(&xi_printed(&uq).unwrap()) - xi_printed_numeric(p)).norm() < 1e-9, "p={p}");
            assert!((numeric_embed(&xi_closed(&uq).unwrap()) - xi_numeric(p)).norm() < 1e-9, "p={p}");
        }
    }

    #[test]
    fn two_constructions_agree() {
        for p in 2..=3 {
            let (uq, center, rb, gta) = setup(p);
            let th = theta1(&uq, &rb, &center, &gta).unwrap();
            assert!(th.xi_numeric_error < 1e-9);
            assert_eq!(th.printed_ratio, uq.integral_normalization());
            assert!(th.a.compose(&th.a_inv).unwrap().is_identity());
        }
    }

    #[test]
    fn twist_examples() {
        let (uq, center, rb, gta) = setup(2);
        let th = theta1(&uq, &rb, &center, &gta).unwrap();
        let p = 2;
        assert_eq!(th.a.get(chi_minus(p, 1), chi_minus(p, 1)), &v_inv(&uq, false, 1));
        assert_eq!(th.a.get(chi_plus(1), g_index(p, 1)), &-(&(&v_inv(&uq, true, 1) * &uq.qhat()) * &uq.c(1)));
        // θ₁(τ_b)χ⁺₁ = μ^l(v)⁻¹ μ^r(K^{p+1}?).
        let norm = uq.integral_left(&rb.v).inv().unwrap();
        let g = uq.pivot();
        let form = uq.form_from_fn(|x| uq.integral_right(&uq.mul(&g, x))).scale(&norm);
        assert_eq!(gta.coords(&uq, &form).unwrap().0, th.b.column(chi_plus(1)));
    }

    #[test]
    fn relations_hold() {
        for p in 2..=3 {
            let (uq, center, rb, gta) = setup(p);
            let th = theta1(&uq, &rb, &center, &gta).unwrap();
            let rel = sl2z_relations(&uq, &rb, &th).unwrap();
            assert!(rel.braid_exact, "p={p}");
            assert_eq!(rel.cube_scalar.as_ref(), Some(&rel.expected_scalar), "p={p}");
            assert!(rel.all());
        }
    }

    #[test]
    fn decomposition_blocks() {
        for p in 2..=3 {
            let (uq, center, rb, gta) = setup(p);
            let th = theta1(&uq, &rb, &center, &gta).unwrap();
            let d = decompose_rep(&uq, &th).unwrap();
            assert_eq!((d.p_dim, d.w_dim), (p + 1, p - 1));
            assert_eq!(d.p_dim + 2 * d.w_dim, 3 * p - 1);
            assert!(d.block_diagonal, "p={p}");
            assert!(d.tensor_form, "p={p}");
            // τ_a y_s = v_s⁻¹(y_s − x_s).
            for s in 1..p {
                let ys = small_y(&uq, s);
                let xs = small_x(&uq, s);
                let vi = v_inv(&uq, true, s);
                let want: Vec<CycNum> = ys.iter().zip(&xs).map(|(y, x)| &vi * &(y - x)).collect();
                assert_eq!(th.a.apply(&ys), want);
            }
        }
    }

    #[test]
    fn lm_equivalence() {
        for p in 2..=3 {
            let (uq, center, rb, gta) = setup(p);
            let th = theta1(&uq, &rb, &center, &gta).unwrap();
            let lm = lm_operators(&uq, &rb, &center, &gta, &th).unwrap();
            assert_eq!(lm.t, t_expected(&uq), "p={p}");
            assert!(lm.antipode_trivial_on_center);
            assert_eq!(lm.s_squared_scalar.as_ref(), Some(&lm.s_squared_expected), "p={p}");
            assert!(lm.intertwines_t, "p={p}");
            assert!(lm.intertwines_s, "p={p}");
            assert!(lm.all());
        }
    }

    #[test]
    fn full_twists_restrict_to_theta1() {
        let (uq, center, rb, gta) = setup(2);
        let th = theta1(&uq, &rb, &center, &gta).unwrap();
        let tw = GenusTwists::new(&uq, &rb, 1, DEFAULT_MAX_DIM).unwrap();
        assert_eq!(plain(&slf_restrict(&uq, &gta, &tw.a_full).unwrap()), plain(&th.a));
        assert_eq!(plain(&slf_restrict(&uq, &gta, &tw.b_full).unwrap()), plain(&th.b));
        assert!(tw.f.compose(&tw.f_inv).unwrap().is_identity());
        assert!(matches!(tw.op(&uq, Curve::D(1)), Err(Error::Rejected(_))));
        assert!(matches!(tw.op(&uq, Curve::A(2)), Err(Error::Rejected(_))));
    }

    #[test]
    fn genus_two_twists() {
        let (uq, _center, rb, _gta) = setup(2);
        let tw = GenusTwists::new(&uq, &rb, 2, DEFAULT_MAX_DIM).unwrap();
        let inv = inv_subspace(&uq, 2, DEFAULT_MAX_DIM).unwrap();
        let rep = genus2_twist_report(&uq, &tw, &inv).unwrap();
        assert_eq!(rep.inv_dim, 38);
        for (c, ok) in &rep.commutes_with_action {
            assert!(ok, "{c}");
        }
        assert!(rep.braid_ab_scalar.is_some());
        assert!(rep.braid_db_scalar.is_some());
        assert!(rep.braid_eb_scalar.is_some());
        assert!(rep.disjoint_commute);
    }

    #[test]
    fn twists_fix_their_own_curve() {
        use crate::handle_rep::{GenusOps, HandleOps};
        use crate::linalg::span_dim;
        use crate::loop_wilson::{lift_op, loop_d, loop_e, Gen, LoopWord};
        let (uq, _center, rb, _gta) = setup(2);
        let tw = GenusTwists::new(&uq, &rb, 2, DEFAULT_MAX_DIM).unwrap();
        let h = HandleOps::fundamental(&uq, &rb).unwrap();
        let gops = GenusOps::new(&uq, &h, 2, DEFAULT_MAX_DIM).unwrap();
        let n = uq.dim().pow(2);
        let probes: Vec<Vec<CycNum>> = (0..n)
            .step_by(7)
            .map(|j| {
                let mut e = vec![CycNum::zero(2); n];
                e[j] = CycNum::one(2);
                e
            })
            .collect();
        assert!(span_dim(2, &probes) > 30);
        let cases = [
            (Curve::A(2), LoopWord::generator(2, Gen::A, 2).unwrap()),
            (Curve::B(2), LoopWord::generator(2, Gen::B, 2).unwrap()),
            (Curve::D(2), loop_d(2, 2).unwrap()),
            (Curve::E(2), loop_e(2, 2).unwrap()),
        ];
        for (c, w) in cases {
            let op = tw.op(&uq, c).unwrap();
            let lift = lift_op(&gops, &w).unwrap();
            for i in 0..lift.n {
                for j in 0..lift.n {
                    let x = lift.get(i, j);
                    for v in &probes {
                        assert_eq!(op.apply(&x.apply(v)), x.apply(&op.apply(v)), "{c:?} entry ({i},{j})");
                    }
                }
            }
        }
    }
}
