//! Verification suites. Each suite runs a list of exact checks and reports one
//! pass/fail line per check, with optional JSON data.

use std::cell::OnceCell;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::center_slf::{
    casimir_expected, casimir_span_dim, center_kernel, chi_minus, chi_plus, expected_product_table, g_index, shifted_integral_expected, sigma_matrix,
    Center, Gta, SlfVec,
};
use crate::cyclo::{numeric_embed, CycNum};
use crate::error::{Error, Result};
use crate::handle_rep::{
    acts_as_identity, c_fixed_space, check_genus_relations, check_handle_relations, conjugation_law_holds, faithfulness_rank, inv_subspace,
    omega_square_law, r_matrices, slf_restrict, BlockOp, GenusOps, HandleOps, DEFAULT_MAX_DIM,
};
use crate::linalg::{in_span, span_dim, ExactMatrix};
use crate::loop_wilson::{basepoint_report, cayley_hamilton_holds, m_power_holds, parse_loop, wawb_identities, wilson_op, Gen, LoopWord};
use crate::mcg_sl2z::{decompose_rep, genus2_twist_report, lm_operators, sl2z_relations, t_expected, theta1, GenusTwists, Theta1};
use crate::ribbon::{
    check_ribbon_axioms, counit_leg1, drinfeld_u, m_element_product, r_antipode_invariant, r_intertwines_coproduct, r_inverse, r_matrix_with_root,
    ribbon_prefactor, ribbon_prefactor_numeric, yang_baxter_holds, Ribbon,
};
use crate::skein::{boundary_curve_report, skein_report};
use crate::uq_algebra::{AlgElem, DualForm, PbwMonomial, Tensor, Uq};
use crate::uq_modules::{build_module, character, trace_form, Module, ModuleSpec, Sign};

/// Version of the JSON report layout.
pub const REPORT_SCHEMA: u32 = 1;

/// Default tolerance for the numeric cross-checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Hopf,
    Ribbon,
    Center,
    Gta,
    Handle,
    Sl2z,
    Lm,
    Skein,
    Wilson,
    Genus2,
}

impl Suite {
    pub const ALL: [Suite; 10] =
        [Suite::Hopf, Suite::Ribbon, Suite::Center, Suite::Gta, Suite::Handle, Suite::Sl2z, Suite::Lm, Suite::Skein, Suite::Wilson, Suite::Genus2];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Hopf => "hopf",
            Suite::Ribbon => "ribbon",
            Suite::Center => "center",
            Suite::Gta => "gta",
            Suite::Handle => "handle",
            Suite::Sl2z => "sl2z",
            Suite::Lm => "lm",
            Suite::Skein => "skein",
            Suite::Wilson => "wilson",
            Suite::Genus2 => "genus2",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.iter().copied().find(|x| x.name() == s).ok_or_else(|| Error::Parse(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub data: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub p: usize,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Collects checks; a construction error becomes one failing check.
#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: impl Into<String>, pass: bool) {
        self.0.push(Check { name: name.into(), pass, data: Value::Null });
    }

    fn add_data(&mut self, name: impl Into<String>, pass: bool, data: Value) {
        self.0.push(Check { name: name.into(), pass, data });
    }
}

fn finish(suite: Suite, p: usize, mut checks: Checks, outcome: Result<()>) -> SuiteReport {
    if let Err(e) = outcome {
        checks.add_data("construction", false, json!(e.to_string()));
    }
    SuiteReport { suite, p, checks: checks.0 }
}

/// Shared data for one value of p; the handle representation and θ₁ are built on demand.
pub struct Context {
    pub uq: Uq,
    pub center: Center,
    pub rb: Ribbon,
    pub gta: Gta,
    pub tolerance: f64,
    handle: OnceCell<HandleOps>,
    theta: OnceCell<Theta1>,
}

impl Context {
    pub fn new(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::Rejected(format!("p must be at least 2, got {p}")));
        }
        let uq = Uq::new(p);
        let center = Center::new(&uq)?;
        let rb = Ribbon::new(&uq, &center, false)?;
        let gta = Gta::new(&uq, &center)?;
        Ok(Context { uq, center, rb, gta, tolerance: DEFAULT_TOLERANCE, handle: OnceCell::new(), theta: OnceCell::new() })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn p(&self) -> usize {
        self.uq.p
    }

    pub fn handle(&self) -> Result<&HandleOps> {
        if let Some(h) = self.handle.get() {
            return Ok(h);
        }
        let h = HandleOps::fundamental(&self.uq, &self.rb)?;
        Ok(self.handle.get_or_init(|| h))
    }

    pub fn theta(&self) -> Result<&Theta1> {
        if let Some(t) = self.theta.get() {
            return Ok(t);
        }
        let t = theta1(&self.uq, &self.rb, &self.center, &self.gta)?;
        Ok(self.theta.get_or_init(|| t))
    }

    pub fn run(&self, suite: Suite) -> SuiteReport {
        let p = self.p();
        match suite {
            Suite::Hopf => hopf(&self.uq),
            Suite::Ribbon => ribbon(self),
            Suite::Center => {
                let mut r = center(self);
                r.checks.extend(drinfeld(self).checks);
                r
            }
            Suite::Gta => gta(self),
            Suite::Handle => handle(self),
            Suite::Sl2z => sl2z(self),
            Suite::Lm => lm(self),
            Suite::Skein => skein(self),
            Suite::Wilson => wilson(self),
            Suite::Genus2 => genus2(self),
        }
        .with_p(p)
    }
}

impl SuiteReport {
    fn with_p(mut self, p: usize) -> Self {
        self.p = p;
        self
    }
}

/// The JSON report {schema, p, suites: {suite → {check → {pass, data}}}, pass}.
pub fn report_json(p: usize, reports: &[SuiteReport]) -> Value {
    let mut suites = serde_json::Map::new();
    for r in reports {
        let mut checks = serde_json::Map::new();
        for c in &r.checks {
            let mut entry = serde_json::Map::new();
            entry.insert("pass".into(), json!(c.pass));
            if !c.data.is_null() {
                entry.insert("data".into(), c.data.clone());
            }
            checks.insert(c.name.clone(), Value::Object(entry));
        }
        suites.insert(r.suite.name().into(), Value::Object(checks));
    }
    json!({
        "schema": REPORT_SCHEMA,
        "p": p,
        "pass": reports.iter().all(|r| r.passed()),
        "suites": suites,
    })
}

fn zero(p: usize) -> CycNum {
    CycNum::zero(p)
}

fn unit_vec(p: usize, n: usize, i: usize) -> Vec<CycNum> {
    let mut v = vec![zero(p); n];
    v[i] = CycNum::one(p);
    v
}

// ---------- Hopf ----------

fn mono_to_elem(uq: &Uq, m: PbwMonomial) -> AlgElem {
    let mut x = AlgElem::zero();
    x.add_term(m, &CycNum::one(uq.p));
    x
}

/// Hopf axioms on every PBW monomial, S² = Ad(K^{p+1}), and the closed coproduct formula
/// against the product of generator coproducts.
pub fn hopf(uq: &Uq) -> SuiteReport {
    let mut ch = Checks::default();
    let outcome = hopf_checks(uq, &mut ch);
    finish(Suite::Hopf, uq.p, ch, outcome)
}

fn hopf_checks(uq: &Uq, ch: &mut Checks) -> Result<()> {
    let p = uq.p;
    let n = uq.dim();

    let mut formula_ok = true;
    for i in 0..uq.dim_ext() {
        let m = uq.basis_mono_ext(i);
        formula_ok &= uq.coproduct_mono_formula(m) == uq.coproduct_mono_by_products(m);
    }
    ch.add_data("coproduct closed formula equals product of generator coproducts", formula_ok, json!({ "monomials": uq.dim_ext() }));

    let mut coassoc = true;
    let mut counit = true;
    let mut antipode = true;
    for i in 0..n {
        let x = uq.monomial_elem(i);
        let mut left = Tensor::<3>::zero();
        let mut right = Tensor::<3>::zero();
        let mut eps_left = AlgElem::zero();
        let mut eps_right = AlgElem::zero();
        let mut s_left = AlgElem::zero();
        let mut s_right = AlgElem::zero();
        for (a, b, c) in uq.delta_entries(i) {
            let (ma, mb) = (uq.basis_mono(*a), uq.basis_mono(*b));
            for (a1, a2, c2) in uq.delta_entries(*a) {
                left.add_term([uq.basis_mono(*a1), uq.basis_mono(*a2), mb], &(c * c2));
            }
            for (b1, b2, c2) in uq.delta_entries(*b) {
                right.add_term([ma, uq.basis_mono(*b1), uq.basis_mono(*b2)], &(c * c2));
            }
            eps_left = &eps_left + &mono_to_elem(uq, mb).scale(&(c * &uq.counit(&mono_to_elem(uq, ma))));
            eps_right = &eps_right + &mono_to_elem(uq, ma).scale(&(c * &uq.counit(&mono_to_elem(uq, mb))));
            s_left = &s_left + &uq.mul(&uq.antipode_mono_elem(ma), &mono_to_elem(uq, mb)).scale(c);
            s_right = &s_right + &uq.mul(&mono_to_elem(uq, ma), &uq.antipode_mono_elem(mb)).scale(c);
        }
        coassoc &= left == right;
        counit &= eps_left == x && eps_right == x;
        let unit = uq.scalar(&uq.counit(&x));
        antipode &= s_left == unit && s_right == unit;
    }
    ch.add("coassociativity on every monomial", coassoc);
    ch.add("counit axiom on every monomial", counit);
    ch.add("antipode axiom on every monomial", antipode);

    let gens = [uq.e(), uq.f(), uq.k(1), uq.k(-1)];
    let mut delta_hom = true;
    let mut eps_hom = true;
    let mut s_anti = true;
    for i in 0..n {
        let x = uq.monomial_elem(i);
        let dx = uq.coproduct(&x);
        let (ex, sx) = (uq.counit(&x), uq.antipode(&x));
        for g in &gens {
            let gx = uq.mul(g, &x);
            let xg = uq.mul(&x, g);
            delta_hom &= uq.coproduct(&gx) == uq.mul_tensor(&uq.coproduct(g), &dx);
            delta_hom &= uq.coproduct(&xg) == uq.mul_tensor(&dx, &uq.coproduct(g));
            eps_hom &= uq.counit(&gx) == &uq.counit(g) * &ex;
            s_anti &= uq.antipode(&gx) == uq.mul(&sx, &uq.antipode(g));
            s_anti &= uq.antipode(&xg) == uq.mul(&uq.antipode(g), &sx);
        }
    }
    ch.add("coproduct is multiplicative on generator products", delta_hom);
    ch.add("counit is multiplicative on generator products", eps_hom);
    ch.add("antipode is anti-multiplicative on generator products", s_anti);

    let g = uq.pivot();
    let g_inv = uq.k(-(p as i64 + 1));
    let mut pivot = true;
    let mut inverse = true;
    for i in 0..n {
        let x = uq.monomial_elem(i);
        let s = uq.antipode(&x);
        pivot &= uq.antipode(&s) == uq.mul3(&g, &x, &g_inv);
        inverse &= uq.antipode_inv(&s) == x;
    }
    ch.add("S^2 is conjugation by K^(p+1) on every monomial", pivot);
    ch.add("S^-1 inverts S on every monomial", inverse);

    // (μ^r⊗id)Δ(x) = μ^r(x)1 and (id⊗μ^l)Δ(x) = μ^l(x)1.
    let mu_r = uq.integral_right_form();
    let mu_l = uq.integral_left_form();
    let mut right_inv = true;
    let mut left_inv = true;
    for i in 0..n {
        let mut r = AlgElem::zero();
        let mut l = AlgElem::zero();
        for (a, b, c) in uq.delta_entries(i) {
            if !mu_r.values[*a].is_zero() {
                r.add_term(uq.basis_mono(*b), &(c * &mu_r.values[*a]));
            }
            if !mu_l.values[*b].is_zero() {
                l.add_term(uq.basis_mono(*a), &(c * &mu_l.values[*b]));
            }
        }
        right_inv &= r == uq.scalar(&mu_r.values[i]);
        left_inv &= l == uq.scalar(&mu_l.values[i]);
    }
    ch.add("right integral is right invariant", right_inv);
    ch.add("left integral is left invariant", left_inv);
    let k2 = uq.k(2);
    let mut lr = true;
    for i in 0..n {
        lr &= mu_l.values[i] == uq.integral_right(&uq.mul(&k2, &uq.monomial_elem(i)));
    }
    ch.add("mu^l = mu^r(K^2 .)", lr);
    let top = uq.monomial(p - 1, p - 1, 2 * (p as i64 + 1));
    ch.add_data(
        "mu^r normalization",
        uq.integral_right(&top) == uq.integral_normalization() && uq.integral_right(&uq.one()).is_zero(),
        json!(uq.integral_normalization().to_string()),
    );

    let mut quasi = true;
    let s2: Vec<AlgElem> = (0..n).map(|j| uq.mul3(&g, &uq.monomial_elem(j), &g_inv)).collect();
    for i in 0..n {
        let x = uq.monomial_elem(i);
        for (j, s2y) in s2.iter().enumerate() {
            let y = uq.monomial_elem(j);
            quasi &= uq.integral_right(&uq.mul(&x, &y)) == uq.integral_right(&uq.mul(s2y, &x));
        }
    }
    ch.add("mu^r(xy) = mu^r(S^2(y)x) on all basis pairs", quasi);

    let eps = uq.counit_form();
    let mut unit = true;
    for i in 0..n {
        let d = DualForm { values: unit_vec(p, n, i) };
        unit &= uq.dual_product(&eps, &d) == d && uq.dual_product(&d, &eps) == d;
    }
    ch.add("counit is the unit of the dual product", unit);
    Ok(())
}

// ---------- ribbon ----------

pub fn ribbon(ctx: &Context) -> SuiteReport {
    let mut ch = Checks::default();
    let outcome = ribbon_checks(ctx, &mut ch);
    finish(Suite::Ribbon, ctx.p(), ch, outcome)
}

fn ribbon_checks(ctx: &Context, ch: &mut Checks) -> Result<()> {
    let (uq, rb) = (&ctx.uq, &ctx.rb);
    let p = uq.p;
    let prod = m_element_product(uq, &rb.r);
    ch.add_data("RR' product equals the closed formula", prod == rb.m, json!({ "terms": rb.m.len() }));
    ch.add("RR' has no half powers of K", rb.m.in_uq());
    let r_inv = r_inverse(uq, &rb.r);
    ch.add("R R^-1 = 1", uq.mul_tensor(&rb.r, &r_inv) == uq.tensor2(&uq.one(), &uq.one()));
    ch.add("(eps x id)(R) = 1", counit_leg1(&rb.r) == uq.one());
    ch.add("(eps x id)(RR') = 1", counit_leg1(&rb.m) == uq.one());
    if p <= 3 {
        ch.add("Yang-Baxter equation", yang_baxter_holds(uq, &rb.r));
    }
    ch.add("R Delta(x) = Delta^op(x) R for E, F, K^(1/2)", r_intertwines_coproduct(uq, &rb.r));
    ch.add("(S x S)(R) = R", r_antipode_invariant(uq, &rb.r));
    let ax = check_ribbon_axioms(uq, rb, true)?;
    ch.add("v central", ax.central);
    ch.add("S(v) = v", ax.antipode_fixed);
    ch.add("eps(v) = 1", ax.counit_one);
    ch.add("v v^-1 = 1", ax.inverse);
    ch.add("R'R Delta(v) = v x v", ax.coproduct);
    ch.add("v^2 = u S(u)", ax.square);
    ch.add("u v^-1 = K^(p+1)", ax.pivot && rb.g == uq.pivot());
    ch.add("v on simple modules matches (-1)^(s-1) q^(-(s^2-1)/2)", ax.eigenvalues);
    let (c, squared) = ribbon_prefactor(uq, &rb.v)?;
    let err = (numeric_embed(&c) - ribbon_prefactor_numeric(p)).norm();
    ch.add_data("ribbon prefactor squares to -i/(2p)", squared, json!(c.to_string()));
    ch.add_data("ribbon prefactor equals (1-i)/(2 sqrt p) numerically", err < ctx.tolerance, json!({ "error": err }));
    let rank = rb.factorizability_rank(uq);
    ch.add_data("factorizability rank is 2p^3", rank == 2 * p * p * p, json!(rank));
    // the other square root of q changes R by a central involution only
    let r_alt = r_matrix_with_root(uq, -1);
    let u_alt = drinfeld_u(uq, &r_alt);
    ch.add("RR' independent of the choice of q^(1/2)", m_element_product(uq, &r_alt) == rb.m);
    ch.add("u for the other root is u K^p", u_alt == uq.mul(&rb.u, &uq.k(p as i64)));
    Ok(())
}

// ---------- center and Drinfeld map ----------

pub fn center(ctx: &Context) -> SuiteReport {
    let mut ch = Checks::default();
    let outcome = center_checks(ctx, &mut ch);
    finish(Suite::Center, ctx.p(), ch, outcome)
}

fn center_checks(ctx: &Context, ch: &mut Checks) -> Result<()> {
    let (uq, c) = (&ctx.uq, &ctx.center.basis);
    let p = uq.p;
    let dim = center_kernel(uq).len();
    ch.add_data("dim Z = 3p-1", dim == 3 * p - 1 && c.elems.len() == 3 * p - 1, json!(dim));
    ch.add("canonical basis is central", c.elems.iter().all(|z| uq.is_central(z)));
    let mut sum = AlgElem::zero();
    for s in 0..=p {
        sum = &sum + c.e(s);
    }
    ch.add("sum of e_s is 1", sum == uq.one());
    let mut table = true;
    for s in 0..=p {
        for t in 0..=p {
            let want = if s == t { c.e(s).clone() } else { AlgElem::zero() };
            table &= uq.mul(c.e(s), c.e(t)) == want;
        }
        for t in 1..p {
            let want = |x: &AlgElem| if s == t { x.clone() } else { AlgElem::zero() };
            table &= uq.mul(c.e(s), c.wp(t)) == want(c.wp(t));
            table &= uq.mul(c.e(s), c.wm(t)) == want(c.wm(t));
        }
    }
    for s in 1..p {
        for t in 1..p {
            table &= uq.mul(c.wp(s), c.wp(t)).is_zero() && uq.mul(c.wm(s), c.wm(t)).is_zero() && uq.mul(c.wp(s), c.wm(t)).is_zero();
        }
    }
    ch.add("canonical basis multiplication table", table);
    let cas = ctx.center.coords(uq, &uq.casimir())?;
    ch.add_data("Casimir in the canonical basis", cas == casimir_expected(uq), serde_json::to_value(&cas.0).unwrap_or(Value::Null));
    let span = casimir_span_dim(uq);
    ch.add_data("dim of the polynomial span of C is 2p", span == 2 * p, json!(span));
    // e_s and w⁺_t + w⁻_t are polynomials in C
    let cm = uq.casimir();
    let mut powers = vec![uq.to_dense_uq(&uq.one())?];
    let mut cur = uq.one();
    for _ in 1..2 * p {
        cur = uq.mul(&cur, &cm);
        powers.push(uq.to_dense_uq(&cur)?);
    }
    let mut in_c = true;
    for s in 0..=p {
        in_c &= in_span(p, &powers, &uq.to_dense_uq(c.e(s))?).is_some();
    }
    for t in 1..p {
        in_c &= in_span(p, &powers, &uq.to_dense_uq(&(c.wp(t) + c.wm(t)))?).is_some();
    }
    ch.add("e_s and w+_t + w-_t lie in the span of powers of C", in_c);
    Ok(())
}

/// The Drinfeld map on SLF: algebra isomorphism onto Z and its values on χ⁺₂, φ_v, φ_{v⁻¹}.
pub fn drinfeld(ctx: &Context) -> SuiteReport {
    let mut ch = Checks::default();
    let outcome = drinfeld_checks(ctx, &mut ch);
    finish(Suite::Center, ctx.p(), ch, outcome)
}

fn drinfeld_checks(ctx: &Context, ch: &mut Checks) -> Result<()> {
    let (uq, rb, gta) = (&ctx.uq, &ctx.rb, &ctx.gta);
    let p = uq.p;
    let n = 3 * p - 1;
    let images: Vec<AlgElem> = gta.forms.iter().map(|f| rb.drinfeld_map(uq, f)).collect();
    ch.add("drinfeld: D(SLF) is central", images.iter().all(|z| uq.is_central(z)));
    let dense = images.iter().map(|z| uq.to_dense_uq(z)).collect::<Result<Vec<_>>>()?;
    let rank = span_dim(p, &dense);
    ch.add_data("drinfeld: images of the GTA basis are a basis of Z", rank == n, json!(rank));
    let table = gta.product_table(uq)?;
    let mut mult = true;
    for i in 0..n {
        for j in i..n {
            let mut rhs = AlgElem::zero();
            for (k, c) in table[i][j].0.iter().enumerate() {
                if !c.is_zero() {
                    rhs = &rhs + &images[k].scale(c);
                }
            }
            mult &= uq.mul(&images[i], &images[j]) == rhs;
        }
    }
    ch.add_data("drinfeld: D(phi psi) = D(phi) D(psi) on all GTA pairs", mult, json!({ "pairs": n * (n + 1) / 2 }));
    ch.add("drinfeld: D(eps) = 1", rb.drinfeld_map(uq, &uq.counit_form()) == uq.one());
    let qh = uq.qhat();
    ch.add("drinfeld: D(chi+_2) = -qhat^2 C", images[chi_plus(2)] == uq.casimir().scale(&-(&qh * &qh)));
    ch.add("drinfeld: D(phi_v) = v", rb.drinfeld_map(uq, &rb.phi_v(uq, false)?) == rb.v);
    ch.add("drinfeld: D(phi_v^-1) = v^-1", rb.drinfeld_map(uq, &rb.phi_v(uq, true)?) == rb.v_inv);
    Ok(())
}

// ---------- GTA basis ----------

pub fn gta(ctx: &Context) -> SuiteReport {
    let mut ch = Checks::default();
    let outcome = gta_checks(ctx, &mut ch);
    finish(Suite::Gta, ctx.p(), ch, outcome)
}

/// G_s recomputed in the standard basis with b_l ↦ b_l + λa_l on P⁺(s) and b_l ↦ b_l + λ′a_l
/// on P⁻(p−s): the trace of σ′T′ = P⁻¹σ... equals tr(PσP⁻¹T) in the old basis.
pub fn g_form_gauged(uq: &Uq, s: usize, lambda: &CycNum, lambda2: &CycNum) -> Result<DualForm> {
    let p = uq.p;
    let gauged = |t: usize, l: &CycNum| -> Result<ExactMatrix> {
        let mut pm = ExactMatrix::identity(p, 2 * p);
        let a0 = t + 2 * (p - t);
        for i in 0..t {
            pm.set(a0 + i, i, l.clone());
        }
        pm.compose(&sigma_matrix(p, t))?.compose(&pm.inverse()?)
    };
    let pp = build_module(uq, &ModuleSpec::proj(Sign::Plus, s))?;
    let pn = build_module(uq, &ModuleSpec::proj(Sign::Minus, p - s))?;
    Ok(trace_form(uq, &pp, &gauged(s, lambda)?)?.add(&trace_form(uq, &pn, &gauged(p - s, lambda2)?)?))
}

fn gta_checks(ctx: &Context, ch: &mut Checks) -> Result<()> {
    let (uq, gta) = (&ctx.uq, &ctx.gta);
    let p = uq.p;
    let n = 3 * p - 1;
    let slf = inv_subspace(uq, 1, DEFAULT_MAX_DIM)?;
    ch.add_data("dim SLF = 3p-1", slf.len() == n, json!(slf.len()));
    ch.add("GTA forms are symmetric", gta.forms.iter().all(|f| uq.is_symmetric(f)));
    let vals: Vec<Vec<CycNum>> = gta.forms.iter().map(|f| f.values.clone()).collect();
    ch.add("GTA forms are linearly independent", span_dim(p, &vals) == n);
    ch.add("chi+_1 = eps", gta.forms[chi_plus(1)] == uq.counit_form());
    let fe = uq.mul(&uq.f(), &uq.e());
    let mut g_vals = true;
    for s in 1..p {
        let g = &gta.forms[g_index(p, s)];
        g_vals &= (0..2 * p as i64).all(|l| uq.eval(g, &uq.k(l)).is_zero());
        g_vals &= uq.eval(g, &fe) == uq.c(p as i64);
    }
    ch.add("G_s(K^l) = 0 and G_s(FE) = p", g_vals);
    let mut off = true;
    for f in &gta.forms {
        for i in 0..uq.dim() {
            let m = uq.basis_mono(i);
            if m.m != m.n {
                off &= f.values[i].is_zero();
            }
        }
    }
    ch.add("symmetric forms vanish on E^m F^n K^l with m != n", off);

    let table = gta.product_table(uq)?;
    let expected = expected_product_table(uq);
    ch.add_data("full GTA multiplication table", table == expected, json!({ "entries": n * n }));
    let mut comm = true;
    for i in 0..n {
        for j in 0..n {
            comm &= table[i][j] == table[j][i];
        }
    }
    ch.add("SLF is commutative", comm);
    let mul = |u: &SlfVec, v: &SlfVec| -> SlfVec {
        let mut out = SlfVec::zero(p);
        for (i, a) in u.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in v.0.iter().enumerate() {
                if !b.is_zero() {
                    out = out.add(&table[i][j].scale(&(a * b)));
                }
            }
        }
        out
    };
    let mut assoc = true;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let (a, b, c) = (SlfVec::unit(p, i), SlfVec::unit(p, j), SlfVec::unit(p, k));
                assoc &= mul(&mul(&a, &b), &c) == mul(&a, &mul(&b, &c));
            }
        }
    }
    ch.add("GTA structure constants are associative", assoc);

    let mut gauge = true;
    for s in 1..p {
        for (l1, l2) in [(uq.c(1), uq.c(0)), (uq.c(0), uq.c(1)), (uq.q_pow(1).clone(), uq.c(-3))] {
            gauge &= g_form_gauged(uq, s, &l1, &l2)? == gta.forms[g_index(p, s)];
        }
    }
    ch.add("G_s is independent of the gauge b -> b + lambda a", gauge);

    let g1 = SlfVec::unit(p, g_index(p, 1));
    let mut verma = true;
    for s in 1..p {
        let x = SlfVec::unit(p, chi_plus(s)).add(&SlfVec::unit(p, chi_minus(p, p - s)));
        for t in 1..p {
            verma &= gta.product(uq, &x, &SlfVec::unit(p, g_index(p, t)))?.0.iter().all(|c| c.is_zero());
        }
        let gs = gta.product(uq, &SlfVec::unit(p, chi_plus(s)), &g1)?.scale(&uq.qint(s as i64).inv()?);
        verma &= gs == SlfVec::unit(p, g_index(p, s));
    }
    verma &= gta.product(uq, &SlfVec::unit(p, chi_plus(p)), &g1)?.0.iter().all(|c| c.is_zero());
    ch.add("(chi+_s + chi-_(p-s)) G_t = 0, G_s = chi+_s G_1/[s], chi+_p G_1 = 0", verma);
    // the span of the X vectors is an ideal
    let xs: Vec<SlfVec> = (0..=p).map(|s| SlfVec(crate::mcg_sl2z::x_vector(p, s))).collect();
    let xs_vals: Vec<Vec<CycNum>> = xs.iter().map(|x| x.0.clone()).collect();
    let mut ideal = true;
    for x in &xs {
        for j in 0..n {
            ideal &= in_span(p, &xs_vals, &mul(x, &SlfVec::unit(p, j)).0).is_some();
        }
    }
    ch.add("span(X_0..X_p) is an ideal", ideal);

    let mut proj = true;
    for s in 1..p {
        for (a, idx, idx2) in [(Sign::Plus, chi_plus(s), chi_minus(p, p - s)), (Sign::Minus, chi_minus(p, s), chi_plus(p - s))] {
            let m = build_module(uq, &ModuleSpec::proj(a, s))?;
            let mut want = SlfVec::zero(p);
            want.0[idx] = uq.c(2);
            want.0[idx2] = uq.c(2);
            proj &= gta.coords(uq, &character(uq, &m)?)? == want;
        }
    }
    ch.add("character of P(s) is 2(chi_s + chi_(p-s))", proj);

    let g = uq.pivot();
    let phi = uq.form_from_fn(|x| uq.integral_right(&uq.mul(&g, x)));
    let coords = gta.coords(uq, &phi)?;
    ch.add_data("coordinates of mu^r(K^(p+1) .)", coords == shifted_integral_expected(uq), serde_json::to_value(&coords.0).unwrap_or(Value::Null));
    Ok(())
}

// ---------- handle representation ----------

fn fundamental_pair(ctx: &Context) -> Result<(Module, HandleOps)> {
    let uq = &ctx.uq;
    let fund = build_module(uq, &ModuleSpec::fundamental())?;
    let pair_mod = build_module(uq, &ModuleSpec::tensor(vec![ModuleSpec::fundamental(), ModuleSpec::fundamental()]))?;
    Ok((fund, HandleOps::new(uq, &ctx.rb, &pair_mod)?))
}

/// R₁₂M₁R₂₁M₂ = M₂R₁₂M₁R₂₁.
fn reflection_holds(m: &BlockOp<ExactMatrix>, d: usize, r12: &ExactMatrix, r21: &ExactMatrix) -> bool {
    let m1 = m.tensor_left(d);
    let m2 = m.tensor_right(d);
    let lhs = m1.lmul_scalar(r12).rmul_scalar(r21).mul(&m2);
    let rhs = m2.mul(&m1.lmul_scalar(r12).rmul_scalar(r21));
    lhs.equals(&rhs)
}

pub fn handle(ctx: &Context) -> SuiteReport {
    let mut ch = Checks::default();
    let outcome = handle_checks(ctx, &mut ch);
    finish(Suite::Handle, ctx.p(), ch, outcome)
}

fn handle_checks(ctx: &Context, ch: &mut Checks) -> Result<()> {
    let (uq, rb, gta) = (&ctx.uq, &ctx.rb, &ctx.gta);
    let p = uq.p;
    let h = ctx.handle()?;
    let (_, pair) = fundamental_pair(ctx)?;
    let rel = check_handle_relations(uq, rb, h, &pair)?;
    ch.add("A, B invertible with the stated inverses", rel.inverses);
    ch.add("fusion relation for A", rel.fusion_a);
    ch.add("fusion relation for B", rel.fusion_b);
    ch.add("handle exchange relation", rel.exchange);
    ch.add("C from A, B equals C from L(+-)", rel.c_two_routes);
    let (r12, r21) = r_matrices(uq, rb, &h.module, &h.module)?;
    let d = h.module.dim;
    ch.add("reflection equation for A", reflection_holds(&h.a, d, &r12, &r21));
    ch.add("reflection equation for B", reflection_holds(&h.b, d, &r12, &r21));
    let ker = c_fixed_space(&h.c_matrix());
    let forms: Vec<Vec<CycNum>> = gta.forms.iter().map(|f| f.values.clone()).collect();
    let mut all = ker.clone();
    all.extend(forms.iter().cloned());
    let same = span_dim(p, &all) == forms.len() && ker.len() == forms.len();
    ch.add_data("C acts as the identity exactly on SLF", same, json!({ "fixed_dim": ker.len() }));
    if p == 2 {
        let rank = faithfulness_rank(h)?;
        ch.add_data("faithfulness rank is 4p^6", rank == 4 * p.pow(6), json!(rank));
    }
    ch.add("v_A, v_B act on H* by conjugation", conjugation_law_holds(uq, rb, h)?);
    ch.add("omega^2 law on SLF", omega_square_law(uq, rb, &ctx.center, gta)?);
    Ok(())
}

// ---------- Wilson loops ----------

pub fn wilson(ctx: &Context) -> SuiteReport {
    let mut ch = Checks::default();
    let outcome = wilson_checks(ctx, &mut ch);
    finish(Suite::Wilson, ctx.p(), ch, outcome)
}

fn wilson_checks(ctx: &Context, ch: &mut Checks) -> Result<()> {
    let (uq, gta) = (&ctx.uq, &ctx.gta);
    let p = uq.p;
    let h = ctx.handle()?;
    for (name, m, mi) in [("A", &h.a, &h.a_inv), ("B", &h.b, &h.b_inv)] {
        ch.add(format!("quantum Cayley-Hamilton for {name}"), cayley_hamilton_holds(uq, &h.pivot, m));
        let powers = (-4..=4).all(|k| m_power_holds(uq, &h.pivot, m, mi, k));
        ch.add(format!("power formula for {name}^n, |n| <= 4"), powers);
    }
    let w = wawb_identities(uq, h, 0)?;
    for (name, ok) in w.as_list() {
        ch.add(name, ok);
    }
    let bp = basepoint_report(h)?;
    ch.add("tr(v B^-1 A) = tr(v^-1 A B^-1)", bp.binv_a);
    ch.add("tr(v B A^-1) = tr(v^-1 A^-1 B)", bp.b_ainv);
    let wa = slf_restrict(uq, gta, &wilson_op(h, &LoopWord::generator(1, Gen::A, 1)?)?)?;
    let mut diag = true;
    for s in 1..=p {
        for (eps, idx) in [(1i64, chi_plus(s)), (-1, chi_minus(p, s))] {
            let mut e = unit_vec(p, 3 * p - 1, idx);
            e[idx] = (uq.q_pow(s as i64) + uq.q_pow(-(s as i64))).scale_i64(-eps);
            diag &= wa.column(idx) == e;
        }
    }
    ch.add("W_A on chi^eps_s is -eps (q^s + q^-s)", diag);
    let wba = slf_restrict(uq, gta, &wilson_op(h, &parse_loop("b1^-1 a1", 1)?)?)?;
    let chi2 = SlfVec::unit(p, chi_plus(2));
    let mut mult = true;
    for j in 0..3 * p - 1 {
        mult &= wba.column(j) == gta.product(uq, &chi2, &SlfVec::unit(p, j))?.0;
    }
    ch.add("W(b1^-1 a1) on SLF is multiplication by chi+_2", mult);
    Ok(())
}

// ---------- SL2(Z) and Lyubashenko-Majid ----------

pub fn sl2z(ctx: &Context) -> SuiteReport {
    let mut ch = Checks::default();
    let outcome = sl2z_checks(ctx, &mut ch);
    finish(Suite::Sl2z, ctx.p(), ch, outcome)
}

fn sl2z_checks(ctx: &Context, ch: &mut Checks) -> Result<()> {
    let (uq, rb) = (&ctx.uq, &ctx.rb);
    let p = uq.p;
    // theta1 fails unless both constructions agree entry-wise
    let th = ctx.theta()?;
    ch.add("handle and closed constructions of theta_1 agree", true);
    ch.add_data("xi matches its float formula", th.xi_numeric_error < ctx.tolerance, json!({ "error": th.xi_numeric_error }));
    ch.add_data(
        "printed xi differs by the integral normalization",
        th.printed_ratio == uq.integral_normalization(),
        json!(th.printed_ratio.to_string()),
    );
    ch.add("theta_1(tau_a) theta_1(tau_a^-1) = id", th.a.compose(&th.a_inv)?.is_identity());
    let rel = sl2z_relations(uq, rb, th)?;
    ch.add("braid relation", rel.braid_exact);
    ch.add_data(
        "(tau_a tau_b)^3 = mu^l(v^-1)/mu^l(v) id",
        rel.cube_scalar.as_ref() == Some(&rel.expected_scalar),
        json!(rel.expected_scalar.to_string()),
    );
    ch.add("(tau_a tau_b)^6 is the squared scalar", rel.sixth_scalar.as_ref() == Some(&(&rel.expected_scalar * &rel.expected_scalar)));
    let d = decompose_rep(uq, th)?;
    ch.add_data("decomposition into (p+1) + C^2 x (p-1)", d.p_dim == p + 1 && d.w_dim == p - 1 && d.block_diagonal, json!([d.p_dim, d.w_dim]));
    ch.add("W block equals the closed W action", d.tensor_form);
    let mut diag = true;
    for s in 1..=p {
        diag &= th.a.get(chi_plus(s), chi_plus(s)) == &crate::ribbon::v_value(uq, true, s).inv()?;
        diag &= th.a.get(chi_minus(p, s), chi_minus(p, s)) == &crate::ribbon::v_value(uq, false, s).inv()?;
    }
    ch.add("theta_1(tau_a) diagonal is v_s^-1", diag);
    Ok(())
}

pub fn lm(ctx: &Context) -> SuiteReport {
    let mut ch = Checks::default();
    let outcome = lm_checks(ctx, &mut ch);
    finish(Suite::Lm, ctx.p(), ch, outcome)
}

fn lm_checks(ctx: &Context, ch: &mut Checks) -> Result<()> {
    let uq = &ctx.uq;
    let th = ctx.theta()?;
    let r = lm_operators(uq, &ctx.rb, &ctx.center, &ctx.gta, th)?;
    ch.add("T is multiplication by v^-1 in the canonical basis", r.t == t_expected(uq));
    ch.add("S^-1 is trivial on the center", r.antipode_trivial_on_center);
    ch.add_data(
        "S_LM^2 = mu^l(v) mu^l(v^-1) S^-1",
        r.s_squared_scalar.as_ref() == Some(&r.s_squared_expected),
        json!(r.s_squared_expected.to_string()),
    );
    ch.add("f S_LM = mu^l(v^-1) S' f", r.intertwines_s);
    ch.add("f T_LM = T' f", r.intertwines_t);
    ch.add("f is invertible", r.f.rank() == 3 * uq.p - 1);
    Ok(())
}

// ---------- skein ----------

pub fn skein(ctx: &Context) -> SuiteReport {
    let mut ch = Checks::default();
    let outcome = skein_checks(ctx, &mut ch);
    finish(Suite::Skein, ctx.p(), ch, outcome)
}

fn skein_checks(ctx: &Context, ch: &mut Checks) -> Result<()> {
    let p = ctx.p();
    let handle = Some(ctx.handle()?);
    let r = skein_report(&ctx.uq, &ctx.center, &ctx.rb, &ctx.gta, handle)?;
    for jw in &r.jw {
        ch.add(format!("Jones-Wenzl f_{} idempotent, killed by caps and cups, recursion", jw.n), jw.all());
    }
    for t in &r.tl_matrices {
        ch.add(format!("TL_{} realized on X+(2)^{}", t.n, t.n), t.all());
    }
    ch.add("rho(a), rho(b) from diagrams match the closed forms", r.rho_matches_closed);
    ch.add("W_A, W_B from forms match the closed formulas", r.forms_match_closed);
    if let Some(w) = r.wilson_matches_closed {
        ch.add("W_A, W_B from Wilson loops match the closed formulas", w);
    }
    if let Some((full, slf)) = &r.kauffman {
        ch.add("Kauffman relation for W_A W_B on H*", full.ab && full.ba);
        ch.add("Kauffman relation for W_A W_B on SLF", slf.ab && slf.ba);
    }
    let c = &r.composition;
    ch.add_data("composition series dimensions (p+1, p-1, p-1)", c.dims == [p + 1, p - 1, p - 1], json!(c.dims));
    ch.add("composition factors are simple", c.simple_quotients.iter().all(|b| *b));
    ch.add("composition series is invariant and indecomposable", c.all());
    ch.add("intertwiner F is exact", r.iso_f.exact());
    Ok(())
}

// ---------- genus 2 ----------

pub fn genus2(ctx: &Context) -> SuiteReport {
    let mut ch = Checks::default();
    let outcome = genus2_checks(ctx, &mut ch);
    finish(Suite::Genus2, ctx.p(), ch, outcome)
}

fn genus2_checks(ctx: &Context, ch: &mut Checks) -> Result<()> {
    let (uq, rb) = (&ctx.uq, &ctx.rb);
    let h = ctx.handle()?;
    let (fund, pair) = fundamental_pair(ctx)?;
    let single = GenusOps::new(uq, h, 2, DEFAULT_MAX_DIM)?;
    let pair = GenusOps::new(uq, &pair, 2, DEFAULT_MAX_DIM)?;
    let rel = check_genus_relations(uq, rb, &single, &pair, &fund)?;
    ch.add("L_(2,0) fusion relations", rel.fusion);
    ch.add("L_(2,0) braided exchange relations", rel.braided_exchange);
    ch.add("L_(2,0) handle exchange relations", rel.handle_exchange);
    let inv = inv_subspace(uq, 2, DEFAULT_MAX_DIM)?;
    ch.add_data("boundary holonomy acts as identity on Inv", acts_as_identity(&single.boundary(), &inv), json!({ "inv_dim": inv.len() }));
    let tw = GenusTwists::new(uq, rb, 2, DEFAULT_MAX_DIM)?;
    let rep = genus2_twist_report(uq, &tw, &inv)?;
    ch.add("twists commute with the H action on Inv", rep.commutes_with_action.iter().all(|(_, b)| *b));
    ch.add("braid relation (a2, b2) up to scalar", rep.braid_ab_scalar.is_some());
    ch.add("braid relation (d2, b2) up to scalar", rep.braid_db_scalar.is_some());
    ch.add("braid relation (e2, b2) up to scalar", rep.braid_eb_scalar.is_some());
    ch.add("disjoint twists commute", rep.disjoint_commute);
    let bc = boundary_curve_report(uq, &single, DEFAULT_MAX_DIM)?;
    for (x, rest, on_inv, _) in &bc.pairs {
        ch.add(format!("W({x}) = W({rest}) on Inv"), *on_inv);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!(matches!("drinfeld".parse::<Suite>(), Err(Error::Parse(_))));
    }

    #[test]
    fn gauge_changes_leave_g_fixed() {
        let uq = Uq::new(3);
        let center = Center::new(&uq).unwrap();
        let gta = Gta::new(&uq, &center).unwrap();
        for s in 1..3 {
            let g = g_form_gauged(&uq, s, &uq.c(5), &uq.q_pow(2).clone()).unwrap();
            assert_eq!(g, gta.forms[g_index(3, s)]);
        }
    }

    #[test]
    fn every_suite_passes_at_p2() {
        let ctx = Context::new(2).unwrap();
        let mut reports = Vec::new();
        for s in Suite::ALL {
            let r = ctx.run(s);
            let failed: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
            assert!(r.passed(), "{s}: {failed:?}");
            reports.push(r);
        }
        let a = serde_json::to_string(&report_json(2, &reports)).unwrap();
        let again: Vec<SuiteReport> = Suite::ALL.iter().map(|s| ctx.run(*s)).collect();
        assert_eq!(a, serde_json::to_string(&report_json(2, &again)).unwrap());
        assert_eq!(report_json(2, &reports)["pass"], json!(true));
    }

    #[test]
    fn context_rejects_small_p() {
        assert!(matches!(Context::new(1), Err(Error::Rejected(_))));
    }
}
