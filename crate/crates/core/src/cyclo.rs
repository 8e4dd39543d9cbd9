//! Exact arithmetic in the cyclotomic field ℚ(ζ) with ζ = e^{iπ/(2p)} a primitive
//! 4p-th root of unity.
//!
//! Values are stored as integer numerators over one common positive denominator in the
//! power basis 1, ζ, …, ζ^{d-1}, d = φ(4p). The representation is canonical:
//! gcd(numerators, denominator) = 1 and the denominator is positive. Small values use
//! `i64` storage with overflow-checked `i128` intermediates; anything larger falls back
//! to arbitrary-precision integers.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const SMALL: usize = 8;
const MAX_P: usize = 32;

/// Field data for a fixed p: the cyclotomic polynomial and reductions of ζ^k.
pub(crate) struct FieldCtx {
    pub m: usize,
    pub d: usize,
    /// `pow[k]` = coefficients of ζ^k (0 ≤ k < m) in the power basis.
    pow: Vec<Vec<i64>>,
}

static CTX: [OnceLock<FieldCtx>; MAX_P + 1] = [const { OnceLock::new() }; MAX_P + 1];

fn poly_divexact(num: &[i64], den: &[i64]) -> Vec<i64> {
    // den monic
    let mut r = num.to_vec();
    let dn = den.len() - 1;
    let mut out = vec![0i64; num.len() - dn];
    for k in (0..out.len()).rev() {
        let c = r[k + dn];
        out[k] = c;
        for (i, &b) in den.iter().enumerate() {
            r[k + i] -= c * b;
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    out
}

/// Coefficients of Φ_n, lowest degree first.
pub fn cyclotomic_poly(n: usize) -> Vec<i64> {
    let mut f = vec![0i64; n + 1];
    f[0] = -1;
    f[n] = 1;
    for k in 1..n {
        if n % k == 0 {
            f = poly_divexact(&f, &cyclotomic_poly(k));
        }
    }
    f
}

impl FieldCtx {
    fn build(p: usize) -> FieldCtx {
        let m = 4 * p;
        let phi = cyclotomic_poly(m);
        let d = phi.len() - 1;
        let mut pow = Vec::with_capacity(m);
        let mut cur = vec![0i64; d];
        cur[0] = 1;
        for _ in 0..m {
            pow.push(cur.clone());
            let top = cur[d - 1];
            let mut nxt = vec![0i64; d];
            for i in (1..d).rev() {
                nxt[i] = cur[i - 1];
            }
            for i in 0..d {
                nxt[i] -= top * phi[i];
            }
            cur = nxt;
        }
        FieldCtx { m, d, pow }
    }
}

pub(crate) fn ctx(p: usize) -> &'static FieldCtx {
    assert!((2..=MAX_P).contains(&p), "p = {p} outside supported range 2..={MAX_P}");
    CTX[p].get_or_init(|| FieldCtx::build(p))
}

#[derive(Clone)]
enum Repr {
    Small { num: [i64; SMALL], den: i64 },
    Big { num: Vec<BigInt>, den: BigInt },
}

/// An element of ℚ(ζ_{4p}).
#[derive(Clone)]
pub struct CycNum {
    p: u16,
    repr: Repr,
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl CycNum {
    // ---------- construction ----------

    pub fn zero(p: usize) -> Self {
        let _ = ctx(p);
        CycNum { p: p as u16, repr: Self::small_or_big_zero(p) }
    }

    fn small_or_big_zero(p: usize) -> Repr {
        let d = ctx(p).d;
        if d <= SMALL {
            Repr::Small { num: [0; SMALL], den: 1 }
        } else {
            Repr::Big { num: vec![BigInt::zero(); d], den: BigInt::one() }
        }
    }

    pub fn one(p: usize) -> Self {
        Self::from_i64(p, 1)
    }

    pub fn from_i64(p: usize, v: i64) -> Self {
        Self::from_ratio(p, v, 1)
    }

    /// The rational number a/b.
    pub fn from_ratio(p: usize, a: i64, b: i64) -> Self {
        assert!(b != 0, "zero denominator");
        let d = ctx(p).d;
        let mut num = vec![0i128; d];
        num[0] = a as i128;
        Self::from_i128(p, num, b as i128)
    }

    pub fn from_bigint(p: usize, v: BigInt) -> Self {
        let d = ctx(p).d;
        let mut num = vec![BigInt::zero(); d];
        num[0] = v;
        Self::from_big(p, num, BigInt::one())
    }

    /// ζ^k for any integer k.
    pub fn zeta_pow(p: usize, k: i64) -> Self {
        let c = ctx(p);
        let k = k.rem_euclid(c.m as i64) as usize;
        let num: Vec<i128> = c.pow[k].iter().map(|&x| x as i128).collect();
        Self::from_i128(p, num, 1)
    }

    /// ζ = q^{1/2}.
    pub fn zeta(p: usize) -> Self {
        Self::zeta_pow(p, 1)
    }

    /// q^k = ζ^{2k}.
    pub fn q_pow(p: usize, k: i64) -> Self {
        Self::zeta_pow(p, 2 * k)
    }

    /// Power-basis coefficients given as numerator/denominator pairs.
    pub fn from_coeffs(p: usize, coeffs: &[(BigInt, BigInt)]) -> Result<Self> {
        let d = ctx(p).d;
        if coeffs.len() != d {
            return Err(Error::Format(format!("expected {d} coefficients, got {}", coeffs.len())));
        }
        let mut acc = CycNum::zero(p);
        for (i, (a, b)) in coeffs.iter().enumerate() {
            if b.is_zero() {
                return Err(Error::DivisionByZero);
            }
            let mut num = vec![BigInt::zero(); d];
            num[i] = a.clone();
            acc += &CycNum::from_big(p, num, b.clone());
        }
        Ok(acc)
    }

    fn from_i128(p: usize, mut num: Vec<i128>, mut den: i128) -> Self {
        let d = ctx(p).d;
        debug_assert_eq!(num.len(), d);
        if den < 0 {
            if den == i128::MIN || num.iter().any(|&x| x == i128::MIN) {
                return Self::from_big(p, num.into_iter().map(BigInt::from).collect(), BigInt::from(den));
            }
            den = -den;
            for x in num.iter_mut() {
                *x = -*x;
            }
        }
        let mut g = den as u128;
        for &x in &num {
            if g == 1 {
                break;
            }
            if x != 0 {
                g = gcd_u128(g, x.unsigned_abs());
            }
        }
        if num.iter().all(|&x| x == 0) {
            g = den as u128;
        }
        if g > 1 {
            let g = g as i128;
            den /= g;
            for x in num.iter_mut() {
                *x /= g;
            }
        }
        if d <= SMALL {
            let fits = den <= i64::MAX as i128 && num.iter().all(|&x| x >= i64::MIN as i128 && x <= i64::MAX as i128);
            if fits {
                let mut arr = [0i64; SMALL];
                for (a, &x) in arr.iter_mut().zip(num.iter()) {
                    *a = x as i64;
                }
                return CycNum { p: p as u16, repr: Repr::Small { num: arr, den: den as i64 } };
            }
        }
        CycNum { p: p as u16, repr: Repr::Big { num: num.into_iter().map(BigInt::from).collect(), den: BigInt::from(den) } }
    }

    fn from_big(p: usize, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        if den.is_negative() {
            den = -den;
            for x in num.iter_mut() {
                *x = -std::mem::take(x);
            }
        }
        let mut g = den.clone();
        for x in &num {
            if g.is_one() {
                break;
            }
            if !x.is_zero() {
                g = g.gcd(x);
            }
        }
        if num.iter().all(|x| x.is_zero()) {
            g = den.clone();
        }
        if !g.is_one() {
            den /= &g;
            for x in num.iter_mut() {
                *x /= &g;
            }
        }
        let d = ctx(p).d;
        if d <= SMALL {
            if let Some(dd) = den.to_i64() {
                let mut arr = [0i64; SMALL];
                let mut ok = true;
                for (a, x) in arr.iter_mut().zip(num.iter()) {
                    match x.to_i64() {
                        Some(v) => *a = v,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    return CycNum { p: p as u16, repr: Repr::Small { num: arr, den: dd } };
                }
            }
        }
        CycNum { p: p as u16, repr: Repr::Big { num, den } }
    }

    // ---------- inspection ----------

    pub fn p(&self) -> usize {
        self.p as usize
    }

    pub fn degree(&self) -> usize {
        ctx(self.p()).d
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Small { num, .. } => num.iter().all(|&x| x == 0),
            Repr::Big { num, .. } => num.iter().all(|x| x.is_zero()),
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.repr {
            Repr::Small { num, den } => *den == 1 && num[0] == 1 && num[1..].iter().all(|&x| x == 0),
            Repr::Big { num, den } => den.is_one() && num[0].is_one() && num[1..].iter().all(|x| x.is_zero()),
        }
    }

    /// True when the value lies in ℚ.
    pub fn is_rational(&self) -> bool {
        match &self.repr {
            Repr::Small { num, .. } => num[1..].iter().all(|&x| x == 0),
            Repr::Big { num, .. } => num[1..].iter().all(|x| x.is_zero()),
        }
    }

    /// Numerators and the common denominator.
    pub fn parts(&self) -> (Vec<BigInt>, BigInt) {
        let d = self.degree();
        match &self.repr {
            Repr::Small { num, den } => (num[..d].iter().map(|&x| BigInt::from(x)).collect(), BigInt::from(*den)),
            Repr::Big { num, den } => (num.clone(), den.clone()),
        }
    }

    /// Coefficients in lowest terms: (numerator, positive denominator) per power of ζ.
    pub fn coeffs(&self) -> Vec<(BigInt, BigInt)> {
        let (num, den) = self.parts();
        num.into_iter()
            .map(|a| {
                let g = a.gcd(&den);
                if a.is_zero() {
                    (BigInt::zero(), BigInt::one())
                } else {
                    (&a / &g, &den / &g)
                }
            })
            .collect()
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(self.p, other.p, "mixing fields with different p");
    }

    // ---------- arithmetic kernels ----------

    fn small_parts(&self) -> Option<(&[i64; SMALL], i64)> {
        match &self.repr {
            Repr::Small { num, den } => Some((num, *den)),
            Repr::Big { .. } => None,
        }
    }

    fn add_impl(&self, other: &Self, sign: i64) -> Self {
        self.check_same(other);
        let p = self.p();
        let d = self.degree();
        if let (Some((a, da)), Some((b, db))) = (self.small_parts(), other.small_parts()) {
            let (da, db) = (da as i128, db as i128);
            let mut num = vec![0i128; d];
            let den;
            if da == db {
                for i in 0..d {
                    num[i] = a[i] as i128 + sign as i128 * b[i] as i128;
                }
                den = da;
            } else {
                for i in 0..d {
                    num[i] = a[i] as i128 * db + sign as i128 * b[i] as i128 * da;
                }
                den = da * db;
            }
            return Self::from_i128(p, num, den);
        }
        let (a, da) = self.parts();
        let (b, db) = other.parts();
        let s = BigInt::from(sign);
        let num = (0..d).map(|i| &a[i] * &db + &s * &b[i] * &da).collect();
        Self::from_big(p, num, da * db)
    }

    fn reduce_i128(p: usize, prod: &[i128]) -> Option<Vec<i128>> {
        let c = ctx(p);
        let d = c.d;
        let mut out = vec![0i128; d];
        out.copy_from_slice(&prod[..d.min(prod.len())]);
        for (k, &v) in prod.iter().enumerate().skip(d) {
            if v == 0 {
                continue;
            }
            for (i, &r) in c.pow[k].iter().enumerate() {
                if r != 0 {
                    out[i] = out[i].checked_add(v.checked_mul(r as i128)?)?;
                }
            }
        }
        Some(out)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        self.check_same(other);
        let p = self.p();
        let d = self.degree();
        if let (Some((a, da)), Some((b, db))) = (self.small_parts(), other.small_parts()) {
            let attempt = (|| {
                let mut prod = vec![0i128; 2 * d - 1];
                for i in 0..d {
                    if a[i] == 0 {
                        continue;
                    }
                    for j in 0..d {
                        if b[j] != 0 {
                            prod[i + j] = prod[i + j].checked_add((a[i] as i128).checked_mul(b[j] as i128)?)?;
                        }
                    }
                }
                let num = Self::reduce_i128(p, &prod)?;
                let den = (da as i128).checked_mul(db as i128)?;
                Some(Self::from_i128(p, num, den))
            })();
            if let Some(r) = attempt {
                return r;
            }
        }
        let (a, da) = self.parts();
        let (b, db) = other.parts();
        let c = ctx(p);
        let mut prod = vec![BigInt::zero(); 2 * d - 1];
        for i in 0..d {
            if a[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if !b[j].is_zero() {
                    prod[i + j] += &a[i] * &b[j];
                }
            }
        }
        let mut out: Vec<BigInt> = prod[..d].to_vec();
        for (k, v) in prod.iter().enumerate().skip(d) {
            if v.is_zero() {
                continue;
            }
            for (i, &r) in c.pow[k].iter().enumerate() {
                if r != 0 {
                    out[i] += v * r;
                }
            }
        }
        Self::from_big(p, out, da * db)
    }

    /// Image under the Galois automorphism ζ ↦ ζ^k (k coprime to 4p).
    pub fn galois(&self, k: i64) -> Self {
        let p = self.p();
        let c = ctx(p);
        let k = k.rem_euclid(c.m as i64) as usize;
        assert!(k.gcd(&c.m) == 1, "ζ ↦ ζ^{k} is not an automorphism");
        let (num, den) = self.parts();
        let mut out = vec![BigInt::zero(); c.d];
        for (i, a) in num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let e = (i * k) % c.m;
            for (j, &r) in c.pow[e].iter().enumerate() {
                if r != 0 {
                    out[j] += a * r;
                }
            }
        }
        Self::from_big(p, out, den)
    }

    /// Complex conjugation ζ ↦ ζ^{-1}.
    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    /// Multiplicative inverse via the norm: x⁻¹ = ∏_{σ≠1} σ(x) / N(x).
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = self.p();
        let m = ctx(p).m as i64;
        if self.is_rational() {
            let (num, den) = self.parts();
            return Ok(Self::from_bigint(p, den).mul_impl(&Self::from_big_rational_inv(p, &num[0])));
        }
        let mut others = CycNum::one(p);
        for k in 2..m {
            if k.gcd(&m) == 1 {
                others = &others * &self.galois(k);
            }
        }
        let norm = self * &others;
        debug_assert!(norm.is_rational());
        let (nn, nd) = norm.parts();
        let scale = Self::from_bigint(p, nd).mul_impl(&Self::from_big_rational_inv(p, &nn[0]));
        Ok(&others * &scale)
    }

    fn from_big_rational_inv(p: usize, a: &BigInt) -> Self {
        let d = ctx(p).d;
        let mut num = vec![BigInt::zero(); d];
        num[0] = BigInt::one();
        Self::from_big(p, num, a.clone())
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = CycNum::one(self.p());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Integer power, negative exponents through the inverse.
    pub fn powi(&self, e: i64) -> Result<Self> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            Ok(self.inv()?.pow(e.unsigned_abs()))
        }
    }

    pub fn scale_i64(&self, k: i64) -> Self {
        self * &CycNum::from_i64(self.p(), k)
    }

    /// Evaluation at ζ = e^{iπ/(2p)}.
    pub fn numeric(&self) -> Complex64 {
        let p = self.p();
        let c = ctx(p);
        let (num, den) = self.parts();
        let den = den.to_f64().unwrap_or(f64::INFINITY);
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ang = std::f64::consts::PI * i as f64 / (2.0 * p as f64);
            acc += Complex64::from_polar(a.to_f64().unwrap_or(f64::NAN) / den, ang);
        }
        let _ = c;
        acc
    }
}

/// Evaluation at ζ = e^{iπ/(2p)} in double precision.
pub fn numeric_embed(x: &CycNum) -> Complex64 {
    x.numeric()
}

// ---------- q-numbers ----------

/// q-integer [n] = (q^n − q^{-n}) / (q − q^{-1}) = Σ_{k=0}^{n-1} q^{n-1-2k}.
pub fn q_int(p: usize, n: i64) -> CycNum {
    let mut acc = CycNum::zero(p);
    let a = n.abs();
    for k in 0..a {
        acc += &CycNum::q_pow(p, a - 1 - 2 * k);
    }
    if n < 0 {
        -acc
    } else {
        acc
    }
}

/// [m]! = [1][2]…[m] (zero once m ≥ p).
pub fn q_factorial(p: usize, m: u64) -> CycNum {
    let mut acc = CycNum::one(p);
    for k in 1..=m as i64 {
        acc = &acc * &q_int(p, k);
    }
    acc
}

/// q-binomial [a choose b] = [a]!/([b]![a−b]!), computed by the q-Pascal rule so that
/// it stays defined for a ≥ p.
pub fn q_binomial(p: usize, a: u64, b: u64) -> CycNum {
    if b > a {
        return CycNum::zero(p);
    }
    // [n choose k] = q^{k}[n-1 choose k] + q^{-(n-k)}[n-1 choose k-1]
    let a = a as usize;
    let b = b as usize;
    let mut row = vec![CycNum::one(p)];
    for n in 1..=a {
        let mut next = vec![CycNum::zero(p); n + 1];
        for k in 0..=n {
            let mut v = CycNum::zero(p);
            if k >= 1 {
                v += &(&CycNum::q_pow(p, -((n - k) as i64)) * &row[k - 1]);
            }
            if k < n {
                v += &(&CycNum::q_pow(p, k as i64) * &row[k]);
            }
            next[k] = v;
        }
        row = next;
    }
    row[b].clone()
}

/// q̂ = q − q^{-1}.
pub fn q_hat(p: usize) -> CycNum {
    &CycNum::q_pow(p, 1) - &CycNum::q_pow(p, -1)
}

/// Quotient x / [n]!, erroring when [n]! vanishes.
pub fn div_q_factorial(x: &CycNum, n: u64) -> Result<CycNum> {
    let f = q_factorial(x.p(), n);
    if f.is_zero() {
        return Err(Error::DivisionByZero);
    }
    x.checked_div(&f)
}

// ---------- trait impls ----------

impl PartialEq for CycNum {
    fn eq(&self, other: &Self) -> bool {
        if self.p != other.p {
            return false;
        }
        match (&self.repr, &other.repr) {
            (Repr::Small { num: a, den: da }, Repr::Small { num: b, den: db }) => da == db && a == b,
            _ => self.parts() == other.parts(),
        }
    }
}

impl Eq for CycNum {}

impl Hash for CycNum {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.p.hash(state);
        let (num, den) = self.parts();
        num.hash(state);
        den.hash(state);
    }
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, (a, b)) in self.coeffs().into_iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let neg = a.is_negative();
            let a = a.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let coeff = if b.is_one() { format!("{a}") } else { format!("{a}/{b}") };
            match i {
                0 => write!(f, "{coeff}")?,
                _ => {
                    let z = if i == 1 { "ζ".to_string() } else { format!("ζ^{i}") };
                    if a.is_one() && b.is_one() {
                        write!(f, "{z}")?
                    } else {
                        write!(f, "{coeff}·{z}")?
                    }
                }
            }
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a> $tr<&'a CycNum> for &'a CycNum {
            type Output = CycNum;
            fn $m(self, rhs: &'a CycNum) -> CycNum {
                let f: fn(&CycNum, &CycNum) -> CycNum = $body;
                f(self, rhs)
            }
        }
        impl $tr<CycNum> for CycNum {
            type Output = CycNum;
            fn $m(self, rhs: CycNum) -> CycNum {
                let f: fn(&CycNum, &CycNum) -> CycNum = $body;
                f(&self, &rhs)
            }
        }
        impl<'a> $tr<&'a CycNum> for CycNum {
            type Output = CycNum;
            fn $m(self, rhs: &'a CycNum) -> CycNum {
                let f: fn(&CycNum, &CycNum) -> CycNum = $body;
                f(&self, rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.add_impl(b, 1));
binop!(Sub, sub, |a, b| a.add_impl(b, -1));
binop!(Mul, mul, |a, b| a.mul_impl(b));

impl<'a> AddAssign<&'a CycNum> for CycNum {
    fn add_assign(&mut self, rhs: &'a CycNum) {
        *self = self.add_impl(rhs, 1);
    }
}

impl<'a> SubAssign<&'a CycNum> for CycNum {
    fn sub_assign(&mut self, rhs: &'a CycNum) {
        *self = self.add_impl(rhs, -1);
    }
}

impl<'a> MulAssign<&'a CycNum> for CycNum {
    fn mul_assign(&mut self, rhs: &'a CycNum) {
        *self = self.mul_impl(rhs);
    }
}

impl Neg for &CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        let repr = match &self.repr {
            Repr::Small { num, den } if num.iter().all(|&x| x != i64::MIN) => {
                let mut n = *num;
                for x in n.iter_mut() {
                    *x = -*x;
                }
                Repr::Small { num: n, den: *den }
            }
            _ => {
                let (num, den) = self.parts();
                return CycNum::from_big(self.p(), num.into_iter().map(|x| -x).collect(), den);
            }
        };
        CycNum { p: self.p, repr }
    }
}

impl Neg for CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        -&self
    }
}

// JSON: array of [numerator, denominator] pairs; integers outside i64 are emitted as strings.

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonInt {
    Num(i64),
    Str(String),
}

fn to_json_int(x: &BigInt) -> JsonInt {
    match x.to_i64() {
        Some(v) => JsonInt::Num(v),
        None => JsonInt::Str(x.to_string()),
    }
}

fn from_json_int(x: &JsonInt) -> std::result::Result<BigInt, String> {
    match x {
        JsonInt::Num(v) => Ok(BigInt::from(*v)),
        JsonInt::Str(s) => s.parse::<BigInt>().map_err(|e| e.to_string()),
    }
}

impl Serialize for CycNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<(JsonInt, JsonInt)> = self.coeffs().iter().map(|(a, b)| (to_json_int(a), to_json_int(b))).collect();
        pairs.serialize(s)
    }
}

/// Deserializes a CycNum whose field is inferred from the coefficient count is not
/// possible in general, so callers supply p through [`CycNum::from_json`].
impl CycNum {
    pub fn from_json(p: usize, v: &serde_json::Value) -> Result<Self> {
        let pairs: Vec<(JsonInt, JsonInt)> = serde_json::from_value(v.clone()).map_err(|e| Error::Format(e.to_string()))?;
        let coeffs = pairs
            .iter()
            .map(|(a, b)| Ok((from_json_int(a).map_err(Error::Format)?, from_json_int(b).map_err(Error::Format)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(p, &coeffs)
    }
}

/// Serde helper for a bare coefficient list (field size checked on conversion).
#[derive(Debug, Clone)]
pub struct CoeffList(pub Vec<(BigInt, BigInt)>);

impl<'de> Deserialize<'de> for CoeffList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<(JsonInt, JsonInt)> = Vec::deserialize(d)?;
        pairs
            .iter()
            .map(|(a, b)| Ok((from_json_int(a).map_err(D::Error::custom)?, from_json_int(b).map_err(D::Error::custom)?)))
            .collect::<std::result::Result<Vec<_>, D::Error>>()
            .map(CoeffList)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= 1e-9 * (1.0 + b.norm())
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_poly(8), vec![1, 0, 0, 0, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_poly(16), vec![1, 0, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(cyclotomic_poly(20), vec![1, 0, -1, 0, 1, 0, -1, 0, 1]);
    }

    #[test]
    fn zeta_to_the_fourth_is_minus_one_at_p2() {
        assert_eq!(CycNum::zeta_pow(2, 4), CycNum::from_i64(2, -1));
    }

    #[test]
    fn q_times_q_inverse() {
        for p in 2..=5 {
            assert!((&CycNum::q_pow(p, 1) * &CycNum::q_pow(p, -1)).is_one());
        }
    }

    #[test]
    fn difference_of_squares_p3() {
        let p = 3;
        let q = CycNum::q_pow(p, 1);
        let qi = CycNum::q_pow(p, -1);
        let lhs = &(&q + &qi) * &(&q - &qi);
        let rhs = &CycNum::q_pow(p, 2) - &CycNum::q_pow(p, -2);
        assert_eq!(lhs, rhs);
        assert!(close(lhs.numeric(), rhs.numeric()));
    }

    #[test]
    fn numeric_values() {
        assert!(close(CycNum::one(2).numeric(), Complex64::new(1.0, 0.0)));
        assert!(close(CycNum::q_pow(2, 1).numeric(), Complex64::new(0.0, 1.0)));
        assert!(close(q_int(3, 2).numeric(), Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn q_integer_identities() {
        for p in 2..=5usize {
            assert!(q_int(p as usize, 0).is_zero());
            assert!(q_int(p, p as i64).is_zero());
            for n in 0..=p as i64 {
                assert_eq!(q_int(p, p as i64 - n), q_int(p, n));
            }
            assert!(q_factorial(p, p as u64).is_zero());
            assert!(!q_factorial(p, p as u64 - 1).is_zero());
        }
    }

    #[test]
    fn q_binomial_matches_factorials() {
        let p = 5;
        for a in 0..p as u64 {
            for b in 0..=a {
                let expect = q_factorial(p, a).checked_div(&(&q_factorial(p, b) * &q_factorial(p, a - b))).unwrap();
                assert_eq!(q_binomial(p, a, b), expect);
            }
        }
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert!(matches!(CycNum::zero(3).inv(), Err(Error::DivisionByZero)));
        assert!(div_q_factorial(&CycNum::one(3), 3).is_err());
    }

    #[test]
    fn big_fallback_round_trip() {
        let p = 2;
        let mut x = CycNum::from_ratio(p, 1, 3) + CycNum::zeta(p);
        for _ in 0..8 {
            x = &x * &x;
        }
        let y = x.inv().unwrap();
        assert!((&x * &y).is_one());
        let back = CycNum::from_json(p, &serde_json::to_value(&x).unwrap()).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn conj_is_inverse_on_roots() {
        for p in 2..=5 {
            let z = CycNum::zeta_pow(p, 3);
            assert!((&z * &z.conj()).is_one());
        }
    }
}
