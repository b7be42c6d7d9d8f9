//! Conjugate flows of the two-layer channel: exact multivariate polynomials, Newton solves,
//! branch expansion by implicit differentiation, and the flow force of x-independent states.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variable slots of [`MPoly`].
pub const H: usize = 0;
pub const HP: usize = 1;
pub const C: usize = 2;
pub const RHO: usize = 3;
pub const OMEGA: usize = 4;
/// Number of polynomial variables.
pub const NVARS: usize = 5;

/// Tolerance for float residuals of the conjugate system.
pub const CONJ_TOL: f64 = 1e-12;
/// Below this magnitude a float determinant is treated as zero.
pub const DET_ZERO: f64 = 1e-10;
/// Continuation step in ε.
pub const BRANCH_STEP: f64 = 1e-3;

/// Numbers the polynomial layer can be evaluated in.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(q: &BigRational) -> Self;
    fn from_int(n: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero_value(&self) -> bool;
    /// Embeds a float; exact types refuse.
    fn from_real(x: f64) -> Option<Self>;
}

impl Field for f64 {
    fn from_rational(q: &BigRational) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero_value(&self) -> bool {
        *self == 0.0
    }
    fn from_real(x: f64) -> Option<Self> {
        Some(x)
    }
}

impl Field for BigRational {
    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
    fn from_real(_: f64) -> Option<Self> {
        None
    }
}

/// A parameter that is either an exact rational or a float.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Real(f64),
}

impl Scalar {
    pub fn ratio(p: i64, q: i64) -> Self {
        Scalar::Exact(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn int(n: i64) -> Self {
        Self::ratio(n, 1)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => Field::to_f64(q),
            Scalar::Real(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Real(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Scalar::Exact(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Scalar::Real(x) => write!(f, "{x:.16e}"),
        }
    }
}

/// Parses `p/q`, integers and decimal literals (with optional exponent) exactly.
impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("not a rational literal: {s:?}"));
        if let Some((p, q)) = s.split_once('/') {
            let p = parse_decimal(p.trim()).ok_or_else(bad)?;
            let q = parse_decimal(q.trim()).ok_or_else(bad)?;
            if q.is_zero() {
                return Err(Error::InvalidParameter(format!("zero denominator in {s:?}")));
            }
            return Ok(Scalar::Exact(p / q));
        }
        parse_decimal(s).map(Scalar::Exact).ok_or_else(bad)
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|ch| ch.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("0{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut q = BigRational::from_integer(digits);
    if scale >= 0 {
        q *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -q } else { q })
}

impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(_) => s.serialize_str(&self.to_string()),
            Scalar::Real(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Scalar::int(n)),
            Raw::Float(x) => Ok(Scalar::Real(x)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Exact square root of a non-negative rational, if it is a perfect square.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer().sqrt(), q.denom().sqrt());
    let r = BigRational::new(n, d);
    (&r * &r == *q).then_some(r)
}

type Monomial = [u16; NVARS];

/// Multivariate polynomial in `(h, h₊, c, ρ, ω)` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl MPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(q: BigRational) -> Self {
        let mut p = Self::zero();
        p.push([0; NVARS], q);
        p
    }

    pub fn int(n: i64) -> Self {
        Self::constant(BigRational::from_int(n))
    }

    pub fn var(i: usize) -> Self {
        let mut m = [0; NVARS];
        m[i] = 1;
        let mut p = Self::zero();
        p.push(m, BigRational::one());
        p
    }

    fn push(&mut self, m: Monomial, q: BigRational) {
        let entry = self.terms.entry(m).or_insert_with(BigRational::zero);
        *entry += q;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (lexicographic exponent) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(m, c)| (*m, c * q)).collect() }
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::int(1), |acc, _| &acc * self)
    }

    pub fn degree_in(&self, var: usize) -> u16 {
        self.terms.keys().map(|m| m[var]).max().unwrap_or(0)
    }

    /// Partial derivative with respect to `var`.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m[var] > 0 {
                let mut m2 = *m;
                m2[var] -= 1;
                out.push(m2, c * BigRational::from_int(m[var] as i64));
            }
        }
        out
    }

    /// Replaces `var` by the polynomial `with`.
    pub fn substitute(&self, var: usize, with: &MPoly) -> Self {
        let mut out = Self::zero();
        let mut powers = vec![Self::int(1)];
        for (m, c) in &self.terms {
            while powers.len() <= m[var] as usize {
                let next = powers.last().unwrap() * with;
                powers.push(next);
            }
            let mut rest = *m;
            rest[var] = 0;
            let mut mono = Self::zero();
            mono.push(rest, c.clone());
            out = &out + &(&mono * &powers[m[var] as usize]);
        }
        out
    }

    /// Divides by `(x_var − x_by)`: returns `(Q, R)` with `P = (x_var − x_by)·Q + R`, `R` free of `x_var`.
    pub fn div_linear(&self, var: usize, by: usize) -> (Self, Self) {
        let n = self.degree_in(var) as usize;
        let mut coeffs = vec![Self::zero(); n + 1];
        for (m, c) in &self.terms {
            let mut rest = *m;
            rest[var] = 0;
            coeffs[m[var] as usize].push(rest, c.clone());
        }
        let t = Self::var(by);
        let mut q = vec![Self::zero(); n.max(1)];
        let mut carry = Self::zero();
        for k in (1..=n).rev() {
            carry = &coeffs[k] + &(&t * &carry);
            q[k - 1] = carry.clone();
        }
        let remainder = &coeffs[0] + &(&t * &carry);
        let mut quotient = Self::zero();
        let x = Self::var(var);
        for (k, qk) in q.iter().enumerate() {
            quotient = &quotient + &(qk * &x.pow(k as u32));
        }
        (quotient, remainder)
    }

    /// The rational `k` with `self = k·other`, if one exists.
    pub fn ratio_to(&self, other: &MPoly) -> Option<BigRational> {
        let (m, c) = other.terms.iter().next()?;
        let k = self.terms.get(m).cloned().unwrap_or_else(BigRational::zero) / c;
        (other.scale(&k) == *self).then_some(k)
    }

    /// Evaluates at `x = (h, h₊, c, ρ, ω)`.
    pub fn eval<T: Field>(&self, x: &[T; NVARS]) -> T {
        let mut powers: Vec<Vec<T>> = x.iter().map(|v| vec![T::from_int(1), v.clone()]).collect();
        let mut sum = T::from_int(0);
        for (m, c) in &self.terms {
            let mut term = T::from_rational(c);
            for (i, e) in m.iter().enumerate() {
                let e = *e as usize;
                while powers[i].len() <= e {
                    let next = powers[i].last().unwrap().clone() * x[i].clone();
                    powers[i].push(next);
                }
                if e > 0 {
                    term = term * powers[i][e].clone();
                }
            }
            sum = sum + term;
        }
        sum
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, rhs: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.push(*m, c.clone());
        }
        out
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, rhs: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.push(*m, -c.clone());
        }
        out
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, rhs: &MPoly) -> MPoly {
        let mut out = MPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let mut m = *ma;
                for i in 0..NVARS {
                    m[i] += mb[i];
                }
                out.push(m, ca * cb);
            }
        }
        out
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for MPoly {
            type Output = MPoly;
            fn $f(self, rhs: MPoly) -> MPoly {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&MPoly> for MPoly {
            type Output = MPoly;
            fn $f(self, rhs: &MPoly) -> MPoly {
                (&self).$f(rhs)
            }
        }
        impl $tr<MPoly> for &MPoly {
            type Output = MPoly;
            fn $f(self, rhs: MPoly) -> MPoly {
                self.$f(&rhs)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

/// Deliberate corruption of `𝒫_dyn` used to check that the verification pipeline notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    #[default]
    None,
    /// Scales the `ω²` term of `𝒫_dyn` by `1 + 10⁻³`.
    PerturbDyn,
}

/// Exactness certificate of the desingularizing division.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisionCertificate {
    /// `k` with `2h(h−1)𝒫_flow(h,h,c) = k·𝒫_dyn(h,h,c)`.
    pub factor: String,
    pub remainder_zero: bool,
    /// `(h₊−h)·𝒫_new = 2h(h−1)𝒫_flow − k𝒫_dyn` holds term by term.
    pub reconstruction_exact: bool,
}

/// `𝒫_dyn`, `𝒫_flow` and the desingularized `𝒫_new`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugatePolys {
    pub dyn_poly: MPoly,
    pub flow_poly: MPoly,
    pub new_poly: MPoly,
    pub certificate: DivisionCertificate,
}

fn p(n: i64) -> MPoly {
    MPoly::int(n)
}

/// `𝒫_dyn` with an optional relative perturbation of its `ω²` term.
pub fn poly_dyn_with(fault: Fault) -> MPoly {
    let (h, hp, c, r, w) = (MPoly::var(H), MPoly::var(HP), MPoly::var(C), MPoly::var(RHO), MPoly::var(OMEGA));
    let c2 = &c * &c;
    let hp2 = &hp * &hp;
    let s = p(2) - &hp - &h;
    let mut omega2 = &w * &w * &hp2 * (&hp - &h) * &s * &s * &r;
    if fault == Fault::PerturbDyn {
        omega2 = omega2.scale(&BigRational::new(BigInt::from(1001), BigInt::from(1000)));
    }
    let bracket = p(2) * &hp2 - &c2 * &hp - p(4) * &hp - &c2 * &h + p(2) * &c2 + p(2);
    let one_hp = p(1) - &hp;
    omega2 + p(4) * &hp2 * bracket * &r + p(4) * &c * &w * (p(1) - &h) * &hp2 * &s * &r
        - p(4) * &one_hp * &one_hp * (p(2) * &hp2 - &c2 * &hp - &c2 * &h)
}

/// `𝒫_dyn(h, h₊, c)`.
pub fn poly_dyn() -> MPoly {
    poly_dyn_with(Fault::None)
}

/// `𝒫_flow(h, h₊, c)`.
pub fn poly_flow() -> MPoly {
    let (h, hp, c, r, w) = (MPoly::var(H), MPoly::var(HP), MPoly::var(C), MPoly::var(RHO), MPoly::var(OMEGA));
    let c2 = &c * &c;
    &w * &w * &hp * (&hp - &h) * (&hp + p(3) * &h - p(4)) * &r + p(12) * &hp * (&hp - &c2 - p(1)) * &r
        + p(12) * &c * &w * (&h - p(1)) * &hp * &r
        - p(12) * (&hp - p(1)) * (&hp - &c2)
}

impl ConjugatePolys {
    pub fn new() -> Result<Self> {
        Self::with_fault(Fault::None)
    }

    /// Builds `𝒫_new` by exact division; fails if the bracket is not divisible by `h₊ − h`.
    pub fn with_fault(fault: Fault) -> Result<Self> {
        let dyn_poly = poly_dyn_with(fault);
        let flow_poly = poly_flow();
        let h = MPoly::var(H);
        let diag_dyn = dyn_poly.substitute(HP, &h);
        let diag_flow = flow_poly.substitute(HP, &h);
        let weight = p(2) * &h * (&h - p(1));
        let k = (&weight * &diag_flow).ratio_to(&diag_dyn).ok_or_else(|| {
            Error::DesingularizationFailed("2h(h−1)𝒫_flow(h,h,c) is not a constant multiple of 𝒫_dyn(h,h,c)".into())
        })?;
        let bracket = &weight * &flow_poly - dyn_poly.scale(&k);
        let (new_poly, remainder) = bracket.div_linear(HP, H);
        if !remainder.is_zero() {
            return Err(Error::DesingularizationFailed(format!("nonzero remainder with {} terms", remainder.len())));
        }
        let reconstruction_exact = (MPoly::var(HP) - &h) * &new_poly == bracket;
        if !reconstruction_exact {
            return Err(Error::DesingularizationFailed("quotient does not reconstruct the bracket".into()));
        }
        let certificate = DivisionCertificate {
            factor: Scalar::Exact(k).to_string(),
            remainder_zero: true,
            reconstruction_exact,
        };
        Ok(Self { dyn_poly, flow_poly, new_poly, certificate })
    }
}

/// An x-independent upstream/downstream pair and its derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState<T> {
    pub h: T,
    pub hp: T,
    pub c: T,
    pub rho: T,
    pub omega: T,
}

/// Which end of the channel a state describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Upstream,
    Downstream,
}

fn half<T: Field>() -> T {
    T::from_int(1) / T::from_int(2)
}

impl<T: Field> FlowState<T> {
    pub fn new(h: T, hp: T, c: T, rho: T, omega: T) -> Self {
        Self { h, hp, c, rho, omega }
    }

    /// `m₁ = ch`.
    pub fn m1(&self) -> T {
        self.c.clone() * self.h.clone()
    }

    /// `m₂ = c(1−h) + ω(1−h)²/2`.
    pub fn m2(&self) -> T {
        let d = T::from_int(1) - self.h.clone();
        self.c.clone() * d.clone() + half::<T>() * self.omega.clone() * d.clone() * d
    }

    /// Downstream lower-layer speed `c₁⁺ = m₁/h₊`.
    pub fn c1_plus(&self) -> T {
        self.m1() / self.hp.clone()
    }

    /// Downstream upper-layer speed from `m₂ = c₂⁺(1−h₊) + ω(1−h₊)²/2`.
    pub fn c2_plus(&self) -> T {
        let d = T::from_int(1) - self.hp.clone();
        (self.m2() - half::<T>() * self.omega.clone() * d.clone() * d.clone()) / d
    }

    /// Bernoulli constant from the upstream state.
    pub fn bernoulli_upstream(&self) -> T {
        (self.rho.clone() - T::from_int(1)) * half::<T>() * self.c.clone() * self.c.clone()
    }

    /// Bernoulli constant from the downstream state.
    pub fn bernoulli_downstream(&self) -> T {
        let (c1, c2) = (self.c1_plus(), self.c2_plus());
        half::<T>() * (self.rho.clone() * c2.clone() * c2 - c1.clone() * c1)
            + (self.rho.clone() - T::from_int(1)) * (self.hp.clone() - self.h.clone())
    }

    /// Closed-form flow force of the upstream or downstream state.
    pub fn flow_force(&self, side: Side) -> T {
        let one = T::from_int(1);
        let k = half::<T>() * self.c.clone() * self.c.clone() + self.h.clone();
        let (top, a1, a2) = match side {
            Side::Upstream => (self.h.clone(), self.c.clone(), self.c.clone()),
            Side::Downstream => (self.hp.clone(), self.c1_plus(), self.c2_plus()),
        };
        let lower = (half::<T>() * a1.clone() * a1 + k.clone()) * top.clone() - half::<T>() * top.clone() * top.clone();
        let (s0, s1) = (T::from_int(0), one.clone() - top.clone());
        let w = self.omega.clone();
        let width = s1.clone() - s0.clone();
        let upper = half::<T>() * a2.clone() * a2.clone() * width.clone()
            + a2 * w.clone() * (s1.clone() * s1.clone() - s0.clone() * s0.clone())
            + w.clone() * w * (s1.clone() * s1.clone() * s1 - s0.clone() * s0.clone() * s0) / T::from_int(3)
            - half::<T>() * (one - top.clone() * top)
            + k * width;
        lower + self.rho.clone() * upper
    }
}

/// Solution of the conjugate system at fixed `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugateSolution {
    pub h: f64,
    pub hp: f64,
    pub c: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Series `h₊ = h₀ + h₊,₁ε + h₊,₂ε²`, `c = c₀ + c₁ε + c₂ε²` of a conjugate branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchSeries {
    pub h0: Scalar,
    pub c0: Scalar,
    pub hp1: Scalar,
    pub hp2: Scalar,
    pub c1: Scalar,
    pub c2: Scalar,
}

impl BranchSeries {
    /// `(h, h₊, c)` predicted at `ε` in floats.
    pub fn predict(&self, eps: f64) -> (f64, f64, f64) {
        let h0 = self.h0.to_f64();
        (
            h0 + eps,
            h0 + eps * (self.hp1.to_f64() + eps * self.hp2.to_f64()),
            self.c0.to_f64() + eps * (self.c1.to_f64() + eps * self.c2.to_f64()),
        )
    }

    /// Exact truncated series at a rational `ε`, when all coefficients are exact.
    pub fn predict_exact(&self, eps: &BigRational) -> Option<[BigRational; 3]> {
        let (h0, c0) = (self.h0.exact()?, self.c0.exact()?);
        let (hp1, hp2, c1, c2) = (self.hp1.exact()?, self.hp2.exact()?, self.c1.exact()?, self.c2.exact()?);
        Some([h0 + eps, h0 + eps * (hp1 + eps * hp2), c0 + eps * (c1 + eps * c2)])
    }
}

/// One continued point of a branch with its consistency diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchSample {
    pub eps: f64,
    pub h: f64,
    pub hp: f64,
    pub c: f64,
    pub residual: f64,
    /// `|𝒮_up − 𝒮_down|`.
    pub flow_force_gap: f64,
    /// `|Q_up − Q_down|`.
    pub bernoulli_gap: f64,
    /// `|m₁ − c₁⁺h₊|`.
    pub flux_gap: f64,
    /// `|sample − series|`.
    pub series_gap: f64,
}

/// Existence hypotheses at a base point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Admissibility {
    pub dyn_residual: f64,
    pub new_residual: f64,
    /// `𝒫_conj(h₀,h₀,c₀) = 0` (exactly for rational data, within 1e−12 otherwise).
    pub bifurcation: bool,
    pub det_h_hp: f64,
    pub det_sum_c: f64,
    /// Determinant used by the ε-parametrized implicit function argument.
    pub det_hp_c: f64,
    /// Both displayed nondegeneracy determinants are nonzero.
    pub nondegenerate: bool,
    pub f300_positive: bool,
    pub critical_layer: bool,
    pub c0_nonzero: bool,
    /// Everything the branch construction and the bore coefficients need.
    pub admissible: bool,
}

/// The conjugate-flow system at fixed `(ρ, ω)`.
#[derive(Debug, Clone)]
pub struct ConjugateFlows {
    pub polys: ConjugatePolys,
    pub rho: Scalar,
    pub omega: Scalar,
    grads: [[MPoly; 3]; 2],
}

fn det2<T: Field>(a: [T; 2], b: [T; 2]) -> T {
    a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone()
}

fn solve2<T: Field>(a: [T; 2], b: [T; 2], rhs: [T; 2]) -> Option<[T; 2]> {
    let d = det2(a.clone(), b.clone());
    if d.is_zero_value() {
        return None;
    }
    Some([det2(rhs.clone(), b) / d.clone(), det2(a, rhs) / d])
}

impl ConjugateFlows {
    pub fn new(rho: Scalar, omega: Scalar) -> Result<Self> {
        Self::with_fault(rho, omega, Fault::None)
    }

    pub fn with_fault(rho: Scalar, omega: Scalar, fault: Fault) -> Result<Self> {
        let r = rho.to_f64();
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidParameter(format!("density ratio must lie in (0, 1], got {rho}")));
        }
        if !omega.to_f64().is_finite() {
            return Err(Error::InvalidParameter("vorticity must be finite".into()));
        }
        let polys = ConjugatePolys::with_fault(fault)?;
        let grads = [
            [polys.dyn_poly.derivative(H), polys.dyn_poly.derivative(HP), polys.dyn_poly.derivative(C)],
            [polys.new_poly.derivative(H), polys.new_poly.derivative(HP), polys.new_poly.derivative(C)],
        ];
        Ok(Self { polys, rho, omega, grads })
    }

    fn point<T: Field>(&self, h: T, hp: T, c: T) -> Option<[T; NVARS]> {
        Some([h, hp, c, scalar_as::<T>(&self.rho)?, scalar_as::<T>(&self.omega)?])
    }

    /// `(𝒫_dyn, 𝒫_new)` in floats.
    pub fn residual(&self, h: f64, hp: f64, c: f64) -> [f64; 2] {
        let x = self.point(h, hp, c).unwrap();
        [self.polys.dyn_poly.eval(&x), self.polys.new_poly.eval(&x)]
    }

    /// `(𝒫_dyn, 𝒫_new)` in exact arithmetic; `None` when `ρ` or `ω` is a float.
    pub fn residual_exact(&self, h: &BigRational, hp: &BigRational, c: &BigRational) -> Option<[BigRational; 2]> {
        let x = self.point(h.clone(), hp.clone(), c.clone())?;
        Some([self.polys.dyn_poly.eval(&x), self.polys.new_poly.eval(&x)])
    }

    /// `𝒫_flow` in floats.
    pub fn flow_residual(&self, h: f64, hp: f64, c: f64) -> f64 {
        self.polys.flow_poly.eval(&self.point(h, hp, c).unwrap())
    }

    /// Rows `∂(𝒫_dyn, 𝒫_new)/∂(h, h₊, c)`.
    pub fn jacobian<T: Field>(&self, h: T, hp: T, c: T) -> Option<[[T; 3]; 2]> {
        let x = self.point(h, hp, c)?;
        let g = |i: usize, j: usize| self.grads[i][j].eval(&x);
        Some([[g(0, 0), g(0, 1), g(0, 2)], [g(1, 0), g(1, 1), g(1, 2)]])
    }

    /// Damped Newton for `(h₊, c)` at fixed `h`.
    pub fn solve(&self, h: f64, guess: (f64, f64)) -> Result<ConjugateSolution> {
        let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
        let (mut hp, mut c) = guess;
        let mut res = norm(self.residual(h, hp, c));
        for it in 0..=50 {
            if res <= CONJ_TOL {
                return Ok(ConjugateSolution { h, hp, c, residual: res, iterations: it });
            }
            if it == 50 {
                break;
            }
            let j = self.jacobian(h, hp, c).unwrap();
            let r = self.residual(h, hp, c);
            let scale = j.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
            let d = det2([j[0][1], j[1][1]], [j[0][2], j[1][2]]);
            if d.abs() <= 1e-14 * scale * scale {
                return Err(Error::NondegeneracyFailed(format!("singular Jacobian (det {d:.3e}) at h = {h}")));
            }
            let step = solve2([j[0][1], j[1][1]], [j[0][2], j[1][2]], [-r[0], -r[1]]).unwrap();
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..=8 {
                let (hp1, c1) = (hp + t * step[0], c + t * step[1]);
                let r1 = norm(self.residual(h, hp1, c1));
                if r1 < res || r1 <= CONJ_TOL {
                    hp = hp1;
                    c = c1;
                    res = r1;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // Rounding floor: keep the full step once the residual stalls near tolerance.
                if res <= 1e3 * CONJ_TOL {
                    return Ok(ConjugateSolution { h, hp, c, residual: res, iterations: it + 1 });
                }
                return Err(Error::NoConjugateFlow { residual: res });
            }
        }
        Err(Error::NoConjugateFlow { residual: res })
    }

    /// Existence hypotheses at `(h₀, c₀)`.
    pub fn admissibility(&self, h0: &Scalar, c0: &Scalar) -> Admissibility {
        let (h, c, rho, omega) = (h0.to_f64(), c0.to_f64(), self.rho.to_f64(), self.omega.to_f64());
        let r = self.residual(h, h, c);
        let exact = match (h0.exact(), c0.exact()) {
            (Some(he), Some(ce)) => self.residual_exact(he, he, ce).map(|r| r[0].is_zero() && r[1].is_zero()),
            _ => None,
        };
        let bifurcation = exact.unwrap_or(r[0].abs() <= CONJ_TOL && r[1].abs() <= CONJ_TOL);
        let dets = self.base_dets(h0, c0);
        let nonzero = |d: f64| d.abs() > DET_ZERO;
        let nondegenerate = nonzero(dets[0]) && nonzero(dets[1]);
        let f300_positive = h * h * h * (1.0 - rho) + 4.0 * c * c * (1.0 - h) > c * c * h;
        let critical_layer = c * (c + (1.0 - h) * omega) < 0.0;
        let c0_nonzero = c != 0.0;
        let in_channel = h > 0.0 && h < 1.0;
        Admissibility {
            dyn_residual: r[0],
            new_residual: r[1],
            bifurcation,
            det_h_hp: dets[0],
            det_sum_c: dets[1],
            det_hp_c: dets[2],
            nondegenerate,
            f300_positive,
            critical_layer,
            c0_nonzero,
            admissible: bifurcation && in_channel && c0_nonzero && nonzero(dets[2]) && nonzero(dets[1]) && f300_positive,
        }
    }

    fn base_dets(&self, h0: &Scalar, c0: &Scalar) -> [f64; 3] {
        fn go<T: Field>(s: &ConjugateFlows, h: T, c: T) -> Option<[f64; 3]> {
            let j = s.jacobian(h.clone(), h, c)?;
            let col = |k: usize| [j[0][k].clone(), j[1][k].clone()];
            let sum = [j[0][0].clone() + j[0][1].clone(), j[1][0].clone() + j[1][1].clone()];
            Some([det2(col(0), col(1)).to_f64(), det2(sum, col(2)).to_f64(), det2(col(1), col(2)).to_f64()])
        }
        match (h0.exact(), c0.exact()) {
            (Some(h), Some(c)) => go(self, h.clone(), c.clone()),
            _ => None,
        }
        .or_else(|| go(self, h0.to_f64(), c0.to_f64()))
        .unwrap()
    }

    /// First- and second-order branch coefficients by implicit differentiation at `(h₀, h₀, c₀)`.
    pub fn branch_expand(&self, h0: &Scalar, c0: &Scalar) -> Result<BranchSeries> {
        let adm = self.admissibility(h0, c0);
        if !adm.bifurcation {
            return Err(Error::DegenerateParameters(format!(
                "base point is not a conjugate flow: residuals ({:.3e}, {:.3e})",
                adm.dyn_residual, adm.new_residual
            )));
        }
        if !adm.c0_nonzero {
            return Err(Error::DegenerateParameters("Froude number c0 = 0".into()));
        }
        let series = match (h0.exact(), c0.exact(), self.rho.is_exact() && self.omega.is_exact()) {
            (Some(h), Some(c), true) => self
                .expand_generic(h.clone(), c.clone())
                .map(|v| v.map(Scalar::Exact)),
            _ => self.expand_generic(h0.to_f64(), c0.to_f64()).map(|v| v.map(Scalar::Real)),
        }
        .ok_or_else(|| {
            Error::NondegeneracyFailed(format!("det ∂(𝒫_dyn, 𝒫_new)/∂(h₊, c) = {:.3e}", adm.det_hp_c))
        })?;
        let [hp1, hp2, c1, c2] = series;
        if (hp1.to_f64() - 1.0).abs() <= DET_ZERO {
            return Err(Error::NondegeneracyFailed("h₊,₁ = 1: the branch is trivial".into()));
        }
        Ok(BranchSeries { h0: h0.clone(), c0: c0.clone(), hp1, hp2, c1, c2 })
    }

    fn expand_generic<T: Field>(&self, h0: T, c0: T) -> Option<[T; 4]> {
        let x = self.point(h0.clone(), h0, c0)?;
        let polys = [&self.polys.dyn_poly, &self.polys.new_poly];
        let d1: Vec<[T; 3]> = (0..2).map(|i| [H, HP, C].map(|v| self.grads[i][v].eval(&x))).collect();
        let col = |k: usize| [d1[0][k].clone(), d1[1][k].clone()];
        let first = solve2(col(1), col(2), [-d1[0][0].clone(), -d1[1][0].clone()])?;
        let t = [T::from_int(1), first[0].clone(), first[1].clone()];
        let vars = [H, HP, C];
        let mut quad = [T::from_int(0), T::from_int(0)];
        for (i, poly) in polys.iter().enumerate() {
            for a in 0..3 {
                let da = poly.derivative(vars[a]);
                for b in 0..3 {
                    let v = da.derivative(vars[b]).eval(&x);
                    quad[i] = quad[i].clone() + v * t[a].clone() * t[b].clone();
                }
            }
        }
        let half = T::from_int(1) / T::from_int(2);
        let second = solve2(col(1), col(2), [-(half.clone() * quad[0].clone()), -(half * quad[1].clone())])?;
        Some([first[0].clone(), second[0].clone(), first[1].clone(), second[1].clone()])
    }

    /// Newton-continued branch point at `ε`, stepping from the base point with the series as predictor.
    pub fn continue_to(&self, series: &BranchSeries, eps: f64) -> Result<ConjugateSolution> {
        let steps = (eps.abs() / BRANCH_STEP).ceil().max(1.0) as usize;
        let (_, mut hp, mut c) = series.predict(0.0);
        let mut sol = None;
        for k in 1..=steps {
            let (e0, e1) = (eps * (k - 1) as f64 / steps as f64, eps * k as f64 / steps as f64);
            let (_, p0, q0) = series.predict(e0);
            let (h1, p1, q1) = series.predict(e1);
            let s = self.solve(h1, (hp + p1 - p0, c + q1 - q0))?;
            hp = s.hp;
            c = s.c;
            sol = Some(s);
        }
        Ok(sol.unwrap())
    }

    /// Continued samples with flow-force, Bernoulli, flux and series diagnostics.
    pub fn sample_branch(&self, series: &BranchSeries, eps: &[f64]) -> Result<Vec<BranchSample>> {
        let (rho, omega) = (self.rho.to_f64(), self.omega.to_f64());
        eps.iter()
            .map(|&e| {
                let s = self.continue_to(series, e)?;
                let st = FlowState::new(s.h, s.hp, s.c, rho, omega);
                let (_, hp_s, c_s) = series.predict(e);
                Ok(BranchSample {
                    eps: e,
                    h: s.h,
                    hp: s.hp,
                    c: s.c,
                    residual: s.residual,
                    flow_force_gap: (st.flow_force(Side::Upstream) - st.flow_force(Side::Downstream)).abs(),
                    bernoulli_gap: (st.bernoulli_upstream() - st.bernoulli_downstream()).abs(),
                    flux_gap: (st.m1() - st.c1_plus() * st.hp).abs(),
                    series_gap: (s.hp - hp_s).abs().max((s.c - c_s).abs()),
                })
            })
            .collect()
    }

    /// Central finite-difference slopes `(dh₊/dε, dc/dε)` of the continued branch at `ε = 0`.
    pub fn fd_slopes(&self, series: &BranchSeries, delta: f64) -> Result<(f64, f64)> {
        let a = self.continue_to(series, delta)?;
        let b = self.continue_to(series, -delta)?;
        Ok(((a.hp - b.hp) / (2.0 * delta), (a.c - b.c) / (2.0 * delta)))
    }

    /// Froude number with `𝒫_conj(h₀,h₀,c₀) = 0`: roots of `𝒫_dyn(h₀,h₀,·)`, the one with smallest `|𝒫_new|`.
    pub fn critical_froude(&self, h0: &Scalar) -> Result<Scalar> {
        let (h, rho, omega) = (h0.to_f64(), self.rho.to_f64(), self.omega.to_f64());
        // 𝒫_dyn(h,h,c) = 8h(1−h)·[c²(ρh+1−h) + cωρh(1−h) + (ρ−1)h(1−h)].
        let exact = match (h0.exact(), self.rho.exact(), self.omega.exact()) {
            (Some(h), Some(r), Some(w)) => {
                let one = BigRational::one();
                let a = r * h + &one - h;
                let b = w * r * h * (&one - h);
                let c = (r - &one) * h * (&one - h);
                let disc = &b * &b - BigRational::from_int(4) * &a * &c;
                rational_sqrt(&disc).map(|s| {
                    let two_a = BigRational::from_int(2) * &a;
                    [(-&b + &s) / &two_a, (-&b - &s) / &two_a].map(Scalar::Exact)
                })
            }
            _ => None,
        };
        let roots = match exact {
            Some(r) => r,
            None => {
                let a = rho * h + 1.0 - h;
                let b = omega * rho * h * (1.0 - h);
                let c = (rho - 1.0) * h * (1.0 - h);
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 {
                    return Err(Error::DegenerateParameters("no real critical Froude number".into()));
                }
                [(-b + disc.sqrt()) / (2.0 * a), (-b - disc.sqrt()) / (2.0 * a)].map(Scalar::Real)
            }
        };
        roots
            .into_iter()
            .filter(|c| c.to_f64() != 0.0)
            .map(|c| {
                let r = self.residual(h, h, c.to_f64())[1].abs();
                (r, c)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(b.1.to_f64().total_cmp(&a.1.to_f64())))
            .map(|(_, c)| c)
            .ok_or_else(|| Error::DegenerateParameters("only the trivial Froude number c = 0".into()))
    }
}

fn scalar_as<T: Field>(s: &Scalar) -> Option<T> {
    match s {
        Scalar::Exact(q) => Some(T::from_rational(q)),
        Scalar::Real(x) => T::from_real(*x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(d))
    }

    #[test]
    fn parses_rationals_exactly() {
        assert_eq!("25/52".parse::<Scalar>().unwrap(), Scalar::ratio(25, 52));
        assert_eq!("-9/10".parse::<Scalar>().unwrap(), Scalar::ratio(-9, 10));
        assert_eq!("0.01".parse::<Scalar>().unwrap(), Scalar::ratio(1, 100));
        assert_eq!("1e-3".parse::<Scalar>().unwrap(), Scalar::ratio(1, 1000));
        assert_eq!("-2.5E1".parse::<Scalar>().unwrap(), Scalar::int(-25));
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("sqrt(3)".parse::<Scalar>().is_err());
        assert_eq!(Scalar::ratio(-6, 29).to_string(), "-6/29");
    }

    #[test]
    fn division_is_exact_with_factor_three() {
        let polys = ConjugatePolys::new().unwrap();
        assert_eq!(polys.certificate.factor, "3");
        assert!(polys.certificate.remainder_zero && polys.certificate.reconstruction_exact);
    }

    #[test]
    fn linear_division_round_trip() {
        let (h, hp) = (MPoly::var(H), MPoly::var(HP));
        let p = &hp * &hp * &hp - &h * &hp + MPoly::int(7);
        let (quot, rem) = p.div_linear(HP, H);
        assert_eq!((&hp - &h) * quot + &rem, p);
        assert_eq!(rem, p.substitute(HP, &h));
    }

    #[test]
    fn substitute_and_derivative() {
        let (h, c) = (MPoly::var(H), MPoly::var(C));
        let p = &c * &c * &h;
        assert_eq!(p.derivative(C), MPoly::int(2) * &c * &h);
        assert_eq!(p.substitute(C, &h), &h * &h * &h);
    }

    #[test]
    fn homogeneous_base_point_is_exact_zero() {
        let s = ConjugateFlows::new(Scalar::int(1), Scalar::int(-9)).unwrap();
        let r = s.residual_exact(&q(2, 3), &q(2, 3), &q(2, 1)).unwrap();
        assert!(r[0].is_zero() && r[1].is_zero());
        let adm = s.admissibility(&Scalar::ratio(2, 3), &Scalar::int(2));
        assert!(adm.bifurcation && adm.nondegenerate && adm.admissible && adm.critical_layer);
    }

    #[test]
    fn bad_base_point_fails() {
        let s = ConjugateFlows::new(Scalar::int(1), Scalar::int(0)).unwrap();
        let adm = s.admissibility(&Scalar::ratio(1, 2), &Scalar::ratio(1, 2));
        assert!(!adm.bifurcation && !adm.admissible);
        assert!(s.branch_expand(&Scalar::ratio(1, 2), &Scalar::ratio(1, 2)).is_err());
    }

    #[test]
    fn critical_froude_generic_smooth() {
        let s = ConjugateFlows::new(Scalar::ratio(25, 52), Scalar::ratio(-9, 10)).unwrap();
        assert_eq!(s.critical_froude(&Scalar::ratio(2, 3)).unwrap(), Scalar::ratio(1, 2));
    }

    #[test]
    fn identical_states_have_equal_flow_force() {
        let st = FlowState::new(q(3, 5), q(3, 5), q(7, 4), q(1, 3), q(-2, 1));
        assert_eq!(st.flow_force(Side::Upstream), st.flow_force(Side::Downstream));
        assert_eq!(st.bernoulli_upstream(), st.bernoulli_downstream());
    }

    #[test]
    fn perturbed_dyn_still_divides() {
        let polys = ConjugatePolys::with_fault(Fault::PerturbDyn).unwrap();
        assert_ne!(polys.dyn_poly, poly_dyn());
    }
}
