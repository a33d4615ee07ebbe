//! Crystalline period monomials `t_O^a · Π_j (φ^j(t_O)/p)^{b_j} · p^c`.
//!
//! A monomial keeps one exponent per factor `u_0 = t_O`, `u_j = φ^j(t_O)/p`
//! (`1 ≤ j < f`), plus a power of `p`. Frobenius sends `u_0` to `p·u_1`,
//! `u_j` to `u_{j+1}` and `u_{f-1}` back to `u_0`, so `φ^f(t_O) = p·t_O`.
//! Units are dropped throughout.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{big_pow, q, qi, Q};
use crate::signature::{big_k_tau, EmbeddingIndex, Signature};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodMonomial {
    exps: Vec<i64>,
    c: i64,
}

impl PeriodMonomial {
    /// `t_O^a · Π_{j=1}^{f-1} (φ^j t_O/p)^{b_j} · p^c` with `f = b.len() + 1`.
    pub fn new(a: i64, b: Vec<i64>, c: i64) -> Self {
        let mut exps = Vec::with_capacity(b.len() + 1);
        exps.push(a);
        exps.extend(b);
        Self { exps, c }
    }

    pub fn one(f: usize) -> Self {
        assert!(f > 0, "f must be positive");
        Self { exps: vec![0; f], c: 0 }
    }

    pub fn t_o(f: usize) -> Self {
        Self::u(f, 0)
    }

    /// `φ^j(t_O)/p` for `1 ≤ j < f`, and `t_O` for `j = 0`.
    pub fn u(f: usize, j: usize) -> Self {
        let mut m = Self::one(f);
        m.exps[j % f] = 1;
        m
    }

    pub fn p_power(f: usize, k: i64) -> Self {
        let mut m = Self::one(f);
        m.c = k;
        m
    }

    pub fn f(&self) -> usize {
        self.exps.len()
    }

    pub fn a(&self) -> i64 {
        self.exps[0]
    }

    pub fn b(&self) -> &[i64] {
        &self.exps[1..]
    }

    pub fn c(&self) -> i64 {
        self.c
    }

    /// Exponent of `u_j`, with `u_0 = t_O`.
    pub fn exponent(&self, j: usize) -> i64 {
        self.exps[j]
    }

    pub fn is_one(&self) -> bool {
        self.c == 0 && self.exps.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.f(), other.f(), "monomials over different f");
        let exps = self.exps.iter().zip(&other.exps).map(|(x, y)| x + y).collect();
        Self { exps, c: self.c + other.c }
    }

    pub fn pow(&self, k: i64) -> Self {
        Self { exps: self.exps.iter().map(|x| x * k).collect(), c: self.c * k }
    }

    pub fn times_p(&self, k: i64) -> Self {
        Self { exps: self.exps.clone(), c: self.c + k }
    }

    pub fn frobenius(&self) -> Self {
        let f = self.f();
        let mut exps = vec![0; f];
        for (j, &e) in self.exps.iter().enumerate() {
            exps[(j + 1) % f] += e;
        }
        Self { exps, c: self.c + self.exps[0] }
    }

    pub fn frobenius_iter(&self, k: usize) -> Self {
        (0..k).fold(self.clone(), |m, _| m.frobenius())
    }

    fn check_nonnegative(&self) -> Result<()> {
        if self.exps.iter().any(|&e| e < 0) {
            return Err(Error::NegativeExponent);
        }
        Ok(())
    }

    /// Filtration degree `a`.
    pub fn fil_degree(&self) -> Result<i64> {
        self.check_nonnegative()?;
        Ok(self.exps[0])
    }

    /// `(a + Σ_j b_j p^j)/(p^f - 1) + c`.
    pub fn valuation(&self, p: u64) -> Result<Q> {
        self.check_nonnegative()?;
        let f = self.f() as u64;
        let pb = BigInt::from(p);
        let mut num = BigInt::zero();
        for &e in self.exps.iter().rev() {
            num = num * &pb + e;
        }
        let den: BigInt = big_pow(p, f) - 1u32;
        Ok(Q::new(num + &den * self.c, den))
    }
}

impl fmt::Display for PeriodMonomial {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.exps[0] != 0 {
            parts.push(format!("t_O^{}", self.exps[0]));
        }
        for (j, &e) in self.exps.iter().enumerate().skip(1) {
            if e != 0 {
                parts.push(format!("(phi^{j} t_O / p)^{e}"));
            }
        }
        if self.c != 0 {
            parts.push(format!("p^{}", self.c));
        }
        if parts.is_empty() {
            write!(fm, "1")
        } else {
            write!(fm, "{}", parts.join(" * "))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MonomialRepr {
    a: i64,
    b: Vec<i64>,
    c: i64,
}

impl Serialize for PeriodMonomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MonomialRepr { a: self.a(), b: self.b().to_vec(), c: self.c }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeriodMonomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = MonomialRepr::deserialize(d)?;
        Ok(PeriodMonomial::new(r.a, r.b, r.c))
    }
}

pub fn monomial_frobenius(m: &PeriodMonomial) -> PeriodMonomial {
    m.frobenius()
}

/// `(fil_degree, valuation)`.
pub fn graded_valuation(m: &PeriodMonomial, p: u64) -> Result<(i64, Q)> {
    Ok((m.fil_degree()?, m.valuation(p)?))
}

/// One monomial per embedding slot, indexed by τ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodVector {
    entries: Vec<PeriodMonomial>,
}

impl PeriodVector {
    pub fn new(entries: Vec<PeriodMonomial>) -> Result<Self> {
        let f = entries.len();
        if f == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if let Some(bad) = entries.iter().find(|m| m.f() != f) {
            return Err(Error::DimensionMismatch { expected: f, found: bad.f() });
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[PeriodMonomial] {
        &self.entries
    }

    pub fn get(&self, tau: EmbeddingIndex) -> &PeriodMonomial {
        &self.entries[tau.index()]
    }
}

impl Serialize for PeriodVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Slot<'a> {
            tau: usize,
            monomial: &'a PeriodMonomial,
            text: String,
        }
        let slots: Vec<Slot> = self
            .entries
            .iter()
            .enumerate()
            .map(|(tau, m)| Slot { tau, monomial: m, text: m.to_string() })
            .collect();
        slots.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeriodVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Slot {
            tau: usize,
            monomial: PeriodMonomial,
        }
        let slots: Vec<Slot> = Vec::deserialize(d)?;
        if slots.iter().enumerate().any(|(i, s)| s.tau != i) {
            return Err(D::Error::custom("slots must be listed in τ order"));
        }
        PeriodVector::new(slots.into_iter().map(|s| s.monomial).collect()).map_err(D::Error::custom)
    }
}

/// `t = t_O · Π_{j=1}^{f-1} φ^j(t_O)/p`.
pub fn cyclotomic_period(f: usize) -> PeriodMonomial {
    PeriodMonomial::new(1, vec![1; f - 1], 0)
}

/// Checks `v(t) = 1/(p-1)` and `φ(t) = p·t`.
pub fn t_decomposition_check(f: usize, p: u64) -> bool {
    if f == 0 || p < 2 {
        return false;
    }
    let t = cyclotomic_period(f);
    let val_ok = t.valuation(p).map(|v| v == q(1, p as i64 - 1)).unwrap_or(false);
    val_ok && t.frobenius() == t.times_p(1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplicationMap {
    pub coeffs: PeriodVector,
    #[serde(rename = "K_value", with = "crate::rational::serde_q")]
    pub k_value: Q,
    pub transport_ok: bool,
}

/// Coefficient of the period multiplication map at slot `τ'`.
fn mult_coeff(sig: &Signature, tau: EmbeddingIndex, tp: EmbeddingIndex) -> PeriodMonomial {
    let qt = sig.q_of(tau) as i64;
    let f = sig.f();
    let a = (qt - sig.q_of(tp) as i64).max(0);
    let b = (1..f)
        .map(|j| (qt - sig.q_of(tp.shift(-(j as i64))) as i64).max(0))
        .collect();
    PeriodMonomial::new(a, b, 0)
}

pub fn multiplication_map(sig: &Signature, tau: EmbeddingIndex) -> Result<MultiplicationMap> {
    sig.require_nondegenerate(tau)?;
    let entries: Vec<PeriodMonomial> = sig.embeddings().map(|tp| mult_coeff(sig, tau, tp)).collect();
    let coeffs = PeriodVector::new(entries)?;
    let k_value = coeffs.get(tau).valuation(sig.p())?;
    let qt = sig.q_of(tau) as i64;
    let transport_ok = sig.embeddings().all(|tp| {
        let lhs = coeffs.get(tp).frobenius().times_p(qt.min(sig.q_of(tp) as i64));
        let rhs = coeffs.get(tp.sigma()).times_p(qt);
        lhs == rhs
    });
    Ok(MultiplicationMap { coeffs, k_value, transport_ok })
}

/// Valuation of the period multiplication at slot τ modulo `Fil^1`.
pub fn mod_fil1_valuation(sig: &Signature, tau: EmbeddingIndex) -> Result<Q> {
    sig.require_nondegenerate(tau)?;
    Ok(big_k_tau(sig, tau))
}

/// Valuation of the same element modulo `(p, Fil^p)`, i.e. `K_τ/p`.
pub fn mod_p_filp_valuation(sig: &Signature, tau: EmbeddingIndex) -> Result<Q> {
    Ok(mod_fil1_valuation(sig, tau)? / qi(sig.p() as i64))
}

/// Exponents of the diagonal matrix `D`, listed for the blocks `σ^i τ`, `i = 0..f`;
/// block `σ^i τ` gets `min(q_τ, q_{σ^{i-1} τ})`.
pub fn d_matrix(sig: &Signature, tau: EmbeddingIndex) -> Result<Vec<u64>> {
    sig.check_tau(tau)?;
    let qt = sig.q_of(tau);
    Ok((0..sig.f() as i64).map(|i| qt.min(sig.q_of(tau.shift(i - 1)))).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaltingsMargin {
    #[serde(with = "crate::rational::serde_q")]
    pub value: Q,
    pub margin_ok: bool,
}

/// `K_τ/p + q_τ/(p(p-1)) + q_τ/p`, required to stay below 1.
pub fn faltings_margin(sig: &Signature, tau: EmbeddingIndex) -> Result<FaltingsMargin> {
    sig.check_tau(tau)?;
    let p = sig.p() as i64;
    let qt = sig.q_of(tau) as i64;
    let value = big_k_tau(sig, tau) / qi(p) + q(qt, p * (p - 1)) + q(qt, p);
    Ok(FaltingsMargin { margin_ok: value < Q::one(), value })
}
