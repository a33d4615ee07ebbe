//! Signatures of p-divisible O-modules and their scalar constants.
//!
//! Embeddings are the residues `0..f` and Frobenius acts by `+1 mod f`.
//! Human-facing labels are one-based (`τ1` is index 0).

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, q, q_min, q_pow, qi, Q};

/// An embedding `τ`, stored as its index together with `f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EmbeddingIndex {
    index: usize,
    f: usize,
}

impl EmbeddingIndex {
    pub fn new(index: usize, f: usize) -> Result<Self> {
        if f == 0 || index >= f {
            return Err(Error::EmbeddingOutOfRange { index, f });
        }
        Ok(Self { index, f })
    }

    pub fn index(self) -> usize {
        self.index
    }

    pub fn f(self) -> usize {
        self.f
    }

    /// `σ^k τ`, for any integer `k`.
    pub fn shift(self, k: i64) -> Self {
        let f = self.f as i64;
        let index = (self.index as i64 + k).rem_euclid(f) as usize;
        Self { index, f: self.f }
    }

    pub fn sigma(self) -> Self {
        self.shift(1)
    }

    pub fn sigma_inv(self) -> Self {
        self.shift(-1)
    }

    /// All embeddings for a given `f`, in index order.
    pub fn all(f: usize) -> impl Iterator<Item = EmbeddingIndex> {
        (0..f).map(move |index| EmbeddingIndex { index, f })
    }
}

impl fmt::Display for EmbeddingIndex {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "τ{}", self.index + 1)
    }
}

/// A subset of the embedding set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EmbeddingSet {
    members: Vec<bool>,
}

impl EmbeddingSet {
    pub fn empty(f: usize) -> Self {
        Self { members: vec![false; f] }
    }

    pub fn full(f: usize) -> Self {
        Self { members: vec![true; f] }
    }

    pub fn from_indices(f: usize, indices: &[usize]) -> Result<Self> {
        let mut s = Self::empty(f);
        for &i in indices {
            if i >= f {
                return Err(Error::EmbeddingOutOfRange { index: i, f });
            }
            s.members[i] = true;
        }
        Ok(s)
    }

    /// The subset encoded by the low `f` bits of `mask`.
    pub fn from_mask(f: usize, mask: u64) -> Self {
        Self { members: (0..f).map(|i| mask >> i & 1 == 1).collect() }
    }

    pub fn f(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.get(i).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.f()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.f() == other.f() && self.members.iter().zip(&other.members).all(|(a, b)| !a || *b)
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.f()).filter(|&i| self.members[i]).collect()
    }

    /// `σ^k S`.
    pub fn shift(&self, k: i64) -> Self {
        let f = self.f() as i64;
        let mut out = Self::empty(self.f());
        for i in self.indices() {
            out.members[(i as i64 + k).rem_euclid(f) as usize] = true;
        }
        out
    }
}

impl fmt::Display for EmbeddingSet {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(fm, "∅");
        }
        let labels: Vec<String> = self.indices().iter().map(|i| format!("τ{}", i + 1)).collect();
        write!(fm, "{{{}}}", labels.join(","))
    }
}

impl Serialize for EmbeddingSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.indices().serialize(s)
    }
}

/// Signature `(f, p, h, q)` with `p_τ = h - q_τ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SignatureRepr", into = "SignatureRepr")]
pub struct Signature {
    f: usize,
    p: u64,
    h: u64,
    q: Vec<u64>,
}

#[derive(Clone, Serialize, Deserialize)]
struct SignatureRepr {
    f: usize,
    p: u64,
    h: u64,
    q: Vec<u64>,
}

impl TryFrom<SignatureRepr> for Signature {
    type Error = Error;
    fn try_from(r: SignatureRepr) -> Result<Self> {
        Signature::new(r.f, r.p, r.h, r.q)
    }
}

impl From<Signature> for SignatureRepr {
    fn from(s: Signature) -> Self {
        SignatureRepr { f: s.f, p: s.p, h: s.h, q: s.q }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl Signature {
    pub fn new(f: usize, p: u64, h: u64, q: Vec<u64>) -> Result<Self> {
        if f == 0 {
            return Err(Error::InvalidSignature("f must be positive".into()));
        }
        if !is_prime(p) {
            return Err(Error::InvalidSignature(format!("p = {p} is not prime")));
        }
        if h == 0 {
            return Err(Error::InvalidSignature("h must be positive".into()));
        }
        if q.len() != f {
            return Err(Error::InvalidSignature(format!("expected {f} entries in q, got {}", q.len())));
        }
        if let Some(bad) = q.iter().find(|&&x| x > h) {
            return Err(Error::InvalidSignature(format!("q entry {bad} exceeds h = {h}")));
        }
        Ok(Self { f, p, h, q })
    }

    /// Parses the literal `{f, p, h, q:[...]}`; keys may be unquoted.
    pub fn parse(literal: &str) -> Result<Self> {
        let repr: SignatureRepr =
            json5::from_str(literal).map_err(|e| Error::Parse(format!("signature literal: {e}")))?;
        Self::try_from(repr)
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn h(&self) -> u64 {
        self.h
    }

    pub fn q_vec(&self) -> &[u64] {
        &self.q
    }

    pub fn p_vec(&self) -> Vec<u64> {
        self.q.iter().map(|&x| self.h - x).collect()
    }

    pub fn q_of(&self, tau: EmbeddingIndex) -> u64 {
        self.q[tau.index()]
    }

    pub fn p_of(&self, tau: EmbeddingIndex) -> u64 {
        self.h - self.q[tau.index()]
    }

    /// Checked embedding constructor for this signature.
    pub fn tau(&self, index: usize) -> Result<EmbeddingIndex> {
        EmbeddingIndex::new(index, self.f)
    }

    pub fn embeddings(&self) -> impl Iterator<Item = EmbeddingIndex> {
        EmbeddingIndex::all(self.f)
    }

    pub fn check_tau(&self, tau: EmbeddingIndex) -> Result<()> {
        if tau.f() != self.f {
            return Err(Error::DimensionMismatch { expected: self.f, found: tau.f() });
        }
        Ok(())
    }

    pub fn is_degenerate(&self, tau: EmbeddingIndex) -> bool {
        let qt = self.q_of(tau);
        qt == 0 || qt == self.h
    }

    /// Non-degenerate embeddings, ascending.
    pub fn active_embeddings(&self) -> Vec<EmbeddingIndex> {
        self.embeddings().filter(|&t| !self.is_degenerate(t)).collect()
    }

    pub(crate) fn require_nondegenerate(&self, tau: EmbeddingIndex) -> Result<()> {
        self.check_tau(tau)?;
        if self.is_degenerate(tau) {
            return Err(Error::DegenerateEmbedding { tau: tau.index() });
        }
        Ok(())
    }

    /// `p^f - 1`.
    pub fn pf_minus_one(&self) -> Q {
        q_pow(self.p, self.f as u64) - Q::one()
    }

    pub fn dual(&self) -> Signature {
        dual_signature(self)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs: Vec<String> = self.q.iter().map(|x| x.to_string()).collect();
        write!(fm, "{{f:{},p:{},h:{},q:[{}]}}", self.f, self.p, self.h, qs.join(","))
    }
}

/// `k_τ`, `K_τ`, `r_τ` and `n_τ` for every embedding, indexed by τ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureConstants {
    pub k: Vec<u64>,
    #[serde(rename = "K", with = "crate::rational::serde_qvec")]
    pub big_k: Vec<Q>,
    pub r: Vec<u64>,
    pub n_tau: Vec<u64>,
}

fn sat_sub(a: u64, b: u64) -> u64 {
    a.saturating_sub(b)
}

/// `k_τ = Σ_τ' max(0, q_τ - q_τ')`.
pub fn k_tau(sig: &Signature, tau: EmbeddingIndex) -> u64 {
    let qt = sig.q_of(tau);
    sig.q.iter().map(|&x| sat_sub(qt, x)).sum()
}

/// `K_τ = Σ_{j=1}^{f-1} p^j max(0, q_τ - q_{σ^{-j}τ}) / (p^f - 1)`.
pub fn big_k_tau(sig: &Signature, tau: EmbeddingIndex) -> Q {
    let qt = sig.q_of(tau);
    let mut num = Q::zero();
    for j in 1..sig.f {
        let other = sig.q_of(tau.shift(-(j as i64)));
        num += q_pow(sig.p, j as u64) * qi(sat_sub(qt, other) as i64);
    }
    num / sig.pf_minus_one()
}

pub fn constants(sig: &Signature) -> SignatureConstants {
    let taus: Vec<EmbeddingIndex> = sig.embeddings().collect();
    SignatureConstants {
        k: taus.iter().map(|&t| k_tau(sig, t)).collect(),
        big_k: taus.iter().map(|&t| big_k_tau(sig, t)).collect(),
        r: taus
            .iter()
            .map(|&t| sig.q.iter().filter(|&&x| x <= sig.q_of(t)).count() as u64)
            .collect(),
        n_tau: taus
            .iter()
            .map(|&t| sig.q.iter().filter(|&&x| x == sig.q_of(t)).count() as u64)
            .collect(),
    }
}

/// `1 + K_τ - 2 q_τ/(p-1)`.
fn h1_margin(sig: &Signature, tau: EmbeddingIndex) -> Q {
    Q::one() + big_k_tau(sig, tau) - q(2 * sig.q_of(tau) as i64, sig.p as i64 - 1)
}

/// Threshold of hypothesis (H_n): `p^{-(n-1)f} min(1/2, 1 + K_τ - 2q_τ/(p-1))`.
pub fn hasse_threshold(sig: &Signature, tau: EmbeddingIndex, n: u64) -> Result<Q> {
    sig.require_nondegenerate(tau)?;
    if n == 0 {
        return Err(Error::InvalidSignature("level n must be positive".into()));
    }
    let m = q_min(&q(1, 2), &h1_margin(sig, tau));
    Ok(m / q_pow(sig.p, (n - 1) * sig.f as u64))
}

/// Whether `2q_τ/(p-1) < 1 + K_τ`, the standing condition of (H1) and (H3).
pub fn h1_precondition(sig: &Signature, tau: EmbeddingIndex) -> bool {
    h1_margin(sig, tau) > Q::zero()
}

/// Right-hand side of (H1): `1 + K_τ - 2q_τ/(p-1)`.
pub fn h1_threshold(sig: &Signature, tau: EmbeddingIndex) -> Result<Q> {
    sig.require_nondegenerate(tau)?;
    Ok(h1_margin(sig, tau))
}

/// Right-hand side of (H3): `(1 + K_τ)/p^{(n-1)f} - 2q_τ/(p^{nf} - p^{(n-1)f})`.
pub fn h3_threshold(sig: &Signature, tau: EmbeddingIndex, n: u64) -> Result<Q> {
    sig.require_nondegenerate(tau)?;
    if n == 0 {
        return Err(Error::InvalidSignature("level n must be positive".into()));
    }
    let f = sig.f as u64;
    let low = q_pow(sig.p, (n - 1) * f);
    let high = q_pow(sig.p, n * f);
    Ok((Q::one() + big_k_tau(sig, tau)) / low.clone() - qi(2 * sig.q_of(tau) as i64) / (high - low))
}

/// Existence bound of the tower theorem:
/// `p^{-(n-1)f} min(1/2, 1 + K_τ - q_τ/(p-1))`.
pub fn existence_threshold(sig: &Signature, tau: EmbeddingIndex, n: u64) -> Result<Q> {
    sig.require_nondegenerate(tau)?;
    if n == 0 {
        return Err(Error::InvalidSignature("level n must be positive".into()));
    }
    let margin = Q::one() + big_k_tau(sig, tau) - q(sig.q_of(tau) as i64, sig.p as i64 - 1);
    Ok(q_min(&q(1, 2), &margin) / q_pow(sig.p, (n - 1) * sig.f as u64))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdmissibilityViolation {
    /// `p` does not exceed `max{2q_τ/(1+K_τ)} + 1`.
    PrimeBound {
        #[serde(with = "crate::rational::serde_q")]
        bound: Q,
    },
    /// `q_τ < p - 1` fails at a non-degenerate embedding.
    QBelowPMinusOne { tau: usize, q: u64 },
}

impl fmt::Display for AdmissibilityViolation {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdmissibilityViolation::PrimeBound { bound } => {
                write!(fm, "p > max{{2q_τ/(1+K_τ)}} + 1 = {} fails", fmt_q(bound))
            }
            AdmissibilityViolation::QBelowPMinusOne { tau, q } => {
                write!(fm, "q_τ < p−1 fails at τ{} (q_τ = {q})", tau + 1)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// `max{2q_τ/(1+K_τ) : q_τ ≠ h} + 1`, absent when no embedding qualifies.
    #[serde(with = "crate::rational::serde_qopt")]
    pub prime_bound: Option<Q>,
    /// The max ranges over an empty set; the prime condition then holds.
    pub vacuous: bool,
    pub violations: Vec<AdmissibilityViolation>,
}

pub fn prime_admissible(sig: &Signature) -> Admissibility {
    let p = qi(sig.p as i64);
    let prime_bound = sig
        .embeddings()
        .filter(|&t| sig.q_of(t) != sig.h)
        .map(|t| qi(2 * sig.q_of(t) as i64) / (Q::one() + big_k_tau(sig, t)))
        .max()
        .map(|m| m + Q::one());
    let mut violations = Vec::new();
    if let Some(b) = &prime_bound {
        if p <= *b {
            violations.push(AdmissibilityViolation::PrimeBound { bound: b.clone() });
        }
    }
    for t in sig.embeddings() {
        let qt = sig.q_of(t);
        if !sig.is_degenerate(t) && qt + 1 >= sig.p {
            violations.push(AdmissibilityViolation::QBelowPMinusOne { tau: t.index(), q: qt });
        }
    }
    Admissibility {
        admissible: violations.is_empty(),
        vacuous: prime_bound.is_none(),
        prime_bound,
        violations,
    }
}

/// One factor `LT_A^mult` of the μ-ordinary product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LtFactor {
    pub set: EmbeddingSet,
    pub mult: u64,
}

/// `G = Π_l LT_{A_l}^{q^(l+1) - q^(l)}` with `A_l = {τ : q_τ ≤ q^(l)}`,
/// `q^(0) = 0` and `q^(r+1) = h`. Zero multiplicities are dropped.
pub fn mu_ordinary_decomposition(sig: &Signature) -> Vec<LtFactor> {
    let mut ladder: Vec<u64> = sig.q.clone();
    ladder.sort_unstable();
    ladder.dedup();
    ladder.insert(0, 0);
    ladder.push(sig.h);
    let mut out = Vec::new();
    for l in 0..ladder.len() - 1 {
        let mult = ladder[l + 1] - ladder[l];
        if mult == 0 {
            continue;
        }
        let idx: Vec<usize> = (0..sig.f).filter(|&i| sig.q[i] <= ladder[l]).collect();
        let set = EmbeddingSet::from_indices(sig.f, &idx).expect("indices in range");
        out.push(LtFactor { set, mult });
    }
    out
}

/// Cosignature of `Π LT_A^mult`, i.e. `q_τ = h - Σ mult·[τ ∈ A]`.
pub fn signature_of_factors(f: usize, factors: &[LtFactor]) -> (u64, Vec<u64>) {
    let h: u64 = factors.iter().map(|x| x.mult).sum();
    let q = (0..f)
        .map(|i| h - factors.iter().filter(|x| x.set.contains(i)).map(|x| x.mult).sum::<u64>())
        .collect();
    (h, q)
}

pub fn dual_signature(sig: &Signature) -> Signature {
    Signature { f: sig.f, p: sig.p, h: sig.h, q: sig.p_vec() }
}
