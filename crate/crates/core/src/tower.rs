//! Degree identities, Hasse recursions and hypothesis checks for the
//! canonical subgroups `C_τ^n`.
//!
//! Hasse invariants enter as valuations. The μ-invariant valuation is the sum
//! of the partial ones.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_models::{enumerate_split_subgroups, LTProductGroup};
use crate::hn::cran_bound;
use crate::lt_crystals::frobenius_exponents;
use crate::rational::{parse_q, q_min, q_pow, qi, Q};
use crate::signature::{
    big_k_tau, constants, dual_signature, h1_precondition, h1_threshold, h3_threshold, hasse_threshold,
    EmbeddingIndex, Signature,
};

/// Partial Hasse valuations `ha_τ ∈ [0, 1]` and their sum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HasseInput {
    #[serde(with = "crate::rational::serde_qvec")]
    ha: Vec<Q>,
    #[serde(with = "crate::rational::serde_q")]
    mu_ha: Q,
}

impl HasseInput {
    pub fn new(ha: Vec<Q>) -> Result<Self> {
        for (i, v) in ha.iter().enumerate() {
            if v.is_negative() || *v > Q::one() {
                return Err(Error::InvalidHasse(format!("ha at τ{} must lie in [0, 1]", i + 1)));
            }
        }
        let mu_ha = ha.iter().fold(Q::zero(), |acc, x| acc + x);
        Ok(Self { ha, mu_ha })
    }

    pub fn zero(f: usize) -> Self {
        Self { ha: vec![Q::zero(); f], mu_ha: Q::zero() }
    }

    /// The same valuation `s` at every non-degenerate embedding, zero elsewhere.
    pub fn scalar(sig: &Signature, s: Q) -> Result<Self> {
        let ha = sig
            .embeddings()
            .map(|t| if sig.is_degenerate(t) { Q::zero() } else { s.clone() })
            .collect();
        Self::new(ha)
    }

    /// Accepts a scalar (`1/100`), a list (`[0, "1/100"]`) or a map keyed by
    /// 1-based embedding (`{tau2: "1/100"}`). Non-integer entries must be
    /// written as fraction strings; missing keys default to zero.
    pub fn parse(sig: &Signature, text: &str) -> Result<Self> {
        let t = text.trim();
        if !t.starts_with('[') && !t.starts_with('{') {
            return Self::scalar(sig, parse_q(t)?);
        }
        let value: serde_json::Value =
            json5::from_str(t).map_err(|e| Error::Parse(format!("--ha: {e}")))?;
        let f = sig.f();
        match value {
            serde_json::Value::Array(items) => {
                if items.len() != f {
                    return Err(Error::DimensionMismatch { expected: f, found: items.len() });
                }
                Self::new(items.iter().map(value_to_q).collect::<Result<_>>()?)
            }
            serde_json::Value::Object(map) => {
                let mut ha = vec![Q::zero(); f];
                for (k, v) in map {
                    let label = k.trim_start_matches("tau").trim_start_matches('τ');
                    let i: usize = label
                        .parse()
                        .map_err(|_| Error::Parse(format!("--ha: bad embedding key {k:?}")))?;
                    if i == 0 || i > f {
                        return Err(Error::EmbeddingOutOfRange { index: i, f });
                    }
                    ha[i - 1] = value_to_q(&v)?;
                }
                Self::new(ha)
            }
            _ => Err(Error::Parse("--ha: expected a rational, list or map".into())),
        }
    }

    pub fn ha(&self) -> &[Q] {
        &self.ha
    }

    pub fn at(&self, tau: EmbeddingIndex) -> &Q {
        &self.ha[tau.index()]
    }

    pub fn mu_ha(&self) -> &Q {
        &self.mu_ha
    }

    pub fn is_zero(&self) -> bool {
        self.mu_ha.is_zero()
    }
}

fn value_to_q(v: &serde_json::Value) -> Result<Q> {
    match v {
        serde_json::Value::String(s) => parse_q(s),
        serde_json::Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(qi(i)),
            None => Err(Error::Parse(format!("--ha: write {n} as a fraction"))),
        },
        _ => Err(Error::Parse("--ha: entries must be rationals".into())),
    }
}

fn check_ha(ha: &Q) -> Result<()> {
    if ha.is_negative() || *ha > Q::one() {
        return Err(Error::InvalidHasse("ha must lie in [0, 1]".into()));
    }
    Ok(())
}

/// `Σ_{i=1}^f min(p_τ, p_{σ^i τ}) p^{f-i}`.
pub fn weighted_min_sum(sig: &Signature, tau: EmbeddingIndex) -> Q {
    let pt = sig.p_of(tau);
    let f = sig.f() as u64;
    (1..=f)
        .map(|i| qi(pt.min(sig.p_of(tau.shift(i as i64))) as i64) * q_pow(sig.p(), f - i))
        .fold(Q::zero(), |a, b| a + b)
}

/// `Σ_{τ'} min(p_τ, p_τ')`.
pub fn min_sum(sig: &Signature, tau: EmbeddingIndex) -> Q {
    let pt = sig.p_of(tau);
    qi(sig.p_vec().iter().map(|&x| pt.min(x)).sum::<u64>() as i64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PTorsionReport {
    pub tau: usize,
    #[serde(with = "crate::rational::serde_q")]
    pub ha: Q,
    /// `Deg_τ(C)`.
    #[serde(with = "crate::rational::serde_q")]
    pub deg_identity_rhs: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub coker_degree: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub eps: Q,
    /// Lower bound for `deg_τ'(C)`, indexed by τ'.
    #[serde(with = "crate::rational::serde_qvec")]
    pub deg_lower_bounds: Vec<Q>,
    #[serde(with = "crate::rational::serde_q")]
    pub dual_deg_upper_bound: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub classical_lower_bound: Q,
    pub h1: bool,
    pub warning: Option<String>,
}

pub fn ptorsion_report(sig: &Signature, tau: EmbeddingIndex, ha: &Q) -> Result<PTorsionReport> {
    sig.check_tau(tau)?;
    sig.require_nondegenerate(tau)?;
    check_ha(ha)?;
    let f = sig.f() as u64;
    let pf1 = sig.pf_minus_one();
    let k = big_k_tau(sig, tau);
    let pt = sig.p_of(tau);
    let deg_identity_rhs = weighted_min_sum(sig, tau) - ha;
    let coker_degree = k.clone() + ha / pf1;
    let eps = q_min(&Q::one(), &((k + Q::one() - ha) / qi(sig.q_of(tau) as i64)));
    let mut deg_lower_bounds = vec![Q::zero(); sig.f()];
    for i in 1..=f {
        let slot = tau.shift(i as i64);
        deg_lower_bounds[slot.index()] =
            qi(pt.min(sig.p_of(slot)) as i64) - ha / q_pow(sig.p(), f - i);
    }
    let h1 = h1_precondition(sig, tau) && *ha < h1_threshold(sig, tau)?;
    let warning = (!h1).then(|| format!("hypothesis H1 fails at {tau}; degree formulas are unconditional only under H1"));
    Ok(PTorsionReport {
        tau: tau.index(),
        ha: ha.clone(),
        deg_identity_rhs,
        coker_degree,
        eps,
        deg_lower_bounds,
        dual_deg_upper_bound: ha.clone(),
        classical_lower_bound: min_sum(sig, tau) - ha,
        h1,
        warning,
    })
}

/// One step `Ha_τ(G/C) = (p^f - 1) deg_τ(C^D) + Ha_τ(G)`, valid while
/// `p^f deg_τ(C^D) + Ha_τ(G) < 1`.
pub fn hasse_recursion(sig: &Signature, tau: EmbeddingIndex, ha: &Q, deg_dual: &Q) -> Result<Q> {
    sig.check_tau(tau)?;
    check_ha(ha)?;
    if deg_dual.is_negative() {
        return Err(Error::InvalidHasse("dual degree must be non-negative".into()));
    }
    let pf = q_pow(sig.p(), sig.f() as u64);
    if pf.clone() * deg_dual + ha >= Q::one() {
        return Err(Error::WindowViolation { fallback: Q::one() - ha });
    }
    Ok((pf - Q::one()) * deg_dual + ha)
}

/// `p^f · ha`, the recursion with `deg_τ(C^D) = ha`.
pub fn worst_case(sig: &Signature, ha: &Q) -> Q {
    q_pow(sig.p(), sig.f() as u64) * ha
}

pub const HYPOTHESES: [&str; 5] = ["H1", "H2", "H3", "Hn", "Hf"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerLevel {
    pub level: u64,
    #[serde(with = "crate::rational::serde_q")]
    pub deg_dual: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub ha_quotient: Q,
    /// Lower bound for `Deg_τ(C_τ^m)`.
    #[serde(with = "crate::rational::serde_q")]
    pub deg_lower_bound: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub classical_lower_bound: Q,
    pub window_ok: bool,
    pub hypotheses: BTreeMap<String, bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerReport {
    pub tau: usize,
    #[serde(with = "crate::rational::serde_q")]
    pub ha: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub mu_ha: Q,
    pub n: u64,
    pub levels: Vec<TowerLevel>,
}

fn mu_hypothesis(sig: &Signature, mu_ha: &Q, n: u64) -> Result<bool> {
    for t in sig.active_embeddings() {
        if *mu_ha >= hasse_threshold(sig, t, n)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn tower_report(sig: &Signature, tau: EmbeddingIndex, ha: &HasseInput, n: u64) -> Result<TowerReport> {
    sig.check_tau(tau)?;
    sig.require_nondegenerate(tau)?;
    if ha.ha().len() != sig.f() {
        return Err(Error::DimensionMismatch { expected: sig.f(), found: ha.ha().len() });
    }
    if n == 0 {
        return Err(Error::InvalidSignature("level n must be positive".into()));
    }
    let h = ha.at(tau).clone();
    let pf = q_pow(sig.p(), sig.f() as u64);
    let weighted = weighted_min_sum(sig, tau);
    let classical = min_sum(sig, tau);
    let h1 = h1_precondition(sig, tau) && h < h1_threshold(sig, tau)?;
    let hf = mu_hypothesis(sig, ha.mu_ha(), sig.f() as u64)?;

    let mut levels = Vec::new();
    let mut current = h.clone();
    let mut deg = Q::zero();
    let mut classical_deg = Q::zero();
    for m in 1..=n {
        let deg_dual = current.clone();
        let window_ok = pf.clone() * &deg_dual + &current < Q::one();
        deg += weighted.clone() - &current;
        classical_deg += classical.clone() - &current;
        let next = (pf.clone() - Q::one()) * &deg_dual + &current;
        let mut hyp = BTreeMap::new();
        hyp.insert("H1".to_string(), h1);
        hyp.insert("H2".to_string(), deg > cran_bound(sig, m, tau)?);
        hyp.insert(
            "H3".to_string(),
            h1_precondition(sig, tau) && h < h3_threshold(sig, tau, m)?,
        );
        hyp.insert("Hn".to_string(), mu_hypothesis(sig, ha.mu_ha(), m)?);
        hyp.insert("Hf".to_string(), hf);
        levels.push(TowerLevel {
            level: m,
            deg_dual,
            ha_quotient: next.clone(),
            deg_lower_bound: deg.clone(),
            classical_lower_bound: classical_deg.clone(),
            window_ok,
            hypotheses: hyp,
        });
        current = next;
    }
    Ok(TowerReport { tau: tau.index(), ha: h, mu_ha: ha.mu_ha().clone(), n, levels })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeformationCheck {
    pub heights_match: bool,
    pub subgroup_match: bool,
    /// Torsion level of `K_n` on each rank-one copy.
    pub k_levels: Vec<u64>,
    /// Torsion level of `Ker F^{nf}` on each rank-one copy.
    pub ker_levels: Vec<u64>,
    pub k_height: u64,
    pub ker_height: u64,
    /// Index in the enumerated split lattice, when the lattice fits under the cap.
    pub lattice_position: Option<usize>,
}

/// Compares `K_n = Σ_τ Fil_τ(G[p^{nf}])[p^{n r_τ}]` with `Ker F^{nf}` inside
/// the split lattice of the μ-ordinary group.
pub fn frobenius_deformation_check(sig: &Signature, n: u64, ha: &HasseInput, cap: u64) -> Result<DeformationCheck> {
    if !ha.is_zero() {
        return Err(Error::NotMuOrdinary);
    }
    if n == 0 {
        return Err(Error::InvalidSignature("level n must be positive".into()));
    }
    let f = sig.f() as u64;
    let top = n * f;
    let g = LTProductGroup::mu_ordinary(sig, top);
    let r = constants(sig).r;

    let copies = g.copies();
    let mut k_levels = vec![0u64; copies.len()];
    let mut ker_levels = vec![0u64; copies.len()];
    for (c, &fi) in copies.iter().enumerate() {
        let set = &g.factors()[fi].set;
        // Fil_τ(G[p^{nf}]) is the product of the factors containing τ.
        for t in set.indices() {
            k_levels[c] = k_levels[c].max((n * r[t]).min(top));
        }
        let p_exps: u64 = frobenius_exponents(set).iter().sum();
        ker_levels[c] = (n * (f - p_exps)).min(top);
    }
    let k_height = g.split_desc(&k_levels).o_height;
    let ker_height = g.split_desc(&ker_levels).o_height;
    let expected = n * sig.p_vec().iter().sum::<u64>();
    let heights_match = k_height == ker_height && k_height == expected;

    let lattice_position = match enumerate_split_subgroups(&g, cap) {
        Ok(lat) => {
            let pk = lat.position(&k_levels);
            let pker = lat.position(&ker_levels);
            match (pk, pker) {
                (Some(a), Some(b)) if lat.nodes()[a].levels == k_levels && a == b => Some(a),
                _ => None,
            }
        }
        Err(Error::EnumerationCapExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let subgroup_match = k_levels == ker_levels;
    Ok(DeformationCheck { heights_match, subgroup_match, k_levels, ker_levels, k_height, ker_height, lattice_position })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppendixCheck {
    pub reduced_ok: bool,
    pub displayed_ok: bool,
    pub base_ok: bool,
    #[serde(with = "crate::rational::serde_q")]
    pub displayed_value: Q,
}

/// Left-hand side `A/D + 2B/D - 1/f` with `A = (p^{(n-1)f}-1)/(p^f-1)`,
/// `B = (p^{nf}-1)/(p^f-1)` and the given denominator `D`.
pub fn appendix_lhs(p: u64, n: u64, f: u64, denominator: &Q) -> Q {
    let pf1 = q_pow(p, f) - Q::one();
    let a = (q_pow(p, (n - 1) * f) - Q::one()) / pf1.clone();
    let b = (q_pow(p, n * f) - Q::one()) / pf1;
    a / denominator + qi(2) * b / denominator - Q::new(1.into(), f.into())
}

/// The displayed inequality with denominator `2 p^{(n-1)f} f`, its reduced
/// form and `2p^f ≥ 3f + 1`.
pub fn appendix_details(p: u64, n: u64, f: u64) -> Result<AppendixCheck> {
    if n == 0 || f == 0 || !crate::signature::is_prime(p) {
        return Err(Error::InvalidSignature("need p prime and n, f ≥ 1".into()));
    }
    let fq = qi(f as i64);
    let reduced = q_pow(p, (n - 1) * f) * (qi(2) * q_pow(p, f) - qi(3) * &fq - Q::one()) / &fq + qi(3);
    let denominator = qi(2) * q_pow(p, (n - 1) * f) * &fq;
    let displayed_value = appendix_lhs(p, n, f, &denominator);
    Ok(AppendixCheck {
        reduced_ok: !reduced.is_negative(),
        displayed_ok: displayed_value <= Q::one(),
        base_ok: qi(2) * q_pow(p, f) >= qi(3) * fq + Q::one(),
        displayed_value,
    })
}

pub fn appendix_lemma_check(p: u64, n: u64, f: u64) -> Result<bool> {
    let c = appendix_details(p, n, f)?;
    Ok(c.reduced_ok && c.displayed_ok && c.base_ok)
}

/// The same left-hand side read with denominator `2 p^{n-1} f`.
pub fn appendix_literal_reading(p: u64, n: u64, f: u64) -> Q {
    let denominator = qi(2) * q_pow(p, n - 1) * qi(f as i64);
    appendix_lhs(p, n, f, &denominator)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityReport {
    /// Each line of the chain bounding `deg D_τ^⊥` from below.
    #[serde(with = "crate::rational::serde_qvec")]
    pub chain: Vec<Q>,
    #[serde(with = "crate::rational::serde_q")]
    pub perp_deg_lower_bound: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub dual_route: Q,
    pub consistent: bool,
}

pub fn duality_bookkeeping(sig: &Signature, tau: EmbeddingIndex, ha: &Q) -> Result<DualityReport> {
    sig.check_tau(tau)?;
    check_ha(ha)?;
    if *ha >= hasse_threshold(sig, tau, 1)? {
        return Err(Error::HypothesisViolation(format!("Ha must be below the threshold at {tau}")));
    }
    let f = sig.f();
    let h = sig.h();
    let pt = sig.p_of(tau) as i64;
    let qt = sig.q_of(tau);
    let orbit: Vec<EmbeddingIndex> = (0..f as i64).map(|i| tau.shift(i)).collect();
    let sum = |g: &dyn Fn(EmbeddingIndex) -> i64| qi(orbit.iter().map(|&t| g(t)).sum::<i64>());

    let line1 = qi(f as i64 * pt) - sum(&|t| sig.q_of(t) as i64) + sum(&|t| qt.min(sig.q_of(t)) as i64) - ha;
    let line2 = sum(&|t| pt - sig.q_of(t) as i64 + qt.min(sig.q_of(t)) as i64) - ha;
    let line3 = sum(&|t| pt - sig.q_of(t) as i64 + h as i64 - (pt as u64).max(sig.p_of(t)) as i64) - ha;
    let line4 = sum(&|t| pt + sig.p_of(t) as i64 - (pt as u64).max(sig.p_of(t)) as i64) - ha;
    let line5 = sum(&|t| (pt as u64).min(sig.p_of(t)) as i64) - ha;

    // deg D^⊥ = Ht(G^D[p]/D) - deg(G^D[p]/D), read through the dual signature.
    let d = dual_signature(sig);
    let dual_route = qi(f as i64 * d.q_of(tau) as i64) - qi(d.p_vec().iter().sum::<u64>() as i64)
        + qi(d.p_vec().iter().map(|&x| x.min(d.p_of(tau))).sum::<u64>() as i64)
        - ha;

    let chain = vec![line1, line2, line3, line4, line5.clone()];
    let classical = ptorsion_report(sig, tau, ha)?.classical_lower_bound;
    let consistent = chain.iter().all(|x| *x == classical) && dual_route == classical;
    Ok(DualityReport { chain, perp_deg_lower_bound: line5, dual_route, consistent })
}
