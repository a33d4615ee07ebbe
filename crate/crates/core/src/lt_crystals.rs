//! Explicit crystals of the generalized Lubin-Tate modules `LT_S`.
//!
//! The crystal has basis `e_τ` and `Φ(e_{σ^{-1}τ}) = p^{ε_τ} e_τ` with
//! `ε_τ = 0` when `σ^{-1}τ ∈ S` and `1` otherwise.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::periods::{PeriodMonomial, PeriodVector};
use crate::rational::{big_pow, q, Q};
use crate::signature::{is_prime, EmbeddingIndex, EmbeddingSet};

/// `LT_S` over `O` of degree `f`, with a chosen `τ0 ∉ S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LTSModel {
    f: usize,
    p: u64,
    s: EmbeddingSet,
    tau0: usize,
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    f: usize,
    p: u64,
    #[serde(rename = "S")]
    s: Vec<usize>,
    tau0: usize,
}

impl LTSModel {
    pub fn new(p: u64, s: EmbeddingSet, tau0: usize) -> Result<Self> {
        let f = s.f();
        if f == 0 {
            return Err(Error::InvalidModel("f must be positive".into()));
        }
        if !is_prime(p) {
            return Err(Error::InvalidModel(format!("p = {p} is not prime")));
        }
        if s.is_full() {
            return Err(Error::InvalidModel("S must be a proper subset".into()));
        }
        if tau0 >= f {
            return Err(Error::EmbeddingOutOfRange { index: tau0, f });
        }
        if s.contains(tau0) {
            return Err(Error::InvalidModel("τ0 must lie outside S".into()));
        }
        Ok(Self { f, p, s, tau0 })
    }

    /// Parses `{f, p, S:[indices], tau0}`; keys may be unquoted.
    pub fn parse(literal: &str) -> Result<Self> {
        let r: ModelRepr =
            json5::from_str(literal).map_err(|e| Error::Parse(format!("model literal: {e}")))?;
        Self::new(r.p, EmbeddingSet::from_indices(r.f, &r.s)?, r.tau0)
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn s(&self) -> &EmbeddingSet {
        &self.s
    }

    pub fn tau0(&self) -> EmbeddingIndex {
        EmbeddingIndex::new(self.tau0, self.f).expect("validated")
    }
}

impl Serialize for LTSModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelRepr { f: self.f, p: self.p, s: self.s.indices(), tau0: self.tau0 }.serialize(s)
    }
}

/// `ε_τ` for an arbitrary subset `S`, indexed by τ.
pub fn frobenius_exponents(s: &EmbeddingSet) -> Vec<u64> {
    let f = s.f();
    (0..f).map(|t| u64::from(!s.contains((t + f - 1) % f))).collect()
}

pub fn frobenius_matrix(m: &LTSModel) -> Vec<u64> {
    frobenius_exponents(&m.s)
}

/// Semilinear `Φ` on a crystal vector: slot τ receives `p^{ε_τ} φ(v_{σ^{-1}τ})`.
pub fn apply_frobenius(exps: &[u64], v: &PeriodVector) -> Result<PeriodVector> {
    let f = exps.len();
    if v.entries().len() != f {
        return Err(Error::DimensionMismatch { expected: f, found: v.entries().len() });
    }
    let out = (0..f)
        .map(|t| v.entries()[(t + f - 1) % f].frobenius().times_p(exps[t] as i64))
        .collect();
    PeriodVector::new(out)
}

/// `x = Π_{j=1}^{f-1} (φ^j t_O/p)^{[σ^{-j}τ0 ∈ S]}`.
fn seed(m: &LTSModel) -> PeriodMonomial {
    let t0 = m.tau0();
    let b = (1..m.f)
        .map(|j| i64::from(m.s.contains(t0.shift(-(j as i64)).index())))
        .collect();
    PeriodMonomial::new(0, b, 0)
}

/// The generator `T_0`: slot `σ^j τ0` holds `φ^j(x) · p^{-|S ∩ {τ0, …, σ^{j-1}τ0}|}`.
pub fn tate_generator(m: &LTSModel) -> Result<PeriodVector> {
    let t0 = m.tau0();
    let x = seed(m);
    let mut entries = vec![PeriodMonomial::one(m.f); m.f];
    let mut current = x;
    let mut hits = 0i64;
    for j in 0..m.f {
        let slot = t0.shift(j as i64);
        let mono = current.times_p(-hits);
        if mono.c() < 0 || (0..m.f).any(|k| mono.exponent(k) < 0) {
            return Err(Error::InternalNonIntegral);
        }
        entries[slot.index()] = mono;
        if m.s.contains(slot.index()) {
            hits += 1;
        }
        current = current.frobenius();
    }
    PeriodVector::new(entries)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PhiCheck {
    pub eigen_ok: bool,
    pub fil_pattern_ok: bool,
}

/// Checks `Φ(T_0) = p·T_0` and that slot τ lies in `Fil^1` exactly for `τ ∈ S`.
pub fn verify_phi_eq_p(m: &LTSModel) -> Result<PhiCheck> {
    let gen = tate_generator(m)?;
    let image = apply_frobenius(&frobenius_matrix(m), &gen)?;
    let eigen_ok = image.entries().iter().zip(gen.entries()).all(|(a, b)| *a == b.times_p(1));
    let mut fil_pattern_ok = true;
    for (t, mono) in gen.entries().iter().enumerate() {
        let expected = i64::from(m.s.contains(t));
        if mono.fil_degree()? != expected {
            fil_pattern_ok = false;
        }
    }
    Ok(PhiCheck { eigen_ok, fil_pattern_ok })
}

/// Valuation of the `τ0` component of `T_0`.
pub fn generator_valuation(m: &LTSModel) -> Result<Q> {
    seed(m).valuation(m.p)
}

/// `p^f`, after checking that the generator valuation stays below `1/(p-1)`.
pub fn solution_count_mod_p(m: &LTSModel) -> Result<BigInt> {
    if generator_valuation(m)? >= q(1, m.p as i64 - 1) {
        return Err(Error::ValuationOverflow);
    }
    Ok(big_pow(m.p, m.f as u64))
}

/// Exponents of `D_S`, listed for `e_{σ^j τ0}`, `j = 0..f`: `[σ^{j-1}τ0 ∉ S]`.
pub fn d_s_matrix(m: &LTSModel) -> Vec<u64> {
    let t0 = m.tau0();
    (0..m.f as i64).map(|j| u64::from(!m.s.contains(t0.shift(j - 1).index()))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LtsReport {
    pub model: LTSModel,
    pub frobenius_exponents: Vec<u64>,
    pub generator: PeriodVector,
    pub eigen_ok: bool,
    pub fil_pattern_ok: bool,
    #[serde(with = "crate::rational::serde_q")]
    pub generator_valuation: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub valuation_bound: Q,
    pub solution_count: String,
    pub d_s_exponents: Vec<u64>,
}

pub fn lts_report(m: &LTSModel) -> Result<LtsReport> {
    let check = verify_phi_eq_p(m)?;
    Ok(LtsReport {
        model: m.clone(),
        frobenius_exponents: frobenius_matrix(m),
        generator: tate_generator(m)?,
        eigen_ok: check.eigen_ok,
        fil_pattern_ok: check.fil_pattern_ok,
        generator_valuation: generator_valuation(m)?,
        valuation_bound: q(1, m.p as i64 - 1),
        solution_count: solution_count_mod_p(m)?.to_string(),
        d_s_exponents: d_s_matrix(m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    fn model(f: usize, p: u64, s: &[usize], tau0: usize) -> LTSModel {
        LTSModel::new(p, EmbeddingSet::from_indices(f, s).unwrap(), tau0).unwrap()
    }

    #[test]
    fn validation() {
        assert!(LTSModel::new(5, EmbeddingSet::full(2), 0).is_err());
        assert!(LTSModel::new(5, EmbeddingSet::from_indices(2, &[0]).unwrap(), 0).is_err());
        assert!(LTSModel::new(6, EmbeddingSet::empty(2), 0).is_err());
        let m = LTSModel::parse("{f:2,p:5,S:[0],tau0:1}").unwrap();
        assert_eq!(m, model(2, 5, &[0], 1));
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"{"f":2,"p":5,"S":[0],"tau0":1}"#);
    }

    #[test]
    fn frobenius_examples() {
        let m = model(2, 5, &[0], 1);
        assert_eq!(frobenius_matrix(&m), vec![1, 0]);
        assert_eq!(frobenius_matrix(&model(3, 5, &[], 0)), vec![1, 1, 1]);
        let e = frobenius_matrix(&model(4, 3, &[0, 1, 3], 2));
        assert_eq!(e.iter().sum::<u64>(), 1);
    }

    #[test]
    fn generator_examples() {
        let m = model(2, 5, &[0], 1);
        let g = tate_generator(&m).unwrap();
        assert_eq!(g.entries()[1], PeriodMonomial::u(2, 1));
        assert_eq!(g.entries()[0], PeriodMonomial::t_o(2));
        let et = tate_generator(&model(3, 7, &[], 1)).unwrap();
        assert!(et.entries().iter().all(|x| x.is_one()));
        let m3 = model(3, 5, &[1], 0);
        let g3 = tate_generator(&m3).unwrap();
        assert_eq!(g3.entries()[0], PeriodMonomial::u(3, 2));
        assert_eq!(g3.entries()[1], PeriodMonomial::t_o(3));
        assert_eq!(g3.entries()[2], PeriodMonomial::u(3, 1));
    }

    #[test]
    fn phi_checks() {
        for m in [model(2, 5, &[0], 1), model(3, 7, &[], 2), model(3, 5, &[1], 0)] {
            assert_eq!(verify_phi_eq_p(&m).unwrap(), PhiCheck { eigen_ok: true, fil_pattern_ok: true });
        }
    }

    #[test]
    fn solution_counts() {
        let m = model(2, 5, &[0], 1);
        assert_eq!(generator_valuation(&m).unwrap(), q(5, 24));
        assert_eq!(solution_count_mod_p(&m).unwrap(), BigInt::from(25));
        let et = model(3, 3, &[], 0);
        assert_eq!(generator_valuation(&et).unwrap(), qi(0));
        assert_eq!(solution_count_mod_p(&et).unwrap(), BigInt::from(27));
        let m4 = model(4, 2, &[1, 2, 3], 0);
        assert!(generator_valuation(&m4).unwrap() < qi(1));
        assert_eq!(solution_count_mod_p(&m4).unwrap(), BigInt::from(16));
    }

    #[test]
    fn d_s_examples() {
        assert_eq!(d_s_matrix(&model(2, 5, &[0], 1)), vec![0, 1]);
        assert_eq!(d_s_matrix(&model(3, 5, &[], 1)), vec![1, 1, 1]);
    }

    #[test]
    fn singleton_reproduces_lubin_tate() {
        let f = 4;
        let p = 3;
        let m = model(f, p, &[2], 0);
        let g = tate_generator(&m).unwrap();
        for i in 0..f {
            let slot = &g.entries()[(2 + i) % f];
            let (fil, val) = crate::periods::graded_valuation(slot, p).unwrap();
            if i == 0 {
                assert_eq!(fil, 1);
            } else {
                assert_eq!((fil, val), (0, q(3i64.pow(i as u32), 80)));
            }
        }
    }
}
