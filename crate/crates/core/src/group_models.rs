//! Concrete finite flat O-module models: Raynaud schemes, torsion of `LT_A`,
//! split subgroups of μ-ordinary products and the canonical filtration.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hn::{deg_weighted, DegreeWeighting};
use crate::rational::{parse_q, q_pow, qi, Q};
use crate::signature::{
    is_prime, mu_ordinary_decomposition, EmbeddingIndex, EmbeddingSet, LtFactor, Signature,
};

/// Default lattice enumeration cap, overridable through `MUFILT_ENUM_CAP`.
pub const DEFAULT_ENUM_CAP: u64 = 1_000_000;

pub fn enum_cap_from_env() -> Result<u64> {
    match std::env::var("MUFILT_ENUM_CAP") {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::Parse(format!("MUFILT_ENUM_CAP must be a natural number, got {v:?}"))),
        Err(_) => Ok(DEFAULT_ENUM_CAP),
    }
}

/// Raynaud `(p,…,p)`-scheme data: the valuations `v(δ_i)`, with `v(γ_i) = 1 - v(δ_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RaynaudRepr", into = "RaynaudRepr")]
pub struct RaynaudDatum {
    f: usize,
    p: u64,
    vdelta: Vec<Q>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RaynaudRepr {
    f: usize,
    p: u64,
    #[serde(with = "crate::rational::serde_qvec")]
    vdelta: Vec<Q>,
}

impl TryFrom<RaynaudRepr> for RaynaudDatum {
    type Error = Error;
    fn try_from(r: RaynaudRepr) -> Result<Self> {
        RaynaudDatum::new(r.p, r.vdelta).and_then(|d| {
            if d.f == r.f {
                Ok(d)
            } else {
                Err(Error::InvalidDatum(format!("f = {} but {} valuations", r.f, d.f)))
            }
        })
    }
}

impl From<RaynaudDatum> for RaynaudRepr {
    fn from(d: RaynaudDatum) -> Self {
        RaynaudRepr { f: d.f, p: d.p, vdelta: d.vdelta }
    }
}

impl RaynaudDatum {
    pub fn new(p: u64, vdelta: Vec<Q>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidDatum(format!("p = {p} is not prime")));
        }
        if vdelta.is_empty() {
            return Err(Error::InvalidDatum("at least one slot is needed".into()));
        }
        if vdelta.iter().any(|v| *v < Q::zero() || *v > Q::one()) {
            return Err(Error::InvalidDatum("valuations must lie in [0,1]".into()));
        }
        Ok(Self { f: vdelta.len(), p, vdelta })
    }

    /// Parses JSON `{f, p, vdelta:[[num,den],...]}`; entries may also be `"a/b"` strings.
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Loose {
            f: usize,
            p: u64,
            vdelta: Vec<serde_json::Value>,
        }
        let loose: Loose =
            json5::from_str(text).map_err(|e| Error::Parse(format!("Raynaud datum: {e}")))?;
        let mut vals = Vec::with_capacity(loose.vdelta.len());
        for v in loose.vdelta {
            let parsed = match &v {
                serde_json::Value::String(s) => parse_q(s)?,
                serde_json::Value::Number(_) => parse_q(&v.to_string())?,
                _ => crate::rational::serde_q::deserialize(v)
                    .map_err(|e| Error::Parse(format!("vdelta entry: {e}")))?,
            };
            vals.push(parsed);
        }
        Self::try_from(RaynaudRepr { f: loose.f, p: loose.p, vdelta: vals })
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn vdelta(&self) -> &[Q] {
        &self.vdelta
    }

    /// `v(γ_i) = 1 - v(δ_i)`.
    pub fn vgamma(&self) -> Vec<Q> {
        self.vdelta.iter().map(|v| Q::one() - v).collect()
    }

    /// The Cartier dual, with the roles of `γ` and `δ` exchanged.
    pub fn dual(&self) -> Self {
        Self { f: self.f, p: self.p, vdelta: self.vgamma() }
    }
}

/// Abstract finite flat O-module: O-height, partial degrees and torsion level.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FiniteOModuleDesc {
    pub o_height: u64,
    #[serde(with = "crate::rational::serde_qvec")]
    pub deg: Vec<Q>,
    pub level: u64,
}

impl FiniteOModuleDesc {
    pub fn zero(f: usize, level: u64) -> Self {
        Self { o_height: 0, deg: vec![Q::zero(); f], level }
    }

    pub fn f(&self) -> usize {
        self.deg.len()
    }

    pub fn total_degree(&self) -> Q {
        self.deg.iter().sum()
    }
}

pub fn raynaud_degrees(d: &RaynaudDatum) -> FiniteOModuleDesc {
    FiniteOModuleDesc { o_height: 1, deg: d.vgamma(), level: 1 }
}

/// Valuations `v(x_i)` of a nonzero point, solved directly from the cyclic
/// system `x_i^p = γ_{i+1} x_{i+1}`, i.e. `p·v(x_i) = v(γ_{i+1}) + v(x_{i+1})`.
///
/// Walking once around the cycle expresses `v(x_i)` as `a + b·v(x_i)`.
pub fn raynaud_point_valuations(d: &RaynaudDatum) -> Vec<Q> {
    let f = d.f;
    let g = d.vgamma();
    let p = qi(d.p as i64);
    (0..f)
        .map(|i| {
            let (mut a, mut b) = (Q::zero(), Q::one());
            for step in 1..=f {
                a += &b * &g[(i + step) % f] / &p;
                b /= &p;
            }
            a / (Q::one() - b)
        })
        .collect()
}

/// `Deg_τ(G)/(p^f - 1)`, checked against [`raynaud_point_valuations`].
pub fn raynaud_hodge_tate_coker_degree(d: &RaynaudDatum, tau: EmbeddingIndex) -> Result<Q> {
    if tau.f() != d.f {
        return Err(Error::DimensionMismatch { expected: d.f, found: tau.f() });
    }
    let w = DegreeWeighting::tau(d.p, tau);
    let formula = deg_weighted(&raynaud_degrees(d), &w)? / (q_pow(d.p, d.f as u64) - Q::one());
    let oracle = &raynaud_point_valuations(d)[tau.index()];
    if formula != *oracle {
        return Err(Error::Internal("Raynaud weighted degree disagrees with the point valuation".into()));
    }
    Ok(formula)
}

/// `LT_A[p^m]` viewed at level `n_cap`.
pub fn lt_torsion_desc(a: &EmbeddingSet, m: u64, n_cap: u64) -> Result<FiniteOModuleDesc> {
    if m > n_cap {
        return Err(Error::InvalidModel(format!("torsion level {m} exceeds the cap {n_cap}")));
    }
    let deg = (0..a.f()).map(|i| if a.contains(i) { qi(m as i64) } else { Q::zero() }).collect();
    Ok(FiniteOModuleDesc { o_height: m, deg, level: n_cap })
}

/// `Π LT_{A_l}^{mult_l}[p^n]` with a strictly increasing chain `A_l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LTProductGroup {
    f: usize,
    factors: Vec<LtFactor>,
    level: u64,
}

impl LTProductGroup {
    pub fn new(f: usize, factors: Vec<LtFactor>, level: u64) -> Result<Self> {
        for x in &factors {
            if x.set.f() != f {
                return Err(Error::DimensionMismatch { expected: f, found: x.set.f() });
            }
        }
        for w in factors.windows(2) {
            if !(w[0].set.is_subset(&w[1].set) && w[0].set != w[1].set) {
                return Err(Error::InvalidModel("factor sets must increase strictly".into()));
            }
        }
        Ok(Self { f, factors, level })
    }

    /// The μ-ordinary group of `sig`, truncated at `p^n`.
    pub fn mu_ordinary(sig: &Signature, n: u64) -> Self {
        Self { f: sig.f(), factors: mu_ordinary_decomposition(sig), level: n }
    }

    pub fn f(&self) -> usize {
        self.f
    }

    pub fn factors(&self) -> &[LtFactor] {
        &self.factors
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    /// Factor index of each rank-one copy, in order.
    pub fn copies(&self) -> Vec<usize> {
        self.factors
            .iter()
            .enumerate()
            .flat_map(|(i, x)| std::iter::repeat(i).take(x.mult as usize))
            .collect()
    }

    /// Descriptor of the split subgroup with the given level per copy.
    pub fn split_desc(&self, levels: &[u64]) -> FiniteOModuleDesc {
        let copies = self.copies();
        let mut desc = FiniteOModuleDesc::zero(self.f, self.level);
        for (k, &m) in levels.iter().enumerate() {
            desc.o_height += m;
            let set = &self.factors[copies[k]].set;
            for i in set.indices() {
                desc.deg[i] += qi(m as i64);
            }
        }
        desc
    }
}

/// A split subgroup: one torsion level per rank-one copy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SplitNode {
    pub levels: Vec<u64>,
    pub desc: FiniteOModuleDesc,
}

/// All split subgroups of an [`LTProductGroup`], ordered by containment of levels.
#[derive(Clone, Debug)]
pub struct SplitLattice {
    group: LTProductGroup,
    nodes: Vec<SplitNode>,
}

impl SplitLattice {
    pub fn group(&self) -> &LTProductGroup {
        &self.group
    }

    pub fn nodes(&self) -> &[SplitNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Whether node `i` is contained in node `j`.
    pub fn contains(&self, i: usize, j: usize) -> bool {
        levels_le(&self.nodes[i].levels, &self.nodes[j].levels)
    }

    /// Position of the node with exactly these levels.
    pub fn position(&self, levels: &[u64]) -> Option<usize> {
        let base = self.group.level + 1;
        if levels.len() != self.group.copies().len() || levels.iter().any(|&m| m >= base) {
            return None;
        }
        Some(levels.iter().fold(0u64, |acc, &m| acc * base + m) as usize)
    }

    /// Distinct descriptors, sorted by height, then degrees.
    pub fn descriptors(&self) -> Vec<FiniteOModuleDesc> {
        let mut out: Vec<FiniteOModuleDesc> = self.nodes.iter().map(|x| x.desc.clone()).collect();
        out.sort_by(|a, b| (a.o_height, &a.deg).cmp(&(b.o_height, &b.deg)));
        out.dedup();
        out
    }
}

pub(crate) fn levels_le(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Enumerates `Π LT_{A_l}[p^{m_{l,j}}]` for `0 ≤ m_{l,j} ≤ n` over every copy.
pub fn enumerate_split_subgroups(g: &LTProductGroup, cap: u64) -> Result<SplitLattice> {
    let copies = g.copies().len();
    let base = g.level + 1;
    let required = num_traits::pow(num_bigint::BigUint::from(base), copies);
    if required > num_bigint::BigUint::from(cap) {
        return Err(Error::EnumerationCapExceeded { cap, required: required.to_string() });
    }
    let count = base.pow(copies as u32);
    let nodes = (0..count)
        .into_par_iter()
        .map(|mut code| {
            let mut levels = vec![0u64; copies];
            for slot in levels.iter_mut().rev() {
                *slot = code % base;
                code /= base;
            }
            let desc = g.split_desc(&levels);
            SplitNode { levels, desc }
        })
        .collect();
    Ok(SplitLattice { group: g.clone(), nodes })
}

/// One step of the μ-ordinary canonical filtration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cran {
    /// Embeddings sharing this value of `q_τ`.
    pub taus: Vec<usize>,
    pub q_value: u64,
    pub desc: FiniteOModuleDesc,
}

/// `Fil_τ(G[p^n])` for the μ-ordinary `G`: height `n·p_τ`, `deg_τ' = n·min(p_τ, p_τ')`.
pub fn cran_desc(sig: &Signature, tau: EmbeddingIndex, n: u64) -> FiniteOModuleDesc {
    let pt = sig.p_of(tau);
    let deg = sig.p_vec().iter().map(|&x| qi((n * pt.min(x)) as i64)).collect();
    FiniteOModuleDesc { o_height: n * pt, deg, level: n }
}

/// One cran per distinct `q`, from the smallest subgroup to the largest.
pub fn mu_ord_canonical_filtration(sig: &Signature, n: u64) -> Vec<Cran> {
    let mut qs: Vec<u64> = sig.q_vec().to_vec();
    qs.sort_unstable();
    qs.dedup();
    qs.reverse();
    qs.into_iter()
        .map(|qv| {
            let taus: Vec<usize> = (0..sig.f()).filter(|&i| sig.q_vec()[i] == qv).collect();
            let tau = sig.tau(taus[0]).expect("in range");
            Cran { taus, q_value: qv, desc: cran_desc(sig, tau, n) }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn raynaud_examples() {
        let d = RaynaudDatum::new(5, vec![q(1, 2), q(1, 4)]).unwrap();
        assert_eq!(raynaud_degrees(&d).deg, vec![q(1, 2), q(3, 4)]);
        let t0 = EmbeddingIndex::new(0, 2).unwrap();
        assert_eq!(raynaud_hodge_tate_coker_degree(&d, t0).unwrap(), q(17, 96));
        assert_eq!(d.dual().dual(), d);

        let et = RaynaudDatum::new(3, vec![qi(1); 3]).unwrap();
        for t in EmbeddingIndex::all(3) {
            assert_eq!(raynaud_hodge_tate_coker_degree(&et, t).unwrap(), qi(0));
        }
        let mult = RaynaudDatum::new(7, vec![qi(0); 3]).unwrap();
        assert_eq!(raynaud_degrees(&mult).deg, vec![qi(1); 3]);
        for t in EmbeddingIndex::all(3) {
            assert_eq!(raynaud_hodge_tate_coker_degree(&mult, t).unwrap(), q(1, 6));
        }
    }

    #[test]
    fn raynaud_validation() {
        assert!(RaynaudDatum::new(4, vec![qi(0)]).is_err());
        assert!(RaynaudDatum::new(5, vec![q(3, 2)]).is_err());
        let d = RaynaudDatum::parse("{f:2,p:5,vdelta:[[1,2],\"1/4\"]}").unwrap();
        assert_eq!(d.vdelta(), &[q(1, 2), q(1, 4)]);
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"f":2,"p":5,"vdelta":[[1,2],[1,4]]}"#);
        assert!(RaynaudDatum::parse("{f:3,p:5,vdelta:[[1,2]]}").is_err());
    }

    #[test]
    fn lt_torsion_examples() {
        let a = EmbeddingSet::from_indices(2, &[0]).unwrap();
        let d = lt_torsion_desc(&a, 2, 2).unwrap();
        assert_eq!((d.o_height, d.deg.clone()), (2, vec![qi(2), qi(0)]));
        assert_eq!(lt_torsion_desc(&EmbeddingSet::empty(2), 1, 1).unwrap().deg, vec![qi(0); 2]);
        assert_eq!(lt_torsion_desc(&EmbeddingSet::full(3), 1, 1).unwrap().deg, vec![qi(1); 3]);
        assert!(lt_torsion_desc(&a, 3, 2).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let g = LTProductGroup::new(
            2,
            vec![
                LtFactor { set: EmbeddingSet::from_indices(2, &[0]).unwrap(), mult: 1 },
                LtFactor { set: EmbeddingSet::full(2), mult: 1 },
            ],
            1,
        )
        .unwrap();
        let lat = enumerate_split_subgroups(&g, 100).unwrap();
        let heights: Vec<u64> = lat.descriptors().iter().map(|d| d.o_height).collect();
        assert_eq!(heights, vec![0, 1, 1, 2]);

        let single = LTProductGroup::new(
            3,
            vec![LtFactor { set: EmbeddingSet::from_indices(3, &[1]).unwrap(), mult: 1 }],
            2,
        )
        .unwrap();
        let descs = enumerate_split_subgroups(&single, 100).unwrap().descriptors();
        assert_eq!(descs.len(), 3);
        for (m, d) in descs.iter().enumerate() {
            assert_eq!(d.o_height, m as u64);
            assert_eq!(d.deg, vec![qi(0), qi(m as i64), qi(0)]);
        }

        let empty = LTProductGroup::new(2, vec![], 3).unwrap();
        let descs = enumerate_split_subgroups(&empty, 1).unwrap().descriptors();
        assert_eq!(descs, vec![FiniteOModuleDesc::zero(2, 3)]);
    }

    #[test]
    fn enumeration_cap() {
        let sig = Signature::new(2, 3, 4, vec![1, 2]).unwrap();
        let g = LTProductGroup::mu_ordinary(&sig, 2);
        match enumerate_split_subgroups(&g, 80) {
            Err(Error::EnumerationCapExceeded { cap, required }) => {
                assert_eq!((cap, required.as_str()), (80, "81"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(enumerate_split_subgroups(&g, 81).unwrap().len(), 81);
    }

    #[test]
    fn product_chain_must_increase() {
        let bad = LTProductGroup::new(
            2,
            vec![
                LtFactor { set: EmbeddingSet::full(2), mult: 1 },
                LtFactor { set: EmbeddingSet::from_indices(2, &[0]).unwrap(), mult: 1 },
            ],
            1,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn canonical_filtration_examples() {
        let sig = Signature::new(2, 7, 3, vec![1, 2]).unwrap();
        let fil = mu_ord_canonical_filtration(&sig, 1);
        assert_eq!(fil.len(), 2);
        assert_eq!(fil[0].taus, vec![1]);
        assert_eq!((fil[0].desc.o_height, fil[0].desc.deg.clone()), (1, vec![qi(1), qi(1)]));
        assert_eq!(fil[1].taus, vec![0]);
        assert_eq!((fil[1].desc.o_height, fil[1].desc.deg.clone()), (2, vec![qi(2), qi(1)]));
        let fil3 = mu_ord_canonical_filtration(&sig, 3);
        for (a, b) in fil.iter().zip(&fil3) {
            assert_eq!(b.desc.o_height, 3 * a.desc.o_height);
            let scaled: Vec<Q> = a.desc.deg.iter().map(|x| x * qi(3)).collect();
            assert_eq!(b.desc.deg, scaled);
        }
    }

    #[test]
    fn position_lookup() {
        let sig = Signature::new(2, 3, 3, vec![1, 2]).unwrap();
        let lat = enumerate_split_subgroups(&LTProductGroup::mu_ordinary(&sig, 2), 1000).unwrap();
        for (i, node) in lat.nodes().iter().enumerate() {
            assert_eq!(lat.position(&node.levels), Some(i));
        }
        assert_eq!(lat.position(&[3, 0, 0]), None);
    }
}
