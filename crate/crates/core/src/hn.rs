//! Weighted degree functions and Harder-Narasimhan filtrations over explicit
//! subobject lattices, together with break, cran and containment certificates.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_models::{levels_le, FiniteOModuleDesc, SplitLattice};
use crate::polygon::{Convexity, Polygon};
use crate::rational::{q, q_pow, qi, Q};
use crate::signature::{EmbeddingIndex, Signature};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", content = "tau", rename_all = "lowercase")]
pub enum WeightMode {
    Classical,
    Tau(usize),
}

/// Classical degree `Σ deg_τ`, or `Deg_τ = Σ_{j=1}^f p^{f-j} deg_{σ^j τ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeWeighting {
    tau: Option<EmbeddingIndex>,
    p: u64,
    f: usize,
}

impl DegreeWeighting {
    pub fn classical(p: u64, f: usize) -> Self {
        Self { tau: None, p, f }
    }

    pub fn tau(p: u64, tau: EmbeddingIndex) -> Self {
        Self { tau: Some(tau), p, f: tau.f() }
    }

    pub fn mode(&self) -> WeightMode {
        match self.tau {
            None => WeightMode::Classical,
            Some(t) => WeightMode::Tau(t.index()),
        }
    }

    pub fn embedding(&self) -> Option<EmbeddingIndex> {
        self.tau
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn f(&self) -> usize {
        self.f
    }

    /// Weight attached to each slot, indexed by embedding.
    pub fn weights(&self) -> Vec<Q> {
        match self.tau {
            None => vec![Q::one(); self.f],
            Some(t) => {
                let f = self.f as u64;
                let mut w = vec![Q::zero(); self.f];
                for j in 1..=f {
                    w[t.shift(j as i64).index()] = q_pow(self.p, f - j);
                }
                w
            }
        }
    }
}

pub fn deg_weighted(desc: &FiniteOModuleDesc, w: &DegreeWeighting) -> Result<Q> {
    if desc.f() != w.f {
        return Err(Error::DimensionMismatch { expected: w.f, found: desc.f() });
    }
    Ok(w.weights().iter().zip(&desc.deg).map(|(a, b)| a * b).sum())
}

/// `μ = Deg/(f·Ht_O)`; `None` for the zero object.
pub fn mu_slope(desc: &FiniteOModuleDesc, w: &DegreeWeighting) -> Result<Option<Q>> {
    let d = deg_weighted(desc, w)?;
    if desc.o_height == 0 {
        return Ok(None);
    }
    Ok(Some(d / qi((w.f as u64 * desc.o_height) as i64)))
}

#[derive(Clone, Debug)]
enum Order {
    Explicit(Vec<Vec<bool>>),
    Levels(Vec<Vec<u64>>),
}

/// Finite poset of subobjects, each carrying a descriptor.
#[derive(Clone, Debug)]
pub struct SubobjectLattice {
    nodes: Vec<FiniteOModuleDesc>,
    order: Order,
}

#[derive(Deserialize)]
struct LatticeRepr {
    nodes: Vec<FiniteOModuleDesc>,
    containment: Vec<(usize, usize)>,
}

impl SubobjectLattice {
    /// Nodes plus pairs `(i, j)` meaning node `i` is contained in node `j`.
    /// The order is closed reflexively and transitively.
    pub fn new(nodes: Vec<FiniteOModuleDesc>, containment: &[(usize, usize)]) -> Result<Self> {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::NotALattice("no nodes".into()));
        }
        let f = nodes[0].f();
        if let Some(bad) = nodes.iter().find(|x| x.f() != f) {
            return Err(Error::DimensionMismatch { expected: f, found: bad.f() });
        }
        let mut le = vec![vec![false; n]; n];
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(i, j) in containment {
            if i >= n || j >= n {
                return Err(Error::NotALattice(format!("pair ({i}, {j}) names a missing node")));
            }
            le[i][j] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if le[i][k] {
                    for j in 0..n {
                        if le[k][j] {
                            le[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && le[i][j] && !additive_pair(&nodes[i], &nodes[j]) {
                    return Err(Error::AdditivityViolation { lower: i, upper: j });
                }
            }
        }
        Ok(Self { nodes, order: Order::Explicit(le) })
    }

    /// Reads `{"nodes": [...], "containment": [[i, j], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let r: LatticeRepr =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("lattice: {e}")))?;
        Self::new(r.nodes, &r.containment)
    }

    pub fn from_split(lat: &SplitLattice) -> Self {
        let nodes = lat.nodes().iter().map(|x| x.desc.clone()).collect();
        let levels = lat.nodes().iter().map(|x| x.levels.clone()).collect();
        Self { nodes, order: Order::Levels(levels) }
    }

    pub fn nodes(&self) -> &[FiniteOModuleDesc] {
        &self.nodes
    }

    pub fn le(&self, i: usize, j: usize) -> bool {
        match &self.order {
            Order::Explicit(m) => m[i][j],
            Order::Levels(l) => levels_le(&l[i], &l[j]),
        }
    }

    /// All strict pairs `i < j` of the order, for export.
    pub fn containment_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.nodes.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.le(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    fn bottom_top(&self) -> Result<(usize, usize)> {
        let n = self.nodes.len();
        let bottom = (0..n).find(|&b| (0..n).all(|x| self.le(b, x)));
        let top = (0..n).find(|&t| (0..n).all(|x| self.le(x, t)));
        match (bottom, top) {
            (Some(b), Some(t)) => {
                if self.nodes[b].o_height != 0 {
                    return Err(Error::NotALattice("bottom node has positive height".into()));
                }
                Ok((b, t))
            }
            (None, _) => Err(Error::NotALattice("no bottom element".into())),
            (_, None) => Err(Error::NotALattice("no top element".into())),
        }
    }
}

/// A strict inclusion must raise the height and leave quotient degrees nonnegative.
fn additive_pair(lower: &FiniteOModuleDesc, upper: &FiniteOModuleDesc) -> bool {
    upper.o_height > lower.o_height && upper.deg.iter().zip(&lower.deg).all(|(a, b)| a >= b)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HNResult {
    /// Points `(Ht_O, Deg)` along the filtration.
    pub polygon: Polygon,
    /// `G_1 ⊂ … ⊂ G_r = G`.
    pub filtration: Vec<FiniteOModuleDesc>,
    /// `Deg(G_i/G_{i-1}) / Ht_O(G_i/G_{i-1})`, strictly decreasing.
    #[serde(with = "crate::rational::serde_qvec")]
    pub slopes: Vec<Q>,
    #[serde(skip)]
    pub chain: Vec<usize>,
}

impl HNResult {
    /// The polygon scaled by `1/f`, i.e. in the normalization of `μ = Deg/(f·Ht_O)`.
    pub fn o_polygon(&self, f: usize) -> Polygon {
        self.polygon.scale_values(&q(1, f as i64)).expect("positive scaling keeps shape")
    }
}

/// Iterated maximal-slope selection, ties broken by maximal height.
pub fn hn_from_lattice(lat: &SubobjectLattice, w: &DegreeWeighting) -> Result<HNResult> {
    let (bottom, top) = lat.bottom_top()?;
    let nodes = &lat.nodes;
    let degs: Vec<Q> = nodes.iter().map(|x| deg_weighted(x, w)).collect::<Result<_>>()?;
    let mut cur = bottom;
    let mut chain = vec![bottom];
    let mut slopes: Vec<Q> = Vec::new();
    let mut step = 0;
    while cur != top {
        step += 1;
        let base = &nodes[cur];
        let mut best: Option<(Q, u64, usize)> = None;
        let mut clash = false;
        for (y, node) in nodes.iter().enumerate() {
            if y == cur || !lat.le(cur, y) {
                continue;
            }
            if !additive_pair(base, node) {
                return Err(Error::AdditivityViolation { lower: cur, upper: y });
            }
            let dh = node.o_height - base.o_height;
            let slope = (&degs[y] - &degs[cur]) / qi(dh as i64);
            let better = match &best {
                None => true,
                Some((s, h, _)) => slope > *s || (slope == *s && node.o_height > *h),
            };
            if better {
                best = Some((slope, node.o_height, y));
                clash = false;
            } else if let Some((s, h, b)) = &best {
                if slope == *s && node.o_height == *h && nodes[*b] != *node {
                    clash = true;
                }
            }
        }
        let (slope, _, next) = best.ok_or_else(|| {
            Error::NotALattice("top element is not reachable from the bottom".into())
        })?;
        if clash {
            return Err(Error::AmbiguousLattice { step });
        }
        if let Some(prev) = slopes.last() {
            if slope >= *prev {
                return Err(Error::Internal("HN slopes failed to decrease".into()));
            }
        }
        slopes.push(slope);
        chain.push(next);
        cur = next;
    }
    let pts = chain.iter().map(|&i| (qi(nodes[i].o_height as i64), degs[i].clone())).collect();
    let polygon = Polygon::new(pts, Convexity::Concave)?;
    let filtration = chain[1..].iter().map(|&i| nodes[i].clone()).collect();
    Ok(HNResult { polygon, filtration, slopes, chain })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakCertificate {
    #[serde(rename = "break")]
    pub is_break: bool,
    pub cran: bool,
    #[serde(with = "crate::rational::serde_q")]
    pub degree: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub break_bound: Q,
    /// Only defined for τ-weightings at the abscissa `p_τ`.
    #[serde(with = "crate::rational::serde_qopt")]
    pub cran_bound: Option<Q>,
}

/// `n Σ_{j=1}^f p^{f-j} min(p_a, p_{σ^j τ})`.
fn weighted_min_sum(sig: &Signature, tau: EmbeddingIndex, pa: u64, n: u64) -> Q {
    let f = sig.f() as u64;
    let mut acc = Q::zero();
    for j in 1..=f {
        let other = sig.p_of(tau.shift(j as i64));
        acc += q_pow(sig.p(), f - j) * qi(pa.min(other) as i64);
    }
    acc * qi(n as i64)
}

/// Break bound at `p_τ'` in τ-mode, or the classical one.
pub fn break_bound(sig: &Signature, n: u64, w: &DegreeWeighting, tau_prime: EmbeddingIndex) -> Result<Q> {
    sig.check_tau(tau_prime)?;
    let pa = sig.p_of(tau_prime);
    let qa = sig.q_of(tau_prime);
    match w.embedding() {
        Some(tau) => {
            sig.check_tau(tau)?;
            let f = sig.f() as u64;
            let mut ties = Q::zero();
            for j in 1..=f {
                if sig.q_of(tau.shift(j as i64)) == qa {
                    ties += q_pow(sig.p(), f - j);
                }
            }
            Ok(weighted_min_sum(sig, tau, pa, n) - ties / qi(2))
        }
        None => {
            let mins: u64 = sig.p_vec().iter().map(|&x| pa.min(x)).sum();
            let ties = sig.q_vec().iter().filter(|&&x| x == qa).count() as i64;
            Ok(qi((n * mins) as i64) - q(ties, 2))
        }
    }
}

/// Cran bound of (H2): `n Σ_{j=1}^f p^{f-j} min(p_τ, p_{σ^j τ}) - (p-2)/(p-1)`.
pub fn cran_bound(sig: &Signature, n: u64, tau: EmbeddingIndex) -> Result<Q> {
    sig.check_tau(tau)?;
    let p = sig.p() as i64;
    Ok(weighted_min_sum(sig, tau, sig.p_of(tau), n) - q(p - 2, p - 1))
}

/// Certificates that `C`, of height `n·p_τ'`, is a break point, and a cran, of
/// the HN filtration for the weighting `w`.
pub fn break_certificate(
    sig: &Signature,
    n: u64,
    w: &DegreeWeighting,
    tau_prime: EmbeddingIndex,
    c: &FiniteOModuleDesc,
) -> Result<BreakCertificate> {
    sig.check_tau(tau_prime)?;
    let expected = n * sig.p_of(tau_prime);
    if c.o_height != expected {
        return Err(Error::HeightMismatch { expected, found: c.o_height });
    }
    let degree = deg_weighted(c, w)?;
    let bb = break_bound(sig, n, w, tau_prime)?;
    let cb = match w.embedding() {
        Some(tau) if sig.p_of(tau) == sig.p_of(tau_prime) => Some(cran_bound(sig, n, tau)?),
        _ => None,
    };
    Ok(BreakCertificate {
        is_break: degree > bb,
        cran: cb.as_ref().is_some_and(|b| degree > *b),
        degree,
        break_bound: bb,
        cran_bound: cb,
    })
}

/// `Σ_τ' (min(n p_τ', d) + min(n p_τ', c)) - |{τ' : d ≤ n p_τ' ≤ c}|`.
///
/// An embedding with `n p_τ' = d - 1` gives no saving: if `D ⊄ C` then
/// `h = Ht(D ∩ C) ≤ d - 1` and its term is at most `2 n p_τ'`.
pub fn bijakowski_bound(sig: &Signature, n: u64, d: u64, c: u64) -> Result<Q> {
    if d > c {
        return Err(Error::OrderViolation { d, c });
    }
    let mut total: i64 = 0;
    for pt in sig.p_vec() {
        let np = n * pt;
        total += (np.min(d) + np.min(c)) as i64;
        if d <= np && np <= c {
            total -= 1;
        }
    }
    Ok(qi(total))
}

/// True when `deg D + deg C` exceeds [`bijakowski_bound`], forcing `D ⊂ C`.
pub fn bijakowski_containment(sig: &Signature, n: u64, d: u64, c: u64, deg_d: &Q, deg_c: &Q) -> Result<bool> {
    let bound = bijakowski_bound(sig, n, d, c)?;
    Ok(deg_d + deg_c > bound)
}

/// Degree of a finite torsion module from the valuations of its elementary divisors.
pub fn fitting_degree(divisor_valuations: &[Q]) -> Result<Q> {
    if let Some(v) = divisor_valuations.iter().find(|v| **v < Q::zero()) {
        return Err(Error::NegativeValuation(v.clone()));
    }
    Ok(divisor_valuations.iter().sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DetGuard {
    pub valid: bool,
    /// Set in the boundary case `v(det) = r`, where the degree can be undercounted.
    pub warning: bool,
}

pub fn det_degree_valid(det_val: &Q, r: u64) -> DetGuard {
    let r = qi(r as i64);
    DetGuard { valid: *det_val < r, warning: *det_val == r }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_models::{enumerate_split_subgroups, LTProductGroup};
    use crate::polygon::reversed_hodge;

    fn reference() -> Signature {
        Signature::new(2, 7, 3, vec![1, 2]).unwrap()
    }

    fn desc(h: u64, deg: Vec<Q>) -> FiniteOModuleDesc {
        FiniteOModuleDesc { o_height: h, deg, level: 1 }
    }

    #[test]
    fn weighted_degree_examples() {
        let s = reference();
        let d = desc(2, vec![qi(2), qi(1)]);
        assert_eq!(deg_weighted(&d, &DegreeWeighting::tau(7, s.tau(1).unwrap())).unwrap(), qi(15));
        assert_eq!(deg_weighted(&d, &DegreeWeighting::classical(7, 2)).unwrap(), qi(3));
        let one = desc(3, vec![q(5, 2)]);
        let w = DegreeWeighting::tau(5, EmbeddingIndex::new(0, 1).unwrap());
        assert_eq!(deg_weighted(&one, &w).unwrap(), q(5, 2));
        assert_eq!(mu_slope(&one, &w).unwrap(), Some(q(5, 6)));
        assert!(matches!(
            deg_weighted(&one, &DegreeWeighting::classical(5, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn two_point_hull() {
        let nodes = vec![desc(0, vec![qi(0)]), desc(1, vec![q(9, 5)]), desc(2, vec![qi(2)])];
        let lat = SubobjectLattice::new(nodes, &[(0, 1), (1, 2)]).unwrap();
        let r = hn_from_lattice(&lat, &DegreeWeighting::classical(3, 1)).unwrap();
        assert_eq!(r.slopes, vec![q(9, 5), q(1, 5)]);
        assert_eq!(r.filtration.len(), 2);
    }

    #[test]
    fn semistable_single_node() {
        let nodes = vec![desc(0, vec![qi(0)]), desc(3, vec![qi(1)])];
        let lat = SubobjectLattice::new(nodes, &[(0, 1)]).unwrap();
        let r = hn_from_lattice(&lat, &DegreeWeighting::classical(3, 1)).unwrap();
        assert_eq!(r.slopes, vec![q(1, 3)]);
        assert_eq!(r.filtration, vec![desc(3, vec![qi(1)])]);
    }

    #[test]
    fn mu_ordinary_reference_lattice() {
        let s = reference();
        let g = LTProductGroup::mu_ordinary(&s, 1);
        let lat = SubobjectLattice::from_split(&enumerate_split_subgroups(&g, 1000).unwrap());
        let r = hn_from_lattice(&lat, &DegreeWeighting::classical(7, 2)).unwrap();
        assert_eq!(r.o_polygon(2), reversed_hodge(&s));
    }

    #[test]
    fn lattice_errors() {
        let nodes = vec![desc(0, vec![qi(0)]), desc(1, vec![qi(1)]), desc(1, vec![qi(0)])];
        let lat = SubobjectLattice::new(nodes.clone(), &[(0, 1), (0, 2)]).unwrap();
        assert!(matches!(
            hn_from_lattice(&lat, &DegreeWeighting::classical(3, 1)),
            Err(Error::NotALattice(_))
        ));
        let bad = vec![desc(0, vec![qi(0)]), desc(2, vec![qi(2)]), desc(1, vec![qi(3)])];
        assert!(matches!(
            SubobjectLattice::new(bad, &[(0, 1), (1, 2)]),
            Err(Error::AdditivityViolation { lower: 1, upper: 2 })
        ));
        let tie = vec![
            desc(0, vec![qi(0), qi(0)]),
            desc(1, vec![qi(1), qi(0)]),
            desc(1, vec![qi(0), qi(1)]),
            desc(3, vec![qi(1), qi(1)]),
        ];
        let lat = SubobjectLattice::new(tie, &[(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(
            hn_from_lattice(&lat, &DegreeWeighting::classical(3, 2)),
            Err(Error::AmbiguousLattice { step: 1 })
        );
    }

    #[test]
    fn lattice_json_input() {
        let text = r#"{"nodes":[{"o_height":0,"deg":[[0,1]],"level":1},
            {"o_height":1,"deg":[[9,5]],"level":1},{"o_height":2,"deg":[[2,1]],"level":1}],
            "containment":[[0,1],[1,2]]}"#;
        let lat = SubobjectLattice::from_json(text).unwrap();
        let r = hn_from_lattice(&lat, &DegreeWeighting::classical(3, 1)).unwrap();
        assert_eq!(r.slopes, vec![q(9, 5), q(1, 5)]);
    }

    #[test]
    fn certificates() {
        let s = reference();
        let t2 = s.tau(1).unwrap();
        let w = DegreeWeighting::tau(7, t2);
        let c = desc(1, vec![q(799, 700), q(0, 1)]);
        let cert = break_certificate(&s, 1, &w, t2, &c).unwrap();
        assert_eq!(cert.degree, q(799, 100));
        assert_eq!(cert.break_bound, q(15, 2));
        assert_eq!(cert.cran_bound, Some(qi(8) - q(5, 6)));
        assert!(cert.is_break && cert.cran);
        let low = desc(1, vec![qi(0), qi(1)]);
        let cert = break_certificate(&s, 1, &w, t2, &low).unwrap();
        assert!(!cert.is_break && !cert.cran);

        let cl = DegreeWeighting::classical(7, 2);
        let c = desc(1, vec![q(9, 10), q(9, 10)]);
        let cert = break_certificate(&s, 1, &cl, t2, &c).unwrap();
        assert_eq!(cert.break_bound, q(3, 2));
        assert!(cert.is_break && !cert.cran);
        assert_eq!(
            break_certificate(&s, 1, &cl, s.tau(0).unwrap(), &c),
            Err(Error::HeightMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn containment_examples() {
        let s = reference();
        assert_eq!(bijakowski_bound(&s, 1, 1, 2).unwrap(), qi(3));
        assert!(bijakowski_containment(&s, 1, 1, 2, &q(9, 5), &q(29, 10)).unwrap());
        assert!(!bijakowski_containment(&s, 1, 1, 2, &qi(0), &qi(0)).unwrap());
        assert!(bijakowski_containment(&s, 1, 1, 2, &qi(2), &qi(3)).unwrap());
        assert_eq!(bijakowski_bound(&s, 1, 2, 1), Err(Error::OrderViolation { d: 2, c: 1 }));
        let etale = Signature::new(1, 2, 2, vec![2]).unwrap();
        assert_eq!(bijakowski_bound(&etale, 1, 1, 1).unwrap(), qi(0));
        assert!(!bijakowski_containment(&etale, 1, 1, 1, &qi(0), &qi(0)).unwrap());
    }

    #[test]
    fn fitting_examples() {
        assert_eq!(fitting_degree(&[q(1, 2), q(1, 3)]).unwrap(), q(5, 6));
        assert_eq!(fitting_degree(&[]).unwrap(), qi(0));
        assert!(fitting_degree(&[q(-1, 2)]).is_err());
        assert_eq!(det_degree_valid(&qi(2), 2), DetGuard { valid: false, warning: true });
        assert_eq!(det_degree_valid(&q(3, 2), 2), DetGuard { valid: true, warning: false });
    }
}
