//! The combined analysis report and its canonical JSON rendering.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_models::{cran_desc, mu_ord_canonical_filtration};
use crate::hn::{break_certificate, BreakCertificate, DegreeWeighting};
use crate::polygon::{hn_mu_ordinary_tau, hodge_polygon, reversed_hodge, Polygon};
use crate::rational::{fmt_decimal, Q};
use crate::signature::{
    constants, existence_threshold, h1_precondition, h3_threshold, hasse_threshold, mu_ordinary_decomposition,
    prime_admissible, Admissibility, EmbeddingIndex, Signature, SignatureConstants,
};
use crate::tower::{ptorsion_report, tower_report, HasseInput, PTorsionReport, TowerReport};

/// Digits after the point in the `approximate` section.
pub const APPROX_DIGITS: u32 = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorEntry {
    pub set: Vec<usize>,
    pub label: String,
    pub mult: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub tau: usize,
    pub n: u64,
    #[serde(with = "crate::rational::serde_q")]
    pub hn: Q,
    /// Only meaningful when the (H1)/(H3) precondition holds.
    #[serde(with = "crate::rational::serde_q")]
    pub h3: Q,
    pub h_precondition: bool,
    #[serde(with = "crate::rational::serde_q")]
    pub existence: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauPolygon {
    pub tau: usize,
    pub polygon: Polygon,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonSet {
    pub hodge: Polygon,
    pub reversed_hodge: Polygon,
    pub hn_tau: Vec<TauPolygon>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateOutcome {
    /// `"classical"` or the one-based label of the weighting embedding.
    pub weighting: String,
    pub tau_prime: usize,
    pub n: u64,
    pub certificate: BreakCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub signature: Signature,
    pub constants: SignatureConstants,
    pub admissibility: Admissibility,
    pub decomposition: Vec<FactorEntry>,
    pub hasse: HasseInput,
    pub n: u64,
    pub thresholds: Vec<ThresholdEntry>,
    pub polygons: PolygonSet,
    pub ptorsion: Vec<PTorsionReport>,
    pub towers: Vec<TowerReport>,
    pub certificates: Vec<CertificateOutcome>,
    /// Decimal renderings, present only on request. Not exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approximate: Option<BTreeMap<String, String>>,
}

/// Builds the full report. `only` restricts the per-embedding sections.
pub fn analyze(sig: &Signature, ha: &HasseInput, n: u64, only: Option<EmbeddingIndex>, human: bool) -> Result<ReportBundle> {
    if n == 0 {
        return Err(Error::InvalidSignature("level n must be positive".into()));
    }
    if ha.ha().len() != sig.f() {
        return Err(Error::DimensionMismatch { expected: sig.f(), found: ha.ha().len() });
    }
    if let Some(t) = only {
        sig.check_tau(t)?;
    }
    let selected: Vec<EmbeddingIndex> = sig.embeddings().filter(|t| only.map_or(true, |o| o == *t)).collect();
    let active: Vec<EmbeddingIndex> = selected.iter().copied().filter(|t| !sig.is_degenerate(*t)).collect();

    let decomposition = mu_ordinary_decomposition(sig)
        .into_iter()
        .map(|x| FactorEntry { set: x.set.indices(), label: x.set.to_string(), mult: x.mult })
        .collect();

    let mut thresholds = Vec::new();
    for &t in &active {
        for m in 1..=n {
            thresholds.push(ThresholdEntry {
                tau: t.index(),
                n: m,
                hn: hasse_threshold(sig, t, m)?,
                h3: h3_threshold(sig, t, m)?,
                h_precondition: h1_precondition(sig, t),
                existence: existence_threshold(sig, t, m)?,
            });
        }
    }

    let hn_tau = selected
        .iter()
        .map(|&t| Ok(TauPolygon { tau: t.index(), polygon: hn_mu_ordinary_tau(sig, t)? }))
        .collect::<Result<_>>()?;
    let polygons = PolygonSet { hodge: hodge_polygon(sig), reversed_hodge: reversed_hodge(sig), hn_tau };

    let ptorsion = active.iter().map(|&t| ptorsion_report(sig, t, ha.at(t))).collect::<Result<_>>()?;
    let towers = active.iter().map(|&t| tower_report(sig, t, ha, n)).collect::<Result<_>>()?;

    let mut certificates = Vec::new();
    let crans = mu_ord_canonical_filtration(sig, n);
    let mut weightings: Vec<(String, DegreeWeighting)> = vec![("classical".into(), DegreeWeighting::classical(sig.p(), sig.f()))];
    for &t in &selected {
        weightings.push((t.to_string(), DegreeWeighting::tau(sig.p(), t)));
    }
    for (label, w) in &weightings {
        for c in &crans {
            let tp = sig.tau(c.taus[0])?;
            if sig.is_degenerate(tp) {
                continue;
            }
            let desc = cran_desc(sig, tp, n);
            certificates.push(CertificateOutcome {
                weighting: label.clone(),
                tau_prime: tp.index(),
                n,
                certificate: break_certificate(sig, n, w, tp, &desc)?,
            });
        }
    }

    let mut bundle = ReportBundle {
        signature: sig.clone(),
        constants: constants(sig),
        admissibility: prime_admissible(sig),
        decomposition,
        hasse: ha.clone(),
        n,
        thresholds,
        polygons,
        ptorsion,
        towers,
        certificates,
        approximate: None,
    };
    if human {
        bundle.approximate = Some(approximations(&bundle));
    }
    Ok(bundle)
}

fn approximations(b: &ReportBundle) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    let mut put = |k: String, v: &Q| {
        out.insert(k, fmt_decimal(v, APPROX_DIGITS));
    };
    for (i, k) in b.constants.big_k.iter().enumerate() {
        put(format!("K.tau{}", i + 1), k);
    }
    for t in &b.thresholds {
        put(format!("threshold.tau{}.n{}.hn", t.tau + 1, t.n), &t.hn);
        put(format!("threshold.tau{}.n{}.existence", t.tau + 1, t.n), &t.existence);
    }
    for r in &b.ptorsion {
        put(format!("ptorsion.tau{}.deg_identity_rhs", r.tau + 1), &r.deg_identity_rhs);
        put(format!("ptorsion.tau{}.coker_degree", r.tau + 1), &r.coker_degree);
        put(format!("ptorsion.tau{}.eps", r.tau + 1), &r.eps);
    }
    for r in &b.towers {
        for l in &r.levels {
            put(format!("tower.tau{}.level{}.deg_lower_bound", r.tau + 1, l.level), &l.deg_lower_bound);
            put(format!("tower.tau{}.level{}.ha_quotient", r.tau + 1, l.level), &l.ha_quotient);
        }
    }
    out
}

/// Pretty JSON with object keys sorted, followed by a newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Internal(format!("serialization: {e}")))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Internal(format!("serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn parse_bundle(text: &str) -> Result<ReportBundle> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("report bundle: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn reference() -> Signature {
        Signature::parse("{f:2,p:7,h:3,q:[1,2]}").unwrap()
    }

    #[test]
    fn reference_bundle() {
        let s = reference();
        let ha = HasseInput::parse(&s, "1/100").unwrap();
        let b = analyze(&s, &ha, 2, None, false).unwrap();
        assert_eq!(b.constants.big_k, vec![q(0, 1), q(7, 48)]);
        let t2n2 = b.thresholds.iter().find(|t| t.tau == 1 && t.n == 2).unwrap();
        assert_eq!(t2n2.hn, q(23, 2352));
        assert_eq!(b.towers.len(), 2);
        assert!(b.approximate.is_none());
    }

    #[test]
    fn roundtrip_and_sorted_keys() {
        let s = reference();
        let ha = HasseInput::parse(&s, "{tau2: '1/100'}").unwrap();
        let b = analyze(&s, &ha, 2, None, true).unwrap();
        let text = to_canonical_json(&b).unwrap();
        assert_eq!(parse_bundle(&text).unwrap(), b);
        assert!(text.find("\"admissibility\"").unwrap() < text.find("\"constants\"").unwrap());
        assert_eq!(text, to_canonical_json(&analyze(&s, &ha, 2, None, true).unwrap()).unwrap());
        assert_eq!(b.approximate.unwrap()["K.tau2"], "0.145833");
    }

    #[test]
    fn restricted_to_one_embedding() {
        let s = reference();
        let b = analyze(&s, &HasseInput::zero(2), 1, Some(s.tau(0).unwrap()), false).unwrap();
        assert!(b.ptorsion.iter().all(|r| r.tau == 0));
        assert_eq!(b.polygons.hn_tau.len(), 1);
    }
}
