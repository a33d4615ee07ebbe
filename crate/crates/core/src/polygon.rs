//! Piecewise-linear polygons with exact rational breakpoints.

use num_traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{q_pow, qi, IntRepr, Q};
use crate::signature::{EmbeddingIndex, Signature};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convexity {
    Convex,
    Concave,
}

/// A polygon starting at `(0, 0)`, stored by its breakpoints.
///
/// Collinear interior points are removed on construction, so two polygons
/// describing the same function compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polygon {
    points: Vec<(Q, Q)>,
    convexity: Convexity,
}

impl Polygon {
    pub fn new(points: Vec<(Q, Q)>, convexity: Convexity) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidPolygon("no points".into()))?;
        if !first.0.is_zero() || !first.1.is_zero() {
            return Err(Error::InvalidPolygon("first point must be (0,0)".into()));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidPolygon("abscissas must increase strictly".into()));
            }
        }
        let mut kept: Vec<(Q, Q)> = vec![points[0].clone()];
        let mut last_slope: Option<Q> = None;
        for pt in points.into_iter().skip(1) {
            let prev = kept.last().expect("nonempty").clone();
            let slope = (&pt.1 - &prev.1) / (&pt.0 - &prev.0);
            match &last_slope {
                Some(s) if *s == slope => {
                    *kept.last_mut().expect("nonempty") = pt;
                }
                Some(s) => {
                    let ok = match convexity {
                        Convexity::Convex => slope > *s,
                        Convexity::Concave => slope < *s,
                    };
                    if !ok {
                        return Err(Error::InvalidPolygon(format!(
                            "slopes violate {convexity:?} shape"
                        )));
                    }
                    kept.push(pt);
                    last_slope = Some(slope);
                }
                None => {
                    kept.push(pt);
                    last_slope = Some(slope);
                }
            }
        }
        Ok(Self { points: kept, convexity })
    }

    /// Builds a polygon from consecutive `(width, slope)` segments.
    pub fn from_segments(segments: &[(Q, Q)], convexity: Convexity) -> Result<Self> {
        let mut pts = vec![(Q::zero(), Q::zero())];
        let (mut x, mut y) = (Q::zero(), Q::zero());
        for (w, s) in segments {
            if !w.is_zero() {
                x += w;
                y += w * s;
                pts.push((x.clone(), y.clone()));
            }
        }
        Self::new(pts, convexity)
    }

    pub fn points(&self) -> &[(Q, Q)] {
        &self.points
    }

    pub fn convexity(&self) -> Convexity {
        self.convexity
    }

    pub fn end_x(&self) -> &Q {
        &self.points.last().expect("nonempty").0
    }

    pub fn end_y(&self) -> &Q {
        &self.points.last().expect("nonempty").1
    }

    pub fn breakpoints_x(&self) -> Vec<Q> {
        self.points.iter().map(|p| p.0.clone()).collect()
    }

    pub fn slopes(&self) -> Vec<Q> {
        self.points
            .windows(2)
            .map(|w| (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0))
            .collect()
    }

    /// Value at `x`, by linear interpolation; `None` outside `[0, end]`.
    pub fn eval(&self, x: &Q) -> Option<Q> {
        if *x < Q::zero() || x > self.end_x() {
            return None;
        }
        let i = self.points.partition_point(|p| p.0 < *x);
        let (x1, y1) = &self.points[i];
        if x1 == x {
            return Some(y1.clone());
        }
        let (x0, y0) = &self.points[i - 1];
        Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }

    /// The polygon `x ↦ c·P(x)`.
    pub fn scale_values(&self, c: &Q) -> Result<Self> {
        let pts = self.points.iter().map(|(x, y)| (x.clone(), y * c)).collect();
        let conv = if *c < Q::zero() {
            match self.convexity {
                Convexity::Convex => Convexity::Concave,
                Convexity::Concave => Convexity::Convex,
            }
        } else {
            self.convexity
        };
        Self::new(pts, conv)
    }
}

impl Serialize for Polygon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            convexity: Convexity,
            points: Vec<(IntRepr, IntRepr, IntRepr, IntRepr)>,
        }
        let points = self
            .points
            .iter()
            .map(|(x, y)| {
                (
                    IntRepr::from_big(x.numer()),
                    IntRepr::from_big(x.denom()),
                    IntRepr::from_big(y.numer()),
                    IntRepr::from_big(y.denom()),
                )
            })
            .collect();
        Repr { convexity: self.convexity, points }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polygon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            convexity: Convexity,
            points: Vec<(IntRepr, IntRepr, IntRepr, IntRepr)>,
        }
        let r = Repr::deserialize(d)?;
        let mut pts = Vec::with_capacity(r.points.len());
        for (a, b, c, e) in r.points {
            let (a, b) = (a.into_big::<D::Error>()?, b.into_big::<D::Error>()?);
            let (c, e) = (c.into_big::<D::Error>()?, e.into_big::<D::Error>()?);
            if b.is_zero() || e.is_zero() {
                return Err(D::Error::custom("zero denominator"));
            }
            pts.push((Q::new(a, b), Q::new(c, e)));
        }
        Polygon::new(pts, r.convexity).map_err(D::Error::custom)
    }
}

/// `Hdg_O = (1/f) Σ_τ Hdg_τ`, where `Hdg_τ` has slope 0 on `[0, q_τ]` and 1 after.
pub fn hodge_polygon(sig: &Signature) -> Polygon {
    let f = sig.f() as i64;
    let segs: Vec<(Q, Q)> = (1..=sig.h())
        .map(|x| {
            let count = sig.q_vec().iter().filter(|&&qt| qt < x).count() as i64;
            (Q::one(), Q::new(count.into(), f.into()))
        })
        .collect();
    Polygon::from_segments(&segs, Convexity::Convex).expect("hodge slopes increase")
}

/// Convex polygon with the given slopes and (positive) widths.
pub fn newton_from_slopes(slopes: &[(Q, Q)]) -> Result<Polygon> {
    let mut segs = Vec::with_capacity(slopes.len());
    for (s, m) in slopes {
        if *m <= Q::zero() {
            return Err(Error::InvalidMultiplicity(m.clone()));
        }
        segs.push((m.clone(), s.clone()));
    }
    segs.sort_by(|a, b| a.1.cmp(&b.1));
    Polygon::from_segments(&segs, Convexity::Convex)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Dominance {
    pub dominates: bool,
    pub same_endpoints: bool,
    #[serde(with = "crate::rational::serde_qvec")]
    pub contacts: Vec<Q>,
}

/// Compares `upper ≥ lower` at the union of both breakpoint sets.
pub fn lies_above(upper: &Polygon, lower: &Polygon) -> Result<Dominance> {
    if upper.end_x() != lower.end_x() {
        return Err(Error::DomainMismatch {
            left: upper.end_x().clone(),
            right: lower.end_x().clone(),
        });
    }
    let mut xs: Vec<Q> = upper.breakpoints_x();
    xs.extend(lower.breakpoints_x());
    xs.sort();
    xs.dedup();
    let mut dominates = true;
    let mut contacts = Vec::new();
    for x in xs {
        let u = upper.eval(&x).expect("in domain");
        let l = lower.eval(&x).expect("in domain");
        if u < l {
            dominates = false;
        }
        if u == l {
            contacts.push(x);
        }
    }
    Ok(Dominance { dominates, same_endpoints: upper.end_y() == lower.end_y(), contacts })
}

/// Concave polygon whose slope on `(x-1, x]` is `|{τ : p_τ ≥ x}|/f`.
pub fn reversed_hodge(sig: &Signature) -> Polygon {
    let f = sig.f() as i64;
    let pv = sig.p_vec();
    let segs: Vec<(Q, Q)> = (1..=sig.h())
        .map(|x| {
            let count = pv.iter().filter(|&&pt| pt >= x).count() as i64;
            (Q::one(), Q::new(count.into(), f.into()))
        })
        .collect();
    Polygon::from_segments(&segs, Convexity::Concave).expect("reversed hodge slopes decrease")
}

/// Value `(1/f) Σ_{i=1}^f p^{f-i} min(x, p_{σ^i τ})`.
fn hn_tau_value(sig: &Signature, tau: EmbeddingIndex, x: u64) -> Q {
    let f = sig.f() as u64;
    let mut acc = Q::zero();
    for i in 1..=f {
        let other = sig.p_of(tau.shift(i as i64));
        acc += q_pow(sig.p(), f - i) * qi(x.min(other) as i64);
    }
    acc / qi(f as i64)
}

/// τ-weighted HN polygon of the μ-ordinary `G[p]`, linear between the
/// distinct values of `p_τ'`.
pub fn hn_mu_ordinary_tau(sig: &Signature, tau: EmbeddingIndex) -> Result<Polygon> {
    sig.check_tau(tau)?;
    let mut xs: Vec<u64> = sig.p_vec();
    xs.push(0);
    xs.push(sig.h());
    xs.sort_unstable();
    xs.dedup();
    let pts = xs.into_iter().map(|x| (qi(x as i64), hn_tau_value(sig, tau, x))).collect();
    Polygon::new(pts, Convexity::Concave)
}

/// `x ↦ P(n x)/n`.
pub fn renormalize(poly: &Polygon, n: u64) -> Result<Polygon> {
    if n == 0 {
        return Err(Error::InvalidFactor);
    }
    let nq = qi(n as i64);
    let pts = poly.points.iter().map(|(x, y)| (x / &nq, y / &nq)).collect();
    Polygon::new(pts, poly.convexity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn pts(v: &[(i64, i64, i64, i64)]) -> Vec<(Q, Q)> {
        v.iter().map(|&(a, b, c, d)| (q(a, b), q(c, d))).collect()
    }

    fn reference() -> Signature {
        Signature::new(2, 7, 3, vec![1, 2]).unwrap()
    }

    #[test]
    fn hodge_examples() {
        assert_eq!(
            hodge_polygon(&reference()).points(),
            pts(&[(0, 1, 0, 1), (1, 1, 0, 1), (2, 1, 1, 2), (3, 1, 3, 2)]).as_slice()
        );
        let s = Signature::new(3, 5, 2, vec![0, 1, 2]).unwrap();
        assert_eq!(
            hodge_polygon(&s).points(),
            pts(&[(0, 1, 0, 1), (1, 1, 1, 3), (2, 1, 1, 1)]).as_slice()
        );
        let flat = Signature::new(2, 5, 4, vec![4, 4]).unwrap();
        assert_eq!(hodge_polygon(&flat).points(), pts(&[(0, 1, 0, 1), (4, 1, 0, 1)]).as_slice());
    }

    #[test]
    fn newton_examples() {
        let line = newton_from_slopes(&[(q(1, 2), qi(3))]).unwrap();
        assert_eq!(line.points(), pts(&[(0, 1, 0, 1), (3, 1, 3, 2)]).as_slice());
        let a = newton_from_slopes(&[(qi(1), qi(1)), (qi(0), qi(1)), (q(1, 2), qi(1))]).unwrap();
        assert_eq!(a, hodge_polygon(&reference()));
        assert!(matches!(
            newton_from_slopes(&[(qi(0), qi(0))]),
            Err(Error::InvalidMultiplicity(_))
        ));
    }

    #[test]
    fn dominance_examples() {
        let hdg = hodge_polygon(&reference());
        let line = newton_from_slopes(&[(q(1, 2), qi(3))]).unwrap();
        let d = lies_above(&line, &hdg).unwrap();
        assert!(d.dominates && d.same_endpoints);
        assert_eq!(d.contacts, vec![qi(0), qi(3)]);
        assert!(!lies_above(&hdg, &line).unwrap().dominates);
        let eq = lies_above(&hdg, &hdg).unwrap();
        assert!(eq.dominates);
        assert_eq!(eq.contacts, hdg.breakpoints_x());
        let short = newton_from_slopes(&[(q(1, 2), qi(2))]).unwrap();
        assert!(matches!(lies_above(&short, &hdg), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn reversed_examples() {
        assert_eq!(
            reversed_hodge(&reference()).points(),
            pts(&[(0, 1, 0, 1), (1, 1, 1, 1), (2, 1, 3, 2), (3, 1, 3, 2)]).as_slice()
        );
        let mult = Signature::new(2, 5, 3, vec![0, 0]).unwrap();
        assert_eq!(reversed_hodge(&mult).points(), pts(&[(0, 1, 0, 1), (3, 1, 3, 1)]).as_slice());
        let et = Signature::new(2, 5, 3, vec![3, 3]).unwrap();
        assert_eq!(reversed_hodge(&et).points(), pts(&[(0, 1, 0, 1), (3, 1, 0, 1)]).as_slice());
    }

    #[test]
    fn hn_tau_examples() {
        let s = reference();
        let p = hn_mu_ordinary_tau(&s, s.tau(1).unwrap()).unwrap();
        assert_eq!(p.eval(&qi(1)), Some(qi(4)));
        assert_eq!(p.eval(&qi(2)), Some(q(15, 2)));
        let mult = Signature::new(2, 5, 3, vec![0, 0]).unwrap();
        let p = hn_mu_ordinary_tau(&mult, mult.tau(0).unwrap()).unwrap();
        assert_eq!(p.points(), pts(&[(0, 1, 0, 1), (3, 1, 9, 1)]).as_slice());
        let one = Signature::new(1, 3, 4, vec![1]).unwrap();
        let p = hn_mu_ordinary_tau(&one, one.tau(0).unwrap()).unwrap();
        assert_eq!(p.points(), pts(&[(0, 1, 0, 1), (3, 1, 3, 1), (4, 1, 3, 1)]).as_slice());
    }

    #[test]
    fn renormalize_examples() {
        let p = Polygon::new(pts(&[(0, 1, 0, 1), (2, 1, 3, 1), (4, 1, 4, 1)]), Convexity::Concave)
            .unwrap();
        let r = renormalize(&p, 2).unwrap();
        assert_eq!(r.eval(&qi(1)), Some(q(3, 2)));
        assert_eq!(renormalize(&p, 1).unwrap(), p);
        assert_eq!(renormalize(&p, 0), Err(Error::InvalidFactor));
    }

    #[test]
    fn json_schema() {
        let p = reversed_hodge(&reference());
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"convexity":"concave","points":[[0,1,0,1],[1,1,1,1],[2,1,3,2],[3,1,3,2]]}"#);
        let back: Polygon = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn shape_validation() {
        let bad = Polygon::new(pts(&[(0, 1, 0, 1), (1, 1, 1, 1), (2, 1, 3, 1)]), Convexity::Concave);
        assert!(bad.is_err());
        let start = Polygon::new(pts(&[(1, 1, 0, 1)]), Convexity::Convex);
        assert!(start.is_err());
    }
}
