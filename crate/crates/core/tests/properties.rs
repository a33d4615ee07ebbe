use proptest::prelude::*;

use mufilt::group_models::{enumerate_split_subgroups, LTProductGroup, RaynaudDatum, raynaud_degrees};
use mufilt::hn::{hn_from_lattice, DegreeWeighting, SubobjectLattice};
use mufilt::periods::{graded_valuation, PeriodMonomial};
use mufilt::polygon::{renormalize, Convexity, Polygon};
use mufilt::rational::{q, q_pow, qi};
use mufilt::signature::{hasse_threshold, mu_ordinary_decomposition, signature_of_factors};
use mufilt::tower::{hasse_recursion, HasseInput};
use mufilt::{Signature, Q};

const PRIMES: [u64; 6] = [2, 3, 5, 7, 11, 13];

fn arb_signature(max_f: usize, max_h: u64) -> impl Strategy<Value = Signature> {
    (1..=max_f, 1..=max_h, 0..PRIMES.len()).prop_flat_map(|(f, h, pi)| {
        prop::collection::vec(0..=h, f).prop_map(move |qv| Signature::new(f, PRIMES[pi], h, qv).unwrap())
    })
}

fn arb_rational() -> impl Strategy<Value = Q> {
    (0i64..=200, 1i64..=50).prop_map(|(n, d)| q(n, d))
}

fn arb_concave() -> impl Strategy<Value = Polygon> {
    prop::collection::vec((1i64..=5, -20i64..=20), 1..6).prop_map(|segs| {
        let mut s: Vec<(Q, Q)> = segs.into_iter().map(|(w, m)| (qi(w), q(m, 3))).collect();
        s.sort_by(|a, b| b.1.cmp(&a.1));
        Polygon::from_segments(&s, Convexity::Concave).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dual_is_an_involution(s in arb_signature(6, 8)) {
        let d = s.dual();
        prop_assert_eq!(d.h(), s.h());
        prop_assert_eq!(d.q_vec(), &s.p_vec()[..]);
        prop_assert_eq!(d.dual(), s);
    }

    #[test]
    fn decomposition_round_trips(s in arb_signature(6, 8)) {
        let factors = mu_ordinary_decomposition(&s);
        for w in factors.windows(2) {
            prop_assert!(w[0].set.is_subset(&w[1].set) && w[0].set != w[1].set);
        }
        let (h, qv) = signature_of_factors(s.f(), &factors);
        prop_assert_eq!(h, s.h());
        prop_assert_eq!(&qv[..], s.q_vec());
    }

    #[test]
    fn threshold_scales_by_p_to_the_minus_f(s in arb_signature(4, 6), n in 1u64..5) {
        for tau in s.active_embeddings() {
            let a = hasse_threshold(&s, tau, n).unwrap();
            let b = hasse_threshold(&s, tau, n + 1).unwrap();
            if a > Q::from_integer(0.into()) {
                prop_assert!(b < a);
            }
            prop_assert_eq!(b * q_pow(s.p(), s.f() as u64), a);
        }
    }

    #[test]
    fn renormalize_composes(p in arb_concave(), a in 1u64..5, b in 1u64..5) {
        let lhs = renormalize(&renormalize(&p, a).unwrap(), b).unwrap();
        prop_assert_eq!(lhs, renormalize(&p, a * b).unwrap());
        prop_assert_eq!(renormalize(&p, 1).unwrap(), p);
    }

    #[test]
    fn graded_valuation_is_additive(
        f in 1usize..6,
        p_idx in 0..PRIMES.len(),
        x in prop::collection::vec(0i64..6, 6),
        y in prop::collection::vec(0i64..6, 6),
        cx in -3i64..3,
        cy in -3i64..3,
    ) {
        let p = PRIMES[p_idx];
        let m1 = PeriodMonomial::new(x[0], x[1..f].to_vec(), cx);
        let m2 = PeriodMonomial::new(y[0], y[1..f].to_vec(), cy);
        let (d1, v1) = graded_valuation(&m1, p).unwrap();
        let (d2, v2) = graded_valuation(&m2, p).unwrap();
        let (d, v) = graded_valuation(&m1.mul(&m2), p).unwrap();
        prop_assert_eq!(d, d1 + d2);
        prop_assert_eq!(v, v1 + v2);
    }

    #[test]
    fn frobenius_iterate_is_a_power_of_p(f in 1usize..6, x in prop::collection::vec(0i64..6, 6), c in -3i64..3) {
        let m = PeriodMonomial::new(x[0], x[1..f].to_vec(), c);
        let total: i64 = x[..f].iter().sum();
        prop_assert_eq!(m.frobenius_iter(f), m.times_p(total));
    }

    #[test]
    fn hasse_recursion_is_monotone(
        s in arb_signature(3, 4),
        a in arb_rational(),
        b in arb_rational(),
        d in arb_rational(),
    ) {
        let scale = q(1, 1000);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (lo, hi, d) = (lo * &scale, hi * &scale, d * &scale);
        for tau in s.active_embeddings() {
            let (Ok(x), Ok(y), Ok(z)) = (
                hasse_recursion(&s, tau, &lo, &d),
                hasse_recursion(&s, tau, &hi, &d),
                hasse_recursion(&s, tau, &d, &hi),
            ) else {
                continue;
            };
            prop_assert!(x <= y);
            let w = hasse_recursion(&s, tau, &d, &lo).unwrap();
            prop_assert!(w <= z);
        }
    }

    #[test]
    fn raynaud_dual_degrees_complement(vd in prop::collection::vec((0i64..=12, 1i64..=12), 1..6)) {
        let vdelta: Vec<Q> = vd.into_iter().map(|(n, d)| q(n.min(d), d)).collect();
        let d = RaynaudDatum::new(5, vdelta).unwrap();
        let a = raynaud_degrees(&d);
        let b = raynaud_degrees(&d.dual());
        for (x, y) in a.deg.iter().zip(&b.deg) {
            prop_assert_eq!(x + y, Q::from_integer(1.into()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn hn_ignores_node_order(s in arb_signature(2, 3), n in 1u64..3, seed in any::<u64>()) {
        let g = LTProductGroup::mu_ordinary(&s, n);
        let split = enumerate_split_subgroups(&g, 1_000_000).unwrap();
        let base = SubobjectLattice::from_split(&split);
        let nodes = base.nodes().to_vec();
        let pairs = base.containment_pairs();
        let m = nodes.len();
        let mut perm: Vec<usize> = (0..m).collect();
        let mut state = seed | 1;
        for i in (1..m).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            perm.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let mut shuffled = vec![nodes[0].clone(); m];
        for (old, &new) in perm.iter().enumerate() {
            shuffled[new] = nodes[old].clone();
        }
        let moved: Vec<(usize, usize)> = pairs.iter().map(|&(i, j)| (perm[i], perm[j])).collect();
        let lat = SubobjectLattice::new(shuffled, &moved).unwrap();
        let mut weightings = vec![DegreeWeighting::classical(s.p(), s.f())];
        weightings.extend(s.embeddings().map(|t| DegreeWeighting::tau(s.p(), t)));
        for w in &weightings {
            let a = hn_from_lattice(&base, w).unwrap();
            let b = hn_from_lattice(&lat, w).unwrap();
            prop_assert_eq!(&a.polygon, &b.polygon);
            prop_assert_eq!(&a.filtration, &b.filtration);
            prop_assert_eq!(&a.slopes, &b.slopes);
        }
    }

    #[test]
    fn tower_hasse_stays_below_the_trivial_bound(s in arb_signature(3, 4), ha in arb_rational()) {
        let ha = ha * q(1, 1000);
        let input = HasseInput::new(vec![ha.clone(); s.f()]).unwrap();
        for tau in s.active_embeddings() {
            let r = mufilt::tower::tower_report(&s, tau, &input, 3).unwrap();
            for l in &r.levels {
                prop_assert!(l.ha_quotient <= q_pow(s.p(), l.level * s.f() as u64) * &ha);
            }
        }
    }
}
