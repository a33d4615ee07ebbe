//! Property sweeps over parameter grids, shared by the `verify` subcommand
//! and the acceptance tests.

use std::time::Instant;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group_models::{
    cran_desc, enumerate_split_subgroups, mu_ord_canonical_filtration, raynaud_hodge_tate_coker_degree,
    raynaud_point_valuations, LTProductGroup, RaynaudDatum,
};
use crate::hn::{bijakowski_containment, deg_weighted, hn_from_lattice, DegreeWeighting, SubobjectLattice};
use crate::lt_crystals::{generator_valuation, verify_phi_eq_p, LTSModel};
use crate::periods::{cyclotomic_period, graded_valuation, multiplication_map, t_decomposition_check};
use crate::polygon::{hn_mu_ordinary_tau, renormalize, reversed_hodge};
use crate::rational::{q, q_pow, qi, Q};
use crate::report::{analyze, to_canonical_json};
use crate::signature::{
    big_k_tau, is_prime, prime_admissible, EmbeddingIndex, EmbeddingSet, Signature,
};
use crate::tower::{
    appendix_details, frobenius_deformation_check, hasse_recursion, ptorsion_report, tower_report, worst_case,
    HasseInput,
};

pub const SUITES: [&str; 9] =
    ["constants", "hn", "raynaud", "periods", "lts", "tower", "deformation", "appendix", "determinism"];

const MAX_REPORTED: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub passed: bool,
    pub cases: u64,
    pub failures: Vec<String>,
    pub elapsed_ms: u128,
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&x| is_prime(x)).collect()
}

/// Every signature with the given `f`, `p`, `h`.
pub fn signatures(f: usize, p: u64, h: u64) -> Vec<Signature> {
    let base = h + 1;
    let count = base.pow(f as u32);
    (0..count)
        .map(|mut code| {
            let mut qv = vec![0u64; f];
            for slot in qv.iter_mut() {
                *slot = code % base;
                code /= base;
            }
            Signature::new(f, p, h, qv).expect("in range")
        })
        .collect()
}

fn grid(fs: std::ops::RangeInclusive<usize>, ps: &[u64], hs: std::ops::RangeInclusive<u64>) -> Vec<Signature> {
    let mut out = Vec::new();
    for f in fs {
        for &p in ps {
            for h in hs.clone() {
                out.extend(signatures(f, p, h));
            }
        }
    }
    out
}

struct Tally {
    cases: u64,
    failures: Vec<String>,
    failed: u64,
}

impl Tally {
    fn new() -> Self {
        Self { cases: 0, failures: Vec::new(), failed: 0 }
    }

    fn merge(mut self, other: Tally) -> Self {
        self.cases += other.cases;
        self.failed += other.failed;
        for f in other.failures {
            if self.failures.len() < MAX_REPORTED {
                self.failures.push(f);
            }
        }
        self
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < MAX_REPORTED {
                self.failures.push(what());
            }
        }
    }

    fn check_result(&mut self, r: Result<bool>, what: impl FnOnce() -> String) {
        match r {
            Ok(ok) => self.check(ok, what),
            Err(e) => self.check(false, || format!("{}: {e}", what())),
        }
    }
}

fn par_tally<T: Sync>(items: &[T], f: impl Fn(&T, &mut Tally) + Sync) -> Tally {
    items
        .par_iter()
        .map(|x| {
            let mut t = Tally::new();
            f(x, &mut t);
            t
        })
        .reduce(Tally::new, Tally::merge)
}

pub fn run_suite(name: &str, cap: u64) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let tally = match name {
        "constants" => constants_suite(),
        "hn" => hn_suite(cap),
        "raynaud" => raynaud_suite(),
        "periods" => periods_suite(),
        "lts" => lts_suite(),
        "tower" => tower_suite(),
        "deformation" => deformation_suite(cap),
        "appendix" => appendix_suite(cap),
        "determinism" => determinism_suite(),
        other => return Err(Error::Parse(format!("unknown suite {other:?}"))),
    };
    Ok(SuiteOutcome {
        suite: name.to_string(),
        passed: tally.failed == 0 && tally.cases > 0,
        cases: tally.cases,
        failures: tally.failures,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

fn reference() -> Signature {
    Signature::new(2, 7, 3, vec![1, 2]).expect("valid")
}

fn constants_suite() -> Tally {
    let mut t = Tally::new();
    let s = reference();
    let c = crate::signature::constants(&s);
    t.check(c.k == vec![0, 1], || format!("k = {:?}", c.k));
    t.check(c.big_k == vec![Q::zero(), q(7, 48)], || "K".into());
    t.check(c.r == vec![1, 2], || format!("r = {:?}", c.r));
    let t2 = EmbeddingIndex::new(1, 2).expect("valid");
    t.check_result(
        crate::signature::hasse_threshold(&s, t2, 1).map(|v| v == q(23, 48)),
        || "threshold n=1".into(),
    );
    t.check_result(
        crate::signature::hasse_threshold(&s, t2, 2).map(|v| v == q(23, 2352)),
        || "threshold n=2".into(),
    );
    for tau in s.embeddings() {
        let mm = multiplication_map(&s, tau).map(|m| m.k_value == big_k_tau(&s, tau));
        t.check_result(mm, || format!("K via periods at {tau}"));
    }
    t
}

fn hn_case(sig: &Signature, n: u64, cap: u64, t: &mut Tally) {
    let label = || format!("{sig} n={n}");
    let g = LTProductGroup::mu_ordinary(sig, n);
    let lat = match enumerate_split_subgroups(&g, cap) {
        Ok(l) => SubobjectLattice::from_split(&l),
        Err(e) => return t.check(false, || format!("{}: {e}", label())),
    };
    let f = sig.f();
    let classical = match hn_from_lattice(&lat, &DegreeWeighting::classical(sig.p(), f)) {
        Ok(r) => r,
        Err(e) => return t.check(false, || format!("{}: {e}", label())),
    };
    let ok = renormalize(&classical.o_polygon(f), n).map(|p| p == reversed_hodge(sig));
    t.check_result(ok, || format!("{}: classical polygon", label()));
    for tau in sig.embeddings() {
        let r = hn_from_lattice(&lat, &DegreeWeighting::tau(sig.p(), tau));
        let ok = r.and_then(|r| {
            let lhs = renormalize(&r.polygon, n)?;
            let rhs = hn_mu_ordinary_tau(sig, tau)?.scale_values(&qi(f as i64))?;
            Ok(lhs == rhs && r.filtration == classical.filtration)
        });
        t.check_result(ok, || format!("{}: weighting {tau}", label()));
    }
}

fn hn_suite(cap: u64) -> Tally {
    let sigs = grid(1..=3, &[2, 3, 5, 7], 1..=4);
    par_tally(&sigs, |s, t| {
        for n in 1..=2 {
            hn_case(s, n, cap, t);
        }
    })
}

/// Uniform rational in `[0, 1]` with denominator at most 60.
pub fn random_unit_rational(rng: &mut ChaCha8Rng) -> Q {
    let d: i64 = rng.gen_range(1..=60);
    let n: i64 = rng.gen_range(0..=d);
    q(n, d)
}

fn raynaud_suite() -> Tally {
    let mut jobs = Vec::new();
    for f in 1..=6usize {
        for p in [2u64, 3, 5, 7] {
            jobs.push((f, p));
        }
    }
    par_tally(&jobs, |&(f, p), t| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ ((f as u64) << 8) ^ p);
        for _ in 0..1000 {
            let vdelta: Vec<Q> = (0..f).map(|_| random_unit_rational(&mut rng)).collect();
            let d = match RaynaudDatum::new(p, vdelta) {
                Ok(d) => d,
                Err(e) => return t.check(false, || format!("datum f={f} p={p}: {e}")),
            };
            let oracle = raynaud_point_valuations(&d);
            for tau in EmbeddingIndex::all(f) {
                let ok = raynaud_hodge_tate_coker_degree(&d, tau).map(|v| v == oracle[tau.index()]);
                t.check_result(ok, || format!("raynaud f={f} p={p} {tau}"));
            }
        }
    })
}

/// A random signature accepted by [`prime_admissible`].
pub fn random_admissible(rng: &mut ChaCha8Rng, primes: &[u64]) -> Signature {
    loop {
        let f = rng.gen_range(1..=6usize);
        let h = rng.gen_range(1..=6u64);
        let p = primes[rng.gen_range(0..primes.len())];
        let qv = (0..f).map(|_| rng.gen_range(0..=h)).collect();
        let s = Signature::new(f, p, h, qv).expect("in range");
        if prime_admissible(&s).admissible && !s.active_embeddings().is_empty() {
            return s;
        }
    }
}

fn periods_suite() -> Tally {
    let primes97 = primes_up_to(97);
    let mut t = Tally::new();
    for f in 1..=8usize {
        for &p in &primes97 {
            t.check(t_decomposition_check(f, p), || format!("t decomposition f={f} p={p}"));
            let gv = graded_valuation(&cyclotomic_period(f), p).map(|(fil, v)| fil == 1 && v == q(1, p as i64 - 1));
            t.check_result(gv, || format!("graded valuation of t f={f} p={p}"));
        }
    }
    let sigs = grid(1..=6, &primes_up_to(23), 1..=6);
    let k_tally = par_tally(&sigs, |s, t| {
        for tau in s.active_embeddings() {
            let ok = multiplication_map(s, tau).map(|m| m.k_value == big_k_tau(s, tau));
            t.check_result(ok, || format!("K value {s} {tau}"));
        }
    });
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a11);
    let mut transport = Tally::new();
    for _ in 0..200 {
        let s = random_admissible(&mut rng, &primes97);
        for tau in s.active_embeddings() {
            let ok = multiplication_map(&s, tau).map(|m| m.transport_ok);
            transport.check_result(ok, || format!("transport {s} {tau}"));
        }
    }
    t.merge(k_tally).merge(transport)
}

fn lts_suite() -> Tally {
    let mut jobs = Vec::new();
    for f in 1..=6usize {
        for mask in 0..(1u64 << f) - 1 {
            for p in [2u64, 3, 5, 7] {
                jobs.push((f, mask, p));
            }
        }
    }
    par_tally(&jobs, |&(f, mask, p), t| {
        let s = EmbeddingSet::from_mask(f, mask);
        for tau0 in (0..f).filter(|&i| !s.contains(i)) {
            let label = || format!("LT_{s} f={f} p={p} tau0=τ{}", tau0 + 1);
            let m = match LTSModel::new(p, s.clone(), tau0) {
                Ok(m) => m,
                Err(e) => return t.check(false, || format!("{}: {e}", label())),
            };
            let ok = verify_phi_eq_p(&m).and_then(|c| {
                let v = generator_valuation(&m)?;
                Ok(c.eigen_ok && c.fil_pattern_ok && v < q(1, p as i64 - 1))
            });
            t.check_result(ok, label);
        }
    })
}

fn tower_suite() -> Tally {
    let mut t = Tally::new();
    let has = [q(0, 1), q(1, 10_000), q(1, 1000), q(1, 100), q(1, 20)];
    for s in grid(1..=3, &[2, 3, 5, 7], 1..=4) {
        for tau in s.active_embeddings() {
            let label = || format!("{s} {tau}");
            for ha in &has {
                let pf = q_pow(s.p(), s.f() as u64);
                if pf.clone() * ha + ha < Q::one() {
                    let ok = hasse_recursion(&s, tau, ha, ha).map(|v| v == worst_case(&s, ha) && v == pf * ha);
                    t.check_result(ok, || format!("{}: worst case ha={ha}", label()));
                }
                let hi = match HasseInput::new(vec![ha.clone(); s.f()]) {
                    Ok(h) => h,
                    Err(e) => return Tally { failed: 1, cases: 1, failures: vec![e.to_string()] },
                };
                let ok = tower_report(&s, tau, &hi, 3).map(|r| {
                    r.levels
                        .iter()
                        .all(|l| l.ha_quotient <= q_pow(s.p(), l.level * s.f() as u64) * ha)
                });
                t.check_result(ok, || format!("{}: tower hasse bound ha={ha}", label()));
            }
            let desc = cran_desc(&s, tau, 1);
            let ok = ptorsion_report(&s, tau, &Q::zero()).and_then(|r| {
                let weighted = deg_weighted(&desc, &DegreeWeighting::tau(s.p(), tau))?;
                Ok(r.deg_identity_rhs == weighted
                    && r.coker_degree == big_k_tau(&s, tau)
                    && r.classical_lower_bound == desc.total_degree())
            });
            t.check_result(ok, || format!("{}: ha=0 cran degrees", label()));
        }
    }
    t
}

fn deformation_suite(cap: u64) -> Tally {
    let sigs = grid(1..=3, &[2, 3], 1..=3);
    par_tally(&sigs, |s, t| {
        for n in 1..=2 {
            let ok = frobenius_deformation_check(s, n, &HasseInput::zero(s.f()), cap)
                .map(|c| c.heights_match && c.subgroup_match && c.lattice_position.is_some());
            t.check_result(ok, || format!("{s} n={n}"));
        }
    })
}

fn bijakowski_case(s: &Signature, n: u64, cap: u64, t: &mut Tally) {
    let crans: Vec<_> = mu_ord_canonical_filtration(s, n).into_iter().filter(|c| c.desc.o_height > 0).collect();
    for (i, d) in crans.iter().enumerate() {
        for c in &crans[i + 1..] {
            let ok = bijakowski_containment(
                s,
                n,
                d.desc.o_height,
                c.desc.o_height,
                &d.desc.total_degree(),
                &c.desc.total_degree(),
            );
            t.check_result(ok, || format!("{s} n={n}: nested crans q={} ⊂ q={}", d.q_value, c.q_value));
        }
    }
    let g = LTProductGroup::mu_ordinary(s, n);
    let lat = match enumerate_split_subgroups(&g, cap) {
        Ok(l) => l,
        Err(e) => return t.check(false, || format!("{s} n={n}: {e}")),
    };
    let nodes = lat.nodes();
    for (i, d) in nodes.iter().enumerate() {
        for (j, c) in nodes.iter().enumerate() {
            if d.desc.o_height > c.desc.o_height || lat.contains(i, j) {
                continue;
            }
            let ok = bijakowski_containment(
                s,
                n,
                d.desc.o_height,
                c.desc.o_height,
                &d.desc.total_degree(),
                &c.desc.total_degree(),
            )
            .map(|fires| !fires);
            t.check_result(ok, || format!("{s} n={n}: fires on {:?} ⊄ {:?}", d.levels, c.levels));
        }
    }
}

fn appendix_suite(cap: u64) -> Tally {
    let mut jobs = Vec::new();
    for p in primes_up_to(97) {
        for n in 1..=8u64 {
            for f in 1..=8u64 {
                jobs.push((p, n, f));
            }
        }
    }
    let lemma = par_tally(&jobs, |&(p, n, f), t| {
        let ok = appendix_details(p, n, f).map(|c| c.reduced_ok && c.displayed_ok && c.base_ok);
        t.check_result(ok, || format!("appendix p={p} n={n} f={f}"));
    });
    let sigs = grid(1..=3, &[2, 3, 5, 7], 1..=4);
    let bij = par_tally(&sigs, |s, t| {
        for n in 1..=2 {
            bijakowski_case(s, n, cap, t);
        }
    });
    lemma.merge(bij)
}

fn determinism_suite() -> Tally {
    let mut t = Tally::new();
    let s = reference();
    let render = || -> Result<String> {
        let ha = HasseInput::parse(&s, "1/100")?;
        to_canonical_json(&analyze(&s, &ha, 2, None, true)?)
    };
    match (render(), render()) {
        (Ok(a), Ok(b)) => t.check(a == b, || "two analyze runs differ".into()),
        (Err(e), _) | (_, Err(e)) => t.check(false, || e.to_string()),
    }
    t
}
