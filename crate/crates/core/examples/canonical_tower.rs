//! Degree identities and the Hasse recursion up the tower of canonical subgroups.

use mufilt::rational::{fmt_q, q};
use mufilt::tower::{
    appendix_details, duality_bookkeeping, frobenius_deformation_check, ptorsion_report, tower_report, HasseInput,
};
use mufilt::Signature;

pub fn run() -> mufilt::Result<String> {
    let sig = Signature::parse("{f:2,p:7,h:3,q:[1,2]}")?;
    let tau = sig.tau(1)?;
    let ha = q(1, 100);
    let p = ptorsion_report(&sig, tau, &ha)?;
    let mut out = format!("Deg = {}, coker = {}, eps = {}\n",
        fmt_q(&p.deg_identity_rhs), fmt_q(&p.coker_degree), fmt_q(&p.eps));
    let input = HasseInput::new(vec![q(0, 1), ha.clone()])?;
    for l in tower_report(&sig, tau, &input, 3)?.levels {
        out += &format!("level {}: Deg >= {}, Ha(G/C) <= {}, {:?}\n",
            l.level, fmt_q(&l.deg_lower_bound), fmt_q(&l.ha_quotient), l.hypotheses);
    }
    let d = duality_bookkeeping(&sig, tau, &ha)?;
    out += &format!("deg D^perp >= {}, consistent {}\n", fmt_q(&d.perp_deg_lower_bound), d.consistent);
    let k = frobenius_deformation_check(&sig, 1, &HasseInput::zero(2), 1_000_000)?;
    out += &format!("K_1 levels {:?}, Ker F^f levels {:?}\n", k.k_levels, k.ker_levels);
    for (pp, n, f) in [(3, 2, 2), (2, 3, 1)] {
        let a = appendix_details(pp, n, f)?;
        out += &format!("appendix ({pp},{n},{f}): lhs {} holds {}\n", fmt_q(&a.displayed_value), a.displayed_ok);
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> mufilt::Result<()> {
    print!("{}", run()?);
    Ok(())
}
