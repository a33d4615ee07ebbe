//! Harder-Narasimhan filtration of the μ-ordinary `G[p^n]` by exhaustive
//! enumeration of split subgroups, compared with the closed forms.

use mufilt::group_models::{enumerate_split_subgroups, LTProductGroup, DEFAULT_ENUM_CAP};
use mufilt::hn::{hn_from_lattice, DegreeWeighting, SubobjectLattice};
use mufilt::polygon::{hn_mu_ordinary_tau, renormalize, reversed_hodge};
use mufilt::rational::{fmt_q, qi};
use mufilt::Signature;

pub fn run() -> mufilt::Result<String> {
    let sig = Signature::parse("{f:2,p:3,h:3,q:[1,2]}")?;
    let n = 2;
    let g = LTProductGroup::mu_ordinary(&sig, n);
    let split = enumerate_split_subgroups(&g, DEFAULT_ENUM_CAP)?;
    let lat = SubobjectLattice::from_split(&split);
    let mut out = format!("{} split subgroups\n", split.len());

    let classical = hn_from_lattice(&lat, &DegreeWeighting::classical(sig.p(), sig.f()))?;
    let same = renormalize(&classical.o_polygon(sig.f()), n)? == reversed_hodge(&sig);
    out += &format!("classical slopes {:?}, equals reversed hodge: {same}\n",
        classical.slopes.iter().map(fmt_q).collect::<Vec<_>>());
    for tau in sig.embeddings() {
        let r = hn_from_lattice(&lat, &DegreeWeighting::tau(sig.p(), tau))?;
        let expected = hn_mu_ordinary_tau(&sig, tau)?.scale_values(&qi(sig.f() as i64))?;
        out += &format!("{tau}: equals closed form: {}, same filtration: {}\n",
            renormalize(&r.polygon, n)? == expected, r.filtration == classical.filtration);
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> mufilt::Result<()> {
    print!("{}", run()?);
    Ok(())
}
