//! Hodge, reversed Hodge and τ-weighted HN polygons, with an SVG overlay.

use mufilt::polygon::{hn_mu_ordinary_tau, hodge_polygon, lies_above, reversed_hodge};
use mufilt::rational::fmt_q;
use mufilt::svg::{render, Series};
use mufilt::Q;

fn show(v: &[Q]) -> String {
    v.iter().map(fmt_q).collect::<Vec<_>>().join(" ")
}
use mufilt::Signature;

pub fn run() -> mufilt::Result<String> {
    let sig = Signature::parse("{f:3,p:5,h:4,q:[1,3,2]}")?;
    let hodge = hodge_polygon(&sig);
    let rev = reversed_hodge(&sig);
    let dom = lies_above(&rev, &hodge)?;
    let mut out = format!("hodge slopes {}\nreversed slopes {}\n", show(&hodge.slopes()), show(&rev.slopes()));
    out += &format!("reversed above hodge: {} (contacts {})\n", dom.dominates, dom.contacts.len());
    for tau in sig.embeddings() {
        let p = hn_mu_ordinary_tau(&sig, tau)?;
        out += &format!("hn {tau}: slopes {}\n", show(&p.slopes()));
    }
    let svg = render(
        &sig.to_string(),
        &[Series { label: "hodge".into(), polygon: &hodge }, Series { label: "reversed_hodge".into(), polygon: &rev }],
    );
    out += &format!("svg bytes: {}\n", svg.len());
    Ok(out)
}

#[allow(dead_code)]
fn main() -> mufilt::Result<()> {
    print!("{}", run()?);
    Ok(())
}
