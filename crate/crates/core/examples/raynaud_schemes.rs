//! Degrees of Raynaud schemes and the Hodge-Tate cokernel, checked against
//! a direct walk around the Frobenius cycle.

use mufilt::group_models::{raynaud_hodge_tate_coker_degree, raynaud_point_valuations, RaynaudDatum};
use mufilt::rational::fmt_q;
use mufilt::EmbeddingIndex;

pub fn run() -> mufilt::Result<String> {
    let d = RaynaudDatum::parse("{f:3,p:5,vdelta:[\"1/2\",\"1/4\",\"2/3\"]}")?;
    let oracle = raynaud_point_valuations(&d);
    let mut out = String::new();
    for tau in EmbeddingIndex::all(d.f()) {
        let v = raynaud_hodge_tate_coker_degree(&d, tau)?;
        out += &format!("{tau}: v(x) = {} (oracle {})\n", fmt_q(&v), fmt_q(&oracle[tau.index()]));
    }
    let dual = d.dual();
    out += &format!("dual vdelta {:?}\n", dual.vdelta().iter().map(fmt_q).collect::<Vec<_>>());
    Ok(out)
}

#[allow(dead_code)]
fn main() -> mufilt::Result<()> {
    print!("{}", run()?);
    Ok(())
}
