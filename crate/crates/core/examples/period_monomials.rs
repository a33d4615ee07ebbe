//! Period monomials: the cyclotomic period `t`, the multiplication map and
//! its valuation.

use mufilt::periods::{cyclotomic_period, faltings_margin, multiplication_map, t_decomposition_check};
use mufilt::rational::fmt_q;
use mufilt::Signature;

pub fn run() -> mufilt::Result<String> {
    let t = cyclotomic_period(3);
    let mut out = format!("t = {t}, v(t) at p=7: {}\n", fmt_q(&t.valuation(7)?));
    out += &format!("t decomposition ok: {}\n", t_decomposition_check(3, 7));
    let sig = Signature::parse("{f:2,p:7,h:3,q:[1,2]}")?;
    for tau in sig.active_embeddings() {
        let m = multiplication_map(&sig, tau)?;
        let fm = faltings_margin(&sig, tau)?;
        out += &format!("{tau}: K = {}, transport {}, margin {}\n", fmt_q(&m.k_value), m.transport_ok, fmt_q(&fm.value));
        for (i, c) in m.coeffs.entries().iter().enumerate() {
            out += &format!("  slot τ{}: {c}\n", i + 1);
        }
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> mufilt::Result<()> {
    print!("{}", run()?);
    Ok(())
}
