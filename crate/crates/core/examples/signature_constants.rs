//! Scalar constants, Hasse thresholds and the μ-ordinary decomposition of a signature.

use mufilt::rational::fmt_q;
use mufilt::signature::{constants, hasse_threshold, mu_ordinary_decomposition, prime_admissible};
use mufilt::Signature;

pub fn run() -> mufilt::Result<String> {
    let sig = Signature::parse("{f:2,p:7,h:3,q:[1,2]}")?;
    let c = constants(&sig);
    let mut out = format!("signature {sig}\n");
    for tau in sig.embeddings() {
        let i = tau.index();
        out += &format!("{tau}: k={} K={} r={} n={}\n", c.k[i], fmt_q(&c.big_k[i]), c.r[i], c.n_tau[i]);
    }
    for tau in sig.active_embeddings() {
        for n in 1..=2 {
            out += &format!("threshold {tau} n={n}: {}\n", fmt_q(&hasse_threshold(&sig, tau, n)?));
        }
    }
    for x in mu_ordinary_decomposition(&sig) {
        out += &format!("factor LT_{}^{}\n", x.set, x.mult);
    }
    out += &format!("admissible: {}\n", prime_admissible(&sig).admissible);
    Ok(out)
}

#[allow(dead_code)]
fn main() -> mufilt::Result<()> {
    print!("{}", run()?);
    Ok(())
}
