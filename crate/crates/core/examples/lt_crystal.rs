//! The crystal of `LT_S`: Frobenius exponents, the generator of the Tate
//! module and the checks `Φ(T_0) = p T_0`.

use mufilt::lt_crystals::{lts_report, LTSModel};
use mufilt::rational::fmt_q;

pub fn run() -> mufilt::Result<String> {
    let mut out = String::new();
    for lit in ["{f:2,p:5,S:[0],tau0:1}", "{f:4,p:3,S:[0,2],tau0:1}", "{f:3,p:2,S:[],tau0:0}"] {
        let r = lts_report(&LTSModel::parse(lit)?)?;
        out += &format!("{lit}: exps {:?}, eigen {}, fil {}, v = {} < {}, #solutions {}\n",
            r.frobenius_exponents, r.eigen_ok, r.fil_pattern_ok,
            fmt_q(&r.generator_valuation), fmt_q(&r.valuation_bound), r.solution_count);
        for (i, m) in r.generator.entries().iter().enumerate() {
            out += &format!("  τ{}: {m}\n", i + 1);
        }
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> mufilt::Result<()> {
    print!("{}", run()?);
    Ok(())
}
