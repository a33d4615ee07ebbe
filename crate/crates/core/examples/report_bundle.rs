//! The combined JSON report, as printed by `mufilt analyze`.

use mufilt::report::{analyze, parse_bundle, to_canonical_json};
use mufilt::tower::HasseInput;
use mufilt::Signature;

pub fn run() -> mufilt::Result<String> {
    let sig = Signature::parse("{f:2,p:7,h:3,q:[1,2]}")?;
    let ha = HasseInput::parse(&sig, "1/100")?;
    let bundle = analyze(&sig, &ha, 2, None, true)?;
    let text = to_canonical_json(&bundle)?;
    let back = parse_bundle(&text)?;
    Ok(format!("{} bytes, round trip {}\n{}", text.len(), back == bundle, &text[..text.len().min(400)]))
}

#[allow(dead_code)]
fn main() -> mufilt::Result<()> {
    print!("{}", run()?);
    Ok(())
}
