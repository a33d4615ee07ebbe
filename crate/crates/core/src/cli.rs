//! Command-line front end. [`run_command`] does all the work so it can be
//! driven from tests; `main` only forwards the process arguments.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group_models::{
    enum_cap_from_env, enumerate_split_subgroups, raynaud_degrees, raynaud_hodge_tate_coker_degree,
    raynaud_point_valuations, FiniteOModuleDesc, LTProductGroup, RaynaudDatum,
};
use crate::hn::{hn_from_lattice, DegreeWeighting, HNResult, SubobjectLattice};
use crate::lt_crystals::{lts_report, LTSModel};
use crate::periods::{
    d_matrix, faltings_margin, mod_fil1_valuation, mod_p_filp_valuation, multiplication_map, t_decomposition_check,
    FaltingsMargin, MultiplicationMap,
};
use crate::polygon::{hn_mu_ordinary_tau, hodge_polygon, lies_above, renormalize, reversed_hodge, Dominance};
use crate::rational::Q;
use crate::report::{analyze, to_canonical_json, PolygonSet, TauPolygon};
use crate::signature::{EmbeddingIndex, Signature};
use crate::svg::{render, Series};
use crate::tower::HasseInput;
use crate::verify::{run_suite, SuiteOutcome, SUITES};

#[derive(Parser, Debug)]
#[command(name = "mufilt", version, about = "Canonical filtrations of mu-ordinary p-divisible O-modules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Signature literal, e.g. '{f:2,p:7,h:3,q:[1,2]}'.
    #[arg(long)]
    sig: Option<String>,
    /// Hasse valuations: a rational, a list, or a map such as '{tau2:"1/100"}'.
    #[arg(long)]
    ha: Option<String>,
    /// Truncation level.
    #[arg(long, default_value_t = 1)]
    n: u64,
    /// One-based embedding label: 2, tau2 or τ2.
    #[arg(long)]
    tau: Option<String>,
    /// Write an SVG plot to this path ('-' for standard output).
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Emit JSON (the default; kept for explicitness).
    #[arg(long)]
    json: bool,
    /// Add decimal approximations, marked as such.
    #[arg(long)]
    human: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full report: constants, thresholds, polygons, tower bounds, certificates.
    Analyze(Common),
    /// Hodge, reversed Hodge and τ-weighted HN polygons.
    Polygons(Common),
    /// HN filtration over the split lattice of the mu-ordinary model, or a lattice file.
    Hn {
        #[command(flatten)]
        common: Common,
        /// JSON lattice `{"nodes":[...],"containment":[[i,j],...]}`.
        #[arg(long)]
        lattice: Option<PathBuf>,
    },
    /// Degrees and Hodge-Tate data of a Raynaud scheme.
    Raynaud {
        #[command(flatten)]
        common: Common,
        /// Datum literal, e.g. '{f:2,p:5,vdelta:["1/2","1/4"]}'.
        #[arg(long)]
        datum: String,
    },
    /// Period multiplication maps and their valuations.
    Periods(Common),
    /// Explicit crystal of LT_S.
    Lts {
        #[command(flatten)]
        common: Common,
        /// Model literal, e.g. '{f:2,p:5,S:[0],tau0:1}'.
        #[arg(long)]
        model: String,
    },
    /// Run property sweeps.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suite name or 'all'.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 1 on usage or validation errors, 2 on
/// internal invariant breaches.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_internal() {
                2
            } else {
                1
            }
        }
    }
}

fn require_sig(c: &Common) -> Result<Signature> {
    let text = c.sig.as_deref().ok_or_else(|| Error::Parse("missing required flag --sig".into()))?;
    Signature::parse(text).map_err(|e| with_flag("--sig", e))
}

fn with_flag(flag: &str, e: Error) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{flag}: {m}")),
        Error::InvalidSignature(m) => Error::InvalidSignature(format!("{flag}: {m}")),
        other if other.is_internal() => other,
        other => Error::Parse(format!("{flag}: {other}")),
    }
}

fn parse_tau(sig: &Signature, c: &Common) -> Result<Option<EmbeddingIndex>> {
    let Some(raw) = c.tau.as_deref() else { return Ok(None) };
    let label = raw.trim().trim_start_matches("tau").trim_start_matches('τ');
    let i: usize = label.parse().map_err(|_| Error::Parse(format!("--tau: expected a label like 2 or tau2, got {raw:?}")))?;
    if i == 0 {
        return Err(Error::Parse("--tau: labels start at 1".into()));
    }
    sig.tau(i - 1).map(Some)
}

fn parse_ha(sig: &Signature, c: &Common) -> Result<HasseInput> {
    match c.ha.as_deref() {
        None => Ok(HasseInput::zero(sig.f())),
        Some(text) => HasseInput::parse(sig, text).map_err(|e| with_flag("--ha", e)),
    }
}

fn check_n(c: &Common) -> Result<()> {
    if c.n == 0 {
        return Err(Error::Parse("--n: level must be at least 1".into()));
    }
    Ok(())
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<i32> {
    let text = to_canonical_json(value)?;
    out.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
    Ok(0)
}

fn write_svg(path: &PathBuf, svg: &str, out: &mut dyn Write) -> Result<bool> {
    if path.as_os_str() == "-" {
        out.write_all(svg.as_bytes()).map_err(|e| Error::Io(e.to_string()))?;
        return Ok(true);
    }
    std::fs::write(path, svg).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(false)
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Analyze(c) => {
            let sig = require_sig(&c)?;
            check_n(&c)?;
            let tau = parse_tau(&sig, &c)?;
            let ha = parse_ha(&sig, &c)?;
            emit(out, &analyze(&sig, &ha, c.n, tau, c.human)?)
        }
        Command::Polygons(c) => polygons(&c, out),
        Command::Hn { common, lattice } => hn(&common, lattice.as_ref(), out),
        Command::Raynaud { datum, .. } => raynaud(&datum, out),
        Command::Periods(c) => periods(&c, out),
        Command::Lts { model, .. } => {
            let m = LTSModel::parse(&model).map_err(|e| with_flag("--model", e))?;
            emit(out, &lts_report(&m)?)
        }
        Command::Verify { suite, .. } => verify(&suite, out),
    }
}

#[derive(Serialize)]
struct PolygonsOut {
    signature: Signature,
    polygons: PolygonSet,
    /// Reversed Hodge lies on or above Hodge.
    dominance: Dominance,
}

fn polygons(c: &Common, out: &mut dyn Write) -> Result<i32> {
    let sig = require_sig(c)?;
    let tau = parse_tau(&sig, c)?;
    let taus: Vec<EmbeddingIndex> = match tau {
        Some(t) => vec![t],
        None => sig.embeddings().collect(),
    };
    let hn_tau = taus
        .iter()
        .map(|&t| Ok(TauPolygon { tau: t.index(), polygon: hn_mu_ordinary_tau(&sig, t)? }))
        .collect::<Result<Vec<_>>>()?;
    let set = PolygonSet { hodge: hodge_polygon(&sig), reversed_hodge: reversed_hodge(&sig), hn_tau };
    let dominance = lies_above(&set.reversed_hodge, &set.hodge)?;
    let mut svg_on_stdout = false;
    if let Some(path) = &c.svg {
        let mut series = vec![
            Series { label: "hodge".into(), polygon: &set.hodge },
            Series { label: "reversed_hodge".into(), polygon: &set.reversed_hodge },
        ];
        if let Some(t) = tau {
            series.push(Series { label: format!("hn_{t} (scaled by 1/f)"), polygon: &set.hn_tau[0].polygon });
        }
        svg_on_stdout = write_svg(path, &render(&sig.to_string(), &series), out)?;
    }
    if svg_on_stdout {
        if c.json {
            return Err(Error::Parse("--json cannot share standard output with --svg -".into()));
        }
        return Ok(0);
    }
    emit(out, &PolygonsOut { signature: sig, polygons: set, dominance })
}

#[derive(Serialize)]
struct HnOut {
    weighting: String,
    n: u64,
    nodes: usize,
    result: HNResult,
    /// Comparison with the closed form, when the lattice is the split one.
    matches_closed_form: Option<bool>,
}

fn hn(c: &Common, lattice: Option<&PathBuf>, out: &mut dyn Write) -> Result<i32> {
    let sig = require_sig(c)?;
    check_n(c)?;
    let tau = parse_tau(&sig, c)?;
    let w = match tau {
        Some(t) => DegreeWeighting::tau(sig.p(), t),
        None => DegreeWeighting::classical(sig.p(), sig.f()),
    };
    let (lat, split) = match lattice {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            (SubobjectLattice::from_json(&text).map_err(|e| with_flag("--lattice", e))?, false)
        }
        None => {
            let g = LTProductGroup::mu_ordinary(&sig, c.n);
            (SubobjectLattice::from_split(&enumerate_split_subgroups(&g, enum_cap_from_env()?)?), true)
        }
    };
    let result = hn_from_lattice(&lat, &w)?;
    let matches_closed_form = if split {
        let got = renormalize(&result.polygon, c.n)?;
        let expected = match tau {
            Some(t) => hn_mu_ordinary_tau(&sig, t)?.scale_values(&Q::from_integer(sig.f().into()))?,
            None => reversed_hodge(&sig).scale_values(&Q::from_integer(sig.f().into()))?,
        };
        Some(got == expected)
    } else {
        None
    };
    let weighting = tau.map_or("classical".to_string(), |t| t.to_string());
    emit(out, &HnOut { weighting, n: c.n, nodes: lat.nodes().len(), result, matches_closed_form })
}

#[derive(Serialize)]
struct RaynaudOut {
    datum: RaynaudDatum,
    degrees: FiniteOModuleDesc,
    #[serde(with = "crate::rational::serde_qvec")]
    point_valuations: Vec<Q>,
    #[serde(with = "crate::rational::serde_qvec")]
    hodge_tate_coker: Vec<Q>,
    dual: RaynaudDatum,
}

fn raynaud(text: &str, out: &mut dyn Write) -> Result<i32> {
    let d = RaynaudDatum::parse(text).map_err(|e| with_flag("--datum", e))?;
    let coker = EmbeddingIndex::all(d.f())
        .map(|t| raynaud_hodge_tate_coker_degree(&d, t))
        .collect::<Result<Vec<_>>>()?;
    emit(
        out,
        &RaynaudOut {
            degrees: raynaud_degrees(&d),
            point_valuations: raynaud_point_valuations(&d),
            hodge_tate_coker: coker,
            dual: d.dual(),
            datum: d,
        },
    )
}

#[derive(Serialize)]
struct PeriodEntry {
    tau: usize,
    multiplication: MultiplicationMap,
    #[serde(with = "crate::rational::serde_q")]
    mod_fil1_valuation: Q,
    #[serde(with = "crate::rational::serde_q")]
    mod_p_filp_valuation: Q,
    d_exponents: Vec<u64>,
    faltings: FaltingsMargin,
}

#[derive(Serialize)]
struct PeriodsOut {
    signature: Signature,
    t_decomposition_ok: bool,
    entries: Vec<PeriodEntry>,
}

fn periods(c: &Common, out: &mut dyn Write) -> Result<i32> {
    let sig = require_sig(c)?;
    let taus = match parse_tau(&sig, c)? {
        Some(t) => {
            sig.check_tau(t)?;
            vec![t]
        }
        None => sig.active_embeddings(),
    };
    let entries = taus
        .into_iter()
        .map(|t| {
            Ok(PeriodEntry {
                tau: t.index(),
                multiplication: multiplication_map(&sig, t)?,
                mod_fil1_valuation: mod_fil1_valuation(&sig, t)?,
                mod_p_filp_valuation: mod_p_filp_valuation(&sig, t)?,
                d_exponents: d_matrix(&sig, t)?,
                faltings: faltings_margin(&sig, t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    emit(out, &PeriodsOut { t_decomposition_ok: t_decomposition_check(sig.f(), sig.p()), signature: sig, entries })
}

#[derive(Serialize)]
struct VerifyOut {
    passed: bool,
    suites: Vec<SuiteOutcome>,
}

fn verify(suite: &str, out: &mut dyn Write) -> Result<i32> {
    let cap = enum_cap_from_env()?;
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    if let Some(bad) = names.iter().find(|n| !SUITES.contains(n)) {
        return Err(Error::Parse(format!("--suite: unknown suite {bad:?}; expected one of {} or all", SUITES.join(", "))));
    }
    let suites = names.into_iter().map(|n| run_suite(n, cap)).collect::<Result<Vec<_>>>()?;
    let passed = suites.iter().all(|s| s.passed);
    emit(out, &VerifyOut { passed, suites })?;
    Ok(if passed { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("mufilt").chain(args.iter().copied());
        let code = run_command(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(&["--help"]).0, 0);
        assert_eq!(run(&["--version"]).0, 0);
        assert_eq!(run(&["bogus"]).0, 1);
        let (code, _, err) = run(&["analyze"]);
        assert_eq!(code, 1);
        assert!(err.contains("--sig"));
        let (code, _, err) = run(&["analyze", "--sig", "{f:2,p:6,h:3,q:[1,2]}"]);
        assert_eq!(code, 1);
        assert!(err.contains("--sig"));
        assert_eq!(run(&["analyze", "--sig", "{f:2,p:7,h:3,q:[1,2]}", "--n", "0"]).0, 1);
        assert_eq!(run(&["analyze", "--sig", "{f:2,p:7,h:3,q:[1,2]}", "--tau", "3"]).0, 1);
    }

    #[test]
    fn analyze_reference() {
        let (code, out, _) = run(&["analyze", "--sig", "{f:2,p:7,h:3,q:[1,2]}", "--ha", "1/100", "--n", "2"]);
        assert_eq!(code, 0);
        assert!(out.contains("23,\n") && out.contains("2352"));
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["constants"]["K"][1], serde_json::json!([7, 48]));
    }

    #[test]
    fn polygons_svg_to_stdout() {
        let (code, out, _) = run(&["polygons", "--sig", "{f:2,p:7,h:3,q:[1,2]}", "--svg", "-"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("<svg"));
        assert_eq!(run(&["polygons", "--sig", "{f:2,p:7,h:3,q:[1,2]}", "--svg", "-", "--json"]).0, 1);
    }

    #[test]
    fn other_commands() {
        let (code, out, _) = run(&["hn", "--sig", "{f:2,p:7,h:3,q:[1,2]}", "--tau", "tau2"]);
        assert_eq!(code, 0);
        assert!(out.contains("\"matches_closed_form\": true"));
        assert_eq!(run(&["raynaud", "--datum", "{f:2,p:5,vdelta:[\"1/2\",\"1/4\"]}"]).0, 0);
        assert_eq!(run(&["periods", "--sig", "{f:2,p:7,h:3,q:[1,2]}", "--tau", "2"]).0, 0);
        assert_eq!(run(&["lts", "--model", "{f:2,p:5,S:[0],tau0:1}"]).0, 0);
        assert_eq!(run(&["lts", "--model", "{f:2,p:5,S:[0],tau0:0}"]).0, 1);
        assert_eq!(run(&["verify", "--suite", "constants"]).0, 0);
        assert_eq!(run(&["verify", "--suite", "nope"]).0, 1);
    }
}
