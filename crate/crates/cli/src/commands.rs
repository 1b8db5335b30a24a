use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use pachner_core::chain3d::{build_f2, build_f3, build_f4};
use pachner_core::chain4d::{self, build_f3_4d, build_f4_4d, gauge_transform};
use pachner_core::invariant3d::{lens_table, LENS_TABLE};
use pachner_core::scalars::{parse_scalar, sample_distinct_zetas};
use pachner_core::weights3d::{self, is_consistent, random_consistent_alpha, solve_alpha_move};
use pachner_core::{samples, AlphaSystem, Error, MoveCheck, Triangulation, Vertex, ZetaAssignment};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::report::{CheckRecord, RunReport};
use crate::MoveKind;

/// Malformed or contradictory arguments; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Errors caused by the arguments themselves become usage errors.
fn from_core(e: Error) -> anyhow::Error {
    match e {
        Error::DuplicateZeta(..)
        | Error::ParseScalar(_)
        | Error::LensParameters(_)
        | Error::MissingVertex(_)
        | Error::InconsistentAlpha(_) => usage(e.to_string()),
        other => other.into(),
    }
}

fn parse_zeta(s: &str, expected: Option<usize>) -> anyhow::Result<ZetaAssignment> {
    let z = ZetaAssignment::parse(s).map_err(from_core)?;
    if let Some(n) = expected {
        if z.len() != n {
            return Err(usage(format!("expected {n} zeta values, got {}", z.len())));
        }
    }
    Ok(z)
}

/// `1234=3,1235=-1/2`: one decimal digit per vertex.
fn parse_alpha(s: &str) -> anyhow::Result<AlphaSystem> {
    let mut out = AlphaSystem::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("alpha entry {item:?} is not of the form LABELS=VALUE")))?;
        let labels = key
            .trim()
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as Vertex))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| usage(format!("alpha labels {key:?} must be vertex digits")))?;
        out.set(&labels, parse_scalar(value.trim()).map_err(from_core)?);
    }
    Ok(out)
}

fn alpha_json(a: &AlphaSystem) -> BTreeMap<String, String> {
    a.values
        .iter()
        .map(|(k, v)| (k.iter().map(|x| x.to_string()).collect(), v.to_string()))
        .collect()
}

fn cell_keys(t: &Triangulation) -> BTreeSet<Vec<Vertex>> {
    t.cells().iter().map(|c| c.vertices.clone()).collect()
}

enum AlphaSource {
    Zero,
    Given(AlphaSystem),
    Random(ChaCha8Rng),
}

impl AlphaSource {
    fn system(&mut self, sides: &(Triangulation, Triangulation), z: &ZetaAssignment) -> anyhow::Result<AlphaSystem> {
        let (lhs, rhs) = sides;
        match self {
            Self::Zero => Ok(AlphaSystem::new()),
            Self::Random(rng) => Ok(random_consistent_alpha(lhs, rhs, z, rng)?),
            Self::Given(given) => {
                let left = cell_keys(lhs);
                if given.values.keys().all(|k| left.contains(k)) {
                    return solve_alpha_move(lhs, rhs, z, given).map_err(from_core);
                }
                if !is_consistent(lhs, rhs, z, given)? {
                    return Err(usage(format!(
                        "alpha system is not consistent at zeta {}",
                        z.to_colon_string()
                    )));
                }
                Ok(given.clone())
            }
        }
    }
}

fn move_sides(kind: MoveKind) -> pachner_core::Result<(Triangulation, Triangulation)> {
    match kind {
        MoveKind::TwoThree | MoveKind::TwoThreeDeg4 => weights3d::move_23_sides(),
        MoveKind::OneFour => weights3d::move_14_sides(),
        MoveKind::ThreeThree => chain4d::move_33_sides(),
        MoveKind::TwoFour => chain4d::move_24_sides(),
    }
}

fn run_move(kind: MoveKind, z: &ZetaAssignment, a: &AlphaSystem) -> pachner_core::Result<MoveCheck> {
    match kind {
        MoveKind::TwoThree => weights3d::verify_move_23(z, a),
        MoveKind::OneFour => weights3d::verify_move_14(z, a),
        MoveKind::TwoThreeDeg4 => weights3d::verify_move_23_deg4(z),
        MoveKind::ThreeThree => chain4d::verify_move_33(z, a),
        MoveKind::TwoFour => chain4d::verify_move_24(z, a),
    }
}

pub fn verify(
    kind: MoveKind,
    zeta: Option<&str>,
    random: Option<usize>,
    seed: u64,
    alpha: Option<&str>,
    alpha_random: bool,
) -> anyhow::Result<bool> {
    let start = Instant::now();
    let vertices = match kind {
        MoveKind::ThreeThree | MoveKind::TwoFour => 6,
        _ => 5,
    };
    if kind == MoveKind::TwoThreeDeg4 && (alpha.is_some() || alpha_random) {
        return Err(usage("the degree-4 relation takes no alpha parameters"));
    }
    let zetas = match zeta {
        Some(s) => vec![parse_zeta(s, Some(vertices))?],
        None => {
            let n = random.unwrap_or(1);
            if n == 0 {
                return Err(usage("--random needs at least one sample"));
            }
            (0..n as u64).map(|k| sample_distinct_zetas(vertices, seed.wrapping_add(k))).collect()
        }
    };
    let sides = move_sides(kind)?;
    let mut source = match (alpha, alpha_random) {
        (Some(s), _) => {
            let given = parse_alpha(s)?;
            let known: BTreeSet<_> = cell_keys(&sides.0).union(&cell_keys(&sides.1)).cloned().collect();
            if let Some(bad) = given.values.keys().find(|k| !known.contains(*k)) {
                return Err(usage(format!("{bad:?} is not a cell of the move")));
            }
            AlphaSource::Given(given)
        }
        (None, true) => AlphaSource::Random(ChaCha8Rng::seed_from_u64(seed)),
        (None, false) => AlphaSource::Zero,
    };

    let mut report = RunReport::new("verify");
    report.input("move", format!("{kind:?}"));
    report.input("seed", seed);
    report.input("samples", zetas.len());
    if let Some(s) = alpha {
        report.input("alpha", s);
    }
    report.input("alpha_random", alpha_random);
    for z in &zetas {
        let a = source.system(&sides, z)?;
        let check = run_move(kind, z, &a).map_err(from_core)?;
        let mut rec = CheckRecord::new(format!("{kind:?} at {}", z.to_colon_string()), check.holds())
            .with("zeta", z.to_colon_string())
            .with("lhs_terms", check.lhs.named_terms().len());
        if kind != MoveKind::TwoThreeDeg4 {
            rec = rec.with("alpha", alpha_json(&a));
        }
        if !check.holds() {
            rec.difference = Some(check.difference.named_terms());
        }
        report.push(rec);
    }
    println!("{}", report.to_json());
    eprintln!("{} checks in {:.2?}", report.checks.len(), start.elapsed());
    Ok(report.passed)
}

pub fn lens(p: usize, q: usize, n: usize, zeta: &str, json: bool) -> anyhow::Result<bool> {
    let z = parse_zeta(zeta, Some(4))?;
    let value = lens_table(p, q, n, &z).map_err(from_core)?;
    if json {
        let mut report = RunReport::new("lens");
        for (k, v) in [("p", p), ("q", q), ("n", n)] {
            report.input(k, v);
        }
        report.input("zeta", z.to_colon_string());
        report.push(CheckRecord::new("invariant", true).with("value", value.to_string()));
        println!("{}", report.to_json());
    } else {
        println!("{value}");
    }
    Ok(true)
}

pub fn tables() -> anyhow::Result<bool> {
    let mut ok = true;
    println!("p,q,n,zeta,value");
    for (p, q, n, zeta, expected) in LENS_TABLE {
        let z = ZetaAssignment::from_ints(&zeta)?;
        let value = lens_table(p, q, n, &z)?;
        println!("{p},{q},{n},{},{value}", z.to_colon_string());
        if value != pachner_core::scalars::int(expected) {
            eprintln!("L({p},{q}) n={n}: expected {expected}, got {value}");
            ok = false;
        }
    }
    Ok(ok)
}

fn zeta_for(t: &Triangulation, zeta: Option<&str>, seed: u64) -> anyhow::Result<ZetaAssignment> {
    let labels = t.vertex_labels();
    let z = match zeta {
        Some(s) => parse_zeta(s, None)?,
        None => {
            let s = sample_distinct_zetas(labels.len(), seed);
            let values = labels
                .iter()
                .enumerate()
                .map(|(k, &v)| Ok((v, s.get(k as Vertex + 1)?.clone())))
                .collect::<pachner_core::Result<BTreeMap<_, _>>>()?;
            ZetaAssignment::new(values)?
        }
    };
    if let Some(v) = labels.iter().find(|&&v| z.get(v).is_err()) {
        return Err(usage(format!("no zeta value for vertex {v}")));
    }
    Ok(z)
}

pub fn check_complex(input: &Path, zeta: Option<&str>, seed: u64) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let t = Triangulation::from_json(&text).with_context(|| format!("{} is not a valid triangulation", input.display()))?;
    let z = zeta_for(&t, zeta, seed)?;

    let mut report = RunReport::new("check-complex");
    report.input("input", input.display().to_string());
    report.input("zeta", z.to_colon_string());
    report.input("dimension", t.dimension());
    report.input("cells", t.cells().len());
    report.input("consistently_oriented", t.is_consistently_oriented());
    let zero = |name: &str, a: &pachner_core::Matrix, b: &pachner_core::Matrix| -> anyhow::Result<CheckRecord> {
        let prod = a.mul(b)?;
        Ok(CheckRecord::new(name, prod.is_zero()).with("shape", [prod.rows(), prod.cols()]))
    };
    match t.dimension() {
        3 => {
            let (f2, f3, f4) = (build_f2(&t, &z)?, build_f3(&t, &z)?, build_f4(&t, &z)?);
            report.push(zero("f3 f2 = 0", &f3, &f2)?);
            report.push(zero("f4 f3 = 0", &f4, &f3)?);
        }
        4 => {
            let (f3, f4) = (build_f3_4d(&t, &z)?, build_f4_4d(&t, &z)?);
            report.push(zero("f4 f3 = 0", &f4, &f3)?);
            let (g3, g4) = gauge_transform(&t, &z, &f3, &f4)?;
            report.push(zero("gauged f4 f3 = 0", &g4, &g3)?);
        }
        d => anyhow::bail!("dimension {d} is not supported"),
    }
    println!("{}", report.to_json());
    Ok(report.passed)
}

fn sample(name: &str) -> anyhow::Result<Triangulation> {
    let nums = |rest: &str| -> Option<Vec<usize>> { rest.split('-').map(|x| x.parse().ok()).collect() };
    let t = match name {
        "tetrahedron" => samples::single_tetrahedron(),
        "glued-pair" => samples::glued_pair(),
        "three-around-edge" => samples::three_around_edge(),
        "cone" => samples::cone(),
        "double-cone" => samples::double_cone(),
        "3-3-left" => chain4d::move_33_sides().map(|s| s.0),
        "3-3-right" => chain4d::move_33_sides().map(|s| s.1),
        "2-4-left" => chain4d::move_24_sides().map(|s| s.0),
        "2-4-right" => chain4d::move_24_sides().map(|s| s.1),
        _ => {
            if let Some(n) = name.strip_prefix("strip-").and_then(|r| r.parse().ok()) {
                samples::strip(n)
            } else if let Some(v) = name.strip_prefix("lens-").and_then(|r| nums(&r.replace("-minus-", "-"))) {
                match v[..] {
                    [p, q] => pachner_core::triangulation::build_lens(p, q),
                    [p, q, n] => samples::lens_minus_chain(p, q, n),
                    _ => return Err(usage(format!("unknown sample {name:?}"))),
                }
            } else {
                return Err(usage(format!("unknown sample {name:?}")));
            }
        }
    };
    t.map_err(from_core)
}

pub fn export(name: &str, output: Option<&Path>) -> anyhow::Result<bool> {
    let json = sample(name)?.to_json();
    match output {
        Some(path) => std::fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    Ok(true)
}
