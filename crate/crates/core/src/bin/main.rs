//! Command-line front end: constructions, duality, searches, audits, and
//! the named-check verification suite. Every command emits a JSON report
//! enveloped with q, crate version, and provenance; exit codes are 0 on
//! success, 1 when an asserted property fails, 2 on usage or input errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use kakeya_lab::collinear::CollinearStructure;
use kakeya_lab::field::{make_field, Field};
use kakeya_lab::kakeya::{
    best_primalize, build_cover, conjectured_minimum, parabola_construction, primalize,
    theorem_lower_bound, BesicovitchCover,
};
use kakeya_lab::permgraph::{
    classify_indices, inverse_construction, random_semipermutation, verify_point_identities,
    GraphKind,
};
use kakeya_lab::plane::Slope;
use kakeya_lab::report::{envelope, to_json, REPORT_JSON_SCHEMA};
use kakeya_lab::search::{
    all_permutation_tables, bound_audit, bound_audit_cover, for_each_permutation_representative,
    isolated_edge_probe, matching_bound_holds, max_isolated_matching_extremes, min_besicovitch,
    min_triples_over_permutations, SearchError, SearchMode,
};

const WORKERS_ENV: &str = "KAKEYA_LAB_WORKERS";

#[derive(Parser)]
#[command(
    name = "kakeya-lab",
    version,
    about = "Exact searches and verifications for line covers and collinear triples over GF(q)"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify a permutation/semipermutation table or a cover file
    Verify {
        #[arg(long)]
        q: u64,
        /// Function table: JSON integer array or one whitespace-separated line
        #[arg(long, conflicts_with = "cover")]
        perm: Option<PathBuf>,
        /// Cover file: JSON map of slope index (or "inf") to line key
        #[arg(long)]
        cover: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Emit a named construction
    Construct {
        #[arg(long, value_enum)]
        what: Construction,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Normalize a cover with R <= 1 and emit its dual function table
    Dualize {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build the dual cover of a function graph
    Primalize {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        perm: PathBuf,
        /// Key of the vertical line; omitted means the size-minimizing choice
        #[arg(long)]
        vertical_key: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a symmetry-reduced search
    Search {
        #[arg(long, value_enum)]
        objective: Objective,
        #[arg(long)]
        q: u64,
        /// Exhaustive over the reduced space (default when no --sample)
        #[arg(long)]
        exhaustive: bool,
        /// Random sample count (seeded, non-exhaustive)
        #[arg(long, conflicts_with = "exhaustive")]
        sample: Option<u64>,
        /// Node budget; exceeding it flags the report non-exhaustive
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: KAKEYA_LAB_WORKERS or all cores)
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Audit the inequality chain on a graph or cover
    Audit {
        #[arg(long)]
        q: u64,
        #[arg(long, conflicts_with = "cover")]
        perm: Option<PathBuf>,
        #[arg(long)]
        cover: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run every named invariant check for a given q
    Suite {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the versioned JSON schema for all report types
    Schema,
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    /// Graph of j -> 1/j (0 -> 0)
    InversePerm,
    /// Tangent lines of a parabola plus the cheapest vertical
    Parabola,
}

#[derive(Clone, Copy, ValueEnum)]
enum Objective {
    Triples,
    Besicovitch,
    IsolatedEdge,
    MaxIsolatedMatching,
}

enum CliError {
    /// Bad invocation or unreadable/invalid input: exit 2.
    Usage(String),
    /// An asserted property failed; carries a structured report: exit 1.
    Violation(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command_line: Vec<String> = std::env::args().skip(1).collect();
    match run(cli.cmd, command_line.join(" ")) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Violation(report)) => {
            println!("{report}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn field_for(q: u64) -> Result<Field, CliError> {
    make_field(q).map_err(|e| CliError::Usage(e.to_string()))
}

fn read_table(path: &Path, q: usize) -> Result<Vec<usize>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let table: Vec<usize> = if let Ok(v) = serde_json::from_str::<Vec<usize>>(&text) {
        v
    } else {
        text.split_whitespace()
            .map(|t| {
                t.parse()
                    .map_err(|_| CliError::Usage(format!("bad table entry {t:?}")))
            })
            .collect::<Result<_, _>>()?
    };
    if table.len() != q || table.iter().any(|&v| v >= q) {
        return Err(CliError::Usage(format!(
            "table must hold {q} values in 0..{q}"
        )));
    }
    Ok(table)
}

fn read_cover_keys(path: &Path, q: usize) -> Result<Vec<usize>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let map: BTreeMap<String, usize> = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut keys = vec![usize::MAX; q + 1];
    for (slope, key) in map {
        let idx = if slope == "inf" {
            q
        } else {
            slope
                .parse::<usize>()
                .ok()
                .filter(|&m| m < q)
                .ok_or_else(|| CliError::Usage(format!("bad slope {slope:?}")))?
        };
        if key >= q {
            return Err(CliError::Usage(format!("key {key} out of range for q={q}")));
        }
        keys[idx] = key;
    }
    if keys.contains(&usize::MAX) {
        return Err(CliError::Usage(format!(
            "cover file must assign a key to all {} slopes",
            q + 1
        )));
    }
    Ok(keys)
}

fn cover_keys_json(keys: &[usize]) -> serde_json::Value {
    let q = keys.len() - 1;
    let mut map = serde_json::Map::new();
    for (idx, &key) in keys.iter().enumerate() {
        let name = if idx == q { "inf".into() } else { idx.to_string() };
        map.insert(name, json!(key));
    }
    serde_json::Value::Object(map)
}

fn slope_json(slope: Slope, q: usize) -> serde_json::Value {
    match slope {
        Slope::Finite(_) => json!(slope.index(q)),
        Slope::Infinity => json!("inf"),
    }
}

fn structure_json(s: &CollinearStructure) -> serde_json::Value {
    let f = s.field();
    let q = f.q();
    json!({
        "q": q,
        "points": s.point_set().points(f)
            .map(|p| json!([p.x.index(), p.y.index()]))
            .collect::<Vec<_>>(),
        "maximal_sets": s.maximal_sets().iter().map(|e| json!({
            "slope": slope_json(e.line.slope, q),
            "points": e.points.iter()
                .map(|&pk| json!([pk as usize / q, pk as usize % q]))
                .collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "triple_count": s.triple_count(),
        "norm": format!("{}/{}", s.norm().numer(), s.norm().denom()),
    })
}

fn cover_json(cover: &BesicovitchCover) -> Result<serde_json::Value, CliError> {
    let inc = cover
        .incidence_size()
        .map_err(|e| CliError::Violation(e.to_string()))?;
    Ok(json!({
        "keys": cover_keys_json(&cover.keys()),
        "size": cover.size(),
        "incidence": {
            "direct": inc.direct,
            "base": inc.base,
            "excess": inc.excess,
        },
        "rho": cover.rho(),
        "r": cover.r(),
    }))
}

fn kind_json(kind: GraphKind) -> serde_json::Value {
    match kind {
        GraphKind::Permutation => json!({"kind": "permutation"}),
        GraphKind::Semipermutation { a, b, z1, z2 } => json!({
            "kind": "semipermutation",
            "doubled_value": a.index(),
            "missing_value": b.index(),
            "doubled_points": [z1.index(), z2.index()],
        }),
        GraphKind::Other => json!({"kind": "other"}),
    }
}

fn emit(
    q: u64,
    command: String,
    seed: Option<u64>,
    payload: serde_json::Value,
    output: Option<&Path>,
    ok: bool,
) -> Result<(), CliError> {
    let text = to_json(&envelope(q, command, seed, payload));
    if let Some(path) = output {
        std::fs::write(path, &text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    if ok {
        println!("{text}");
        Ok(())
    } else {
        Err(CliError::Violation(text))
    }
}

fn workers_or_env(workers: Option<usize>) -> Option<usize> {
    workers.or_else(|| {
        std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

fn run(cmd: Cmd, command_line: String) -> Result<(), CliError> {
    match cmd {
        Cmd::Schema => {
            println!("{REPORT_JSON_SCHEMA}");
            Ok(())
        }

        Cmd::Verify {
            q,
            perm,
            cover,
            output,
        } => {
            let f = field_for(q)?;
            match (perm, cover) {
                (Some(path), None) => {
                    let table = read_table(&path, f.q())?;
                    let g = classify_indices(&f, &table)
                        .map_err(|e| CliError::Usage(e.to_string()))?;
                    let payload = match verify_point_identities(&g) {
                        Ok(report) => {
                            let ok = report.ok();
                            let payload = json!({
                                "table": table,
                                "classification": kind_json(g.kind()),
                                "identities": report,
                                "structure": structure_json(&g.structure()),
                            });
                            return emit(q, command_line, None, payload, output.as_deref(), ok);
                        }
                        Err(e) => json!({
                            "table": table,
                            "classification": kind_json(g.kind()),
                            "error": e.to_string(),
                        }),
                    };
                    emit(q, command_line, None, payload, output.as_deref(), false)
                }
                (None, Some(path)) => {
                    let keys = read_cover_keys(&path, f.q())?;
                    let cover =
                        build_cover(&f, &keys).map_err(|e| CliError::Usage(e.to_string()))?;
                    let rho_ok = cover.check_rho_zero().is_ok();
                    let payload = json!({
                        "cover": cover_json(&cover)?,
                        "rho_zero_slopes_at_most_one": rho_ok,
                    });
                    emit(q, command_line, None, payload, output.as_deref(), rho_ok)
                }
                _ => Err(CliError::Usage(
                    "verify needs exactly one of --perm or --cover".into(),
                )),
            }
        }

        Cmd::Construct { what, q, output } => {
            let f = field_for(q)?;
            let payload = match what {
                Construction::InversePerm => {
                    let g = inverse_construction(&f);
                    json!({
                        "construction": "inverse-perm",
                        "table": g.table_indices(),
                        "triple_count": g.structure().triple_count(),
                    })
                }
                Construction::Parabola => {
                    let cover = parabola_construction(&f);
                    json!({
                        "construction": "parabola",
                        "cover": cover_json(&cover)?,
                        "conjectured_minimum": conjectured_minimum(q),
                    })
                }
            };
            emit(q, command_line, None, payload, output.as_deref(), true)
        }

        Cmd::Dualize { q, cover, output } => {
            let f = field_for(q)?;
            let keys = read_cover_keys(&cover, f.q())?;
            let c = build_cover(&f, &keys).map_err(|e| CliError::Usage(e.to_string()))?;
            let (g, r) = c
                .normalize_and_dualize()
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let payload = json!({
                "table": g.table_indices(),
                "classification": kind_json(g.kind()),
                "r": r,
                "cover_size": c.size(),
                "graph_norm": format!("{}/{}", g.structure().norm().numer(),
                                      g.structure().norm().denom()),
            });
            emit(q, command_line, None, payload, output.as_deref(), true)
        }

        Cmd::Primalize {
            q,
            perm,
            vertical_key,
            output,
        } => {
            let f = field_for(q)?;
            let table = read_table(&perm, f.q())?;
            let g = classify_indices(&f, &table).map_err(|e| CliError::Usage(e.to_string()))?;
            let (cover, key) = match vertical_key {
                Some(k) => {
                    if k >= f.q() {
                        return Err(CliError::Usage(format!("vertical key {k} out of range")));
                    }
                    let c = primalize(&g, f.element(k))
                        .map_err(|e| CliError::Usage(e.to_string()))?;
                    (c, k)
                }
                None => {
                    let (c, k) =
                        best_primalize(&g).map_err(|e| CliError::Usage(e.to_string()))?;
                    (c, k.index())
                }
            };
            let payload = json!({
                "cover": cover_json(&cover)?,
                "vertical_key": key,
            });
            emit(q, command_line, None, payload, output.as_deref(), true)
        }

        Cmd::Search {
            objective,
            q,
            exhaustive: _,
            sample,
            budget,
            seed,
            workers,
            output,
        } => {
            let f = field_for(q)?;
            let workers = workers_or_env(workers);
            let mode = match (sample, budget) {
                (Some(samples), _) => SearchMode::Sampled {
                    samples,
                    seed: seed.unwrap_or(0),
                },
                (None, Some(max_nodes)) => SearchMode::Budgeted { max_nodes },
                (None, None) => SearchMode::Exhaustive,
            };
            let result = match objective {
                Objective::Triples => min_triples_over_permutations(&f, mode, workers),
                Objective::Besicovitch => min_besicovitch(&f, mode, workers),
                Objective::IsolatedEdge => isolated_edge_probe(&f, workers),
                Objective::MaxIsolatedMatching => max_isolated_matching_extremes(&f, workers),
            };
            match result {
                Ok(report) => {
                    let payload = serde_json::to_value(&report).expect("report");
                    emit(q, command_line, report.seed, payload, output.as_deref(), true)
                }
                Err(e @ SearchError::PropertyViolated(_)) => emit(
                    q,
                    command_line,
                    seed,
                    json!({"violation": e.to_string()}),
                    output.as_deref(),
                    false,
                ),
                Err(e) => Err(CliError::Usage(e.to_string())),
            }
        }

        Cmd::Audit {
            q,
            perm,
            cover,
            output,
        } => {
            let f = field_for(q)?;
            let report = match (perm, cover) {
                (Some(path), None) => {
                    let table = read_table(&path, f.q())?;
                    let g = classify_indices(&f, &table)
                        .map_err(|e| CliError::Usage(e.to_string()))?;
                    bound_audit(&g).map_err(|e| CliError::Usage(e.to_string()))?
                }
                (None, Some(path)) => {
                    let keys = read_cover_keys(&path, f.q())?;
                    let c = build_cover(&f, &keys).map_err(|e| CliError::Usage(e.to_string()))?;
                    bound_audit_cover(&c).map_err(|e| CliError::Usage(e.to_string()))?
                }
                _ => {
                    return Err(CliError::Usage(
                        "audit needs exactly one of --perm or --cover".into(),
                    ))
                }
            };
            let ok = report.ok();
            let payload = serde_json::to_value(&report).expect("report");
            emit(q, command_line, None, payload, output.as_deref(), ok)
        }

        Cmd::Suite { q, workers, output } => {
            let f = field_for(q)?;
            let workers = workers_or_env(workers);
            let results = run_suite(&f, workers);
            let all_ok = results.iter().all(|(_, r)| !matches!(r, CheckResult::Fail(_)));
            for (name, r) in &results {
                match r {
                    CheckResult::Pass => println!("PASS {name}"),
                    CheckResult::Skip(why) => println!("SKIP {name} ({why})"),
                    CheckResult::Fail(why) => println!("FAIL {name}: {why}"),
                }
            }
            let payload = json!({
                "checks": results.iter().map(|(name, r)| json!({
                    "id": name,
                    "status": match r {
                        CheckResult::Pass => "pass",
                        CheckResult::Skip(_) => "skip",
                        CheckResult::Fail(_) => "fail",
                    },
                    "detail": match r {
                        CheckResult::Pass => serde_json::Value::Null,
                        CheckResult::Skip(why) | CheckResult::Fail(why) => json!(why),
                    },
                })).collect::<Vec<_>>(),
                "ok": all_ok,
            });
            emit(q, command_line, None, payload, output.as_deref(), all_ok)
        }
    }
}

enum CheckResult {
    Pass,
    Skip(String),
    Fail(String),
}

fn check(outcome: Result<(), String>) -> CheckResult {
    match outcome {
        Ok(()) => CheckResult::Pass,
        Err(why) => CheckResult::Fail(why),
    }
}

/// The named invariant checks for a single q. Exhaustive where the space is
/// small, seeded sampling otherwise; each check id maps to one module
/// invariant.
fn run_suite(f: &Field, workers: Option<usize>) -> Vec<(&'static str, CheckResult)> {
    use rand::{Rng, SeedableRng};
    let q = f.q();
    let qi = q as u64;
    let mut out = Vec::new();

    // incidence formula and the rho = 0 cap over a cover population
    let cover_population: Vec<Vec<usize>> = if q == 3 {
        let mut all = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        all.push(vec![a, b, c, d]);
                    }
                }
            }
        }
        all
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        (0..2000)
            .map(|_| (0..=q).map(|_| rng.gen_range(0..q)).collect())
            .collect()
    };
    out.push((
        "incidence-formula",
        check((|| {
            for keys in &cover_population {
                let c = build_cover(f, keys).map_err(|e| e.to_string())?;
                c.incidence_size().map_err(|e| e.to_string())?;
            }
            Ok(())
        })()),
    ));
    out.push((
        "rho-zero-cap",
        check((|| {
            for keys in &cover_population {
                let c = build_cover(f, keys).map_err(|e| e.to_string())?;
                c.check_rho_zero().map_err(|e| e.to_string())?;
            }
            Ok(())
        })()),
    ));

    // permutation population: raw exhaustive for q <= 7, sampled above
    let perm_population: Vec<Vec<usize>> = if q <= 7 {
        all_permutation_tables(q)
    } else {
        use rand::seq::SliceRandom;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        (0..2000)
            .map(|_| {
                let mut t: Vec<usize> = (0..q).collect();
                t.shuffle(&mut rng);
                t
            })
            .collect()
    };
    out.push((
        "no-isolated-points",
        check((|| {
            for table in &perm_population {
                let g = classify_indices(f, table).map_err(|e| e.to_string())?;
                let s = g.structure();
                for pk in g.points().iter_packed() {
                    if s.triples_through(pk) == 0 {
                        return Err(format!("isolated point in {table:?}"));
                    }
                }
            }
            Ok(())
        })()),
    ));
    out.push((
        "point-identities",
        check((|| {
            for table in &perm_population {
                let g = classify_indices(f, table).map_err(|e| e.to_string())?;
                let report = verify_point_identities(&g).map_err(|e| e.to_string())?;
                if !report.ok() {
                    return Err(format!("violations on {table:?}"));
                }
            }
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
            for _ in 0..500 {
                let g = random_semipermutation(f, &mut rng);
                let report = verify_point_identities(&g).map_err(|e| e.to_string())?;
                if !report.ok() {
                    return Err(format!("violations on {:?}", g.table_indices()));
                }
            }
            Ok(())
        })()),
    ));

    out.push((
        "min-triples",
        if q <= 9 {
            check((|| {
                let report = min_triples_over_permutations(f, SearchMode::Exhaustive, workers)
                    .map_err(|e| e.to_string())?;
                let expect = (qi - 1) / 2;
                let got = serde_json::to_value(&report.minimum).unwrap();
                if got != json!(expect) {
                    return Err(format!("minimum {got} != (q-1)/2 = {expect}"));
                }
                Ok(())
            })())
        } else {
            CheckResult::Skip("exhaustive space too large".into())
        },
    ));

    out.push((
        "min-besicovitch",
        if q <= 7 {
            check((|| {
                let report = min_besicovitch(f, SearchMode::Exhaustive, workers)
                    .map_err(|e| e.to_string())?;
                let expect = conjectured_minimum(qi);
                let got = serde_json::to_value(&report.minimum).unwrap();
                if got != json!(expect) {
                    return Err(format!("minimum {got} != {expect}"));
                }
                Ok(())
            })())
        } else {
            CheckResult::Skip("exhaustive space too large".into())
        },
    ));

    out.push((
        "parabola-size",
        check((|| {
            let cover = parabola_construction(f);
            if cover.size() as u64 != conjectured_minimum(qi) {
                return Err(format!("size {} != {}", cover.size(), conjectured_minimum(qi)));
            }
            let bound = theorem_lower_bound(qi);
            if num_rational::Ratio::from_integer(cover.size() as i64) < bound {
                return Err("construction below the proven lower bound".into());
            }
            Ok(())
        })()),
    ));

    out.push((
        "duality-roundtrip",
        check((|| {
            let g = inverse_construction(f);
            let (cover, _) = best_primalize(&g).map_err(|e| e.to_string())?;
            if cover.r() == 0 {
                let (dual, r) = cover.normalize_and_dualize().map_err(|e| e.to_string())?;
                if r != 0 {
                    return Err("normalization changed R".into());
                }
                let norm = dual.structure().norm();
                let expect =
                    num_rational::Ratio::from_integer((qi * (qi + 1) / 2) as i64) + norm;
                if num_rational::Ratio::from_integer(cover.size() as i64) != expect {
                    return Err(format!("|P| != q(q+1)/2 + norm ({expect})"));
                }
                let (back, _) = best_primalize(&dual).map_err(|e| e.to_string())?;
                if back.size() != cover.size() {
                    return Err("primalize round-trip changed |P|".into());
                }
            }
            Ok(())
        })()),
    ));

    out.push((
        "matching-bound",
        if q == 3 {
            CheckResult::Skip("degenerate single-line case, reported only".into())
        } else if q <= 9 {
            check(
                max_isolated_matching_extremes(f, workers)
                    .map(|_| ())
                    .map_err(|e| e.to_string()),
            )
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
            check((|| {
                use rand::seq::SliceRandom;
                for _ in 0..500 {
                    let mut t: Vec<usize> = (0..q).collect();
                    t.shuffle(&mut rng);
                    let g = classify_indices(f, &t).map_err(|e| e.to_string())?;
                    let m = g.structure().max_isolated_matching();
                    if !matching_bound_holds(qi, m.edges.len() as u64) {
                        return Err(format!("matching ceiling violated by {t:?}"));
                    }
                }
                Ok(())
            })())
        },
    ));

    out.push((
        "ratio-bound",
        if q <= 7 {
            check((|| {
                let mut failed = None;
                for_each_permutation_representative(f, |table, _, _| {
                    if failed.is_some() {
                        return;
                    }
                    let g = classify_indices(f, table).expect("permutation");
                    match g.structure().ratio_check() {
                        Ok(_) => {}
                        Err(kakeya_lab::collinear::CollinearError::PreconditionViolated(_)) => {}
                        Err(e) => failed = Some(format!("{table:?}: {e}")),
                    }
                });
                failed.map_or(Ok(()), Err)
            })())
        } else {
            CheckResult::Skip("exhaustive space too large".into())
        },
    ));

    out.push((
        "isolated-edge-probe",
        if q <= 7 {
            check((|| {
                let report = isolated_edge_probe(f, workers).map_err(|e| e.to_string())?;
                if !report.exhaustive || report.certificate.is_none() {
                    return Err("probe did not exhaust with a certificate".into());
                }
                Ok(())
            })())
        } else {
            CheckResult::Skip("exhaustive space too large".into())
        },
    ));

    out
}
