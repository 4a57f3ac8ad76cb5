use std::fs;
use std::io::Write;
use std::path::Path;

use lu_invariants::counting::connected_counts;
use lu_invariants::invariants::{eval_mixed, eval_pure, factorize_invariant, InvariantKind, InvariantSpec};
use lu_invariants::io::{LoadedState, OrbitFile, StateFile};
use lu_invariants::perm::{enumerate_orbits, OrbitKey};
use lu_invariants::states::{MixedState, PureState, SystemShape};
use lu_invariants::verify::{self, Budgets, CheckReport};
use lu_invariants::{Complex64, Error};
use serde_json::{json, Value};

use crate::{Config, Failure, Format, Suite, VerifyArgs};

type Outcome = Result<(), Failure>;

fn header(cfg: &Config, command: &str) -> Value {
    json!({
        "tool": "luinv",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": cfg.seed,
        "budget": cfg.budget,
    })
}

fn comment_line(cfg: &Config, prefix: &str) -> String {
    format!(
        "{prefix} luinv {} seed={} budget={}",
        env!("CARGO_PKG_VERSION"),
        cfg.seed,
        cfg.budget
    )
}

fn degree(cfg: &Config, m: usize) -> usize {
    if cfg.full_degree {
        2 * m
    } else {
        m
    }
}

fn emit_json(mut doc: Value, cfg: &Config, command: &str) {
    doc["header"] = header(cfg, command);
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
}

fn unsupported(format: Format, command: &str) -> Failure {
    Failure::Lib(Error::Precondition(format!("{command} has no {format:?} output")))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn budgets(cfg: &Config) -> Budgets {
    Budgets {
        enumeration: cfg.budget,
        contraction: cfg.budget,
    }
}

fn perms_text(perms: &[Vec<usize>]) -> String {
    let inner: Vec<String> = perms
        .iter()
        .map(|p| format!("({})", p.iter().map(usize::to_string).collect::<Vec<_>>().join(",")))
        .collect();
    format!("({})", inner.join(","))
}

fn csv_error(e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("csv output: {e}"))
}

fn csv_writer() -> csv::Writer<std::io::Stdout> {
    csv::WriterBuilder::new().flexible(true).from_writer(std::io::stdout())
}

pub fn orbits(cfg: &Config, k: usize, m: usize, connected: bool) -> Outcome {
    let orbits = enumerate_orbits(k, m, connected, cfg.budget)?;
    match cfg.format {
        Format::Json => {
            let list: Vec<Value> = orbits
                .iter()
                .map(|o| {
                    json!({
                        "perms": o.tuple().to_one_based(),
                        "degree": degree(cfg, m),
                        "connected": o.is_connected(),
                    })
                })
                .collect();
            emit_json(json!({"k": k, "m": m, "count": orbits.len(), "orbits": list}), cfg, "orbits");
        }
        Format::Csv => {
            println!("{}", comment_line(cfg, "#"));
            let mut w = csv_writer();
            w.write_record(["index", "degree", "connected", "perms"]).map_err(csv_error)?;
            for (i, o) in orbits.iter().enumerate() {
                w.write_record([
                    (i + 1).to_string(),
                    degree(cfg, m).to_string(),
                    o.is_connected().to_string(),
                    perms_text(&o.tuple().to_one_based()),
                ])
                .map_err(csv_error)?;
            }
            w.flush().map_err(|e| Failure::Io(e.to_string()))?;
        }
        Format::Plain => {
            println!("{}", comment_line(cfg, "#"));
            println!("# k={k} degree={} orbits={}", degree(cfg, m), orbits.len());
            for o in &orbits {
                let tag = if o.is_connected() { "connected" } else { "disconnected" };
                println!("{}  {tag}", perms_text(&o.tuple().to_one_based()));
            }
        }
        Format::Dot => {
            println!("{}", comment_line(cfg, "//"));
            for (i, o) in orbits.iter().enumerate() {
                print!("{}", o.tuple().to_covering_graph().to_dot(&format!("orbit{}", i + 1)));
            }
        }
    }
    Ok(())
}

pub fn count(cfg: &Config, k: usize, max_m: usize) -> Outcome {
    let table = connected_counts(k, max_m, cfg.budget)?;
    if !table.euler_check() {
        return Err(Error::Inconsistency("Euler product of generator counts does not reproduce the dimensions".into()).into());
    }
    match cfg.format {
        Format::Json => {
            let mut doc = serde_json::to_value(&table).expect("serializable");
            doc["enumerated"] = json!(table.enumerated);
            if cfg.full_degree {
                doc["degrees"] = json!((1..=max_m).map(|m| 2 * m).collect::<Vec<_>>());
            }
            emit_json(doc, cfg, "count");
        }
        Format::Csv => {
            println!("{}", comment_line(cfg, "#"));
            let mut w = csv_writer();
            w.write_record(["degree", "dim", "connected", "enumerated"]).map_err(csv_error)?;
            for m in 1..=max_m {
                w.write_record([
                    degree(cfg, m).to_string(),
                    table.dims[m - 1].to_string(),
                    table.connected[m - 1].to_string(),
                    table.enumerated.contains(&m).to_string(),
                ])
                .map_err(csv_error)?;
            }
            w.flush().map_err(|e| Failure::Io(e.to_string()))?;
        }
        Format::Plain => {
            println!("{}", comment_line(cfg, "#"));
            println!("# k={k}");
            println!("{:>6}  {:>24}  {:>24}", "degree", "dim", "connected");
            for m in 1..=max_m {
                let mark = if table.enumerated.contains(&m) { " *" } else { "" };
                println!(
                    "{:>6}  {:>24}  {:>24}{mark}",
                    degree(cfg, m),
                    table.dims[m - 1].to_string(),
                    table.connected[m - 1].to_string()
                );
            }
            println!("# * connected count confirmed by enumeration");
        }
        Format::Dot => return Err(unsupported(cfg.format, "count")),
    }
    Ok(())
}

pub fn eval(cfg: &Config, state: &Path, orbit: &Path, kind: Option<InvariantKind>) -> Outcome {
    let state = StateFile::parse(&read(state)?)?.load()?;
    let orbit_file = OrbitFile::parse(&read(orbit)?)?;
    let kind = kind.unwrap_or(orbit_file.kind_or(InvariantKind::Pure));
    let spec = InvariantSpec {
        kind,
        orbit: OrbitKey::of(&orbit_file.tuple(kind)?),
    };
    let value = match (&state, kind) {
        (LoadedState::Pure(psi), InvariantKind::Pure) => eval_pure(&spec, psi, cfg.budget)?,
        (LoadedState::Mixed(rho), InvariantKind::Mixed) => eval_mixed(&spec, rho, cfg.budget)?,
        (LoadedState::Pure(psi), InvariantKind::Mixed) => eval_mixed(&spec, &projector(psi)?, cfg.budget)?,
        (LoadedState::Mixed(_), InvariantKind::Pure) => {
            return Err(Error::ShapeMismatch("a pure-state invariant needs a pure state".into()).into())
        }
    };
    match cfg.format {
        Format::Json => emit_json(
            json!({"kind": kind, "k": spec.parties(), "degree": degree(cfg, spec.degree()), "value": [value.re, value.im]}),
            cfg,
            "eval",
        ),
        Format::Plain => {
            println!("{}", comment_line(cfg, "#"));
            println!("{}", value_text(value));
        }
        Format::Csv => {
            println!("{}", comment_line(cfg, "#"));
            println!("re,im");
            println!("{:?},{:?}", value.re, value.im);
        }
        Format::Dot => return Err(unsupported(cfg.format, "eval")),
    }
    Ok(())
}

/// `|ψ⟩⟨ψ|` as a mixed state on the same parties.
fn projector(psi: &PureState) -> Result<MixedState, Failure> {
    let c = psi.coeffs();
    let entries = c.iter().flat_map(|a| c.iter().map(move |b| a * b.conj())).collect();
    Ok(MixedState::new(psi.shape().clone(), entries)?)
}

fn value_text(v: Complex64) -> String {
    format!("[{:?}, {:?}]", v.re, v.im)
}

/// Consecutive equal components collapsed into (component, multiplicity).
fn grouped(components: &[OrbitKey]) -> Vec<(&OrbitKey, usize)> {
    let mut out: Vec<(&OrbitKey, usize)> = Vec::new();
    for c in components {
        match out.last_mut() {
            Some((last, n)) if *last == c => *n += 1,
            _ => out.push((c, 1)),
        }
    }
    out
}

pub fn factor(cfg: &Config, orbit: &Path, kind: Option<InvariantKind>) -> Outcome {
    let file = OrbitFile::parse(&read(orbit)?)?;
    let kind = kind.unwrap_or(file.kind_or(InvariantKind::Pure));
    let spec = InvariantSpec {
        kind,
        orbit: OrbitKey::of(&file.tuple(kind)?),
    };
    let parts = factorize_invariant(&spec.orbit);
    let groups = grouped(&parts);
    let record = |o: &OrbitKey| OrbitFile {
        k: file.k,
        m: o.degree(),
        perms: o.tuple().to_one_based(),
        kind: file.kind,
    };
    match cfg.format {
        Format::Json => {
            let comps: Vec<Value> = groups
                .iter()
                .map(|(o, n)| json!({"orbit": record(o), "degree": degree(cfg, o.degree()), "multiplicity": n}))
                .collect();
            emit_json(
                json!({"input": record(&spec.orbit), "connected": spec.orbit.is_connected(), "components": comps}),
                cfg,
                "factor",
            );
        }
        Format::Plain => {
            println!("{}", comment_line(cfg, "#"));
            println!("# canonical {}", perms_text(&spec.orbit.tuple().to_one_based()));
            for (o, n) in &groups {
                println!("{n} x {}  degree {}", perms_text(&o.tuple().to_one_based()), degree(cfg, o.degree()));
            }
        }
        Format::Csv => {
            println!("{}", comment_line(cfg, "#"));
            let mut w = csv_writer();
            w.write_record(["multiplicity", "degree", "perms"]).map_err(csv_error)?;
            for (o, n) in &groups {
                w.write_record([n.to_string(), degree(cfg, o.degree()).to_string(), perms_text(&o.tuple().to_one_based())])
                    .map_err(csv_error)?;
            }
            w.flush().map_err(|e| Failure::Io(e.to_string()))?;
        }
        Format::Dot => {
            println!("{}", comment_line(cfg, "//"));
            for (i, (o, _)) in groups.iter().enumerate() {
                print!("{}", o.tuple().to_covering_graph().to_dot(&format!("component{}", i + 1)));
            }
        }
    }
    Ok(())
}

const ALL_SUITES: [Suite; 8] = [
    Suite::Series,
    Suite::Invariance,
    Suite::Multiplicativity,
    Suite::Basis,
    Suite::Independence,
    Suite::PureMixed,
    Suite::Padding,
    Suite::Conjugation,
];

fn default_tol(suite: Suite) -> f64 {
    match suite {
        Suite::PureMixed | Suite::Padding => 1e-12,
        _ => 1e-10,
    }
}

/// A basis diagnostic below the stable range: reported, never asserted.
fn diagnostic_report(k: usize, m: usize, shape: &SystemShape, states: usize, cfg: &Config) -> Result<CheckReport, Failure> {
    let (rank, d) = verify::basis_rank_diagnostic(k, m, shape, states, cfg.seed, &budgets(cfg))?;
    Ok(CheckReport {
        name: "basis_rank_diagnostic".into(),
        passed: true,
        max_residual: 0.0,
        tolerance: None,
        summary: format!("k={k} m={m} shape={:?}: observed rank {rank}, dimension {d} (diagnostic only)", shape.dims()),
        details: Vec::new(),
    })
}

pub fn verify(cfg: &Config, args: &VerifyArgs) -> Outcome {
    let k = args.k;
    let degrees: Vec<usize> = match (args.m, args.max_m) {
        (Some(m), _) => vec![m],
        (None, Some(max)) => (1..=max).collect(),
        (None, None) => (1..=3).collect(),
    };
    let top = *degrees.iter().max().unwrap_or(&1);
    if degrees.is_empty() || degrees.contains(&0) {
        return Err(Error::Precondition("degrees must be at least 1".into()).into());
    }
    let shape = match &args.shape {
        Some(s) => s.clone(),
        None => SystemShape::uniform(k, top)?,
    };
    let mut suites: Vec<Suite> = if args.all { ALL_SUITES.to_vec() } else { args.suite.clone() };
    suites.sort();
    suites.dedup();
    if suites.is_empty() {
        return Err(Error::Precondition("choose --all or at least one --suite".into()).into());
    }
    let tol = |s: Suite| args.tol.iter().rev().find(|(t, _)| *t == s).map_or(default_tol(s), |(_, v)| *v);
    let b = budgets(cfg);
    let seed = cfg.seed;
    let trials = args.trials;

    let mut reports = Vec::new();
    for suite in suites {
        match suite {
            Suite::Series => reports.push(verify::check_series_consistency(k, top, &b)?),
            Suite::Invariance => {
                for &m in &degrees {
                    reports.push(verify::check_invariance(k, m, &shape, trials, seed, tol(suite), &b)?);
                }
            }
            Suite::Multiplicativity => {
                for &m in degrees.iter().filter(|&&m| m >= 2) {
                    for m1 in 1..=m / 2 {
                        reports.push(verify::check_multiplicativity(k, m1, m - m1, &shape, trials, seed, tol(suite), &b)?);
                    }
                }
            }
            Suite::Basis => {
                for &m in &degrees {
                    let d = lu_invariants::counting::dim_invariants(k, m)?;
                    let d: usize = d.try_into().map_err(|_| Error::BudgetExceeded { needed: u128::MAX, budget: cfg.budget })?;
                    let states = args.num_states.unwrap_or(2 * d);
                    let stable = shape.dims().iter().all(|&n| n >= m);
                    if args.diagnostic && !stable {
                        reports.push(diagnostic_report(k, m, &shape, states, cfg)?);
                    } else {
                        reports.push(verify::check_basis_rank(k, m, &shape, states, seed, &b)?);
                    }
                }
            }
            Suite::Independence => reports.push(verify::check_algebraic_independence(k, top, &shape, seed, &b)?),
            Suite::PureMixed => {
                for &m in &degrees {
                    reports.push(verify::check_pure_mixed(k, m, &shape, trials, seed, tol(suite), &b)?);
                }
            }
            Suite::Padding => {
                let bigger = match &args.bigger {
                    Some(s) => s.clone(),
                    None => SystemShape::new(shape.dims().iter().map(|n| n + 1).collect())?,
                };
                for &m in &degrees {
                    reports.push(verify::check_padding(k, m, &shape, &bigger, trials, seed, tol(suite), &b)?);
                }
            }
            Suite::Conjugation => {
                for &m in &degrees {
                    reports.push(verify::check_conjugation_symmetry(k, m, &shape, trials, seed, tol(suite), &b)?);
                }
            }
        }
    }

    let passed = reports.iter().all(|r| r.passed);
    let mut doc = json!({"k": k, "shape": shape.dims(), "passed": passed, "checks": reports});
    doc["header"] = header(cfg, "verify");
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&doc).expect("serializable");
        fs::File::create(path)
            .and_then(|mut f| f.write_all(text.as_bytes()))
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    match cfg.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&doc).expect("serializable")),
        Format::Plain => {
            println!("{}", comment_line(cfg, "#"));
            for r in &reports {
                let tol = r.tolerance.map_or("exact".to_string(), |t| format!("tol {t:e}"));
                println!(
                    "{} {:<24} max residual {:.3e} ({tol})  {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.max_residual,
                    r.summary
                );
            }
        }
        Format::Csv => {
            println!("{}", comment_line(cfg, "#"));
            let mut w = csv_writer();
            w.write_record(["check", "passed", "max_residual", "tolerance", "summary"]).map_err(csv_error)?;
            for r in &reports {
                w.write_record([
                    r.name.clone(),
                    r.passed.to_string(),
                    format!("{:e}", r.max_residual),
                    r.tolerance.map_or(String::new(), |t| format!("{t:e}")),
                    r.summary.clone(),
                ])
                .map_err(csv_error)?;
            }
            w.flush().map_err(|e| Failure::Io(e.to_string()))?;
        }
        Format::Dot => return Err(unsupported(cfg.format, "verify")),
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}
