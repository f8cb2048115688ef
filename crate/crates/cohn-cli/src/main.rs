//! Batch verifier for localization sessions: load a session file, run one
//! command against the engine, print a report, optionally write it as JSON.

mod expr;
mod report;
mod session;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use cohn_core::complexes::{cone, ChainMap};
use cohn_core::equality::{
    check_factorization, check_malcolmson, decide_equal_oracle, diagnose_factorization,
    diagnose_malcolmson, search_equal, OracleVerdict, SearchOutcome,
};
use cohn_core::localization::ZigZag;
use cohn_core::localization::{triple_add, triple_compose, triple_dsum};
use cohn_core::triangular::{compose_factors, factor_elementary, Factor};
use cohn_core::weights::{
    heart_hom, negativity_check, weight_decompose, weight_range, WeightRange,
};

use expr::{as_word, eval, parse_expr};
use report::{
    chain_map_json, complex_str, factorization_named, homotopy_json, triple_json, triple_text,
    witness_block, Report,
};
use session::{parse_session, parse_witness_file, NamedWitness, Session};

#[derive(Parser)]
#[command(
    name = "cohn",
    about = "Exact computations in localized additive categories"
)]
struct Cli {
    /// Session file defining the ring, S, and named objects
    session: PathBuf,
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report to this path
    #[arg(long, global = true)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize an expression to a triple (g, s, i) with its certificate
    Normalize { expr: String },
    /// Compose two expressions as localized morphisms
    Compose { a: String, b: String },
    /// Add two parallel expressions
    Add { a: String, b: String },
    /// Direct sum of two expressions
    Dsum { a: String, b: String },
    /// Decide or certify equality of two expressions
    Eq {
        a: String,
        b: String,
        /// oracle | search | witness
        #[arg(long)]
        mode: String,
        /// size cap for search mode
        #[arg(long, default_value_t = 4)]
        cap: usize,
        /// witness name (in the session) or file path, for witness mode
        #[arg(long)]
        witness: Option<String>,
    },
    /// Factor a declared certificate into S-sums and invertibles
    Factor { cert: String },
    /// Cone of a declared matrix, with its triangle maps
    Cone { mat: String },
    /// Weight decomposition of a declared complex at weight n
    Wdecomp { cx: String, n: i64 },
    /// Weight range of a declared complex (field coefficients)
    Wrange { cx: String },
    /// Group probe words into hom-set classes of the localized heart
    Heart { probes: Vec<String> },
    /// Orthogonality of complexes against positive shifts
    Negativity {
        complexes: Vec<String>,
        #[arg(long, default_value = "1")]
        shifts: String,
    },
    /// Re-verify a declared witness against two expressions
    CheckWitness {
        witness: String,
        a: String,
        b: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(&cli) {
        Ok(report) => {
            println!("{}", report.text.trim_end());
            if let Some(path) = &cli.json {
                let doc = report.to_json(started.elapsed().as_millis());
                let pretty = serde_json::to_string_pretty(&doc).expect("serializable report");
                if let Err(e) = std::fs::write(path, pretty + "\n") {
                    eprintln!("error: cannot write {}: {}", path.display(), e);
                    return ExitCode::from(2);
                }
            }
            if report.verdict_false {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Report, String> {
    let text = std::fs::read_to_string(&cli.session)
        .map_err(|e| format!("cannot read {}: {}", cli.session.display(), e))?;
    let sess = parse_session(&text).map_err(|e| e.to_string())?;
    match &cli.command {
        Command::Normalize { expr } => cmd_normalize(&sess, expr),
        Command::Compose { a, b } => cmd_binary(&sess, "compose", a, b),
        Command::Add { a, b } => cmd_binary(&sess, "add", a, b),
        Command::Dsum { a, b } => cmd_binary(&sess, "dsum", a, b),
        Command::Eq {
            a,
            b,
            mode,
            cap,
            witness,
        } => cmd_eq(&sess, a, b, mode, *cap, witness.as_deref()),
        Command::Factor { cert } => cmd_factor(&sess, cert),
        Command::Cone { mat } => cmd_cone(&sess, mat),
        Command::Wdecomp { cx, n } => cmd_wdecomp(&sess, cx, *n),
        Command::Wrange { cx } => cmd_wrange(&sess, cx),
        Command::Heart { probes } => cmd_heart(&sess, probes),
        Command::Negativity { complexes, shifts } => cmd_negativity(&sess, complexes, shifts),
        Command::CheckWitness { witness, a, b } => cmd_check_witness(&sess, witness, a, b),
    }
}

fn eval_str(sess: &Session, text: &str) -> Result<cohn_core::LocTriple, String> {
    let e = parse_expr(sess, text).map_err(|e| e.to_string())?;
    eval(sess, &e).map_err(|e| e.to_string())
}

fn cmd_normalize(sess: &Session, expr: &str) -> Result<Report, String> {
    let t = eval_str(sess, expr)?;
    let mut r = Report::new("normalize");
    r.inputs = json!({ "expr": expr });
    r.result = triple_json(&t, &sess.s_names);
    r.text = format!("normalize {}\n{}", expr, triple_text(&t, &sess.s_names));
    Ok(r)
}

fn cmd_binary(sess: &Session, op: &str, a: &str, b: &str) -> Result<Report, String> {
    let ta = eval_str(sess, a)?;
    let tb = eval_str(sess, b)?;
    let t = match op {
        "compose" => triple_compose(&ta, &tb),
        "add" => triple_add(&ta, &tb),
        "dsum" => triple_dsum(&ta, &tb),
        _ => unreachable!(),
    }
    .map_err(|e| e.to_string())?;
    let mut r = Report::new(op);
    r.inputs = json!({ "a": a, "b": b });
    r.result = triple_json(&t, &sess.s_names);
    r.text = format!("{} {} {}\n{}", op, a, b, triple_text(&t, &sess.s_names));
    Ok(r)
}

fn cmd_eq(
    sess: &Session,
    a: &str,
    b: &str,
    mode: &str,
    cap: usize,
    witness: Option<&str>,
) -> Result<Report, String> {
    let ta = eval_str(sess, a)?;
    let tb = eval_str(sess, b)?;
    let mut r = Report::new("eq");
    r.inputs = json!({ "a": a, "b": b, "mode": mode, "cap": cap });
    match mode {
        "oracle" => match decide_equal_oracle(&ta, &tb).map_err(|e| e.to_string())? {
            OracleVerdict::Equal(eq) => {
                r.result =
                    json!({ "mode": "oracle", "verdict": if eq { "equal" } else { "unequal" } });
                r.text = format!("eq (oracle): {}", if eq { "equal" } else { "unequal" });
                r.verdict_false = !eq;
            }
            OracleVerdict::Inapplicable(reason) => {
                r.result = json!({ "mode": "oracle", "verdict": "inapplicable", "reason": reason.clone() });
                r.text = format!("eq (oracle): inapplicable ({})", reason);
            }
        },
        "search" => match search_equal(&ta, &tb, cap).map_err(|e| e.to_string())? {
            SearchOutcome::Found(w) => {
                // re-verify before emitting
                if !check_factorization(&ta, &tb, &w).map_err(|e| e.to_string())? {
                    return Err("internal: found witness failed re-verification".into());
                }
                let block = witness_block("found", &factorization_named(&w), &sess.s_names);
                r.result = json!({ "mode": "search", "verdict": "found", "cap": cap });
                r.witnesses = Value::String(block.clone());
                r.text = format!("eq (search, cap {}): witness found\n{}", cap, block);
            }
            SearchOutcome::NotFoundWithinCap => {
                r.result =
                    json!({ "mode": "search", "verdict": "not-found-within-cap", "cap": cap });
                r.text = format!(
                    "eq (search, cap {}): no witness found (not a disproof)",
                    cap
                );
                r.verdict_false = true;
            }
            SearchOutcome::Unsupported => {
                r.result = json!({ "mode": "search", "verdict": "unsupported" });
                r.text = "eq (search): unsupported over this ring".into();
            }
        },
        "witness" => {
            let name = witness.ok_or("witness mode needs --witness <name-or-file>")?;
            let w = resolve_witness(sess, name)?;
            let ok = match &w {
                NamedWitness::Factorization(fw) => {
                    check_factorization(&ta, &tb, fw).map_err(|e| e.to_string())?
                }
                NamedWitness::Malcolmson(mw) => {
                    check_malcolmson(&ta, &tb, mw).map_err(|e| e.to_string())?
                }
            };
            r.result = json!({
                "mode": "witness",
                "witness": witness_label(name),
                "verdict": if ok { "verified" } else { "rejected" },
            });
            if ok {
                r.witnesses = Value::String(witness_block("checked", &w, &sess.s_names));
            }
            r.text = format!(
                "eq (witness {}): {}",
                name,
                if ok { "verified" } else { "rejected" }
            );
            r.verdict_false = !ok;
        }
        other => return Err(format!("unknown eq mode '{}'", other)),
    }
    Ok(r)
}

/// For reports: witness identifier without any directory components.
fn witness_label(name: &str) -> String {
    std::path::Path::new(name)
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_else(|| name.to_string())
}

fn resolve_witness(sess: &Session, name: &str) -> Result<NamedWitness, String> {
    if let Some(w) = sess.witnesses.get(name) {
        return Ok(w.clone());
    }
    let text = std::fs::read_to_string(name).map_err(|e| {
        format!(
            "no witness '{}' in the session and no such file: {}",
            name, e
        )
    })?;
    parse_witness_file(&sess.sset, &sess.s_names, &text).map_err(|e| e.to_string())
}

fn cmd_factor(sess: &Session, cert_name: &str) -> Result<Report, String> {
    let cert = sess
        .certs
        .get(cert_name)
        .ok_or_else(|| format!("no certificate named '{}'", cert_name))?;
    let factors = factor_elementary(cert).map_err(|e| e.to_string())?;
    let product = compose_factors(&sess.ring, &factors).map_err(|e| e.to_string())?;
    if &product != cert.assembled() {
        return Err("internal: factor product does not reproduce the certificate".into());
    }
    let flist: Vec<Value> = factors
        .iter()
        .map(|f| match f {
            Factor::InS { matrix, .. } => json!({ "kind": "in-s", "matrix": matrix.to_string() }),
            Factor::Invertible { matrix, inverse } => json!({
                "kind": "invertible",
                "matrix": matrix.to_string(),
                "inverse": inverse.to_string(),
            }),
        })
        .collect();
    let mut r = Report::new("factor");
    r.inputs = json!({ "cert": cert_name });
    r.result = json!({
        "factors": flist,
        "product": product.to_string(),
        "matches_assembled": true,
    });
    let lines: Vec<String> = factors
        .iter()
        .map(|f| match f {
            Factor::InS { matrix, .. } => format!("  in-S       {}", matrix),
            Factor::Invertible { matrix, .. } => format!("  invertible {}", matrix),
        })
        .collect();
    r.text = format!(
        "factor {}: {} factors\n{}\nproduct = {} (matches)",
        cert_name,
        factors.len(),
        lines.join("\n"),
        product
    );
    Ok(r)
}

fn cmd_cone(sess: &Session, mat_name: &str) -> Result<Report, String> {
    let m = sess
        .matrices
        .get(mat_name)
        .ok_or_else(|| format!("no matrix named '{}'", mat_name))?;
    let f = ChainMap::concentrated(m, 0);
    let tri = cone(&f).map_err(|e| e.to_string())?;
    let mut r = Report::new("cone");
    r.inputs = json!({ "mat": mat_name });
    r.result = json!({
        "cone": complex_str(&tri.cone),
        "inject": chain_map_json(&tri.inject),
        "project": chain_map_json(&tri.project),
    });
    r.text = format!("cone {} = {}", mat_name, complex_str(&tri.cone));
    Ok(r)
}

fn cmd_wdecomp(sess: &Session, cx_name: &str, n: i64) -> Result<Report, String> {
    let c = sess
        .complexes
        .get(cx_name)
        .ok_or_else(|| format!("no complex named '{}'", cx_name))?;
    let t = weight_decompose(c, n).map_err(|e| e.to_string())?;
    // verify the triangle before reporting
    let round = t
        .cone_to_lower
        .compose(&t.lower_to_cone)
        .map_err(|e| e.to_string())?;
    let id_lower = ChainMap::identity(&t.lower);
    let other = t
        .lower_to_cone
        .compose(&t.cone_to_lower)
        .map_err(|e| e.to_string())?;
    let id_cone = ChainMap::identity(&t.cone.cone);
    let verified = round == id_lower
        && t.cone_homotopy
            .witnesses(&id_cone, &other)
            .map_err(|e| e.to_string())?
        && t.project
            .compose(&t.include)
            .map_err(|e| e.to_string())?
            .is_zero();
    if !verified {
        return Err("internal: weight decomposition failed verification".into());
    }
    let (lo, hi) = c.support().unwrap_or((0, 0));
    let mut r = Report::new("wdecomp");
    r.inputs = json!({ "cx": cx_name, "n": n });
    r.result = json!({
        "upper": complex_str(&t.upper),
        "lower": complex_str(&t.lower),
        "verified": true,
    });
    r.witnesses = json!({
        "include": chain_map_json(&t.include),
        "project": chain_map_json(&t.project),
        "cone_to_lower": chain_map_json(&t.cone_to_lower),
        "lower_to_cone": chain_map_json(&t.lower_to_cone),
        "cone_homotopy": homotopy_json(&t.cone_homotopy, lo, hi),
    });
    r.text = format!(
        "wdecomp {} at n = {}\n  X (w <= {}) = {}\n  Y (w >= {}) = {}\n  triangle verified",
        cx_name,
        n,
        n,
        complex_str(&t.upper),
        n + 1,
        complex_str(&t.lower)
    );
    Ok(r)
}

fn cmd_wrange(sess: &Session, cx_name: &str) -> Result<Report, String> {
    let c = sess
        .complexes
        .get(cx_name)
        .ok_or_else(|| format!("no complex named '{}'", cx_name))?;
    let range = weight_range(c).map_err(|e| e.to_string())?;
    let s = match range {
        WeightRange::Empty => "[+inf,-inf]".to_string(),
        WeightRange::Interval(i, j) => format!("[{},{}]", i, j),
    };
    let mut r = Report::new("wrange");
    r.inputs = json!({ "cx": cx_name });
    r.result = json!({ "range": s });
    r.text = format!("wrange {} = {}", cx_name, s);
    Ok(r)
}

fn cmd_heart(sess: &Session, probes: &[String]) -> Result<Report, String> {
    if probes.is_empty() {
        return Err("heart needs at least one probe expression".into());
    }
    let mut words = Vec::new();
    for p in probes {
        let e = parse_expr(sess, p).map_err(|e| e.to_string())?;
        let tokens = as_word(&e)
            .ok_or_else(|| format!("probe '{}' is not a plain word (no + or dsum)", p))?;
        words.push(ZigZag { tokens });
    }
    let (src, dst) = words[0].ends(&sess.sset).map_err(|e| e.to_string())?;
    let rep = heart_hom(&sess.sset, src, dst, &words).map_err(|e| e.to_string())?;
    let classes: Vec<Value> = rep
        .classes
        .iter()
        .map(|c| Value::Array(c.iter().map(|&i| json!(probes[i])).collect()))
        .collect();
    let reps: Vec<Value> = rep
        .representatives
        .iter()
        .map(|t| triple_json(t, &sess.s_names))
        .collect();
    let mut r = Report::new("heart");
    r.inputs = json!({ "probes": probes });
    r.result = json!({
        "classes": classes,
        "class_count": rep.classes.len(),
        "oracle_used": rep.oracle_used,
        "representatives": reps,
    });
    let lines: Vec<String> = rep
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let members: Vec<&str> = c.iter().map(|&k| probes[k].as_str()).collect();
            format!("  class {}: {}", i, members.join(" = "))
        })
        .collect();
    r.text = format!("heart: {} classes\n{}", rep.classes.len(), lines.join("\n"));
    Ok(r)
}

fn cmd_negativity(sess: &Session, names: &[String], shifts: &str) -> Result<Report, String> {
    if names.is_empty() {
        return Err("negativity needs at least one complex".into());
    }
    let mut objs = Vec::new();
    for n in names {
        objs.push(
            sess.complexes
                .get(n)
                .ok_or_else(|| format!("no complex named '{}'", n))?
                .clone(),
        );
    }
    let shifts: Vec<i64> = shifts
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| format!("bad shift '{}'", s))
        })
        .collect::<Result<_, _>>()?;
    let rep = negativity_check(&objs, &shifts).map_err(|e| e.to_string())?;
    let violations: Vec<Value> = rep
        .violations
        .iter()
        .map(|v| json!({ "from": names[v.from], "to": names[v.to], "shift": v.shift }))
        .collect();
    let mut r = Report::new("negativity");
    r.inputs = json!({ "complexes": names, "shifts": shifts });
    r.result = json!({ "passed": rep.passed(), "violations": violations });
    r.text = if rep.passed() {
        "negativity: passed".to_string()
    } else {
        let lines: Vec<String> = rep
            .violations
            .iter()
            .map(|v| format!("  {} -> {}[{}]", names[v.from], names[v.to], v.shift))
            .collect();
        format!("negativity: failed\n{}", lines.join("\n"))
    };
    Ok(r)
}

fn cmd_check_witness(sess: &Session, name: &str, a: &str, b: &str) -> Result<Report, String> {
    let ta = eval_str(sess, a)?;
    let tb = eval_str(sess, b)?;
    let w = resolve_witness(sess, name)?;
    let (kind, failure) = match &w {
        NamedWitness::Factorization(fw) => (
            "factorization",
            diagnose_factorization(&ta, &tb, fw).map_err(|e| e.to_string())?,
        ),
        NamedWitness::Malcolmson(mw) => (
            "malcolmson",
            diagnose_malcolmson(&ta, &tb, mw).map_err(|e| e.to_string())?,
        ),
    };
    let ok = failure.is_none();
    let mut r = Report::new("check-witness");
    r.inputs = json!({ "witness": witness_label(name), "a": a, "b": b, "kind": kind });
    r.result = match &failure {
        None => json!({ "verdict": "verified" }),
        Some(block) => json!({ "verdict": "rejected", "failing": block }),
    };
    if ok {
        r.witnesses = Value::String(witness_block(name, &w, &sess.s_names));
        r.text = format!("check-witness {}: verified", name);
    } else {
        r.text = format!(
            "check-witness {}: rejected ({})",
            name,
            failure.as_deref().unwrap_or("witness fails")
        );
    }
    r.verdict_false = !ok;
    Ok(r)
}
