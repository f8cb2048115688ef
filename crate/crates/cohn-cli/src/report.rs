//! Deterministic reports: a text rendering plus a JSON document with sorted
//! keys. Any witness embedded in a report has been re-verified first.

use serde_json::{json, Value};

use cohn_core::addcat::MatMorphism;
use cohn_core::complexes::{BoundedComplex, ChainMap, Homotopy};
use cohn_core::equality::FactorizationWitness;
use cohn_core::localization::LocTriple;
use cohn_core::triangular::{DiagTag, TriangularCert};

use crate::session::NamedWitness;

pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub result: Value,
    pub witnesses: Value,
    pub text: String,
    /// drives exit code 1 for eq / check-witness
    pub verdict_false: bool,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report {
            command: command.to_string(),
            inputs: Value::Null,
            result: Value::Null,
            witnesses: Value::Null,
            text: String::new(),
            verdict_false: false,
        }
    }

    pub fn to_json(&self, timing_ms: u128) -> Value {
        json!({
            "command": self.command,
            "inputs": self.inputs,
            "result": self.result,
            "witnesses": self.witnesses,
            "timing_ms": timing_ms,
        })
    }
}

pub fn complex_str(c: &BoundedComplex) -> String {
    let Some((lo, hi)) = c.support() else {
        return "{}".to_string();
    };
    let mut parts: Vec<String> = Vec::new();
    for d in lo..=hi {
        parts.push(format!("({},{})", d, c.rank_at(d)));
    }
    let mut out = format!("{{{}}}", parts.join(","));
    for d in lo..hi {
        let m = c.diff_at(d);
        if !m.is_zero() {
            out.push_str(&format!(" d({}) = {}", d, m));
        }
    }
    out
}

pub fn chain_map_json(f: &ChainMap) -> Value {
    let mut comps = serde_json::Map::new();
    if let (Some((slo, shi)), Some((tlo, thi))) = (f.source().support(), f.target().support()) {
        for d in slo.min(tlo)..=shi.max(thi) {
            let m = f.component_at(d);
            if !m.is_zero() {
                comps.insert(d.to_string(), Value::String(m.to_string()));
            }
        }
    }
    Value::Object(comps)
}

pub fn homotopy_json(h: &Homotopy, lo: i64, hi: i64) -> Value {
    let mut comps = serde_json::Map::new();
    for d in lo..=hi + 1 {
        let m = h.component_at(d);
        if !m.is_zero() {
            comps.insert(d.to_string(), Value::String(m.to_string()));
        }
    }
    Value::Object(comps)
}

pub fn tags_str(cert: &TriangularCert, s_names: &[String]) -> String {
    cert.diag()
        .iter()
        .map(|t| match t {
            DiagTag::ElementOfS(k) => s_names
                .get(*k)
                .cloned()
                .unwrap_or_else(|| format!("s{}", k)),
            DiagTag::Identity(o) => format!("id:{}", o.rank()),
        })
        .collect::<Vec<_>>()
        .join(",")
}

pub fn cert_json(cert: &TriangularCert, s_names: &[String]) -> Value {
    json!({
        "tags": tags_str(cert, s_names),
        "matrix": cert.assembled().to_string(),
    })
}

pub fn triple_json(t: &LocTriple, s_names: &[String]) -> Value {
    json!({
        "source": t.source().rank(),
        "target": t.target().rank(),
        "g": t.g().to_string(),
        "s": t.s().to_string(),
        "i": t.i().to_string(),
        "cert": cert_json(t.cert(), s_names),
        "canonical_summand": t.canonical_summand().map(|o| o.rank()),
    })
}

pub fn triple_text(t: &LocTriple, s_names: &[String]) -> String {
    format!(
        "g = {}\ns = {}\ni = {}\ncert: {} ; {}",
        t.g(),
        t.s(),
        t.i(),
        tags_str(t.cert(), s_names),
        t.cert().assembled()
    )
}

fn mat_field(name: &str, m: &MatMorphism) -> String {
    format!("{} {}\n", name, m)
}

/// Serialize a witness as a session-format block (parseable back).
pub fn witness_block(name: &str, w: &NamedWitness, s_names: &[String]) -> String {
    match w {
        NamedWitness::Factorization(w) => {
            let mut out = format!("witness {} factorization\n", name);
            out.push_str(&format!("z {}\n", w.z.rank()));
            out.push_str(&format!("zprime {}\n", w.z_prime.rank()));
            out.push_str(&format!("t1 {}\n", w.t1.rank()));
            out.push_str(&format!("t2 {}\n", w.t2.rank()));
            out.push_str(&format!(
                "k1 {} ; {}\n",
                tags_str(&w.k1_cert, s_names),
                w.k1
            ));
            out.push_str(&format!(
                "k2 {} ; {}\n",
                tags_str(&w.k2_cert, s_names),
                w.k2
            ));
            out.push_str(&mat_field("p", &w.p));
            out.push_str(&mat_field("g", &w.g));
            out.push_str(&mat_field("alpha1_0", &w.alpha1_0));
            out.push_str(&mat_field("alpha1_1", &w.alpha1_1));
            out.push_str(&mat_field("alpha2", &w.alpha2));
            out.push_str("end\n");
            out
        }
        NamedWitness::Malcolmson(w) => {
            let mut out = format!("witness {} malcolmson\n", name);
            for (k, v) in [
                ("e1", w.e1.rank()),
                ("e2", w.e2.rank()),
                ("r1", w.r1.rank()),
                ("r2", w.r2.rank()),
                ("e", w.e.rank()),
            ] {
                out.push_str(&format!("{} {}\n", k, v));
            }
            out.push_str(&format!("l {} ; {}\n", tags_str(&w.l_cert, s_names), w.l));
            out.push_str(&mat_field("m", &w.m));
            out.push_str(&format!("q {} ; {}\n", tags_str(&w.q_cert, s_names), w.q));
            out.push_str(&format!("p {} ; {}\n", tags_str(&w.p_cert, s_names), w.p));
            out.push_str(&mat_field("u", &w.u));
            out.push_str(&mat_field("v", &w.v));
            out.push_str(&mat_field("x", &w.x));
            out.push_str(&mat_field("y", &w.y));
            out.push_str("end\n");
            out
        }
    }
}

pub fn factorization_named(w: &FactorizationWitness) -> NamedWitness {
    NamedWitness::Factorization(w.clone())
}
