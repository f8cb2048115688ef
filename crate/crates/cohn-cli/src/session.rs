//! Line-oriented session files: ring choice, the set S, named matrices,
//! complexes, certificates, and witnesses, with line-anchored diagnostics.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use cohn_core::addcat::{FreeObject, MatMorphism};
use cohn_core::coeff::Ring;
use cohn_core::complexes::BoundedComplex;
use cohn_core::equality::{FactorizationWitness, MalcolmsonWitness};
use cohn_core::triangular::{DiagTag, SSet, TriangularCert};

#[derive(Debug)]
pub struct SessionError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for SessionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for SessionError {}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, SessionError> {
    Err(SessionError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone)]
pub enum NamedWitness {
    Factorization(FactorizationWitness),
    Malcolmson(MalcolmsonWitness),
}

#[derive(Debug)]
pub struct Session {
    pub ring: Ring,
    pub sset: Arc<SSet>,
    pub s_names: Vec<String>,
    pub matrices: BTreeMap<String, MatMorphism>,
    pub complexes: BTreeMap<String, BoundedComplex>,
    pub certs: BTreeMap<String, TriangularCert>,
    pub witnesses: BTreeMap<String, NamedWitness>,
}

impl Session {
    pub fn s_index(&self, name: &str) -> Option<usize> {
        self.s_names.iter().position(|n| n == name)
    }
}

fn parse_ring(line: usize, text: &str) -> Result<Ring, SessionError> {
    let t = text.trim();
    match t {
        "Z" => Ok(Ring::integers()),
        "Q" => Ok(Ring::rationals()),
        "Q[t]" => Ok(Ring::polynomials()),
        _ => {
            if let Some(body) = t.strip_prefix("Q<").and_then(|b| b.strip_suffix('>')) {
                let gens: Vec<String> = body.split(',').map(|g| g.trim().to_string()).collect();
                if gens.iter().any(|g| g.is_empty()) {
                    return err(line, "empty generator name");
                }
                Ok(Ring::free_algebra(gens))
            } else {
                err(
                    line,
                    format!("unknown ring '{}'; use Z, Q, Q[t], or Q<a,b>", t),
                )
            }
        }
    }
}

fn parse_matrix(ring: &Ring, line: usize, text: &str) -> Result<MatMorphism, SessionError> {
    MatMorphism::parse(ring, text).map_err(|e| SessionError {
        line,
        message: e.to_string(),
    })
}

/// Parse diagonal tags like `s0,id:2,s1` against the declared S names.
pub fn parse_tags(
    s_names: &[String],
    line: usize,
    text: &str,
) -> Result<Vec<DiagTag>, SessionError> {
    let mut tags = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if let Some(rank) = part.strip_prefix("id:") {
            let r: usize = rank.parse().map_err(|_| SessionError {
                line,
                message: format!("bad rank '{}'", rank),
            })?;
            tags.push(DiagTag::Identity(FreeObject(r)));
        } else if let Some(k) = s_names.iter().position(|n| n == part) {
            tags.push(DiagTag::ElementOfS(k));
        } else {
            return err(line, format!("unknown S element '{}' in tags", part));
        }
    }
    Ok(tags)
}

/// Rebuild a certificate from tags plus its assembled matrix by slicing the
/// below-diagonal blocks back out; the reconstruction must reproduce the
/// matrix exactly, which also rejects entries above the staircase.
pub fn cert_from_parts(
    sset: &Arc<SSet>,
    line: usize,
    tags: Vec<DiagTag>,
    assembled: &MatMorphism,
) -> Result<TriangularCert, SessionError> {
    let ring = sset.ring().clone();
    let diag_mats: Vec<MatMorphism> = tags
        .iter()
        .map(|t| match t {
            DiagTag::ElementOfS(k) => sset.element(*k).unwrap().clone(),
            DiagTag::Identity(o) => MatMorphism::identity(&ring, o.rank()),
        })
        .collect();
    let total_rows: usize = diag_mats.iter().map(|m| m.rows()).sum();
    let total_cols: usize = diag_mats.iter().map(|m| m.cols()).sum();
    if assembled.rows() != total_rows || assembled.cols() != total_cols {
        return err(
            line,
            format!(
                "certificate matrix must be {}x{}, got {}x{}",
                total_rows,
                total_cols,
                assembled.rows(),
                assembled.cols()
            ),
        );
    }
    let mut below = BTreeMap::new();
    let mut roff = 0usize;
    for (l, dm) in diag_mats.iter().enumerate() {
        let mut coff = 0usize;
        for (k, cm) in diag_mats.iter().enumerate() {
            if k < l {
                let rows: Vec<usize> = (roff..roff + dm.rows()).collect();
                let cols: Vec<usize> = (coff..coff + cm.cols()).collect();
                let b = assembled.submatrix(&rows, &cols);
                if !b.is_zero() {
                    below.insert((l, k), b);
                }
            }
            coff += cm.cols();
        }
        roff += dm.rows();
    }
    let cert = TriangularCert::new(sset.clone(), tags, below).map_err(|e| SessionError {
        line,
        message: e.to_string(),
    })?;
    if cert.assembled() != assembled {
        return err(
            line,
            "matrix is not lower triangular with the declared diagonal",
        );
    }
    Ok(cert)
}

/// Parse a `name tags ; matrix` certificate line body.
fn parse_cert_body(
    sset: &Arc<SSet>,
    s_names: &[String],
    line: usize,
    body: &str,
) -> Result<TriangularCert, SessionError> {
    let (tags_text, mat_text) = body.split_once(';').ok_or_else(|| SessionError {
        line,
        message: "expected 'tags ; matrix'".into(),
    })?;
    let tags = if tags_text.trim().is_empty() {
        Vec::new()
    } else {
        parse_tags(s_names, line, tags_text.trim())?
    };
    let assembled = parse_matrix(sset.ring(), line, mat_text.trim())?;
    cert_from_parts(sset, line, tags, &assembled)
}

/// Split a `cx` declaration body `{(d,r),...} d(k) = [[..]] d(k') = [[..]]`.
fn parse_complex(ring: &Ring, line: usize, body: &str) -> Result<BoundedComplex, SessionError> {
    let body = body.trim();
    let close = body.find('}').ok_or_else(|| SessionError {
        line,
        message: "missing '}' in support list".into(),
    })?;
    let support_text = &body[..close];
    let support_text = support_text.strip_prefix('{').ok_or_else(|| SessionError {
        line,
        message: "support list must start with '{'".into(),
    })?;
    let mut pairs: Vec<(i64, usize)> = Vec::new();
    for chunk in support_text.split("),") {
        let chunk = chunk.trim().trim_start_matches('(').trim_end_matches(')');
        if chunk.is_empty() {
            continue;
        }
        let (d, r) = chunk.split_once(',').ok_or_else(|| SessionError {
            line,
            message: "support entries are (degree,rank)".into(),
        })?;
        let d: i64 = d.trim().parse().map_err(|_| SessionError {
            line,
            message: format!("bad degree '{}'", d),
        })?;
        let r: usize = r.trim().parse().map_err(|_| SessionError {
            line,
            message: format!("bad rank '{}'", r),
        })?;
        pairs.push((d, r));
    }
    pairs.sort();
    let mut diffs_text: BTreeMap<i64, String> = BTreeMap::new();
    let mut rest = body[close + 1..].trim();
    while !rest.is_empty() {
        let r = rest.strip_prefix("d(").ok_or_else(|| SessionError {
            line,
            message: format!("expected d(<deg>) = ..., got '{}'", rest),
        })?;
        let close_p = r.find(')').ok_or_else(|| SessionError {
            line,
            message: "missing ')' after degree".into(),
        })?;
        let deg: i64 = r[..close_p].trim().parse().map_err(|_| SessionError {
            line,
            message: "bad differential degree".into(),
        })?;
        let r = r[close_p + 1..].trim_start();
        let r = r
            .strip_prefix('=')
            .ok_or_else(|| SessionError {
                line,
                message: "expected '=' after d(<deg>)".into(),
            })?
            .trim_start();
        // the matrix literal ends where the next ` d(` begins at depth 0
        let mut depth = 0usize;
        let mut end = r.len();
        let bytes = r.as_bytes();
        for i in 0..bytes.len() {
            match bytes[i] {
                b'[' => depth += 1,
                b']' => depth = depth.saturating_sub(1),
                b'd' if depth == 0 && i + 1 < bytes.len() && bytes[i + 1] == b'(' => {
                    end = i;
                    break;
                }
                _ => {}
            }
        }
        diffs_text.insert(deg, r[..end].trim().to_string());
        rest = r[end..].trim();
    }
    if pairs.is_empty() {
        return Ok(BoundedComplex::zero(ring));
    }
    let lo = pairs.first().unwrap().0;
    let hi = pairs.last().unwrap().0;
    let mut ranks = vec![0usize; (hi - lo + 1) as usize];
    for (d, r) in &pairs {
        ranks[(d - lo) as usize] = *r;
    }
    let mut diffs = Vec::new();
    for deg in lo..hi {
        let rows = ranks[(deg + 1 - lo) as usize];
        let cols = ranks[(deg - lo) as usize];
        let m = match diffs_text.remove(&deg) {
            Some(t) => {
                let m = parse_matrix(ring, line, &t)?;
                if m.rows() != rows || m.cols() != cols {
                    return err(
                        line,
                        format!(
                            "d({}) must be {}x{}, got {}x{}",
                            deg,
                            rows,
                            cols,
                            m.rows(),
                            m.cols()
                        ),
                    );
                }
                m
            }
            None => MatMorphism::zero(ring, rows, cols),
        };
        diffs.push(m);
    }
    if let Some((deg, _)) = diffs_text.into_iter().next() {
        return err(
            line,
            format!("differential d({}) lies outside the support", deg),
        );
    }
    BoundedComplex::new(ring, lo, ranks, diffs).map_err(|e| SessionError {
        line,
        message: e.to_string(),
    })
}

struct WitnessBuilder {
    name: String,
    kind: String,
    start_line: usize,
    fields: BTreeMap<String, (usize, String)>,
}

fn field_matrix(ring: &Ring, b: &WitnessBuilder, key: &str) -> Result<MatMorphism, SessionError> {
    let (line, text) = b.fields.get(key).ok_or_else(|| SessionError {
        line: b.start_line,
        message: format!("witness '{}' is missing the field '{}'", b.name, key),
    })?;
    parse_matrix(ring, *line, text)
}

fn field_obj(b: &WitnessBuilder, key: &str) -> Result<FreeObject, SessionError> {
    let (line, text) = b.fields.get(key).ok_or_else(|| SessionError {
        line: b.start_line,
        message: format!("witness '{}' is missing the field '{}'", b.name, key),
    })?;
    text.trim()
        .parse::<usize>()
        .map(FreeObject)
        .map_err(|_| SessionError {
            line: *line,
            message: format!("bad rank '{}'", text),
        })
}

fn field_cert(
    sset: &Arc<SSet>,
    s_names: &[String],
    b: &WitnessBuilder,
    key: &str,
) -> Result<TriangularCert, SessionError> {
    let (line, text) = b.fields.get(key).ok_or_else(|| SessionError {
        line: b.start_line,
        message: format!("witness '{}' is missing the field '{}'", b.name, key),
    })?;
    parse_cert_body(sset, s_names, *line, text)
}

fn require_shape(
    line: usize,
    what: &str,
    m: &MatMorphism,
    rows: usize,
    cols: usize,
) -> Result<(), SessionError> {
    if m.rows() != rows || m.cols() != cols {
        return err(
            line,
            format!(
                "{} must be {}x{}, got {}x{}",
                what,
                rows,
                cols,
                m.rows(),
                m.cols()
            ),
        );
    }
    Ok(())
}

fn build_witness(
    sset: &Arc<SSet>,
    s_names: &[String],
    b: &WitnessBuilder,
) -> Result<NamedWitness, SessionError> {
    let ring = sset.ring();
    let line = b.start_line;
    match b.kind.as_str() {
        "factorization" => {
            let k1_cert = field_cert(sset, s_names, b, "k1")?;
            let k2_cert = field_cert(sset, s_names, b, "k2")?;
            let w = FactorizationWitness {
                z: field_obj(b, "z")?,
                z_prime: field_obj(b, "zprime")?,
                t1: field_obj(b, "t1")?,
                t2: field_obj(b, "t2")?,
                k1: k1_cert.assembled().clone(),
                k1_cert,
                k2: k2_cert.assembled().clone(),
                k2_cert,
                p: field_matrix(ring, b, "p")?,
                g: field_matrix(ring, b, "g")?,
                alpha1_0: field_matrix(ring, b, "alpha1_0")?,
                alpha1_1: field_matrix(ring, b, "alpha1_1")?,
                alpha2: field_matrix(ring, b, "alpha2")?,
            };
            require_shape(line, "k1", &w.k1, w.t1.rank(), w.z.rank())?;
            require_shape(line, "k2", &w.k2, w.z_prime.rank(), w.t2.rank())?;
            require_shape(line, "p", &w.p, w.t2.rank(), w.z.rank())?;
            require_shape(line, "g", &w.g, w.z_prime.rank(), w.t1.rank())?;
            if w.alpha1_0.rows() != w.t1.rank() + w.t2.rank() {
                return err(line, "alpha1_0 must land in T1 ⊕ T2");
            }
            if w.alpha1_1.rows() != w.z_prime.rank() {
                return err(line, "alpha1_1 must land in Z'");
            }
            if w.alpha2.cols() != w.t1.rank() + w.t2.rank() {
                return err(line, "alpha2 must start from T1 ⊕ T2");
            }
            Ok(NamedWitness::Factorization(w))
        }
        "malcolmson" => {
            let l_cert = field_cert(sset, s_names, b, "l")?;
            let q_cert = field_cert(sset, s_names, b, "q")?;
            let p_cert = field_cert(sset, s_names, b, "p")?;
            let w = MalcolmsonWitness {
                e1: field_obj(b, "e1")?,
                e2: field_obj(b, "e2")?,
                r1: field_obj(b, "r1")?,
                r2: field_obj(b, "r2")?,
                e: field_obj(b, "e")?,
                l: l_cert.assembled().clone(),
                l_cert,
                m: field_matrix(ring, b, "m")?,
                q: q_cert.assembled().clone(),
                q_cert,
                p: p_cert.assembled().clone(),
                p_cert,
                u: field_matrix(ring, b, "u")?,
                v: field_matrix(ring, b, "v")?,
                x: field_matrix(ring, b, "x")?,
                y: field_matrix(ring, b, "y")?,
            };
            require_shape(line, "L", &w.l, w.r1.rank(), w.e1.rank())?;
            require_shape(line, "M", &w.m, w.r2.rank(), w.e2.rank())?;
            if w.q.rows() != w.e.rank()
                || w.p.cols() != w.e.rank()
                || w.u.cols() != w.e.rank()
                || w.v.rows() != w.e.rank()
            {
                return err(line, "Q, P, u, v must match the rank of E");
            }
            if w.x.cols() != w.e1.rank() || w.y.rows() != w.r2.rank() {
                return err(line, "X must start from E1 and Y must land in R2");
            }
            Ok(NamedWitness::Malcolmson(w))
        }
        other => err(b.start_line, format!("unknown witness kind '{}'", other)),
    }
}

/// Parse a full session file.
pub fn parse_session(text: &str) -> Result<Session, SessionError> {
    let mut ring: Option<Ring> = None;
    let mut s_elements: Vec<MatMorphism> = Vec::new();
    let mut s_names: Vec<String> = Vec::new();
    // declarations held as raw text until the S set is complete
    let mut mat_decls: Vec<(usize, String, String)> = Vec::new();
    let mut cx_decls: Vec<(usize, String, String)> = Vec::new();
    let mut cert_decls: Vec<(usize, String, String)> = Vec::new();
    let mut witness_builders: Vec<WitnessBuilder> = Vec::new();
    let mut current_witness: Option<WitnessBuilder> = None;
    let mut all_names: Vec<String> = Vec::new();

    let register = |line: usize, name: &str, all: &mut Vec<String>| -> Result<(), SessionError> {
        if all.iter().any(|n| n == name) {
            return err(line, format!("duplicate name '{}'", name));
        }
        all.push(name.to_string());
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(b) = current_witness.as_mut() {
            if line == "end" {
                witness_builders.push(current_witness.take().unwrap());
            } else {
                let (key, rest) = line.split_once(' ').ok_or_else(|| SessionError {
                    line: lineno,
                    message: "witness fields are 'key value'".into(),
                })?;
                b.fields
                    .insert(key.to_string(), (lineno, rest.trim().to_string()));
            }
            continue;
        }
        let (head, rest) = match line.split_once(' ') {
            Some(v) => v,
            None => return err(lineno, format!("cannot parse '{}'", line)),
        };
        match head {
            "ring" => {
                if ring.is_some() {
                    return err(lineno, "ring declared twice");
                }
                ring = Some(parse_ring(lineno, rest)?);
            }
            "s" | "mat" | "cx" | "cert" => {
                let r = ring.clone().ok_or_else(|| SessionError {
                    line: lineno,
                    message: "declare the ring first".into(),
                })?;
                let (name, body) = rest.split_once('=').ok_or_else(|| SessionError {
                    line: lineno,
                    message: format!("expected '{} <name> = ...'", head),
                })?;
                let name = name.trim().to_string();
                register(lineno, &name, &mut all_names)?;
                match head {
                    "s" => {
                        s_elements.push(parse_matrix(&r, lineno, body.trim())?);
                        s_names.push(name);
                    }
                    "mat" => mat_decls.push((lineno, name, body.trim().to_string())),
                    "cx" => cx_decls.push((lineno, name, body.trim().to_string())),
                    "cert" => cert_decls.push((lineno, name, body.trim().to_string())),
                    _ => unreachable!(),
                }
            }
            "witness" => {
                let (name, kind) = rest.trim().split_once(' ').ok_or_else(|| SessionError {
                    line: lineno,
                    message: "expected 'witness <name> <kind>'".into(),
                })?;
                register(lineno, name.trim(), &mut all_names)?;
                current_witness = Some(WitnessBuilder {
                    name: name.trim().to_string(),
                    kind: kind.trim().to_string(),
                    start_line: lineno,
                    fields: BTreeMap::new(),
                });
            }
            other => return err(lineno, format!("unknown declaration '{}'", other)),
        }
    }
    if let Some(b) = current_witness {
        return err(
            b.start_line,
            format!("witness '{}' is missing its 'end'", b.name),
        );
    }
    let ring = ring.ok_or_else(|| SessionError {
        line: 1,
        message: "no ring declared".into(),
    })?;
    let sset = Arc::new(SSet::new(&ring, s_elements).map_err(|e| SessionError {
        line: 1,
        message: e.to_string(),
    })?);

    let mut matrices = BTreeMap::new();
    for (line, name, body) in mat_decls {
        matrices.insert(name, parse_matrix(&ring, line, &body)?);
    }
    let mut complexes = BTreeMap::new();
    for (line, name, body) in cx_decls {
        complexes.insert(name, parse_complex(&ring, line, &body)?);
    }
    let mut certs = BTreeMap::new();
    for (line, name, body) in cert_decls {
        certs.insert(name, parse_cert_body(&sset, &s_names, line, &body)?);
    }
    let mut witnesses = BTreeMap::new();
    for b in &witness_builders {
        witnesses.insert(b.name.clone(), build_witness(&sset, &s_names, b)?);
    }
    Ok(Session {
        ring,
        sset,
        s_names,
        matrices,
        complexes,
        certs,
        witnesses,
    })
}

/// Parse a standalone witness file: one `witness <name> <kind> … end` block
/// resolved against an existing session's S set.
pub fn parse_witness_file(
    sset: &Arc<SSet>,
    s_names: &[String],
    text: &str,
) -> Result<NamedWitness, SessionError> {
    let mut builder: Option<WitnessBuilder> = None;
    let mut done: Option<WitnessBuilder> = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match (&mut builder, line) {
            (Some(_), "end") => {
                done = builder.take();
            }
            (Some(b), field) => {
                let (key, rest) = field.split_once(' ').ok_or_else(|| SessionError {
                    line: lineno,
                    message: "witness fields are 'key value'".into(),
                })?;
                b.fields
                    .insert(key.to_string(), (lineno, rest.trim().to_string()));
            }
            (None, decl) => {
                let rest = decl.strip_prefix("witness ").ok_or_else(|| SessionError {
                    line: lineno,
                    message: "witness file must start with 'witness <name> <kind>'".into(),
                })?;
                let (name, kind) = rest.trim().split_once(' ').ok_or_else(|| SessionError {
                    line: lineno,
                    message: "expected 'witness <name> <kind>'".into(),
                })?;
                builder = Some(WitnessBuilder {
                    name: name.trim().to_string(),
                    kind: kind.trim().to_string(),
                    start_line: lineno,
                    fields: BTreeMap::new(),
                });
            }
        }
    }
    let b = done.ok_or_else(|| SessionError {
        line: 1,
        message: "no complete witness block".into(),
    })?;
    build_witness(sset, s_names, &b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_small_session() {
        let text = "\
# a session over the integers
ring Z
s s0 = [[2]]
mat f = [[1,1],[0,1]]
cx C = {(-1,1),(0,1)} d(-1) = [[2]]
cert c0 = s0,s0 ; [[2,0],[5,2]]
";
        let s = parse_session(text).unwrap();
        assert_eq!(s.ring, Ring::integers());
        assert_eq!(s.sset.len(), 1);
        assert_eq!(s.matrices["f"].rows(), 2);
        assert_eq!(s.complexes["C"].support(), Some((-1, 0)));
        assert_eq!(s.certs["c0"].size(), 2);
    }

    #[test]
    fn empty_session_over_integers() {
        let s = parse_session("ring Z\n").unwrap();
        assert!(s.sset.is_empty());
    }

    #[test]
    fn d_squared_violation_names_the_degrees() {
        let text = "ring Z\ncx C = {(0,1),(1,1),(2,1)} d(0) = [[1]] d(1) = [[1]]\n";
        let e = parse_session(text).unwrap_err();
        assert!(e.message.contains("d^2"), "{}", e.message);
        assert_eq!(e.line, 2);
    }

    #[test]
    fn bad_certificate_is_rejected() {
        // an entry above the diagonal staircase
        let text = "ring Z\ns s0 = [[2]]\ncert c = s0,s0 ; [[2,7],[0,2]]\n";
        let e = parse_session(text).unwrap_err();
        assert!(e.message.contains("lower triangular"), "{}", e.message);
    }

    #[test]
    fn witness_blocks_parse() {
        let text = "\
ring Z
s s0 = [[2]]
witness w factorization
z 1
zprime 3
t1 1
t2 3
k1 s0 ; [[2]]
k2 s0,s0,id:1 ; [[2,0,0],[0,2,0],[0,0,1]]
p [[-1],[-1],[-2]]
g [[1],[1],[1]]
alpha1_0 [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]
alpha1_1 [[1,0,0],[0,1,0],[0,0,1]]
alpha2 [[0,1,1,-1]]
end
";
        let s = parse_session(text).unwrap();
        assert!(matches!(s.witnesses["w"], NamedWitness::Factorization(_)));
    }
}
