//! JSON interchange formats: channel documents and code bundles.
//!
//! A channel document is a UTF-8 JSON object with fields
//! `kind` in {"cq", "compound", "avc", "wiretap"}, `alphabet_size`,
//! `out_dim` (plus `eve_dim` and `flavour` for wiretap pairs) and
//! `states`: one matrix per (index, input letter), each matrix a row-major
//! nested array of `[re, im]` pairs. Wiretap documents carry the
//! eavesdropper states in `eve_states`.
//!
//! A code bundle carries a constructed code: block length, sparse codeword
//! distributions, decoder matrices, the set family or colorings, and the
//! recorded errors. Reconstruction re-validates every invariant and checks
//! the recorded errors against a re-evaluation.
//!
//! Serialization uses shortest round-trip decimal (17 significant digits
//! where needed), so parse(serialize(x)) recovers x exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{
    ChannelError, ChannelSemantics, CqChannel, IndexedChannelFamily, WiretapFlavour, WiretapPair,
};
use crate::linalg::{Complex64, ComplexMatrix, DensityOperator, LinalgError, Tolerances};

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Field {
        field: &'static str,
        message: String,
    },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, DocumentError>;

fn field_err(field: &'static str, message: impl Into<String>) -> DocumentError {
    DocumentError::Field {
        field,
        message: message.into(),
    }
}

/// A parsed channel document.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelDocument {
    Cq(CqChannel),
    Family(IndexedChannelFamily),
    Wiretap(WiretapPair),
}

impl ChannelDocument {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ChannelDocument::Cq(_) => "cq",
            ChannelDocument::Family(f) => match f.semantics() {
                ChannelSemantics::Compound => "compound",
                ChannelSemantics::Avc => "avc",
            },
            ChannelDocument::Wiretap(_) => "wiretap",
        }
    }

    pub fn expect_cq(self) -> Result<CqChannel> {
        match self {
            ChannelDocument::Cq(c) => Ok(c),
            other => Err(field_err(
                "kind",
                format!("expected a cq document, got {}", other.kind_name()),
            )),
        }
    }

    /// Accepts a family of the requested semantics; a point channel is
    /// promoted to a singleton family.
    pub fn expect_family(self, semantics: ChannelSemantics) -> Result<IndexedChannelFamily> {
        match self {
            ChannelDocument::Family(f) if f.semantics() == semantics => Ok(f),
            ChannelDocument::Cq(c) => Ok(IndexedChannelFamily::singleton(semantics, c)),
            other => Err(field_err(
                "kind",
                format!("expected a family document, got {}", other.kind_name()),
            )),
        }
    }

    pub fn expect_wiretap(self) -> Result<WiretapPair> {
        match self {
            ChannelDocument::Wiretap(p) => Ok(p),
            other => Err(field_err(
                "kind",
                format!("expected a wiretap document, got {}", other.kind_name()),
            )),
        }
    }
}

/// `[row][col] -> [re, im]`.
type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Serialize, Deserialize)]
struct RawChannelDocument {
    kind: String,
    alphabet_size: usize,
    out_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eve_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flavour: Option<String>,
    /// One matrix per (index, letter); point channels use index count 1.
    states: Vec<Vec<RawMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eve_states: Option<Vec<Vec<RawMatrix>>>,
}

fn matrix_to_raw(m: &ComplexMatrix) -> RawMatrix {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [m.get(i, j).re, m.get(i, j).im])
                .collect()
        })
        .collect()
}

fn raw_to_state(raw: &RawMatrix, dim: usize, tol: &Tolerances) -> Result<DensityOperator> {
    if raw.len() != dim {
        return Err(field_err(
            "states",
            format!("matrix has {} rows, expected {dim}", raw.len()),
        ));
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for row in raw {
        if row.len() != dim {
            return Err(field_err(
                "states",
                format!("matrix row has {} columns, expected {dim}", row.len()),
            ));
        }
        entries.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
    }
    let matrix = ComplexMatrix::new(dim, dim, entries)?;
    Ok(DensityOperator::with_tolerances(matrix, tol)?)
}

fn raw_to_members(
    raw: &[Vec<RawMatrix>],
    alphabet_size: usize,
    dim: usize,
    tol: &Tolerances,
) -> Result<Vec<CqChannel>> {
    if raw.is_empty() {
        return Err(field_err("states", "index set is empty"));
    }
    let mut members = Vec::with_capacity(raw.len());
    for letters in raw {
        if letters.len() != alphabet_size {
            return Err(field_err(
                "states",
                format!(
                    "{} letters given, alphabet_size is {alphabet_size}",
                    letters.len()
                ),
            ));
        }
        let outputs = letters
            .iter()
            .map(|m| raw_to_state(m, dim, tol))
            .collect::<Result<Vec<_>>>()?;
        members.push(CqChannel::new(outputs)?);
    }
    Ok(members)
}

fn members_to_raw(members: &[CqChannel]) -> Vec<Vec<RawMatrix>> {
    members
        .iter()
        .map(|m| {
            m.outputs()
                .iter()
                .map(|o| matrix_to_raw(o.matrix()))
                .collect()
        })
        .collect()
}

pub fn parse_channel_document(text: &str) -> Result<ChannelDocument> {
    parse_channel_document_with(text, &Tolerances::default())
}

pub fn parse_channel_document_with(text: &str, tol: &Tolerances) -> Result<ChannelDocument> {
    let raw: RawChannelDocument = serde_json::from_str(text).map_err(|e| DocumentError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.alphabet_size == 0 {
        return Err(field_err("alphabet_size", "must be positive"));
    }
    if raw.out_dim == 0 {
        return Err(field_err("out_dim", "must be positive"));
    }

    match raw.kind.as_str() {
        "cq" => {
            let members = raw_to_members(&raw.states, raw.alphabet_size, raw.out_dim, tol)?;
            if members.len() != 1 {
                return Err(field_err(
                    "states",
                    format!(
                        "cq document must have exactly one index, got {}",
                        members.len()
                    ),
                ));
            }
            Ok(ChannelDocument::Cq(members.into_iter().next().unwrap()))
        }
        kind @ ("compound" | "avc") => {
            let semantics = if kind == "compound" {
                ChannelSemantics::Compound
            } else {
                ChannelSemantics::Avc
            };
            let members = raw_to_members(&raw.states, raw.alphabet_size, raw.out_dim, tol)?;
            Ok(ChannelDocument::Family(IndexedChannelFamily::new(
                semantics, members,
            )?))
        }
        "wiretap" => {
            let eve_dim = raw
                .eve_dim
                .ok_or_else(|| field_err("eve_dim", "required for wiretap documents"))?;
            let eve_raw = raw
                .eve_states
                .as_ref()
                .ok_or_else(|| field_err("eve_states", "required for wiretap documents"))?;
            let flavour = match raw.flavour.as_deref() {
                None | Some("point") => WiretapFlavour::Point,
                Some("compound") => WiretapFlavour::Compound,
                Some("avc") => WiretapFlavour::Avc,
                Some(other) => {
                    return Err(field_err("flavour", format!("unknown flavour `{other}`")))
                }
            };
            let semantics = match flavour {
                WiretapFlavour::Avc => ChannelSemantics::Avc,
                _ => ChannelSemantics::Compound,
            };
            let legal = IndexedChannelFamily::new(
                semantics,
                raw_to_members(&raw.states, raw.alphabet_size, raw.out_dim, tol)?,
            )?;
            let eve = IndexedChannelFamily::new(
                semantics,
                raw_to_members(eve_raw, raw.alphabet_size, eve_dim, tol)?,
            )?;
            Ok(ChannelDocument::Wiretap(WiretapPair::family(
                flavour, legal, eve,
            )?))
        }
        other => Err(field_err("kind", format!("unknown kind `{other}`"))),
    }
}

pub fn serialize_channel_document(doc: &ChannelDocument) -> String {
    let raw = match doc {
        ChannelDocument::Cq(c) => RawChannelDocument {
            kind: "cq".into(),
            alphabet_size: c.alphabet_size(),
            out_dim: c.out_dim(),
            eve_dim: None,
            flavour: None,
            states: members_to_raw(std::slice::from_ref(c)),
            eve_states: None,
        },
        ChannelDocument::Family(f) => RawChannelDocument {
            kind: match f.semantics() {
                ChannelSemantics::Compound => "compound".into(),
                ChannelSemantics::Avc => "avc".into(),
            },
            alphabet_size: f.alphabet_size(),
            out_dim: f.out_dim(),
            eve_dim: None,
            flavour: None,
            states: members_to_raw(f.members()),
            eve_states: None,
        },
        ChannelDocument::Wiretap(p) => RawChannelDocument {
            kind: "wiretap".into(),
            alphabet_size: p.alphabet_size(),
            out_dim: p.legal().out_dim(),
            eve_dim: Some(p.eve().out_dim()),
            flavour: Some(
                match p.flavour() {
                    WiretapFlavour::Point => "point",
                    WiretapFlavour::Compound => "compound",
                    WiretapFlavour::Avc => "avc",
                }
                .into(),
            ),
            states: members_to_raw(p.legal().members()),
            eve_states: Some(members_to_raw(p.eve().members())),
        },
    };
    serde_json::to_string_pretty(&raw).expect("document serialization cannot fail")
}


// ---------------------------------------------------------------------------
// Code bundles
// ---------------------------------------------------------------------------

use crate::channel::SparseInputDistribution;
use crate::id::{assemble_id_code, IdCode, IdError, SetFamily, TransmissionCode};
use crate::linalg::{Povm, PovmElement};
use crate::secrecy::{assemble_with_colorings, SecrecyError, WiretapIdCode, WiretapIdOptions};
use crate::Guards;

#[derive(Debug, Serialize, Deserialize)]
struct RawWeightedWord {
    word: Vec<usize>,
    weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawSetFamily {
    ground_size: usize,
    epsilon: f64,
    lambda: f64,
    subsets: Vec<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawCodeBundle {
    kind: String,
    block_length: usize,
    alphabet_size: usize,
    /// Per codeword: the sparse distribution support.
    codewords: Vec<Vec<RawWeightedWord>>,
    /// Decoder POVM elements on the block output space.
    decoder: Vec<RawMatrix>,
    recorded_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    set_family: Option<RawSetFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda2: Option<f64>,
    /// Inner transmission code of a concatenated wiretap ID code.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inner: Option<Box<RawCodeBundle>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    colorings: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu_inner: Option<f64>,
}

/// A parsed code bundle.
#[derive(Debug, Clone)]
pub enum CodeBundle {
    Transmission(TransmissionCode),
    /// The assembled ID code together with the transmission scaffold and
    /// set family it came from.
    Id {
        code: IdCode,
        transmission: TransmissionCode,
        sets: SetFamily,
    },
    WiretapId(WiretapIdCode),
}

fn sparse_to_raw(p: &SparseInputDistribution) -> Vec<RawWeightedWord> {
    p.support()
        .iter()
        .map(|(word, weight)| RawWeightedWord {
            word: word.clone(),
            weight: *weight,
        })
        .collect()
}

fn raw_to_sparse(
    raw: &[RawWeightedWord],
    block_length: usize,
    alphabet_size: usize,
) -> Result<SparseInputDistribution> {
    SparseInputDistribution::new(
        block_length,
        alphabet_size,
        raw.iter().map(|w| (w.word.clone(), w.weight)).collect(),
    )
    .map_err(DocumentError::Channel)
}

fn transmission_to_raw(tc: &TransmissionCode, kind: &str) -> RawCodeBundle {
    RawCodeBundle {
        kind: kind.to_string(),
        block_length: tc.block_length(),
        alphabet_size: tc.alphabet_size(),
        codewords: tc.codewords().iter().map(sparse_to_raw).collect(),
        decoder: tc
            .decoder()
            .elements()
            .iter()
            .map(|e| matrix_to_raw(e.matrix()))
            .collect(),
        recorded_error: tc.max_error(),
        set_family: None,
        lambda1: None,
        lambda2: None,
        inner: None,
        colorings: None,
        mu: None,
        mu_inner: None,
    }
}

fn raw_to_transmission(
    raw: &RawCodeBundle,
    fam: &IndexedChannelFamily,
    guards: &Guards,
    tol: &Tolerances,
) -> Result<TransmissionCode> {
    let dim = fam
        .out_dim()
        .checked_pow(raw.block_length as u32)
        .ok_or_else(|| field_err("block_length", "output dimension overflow"))?;
    let codewords = raw
        .codewords
        .iter()
        .map(|w| raw_to_sparse(w, raw.block_length, raw.alphabet_size))
        .collect::<Result<Vec<_>>>()?;
    let elements = raw
        .decoder
        .iter()
        .map(|m| {
            let mat = raw_matrix_to_complex(m, dim)?;
            Ok(PovmElement::with_tolerances(mat, tol)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let decoder = Povm::with_tolerances(elements, tol)?;
    TransmissionCode::from_parts(
        raw.block_length,
        raw.alphabet_size,
        codewords,
        decoder,
        raw.recorded_error,
        fam,
        guards,
    )
    .map_err(DocumentError::from)
}

fn raw_matrix_to_complex(raw: &RawMatrix, dim: usize) -> Result<ComplexMatrix> {
    if raw.len() != dim {
        return Err(field_err(
            "decoder",
            format!("matrix has {} rows, expected {dim}", raw.len()),
        ));
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for row in raw {
        if row.len() != dim {
            return Err(field_err(
                "decoder",
                format!("matrix row has {} columns, expected {dim}", row.len()),
            ));
        }
        entries.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
    }
    Ok(ComplexMatrix::new(dim, dim, entries)?)
}

/// Serializes a transmission code, an ID code (with its scaffold), or a
/// concatenated wiretap ID code.
pub fn serialize_code_bundle(bundle: &CodeBundle) -> String {
    let raw = match bundle {
        CodeBundle::Transmission(tc) => transmission_to_raw(tc, "transmission-code"),
        CodeBundle::Id {
            transmission,
            sets,
            code,
        } => {
            let mut raw = transmission_to_raw(transmission, "id-code");
            raw.set_family = Some(RawSetFamily {
                ground_size: sets.ground_size(),
                epsilon: sets.epsilon(),
                lambda: sets.lambda(),
                subsets: sets.subsets().to_vec(),
            });
            raw.lambda1 = Some(code.lambda1());
            raw.lambda2 = Some(code.lambda2());
            raw
        }
        CodeBundle::WiretapId(code) => {
            let mut raw = transmission_to_raw(code.outer(), "wiretap-id-code");
            raw.inner = Some(Box::new(transmission_to_raw(
                code.inner(),
                "transmission-code",
            )));
            raw.colorings = Some(code.colorings().to_vec());
            raw.lambda1 = Some(code.lambda1());
            raw.lambda2 = Some(code.lambda2());
            raw.mu = Some(code.mu());
            raw.mu_inner = Some(code.mu_inner());
            raw
        }
    };
    serde_json::to_string_pretty(&raw).expect("bundle serialization cannot fail")
}

/// Reconstructs a transmission or ID code bundle against the channel
/// family it was built for, re-validating all invariants and the recorded
/// errors.
pub fn parse_code_bundle(
    text: &str,
    fam: &IndexedChannelFamily,
    guards: &Guards,
) -> Result<CodeBundle> {
    let tol = Tolerances::default();
    let raw: RawCodeBundle = serde_json::from_str(text).map_err(|e| DocumentError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    match raw.kind.as_str() {
        "transmission-code" => Ok(CodeBundle::Transmission(raw_to_transmission(
            &raw, fam, guards, &tol,
        )?)),
        "id-code" => {
            let tc = raw_to_transmission(&raw, fam, guards, &tol)?;
            let sf = raw
                .set_family
                .as_ref()
                .ok_or_else(|| field_err("set_family", "required for id-code bundles"))?;
            let sets =
                SetFamily::from_parts(sf.ground_size, sf.epsilon, sf.lambda, sf.subsets.clone())
                    .map_err(DocumentError::from)?;
            let code = assemble_id_code(&tc, &sets, fam, guards).map_err(DocumentError::from)?;
            for (name, recorded, evaluated) in [
                ("lambda1", raw.lambda1, code.lambda1()),
                ("lambda2", raw.lambda2, code.lambda2()),
            ] {
                if let Some(r) = recorded {
                    if (r - evaluated).abs() > 1e-9 {
                        return Err(field_err(
                            "recorded-errors",
                            format!("{name} = {r} does not match re-evaluation {evaluated}"),
                        ));
                    }
                }
            }
            Ok(CodeBundle::Id {
                code,
                transmission: tc,
                sets,
            })
        }
        other => Err(field_err("kind", format!("unknown bundle kind `{other}`"))),
    }
}

/// Reconstructs a wiretap ID code bundle against its wiretap pair.
pub fn parse_wiretap_code_bundle(
    text: &str,
    wp: &crate::channel::WiretapPair,
    guards: &Guards,
) -> Result<CodeBundle> {
    let tol = Tolerances::default();
    let raw: RawCodeBundle = serde_json::from_str(text).map_err(|e| DocumentError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.kind != "wiretap-id-code" {
        return Err(field_err(
            "kind",
            format!("expected wiretap-id-code, got `{}`", raw.kind),
        ));
    }
    let legal = wp.legal();
    let outer = raw_to_transmission(&raw, legal, guards, &tol)?;
    let inner_raw = raw
        .inner
        .as_ref()
        .ok_or_else(|| field_err("inner", "required for wiretap-id-code bundles"))?;
    let inner = raw_to_transmission(inner_raw, legal, guards, &tol)?;
    let colorings = raw
        .colorings
        .clone()
        .ok_or_else(|| field_err("colorings", "required for wiretap-id-code bundles"))?;
    let opts = WiretapIdOptions::new(
        outer.block_length(),
        outer.size(),
        inner.size(),
        colorings.len(),
        0,
    );
    let code = assemble_with_colorings(wp, outer, inner, colorings, &opts, guards)
        .map_err(DocumentError::from)?;
    for (name, recorded, evaluated) in [
        ("lambda1", raw.lambda1, code.lambda1()),
        ("lambda2", raw.lambda2, code.lambda2()),
        ("mu", raw.mu, code.mu()),
        ("mu_inner", raw.mu_inner, code.mu_inner()),
    ] {
        if let Some(r) = recorded {
            if (r - evaluated).abs() > 1e-9 {
                return Err(field_err(
                    "recorded-errors",
                    format!("{name} = {r} does not match re-evaluation {evaluated}"),
                ));
            }
        }
    }
    Ok(CodeBundle::WiretapId(code))
}

impl From<IdError> for DocumentError {
    fn from(e: IdError) -> Self {
        DocumentError::Field {
            field: "bundle",
            message: e.to_string(),
        }
    }
}

impl From<SecrecyError> for DocumentError {
    fn from(e: SecrecyError) -> Self {
        DocumentError::Field {
            field: "bundle",
            message: e.to_string(),
        }
    }
}

#[cfg(test)]
mod bundle_tests {
    use super::*;
    use crate::channel::ChannelSemantics;
    use crate::id::{build_transmission_code, gilbert_family, TransmissionCodeOptions};
    use crate::secrecy::build_wiretap_id_code;

    fn guards() -> Guards {
        Guards::default()
    }

    #[test]
    fn transmission_bundle_round_trip() {
        let fam = IndexedChannelFamily::singleton(
            ChannelSemantics::Compound,
            CqChannel::binary_symmetric(0.05).unwrap(),
        );
        let tc = build_transmission_code(&fam, &TransmissionCodeOptions::new(3, 4, 5), &guards())
            .unwrap();
        let text = serialize_code_bundle(&CodeBundle::Transmission(tc.clone()));
        match parse_code_bundle(&text, &fam, &guards()).unwrap() {
            CodeBundle::Transmission(back) => {
                assert_eq!(back.size(), tc.size());
                assert!((back.max_error() - tc.max_error()).abs() < 1e-12);
            }
            other => panic!("expected transmission bundle, got {other:?}"),
        }
    }

    #[test]
    fn id_bundle_round_trip() {
        let fam = IndexedChannelFamily::singleton(
            ChannelSemantics::Compound,
            CqChannel::noiseless_classical(2),
        );
        let tc = build_transmission_code(&fam, &TransmissionCodeOptions::new(3, 8, 5), &guards())
            .unwrap();
        let sets = gilbert_family(8, 1.0 / 8.0, 0.9, 6, 3).unwrap();
        let code = assemble_id_code(&tc, &sets, &fam, &guards()).unwrap();
        let text = serialize_code_bundle(&CodeBundle::Id {
            code: code.clone(),
            transmission: tc,
            sets,
        });
        match parse_code_bundle(&text, &fam, &guards()).unwrap() {
            CodeBundle::Id { code: back, .. } => {
                assert_eq!(back.len(), code.len());
                assert!((back.lambda1() - code.lambda1()).abs() < 1e-12);
                assert!((back.lambda2() - code.lambda2()).abs() < 1e-12);
            }
            other => panic!("expected id bundle, got {other:?}"),
        }
    }

    #[test]
    fn wiretap_bundle_round_trip() {
        let w = CqChannel::noiseless_classical(2);
        let v = CqChannel::constant(crate::linalg::DensityOperator::maximally_mixed(2), 2);
        let wp = crate::channel::WiretapPair::point(w, v).unwrap();
        let opts = WiretapIdOptions::new(4, 4, 2, 3, 97);
        let code = build_wiretap_id_code(&wp, &opts, &guards()).unwrap();
        let text = serialize_code_bundle(&CodeBundle::WiretapId(code.clone()));
        match parse_wiretap_code_bundle(&text, &wp, &guards()).unwrap() {
            CodeBundle::WiretapId(back) => {
                assert_eq!(back.colorings(), code.colorings());
                assert!((back.mu() - code.mu()).abs() < 1e-12);
                assert!((back.lambda1() - code.lambda1()).abs() < 1e-12);
            }
            other => panic!("expected wiretap bundle, got {other:?}"),
        }
    }
}
