//! Wiretap-side analysis: eavesdropper distinguishability, the
//! two-message-channel information bounds, dichotomy evaluators (point,
//! compound, AVC), the two-layer concatenated wiretap ID construction
//! with collision statistics, and continuity / super-activation probes.

use thiserror::Error;

use crate::channel::{
    channel_distance, ChannelError, CqChannel, IndexedChannelFamily, SparseInputDistribution,
    WiretapFlavour, WiretapPair,
};
use crate::id::{
    build_transmission_code, evaluate_id_errors, EvaluationMode, IdCode, IdError, IdWitness,
    TransmissionCode, TransmissionCodeOptions,
};
use crate::info::{
    avwc_secrecy_lower_bound, compound_capacity, compound_secrecy_lower_bound, holevo_capacity,
    holevo_information, random_coding_capacity, secrecy_lower_bound_single_letter,
    symmetrizability_check, InfoError, SecrecyPositivity,
};
use crate::linalg::{
    binary_entropy, hermitian_eigensystem, trace_distance, ComplexMatrix, DensityOperator,
    LinalgError, Povm, PovmElement, ProbabilityDistribution, Tolerances,
};
use crate::sampling;
use crate::Guards;

#[derive(Debug, Error)]
pub enum SecrecyError {
    #[error("operators do not commute: commutator max entry {defect:.3e}")]
    NotCommuting { defect: f64 },
    #[error("component code failure: {0}")]
    ComponentCodeFailure(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Info(#[from] InfoError),
    #[error(transparent)]
    Id(#[from] IdError),
}

pub type Result<T> = std::result::Result<T, SecrecyError>;

// ---------------------------------------------------------------------------
// Eavesdropper distinguishability
// ---------------------------------------------------------------------------

/// Worst-case pairwise distinguishability of the eavesdropper's views.
#[derive(Debug, Clone)]
pub struct EveReport {
    /// mu = max_{i != j} (1/2) ||V(Q_i) - V(Q_j)||_1, worst case over the
    /// index set (compound) or state sequences (AVC).
    pub mu: f64,
    /// Helstrom bound (1 - mu) / 2 on Eve's two-hypothesis error.
    pub helstrom_error: f64,
    /// (i, j, state sequence) achieving mu.
    pub witness: (usize, usize, Vec<usize>),
    /// False when the AVC sequence space was sampled, not enumerated.
    pub exact: bool,
}

/// Computes mu for a list of encodings through the eavesdropper family.
pub fn eavesdropper_distinguishability(
    encodings: &[SparseInputDistribution],
    eve: &IndexedChannelFamily,
    mode: EvaluationMode,
    guards: &Guards,
    sample_budget: usize,
    seed: u64,
) -> Result<EveReport> {
    if encodings.is_empty() {
        return Err(SecrecyError::ComponentCodeFailure(
            "no encodings given".into(),
        ));
    }
    let n = encodings[0].block_length();
    crate::channel::guarded_power(eve.out_dim(), n, guards)?;

    let eval_seq = |seq: &[usize]| -> Result<(f64, (usize, usize))> {
        let states: Vec<DensityOperator> = encodings
            .iter()
            .map(|q| {
                let mut acc: Option<ComplexMatrix> = None;
                for (word, w) in q.support() {
                    if *w <= 0.0 {
                        continue;
                    }
                    let out = eve.avc_output(seq, word, guards)?;
                    let scaled = out.matrix().scale(*w);
                    acc = Some(match acc {
                        Some(m) => m.add(&scaled),
                        None => scaled,
                    });
                }
                Ok(DensityOperator::from_trusted(
                    acc.expect("nonempty support"),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut worst = 0.0_f64;
        let mut pair = (0, 0);
        for i in 0..states.len() {
            for j in (i + 1)..states.len() {
                let d = trace_distance(&states[i], &states[j])?;
                if d > worst {
                    worst = d;
                    pair = (i, j);
                }
            }
        }
        Ok((worst, pair))
    };

    let mut mu = -1.0_f64;
    let mut witness = (0, 0, Vec::new());
    let mut exact = true;
    match mode {
        EvaluationMode::Compound => {
            for s in 0..eve.len() {
                let seq = vec![s; n];
                let (d, (i, j)) = eval_seq(&seq)?;
                if d > mu {
                    mu = d;
                    witness = (i, j, vec![s]);
                }
            }
        }
        EvaluationMode::Avc => {
            let total = (eve.len() as u128).saturating_pow(n as u32);
            if total <= guards.enumeration_guard as u128 {
                for idx in 0..total {
                    let seq = index_sequence(idx, eve.len(), n);
                    let (d, (i, j)) = eval_seq(&seq)?;
                    if d > mu {
                        mu = d;
                        witness = (i, j, seq);
                    }
                }
            } else {
                exact = false;
                let mut rng = sampling::rng_from_seed(seed);
                use rand::RngExt;
                for s in 0..eve.len() {
                    let seq = vec![s; n];
                    let (d, (i, j)) = eval_seq(&seq)?;
                    if d > mu {
                        mu = d;
                        witness = (i, j, seq);
                    }
                }
                for _ in 0..sample_budget.max(64) {
                    let seq: Vec<usize> = (0..n).map(|_| rng.random_range(0..eve.len())).collect();
                    let (d, (i, j)) = eval_seq(&seq)?;
                    if d > mu {
                        mu = d;
                        witness = (i, j, seq);
                    }
                }
            }
        }
    }
    let mu = mu.max(0.0);
    Ok(EveReport {
        mu,
        helstrom_error: 0.5 * (1.0 - mu),
        witness,
        exact,
    })
}

fn index_sequence(mut idx: u128, base: usize, len: usize) -> Vec<usize> {
    let mut seq = vec![0usize; len];
    for pos in (0..len).rev() {
        seq[pos] = (idx % base as u128) as usize;
        idx /= base as u128;
    }
    seq
}

// ---------------------------------------------------------------------------
// Two-message channel bounds
// ---------------------------------------------------------------------------

/// Upper bound h(mu/2) on Eve's information about a two-message subcode
/// whose views are mu-close in trace distance.
pub fn lemma3_bound(mu: f64) -> std::result::Result<f64, LinalgError> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(LinalgError::DomainError {
            what: "mu",
            value: mu,
        });
    }
    binary_entropy(mu / 2.0)
}

/// Lower bound h((1 + l1 - l2)/2) - h(l1)/2 - h(l2)/2 (clamped at 0) on the
/// legal receiver's information about a two-message subcode that some test
/// accepts with errors (l1, l2), both at most 1/2.
pub fn lemma4_bound(lambda1: f64, lambda2: f64) -> std::result::Result<f64, LinalgError> {
    for (what, v) in [("lambda1", lambda1), ("lambda2", lambda2)] {
        if !(0.0..=0.5).contains(&v) {
            return Err(LinalgError::DomainError { what, value: v });
        }
    }
    let value = binary_entropy(0.5 * (1.0 + lambda1 - lambda2))?
        - 0.5 * binary_entropy(lambda1)?
        - 0.5 * binary_entropy(lambda2)?;
    Ok(value.max(0.0))
}

/// The binary cq-channel {i, j} -> {W(P_i), W(P_j)} induced by a message
/// pair; its Holevo information under the uniform input is the quantity
/// the two lemma bounds sandwich.
pub fn two_message_channel(
    p_i: &SparseInputDistribution,
    p_j: &SparseInputDistribution,
    w: &CqChannel,
    guards: &Guards,
) -> Result<CqChannel> {
    let out_i = w.output_under_distribution(p_i, guards)?;
    let out_j = w.output_under_distribution(p_j, guards)?;
    Ok(CqChannel::new(vec![out_i, out_j])?)
}

/// Verdict of the small-error certification route.
#[derive(Debug, Clone, PartialEq)]
pub enum GapVerdict {
    /// lambda <= 1/15 and the numeric gap I(Q;W~) - I(Q;V~) met the
    /// guaranteed 1 - 2h(lambda) within tolerance: secrecy capacity
    /// certified positive.
    CertifiedPositive { gap: f64, guaranteed: f64 },
    /// Certification unavailable (lambda too large, or the numeric
    /// confirmation failed).
    Inconclusive { two_h_lambda: f64, gap: f64 },
}

/// Certification test from an ID code's evaluated errors: with
/// lambda = max(lambda1, lambda2, mu) <= 1/15 the two-message gap
/// I(Q;W~) - I(Q;V~) >= 1 - 2h(lambda) > 0 and the secrecy capacity of the
/// pair is positive.
pub fn dichotomy_gap_test(
    lambda: f64,
    w_tilde: &CqChannel,
    v_tilde: &CqChannel,
    tol: f64,
) -> Result<GapVerdict> {
    if !(0.0..=0.5).contains(&lambda) {
        return Err(SecrecyError::Linalg(LinalgError::DomainError {
            what: "lambda",
            value: lambda,
        }));
    }
    let q = ProbabilityDistribution::uniform(2);
    let i_w = holevo_information(&q, w_tilde)?;
    let i_v = holevo_information(&q, v_tilde)?;
    let gap = i_w - i_v;
    let two_h = 2.0 * binary_entropy(lambda)?;
    if lambda <= 1.0 / 15.0 && gap >= 1.0 - two_h - tol {
        Ok(GapVerdict::CertifiedPositive {
            gap,
            guaranteed: 1.0 - two_h,
        })
    } else {
        Ok(GapVerdict::Inconclusive {
            two_h_lambda: two_h,
            gap,
        })
    }
}

/// Commuting-pair analysis: the exact erasure decomposition
/// v_x = mu * residual_x + (1 - mu) * overlap with
/// (1 - mu) * overlap = min(v_i, v_j) in the common eigenbasis, and the
/// improved bound I(Q;V~) <= mu.
#[derive(Debug, Clone)]
pub struct CommutingCaseReport {
    pub mu: f64,
    /// I(Q; {v_i, v_j}) under uniform Q.
    pub info: f64,
    /// h(mu/2), the general bound, for comparison.
    pub h_bound: f64,
    /// (overlap state, residual_i, residual_j); absent in the degenerate
    /// mu = 0 or mu = 1 cases.
    pub decomposition: Option<(DensityOperator, DensityOperator, DensityOperator)>,
    /// Max-entry reconstruction error of the decomposition.
    pub reconstruction_error: f64,
}

/// Simultaneously diagonalizes two commuting Hermitian PSD matrices:
/// eigenvectors of the first, refined inside each degenerate cluster by
/// diagonalizing the second.
fn joint_eigenbasis(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<(ComplexMatrix, Vec<f64>, Vec<f64>)> {
    let sys = hermitian_eigensystem(a, tol)?;
    let dim = a.rows();
    let mut u = sys.eigenvectors.clone();
    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && (sys.eigenvalues[end] - sys.eigenvalues[start]).abs() < 1e-8 {
            end += 1;
        }
        let span = end - start;
        if span > 1 {
            // Project b into the cluster and diagonalize the block.
            let mut entries = Vec::with_capacity(span * span);
            for r in 0..span {
                for c in 0..span {
                    let mut acc = crate::linalg::Complex64::new(0.0, 0.0);
                    for k in 0..dim {
                        for l in 0..dim {
                            acc += u.get(k, start + r).conj() * b.get(k, l) * u.get(l, start + c);
                        }
                    }
                    entries.push(acc);
                }
            }
            let block = ComplexMatrix::new(span, span, entries)?;
            let sub = hermitian_eigensystem(&block.hermitized(), tol)?;
            // Rotate the cluster columns.
            let rotated = ComplexMatrix::from_fn(dim, dim, |k, c| {
                if c < start || c >= end {
                    u.get(k, c)
                } else {
                    let mut acc = crate::linalg::Complex64::new(0.0, 0.0);
                    for r in 0..span {
                        acc += u.get(k, start + r) * sub.eigenvectors.get(r, c - start);
                    }
                    acc
                }
            });
            u = rotated;
        }
        start = end;
    }
    let diag_of = |m: &ComplexMatrix| -> Vec<f64> {
        (0..dim)
            .map(|k| {
                let mut acc = crate::linalg::Complex64::new(0.0, 0.0);
                for r in 0..dim {
                    for c in 0..dim {
                        acc += u.get(r, k).conj() * m.get(r, c) * u.get(c, k);
                    }
                }
                acc.re
            })
            .collect()
    };
    let da = diag_of(a);
    let db = diag_of(b);
    Ok((u, da, db))
}

pub fn commuting_case_bound(
    v_i: &DensityOperator,
    v_j: &DensityOperator,
    tol_commute: f64,
) -> Result<CommutingCaseReport> {
    if v_i.dim() != v_j.dim() {
        return Err(SecrecyError::Linalg(LinalgError::DimensionMismatch {
            left: v_i.dim(),
            right: v_j.dim(),
        }));
    }
    let commutator = v_i
        .matrix()
        .matmul(v_j.matrix())
        .sub(&v_j.matrix().matmul(v_i.matrix()));
    let defect = commutator.max_abs_entry();
    if defect > tol_commute {
        return Err(SecrecyError::NotCommuting { defect });
    }
    let tol = Tolerances::default();
    let (u, di, dj) = joint_eigenbasis(v_i.matrix(), v_j.matrix(), &tol)?;
    let dim = v_i.dim();

    let mu = 0.5 * di.iter().zip(&dj).map(|(a, b)| (a - b).abs()).sum::<f64>();
    let channel = CqChannel::new(vec![v_i.clone(), v_j.clone()])?;
    let info = holevo_information(&ProbabilityDistribution::uniform(2), &channel)?;
    let h_bound = binary_entropy((mu / 2.0).clamp(0.0, 1.0))?;

    let mut decomposition = None;
    let mut reconstruction_error = 0.0;
    if mu > 1e-12 && mu < 1.0 - 1e-12 {
        let overlap: Vec<f64> = di.iter().zip(&dj).map(|(a, b)| a.min(*b)).collect();
        let res_i: Vec<f64> = di.iter().zip(&overlap).map(|(a, m)| (a - m) / mu).collect();
        let res_j: Vec<f64> = dj.iter().zip(&overlap).map(|(a, m)| (a - m) / mu).collect();
        let scale = 1.0 / (1.0 - mu);
        let assemble = |diag: &[f64], s: f64| -> DensityOperator {
            let m = ComplexMatrix::from_fn(dim, dim, |r, c| {
                let mut acc = crate::linalg::Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += u.get(r, k) * u.get(c, k).conj() * (diag[k] * s);
                }
                acc
            });
            DensityOperator::from_trusted(m)
        };
        let perp = assemble(&overlap, scale);
        let ri = assemble(&res_i, 1.0);
        let rj = assemble(&res_j, 1.0);
        // v_x = mu * residual_x + (1 - mu) * perp, verified entrywise.
        let rebuilt_i = ri.matrix().scale(mu).add(&perp.matrix().scale(1.0 - mu));
        let rebuilt_j = rj.matrix().scale(mu).add(&perp.matrix().scale(1.0 - mu));
        reconstruction_error = rebuilt_i
            .max_entry_diff(v_i.matrix())
            .max(rebuilt_j.max_entry_diff(v_j.matrix()));
        decomposition = Some((perp, ri, rj));
    }

    Ok(CommutingCaseReport {
        mu,
        info,
        h_bound,
        decomposition,
        reconstruction_error,
    })
}

// ---------------------------------------------------------------------------
// Dichotomy evaluators
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct DichotomyOptions {
    /// Capacity solve tolerance (bits); also the positivity threshold for
    /// the secrecy proxy.
    pub tol: f64,
    /// Auxiliary alphabet size; defaults to the input alphabet.
    pub u_size: Option<usize>,
    pub seed: u64,
    pub tol_symm: f64,
    /// A CERTIFIED_POSITIVE verdict from [`dichotomy_gap_test`] overrides a
    /// ZERO_PROXY outcome of the proxy search.
    pub certified_positive: bool,
}

impl Default for DichotomyOptions {
    fn default() -> Self {
        DichotomyOptions {
            tol: 1e-6,
            u_size: None,
            seed: 0,
            tol_symm: 1e-7,
            certified_positive: false,
        }
    }
}

/// Composition of a dichotomy theorem: the secure ID capacity equals the
/// transmission capacity when the secrecy capacity is positive and is 0
/// otherwise.
#[derive(Debug, Clone)]
pub struct DichotomyReport {
    pub transmission_capacity: f64,
    pub secrecy_positive: SecrecyPositivity,
    /// The single-letter proxy value behind the positivity decision.
    pub secrecy_proxy: f64,
    pub sid_capacity: f64,
    /// Text trail of which theorem clause fired.
    pub rationale: Vec<String>,
}

impl DichotomyReport {
    fn compose(
        transmission: f64,
        positivity: SecrecyPositivity,
        proxy: f64,
        mut rationale: Vec<String>,
    ) -> Self {
        let sid = if positivity == SecrecyPositivity::Positive {
            rationale.push(format!(
                "secrecy positive: secure ID capacity equals the transmission capacity {transmission:.6}"
            ));
            transmission
        } else {
            rationale.push("secrecy not positive: secure ID capacity is 0".into());
            0.0
        };
        DichotomyReport {
            transmission_capacity: transmission,
            secrecy_positive: positivity,
            secrecy_proxy: proxy,
            sid_capacity: sid,
            rationale,
        }
    }
}

/// True when every legal member has an exact copy in Eve's family; then no
/// auxiliary variable can separate them at any block length and the
/// secrecy capacity is zero with certainty.
fn eve_dominates_exactly(legal: &IndexedChannelFamily, eve: &IndexedChannelFamily) -> Result<bool> {
    if legal.out_dim() != eve.out_dim() {
        return Ok(false);
    }
    let tol = Tolerances::default();
    for w in legal.members() {
        let mut matched = false;
        for v in eve.members() {
            if channel_distance(w, v, &tol)? <= 1e-12 {
                matched = true;
                break;
            }
        }
        if !matched {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn dichotomy_point(wp: &WiretapPair, opts: &DichotomyOptions) -> Result<DichotomyReport> {
    let w = wp.legal_point();
    let mut rationale = Vec::new();
    let cap = holevo_capacity(w, opts.tol)?;
    rationale.push(format!(
        "transmission capacity C(W) = {:.6} (gap {:.1e})",
        cap.value, cap.gap_estimate
    ));

    if cap.value <= opts.tol {
        rationale.push("C(W) = 0 forces zero secrecy capacity".into());
        return Ok(DichotomyReport::compose(
            cap.value,
            SecrecyPositivity::ZeroCertified,
            0.0,
            rationale,
        ));
    }
    if eve_dominates_exactly(wp.legal(), wp.eve())? {
        rationale.push("eavesdropper channel equals the legal channel exactly".into());
        return Ok(DichotomyReport::compose(
            cap.value,
            SecrecyPositivity::ZeroCertified,
            0.0,
            rationale,
        ));
    }

    let u_size = opts.u_size.unwrap_or_else(|| wp.alphabet_size());
    let bound = secrecy_lower_bound_single_letter(wp, u_size, opts.tol, opts.seed)?;
    rationale.push(format!(
        "single-letter secrecy proxy = {:.6} over {} starts",
        bound.value, bound.starts
    ));
    let positivity = decide_positivity(bound.value, opts, &mut rationale);
    Ok(DichotomyReport::compose(
        cap.value,
        positivity,
        bound.value,
        rationale,
    ))
}

pub fn dichotomy_compound(wp: &WiretapPair, opts: &DichotomyOptions) -> Result<DichotomyReport> {
    let mut rationale = Vec::new();
    let cap = compound_capacity(wp.legal(), opts.tol)?;
    rationale.push(format!(
        "compound transmission capacity C(W-family) = {:.6} (gap {:.1e})",
        cap.value, cap.gap_estimate
    ));
    if cap.value <= opts.tol {
        rationale.push("C = 0 forces zero secrecy capacity".into());
        return Ok(DichotomyReport::compose(
            cap.value,
            SecrecyPositivity::ZeroCertified,
            0.0,
            rationale,
        ));
    }
    if eve_dominates_exactly(wp.legal(), wp.eve())? {
        rationale.push("Eve's family contains a copy of every legal member".into());
        return Ok(DichotomyReport::compose(
            cap.value,
            SecrecyPositivity::ZeroCertified,
            0.0,
            rationale,
        ));
    }
    let u_size = opts.u_size.unwrap_or_else(|| wp.alphabet_size());
    let bound = compound_secrecy_lower_bound(wp, u_size, opts.tol, opts.seed)?;
    rationale.push(format!(
        "compound secrecy proxy = {:.6} over {} starts",
        bound.value, bound.starts
    ));
    let positivity = decide_positivity(bound.value, opts, &mut rationale);
    Ok(DichotomyReport::compose(
        cap.value,
        positivity,
        bound.value,
        rationale,
    ))
}

pub fn dichotomy_avwc(wp: &WiretapPair, opts: &DichotomyOptions) -> Result<DichotomyReport> {
    if wp.flavour() != WiretapFlavour::Avc {
        return Err(SecrecyError::ComponentCodeFailure(
            "dichotomy_avwc requires an AVC wiretap pair".into(),
        ));
    }
    let mut rationale = Vec::new();
    let cert = symmetrizability_check(wp.legal(), opts.tol_symm)?;
    if cert.symmetrizable {
        rationale.push(format!(
            "legal family symmetrizable (residual {:.2e}): transmission and secrecy capacities are 0",
            cert.residual
        ));
        return Ok(DichotomyReport::compose(
            0.0,
            SecrecyPositivity::ZeroCertified,
            0.0,
            rationale,
        ));
    }
    rationale.push(format!(
        "legal family not symmetrizable (residual {:.2e})",
        cert.residual
    ));
    let cap = random_coding_capacity(wp.legal(), opts.tol)?;
    rationale.push(format!(
        "random-coding capacity C_ran = {:.6} (gap {:.1e})",
        cap.value, cap.gap_estimate
    ));
    if cap.value <= opts.tol {
        rationale.push("C_ran = 0 forces zero secrecy capacity".into());
        return Ok(DichotomyReport::compose(
            cap.value,
            SecrecyPositivity::ZeroCertified,
            0.0,
            rationale,
        ));
    }
    if eve_dominates_exactly(wp.legal(), wp.eve())? {
        rationale.push("Eve's family contains a copy of every legal member".into());
        return Ok(DichotomyReport::compose(
            cap.value,
            SecrecyPositivity::ZeroCertified,
            0.0,
            rationale,
        ));
    }
    let u_size = opts.u_size.unwrap_or_else(|| wp.alphabet_size());
    let bound = avwc_secrecy_lower_bound(wp, u_size, opts.tol, opts.seed)?;
    rationale.push(format!(
        "random-coding secrecy proxy = {:.6} over {} starts",
        bound.value, bound.starts
    ));
    let positivity = decide_positivity(bound.value, opts, &mut rationale);
    Ok(DichotomyReport::compose(
        cap.value,
        positivity,
        bound.value,
        rationale,
    ))
}

fn decide_positivity(
    proxy: f64,
    opts: &DichotomyOptions,
    rationale: &mut Vec<String>,
) -> SecrecyPositivity {
    if proxy > opts.tol {
        SecrecyPositivity::Positive
    } else if opts.certified_positive {
        rationale.push(
            "proxy vanished but a two-message gap certificate overrides (CERTIFIED_POSITIVE)"
                .into(),
        );
        SecrecyPositivity::Positive
    } else {
        rationale.push("proxy vanished: not certified zero".into());
        SecrecyPositivity::ZeroProxy
    }
}

// ---------------------------------------------------------------------------
// Concatenated wiretap ID codes
// ---------------------------------------------------------------------------

/// Capacity-scaling bookkeeping for a concatenated code: with outer size
/// M' = 2^{n(C - eps)}, the construction guarantees families of size
/// log log N about n(C - eps) + log2(lambda * sqrt(n) * eps - 1).
#[derive(Debug, Clone)]
pub struct ImpliedRate {
    pub capacity: f64,
    pub epsilon: f64,
    /// log2 log2 of the guaranteed family size, when the existence factor
    /// lambda sqrt(n) eps - 1 is positive.
    pub loglog_bound: Option<f64>,
}

/// Two-layer wiretap identification code: an outer transmission code of
/// length n, an inner wiretap transmission code of length ceil(sqrt(n)),
/// and N random colorings gluing them together.
#[derive(Debug, Clone)]
pub struct WiretapIdCode {
    outer: TransmissionCode,
    inner: TransmissionCode,
    mu_inner: f64,
    colorings: Vec<Vec<usize>>,
    code: IdCode,
    mu: f64,
    mu_exact: bool,
    implied: ImpliedRate,
}

impl WiretapIdCode {
    pub fn outer(&self) -> &TransmissionCode {
        &self.outer
    }

    pub fn inner(&self) -> &TransmissionCode {
        &self.inner
    }

    /// Eavesdropper distinguishability of the inner code's words.
    pub fn mu_inner(&self) -> f64 {
        self.mu_inner
    }

    pub fn colorings(&self) -> &[Vec<usize>] {
        &self.colorings
    }

    /// The assembled ID code (encodings Q_i and verifiers D_i) with the
    /// legal-side errors recorded.
    pub fn code(&self) -> &IdCode {
        &self.code
    }

    pub fn lambda1(&self) -> f64 {
        self.code.lambda1()
    }

    pub fn lambda2(&self) -> f64 {
        self.code.lambda2()
    }

    /// Worst-case eavesdropper distinguishability over message pairs.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn mu_exact(&self) -> bool {
        self.mu_exact
    }

    pub fn implied(&self) -> &ImpliedRate {
        &self.implied
    }
}

#[derive(Debug, Clone)]
pub struct WiretapIdOptions {
    /// Outer block length n; the inner block length is ceil(sqrt(n)).
    pub outer_length: usize,
    pub outer_size: usize,
    pub inner_size: usize,
    pub messages: usize,
    pub seed: u64,
    pub attempts: usize,
    /// Tolerance of the capacity solve used for the implied-rate report.
    pub capacity_tol: f64,
}

impl WiretapIdOptions {
    pub fn new(
        outer_length: usize,
        outer_size: usize,
        inner_size: usize,
        messages: usize,
        seed: u64,
    ) -> Self {
        WiretapIdOptions {
            outer_length,
            outer_size,
            inner_size,
            messages,
            seed,
            attempts: 4,
            capacity_tol: 1e-4,
        }
    }
}

/// Builds the concatenated wiretap ID code for a point or compound pair:
/// outer transmission code over the legal family, inner wiretap code of
/// length ceil(sqrt(n)) with measured eavesdropper level, N uniformly
/// random colorings T_i: [M'] -> [M''], encodings Q_i uniform over the
/// concatenations u'_j u''_{T_i(j)} and verifiers
/// D_i = sum_j D'_j tensor D''_{T_i(j)}. All three error figures are then
/// evaluated exactly.
pub fn build_wiretap_id_code(
    wp: &WiretapPair,
    opts: &WiretapIdOptions,
    guards: &Guards,
) -> Result<WiretapIdCode> {
    if wp.flavour() == WiretapFlavour::Avc {
        return Err(SecrecyError::ComponentCodeFailure(
            "the concatenated construction targets point or compound pairs".into(),
        ));
    }
    let n = opts.outer_length;
    let n_inner = (n as f64).sqrt().ceil() as usize;
    let total_len = n + n_inner;
    crate::channel::guarded_power(wp.legal().out_dim(), total_len, guards)?;

    let legal = wp.legal();
    let mut outer_opts = TransmissionCodeOptions::new(n, opts.outer_size, opts.seed);
    outer_opts.attempts = opts.attempts;
    outer_opts.capacity_tol = opts.capacity_tol;
    let outer = build_transmission_code(legal, &outer_opts, guards)
        .map_err(|e| SecrecyError::ComponentCodeFailure(format!("outer code: {e}")))?;

    let mut inner_opts =
        TransmissionCodeOptions::new(n_inner, opts.inner_size, opts.seed.wrapping_add(1));
    inner_opts.attempts = opts.attempts;
    inner_opts.capacity_tol = opts.capacity_tol;
    let inner = build_transmission_code(legal, &inner_opts, guards)
        .map_err(|e| SecrecyError::ComponentCodeFailure(format!("inner code: {e}")))?;

    assemble_wiretap_id_code(wp, outer, inner, opts, guards)
}

/// Assembly half of the construction, reusable with prebuilt component
/// codes. Rejects inner codes whose length is not ceil(sqrt(n)).
pub fn assemble_wiretap_id_code(
    wp: &WiretapPair,
    outer: TransmissionCode,
    inner: TransmissionCode,
    opts: &WiretapIdOptions,
    guards: &Guards,
) -> Result<WiretapIdCode> {
    let m_outer = outer.size();
    let m_inner = inner.size();
    use rand::RngExt;
    let mut rng = sampling::derived_rng(opts.seed, 0xc01);
    let colorings: Vec<Vec<usize>> = (0..opts.messages)
        .map(|_| (0..m_outer).map(|_| rng.random_range(0..m_inner)).collect())
        .collect();
    assemble_with_colorings(wp, outer, inner, colorings, opts, guards)
}

/// Assembly with explicit colorings, used by the builder and by bundle
/// reconstruction.
pub fn assemble_with_colorings(
    wp: &WiretapPair,
    outer: TransmissionCode,
    inner: TransmissionCode,
    colorings: Vec<Vec<usize>>,
    opts: &WiretapIdOptions,
    guards: &Guards,
) -> Result<WiretapIdCode> {
    let n = outer.block_length();
    let expected_inner = (n as f64).sqrt().ceil() as usize;
    if inner.block_length() != expected_inner {
        return Err(SecrecyError::ComponentCodeFailure(format!(
            "inner block length {} must be ceil(sqrt({n})) = {expected_inner}",
            inner.block_length()
        )));
    }
    let m_outer = outer.size();
    let m_inner = inner.size();
    let a = outer.alphabet_size();
    if colorings.iter().any(|t| t.len() != m_outer)
        || colorings.iter().flatten().any(|&k| k >= m_inner)
    {
        return Err(SecrecyError::ComponentCodeFailure(
            "colorings must map [M_outer] into [M_inner]".into(),
        ));
    }

    // Inner-code privacy level mu_inner over Eve's family.
    let inner_words: Vec<SparseInputDistribution> = inner.codewords().to_vec();
    let mu_inner_report = eavesdropper_distinguishability(
        &inner_words,
        wp.eve(),
        EvaluationMode::Compound,
        guards,
        0,
        opts.seed,
    )?;

    // Concatenated encodings and product verifiers.
    let mut pairs = Vec::with_capacity(colorings.len());
    let share = 1.0 / m_outer as f64;
    for coloring in &colorings {
        let mut support = Vec::with_capacity(m_outer);
        for (j, color) in coloring.iter().enumerate() {
            // Point-mass outer and inner codewords concatenate directly.
            let mut word = outer.codeword(j).support()[0].0.clone();
            word.extend_from_slice(&inner.codeword(*color).support()[0].0);
            support.push((word, share));
        }
        let q = SparseInputDistribution::new(n + inner.block_length(), a, support)?;

        let dim = outer.decoder().dim() * inner.decoder().dim();
        let mut d = ComplexMatrix::zeros(dim, dim);
        for (j, color) in coloring.iter().enumerate() {
            let block = outer
                .decoder()
                .element(j)
                .matrix()
                .kron(inner.decoder().element(*color).matrix());
            d = d.add(&block);
        }
        pairs.push((q, PovmElement::new(d)?));
    }

    // Simultaneity witness: the product POVM (E'_j tensor E''_k) with sets
    // {(j, T_i(j))}.
    let mut base_elements = Vec::with_capacity(m_outer * m_inner);
    for j in 0..m_outer {
        for k in 0..m_inner {
            base_elements.push(PovmElement::new(
                outer
                    .decoder()
                    .element(j)
                    .matrix()
                    .kron(inner.decoder().element(k).matrix()),
            )?);
        }
    }
    let witness = IdWitness {
        base: Povm::new(base_elements)?,
        sets: colorings
            .iter()
            .map(|t| {
                t.iter()
                    .enumerate()
                    .map(|(j, &k)| j * m_inner + k)
                    .collect()
            })
            .collect(),
    };

    let mut code = IdCode::from_parts(n + inner.block_length(), a, pairs, Some(witness), 0.0, 0.0)?;
    let legal_report = evaluate_id_errors(
        &code,
        wp.legal(),
        EvaluationMode::Compound,
        guards,
        0,
        opts.seed,
    )?;
    code.set_recorded_errors(legal_report.lambda1, legal_report.lambda2);

    // Eavesdropper level of the assembled encodings; exact over all
    // message pairs up to 128 messages, sampled with a coverage flag above.
    let encodings: Vec<SparseInputDistribution> =
        code.pairs().iter().map(|(q, _)| q.clone()).collect();
    let (mu_report, mu_exact) = if colorings.len() <= 128 {
        (
            eavesdropper_distinguishability(
                &encodings,
                wp.eve(),
                EvaluationMode::Compound,
                guards,
                0,
                opts.seed,
            )?,
            true,
        )
    } else {
        let sampled: Vec<SparseInputDistribution> = encodings.iter().take(128).cloned().collect();
        (
            eavesdropper_distinguishability(
                &sampled,
                wp.eve(),
                EvaluationMode::Compound,
                guards,
                0,
                opts.seed,
            )?,
            false,
        )
    };

    // Implied epsilon from M' = 2^{n(C - eps)} and the proof's guaranteed
    // family size: log2 log2 N = log2 M' + log2(lambda sqrt(n) eps - 1)
    // whenever the existence factor is positive.
    let cap = compound_capacity(wp.legal(), opts.capacity_tol)?;
    let epsilon = cap.value - (m_outer as f64).log2() / n as f64;
    let lambda = legal_report.lambda1.max(legal_report.lambda2);
    let factor = lambda * (n as f64).sqrt() * epsilon - 1.0;
    let loglog_bound = if factor > 0.0 {
        Some(((m_outer as f64).log2() + factor.log2()) / n as f64)
    } else {
        None
    };

    Ok(WiretapIdCode {
        outer,
        inner,
        mu_inner: mu_inner_report.mu,
        colorings,
        code,
        mu: mu_report.mu,
        mu_exact,
        implied: ImpliedRate {
            capacity: cap.value,
            epsilon,
            loglog_bound,
        },
    })
}

// ---------------------------------------------------------------------------
// Collision statistics
// ---------------------------------------------------------------------------

/// Color collisions between two colorings: Psi_j = 1 iff T_i(j) = T_i'(j).
#[derive(Debug, Clone)]
pub struct CollisionReport {
    /// Per-slot collision indicators.
    pub psi: Vec<bool>,
    pub collisions: usize,
    pub empirical_mean: f64,
    /// E Psi_j = 1 / M''.
    pub expected_mean: f64,
    /// Exact binomial tail P[sum Psi_j > M' lambda] for the plugged lambda.
    pub tail_probability: f64,
    /// The existence inequality (N - 1) * tail < 1.
    pub existence_check: bool,
}

/// Exact binomial upper tail `P[X > threshold]`, X ~ Bin(n, p).
pub fn binomial_tail_gt(n: usize, p: f64, threshold: f64) -> f64 {
    let ln_fact: Vec<f64> = {
        let mut v = vec![0.0_f64; n + 1];
        for k in 1..=n {
            v[k] = v[k - 1] + (k as f64).ln();
        }
        v
    };
    let mut tail = 0.0;
    for k in 0..=n {
        if (k as f64) > threshold {
            let ln_term = ln_fact[n] - ln_fact[k] - ln_fact[n - k]
                + k as f64 * p.ln()
                + (n - k) as f64 * (1.0 - p).ln();
            tail += ln_term.exp();
        }
    }
    tail.min(1.0)
}

pub fn collision_statistics(
    code: &WiretapIdCode,
    i: usize,
    i_prime: usize,
    lambda: f64,
) -> Result<CollisionReport> {
    let colorings = code.colorings();
    if i >= colorings.len() || i_prime >= colorings.len() {
        return Err(SecrecyError::ComponentCodeFailure(format!(
            "coloring pair ({i}, {i_prime}) outside 0..{}",
            colorings.len()
        )));
    }
    let m_outer = code.outer().size();
    let m_inner = code.inner().size();
    let psi: Vec<bool> = (0..m_outer)
        .map(|j| colorings[i][j] == colorings[i_prime][j])
        .collect();
    let collisions = psi.iter().filter(|&&b| b).count();
    let n_messages = colorings.len();
    let tail = binomial_tail_gt(m_outer, 1.0 / m_inner as f64, m_outer as f64 * lambda);
    Ok(CollisionReport {
        collisions,
        empirical_mean: collisions as f64 / m_outer as f64,
        expected_mean: 1.0 / m_inner as f64,
        psi,
        tail_probability: tail,
        existence_check: (n_messages.saturating_sub(1)) as f64 * tail < 1.0,
    })
}

// ---------------------------------------------------------------------------
// Discontinuity probes
// ---------------------------------------------------------------------------

/// Result of probing the discontinuity characterization at a wiretap pair:
/// (1) positive transmission capacity, (2) vanishing secrecy proxy,
/// (3) an arbitrarily close pair with positive proxy.
#[derive(Debug, Clone)]
pub struct DiscontinuityReport {
    pub transmission_positive: bool,
    pub transmission_capacity: f64,
    pub proxy_zero: bool,
    pub proxy_value: f64,
    /// Witness for condition (3): the perturbed pair, its distance and its
    /// proxy value. `None` means NOT_FOUND_WITHIN_BUDGET, not a disproof.
    pub witness: Option<(WiretapPair, f64, f64)>,
    pub budget_spent: usize,
    /// All three conditions held: the pair is flagged as a discontinuity
    /// point of the secure ID capacity.
    pub discontinuity: bool,
}

fn perturb_family_toward_mean(
    fam: &IndexedChannelFamily,
    beta: f64,
    jitter: f64,
    rng: &mut impl rand::Rng,
) -> Result<IndexedChannelFamily> {
    let a = fam.alphabet_size();
    let d = fam.out_dim();
    let tol = Tolerances::default();
    let mut members = Vec::with_capacity(fam.len());
    for member in fam.members() {
        // Mean output of this member.
        let mut mean = ComplexMatrix::zeros(d, d);
        for out in member.outputs() {
            mean = mean.add(&out.matrix().scale(1.0 / a as f64));
        }
        let mut outputs = Vec::with_capacity(a);
        for out in member.outputs() {
            let noise = sampling::random_hermitian(d, jitter, rng);
            let raw = out
                .matrix()
                .scale(1.0 - beta)
                .add(&mean.scale(beta))
                .add(&noise);
            // Project back to a valid state: clip the spectrum at 0 and
            // renormalize the trace.
            let sys = hermitian_eigensystem(&raw.hermitized(), &tol)?;
            let clipped = sys.apply(|l| l.max(0.0));
            let tr = clipped.trace().re;
            if tr <= 1e-9 {
                return Err(SecrecyError::ComponentCodeFailure(
                    "perturbation collapsed a state".into(),
                ));
            }
            outputs.push(DensityOperator::new(clipped.scale(1.0 / tr))?);
        }
        members.push(CqChannel::new(outputs)?);
    }
    Ok(IndexedChannelFamily::new(fam.semantics(), members)?)
}

/// Searches for condition (3) of the discontinuity characterization by
/// random local perturbations of Eve's channel: depolarization toward the
/// mean output plus Hermitian jitter, projected back to valid states.
pub fn discontinuity_probe(
    wp: &WiretapPair,
    epsilon: f64,
    search_budget: usize,
    opts: &DichotomyOptions,
) -> Result<DiscontinuityReport> {
    if epsilon <= 0.0 {
        return Err(SecrecyError::ComponentCodeFailure(
            "epsilon must be positive".into(),
        ));
    }
    let compoundish = wp.flavour() != WiretapFlavour::Point;
    let (cap_value, proxy_value) = match wp.flavour() {
        WiretapFlavour::Point => {
            let r = dichotomy_point(wp, opts)?;
            (r.transmission_capacity, r.secrecy_proxy)
        }
        WiretapFlavour::Compound => {
            let r = dichotomy_compound(wp, opts)?;
            (r.transmission_capacity, r.secrecy_proxy)
        }
        WiretapFlavour::Avc => {
            let r = dichotomy_avwc(wp, opts)?;
            (r.transmission_capacity, r.secrecy_proxy)
        }
    };
    let transmission_positive = cap_value > opts.tol;
    let proxy_zero = proxy_value <= opts.tol;

    let mut witness = None;
    let mut spent = 0usize;
    if transmission_positive && proxy_zero {
        let u_size = opts.u_size.unwrap_or_else(|| wp.alphabet_size());
        'search: for round in 0..search_budget {
            spent = round + 1;
            let mut rng = sampling::derived_rng(opts.seed, 0xd15c + round as u64);
            // Shrink the perturbation until the pair is within epsilon.
            let mut beta = 0.5_f64.min(epsilon);
            let mut jitter = epsilon / 8.0;
            for _ in 0..20 {
                let eve = perturb_family_toward_mean(wp.eve(), beta, jitter, &mut rng)?;
                let cand = WiretapPair::family(wp.flavour(), wp.legal().clone(), eve)?;
                let dist = if compoundish {
                    crate::channel::wiretap_distance(wp, &cand, &Tolerances::default())?
                } else {
                    crate::channel::wiretap_distance_point(wp, &cand, &Tolerances::default())?
                };
                if dist >= epsilon {
                    beta *= 0.5;
                    jitter *= 0.5;
                    continue;
                }
                let proxy = match wp.flavour() {
                    WiretapFlavour::Point => {
                        secrecy_lower_bound_single_letter(&cand, u_size, opts.tol, opts.seed)?
                    }
                    WiretapFlavour::Compound => {
                        compound_secrecy_lower_bound(&cand, u_size, opts.tol, opts.seed)?
                    }
                    WiretapFlavour::Avc => {
                        avwc_secrecy_lower_bound(&cand, u_size, opts.tol, opts.seed)?
                    }
                };
                if proxy.value > opts.tol {
                    witness = Some((cand, dist, proxy.value));
                    break 'search;
                }
                // Perturbation too small to open a gap; enlarge within the
                // epsilon budget.
                beta = (beta * 1.5).min(0.9);
                jitter *= 1.2;
            }
        }
    }

    Ok(DiscontinuityReport {
        transmission_positive,
        transmission_capacity: cap_value,
        proxy_zero,
        proxy_value,
        discontinuity: transmission_positive && proxy_zero && witness.is_some(),
        witness,
        budget_spent: spent,
    })
}

// ---------------------------------------------------------------------------
// Super-activation
// ---------------------------------------------------------------------------

/// Three-valued certified status of a capacity quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertifiedSign {
    PositiveCertified,
    ZeroCertified,
    Unknown,
}

impl CertifiedSign {
    pub fn label(&self) -> &'static str {
        match self {
            CertifiedSign::PositiveCertified => "POSITIVE (certified)",
            CertifiedSign::ZeroCertified => "ZERO (certified)",
            CertifiedSign::Unknown => "UNKNOWN (proxy-limited)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuperactivationVerdict {
    SuperactivationCertified,
    NoSuperactivation,
    Unknown,
}

impl SuperactivationVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            SuperactivationVerdict::SuperactivationCertified => "SUPERACTIVATION_CERTIFIED",
            SuperactivationVerdict::NoSuperactivation => "NO_SUPERACTIVATION",
            SuperactivationVerdict::Unknown => "UNKNOWN (proxy-limited)",
        }
    }
}

/// Full condition evaluation for super-activation of the secure ID
/// capacity of two AVC wiretap pairs, plus the super-additivity clause.
#[derive(Debug, Clone)]
pub struct SuperactivationReport {
    pub symmetrizable: [bool; 2],
    pub tensor_symmetrizable: bool,
    pub proxies: [f64; 2],
    pub tensor_proxy: f64,
    pub sid_status: [CertifiedSign; 2],
    pub tensor_sid_status: CertifiedSign,
    pub verdict: SuperactivationVerdict,
    /// Theorem clause on super-additivity without activation:
    /// C_SID(first) > 0, C_S(second) = 0, C_ran(second) > 0 (or swapped).
    pub superadditivity: CertifiedSign,
    pub rationale: Vec<String>,
}

fn sid_status(symmetrizable: bool, proxy: f64, tol: f64) -> CertifiedSign {
    if symmetrizable {
        // Symmetrizable legal family: both transmission and secrecy
        // capacities vanish, hence so does the secure ID capacity.
        CertifiedSign::ZeroCertified
    } else if proxy > tol {
        CertifiedSign::PositiveCertified
    } else {
        CertifiedSign::Unknown
    }
}

pub fn superactivation_check(
    wp1: &WiretapPair,
    wp2: &WiretapPair,
    opts: &DichotomyOptions,
    guards: &Guards,
) -> Result<SuperactivationReport> {
    if wp1.flavour() != WiretapFlavour::Avc || wp2.flavour() != WiretapFlavour::Avc {
        return Err(SecrecyError::ComponentCodeFailure(
            "superactivation_check requires AVC wiretap pairs".into(),
        ));
    }
    let tensor = wp1.tensor(wp2)?;
    crate::channel::guarded_power(tensor.legal().out_dim(), 1, guards)?;

    let cert1 = symmetrizability_check(wp1.legal(), opts.tol_symm)?;
    let cert2 = symmetrizability_check(wp2.legal(), opts.tol_symm)?;
    let cert_t = symmetrizability_check(tensor.legal(), opts.tol_symm)?;

    let u1 = opts.u_size.unwrap_or_else(|| wp1.alphabet_size());
    let u2 = opts.u_size.unwrap_or_else(|| wp2.alphabet_size());
    let ut = opts.u_size.unwrap_or_else(|| tensor.alphabet_size());
    let proxy1 = avwc_secrecy_lower_bound(wp1, u1, opts.tol, opts.seed)?.value;
    let proxy2 = avwc_secrecy_lower_bound(wp2, u2, opts.tol, opts.seed)?.value;
    let proxy_t = avwc_secrecy_lower_bound(&tensor, ut, opts.tol, opts.seed)?.value;

    let status1 = sid_status(cert1.symmetrizable, proxy1, opts.tol);
    let status2 = sid_status(cert2.symmetrizable, proxy2, opts.tol);
    let status_t = sid_status(cert_t.symmetrizable, proxy_t, opts.tol);

    let mut rationale = vec![
        format!(
            "factor 1: symmetrizable = {} (residual {:.2e}), secrecy proxy = {:.6} -> C_SID {}",
            cert1.symmetrizable,
            cert1.residual,
            proxy1,
            status1.label()
        ),
        format!(
            "factor 2: symmetrizable = {} (residual {:.2e}), secrecy proxy = {:.6} -> C_SID {}",
            cert2.symmetrizable,
            cert2.residual,
            proxy2,
            status2.label()
        ),
        format!(
            "tensor: symmetrizable = {} (residual {:.2e}), secrecy proxy = {:.6} -> C_SID {}",
            cert_t.symmetrizable,
            cert_t.residual,
            proxy_t,
            status_t.label()
        ),
    ];

    let verdict = if status1 == CertifiedSign::PositiveCertified
        || status2 == CertifiedSign::PositiveCertified
    {
        rationale.push(
            "a factor already has certified positive secure ID capacity: no super-activation"
                .into(),
        );
        SuperactivationVerdict::NoSuperactivation
    } else if cert_t.symmetrizable {
        rationale.push("tensor family symmetrizable: the combined secure ID capacity is 0".into());
        SuperactivationVerdict::NoSuperactivation
    } else if status1 == CertifiedSign::ZeroCertified
        && status2 == CertifiedSign::ZeroCertified
        && status_t == CertifiedSign::PositiveCertified
    {
        SuperactivationVerdict::SuperactivationCertified
    } else {
        rationale.push(format!(
            "proxy-limited clauses: factor 1 {}, factor 2 {}, tensor {}",
            status1.label(),
            status2.label(),
            status_t.label()
        ));
        SuperactivationVerdict::Unknown
    };

    // Super-additivity clause (no activation needed): C_SID(a) > 0,
    // C_S(b) = 0 certified by symmetrizability, and C_ran(b) > 0.
    let mut superadditivity = CertifiedSign::Unknown;
    for (sa, cb, wb) in [(status1, &cert2, wp2), (status2, &cert1, wp1)] {
        if sa == CertifiedSign::PositiveCertified && cb.symmetrizable {
            let c_ran = random_coding_capacity(wb.legal(), opts.tol)?;
            if c_ran.value > opts.tol {
                superadditivity = CertifiedSign::PositiveCertified;
                rationale.push(format!(
                    "super-additivity clause holds: one factor has positive secure ID capacity, \
                     the other has zero secrecy capacity but C_ran = {:.6} > 0",
                    c_ran.value
                ));
            }
        }
    }
    if superadditivity == CertifiedSign::Unknown
        && (status1 == CertifiedSign::PositiveCertified
            && status2 == CertifiedSign::PositiveCertified)
    {
        superadditivity = CertifiedSign::ZeroCertified;
        rationale.push("both factors positive: additivity, no strict super-additivity".into());
    }

    Ok(SuperactivationReport {
        symmetrizable: [cert1.symmetrizable, cert2.symmetrizable],
        tensor_symmetrizable: cert_t.symmetrizable,
        proxies: [proxy1, proxy2],
        tensor_proxy: proxy_t,
        sid_status: [status1, status2],
        tensor_sid_status: status_t,
        verdict,
        superadditivity,
        rationale,
    })
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelSemantics;
    use approx::assert_abs_diff_eq;

    fn guards() -> Guards {
        Guards::default()
    }

    fn bsc(p: f64) -> CqChannel {
        CqChannel::binary_symmetric(p).unwrap()
    }

    fn h(p: f64) -> f64 {
        binary_entropy(p).unwrap()
    }

    #[test]
    fn eavesdropper_distinguishability_cases() {
        let eve = IndexedChannelFamily::singleton(ChannelSemantics::Compound, bsc(0.2));
        let same = vec![
            SparseInputDistribution::point_mass(vec![0], 2).unwrap(),
            SparseInputDistribution::point_mass(vec![0], 2).unwrap(),
        ];
        let r =
            eavesdropper_distinguishability(&same, &eve, EvaluationMode::Compound, &guards(), 0, 0)
                .unwrap();
        assert_abs_diff_eq!(r.mu, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.helstrom_error, 0.5, epsilon = 1e-12);

        let noiseless = IndexedChannelFamily::singleton(
            ChannelSemantics::Compound,
            CqChannel::noiseless_classical(2),
        );
        let orthogonal = vec![
            SparseInputDistribution::point_mass(vec![0], 2).unwrap(),
            SparseInputDistribution::point_mass(vec![1], 2).unwrap(),
        ];
        let r = eavesdropper_distinguishability(
            &orthogonal,
            &noiseless,
            EvaluationMode::Compound,
            &guards(),
            0,
            0,
        )
        .unwrap();
        assert_abs_diff_eq!(r.mu, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lemma_bound_values() {
        assert_abs_diff_eq!(lemma3_bound(0.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(lemma3_bound(1.0).unwrap(), 1.0, epsilon = 1e-15);
        // h(0.1) by direct scalar evaluation.
        assert_abs_diff_eq!(lemma3_bound(0.2).unwrap(), h(0.1), epsilon = 1e-15);

        assert_abs_diff_eq!(lemma4_bound(0.0, 0.0).unwrap(), 1.0, epsilon = 1e-15);
        let l = 0.3;
        assert_abs_diff_eq!(lemma4_bound(l, l).unwrap(), 1.0 - h(l), epsilon = 1e-12);
        let p = 1.0 / 15.0;
        assert_abs_diff_eq!(lemma4_bound(p, p).unwrap(), 1.0 - h(p), epsilon = 1e-12);
        assert!(lemma4_bound(0.6, 0.1).is_err());
    }

    #[test]
    fn two_message_channel_cases() {
        let w = CqChannel::noiseless_classical(2);
        let p0 = SparseInputDistribution::point_mass(vec![0, 0], 2).unwrap();
        let p1 = SparseInputDistribution::point_mass(vec![1, 1], 2).unwrap();
        let ch = two_message_channel(&p0, &p1, &w, &guards()).unwrap();
        let q = ProbabilityDistribution::uniform(2);
        assert_abs_diff_eq!(holevo_information(&q, &ch).unwrap(), 1.0, epsilon = 1e-10);

        let same = two_message_channel(&p0, &p0, &w, &guards()).unwrap();
        assert_abs_diff_eq!(holevo_information(&q, &same).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn gap_test_threshold_cases() {
        // Clean split: W noiseless, V constant, lambda at the 1/15 border.
        let w = CqChannel::noiseless_classical(2);
        let v = CqChannel::constant(DensityOperator::maximally_mixed(2), 2);
        let p0 = SparseInputDistribution::point_mass(vec![0], 2).unwrap();
        let p1 = SparseInputDistribution::point_mass(vec![1], 2).unwrap();
        let wt = two_message_channel(&p0, &p1, &w, &guards()).unwrap();
        let vt = two_message_channel(&p0, &p1, &v, &guards()).unwrap();

        let lambda = 1.0 / 15.0;
        assert!(2.0 * h(lambda) <= 1.0);
        match dichotomy_gap_test(lambda, &wt, &vt, 1e-6).unwrap() {
            GapVerdict::CertifiedPositive { gap, guaranteed } => {
                assert!(gap >= guaranteed - 1e-6);
                assert_abs_diff_eq!(gap, 1.0, epsilon = 1e-9);
            }
            other => panic!("expected certification, got {other:?}"),
        }

        // lambda = 0.3: 2h(0.3) > 1, no certification possible.
        match dichotomy_gap_test(0.3, &wt, &vt, 1e-6).unwrap() {
            GapVerdict::Inconclusive { two_h_lambda, .. } => {
                assert_abs_diff_eq!(two_h_lambda, 2.0 * h(0.3), epsilon = 1e-12);
                assert!(two_h_lambda > 1.0);
            }
            other => panic!("expected inconclusive, got {other:?}"),
        }
    }

    #[test]
    fn commuting_case_matches_hand_computation() {
        let v_i = DensityOperator::classical(&[0.6, 0.4]).unwrap();
        let v_j = DensityOperator::classical(&[0.4, 0.6]).unwrap();
        let r = commuting_case_bound(&v_i, &v_j, 1e-9).unwrap();
        assert_abs_diff_eq!(r.mu, 0.2, epsilon = 1e-12);
        // I(Q;V~) = 1 - h(0.4), about 0.029; below both bounds.
        assert_abs_diff_eq!(r.info, 1.0 - h(0.4), epsilon = 1e-10);
        assert!(r.info <= r.mu + 1e-9);
        assert!(r.info <= r.h_bound + 1e-9);
        let (perp, _, _) = r.decomposition.as_ref().unwrap();
        // min state diag(0.4, 0.4) normalized.
        assert!(
            perp.matrix()
                .max_entry_diff(&ComplexMatrix::diagonal(&[0.5, 0.5]))
                < 1e-12
        );
        assert!(r.reconstruction_error < 1e-12);
    }

    #[test]
    fn commuting_case_handles_degenerate_rotated_bases() {
        // Commuting pair sharing a random eigenbasis, with a degenerate
        // cluster in the first operator that the second one splits: the
        // joint diagonalization must refine inside the cluster.
        let mut rng = crate::sampling::rng_from_seed(47);
        let u = crate::sampling::random_unitary(3, &mut rng);
        let assemble = |diag: &[f64]| {
            DensityOperator::new(
                u.matmul(&ComplexMatrix::diagonal(diag))
                    .matmul(&u.dagger())
                    .hermitized(),
            )
            .unwrap()
        };
        let v_i = assemble(&[0.4, 0.4, 0.2]);
        let v_j = assemble(&[0.5, 0.25, 0.25]);
        let r = commuting_case_bound(&v_i, &v_j, 1e-9).unwrap();
        // Pairings in the common basis: (0.4, 0.5), (0.4, 0.25),
        // (0.2, 0.25); mu = (0.1 + 0.15 + 0.05) / 2.
        assert_abs_diff_eq!(r.mu, 0.15, epsilon = 1e-9);
        assert!(r.reconstruction_error <= 1e-9);
        assert!(r.info <= r.mu + 1e-9);
    }

    #[test]
    fn commuting_case_degenerate_and_error_paths() {
        let v = DensityOperator::classical(&[0.5, 0.5]).unwrap();
        let r = commuting_case_bound(&v, &v, 1e-9).unwrap();
        assert_abs_diff_eq!(r.mu, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.info, 0.0, epsilon = 1e-12);

        let ortho_i = DensityOperator::basis(2, 0);
        let ortho_j = DensityOperator::basis(2, 1);
        let r = commuting_case_bound(&ortho_i, &ortho_j, 1e-9).unwrap();
        assert_abs_diff_eq!(r.mu, 1.0, epsilon = 1e-12);

        // Non-commuting pair rejected.
        let plus = DensityOperator::pure(&[
            crate::linalg::Complex64::new(1.0, 0.0),
            crate::linalg::Complex64::new(1.0, 0.0),
        ])
        .unwrap();
        match commuting_case_bound(&ortho_i, &plus, 1e-9) {
            Err(SecrecyError::NotCommuting { .. }) => {}
            other => panic!("expected NotCommuting, got {other:?}"),
        }
    }

    #[test]
    fn dichotomy_point_cases() {
        // Noiseless W, constant V: secure ID capacity 1.
        let w = CqChannel::noiseless_classical(2);
        let v = CqChannel::constant(DensityOperator::maximally_mixed(2), 2);
        let wp = WiretapPair::point(w.clone(), v).unwrap();
        let r = dichotomy_point(&wp, &DichotomyOptions::default()).unwrap();
        assert_eq!(r.secrecy_positive, SecrecyPositivity::Positive);
        assert_abs_diff_eq!(r.sid_capacity, 1.0, epsilon = 1e-5);

        // V = W: certified zero, secure ID capacity 0.
        let wp = WiretapPair::point(w.clone(), w).unwrap();
        let r = dichotomy_point(&wp, &DichotomyOptions::default()).unwrap();
        assert_eq!(r.secrecy_positive, SecrecyPositivity::ZeroCertified);
        assert_abs_diff_eq!(r.sid_capacity, 0.0, epsilon = 0.0);
        assert!(r.transmission_capacity > 0.9);
    }

    #[test]
    fn dichotomy_report_invariant() {
        let w = bsc(0.1);
        let v = bsc(0.3);
        let wp = WiretapPair::point(w, v).unwrap();
        let r = dichotomy_point(&wp, &DichotomyOptions::default()).unwrap();
        assert!(r.sid_capacity == 0.0 || (r.sid_capacity - r.transmission_capacity).abs() < 1e-12);
        assert_eq!(r.secrecy_positive, SecrecyPositivity::Positive);
    }

    fn adder_avc() -> IndexedChannelFamily {
        // Jammer adds its bit: y = x + t in {0, 1, 2}. Symmetrizable with
        // tau(t|x) = [t = x], yet every hull member stays informative.
        let e = |k: usize| DensityOperator::basis(3, k);
        let w0 = CqChannel::new(vec![e(0), e(1)]).unwrap();
        let w1 = CqChannel::new(vec![e(1), e(2)]).unwrap();
        IndexedChannelFamily::new(ChannelSemantics::Avc, vec![w0, w1]).unwrap()
    }

    fn constant_eve(alphabet: usize, dim: usize) -> IndexedChannelFamily {
        IndexedChannelFamily::singleton(
            ChannelSemantics::Avc,
            CqChannel::constant(DensityOperator::maximally_mixed(dim), alphabet),
        )
    }

    #[test]
    fn dichotomy_avwc_symmetrizable_gate() {
        let wp = WiretapPair::family(WiretapFlavour::Avc, adder_avc(), constant_eve(2, 3)).unwrap();
        let r = dichotomy_avwc(&wp, &DichotomyOptions::default()).unwrap();
        // Symmetrizable legal family: everything is 0 regardless of Eve.
        assert_eq!(r.secrecy_positive, SecrecyPositivity::ZeroCertified);
        assert_abs_diff_eq!(r.sid_capacity, 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(r.transmission_capacity, 0.0, epsilon = 0.0);
    }

    #[test]
    fn wiretap_id_code_noiseless_instance() {
        let w = CqChannel::noiseless_classical(2);
        let v = CqChannel::constant(DensityOperator::maximally_mixed(2), 2);
        let wp = WiretapPair::point(w, v).unwrap();
        let opts = WiretapIdOptions::new(4, 4, 2, 3, 97);
        let code = build_wiretap_id_code(&wp, &opts, &guards()).unwrap();
        // Noiseless legal channel: zero first-kind error; constant Eve:
        // mu = 0 for both layers.
        assert_abs_diff_eq!(code.lambda1(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(code.mu(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(code.mu_inner(), 0.0, epsilon = 1e-12);
        assert!(code.mu_exact());
        // Union bound on the first kind.
        assert!(code.lambda1() <= code.outer().max_error() + code.inner().max_error() + 1e-12);
        // Inner block length is ceil(sqrt(4)) = 2.
        assert_eq!(code.inner().block_length(), 2);
    }

    #[test]
    fn wiretap_id_code_rejects_wrong_inner_length() {
        let w = CqChannel::noiseless_classical(2);
        let v = CqChannel::constant(DensityOperator::maximally_mixed(2), 2);
        let wp = WiretapPair::point(w.clone(), v).unwrap();
        let fam = IndexedChannelFamily::singleton(ChannelSemantics::Compound, w);
        let outer =
            build_transmission_code(&fam, &TransmissionCodeOptions::new(4, 4, 1), &guards())
                .unwrap();
        let bad_inner =
            build_transmission_code(&fam, &TransmissionCodeOptions::new(3, 2, 2), &guards())
                .unwrap();
        let opts = WiretapIdOptions::new(4, 4, 2, 3, 7);
        match assemble_wiretap_id_code(&wp, outer, bad_inner, &opts, &guards()) {
            Err(SecrecyError::ComponentCodeFailure(msg)) => {
                assert!(msg.contains("ceil(sqrt"));
            }
            other => panic!("expected component failure, got {other:?}"),
        }
    }

    #[test]
    fn collision_statistics_cases() {
        let w = CqChannel::noiseless_classical(2);
        let v = CqChannel::constant(DensityOperator::maximally_mixed(2), 2);
        let wp = WiretapPair::point(w, v).unwrap();
        let opts = WiretapIdOptions::new(4, 8, 2, 4, 13);
        let code = build_wiretap_id_code(&wp, &opts, &guards()).unwrap();

        // Identical colorings collide everywhere.
        let r = collision_statistics(&code, 0, 0, 0.5).unwrap();
        assert_eq!(r.collisions, 8);

        let r = collision_statistics(&code, 0, 1, 0.5).unwrap();
        assert!(r.collisions <= 8);
        assert_abs_diff_eq!(r.expected_mean, 0.5, epsilon = 1e-15);

        // Exact binomial tail against a direct small-case computation:
        // P[Bin(2, 1/2) > 1] = 1/4.
        assert_abs_diff_eq!(binomial_tail_gt(2, 0.5, 1.0), 0.25, epsilon = 1e-12);
        // P[Bin(3, 1/3) > 1] = 3*(1/3)^2*(2/3) + (1/3)^3 = 7/27.
        assert_abs_diff_eq!(
            binomial_tail_gt(3, 1.0 / 3.0, 1.0),
            7.0 / 27.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn discontinuity_probe_conditions() {
        // C(W) = 0: condition (1) fails.
        let c = CqChannel::constant(DensityOperator::maximally_mixed(2), 2);
        let wp = WiretapPair::point(c.clone(), c.clone()).unwrap();
        let r = discontinuity_probe(&wp, 0.2, 2, &DichotomyOptions::default()).unwrap();
        assert!(!r.transmission_positive);
        assert!(!r.discontinuity);

        // Positive proxy: condition (2) fails.
        let wp = WiretapPair::point(bsc(0.05), bsc(0.4)).unwrap();
        let r = discontinuity_probe(&wp, 0.2, 2, &DichotomyOptions::default()).unwrap();
        assert!(!r.proxy_zero);
        assert!(!r.discontinuity);

        // W noiseless, V = W: classic discontinuity point; the witness
        // search should find a nearby pair with positive proxy.
        let w = CqChannel::noiseless_classical(2);
        let wp = WiretapPair::point(w.clone(), w).unwrap();
        let r = discontinuity_probe(&wp, 0.5, 8, &DichotomyOptions::default()).unwrap();
        assert!(r.transmission_positive && r.proxy_zero);
        let (cand, dist, proxy) = r.witness.as_ref().expect("witness should be found");
        assert!(*dist < 0.5);
        assert!(*proxy > 1e-6);
        // Re-verify the witness claim independently.
        let re = secrecy_lower_bound_single_letter(cand, 2, 1e-6, 123).unwrap();
        assert!(re.value > 1e-6);
        assert!(r.discontinuity);
    }

    #[test]
    fn discontinuity_probe_compound_flavour() {
        // Compound pair where Eve holds a copy of the only legal member:
        // positive capacity, certified-zero secrecy, and the perturbation
        // search runs over families.
        let legal = IndexedChannelFamily::singleton(
            ChannelSemantics::Compound,
            CqChannel::noiseless_classical(2),
        );
        let wp = WiretapPair::family(WiretapFlavour::Compound, legal.clone(), legal).unwrap();
        let r = discontinuity_probe(&wp, 0.5, 8, &DichotomyOptions::default()).unwrap();
        assert!(r.transmission_positive);
        assert!(r.proxy_zero);
        if let Some((cand, dist, proxy)) = &r.witness {
            assert!(*dist < 0.5);
            assert!(*proxy > 1e-6);
            assert_eq!(cand.flavour(), WiretapFlavour::Compound);
        }
    }

    #[test]
    fn superactivation_trivial_cases() {
        let opts = DichotomyOptions::default();
        // Two copies of a pair with positive proxy: no super-activation.
        let good = WiretapPair::family(
            WiretapFlavour::Avc,
            IndexedChannelFamily::singleton(
                ChannelSemantics::Avc,
                CqChannel::noiseless_classical(2),
            ),
            constant_eve(2, 2),
        )
        .unwrap();
        let r = superactivation_check(&good, &good, &opts, &guards()).unwrap();
        assert_eq!(r.verdict, SuperactivationVerdict::NoSuperactivation);

        // Both symmetrizable swapped pairs: tensor symmetrizable, no
        // super-activation.
        let w0 = CqChannel::noiseless_classical(2);
        let w1 = CqChannel::new(vec![
            DensityOperator::basis(2, 1),
            DensityOperator::basis(2, 0),
        ])
        .unwrap();
        let swapped = IndexedChannelFamily::new(ChannelSemantics::Avc, vec![w0, w1]).unwrap();
        let sym = WiretapPair::family(WiretapFlavour::Avc, swapped, constant_eve(2, 2)).unwrap();
        let r = superactivation_check(&sym, &sym, &opts, &guards()).unwrap();
        assert!(r.symmetrizable[0] && r.symmetrizable[1]);
        assert!(r.tensor_symmetrizable);
        assert_eq!(r.verdict, SuperactivationVerdict::NoSuperactivation);
    }

    #[test]
    fn superactivation_is_symmetric_and_superadditivity_fires() {
        let opts = DichotomyOptions::default();
        // Factor A: adder AVC (symmetrizable, positive C_ran) with blind
        // Eve; factor B: noiseless bit with blind Eve (certified positive).
        let a = WiretapPair::family(WiretapFlavour::Avc, adder_avc(), constant_eve(2, 3)).unwrap();
        let b = WiretapPair::family(
            WiretapFlavour::Avc,
            IndexedChannelFamily::singleton(
                ChannelSemantics::Avc,
                CqChannel::noiseless_classical(2),
            ),
            constant_eve(2, 2),
        )
        .unwrap();
        let r_ab = superactivation_check(&a, &b, &opts, &guards()).unwrap();
        let r_ba = superactivation_check(&b, &a, &opts, &guards()).unwrap();
        assert_eq!(r_ab.verdict, r_ba.verdict);
        assert_eq!(r_ab.superadditivity, r_ba.superadditivity);
        // B is certified positive and A is symmetrizable with positive
        // C_ran: the super-additivity clause holds.
        assert_eq!(r_ab.superadditivity, CertifiedSign::PositiveCertified);
        assert_eq!(r_ab.verdict, SuperactivationVerdict::NoSuperactivation);
    }

    #[test]
    fn superactivation_candidate_desk_instance() {
        // Activation candidate: factor 1 is the adder family (symmetrizable,
        // positive secrecy proxy against a blind Eve, so its own secure ID
        // capacity is certified zero while its random-coding secrecy is
        // positive); factor 2 is non-symmetrizable with Eve holding an
        // exact copy (proxy zero, not certified). The verdict then hinges
        // on the tensor evaluation and stays proxy-limited on factor 2.
        let opts = DichotomyOptions::default();
        let factor1 =
            WiretapPair::family(WiretapFlavour::Avc, adder_avc(), constant_eve(2, 3)).unwrap();
        let copycat = IndexedChannelFamily::singleton(ChannelSemantics::Avc, bsc(0.1));
        let factor2 = WiretapPair::family(WiretapFlavour::Avc, copycat.clone(), copycat).unwrap();

        let r = superactivation_check(&factor1, &factor2, &opts, &guards()).unwrap();
        assert!(r.symmetrizable[0]);
        assert!(r.proxies[0] > opts.tol, "factor 1 proxy {}", r.proxies[0]);
        assert!(!r.symmetrizable[1]);
        assert!(r.proxies[1] <= opts.tol, "factor 2 proxy {}", r.proxies[1]);
        assert_eq!(r.sid_status[0], CertifiedSign::ZeroCertified);
        assert_eq!(r.sid_status[1], CertifiedSign::Unknown);
        // Tensor: Eve sees the second component perfectly but is blind on
        // the first, so the tensor proxy inherits the adder's positive
        // random-coding secrecy.
        assert!(!r.tensor_symmetrizable);
        assert!(r.tensor_proxy > opts.tol, "tensor proxy {}", r.tensor_proxy);
        assert_eq!(r.tensor_sid_status, CertifiedSign::PositiveCertified);
        // Factor 2's secrecy zero is not certifiable, so the composed
        // verdict is honest UNKNOWN rather than a certificate.
        assert_eq!(r.verdict, SuperactivationVerdict::Unknown);
    }
}
