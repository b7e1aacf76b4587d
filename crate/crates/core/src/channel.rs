//! Channel data structures: point, compound and arbitrarily varying
//! cq-channels, wiretap pairs, memoryless extensions and channel distance
//! metrics.
//!
//! A note on the two trace-norm conventions: the state-level
//! [`trace_distance`](crate::linalg::trace_distance) is halved,
//! (1/2)||rho - sigma||_1, as it appears in the secrecy conditions, while
//! the channel distance [`channel_distance`] uses the full, unhalved
//! trace norm max_x ||W(x) - W~(x)||_1. Both are exposed deliberately;
//! do not mix them up.

use thiserror::Error;

use crate::linalg::{
    hermitian_trace_norm, ComplexMatrix, DensityOperator, LinalgError, ProbabilityDistribution,
    Tolerances,
};
use crate::Guards;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("total output dimension {needed} exceeds the dim guard {guard}")]
    DimGuardExceeded { needed: u128, guard: usize },
    #[error("input letter {letter} outside alphabet of size {alphabet}")]
    BadLetter { letter: usize, alphabet: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("family semantics mismatch (compound vs avc)")]
    SemanticsMismatch,
    #[error("state-sequence length {state_len} differs from input length {input_len}")]
    LengthMismatch { state_len: usize, input_len: usize },
    #[error("bad state index {index} for family of size {count}")]
    BadStateIndex { index: usize, count: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, ChannelError>;

/// Checks d^n against the dim guard and returns d^n.
pub(crate) fn guarded_power(d: usize, n: usize, guards: &Guards) -> Result<usize> {
    let mut total: u128 = 1;
    for _ in 0..n {
        total *= d as u128;
        if total > guards.dim_guard as u128 {
            return Err(ChannelError::DimGuardExceeded {
                needed: total,
                guard: guards.dim_guard,
            });
        }
    }
    Ok(total as usize)
}

// ---------------------------------------------------------------------------
// CqChannel
// ---------------------------------------------------------------------------

/// A discrete classical-quantum channel: finite input alphabet, one output
/// state per letter.
#[derive(Debug, Clone, PartialEq)]
pub struct CqChannel {
    out_dim: usize,
    outputs: Vec<DensityOperator>,
}

impl CqChannel {
    pub fn new(outputs: Vec<DensityOperator>) -> Result<Self> {
        let out_dim = outputs
            .first()
            .ok_or_else(|| ChannelError::ShapeMismatch("channel needs at least one letter".into()))?
            .dim();
        if let Some(bad) = outputs.iter().find(|o| o.dim() != out_dim) {
            return Err(ChannelError::ShapeMismatch(format!(
                "output dims differ: {} vs {}",
                out_dim,
                bad.dim()
            )));
        }
        Ok(CqChannel { out_dim, outputs })
    }

    /// Classical channel embedded as diagonal states: row x of the
    /// stochastic matrix becomes diag(row).
    pub fn classical(rows: &[Vec<f64>]) -> Result<Self> {
        let outputs = rows
            .iter()
            .map(|r| DensityOperator::classical(r))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(outputs)
    }

    /// Binary symmetric channel embedding with flip probability `p`.
    pub fn binary_symmetric(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(LinalgError::DomainError {
                what: "flip probability",
                value: p,
            }
            .into());
        }
        Self::classical(&[vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Noiseless classical channel on `a` letters: x maps to |x><x|.
    pub fn noiseless_classical(a: usize) -> Self {
        let outputs = (0..a).map(|x| DensityOperator::basis(a, x)).collect();
        CqChannel {
            out_dim: a,
            outputs,
        }
    }

    /// Channel that ignores its input.
    pub fn constant(state: DensityOperator, alphabet: usize) -> Self {
        CqChannel {
            out_dim: state.dim(),
            outputs: vec![state; alphabet],
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.outputs.len()
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn output(&self, x: usize) -> Result<&DensityOperator> {
        self.outputs.get(x).ok_or(ChannelError::BadLetter {
            letter: x,
            alphabet: self.outputs.len(),
        })
    }

    pub fn outputs(&self) -> &[DensityOperator] {
        &self.outputs
    }

    /// W(x^n) = W(x_1) tensor ... tensor W(x_n).
    pub fn output_state(&self, x_seq: &[usize], guards: &Guards) -> Result<DensityOperator> {
        if x_seq.is_empty() {
            return Err(ChannelError::ShapeMismatch("empty input string".into()));
        }
        guarded_power(self.out_dim, x_seq.len(), guards)?;
        let mut acc = self.output(x_seq[0])?.matrix().clone();
        for &x in &x_seq[1..] {
            acc = acc.kron(self.output(x)?.matrix());
        }
        Ok(DensityOperator::from_trusted(acc))
    }

    /// Single-letter mixed output W(P) = sum_x P(x) W(x).
    pub fn output_mixture(&self, p: &ProbabilityDistribution) -> Result<DensityOperator> {
        if p.support_size() != self.alphabet_size() {
            return Err(ChannelError::ShapeMismatch(format!(
                "distribution over {} letters, alphabet has {}",
                p.support_size(),
                self.alphabet_size()
            )));
        }
        let dim = self.out_dim;
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (x, out) in self.outputs.iter().enumerate() {
            let w = p.weight(x);
            if w > 0.0 {
                acc = acc.add(&out.matrix().scale(w));
            }
        }
        Ok(DensityOperator::from_trusted(acc))
    }

    /// Block output under a sparsely supported input distribution:
    /// W(P) = sum_{x^n} P(x^n) W(x^n).
    pub fn output_under_distribution(
        &self,
        p: &SparseInputDistribution,
        guards: &Guards,
    ) -> Result<DensityOperator> {
        if p.alphabet_size() != self.alphabet_size() {
            return Err(ChannelError::ShapeMismatch(format!(
                "distribution alphabet {} vs channel alphabet {}",
                p.alphabet_size(),
                self.alphabet_size()
            )));
        }
        let dim = guarded_power(self.out_dim, p.block_length(), guards)?;
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (x_seq, w) in p.support() {
            if *w > 0.0 {
                let out = self.output_state(x_seq, guards)?;
                acc = acc.add(&out.matrix().scale(*w));
            }
        }
        Ok(DensityOperator::from_trusted(acc))
    }
}

// ---------------------------------------------------------------------------
// Indexed families
// ---------------------------------------------------------------------------

/// Whether an indexed family is read with compound semantics (one member
/// for the whole block) or AVC semantics (a member per letter, chosen by a
/// jammer).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSemantics {
    Compound,
    Avc,
}

/// Finitely indexed family of cq-channels sharing alphabet and output
/// dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedChannelFamily {
    semantics: ChannelSemantics,
    members: Vec<CqChannel>,
}

impl IndexedChannelFamily {
    pub fn new(semantics: ChannelSemantics, members: Vec<CqChannel>) -> Result<Self> {
        let first = members.first().ok_or_else(|| {
            ChannelError::ShapeMismatch("family needs at least one member".into())
        })?;
        let (a, d) = (first.alphabet_size(), first.out_dim());
        if let Some(bad) = members
            .iter()
            .find(|m| m.alphabet_size() != a || m.out_dim() != d)
        {
            return Err(ChannelError::ShapeMismatch(format!(
                "family members disagree: ({}, {}) vs ({}, {})",
                a,
                d,
                bad.alphabet_size(),
                bad.out_dim()
            )));
        }
        Ok(IndexedChannelFamily { semantics, members })
    }

    pub fn singleton(semantics: ChannelSemantics, member: CqChannel) -> Self {
        IndexedChannelFamily {
            semantics,
            members: vec![member],
        }
    }

    pub fn semantics(&self) -> ChannelSemantics {
        self.semantics
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.members[0].alphabet_size()
    }

    pub fn out_dim(&self) -> usize {
        self.members[0].out_dim()
    }

    pub fn member(&self, t: usize) -> Result<&CqChannel> {
        self.members.get(t).ok_or(ChannelError::BadStateIndex {
            index: t,
            count: self.members.len(),
        })
    }

    pub fn members(&self) -> &[CqChannel] {
        &self.members
    }

    /// Same members under the other reading.
    pub fn with_semantics(&self, semantics: ChannelSemantics) -> Self {
        IndexedChannelFamily {
            semantics,
            members: self.members.clone(),
        }
    }

    /// W_{t^n}(x^n) = W_{t_1}(x_1) tensor ... tensor W_{t_n}(x_n): the
    /// letterwise output under a jammer state sequence.
    pub fn avc_output(
        &self,
        t_seq: &[usize],
        x_seq: &[usize],
        guards: &Guards,
    ) -> Result<DensityOperator> {
        if t_seq.len() != x_seq.len() {
            return Err(ChannelError::LengthMismatch {
                state_len: t_seq.len(),
                input_len: x_seq.len(),
            });
        }
        if t_seq.is_empty() {
            return Err(ChannelError::ShapeMismatch("empty state sequence".into()));
        }
        guarded_power(self.out_dim(), x_seq.len(), guards)?;
        let mut acc = self.member(t_seq[0])?.output(x_seq[0])?.matrix().clone();
        for (&t, &x) in t_seq[1..].iter().zip(&x_seq[1..]) {
            acc = acc.kron(self.member(t)?.output(x)?.matrix());
        }
        Ok(DensityOperator::from_trusted(acc))
    }
}

/// Parallel use of two families: index set Theta1 x Theta2 and alphabet
/// X1 x X2, both flattened row-major, with Kronecker-product outputs.
pub fn tensor_families(
    f1: &IndexedChannelFamily,
    f2: &IndexedChannelFamily,
) -> Result<IndexedChannelFamily> {
    if f1.semantics() != f2.semantics() {
        return Err(ChannelError::SemanticsMismatch);
    }
    let (a1, a2) = (f1.alphabet_size(), f2.alphabet_size());
    let mut members = Vec::with_capacity(f1.len() * f2.len());
    for m1 in f1.members() {
        for m2 in f2.members() {
            let mut outputs = Vec::with_capacity(a1 * a2);
            for x1 in 0..a1 {
                for x2 in 0..a2 {
                    outputs.push(m1.outputs()[x1].tensor(&m2.outputs()[x2]));
                }
            }
            members.push(CqChannel::new(outputs)?);
        }
    }
    IndexedChannelFamily::new(f1.semantics(), members)
}

// ---------------------------------------------------------------------------
// Wiretap pairs
// ---------------------------------------------------------------------------

/// Point, compound or AVC reading of a wiretap pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WiretapFlavour {
    Point,
    Compound,
    Avc,
}

/// A legal channel family and an eavesdropper family sharing one input
/// alphabet. Point pairs are stored as singleton families.
#[derive(Debug, Clone, PartialEq)]
pub struct WiretapPair {
    flavour: WiretapFlavour,
    legal: IndexedChannelFamily,
    eve: IndexedChannelFamily,
}

impl WiretapPair {
    pub fn point(legal: CqChannel, eve: CqChannel) -> Result<Self> {
        if legal.alphabet_size() != eve.alphabet_size() {
            return Err(ChannelError::ShapeMismatch(format!(
                "legal alphabet {} vs eve alphabet {}",
                legal.alphabet_size(),
                eve.alphabet_size()
            )));
        }
        Ok(WiretapPair {
            flavour: WiretapFlavour::Point,
            legal: IndexedChannelFamily::singleton(ChannelSemantics::Compound, legal),
            eve: IndexedChannelFamily::singleton(ChannelSemantics::Compound, eve),
        })
    }

    pub fn family(
        flavour: WiretapFlavour,
        legal: IndexedChannelFamily,
        eve: IndexedChannelFamily,
    ) -> Result<Self> {
        if legal.alphabet_size() != eve.alphabet_size() {
            return Err(ChannelError::ShapeMismatch(format!(
                "legal alphabet {} vs eve alphabet {}",
                legal.alphabet_size(),
                eve.alphabet_size()
            )));
        }
        match flavour {
            WiretapFlavour::Point => {
                if legal.len() != 1 || eve.len() != 1 {
                    return Err(ChannelError::ShapeMismatch(
                        "point wiretap pair requires singleton families".into(),
                    ));
                }
            }
            WiretapFlavour::Compound => {
                if legal.semantics() != ChannelSemantics::Compound
                    || eve.semantics() != ChannelSemantics::Compound
                {
                    return Err(ChannelError::SemanticsMismatch);
                }
            }
            WiretapFlavour::Avc => {
                if legal.semantics() != ChannelSemantics::Avc
                    || eve.semantics() != ChannelSemantics::Avc
                {
                    return Err(ChannelError::SemanticsMismatch);
                }
            }
        }
        Ok(WiretapPair {
            flavour,
            legal,
            eve,
        })
    }

    pub fn flavour(&self) -> WiretapFlavour {
        self.flavour
    }

    pub fn legal(&self) -> &IndexedChannelFamily {
        &self.legal
    }

    pub fn eve(&self) -> &IndexedChannelFamily {
        &self.eve
    }

    pub fn alphabet_size(&self) -> usize {
        self.legal.alphabet_size()
    }

    /// The legal point channel; only for point pairs.
    pub fn legal_point(&self) -> &CqChannel {
        &self.legal.members()[0]
    }

    pub fn eve_point(&self) -> &CqChannel {
        &self.eve.members()[0]
    }

    /// Parallel use of two wiretap pairs of the same flavour.
    pub fn tensor(&self, other: &WiretapPair) -> Result<WiretapPair> {
        if self.flavour != other.flavour {
            return Err(ChannelError::SemanticsMismatch);
        }
        WiretapPair::family(
            self.flavour,
            tensor_families(&self.legal, &other.legal)?,
            tensor_families(&self.eve, &other.eve)?,
        )
    }
}

// ---------------------------------------------------------------------------
// Sparse input distributions
// ---------------------------------------------------------------------------

/// A probability distribution on X^n stored by its support. Code
/// distributions have small support, so the dense representation over
/// a^n strings is never materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseInputDistribution {
    block_length: usize,
    alphabet_size: usize,
    support: Vec<(Vec<usize>, f64)>,
}

impl SparseInputDistribution {
    pub fn new(
        block_length: usize,
        alphabet_size: usize,
        support: Vec<(Vec<usize>, f64)>,
    ) -> Result<Self> {
        Self::with_tolerances(block_length, alphabet_size, support, &Tolerances::default())
    }

    pub fn with_tolerances(
        block_length: usize,
        alphabet_size: usize,
        support: Vec<(Vec<usize>, f64)>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if support.is_empty() {
            return Err(ChannelError::ShapeMismatch("empty support".into()));
        }
        let mut total = 0.0;
        for (x_seq, w) in &support {
            if x_seq.len() != block_length {
                return Err(ChannelError::ShapeMismatch(format!(
                    "support string of length {} in a block-{} distribution",
                    x_seq.len(),
                    block_length
                )));
            }
            if let Some(&bad) = x_seq.iter().find(|&&x| x >= alphabet_size) {
                return Err(ChannelError::BadLetter {
                    letter: bad,
                    alphabet: alphabet_size,
                });
            }
            if !w.is_finite() || *w < -tol.prob {
                return Err(LinalgError::InvariantViolation {
                    check: "nonnegative",
                    detail: format!("weight {w:.3e}"),
                }
                .into());
            }
            total += w;
        }
        if (total - 1.0).abs() > tol.prob {
            return Err(LinalgError::InvariantViolation {
                check: "normalization",
                detail: format!("weights sum to {total:.12}"),
            }
            .into());
        }
        let support = support.into_iter().map(|(x, w)| (x, w.max(0.0))).collect();
        Ok(SparseInputDistribution {
            block_length,
            alphabet_size,
            support,
        })
    }

    /// Point mass on one string.
    pub fn point_mass(x_seq: Vec<usize>, alphabet_size: usize) -> Result<Self> {
        let n = x_seq.len();
        Self::new(n, alphabet_size, vec![(x_seq, 1.0)])
    }

    /// Uniform distribution over a list of strings.
    pub fn uniform(strings: Vec<Vec<usize>>, alphabet_size: usize) -> Result<Self> {
        if strings.is_empty() {
            return Err(ChannelError::ShapeMismatch("empty support".into()));
        }
        let n = strings[0].len();
        let w = 1.0 / strings.len() as f64;
        Self::new(
            n,
            alphabet_size,
            strings.into_iter().map(|s| (s, w)).collect(),
        )
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn support(&self) -> &[(Vec<usize>, f64)] {
        &self.support
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }
}

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

/// d(W, W~) = max_x ||W(x) - W~(x)||_1 with the full (unhalved) trace norm.
pub fn channel_distance(w: &CqChannel, w2: &CqChannel, tol: &Tolerances) -> Result<f64> {
    if w.alphabet_size() != w2.alphabet_size() || w.out_dim() != w2.out_dim() {
        return Err(ChannelError::ShapeMismatch(format!(
            "({}, {}) vs ({}, {})",
            w.alphabet_size(),
            w.out_dim(),
            w2.alphabet_size(),
            w2.out_dim()
        )));
    }
    let mut best = 0.0_f64;
    for (a, b) in w.outputs().iter().zip(w2.outputs()) {
        let diff = a.matrix().sub(b.matrix());
        best = best.max(hermitian_trace_norm(&diff, tol)?);
    }
    Ok(best)
}

/// One-sided family deviation G(F, F~) = max_t min_t' d(W_t, W~_t').
pub fn family_deviation(
    f1: &IndexedChannelFamily,
    f2: &IndexedChannelFamily,
    tol: &Tolerances,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for m1 in f1.members() {
        let mut best = f64::INFINITY;
        for m2 in f2.members() {
            best = best.min(channel_distance(m1, m2, tol)?);
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// D(F, F~) = max of the two one-sided deviations (a pseudometric on
/// finite families).
pub fn family_distance(
    f1: &IndexedChannelFamily,
    f2: &IndexedChannelFamily,
    tol: &Tolerances,
) -> Result<f64> {
    Ok(family_deviation(f1, f2, tol)?.max(family_deviation(f2, f1, tol)?))
}

/// d_S((W,V), (W~,V~)) = max{d(W,W~), d(V,V~)} for point wiretap pairs.
pub fn wiretap_distance_point(a: &WiretapPair, b: &WiretapPair, tol: &Tolerances) -> Result<f64> {
    Ok(
        channel_distance(a.legal_point(), b.legal_point(), tol)?.max(channel_distance(
            a.eve_point(),
            b.eve_point(),
            tol,
        )?),
    )
}

/// D_S((W,V), (W~,V~)) = max{D(W,W~), D(V,V~)} for family wiretap pairs.
pub fn wiretap_distance(a: &WiretapPair, b: &WiretapPair, tol: &Tolerances) -> Result<f64> {
    Ok(family_distance(a.legal(), b.legal(), tol)?.max(family_distance(a.eve(), b.eve(), tol)?))
}

// ---------------------------------------------------------------------------
