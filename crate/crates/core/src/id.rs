//! Identification codes over cq-channels: transmission-code scaffolding,
//! the low-intersection set-family construction, ID-code assembly, exact
//! first/second-kind error evaluation (compound and AVC adversaries) and
//! sequential identification by repeated binary measurements.

use rand::RngExt;
use thiserror::Error;

use crate::channel::{ChannelError, CqChannel, IndexedChannelFamily, SparseInputDistribution};
use crate::info::InfoError;
use crate::linalg::{
    psd_sqrt, Complex64, ComplexMatrix, DensityOperator, LinalgError, Povm, PovmElement,
    ProbabilityDistribution, Tolerances,
};
use crate::sampling;
use crate::Guards;

#[derive(Debug, Error)]
pub enum IdError {
    #[error(
        "no codebook reached the target error {target} in {attempts} attempts (best {best:.6})"
    )]
    NoCodeFound {
        best: f64,
        target: f64,
        attempts: usize,
    },
    #[error("lemma precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("set-family construction exhausted: found {found} of {needed} subsets within budget {budget}")]
    ConstructionExhausted {
        needed: usize,
        found: usize,
        budget: usize,
    },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("adversary enumeration needs {needed} sequences, guard is {guard}")]
    EnumerationGuardExceeded { needed: u128, guard: u64 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Info(#[from] InfoError),
}

pub type Result<T> = std::result::Result<T, IdError>;

// ---------------------------------------------------------------------------
// Transmission codes
// ---------------------------------------------------------------------------

/// An (n, M, lambda) transmission code: stochastic codewords plus an
/// M-element decoding POVM, with the exactly evaluated worst-case error.
#[derive(Debug, Clone)]
pub struct TransmissionCode {
    block_length: usize,
    alphabet_size: usize,
    codewords: Vec<SparseInputDistribution>,
    decoder: Povm,
    max_error: f64,
}

impl TransmissionCode {
    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn size(&self) -> usize {
        self.codewords.len()
    }

    pub fn codeword(&self, m: usize) -> &SparseInputDistribution {
        &self.codewords[m]
    }

    pub fn codewords(&self) -> &[SparseInputDistribution] {
        &self.codewords
    }

    pub fn decoder(&self) -> &Povm {
        &self.decoder
    }

    /// Recorded worst-case error max over messages and channel states.
    pub fn max_error(&self) -> f64 {
        self.max_error
    }

    /// Reconstructs a code from its parts, re-evaluating the worst-case
    /// error against `fam` and checking it against the recorded value.
    pub fn from_parts(
        block_length: usize,
        alphabet_size: usize,
        codewords: Vec<SparseInputDistribution>,
        decoder: Povm,
        recorded_error: f64,
        fam: &IndexedChannelFamily,
        guards: &Guards,
    ) -> Result<Self> {
        if decoder.len() != codewords.len() {
            return Err(IdError::SizeMismatch(format!(
                "{} decoder elements for {} codewords",
                decoder.len(),
                codewords.len()
            )));
        }
        let mut code = TransmissionCode {
            block_length,
            alphabet_size,
            codewords,
            decoder,
            max_error: recorded_error,
        };
        let (lambda, _) = evaluate_transmission_error(&code, fam, guards)?;
        if (lambda - recorded_error).abs() > 1e-9 {
            return Err(IdError::SizeMismatch(format!(
                "recorded error {recorded_error} does not match re-evaluation {lambda}"
            )));
        }
        code.max_error = lambda;
        Ok(code)
    }

    /// Builds the square-root-measurement code for an explicit codeword
    /// list: the decoder is the pretty good measurement for the
    /// compound-averaged codeword states, with the orthogonal remainder
    /// spread uniformly over the elements.
    pub fn from_codewords(
        fam: &IndexedChannelFamily,
        codewords: Vec<Vec<usize>>,
        guards: &Guards,
    ) -> Result<Self> {
        let m_count = codewords.len();
        if m_count == 0 {
            return Err(IdError::SizeMismatch("empty codebook".into()));
        }
        let n = codewords[0].len();
        let a = fam.alphabet_size();
        let tol = Tolerances::default();

        // Compound-averaged block states rho_m.
        let mut states = Vec::with_capacity(m_count);
        for word in &codewords {
            if word.len() != n {
                return Err(IdError::SizeMismatch("codeword lengths differ".into()));
            }
            let mut parts = Vec::with_capacity(fam.len());
            for member in fam.members() {
                parts.push(member.output_state(word, guards)?);
            }
            let weight = 1.0 / fam.len() as f64;
            let weighted: Vec<(f64, &DensityOperator)> =
                parts.iter().map(|s| (weight, s)).collect();
            states.push(DensityOperator::mixture(&weighted)?);
        }

        let dim = states[0].dim();
        let mut gram = ComplexMatrix::zeros(dim, dim);
        for s in &states {
            gram = gram.add(s.matrix());
        }
        let inv_root = crate::linalg::psd_inv_sqrt(&gram, 1e-12, &tol)?;

        let mut raw: Vec<ComplexMatrix> = states
            .iter()
            .map(|s| inv_root.matmul(s.matrix()).matmul(&inv_root).hermitized())
            .collect();
        // Spread 1 - sum E_m uniformly so the decoder is a complete POVM.
        let mut total = ComplexMatrix::zeros(dim, dim);
        for e in &raw {
            total = total.add(e);
        }
        let remainder = ComplexMatrix::identity(dim)
            .sub(&total)
            .scale(1.0 / m_count as f64);
        for e in &mut raw {
            *e = e.add(&remainder);
        }
        let elements = raw
            .into_iter()
            .map(|m| PovmElement::with_tolerances(m, &tol))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let decoder = Povm::with_tolerances(elements, &tol)?;

        let sparse = codewords
            .into_iter()
            .map(|w| SparseInputDistribution::point_mass(w, a))
            .collect::<std::result::Result<Vec<_>, _>>()?;

        let mut code = TransmissionCode {
            block_length: n,
            alphabet_size: a,
            codewords: sparse,
            decoder,
            max_error: 1.0,
        };
        let (lambda, _) = evaluate_transmission_error(&code, fam, guards)?;
        code.max_error = lambda;
        Ok(code)
    }
}

/// Worst-case transmission error max_{m, t} 1 - Tr W_t(P_m) E_m, with the
/// achieving (message, state index) witness.
pub fn evaluate_transmission_error(
    code: &TransmissionCode,
    fam: &IndexedChannelFamily,
    guards: &Guards,
) -> Result<(f64, (usize, usize))> {
    let mut worst = f64::NEG_INFINITY;
    let mut witness = (0, 0);
    for (m, word) in code.codewords.iter().enumerate() {
        for (t, member) in fam.members().iter().enumerate() {
            let out = member.output_under_distribution(word, guards)?;
            let err = 1.0 - code.decoder.element(m).probability(&out)?;
            if err > worst {
                worst = err;
                witness = (m, t);
            }
        }
    }
    Ok((worst.max(0.0), witness))
}

/// Options for the randomized transmission-code builder.
#[derive(Debug, Clone)]
pub struct TransmissionCodeOptions {
    pub block_length: usize,
    pub size: usize,
    pub seed: u64,
    /// Independent codebook draws; the best worst-case error wins, earlier
    /// attempts win ties.
    pub attempts: usize,
    /// When set, fail with NoCodeFound unless some attempt reaches it.
    pub lambda_target: Option<f64>,
    /// Letterwise sampling distribution; defaults to the compound
    /// capacity-achieving input.
    pub input_distribution: Option<ProbabilityDistribution>,
    /// Tolerance of the capacity solve used for the default distribution.
    pub capacity_tol: f64,
}

impl TransmissionCodeOptions {
    pub fn new(block_length: usize, size: usize, seed: u64) -> Self {
        TransmissionCodeOptions {
            block_length,
            size,
            seed,
            attempts: 8,
            lambda_target: None,
            input_distribution: None,
            capacity_tol: 1e-4,
        }
    }
}

/// Random-codebook constructor: draws `size` distinct codewords i.i.d.
/// letterwise from the capacity-achieving (or supplied) distribution,
/// decodes with the square-root measurement, and keeps the best of
/// `attempts` seeds by exact worst-case error.
pub fn build_transmission_code(
    fam: &IndexedChannelFamily,
    options: &TransmissionCodeOptions,
    guards: &Guards,
) -> Result<TransmissionCode> {
    let n = options.block_length;
    let a = fam.alphabet_size();
    crate::channel::guarded_power(fam.out_dim(), n, guards)?;
    let strings: f64 = (a as f64).powi(n as i32);
    if (options.size as f64) > strings {
        return Err(IdError::PreconditionViolated(format!(
            "cannot pick {} distinct codewords from {a}^{n} strings",
            options.size
        )));
    }

    let p = match &options.input_distribution {
        Some(p) => p.clone(),
        None => crate::info::compound_capacity(fam, options.capacity_tol)?.optimizer,
    };
    if p.support_size() != a {
        return Err(IdError::SizeMismatch(format!(
            "input distribution over {} letters, alphabet has {a}",
            p.support_size()
        )));
    }

    let mut best: Option<TransmissionCode> = None;
    for attempt in 0..options.attempts.max(1) {
        let mut rng = sampling::derived_rng(options.seed, attempt as u64);
        let mut words: Vec<Vec<usize>> = Vec::with_capacity(options.size);
        let mut seen = std::collections::BTreeSet::new();
        let mut draws = 0usize;
        while words.len() < options.size {
            draws += 1;
            if draws > 1000 * options.size {
                return Err(IdError::ConstructionExhausted {
                    needed: options.size,
                    found: words.len(),
                    budget: draws,
                });
            }
            let word: Vec<usize> = (0..n).map(|_| sample_letter(&p, &mut rng)).collect();
            if seen.insert(word.clone()) {
                words.push(word);
            }
        }
        let code = TransmissionCode::from_codewords(fam, words, guards)?;
        let better = match &best {
            None => true,
            Some(b) => code.max_error < b.max_error,
        };
        if better {
            best = Some(code);
        }
    }
    let code = best.expect("at least one attempt ran");
    if let Some(target) = options.lambda_target {
        if code.max_error > target {
            return Err(IdError::NoCodeFound {
                best: code.max_error,
                target,
                attempts: options.attempts.max(1),
            });
        }
    }
    Ok(code)
}

fn sample_letter(p: &ProbabilityDistribution, rng: &mut impl rand::Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (x, &w) in p.weights().iter().enumerate() {
        acc += w;
        if u < acc {
            return x;
        }
    }
    p.support_size() - 1
}

// ---------------------------------------------------------------------------
// Set families with small pairwise intersections
// ---------------------------------------------------------------------------

/// N subsets of `[M]`, each of size floor(eps*M), with every pairwise
/// intersection strictly below lambda * subset_size.
#[derive(Debug, Clone, PartialEq)]
pub struct SetFamily {
    ground_size: usize,
    subset_size: usize,
    epsilon: f64,
    lambda: f64,
    subsets: Vec<Vec<usize>>,
}

impl SetFamily {
    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn subset_size(&self) -> usize {
        self.subset_size
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subset(&self, i: usize) -> &[usize] {
        &self.subsets[i]
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// Rebuilds a family from parts, re-running the exhaustive pairwise
    /// verification.
    pub fn from_parts(
        ground_size: usize,
        epsilon: f64,
        lambda: f64,
        subsets: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let subset_size = (epsilon * ground_size as f64).floor() as usize;
        let mut sorted = Vec::with_capacity(subsets.len());
        for s in subsets {
            let mut s = s;
            s.sort_unstable();
            s.dedup();
            if s.len() != subset_size {
                return Err(IdError::SizeMismatch(format!(
                    "subset of size {} in a floor(eps*M) = {subset_size} family",
                    s.len()
                )));
            }
            if s.iter().any(|&m| m >= ground_size) {
                return Err(IdError::SizeMismatch(
                    "subset index outside ground set".into(),
                ));
            }
            sorted.push(s);
        }
        let fam = SetFamily {
            ground_size,
            subset_size,
            epsilon,
            lambda,
            subsets: sorted,
        };
        fam.verify_exhaustively()?;
        Ok(fam)
    }

    /// Checks every pair: |A_i cap A_j| < lambda * k, strictly.
    pub fn verify_exhaustively(&self) -> Result<()> {
        let bound = self.lambda * self.subset_size as f64;
        for i in 0..self.subsets.len() {
            for j in (i + 1)..self.subsets.len() {
                let inter = sorted_intersection_size(&self.subsets[i], &self.subsets[j]);
                if (inter as f64) >= bound {
                    return Err(IdError::PreconditionViolated(format!(
                        "subsets {i} and {j} intersect in {inter} >= {bound} elements"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn sorted_intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Builds a low-intersection set family by rejection sampling with greedy
/// repair, then verifies it exhaustively. Requires the hypothesis
/// lambda * log2(1/eps - 1) > 2; the caller chooses N directly instead of
/// the (astronomical) guaranteed count (1/M) * 2^floor(eps*M).
pub fn gilbert_family(
    ground_size: usize,
    epsilon: f64,
    lambda: f64,
    n_target: usize,
    seed: u64,
) -> Result<SetFamily> {
    if !(0.0 < epsilon && epsilon < 1.0) || !(0.0 < lambda && lambda < 1.0) {
        return Err(IdError::PreconditionViolated(
            "need 0 < eps < 1 and 0 < lambda < 1".into(),
        ));
    }
    let hypothesis = lambda * (1.0 / epsilon - 1.0).log2();
    if hypothesis <= 2.0 {
        return Err(IdError::PreconditionViolated(format!(
            "lambda * log2(1/eps - 1) = {hypothesis:.4} must exceed 2"
        )));
    }
    let k = (epsilon * ground_size as f64).floor() as usize;
    if k == 0 {
        return Err(IdError::PreconditionViolated(
            "floor(eps * M) is zero".into(),
        ));
    }
    let bound = lambda * k as f64;

    let mut rng = sampling::rng_from_seed(seed);
    let mut subsets: Vec<Vec<usize>> = Vec::with_capacity(n_target);
    let budget = 2000 + 200 * n_target;
    let mut spent = 0usize;
    while subsets.len() < n_target {
        if spent >= budget {
            return Err(IdError::ConstructionExhausted {
                needed: n_target,
                found: subsets.len(),
                budget,
            });
        }
        spent += 1;
        let mut candidate = random_subset(ground_size, k, &mut rng);
        // Greedy repair: resample the elements shared with the worst
        // conflicting accepted subset.
        let mut ok = false;
        for _ in 0..50 {
            let conflict = subsets
                .iter()
                .map(|s| sorted_intersection_size(s, &candidate))
                .enumerate()
                .max_by_key(|&(_, c)| c);
            match conflict {
                Some((idx, c)) if (c as f64) >= bound => {
                    let clash: Vec<usize> = subsets[idx]
                        .iter()
                        .cloned()
                        .filter(|m| candidate.binary_search(m).is_ok())
                        .collect();
                    let keep: Vec<usize> = candidate
                        .iter()
                        .cloned()
                        .filter(|m| !clash.contains(m))
                        .collect();
                    let mut rebuilt = keep;
                    while rebuilt.len() < k {
                        let m = rng.random_range(0..ground_size);
                        if !rebuilt.contains(&m) {
                            rebuilt.push(m);
                        }
                    }
                    rebuilt.sort_unstable();
                    candidate = rebuilt;
                }
                _ => {
                    ok = true;
                    break;
                }
            }
        }
        if ok
            && subsets
                .iter()
                .all(|s| (sorted_intersection_size(s, &candidate) as f64) < bound)
        {
            subsets.push(candidate);
        }
    }

    let fam = SetFamily {
        ground_size,
        subset_size: k,
        epsilon,
        lambda,
        subsets,
    };
    fam.verify_exhaustively()?;
    Ok(fam)
}

fn random_subset(ground: usize, k: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    // Floyd's algorithm for a uniform k-subset.
    let mut chosen = std::collections::BTreeSet::new();
    for j in (ground - k)..ground {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    chosen.into_iter().collect()
}

// ---------------------------------------------------------------------------
// ID codes
// ---------------------------------------------------------------------------

/// Witness that an ID code is simultaneous: a base POVM and index sets with
/// D_i = sum_{y in A_i} E_y.
#[derive(Debug, Clone)]
pub struct IdWitness {
    pub base: Povm,
    pub sets: Vec<Vec<usize>>,
}

/// An (n, N, lambda1, lambda2) identification code.
#[derive(Debug, Clone)]
pub struct IdCode {
    block_length: usize,
    alphabet_size: usize,
    pairs: Vec<(SparseInputDistribution, PovmElement)>,
    simultaneous: bool,
    witness: Option<IdWitness>,
    lambda1: f64,
    lambda2: f64,
}

impl IdCode {
    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn encoding(&self, i: usize) -> &SparseInputDistribution {
        &self.pairs[i].0
    }

    pub fn verifier(&self, i: usize) -> &PovmElement {
        &self.pairs[i].1
    }

    pub fn pairs(&self) -> &[(SparseInputDistribution, PovmElement)] {
        &self.pairs
    }

    pub fn simultaneous(&self) -> bool {
        self.simultaneous
    }

    pub fn witness(&self) -> Option<&IdWitness> {
        self.witness.as_ref()
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub(crate) fn set_recorded_errors(&mut self, lambda1: f64, lambda2: f64) {
        self.lambda1 = lambda1;
        self.lambda2 = lambda2;
    }

    /// ID rate log2 log2 N / n (desk-scale reporting convention).
    pub fn rate(&self) -> f64 {
        if self.pairs.len() < 2 {
            return 0.0;
        }
        (self.pairs.len() as f64).log2().log2() / self.block_length as f64
    }

    /// Builds an ID code from raw pieces. A witness, when given, is
    /// checked against the verifiers; the recorded errors are the caller's
    /// claim and can be recomputed with [`evaluate_id_errors`].
    pub fn from_parts(
        block_length: usize,
        alphabet_size: usize,
        pairs: Vec<(SparseInputDistribution, PovmElement)>,
        witness: Option<IdWitness>,
        lambda1: f64,
        lambda2: f64,
    ) -> Result<Self> {
        if pairs.is_empty() {
            return Err(IdError::SizeMismatch(
                "ID code needs at least one message".into(),
            ));
        }
        if let Some(w) = &witness {
            if w.sets.len() != pairs.len() {
                return Err(IdError::SizeMismatch(
                    "witness set count differs from message count".into(),
                ));
            }
            let tol = Tolerances::default();
            for (i, (_, d)) in pairs.iter().enumerate() {
                let dim = d.dim();
                let mut sum = ComplexMatrix::zeros(dim, dim);
                for &y in &w.sets[i] {
                    sum = sum.add(w.base.element(y).matrix());
                }
                if sum.max_entry_diff(d.matrix()) > tol.povm {
                    return Err(IdError::SizeMismatch(format!(
                        "verifier {i} is not the coarse-graining of the witness POVM"
                    )));
                }
            }
        }
        Ok(IdCode {
            block_length,
            alphabet_size,
            simultaneous: witness.is_some(),
            pairs,
            witness,
            lambda1,
            lambda2,
        })
    }
}

/// Assembles a simultaneous ID code from a transmission code and a set
/// family over its message set: P_i is uniform over the codewords indexed
/// by A_i, D_i the matching sum of decoder elements. Errors are evaluated
/// exactly over the compound family.
pub fn assemble_id_code(
    tc: &TransmissionCode,
    sets: &SetFamily,
    fam: &IndexedChannelFamily,
    guards: &Guards,
) -> Result<IdCode> {
    if sets.ground_size() != tc.size() {
        return Err(IdError::SizeMismatch(format!(
            "set family over {} messages, code has {}",
            sets.ground_size(),
            tc.size()
        )));
    }
    let mut pairs = Vec::with_capacity(sets.len());
    for subset in sets.subsets() {
        // Uniform mixture of the chosen stochastic codewords.
        let share = 1.0 / subset.len() as f64;
        let mut support: Vec<(Vec<usize>, f64)> = Vec::new();
        for &m in subset {
            for (word, w) in tc.codeword(m).support() {
                match support.iter_mut().find(|(s, _)| s == word) {
                    Some((_, acc)) => *acc += share * w,
                    None => support.push((word.clone(), share * w)),
                }
            }
        }
        let p = SparseInputDistribution::new(tc.block_length(), tc.alphabet_size(), support)?;

        let dim = tc.decoder().dim();
        let mut d = ComplexMatrix::zeros(dim, dim);
        for &m in subset {
            d = d.add(tc.decoder().element(m).matrix());
        }
        let d = PovmElement::new(d)?;
        pairs.push((p, d));
    }
    let witness = IdWitness {
        base: tc.decoder().clone(),
        sets: sets.subsets().to_vec(),
    };
    let mut code = IdCode::from_parts(
        tc.block_length(),
        tc.alphabet_size(),
        pairs,
        Some(witness),
        0.0,
        0.0,
    )?;
    let report = evaluate_id_errors(&code, fam, EvaluationMode::Compound, guards, 0, 0)?;
    code.lambda1 = report.lambda1;
    code.lambda2 = report.lambda2;
    Ok(code)
}

// ---------------------------------------------------------------------------
// Error evaluation
// ---------------------------------------------------------------------------

/// Adversary model for the evaluation: one channel state for the whole
/// block (compound) or a state per letter (AVC).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluationMode {
    Compound,
    Avc,
}

/// Worst-case ID errors with their achieving witnesses.
#[derive(Debug, Clone, PartialEq)]
pub struct IdErrorReport {
    /// max_i worst-case first-kind error 1 - Tr W(P_i) D_i.
    pub lambda1: f64,
    /// max_{i != j} worst-case second-kind error Tr W(P_i) D_j.
    pub lambda2: f64,
    /// (message, state sequence) achieving lambda1.
    pub witness1: (usize, Vec<usize>),
    /// (sent message, tested message, state sequence) achieving lambda2.
    pub witness2: (usize, usize, Vec<usize>),
    /// False when the adversary search was sampled rather than enumerated;
    /// sampled values are lower bounds on the worst case.
    pub exact: bool,
}

/// Tr[(B_1 tensor ... tensor B_n) D] by contracting D one site at a time,
/// without materializing the product state.
fn tensor_trace_product(letters: &[&ComplexMatrix], dmat: &ComplexMatrix) -> Complex64 {
    let mut cur = dmat.entries().to_vec();
    let mut dim = dmat.rows();
    for b in letters.iter().rev() {
        let d = b.rows();
        let new_dim = dim / d;
        let mut next = vec![Complex64::new(0.0, 0.0); new_dim * new_dim];
        for r in 0..new_dim {
            for c in 0..new_dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for a_idx in 0..d {
                    let row = r * d + a_idx;
                    for b_idx in 0..d {
                        acc += b.get(b_idx, a_idx) * cur[row * dim + c * d + b_idx];
                    }
                }
                next[r * new_dim + c] = acc;
            }
        }
        cur = next;
        dim = new_dim;
    }
    cur[0]
}

/// Success probability table: for a fixed adversary sequence, the values
/// Tr W_{t^n}(P_i) D_j for all (i, j).
fn acceptance_table(
    code: &IdCode,
    fam: &IndexedChannelFamily,
    t_seq: &[usize],
) -> Result<Vec<Vec<f64>>> {
    let n = code.len();
    let mut table = vec![vec![0.0; n]; n];
    for (i, (p, _)) in code.pairs().iter().enumerate() {
        for (word, w) in p.support() {
            if *w <= 0.0 {
                continue;
            }
            let letters: Vec<&ComplexMatrix> = word
                .iter()
                .zip(t_seq)
                .map(|(&x, &t)| Ok(fam.member(t)?.output(x)?.matrix()))
                .collect::<Result<Vec<_>>>()?;
            for j in 0..n {
                let val = tensor_trace_product(&letters, code.verifier(j).matrix()).re;
                table[i][j] += w * val;
            }
        }
    }
    Ok(table)
}

struct AdversaryExtremes {
    /// Per message i: minimal acceptance Tr W(P_i) D_i and its sequence.
    min_accept: Vec<(f64, Vec<usize>)>,
    /// Per ordered pair (i, j): maximal confusion Tr W(P_i) D_j.
    max_confuse: Vec<Vec<(f64, Vec<usize>)>>,
}

fn new_extremes(n: usize) -> AdversaryExtremes {
    AdversaryExtremes {
        min_accept: vec![(f64::INFINITY, Vec::new()); n],
        max_confuse: vec![vec![(f64::NEG_INFINITY, Vec::new()); n]; n],
    }
}

fn absorb_table(ext: &mut AdversaryExtremes, table: &[Vec<f64>], seq: &[usize]) {
    let n = table.len();
    for i in 0..n {
        if table[i][i] < ext.min_accept[i].0 {
            ext.min_accept[i] = (table[i][i], seq.to_vec());
        }
        for j in 0..n {
            if i != j && table[i][j] > ext.max_confuse[i][j].0 {
                ext.max_confuse[i][j] = (table[i][j], seq.to_vec());
            }
        }
    }
}

fn extremes_to_report(ext: AdversaryExtremes, exact: bool) -> IdErrorReport {
    let n = ext.min_accept.len();
    let mut lambda1 = f64::NEG_INFINITY;
    let mut witness1 = (0, Vec::new());
    for (i, (acc, seq)) in ext.min_accept.iter().enumerate() {
        let err = 1.0 - acc;
        if err > lambda1 {
            lambda1 = err;
            witness1 = (i, seq.clone());
        }
    }
    let mut lambda2 = f64::NEG_INFINITY;
    let mut witness2 = (0, 0, Vec::new());
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let (v, seq) = &ext.max_confuse[i][j];
                if *v > lambda2 {
                    lambda2 = *v;
                    witness2 = (i, j, seq.clone());
                }
            }
        }
    }
    IdErrorReport {
        lambda1: lambda1.clamp(0.0, 1.0),
        lambda2: lambda2.clamp(0.0, 1.0),
        witness1,
        witness2,
        exact,
    }
}

fn index_to_sequence(mut idx: u128, base: usize, len: usize) -> Vec<usize> {
    let mut seq = vec![0usize; len];
    for pos in (0..len).rev() {
        seq[pos] = (idx % base as u128) as usize;
        idx /= base as u128;
    }
    seq
}

/// Exact (or, beyond the enumeration guard, sampled-and-flagged) worst-case
/// ID error evaluation.
///
/// Compound mode enumerates the index set; AVC mode enumerates all |Theta|^n
/// state sequences when that count is within the enumeration guard,
/// otherwise falls back to seeded random search plus greedy coordinate
/// ascent and reports `exact = false` (a lower bound on the worst case).
pub fn evaluate_id_errors(
    code: &IdCode,
    fam: &IndexedChannelFamily,
    mode: EvaluationMode,
    guards: &Guards,
    sample_budget: usize,
    seed: u64,
) -> Result<IdErrorReport> {
    crate::channel::guarded_power(fam.out_dim(), code.block_length(), guards)?;
    let n_msgs = code.len();
    let mut ext = new_extremes(n_msgs);
    match mode {
        EvaluationMode::Compound => {
            for t in 0..fam.len() {
                let seq = vec![t; code.block_length()];
                // Constant sequence == memoryless member channel; recorded
                // witness is the single index.
                let table = acceptance_table(code, fam, &seq)?;
                absorb_table(&mut ext, &table, &[t]);
            }
            Ok(extremes_to_report(ext, true))
        }
        EvaluationMode::Avc => {
            let n = code.block_length();
            let total = (fam.len() as u128).checked_pow(n as u32).ok_or(
                IdError::EnumerationGuardExceeded {
                    needed: u128::MAX,
                    guard: guards.enumeration_guard,
                },
            )?;
            if total <= guards.enumeration_guard as u128 {
                enumerate_adversary(code, fam, total, n, guards.threads, &mut ext)?;
                Ok(extremes_to_report(ext, true))
            } else {
                sampled_adversary(code, fam, n, sample_budget.max(64), seed, &mut ext)?;
                Ok(extremes_to_report(ext, false))
            }
        }
    }
}

fn enumerate_adversary(
    code: &IdCode,
    fam: &IndexedChannelFamily,
    total: u128,
    n: usize,
    threads: usize,
    ext: &mut AdversaryExtremes,
) -> Result<()> {
    let workers = threads.max(1).min(total as usize);
    if workers <= 1 {
        for idx in 0..total {
            let seq = index_to_sequence(idx, fam.len(), n);
            let table = acceptance_table(code, fam, &seq)?;
            absorb_table(ext, &table, &seq);
        }
        return Ok(());
    }
    let chunk = total / workers as u128 + 1;
    let results: Vec<Result<AdversaryExtremes>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let lo = chunk * w as u128;
            let hi = (lo + chunk).min(total);
            handles.push(scope.spawn(move || -> Result<AdversaryExtremes> {
                let mut local = new_extremes(code.len());
                for idx in lo..hi {
                    let seq = index_to_sequence(idx, fam.len(), n);
                    let table = acceptance_table(code, fam, &seq)?;
                    absorb_table(&mut local, &table, &seq);
                }
                Ok(local)
            }));
        }
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    // Merge in chunk order: strict comparisons keep the lexicographically
    // first witness deterministic regardless of the worker count.
    for r in results {
        let local = r?;
        for i in 0..code.len() {
            if local.min_accept[i].0 < ext.min_accept[i].0 {
                ext.min_accept[i] = local.min_accept[i].clone();
            }
            for j in 0..code.len() {
                if local.max_confuse[i][j].0 > ext.max_confuse[i][j].0 {
                    ext.max_confuse[i][j] = local.max_confuse[i][j].clone();
                }
            }
        }
    }
    Ok(())
}

fn sampled_adversary(
    code: &IdCode,
    fam: &IndexedChannelFamily,
    n: usize,
    budget: usize,
    seed: u64,
    ext: &mut AdversaryExtremes,
) -> Result<()> {
    let mut rng = sampling::rng_from_seed(seed);
    let t_count = fam.len();
    let mut seqs: Vec<Vec<usize>> = Vec::with_capacity(budget);
    for t in 0..t_count {
        seqs.push(vec![t; n]);
    }
    while seqs.len() < budget {
        seqs.push((0..n).map(|_| rng.random_range(0..t_count)).collect());
    }
    for seq in &seqs {
        let table = acceptance_table(code, fam, seq)?;
        absorb_table(ext, &table, seq);
    }
    // Greedy coordinate ascent from the current worst witnesses.
    let starts: Vec<Vec<usize>> = ext
        .min_accept
        .iter()
        .map(|(_, s)| s.clone())
        .chain(
            ext.max_confuse
                .iter()
                .flatten()
                .filter(|(v, _)| v.is_finite())
                .map(|(_, s)| s.clone()),
        )
        .filter(|s| !s.is_empty())
        .collect();
    for start in starts {
        let mut seq = start;
        for _ in 0..4 {
            let mut improved = false;
            for pos in 0..n {
                let original = seq[pos];
                for t in 0..t_count {
                    if t == original {
                        continue;
                    }
                    seq[pos] = t;
                    let table = acceptance_table(code, fam, &seq)?;
                    let before = snapshot_extremes(ext);
                    absorb_table(ext, &table, &seq);
                    if snapshot_extremes(ext) != before {
                        improved = true;
                    } else {
                        seq[pos] = original;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    Ok(())
}

fn snapshot_extremes(ext: &AdversaryExtremes) -> Vec<u64> {
    let mut v: Vec<u64> = ext.min_accept.iter().map(|(x, _)| x.to_bits()).collect();
    v.extend(ext.max_confuse.iter().flatten().map(|(x, _)| x.to_bits()));
    v
}

// ---------------------------------------------------------------------------
// Sequential identification
// ---------------------------------------------------------------------------

/// Monte Carlo record of sequential identification.
#[derive(Debug, Clone)]
pub struct SequentialReport {
    /// Empirical per-query error frequency, in query order.
    pub per_query_error: Vec<f64>,
    /// Empirical probability that every query was answered correctly.
    pub all_correct_frequency: f64,
    pub trials: u64,
    /// Code error lambda = max(lambda1, lambda2) used in the bound.
    pub lambda: f64,
    /// Smallest epsilon for which the query count satisfies
    /// k <= eps^2 / (4 lambda).
    pub epsilon_for_k: f64,
    /// Whether the empirical failure rate stayed within that epsilon.
    pub bound_satisfied: bool,
}

/// Simulates asking the binary questions (D_q, 1 - D_q) in order on the
/// output state for `true_message`, with the square-root instrument
/// update rho -> M rho M^dagger / Tr(M rho M^dagger), M in
/// {sqrt(D_q), sqrt(1 - D_q)}.
pub fn sequential_identification(
    code: &IdCode,
    channel: &CqChannel,
    true_message: usize,
    queries: &[usize],
    trials: u64,
    seed: u64,
    guards: &Guards,
) -> Result<SequentialReport> {
    if true_message >= code.len() {
        return Err(IdError::SizeMismatch(format!(
            "message {true_message} outside code of size {}",
            code.len()
        )));
    }
    if queries.iter().any(|&q| q >= code.len()) {
        return Err(IdError::SizeMismatch("query outside code".into()));
    }
    let tol = Tolerances::default();

    // Precompute the measurement operators per distinct queried message.
    let mut ops: std::collections::BTreeMap<usize, (ComplexMatrix, ComplexMatrix)> =
        std::collections::BTreeMap::new();
    for &q in queries {
        if let std::collections::btree_map::Entry::Vacant(slot) = ops.entry(q) {
            let d = code.verifier(q);
            let yes = psd_sqrt(d.matrix(), &tol)?;
            let no = psd_sqrt(d.complement().matrix(), &tol)?;
            slot.insert((yes, no));
        }
    }

    // Output states per codeword in the support of P_{true_message}.
    let p = code.encoding(true_message);
    let words: Vec<(Vec<usize>, f64)> = p.support().to_vec();
    let states: Vec<DensityOperator> = words
        .iter()
        .map(|(w, _)| channel.output_state(w, guards))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let k = queries.len();
    let workers = guards.threads.max(1).min(trials.max(1) as usize);
    let chunk = trials / workers as u64 + 1;
    let partials: Vec<(Vec<u64>, u64)> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let lo = chunk * w as u64;
            let hi = (lo + chunk).min(trials);
            let ops = &ops;
            let words = &words;
            let states = &states;
            handles.push(scope.spawn(move || {
                let mut rng = sampling::derived_rng(seed, w as u64);
                let mut errors = vec![0u64; k];
                let mut all_correct = 0u64;
                for _ in lo..hi {
                    // Sample the codeword actually transmitted.
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut idx = words.len() - 1;
                    for (w_idx, (_, weight)) in words.iter().enumerate() {
                        acc += weight;
                        if u < acc {
                            idx = w_idx;
                            break;
                        }
                    }
                    let mut rho = states[idx].matrix().clone();
                    let mut ok = true;
                    for (pos, &q) in queries.iter().enumerate() {
                        let (yes_op, no_op) = &ops[&q];
                        // Tr(D rho) equals the trace of the yes branch
                        // sqrt(D) rho sqrt(D), which doubles as the update.
                        let yes_branch = yes_op.matmul(&rho).matmul(yes_op);
                        let p_yes = yes_branch.trace().re.clamp(0.0, 1.0);
                        let answered_yes = rng.random::<f64>() < p_yes;
                        let correct = answered_yes == (q == true_message);
                        if !correct {
                            errors[pos] += 1;
                            ok = false;
                        }
                        let updated = if answered_yes {
                            yes_branch
                        } else {
                            no_op.matmul(&rho).matmul(no_op)
                        };
                        let norm = updated.trace().re;
                        if norm > 1e-300 {
                            rho = updated.scale(1.0 / norm);
                        }
                    }
                    if ok {
                        all_correct += 1;
                    }
                }
                (errors, all_correct)
            }));
        }
        handles
            .into_iter()
            .map(|h| h.join().expect("trial worker panicked"))
            .collect()
    });

    let mut errors = vec![0u64; k];
    let mut all_correct = 0u64;
    for (e, a) in partials {
        for (tot, part) in errors.iter_mut().zip(e) {
            *tot += part;
        }
        all_correct += a;
    }

    let lambda = code.lambda1().max(code.lambda2());
    let epsilon_for_k = (4.0 * lambda * k as f64).sqrt();
    let failure = 1.0 - all_correct as f64 / trials.max(1) as f64;
    Ok(SequentialReport {
        per_query_error: errors
            .iter()
            .map(|&e| e as f64 / trials.max(1) as f64)
            .collect(),
        all_correct_frequency: all_correct as f64 / trials.max(1) as f64,
        trials,
        lambda,
        epsilon_for_k,
        bound_satisfied: failure <= epsilon_for_k,
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

    fn noiseless_fam() -> IndexedChannelFamily {
        IndexedChannelFamily::singleton(
            ChannelSemantics::Compound,
            CqChannel::noiseless_classical(2),
        )
    }

    #[test]
    fn noiseless_code_has_zero_error() {
        let fam = noiseless_fam();
        let options = TransmissionCodeOptions::new(2, 4, 11);
        let code = build_transmission_code(&fam, &options, &guards()).unwrap();
        assert_eq!(code.size(), 4);
        assert_abs_diff_eq!(code.max_error(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_channel_cannot_beat_half() {
        let c = CqChannel::constant(DensityOperator::maximally_mixed(2), 2);
        let fam = IndexedChannelFamily::singleton(ChannelSemantics::Compound, c);
        let mut options = TransmissionCodeOptions::new(1, 2, 3);
        options.input_distribution = Some(ProbabilityDistribution::uniform(2));
        let code = build_transmission_code(&fam, &options, &guards()).unwrap();
        assert!(code.max_error() >= 0.5 - 1e-12);
    }

    #[test]
    fn no_code_found_when_target_unreachable() {
        let c = CqChannel::constant(DensityOperator::maximally_mixed(2), 2);
        let fam = IndexedChannelFamily::singleton(ChannelSemantics::Compound, c);
        let mut options = TransmissionCodeOptions::new(1, 2, 3);
        options.input_distribution = Some(ProbabilityDistribution::uniform(2));
        options.lambda_target = Some(0.1);
        options.attempts = 2;
        match build_transmission_code(&fam, &options, &guards()) {
            Err(IdError::NoCodeFound { .. }) => {}
            other => panic!("expected NoCodeFound, got {other:?}"),
        }
    }

    #[test]
    fn repetition_code_error_matches_enumeration_oracle() {
        // BSC(0.1), n = 5, repetition codewords, square-root measurement.
        // Oracle: direct enumeration over the 32 classical outcome strings;
        // the SRM on diagonal states assigns outcome y to message m with
        // weight p_m(y) / (p_0 + p_1)(y).
        let p_flip = 0.1_f64;
        let fam = IndexedChannelFamily::singleton(
            ChannelSemantics::Compound,
            CqChannel::binary_symmetric(p_flip).unwrap(),
        );
        let words = vec![vec![0; 5], vec![1; 5]];
        let code = TransmissionCode::from_codewords(&fam, words, &guards()).unwrap();

        let mut success0 = 0.0;
        for y in 0..32u32 {
            let ones = y.count_ones() as f64;
            let p0 = (1.0 - p_flip).powf(5.0 - ones) * p_flip.powf(ones);
            let p1 = p_flip.powf(5.0 - ones) * (1.0 - p_flip).powf(ones);
            success0 += p0 * p0 / (p0 + p1);
        }
        let expected_lambda = 1.0 - success0; // symmetric codewords
        assert_abs_diff_eq!(code.max_error(), expected_lambda, epsilon = 1e-10);
    }

    #[test]
    fn gilbert_family_small_case() {
        // M = 64, eps = 1/32 (k = 2), lambda = 0.5: intersections < 1, so
        // the subsets are pairwise disjoint pairs.
        let fam = gilbert_family(64, 1.0 / 32.0, 0.5, 20, 5).unwrap();
        assert_eq!(fam.subset_size(), 2);
        for i in 0..fam.len() {
            for j in (i + 1)..fam.len() {
                assert_eq!(sorted_intersection_size(fam.subset(i), fam.subset(j)), 0);
            }
        }
    }

    #[test]
    fn gilbert_family_rejects_bad_hypothesis() {
        // lambda * log2(1/eps - 1) = 0.5 * log2(15) < 2... use eps = 1/16.
        match gilbert_family(64, 1.0 / 16.0, 0.5, 4, 1) {
            Err(IdError::PreconditionViolated(_)) => {}
            other => panic!("expected precondition violation, got {other:?}"),
        }
    }

    #[test]
    fn gilbert_family_exhausts_when_too_many_subsets_requested() {
        // M = 64, k = 2, intersections < 1: at most 32 disjoint pairs
        // exist, so asking for 40 must exhaust the retry budget.
        match gilbert_family(64, 1.0 / 32.0, 0.5, 40, 3) {
            Err(IdError::ConstructionExhausted { found, needed, .. }) => {
                assert!(found <= 32);
                assert_eq!(needed, 40);
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn gilbert_family_single_subset_is_vacuous() {
        let fam = gilbert_family(32, 1.0 / 32.0, 0.5, 1, 1).unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(fam.subset_size(), 1);
    }

    #[test]
    fn assemble_disjoint_pairs_on_noiseless_code() {
        let fam = noiseless_fam();
        let options = TransmissionCodeOptions::new(2, 4, 11);
        let tc = build_transmission_code(&fam, &options, &guards()).unwrap();
        let sets = SetFamily::from_parts(4, 0.5, 0.5, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let id = assemble_id_code(&tc, &sets, &fam, &guards()).unwrap();
        assert!(id.simultaneous());
        assert_abs_diff_eq!(id.lambda1(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(id.lambda2(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn overlap_fraction_shows_up_as_lambda2() {
        // Overlapping family {0,1} and {1,2} on a noiseless 4-word code:
        // Tr W(P_i) D_j = |A_i cap A_j| / k = 1/2.
        let fam = noiseless_fam();
        let options = TransmissionCodeOptions::new(2, 4, 11);
        let tc = build_transmission_code(&fam, &options, &guards()).unwrap();
        let sets = SetFamily::from_parts(4, 0.5, 0.9, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let id = assemble_id_code(&tc, &sets, &fam, &guards()).unwrap();
        assert_abs_diff_eq!(id.lambda2(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(id.lambda1(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn assembled_errors_obey_theorem_bounds() {
        // lambda1 <= lambda and lambda2 <= 2 lambda for every assembled code.
        let fam = IndexedChannelFamily::singleton(
            ChannelSemantics::Compound,
            CqChannel::binary_symmetric(0.05).unwrap(),
        );
        let mut options = TransmissionCodeOptions::new(4, 16, 17);
        options.attempts = 4;
        let tc = build_transmission_code(&fam, &options, &guards()).unwrap();
        let lambda = tc.max_error();
        let sets = gilbert_family(16, 1.0 / 8.0, 0.8, 4, 23).unwrap();
        let id = assemble_id_code(&tc, &sets, &fam, &guards()).unwrap();
        assert!(id.lambda1() <= lambda + 1e-12);
        assert!(id.lambda2() <= 2.0 * lambda + 1e-12);
    }

    #[test]
    fn avc_single_member_matches_compound() {
        let fam = IndexedChannelFamily::singleton(
            ChannelSemantics::Avc,
            CqChannel::binary_symmetric(0.1).unwrap(),
        );
        let options = TransmissionCodeOptions::new(3, 4, 29);
        let tc = build_transmission_code(
            &fam.with_semantics(ChannelSemantics::Compound),
            &options,
            &guards(),
        )
        .unwrap();
        let sets = SetFamily::from_parts(4, 0.5, 0.9, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let id = assemble_id_code(&tc, &sets, &fam, &guards()).unwrap();
        let compound =
            evaluate_id_errors(&id, &fam, EvaluationMode::Compound, &guards(), 0, 0).unwrap();
        let avc = evaluate_id_errors(&id, &fam, EvaluationMode::Avc, &guards(), 0, 0).unwrap();
        assert_abs_diff_eq!(compound.lambda1, avc.lambda1, epsilon = 1e-12);
        assert_abs_diff_eq!(compound.lambda2, avc.lambda2, epsilon = 1e-12);
        assert!(avc.exact);
    }

    #[test]
    fn sampled_adversary_is_dominated_by_exact() {
        let mut rng = sampling::rng_from_seed(31);
        let members = vec![
            sampling::random_cq_channel(2, 2, &mut rng),
            sampling::random_cq_channel(2, 2, &mut rng),
        ];
        let fam = IndexedChannelFamily::new(ChannelSemantics::Avc, members).unwrap();
        let options = TransmissionCodeOptions::new(3, 4, 37);
        let tc = build_transmission_code(
            &fam.with_semantics(ChannelSemantics::Compound),
            &options,
            &guards(),
        )
        .unwrap();
        let sets = SetFamily::from_parts(4, 0.5, 0.9, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let id = assemble_id_code(&tc, &sets, &fam, &guards()).unwrap();

        let exact = evaluate_id_errors(&id, &fam, EvaluationMode::Avc, &guards(), 0, 0).unwrap();
        let mut tight = guards();
        tight.enumeration_guard = 4; // force sampling (2^3 = 8 > 4)
        let sampled = evaluate_id_errors(&id, &fam, EvaluationMode::Avc, &tight, 16, 41).unwrap();
        assert!(!sampled.exact);
        assert!(sampled.lambda1 <= exact.lambda1 + 1e-12);
        assert!(sampled.lambda2 <= exact.lambda2 + 1e-12);
    }

    #[test]
    fn sequential_projective_commuting_is_perfect() {
        let fam = noiseless_fam();
        let options = TransmissionCodeOptions::new(2, 4, 11);
        let tc = build_transmission_code(&fam, &options, &guards()).unwrap();
        let sets = SetFamily::from_parts(4, 0.5, 0.5, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let id = assemble_id_code(&tc, &sets, &fam, &guards()).unwrap();
        let channel = CqChannel::noiseless_classical(2);
        let report =
            sequential_identification(&id, &channel, 0, &[0, 1, 0, 1], 2000, 51, &guards())
                .unwrap();
        assert_abs_diff_eq!(report.all_correct_frequency, 1.0, epsilon = 0.0);
        assert!(report.per_query_error.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn sen_bound_arithmetic() {
        // eps = 0.2, lambda = 0.001: k <= eps^2 / (4 lambda) = 10.
        let eps: f64 = 0.2;
        let lambda = 0.001;
        assert_abs_diff_eq!(eps * eps / (4.0 * lambda), 10.0, epsilon = 1e-12);
        // epsilon_for_k inverts the bound at k = 10.
        assert_abs_diff_eq!((4.0 * lambda * 10.0_f64).sqrt(), eps, epsilon = 1e-12);
    }

    #[test]
    fn sequential_matches_exact_chain_oracle() {
        // Noisy 2-message code; the oracle computes the all-correct branch
        // probability Tr[(M_k ... M_1) rho (M_k ... M_1)^dagger] directly.
        let fam = IndexedChannelFamily::singleton(
            ChannelSemantics::Compound,
            CqChannel::binary_symmetric(0.05).unwrap(),
        );
        let mut options = TransmissionCodeOptions::new(3, 4, 61);
        options.attempts = 2;
        let tc = build_transmission_code(&fam, &options, &guards()).unwrap();
        let sets = SetFamily::from_parts(4, 0.5, 0.9, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let id = assemble_id_code(&tc, &sets, &fam, &guards()).unwrap();
        let channel = CqChannel::binary_symmetric(0.05).unwrap();
        let queries = [0usize, 1, 0];
        let trials = 40_000u64;
        let report =
            sequential_identification(&id, &channel, 0, &queries, trials, 71, &guards()).unwrap();

        // Oracle: mixture over the true codewords of the single
        // all-correct branch.
        let tol = Tolerances::default();
        let mut p_all = 0.0;
        for (word, w) in id.encoding(0).support() {
            let mut rho = channel
                .output_state(word, &guards())
                .unwrap()
                .matrix()
                .clone();
            for &q in &queries {
                let d = id.verifier(q);
                let m = if q == 0 {
                    psd_sqrt(d.matrix(), &tol).unwrap()
                } else {
                    psd_sqrt(d.complement().matrix(), &tol).unwrap()
                };
                rho = m.matmul(&rho).matmul(&m);
            }
            p_all += w * rho.trace().re;
        }
        let sigma = (p_all * (1.0 - p_all) / trials as f64).sqrt();
        assert!(
            (report.all_correct_frequency - p_all).abs() <= 3.0 * sigma + 1e-9,
            "empirical {} vs exact {} (3 sigma = {})",
            report.all_correct_frequency,
            p_all,
            3.0 * sigma
        );
    }
}
