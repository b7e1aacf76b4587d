//! Holevo information and the single-letter capacity quantities: point
//! capacity, compound max-min capacity, AVC random-coding capacity,
//! symmetrizability, and the single-letter secrecy lower bounds used as
//! positivity proxies by the dichotomy evaluators.
//!
//! Solver strategy. The point capacity uses the multiplicative
//! (Blahut-Arimoto type) update `p <- p * 2^D / Z` with the certified
//! stopping rule `max_x D(W(x)||W(p)) - I(p) <= tol`; the max over x of the
//! relative entropy upper-bounds the capacity for every p, so the reported
//! gap is a true optimality certificate. Compound and random-coding
//! capacities wrap the same primitive in a dual search over index weights:
//! every dual evaluation yields a valid upper bound, every primal iterate a
//! valid lower bound, and the solver stops when the two meet within tol.
//!
//! Secrecy lower bounds are nonconcave in the auxiliary channel, so they
//! are computed by seeded multi-start ascent and reported strictly as
//! achievable lower-bound proxies, never as "the" secrecy capacity.

use thiserror::Error;

use crate::channel::{
    ChannelError, ChannelSemantics, CqChannel, IndexedChannelFamily, WiretapFlavour, WiretapPair,
};
use crate::linalg::{
    relative_entropy, von_neumann_entropy_with, DensityOperator, LinalgError,
    ProbabilityDistribution, Tolerances,
};
use crate::opt::{exp_grad_step, frank_wolfe_gap, solve_lp, LinearProgram, LpOutcome};
use crate::sampling;

#[derive(Debug, Error)]
pub enum InfoError {
    #[error("{what} did not converge: gap {gap:.3e} > tol {tolerance:.3e} after {iterations} iterations")]
    ConvergenceFailure {
        what: &'static str,
        iterations: usize,
        gap: f64,
        tolerance: f64,
    },
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, InfoError>;

const MAX_BA_ITERS: usize = 20_000;
/// Finite stand-in for an infinite relative entropy inside multiplicative
/// updates; the certified gap still uses the exact value.
const DIV_CAP: f64 = 1e4;

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

/// A computed capacity value plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct CapacityReport {
    /// Capacity value in bits, attained by `optimizer` up to `gap_estimate`.
    pub value: f64,
    /// Input distribution achieving `value`.
    pub optimizer: ProbabilityDistribution,
    /// Dual weights over the index set (compound) or the minimizing hull
    /// weights (AVC), when applicable.
    pub index_optimizer: Option<ProbabilityDistribution>,
    /// Indices t whose mutual information is tight at the optimizer.
    pub active_indices: Vec<usize>,
    pub iterations: usize,
    /// Certified distance to the optimum: upper bound minus achieved value.
    pub gap_estimate: f64,
    pub tolerance: f64,
}

/// Auxiliary random variable U -> X: a prior on U and a row-stochastic
/// kernel from U to the channel alphabet.
#[derive(Debug, Clone)]
pub struct AuxiliaryChannel {
    pub prior: ProbabilityDistribution,
    pub kernel: Vec<ProbabilityDistribution>,
}

impl AuxiliaryChannel {
    pub fn new(
        prior: ProbabilityDistribution,
        kernel: Vec<ProbabilityDistribution>,
    ) -> Result<Self> {
        if prior.support_size() != kernel.len() {
            return Err(InfoError::SolverFailure(format!(
                "prior over {} symbols but kernel has {} rows",
                prior.support_size(),
                kernel.len()
            )));
        }
        Ok(AuxiliaryChannel { prior, kernel })
    }

    pub fn u_size(&self) -> usize {
        self.prior.support_size()
    }

    /// The effective cq-channel u -> sum_x K(x|u) W(x).
    pub fn compose(&self, ch: &CqChannel) -> Result<CqChannel> {
        let outputs = self
            .kernel
            .iter()
            .map(|row| ch.output_mixture(row))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(CqChannel::new(outputs)?)
    }
}

/// Outcome of the symmetrizability decision.
#[derive(Debug, Clone)]
pub struct SymmetrizabilityCertificate {
    pub symmetrizable: bool,
    /// Row-stochastic map X -> Theta witnessing symmetrizability, when found.
    pub tau: Option<Vec<ProbabilityDistribution>>,
    /// Optimal Chebyshev residual: max over input pairs and matrix entries
    /// of max(|Re|, |Im|) of the defining difference.
    pub residual: f64,
    pub tolerance: f64,
}

// ---------------------------------------------------------------------------
// Holevo information and point capacity
// ---------------------------------------------------------------------------

/// I(P;W) = S(W(P)) - sum_x P(x) S(W(x)), in bits.
pub fn holevo_information(p: &ProbabilityDistribution, ch: &CqChannel) -> Result<f64> {
    holevo_information_with(p, ch, &Tolerances::default())
}

pub fn holevo_information_with(
    p: &ProbabilityDistribution,
    ch: &CqChannel,
    tol: &Tolerances,
) -> Result<f64> {
    if p.support_size() != ch.alphabet_size() {
        return Err(InfoError::Channel(ChannelError::ShapeMismatch(format!(
            "distribution over {} letters, alphabet has {}",
            p.support_size(),
            ch.alphabet_size()
        ))));
    }
    let mixed = ch.output_mixture(p)?;
    let mut info = von_neumann_entropy_with(&mixed, tol)?;
    for (x, out) in ch.outputs().iter().enumerate() {
        let w = p.weight(x);
        if w > 0.0 {
            info -= w * von_neumann_entropy_with(out, tol)?;
        }
    }
    let cap = (ch.alphabet_size() as f64)
        .log2()
        .min((ch.out_dim() as f64).log2());
    Ok(info.clamp(0.0, cap))
}

/// A channel with its output eigensystems and entropies precomputed, so
/// the ascent loops pay only two fresh eigendecompositions per iteration.
struct PreparedChannel<'a> {
    ch: &'a CqChannel,
    out_entropies: Vec<f64>,
}

/// Mixing weight of the uniform smoothing applied to the bound's
/// reference state; the bound max_x D(W(x) || sigma) is valid for any
/// sigma, and smoothing keeps it finite even when the iterate has
/// underflowed some letter, at an O(1e-12) cost in tightness.
const SMOOTHING: f64 = 1e-12;

impl<'a> PreparedChannel<'a> {
    fn new(ch: &'a CqChannel, tol: &Tolerances) -> Result<Self> {
        let out_entropies = ch
            .outputs()
            .iter()
            .map(|o| von_neumann_entropy_with(o, tol))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(PreparedChannel { ch, out_entropies })
    }

    /// Divergence vector d[x] = D(W(x) || W(p~)) against the smoothed
    /// mixture, plus the exact achieved information I(p;W).
    fn divergences(&self, p: &[f64], tol: &Tolerances) -> Result<(Vec<f64>, f64)> {
        use crate::linalg::hermitian_eigensystem;
        let a = self.ch.alphabet_size();
        let dim = self.ch.out_dim();

        let smoothed: Vec<f64> = p
            .iter()
            .map(|&w| (1.0 - SMOOTHING) * w + SMOOTHING / a as f64)
            .collect();
        let sigma = self
            .ch
            .output_mixture(&ProbabilityDistribution::from_trusted(smoothed))?;
        let sys = hermitian_eigensystem(sigma.matrix(), tol)?;
        const EIG_FLOOR: f64 = 1e-300;
        let log_eigs: Vec<f64> = sys
            .eigenvalues
            .iter()
            .map(|&s| s.clamp(EIG_FLOOR, 1.0).log2())
            .collect();

        let mut d = Vec::with_capacity(a);
        for (x, out) in self.ch.outputs().iter().enumerate() {
            // D(W(x) || sigma) = -S(W(x)) - Tr[W(x) log2 sigma], with the
            // trace accumulated in sigma's eigenbasis: mass_j = v_j^dagger W(x) v_j.
            let mut dx = -self.out_entropies[x];
            for j in 0..dim {
                let mut acc = crate::linalg::Complex64::new(0.0, 0.0);
                for r in 0..dim {
                    let mut row = crate::linalg::Complex64::new(0.0, 0.0);
                    for c in 0..dim {
                        row += out.matrix().get(r, c) * sys.eigenvectors.get(c, j);
                    }
                    acc += sys.eigenvectors.get(r, j).conj() * row;
                }
                dx -= acc.re.max(0.0) * log_eigs[j];
            }
            d.push(dx.max(0.0));
        }

        // Exact achieved information at the unsmoothed p.
        let mixed = self
            .ch
            .output_mixture(&ProbabilityDistribution::from_trusted(p.to_vec()))?;
        let mut info = von_neumann_entropy_with(&mixed, tol)?;
        for (x, &w) in p.iter().enumerate() {
            if w > 0.0 {
                info -= w * self.out_entropies[x];
            }
        }
        Ok((d, info.max(0.0)))
    }
}

/// Relative entropies D(W(x) || W(p~)) for all letters (smoothed reference,
/// see [`PreparedChannel`]), plus the exact I(p;W).
fn divergences(ch: &CqChannel, p: &[f64], tol: &Tolerances) -> Result<(Vec<f64>, f64)> {
    PreparedChannel::new(ch, tol)?.divergences(p, tol)
}

/// Point channel capacity C(W) = max_P I(P;W) by certified multiplicative
/// ascent. The returned gap estimate is a true bound on the distance to
/// the optimum.
pub fn holevo_capacity(ch: &CqChannel, tol: f64) -> Result<CapacityReport> {
    holevo_capacity_with(ch, tol, &Tolerances::default())
}

pub fn holevo_capacity_with(ch: &CqChannel, tol: f64, tols: &Tolerances) -> Result<CapacityReport> {
    if tol <= 0.0 {
        return Err(InfoError::SolverFailure(
            "tolerance must be positive".into(),
        ));
    }
    let a = ch.alphabet_size();
    let mut p = vec![1.0 / a as f64; a];
    let mut best_value = 0.0;
    let mut best_p = p.clone();
    let mut best_gap = f64::INFINITY;
    for iter in 1..=MAX_BA_ITERS {
        let (d, info) = divergences(ch, &p, tols)?;
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if info > best_value {
            best_value = info;
            best_p = p.clone();
        }
        best_gap = best_gap.min(upper - best_value);
        if upper - best_value <= tol {
            return Ok(CapacityReport {
                value: best_value.max(0.0),
                optimizer: ProbabilityDistribution::from_trusted(best_p),
                index_optimizer: None,
                active_indices: Vec::new(),
                iterations: iter,
                gap_estimate: (upper - best_value).max(0.0),
                tolerance: tol,
            });
        }
        let capped: Vec<f64> = d.iter().map(|&x| x.min(DIV_CAP)).collect();
        p = exp_grad_step(&p, &capped, 1.0);
    }
    Err(InfoError::ConvergenceFailure {
        what: "holevo_capacity",
        iterations: MAX_BA_ITERS,
        gap: best_gap,
        tolerance: tol,
    })
}

// ---------------------------------------------------------------------------
// Compound capacity
// ---------------------------------------------------------------------------

/// Per-member divergence table d[t][x] = D(W_t(x) || W_t(p)) and the member
/// informations I(p; W_t).
fn member_divergences(
    fam: &IndexedChannelFamily,
    p: &[f64],
    tol: &Tolerances,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut tables = Vec::with_capacity(fam.len());
    let mut infos = Vec::with_capacity(fam.len());
    for member in fam.members() {
        let (d, info) = divergences(member, p, tol)?;
        tables.push(d);
        infos.push(info);
    }
    Ok((tables, infos))
}

/// Upper bound max_x sum_t q_t d[t][x]; valid for any q and any reference p.
fn weighted_upper(tables: &[Vec<f64>], q: &[f64]) -> f64 {
    let a = tables[0].len();
    (0..a)
        .map(|x| {
            q.iter()
                .zip(tables)
                .map(|(qt, row)| qt * row[x])
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Maximizes the q-weighted information sum_t q_t I(p;W_t) by multiplicative
/// ascent, returning the optimizer, the achieved weighted value and the
/// certified upper bound on max_P sum_t q_t I(P;W_t).
fn weighted_ba(
    fam: &IndexedChannelFamily,
    q: &[f64],
    start: &[f64],
    tol: f64,
    max_iters: usize,
    tols: &Tolerances,
) -> Result<(Vec<f64>, f64, f64, usize)> {
    let mut p = start.to_vec();
    let mut best_val = f64::NEG_INFINITY;
    let mut best_p = p.clone();
    let mut best_upper = f64::INFINITY;
    let mut iters = 0;
    for _ in 0..max_iters {
        iters += 1;
        let (tables, infos) = member_divergences(fam, &p, tols)?;
        let val: f64 = q.iter().zip(&infos).map(|(qt, it)| qt * it).sum();
        if val > best_val {
            best_val = val;
            best_p = p.clone();
        }
        let upper = weighted_upper(&tables, q);
        best_upper = best_upper.min(upper);
        if best_upper - best_val <= tol {
            break;
        }
        let a = p.len();
        let g: Vec<f64> = (0..a)
            .map(|x| {
                q.iter()
                    .zip(&tables)
                    .map(|(qt, row)| qt * row[x].min(DIV_CAP))
                    .sum()
            })
            .collect();
        p = exp_grad_step(&p, &g, 1.0);
    }
    Ok((best_p, best_val, best_upper, iters))
}

/// Compound capacity C(F) = max_P min_t I(P;W_t) (Blackwell-style max-min).
///
/// The dual function Phi(q) = max_P sum_t q_t I(P;W_t) upper-bounds the
/// max-min for every q; the solver minimizes Phi over the simplex (golden
/// section for two members, mirror descent otherwise) and recovers an
/// equalizing primal by subgradient ascent on the pointwise minimum.
pub fn compound_capacity(fam: &IndexedChannelFamily, tol: f64) -> Result<CapacityReport> {
    compound_capacity_with(fam, tol, &Tolerances::default())
}

pub fn compound_capacity_with(
    fam: &IndexedChannelFamily,
    tol: f64,
    tols: &Tolerances,
) -> Result<CapacityReport> {
    if tol <= 0.0 {
        return Err(InfoError::SolverFailure(
            "tolerance must be positive".into(),
        ));
    }
    let t_count = fam.len();
    if t_count == 1 {
        let mut report = holevo_capacity_with(fam.member(0)?, tol, tols)?;
        report.index_optimizer = Some(ProbabilityDistribution::point_mass(1, 0));
        report.active_indices = vec![0];
        return Ok(report);
    }
    let a = fam.alphabet_size();
    let uniform_p = vec![1.0 / a as f64; a];

    let mut total_iters = 0usize;
    let mut best_upper = f64::INFINITY;
    let mut best_q = vec![1.0 / t_count as f64; t_count];
    let mut best_lower = f64::NEG_INFINITY;
    let mut best_p = uniform_p.clone();

    // Evaluates the dual Phi(q); updates the global upper bound and the
    // primal lower bound as side effects.
    let probe = |q: &[f64],
                 best_upper: &mut f64,
                 best_q: &mut Vec<f64>,
                 best_lower: &mut f64,
                 best_p: &mut Vec<f64>,
                 total_iters: &mut usize|
     -> Result<(f64, Vec<f64>)> {
        let (p_opt, _val, upper, iters) = weighted_ba(fam, q, &uniform_p, tol / 8.0, 4000, tols)?;
        *total_iters += iters;
        if upper < *best_upper {
            *best_upper = upper;
            *best_q = q.to_vec();
        }
        let (_, infos) = member_divergences(fam, &p_opt, tols)?;
        let lower = infos.iter().cloned().fold(f64::INFINITY, f64::min);
        if lower > *best_lower {
            *best_lower = lower;
            *best_p = p_opt.clone();
        }
        Ok((upper, infos))
    };

    // Vertex probes pick up the common case where a single member is the
    // bottleneck.
    for t in 0..t_count {
        let mut q = vec![0.0; t_count];
        q[t] = 1.0;
        probe(
            &q,
            &mut best_upper,
            &mut best_q,
            &mut best_lower,
            &mut best_p,
            &mut total_iters,
        )?;
    }

    if best_upper - best_lower > tol {
        if t_count == 2 {
            // Golden-section minimization of the convex dual on [0, 1].
            let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            let mut x1 = hi - phi * (hi - lo);
            let mut x2 = lo + phi * (hi - lo);
            let mut f1 = probe(
                &[x1, 1.0 - x1],
                &mut best_upper,
                &mut best_q,
                &mut best_lower,
                &mut best_p,
                &mut total_iters,
            )?
            .0;
            let mut f2 = probe(
                &[x2, 1.0 - x2],
                &mut best_upper,
                &mut best_q,
                &mut best_lower,
                &mut best_p,
                &mut total_iters,
            )?
            .0;
            for _ in 0..90 {
                if best_upper - best_lower <= tol || hi - lo < 1e-12 {
                    break;
                }
                if f1 <= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - phi * (hi - lo);
                    f1 = probe(
                        &[x1, 1.0 - x1],
                        &mut best_upper,
                        &mut best_q,
                        &mut best_lower,
                        &mut best_p,
                        &mut total_iters,
                    )?
                    .0;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + phi * (hi - lo);
                    f2 = probe(
                        &[x2, 1.0 - x2],
                        &mut best_upper,
                        &mut best_q,
                        &mut best_lower,
                        &mut best_p,
                        &mut total_iters,
                    )?
                    .0;
                }
            }
        } else {
            // Mirror descent on the dual with Danskin subgradients I(p_q; W_t).
            let mut q = vec![1.0 / t_count as f64; t_count];
            for round in 1..=600 {
                if best_upper - best_lower <= tol {
                    break;
                }
                let (p_opt, _, _, iters) = weighted_ba(fam, &q, &uniform_p, tol / 8.0, 2000, tols)?;
                total_iters += iters;
                let (_, infos) = member_divergences(fam, &p_opt, tols)?;
                probe(
                    &q,
                    &mut best_upper,
                    &mut best_q,
                    &mut best_lower,
                    &mut best_p,
                    &mut total_iters,
                )?;
                let eta = 2.0 / (round as f64).sqrt();
                // Descent: decrease weight where the information is large.
                let neg: Vec<f64> = infos.iter().map(|x| -x).collect();
                q = exp_grad_step(&q, &neg, eta);
            }
        }
    }

    // Primal polish: subgradient ascent on min_t I(p;W_t), averaging the
    // gradients of the active members (ties resolved toward lower indices
    // by the strict window).
    let mut p = best_p.clone();
    for step in 1..=2000 {
        if best_upper - best_lower <= tol {
            break;
        }
        let (tables, infos) = member_divergences(fam, &p, tols)?;
        let minimum = infos.iter().cloned().fold(f64::INFINITY, f64::min);
        if minimum > best_lower {
            best_lower = minimum;
            best_p = p.clone();
        }
        let active: Vec<usize> = (0..t_count)
            .filter(|&t| infos[t] <= minimum + (best_upper - minimum).max(tol) * 0.5)
            .collect();
        let g: Vec<f64> = (0..a)
            .map(|x| {
                active
                    .iter()
                    .map(|&t| tables[t][x].min(DIV_CAP))
                    .sum::<f64>()
                    / active.len() as f64
            })
            .collect();
        let eta = 1.0 / (step as f64).sqrt();
        p = exp_grad_step(&p, &g, eta);
        total_iters += 1;
    }

    let gap = best_upper - best_lower;
    if gap > tol {
        return Err(InfoError::ConvergenceFailure {
            what: "compound_capacity",
            iterations: total_iters,
            gap,
            tolerance: tol,
        });
    }
    let (_, infos) = member_divergences(fam, &best_p, tols)?;
    let minimum = infos.iter().cloned().fold(f64::INFINITY, f64::min);
    let active_indices: Vec<usize> = (0..t_count)
        .filter(|&t| infos[t] <= minimum + tol.max(1e-9) * 10.0)
        .collect();
    Ok(CapacityReport {
        value: best_lower.max(0.0),
        optimizer: ProbabilityDistribution::from_trusted(best_p),
        index_optimizer: Some(ProbabilityDistribution::from_trusted(best_q)),
        active_indices,
        iterations: total_iters,
        gap_estimate: gap.max(0.0),
        tolerance: tol,
    })
}

// ---------------------------------------------------------------------------
// Convex hull and random-coding capacity
// ---------------------------------------------------------------------------

/// Hull member W_q = sum_t q(t) W_t (letterwise mixture).
pub fn convex_hull_member(
    fam: &IndexedChannelFamily,
    q: &ProbabilityDistribution,
) -> Result<CqChannel> {
    if q.support_size() != fam.len() {
        return Err(InfoError::Channel(ChannelError::ShapeMismatch(format!(
            "weights over {} indices, family has {}",
            q.support_size(),
            fam.len()
        ))));
    }
    let a = fam.alphabet_size();
    let mut outputs = Vec::with_capacity(a);
    for x in 0..a {
        let parts: Vec<(f64, &DensityOperator)> = fam
            .members()
            .iter()
            .enumerate()
            .map(|(t, m)| (q.weight(t), &m.outputs()[x]))
            .collect();
        outputs.push(DensityOperator::mixture(&parts)?);
    }
    Ok(CqChannel::new(outputs)?)
}

fn hull_channel(fam: &IndexedChannelFamily, q: &[f64]) -> Result<CqChannel> {
    convex_hull_member(fam, &ProbabilityDistribution::from_trusted(q.to_vec()))
}

/// Gradient of q -> I(p; W_q) in bits:
/// g_t = -Tr(W_t(p) log2 W_q(p)) + sum_x p(x) Tr(W_t(x) log2 W_q(x)).
fn hull_gradient(
    fam: &IndexedChannelFamily,
    p: &[f64],
    q: &[f64],
    tols: &Tolerances,
) -> Result<Vec<f64>> {
    use crate::linalg::hermitian_eigensystem;
    let wq = hull_channel(fam, q)?;
    let p_dist = ProbabilityDistribution::from_trusted(p.to_vec());
    let a = fam.alphabet_size();
    const FLOOR: f64 = 1e-14;
    let log_of = |state: &DensityOperator| -> Result<crate::linalg::ComplexMatrix> {
        Ok(hermitian_eigensystem(state.matrix(), tols)?.apply(|l| l.max(FLOOR).log2()))
    };
    let log_mix = log_of(&wq.output_mixture(&p_dist)?)?;
    let log_out: Vec<_> = (0..a)
        .map(|x| log_of(&wq.outputs()[x]))
        .collect::<Result<Vec<_>>>()?;

    let mut grad = Vec::with_capacity(fam.len());
    for member in fam.members() {
        let wt_p = member.output_mixture(&p_dist)?;
        let mut g = -wt_p.matrix().trace_product(&log_mix).re;
        for x in 0..a {
            if p[x] > 0.0 {
                g += p[x] * member.outputs()[x].matrix().trace_product(&log_out[x]).re;
            }
        }
        grad.push(g);
    }
    Ok(grad)
}

/// Certified inner minimization min_q I(p; W_q): mirror descent with a
/// Frank-Wolfe optimality certificate. Returns (q, achieved value, lower
/// bound on the true minimum).
fn hull_min(
    fam: &IndexedChannelFamily,
    p: &[f64],
    tol: f64,
    tols: &Tolerances,
) -> Result<(Vec<f64>, f64, f64)> {
    let t_count = fam.len();
    let p_dist = ProbabilityDistribution::from_trusted(p.to_vec());
    let eval = |q: &[f64]| -> Result<f64> {
        holevo_information_with(&p_dist, &hull_channel(fam, q)?, tols)
    };
    let mut q = vec![1.0 / t_count as f64; t_count];
    let mut best_q = q.clone();
    let mut best_val = eval(&q)?;
    let mut best_lb = f64::NEG_INFINITY;
    // Vertex probes: at a minimizing vertex the Frank-Wolfe gap vanishes,
    // so the lower bound is exact there.
    for t in 0..t_count {
        let mut vertex = vec![0.0; t_count];
        vertex[t] = 1.0;
        let val = eval(&vertex)?;
        let grad = hull_gradient(fam, p, &vertex, tols)?;
        if val < best_val {
            best_val = val;
            best_q = vertex.clone();
        }
        best_lb = best_lb.max(val - frank_wolfe_gap(&vertex, &grad));
    }
    for step in 1..=800 {
        if best_val - best_lb <= tol {
            break;
        }
        let grad = hull_gradient(fam, p, &q, tols)?;
        let val = eval(&q)?;
        if val < best_val {
            best_val = val;
            best_q = q.clone();
        }
        // Convexity of I(p; W_q) in q makes this a valid lower bound.
        let lb = val - frank_wolfe_gap(&q, &grad);
        best_lb = best_lb.max(lb);
        if best_val - best_lb <= tol {
            break;
        }
        let eta = 0.5 / (step as f64).sqrt();
        let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
        q = exp_grad_step(&q, &neg, eta);
    }
    Ok((best_q, best_val, best_lb.min(best_val).max(0.0)))
}

/// Random-coding capacity C_ran(F) = max_p min_{W in conv(F)} I(p;W),
/// solved as an alternating minimax with certified exchange gap: the dual
/// side minimizes Upsilon(q) = max_p I(p;W_q) (each evaluation a certified
/// upper bound), the primal side reports certified hull minima as lower
/// bounds. A singleton family short-circuits to the point capacity.
pub fn random_coding_capacity(fam: &IndexedChannelFamily, tol: f64) -> Result<CapacityReport> {
    random_coding_capacity_with(fam, tol, &Tolerances::default())
}

pub fn random_coding_capacity_with(
    fam: &IndexedChannelFamily,
    tol: f64,
    tols: &Tolerances,
) -> Result<CapacityReport> {
    if tol <= 0.0 {
        return Err(InfoError::SolverFailure(
            "tolerance must be positive".into(),
        ));
    }
    let t_count = fam.len();
    if t_count == 1 {
        let mut report = holevo_capacity_with(fam.member(0)?, tol, tols)?;
        report.index_optimizer = Some(ProbabilityDistribution::point_mass(1, 0));
        report.active_indices = vec![0];
        return Ok(report);
    }

    let mut total_iters = 0usize;
    let mut best_upper = f64::INFINITY;
    let mut best_q = vec![1.0 / t_count as f64; t_count];
    let mut best_lower = 0.0_f64;
    let mut best_p = vec![1.0 / fam.alphabet_size() as f64; fam.alphabet_size()];

    //

    // Dual probe: BA on the hull channel gives Upsilon(q) >= C_ran.
    let dual_probe = |q: &[f64],
                      best_upper: &mut f64,
                      best_q: &mut Vec<f64>,
                      total_iters: &mut usize|
     -> Result<(f64, Vec<f64>)> {
        let wq = hull_channel(fam, q)?;
        let report = holevo_capacity_with(&wq, tol / 8.0, tols)?;
        *total_iters += report.iterations;
        let upper = report.value + report.gap_estimate;
        if upper < *best_upper {
            *best_upper = upper;
            *best_q = q.to_vec();
        }
        Ok((upper, report.optimizer.weights().to_vec()))
    };

    // Primal certification: certified hull minimum at p is a lower bound.
    let primal_probe = |p: &[f64], best_lower: &mut f64, best_p: &mut Vec<f64>| -> Result<f64> {
        let (_, _, lb) = hull_min(fam, p, tol / 8.0, tols)?;
        if lb > *best_lower {
            *best_lower = lb;
            *best_p = p.to_vec();
        }
        Ok(lb)
    };

    // Uniform probe first: picks up symmetrization points immediately.
    let uniform_q = vec![1.0 / t_count as f64; t_count];
    let (_, p0) = dual_probe(&uniform_q, &mut best_upper, &mut best_q, &mut total_iters)?;
    primal_probe(&p0, &mut best_lower, &mut best_p)?;

    if best_upper - best_lower > tol {
        for t in 0..t_count {
            let mut q = vec![0.0; t_count];
            q[t] = 1.0;
            let (_, popt) = dual_probe(&q, &mut best_upper, &mut best_q, &mut total_iters)?;
            primal_probe(&popt, &mut best_lower, &mut best_p)?;
            if best_upper - best_lower <= tol {
                break;
            }
        }
    }

    if best_upper - best_lower > tol && t_count == 2 {
        // Golden-section on the convex dual over q in [0, 1].
        let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let eval = |x: f64,
                    bu: &mut f64,
                    bq: &mut Vec<f64>,
                    bl: &mut f64,
                    bp: &mut Vec<f64>,
                    ti: &mut usize|
         -> Result<f64> {
            let (u, popt) = dual_probe(&[x, 1.0 - x], bu, bq, ti)?;
            primal_probe(&popt, bl, bp)?;
            Ok(u)
        };
        let mut f1 = eval(
            x1,
            &mut best_upper,
            &mut best_q,
            &mut best_lower,
            &mut best_p,
            &mut total_iters,
        )?;
        let mut f2 = eval(
            x2,
            &mut best_upper,
            &mut best_q,
            &mut best_lower,
            &mut best_p,
            &mut total_iters,
        )?;
        for _ in 0..90 {
            if best_upper - best_lower <= tol || hi - lo < 1e-12 {
                break;
            }
            if f1 <= f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = eval(
                    x1,
                    &mut best_upper,
                    &mut best_q,
                    &mut best_lower,
                    &mut best_p,
                    &mut total_iters,
                )?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = eval(
                    x2,
                    &mut best_upper,
                    &mut best_q,
                    &mut best_lower,
                    &mut best_p,
                    &mut total_iters,
                )?;
            }
        }
    } else if best_upper - best_lower > tol {
        // Mirror descent on Upsilon(q) with Danskin subgradients.
        let mut q = uniform_q.clone();
        for round in 1..=400 {
            if best_upper - best_lower <= tol {
                break;
            }
            let (_, popt) = dual_probe(&q, &mut best_upper, &mut best_q, &mut total_iters)?;
            primal_probe(&popt, &mut best_lower, &mut best_p)?;
            let grad = hull_gradient(fam, &popt, &q, tols)?;
            let eta = 1.0 / (round as f64).sqrt();
            let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
            q = exp_grad_step(&q, &neg, eta);
            total_iters += 1;
        }
    }

    let gap = (best_upper - best_lower).max(0.0);
    if gap > tol {
        return Err(InfoError::ConvergenceFailure {
            what: "random_coding_capacity",
            iterations: total_iters,
            gap,
            tolerance: tol,
        });
    }
    let (hull_q, _, _) = hull_min(fam, &best_p, tol / 8.0, tols)?;
    let active_indices: Vec<usize> = hull_q
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 1e-6)
        .map(|(t, _)| t)
        .collect();
    Ok(CapacityReport {
        value: best_lower.max(0.0),
        optimizer: ProbabilityDistribution::from_trusted(best_p),
        index_optimizer: Some(ProbabilityDistribution::from_trusted(hull_q)),
        active_indices,
        iterations: total_iters,
        gap_estimate: gap,
        tolerance: tol,
    })
}

// ---------------------------------------------------------------------------
// Symmetrizability
// ---------------------------------------------------------------------------

/// Decides symmetrizability of an AVC family: existence of a row-stochastic
/// tau with sum_t tau(t|x) W_t(x') = sum_t tau(t|x') W_t(x) for all x, x'.
///
/// Solved exactly as a linear program minimizing the Chebyshev residual
/// (max over input pairs and matrix entries of max(|Re|, |Im|) of the
/// difference). Symmetrizable iff the optimal residual is at most
/// `tol_symm`.
pub fn symmetrizability_check(
    fam: &IndexedChannelFamily,
    tol_symm: f64,
) -> Result<SymmetrizabilityCertificate> {
    let a = fam.alphabet_size();
    let t_count = fam.len();
    let d = fam.out_dim();

    // Variables: tau(x, t) row-major (a * t_count), then r, then slacks.
    let n_tau = a * t_count;
    let r_idx = n_tau;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();

    // Row-stochasticity: sum_t tau(x, t) = 1.
    for x in 0..a {
        let mut row = vec![0.0; n_tau + 1];
        for t in 0..t_count {
            row[x * t_count + t] = 1.0;
        }
        rows.push(row);
        rhs.push(1.0);
    }

    // Residual constraints: +-part <= r for Re and Im of each upper-triangle
    // entry of L(x, x') = sum_t tau(t|x) W_t(x') - tau(t|x') W_t(x).
    let mut push_pair = |coeffs: Vec<f64>| {
        // coeffs . tau <= r  =>  coeffs . tau - r + s = 0
        let mut row = coeffs.clone();
        row.push(-1.0);
        rows.push(row);
        rhs.push(0.0);
        // -(coeffs . tau) <= r
        let mut row: Vec<f64> = coeffs.into_iter().map(|c| -c).collect();
        row.push(-1.0);
        rows.push(row);
        rhs.push(0.0);
    };

    for x in 0..a {
        for xp in (x + 1)..a {
            for i in 0..d {
                for j in i..d {
                    let mut re = vec![0.0; n_tau];
                    let mut im = vec![0.0; n_tau];
                    for t in 0..t_count {
                        let w_xp = fam.member(t)?.outputs()[xp].matrix().get(i, j);
                        let w_x = fam.member(t)?.outputs()[x].matrix().get(i, j);
                        re[x * t_count + t] += w_xp.re;
                        re[xp * t_count + t] -= w_x.re;
                        im[x * t_count + t] += w_xp.im;
                        im[xp * t_count + t] -= w_x.im;
                    }
                    push_pair(re);
                    if i != j {
                        push_pair(im);
                    }
                }
            }
        }
    }

    // Assemble in standard form with slack variables for the inequality rows.
    let n_slack = rows.len() - a;
    let n = n_tau + 1 + n_slack;
    let mut c = vec![0.0; n];
    c[r_idx] = 1.0;
    let mut a_mat = Vec::with_capacity(rows.len());
    let mut slack = 0usize;
    for (k, row) in rows.iter().enumerate() {
        let mut full = vec![0.0; n];
        full[..row.len()].copy_from_slice(row);
        if k >= a {
            full[n_tau + 1 + slack] = 1.0;
            slack += 1;
        }
        a_mat.push(full);
    }

    let lp = LinearProgram {
        c,
        a: a_mat,
        b: rhs,
    };
    let outcome = solve_lp(&lp).map_err(InfoError::SolverFailure)?;
    let (x_opt, residual) = match outcome {
        LpOutcome::Optimal { x, value } => (x, value.max(0.0)),
        LpOutcome::Infeasible => {
            return Err(InfoError::SolverFailure(
                "symmetrizability LP infeasible; the residual program is always feasible".into(),
            ))
        }
        LpOutcome::Unbounded => {
            return Err(InfoError::SolverFailure(
                "symmetrizability LP unbounded; the residual is bounded below by 0".into(),
            ))
        }
    };

    let symmetrizable = residual <= tol_symm;
    let tau = if symmetrizable {
        let mut tau_rows = Vec::with_capacity(a);
        for x in 0..a {
            let mut row: Vec<f64> = (0..t_count)
                .map(|t| x_opt[x * t_count + t].max(0.0))
                .collect();
            let total: f64 = row.iter().sum();
            for v in &mut row {
                *v /= total;
            }
            tau_rows.push(ProbabilityDistribution::from_trusted(row));
        }
        Some(tau_rows)
    } else {
        None
    };
    Ok(SymmetrizabilityCertificate {
        symmetrizable,
        tau,
        residual,
        tolerance: tol_symm,
    })
}

/// Evaluates the symmetrizability residual of an explicit tau (Chebyshev
/// metric, same convention as [`symmetrizability_check`]).
pub fn symmetrizability_residual(
    fam: &IndexedChannelFamily,
    tau: &[ProbabilityDistribution],
) -> Result<f64> {
    let a = fam.alphabet_size();
    if tau.len() != a {
        return Err(InfoError::SolverFailure(format!(
            "tau has {} rows, alphabet needs {}",
            tau.len(),
            a
        )));
    }
    let d = fam.out_dim();
    let mut worst = 0.0_f64;
    for x in 0..a {
        for xp in (x + 1)..a {
            let mut lhs = crate::linalg::ComplexMatrix::zeros(d, d);
            let mut rhs_m = crate::linalg::ComplexMatrix::zeros(d, d);
            for t in 0..fam.len() {
                lhs = lhs.add(
                    &fam.member(t)?.outputs()[xp]
                        .matrix()
                        .scale(tau[x].weight(t)),
                );
                rhs_m = rhs_m.add(
                    &fam.member(t)?.outputs()[x]
                        .matrix()
                        .scale(tau[xp].weight(t)),
                );
            }
            let diff = lhs.sub(&rhs_m);
            for i in 0..d {
                for j in 0..d {
                    let z = diff.get(i, j);
                    worst = worst.max(z.re.abs()).max(z.im.abs());
                }
            }
        }
    }
    Ok(worst)
}

/// AVC transmission capacity: 0 with a symmetrizability certificate, else
/// the random-coding capacity (the same rule doubles as the AVC
/// ID-capacity). Returns the report together with the certificate.
pub fn avc_transmission_capacity(
    fam: &IndexedChannelFamily,
    tol: f64,
    tol_symm: f64,
) -> Result<(CapacityReport, SymmetrizabilityCertificate)> {
    let cert = symmetrizability_check(fam, tol_symm)?;
    if cert.symmetrizable {
        let a = fam.alphabet_size();
        let report = CapacityReport {
            value: 0.0,
            optimizer: ProbabilityDistribution::uniform(a),
            index_optimizer: None,
            active_indices: Vec::new(),
            iterations: 0,
            gap_estimate: 0.0,
            tolerance: tol,
        };
        Ok((report, cert))
    } else {
        let report = random_coding_capacity(fam, tol)?;
        Ok((report, cert))
    }
}

// ---------------------------------------------------------------------------
// Secrecy lower bounds (single-letter proxies)
// ---------------------------------------------------------------------------

/// Three-valued secrecy positivity decision. The single-letter proxy can
/// certify positivity but never certifies an exact zero (the true secrecy
/// capacity is multi-letter).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecrecyPositivity {
    /// Proxy value exceeds the tolerance: secrecy capacity certified > 0.
    Positive,
    /// Proxy vanished; genuine zero is NOT certified.
    ZeroProxy,
    /// Zero certified by structure (identical channels, zero transmission
    /// capacity, or a symmetrizability certificate for AVC pairs).
    ZeroCertified,
}

impl SecrecyPositivity {
    pub fn label(&self) -> &'static str {
        match self {
            SecrecyPositivity::Positive => "POSITIVE",
            SecrecyPositivity::ZeroProxy => "ZERO_PROXY (not certified zero)",
            SecrecyPositivity::ZeroCertified => "ZERO_CERTIFIED",
        }
    }
}

/// Result of a secrecy lower-bound search.
#[derive(Debug, Clone)]
pub struct SecrecyBound {
    /// Achievable lower-bound proxy, clamped at 0.
    pub value: f64,
    pub auxiliary: AuxiliaryChannel,
    pub starts: usize,
    pub iterations: usize,
}

struct SecrecyObjective<'a> {
    legal: &'a IndexedChannelFamily,
    eve: &'a IndexedChannelFamily,
    /// Minimize over the legal convex hull (AVC reading) instead of over
    /// the member list (compound reading).
    legal_hull: bool,
    tol_inner: f64,
    tols: &'a Tolerances,
}

/// State shared between an objective evaluation and the following
/// gradient step: the active members and, for the hull reading, the inner
/// minimizer.
struct SecrecyPoint {
    value: f64,
    legal_arg: usize,
    eve_arg: usize,
    hull_q: Option<Vec<f64>>,
}

impl SecrecyObjective<'_> {
    /// inf over the legal side of I(U;B) minus sup over Eve's side of
    /// I(U;E). `tight` controls the certification accuracy of the inner
    /// hull minimization; screening passes use a loose solve.
    fn eval(&self, aux: &AuxiliaryChannel, tight: bool) -> Result<SecrecyPoint> {
        let mut legal_min = f64::INFINITY;
        let mut legal_arg = 0usize;
        let mut hull_q = None;
        if self.legal_hull && self.legal.len() > 1 {
            // Certified hull minimum at the composed channel.
            let composed: Vec<CqChannel> = self
                .legal
                .members()
                .iter()
                .map(|m| aux.compose(m))
                .collect::<Result<Vec<_>>>()?;
            let fam = IndexedChannelFamily::new(ChannelSemantics::Avc, composed)?;
            let inner_tol = if tight {
                self.tol_inner
            } else {
                self.tol_inner.max(1e-3)
            };
            let (q, _, lb) = hull_min(&fam, aux.prior.weights(), inner_tol, self.tols)?;
            legal_min = lb;
            hull_q = Some(q);
        } else {
            for (t, member) in self.legal.members().iter().enumerate() {
                let eff = aux.compose(member)?;
                let info = holevo_information_with(&aux.prior, &eff, self.tols)?;
                if info < legal_min {
                    legal_min = info;
                    legal_arg = t;
                }
            }
        }
        let mut eve_max = f64::NEG_INFINITY;
        let mut eve_arg = 0usize;
        for (s, member) in self.eve.members().iter().enumerate() {
            let eff = aux.compose(member)?;
            let info = holevo_information_with(&aux.prior, &eff, self.tols)?;
            if info > eve_max {
                eve_max = info;
                eve_arg = s;
            }
        }
        Ok(SecrecyPoint {
            value: legal_min - eve_max,
            legal_arg,
            eve_arg,
            hull_q,
        })
    }

    /// Ascent supergradient of the objective with respect to the prior and
    /// the kernel rows, taken at the active legal/eve members (or the hull
    /// minimizer recorded by the preceding eval).
    fn gradient(
        &self,
        aux: &AuxiliaryChannel,
        point: &SecrecyPoint,
    ) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        use crate::linalg::hermitian_eigensystem;
        const FLOOR: f64 = 1e-14;
        let u = aux.u_size();
        let a = self.legal.alphabet_size();

        let legal_channel = match &point.hull_q {
            Some(q) => hull_channel(self.legal, q)?,
            None => self.legal.members()[point.legal_arg].clone(),
        };
        let eve_channel = &self.eve.members()[point.eve_arg];

        let mut grad_prior = vec![0.0; u];
        let mut grad_kernel = vec![vec![0.0; a]; u];
        for (channel, sign) in [(&legal_channel, 1.0), (eve_channel, -1.0)] {
            let eff = aux.compose(channel)?;
            let mixed = eff.output_mixture(&aux.prior)?;
            let log_mixed =
                hermitian_eigensystem(mixed.matrix(), self.tols)?.apply(|l| l.max(FLOOR).log2());
            for uu in 0..u {
                let sigma_u = &eff.outputs()[uu];
                let log_u = hermitian_eigensystem(sigma_u.matrix(), self.tols)?
                    .apply(|l| l.max(FLOOR).log2());
                // d I / d p(u) = D(sigma_u || mixed) - log2 e; the constant
                // drops out of the normalized multiplicative step.
                grad_prior[uu] += sign * relative_entropy(sigma_u, &mixed, self.tols)?.min(DIV_CAP);
                let pu = aux.prior.weight(uu);
                if pu > 0.0 {
                    for x in 0..a {
                        let wx = channel.outputs()[x].matrix();
                        let g = wx.trace_product(&log_u).re - wx.trace_product(&log_mixed).re;
                        grad_kernel[uu][x] += sign * pu * g;
                    }
                }
            }
        }
        Ok((grad_prior, grad_kernel))
    }
}

fn ascend_secrecy(
    obj: &SecrecyObjective<'_>,
    u_size: usize,
    tol: f64,
    seed: u64,
) -> Result<SecrecyBound> {
    let a = obj.legal.alphabet_size();
    let mut starts: Vec<AuxiliaryChannel> = Vec::new();

    // Deterministic kernels with uniform priors: for small alphabets this
    // sweeps every map U -> X, which covers the classical optima.
    let map_count = (a as u64).checked_pow(u_size as u32).unwrap_or(u64::MAX);
    if map_count <= 256 {
        for code in 0..map_count {
            let mut rest = code;
            let mut kernel = Vec::with_capacity(u_size);
            for _ in 0..u_size {
                let x = (rest % a as u64) as usize;
                rest /= a as u64;
                kernel.push(ProbabilityDistribution::point_mass(a, x));
            }
            starts.push(AuxiliaryChannel {
                prior: ProbabilityDistribution::uniform(u_size),
                kernel,
            });
        }
    } else {
        let mut kernel = Vec::with_capacity(u_size);
        for uu in 0..u_size {
            kernel.push(ProbabilityDistribution::point_mass(a, uu % a));
        }
        starts.push(AuxiliaryChannel {
            prior: ProbabilityDistribution::uniform(u_size),
            kernel,
        });
    }
    // Seeded random interior starts.
    for k in 0..6u64 {
        let mut rng = sampling::derived_rng(seed, 0x5ec0 + k);
        let prior = sampling::random_distribution(u_size, &mut rng);
        let kernel = (0..u_size)
            .map(|_| sampling::random_distribution(a, &mut rng))
            .collect();
        starts.push(AuxiliaryChannel { prior, kernel });
    }

    let start_count = starts.len();
    let mut total_iters = 0usize;

    // Screening pass: evaluate every start once (loose inner solves) and
    // keep the most promising few for the ascent.
    let mut screened: Vec<(f64, usize)> = Vec::with_capacity(start_count);
    for (idx, aux) in starts.iter().enumerate() {
        let point = obj.eval(aux, false)?;
        total_iters += 1;
        screened.push((point.value, idx));
    }
    screened.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let ascend_count = 5.min(screened.len());

    let mut best_val = f64::NEG_INFINITY;
    let mut best_aux = starts[screened[0].1].clone();

    for &(_, idx) in screened.iter().take(ascend_count) {
        let mut aux = starts[idx].clone();
        let mut point = obj.eval(&aux, false)?;
        if point.value > best_val {
            best_val = point.value;
            best_aux = aux.clone();
        }
        let mut since_improvement = 0usize;
        for step in 1..=600 {
            total_iters += 1;
            let (g_prior, g_kernel) = obj.gradient(&aux, &point)?;
            let eta = 0.4 / (step as f64).sqrt();
            let prior = exp_grad_step(aux.prior.weights(), &g_prior, eta);
            let kernel: Vec<ProbabilityDistribution> = aux
                .kernel
                .iter()
                .zip(&g_kernel)
                .map(|(row, g)| {
                    ProbabilityDistribution::from_trusted(exp_grad_step(row.weights(), g, eta))
                })
                .collect();
            let cand = AuxiliaryChannel {
                prior: ProbabilityDistribution::from_trusted(prior),
                kernel,
            };
            let cand_point = obj.eval(&cand, false)?;
            let improved = cand_point.value > point.value + tol / 100.0;
            aux = cand;
            point = cand_point;
            if improved {
                since_improvement = 0;
            } else {
                since_improvement += 1;
            }
            if point.value > best_val {
                best_val = point.value;
                best_aux = aux.clone();
            }
            if since_improvement > 50 {
                break;
            }
        }
    }

    // Final tight evaluation of the winner: for the hull reading the loose
    // screening bound may understate the certified minimum.
    let final_point = obj.eval(&best_aux, true)?;
    best_val = best_val.max(final_point.value);
    if obj.legal_hull {
        best_val = final_point.value;
    }

    Ok(SecrecyBound {
        value: best_val.max(0.0),
        auxiliary: best_aux,
        starts: start_count,
        iterations: total_iters,
    })
}

/// Single-letter achievable secrecy lower bound for a point wiretap pair:
/// max over auxiliary channels U -> X with |U| = u_size of
/// I(U;B) - I(U;E), clamped at 0. A lower-bound proxy for the (multi-letter)
/// secrecy capacity; monotone nondecreasing in u_size.
pub fn secrecy_lower_bound_single_letter(
    wp: &WiretapPair,
    u_size: usize,
    tol: f64,
    seed: u64,
) -> Result<SecrecyBound> {
    if u_size == 0 {
        return Err(InfoError::SolverFailure("u_size must be at least 1".into()));
    }
    let tols = Tolerances::default();
    let obj = SecrecyObjective {
        legal: wp.legal(),
        eve: wp.eve(),
        legal_hull: false,
        tol_inner: tol / 4.0,
        tols: &tols,
    };
    ascend_secrecy(&obj, u_size, tol, seed)
}

/// Compound version: max over U of inf_t I(U;B_t) - sup_s I(U;E_s),
/// clamped at 0.
pub fn compound_secrecy_lower_bound(
    wp: &WiretapPair,
    u_size: usize,
    tol: f64,
    seed: u64,
) -> Result<SecrecyBound> {
    if u_size == 0 {
        return Err(InfoError::SolverFailure("u_size must be at least 1".into()));
    }
    let tols = Tolerances::default();
    let obj = SecrecyObjective {
        legal: wp.legal(),
        eve: wp.eve(),
        legal_hull: false,
        tol_inner: tol / 4.0,
        tols: &tols,
    };
    ascend_secrecy(&obj, u_size, tol, seed)
}

/// AVC version: the legal side is minimized over the convex hull of the
/// family (random-coding reading), Eve over her index set.
pub fn avwc_secrecy_lower_bound(
    wp: &WiretapPair,
    u_size: usize,
    tol: f64,
    seed: u64,
) -> Result<SecrecyBound> {
    if wp.flavour() != WiretapFlavour::Avc {
        return Err(InfoError::SolverFailure(
            "avwc_secrecy_lower_bound requires an AVC wiretap pair".into(),
        ));
    }
    let tols = Tolerances::default();
    let obj = SecrecyObjective {
        legal: wp.legal(),
        eve: wp.eve(),
        legal_hull: true,
        tol_inner: tol / 4.0,
        tols: &tols,
    };
    ascend_secrecy(&obj, u_size, tol, seed)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelSemantics;
    use approx::assert_abs_diff_eq;

    fn bsc(p: f64) -> CqChannel {
        CqChannel::binary_symmetric(p).unwrap()
    }

    fn h(p: f64) -> f64 {
        crate::linalg::binary_entropy(p).unwrap()
    }

    #[test]
    fn holevo_information_basic() {
        let uniform = ProbabilityDistribution::uniform(2);
        // Orthogonal pure outputs: one classical bit.
        let w = CqChannel::noiseless_classical(2);
        assert_abs_diff_eq!(
            holevo_information(&uniform, &w).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // Constant channel: zero.
        let c = CqChannel::constant(DensityOperator::maximally_mixed(2), 2);
        assert_abs_diff_eq!(
            holevo_information(&uniform, &c).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        // BSC(0.1) embedding: 1 - h(0.1), the classical mutual information.
        assert_abs_diff_eq!(
            holevo_information(&uniform, &bsc(0.1)).unwrap(),
            1.0 - h(0.1),
            epsilon = 1e-10
        );
    }

    #[test]
    fn holevo_information_is_concave_in_p() {
        let mut rng = sampling::rng_from_seed(41);
        let w = sampling::random_cq_channel(3, 2, &mut rng);
        for _ in 0..20 {
            let p = sampling::random_distribution(3, &mut rng);
            let q = sampling::random_distribution(3, &mut rng);
            let mix: Vec<f64> = p
                .weights()
                .iter()
                .zip(q.weights())
                .map(|(a, b)| 0.5 * a + 0.5 * b)
                .collect();
            let mix = ProbabilityDistribution::new(mix).unwrap();
            let lhs = holevo_information(&mix, &w).unwrap();
            let rhs = 0.5 * holevo_information(&p, &w).unwrap()
                + 0.5 * holevo_information(&q, &w).unwrap();
            assert!(lhs >= rhs - 1e-9);
        }
    }

    #[test]
    fn holevo_capacity_trivial_channels() {
        let r = holevo_capacity(&CqChannel::noiseless_classical(2), 1e-8).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-8);
        assert!(r.gap_estimate <= 1e-8);

        let c = CqChannel::constant(DensityOperator::maximally_mixed(2), 2);
        let r = holevo_capacity(&c, 1e-8).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn holevo_capacity_bsc_matches_formula() {
        let r = holevo_capacity(&bsc(0.1), 1e-8).unwrap();
        assert_abs_diff_eq!(r.value, 1.0 - h(0.1), epsilon = 1e-6);
        // Capacity-achieving input is uniform.
        assert_abs_diff_eq!(r.optimizer.weight(0), 0.5, epsilon = 1e-4);
    }

    #[test]
    fn holevo_capacity_survives_letter_underflow() {
        // Letter 2 owns the only weight on |2><2| but is heavily dominated,
        // so the ascent shrinks it hard before the optimality condition
        // pulls it back; the smoothed reference keeps the certified bound
        // finite throughout.
        let w = CqChannel::classical(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.34, 0.33, 0.33],
        ])
        .unwrap();
        let r = holevo_capacity(&w, 1e-7).unwrap();
        assert!(r.gap_estimate <= 1e-7);
        // Two orthogonal letters alone give one bit; the third adds more.
        assert!(r.value > 1.0);
        assert!(r.value < (3.0_f64).log2());
        // The optimal input keeps the unique-support letter alive.
        assert!(r.optimizer.weight(2) > 1e-3);
    }

    #[test]
    fn compound_capacity_singleton_matches_point() {
        let fam = IndexedChannelFamily::singleton(ChannelSemantics::Compound, bsc(0.1));
        let r = compound_capacity(&fam, 1e-7).unwrap();
        let point = holevo_capacity(&bsc(0.1), 1e-7).unwrap();
        assert_abs_diff_eq!(r.value, point.value, epsilon = 1e-6);
    }

    #[test]
    fn compound_capacity_with_constant_member_is_zero() {
        let fam = IndexedChannelFamily::new(
            ChannelSemantics::Compound,
            vec![
                bsc(0.1),
                CqChannel::constant(DensityOperator::maximally_mixed(2), 2),
            ],
        )
        .unwrap();
        let r = compound_capacity(&fam, 1e-7).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-7);
    }

    #[test]
    fn compound_capacity_bsc_pair() {
        let fam = IndexedChannelFamily::new(ChannelSemantics::Compound, vec![bsc(0.1), bsc(0.2)])
            .unwrap();
        let r = compound_capacity(&fam, 1e-6).unwrap();
        assert_abs_diff_eq!(r.value, 1.0 - h(0.2), epsilon = 1e-4);
        assert!(r.active_indices.contains(&1));
    }

    #[test]
    fn convex_hull_member_cases() {
        let w0 = CqChannel::noiseless_classical(2);
        let w1 = CqChannel::new(vec![
            DensityOperator::basis(2, 1),
            DensityOperator::basis(2, 0),
        ])
        .unwrap();
        let fam = IndexedChannelFamily::new(ChannelSemantics::Avc, vec![w0.clone(), w1]).unwrap();

        // Point mass recovers the member.
        let point = convex_hull_member(&fam, &ProbabilityDistribution::point_mass(2, 0)).unwrap();
        assert_eq!(&point, &w0);

        // Uniform mixture of the swapped pair is the constant I/2 channel.
        let mixed = convex_hull_member(&fam, &ProbabilityDistribution::uniform(2)).unwrap();
        for x in 0..2 {
            assert!(
                mixed.outputs()[x]
                    .matrix()
                    .max_entry_diff(DensityOperator::maximally_mixed(2).matrix())
                    < 1e-12
            );
        }
    }

    #[test]
    fn random_coding_capacity_swapped_pair_is_zero() {
        let w0 = CqChannel::noiseless_classical(2);
        let w1 = CqChannel::new(vec![
            DensityOperator::basis(2, 1),
            DensityOperator::basis(2, 0),
        ])
        .unwrap();
        let fam = IndexedChannelFamily::new(ChannelSemantics::Avc, vec![w0, w1]).unwrap();
        let r = random_coding_capacity(&fam, 1e-7).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-7);
    }

    #[test]
    fn random_coding_capacity_singleton_is_point_capacity() {
        let fam = IndexedChannelFamily::singleton(ChannelSemantics::Avc, bsc(0.1));
        let r = random_coding_capacity(&fam, 1e-6).unwrap();
        assert_abs_diff_eq!(r.value, 1.0 - h(0.1), epsilon = 1e-5);
    }

    #[test]
    fn random_coding_capacity_bsc_family() {
        // Hull of BSC(0.05) and BSC(0.15) embeddings is {BSC(f)} for
        // f in [0.05, 0.15]; the information is decreasing in f there, so
        // the inner minimum sits at the noisier vertex.
        let fam =
            IndexedChannelFamily::new(ChannelSemantics::Avc, vec![bsc(0.05), bsc(0.15)]).unwrap();
        let r = random_coding_capacity(&fam, 1e-6).unwrap();
        assert_abs_diff_eq!(r.value, 1.0 - h(0.15), epsilon = 1e-4);
    }

    #[test]
    fn symmetrizability_of_constant_family() {
        let c = CqChannel::constant(DensityOperator::maximally_mixed(2), 2);
        let fam = IndexedChannelFamily::new(ChannelSemantics::Avc, vec![c.clone(), c]).unwrap();
        let cert = symmetrizability_check(&fam, 1e-7).unwrap();
        assert!(cert.symmetrizable);
        assert!(cert.residual <= 1e-10);
    }

    #[test]
    fn symmetrizability_singleton_requires_constant_channel() {
        let fam = IndexedChannelFamily::singleton(ChannelSemantics::Avc, bsc(0.1));
        let cert = symmetrizability_check(&fam, 1e-7).unwrap();
        assert!(!cert.symmetrizable);
        // Residual equals the max entry of W(0) - W(1): |0.9 - 0.1| = 0.8.
        assert_abs_diff_eq!(cert.residual, 0.8, epsilon = 1e-9);
    }

    #[test]
    fn symmetrizability_swapped_pair() {
        let w0 = CqChannel::noiseless_classical(2);
        let w1 = CqChannel::new(vec![
            DensityOperator::basis(2, 1),
            DensityOperator::basis(2, 0),
        ])
        .unwrap();
        let fam = IndexedChannelFamily::new(ChannelSemantics::Avc, vec![w0, w1]).unwrap();
        let cert = symmetrizability_check(&fam, 1e-7).unwrap();
        assert!(cert.symmetrizable);
        assert!(cert.residual <= 1e-10);
        // The witness must satisfy the defining condition when substituted.
        let tau = cert.tau.unwrap();
        assert!(symmetrizability_residual(&fam, &tau).unwrap() <= 1e-9);
    }

    #[test]
    fn avc_capacity_gates_on_symmetrizability() {
        let w0 = CqChannel::noiseless_classical(2);
        let w1 = CqChannel::new(vec![
            DensityOperator::basis(2, 1),
            DensityOperator::basis(2, 0),
        ])
        .unwrap();
        let fam = IndexedChannelFamily::new(ChannelSemantics::Avc, vec![w0.clone(), w1]).unwrap();
        let (report, cert) = avc_transmission_capacity(&fam, 1e-6, 1e-7).unwrap();
        assert!(cert.symmetrizable);
        assert_abs_diff_eq!(report.value, 0.0, epsilon = 0.0);

        let single = IndexedChannelFamily::singleton(ChannelSemantics::Avc, w0);
        let (report, cert) = avc_transmission_capacity(&single, 1e-6, 1e-7).unwrap();
        assert!(!cert.symmetrizable);
        assert_abs_diff_eq!(report.value, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn secrecy_bound_eve_equals_bob_is_zero() {
        let wp = WiretapPair::point(bsc(0.1), bsc(0.1)).unwrap();
        let bound = secrecy_lower_bound_single_letter(&wp, 2, 1e-6, 7).unwrap();
        assert_abs_diff_eq!(bound.value, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn secrecy_bound_constant_eve_gives_full_capacity() {
        let w = CqChannel::noiseless_classical(2);
        let v = CqChannel::constant(DensityOperator::maximally_mixed(2), 2);
        let wp = WiretapPair::point(w, v).unwrap();
        let bound = secrecy_lower_bound_single_letter(&wp, 2, 1e-6, 7).unwrap();
        assert_abs_diff_eq!(bound.value, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn secrecy_bound_degraded_bsc_matches_formula() {
        // Degraded classical pair: optimum at U = X uniform,
        // value h(0.3) - h(0.1).
        let wp = WiretapPair::point(bsc(0.1), bsc(0.3)).unwrap();
        let bound = secrecy_lower_bound_single_letter(&wp, 2, 1e-6, 7).unwrap();
        assert_abs_diff_eq!(bound.value, h(0.3) - h(0.1), epsilon = 1e-5);
    }

    #[test]
    fn secrecy_bound_monotone_in_u_size() {
        let wp = WiretapPair::point(bsc(0.1), bsc(0.3)).unwrap();
        let mut last = 0.0;
        for u_size in 1..=3 {
            let bound = secrecy_lower_bound_single_letter(&wp, u_size, 1e-6, 7).unwrap();
            assert!(
                bound.value >= last - 1e-6,
                "u = {u_size}: {} < {last}",
                bound.value
            );
            last = bound.value;
        }
        // |U| = 1 carries no information at all.
        let trivial = secrecy_lower_bound_single_letter(&wp, 1, 1e-6, 7).unwrap();
        assert!(trivial.value.abs() <= 1e-12);
    }

    #[test]
    fn compound_secrecy_reduces_and_dominated_cases() {
        // Singleton compound pair reduces to the point bound.
        let legal = IndexedChannelFamily::singleton(ChannelSemantics::Compound, bsc(0.1));
        let eve = IndexedChannelFamily::singleton(ChannelSemantics::Compound, bsc(0.3));
        let wp = WiretapPair::family(WiretapFlavour::Compound, legal, eve).unwrap();
        let bound = compound_secrecy_lower_bound(&wp, 2, 1e-6, 7).unwrap();
        assert_abs_diff_eq!(bound.value, h(0.3) - h(0.1), epsilon = 1e-5);

        // Eve holding a copy of each legal member kills the bound.
        let legal = IndexedChannelFamily::new(ChannelSemantics::Compound, vec![bsc(0.1), bsc(0.2)])
            .unwrap();
        let eve = legal.clone();
        let wp = WiretapPair::family(WiretapFlavour::Compound, legal, eve).unwrap();
        let bound = compound_secrecy_lower_bound(&wp, 2, 1e-6, 7).unwrap();
        assert_abs_diff_eq!(bound.value, 0.0, epsilon = 1e-9);
    }
}
