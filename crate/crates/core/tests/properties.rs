//! Sampled invariant checks for the operator toolbox, the channel model
//! and the capacity solvers.

use cqid_core::channel::{
    channel_distance, family_distance, tensor_families, ChannelSemantics, CqChannel,
    IndexedChannelFamily, SparseInputDistribution, WiretapFlavour, WiretapPair,
};
use cqid_core::info::{
    avc_transmission_capacity, holevo_capacity, holevo_information, random_coding_capacity,
    secrecy_lower_bound_single_letter,
};
use cqid_core::linalg::{
    binary_entropy, fidelity, hermitian_eigensystem, trace_distance, von_neumann_entropy,
    DensityOperator, ProbabilityDistribution, Tolerances,
};
use cqid_core::secrecy::{
    build_wiretap_id_code, lemma3_bound, lemma4_bound, two_message_channel, WiretapIdOptions,
};
use cqid_core::{sampling, Guards};

#[test]
fn eigensystem_reconstruction_on_1000_random_hermitians() {
    let mut rng = sampling::rng_from_seed(1);
    let tol = Tolerances::default();
    for case in 0..1000 {
        let dim = 2 + case % 7; // 2..8
        let h = sampling::random_hermitian(dim, 1.0, &mut rng);
        let sys = hermitian_eigensystem(&h, &tol).unwrap();
        let recon = sys.apply(|x| x);
        assert!(
            recon.max_entry_diff(&h) <= 1e-9,
            "case {case}: reconstruction error {}",
            recon.max_entry_diff(&h)
        );
        for k in 1..dim {
            assert!(sys.eigenvalues[k - 1] >= sys.eigenvalues[k]);
        }
    }
}

#[test]
fn entropy_bounds_and_unitary_invariance() {
    let mut rng = sampling::rng_from_seed(2);
    for case in 0..200 {
        let dim = 2 + case % 4;
        let rho = sampling::random_density(dim, &mut rng);
        let s = von_neumann_entropy(&rho).unwrap();
        assert!((0.0..=(dim as f64).log2() + 1e-12).contains(&s));

        let u = sampling::random_unitary(dim, &mut rng);
        let rotated =
            DensityOperator::new(u.matmul(rho.matrix()).matmul(&u.dagger()).hermitized()).unwrap();
        let s_rot = von_neumann_entropy(&rotated).unwrap();
        assert!((s - s_rot).abs() <= 1e-9, "case {case}: {s} vs {s_rot}");
    }
}

#[test]
fn trace_distance_is_a_metric_on_sampled_triples() {
    let mut rng = sampling::rng_from_seed(3);
    for _ in 0..100 {
        let dim = 2 + (rng.next_u32() % 3) as usize;
        let a = sampling::random_density(dim, &mut rng);
        let b = sampling::random_density(dim, &mut rng);
        let c = sampling::random_density(dim, &mut rng);
        let dab = trace_distance(&a, &b).unwrap();
        let dba = trace_distance(&b, &a).unwrap();
        let dbc = trace_distance(&b, &c).unwrap();
        let dac = trace_distance(&a, &c).unwrap();
        assert_eq!(dab, dba, "symmetry is exact");
        assert!(dac <= dab + dbc + 1e-12);
        assert!(trace_distance(&a, &a).unwrap() <= 1e-12);
    }
}

#[test]
fn fuchs_van_de_graaf_sandwich() {
    let mut rng = sampling::rng_from_seed(4);
    for case in 0..200 {
        let dim = 2 + case % 3;
        let a = sampling::random_density(dim, &mut rng);
        let b = sampling::random_density(dim, &mut rng);
        let t = trace_distance(&a, &b).unwrap();
        let f = fidelity(&a, &b).unwrap();
        assert!(
            1.0 - f <= t + 1e-9,
            "case {case}: 1-F = {} > T = {t}",
            1.0 - f
        );
        assert!(
            t <= (1.0 - f * f).max(0.0).sqrt() + 1e-9,
            "case {case}: T = {t} > sqrt(1-F^2) = {}",
            (1.0 - f * f).max(0.0).sqrt()
        );
    }
}

#[test]
fn binary_entropy_is_concave() {
    let mut rng = sampling::rng_from_seed(5);
    use rand::RngExt;
    for _ in 0..500 {
        let p: f64 = rng.random();
        let q: f64 = rng.random();
        let lhs = binary_entropy(0.5 * (p + q)).unwrap();
        let rhs = 0.5 * binary_entropy(p).unwrap() + 0.5 * binary_entropy(q).unwrap();
        assert!(lhs >= rhs - 1e-12);
    }
}

#[test]
fn family_distance_zero_iff_mutual_counterparts() {
    let tol = Tolerances::default();
    let mut rng = sampling::rng_from_seed(6);
    let w1 = sampling::random_cq_channel(2, 2, &mut rng);
    let w2 = sampling::random_cq_channel(2, 2, &mut rng);
    // Same member set listed in different orders and multiplicities:
    // distance 0.
    let fam_a = IndexedChannelFamily::new(ChannelSemantics::Compound, vec![w1.clone(), w2.clone()])
        .unwrap();
    let fam_b = IndexedChannelFamily::new(
        ChannelSemantics::Compound,
        vec![w2.clone(), w1.clone(), w2.clone()],
    )
    .unwrap();
    assert_eq!(family_distance(&fam_a, &fam_b, &tol).unwrap(), 0.0);

    // A member without a distance-0 counterpart forces a positive
    // distance; the value matches a by-hand max-min over the member grid.
    let w3 = sampling::random_cq_channel(2, 2, &mut rng);
    let fam_c = IndexedChannelFamily::new(ChannelSemantics::Compound, vec![w1.clone(), w3.clone()])
        .unwrap();
    let d = family_distance(&fam_a, &fam_c, &tol).unwrap();
    let pd = |x: &CqChannel, y: &CqChannel| channel_distance(x, y, &tol).unwrap();
    let g_ac = [
        pd(&w1, &w1).min(pd(&w1, &w3)),
        pd(&w2, &w1).min(pd(&w2, &w3)),
    ]
    .into_iter()
    .fold(0.0_f64, f64::max);
    let g_ca = [
        pd(&w1, &w1).min(pd(&w1, &w2)),
        pd(&w3, &w1).min(pd(&w3, &w2)),
    ]
    .into_iter()
    .fold(0.0_f64, f64::max);
    assert!(d > 0.0);
    assert!((d - g_ac.max(g_ca)).abs() <= 1e-12);
}

#[test]
fn tensor_left_factor_perturbation_bound() {
    // d(W tensor V, W' tensor V) <= d(W, W') on samples: perturbing one
    // factor cannot stretch further through the tensor product.
    let tol = Tolerances::default();
    let mut rng = sampling::rng_from_seed(7);
    for _ in 0..20 {
        let w = sampling::random_cq_channel(2, 2, &mut rng);
        let w_prime = sampling::random_cq_channel(2, 2, &mut rng);
        let v = sampling::random_cq_channel(2, 2, &mut rng);
        let fam =
            |c: &CqChannel| IndexedChannelFamily::singleton(ChannelSemantics::Compound, c.clone());
        let left = tensor_families(&fam(&w), &fam(&v)).unwrap();
        let right = tensor_families(&fam(&w_prime), &fam(&v)).unwrap();
        let d_tensor =
            channel_distance(left.member(0).unwrap(), right.member(0).unwrap(), &tol).unwrap();
        let d_factor = channel_distance(&w, &w_prime, &tol).unwrap();
        assert!(d_tensor <= d_factor + 1e-9, "{d_tensor} > {d_factor}");
    }
}

#[test]
fn random_coding_capacity_below_vertex_capacities() {
    let mut rng = sampling::rng_from_seed(8);
    for _ in 0..5 {
        let members: Vec<CqChannel> = (0..2)
            .map(|_| sampling::random_classical_channel(2, 2, &mut rng))
            .collect();
        let min_vertex = members
            .iter()
            .map(|m| holevo_capacity(m, 1e-6).unwrap().value)
            .fold(f64::INFINITY, f64::min);
        let fam = IndexedChannelFamily::new(ChannelSemantics::Avc, members).unwrap();
        let c_ran = random_coding_capacity(&fam, 1e-4).unwrap().value;
        assert!(
            c_ran <= min_vertex + 1e-4,
            "{c_ran} > min vertex {min_vertex}"
        );
    }
}

#[test]
fn avc_capacity_internally_consistent() {
    // value == 0 iff the certificate says symmetrizable; otherwise the
    // value equals the random-coding capacity within tolerance.
    let swapped = IndexedChannelFamily::new(
        ChannelSemantics::Avc,
        vec![
            CqChannel::noiseless_classical(2),
            CqChannel::new(vec![
                DensityOperator::basis(2, 1),
                DensityOperator::basis(2, 0),
            ])
            .unwrap(),
        ],
    )
    .unwrap();
    let (report, cert) = avc_transmission_capacity(&swapped, 1e-6, 1e-7).unwrap();
    assert!(cert.symmetrizable && report.value == 0.0);

    let mut rng = sampling::rng_from_seed(9);
    let noisy = IndexedChannelFamily::new(
        ChannelSemantics::Avc,
        vec![
            CqChannel::binary_symmetric(0.05).unwrap(),
            sampling::random_classical_channel(2, 2, &mut rng),
        ],
    )
    .unwrap();
    let (report, cert) = avc_transmission_capacity(&noisy, 1e-4, 1e-7).unwrap();
    if cert.symmetrizable {
        assert_eq!(report.value, 0.0);
    } else {
        let c_ran = random_coding_capacity(&noisy, 1e-4).unwrap().value;
        assert!((report.value - c_ran).abs() <= 2e-4);
    }
}

#[test]
fn secrecy_proxy_dominated_by_capacity() {
    let mut rng = sampling::rng_from_seed(10);
    for seed in 0..3u64 {
        let w = sampling::random_classical_channel(2, 2, &mut rng);
        let v = sampling::random_classical_channel(2, 2, &mut rng);
        let cap = holevo_capacity(&w, 1e-6).unwrap().value;
        let wp = WiretapPair::point(w, v).unwrap();
        let proxy = secrecy_lower_bound_single_letter(&wp, 2, 1e-6, seed)
            .unwrap()
            .value;
        assert!(proxy <= cap + 1e-6, "proxy {proxy} > C {cap}");
    }
}

#[test]
fn wiretap_id_code_pairs_obey_lemma_bounds() {
    // Direct numerical confirmation of the two information bounds on the
    // message pairs of an evaluated wiretap ID code.
    let wp = WiretapPair::point(
        CqChannel::binary_symmetric(0.02).unwrap(),
        CqChannel::binary_symmetric(0.4).unwrap(),
    )
    .unwrap();
    let opts = WiretapIdOptions::new(4, 8, 4, 4, 1212);
    let code = build_wiretap_id_code(&wp, &opts, &Guards::default()).unwrap();
    let uniform = ProbabilityDistribution::uniform(2);
    let guards = Guards::default();
    let mut lemma4_checked = 0;
    for i in 0..code.code().len() {
        for j in 0..code.code().len() {
            if i == j {
                continue;
            }
            let q_i = code.code().encoding(i);
            let q_j = code.code().encoding(j);
            let w_tilde = two_message_channel(q_i, q_j, wp.legal_point(), &guards).unwrap();
            let v_tilde = two_message_channel(q_i, q_j, wp.eve_point(), &guards).unwrap();

            // Eve side: I(Q;V~) <= h(mu/2) for the pair's own mu.
            let mu = trace_distance(&v_tilde.outputs()[0], &v_tilde.outputs()[1]).unwrap();
            let i_v = holevo_information(&uniform, &v_tilde).unwrap();
            assert!(i_v <= lemma3_bound(mu).unwrap() + 1e-9);

            // Legal side, using this pair's verifier as the test, when the
            // error hypothesis holds.
            let d = code.code().verifier(i);
            let out_i = wp
                .legal_point()
                .output_under_distribution(q_i, &guards)
                .unwrap();
            let out_j = wp
                .legal_point()
                .output_under_distribution(q_j, &guards)
                .unwrap();
            let l1 = 1.0 - d.probability(&out_i).unwrap();
            let l2 = d.probability(&out_j).unwrap();
            if l1 <= 0.5 && l2 <= 0.5 {
                let i_w = holevo_information(&uniform, &w_tilde).unwrap();
                assert!(i_w >= lemma4_bound(l1, l2).unwrap() - 1e-9);
                lemma4_checked += 1;
            }
        }
    }
    assert!(lemma4_checked > 0, "no pair met the lemma hypothesis");
}

#[test]
fn sparse_distribution_block_output_consistency() {
    // Point channel, single-letter distribution: mixture equals the dense
    // output under the same weights.
    let mut rng = sampling::rng_from_seed(11);
    let w = sampling::random_cq_channel(3, 2, &mut rng);
    let p = sampling::random_distribution(3, &mut rng);
    let sparse = SparseInputDistribution::new(
        1,
        3,
        p.weights()
            .iter()
            .enumerate()
            .map(|(x, &wt)| (vec![x], wt))
            .collect(),
    )
    .unwrap();
    let dense = w.output_mixture(&p).unwrap();
    let via_sparse = w
        .output_under_distribution(&sparse, &Guards::default())
        .unwrap();
    assert!(dense.matrix().max_entry_diff(via_sparse.matrix()) < 1e-12);
}

#[test]
fn wiretap_tensor_flavour_checks() {
    let w = CqChannel::binary_symmetric(0.1).unwrap();
    let v = CqChannel::binary_symmetric(0.3).unwrap();
    let point = WiretapPair::point(w.clone(), v.clone()).unwrap();
    let avc = WiretapPair::family(
        WiretapFlavour::Avc,
        IndexedChannelFamily::singleton(ChannelSemantics::Avc, w),
        IndexedChannelFamily::singleton(ChannelSemantics::Avc, v),
    )
    .unwrap();
    assert!(point.tensor(&avc).is_err());
    let squared = avc.tensor(&avc).unwrap();
    assert_eq!(squared.alphabet_size(), 4);
    assert_eq!(squared.legal().out_dim(), 4);
}

trait NextU32 {
    fn next_u32(&mut self) -> u32;
}

impl NextU32 for sampling::SeededRng {
    fn next_u32(&mut self) -> u32 {
        use rand::RngExt;
        self.random()
    }
}

// ---------------------------------------------------------------------------
// Grid oracles for the optimization surfaces
// ---------------------------------------------------------------------------

/// Classical mutual information I(U;Y) for prior p over {0,1} and
/// row-stochastic matrices K (U -> X) and W (X -> Y), all classical.
fn classical_mutual_info(p: &[f64], k: &[Vec<f64>], w: &[Vec<f64>]) -> f64 {
    let out = w[0].len();
    let eff: Vec<Vec<f64>> = k
        .iter()
        .map(|row| {
            (0..out)
                .map(|y| row.iter().zip(w).map(|(kx, wrow)| kx * wrow[y]).sum())
                .collect()
        })
        .collect();
    let mut marginal = vec![0.0; out];
    for (u, row) in eff.iter().enumerate() {
        for (y, v) in row.iter().enumerate() {
            marginal[y] += p[u] * v;
        }
    }
    let mut info = 0.0;
    for (u, row) in eff.iter().enumerate() {
        for (y, v) in row.iter().enumerate() {
            if *v > 0.0 && marginal[y] > 0.0 {
                info += p[u] * v * (v / marginal[y]).log2();
            }
        }
    }
    info
}

fn bsc_rows(p: f64) -> Vec<Vec<f64>> {
    vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
}

#[test]
fn secrecy_proxy_dominates_grid_oracle() {
    // Exhaustive grid over (prior, kernel rows) for binary U: the proxy
    // search must reach at least the grid maximum of I(U;B) - I(U;E).
    let w = bsc_rows(0.1);
    let v = bsc_rows(0.3);
    let steps = 20;
    let mut grid_best = f64::NEG_INFINITY;
    for pi in 1..steps {
        let p = [pi as f64 / steps as f64, 1.0 - pi as f64 / steps as f64];
        for k0 in 0..=steps {
            for k1 in 0..=steps {
                let k = vec![
                    vec![k0 as f64 / steps as f64, 1.0 - k0 as f64 / steps as f64],
                    vec![k1 as f64 / steps as f64, 1.0 - k1 as f64 / steps as f64],
                ];
                let val = classical_mutual_info(&p, &k, &w) - classical_mutual_info(&p, &k, &v);
                grid_best = grid_best.max(val);
            }
        }
    }
    let wp = WiretapPair::point(
        CqChannel::binary_symmetric(0.1).unwrap(),
        CqChannel::binary_symmetric(0.3).unwrap(),
    )
    .unwrap();
    let proxy = secrecy_lower_bound_single_letter(&wp, 2, 1e-6, 21)
        .unwrap()
        .value;
    assert!(
        proxy >= grid_best - 1e-6,
        "proxy {proxy} below grid oracle {grid_best}"
    );
    // And the grid confirms the analytic optimum h(0.3) - h(0.1).
    let analytic = binary_entropy(0.3).unwrap() - binary_entropy(0.1).unwrap();
    assert!((proxy - analytic).abs() <= 1e-4);
}

#[test]
fn compound_secrecy_proxy_dominates_grid_oracle() {
    // Two-member legal family, one-member Eve: the objective is
    // min_t I(U;B_t) - I(U;E) and the search must reach the grid value.
    let w_members = [bsc_rows(0.1), bsc_rows(0.2)];
    let v = bsc_rows(0.35);
    let steps = 20;
    let mut grid_best = f64::NEG_INFINITY;
    for pi in 1..steps {
        let p = [pi as f64 / steps as f64, 1.0 - pi as f64 / steps as f64];
        for k0 in 0..=steps {
            for k1 in 0..=steps {
                let k = vec![
                    vec![k0 as f64 / steps as f64, 1.0 - k0 as f64 / steps as f64],
                    vec![k1 as f64 / steps as f64, 1.0 - k1 as f64 / steps as f64],
                ];
                let legal = w_members
                    .iter()
                    .map(|w| classical_mutual_info(&p, &k, w))
                    .fold(f64::INFINITY, f64::min);
                let val = legal - classical_mutual_info(&p, &k, &v);
                grid_best = grid_best.max(val);
            }
        }
    }
    let wp = WiretapPair::family(
        WiretapFlavour::Compound,
        IndexedChannelFamily::new(
            ChannelSemantics::Compound,
            vec![
                CqChannel::binary_symmetric(0.1).unwrap(),
                CqChannel::binary_symmetric(0.2).unwrap(),
            ],
        )
        .unwrap(),
        IndexedChannelFamily::singleton(
            ChannelSemantics::Compound,
            CqChannel::binary_symmetric(0.35).unwrap(),
        ),
    )
    .unwrap();
    let proxy = cqid_core::info::compound_secrecy_lower_bound(&wp, 2, 1e-6, 23)
        .unwrap()
        .value;
    assert!(
        proxy >= grid_best - 1e-6,
        "proxy {proxy} below grid oracle {grid_best}"
    );
}

#[test]
fn random_coding_capacity_matches_grid_minimax_oracle() {
    // Dense grid over the input simplex and hull weights for the
    // two-member BSC family: max over p of min over q of I(p; W_q).
    let members = [0.05, 0.15];
    let steps = 200;
    let mut best = f64::NEG_INFINITY;
    for pi in 0..=steps {
        let p = [pi as f64 / steps as f64, 1.0 - pi as f64 / steps as f64];
        let mut inner = f64::INFINITY;
        for qi in 0..=steps {
            let q = qi as f64 / steps as f64;
            let flip = q * members[0] + (1.0 - q) * members[1];
            let w = bsc_rows(flip);
            let identity = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
            inner = inner.min(classical_mutual_info(&p, &identity, &w));
        }
        best = best.max(inner);
    }
    let fam = IndexedChannelFamily::new(
        ChannelSemantics::Avc,
        vec![
            CqChannel::binary_symmetric(0.05).unwrap(),
            CqChannel::binary_symmetric(0.15).unwrap(),
        ],
    )
    .unwrap();
    let ours = random_coding_capacity(&fam, 1e-6).unwrap().value;
    assert!(
        (ours - best).abs() <= 1e-4,
        "C_ran {ours} vs grid minimax {best}"
    );
}

#[test]
fn eavesdropper_mu_matches_pairwise_oracle() {
    // Three-message desk code through a depolarizing-style Eve: mu equals
    // the hand-computed maximum of the pairwise trace distances.
    let mut rng = sampling::rng_from_seed(25);
    let eve_channel = CqChannel::classical(&[
        vec![0.7, 0.2, 0.1],
        vec![0.2, 0.6, 0.2],
        vec![0.15, 0.25, 0.6],
    ])
    .unwrap();
    let eve = IndexedChannelFamily::singleton(ChannelSemantics::Compound, eve_channel.clone());
    let encodings: Vec<SparseInputDistribution> = (0..3)
        .map(|_| {
            let p = sampling::random_distribution(3, &mut rng);
            SparseInputDistribution::new(
                1,
                3,
                p.weights()
                    .iter()
                    .enumerate()
                    .map(|(x, &w)| (vec![x], w))
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    let report = cqid_core::secrecy::eavesdropper_distinguishability(
        &encodings,
        &eve,
        cqid_core::id::EvaluationMode::Compound,
        &Guards::default(),
        0,
        0,
    )
    .unwrap();
    // Oracle: states by direct mixture, distances by eigenvalue sums.
    let mut oracle = 0.0_f64;
    let states: Vec<DensityOperator> = encodings
        .iter()
        .map(|q| {
            let weights: Vec<f64> = (0..3).map(|x| q.support()[x].1).collect();
            // support is ordered (0, 1, 2) by construction above
            let dist = ProbabilityDistribution::new(weights).unwrap();
            eve_channel.output_mixture(&dist).unwrap()
        })
        .collect();
    for i in 0..3 {
        for j in (i + 1)..3 {
            oracle = oracle.max(trace_distance(&states[i], &states[j]).unwrap());
        }
    }
    assert!((report.mu - oracle).abs() <= 1e-12);
    assert!((report.helstrom_error - 0.5 * (1.0 - oracle)).abs() <= 1e-12);
}

#[test]
fn coloring_collisions_equal_second_kind_error_on_noiseless_components() {
    // For noiseless components, Tr W(Q_i) D_j is exactly the fraction of
    // outer slots where the two colorings agree.
    let wp = WiretapPair::point(
        CqChannel::noiseless_classical(2),
        CqChannel::constant(DensityOperator::maximally_mixed(2), 2),
    )
    .unwrap();
    let opts = WiretapIdOptions::new(4, 8, 2, 4, 27);
    let code = build_wiretap_id_code(&wp, &opts, &Guards::default()).unwrap();
    let guards = Guards::default();
    for i in 0..code.code().len() {
        for j in 0..code.code().len() {
            if i == j {
                continue;
            }
            let out = wp
                .legal_point()
                .output_under_distribution(code.code().encoding(i), &guards)
                .unwrap();
            let overlap = code.code().verifier(j).probability(&out).unwrap();
            let collisions = cqid_core::secrecy::collision_statistics(&code, i, j, 0.5)
                .unwrap()
                .collisions;
            let expected = collisions as f64 / code.outer().size() as f64;
            assert!(
                (overlap - expected).abs() <= 1e-12,
                "pair ({i},{j}): {overlap} vs {expected}"
            );
        }
    }

    // Implied-rate arithmetic: log2 log2 N = log2 M' + log2(factor) when
    // M' = 2^{n (C - eps)} exactly.
    let implied = code.implied();
    let n = 4.0_f64;
    let m_prime = 8.0_f64;
    assert!((implied.epsilon - (implied.capacity - m_prime.log2() / n)).abs() <= 1e-12);
    if let Some(rate) = implied.loglog_bound {
        let lambda = code.lambda1().max(code.lambda2());
        let factor = lambda * n.sqrt() * implied.epsilon - 1.0;
        assert!((rate - (m_prime.log2() + factor.log2()) / n).abs() <= 1e-12);
    }
}
