//! Property tests over randomized channels and parameters.

use fsc_bounds::channel::{make_rll_dmc, parse_channel, ChannelFile, Dmc, Fsc, RllSpec, RunLimit};
use fsc_bounds::closed_form::{bsc_bound, noiseless_capacity};
use fsc_bounds::dp::{bellman_residual, solve_average_reward, Policy, SolverOptions};
use fsc_bounds::info::{entropy, mutual_information};
use fsc_bounds::oracle::{exact_sequence_stats, random_case, simulate_policy};
use fsc_bounds::vgraph::{build_product, check_connected, classify, single_letter_bound, stationary, QDist, VGraph};
use proptest::prelude::*;

fn normalized(weights: Vec<f64>) -> Vec<f64> {
    let s: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / s).collect()
}

fn row(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(normalized)
}

/// Small channel with every state reachable from the initial state.
fn channel() -> impl Strategy<Value = Fsc> {
    (1usize..=3, 2usize..=3, 2usize..=3)
        .prop_flat_map(|(ns, nx, ny)| {
            (
                prop::collection::vec(prop::collection::vec(0..ns, nx), ns),
                prop::collection::vec(prop::collection::vec(row(ny), nx), ns),
            )
        })
        .prop_map(|(next_state, emission)| Fsc::new(next_state, emission, 0).unwrap())
        .prop_filter("all states reachable", |fsc| fsc.reachable_states().iter().all(|&r| r))
}

/// Small channel whose state graph is strongly connected.
fn connected_channel() -> impl Strategy<Value = Fsc> {
    channel().prop_filter("strongly connected", check_connected)
}

fn spec() -> impl Strategy<Value = RllSpec> {
    (0usize..=3, prop::option::of(1usize..=4)).prop_map(|(d, extra)| match extra {
        Some(e) => RllSpec::new(d, RunLimit::Finite(d + e)).unwrap(),
        None => RllSpec::d_inf(d),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mutual_information_is_bounded(input in row(3), w in prop::collection::vec(row(4), 3)) {
        let mi = mutual_information(&input, &w);
        prop_assert!(mi >= 0.0);
        prop_assert!(mi <= entropy(&input) + 1e-12);
        prop_assert!(mi <= 4f64.log2() + 1e-12);
    }

    #[test]
    fn dp_solution_is_certified(fsc in connected_channel()) {
        let opts = SolverOptions::default();
        let sol = solve_average_reward(&fsc, &opts).unwrap();
        prop_assert!(sol.converged);
        prop_assert!(sol.bellman_residual <= 1e-10, "{}", sol.bellman_residual);
        let recomputed = bellman_residual(&fsc, sol.rho, &sol.h, &opts).unwrap();
        prop_assert!(recomputed <= 1e-10);
        prop_assert!(sol.rho >= -1e-12);
        prop_assert!(sol.rho <= (fsc.num_outputs().min(fsc.num_inputs()) as f64).log2() + 1e-12);
        prop_assert_eq!(sol.h[fsc.initial_state], 0.0);
    }

    #[test]
    fn dp_dominates_the_uniform_policy(fsc in connected_channel()) {
        let sol = solve_average_reward(&fsc, &SolverOptions::default()).unwrap();
        let uniform = simulate_policy(&fsc, &Policy::uniform(&fsc), 10, 0).unwrap();
        prop_assert!(uniform.exact_average_reward <= sol.rho + 1e-9);
        let own = simulate_policy(&fsc, &sol.policy, 10, 0).unwrap();
        prop_assert!((own.exact_average_reward - sol.rho).abs() <= 1e-8);
    }

    #[test]
    fn dp_terminates_without_a_constant_gain(fsc in channel()) {
        let sol = solve_average_reward(&fsc, &SolverOptions::default()).unwrap();
        prop_assert!(sol.iterations < SolverOptions::default().max_iterations);
        prop_assert!(sol.rho >= sol.increment_bounds.0 - 1e-12 && sol.rho <= sol.increment_bounds.1 + 1e-12);
    }

    #[test]
    fn rho_is_non_increasing_in_d(p in 0.0f64..0.5, d in 0usize..3) {
        let rho = |d| {
            let fsc = make_rll_dmc(RllSpec::d_inf(d), Dmc::Bsc(p)).unwrap();
            solve_average_reward(&fsc, &SolverOptions::default()).unwrap().rho
        };
        prop_assert!(rho(d + 1) <= rho(d) + 1e-10);
    }

    #[test]
    fn closed_form_is_non_decreasing_in_k(p in 0.0f64..0.5, d in 0usize..3, k in 1usize..5) {
        let at = |k| bsc_bound(RllSpec::new(d, RunLimit::Finite(d + k)).unwrap(), p).unwrap().value;
        prop_assert!(at(k + 1) >= at(k) - 1e-10);
        prop_assert!(bsc_bound(RllSpec::d_inf(d), p).unwrap().value >= at(k) - 1e-10);
    }

    #[test]
    fn bec_bound_is_affine(spec in spec(), e1 in 0.0f64..=1.0, e2 in 0.0f64..=1.0) {
        let rho = |e| {
            let fsc = make_rll_dmc(spec, Dmc::Bec(e)).unwrap();
            solve_average_reward(&fsc, &SolverOptions::default()).unwrap().rho
        };
        let mid = 0.5 * (e1 + e2);
        prop_assert!((rho(mid) - 0.5 * (rho(e1) + rho(e2))).abs() <= 1e-8);
        prop_assert!((rho(e1) - noiseless_capacity(spec).value * (1.0 - e1)).abs() <= 1e-6);
    }

    #[test]
    fn zero_noise_is_noiseless_capacity(spec in spec()) {
        let fsc = make_rll_dmc(spec, Dmc::Bsc(0.0)).unwrap();
        let rho = solve_average_reward(&fsc, &SolverOptions::default()).unwrap().rho;
        prop_assert!((rho - noiseless_capacity(spec).value).abs() <= 1e-6);
    }

    #[test]
    fn dp_matches_closed_form(spec in spec(), p in 0.0f64..=0.5) {
        let fsc = make_rll_dmc(spec, Dmc::Bsc(p)).unwrap();
        let rho = solve_average_reward(&fsc, &SolverOptions::default()).unwrap().rho;
        prop_assert!((rho - bsc_bound(spec, p).unwrap().value).abs() <= 1e-6);
    }

    #[test]
    fn vgraph_bound_never_exceeds_dp(spec in spec(), p in 0.0f64..0.5, memory in 0usize..=2, seed in any::<u64>()) {
        let fsc = make_rll_dmc(spec, Dmc::Bsc(p)).unwrap();
        let rho = solve_average_reward(&fsc, &SolverOptions::default()).unwrap().rho;
        let vg = VGraph::input_memory(2, memory);
        let pg = build_product(&fsc, &vg);
        // Random strictly positive Q on feasible inputs.
        let mut state = seed | 1;
        let rows = pg.feasible.iter().map(|f| {
            let mut r = vec![0.0; 2];
            let w: Vec<f64> = f.iter().map(|_| {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                0.05 + (state % 1000) as f64 / 1000.0
            }).collect();
            let s: f64 = w.iter().sum();
            f.iter().zip(w).for_each(|(&x, wx)| r[x] = wx / s);
            r
        }).collect();
        let q = QDist::new(&pg, rows).unwrap();
        let c = classify(&pg, &q);
        prop_assume!(c.single_class && c.aperiodic);
        let st = stationary(&pg, &q, &fsc).unwrap();
        prop_assert!(st.residual <= 1e-12);
        prop_assert!((st.joint_mass() - 1.0).abs() <= 1e-12);
        if let Ok(v) = single_letter_bound(&fsc, &vg, &q) {
            prop_assert!(v <= rho + 1e-8, "vgraph {v} > dp {rho}");
        }
    }

    #[test]
    fn conservation_holds_beyond_the_corpus(seed in any::<u64>()) {
        let case = random_case(seed);
        let st = exact_sequence_stats(&case.fsc, &case.law, case.n).unwrap();
        prop_assert!(st.conservation_error() <= 1e-10);
        prop_assert!(st.mutual_info >= st.reverse_di - 1e-10);
        prop_assert!(st.reverse_di >= st.reward_sum - 1e-10);
        prop_assert!(st.forward_lagged_di >= -1e-10);
    }

    #[test]
    fn channel_file_round_trips(fsc in channel()) {
        let text = ChannelFile::from_fsc(&fsc).to_json();
        let back = parse_channel(&text).unwrap();
        prop_assert_eq!(&back.next_state, &fsc.next_state);
        prop_assert_eq!(&back.allowed, &fsc.allowed);
        for (a, b) in back.emission.iter().flatten().flatten().zip(fsc.emission.iter().flatten().flatten()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }
}
