//! Single-receiver solver: optimal IC menus of direct, persuasive signaling
//! schemes, menu evaluation under strategic type reports, and the no-menu
//! baseline over recommendation tuples.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instances::{SingleReceiverInstance, StatePrior};
use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus, Relation};
use crate::scalar::Scalar;

/// Tie tolerance when forming best-response sets, so float jitter cannot
/// flip which action the receiver plays.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SingleError {
    #[error("signal {signal} is never sent (zero probability)")]
    ZeroProbabilitySignal { signal: usize },
    #[error("lp solver failure: {0}")]
    Lp(#[from] LpError),
    #[error("menu LP unexpectedly {0:?} (valid instances always admit a constant menu)")]
    BadStatus(LpStatus),
    #[error("{what} too large: limit {limit}")]
    TooLarge { what: &'static str, limit: usize },
}

/// A menu of direct signaling schemes: `phi[k][theta][a]` is the probability
/// of recommending action `a` in state `theta` to a receiver who reported
/// type `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalingMenu<S> {
    pub phi: Vec<Vec<Vec<S>>>,
}

impl<S: Scalar> SignalingMenu<S> {
    pub fn types(&self) -> usize {
        self.phi.len()
    }
}

/// A belief over states of nature.
#[derive(Clone, Debug, PartialEq)]
pub struct Posterior<S> {
    pub xi: Vec<S>,
}

/// Bayes update after observing `signal` under the scheme `phi[theta][s]`.
pub fn posterior_of_signal<S: Scalar>(
    prior: &StatePrior<S>,
    phi: &[Vec<S>],
    signal: usize,
) -> Result<Posterior<S>, SingleError> {
    let total = prior
        .mu
        .iter()
        .zip(phi)
        .fold(S::zero(), |acc, (&mu, row)| acc + mu * row[signal]);
    if total <= S::c(1e-12) {
        return Err(SingleError::ZeroProbabilitySignal { signal });
    }
    let xi = prior
        .mu
        .iter()
        .zip(phi)
        .map(|(&mu, row)| mu * row[signal] / total)
        .collect();
    Ok(Posterior { xi })
}

/// The action a receiver of type `k` plays in posterior `xi`: maximizes the
/// receiver's expected utility, breaking ties in favor of the sender and then
/// by lowest action index.
pub fn best_response<S: Scalar>(
    instance: &SingleReceiverInstance<S>,
    k: usize,
    xi: &Posterior<S>,
) -> usize {
    let tie = S::c(TIE_TOL);
    let expect = |table: &[Vec<S>], a: usize| {
        xi.xi
            .iter()
            .enumerate()
            .fold(S::zero(), |acc, (theta, &p)| acc + p * table[theta][a])
    };
    let recv_values: Vec<S> = (0..instance.actions).map(|a| expect(&instance.u_recv[k], a)).collect();
    let best_recv = recv_values.iter().cloned().fold(-S::infinity(), S::max);
    let mut best_send = -S::infinity();
    for (a, &v) in recv_values.iter().enumerate() {
        if v >= best_recv - tie {
            best_send = best_send.max(expect(&instance.u_send, a));
        }
    }
    (0..instance.actions)
        .find(|&a| {
            recv_values[a] >= best_recv - tie && expect(&instance.u_send, a) >= best_send - tie
        })
        .expect("non-empty action set")
}

/// Variable layout of the direct-menu LP: recommendation probabilities
/// `phi[k][theta][a]` first, then the per-pair best-response bounds
/// `l[k][k'][a]` for every ordered pair of distinct types.
struct MenuLayout {
    d: usize,
    l: usize,
    m: usize,
}

impl MenuLayout {
    fn phi(&self, k: usize, theta: usize, a: usize) -> usize {
        (k * self.d + theta) * self.l + a
    }

    fn pair_index(&self, k: usize, k_other: usize) -> usize {
        debug_assert!(k != k_other);
        let shifted = if k_other > k { k_other - 1 } else { k_other };
        k * (self.m - 1) + shifted
    }

    fn l_var(&self, k: usize, k_other: usize, a: usize) -> usize {
        self.m * self.d * self.l + self.pair_index(k, k_other) * self.l + a
    }

    fn num_vars(&self) -> usize {
        self.m * self.d * self.l + self.m * (self.m - 1) * self.l
    }
}

/// Builds the LP over direct, persuasive menus: the objective is the
/// sender's expectation under truthful reports, the IC rows aggregate the
/// `l` upper bounds on deviation payoffs, and the persuasiveness rows force
/// every recommendation to be a best response for the truthful type.
pub fn build_direct_menu_lp<S: Scalar>(instance: &SingleReceiverInstance<S>) -> LinearProgram<S> {
    let layout = MenuLayout { d: instance.states(), l: instance.actions, m: instance.types };
    let (d, l, m) = (layout.d, layout.l, layout.m);
    let mu = &instance.prior.mu;
    let mut lp = LinearProgram::new(layout.num_vars());
    for k in 0..m {
        for theta in 0..d {
            for a in 0..l {
                lp.set_objective(
                    layout.phi(k, theta, a),
                    instance.lambda[k] * mu[theta] * instance.u_send[theta][a],
                );
            }
        }
    }
    // IC aggregation: truthful payoff of type k at least the summed
    // best-response bounds against reporting k'.
    for k in 0..m {
        for k_other in 0..m {
            if k_other == k {
                continue;
            }
            let mut coeffs = Vec::with_capacity(d * l + l);
            for theta in 0..d {
                for a in 0..l {
                    coeffs.push((layout.phi(k, theta, a), mu[theta] * instance.u_recv[k][theta][a]));
                }
            }
            for a in 0..l {
                coeffs.push((layout.l_var(k, k_other, a), -S::one()));
            }
            lp.add_constraint(coeffs, Relation::Ge, S::zero());
        }
    }
    // l lower bounds: l[k][k'][a] >= payoff of type k playing a' on seeing
    // recommendation a from the scheme of type k'.
    for k in 0..m {
        for k_other in 0..m {
            if k_other == k {
                continue;
            }
            for a in 0..l {
                for a_dev in 0..l {
                    let mut coeffs = vec![(layout.l_var(k, k_other, a), S::one())];
                    for theta in 0..d {
                        coeffs.push((
                            layout.phi(k_other, theta, a),
                            -mu[theta] * instance.u_recv[k][theta][a_dev],
                        ));
                    }
                    lp.add_constraint(coeffs, Relation::Ge, S::zero());
                }
            }
        }
    }
    // Persuasiveness: following recommendation a beats any deviation a'.
    for k in 0..m {
        for a in 0..l {
            for a_dev in 0..l {
                let coeffs = (0..d)
                    .map(|theta| {
                        (
                            layout.phi(k, theta, a),
                            mu[theta] * (instance.u_recv[k][theta][a] - instance.u_recv[k][theta][a_dev]),
                        )
                    })
                    .collect();
                lp.add_constraint(coeffs, Relation::Ge, S::zero());
            }
        }
    }
    // Row sums: each phi[k][theta] is a distribution.
    for k in 0..m {
        for theta in 0..d {
            let coeffs = (0..l).map(|a| (layout.phi(k, theta, a), S::one())).collect();
            lp.add_constraint(coeffs, Relation::Eq, S::one());
        }
    }
    lp
}

/// Solves for an optimal IC menu of direct, persuasive signaling schemes.
pub fn solve_optimal_menu<S: Scalar>(
    instance: &SingleReceiverInstance<S>,
) -> Result<(SignalingMenu<S>, S), SingleError> {
    let lp = build_direct_menu_lp(instance);
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(SingleError::BadStatus(sol.status));
    }
    let layout = MenuLayout { d: instance.states(), l: instance.actions, m: instance.types };
    let phi = (0..layout.m)
        .map(|k| {
            (0..layout.d)
                .map(|theta| {
                    (0..layout.l)
                        .map(|a| sol.primal[layout.phi(k, theta, a)].max(S::zero()))
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok((SignalingMenu { phi }, sol.objective))
}

/// How a menu performs against a strategic receiver: the report each true
/// type makes (truth-first, then sender-favoring, then lowest index among
/// ties) and the sender's resulting expected utility.
pub fn evaluate_menu<S: Scalar>(
    instance: &SingleReceiverInstance<S>,
    menu: &SignalingMenu<S>,
) -> (S, Vec<usize>) {
    let m = instance.types;
    let tie = S::c(TIE_TOL);
    // recv[k][k_rep], send[k][k_rep]
    let mut recv = vec![vec![S::zero(); m]; m];
    let mut send = vec![vec![S::zero(); m]; m];
    for k_rep in 0..m {
        let scheme = &menu.phi[k_rep];
        for a in 0..instance.actions {
            let pr = instance
                .prior
                .mu
                .iter()
                .enumerate()
                .fold(S::zero(), |acc, (theta, &mu)| acc + mu * scheme[theta][a]);
            if pr <= S::c(1e-12) {
                continue;
            }
            let xi = posterior_of_signal(&instance.prior, scheme, a).expect("positive signal");
            for k in 0..m {
                let br = best_response(instance, k, &xi);
                for (theta, &mu) in instance.prior.mu.iter().enumerate() {
                    let w = mu * scheme[theta][a];
                    recv[k][k_rep] = recv[k][k_rep] + w * instance.u_recv[k][theta][br];
                    send[k][k_rep] = send[k][k_rep] + w * instance.u_send[theta][br];
                }
            }
        }
    }
    let mut value = S::zero();
    let mut reported = Vec::with_capacity(m);
    for k in 0..m {
        let best = recv[k].iter().cloned().fold(-S::infinity(), S::max);
        let candidates: Vec<usize> = (0..m).filter(|&k_rep| recv[k][k_rep] >= best - tie).collect();
        let choice = if candidates.contains(&k) {
            k
        } else {
            let best_send = candidates
                .iter()
                .map(|&k_rep| send[k][k_rep])
                .fold(-S::infinity(), S::max);
            *candidates
                .iter()
                .find(|&&k_rep| send[k][k_rep] >= best_send - tie)
                .expect("non-empty candidate set")
        };
        value = value + instance.lambda[k] * send[k][choice];
        reported.push(choice);
    }
    (value, reported)
}

/// Exact constraint residuals of a menu: IC (with the inner best response
/// made explicit), persuasiveness, and per-row normalization error.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MenuResiduals<S> {
    pub ic: S,
    pub persuasiveness: S,
    pub row_sum: S,
}

impl<S: Scalar> MenuResiduals<S> {
    pub fn max(&self) -> S {
        self.ic.max(self.persuasiveness).max(self.row_sum)
    }

    pub fn within(&self, tol: S) -> bool {
        self.max() <= tol
    }
}

pub fn check_menu<S: Scalar>(
    instance: &SingleReceiverInstance<S>,
    menu: &SignalingMenu<S>,
) -> MenuResiduals<S> {
    let (d, l, m) = (instance.states(), instance.actions, instance.types);
    let mu = &instance.prior.mu;
    let weighted = |k_scheme: usize, a: usize, k_util: usize, a_util: usize| {
        (0..d).fold(S::zero(), |acc, theta| {
            acc + mu[theta] * menu.phi[k_scheme][theta][a] * instance.u_recv[k_util][theta][a_util]
        })
    };
    let mut ic = S::zero();
    for k in 0..m {
        let truthful = (0..l).fold(S::zero(), |acc, a| acc + weighted(k, a, k, a));
        for k_other in 0..m {
            if k_other == k {
                continue;
            }
            let deviation = (0..l).fold(S::zero(), |acc, a| {
                let best = (0..l)
                    .map(|a_dev| weighted(k_other, a, k, a_dev))
                    .fold(-S::infinity(), S::max);
                acc + best
            });
            ic = ic.max(deviation - truthful);
        }
    }
    let mut persuasiveness = S::zero();
    for k in 0..m {
        for a in 0..l {
            for a_dev in 0..l {
                persuasiveness = persuasiveness.max(weighted(k, a, k, a_dev) - weighted(k, a, k, a));
            }
        }
    }
    let mut row_sum = S::zero();
    for k in 0..m {
        for theta in 0..d {
            let sum = menu.phi[k][theta].iter().fold(S::zero(), |a, &p| a + p);
            row_sum = row_sum.max((sum - S::one()).abs());
            for &p in &menu.phi[k][theta] {
                row_sum = row_sum.max(-p);
            }
        }
    }
    MenuResiduals { ic: ic.max(S::zero()), persuasiveness: persuasiveness.max(S::zero()), row_sum }
}

/// Optimal single direct persuasive scheme without type reporting: one
/// signal per recommendation tuple (an action for each possible type),
/// persuasive for every type simultaneously. This is the value a sender can
/// guarantee with no reporting step; it never exceeds the optimal menu.
pub fn solve_no_menu_baseline<S: Scalar>(instance: &SingleReceiverInstance<S>) -> Result<S, SingleError> {
    let (d, l, m) = (instance.states(), instance.actions, instance.types);
    let tuples = l.checked_pow(m as u32).filter(|&t| t <= 4096).ok_or(SingleError::TooLarge {
        what: "recommendation tuple space",
        limit: 4096,
    })?;
    let mu = &instance.prior.mu;
    // Variables phi[theta][t], t encoding one action per type (little-endian
    // base-l digits).
    let var = |theta: usize, t: usize| theta * tuples + t;
    let component = |t: usize, k: usize| t / l.pow(k as u32) % l;
    let mut lp = LinearProgram::new(d * tuples);
    for theta in 0..d {
        for t in 0..tuples {
            let mean_send = (0..m).fold(S::zero(), |acc, k| {
                acc + instance.lambda[k] * instance.u_send[theta][component(t, k)]
            });
            lp.set_objective(var(theta, t), mu[theta] * mean_send);
        }
    }
    // Obedience: a type-k receiver seeing tuple t follows their component.
    for k in 0..m {
        for t in 0..tuples {
            let rec = component(t, k);
            for a_dev in 0..l {
                let coeffs = (0..d)
                    .map(|theta| {
                        (
                            var(theta, t),
                            mu[theta]
                                * (instance.u_recv[k][theta][rec] - instance.u_recv[k][theta][a_dev]),
                        )
                    })
                    .collect();
                lp.add_constraint(coeffs, Relation::Ge, S::zero());
            }
        }
    }
    for theta in 0..d {
        let coeffs = (0..tuples).map(|t| (var(theta, t), S::one())).collect();
        lp.add_constraint(coeffs, Relation::Eq, S::one());
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(SingleError::BadStatus(sol.status));
    }
    Ok(sol.objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::generate_single;

    fn prosecutor() -> SingleReceiverInstance<f64> {
        SingleReceiverInstance::prosecutor()
    }

    #[test]
    fn posterior_matches_bayes_rule() {
        let prior = StatePrior::new(vec![0.5f64, 0.5]);
        // phi[theta][s]; signal 0 sent with prob 0.8 / 0.4
        let phi = vec![vec![0.8, 0.2], vec![0.4, 0.6]];
        let post = posterior_of_signal(&prior, &phi, 0).unwrap();
        assert!((post.xi[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((post.xi[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn full_revelation_gives_point_mass() {
        let prior = StatePrior::new(vec![0.3, 0.7]);
        let phi = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let post = posterior_of_signal(&prior, &phi, 1).unwrap();
        assert_eq!(post.xi, vec![0.0, 1.0]);
    }

    #[test]
    fn never_sent_signal_errors() {
        let prior = StatePrior::new(vec![0.5, 0.5]);
        let phi = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        assert!(matches!(
            posterior_of_signal(&prior, &phi, 1),
            Err(SingleError::ZeroProbabilitySignal { signal: 1 })
        ));
    }

    #[test]
    fn bayes_plausibility_over_random_schemes() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let d = rng.random_range(1..4usize);
            let s_count = rng.random_range(1..4usize);
            let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>().max(0.05)).collect();
            let total: f64 = raw.iter().sum();
            let prior = StatePrior::new(raw.into_iter().map(|p| p / total).collect());
            let phi: Vec<Vec<f64>> = (0..d)
                .map(|_| {
                    let row: Vec<f64> = (0..s_count).map(|_| rng.random::<f64>() + 1e-3).collect();
                    let sum: f64 = row.iter().sum();
                    row.into_iter().map(|p| p / sum).collect()
                })
                .collect();
            let mut mixed = vec![0.0; d];
            for s in 0..s_count {
                let pr: f64 = (0..d).map(|t| prior.mu[t] * phi[t][s]).sum();
                let post = posterior_of_signal(&prior, &phi, s).unwrap();
                let sum: f64 = post.xi.iter().sum();
                assert!((sum - 1.0).abs() < 1e-9);
                for t in 0..d {
                    mixed[t] += pr * post.xi[t];
                }
            }
            for t in 0..d {
                assert!((mixed[t] - prior.mu[t]).abs() < 1e-9, "posteriors must average to the prior");
            }
        }
    }

    #[test]
    fn best_response_prefers_utility_then_sender_then_index() {
        // d=1: posterior is trivial.
        let mut inst = generate_single::<f64>(0, 1, 2, 1);
        let xi = Posterior { xi: vec![1.0] };
        inst.u_recv[0][0] = vec![0.2, 0.9];
        assert_eq!(best_response(&inst, 0, &xi), 1);
        inst.u_recv[0][0] = vec![0.5, 0.5];
        inst.u_send[0] = vec![0.0, 1.0];
        assert_eq!(best_response(&inst, 0, &xi), 1);
        inst.u_send[0] = vec![0.7, 0.7];
        assert_eq!(best_response(&inst, 0, &xi), 0);
    }

    #[test]
    fn best_response_invariant_under_constant_shift() {
        // Shifting all of one type's payoffs by a constant cannot change the
        // argmax. Payoffs live in [0,1], so shift within headroom.
        let mut inst = generate_single::<f64>(3, 3, 4, 2);
        let xi = Posterior { xi: vec![0.2, 0.5, 0.3] };
        let before = best_response(&inst, 1, &xi);
        for theta in 0..3 {
            for a in 0..4 {
                inst.u_recv[1][theta][a] = inst.u_recv[1][theta][a] * 0.5 + 0.25;
            }
        }
        assert_eq!(best_response(&inst, 1, &xi), before);
    }

    #[test]
    fn lp_shape_for_one_type() {
        let inst = prosecutor();
        let lp = build_direct_menu_lp(&inst);
        // m=1: no IC rows, no l rows; l*l persuasiveness rows; d row sums.
        assert_eq!(lp.num_vars(), 1 * 2 * 2);
        assert_eq!(lp.num_constraints(), 2 * 2 + 2);
    }

    #[test]
    fn lp_shape_and_objective_for_two_types() {
        let inst = generate_single::<f64>(1, 2, 2, 2);
        let lp = build_direct_menu_lp(&inst);
        assert_eq!(lp.num_vars(), 2 * 2 * 2 + 2 * 1 * 2);
        let layout = MenuLayout { d: 2, l: 2, m: 2 };
        for k in 0..2 {
            for theta in 0..2 {
                for a in 0..2 {
                    let expected = inst.lambda[k] * inst.prior.mu[theta] * inst.u_send[theta][a];
                    assert_eq!(lp.objective_coeff(layout.phi(k, theta, a)), expected);
                }
            }
        }
    }

    #[test]
    fn prosecutor_value_is_three_fifths() {
        // Concavification of the two-state problem: the judge convicts at
        // posterior >= 1/2 on guilty (ties favor the sender), so the optimal
        // scheme pools guilty with just enough innocent mass:
        // 0.3 + 0.3 = 0.6.
        let inst = prosecutor();
        let (menu, value) = solve_optimal_menu(&inst).unwrap();
        assert!((value - 0.6).abs() < 1e-8, "menu value {value}");
        assert!(check_menu(&inst, &menu).within(1e-6));
        let baseline = solve_no_menu_baseline(&inst).unwrap();
        assert!((baseline - 0.6).abs() < 1e-8, "baseline {baseline}");
    }

    #[test]
    fn single_state_menu_is_best_responses_to_point_mass() {
        let inst = generate_single::<f64>(17, 1, 3, 3);
        let (_, value) = solve_optimal_menu(&inst).unwrap();
        let xi = Posterior { xi: vec![1.0] };
        let expected: f64 = (0..inst.types)
            .map(|k| inst.lambda[k] * inst.u_send[0][best_response(&inst, k, &xi)])
            .sum();
        assert!((value - expected).abs() < 1e-8);
    }

    #[test]
    fn optimal_menu_induces_truthful_reports_at_lp_value() {
        for seed in 0..10 {
            let inst = generate_single::<f64>(seed, 3, 3, 3);
            let (menu, value) = solve_optimal_menu(&inst).unwrap();
            let (eval_value, reported) = evaluate_menu(&inst, &menu);
            for (k, &rep) in reported.iter().enumerate() {
                assert_eq!(rep, k, "seed {seed}: type {k} misreported");
            }
            assert!((eval_value - value).abs() < 1e-6, "seed {seed}");
        }
    }

    #[test]
    fn constant_menu_reports_truthfully() {
        let inst = generate_single::<f64>(4, 2, 2, 3);
        let scheme = vec![vec![0.6, 0.4], vec![0.3, 0.7]];
        let menu = SignalingMenu { phi: vec![scheme.clone(); 3] };
        let (_, reported) = evaluate_menu(&inst, &menu);
        assert_eq!(reported, vec![0, 1, 2]);
    }

    #[test]
    fn dominant_scheme_attracts_misreports() {
        // Type 0 wants to match the state; its own scheme reveals nothing
        // while type 1's scheme reveals everything, so type 0 reports 1.
        let mut inst = generate_single::<f64>(8, 2, 2, 2);
        inst.prior = StatePrior::new(vec![0.5, 0.5]);
        inst.u_recv[0] = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let menu = SignalingMenu {
            phi: vec![
                vec![vec![1.0, 0.0], vec![1.0, 0.0]],
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            ],
        };
        let (_, reported) = evaluate_menu(&inst, &menu);
        assert_eq!(reported[0], 1);
    }

    #[test]
    fn one_type_menu_has_vacuous_ic() {
        let inst = prosecutor();
        let (menu, _) = solve_optimal_menu(&inst).unwrap();
        let res = check_menu(&inst, &menu);
        assert_eq!(res.ic, 0.0);
    }

    #[test]
    fn non_persuasive_scheme_reports_the_utility_gap() {
        // d=1 point mass; recommending the worse action (gap 0.7) always.
        let mut inst = generate_single::<f64>(2, 1, 2, 1);
        inst.u_recv[0][0] = vec![0.9, 0.2];
        let menu = SignalingMenu { phi: vec![vec![vec![0.0, 1.0]]] };
        let res = check_menu(&inst, &menu);
        assert!((res.persuasiveness - 0.7).abs() < 1e-12);
    }

    #[test]
    fn baseline_tuple_count_and_dominance() {
        let inst = generate_single::<f64>(6, 2, 3, 2);
        // l=3, m=2: 9 recommendation tuples per state.
        let (d, l, m) = (2usize, 3usize, 2usize);
        assert_eq!(l.pow(m as u32), 9);
        let baseline = solve_no_menu_baseline(&inst).unwrap();
        let (_, menu_value) = solve_optimal_menu(&inst).unwrap();
        assert!(menu_value >= baseline - 1e-6);
        let _ = d;
    }

    #[test]
    fn baseline_cap_enforced() {
        let inst = generate_single::<f64>(0, 1, 9, 5);
        assert!(matches!(
            solve_no_menu_baseline(&inst),
            Err(SingleError::TooLarge { .. })
        ));
    }
}
