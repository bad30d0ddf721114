//! Seeded random instance generators for tests and benchmarks.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::set_function::{DeclaredClass, SenderSetFunction, SetFunctionData};
use super::{
    expand_product, InstanceError, MultiReceiverInstance, SingleReceiverInstance, StatePrior,
    TypeProfile,
};
use crate::scalar::{derive_seed, Scalar};

/// Set-function family produced by [`generate_multi`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetFunctionFamily {
    Additive,
    Coverage,
    AnonymousConcave,
    AnonymousConvex,
    Table,
}

impl std::str::FromStr for SetFunctionFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "additive" => Ok(SetFunctionFamily::Additive),
            "coverage" => Ok(SetFunctionFamily::Coverage),
            "anonymous-concave" => Ok(SetFunctionFamily::AnonymousConcave),
            "anonymous-convex" => Ok(SetFunctionFamily::AnonymousConvex),
            "table" => Ok(SetFunctionFamily::Table),
            other => Err(format!(
                "unknown set-function family `{other}` (expected additive, coverage, \
                 anonymous-concave, anonymous-convex, or table)"
            )),
        }
    }
}

/// Prior entries floored at 0.05 before normalizing, which keeps generated
/// posteriors away from the simplex boundary.
fn random_prior<S: Scalar>(rng: &mut ChaCha8Rng, d: usize) -> StatePrior<S> {
    let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>().max(0.05)).collect();
    let sum: f64 = raw.iter().sum();
    StatePrior::new(raw.into_iter().map(|p| S::c(p / sum)).collect())
}

fn random_distribution<S: Scalar>(rng: &mut ChaCha8Rng, len: usize, floor: f64) -> Vec<S> {
    let raw: Vec<f64> = (0..len).map(|_| floor + rng.random::<f64>() * (1.0 - floor)).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|p| S::c(p / sum)).collect()
}

/// Generates a random single-receiver instance, deterministic in the seed.
pub fn generate_single<S: Scalar>(seed: u64, d: usize, actions: usize, types: usize) -> SingleReceiverInstance<S> {
    assert!(d >= 1 && actions >= 1 && types >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "gen-single"));
    let prior = random_prior(&mut rng, d);
    let lambda = random_distribution(&mut rng, types, 0.0);
    let u_recv = (0..types)
        .map(|_| (0..d).map(|_| (0..actions).map(|_| S::c(rng.random::<f64>())).collect()).collect())
        .collect();
    let u_send = (0..d).map(|_| (0..actions).map(|_| S::c(rng.random::<f64>())).collect()).collect();
    let inst = SingleReceiverInstance { prior, actions, types, lambda, u_recv, u_send };
    debug_assert!(inst.validate().is_ok());
    inst
}

/// Generates a random multi-receiver instance with `m_r` types for every
/// receiver and a set function from the requested family, normalized so its
/// maximum value is 1. Deterministic in the seed.
pub fn generate_multi<S: Scalar>(
    seed: u64,
    n: usize,
    m_r: usize,
    d: usize,
    family: SetFunctionFamily,
) -> Result<MultiReceiverInstance<S>, InstanceError> {
    assert!(n >= 1 && m_r >= 1 && d >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "gen-multi"));
    let prior = random_prior(&mut rng, d);
    let u_recv = random_utilities(&mut rng, n, m_r, d);
    let set_function = random_set_function(&mut rng, n, d, family)?;
    let type_dist = random_type_dist(&mut rng, n, m_r);
    let inst = MultiReceiverInstance {
        prior,
        receivers: n,
        m_r: vec![m_r; n],
        u_recv,
        set_function,
        type_dist,
        lambda_r: None,
    };
    inst.validate()?;
    Ok(inst)
}

/// Product-form variant: each receiver draws a type independently, so the
/// instance carries per-receiver distributions and its full expansion as the
/// explicit support.
pub fn generate_multi_product<S: Scalar>(
    seed: u64,
    n: usize,
    m_r: usize,
    d: usize,
    family: SetFunctionFamily,
) -> Result<MultiReceiverInstance<S>, InstanceError> {
    assert!(n >= 1 && m_r >= 1 && d >= 1);
    if m_r.pow(n as u32) > 4096 {
        return Err(InstanceError::TooLarge { what: "product type space", limit: 4096 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "gen-multi-product"));
    let prior = random_prior(&mut rng, d);
    let u_recv = random_utilities(&mut rng, n, m_r, d);
    let set_function = random_set_function(&mut rng, n, d, family)?;
    let lambda_r: Vec<Vec<S>> = (0..n).map(|_| random_distribution(&mut rng, m_r, 0.05)).collect();
    let sizes = vec![m_r; n];
    let type_dist = expand_product(&sizes, &lambda_r)
        .into_iter()
        .map(|(profile, prob)| TypeProfile { profile, prob })
        .collect();
    let inst = MultiReceiverInstance {
        prior,
        receivers: n,
        m_r: sizes,
        u_recv,
        set_function,
        type_dist,
        lambda_r: Some(lambda_r),
    };
    inst.validate()?;
    Ok(inst)
}

fn random_utilities<S: Scalar>(
    rng: &mut ChaCha8Rng,
    n: usize,
    m_r: usize,
    d: usize,
) -> Vec<Vec<Vec<[S; 2]>>> {
    (0..n)
        .map(|_| {
            (0..m_r)
                .map(|_| {
                    (0..d)
                        .map(|_| [S::c(rng.random::<f64>()), S::c(rng.random::<f64>())])
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn random_type_dist<S: Scalar>(rng: &mut ChaCha8Rng, n: usize, m_r: usize) -> Vec<TypeProfile<S>> {
    let profile_space = (m_r as f64).powi(n as i32);
    let cap = (1usize << n.min(4)).min(16).min(profile_space.min(16.0) as usize).max(1);
    let support = rng.random_range(1..=cap);
    let mut profiles: Vec<Vec<usize>> = Vec::new();
    while profiles.len() < support {
        let p: Vec<usize> = (0..n).map(|_| rng.random_range(0..m_r)).collect();
        if !profiles.contains(&p) {
            profiles.push(p);
        }
    }
    profiles.sort();
    let probs = random_distribution::<S>(rng, profiles.len(), 0.1);
    profiles
        .into_iter()
        .zip(probs)
        .map(|(profile, prob)| TypeProfile { profile, prob })
        .collect()
}

fn random_set_function<S: Scalar>(
    rng: &mut ChaCha8Rng,
    n: usize,
    d: usize,
    family: SetFunctionFamily,
) -> Result<SenderSetFunction<S>, InstanceError> {
    let f = match family {
        SetFunctionFamily::Additive => {
            let mut values: Vec<Vec<f64>> = (0..d)
                .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
                .collect();
            let max = values.iter().map(|row| row.iter().sum::<f64>()).fold(0.0, f64::max);
            scale(&mut values, max);
            SenderSetFunction {
                declared_class: DeclaredClass::Submodular,
                data: SetFunctionData::Additive { values: convert(values) },
            }
        }
        SetFunctionFamily::Coverage => {
            let items = 2 * n;
            let mut item_weights: Vec<Vec<f64>> =
                (0..d).map(|_| (0..items).map(|_| rng.random::<f64>()).collect()).collect();
            let mut covers: Vec<Vec<usize>> = (0..n)
                .map(|r| {
                    let mut set: Vec<usize> =
                        (0..items).filter(|_| rng.random_bool(0.5)).collect();
                    if set.is_empty() {
                        set.push(r % items);
                    }
                    set
                })
                .collect();
            covers.iter_mut().for_each(|s| s.sort_unstable());
            let full: u64 = covers.iter().flatten().fold(0u64, |m, &i| m | 1 << i);
            let max = item_weights
                .iter()
                .map(|w| {
                    (0..items)
                        .filter(|&i| full >> i & 1 == 1)
                        .map(|i| w[i])
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
            scale(&mut item_weights, max);
            SenderSetFunction {
                declared_class: DeclaredClass::Submodular,
                data: SetFunctionData::WeightedCoverage { item_weights: convert(item_weights), covers },
            }
        }
        SetFunctionFamily::AnonymousConcave | SetFunctionFamily::AnonymousConvex => {
            let concave = family == SetFunctionFamily::AnonymousConcave;
            let mut by_count: Vec<Vec<f64>> = (0..d)
                .map(|_| {
                    let mut steps: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
                    steps.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    if concave {
                        steps.reverse();
                    }
                    let mut g = vec![0.0];
                    for s in steps {
                        g.push(g.last().unwrap() + s);
                    }
                    g
                })
                .collect();
            let max = by_count.iter().map(|g| *g.last().unwrap()).fold(0.0, f64::max);
            scale(&mut by_count, max);
            SenderSetFunction {
                declared_class: if concave {
                    DeclaredClass::Submodular
                } else {
                    DeclaredClass::Supermodular
                },
                data: SetFunctionData::Anonymous { by_count: convert(by_count) },
            }
        }
        SetFunctionFamily::Table => {
            if n > 12 {
                return Err(InstanceError::TooLarge { what: "table set function receivers", limit: 12 });
            }
            let size = 1usize << n;
            let mut values: Vec<Vec<f64>> = (0..d)
                .map(|_| {
                    let mut table = vec![0.0; size];
                    for mask in 1..size {
                        // Monotone closure over a random draw: each set is at
                        // least as valuable as any of its subsets.
                        let mut v: f64 = rng.random();
                        for r in 0..n {
                            if mask >> r & 1 == 1 {
                                v = v.max(table[mask & !(1 << r)]);
                            }
                        }
                        table[mask] = v;
                    }
                    table
                })
                .collect();
            let max = values.iter().map(|t| t[size - 1]).fold(0.0, f64::max);
            scale(&mut values, max);
            SenderSetFunction {
                declared_class: DeclaredClass::General,
                data: SetFunctionData::Table { values: convert(values) },
            }
        }
    };
    Ok(f)
}

fn scale(rows: &mut [Vec<f64>], max: f64) {
    if max > 0.0 {
        for row in rows {
            for v in row {
                *v /= max;
            }
        }
    }
}

fn convert<S: Scalar>(rows: Vec<Vec<f64>>) -> Vec<Vec<S>> {
    rows.into_iter().map(|row| row.into_iter().map(S::c).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::super::classify_set_function;
    use super::*;

    #[test]
    fn single_generation_is_deterministic_and_interior() {
        let a = generate_single::<f64>(7, 2, 2, 2);
        let b = generate_single::<f64>(7, 2, 2, 2);
        assert_eq!(a, b);
        a.validate().unwrap();
        assert!(a.prior.mu.iter().all(|&p| p > 0.0));
    }

    #[test]
    fn distinct_seeds_give_distinct_instances() {
        let all: Vec<_> = (0..10).map(|s| generate_single::<f64>(s, 2, 2, 2)).collect();
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                assert_ne!(all[i], all[j], "seeds {i} and {j} collided");
            }
        }
    }

    #[test]
    fn coverage_family_classifies_submodular() {
        let inst = generate_multi::<f64>(3, 4, 2, 2, SetFunctionFamily::Coverage).unwrap();
        for theta in 0..inst.states() {
            let c = classify_set_function(&inst.set_function, theta).unwrap();
            assert!(c.submodular && c.monotone, "state {theta}");
        }
    }

    #[test]
    fn convex_anonymous_family_classifies_supermodular() {
        let inst = generate_multi::<f64>(5, 3, 2, 2, SetFunctionFamily::AnonymousConvex).unwrap();
        for theta in 0..inst.states() {
            let c = classify_set_function(&inst.set_function, theta).unwrap();
            assert!(c.supermodular && c.anonymous && c.monotone, "state {theta}");
        }
    }

    #[test]
    fn multi_generation_is_deterministic() {
        let a = generate_multi::<f64>(11, 3, 2, 2, SetFunctionFamily::Table).unwrap();
        let b = generate_multi::<f64>(11, 3, 2, 2, SetFunctionFamily::Table).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oversized_table_rejected() {
        let err = generate_multi::<f64>(0, 13, 1, 1, SetFunctionFamily::Table).unwrap_err();
        assert!(matches!(err, InstanceError::TooLarge { .. }));
    }

    #[test]
    fn product_generation_carries_expansion() {
        let inst = generate_multi_product::<f64>(2, 3, 2, 2, SetFunctionFamily::Coverage).unwrap();
        assert!(inst.lambda_r.is_some());
        assert_eq!(inst.type_dist.len(), 8);
        inst.validate().unwrap();
    }
}
