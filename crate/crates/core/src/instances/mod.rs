//! Problem instances: priors, receiver utilities, type distributions, and
//! sender set-functions, with file I/O and seeded generators.

mod generate;
mod io;
mod set_function;

pub use generate::{generate_multi, generate_single, SetFunctionFamily};
pub use io::{load_instance, load_instance_str, save_instance, Instance};
pub use set_function::{
    classify_set_function, Classification, DeclaredClass, SenderSetFunction, SetFunctionData,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Probability sums are accepted within this tolerance; nothing is
/// renormalized internally.
pub const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse failure: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid field `{field}`: {reason}")]
    Invariant { field: String, reason: String },
    #[error("{what} too large: limit {limit}")]
    TooLarge { what: &'static str, limit: usize },
}

fn invariant(field: &str, reason: impl Into<String>) -> InstanceError {
    InstanceError::Invariant { field: field.to_string(), reason: reason.into() }
}

fn check_distribution<S: Scalar>(field: &str, p: &[S]) -> Result<(), InstanceError> {
    if p.is_empty() {
        return Err(invariant(field, "empty distribution"));
    }
    for (i, &v) in p.iter().enumerate() {
        if !(v >= S::zero()) {
            return Err(invariant(field, format!("entry {i} is negative ({v})")));
        }
    }
    let sum = p.iter().fold(S::zero(), |a, &b| a + b);
    if (sum - S::one()).abs() > S::c(PROB_TOL) {
        return Err(invariant(field, format!("sums to {sum}, expected 1")));
    }
    Ok(())
}

fn check_unit_range<S: Scalar>(field: &str, v: S) -> Result<(), InstanceError> {
    if v >= S::zero() && v <= S::one() {
        Ok(())
    } else {
        Err(invariant(field, format!("payoff out of [0,1]: {v}")))
    }
}

/// Common prior over states of nature; must lie in the interior of the
/// simplex since posterior updates divide by signal probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StatePrior<S> {
    pub mu: Vec<S>,
}

impl<S: Scalar> StatePrior<S> {
    pub fn new(mu: Vec<S>) -> Self {
        StatePrior { mu }
    }

    /// Number of states.
    pub fn states(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        check_distribution("prior", &self.mu)?;
        for &p in &self.mu {
            if p <= S::zero() {
                return Err(invariant("prior", "prior not interior (zero-probability state)"));
            }
        }
        Ok(())
    }
}

/// One receiver with finitely many actions and privately known type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleReceiverInstance<S> {
    pub prior: StatePrior<S>,
    /// Number of actions.
    pub actions: usize,
    /// Number of receiver types.
    pub types: usize,
    /// Distribution over types.
    pub lambda: Vec<S>,
    /// Receiver payoff `u_recv[k][theta][a]` in [0,1].
    pub u_recv: Vec<Vec<Vec<S>>>,
    /// Sender payoff `u_send[theta][a]` in [0,1].
    pub u_send: Vec<Vec<S>>,
}

impl<S: Scalar> SingleReceiverInstance<S> {
    pub fn states(&self) -> usize {
        self.prior.states()
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        self.prior.validate()?;
        let (d, l, m) = (self.states(), self.actions, self.types);
        if l < 1 {
            return Err(invariant("actions", "must be >= 1"));
        }
        if m < 1 {
            return Err(invariant("types", "must be >= 1"));
        }
        if self.lambda.len() != m {
            return Err(invariant("lambda", format!("expected {m} entries")));
        }
        check_distribution("lambda", &self.lambda)?;
        if self.u_recv.len() != m {
            return Err(invariant("u_recv", format!("expected {m} type blocks")));
        }
        for (k, block) in self.u_recv.iter().enumerate() {
            if block.len() != d {
                return Err(invariant("u_recv", format!("type {k}: expected {d} state rows")));
            }
            for (theta, row) in block.iter().enumerate() {
                if row.len() != l {
                    return Err(invariant(
                        "u_recv",
                        format!("type {k}, state {theta}: expected {l} actions"),
                    ));
                }
                for &v in row {
                    check_unit_range("u_recv", v)?;
                }
            }
        }
        if self.u_send.len() != d {
            return Err(invariant("u_send", format!("expected {d} state rows")));
        }
        for row in &self.u_send {
            if row.len() != l {
                return Err(invariant("u_send", format!("expected {l} actions per state")));
            }
            for &v in row {
                check_unit_range("u_send", v)?;
            }
        }
        Ok(())
    }

    /// The classic prosecutor-judge fixture: two states (innocent with prior
    /// 0.7, guilty with 0.3), one type, judge gets 1 for the correct verdict
    /// (acquit innocent / convict guilty), prosecutor gets 1 for conviction.
    /// Optimal sender value is 0.6.
    pub fn prosecutor() -> Self {
        SingleReceiverInstance {
            prior: StatePrior::new(vec![S::c(0.7), S::c(0.3)]),
            actions: 2,
            types: 1,
            lambda: vec![S::one()],
            // actions: 0 = acquit, 1 = convict
            u_recv: vec![vec![vec![S::one(), S::zero()], vec![S::zero(), S::one()]]],
            u_send: vec![vec![S::zero(), S::one()], vec![S::zero(), S::one()]],
        }
    }
}

/// A reported type profile from the support of the joint type distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeProfile<S> {
    /// One type index per receiver.
    pub profile: Vec<usize>,
    pub prob: S,
}

/// Many binary-action receivers without inter-agent externalities; the
/// sender's payoff is a monotone set function of the receivers playing `a1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: serde::Serialize", deserialize = "S: serde::de::DeserializeOwned"))]
pub struct MultiReceiverInstance<S> {
    pub prior: StatePrior<S>,
    pub receivers: usize,
    /// Types per receiver.
    pub m_r: Vec<usize>,
    /// Receiver payoff `u_recv[r][k][theta][a]`, `a` in `{a0, a1}`.
    pub u_recv: Vec<Vec<Vec<[S; 2]>>>,
    pub set_function: SenderSetFunction<S>,
    /// Joint type distribution: support profiles with strictly positive
    /// probability.
    pub type_dist: Vec<TypeProfile<S>>,
    /// Per-receiver type distributions for product-form (independent-type)
    /// instances; when present, `type_dist` must be its expansion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_r: Option<Vec<Vec<S>>>,
}

impl<S: Scalar> MultiReceiverInstance<S> {
    pub fn states(&self) -> usize {
        self.prior.states()
    }

    pub fn support(&self) -> usize {
        self.type_dist.len()
    }

    pub fn utility(&self, r: usize, k: usize, theta: usize, action: usize) -> S {
        self.u_recv[r][k][theta][action]
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        self.prior.validate()?;
        let (d, n) = (self.states(), self.receivers);
        if n < 1 {
            return Err(invariant("receivers", "must be >= 1"));
        }
        if n > 31 {
            return Err(InstanceError::TooLarge { what: "receivers", limit: 31 });
        }
        if self.m_r.len() != n {
            return Err(invariant("m_r", format!("expected {n} entries")));
        }
        for (r, &m) in self.m_r.iter().enumerate() {
            if m < 1 {
                return Err(invariant("m_r", format!("receiver {r}: must be >= 1")));
            }
        }
        if self.u_recv.len() != n {
            return Err(invariant("u_recv", format!("expected {n} receiver blocks")));
        }
        for (r, block) in self.u_recv.iter().enumerate() {
            if block.len() != self.m_r[r] {
                return Err(invariant(
                    "u_recv",
                    format!("receiver {r}: expected {} type blocks", self.m_r[r]),
                ));
            }
            for rows in block {
                if rows.len() != d {
                    return Err(invariant("u_recv", format!("receiver {r}: expected {d} state rows")));
                }
                for row in rows {
                    for &v in row {
                        check_unit_range("u_recv", v)?;
                    }
                }
            }
        }
        self.set_function.validate(n, d)?;
        if self.type_dist.is_empty() {
            return Err(invariant("type_dist", "empty support"));
        }
        let mut sum = S::zero();
        let mut seen = std::collections::BTreeSet::new();
        for (i, tp) in self.type_dist.iter().enumerate() {
            if tp.profile.len() != n {
                return Err(invariant("type_dist", format!("profile {i}: expected {n} entries")));
            }
            for (r, &k) in tp.profile.iter().enumerate() {
                if k >= self.m_r[r] {
                    return Err(invariant(
                        "type_dist",
                        format!("profile {i}: type {k} out of range for receiver {r}"),
                    ));
                }
            }
            if !(tp.prob > S::zero()) {
                return Err(invariant("type_dist", format!("profile {i}: prob must be > 0")));
            }
            if !seen.insert(tp.profile.clone()) {
                return Err(invariant("type_dist", format!("profile {i}: duplicate profile")));
            }
            sum = sum + tp.prob;
        }
        if (sum - S::one()).abs() > S::c(PROB_TOL) {
            return Err(invariant("type_dist", format!("sums to {sum}, expected 1")));
        }
        if let Some(lr) = &self.lambda_r {
            self.validate_product(lr)?;
        }
        Ok(())
    }

    fn validate_product(&self, lr: &[Vec<S>]) -> Result<(), InstanceError> {
        let n = self.receivers;
        if lr.len() != n {
            return Err(invariant("lambda_r", format!("expected {n} distributions")));
        }
        for (r, dist) in lr.iter().enumerate() {
            if dist.len() != self.m_r[r] {
                return Err(invariant(
                    "lambda_r",
                    format!("receiver {r}: expected {} entries", self.m_r[r]),
                ));
            }
            check_distribution(&format!("lambda_r[{r}]"), dist)?;
        }
        let count: usize = self.m_r.iter().product();
        if count > 4096 {
            return Err(InstanceError::TooLarge { what: "product type space", limit: 4096 });
        }
        // The explicit support must be exactly the positive-probability
        // expansion of the product distribution.
        let expansion = expand_product::<S>(&self.m_r, lr);
        if expansion.len() != self.type_dist.len() {
            return Err(invariant(
                "type_dist",
                format!(
                    "product expansion has {} profiles, file lists {}",
                    expansion.len(),
                    self.type_dist.len()
                ),
            ));
        }
        let listed: std::collections::BTreeMap<Vec<usize>, S> =
            self.type_dist.iter().map(|tp| (tp.profile.clone(), tp.prob)).collect();
        for (profile, prob) in expansion {
            match listed.get(&profile) {
                Some(&p) if (p - prob).abs() <= S::c(PROB_TOL) => {}
                Some(&p) => {
                    return Err(invariant(
                        "type_dist",
                        format!("profile {profile:?}: prob {p} differs from product {prob}"),
                    ))
                }
                None => {
                    return Err(invariant(
                        "type_dist",
                        format!("profile {profile:?} missing from product expansion"),
                    ))
                }
            }
        }
        Ok(())
    }
}

/// Enumerates the positive-probability profiles of a product distribution in
/// lexicographic order.
pub fn expand_product<S: Scalar>(m_r: &[usize], lambda_r: &[Vec<S>]) -> Vec<(Vec<usize>, S)> {
    let n = m_r.len();
    let mut out = Vec::new();
    let mut profile = vec![0usize; n];
    loop {
        let prob = profile
            .iter()
            .enumerate()
            .fold(S::one(), |acc, (r, &k)| acc * lambda_r[r][k]);
        if prob > S::zero() {
            out.push((profile.clone(), prob));
        }
        // lexicographic increment
        let mut r = n;
        loop {
            if r == 0 {
                return out;
            }
            r -= 1;
            profile[r] += 1;
            if profile[r] < m_r[r] {
                break;
            }
            profile[r] = 0;
        }
    }
}
