//! Sender set-functions: the sender's payoff as a function of the set of
//! receivers playing `a1`, in the four families the solvers exploit.

use serde::{Deserialize, Serialize};

use super::{invariant, InstanceError};
use crate::scalar::Scalar;
use crate::subset::Subset;

/// Structural class the instance claims for its set function; drives solver
/// selection and is checkable by brute force for n <= 12.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclaredClass {
    Submodular,
    Supermodular,
    Anonymous,
    General,
}

impl std::fmt::Display for DeclaredClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DeclaredClass::Submodular => "submodular",
            DeclaredClass::Supermodular => "supermodular",
            DeclaredClass::Anonymous => "anonymous",
            DeclaredClass::General => "general",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "data", rename_all = "snake_case")]
pub enum SetFunctionData<S> {
    /// Explicit `values[theta][mask]` over all `2^n` subsets; n <= 12.
    Table { values: Vec<Vec<S>> },
    /// `f_theta(R) = by_count[theta][|R|]`.
    Anonymous { by_count: Vec<Vec<S>> },
    /// Weighted coverage: receiver `r` covers `covers[r]`; the value of a
    /// set is the total `item_weights[theta]` weight of the items covered.
    WeightedCoverage { item_weights: Vec<Vec<S>>, covers: Vec<Vec<usize>> },
    /// Modular: `f_theta(R) = sum_{r in R} values[theta][r]`.
    Additive { values: Vec<Vec<S>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SenderSetFunction<S> {
    pub declared_class: DeclaredClass,
    #[serde(flatten)]
    pub data: SetFunctionData<S>,
}

impl<S: Scalar> SenderSetFunction<S> {
    pub fn eval(&self, theta: usize, set: Subset) -> S {
        match &self.data {
            SetFunctionData::Table { values } => values[theta][set.0 as usize],
            SetFunctionData::Anonymous { by_count } => by_count[theta][set.len()],
            SetFunctionData::WeightedCoverage { item_weights, covers } => {
                let mut covered = 0u64;
                for r in set.iter() {
                    for &item in &covers[r] {
                        covered |= 1 << item;
                    }
                }
                let mut total = S::zero();
                let w = &item_weights[theta];
                let mut bits = covered;
                while bits != 0 {
                    let item = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    total = total + w[item];
                }
                total
            }
            SetFunctionData::Additive { values } => {
                set.iter().fold(S::zero(), |acc, r| acc + values[theta][r])
            }
        }
    }

    /// Materializes all `2^n` values for one state; used by the exhaustive
    /// paths (classification, brute-force pricing, exact multilinear sums).
    pub fn tabulate(&self, theta: usize) -> Vec<S> {
        let n = self.receivers();
        debug_assert!(n <= 16);
        Subset::all(n).map(|set| self.eval(theta, set)).collect()
    }

    pub fn receivers(&self) -> usize {
        match &self.data {
            SetFunctionData::Table { values } => values[0].len().trailing_zeros() as usize,
            SetFunctionData::Anonymous { by_count } => by_count[0].len() - 1,
            SetFunctionData::WeightedCoverage { covers, .. } => covers.len(),
            SetFunctionData::Additive { values } => values[0].len(),
        }
    }

    pub fn states(&self) -> usize {
        match &self.data {
            SetFunctionData::Table { values } => values.len(),
            SetFunctionData::Anonymous { by_count } => by_count.len(),
            SetFunctionData::WeightedCoverage { item_weights, .. } => item_weights.len(),
            SetFunctionData::Additive { values } => values.len(),
        }
    }

    pub(super) fn validate(&self, n: usize, d: usize) -> Result<(), InstanceError> {
        let tol = S::c(1e-9);
        match &self.data {
            SetFunctionData::Table { values } => {
                if n > 12 {
                    return Err(InstanceError::TooLarge { what: "table set function receivers", limit: 12 });
                }
                if values.len() != d {
                    return Err(invariant("set_function", format!("expected {d} state tables")));
                }
                let size = 1usize << n;
                for (theta, table) in values.iter().enumerate() {
                    if table.len() != size {
                        return Err(invariant(
                            "set_function",
                            format!("state {theta}: expected {size} entries"),
                        ));
                    }
                    if table[0].abs() > tol {
                        return Err(invariant("set_function", "f(empty set) must be 0"));
                    }
                    for (mask, &v) in table.iter().enumerate() {
                        if v < -tol || v > S::one() + tol {
                            return Err(invariant("set_function", format!("value out of [0,1]: {v}")));
                        }
                        for r in 0..n {
                            if mask >> r & 1 == 0 {
                                let sup = table[mask | 1 << r];
                                if sup < v - tol {
                                    return Err(invariant(
                                        "set_function",
                                        format!("not monotone at state {theta}, mask {mask}, receiver {r}"),
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            SetFunctionData::Anonymous { by_count } => {
                if by_count.len() != d {
                    return Err(invariant("set_function", format!("expected {d} state rows")));
                }
                for (theta, row) in by_count.iter().enumerate() {
                    if row.len() != n + 1 {
                        return Err(invariant(
                            "set_function",
                            format!("state {theta}: expected {} cardinality values", n + 1),
                        ));
                    }
                    if row[0].abs() > tol {
                        return Err(invariant("set_function", "f(empty set) must be 0"));
                    }
                    for i in 0..n {
                        if row[i + 1] < row[i] - tol {
                            return Err(invariant("set_function", format!("not monotone at state {theta}")));
                        }
                    }
                    for &v in row {
                        if v < -tol || v > S::one() + tol {
                            return Err(invariant("set_function", format!("value out of [0,1]: {v}")));
                        }
                    }
                }
            }
            SetFunctionData::WeightedCoverage { item_weights, covers } => {
                if item_weights.len() != d {
                    return Err(invariant("set_function", format!("expected {d} weight rows")));
                }
                if covers.len() != n {
                    return Err(invariant("set_function", format!("expected {n} coverage sets")));
                }
                let items = item_weights[0].len();
                if items > 64 {
                    return Err(InstanceError::TooLarge { what: "coverage item universe", limit: 64 });
                }
                let mut union = 0u64;
                for set in covers {
                    for &item in set {
                        if item >= items {
                            return Err(invariant("set_function", format!("coverage item {item} out of range")));
                        }
                        union |= 1 << item;
                    }
                }
                for row in item_weights {
                    if row.len() != items {
                        return Err(invariant("set_function", "ragged item weight rows"));
                    }
                    for &w in row {
                        if w < S::zero() {
                            return Err(invariant("set_function", "negative item weight"));
                        }
                    }
                    // Range check: the largest value is the weight of the
                    // covered union; items no receiver covers do not count.
                    let total = (0..items)
                        .filter(|&i| union >> i & 1 == 1)
                        .fold(S::zero(), |a, i| a + row[i]);
                    if total > S::one() + tol {
                        return Err(invariant("set_function", format!("value out of [0,1]: {total}")));
                    }
                }
            }
            SetFunctionData::Additive { values } => {
                if values.len() != d {
                    return Err(invariant("set_function", format!("expected {d} state rows")));
                }
                for row in values {
                    if row.len() != n {
                        return Err(invariant("set_function", format!("expected {n} receiver values")));
                    }
                    for &v in row {
                        if v < S::zero() {
                            return Err(invariant("set_function", "negative additive value"));
                        }
                    }
                    let total = row.iter().fold(S::zero(), |a, &b| a + b);
                    if total > S::one() + tol {
                        return Err(invariant("set_function", format!("value out of [0,1]: {total}")));
                    }
                }
            }
        }
        if self.states() != d {
            return Err(invariant("set_function", format!("expected {d} states")));
        }
        Ok(())
    }
}

/// Exact structural flags for one state, decided by brute force over all
/// subset pairs (with a 1e-9 slack so modular functions do not flicker on
/// float roundoff).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub monotone: bool,
    pub submodular: bool,
    pub supermodular: bool,
    pub anonymous: bool,
}

/// Checks `f_theta(R [intersect] R') + f_theta(R [union] R')` against
/// `f_theta(R) + f_theta(R')` over every pair of subsets.
pub fn classify_set_function<S: Scalar>(
    f: &SenderSetFunction<S>,
    theta: usize,
) -> Result<Classification, InstanceError> {
    let n = f.receivers();
    if n > 12 {
        return Err(InstanceError::TooLarge { what: "exhaustive classification", limit: 12 });
    }
    let v = f.tabulate(theta);
    let tol = S::c(1e-9);
    let mut monotone = true;
    for mask in 0..v.len() {
        for r in 0..n {
            if mask >> r & 1 == 0 && v[mask | 1 << r] < v[mask] - tol {
                monotone = false;
            }
        }
    }
    let mut submodular = true;
    let mut supermodular = true;
    for a in 0..v.len() {
        for b in 0..v.len() {
            let meet = v[a & b] + v[a | b];
            let join = v[a] + v[b];
            if meet > join + tol {
                submodular = false;
            }
            if meet < join - tol {
                supermodular = false;
            }
            if !submodular && !supermodular {
                break;
            }
        }
        if !submodular && !supermodular {
            break;
        }
    }
    let mut anonymous = true;
    let mut by_count: Vec<Option<S>> = vec![None; n + 1];
    for (mask, &val) in v.iter().enumerate() {
        let c = (mask as u32).count_ones() as usize;
        match by_count[c] {
            None => by_count[c] = Some(val),
            Some(prev) => {
                if (prev - val).abs() > tol {
                    anonymous = false;
                }
            }
        }
    }
    Ok(Classification { monotone, submodular, supermodular, anonymous })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn additive(values: Vec<f64>) -> SenderSetFunction<f64> {
        SenderSetFunction {
            declared_class: DeclaredClass::Submodular,
            data: SetFunctionData::Additive { values: vec![values] },
        }
    }

    #[test]
    fn additive_is_modular() {
        let f = additive(vec![0.3, 0.7]);
        let c = classify_set_function(&f, 0).unwrap();
        assert!(c.monotone && c.submodular && c.supermodular);
        assert!(!c.anonymous);
    }

    #[test]
    fn convex_anonymous_is_supermodular_only() {
        // g = (0, 0.25, 1) on n=2: checked over all 4x4 subset pairs.
        let f = SenderSetFunction {
            declared_class: DeclaredClass::Supermodular,
            data: SetFunctionData::Anonymous { by_count: vec![vec![0.0, 0.25, 1.0]] },
        };
        let c = classify_set_function(&f, 0).unwrap();
        assert!(c.supermodular && !c.submodular && c.anonymous && c.monotone);
    }

    #[test]
    fn overlapping_coverage_is_submodular_only() {
        // Two receivers sharing an item: brute force says submodular, and the
        // overlap breaks supermodularity.
        let f = SenderSetFunction {
            declared_class: DeclaredClass::Submodular,
            data: SetFunctionData::WeightedCoverage {
                item_weights: vec![vec![0.4, 0.3, 0.3]],
                covers: vec![vec![0, 1], vec![1, 2]],
            },
        };
        let c = classify_set_function(&f, 0).unwrap();
        assert!(c.submodular && !c.supermodular && c.monotone);
        assert!((f.eval(0, Subset::full(2)) - 1.0f64).abs() < 1e-12);
        assert!((f.eval(0, Subset::singleton(0)) - 0.7f64).abs() < 1e-12);
    }

    #[test]
    fn table_eval_indexes_by_mask() {
        let f = SenderSetFunction {
            declared_class: DeclaredClass::General,
            data: SetFunctionData::Table { values: vec![vec![0.0, 0.2, 0.3, 1.0]] },
        };
        assert_eq!(f.receivers(), 2);
        assert_eq!(f.eval(0, Subset(0b10)), 0.3);
        assert_eq!(f.tabulate(0), vec![0.0, 0.2, 0.3, 1.0]);
    }
}
