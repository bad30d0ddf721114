//! Generic linear programs and the reference simplex solver.
//!
//! Every solver in this crate reduces to one [`LinearProgram`]: maximize a
//! linear objective over sparse `<=`/`=`/`>=` rows with per-variable bounds
//! (lower defaults to 0, upper optional). [`solve_lp`] runs a bounded-variable
//! primal simplex in two phases and returns primal values together with one
//! dual price per constraint row, which the column-generation driver consumes
//! for pricing.
//!
//! The solver keeps an explicit dense inverse of the basis and prices sparse
//! columns against it, which pivots exactly like the textbook dense-tableau
//! method but stays tractable when masters carry tens of thousands of
//! columns. Pivoting is deterministic: largest reduced cost with lowest-index
//! ties, falling back to Bland's rule after a degenerate stall so cycling is
//! impossible. Fixed tolerances: feasibility 1e-7, reduced cost 1e-9,
//! duality gap 1e-6.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub const FEASIBILITY_TOL: f64 = 1e-7;
pub const REDUCED_COST_TOL: f64 = 1e-9;
pub const DUALITY_GAP_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint<S> {
    /// Sparse row: (variable index, coefficient).
    pub coeffs: Vec<(usize, S)>,
    pub relation: Relation,
    pub rhs: S,
}

/// A linear program in maximization form.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram<S> {
    objective: Vec<S>,
    lower: Vec<S>,
    upper: Vec<Option<S>>,
    constraints: Vec<Constraint<S>>,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![S::zero(); num_vars],
            lower: vec![S::zero(); num_vars],
            upper: vec![None; num_vars],
            constraints: Vec::new(),
        }
    }

    /// Appends a variable with the given objective coefficient and bounds,
    /// returning its index.
    pub fn add_var(&mut self, objective: S, lower: S, upper: Option<S>) -> usize {
        self.objective.push(objective);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    pub fn set_objective(&mut self, var: usize, coeff: S) {
        self.objective[var] = coeff;
    }

    pub fn set_bounds(&mut self, var: usize, lower: S, upper: Option<S>) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    /// Adds a sparse constraint row and returns its index.
    ///
    /// Panics on out-of-range variable indices or non-finite coefficients;
    /// rows are built programmatically so these are author bugs, not inputs.
    pub fn add_constraint(&mut self, coeffs: Vec<(usize, S)>, relation: Relation, rhs: S) -> usize {
        for &(j, a) in &coeffs {
            assert!(j < self.objective.len(), "constraint references variable {j} out of range");
            assert!(a.is_finite(), "non-finite coefficient on variable {j}");
        }
        assert!(rhs.is_finite(), "non-finite right-hand side");
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective_coeff(&self, var: usize) -> S {
        self.objective[var]
    }

    pub fn constraint(&self, row: usize) -> &Constraint<S> {
        &self.constraints[row]
    }

    /// Adds one coefficient to an existing row; used when appending columns
    /// to a built skeleton.
    pub fn add_coefficient(&mut self, row: usize, var: usize, coeff: S) {
        assert!(var < self.objective.len(), "column references variable {var} out of range");
        assert!(coeff.is_finite());
        self.constraints[row].coeffs.push((var, coeff));
    }

    pub fn bounds(&self, var: usize) -> (S, Option<S>) {
        (self.lower[var], self.upper[var])
    }

    /// Evaluates the left-hand side of a row at a primal point.
    pub fn row_value(&self, row: usize, x: &[S]) -> S {
        self.constraints[row]
            .coeffs
            .iter()
            .fold(S::zero(), |acc, &(j, a)| acc + a * x[j])
    }

    pub fn objective_value(&self, x: &[S]) -> S {
        self.objective
            .iter()
            .zip(x)
            .fold(S::zero(), |acc, (&c, &xj)| acc + c * xj)
    }

    /// Renders the program in the usual text LP interchange layout so it can
    /// be cross-checked with external tools.
    pub fn to_lp_format(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        out.push_str("Maximize\n obj:");
        for (j, &c) in self.objective.iter().enumerate() {
            if c != S::zero() {
                let _ = write!(out, " {c:+} x{j}");
            }
        }
        out.push_str("\nSubject To\n");
        for (i, row) in self.constraints.iter().enumerate() {
            let _ = write!(out, " c{i}:");
            for &(j, a) in &row.coeffs {
                let _ = write!(out, " {a:+} x{j}");
            }
            let rel = match row.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, " {rel} {}", row.rhs);
        }
        out.push_str("Bounds\n");
        for j in 0..self.num_vars() {
            match self.upper[j] {
                Some(u) => {
                    let _ = writeln!(out, " {} <= x{j} <= {u}", self.lower[j]);
                }
                None => {
                    let _ = writeln!(out, " x{j} >= {}", self.lower[j]);
                }
            }
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution<S> {
    pub status: LpStatus,
    /// Primal values; meaningful only when optimal.
    pub primal: Vec<S>,
    pub objective: S,
    /// One dual price per constraint row (sign convention of a maximization
    /// primal: `<=` rows price >= 0, `>=` rows <= 0, `=` rows free).
    pub duals: Vec<S>,
}

/// Internal solver failures, distinct from infeasible/unbounded outcomes.
#[derive(Debug, Error)]
pub enum LpError {
    #[error("simplex iteration limit exceeded after {0} iterations (cycling guard)")]
    IterationLimit(usize),
    #[error("basis matrix became singular during refactorization")]
    SingularBasis,
}

/// Residuals of a claimed optimal primal/dual pair, computed directly from
/// the program data, independent of the solve path.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LpResidualReport<S> {
    pub max_primal_infeasibility: S,
    pub duality_gap: S,
    pub max_complementary_slackness: S,
}

/// Checks a primal/dual pair against the program.
///
/// The dual objective is `y'b + sum_j upper_j * max(d_j, 0) + lower_j *
/// min(d_j, 0)` with reduced costs `d_j = c_j - y'A_j`; positive reduced
/// costs on variables without an upper bound are a dual infeasibility and
/// are reported through the complementary-slackness channel.
pub fn check_solution<S: Scalar>(lp: &LinearProgram<S>, sol: &LpSolution<S>) -> LpResidualReport<S> {
    let x = &sol.primal;
    let y = &sol.duals;
    let mut max_infeas = S::zero();
    let mut max_cs = S::zero();
    let mut dual_obj = S::zero();
    for (i, row) in lp.constraints.iter().enumerate() {
        let lhs = lp.row_value(i, x);
        let slack = row.rhs - lhs;
        let viol = match row.relation {
            Relation::Le => (-slack).max(S::zero()),
            Relation::Ge => slack.max(S::zero()),
            Relation::Eq => slack.abs(),
        };
        max_infeas = max_infeas.max(viol);
        max_cs = max_cs.max((y[i] * slack).abs());
        dual_obj = dual_obj + y[i] * row.rhs;
    }
    // Reduced costs per variable.
    let mut d = lp.objective.clone();
    for (i, row) in lp.constraints.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            d[j] = d[j] - y[i] * a;
        }
    }
    for j in 0..lp.num_vars() {
        let (lo, up) = lp.bounds(j);
        max_infeas = max_infeas.max(lo - x[j]);
        if let Some(u) = up {
            max_infeas = max_infeas.max(x[j] - u);
        }
        if d[j] > S::zero() {
            match up {
                Some(u) => {
                    dual_obj = dual_obj + u * d[j];
                    max_cs = max_cs.max(d[j] * (u - x[j]));
                }
                // Positive reduced cost with no upper bound: dual infeasible.
                None => max_cs = max_cs.max(d[j]),
            }
        } else {
            dual_obj = dual_obj + lo * d[j];
            max_cs = max_cs.max(-d[j] * (x[j] - lo));
        }
    }
    LpResidualReport {
        max_primal_infeasibility: max_infeas,
        duality_gap: (lp.objective_value(x) - dual_obj).abs(),
        max_complementary_slackness: max_cs,
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

/// Bounded-variable two-phase primal simplex over the shifted program.
///
/// Internally every inequality is normalized to `<=` (the sign vector
/// restores user-facing duals), which keeps the initial basis rows
/// lexicographically positive: the lexicographic ratio test is then the
/// exact arithmetic of the standard right-hand-side perturbation, so
/// degenerate plateaus resolve deterministically instead of cycling.
struct Simplex<S> {
    m: usize,
    n: usize, // total columns: structural + slack + artificial
    n_struct: usize,
    cols: Vec<Vec<(usize, S)>>,
    upper: Vec<S>, // shifted upper bounds; infinity() when absent
    cost: Vec<S>,
    rhs: Vec<S>,      // shifted, sign-normalized right-hand sides
    row_sign: Vec<S>, // +1 for rows stored as given, -1 for negated `>=` rows
    binv: Vec<S>,     // dense m*m, row-major
    basis: Vec<usize>,
    state: Vec<VarState>,
    xb: Vec<S>,
    pi: Vec<S>,
    artificial_start: usize,
    iterations: usize,
    pivots_since_refactor: usize,
    bland: bool,
    stall: usize,
    last_objective: S,
}

impl<S: Scalar> Simplex<S> {
    const STALL_LIMIT: usize = 2000;
    const REFACTOR_EVERY: usize = 64;

    fn new(lp: &LinearProgram<S>) -> Self {
        let m = lp.num_constraints();
        let n_struct = lp.num_vars();
        let row_sign: Vec<S> = lp
            .constraints
            .iter()
            .map(|c| if c.relation == Relation::Ge { -S::one() } else { S::one() })
            .collect();
        // Shift x to start at its lower bound: columns keep the same
        // coefficients, bounds become [0, upper - lower], the right-hand side
        // absorbs A * lower.
        let mut rhs: Vec<S> = lp
            .constraints
            .iter()
            .enumerate()
            .map(|(i, c)| c.rhs * row_sign[i])
            .collect();
        for (i, row) in lp.constraints.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                rhs[i] = rhs[i] - row_sign[i] * a * lp.lower[j];
            }
        }
        let mut cols: Vec<Vec<(usize, S)>> = vec![Vec::new(); n_struct];
        for (i, row) in lp.constraints.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                if a != S::zero() {
                    cols[j].push((i, row_sign[i] * a));
                }
            }
        }
        let inf = S::infinity();
        let mut upper: Vec<S> = (0..n_struct)
            .map(|j| match lp.upper[j] {
                Some(u) => u - lp.lower[j],
                None => inf,
            })
            .collect();
        let mut cost = vec![S::zero(); n_struct];
        for j in 0..n_struct {
            cost[j] = lp.objective[j];
        }
        // Slack columns: every normalized inequality row takes a +1 slack.
        let mut slack_of_row = vec![usize::MAX; m];
        for (i, row) in lp.constraints.iter().enumerate() {
            if row.relation == Relation::Eq {
                continue;
            }
            slack_of_row[i] = cols.len();
            cols.push(vec![(i, S::one())]);
            upper.push(inf);
            cost.push(S::zero());
        }
        // Crash basis. Preference per row: its slack when feasible, then a
        // structural column whose only nonzero is a positive coefficient in
        // this row (a point-mass column on a normalization row, say), then
        // an artificial. The artificial sign keeps the starting value
        // nonnegative, which also keeps the initial rows lex-positive.
        let mut basis = vec![usize::MAX; m];
        let mut used = vec![false; cols.len()];
        let mut singleton_of_row: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (j, col) in cols.iter().enumerate().take(n_struct) {
            if col.len() == 1 && col[0].1 > S::zero() {
                singleton_of_row[col[0].0].push(j);
            }
        }
        for i in 0..m {
            if slack_of_row[i] != usize::MAX && rhs[i] >= S::zero() {
                basis[i] = slack_of_row[i];
                continue;
            }
            for &j in &singleton_of_row[i] {
                if used[j] {
                    continue;
                }
                let value = rhs[i] / cols[j][0].1;
                if value >= S::zero() && value <= upper[j] {
                    basis[i] = j;
                    used[j] = true;
                    break;
                }
            }
        }
        let artificial_start = cols.len();
        let mut binv = vec![S::zero(); m * m];
        let mut xb = vec![S::zero(); m];
        for i in 0..m {
            if basis[i] == usize::MAX {
                let coef = if rhs[i] >= S::zero() { S::one() } else { -S::one() };
                let j = cols.len();
                cols.push(vec![(i, coef)]);
                upper.push(inf);
                cost.push(S::zero());
                basis[i] = j;
            }
            let coef = cols[basis[i]][0].1;
            binv[i * m + i] = S::one() / coef;
            xb[i] = rhs[i] / coef;
        }
        let n = cols.len();
        let mut state = vec![VarState::AtLower; n];
        for &j in &basis {
            state[j] = VarState::Basic;
        }
        Simplex {
            m,
            n,
            n_struct,
            cols,
            upper,
            cost,
            rhs,
            row_sign,
            binv,
            basis,
            state,
            xb,
            pi: vec![S::zero(); m],
            artificial_start,
            iterations: 0,
            pivots_since_refactor: 0,
            bland: false,
            stall: 0,
            last_objective: -S::infinity(),
        }
    }

    fn iteration_cap(&self) -> usize {
        20_000 + 50 * self.m + 8 * self.n
    }

    fn compute_pi(&mut self) {
        for i in 0..self.m {
            let mut acc = S::zero();
            for k in 0..self.m {
                let cb = self.cost[self.basis[k]];
                if cb != S::zero() {
                    acc = acc + cb * self.binv[k * self.m + i];
                }
            }
            self.pi[i] = acc;
        }
    }

    fn reduced_cost(&self, j: usize) -> S {
        let mut d = self.cost[j];
        for &(i, a) in &self.cols[j] {
            d = d - self.pi[i] * a;
        }
        d
    }

    /// Tableau column B^-1 A_j.
    fn ftran(&self, j: usize, out: &mut [S]) {
        for w in out.iter_mut() {
            *w = S::zero();
        }
        for &(r, a) in &self.cols[j] {
            for i in 0..self.m {
                out[i] = out[i] + self.binv[i * self.m + r] * a;
            }
        }
    }

    fn current_objective(&self) -> S {
        let mut z = S::zero();
        for i in 0..self.m {
            z = z + self.cost[self.basis[i]] * self.xb[i];
        }
        for j in 0..self.n {
            if self.state[j] == VarState::AtUpper {
                z = z + self.cost[j] * self.upper[j];
            }
        }
        z
    }

    /// Bounded ratio test with a lexicographic tie-break.
    ///
    /// Among blocking rows whose scalar ratios tie, the winner minimizes the
    /// perturbed ratio `(value + sum_k binv[i][k] eps^k) / rate`, compared
    /// component by component. This is the classic lexicographic rule: it
    /// picks pivots exactly as if the right-hand side carried the
    /// perturbation `(eps, eps^2, ...)`, under which no basic value is ever
    /// exactly degenerate, so the walk cannot stall on a plateau of tied
    /// bases. The entering variable's own bound behaves as a candidate with
    /// an all-zero perturbation tail. Rows of the basis inverse are linearly
    /// independent, so the winner is unique and the test deterministic.
    /// Returns the step length and the leaving row (None = bound flip).
    fn ratio_test(&self, j: usize, dir: S, w: &[S]) -> (S, Option<(usize, VarState)>) {
        let piv_tol = S::c(1e-8);
        let tie_eps = S::c(1e-12);
        // (row, bound hit, scalar ratio, rate)
        let mut blocking: Vec<(usize, VarState, S, S)> = Vec::new();
        let mut min_ratio = self.upper[j]; // own bound flip distance
        for i in 0..self.m {
            let rate = dir * w[i];
            let (ratio, hit) = if rate > piv_tol {
                (self.xb[i].max(S::zero()) / rate, VarState::AtLower)
            } else if rate < -piv_tol {
                let ub = self.upper[self.basis[i]];
                if !ub.is_finite() {
                    continue;
                }
                ((ub - self.xb[i]).max(S::zero()) / -rate, VarState::AtUpper)
            } else {
                continue;
            };
            min_ratio = min_ratio.min(ratio);
            blocking.push((i, hit, ratio, rate));
        }
        if min_ratio.is_infinite() {
            return (min_ratio, None);
        }
        let tied: Vec<&(usize, VarState, S, S)> = blocking
            .iter()
            .filter(|c| c.2 <= min_ratio + tie_eps)
            .collect();
        if tied.is_empty() {
            // Strictly shortest distance is the entering variable's own
            // bound: flip.
            return (min_ratio, None);
        }
        if self.bland {
            // Bland mode: lowest variable index among the tied candidates,
            // counting the entering variable itself when its bound ties.
            let mut best = tied[0];
            for c in &tied[1..] {
                if self.basis[c.0] < self.basis[best.0] {
                    best = c;
                }
            }
            if self.upper[j] <= min_ratio + tie_eps && j < self.basis[best.0] {
                return (self.upper[j], None);
            }
            return (best.2.min(self.upper[j]), Some((best.0, best.1)));
        }
        // Lexicographic comparison of perturbation tails binv[i][k] / rate.
        let flip_ties = self.upper[j] <= min_ratio + tie_eps;
        // None represents the flip candidate (all-zero tail).
        let mut champion: Option<&(usize, VarState, S, S)> = None;
        let mut start = 0;
        if !flip_ties {
            champion = Some(tied[0]);
            start = 1;
        }
        for c in &tied[start..] {
            let wins = match champion {
                None => {
                    // Candidate row beats the flip when its tail is
                    // lexicographically negative.
                    let mut verdict = false;
                    for k in 0..self.m {
                        let v = self.binv[c.0 * self.m + k] / c.3;
                        if v != S::zero() {
                            verdict = v < S::zero();
                            break;
                        }
                    }
                    verdict
                }
                Some(cur) => {
                    let mut verdict = false;
                    for k in 0..self.m {
                        let a = self.binv[c.0 * self.m + k] / c.3;
                        let b = self.binv[cur.0 * self.m + k] / cur.3;
                        if a != b {
                            verdict = a < b;
                            break;
                        }
                    }
                    verdict
                }
            };
            if wins {
                champion = Some(c);
            }
        }
        match champion {
            None => (self.upper[j], None),
            Some(&(i, hit, ratio, _)) => (ratio.min(self.upper[j]), Some((i, hit))),
        }
    }

    /// Rebuilds the basis inverse and basic values from scratch.
    fn refactorize(&mut self) -> Result<(), LpError> {
        let m = self.m;
        if m == 0 {
            return Ok(());
        }
        // Gauss-Jordan on [B | I] with partial pivoting.
        let mut b = vec![S::zero(); m * m];
        for (col, &j) in self.basis.iter().enumerate() {
            for &(r, a) in &self.cols[j] {
                b[r * m + col] = a;
            }
        }
        let mut inv = vec![S::zero(); m * m];
        for i in 0..m {
            inv[i * m + i] = S::one();
        }
        for col in 0..m {
            let mut piv = col;
            for r in col + 1..m {
                if b[r * m + col].abs() > b[piv * m + col].abs() {
                    piv = r;
                }
            }
            if b[piv * m + col].abs() < S::c(1e-12) {
                return Err(LpError::SingularBasis);
            }
            if piv != col {
                for k in 0..m {
                    b.swap(col * m + k, piv * m + k);
                    inv.swap(col * m + k, piv * m + k);
                }
            }
            let d = b[col * m + col];
            for k in 0..m {
                b[col * m + k] = b[col * m + k] / d;
                inv[col * m + k] = inv[col * m + k] / d;
            }
            for r in 0..m {
                if r != col {
                    let f = b[r * m + col];
                    if f != S::zero() {
                        for k in 0..m {
                            b[r * m + k] = b[r * m + k] - f * b[col * m + k];
                            inv[r * m + k] = inv[r * m + k] - f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        // xb = B^-1 (rhs - sum of at-upper columns).
        let mut adj = self.rhs.clone();
        for j in 0..self.n {
            if self.state[j] == VarState::AtUpper {
                for &(r, a) in &self.cols[j] {
                    adj[r] = adj[r] - a * self.upper[j];
                }
            }
        }
        for i in 0..m {
            let mut acc = S::zero();
            for r in 0..m {
                acc = acc + self.binv[i * m + r] * adj[r];
            }
            self.xb[i] = acc;
        }
        self.pivots_since_refactor = 0;
        Ok(())
    }

    /// Runs pivots until the current cost vector is optimal.
    fn optimize(&mut self) -> Result<LpStatus, LpError> {
        let rc_tol = S::c(REDUCED_COST_TOL);
        let cap = self.iteration_cap();
        self.compute_pi();
        // Candidate queue from the last pricing pass. Bound flips leave the
        // basis (hence pi and every reduced cost) untouched, so the queue
        // survives them; any true pivot invalidates it.
        let mut queue: Vec<usize> = Vec::new();
        let mut queue_pos = 0usize;
        loop {
            self.iterations += 1;
            if self.iterations > cap {
                return Err(LpError::IterationLimit(self.iterations));
            }
            // Pick the entering variable.
            let mut entering = usize::MAX;
            while entering == usize::MAX {
                if queue_pos >= queue.len() {
                    queue.clear();
                    queue_pos = 0;
                    let mut scored: Vec<(S, usize)> = Vec::new();
                    for j in 0..self.n {
                        if self.state[j] == VarState::Basic || self.upper[j] == S::zero() {
                            continue;
                        }
                        let d = self.reduced_cost(j);
                        let favorable = match self.state[j] {
                            VarState::AtLower => d > rc_tol,
                            VarState::AtUpper => d < -rc_tol,
                            VarState::Basic => false,
                        };
                        if favorable {
                            scored.push((d.abs(), j));
                        }
                    }
                    if scored.is_empty() {
                        return Ok(LpStatus::Optimal);
                    }
                    if self.bland {
                        scored.sort_by_key(|&(_, j)| j);
                    } else {
                        scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
                    }
                    queue.extend(scored.into_iter().map(|(_, j)| j));
                }
                let j = queue[queue_pos];
                queue_pos += 1;
                if self.state[j] == VarState::Basic {
                    continue;
                }
                let d = self.reduced_cost(j);
                let favorable = match self.state[j] {
                    VarState::AtLower => d > rc_tol,
                    VarState::AtUpper => d < -rc_tol,
                    VarState::Basic => false,
                };
                if favorable {
                    entering = j;
                }
            }
            let j = entering;
            // Direction: from lower the variable increases, from upper it
            // decreases; basic values move by -dir * w * delta.
            let dir = if self.state[j] == VarState::AtLower { S::one() } else { -S::one() };
            let mut w = vec![S::zero(); self.m];
            self.ftran(j, &mut w);
            let (mut delta, mut leave) = self.ratio_test(j, dir, &w);
            // Pivot safeguard: a small pivot element computed from a stale
            // basis inverse can be pure drift. Refactorize and redo the
            // ratio test on fresh numbers before accepting it.
            if let Some((row, _)) = leave {
                if w[row].abs() < S::c(1e-6) && self.pivots_since_refactor > 0 {
                    self.refactorize()?;
                    self.compute_pi();
                    queue.clear();
                    queue_pos = 0;
                    let d = self.reduced_cost(j);
                    let still_favorable = match self.state[j] {
                        VarState::AtLower => d > rc_tol,
                        VarState::AtUpper => d < -rc_tol,
                        VarState::Basic => false,
                    };
                    if !still_favorable {
                        continue;
                    }
                    self.ftran(j, &mut w);
                    let redo = self.ratio_test(j, dir, &w);
                    delta = redo.0;
                    leave = redo.1;
                }
            }
            if delta.is_infinite() {
                return Ok(LpStatus::Unbounded);
            }
            match leave {
                None => {
                    // Bound flip: the entering variable runs to its other
                    // bound; the basis (and hence pi and all reduced costs)
                    // is unchanged, so the candidate queue stays valid.
                    for i in 0..self.m {
                        self.xb[i] = self.xb[i] - dir * w[i] * delta;
                    }
                    self.state[j] = if dir > S::zero() { VarState::AtUpper } else { VarState::AtLower };
                }
                Some((row, leave_state)) => {
                    // Update basic values.
                    for i in 0..self.m {
                        if i != row {
                            self.xb[i] = self.xb[i] - dir * w[i] * delta;
                        }
                    }
                    let entering_value = match self.state[j] {
                        VarState::AtLower => delta,
                        VarState::AtUpper => self.upper[j] - delta,
                        VarState::Basic => unreachable!(),
                    };
                    let old = self.basis[row];
                    self.state[old] = leave_state;
                    self.state[j] = VarState::Basic;
                    self.basis[row] = j;
                    self.xb[row] = entering_value;
                    // binv <- E binv with eta column w at `row`.
                    let p = w[row];
                    let m = self.m;
                    for k in 0..m {
                        self.binv[row * m + k] = self.binv[row * m + k] / p;
                    }
                    for i in 0..m {
                        if i != row {
                            let f = w[i];
                            if f != S::zero() {
                                for k in 0..m {
                                    self.binv[i * m + k] =
                                        self.binv[i * m + k] - f * self.binv[row * m + k];
                                }
                            }
                        }
                    }
                    self.pivots_since_refactor += 1;
                    if self.pivots_since_refactor >= Self::REFACTOR_EVERY {
                        self.refactorize()?;
                    }
                    self.compute_pi();
                    queue.clear();
                    queue_pos = 0;
                    // Degeneracy bookkeeping: long runs without objective
                    // progress switch pricing to Bland's rule.
                    let z = self.current_objective();
                    if z > self.last_objective + S::c(1e-12) * (S::one() + z.abs()) {
                        self.last_objective = z;
                        self.stall = 0;
                    } else {
                        self.stall += 1;
                        if self.stall > Self::STALL_LIMIT {
                            self.bland = true;
                        }
                    }
                }
            }
        }
    }

    /// Installs a basis carried over from a previous solve of a program with
    /// the same rows (and possibly fewer columns). Returns false when the
    /// snapshot cannot be restored to a feasible point, in which case the
    /// solver state is untouched except for a refactorization.
    fn try_restore(&mut self, snapshot: &Basis) -> bool {
        if snapshot.per_row.len() != self.m {
            return false;
        }
        let mut basis = Vec::with_capacity(self.m);
        let mut slack_of_row = vec![usize::MAX; self.m];
        let mut artificial_of_row = vec![usize::MAX; self.m];
        for j in self.n_struct..self.n {
            let (row, coef) = self.cols[j][0];
            if j < self.artificial_start {
                slack_of_row[row] = j;
            } else {
                let _ = coef;
                artificial_of_row[row] = j;
            }
        }
        for (row, metric) in snapshot.per_row.iter().enumerate() {
            let j = match *metric {
                BasicVar::Structural(v) if v < self.n_struct => v,
                BasicVar::Structural(_) => return false,
                BasicVar::Slack(r) => {
                    if r >= self.m || slack_of_row[r] == usize::MAX {
                        return false;
                    }
                    slack_of_row[r]
                }
                BasicVar::Artificial(r) => {
                    if r >= self.m {
                        return false;
                    }
                    if artificial_of_row[r] == usize::MAX {
                        // Create a locked artificial column to hold the slot.
                        let coef = if self.rhs[r] >= S::zero() { S::one() } else { -S::one() };
                        self.cols.push(vec![(r, coef)]);
                        self.upper.push(S::zero());
                        self.cost.push(S::zero());
                        self.state.push(VarState::AtLower);
                        artificial_of_row[r] = self.n;
                        self.n += 1;
                    }
                    artificial_of_row[r]
                }
            };
            let _ = row;
            basis.push(j);
        }
        let mut seen = std::collections::HashSet::new();
        if !basis.iter().all(|j| seen.insert(*j)) {
            return false;
        }
        let old_basis = std::mem::replace(&mut self.basis, basis);
        let old_state = self.state.clone();
        for s in self.state.iter_mut() {
            if *s == VarState::Basic {
                *s = VarState::AtLower;
            }
        }
        for &v in &snapshot.structural_at_upper {
            if v >= self.n_struct || !self.upper[v].is_finite() {
                self.basis = old_basis;
                self.state = old_state;
                return false;
            }
            self.state[v] = VarState::AtUpper;
        }
        for &j in &self.basis {
            self.state[j] = VarState::Basic;
        }
        if self.refactorize().is_err() {
            self.basis = old_basis;
            self.state = old_state;
            let _ = self.refactorize();
            return false;
        }
        let tol = S::c(FEASIBILITY_TOL);
        let feasible = (0..self.m).all(|i| {
            self.xb[i] >= -tol && self.xb[i] <= self.upper[self.basis[i]] + tol
        });
        if !feasible {
            self.basis = old_basis;
            self.state = old_state;
            let _ = self.refactorize();
            return false;
        }
        true
    }

    fn snapshot(&self) -> Basis {
        let per_row = self
            .basis
            .iter()
            .map(|&j| {
                if j < self.n_struct {
                    BasicVar::Structural(j)
                } else {
                    let row = self.cols[j][0].0;
                    if j < self.artificial_start {
                        BasicVar::Slack(row)
                    } else {
                        BasicVar::Artificial(row)
                    }
                }
            })
            .collect();
        let structural_at_upper = (0..self.n_struct)
            .filter(|&j| self.state[j] == VarState::AtUpper)
            .collect();
        Basis { per_row, structural_at_upper }
    }

    fn solve(mut self, lp: &LinearProgram<S>, warm: Option<&Basis>) -> Result<(LpSolution<S>, Basis), LpError> {
        let warm_ok = match warm {
            Some(snapshot) => self.try_restore(snapshot),
            None => false,
        };
        if std::env::var_os("PERSUASION_LP_DEBUG").is_some() {
            eprintln!("lp-debug: solve m={} n={} warm_given={} warm_ok={}", self.m, self.n, warm.is_some(), warm_ok);
        }
        // Phase 1: drive artificials to zero. A restored feasible basis
        // skips it outright.
        let needs_phase1 = !warm_ok && self.artificial_start < self.n;
        if needs_phase1 {
            for c in self.cost.iter_mut() {
                *c = S::zero();
            }
            for j in self.artificial_start..self.n {
                self.cost[j] = -S::one();
            }
            self.last_objective = -S::infinity();
            let status = self.optimize()?;
            debug_assert!(status != LpStatus::Unbounded, "phase 1 objective is bounded");
            let z1 = self.current_objective();
            let bnorm = self.rhs.iter().fold(S::zero(), |a, &b| a.max(b.abs()));
            if z1 < -S::c(1e-9) * (S::one() + bnorm) {
                let snapshot = self.snapshot();
                return Ok((
                    LpSolution {
                        status: LpStatus::Infeasible,
                        primal: vec![S::zero(); lp.num_vars()],
                        objective: S::zero(),
                        duals: vec![S::zero(); lp.num_constraints()],
                    },
                    snapshot,
                ));
            }
        }
        // Lock artificials at zero; those still basic sit at value ~0 on
        // redundant rows and price out as zero duals.
        for j in self.artificial_start..self.n {
            self.cost[j] = S::zero();
            self.upper[j] = S::zero();
            if self.state[j] == VarState::AtUpper {
                self.state[j] = VarState::AtLower;
            }
        }
        // Phase 2.
        for j in 0..self.n {
            self.cost[j] = if j < self.n_struct { lp.objective[j] } else { S::zero() };
        }
        self.bland = false;
        self.stall = 0;
        self.last_objective = -S::infinity();
        let status = self.optimize()?;
        if status == LpStatus::Unbounded {
            let snapshot = self.snapshot();
            return Ok((
                LpSolution {
                    status,
                    primal: vec![S::zero(); lp.num_vars()],
                    objective: S::infinity(),
                    duals: vec![S::zero(); lp.num_constraints()],
                },
                snapshot,
            ));
        }
        // Extract the primal in original coordinates.
        let mut primal = vec![S::zero(); lp.num_vars()];
        for j in 0..self.n_struct {
            let shifted = match self.state[j] {
                VarState::Basic => S::zero(), // filled below
                VarState::AtLower => S::zero(),
                VarState::AtUpper => self.upper[j],
            };
            primal[j] = lp.lower[j] + shifted;
        }
        for i in 0..self.m {
            let j = self.basis[i];
            if j < self.n_struct {
                primal[j] = lp.lower[j] + self.xb[i];
            }
        }
        self.compute_pi();
        // Internal rows are sign-normalized; restore the user's orientation.
        let duals = (0..self.m).map(|i| self.row_sign[i] * self.pi[i]).collect();
        let snapshot = self.snapshot();
        Ok((
            LpSolution {
                status: LpStatus::Optimal,
                objective: lp.objective_value(&primal),
                primal,
                duals,
            },
            snapshot,
        ))
    }
}

/// A reusable basis snapshot keyed by row: warm-starting a later solve of a
/// program with identical rows (columns may have been appended) skips phase
/// 1 entirely, since the previous optimum stays feasible.
#[derive(Clone, Debug)]
pub struct Basis {
    per_row: Vec<BasicVar>,
    structural_at_upper: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
enum BasicVar {
    Structural(usize),
    Slack(usize),
    Artificial(usize),
}

/// Solves a linear program with the reference simplex.
///
/// Deterministic: identical inputs produce identical solutions. Internal
/// failures (the anti-cycling iteration cap, a singular basis) surface as
/// [`LpError`], distinct from an [`LpStatus::Infeasible`] outcome.
pub fn solve_lp<S: Scalar>(lp: &LinearProgram<S>) -> Result<LpSolution<S>, LpError> {
    solve_lp_warm(lp, None).map(|(sol, _)| sol)
}

/// [`solve_lp`] with an optional warm-start basis from an earlier solve of a
/// program with the same rows; also returns the final basis for chaining.
pub fn solve_lp_warm<S: Scalar>(
    lp: &LinearProgram<S>,
    warm: Option<&Basis>,
) -> Result<(LpSolution<S>, Basis), LpError> {
    let first = Simplex::new(lp).solve(lp, warm);
    let needs_retry = match &first {
        // A basis that refactorizes as singular means a pivot was taken on
        // drifted data; a Bland-ordered rerun takes a different path.
        Err(LpError::SingularBasis) => true,
        Err(_) => false,
        Ok((sol, _)) if sol.status == LpStatus::Optimal => {
            let report = check_solution(lp, sol);
            let scale = S::one() + sol.objective.abs();
            report.max_primal_infeasibility > S::c(FEASIBILITY_TOL) * scale
                || report.duality_gap > S::c(DUALITY_GAP_TOL) * scale
        }
        Ok(_) => false,
    };
    if needs_retry {
        let mut careful = Simplex::new(lp);
        careful.bland = true;
        return careful.solve(lp, None);
    }
    first
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(num_vars: usize) -> LinearProgram<f64> {
        LinearProgram::new(num_vars)
    }

    #[test]
    fn single_variable_upper_bound() {
        // max x s.t. x <= 1
        let mut p = lp(1);
        p.set_objective(0, 1.0);
        p.add_constraint(vec![(0, 1.0)], Relation::Le, 1.0);
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.primal[0] - 1.0).abs() < 1e-9);
        assert!((sol.objective - 1.0).abs() < 1e-9);
        assert!((sol.duals[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        // x >= 2 and x <= 1
        let mut p = lp(1);
        p.set_objective(0, 1.0);
        p.add_constraint(vec![(0, 1.0)], Relation::Ge, 2.0);
        p.add_constraint(vec![(0, 1.0)], Relation::Le, 1.0);
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn degenerate_optimum() {
        // max x+y s.t. x+y <= 1, x <= 1, y <= 1
        let mut p = lp(2);
        p.set_objective(0, 1.0);
        p.set_objective(1, 1.0);
        p.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.0);
        p.add_constraint(vec![(0, 1.0)], Relation::Le, 1.0);
        p.add_constraint(vec![(1, 1.0)], Relation::Le, 1.0);
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unbounded_direction_detected() {
        let mut p = lp(2);
        p.set_objective(0, 1.0);
        p.add_constraint(vec![(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_constraints_via_phase_one() {
        // max 2x + 3y s.t. x + y = 1, x ∈ [0, 0.4]
        let mut p = lp(2);
        p.set_objective(0, 2.0);
        p.set_objective(1, 3.0);
        p.set_bounds(0, 0.0, Some(0.4));
        p.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.0);
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 3.0).abs() < 1e-9);
        assert!((sol.primal[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn upper_bounds_handled_without_rows() {
        // max x + y, x <= 0.5 (bound), x + y <= 1.2, y <= 1 (bound)
        let mut p = lp(2);
        p.set_objective(0, 1.0);
        p.set_objective(1, 1.0);
        p.set_bounds(0, 0.0, Some(0.5));
        p.set_bounds(1, 0.0, Some(1.0));
        p.add_constraint(vec![(0, 1.0), (1, 1.0)], Relation::Le, 1.2);
        let sol = solve_lp(&p).unwrap();
        assert!((sol.objective - 1.2).abs() < 1e-9);
        let rep = check_solution(&p, &sol);
        assert!(rep.max_primal_infeasibility < 1e-9);
        assert!(rep.duality_gap < 1e-9);
    }

    #[test]
    fn nonzero_lower_bounds() {
        // min-style check through maximization of -x: lower bound binds.
        let mut p = lp(1);
        p.set_objective(0, -1.0);
        p.set_bounds(0, 0.25, None);
        p.add_constraint(vec![(0, 1.0)], Relation::Le, 2.0);
        let sol = solve_lp(&p).unwrap();
        assert!((sol.primal[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn duals_satisfy_weak_duality_and_gap() {
        let mut p = lp(3);
        p.set_objective(0, 3.0);
        p.set_objective(1, 1.0);
        p.set_objective(2, 2.0);
        p.add_constraint(vec![(0, 1.0), (1, 1.0), (2, 3.0)], Relation::Le, 30.0);
        p.add_constraint(vec![(0, 2.0), (1, 2.0), (2, 5.0)], Relation::Le, 24.0);
        p.add_constraint(vec![(0, 4.0), (1, 1.0), (2, 2.0)], Relation::Le, 36.0);
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 28.0).abs() < 1e-7);
        let rep = check_solution(&p, &sol);
        assert!(rep.max_primal_infeasibility < 1e-8);
        assert!(rep.duality_gap < 1e-7);
        assert!(rep.max_complementary_slackness < 1e-7);
    }

    #[test]
    fn hand_built_pair_has_zero_gap() {
        // max x, x <= 1: (x=1, y=1) is an optimal pair.
        let mut p = lp(1);
        p.set_objective(0, 1.0);
        p.add_constraint(vec![(0, 1.0)], Relation::Le, 1.0);
        let sol = LpSolution {
            status: LpStatus::Optimal,
            primal: vec![1.0],
            objective: 1.0,
            duals: vec![1.0],
        };
        let rep = check_solution(&p, &sol);
        assert_eq!(rep.duality_gap, 0.0);
        assert_eq!(rep.max_primal_infeasibility, 0.0);
    }

    #[test]
    fn perturbed_primal_reports_matching_infeasibility() {
        let mut p = lp(1);
        p.set_objective(0, 1.0);
        p.add_constraint(vec![(0, 1.0)], Relation::Le, 1.0);
        let sol = LpSolution {
            status: LpStatus::Optimal,
            primal: vec![1.0 + 1e-3],
            objective: 1.0 + 1e-3,
            duals: vec![1.0],
        };
        let rep = check_solution(&p, &sol);
        assert!((rep.max_primal_infeasibility - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn ge_rows_price_nonpositive() {
        // max -x s.t. x >= 2: dual of the >= row must be <= 0.
        let mut p = lp(1);
        p.set_objective(0, -1.0);
        p.add_constraint(vec![(0, 1.0)], Relation::Ge, 2.0);
        let sol = solve_lp(&p).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.primal[0] - 2.0).abs() < 1e-9);
        assert!(sol.duals[0] <= 1e-12);
        assert!((sol.duals[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn determinism_across_repeat_solves() {
        let mut p = lp(4);
        for j in 0..4 {
            p.set_objective(j, 1.0 + j as f64 * 0.1);
            p.set_bounds(j, 0.0, Some(1.0));
        }
        p.add_constraint(vec![(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)], Relation::Le, 2.0);
        p.add_constraint(vec![(0, 1.0), (2, -1.0)], Relation::Ge, -0.5);
        let a = solve_lp(&p).unwrap();
        let b = solve_lp(&p).unwrap();
        assert_eq!(a.primal, b.primal);
        assert_eq!(a.duals, b.duals);
    }

    #[test]
    fn lp_format_dump_mentions_all_sections() {
        let mut p = lp(2);
        p.set_objective(0, 1.0);
        p.set_bounds(1, 0.0, Some(2.0));
        p.add_constraint(vec![(0, 1.0), (1, -1.0)], Relation::Eq, 0.5);
        let text = p.to_lp_format();
        assert!(text.contains("Maximize"));
        assert!(text.contains("Subject To"));
        assert!(text.contains("= 0.5"));
        assert!(text.contains("Bounds"));
    }
}
