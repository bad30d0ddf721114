//! Shared independent oracles for the integration and acceptance suites.
//!
//! Everything here recomputes expected values by brute force or by a
//! formulation deliberately different from the code under test, so the two
//! sides of each comparison stay independent. Only the generic LP solver is
//! shared plumbing.

#![allow(dead_code)]

use persuasion::lp::{LinearProgram, Relation};
use persuasion::Real;

/// Solves a dense square linear system by Gaussian elimination with partial
/// pivoting. Returns `None` when (numerically) singular.
pub fn solve_dense(mut a: Vec<Vec<Real>>, mut b: Vec<Real>) -> Option<Vec<Real>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[row][k] -= f * a[col][k];
                    }
                    b[row] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Exhaustive vertex enumeration for small bounded LPs: intersect every
/// n-subset of hyperplanes (constraint rows as equalities plus variable
/// bounds), keep the feasible intersections, and maximize the objective over
/// them. Returns `None` when no feasible vertex exists.
pub fn vertex_enumeration_opt(lp: &LinearProgram<Real>) -> Option<Real> {
    let n = lp.num_vars();
    let mut planes: Vec<(Vec<Real>, Real)> = Vec::new();
    for i in 0..lp.num_constraints() {
        let row = lp.constraint(i);
        let mut dense = vec![0.0; n];
        for &(j, a) in &row.coeffs {
            dense[j] += a;
        }
        planes.push((dense, row.rhs));
    }
    for j in 0..n {
        let (lo, up) = lp.bounds(j);
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lo));
        if let Some(u) = up {
            planes.push((e, u));
        }
    }
    let mut best: Option<Real> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a: Vec<Vec<Real>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<Real> = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_dense(a, b) {
            if feasible(lp, &x, 1e-8) {
                let val = lp.objective_value(&x);
                best = Some(best.map_or(val, |cur: Real| cur.max(val)));
            }
        }
        // next combination of `planes.len() choose n`
        let m = planes.len();
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] + (n - k) < m {
                idx[k] += 1;
                for t in k + 1..n {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn feasible(lp: &LinearProgram<Real>, x: &[Real], tol: Real) -> bool {
    for j in 0..lp.num_vars() {
        let (lo, up) = lp.bounds(j);
        if x[j] < lo - tol {
            return false;
        }
        if let Some(u) = up {
            if x[j] > u + tol {
                return false;
            }
        }
    }
    for i in 0..lp.num_constraints() {
        let lhs = lp.row_value(i, x);
        let rhs = lp.constraint(i).rhs;
        let ok = match lp.constraint(i).relation {
            Relation::Le => lhs <= rhs + tol,
            Relation::Ge => lhs >= rhs - tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
        };
        if !ok {
            return false;
        }
    }
    true
}
