use persuasion::instances::{generate_multi, SetFunctionFamily};
use persuasion::lp::Relation;
use persuasion::subset::Subset;

// Builds the crash point (myopic binary marginals + matching point-mass
// columns) and evaluates every row of the full LP at it.
fn main() {
    let inst = generate_multi::<f64>(13, 10, 2, 2, SetFunctionFamily::AnonymousConcave).unwrap();
    let lp = persuasion::multi::build_full_lp(&inst).unwrap();
    let n = inst.receivers;
    let d = inst.states();
    // x vars come first in layout order r-major, then k, then theta.
    let mut x = vec![0.0; lp.num_vars()];
    let mut idx = 0;
    for r in 0..n {
        for k in 0..inst.m_r[r] {
            for theta in 0..d {
                x[idx] = if inst.u_recv[r][k][theta][1] >= inst.u_recv[r][k][theta][0] { 1.0 } else { 0.0 };
                idx += 1;
            }
        }
    }
    // l vars: set to the max branch values.
    for r in 0..n {
        let m = inst.m_r[r];
        for k in 0..m {
            for k2 in 0..m {
                if k2 == k { continue; }
                // l_{a0}, l_{a1}
                for a_branch in 0..2 {
                    let mut best: f64 = 0.0;
                    for a in 0..2 {
                        let mut v = 0.0;
                        for theta in 0..d {
                            let xk2 = if inst.u_recv[r][k2][theta][1] >= inst.u_recv[r][k2][theta][0] { 1.0 } else { 0.0 };
                            let w = if a_branch == 1 { xk2 } else { 1.0 - xk2 };
                            v += inst.prior.mu[theta] * w * inst.u_recv[r][k][theta][a];
                        }
                        best = best.max(v);
                    }
                    x[idx] = best;
                    idx += 1;
                }
            }
        }
    }
    // phi columns: full LP appends all subsets in (k_idx, theta, mask) order.
    for k_idx in 0..inst.type_dist.len() {
        let profile = &inst.type_dist[k_idx].profile;
        for theta in 0..d {
            let mut myopic = Subset::EMPTY;
            for r in 0..n {
                if inst.u_recv[r][profile[r]][theta][1] >= inst.u_recv[r][profile[r]][theta][0] {
                    myopic = myopic.insert(r);
                }
            }
            for set in Subset::all(n) {
                x[idx] = if set == myopic { 1.0 } else { 0.0 };
                idx += 1;
            }
        }
    }
    assert_eq!(idx, lp.num_vars());
    let mut worst = 0.0f64;
    let mut worst_row = 0;
    for i in 0..lp.num_constraints() {
        let lhs = lp.row_value(i, &x);
        let rhs = lp.constraint(i).rhs;
        let viol = match lp.constraint(i).relation {
            Relation::Le => (lhs - rhs).max(0.0),
            Relation::Ge => (rhs - lhs).max(0.0),
            Relation::Eq => (lhs - rhs).abs(),
        };
        if viol > worst { worst = viol; worst_row = i; }
    }
    println!("worst violation {worst} at row {worst_row} of {}", lp.num_constraints());
}
