use persuasion::instances::{generate_multi, SetFunctionFamily};
use persuasion::multi::{solve_column_generation, OracleMode};

fn main() {
    let inst = generate_multi::<f64>(13, 10, 2, 2, SetFunctionFamily::AnonymousConcave).unwrap();
    match solve_column_generation(&inst, OracleMode::Anonymous, 1e-7) {
        Ok(s) => println!("ok value {}", s.value),
        Err(e) => println!("err {e}"),
    }
}
