use leakguard_core::prelude::*;
#[allow(unused_imports)]
use leakguard_core::Assessed;

fn cell(s: &Session, m: &Model<Assessed>, df: &DataFrame) {
    let _ = evaluate(s, m, df);
}

fn main() {}
