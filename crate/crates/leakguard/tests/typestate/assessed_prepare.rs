use leakguard_core::prelude::*;
#[allow(unused_imports)]
use leakguard_core::Assessed;

fn cell(s: &Session, m: &Model<Assessed>) {
    let _ = prepare(s, m, "y", &Recipe::default());
}

fn main() {}
