use leakguard_core::prelude::*;
#[allow(unused_imports)]
use leakguard_core::Assessed;

fn cell(s: &Session, m: &Model<Assessed>) {
    let _ = split(s, m, "y", &SplitOptions::default());
}

fn main() {}
