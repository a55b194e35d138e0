use leakguard_core::prelude::*;
#[allow(unused_imports)]
use leakguard_core::Assessed;

fn cell(s: &Session, p: &Partition) {
    let _ = split(s, p, "y", &SplitOptions::default());
}

fn main() {}
