use leakguard_core::prelude::*;
#[allow(unused_imports)]
use leakguard_core::Assessed;

fn cell(s: &Session, m: &Model) {
    let _ = cv(s, m, 5, 42);
}

fn main() {}
