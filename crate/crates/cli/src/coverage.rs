//! Records which library operations a run has reached.

use std::collections::BTreeSet;
use std::sync::Mutex;

static TOUCHED: Mutex<BTreeSet<&'static str>> = Mutex::new(BTreeSet::new());

pub fn touch(name: &'static str) {
    TOUCHED.lock().expect("coverage lock").insert(name);
}

pub fn touched() -> BTreeSet<&'static str> {
    TOUCHED.lock().expect("coverage lock").clone()
}

/// Library operations not yet reached by any run in this process.
pub fn missing() -> Vec<&'static str> {
    let seen = touched();
    sqrtsieve::OPERATIONS
        .iter()
        .copied()
        .filter(|op| !seen.contains(op))
        .collect()
}
