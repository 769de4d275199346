//! Small machines used in tests, benchmarks and the README.

use super::{Delta, Scm};

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// One state that increments the first counter forever.
pub fn incrementer() -> Scm {
    Scm {
        states: names(&["inc"]),
        alpha: vec![[0; 4]],
        beta: vec![Delta::INC1],
        initial: 0,
    }
}

/// Alternates between incrementing and decrementing the first counter.
/// States are named for the change the next step makes.
pub fn oscillator() -> Scm {
    Scm {
        states: names(&["inc", "dec"]),
        alpha: vec![[1; 4], [0; 4]],
        beta: vec![Delta::DEC1, Delta::INC1],
        initial: 0,
    }
}

/// Moves a unit from the first counter to the second, then keeps loading
/// and draining the first counter. Visits all four zero/nonzero patterns.
pub fn copier() -> Scm {
    // rows are indexed (b1, b2) = (0,0), (0,1), (1,0), (1,1)
    let (fill, drain, store) = (0, 1, 2);
    Scm {
        states: names(&["fill", "drain", "store"]),
        alpha: vec![
            [fill, fill, drain, drain],
            [store, fill, drain, drain],
            [fill, fill, drain, drain],
        ],
        beta: vec![Delta::INC1, Delta::DEC1, Delta::INC2],
        initial: fill,
    }
}

/// Never touches its counters.
pub fn idle() -> Scm {
    Scm {
        states: names(&["stay", "hop"]),
        alpha: vec![[1; 4], [0; 4]],
        beta: vec![Delta::NONE, Delta::NONE],
        initial: 0,
    }
}

/// Counts the first counter up to `top` and back down to zero, forever.
/// The machine has `2 * top` live states and is padded with unreachable
/// no-op states up to `pad_to` states so that machines with different
/// peaks compile to networks of the same shape.
pub fn up_down(top: usize, pad_to: usize) -> Scm {
    assert!(top >= 1);
    let live = 2 * top;
    let m = live.max(pad_to);
    let mut states = Vec::with_capacity(m);
    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    // up_k takes z1 from k-1 to k; down_k takes it from k to k-1
    for k in 1..=top {
        states.push(format!("up{k}"));
        beta.push(Delta::INC1);
        let next = if k == top { top } else { k };
        alpha.push([next; 4]);
    }
    for k in (1..=top).rev() {
        states.push(format!("down{k}"));
        beta.push(Delta::DEC1);
        let idx = top + (top - k);
        let next = if k == 1 { 0 } else { idx + 1 };
        alpha.push([next; 4]);
    }
    for p in live..m {
        states.push(format!("pad{p}"));
        beta.push(Delta::NONE);
        alpha.push([p; 4]);
    }
    Scm {
        states,
        alpha,
        beta,
        // start at down1 with zero counters: the first step moves to up1
        initial: live - 1,
    }
}
