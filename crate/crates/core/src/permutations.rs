//! Permutation enumeration by Heap's algorithm.

use crate::error::{Error, Result};

/// Largest particle count for which all n! permutations are enumerated.
pub const MAX_ENUMERATED: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    pub mapping: Vec<usize>,
    pub sign: i8,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { mapping: (0..n).collect(), sign: 1 }
    }

    /// Parity computed from the cycle decomposition.
    pub fn parity_of(mapping: &[usize]) -> i8 {
        let mut seen = vec![false; mapping.len()];
        let mut s = 1i8;
        for i in 0..mapping.len() {
            if seen[i] {
                continue;
            }
            let mut j = i;
            let mut len = 0;
            while !seen[j] {
                seen[j] = true;
                j = mapping[j];
                len += 1;
            }
            if len % 2 == 0 {
                s = -s;
            }
        }
        s
    }
}

pub fn check_enumerable(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::Capability(format!("n = {n} exceeds the enumeration cap {cap}")));
    }
    Ok(())
}

/// Calls `visit(state, sign)` for every arrangement of `state` reachable by
/// Heap's algorithm. Each step swaps two entries of `state` in place, so
/// callers may keep `state` as the permuted object itself.
pub fn heap_visit<T>(state: &mut [T], mut visit: impl FnMut(&[T], i8)) {
    let n = state.len();
    let mut c = vec![0usize; n];
    let mut sign = 1i8;
    visit(state, sign);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                state.swap(0, i);
            } else {
                state.swap(c[i], i);
            }
            sign = -sign;
            visit(state, sign);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// All n! permutations of 0..n in Heap order.
pub fn all_permutations(n: usize) -> Result<Vec<Permutation>> {
    check_enumerable(n, MAX_ENUMERATED)?;
    let mut out = Vec::with_capacity((1..=n).product());
    let mut p: Vec<usize> = (0..n).collect();
    heap_visit(&mut p, |m, s| out.push(Permutation { mapping: m.to_vec(), sign: s }));
    Ok(out)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn heap_covers_every_permutation_once() {
        for n in 0..=6 {
            let perms = all_permutations(n).unwrap();
            assert_eq!(perms.len() as f64, factorial(n));
            let set: HashSet<Vec<usize>> = perms.iter().map(|p| p.mapping.clone()).collect();
            assert_eq!(set.len(), perms.len());
            for p in &perms {
                assert_eq!(p.sign, Permutation::parity_of(&p.mapping));
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(all_permutations(11), Err(Error::Capability(_))));
    }
}
