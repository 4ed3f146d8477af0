//! Subset enumeration over small contract universes.

use crate::error::Error;
use crate::instance::{Contract, ContractSet};

pub(crate) fn check_universe(universe: &ContractSet, bound: usize) -> Result<(), Error> {
    let bound = bound.min(24);
    if universe.len() > bound {
        Err(Error::UniverseTooLarge { size: universe.len(), bound })
    } else {
        Ok(())
    }
}

/// Masks over `n` elements in lexicographic order of their sorted element
/// lists: `{}`, `{0}`, `{0,1}`, `{0,1,2}`, ..., `{0,2}`, ..., `{n-1}`.
/// This is the preorder of the subset tree.
pub(crate) fn subsets_in_lex_order(n: usize) -> Vec<u32> {
    fn walk(n: usize, next: usize, mask: u32, out: &mut Vec<u32>) {
        out.push(mask);
        for i in next..n {
            walk(n, i + 1, mask | (1 << i), out);
        }
    }
    let mut out = Vec::with_capacity(1 << n);
    walk(n, 0, 0, &mut out);
    out
}

pub(crate) fn mask_to_set(universe: &ContractSet, mask: u32) -> ContractSet {
    universe.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, x)| *x).collect()
}

pub(crate) fn set_to_mask(universe: &ContractSet, set: &ContractSet) -> Option<u32> {
    let mut mask = 0u32;
    for x in set {
        let i = universe.as_slice().binary_search(x).ok()?;
        mask |= 1 << i;
    }
    Some(mask)
}

/// Every subset of `set`, in lexicographic order.
pub fn lex_subsets(set: &ContractSet) -> Vec<ContractSet> {
    subsets_in_lex_order(set.len()).into_iter().map(|m| mask_to_set(set, m)).collect()
}

pub(crate) fn element(universe: &ContractSet, i: usize) -> Contract {
    universe.as_slice()[i]
}
