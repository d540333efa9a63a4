//! Hopcroft partition-refinement minimization.
//!
//! Optional: none of the pipelines require minimal automata, but realizability
//! must be invariant under it, which the test suite checks.

use std::collections::{HashMap, HashSet, VecDeque};

use super::Dfa;

/// Minimizes a (total, reachable) DFA with Hopcroft's algorithm. The result
/// accepts the same language; state numbering follows the first occurrence of
/// each block when scanning states in order, with the initial block first.
pub fn minimize(d: &Dfa) -> Dfa {
    let n = d.state_count();
    let letters = d.letter_count();
    if n == 0 {
        return d.clone();
    }

    // Inverse transitions: for each letter, the predecessors of each state.
    let mut preimage: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new(); n]; letters];
    for s in 0..n {
        for a in 0..letters {
            preimage[a][d.trans[s][a] as usize].push(s as u32);
        }
    }

    // Block structure: block id per state, states per block.
    let mut block_of: Vec<u32> = vec![0; n];
    let mut blocks: Vec<Vec<u32>> = vec![Vec::new(), Vec::new()];
    for s in 0..n {
        let b = usize::from(d.finals[s]);
        block_of[s] = b as u32;
        blocks[b].push(s as u32);
    }
    if blocks[1].is_empty() || blocks[0].is_empty() {
        blocks.retain(|b| !b.is_empty());
        for s in 0..n {
            block_of[s] = 0;
        }
    }

    let mut work: VecDeque<(u32, usize)> = VecDeque::new();
    let mut in_work: HashSet<(u32, usize)> = HashSet::new();
    // Seed with the smaller of the two initial blocks for every letter.
    let seed = if blocks.len() == 2 && blocks[1].len() < blocks[0].len() {
        1u32
    } else {
        0u32
    };
    for a in 0..letters {
        work.push_back((seed, a));
        in_work.insert((seed, a));
        if blocks.len() == 2 {
            let other = 1 - seed;
            work.push_back((other, a));
            in_work.insert((other, a));
        }
    }

    while let Some((splitter, a)) = work.pop_front() {
        in_work.remove(&(splitter, a));
        // States with an a-transition into the splitter block.
        let mut touched: HashMap<u32, Vec<u32>> = HashMap::new();
        for &t in &blocks[splitter as usize] {
            for &p in &preimage[a][t as usize] {
                touched.entry(block_of[p as usize]).or_default().push(p);
            }
        }
        let mut touched: Vec<(u32, Vec<u32>)> = touched.into_iter().collect();
        touched.sort_by_key(|(b, _)| *b);
        for (b, mut hits) in touched {
            hits.sort_unstable();
            hits.dedup();
            if hits.len() == blocks[b as usize].len() {
                continue; // every member moves: no split
            }
            // Split block b into hits / rest.
            let hit_set: HashSet<u32> = hits.iter().copied().collect();
            let rest: Vec<u32> = blocks[b as usize]
                .iter()
                .copied()
                .filter(|s| !hit_set.contains(s))
                .collect();
            let new_id = blocks.len() as u32;
            let (stay, moved) = if hits.len() <= rest.len() {
                (rest, hits)
            } else {
                (hits, rest)
            };
            for &s in &moved {
                block_of[s as usize] = new_id;
            }
            blocks[b as usize] = stay;
            blocks.push(moved);
            for l in 0..letters {
                if in_work.contains(&(b, l)) {
                    work.push_back((new_id, l));
                    in_work.insert((new_id, l));
                } else {
                    // Standard smaller-half rule: queue the smaller part.
                    let smaller = if blocks[b as usize].len() <= blocks[new_id as usize].len() {
                        b
                    } else {
                        new_id
                    };
                    work.push_back((smaller, l));
                    in_work.insert((smaller, l));
                }
            }
        }
    }

    // Renumber blocks in order of first appearance from the initial state.
    let mut rename: HashMap<u32, u32> = HashMap::new();
    let mut order: Vec<u32> = Vec::new();
    let mut queue = VecDeque::from([block_of[d.initial as usize]]);
    rename.insert(block_of[d.initial as usize], 0);
    order.push(block_of[d.initial as usize]);
    while let Some(b) = queue.pop_front() {
        let rep = blocks[b as usize][0];
        for a in 0..letters {
            let nb = block_of[d.trans[rep as usize][a] as usize];
            if !rename.contains_key(&nb) {
                rename.insert(nb, order.len() as u32);
                order.push(nb);
                queue.push_back(nb);
            }
        }
    }

    let mut finals = vec![false; order.len()];
    let mut trans = vec![vec![0u32; letters]; order.len()];
    for (new_id, &b) in order.iter().enumerate() {
        let rep = blocks[b as usize][0] as usize;
        finals[new_id] = d.finals[rep];
        for a in 0..letters {
            trans[new_id][a] = rename[&block_of[d.trans[rep][a] as usize]];
        }
    }
    Dfa::new(d.width, 0, finals, trans).expect("minimization preserves well-formedness")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{complement, determinize, Nfa};
    use crate::error::Limits;
    use crate::logic::all_traces;

    #[test]
    fn minimize_preserves_language_and_shrinks() {
        // A redundant 4-state DFA for "some letter contains bit 0".
        let d = Dfa::new(
            1,
            0,
            vec![false, true, false, true],
            vec![vec![2, 1], vec![1, 3], vec![0, 3], vec![3, 1]],
        )
        .unwrap();
        let m = minimize(&d);
        assert!(m.state_count() <= d.state_count());
        for len in 1..=4 {
            for t in all_traces(1, len) {
                assert_eq!(m.accepts(&t).unwrap(), d.accepts(&t).unwrap());
            }
        }
        assert_eq!(m.state_count(), 2);
    }

    #[test]
    fn minimize_handles_all_accepting() {
        let d = Dfa::new(1, 0, vec![true, true], vec![vec![1, 1], vec![0, 0]]).unwrap();
        let m = minimize(&d);
        assert_eq!(m.state_count(), 1);
        for t in all_traces(1, 3) {
            assert!(m.accepts(&t).unwrap());
        }
    }

    #[test]
    fn minimize_agrees_after_boolean_algebra() {
        let n = Nfa::new(
            2,
            0,
            vec![false, false, true],
            vec![
                vec![vec![0], vec![0, 1], vec![0], vec![1, 2]],
                vec![vec![2], vec![], vec![1], vec![2]],
                vec![vec![2], vec![2], vec![], vec![0, 2]],
            ],
        )
        .unwrap();
        let limits = Limits::default();
        let d = complement(&determinize(&n, &limits).unwrap());
        let m = minimize(&d);
        for len in 1..=3 {
            for t in all_traces(2, len) {
                assert_eq!(m.accepts(&t).unwrap(), d.accepts(&t).unwrap());
            }
        }
    }
}
