//! Aho-Corasick automaton over term sequences.
//!
//! Patterns are keyword phrases and the alphabet is the set of distinct
//! terms occurring in them. Page terms outside that alphabet cannot take
//! part in any match and send the automaton back to the root, so a page is
//! scanned in one pass regardless of how many keywords the profile holds.

use std::collections::{HashMap, VecDeque};

const ROOT: u32 = 0;

#[derive(Debug, Default, Clone)]
struct State {
    next: HashMap<u32, u32>,
    fail: u32,
    /// Patterns ending here, including those inherited through the failure
    /// chain.
    outputs: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct PhraseMatcher {
    alphabet: HashMap<String, u32>,
    states: Vec<State>,
    pattern_lens: Vec<usize>,
}

/// A match of pattern `pattern` over terms `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct PhraseMatch {
    pub pattern: usize,
    pub start: usize,
    pub end: usize,
}

impl PhraseMatcher {
    pub fn new<P, T>(patterns: P) -> Self
    where
        P: IntoIterator<Item = T>,
        T: IntoIterator,
        T::Item: AsRef<str>,
    {
        let mut alphabet: HashMap<String, u32> = HashMap::new();
        let mut states = vec![State::default()];
        let mut pattern_lens = Vec::new();

        for (id, pattern) in patterns.into_iter().enumerate() {
            let mut cur = ROOT;
            let mut len = 0;
            for term in pattern {
                let next_symbol = alphabet.len() as u32;
                let symbol = *alphabet.entry(term.as_ref().to_string()).or_insert(next_symbol);
                cur = match states[cur as usize].next.get(&symbol) {
                    Some(&s) => s,
                    None => {
                        let s = states.len() as u32;
                        states.push(State::default());
                        states[cur as usize].next.insert(symbol, s);
                        s
                    }
                };
                len += 1;
            }
            if len > 0 {
                states[cur as usize].outputs.push(id as u32);
            }
            pattern_lens.push(len);
        }

        // Breadth-first failure links; a state's failure target is always
        // shallower, so its outputs are final by the time we inherit them.
        let mut queue: VecDeque<u32> = states[ROOT as usize].next.values().copied().collect();
        while let Some(s) = queue.pop_front() {
            let edges: Vec<(u32, u32)> =
                states[s as usize].next.iter().map(|(&sym, &t)| (sym, t)).collect();
            for (symbol, target) in edges {
                let mut f = states[s as usize].fail;
                let fail = loop {
                    if let Some(&n) = states[f as usize].next.get(&symbol) {
                        break n;
                    }
                    if f == ROOT {
                        break ROOT;
                    }
                    f = states[f as usize].fail;
                };
                states[target as usize].fail = fail;
                let inherited = states[fail as usize].outputs.clone();
                states[target as usize].outputs.extend(inherited);
                queue.push_back(target);
            }
        }

        PhraseMatcher { alphabet, states, pattern_lens }
    }

    pub fn pattern_count(&self) -> usize {
        self.pattern_lens.len()
    }

    /// Every match of every pattern, ordered by end position.
    pub fn find_all<'a, I>(&self, terms: I) -> Vec<PhraseMatch>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut found = Vec::new();
        let mut state = ROOT;
        for (pos, term) in terms.into_iter().enumerate() {
            let Some(&symbol) = self.alphabet.get(term) else {
                state = ROOT;
                continue;
            };
            state = loop {
                if let Some(&n) = self.states[state as usize].next.get(&symbol) {
                    break n;
                }
                if state == ROOT {
                    break ROOT;
                }
                state = self.states[state as usize].fail;
            };
            for &p in &self.states[state as usize].outputs {
                let len = self.pattern_lens[p as usize];
                found.push(PhraseMatch { pattern: p as usize, start: pos + 1 - len, end: pos + 1 });
            }
        }
        found
    }
}
