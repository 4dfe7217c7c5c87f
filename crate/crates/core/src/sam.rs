//! Suffix automaton and the incremental match-length scanner built on it.
//!
//! The scanner computes, for every position `i` of a symbol sequence, the
//! length of the longest prefix of the suffix starting at `i` that occurs
//! as a contiguous substring entirely inside the first `i - 1` positions.
//! It grows the automaton one symbol at a time, so at the moment position
//! `i` is examined the automaton accepts exactly the substrings of
//! `s[0..i]` — occurrences that would spill past position `i - 1` are
//! never admitted.
//!
//! Total work is O(n · Ω): a matched prefix carries over from one
//! position to the next minus its leading symbol, so extension steps are
//! amortized across the whole scan even on highly repetitive input.

const NO_TRANSITION: u32 = u32::MAX;

/// Online suffix automaton over the alphabet `{1..Ω}`.
///
/// Transition tables are flat `state * omega + (symbol - 1)` slots, which
/// keeps the walk branch-free for the small alphabets this crate uses.
pub(crate) struct SuffixAutomaton {
    omega: usize,
    len: Vec<u32>,
    link: Vec<i32>,
    next: Vec<u32>,
    last: u32,
}

impl SuffixAutomaton {
    pub(crate) fn new(omega: usize) -> Self {
        let mut sam = SuffixAutomaton {
            omega,
            len: Vec::new(),
            link: Vec::new(),
            next: Vec::new(),
            last: 0,
        };
        sam.reset(omega);
        sam
    }

    /// Clears the automaton back to the empty string, keeping allocations.
    pub(crate) fn reset(&mut self, omega: usize) {
        self.omega = omega;
        self.len.clear();
        self.link.clear();
        self.next.clear();
        self.len.push(0);
        self.link.push(-1);
        self.next.resize(omega, NO_TRANSITION);
        self.last = 0;
    }

    #[inline]
    pub(crate) fn transition(&self, state: u32, symbol: u32) -> u32 {
        self.next[state as usize * self.omega + (symbol as usize - 1)]
    }

    #[inline]
    fn set_transition(&mut self, state: u32, symbol: u32, to: u32) {
        self.next[state as usize * self.omega + (symbol as usize - 1)] = to;
    }

    #[inline]
    pub(crate) fn len_of(&self, state: u32) -> u32 {
        self.len[state as usize]
    }

    #[inline]
    pub(crate) fn link_of(&self, state: u32) -> i32 {
        self.link[state as usize]
    }

    fn push_state(&mut self, len: u32, link: i32) -> u32 {
        let id = self.len.len() as u32;
        self.len.push(len);
        self.link.push(link);
        self.next.resize(self.next.len() + self.omega, NO_TRANSITION);
        id
    }

    fn clone_state(&mut self, src: u32, len: u32) -> u32 {
        let id = self.len.len() as u32;
        self.len.push(len);
        self.link.push(self.link[src as usize]);
        let from = src as usize * self.omega;
        for k in 0..self.omega {
            let t = self.next[from + k];
            self.next.push(t);
        }
        id
    }

    /// Appends one symbol (in `1..=omega`) to the represented string.
    pub(crate) fn extend(&mut self, symbol: u32) {
        let cur = self.push_state(self.len[self.last as usize] + 1, -1);
        let mut p = self.last as i32;
        while p >= 0 && self.transition(p as u32, symbol) == NO_TRANSITION {
            self.set_transition(p as u32, symbol, cur);
            p = self.link[p as usize];
        }
        if p < 0 {
            self.link[cur as usize] = 0;
        } else {
            let q = self.transition(p as u32, symbol);
            if self.len[q as usize] == self.len[p as usize] + 1 {
                self.link[cur as usize] = q as i32;
            } else {
                let clone = self.clone_state(q, self.len[p as usize] + 1);
                self.link[q as usize] = clone as i32;
                self.link[cur as usize] = clone as i32;
                let mut p2 = p;
                while p2 >= 0 && self.transition(p2 as u32, symbol) == q {
                    self.set_transition(p2 as u32, symbol, clone);
                    p2 = self.link[p2 as usize];
                }
            }
        }
        self.last = cur;
    }
}

/// Reusable scanner; keeps the automaton buffers alive across calls so the
/// backtest hot loop does not reallocate per candidate window.
pub(crate) struct MatchLengthScanner {
    sam: SuffixAutomaton,
}

impl MatchLengthScanner {
    pub(crate) fn new() -> Self {
        MatchLengthScanner {
            sam: SuffixAutomaton::new(2),
        }
    }

    /// Match lengths `L_i` for `base` optionally extended by one trailing
    /// symbol. `out`, when given, receives one entry per position.
    /// Returns the sum of `L_i + 1` over all positions.
    pub(crate) fn scan(
        &mut self,
        base: &[u32],
        extra: Option<u32>,
        omega: u32,
        mut out: Option<&mut Vec<u32>>,
    ) -> u64 {
        let n = base.len() + usize::from(extra.is_some());
        let sym = |j: usize| -> u32 {
            if j < base.len() {
                base[j]
            } else {
                extra.unwrap()
            }
        };

        self.sam.reset(omega as usize);
        if let Some(v) = out.as_deref_mut() {
            v.clear();
            v.reserve(n);
        }

        let mut lambda_sum = 0u64;
        let mut state = 0u32;
        let mut matched = 0usize;

        for i in 0..n {
            // Longest prefix of s[i..] present in the automaton (= substring
            // of s[0..i]); the carried-over match from position i-1 is a
            // valid starting point, so only extension steps remain.
            while i + matched < n {
                let t = self.sam.transition(state, sym(i + matched));
                if t == NO_TRANSITION {
                    break;
                }
                state = t;
                matched += 1;
            }

            lambda_sum += matched as u64 + 1;
            if let Some(v) = out.as_deref_mut() {
                v.push(matched as u32 + 1);
            }

            self.sam.extend(sym(i));

            // Drop the leading symbol of the match and re-canonicalize the
            // (state, length) pair. The walk up suffix links also repairs
            // the pair when the extension above cloned our state.
            matched = matched.saturating_sub(1);
            loop {
                let link = self.sam.link_of(state);
                if link < 0 || (self.sam.len_of(link as u32) as usize) < matched {
                    break;
                }
                state = link as u32;
            }
        }

        lambda_sum
    }
}
