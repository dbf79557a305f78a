use super::ast::{Alphabet, Formula, Symbol};

/// Brute-force finite-trace satisfaction check: `true` iff `trace ⊨ f`.
///
/// Semantics at position `i` of a trace of length `n`:
/// atoms hold iff contained in the symbol; `X φ` requires position `i+1`
/// to exist; `F`/`G` quantify over `[i, n)`; `φ U ψ` requires `ψ` at some
/// `j ∈ [i, n)` with `φ` at every position before `j`. The empty trace
/// satisfies no formula. Atoms must come from `alphabet` (guaranteed for
/// parsed formulas).
///
/// This is the semantic oracle the DFA compiler is tested against; it must
/// stay independent of the compilation path.
pub fn eval_trace(f: &Formula, alphabet: &Alphabet, trace: &[Symbol]) -> bool {
    !trace.is_empty() && eval_at(f, alphabet, trace, 0)
}

fn eval_at(f: &Formula, alphabet: &Alphabet, trace: &[Symbol], i: usize) -> bool {
    match f {
        Formula::Atom(a) => {
            let idx = alphabet
                .index_of(a)
                .unwrap_or_else(|| panic!("atom `{a}` not in alphabet"));
            trace[i].contains(idx)
        }
        Formula::Not(x) => !eval_at(x, alphabet, trace, i),
        Formula::And(l, r) => eval_at(l, alphabet, trace, i) && eval_at(r, alphabet, trace, i),
        Formula::Or(l, r) => eval_at(l, alphabet, trace, i) || eval_at(r, alphabet, trace, i),
        Formula::Implies(l, r) => !eval_at(l, alphabet, trace, i) || eval_at(r, alphabet, trace, i),
        Formula::Next(x) => i + 1 < trace.len() && eval_at(x, alphabet, trace, i + 1),
        Formula::Always(x) => (i..trace.len()).all(|j| eval_at(x, alphabet, trace, j)),
        Formula::Eventually(x) => (i..trace.len()).any(|j| eval_at(x, alphabet, trace, j)),
        Formula::Until(l, r) => (i..trace.len()).any(|j| {
            eval_at(r, alphabet, trace, j) && (i..j).all(|k| eval_at(l, alphabet, trace, k))
        }),
    }
}
