use std::collections::HashMap;

use super::ast::{Alphabet, Formula, Symbol};
use super::LtlfError;
use crate::automaton::Dfa;

/// Default bound on intermediate automaton size.
pub const DEFAULT_STATE_CAP: usize = 10_000;

/// Compiles a formula into a minimal, complete DFA over `2^AP` whose
/// language is exactly the set of traces satisfying it.
pub fn compile_dfa(f: &Formula, alphabet: &Alphabet) -> Result<Dfa, LtlfError> {
    compile_dfa_with_cap(f, alphabet, DEFAULT_STATE_CAP)
}

/// As [`compile_dfa`], with an explicit state cap for the intermediate
/// automaton. Exceeding the cap is an error, never a silent truncation.
///
/// Construction: the formula is normalized, then progressed over each
/// symbol — the successor of a state is the obligation that remains after
/// consuming that symbol — memoizing normalized formulas as states. A
/// state accepts iff its obligation is discharged when the trace ends
/// there. The initial state is kept distinct so the empty trace is never
/// accepted, and the result is Hopcroft-minimized and renumbered
/// breadth-first for stable output.
pub fn compile_dfa_with_cap(
    f: &Formula,
    alphabet: &Alphabet,
    cap: usize,
) -> Result<Dfa, LtlfError> {
    let phi0 = norm(f, alphabet)?;
    let symbol_count = alphabet.symbol_count();

    // State 0 is the initial state; it shares phi0's transitions but is
    // never accepting (the empty trace satisfies no formula).
    let mut formulas: Vec<Norm> = vec![phi0.clone()];
    let mut index: HashMap<Norm, usize> = HashMap::new();
    let mut transitions: Vec<Vec<usize>> = Vec::new();
    let mut work = 0usize;

    while work < formulas.len() {
        let current = formulas[work].clone();
        let mut row = Vec::with_capacity(symbol_count);
        for sym in 0..symbol_count {
            let succ = progress(&current, Symbol(sym as u16));
            let id = match index.get(&succ) {
                Some(&id) => id,
                None => {
                    let id = formulas.len();
                    if id >= cap {
                        return Err(LtlfError::StateCap { cap });
                    }
                    index.insert(succ.clone(), id);
                    formulas.push(succ);
                    id
                }
            };
            row.push(id);
        }
        transitions.push(row);
        work += 1;
    }

    let accepting: Vec<bool> = formulas
        .iter()
        .enumerate()
        .map(|(i, f)| i != 0 && holds_at_end(f))
        .collect();

    let dfa = Dfa::new(alphabet.clone(), 0, accepting, transitions);
    Ok(dfa.minimized())
}

/// Canonically normalized formula used for progression-state memoization:
/// conjunctions and disjunctions are flattened, sorted and deduplicated,
/// double negation is eliminated, and boolean constants are folded.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Norm {
    True,
    False,
    Atom(u16),
    Not(Box<Norm>),
    Next(Box<Norm>),
    Always(Box<Norm>),
    Eventually(Box<Norm>),
    Until(Box<Norm>, Box<Norm>),
    And(Vec<Norm>),
    Or(Vec<Norm>),
}

fn norm(f: &Formula, alphabet: &Alphabet) -> Result<Norm, LtlfError> {
    Ok(match f {
        Formula::Atom(a) => {
            let i = alphabet.index_of(a).ok_or_else(|| LtlfError::UnknownAtom {
                name: a.clone(),
                position: 0,
            })?;
            Norm::Atom(i as u16)
        }
        Formula::Not(x) => mk_not(norm(x, alphabet)?),
        Formula::And(l, r) => mk_and(vec![norm(l, alphabet)?, norm(r, alphabet)?]),
        Formula::Or(l, r) => mk_or(vec![norm(l, alphabet)?, norm(r, alphabet)?]),
        Formula::Implies(l, r) => mk_or(vec![mk_not(norm(l, alphabet)?), norm(r, alphabet)?]),
        Formula::Next(x) => mk_next(norm(x, alphabet)?),
        Formula::Always(x) => mk_always(norm(x, alphabet)?),
        Formula::Eventually(x) => mk_eventually(norm(x, alphabet)?),
        Formula::Until(l, r) => mk_until(norm(l, alphabet)?, norm(r, alphabet)?),
    })
}

fn mk_not(x: Norm) -> Norm {
    match x {
        Norm::True => Norm::False,
        Norm::False => Norm::True,
        Norm::Not(inner) => *inner,
        Norm::And(xs) => mk_or(xs.into_iter().map(mk_not).collect()),
        Norm::Or(xs) => mk_and(xs.into_iter().map(mk_not).collect()),
        other => Norm::Not(Box::new(other)),
    }
}

fn mk_and(xs: Vec<Norm>) -> Norm {
    let mut flat = Vec::new();
    for x in xs {
        match x {
            Norm::True => {}
            Norm::False => return Norm::False,
            Norm::And(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    flat.sort();
    flat.dedup();
    for x in &flat {
        if let Norm::Not(inner) = x {
            if flat.binary_search(inner).is_ok() {
                return Norm::False;
            }
        }
    }
    match flat.len() {
        0 => Norm::True,
        1 => flat.pop().expect("len checked"),
        _ => Norm::And(flat),
    }
}

fn mk_or(xs: Vec<Norm>) -> Norm {
    let mut flat = Vec::new();
    for x in xs {
        match x {
            Norm::False => {}
            Norm::True => return Norm::True,
            Norm::Or(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    flat.sort();
    flat.dedup();
    for x in &flat {
        if let Norm::Not(inner) = x {
            if flat.binary_search(inner).is_ok() {
                return Norm::True;
            }
        }
    }
    match flat.len() {
        0 => Norm::False,
        1 => flat.pop().expect("len checked"),
        _ => Norm::Or(flat),
    }
}

fn mk_next(x: Norm) -> Norm {
    match x {
        // No next position can discharge an impossible obligation.
        Norm::False => Norm::False,
        other => Norm::Next(Box::new(other)),
    }
}

fn mk_always(x: Norm) -> Norm {
    match x {
        Norm::True => Norm::True,
        Norm::Always(_) => x,
        other => Norm::Always(Box::new(other)),
    }
}

fn mk_eventually(x: Norm) -> Norm {
    match x {
        Norm::False => Norm::False,
        Norm::Eventually(_) => x,
        other => Norm::Eventually(Box::new(other)),
    }
}

fn mk_until(l: Norm, r: Norm) -> Norm {
    match (&l, &r) {
        (_, Norm::False) => Norm::False,
        // `false U r` collapses to "r holds now".
        (Norm::False, _) => r,
        (Norm::True, _) => mk_eventually(r),
        _ => Norm::Until(Box::new(l), Box::new(r)),
    }
}

/// One-step progression: the obligation on the remaining suffix after the
/// current position carries `sym`. `X φ` additionally requires the suffix
/// to be nonempty, which `F true` expresses exactly.
fn progress(f: &Norm, sym: Symbol) -> Norm {
    match f {
        Norm::True => Norm::True,
        Norm::False => Norm::False,
        Norm::Atom(i) => {
            if sym.contains(*i as usize) {
                Norm::True
            } else {
                Norm::False
            }
        }
        Norm::Not(x) => mk_not(progress(x, sym)),
        Norm::And(xs) => mk_and(xs.iter().map(|x| progress(x, sym)).collect()),
        Norm::Or(xs) => mk_or(xs.iter().map(|x| progress(x, sym)).collect()),
        Norm::Next(x) => mk_and(vec![(**x).clone(), mk_eventually(Norm::True)]),
        Norm::Always(x) => mk_and(vec![progress(x, sym), f.clone()]),
        Norm::Eventually(x) => mk_or(vec![progress(x, sym), f.clone()]),
        Norm::Until(l, r) => mk_or(vec![
            progress(r, sym),
            mk_and(vec![progress(l, sym), f.clone()]),
        ]),
    }
}

/// Whether the obligation is discharged if the trace ends in this state:
/// `G` is vacuously satisfied over the empty suffix, everything that
/// demands a position (`X`, `F`, `U`, atoms) is not.
fn holds_at_end(f: &Norm) -> bool {
    match f {
        Norm::True => true,
        Norm::False | Norm::Atom(_) | Norm::Next(_) | Norm::Eventually(_) | Norm::Until(_, _) => {
            false
        }
        Norm::Not(x) => !holds_at_end(x),
        Norm::Always(_) => true,
        Norm::And(xs) => xs.iter().all(holds_at_end),
        Norm::Or(xs) => xs.iter().any(holds_at_end),
    }
}
