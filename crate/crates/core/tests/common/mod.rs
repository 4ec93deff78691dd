#![allow(dead_code)]

use condtab::Formula;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const ATOMS: [&str; 3] = ["p", "q", "r"];

/// Random formula of nesting depth at most `depth`. With `modal` false only
/// the Boolean connectives are used.
pub fn formula(rng: &mut ChaCha8Rng, depth: u32, atoms: usize, modal: bool) -> Formula {
    if depth == 0 || rng.gen_ratio(1, 4) {
        return match rng.gen_range(0..10) {
            0 => Formula::Top,
            1 => Formula::Bottom,
            _ => Formula::atom(ATOMS[rng.gen_range(0..atoms)]),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| formula(rng, depth - 1, atoms, modal);
    let kinds = if modal { 6 } else { 4 };
    match rng.gen_range(0..kinds) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::imp(sub(rng), sub(rng)),
        4 => Formula::nec(sub(rng), sub(rng)),
        _ => Formula::poss(sub(rng), sub(rng)),
    }
}

/// Truth-table value of a Boolean formula; `v` gives each atom's value.
pub fn truth(f: &Formula, v: &dyn Fn(&str) -> bool) -> bool {
    match f {
        Formula::Atom(a) => v(a),
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::Not(a) => !truth(a, v),
        Formula::And(a, b) => truth(a, v) && truth(b, v),
        Formula::Or(a, b) => truth(a, v) || truth(b, v),
        Formula::Imp(a, b) => !truth(a, v) || truth(b, v),
        Formula::Nec(..) | Formula::Poss(..) => panic!("not Boolean: {f}"),
    }
}

/// Tautology check by enumerating all valuations of `atoms`.
pub fn tautology(f: &Formula, atoms: &[&str]) -> bool {
    (0u32..1 << atoms.len()).all(|bits| {
        truth(f, &|a| {
            let k = atoms.iter().position(|x| *x == a).expect("known atom");
            bits & (1 << k) != 0
        })
    })
}
