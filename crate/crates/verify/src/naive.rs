//! Textbook recursive model checking over boolean matrices. Shares only the
//! formula type with the library evaluator.

use std::collections::HashMap;

use gecgraph::logic::{Formula, Term};
use gecgraph::rng::substream;
use gecgraph::VertexSet;
use rand::Rng;

pub type Order = dyn Fn([i64; 3], usize, usize, usize) -> bool;

pub struct NaiveStructure<'a> {
    pub n: usize,
    pub e: Vec<Vec<bool>>,
    pub b: Option<Vec<Vec<bool>>>,
    pub c: Option<&'a Order>,
    pub constants: HashMap<String, usize>,
}

impl<'a> NaiveStructure<'a> {
    pub fn from_rows(e: &[VertexSet]) -> Self {
        NaiveStructure {
            n: e.len(),
            e: matrix(e),
            b: None,
            c: None,
            constants: HashMap::new(),
        }
    }
}

pub fn matrix(rows: &[VertexSet]) -> Vec<Vec<bool>> {
    rows.iter()
        .map(|r| (0..rows.len()).map(|j| r.contains(j)).collect())
        .collect()
}

fn term(s: &NaiveStructure, t: &Term, env: &HashMap<String, usize>) -> Option<usize> {
    match t {
        Term::Var(v) => env.get(v).copied(),
        Term::Const(c) => s.constants.get(c).copied(),
    }
}

/// `None` when a variable or relation is missing.
pub fn eval(s: &NaiveStructure, f: &Formula, env: &mut HashMap<String, usize>) -> Option<bool> {
    Some(match f {
        Formula::E(a, b) => s.e[term(s, a, env)?][term(s, b, env)?],
        Formula::B(a, b) => s.b.as_ref()?[term(s, a, env)?][term(s, b, env)?],
        Formula::C(sh, [a, b, c]) => {
            (s.c?)(*sh, term(s, a, env)?, term(s, b, env)?, term(s, c, env)?)
        }
        Formula::Eq(a, b) => term(s, a, env)? == term(s, b, env)?,
        Formula::Not(g) => !eval(s, g, env)?,
        Formula::And(g, h) => eval(s, g, env)? && eval(s, h, env)?,
        Formula::Or(g, h) => eval(s, g, env)? || eval(s, h, env)?,
        Formula::Implies(g, h) => !eval(s, g, env)? || eval(s, h, env)?,
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let want = matches!(f, Formula::Exists(..));
            let saved = env.get(v).copied();
            let mut out = !want;
            for x in 0..s.n {
                env.insert(v.clone(), x);
                if eval(s, g, env)? == want {
                    out = want;
                    break;
                }
            }
            match saved {
                Some(x) => env.insert(v.clone(), x),
                None => env.remove(v),
            };
            out
        }
    })
}

pub const VARS: [&str; 4] = ["x", "y", "z", "u"];

fn var(rng: &mut impl Rng) -> Term {
    Term::Var(VARS[rng.random_range(0..VARS.len())].to_string())
}

fn random_atom(rng: &mut impl Rng) -> Formula {
    match rng.random_range(0..4) {
        0 => Formula::E(var(rng), var(rng)),
        1 => Formula::B(var(rng), var(rng)),
        2 => Formula::Eq(var(rng), var(rng)),
        _ => {
            let sh = [
                rng.random_range(-1..=1),
                rng.random_range(-1..=1),
                rng.random_range(-1..=1),
            ];
            Formula::C(sh, [var(rng), var(rng), var(rng)])
        }
    }
}

fn random_formula_rec(rng: &mut impl Rng, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.2) {
        return random_atom(rng);
    }
    match rng.random_range(0..6) {
        0 => Formula::Not(Box::new(random_formula_rec(rng, depth - 1))),
        1 => Formula::And(
            Box::new(random_formula_rec(rng, depth - 1)),
            Box::new(random_formula_rec(rng, depth - 1)),
        ),
        2 => Formula::Or(
            Box::new(random_formula_rec(rng, depth - 1)),
            Box::new(random_formula_rec(rng, depth - 1)),
        ),
        3 => Formula::Implies(
            Box::new(random_formula_rec(rng, depth - 1)),
            Box::new(random_formula_rec(rng, depth - 1)),
        ),
        4 => {
            let name = VARS[rng.random_range(0..VARS.len())].to_string();
            Formula::Exists(name, Box::new(random_formula_rec(rng, depth - 1)))
        }
        _ => {
            let name = VARS[rng.random_range(0..VARS.len())].to_string();
            Formula::Forall(name, Box::new(random_formula_rec(rng, depth - 1)))
        }
    }
}

/// Random formula over E, B, C[z,t,k] (shifts in [−1,1]) and = in the
/// variables x, y, z, u.
pub fn random_formula(seed: u64, depth: usize) -> Formula {
    let mut rng = substream(seed, 0x464f524d);
    random_formula_rec(&mut rng, depth)
}

/// Random symmetric irreflexive rows on n vertices with edge density p.
pub fn random_rows(n: usize, p: f64, rng: &mut impl Rng) -> Vec<VertexSet> {
    let mut rows = vec![VertexSet::new(n); n];
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                rows[a].insert(b);
                rows[b].insert(a);
            }
        }
    }
    rows
}
