//! Brute-force semantics shared by the integration tests.
#![allow(dead_code)]

use pfc_core::logic::{Formula, Term};
use pfc_core::structures::FiniteStructure;

/// Direct Tarski semantics over an explicit environment.
pub fn naive_eval(m: &FiniteStructure, phi: &Formula, env: &mut Vec<(String, usize)>) -> bool {
    fn term(m: &FiniteStructure, t: &Term, env: &[(String, usize)]) -> usize {
        match t {
            Term::Var(v) => env.iter().rev().find(|(n, _)| n == v).unwrap().1,
            Term::Const(c) => m.constant(c).unwrap(),
        }
    }
    match phi {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom { relation, args } => {
            let t: Vec<usize> = args.iter().map(|a| term(m, a, env)).collect();
            m.relation(relation).unwrap().tuples().any(|r| *r == t)
        }
        Formula::Eq(a, b) => term(m, a, env) == term(m, b, env),
        Formula::Not(g) => !naive_eval(m, g, env),
        Formula::And(a, b) => naive_eval(m, a, env) && naive_eval(m, b, env),
        Formula::Or(a, b) => naive_eval(m, a, env) || naive_eval(m, b, env),
        Formula::Implies(a, b) => !naive_eval(m, a, env) || naive_eval(m, b, env),
        Formula::Iff(a, b) => naive_eval(m, a, env) == naive_eval(m, b, env),
        Formula::Exists(v, g) | Formula::ForAll(v, g) => {
            let want = matches!(phi, Formula::Exists(..));
            let mut found = !want;
            for e in 0..m.size() {
                env.push((v.clone(), e));
                let r = naive_eval(m, g, env);
                env.pop();
                if r == want {
                    found = want;
                    break;
                }
            }
            found
        }
    }
}

pub fn naive_combined_count(m: &FiniteStructure, phi: &Formula, vars: &[String]) -> u64 {
    let k = vars.len();
    let total = m.size().pow(k as u32);
    let mut count = 0;
    for code in 0..total {
        let mut rest = code;
        let mut env: Vec<(String, usize)> = vars
            .iter()
            .map(|v| {
                let e = rest % m.size();
                rest /= m.size();
                (v.clone(), e)
            })
            .collect();
        if naive_eval(m, phi, &mut env) {
            count += 1;
        }
    }
    count
}
