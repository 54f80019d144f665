use std::fmt;

use super::{Formula, Term};

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const QUANT: u8 = 0;
const IFF: u8 = 1;
const IMP: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNARY: u8 = 5;

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Exists(..) | Formula::ForAll(..) => QUANT,
        Formula::Iff(..) => IFF,
        Formula::Implies(..) => IMP,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        _ => UNARY,
    }
}

fn write_prec(out: &mut fmt::Formatter<'_>, f: &Formula, min: u8) -> fmt::Result {
    let prec = precedence(f);
    if prec < min {
        out.write_str("(")?;
        write_prec(out, f, QUANT)?;
        return out.write_str(")");
    }
    let binary = |out: &mut fmt::Formatter<'_>, a, b, op: &str, lmin, rmin| {
        write_prec(out, a, lmin)?;
        write!(out, " {op} ")?;
        write_prec(out, b, rmin)
    };
    match f {
        Formula::True => out.write_str("true"),
        Formula::False => out.write_str("false"),
        Formula::Atom { relation, args } => {
            write!(out, "{relation}(")?;
            for (i, t) in args.iter().enumerate() {
                if i > 0 {
                    out.write_str(", ")?;
                }
                write!(out, "{t}")?;
            }
            out.write_str(")")
        }
        Formula::Eq(a, b) => write!(out, "{a} = {b}"),
        Formula::Not(g) => {
            out.write_str("!")?;
            write_prec(out, g, UNARY)
        }
        Formula::And(a, b) => binary(out, a, b, "&", AND, AND + 1),
        Formula::Or(a, b) => binary(out, a, b, "|", OR, OR + 1),
        Formula::Iff(a, b) => binary(out, a, b, "<->", IFF, IFF + 1),
        Formula::Implies(a, b) => binary(out, a, b, "->", IMP + 1, IMP),
        Formula::Exists(v, g) => {
            write!(out, "exists {v}. ")?;
            write_prec(out, g, QUANT)
        }
        Formula::ForAll(v, g) => {
            write!(out, "forall {v}. ")?;
            write_prec(out, g, QUANT)
        }
    }
}

/// Prints in the parser's concrete syntax with the fewest parentheses the
/// grammar allows, except that a quantifier nested under a connective is
/// always parenthesized.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(f, self, QUANT)
    }
}
