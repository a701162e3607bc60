//! Concrete-syntax rendering of core terms.
//!
//! Every core form has a parseable rendering: annotated injections
//! print with partial type ascriptions (`(inl t : _ + B)`) whose holes
//! the elaborator fills back in, so `parse . print` round-trips up to
//! semantic equality.

use crate::syntax::{Term, Type};
use std::fmt;

// binding strength, loosest to tightest
const P_OVEE: u8 = 1;
const P_SEQ: u8 = 2;
const P_TENSOR: u8 = 3;
const P_PREFIX: u8 = 4;
const P_ATOM: u8 = 5;

fn write_term(t: &Term, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
    let open = |f: &mut fmt::Formatter<'_>, mine: u8| {
        if prec > mine {
            write!(f, "(")
        } else {
            Ok(())
        }
    };
    let close = |f: &mut fmt::Formatter<'_>, mine: u8| {
        if prec > mine {
            write!(f, ")")
        } else {
            Ok(())
        }
    };
    match t {
        Term::Var(x) => write!(f, "{x}"),
        Term::Star => write!(f, "*"),
        Term::OneOverN(n) => write!(f, "1/{n}"),
        Term::Pair(a, b) => {
            open(f, P_TENSOR)?;
            write_term(a, f, P_TENSOR + 1)?;
            write!(f, " (x) ")?;
            write_term(b, f, P_TENSOR)?;
            close(f, P_TENSOR)
        }
        Term::Ovee(a, b) => {
            open(f, P_OVEE)?;
            write_term(a, f, P_OVEE)?;
            write!(f, " (+) ")?;
            write_term(b, f, P_OVEE + 1)?;
            close(f, P_OVEE)
        }
        Term::LetPair { fst, snd, pair, body } => {
            open(f, P_OVEE)?;
            write!(f, "let {fst} (x) {snd} = ")?;
            write_term(pair, f, P_OVEE)?;
            write!(f, " in ")?;
            write_term(body, f, P_OVEE)?;
            close(f, P_OVEE)
        }
        Term::Magic(a, ty) => {
            write!(f, "(magic ")?;
            write_term(a, f, P_PREFIX + 1)?;
            write!(f, " : {ty})")
        }
        Term::Inr(a, left) if **a == Term::Star => {
            write!(f, "(fail : {})", Type::sum(left.clone(), Type::One))
        }
        Term::Inl(a, right) => {
            write!(f, "(inl ")?;
            write_term(a, f, P_PREFIX + 1)?;
            write!(f, " : _ + {right})")
        }
        Term::Inr(a, left) => {
            write!(f, "(inr ")?;
            write_term(a, f, P_PREFIX + 1)?;
            write!(f, " : {left} + _)")
        }
        Term::Case {
            scrut,
            left,
            left_body,
            right,
            right_body,
        } => {
            open(f, P_OVEE)?;
            write!(f, "case ")?;
            write_term(scrut, f, P_OVEE)?;
            write!(f, " of inl {left} -> ")?;
            write_term(left_body, f, P_OVEE + 1)?;
            write!(f, " | inr {right} -> ")?;
            write_term(right_body, f, P_OVEE + 1)?;
            close(f, P_OVEE)
        }
        Term::Inlr(a, b) => {
            write!(f, "inlr(")?;
            write_term(a, f, 0)?;
            write!(f, ", ")?;
            write_term(b, f, 0)?;
            write!(f, ")")
        }
        Term::Lft(a) => {
            open(f, P_PREFIX)?;
            write!(f, "lft ")?;
            write_term(a, f, P_PREFIX + 1)?;
            close(f, P_PREFIX)
        }
        Term::Norm(a) => {
            open(f, P_PREFIX)?;
            write!(f, "norm ")?;
            write_term(a, f, P_PREFIX + 1)?;
            close(f, P_PREFIX)
        }
        Term::Instr { var, test, arg } => {
            write!(f, "instr[{var} -> ")?;
            write_term(test, f, 0)?;
            write!(f, "](")?;
            write_term(arg, f, 0)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(self, f, 0)
    }
}

#[allow(dead_code)]
fn _prec_bounds() {
    // keep the constants tied together if levels are ever added
    let _ = [P_OVEE, P_SEQ, P_TENSOR, P_PREFIX, P_ATOM];
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    #[test]
    fn literal_sums_are_preserved() {
        let t = Term::ovee(Term::one_over(3), Term::one_over(3));
        assert_eq!(t.to_string(), "1/3 (+) 1/3");
    }

    #[test]
    fn fail_prints_with_its_type() {
        assert_eq!(Term::fail(Type::two()).to_string(), "(fail : 2 + 1)");
        assert_eq!(Term::bot().to_string(), "(fail : 2)");
    }

    #[test]
    fn nested_forms() {
        let t = Term::case(
            Term::var("r"),
            "x",
            Term::ret(Term::var("x")),
            "_",
            Term::fail(Type::two()),
        );
        assert_eq!(
            t.to_string(),
            "case r of inl x -> (inl x : _ + 1) | inr _ -> (fail : 2 + 1)"
        );
        let q: Scalar = "1/2".parse().unwrap();
        assert_eq!(Term::scalar(&q).to_string(), "1/2");
    }
}
