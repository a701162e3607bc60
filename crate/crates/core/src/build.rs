//! Term construction helpers driven by the semantics: closed states
//! with a prescribed distribution, table-defined maps over a finite
//! type, and the combined test term behind n-ary measurement.

use crate::scalar::Scalar;
use crate::semantics::{enumerate_values, eval, Env, Value};
use crate::syntax::{Context, EnumTable, Name, Term, Type};
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BuildError {
    #[error("predicates do not form an n-test: at {value} the arms sum to {total}, not 1")]
    NotAnNTest { value: String, total: String },
    #[error("no closed term denotes a value of enum type {0}")]
    EnumHasNoIntroduction(String),
    #[error("weights must sum to 1, got {0}")]
    BadWeights(String),
}

/// A closed term denoting exactly the given value. Enum values have no
/// introduction form and are rejected.
pub fn value_term(v: &Value, ty: &Type) -> Result<Term, BuildError> {
    match (v, ty) {
        (Value::Star, Type::One) => Ok(Term::Star),
        (Value::Inl(inner), Type::Sum(l, r)) => {
            Ok(Term::inl(value_term(inner, l)?, (**r).clone()))
        }
        (Value::Inr(inner), Type::Sum(l, r)) => {
            Ok(Term::inr(value_term(inner, r)?, (**l).clone()))
        }
        (Value::Pair(a, b), Type::Tensor(l, r)) => {
            Ok(Term::pair(value_term(a, l)?, value_term(b, r)?))
        }
        (Value::Enum { enum_name, .. }, _) => {
            Err(BuildError::EnumHasNoIntroduction(enum_name.clone()))
        }
        (v, ty) => panic!("value {v} does not inhabit type {ty}"),
    }
}

/// A closed state over `ty` with the given weights (which must sum
/// to 1): a cascade of scalar conditionals over point states, with the
/// residual weights rescaled exactly at construction time.
pub fn closed_state(ty: &Type, weights: &[(Value, Scalar)]) -> Result<Term, BuildError> {
    let total = weights
        .iter()
        .fold(BigRational::zero(), |acc, (_, w)| acc + w.as_ratio());
    if !total.is_one() {
        return Err(BuildError::BadWeights(total.to_string()));
    }
    let points: Vec<(Term, Scalar)> = weights
        .iter()
        .filter(|(_, w)| !w.is_zero())
        .map(|(v, w)| Ok((value_term(v, ty)?, w.clone())))
        .collect::<Result<_, BuildError>>()?;
    Ok(mixture(points))
}

/// A probabilistic mixture of closed terms; weights must sum to 1 and
/// at least one must be positive.
pub fn mixture(mut points: Vec<(Term, Scalar)>) -> Term {
    assert!(!points.is_empty(), "mixture of nothing");
    let (first, w1) = points.remove(0);
    if points.is_empty() || w1.is_one() {
        return first;
    }
    if w1.is_zero() {
        return mixture(points);
    }
    let rest_mass = w1.ortho();
    let rescaled = points
        .into_iter()
        .map(|(t, w)| {
            let w = w.div(&rest_mass).expect("weights sum to at most 1");
            (t, w)
        })
        .collect();
    Term::case(
        Term::scalar(&w1),
        "_",
        first,
        "_",
        mixture(rescaled),
    )
}

/// A closed state of the n-element type with the given distribution.
pub fn closed_numeral_dist(weights: &[Scalar]) -> Term {
    let n = weights.len() as u64;
    assert!(n >= 1);
    let points = weights
        .iter()
        .enumerate()
        .map(|(i, w)| (Term::numeral(i as u64 + 1, n), w.clone()))
        .collect();
    mixture(points)
}

/// Builds `var : ty ⊢ term` by full case analysis on `ty`, delegating
/// each concrete value to `leaf`. Leaves must be closed terms of a
/// common type, `leaf_ty`. Components of enum type are opaque — no
/// term can inspect them — so all their rows must agree.
pub fn table_map(
    enums: &EnumTable,
    var: &Name,
    ty: &Type,
    leaf_ty: &Type,
    leaf: &mut dyn FnMut(&Value) -> Result<Term, BuildError>,
) -> Result<Term, BuildError> {
    let counter = std::cell::Cell::new(0u64);
    destruct(
        enums,
        Term::Var(var.clone()),
        ty,
        leaf_ty,
        &counter,
        &mut |v| leaf(v),
    )
}

fn destruct(
    enums: &EnumTable,
    cur: Term,
    ty: &Type,
    leaf_ty: &Type,
    counter: &std::cell::Cell<u64>,
    mk: &mut dyn FnMut(&Value) -> Result<Term, BuildError>,
) -> Result<Term, BuildError> {
    let fresh = |stem: &str| {
        let name = format!("{stem}{}", counter.get());
        counter.set(counter.get() + 1);
        name
    };
    match ty {
        Type::One => {
            // discarding `cur` is fine under the affine discipline
            mk(&Value::Star)
        }
        Type::Zero => Ok(Term::Magic(Box::new(cur), leaf_ty.clone())),
        Type::Const(name) => {
            // opaque component: verify the rows agree and emit any one
            let values = enumerate_values(enums, ty)
                .map_err(|_| BuildError::EnumHasNoIntroduction(name.clone()))?;
            let first = mk(&values[0])?;
            for v in &values[1..] {
                let other = mk(v)?;
                assert_eq!(
                    first, other,
                    "table over opaque enum {name} has value-dependent rows"
                );
            }
            Ok(first)
        }
        Type::Sum(l, r) => {
            let lv = fresh("q");
            let rv = fresh("q");
            let left = destruct(enums, Term::var(lv.clone()), l, leaf_ty, counter, &mut |v| {
                mk(&Value::inl(v.clone()))
            })?;
            let right = destruct(enums, Term::var(rv.clone()), r, leaf_ty, counter, &mut |v| {
                mk(&Value::inr(v.clone()))
            })?;
            Ok(Term::case(cur, lv, left, rv, right))
        }
        Type::Tensor(l, r) => {
            let lv = fresh("q");
            let rv = fresh("q");
            let body = destruct(enums, Term::var(lv.clone()), l, leaf_ty, counter, &mut |a| {
                let a = a.clone();
                destruct(enums, Term::var(rv.clone()), r, leaf_ty, counter, &mut |b| {
                    mk(&Value::pair(a.clone(), b.clone()))
                })
            })?;
            Ok(Term::let_pair(lv, rv, cur, body))
        }
    }
}

/// The probability that the predicate holds of the given point.
pub fn predicate_at(enums: &EnumTable, var: &Name, ty: &Type, pred: &Term, at: &Value) -> Scalar {
    let ctx = Context::singleton(var.clone(), ty.clone());
    let mut env = Env::new();
    env.insert(var.clone(), at.clone());
    eval(enums, &ctx, pred, &env).weight(&Value::top())
}

/// The combined n-valued test of an n-test `(p_1, ..., p_n)` over
/// `var : ty`: the unique map with `▷_i(t) = p_i`. Fails unless the
/// predicates sum to ⊤ at every point.
pub fn combined_test(
    enums: &EnumTable,
    var: &Name,
    ty: &Type,
    preds: &[Term],
) -> Result<Term, BuildError> {
    let n = preds.len();
    assert!(n >= 1);
    let leaf_ty = Type::nsum(n as u64);
    table_map(enums, var, ty, &leaf_ty, &mut |v| {
        let row: Vec<Scalar> = preds
            .iter()
            .map(|p| predicate_at(enums, var, ty, p, v))
            .collect();
        let total = row
            .iter()
            .fold(BigRational::zero(), |acc, w| acc + w.as_ratio());
        if !total.is_one() {
            return Err(BuildError::NotAnNTest {
                value: v.to_string(),
                total: total.to_string(),
            });
        }
        Ok(closed_numeral_dist(&row))
    })
}

/// `measure p_1 -> t_1 | ... | p_n -> t_n` over `var : ty`: case
/// analysis on the instrument of the combined test, rebinding `var`
/// in each arm.
pub fn measure(
    enums: &EnumTable,
    var: &Name,
    ty: &Type,
    arms: &[(Term, Term)],
) -> Result<Term, BuildError> {
    let preds: Vec<Term> = arms.iter().map(|(p, _)| p.clone()).collect();
    let test = combined_test(enums, var, ty, &preds)?;
    let instr = Term::instr(var.clone(), test, Term::Var(var.clone()));
    if arms.len() == 1 {
        // the 1-ary copower elimination is substitution
        return Ok(arms[0].1.substitute(var, &instr));
    }
    // peel the right-nested copower: each arm rebinds `var`
    fn build(var: &Name, scrut: Term, bodies: &[Term], level: usize) -> Term {
        if bodies.len() == 2 {
            Term::case(
                scrut,
                var.clone(),
                bodies[0].clone(),
                var.clone(),
                bodies[1].clone(),
            )
        } else {
            let rest_var = format!("m{level}");
            let rest = build(var, Term::var(rest_var.clone()), &bodies[1..], level + 1);
            Term::case(scrut, var.clone(), bodies[0].clone(), rest_var, rest)
        }
    }
    let bodies: Vec<Term> = arms.iter().map(|(_, b)| b.clone()).collect();
    Ok(build(var, instr, &bodies, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::eval_all;

    fn no_enums() -> EnumTable {
        EnumTable::new()
    }

    fn sc(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    #[test]
    fn closed_state_reproduces_weights() {
        let e = no_enums();
        let ty = Type::tensor(Type::two(), Type::two());
        let weights = vec![
            (Value::pair(Value::top(), Value::top()), sc("1/6")),
            (Value::pair(Value::top(), Value::bot()), sc("1/3")),
            (Value::pair(Value::bot(), Value::bot()), sc("1/2")),
        ];
        let t = closed_state(&ty, &weights).unwrap();
        let d = eval(&e, &Context::empty(), &t, &Env::new());
        for (v, w) in &weights {
            assert_eq!(d.weight(v), *w);
        }
        assert!(d.is_total());
    }

    #[test]
    fn closed_state_rejects_subnormal_weights() {
        let ty = Type::two();
        let weights = vec![(Value::top(), sc("1/3"))];
        assert!(matches!(
            closed_state(&ty, &weights),
            Err(BuildError::BadWeights(_))
        ));
    }

    #[test]
    fn combined_test_projections_recover_predicates() {
        let e = no_enums();
        let ty = Type::two();
        let var: Name = "x".into();
        // a 3-test on 2: (x & 1/2, x⊥, x & 1/2)
        let x = Term::var("x");
        let p1 = Term::seq_and("x", ty.clone(), x.clone(), Term::one_over(2));
        let p2 = Term::ortho(x.clone());
        let p3 = p1.clone();
        let test = combined_test(&e, &var, &ty, &[p1.clone(), p2.clone(), p3.clone()]).unwrap();
        let ctx = Context::singleton("x", ty.clone());
        for (i, p) in [p1, p2, p3].iter().enumerate() {
            let proj = Term::rhd(test.clone(), &[i as u64 + 1], 3, &Type::One);
            // ▷_i(test) = p_i as substates over 1
            let lhs = eval_all(&e, &ctx, &proj);
            let rhs = eval_all(&e, &ctx, p);
            assert_eq!(lhs, rhs, "projection {}", i + 1);
        }
    }

    #[test]
    fn combined_test_rejects_non_tests() {
        let e = no_enums();
        let ty = Type::two();
        let var: Name = "x".into();
        let err = combined_test(&e, &var, &ty, &[Term::one_over(2), Term::one_over(3)]);
        assert!(matches!(err, Err(BuildError::NotAnNTest { .. })));
    }

    #[test]
    fn measure_of_top_is_identity() {
        let e = no_enums();
        let ty = Type::two();
        let var: Name = "x".into();
        let m = measure(&e, &var, &ty, &[(Term::top(), Term::var("x"))]).unwrap();
        let ctx = Context::singleton("x", ty);
        assert_eq!(
            eval_all(&e, &ctx, &m),
            eval_all(&e, &ctx, &Term::var("x"))
        );
    }

    #[test]
    fn table_map_over_tensor_destructs_fully(){
        let e = no_enums();
        let ty = Type::tensor(Type::two(), Type::two());
        let var: Name = "v".into();
        // indicator of the diagonal
        let t = table_map(&e, &var, &ty, &Type::two(), &mut |v| {
            let hit = matches!(v, Value::Pair(a, b) if a == b);
            Ok(if hit { Term::top() } else { Term::bot() })
        })
        .unwrap();
        let ctx = Context::singleton("v", ty.clone());
        crate::typecheck::infer_type(&e, &ctx, &t).unwrap();
        for v in enumerate_values(&e, &ty).unwrap() {
            let got = predicate_at(&e, &var, &ty, &t, &v);
            let hit = matches!(&v, Value::Pair(a, b) if a == b);
            assert_eq!(got.is_one(), hit);
            assert_eq!(got.is_zero(), !hit);
        }
    }
}
