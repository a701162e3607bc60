//! Exact discrete semantics: types denote finite sets, terms denote
//! functions from environments to finite-support distributions.
//!
//! Evaluation is structural recursion producing whole distributions —
//! never sampling — so every probability is an exact rational and
//! semantic judgements are decidable by enumeration.

use crate::scalar::Scalar;
use crate::syntax::{is_vacuous, Context, EnumTable, Name, Term, Type};
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValueError {
    #[error("unknown enum type {0}")]
    UnknownEnum(String),
}

/// A semantic value. Each value is classified by exactly one type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Star,
    Enum {
        enum_name: String,
        ctor: String,
        index: usize,
    },
    Inl(Box<Value>),
    Inr(Box<Value>),
    Pair(Box<Value>, Box<Value>),
}

impl Value {
    pub fn inl(v: Value) -> Value {
        Value::Inl(Box::new(v))
    }

    pub fn inr(v: Value) -> Value {
        Value::Inr(Box::new(v))
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    /// `⊤ = inl *` as a value of type `2`.
    pub fn top() -> Value {
        Value::inl(Value::Star)
    }

    pub fn bot() -> Value {
        Value::inr(Value::Star)
    }

    /// The value `in_i^n(v)` in the right-nested copower `n·A`.
    pub fn inject(i: u64, n: u64, v: Value) -> Value {
        assert!(1 <= i && i <= n);
        if n == 1 {
            v
        } else if i == 1 {
            Value::inl(v)
        } else {
            Value::inr(Value::inject(i - 1, n - 1, v))
        }
    }

    /// Reads a value of `n·A` back as `(i, inner)`.
    pub fn project(&self, n: u64) -> (u64, &Value) {
        if n == 1 {
            return (1, self);
        }
        match self {
            Value::Inl(v) => (1, v),
            Value::Inr(v) => {
                let (i, inner) = v.project(n - 1);
                (i + 1, inner)
            }
            other => panic!("value {other} does not inhabit a {n}-fold copower"),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Star => 0,
            Value::Enum { .. } => 1,
            Value::Inl(_) => 2,
            Value::Inr(_) => 3,
            Value::Pair(..) => 4,
        }
    }
}

// Canonical ordering: left before right in sums, lexicographic in
// pairs, declaration order in enums.
impl Ord for Value {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use Value::*;
        match (self, other) {
            (Star, Star) => std::cmp::Ordering::Equal,
            (
                Enum {
                    enum_name: e1,
                    index: i1,
                    ..
                },
                Enum {
                    enum_name: e2,
                    index: i2,
                    ..
                },
            ) => e1.cmp(e2).then(i1.cmp(i2)),
            (Inl(a), Inl(b)) | (Inr(a), Inr(b)) => a.cmp(b),
            (Pair(a, b), Pair(c, d)) => a.cmp(c).then_with(|| b.cmp(d)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atom(v: &Value) -> bool {
            matches!(v, Value::Star | Value::Enum { .. })
        }
        fn go(v: &Value, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
            match v {
                Value::Star => write!(f, "*"),
                Value::Enum { ctor, .. } => write!(f, "{ctor}"),
                Value::Inl(inner) | Value::Inr(inner) => {
                    let tag = if matches!(v, Value::Inl(_)) { "inl" } else { "inr" };
                    if nested {
                        write!(f, "(")?;
                    }
                    write!(f, "{tag} ")?;
                    go(inner, f, true)?;
                    if nested {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                Value::Pair(a, b) => {
                    if nested {
                        write!(f, "(")?;
                    }
                    go(a, f, !atom(a))?;
                    write!(f, " (x) ")?;
                    go(b, f, !atom(b))?;
                    if nested {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, f, false)
    }
}

/// Complete, duplicate-free enumeration of a type's denotation in
/// canonical order.
pub fn enumerate_values(enums: &EnumTable, ty: &Type) -> Result<Vec<Value>, ValueError> {
    match ty {
        Type::Const(name) => {
            let ctors = enums
                .get(name)
                .ok_or_else(|| ValueError::UnknownEnum(name.clone()))?;
            Ok(ctors
                .iter()
                .enumerate()
                .map(|(index, ctor)| Value::Enum {
                    enum_name: name.clone(),
                    ctor: ctor.clone(),
                    index,
                })
                .collect())
        }
        Type::Zero => Ok(vec![]),
        Type::One => Ok(vec![Value::Star]),
        Type::Sum(l, r) => {
            let mut out: Vec<Value> = enumerate_values(enums, l)?
                .into_iter()
                .map(Value::inl)
                .collect();
            out.extend(enumerate_values(enums, r)?.into_iter().map(Value::inr));
            Ok(out)
        }
        Type::Tensor(l, r) => {
            let left = enumerate_values(enums, l)?;
            let right = enumerate_values(enums, r)?;
            let mut out = Vec::with_capacity(left.len() * right.len());
            for a in &left {
                for b in &right {
                    out.push(Value::pair(a.clone(), b.clone()));
                }
            }
            Ok(out)
        }
    }
}

/// An environment: one value per context variable.
pub type Env = BTreeMap<Name, Value>;

pub fn env_bind(env: &Env, name: &str, v: Value) -> Env {
    let mut env = env.clone();
    if !is_vacuous(name) {
        env.insert(name.to_string(), v);
    }
    env
}

pub fn display_env(env: &Env) -> String {
    if env.is_empty() {
        return "∅".into();
    }
    env.iter()
        .map(|(k, v)| format!("{k} = {v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// All environments covering a context, in canonical order
/// (cartesian enumeration, first variable outermost).
pub fn environments(enums: &EnumTable, ctx: &Context) -> Result<Vec<Env>, ValueError> {
    let mut envs = vec![Env::new()];
    for (name, ty) in ctx.iter() {
        let values = enumerate_values(enums, ty)?;
        let mut next = Vec::with_capacity(envs.len() * values.len());
        for env in &envs {
            for v in &values {
                next.push(env_bind(env, name, v.clone()));
            }
        }
        envs = next;
    }
    Ok(envs)
}

/// A finite-support distribution over the values of `carrier`.
/// Weights are strictly positive and sum to 1 for the distributions
/// produced by `eval`; subdistribution views live in `inference`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dist {
    carrier: Type,
    weights: BTreeMap<Value, Scalar>,
}

impl Dist {
    pub fn from_weights(carrier: Type, weights: BTreeMap<Value, Scalar>) -> Dist {
        let weights = weights.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        Dist { carrier, weights }
    }

    pub fn dirac(carrier: Type, v: Value) -> Dist {
        Dist {
            carrier,
            weights: BTreeMap::from([(v, Scalar::one())]),
        }
    }

    pub fn carrier(&self) -> &Type {
        &self.carrier
    }

    pub fn weight(&self, v: &Value) -> Scalar {
        self.weights.get(v).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (&Value, &Scalar)> {
        self.weights.iter()
    }

    pub fn mass(&self) -> Scalar {
        let total = self
            .weights
            .values()
            .fold(BigRational::zero(), |acc, w| acc + w.as_ratio());
        Scalar::from_ratio(total).expect("total mass exceeds 1")
    }

    pub fn is_total(&self) -> bool {
        self.mass().is_one()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for (v, w) in &self.weights {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{v} ↦ {w}")?;
            first = false;
        }
        write!(f, "}}")
    }
}

/// Accumulates weights exactly before the `[0, 1]` invariant is
/// re-imposed.
pub(crate) struct WeightedSum {
    carrier: Type,
    acc: BTreeMap<Value, BigRational>,
}

impl WeightedSum {
    pub fn new(carrier: Type) -> Self {
        WeightedSum {
            carrier,
            acc: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, v: Value, w: BigRational) {
        if w.is_zero() {
            return;
        }
        *self.acc.entry(v).or_insert_with(BigRational::zero) += w;
    }

    pub fn add_scaled(&mut self, d: &Dist, factor: &BigRational) {
        for (v, w) in d.support() {
            self.add(v.clone(), w.as_ratio() * factor);
        }
    }

    pub fn into_dist(self) -> Dist {
        let weights = self
            .acc
            .into_iter()
            .filter(|(_, w)| !w.is_zero())
            .map(|(v, w)| {
                let s = Scalar::from_ratio(w).expect("weight outside [0, 1]");
                (v, s)
            })
            .collect();
        Dist {
            carrier: self.carrier,
            weights,
        }
    }
}

/// Evaluates a well-typed term to its exact output distribution.
///
/// Well-typedness of `t` in `ctx` is a caller guarantee (the type
/// checker is the gate for user programs); violations panic.
pub fn eval(enums: &EnumTable, ctx: &Context, t: &Term, env: &Env) -> Dist {
    match t {
        Term::Var(x) => {
            let ty = ctx
                .lookup(x)
                .unwrap_or_else(|| panic!("unbound variable {x} during evaluation"));
            let v = env
                .get(x)
                .unwrap_or_else(|| panic!("environment does not cover {x}"));
            Dist::dirac(ty.clone(), v.clone())
        }
        Term::Star => Dist::dirac(Type::One, Value::Star),
        Term::Pair(s, u) => {
            let ds = eval(enums, ctx, s, env);
            let du = eval(enums, ctx, u, env);
            let carrier = Type::tensor(ds.carrier().clone(), du.carrier().clone());
            let mut out = WeightedSum::new(carrier);
            for (a, p) in ds.support() {
                for (b, q) in du.support() {
                    out.add(
                        Value::pair(a.clone(), b.clone()),
                        p.as_ratio() * q.as_ratio(),
                    );
                }
            }
            out.into_dist()
        }
        Term::LetPair { fst, snd, pair, body } => {
            let dp = eval(enums, ctx, pair, env);
            let (lt, rt) = match dp.carrier() {
                Type::Tensor(l, r) => ((**l).clone(), (**r).clone()),
                other => panic!("let-pair scrutinee has non-tensor type {other}"),
            };
            let body_ctx = ctx.bind(fst, lt).bind(snd, rt);
            let mut out: Option<WeightedSum> = None;
            for (v, w) in dp.support() {
                let (a, b) = match v {
                    Value::Pair(a, b) => (a, b),
                    other => panic!("non-pair value {other} in tensor distribution"),
                };
                let env = env_bind(&env_bind(env, fst, (**a).clone()), snd, (**b).clone());
                let d = eval(enums, &body_ctx, body, &env);
                let out = out.get_or_insert_with(|| WeightedSum::new(d.carrier().clone()));
                out.add_scaled(&d, w.as_ratio());
            }
            out.expect("let-pair scrutinee has empty support").into_dist()
        }
        Term::Magic(_, target) => {
            // the argument's type is empty, so no environment reaches here
            Dist::from_weights(target.clone(), BTreeMap::new())
        }
        Term::Inl(s, right) => {
            let d = eval(enums, ctx, s, env);
            let carrier = Type::sum(d.carrier().clone(), right.clone());
            let mut out = WeightedSum::new(carrier);
            for (v, w) in d.support() {
                out.add(Value::inl(v.clone()), w.as_ratio().clone());
            }
            out.into_dist()
        }
        Term::Inr(s, left) => {
            let d = eval(enums, ctx, s, env);
            let carrier = Type::sum(left.clone(), d.carrier().clone());
            let mut out = WeightedSum::new(carrier);
            for (v, w) in d.support() {
                out.add(Value::inr(v.clone()), w.as_ratio().clone());
            }
            out.into_dist()
        }
        Term::Case {
            scrut,
            left,
            left_body,
            right,
            right_body,
        } => {
            let dr = eval(enums, ctx, scrut, env);
            let (lt, rt) = match dr.carrier() {
                Type::Sum(l, r) => ((**l).clone(), (**r).clone()),
                other => panic!("case scrutinee has non-sum type {other}"),
            };
            let mut out: Option<WeightedSum> = None;
            for (v, w) in dr.support() {
                let d = match v {
                    Value::Inl(a) => {
                        let env = env_bind(env, left, (**a).clone());
                        eval(enums, &ctx.bind(left, lt.clone()), left_body, &env)
                    }
                    Value::Inr(b) => {
                        let env = env_bind(env, right, (**b).clone());
                        eval(enums, &ctx.bind(right, rt.clone()), right_body, &env)
                    }
                    other => panic!("non-sum value {other} in case scrutinee"),
                };
                let out = out.get_or_insert_with(|| WeightedSum::new(d.carrier().clone()));
                out.add_scaled(&d, w.as_ratio());
            }
            out.expect("case scrutinee has empty support").into_dist()
        }
        Term::Inlr(s, u) => {
            let ds = eval(enums, ctx, s, env);
            let du = eval(enums, ctx, u, env);
            let a = ds
                .carrier()
                .as_partial()
                .unwrap_or_else(|| panic!("inlr left operand is not a partial type"))
                .clone();
            let b = du
                .carrier()
                .as_partial()
                .unwrap_or_else(|| panic!("inlr right operand is not a partial type"))
                .clone();
            let mut out = WeightedSum::new(Type::sum(a, b));
            for (v, w) in ds.support() {
                if let Value::Inl(inner) = v {
                    out.add(Value::inl((**inner).clone()), w.as_ratio().clone());
                }
            }
            for (v, w) in du.support() {
                if let Value::Inl(inner) = v {
                    out.add(Value::inr((**inner).clone()), w.as_ratio().clone());
                }
            }
            out.into_dist()
        }
        Term::Lft(s) => {
            let d = eval(enums, ctx, s, env);
            let a = match d.carrier() {
                Type::Sum(l, _) => (**l).clone(),
                other => panic!("lft operand has non-sum type {other}"),
            };
            let mut out = WeightedSum::new(a);
            for (v, w) in d.support() {
                match v {
                    Value::Inl(inner) => out.add((**inner).clone(), w.as_ratio().clone()),
                    _ => panic!("lft applied to a term with mass outside inl"),
                }
            }
            out.into_dist()
        }
        Term::Instr { var, test, arg } => {
            let da = eval(enums, ctx, arg, env);
            let base = da.carrier().clone();
            let test_ctx = Context::singleton(var.clone(), base.clone());
            let mut out: Option<WeightedSum> = None;
            for (a, p) in da.support() {
                let test_env = env_bind(&Env::new(), var, a.clone());
                let dt = eval(enums, &test_ctx, test, &test_env);
                let n = dt
                    .carrier()
                    .as_nsum()
                    .unwrap_or_else(|| panic!("instrument test type {} is not an n-fold unit sum", dt.carrier()));
                let out = out.get_or_insert_with(|| WeightedSum::new(Type::copower(n, &base)));
                for (iv, q) in dt.support() {
                    let (i, _) = iv.project(n);
                    out.add(
                        Value::inject(i, n, a.clone()),
                        p.as_ratio() * q.as_ratio(),
                    );
                }
            }
            out.expect("instrument argument has empty support").into_dist()
        }
        Term::OneOverN(n) => {
            let p = Scalar::one_over(n);
            let mut weights = BTreeMap::new();
            weights.insert(Value::top(), p.clone());
            weights.insert(Value::bot(), p.ortho());
            Dist::from_weights(Type::two(), weights)
        }
        Term::Norm(s) => {
            let d = eval(enums, ctx, s, env);
            let a = d
                .carrier()
                .as_partial()
                .unwrap_or_else(|| panic!("norm operand is not a partial type"))
                .clone();
            let mut mass = BigRational::zero();
            for (v, w) in d.support() {
                if matches!(v, Value::Inl(_)) {
                    mass += w.as_ratio();
                }
            }
            assert!(
                !mass.is_zero(),
                "norm of a zero-domain substate (typing should have rejected this)"
            );
            let mut out = WeightedSum::new(a);
            for (v, w) in d.support() {
                if let Value::Inl(inner) = v {
                    out.add((**inner).clone(), w.as_ratio() / &mass);
                }
            }
            out.into_dist()
        }
        Term::Ovee(s, u) => {
            let ds = eval(enums, ctx, s, env);
            let du = eval(enums, ctx, u, env);
            let carrier = ds.carrier().clone();
            let mut out = WeightedSum::new(carrier);
            let mut diverge = -BigRational::one();
            for d in [&ds, &du] {
                for (v, w) in d.support() {
                    match v {
                        Value::Inl(_) => out.add(v.clone(), w.as_ratio().clone()),
                        Value::Inr(_) => diverge += w.as_ratio(),
                        other => panic!("non-partial value {other} under ovee"),
                    }
                }
            }
            assert!(
                diverge >= BigRational::zero(),
                "ovee operands are not disjoint (typing should have rejected this)"
            );
            out.add(Value::bot(), diverge);
            out.into_dist()
        }
    }
}

/// Tabulates the semantic function: one distribution per environment.
pub fn eval_all(enums: &EnumTable, ctx: &Context, t: &Term) -> Vec<(Env, Dist)> {
    environments(enums, ctx)
        .expect("context mentions an undeclared enum")
        .into_iter()
        .map(|env| {
            let d = eval(enums, ctx, t, &env);
            (env, d)
        })
        .collect()
}
