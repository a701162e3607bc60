//! Core abstract syntax: types, terms, contexts.
//!
//! Terms are immutable values identified up to alpha-conversion.
//! Binders (`let-pair`, `case`, `instr`) bind exactly the declared
//! variables; the name `_` marks a vacuous binder that is never
//! referenced and never enters a context. Names beginning with `#`
//! are reserved for canonical renaming.

use crate::scalar::Scalar;
use num_bigint::BigUint;
use std::collections::BTreeSet;
use std::fmt;

pub type Name = String;

/// Declared enumeration constants: name -> constructor list.
pub type EnumTable = std::collections::BTreeMap<String, Vec<String>>;

pub fn is_vacuous(name: &str) -> bool {
    name == "_"
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    /// A declared finite enumeration.
    Const(String),
    Zero,
    One,
    Sum(Box<Type>, Box<Type>),
    Tensor(Box<Type>, Box<Type>),
}

impl Type {
    pub fn sum(left: Type, right: Type) -> Type {
        Type::Sum(Box::new(left), Box::new(right))
    }

    pub fn tensor(left: Type, right: Type) -> Type {
        Type::Tensor(Box::new(left), Box::new(right))
    }

    /// The type of predicates and scalars, `2 = 1 + 1`.
    pub fn two() -> Type {
        Type::sum(Type::One, Type::One)
    }

    /// `A + 1`, the type of partial computations into `A`.
    pub fn partial(self) -> Type {
        Type::sum(self, Type::One)
    }

    /// The n-element type `n·1`, right-nested.
    pub fn nsum(n: u64) -> Type {
        Type::copower(n, &Type::One)
    }

    /// The copower `n·A`, right-nested; `0·A = 0` and `1·A = A`.
    pub fn copower(n: u64, base: &Type) -> Type {
        match n {
            0 => Type::Zero,
            1 => base.clone(),
            _ => Type::sum(base.clone(), Type::copower(n - 1, base)),
        }
    }

    /// Matches right-nested sums of units: `1`, `1+1`, `1+(1+1)`, ...
    pub fn as_nsum(&self) -> Option<u64> {
        match self {
            Type::One => Some(1),
            Type::Sum(l, r) if **l == Type::One => r.as_nsum().map(|n| n + 1),
            _ => None,
        }
    }

    /// Is this `A + 1` for some `A`? Returns `A`.
    pub fn as_partial(&self) -> Option<&Type> {
        match self {
            Type::Sum(l, r) if **r == Type::One => Some(l),
            _ => None,
        }
    }

    fn right_spine(&self) -> Vec<&Type> {
        let mut spine = vec![];
        let mut cur = self;
        while let Type::Sum(l, r) = cur {
            spine.push(&**l);
            cur = r;
        }
        spine.push(cur);
        spine
    }

    /// Decompose as a copower `n·A` with `n` maximal.
    pub fn copower_split(&self) -> (u64, Type) {
        let spine = self.right_spine();
        for n in (2..=spine.len()).rev() {
            let tail = spine[n - 1..]
                .iter()
                .rev()
                .cloned()
                .cloned()
                .reduce(|acc, t| Type::sum(t, acc))
                .unwrap();
            if spine[..n - 1].iter().all(|c| **c == tail) {
                return (n as u64, tail);
            }
        }
        (1, self.clone())
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // sums loosest, tensor tighter, both right-associative
        fn go(ty: &Type, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
            match ty {
                Type::Const(name) => write!(f, "{name}"),
                Type::Zero => write!(f, "0"),
                Type::One => write!(f, "1"),
                Type::Sum(..) => {
                    if let Some(n) = ty.as_nsum() {
                        return write!(f, "{n}");
                    }
                    let (l, r) = match ty {
                        Type::Sum(l, r) => (l, r),
                        _ => unreachable!(),
                    };
                    if prec > 0 {
                        write!(f, "(")?;
                    }
                    go(l, f, 1)?;
                    write!(f, " + ")?;
                    go(r, f, 0)?;
                    if prec > 0 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                Type::Tensor(l, r) => {
                    if prec > 1 {
                        write!(f, "(")?;
                    }
                    go(l, f, 2)?;
                    write!(f, " (x) ")?;
                    go(r, f, 1)?;
                    if prec > 1 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self, f, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Name),
    Star,
    Pair(Box<Term>, Box<Term>),
    LetPair {
        fst: Name,
        snd: Name,
        pair: Box<Term>,
        body: Box<Term>,
    },
    /// Ex falso; the annotation is the target type.
    Magic(Box<Term>, Type),
    /// `inl t : A + B`; the annotation is the right summand `B`.
    Inl(Box<Term>, Type),
    /// `inr t : A + B`; the annotation is the left summand `A`.
    Inr(Box<Term>, Type),
    Case {
        scrut: Box<Term>,
        left: Name,
        left_body: Box<Term>,
        right: Name,
        right_body: Box<Term>,
    },
    /// Partial pairing of `s : A + 1` and `t : B + 1` with
    /// `dom s = ker t`, of type `A + B`.
    Inlr(Box<Term>, Box<Term>),
    /// Extraction from `t : A + B` under `inl?(t) = ⊤`.
    Lft(Box<Term>),
    /// Instrument: tags the argument with the outcome of the test.
    /// The test body may reference only `var`.
    Instr {
        var: Name,
        test: Box<Term>,
        arg: Box<Term>,
    },
    /// The biased coin `1/n : 2`, `n >= 2`.
    OneOverN(BigUint),
    /// Normalisation of a substate with non-zero domain.
    Norm(Box<Term>),
    /// Partial sum of two substates with disjoint domains.
    Ovee(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<Name>) -> Term {
        Term::Var(name.into())
    }

    pub fn pair(fst: Term, snd: Term) -> Term {
        Term::Pair(Box::new(fst), Box::new(snd))
    }

    pub fn let_pair(fst: impl Into<Name>, snd: impl Into<Name>, pair: Term, body: Term) -> Term {
        Term::LetPair {
            fst: fst.into(),
            snd: snd.into(),
            pair: Box::new(pair),
            body: Box::new(body),
        }
    }

    pub fn inl(t: Term, right: Type) -> Term {
        Term::Inl(Box::new(t), right)
    }

    pub fn inr(t: Term, left: Type) -> Term {
        Term::Inr(Box::new(t), left)
    }

    pub fn case(
        scrut: Term,
        left: impl Into<Name>,
        left_body: Term,
        right: impl Into<Name>,
        right_body: Term,
    ) -> Term {
        Term::Case {
            scrut: Box::new(scrut),
            left: left.into(),
            left_body: Box::new(left_body),
            right: right.into(),
            right_body: Box::new(right_body),
        }
    }

    pub fn inlr(s: Term, t: Term) -> Term {
        Term::Inlr(Box::new(s), Box::new(t))
    }

    pub fn lft(t: Term) -> Term {
        Term::Lft(Box::new(t))
    }

    pub fn instr(var: impl Into<Name>, test: Term, arg: Term) -> Term {
        Term::Instr {
            var: var.into(),
            test: Box::new(test),
            arg: Box::new(arg),
        }
    }

    pub fn one_over(n: u64) -> Term {
        Term::OneOverN(BigUint::from(n))
    }

    pub fn norm(t: Term) -> Term {
        Term::Norm(Box::new(t))
    }

    pub fn ovee(s: Term, t: Term) -> Term {
        Term::Ovee(Box::new(s), Box::new(t))
    }

    /// `⊤ = inl *`.
    pub fn top() -> Term {
        Term::inl(Term::Star, Type::One)
    }

    /// `⊥ = inr *`, also `fail` at type `2`.
    pub fn bot() -> Term {
        Term::inr(Term::Star, Type::One)
    }

    /// `fail : A + 1`.
    pub fn fail(a: Type) -> Term {
        Term::inr(Term::Star, a)
    }

    /// `return t = inl t : A + 1`.
    pub fn ret(t: Term) -> Term {
        Term::inl(t, Type::One)
    }

    /// `do x <- s; t : B + 1`, i.e. `case s of inl x -> t | inr _ -> fail`.
    pub fn do_bind(x: impl Into<Name>, s: Term, t: Term, b: Type) -> Term {
        Term::case(s, x, t, "_", Term::fail(b))
    }

    /// Scalar multiplication `do _ <- q; t : B + 1`.
    pub fn scale(q: Term, t: Term, b: Type) -> Term {
        Term::do_bind("_", q, t, b)
    }

    /// `inl?(t) = case t of inl _ -> ⊤ | inr _ -> ⊥`.
    pub fn inl_test(t: Term) -> Term {
        Term::case(t, "_", Term::top(), "_", Term::bot())
    }

    /// `inr?(t)`.
    pub fn inr_test(t: Term) -> Term {
        Term::case(t, "_", Term::bot(), "_", Term::top())
    }

    /// Domain predicate `dom t = inl?(t)` for `t : A + 1`.
    pub fn dom(t: Term) -> Term {
        Term::inl_test(t)
    }

    /// Kernel predicate `ker t = inr?(t)`.
    pub fn ker(t: Term) -> Term {
        Term::inr_test(t)
    }

    /// Orthosupplement `p⊥ = case p of _ -> ⊥ | _ -> ⊤`.
    pub fn ortho(p: Term) -> Term {
        Term::case(p, "_", Term::bot(), "_", Term::top())
    }

    /// `assert_{λvar p}(t) : A + 1` where `a` is the type of `var`.
    pub fn assert(var: impl Into<Name>, p: Term, t: Term, a: Type) -> Term {
        let var = var.into();
        Term::case(
            Term::instr(var.clone(), p, t),
            var.clone(),
            Term::ret(Term::Var(var)),
            "_",
            Term::fail(a),
        )
    }

    /// Sequential product `p & q` over the subject `var : a`:
    /// `do var <- assert_{λvar p}(var); q`.
    pub fn seq_and(var: impl Into<Name>, a: Type, p: Term, q: Term) -> Term {
        let var = var.into();
        Term::do_bind(
            var.clone(),
            Term::assert(var.clone(), p, Term::Var(var), a),
            q,
            Type::One,
        )
    }

    /// The `i`-th of `n` injections into the copower `n·A`.
    pub fn inject(i: u64, n: u64, base: &Type, t: Term) -> Term {
        assert!(1 <= i && i <= n);
        if n == 1 {
            t
        } else if i == 1 {
            Term::inl(t, Type::copower(n - 1, base))
        } else {
            Term::inr(Term::inject(i - 1, n - 1, base, t), base.clone())
        }
    }

    /// The numeral `i : n`, i.e. the `i`-th injection of `*`.
    pub fn numeral(i: u64, n: u64) -> Term {
        Term::inject(i, n, &Type::One, Term::Star)
    }

    /// Codiagonal `∇(t) : A` for `t : n·A`.
    pub fn nabla(t: Term, n: u64) -> Term {
        if n <= 1 {
            t
        } else {
            Term::case(t, "nv", Term::var("nv"), "nw", Term::nabla(Term::var("nw"), n - 1))
        }
    }

    /// Index extraction `⌊t⌋ : n` for `t : n·A`.
    pub fn index_of(t: Term, n: u64) -> Term {
        fn go(t: Term, k: u64, n: u64) -> Term {
            // k components remain, first has global index n - k + 1
            if k == 1 {
                // 1-ary copower elimination is substitution with an
                // unused binder, which simply discards t
                let _ = t;
                Term::numeral(n, n)
            } else {
                Term::case(
                    t,
                    "_",
                    Term::numeral(n - k + 1, n),
                    "iw",
                    go(Term::var("iw"), k - 1, n),
                )
            }
        }
        go(t, n, n)
    }

    /// Partial projection `▷_{is}(t) : A + 1` for `t : n·A`.
    pub fn rhd(t: Term, indices: &[u64], n: u64, base: &Type) -> Term {
        fn go(t: Term, first: u64, k: u64, indices: &[u64], base: &Type) -> Term {
            let keep = |x: Term, hit: bool| {
                if hit {
                    Term::ret(x)
                } else {
                    Term::fail(base.clone())
                }
            };
            if k == 1 {
                keep(t, indices.contains(&first))
            } else {
                Term::case(
                    t,
                    "rv",
                    keep(Term::var("rv"), indices.contains(&first)),
                    "rw",
                    go(Term::var("rw"), first + 1, k - 1, indices, base),
                )
            }
        }
        go(t, 1, n, indices, base)
    }

    /// `n · t = t ⊕ ... ⊕ t` with `n` summands; `0 · t = fail`.
    pub fn n_times(n: u64, t: Term, a: Type) -> Term {
        match n {
            0 => Term::fail(a),
            _ => {
                let mut acc = t.clone();
                for _ in 1..n {
                    acc = Term::ovee(acc, t.clone());
                }
                acc
            }
        }
    }

    /// Encode an exact rational as a closed scalar term: `0 = ⊥`,
    /// `1 = ⊤`, otherwise a partial sum of unit fractions.
    pub fn scalar(q: &Scalar) -> Term {
        if q.is_zero() {
            return Term::bot();
        }
        if q.is_one() {
            return Term::top();
        }
        q.egyptian_units()
            .into_iter()
            .map(|d| Term::OneOverN(d))
            .reduce(Term::ovee)
            .expect("non-zero scalar has at least one unit")
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        fn go(t: &Term, out: &mut BTreeSet<Name>) {
            match t {
                Term::Var(x) => {
                    if !is_vacuous(x) {
                        out.insert(x.clone());
                    }
                }
                Term::Star | Term::OneOverN(_) => {}
                Term::Pair(a, b) | Term::Ovee(a, b) | Term::Inlr(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Term::Magic(a, _) | Term::Inl(a, _) | Term::Inr(a, _) | Term::Lft(a) | Term::Norm(a) => {
                    go(a, out)
                }
                Term::LetPair { fst, snd, pair, body } => {
                    go(pair, out);
                    let mut inner = BTreeSet::new();
                    go(body, &mut inner);
                    inner.remove(fst);
                    inner.remove(snd);
                    out.extend(inner);
                }
                Term::Case {
                    scrut,
                    left,
                    left_body,
                    right,
                    right_body,
                } => {
                    go(scrut, out);
                    let mut l = BTreeSet::new();
                    go(left_body, &mut l);
                    l.remove(left);
                    out.extend(l);
                    let mut r = BTreeSet::new();
                    go(right_body, &mut r);
                    r.remove(right);
                    out.extend(r);
                }
                Term::Instr { var, test, arg } => {
                    go(arg, out);
                    let mut inner = BTreeSet::new();
                    go(test, &mut inner);
                    inner.remove(var);
                    out.extend(inner);
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut out);
        out
    }

    /// Capture-avoiding substitution `t[x := s]`.
    pub fn substitute(&self, x: &str, s: &Term) -> Term {
        self.substitute_many(&[(x.to_string(), s.clone())])
    }

    /// Simultaneous capture-avoiding substitution.
    pub fn substitute_many(&self, subs: &[(Name, Term)]) -> Term {
        let live: Vec<&(Name, Term)> = subs
            .iter()
            .filter(|(x, _)| !is_vacuous(x))
            .collect();
        if live.is_empty() {
            return self.clone();
        }
        let free = self.free_vars();
        let live: Vec<&(Name, Term)> = live
            .into_iter()
            .filter(|(x, _)| free.contains(x))
            .collect();
        if live.is_empty() {
            return self.clone();
        }
        let mut avoid: BTreeSet<Name> = free;
        for (x, s) in &live {
            avoid.insert(x.clone());
            avoid.extend(s.free_vars());
        }
        subst(self, &live, &avoid)
    }
}

/// Picks a name based on `base` that avoids `avoid`.
fn fresh(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let stem = base.trim_end_matches('\'');
    let stem = if stem.is_empty() { "v" } else { stem };
    let mut candidate = format!("{stem}'");
    while avoid.contains(&candidate) {
        candidate.push('\'');
    }
    candidate
}

fn subst(t: &Term, subs: &[&(Name, Term)], avoid: &BTreeSet<Name>) -> Term {
    // renames `binder` apart from the substitution when needed and
    // returns the adjusted binder plus the body substitutions
    fn under<'a>(
        binders: &mut [&mut Name],
        body_free: &BTreeSet<Name>,
        subs: &[&'a (Name, Term)],
        avoid: &BTreeSet<Name>,
    ) -> (Vec<(Name, Term)>, BTreeSet<Name>) {
        let mut renames: Vec<(Name, Term)> = vec![];
        let mut avoid = avoid.clone();
        for binder in binders.iter_mut() {
            if is_vacuous(binder) {
                continue;
            }
            let captured = subs.iter().any(|(x, s)| {
                x != *binder && body_free.contains(x) && s.free_vars().contains(*binder)
            });
            if captured {
                let fresh_name = fresh(binder, &avoid);
                avoid.insert(fresh_name.clone());
                renames.push((binder.clone(), Term::Var(fresh_name.clone())));
                **binder = fresh_name;
            }
        }
        (renames, avoid)
    }

    fn body_subst(
        body: &Term,
        binders: &mut [&mut Name],
        subs: &[&(Name, Term)],
        avoid: &BTreeSet<Name>,
    ) -> Term {
        let body_free = body.free_vars();
        let (renames, avoid) = under(binders, &body_free, subs, avoid);
        let body = if renames.is_empty() {
            body.clone()
        } else {
            let refs: Vec<&(Name, Term)> = renames.iter().collect();
            subst(body, &refs, &avoid)
        };
        let live: Vec<&(Name, Term)> = subs
            .iter()
            .copied()
            .filter(|(x, _)| !binders.iter().any(|b| **b == *x))
            .collect();
        if live.is_empty() {
            body
        } else {
            subst(&body, &live, &avoid)
        }
    }

    match t {
        Term::Var(x) => subs
            .iter()
            .find(|(y, _)| y == x)
            .map(|(_, s)| s.clone())
            .unwrap_or_else(|| t.clone()),
        Term::Star | Term::OneOverN(_) => t.clone(),
        Term::Pair(a, b) => Term::pair(subst(a, subs, avoid), subst(b, subs, avoid)),
        Term::Ovee(a, b) => Term::ovee(subst(a, subs, avoid), subst(b, subs, avoid)),
        Term::Inlr(a, b) => Term::inlr(subst(a, subs, avoid), subst(b, subs, avoid)),
        Term::Magic(a, ty) => Term::Magic(Box::new(subst(a, subs, avoid)), ty.clone()),
        Term::Inl(a, ty) => Term::inl(subst(a, subs, avoid), ty.clone()),
        Term::Inr(a, ty) => Term::inr(subst(a, subs, avoid), ty.clone()),
        Term::Lft(a) => Term::lft(subst(a, subs, avoid)),
        Term::Norm(a) => Term::norm(subst(a, subs, avoid)),
        Term::LetPair { fst, snd, pair, body } => {
            let pair = subst(pair, subs, avoid);
            let mut fst = fst.clone();
            let mut snd = snd.clone();
            let body = body_subst(body, &mut [&mut fst, &mut snd], subs, avoid);
            Term::let_pair(fst, snd, pair, body)
        }
        Term::Case {
            scrut,
            left,
            left_body,
            right,
            right_body,
        } => {
            let scrut = subst(scrut, subs, avoid);
            let mut left = left.clone();
            let left_body = body_subst(left_body, &mut [&mut left], subs, avoid);
            let mut right = right.clone();
            let right_body = body_subst(right_body, &mut [&mut right], subs, avoid);
            Term::case(scrut, left, left_body, right, right_body)
        }
        Term::Instr { var, test, arg } => {
            let arg = subst(arg, subs, avoid);
            let mut var = var.clone();
            let test = body_subst(test, &mut [&mut var], subs, avoid);
            Term::instr(var, test, arg)
        }
    }
}

impl Term {
    /// Canonical renaming of bound variables: the k-th binder in
    /// pre-order becomes `#k`. Two terms are alpha-equivalent exactly
    /// when their canonical forms are structurally equal.
    pub fn alpha_canonical(&self) -> Term {
        fn go(t: &Term, env: &im_map::Map, counter: &mut u64) -> Term {
            match t {
                Term::Var(x) => Term::Var(env.get(x).cloned().unwrap_or_else(|| x.clone())),
                Term::Star | Term::OneOverN(_) => t.clone(),
                Term::Pair(a, b) => Term::pair(go(a, env, counter), go(b, env, counter)),
                Term::Ovee(a, b) => Term::ovee(go(a, env, counter), go(b, env, counter)),
                Term::Inlr(a, b) => Term::inlr(go(a, env, counter), go(b, env, counter)),
                Term::Magic(a, ty) => Term::Magic(Box::new(go(a, env, counter)), ty.clone()),
                Term::Inl(a, ty) => Term::inl(go(a, env, counter), ty.clone()),
                Term::Inr(a, ty) => Term::inr(go(a, env, counter), ty.clone()),
                Term::Lft(a) => Term::lft(go(a, env, counter)),
                Term::Norm(a) => Term::norm(go(a, env, counter)),
                Term::LetPair { fst, snd, pair, body } => {
                    let pair = go(pair, env, counter);
                    let (f, env) = im_map::bind(env, fst, counter);
                    let (s, env) = im_map::bind(&env, snd, counter);
                    Term::let_pair(f, s, pair, go(body, &env, counter))
                }
                Term::Case {
                    scrut,
                    left,
                    left_body,
                    right,
                    right_body,
                } => {
                    let scrut = go(scrut, env, counter);
                    let (l, lenv) = im_map::bind(env, left, counter);
                    let left_body = go(left_body, &lenv, counter);
                    let (r, renv) = im_map::bind(env, right, counter);
                    let right_body = go(right_body, &renv, counter);
                    Term::case(scrut, l, left_body, r, right_body)
                }
                Term::Instr { var, test, arg } => {
                    let arg = go(arg, env, counter);
                    let (v, env) = im_map::bind(env, var, counter);
                    Term::instr(v, go(test, &env, counter), arg)
                }
            }
        }
        let mut counter = 0;
        go(self, &im_map::Map::new(), &mut counter)
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        self.alpha_canonical() == other.alpha_canonical()
    }
}

mod im_map {
    use super::Name;

    pub type Map = std::collections::BTreeMap<Name, Name>;

    pub fn bind(env: &Map, binder: &str, counter: &mut u64) -> (Name, Map) {
        let canonical = format!("#{counter}");
        *counter += 1;
        if super::is_vacuous(binder) {
            return (canonical, env.clone());
        }
        let mut env = env.clone();
        env.insert(binder.to_string(), canonical.clone());
        (canonical, env)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("duplicate context variable {0}")]
pub struct DuplicateVar(pub Name);

/// An ordered typing context without duplicate names. Lookup is by
/// name, so exchange holds for free.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Context {
    entries: Vec<(Name, Type)>,
}

impl Context {
    pub fn empty() -> Context {
        Context::default()
    }

    pub fn singleton(name: impl Into<Name>, ty: Type) -> Context {
        Context {
            entries: vec![(name.into(), ty)],
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Name, Type)>) -> Result<Context, DuplicateVar> {
        let mut ctx = Context::empty();
        for (name, ty) in pairs {
            ctx.push(name, ty)?;
        }
        Ok(ctx)
    }

    pub fn push(&mut self, name: impl Into<Name>, ty: Type) -> Result<(), DuplicateVar> {
        let name = name.into();
        if is_vacuous(&name) {
            return Ok(());
        }
        if self.lookup(&name).is_some() {
            return Err(DuplicateVar(name));
        }
        self.entries.push((name, ty));
        Ok(())
    }

    /// Extends with a binder, shadowing any outer entry of that name.
    pub fn bind(&self, name: &str, ty: Type) -> Context {
        let mut entries: Vec<(Name, Type)> = self
            .entries
            .iter()
            .filter(|(n, _)| n != name)
            .cloned()
            .collect();
        if !is_vacuous(name) {
            entries.push((name.to_string(), ty));
        }
        Context { entries }
    }

    pub fn lookup(&self, name: &str) -> Option<&Type> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Name, Type)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, ty) in &self.entries {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{name} : {ty}")?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    #[test]
    fn identity_substitution() {
        assert_eq!(v("x").substitute("x", &Term::Star), Term::Star);
    }

    #[test]
    fn substitution_under_binders() {
        // case y of x -> x | z -> z, substituting into the scrutinee
        let t = Term::case(v("y"), "x", v("x"), "z", v("z"));
        let expected = Term::case(
            Term::inl(Term::Star, Type::One),
            "x",
            v("x"),
            "z",
            v("z"),
        );
        assert_eq!(t.substitute("y", &Term::inl(Term::Star, Type::One)), expected);
    }

    #[test]
    fn substitution_into_let_pair() {
        let t = Term::let_pair("x", "y", v("w"), Term::pair(v("x"), v("y")));
        let s = Term::pair(Term::Star, Term::Star);
        let expected = Term::let_pair("x", "y", s.clone(), Term::pair(v("x"), v("y")));
        assert_eq!(t.substitute("w", &s), expected);
    }

    #[test]
    fn capture_is_avoided() {
        // (case s of x -> y)[y := x] must not capture x
        let t = Term::case(v("s"), "x", v("y"), "_", Term::Star);
        let result = t.substitute("y", &v("x"));
        match &result {
            Term::Case { left, left_body, .. } => {
                assert_ne!(left, "x");
                assert_eq!(**left_body, v("x"));
            }
            other => panic!("unexpected shape {other:?}"),
        }
        assert_eq!(result.free_vars(), [Name::from("s"), Name::from("x")].into());
    }

    #[test]
    fn simultaneous_substitution_is_parallel() {
        // t[x := y, y := x] swaps
        let t = Term::pair(v("x"), v("y"));
        let swapped = t.substitute_many(&[("x".into(), v("y")), ("y".into(), v("x"))]);
        assert_eq!(swapped, Term::pair(v("y"), v("x")));
    }

    #[test]
    fn alpha_equivalence() {
        let a = Term::case(v("r"), "x", v("x"), "y", v("y"));
        let b = Term::case(v("r"), "a", v("a"), "b", v("b"));
        assert!(a.alpha_eq(&b));
        assert!(!v("x").alpha_eq(&v("y")));
        let i1 = Term::instr("x", Term::inl(Term::Star, Type::One), v("s"));
        let i2 = Term::instr("z", Term::inl(Term::Star, Type::One), v("s"));
        assert!(i1.alpha_eq(&i2));
    }

    #[test]
    fn vacuous_binder_matches_unused_binder() {
        let named = Term::case(v("r"), "x", Term::Star, "y", Term::Star);
        let vacuous = Term::case(v("r"), "_", Term::Star, "_", Term::Star);
        assert!(named.alpha_eq(&vacuous));
    }

    #[test]
    fn free_variable_sets() {
        assert_eq!(v("x").free_vars(), [Name::from("x")].into());
        let t = Term::let_pair("x", "y", v("z"), Term::pair(v("x"), v("y")));
        assert_eq!(t.free_vars(), [Name::from("z")].into());
        let o = Term::ovee(v("p"), v("q"));
        assert_eq!(o.free_vars(), [Name::from("p"), Name::from("q")].into());
    }

    #[test]
    fn nsum_shapes() {
        assert_eq!(Type::nsum(1), Type::One);
        assert_eq!(Type::nsum(2), Type::two());
        assert_eq!(Type::nsum(3), Type::sum(Type::One, Type::two()));
        assert_eq!(Type::nsum(3).as_nsum(), Some(3));
        assert_eq!(Type::two().as_nsum(), Some(2));
        assert_eq!(Type::sum(Type::two(), Type::One).as_nsum(), None);
    }

    #[test]
    fn copower_split_is_maximal() {
        let two = Type::two();
        assert_eq!(Type::copower(3, &two).copower_split(), (3, two.clone()));
        assert_eq!(Type::nsum(4).copower_split(), (4, Type::One));
        assert_eq!(
            Type::tensor(Type::One, Type::One).copower_split(),
            (1, Type::tensor(Type::One, Type::One))
        );
        // 2 + (2 + 1) is not a copower beyond n = 1 at the top level,
        // but 2 + 2 splits as 2·2
        assert_eq!(
            Type::sum(two.clone(), two.clone()).copower_split(),
            (2, two)
        );
    }

    #[test]
    fn context_rejects_duplicates() {
        let mut ctx = Context::empty();
        ctx.push("x", Type::two()).unwrap();
        assert!(ctx.push("x", Type::One).is_err());
        assert_eq!(ctx.lookup("x"), Some(&Type::two()));
    }

    #[test]
    fn type_display() {
        assert_eq!(Type::two().to_string(), "2");
        assert_eq!(Type::nsum(5).to_string(), "5");
        assert_eq!(
            Type::tensor(Type::two(), Type::two()).to_string(),
            "2 (x) 2"
        );
        assert_eq!(
            Type::sum(Type::tensor(Type::two(), Type::One), Type::Zero).to_string(),
            "2 (x) 1 + 0"
        );
    }
}
