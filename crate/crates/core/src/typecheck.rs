//! Syntax-directed type checking with an affine variable discipline
//! and semantic side conditions.
//!
//! Several typing rules demand derivable equations (`dom s = ker t`
//! for partial pairing, `inl?(t) = ⊤` for extraction, disjointness
//! for partial sums, a non-zero domain for normalisation). Instead of
//! proof search over the equational theory, those judgements are
//! decided by exhaustive evaluation over the finite denotations with
//! exact rationals. The oracle may accept terms whose side conditions
//! are semantically true but not syntactically derivable; that is a
//! deliberate extension.

use crate::semantics::{environments, eval, eval_all, Value};
use crate::syntax::{Context, EnumTable, Name, Term, Type};
use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeErrorKind {
    UnboundVar(Name),
    LinearityViolation(String),
    Mismatch(String),
    SideConditionFailed(String),
    EmptyEnum(String),
    UnknownEnum(String),
}

impl fmt::Display for TypeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeErrorKind::UnboundVar(x) => write!(f, "unbound variable {x}"),
            TypeErrorKind::LinearityViolation(d) => write!(f, "linearity violation: {d}"),
            TypeErrorKind::Mismatch(d) => write!(f, "type mismatch: {d}"),
            TypeErrorKind::SideConditionFailed(d) => write!(f, "side condition failed: {d}"),
            TypeErrorKind::EmptyEnum(name) => write!(f, "enum {name} has no constructors"),
            TypeErrorKind::UnknownEnum(name) => write!(f, "unknown enum type {name}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} [rule {rule}] in context [{ctx}] at term {term}")]
pub struct TypeError {
    pub kind: TypeErrorKind,
    /// The deduction rule whose premise failed.
    pub rule: &'static str,
    pub ctx: Context,
    pub term: Term,
}

impl TypeError {
    fn new(kind: TypeErrorKind, rule: &'static str, ctx: &Context, term: &Term) -> Self {
        TypeError {
            kind,
            rule,
            ctx: ctx.clone(),
            term: term.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// Normalisation used in a non-empty context; the witness must
    /// hold uniformly across all environments.
    NormInOpenContext { ctx: Context },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::NormInOpenContext { ctx } => write!(
                f,
                "norm used in non-empty context [{ctx}]; the domain bound is enforced uniformly over all environments"
            ),
        }
    }
}

/// A semantic side condition attached to typing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Judgement {
    TypeOf(Context, Term, Type),
    Equal(Context, Term, Term, Type),
    Leq(Context, Term, Term, Type),
    Disjoint(Context, Term, Term),
    NonZeroDomain(Context, Term),
}

impl Judgement {
    /// Decides the judgement semantically; `TypeOf` runs the checker.
    pub fn holds(&self, enums: &EnumTable) -> bool {
        match self {
            Judgement::TypeOf(ctx, t, ty) => {
                infer_type(enums, ctx, t).map(|found| found == *ty).unwrap_or(false)
            }
            Judgement::Equal(ctx, s, t, _) => check_equal(enums, ctx, s, t),
            Judgement::Leq(ctx, s, t, _) => check_leq(enums, ctx, s, t),
            Judgement::Disjoint(ctx, s, t) => check_disjoint(enums, ctx, s, t),
            Judgement::NonZeroDomain(ctx, t) => check_nonzero_domain(enums, ctx, t).is_ok(),
        }
    }
}

fn validate_type(
    enums: &EnumTable,
    ty: &Type,
    rule: &'static str,
    ctx: &Context,
    at: &Term,
) -> Result<(), TypeError> {
    match ty {
        Type::Const(name) => match enums.get(name) {
            None => Err(TypeError::new(
                TypeErrorKind::UnknownEnum(name.clone()),
                rule,
                ctx,
                at,
            )),
            Some(ctors) if ctors.is_empty() => Err(TypeError::new(
                TypeErrorKind::EmptyEnum(name.clone()),
                rule,
                ctx,
                at,
            )),
            Some(_) => Ok(()),
        },
        Type::Zero | Type::One => Ok(()),
        Type::Sum(l, r) | Type::Tensor(l, r) => {
            validate_type(enums, l, rule, ctx, at)?;
            validate_type(enums, r, rule, ctx, at)
        }
    }
}

/// Pointwise exact equality of denotations: `s = t` at a common type.
pub fn check_equal(enums: &EnumTable, ctx: &Context, s: &Term, t: &Term) -> bool {
    eval_all(enums, ctx, s) == eval_all(enums, ctx, t)
}

/// `s ≤ t` at a type `A + 1`: the probability that `s` converges on
/// `a` never exceeds that of `t`, for every environment and `a`.
pub fn check_leq(enums: &EnumTable, ctx: &Context, s: &Term, t: &Term) -> bool {
    let envs = environments(enums, ctx).expect("context mentions an undeclared enum");
    envs.iter().all(|env| {
        let ds = eval(enums, ctx, s, env);
        let dt = eval(enums, ctx, t, env);
        let below = ds
            .support()
            .filter(|(v, _)| matches!(v, Value::Inl(_)))
            .all(|(v, w)| w.leq(&dt.weight(v)));
        below
    })
}

fn converge_mass(d: &crate::semantics::Dist) -> BigRational {
    d.support()
        .filter(|(v, _)| matches!(v, Value::Inl(_)))
        .fold(BigRational::zero(), |acc, (_, w)| acc + w.as_ratio())
}

/// Disjointness of two substates: their domains never overlap, i.e.
/// the convergence masses sum to at most 1 in every environment.
pub fn check_disjoint(enums: &EnumTable, ctx: &Context, s: &Term, t: &Term) -> bool {
    let envs = environments(enums, ctx).expect("context mentions an undeclared enum");
    envs.iter().all(|env| {
        let ms = converge_mass(&eval(enums, ctx, s, env));
        let mt = converge_mass(&eval(enums, ctx, t, env));
        ms + mt <= BigRational::one()
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("zero-domain substate: conditioning on a probability-zero event")]
pub struct ZeroDomain;

/// The least `n >= 2` with `1/n ≤ dom t` uniformly over all
/// environments, or `ZeroDomain` when some environment diverges
/// almost surely.
pub fn check_nonzero_domain(
    enums: &EnumTable,
    ctx: &Context,
    t: &Term,
) -> Result<BigUint, ZeroDomain> {
    let envs = environments(enums, ctx).expect("context mentions an undeclared enum");
    let mut min_mass: Option<BigRational> = None;
    for env in &envs {
        let mass = converge_mass(&eval(enums, ctx, t, env));
        if mass.is_zero() {
            return Err(ZeroDomain);
        }
        min_mass = Some(match min_mass {
            None => mass,
            Some(m) => m.min(mass),
        });
    }
    Ok(match min_mass {
        // no environments at all: the bound holds vacuously
        None => BigUint::from(2u8),
        Some(m) => {
            // least n with n >= 1/m, clamped to n >= 2
            let n = m.denom().magnitude().div_ceil(m.numer().magnitude());
            n.max(BigUint::from(2u8))
        }
    })
}

/// Plain syntax-directed type synthesis: no usage discipline, no side
/// conditions. The elaborator uses this to direct expansions; the
/// full checker re-verifies everything afterwards.
pub fn synth_type(enums: &EnumTable, ctx: &Context, t: &Term) -> Result<Type, TypeError> {
    let mut warnings = Vec::new();
    check_term(enums, ctx, t, Mode::SynthesisOnly, &mut warnings).map(|(ty, _)| ty)
}

/// Full checking: synthesis plus the affine discipline plus semantic
/// side conditions. Returns the unique type.
pub fn infer_type(enums: &EnumTable, ctx: &Context, t: &Term) -> Result<Type, TypeError> {
    let mut warnings = Vec::new();
    infer_type_with_warnings(enums, ctx, t, &mut warnings)
}

pub fn infer_type_with_warnings(
    enums: &EnumTable,
    ctx: &Context,
    t: &Term,
    warnings: &mut Vec<Warning>,
) -> Result<Type, TypeError> {
    check_term(enums, ctx, t, Mode::Full, warnings).map(|(ty, _)| ty)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// Elaboration-time synthesis: skip side conditions and usage.
    SynthesisOnly,
    Full,
}

type Usage = BTreeSet<Name>;

fn disjoint_or_err(
    a: &Usage,
    b: &Usage,
    rule: &'static str,
    ctx: &Context,
    at: &Term,
    what: &str,
) -> Result<(), TypeError> {
    if let Some(shared) = a.intersection(b).next() {
        return Err(TypeError::new(
            TypeErrorKind::LinearityViolation(format!(
                "variable {shared} is used by both {what}"
            )),
            rule,
            ctx,
            at,
        ));
    }
    Ok(())
}

fn without(mut usage: Usage, binders: &[&Name]) -> Usage {
    for b in binders {
        usage.remove(*b);
    }
    usage
}

fn check_term(
    enums: &EnumTable,
    ctx: &Context,
    t: &Term,
    mode: Mode,
    warnings: &mut Vec<Warning>,
) -> Result<(Type, Usage), TypeError> {
    let full = mode == Mode::Full;
    match t {
        Term::Var(x) => match ctx.lookup(x) {
            Some(ty) => Ok((ty.clone(), Usage::from([x.clone()]))),
            None => Err(TypeError::new(
                TypeErrorKind::UnboundVar(x.clone()),
                "(var)",
                ctx,
                t,
            )),
        },
        Term::Star => Ok((Type::One, Usage::new())),
        Term::Pair(s, u) => {
            let (a, us) = check_term(enums, ctx, s, mode, warnings)?;
            let (b, uu) = check_term(enums, ctx, u, mode, warnings)?;
            if full {
                disjoint_or_err(&us, &uu, "(pair)", ctx, t, "sides of a tensor pair")?;
            }
            Ok((Type::tensor(a, b), us.union(&uu).cloned().collect()))
        }
        Term::LetPair { fst, snd, pair, body } => {
            let (pt, up) = check_term(enums, ctx, pair, mode, warnings)?;
            let (a, b) = match pt {
                Type::Tensor(a, b) => (*a, *b),
                other => {
                    return Err(TypeError::new(
                        TypeErrorKind::Mismatch(format!(
                            "let-pair scrutinee has type {other}, expected a tensor"
                        )),
                        "(let)",
                        ctx,
                        t,
                    ))
                }
            };
            if fst == snd && !crate::syntax::is_vacuous(fst) {
                return Err(TypeError::new(
                    TypeErrorKind::LinearityViolation(format!(
                        "let-pair binds {fst} twice"
                    )),
                    "(let)",
                    ctx,
                    t,
                ));
            }
            let inner = ctx.bind(fst, a).bind(snd, b);
            let (c, ub) = check_term(enums, &inner, body, mode, warnings)?;
            let ub = without(ub, &[fst, snd]);
            if full {
                disjoint_or_err(&up, &ub, "(let)", ctx, t, "the let-pair scrutinee and its body")?;
            }
            Ok((c, up.union(&ub).cloned().collect()))
        }
        Term::Magic(s, target) => {
            validate_type(enums, target, "(magic)", ctx, t)?;
            let (st, us) = check_term(enums, ctx, s, mode, warnings)?;
            if st != Type::Zero {
                return Err(TypeError::new(
                    TypeErrorKind::Mismatch(format!(
                        "magic applies to the empty type, found {st}"
                    )),
                    "(magic)",
                    ctx,
                    t,
                ));
            }
            Ok((target.clone(), us))
        }
        Term::Inl(s, right) => {
            validate_type(enums, right, "(inl)", ctx, t)?;
            let (a, us) = check_term(enums, ctx, s, mode, warnings)?;
            Ok((Type::sum(a, right.clone()), us))
        }
        Term::Inr(s, left) => {
            validate_type(enums, left, "(inr)", ctx, t)?;
            let (b, us) = check_term(enums, ctx, s, mode, warnings)?;
            Ok((Type::sum(left.clone(), b), us))
        }
        Term::Case {
            scrut,
            left,
            left_body,
            right,
            right_body,
        } => {
            let (st, uscrut) = check_term(enums, ctx, scrut, mode, warnings)?;
            let (a, b) = match st {
                Type::Sum(a, b) => (*a, *b),
                other => {
                    return Err(TypeError::new(
                        TypeErrorKind::Mismatch(format!(
                            "case scrutinee has type {other}, expected a sum"
                        )),
                        "(case)",
                        ctx,
                        t,
                    ))
                }
            };
            let (lt, ul) = check_term(enums, &ctx.bind(left, a), left_body, mode, warnings)?;
            let (rt, ur) = check_term(enums, &ctx.bind(right, b), right_body, mode, warnings)?;
            if lt != rt {
                return Err(TypeError::new(
                    TypeErrorKind::Mismatch(format!(
                        "case branches disagree: {lt} versus {rt}"
                    )),
                    "(case)",
                    ctx,
                    t,
                ));
            }
            // branches are additive (they share the residual context),
            // the scrutinee is multiplicative against both
            let branches: Usage = without(ul, &[left])
                .union(&without(ur, &[right]))
                .cloned()
                .collect();
            if full {
                disjoint_or_err(&uscrut, &branches, "(case)", ctx, t, "the case scrutinee and its branches")?;
            }
            Ok((lt, uscrut.union(&branches).cloned().collect()))
        }
        Term::Inlr(s, u) => {
            let (st, us) = check_term(enums, ctx, s, mode, warnings)?;
            let (ut, uu) = check_term(enums, ctx, u, mode, warnings)?;
            let a = st.as_partial().ok_or_else(|| {
                TypeError::new(
                    TypeErrorKind::Mismatch(format!(
                        "inlr left operand has type {st}, expected A + 1"
                    )),
                    "(inlr)",
                    ctx,
                    t,
                )
            })?;
            let b = ut.as_partial().ok_or_else(|| {
                TypeError::new(
                    TypeErrorKind::Mismatch(format!(
                        "inlr right operand has type {ut}, expected B + 1"
                    )),
                    "(inlr)",
                    ctx,
                    t,
                )
            })?;
            if full
                && !check_equal(
                    enums,
                    ctx,
                    &Term::dom((**s).clone()),
                    &Term::ker((**u).clone()),
                )
            {
                return Err(TypeError::new(
                    TypeErrorKind::SideConditionFailed(
                        "inlr requires dom s = ker t".into(),
                    ),
                    "(inlr)",
                    ctx,
                    t,
                ));
            }
            Ok((
                Type::sum(a.clone(), b.clone()),
                us.union(&uu).cloned().collect(),
            ))
        }
        Term::Lft(s) => {
            let (st, us) = check_term(enums, ctx, s, mode, warnings)?;
            let a = match &st {
                Type::Sum(a, _) => (**a).clone(),
                other => {
                    return Err(TypeError::new(
                        TypeErrorKind::Mismatch(format!(
                            "lft operand has type {other}, expected a sum"
                        )),
                        "(lft)",
                        ctx,
                        t,
                    ))
                }
            };
            if full
                && !check_equal(
                    enums,
                    ctx,
                    &Term::inl_test((**s).clone()),
                    &Term::top(),
                )
            {
                return Err(TypeError::new(
                    TypeErrorKind::SideConditionFailed(
                        "lft requires inl?(t) = ⊤".into(),
                    ),
                    "(lft)",
                    ctx,
                    t,
                ));
            }
            Ok((a, us))
        }
        Term::Instr { var, test, arg } => {
            let (a, ua) = check_term(enums, ctx, arg, mode, warnings)?;
            let test_ctx = Context::singleton(var.clone(), a.clone());
            let test_result = check_term(enums, &test_ctx, test, mode, warnings);
            let (tt, _) = test_result.map_err(|e| {
                // reads of outer variables surface as unbound names in
                // the singleton context
                if let TypeErrorKind::UnboundVar(x) = &e.kind {
                    if ctx.lookup(x).is_some() {
                        return TypeError::new(
                            TypeErrorKind::LinearityViolation(format!(
                                "instrument test reads outer variable {x}; it may use only its bound variable"
                            )),
                            "(instr)",
                            ctx,
                            t,
                        );
                    }
                }
                e
            })?;
            let n = tt.as_nsum().ok_or_else(|| {
                TypeError::new(
                    TypeErrorKind::Mismatch(format!(
                        "instrument test has type {tt}, expected an n-fold sum of units"
                    )),
                    "(instr)",
                    ctx,
                    t,
                )
            })?;
            Ok((Type::copower(n, &a), ua))
        }
        Term::OneOverN(n) => {
            if *n < BigUint::from(2u8) {
                return Err(TypeError::new(
                    TypeErrorKind::Mismatch("the constant 1/n requires n >= 2".into()),
                    "(1/n)",
                    ctx,
                    t,
                ));
            }
            Ok((Type::two(), Usage::new()))
        }
        Term::Norm(s) => {
            let (st, us) = check_term(enums, ctx, s, mode, warnings)?;
            let a = st.as_partial().ok_or_else(|| {
                TypeError::new(
                    TypeErrorKind::Mismatch(format!(
                        "norm operand has type {st}, expected A + 1"
                    )),
                    "(norm)",
                    ctx,
                    t,
                )
            })?;
            if full {
                if !ctx.is_empty() {
                    warnings.push(Warning::NormInOpenContext { ctx: ctx.clone() });
                }
                check_nonzero_domain(enums, ctx, s).map_err(|ZeroDomain| {
                    TypeError::new(
                        TypeErrorKind::SideConditionFailed(
                            "norm requires 1/n ≤ dom t for some n >= 2".into(),
                        ),
                        "(norm)",
                        ctx,
                        t,
                    )
                })?;
            }
            Ok((a.clone(), us))
        }
        Term::Ovee(s, u) => {
            let (st, us) = check_term(enums, ctx, s, mode, warnings)?;
            let (ut, uu) = check_term(enums, ctx, u, mode, warnings)?;
            if st.as_partial().is_none() || st != ut {
                return Err(TypeError::new(
                    TypeErrorKind::Mismatch(format!(
                        "partial sum needs both operands at one type A + 1, found {st} and {ut}"
                    )),
                    "(ovee)",
                    ctx,
                    t,
                ));
            }
            if full && !check_disjoint(enums, ctx, s, u) {
                return Err(TypeError::new(
                    TypeErrorKind::SideConditionFailed(
                        "no bound exists: the operands' domains overlap".into(),
                    ),
                    "(ovee)",
                    ctx,
                    t,
                ));
            }
            Ok((st, us.union(&uu).cloned().collect()))
        }
    }
}

/// The least admissible normalisation witness for `t : A + 1`,
/// re-exported for reporting.
pub fn norm_witness(enums: &EnumTable, ctx: &Context, t: &Term) -> Result<BigUint, ZeroDomain> {
    check_nonzero_domain(enums, ctx, t)
}

// ---------------------------------------------------------------------------
// Programs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub params: Context,
    pub ret: Type,
    pub body: Term,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryKind {
    Eval {
        def: String,
    },
    Infer {
        state: String,
        pred: String,
        marginal: Option<u8>,
    },
    Validity {
        state: String,
        pred: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryDecl {
    pub kind: QueryKind,
    pub span: Span,
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryKind::Eval { def } => write!(f, "eval {def}"),
            QueryKind::Infer {
                state,
                pred,
                marginal,
            } => {
                write!(f, "infer {state} given {pred}")?;
                if let Some(side) = marginal {
                    write!(f, " marginal {side}")?;
                }
                Ok(())
            }
            QueryKind::Validity { state, pred } => write!(f, "validity {state} given {pred}"),
        }
    }
}

/// A checked-in-order program: enum declarations, definitions, queries.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub enums: EnumTable,
    pub defs: Vec<Definition>,
    pub queries: Vec<QueryDecl>,
}

impl Program {
    pub fn def(&self, name: &str) -> Option<&Definition> {
        self.defs.iter().find(|d| d.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProgramError {
    #[error("definition {name} (at {span}): {source}")]
    Def {
        name: String,
        span: Span,
        source: TypeError,
    },
    #[error("query `{query}` (at {span}): {detail}")]
    Query {
        query: String,
        span: Span,
        detail: String,
    },
    #[error("enum {0} has no constructors")]
    EmptyEnum(String),
    #[error("duplicate name {0}")]
    DuplicateName(String),
}

/// Type-checks every definition and query, in order.
pub fn check_program(program: &Program) -> Result<Vec<Warning>, ProgramError> {
    let mut warnings = Vec::new();
    for (name, ctors) in &program.enums {
        if ctors.is_empty() {
            return Err(ProgramError::EmptyEnum(name.clone()));
        }
        let unique: BTreeSet<_> = ctors.iter().collect();
        if unique.len() != ctors.len() {
            return Err(ProgramError::DuplicateName(name.clone()));
        }
    }
    let mut seen = BTreeSet::new();
    for def in &program.defs {
        if !seen.insert(def.name.clone()) {
            return Err(ProgramError::DuplicateName(def.name.clone()));
        }
        let found = infer_type_with_warnings(&program.enums, &def.params, &def.body, &mut warnings)
            .map_err(|source| ProgramError::Def {
                name: def.name.clone(),
                span: def.span,
                source,
            })?;
        if found != def.ret {
            return Err(ProgramError::Def {
                name: def.name.clone(),
                span: def.span,
                source: TypeError::new(
                    TypeErrorKind::Mismatch(format!(
                        "declared type {} but the body has type {found}",
                        def.ret
                    )),
                    "(def)",
                    &def.params,
                    &def.body,
                ),
            });
        }
    }
    for query in &program.queries {
        check_query(program, query)?;
    }
    Ok(warnings)
}

fn check_query(program: &Program, query: &QueryDecl) -> Result<(), ProgramError> {
    let fail = |detail: String| ProgramError::Query {
        query: query.kind.to_string(),
        span: query.span,
        detail,
    };
    let lookup = |name: &str| {
        program
            .def(name)
            .ok_or_else(|| fail(format!("no definition named {name}")))
    };
    match &query.kind {
        QueryKind::Eval { def } => {
            let d = lookup(def)?;
            if !d.params.is_empty() {
                return Err(fail(format!("{def} is not a closed definition")));
            }
        }
        QueryKind::Infer {
            state,
            pred,
            marginal,
        } => {
            let (state_ty, _) = resolve_state_pred(program, state, pred, &fail)?;
            if let Some(side) = marginal {
                if !matches!(side, 1 | 2) {
                    return Err(fail("marginal side must be 1 or 2".into()));
                }
                if !matches!(state_ty, Type::Tensor(..)) {
                    return Err(fail(format!(
                        "marginalisation needs a tensor state, found {state_ty}"
                    )));
                }
            }
        }
        QueryKind::Validity { state, pred } => {
            resolve_state_pred(program, state, pred, &fail)?;
        }
    }
    Ok(())
}

fn resolve_state_pred<'p>(
    program: &'p Program,
    state: &str,
    pred: &str,
    fail: &impl Fn(String) -> ProgramError,
) -> Result<(&'p Type, &'p Definition), ProgramError> {
    let s = program
        .def(state)
        .ok_or_else(|| fail(format!("no definition named {state}")))?;
    if !s.params.is_empty() {
        return Err(fail(format!("{state} is not a closed definition")));
    }
    let p = program
        .def(pred)
        .ok_or_else(|| fail(format!("no definition named {pred}")))?;
    if p.params.len() != 1 || p.ret != Type::two() {
        return Err(fail(format!(
            "{pred} is not a one-argument predicate"
        )));
    }
    let (_, param_ty) = p.params.iter().next().unwrap();
    if *param_ty != s.ret {
        return Err(fail(format!(
            "predicate {pred} expects {param_ty} but state {state} has type {}",
            s.ret
        )));
    }
    Ok((&s.ret, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn no_enums() -> EnumTable {
        EnumTable::new()
    }

    fn sc(text: &str) -> Scalar {
        text.parse().unwrap()
    }

    #[test]
    fn scalar_constant_types_at_two() {
        assert_eq!(
            infer_type(&no_enums(), &Context::empty(), &Term::one_over(2)).unwrap(),
            Type::two()
        );
    }

    #[test]
    fn contraction_is_rejected() {
        let ctx = Context::singleton("x", Type::two());
        let t = Term::pair(Term::var("x"), Term::var("x"));
        let err = infer_type(&no_enums(), &ctx, &t).unwrap_err();
        assert!(matches!(err.kind, TypeErrorKind::LinearityViolation(_)));
        assert_eq!(err.rule, "(pair)");
    }

    #[test]
    fn branches_may_share_variables() {
        // case r of inl _ -> y | inr _ -> y is fine; branches are additive
        let ctx = Context::from_pairs([
            ("r".to_string(), Type::two()),
            ("y".to_string(), Type::two()),
        ])
        .unwrap();
        let t = Term::case(Term::var("r"), "_", Term::var("y"), "_", Term::var("y"));
        assert_eq!(infer_type(&no_enums(), &ctx, &t).unwrap(), Type::two());

        // but the scrutinee may not reuse a branch variable
        let bad = Term::case(Term::var("y"), "_", Term::var("y"), "_", Term::top());
        assert!(infer_type(&no_enums(), &ctx, &bad).is_err());
    }

    #[test]
    fn unused_variables_are_allowed() {
        let ctx = Context::singleton("x", Type::two());
        assert_eq!(
            infer_type(&no_enums(), &ctx, &Term::top()).unwrap(),
            Type::two()
        );
    }

    #[test]
    fn instrument_test_must_be_local() {
        let ctx = Context::from_pairs([
            ("x".to_string(), Type::two()),
            ("y".to_string(), Type::two()),
        ])
        .unwrap();
        // test body reads the outer y
        let t = Term::instr("v", Term::var("y"), Term::var("x"));
        let err = infer_type(&no_enums(), &ctx, &t).unwrap_err();
        assert!(matches!(err.kind, TypeErrorKind::LinearityViolation(_)));
    }

    #[test]
    fn ovee_requires_disjointness() {
        let e = no_enums();
        let ret_top = Term::ret(Term::top());
        let t = Term::ovee(ret_top.clone(), ret_top);
        let err = infer_type(&e, &Context::empty(), &t).unwrap_err();
        assert!(matches!(err.kind, TypeErrorKind::SideConditionFailed(_)));
        assert_eq!(err.rule, "(ovee)");

        let ok = Term::ovee(
            Term::scale(Term::scalar(&sc("0.008")), Term::ret(Term::top()), Type::two()),
            Term::scale(Term::scalar(&sc("0.09504")), Term::ret(Term::bot()), Type::two()),
        );
        assert_eq!(
            infer_type(&e, &Context::empty(), &ok).unwrap(),
            Type::two().partial()
        );
    }

    #[test]
    fn disjointness_oracle() {
        let e = no_enums();
        let s = Term::scale(Term::scalar(&sc("0.008")), Term::ret(Term::top()), Type::two());
        let t = Term::scale(Term::scalar(&sc("0.09504")), Term::ret(Term::bot()), Type::two());
        assert!(check_disjoint(&e, &Context::empty(), &s, &t));
        assert!(check_disjoint(
            &e,
            &Context::empty(),
            &s,
            &Term::fail(Type::two())
        ));
        let ret_top = Term::ret(Term::top());
        assert!(!check_disjoint(&e, &Context::empty(), &ret_top, &ret_top));
    }

    #[test]
    fn leq_oracle() {
        let e = no_enums();
        let ctx = Context::empty();
        // fail ≤ anything
        assert!(check_leq(
            &e,
            &ctx,
            &Term::fail(Type::two()),
            &Term::ret(Term::one_over(2)),
        ));
        // ⊤ (mass 1 at *) is not below the half coin as a substate on 1
        assert!(!check_leq(&e, &ctx, &Term::top(), &Term::one_over(2)));
        assert!(check_leq(&e, &ctx, &Term::one_over(2), &Term::top()));
    }

    #[test]
    fn equality_oracle() {
        let e = no_enums();
        let ctx = Context::singleton("p", Type::two());
        // p ⊕ p⊥ = ⊤ needs p as a substate over 1: use the predicate itself
        let p = Term::var("p");
        let sum = Term::ovee(p.clone(), Term::ortho(p.clone()));
        assert!(check_equal(&e, &ctx, &sum, &Term::top()));
        assert!(check_equal(&e, &ctx, &p, &p));
        assert!(!check_equal(
            &e,
            &Context::empty(),
            &Term::one_over(2),
            &Term::one_over(3)
        ));
    }

    #[test]
    fn nonzero_domain_witness() {
        let e = no_enums();
        // Example 1's assert has domain 0.10304, so the least witness is 10
        let sub = Term::scale(
            Term::scalar(&sc("0.10304")),
            Term::ret(Term::top()),
            Type::two(),
        );
        assert_eq!(
            check_nonzero_domain(&e, &Context::empty(), &sub).unwrap(),
            BigUint::from(10u8)
        );
        // total states admit n = 2
        assert_eq!(
            check_nonzero_domain(&e, &Context::empty(), &Term::ret(Term::Star)).unwrap(),
            BigUint::from(2u8)
        );
        assert_eq!(
            check_nonzero_domain(&e, &Context::empty(), &Term::fail(Type::One)),
            Err(ZeroDomain)
        );
    }

    #[test]
    fn norm_in_open_context_warns() {
        let e = no_enums();
        let ctx = Context::singleton("x", Type::two());
        let t = Term::norm(Term::ret(Term::var("x")));
        let mut warnings = Vec::new();
        let ty = infer_type_with_warnings(&e, &ctx, &t, &mut warnings).unwrap();
        assert_eq!(ty, Type::two());
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn inlr_side_condition() {
        let e = no_enums();
        let ctx = Context::empty();
        // s and t with dom s = ker t: s has mass 1/3, t has mass 2/3
        let s = Term::scale(Term::one_over(3), Term::ret(Term::Star), Type::One);
        let t = Term::scale(
            Term::scalar(&sc("2/3")),
            Term::ret(Term::Star),
            Type::One,
        );
        assert!(infer_type(&e, &ctx, &Term::inlr(s.clone(), s.clone())).is_err());
        assert_eq!(
            infer_type(&e, &ctx, &Term::inlr(s, t)).unwrap(),
            Type::two()
        );
    }

    #[test]
    fn lft_side_condition() {
        let e = no_enums();
        let good = Term::lft(Term::ret(Term::one_over(2)));
        assert_eq!(
            infer_type(&e, &Context::empty(), &good).unwrap(),
            Type::two()
        );
        let bad = Term::lft(Term::scale(
            Term::one_over(2),
            Term::ret(Term::Star),
            Type::One,
        ));
        let err = infer_type(&e, &Context::empty(), &bad).unwrap_err();
        assert_eq!(err.rule, "(lft)");
    }

    #[test]
    fn weakening_and_exchange() {
        let e = no_enums();
        let t = Term::pair(Term::var("x"), Term::var("y"));
        let ab = Context::from_pairs([
            ("x".to_string(), Type::two()),
            ("y".to_string(), Type::One),
        ])
        .unwrap();
        let ba = Context::from_pairs([
            ("y".to_string(), Type::One),
            ("x".to_string(), Type::two()),
        ])
        .unwrap();
        let wide = Context::from_pairs([
            ("z".to_string(), Type::two()),
            ("x".to_string(), Type::two()),
            ("y".to_string(), Type::One),
        ])
        .unwrap();
        let expected = Type::tensor(Type::two(), Type::One);
        assert_eq!(infer_type(&e, &ab, &t).unwrap(), expected);
        assert_eq!(infer_type(&e, &ba, &t).unwrap(), expected);
        assert_eq!(infer_type(&e, &wide, &t).unwrap(), expected);
    }

    #[test]
    fn substitution_preserves_typing() {
        let e = no_enums();
        let s = Term::one_over(2);
        let t = Term::ortho(Term::var("x"));
        assert_eq!(
            infer_type(
                &e,
                &Context::singleton("x", Type::two()),
                &t
            )
            .unwrap(),
            Type::two()
        );
        assert_eq!(
            infer_type(&e, &Context::empty(), &t.substitute("x", &s)).unwrap(),
            Type::two()
        );
    }

    #[test]
    fn accepted_terms_evaluate_to_total_distributions() {
        let e = no_enums();
        let ctx = Context::singleton("x", Type::two());
        let samples = vec![
            Term::var("x"),
            Term::ovee(
                Term::scale(Term::one_over(4), Term::ret(Term::var("x")), Type::two()),
                Term::fail(Type::two()),
            ),
            Term::instr("v", Term::var("v"), Term::var("x")),
            Term::seq_and("x", Type::two(), Term::var("x"), Term::one_over(3)),
        ];
        for t in samples {
            infer_type(&e, &ctx, &t).unwrap();
            for (_, d) in eval_all(&e, &ctx, &t) {
                assert!(d.is_total(), "{t:?} lost mass");
            }
        }
    }

    #[test]
    fn unknown_and_empty_enums_are_reported() {
        let mut enums = EnumTable::new();
        enums.insert("Void".into(), vec![]);
        let t = Term::fail(Type::Const("Missing".into()));
        let err = infer_type(&enums, &Context::empty(), &t).unwrap_err();
        assert!(matches!(err.kind, TypeErrorKind::UnknownEnum(_)));
        let t2 = Term::fail(Type::Const("Void".into()));
        let err2 = infer_type(&enums, &Context::empty(), &t2).unwrap_err();
        assert!(matches!(err2.kind, TypeErrorKind::EmptyEnum(_)));
    }
}
