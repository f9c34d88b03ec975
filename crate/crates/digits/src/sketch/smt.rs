//! SMT-LIB2 constraint emission and the external-solver bridge.
//!
//! [`emit_constraints`] symbolically executes a loop-free sketch once per
//! input-output example and produces a self-contained script over real
//! arithmetic: hole constants with range assertions, one output-bit equality
//! per example, `(check-sat)`, and `(get-value ...)` for model extraction.
//!
//! Assert events are not part of the synthesis constraints; they feed the
//! postcondition only.

use std::collections::HashMap;
use std::io::Write as _;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use super::{BinOp, Expr, SketchAst, Stmt};

/// An emitted constraint script.
#[derive(Debug, Clone)]
pub struct ConstraintScript {
    pub text: String,
    /// True when a multiplication or division could not be constant-folded
    /// to a linear form; the script then declares `QF_NRA`.
    pub nonlinear: bool,
    pub hole_names: Vec<String>,
}

/// A symbolic value: a folded constant or an opaque term of known linearity.
#[derive(Debug, Clone)]
enum Val {
    Const(f64),
    /// (term, bool sort, degree): degree 1 = linear in holes, 2 = nonlinear.
    Term(String, bool, u8),
}

impl Val {
    fn degree(&self) -> u8 {
        match self {
            Val::Const(_) => 0,
            Val::Term(_, _, d) => *d,
        }
    }
}

fn real_lit(v: f64) -> String {
    // SMT-LIB decimals are exact; render the f64 as an exact dyadic rational
    // to avoid boundary mismatches between the solver and the evaluator.
    if v == 0.0 {
        return "0.0".to_string();
    }
    if v < 0.0 {
        return format!("(- {})", real_lit(-v));
    }
    if v == v.trunc() && v.abs() < 1e15 {
        return format!("{}.0", v as i64);
    }
    let (mant, exp) = frexp_exact(v);
    if exp >= 0 {
        format!("{}.0", mant as f64 * (exp as f64).exp2())
    } else {
        format!("(/ {mant}.0 {}.0)", 2f64.powi(-exp))
    }
}

/// Decompose a positive finite f64 into (mantissa, exponent) with
/// value = mantissa * 2^exponent and mantissa an integer.
fn frexp_exact(v: f64) -> (u64, i32) {
    let bits = v.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut exp) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), raw_exp - 1075)
    };
    while mant & 1 == 0 && mant != 0 {
        mant >>= 1;
        exp += 1;
    }
    (mant, exp)
}

fn as_real(v: &Val) -> String {
    match v {
        Val::Const(c) => real_lit(*c),
        Val::Term(t, false, _) => t.clone(),
        Val::Term(t, true, _) => format!("(ite {t} 1.0 0.0)"),
    }
}

fn as_bool(v: &Val) -> String {
    match v {
        Val::Const(c) => {
            if *c != 0.0 {
                "true".into()
            } else {
                "false".into()
            }
        }
        Val::Term(t, true, _) => t.clone(),
        Val::Term(t, false, _) => format!("(not (= {t} 0.0))"),
    }
}

struct Emitter {
    nonlinear: bool,
}

impl Emitter {
    fn expr(&mut self, e: &Expr, env: &HashMap<String, Val>) -> Val {
        match e {
            Expr::Num(v) => Val::Const(*v),
            Expr::Var(name) => env
                .get(name)
                .unwrap_or_else(|| panic!("unbound variable {name}"))
                .clone(),
            Expr::Hole(i) => Val::Term(format!("h{i}"), false, 1),
            Expr::Neg(a) => {
                let v = self.expr(a, env);
                match v {
                    Val::Const(c) => Val::Const(-c),
                    _ => Val::Term(format!("(- {})", as_real(&v)), false, v.degree()),
                }
            }
            Expr::Not(a) => {
                let v = self.expr(a, env);
                match v {
                    Val::Const(c) => Val::Const(if c != 0.0 { 0.0 } else { 1.0 }),
                    _ => Val::Term(format!("(not {})", as_bool(&v)), true, v.degree()),
                }
            }
            Expr::Abs(a) => {
                // abs desugars to if-then-else before emission
                let v = self.expr(a, env);
                match v {
                    Val::Const(c) => Val::Const(c.abs()),
                    _ => {
                        let t = as_real(&v);
                        Val::Term(
                            format!("(ite (>= {t} 0.0) {t} (- {t}))"),
                            false,
                            v.degree(),
                        )
                    }
                }
            }
            Expr::Bin(op, a, b) => {
                let l = self.expr(a, env);
                let r = self.expr(b, env);
                self.bin(*op, l, r)
            }
        }
    }

    fn bin(&mut self, op: BinOp, l: Val, r: Val) -> Val {
        use BinOp::*;
        if let (Val::Const(a), Val::Const(b)) = (&l, &r) {
            let (a, b) = (*a, *b);
            let truth = |v: bool| Val::Const(if v { 1.0 } else { 0.0 });
            return match op {
                Add => Val::Const(a + b),
                Sub => Val::Const(a - b),
                Mul => Val::Const(a * b),
                Div => Val::Const(a / b),
                And => truth(a != 0.0 && b != 0.0),
                Or => truth(a != 0.0 || b != 0.0),
                Lt => truth(a < b),
                Le => truth(a <= b),
                Gt => truth(a > b),
                Ge => truth(a >= b),
                Eq => truth(a == b),
                Ne => truth(a != b),
            };
        }
        let deg_arith = |l: &Val, r: &Val| l.degree().max(r.degree());
        match op {
            Add | Sub => {
                let sym = if op == Add { "+" } else { "-" };
                Val::Term(
                    format!("({sym} {} {})", as_real(&l), as_real(&r)),
                    false,
                    deg_arith(&l, &r),
                )
            }
            Mul => {
                let deg = l.degree() + r.degree();
                if deg > 1 {
                    self.nonlinear = true;
                }
                Val::Term(
                    format!("(* {} {})", as_real(&l), as_real(&r)),
                    false,
                    deg.min(2),
                )
            }
            Div => {
                if r.degree() > 0 {
                    self.nonlinear = true;
                }
                Val::Term(
                    format!("(/ {} {})", as_real(&l), as_real(&r)),
                    false,
                    (l.degree() + r.degree()).min(2),
                )
            }
            And | Or => {
                let sym = if op == And { "and" } else { "or" };
                Val::Term(
                    format!("({sym} {} {})", as_bool(&l), as_bool(&r)),
                    true,
                    deg_arith(&l, &r),
                )
            }
            Lt | Le | Gt | Ge => {
                let sym = match op {
                    Lt => "<",
                    Le => "<=",
                    Gt => ">",
                    _ => ">=",
                };
                Val::Term(
                    format!("({sym} {} {})", as_real(&l), as_real(&r)),
                    true,
                    deg_arith(&l, &r),
                )
            }
            Eq | Ne => {
                let eq = format!("(= {} {})", as_real(&l), as_real(&r));
                let t = if op == Eq {
                    eq
                } else {
                    format!("(not {eq})")
                };
                Val::Term(t, true, deg_arith(&l, &r))
            }
        }
    }

    /// Symbolic execution of a statement list. `returned`/`retval` thread
    /// the early-return state.
    fn exec(
        &mut self,
        stmts: &[Stmt],
        env: &mut HashMap<String, Val>,
        returned: &mut Val,
        retval: &mut Val,
    ) {
        for s in stmts {
            match s {
                Stmt::Decl { name, init } => {
                    let v = self.expr(init, env);
                    // A return before a declaration makes the value
                    // irrelevant; no guard needed for fresh names.
                    env.insert(name.clone(), v);
                }
                Stmt::Assign { name, value } => {
                    let v = self.expr(value, env);
                    let guarded = self.guard(returned, env.get(name), v);
                    env.insert(name.clone(), guarded);
                }
                Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    let c = self.expr(cond, env);
                    match c {
                        Val::Const(v) => {
                            let branch = if v != 0.0 { then_branch } else { else_branch };
                            self.exec(branch, env, returned, retval);
                        }
                        _ => {
                            let ct = as_bool(&c);
                            let deg = c.degree();
                            let mut env_t = env.clone();
                            let mut ret_t = returned.clone();
                            let mut val_t = retval.clone();
                            self.exec(then_branch, &mut env_t, &mut ret_t, &mut val_t);
                            let mut env_e = env.clone();
                            let mut ret_e = returned.clone();
                            let mut val_e = retval.clone();
                            self.exec(else_branch, &mut env_e, &mut ret_e, &mut val_e);
                            let keys: Vec<String> = env_t
                                .keys()
                                .filter(|k| env_e.contains_key(*k))
                                .cloned()
                                .collect();
                            for k in keys {
                                let vt = env_t[&k].clone();
                                let ve = env_e[&k].clone();
                                env.insert(k, self.ite(&ct, deg, vt, ve, false));
                            }
                            *returned = self.ite(&ct, deg, ret_t, ret_e, true);
                            *retval = self.ite(&ct, deg, val_t, val_e, false);
                        }
                    }
                }
                Stmt::For { .. } => panic!("loop in loop-free sketch"),
                Stmt::Assert { .. } => {} // postcondition only
                Stmt::Return(e) => {
                    let v = self.expr(e, env);
                    // paths that already returned keep their earlier value
                    *retval = self.guard(returned, Some(retval), v);
                    *returned = Val::Const(1.0);
                }
            }
        }
    }

    fn ite(&mut self, cond: &str, cond_deg: u8, t: Val, e: Val, boolean: bool) -> Val {
        if boolean {
            match (&t, &e) {
                (Val::Const(a), Val::Const(b)) if a == b => return t,
                _ => {}
            }
            let deg = cond_deg.max(t.degree()).max(e.degree());
            Val::Term(
                format!("(ite {cond} {} {})", as_bool(&t), as_bool(&e)),
                true,
                deg,
            )
        } else {
            match (&t, &e) {
                (Val::Const(a), Val::Const(b)) if a == b => return t,
                _ => {}
            }
            let deg = cond_deg.max(t.degree()).max(e.degree());
            Val::Term(
                format!("(ite {cond} {} {})", as_real(&t), as_real(&e)),
                false,
                deg,
            )
        }
    }

    /// `if already-returned then old else new`.
    fn guard(&mut self, returned: &Val, old: Option<&Val>, new: Val) -> Val {
        match returned {
            Val::Const(c) if *c != 0.0 => old.cloned().unwrap_or(new),
            Val::Const(_) => new,
            Val::Term(..) => {
                let cond = as_bool(returned);
                let deg = returned.degree();
                let old = old.cloned().unwrap_or(Val::Const(0.0));
                self.ite(&cond, deg, old, new, false)
            }
        }
    }
}

/// Emits a constraint script asserting that some hole assignment makes the
/// sketch reproduce every example's output bit.
pub fn emit_constraints(ast: &SketchAst, examples: &[(Vec<f64>, bool)]) -> ConstraintScript {
    assert!(ast.is_loop_free(), "emit_constraints requires a loop-free sketch");
    let mut em = Emitter { nonlinear: false };
    let hole_names: Vec<String> = (0..ast.holes.len()).map(|i| format!("h{i}")).collect();

    let mut body = String::new();
    for (j, (x, bit)) in examples.iter().enumerate() {
        assert_eq!(x.len(), ast.inputs.len(), "example dimension mismatch");
        let mut env: HashMap<String, Val> = ast
            .inputs
            .iter()
            .cloned()
            .zip(x.iter().map(|v| Val::Const(*v)))
            .collect();
        let mut returned = Val::Const(0.0);
        let mut retval = Val::Const(0.0);
        em.exec(&ast.body, &mut env, &mut returned, &mut retval);
        // value 0 on the (grammar-excluded) fall-through path
        let out = em.guard(&returned, Some(&retval), Val::Const(0.0));
        let want = if *bit { "1.0" } else { "0.0" };
        body.push_str(&format!("; example {j}\n(assert (= {} {want}))\n", as_real(&out)));
    }

    let mut text = String::new();
    text.push_str(&format!(
        "(set-logic {})\n",
        if em.nonlinear { "QF_NRA" } else { "QF_LRA" }
    ));
    for h in &ast.holes {
        text.push_str(&format!("(declare-const h{} Real)\n", h.index));
        text.push_str(&format!("(assert (<= {} h{}))\n", real_lit(h.lo), h.index));
        text.push_str(&format!("(assert (<= h{} {}))\n", h.index, real_lit(h.hi)));
    }
    text.push_str(&body);
    text.push_str("(check-sat)\n");
    if !hole_names.is_empty() {
        text.push_str(&format!("(get-value ({}))\n", hole_names.join(" ")));
    }
    ConstraintScript {
        text,
        nonlinear: em.nonlinear,
        hole_names,
    }
}

/// Configuration for the external SMT-LIB2 solver child process.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Executable path; the script is passed as a `.smt2` file argument.
    pub command: String,
    pub extra_args: Vec<String>,
    pub timeout: Duration,
}

impl SolverConfig {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            extra_args: Vec::new(),
            timeout: Duration::from_millis(10_000),
        }
    }

    /// Looks for a configured solver: the `DIGITS_SOLVER` environment
    /// variable, else the first of `z3`, `cvc5`, `cvc4` on `PATH`.
    pub fn discover() -> Option<Self> {
        if let Ok(cmd) = std::env::var("DIGITS_SOLVER") {
            if !cmd.is_empty() {
                return Some(Self::new(cmd));
            }
        }
        for cand in ["z3", "cvc5", "cvc4"] {
            let found = std::env::var_os("PATH").is_some_and(|paths| {
                std::env::split_paths(&paths).any(|dir| dir.join(cand).is_file())
            });
            if found {
                return Some(Self::new(cand));
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverOutcome {
    Sat(Vec<f64>),
    Unsat,
    /// `unknown` answer or timeout; reported distinctly from unsat.
    Unknown { reason: String },
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("failed to launch solver `{command}`: {source}")]
    Launch {
        command: String,
        source: std::io::Error,
    },
    #[error("solver crashed: {0}")]
    Crashed(String),
    #[error("could not parse solver output: {0}")]
    BadOutput(String),
}

/// Runs the script through the solver child process and parses the verdict
/// plus model values (in hole order).
pub fn run_solver(
    script: &ConstraintScript,
    cfg: &SolverConfig,
) -> Result<SolverOutcome, SolverError> {
    let mut file = tempfile::Builder::new()
        .suffix(".smt2")
        .tempfile()
        .map_err(|e| SolverError::Crashed(format!("tempfile: {e}")))?;
    file.write_all(script.text.as_bytes())
        .map_err(|e| SolverError::Crashed(format!("tempfile write: {e}")))?;
    file.flush().ok();

    let mut child = Command::new(&cfg.command)
        .args(&cfg.extra_args)
        .arg(file.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SolverError::Launch {
            command: cfg.command.clone(),
            source: e,
        })?;

    let start = Instant::now();
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if start.elapsed() > cfg.timeout {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Ok(SolverOutcome::Unknown {
                        reason: format!("timeout after {:?}", cfg.timeout),
                    });
                }
                std::thread::sleep(Duration::from_millis(2));
            }
            Err(e) => return Err(SolverError::Crashed(format!("wait: {e}"))),
        }
    }
    let out = child
        .wait_with_output()
        .map_err(|e| SolverError::Crashed(format!("output: {e}")))?;
    let stdout = String::from_utf8_lossy(&out.stdout);
    let mut lines = stdout.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("unsat") => Ok(SolverOutcome::Unsat),
        Some("unknown") => Ok(SolverOutcome::Unknown {
            reason: "solver answered unknown".into(),
        }),
        Some("sat") => {
            let rest: String = lines.collect::<Vec<_>>().join(" ");
            let model = parse_model(&rest, &script.hole_names)?;
            Ok(SolverOutcome::Sat(model))
        }
        other => Err(SolverError::BadOutput(format!(
            "unexpected verdict {:?}; stderr: {}",
            other,
            String::from_utf8_lossy(&out.stderr)
        ))),
    }
}

/// Parses `((h0 (/ 1 2)) (h1 (- 3.0)) ...)` into values in hole order.
fn parse_model(text: &str, hole_names: &[String]) -> Result<Vec<f64>, SolverError> {
    let sexp = parse_sexp(text)?;
    let mut map = HashMap::new();
    if let Sexp::List(entries) = sexp {
        for entry in entries {
            if let Sexp::List(pair) = entry {
                if pair.len() == 2 {
                    if let Sexp::Atom(name) = &pair[0] {
                        map.insert(name.clone(), sexp_value(&pair[1])?);
                    }
                }
            }
        }
    }
    hole_names
        .iter()
        .map(|n| {
            map.get(n)
                .copied()
                .ok_or_else(|| SolverError::BadOutput(format!("model missing {n}")))
        })
        .collect()
}

#[derive(Debug)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn parse_sexp(text: &str) -> Result<Sexp, SolverError> {
    let mut toks = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
                toks.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    toks.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        toks.push(cur);
    }
    let mut pos = 0;
    let out = parse_sexp_at(&toks, &mut pos)?;
    Ok(out)
}

fn parse_sexp_at(toks: &[String], pos: &mut usize) -> Result<Sexp, SolverError> {
    if *pos >= toks.len() {
        return Err(SolverError::BadOutput("truncated s-expression".into()));
    }
    let t = &toks[*pos];
    *pos += 1;
    if t == "(" {
        let mut items = Vec::new();
        while *pos < toks.len() && toks[*pos] != ")" {
            items.push(parse_sexp_at(toks, pos)?);
        }
        if *pos >= toks.len() {
            return Err(SolverError::BadOutput("unbalanced parentheses".into()));
        }
        *pos += 1; // ')'
        Ok(Sexp::List(items))
    } else if t == ")" {
        Err(SolverError::BadOutput("unexpected `)`".into()))
    } else {
        Ok(Sexp::Atom(t.clone()))
    }
}

fn sexp_value(s: &Sexp) -> Result<f64, SolverError> {
    match s {
        Sexp::Atom(a) => a
            .parse::<f64>()
            .map_err(|_| SolverError::BadOutput(format!("non-numeric value {a:?}"))),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), v] if op == "-" => Ok(-sexp_value(v)?),
            [Sexp::Atom(op), a, b] if op == "/" => Ok(sexp_value(a)? / sexp_value(b)?),
            [Sexp::Atom(op), v] if op == "to_real" => sexp_value(v),
            _ => Err(SolverError::BadOutput(format!("unrecognized value {s:?}"))),
        },
    }
}
