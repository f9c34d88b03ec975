//! The loop-free sketch language: C-style surface syntax with `??(lo,hi)`
//! holes and `assert(event; theta)` statements.
//!
//! Bounded `for` loops are surface syntax only; [`SketchAst::unroll`]
//! eliminates them before evaluation or constraint emission.

mod parser;
pub mod smt;

pub use parser::{parse, ParseError};

use serde::{Deserialize, Serialize};

/// A hole `??(lo, hi)`: a constant to be synthesized within `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hole {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl BinOp {
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Hole(usize),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Abs(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    /// `double x = e;` or `int x = e;`
    Decl { name: String, init: Expr },
    /// `x = e;`
    Assign { name: String, value: Expr },
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
    },
    /// `for(int i = 0; i < COUNT; i = i + 1) { ... }` — constant trip count.
    For {
        var: String,
        count: u32,
        body: Vec<Stmt>,
    },
    /// `assert(event; theta);` — feeds the postcondition, not synthesis.
    Assert { event: Expr, theta: f64 },
    Return(Expr),
}

/// An assert statement's metadata, in static statement order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssertInfo {
    pub label: String,
    pub theta: f64,
}

/// A parsed sketch: one function with real-vector inputs and a {0,1} return.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchAst {
    pub name: String,
    pub inputs: Vec<String>,
    pub body: Vec<Stmt>,
    pub holes: Vec<Hole>,
}

/// A complete hole assignment, indexed by hole order of appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct HoleAssignment {
    pub values: Vec<f64>,
}

impl HoleAssignment {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Checks each value lies in its hole's range.
    pub fn in_ranges(&self, ast: &SketchAst) -> bool {
        self.values.len() == ast.holes.len()
            && ast
                .holes
                .iter()
                .all(|h| h.lo <= self.values[h.index] && self.values[h.index] <= h.hi)
    }
}

impl SketchAst {
    pub fn is_loop_free(&self) -> bool {
        fn free(stmts: &[Stmt]) -> bool {
            stmts.iter().all(|s| match s {
                Stmt::For { .. } => false,
                Stmt::If {
                    then_branch,
                    else_branch,
                    ..
                } => free(then_branch) && free(else_branch),
                _ => true,
            })
        }
        free(&self.body)
    }

    /// Eliminates all bounded loops by syntactic unrolling: the body is
    /// duplicated once per iteration with the loop counter substituted as a
    /// constant, so in-loop asserts are duplicated once per iteration.
    /// A loop-free AST is returned unchanged.
    pub fn unroll(&self) -> SketchAst {
        fn subst(e: &Expr, var: &str, val: f64) -> Expr {
            match e {
                Expr::Var(v) if v == var => Expr::Num(val),
                Expr::Num(_) | Expr::Var(_) | Expr::Hole(_) => e.clone(),
                Expr::Neg(a) => Expr::Neg(Box::new(subst(a, var, val))),
                Expr::Not(a) => Expr::Not(Box::new(subst(a, var, val))),
                Expr::Abs(a) => Expr::Abs(Box::new(subst(a, var, val))),
                Expr::Bin(op, a, b) => Expr::Bin(
                    *op,
                    Box::new(subst(a, var, val)),
                    Box::new(subst(b, var, val)),
                ),
            }
        }
        fn subst_stmts(stmts: &[Stmt], var: &str, val: f64) -> Vec<Stmt> {
            stmts
                .iter()
                .map(|s| match s {
                    Stmt::Decl { name, init } => Stmt::Decl {
                        name: name.clone(),
                        init: subst(init, var, val),
                    },
                    Stmt::Assign { name, value } => Stmt::Assign {
                        name: name.clone(),
                        value: subst(value, var, val),
                    },
                    Stmt::If {
                        cond,
                        then_branch,
                        else_branch,
                    } => Stmt::If {
                        cond: subst(cond, var, val),
                        then_branch: subst_stmts(then_branch, var, val),
                        else_branch: subst_stmts(else_branch, var, val),
                    },
                    Stmt::For {
                        var: v,
                        count,
                        body,
                    } => Stmt::For {
                        var: v.clone(),
                        count: *count,
                        body: if v == var {
                            body.clone() // inner loop shadows the counter
                        } else {
                            subst_stmts(body, var, val)
                        },
                    },
                    Stmt::Assert { event, theta } => Stmt::Assert {
                        event: subst(event, var, val),
                        theta: *theta,
                    },
                    Stmt::Return(e) => Stmt::Return(subst(e, var, val)),
                })
                .collect()
        }
        fn unroll_stmts(stmts: &[Stmt]) -> Vec<Stmt> {
            let mut out = Vec::new();
            for s in stmts {
                match s {
                    Stmt::For { var, count, body } => {
                        for i in 0..*count {
                            out.extend(unroll_stmts(&subst_stmts(body, var, i as f64)));
                        }
                    }
                    Stmt::If {
                        cond,
                        then_branch,
                        else_branch,
                    } => out.push(Stmt::If {
                        cond: cond.clone(),
                        then_branch: unroll_stmts(then_branch),
                        else_branch: unroll_stmts(else_branch),
                    }),
                    other => out.push(other.clone()),
                }
            }
            out
        }
        SketchAst {
            name: self.name.clone(),
            inputs: self.inputs.clone(),
            body: unroll_stmts(&self.body),
            holes: self.holes.clone(),
        }
    }

    /// Assert metadata in static statement order (loop-free ASTs).
    pub fn asserts(&self) -> Vec<AssertInfo> {
        fn walk(stmts: &[Stmt], out: &mut Vec<AssertInfo>) {
            for s in stmts {
                match s {
                    Stmt::Assert { theta, .. } => out.push(AssertInfo {
                        label: format!("event{}", out.len()),
                        theta: *theta,
                    }),
                    Stmt::If {
                        then_branch,
                        else_branch,
                        ..
                    } => {
                        walk(then_branch, out);
                        walk(else_branch, out);
                    }
                    Stmt::For { body, .. } => walk(body, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.body, &mut out);
        out
    }

    /// Evaluates a loop-free sketch on input `x` with a complete hole
    /// assignment. Returns the output bit and the truth value of each assert
    /// event (static order; asserts on untaken branches record `true`).
    pub fn evaluate(&self, holes: &HoleAssignment, x: &[f64]) -> (bool, Vec<bool>) {
        assert!(self.is_loop_free(), "evaluate requires a loop-free sketch");
        assert!(
            holes.values.len() == self.holes.len(),
            "incomplete hole assignment: {} of {} holes",
            holes.values.len(),
            self.holes.len()
        );
        assert_eq!(x.len(), self.inputs.len(), "input dimension mismatch");

        let mut env: std::collections::HashMap<String, f64> = self
            .inputs
            .iter()
            .cloned()
            .zip(x.iter().copied())
            .collect();
        let mut events = vec![true; self.asserts().len()];
        let mut next_assert = 0usize;
        let ret = eval_stmts(&self.body, holes, &mut env, &mut events, &mut next_assert);
        (ret.map_or(false, |v| v != 0.0), events)
    }

    /// Renders the AST back to surface syntax. `parse(print(ast))` is
    /// structurally equal to `ast` for loop-free ASTs.
    pub fn print(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("int {}(", self.name));
        for (i, name) in self.inputs.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&format!("double {name}"));
        }
        out.push_str(") {\n");
        print_stmts(&self.body, &self.holes, 1, &mut out);
        out.push_str("}\n");
        out
    }
}

fn eval_expr(e: &Expr, holes: &HoleAssignment, env: &std::collections::HashMap<String, f64>) -> f64 {
    match e {
        Expr::Num(v) => *v,
        Expr::Var(name) => *env
            .get(name)
            .unwrap_or_else(|| panic!("unbound variable {name}")),
        Expr::Hole(i) => holes.values[*i],
        Expr::Neg(a) => -eval_expr(a, holes, env),
        Expr::Not(a) => {
            if eval_expr(a, holes, env) != 0.0 {
                0.0
            } else {
                1.0
            }
        }
        Expr::Abs(a) => eval_expr(a, holes, env).abs(),
        Expr::Bin(op, a, b) => {
            let l = eval_expr(a, holes, env);
            let r = eval_expr(b, holes, env);
            let truth = |v: bool| if v { 1.0 } else { 0.0 };
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => l / r,
                BinOp::And => truth(l != 0.0 && r != 0.0),
                BinOp::Or => truth(l != 0.0 || r != 0.0),
                BinOp::Lt => truth(l < r),
                BinOp::Le => truth(l <= r),
                BinOp::Gt => truth(l > r),
                BinOp::Ge => truth(l >= r),
                BinOp::Eq => truth(l == r),
                BinOp::Ne => truth(l != r),
            }
        }
    }
}

fn eval_stmts(
    stmts: &[Stmt],
    holes: &HoleAssignment,
    env: &mut std::collections::HashMap<String, f64>,
    events: &mut [bool],
    next_assert: &mut usize,
) -> Option<f64> {
    for s in stmts {
        match s {
            Stmt::Decl { name, init } | Stmt::Assign { name, value: init } => {
                let v = eval_expr(init, holes, env);
                env.insert(name.clone(), v);
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let taken = eval_expr(cond, holes, env) != 0.0;
                // Keep assert indexing aligned with static order even for
                // the untaken branch.
                let (run, skip) = if taken {
                    (then_branch, else_branch)
                } else {
                    (else_branch, then_branch)
                };
                if taken {
                    if let Some(v) = eval_stmts(run, holes, env, events, next_assert) {
                        *next_assert += count_asserts(skip);
                        return Some(v);
                    }
                    *next_assert += count_asserts(skip);
                } else {
                    *next_assert += count_asserts(skip);
                    if let Some(v) = eval_stmts(run, holes, env, events, next_assert) {
                        return Some(v);
                    }
                }
            }
            Stmt::For { .. } => unreachable!("loop in loop-free sketch"),
            Stmt::Assert { event, .. } => {
                events[*next_assert] = eval_expr(event, holes, env) != 0.0;
                *next_assert += 1;
            }
            Stmt::Return(e) => return Some(eval_expr(e, holes, env)),
        }
    }
    None
}

fn count_asserts(stmts: &[Stmt]) -> usize {
    stmts
        .iter()
        .map(|s| match s {
            Stmt::Assert { .. } => 1,
            Stmt::If {
                then_branch,
                else_branch,
                ..
            } => count_asserts(then_branch) + count_asserts(else_branch),
            Stmt::For { body, .. } => count_asserts(body),
            _ => 0,
        })
        .sum()
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn print_expr(e: &Expr, holes: &[Hole], out: &mut String) {
    match e {
        Expr::Num(v) => out.push_str(&fmt_num(*v)),
        Expr::Var(n) => out.push_str(n),
        Expr::Hole(i) => {
            out.push_str(&format!("??({}, {})", fmt_num(holes[*i].lo), fmt_num(holes[*i].hi)))
        }
        Expr::Neg(a) => {
            out.push_str("(-");
            print_expr(a, holes, out);
            out.push(')');
        }
        Expr::Not(a) => {
            out.push_str("(!");
            print_expr(a, holes, out);
            out.push(')');
        }
        Expr::Abs(a) => {
            out.push_str("abs(");
            print_expr(a, holes, out);
            out.push(')');
        }
        Expr::Bin(op, a, b) => {
            out.push('(');
            print_expr(a, holes, out);
            let sym = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::And => "&&",
                BinOp::Or => "||",
                BinOp::Lt => "<",
                BinOp::Le => "<=",
                BinOp::Gt => ">",
                BinOp::Ge => ">=",
                BinOp::Eq => "==",
                BinOp::Ne => "!=",
            };
            out.push_str(&format!(" {sym} "));
            print_expr(b, holes, out);
            out.push(')');
        }
    }
}

fn print_stmts(stmts: &[Stmt], holes: &[Hole], indent: usize, out: &mut String) {
    let pad = "    ".repeat(indent);
    for s in stmts {
        match s {
            Stmt::Decl { name, init } => {
                out.push_str(&format!("{pad}double {name} = "));
                print_expr(init, holes, out);
                out.push_str(";\n");
            }
            Stmt::Assign { name, value } => {
                out.push_str(&format!("{pad}{name} = "));
                print_expr(value, holes, out);
                out.push_str(";\n");
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                out.push_str(&format!("{pad}if ("));
                print_expr(cond, holes, out);
                out.push_str(") {\n");
                print_stmts(then_branch, holes, indent + 1, out);
                if else_branch.is_empty() {
                    out.push_str(&format!("{pad}}}\n"));
                } else {
                    out.push_str(&format!("{pad}}} else {{\n"));
                    print_stmts(else_branch, holes, indent + 1, out);
                    out.push_str(&format!("{pad}}}\n"));
                }
            }
            Stmt::For { var, count, body } => {
                out.push_str(&format!(
                    "{pad}for (int {var} = 0; {var} < {count}; {var} = {var} + 1) {{\n"
                ));
                print_stmts(body, holes, indent + 1, out);
                out.push_str(&format!("{pad}}}\n"));
            }
            Stmt::Assert { event, theta } => {
                out.push_str(&format!("{pad}assert("));
                print_expr(event, holes, out);
                out.push_str(&format!("; {theta});\n"));
            }
            Stmt::Return(e) => {
                out.push_str(&format!("{pad}return "));
                print_expr(e, holes, out);
                out.push_str(";\n");
            }
        }
    }
}

/// The interval membership sketch: one hole `a`, returns 1 iff
/// `0 <= x && x <= a`.
pub fn interval_sketch() -> SketchAst {
    parse(
        "int prog(double x) {\n\
             double a = ??(0, 1);\n\
             if (0 <= x && x <= a) {\n\
                 return 1;\n\
             }\n\
             return 0;\n\
         }",
    )
    .expect("builtin sketch parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_sketch_eval() {
        let ast = interval_sketch();
        assert_eq!(ast.holes.len(), 1);
        let holes = HoleAssignment::new(vec![0.5]);
        assert!(ast.evaluate(&holes, &[0.4]).0);
        assert!(!ast.evaluate(&holes, &[0.6]).0);
    }

    #[test]
    fn unroll_fixpoint_on_loop_free() {
        let ast = interval_sketch();
        assert_eq!(ast.unroll(), ast);
    }

    #[test]
    fn unroll_duplicates_in_loop_asserts() {
        let src = "int f(double x) {\n\
                       double acc = x;\n\
                       for (int i = 0; i < 5; i = i + 1) {\n\
                           acc = acc + 1;\n\
                           assert(acc < 120; 0.9);\n\
                       }\n\
                       if (acc > 3) { return 1; }\n\
                       return 0;\n\
                   }";
        let ast = parse(src).unwrap();
        assert_eq!(ast.asserts().len(), 1);
        let unrolled = ast.unroll();
        assert!(unrolled.is_loop_free());
        assert_eq!(unrolled.asserts().len(), 5);
        let (bit, events) = unrolled.evaluate(&HoleAssignment::new(vec![]), &[0.0]);
        assert!(bit);
        assert_eq!(events, vec![true; 5]);
    }

    #[test]
    fn loop_counter_substitution() {
        let src = "int f(double x) {\n\
                       double acc = 0;\n\
                       for (int i = 0; i < 4; i = i + 1) {\n\
                           acc = acc + i;\n\
                       }\n\
                       if (acc == 6) { return 1; }\n\
                       return 0;\n\
                   }";
        let ast = parse(src).unwrap().unroll();
        assert!(ast.evaluate(&HoleAssignment::new(vec![]), &[0.0]).0);
    }

    #[test]
    fn untaken_branch_asserts_stay_true() {
        let src = "int f(double x) {\n\
                       if (x > 0) {\n\
                           assert(x > 100; 0.9);\n\
                       } else {\n\
                           assert(x < -100; 0.9);\n\
                       }\n\
                       return 0;\n\
                   }";
        let ast = parse(src).unwrap();
        let (_, events) = ast.evaluate(&HoleAssignment::new(vec![]), &[1.0]);
        assert_eq!(events, vec![false, true]);
        let (_, events) = ast.evaluate(&HoleAssignment::new(vec![]), &[-1.0]);
        assert_eq!(events, vec![true, false]);
    }
}
