//! Probabilistic postconditions: Boolean combinations of arithmetic
//! inequalities over probability terms `Pr[B]`.
//!
//! Conditioning is a ratio of two `Pr` terms, e.g.
//! `Pr[ret == 1 && x1 <= 0] / Pr[x1 <= 0] >= 0.75`.

use std::fmt;

/// A scalar term inside a `Pr[...]` event: an input coordinate, the output
/// bit (`ret`, valued 0/1), an instrumented assert event (`eventK`, valued
/// 0/1), or a constant.
#[derive(Debug, Clone, PartialEq)]
pub enum EventTerm {
    Const(f64),
    /// 0-based input coordinate.
    Input(usize),
    Ret,
    /// 0-based assert-event index.
    Event(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

/// Boolean expression over one execution `(x, ret, events)`.
#[derive(Debug, Clone, PartialEq)]
pub enum EventExpr {
    True,
    Cmp(CmpOp, EventTerm, EventTerm),
    And(Box<EventExpr>, Box<EventExpr>),
    Or(Box<EventExpr>, Box<EventExpr>),
    Not(Box<EventExpr>),
}

/// Arithmetic over probability terms.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbExpr {
    Const(f64),
    Prob(EventExpr),
    Add(Box<ProbExpr>, Box<ProbExpr>),
    Sub(Box<ProbExpr>, Box<ProbExpr>),
    Mul(Box<ProbExpr>, Box<ProbExpr>),
    Div(Box<ProbExpr>, Box<ProbExpr>),
}

/// The Boolean layer: comparisons of probability expressions.
#[derive(Debug, Clone, PartialEq)]
pub enum Postcondition {
    Cmp(CmpOp, ProbExpr, ProbExpr),
    And(Box<Postcondition>, Box<Postcondition>),
    Or(Box<Postcondition>, Box<Postcondition>),
    Not(Box<Postcondition>),
}

impl Postcondition {
    /// `Pr[true] >= 0` — vacuously accepted.
    pub fn vacuous() -> Self {
        Postcondition::Cmp(CmpOp::Ge, ProbExpr::Prob(EventExpr::True), ProbExpr::Const(0.0))
    }

    /// The conjunction `AND_i Pr[event_i] > theta_i` over instrumented
    /// assert events.
    pub fn from_asserts(asserts: &[crate::sketch::AssertInfo]) -> Self {
        let mut it = asserts.iter().enumerate().map(|(i, a)| {
            Postcondition::Cmp(
                CmpOp::Gt,
                ProbExpr::Prob(EventExpr::Cmp(
                    CmpOp::Eq,
                    EventTerm::Event(i),
                    EventTerm::Const(1.0),
                )),
                ProbExpr::Const(a.theta),
            )
        });
        let first = it.next().unwrap_or_else(Postcondition::vacuous);
        it.fold(first, |acc, c| Postcondition::And(Box::new(acc), Box::new(c)))
    }

    /// Number of distinct `Pr` terms (for union-bound confidence splitting).
    pub fn prob_term_count(&self) -> usize {
        fn count_p(p: &ProbExpr) -> usize {
            match p {
                ProbExpr::Const(_) => 0,
                ProbExpr::Prob(_) => 1,
                ProbExpr::Add(a, b)
                | ProbExpr::Sub(a, b)
                | ProbExpr::Mul(a, b)
                | ProbExpr::Div(a, b) => count_p(a) + count_p(b),
            }
        }
        match self {
            Postcondition::Cmp(_, a, b) => count_p(a) + count_p(b),
            Postcondition::And(a, b) | Postcondition::Or(a, b) => {
                a.prob_term_count() + b.prob_term_count()
            }
            Postcondition::Not(a) => a.prob_term_count(),
        }
    }
}

/// One execution record used to estimate probability terms.
pub struct Execution<'a> {
    pub x: &'a [f64],
    pub ret: bool,
    pub events: &'a [bool],
}

impl EventTerm {
    fn value(&self, e: &Execution<'_>) -> f64 {
        match self {
            EventTerm::Const(c) => *c,
            EventTerm::Input(i) => e.x.get(*i).copied().unwrap_or(f64::NAN),
            EventTerm::Ret => {
                if e.ret {
                    1.0
                } else {
                    0.0
                }
            }
            // missing events (program not instrumented) read as 0
            EventTerm::Event(i) => {
                if e.events.get(*i).copied().unwrap_or(false) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

fn cmp(op: CmpOp, a: f64, b: f64) -> bool {
    match op {
        CmpOp::Lt => a < b,
        CmpOp::Le => a <= b,
        CmpOp::Gt => a > b,
        CmpOp::Ge => a >= b,
        CmpOp::Eq => a == b,
        CmpOp::Ne => a != b,
    }
}

impl EventExpr {
    pub fn holds(&self, e: &Execution<'_>) -> bool {
        match self {
            EventExpr::True => true,
            EventExpr::Cmp(op, a, b) => cmp(*op, a.value(e), b.value(e)),
            EventExpr::And(a, b) => a.holds(e) && b.holds(e),
            EventExpr::Or(a, b) => a.holds(e) || b.holds(e),
            EventExpr::Not(a) => !a.holds(e),
        }
    }
}

/// Outcome of evaluating a postcondition on point estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostVerdict {
    pub holds: bool,
    /// Some ratio's denominator estimated to 0 (degenerate conditioning).
    pub degenerate: bool,
    /// Some condition's estimate fell below the flag threshold (0.01).
    pub thin_conditioning: bool,
}

pub(crate) struct EvalCtx<'a> {
    /// Estimator for a `Pr` term over the shared sample pool; also records
    /// per-term diagnostics.
    pub estimate: &'a mut dyn FnMut(&EventExpr) -> f64,
}

impl ProbExpr {
    fn eval(&self, ctx: &mut EvalCtx<'_>, verdict: &mut PostVerdict) -> f64 {
        match self {
            ProbExpr::Const(c) => *c,
            ProbExpr::Prob(e) => (ctx.estimate)(e),
            ProbExpr::Add(a, b) => a.eval(ctx, verdict) + b.eval(ctx, verdict),
            ProbExpr::Sub(a, b) => a.eval(ctx, verdict) - b.eval(ctx, verdict),
            ProbExpr::Mul(a, b) => a.eval(ctx, verdict) * b.eval(ctx, verdict),
            ProbExpr::Div(a, b) => {
                let num = a.eval(ctx, verdict);
                let den = b.eval(ctx, verdict);
                if den == 0.0 {
                    verdict.degenerate = true;
                    0.0
                } else {
                    if den < 0.01 {
                        verdict.thin_conditioning = true;
                    }
                    num / den
                }
            }
        }
    }
}

impl Postcondition {
    /// Evaluates on point estimates supplied by `ctx`. A degenerate ratio
    /// forces rejection.
    pub(crate) fn decide(&self, ctx: &mut EvalCtx<'_>) -> PostVerdict {
        let mut verdict = PostVerdict {
            holds: false,
            degenerate: false,
            thin_conditioning: false,
        };
        let holds = self.eval_bool(ctx, &mut verdict);
        verdict.holds = holds && !verdict.degenerate;
        verdict
    }

    fn eval_bool(&self, ctx: &mut EvalCtx<'_>, verdict: &mut PostVerdict) -> bool {
        match self {
            Postcondition::Cmp(op, a, b) => cmp(*op, a.eval(ctx, verdict), b.eval(ctx, verdict)),
            Postcondition::And(a, b) => {
                // no short-circuit: evaluate both so diagnostics are complete
                let l = a.eval_bool(ctx, verdict);
                let r = b.eval_bool(ctx, verdict);
                l && r
            }
            Postcondition::Or(a, b) => {
                let l = a.eval_bool(ctx, verdict);
                let r = b.eval_bool(ctx, verdict);
                l || r
            }
            Postcondition::Not(a) => !a.eval_bool(ctx, verdict),
        }
    }
}

// ---------------------------------------------------------------------------
// Parser for the infix postcondition grammar.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, thiserror::Error)]
#[error("postcondition parse error at byte {at}: {message}")]
pub struct PostParseError {
    pub at: usize,
    pub message: String,
}

struct PParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> PParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, PostParseError> {
        Err(PostParseError {
            at: self.pos,
            message: message.into(),
        })
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn peek_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        self.src[self.pos..].starts_with(s.as_bytes())
    }

    fn expect(&mut self, s: &str) -> Result<(), PostParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn ident(&mut self) -> Result<String, PostParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected identifier");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string())
    }

    fn number(&mut self) -> Result<f64, PostParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.src.len() && (self.src[self.pos] == b'-' || self.src[self.pos] == b'+') {
            self.pos += 1;
        }
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit()
                || self.src[self.pos] == b'.'
                || self.src[self.pos] == b'e'
                || self.src[self.pos] == b'E')
        {
            self.pos += 1;
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        s.parse().map_err(|_| PostParseError {
            at: start,
            message: format!("malformed number {s:?}"),
        })
    }

    fn peek_number(&mut self) -> bool {
        self.skip_ws();
        self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit()
                || self.src[self.pos] == b'.'
                || self.src[self.pos] == b'-')
    }

    // ---- Boolean layer ----

    fn post_or(&mut self) -> Result<Postcondition, PostParseError> {
        let mut lhs = self.post_and()?;
        while self.eat("||") {
            let rhs = self.post_and()?;
            lhs = Postcondition::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn post_and(&mut self) -> Result<Postcondition, PostParseError> {
        let mut lhs = self.post_atom()?;
        while self.eat("&&") {
            let rhs = self.post_atom()?;
            lhs = Postcondition::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn post_atom(&mut self) -> Result<Postcondition, PostParseError> {
        if self.eat("!") {
            return Ok(Postcondition::Not(Box::new(self.post_atom()?)));
        }
        self.skip_ws();
        // A parenthesis here could open either a grouped Boolean clause or a
        // parenthesized arithmetic expression; try the Boolean reading first.
        if self.peek_str("(") {
            let save = self.pos;
            self.pos += 1;
            if let Ok(inner) = self.post_or() {
                if self.eat(")") && !self.peek_cmp() {
                    return Ok(inner);
                }
            }
            self.pos = save;
        }
        let lhs = self.arith()?;
        let op = self.cmp_op()?;
        let rhs = self.arith()?;
        Ok(Postcondition::Cmp(op, lhs, rhs))
    }

    fn peek_cmp(&mut self) -> bool {
        self.peek_str(">=") || self.peek_str("<=") || self.peek_str(">") || self.peek_str("<")
    }

    fn cmp_op(&mut self) -> Result<CmpOp, PostParseError> {
        if self.eat(">=") {
            Ok(CmpOp::Ge)
        } else if self.eat("<=") {
            Ok(CmpOp::Le)
        } else if self.eat(">") {
            Ok(CmpOp::Gt)
        } else if self.eat("<") {
            Ok(CmpOp::Lt)
        } else {
            self.err("expected comparison operator (>, >=, <, <=)")
        }
    }

    // ---- arithmetic over Pr terms ----

    fn arith(&mut self) -> Result<ProbExpr, PostParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat("+") {
                lhs = ProbExpr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat("-") {
                lhs = ProbExpr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<ProbExpr, PostParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat("*") {
                lhs = ProbExpr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat("/") {
                lhs = ProbExpr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<ProbExpr, PostParseError> {
        self.skip_ws();
        if self.peek_str("Pr") {
            self.expect("Pr")?;
            self.expect("[")?;
            let e = self.event_or()?;
            self.expect("]")?;
            return Ok(ProbExpr::Prob(e));
        }
        if self.eat("(") {
            let e = self.arith()?;
            self.expect(")")?;
            return Ok(e);
        }
        if self.peek_number() {
            return Ok(ProbExpr::Const(self.number()?));
        }
        self.err("expected Pr[...], number, or parenthesized expression")
    }

    // ---- event expressions inside Pr[...] ----

    fn event_or(&mut self) -> Result<EventExpr, PostParseError> {
        let mut lhs = self.event_and()?;
        while self.eat("||") {
            lhs = EventExpr::Or(Box::new(lhs), Box::new(self.event_and()?));
        }
        Ok(lhs)
    }

    fn event_and(&mut self) -> Result<EventExpr, PostParseError> {
        let mut lhs = self.event_atom()?;
        while self.eat("&&") {
            lhs = EventExpr::And(Box::new(lhs), Box::new(self.event_atom()?));
        }
        Ok(lhs)
    }

    fn event_atom(&mut self) -> Result<EventExpr, PostParseError> {
        if self.eat("!") {
            return Ok(EventExpr::Not(Box::new(self.event_atom()?)));
        }
        if self.eat("(") {
            let e = self.event_or()?;
            self.expect(")")?;
            return Ok(e);
        }
        self.skip_ws();
        if self.peek_str("true") {
            self.expect("true")?;
            return Ok(EventExpr::True);
        }
        let lhs = self.event_term()?;
        let op = if self.eat("==") {
            CmpOp::Eq
        } else if self.eat("!=") {
            CmpOp::Ne
        } else if self.eat(">=") {
            CmpOp::Ge
        } else if self.eat("<=") {
            CmpOp::Le
        } else if self.eat(">") {
            CmpOp::Gt
        } else if self.eat("<") {
            CmpOp::Lt
        } else {
            return self.err("expected comparison inside Pr[...]");
        };
        let rhs = self.event_term()?;
        Ok(EventExpr::Cmp(op, lhs, rhs))
    }

    fn event_term(&mut self) -> Result<EventTerm, PostParseError> {
        self.skip_ws();
        if self.peek_number() {
            return Ok(EventTerm::Const(self.number()?));
        }
        let name = self.ident()?;
        resolve_name(&name).ok_or(PostParseError {
            at: self.pos,
            message: format!("unknown name `{name}` (expected ret, x, xK, or eventK)"),
        })
    }
}

fn resolve_name(name: &str) -> Option<EventTerm> {
    match name {
        "ret" => Some(EventTerm::Ret),
        "x" => Some(EventTerm::Input(0)),
        _ => {
            if let Some(rest) = name.strip_prefix("event") {
                return rest.parse::<usize>().ok().map(EventTerm::Event);
            }
            if let Some(rest) = name.strip_prefix('x') {
                return rest
                    .parse::<usize>()
                    .ok()
                    .filter(|k| *k >= 1)
                    .map(|k| EventTerm::Input(k - 1));
            }
            None
        }
    }
}

/// Parses the infix postcondition grammar. Names: `ret` (output bit),
/// `x`/`x1`..`xK` (input coordinates), `eventK` (assert events), `true`.
pub fn parse_postcondition(text: &str) -> Result<Postcondition, PostParseError> {
    let mut p = PParser {
        src: text.as_bytes(),
        pos: 0,
    };
    let post = p.post_or()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("trailing input after postcondition");
    }
    Ok(post)
}

impl fmt::Display for Postcondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn estimate_const(v: f64) -> impl FnMut(&EventExpr) -> f64 {
        move |_| v
    }

    #[test]
    fn parses_example_ratio_form() {
        let p = parse_postcondition(
            "Pr[ret == 1 && x1 <= 0] / Pr[x1 <= 0] >= Pr[ret == 1 && x1 >= 0] / Pr[x1 >= 0]",
        )
        .unwrap();
        assert_eq!(p.prob_term_count(), 4);
    }

    #[test]
    fn parses_conjunction() {
        let p = parse_postcondition("Pr[ret == 1] >= 0.5 && Pr[x1 > 0] > 0.1").unwrap();
        assert_eq!(p.prob_term_count(), 2);
    }

    #[test]
    fn vacuous_accepts() {
        let p = parse_postcondition("Pr[true] >= 0").unwrap();
        let mut est = estimate_const(1.0);
        let mut ctx = EvalCtx { estimate: &mut est };
        assert!(p.decide(&mut ctx).holds);
    }

    #[test]
    fn degenerate_division_rejects() {
        let p = parse_postcondition("Pr[ret == 1] / Pr[x1 > 2] >= 0.1").unwrap();
        let mut est = estimate_const(0.0);
        let mut ctx = EvalCtx { estimate: &mut est };
        let v = p.decide(&mut ctx);
        assert!(!v.holds);
        assert!(v.degenerate);
    }

    #[test]
    fn event_expr_semantics() {
        let p = parse_postcondition("Pr[ret == 1 && x1 <= 0] > 0.5").unwrap();
        let Postcondition::Cmp(_, ProbExpr::Prob(ev), _) = &p else {
            panic!("shape");
        };
        let ex = Execution {
            x: &[-0.5],
            ret: true,
            events: &[],
        };
        assert!(ev.holds(&ex));
        let ex2 = Execution {
            x: &[0.5],
            ret: true,
            events: &[],
        };
        assert!(!ev.holds(&ex2));
    }

    #[test]
    fn unknown_name_rejected() {
        assert!(parse_postcondition("Pr[y > 0] > 0.5").is_err());
    }
}
