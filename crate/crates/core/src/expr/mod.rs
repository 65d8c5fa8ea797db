//! Symbolic scalar nonlinearities.
//!
//! An [`Expression`] is a small arithmetic tree over a declared list of
//! variables. It can be parsed from text, evaluated in IEEE double precision,
//! printed back to text that re-parses to the same tree, and differentiated
//! exactly with respect to any declared variable.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' exponent)*
//! exponent:= ['-' | '+'] INTEGER | '(' ['-' | '+'] INTEGER ')'
//! primary := NUMBER | 'pi' | VARIABLE | FUNC '(' expr ')' | '(' expr ')'
//! FUNC    := 'sin' | 'cos' | 'exp' | 'log'
//! ```
//!
//! Binary operators are left-associative. The Unicode minus sign `−` is
//! accepted wherever `-` is.
//!
//! ```
//! use solmap_core::expr::Expression;
//!
//! let e = Expression::parse("xi^2 + sin(pi*eta)", &["t", "eta", "xi"]).unwrap();
//! let d = e.differentiate("xi").unwrap();
//! assert_eq!(d.eval(&[0.0, 0.0, 3.0]).unwrap(), 6.0);
//! ```

mod diff;
mod parse;
mod print;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Names that cannot be used as variables.
pub const RESERVED: [&str; 5] = ["pi", "sin", "cos", "exp", "log"];

/// Maximum nesting depth accepted by the parser.
pub const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("empty expression")]
    Empty,
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("undeclared variable `{name}` at position {pos}")]
    UndeclaredVariable { name: String, pos: usize },
    #[error("invalid variable name `{0}`")]
    InvalidVariable(String),
}

impl ParseError {
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::UndeclaredVariable { pos, .. } => {
                Some(*pos)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in `{node}`")]
    DivisionByZero { node: String },
    #[error("logarithm of non-positive value {value} in `{node}`")]
    LogDomain { node: String, value: f64 },
    #[error("non-finite value in `{node}`")]
    NonFinite { node: String },
    #[error("expected {expected} variable values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("variable `{0}` is not bound")]
    Unbound(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }
}

/// Expression tree node. Variables are indices into the owning
/// expression's variable list.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Box<Node>),
}

impl Node {
    fn uses_var(&self, index: usize) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var(i) => *i == index,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.uses_var(index),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.uses_var(index) || b.uses_var(index)
            }
        }
    }

    fn size(&self) -> usize {
        match self {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => 1 + a.size(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }
}

fn remap(node: &Node, map: &[usize]) -> Node {
    let b = |n: &Node| Box::new(remap(n, map));
    match node {
        Node::Const(c) => Node::Const(*c),
        Node::Var(i) => Node::Var(map[*i]),
        Node::Neg(a) => Node::Neg(b(a)),
        Node::Add(x, y) => Node::Add(b(x), b(y)),
        Node::Sub(x, y) => Node::Sub(b(x), b(y)),
        Node::Mul(x, y) => Node::Mul(b(x), b(y)),
        Node::Div(x, y) => Node::Div(b(x), b(y)),
        Node::Pow(a, k) => Node::Pow(b(a), *k),
        Node::Call(f, a) => Node::Call(*f, b(a)),
    }
}

/// An immutable parsed expression over a declared variable list.
///
/// Cloning is cheap; the tree is shared.
#[derive(Clone)]
pub struct Expression {
    vars: Arc<[String]>,
    root: Arc<Node>,
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Expression")
            .field("vars", &self.vars)
            .field("text", &self.to_string())
            .finish()
    }
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.root == other.root
    }
}

fn validate_vars(variables: &[&str]) -> Result<Arc<[String]>, ParseError> {
    for (i, v) in variables.iter().enumerate() {
        let ok_start = v
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
        let ok_rest = v.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok_start || !ok_rest || RESERVED.contains(v) || variables[..i].contains(v) {
            return Err(ParseError::InvalidVariable((*v).to_string()));
        }
    }
    Ok(variables.iter().map(|s| s.to_string()).collect())
}

impl Expression {
    /// Parses `text` over the declared `variables`.
    pub fn parse(text: &str, variables: &[&str]) -> Result<Self, ParseError> {
        let vars = validate_vars(variables)?;
        let root = parse::parse(text, &vars)?;
        Ok(Expression {
            vars,
            root: Arc::new(root),
        })
    }

    /// The constant expression `value` over `variables`.
    pub fn constant(value: f64, variables: &[&str]) -> Result<Self, ParseError> {
        let vars = validate_vars(variables)?;
        Ok(Expression {
            vars,
            root: Arc::new(Node::Const(value)),
        })
    }

    pub(crate) fn from_node(vars: Arc<[String]>, root: Node) -> Self {
        Expression {
            vars,
            root: Arc::new(root),
        }
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn uses(&self, name: &str) -> bool {
        self.var_index(name).is_some_and(|i| self.root.uses_var(i))
    }

    /// True when the tree is the literal constant zero.
    pub fn is_zero(&self) -> bool {
        matches!(*self.root, Node::Const(c) if c == 0.0)
    }

    /// Evaluates with positional values matching [`Expression::variables`].
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        if values.len() != self.vars.len() {
            return Err(EvalError::Arity {
                expected: self.vars.len(),
                got: values.len(),
            });
        }
        eval_node(&self.root, values, &self.vars)
    }

    /// Evaluates with a name → value environment. Only variables that occur
    /// in the tree need to be bound.
    pub fn eval_env(&self, env: &HashMap<&str, f64>) -> Result<f64, EvalError> {
        let mut values = vec![0.0; self.vars.len()];
        for (i, name) in self.vars.iter().enumerate() {
            match env.get(name.as_str()) {
                Some(v) => values[i] = *v,
                None if self.root.uses_var(i) => return Err(EvalError::Unbound(name.clone())),
                None => {}
            }
        }
        eval_node(&self.root, &values, &self.vars)
    }

    /// Exact symbolic partial derivative with respect to `var`.
    pub fn differentiate(&self, var: &str) -> Result<Expression, ParseError> {
        let index = self
            .var_index(var)
            .ok_or_else(|| ParseError::UndeclaredVariable {
                name: var.to_string(),
                pos: 0,
            })?;
        Ok(Expression::from_node(
            self.vars.clone(),
            diff::derivative(&self.root, index),
        ))
    }

    /// Replaces every occurrence of `var` with the constant `value`
    /// (constant-folding the result). The variable list is unchanged.
    pub fn substitute(&self, var: &str, value: f64) -> Result<Expression, ParseError> {
        let index = self
            .var_index(var)
            .ok_or_else(|| ParseError::UndeclaredVariable {
                name: var.to_string(),
                pos: 0,
            })?;
        Ok(Expression::from_node(
            self.vars.clone(),
            diff::substitute(&self.root, index, value),
        ))
    }

    /// `self + scale * other`, both over the same variable list.
    ///
    /// The perturbation is built as `self + (scale * other)` so that two
    /// perturbations combined with [`Expression::perturbed2`] are symmetric
    /// under swapping.
    pub fn perturbed(&self, other: &Expression, scale: f64) -> Result<Expression, ParseError> {
        self.check_same_vars(other)?;
        let term = diff::mul(Node::Const(scale), (*other.root).clone());
        Ok(Expression::from_node(
            self.vars.clone(),
            diff::add((*self.root).clone(), term),
        ))
    }

    /// `self + (s1 * e1 + s2 * e2)`. Swapping the two (scale, expression)
    /// pairs produces a tree that evaluates bit-for-bit identically.
    pub fn perturbed2(
        &self,
        e1: &Expression,
        s1: f64,
        e2: &Expression,
        s2: f64,
    ) -> Result<Expression, ParseError> {
        self.check_same_vars(e1)?;
        self.check_same_vars(e2)?;
        let t1 = Node::Mul(Box::new(Node::Const(s1)), Box::new((*e1.root).clone()));
        let t2 = Node::Mul(Box::new(Node::Const(s2)), Box::new((*e2.root).clone()));
        let sum = Node::Add(Box::new(t1), Box::new(t2));
        Ok(Expression::from_node(
            self.vars.clone(),
            Node::Add(Box::new((*self.root).clone()), Box::new(sum)),
        ))
    }

    /// The same tree over another variable list. Every variable the tree
    /// uses must occur in `variables`; unused ones may be dropped.
    pub fn rebind(&self, variables: &[&str]) -> Result<Expression, ParseError> {
        let vars = validate_vars(variables)?;
        let mut map = Vec::with_capacity(self.vars.len());
        for (i, name) in self.vars.iter().enumerate() {
            match vars.iter().position(|v| v == name) {
                Some(j) => map.push(j),
                None if self.root.uses_var(i) => {
                    return Err(ParseError::UndeclaredVariable {
                        name: name.clone(),
                        pos: 0,
                    })
                }
                None => map.push(usize::MAX),
            }
        }
        Ok(Expression::from_node(vars, remap(&self.root, &map)))
    }

    fn check_same_vars(&self, other: &Expression) -> Result<(), ParseError> {
        if self.vars != other.vars {
            return Err(ParseError::InvalidVariable(format!(
                "variable lists differ: {:?} vs {:?}",
                self.vars, other.vars
            )));
        }
        Ok(())
    }
}

fn node_text(node: &Node, vars: &[String]) -> String {
    print::render(node, vars)
}

fn finite(v: f64, node: &Node, vars: &[String]) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite {
            node: node_text(node, vars),
        })
    }
}

fn eval_node(node: &Node, values: &[f64], vars: &[String]) -> Result<f64, EvalError> {
    match node {
        Node::Const(c) => Ok(*c),
        Node::Var(i) => finite(values[*i], node, vars),
        Node::Neg(a) => Ok(-eval_node(a, values, vars)?),
        Node::Add(a, b) => {
            let v = eval_node(a, values, vars)? + eval_node(b, values, vars)?;
            finite(v, node, vars)
        }
        Node::Sub(a, b) => {
            let v = eval_node(a, values, vars)? - eval_node(b, values, vars)?;
            finite(v, node, vars)
        }
        Node::Mul(a, b) => {
            let v = eval_node(a, values, vars)? * eval_node(b, values, vars)?;
            finite(v, node, vars)
        }
        Node::Div(a, b) => {
            let num = eval_node(a, values, vars)?;
            let den = eval_node(b, values, vars)?;
            if den == 0.0 {
                return Err(EvalError::DivisionByZero {
                    node: node_text(node, vars),
                });
            }
            finite(num / den, node, vars)
        }
        Node::Pow(a, n) => {
            let base = eval_node(a, values, vars)?;
            if *n < 0 && base == 0.0 {
                return Err(EvalError::DivisionByZero {
                    node: node_text(node, vars),
                });
            }
            finite(base.powi(*n), node, vars)
        }
        Node::Call(f, a) => {
            let x = eval_node(a, values, vars)?;
            let v = match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Log => {
                    if x <= 0.0 {
                        return Err(EvalError::LogDomain {
                            node: node_text(node, vars),
                            value: x,
                        });
                    }
                    x.ln()
                }
            };
            finite(v, node, vars)
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render(&self.root, &self.vars))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEX: [&str; 3] = ["t", "eta", "xi"];

    #[test]
    fn rebind_reorders_and_drops() {
        let e = Expression::parse("xi * t + 2", &["c", "t", "xi"]).unwrap();
        let r = e.rebind(&TEX).unwrap();
        assert_eq!(r.eval(&[3.0, 9.0, 5.0]).unwrap(), 17.0);
        assert!(matches!(
            Expression::parse("c", &["c", "t"]).unwrap().rebind(&TEX),
            Err(ParseError::UndeclaredVariable { .. })
        ));
    }

    fn p(s: &str) -> Expression {
        Expression::parse(s, &TEX).unwrap()
    }

    #[test]
    fn squares() {
        assert_eq!(p("xi^2").eval(&[0.0, 0.0, 3.0]).unwrap(), 9.0);
    }

    #[test]
    fn sin_pi_vanishes() {
        let v = p("sin(pi*eta)").eval(&[0.0, 1.0, 0.0]).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn trailing_operator_reports_position() {
        let err = Expression::parse("xi +", &TEX).unwrap_err();
        assert_eq!(err.position(), Some(4));
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn undeclared_variable() {
        let err = Expression::parse("t + zeta", &TEX).unwrap_err();
        assert_eq!(
            err,
            ParseError::UndeclaredVariable {
                name: "zeta".into(),
                pos: 4
            }
        );
    }

    #[test]
    fn empty_text_rejected() {
        assert_eq!(
            Expression::parse("   ", &TEX).unwrap_err(),
            ParseError::Empty
        );
    }

    #[test]
    fn exp_one() {
        let v = Expression::parse("exp(1)", &[]).unwrap().eval(&[]).unwrap();
        assert!((v - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn division_by_zero_is_domain_error() {
        let err = p("1/xi").eval(&[0.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, EvalError::DivisionByZero { ref node } if node == "1.0/xi"));
    }

    #[test]
    fn log_domain() {
        let err = p("log(xi)").eval(&[0.0, 0.0, -1.0]).unwrap_err();
        assert!(matches!(err, EvalError::LogDomain { .. }));
    }

    #[test]
    fn arithmetic_env() {
        let env: HashMap<&str, f64> = [("t", 1.0), ("eta", 2.0), ("xi", 3.0)].into();
        assert_eq!(p("t + eta*xi").eval_env(&env).unwrap(), 7.0);
        let partial: HashMap<&str, f64> = [("xi", 3.0)].into();
        assert_eq!(p("xi*2").eval_env(&partial).unwrap(), 6.0);
        assert_eq!(
            p("xi*t").eval_env(&partial).unwrap_err(),
            EvalError::Unbound("t".into())
        );
    }

    #[test]
    fn precedence() {
        // power > unary minus > * / > + -
        assert_eq!(p("-xi^2").eval(&[0.0, 0.0, 3.0]).unwrap(), -9.0);
        assert_eq!(p("2*3^2").eval(&[0.0; 3]).unwrap(), 18.0);
        assert_eq!(p("8/4/2").eval(&[0.0; 3]).unwrap(), 1.0);
        assert_eq!(p("1-2-3").eval(&[0.0; 3]).unwrap(), -4.0);
        assert_eq!(p("2^-1").eval(&[0.0; 3]).unwrap(), 0.5);
        assert_eq!(p("xi^(-2)").eval(&[0.0, 0.0, 2.0]).unwrap(), 0.25);
    }

    #[test]
    fn unicode_minus() {
        let e = Expression::parse("xi2 − t", &["s", "t", "xi1", "xi2"]).unwrap();
        assert_eq!(e.eval(&[0.0, 0.5, 0.0, 2.0]).unwrap(), 1.5);
    }

    #[test]
    fn non_integer_exponent_rejected() {
        assert!(matches!(
            Expression::parse("xi^2.5", &TEX),
            Err(ParseError::Syntax { pos: 3, .. })
        ));
    }

    #[test]
    fn reserved_names_rejected() {
        assert!(Expression::parse("x", &["pi"]).is_err());
        assert!(Expression::parse("x", &["x", "x"]).is_err());
    }

    #[test]
    fn deep_nesting_rejected_not_overflowed() {
        let text = format!("{}xi{}", "(".repeat(5000), ")".repeat(5000));
        assert!(matches!(
            Expression::parse(&text, &TEX),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn derivative_examples() {
        let d = p("xi^2").differentiate("xi").unwrap();
        for x in [-2.0, 0.0, 1.5] {
            assert_eq!(d.eval(&[0.0, 0.0, x]).unwrap(), 2.0 * x);
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        let d = p("sin(2*pi*eta)").differentiate("eta").unwrap();
        for eta in [0.0, 0.1, 0.37] {
            let want = two_pi * (two_pi * eta).cos();
            assert!((d.eval(&[0.0, eta, 0.0]).unwrap() - want).abs() < 1e-12);
        }
        let d = p("exp(t*xi)").differentiate("xi").unwrap();
        let (t, x) = (0.7, -1.3);
        assert!((d.eval(&[t, 0.0, x]).unwrap() - t * (t * x).exp()).abs() < 1e-14);
    }

    #[test]
    fn derivative_of_constant_folds_to_zero() {
        assert!(p("3*t + sin(eta)").differentiate("xi").unwrap().is_zero());
    }

    #[test]
    fn substitute_parameter() {
        let e = Expression::parse("xi2 - c", &["s", "xi2", "c"]).unwrap();
        let e = e.substitute("c", 2.5).unwrap();
        assert!(!e.uses("c"));
        assert_eq!(e.eval(&[0.0, 3.0, 99.0]).unwrap(), 0.5);
    }

    #[test]
    fn perturbed2_is_swap_symmetric() {
        let base = p("xi^2");
        let a = p("sin(eta)*xi");
        let b = p("t - xi/3");
        let e12 = base.perturbed2(&a, 1e-2, &b, -1e-2).unwrap();
        let e21 = base.perturbed2(&b, -1e-2, &a, 1e-2).unwrap();
        for pt in [[0.1, 0.2, 0.3], [0.9, -0.4, 1.7]] {
            assert_eq!(
                e12.eval(&pt).unwrap().to_bits(),
                e21.eval(&pt).unwrap().to_bits()
            );
        }
    }
}
