//! Symbolic differentiation and the simplifying node constructors it uses.
//!
//! Simplification is restricted to constant folding (kept only when the
//! folded value is finite) and the 0/1 identities.

use super::{Func, Node};

fn konst(n: &Node) -> Option<f64> {
    match n {
        Node::Const(c) => Some(*c),
        _ => None,
    }
}

fn fold(v: f64, otherwise: Node) -> Node {
    if v.is_finite() {
        Node::Const(v)
    } else {
        otherwise
    }
}

pub(super) fn add(a: Node, b: Node) -> Node {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => fold(x + y, Node::Add(Box::new(a), Box::new(b))),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => Node::Add(Box::new(a), Box::new(b)),
    }
}

pub(super) fn sub(a: Node, b: Node) -> Node {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => fold(x - y, Node::Sub(Box::new(a), Box::new(b))),
        (Some(0.0), _) => neg(b),
        (_, Some(0.0)) => a,
        _ => Node::Sub(Box::new(a), Box::new(b)),
    }
}

pub(super) fn neg(a: Node) -> Node {
    match a {
        Node::Const(c) => Node::Const(-c),
        Node::Neg(inner) => *inner,
        other => Node::Neg(Box::new(other)),
    }
}

pub(super) fn mul(a: Node, b: Node) -> Node {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) => fold(x * y, Node::Mul(Box::new(a), Box::new(b))),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Node::Const(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        (Some(-1.0), _) => neg(b),
        (_, Some(-1.0)) => neg(a),
        _ => Node::Mul(Box::new(a), Box::new(b)),
    }
}

pub(super) fn div(a: Node, b: Node) -> Node {
    match (konst(&a), konst(&b)) {
        (Some(x), Some(y)) if y != 0.0 => fold(x / y, Node::Div(Box::new(a), Box::new(b))),
        (Some(0.0), _) => Node::Const(0.0),
        (_, Some(1.0)) => a,
        _ => Node::Div(Box::new(a), Box::new(b)),
    }
}

pub(super) fn pow(a: Node, n: i32) -> Node {
    match (n, konst(&a)) {
        (0, _) => Node::Const(1.0),
        (1, _) => a,
        (_, Some(x)) if !(x == 0.0 && n < 0) => fold(x.powi(n), Node::Pow(Box::new(a), n)),
        _ => Node::Pow(Box::new(a), n),
    }
}

pub(super) fn call(f: Func, a: Node) -> Node {
    if let Some(x) = konst(&a) {
        let v = match f {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Log if x > 0.0 => x.ln(),
            Func::Log => f64::NAN,
        };
        return fold(v, Node::Call(f, Box::new(a)));
    }
    Node::Call(f, Box::new(a))
}

pub(super) fn derivative(node: &Node, v: usize) -> Node {
    match node {
        Node::Const(_) => Node::Const(0.0),
        Node::Var(i) => Node::Const(if *i == v { 1.0 } else { 0.0 }),
        Node::Neg(a) => neg(derivative(a, v)),
        Node::Add(a, b) => add(derivative(a, v), derivative(b, v)),
        Node::Sub(a, b) => sub(derivative(a, v), derivative(b, v)),
        Node::Mul(a, b) => add(
            mul(derivative(a, v), (**b).clone()),
            mul((**a).clone(), derivative(b, v)),
        ),
        Node::Div(a, b) => {
            let da = derivative(a, v);
            let db = derivative(b, v);
            sub(
                div(da, (**b).clone()),
                div(mul((**a).clone(), db), pow((**b).clone(), 2)),
            )
        }
        Node::Pow(a, n) => {
            let da = derivative(a, v);
            mul(mul(Node::Const(*n as f64), pow((**a).clone(), n - 1)), da)
        }
        Node::Call(f, a) => {
            let da = derivative(a, v);
            let inner = (**a).clone();
            match f {
                Func::Sin => mul(call(Func::Cos, inner), da),
                Func::Cos => neg(mul(call(Func::Sin, inner), da)),
                Func::Exp => mul(call(Func::Exp, inner), da),
                Func::Log => div(da, inner),
            }
        }
    }
}

pub(super) fn substitute(node: &Node, v: usize, value: f64) -> Node {
    let s = |n: &Node| substitute(n, v, value);
    match node {
        Node::Const(c) => Node::Const(*c),
        Node::Var(i) if *i == v => Node::Const(value),
        Node::Var(i) => Node::Var(*i),
        Node::Neg(a) => neg(s(a)),
        Node::Add(a, b) => add(s(a), s(b)),
        Node::Sub(a, b) => sub(s(a), s(b)),
        Node::Mul(a, b) => mul(s(a), s(b)),
        Node::Div(a, b) => div(s(a), s(b)),
        Node::Pow(a, n) => pow(s(a), *n),
        Node::Call(f, a) => call(*f, s(a)),
    }
}
