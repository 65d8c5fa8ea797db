use super::Node;

const P_ADD: u8 = 1;
const P_MUL: u8 = 2;
const P_NEG: u8 = 3;
const P_POW: u8 = 4;
const P_ATOM: u8 = 5;

fn prec(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => P_ADD,
        Node::Mul(..) | Node::Div(..) => P_MUL,
        Node::Neg(_) => P_NEG,
        Node::Const(c) if c.is_sign_negative() => P_NEG,
        Node::Pow(..) => P_POW,
        Node::Const(_) | Node::Var(_) | Node::Call(..) => P_ATOM,
    }
}

/// Renders `node` so that parsing the text yields the same tree (up to
/// negative constants, which re-parse as negation of a positive literal).
pub(super) fn render(node: &Node, vars: &[String]) -> String {
    let mut out = String::new();
    write(node, vars, 0, &mut out);
    out
}

fn write(node: &Node, vars: &[String], min_prec: u8, out: &mut String) {
    let p = prec(node);
    let paren = p < min_prec;
    if paren {
        out.push('(');
    }
    match node {
        Node::Const(c) => {
            if c.is_sign_negative() {
                out.push('-');
                out.push_str(&format!("{:?}", c.abs()));
            } else {
                out.push_str(&format!("{c:?}"));
            }
        }
        Node::Var(i) => out.push_str(&vars[*i]),
        Node::Neg(a) => {
            out.push('-');
            write(a, vars, P_NEG, out);
        }
        Node::Add(a, b) | Node::Sub(a, b) => {
            write(a, vars, P_ADD, out);
            out.push_str(if matches!(node, Node::Add(..)) {
                " + "
            } else {
                " - "
            });
            write(b, vars, P_ADD + 1, out);
        }
        Node::Mul(a, b) | Node::Div(a, b) => {
            write(a, vars, P_MUL, out);
            out.push(if matches!(node, Node::Mul(..)) {
                '*'
            } else {
                '/'
            });
            write(b, vars, P_MUL + 1, out);
        }
        Node::Pow(a, n) => {
            write(a, vars, P_ATOM, out);
            out.push('^');
            if *n < 0 {
                out.push_str(&format!("({n})"));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Node::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write(a, vars, 0, out);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}
