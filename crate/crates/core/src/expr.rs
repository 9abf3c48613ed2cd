//! Small arithmetic-expression grammar over a complex variable `z`.
//!
//! Operators `+ − * / ^`, implicit multiplication (`2q`, `0.5i`), constants `i`, `pi`,
//! variables `z`, `x = re z`, `y = im z`, named parameters, and the functions
//! `re im abs log exp cos sin sqrt pow`.
//!
//! Affine subexpressions that vanish at a unit-circle point are evaluated as
//! `c₁·(z − ζ₀)` from the point's anchor offset, so boundary singularities such as
//! `pow(1 − z, −0.7)` keep full precision next to `ζ₀`.

use crate::error::{Error, Result};
use crate::loc::{Anchor, Loc};
use crate::quad::SingularityTag;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Re,
    Im,
    Abs,
    Log,
    Exp,
    Cos,
    Sin,
    Sqrt,
    Pow,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "re" => (Func::Re, 1),
            "im" => (Func::Im, 1),
            "abs" => (Func::Abs, 1),
            "log" => (Func::Log, 1),
            "exp" => (Func::Exp, 1),
            "cos" => (Func::Cos, 1),
            "sin" => (Func::Sin, 1),
            "sqrt" => (Func::Sqrt, 1),
            "pow" => (Func::Pow, 2),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone)]
enum Node {
    Num(C),
    Z,
    X,
    Y,
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
    /// `c₀ + c₁ z` vanishing at the boundary point `anchor`.
    Root { c1: C, anchor: Anchor },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < cs.len() {
        let c = cs[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || (c == '.' && k + 1 < cs.len() && cs[k + 1].is_ascii_digit()) {
            let start = k;
            while k < cs.len() && (cs[k].is_ascii_digit() || cs[k] == '.') {
                k += 1;
            }
            if k < cs.len() && (cs[k] == 'e' || cs[k] == 'E') {
                let mut j = k + 1;
                if j < cs.len() && (cs[j] == '+' || cs[j] == '-') {
                    j += 1;
                }
                if j < cs.len() && cs[j].is_ascii_digit() {
                    k = j;
                    while k < cs.len() && cs[k].is_ascii_digit() {
                        k += 1;
                    }
                }
            }
            let text: String = cs[start..k].iter().collect();
            let v: f64 = text.parse().map_err(|_| Error::Parse(format!("bad number '{text}'")))?;
            out.push(Tok::Num(v));
        } else if c.is_alphabetic() || c == '_' {
            let start = k;
            while k < cs.len() && (cs[k].is_alphanumeric() || cs[k] == '_') {
                k += 1;
            }
            out.push(Tok::Ident(cs[start..k].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Sym(c));
            k += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}' in '{s}'")));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    k: usize,
    params: &'a BTreeMap<String, f64>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.k)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.k += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected '{c}' at token {}", self.k)))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Bin(Op::Add, Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Bin(Op::Sub, Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Bin(Op::Mul, Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Bin(Op::Div, Box::new(lhs), Box::new(self.unary()?));
            } else if matches!(self.peek(), Some(Tok::Ident(_)) | Some(Tok::Num(_)) | Some(Tok::Sym('('))) {
                lhs = Node::Bin(Op::Mul, Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.toks.get(self.k).cloned() {
            Some(Tok::Num(v)) => {
                self.k += 1;
                Ok(Node::Num(C::new(v, 0.0)))
            }
            Some(Tok::Sym('(')) => {
                self.k += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.k += 1;
                if let Some((f, arity)) = Func::lookup(&name) {
                    self.expect('(')?;
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    if args.len() != arity {
                        return Err(Error::Parse(format!("{name} takes {arity} argument(s)")));
                    }
                    return Ok(Node::Call(f, args));
                }
                match name.as_str() {
                    "z" => Ok(Node::Z),
                    "x" => Ok(Node::X),
                    "y" => Ok(Node::Y),
                    "i" => Ok(Node::Num(C::new(0.0, 1.0))),
                    "pi" => Ok(Node::Num(C::new(std::f64::consts::PI, 0.0))),
                    _ => match self.params.get(&name) {
                        Some(&v) => Ok(Node::Num(C::new(v, 0.0))),
                        None => Err(Error::Parse(format!("unbound name '{name}'"))),
                    },
                }
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// Constant folding plus affine detection.
fn simplify(n: Node) -> Node {
    match n {
        Node::Neg(a) => match simplify(*a) {
            Node::Num(v) => Node::Num(-v),
            a => Node::Neg(Box::new(a)),
        },
        Node::Bin(op, a, b) => {
            let (a, b) = (simplify(*a), simplify(*b));
            if let (Node::Num(x), Node::Num(y)) = (&a, &b) {
                return Node::Num(apply(op, *x, *y));
            }
            let n = Node::Bin(op, Box::new(a), Box::new(b));
            match affine(&n) {
                Some((c0, c1)) if c1.norm() > 0.0 => {
                    let root = -c0 / c1;
                    if (root.norm() - 1.0).abs() < 1e-12 {
                        let p = root / root.norm();
                        Node::Root { c1, anchor: Anchor::exact(p) }
                    } else {
                        n
                    }
                }
                _ => n,
            }
        }
        Node::Call(f, args) => {
            let args: Vec<Node> = args.into_iter().map(simplify).collect();
            if args.iter().all(|a| matches!(a, Node::Num(_))) {
                let vs: Vec<C> = args.iter().map(|a| if let Node::Num(v) = a { *v } else { unreachable!() }).collect();
                return Node::Num(call(f, &vs));
            }
            Node::Call(f, args)
        }
        n => n,
    }
}

fn affine(n: &Node) -> Option<(C, C)> {
    let zero = C::new(0.0, 0.0);
    match n {
        Node::Num(v) => Some((*v, zero)),
        Node::Z => Some((zero, C::new(1.0, 0.0))),
        Node::Root { c1, anchor } => Some((-*c1 * anchor.point, *c1)),
        Node::Neg(a) => affine(a).map(|(a0, a1)| (-a0, -a1)),
        Node::Bin(op, a, b) => {
            let (a0, a1) = affine(a)?;
            let (b0, b1) = affine(b)?;
            match op {
                Op::Add => Some((a0 + b0, a1 + b1)),
                Op::Sub => Some((a0 - b0, a1 - b1)),
                Op::Mul if a1 == zero => Some((a0 * b0, a0 * b1)),
                Op::Mul if b1 == zero => Some((a0 * b0, a1 * b0)),
                Op::Div if b1 == zero => Some((a0 / b0, a1 / b0)),
                _ => None,
            }
        }
        _ => None,
    }
}

fn apply(op: Op, a: C, b: C) -> C {
    match op {
        Op::Add => a + b,
        Op::Sub => a - b,
        Op::Mul => a * b,
        Op::Div => div(a, b),
        Op::Pow => cpow(a, b),
    }
}

/// Smith's complex division, safe when `|b|²` under- or overflows.
fn div(a: C, b: C) -> C {
    if b.re.abs() >= b.im.abs() {
        let r = b.im / b.re;
        let d = b.re + b.im * r;
        C::new((a.re + a.im * r) / d, (a.im - a.re * r) / d)
    } else {
        let r = b.re / b.im;
        let d = b.re * r + b.im;
        C::new((a.re * r + a.im) / d, (a.im * r - a.re) / d)
    }
}

fn cpow(a: C, b: C) -> C {
    if b.im == 0.0 && b.re.fract() == 0.0 && b.re.abs() <= 64.0 {
        return a.powi(b.re as i32);
    }
    if a.norm() == 0.0 {
        return if b.re > 0.0 { C::new(0.0, 0.0) } else { C::new(f64::INFINITY, 0.0) };
    }
    (b * a.ln()).exp()
}

fn call(f: Func, v: &[C]) -> C {
    let a = v[0];
    match f {
        Func::Re => C::new(a.re, 0.0),
        Func::Im => C::new(a.im, 0.0),
        Func::Abs => C::new(a.norm(), 0.0),
        Func::Log => a.ln(),
        Func::Exp => a.exp(),
        Func::Cos => a.cos(),
        Func::Sin => a.sin(),
        Func::Sqrt => a.sqrt(),
        Func::Pow => cpow(a, v[1]),
    }
}

/// Value and complex derivative.
#[derive(Debug, Clone, Copy)]
struct Dual(C, C);

fn eval(n: &Node, loc: &Loc) -> Dual {
    let zero = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);
    match n {
        Node::Num(v) => Dual(*v, zero),
        Node::Z => Dual(loc.z(), one),
        Node::X => Dual(C::new(loc.z().re, 0.0), zero),
        Node::Y => Dual(C::new(loc.z().im, 0.0), zero),
        Node::Root { c1, anchor } => Dual(-*c1 * loc.gap_to(anchor), *c1),
        Node::Neg(a) => {
            let Dual(v, d) = eval(a, loc);
            Dual(-v, -d)
        }
        Node::Bin(op, a, b) => {
            let Dual(u, du) = eval(a, loc);
            let Dual(v, dv) = eval(b, loc);
            match op {
                Op::Add => Dual(u + v, du + dv),
                Op::Sub => Dual(u - v, du - dv),
                Op::Mul => Dual(u * v, du * v + u * dv),
                Op::Div => {
                    let q = div(u, v);
                    Dual(q, div(du - q * dv, v))
                }
                Op::Pow => {
                    let p = cpow(u, v);
                    let d = if dv == zero { v * cpow(u, v - one) * du } else { p * (dv * u.ln() + v * du / u) };
                    Dual(p, d)
                }
            }
        }
        Node::Call(f, args) => {
            let Dual(u, du) = eval(&args[0], loc);
            match f {
                Func::Re => Dual(C::new(u.re, 0.0), zero),
                Func::Im => Dual(C::new(u.im, 0.0), zero),
                Func::Abs => Dual(C::new(u.norm(), 0.0), zero),
                Func::Log => Dual(u.ln(), du / u),
                Func::Exp => {
                    let e = u.exp();
                    Dual(e, e * du)
                }
                Func::Cos => Dual(u.cos(), -u.sin() * du),
                Func::Sin => Dual(u.sin(), u.cos() * du),
                Func::Sqrt => {
                    let s = u.sqrt();
                    Dual(s, du / (s * 2.0))
                }
                Func::Pow => {
                    let Dual(v, dv) = eval(&args[1], loc);
                    let p = cpow(u, v);
                    let d = if dv == zero { v * cpow(u, v - one) * du } else { p * (dv * u.ln() + v * du / u) };
                    Dual(p, d)
                }
            }
        }
    }
}

/// Boundary behaviour bookkeeping: blow-up exponents and vanishing orders per anchor.
#[derive(Debug, Clone, Default)]
struct Sing {
    blow: Vec<(Anchor, f64)>,
    zero: Vec<(Anchor, f64)>,
    marks: Vec<Anchor>,
}

fn same(a: &Anchor, b: &Anchor) -> bool {
    a.angle_to(b).abs() < 1e-12
}

fn add_to(list: &mut Vec<(Anchor, f64)>, a: Anchor, e: f64, join: fn(f64, f64) -> f64) {
    if let Some(slot) = list.iter_mut().find(|(b, _)| same(b, &a)) {
        slot.1 = join(slot.1, e);
    } else {
        list.push((a, e));
    }
}

impl Sing {
    fn all_marks(&self) -> Vec<Anchor> {
        let mut m = self.marks.clone();
        m.extend(self.blow.iter().map(|p| p.0));
        m.extend(self.zero.iter().map(|p| p.0));
        m
    }

    fn scaled(&self, b: f64) -> Sing {
        let mut s = Sing { marks: self.marks.clone(), ..Default::default() };
        let (blow, zero) = if b >= 0.0 { (&self.blow, &self.zero) } else { (&self.zero, &self.blow) };
        for &(a, e) in blow {
            s.blow.push((a, e * b.abs()));
        }
        for &(a, e) in zero {
            s.zero.push((a, e * b.abs()));
        }
        if b.fract() != 0.0 {
            s.marks.extend(self.all_marks());
        }
        s
    }

    fn product(mut self, other: Sing) -> Sing {
        for (a, e) in other.blow {
            add_to(&mut self.blow, a, e, |x, y| x + y);
        }
        for (a, e) in other.zero {
            add_to(&mut self.zero, a, e, |x, y| x + y);
        }
        self.marks.extend(other.marks);
        self
    }

    fn sum(mut self, other: Sing) -> Sing {
        let other_marks = other.all_marks();
        for (a, e) in other.blow {
            add_to(&mut self.blow, a, e, f64::max);
        }
        let mut marks = self.all_marks();
        marks.extend(other_marks);
        self.zero.clear();
        self.marks = marks;
        self
    }

    fn opaque(&self) -> Sing {
        Sing { marks: self.all_marks(), ..Default::default() }
    }
}

fn sing(n: &Node) -> Sing {
    match n {
        Node::Num(_) | Node::Z | Node::X | Node::Y => Sing::default(),
        Node::Root { anchor, .. } => Sing { zero: vec![(*anchor, 1.0)], ..Default::default() },
        Node::Neg(a) => sing(a),
        Node::Bin(op, a, b) => {
            let (sa, sb) = (sing(a), sing(b));
            match op {
                Op::Add | Op::Sub => sa.sum(sb),
                Op::Mul => sa.product(sb),
                Op::Div => sa.product(sb.scaled(-1.0)),
                Op::Pow => match **b {
                    Node::Num(v) if v.im == 0.0 => sa.scaled(v.re),
                    _ => sa.opaque().sum(sb.opaque()),
                },
            }
        }
        Node::Call(f, args) => {
            let s = sing(&args[0]);
            match f {
                Func::Re | Func::Im | Func::Abs => Sing { zero: Vec::new(), ..s },
                Func::Sqrt => s.scaled(0.5),
                Func::Pow => match args[1] {
                    Node::Num(v) if v.im == 0.0 => s.scaled(v.re),
                    _ => s.opaque().sum(sing(&args[1]).opaque()),
                },
                _ => s.opaque(),
            }
        }
    }
}

#[derive(Clone)]
pub struct Expr {
    src: String,
    root: Node,
    holomorphic: bool,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self.src)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

fn uses_nonholomorphic(n: &Node) -> bool {
    match n {
        Node::X | Node::Y => true,
        Node::Neg(a) => uses_nonholomorphic(a),
        Node::Bin(_, a, b) => uses_nonholomorphic(a) || uses_nonholomorphic(b),
        Node::Call(f, args) => {
            matches!(f, Func::Re | Func::Im | Func::Abs) && args.iter().any(depends_on_z)
                || args.iter().any(uses_nonholomorphic)
        }
        _ => false,
    }
}

fn depends_on_z(n: &Node) -> bool {
    match n {
        Node::Num(_) => false,
        Node::Z | Node::X | Node::Y | Node::Root { .. } => true,
        Node::Neg(a) => depends_on_z(a),
        Node::Bin(_, a, b) => depends_on_z(a) || depends_on_z(b),
        Node::Call(_, args) => args.iter().any(depends_on_z),
    }
}

impl Expr {
    pub fn parse(s: &str) -> Result<Expr> {
        Expr::parse_with(s, &BTreeMap::new())
    }

    pub fn parse_with(s: &str, params: &BTreeMap<String, f64>) -> Result<Expr> {
        let toks = lex(s)?;
        if toks.is_empty() {
            return Err(Error::Parse("empty expression".into()));
        }
        let mut p = Parser { toks, k: 0, params };
        let node = p.expr()?;
        if p.k != p.toks.len() {
            return Err(Error::Parse(format!("trailing input in '{s}'")));
        }
        let root = simplify(node);
        let holomorphic = !uses_nonholomorphic(&root);
        Ok(Expr { src: s.trim().to_string(), root, holomorphic })
    }

    /// Parse with a single named parameter bound.
    pub fn parse_family(s: &str, name: &str, value: f64) -> Result<Expr> {
        let mut m = BTreeMap::new();
        m.insert(name.to_string(), value);
        Expr::parse_with(s, &m)
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn is_holomorphic(&self) -> bool {
        self.holomorphic
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        eval(&self.root, &Loc::new(z)).0
    }

    pub fn eval_loc(&self, loc: &Loc) -> Complex64 {
        eval(&self.root, loc).0
    }

    /// Value and complex derivative (meaningful only for holomorphic expressions).
    pub fn eval_with_derivative(&self, loc: &Loc) -> (Complex64, Complex64) {
        let Dual(v, d) = eval(&self.root, loc);
        (v, d)
    }

    pub fn real(&self, loc: &Loc) -> f64 {
        self.eval_loc(loc).re
    }

    /// Boundary singularity tags inferred from the expression tree.
    ///
    /// Powers of affine factors vanishing on the circle give exact exponents;
    /// logarithms, non-integer powers and transcendental wrappers give exponent-0
    /// breakpoints.
    pub fn boundary_tags(&self) -> Vec<SingularityTag> {
        let s = sing(&self.root);
        let mut tags: Vec<SingularityTag> = Vec::new();
        let mut push = |a: Anchor, e: f64| {
            if let Some(t) = tags.iter_mut().find(|t| same(&t.anchor, &a)) {
                t.exponent = t.exponent.max(e);
            } else {
                tags.push(SingularityTag::with_anchor(a, e));
            }
        };
        for &(a, e) in &s.blow {
            let z = s.zero.iter().find(|(b, _)| same(b, &a)).map_or(0.0, |p| p.1);
            push(a, (e - z).max(0.0));
        }
        for a in s.all_marks() {
            push(a, 0.0);
        }
        tags.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
        tags
    }
}

/// Parse `a+bi`-style complex literals (any constant expression).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let e = Expr::parse(s)?;
    match e.root {
        Node::Num(v) => Ok(v),
        _ => Err(Error::Parse(format!("'{s}' is not a constant"))),
    }
}

/// Parse a comma-separated list of complex constants.
pub fn parse_complex_list(s: &str) -> Result<Vec<Complex64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_complex).collect()
}
