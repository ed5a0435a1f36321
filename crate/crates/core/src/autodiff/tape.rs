use std::collections::HashMap;
use std::fmt;

use crate::scalar::Scalar;

/// Handle to a node of a tape under construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub(crate) u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Elementary operation recorded on a tape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind<T> {
    Const(T),
    /// The `n`-th input of the tape.
    Input(u32),
    Add,
    Sub,
    Mul,
    Neg,
    Recip,
    Exp,
    Log,
    Cos,
    Sin,
    Abs,
    Min,
    Max,
    /// `min(max(x, 0), 1)`
    Clamp01,
    Sigmoid,
    /// `min(max(x / 5 + 1/2, 0), 1)`
    HardSig,
    Elu,
    /// `x^p` for a constant exponent.
    Pow(T),
    /// Wrap into `(-1, 1]` by multiples of 2.
    Wrap2,
}

impl<T> Kind<T> {
    pub fn arity(&self) -> usize {
        match self {
            Kind::Const(_) | Kind::Input(_) => 0,
            Kind::Add | Kind::Sub | Kind::Mul | Kind::Min | Kind::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node<T> {
    pub kind: Kind<T>,
    pub args: [u32; 2],
}

/// Value of one elementary operation.
#[inline]
pub(crate) fn apply<T: Scalar>(kind: &Kind<T>, a: T, b: T) -> T {
    match *kind {
        Kind::Const(c) => c,
        Kind::Input(_) => a,
        Kind::Add => a + b,
        Kind::Sub => a - b,
        Kind::Mul => a * b,
        Kind::Neg => -a,
        Kind::Recip => a.recip(),
        Kind::Exp => a.exp(),
        Kind::Log => a.ln(),
        Kind::Cos => a.cos(),
        Kind::Sin => a.sin(),
        Kind::Abs => a.abs(),
        Kind::Min => a.min(b),
        Kind::Max => a.max(b),
        Kind::Clamp01 => a.max(T::zero()).min(T::one()),
        Kind::Sigmoid => sigmoid(a),
        Kind::HardSig => (a * T::of(0.2) + T::of(0.5)).max(T::zero()).min(T::one()),
        Kind::Elu => {
            if a >= T::zero() {
                a
            } else {
                a.exp_m1()
            }
        }
        Kind::Pow(p) => a.powf(p),
        Kind::Wrap2 => crate::fuzzy::wrap2(a),
    }
}

#[inline]
pub(crate) fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// An immutable, topologically ordered computation graph.
///
/// Every node only refers to nodes with smaller indices, so a single
/// forward sweep evaluates it and a single reverse sweep differentiates it.
#[derive(Clone, Debug)]
pub struct Tape<T> {
    pub(crate) nodes: Vec<Node<T>>,
    pub(crate) inputs: Vec<u32>,
    pub(crate) outputs: Vec<u32>,
}

impl<T: Scalar> Tape<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Node index of each output.
    pub fn outputs(&self) -> &[u32] {
        &self.outputs
    }

    /// Node index of each input.
    pub fn inputs(&self) -> &[u32] {
        &self.inputs
    }

    /// Text listing of the graph for inspection; not a stable format.
    pub fn dump(&self) -> String {
        self.to_string()
    }
}

impl<T: Scalar> fmt::Display for Tape<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, node) in self.nodes.iter().enumerate() {
            write!(f, "{i:>6}  {:?}", node.kind)?;
            match node.kind.arity() {
                1 => write!(f, " ({})", node.args[0])?,
                2 => write!(f, " ({}, {})", node.args[0], node.args[1])?,
                _ => {}
            }
            writeln!(f)?;
        }
        writeln!(f, "outputs: {:?}", self.outputs)
    }
}

/// Records a tape, folding constants as it goes.
///
/// Besides evaluating operations whose arguments are all constant, the
/// builder drops exact identities (`x + 0`, `x * 1`) and annihilations
/// (`x * 0`), which keeps hash circuits small when most of a padded block
/// and all round constants are known binbits.
#[derive(Debug)]
pub struct TapeBuilder<T> {
    nodes: Vec<Node<T>>,
    inputs: Vec<u32>,
    consts: HashMap<u64, Var>,
}

impl<T: Scalar> Default for TapeBuilder<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> TapeBuilder<T> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            inputs: Vec::new(),
            consts: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, kind: Kind<T>, args: [u32; 2]) -> Var {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node { kind, args });
        Var(id)
    }

    pub fn input(&mut self) -> Var {
        let n = self.inputs.len() as u32;
        let v = self.push(Kind::Input(n), [0, 0]);
        self.inputs.push(v.0);
        v
    }

    pub fn inputs(&mut self, n: usize) -> Vec<Var> {
        (0..n).map(|_| self.input()).collect()
    }

    pub fn constant(&mut self, value: T) -> Var {
        let key = value.to_f64_lossy().to_bits();
        if let Some(&v) = self.consts.get(&key) {
            return v;
        }
        let v = self.push(Kind::Const(value), [0, 0]);
        self.consts.insert(key, v);
        v
    }

    pub fn zero(&mut self) -> Var {
        self.constant(T::zero())
    }

    pub fn one(&mut self) -> Var {
        self.constant(T::one())
    }

    /// The constant value of `v`, if it is a constant node.
    pub fn const_value(&self, v: Var) -> Option<T> {
        match self.nodes[v.index()].kind {
            Kind::Const(c) => Some(c),
            _ => None,
        }
    }

    fn is_const(&self, v: Var, value: f64) -> bool {
        self.const_value(v)
            .is_some_and(|c| c.to_f64_lossy() == value)
    }

    /// Records a unary operation, folding it when the argument is constant.
    pub fn unary(&mut self, kind: Kind<T>, a: Var) -> Var {
        debug_assert_eq!(kind.arity(), 1);
        if let Some(c) = self.const_value(a) {
            return self.constant(apply(&kind, c, T::zero()));
        }
        self.push(kind, [a.0, 0])
    }

    /// Records a binary operation, folding constants and exact identities.
    pub fn binary(&mut self, kind: Kind<T>, a: Var, b: Var) -> Var {
        debug_assert_eq!(kind.arity(), 2);
        if let (Some(x), Some(y)) = (self.const_value(a), self.const_value(b)) {
            return self.constant(apply(&kind, x, y));
        }
        match kind {
            Kind::Add if self.is_const(a, 0.0) => return b,
            Kind::Add | Kind::Sub if self.is_const(b, 0.0) => return a,
            Kind::Mul if self.is_const(a, 1.0) => return b,
            Kind::Mul if self.is_const(b, 1.0) => return a,
            Kind::Mul if self.is_const(a, 0.0) || self.is_const(b, 0.0) => return self.zero(),
            _ => {}
        }
        self.push(kind, [a.0, b.0])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.binary(Kind::Add, a, b)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.binary(Kind::Sub, a, b)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.binary(Kind::Mul, a, b)
    }

    pub fn min(&mut self, a: Var, b: Var) -> Var {
        self.binary(Kind::Min, a, b)
    }

    pub fn max(&mut self, a: Var, b: Var) -> Var {
        self.binary(Kind::Max, a, b)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let c = self.constant(T::of(c));
        self.mul(a, c)
    }

    pub fn add_const(&mut self, a: Var, c: f64) -> Var {
        let c = self.constant(T::of(c));
        self.add(a, c)
    }

    /// `c - a`
    pub fn rsub_const(&mut self, c: f64, a: Var) -> Var {
        let c = self.constant(T::of(c));
        self.sub(c, a)
    }

    pub fn neg(&mut self, a: Var) -> Var {
        self.unary(Kind::Neg, a)
    }

    pub fn recip(&mut self, a: Var) -> Var {
        self.unary(Kind::Recip, a)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.unary(Kind::Exp, a)
    }

    pub fn log(&mut self, a: Var) -> Var {
        self.unary(Kind::Log, a)
    }

    pub fn cos(&mut self, a: Var) -> Var {
        self.unary(Kind::Cos, a)
    }

    pub fn sin(&mut self, a: Var) -> Var {
        self.unary(Kind::Sin, a)
    }

    pub fn abs(&mut self, a: Var) -> Var {
        self.unary(Kind::Abs, a)
    }

    pub fn clamp01(&mut self, a: Var) -> Var {
        self.unary(Kind::Clamp01, a)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.unary(Kind::Sigmoid, a)
    }

    pub fn hard_sigmoid(&mut self, a: Var) -> Var {
        self.unary(Kind::HardSig, a)
    }

    pub fn elu(&mut self, a: Var) -> Var {
        self.unary(Kind::Elu, a)
    }

    pub fn pow(&mut self, a: Var, p: f64) -> Var {
        self.unary(Kind::Pow(T::of(p)), a)
    }

    pub fn wrap2(&mut self, a: Var) -> Var {
        self.unary(Kind::Wrap2, a)
    }

    /// Sum of `items`; the empty sum is the constant 0.
    pub fn sum(&mut self, items: &[Var]) -> Var {
        let mut iter = items.iter();
        let Some(&first) = iter.next() else {
            return self.zero();
        };
        iter.fold(first, |acc, &x| self.add(acc, x))
    }

    /// Freezes the graph with the given output nodes.
    pub fn finish(self, outputs: &[Var]) -> Tape<T> {
        Tape {
            nodes: self.nodes,
            inputs: self.inputs,
            outputs: outputs.iter().map(|v| v.0).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_constants_and_identities() {
        let mut b = TapeBuilder::<f64>::new();
        let x = b.input();
        let zero = b.zero();
        let one = b.one();
        let two = b.constant(2.0);
        assert_eq!(b.add(x, zero), x);
        assert_eq!(b.add(zero, x), x);
        assert_eq!(b.sub(x, zero), x);
        assert_eq!(b.mul(x, one), x);
        assert_eq!(b.mul(one, x), x);
        assert_eq!(b.mul(x, zero), zero);
        let three = b.add(one, two);
        assert_eq!(b.const_value(three), Some(3.0));
        let s = b.sigmoid(zero);
        assert_eq!(b.const_value(s), Some(0.5));
        // constants are shared
        assert_eq!(b.constant(3.0), three);
        let before = b.len();
        let y = b.mul(x, two);
        assert_eq!(b.len(), before + 1);
        let tape = b.finish(&[y]);
        assert_eq!(tape.num_inputs(), 1);
        assert_eq!(tape.num_outputs(), 1);
    }

    #[test]
    fn arguments_precede_nodes() {
        let mut b = TapeBuilder::<f64>::new();
        let x = b.input();
        let y = b.input();
        let s = b.add(x, y);
        let p = b.mul(s, x);
        let e = b.exp(p);
        let tape = b.finish(&[e]);
        for (i, node) in tape.nodes().iter().enumerate() {
            for &a in &node.args[..node.kind.arity()] {
                assert!((a as usize) < i);
            }
        }
        assert!(tape.dump().contains("Exp"));
    }

    #[test]
    fn hard_sigmoid_clamps() {
        assert_eq!(apply(&Kind::HardSig, 2.5f64, 0.0), 1.0);
        assert_eq!(apply(&Kind::HardSig, -2.5f64, 0.0), 0.0);
        assert_eq!(apply(&Kind::HardSig, 0.0f64, 0.0), 0.5);
        assert_eq!(apply(&Kind::Elu, -1.0f64, 0.0), (-1.0f64).exp() - 1.0);
        assert_eq!(apply(&Kind::Sigmoid, 0.0f64, 0.0), 0.5);
    }
}
