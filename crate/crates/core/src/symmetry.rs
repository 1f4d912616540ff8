//! Lattice symmetries of the square grid and symmetry-respecting weighted sums.
//!
//! A weighted stencil sum evaluated in a fixed term order is not bit-identical
//! to the same sum evaluated on mirrored data, because floating-point addition
//! is not associative. [`SymDot`] fixes the order by summing over orbits of the
//! target's stabilizer with a binary tree whose shape every stabilizer element
//! preserves, so mirrored inputs produce mirrored outputs exactly.

use std::mem::MaybeUninit;

/// Element of the dihedral group of the square: optional swap of the axes,
/// followed by optional negation of each axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sym {
    pub swap: bool,
    pub fx: bool,
    pub fy: bool,
}

impl Sym {
    pub const IDENTITY: Sym = Sym {
        swap: false,
        fx: false,
        fy: false,
    };
    /// Rotation by 180 degrees; central in every group used here.
    pub const HALF_TURN: Sym = Sym {
        swap: false,
        fx: true,
        fy: true,
    };

    pub fn apply_i(&self, (x, y): (i32, i32)) -> (i32, i32) {
        let (a, b) = if self.swap { (y, x) } else { (x, y) };
        (if self.fx { -a } else { a }, if self.fy { -b } else { b })
    }

    pub fn apply_f(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let (a, b) = if self.swap { (y, x) } else { (x, y) };
        (if self.fx { -a } else { a }, if self.fy { -b } else { b })
    }

    /// Image of a coordinate axis (0 = x, 1 = y).
    pub fn apply_axis(&self, d: usize) -> usize {
        if self.swap {
            1 - d
        } else {
            d
        }
    }
}

/// Symmetry group of a grid: D4 for square 2D cells, D2 for rectangular
/// cells, the single x-reflection in 1D.
pub fn grid_group(ndim: usize, square: bool) -> Vec<Sym> {
    let mut out = Vec::new();
    for swap in [false, true] {
        if swap && (ndim == 1 || !square) {
            continue;
        }
        for fx in [false, true] {
            for fy in [false, true] {
                if fy && ndim == 1 {
                    continue;
                }
                out.push(Sym { swap, fx, fy });
            }
        }
    }
    out
}

/// Geometric target of a weight vector: a point in cell-width units relative
/// to the cell center, optionally tagged with a differentiation axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Target {
    pub point: (f64, f64),
    pub axis: Option<usize>,
}

impl Target {
    pub fn point(x: f64, y: f64) -> Target {
        Target {
            point: (x, y),
            axis: None,
        }
    }

    pub fn map(&self, g: &Sym) -> Target {
        Target {
            point: g.apply_f(self.point),
            axis: self.axis.map(|d| g.apply_axis(d)),
        }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf(usize),
    Pair(Box<Node>, Box<Node>),
}

impl Node {
    fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            Node::Leaf(i) => out.push(*i),
            Node::Pair(a, b) => {
                a.leaves(out);
                b.leaves(out);
            }
        }
    }
}

/// Instruction of the summation program.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Op {
    /// Push weight · value at the leaf's offset.
    Push(usize),
    /// Replace the two topmost entries by their sum.
    Add,
}

/// Weighted sum over integer offsets with a fixed, symmetry-respecting
/// evaluation order.
#[derive(Clone, Debug)]
pub struct SymDot {
    pub offsets: Vec<(i32, i32)>,
    pub weights: Vec<f64>,
    pub ops: Vec<Op>,
}

fn set_of(node: &Node, offsets: &[(i32, i32)]) -> Vec<(i32, i32)> {
    let mut idx = Vec::new();
    node.leaves(&mut idx);
    let mut s: Vec<(i32, i32)> = idx.iter().map(|&i| offsets[i]).collect();
    s.sort_unstable();
    s
}

fn mapped_set(g: &Sym, set: &[(i32, i32)]) -> Vec<(i32, i32)> {
    let mut s: Vec<(i32, i32)> = set.iter().map(|&o| g.apply_i(o)).collect();
    s.sort_unstable();
    s
}

/// Chain of subgroups {e} ⊂ G1 ⊂ … ⊂ H, each of index two in the next and
/// normal in H.
fn subgroup_chain(h: &[Sym]) -> Vec<Vec<Sym>> {
    match h.len() {
        1 => vec![],
        2 => vec![h.to_vec()],
        4 => {
            let g1 = vec![Sym::IDENTITY, Sym::HALF_TURN];
            debug_assert!(h.contains(&Sym::HALF_TURN));
            vec![g1, h.to_vec()]
        }
        8 => {
            let g1 = vec![Sym::IDENTITY, Sym::HALF_TURN];
            let g2: Vec<Sym> = h.iter().copied().filter(|s| !s.swap).collect();
            vec![g1, g2, h.to_vec()]
        }
        n => panic!("unsupported stabilizer order {n}"),
    }
}

impl SymDot {
    /// Builds the summation program for weights over offsets, invariant under
    /// every element of the stabilizer `h` (which must map the offset set onto
    /// itself and leave the weights invariant).
    pub fn new(offsets: Vec<(i32, i32)>, weights: Vec<f64>, h: &[Sym]) -> SymDot {
        assert_eq!(offsets.len(), weights.len());
        let mut nodes: Vec<Node> = (0..offsets.len()).map(Node::Leaf).collect();
        for level in subgroup_chain(h) {
            let mut merged: Vec<Node> = Vec::new();
            let mut used = vec![false; nodes.len()];
            for a in 0..nodes.len() {
                if used[a] {
                    continue;
                }
                used[a] = true;
                let sa = set_of(&nodes[a], &offsets);
                let mut partner = None;
                'search: for g in &level {
                    let img = mapped_set(g, &sa);
                    if img == sa {
                        continue;
                    }
                    for b in (a + 1)..nodes.len() {
                        if !used[b] && set_of(&nodes[b], &offsets) == img {
                            partner = Some(b);
                            break 'search;
                        }
                    }
                }
                match partner {
                    Some(b) => {
                        used[b] = true;
                        merged.push(Node::Pair(
                            Box::new(nodes[a].clone()),
                            Box::new(nodes[b].clone()),
                        ));
                    }
                    None => merged.push(nodes[a].clone()),
                }
            }
            nodes = merged;
        }
        let mut ops = Vec::new();
        for (k, n) in nodes.iter().enumerate() {
            emit(n, &mut ops);
            if k > 0 {
                ops.push(Op::Add);
            }
        }
        SymDot {
            offsets,
            weights,
            ops,
        }
    }

    /// Image of this program under `g`: same evaluation order, mapped offsets.
    pub fn map(&self, g: &Sym) -> SymDot {
        SymDot {
            offsets: self.offsets.iter().map(|&o| g.apply_i(o)).collect(),
            weights: self.weights.clone(),
            ops: self.ops.clone(),
        }
    }

    pub fn weight_at(&self, off: (i32, i32)) -> Option<f64> {
        self.offsets
            .iter()
            .position(|&o| o == off)
            .map(|k| self.weights[k])
    }

    pub fn sum(&self) -> f64 {
        self.eval(|k| self.weights[k])
    }

    /// Evaluates Σ wₖ·f(offsetₖ) in program order.
    pub fn eval_with(&self, f: impl Fn((i32, i32)) -> f64) -> f64 {
        self.eval(|k| self.weights[k] * f(self.offsets[k]))
    }

    fn eval(&self, term: impl Fn(usize) -> f64) -> f64 {
        let mut stack = [0.0f64; 64];
        let mut sp = 0;
        for op in &self.ops {
            match *op {
                Op::Push(k) => {
                    stack[sp] = term(k);
                    sp += 1;
                }
                Op::Add => {
                    sp -= 1;
                    stack[sp - 1] += stack[sp];
                }
            }
        }
        if sp == 0 {
            0.0
        } else {
            stack[0]
        }
    }

    /// Resolves offsets to linear displacements for a row-major array with
    /// the given row stride.
    pub fn linearize(&self, stride: isize) -> LinDot {
        let offs: Vec<isize> = self
            .offsets
            .iter()
            .map(|&(di, dj)| di as isize + dj as isize * stride)
            .collect();
        let sequential = self
            .ops
            .iter()
            .enumerate()
            .all(|(n, op)| match op {
                Op::Push(k) => n == 0 || (n % 2 == 1 && *k == (n + 1) / 2),
                Op::Add => n % 2 == 0 && n > 0,
            })
            && matches!(self.ops.first(), Some(Op::Push(0)));
        LinDot::new(offs, self.weights.clone(), &self.ops, sequential)
    }
}

fn emit(node: &Node, ops: &mut Vec<Op>) {
    match node {
        Node::Leaf(i) => ops.push(Op::Push(*i)),
        Node::Pair(a, b) => {
            emit(a, ops);
            emit(b, ops);
            ops.push(Op::Add);
        }
    }
}

/// Instruction of a linearized program.
#[derive(Clone, Copy, Debug)]
enum LinOp {
    Push(isize, f64),
    Add,
}

const LIN_STACK: usize = 16;

/// [`SymDot`] bound to a concrete array layout.
#[derive(Clone, Debug)]
pub struct LinDot {
    pub offsets: Vec<isize>,
    pub weights: Vec<f64>,
    prog: Vec<LinOp>,
    /// Program is a plain left-to-right sum over leaves in index order.
    sequential: bool,
}

impl LinDot {
    fn new(offsets: Vec<isize>, weights: Vec<f64>, ops: &[Op], sequential: bool) -> LinDot {
        let prog: Vec<LinOp> = ops
            .iter()
            .map(|op| match *op {
                Op::Push(k) => LinOp::Push(offsets[k], weights[k]),
                Op::Add => LinOp::Add,
            })
            .collect();
        let mut depth = 0usize;
        let mut max = 0usize;
        for op in &prog {
            match op {
                LinOp::Push(..) => depth += 1,
                LinOp::Add => depth -= 1,
            }
            max = max.max(depth);
        }
        assert!(max <= LIN_STACK, "summation tree too deep ({max})");
        LinDot {
            offsets,
            weights,
            prog,
            sequential,
        }
    }

    #[inline]
    pub fn apply4(&self, data: &[[f64; 4]], base: usize) -> [f64; 4] {
        if self.sequential {
            let mut acc = [0.0; 4];
            for (k, (&o, &w)) in self.offsets.iter().zip(&self.weights).enumerate() {
                let q = &data[(base as isize + o) as usize];
                if k == 0 {
                    acc = [w * q[0], w * q[1], w * q[2], w * q[3]];
                } else {
                    for c in 0..4 {
                        acc[c] += w * q[c];
                    }
                }
            }
            return acc;
        }
        // Depth is bounded at construction; every slot is written before read.
        let mut stack = [MaybeUninit::<[f64; 4]>::uninit(); LIN_STACK];
        let mut sp = 0;
        for op in &self.prog {
            match *op {
                LinOp::Push(o, w) => {
                    let q = &data[(base as isize + o) as usize];
                    stack[sp].write([w * q[0], w * q[1], w * q[2], w * q[3]]);
                    sp += 1;
                }
                LinOp::Add => {
                    sp -= 1;
                    // SAFETY: slots below `sp + 1` were written by pushes.
                    let (top, below) = unsafe { (stack[sp].assume_init(), stack[sp - 1].assume_init_mut()) };
                    for c in 0..4 {
                        below[c] += top[c];
                    }
                }
            }
        }
        // SAFETY: a non-empty program leaves its result in slot 0.
        unsafe { stack[0].assume_init() }
    }

    #[inline]
    pub fn apply1(&self, data: &[f64], base: usize) -> f64 {
        let mut stack = [0.0f64; LIN_STACK];
        let mut sp = 0;
        for op in &self.prog {
            match *op {
                LinOp::Push(o, w) => {
                    stack[sp] = w * data[(base as isize + o) as usize];
                    sp += 1;
                }
                LinOp::Add => {
                    sp -= 1;
                    stack[sp - 1] += stack[sp];
                }
            }
        }
        stack[0]
    }
}

/// Builds symmetric programs for a family of targets over one offset set.
///
/// Each target is either the image of an earlier canonical target under a
/// group element (weights copied by relabeling) or becomes canonical itself,
/// in which case `compute` supplies its weights in offset order.
pub fn build_family(
    offsets: &[(i32, i32)],
    targets: &[Target],
    group: &[Sym],
    mut compute: impl FnMut(&Target) -> Vec<f64>,
) -> Vec<SymDot> {
    let mut canon: Vec<(Target, SymDot)> = Vec::new();
    let mut out = Vec::with_capacity(targets.len());
    for t in targets {
        let mut found = None;
        'outer: for (ct, cd) in &canon {
            for g in group {
                if ct.map(g) == *t {
                    found = Some(cd.map(g));
                    break 'outer;
                }
            }
        }
        let dot = match found {
            Some(d) => d,
            None => {
                let w = compute(t);
                let stab: Vec<Sym> = group.iter().copied().filter(|g| t.map(g) == *t).collect();
                let d = SymDot::new(offsets.to_vec(), w, &stab);
                canon.push((*t, d.clone()));
                d
            }
        };
        out.push(dot);
    }
    out
}
