//! Append-only computation record with reverse-mode differentiation.
//!
//! Every primitive pushes one node holding its forward value. Inputs always
//! precede the node that consumes them, so a single reverse sweep over the
//! node list visits every node after all of its consumers.

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Probability clamp applied inside binary cross-entropy.
pub const BCE_CLAMP: f64 = 1e-12;

/// Handle to a node of a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    MatVec(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Hadamard(Var, Var),
    Scale(Var, f64),
    Relu(Var),
    Sigmoid(Var),
    SoftmaxRows(Var),
    Sum(Var),
    Concat(Vec<Var>),
    Reshape(Var),
    Row(Var, usize),
    Gather(Var, Vec<usize>),
    SquashRows(Var),
    CapsulePredict(Var, Var),
    RouteSum(Var, Var),
    Agreement(Var, Var),
    Bce(Var, f64),
}

#[derive(Clone, Debug)]
struct Node {
    op: Op,
    value: Tensor,
}

/// Single-threaded computation record. Build one per forward pass.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar with respect to every node reachable from it.
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// `None` when the node does not influence the loss.
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }

    /// Gradient for `v`, or zeros shaped like `like` when it is unreachable.
    pub fn get_or_zeros(&self, v: Var, like: &Tensor) -> Tensor {
        self.get(v)
            .cloned()
            .unwrap_or_else(|| Tensor::zeros(like.shape()))
    }
}

fn check_same(op: &'static str, a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::shape(op, a.shape(), b.shape()));
    }
    Ok(())
}

// |s|^2 / (1 + |s|^2) / |s| simplified, so the origin needs no guard.
fn squash_factor(n: f64) -> f64 {
    n / (1.0 + n * n)
}

fn squash_factor_deriv(n: f64) -> f64 {
    let d = 1.0 + n * n;
    (1.0 - n * n) / (d * d)
}

fn bce_value(p: f64, y: f64) -> f64 {
    let pc = p.clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
    -(y * pc.ln() + (1.0 - y) * (1.0 - pc).ln())
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op, value: Tensor) -> Var {
        self.nodes.push(Node { op, value });
        Var(self.nodes.len() - 1)
    }

    fn node(&self, v: Var) -> Result<&Node> {
        self.nodes.get(v.0).ok_or(Error::UnknownNode(v.0))
    }

    /// Inserts a value with no inputs (parameter, constant or data).
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(Op::Leaf, value)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    /// `[m, k] x [k, n] -> [m, n]`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (&self.node(a)?.value, &self.node(b)?.value);
        if ta.rank() != 2 || tb.rank() != 2 || ta.shape()[1] != tb.shape()[0] {
            return Err(Error::shape("matmul", ta.shape(), tb.shape()));
        }
        let (m, k, n) = (ta.shape()[0], ta.shape()[1], tb.shape()[1]);
        let (ad, bd) = (ta.data(), tb.data());
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            let orow = &mut out[i * n..(i + 1) * n];
            for p in 0..k {
                let aip = ad[i * k + p];
                if aip == 0.0 {
                    continue;
                }
                for (o, &bv) in orow.iter_mut().zip(&bd[p * n..(p + 1) * n]) {
                    *o += aip * bv;
                }
            }
        }
        let value = Tensor::new(vec![m, n], out)?;
        Ok(self.push(Op::MatMul(a, b), value))
    }

    /// `[m, k] x [k] -> [m]`.
    pub fn matvec(&mut self, a: Var, x: Var) -> Result<Var> {
        let (ta, tx) = (&self.node(a)?.value, &self.node(x)?.value);
        if ta.rank() != 2 || tx.rank() != 1 || ta.shape()[1] != tx.shape()[0] {
            return Err(Error::shape("matvec", ta.shape(), tx.shape()));
        }
        let k = ta.shape()[1];
        let xd = tx.data();
        let out: Vec<f64> = ta
            .data()
            .chunks_exact(k)
            .map(|row| row.iter().zip(xd).map(|(w, x)| w * x).sum())
            .collect();
        Ok(self.push(Op::MatVec(a, x), Tensor::vector(out)))
    }

    fn zip_with(
        &mut self,
        name: &'static str,
        a: Var,
        b: Var,
        op: Op,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Var> {
        let (ta, tb) = (&self.node(a)?.value, &self.node(b)?.value);
        check_same(name, ta, tb)?;
        let data = ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect();
        let value = Tensor::new(ta.shape().to_vec(), data)?;
        Ok(self.push(op, value))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with("add", a, b, Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with("sub", a, b, Op::Sub(a, b), |x, y| x - y)
    }

    /// Elementwise product of equal-shaped tensors.
    pub fn hadamard(&mut self, a: Var, b: Var) -> Result<Var> {
        self.zip_with("hadamard", a, b, Op::Hadamard(a, b), |x, y| x * y)
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Result<Var> {
        let value = self.node(a)?.value.map(|x| x * s);
        Ok(self.push(Op::Scale(a, s), value))
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        let value = self.node(a)?.value.map(|x| x.max(0.0));
        Ok(self.push(Op::Relu(a), value))
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let value = self.node(a)?.value.map(sigmoid);
        Ok(self.push(Op::Sigmoid(a), value))
    }

    /// Softmax over the last axis, one row at a time.
    pub fn softmax_rows(&mut self, a: Var) -> Result<Var> {
        let t = &self.node(a)?.value;
        let width = *t.shape().last().unwrap();
        let mut data = t.data().to_vec();
        for row in data.chunks_exact_mut(width) {
            softmax_in_place(row);
        }
        let value = Tensor::new(t.shape().to_vec(), data)?;
        Ok(self.push(Op::SoftmaxRows(a), value))
    }

    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let s = self.node(a)?.value.data().iter().sum();
        Ok(self.push(Op::Sum(a), Tensor::scalar(s)))
    }

    /// Flattens every input and concatenates them into one vector.
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("concat of zero tensors".into()));
        }
        let mut data = Vec::new();
        for &p in parts {
            data.extend_from_slice(self.node(p)?.value.data());
        }
        Ok(self.push(Op::Concat(parts.to_vec()), Tensor::vector(data)))
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        let t = &self.node(a)?.value;
        let value = t
            .reshaped(shape)
            .map_err(|_| Error::shape("reshape", t.shape(), shape))?;
        Ok(self.push(Op::Reshape(a), value))
    }

    /// Row `i` of a 2-D tensor as a vector.
    pub fn row(&mut self, a: Var, i: usize) -> Result<Var> {
        let t = &self.node(a)?.value;
        if t.rank() != 2 || i >= t.shape()[0] {
            return Err(Error::shape("row", t.shape(), &[i]));
        }
        let value = Tensor::vector(t.row(i).to_vec());
        Ok(self.push(Op::Row(a, i), value))
    }

    /// Rows `ids` of a 2-D table, stacked in order.
    pub fn gather_rows(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let t = &self.node(table)?.value;
        if t.rank() != 2 || ids.is_empty() {
            return Err(Error::shape("gather_rows", t.shape(), &[ids.len()]));
        }
        let rows = t.shape()[0];
        let mut data = Vec::with_capacity(ids.len() * t.shape()[1]);
        for &id in ids {
            if id >= rows {
                return Err(Error::TokenOutOfRange { id, size: rows });
            }
            data.extend_from_slice(t.row(id));
        }
        let value = Tensor::new(vec![ids.len(), t.shape()[1]], data)?;
        Ok(self.push(Op::Gather(table, ids.to_vec()), value))
    }

    /// Capsule squash applied to each row (last axis):
    /// `v = |s|^2 / (1 + |s|^2) * s / |s|`, with `squash(0) = 0`.
    pub fn squash_rows(&mut self, a: Var) -> Result<Var> {
        let t = &self.node(a)?.value;
        let width = *t.shape().last().unwrap();
        let mut data = t.data().to_vec();
        for row in data.chunks_exact_mut(width) {
            let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            let f = squash_factor(n);
            row.iter_mut().for_each(|x| *x *= f);
        }
        let value = Tensor::new(t.shape().to_vec(), data)?;
        Ok(self.push(Op::SquashRows(a), value))
    }

    /// Prediction vectors `out[i][j] = w[i][j] · u[i]`.
    ///
    /// `w: [n_in, n_out, d_out, d_in]`, `u: [n_in, d_in]` gives
    /// `[n_in, n_out, d_out]`.
    pub fn capsule_predict(&mut self, w: Var, u: Var) -> Result<Var> {
        let (tw, tu) = (&self.node(w)?.value, &self.node(u)?.value);
        let ws = tw.shape();
        if tw.rank() != 4 || tu.rank() != 2 || ws[0] != tu.shape()[0] || ws[3] != tu.shape()[1] {
            return Err(Error::shape("capsule_predict", ws, tu.shape()));
        }
        let (n_in, n_out, d_out, d_in) = (ws[0], ws[1], ws[2], ws[3]);
        let (wd, ud) = (tw.data(), tu.data());
        let mut out = vec![0.0; n_in * n_out * d_out];
        for i in 0..n_in {
            let ui = &ud[i * d_in..(i + 1) * d_in];
            for j in 0..n_out {
                for a in 0..d_out {
                    let off = ((i * n_out + j) * d_out + a) * d_in;
                    out[(i * n_out + j) * d_out + a] =
                        wd[off..off + d_in].iter().zip(ui).map(|(x, y)| x * y).sum();
                }
            }
        }
        let value = Tensor::new(vec![n_in, n_out, d_out], out)?;
        Ok(self.push(Op::CapsulePredict(w, u), value))
    }

    /// Coupling-weighted sum `s[j] = Σ_i c[i][j] · pred[i][j]`.
    pub fn route_sum(&mut self, c: Var, pred: Var) -> Result<Var> {
        let (tc, tp) = (&self.node(c)?.value, &self.node(pred)?.value);
        let ps = tp.shape();
        if tc.rank() != 2 || tp.rank() != 3 || tc.shape() != &ps[..2] {
            return Err(Error::shape("route_sum", tc.shape(), ps));
        }
        let (n_in, n_out, d) = (ps[0], ps[1], ps[2]);
        let mut out = vec![0.0; n_out * d];
        for i in 0..n_in {
            for j in 0..n_out {
                let cij = tc.data()[i * n_out + j];
                let p = &tp.data()[(i * n_out + j) * d..(i * n_out + j + 1) * d];
                for (o, x) in out[j * d..(j + 1) * d].iter_mut().zip(p) {
                    *o += cij * x;
                }
            }
        }
        let value = Tensor::new(vec![n_out, d], out)?;
        Ok(self.push(Op::RouteSum(c, pred), value))
    }

    /// Agreement logits `a[i][j] = pred[i][j] · v[j]`.
    pub fn agreement(&mut self, pred: Var, v: Var) -> Result<Var> {
        let (tp, tv) = (&self.node(pred)?.value, &self.node(v)?.value);
        let ps = tp.shape();
        if tp.rank() != 3 || tv.rank() != 2 || tv.shape() != &ps[1..] {
            return Err(Error::shape("agreement", ps, tv.shape()));
        }
        let (n_in, n_out, d) = (ps[0], ps[1], ps[2]);
        let mut out = vec![0.0; n_in * n_out];
        for i in 0..n_in {
            for j in 0..n_out {
                let p = &tp.data()[(i * n_out + j) * d..(i * n_out + j + 1) * d];
                let vj = &tv.data()[j * d..(j + 1) * d];
                out[i * n_out + j] = p.iter().zip(vj).map(|(x, y)| x * y).sum();
            }
        }
        let value = Tensor::new(vec![n_in, n_out], out)?;
        Ok(self.push(Op::Agreement(pred, v), value))
    }

    /// Binary cross-entropy of a probability node against a fixed label.
    pub fn bce(&mut self, p: Var, label: f64) -> Result<Var> {
        let t = &self.node(p)?.value;
        if !t.is_scalar() {
            return Err(Error::NotScalar(t.shape().to_vec()));
        }
        let value = Tensor::scalar(bce_value(t.item(), label));
        Ok(self.push(Op::Bce(p, label), value))
    }

    /// Reverse sweep from a scalar node. The tape is left untouched, so
    /// calling this twice yields identical gradients.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let root = self.node(loss)?;
        if !root.value.is_scalar() {
            return Err(Error::NotScalar(root.value.shape().to_vec()));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Tensor::filled(root.value.shape(), 1.0));

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            self.propagate(idx, &g, &mut grads);
            grads[idx] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, idx: usize, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let node = &self.nodes[idx];
        let gd = g.data();
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let (m, k, n) = (ta.shape()[0], ta.shape()[1], tb.shape()[1]);
                {
                    let ga = slot(grads, *a, ta);
                    for i in 0..m {
                        for p in 0..k {
                            let mut s = 0.0;
                            for j in 0..n {
                                s += gd[i * n + j] * tb.data()[p * n + j];
                            }
                            ga[i * k + p] += s;
                        }
                    }
                }
                let gb = slot(grads, *b, tb);
                for p in 0..k {
                    for i in 0..m {
                        let aip = ta.data()[i * k + p];
                        if aip == 0.0 {
                            continue;
                        }
                        for j in 0..n {
                            gb[p * n + j] += aip * gd[i * n + j];
                        }
                    }
                }
            }
            Op::MatVec(a, x) => {
                let (ta, tx) = (self.value(*a), self.value(*x));
                let k = ta.shape()[1];
                {
                    let ga = slot(grads, *a, ta);
                    for (i, &gi) in gd.iter().enumerate() {
                        for (o, &xj) in ga[i * k..(i + 1) * k].iter_mut().zip(tx.data()) {
                            *o += gi * xj;
                        }
                    }
                }
                let gx = slot(grads, *x, tx);
                for (i, &gi) in gd.iter().enumerate() {
                    for (o, &w) in gx.iter_mut().zip(&ta.data()[i * k..(i + 1) * k]) {
                        *o += gi * w;
                    }
                }
            }
            Op::Add(a, b) => {
                add_into(slot(grads, *a, self.value(*a)), gd, |g, _| g, &[]);
                add_into(slot(grads, *b, self.value(*b)), gd, |g, _| g, &[]);
            }
            Op::Sub(a, b) => {
                add_into(slot(grads, *a, self.value(*a)), gd, |g, _| g, &[]);
                add_into(slot(grads, *b, self.value(*b)), gd, |g, _| -g, &[]);
            }
            Op::Hadamard(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                add_into(slot(grads, *a, ta), gd, |g, y| g * y, tb.data());
                add_into(slot(grads, *b, tb), gd, |g, x| g * x, ta.data());
            }
            Op::Scale(a, s) => {
                let s = *s;
                add_into(slot(grads, *a, self.value(*a)), gd, |g, _| g * s, &[]);
            }
            Op::Relu(a) => {
                let ta = self.value(*a);
                add_into(
                    slot(grads, *a, ta),
                    gd,
                    |g, x| if x > 0.0 { g } else { 0.0 },
                    ta.data(),
                );
            }
            Op::Sigmoid(a) => {
                add_into(
                    slot(grads, *a, self.value(*a)),
                    gd,
                    |g, y| g * y * (1.0 - y),
                    node.value.data(),
                );
            }
            Op::SoftmaxRows(a) => {
                let width = *node.value.shape().last().unwrap();
                let ga = slot(grads, *a, self.value(*a));
                for ((gr, yr), out) in gd
                    .chunks_exact(width)
                    .zip(node.value.data().chunks_exact(width))
                    .zip(ga.chunks_exact_mut(width))
                {
                    let dot: f64 = gr.iter().zip(yr).map(|(g, y)| g * y).sum();
                    for ((o, g), y) in out.iter_mut().zip(gr).zip(yr) {
                        *o += y * (g - dot);
                    }
                }
            }
            Op::Sum(a) => {
                let g0 = gd[0];
                slot(grads, *a, self.value(*a)).iter_mut().for_each(|o| *o += g0);
            }
            Op::Concat(parts) => {
                let mut off = 0;
                for p in parts {
                    let t = self.value(*p);
                    let n = t.len();
                    add_into(slot(grads, *p, t), &gd[off..off + n], |g, _| g, &[]);
                    off += n;
                }
            }
            Op::Reshape(a) => {
                add_into(slot(grads, *a, self.value(*a)), gd, |g, _| g, &[]);
            }
            Op::Row(a, i) => {
                let w = gd.len();
                let ga = slot(grads, *a, self.value(*a));
                add_into(&mut ga[i * w..(i + 1) * w], gd, |g, _| g, &[]);
            }
            Op::Gather(table, ids) => {
                let t = self.value(*table);
                let width = t.shape()[1];
                let gt = slot(grads, *table, t);
                for (r, &id) in ids.iter().enumerate() {
                    for (o, g) in gt[id * width..(id + 1) * width]
                        .iter_mut()
                        .zip(&gd[r * width..(r + 1) * width])
                    {
                        *o += g;
                    }
                }
            }
            Op::SquashRows(a) => {
                let ta = self.value(*a);
                let width = *ta.shape().last().unwrap();
                let ga = slot(grads, *a, ta);
                for ((s, gr), out) in ta
                    .data()
                    .chunks_exact(width)
                    .zip(gd.chunks_exact(width))
                    .zip(ga.chunks_exact_mut(width))
                {
                    let n = s.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let f = squash_factor(n);
                    let radial = if n > 0.0 {
                        let sg: f64 = s.iter().zip(gr).map(|(x, g)| x * g).sum();
                        sg * squash_factor_deriv(n) / n
                    } else {
                        0.0
                    };
                    for ((o, g), x) in out.iter_mut().zip(gr).zip(s) {
                        *o += f * g + radial * x;
                    }
                }
            }
            Op::CapsulePredict(w, u) => {
                let (tw, tu) = (self.value(*w), self.value(*u));
                let ws = tw.shape();
                let (n_in, n_out, d_out, d_in) = (ws[0], ws[1], ws[2], ws[3]);
                {
                    let gw = slot(grads, *w, tw);
                    for i in 0..n_in {
                        let ui = &tu.data()[i * d_in..(i + 1) * d_in];
                        for ja in 0..n_out * d_out {
                            let gv = gd[i * n_out * d_out + ja];
                            if gv == 0.0 {
                                continue;
                            }
                            let off = (i * n_out * d_out + ja) * d_in;
                            for (o, x) in gw[off..off + d_in].iter_mut().zip(ui) {
                                *o += gv * x;
                            }
                        }
                    }
                }
                let gu = slot(grads, *u, tu);
                for i in 0..n_in {
                    let out = &mut gu[i * d_in..(i + 1) * d_in];
                    for ja in 0..n_out * d_out {
                        let gv = gd[i * n_out * d_out + ja];
                        if gv == 0.0 {
                            continue;
                        }
                        let off = (i * n_out * d_out + ja) * d_in;
                        for (o, x) in out.iter_mut().zip(&tw.data()[off..off + d_in]) {
                            *o += gv * x;
                        }
                    }
                }
            }
            Op::RouteSum(c, pred) => {
                let (tc, tp) = (self.value(*c), self.value(*pred));
                let ps = tp.shape();
                let (n_in, n_out, d) = (ps[0], ps[1], ps[2]);
                {
                    let gc = slot(grads, *c, tc);
                    for i in 0..n_in {
                        for j in 0..n_out {
                            let p = &tp.data()[(i * n_out + j) * d..(i * n_out + j + 1) * d];
                            gc[i * n_out + j] +=
                                p.iter().zip(&gd[j * d..(j + 1) * d]).map(|(x, g)| x * g).sum::<f64>();
                        }
                    }
                }
                let gp = slot(grads, *pred, tp);
                for i in 0..n_in {
                    for j in 0..n_out {
                        let cij = tc.data()[i * n_out + j];
                        let off = (i * n_out + j) * d;
                        for (o, g) in gp[off..off + d].iter_mut().zip(&gd[j * d..(j + 1) * d]) {
                            *o += cij * g;
                        }
                    }
                }
            }
            Op::Agreement(pred, v) => {
                let (tp, tv) = (self.value(*pred), self.value(*v));
                let ps = tp.shape();
                let (n_in, n_out, d) = (ps[0], ps[1], ps[2]);
                {
                    let gp = slot(grads, *pred, tp);
                    for i in 0..n_in {
                        for j in 0..n_out {
                            let gij = gd[i * n_out + j];
                            let off = (i * n_out + j) * d;
                            for (o, x) in gp[off..off + d].iter_mut().zip(&tv.data()[j * d..(j + 1) * d]) {
                                *o += gij * x;
                            }
                        }
                    }
                }
                let gv = slot(grads, *v, tv);
                for i in 0..n_in {
                    for j in 0..n_out {
                        let gij = gd[i * n_out + j];
                        let off = (i * n_out + j) * d;
                        for (o, x) in gv[j * d..(j + 1) * d].iter_mut().zip(&tp.data()[off..off + d]) {
                            *o += gij * x;
                        }
                    }
                }
            }
            Op::Bce(p, y) => {
                let y = *y;
                let pv = self.value(*p).item();
                let d = if (BCE_CLAMP..=1.0 - BCE_CLAMP).contains(&pv) {
                    -y / pv + (1.0 - y) / (1.0 - pv)
                } else {
                    0.0
                };
                slot(grads, *p, self.value(*p))[0] += gd[0] * d;
            }
        }
    }
}

fn slot<'g>(grads: &'g mut [Option<Tensor>], v: Var, like: &Tensor) -> &'g mut [f64] {
    grads[v.0]
        .get_or_insert_with(|| Tensor::zeros(like.shape()))
        .data_mut()
}

fn add_into(out: &mut [f64], g: &[f64], f: impl Fn(f64, f64) -> f64, other: &[f64]) {
    if other.is_empty() {
        for (o, &gv) in out.iter_mut().zip(g) {
            *o += f(gv, 0.0);
        }
    } else {
        for ((o, &gv), &x) in out.iter_mut().zip(g).zip(other) {
            *o += f(gv, x);
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Max-subtracted softmax over a slice.
pub fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in row.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    row.iter_mut().for_each(|x| *x /= total);
}
