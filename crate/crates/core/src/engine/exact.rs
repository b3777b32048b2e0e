use std::cell::RefCell;
use std::sync::Arc;

use rayon::prelude::*;

use crate::engine::model::{ContentMode, Diagonal, WeightModel};
use crate::error::{Error, Result};
use crate::hin::{MetaPath, MetaPathSet, NodeId, RelStep};

/// Dense accumulator that remembers which entries it touched. Untouched
/// slots hold NaN, which no valid score can be, so the touched flag costs no
/// extra memory and an update reads a single word.
pub(crate) struct Acc {
    slots: Vec<f64>,
    touched: Vec<NodeId>,
}

impl Acc {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            slots: vec![f64::NAN; n],
            touched: Vec::new(),
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, x: NodeId, v: f64) {
        let slot = &mut self.slots[x.index()];
        if slot.is_nan() {
            *slot = v;
            self.touched.push(x);
        } else {
            *slot += v;
        }
    }

    pub(crate) fn set(&mut self, x: NodeId, v: f64) {
        self.add(x, 0.0);
        self.slots[x.index()] = v;
    }

    /// Entries in ascending node order.
    pub(crate) fn into_sorted(mut self) -> Vec<(NodeId, f64)> {
        self.take_sorted()
    }

    /// Entries in ascending node order, clearing the accumulator.
    pub(crate) fn take_sorted(&mut self) -> Vec<(NodeId, f64)> {
        if self.touched.len() * 8 < self.slots.len() {
            self.touched.sort_unstable();
            return self.drain();
        }
        // dense: a linear scan beats sorting the touched list
        let out = self
            .slots
            .iter_mut()
            .enumerate()
            .filter(|(_, s)| !s.is_nan())
            .map(|(i, s)| (NodeId(i as u32), std::mem::replace(s, f64::NAN)))
            .collect();
        self.touched.clear();
        out
    }

    /// Touched entries in insertion order, clearing the accumulator.
    fn drain(&mut self) -> Vec<(NodeId, f64)> {
        let slots = &mut self.slots;
        let out = self
            .touched
            .iter()
            .map(|&x| (x, std::mem::replace(&mut slots[x.index()], f64::NAN)))
            .collect();
        self.touched.clear();
        out
    }
}

thread_local! {
    static POOL: RefCell<Vec<Acc>> = const { RefCell::new(Vec::new()) };
}

/// Run `f` with two clean accumulators of length at least `n`. They are
/// kept per thread, so a query costs time in the entries it touches rather
/// than in the size of the graph.
pub(crate) fn with_scratch<T>(n: usize, f: impl FnOnce(&mut Acc, &mut Acc) -> T) -> T {
    let take = || {
        POOL.with(|p| p.borrow_mut().pop())
            .filter(|a| a.slots.len() >= n)
            .unwrap_or_else(|| Acc::new(n))
    };
    let (mut a, mut b) = (take(), take());
    let out = f(&mut a, &mut b);
    a.drain();
    b.drain();
    POOL.with(|p| p.borrow_mut().extend([a, b]));
    out
}

/// Pairwise evaluation by full recursion over neighbour pairs. Scores
/// stop accumulating as soon as the two walkers meet.
pub fn hetfs_bruteforce(wm: &WeightModel<'_>, u: NodeId, v: NodeId, mps: &MetaPathSet) -> Result<f64> {
    wm.check_endpoint(u, mps)?;
    wm.check_endpoint(v, mps)?;
    if u == v {
        return Ok(1.0);
    }
    Ok(mps.paths().iter().map(|p| pair_recursion(wm, p.half(), u, v)).sum())
}

fn pair_recursion(wm: &WeightModel<'_>, half: &[RelStep], x: NodeId, y: NodeId) -> f64 {
    if x == y {
        return 1.0;
    }
    let Some((&step, rest)) = half.split_first() else {
        return 0.0;
    };
    let g = wm.graph();
    let scale = wm.step_scale(step);
    let mut acc = 0.0;
    for &x2 in g.neighbors(x, step) {
        let fx = wm.factor_unchecked(scale, x2, step);
        for &y2 in g.neighbors(y, step) {
            let fy = wm.factor_unchecked(scale, y2, step);
            let w = fx * fy * wm.pair_content(x2, y2);
            if w != 0.0 {
                acc += w * pair_recursion(wm, rest, x2, y2);
            }
        }
    }
    acc
}

/// Push a sparse vector one step along `step`, multiplying by the step
/// factor of each reached node.
pub(crate) fn push_forward(
    wm: &WeightModel<'_>,
    from: &[(NodeId, f64)],
    step: RelStep,
    acc: &mut Acc,
) -> Vec<(NodeId, f64)> {
    let g = wm.graph();
    for &(x, val) in from {
        for &x2 in g.neighbors(x, step) {
            acc.add(x2, val);
        }
    }
    let scale = wm.step_scale(step);
    let mut out = acc.drain();
    for (x2, val) in out.iter_mut() {
        *val *= wm.factor_unchecked(scale, *x2, step);
    }
    out
}

/// Pull a level vector back one step: `y(x) = Σ_{x′ ∈ N(x)} F(x′)·z(x′)`.
pub(crate) fn push_backward(wm: &WeightModel<'_>, from: &[(NodeId, f64)], step: RelStep, acc: &mut Acc) {
    let g = wm.graph();
    let back = g.schema().inverse(step);
    let scale = wm.step_scale(step);
    for &(x2, val) in from {
        let w = val * wm.factor_unchecked(scale, x2, step);
        if w == 0.0 {
            continue;
        }
        for &x in g.neighbors(x2, back) {
            acc.add(x, w);
        }
    }
}

/// Meeting corrections for every level of `path`.
pub(crate) fn diagonal(wm: &WeightModel<'_>, path: &MetaPath) -> Arc<Diagonal> {
    if let Some(d) = wm.cached_diagonal(path) {
        return d;
    }
    let g = wm.graph();
    let half = path.half();
    let h = half.len();
    let n = g.node_count();
    // levels[j - 1] holds D_j for j = 1..h-1; D_h = 1.
    let mut levels: Vec<Vec<f64>> = vec![Vec::new(); h.saturating_sub(1)];
    for j in (1..h).rev() {
        let members = g.members(path.types()[j]);
        let computed: Vec<(NodeId, f64)> = members
            .par_iter()
            .map_init(
                || Acc::new(n),
                |acc, &z| {
                    let mut cur = vec![(z, 1.0)];
                    let mut repeat = 0.0;
                    for i in j + 1..=h {
                        cur = push_forward(wm, &cur, half[i - 1], acc);
                        let d_i = if i == h { None } else { Some(&levels[i - 1]) };
                        repeat += cur
                            .iter()
                            .map(|&(w, r)| r * r * d_i.map_or(1.0, |d| d[w.index()]))
                            .sum::<f64>();
                    }
                    (z, 1.0 - repeat)
                },
            )
            .collect();
        let mut level = vec![1.0; n];
        for (z, d) in computed {
            level[z.index()] = d;
        }
        levels[j - 1] = level;
    }
    let d = Arc::new(Diagonal { levels });
    wm.store_diagonal(path, d.clone());
    d
}

/// Warm the per-path caches used by [`hetfs_single_source`].
pub fn prepare(wm: &WeightModel<'_>, mps: &MetaPathSet) {
    for p in mps.paths() {
        diagonal(wm, p);
    }
}

/// Given `reach[i]`, the level-`i` reach vector of the query node, add
/// `Σ_i B_1⋯B_i(reach[i]·D_i)` into `result`. Evaluated Horner-style:
/// `z_h = reach[h]`, `z_{i-1} = B_i z_i + reach[i-1]·D_{i-1}`.
pub(crate) fn backward_sweep(
    wm: &WeightModel<'_>,
    path: &MetaPath,
    diag: &Diagonal,
    mut reach: Vec<Vec<(NodeId, f64)>>,
    scratch: &mut Acc,
    result: &mut Acc,
) {
    let half = path.half();
    let h = half.len();
    let mut z = std::mem::take(&mut reach[h]);
    for i in (1..=h).rev() {
        if i == 1 {
            push_backward(wm, &z, half[0], result);
        } else {
            push_backward(wm, &z, half[i - 1], scratch);
            let d = &diag.levels[i - 2];
            for &(w, r) in &reach[i - 1] {
                scratch.add(w, r * d[w.index()]);
            }
            z = scratch.drain();
        }
    }
}

/// Scores of every endpoint-type node reachable from `u`, in ascending node
/// order; `u` itself scores 1. Unlisted nodes score 0.
pub fn hetfs_single_source(wm: &WeightModel<'_>, u: NodeId, mps: &MetaPathSet) -> Result<Vec<(NodeId, f64)>> {
    wm.check_endpoint(u, mps)?;
    if wm.content_mode() == ContentMode::Pairwise {
        return Err(Error::UnsupportedContentMode("pair"));
    }
    Ok(with_scratch(wm.graph().node_count(), |scratch, result| {
        for path in mps.paths() {
            let half = path.half();
            let h = half.len();
            let diag = diagonal(wm, path);
            let mut reach: Vec<Vec<(NodeId, f64)>> = Vec::with_capacity(h + 1);
            reach.push(vec![(u, 1.0)]);
            for i in 1..=h {
                let next = push_forward(wm, &reach[i - 1], half[i - 1], scratch);
                reach.push(next);
            }
            backward_sweep(wm, path, &diag, reach, scratch, result);
        }
        result.set(u, 1.0);
        result.take_sorted()
    }))
}
