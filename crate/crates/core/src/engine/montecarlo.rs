use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::exact::{backward_sweep, diagonal, Acc};
use crate::engine::model::{ContentMode, WeightModel};
use crate::error::{Error, Result};
use crate::hin::{MetaPathSet, NodeId, RelStep};

/// Walks per independent RNG stream. Fixed so that estimates do not depend
/// on the number of worker threads.
const CHUNK: u64 = 2048;

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn chunks(walks: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let count = walks.div_ceil(CHUNK) as usize;
    (0..count).into_par_iter().map(move |c| {
        let c = c as u64;
        let start = c * CHUNK;
        (c, (walks - start).min(CHUNK))
    })
}

/// One pair of surfers along `half`: each step picks a uniform neighbour on
/// both sides. Returns the importance-corrected tour weight if they meet,
/// else 0.
fn sample_pair(wm: &WeightModel<'_>, half: &[RelStep], u: NodeId, v: NodeId, rng: &mut ChaCha8Rng) -> f64 {
    let g = wm.graph();
    let (mut x, mut y) = (u, v);
    let mut weight = 1.0;
    for &step in half {
        let nx = g.neighbors(x, step);
        let ny = g.neighbors(y, step);
        if nx.is_empty() || ny.is_empty() {
            return 0.0;
        }
        let x2 = nx[rng.random_range(0..nx.len())];
        let y2 = ny[rng.random_range(0..ny.len())];
        let scale = wm.step_scale(step);
        weight *= wm.factor_unchecked(scale, x2, step)
            * wm.factor_unchecked(scale, y2, step)
            * wm.pair_content(x2, y2)
            * (nx.len() * ny.len()) as f64;
        if x2 == y2 {
            return weight;
        }
        x = x2;
        y = y2;
    }
    0.0
}

/// Random-surfer-pair estimate of the similarity of `u` and `v`.
pub fn hetfs_montecarlo(
    wm: &WeightModel<'_>,
    u: NodeId,
    v: NodeId,
    mps: &MetaPathSet,
    walks: u64,
    seed: u64,
) -> Result<f64> {
    wm.check_endpoint(u, mps)?;
    wm.check_endpoint(v, mps)?;
    if walks == 0 {
        return Err(Error::InvalidWalkCount);
    }
    if u == v {
        return Ok(1.0);
    }
    let sums: Vec<f64> = chunks(walks)
        .map(|(c, len)| {
            let mut rng = chunk_rng(seed, c);
            let mut sum = 0.0;
            for _ in 0..len {
                for p in mps.paths() {
                    sum += sample_pair(wm, p.half(), u, v, &mut rng);
                }
            }
            sum
        })
        .collect();
    Ok(sums.iter().sum::<f64>() / walks as f64)
}

/// Estimates for every endpoint-type node, in ascending node order, with
/// `u` at 1.
///
/// With per-node content, single walks from `u` estimate the reach vector
/// at every level and the exact backward fan of each meeting node spreads
/// it onto all partners. Pairwise content does not factor that way, so each
/// candidate is then estimated with surfer pairs.
pub fn hetfs_montecarlo_all(
    wm: &WeightModel<'_>,
    u: NodeId,
    mps: &MetaPathSet,
    walks: u64,
    seed: u64,
) -> Result<Vec<(NodeId, f64)>> {
    wm.check_endpoint(u, mps)?;
    if walks == 0 {
        return Err(Error::InvalidWalkCount);
    }
    let g = wm.graph();
    if wm.content_mode() == ContentMode::Pairwise {
        let mut out: Vec<(NodeId, f64)> = g
            .members(mps.endpoint())
            .iter()
            .filter(|&&v| v != u)
            .map(|&v| hetfs_montecarlo(wm, u, v, mps, walks, seed).map(|s| (v, s)))
            .filter(|r| !matches!(r, Ok((_, s)) if *s == 0.0))
            .collect::<Result<_>>()?;
        out.push((u, 1.0));
        out.sort_by_key(|&(v, _)| v);
        return Ok(out);
    }

    let n = g.node_count();
    let mut scratch = Acc::new(n);
    let mut result = Acc::new(n);
    for (pi, path) in mps.paths().iter().enumerate() {
        let half = path.half();
        let h = half.len();
        let stream_seed = seed.wrapping_add(pi as u64);
        let partial: Vec<Vec<HashMap<NodeId, f64>>> = chunks(walks)
            .map(|(c, len)| {
                let mut rng = chunk_rng(stream_seed, c);
                let mut levels: Vec<HashMap<NodeId, f64>> = vec![HashMap::new(); h + 1];
                for _ in 0..len {
                    let mut x = u;
                    let mut weight = 1.0;
                    for (i, &step) in half.iter().enumerate() {
                        let nx = g.neighbors(x, step);
                        if nx.is_empty() {
                            break;
                        }
                        let x2 = nx[rng.random_range(0..nx.len())];
                        weight *= wm.factor_unchecked(wm.step_scale(step), x2, step) * nx.len() as f64;
                        *levels[i + 1].entry(x2).or_insert(0.0) += weight;
                        x = x2;
                    }
                }
                levels
            })
            .collect();

        let mut reach: Vec<Vec<(NodeId, f64)>> = Vec::with_capacity(h + 1);
        reach.push(vec![(u, 1.0)]);
        for i in 1..=h {
            let mut level = Acc::new(n);
            for chunk in &partial {
                for (&x, &w) in &chunk[i] {
                    level.add(x, w);
                }
            }
            let scale = 1.0 / walks as f64;
            reach.push(level.into_sorted().into_iter().map(|(x, w)| (x, w * scale)).collect());
        }
        let diag = diagonal(wm, path);
        backward_sweep(wm, path, &diag, reach, &mut scratch, &mut result);
    }
    result.set(u, 1.0);
    Ok(result.into_sorted())
}
