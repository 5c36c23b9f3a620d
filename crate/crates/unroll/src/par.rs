// Copyright 2026 The unroll authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Thread-pool drivers whose results do not depend on the number of threads.

use rayon::prelude::*;

use unroll_core::risk::{check_mc_input, finish_mc, mc_shard, mc_shards, Welford};
use unroll_core::train::{depth_row, sweep_cells, train, DepthRow, FrameDataset, TrainConfig};
use unroll_core::{LinearEstimator, McEstimate, ModelParams, Result};

/// A pool with `threads` workers; `0` uses every core.
pub fn build_pool(threads: usize) -> std::result::Result<rayon::ThreadPool, rayon::ThreadPoolBuildError> {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build()
}

/// Same estimate as [`unroll_core::mc_risk`], with shards evaluated in
/// parallel and merged in shard order.
pub fn mc_risk_par(t: &LinearEstimator, params: &ModelParams, m: usize, seed: u64) -> Result<McEstimate> {
    check_mc_input(t, params, m)?;
    let shards: Vec<(u64, usize)> = mc_shards(m).collect();
    let parts: Vec<Welford> = shards
        .par_iter()
        .map(|&(shard, len)| mc_shard(t, params, seed, shard, len))
        .collect();
    let mut acc = Welford::new();
    parts.iter().for_each(|p| acc.merge(p));
    Ok(finish_mc(&acc, seed))
}

/// Parallel [`unroll_core::sweep_depth`]; rows come back in cell order.
pub fn sweep_depth_par(template: &TrainConfig, data: &FrameDataset, depths: &[usize]) -> Result<Vec<DepthRow>> {
    sweep_cells(template, depths)
        .par_iter()
        .map(|cfg| train(cfg, data).map(|res| depth_row(cfg, &res)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use unroll_core::linalg::Matrix;
    use unroll_core::{mc_risk, DataKind};

    #[test]
    fn parallel_mc_matches_sequential() {
        let p = ModelParams::new(3, 0.5, 0.4, 0.3, DataKind::Iid).unwrap();
        let t = LinearEstimator::new(Matrix::identity(3).scale(0.7)).unwrap();
        let seq = mc_risk(&t, &p, 10_000, 42).unwrap();
        for threads in [1, 3] {
            let pool = build_pool(threads).unwrap();
            let par = pool.install(|| mc_risk_par(&t, &p, 10_000, 42)).unwrap();
            assert_eq!(par, seq);
        }
    }
}
