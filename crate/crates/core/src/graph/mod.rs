//! Sparse W-random graphs and the matrices `P = A/(pn)`, `P̄ = W/n`, `D = P − P̄`.

mod matrix;
mod norm;
mod tail;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

pub use matrix::DenseMatrix;
pub use norm::{
    norm_inf_to_one_exact, norm_inf_to_one_exact_with_cap, norm_inf_to_one_lower,
    norm_inf_to_one_upper, NormMethod, NormResult, ENUMERATION_CAP,
};
pub use tail::{bennett_crossover, bennett_log_tail};

use crate::model::{Kernel, Media};
use crate::{Error, Result};

/// Storage of the symmetric 0/1 adjacency matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Adjacency {
    /// Compressed sparse rows with sorted column indices.
    Csr { offsets: Vec<usize>, columns: Vec<u32> },
    /// One bit per entry, rows padded to whole words.
    Bitset { words_per_row: usize, bits: Vec<u64> },
}

impl Adjacency {
    fn from_rows(n: usize, rows: &[Vec<u32>], dense: bool) -> Self {
        if dense {
            let words_per_row = n.div_ceil(64);
            let mut bits = vec![0u64; n * words_per_row];
            for (i, row) in rows.iter().enumerate() {
                for &j in row {
                    bits[i * words_per_row + j as usize / 64] |= 1u64 << (j % 64);
                }
            }
            Adjacency::Bitset {
                words_per_row,
                bits,
            }
        } else {
            let mut offsets = Vec::with_capacity(n + 1);
            offsets.push(0);
            let mut columns = Vec::with_capacity(rows.iter().map(Vec::len).sum());
            for row in rows {
                columns.extend_from_slice(row);
                offsets.push(columns.len());
            }
            Adjacency::Csr { offsets, columns }
        }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        match self {
            Adjacency::Csr { offsets, columns } => columns[offsets[i]..offsets[i + 1]]
                .binary_search(&(j as u32))
                .is_ok(),
            Adjacency::Bitset {
                words_per_row,
                bits,
            } => bits[i * words_per_row + j / 64] >> (j % 64) & 1 == 1,
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        match self {
            Adjacency::Csr { offsets, .. } => offsets[i + 1] - offsets[i],
            Adjacency::Bitset {
                words_per_row,
                bits,
            } => bits[i * words_per_row..(i + 1) * words_per_row]
                .iter()
                .map(|w| w.count_ones() as usize)
                .sum(),
        }
    }

    /// Calls `f(j)` for each neighbor `j` of `i` in increasing order.
    #[inline]
    pub fn for_each_neighbor(&self, i: usize, mut f: impl FnMut(usize)) {
        match self {
            Adjacency::Csr { offsets, columns } => {
                for &j in &columns[offsets[i]..offsets[i + 1]] {
                    f(j as usize);
                }
            }
            Adjacency::Bitset {
                words_per_row,
                bits,
            } => {
                let row = &bits[i * words_per_row..(i + 1) * words_per_row];
                for (w, &word) in row.iter().enumerate() {
                    let mut rest = word;
                    while rest != 0 {
                        let b = rest.trailing_zeros() as usize;
                        f(w * 64 + b);
                        rest &= rest - 1;
                    }
                }
            }
        }
    }

    pub fn is_csr(&self) -> bool {
        matches!(self, Adjacency::Csr { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum MeanField {
    Constant(f64),
    Table(Vec<f64>),
}

/// One realization of the graph together with its media.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    n: usize,
    p: f64,
    seed: u64,
    kernel_id: String,
    kernel_sup: f64,
    media: Media,
    adjacency: Adjacency,
    /// `W(ω_i, ω_j)`, kept as a single value for constant kernels.
    weights: MeanField,
}

fn validate_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!("p = {p} is not in (0, 1]")))
    }
}

fn kernel_table(n: usize, p: f64, kernel: &Kernel, media: &Media) -> Result<MeanField> {
    if let Some(c) = kernel.as_constant() {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::NonFiniteKernel { i: 0, j: 0 });
        }
        if p * c > 1.0 {
            return Err(Error::ProbabilityAboveOne {
                i: 0,
                j: 0,
                value: p * c,
            });
        }
        return Ok(MeanField::Constant(c));
    }
    let mut table = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let w = kernel.eval(media.get(i), media.get(j));
            if !w.is_finite() || w < 0.0 {
                return Err(Error::NonFiniteKernel { i, j });
            }
            if p * w > 1.0 {
                return Err(Error::ProbabilityAboveOne { i, j, value: p * w });
            }
            table[i * n + j] = w;
            table[j * n + i] = w;
        }
    }
    Ok(MeanField::Table(table))
}

/// Samples `A_ij ~ Bernoulli(p W(ω_i, ω_j))` independently for `i ≤ j`,
/// loops included, and mirrors to `j > i`.
///
/// Pairs are visited row by row (`i` ascending, then `j ≥ i` ascending),
/// each consuming one uniform from the graph stream of `seed`.
pub fn sample_w_graph(
    n: usize,
    p: f64,
    kernel: &Kernel,
    media: Media,
    seed: u64,
) -> Result<GraphSample> {
    validate_p(p)?;
    if media.len() != n {
        return Err(Error::ShapeMismatch(alloc::format!(
            "{} media vectors for n = {n}",
            media.len()
        )));
    }
    let weights = kernel_table(n, p, kernel, &media)?;
    let mut rng = crate::rng::stream(seed, crate::rng::tag::GRAPH);
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i..n {
            let w = match &weights {
                MeanField::Constant(c) => *c,
                MeanField::Table(t) => t[i * n + j],
            };
            if rng.gen::<f64>() < p * w {
                rows[i].push(j as u32);
                if j != i {
                    rows[j].push(i as u32);
                }
            }
        }
    }
    let dense = p * n as f64 > n as f64 / 8.0;
    Ok(GraphSample {
        n,
        p,
        seed,
        kernel_id: kernel.id().into(),
        kernel_sup: kernel.sup(),
        media,
        adjacency: Adjacency::from_rows(n, &rows, dense),
        weights,
    })
}

impl GraphSample {
    /// Rebuilds a sample from a stored upper-triangular edge list (`i ≤ j`).
    pub fn from_edges(
        p: f64,
        kernel: &Kernel,
        media: Media,
        seed: u64,
        edges: &[(u32, u32)],
    ) -> Result<Self> {
        validate_p(p)?;
        let n = media.len();
        let weights = kernel_table(n, p, kernel, &media)?;
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(i, j) in edges {
            let (i, j) = (i.min(j), i.max(j));
            if j as usize >= n {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "edge ({i}, {j}) outside a graph on {n} vertices"
                )));
            }
            rows[i as usize].push(j);
            if i != j {
                rows[j as usize].push(i);
            }
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        let dense = p * n as f64 > n as f64 / 8.0;
        Ok(GraphSample {
            n,
            p,
            seed,
            kernel_id: kernel.id().into(),
            kernel_sup: kernel.sup(),
            media,
            adjacency: Adjacency::from_rows(n, &rows, dense),
            weights,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kernel_id(&self) -> &str {
        &self.kernel_id
    }

    pub fn kernel_sup(&self) -> f64 {
        self.kernel_sup
    }

    pub fn media(&self) -> &Media {
        &self.media
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    /// Nonzero value of `P`, i.e. `1/(pn)`.
    #[inline]
    pub fn edge_weight(&self) -> f64 {
        1.0 / (self.p * self.n as f64)
    }

    #[inline]
    pub fn kernel_value(&self, i: usize, j: usize) -> f64 {
        match &self.weights {
            MeanField::Constant(c) => *c,
            MeanField::Table(t) => t[i * self.n + j],
        }
    }

    pub fn kernel_constant(&self) -> Option<f64> {
        match self.weights {
            MeanField::Constant(c) => Some(c),
            MeanField::Table(_) => None,
        }
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> bool {
        self.adjacency.contains(i, j)
    }

    #[inline]
    pub fn p_entry(&self, i: usize, j: usize) -> f64 {
        if self.a(i, j) {
            self.edge_weight()
        } else {
            0.0
        }
    }

    #[inline]
    pub fn pbar_entry(&self, i: usize, j: usize) -> f64 {
        self.kernel_value(i, j) / self.n as f64
    }

    #[inline]
    pub fn d_entry(&self, i: usize, j: usize) -> f64 {
        self.p_entry(i, j) - self.pbar_entry(i, j)
    }

    /// Upper-triangular edge list (`i ≤ j`) in row order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            self.adjacency.for_each_neighbor(i, |j| {
                if j >= i {
                    out.push((i as u32, j as u32));
                }
            });
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn p_matrix(&self) -> DenseMatrix {
        let w = self.edge_weight();
        let mut m = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            self.adjacency.for_each_neighbor(i, |j| m.set(i, j, w));
        }
        m
    }

    pub fn pbar_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.pbar_entry(i, j))
    }

    pub fn d_matrix(&self) -> DenseMatrix {
        let mut m = self.p_matrix();
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(i, j, m.get(i, j) - self.pbar_entry(i, j));
            }
        }
        m
    }
}

/// Row sums `S_i` of `P + Pᵀ` and the mass bound they obey.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSumStats {
    pub sums: Vec<f64>,
    /// `⟨1, P1⟩ / n`.
    pub mean_mass: f64,
    /// `‖W‖∞ + ‖D‖_{∞→1} / n` for the supplied norm value.
    pub mass_bound: f64,
    pub min: f64,
    pub max: f64,
}

pub fn row_sum_stats(sample: &GraphSample, norm_d: f64) -> RowSumStats {
    let w = sample.edge_weight();
    let sums: Vec<f64> = (0..sample.n)
        .map(|i| 2.0 * sample.adjacency.degree(i) as f64 * w)
        .collect();
    let n = sample.n as f64;
    let mean_mass = sums.iter().sum::<f64>() / (2.0 * n);
    RowSumStats {
        min: sums.iter().copied().fold(f64::INFINITY, f64::min),
        max: sums.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        sums,
        mean_mass,
        mass_bound: sample.kernel_sup + norm_d / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::sync::Arc;

    fn uniform_media(n: usize) -> Media {
        Media::from_scalars((0..n).map(|i| i as f64 / n as f64).collect()).unwrap()
    }

    #[test]
    fn full_graph_has_zero_d() {
        let g = sample_w_graph(20, 1.0, &Kernel::constant(1.0), uniform_media(20), 3).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                assert!(g.a(i, j));
                assert_eq!(g.d_entry(i, j), 0.0);
            }
        }
        let stats = row_sum_stats(&g, 0.0);
        assert!(stats.sums.iter().all(|s| (s - 2.0).abs() < 1e-12));
    }

    #[test]
    fn symmetric_and_reproducible() {
        for p in [0.05, 0.5] {
            let a = sample_w_graph(100, p, &Kernel::constant(1.0), uniform_media(100), 11).unwrap();
            let b = sample_w_graph(100, p, &Kernel::constant(1.0), uniform_media(100), 11).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.adjacency().is_csr(), p <= 0.125);
            for i in 0..100 {
                for j in 0..100 {
                    assert_eq!(a.a(i, j), a.a(j, i));
                }
            }
        }
    }

    #[test]
    fn csr_and_bitset_agree() {
        let g = sample_w_graph(90, 0.3, &Kernel::constant(1.0), uniform_media(90), 2).unwrap();
        let rebuilt = GraphSample::from_edges(0.1, &Kernel::constant(1.0), uniform_media(90), 2, &g.edges()).unwrap();
        assert!(rebuilt.adjacency().is_csr());
        for i in 0..90 {
            assert_eq!(g.adjacency().degree(i), rebuilt.adjacency().degree(i));
            let mut a = Vec::new();
            let mut b = Vec::new();
            g.adjacency().for_each_neighbor(i, |j| a.push(j));
            rebuilt.adjacency().for_each_neighbor(i, |j| b.push(j));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn density_concentrates() {
        let n = 4000;
        let g = sample_w_graph(n, 0.5, &Kernel::constant(1.0), uniform_media(n), 5).unwrap();
        let total: usize = (0..n).map(|i| g.adjacency().degree(i)).sum();
        let mean = total as f64 / (n * n) as f64;
        assert!((mean - 0.5).abs() < 0.03, "{mean}");
    }

    #[test]
    fn kernel_pair_frequency() {
        // two media points at spatial distance 1: W = 1/2, so edges appear with probability p/2
        let kernel = Kernel::new(
            "spatial",
            1.0,
            Arc::new(|a: &[f64], b: &[f64]| 1.0 / (1.0 + (a[0] - b[0]) * (a[0] - b[0]))),
        );
        let p = 0.6;
        let mut hits = 0usize;
        let trials = 100_000;
        for seed in 0..trials {
            let media = Media::from_scalars(vec![0.0, 1.0]).unwrap();
            let g = sample_w_graph(2, p, &kernel, media, seed).unwrap();
            hits += g.a(0, 1) as usize;
        }
        let freq = hits as f64 / trials as f64;
        let sd = (0.3f64 * 0.7 / trials as f64).sqrt();
        assert!((freq - 0.3).abs() < 4.0 * sd, "{freq}");
    }

    #[test]
    fn rejects_bad_probabilities() {
        let err = sample_w_graph(4, 0.6, &Kernel::constant(2.0), uniform_media(4), 1);
        assert!(matches!(err, Err(Error::ProbabilityAboveOne { .. })));
        let nan = Kernel::new("nan", 1.0, Arc::new(|_: &[f64], _: &[f64]| f64::NAN));
        assert!(matches!(
            sample_w_graph(4, 0.5, &nan, uniform_media(4), 1),
            Err(Error::NonFiniteKernel { .. })
        ));
        assert!(sample_w_graph(4, 0.0, &Kernel::constant(1.0), uniform_media(4), 1).is_err());
    }

    #[test]
    fn d_plus_pbar_reconstructs_p() {
        for seed in 0..20 {
            let n = 37 + seed as usize;
            let kernel = Kernel::new(
                "smooth",
                1.0,
                Arc::new(|a: &[f64], b: &[f64]| 1.0 / (1.0 + (a[0] - b[0]).abs())),
            );
            let g = sample_w_graph(n, 0.3, &kernel, uniform_media(n), seed).unwrap();
            let (p, pbar, d) = (g.p_matrix(), g.pbar_matrix(), g.d_matrix());
            for i in 0..n {
                for j in 0..n {
                    let back = d.get(i, j) + pbar.get(i, j);
                    let ulp = f64::EPSILON * p.get(i, j).abs().max(pbar.get(i, j));
                    assert!((back - p.get(i, j)).abs() <= ulp);
                    assert_eq!(d.get(i, j), g.d_entry(i, j));
                    assert_eq!(pbar.get(i, j), pbar.get(j, i));
                    assert!(pbar.get(i, j) >= 0.0 && pbar.get(i, j) <= 1.0 / n as f64);
                }
            }
        }
    }

    #[test]
    fn erdos_renyi_row_sums_have_mean_two() {
        let n = 400;
        let mut acc = 0.0;
        let reps = 20;
        for seed in 0..reps {
            let g = sample_w_graph(n, 0.1, &Kernel::constant(1.0), uniform_media(n), seed).unwrap();
            let s = row_sum_stats(&g, 0.0);
            acc += s.sums.iter().sum::<f64>() / n as f64;
        }
        let mean = acc / reps as f64;
        // sd of the grand mean ≈ 2 sqrt((1-p)/(np)) / sqrt(n reps), loops aside
        assert!((mean - 2.0).abs() < 0.02, "{mean}");
    }
}
