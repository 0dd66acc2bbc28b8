//! Exact k-nearest-neighbor search over embedding matrices.
//!
//! Distances are computed in tiles through dgemm (`d^2 = |a|^2 + |b|^2 -
//! 2<a,b>`), then the selected candidates are re-evaluated with the direct
//! sum-of-squares formula, so the reported radii carry no cancellation error.
//! Ties break toward the lower row index. Rows are processed independently,
//! which keeps the result identical for any rayon worker count.

use rayon::prelude::*;

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::linalg::dgemm_nt;
use crate::scalar::Scalar;

const QUERY_BLOCK: usize = 256;
const CANDIDATE_BLOCK: usize = 2048;

/// Sorted neighbor indices and radii for every row of a matrix.
#[derive(Debug, Clone)]
pub struct NeighborTable {
    n: usize,
    k: usize,
    idx: Vec<u32>,
    radii: Vec<f64>,
}

impl NeighborTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn idx_row(&self, i: usize) -> &[u32] {
        &self.idx[i * self.k..(i + 1) * self.k]
    }

    /// Radii sorted ascending: `R_1 <= ... <= R_k`.
    pub fn radii_row(&self, i: usize) -> &[f64] {
        &self.radii[i * self.k..(i + 1) * self.k]
    }
}

/// Remove rows that are bit-identical to an earlier row. Returns the reduced
/// matrix and the kept original row indices (stable order).
pub fn dedup_rows<F: Scalar>(emb: &EmbeddingMatrix<F>) -> (EmbeddingMatrix<F>, Vec<usize>) {
    use std::collections::HashMap;
    let n = emb.rows();
    let hashes: Vec<u64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut h: u64 = 0xcbf29ce484222325;
            for &v in emb.row(i) {
                h ^= v.bit_pattern();
                h = h.wrapping_mul(0x100000001b3);
            }
            h
        })
        .collect();
    let mut first_with_hash: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut kept: Vec<usize> = Vec::with_capacity(n);
    let rows_equal = |a: usize, b: usize| {
        emb.row(a)
            .iter()
            .zip(emb.row(b))
            .all(|(x, y)| x.bit_pattern() == y.bit_pattern())
    };
    for i in 0..n {
        let bucket = first_with_hash.entry(hashes[i]).or_default();
        if !bucket.iter().any(|&j| rows_equal(j, i)) {
            bucket.push(i);
            kept.push(i);
        }
    }
    let reduced = emb.gather(&kept).expect("kept is nonempty");
    (reduced, kept)
}

/// Bounded max-heap over `(distance^2, index)` with lexicographic order.
struct TopK {
    cap: usize,
    heap: Vec<(f64, u32)>,
}

impl TopK {
    fn new(cap: usize) -> Self {
        TopK {
            cap,
            heap: Vec::with_capacity(cap),
        }
    }

    #[inline]
    fn worst(&self) -> Option<(f64, u32)> {
        self.heap.first().copied()
    }

    #[inline]
    fn greater(a: (f64, u32), b: (f64, u32)) -> bool {
        a.0 > b.0 || (a.0 == b.0 && a.1 > b.1)
    }

    #[inline]
    fn insert(&mut self, d2: f64, j: u32) {
        if self.heap.len() < self.cap {
            self.heap.push((d2, j));
            let mut i = self.heap.len() - 1;
            while i > 0 {
                let parent = (i - 1) / 2;
                if Self::greater(self.heap[i], self.heap[parent]) {
                    self.heap.swap(i, parent);
                    i = parent;
                } else {
                    break;
                }
            }
        } else if Self::greater(self.heap[0], (d2, j)) {
            self.heap[0] = (d2, j);
            let mut i = 0;
            loop {
                let (l, r) = (2 * i + 1, 2 * i + 2);
                let mut largest = i;
                if l < self.heap.len() && Self::greater(self.heap[l], self.heap[largest]) {
                    largest = l;
                }
                if r < self.heap.len() && Self::greater(self.heap[r], self.heap[largest]) {
                    largest = r;
                }
                if largest == i {
                    break;
                }
                self.heap.swap(i, largest);
                i = largest;
            }
        }
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        acc += t * t;
    }
    acc
}

/// Exact Euclidean k-nearest neighbors, excluding self.
///
/// The input must be deduplicated; a zero radius is reported as
/// [`Error::DuplicateRows`].
pub fn knn_exact<F: Scalar>(emb: &EmbeddingMatrix<F>, k: usize) -> Result<NeighborTable> {
    let n = emb.rows();
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange { k, n });
    }
    let d = emb.cols();
    let view = emb.widened();
    let x: &[f64] = &view;

    let sq_norms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| x[i * d..(i + 1) * d].iter().map(|v| v * v).sum())
        .collect();

    let mut idx = vec![0u32; n * k];
    let mut radii = vec![0f64; n * k];

    let blocks: Vec<(usize, &mut [u32], &mut [f64])> = idx
        .chunks_mut(QUERY_BLOCK * k)
        .zip(radii.chunks_mut(QUERY_BLOCK * k))
        .enumerate()
        .map(|(b, (bi, br))| (b, bi, br))
        .collect();

    blocks
        .into_par_iter()
        .try_for_each(|(block, idx_out, radii_out)| -> Result<()> {
            let q_lo = block * QUERY_BLOCK;
            let q_hi = (q_lo + QUERY_BLOCK).min(n);
            let qb = q_hi - q_lo;
            let a = &x[q_lo * d..q_hi * d];

            let mut heaps: Vec<TopK> = (0..qb).map(|_| TopK::new(k)).collect();
            let mut tile = vec![0.0f64; qb * CANDIDATE_BLOCK];

            let mut c_lo = 0;
            while c_lo < n {
                let c_hi = (c_lo + CANDIDATE_BLOCK).min(n);
                let cb = c_hi - c_lo;
                let b = &x[c_lo * d..c_hi * d];
                dgemm_nt(qb, cb, d, a, b, &mut tile[..qb * cb]);

                for (qi, heap) in heaps.iter_mut().enumerate() {
                    let q = q_lo + qi;
                    let qn = sq_norms[q];
                    let row = &tile[qi * cb..(qi + 1) * cb];
                    let mut worst = heap.worst();
                    for (cj, &g) in row.iter().enumerate() {
                        let c = c_lo + cj;
                        if c == q {
                            continue;
                        }
                        let d2 = (qn + sq_norms[c] - 2.0 * g).max(0.0);
                        match worst {
                            Some(w) if heap.heap.len() == k => {
                                if TopK::greater(w, (d2, c as u32)) {
                                    heap.insert(d2, c as u32);
                                    worst = heap.worst();
                                }
                            }
                            _ => {
                                heap.insert(d2, c as u32);
                                worst = heap.worst();
                            }
                        }
                    }
                }
                c_lo = c_hi;
            }

            // Exact re-evaluation of the selected candidates, then the final
            // (distance, index) ordering.
            for (qi, heap) in heaps.into_iter().enumerate() {
                let q = q_lo + qi;
                let qrow = &x[q * d..(q + 1) * d];
                let mut sel: Vec<(f64, u32)> = heap
                    .heap
                    .into_iter()
                    .map(|(_, j)| {
                        let jrow = &x[j as usize * d..(j as usize + 1) * d];
                        (sq_dist(qrow, jrow), j)
                    })
                    .collect();
                sel.sort_unstable_by(|a, b| {
                    a.0.partial_cmp(&b.0)
                        .expect("finite distances")
                        .then(a.1.cmp(&b.1))
                });
                if sel[0].0 == 0.0 {
                    return Err(Error::DuplicateRows { row: q });
                }
                for (t, (d2, j)) in sel.into_iter().enumerate() {
                    idx_out[qi * k + t] = j;
                    radii_out[qi * k + t] = d2.sqrt();
                }
            }
            Ok(())
        })?;

    Ok(NeighborTable { n, k, idx, radii })
}

/// Unit directions from a row to each of its neighbors.
pub fn neighbor_directions<F: Scalar>(
    emb: &EmbeddingMatrix<F>,
    table: &NeighborTable,
    row: usize,
) -> Result<Vec<Vec<f64>>> {
    let d = emb.cols();
    let view = emb.widened();
    let x: &[f64] = &view;
    let center = &x[row * d..(row + 1) * d];
    table
        .idx_row(row)
        .iter()
        .map(|&j| {
            let other = &x[j as usize * d..(j as usize + 1) * d];
            let mut dir: Vec<f64> = other.iter().zip(center).map(|(a, b)| a - b).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::DegenerateNeighborhood(
                    "zero-norm neighbor direction",
                ));
            }
            dir.iter_mut().for_each(|v| *v /= norm);
            Ok(dir)
        })
        .collect()
}
