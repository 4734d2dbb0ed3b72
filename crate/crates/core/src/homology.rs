//! Betti numbers over GF(2) by sparse column reduction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::Complex;

/// `d_dim`: columns are `dim`-faces, rows are `(dim-1)`-faces, both in
/// the lexicographic order of the complex.
#[derive(Clone, Debug)]
pub struct BoundaryMatrix {
    dim: usize,
    rows: usize,
    columns: Vec<Vec<u32>>,
}

impl BoundaryMatrix {
    /// Boundary map of every `dim`-face, `1 <= dim <= top`.
    pub fn new(complex: &Complex, dim: usize) -> Result<Self> {
        Self::for_faces(complex, dim, complex.faces(dim))
    }

    /// Boundary map restricted to the given `dim`-faces of `complex`.
    pub fn for_faces<'a, I>(complex: &Complex, dim: usize, faces: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [u32]>,
    {
        if dim == 0 || dim > complex.top_dimension() {
            return Err(Error::DimensionNotMaterialized {
                requested: dim,
                built: complex.top_dimension(),
            });
        }
        let mut sub = Vec::with_capacity(dim);
        let columns = faces
            .into_iter()
            .map(|face| {
                let mut col: Vec<u32> = (0..=dim)
                    .map(|drop| {
                        sub.clear();
                        sub.extend(face.iter().enumerate().filter(|&(t, _)| t != drop).map(|(_, &v)| v));
                        complex.index_of(&sub).expect("complex is downward closed") as u32
                    })
                    .collect();
                col.sort_unstable();
                col
            })
            .collect();
        Ok(Self {
            dim,
            rows: complex.count(dim - 1),
            columns,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn columns(&self) -> &[Vec<u32>] {
        &self.columns
    }

    pub fn rank(&self) -> usize {
        gf2_rank(&self.columns, self.rows)
    }

    /// `self o next = 0` over GF(2), where `next` is the map one dimension up.
    pub fn composes_to_zero(&self, next: &BoundaryMatrix) -> bool {
        next.columns.iter().all(|col| {
            let mut acc: Vec<u32> = Vec::new();
            for &j in col {
                acc = symmetric_difference(&acc, &self.columns[j as usize]);
            }
            acc.is_empty()
        })
    }
}

/// Sorted symmetric difference of two sorted index lists.
fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Rank of sparse GF(2) columns (sorted row indices below `rows`), by
/// left-to-right reduction with lowest-entry pivots.
pub fn gf2_rank(columns: &[Vec<u32>], rows: usize) -> usize {
    let mut pivot_owner: Vec<u32> = vec![u32::MAX; rows];
    let mut reduced: Vec<Vec<u32>> = Vec::with_capacity(columns.len());
    let mut rank = 0;
    for col in columns {
        let mut col = col.clone();
        while let Some(&low) = col.last() {
            let owner = pivot_owner[low as usize];
            if owner == u32::MAX {
                pivot_owner[low as usize] = reduced.len() as u32;
                rank += 1;
                break;
            }
            col = symmetric_difference(&col, &reduced[owner as usize]);
        }
        reduced.push(col);
    }
    rank
}

/// `rank d_dim` with `rank d_0 = 0` and zero above the top dimension.
pub fn boundary_rank(complex: &Complex, dim: usize) -> Result<usize> {
    if dim == 0 || dim > complex.top_dimension() {
        return Ok(0);
    }
    Ok(BoundaryMatrix::new(complex, dim)?.rank())
}

/// `beta_m = f_m - rank d_m - rank d_(m+1)`.
///
/// Requires faces up to dimension `m + 1`, unless the complex is closed,
/// in which case the missing dimensions are genuinely empty.
pub fn betti(complex: &Complex, m: usize) -> Result<u64> {
    let top = complex.top_dimension();
    if m + 1 > top && !complex.is_closed() {
        return Err(Error::DimensionNotMaterialized {
            requested: m + 1,
            built: top,
        });
    }
    let f = complex.count(m);
    Ok((f - boundary_rank(complex, m)? - boundary_rank(complex, m + 1)?) as u64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiReport {
    pub betti: Vec<u64>,
    pub f: Vec<u64>,
    pub euler: i64,
    /// `true` when the top entry of `betti` is that of the materialized
    /// complex only; faces one dimension up could still lower it.
    pub top_is_upper_bound: bool,
}

/// Betti numbers `beta_0..beta_top` of the materialized complex.
pub fn betti_vector(complex: &Complex) -> BettiReport {
    let top = complex.top_dimension();
    let ranks: Vec<usize> = (0..=top + 1)
        .map(|d| boundary_rank(complex, d).expect("dimension is in range"))
        .collect();
    let f = complex.face_counts();
    let betti = (0..=top)
        .map(|d| (f[d] as usize - ranks[d] - ranks[d + 1]) as u64)
        .collect();
    BettiReport {
        betti,
        euler: euler_characteristic(&f),
        f,
        top_is_upper_bound: !complex.is_closed(),
    }
}

/// `sum_i (-1)^i x_i`.
pub fn euler_characteristic(x: &[u64]) -> i64 {
    x.iter()
        .enumerate()
        .map(|(i, &v)| if i % 2 == 0 { v as i64 } else { -(v as i64) })
        .sum()
}
