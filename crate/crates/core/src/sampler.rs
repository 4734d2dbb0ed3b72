//! Seeded sampling of `X([n], p)`, restriction to vertex subsets and face
//! counting.
//!
//! Every potential word (sorted vertex tuple) of dimension `i` owns one
//! uniform variate, read from a ChaCha8 stream keyed by
//! `(seed, replication_index)`: stream `i`, word position
//! `2 * colex_rank(tuple)`. A word is included iff its uniform is below
//! `p_i` and its whole boundary is present. The sample is therefore a pure
//! function of the configuration, and lowering any `alpha_i` can only add
//! faces.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial_u128, RankTable};
use crate::error::{Error, Result};
use crate::exponents::AlphaProfile;

/// Tuple ranks are mapped to ChaCha word positions `2 * rank`, which must
/// stay below the generator's `2^68` word period.
const MAX_RANK_BITS: u32 = 66;

const KEY_TAG: &[u8; 16] = b"betti-lab/faces1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n: usize,
    pub alpha: AlphaProfile,
    /// Highest face dimension materialized.
    pub d_max_build: usize,
    pub seed: u64,
    pub replication_index: u64,
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.n > u32::MAX as usize {
            return Err(Error::InvalidConfig(format!("n = {} is too large", self.n)));
        }
        if self.d_max_build + 1 > self.n {
            return Err(Error::InvalidConfig(format!(
                "d_max_build = {} exceeds n - 1 = {}",
                self.d_max_build,
                self.n - 1
            )));
        }
        let words = (0..=self.d_max_build)
            .map(|d| binomial_u128(self.n as u64, d as u64 + 1))
            .try_fold(0u128, |acc, w| w.map(|w| acc.max(w)));
        match words {
            Some(w) if w < (1u128 << MAX_RANK_BITS) => Ok(()),
            _ => Err(Error::InvalidConfig(format!(
                "C({}, {}) words exceed the 2^{MAX_RANK_BITS} uniform budget",
                self.n,
                self.d_max_build + 1
            ))),
        }
    }
}

/// Where a sampled complex came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub alpha: AlphaProfile,
    pub seed: u64,
    pub replication_index: u64,
}

/// Faces of one dimension: flat sorted tuples plus a rank index.
#[derive(Clone, Debug, Default)]
struct FaceSet {
    width: usize,
    data: Vec<u32>,
    index: HashMap<u128, u32>,
}

impl FaceSet {
    fn new(width: usize) -> Self {
        Self {
            width,
            ..Self::default()
        }
    }

    fn len(&self) -> usize {
        self.data.len().checked_div(self.width).unwrap_or(0)
    }

    fn get(&self, i: usize) -> &[u32] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    fn push_unindexed(&mut self, face: &[u32]) {
        self.data.extend_from_slice(face);
    }

    /// Sorts lexicographically, drops duplicates, rebuilds the index.
    fn finalize(&mut self, ranks: &RankTable) {
        let w = self.width;
        let mut tuples: Vec<&[u32]> = self.data.chunks_exact(w).collect();
        tuples.sort_unstable();
        tuples.dedup();
        let data: Vec<u32> = tuples.concat();
        self.data = data;
        self.index = (0..self.len())
            .map(|i| (ranks.rank(self.get(i)), i as u32))
            .collect();
    }
}

/// A finite simplicial complex on vertices `0..n`, materialized up to a
/// top dimension.
#[derive(Clone)]
pub struct Complex {
    n: usize,
    faces: Vec<FaceSet>,
    ranks: RankTable,
    /// `up[a]` = vertices `b > a` with `{a, b}` an edge.
    up: Vec<Vec<u32>>,
    closed: bool,
    provenance: Option<Provenance>,
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Complex")
            .field("n", &self.n)
            .field("f", &self.face_counts())
            .field("closed", &self.closed)
            .finish()
    }
}

impl PartialEq for Complex {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.faces.len() == other.faces.len()
            && self.faces.iter().zip(&other.faces).all(|(a, b)| a.data == b.data)
    }
}

impl Complex {
    fn empty(n: usize, top: usize) -> Result<Self> {
        let ranks = RankTable::new(n.max(1), top + 1).ok_or_else(|| {
            Error::InvalidConfig(format!("rank table for n = {n}, width {} overflows", top + 1))
        })?;
        Ok(Self {
            n,
            faces: (0..=top).map(|d| FaceSet::new(d + 1)).collect(),
            ranks,
            up: vec![Vec::new(); n],
            closed: true,
            provenance: None,
        })
    }

    fn finalize(&mut self) {
        for set in &mut self.faces {
            set.finalize(&self.ranks);
        }
        self.up = vec![Vec::new(); self.n];
        if self.faces.len() > 1 {
            for e in self.faces[1].data.chunks_exact(2) {
                self.up[e[0] as usize].push(e[1]);
            }
        }
    }

    /// Downward closure of `faces` on vertices `0..n`, materialized to
    /// dimension `top`. Every vertex `0..n` is included.
    pub fn from_faces<F: AsRef<[u32]>>(n: usize, top: usize, faces: &[F]) -> Result<Self> {
        let mut c = Self::empty(n, top)?;
        for v in 0..n as u32 {
            c.faces[0].push_unindexed(&[v]);
        }
        for face in faces {
            let mut f = face.as_ref().to_vec();
            f.sort_unstable();
            f.dedup();
            if f.is_empty() || f.len() > top + 1 {
                return Err(Error::InvalidConfig(format!(
                    "face {f:?} does not fit below dimension {top}"
                )));
            }
            if f.iter().any(|&v| v as usize >= n) {
                return Err(Error::InvalidConfig(format!("face {f:?} uses a vertex >= {n}")));
            }
            push_all_subfaces(&mut c.faces, &f);
        }
        c.finalize();
        Ok(c)
    }

    /// Full `top`-skeleton of the simplex on `0..n`.
    pub fn full_skeleton(n: usize, top: usize) -> Result<Self> {
        let faces: Vec<Vec<u32>> = itertools::Itertools::combinations(0..n as u32, top + 1).collect();
        Self::from_faces(n, top, &faces)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Highest materialized dimension.
    pub fn top_dimension(&self) -> usize {
        self.faces.len() - 1
    }

    /// `true` when no face above the top dimension could exist, so
    /// homology in the top dimension is that of the full complex.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn count(&self, dim: usize) -> usize {
        self.faces.get(dim).map_or(0, FaceSet::len)
    }

    pub fn face(&self, dim: usize, idx: usize) -> &[u32] {
        self.faces[dim].get(idx)
    }

    /// Faces of dimension `dim` in lexicographic order.
    pub fn faces(&self, dim: usize) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        let (data, w) = match self.faces.get(dim) {
            Some(s) => (s.data.as_slice(), s.width),
            None => (&[][..], 1),
        };
        data.chunks_exact(w)
    }

    /// Index of a sorted tuple among faces of its dimension.
    pub fn index_of(&self, face: &[u32]) -> Option<usize> {
        let set = self.faces.get(face.len().checked_sub(1)?)?;
        if face.iter().any(|&v| v as usize >= self.n) {
            return None;
        }
        set.index.get(&self.ranks.rank(face)).map(|&i| i as usize)
    }

    pub fn contains(&self, face: &[u32]) -> bool {
        self.index_of(face).is_some()
    }

    /// Vertices `b > a` joined to `a` by an edge.
    pub fn up_neighbours(&self, a: u32) -> &[u32] {
        &self.up[a as usize]
    }

    /// `f_0..f_top`.
    pub fn face_counts(&self) -> Vec<u64> {
        self.faces.iter().map(|s| s.len() as u64).collect()
    }

    /// Calls `visit(face_index, v)` for every vertex `v > max(face)` such
    /// that `face + v` has its whole boundary in the complex. Each sorted
    /// `(dim + 2)`-tuple with full boundary is visited exactly once, in
    /// lexicographic order, through its prefix.
    pub fn for_each_full_extension<F: FnMut(usize, u32)>(&self, dim: usize, mut visit: F) {
        let mut buf = vec![0u32; dim + 2];
        let mut sub = vec![0u32; dim + 1];
        let vertices = &self.faces[0];
        for idx in 0..self.count(dim) {
            let face = self.face(dim, idx);
            let last = *face.last().expect("faces are nonempty");
            let pool: &[u32] = if dim == 0 {
                // every larger vertex in the complex
                let start = vertices.data.partition_point(|&v| v <= last);
                &vertices.data[start..]
            } else {
                let nb = &self.up[face[0] as usize];
                &nb[nb.partition_point(|&v| v <= last)..]
            };
            buf[..=dim].copy_from_slice(face);
            for &v in pool {
                buf[dim + 1] = v;
                let full = (0..=dim).all(|drop| {
                    let mut k = 0;
                    for (t, &x) in buf.iter().enumerate() {
                        if t != drop {
                            sub[k] = x;
                            k += 1;
                        }
                    }
                    self.contains(&sub)
                });
                if full {
                    visit(idx, v);
                }
            }
        }
    }

    /// Materialized `X(sigma, p)`: faces with every vertex in `sigma`.
    /// With `reindex`, the vertices of `sigma` are renamed `0..|sigma|`.
    pub fn restrict(&self, sigma: &[u32], reindex: bool) -> Result<Complex> {
        let mut sigma = sigma.to_vec();
        sigma.sort_unstable();
        sigma.dedup();
        if let Some(&v) = sigma.iter().find(|&&v| v as usize >= self.n) {
            return Err(Error::InvalidConfig(format!("vertex {v} is outside 0..{}", self.n)));
        }
        let mut position = vec![u32::MAX; self.n];
        for (i, &v) in sigma.iter().enumerate() {
            position[v as usize] = i as u32;
        }
        let n = if reindex { sigma.len() } else { self.n };
        let mut out = Self::empty(n, self.top_dimension())?;
        let mut mapped = Vec::new();
        for (d, set) in self.faces.iter().enumerate() {
            for face in set.data.chunks_exact(set.width) {
                if face.iter().all(|&v| position[v as usize] != u32::MAX) {
                    mapped.clear();
                    mapped.extend(
                        face.iter()
                            .map(|&v| if reindex { position[v as usize] } else { v }),
                    );
                    out.faces[d].push_unindexed(&mapped);
                }
            }
        }
        out.closed = self.closed;
        out.provenance = self.provenance.clone();
        out.finalize();
        Ok(out)
    }

    /// Checks sortedness, vertex range and downward closure.
    pub fn validate(&self) -> Result<()> {
        for d in 0..self.faces.len() {
            for face in self.faces(d) {
                if face.windows(2).any(|w| w[0] >= w[1]) || face.iter().any(|&v| v as usize >= self.n) {
                    return Err(Error::InvalidConfig(format!("malformed face {face:?}")));
                }
                if d > 0 {
                    let mut sub = Vec::with_capacity(d);
                    for drop in 0..=d {
                        sub.clear();
                        sub.extend(face.iter().enumerate().filter(|&(t, _)| t != drop).map(|(_, &v)| v));
                        if !self.contains(&sub) {
                            return Err(Error::InvalidConfig(format!(
                                "face {face:?} is missing its boundary face {sub:?}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> ComplexJson {
        let faces = (0..self.faces.len())
            .map(|d| (d, self.faces(d).map(|f| f.iter().map(|&v| v + 1).collect()).collect()))
            .collect();
        let p = self.provenance.as_ref();
        ComplexJson {
            n: self.n,
            alpha: p.map(|p| p.alpha.clone()),
            seed: p.map(|p| p.seed),
            rep: p.map(|p| p.replication_index),
            closed: self.closed,
            faces,
        }
    }

    pub fn from_json(json: &ComplexJson) -> Result<Self> {
        let top = json.faces.keys().copied().max().unwrap_or(0);
        let mut c = Self::empty(json.n, top)?;
        for (&d, list) in &json.faces {
            for face in list {
                if face.len() != d + 1 || face.iter().any(|&v| v == 0 || v as usize > json.n) {
                    return Err(Error::InvalidConfig(format!(
                        "face {face:?} is not a {d}-face on vertices 1..{}",
                        json.n
                    )));
                }
                let zero_based: Vec<u32> = face.iter().map(|&v| v - 1).collect();
                c.faces[d].push_unindexed(&zero_based);
            }
        }
        c.closed = json.closed;
        c.provenance = match (&json.alpha, json.seed, json.rep) {
            (Some(alpha), Some(seed), Some(rep)) => Some(Provenance {
                alpha: alpha.clone(),
                seed,
                replication_index: rep,
            }),
            _ => None,
        };
        c.finalize();
        c.validate()?;
        Ok(c)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(file, &self.to_json())?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let json: ComplexJson = serde_json::from_reader(file)?;
        Self::from_json(&json)
    }
}

fn push_all_subfaces(sets: &mut [FaceSet], face: &[u32]) {
    let k = face.len();
    let mut sub = Vec::with_capacity(k);
    for mask in 1u64..(1u64 << k) {
        sub.clear();
        sub.extend((0..k).filter(|&t| mask >> t & 1 == 1).map(|t| face[t]));
        sets[sub.len() - 1].push_unindexed(&sub);
    }
}

/// On-disk form. Vertices are 1-based, matching `[n] = {1..n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rep: Option<u64>,
    #[serde(default = "default_true")]
    pub closed: bool,
    pub faces: BTreeMap<usize, Vec<Vec<u32>>>,
}

fn default_true() -> bool {
    true
}

/// ChaCha8 key for one replication.
fn replication_key(seed: u64, rep: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&rep.to_le_bytes());
    key[16..].copy_from_slice(KEY_TAG);
    key
}

/// Counter-mode uniforms for one dimension: `u(rank)` is the 64-bit word
/// at position `2 * rank` of stream `dim`, mapped to `[0, 1)`.
pub struct WordUniforms {
    rng: ChaCha8Rng,
    cursor: Option<u128>,
}

impl WordUniforms {
    pub fn new(seed: u64, replication_index: u64, dim: usize) -> Self {
        let mut rng = ChaCha8Rng::from_seed(replication_key(seed, replication_index));
        rng.set_stream(dim as u64);
        Self { rng, cursor: None }
    }

    pub fn at(&mut self, rank: u128) -> f64 {
        if self.cursor != Some(rank) {
            self.rng.set_word_pos(2 * rank);
        }
        self.cursor = Some(rank + 1);
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

pub fn sample_complex(config: &SampleConfig) -> Result<Complex> {
    config.validate()?;
    let n = config.n;
    let top = config.d_max_build;
    let mut c = Complex::empty(n, top)?;
    for v in 0..n as u32 {
        c.faces[0].push_unindexed(&[v]);
    }
    c.faces[0].finalize(&c.ranks);

    if top >= 1 {
        let p = config.alpha.probability(1, n);
        let mut u = WordUniforms::new(config.seed, config.replication_index, 1);
        // colex order keeps the ranks consecutive
        for b in 1..n as u32 {
            for a in 0..b {
                let pair = [a, b];
                if u.at(c.ranks.rank(&pair)) < p {
                    c.faces[1].push_unindexed(&pair);
                }
            }
        }
        c.faces[1].finalize(&c.ranks);
        for e in c.faces[1].data.chunks_exact(2) {
            c.up[e[0] as usize].push(e[1]);
        }
    }

    for dim in 2..=top {
        let p = config.alpha.probability(dim, n);
        let mut accepted = Vec::new();
        if p > 0.0 {
            let mut u = WordUniforms::new(config.seed, config.replication_index, dim);
            let mut word = vec![0u32; dim + 1];
            c.for_each_full_extension(dim - 1, |idx, v| {
                word[..dim].copy_from_slice(c.face(dim - 1, idx));
                word[dim] = v;
                if u.at(c.ranks.rank(&word)) < p {
                    accepted.extend_from_slice(&word);
                }
            });
        }
        c.faces[dim].data = accepted;
        c.faces[dim].finalize(&c.ranks);
    }

    c.closed = config.alpha.probability(top + 1, n) == 0.0 || c.count(top) == 0;
    c.provenance = Some(Provenance {
        alpha: config.alpha.clone(),
        seed: config.seed,
        replication_index: config.replication_index,
    });
    Ok(c)
}

pub fn face_counts(complex: &Complex) -> Vec<u64> {
    complex.face_counts()
}
