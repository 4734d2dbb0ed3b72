//! Strong connectivity and the counting statistics behind `beta_m`.
//!
//! Two `m`-faces are adjacent when they share an `(m-1)`-face. Connected
//! classes of this dual graph are the maximal `m`-strongly connected
//! pieces. Cycle and boundary spaces in dimension `m` split along these
//! classes, so the local Betti numbers always add up to `beta_m`.

use std::collections::{BTreeMap, HashSet};

use itertools::Itertools;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial_u128;
use crate::error::{Error, Result};
use crate::homology::{self, BoundaryMatrix};
use crate::sampler::Complex;

/// `C(n, j)` above this refuses subset enumeration.
pub const MAX_SUBSET_SCAN: u128 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub sigma: Vec<u32>,
    pub j: usize,
    pub m: usize,
    /// `beta_m` of the component subcomplex.
    pub r: u64,
    /// The `m`-faces of `X(sigma, p)` are exactly this component's.
    pub is_maximal_restriction: bool,
    pub has_cycle: bool,
    /// Face counts of the component's closure in dimensions `0..=m`.
    pub face_counts: Vec<u64>,
    /// Indices of the component's `m`-faces in the parent complex.
    #[serde(skip)]
    pub m_faces: Vec<u32>,
}

fn require_materialized(complex: &Complex, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidConfig("strong connectivity needs m >= 1".into()));
    }
    if complex.top_dimension() < m + 1 && !complex.is_closed() {
        return Err(Error::DimensionNotMaterialized {
            requested: m + 1,
            built: complex.top_dimension(),
        });
    }
    Ok(())
}

/// Sorted tuple `face` without position `drop`, written into `out`.
fn drop_vertex(face: &[u32], drop: usize, out: &mut Vec<u32>) {
    out.clear();
    out.extend(face.iter().enumerate().filter(|&(t, _)| t != drop).map(|(_, &v)| v));
}

/// Component label of every `m`-face, labels numbered by first appearance
/// in lexicographic order.
fn label_m_faces(complex: &Complex, m: usize) -> (Vec<u32>, usize) {
    let f_m = complex.count(m);
    let mut uf = UnionFind::<u32>::new(f_m);
    let mut first = vec![u32::MAX; complex.count(m - 1)];
    let mut sub = Vec::with_capacity(m);
    for (idx, face) in complex.faces(m).enumerate() {
        for drop in 0..=m {
            drop_vertex(face, drop, &mut sub);
            let g = complex.index_of(&sub).expect("downward closed");
            match first[g] {
                u32::MAX => first[g] = idx as u32,
                other => {
                    uf.union(other, idx as u32);
                }
            }
        }
    }
    let mut relabel = vec![u32::MAX; f_m];
    let mut labels = Vec::with_capacity(f_m);
    let mut next = 0u32;
    for idx in 0..f_m {
        let root = uf.find(idx as u32) as usize;
        if relabel[root] == u32::MAX {
            relabel[root] = next;
            next += 1;
        }
        labels.push(relabel[root]);
    }
    (labels, next as usize)
}

pub fn strong_components(complex: &Complex, m: usize) -> Result<Vec<ComponentReport>> {
    require_materialized(complex, m)?;
    let (labels, count) = label_m_faces(complex, m);
    let mut m_faces: Vec<Vec<u32>> = vec![Vec::new(); count];
    for (idx, &c) in labels.iter().enumerate() {
        m_faces[c as usize].push(idx as u32);
    }
    let mut cofaces: Vec<Vec<u32>> = vec![Vec::new(); count];
    if complex.top_dimension() > m {
        let mut sub = Vec::with_capacity(m + 1);
        for (idx, face) in complex.faces(m + 1).enumerate() {
            drop_vertex(face, 0, &mut sub);
            let owner = labels[complex.index_of(&sub).expect("downward closed")];
            cofaces[owner as usize].push(idx as u32);
        }
    }

    let mut reports: Vec<ComponentReport> = m_faces
        .into_iter()
        .zip(cofaces)
        .map(|(faces, tops)| component_report(complex, m, faces, &tops))
        .collect::<Result<_>>()?;
    mark_maximal_restrictions(complex, m, &mut reports);
    Ok(reports)
}

fn component_report(complex: &Complex, m: usize, faces: Vec<u32>, tops: &[u32]) -> Result<ComponentReport> {
    let face_list = || faces.iter().map(|&i| complex.face(m, i as usize));
    let rank_m = BoundaryMatrix::for_faces(complex, m, face_list())?.rank();
    let rank_top = if tops.is_empty() {
        0
    } else {
        BoundaryMatrix::for_faces(complex, m + 1, tops.iter().map(|&i| complex.face(m + 1, i as usize)))?.rank()
    };

    // closure face counts, dimension by dimension
    let mut closure: Vec<HashSet<Vec<u32>>> = vec![HashSet::new(); m];
    for face in face_list() {
        for mask in 1u32..(1 << (m + 1)) - 1 {
            let sub: Vec<u32> = (0..=m).filter(|&t| mask >> t & 1 == 1).map(|t| face[t]).collect();
            closure[sub.len() - 1].insert(sub);
        }
    }
    let mut sigma: Vec<u32> = closure[0].iter().map(|v| v[0]).collect();
    sigma.sort_unstable();
    let mut face_counts: Vec<u64> = closure.iter().map(|s| s.len() as u64).collect();
    face_counts.push(faces.len() as u64);

    Ok(ComponentReport {
        j: sigma.len(),
        sigma,
        m,
        r: (faces.len() - rank_m - rank_top) as u64,
        is_maximal_restriction: false,
        has_cycle: rank_m < faces.len(),
        face_counts,
        m_faces: faces,
    })
}

/// A component passes when the `m`-faces of `X(sigma)` are exactly its own.
/// Lower faces of `X(sigma)` outside the closure do not matter: every
/// `m`-cycle and every `(m+1)`-boundary on `sigma` lives on these `m`-faces.
fn mark_maximal_restrictions(complex: &Complex, m: usize, reports: &mut [ComponentReport]) {
    let mut by_vertex: Vec<Vec<u32>> = vec![Vec::new(); complex.n()];
    for (c, rep) in reports.iter().enumerate() {
        for &v in &rep.sigma {
            by_vertex[v as usize].push(c as u32);
        }
    }
    let mut restricted = vec![0usize; reports.len()];
    for face in complex.faces(m) {
        for &c in &by_vertex[face[0] as usize] {
            let sigma = &reports[c as usize].sigma;
            if face[1..].iter().all(|v| sigma.binary_search(v).is_ok()) {
                restricted[c as usize] += 1;
            }
        }
    }
    for (rep, count) in reports.iter_mut().zip(restricted) {
        rep.is_maximal_restriction = count == rep.m_faces.len();
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Representation {
    /// `beta_m`, from the representation when every component qualifies,
    /// otherwise from direct homology.
    pub betti: u64,
    /// Sum of `r` over components with a maximal restriction.
    pub representation_sum: u64,
    /// Vertex sets of components whose restriction is not the component.
    pub non_maximal: Vec<Vec<u32>>,
    pub used_fallback: bool,
}

pub fn betti_via_representation(complex: &Complex, m: usize) -> Result<Representation> {
    let comps = strong_components(complex, m)?;
    representation_from(complex, m, &comps)
}

fn representation_from(complex: &Complex, m: usize, comps: &[ComponentReport]) -> Result<Representation> {
    let representation_sum = comps.iter().filter(|c| c.is_maximal_restriction).map(|c| c.r).sum();
    let non_maximal: Vec<Vec<u32>> = comps
        .iter()
        .filter(|c| !c.is_maximal_restriction)
        .map(|c| c.sigma.clone())
        .collect();
    let used_fallback = !non_maximal.is_empty();
    let betti = if used_fallback {
        log::info!(
            "{} component(s) without a maximal restriction ({:?}); using direct homology",
            non_maximal.len(),
            complex.provenance()
        );
        homology::betti(complex, m)?
    } else {
        representation_sum
    };
    Ok(Representation {
        betti,
        representation_sum,
        non_maximal,
        used_fallback,
    })
}

/// Lower bound on the number of `i`-faces of an `m`-strongly connected
/// complex on `j >= m + 2` points carrying an `m`-cycle.
pub fn min_face_count(j: usize, i: usize, m: usize) -> u128 {
    assert!(j >= m + 2 && i <= m, "need j >= m + 2 and i <= m");
    let c = |a: usize, b: usize| binomial_u128(a as u64, b as u64).expect("small binomial");
    c(m + 2, i + 1) + (j - m - 2) as u128 * c(m, i)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountOptions {
    /// Largest `j` reported in `S_j`, `R_j`, `T_{j,r}`; `None` keeps all.
    pub j_max: Option<usize>,
    /// `S_j`/`R_j` count components spanning exactly `j` vertices
    /// (`true`) or `j`-subsets containing a cycle / an `m`-face (`false`,
    /// small `n` only).
    pub spanning: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self {
            j_max: None,
            spanning: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub m: usize,
    pub q: usize,
    #[serde(rename = "T", with = "pair_keys")]
    pub t: BTreeMap<(usize, usize), u64>,
    #[serde(rename = "S")]
    pub s: BTreeMap<usize, u64>,
    #[serde(rename = "R")]
    pub r: BTreeMap<usize, u64>,
    #[serde(rename = "S_m2")]
    pub s_m2: u64,
    #[serde(rename = "V_m2")]
    pub v_m2: u64,
    #[serde(rename = "T_m2")]
    pub t_m2: u64,
    #[serde(rename = "Y_q")]
    pub y_q: u64,
    pub f: Vec<u64>,
    pub spanning: bool,
    /// Components excluded from `T` because their restriction is larger.
    pub non_maximal: u64,
    /// Components larger than `j_max`.
    pub beyond_range: u64,
}

mod pair_keys {
    use std::collections::BTreeMap;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<(usize, usize), u64>, s: S) -> Result<S::Ok, S::Error> {
        map.iter()
            .map(|(&(j, r), &c)| (format!("{j},{r}"), c))
            .collect::<BTreeMap<String, u64>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(usize, usize), u64>, D::Error> {
        BTreeMap::<String, u64>::deserialize(d)?
            .into_iter()
            .map(|(k, c)| {
                let (j, r) = k
                    .split_once(',')
                    .ok_or_else(|| D::Error::custom(format!("bad (j,r) key '{k}'")))?;
                let parse = |x: &str| x.trim().parse::<usize>().map_err(D::Error::custom);
                Ok(((parse(j)?, parse(r)?), c))
            })
            .collect()
    }
}

impl CountTable {
    /// Violations of the exact per-realization identities.
    pub fn identity_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let f_top = self.f.get(self.m + 1).copied().unwrap_or(0);
        if self.s_m2 != self.v_m2 + f_top {
            out.push(format!("S - V = {} but f_(m+1) = {f_top}", self.s_m2 as i64 - self.v_m2 as i64));
        }
        if !(self.t_m2 <= self.v_m2 && self.v_m2 <= self.s_m2) {
            out.push(format!("T = {}, V = {}, S = {} not ordered", self.t_m2, self.v_m2, self.s_m2));
        }
        let t_pair = self.t.get(&(self.m + 2, 1)).copied().unwrap_or(0);
        if t_pair != self.t_m2 {
            out.push(format!("T_(m+2) = {} but T_(m+2,1) = {t_pair}", self.t_m2));
        }
        for (&j, &r_j) in &self.r {
            let s_j = self.s.get(&j).copied().unwrap_or(0);
            let t_j: u64 = self.t.range((j, 0)..=(j, usize::MAX)).map(|(_, &c)| c).sum();
            if !(t_j <= s_j && s_j <= r_j) {
                out.push(format!("j = {j}: sum_r T = {t_j}, S = {s_j}, R = {r_j} not ordered"));
            }
        }
        out
    }

    /// `(m+2, r)` entries count the `T_{m+2}` share of `sum r T_{j,r}`.
    pub fn higher_order_betti(&self) -> u64 {
        self.t
            .iter()
            .filter(|(&(j, _), _)| j >= self.m + 3)
            .map(|(&(_, r), &c)| r as u64 * c)
            .sum()
    }
}

/// Counts over all `(m+2)`-sets with a full `m`-skeleton.
struct SkeletonCounts {
    s: u64,
    v: u64,
    t: u64,
}

fn skeleton_counts(complex: &Complex, m: usize) -> SkeletonCounts {
    // number of m-faces on each (m-1)-face
    let mut degree = vec![0u32; complex.count(m - 1)];
    let mut sub = Vec::with_capacity(m + 1);
    for face in complex.faces(m) {
        for drop in 0..=m {
            drop_vertex(face, drop, &mut sub);
            degree[complex.index_of(&sub).expect("downward closed")] += 1;
        }
    }
    let mut counts = SkeletonCounts { s: 0, v: 0, t: 0 };
    let mut set = vec![0u32; m + 2];
    let mut ridge = Vec::with_capacity(m);
    complex.for_each_full_extension(m, |idx, v| {
        set[..=m].copy_from_slice(complex.face(m, idx));
        set[m + 1] = v;
        counts.s += 1;
        if complex.contains(&set) {
            return;
        }
        counts.v += 1;
        // each (m-1)-face of the set lies in exactly two m-faces inside it
        let isolated = (0..m + 2).tuple_combinations().all(|(a, b)| {
            ridge.clear();
            ridge.extend(set.iter().enumerate().filter(|&(t, _)| t != a && t != b).map(|(_, &x)| x));
            degree[complex.index_of(&ridge).expect("downward closed")] == 2
        });
        if isolated {
            counts.t += 1;
        }
    });
    counts
}

/// `(m+2)`-sets carrying at least two `m`-faces; any two such faces share
/// an `(m-1)`-face, so the pair spans the set.
fn spanning_pairs(complex: &Complex, m: usize) -> u64 {
    let mut cofaces: Vec<Vec<u32>> = vec![Vec::new(); complex.count(m - 1)];
    let mut sub = Vec::with_capacity(m + 1);
    for (idx, face) in complex.faces(m).enumerate() {
        for drop in 0..=m {
            drop_vertex(face, drop, &mut sub);
            cofaces[complex.index_of(&sub).expect("downward closed")].push(idx as u32);
        }
    }
    let mut sets: HashSet<Vec<u32>> = HashSet::new();
    for list in &cofaces {
        for (&a, &b) in list.iter().tuple_combinations() {
            let mut union: Vec<u32> = complex.face(m, a as usize).to_vec();
            union.extend_from_slice(complex.face(m, b as usize));
            union.sort_unstable();
            union.dedup();
            sets.insert(union);
        }
    }
    sets.len() as u64
}

fn containing_counts(complex: &Complex, m: usize, j: usize) -> Result<(u64, u64)> {
    let n = complex.n();
    let total = binomial_u128(n as u64, j as u64).unwrap_or(u128::MAX);
    if total > MAX_SUBSET_SCAN {
        return Err(Error::InvalidConfig(format!(
            "containing-mode counts enumerate C({n}, {j}) subsets; limit is {MAX_SUBSET_SCAN}"
        )));
    }
    let mut member = vec![false; n];
    let (mut s, mut r) = (0, 0);
    for subset in (0..n as u32).combinations(j) {
        for &v in &subset {
            member[v as usize] = true;
        }
        let inside: Vec<&[u32]> = complex
            .faces(m)
            .filter(|f| f.iter().all(|&v| member[v as usize]))
            .collect();
        if !inside.is_empty() {
            r += 1;
            if BoundaryMatrix::for_faces(complex, m, inside.iter().copied())?.rank() < inside.len() {
                s += 1;
            }
        }
        for &v in &subset {
            member[v as usize] = false;
        }
    }
    Ok((s, r))
}

/// Number of `q`-faces on the first `floor(n/2)` vertices.
pub fn y_q(complex: &Complex, q: usize) -> u64 {
    let half = (complex.n() / 2) as u32;
    complex.faces(q).filter(|f| f.iter().all(|&v| v < half)).count() as u64
}

pub fn count_table(complex: &Complex, m: usize, q: usize, options: CountOptions) -> Result<CountTable> {
    let comps = strong_components(complex, m)?;
    count_table_from(complex, m, q, options, &comps)
}

pub fn count_table_from(
    complex: &Complex,
    m: usize,
    q: usize,
    options: CountOptions,
    comps: &[ComponentReport],
) -> Result<CountTable> {
    require_materialized(complex, m)?;
    if q > complex.top_dimension() {
        return Err(Error::DimensionNotMaterialized {
            requested: q,
            built: complex.top_dimension(),
        });
    }
    let in_range = |j: usize| options.j_max.is_none_or(|jm| j <= jm);
    let mut table = CountTable {
        m,
        q,
        t: BTreeMap::new(),
        s: BTreeMap::new(),
        r: BTreeMap::new(),
        s_m2: 0,
        v_m2: 0,
        t_m2: 0,
        y_q: y_q(complex, q),
        f: complex.face_counts(),
        spanning: options.spanning,
        non_maximal: 0,
        beyond_range: 0,
    };
    // the closed case with top = m has no (m+1)-faces to report
    table.f.resize(table.f.len().max(m + 2), 0);

    let sk = skeleton_counts(complex, m);
    table.s_m2 = sk.s;
    table.v_m2 = sk.v;
    table.t_m2 = sk.t;

    for c in comps {
        if !c.is_maximal_restriction {
            table.non_maximal += 1;
        }
        if !in_range(c.j) {
            table.beyond_range += 1;
            continue;
        }
        if c.is_maximal_restriction && c.r >= 1 {
            *table.t.entry((c.j, c.r as usize)).or_default() += 1;
        }
    }

    let j_hi = options
        .j_max
        .unwrap_or_else(|| comps.iter().map(|c| c.j).max().unwrap_or(0).max(m + 2));
    if options.spanning {
        table.s.insert(m + 2, sk.s);
        table.r.insert(m + 2, spanning_pairs(complex, m));
        for j in m + 3..=j_hi {
            table.s.insert(j, 0);
            table.r.insert(j, 0);
        }
        for c in comps.iter().filter(|c| c.j >= m + 3 && c.j <= j_hi) {
            *table.r.get_mut(&c.j).expect("initialized") += 1;
            if c.has_cycle {
                *table.s.get_mut(&c.j).expect("initialized") += 1;
            }
        }
    } else {
        for j in m + 2..=j_hi.min(complex.n()) {
            let (s, r) = containing_counts(complex, m, j)?;
            table.s.insert(j, s);
            table.r.insert(j, r);
        }
    }
    Ok(table)
}

/// Everything one realization contributes: components, counts and the
/// representation check.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub components: Vec<ComponentReport>,
    pub counts: CountTable,
    pub representation: Representation,
    pub betti: u64,
}

pub fn analyze(complex: &Complex, m: usize, q: usize, options: CountOptions) -> Result<Analysis> {
    let components = strong_components(complex, m)?;
    let counts = count_table_from(complex, m, q, options, &components)?;
    let representation = representation_from(complex, m, &components)?;
    let betti = homology::betti(complex, m)?;
    Ok(Analysis {
        components,
        counts,
        representation,
        betti,
    })
}
