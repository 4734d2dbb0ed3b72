//! Brute-force references shared by the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use betti_lab::exponents::AlphaProfile;
use betti_lab::sampler::{sample_complex, Complex, SampleConfig};

pub fn sample(n: usize, alpha: &[f64], top: usize, seed: u64, rep: u64) -> Complex {
    sample_complex(&SampleConfig {
        n,
        alpha: AlphaProfile::new(alpha.to_vec()).unwrap(),
        d_max_build: top,
        seed,
        replication_index: rep,
    })
    .unwrap()
}

/// Rank over GF(2) of the boundary matrix of `faces`, by dense elimination.
pub fn dense_boundary_rank(faces: &[Vec<u32>]) -> usize {
    let Some(first) = faces.first() else { return 0 };
    if first.len() < 2 {
        return 0;
    }
    let rows: Vec<Vec<u32>> = faces
        .iter()
        .flat_map(|f| f.iter().copied().combinations(f.len() - 1))
        .sorted()
        .dedup()
        .collect();
    let mut matrix: Vec<Vec<bool>> = rows
        .iter()
        .map(|r| faces.iter().map(|f| r.iter().all(|v| f.contains(v))).collect())
        .collect();
    let mut rank = 0;
    for c in 0..faces.len() {
        let Some(p) = (rank..matrix.len()).find(|&r| matrix[r][c]) else { continue };
        matrix.swap(rank, p);
        let pivot = matrix[rank].clone();
        for (r, row) in matrix.iter_mut().enumerate() {
            if r != rank && row[c] {
                for (x, &y) in row.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn contains_all(set: &[u32], face: &[u32]) -> bool {
    face.iter().all(|v| set.contains(v))
}

fn shared(a: &[u32], b: &[u32]) -> usize {
    a.iter().filter(|v| b.contains(v)).count()
}

/// Dual-graph components by repeated flooding over all pairs.
pub fn naive_components(faces: &[Vec<u32>], m: usize) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; faces.len()];
    let mut out = Vec::new();
    for start in 0..faces.len() {
        if label[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![start];
        let mut members = Vec::new();
        label[start] = id;
        while let Some(a) = stack.pop() {
            members.push(a);
            for b in 0..faces.len() {
                if label[b] == usize::MAX && shared(&faces[a], &faces[b]) == m {
                    label[b] = id;
                    stack.push(b);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

#[derive(Debug, Default, PartialEq)]
pub struct BruteCounts {
    pub t: BTreeMap<(usize, usize), u64>,
    pub s: BTreeMap<usize, u64>,
    pub r: BTreeMap<usize, u64>,
    pub s_m2: u64,
    pub v_m2: u64,
    pub t_m2: u64,
    pub y_q: u64,
}

/// Every indicator evaluated from its definition on every vertex subset.
pub fn brute_counts(c: &Complex, m: usize, q: usize, spanning: bool) -> BruteCounts {
    let n = c.n();
    let faces = |d: usize| -> Vec<Vec<u32>> { c.faces(d).map(|f| f.to_vec()).collect() };
    let m_faces = faces(m);
    let top_faces = if c.top_dimension() > m { faces(m + 1) } else { Vec::new() };
    let comps = naive_components(&m_faces, m);
    let comp_sets: Vec<(Vec<u32>, bool)> = comps
        .iter()
        .map(|members| {
            let fs: Vec<Vec<u32>> = members.iter().map(|&i| m_faces[i].clone()).collect();
            let verts: Vec<u32> = fs.iter().flatten().copied().sorted().dedup().collect();
            let cycle = dense_boundary_rank(&fs) < fs.len();
            (verts, cycle)
        })
        .collect();

    let mut out = BruteCounts::default();
    for j in m + 2..=n {
        for sigma in (0..n as u32).combinations(j) {
            let inside: Vec<Vec<u32>> = m_faces.iter().filter(|f| contains_all(&sigma, f)).cloned().collect();
            let full_skeleton = (1..=m + 1).all(|size| sigma.iter().copied().combinations(size).all(|f| c.contains(&f)));

            // eta: X(sigma) is a maximal, connected, spanning family with beta_m = r
            if !inside.is_empty() {
                let connected = naive_components(&inside, m).len() == 1;
                let spans = inside.iter().flatten().copied().sorted().dedup().count() == j;
                let closed = m_faces
                    .iter()
                    .filter(|f| !contains_all(&sigma, f))
                    .all(|f| inside.iter().all(|g| shared(f, g) < m));
                if connected && spans && closed {
                    let tops: Vec<Vec<u32>> = top_faces.iter().filter(|f| contains_all(&sigma, f)).cloned().collect();
                    let r = inside.len() - dense_boundary_rank(&inside) - dense_boundary_rank(&tops);
                    if r >= 1 {
                        *out.t.entry((j, r)).or_default() += 1;
                    }
                }
            }

            if j == m + 2 && full_skeleton {
                out.s_m2 += 1;
                if !c.contains(&sigma) {
                    out.v_m2 += 1;
                    let isolated = sigma.iter().copied().combinations(m).all(|ridge| {
                        m_faces.iter().filter(|f| contains_all(f, &ridge)).all(|f| contains_all(&sigma, f))
                    });
                    if isolated {
                        out.t_m2 += 1;
                    }
                }
            }

            let (s, r) = if !spanning {
                let cycle = !inside.is_empty() && dense_boundary_rank(&inside) < inside.len();
                (cycle, !inside.is_empty())
            } else if j == m + 2 {
                (full_skeleton, inside.len() >= 2)
            } else {
                let hit = comp_sets.iter().find(|(v, _)| *v == sigma);
                (hit.is_some_and(|h| h.1), hit.is_some())
            };
            *out.s.entry(j).or_default() += s as u64;
            *out.r.entry(j).or_default() += r as u64;
        }
    }
    let half = (n / 2) as u32;
    out.y_q = c.faces(q).filter(|f| f.iter().all(|&v| v < half)).count() as u64;
    out
}

/// Overlap patterns of three concrete `(m+2)`-subsets of a large
/// universe, built Venn region by Venn region.
pub fn constructive_tuples(k: usize, m: usize) -> BTreeSet<[usize; 4]> {
    let size = m + 2;
    let mut out = BTreeSet::new();
    for a123 in 0..=size {
        for a12 in 0..=size - a123 {
            for a13 in 0..=size - a123 - a12 {
                for a23 in 0..=size - a123 {
                    let a1 = size as isize - (a123 + a12 + a13) as isize;
                    let a2 = size as isize - (a123 + a12 + a23) as isize;
                    let a3 = size as isize - (a123 + a13 + a23) as isize;
                    if a1 < 0 || a2 < 0 || a3 < 0 {
                        continue;
                    }
                    // lay the regions out on consecutive integers
                    let mut next = 0u32;
                    let mut take = |c: usize| {
                        let r: Vec<u32> = (next..next + c as u32).collect();
                        next += c as u32;
                        r
                    };
                    let (r123, r12, r13, r23) = (take(a123), take(a12), take(a13), take(a23));
                    let (r1, r2, r3) = (take(a1 as usize), take(a2 as usize), take(a3 as usize));
                    let set = |parts: &[&Vec<u32>]| -> BTreeSet<u32> { parts.iter().flat_map(|p| p.iter().copied()).collect() };
                    let s1 = set(&[&r123, &r12, &r13, &r1]);
                    let s2 = set(&[&r123, &r12, &r23, &r2]);
                    let s3 = set(&[&r123, &r13, &r23, &r3]);
                    assert!(s1.len() == size && s2.len() == size && s3.len() == size);
                    let l12 = s1.intersection(&s2).count();
                    let l13 = s1.intersection(&s3).count();
                    let l23 = s2.intersection(&s3).count();
                    let l123 = s1.iter().filter(|v| s2.contains(v) && s3.contains(v)).count();
                    let allowed = (k + 2)..=(m + 1);
                    if [l12, l13, l23].iter().all(|l| allowed.contains(l)) {
                        out.insert([l12, l13, l23, l123]);
                    }
                }
            }
        }
    }
    out
}

pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (j, &v)| if v > best.1 { (j, v) } else { best })
        .0
}
