//! Seeded random test inputs: decomposables, sums of two decomposables with a
//! prescribed overlap, dense and sparse elements, and subspace pairs.

use std::fmt;

use itertools::Itertools;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::exterior::{wedge, Multivector};
use crate::scalar::{FieldSpec, Scalar};
use crate::witness::{q_dim, Subspace};

/// Entries of random rational vectors lie in `[-BOUND, BOUND]`.
pub const BOUND: i64 = 3;

pub fn random_vector<R: Rng + ?Sized>(field: FieldSpec, n: usize, rng: &mut R) -> Vec<Scalar> {
    (0..n).map(|_| field.random(rng, BOUND)).collect()
}

pub fn wedge_of(field: FieldSpec, n: usize, vectors: &[Vec<Scalar>]) -> Multivector {
    let mut w = Multivector::zero(field, n, 0);
    w.add_raw(&[], &field.one()).expect("empty index list");
    for v in vectors {
        w = wedge(&w, &Multivector::vector(field, v)).expect("degree at most n");
    }
    w
}

pub fn random_decomposable<R: Rng + ?Sized>(field: FieldSpec, n: usize, p: usize, rng: &mut R) -> Multivector {
    let vs: Vec<Vec<Scalar>> = (0..p).map(|_| random_vector(field, n, rng)).collect();
    wedge_of(field, n, &vs)
}

/// `u₁∧…∧u_s∧v_{s+1}∧…∧v_p + u₁∧…∧u_s∧w_{s+1}∧…∧w_p`: two decomposables
/// whose spans generically meet in dimension `shared` (when `2p − shared ≤ n`).
pub fn two_term_sum<R: Rng + ?Sized>(
    field: FieldSpec,
    n: usize,
    p: usize,
    shared: usize,
    rng: &mut R,
) -> Multivector {
    let shared = shared.min(p);
    let common: Vec<Vec<Scalar>> = (0..shared).map(|_| random_vector(field, n, rng)).collect();
    let mut half = || {
        let mut vs = common.clone();
        vs.extend((shared..p).map(|_| random_vector(field, n, rng)));
        wedge_of(field, n, &vs)
    };
    let (a, b) = (half(), half());
    a.add(&b).expect("same shape")
}

pub fn dense_random<R: Rng + ?Sized>(field: FieldSpec, n: usize, p: usize, rng: &mut R) -> Multivector {
    let terms: Vec<(Vec<usize>, Scalar)> = (1..=n).combinations(p).map(|j| (j, field.random(rng, BOUND))).collect();
    Multivector::from_terms(field, n, p, terms).expect("valid index sets")
}

/// A sum of `count` random basis elements with random nonzero coefficients.
pub fn sparse_random<R: Rng + ?Sized>(
    field: FieldSpec,
    n: usize,
    p: usize,
    count: usize,
    rng: &mut R,
) -> Multivector {
    let all: Vec<Vec<usize>> = (1..=n).combinations(p).collect();
    let mut w = Multivector::zero(field, n, p);
    for _ in 0..count {
        let idx = &all[rng.gen_range(0..all.len())];
        let mut c = field.random(rng, BOUND);
        if c.is_zero() {
            c = field.one();
        }
        w.add_raw(idx, &c).expect("valid index set");
    }
    w
}

/// A random subspace of exactly dimension `dim`.
pub fn random_subspace<R: Rng + ?Sized>(field: FieldSpec, n: usize, dim: usize, rng: &mut R) -> Subspace {
    assert!(dim <= n, "subspace dimension {dim} exceeds {n}");
    loop {
        let vs: Vec<Vec<Scalar>> = (0..dim).map(|_| random_vector(field, n, rng)).collect();
        let s = Subspace::span(field, n, &vs).expect("vectors of length n");
        if s.dim() == dim {
            return s;
        }
    }
}

/// Two `p`-dimensional subspaces with `q(V₀, V₁) = q` exactly.
pub fn random_subspace_pair<R: Rng + ?Sized>(
    field: FieldSpec,
    n: usize,
    p: usize,
    q: usize,
    rng: &mut R,
) -> (Subspace, Subspace) {
    assert!(q <= p && p + q <= n, "no pair with p = {p}, q = {q} in k^{n}");
    loop {
        let common: Vec<Vec<Scalar>> = (0..p - q).map(|_| random_vector(field, n, rng)).collect();
        let mut side = || {
            let mut vs = common.clone();
            vs.extend((0..q).map(|_| random_vector(field, n, rng)));
            Subspace::span(field, n, &vs).expect("vectors of length n")
        };
        let (v0, v1) = (side(), side());
        if v0.dim() == p && v1.dim() == p && q_dim(&v0, &v1).ok() == Some(q) {
            return (v0, v1);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleKind {
    Decomposable,
    TwoTerm { shared: usize },
    Dense,
    Sparse,
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleKind::Decomposable => write!(f, "decomposable"),
            SampleKind::TwoTerm { shared } => write!(f, "two-term/{shared}"),
            SampleKind::Dense => write!(f, "dense"),
            SampleKind::Sparse => write!(f, "sparse"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub kind: SampleKind,
    pub w: Multivector,
}

/// `size` samples cycling through the four kinds; two-term sums cycle
/// through every admissible overlap `max(0, 2p − n) ≤ s ≤ p`.
pub fn mixed_corpus(field: FieldSpec, n: usize, p: usize, size: usize, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let overlaps: Vec<usize> = ((2 * p).saturating_sub(n)..=p).collect();
    (0..size)
        .map(|i| {
            let kind = match i % 4 {
                0 => SampleKind::Decomposable,
                1 => SampleKind::TwoTerm {
                    shared: overlaps[(i / 4) % overlaps.len()],
                },
                2 => SampleKind::Dense,
                _ => SampleKind::Sparse,
            };
            let w = match kind {
                SampleKind::Decomposable => random_decomposable(field, n, p, &mut rng),
                SampleKind::TwoTerm { shared } => two_term_sum(field, n, p, shared, &mut rng),
                SampleKind::Dense => dense_random(field, n, p, &mut rng),
                SampleKind::Sparse => {
                    let count = rng.gen_range(2..=5);
                    sparse_random(field, n, p, count, &mut rng)
                }
            };
            Sample { kind, w }
        })
        .collect()
}
