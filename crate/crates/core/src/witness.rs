//! Certificates of indecomposability. A kernel-dimension oracle decides
//! decomposability directly; [`witness_from_pair`] turns two subspaces into a
//! relation triple, and [`witness_search`] finds a rank-6 relation that does
//! not vanish at a given indecomposable element.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{wedge, IndexTuple, Multivector};
use crate::gcp::x_mapping;
use crate::matrix::{kernel_basis, mat_rank, Matrix};
use crate::relations::{enumerate_rank6, evaluate_form, rank6_form, RelationDoc, RelationTriple};
use crate::scalar::{FieldSpec, Scalar};

fn rows_matrix(field: FieldSpec, n: usize, rows: &[Vec<Scalar>]) -> Matrix {
    let mut m = Matrix::zeros(field, rows.len(), n);
    for (r, row) in rows.iter().enumerate() {
        for (c, s) in row.iter().enumerate() {
            m.set(r, c, s.clone());
        }
    }
    m
}

fn unit(field: FieldSpec, n: usize, i: usize) -> Vec<Scalar> {
    let mut v = vec![field.zero(); n];
    v[i - 1] = field.one();
    v
}

/// Subspace of `k^n` held by its reduced echelon basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    field: FieldSpec,
    n: usize,
    basis: Vec<Vec<Scalar>>,
}

impl Subspace {
    pub fn span(field: FieldSpec, n: usize, vectors: &[Vec<Scalar>]) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::ShapeMismatch(format!("vector of length {} in k^{n}", v.len())));
        }
        if let Some(s) = vectors.iter().flatten().find(|s| s.field() != field) {
            return Err(Error::FieldMismatch(field.to_string(), s.field().to_string()));
        }
        let (r, pivots) = rows_matrix(field, n, vectors).rref();
        Ok(Subspace {
            field,
            n,
            basis: (0..pivots.len()).map(|i| r.row(i).to_vec()).collect(),
        })
    }

    pub fn coordinate(field: FieldSpec, n: usize, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        let vs: Vec<Vec<Scalar>> = indices.iter().map(|&i| unit(field, n, i)).collect();
        Self::span(field, n, &vs)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Scalar>] {
        &self.basis
    }

    fn with(&self, extra: impl IntoIterator<Item = Vec<Scalar>>) -> Vec<Vec<Scalar>> {
        self.basis.iter().cloned().chain(extra).collect()
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        mat_rank(&rows_matrix(self.field, self.n, &self.with([v.to_vec()]))) == self.dim()
    }

    pub fn contains_unit(&self, i: usize) -> bool {
        self.contains(&unit(self.field, self.n, i))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        Subspace::span(self.field, self.n, &self.with(other.basis.iter().cloned())).expect("same ambient space")
    }

    /// Orthogonal complement for the standard bilinear form.
    pub fn perp(&self) -> Subspace {
        let k = kernel_basis(&rows_matrix(self.field, self.n, &self.basis));
        Subspace::span(self.field, self.n, &k).expect("kernel vectors have length n")
    }

    /// `U ∩ W = (U^⊥ + W^⊥)^⊥`.
    pub fn intersection(&self, other: &Subspace) -> Subspace {
        self.perp().sum(&other.perp()).perp()
    }

    /// `π_S(V)`, keeping ambient coordinates and zeroing those outside `S`.
    pub fn project(&self, support: &[usize]) -> Subspace {
        let vs: Vec<Vec<Scalar>> = self
            .basis
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .map(|(i, s)| if support.contains(&(i + 1)) { s.clone() } else { self.field.zero() })
                    .collect()
            })
            .collect();
        Subspace::span(self.field, self.n, &vs).expect("same ambient space")
    }

    /// Image under a linear map given as a matrix with `n` columns.
    pub fn image(&self, m: &Matrix) -> Result<Subspace> {
        let vs = self.basis.iter().map(|v| m.mul_vec(v)).collect::<Result<Vec<_>>>()?;
        Subspace::span(self.field, m.rows(), &vs)
    }

    /// `rank(V ∪ {e_b : b ∈ extra}) = dim V + |extra|`.
    fn independent_of(&self, extra: &[usize]) -> bool {
        let rows = self.with(extra.iter().map(|&i| unit(self.field, self.n, i)));
        mat_rank(&rows_matrix(self.field, self.n, &rows)) == self.dim() + extra.len()
    }
}

/// `{v : v ∧ w = 0}`.
pub fn annihilator(w: &Multivector) -> Result<Subspace> {
    let (field, n, p) = (w.field(), w.n(), w.degree());
    if p >= n {
        return Subspace::coordinate(field, n, &(1..=n).collect::<Vec<_>>());
    }
    let mut rows: BTreeMap<IndexTuple, usize> = BTreeMap::new();
    let mut columns = Vec::with_capacity(n);
    for i in 1..=n {
        let img = wedge(&Multivector::basis(field, n, &[i])?, w)?;
        for (t, _) in img.terms() {
            let next = rows.len();
            rows.entry(t.clone()).or_insert(next);
        }
        columns.push(img);
    }
    let mut m = Matrix::zeros(field, rows.len(), n);
    for (c, img) in columns.iter().enumerate() {
        for (t, s) in img.terms() {
            m.set(rows[t], c, s.clone());
        }
    }
    Subspace::span(field, n, &kernel_basis(&m))
}

/// `w = 0`, or the annihilator of `w` has dimension `p`.
pub fn brute_force_decomposable(w: &Multivector) -> bool {
    w.is_zero() || annihilator(w).expect("annihilator of a well-formed element").dim() == w.degree()
}

/// `p − dim(V₀ ∩ V₁)` for two `p`-dimensional subspaces.
pub fn q_dim(v0: &Subspace, v1: &Subspace) -> Result<usize> {
    check_pair(v0, v1)?;
    Ok(v0.sum(v1).dim() - v0.dim())
}

fn check_pair(v0: &Subspace, v1: &Subspace) -> Result<()> {
    if v0.field != v1.field {
        return Err(Error::FieldMismatch(v0.field.to_string(), v1.field.to_string()));
    }
    if v0.n != v1.n || v0.dim() != v1.dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspaces of dimension {} in k^{} and {} in k^{}",
            v0.dim(),
            v0.n,
            v1.dim(),
            v1.n
        )));
    }
    Ok(())
}

/// The three conclusions required of `X = X_{𝒜,ℬ,𝒞}`: `dim X V_ε = p`,
/// `dim(X V₀ ∩ X V₁) = p − 2`, and the `X e_{α_i}` independent modulo that
/// intersection.
pub fn separation_holds(t: &RelationTriple, v0: &Subspace, v1: &Subspace) -> Result<bool> {
    check_pair(v0, v1)?;
    let p = v0.dim();
    if t.degree() != p {
        return Err(Error::DimensionMismatch(format!(
            "triple of degree {} for {p}-dimensional subspaces",
            t.degree()
        )));
    }
    let x = x_mapping(t, v0.n)?.matrix(v0.field);
    let (h0, h1) = (v0.image(&x)?, v1.image(&x)?);
    if h0.dim() != p || h1.dim() != p {
        return Ok(false);
    }
    let inter = h0.intersection(&h1);
    if inter.dim() + 2 != p {
        return Ok(false);
    }
    let vectors = inter.with(t.a.iter().map(|&a| x.column(a - 1)));
    Ok(mat_rank(&rows_matrix(v0.field, p + 2, &vectors)) == p + 2)
}

/// Output of [`witness_from_pair`]: the triple, whether it satisfies the
/// ordering condition of the rank-6 set, the minimal support `S` and `q_S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairWitness {
    pub triple: RelationTriple,
    pub canonical: bool,
    pub support: Vec<usize>,
    pub q_s: usize,
}

fn minimal_support(v0: &Subspace, v1: &Subspace) -> Vec<usize> {
    let p = v0.dim();
    let good = |s: &[usize]| {
        let (a, b) = (v0.project(s), v1.project(s));
        a.dim() == p && b.dim() == p && a.sum(&b).dim() >= p + 2
    };
    let mut s: Vec<usize> = (1..=v0.n).collect();
    for i in (1..=v0.n).rev() {
        let cand: Vec<usize> = s.iter().copied().filter(|&x| x != i).collect();
        if good(&cand) {
            s = cand;
        }
    }
    s
}

/// Grows `(B̄₀, B̄₁)` with `k^{B_ε} ⊂ V_ε'` and `k^{B_ε} ∩ V_{1−ε}' = 0` until
/// neither side can be extended.
fn maximal_pair(s: &[usize], v: [&Subspace; 2]) -> [Vec<usize>; 2] {
    let mut b: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    loop {
        let mut grew = false;
        for &i in s {
            if b[0].contains(&i) || b[1].contains(&i) {
                continue;
            }
            for eps in 0..2 {
                let mut cand = b[eps].clone();
                cand.push(i);
                if v[eps].contains_unit(i) && v[1 - eps].independent_of(&cand) {
                    b[eps] = cand;
                    grew = true;
                    break;
                }
            }
        }
        if !grew {
            return b;
        }
    }
}

fn split_triple(s: &[usize], bbar: [&[usize]; 2], keep: [&[usize]; 2]) -> RelationTriple {
    let mut a: Vec<usize> = (0..2)
        .flat_map(|e| bbar[e].iter().copied().filter(move |x| !keep[e].contains(x)))
        .collect();
    a.sort_unstable();
    let b = keep[0].iter().copied().zip(keep[1].iter().copied()).collect();
    let c = s
        .iter()
        .copied()
        .filter(|x| !bbar[0].contains(x) && !bbar[1].contains(x))
        .collect();
    RelationTriple::new(a, b, c)
}

/// Builds a triple whose `X` keeps `V₀`, `V₁` apart as in the two-subspace
/// construction: minimal support `S`, then either a 4-set complementing
/// `V₀' ∩ V₁'` (when `q_S = 2`) or a maximal pair split into `𝒜` and `ℬ`.
/// Among the splittings of the maximal pair the first one satisfying the
/// ordering condition is returned; if none does, the unmodified split is
/// returned with `canonical = false`.
pub fn witness_from_pair(v0: &Subspace, v1: &Subspace) -> Result<PairWitness> {
    let q = q_dim(v0, v1)?;
    if q < 2 {
        return Err(Error::QTooSmall(q));
    }
    let (p, n) = (v0.dim(), v0.n);
    let s = minimal_support(v0, v1);
    let (w0, w1) = (v0.project(&s), v1.project(&s));
    let q_s = w0.sum(&w1).dim() - p;
    if p + q_s != s.len() {
        return Err(Error::Consistency(format!(
            "minimal support {s:?} has p + q_S = {} ≠ |S|",
            p + q_s
        )));
    }
    let verified = |t: RelationTriple, canonical: bool| -> Result<PairWitness> {
        if !separation_holds(&t, v0, v1)? {
            return Err(Error::Consistency(format!("triple {t} fails the subspace conditions")));
        }
        Ok(PairWitness {
            triple: t,
            canonical,
            support: s.clone(),
            q_s,
        })
    };
    if q_s == 2 {
        let inter = w0.intersection(&w1);
        let a = s
            .iter()
            .copied()
            .combinations(4)
            .find(|a| {
                let rows = inter.with(a.iter().map(|&i| unit(v0.field, n, i)));
                mat_rank(&rows_matrix(v0.field, n, &rows)) == p + 2
            })
            .ok_or_else(|| Error::Consistency("no complementary 4-set".into()))?;
        let c = s.iter().copied().filter(|x| !a.contains(x)).collect();
        return verified(RelationTriple::new(a, Vec::new(), c), true);
    }
    let bbar = maximal_pair(&s, [&w0, &w1]);
    if bbar[0].len() != q_s || bbar[1].len() != q_s {
        return Err(Error::Consistency(format!(
            "maximal pair sizes {} and {} differ from q_S = {q_s}",
            bbar[0].len(),
            bbar[1].len()
        )));
    }
    let mut sorted = bbar.clone();
    sorted[0].sort_unstable();
    sorted[1].sort_unstable();
    for (first, second) in [(0, 1), (1, 0)] {
        let (x0, x1) = (&sorted[first], &sorted[second]);
        for keep0 in x0.iter().copied().combinations(q_s - 2) {
            for keep1 in x1.iter().copied().combinations(q_s - 2) {
                let t = split_triple(&s, [x0, x1], [&keep0, &keep1]);
                if t.is_canonical(n) && separation_holds(&t, v0, v1)? {
                    return verified(t, true);
                }
            }
        }
    }
    let keep0 = &sorted[0][..q_s - 2];
    let keep1 = &sorted[1][..q_s - 2];
    verified(split_triple(&s, [&sorted[0], &sorted[1]], [keep0, keep1]), false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessMethod {
    Pair,
    Search,
}

/// A rank-6 relation that does not vanish at the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessResult {
    pub triple: RelationTriple,
    pub value: Scalar,
    pub method: WitnessMethod,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub relation: RelationDoc,
    pub value: String,
    pub method: WitnessMethod,
}

impl WitnessResult {
    pub fn to_doc(&self) -> WitnessDoc {
        WitnessDoc {
            relation: RelationDoc::triple(&self.triple),
            value: self.value.to_string(),
            method: self.method,
        }
    }
}

/// `(ω₁, ω₂)` with `w = ω₁ ∧ e_n + ω₂`, both over `k^{n−1}`.
pub fn split_last(w: &Multivector) -> Result<(Multivector, Multivector)> {
    let (field, n, p) = (w.field(), w.n(), w.degree());
    if n == 0 || p == 0 {
        return Err(Error::ShapeMismatch("cannot split off e_n from a scalar".into()));
    }
    let mut w1 = Multivector::zero(field, n - 1, p - 1);
    let mut w2 = Multivector::zero(field, n - 1, p);
    for (t, c) in w.terms() {
        let idx = t.indices();
        if idx.last() == Some(&n) {
            w1.add_raw(&idx[..p - 1], c)?;
        } else {
            w2.add_raw(idx, c)?;
        }
    }
    Ok((w1, w2))
}

fn recurse(w: &Multivector) -> Result<Option<RelationTriple>> {
    let (n, p) = (w.n(), w.degree());
    let (w1, w2) = split_last(w)?;
    if p >= 3 && !brute_force_decomposable(&w1) {
        return Ok(recurse(&w1)?.map(|mut t| {
            t.c.push(n);
            t
        }));
    }
    if !brute_force_decomposable(&w2) {
        return recurse(&w2);
    }
    let part1 = wedge(&w1.with_ambient(n)?, &Multivector::basis(w.field(), n, &[n])?)?;
    let part2 = w2.with_ambient(n)?;
    if part1.is_zero() || part2.is_zero() {
        return Ok(None);
    }
    let pw = witness_from_pair(&annihilator(&part1)?, &annihilator(&part2)?)?;
    Ok(pw.canonical.then_some(pw.triple))
}

/// A rank-6 relation of the selected set not vanishing at `w`. Follows the
/// induction on `n` (peeling off `e_n` until `w` is a sum of two
/// decomposables); falls back to scanning all relations.
pub fn witness_search(w: &Multivector) -> Result<WitnessResult> {
    if brute_force_decomposable(w) {
        return Err(Error::Decomposable);
    }
    let (field, n, p) = (w.field(), w.n(), w.degree());
    if let Some(t) = recurse(w)? {
        if t.is_canonical(n) {
            let value = evaluate_form(&rank6_form(field, n, p, &t)?, w)?;
            if !value.is_zero() {
                return Ok(WitnessResult {
                    triple: t,
                    value,
                    method: WitnessMethod::Pair,
                });
            }
        }
    }
    for t in enumerate_rank6(p, n) {
        let value = evaluate_form(&rank6_form(field, n, p, &t)?, w)?;
        if !value.is_zero() {
            return Ok(WitnessResult {
                triple: t,
                value,
                method: WitnessMethod::Search,
            });
        }
    }
    Err(Error::Consistency(format!(
        "no rank-6 relation detects the indecomposable element {w}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{random_decomposable, random_subspace_pair, two_term_sum};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q() -> FieldSpec {
        FieldSpec::Rational
    }

    fn basis(n: usize, idx: &[usize]) -> Multivector {
        Multivector::basis(q(), n, idx).unwrap()
    }

    #[test]
    fn brute_force_examples() {
        assert!(brute_force_decomposable(&basis(4, &[1, 2])));
        assert!(!brute_force_decomposable(&basis(4, &[1, 2]).add(&basis(4, &[3, 4])).unwrap()));
        let w = basis(5, &[1, 2, 3]).add(&basis(5, &[5, 2, 3])).unwrap();
        assert!(brute_force_decomposable(&w));
        assert!(brute_force_decomposable(&Multivector::zero(q(), 5, 2)));
        assert_eq!(annihilator(&basis(4, &[1, 2])).unwrap(), Subspace::coordinate(q(), 4, &[1, 2]).unwrap());
    }

    #[test]
    fn q_dim_examples() {
        let c = |idx: &[usize]| Subspace::coordinate(q(), 4, idx).unwrap();
        assert_eq!(q_dim(&c(&[1, 2]), &c(&[1, 2])).unwrap(), 0);
        assert_eq!(q_dim(&c(&[1, 2]), &c(&[3, 4])).unwrap(), 2);
        assert_eq!(q_dim(&c(&[1, 2]), &c(&[2, 3])).unwrap(), 1);
        assert!(matches!(q_dim(&c(&[1]), &c(&[2, 3])), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn subspace_operations() {
        let a = Subspace::coordinate(q(), 4, &[1, 2, 3]).unwrap();
        let b = Subspace::coordinate(q(), 4, &[2, 3, 4]).unwrap();
        assert_eq!(a.intersection(&b), Subspace::coordinate(q(), 4, &[2, 3]).unwrap());
        assert_eq!(a.sum(&b).dim(), 4);
        assert_eq!(a.project(&[1, 4]), Subspace::coordinate(q(), 4, &[1]).unwrap());
        assert!(a.contains_unit(2));
        assert!(!a.contains_unit(4));
    }

    #[test]
    fn pair_examples() {
        let c4 = |idx: &[usize]| Subspace::coordinate(q(), 4, idx).unwrap();
        let pw = witness_from_pair(&c4(&[1, 2]), &c4(&[3, 4])).unwrap();
        assert_eq!(pw.triple, RelationTriple::new(vec![1, 2, 3, 4], vec![], vec![]));
        assert!(pw.canonical);
        assert_eq!(pw.q_s, 2);

        let c6 = |idx: &[usize]| Subspace::coordinate(q(), 6, idx).unwrap();
        let (v0, v1) = (c6(&[1, 2, 3]), c6(&[4, 5, 6]));
        let pw = witness_from_pair(&v0, &v1).unwrap();
        assert_eq!(pw.triple.m(), 1);
        assert_eq!(pw.q_s, 3);
        assert_eq!(pw.support.len(), 3 + pw.q_s);
        assert!(pw.canonical);
        assert!(pw.triple.is_canonical(6));
        assert!(separation_holds(&pw.triple, &v0, &v1).unwrap());

        assert!(matches!(
            witness_from_pair(&c4(&[1, 2]), &c4(&[2, 3])),
            Err(Error::QTooSmall(1))
        ));
    }

    #[test]
    fn search_examples() {
        let w = basis(4, &[1, 2]).add(&basis(4, &[3, 4])).unwrap();
        let r = witness_search(&w).unwrap();
        assert_eq!(r.triple, RelationTriple::new(vec![1, 2, 3, 4], vec![], vec![]));
        assert!(r.value.is_one());

        let w = basis(6, &[1, 2, 3]).add(&basis(6, &[4, 5, 6])).unwrap();
        let r = witness_search(&w).unwrap();
        assert_eq!(evaluate_form(&rank6_form(q(), 6, 3, &r.triple).unwrap(), &w).unwrap(), r.value);
        assert!(!r.value.is_zero());

        assert!(matches!(witness_search(&basis(6, &[1, 2, 3])), Err(Error::Decomposable)));
    }

    #[test]
    fn split_last_recombines() {
        let w = basis(5, &[1, 5]).add(&basis(5, &[2, 3])).unwrap();
        let (w1, w2) = split_last(&w).unwrap();
        assert_eq!(w1, basis(4, &[1]));
        assert_eq!(w2, basis(4, &[2, 3]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn decomposables_pass_oracle(seed in any::<u64>(), n in 4usize..8, p in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let field = FieldSpec::prime(101).unwrap();
            let w = random_decomposable(field, n, p, &mut rng);
            prop_assert!(brute_force_decomposable(&w));
        }

        #[test]
        fn pair_witness_satisfies_bullets(seed in any::<u64>(), n in 6usize..9, p in 2usize..4, q in 2usize..4) {
            prop_assume!(p >= q && p + q <= n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let field = FieldSpec::prime(101).unwrap();
            let (v0, v1) = random_subspace_pair(field, n, p, q, &mut rng);
            let pw = witness_from_pair(&v0, &v1).unwrap();
            prop_assert!(separation_holds(&pw.triple, &v0, &v1).unwrap());
            prop_assert_eq!(pw.support.len(), p + pw.q_s);
        }

        #[test]
        fn two_term_witnesses(seed in any::<u64>(), shared in 0usize..2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let field = FieldSpec::prime(101).unwrap();
            let w = two_term_sum(field, 7, 3, shared, &mut rng);
            if !brute_force_decomposable(&w) {
                let r = witness_search(&w).unwrap();
                let f = rank6_form(field, 7, 3, &r.triple).unwrap();
                prop_assert_eq!(evaluate_form(&f, &w).unwrap(), r.value.clone());
                prop_assert!(r.triple.is_canonical(7));
            }
        }
    }
}
