//! Fixed-degree components of the exterior algebra: sparse p-vectors in
//! `∧^p k^n`, keyed by strictly increasing 1-based index tuples.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{FieldSpec, Scalar};

/// Strictly increasing list of indices in `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexTuple(Vec<usize>);

impl IndexTuple {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        for &i in &indices {
            check_index(i, n)?;
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidIndexSet(format!(
                "{indices:?} is not strictly increasing"
            )));
        }
        Ok(IndexTuple(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Indices of `1..=n` not in this tuple.
    pub fn complement(&self, n: usize) -> IndexTuple {
        IndexTuple((1..=n).filter(|i| !self.contains(*i)).collect())
    }
}

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if i == 0 || i > n {
        Err(Error::IndexOutOfRange { index: i, n })
    } else {
        Ok(())
    }
}

/// Result of sorting an arbitrary index list under antisymmetry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SignedTuple {
    /// The list had a repeated index.
    Zero,
    Signed { negative: bool, tuple: IndexTuple },
}

impl SignedTuple {
    pub fn sign(&self) -> i8 {
        match self {
            SignedTuple::Zero => 0,
            SignedTuple::Signed { negative: true, .. } => -1,
            SignedTuple::Signed { negative: false, .. } => 1,
        }
    }

    pub fn tuple(&self) -> Option<&IndexTuple> {
        match self {
            SignedTuple::Zero => None,
            SignedTuple::Signed { tuple, .. } => Some(tuple),
        }
    }
}

/// Sorts `raw`, tracking the parity of the sorting permutation.
pub fn normalize_indices(raw: &[usize], n: usize) -> Result<SignedTuple> {
    for &i in raw {
        check_index(i, n)?;
    }
    Ok(normalize_unchecked(raw))
}

pub(crate) fn normalize_unchecked(raw: &[usize]) -> SignedTuple {
    let mut v = raw.to_vec();
    let mut negative = false;
    // insertion sort; p is small
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            negative = !negative;
            j -= 1;
        }
        if j > 0 && v[j - 1] == v[j] {
            return SignedTuple::Zero;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return SignedTuple::Zero;
    }
    SignedTuple::Signed {
        negative,
        tuple: IndexTuple(v),
    }
}

/// Element of `∧^p k^n`. Zero coefficients are never stored; iteration is
/// in lexicographic tuple order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multivector {
    field: FieldSpec,
    n: usize,
    p: usize,
    terms: BTreeMap<IndexTuple, Scalar>,
}

impl Multivector {
    pub fn zero(field: FieldSpec, n: usize, p: usize) -> Self {
        Multivector {
            field,
            n,
            p,
            terms: BTreeMap::new(),
        }
    }

    /// The basis element `e_{raw[0]} ∧ … ∧ e_{raw[p-1]}` (signed by sorting).
    pub fn basis(field: FieldSpec, n: usize, raw: &[usize]) -> Result<Self> {
        let mut w = Self::zero(field, n, raw.len());
        w.add_raw(raw, &field.one())?;
        Ok(w)
    }

    /// A degree-1 element from its coordinate vector.
    pub fn vector(field: FieldSpec, coords: &[Scalar]) -> Self {
        let mut w = Self::zero(field, coords.len(), 1);
        for (i, c) in coords.iter().enumerate() {
            w.add_term(IndexTuple(vec![i + 1]), c);
        }
        w
    }

    pub fn from_terms(
        field: FieldSpec,
        n: usize,
        p: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, Scalar)>,
    ) -> Result<Self> {
        let mut w = Self::zero(field, n, p);
        for (idx, c) in terms {
            w.add_raw(&idx, &c)?;
        }
        Ok(w)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IndexTuple, &Scalar)> {
        self.terms.iter()
    }

    /// Coordinate at a sorted tuple.
    pub fn get(&self, t: &IndexTuple) -> Scalar {
        self.terms.get(t).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Antisymmetric coordinate `Π_{raw}`.
    pub fn coefficient(&self, raw: &[usize]) -> Result<Scalar> {
        if raw.len() != self.p {
            return Err(Error::ShapeMismatch(format!(
                "index list of length {} for a {}-vector",
                raw.len(),
                self.p
            )));
        }
        Ok(match normalize_indices(raw, self.n)? {
            SignedTuple::Zero => self.field.zero(),
            SignedTuple::Signed { negative, tuple } => {
                let c = self.get(&tuple);
                if negative {
                    -c
                } else {
                    c
                }
            }
        })
    }

    pub(crate) fn add_term(&mut self, t: IndexTuple, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&t) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&t);
                }
            }
            None => {
                self.terms.insert(t, c.clone());
            }
        }
    }

    /// Adds `c · e_{raw}` with `raw` normalized by antisymmetry.
    pub fn add_raw(&mut self, raw: &[usize], c: &Scalar) -> Result<()> {
        if raw.len() != self.p {
            return Err(Error::ShapeMismatch(format!(
                "index list of length {} for a {}-vector",
                raw.len(),
                self.p
            )));
        }
        if c.field() != self.field {
            return Err(Error::FieldMismatch(self.field.to_string(), c.field().to_string()));
        }
        match normalize_indices(raw, self.n)? {
            SignedTuple::Zero => {}
            SignedTuple::Signed { negative, tuple } => {
                let c = if negative { -c } else { c.clone() };
                self.add_term(tuple, &c);
            }
        }
        Ok(())
    }

    fn check_same_space(&self, other: &Multivector) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.to_string(), other.field.to_string()));
        }
        if self.n != other.n || self.p != other.p {
            return Err(Error::ShapeMismatch(format!(
                "∧^{}k^{} vs ∧^{}k^{}",
                self.p, self.n, other.p, other.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Multivector) -> Result<Multivector> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        for (t, c) in &other.terms {
            out.add_term(t.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Multivector) -> Result<Multivector> {
        self.add(&other.scale(&-self.field.one()))
    }

    pub fn scale(&self, c: &Scalar) -> Multivector {
        let mut out = Self::zero(self.field, self.n, self.p);
        if !c.is_zero() {
            out.terms = self.terms.iter().map(|(t, v)| (t.clone(), v * c)).collect();
        }
        out
    }

    /// Re-embeds into a larger (or equal) ambient dimension.
    pub fn with_ambient(&self, n: usize) -> Result<Multivector> {
        if let Some(max) = self.terms.keys().filter_map(|t| t.0.last()).max() {
            if *max > n {
                return Err(Error::IndexOutOfRange { index: *max, n });
            }
        }
        Ok(Multivector {
            field: self.field,
            n,
            p: self.p,
            terms: self.terms.clone(),
        })
    }
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(t, c)| {
                let basis: Vec<String> = t.0.iter().map(|i| format!("e{i}")).collect();
                format!("({c}) {}", basis.join("^"))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Exterior product with shuffle signs.
pub fn wedge(a: &Multivector, b: &Multivector) -> Result<Multivector> {
    if a.field != b.field {
        return Err(Error::FieldMismatch(a.field.to_string(), b.field.to_string()));
    }
    if a.n != b.n {
        return Err(Error::ShapeMismatch(format!(
            "wedge of elements over k^{} and k^{}",
            a.n, b.n
        )));
    }
    if a.p + b.p > a.n {
        return Err(Error::DegreeOverflow {
            left: a.p,
            right: b.p,
            n: a.n,
        });
    }
    let mut out = Multivector::zero(a.field, a.n, a.p + b.p);
    let mut raw = Vec::with_capacity(a.p + b.p);
    for (ta, ca) in &a.terms {
        for (tb, cb) in &b.terms {
            raw.clear();
            raw.extend_from_slice(&ta.0);
            raw.extend_from_slice(&tb.0);
            if let SignedTuple::Signed { negative, tuple } = normalize_unchecked(&raw) {
                let c = ca * cb;
                out.add_term(tuple, &if negative { -c } else { c });
            }
        }
    }
    Ok(out)
}

/// Image under `∧^p L` for `L: k^n → k^m` given as an `m × n` matrix. Each
/// basis term `e_J` maps to the wedge of the columns `L e_j`, `j ∈ J`.
pub fn induced_map(l: &Matrix, w: &Multivector) -> Result<Multivector> {
    if l.cols() != w.n {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} matrix applied to ∧^{}k^{}",
            l.rows(),
            l.cols(),
            w.p,
            w.n
        )));
    }
    if l.field() != w.field {
        return Err(Error::FieldMismatch(l.field().to_string(), w.field.to_string()));
    }
    let m = l.rows();
    let mut out = Multivector::zero(w.field, m, w.p);
    if w.p > m {
        return Ok(out);
    }
    let columns: Vec<Multivector> = (0..l.cols())
        .map(|c| Multivector::vector(w.field, &l.column(c)))
        .collect();
    for (t, c) in &w.terms {
        let mut img = Multivector::zero(w.field, m, 0);
        img.add_term(IndexTuple(Vec::new()), c);
        for &j in &t.0 {
            img = wedge(&img, &columns[j - 1])?;
            if img.is_zero() {
                break;
            }
        }
        for (tt, cc) in img.terms {
            out.add_term(tt, &cc);
        }
    }
    Ok(out)
}

/// The dual isomorphism `∧^p k^n → ∧^{n-p} k^n`: each basis element goes to
/// its complement with the coefficient unchanged (no permutation sign).
pub fn dual_iso(w: &Multivector) -> Multivector {
    Multivector {
        field: w.field,
        n: w.n,
        p: w.n - w.p,
        terms: w
            .terms
            .iter()
            .map(|(t, c)| (t.complement(w.n), c.clone()))
            .collect(),
    }
}

/// A partial map between index sets, `source ∋ i ↦ images[i-1]`. `None`
/// sends `e_i` to zero, which covers coordinate projections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexMapping {
    source_dim: usize,
    target_dim: usize,
    images: Vec<Option<usize>>,
}

impl IndexMapping {
    pub fn new(source_dim: usize, target_dim: usize, images: Vec<Option<usize>>) -> Result<Self> {
        if images.len() != source_dim {
            return Err(Error::ShapeMismatch(format!(
                "{} images for source dimension {source_dim}",
                images.len()
            )));
        }
        for &j in images.iter().flatten() {
            check_index(j, target_dim)?;
        }
        Ok(IndexMapping {
            source_dim,
            target_dim,
            images,
        })
    }

    pub fn identity(n: usize) -> Self {
        IndexMapping {
            source_dim: n,
            target_dim: n,
            images: (1..=n).map(Some).collect(),
        }
    }

    /// `π_S` on `k^n`, keeping ambient labels: `e_i ↦ e_i` for `i ∈ S`, else 0.
    pub fn projection(support: &[usize], n: usize) -> Result<Self> {
        let mut images = vec![None; n];
        for &i in support {
            check_index(i, n)?;
            images[i - 1] = Some(i);
        }
        Ok(IndexMapping {
            source_dim: n,
            target_dim: n,
            images,
        })
    }

    /// `τ_{S*}`: `e_{ξ_i} ↦ e_i` for `S = {ξ_1 < … < ξ_s}`; indices outside
    /// `S` go to zero.
    pub fn relabel(support: &[usize], n: usize) -> Result<Self> {
        let mut sorted = support.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut images = vec![None; n];
        for (pos, &i) in sorted.iter().enumerate() {
            check_index(i, n)?;
            images[i - 1] = Some(pos + 1);
        }
        Ok(IndexMapping {
            source_dim: n,
            target_dim: sorted.len(),
            images,
        })
    }

    /// `e_i ↦ e_{f(i)}` for the listed pairs, identity on the rest of `1..=n`.
    pub fn fold(pairs: &[(usize, usize)], n: usize) -> Result<Self> {
        let mut m = Self::identity(n);
        for &(from, to) in pairs {
            check_index(from, n)?;
            check_index(to, n)?;
            m.images[from - 1] = Some(to);
        }
        Ok(m)
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn image(&self, i: usize) -> Option<usize> {
        self.images.get(i.wrapping_sub(1)).copied().flatten()
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &IndexMapping) -> Result<IndexMapping> {
        if first.target_dim != self.source_dim {
            return Err(Error::ShapeMismatch(format!(
                "composing maps into k^{} and out of k^{}",
                first.target_dim, self.source_dim
            )));
        }
        Ok(IndexMapping {
            source_dim: first.source_dim,
            target_dim: self.target_dim,
            images: first
                .images
                .iter()
                .map(|j| j.and_then(|j| self.images[j - 1]))
                .collect(),
        })
    }

    /// The 0/1 matrix of `f_*`.
    pub fn matrix(&self, field: FieldSpec) -> Matrix {
        let mut m = Matrix::zeros(field, self.target_dim, self.source_dim);
        for (i, j) in self.images.iter().enumerate() {
            if let Some(j) = j {
                m.set(j - 1, i, field.one());
            }
        }
        m
    }
}

/// `∧^p f_*` applied to `w`.
pub fn pushforward(f: &IndexMapping, w: &Multivector) -> Result<Multivector> {
    if f.source_dim != w.n {
        return Err(Error::ShapeMismatch(format!(
            "map from k^{} applied to ∧^{}k^{}",
            f.source_dim, w.p, w.n
        )));
    }
    induced_map(&f.matrix(w.field), w)
}

/// JSON form of a multivector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultivectorDoc {
    pub field: FieldSpec,
    pub n: usize,
    pub p: usize,
    pub terms: Vec<TermDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermDoc {
    pub idx: Vec<usize>,
    pub c: String,
}

impl MultivectorDoc {
    pub fn from_multivector(w: &Multivector) -> Self {
        MultivectorDoc {
            field: w.field,
            n: w.n,
            p: w.p,
            terms: w
                .terms
                .iter()
                .map(|(t, c)| TermDoc {
                    idx: t.0.clone(),
                    c: c.to_string(),
                })
                .collect(),
        }
    }

    /// Validates and loads. Each `idx` must be strictly increasing with
    /// length `p`, and no tuple may repeat.
    pub fn to_multivector(&self) -> Result<Multivector> {
        if self.p > self.n {
            return Err(Error::Format(format!("degree {} exceeds n = {}", self.p, self.n)));
        }
        let mut w = Multivector::zero(self.field, self.n, self.p);
        for term in &self.terms {
            if term.idx.len() != self.p {
                return Err(Error::Format(format!(
                    "index {:?} has length {}, expected {}",
                    term.idx,
                    term.idx.len(),
                    self.p
                )));
            }
            let t = IndexTuple::new(term.idx.clone(), self.n)
                .map_err(|e| Error::Format(e.to_string()))?;
            if w.terms.contains_key(&t) {
                return Err(Error::Format(format!("duplicate index {:?}", term.idx)));
            }
            let c = self.field.parse_scalar(&term.c)?;
            if !c.is_zero() {
                w.terms.insert(t, c);
            }
        }
        Ok(w)
    }
}

pub fn load_multivector(json: &str) -> Result<Multivector> {
    let doc: MultivectorDoc =
        serde_json::from_str(json).map_err(|e| Error::Format(e.to_string()))?;
    doc.to_multivector()
}

pub fn multivector_to_json(w: &Multivector) -> String {
    serde_json::to_string(&MultivectorDoc::from_multivector(w)).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q() -> FieldSpec {
        FieldSpec::Rational
    }

    fn e(n: usize, raw: &[usize]) -> Multivector {
        Multivector::basis(q(), n, raw).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let s = normalize_indices(&[1, 2, 3], 3).unwrap();
        assert_eq!(s.sign(), 1);
        assert_eq!(s.tuple().unwrap().indices(), &[1, 2, 3]);
        let s = normalize_indices(&[2, 1, 3], 3).unwrap();
        assert_eq!(s.sign(), -1);
        assert_eq!(s.tuple().unwrap().indices(), &[1, 2, 3]);
        assert_eq!(normalize_indices(&[2, 2, 3], 3).unwrap(), SignedTuple::Zero);
        assert_eq!(normalize_indices(&[3, 1, 3], 3).unwrap(), SignedTuple::Zero);
        assert!(matches!(
            normalize_indices(&[1, 5], 4),
            Err(Error::IndexOutOfRange { index: 5, n: 4 })
        ));
    }

    #[test]
    fn coefficient_examples() {
        let w = e(4, &[1, 2]);
        assert_eq!(w.coefficient(&[2, 1]).unwrap(), q().from_i64(-1));
        assert!(w.coefficient(&[1, 3]).unwrap().is_zero());
        let w = e(4, &[1, 2]).add(&e(4, &[3, 4])).unwrap();
        assert!(w.coefficient(&[3, 4]).unwrap().is_one());
        assert!(w.coefficient(&[3, 9]).is_err());
    }

    #[test]
    fn wedge_examples() {
        let e1 = e(4, &[1]);
        let e2 = e(4, &[2]);
        assert_eq!(wedge(&e1, &e2).unwrap(), e(4, &[1, 2]));
        assert_eq!(wedge(&e2, &e1).unwrap().coefficient(&[1, 2]).unwrap(), q().from_i64(-1));
        let s = e1.add(&e2).unwrap();
        assert!(wedge(&s, &s).unwrap().is_zero());
        let big = e(4, &[1, 2, 3]);
        assert!(matches!(wedge(&big, &e(4, &[1, 4])), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn induced_map_examples() {
        let w = e(4, &[1, 2]).add(&e(4, &[2, 4])).unwrap();
        assert_eq!(induced_map(&Matrix::identity(q(), 4), &w).unwrap(), w);

        let mut diag = Matrix::identity(q(), 4);
        diag.set(0, 0, q().from_i64(2));
        diag.set(1, 1, q().from_i64(3));
        let img = induced_map(&diag, &e(4, &[1, 2])).unwrap();
        assert_eq!(img, e(4, &[1, 2]).scale(&q().from_i64(6)));

        assert!(induced_map(&Matrix::identity(q(), 3), &w).is_err());
    }

    #[test]
    fn induced_map_of_decomposable_is_wedge_of_images() {
        let f = FieldSpec::prime(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let rand_vec = |rng: &mut ChaCha8Rng, k| -> Vec<Scalar> {
                (0..k).map(|_| f.random(rng, 0)).collect()
            };
            let v1 = rand_vec(&mut rng, 5);
            let v2 = rand_vec(&mut rng, 5);
            let rows: Vec<Vec<Scalar>> = (0..4).map(|_| rand_vec(&mut rng, 5)).collect();
            let l = Matrix::from_rows(f, rows).unwrap();
            let w = wedge(&Multivector::vector(f, &v1), &Multivector::vector(f, &v2)).unwrap();
            let lhs = induced_map(&l, &w).unwrap();
            let lv1 = Multivector::vector(f, &l.mul_vec(&v1).unwrap());
            let lv2 = Multivector::vector(f, &l.mul_vec(&v2).unwrap());
            assert_eq!(lhs, wedge(&lv1, &lv2).unwrap());
        }
    }

    #[test]
    fn induced_map_coordinates_are_minors() {
        let f = FieldSpec::prime(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<Scalar>> = (0..4)
            .map(|_| (0..5).map(|_| f.random(&mut rng, 0)).collect())
            .collect();
        let l = Matrix::from_rows(f, rows).unwrap();
        let w = Multivector::basis(f, 5, &[1, 3, 5]).unwrap();
        let img = induced_map(&l, &w).unwrap();
        for r in itertools::Itertools::combinations(1..=4usize, 3) {
            let rows0: Vec<usize> = r.iter().map(|i| i - 1).collect();
            let minor = l.select(&rows0, &[0, 2, 4]).determinant().unwrap();
            assert_eq!(img.coefficient(&r).unwrap(), minor);
        }
    }

    #[test]
    fn dual_examples() {
        assert_eq!(dual_iso(&e(4, &[1, 2])), e(4, &[3, 4]));
        assert_eq!(dual_iso(&e(4, &[1, 3])), e(4, &[2, 4]));
        let w = e(5, &[1, 2]).add(&e(5, &[2, 5]).scale(&q().from_i64(-3))).unwrap();
        assert_eq!(dual_iso(&dual_iso(&w)), w);
    }

    #[test]
    fn pushforward_examples() {
        let w = e(4, &[1, 3]).add(&e(4, &[2, 4])).unwrap();
        assert_eq!(pushforward(&IndexMapping::identity(4), &w).unwrap(), w);

        let pi = IndexMapping::projection(&[1, 2], 4).unwrap();
        assert!(pushforward(&pi, &e(4, &[1, 3])).unwrap().is_zero());

        let tau = IndexMapping::relabel(&[2, 5], 5).unwrap();
        assert_eq!(tau.image(2), Some(1));
        assert_eq!(tau.image(5), Some(2));
        assert_eq!(tau.image(3), None);
        let img = pushforward(&tau, &e(5, &[2, 5])).unwrap();
        assert_eq!(img, e(2, &[1, 2]));
    }

    #[test]
    fn json_load_errors() {
        let ok = r#"{"field":{"kind":"rational"},"n":4,"p":2,"terms":[{"idx":[1,2],"c":"1"},{"idx":[3,4],"c":"-2/3"}]}"#;
        let w = load_multivector(ok).unwrap();
        assert_eq!(w.num_terms(), 2);
        assert_eq!(load_multivector(&multivector_to_json(&w)).unwrap(), w);

        let dup = r#"{"field":{"kind":"rational"},"n":4,"p":2,"terms":[{"idx":[1,2],"c":"1"},{"idx":[1,2],"c":"1"}]}"#;
        assert!(load_multivector(dup).is_err());
        let unsorted = r#"{"field":{"kind":"rational"},"n":4,"p":2,"terms":[{"idx":[2,1],"c":"1"}]}"#;
        assert!(load_multivector(unsorted).is_err());
        let bad_field = r#"{"field":{"kind":"prime","q":4},"n":4,"p":2,"terms":[]}"#;
        assert!(load_multivector(bad_field).is_err());
    }

    fn multivector_strategy(n: usize, p: usize) -> impl Strategy<Value = Multivector> {
        proptest::collection::vec(
            (proptest::sample::subsequence((1..=n).collect::<Vec<_>>(), p), -3i64..=3),
            0..5,
        )
        .prop_map(move |terms| {
            let f = FieldSpec::Rational;
            Multivector::from_terms(f, n, p, terms.into_iter().map(|(i, c)| (i, f.from_i64(c))))
                .unwrap()
        })
    }

    fn matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(-2i64..=2, rows * cols).prop_map(move |v| {
            let grid: Vec<Vec<i64>> = v.chunks(cols).map(<[i64]>::to_vec).collect();
            Matrix::from_i64(FieldSpec::Rational, &grid)
        })
    }

    proptest! {
        #[test]
        fn wedge_anticommutes(a in multivector_strategy(6, 2), b in multivector_strategy(6, 3)) {
            let ab = wedge(&a, &b).unwrap();
            let ba = wedge(&b, &a).unwrap();
            // (-1)^{2·3} = +1
            prop_assert_eq!(&ab, &ba);
        }

        #[test]
        fn odd_wedge_anticommutes(a in multivector_strategy(6, 1), b in multivector_strategy(6, 3)) {
            let ab = wedge(&a, &b).unwrap();
            let ba = wedge(&b, &a).unwrap();
            prop_assert_eq!(ab, ba.scale(&FieldSpec::Rational.from_i64(-1)));
        }

        #[test]
        fn functoriality(w in multivector_strategy(5, 2), l1 in matrix_strategy(4, 5), l2 in matrix_strategy(3, 4)) {
            let composed = induced_map(&l2.mul(&l1).unwrap(), &w).unwrap();
            let stepwise = induced_map(&l2, &induced_map(&l1, &w).unwrap()).unwrap();
            prop_assert_eq!(composed, stepwise);
        }

        #[test]
        fn dual_is_involution(w in multivector_strategy(6, 2)) {
            prop_assert_eq!(dual_iso(&dual_iso(&w)), w);
        }
    }
}
