//! Quadratic relations on `∧^p k^n`: the classical Plücker generators, the
//! rank-6 family indexed by relation triples, their enumeration and counts,
//! and the expansion of a rank-6 relation into Plücker relations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{normalize_unchecked, IndexTuple, Multivector, SignedTuple};
use crate::matrix::{mat_rank, Matrix};
use crate::scalar::{FieldSpec, Scalar};

/// Linear form `Σ c_I Π_I` in the Plücker coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearForm {
    field: FieldSpec,
    terms: BTreeMap<IndexTuple, Scalar>,
}

impl LinearForm {
    pub fn zero(field: FieldSpec) -> Self {
        LinearForm {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IndexTuple, &Scalar)> {
        self.terms.iter()
    }

    pub fn add_tuple(&mut self, t: IndexTuple, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(t.clone()).or_insert_with(|| self.field.zero());
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&t);
        }
    }

    /// Adds `c · Π_{raw}`, normalizing `raw` by antisymmetry.
    pub fn add_raw(&mut self, raw: &[usize], c: &Scalar) {
        if let SignedTuple::Signed { negative, tuple } = normalize_unchecked(raw) {
            let c = if negative { -c } else { c.clone() };
            self.add_tuple(tuple, &c);
        }
    }

    pub fn evaluate(&self, w: &Multivector) -> Scalar {
        let mut acc = self.field.zero();
        for (t, c) in &self.terms {
            let v = w.get(t);
            if !v.is_zero() {
                acc += &(c * &v);
            }
        }
        acc
    }
}

/// Quadratic form `Σ c · Π_I Π_J` stored with `I ≤ J` and merged
/// coefficients, so equal polynomials have equal representations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticForm {
    field: FieldSpec,
    n: usize,
    p: usize,
    terms: BTreeMap<(IndexTuple, IndexTuple), Scalar>,
}

impl QuadraticForm {
    pub fn zero(field: FieldSpec, n: usize, p: usize) -> Self {
        QuadraticForm {
            field,
            n,
            p,
            terms: BTreeMap::new(),
        }
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

    pub fn terms(&self) -> impl Iterator<Item = (&IndexTuple, &IndexTuple, &Scalar)> {
        self.terms.iter().map(|((i, j), c)| (i, j, c))
    }

    fn add_monomial(&mut self, i: IndexTuple, j: IndexTuple, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let key = if i <= j { (i, j) } else { (j, i) };
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c.clone());
            }
        }
    }

    /// Adds `c · Π_{left} Π_{right}` for arbitrary index lists.
    pub fn add_raw_product(&mut self, c: &Scalar, left: &[usize], right: &[usize]) {
        let (SignedTuple::Signed { negative: nl, tuple: tl }, SignedTuple::Signed { negative: nr, tuple: tr }) =
            (normalize_unchecked(left), normalize_unchecked(right))
        else {
            return;
        };
        let c = if nl != nr { -c } else { c.clone() };
        self.add_monomial(tl, tr, &c);
    }

    /// Adds `c · a · b`.
    pub fn add_product(&mut self, c: &Scalar, a: &LinearForm, b: &LinearForm) {
        for (ta, ca) in &a.terms {
            for (tb, cb) in &b.terms {
                self.add_monomial(ta.clone(), tb.clone(), &(&(c * ca) * cb));
            }
        }
    }

    pub fn add(&self, other: &QuadraticForm) -> QuadraticForm {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &QuadraticForm) {
        for ((i, j), c) in &other.terms {
            self.add_monomial(i.clone(), j.clone(), c);
        }
    }

    pub fn scale(&self, c: &Scalar) -> QuadraticForm {
        let mut out = QuadraticForm::zero(self.field, self.n, self.p);
        if !c.is_zero() {
            out.terms = self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        }
        out
    }

    pub fn neg(&self) -> QuadraticForm {
        self.scale(&-self.field.one())
    }

    pub fn sub(&self, other: &QuadraticForm) -> QuadraticForm {
        self.add(&other.neg())
    }

    /// Coordinates `Π_I` that occur in some monomial.
    pub fn support(&self) -> BTreeSet<IndexTuple> {
        self.terms
            .keys()
            .flat_map(|(i, j)| [i.clone(), j.clone()])
            .collect()
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((i, j), c)| format!("({c}) P{i} P{j}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `Σ c · Π_I(w) Π_J(w)`.
pub fn evaluate_form(f: &QuadraticForm, w: &Multivector) -> Result<Scalar> {
    if f.field != w.field() {
        return Err(Error::FieldMismatch(f.field.to_string(), w.field().to_string()));
    }
    if f.n != w.n() || f.p != w.degree() {
        return Err(Error::ShapeMismatch(format!(
            "form on ∧^{}k^{} evaluated at an element of ∧^{}k^{}",
            f.p,
            f.n,
            w.degree(),
            w.n()
        )));
    }
    let mut acc = f.field.zero();
    for ((i, j), c) in &f.terms {
        let a = w.get(i);
        if a.is_zero() {
            continue;
        }
        let b = w.get(j);
        if !b.is_zero() {
            acc += &(&(c * &a) * &b);
        }
    }
    Ok(acc)
}

/// Rank of the symmetric coefficient matrix on the coordinates that occur.
/// Off-diagonal entries carry `c/2`, so characteristic 2 is rejected.
pub fn form_rank(f: &QuadraticForm) -> Result<usize> {
    let half = f.field.from_i64(2).inv().ok_or(Error::CharacteristicTwo)?;
    let coords: Vec<IndexTuple> = f.support().into_iter().collect();
    let pos: BTreeMap<&IndexTuple, usize> = coords.iter().enumerate().map(|(k, t)| (t, k)).collect();
    let mut m = Matrix::zeros(f.field, coords.len(), coords.len());
    for ((i, j), c) in &f.terms {
        let (a, b) = (pos[i], pos[j]);
        if a == b {
            m.set(a, a, c.clone());
        } else {
            let h = c * &half;
            m.set(a, b, h.clone());
            m.set(b, a, h);
        }
    }
    Ok(mat_rank(&m))
}

/// Index data `(A, B)` of a Plücker relation: `|A| = p-1`, `|B| = p+1`,
/// both increasing.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlueckerIndex {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl PlueckerIndex {
    pub fn new(a: Vec<usize>, b: Vec<usize>) -> Self {
        PlueckerIndex { a, b }
    }

    /// `p` implied by the index sizes.
    pub fn degree(&self) -> usize {
        self.a.len() + 1
    }

    /// Membership in the generating set: increasing lists of the right sizes,
    /// `A ⊄ B`, and when `A \ B = {a}` then `a < b` for all `b ∈ B \ A`.
    pub fn validate(&self, p: usize, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidIndexSet(msg));
        if p < 1 || self.a.len() + 1 != p || self.b.len() != p + 1 {
            return bad(format!("|A| = {}, |B| = {} for p = {p}", self.a.len(), self.b.len()));
        }
        IndexTuple::new(self.a.clone(), n).map_err(|e| Error::InvalidIndexSet(e.to_string()))?;
        IndexTuple::new(self.b.clone(), n).map_err(|e| Error::InvalidIndexSet(e.to_string()))?;
        let a_only: Vec<usize> = self.a.iter().copied().filter(|x| !self.b.contains(x)).collect();
        if a_only.is_empty() {
            return bad(format!("A = {:?} is contained in B = {:?}", self.a, self.b));
        }
        if let [single] = a_only[..] {
            if self.b.iter().any(|&x| !self.a.contains(&x) && x < single) {
                return bad(format!(
                    "A \\ B = {{{single}}} but B \\ A has a smaller element"
                ));
            }
        }
        Ok(())
    }

    /// `|B \ (A ∩ B)|`.
    pub fn outside_count(&self) -> usize {
        self.b.iter().filter(|x| !self.a.contains(x)).count()
    }
}

/// `Σ_i (-1)^{i-1} Π_{a_1…a_{p-1} b_i} Π_{b_1…b̂_i…b_{p+1}}` for arbitrary
/// (possibly unsorted) lists.
pub fn pluecker_form_raw(field: FieldSpec, n: usize, a: &[usize], b: &[usize]) -> Result<QuadraticForm> {
    let p = a.len() + 1;
    if b.len() != p + 1 {
        return Err(Error::InvalidIndexSet(format!(
            "|A| = {} needs |B| = {}, got {}",
            a.len(),
            p + 1,
            b.len()
        )));
    }
    if let Some(&bad) = a.iter().chain(b).find(|&&i| i == 0 || i > n) {
        return Err(Error::IndexOutOfRange { index: bad, n });
    }
    let mut f = QuadraticForm::zero(field, n, p);
    let one = field.one();
    let minus = -&one;
    let mut left = a.to_vec();
    left.push(0);
    for i in 0..b.len() {
        left[p - 1] = b[i];
        let right: Vec<usize> = b.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, &x)| x).collect();
        f.add_raw_product(if i % 2 == 0 { &one } else { &minus }, &left, &right);
    }
    Ok(f)
}

pub fn pluecker_form(field: FieldSpec, n: usize, idx: &PlueckerIndex) -> Result<QuadraticForm> {
    idx.validate(idx.degree(), n)?;
    pluecker_form_raw(field, n, &idx.a, &idx.b)
}

/// Members of the Plücker generating set in lexicographic `(A, B)` order.
/// Empty when `min(p, n-p) ≤ 1`.
pub fn enumerate_pluecker(p: usize, n: usize) -> impl Iterator<Item = PlueckerIndex> {
    let active = p >= 2 && n >= p + 2;
    let (ka, kb) = if active { (p - 1, p + 1) } else { (0, 0) };
    let a_sets: Box<dyn Iterator<Item = Vec<usize>>> = if active {
        Box::new((1..=n).combinations(ka))
    } else {
        Box::new(std::iter::empty())
    };
    a_sets.flat_map(move |a| {
        (1..=n).combinations(kb).filter_map(move |b| {
            let idx = PlueckerIndex::new(a.clone(), b);
            idx.validate(p, n).ok().map(|_| idx)
        })
    })
}

/// Index data `(𝒜, ℬ, 𝒞)` of a rank-6 relation. `a` holds four indices,
/// `b` the pairs `(β⁰, β¹)`, `c` the remaining `p - m - 2` indices. Raw
/// (unsorted, repeating) data is allowed; [`RelationTriple::check_ordering`]
/// tests the selection condition of the rank-6 set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationTriple {
    pub a: Vec<usize>,
    pub b: Vec<(usize, usize)>,
    pub c: Vec<usize>,
}

impl RelationTriple {
    pub fn new(a: Vec<usize>, b: Vec<(usize, usize)>, c: Vec<usize>) -> Self {
        RelationTriple { a, b, c }
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    /// Degree `p = m + 2 + |𝒞|` this triple belongs to.
    pub fn degree(&self) -> usize {
        self.b.len() + 2 + self.c.len()
    }

    pub fn all_indices(&self) -> Vec<usize> {
        let mut v = self.a.clone();
        for &(x, y) in &self.b {
            v.push(x);
            v.push(y);
        }
        v.extend_from_slice(&self.c);
        v
    }

    pub fn check_shape(&self, n: usize) -> Result<()> {
        if self.a.len() != 4 {
            return Err(Error::InvalidTriple(format!("𝒜 has {} elements, expected 4", self.a.len())));
        }
        if let Some(&bad) = self.all_indices().iter().find(|&&i| i == 0 || i > n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        Ok(())
    }

    pub fn check_distinct(&self, n: usize) -> Result<()> {
        self.check_shape(n)?;
        let all = self.all_indices();
        if all.iter().collect::<BTreeSet<_>>().len() != all.len() {
            return Err(Error::InvalidTriple(format!("repeated index in {self}")));
        }
        Ok(())
    }

    /// The selection condition: all indices distinct, `α` increasing,
    /// `β⁰_i < β¹_i`, both `β` rows increasing, `β⁰_i < α_1`, `β¹_i < α_3`,
    /// `γ` increasing.
    pub fn check_ordering(&self, n: usize) -> Result<()> {
        self.check_distinct(n)?;
        let fail = |what: &str| Err(Error::InvalidTriple(format!("{self}: {what}")));
        if self.a.windows(2).any(|w| w[0] >= w[1]) {
            return fail("𝒜 not increasing");
        }
        if self.c.windows(2).any(|w| w[0] >= w[1]) {
            return fail("𝒞 not increasing");
        }
        for (i, &(b0, b1)) in self.b.iter().enumerate() {
            if b0 >= b1 {
                return fail("β⁰ ≥ β¹ in a pair");
            }
            if b0 >= self.a[0] {
                return fail("β⁰ not below α₁");
            }
            if b1 >= self.a[2] {
                return fail("β¹ not below α₃");
            }
            if let Some(&(n0, n1)) = self.b.get(i + 1) {
                if b0 >= n0 || b1 >= n1 {
                    return fail("ℬ rows not increasing");
                }
            }
        }
        Ok(())
    }

    pub fn is_canonical(&self, n: usize) -> bool {
        self.check_ordering(n).is_ok()
    }

    /// `π_{ij}` with every pair expanded as a 2-term sum.
    pub fn pi_form(&self, field: FieldSpec, i: usize, j: usize) -> LinearForm {
        let m = self.b.len();
        let mut lf = LinearForm::zero(field);
        let one = field.one();
        let mut raw = Vec::with_capacity(self.degree());
        for choice in 0u32..(1 << m) {
            raw.clear();
            raw.push(self.a[i]);
            raw.push(self.a[j]);
            for (k, &(b0, b1)) in self.b.iter().enumerate() {
                raw.push(if choice & (1 << k) == 0 { b0 } else { b1 });
            }
            raw.extend_from_slice(&self.c);
            lf.add_raw(&raw, &one);
        }
        lf
    }
}

impl fmt::Display for RelationTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self.b.iter().map(|(x, y)| format!("({x},{y})")).collect();
        write!(f, "({:?}, [{}], {:?})", self.a, pairs.join(","), self.c)
    }
}

/// `π₁₂π₃₄ − π₁₃π₂₄ + π₁₄π₂₃` for the triple, as a form on `∧^p k^n`.
pub fn rank6_form(field: FieldSpec, n: usize, p: usize, t: &RelationTriple) -> Result<QuadraticForm> {
    t.check_shape(n)?;
    if t.b.len() + 2 > p || t.c.len() != p - t.b.len() - 2 {
        return Err(Error::InvalidTriple(format!(
            "|𝒞| = {} but p - m - 2 = {}",
            t.c.len(),
            p as i64 - t.b.len() as i64 - 2
        )));
    }
    let pi = |i, j| t.pi_form(field, i, j);
    let mut f = QuadraticForm::zero(field, n, p);
    let one = field.one();
    f.add_product(&one, &pi(0, 1), &pi(2, 3));
    f.add_product(&-&one, &pi(0, 2), &pi(1, 3));
    f.add_product(&one, &pi(0, 3), &pi(1, 2));
    Ok(f)
}

/// Largest `m` for `(p, n)`, i.e. `min(p, n-p) - 2`, or `None` when negative.
pub fn max_pairs(p: usize, n: usize) -> Option<usize> {
    if n < p {
        return None;
    }
    p.min(n - p).checked_sub(2)
}

/// All pair lists `ℬ` of length `m` compatible with `𝒜` under the ordering
/// condition, sorted lexicographically.
fn pair_lists(a: &[usize], m: usize, n: usize) -> Vec<Vec<(usize, usize)>> {
    let avail: Vec<usize> = (1..=n).filter(|x| !a.contains(x)).collect();
    let low: Vec<usize> = avail.iter().copied().filter(|&x| x < a[0]).collect();
    let mut out = Vec::new();
    for b0 in low.iter().copied().combinations(m) {
        let rest: Vec<usize> = avail
            .iter()
            .copied()
            .filter(|x| *x < a[2] && !b0.contains(x))
            .collect();
        for b1 in rest.into_iter().combinations(m) {
            if b0.iter().zip(&b1).all(|(x, y)| x < y) {
                out.push(b0.iter().copied().zip(b1).collect::<Vec<_>>());
            }
        }
    }
    out.sort();
    out
}

/// Triples of the rank-6 set for `(p, n)` in lexicographic `(m, 𝒜, ℬ, 𝒞)`
/// order.
pub fn enumerate_rank6(p: usize, n: usize) -> impl Iterator<Item = RelationTriple> {
    let ms = match max_pairs(p, n) {
        Some(mm) => 0..mm + 1,
        None => 0..0,
    };
    ms.flat_map(move |m| {
        (1..=n).combinations(4).flat_map(move |a| {
            pair_lists(&a, m, n).into_iter().flat_map(move |b| {
                let a = a.clone();
                let used: Vec<usize> = a.iter().copied().chain(b.iter().flat_map(|&(x, y)| [x, y])).collect();
                let rest: Vec<usize> = (1..=n).filter(|x| !used.contains(x)).collect();
                rest.into_iter()
                    .combinations(p - m - 2)
                    .map(move |c| RelationTriple::new(a.clone(), b.clone(), c))
            })
        })
    })
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn catalan(r: u64) -> u128 {
    binomial(2 * r, r) / (r as u128 + 1)
}

fn multinomial(parts: &[u64]) -> u128 {
    let mut remaining: u64 = parts.iter().sum();
    let mut acc = 1u128;
    for &k in parts {
        acc *= binomial(remaining, k);
        remaining -= k;
    }
    acc
}

/// Number of ordered pairs `(A, B)` with `|A| = p-1`, `|B| = p+1` and
/// `|A ∩ B| = p - m - 2`.
pub fn pair_count(p: u64, n: u64, m: u64) -> u128 {
    multinomial(&[m + 1, m + 3, p - m - 2, n - p - m - 2])
}

/// Closed-form size of the Plücker generating set.
pub fn count_pluecker(p: usize, n: usize) -> u128 {
    let Some(mm) = max_pairs(p, n) else { return 0 };
    let (p, n) = (p as u64, n as u64);
    let a0 = pair_count(p, n, 0);
    debug_assert_eq!(a0 % 4, 0);
    a0 / 4 + (1..=mm as u64).map(|m| pair_count(p, n, m)).sum::<u128>()
}

/// Closed-form size of the rank-6 set.
pub fn count_rank6(p: usize, n: usize) -> u128 {
    let Some(mm) = max_pairs(p, n) else { return 0 };
    let (p, n) = (p as u64, n as u64);
    (0..=mm as u64)
        .map(|m| {
            multinomial(&[2 * m + 4, p - m - 2, n - p - m - 2]) * (catalan(m + 2) - catalan(m + 1))
        })
        .sum()
}

/// One summand `coeff · P_{A,B}` of the Plücker expansion of a rank-6 form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionSummand {
    pub coeff: i64,
    #[serde(rename = "A")]
    pub a: Vec<usize>,
    #[serde(rename = "B")]
    pub b: Vec<usize>,
}

/// The `4^m` raw index pairs
/// `({β^μ…, γ…, α₁}, {α₂, α₃, α₄, β^ν…, γ…})`, identical pairs merged.
pub fn expand_rank6(t: &RelationTriple) -> Vec<ExpansionSummand> {
    let m = t.b.len();
    let pick = |choice: u32| -> Vec<usize> {
        t.b.iter()
            .enumerate()
            .map(|(k, &(b0, b1))| if choice & (1 << k) == 0 { b0 } else { b1 })
            .collect()
    };
    let mut out: Vec<ExpansionSummand> = Vec::new();
    for mu in 0u32..(1 << m) {
        for nu in 0u32..(1 << m) {
            let mut a = pick(mu);
            a.extend_from_slice(&t.c);
            a.push(t.a[0]);
            let mut b = vec![t.a[1], t.a[2], t.a[3]];
            b.extend(pick(nu));
            b.extend_from_slice(&t.c);
            match out.iter_mut().find(|s| s.a == a && s.b == b) {
                Some(s) => s.coeff += 1,
                None => out.push(ExpansionSummand { coeff: 1, a, b }),
            }
        }
    }
    out
}

/// `Σ coeff · P_{A,B}` over an expansion.
pub fn expansion_form(
    field: FieldSpec,
    n: usize,
    p: usize,
    summands: &[ExpansionSummand],
) -> Result<QuadraticForm> {
    let mut f = QuadraticForm::zero(field, n, p);
    for s in summands {
        let part = pluecker_form_raw(field, n, &s.a, &s.b)?;
        f.add_assign(&part.scale(&field.from_i64(s.coeff)));
    }
    Ok(f)
}

/// Left-hand side of the cyclic three-term linear relation among rank-6
/// forms:
/// `Σ_{i∈ℤ/3} P′(νᵢα, ℬ ∪ {(ν_{i+1}, ν_{i+2})}, 𝒞) − Σ_{i≠j} P′(νᵢα, ℬ, 𝒞 ∪ {ν_j})`.
pub fn threeterm_lhs(
    field: FieldSpec,
    n: usize,
    p: usize,
    nu: [usize; 3],
    alpha: [usize; 3],
    b: &[(usize, usize)],
    c: &[usize],
) -> Result<QuadraticForm> {
    let mut all: Vec<usize> = nu.iter().chain(&alpha).chain(c).copied().collect();
    all.extend(b.iter().flat_map(|&(x, y)| [x, y]));
    if let Some(&bad) = all.iter().find(|&&i| i == 0 || i > n) {
        return Err(Error::IndexOutOfRange { index: bad, n });
    }
    if all.iter().collect::<BTreeSet<_>>().len() != all.len() {
        return Err(Error::InvalidTriple(format!("three-term instance has a repeated index: {all:?}")));
    }
    let head = |i: usize| vec![nu[i], alpha[0], alpha[1], alpha[2]];
    let mut lhs = QuadraticForm::zero(field, n, p);
    for i in 0..3 {
        let mut bb = b.to_vec();
        bb.push((nu[(i + 1) % 3], nu[(i + 2) % 3]));
        let t = RelationTriple::new(head(i), bb, c.to_vec());
        lhs.add_assign(&rank6_form(field, n, p, &t)?);
    }
    for i in 0..3 {
        for j in (0..3).filter(|&j| j != i) {
            let mut cc = c.to_vec();
            cc.push(nu[j]);
            let t = RelationTriple::new(head(i), b.to_vec(), cc);
            lhs = lhs.sub(&rank6_form(field, n, p, &t)?);
        }
    }
    Ok(lhs)
}

/// Whether the three-term relation holds identically as a quadratic form.
pub fn threeterm_identity_check(
    field: FieldSpec,
    n: usize,
    p: usize,
    nu: [usize; 3],
    alpha: [usize; 3],
    b: &[(usize, usize)],
    c: &[usize],
) -> Result<bool> {
    Ok(threeterm_lhs(field, n, p, nu, alpha, b, c)?.is_zero())
}

/// A relation of either family.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Relation {
    Pluecker(PlueckerIndex),
    Rank6(RelationTriple),
}

impl Relation {
    pub fn form(&self, field: FieldSpec, n: usize, p: usize) -> Result<QuadraticForm> {
        match self {
            Relation::Pluecker(idx) => {
                idx.validate(p, n)?;
                pluecker_form_raw(field, n, &idx.a, &idx.b)
            }
            Relation::Rank6(t) => rank6_form(field, n, p, t),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Pluecker(idx) => write!(f, "P({:?}, {:?})", idx.a, idx.b),
            Relation::Rank6(t) => write!(f, "P'{t}"),
        }
    }
}

/// JSON form of a relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RelationDoc {
    Pluecker {
        #[serde(rename = "A")]
        a: Vec<usize>,
        #[serde(rename = "B")]
        b: Vec<usize>,
    },
    Rank6 {
        #[serde(rename = "A")]
        a: Vec<usize>,
        #[serde(rename = "B")]
        b: Vec<[usize; 2]>,
        #[serde(rename = "C")]
        c: Vec<usize>,
    },
}

impl From<&Relation> for RelationDoc {
    fn from(r: &Relation) -> Self {
        match r {
            Relation::Pluecker(idx) => RelationDoc::Pluecker {
                a: idx.a.clone(),
                b: idx.b.clone(),
            },
            Relation::Rank6(t) => RelationDoc::Rank6 {
                a: t.a.clone(),
                b: t.b.iter().map(|&(x, y)| [x, y]).collect(),
                c: t.c.clone(),
            },
        }
    }
}

impl From<&RelationDoc> for Relation {
    fn from(d: &RelationDoc) -> Self {
        match d {
            RelationDoc::Pluecker { a, b } => Relation::Pluecker(PlueckerIndex::new(a.clone(), b.clone())),
            RelationDoc::Rank6 { a, b, c } => Relation::Rank6(RelationTriple::new(
                a.clone(),
                b.iter().map(|&[x, y]| (x, y)).collect(),
                c.clone(),
            )),
        }
    }
}

impl RelationDoc {
    pub fn triple(t: &RelationTriple) -> Self {
        RelationDoc::from(&Relation::Rank6(t.clone()))
    }
}

/// JSON dump of a quadratic form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormDoc {
    pub terms: Vec<FormTermDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormTermDoc {
    pub c: String,
    #[serde(rename = "I")]
    pub i: Vec<usize>,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
}

impl FormDoc {
    pub fn from_form(f: &QuadraticForm) -> Self {
        FormDoc {
            terms: f
                .terms()
                .map(|(i, j, c)| FormTermDoc {
                    c: c.to_string(),
                    i: i.indices().to_vec(),
                    j: j.indices().to_vec(),
                })
                .collect(),
        }
    }

    pub fn to_form(&self, field: FieldSpec, n: usize, p: usize) -> Result<QuadraticForm> {
        let mut f = QuadraticForm::zero(field, n, p);
        for t in &self.terms {
            if t.i.len() != p || t.j.len() != p {
                return Err(Error::Format(format!("form term {:?} {:?} has wrong length", t.i, t.j)));
            }
            let i = IndexTuple::new(t.i.clone(), n)?;
            let j = IndexTuple::new(t.j.clone(), n)?;
            f.add_monomial(i, j, &field.parse_scalar(&t.c)?);
        }
        Ok(f)
    }
}

/// Precomputed forms of one relation family for fixed `(field, p, n)`.
#[derive(Clone, Debug)]
pub struct RelationSet {
    field: FieldSpec,
    n: usize,
    p: usize,
    entries: Vec<(Relation, QuadraticForm)>,
}

impl RelationSet {
    pub fn pluecker(field: FieldSpec, p: usize, n: usize) -> Self {
        let entries = enumerate_pluecker(p, n)
            .map(|idx| {
                let f = pluecker_form_raw(field, n, &idx.a, &idx.b).expect("enumerated index is valid");
                (Relation::Pluecker(idx), f)
            })
            .collect();
        RelationSet { field, n, p, entries }
    }

    pub fn rank6(field: FieldSpec, p: usize, n: usize) -> Self {
        let entries = enumerate_rank6(p, n)
            .map(|t| {
                let f = rank6_form(field, n, p, &t).expect("enumerated triple is valid");
                (Relation::Rank6(t), f)
            })
            .collect();
        RelationSet { field, n, p, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(Relation, QuadraticForm)] {
        &self.entries
    }

    fn check(&self, w: &Multivector) -> Result<()> {
        if w.field() != self.field || w.n() != self.n || w.degree() != self.p {
            return Err(Error::ShapeMismatch(format!(
                "relation set on ∧^{}k^{} over {} applied to ∧^{}k^{} over {}",
                self.p,
                self.n,
                self.field,
                w.degree(),
                w.n(),
                w.field()
            )));
        }
        Ok(())
    }

    /// First relation (in enumeration order) not vanishing at `w`.
    pub fn first_violation(&self, w: &Multivector) -> Result<Option<(&Relation, Scalar)>> {
        self.check(w)?;
        for (r, f) in &self.entries {
            let v = evaluate_form(f, w)?;
            if !v.is_zero() {
                return Ok(Some((r, v)));
            }
        }
        Ok(None)
    }

    pub fn violation_count(&self, w: &Multivector) -> Result<usize> {
        self.check(w)?;
        let mut count = 0;
        for (_, f) in &self.entries {
            if !evaluate_form(f, w)?.is_zero() {
                count += 1;
            }
        }
        Ok(count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldSpec {
        FieldSpec::Rational
    }

    fn klein_form(field: FieldSpec) -> QuadraticForm {
        let mut f = QuadraticForm::zero(field, 4, 2);
        let one = field.one();
        f.add_raw_product(&one, &[1, 2], &[3, 4]);
        f.add_raw_product(&-&one, &[1, 3], &[2, 4]);
        f.add_raw_product(&one, &[1, 4], &[2, 3]);
        f
    }

    fn mv(n: usize, p: usize, terms: &[(&[usize], i64)]) -> Multivector {
        let f = q();
        Multivector::from_terms(f, n, p, terms.iter().map(|(i, c)| (i.to_vec(), f.from_i64(*c)))).unwrap()
    }

    #[test]
    fn pluecker_form_examples() {
        let idx = PlueckerIndex::new(vec![1], vec![2, 3, 4]);
        assert_eq!(pluecker_form(q(), 4, &idx).unwrap(), klein_form(q()));

        // A={1,2}, B={3,4,5,6}: Π_{12b}Π_{B\b} for b = 3,4,5,6 with alternating signs
        let idx = PlueckerIndex::new(vec![1, 2], vec![3, 4, 5, 6]);
        let f = pluecker_form(q(), 6, &idx).unwrap();
        assert_eq!(f.num_terms(), 4);
        let expected: Vec<(Vec<usize>, Vec<usize>, i64)> = vec![
            (vec![1, 2, 3], vec![4, 5, 6], 1),
            (vec![1, 2, 4], vec![3, 5, 6], -1),
            (vec![1, 2, 5], vec![3, 4, 6], 1),
            (vec![1, 2, 6], vec![3, 4, 5], -1),
        ];
        let got: Vec<(Vec<usize>, Vec<usize>, i64)> = f
            .terms()
            .map(|(i, j, c)| {
                let c = if c.is_one() { 1 } else { -1 };
                (i.indices().to_vec(), j.indices().to_vec(), c)
            })
            .collect();
        assert_eq!(got, expected);

        let w = mv(6, 3, &[(&[1, 2, 3], 1)]);
        for idx in enumerate_pluecker(3, 6) {
            let f = pluecker_form(q(), 6, &idx).unwrap();
            assert!(evaluate_form(&f, &w).unwrap().is_zero());
        }
    }

    #[test]
    fn pluecker_membership() {
        assert!(PlueckerIndex::new(vec![2], vec![1, 3, 4]).validate(2, 4).is_err());
        assert!(PlueckerIndex::new(vec![1, 2], vec![1, 2, 3, 4]).validate(3, 4).is_err());
        assert!(PlueckerIndex::new(vec![1], vec![2, 3, 4]).validate(2, 4).is_ok());
        assert!(PlueckerIndex::new(vec![1], vec![2, 3]).validate(2, 4).is_err());
    }

    #[test]
    fn enumerate_pluecker_examples() {
        let all: Vec<_> = enumerate_pluecker(2, 4).collect();
        assert_eq!(all, vec![PlueckerIndex::new(vec![1], vec![2, 3, 4])]);
        assert_eq!(enumerate_pluecker(1, 5).count(), 0);
        assert_eq!(enumerate_pluecker(4, 5).count(), 0);
        assert_eq!(enumerate_pluecker(3, 6).count(), 45);
        let v: Vec<_> = enumerate_pluecker(3, 7).collect();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rank6_form_examples() {
        let t = RelationTriple::new(vec![1, 2, 3, 4], vec![], vec![]);
        assert_eq!(rank6_form(q(), 4, 2, &t).unwrap(), klein_form(q()));

        let t = RelationTriple::new(vec![2, 4, 5, 6], vec![(1, 3)], vec![]);
        let pi12 = t.pi_form(q(), 0, 1);
        let mut expected = LinearForm::zero(q());
        expected.add_raw(&[2, 4, 1], &q().one());
        expected.add_raw(&[2, 4, 3], &q().one());
        assert_eq!(pi12, expected);
        // 3 products of 2-term sums: 12 monomials, none cancelling here
        let f = rank6_form(q(), 6, 3, &t).unwrap();
        assert_eq!(f.num_terms(), 12);

        let bad = RelationTriple::new(vec![1, 2, 3, 4], vec![], vec![5]);
        assert!(matches!(rank6_form(q(), 6, 2, &bad), Err(Error::InvalidTriple(_))));
    }

    #[test]
    fn enumerate_rank6_examples() {
        let all: Vec<_> = enumerate_rank6(2, 4).collect();
        assert_eq!(all, vec![RelationTriple::new(vec![1, 2, 3, 4], vec![], vec![])]);
        let v: Vec<_> = enumerate_rank6(3, 6).collect();
        assert_eq!(v.len(), 33);
        assert_eq!(v.iter().filter(|t| t.m() == 0).count(), 30);
        assert_eq!(v.iter().filter(|t| t.m() == 1).count(), 3);
        assert!(v.iter().all(|t| t.is_canonical(6)));
        assert_eq!(enumerate_rank6(2, 5).count(), 5);
    }

    #[test]
    fn counts() {
        assert_eq!(count_pluecker(2, 4), 1);
        assert_eq!(count_rank6(2, 4), 1);
        assert_eq!(count_pluecker(3, 6), 45);
        assert_eq!(count_rank6(3, 6), 33);
        assert_eq!(count_rank6(2, 5), 5);
        assert_eq!(count_pluecker(1, 5), 0);
        assert_eq!(count_rank6(5, 6), 0);
        assert_eq!(catalan(3), 5);
        assert_eq!(catalan(4), 14);
    }

    #[test]
    fn evaluate_examples() {
        let w = mv(4, 2, &[(&[1, 2], 1), (&[3, 4], 1)]);
        assert!(evaluate_form(&klein_form(q()), &w).unwrap().is_one());
        assert!(evaluate_form(&klein_form(q()), &Multivector::zero(q(), 4, 2)).unwrap().is_zero());
        // (e1+e3)^(e2+e4) = e12 + e14 - e23 + e34
        let w = mv(4, 2, &[(&[1, 2], 1), (&[1, 4], 1), (&[2, 3], -1), (&[3, 4], 1)]);
        assert!(evaluate_form(&klein_form(q()), &w).unwrap().is_zero());
        assert!(evaluate_form(&klein_form(q()), &mv(5, 2, &[])).is_err());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(form_rank(&klein_form(q())).unwrap(), 6);
        let idx = PlueckerIndex::new(vec![1, 2], vec![3, 4, 5, 6]);
        assert_eq!(form_rank(&pluecker_form(q(), 7, &idx).unwrap()).unwrap(), 8);
        for t in enumerate_rank6(3, 6) {
            assert_eq!(form_rank(&rank6_form(q(), 6, 3, &t).unwrap()).unwrap(), 6);
        }
    }

    #[test]
    fn expansion_examples() {
        let t = RelationTriple::new(vec![1, 2, 3, 4], vec![], vec![5]);
        let e = expand_rank6(&t);
        assert_eq!(
            e,
            vec![ExpansionSummand {
                coeff: 1,
                a: vec![5, 1],
                b: vec![2, 3, 4, 5]
            }]
        );
        let t = RelationTriple::new(vec![2, 4, 5, 6], vec![(1, 3)], vec![]);
        assert_eq!(expand_rank6(&t).len(), 4);
        for t in enumerate_rank6(3, 6) {
            let lhs = expansion_form(q(), 6, 3, &expand_rank6(&t)).unwrap();
            assert_eq!(lhs, rank6_form(q(), 6, 3, &t).unwrap(), "{t}");
        }
    }

    #[test]
    fn relation_doc_json() {
        let r = Relation::Rank6(RelationTriple::new(vec![3, 4, 5, 6], vec![(1, 2)], vec![]));
        let json = serde_json::to_string(&RelationDoc::from(&r)).unwrap();
        assert_eq!(json, r#"{"kind":"rank6","A":[3,4,5,6],"B":[[1,2]],"C":[]}"#);
        let back: RelationDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(Relation::from(&back), r);
        let r = Relation::Pluecker(PlueckerIndex::new(vec![1], vec![2, 3, 4]));
        let json = serde_json::to_string(&RelationDoc::from(&r)).unwrap();
        assert_eq!(json, r#"{"kind":"pluecker","A":[1],"B":[2,3,4]}"#);
    }

    #[test]
    fn form_doc_round_trip() {
        let f = klein_form(q());
        let doc = FormDoc::from_form(&f);
        assert_eq!(doc.to_form(q(), 4, 2).unwrap(), f);
        assert_eq!(doc.terms[0].i, vec![1, 2]);
    }
}
