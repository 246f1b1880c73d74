//! Sparse multivariate polynomials with exact coefficients.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{FieldSpec, Scalar};

/// Dense exponent vector. Ordered graded-lexicographically: total degree
/// first, then lexicographic with `x1` most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(num_vars: usize) -> Self {
        Monomial(vec![0; num_vars])
    }

    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial in `num_vars` variables. No zero coefficient is ever stored, so
/// the zero polynomial is the empty map and equal polynomials compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    field: FieldSpec,
    num_vars: usize,
    terms: BTreeMap<Monomial, Scalar>,
}

impl MultiPoly {
    pub fn zero(field: FieldSpec, num_vars: usize) -> Self {
        MultiPoly {
            field,
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: FieldSpec, num_vars: usize, c: Scalar) -> Self {
        Self::term(field, num_vars, Monomial::one(num_vars), c)
    }

    pub fn one(field: FieldSpec, num_vars: usize) -> Self {
        Self::constant(field, num_vars, field.one())
    }

    /// The variable `x_{var+1}` (0-based index).
    pub fn var(field: FieldSpec, num_vars: usize, var: usize) -> Self {
        Self::var_pow(field, num_vars, var, 1)
    }

    pub fn var_pow(field: FieldSpec, num_vars: usize, var: usize, exp: u32) -> Self {
        let mut e = vec![0; num_vars];
        e[var] = exp;
        Self::term(field, num_vars, Monomial(e), field.one())
    }

    pub fn term(field: FieldSpec, num_vars: usize, m: Monomial, c: Scalar) -> Self {
        assert_eq!(m.0.len(), num_vars, "monomial length");
        let mut p = Self::zero(field, num_vars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// Builds from `(exponents, coefficient)` pairs, merging duplicates.
    pub fn from_terms(
        field: FieldSpec,
        num_vars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Scalar)>,
    ) -> Result<Self> {
        let mut p = Self::zero(field, num_vars);
        for (e, c) in terms {
            if e.len() != num_vars {
                return Err(Error::ShapeMismatch(format!(
                    "exponent vector of length {} in {num_vars} variables",
                    e.len()
                )));
            }
            if c.field() != field {
                return Err(Error::FieldMismatch(field.to_string(), c.field().to_string()));
            }
            p.add_term(Monomial(e), &c);
        }
        Ok(p)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Scalar)> {
        self.terms.iter().next_back()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    fn add_term(&mut self, m: Monomial, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    fn check_compatible(&self, other: &MultiPoly) {
        assert_eq!(self.num_vars, other.num_vars, "polynomials in different rings");
        assert_eq!(self.field, other.field, "polynomials over different fields");
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        self.check_compatible(other);
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &MultiPoly) {
        self.check_compatible(other);
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c);
        }
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            field: self.field,
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(self.field, self.num_vars);
        }
        MultiPoly {
            field: self.field,
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    /// Adds `c * other` in place.
    pub fn add_scaled(&mut self, other: &MultiPoly, c: &Scalar) {
        self.check_compatible(other);
        if c.is_zero() {
            return;
        }
        for (m, v) in &other.terms {
            self.add_term(m.clone(), &(v * c));
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        self.check_compatible(other);
        let mut acc: HashMap<Monomial, Scalar> =
            HashMap::with_capacity(self.terms.len() * other.terms.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let prod = ca * cb;
                match acc.entry(ma.mul(mb)) {
                    std::collections::hash_map::Entry::Occupied(mut e) => *e.get_mut() += &prod,
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(prod);
                    }
                }
            }
        }
        MultiPoly {
            field: self.field,
            num_vars: self.num_vars,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut acc = Self::one(self.field, self.num_vars);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval(&self, point: &[Scalar]) -> Result<Scalar> {
        if point.len() != self.num_vars {
            return Err(Error::ShapeMismatch(format!(
                "point of length {} for {} variables",
                point.len(),
                self.num_vars
            )));
        }
        let mut acc = self.field.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t = &t * &x.pow(e as u64);
                }
            }
            acc += &t;
        }
        Ok(acc)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let vars: Vec<String> = m
                .0
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, e)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "({c})*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Determinant of a square matrix of polynomials by Laplace expansion along
/// rows, memoized on the set of remaining columns.
pub fn poly_determinant(entries: &[Vec<MultiPoly>]) -> Result<MultiPoly> {
    let k = entries.len();
    if entries.iter().any(|r| r.len() != k) {
        return Err(Error::ShapeMismatch("polynomial determinant of non-square matrix".into()));
    }
    if k == 0 {
        return Err(Error::ShapeMismatch("empty polynomial matrix".into()));
    }
    if k > 16 {
        return Err(Error::ShapeMismatch(format!("{k}x{k} polynomial determinant too large")));
    }
    let field = entries[0][0].field();
    let nv = entries[0][0].num_vars();
    // memo[mask] = determinant of rows (k - popcount(mask))..k on columns in mask
    let mut memo: HashMap<u32, MultiPoly> = HashMap::new();
    memo.insert(0, MultiPoly::one(field, nv));
    for size in 1..=k {
        let row = k - size;
        for mask in masks_of_size(k, size) {
            let mut acc = MultiPoly::zero(field, nv);
            let mut sign_neg = false;
            for col in 0..k {
                if mask & (1 << col) == 0 {
                    continue;
                }
                let entry = &entries[row][col];
                if !entry.is_zero() {
                    let minor = &memo[&(mask & !(1 << col))];
                    if !minor.is_zero() {
                        let term = entry.mul(minor);
                        if sign_neg {
                            acc = acc.sub(&term);
                        } else {
                            acc.add_assign(&term);
                        }
                    }
                }
                sign_neg = !sign_neg;
            }
            memo.insert(mask, acc);
        }
    }
    Ok(memo.remove(&((1u32 << k) - 1)).expect("full mask computed"))
}

fn masks_of_size(k: usize, size: usize) -> impl Iterator<Item = u32> {
    (0u32..(1 << k)).filter(move |m| m.count_ones() as usize == size)
}

/// JSON form: `{"vars": N, "terms": [{"e": [...], "c": "..."}]}`, terms in
/// ascending graded-lex order. The field is supplied by the caller.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiPolyDoc {
    pub vars: usize,
    pub terms: Vec<PolyTermDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyTermDoc {
    pub e: Vec<u32>,
    pub c: String,
}

impl MultiPolyDoc {
    pub fn from_poly(p: &MultiPoly) -> Self {
        MultiPolyDoc {
            vars: p.num_vars(),
            terms: p
                .terms()
                .map(|(m, c)| PolyTermDoc {
                    e: m.exponents().to_vec(),
                    c: c.to_string(),
                })
                .collect(),
        }
    }

    pub fn to_poly(&self, field: FieldSpec) -> Result<MultiPoly> {
        let mut seen = std::collections::HashSet::new();
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if !seen.insert(t.e.clone()) {
                return Err(Error::Format(format!("duplicate exponent vector {:?}", t.e)));
            }
            terms.push((t.e.clone(), field.parse_scalar(&t.c)?));
        }
        MultiPoly::from_terms(field, self.vars, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q() -> FieldSpec {
        FieldSpec::Rational
    }

    fn x(i: usize) -> MultiPoly {
        MultiPoly::var(q(), 2, i)
    }

    #[test]
    fn mul_examples() {
        let x1x2 = x(0).mul(&x(1));
        assert_eq!(x1x2.num_terms(), 1);
        assert_eq!(
            x1x2.coefficient(&Monomial::new(vec![1, 1])),
            q().one()
        );

        let diff = x(0).sub(&x(1)).mul(&x(0).add(&x(1)));
        let expected = x(0).pow(2).sub(&x(1).pow(2));
        assert_eq!(diff, expected);

        assert!(x1x2.mul(&MultiPoly::zero(q(), 2)).is_zero());
    }

    #[test]
    fn eval_examples() {
        let f = q();
        let x1x2 = x(0).mul(&x(1));
        assert_eq!(x1x2.eval(&[f.from_i64(2), f.from_i64(3)]).unwrap(), f.from_i64(6));
        assert!(MultiPoly::zero(f, 2).eval(&[f.from_i64(7), f.from_i64(1)]).unwrap().is_zero());
        let sq = x(0).pow(2).sub(&x(1).pow(2));
        assert!(sq.eval(&[f.from_i64(5), f.from_i64(5)]).unwrap().is_zero());
        assert!(sq.eval(&[f.from_i64(5)]).is_err());
    }

    #[test]
    fn graded_lex_order() {
        let a = Monomial::new(vec![2, 0]);
        let b = Monomial::new(vec![0, 3]);
        let c = Monomial::new(vec![1, 1]);
        assert!(a < b);
        assert!(c < a);
        let p = x(0).pow(2).add(&x(1).pow(3)).add(&x(0).mul(&x(1)));
        let order: Vec<_> = p.terms().map(|(m, _)| m.exponents().to_vec()).collect();
        assert_eq!(order, vec![vec![1, 1], vec![2, 0], vec![0, 3]]);
        assert_eq!(p.total_degree(), Some(3));
    }

    #[test]
    fn vandermonde_determinant() {
        // det [x_i^{j-1}] for 3 variables against the product of differences
        let f = q();
        let entries: Vec<Vec<MultiPoly>> = (0..3)
            .map(|i| (0..3).map(|j| MultiPoly::var_pow(f, 3, i, j as u32)).collect())
            .collect();
        let det = poly_determinant(&entries).unwrap();
        let v = |i| MultiPoly::var(f, 3, i);
        let expected = v(1).sub(&v(0)).mul(&v(2).sub(&v(0))).mul(&v(2).sub(&v(1)));
        assert_eq!(det, expected);
    }

    #[test]
    fn doc_round_trip() {
        let p = x(0).pow(2).sub(&x(1).scale(&q().parse_scalar("3/2").unwrap()));
        let doc = MultiPolyDoc::from_poly(&p);
        let json = serde_json::to_string(&doc).unwrap();
        let back: MultiPolyDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_poly(q()).unwrap(), p);
    }

    fn poly_strategy() -> impl Strategy<Value = MultiPoly> {
        proptest::collection::vec((proptest::collection::vec(0u32..3, 3), -3i64..=3), 0..5)
            .prop_map(|terms| {
                let f = FieldSpec::Rational;
                MultiPoly::from_terms(f, 3, terms.into_iter().map(|(e, c)| (e, f.from_i64(c))))
                    .unwrap()
            })
    }

    proptest! {
        #[test]
        fn ring_laws(a in poly_strategy(), b in poly_strategy(), c in poly_strategy(),
                     pt in proptest::collection::vec(-4i64..=4, 3)) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            let f = FieldSpec::Rational;
            let pt: Vec<Scalar> = pt.into_iter().map(|v| f.from_i64(v)).collect();
            prop_assert_eq!(a.mul(&b).eval(&pt).unwrap(), &a.eval(&pt).unwrap() * &b.eval(&pt).unwrap());
            prop_assert!(a.mul(&b).terms().all(|(_, c)| !c.is_zero()));
        }
    }
}
