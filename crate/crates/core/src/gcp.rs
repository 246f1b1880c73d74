//! The maps `X: k^n → k^{p+2}`, `Z: k^{p+2} → k^4` attached to a relation
//! triple, and `G = ∧²Z ∘ δ ∘ ∧^p X` from `∧^p k^n` to `∧² k^4`.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{dual_iso, induced_map, IndexMapping, IndexTuple, Multivector};
use crate::matrix::Matrix;
use crate::relations::{rank6_form, LinearForm, QuadraticForm, RelationDoc, RelationTriple};
use crate::scalar::{FieldSpec, Scalar};

/// `S' = 𝒜 ∪ B₁ ∪ 𝒞` in increasing order.
pub fn target_support(t: &RelationTriple) -> Vec<usize> {
    let mut s: Vec<usize> = t
        .a
        .iter()
        .copied()
        .chain(t.b.iter().map(|&(_, b1)| b1))
        .chain(t.c.iter().copied())
        .collect();
    s.sort_unstable();
    s
}

/// `X` as an index mapping: `ξ_j ↦ j`, `β⁰_l ↦ position of β¹_l`, all
/// other indices to zero. Only distinctness of the triple is required.
pub fn x_mapping(t: &RelationTriple, n: usize) -> Result<IndexMapping> {
    t.check_distinct(n)?;
    let support = target_support(t);
    let mut images = vec![None; n];
    for (pos, &xi) in support.iter().enumerate() {
        images[xi - 1] = Some(pos + 1);
    }
    for &(b0, b1) in &t.b {
        images[b0 - 1] = images[b1 - 1];
    }
    IndexMapping::new(n, support.len(), images)
}

pub fn build_x(field: FieldSpec, t: &RelationTriple, n: usize) -> Result<Matrix> {
    t.check_ordering(n)?;
    Ok(x_mapping(t, n)?.matrix(field))
}

/// `Z(e_i) = e_j` when `e_i = X e_{α_j}`, zero otherwise.
pub fn build_z(t: &RelationTriple, x: &Matrix) -> Result<Matrix> {
    let mut z = Matrix::zeros(x.field(), 4, x.rows());
    for (j, &alpha) in t.a.iter().enumerate() {
        if alpha == 0 || alpha > x.cols() {
            return Err(Error::IndexOutOfRange { index: alpha, n: x.cols() });
        }
        let col = x.column(alpha - 1);
        let hits: Vec<usize> = col.iter().positions(|s| !s.is_zero()).collect();
        match hits[..] {
            [r] if col[r].is_one() => z.set(j, r, x.field().one()),
            _ => {
                return Err(Error::InvalidTriple(format!(
                    "X e_{alpha} is not a standard basis vector"
                )))
            }
        }
    }
    Ok(z)
}

/// `G` for one triple, with `X` and `Z` cached.
#[derive(Clone, Debug)]
pub struct GcpMap {
    triple: RelationTriple,
    field: FieldSpec,
    n: usize,
    p: usize,
    x: Matrix,
    z: Matrix,
}

impl GcpMap {
    pub fn new(field: FieldSpec, t: &RelationTriple, n: usize) -> Result<Self> {
        let x = build_x(field, t, n)?;
        let z = build_z(t, &x)?;
        Ok(GcpMap {
            triple: t.clone(),
            field,
            n,
            p: t.degree(),
            x,
            z,
        })
    }

    pub fn triple(&self) -> &RelationTriple {
        &self.triple
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

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn z(&self) -> &Matrix {
        &self.z
    }
}

/// `∧²Z (δ (∧^p X w))`.
pub fn apply_gcp(g: &GcpMap, w: &Multivector) -> Result<Multivector> {
    if w.field() != g.field {
        return Err(Error::FieldMismatch(g.field.to_string(), w.field().to_string()));
    }
    if w.n() != g.n || w.degree() != g.p {
        return Err(Error::ShapeMismatch(format!(
            "G is defined on ∧^{}k^{}, got ∧^{}k^{}",
            g.p,
            g.n,
            w.degree(),
            w.n()
        )));
    }
    let image = induced_map(&g.x, w)?;
    induced_map(&g.z, &dual_iso(&image))
}

/// `Π₁₂Π₃₄ − Π₁₃Π₂₄ + Π₁₄Π₂₃` on `∧² k^4`.
pub fn klein_value(w: &Multivector) -> Result<Scalar> {
    if w.n() != 4 || w.degree() != 2 {
        return Err(Error::ShapeMismatch(format!(
            "the three-term relation lives on ∧²k^4, got ∧^{}k^{}",
            w.degree(),
            w.n()
        )));
    }
    let c = |i: usize, j: usize| w.get(&IndexTuple::new(vec![i, j], 4).expect("valid pair"));
    Ok(&(&(&c(1, 2) * &c(3, 4)) - &(&c(1, 3) * &c(2, 4))) + &(&c(1, 4) * &c(2, 3)))
}

/// The Klein quadric relation composed with `G`, as a quadratic form in the
/// coordinates of `∧^p k^n`, assembled from the images of all basis elements.
pub fn pullback_form(g: &GcpMap) -> Result<QuadraticForm> {
    let field = g.field;
    let pairs = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];
    let mut hat: Vec<LinearForm> = vec![LinearForm::zero(field); 6];
    for j in (1..=g.n).combinations(g.p) {
        let img = apply_gcp(g, &Multivector::basis(field, g.n, &j)?)?;
        let source = IndexTuple::new(j, g.n)?;
        for (t, c) in img.terms() {
            let k = pairs
                .iter()
                .position(|&(a, b)| t.indices() == [a, b])
                .expect("index pair in ∧²k^4");
            hat[k].add_tuple(source.clone(), c);
        }
    }
    let one = field.one();
    let mut f = QuadraticForm::zero(field, g.n, g.p);
    f.add_product(&one, &hat[0], &hat[5]);
    f.add_product(&-&one, &hat[1], &hat[4]);
    f.add_product(&one, &hat[2], &hat[3]);
    Ok(f)
}

/// Sign `s` with `K ∘ G = s · P′` as canonical forms, `K` the Klein quadric
/// relation.
pub fn pullback_check(field: FieldSpec, t: &RelationTriple, n: usize) -> Result<i8> {
    let g = GcpMap::new(field, t, n)?;
    let pulled = pullback_form(&g)?;
    let target = rank6_form(field, n, g.p, t)?;
    if pulled == target {
        Ok(1)
    } else if pulled == target.neg() {
        Ok(-1)
    } else {
        Err(Error::PullbackMismatch(t.to_string()))
    }
}

/// JSON dump of `X`, `Z` and the pullback sign.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcpDoc {
    pub triple: RelationDoc,
    pub n: usize,
    pub p: usize,
    #[serde(rename = "X")]
    pub x: Vec<Vec<u8>>,
    #[serde(rename = "Z")]
    pub z: Vec<Vec<u8>>,
    pub sign: i8,
}

fn grid(m: &Matrix) -> Vec<Vec<u8>> {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(|s| u8::from(!s.is_zero())).collect())
        .collect()
}

impl GcpDoc {
    pub fn build(field: FieldSpec, t: &RelationTriple, n: usize) -> Result<Self> {
        let g = GcpMap::new(field, t, n)?;
        let sign = pullback_check(field, t, n)?;
        Ok(GcpDoc {
            triple: RelationDoc::triple(t),
            n,
            p: g.p,
            x: grid(&g.x),
            z: grid(&g.z),
            sign,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::{pushforward, wedge};
    use crate::matrix::mat_rank;
    use crate::relations::{enumerate_rank6, evaluate_form};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q() -> FieldSpec {
        FieldSpec::Rational
    }

    fn images(m: &Matrix) -> Vec<Option<usize>> {
        (0..m.cols())
            .map(|c| (0..m.rows()).find(|&r| !m.get(r, c).is_zero()).map(|r| r + 1))
            .collect()
    }

    fn random_mv(field: FieldSpec, n: usize, p: usize, rng: &mut ChaCha8Rng) -> Multivector {
        Multivector::from_terms(
            field,
            n,
            p,
            (1..=n).combinations(p).map(|j| (j, field.random(rng, 3))).collect::<Vec<_>>(),
        )
        .unwrap()
    }

    fn random_decomposable(field: FieldSpec, n: usize, p: usize, rng: &mut ChaCha8Rng) -> Multivector {
        let mut w = Multivector::zero(field, n, 0);
        w.add_raw(&[], &field.one()).unwrap();
        for _ in 0..p {
            let v: Vec<Scalar> = (0..n).map(|_| field.random(rng, 3)).collect();
            w = wedge(&w, &Multivector::vector(field, &v)).unwrap();
        }
        w
    }

    #[test]
    fn x_and_z_examples() {
        let t = RelationTriple::new(vec![2, 4, 5, 6], vec![(1, 3)], vec![]);
        let x = build_x(q(), &t, 6).unwrap();
        assert_eq!(x.rows(), 5);
        assert_eq!(images(&x), vec![Some(2), Some(1), Some(2), Some(3), Some(4), Some(5)]);
        let z = build_z(&t, &x).unwrap();
        assert_eq!(
            images(&z),
            vec![Some(1), None, Some(2), Some(3), Some(4)]
        );
        assert_eq!(mat_rank(&x), 5);

        let t = RelationTriple::new(vec![1, 2, 3, 4], vec![], vec![]);
        let x = build_x(q(), &t, 4).unwrap();
        assert_eq!(x, Matrix::identity(q(), 4));
        assert_eq!(build_z(&t, &x).unwrap(), Matrix::identity(q(), 4));

        let t = RelationTriple::new(vec![1, 3, 5, 6], vec![], vec![2]);
        let x = build_x(q(), &t, 7).unwrap();
        assert_eq!(images(&x), vec![Some(1), Some(2), Some(3), None, Some(4), Some(5), None]);

        let bad = RelationTriple::new(vec![1, 2, 3, 4], vec![(5, 6)], vec![]);
        assert!(build_x(q(), &bad, 6).is_err());
    }

    #[test]
    fn z_inverts_x_on_alpha() {
        for t in enumerate_rank6(3, 7) {
            let g = GcpMap::new(q(), &t, 7).unwrap();
            let zx = g.z().mul(g.x()).unwrap();
            for (j, &alpha) in t.a.iter().enumerate() {
                let col = zx.column(alpha - 1);
                for (r, s) in col.iter().enumerate() {
                    assert_eq!(s.is_one(), r == j);
                    assert!(s.is_zero() || s.is_one());
                }
            }
            assert_eq!(mat_rank(g.x()), t.degree() + 2);
        }
    }

    #[test]
    fn apply_examples() {
        let t = RelationTriple::new(vec![1, 2, 3, 4], vec![], vec![]);
        let g = GcpMap::new(q(), &t, 4).unwrap();
        let e12 = Multivector::basis(q(), 4, &[1, 2]).unwrap();
        assert_eq!(apply_gcp(&g, &e12).unwrap(), Multivector::basis(q(), 4, &[3, 4]).unwrap());
        let w = e12.add(&Multivector::basis(q(), 4, &[3, 4]).unwrap()).unwrap();
        let img = apply_gcp(&g, &w).unwrap();
        assert_eq!(img, w);
        assert!(klein_value(&img).unwrap().is_one());
        assert!(apply_gcp(&g, &Multivector::zero(q(), 5, 2)).is_err());
    }

    #[test]
    fn pullback_small_cases() {
        let t = RelationTriple::new(vec![1, 2, 3, 4], vec![], vec![]);
        assert_eq!(pullback_check(q(), &t, 4).unwrap().abs(), 1);
        let mut count = 0;
        for t in enumerate_rank6(3, 6) {
            pullback_check(q(), &t, 6).unwrap();
            count += 1;
        }
        assert_eq!(count, 33);
    }

    #[test]
    fn pullback_numeric_spot_check() {
        let field = FieldSpec::prime(101).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for t in enumerate_rank6(3, 6).step_by(5) {
            let s = pullback_check(field, &t, 6).unwrap();
            let g = GcpMap::new(field, &t, 6).unwrap();
            let f = rank6_form(field, 6, 3, &t).unwrap();
            for _ in 0..20 {
                let w = random_mv(field, 6, 3, &mut rng);
                let lhs = klein_value(&apply_gcp(&g, &w).unwrap()).unwrap();
                let rhs = &field.from_i64(s as i64) * &evaluate_form(&f, &w).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn decomposables_stay_decomposable() {
        for field in [q(), FieldSpec::prime(101).unwrap()] {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for t in enumerate_rank6(3, 6) {
                let g = GcpMap::new(field, &t, 6).unwrap();
                let w = random_decomposable(field, 6, 3, &mut rng);
                assert!(klein_value(&apply_gcp(&g, &w).unwrap()).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn matches_three_step_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for t in enumerate_rank6(3, 7).step_by(7) {
            let n = 7;
            let g = GcpMap::new(q(), &t, n).unwrap();
            let mut s: Vec<usize> = t.all_indices();
            s.sort_unstable();
            let support = target_support(&t);
            let proj = IndexMapping::projection(&s, n).unwrap();
            let fold = IndexMapping::fold(&t.b, n).unwrap();
            let tau = IndexMapping::relabel(&support, n).unwrap();
            let zmap = IndexMapping::new(
                support.len(),
                4,
                (1..=support.len())
                    .map(|pos| t.a.iter().position(|&a| support[pos - 1] == a).map(|j| j + 1))
                    .collect(),
            )
            .unwrap();
            let w = random_mv(q(), n, 3, &mut rng);
            let step = pushforward(&tau, &pushforward(&fold, &pushforward(&proj, &w).unwrap()).unwrap()).unwrap();
            let expected = pushforward(&zmap, &dual_iso(&step)).unwrap();
            assert_eq!(apply_gcp(&g, &w).unwrap(), expected, "{t}");
        }
    }

    #[test]
    fn doc_grid() {
        let t = RelationTriple::new(vec![2, 4, 5, 6], vec![(1, 3)], vec![]);
        let doc = GcpDoc::build(q(), &t, 6).unwrap();
        assert_eq!(doc.x[0], vec![0, 1, 0, 0, 0, 0]);
        assert_eq!(doc.x[1], vec![1, 0, 1, 0, 0, 0]);
        assert_eq!(doc.z[1], vec![0, 0, 1, 0, 0]);
        assert_eq!(doc.sign.abs(), 1);
        let back: GcpDoc = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
        assert_eq!(back, doc);
    }
}
