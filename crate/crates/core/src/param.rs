//! The parameter-dependent criterion. `X` is the `(p+2) × n` power matrix
//! `x_i^{j-1}` over `R = k[x_1, …, x_{p+2}]`, `Z = (I O)`, and
//! `H(ω) = Π̂₁₂Π̂₃₄ − Π̂₁₃Π̂₂₄ + Π̂₁₄Π̂₂₃` for the coordinates `Π̂_{ij}` of
//! `∧²Z δ ∧^p X ω`. `H(ω) = 0` exactly when `ω` is decomposable.

use std::collections::BTreeMap;

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{IndexTuple, Multivector};
use crate::matrix::{mat_rank, Matrix};
use crate::poly::{poly_determinant, MultiPoly, MultiPolyDoc};
use crate::scalar::{is_prime, FieldSpec, Scalar};
use crate::witness::Subspace;

/// Largest `n` for which [`h_poly`] builds `H` symbolically.
pub const SYMBOLIC_MAX_N: usize = 8;

/// Prime used by [`generic_rank_check`] for rational subspaces.
pub const RANK_CHECK_PRIME: u64 = (1 << 61) - 1;

/// Coordinate pairs of `∧² k^4` in the order `12, 13, 14, 23, 24, 34`.
pub const PAIRS: [(usize, usize); 6] = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

fn check_shape(p: usize, n: usize) -> Result<()> {
    if p < 2 || n < p + 2 {
        return Err(Error::ShapeMismatch(format!(
            "the parametric map needs 2 ≤ p ≤ n - 2, got p = {p}, n = {n}"
        )));
    }
    Ok(())
}

/// Rows `{1, …, p+2} \ {i, j}`.
fn complement_rows(p: usize, (i, j): (usize, usize)) -> Vec<usize> {
    (1..=p + 2).filter(|&r| r != i && r != j).collect()
}

pub fn param_x(field: FieldSpec, p: usize, n: usize) -> Result<Vec<Vec<MultiPoly>>> {
    check_shape(p, n)?;
    Ok((0..p + 2)
        .map(|i| (0..n).map(|j| MultiPoly::var_pow(field, p + 2, i, j as u32)).collect())
        .collect())
}

/// The minors `det X[[p+2] \ {i,j}, J]` for all `J` and all six pairs.
#[derive(Clone, Debug)]
pub struct ParamContext {
    field: FieldSpec,
    p: usize,
    n: usize,
    minors: BTreeMap<IndexTuple, [MultiPoly; 6]>,
}

impl ParamContext {
    pub fn new(field: FieldSpec, p: usize, n: usize) -> Result<Self> {
        let x = param_x(field, p, n)?;
        let mut minors = BTreeMap::new();
        for j in (1..=n).combinations(p) {
            let per_pair = PAIRS
                .iter()
                .map(|&pair| {
                    let entries: Vec<Vec<MultiPoly>> = complement_rows(p, pair)
                        .iter()
                        .map(|&r| j.iter().map(|&c| x[r - 1][c - 1].clone()).collect())
                        .collect();
                    poly_determinant(&entries)
                })
                .collect::<Result<Vec<_>>>()?;
            let arr: [MultiPoly; 6] = per_pair.try_into().expect("six pairs");
            minors.insert(IndexTuple::new(j, n)?, arr);
        }
        Ok(ParamContext { field, p, n, minors })
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// The six coordinates of `G(ω)` in `∧² R^4`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamImage {
    pub p: usize,
    pub n: usize,
    pub coords: [MultiPoly; 6],
}

impl ParamImage {
    pub fn coord(&self, i: usize, j: usize) -> &MultiPoly {
        let k = PAIRS.iter().position(|&pr| pr == (i, j)).expect("pair with 1 ≤ i < j ≤ 4");
        &self.coords[k]
    }

    /// `Π̂₁₂Π̂₃₄ − Π̂₁₃Π̂₂₄ + Π̂₁₄Π̂₂₃`.
    pub fn h(&self) -> MultiPoly {
        let c = &self.coords;
        c[0].mul(&c[5]).sub(&c[1].mul(&c[4])).add(&c[2].mul(&c[3]))
    }
}

fn check_context(ctx: &ParamContext, w: &Multivector) -> Result<()> {
    if w.field() != ctx.field {
        return Err(Error::FieldMismatch(ctx.field.to_string(), w.field().to_string()));
    }
    if w.n() != ctx.n || w.degree() != ctx.p {
        return Err(Error::ShapeMismatch(format!(
            "parameter map on ∧^{}k^{} applied to ∧^{}k^{}",
            ctx.p,
            ctx.n,
            w.degree(),
            w.n()
        )));
    }
    Ok(())
}

pub fn param_image_with(ctx: &ParamContext, w: &Multivector) -> Result<ParamImage> {
    check_context(ctx, w)?;
    let mut coords: [MultiPoly; 6] = std::array::from_fn(|_| MultiPoly::zero(ctx.field, ctx.p + 2));
    for (t, c) in w.terms() {
        let minors = &ctx.minors[t];
        for (k, m) in minors.iter().enumerate() {
            coords[k].add_scaled(m, c);
        }
    }
    Ok(ParamImage {
        p: ctx.p,
        n: ctx.n,
        coords,
    })
}

pub fn param_image(w: &Multivector) -> Result<ParamImage> {
    param_image_with(&ParamContext::new(w.field(), w.degree(), w.n())?, w)
}

fn check_symbolic(n: usize) -> Result<()> {
    if n > SYMBOLIC_MAX_N {
        return Err(Error::MethodInapplicable {
            method: "param-symbolic".into(),
            reason: format!("symbolic H is limited to n ≤ {SYMBOLIC_MAX_N}; use the randomized mode"),
        });
    }
    Ok(())
}

pub fn h_poly_with(ctx: &ParamContext, w: &Multivector) -> Result<MultiPoly> {
    check_symbolic(ctx.n)?;
    Ok(param_image_with(ctx, w)?.h())
}

pub fn h_poly(w: &Multivector) -> Result<MultiPoly> {
    check_symbolic(w.n())?;
    check_shape(w.degree(), w.n())?;
    h_poly_with(&ParamContext::new(w.field(), w.degree(), w.n())?, w)
}

/// Degree bound `2p(n-1)` of `H`.
pub fn h_degree_bound(p: usize, n: usize) -> u64 {
    2 * p as u64 * (n as u64).saturating_sub(1)
}

/// Reduces `w` into `GF(prime)`; a prime-field input must already live there.
pub fn reduce_mod(w: &Multivector, prime: u64) -> Result<Multivector> {
    let target = FieldSpec::prime(prime).map_err(|e| Error::BadPrime {
        prime,
        reason: e.to_string(),
    })?;
    match w.field() {
        FieldSpec::Rational => {
            let terms = w
                .terms()
                .map(|(t, c)| Ok((t.indices().to_vec(), target.convert(c)?)))
                .collect::<Result<Vec<_>>>()?;
            Multivector::from_terms(target, w.n(), w.degree(), terms)
        }
        FieldSpec::Prime(q) if q == prime => Ok(w.clone()),
        FieldSpec::Prime(q) => Err(Error::BadPrime {
            prime,
            reason: format!("input is over GF({q})"),
        }),
    }
}

/// `H(ω)` at a point, from numeric minors of `X(point)`.
pub fn h_value_at(w: &Multivector, point: &[Scalar]) -> Result<Scalar> {
    let (field, p, n) = (w.field(), w.degree(), w.n());
    check_shape(p, n)?;
    if point.len() != p + 2 {
        return Err(Error::ShapeMismatch(format!(
            "point with {} coordinates for {} parameters",
            point.len(),
            p + 2
        )));
    }
    if let Some(s) = point.iter().find(|s| s.field() != field) {
        return Err(Error::FieldMismatch(field.to_string(), s.field().to_string()));
    }
    let x = Matrix::from_rows(
        field,
        point
            .iter()
            .map(|xi| (0..n).map(|j| xi.pow(j as u64)).collect())
            .collect(),
    )?;
    let mut hat: Vec<Scalar> = vec![field.zero(); 6];
    for (t, c) in w.terms() {
        for (k, &pair) in PAIRS.iter().enumerate() {
            let cols: Vec<usize> = t.indices().iter().map(|j| j - 1).collect();
            let rows: Vec<usize> = complement_rows(p, pair).iter().map(|r| r - 1).collect();
            let d = x.select(&rows, &cols).determinant()?;
            hat[k] += &(c * &d);
        }
    }
    Ok(&(&(&hat[0] * &hat[5]) - &(&hat[1] * &hat[4])) + &(&hat[2] * &hat[3]))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HVerdict {
    ZeroSoFar,
    NonzeroWitness {
        trial: usize,
        point: Vec<Scalar>,
        value: Scalar,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HProbResult {
    pub prime: u64,
    pub seed: u64,
    pub trials: usize,
    pub verdict: HVerdict,
}

/// Evaluates `H` at `trials` points drawn uniformly from `GF(prime)^{p+2}`
/// by `ChaCha8Rng::seed_from_u64(seed)`. A nonzero value proves
/// indecomposability; all-zero is evidence for decomposability with error at
/// most `2p(n-1)/prime` per trial.
pub fn h_probabilistic(w: &Multivector, trials: usize, seed: u64, prime: u64) -> Result<HProbResult> {
    let (p, n) = (w.degree(), w.n());
    check_shape(p, n)?;
    if !is_prime(prime) {
        return Err(Error::BadPrime {
            prime,
            reason: "not prime".into(),
        });
    }
    if prime <= h_degree_bound(p, n) {
        return Err(Error::BadPrime {
            prime,
            reason: format!("must exceed the degree bound 2p(n-1) = {}", h_degree_bound(p, n)),
        });
    }
    let reduced = reduce_mod(w, prime)?;
    let field = reduced.field();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut verdict = HVerdict::ZeroSoFar;
    for trial in 0..trials {
        let point: Vec<Scalar> = (0..p + 2).map(|_| field.random(&mut rng, 0)).collect();
        let value = h_value_at(&reduced, &point)?;
        if !value.is_zero() {
            verdict = HVerdict::NonzeroWitness { trial, point, value };
            break;
        }
    }
    Ok(HProbResult {
        prime,
        seed,
        trials,
        verdict,
    })
}

/// Whether `X` restricted to `V` has rank `min(p+2, dim V)`: numerically at
/// up to three random points, then by testing the leading `r × r` minor of
/// `X U` symbolically.
pub fn generic_rank_check(v: &Subspace, p: usize, seed: u64) -> Result<bool> {
    let n = v.n();
    check_shape(p, n)?;
    let r = (p + 2).min(v.dim());
    if r == 0 {
        return Ok(true);
    }
    let field = match v.field() {
        FieldSpec::Rational => FieldSpec::prime(RANK_CHECK_PRIME)?,
        f => f,
    };
    let u: Vec<Vec<Scalar>> = v
        .basis()
        .iter()
        .map(|row| row.iter().map(|s| field.convert(s)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    // U as n × dim with basis vectors as columns.
    let u_mat = Matrix::from_rows(field, u.clone())?.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..3 {
        let point: Vec<Scalar> = (0..p + 2).map(|_| field.random(&mut rng, 0)).collect();
        let x = Matrix::from_rows(
            field,
            point.iter().map(|xi| (0..n).map(|j| xi.pow(j as u64)).collect()).collect(),
        )?;
        if u_mat.rows() == 0 || mat_rank(&x.mul(&u_mat)?) == r {
            return Ok(true);
        }
    }
    Ok(!leading_minor(v, p, r)?.is_zero())
}

/// `det((X U)[1..r, 1..r])` over the field of `v`.
pub fn leading_minor(v: &Subspace, p: usize, r: usize) -> Result<MultiPoly> {
    let field = v.field();
    let nv = p + 2;
    let entries: Vec<Vec<MultiPoly>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|c| {
                    let mut e = MultiPoly::zero(field, nv);
                    for (j, coeff) in v.basis()[c].iter().enumerate() {
                        if !coeff.is_zero() {
                            e.add_scaled(&MultiPoly::var_pow(field, nv, i, j as u32), coeff);
                        }
                    }
                    e
                })
                .collect()
        })
        .collect();
    poly_determinant(&entries)
}

/// JSON forms of the parametric outputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HPolyDoc {
    pub p: usize,
    pub n: usize,
    pub zero: bool,
    #[serde(rename = "H")]
    pub h: MultiPolyDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum HVerdictDoc {
    ZeroSoFar,
    Nonzero {
        trial: usize,
        point: Vec<String>,
        value: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HProbDoc {
    pub prime: u64,
    pub seed: u64,
    pub trials: usize,
    #[serde(flatten)]
    pub verdict: HVerdictDoc,
}

impl HProbResult {
    pub fn to_doc(&self) -> HProbDoc {
        HProbDoc {
            prime: self.prime,
            seed: self.seed,
            trials: self.trials,
            verdict: match &self.verdict {
                HVerdict::ZeroSoFar => HVerdictDoc::ZeroSoFar,
                HVerdict::NonzeroWitness { trial, point, value } => HVerdictDoc::Nonzero {
                    trial: *trial,
                    point: point.iter().map(ToString::to_string).collect(),
                    value: value.to_string(),
                },
            },
        }
    }
}
