//! One front-end over the five decision procedures, with cross-checking and
//! re-checkable certificates.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::wedge_of;
use crate::error::{Error, Result};
use crate::exterior::{multivector_to_json, wedge, Multivector};
use crate::param::{h_poly_with, h_probabilistic, h_value_at, reduce_mod, HVerdict, ParamContext, SYMBOLIC_MAX_N};
use crate::poly::Monomial;
use crate::relations::{evaluate_form, Relation, RelationDoc, RelationSet};
use crate::scalar::{FieldSpec, Scalar};
use crate::witness::annihilator;

/// Default prime for the randomized parametric method on rational input.
pub const DEFAULT_PRIME: u64 = 1_000_003;
pub const DEFAULT_TRIALS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "bruteforce")]
    BruteForce,
    #[serde(rename = "rank6")]
    Rank6,
    #[serde(rename = "pluecker")]
    Pluecker,
    #[serde(rename = "param-random")]
    ParamRandom,
    #[serde(rename = "param-symbolic")]
    ParamSymbolic,
}

impl Method {
    /// Default priority order.
    pub const ALL: [Method; 5] = [
        Method::BruteForce,
        Method::Rank6,
        Method::Pluecker,
        Method::ParamRandom,
        Method::ParamSymbolic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::BruteForce => "bruteforce",
            Method::Rank6 => "rank6",
            Method::Pluecker => "pluecker",
            Method::ParamRandom => "param-random",
            Method::ParamSymbolic => "param-symbolic",
        }
    }

    /// Why the method cannot run on `∧^p k^n`, if it cannot.
    pub fn inapplicable(self, p: usize, n: usize) -> Option<String> {
        match self {
            Method::ParamRandom | Method::ParamSymbolic if p < 2 || n < p + 2 => {
                Some(format!("needs 2 ≤ p ≤ n - 2, got p = {p}, n = {n}"))
            }
            Method::ParamSymbolic if n > SYMBOLIC_MAX_N => {
                Some(format!("symbolic H is limited to n ≤ {SYMBOLIC_MAX_N}"))
            }
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decomposable {
    Yes,
    No,
    ProbablyYes,
}

impl Decomposable {
    pub fn is_definitive(self) -> bool {
        self != Decomposable::ProbablyYes
    }

    fn conflicts(self, other: Decomposable) -> bool {
        matches!(
            (self, other),
            (Decomposable::No, Decomposable::Yes | Decomposable::ProbablyYes)
                | (Decomposable::Yes | Decomposable::ProbablyYes, Decomposable::No)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// A relation not vanishing at `w`.
    Relation { relation: Relation, value: Scalar },
    /// A point where `H(w) ≠ 0` over `GF(prime)`.
    HPoint {
        prime: u64,
        seed: u64,
        trial: usize,
        point: Vec<Scalar>,
        value: Scalar,
    },
    /// The leading term of a nonzero `H(w)`.
    HTerm { exponents: Vec<u32>, coefficient: Scalar },
    /// A basis of `{v : v ∧ w = 0}`.
    Kernel { basis: Vec<Vec<Scalar>> },
}

impl Certificate {
    /// Re-derives the certified fact from `w` alone.
    pub fn recheck(&self, w: &Multivector) -> Result<bool> {
        let (field, n, p) = (w.field(), w.n(), w.degree());
        match self {
            Certificate::Relation { relation, value } => {
                let v = evaluate_form(&relation.form(field, n, p)?, w)?;
                Ok(!v.is_zero() && &v == value)
            }
            Certificate::HPoint { prime, point, value, .. } => {
                let v = h_value_at(&reduce_mod(w, *prime)?, point)?;
                Ok(!v.is_zero() && &v == value)
            }
            Certificate::HTerm { exponents, coefficient } => {
                let ctx = ParamContext::new(field, p, n)?;
                let h = h_poly_with(&ctx, w)?;
                Ok(!coefficient.is_zero() && &h.coefficient(&Monomial::new(exponents.clone())) == coefficient)
            }
            Certificate::Kernel { basis } => {
                for v in basis {
                    if v.len() != n || !wedge(&Multivector::vector(field, v), w)?.is_zero() {
                        return Ok(false);
                    }
                }
                if basis.len() == p {
                    // w must be a nonzero multiple of the wedge of the basis.
                    let span = wedge_of(field, n, basis);
                    let Some((t, c)) = span.terms().next() else {
                        return Ok(w.is_zero());
                    };
                    let ratio = w.get(t).div(c);
                    Ok(span.scale(&ratio) == *w)
                } else {
                    Ok(annihilator(w)?.dim() == basis.len())
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodOutcome {
    pub method: Method,
    pub decomposable: Decomposable,
    pub certificate: Option<Certificate>,
    pub micros: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub decomposable: Decomposable,
    pub method: Method,
    pub certificate: Option<Certificate>,
    pub seed: Option<u64>,
    pub runs: Vec<MethodOutcome>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecideOptions {
    pub cross_check: bool,
    pub seed: u64,
    /// Prime for the randomized method on rational input; prime-field input
    /// always uses its own modulus.
    pub prime: u64,
    pub trials: usize,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions {
            cross_check: false,
            seed: 0,
            prime: DEFAULT_PRIME,
            trials: DEFAULT_TRIALS,
        }
    }
}

type ShapeKey = (FieldSpec, usize, usize);

/// Runs decisions with relation sets and parametric minors cached per
/// `(field, p, n)`.
#[derive(Debug, Default)]
pub struct Decider {
    options: DecideOptions,
    rank6: HashMap<ShapeKey, RelationSet>,
    pluecker: HashMap<ShapeKey, RelationSet>,
    params: HashMap<ShapeKey, ParamContext>,
}

impl Decider {
    pub fn new(options: DecideOptions) -> Self {
        Decider {
            options,
            ..Default::default()
        }
    }

    pub fn options(&self) -> &DecideOptions {
        &self.options
    }

    /// Runs `methods` (deduplicated, in priority order). Without
    /// cross-checking, stops at the first definitive answer; with it, runs
    /// all and fails on any disagreement other than `ProbablyYes` vs `Yes`.
    pub fn decide(&mut self, w: &Multivector, methods: &[Method]) -> Result<Verdict> {
        let mut methods = methods.to_vec();
        methods.sort();
        methods.dedup();
        if methods.is_empty() {
            return Err(Error::Format("no decision method selected".into()));
        }
        let (p, n) = (w.degree(), w.n());
        for &m in &methods {
            if let Some(reason) = m.inapplicable(p, n) {
                return Err(Error::MethodInapplicable {
                    method: m.to_string(),
                    reason,
                });
            }
        }
        let mut runs = Vec::new();
        for &m in &methods {
            let start = Instant::now();
            let (decomposable, certificate) = self.run(m, w)?;
            runs.push(MethodOutcome {
                method: m,
                decomposable,
                certificate,
                micros: start.elapsed().as_micros() as u64,
            });
            if !self.options.cross_check && decomposable.is_definitive() {
                break;
            }
        }
        if self.options.cross_check {
            for a in &runs {
                for b in &runs {
                    if a.decomposable.conflicts(b.decomposable) {
                        let doc = VerdictDoc::runs_only(&runs);
                        return Err(Error::Consistency(format!(
                            "{} says {:?} but {} says {:?}; input {}; runs {}",
                            a.method,
                            a.decomposable,
                            b.method,
                            b.decomposable,
                            multivector_to_json(w),
                            serde_json::to_string(&doc).expect("serializable")
                        )));
                    }
                }
            }
        }
        let chosen = runs
            .iter()
            .find(|r| r.decomposable.is_definitive())
            .unwrap_or(&runs[0])
            .clone();
        let seed = runs
            .iter()
            .any(|r| r.method == Method::ParamRandom)
            .then_some(self.options.seed);
        Ok(Verdict {
            decomposable: chosen.decomposable,
            method: chosen.method,
            certificate: chosen.certificate,
            seed,
            runs,
        })
    }

    fn relation_set(&mut self, m: Method, key: ShapeKey) -> &RelationSet {
        let (field, p, n) = key;
        match m {
            Method::Rank6 => self.rank6.entry(key).or_insert_with(|| RelationSet::rank6(field, p, n)),
            _ => self
                .pluecker
                .entry(key)
                .or_insert_with(|| RelationSet::pluecker(field, p, n)),
        }
    }

    fn run(&mut self, m: Method, w: &Multivector) -> Result<(Decomposable, Option<Certificate>)> {
        let (field, n, p) = (w.field(), w.n(), w.degree());
        let key = (field, p, n);
        Ok(match m {
            Method::BruteForce => {
                let ann = annihilator(w)?;
                let yes = w.is_zero() || ann.dim() == p;
                let cert = Certificate::Kernel {
                    basis: ann.basis().to_vec(),
                };
                (if yes { Decomposable::Yes } else { Decomposable::No }, Some(cert))
            }
            Method::Rank6 | Method::Pluecker => match self.relation_set(m, key).first_violation(w)? {
                Some((r, value)) => (
                    Decomposable::No,
                    Some(Certificate::Relation {
                        relation: r.clone(),
                        value,
                    }),
                ),
                None => (Decomposable::Yes, None),
            },
            Method::ParamRandom => {
                let prime = match field {
                    FieldSpec::Prime(q) => q,
                    FieldSpec::Rational => self.options.prime,
                };
                let r = h_probabilistic(w, self.options.trials, self.options.seed, prime)?;
                match r.verdict {
                    HVerdict::ZeroSoFar => (Decomposable::ProbablyYes, None),
                    HVerdict::NonzeroWitness { trial, point, value } => (
                        Decomposable::No,
                        Some(Certificate::HPoint {
                            prime,
                            seed: r.seed,
                            trial,
                            point,
                            value,
                        }),
                    ),
                }
            }
            Method::ParamSymbolic => {
                let ctx = match self.params.entry(key) {
                    Entry::Occupied(e) => e.into_mut(),
                    Entry::Vacant(e) => e.insert(ParamContext::new(field, p, n)?),
                };
                let h = h_poly_with(ctx, w)?;
                match h.leading_term() {
                    None => (Decomposable::Yes, None),
                    Some((mono, c)) => (
                        Decomposable::No,
                        Some(Certificate::HTerm {
                            exponents: mono.exponents().to_vec(),
                            coefficient: c.clone(),
                        }),
                    ),
                }
            }
        })
    }
}

pub fn decide(w: &Multivector, methods: &[Method], options: DecideOptions) -> Result<Verdict> {
    Decider::new(options).decide(w, methods)
}

/// JSON form of a certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CertificateDoc {
    Relation {
        relation: RelationDoc,
        value: String,
    },
    HPoint {
        prime: u64,
        seed: u64,
        trial: usize,
        point: Vec<String>,
        value: String,
    },
    HTerm {
        e: Vec<u32>,
        c: String,
    },
    Kernel {
        basis: Vec<Vec<String>>,
    },
}

fn strings(v: &[Scalar]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn parse_all(field: FieldSpec, v: &[String]) -> Result<Vec<Scalar>> {
    v.iter().map(|s| field.parse_scalar(s)).collect()
}

impl CertificateDoc {
    pub fn from_certificate(c: &Certificate) -> Self {
        match c {
            Certificate::Relation { relation, value } => CertificateDoc::Relation {
                relation: RelationDoc::from(relation),
                value: value.to_string(),
            },
            Certificate::HPoint {
                prime,
                seed,
                trial,
                point,
                value,
            } => CertificateDoc::HPoint {
                prime: *prime,
                seed: *seed,
                trial: *trial,
                point: strings(point),
                value: value.to_string(),
            },
            Certificate::HTerm { exponents, coefficient } => CertificateDoc::HTerm {
                e: exponents.clone(),
                c: coefficient.to_string(),
            },
            Certificate::Kernel { basis } => CertificateDoc::Kernel {
                basis: basis.iter().map(|v| strings(v)).collect(),
            },
        }
    }

    /// Rebuilds the certificate for an input over `field`.
    pub fn to_certificate(&self, field: FieldSpec) -> Result<Certificate> {
        Ok(match self {
            CertificateDoc::Relation { relation, value } => Certificate::Relation {
                relation: Relation::from(relation),
                value: field.parse_scalar(value)?,
            },
            CertificateDoc::HPoint {
                prime,
                seed,
                trial,
                point,
                value,
            } => {
                let pf = FieldSpec::prime(*prime)?;
                Certificate::HPoint {
                    prime: *prime,
                    seed: *seed,
                    trial: *trial,
                    point: parse_all(pf, point)?,
                    value: pf.parse_scalar(value)?,
                }
            }
            CertificateDoc::HTerm { e, c } => Certificate::HTerm {
                exponents: e.clone(),
                coefficient: field.parse_scalar(c)?,
            },
            CertificateDoc::Kernel { basis } => Certificate::Kernel {
                basis: basis.iter().map(|v| parse_all(field, v)).collect::<Result<_>>()?,
            },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunDoc {
    pub method: Method,
    pub decomposable: Decomposable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub micros: Option<u64>,
}

/// JSON form of a verdict. Timings are included only on request so that
/// default output is reproducible byte for byte.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub decomposable: Decomposable,
    pub method: Method,
    pub certificate: Option<CertificateDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub runs: Vec<RunDoc>,
}

impl VerdictDoc {
    pub fn from_verdict(v: &Verdict, timings: bool) -> Self {
        VerdictDoc {
            decomposable: v.decomposable,
            method: v.method,
            certificate: v.certificate.as_ref().map(CertificateDoc::from_certificate),
            seed: v.seed,
            runs: v
                .runs
                .iter()
                .map(|r| RunDoc {
                    method: r.method,
                    decomposable: r.decomposable,
                    micros: timings.then_some(r.micros),
                })
                .collect(),
        }
    }

    fn runs_only(runs: &[MethodOutcome]) -> Vec<RunDoc> {
        runs.iter()
            .map(|r| RunDoc {
                method: r.method,
                decomposable: r.decomposable,
                micros: None,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::RelationTriple;

    fn q() -> FieldSpec {
        FieldSpec::Rational
    }

    fn e12_e34() -> Multivector {
        Multivector::from_terms(q(), 4, 2, [(vec![1, 2], q().one()), (vec![3, 4], q().one())]).unwrap()
    }

    fn cross() -> DecideOptions {
        DecideOptions {
            cross_check: true,
            ..Default::default()
        }
    }

    #[test]
    fn decomposable_is_unanimous() {
        let w = Multivector::basis(q(), 5, &[1, 2, 3]).unwrap();
        let v = decide(&w, &Method::ALL, cross()).unwrap();
        assert_eq!(v.decomposable, Decomposable::Yes);
        assert_eq!(v.runs.len(), 5);
        assert!(v.runs.iter().all(|r| r.decomposable != Decomposable::No));
        assert_eq!(v.seed, Some(0));
        assert!(v.certificate.unwrap().recheck(&w).unwrap());
    }

    #[test]
    fn rank6_certificate_for_e12_e34() {
        let v = decide(&e12_e34(), &[Method::Rank6], DecideOptions::default()).unwrap();
        assert_eq!(v.decomposable, Decomposable::No);
        let Some(Certificate::Relation { relation, value }) = &v.certificate else {
            panic!("expected a relation certificate");
        };
        assert_eq!(*relation, Relation::Rank6(RelationTriple::new(vec![1, 2, 3, 4], vec![], vec![])));
        assert!(value.is_one());
        assert!(v.certificate.as_ref().unwrap().recheck(&e12_e34()).unwrap());
    }

    #[test]
    fn every_no_certificate_rechecks() {
        let w = e12_e34();
        let v = decide(&w, &Method::ALL, cross()).unwrap();
        assert_eq!(v.decomposable, Decomposable::No);
        for r in &v.runs {
            assert_eq!(r.decomposable, Decomposable::No, "{}", r.method);
            assert!(r.certificate.as_ref().unwrap().recheck(&w).unwrap(), "{}", r.method);
        }
    }

    #[test]
    fn short_circuit_without_cross_check() {
        let v = decide(&e12_e34(), &[Method::Pluecker, Method::BruteForce], DecideOptions::default()).unwrap();
        assert_eq!(v.runs.len(), 1);
        assert_eq!(v.method, Method::BruteForce);
    }

    #[test]
    fn probabilistic_alone_gives_probably_yes() {
        let w = Multivector::basis(q(), 4, &[1, 2]).unwrap();
        let v = decide(&w, &[Method::ParamRandom], DecideOptions::default()).unwrap();
        assert_eq!(v.decomposable, Decomposable::ProbablyYes);
        assert!(v.certificate.is_none());
    }

    #[test]
    fn inapplicable_methods() {
        let w = Multivector::basis(q(), 9, &[1, 2]).unwrap();
        assert!(matches!(
            decide(&w, &[Method::ParamSymbolic], DecideOptions::default()),
            Err(Error::MethodInapplicable { .. })
        ));
        let w = Multivector::basis(q(), 4, &[1]).unwrap();
        assert!(decide(&w, &[Method::ParamRandom], DecideOptions::default()).is_err());
        assert!(decide(&w, &[], DecideOptions::default()).is_err());
    }

    #[test]
    fn verdict_doc_round_trip() {
        let w = e12_e34();
        let v = decide(&w, &Method::ALL, cross()).unwrap();
        let doc = VerdictDoc::from_verdict(&v, false);
        let json = serde_json::to_string(&doc).unwrap();
        assert!(!json.contains("micros"));
        let back: VerdictDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
        let cert = back.certificate.unwrap().to_certificate(q()).unwrap();
        assert!(cert.recheck(&w).unwrap());
        assert!(VerdictDoc::from_verdict(&v, true).runs.iter().all(|r| r.micros.is_some()));
    }

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
        }
    }
}
