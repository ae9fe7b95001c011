//! Solvability certificates and their polynomial-time verifier.
//!
//! A certificate for an equation in standard form with m coefficients is a
//! set of variables P with nonempty word images and m disc boundary words
//! over P, each variable used exactly twice. The verifier checks the edge
//! bound, the multiplicity condition, that every coefficient can be read
//! without cancellation around its disc, and that the glued discs form
//! closed surfaces whose orientability and Euler characteristics are
//! admissible for the equation.

mod direct;
mod search;

pub use direct::DirectSearcher;
pub use search::{search, SearchBudget, SearchOutcome};

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equations::StandardForm;
use crate::surfaces::{build_complex, SurfaceSummary};
use crate::words::{cyclic_match, free_reduce, substitute, Sign, Word};

/// Certificate data: named variables with images and the disc boundary
/// words. Boundary entries index into the variable list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    names: Vec<String>,
    images: Vec<Word>,
    boundaries: Vec<Vec<(u32, Sign)>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertificateError {
    #[error("boundary references unknown variable {0}")]
    UnknownVariable(String),
    #[error("variable {0} listed twice")]
    DuplicateVariable(String),
}

impl Certificate {
    pub fn new(
        names: Vec<String>,
        images: Vec<Word>,
        boundaries: Vec<Vec<(u32, Sign)>>,
    ) -> Result<Certificate, CertificateError> {
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(CertificateError::DuplicateVariable(name.clone()));
            }
        }
        for boundary in &boundaries {
            for &(var, _) in boundary {
                if var as usize >= names.len() {
                    return Err(CertificateError::UnknownVariable(format!("#{var}")));
                }
            }
        }
        Ok(Certificate { names, images, boundaries })
    }

    /// Certificate with variables named p1..pn.
    pub fn from_parts(images: Vec<Word>, boundaries: Vec<Vec<(u32, Sign)>>) -> Certificate {
        let names = (1..=images.len()).map(|i| format!("p{i}")).collect();
        Certificate::new(names, images, boundaries).expect("generated names are valid")
    }

    pub fn variable_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn boundaries(&self) -> &[Vec<(u32, Sign)>] {
        &self.boundaries
    }

    /// Σ|Cᵢ| + Σ|aⱼ| + n, the symbol-count size of the certificate.
    pub fn size(&self) -> usize {
        let boundary_len: usize = self.boundaries.iter().map(|b| b.len()).sum();
        let image_len: usize = self.images.iter().map(|w| w.len()).sum();
        boundary_len + image_len + self.variable_count()
    }
}

impl Serialize for Certificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            variables: usize,
            images: std::collections::BTreeMap<String, String>,
            boundaries: Vec<Vec<String>>,
        }
        let images = self
            .names
            .iter()
            .zip(&self.images)
            .map(|(n, w)| (n.clone(), w.to_string()))
            .collect();
        let boundaries = self
            .boundaries
            .iter()
            .map(|b| {
                b.iter()
                    .map(|&(v, s)| match s {
                        Sign::Plus => self.names[v as usize].clone(),
                        Sign::Minus => format!("{}^-1", self.names[v as usize]),
                    })
                    .collect()
            })
            .collect();
        Repr { variables: self.names.len(), images, boundaries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Certificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Certificate, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            #[serde(default)]
            variables: Option<usize>,
            images: std::collections::BTreeMap<String, String>,
            boundaries: Vec<Vec<String>>,
        }
        let repr = Repr::deserialize(d)?;
        let mut names: Vec<String> = repr.images.keys().cloned().collect();
        // Keep p1..pn in numeric order when the conventional names are used.
        names.sort_by_key(|n| {
            n.strip_prefix('p')
                .and_then(|s| s.parse::<u64>().ok())
                .map_or((1, n.clone()), |k| (0, format!("{k:020}")))
        });
        if let Some(v) = repr.variables {
            if v != names.len() {
                return Err(serde::de::Error::custom(format!(
                    "certificate declares {v} variables but lists {} images",
                    names.len()
                )));
            }
        }
        let images = names
            .iter()
            .map(|n| Word::parse(&repr.images[n]).map_err(serde::de::Error::custom))
            .collect::<Result<Vec<_>, _>>()?;
        let mut boundaries = Vec::with_capacity(repr.boundaries.len());
        for b in &repr.boundaries {
            let mut word = Vec::with_capacity(b.len());
            for token in b {
                let (name, sign) = match token.strip_suffix("^-1") {
                    Some(n) => (n, Sign::Minus),
                    None => (token.as_str(), Sign::Plus),
                };
                let var = names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| serde::de::Error::custom(format!("unknown variable {name}")))?;
                word.push((var as u32, sign));
            }
            boundaries.push(word);
        }
        Certificate::new(names, images, boundaries).map_err(serde::de::Error::custom)
    }
}

/// The condition a rejected certificate failed, in the order they are
/// checked: structure (ii), the edge bound, coefficient reading (iv),
/// surface admissibility (iii), coherent orientation (v).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailedCondition {
    #[serde(rename = "ii")]
    Structure,
    #[serde(rename = "bound-n")]
    EdgeBound,
    #[serde(rename = "iv")]
    Reading,
    #[serde(rename = "iii")]
    Topology,
    #[serde(rename = "v")]
    Coherence,
}

impl fmt::Display for FailedCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FailedCondition::Structure => "ii",
            FailedCondition::EdgeBound => "bound-n",
            FailedCondition::Reading => "iv",
            FailedCondition::Topology => "iii",
            FailedCondition::Coherence => "v",
        };
        f.write_str(s)
    }
}

/// Verifier output. `accepted` holds exactly when `failed_condition` is
/// empty; `surfaces` is present whenever the discs could be glued.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub accepted: bool,
    pub failed_condition: Option<FailedCondition>,
    pub detail: String,
    pub surfaces: Option<SurfaceSummary>,
}

impl Verdict {
    fn reject(condition: FailedCondition, detail: impl Into<String>) -> Verdict {
        Verdict {
            accepted: false,
            failed_condition: Some(condition),
            detail: detail.into(),
            surfaces: None,
        }
    }
}

/// Largest admissible variable count for an equation: 3(m − χ̄) from the
/// Euler-characteristic argument, with a floor of 2 so that the minimal
/// sphere and projective-plane gluings (single edge) stay expressible.
pub fn edge_bound(sf: &StandardForm) -> usize {
    let m = sf.coefficient_count() as i64;
    let chi_bar = sf.reduced_euler_characteristic();
    (3 * (m - chi_bar)).max(2) as usize
}

/// Checks a certificate against an equation in standard form. Runs in time
/// polynomial in the sizes of both.
pub fn verify(sf: &StandardForm, cert: &Certificate) -> Verdict {
    let m = sf.coefficient_count();
    if m == 0 {
        return Verdict::reject(
            FailedCondition::Structure,
            "equation has no coefficients; it is trivially solvable without a certificate",
        );
    }
    let n = cert.variable_count();

    // Structure: one boundary per coefficient, nonempty images, every
    // variable exactly twice.
    if cert.boundaries().len() != m {
        return Verdict::reject(
            FailedCondition::Structure,
            format!("expected {m} boundary words, found {}", cert.boundaries().len()),
        );
    }
    if cert.images().len() != n {
        return Verdict::reject(FailedCondition::Structure, "missing image");
    }
    if let Some(i) = cert.images().iter().position(|w| w.is_empty()) {
        return Verdict::reject(
            FailedCondition::Structure,
            format!("image of {} is empty", cert.names()[i]),
        );
    }
    let mut counts = vec![0usize; n];
    for boundary in cert.boundaries() {
        for &(v, _) in boundary {
            counts[v as usize] += 1;
        }
    }
    if let Some(v) = counts.iter().position(|&c| c != 2) {
        return Verdict::reject(
            FailedCondition::Structure,
            format!("variable {} occurs {} times, expected exactly 2", cert.names()[v], counts[v]),
        );
    }

    if n > edge_bound(sf) {
        return Verdict::reject(
            FailedCondition::EdgeBound,
            format!("{n} variables exceed the bound {}", edge_bound(sf)),
        );
    }

    // The discs can always be glued once multiplicities hold.
    let complex = build_complex(cert.boundaries()).expect("multiplicity already checked");
    let summary = complex.summarize();

    // Reading: each coefficient appears as a cancellation-free cyclic
    // reading of its disc boundary.
    let images: HashMap<u32, Word> =
        (0..n as u32).map(|v| (v, cert.images()[v as usize].clone())).collect();
    for (i, boundary) in cert.boundaries().iter().enumerate() {
        let (letters, graphical) =
            substitute(&images, boundary).expect("all variables have images");
        let target = if i + 1 < m {
            &sf.coefficients()[i]
        } else {
            sf.last_coefficient().expect("m ≥ 1")
        };
        if !graphical {
            return Verdict {
                surfaces: Some(summary),
                ..Verdict::reject(
                    FailedCondition::Reading,
                    format!("boundary {} does not read without cancellation", i + 1),
                )
            };
        }
        let word = free_reduce(letters);
        if cyclic_match(&word, target).is_none() {
            return Verdict {
                surfaces: Some(summary),
                ..Verdict::reject(
                    FailedCondition::Reading,
                    format!(
                        "boundary {} reads {word} which is no rotation of {target}",
                        i + 1
                    ),
                )
            };
        }
    }

    // Surface admissibility.
    let chi_bar = sf.reduced_euler_characteristic();
    let slack = summary.chi_sum_minus_2l();
    let verdict = if sf.orientable() {
        if !summary.all_orientable() {
            Verdict::reject(FailedCondition::Topology, "a component is non-orientable")
        } else if !complex.coherent_clockwise() {
            Verdict::reject(
                FailedCondition::Coherence,
                "the clockwise orientations are incompatible with the gluing",
            )
        } else if slack < chi_bar {
            Verdict::reject(
                FailedCondition::Topology,
                format!("Σχ − 2l = {slack} < {chi_bar}"),
            )
        } else {
            Verdict {
                accepted: true,
                failed_condition: None,
                detail: String::new(),
                surfaces: None,
            }
        }
    } else {
        let required = if summary.all_orientable() { chi_bar + 2 } else { chi_bar };
        if slack < required {
            Verdict::reject(
                FailedCondition::Topology,
                format!("Σχ − 2l = {slack} < {required}"),
            )
        } else {
            Verdict { accepted: true, failed_condition: None, detail: String::new(), surfaces: None }
        }
    };
    Verdict { surfaces: Some(summary), ..verdict }
}
