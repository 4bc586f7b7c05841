//! JSON instance files: named operators and partitions over one tracial
//! algebra, with every number carried as an exact rational string.
//!
//! The on-disk shape is
//!
//! ```json
//! {
//!   "algebra": {
//!     "blocks": [{ "dim": 2, "weight": "1/1" }],
//!     "mode": "exact"
//!   },
//!   "operators": {
//!     "x": [[[["0/1", "0/1"], ["1/1", "0/1"]],
//!            [["0/1", "0/1"], ["0/1", "0/1"]]]]
//!   },
//!   "partitions": {
//!     "P": { "projections": ["p0", "p1"] }
//!   }
//! }
//! ```
//!
//! Operators are indexed `[block][row][column]`, each entry an
//! `["re", "im"]` pair of rational strings (canonically `"n/d"`; a bare
//! integer `"n"` is accepted on input). All indices are 0-based. Float
//! mode is written `{"float": "1/1000000"}` — the tolerance itself is a
//! rational, so files never contain binary floating point. Partition
//! entries may name an operator from the same file or inline a matrix.
//!
//! Serialization is canonical: name maps are ordered, rationals are
//! reduced, and parsing a file this module wrote and re-serializing it
//! reproduces the bytes exactly.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::algebra::{Block, Mode, Operator, TracialAlgebra};
use crate::error::{Error, Result};
use crate::generation::GenerationCertificate;
use crate::partition::Partition;
use crate::scalar::{format_rational, Scalar};

/// Parses a canonical rational string: `n/d` or a bare integer `n`,
/// either with an optional sign. The denominator must be nonzero.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    BigRational::from_str(s.trim())
        .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
}

/// One instance file: named operators and named partitions over a single
/// algebra, together with the zero-test mode all of them are read under.
#[derive(Clone, Debug)]
pub struct Instance {
    algebra: Arc<TracialAlgebra>,
    mode: Mode,
    operators: BTreeMap<String, Operator>,
    partitions: BTreeMap<String, Partition>,
}

impl Instance {
    /// An empty instance over the given algebra and mode.
    pub fn new(algebra: Arc<TracialAlgebra>, mode: Mode) -> Self {
        Instance { algebra, mode, operators: BTreeMap::new(), partitions: BTreeMap::new() }
    }

    /// The ambient algebra.
    pub fn algebra(&self) -> &Arc<TracialAlgebra> {
        &self.algebra
    }

    /// The zero-test mode the file requests.
    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    /// Adds a named operator; the name must be new and the operator must
    /// live in the instance's algebra.
    pub fn insert_operator(&mut self, name: &str, x: Operator) -> Result<()> {
        if name.is_empty() {
            return Err(Error::Parse("operator names must be nonempty".into()));
        }
        if !Arc::ptr_eq(x.algebra(), &self.algebra) && *x.algebra() != self.algebra {
            return Err(Error::AlgebraMismatch(format!(
                "operator {name:?} lives in a different algebra"
            )));
        }
        if self.operators.insert(name.to_string(), x).is_some() {
            return Err(Error::Parse(format!("duplicate operator name {name:?}")));
        }
        Ok(())
    }

    /// Adds a named partition over the instance's algebra.
    pub fn insert_partition(&mut self, name: &str, partition: Partition) -> Result<()> {
        if name.is_empty() {
            return Err(Error::Parse("partition names must be nonempty".into()));
        }
        if *partition.algebra() != self.algebra {
            return Err(Error::AlgebraMismatch(format!(
                "partition {name:?} lives in a different algebra"
            )));
        }
        if self.partitions.insert(name.to_string(), partition).is_some() {
            return Err(Error::Parse(format!("duplicate partition name {name:?}")));
        }
        Ok(())
    }

    /// Looks up an operator by name.
    pub fn operator(&self, name: &str) -> Result<&Operator> {
        self.operators
            .get(name)
            .ok_or_else(|| Error::Parse(format!("no operator named {name:?} in the instance")))
    }

    /// Looks up a partition by name.
    pub fn partition(&self, name: &str) -> Result<&Partition> {
        self.partitions
            .get(name)
            .ok_or_else(|| Error::Parse(format!("no partition named {name:?} in the instance")))
    }

    /// All named operators, in name order.
    pub fn operators(&self) -> &BTreeMap<String, Operator> {
        &self.operators
    }

    /// All named partitions, in name order.
    pub fn partitions(&self) -> &BTreeMap<String, Partition> {
        &self.partitions
    }

    /// Resolves a comma-separated list of operator names into a family,
    /// in the order written.
    pub fn family(&self, names: &str) -> Result<Vec<Operator>> {
        names
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| self.operator(name).cloned())
            .collect()
    }

    /// Parses an instance from JSON text.
    pub fn from_json(text: &str) -> Result<Instance> {
        let dto: InstanceDto =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad instance file: {e}")))?;
        dto.into_instance()
    }

    /// Serializes the instance to canonical JSON (sorted names, reduced
    /// rationals, trailing newline).
    pub fn to_json(&self) -> String {
        let dto = InstanceDto::from_instance(self);
        let mut text = serde_json::to_string_pretty(&dto).expect("instance DTOs always serialize");
        text.push('\n');
        text
    }
}

type ScalarDto = (String, String);
type OperatorDto = Vec<Vec<Vec<ScalarDto>>>;

#[derive(Serialize, Deserialize)]
struct BlockDto {
    dim: usize,
    weight: String,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ModeDto {
    Tag(String),
    Float { float: String },
}

#[derive(Serialize, Deserialize)]
struct AlgebraDto {
    blocks: Vec<BlockDto>,
    mode: ModeDto,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ProjectionRef {
    Named(String),
    Inline(OperatorDto),
}

#[derive(Serialize, Deserialize)]
struct PartitionDto {
    projections: Vec<ProjectionRef>,
}

#[derive(Serialize, Deserialize)]
struct InstanceDto {
    algebra: AlgebraDto,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    operators: BTreeMap<String, OperatorDto>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    partitions: BTreeMap<String, PartitionDto>,
}

fn scalar_to_dto(s: &Scalar) -> ScalarDto {
    (format_rational(&s.re), format_rational(&s.im))
}

fn scalar_from_dto(dto: &ScalarDto) -> Result<Scalar> {
    Ok(Scalar::new(parse_rational(&dto.0)?, parse_rational(&dto.1)?))
}

fn operator_to_dto(x: &Operator) -> OperatorDto {
    x.blocks_data()
        .iter()
        .map(|blk| blk.iter().map(|row| row.iter().map(scalar_to_dto).collect()).collect())
        .collect()
}

fn operator_from_dto(algebra: &Arc<TracialAlgebra>, dto: &OperatorDto) -> Result<Operator> {
    let blocks = algebra.blocks();
    if dto.len() != blocks.len() {
        return Err(Error::Parse(format!(
            "operator has {} blocks but the algebra has {}",
            dto.len(),
            blocks.len()
        )));
    }
    let mut x = Operator::zero(algebra);
    for (b, (blk, data)) in blocks.iter().zip(dto).enumerate() {
        if data.len() != blk.dim || data.iter().any(|row| row.len() != blk.dim) {
            return Err(Error::Parse(format!(
                "block {b} of an operator is not a {0}×{0} matrix",
                blk.dim
            )));
        }
        for (r, row) in data.iter().enumerate() {
            for (c, entry) in row.iter().enumerate() {
                x.set_entry(b, r, c, scalar_from_dto(entry)?);
            }
        }
    }
    Ok(x)
}

impl InstanceDto {
    fn from_instance(instance: &Instance) -> InstanceDto {
        let algebra = AlgebraDto {
            blocks: instance
                .algebra
                .blocks()
                .iter()
                .map(|b| BlockDto { dim: b.dim, weight: format_rational(&b.weight) })
                .collect(),
            mode: match &instance.mode {
                Mode::Exact => ModeDto::Tag("exact".into()),
                Mode::Float { eps } => ModeDto::Float { float: format_rational(eps) },
            },
        };
        let operators = instance
            .operators
            .iter()
            .map(|(name, x)| (name.clone(), operator_to_dto(x)))
            .collect();
        let partitions = instance
            .partitions
            .iter()
            .map(|(name, partition)| {
                let projections = partition
                    .parts()
                    .iter()
                    .map(|part| {
                        instance
                            .operators
                            .iter()
                            .find(|(_, x)| *x == part)
                            .map(|(n, _)| ProjectionRef::Named(n.clone()))
                            .unwrap_or_else(|| ProjectionRef::Inline(operator_to_dto(part)))
                    })
                    .collect();
                (name.clone(), PartitionDto { projections })
            })
            .collect();
        InstanceDto { algebra, operators, partitions }
    }

    fn into_instance(self) -> Result<Instance> {
        let mut blocks = Vec::with_capacity(self.algebra.blocks.len());
        for b in &self.algebra.blocks {
            blocks.push(Block { dim: b.dim, weight: parse_rational(&b.weight)? });
        }
        let algebra = TracialAlgebra::new(blocks)?;
        let mode = match &self.algebra.mode {
            ModeDto::Tag(tag) if tag == "exact" => Mode::Exact,
            ModeDto::Tag(tag) => {
                return Err(Error::Parse(format!(
                    "unknown mode {tag:?}; expected \"exact\" or {{\"float\": \"eps\"}}"
                )));
            }
            ModeDto::Float { float } => {
                let eps = parse_rational(float)?;
                if eps < BigRational::from_integer(0.into()) {
                    return Err(Error::Parse(format!("float tolerance {float} is negative")));
                }
                Mode::Float { eps }
            }
        };
        let mut instance = Instance::new(algebra, mode);
        for (name, dto) in &self.operators {
            let x = operator_from_dto(&instance.algebra, dto)?;
            instance.insert_operator(name, x)?;
        }
        for (name, dto) in &self.partitions {
            let mut parts = Vec::with_capacity(dto.projections.len());
            for r in &dto.projections {
                parts.push(match r {
                    ProjectionRef::Named(n) => instance.operator(n)?.clone(),
                    ProjectionRef::Inline(d) => operator_from_dto(&instance.algebra, d)?,
                });
            }
            let partition = Partition::new(parts, &instance.mode)?;
            instance.insert_partition(name, partition)?;
        }
        Ok(instance)
    }
}

#[derive(Serialize, Deserialize)]
struct CertificateDto {
    n: usize,
    k: usize,
    units: Vec<Vec<OperatorDto>>,
    triples: Vec<(usize, usize, usize)>,
    assignment: Vec<(usize, (usize, usize))>,
    carriers: Vec<OperatorDto>,
    lambda: String,
    final_generators: Vec<OperatorDto>,
}

/// Serializes a generation certificate to canonical JSON, all operators
/// inline.
pub fn certificate_to_json(cert: &GenerationCertificate) -> String {
    let dto = CertificateDto {
        n: cert.n,
        k: cert.k,
        units: cert
            .units
            .iter()
            .map(|row| row.iter().map(operator_to_dto).collect())
            .collect(),
        triples: cert.triples.clone(),
        assignment: cert.assignment.clone(),
        carriers: cert.carriers.iter().map(operator_to_dto).collect(),
        lambda: format_rational(&cert.lambda),
        final_generators: cert.final_generators.iter().map(operator_to_dto).collect(),
    };
    let mut text = serde_json::to_string_pretty(&dto).expect("certificate DTOs always serialize");
    text.push('\n');
    text
}

/// Parses a generation certificate against the algebra it was issued in.
pub fn certificate_from_json(
    text: &str,
    algebra: &Arc<TracialAlgebra>,
) -> Result<GenerationCertificate> {
    let dto: CertificateDto = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("bad certificate file: {e}")))?;
    let units = dto
        .units
        .iter()
        .map(|row| row.iter().map(|u| operator_from_dto(algebra, u)).collect())
        .collect::<Result<Vec<Vec<Operator>>>>()?;
    let carriers = dto
        .carriers
        .iter()
        .map(|c| operator_from_dto(algebra, c))
        .collect::<Result<Vec<Operator>>>()?;
    let final_generators = dto
        .final_generators
        .iter()
        .map(|g| operator_from_dto(algebra, g))
        .collect::<Result<Vec<Operator>>>()?;
    Ok(GenerationCertificate {
        n: dto.n,
        k: dto.k,
        units,
        triples: dto.triples,
        assignment: dto.assignment,
        carriers,
        lambda: parse_rational(&dto.lambda)?,
        final_generators,
    })
}

#[derive(Serialize, Deserialize)]
struct HyperfiniteAtomDto {
    dim: usize,
    weight: String,
}

#[derive(Serialize, Deserialize)]
struct HyperfiniteSpecDto {
    #[serde(default)]
    diffuse_weight: Option<String>,
    #[serde(default)]
    atoms: Vec<HyperfiniteAtomDto>,
}

/// Parses a hyperfinite trace-decomposition file:
/// `{"diffuse_weight": "a/b", "atoms": [{"dim": k, "weight": "a/b"}]}`,
/// either field omissible.
pub fn hyperfinite_spec_from_json(text: &str) -> Result<crate::bounds::HyperfiniteSpec> {
    let dto: HyperfiniteSpecDto = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("bad hyperfinite spec file: {e}")))?;
    let diffuse = match &dto.diffuse_weight {
        Some(s) => parse_rational(s)?,
        None => BigRational::from_integer(0.into()),
    };
    let mut atoms = Vec::with_capacity(dto.atoms.len());
    for a in &dto.atoms {
        atoms.push((a.dim, parse_rational(&a.weight)?));
    }
    crate::bounds::HyperfiniteSpec::new(diffuse, atoms)
}

#[derive(Serialize, Deserialize)]
struct SupportsDto {
    supports: Vec<Vec<(usize, usize)>>,
}

/// Parses a tuple-compression support file:
/// `{"supports": [[[i, j], ...] per operator]}`.
pub fn supports_from_json(text: &str) -> Result<Vec<Vec<(usize, usize)>>> {
    let dto: SupportsDto = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("bad support file: {e}")))?;
    Ok(dto.supports)
}
