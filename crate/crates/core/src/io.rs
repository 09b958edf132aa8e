//! File formats: state files, tensor product structures, bijection tables,
//! custom observables, and the JSON number convention shared by all reports.
//!
//! Every floating-point number is written with 17 significant digits in
//! scientific notation, which round-trips an `f64` exactly.

use std::collections::BTreeMap;
use std::io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use thiserror::Error;

use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::state::{Observable, StateVector};
use crate::tps::{Factorization, IndexBijection, TensorProductStructure};

/// Allowed `|‖ψ‖ - 1|` in a state file before it is renormalized with a warning.
pub const FILE_NORM_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("malformed file: {0}")]
    Malformed(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("bad bijection: {0}")]
    Bijection(String),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// Formats an `f64` with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty JSON formatter that writes floats via [`format_f64`].
pub struct ExactFloatFormatter<'a> {
    pretty: PrettyFormatter<'a>,
}

impl Default for ExactFloatFormatter<'_> {
    fn default() -> Self {
        Self {
            pretty: PrettyFormatter::with_indent(b"  "),
        }
    }
}

impl Formatter for ExactFloatFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(format_f64(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.pretty.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.pretty.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(writer)
    }
}

/// Serializes `value` as pretty JSON with exact floats and a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloatFormatter::default());
    value
        .serialize(&mut ser)
        .expect("in-memory serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn pairs_from_complex(values: &[Complex64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

fn complex_from_pairs(pairs: &[[f64; 2]]) -> Vec<Complex64> {
    pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

/// Serialized tensor product structure: factor dimensions plus the
/// factorization unitary as row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TpsRecord {
    pub d1: usize,
    pub d2: usize,
    pub unitary: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_left: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_right: Option<Vec<String>>,
}

impl TpsRecord {
    pub fn from_tps(tps: &TensorProductStructure) -> Self {
        Self {
            d1: tps.d1(),
            d2: tps.d2(),
            unitary: pairs_from_complex(tps.unitary().as_slice()),
            label_left: tps.label_left().map(<[String]>::to_vec),
            label_right: tps.label_right().map(<[String]>::to_vec),
        }
    }

    pub fn to_tps(&self) -> Result<TensorProductStructure, FormatError> {
        let n = self.d1 * self.d2;
        if self.unitary.len() != n * n {
            return Err(FormatError::Dimension(format!(
                "unitary has {} entries, expected {} for d1={} d2={}",
                self.unitary.len(),
                n * n,
                self.d1,
                self.d2
            )));
        }
        let u = ComplexMatrix::new(n, n, complex_from_pairs(&self.unitary))
            .map_err(|e| FormatError::Malformed(e.to_string()))?;
        let tps = TensorProductStructure::from_unitary(self.d1, self.d2, u)
            .map_err(|e| FormatError::Malformed(e.to_string()))?
            .with_labels(self.label_left.clone(), self.label_right.clone())
            .map_err(|e| FormatError::Dimension(e.to_string()))?;
        Ok(tps.canonicalize())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFileRecord {
    dims: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tps: Option<TpsRecord>,
    amplitudes: Vec<[f64; 2]>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

/// A pure state together with the structure it is described in.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub tps: TensorProductStructure,
    pub state: StateVector,
    pub metadata: BTreeMap<String, String>,
}

/// A loaded state file plus any warnings raised while loading it.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl StateFile {
    pub fn new(tps: TensorProductStructure, state: StateVector) -> Self {
        Self {
            tps,
            state,
            metadata: BTreeMap::new(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.tps.dims()
    }

    pub fn parse(text: &str) -> Result<Loaded<StateFile>, FormatError> {
        let record: StateFileRecord = serde_json::from_str(text)?;
        let [d1, d2] = record.dims;
        if d1 == 0 || d2 == 0 {
            return Err(FormatError::Malformed("dims must be positive".into()));
        }
        if record.amplitudes.len() != d1 * d2 {
            return Err(FormatError::Dimension(format!(
                "{} amplitudes for dims [{d1}, {d2}]",
                record.amplitudes.len()
            )));
        }
        let tps = match &record.tps {
            None => TensorProductStructure::trivial(d1, d2)
                .map_err(|e| FormatError::Malformed(e.to_string()))?,
            Some(t) => {
                if (t.d1, t.d2) != (d1, d2) {
                    return Err(FormatError::Dimension(format!(
                        "tps is {}x{} but dims are [{d1}, {d2}]",
                        t.d1, t.d2
                    )));
                }
                t.to_tps()?
            }
        };
        let v = ComplexVector::new(complex_from_pairs(&record.amplitudes))
            .map_err(|e| FormatError::Malformed(e.to_string()))?;
        let mut warnings = Vec::new();
        let norm = v.norm();
        if (norm - 1.0).abs() > FILE_NORM_TOL {
            warnings.push(format!("state norm {norm} differs from 1; normalizing"));
        }
        // amplitudes within the state tolerance are kept bit-exact
        let state = match StateVector::new(v.clone()) {
            Ok(s) => s,
            Err(_) => {
                StateVector::normalized(v).map_err(|e| FormatError::Malformed(e.to_string()))?
            }
        };
        Ok(Loaded {
            value: StateFile {
                tps,
                state,
                metadata: record.metadata,
            },
            warnings,
        })
    }

    pub fn to_json(&self) -> String {
        let (d1, d2) = self.dims();
        let record = StateFileRecord {
            dims: [d1, d2],
            tps: match self.tps.factorization() {
                Factorization::Identity
                    if self.tps.label_left().is_none() && self.tps.label_right().is_none() =>
                {
                    None
                }
                _ => Some(TpsRecord::from_tps(&self.tps)),
            },
            amplitudes: pairs_from_complex(self.state.vector().as_slice()),
            metadata: self.metadata.clone(),
        };
        to_json(&record)
    }
}

/// Parses a standalone structure file (a [`TpsRecord`]).
pub fn parse_tps(text: &str) -> Result<TensorProductStructure, FormatError> {
    let record: TpsRecord = serde_json::from_str(text)?;
    record.to_tps()
}

pub fn tps_to_json(tps: &TensorProductStructure) -> String {
    to_json(&TpsRecord::from_tps(tps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BijectionRecord {
    source: [usize; 2],
    #[serde(default)]
    target: Option<[usize; 2]>,
    /// `map[i·d2 + j] = [a, b]`.
    map: Vec<[usize; 2]>,
}

/// Parses a bijection table `{"source": [d1, d2], "target": [e1, e2]?, "map": [[a, b], …]}`.
pub fn parse_bijection(text: &str) -> Result<IndexBijection, FormatError> {
    let record: BijectionRecord = serde_json::from_str(text)?;
    let source = (record.source[0], record.source[1]);
    let target = record.target.map_or(source, |t| (t[0], t[1]));
    let pairs: Vec<(usize, usize)> = record.map.iter().map(|p| (p[0], p[1])).collect();
    IndexBijection::from_table(source, target, &pairs)
        .map_err(|e| FormatError::Bijection(e.to_string()))
}

pub fn bijection_to_json(bij: &IndexBijection) -> String {
    let (d1, d2) = bij.source_dims();
    let (e1, e2) = bij.target_dims();
    let map = bij
        .forward_table()
        .iter()
        .map(|&t| [t / e2, t % e2])
        .collect();
    to_json(&BijectionRecord {
        source: [d1, d2],
        target: Some([e1, e2]),
        map,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRecord {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

/// Parses a Hermitian matrix file `{"rows": n, "cols": n, "entries": [[re, im], …]}`.
pub fn parse_observable(text: &str) -> Result<Observable, FormatError> {
    let record: MatrixRecord = serde_json::from_str(text)?;
    let m = ComplexMatrix::new(
        record.rows,
        record.cols,
        complex_from_pairs(&record.entries),
    )
    .map_err(|e| FormatError::Dimension(e.to_string()))?;
    Observable::new(m).map_err(|e| FormatError::Malformed(e.to_string()))
}

pub fn observable_to_json(op: &Observable) -> String {
    let m = op.matrix();
    to_json(&MatrixRecord {
        rows: m.rows(),
        cols: m.cols(),
        entries: pairs_from_complex(m.as_slice()),
    })
}
