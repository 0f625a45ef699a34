//! Representation documents: loading with field-level diagnostics,
//! determinant renormalisation and canonical serialisation.

use serde::Serialize;
use serde_json::{Map, Value};

use morsecert_core::linalg::{determinant, Mat};
use morsecert_core::{FaceType, GroupElement, Mp, Point, Real, Tolerances};

/// Generators whose determinant is this close to one are rescaled onto `SL(n)`.
pub const DETERMINANT_SLACK: f64 = 1e-6;

/// Determinants of input matrices are evaluated at this width so that
/// ill-conditioned generators are judged on their entries, not on rounding.
type Exact = Mp<256>;

fn exact_determinant(n: usize, entries: &[f64]) -> f64 {
    determinant(&Mat::<f64>::from_row_slice(n, n, entries).lift::<Exact>()).to_f64()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}{field}: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct SchemaError {
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Renormalization {
    pub generator: usize,
    pub determinant: f64,
    /// Factor `det^{-1/n}` applied to every entry.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationInput {
    pub n: usize,
    pub rank: usize,
    /// Row-major `n × n` matrices, after renormalisation.
    pub generators: Vec<Vec<f64>>,
    pub face: Vec<usize>,
    pub basepoint: Option<Vec<Vec<f64>>>,
    pub seed: u64,
    pub renormalized: Vec<Renormalization>,
}

const FIELDS: [&str; 6] = ["n", "rank", "generators", "face", "basepoint", "seed"];

struct Context<'a> {
    text: &'a str,
}

impl Context<'_> {
    /// Line of the first occurrence of `"key"` in the document.
    fn line_of(&self, key: &str) -> Option<usize> {
        let needle = format!("\"{key}\"");
        self.text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
    }

    fn error(&self, field: &str, message: impl Into<String>) -> SchemaError {
        let key = field.split(['[', '.']).next().unwrap_or(field);
        SchemaError { field: field.to_string(), line: self.line_of(key), message: message.into() }
    }
}

fn as_usize(ctx: &Context, v: &Value, field: &str) -> Result<usize, SchemaError> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| ctx.error(field, "expected a non-negative integer"))
}

fn as_numbers(ctx: &Context, v: &Value, field: &str) -> Result<Vec<f64>, SchemaError> {
    let arr = v.as_array().ok_or_else(|| ctx.error(field, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64().filter(|f| f.is_finite()).ok_or_else(|| ctx.error(&format!("{field}[{i}]"), "expected a finite number"))
        })
        .collect()
}

/// Parses and validates a representation document.
pub fn load_representation(bytes: &[u8]) -> Result<RepresentationInput, SchemaError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| SchemaError { field: "document".into(), line: None, message: format!("not UTF-8: {e}") })?;
    let ctx = Context { text };
    let value: Value = serde_json::from_str(text)
        .map_err(|e| SchemaError { field: "document".into(), line: Some(e.line()), message: e.to_string() })?;
    let obj = value.as_object().ok_or_else(|| ctx.error("document", "expected a JSON object"))?;
    if let Some(k) = obj.keys().find(|k| !FIELDS.contains(&k.as_str())) {
        return Err(ctx.error(k, "unknown field"));
    }
    let get = |k: &str| obj.get(k).ok_or_else(|| ctx.error(k, "missing field"));

    let n = as_usize(&ctx, get("n")?, "n")?;
    if n < 2 {
        return Err(ctx.error("n", "matrix size must be at least 2"));
    }
    let rank = as_usize(&ctx, get("rank")?, "rank")?;
    if rank == 0 || rank > 26 {
        return Err(ctx.error("rank", "rank must lie between 1 and 26"));
    }
    let gens_value = get("generators")?.as_array().ok_or_else(|| ctx.error("generators", "expected an array of matrices"))?;
    if gens_value.len() != rank {
        return Err(ctx.error("generators", format!("expected {rank} generators, found {}", gens_value.len())));
    }
    let mut generators = Vec::with_capacity(rank);
    let mut renormalized = Vec::new();
    for (i, g) in gens_value.iter().enumerate() {
        let field = format!("generators[{i}]");
        let mut entries = as_numbers(&ctx, g, &field)?;
        if entries.len() != n * n {
            return Err(ctx.error(&field, format!("expected {} entries, found {}", n * n, entries.len())));
        }
        let det = exact_determinant(n, &entries);
        if !((det - 1.0).abs() <= DETERMINANT_SLACK) {
            return Err(ctx.error(&field, format!("determinant {det} is not within {DETERMINANT_SLACK} of 1")));
        }
        if det != 1.0 {
            let scale = det.powf(-1.0 / n as f64);
            entries.iter_mut().for_each(|x| *x *= scale);
            renormalized.push(Renormalization { generator: i, determinant: det, scale });
        }
        generators.push(entries);
    }
    let face = as_numbers(&ctx, get("face")?, "face")?
        .into_iter()
        .map(|x| if x.fract() == 0.0 && x >= 0.0 { Ok(x as usize) } else { Err(ctx.error("face", "expected integers")) })
        .collect::<Result<Vec<_>, _>>()?;
    if face.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ctx.error("face", "dimensions must be strictly increasing"));
    }
    FaceType::new(n, face.clone()).map_err(|e| ctx.error("face", e.to_string()))?;
    let basepoint = match obj.get("basepoint") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let rows = v.as_array().ok_or_else(|| ctx.error("basepoint", "expected an array of rows"))?;
            if rows.len() != n {
                return Err(ctx.error("basepoint", format!("expected {n} rows, found {}", rows.len())));
            }
            let rows = rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let row = as_numbers(&ctx, r, &format!("basepoint[{i}]"))?;
                    if row.len() != n {
                        return Err(ctx.error(&format!("basepoint[{i}]"), format!("expected {n} entries")));
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let flat: Vec<f64> = rows.concat();
            Point::<f64>::new(Mat::from_row_slice(n, n, &flat), &Tolerances::default())
                .map_err(|e| ctx.error("basepoint", e.to_string()))?;
            Some(rows)
        }
    };
    let seed = get("seed")?.as_u64().ok_or_else(|| ctx.error("seed", "expected a non-negative integer"))?;
    Ok(RepresentationInput { n, rank, generators, face, basepoint, seed, renormalized })
}

impl RepresentationInput {
    pub fn face_type(&self) -> FaceType {
        FaceType::new(self.n, self.face.clone()).expect("validated on load")
    }

    /// Rescaled entries are rounded to double precision, which leaves the
    /// determinant of a badly conditioned generator off one by up to about
    /// `cond · 1e-16`; the load-time slack is accepted here as well.
    pub fn group_elements(&self) -> Vec<GroupElement<f64>> {
        let tol = Tolerances { linalg: DETERMINANT_SLACK, ..Tolerances::default() };
        self.generators
            .iter()
            .map(|g| {
                let mat = Mat::<f64>::from_row_slice(self.n, self.n, g).lift::<Exact>();
                GroupElement::new(mat, &tol).expect("validated on load").lift::<f64>()
            })
            .collect()
    }

    pub fn basepoint_point(&self) -> Point<f64> {
        match &self.basepoint {
            None => Point::identity(self.n),
            Some(rows) => {
                Point::new(Mat::from_row_slice(self.n, self.n, &rows.concat()), &Tolerances::default()).expect("validated on load")
            }
        }
    }

    /// Canonical JSON: sorted key order, two-space indentation, trailing newline.
    pub fn to_canonical_json(&self) -> Vec<u8> {
        let mut obj = Map::new();
        obj.insert("n".into(), self.n.into());
        obj.insert("rank".into(), self.rank.into());
        obj.insert("generators".into(), self.generators.clone().into());
        obj.insert("face".into(), self.face.clone().into());
        if let Some(b) = &self.basepoint {
            obj.insert("basepoint".into(), b.clone().into());
        }
        obj.insert("seed".into(), self.seed.into());
        let mut out = serde_json::to_vec_pretty(&Value::Object(obj)).expect("serialisable");
        out.push(b'\n');
        out
    }
}
