//! JSON file formats: states, tensor representations, matrix lists and reports.
//!
//! Every file carries `schema_version` and a `kind` tag. Matrices are stored
//! row-major as nested arrays; complex entries are `[re, im]` pairs.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use lu_equiv_core::qudit_state::{party_subsets, subset_label};
use lu_equiv_core::{ComplexMatrix, DensityMatrix, Hypermatrix, RealMatrix, TensorRep, Verdict};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

pub const KIND_STATE: &str = "state";
pub const KIND_TENSOR_REP: &str = "tensor-rep";
pub const KIND_MATRICES: &str = "matrices";
pub const KIND_REPORT: &str = "report";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub schema_version: u32,
    pub kind: String,
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let matrix = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        Self { schema_version: SCHEMA_VERSION, kind: KIND_STATE.into(), dims: rho.dims().to_vec(), matrix }
    }

    pub fn to_state(&self) -> CliResult<DensityMatrix> {
        let n = self.matrix.len();
        if let Some((i, row)) = self.matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(CliError::Invalid(format!("matrix row {i} has {} entries, expected {n}", row.len())));
        }
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            let [re, im] = self.matrix[i][j];
            Complex64::new(re, im)
        });
        DensityMatrix::new(self.dims.clone(), m).map_err(|e| CliError::Invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorEntry {
    pub label: String,
    /// 1-based parties.
    pub parties: Vec<usize>,
    pub shape: Vec<usize>,
    /// Nested arrays, first index outermost.
    pub values: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorFile {
    pub schema_version: u32,
    pub kind: String,
    pub dims: Vec<usize>,
    pub tensors: Vec<TensorEntry>,
}

fn nest(h: &Hypermatrix, prefix: &mut Vec<usize>) -> Value {
    let k = prefix.len();
    if k == h.order() {
        return serde_json::json!(h.get(prefix));
    }
    let items = (0..h.dims()[k])
        .map(|i| {
            prefix.push(i);
            let v = nest(h, prefix);
            prefix.pop();
            v
        })
        .collect();
    Value::Array(items)
}

fn flatten(v: &Value, shape: &[usize], out: &mut Vec<f64>, label: &str) -> CliResult<()> {
    match shape.split_first() {
        None => {
            let x = v.as_f64().ok_or_else(|| CliError::Parse(format!("{label}: expected a number, found {v}")))?;
            out.push(x);
        }
        Some((&n, rest)) => {
            let items = v
                .as_array()
                .filter(|a| a.len() == n)
                .ok_or_else(|| CliError::Parse(format!("{label}: expected an array of length {n}")))?;
            for item in items {
                flatten(item, rest, out, label)?;
            }
        }
    }
    Ok(())
}

impl TensorFile {
    pub fn from_rep(rep: &TensorRep) -> Self {
        let tensors = rep
            .iter()
            .map(|(parties, h)| TensorEntry {
                label: subset_label(&parties),
                shape: h.dims().to_vec(),
                values: nest(h, &mut Vec::new()),
                parties,
            })
            .collect();
        Self { schema_version: SCHEMA_VERSION, kind: KIND_TENSOR_REP.into(), dims: rep.dims().to_vec(), tensors }
    }

    pub fn to_rep(&self) -> CliResult<TensorRep> {
        let mut tensors = BTreeMap::new();
        for t in &self.tensors {
            if t.label != subset_label(&t.parties) {
                return Err(CliError::Parse(format!("label {} does not match parties {:?}", t.label, t.parties)));
            }
            let mut row_major = Vec::new();
            flatten(&t.values, &t.shape, &mut row_major, &t.label)?;
            let strides: Vec<usize> = (0..t.shape.len()).map(|k| t.shape[k + 1..].iter().product()).collect();
            let h = Hypermatrix::from_fn(&t.shape, |idx| {
                row_major[idx.iter().zip(&strides).map(|(i, s)| i * s).sum::<usize>()]
            });
            if tensors.insert(t.parties.clone(), h).is_some() {
                return Err(CliError::Parse(format!("tensor {} appears twice", t.label)));
            }
        }
        if tensors.len() > party_subsets(self.dims.len()).len() {
            return Err(CliError::Invalid(format!("too many tensors for {} parties", self.dims.len())));
        }
        TensorRep::new(self.dims.clone(), tensors).map_err(|e| CliError::Invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuiverSpec {
    pub vertices: usize,
    /// `[source, target]` per arrow, 0-based vertices.
    pub arrows: Vec<[usize; 2]>,
    pub dims: Vec<usize>,
}

/// Matrix lists for the `specht` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatricesFile {
    pub schema_version: u32,
    pub kind: String,
    pub a: Vec<Vec<Vec<f64>>>,
    pub b: Vec<Vec<Vec<f64>>>,
    /// Sizes of the two groups (futorny only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quiver: Option<QuiverSpec>,
}

pub fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> CliResult<RealMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    if r == 0 || c == 0 {
        return Err(CliError::Parse(format!("{what}: empty matrix")));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, x)| x.len() != c) {
        return Err(CliError::Parse(format!("{what}: row {i} has {} entries, expected {c}", row.len())));
    }
    Ok(RealMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

impl MatricesFile {
    pub fn sides(&self) -> CliResult<(Vec<RealMatrix>, Vec<RealMatrix>)> {
        let conv = |side: &[Vec<Vec<f64>>], name: &str| -> CliResult<Vec<RealMatrix>> {
            side.iter().enumerate().map(|(i, m)| matrix_from_rows(m, &format!("{name}[{i}]"))).collect()
        };
        Ok((conv(&self.a, "a")?, conv(&self.b, "b")?))
    }
}

/// A loaded input, as either a state or a tensor representation.
#[derive(Debug, Clone)]
pub enum Input {
    State(DensityMatrix),
    TensorRep(TensorRep),
}

impl Input {
    pub fn kind(&self) -> &'static str {
        match self {
            Input::State(_) => KIND_STATE,
            Input::TensorRep(_) => KIND_TENSOR_REP,
        }
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            Input::State(r) => r.dims(),
            Input::TensorRep(t) => t.dims(),
        }
    }

    pub fn tensor_rep(&self) -> TensorRep {
        match self {
            Input::State(r) => lu_equiv_core::qudit_state::extract(r),
            Input::TensorRep(t) => t.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputInfo {
    pub role: String,
    pub kind: String,
    pub sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
}

/// Raw bytes, their digest and the parsed JSON document.
pub struct RawFile {
    pub sha256: String,
    pub doc: Value,
}

pub fn read_json(path: &Path) -> CliResult<RawFile> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let doc: Value =
        serde_json::from_slice(&bytes).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let version = doc.get("schema_version").and_then(Value::as_u64);
    if version != Some(SCHEMA_VERSION as u64) {
        return Err(CliError::Parse(format!(
            "{}: unsupported or missing schema_version (expected {SCHEMA_VERSION})",
            path.display()
        )));
    }
    Ok(RawFile { sha256: hex::encode(Sha256::digest(&bytes)), doc })
}

fn kind_of(raw: &RawFile) -> &str {
    raw.doc.get("kind").and_then(Value::as_str).unwrap_or("")
}

fn decode<T: for<'de> Deserialize<'de>>(raw: &RawFile, path: &Path) -> CliResult<T> {
    T::deserialize(&raw.doc).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn load_input(path: &Path, role: &str) -> CliResult<(Input, InputInfo)> {
    let raw = read_json(path)?;
    let input = match kind_of(&raw) {
        KIND_STATE => Input::State(decode::<StateFile>(&raw, path)?.to_state()?),
        KIND_TENSOR_REP => Input::TensorRep(decode::<TensorFile>(&raw, path)?.to_rep()?),
        other => {
            return Err(CliError::Parse(format!(
                "{}: kind '{other}' is not '{KIND_STATE}' or '{KIND_TENSOR_REP}'",
                path.display()
            )))
        }
    };
    let info = InputInfo {
        role: role.into(),
        kind: input.kind().into(),
        sha256: raw.sha256,
        dims: Some(input.dims().to_vec()),
    };
    Ok((input, info))
}

pub fn load_state(path: &Path) -> CliResult<DensityMatrix> {
    let raw = read_json(path)?;
    if kind_of(&raw) != KIND_STATE {
        return Err(CliError::Parse(format!("{}: expected kind '{KIND_STATE}'", path.display())));
    }
    decode::<StateFile>(&raw, path)?.to_state()
}

pub fn load_tensor_rep(path: &Path) -> CliResult<TensorRep> {
    let raw = read_json(path)?;
    if kind_of(&raw) != KIND_TENSOR_REP {
        return Err(CliError::Parse(format!("{}: expected kind '{KIND_TENSOR_REP}'", path.display())));
    }
    decode::<TensorFile>(&raw, path)?.to_rep()
}

pub fn load_matrices(path: &Path) -> CliResult<(MatricesFile, InputInfo)> {
    let raw = read_json(path)?;
    if kind_of(&raw) != KIND_MATRICES {
        return Err(CliError::Parse(format!("{}: expected kind '{KIND_MATRICES}'", path.display())));
    }
    let file: MatricesFile = decode(&raw, path)?;
    let info = InputInfo { role: "matrices".into(), kind: KIND_MATRICES.into(), sha256: raw.sha256, dims: None };
    Ok((file, info))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub horizon: usize,
    pub tol: f64,
    pub exhaustive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub battery: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<String>,
    /// Which pipeline ran, e.g. `lu-2qubit` or `quasi-lu-2`.
    pub check: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    pub check: String,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportFile<R: Serialize> {
    pub schema_version: u32,
    pub kind: &'static str,
    pub command: String,
    pub inputs: Vec<InputInfo>,
    pub config: RunConfig,
    pub verdict: Verdict,
    pub exit_code: i32,
    pub reason: String,
    pub horizon_note: String,
    pub residuals: Vec<ResidualRow>,
    pub report: R,
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    std::fs::write(path, to_pretty(value)?).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use lu_equiv_core::qudit_state::{extract, random_density};

    #[test]
    fn state_file_round_trip() {
        let rho = random_density(&[2, 3], 4).unwrap();
        let file = StateFile::from_state(&rho);
        let text = serde_json::to_string(&file).unwrap();
        let back: StateFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_state().unwrap(), rho);
    }

    #[test]
    fn tensor_file_round_trip() {
        let rep = extract(&random_density(&[2, 2, 3], 1).unwrap());
        let file = TensorFile::from_rep(&rep);
        assert_eq!(file.tensors[0].label, "T1");
        assert_eq!(file.tensors.last().unwrap().label, "T123");
        let text = serde_json::to_string(&file).unwrap();
        let back: TensorFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_rep().unwrap(), rep);
    }

    #[test]
    fn nested_values_are_row_major() {
        let h = Hypermatrix::from_fn(&[2, 3], |i| (10 * i[0] + i[1]) as f64);
        let v = nest(&h, &mut Vec::new());
        assert_eq!(v, serde_json::json!([[0.0, 1.0, 2.0], [10.0, 11.0, 12.0]]));
        let mut flat = Vec::new();
        flatten(&v, &[2, 3], &mut flat, "x").unwrap();
        assert_eq!(flat, vec![0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        assert!(flatten(&v, &[3, 2], &mut Vec::new(), "x").is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        let file = StateFile { schema_version: 1, kind: "state".into(), dims: vec![2], matrix: vec![vec![[1.0, 0.0]]] };
        assert!(matches!(file.to_state(), Err(CliError::Invalid(_))));
        assert!(matches!(matrix_from_rows(&[vec![1.0], vec![1.0, 2.0]], "m"), Err(CliError::Parse(_))));
    }
}
