use std::path::{Path, PathBuf};

use serde::Serialize;

use lu_equiv_core::equiv2::{check_lu_2qubit, check_quasi_lu_2};
use lu_equiv_core::equiv3::{check_lu_3qubit, check_quasi_lu_3};
use lu_equiv_core::report::EquivalenceReport;
use lu_equiv_core::qudit_state::{extract, reconstruct};
use lu_equiv_core::specht::{
    futorny_two_block_check, jing_check, quiver_cycle_check, specht_check, IdentityReport, Quiver, QuiverMatrixRep,
};
use lu_equiv_core::{generate_pair, Battery, CheckConfig, LuError, PairMode, Rep2, Rep3};

use crate::error::{CliError, CliResult};
use crate::formats::{
    load_input, load_matrices, load_state, load_tensor_rep, to_pretty, write_json, Input, InputInfo, ReportFile,
    ResidualRow, RunConfig, StateFile, TensorFile, KIND_REPORT, SCHEMA_VERSION,
};

/// Writes `value` to `out`, or to stdout when no path is given.
fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => write_json(p, value),
        None => {
            print!("{}", to_pretty(value)?);
            Ok(())
        }
    }
}

pub fn extract_cmd(state: &Path, out: Option<&Path>) -> CliResult<i32> {
    let rho = load_state(state)?;
    emit(&TensorFile::from_rep(&extract(&rho)), out)?;
    Ok(0)
}

pub fn reconstruct_cmd(tensors: &Path, out: Option<&Path>) -> CliResult<i32> {
    let rep = load_tensor_rep(tensors)?;
    let rho = reconstruct(&rep).map_err(|e| CliError::Invalid(e.to_string()))?;
    emit(&StateFile::from_state(&rho), out)?;
    Ok(0)
}

pub fn gen_pair_cmd(dims: &[usize], seed: u64, mode: PairMode, out_a: &Path, out_b: &Path) -> CliResult<i32> {
    let pair = generate_pair(dims, mode, seed)?;
    write_json(out_a, &StateFile::from_state(&pair.a))?;
    write_json(out_b, &StateFile::from_state(&pair.b))?;
    if let (Some(p), Some(alphas)) = (pair.mixing, &pair.alphas) {
        println!("mode {mode}, seed {seed}: mixing weight {p}, signs {alphas:?}");
    } else {
        println!("mode {mode}, seed {seed}");
    }
    Ok(0)
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub a: PathBuf,
    pub b: PathBuf,
    pub cfg: CheckConfig,
    /// Skip the qubit LU upgrade even when it applies.
    pub quasi: bool,
    pub json: Option<PathBuf>,
}

fn residual_rows(rep: &EquivalenceReport, prefix: &str, rows: &mut Vec<ResidualRow>) {
    for n in &rep.norms {
        rows.push(ResidualRow {
            check: format!("{prefix}norm"),
            label: n.label.clone(),
            lhs: Some(n.lhs),
            rhs: Some(n.rhs),
            residual: n.residual,
            passed: n.passed,
        });
    }
    for ids in &rep.identities {
        identity_rows(ids, prefix, rows);
    }
    if let Some(up) = &rep.upgrade {
        for s in up.determinants.iter().chain(&up.signs) {
            rows.push(ResidualRow {
                check: format!("{prefix}upgrade"),
                label: s.label.clone(),
                lhs: Some(s.lhs),
                rhs: Some(s.rhs),
                residual: (s.lhs - s.rhs).abs(),
                passed: s.passed,
            });
        }
    }
    if let Some(pt) = &rep.partial_trace {
        residual_rows(pt, &format!("{prefix}partial-trace/"), rows);
    }
}

fn identity_rows(ids: &IdentityReport, prefix: &str, rows: &mut Vec<ResidualRow>) {
    rows.push(ResidualRow {
        check: format!("{prefix}{}", ids.criterion),
        label: format!("max word residual up to length {}", ids.horizon),
        lhs: None,
        rhs: None,
        residual: ids.max_residual,
        passed: !ids.is_distinguished(),
    });
    if let Some(v) = &ids.first_violation {
        rows.push(ResidualRow {
            check: format!("{prefix}{}", ids.criterion),
            label: format!("first violation [{}]", v.word_text),
            lhs: Some(v.lhs),
            rhs: Some(v.rhs),
            residual: v.residual,
            passed: false,
        });
    }
}

fn load_pair(opts: &CheckOptions) -> CliResult<(Input, Input, Vec<InputInfo>)> {
    let (a, ia) = load_input(&opts.a, "a")?;
    let (b, ib) = load_input(&opts.b, "b")?;
    if a.dims() != b.dims() {
        return Err(LuError::DimensionMismatch(format!("inputs have dims {:?} and {:?}", a.dims(), b.dims())).into());
    }
    Ok((a, b, vec![ia, ib]))
}

fn finish(command: &str, inputs: Vec<InputInfo>, config: RunConfig, report: EquivalenceReport, json: Option<&Path>) -> CliResult<i32> {
    let mut residuals = Vec::new();
    residual_rows(&report, "", &mut residuals);
    let file = ReportFile {
        schema_version: SCHEMA_VERSION,
        kind: KIND_REPORT,
        command: command.into(),
        inputs,
        config,
        verdict: report.verdict,
        exit_code: report.verdict.exit_code(),
        reason: report.reason.clone(),
        horizon_note: report.horizon_note.clone(),
        residuals,
        report,
    };
    write_report(&file, json)
}

fn write_report<R: Serialize>(file: &ReportFile<R>, json: Option<&Path>) -> CliResult<i32> {
    if let Some(p) = json {
        write_json(p, file)?;
        println!("{}: {}", file.verdict, file.reason);
    } else {
        print!("{}", to_pretty(file)?);
    }
    Ok(file.exit_code)
}

fn run_config(cfg: &CheckConfig, check: &str, battery: Option<u8>, criterion: Option<&str>) -> RunConfig {
    RunConfig {
        horizon: cfg.max_len,
        tol: cfg.tol,
        exhaustive: cfg.exhaustive,
        battery,
        criterion: criterion.map(str::to_string),
        check: check.into(),
    }
}

pub fn check2_cmd(opts: &CheckOptions) -> CliResult<i32> {
    let (a, b, inputs) = load_pair(opts)?;
    if a.dims().len() != 2 {
        return Err(LuError::WrongArity { expected: 2, got: a.dims().len() }.into());
    }
    let ra = Rep2::from_tensor_rep(&a.tensor_rep())?;
    let rb = Rep2::from_tensor_rep(&b.tensor_rep())?;
    let report = if !opts.quasi && a.dims() == [2, 2] {
        check_lu_2qubit(&ra, &rb, &opts.cfg)?
    } else {
        check_quasi_lu_2(&ra, &rb, &opts.cfg)?
    };
    let config = run_config(&opts.cfg, &report.check, None, None);
    finish("check2", inputs, config, report, opts.json.as_deref())
}

pub fn check3_cmd(opts: &CheckOptions, battery: u8) -> CliResult<i32> {
    let (a, b, inputs) = load_pair(opts)?;
    if a.dims().len() != 3 {
        return Err(LuError::WrongArity { expected: 3, got: a.dims().len() }.into());
    }
    let bat = if battery == 2 { Battery::V2 } else { Battery::V1 };
    let ra = Rep3::from_tensor_rep(&a.tensor_rep())?;
    let rb = Rep3::from_tensor_rep(&b.tensor_rep())?;
    let report = if !opts.quasi && a.dims() == [2, 2, 2] {
        check_lu_3qubit(&ra, &rb, bat, &opts.cfg)?
    } else {
        check_quasi_lu_3(&ra, &rb, bat, &opts.cfg)?
    };
    let config = run_config(&opts.cfg, &report.check, Some(battery), None);
    finish("check3", inputs, config, report, opts.json.as_deref())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Criterion {
    Specht,
    Jing,
    Futorny,
    Quiver,
}

impl Criterion {
    fn as_str(self) -> &'static str {
        match self {
            Criterion::Specht => "specht",
            Criterion::Jing => "jing",
            Criterion::Futorny => "futorny",
            Criterion::Quiver => "quiver",
        }
    }
}

pub fn specht_cmd(path: &Path, criterion: Criterion, cfg: &CheckConfig, json: Option<&Path>) -> CliResult<i32> {
    let (file, info) = load_matrices(path)?;
    let (a, b) = file.sides()?;
    if a.len() != b.len() {
        return Err(LuError::DimensionMismatch(format!("{} matrices on side a, {} on side b", a.len(), b.len())).into());
    }
    let report = match criterion {
        Criterion::Specht => {
            if a.len() != 1 {
                return Err(LuError::DimensionMismatch(format!("specht takes one matrix per side, got {}", a.len())).into());
            }
            specht_check(&a[0], &b[0], cfg)?
        }
        Criterion::Jing => jing_check(&a, &b, cfg)?,
        Criterion::Futorny => {
            let [k, rest] = file
                .groups
                .ok_or_else(|| LuError::InvalidConfig("futorny needs \"groups\": [k, l - k]".into()))?;
            if k + rest != a.len() || k == 0 || rest == 0 {
                return Err(LuError::DimensionMismatch(format!(
                    "groups {k} + {rest} do not split {} matrices into two nonempty groups",
                    a.len()
                ))
                .into());
            }
            futorny_two_block_check(&a[..k], &a[k..], &b[..k], &b[k..], cfg)?
        }
        Criterion::Quiver => {
            let spec = file.quiver.as_ref().ok_or_else(|| LuError::InvalidConfig("quiver needs a \"quiver\" object".into()))?;
            let q = Quiver::new(spec.vertices, spec.arrows.iter().map(|&[s, t]| (s, t)).collect())?;
            let qa = QuiverMatrixRep::new(&q, spec.dims.clone(), a)?;
            let qb = QuiverMatrixRep::new(&q, spec.dims.clone(), b)?;
            quiver_cycle_check(&q, &qa, &qb, cfg)?
        }
    };
    let mut residuals = Vec::new();
    identity_rows(&report, "", &mut residuals);
    let reason = match &report.first_violation {
        Some(v) => format!("trace identity fails at word [{}] of length {}", v.word_text, v.len()),
        None => format!("no trace identity fails up to length {}", report.horizon),
    };
    let file = ReportFile {
        schema_version: SCHEMA_VERSION,
        kind: KIND_REPORT,
        command: "specht".into(),
        inputs: vec![info],
        config: run_config(cfg, criterion.as_str(), None, Some(criterion.as_str())),
        verdict: report.verdict,
        exit_code: report.verdict.exit_code(),
        reason,
        horizon_note: report.note.clone(),
        residuals,
        report,
    };
    write_report(&file, json)
}
