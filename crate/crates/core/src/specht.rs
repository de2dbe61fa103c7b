//! Trace-identity engine: words over real matrix alphabets, necklace
//! enumeration and the orthogonal-equivalence criteria built on them.
//!
//! Every criterion reduces to comparing `Tr(w(A))` against `Tr(w(B))` for
//! words `w` up to some length. Traces are invariant under rotation of the
//! word, so only one representative per rotation class (a necklace) is
//! evaluated. Words of one length are generated in lexicographic order by a
//! prenecklace DFS that carries the running matrix products, and the first
//! letter is split across a rayon pool.
//!
//! A report only certifies equivalence when the horizon reaches the
//! completeness ceiling of its criterion. Below the ceiling a clean sweep is
//! reported as [`Verdict::ConsistentAtHorizon`].

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LuError, LuResult};
use crate::hypermatrix::RealMatrix;
use crate::verdict::Verdict;

pub const DEFAULT_HORIZON: usize = 6;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const THREADS_ENV: &str = "LU_EQUIV_THREADS";

/// Statement attached to every report that is not a violation.
pub const HORIZON_NOTE: &str = "distinguished verdicts are certified; a consistent verdict only certifies \
that no trace identity fails up to the stated horizon, and is a proof of equivalence only when the horizon \
reaches the ceiling";

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
    })
}

/// Square letters of a common size.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    letters: Vec<RealMatrix>,
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new(letters: Vec<RealMatrix>, labels: Vec<String>) -> LuResult<Self> {
        let first = letters.first().ok_or_else(|| LuError::ShapeMismatch("empty alphabet".into()))?;
        let n = first.nrows();
        if let Some(bad) = letters.iter().find(|m| m.shape() != (n, n)) {
            return Err(LuError::ShapeMismatch(format!(
                "alphabet letters must all be {n}x{n}, found {}x{}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        if labels.len() != letters.len() {
            return Err(LuError::ShapeMismatch(format!("{} labels for {} letters", labels.len(), letters.len())));
        }
        Ok(Self { letters, labels })
    }

    pub fn unlabeled(letters: Vec<RealMatrix>) -> LuResult<Self> {
        let labels = (0..letters.len()).map(|i| format!("x{i}")).collect();
        Self::new(letters, labels)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn size(&self) -> usize {
        self.letters[0].nrows()
    }

    pub fn letters(&self) -> &[RealMatrix] {
        &self.letters
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Lexicographically least rotation of `w`.
pub fn cyclic_canonical(w: &[usize]) -> Vec<usize> {
    let n = w.len();
    if n == 0 {
        return Vec::new();
    }
    let (mut i, mut j, mut k) = (0, 1, 0);
    while i < n && j < n && k < n {
        let (a, b) = (w[(i + k) % n], w[(j + k) % n]);
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    let start = i.min(j);
    (0..n).map(|t| w[(start + t) % n]).collect()
}

/// Necklaces over `k` letters of length `1..=max_len`, by length then lexicographically.
pub fn enumerate_words(k: usize, max_len: usize) -> Vec<Vec<usize>> {
    fn gen(a: &mut Vec<usize>, t: usize, p: usize, n: usize, k: usize, out: &mut Vec<Vec<usize>>) {
        if t > n {
            if n.is_multiple_of(p) {
                out.push(a[1..=n].to_vec());
            }
            return;
        }
        let start = a[t - p];
        for j in start..k {
            a[t] = j;
            gen(a, t + 1, if j == start { p } else { t }, n, k, out);
        }
    }
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    for n in 1..=max_len {
        let mut a = vec![0; n + 1];
        gen(&mut a, 1, 1, n, k, &mut out);
    }
    out
}

/// `Tr(x_{w_1} x_{w_2} ⋯ x_{w_n})`.
pub fn trace_of_word(alphabet: &Alphabet, w: &[usize]) -> LuResult<f64> {
    if w.is_empty() {
        return Err(LuError::ShapeMismatch("empty word".into()));
    }
    if let Some(&bad) = w.iter().find(|&&i| i >= alphabet.len()) {
        return Err(LuError::ShapeMismatch(format!("letter {bad} not in an alphabet of size {}", alphabet.len())));
    }
    let mut p = alphabet.letters[w[0]].clone();
    for &i in &w[1..] {
        p = &p * &alphabet.letters[i];
    }
    Ok(p.trace())
}

/// `Tr(P L)` without forming the product.
fn trace_of_product(p: &RealMatrix, l: &RealMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            acc += p[(i, j)] * l[(j, i)];
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub max_len: usize,
    pub tol: f64,
    /// Keep sweeping after the first violation to collect the full residual profile.
    pub exhaustive: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { max_len: DEFAULT_HORIZON, tol: DEFAULT_TOL, exhaustive: false }
    }
}

impl CheckConfig {
    pub fn with_horizon(max_len: usize) -> Self {
        Self { max_len, ..Self::default() }
    }

    pub fn validate(&self) -> LuResult<()> {
        if self.max_len == 0 {
            return Err(LuError::InvalidConfig("horizon must be at least 1".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(LuError::InvalidConfig(format!("tolerance {} is not a finite nonnegative number", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub word: Vec<usize>,
    pub word_text: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(1, |lhs|)`.
    pub residual: f64,
}

impl Violation {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

/// Completeness bound for a criterion, with the formula that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ceiling {
    pub value: u64,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub criterion: String,
    pub verdict: Verdict,
    /// Longest word length actually compared.
    pub horizon: usize,
    pub ceiling: Ceiling,
    pub tol: f64,
    pub alphabet_size: usize,
    pub words_checked: u64,
    pub max_residual: f64,
    pub first_violation: Option<Violation>,
    pub note: String,
}

impl IdentityReport {
    pub fn is_distinguished(&self) -> bool {
        self.verdict == Verdict::Distinguished
    }
}

/// Letters for both sides, plus `(source, target)` per letter when products
/// are only defined along arrows of a quiver.
struct Sweep<'a> {
    a: &'a [RealMatrix],
    b: &'a [RealMatrix],
    labels: &'a [String],
    ends: Option<&'a [(usize, usize)]>,
    tol: f64,
    exhaustive: bool,
}

#[derive(Default)]
struct BranchOut {
    words: u64,
    max_residual: f64,
    first: Option<Violation>,
}

struct Branch<'s, 'a> {
    sweep: &'s Sweep<'a>,
    n: usize,
    w: Vec<usize>,
    pa: Vec<RealMatrix>,
    pb: Vec<RealMatrix>,
    out: BranchOut,
}

impl Sweep<'_> {
    fn compat(&self, x: usize, y: usize) -> bool {
        match self.ends {
            None => true,
            Some(e) => e[x].0 == e[y].1,
        }
    }

    fn run_branch(&self, n: usize, first: usize) -> BranchOut {
        let mut br = Branch {
            sweep: self,
            n,
            w: vec![0; n + 1],
            pa: vec![RealMatrix::zeros(0, 0); n + 1],
            pb: vec![RealMatrix::zeros(0, 0); n + 1],
            out: BranchOut::default(),
        };
        br.w[1] = first;
        if n > 1 {
            br.pa[1] = self.a[first].clone();
            br.pb[1] = self.b[first].clone();
        }
        br.gen(2, 1);
        br.out
    }

    fn sweep_length(&self, n: usize) -> BranchOut {
        let k = self.a.len();
        let parts: Vec<BranchOut> = pool().install(|| (0..k).into_par_iter().map(|f| self.run_branch(n, f)).collect());
        let mut acc = BranchOut::default();
        for p in parts {
            acc.words += p.words;
            acc.max_residual = acc.max_residual.max(p.max_residual);
            if acc.first.is_none() {
                acc.first = p.first;
            }
        }
        acc
    }

    fn word_text(&self, w: &[usize]) -> String {
        w.iter().map(|&i| self.labels[i].as_str()).collect::<Vec<_>>().join(" ")
    }
}

impl Branch<'_, '_> {
    fn gen(&mut self, t: usize, p: usize) {
        let n = self.n;
        if t > n {
            if n.is_multiple_of(p) && self.sweep.compat(self.w[n], self.w[1]) {
                self.emit();
            }
            return;
        }
        let start = self.w[t - p];
        for j in start..self.sweep.a.len() {
            if !self.sweep.compat(self.w[t - 1], j) {
                continue;
            }
            self.w[t] = j;
            if t < n {
                step(&mut self.pa, t, &self.sweep.a[j]);
                step(&mut self.pb, t, &self.sweep.b[j]);
            }
            self.gen(t + 1, if j == start { p } else { t });
            if self.out.first.is_some() && !self.sweep.exhaustive {
                return;
            }
        }
    }

    fn emit(&mut self) {
        let n = self.n;
        let last = self.w[n];
        let (lhs, rhs) = if n == 1 {
            (self.sweep.a[last].trace(), self.sweep.b[last].trace())
        } else {
            (
                trace_of_product(&self.pa[n - 1], &self.sweep.a[last]),
                trace_of_product(&self.pb[n - 1], &self.sweep.b[last]),
            )
        };
        let residual = (lhs - rhs).abs() / lhs.abs().max(1.0);
        self.out.words += 1;
        if residual.is_nan() || residual > self.out.max_residual {
            self.out.max_residual = if residual.is_nan() { f64::INFINITY } else { residual };
        }
        if (residual.is_nan() || residual > self.sweep.tol) && self.out.first.is_none() {
            let word = self.w[1..=n].to_vec();
            self.out.first =
                Some(Violation { word_text: self.sweep.word_text(&word), word, lhs, rhs, residual });
        }
    }
}

/// `stack[t] = stack[t-1] * letter`, reusing the buffer when shapes agree.
fn step(stack: &mut [RealMatrix], t: usize, letter: &RealMatrix) {
    let (head, tail) = stack.split_at_mut(t);
    let prev = &head[t - 1];
    let dst = &mut tail[0];
    let shape = (prev.nrows(), letter.ncols());
    if dst.shape() != shape {
        *dst = RealMatrix::zeros(shape.0, shape.1);
    }
    prev.mul_to(letter, dst);
}

fn run(criterion: &str, sweep: Sweep<'_>, cfg: &CheckConfig, ceiling: Ceiling) -> LuResult<IdentityReport> {
    cfg.validate()?;
    let horizon = (cfg.max_len as u64).min(ceiling.value.max(1)) as usize;
    let mut words = 0u64;
    let mut max_residual: f64 = 0.0;
    let mut first: Option<Violation> = None;
    for n in 1..=horizon {
        let block = sweep.sweep_length(n);
        words += block.words;
        max_residual = max_residual.max(block.max_residual);
        if first.is_none() {
            first = block.first;
        }
        if first.is_some() && !sweep.exhaustive {
            break;
        }
    }
    let verdict = if first.is_some() {
        Verdict::Distinguished
    } else if horizon as u64 >= ceiling.value {
        Verdict::Equivalent
    } else {
        Verdict::ConsistentAtHorizon
    };
    let note = match verdict {
        Verdict::Distinguished => "a trace identity fails; the inputs are not equivalent".to_string(),
        _ => HORIZON_NOTE.to_string(),
    };
    Ok(IdentityReport {
        criterion: criterion.to_string(),
        verdict,
        horizon,
        ceiling,
        tol: cfg.tol,
        alphabet_size: sweep.a.len(),
        words_checked: words,
        max_residual,
        first_violation: first,
        note,
    })
}

/// Compares two alphabets letter for letter over all necklaces up to the horizon.
pub fn compare_alphabets(a: &Alphabet, b: &Alphabet, cfg: &CheckConfig, ceiling: Ceiling) -> LuResult<IdentityReport> {
    if a.len() != b.len() || a.size() != b.size() {
        return Err(LuError::ShapeMismatch(format!(
            "alphabets differ: {} letters of size {} vs {} letters of size {}",
            a.len(),
            a.size(),
            b.len(),
            b.size()
        )));
    }
    let sweep = Sweep { a: &a.letters, b: &b.letters, labels: &a.labels, ends: None, tol: cfg.tol, exhaustive: cfg.exhaustive };
    run("words", sweep, cfg, ceiling)
}

/// `⌈(2/3)(n² + 2)⌉`.
pub fn laffey_ceiling(n: usize) -> u64 {
    let n = n as u64;
    (2 * (n * n + 2)).div_ceil(3)
}

/// Smallest positive `r` with `r(r+1)/2 >= m`.
pub fn futorny_r(m: usize) -> u64 {
    let m = m as u64;
    let mut r = 1u64;
    while r * (r + 1) / 2 < m {
        r += 1;
    }
    r
}

fn square(x: u64) -> u64 {
    x.saturating_mul(x)
}

fn check_finite(ms: &[RealMatrix]) -> LuResult<()> {
    if ms.iter().any(|m| m.iter().any(|x| !x.is_finite())) {
        return Err(LuError::InvalidConfig("matrix entries must be finite".into()));
    }
    Ok(())
}

/// Orthogonal similarity `B = Oᵗ A O` via words in `{A, Aᵗ}`.
pub fn specht_check(a: &RealMatrix, b: &RealMatrix, cfg: &CheckConfig) -> LuResult<IdentityReport> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(LuError::ShapeMismatch(format!(
            "specht check needs equal square matrices, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    check_finite(&[a.clone(), b.clone()])?;
    let n = a.nrows();
    let la = vec![a.clone(), a.transpose()];
    let lb = vec![b.clone(), b.transpose()];
    let labels = vec!["A".to_string(), "A^t".to_string()];
    let ceiling = Ceiling { value: laffey_ceiling(n), formula: format!("ceil(2/3 (n^2 + 2)) with n = {n}") };
    let sweep = Sweep { a: &la, b: &lb, labels: &labels, ends: None, tol: cfg.tol, exhaustive: cfg.exhaustive };
    run("specht", sweep, cfg, ceiling)
}

/// `{X_i X_j^t : i <= j}` within each group, in row-major pair order.
fn gram_letters(groups: &[&[RealMatrix]], offsets: &[usize]) -> (Vec<RealMatrix>, Vec<String>) {
    let mut letters = Vec::new();
    let mut labels = Vec::new();
    for (g, &off) in groups.iter().zip(offsets) {
        for i in 0..g.len() {
            for j in i..g.len() {
                letters.push(&g[i] * g[j].transpose());
                labels.push(format!("A{}A{}^t", off + i + 1, off + j + 1));
            }
        }
    }
    (letters, labels)
}

fn uniform_shape(what: &str, ms: &[RealMatrix]) -> LuResult<(usize, usize)> {
    let first = ms.first().ok_or_else(|| LuError::ShapeMismatch(format!("{what}: empty tuple")))?;
    let shape = first.shape();
    if let Some(bad) = ms.iter().find(|m| m.shape() != shape) {
        return Err(LuError::ShapeMismatch(format!(
            "{what}: mixed shapes {}x{} and {}x{}",
            shape.0,
            shape.1,
            bad.nrows(),
            bad.ncols()
        )));
    }
    Ok(shape)
}

/// Two-vertex bound for a tuple of `k` matrices of size `m×n`.
pub fn jing_ceiling(k: usize, m: usize, n: usize) -> Ceiling {
    let r = futorny_r(k);
    Ceiling {
        value: square((r + 2) * (m + n) as u64),
        formula: format!("((r + 2)(m + n))^2 with r = {r}, m = {m}, n = {n}"),
    }
}

/// Simultaneous orthogonal equivalence `B_i = O A_i Pᵗ` via words in `{A_i A_jᵗ : i <= j}`.
pub fn jing_check(a: &[RealMatrix], b: &[RealMatrix], cfg: &CheckConfig) -> LuResult<IdentityReport> {
    let (m, n) = uniform_shape("jing check", a)?;
    jing_check_with_ceiling(a, b, cfg, jing_ceiling(a.len(), m, n))
}

pub fn jing_check_with_ceiling(
    a: &[RealMatrix],
    b: &[RealMatrix],
    cfg: &CheckConfig,
    ceiling: Ceiling,
) -> LuResult<IdentityReport> {
    let sa = uniform_shape("jing check", a)?;
    let sb = uniform_shape("jing check", b)?;
    if a.len() != b.len() || sa != sb {
        return Err(LuError::ShapeMismatch(format!(
            "jing check: {} matrices of {}x{} vs {} of {}x{}",
            a.len(),
            sa.0,
            sa.1,
            b.len(),
            sb.0,
            sb.1
        )));
    }
    check_finite(a)?;
    check_finite(b)?;
    let (la, labels) = gram_letters(&[a], &[0]);
    let (lb, _) = gram_letters(&[b], &[0]);
    let sweep = Sweep { a: &la, b: &lb, labels: &labels, ends: None, tol: cfg.tol, exhaustive: cfg.exhaustive };
    run("jing", sweep, cfg, ceiling)
}

/// Two groups of matrices sharing their row space, with independent column rotations:
/// `B_i = O A_i Õ_1` for the first group and `B_j = O A_j Õ_2` for the second.
pub fn futorny_two_block_check(
    a1: &[RealMatrix],
    a2: &[RealMatrix],
    b1: &[RealMatrix],
    b2: &[RealMatrix],
    cfg: &CheckConfig,
) -> LuResult<IdentityReport> {
    let s1 = uniform_shape("first group", a1)?;
    let s2 = uniform_shape("second group", a2)?;
    if s1.0 != s2.0 {
        return Err(LuError::ShapeMismatch(format!("groups have {} and {} rows", s1.0, s2.0)));
    }
    let t1 = uniform_shape("first group", b1)?;
    let t2 = uniform_shape("second group", b2)?;
    if s1 != t1 || s2 != t2 || a1.len() != b1.len() || a2.len() != b2.len() {
        return Err(LuError::ShapeMismatch("the two sides have different group shapes".into()));
    }
    for g in [a1, a2, b1, b2] {
        check_finite(g)?;
    }
    let (k, rest) = (a1.len(), a2.len());
    let r = futorny_r(k.max(rest));
    let (m, n1, n2) = (s1.0, s1.1, s2.1);
    let ceiling = Ceiling {
        value: square((r + 2) * (n1 + n2 + m) as u64),
        formula: format!("((r + 2)(n1 + n2 + m))^2 with r = {r}, n1 = {n1}, n2 = {n2}, m = {m}"),
    };
    let (la, labels) = gram_letters(&[a1, a2], &[0, k]);
    let (lb, _) = gram_letters(&[b1, b2], &[0, k]);
    let sweep = Sweep { a: &la, b: &lb, labels: &labels, ends: None, tol: cfg.tol, exhaustive: cfg.exhaustive };
    run("futorny", sweep, cfg, ceiling)
}

/// Directed multigraph; loops and parallel arrows allowed. Vertices are `0..vertices`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quiver {
    vertices: usize,
    arrows: Vec<(usize, usize)>,
}

impl Quiver {
    /// `arrows` holds `(source, target)` pairs.
    pub fn new(vertices: usize, arrows: Vec<(usize, usize)>) -> LuResult<Self> {
        if arrows.is_empty() {
            return Err(LuError::MalformedQuiver("no arrows".into()));
        }
        if let Some(&(u, v)) = arrows.iter().find(|&&(u, v)| u >= vertices || v >= vertices) {
            return Err(LuError::MalformedQuiver(format!("arrow {u} -> {v} leaves the {vertices} vertices")));
        }
        Ok(Self { vertices, arrows })
    }

    /// A single vertex with one loop.
    pub fn one_loop() -> Self {
        Self { vertices: 1, arrows: vec![(0, 0)] }
    }

    /// `k` parallel arrows from vertex 0 to vertex 1.
    pub fn parallel(k: usize) -> LuResult<Self> {
        Self::new(2, vec![(0, 1); k])
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn arrows(&self) -> &[(usize, usize)] {
        &self.arrows
    }

    /// Largest number of arrows between an ordered pair of vertices.
    pub fn max_multiplicity(&self) -> usize {
        let mut counts = std::collections::BTreeMap::new();
        for &a in &self.arrows {
            *counts.entry(a).or_insert(0usize) += 1;
        }
        counts.values().copied().max().unwrap_or(0)
    }
}

/// One matrix per arrow; the matrix of `u -> v` is `dims[v] × dims[u]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuiverMatrixRep {
    dims: Vec<usize>,
    mats: Vec<RealMatrix>,
}

impl QuiverMatrixRep {
    pub fn new(q: &Quiver, dims: Vec<usize>, mats: Vec<RealMatrix>) -> LuResult<Self> {
        if dims.len() != q.vertices {
            return Err(LuError::ShapeMismatch(format!("{} dimensions for {} vertices", dims.len(), q.vertices)));
        }
        if mats.len() != q.arrows.len() {
            return Err(LuError::ShapeMismatch(format!("{} matrices for {} arrows", mats.len(), q.arrows.len())));
        }
        for (i, (&(u, v), m)) in q.arrows.iter().zip(&mats).enumerate() {
            if m.shape() != (dims[v], dims[u]) {
                return Err(LuError::ShapeMismatch(format!(
                    "arrow {i} ({u} -> {v}) needs a {}x{} matrix, got {}x{}",
                    dims[v],
                    dims[u],
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        check_finite(&mats)?;
        Ok(Self { dims, mats })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn mats(&self) -> &[RealMatrix] {
        &self.mats
    }
}

/// Arrows of the doubled quiver: the originals, then each reversed with the transposed matrix.
fn doubled(q: &Quiver, rep: &QuiverMatrixRep) -> (Vec<RealMatrix>, Vec<(usize, usize)>) {
    let mut mats = rep.mats.clone();
    mats.extend(rep.mats.iter().map(|m| m.transpose()));
    let mut ends = q.arrows.clone();
    ends.extend(q.arrows.iter().map(|&(u, v)| (v, u)));
    (mats, ends)
}

/// Isometry of quiver representations via traces of oriented cycles in the doubled quiver.
pub fn quiver_cycle_check(
    q: &Quiver,
    a: &QuiverMatrixRep,
    b: &QuiverMatrixRep,
    cfg: &CheckConfig,
) -> LuResult<IdentityReport> {
    if a.dims != b.dims {
        return Err(LuError::ShapeMismatch(format!("dimension vectors differ: {:?} vs {:?}", a.dims, b.dims)));
    }
    QuiverMatrixRep::new(q, a.dims.clone(), a.mats.clone())?;
    QuiverMatrixRep::new(q, b.dims.clone(), b.mats.clone())?;
    let (la, ends) = doubled(q, a);
    let (lb, _) = doubled(q, b);
    let mut labels: Vec<String> = (0..q.arrows.len()).map(|i| format!("a{i}")).collect();
    labels.extend((0..q.arrows.len()).map(|i| format!("a{i}*")));
    let r = futorny_r(q.max_multiplicity());
    let total: usize = a.dims.iter().sum();
    let general = square((r + 2) * total as u64);
    // One vertex with one loop is orthogonal similarity of a single matrix.
    let ceiling = if q.vertices == 1 && q.arrows.len() == 1 && laffey_ceiling(total) < general {
        Ceiling {
            value: laffey_ceiling(total),
            formula: format!("ceil(2/3 (n^2 + 2)) with n = {total}, below ((r + 2) n)^2 = {general}"),
        }
    } else {
        Ceiling {
            value: general,
            formula: format!("((r + 2)(d_1 + ... + d_t))^2 with r = {r}, sum of dims = {total}"),
        }
    };
    let sweep = Sweep { a: &la, b: &lb, labels: &labels, ends: Some(&ends), tol: cfg.tol, exhaustive: cfg.exhaustive };
    run("quiver", sweep, cfg, ceiling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lu_action::random_orthogonal;
    use crate::rng;

    fn rand_mat(r: usize, c: usize, seed: u64) -> RealMatrix {
        rng::gaussian_real(r, c, &mut rng::seeded(seed))
    }

    fn phi(mut n: usize) -> usize {
        let mut out = n;
        let mut p = 2;
        while p * p <= n {
            if n.is_multiple_of(p) {
                while n.is_multiple_of(p) {
                    n /= p;
                }
                out -= out / p;
            }
            p += 1;
        }
        if n > 1 {
            out -= out / n;
        }
        out
    }

    fn necklace_count(k: usize, n: usize) -> usize {
        (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| phi(d) * k.pow((n / d) as u32)).sum::<usize>() / n
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(cyclic_canonical(&[2, 0, 1]), vec![0, 1, 2]);
        assert_eq!(cyclic_canonical(&[1, 1, 1]), vec![1, 1, 1]);
        assert_eq!(cyclic_canonical(&[1, 0, 1, 0, 0]), vec![0, 0, 1, 0, 1]);
    }

    #[test]
    fn canonical_is_least_rotation() {
        let mut r = rng::seeded(5);
        use rand::Rng;
        for _ in 0..500 {
            let n = r.random_range(1..=8);
            let w: Vec<usize> = (0..n).map(|_| r.random_range(0..3)).collect();
            let best = (0..n).map(|s| (0..n).map(|t| w[(s + t) % n]).collect::<Vec<_>>()).min().unwrap();
            assert_eq!(cyclic_canonical(&w), best, "{w:?}");
        }
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_words(1, 3), vec![vec![0], vec![0, 0], vec![0, 0, 0]]);
        assert_eq!(enumerate_words(2, 2), vec![vec![0], vec![1], vec![0, 0], vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn enumeration_matches_necklace_formula() {
        for k in 1..=4 {
            let words = enumerate_words(k, 6);
            let want: usize = (1..=6).map(|n| necklace_count(k, n)).sum();
            assert_eq!(words.len(), want, "k={k}");
            for w in &words {
                assert_eq!(&cyclic_canonical(w), w);
            }
        }
    }

    #[test]
    fn engine_word_count_matches_enumeration() {
        let a = rand_mat(3, 3, 1);
        let rep = specht_check(&a, &a, &CheckConfig::with_horizon(7)).unwrap();
        assert_eq!(rep.words_checked as usize, enumerate_words(2, 7).len());
    }

    #[test]
    fn trace_basics() {
        let id = Alphabet::unlabeled(vec![RealMatrix::identity(4, 4), RealMatrix::zeros(4, 4)]).unwrap();
        assert_eq!(trace_of_word(&id, &[0]).unwrap(), 4.0);
        assert_eq!(trace_of_word(&id, &[0, 1, 0]).unwrap(), 0.0);
        assert!(trace_of_word(&id, &[2]).is_err());
    }

    #[test]
    fn trace_matches_naive_product() {
        let letters: Vec<RealMatrix> = (0..3).map(|s| rand_mat(4, 4, s)).collect();
        let alph = Alphabet::unlabeled(letters.clone()).unwrap();
        let w = [2, 0, 1, 1, 0];
        let mut p = RealMatrix::identity(4, 4);
        for &i in &w {
            p *= &letters[i];
        }
        assert!((trace_of_word(&alph, &w).unwrap() - p.trace()).abs() < 1e-10);
        let rotated = [0, 1, 1, 0, 2];
        assert!((trace_of_word(&alph, &rotated).unwrap() - p.trace()).abs() < 1e-10);
    }

    #[test]
    fn specht_identity_and_conjugate() {
        let a = rand_mat(4, 4, 3);
        let rep = specht_check(&a, &a, &CheckConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::ConsistentAtHorizon);
        assert_eq!(rep.max_residual, 0.0);
        let o = random_orthogonal(4, false, 8).unwrap();
        let b = o.transpose() * &a * &o;
        let rep = specht_check(&a, &b, &CheckConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::ConsistentAtHorizon);
        assert_eq!(rep.horizon, 6);
        assert_eq!(rep.ceiling.value, 12);
    }

    #[test]
    fn specht_reaches_ceiling_for_two_by_two() {
        let a = rand_mat(2, 2, 4);
        let o = random_orthogonal(2, true, 9).unwrap();
        let b = o.transpose() * &a * &o;
        let rep = specht_check(&a, &b, &CheckConfig::default()).unwrap();
        assert_eq!(rep.horizon, 4);
        assert_eq!(rep.verdict, Verdict::Equivalent);
    }

    #[test]
    fn specht_perturbation_is_caught_early() {
        let a = rand_mat(4, 4, 5);
        let mut b = a.clone();
        b[(0, 0)] += 1.0;
        let rep = specht_check(&a, &b, &CheckConfig::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Distinguished);
        assert!(rep.first_violation.unwrap().len() <= 2);
    }

    #[test]
    fn monotone_in_horizon() {
        let a = rand_mat(3, 3, 6);
        let o = random_orthogonal(3, false, 1).unwrap();
        let mut b = o.transpose() * &a * &o;
        b[(0, 1)] += 1e-3;
        b[(1, 0)] -= 1e-3;
        let base = specht_check(&a, &b, &CheckConfig::with_horizon(3)).unwrap();
        assert!(base.is_distinguished());
        for h in 3..=7 {
            let rep = specht_check(&a, &b, &CheckConfig::with_horizon(h)).unwrap();
            assert!(rep.is_distinguished());
            assert_eq!(rep.first_violation, base.first_violation);
        }
    }

    #[test]
    fn exhaustive_runs_to_horizon() {
        let a = rand_mat(3, 3, 7);
        let b = a.scale(1.5);
        let fast = specht_check(&a, &b, &CheckConfig::default()).unwrap();
        let full = specht_check(&a, &b, &CheckConfig { exhaustive: true, ..CheckConfig::default() }).unwrap();
        assert_eq!(fast.first_violation, full.first_violation);
        assert_eq!(full.words_checked as usize, enumerate_words(2, 6).len());
        assert!(full.max_residual >= fast.max_residual);
    }

    #[test]
    fn jing_forward_and_scaling() {
        let a: Vec<RealMatrix> = (0..3).map(|s| rand_mat(3, 4, 10 + s)).collect();
        let o = random_orthogonal(3, false, 1).unwrap();
        let p = random_orthogonal(4, false, 2).unwrap();
        let b: Vec<RealMatrix> = a.iter().map(|x| &o * x * p.transpose()).collect();
        let rep = jing_check(&a, &b, &CheckConfig::with_horizon(4)).unwrap();
        assert_eq!(rep.verdict, Verdict::ConsistentAtHorizon);
        assert_eq!(rep.ceiling.value, 784);
        let mut c = b.clone();
        c[1] *= 2.0;
        let rep = jing_check(&a, &c, &CheckConfig::with_horizon(4)).unwrap();
        assert!(rep.is_distinguished());
        assert_eq!(rep.first_violation.unwrap().len(), 1);
    }

    #[test]
    fn futorny_forward_and_swap() {
        let a1: Vec<RealMatrix> = (0..2).map(|s| rand_mat(3, 2, 20 + s)).collect();
        let a2: Vec<RealMatrix> = (0..2).map(|s| rand_mat(3, 4, 30 + s)).collect();
        let o = random_orthogonal(3, false, 3).unwrap();
        let o1 = random_orthogonal(2, false, 4).unwrap();
        let o2 = random_orthogonal(4, false, 5).unwrap();
        let b1: Vec<RealMatrix> = a1.iter().map(|x| &o * x * &o1).collect();
        let b2: Vec<RealMatrix> = a2.iter().map(|x| &o * x * &o2).collect();
        let rep = futorny_two_block_check(&a1, &a2, &b1, &b2, &CheckConfig::with_horizon(4)).unwrap();
        assert_eq!(rep.verdict, Verdict::ConsistentAtHorizon);
        assert_eq!(rep.ceiling.value, 1296);
        let swapped = vec![b1[1].clone(), b1[0].clone()];
        let rep = futorny_two_block_check(&a1, &a2, &swapped, &b2, &CheckConfig::with_horizon(4)).unwrap();
        assert!(rep.is_distinguished());
        assert!(rep.first_violation.unwrap().len() <= 2);
    }

    #[test]
    fn quiver_one_loop_matches_specht() {
        let q = Quiver::one_loop();
        for s in 0..10 {
            let a = rand_mat(3, 3, 100 + s);
            let b = if s % 2 == 0 {
                let o = random_orthogonal(3, false, s).unwrap();
                o.transpose() * &a * &o
            } else {
                rand_mat(3, 3, 200 + s)
            };
            let cfg = CheckConfig::with_horizon(5);
            let sp = specht_check(&a, &b, &cfg).unwrap();
            let ra = QuiverMatrixRep::new(&q, vec![3], vec![a]).unwrap();
            let rb = QuiverMatrixRep::new(&q, vec![3], vec![b]).unwrap();
            let qv = quiver_cycle_check(&q, &ra, &rb, &cfg).unwrap();
            assert_eq!(sp.verdict, qv.verdict);
            assert_eq!(sp.words_checked, qv.words_checked);
            assert_eq!(sp.first_violation.map(|v| v.word), qv.first_violation.map(|v| v.word));
        }
    }

    #[test]
    fn quiver_cycles_respect_arrows() {
        // Two parallel arrows 0 -> 1: every cycle alternates an arrow and a reversed arrow.
        let q = Quiver::parallel(2).unwrap();
        let mats: Vec<RealMatrix> = (0..2).map(|s| rand_mat(3, 2, s)).collect();
        let rep = QuiverMatrixRep::new(&q, vec![2, 3], mats).unwrap();
        let out = quiver_cycle_check(&q, &rep, &rep, &CheckConfig::with_horizon(4)).unwrap();
        // Necklaces of length 2 and 4 over the 2x2 bipartite letter pairs:
        // length 2: a_i a_j* up to rotation -> 4; length 4 -> 10.
        assert_eq!(out.words_checked, 14);
    }

    #[test]
    fn quiver_validation() {
        assert!(matches!(Quiver::new(1, vec![(0, 1)]), Err(LuError::MalformedQuiver(_))));
        assert!(matches!(Quiver::new(1, vec![]), Err(LuError::MalformedQuiver(_))));
        let q = Quiver::parallel(1).unwrap();
        assert!(matches!(
            QuiverMatrixRep::new(&q, vec![2, 3], vec![rand_mat(2, 3, 0)]),
            Err(LuError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn bounds() {
        let laffey: Vec<u64> = (2..=6).map(laffey_ceiling).collect();
        assert_eq!(laffey, vec![4, 8, 12, 18, 26]);
        assert_eq!(futorny_r(1), 1);
        assert_eq!(futorny_r(2), 2);
        assert_eq!(futorny_r(3), 2);
        assert_eq!(futorny_r(5), 3);
        assert_eq!(jing_ceiling(2, 3, 3).value, 576);
    }

    #[test]
    fn shape_errors() {
        let a = rand_mat(3, 3, 0);
        let b = rand_mat(2, 2, 0);
        assert!(matches!(specht_check(&a, &b, &CheckConfig::default()), Err(LuError::ShapeMismatch(_))));
        assert!(matches!(jing_check(std::slice::from_ref(&a), &[b], &CheckConfig::default()), Err(LuError::ShapeMismatch(_))));
        let cfg = CheckConfig { max_len: 0, ..CheckConfig::default() };
        assert!(matches!(specht_check(&a, &a, &cfg), Err(LuError::InvalidConfig(_))));
    }
}
