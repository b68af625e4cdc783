//! Exhaustive search over quintic plane transformations whose base points
//! form a Galois orbit of degree 6, recording the sign of each induced
//! permutation of P^2(F_q), q = 2^m.
//!
//! Candidate points `[1:b:c]` over GF(q^6) are enumerated through the ten
//! reduced echelon shapes of their coordinate matrix in the power basis
//! `1, α, ..., α^5`. Work is split into blocks that run in parallel and merge
//! in block order, with an optional line-delimited JSON checkpoint.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::finite_field::{make_field, subfield_embed, FieldError, FieldRef, SubfieldEmbedding};
use crate::linalg::{self, Matrix};
use crate::par;
use crate::permutations::Permutation;
use crate::proj_geometry::{normalize, GeometryError, PointTable};
use crate::rational_maps::homogeneous_monomials;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScanError {
    #[error("quintic scan requires q = 2^m with 1 <= m <= 5, got q = {0}")]
    UnsupportedField(u64),
    #[error("expected {expected} free values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unknown echelon pattern {0} (patterns are numbered 1 to 10)")]
    UnknownPattern(usize),
    #[error("block size must be positive")]
    ZeroBlockSize,
    #[error("checkpoint was written for config {found}, current config is {expected}")]
    ChecksumMismatch { expected: String, found: String },
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<std::io::Error> for ScanError {
    fn from(e: std::io::Error) -> Self {
        ScanError::Io(e.to_string())
    }
}

/// GF(q^6) over GF(q) with the power basis of its least generator.
#[derive(Debug, Clone)]
pub struct ScanBasis {
    field: FieldRef,
    ext: FieldRef,
    emb: SubfieldEmbedding,
    alpha: u32,
    powers: [u32; 6],
    m: u32,
    /// Packed coordinates (6 digits of m bits) of each bit of an extension index.
    expand_cols: Vec<u32>,
}

impl ScanBasis {
    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    pub fn ext(&self) -> &FieldRef {
        &self.ext
    }

    pub fn embedding(&self) -> &SubfieldEmbedding {
        &self.emb
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    /// `[1, α, ..., α^5]`.
    pub fn basis(&self) -> [u32; 6] {
        self.powers
    }

    /// `Σ c_i α^i`.
    pub fn contract(&self, coords: &[u32; 6]) -> u32 {
        let e = &self.ext;
        coords.iter().zip(&self.powers).fold(0, |acc, (&c, &a)| e.add(acc, e.mul(self.emb.embed(c), a)))
    }

    /// Coordinates of `y` in the power basis.
    pub fn expand(&self, y: u32) -> [u32; 6] {
        let mut packed = 0u32;
        let mut bits = y;
        while bits != 0 {
            let t = bits.trailing_zeros();
            packed ^= self.expand_cols[t as usize];
            bits &= bits - 1;
        }
        let mask = (1u32 << self.m) - 1;
        std::array::from_fn(|i| (packed >> (i as u32 * self.m)) & mask)
    }

    /// `y^{q^k}`.
    pub fn frobenius(&self, y: u32, k: u32) -> u32 {
        self.ext.pow(y, self.field.order().pow(k))
    }
}

/// Inverts a square GF(2) matrix given as column bitmasks.
fn invert_gf2(cols: &[u32]) -> Option<Vec<u32>> {
    let n = cols.len();
    // Row-major augmented rows [A | I] with A[r][c] = bit r of cols[c].
    let mut rows: Vec<(u32, u32)> =
        (0..n).map(|r| (cols.iter().enumerate().fold(0, |a, (c, &v)| a | (((v >> r) & 1) << c)), 1 << r)).collect();
    for c in 0..n {
        let p = (c..n).find(|&r| (rows[r].0 >> c) & 1 == 1)?;
        rows.swap(c, p);
        let pivot = rows[c];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != c && (row.0 >> c) & 1 == 1 {
                row.0 ^= pivot.0;
                row.1 ^= pivot.1;
            }
        }
    }
    // Inverse row r is rows[r].1; return it as columns.
    Some((0..n).map(|c| (0..n).fold(0, |a, r| a | (((rows[r].1 >> c) & 1) << r))).collect())
}

pub fn scan_basis(field: &FieldRef) -> Result<ScanBasis, ScanError> {
    let m = field.degree();
    if !field.is_char2() || !(1..=5).contains(&m) {
        return Err(ScanError::UnsupportedField(field.order()));
    }
    let ext = make_field(2, 6 * m)?;
    let emb = subfield_embed(field, &ext)?;
    let alpha = ext.generator();
    let powers: [u32; 6] = std::array::from_fn(|i| ext.pow(alpha, i as u64));
    // Column (i, s): the image of the coordinate vector 2^s e_i.
    let mut cols = Vec::with_capacity(6 * m as usize);
    for i in 0..6 {
        for s in 0..m {
            cols.push(ext.mul(emb.embed(1 << s), powers[i]));
        }
    }
    let expand_cols = invert_gf2(&cols).expect("a generator of GF(q^6) has degree 6 over GF(q)");
    Ok(ScanBasis { field: field.clone(), ext, emb, alpha, powers, m, expand_cols })
}

/// A reduced echelon shape of the 3x6 coordinate matrix with pivots `(1, j, k)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EchelonPattern {
    /// 1 to 10.
    pub id: usize,
    /// 1-based pivot columns.
    pub pivots: [usize; 3],
    /// 0-based free columns of rows 2 and 3.
    pub row2_free: Vec<usize>,
    pub row3_free: Vec<usize>,
}

impl EchelonPattern {
    pub fn free_count(&self) -> usize {
        self.row2_free.len() + self.row3_free.len()
    }

    pub fn candidates(&self, q: u64) -> u64 {
        q.pow(self.free_count() as u32)
    }

    /// Free values at `offset`, first free entry most significant.
    pub fn free_values(&self, q: u64, mut offset: u64) -> Vec<u32> {
        let mut v = vec![0u32; self.free_count()];
        for d in v.iter_mut().rev() {
            *d = (offset % q) as u32;
            offset /= q;
        }
        v
    }
}

pub fn enumerate_patterns() -> Vec<EchelonPattern> {
    let mut out = Vec::with_capacity(10);
    for j in 2..=6 {
        for k in j + 1..=6 {
            out.push(EchelonPattern {
                id: out.len() + 1,
                pivots: [1, j, k],
                row2_free: (j..6).filter(|&c| c + 1 != k).collect(),
                row3_free: (k..6).collect(),
            });
        }
    }
    out
}

/// `q^6 + q^5 + 2q^4 + 2q^3 + 2q^2 + q + 1`.
pub fn candidate_total(q: u64) -> u64 {
    enumerate_patterns().iter().map(|p| p.candidates(q)).sum()
}

/// `[1 : b : c]` from the two lower rows of the patterned matrix.
pub fn candidate_point(basis: &ScanBasis, pattern: &EchelonPattern, free: &[u32]) -> Result<[u32; 3], ScanError> {
    if free.len() != pattern.free_count() {
        return Err(ScanError::LengthMismatch { expected: pattern.free_count(), got: free.len() });
    }
    let mut r2 = [0u32; 6];
    let mut r3 = [0u32; 6];
    r2[pattern.pivots[1] - 1] = 1;
    r3[pattern.pivots[2] - 1] = 1;
    let (f2, f3) = free.split_at(pattern.row2_free.len());
    for (&c, &v) in pattern.row2_free.iter().zip(f2) {
        r2[c] = v;
    }
    for (&c, &v) in pattern.row3_free.iter().zip(f3) {
        r3[c] = v;
    }
    // Row 1 is e_1, so the three rows are independent.
    debug_assert!(r2[0] == 0 && r3[0] == 0 && r3[pattern.pivots[1] - 1] == 0);
    Ok([1, basis.contract(&r2), basis.contract(&r3)])
}

/// Least `d | 6` with `P^{σ^d} = P`.
pub fn orbit_degree(basis: &ScanBasis, p: &[u32; 3]) -> u32 {
    let ext = basis.ext();
    let mut np = *p;
    normalize(ext, &mut np);
    for d in [1, 2, 3] {
        let mut c = np.map(|x| basis.frobenius(x, d));
        normalize(ext, &mut c);
        if c == np {
            return d;
        }
    }
    6
}

/// The 24x21 GF(q)-system `F(P) = F_x(P) = F_y(P) = F_z(P) = 0` on quintic
/// coefficients, each condition expanded into six rows through the power basis.
pub fn singularity_system(basis: &ScanBasis, p: &[u32; 3]) -> Matrix {
    let ext = basis.ext();
    let monos = homogeneous_monomials(3, 5);
    let pw: Vec<[u32; 6]> = p.iter().map(|&x| std::array::from_fn(|e| ext.pow(x, e as u64))).collect();
    let mut rows = vec![vec![0u32; monos.len()]; 24];
    for (col, e) in monos.iter().enumerate() {
        let value = |d: Option<usize>| -> u32 {
            let mut v = 1;
            for i in 0..3 {
                let mut k = e[i];
                if d == Some(i) {
                    if k == 0 {
                        return 0;
                    }
                    v = ext.mul_int(v, k as u64);
                    k -= 1;
                }
                v = ext.mul(v, pw[i][k as usize]);
            }
            v
        };
        for (cond, d) in [None, Some(0), Some(1), Some(2)].into_iter().enumerate() {
            let coords = basis.expand(value(d));
            for (i, &c) in coords.iter().enumerate() {
                rows[6 * cond + i][col] = c;
            }
        }
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KernelResult {
    /// Echelon kernel basis; each vector holds 21 coefficients in monomial order.
    Quintics(Vec<Vec<u32>>),
    Discard { dimension: usize },
}

pub fn singularity_kernel(basis: &ScanBasis, p: &[u32; 3]) -> KernelResult {
    let k = linalg::kernel(basis.field(), &singularity_system(basis, p), 21);
    if k.len() == 3 {
        KernelResult::Quintics(k)
    } else {
        KernelResult::Discard { dimension: k.len() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Even,
    Odd,
    DiscardDegree,
    DiscardKernel,
    DiscardBase,
    DiscardNoninjective,
}

/// Quintic monomial values at every rational point of the plane.
#[derive(Debug, Clone)]
pub struct QuinticEvaluator {
    table: PointTable,
    values: Vec<[u32; 21]>,
}

impl QuinticEvaluator {
    pub fn new(table: PointTable) -> QuinticEvaluator {
        let f = table.field().clone();
        let monos = homogeneous_monomials(3, 5);
        let values = table
            .iter()
            .map(|p| {
                std::array::from_fn(|c| {
                    monos[c].iter().zip(p).fold(1, |a, (&e, &x)| f.mul(a, f.pow(x, e as u64)))
                })
            })
            .collect();
        QuinticEvaluator { table, values }
    }

    pub fn table(&self) -> &PointTable {
        &self.table
    }

    /// Sign of `[F1:F2:F3]` on P^2(F_q), or the reason it is not a permutation.
    pub fn classify(&self, quintics: &[Vec<u32>]) -> Outcome {
        let f = self.table.field();
        let n = self.table.len();
        let mut img = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for vals in &self.values {
            let mut v: Vec<u32> = quintics
                .iter()
                .map(|c| c.iter().zip(vals).fold(0, |a, (&x, &y)| f.add(a, f.mul(x, y))))
                .collect();
            if !normalize(f, &mut v) {
                return Outcome::DiscardBase;
            }
            let j = self.table.index_of(&v).expect("normalized point");
            if std::mem::replace(&mut seen[j], true) {
                return Outcome::DiscardNoninjective;
            }
            img.push(j as u32);
        }
        match Permutation::new(img).expect("injective on a finite set").sign() {
            1 => Outcome::Even,
            _ => Outcome::Odd,
        }
    }
}

pub fn classify_candidate(basis: &ScanBasis, p: &[u32; 3], eval: &QuinticEvaluator) -> Outcome {
    if orbit_degree(basis, p) != 6 {
        return Outcome::DiscardDegree;
    }
    match singularity_kernel(basis, p) {
        KernelResult::Quintics(k) => eval.classify(&k),
        KernelResult::Discard { .. } => Outcome::DiscardKernel,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub processed: u64,
    pub even: u64,
    pub odd: u64,
    pub discard_degree: u64,
    pub discard_kernel: u64,
    pub discard_base: u64,
    pub discard_noninjective: u64,
}

impl Tally {
    pub fn record(&mut self, o: Outcome) {
        self.processed += 1;
        *match o {
            Outcome::Even => &mut self.even,
            Outcome::Odd => &mut self.odd,
            Outcome::DiscardDegree => &mut self.discard_degree,
            Outcome::DiscardKernel => &mut self.discard_kernel,
            Outcome::DiscardBase => &mut self.discard_base,
            Outcome::DiscardNoninjective => &mut self.discard_noninjective,
        } += 1;
    }

    pub fn merge(&mut self, o: &Tally) {
        self.processed += o.processed;
        self.even += o.even;
        self.odd += o.odd;
        self.discard_degree += o.discard_degree;
        self.discard_kernel += o.discard_kernel;
        self.discard_base += o.discard_base;
        self.discard_noninjective += o.discard_noninjective;
    }

    pub fn classified(&self) -> u64 {
        self.even + self.odd
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternTally {
    pub pattern: usize,
    pub candidates: u64,
    #[serde(flatten)]
    pub tally: Tally,
}

/// A candidate by pattern and offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cursor {
    pub pattern: usize,
    pub offset: u64,
}

/// Settings that determine the scan result, hashed into the config digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanConfig {
    pub q: u64,
    pub patterns: Vec<usize>,
    pub block_size: u64,
}

impl ScanConfig {
    pub fn digest(&self) -> String {
        json_digest(self)
    }
}

/// Hex SHA-256 of the compact JSON encoding of `value`.
pub fn json_digest<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_string(value).expect("value serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    /// Pattern ids; `None` means all ten.
    pub patterns: Option<Vec<usize>>,
    pub block_size: u64,
    /// Worker threads; 0 = all cores.
    pub jobs: usize,
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
    /// Stop after this many newly processed blocks, as if interrupted.
    pub stop_after_blocks: Option<usize>,
    /// Record wall-clock time in the report.
    pub timing: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            patterns: None,
            block_size: 1024,
            jobs: 0,
            checkpoint: None,
            resume: false,
            stop_after_blocks: None,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub q: u64,
    pub expected_total: u64,
    pub patterns: Vec<PatternTally>,
    pub totals: Tally,
    pub complete: bool,
    /// Next unprocessed candidate when incomplete.
    pub cursor: Option<Cursor>,
    /// Up to 16 odd candidates in scan order.
    pub odd_examples: Vec<Cursor>,
    pub config: ScanConfig,
    pub config_digest: String,
    pub runtime_ms: Option<u64>,
}

const MAX_ODD_EXAMPLES: usize = 16;

#[derive(Debug, Clone, Copy)]
struct Block {
    pattern: usize,
    offset: u64,
    len: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct BlockRecord {
    kind: String,
    pattern: usize,
    offset: u64,
    #[serde(flatten)]
    tally: Tally,
    odd_offsets: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct HeaderRecord {
    kind: String,
    config_digest: String,
    q: u64,
    patterns: Vec<usize>,
    block_size: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CompleteRecord {
    kind: String,
    config_digest: String,
    complete: bool,
}

fn blocks_for(patterns: &[EchelonPattern], q: u64, block_size: u64) -> Vec<Block> {
    let mut out = Vec::new();
    for p in patterns {
        let n = p.candidates(q);
        let mut offset = 0;
        while offset < n {
            let len = block_size.min(n - offset);
            out.push(Block { pattern: p.id, offset, len });
            offset += len;
        }
    }
    out
}

fn run_block(basis: &ScanBasis, pattern: &EchelonPattern, eval: &QuinticEvaluator, b: Block) -> BlockRecord {
    let q = basis.field().order();
    let mut tally = Tally::default();
    let mut odd_offsets = Vec::new();
    for offset in b.offset..b.offset + b.len {
        let free = pattern.free_values(q, offset);
        let p = candidate_point(basis, pattern, &free).expect("free count matches");
        let o = classify_candidate(basis, &p, eval);
        if o == Outcome::Odd {
            odd_offsets.push(offset);
        }
        tally.record(o);
    }
    BlockRecord { kind: "block".into(), pattern: b.pattern, offset: b.offset, tally, odd_offsets }
}

/// Valid block records from an existing checkpoint; a truncated last line is dropped.
fn read_checkpoint(path: &PathBuf, digest: &str, blocks: &[Block]) -> Result<Vec<BlockRecord>, ScanError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let lines: Vec<String> = BufReader::new(file).lines().collect::<Result<_, _>>()?;
    let mut records = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let last = i + 1 == lines.len();
        let value: serde_json::Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(_) if last => break,
            Err(e) => return Err(ScanError::Checkpoint(format!("line {}: {e}", i + 1))),
        };
        let kind = value.get("kind").and_then(|k| k.as_str()).unwrap_or_default().to_string();
        let bad = |e: serde_json::Error| ScanError::Checkpoint(format!("line {}: {e}", i + 1));
        match (i, kind.as_str()) {
            (0, "header") => {
                let h: HeaderRecord = serde_json::from_value(value).map_err(bad)?;
                if h.config_digest != digest {
                    return Err(ScanError::ChecksumMismatch { expected: digest.into(), found: h.config_digest });
                }
            }
            (0, _) => return Err(ScanError::Checkpoint("first line is not a header".into())),
            (_, "block") => {
                let r: BlockRecord = serde_json::from_value(value).map_err(bad)?;
                let b = blocks
                    .get(records.len())
                    .ok_or_else(|| ScanError::Checkpoint("more blocks than the scan has".into()))?;
                if (r.pattern, r.offset, r.tally.processed) != (b.pattern, b.offset, b.len) {
                    return Err(ScanError::Checkpoint(format!("line {} is out of sequence", i + 1)));
                }
                records.push(r);
            }
            (_, "complete") => {
                let c: CompleteRecord = serde_json::from_value(value).map_err(bad)?;
                if c.config_digest != digest {
                    return Err(ScanError::ChecksumMismatch { expected: digest.into(), found: c.config_digest });
                }
            }
            (_, other) => return Err(ScanError::Checkpoint(format!("unknown record kind `{other}`"))),
        }
    }
    if lines.is_empty() {
        return Err(ScanError::Checkpoint("empty checkpoint".into()));
    }
    Ok(records)
}

fn json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("record serializes");
    s.push('\n');
    s
}

pub fn run_scan(field: &FieldRef, opts: &ScanOptions) -> Result<ScanReport, ScanError> {
    let start = Instant::now();
    let basis = scan_basis(field)?;
    let q = field.order();
    if opts.block_size == 0 {
        return Err(ScanError::ZeroBlockSize);
    }
    let all = enumerate_patterns();
    let mut ids = opts.patterns.clone().unwrap_or_else(|| (1..=10).collect());
    ids.sort_unstable();
    ids.dedup();
    if let Some(&bad) = ids.iter().find(|&&i| !(1..=10).contains(&i)) {
        return Err(ScanError::UnknownPattern(bad));
    }
    let patterns: Vec<EchelonPattern> = ids.iter().map(|&i| all[i - 1].clone()).collect();
    let config = ScanConfig { q, patterns: ids.clone(), block_size: opts.block_size };
    let digest = config.digest();
    let blocks = blocks_for(&patterns, q, opts.block_size);

    let mut records = match (&opts.checkpoint, opts.resume) {
        (Some(path), true) => read_checkpoint(path, &digest, &blocks)?,
        _ => Vec::new(),
    };
    let mut writer = match &opts.checkpoint {
        Some(path) => {
            // Rewrite the valid prefix so a truncated tail never precedes new records.
            let mut w = OpenOptions::new().create(true).write(true).truncate(true).open(path)?;
            let header = HeaderRecord {
                kind: "header".into(),
                config_digest: digest.clone(),
                q,
                patterns: ids.clone(),
                block_size: opts.block_size,
            };
            let mut text = json_line(&header);
            for r in &records {
                text.push_str(&json_line(r));
            }
            w.write_all(text.as_bytes())?;
            w.flush()?;
            Some(w)
        }
        None => None,
    };

    let eval = QuinticEvaluator::new(PointTable::new(2, field)?);
    let wave = par::effective_jobs(opts.jobs).max(1) * 4;
    let mut budget = opts.stop_after_blocks.unwrap_or(usize::MAX);
    while records.len() < blocks.len() && budget > 0 {
        let start_block = records.len();
        let n = wave.min(blocks.len() - start_block).min(budget);
        let batch = par::map_range(n, opts.jobs, |i| {
            let b = blocks[start_block + i];
            run_block(&basis, &all[b.pattern - 1], &eval, b)
        });
        budget -= n;
        for r in batch {
            if let Some(w) = writer.as_mut() {
                w.write_all(json_line(&r).as_bytes())?;
            }
            records.push(r);
        }
        if let Some(w) = writer.as_mut() {
            w.flush()?;
        }
    }
    if records.len() == blocks.len() {
        if let Some(w) = writer.as_mut() {
            let c = CompleteRecord { kind: "complete".into(), config_digest: digest.clone(), complete: true };
            w.write_all(json_line(&c).as_bytes())?;
            w.flush()?;
        }
    }

    let mut per: Vec<PatternTally> = patterns
        .iter()
        .map(|p| PatternTally { pattern: p.id, candidates: p.candidates(q), tally: Tally::default() })
        .collect();
    let mut totals = Tally::default();
    let mut odd_examples = Vec::new();
    for r in &records {
        let slot = per.iter_mut().find(|t| t.pattern == r.pattern).expect("pattern in config");
        slot.tally.merge(&r.tally);
        totals.merge(&r.tally);
        for &offset in &r.odd_offsets {
            if odd_examples.len() < MAX_ODD_EXAMPLES {
                odd_examples.push(Cursor { pattern: r.pattern, offset });
            }
        }
    }
    let complete = records.len() == blocks.len();
    let cursor = blocks.get(records.len()).map(|b| Cursor { pattern: b.pattern, offset: b.offset });
    Ok(ScanReport {
        q,
        expected_total: patterns.iter().map(|p| p.candidates(q)).sum(),
        patterns: per,
        totals,
        complete,
        cursor,
        odd_examples,
        config,
        config_digest: digest,
        runtime_ms: opts.timing.then(|| start.elapsed().as_millis() as u64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::make_field_q;
    use crate::rational_maps::Polynomial;

    fn basis(q: u64) -> ScanBasis {
        scan_basis(&make_field_q(q).unwrap()).unwrap()
    }

    #[test]
    fn pattern_shapes_and_totals() {
        let p = enumerate_patterns();
        assert_eq!(p.len(), 10);
        let counts: Vec<usize> = p.iter().map(|p| p.free_count()).collect();
        assert_eq!(counts, vec![6, 5, 4, 3, 4, 3, 2, 2, 1, 0]);
        for q in [2u64, 4, 8, 16] {
            let formula = q.pow(6) + q.pow(5) + 2 * q.pow(4) + 2 * q.pow(3) + 2 * q * q + q + 1;
            assert_eq!(candidate_total(q), formula);
        }
        assert_eq!(candidate_total(4), 5797);
        assert_eq!(candidate_total(8), 304265);
        assert_eq!(candidate_total(16), 17965585);
    }

    #[test]
    fn power_basis_is_independent() {
        // Moore matrix (α^i)^{q^j} is invertible iff the α^i are independent over GF(q).
        for q in [4u64, 8] {
            let b = basis(q);
            let moore: Matrix = (0..6)
                .map(|i| (0..6).map(|j| b.frobenius(b.basis()[i], j)).collect())
                .collect();
            assert_ne!(linalg::determinant(b.ext(), &moore), 0);
        }
        assert_eq!(basis(8).ext().order(), 1 << 18);
    }

    #[test]
    fn expansion_inverts_contraction() {
        let b = basis(4);
        for y in (0..4096u32).step_by(7) {
            assert_eq!(b.contract(&b.expand(y)), y);
        }
        let c = [1, 2, 3, 0, 1, 2];
        assert_eq!(b.expand(b.contract(&c)), c);
    }

    #[test]
    fn unit_candidates() {
        let b = basis(4);
        let p = enumerate_patterns();
        let alpha = |i| b.basis()[i];
        assert_eq!(candidate_point(&b, &p[9], &[]).unwrap(), [1, alpha(4), alpha(5)]);
        assert_eq!(candidate_point(&b, &p[0], &[0; 6]).unwrap(), [1, alpha(1), alpha(2)]);
        assert_eq!(
            candidate_point(&b, &p[0], &[0; 5]).unwrap_err(),
            ScanError::LengthMismatch { expected: 6, got: 5 }
        );
    }

    #[test]
    fn candidate_rows_reexpand() {
        let b = basis(4);
        let p = &enumerate_patterns()[0];
        let free = [1, 2, 3, 3, 2, 1];
        let [_, y, z] = candidate_point(&b, p, &free).unwrap();
        // Independent oracle: Σ c_i α^i by direct field arithmetic.
        let e = b.ext();
        let direct = |row: [u32; 6]| {
            (0..6).fold(0, |acc, i| e.add(acc, e.mul(b.embedding().embed(row[i]), e.pow(b.alpha(), i as u64))))
        };
        assert_eq!(y, direct([0, 1, 0, 1, 2, 3]));
        assert_eq!(z, direct([0, 0, 1, 3, 2, 1]));
        assert_eq!(b.expand(y), [0, 1, 0, 1, 2, 3]);
    }

    #[test]
    fn orbit_degrees() {
        let b = basis(4);
        let e = b.ext();
        assert_eq!(orbit_degree(&b, &[1, b.embedding().embed(2), b.embedding().embed(3)]), 1);
        assert_eq!(orbit_degree(&b, &[1, b.alpha(), e.mul(b.alpha(), b.alpha())]), 6);
        // An element of GF(q^2) \ GF(q): norm-like power of α.
        let q = 4u64;
        let g2 = e.pow(b.alpha(), (q.pow(6) - 1) / (q * q - 1));
        assert_eq!(orbit_degree(&b, &[1, g2, b.embedding().embed(1)]), 2);
    }

    #[test]
    fn generic_kernel_has_dimension_three() {
        let b = basis(4);
        let pat = &enumerate_patterns()[0];
        let p = candidate_point(&b, pat, &[1, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(orbit_degree(&b, &p), 6);
        match singularity_kernel(&b, &p) {
            KernelResult::Quintics(k) => assert_eq!(k.len(), 3),
            other => panic!("{other:?}"),
        }
        // [1 : α : α^2] has its orbit on the conic y^2 = xz, so the conditions are dependent.
        let conic = [1, b.basis()[1], b.basis()[2]];
        assert!(matches!(singularity_kernel(&b, &conic), KernelResult::Discard { dimension } if dimension > 3));
    }

    #[test]
    fn collinear_orbit_has_large_kernel() {
        let b = basis(4);
        let f = b.field().clone();
        let a = b.alpha();
        // All conjugates lie on the rational line z = x + y.
        let p = [1, a, b.ext().add(a, 1)];
        let sys = singularity_system(&b, &p);
        // Oracle: every L^2 * cubic with L = x + y + z is in the kernel.
        let l = Polynomial::parse("x0+x1+x2", &f, 3).unwrap();
        let monos = homogeneous_monomials(3, 5);
        for cubic in homogeneous_monomials(3, 3) {
            let g = l.pow(2).mul(&Polynomial::monomial(&f, cubic, 1));
            let v: Vec<u32> = monos.iter().map(|e| g.coefficient(e)).collect();
            assert!(linalg::mat_vec(&f, &sys, &v).iter().all(|&x| x == 0));
        }
        assert!(matches!(singularity_kernel(&b, &p), KernelResult::Discard { dimension } if dimension >= 10));
    }

    #[test]
    fn conjugate_rows_do_not_change_the_kernel() {
        let b = basis(4);
        let patterns = enumerate_patterns();
        let mut checked = 0;
        for offset in (0..4096u64).step_by(409) {
            let pat = &patterns[0];
            let p = candidate_point(&b, pat, &pat.free_values(4, offset)).unwrap();
            if orbit_degree(&b, &p) != 6 {
                continue;
            }
            let mut full = singularity_system(&b, &p);
            for k in 1..6 {
                full.extend(singularity_system(&b, &p.map(|x| b.frobenius(x, k))));
            }
            let field = b.field();
            assert_eq!(linalg::kernel(field, &full, 21), linalg::kernel(field, &singularity_system(&b, &p), 21));
            checked += 1;
        }
        assert!(checked >= 5);
    }

    #[test]
    fn synthetic_classifications() {
        let f = make_field_q(4).unwrap();
        let eval = QuinticEvaluator::new(PointTable::new(2, &f).unwrap());
        let monos = homogeneous_monomials(3, 5);
        let unit = |e: [u32; 3]| -> Vec<u32> { monos.iter().map(|m| u32::from(m[..] == e[..])).collect() };
        let (x5, y5, z5) = (unit([5, 0, 0]), unit([0, 5, 0]), unit([0, 0, 5]));
        assert_eq!(eval.classify(&[x5.clone(), x5.clone(), z5.clone()]), Outcome::DiscardNoninjective);
        // Over GF(4) this is the Frobenius: 7 fixed points and 7 transpositions.
        assert_eq!(eval.classify(&[x5.clone(), y5.clone(), z5.clone()]), Outcome::Odd);
        let xy4 = unit([1, 4, 0]);
        assert_eq!(eval.classify(&[xy4, unit([0, 1, 4]), unit([4, 0, 1])]), Outcome::DiscardBase);
    }

    #[test]
    fn pattern_ten_candidate_is_classified() {
        let b = basis(4);
        let eval = QuinticEvaluator::new(PointTable::new(2, b.field()).unwrap());
        let p = candidate_point(&b, &enumerate_patterns()[9], &[]).unwrap();
        let o = classify_candidate(&b, &p, &eval);
        assert!(matches!(o, Outcome::Even | Outcome::DiscardKernel | Outcome::DiscardDegree), "{o:?}");
    }

    #[test]
    fn small_scan_is_deterministic_and_resumable() {
        let f = make_field_q(4).unwrap();
        let base = ScanOptions { patterns: Some(vec![3, 9, 10]), block_size: 16, ..ScanOptions::default() };
        let one = run_scan(&f, &ScanOptions { jobs: 1, ..base.clone() }).unwrap();
        let many = run_scan(&f, &ScanOptions { jobs: 4, ..base.clone() }).unwrap();
        assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&many).unwrap());
        assert_eq!(one.totals.processed, 256 + 4 + 1);
        assert_eq!(one.totals.odd, 0);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.jsonl");
        let ck = ScanOptions { checkpoint: Some(path.clone()), jobs: 2, ..base.clone() };
        let partial = run_scan(&f, &ScanOptions { stop_after_blocks: Some(5), ..ck.clone() }).unwrap();
        assert!(!partial.complete);
        assert_eq!(partial.cursor, Some(Cursor { pattern: 3, offset: 80 }));
        // Simulate a crash mid-write.
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("{\"kind\":\"blo");
        std::fs::write(&path, text).unwrap();
        let resumed = run_scan(&f, &ScanOptions { resume: true, ..ck.clone() }).unwrap();
        assert_eq!(serde_json::to_string(&resumed).unwrap(), serde_json::to_string(&one).unwrap());
        let last = std::fs::read_to_string(&path).unwrap().lines().last().unwrap().to_string();
        assert!(last.contains("\"complete\":true") && last.contains(&one.config_digest));

        let other = ScanOptions { block_size: 32, resume: true, ..ck };
        assert!(matches!(run_scan(&f, &other), Err(ScanError::ChecksumMismatch { .. })));
    }

    #[test]
    fn rejects_bad_configs() {
        let f = make_field_q(4).unwrap();
        let bad = ScanOptions { patterns: Some(vec![11]), ..ScanOptions::default() };
        assert_eq!(run_scan(&f, &bad).unwrap_err(), ScanError::UnknownPattern(11));
        let f3 = make_field_q(3).unwrap();
        assert_eq!(scan_basis(&f3).unwrap_err(), ScanError::UnsupportedField(3));
    }
}
