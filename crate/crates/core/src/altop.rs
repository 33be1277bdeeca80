//! Alternative operations on `F2^n`.
//!
//! An operation is given in canonical form by its defining matrix: a
//! symmetric, zero-diagonal array of vectors `b_{i,j}` in `F2^d`, indexed by
//! the `n - d` strong coordinates. The weak-key space is spanned by the last
//! `d` canonical vectors. The operation is
//!
//! ```text
//! x o y = x M_y + y,   M_y = [[I, E_y], [0, I]],   E_y = sum_i y_i E_{e_i}
//! ```
//!
//! where row `j` of `E_{e_i}` is `b_{i,j}`. The induced product
//! `x . y = x + y + x o y` is the alternating bilinear form
//! `(0, ..., 0, (x_1, ..., x_{n-d}) E_y)`.
//!
//! Operations obtained by conjugation are not canonical; they live in
//! [`TranslationGroup`], which carries its conjugator.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::gf2::{common_left_kernel, mask, unit_bits, BitMatrix, BitVec, Subspace, MAX_WIDTH};

/// An additive law on `F2^n` together with its product.
pub trait Operation: Sync {
    fn width(&self) -> usize;

    /// `x o y` on raw bit vectors of [`width`](Operation::width) bits.
    fn circ(&self, x: u64, y: u64) -> u64;

    /// `x . y = x + y + x o y`.
    fn dot(&self, x: u64, y: u64) -> u64 {
        x ^ y ^ self.circ(x, y)
    }
}

/// Plain xor, the trivial operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Xor(pub usize);

impl Operation for Xor {
    fn width(&self) -> usize {
        self.0
    }
    fn circ(&self, x: u64, y: u64) -> u64 {
        x ^ y
    }
    fn dot(&self, _x: u64, _y: u64) -> u64 {
        0
    }
}

/// `W = {k : x o k = x + k for all x}`, computed as the common kernel of
/// `k -> e_i . k`.
pub fn weak_space<O: Operation + ?Sized>(op: &O) -> Subspace {
    let n = op.width();
    let maps: Vec<BitMatrix> = (1..=n)
        .map(|i| {
            let ei = unit_bits(n, i);
            BitMatrix::from_rows(n, (1..=n).map(|j| op.dot(ei, unit_bits(n, j))).collect())
                .expect("dot stays within the width")
        })
        .collect();
    common_left_kernel(n, &maps)
}

/// `U = span{x . y}`; by bilinearity the basis products suffice.
pub fn error_space<O: Operation + ?Sized>(op: &O) -> Subspace {
    let n = op.width();
    let mut u = Subspace::new(n);
    for i in 1..=n {
        for j in i + 1..=n {
            u.insert(op.dot(unit_bits(n, i), unit_bits(n, j)));
        }
    }
    u
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConjugacyInvariant {
    pub n: usize,
    pub d: usize,
    pub dim_u: usize,
}

pub fn conjugacy_invariant<O: Operation + ?Sized>(op: &O) -> ConjugacyInvariant {
    ConjugacyInvariant {
        n: op.width(),
        d: weak_space(op).dim(),
        dim_u: error_space(op).dim(),
    }
}

impl ConjugacyInvariant {
    /// Whether two operations are conjugate under `GL(V)`, where this is
    /// decided by the invariant: always for `d = n - 2`, iff `dim U` agrees for
    /// `d = n - 3`. `None` outside those regimes.
    pub fn conjugate_to(&self, other: &ConjugacyInvariant) -> Option<bool> {
        if self.n != other.n || self.d != other.d {
            return Some(false);
        }
        if self.d + 2 == self.n {
            Some(true)
        } else if self.d + 3 == self.n {
            Some(self.dim_u == other.dim_u)
        } else {
            None
        }
    }
}

/// Index of the unordered strong pair `(i, j)`, `1 <= i < j <= k`.
fn pair_index(k: usize, i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i < j && j <= k);
    (i - 1) * (2 * k - i) / 2 + (j - i - 1)
}

fn pair_count(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Defining matrix of a canonical operation: `n`, `d` and the vectors
/// `b_{i,j}` for `i < j <= n - d`. Diagonal entries are zero and symmetry is
/// implied by storing each unordered pair once.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ThetaSpec {
    n: usize,
    d: usize,
    pairs: Vec<u64>,
}

impl ThetaSpec {
    /// The all-zero matrix. Rejects `d = 0` and `d >= n`, where there is no
    /// matrix to store; `d = n - 1` is storable but never valid.
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 || n > MAX_WIDTH {
            return Err(Error::WidthOutOfRange(n));
        }
        if d == 0 || d >= n {
            return Err(Error::DimensionOutOfRange { n, d });
        }
        Ok(ThetaSpec {
            n,
            d,
            pairs: vec![0; pair_count(n - d)],
        })
    }

    /// The `d = s - 2` operation on `F2^s` defined by the single vector `b`.
    pub fn single_vector(s: usize, b: u64) -> Result<Self> {
        let mut spec = ThetaSpec::new(s, s.saturating_sub(2).max(1))?;
        spec.set(1, 2, b)?;
        Ok(spec)
    }

    /// Builds a spec from `(i, j, binary string)` entries.
    pub fn from_entries(n: usize, d: usize, entries: &[(usize, usize, &str)]) -> Result<Self> {
        let mut spec = ThetaSpec::new(n, d)?;
        for &(i, j, b) in entries {
            let v = BitVec::parse_binary(b)?;
            if v.width() != d {
                return Err(Error::WidthMismatch {
                    expected: d,
                    found: v.width(),
                });
            }
            spec.set(i, j, v.bits())?;
        }
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of strong coordinates, `n - d`.
    pub fn strong_dim(&self) -> usize {
        self.n - self.d
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let k = self.strong_dim();
        if i == 0 || j == 0 || i > k || j > k {
            return Err(Error::InvalidSpec(format!(
                "entry ({i},{j}) is outside 1..={k}"
            )));
        }
        Ok(())
    }

    /// Sets `b_{i,j} = b_{j,i}`.
    pub fn set(&mut self, i: usize, j: usize, b: u64) -> Result<()> {
        self.check_pair(i, j)?;
        if i == j {
            return Err(Error::InvalidSpec(format!("diagonal entry ({i},{i})")));
        }
        if b & !mask(self.d) != 0 {
            return Err(Error::ValueOverflow {
                width: self.d,
                bits: b,
            });
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let idx = pair_index(self.strong_dim(), lo, hi);
        self.pairs[idx] = b;
        Ok(())
    }

    /// `b_{i,j}`, zero on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> u64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Less => self.pairs[pair_index(self.strong_dim(), i, j)],
            std::cmp::Ordering::Greater => self.pairs[pair_index(self.strong_dim(), j, i)],
        }
    }

    /// `(i, j, b_{i,j})` for every stored pair, in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        let k = self.strong_dim();
        (1..=k).flat_map(move |i| (i + 1..=k).map(move |j| (i, j, self.get(i, j))))
    }

    /// `E_{e_i}` (1-indexed): the `(n-d) x d` matrix whose row `j` is
    /// `b_{i,j}`. Zero for weak indices `i > n - d`.
    pub fn e_matrix(&self, i: usize) -> BitMatrix {
        let k = self.strong_dim();
        let rows = if i <= k {
            (1..=k).map(|j| self.get(i, j)).collect()
        } else {
            vec![0; k]
        };
        BitMatrix::from_rows(self.d, rows).expect("entries fit in d bits")
    }

    /// Parses the text format:
    ///
    /// ```text
    /// # comment
    /// n: 6
    /// d: 3
    /// 1,2: 101
    /// 1,3: 110
    /// ```
    ///
    /// Omitted entries are zero.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut d = None;
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once(':').ok_or_else(|| {
                Error::Parse(format!("line {}: expected `key: value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let int = |v: &str| {
                v.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            match key {
                "n" => n = Some(int(value)?),
                "d" => d = Some(int(value)?),
                _ => {
                    let (i, j) = key.split_once(',').ok_or_else(|| {
                        Error::Parse(format!("line {}: unknown key {key:?}", lineno + 1))
                    })?;
                    entries.push((int(i.trim())?, int(j.trim())?, value.to_string()));
                }
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing field n".into()))?;
        let d = d.ok_or_else(|| Error::Parse("missing field d".into()))?;
        let mut spec = ThetaSpec::new(n, d)?;
        for (i, j, b) in entries {
            let v = BitVec::parse_binary(&b)?;
            if v.width() != d {
                return Err(Error::WidthMismatch {
                    expected: d,
                    found: v.width(),
                });
            }
            spec.set(i, j, v.bits())?;
        }
        Ok(spec)
    }

    pub fn render(&self) -> String {
        let mut s = format!("n: {}\nd: {}\n", self.n, self.d);
        for (i, j, b) in self.entries() {
            if b != 0 {
                s.push_str(&format!("{i},{j}: {:0w$b}\n", b, w = self.d));
            }
        }
        s
    }
}

impl fmt::Debug for ThetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries: Vec<String> = self
            .entries()
            .map(|(i, j, b)| format!("{i},{j}:{:0w$b}", b, w = self.d))
            .collect();
        write!(
            f,
            "ThetaSpec(n={}, d={}, [{}])",
            self.n,
            self.d,
            entries.join(" ")
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: bool,
    /// Dimension of the space of column combinations that vanish.
    pub kernel_dim: usize,
    /// One vanishing combination, as 1-indexed column numbers.
    pub violating_columns: Option<Vec<usize>>,
}

/// Checks that no nontrivial combination of the columns of the defining
/// matrix vanishes. A combination `c` of columns vanishes exactly when
/// `c E_{e_i} = 0` for every strong `i`, so the check is a common kernel.
pub fn validate_theta(spec: &ThetaSpec) -> Result<ValidationReport> {
    let (n, d) = (spec.n(), spec.d());
    if d < 1 || d + 2 > n {
        return Err(Error::DimensionOutOfRange { n, d });
    }
    let k = spec.strong_dim();
    let maps: Vec<BitMatrix> = (1..=k).map(|i| spec.e_matrix(i)).collect();
    let kernel = common_left_kernel(k, &maps);
    let violating_columns = kernel.basis().first().map(|&c| {
        (1..=k)
            .filter(|&j| c & unit_bits(k, j) != 0)
            .collect::<Vec<_>>()
    });
    Ok(ValidationReport {
        valid: kernel.dim() == 0,
        kernel_dim: kernel.dim(),
        violating_columns,
    })
}

/// Fast validity check on the packed pair list, for enumeration. Brute force
/// over column combinations; `k` must be small.
fn pairs_valid(k: usize, pairs: &[u64]) -> bool {
    let b = |i: usize, j: usize| -> u64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Less => pairs[pair_index(k, i, j)],
            std::cmp::Ordering::Greater => pairs[pair_index(k, j, i)],
        }
    };
    'combo: for c in 1u64..(1 << k) {
        for i in 1..=k {
            let mut acc = 0;
            for j in 1..=k {
                if c & unit_bits(k, j) != 0 {
                    acc ^= b(i, j);
                }
            }
            if acc != 0 {
                continue 'combo;
            }
        }
        return false;
    }
    true
}

/// Largest `d * C(n-d, 2)` (free bits of the defining matrix) that
/// [`enumerate_canonical`] accepts.
pub const CANONICAL_ENUMERATION_BITS: usize = 24;

/// Every valid canonical defining matrix for `(n, d)`, each once. Lazy; the
/// order is the binary counter over the pair list, first pair most
/// significant.
pub fn enumerate_canonical(n: usize, d: usize) -> Result<CanonicalSpecs> {
    let probe = ThetaSpec::new(n, d)?;
    if d + 2 > n {
        return Err(Error::DimensionOutOfRange { n, d });
    }
    let bits = d * probe.pairs.len();
    if bits > CANONICAL_ENUMERATION_BITS {
        return Err(Error::SizeTooLarge {
            what: "canonical operation enumeration (free bits)",
            requested: bits as u64,
            limit: CANONICAL_ENUMERATION_BITS as u64,
        });
    }
    Ok(CanonicalSpecs {
        template: probe,
        next: 0,
        end: 1u64 << bits,
    })
}

pub struct CanonicalSpecs {
    template: ThetaSpec,
    next: u64,
    end: u64,
}

impl CanonicalSpecs {
    fn decode(&self, counter: u64) -> Vec<u64> {
        let d = self.template.d;
        let count = self.template.pairs.len();
        (0..count)
            .map(|p| (counter >> (d * (count - 1 - p))) & mask(d))
            .collect()
    }
}

impl Iterator for CanonicalSpecs {
    type Item = ThetaSpec;

    fn next(&mut self) -> Option<ThetaSpec> {
        let k = self.template.strong_dim();
        while self.next < self.end {
            let pairs = self.decode(self.next);
            self.next += 1;
            if pairs_valid(k, &pairs) {
                return Some(ThetaSpec {
                    pairs,
                    ..self.template.clone()
                });
            }
        }
        None
    }
}

/// Largest `n` for which the full `2^n x 2^n` table is materialized.
pub const CIRC_TABLE_MAX_WIDTH: usize = 8;

/// Full lookup table of an operation on at most 8 bits.
#[derive(Clone, PartialEq, Eq)]
pub struct CircTable {
    n: usize,
    table: Vec<u8>,
}

impl CircTable {
    pub fn build<O: Operation + ?Sized>(op: &O) -> Result<Self> {
        let n = op.width();
        if n > CIRC_TABLE_MAX_WIDTH {
            return Err(Error::SizeTooLarge {
                what: "operation table width",
                requested: n as u64,
                limit: CIRC_TABLE_MAX_WIDTH as u64,
            });
        }
        let size = 1usize << n;
        let mut table = vec![0u8; size * size];
        for x in 0..size {
            for y in 0..size {
                table[(x << n) | y] = op.circ(x as u64, y as u64) as u8;
            }
        }
        Ok(CircTable { n, table })
    }

    #[inline(always)]
    pub fn get(&self, x: usize, y: usize) -> usize {
        self.table[(x << self.n) | y] as usize
    }

    /// The row `{x o y : y}` for a fixed `x`.
    #[inline]
    pub fn row(&self, x: usize) -> &[u8] {
        let size = 1usize << self.n;
        &self.table[x * size..(x + 1) * size]
    }

    pub fn width(&self) -> usize {
        self.n
    }
}

impl Operation for CircTable {
    fn width(&self) -> usize {
        self.n
    }
    fn circ(&self, x: u64, y: u64) -> u64 {
        self.get(x as usize, y as usize) as u64
    }
}

/// Largest strong dimension for which the product table is precomputed.
const STRONG_TABLE_MAX: usize = 8;

/// An executable canonical operation built from a valid [`ThetaSpec`].
#[derive(Clone)]
pub struct AltOperation {
    spec: ThetaSpec,
    /// `b_{i,j}` as a dense `k x k` array, `k = n - d`, 0-indexed.
    b: Vec<u64>,
    /// `x . y` indexed by the strong parts, when `k` is small.
    strong_table: Option<Vec<u64>>,
    circ_table: Option<CircTable>,
}

/// Validates `spec` and assembles the operation.
pub fn build_operation(spec: &ThetaSpec) -> Result<AltOperation> {
    let report = validate_theta(spec)?;
    if !report.valid {
        return Err(Error::InvalidSpec(format!(
            "columns {:?} sum to zero",
            report.violating_columns.unwrap_or_default()
        )));
    }
    let k = spec.strong_dim();
    let mut b = vec![0u64; k * k];
    for i in 1..=k {
        for j in 1..=k {
            b[(i - 1) * k + (j - 1)] = spec.get(i, j);
        }
    }
    let mut op = AltOperation {
        spec: spec.clone(),
        b,
        strong_table: None,
        circ_table: None,
    };
    if k <= STRONG_TABLE_MAX {
        let size = 1usize << k;
        let mut table = vec![0u64; size * size];
        for xs in 0..size {
            for ys in 0..size {
                table[(xs << k) | ys] = op.strong_product(xs as u64, ys as u64);
            }
        }
        op.strong_table = Some(table);
    }
    if spec.n() <= CIRC_TABLE_MAX_WIDTH {
        op.circ_table = Some(CircTable::build(&op)?);
    }
    Ok(op)
}

impl AltOperation {
    pub fn spec(&self) -> &ThetaSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn d(&self) -> usize {
        self.spec.d()
    }

    pub fn circ_table(&self) -> Option<&CircTable> {
        self.circ_table.as_ref()
    }

    /// `(x_1..x_k) E_y` from the strong parts, without tables.
    fn strong_product(&self, xs: u64, ys: u64) -> u64 {
        let k = self.spec.strong_dim();
        let mut acc = 0;
        for i in 0..k {
            if xs >> (k - 1 - i) & 1 == 0 {
                continue;
            }
            for j in 0..k {
                if ys >> (k - 1 - j) & 1 == 1 {
                    acc ^= self.b[i * k + j];
                }
            }
        }
        acc
    }

    /// `E_{e_i}`, 1-indexed.
    pub fn e_matrix(&self, i: usize) -> BitMatrix {
        self.spec.e_matrix(i)
    }

    /// `E_a = sum_i a_i E_{e_i}`.
    pub fn e_of(&self, a: u64) -> BitMatrix {
        let (n, k, d) = (self.n(), self.spec.strong_dim(), self.d());
        let rows = (1..=k)
            .map(|j| {
                (1..=k)
                    .filter(|&i| a & unit_bits(n, i) != 0)
                    .fold(0, |acc, i| acc ^ self.spec.get(i, j))
            })
            .collect();
        BitMatrix::from_rows(d, rows).expect("entries fit in d bits")
    }

    /// `M_a = [[I, E_a], [0, I]]`.
    pub fn translation_matrix(&self, a: u64) -> BitMatrix {
        let (n, k) = (self.n(), self.spec.strong_dim());
        let mut m = BitMatrix::identity(n);
        m.set_block(0, k, &self.e_of(a));
        m
    }

    /// `e_{n-d+1}, ..., e_n`.
    pub fn weak_basis(&self) -> Vec<u64> {
        let n = self.n();
        (self.spec.strong_dim() + 1..=n)
            .map(|i| unit_bits(n, i))
            .collect()
    }

    /// Basis of `U`: the span of the defining vectors, embedded in the weak
    /// coordinates.
    pub fn error_basis(&self) -> Vec<u64> {
        Subspace::span(self.n(), self.spec.entries().map(|(_, _, b)| b)).basis()
    }

    fn check(&self, v: &BitVec) -> Result<()> {
        if v.width() != self.n() {
            return Err(Error::WidthMismatch {
                expected: self.n(),
                found: v.width(),
            });
        }
        Ok(())
    }

    pub fn circ_add(&self, x: &BitVec, y: &BitVec) -> Result<BitVec> {
        self.check(x)?;
        self.check(y)?;
        BitVec::new(self.n(), self.circ(x.bits(), y.bits()))
    }

    pub fn dot_vec(&self, x: &BitVec, y: &BitVec) -> Result<BitVec> {
        self.check(x)?;
        self.check(y)?;
        BitVec::new(self.n(), self.dot(x.bits(), y.bits()))
    }
}

impl Operation for AltOperation {
    fn width(&self) -> usize {
        self.n()
    }

    #[inline]
    fn circ(&self, x: u64, y: u64) -> u64 {
        match &self.circ_table {
            Some(t) => t.get(x as usize, y as usize) as u64,
            None => x ^ y ^ self.dot(x, y),
        }
    }

    #[inline]
    fn dot(&self, x: u64, y: u64) -> u64 {
        let d = self.d();
        let (xs, ys) = (x >> d, y >> d);
        match &self.strong_table {
            Some(t) => t[((xs as usize) << self.spec.strong_dim()) | ys as usize],
            None => self.strong_product(xs, ys),
        }
    }
}

impl fmt::Debug for AltOperation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AltOperation({:?})", self.spec)
    }
}

/// Block-wise operation on `F2^(s*b)`; block 1 holds the most significant
/// `s` bits.
#[derive(Clone, Debug)]
pub struct ParallelOperation {
    s: usize,
    blocks: Vec<AltOperation>,
}

pub fn parallel_compose(blocks: Vec<AltOperation>) -> Result<ParallelOperation> {
    let s = blocks
        .first()
        .map(|b| b.n())
        .ok_or(Error::HeterogeneousWidths)?;
    if blocks.iter().any(|b| b.n() != s) {
        return Err(Error::HeterogeneousWidths);
    }
    if s * blocks.len() > MAX_WIDTH {
        return Err(Error::WidthOutOfRange(s * blocks.len()));
    }
    Ok(ParallelOperation { s, blocks })
}

impl ParallelOperation {
    /// `count` copies of `op`.
    pub fn uniform(op: &AltOperation, count: usize) -> Result<Self> {
        parallel_compose(vec![op.clone(); count])
    }

    pub fn block_width(&self) -> usize {
        self.s
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[AltOperation] {
        &self.blocks
    }

    /// Bit offset of block `j` (0-indexed) from the least significant end.
    #[inline]
    pub fn shift(&self, j: usize) -> usize {
        self.s * (self.blocks.len() - 1 - j)
    }

    /// Weak space: the block weak spaces placed side by side.
    pub fn weak_basis(&self) -> Vec<u64> {
        (0..self.blocks.len())
            .flat_map(|j| {
                let shift = self.shift(j);
                self.blocks[j]
                    .weak_basis()
                    .into_iter()
                    .map(move |w| w << shift)
            })
            .collect()
    }

    pub fn circ_add(&self, x: &BitVec, y: &BitVec) -> Result<BitVec> {
        for v in [x, y] {
            if v.width() != self.width() {
                return Err(Error::WidthMismatch {
                    expected: self.width(),
                    found: v.width(),
                });
            }
        }
        BitVec::new(self.width(), self.circ(x.bits(), y.bits()))
    }
}

impl Operation for ParallelOperation {
    fn width(&self) -> usize {
        self.s * self.blocks.len()
    }

    #[inline]
    fn circ(&self, x: u64, y: u64) -> u64 {
        let m = mask(self.s);
        let mut out = 0;
        for (j, op) in self.blocks.iter().enumerate() {
            let shift = self.shift(j);
            out |= op.circ((x >> shift) & m, (y >> shift) & m) << shift;
        }
        out
    }

    #[inline]
    fn dot(&self, x: u64, y: u64) -> u64 {
        let m = mask(self.s);
        let mut out = 0;
        for (j, op) in self.blocks.iter().enumerate() {
            let shift = self.shift(j);
            out |= op.dot((x >> shift) & m, (y >> shift) & m) << shift;
        }
        out
    }
}

/// Largest `n` for which translation groups are materialized.
pub const TRANSLATION_GROUP_MAX_WIDTH: usize = 12;

/// Where a translation group came from: a canonical spec and the conjugator
/// `g` with `T = g T_spec g^{-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupOrigin {
    pub spec: ThetaSpec,
    pub conjugator: BitMatrix,
}

/// The translations `tau_a : x -> x M_a + a`, stored as `M_a` indexed by `a`.
///
/// Conjugation uses postfix action: `x (g tau g^{-1}) = ((x g) tau) g^{-1}`,
/// so `tau_a` becomes the translation by `a g^{-1}` with matrix
/// `g M_a g^{-1}`.
#[derive(Clone, Debug)]
pub struct TranslationGroup {
    n: usize,
    mats: Vec<BitMatrix>,
    origin: Option<GroupOrigin>,
}

impl TranslationGroup {
    fn check_width(n: usize) -> Result<()> {
        if n > TRANSLATION_GROUP_MAX_WIDTH {
            return Err(Error::SizeTooLarge {
                what: "translation group width",
                requested: n as u64,
                limit: TRANSLATION_GROUP_MAX_WIDTH as u64,
            });
        }
        Ok(())
    }

    pub fn from_operation(op: &AltOperation) -> Result<Self> {
        let n = op.n();
        Self::check_width(n)?;
        Ok(TranslationGroup {
            n,
            mats: (0..1u64 << n).map(|a| op.translation_matrix(a)).collect(),
            origin: Some(GroupOrigin {
                spec: op.spec().clone(),
                conjugator: BitMatrix::identity(n),
            }),
        })
    }

    /// Reads the translations off any operation: row `i` of `M_a` is
    /// `(e_i o a) + a`.
    pub fn from_law<O: Operation + ?Sized>(op: &O) -> Result<Self> {
        let n = op.width();
        Self::check_width(n)?;
        let mats = (0..1u64 << n)
            .map(|a| {
                let rows = (1..=n).map(|i| op.circ(unit_bits(n, i), a) ^ a).collect();
                BitMatrix::from_rows(n, rows)
            })
            .collect::<Result<_>>()?;
        Ok(TranslationGroup {
            n,
            mats,
            origin: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn origin(&self) -> Option<&GroupOrigin> {
        self.origin.as_ref()
    }

    /// `M_a` of the translation sending 0 to `a`.
    pub fn translation(&self, a: u64) -> &BitMatrix {
        &self.mats[a as usize]
    }

    /// `T^g = g T g^{-1}`.
    pub fn conjugate(&self, g: &BitMatrix) -> Result<Self> {
        if g.rows() != self.n || g.cols() != self.n {
            return Err(Error::WidthMismatch {
                expected: self.n,
                found: g.rows(),
            });
        }
        let g_inv = g.inverse().map_err(|_| Error::SingularConjugator)?;
        let mut mats = vec![BitMatrix::zero(self.n, self.n); self.mats.len()];
        for (a, m) in self.mats.iter().enumerate() {
            let image = g_inv.mul_vec(a as u64) as usize;
            mats[image] = g.mul(m)?.mul(&g_inv)?;
        }
        let origin = match &self.origin {
            Some(o) => Some(GroupOrigin {
                spec: o.spec.clone(),
                conjugator: g.mul(&o.conjugator)?,
            }),
            None => None,
        };
        Ok(TranslationGroup {
            n: self.n,
            mats,
            origin,
        })
    }

    /// Set identity of the group: the matrices in translation order.
    pub fn key(&self) -> Vec<u64> {
        self.mats
            .iter()
            .flat_map(|m| m.row_words().iter().copied())
            .collect()
    }

    /// Compact identity: the rows of `M_{e_1}, ..., M_{e_n}` in hex. The map
    /// `a -> M_a - I` is linear, so these determine the whole group.
    pub fn fingerprint(&self) -> String {
        let n = self.n;
        let digits = n.div_ceil(4);
        (1..=n)
            .map(|i| {
                self.translation(unit_bits(n, i))
                    .row_words()
                    .iter()
                    .map(|r| format!("{:0w$x}", r, w = digits))
                    .collect::<String>()
            })
            .collect::<Vec<_>>()
            .join(":")
    }

    /// Exhaustive check that the stored maps form an elementary abelian
    /// regular group with `M_a` linear in the right sense:
    /// `tau_a tau_b = tau_{a o b} = tau_b tau_a` and `tau_a^2 = 1`.
    pub fn is_elementary_abelian_regular(&self) -> bool {
        let size = self.mats.len();
        if self.mats[0] != BitMatrix::identity(self.n) {
            return false;
        }
        for a in 0..size {
            let ma = &self.mats[a];
            if !ma.is_invertible() {
                return false;
            }
            // tau_a^2: x -> x M_a M_a + a M_a + a
            if ma.mul_vec(a as u64) != a as u64
                || ma.mul(ma).ok().as_ref() != Some(&BitMatrix::identity(self.n))
            {
                return false;
            }
            for b in a + 1..size {
                let mb = &self.mats[b];
                let ab = ma.mul(mb).expect("square");
                if ab != mb.mul(ma).expect("square") {
                    return false;
                }
                let a_circ_b = (mb.mul_vec(a as u64) ^ b as u64) as usize;
                if self.mats[a_circ_b] != ab {
                    return false;
                }
            }
        }
        true
    }

    /// Every element of `GL` conjugates the group onto itself.
    pub fn is_normalized_by(&self, g: &BitMatrix) -> Result<bool> {
        Ok(self.conjugate(g)?.key() == self.key())
    }
}

impl Operation for TranslationGroup {
    fn width(&self) -> usize {
        self.n
    }
    fn circ(&self, x: u64, y: u64) -> u64 {
        self.mats[y as usize].mul_vec(x) ^ y
    }
}

/// Conjugates the group of `base` by every matrix in `conjugators` and keeps
/// the first conjugate of each distinct group, in conjugator order.
pub fn distinct_conjugates(
    base: &TranslationGroup,
    conjugators: &[BitMatrix],
) -> Result<Vec<TranslationGroup>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for g in conjugators {
        let t = base.conjugate(g)?;
        if seen.insert(t.key()) {
            out.push(t);
        }
    }
    Ok(out)
}

/// Named defining matrices used throughout.
pub mod catalog {
    use super::ThetaSpec;

    /// `n = 4, d = 2, b = (0, 1)`: the 4-bit operation of the toy SPN.
    pub fn b01() -> ThetaSpec {
        ThetaSpec::single_vector(4, 0b01).expect("static spec")
    }

    /// `n = 6, d = 3` with `b_12, b_13, b_23` independent, so `dim U = 3`.
    pub fn n6_full_error_space() -> ThetaSpec {
        ThetaSpec::from_entries(6, 3, &[(1, 2, "100"), (1, 3, "010"), (2, 3, "001")])
            .expect("static spec")
    }

    /// `n = 6, d = 3` with `b_12 = b_23 = 101`, `b_13 = 110`, so `dim U = 2`.
    pub fn n6_rank2_error_space() -> ThetaSpec {
        ThetaSpec::from_entries(6, 3, &[(1, 2, "101"), (1, 3, "110"), (2, 3, "101")])
            .expect("static spec")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::enumerate_gl;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn b01_op() -> AltOperation {
        build_operation(&catalog::b01()).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(validate_theta(&catalog::b01()).unwrap().valid);
        let zero = ThetaSpec::new(4, 2).unwrap();
        let report = validate_theta(&zero).unwrap();
        assert!(!report.valid);
        assert_eq!(report.kernel_dim, 2);
        assert!(report.violating_columns.is_some());
        assert!(
            validate_theta(&catalog::n6_rank2_error_space())
                .unwrap()
                .valid
        );
        assert!(
            validate_theta(&catalog::n6_full_error_space())
                .unwrap()
                .valid
        );
        // d = n - 1 is storable but out of range for validation
        let wide = ThetaSpec::new(4, 3).unwrap();
        assert!(matches!(
            validate_theta(&wide),
            Err(Error::DimensionOutOfRange { .. })
        ));
        assert!(matches!(
            ThetaSpec::new(4, 0),
            Err(Error::DimensionOutOfRange { .. })
        ));
        assert!(matches!(build_operation(&zero), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn violating_combination_really_vanishes() {
        // columns 1 and 2 equal, column 3 independent
        let spec = ThetaSpec::from_entries(5, 2, &[(1, 3, "01"), (2, 3, "01")]).unwrap();
        let report = validate_theta(&spec).unwrap();
        assert!(!report.valid);
        let cols = report.violating_columns.unwrap();
        for i in 1..=3 {
            let sum = cols.iter().fold(0, |acc, &j| acc ^ spec.get(i, j));
            assert_eq!(sum, 0);
        }
    }

    #[test]
    fn e_matrices_of_b01() {
        let op = b01_op();
        assert_eq!(
            op.e_matrix(1),
            BitMatrix::from_binary_rows(&["00", "01"]).unwrap()
        );
        assert_eq!(
            op.e_matrix(2),
            BitMatrix::from_binary_rows(&["01", "00"]).unwrap()
        );
        assert!(op.e_matrix(3).is_zero() && op.e_matrix(4).is_zero());
        assert_eq!(
            op.translation_matrix(unit_bits(4, 4)),
            BitMatrix::identity(4)
        );
        let ex2 = build_operation(&catalog::n6_rank2_error_space()).unwrap();
        assert_eq!(
            ex2.e_matrix(1),
            BitMatrix::from_binary_rows(&["000", "101", "110"]).unwrap()
        );
    }

    #[test]
    fn circ_and_dot_examples() {
        let op = b01_op();
        let e = |i| BitVec::unit(4, i).unwrap();
        // oracle: e1 M_{e2} + e2 by explicit matrix multiplication
        let m = op.translation_matrix(e(2).bits());
        let oracle = m.mul_vec(e(1).bits()) ^ e(2).bits();
        assert_eq!(oracle, 0b1101);
        assert_eq!(op.circ_add(&e(1), &e(2)).unwrap().bits(), 0b1101);
        assert_eq!(op.dot_vec(&e(1), &e(2)).unwrap().bits(), 0b0001);
        for x in 0..16 {
            assert_eq!(op.circ(x, 0), x);
            assert_eq!(op.dot(x, x), 0);
            for w in op.weak_basis() {
                assert_eq!(op.circ(x, w), x ^ w);
                assert_eq!(op.dot(w, x), 0);
            }
        }
        let wrong = BitVec::unit(5, 1).unwrap();
        assert!(matches!(
            op.circ_add(&wrong, &e(1)),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn error_space_dimensions() {
        let op = b01_op();
        assert_eq!(op.error_basis(), vec![0b0001]);
        assert_eq!(error_space(&op).dim(), 1);
        let ex2 = build_operation(&catalog::n6_rank2_error_space()).unwrap();
        assert_eq!(ex2.error_basis().len(), 2);
        let ex1 = build_operation(&catalog::n6_full_error_space()).unwrap();
        assert_eq!(ex1.error_basis().len(), 3);
    }

    #[test]
    fn every_n6_d3_operation_has_two_or_three_dim_error_space() {
        for spec in enumerate_canonical(6, 3).unwrap() {
            let op = build_operation(&spec).unwrap();
            let dim = op.error_basis().len();
            assert!(dim == 2 || dim == 3, "{spec:?}");
            assert_eq!(error_space(&op).dim(), dim);
        }
    }

    #[test]
    fn weak_space_matches_canonical_placement() {
        for spec in [
            catalog::b01(),
            catalog::n6_full_error_space(),
            catalog::n6_rank2_error_space(),
        ] {
            let op = build_operation(&spec).unwrap();
            let w = weak_space(&op);
            assert!(w.same_as(&Subspace::span(op.n(), op.weak_basis())));
            let u = error_space(&op);
            assert!(u.basis().iter().all(|&v| w.contains(v)));
        }
    }

    #[test]
    fn canonical_counts() {
        assert_eq!(enumerate_canonical(4, 2).unwrap().count(), 3);
        assert_eq!(enumerate_canonical(8, 6).unwrap().count(), 63);
        assert!(matches!(
            enumerate_canonical(16, 8),
            Err(Error::SizeTooLarge { .. })
        ));
    }

    #[test]
    fn enumerated_specs_respect_dimension_bound() {
        // a valid matrix forces 2 - (n mod 2) <= d <= n - 2
        for n in 3..=7 {
            for d in 1..=n - 2 {
                let Ok(specs) = enumerate_canonical(n, d) else {
                    continue;
                };
                for spec in specs {
                    assert!(d >= 2 - n % 2, "n={n} d={d}");
                    assert!(validate_theta(&spec).unwrap().valid);
                }
            }
        }
    }

    #[test]
    fn parallel_composition() {
        let op = b01_op();
        let par = ParallelOperation::uniform(&op, 4).unwrap();
        assert_eq!(par.width(), 16);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (x, y): (u64, u64) = (rng.gen::<u64>() & 0xffff, rng.gen::<u64>() & 0xffff);
            let z = par.circ(x, y);
            for j in 0..4 {
                let sh = 12 - 4 * j;
                assert_eq!((z >> sh) & 0xf, op.circ((x >> sh) & 0xf, (y >> sh) & 0xf));
            }
            // only block 1 is touched by vectors living in block 1
            let (xb, yb) = (x & 0xf000, y & 0xf000);
            assert_eq!(par.circ(xb, yb) & 0x0fff, 0);
        }
        let single = ParallelOperation::uniform(&op, 1).unwrap();
        for x in 0..16 {
            for y in 0..16 {
                assert_eq!(single.circ(x, y), op.circ(x, y));
            }
        }
        let other = build_operation(&catalog::n6_full_error_space()).unwrap();
        assert!(matches!(
            parallel_compose(vec![op, other]),
            Err(Error::HeterogeneousWidths)
        ));
    }

    #[test]
    fn translation_groups() {
        let op = b01_op();
        let t = TranslationGroup::from_operation(&op).unwrap();
        assert!(t.is_elementary_abelian_regular());
        let from_law = TranslationGroup::from_law(&op).unwrap();
        assert_eq!(from_law.key(), t.key());
        assert_eq!(t.conjugate(&BitMatrix::identity(4)).unwrap().key(), t.key());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let g = crate::gf2::random_invertible(4, &mut rng);
            let tg = t.conjugate(&g).unwrap();
            assert!(tg.is_elementary_abelian_regular());
            let back = tg.conjugate(&g.inverse().unwrap()).unwrap();
            assert_eq!(back.key(), t.key());
            // weak space moves to W g^{-1}
            let g_inv = g.inverse().unwrap();
            let expected = Subspace::span(4, op.weak_basis().iter().map(|&w| g_inv.mul_vec(w)));
            assert!(weak_space(&tg).same_as(&expected));
            assert_eq!(conjugacy_invariant(&tg), conjugacy_invariant(&op));
            // the recorded origin reproduces the group
            let origin = tg.origin().unwrap();
            let rebuilt = TranslationGroup::from_operation(&build_operation(&origin.spec).unwrap())
                .unwrap()
                .conjugate(&origin.conjugator)
                .unwrap();
            assert_eq!(rebuilt.key(), tg.key());
        }
        let singular = BitMatrix::zero(4, 4);
        assert!(matches!(
            t.conjugate(&singular),
            Err(Error::SingularConjugator)
        ));
    }

    #[test]
    fn conjugacy_decisions() {
        let specs: Vec<_> = enumerate_canonical(4, 2).unwrap().collect();
        let invs: Vec<_> = specs
            .iter()
            .map(|s| conjugacy_invariant(&build_operation(s).unwrap()))
            .collect();
        for a in &invs {
            for b in &invs {
                assert_eq!(a.conjugate_to(b), Some(true));
            }
        }
        let full = conjugacy_invariant(&build_operation(&catalog::n6_full_error_space()).unwrap());
        let rank2 =
            conjugacy_invariant(&build_operation(&catalog::n6_rank2_error_space()).unwrap());
        assert_eq!((full.d, full.dim_u), (3, 3));
        assert_eq!((rank2.d, rank2.dim_u), (3, 2));
        assert_eq!(full.conjugate_to(&rank2), Some(false));
    }

    #[test]
    fn theta_text_roundtrip() {
        let spec = catalog::n6_rank2_error_space();
        let text = spec.render();
        assert_eq!(text, "n: 6\nd: 3\n1,2: 101\n1,3: 110\n2,3: 101\n");
        assert_eq!(ThetaSpec::parse(&text).unwrap(), spec);
        let with_comments = "# example\nn: 4\nd: 2\n\n2,1: 01  # symmetric entry\n";
        assert_eq!(ThetaSpec::parse(with_comments).unwrap(), catalog::b01());
        assert!(ThetaSpec::parse("n: 4\n1,2: 01\n").is_err());
        assert!(ThetaSpec::parse("n: 4\nd: 2\n1,2: 011\n").is_err());
        assert!(ThetaSpec::parse("n: 4\nd: 2\n1,1: 01\n").is_err());
    }

    #[test]
    fn all_conjugates_of_b01_number_105() {
        let t = TranslationGroup::from_operation(&b01_op()).unwrap();
        let gl4 = enumerate_gl(4).unwrap();
        let groups = distinct_conjugates(&t, &gl4).unwrap();
        assert_eq!(groups.len(), 105);
        for g in &groups {
            let inv = conjugacy_invariant(g);
            assert_eq!((inv.d, inv.dim_u), (2, 1));
        }
    }
}
