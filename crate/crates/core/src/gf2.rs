//! Bit-packed vectors and matrices over F2.
//!
//! A vector of width `w` is stored in the low `w` bits of a `u64`. Coordinate
//! `x_1` is the most significant of those bits, so the integer value of a
//! vector reads the same as its binary string (`"0110"` is `6`). Matrices act
//! on row vectors from the right: `x -> xM` is the xor of the rows of `M`
//! selected by the coordinates of `x`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, BitXor};
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

pub const MAX_WIDTH: usize = 64;

/// Mask with the low `width` bits set.
#[inline]
pub fn mask(width: usize) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// The canonical basis vector `e_i` (1-indexed) of `F2^width` as raw bits.
#[inline]
pub fn unit_bits(width: usize, i: usize) -> u64 {
    debug_assert!(i >= 1 && i <= width);
    1u64 << (width - i)
}

fn check_width(width: usize) -> Result<()> {
    if width == 0 || width > MAX_WIDTH {
        Err(Error::WidthOutOfRange(width))
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct BitVec {
    width: u8,
    bits: u64,
}

impl BitVec {
    pub fn new(width: usize, bits: u64) -> Result<Self> {
        check_width(width)?;
        if bits & !mask(width) != 0 {
            return Err(Error::ValueOverflow { width, bits });
        }
        Ok(BitVec {
            width: width as u8,
            bits,
        })
    }

    pub fn zero(width: usize) -> Result<Self> {
        Self::new(width, 0)
    }

    /// `e_i`, 1-indexed.
    pub fn unit(width: usize, i: usize) -> Result<Self> {
        check_width(width)?;
        if i == 0 || i > width {
            return Err(Error::WidthMismatch {
                expected: width,
                found: i,
            });
        }
        Self::new(width, unit_bits(width, i))
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Coordinate `x_i`, 1-indexed.
    pub fn get(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.width());
        self.bits >> (self.width() - i) & 1 == 1
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn checked_add(&self, other: &BitVec) -> Result<BitVec> {
        if self.width != other.width {
            return Err(Error::WidthMismatch {
                expected: self.width(),
                found: other.width(),
            });
        }
        Ok(BitVec {
            width: self.width,
            bits: self.bits ^ other.bits,
        })
    }

    /// Parses a binary string, `x_1` first.
    pub fn parse_binary(s: &str) -> Result<Self> {
        let s = s.trim();
        check_width(s.len())?;
        let mut bits = 0u64;
        for c in s.chars() {
            bits = (bits << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::Parse(format!("not a binary digit: {c:?}"))),
                };
        }
        Self::new(s.len(), bits)
    }

    /// Parses a hex string into a vector of the given width.
    pub fn parse_hex(s: &str, width: usize) -> Result<Self> {
        let s = s.trim().trim_start_matches("0x");
        if s.is_empty() || s.len() > 16 {
            return Err(Error::Parse(format!("bad hex length in {s:?}")));
        }
        let bits = u64::from_str_radix(s, 16).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(width, bits)
    }

    pub fn to_binary(&self) -> String {
        format!("{:0w$b}", self.bits, w = self.width())
    }

    pub fn to_hex(&self) -> String {
        format!("{:0w$x}", self.bits, w = self.width().div_ceil(4))
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_binary())
    }
}

impl FromStr for BitVec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse_binary(s)
    }
}

impl Add for BitVec {
    type Output = BitVec;
    /// Panics on a width mismatch; use [`BitVec::checked_add`] otherwise.
    fn add(self, rhs: BitVec) -> BitVec {
        self.checked_add(&rhs)
            .expect("width mismatch in BitVec addition")
    }
}

impl BitXor for BitVec {
    type Output = BitVec;
    fn bitxor(self, rhs: BitVec) -> BitVec {
        self.checked_add(&rhs)
            .expect("width mismatch in BitVec addition")
    }
}

/// Incrementally built subspace of `F2^w`, kept as a xor basis indexed by
/// leading bit.
#[derive(Clone, Debug)]
pub struct Subspace {
    width: usize,
    by_lead: [u64; 64],
    dim: usize,
}

impl Subspace {
    pub fn new(width: usize) -> Self {
        Subspace {
            width,
            by_lead: [0; 64],
            dim: 0,
        }
    }

    pub fn span<I: IntoIterator<Item = u64>>(width: usize, vectors: I) -> Self {
        let mut s = Self::new(width);
        for v in vectors {
            s.insert(v);
        }
        s
    }

    /// Reduces `v` against the basis; zero iff `v` lies in the span.
    pub fn reduce(&self, mut v: u64) -> u64 {
        while v != 0 {
            let lead = 63 - v.leading_zeros() as usize;
            let b = self.by_lead[lead];
            if b == 0 {
                break;
            }
            v ^= b;
        }
        v
    }

    /// Inserts `v`; returns false when it was already in the span.
    pub fn insert(&mut self, v: u64) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        self.by_lead[63 - r.leading_zeros() as usize] = r;
        self.dim += 1;
        true
    }

    pub fn contains(&self, v: u64) -> bool {
        self.reduce(v) == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Echelon basis, highest leading bit first.
    pub fn basis(&self) -> Vec<u64> {
        self.by_lead
            .iter()
            .rev()
            .copied()
            .filter(|&b| b != 0)
            .collect()
    }

    pub fn same_as(&self, other: &Subspace) -> bool {
        self.dim == other.dim && other.basis().iter().all(|&b| self.contains(b))
    }

    /// All elements of the subspace (2^dim of them).
    pub fn elements(&self) -> Vec<u64> {
        let basis = self.basis();
        let mut out = vec![0u64];
        for b in basis {
            let len = out.len();
            for k in 0..len {
                out.push(out[k] ^ b);
            }
        }
        out
    }
}

/// Dense matrix over F2 with at most 64 columns; one word per row.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn from_rows(cols: usize, rows: Vec<u64>) -> Result<Self> {
        check_width(cols)?;
        for &r in &rows {
            if r & !mask(cols) != 0 {
                return Err(Error::ValueOverflow {
                    width: cols,
                    bits: r,
                });
            }
        }
        Ok(BitMatrix {
            rows: rows.len(),
            cols,
            data: rows,
        })
    }

    pub fn from_binary_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let parsed: Vec<BitVec> = rows
            .iter()
            .map(|r| BitVec::parse_binary(r.as_ref()))
            .collect::<Result<_>>()?;
        let cols = parsed.first().map(|v| v.width()).unwrap_or(1);
        if let Some(v) = parsed.iter().find(|v| v.width() != cols) {
            return Err(Error::WidthMismatch {
                expected: cols,
                found: v.width(),
            });
        }
        Self::from_rows(cols, parsed.iter().map(|v| v.bits()).collect())
    }

    pub fn identity(n: usize) -> Self {
        BitMatrix {
            rows: n,
            cols: n,
            data: (1..=n).map(|i| unit_bits(n, i)).collect(),
        }
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        BitMatrix {
            rows,
            cols,
            data: vec![0; rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row `i`, 0-indexed, as raw bits.
    pub fn row(&self, i: usize) -> u64 {
        self.data[i]
    }

    pub fn row_words(&self) -> &[u64] {
        &self.data
    }

    pub fn set_row(&mut self, i: usize, bits: u64) {
        debug_assert!(bits & !mask(self.cols) == 0);
        self.data[i] = bits;
    }

    /// Entry `(i, j)`, both 0-indexed.
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i] >> (self.cols - 1 - j) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let bit = 1u64 << (self.cols - 1 - j);
        if value {
            self.data[i] |= bit;
        } else {
            self.data[i] &= !bit;
        }
    }

    /// `x M` for a row vector given as raw bits of width `rows`.
    #[inline]
    pub fn mul_vec(&self, x: u64) -> u64 {
        let mut acc = 0u64;
        let mut rest = x & mask(self.rows);
        while rest != 0 {
            let lead = 63 - rest.leading_zeros() as usize;
            acc ^= self.data[self.rows - 1 - lead];
            rest &= !(1u64 << lead);
        }
        acc
    }

    pub fn apply(&self, x: &BitVec) -> Result<BitVec> {
        if x.width() != self.rows {
            return Err(Error::WidthMismatch {
                expected: self.rows,
                found: x.width(),
            });
        }
        BitVec::new(self.cols, self.mul_vec(x.bits()))
    }

    /// Matrix product `self * other`; as maps, `self` is applied first.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(Error::WidthMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        Ok(BitMatrix {
            rows: self.rows,
            cols: other.cols,
            data: self.data.iter().map(|&r| other.mul_vec(r)).collect(),
        })
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    pub fn rank(&self) -> usize {
        Subspace::span(self.cols, self.data.iter().copied()).dim()
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Result<BitMatrix> {
        if !self.is_square() {
            return Err(Error::WidthMismatch {
                expected: self.rows,
                found: self.cols,
            });
        }
        let n = self.rows;
        let mut left = self.data.clone();
        let mut right: Vec<u64> = (1..=n).map(|i| unit_bits(n, i)).collect();
        for col in 0..n {
            let bit = unit_bits(n, col + 1);
            let pivot = (col..n)
                .find(|&r| left[r] & bit != 0)
                .ok_or(Error::SingularMatrix)?;
            left.swap(col, pivot);
            right.swap(col, pivot);
            for r in 0..n {
                if r != col && left[r] & bit != 0 {
                    left[r] ^= left[col];
                    right[r] ^= right[col];
                }
            }
        }
        Ok(BitMatrix {
            rows: n,
            cols: n,
            data: right,
        })
    }

    /// Some `x` with `x M = y`, if one exists.
    pub fn solve(&self, y: u64) -> Option<u64> {
        let (basis, _) = self.tracked_elimination();
        let (rest, x) = reduce_tracked(&basis, y, 0);
        (rest == 0).then_some(x)
    }

    /// Basis of `{x : x M = 0}`.
    pub fn left_kernel(&self) -> Vec<u64> {
        self.tracked_elimination().1
    }

    /// Row reduction remembering, for every pivot, which rows were combined.
    /// Returns the pivots indexed by leading bit and the kernel combinations.
    fn tracked_elimination(&self) -> ([(u64, u64); 64], Vec<u64>) {
        let mut basis = [(0u64, 0u64); 64];
        let mut kernel = Vec::new();
        for (i, &r) in self.data.iter().enumerate() {
            let (v, combo) = reduce_tracked(&basis, r, unit_bits(self.rows, i + 1));
            if v == 0 {
                kernel.push(combo);
            } else {
                basis[63 - v.leading_zeros() as usize] = (v, combo);
            }
        }
        (basis, kernel)
    }

    /// The block with rows `r0..r0+h` and columns `c0..c0+w` (0-indexed).
    pub fn submatrix(&self, r0: usize, c0: usize, h: usize, w: usize) -> BitMatrix {
        let shift = self.cols - c0 - w;
        BitMatrix {
            rows: h,
            cols: w,
            data: (r0..r0 + h)
                .map(|i| (self.data[i] >> shift) & mask(w))
                .collect(),
        }
    }

    /// Writes `block` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &BitMatrix) {
        let shift = self.cols - c0 - block.cols;
        let m = mask(block.cols) << shift;
        for i in 0..block.rows {
            self.data[r0 + i] = (self.data[r0 + i] & !m) | (block.data[i] << shift);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&r| r == 0)
    }

    /// Row-per-line binary rendering.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for &r in &self.data {
            s.push_str(&format!("{:0w$b}\n", r, w = self.cols));
        }
        s
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .data
            .iter()
            .map(|r| format!("{:0w$b}", r, w = self.cols))
            .collect();
        write!(f, "BitMatrix[{}]", rows.join(" "))
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.render().trim_end())
    }
}

/// Vectors of `F2^width` sent to zero by every map `x -> xM` in `maps`.
pub fn common_left_kernel<'a, I>(width: usize, maps: I) -> Subspace
where
    I: IntoIterator<Item = &'a BitMatrix>,
{
    let mut basis: Vec<u64> = (1..=width).map(|i| unit_bits(width, i)).collect();
    for m in maps {
        if basis.is_empty() {
            break;
        }
        let restricted = BitMatrix {
            rows: basis.len(),
            cols: m.cols,
            data: basis.iter().map(|&v| m.mul_vec(v)).collect(),
        };
        basis = restricted
            .left_kernel()
            .into_iter()
            .map(|combo| {
                let len = basis.len();
                (0..len)
                    .filter(|t| combo >> (len - 1 - t) & 1 == 1)
                    .fold(0, |acc, t| acc ^ basis[t])
            })
            .collect();
    }
    Subspace::span(width, basis)
}

fn reduce_tracked(basis: &[(u64, u64); 64], mut v: u64, mut combo: u64) -> (u64, u64) {
    while v != 0 {
        let (bv, bc) = basis[63 - v.leading_zeros() as usize];
        if bv == 0 {
            break;
        }
        v ^= bv;
        combo ^= bc;
    }
    (v, combo)
}

/// `|GL(s, 2)| = prod_{i<s} (2^s - 2^i)`.
pub fn gl_order(s: usize) -> u128 {
    (0..s).map(|i| (1u128 << s) - (1u128 << i)).product()
}

pub const GL_ENUMERATION_LIMIT: usize = 4;

/// Every invertible `s x s` matrix, each exactly once, in lexicographic row
/// order.
pub fn enumerate_gl(s: usize) -> Result<Vec<BitMatrix>> {
    if s > GL_ENUMERATION_LIMIT {
        return Err(Error::SizeTooLarge {
            what: "GL enumeration",
            requested: s as u64,
            limit: GL_ENUMERATION_LIMIT as u64,
        });
    }
    check_width(s)?;
    Ok(enumerate_gl_unchecked(s))
}

/// As [`enumerate_gl`] without the size guard; callers own the cost.
pub(crate) fn enumerate_gl_unchecked(s: usize) -> Vec<BitMatrix> {
    let mut out = Vec::with_capacity(gl_order(s) as usize);
    let mut rows = Vec::with_capacity(s);
    fn extend(s: usize, rows: &mut Vec<u64>, span: &Subspace, out: &mut Vec<BitMatrix>) {
        if rows.len() == s {
            out.push(BitMatrix {
                rows: s,
                cols: s,
                data: rows.clone(),
            });
            return;
        }
        for v in 1..=mask(s) {
            if span.contains(v) {
                continue;
            }
            let mut next = span.clone();
            next.insert(v);
            rows.push(v);
            extend(s, rows, &next, out);
            rows.pop();
        }
    }
    extend(s, &mut rows, &Subspace::new(s), &mut out);
    out
}

/// A uniformly random invertible `n x n` matrix.
pub fn random_invertible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitMatrix {
    let mut span = Subspace::new(n);
    let mut rows = Vec::with_capacity(n);
    while rows.len() < n {
        let v = rng.gen::<u64>() & mask(n);
        if span.insert(v) {
            rows.push(v);
        }
    }
    BitMatrix {
        rows: n,
        cols: n,
        data: rows,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CosetSide {
    /// `gH`
    Left,
    /// `Hg`
    Right,
}

/// One representative per coset of the subgroup `{g : member(g)}` inside
/// `group`, taken in the group's own order (so the identity represents the
/// subgroup itself when it comes first).
pub fn coset_representatives<F>(
    group: &[BitMatrix],
    member: F,
    side: CosetSide,
) -> Result<Vec<BitMatrix>>
where
    F: Fn(&BitMatrix) -> bool,
{
    let sub: Vec<&BitMatrix> = group.iter().filter(|g| member(g)).collect();
    if sub.is_empty() {
        return Err(Error::NotASubgroup("empty subgroup"));
    }
    if !group.len().is_multiple_of(sub.len()) {
        return Err(Error::NotASubgroup("order does not divide the group order"));
    }
    for (k, h1) in sub.iter().enumerate().take(32) {
        let h2 = sub[(k * 7 + 3) % sub.len()];
        if !member(&h1.mul(h2)?) {
            return Err(Error::NotASubgroup("not closed under products"));
        }
    }
    let index: HashMap<&BitMatrix, usize> = group.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let mut covered = vec![false; group.len()];
    let mut reps = Vec::with_capacity(group.len() / sub.len());
    for (i, g) in group.iter().enumerate() {
        if covered[i] {
            continue;
        }
        reps.push(g.clone());
        for h in &sub {
            let elem = match side {
                CosetSide::Left => g.mul(h)?,
                CosetSide::Right => h.mul(g)?,
            };
            match index.get(&elem) {
                Some(&j) if !covered[j] => covered[j] = true,
                Some(_) => return Err(Error::NotASubgroup("cosets overlap")),
                None => return Err(Error::NotASubgroup("coset leaves the group")),
            }
        }
    }
    Ok(reps)
}
