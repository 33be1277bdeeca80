//! Difference distribution tables for `+` and for alternative operations.
//!
//! `delta_f(a, b) = #{x : xf + (x + a)f = b}` and its analogue
//! `delta^o_f(a, b) = #{x : xf o (x o a)f = b}`. The uniformity is the largest
//! entry over `a != 0`.

use std::fmt;

use crate::altop::{CircTable, Operation, CIRC_TABLE_MAX_WIDTH};
use crate::error::{Error, Result};
use crate::gf2::{mask, unit_bits, BitMatrix};

/// Largest s-box width handled here.
pub const SBOX_MAX_WIDTH: usize = 8;

/// A permutation of `[0, 2^s)`; entry `x` is the image of `x`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sbox {
    s: usize,
    table: Vec<u8>,
}

impl Sbox {
    pub fn new(s: usize, table: Vec<u8>) -> Result<Self> {
        if s == 0 || s > SBOX_MAX_WIDTH {
            return Err(Error::WidthOutOfRange(s));
        }
        if table.len() != 1 << s {
            return Err(Error::WidthMismatch {
                expected: 1 << s,
                found: table.len(),
            });
        }
        let mut seen = vec![false; 1 << s];
        for &y in &table {
            let y = y as usize;
            if y >= 1 << s || seen[y] {
                return Err(Error::NotBijective);
            }
            seen[y] = true;
        }
        Ok(Sbox { s, table })
    }

    /// Tabulates `f` on `[0, 2^s)`.
    pub fn from_fn<F: Fn(u64) -> u64>(s: usize, f: F) -> Result<Self> {
        let table = (0..1u64 << s).map(|x| f(x) as u8).collect();
        Sbox::new(s, table)
    }

    /// `2^s` hex digits (`s <= 4`) or `2^s` two-digit bytes, most significant
    /// digit first. Whitespace, commas and an optional `0x` are ignored.
    pub fn parse_hex(s: usize, text: &str) -> Result<Self> {
        let cleaned: String = text
            .trim()
            .trim_start_matches("0x")
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .collect();
        let digits = if s <= 4 { 1 } else { 2 };
        if cleaned.len() != digits << s {
            return Err(Error::Parse(format!(
                "expected {} hex digits for a {s}-bit s-box, found {}",
                digits << s,
                cleaned.len()
            )));
        }
        let table = (0..1usize << s)
            .map(|x| {
                u8::from_str_radix(&cleaned[digits * x..digits * (x + 1)], 16)
                    .map_err(|e| Error::Parse(e.to_string()))
            })
            .collect::<Result<Vec<u8>>>()?;
        Sbox::new(s, table)
    }

    pub fn to_hex(&self) -> String {
        let digits = if self.s <= 4 { 1 } else { 2 };
        self.table
            .iter()
            .map(|v| format!("{:0w$X}", v, w = digits))
            .collect()
    }

    pub fn identity(s: usize) -> Result<Self> {
        Sbox::from_fn(s, |x| x)
    }

    pub fn width(&self) -> usize {
        self.s
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    #[inline(always)]
    pub fn apply(&self, x: u64) -> u64 {
        self.table[x as usize] as u64
    }

    pub fn inverse(&self) -> Sbox {
        let mut inv = vec![0u8; self.table.len()];
        for (x, &y) in self.table.iter().enumerate() {
            inv[y as usize] = x as u8;
        }
        Sbox {
            s: self.s,
            table: inv,
        }
    }

    /// `x -> (x self) next`.
    pub fn then(&self, next: &Sbox) -> Result<Sbox> {
        if next.s != self.s {
            return Err(Error::WidthMismatch {
                expected: self.s,
                found: next.s,
            });
        }
        Ok(Sbox {
            s: self.s,
            table: self.table.iter().map(|&y| next.table[y as usize]).collect(),
        })
    }

    /// The linear map `x -> x m`.
    pub fn from_linear(m: &BitMatrix) -> Result<Sbox> {
        if m.rows() != m.cols() {
            return Err(Error::WidthMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        Sbox::from_fn(m.rows(), |x| m.mul_vec(x))
    }

    /// `x -> ((x l_in) self) l_out`.
    pub fn sandwich(&self, l_in: &BitMatrix, l_out: &BitMatrix) -> Result<Sbox> {
        Sbox::from_linear(l_in)?
            .then(self)?
            .then(&Sbox::from_linear(l_out)?)
    }

    /// The translation `x -> x o c`.
    pub fn circ_translation<O: Operation + ?Sized>(op: &O, c: u64) -> Result<Sbox> {
        Sbox::from_fn(op.width(), |x| op.circ(x, c))
    }

    /// Classical differential uniformity.
    pub fn uniformity(&self) -> u16 {
        ddt_plus(self).uniformity()
    }
}

impl fmt::Debug for Sbox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sbox({})", self.to_hex())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Plus,
    Circ,
}

#[derive(Clone, PartialEq, Eq)]
pub struct DDTable {
    s: usize,
    counts: Vec<u16>,
    flavor: Flavor,
}

impl DDTable {
    pub fn width(&self) -> usize {
        self.s
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    #[inline]
    pub fn get(&self, a: u64, b: u64) -> u16 {
        self.counts[((a as usize) << self.s) | b as usize]
    }

    pub fn row(&self, a: u64) -> &[u16] {
        let size = 1usize << self.s;
        &self.counts[a as usize * size..(a as usize + 1) * size]
    }

    /// Largest entry over `a != 0`.
    pub fn uniformity(&self) -> u16 {
        self.counts[1 << self.s..]
            .iter()
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Maximum of each row, row 0 included.
    pub fn row_maxima(&self) -> Vec<u16> {
        (0..1u64 << self.s)
            .map(|a| self.row(a).iter().copied().max().unwrap_or(0))
            .collect()
    }

    /// Integer grid, one row per line.
    pub fn render_grid(&self) -> String {
        let width = format!("{}", 1u32 << self.s).len();
        let mut out = String::new();
        for a in 0..1u64 << self.s {
            let line: Vec<String> = self
                .row(a)
                .iter()
                .map(|c| format!("{:>w$}", c, w = width))
                .collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// `a,b,count` rows for every entry, nonzero or not.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,count\n");
        for a in 0..1u64 << self.s {
            for (b, c) in self.row(a).iter().enumerate() {
                out.push_str(&format!("{a},{b},{c}\n"));
            }
        }
        out
    }
}

impl fmt::Debug for DDTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DDTable({:?}, s={})\n{}",
            self.flavor,
            self.s,
            self.render_grid()
        )
    }
}

pub fn ddt_plus(f: &Sbox) -> DDTable {
    let s = f.s;
    let size = 1usize << s;
    let mut counts = vec![0u16; size * size];
    for a in 0..size {
        for x in 0..size {
            let b = (f.table[x] ^ f.table[x ^ a]) as usize;
            counts[(a << s) | b] += 1;
        }
    }
    DDTable {
        s,
        counts,
        flavor: Flavor::Plus,
    }
}

pub fn ddt_circ<O: Operation + ?Sized>(f: &Sbox, op: &O) -> Result<DDTable> {
    if op.width() != f.s {
        return Err(Error::WidthMismatch {
            expected: f.s,
            found: op.width(),
        });
    }
    let table = CircTable::build(op)?;
    Ok(ddt_circ_table(f, &table))
}

/// [`ddt_circ`] against a prebuilt operation table.
pub fn ddt_circ_table(f: &Sbox, t: &CircTable) -> DDTable {
    let s = f.s;
    let size = 1usize << s;
    let mut counts = vec![0u16; size * size];
    for a in 0..size {
        for x in 0..size {
            let y = t.get(x, a);
            let b = t.get(f.table[x] as usize, f.table[y] as usize);
            counts[(a << s) | b] += 1;
        }
    }
    DDTable {
        s,
        counts,
        flavor: Flavor::Circ,
    }
}

/// `delta^o_f` without materializing the table.
pub fn circ_uniformity(f: &Sbox, t: &CircTable) -> u16 {
    circ_uniformity_of_table(&f.table, t)
}

/// [`circ_uniformity`] on a raw lookup table of `2^s` entries, assumed to be a
/// permutation. Each unordered pair `{x, x o a}` is visited once, so every
/// count is doubled at the end.
pub fn circ_uniformity_of_table(table: &[u8], t: &CircTable) -> u16 {
    let size = table.len();
    debug_assert_eq!(size, 1 << t.width());
    let mut counts = [0u16; 1 << SBOX_MAX_WIDTH];
    let mut best = 0u16;
    for a in 1..size {
        counts[..size].fill(0);
        for x in 0..size {
            let y = t.get(x, a);
            if y < x {
                continue;
            }
            let b = t.row(table[x] as usize)[table[y] as usize] as usize;
            counts[b] += 1;
        }
        let m = *counts[..size].iter().max().expect("nonempty");
        best = best.max(2 * m);
    }
    best
}

/// Transition of a difference through xor with a uniform key, averaged over
/// the state too: entry `[a][b]` is `#{(x, k) : (x + k) o ((x o a) + k) = b}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KeyTransition {
    s: usize,
    counts: Vec<u32>,
}

/// Largest width accepted by [`key_transition_matrix`].
pub const KEY_TRANSITION_MAX_WIDTH: usize = CIRC_TABLE_MAX_WIDTH;

pub fn key_transition_matrix<O: Operation + ?Sized>(op: &O) -> Result<KeyTransition> {
    let s = op.width();
    if s > KEY_TRANSITION_MAX_WIDTH {
        return Err(Error::SizeTooLarge {
            what: "key transition width",
            requested: s as u64,
            limit: KEY_TRANSITION_MAX_WIDTH as u64,
        });
    }
    let t = CircTable::build(op)?;
    let size = 1usize << s;
    let mut counts = vec![0u32; size * size];
    for a in 0..size {
        for x in 0..size {
            let y = t.get(x, a);
            for k in 0..size {
                let b = t.get(x ^ k, y ^ k);
                counts[(a << s) | b] += 1;
            }
        }
    }
    Ok(KeyTransition { s, counts })
}

impl KeyTransition {
    pub fn width(&self) -> usize {
        self.s
    }

    pub fn count(&self, a: u64, b: u64) -> u32 {
        self.counts[((a as usize) << self.s) | b as usize]
    }

    pub fn probability(&self, a: u64, b: u64) -> f64 {
        self.count(a, b) as f64 / (1u64 << (2 * self.s)) as f64
    }

    /// Nonzero `(b, probability)` entries of row `a`.
    pub fn sparse_row(&self, a: u64) -> Vec<(u64, f64)> {
        (0..1u64 << self.s)
            .filter(|&b| self.count(a, b) != 0)
            .map(|b| (b, self.probability(a, b)))
            .collect()
    }
}

/// `x -> g(x) o g(0)` is the `o`-linear part of a `o`-affine `g`; `None` when
/// `g` is not `o`-affine.
pub fn circ_linear_part<O: Operation + ?Sized>(op: &O, g: &Sbox) -> Result<Option<Sbox>> {
    let t = CircTable::build(op)?;
    let c = g.apply(0) as usize;
    let size = 1usize << g.s;
    let lin: Vec<u8> = (0..size)
        .map(|x| t.get(g.apply(x as u64) as usize, c) as u8)
        .collect();
    for x in 0..size {
        for y in 0..size {
            let lhs = lin[t.get(x, y)] as usize;
            let rhs = t.get(lin[x] as usize, lin[y] as usize);
            if lhs != rhs {
                return Ok(None);
            }
        }
    }
    Ok(Some(Sbox::new(g.s, lin)?))
}

/// Verifies `delta^o_{h}(a, b) = delta^o_f(a l_in, b l_out^{-1})` for
/// `h: x -> g_out(f(g_in(x)))`, where `l_in`, `l_out` are the `o`-linear
/// parts of the `o`-affine maps `g_in`, `g_out`.
pub fn check_affine_invariance<O: Operation + ?Sized>(
    f: &Sbox,
    op: &O,
    g_in: &Sbox,
    g_out: &Sbox,
) -> Result<bool> {
    let l_in = circ_linear_part(op, g_in)?.ok_or(Error::NotCircAffine)?;
    let l_out_inv = circ_linear_part(op, g_out)?
        .ok_or(Error::NotCircAffine)?
        .inverse();
    let h = g_in.then(f)?.then(g_out)?;
    let lhs = ddt_circ(&h, op)?;
    let rhs = ddt_circ(f, op)?;
    let size = 1u64 << f.s;
    for a in 0..size {
        for b in 0..size {
            if lhs.get(a, b) != rhs.get(l_in.apply(a), l_out_inv.apply(b)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The isomorphism `(V, o) -> (V, +)` sending `x` to its coordinates over the
/// canonical basis in `(V, o)`: `x = c_1 e_1 o ... o c_n e_n` maps to `c`.
pub fn circ_coordinates<O: Operation + ?Sized>(op: &O) -> Result<Sbox> {
    let n = op.width();
    if n > SBOX_MAX_WIDTH {
        return Err(Error::WidthOutOfRange(n));
    }
    let inverse = Sbox::from_fn(n, |c| {
        (1..=n)
            .filter(|&i| c & unit_bits(n, i) != 0)
            .fold(0, |acc, i| op.circ(acc, unit_bits(n, i)) & mask(n))
    })?;
    Ok(inverse.inverse())
}
