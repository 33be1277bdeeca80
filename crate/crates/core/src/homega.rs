//! `H`: the invertible maps that are linear for both `+` and an alternative
//! operation.
//!
//! Because `x o y = x + y + x . y`, a `+`-linear `lambda` is `o`-linear iff
//! `(x . y) lambda = (x lambda) . (y lambda)`, and by bilinearity it suffices
//! to check basis pairs. Every member fixes the weak space, so in canonical
//! coordinates it has the shape `[[A, B], [0, D]]` with `A` acting on the
//! strong coordinates.
//!
//! Three regimes have constructive descriptions:
//!
//! * one block with `d = s - 2` and defining vector `b`: `A` in `GL(2)`,
//!   `B` free, `D` invertible with `bD = b`;
//! * `b` parallel copies of such a block: a block permutation `pi` with one
//!   invertible `A_{i,pi(i)}` per block row, all `B_{ij}` free, and
//!   `b D_{ij} = b` when `j = pi(i)` and `0` otherwise, with the global `D`
//!   invertible;
//! * one block with `d = s - 3`: `A` in `GL(3)`, `B` free, `D` invertible and
//!   `b_{ij} D = (e_i A) . (e_j A)` for the three strong pairs.

use std::collections::HashMap;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::altop::{error_space, weak_space, AltOperation, Operation, ParallelOperation};
use crate::error::{Error, Result};
use crate::gf2::{
    enumerate_gl, enumerate_gl_unchecked, gl_order, mask, unit_bits, BitMatrix, Subspace,
};

/// `true` iff `lambda` is invertible and `(e_i . e_j) lambda = e_i lambda . e_j lambda`
/// for all `i < j`.
pub fn is_member<O: Operation + ?Sized>(op: &O, lambda: &BitMatrix) -> Result<bool> {
    let n = op.width();
    if lambda.rows() != n || lambda.cols() != n {
        return Err(Error::WidthMismatch {
            expected: n,
            found: lambda.rows(),
        });
    }
    if !lambda.is_invertible() {
        return Ok(false);
    }
    Ok(preserves_product(op, lambda))
}

fn preserves_product<O: Operation + ?Sized>(op: &O, lambda: &BitMatrix) -> bool {
    let n = op.width();
    for i in 1..n {
        let ei = unit_bits(n, i);
        let ri = lambda.row(i - 1);
        for j in i + 1..=n {
            let ej = unit_bits(n, j);
            if lambda.mul_vec(op.dot(ei, ej)) != op.dot(ri, lambda.row(j - 1)) {
                return false;
            }
        }
    }
    true
}

/// Block pieces of a member of `H` for a `d = s - 2` block structure.
/// Blocks are indexed from 0; block 0 holds the most significant `s` bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockDecomposition {
    /// `permutation[i]` is the block column holding the nonzero `A` of block
    /// row `i`.
    pub permutation: Vec<usize>,
    /// `A_{i, pi(i)}`, one per block row.
    pub a_blocks: Vec<BitMatrix>,
    /// `B_{ij}` in row-major order.
    pub b_blocks: Vec<BitMatrix>,
    /// `D_{ij}` in row-major order.
    pub d_blocks: Vec<BitMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaElement {
    pub matrix: BitMatrix,
    pub decomposition: Option<BlockDecomposition>,
}

impl LambdaElement {
    pub fn plain(matrix: BitMatrix) -> Self {
        LambdaElement {
            matrix,
            decomposition: None,
        }
    }
}

/// Places the pieces of a block decomposition into an `(s*b) x (s*b)` matrix.
pub fn assemble(s: usize, dec: &BlockDecomposition) -> BitMatrix {
    let blocks = dec.permutation.len();
    let mut m = BitMatrix::zero(s * blocks, s * blocks);
    for i in 0..blocks {
        m.set_block(s * i, s * dec.permutation[i], &dec.a_blocks[i]);
        for j in 0..blocks {
            m.set_block(s * i, s * j + 2, &dec.b_blocks[i * blocks + j]);
            m.set_block(s * i + 2, s * j + 2, &dec.d_blocks[i * blocks + j]);
        }
    }
    m
}

/// The shared defining vector `b` of a parallel `d = s - 2` operation.
fn shared_vector(op: &ParallelOperation) -> Result<u64> {
    let s = op.block_width();
    let first = &op.blocks()[0];
    if first.d() + 2 != s {
        return Err(Error::WrongRegime(format!(
            "blocks have d = {}, expected s - 2 = {}",
            first.d(),
            s.saturating_sub(2)
        )));
    }
    let b = first.spec().get(1, 2);
    if op.blocks().iter().any(|blk| blk.spec().get(1, 2) != b) {
        return Err(Error::WrongRegime(
            "blocks use different defining vectors".into(),
        ));
    }
    Ok(b)
}

/// Reads the predicted block structure off `lambda`, or `None` when it does
/// not have it: zero lower-left blocks, exactly one nonzero `A` per block row
/// and column, each invertible, `b D_{ij}` equal to `b` on the permutation and
/// `0` elsewhere, and invertible global `D`.
pub fn block_shape(
    op: &ParallelOperation,
    lambda: &BitMatrix,
) -> Result<Option<BlockDecomposition>> {
    let b = shared_vector(op)?;
    let s = op.block_width();
    let blocks = op.block_count();
    let d = s - 2;
    if lambda.rows() != s * blocks || lambda.cols() != s * blocks {
        return Err(Error::WidthMismatch {
            expected: s * blocks,
            found: lambda.rows(),
        });
    }
    let mut permutation = Vec::with_capacity(blocks);
    let mut a_blocks = Vec::with_capacity(blocks);
    let mut b_blocks = Vec::with_capacity(blocks * blocks);
    let mut d_blocks = Vec::with_capacity(blocks * blocks);
    let mut global_d = BitMatrix::zero(d * blocks, d * blocks);
    for i in 0..blocks {
        let mut nonzero = None;
        for j in 0..blocks {
            if !lambda.submatrix(s * i + 2, s * j, d, 2).is_zero() {
                return Ok(None);
            }
            let a = lambda.submatrix(s * i, s * j, 2, 2);
            if !a.is_zero() {
                if nonzero.is_some() || !a.is_invertible() {
                    return Ok(None);
                }
                nonzero = Some((j, a));
            }
        }
        let Some((j, a)) = nonzero else {
            return Ok(None);
        };
        if permutation.contains(&j) {
            return Ok(None);
        }
        permutation.push(j);
        a_blocks.push(a);
        for j in 0..blocks {
            b_blocks.push(lambda.submatrix(s * i, s * j + 2, 2, d));
            let dij = lambda.submatrix(s * i + 2, s * j + 2, d, d);
            let target = if j == permutation[i] { b } else { 0 };
            if dij.mul_vec(b) != target {
                return Ok(None);
            }
            global_d.set_block(d * i, d * j, &dij);
            d_blocks.push(dij);
        }
    }
    if !global_d.is_invertible() {
        return Ok(None);
    }
    Ok(Some(BlockDecomposition {
        permutation,
        a_blocks,
        b_blocks,
        d_blocks,
    }))
}

/// Largest block width accepted by the single-block enumerators.
pub const SINGLE_BLOCK_MAX_WIDTH: usize = 6;

fn check_single_block(op: &AltOperation, gap: usize) -> Result<()> {
    let s = op.n();
    if op.d() + gap != s {
        return Err(Error::WrongRegime(format!(
            "need d = s - {gap}, got s = {s}, d = {}",
            op.d()
        )));
    }
    if s > SINGLE_BLOCK_MAX_WIDTH {
        return Err(Error::SizeTooLarge {
            what: "single-block enumeration width",
            requested: s as u64,
            limit: SINGLE_BLOCK_MAX_WIDTH as u64,
        });
    }
    Ok(())
}

/// Every member of `H` for a single block with `d = s - 2`, each once.
pub fn enumerate_single_block(op: &AltOperation) -> Result<impl Iterator<Item = LambdaElement>> {
    check_single_block(op, 2)?;
    let s = op.n();
    let d = s - 2;
    let b = op.spec().get(1, 2);
    let a_choices = enumerate_gl(2)?;
    let d_choices: Vec<BitMatrix> = enumerate_gl(d)?
        .into_iter()
        .filter(|m| m.mul_vec(b) == b)
        .collect();
    let b_count = 1u64 << (2 * d);
    let iter = a_choices.into_iter().flat_map(move |a| {
        let d_choices = d_choices.clone();
        d_choices.into_iter().flat_map(move |dm| {
            let a = a.clone();
            (0..b_count).map(move |bits| {
                let bm = BitMatrix::from_rows(d, vec![bits >> d, bits & mask(d)])
                    .expect("fits in d bits");
                let dec = BlockDecomposition {
                    permutation: vec![0],
                    a_blocks: vec![a.clone()],
                    b_blocks: vec![bm],
                    d_blocks: vec![dm.clone()],
                };
                LambdaElement {
                    matrix: assemble(s, &dec),
                    decomposition: Some(dec),
                }
            })
        })
    });
    Ok(iter)
}

/// `|Stab_{GL(d)}(b)|` for a nonzero `b`.
fn stabilizer_order(d: usize) -> BigUint {
    BigUint::from(gl_order(d)) / BigUint::from((1u128 << d) - 1)
}

/// Closed-form `|H|` with its factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HCount {
    pub permutations: BigUint,
    pub a_choices: BigUint,
    pub b_choices: BigUint,
    pub d_choices: BigUint,
    pub total: BigUint,
}

impl HCount {
    fn new(
        permutations: BigUint,
        a_choices: BigUint,
        b_choices: BigUint,
        d_choices: BigUint,
    ) -> Self {
        let total = &permutations * &a_choices * &b_choices * &d_choices;
        HCount {
            permutations,
            a_choices,
            b_choices,
            d_choices,
            total,
        }
    }
}

/// `|H|` for `blocks` parallel copies of a `d = s - 2` operation on `s` bits:
/// `b! * 6^b * 2^(2(s-2)b^2) * prod_{k=b}^{m-1} (2^m - 2^k)` with
/// `m = b(s - 2)`. The last factor counts invertible `D` with the images of
/// the `b` placed copies of the defining vector prescribed.
pub fn count_parallel(s: usize, blocks: usize) -> Result<HCount> {
    if s < 3 || blocks == 0 {
        return Err(Error::DimensionOutOfRange {
            n: s * blocks,
            d: s.saturating_sub(2) * blocks,
        });
    }
    let m = blocks * (s - 2);
    let permutations: BigUint = (1..=blocks as u64).map(BigUint::from).product();
    let a_choices = BigUint::from(6u32).pow(blocks as u32);
    let b_choices = BigUint::from(2u32).pow((2 * (s - 2) * blocks * blocks) as u32);
    let two_m = BigUint::from(2u32).pow(m as u32);
    let d_choices: BigUint = (blocks..m)
        .map(|k| &two_m - BigUint::from(2u32).pow(k as u32))
        .product();
    Ok(HCount::new(permutations, a_choices, b_choices, d_choices))
}

/// Largest strong and weak dimension handled by [`structured_members`].
pub const STRUCTURED_ENUMERATION_LIMIT: usize = 4;

/// Every member of `H` with `B = 0`, found without the block-structure
/// characterization: all invertible `A` on the strong coordinates and all
/// invertible `D` on the weak ones, matched through the product condition.
/// Returns the members and the number of free `B` bits.
///
/// Only uses that members fix the weak space, so `lambda = [[A, B], [0, D]]`
/// up to the coordinate order, and that `B` never reaches a product.
pub fn structured_members(op: &ParallelOperation) -> Result<(Vec<BitMatrix>, usize)> {
    let n = op.width();
    let weak = op.weak_basis();
    let weak_coords: Vec<usize> = (1..=n)
        .filter(|&i| weak.contains(&unit_bits(n, i)))
        .collect();
    let strong_coords: Vec<usize> = (1..=n).filter(|i| !weak_coords.contains(i)).collect();
    let (k, m) = (strong_coords.len(), weak_coords.len());
    if k > STRUCTURED_ENUMERATION_LIMIT || m > STRUCTURED_ENUMERATION_LIMIT {
        return Err(Error::SizeTooLarge {
            what: "structured member enumeration (strong or weak dimension)",
            requested: k.max(m) as u64,
            limit: STRUCTURED_ENUMERATION_LIMIT as u64,
        });
    }
    let place = |u: u64, coords: &[usize]| -> u64 {
        let len = coords.len();
        (0..len)
            .filter(|&p| u >> (len - 1 - p) & 1 == 1)
            .fold(0, |acc, p| acc | unit_bits(n, coords[p]))
    };
    let extract = |v: u64, coords: &[usize]| -> u64 {
        let len = coords.len();
        (0..len)
            .filter(|&p| v & unit_bits(n, coords[p]) != 0)
            .fold(0, |acc, p| acc | 1 << (len - 1 - p))
    };
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|p| (p + 1..k).map(move |q| (p, q)))
        .collect();
    let y: Vec<u64> = pairs
        .iter()
        .map(|&(p, q)| {
            let v = op.dot(
                unit_bits(n, strong_coords[p]),
                unit_bits(n, strong_coords[q]),
            );
            extract(v, &weak_coords)
        })
        .collect();
    // basis of span{y} drawn from the pairs themselves
    let mut span = Subspace::new(m);
    let mut basis_pairs = Vec::new();
    for (idx, &v) in y.iter().enumerate() {
        if span.insert(v) {
            basis_pairs.push(idx);
        }
    }
    let basis_matrix = BitMatrix::from_rows(m, basis_pairs.iter().map(|&i| y[i]).collect())?;
    let coefficients: Vec<u64> = y
        .iter()
        .map(|&v| basis_matrix.solve(v).expect("in the span"))
        .collect();
    let r = basis_pairs.len();
    let combine = |coeff: u64, images: &[u64]| -> u64 {
        (0..r)
            .filter(|&t| coeff >> (r - 1 - t) & 1 == 1)
            .fold(0, |acc, t| acc ^ images[t])
    };
    let pack = |images: &[u64]| images.iter().fold(0u64, |acc, &v| (acc << m) | v);

    let mut by_images: HashMap<u64, Vec<BitMatrix>> = HashMap::new();
    for dm in enumerate_gl_unchecked(m) {
        let images: Vec<u64> = basis_pairs.iter().map(|&i| dm.mul_vec(y[i])).collect();
        by_images.entry(pack(&images)).or_default().push(dm);
    }

    let mut members = Vec::new();
    for am in enumerate_gl_unchecked(k) {
        let rows: Vec<u64> = (0..k).map(|p| place(am.row(p), &strong_coords)).collect();
        let t: Vec<u64> = pairs
            .iter()
            .map(|&(p, q)| extract(op.dot(rows[p], rows[q]), &weak_coords))
            .collect();
        let images: Vec<u64> = basis_pairs.iter().map(|&i| t[i]).collect();
        let consistent = (0..pairs.len()).all(|i| combine(coefficients[i], &images) == t[i]);
        if !consistent {
            continue;
        }
        let Some(ds) = by_images.get(&pack(&images)) else {
            continue;
        };
        for dm in ds {
            let mut lambda = BitMatrix::zero(n, n);
            for p in 0..k {
                lambda.set_row(strong_coords[p] - 1, rows[p]);
            }
            for w in 0..m {
                lambda.set_row(weak_coords[w] - 1, place(dm.row(w), &weak_coords));
            }
            members.push(lambda);
        }
    }
    Ok((members, k * m))
}

/// `|H|` from [`structured_members`].
pub fn count_parallel_structured(op: &ParallelOperation) -> Result<BigUint> {
    let (members, free_bits) = structured_members(op)?;
    Ok(BigUint::from(members.len()) << free_bits)
}

/// Cap on the rejection loop for the `D` blocks in [`sample_parallel`].
pub const D_REJECTION_CAP: usize = 10_000;

/// Draws a member of `H` for a parallel `d = s - 2` operation whose blocks
/// share a defining vector.
///
/// `pi`, the `A` blocks and the `B` blocks are uniform. Each `D_{ij}` has
/// uniform rows except the last row selected by `b`, which is solved for so
/// that `b D_{ij}` hits its target; singular global `D` is rejected, and after
/// [`D_REJECTION_CAP`] failures the permutation-patterned identity is used.
pub fn sample_parallel(op: &ParallelOperation, seed: u64) -> Result<LambdaElement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_parallel_with(op, &mut rng)
}

pub fn sample_parallel_with<R: Rng + ?Sized>(
    op: &ParallelOperation,
    rng: &mut R,
) -> Result<LambdaElement> {
    let b = shared_vector(op)?;
    let s = op.block_width();
    let blocks = op.block_count();
    let d = s - 2;
    let gl2 = enumerate_gl(2)?;

    let mut permutation: Vec<usize> = (0..blocks).collect();
    permutation.shuffle(rng);
    let a_blocks: Vec<BitMatrix> = (0..blocks)
        .map(|_| gl2.choose(rng).expect("nonempty").clone())
        .collect();
    let b_blocks: Vec<BitMatrix> = (0..blocks * blocks)
        .map(|_| {
            BitMatrix::from_rows(d, (0..2).map(|_| rng.gen::<u64>() & mask(d)).collect())
                .expect("fits")
        })
        .collect();

    // the last coordinate of b that is set; its row absorbs the constraint
    let pivot = (1..=d)
        .rev()
        .find(|&i| b & unit_bits(d, i) != 0)
        .expect("b is nonzero");
    let draw_block = |rng: &mut R, target: u64| -> BitMatrix {
        let mut rows: Vec<u64> = (0..d).map(|_| rng.gen::<u64>() & mask(d)).collect();
        let others = (1..=d)
            .filter(|&i| i != pivot && b & unit_bits(d, i) != 0)
            .fold(0, |acc, i| acc ^ rows[i - 1]);
        rows[pivot - 1] = target ^ others;
        BitMatrix::from_rows(d, rows).expect("fits")
    };
    let targets = |i: usize, j: usize| if permutation[i] == j { b } else { 0 };

    let mut d_blocks = None;
    for _ in 0..D_REJECTION_CAP {
        let candidate: Vec<BitMatrix> = (0..blocks * blocks)
            .map(|idx| draw_block(rng, targets(idx / blocks, idx % blocks)))
            .collect();
        let mut global = BitMatrix::zero(d * blocks, d * blocks);
        for (idx, blk) in candidate.iter().enumerate() {
            global.set_block(d * (idx / blocks), d * (idx % blocks), blk);
        }
        if global.is_invertible() {
            d_blocks = Some(candidate);
            break;
        }
    }
    let d_blocks = d_blocks.unwrap_or_else(|| {
        (0..blocks * blocks)
            .map(|idx| {
                if permutation[idx / blocks] == idx % blocks {
                    BitMatrix::identity(d)
                } else {
                    BitMatrix::zero(d, d)
                }
            })
            .collect()
    });
    let dec = BlockDecomposition {
        permutation,
        a_blocks,
        b_blocks,
        d_blocks,
    };
    Ok(LambdaElement {
        matrix: assemble(s, &dec),
        decomposition: Some(dec),
    })
}

/// Which side of the `d = s - 3` equations drives the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchOrder {
    /// For each `A`, solve for `D`.
    AFirst,
    /// For each `D`, look up the `A` producing its targets.
    DFirst,
}

/// The `(A, D)` pairs with `b_{ij} D = (e_i A) . (e_j A)` for a single block
/// with `d = s - 3`. Every `B` completes each pair to a member.
pub fn s_minus_3_pairs(
    op: &AltOperation,
    order: SearchOrder,
) -> Result<Vec<(BitMatrix, BitMatrix)>> {
    check_single_block(op, 3)?;
    let d = op.d();
    let spec = op.spec();
    let pairs = [(1usize, 2usize), (1, 3), (2, 3)];
    let b: Vec<u64> = pairs.iter().map(|&(i, j)| spec.get(i, j)).collect();
    let targets = |a: &BitMatrix| -> [u64; 3] {
        let rows: Vec<u64> = (0..3).map(|p| a.row(p) << d).collect();
        pairs.map(|(i, j)| op.dot(rows[i - 1], rows[j - 1]))
    };
    let gl3 = enumerate_gl(3)?;
    let gld = enumerate_gl(d)?;
    let mut out = Vec::new();
    match order {
        SearchOrder::AFirst => {
            let b_matrix = BitMatrix::from_rows(d, b.clone())?;
            let dim_u = b_matrix.rank();
            for a in &gl3 {
                let t = targets(a);
                if dim_u == d && d == 3 {
                    // the b_{ij} form a basis, so D is determined
                    let t_matrix = BitMatrix::from_rows(d, t.to_vec())?;
                    let dm = b_matrix.inverse()?.mul(&t_matrix)?;
                    if dm.is_invertible() {
                        out.push((a.clone(), dm));
                    }
                } else {
                    for dm in &gld {
                        if (0..3).all(|p| dm.mul_vec(b[p]) == t[p]) {
                            out.push((a.clone(), dm.clone()));
                        }
                    }
                }
            }
        }
        SearchOrder::DFirst => {
            let mut by_targets: HashMap<[u64; 3], Vec<&BitMatrix>> = HashMap::new();
            for a in &gl3 {
                by_targets.entry(targets(a)).or_default().push(a);
            }
            for dm in &gld {
                let t = [dm.mul_vec(b[0]), dm.mul_vec(b[1]), dm.mul_vec(b[2])];
                if let Some(as_) = by_targets.get(&t) {
                    for a in as_ {
                        out.push(((*a).clone(), dm.clone()));
                    }
                }
            }
            out.sort();
        }
    }
    Ok(out)
}

/// Search order used by default: `A` first when the error space is all of
/// the weak space, `D` first otherwise.
pub fn default_order(op: &AltOperation) -> SearchOrder {
    if op.error_basis().len() == 3 {
        SearchOrder::AFirst
    } else {
        SearchOrder::DFirst
    }
}

fn assemble_single(a: &BitMatrix, bm: &BitMatrix, dm: &BitMatrix) -> BitMatrix {
    let k = a.rows();
    let n = k + dm.rows();
    let mut m = BitMatrix::zero(n, n);
    m.set_block(0, 0, a);
    m.set_block(0, k, bm);
    m.set_block(k, k, dm);
    m
}

/// Every member of `H` for a single block with `d = s - 3`.
pub fn enumerate_s_minus_3(op: &AltOperation) -> Result<impl Iterator<Item = LambdaElement>> {
    let pairs = s_minus_3_pairs(op, default_order(op))?;
    let d = op.d();
    let b_count = 1u64 << (3 * d);
    Ok(pairs.into_iter().flat_map(move |(a, dm)| {
        (0..b_count).map(move |bits| {
            let rows = (0..3).map(|p| (bits >> (d * (2 - p))) & mask(d)).collect();
            let bm = BitMatrix::from_rows(d, rows).expect("fits");
            LambdaElement::plain(assemble_single(&a, &bm, &dm))
        })
    }))
}

/// `|H|` for a single block with `d = s - 3`, with the number of distinct `D`.
pub fn count_s_minus_3(op: &AltOperation) -> Result<(HCount, usize)> {
    let pairs = s_minus_3_pairs(op, default_order(op))?;
    let mut ds: Vec<&BitMatrix> = pairs.iter().map(|(_, dm)| dm).collect();
    ds.sort();
    ds.dedup();
    let distinct_d = ds.len();
    let a_per_d = pairs.len() / distinct_d.max(1);
    let count = HCount::new(
        BigUint::from(1u32),
        BigUint::from(a_per_d),
        BigUint::from(1u64) << (3 * op.d()),
        BigUint::from(distinct_d),
    );
    Ok((count, distinct_d))
}

/// `|H|` for a single block with `d = s - 2`: `6 * 2^(2d) * |Stab(b)|`.
pub fn count_single_block(op: &AltOperation) -> Result<HCount> {
    if op.d() + 2 != op.n() {
        return Err(Error::WrongRegime(format!(
            "need d = s - 2, got s = {}, d = {}",
            op.n(),
            op.d()
        )));
    }
    let d = op.d();
    Ok(HCount::new(
        BigUint::from(1u32),
        BigUint::from(6u32),
        BigUint::from(1u64) << (2 * d),
        stabilizer_order(d),
    ))
}

/// Membership in `H` for the operation conjugated by `g`, that is
/// `x o' y = ((x g) o (y g)) g^{-1}`. `lambda` belongs iff `g^{-1} lambda g`
/// belongs to the original `H`.
pub struct ConjugatedMembership<'a, O: Operation + ?Sized> {
    op: &'a O,
    g: BitMatrix,
    g_inv: BitMatrix,
}

pub fn conjugate_h<'a, O: Operation + ?Sized>(
    op: &'a O,
    g: &BitMatrix,
) -> Result<ConjugatedMembership<'a, O>> {
    let g_inv = g.inverse().map_err(|_| Error::SingularConjugator)?;
    if g.rows() != op.width() {
        return Err(Error::WidthMismatch {
            expected: op.width(),
            found: g.rows(),
        });
    }
    Ok(ConjugatedMembership {
        op,
        g: g.clone(),
        g_inv,
    })
}

impl<O: Operation + ?Sized> ConjugatedMembership<'_, O> {
    pub fn contains(&self, lambda: &BitMatrix) -> Result<bool> {
        let pulled = self.g_inv.mul(lambda)?.mul(&self.g)?;
        is_member(self.op, &pulled)
    }
}

/// Checks `W lambda = W` and `U lambda = U`.
pub fn fixes_weak_and_error_spaces<O: Operation + ?Sized>(op: &O, lambda: &BitMatrix) -> bool {
    let w = weak_space(op);
    let u = error_space(op);
    let image =
        |sp: &Subspace| Subspace::span(op.width(), sp.basis().iter().map(|&v| lambda.mul_vec(v)));
    image(&w).same_as(&w) && image(&u).same_as(&u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::altop::{build_operation, catalog, ThetaSpec, TranslationGroup};
    use crate::gf2::random_invertible;
    use std::collections::HashSet;

    fn b01() -> AltOperation {
        build_operation(&catalog::b01()).unwrap()
    }

    #[test]
    fn identity_is_member() {
        assert!(is_member(&b01(), &BitMatrix::identity(4)).unwrap());
        assert!(matches!(
            is_member(&b01(), &BitMatrix::identity(5)),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn nonzero_lower_left_block_is_rejected() {
        let op = b01();
        for member in enumerate_single_block(&op).unwrap().take(50) {
            let mut m = member.matrix.clone();
            m.set(2, 0, !m.get(2, 0));
            assert!(!m.submatrix(2, 0, 2, 2).is_zero());
            assert!(!is_member(&op, &m).unwrap());
        }
    }

    #[test]
    fn single_block_matches_brute_filter() {
        for (s, b) in [(4usize, 0b01u64), (4, 0b10), (4, 0b11), (3, 0b1)] {
            let op = build_operation(&ThetaSpec::single_vector(s, b).unwrap()).unwrap();
            let constructed: HashSet<BitMatrix> = enumerate_single_block(&op)
                .unwrap()
                .map(|l| l.matrix)
                .collect();
            let filtered: HashSet<BitMatrix> = enumerate_gl(s)
                .unwrap()
                .into_iter()
                .filter(|m| is_member(&op, m).unwrap())
                .collect();
            assert_eq!(constructed, filtered, "s={s} b={b:b}");
            let expected = if s == 4 { 192 } else { 24 };
            assert_eq!(constructed.len(), expected);
            assert_eq!(
                count_single_block(&op).unwrap().total,
                BigUint::from(expected)
            );
        }
        let wrong = build_operation(&catalog::n6_full_error_space()).unwrap();
        assert!(matches!(
            enumerate_single_block(&wrong),
            Err(Error::WrongRegime(_))
        ));
    }

    #[test]
    fn single_block_decompositions_reassemble() {
        for l in enumerate_single_block(&b01()).unwrap() {
            assert_eq!(assemble(4, l.decomposition.as_ref().unwrap()), l.matrix);
        }
    }

    #[test]
    fn parallel_counts() {
        assert_eq!(count_parallel(4, 1).unwrap().total, BigUint::from(192u32));
        assert_eq!(count_parallel(3, 1).unwrap().total, BigUint::from(24u32));
        for (s, blocks) in [(3, 2), (4, 2), (4, 4), (5, 3)] {
            let c = count_parallel(s, blocks).unwrap();
            let b_factor = BigUint::from(1u8) << (2 * (s - 2) * blocks * blocks);
            assert_eq!(&c.total % b_factor, BigUint::from(0u8));
        }
        let one = ParallelOperation::uniform(&b01(), 1).unwrap();
        assert_eq!(
            count_parallel_structured(&one).unwrap(),
            BigUint::from(192u32)
        );
    }

    #[test]
    fn parallel_count_double_check_two_blocks() {
        for s in [3, 4] {
            let op = build_operation(&ThetaSpec::single_vector(s, 1).unwrap()).unwrap();
            let par = ParallelOperation::uniform(&op, 2).unwrap();
            assert_eq!(
                count_parallel_structured(&par).unwrap(),
                count_parallel(s, 2).unwrap().total,
                "s={s}"
            );
        }
    }

    #[test]
    fn sampled_members_are_sound() {
        let par = ParallelOperation::uniform(&b01(), 4).unwrap();
        let mut seen = HashSet::new();
        for seed in 0..100 {
            let l = sample_parallel(&par, seed).unwrap();
            assert!(is_member(&par, &l.matrix).unwrap());
            assert_eq!(
                block_shape(&par, &l.matrix).unwrap().as_ref(),
                l.decomposition.as_ref()
            );
            assert!(fixes_weak_and_error_spaces(&par, &l.matrix));
            seen.insert(l.matrix);
        }
        assert!(seen.len() >= 99);
        assert_eq!(
            sample_parallel(&par, 7).unwrap(),
            sample_parallel(&par, 7).unwrap()
        );
    }

    #[test]
    fn identity_pattern_assembles_to_identity() {
        let dec = BlockDecomposition {
            permutation: vec![0, 1, 2, 3],
            a_blocks: vec![BitMatrix::identity(2); 4],
            b_blocks: vec![BitMatrix::zero(2, 2); 16],
            d_blocks: (0..16)
                .map(|i| {
                    if i / 4 == i % 4 {
                        BitMatrix::identity(2)
                    } else {
                        BitMatrix::zero(2, 2)
                    }
                })
                .collect(),
        };
        let m = assemble(4, &dec);
        assert_eq!(m, BitMatrix::identity(16));
        let par = ParallelOperation::uniform(&b01(), 4).unwrap();
        assert!(is_member(&par, &m).unwrap());
    }

    #[test]
    fn closure_under_products_and_inverses() {
        let par = ParallelOperation::uniform(&b01(), 4).unwrap();
        for seed in 0..20 {
            let x = sample_parallel(&par, seed).unwrap().matrix;
            let y = sample_parallel(&par, seed + 1000).unwrap().matrix;
            assert!(is_member(&par, &x.mul(&y).unwrap()).unwrap());
            assert!(is_member(&par, &x.inverse().unwrap()).unwrap());
        }
    }

    #[test]
    fn s_minus_3_counts_and_paths() {
        for (spec, total, distinct_d) in [
            (catalog::n6_full_error_space(), 86016u32, None),
            (catalog::n6_rank2_error_space(), 49152, Some(24)),
        ] {
            let op = build_operation(&spec).unwrap();
            let a_first = s_minus_3_pairs(&op, SearchOrder::AFirst).unwrap();
            let mut sorted = a_first.clone();
            sorted.sort();
            let d_first = s_minus_3_pairs(&op, SearchOrder::DFirst).unwrap();
            assert_eq!(sorted, d_first);
            // brute filter over [[A, 0], [0, D]]
            let gl3 = enumerate_gl(3).unwrap();
            let mut brute = Vec::new();
            for a in &gl3 {
                for dm in &gl3 {
                    let m = assemble_single(a, &BitMatrix::zero(3, 3), dm);
                    if is_member(&op, &m).unwrap() {
                        brute.push((a.clone(), dm.clone()));
                    }
                }
            }
            brute.sort();
            assert_eq!(brute, d_first);
            let (count, d_count) = count_s_minus_3(&op).unwrap();
            assert_eq!(count.total, BigUint::from(total));
            if let Some(k) = distinct_d {
                assert_eq!(d_count, k);
            }
        }
    }

    #[test]
    fn s_minus_3_enumeration_is_sound() {
        let op = build_operation(&catalog::n6_rank2_error_space()).unwrap();
        let mut n = 0;
        for (i, l) in enumerate_s_minus_3(&op).unwrap().enumerate() {
            n += 1;
            if i % 97 == 0 {
                assert!(is_member(&op, &l.matrix).unwrap());
                assert!(fixes_weak_and_error_spaces(&op, &l.matrix));
            }
        }
        assert_eq!(n, 49152);
    }

    #[test]
    fn conjugated_membership() {
        let op = b01();
        let base = TranslationGroup::from_operation(&op).unwrap();
        let gl4 = enumerate_gl(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let same = conjugate_h(&op, &BitMatrix::identity(4)).unwrap();
        for m in gl4.iter().step_by(37) {
            assert_eq!(same.contains(m).unwrap(), is_member(&op, m).unwrap());
        }
        for _ in 0..20 {
            let g = random_invertible(4, &mut rng);
            let conj = conjugate_h(&op, &g).unwrap();
            let law = base.conjugate(&g).unwrap();
            let mut size = 0;
            for m in &gl4 {
                let predicted = conj.contains(m).unwrap();
                assert_eq!(predicted, is_member(&law, m).unwrap());
                size += predicted as usize;
            }
            assert_eq!(size, 192);
        }
        assert!(matches!(
            conjugate_h(&op, &BitMatrix::zero(4, 4)),
            Err(Error::SingularConjugator)
        ));
    }

    #[test]
    fn members_normalize_the_translation_group() {
        let op = b01();
        let t = TranslationGroup::from_operation(&op).unwrap();
        for l in enumerate_single_block(&op).unwrap().step_by(11) {
            assert!(t.is_normalized_by(&l.matrix).unwrap());
        }
    }
}
