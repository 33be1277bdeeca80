//! Classification campaigns.
//!
//! * the sixteen optimal 4-bit classes against all 105 operations on `F2^4`,
//!   with candidates `x -> ((x g_pre) G_i) g_post` where `g_pre` runs over
//!   representatives of the right cosets `H g` and `g_post` over the left
//!   cosets `g H`;
//! * 8-bit s-boxes against every canonical operation with a given `d`;
//! * 8-bit s-boxes against randomly drawn canonical operations.

use std::collections::{BTreeMap, HashSet};

use crate::altop::{
    build_operation, catalog, conjugacy_invariant, distinct_conjugates, enumerate_canonical,
    CircTable, Operation, ThetaSpec, TranslationGroup,
};
use crate::ddt::{circ_uniformity_of_table, ddt_plus, Sbox};
use crate::error::{Error, Result};
use crate::gf2::{coset_representatives, enumerate_gl, mask, BitMatrix, CosetSide};
use crate::homega::is_member;
use crate::par::{task_rng, Exec};

pub mod corpus {
    //! Reference s-boxes. The 8-bit tables are the standard AES S, Camellia
    //! SBOX1 and Kuznyechik pi tables; the 4-bit ones are the optimal class
    //! representatives and the toy-cipher s-box.

    use crate::ddt::Sbox;

    pub const GAMMA: &str = "0EB17C96D34F28A5";

    pub const OPTIMAL_CLASSES: [&str; 16] = [
        "012D47F68BC93EA5",
        "012D47F68BE359AC",
        "012D47F68BE3AC59",
        "012D47F68C53AEB9",
        "012D47F68C9BAE53",
        "012D47F68CB9AE35",
        "012D47F68CB9AE53",
        "012D47F68CEBA935",
        "012D47F68E95AB3C",
        "012D47F68EB359AC",
        "012D47F68EB5A93C",
        "012D47F68EBA59C3",
        "012D47F68EBA93C5",
        "012D47F68EC95BA3",
        "012D47F68ECB395A",
        "012D47F68ECB93A5",
    ];

    pub const AES: &str = "\
637c777bf26b6fc53001672bfed7ab76ca82c97dfa5947f0add4a2af9ca472c0\
b7fd9326363ff7cc34a5e5f171d8311504c723c31896059a071280e2eb27b275\
09832c1a1b6e5aa0523bd6b329e32f8453d100ed20fcb15b6acbbe394a4c58cf\
d0efaafb434d338545f9027f503c9fa851a3408f929d38f5bcb6da2110fff3d2\
cd0c13ec5f974417c4a77e3d645d197360814fdc222a908846eeb814de5e0bdb\
e0323a0a4906245cc2d3ac629195e479e7c8376d8dd54ea96c56f4ea657aae08\
ba78252e1ca6b4c6e8dd741f4bbd8b8a703eb5664803f60e613557b986c11d9e\
e1f8981169d98e949b1e87e9ce5528df8ca1890dbfe6426841992d0fb054bb16";

    pub const CAMELLIA: &str = "\
70822cecb327c0e5e4855735ea0cae4123ef6b934519a521ed0e4f4e1d6592bd\
86b8af8f7ceb1fce3e30dc5f5ec50b1aa6e139cad5475d3dd9015ad651566c4d\
8b0d9a66fbccb02d74122b20f0b18499df4ccbc2347e76056db7a931d11704d7\
14583a61de1b111c320f9c165318f222fe44cfb2c3b57a912408e8a860fc6950\
aad0a07da1896297545b1e95e0ff64d210c40048a3f775db8a03e6da093fdd94\
875c8302cd4a90337367f6f39d7fbfe2529bd826c837c63b81966f4b13be632e\
e979a78c9f6ebc8e29f5f9b62ffdb4597898066ae74671bad425ab4288a28dfa\
7207b955f8eeac0a36492a683c38f1a44028d37bbbc943c115e3adf477c7809e";

    pub const KUZNYECHIK: &str = "\
fceedd11cf6e3116fbc4fada23c5044de977f0db932e99ba1736f1bb14cd5fc1\
f918655ae25cef21811c3c428b018e4f058402aee36a8fa0060bed987fd4d31f\
eb342c51eac848abf22a68a2fd3aceccb5700e56080c7612bf7213479cb75d87\
15a19629107b9ac7f391786f9d9eb2b13275193dff358a7e6d54c680c3bd0d57\
dff524a93ea843c9d779d6f67c22b903e00fecde7a94b0bcdce828504e330a4a\
a79760731e0062441ab83882649f2641ad454692275e552f8ca3a57d69d5953b\
0758b34086ac1df730376be488d9e789e11b83494c3ff8fe8d53aa90cad88561\
207167a42d2b095bcb9b25d0bee56c5259a674d2e6f4b4c0d166afc2394b63b6";

    pub fn gamma() -> Sbox {
        Sbox::parse_hex(4, GAMMA).expect("static table")
    }

    /// Representative `G_i` of optimal class `i`.
    pub fn optimal_class(i: usize) -> Sbox {
        Sbox::parse_hex(4, OPTIMAL_CLASSES[i]).expect("static table")
    }

    pub fn aes() -> Sbox {
        Sbox::parse_hex(8, AES).expect("static table")
    }

    pub fn camellia() -> Sbox {
        Sbox::parse_hex(8, CAMELLIA).expect("static table")
    }

    pub fn kuznyechik() -> Sbox {
        Sbox::parse_hex(8, KUZNYECHIK).expect("static table")
    }

    /// Looks up an s-box by name: `aes`, `camellia`, `kuznyechik`, `gamma`
    /// or `g0`..`g15`.
    pub fn by_name(name: &str) -> Option<Sbox> {
        let lower = name.to_ascii_lowercase();
        match lower.as_str() {
            "aes" => Some(aes()),
            "camellia" => Some(camellia()),
            "kuznyechik" => Some(kuznyechik()),
            "gamma" => Some(gamma()),
            _ => {
                let idx: usize = lower.strip_prefix('g')?.parse().ok()?;
                (idx < 16).then(|| optimal_class(idx))
            }
        }
    }
}

/// Uniformity value -> number of candidates (or operations).
pub type Histogram = BTreeMap<u16, u64>;

fn merge(mut a: Histogram, b: &Histogram) -> Histogram {
    for (&k, &v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumRecord {
    pub label: String,
    pub operation: String,
    pub histogram: Histogram,
    pub max_uniformity: u16,
}

impl SpectrumRecord {
    fn new(label: String, operation: String, histogram: Histogram) -> Self {
        let max_uniformity = histogram.keys().next_back().copied().unwrap_or(0);
        SpectrumRecord {
            label,
            operation,
            histogram,
            max_uniformity,
        }
    }

    pub fn total(&self) -> u64 {
        self.histogram.values().sum()
    }
}

/// The 105 operations on `F2^4` as translation groups, obtained by
/// conjugating the canonical `b = (0, 1)` group with every element of
/// `GL(4)` and keeping the first conjugate of each group.
pub fn all_105_operations() -> Result<Vec<TranslationGroup>> {
    let base = TranslationGroup::from_operation(&build_operation(&catalog::b01())?)?;
    distinct_conjugates(&base, &enumerate_gl(4)?)
}

/// One 4-bit operation prepared for classification: its table and the coset
/// representatives of its `H`.
pub struct FourBitContext {
    pub label: String,
    table: CircTable,
    /// Linear maps applied before the class representative (right cosets).
    pre: Vec<[u8; 16]>,
    /// Linear maps applied after it (left cosets).
    post: Vec<[u8; 16]>,
}

fn linear_table(m: &BitMatrix) -> [u8; 16] {
    let mut t = [0u8; 16];
    for (x, slot) in t.iter_mut().enumerate() {
        *slot = m.mul_vec(x as u64) as u8;
    }
    t
}

impl FourBitContext {
    /// `gl4` must be the full `GL(4)` in a fixed order; the first element of
    /// each coset in that order becomes its representative.
    pub fn new<O: Operation>(label: String, op: &O, gl4: &[BitMatrix]) -> Result<Self> {
        let inv = conjugacy_invariant(op);
        if inv.n != 4 || inv.d != 2 {
            return Err(Error::WrongRegime(format!(
                "4-bit classification needs n = 4 and d = 2, got n = {}, d = {}",
                inv.n, inv.d
            )));
        }
        let member = |g: &BitMatrix| is_member(op, g).unwrap_or(false);
        let pre = coset_representatives(gl4, member, CosetSide::Right)?;
        let post = coset_representatives(gl4, member, CosetSide::Left)?;
        Ok(FourBitContext {
            label,
            table: CircTable::build(op)?,
            pre: pre.iter().map(linear_table).collect(),
            post: post.iter().map(linear_table).collect(),
        })
    }

    pub fn candidate_count(&self) -> usize {
        self.pre.len() * self.post.len()
    }

    /// Calls `visit` with the table of every candidate built from `g`.
    fn for_each_candidate<F: FnMut(&[u8; 16])>(&self, g: &Sbox, mut visit: F) {
        let gt = g.table();
        let mut f = [0u8; 16];
        for pre in &self.pre {
            let mut inner = [0u8; 16];
            for x in 0..16 {
                inner[x] = gt[pre[x] as usize];
            }
            for post in &self.post {
                for x in 0..16 {
                    f[x] = post[inner[x] as usize];
                }
                visit(&f);
            }
        }
    }

    /// Histogram of `delta^o` over the coset-representative candidates of
    /// `g`. With `dedup`, candidates with identical tables count once.
    pub fn classify(&self, label: &str, g: &Sbox, dedup: bool) -> Result<SpectrumRecord> {
        if g.width() != 4 {
            return Err(Error::WrongRegime(
                "4-bit classification needs a 4-bit s-box".into(),
            ));
        }
        let mut histogram = Histogram::new();
        let mut seen = HashSet::new();
        self.for_each_candidate(g, |f| {
            if dedup && !seen.insert(*f) {
                return;
            }
            *histogram
                .entry(circ_uniformity_of_table(f, &self.table))
                .or_insert(0) += 1;
        });
        Ok(SpectrumRecord::new(
            label.to_string(),
            self.label.clone(),
            histogram,
        ))
    }

    /// Every candidate built from `g`, as s-boxes.
    pub fn candidates(&self, g: &Sbox) -> Vec<Sbox> {
        let mut out = Vec::with_capacity(self.candidate_count());
        self.for_each_candidate(g, |f| {
            out.push(Sbox::new(4, f.to_vec()).expect("bijective"))
        });
        out
    }
}

/// `classify_optimal_4bit` for a single operation and class.
pub fn classify_optimal_4bit<O: Operation>(
    op: &O,
    class_index: usize,
    dedup: bool,
) -> Result<SpectrumRecord> {
    if class_index >= 16 {
        return Err(Error::InvalidSpec(format!(
            "class index {class_index} is outside 0..16"
        )));
    }
    let ctx = FourBitContext::new("op".into(), op, &enumerate_gl(4)?)?;
    ctx.classify(
        &format!("G{class_index}"),
        &corpus::optimal_class(class_index),
        dedup,
    )
}

/// Reference candidate counts: rows `G_0..G_15`, columns uniformity 2, 4, ..., 16.
pub const REFERENCE_SPECTRA: [[u64; 8]; 16] = [
    [0, 780, 6695, 2956, 359, 16, 0, 12],
    [0, 682, 6927, 2823, 374, 0, 0, 12],
    [0, 781, 6695, 2956, 359, 16, 0, 12],
    [0, 896, 7566, 2210, 146, 0, 0, 0],
    [0, 1104, 7770, 1825, 118, 0, 0, 0],
    [0, 822, 7994, 1790, 212, 0, 0, 0],
    [0, 1120, 7441, 2108, 150, 0, 0, 0],
    [0, 898, 7628, 2139, 133, 20, 0, 0],
    [0, 859, 6503, 3102, 296, 48, 0, 12],
    [0, 1123, 7062, 2457, 141, 36, 0, 0],
    [0, 1084, 7115, 2437, 147, 36, 0, 0],
    [0, 1202, 7299, 2159, 157, 0, 0, 0],
    [0, 1099, 7275, 2291, 153, 0, 0, 0],
    [0, 916, 7749, 1965, 176, 12, 0, 0],
    [0, 1122, 7100, 2400, 149, 48, 0, 0],
    [0, 1122, 7100, 2400, 149, 48, 0, 0],
];

pub const SPECTRUM_COLUMNS: [u16; 8] = [2, 4, 6, 8, 10, 12, 14, 16];

/// Per-class results over a set of operations.
#[derive(Clone, Debug)]
pub struct ClassSummary {
    pub class_index: usize,
    /// Mean candidate count per uniformity over the operations.
    pub mean: BTreeMap<u16, f64>,
    pub min: BTreeMap<u16, u64>,
    pub max: BTreeMap<u16, u64>,
    /// Whether every operation produced the same histogram.
    pub uniform_across_operations: bool,
}

impl ClassSummary {
    pub fn support(&self) -> Vec<u16> {
        self.max
            .iter()
            .filter(|(_, &v)| v > 0)
            .map(|(&k, _)| k)
            .collect()
    }

    pub fn rounded(&self, uniformity: u16) -> u64 {
        self.mean
            .get(&uniformity)
            .map(|v| v.round() as u64)
            .unwrap_or(0)
    }
}

/// One disagreement between computed and reference entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceDifference {
    pub class_index: usize,
    pub uniformity: u16,
    pub computed: f64,
    pub reference: u64,
}

#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub operations: usize,
    pub dedup: bool,
    /// `records[op][class]`.
    pub records: Vec<Vec<SpectrumRecord>>,
    pub classes: Vec<ClassSummary>,
}

impl ClassificationReport {
    /// Entries whose rounded mean differs from the printed table.
    pub fn differences(&self) -> Vec<ReferenceDifference> {
        let mut out = Vec::new();
        for c in &self.classes {
            for (col, &u) in SPECTRUM_COLUMNS.iter().enumerate() {
                let reference = REFERENCE_SPECTRA[c.class_index][col];
                if c.rounded(u) != reference {
                    out.push(ReferenceDifference {
                        class_index: c.class_index,
                        uniformity: u,
                        computed: c.mean.get(&u).copied().unwrap_or(0.0),
                        reference,
                    });
                }
            }
        }
        out
    }

    /// Classes whose set of attained uniformities differs from the nonzero
    /// columns of the printed table.
    pub fn support_mismatches(&self) -> Vec<(usize, Vec<u16>, Vec<u16>)> {
        self.classes
            .iter()
            .filter_map(|c| {
                let reference: Vec<u16> = SPECTRUM_COLUMNS
                    .iter()
                    .zip(REFERENCE_SPECTRA[c.class_index])
                    .filter(|(_, v)| *v > 0)
                    .map(|(&u, _)| u)
                    .collect();
                let computed = c.support();
                (computed != reference).then_some((c.class_index, computed, reference))
            })
            .collect()
    }

    /// Candidates per class, summed over the table row.
    pub fn row_total(&self, class_index: usize) -> f64 {
        self.classes[class_index].mean.values().sum()
    }

    /// `class,uniformity,count` with the mean count over operations.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,uniformity,count\n");
        for c in &self.classes {
            for &u in &SPECTRUM_COLUMNS {
                let v = c.mean.get(&u).copied().unwrap_or(0.0);
                out.push_str(&format!("G{},{},{}\n", c.class_index, u, v));
            }
        }
        out
    }
}

/// Runs the classification of `classes` against `operations` and aggregates
/// the results per class.
pub fn classify_against(
    operations: &[TranslationGroup],
    classes: &[usize],
    dedup: bool,
    exec: Exec,
) -> Result<ClassificationReport> {
    let gl4 = enumerate_gl(4)?;
    let records: Vec<Vec<SpectrumRecord>> = exec
        .map_range(0..operations.len(), |i| -> Result<Vec<SpectrumRecord>> {
            let ctx = FourBitContext::new(format!("op{i}"), &operations[i], &gl4)?;
            classes
                .iter()
                .map(|&c| ctx.classify(&format!("G{c}"), &corpus::optimal_class(c), dedup))
                .collect()
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let ops = records.len().max(1) as f64;
    let summaries = classes
        .iter()
        .enumerate()
        .map(|(pos, &class_index)| {
            let per_op: Vec<&Histogram> = records.iter().map(|r| &r[pos].histogram).collect();
            let mut mean = BTreeMap::new();
            let mut min = BTreeMap::new();
            let mut max = BTreeMap::new();
            for &u in &SPECTRUM_COLUMNS {
                let values: Vec<u64> = per_op
                    .iter()
                    .map(|h| h.get(&u).copied().unwrap_or(0))
                    .collect();
                mean.insert(u, values.iter().sum::<u64>() as f64 / ops);
                min.insert(u, values.iter().copied().min().unwrap_or(0));
                max.insert(u, values.iter().copied().max().unwrap_or(0));
            }
            ClassSummary {
                class_index,
                mean,
                min,
                max,
                uniform_across_operations: per_op.windows(2).all(|w| w[0] == w[1]),
            }
        })
        .collect();
    Ok(ClassificationReport {
        operations: records.len(),
        dedup,
        records,
        classes: summaries,
    })
}

/// Result of an 8-bit campaign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Campaign {
    pub label: String,
    pub d: usize,
    /// Uniformity induced by each operation, in enumeration order.
    pub per_operation: Vec<u16>,
    /// Uniformity -> number of operations.
    pub histogram: Histogram,
}

impl Campaign {
    fn from_values(label: String, d: usize, per_operation: Vec<u16>) -> Self {
        let histogram = per_operation.iter().fold(Histogram::new(), |mut h, &u| {
            *h.entry(u).or_insert(0) += 1;
            h
        });
        Campaign {
            label,
            d,
            per_operation,
            histogram,
        }
    }

    /// `sbox,d,uniformity,op_count` rows, without header.
    pub fn csv_rows(&self) -> String {
        self.histogram
            .iter()
            .map(|(u, c)| format!("{},{},{},{}\n", self.label, self.d, u, c))
            .collect()
    }
}

pub const CAMPAIGN_CSV_HEADER: &str = "sbox,d,uniformity,op_count";

fn spec_uniformity(sbox: &Sbox, spec: &ThetaSpec) -> Result<u16> {
    let op = build_operation(spec)?;
    let table = op.circ_table().expect("8-bit operations are tabulated");
    Ok(circ_uniformity_of_table(sbox.table(), table))
}

/// `delta^o` of `sbox` for every canonical operation on `F2^s` with the given
/// `d`.
pub fn campaign_canonical(label: &str, sbox: &Sbox, d: usize, exec: Exec) -> Result<Campaign> {
    let specs: Vec<ThetaSpec> = enumerate_canonical(sbox.width(), d)?.collect();
    let values = exec
        .map(&specs, |spec| spec_uniformity(sbox, spec))
        .into_iter()
        .collect::<Result<Vec<u16>>>()?;
    Ok(Campaign::from_values(label.to_string(), d, values))
}

/// The canonical campaign restricted to `d` in `{5, 6}` on 8-bit s-boxes.
pub fn campaign_8bit(label: &str, sbox: &Sbox, d: usize, exec: Exec) -> Result<Campaign> {
    if sbox.width() != 8 || !(5..=6).contains(&d) {
        return Err(Error::WrongRegime(format!(
            "8-bit campaign needs an 8-bit s-box and d in 5..=6, got s = {}, d = {d}",
            sbox.width()
        )));
    }
    campaign_canonical(label, sbox, d, exec)
}

/// Draws a valid canonical defining matrix: every `b_{i,j}` uniform,
/// rejecting invalid matrices.
pub fn random_spec<R: rand::Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<ThetaSpec> {
    let mut spec = ThetaSpec::new(n, d)?;
    let k = n - d;
    loop {
        for i in 1..=k {
            for j in i + 1..=k {
                spec.set(i, j, rng.gen::<u64>() & mask(d))?;
            }
        }
        if crate::altop::validate_theta(&spec)?.valid {
            return Ok(spec);
        }
    }
}

/// `delta^o` of `sbox` for `count` random canonical operations. Draw `i` uses
/// its own generator derived from `(seed, i)`.
pub fn campaign_random_ops(
    label: &str,
    sbox: &Sbox,
    d: usize,
    count: usize,
    seed: u64,
    exec: Exec,
) -> Result<Campaign> {
    let n = sbox.width();
    if d < 1 || d + 2 > n {
        return Err(Error::DimensionOutOfRange { n, d });
    }
    if d < 2 - n % 2 {
        return Err(Error::DimensionOutOfRange { n, d });
    }
    let values = exec
        .map_range(0..count, |i| {
            let mut rng = task_rng(seed, d as u64, i as u64);
            spec_uniformity(sbox, &random_spec(n, d, &mut rng)?)
        })
        .into_iter()
        .collect::<Result<Vec<u16>>>()?;
    Ok(Campaign::from_values(label.to_string(), d, values))
}

/// Checks that every candidate of class `g` under `ctx` is a permutation with
/// classical uniformity 4.
pub fn candidates_have_plus_uniformity_four(ctx: &FourBitContext, g: &Sbox) -> bool {
    ctx.candidates(g)
        .iter()
        .all(|f| ddt_plus(f).uniformity() == 4)
}

/// Sums histograms.
pub fn merge_histograms<'a, I: IntoIterator<Item = &'a Histogram>>(hs: I) -> Histogram {
    hs.into_iter().fold(Histogram::new(), merge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::altop::Xor;

    /// AES S-box rebuilt from inversion in `GF(2^8)` and the affine map.
    fn aes_oracle() -> Vec<u8> {
        let mul = |mut a: u8, mut b: u8| {
            let mut p = 0u8;
            while b != 0 {
                if b & 1 != 0 {
                    p ^= a;
                }
                let hi = a & 0x80;
                a <<= 1;
                if hi != 0 {
                    a ^= 0x1b;
                }
                b >>= 1;
            }
            p
        };
        (0..=255u8)
            .map(|x| {
                let inv = if x == 0 {
                    0
                } else {
                    (1..=255u8).find(|&y| mul(x, y) == 1).unwrap()
                };
                let mut out = 0x63u8;
                for r in 0..5 {
                    out ^= inv.rotate_left(r);
                }
                out
            })
            .collect()
    }

    #[test]
    fn corpus_is_sound() {
        assert_eq!(corpus::aes().table(), aes_oracle().as_slice());
        for s in [corpus::aes(), corpus::camellia(), corpus::kuznyechik()] {
            assert_eq!(s.width(), 8);
        }
        for i in 0..16 {
            let g = corpus::optimal_class(i);
            assert_eq!(g.uniformity(), 4);
            assert_eq!(&g.table()[..9], &[0, 1, 2, 0xD, 4, 7, 0xF, 6, 8]);
        }
        assert_eq!(corpus::by_name("G14"), Some(corpus::optimal_class(14)));
        assert_eq!(corpus::by_name("gamma"), Some(corpus::gamma()));
        assert!(corpus::by_name("g16").is_none());
    }

    #[test]
    fn canonical_context_shape() {
        let op = build_operation(&catalog::b01()).unwrap();
        let ctx = FourBitContext::new("b01".into(), &op, &enumerate_gl(4).unwrap()).unwrap();
        assert_eq!(ctx.candidate_count(), 11025);
        assert!(candidates_have_plus_uniformity_four(
            &ctx,
            &corpus::optimal_class(0)
        ));
        let rec = ctx
            .classify("G0", &corpus::optimal_class(0), false)
            .unwrap();
        assert_eq!(rec.total(), 11025);
        assert!(rec.histogram.get(&16).copied().unwrap_or(0) > 0);
        assert!(!rec.histogram.contains_key(&2) && !rec.histogram.contains_key(&14));
        let g3 = ctx
            .classify("G3", &corpus::optimal_class(3), false)
            .unwrap();
        assert_eq!(g3.max_uniformity, 10);
        let dedup = ctx.classify("G0", &corpus::optimal_class(0), true).unwrap();
        assert!(dedup.total() <= 11025);
        assert!(matches!(
            FourBitContext::new("xor".into(), &Xor(4), &enumerate_gl(4).unwrap()),
            Err(Error::WrongRegime(_))
        ));
    }

    #[test]
    fn d6_campaign_for_aes() {
        let c = campaign_8bit("AES", &corpus::aes(), 6, Exec::Parallel).unwrap();
        assert_eq!(c.histogram, Histogram::from([(8, 55), (10, 8)]));
        assert_eq!(c.csv_rows(), "AES,6,8,55\nAES,6,10,8\n");
    }

    #[test]
    fn random_campaign_is_deterministic() {
        let a = campaign_random_ops("AES", &corpus::aes(), 4, 40, 9, Exec::Parallel).unwrap();
        let b = campaign_random_ops("AES", &corpus::aes(), 4, 40, 9, Exec::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.histogram.values().sum::<u64>(), 40);
        let empty = campaign_random_ops("AES", &corpus::aes(), 4, 0, 9, Exec::Parallel).unwrap();
        assert!(empty.histogram.is_empty());
    }
}
