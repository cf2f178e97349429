//! Candidate enumeration over k-feature settings, permutation noise
//! baselines, the confirmability and replaceability criteria, and the
//! selection protocol that assembles a [`MajorFactorReport`].

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::discretize::{fuse, fuse_codes, BinScheme, BinningConfig, CodedColumn, CodedFrame};
use crate::infotheory::{ce_codes, decompose_pair, entropy, fused_keys, mce_matrix, InfoDecomposition, MceMatrix};
use crate::rng::{derive, tag};
use crate::{Error, Result};

pub const SCHEMA_VERSION: &str = "ceda.major-factor-report/1";

/// Reading of condition (a) of the replaceability criterion used by
/// [`c2_unreplaceable`]; copied into every report.
pub const C2A_READING: &str = "drop(B) > drop(top member of B) + |B| * drop(B without its top member)";

/// Upper bound on `key range * response categories` for dense tallies.
const DENSE_CELLS: usize = 1 << 22;

/// A covariate feature-set, as indices into the frame's covariates (sorted)
/// and the matching names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct FeatureSet {
    pub indices: Vec<usize>,
    pub names: Vec<String>,
}

impl FeatureSet {
    pub fn new(frame: &CodedFrame, indices: &[usize]) -> Self {
        let mut indices = indices.to_vec();
        indices.sort_unstable();
        indices.dedup();
        let names = indices.iter().map(|&i| frame.covariates[i].name.clone()).collect();
        FeatureSet { indices, names }
    }

    pub fn from_names(frame: &CodedFrame, names: &[&str]) -> Result<Self> {
        let idx = names
            .iter()
            .map(|n| frame.covariate_index(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(frame, &idx))
    }

    pub fn label(&self) -> String {
        self.names.join("_")
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CeEntry {
    pub set: FeatureSet,
    pub ce: f64,
    pub ce_drop: f64,
    /// Occupied hypercubes of the fused set, i.e. rows of its table.
    pub table_rows: usize,
    /// Nonzero cells of the set-vs-response table.
    pub occupied_cells: usize,
    /// Rows per occupied hypercube.
    pub avg_cell_count: f64,
    pub reliable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum EnumMode {
    Exhaustive,
    Beam { width: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CeTable {
    pub k: usize,
    pub mode: EnumMode,
    pub response: String,
    pub n_rows: usize,
    pub response_entropy: f64,
    /// Ascending CE; ties broken lexicographically on indices.
    pub entries: Vec<CeEntry>,
}

impl CeTable {
    pub fn find(&self, names: &[&str]) -> Option<&CeEntry> {
        let want: BTreeSet<&str> = names.iter().copied().collect();
        self.entries
            .iter()
            .find(|e| e.set.names.len() == want.len() && e.set.names.iter().all(|n| want.contains(n.as_str())))
    }

    pub fn rank(&self, names: &[&str]) -> Option<usize> {
        let e = self.find(names)?;
        self.entries.iter().position(|x| core::ptr::eq(x, e))
    }
}

/// Enumeration limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnumConfig {
    /// Largest number of subsets enumerated exhaustively.
    pub budget: usize,
    /// Number of top (k-1)-sets extended when the budget is exceeded.
    pub beam_width: usize,
    pub reliability: f64,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            budget: 100_000,
            beam_width: 50,
            reliability: 10.0,
        }
    }
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + n - k) else {
            break;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
    out
}

/// Shared per-frame state for CE evaluations.
struct Ctx<'a> {
    frame: &'a CodedFrame,
    y: &'a [u32],
    ny: usize,
    n: usize,
    hy: f64,
}

impl<'a> Ctx<'a> {
    fn new(frame: &'a CodedFrame) -> Result<Self> {
        let y = frame.response.codes();
        let hy = entropy(&frame.response.counts())?;
        Ok(Ctx {
            frame,
            y,
            ny: frame.response.n_cats(),
            n: y.len(),
            hy,
        })
    }

    fn limit(&self) -> usize {
        DENSE_CELLS / self.ny.max(1)
    }

    fn keys(&self, set: &[usize]) -> (Vec<u32>, usize) {
        if set.is_empty() {
            return (vec![0; self.n], 1);
        }
        let members: Vec<&CodedColumn> = set.iter().map(|&i| &self.frame.covariates[i]).collect();
        fused_keys(&members, self.n, self.limit())
    }

    fn joint(&self, m: &[u32], nm: usize, c: &[u32], nc: usize) -> (Vec<u32>, usize) {
        match nm.checked_mul(nc) {
            Some(p) if p <= self.limit() => (m.iter().zip(c).map(|(&a, &b)| a * nc as u32 + b).collect(), p),
            _ => fuse_codes(&[(m, nm), (c, nc)], self.n),
        }
    }

    fn ce(&self, x: &[u32], nx: usize) -> (f64, usize, usize) {
        if nx > self.limit() {
            // sparse key range: compact first
            let (k, n) = fuse_codes(&[(x, nx)], self.n);
            return ce_codes(&k, n, self.y, self.ny);
        }
        ce_codes(x, nx, self.y, self.ny)
    }

    fn entry(&self, set: &[usize], reliability: f64) -> CeEntry {
        let (k, nk) = self.keys(set);
        let (ce, table_rows, occupied_cells) = self.ce(&k, nk);
        let avg = self.n as f64 / table_rows as f64;
        CeEntry {
            set: FeatureSet::new(self.frame, set),
            ce,
            ce_drop: (self.hy - ce).max(0.0),
            table_rows,
            occupied_cells,
            avg_cell_count: avg,
            reliable: avg >= reliability,
        }
    }

    fn occupied(&self, set: &[usize]) -> usize {
        let (k, nk) = self.keys(set);
        let (_, distinct) = fuse_codes(&[(&k, nk)], self.n);
        distinct
    }

    fn reliable(&self, set: &[usize], reliability: f64) -> bool {
        self.n as f64 / self.occupied(set) as f64 >= reliability
    }
}

/// Rank all k-subsets of `covariates` (indices into the frame) by CE of
/// the response given the fused subset.
pub fn enumerate_ce(frame: &CodedFrame, covariates: &[usize], k: usize, cfg: &EnumConfig) -> Result<CeTable> {
    let ctx = Ctx::new(frame)?;
    enumerate_with(&ctx, covariates, k, cfg)
}

fn enumerate_with(ctx: &Ctx, covariates: &[usize], k: usize, cfg: &EnumConfig) -> Result<CeTable> {
    let mut pool = covariates.to_vec();
    pool.sort_unstable();
    pool.dedup();
    if k == 0 || k > pool.len() {
        return Err(Error::InvalidConfig(format!("k = {k} with {} covariates", pool.len())));
    }
    if let Some(&bad) = pool.iter().find(|&&i| i >= ctx.frame.covariates.len()) {
        return Err(Error::InvalidConfig(format!("covariate index {bad} out of range")));
    }
    if cfg.budget == 0 {
        return Err(Error::InvalidConfig("enumeration budget must be positive".into()));
    }
    let (sets, mode) = if binom(pool.len(), k) <= cfg.budget as u128 {
        (combinations(&pool, k), EnumMode::Exhaustive)
    } else {
        if cfg.beam_width == 0 {
            return Err(Error::InvalidConfig(
                "beam width must be positive when the budget is exceeded".into(),
            ));
        }
        let prev = enumerate_with(ctx, &pool, k - 1, cfg)?;
        let mut sets = BTreeSet::new();
        for e in prev.entries.iter().take(cfg.beam_width) {
            for &c in &pool {
                if !e.set.indices.contains(&c) {
                    let mut s = e.set.indices.clone();
                    s.push(c);
                    s.sort_unstable();
                    sets.insert(s);
                }
            }
        }
        (sets.into_iter().collect(), EnumMode::Beam { width: cfg.beam_width })
    };
    let mut entries = crate::par::map_indexed(sets.len(), |i| ctx.entry(&sets[i], cfg.reliability));
    entries.sort_by(|a, b| a.ce.total_cmp(&b.ce).then_with(|| a.set.indices.cmp(&b.set.indices)));
    Ok(CeTable {
        k,
        mode,
        response: ctx.frame.response.name.clone(),
        n_rows: ctx.n,
        response_entropy: ctx.hy,
        entries,
    })
}

/// CE-drops of permuted copies of a candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseBaseline {
    pub k: usize,
    pub replicates: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub q95: f64,
}

impl NoiseBaseline {
    pub fn from_replicates(k: usize, replicates: Vec<f64>) -> Result<Self> {
        let r = replicates.len();
        if r < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 replicates, got {r}")));
        }
        let mean = replicates.iter().sum::<f64>() / r as f64;
        let var = replicates.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (r - 1) as f64;
        let mut sorted = replicates.clone();
        sorted.sort_by(f64::total_cmp);
        let h = 0.95 * (r - 1) as f64;
        let lo = h as usize;
        let hi = (lo + 1).min(r - 1);
        let q95 = sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]);
        Ok(NoiseBaseline {
            k,
            replicates,
            mean,
            sd: libm::sqrt(var),
            q95,
        })
    }

    pub fn max(&self) -> f64 {
        self.replicates.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Row indices grouped by locality code (counting sort).
fn localities(m: &[u32], nm: usize) -> (Vec<u32>, Vec<usize>) {
    let mut bounds = vec![0usize; nm + 1];
    for &c in m {
        bounds[c as usize + 1] += 1;
    }
    for i in 0..nm {
        bounds[i + 1] += bounds[i];
    }
    let mut fill = bounds.clone();
    let mut order = vec![0u32; m.len()];
    for (i, &c) in m.iter().enumerate() {
        order[fill[c as usize]] = i as u32;
        fill[c as usize] += 1;
    }
    (order, bounds)
}

fn permute_within(c: &[u32], order: &[u32], bounds: &[usize], rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut out = vec![0u32; c.len()];
    let mut buf = Vec::new();
    for w in bounds.windows(2) {
        let idx = &order[w[0]..w[1]];
        buf.clear();
        buf.extend(idx.iter().map(|&i| c[i as usize]));
        buf.shuffle(rng);
        for (&i, &v) in idx.iter().zip(&buf) {
            out[i as usize] = v;
        }
    }
    out
}

fn set_words(purpose: u64, model: &[usize], cand: &[usize]) -> Vec<u64> {
    let mut w = vec![purpose];
    w.extend(model.iter().map(|&i| i as u64));
    w.push(u64::MAX);
    w.extend(cand.iter().map(|&i| i as u64));
    w
}

/// Drop of H[Y | model] on adding `cand`, with replicates where `cand` is
/// permuted within each locality of `model`.
fn conditional_drop(
    ctx: &Ctx,
    model: &[usize],
    cand: &[usize],
    r: usize,
    seed: u64,
) -> Result<(f64, f64, f64, NoiseBaseline)> {
    let (m, nm) = ctx.keys(model);
    let (c, nc) = ctx.keys(cand);
    let h_m = ctx.ce(&m, nm).0;
    let (j, nj) = ctx.joint(&m, nm, &c, nc);
    let h_mc = ctx.ce(&j, nj).0;
    let (order, bounds) = localities(&m, nm);
    let words = set_words(tag::BASELINE, model, cand);
    let reps = crate::par::map_indexed(r, |rep| {
        let mut w = words.clone();
        w.push(rep as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(derive(seed, &w));
        let cp = permute_within(&c, &order, &bounds, &mut rng);
        let (j, nj) = ctx.joint(&m, nm, &cp, nc);
        h_m - ctx.ce(&j, nj).0
    });
    Ok((h_m - h_mc, h_m, h_mc, NoiseBaseline::from_replicates(cand.len(), reps)?))
}

/// Permutation baseline for the CE-drop of `candidate`: each replicate
/// permutes the candidate's fused codes across rows.
pub fn noise_baseline(frame: &CodedFrame, candidate: &[usize], r: usize, seed: u64) -> Result<NoiseBaseline> {
    let ctx = Ctx::new(frame)?;
    Ok(conditional_drop(&ctx, &[], candidate, r, seed)?.3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C1Verdict {
    pub pass: bool,
    pub drop: f64,
    pub threshold: f64,
    /// (drop - mean) / sd; absent when the baseline has zero spread.
    pub margin_sd: Option<f64>,
}

/// Confirmable when the drop clears both `mean + z * sd` and the 95th
/// percentile of the baseline. A zero-spread baseline is compared against
/// its largest replicate.
pub fn c1_confirmable(candidate_drop: f64, base: &NoiseBaseline, z: f64) -> C1Verdict {
    if base.sd > 0.0 {
        let threshold = (base.mean + z * base.sd).max(base.q95);
        C1Verdict {
            pass: candidate_drop > threshold,
            drop: candidate_drop,
            threshold,
            margin_sd: Some((candidate_drop - base.mean) / base.sd),
        }
    } else {
        let threshold = base.max();
        C1Verdict {
            pass: candidate_drop > threshold,
            drop: candidate_drop,
            threshold,
            margin_sd: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitCheck {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub drop_set: f64,
    pub drop_left: f64,
    pub drop_right: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionA {
    pub top_member: String,
    pub top_drop: f64,
    pub complement: Vec<String>,
    pub complement_drop: f64,
    pub multiplier: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionB {
    pub identified: Vec<String>,
    pub drop_union: f64,
    pub drop_set: f64,
    pub drop_identified: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C2Verdict {
    pub set: Vec<String>,
    pub pass: bool,
    /// Ecological test over every two-way split; empty for a single feature.
    pub splits: Vec<SplitCheck>,
    pub condition_a: Option<ConditionA>,
    pub condition_b: Vec<ConditionB>,
    pub reading: String,
}

/// Replaceability checks for `b` against already identified sets.
pub fn c2_unreplaceable(frame: &CodedFrame, b: &[usize], identified: &[Vec<usize>]) -> Result<C2Verdict> {
    let ctx = Ctx::new(frame)?;
    let b = FeatureSet::new(frame, b).indices;
    if b.is_empty() {
        return Err(Error::Empty("feature set"));
    }
    let drop = |s: &[usize]| {
        let (k, nk) = ctx.keys(s);
        ctx.hy - ctx.ce(&k, nk).0
    };
    let names = |s: &[usize]| FeatureSet::new(frame, s).names;
    let d_b = drop(&b);
    let mut splits = Vec::new();
    let nb = b.len();
    if nb >= 2 {
        // masks containing the first member enumerate each split once
        for mask in 0..(1u64 << (nb - 1)) {
            let full = (mask << 1) | 1;
            if full == (1u64 << nb) - 1 {
                continue;
            }
            let left: Vec<usize> = (0..nb).filter(|i| full >> i & 1 == 1).map(|i| b[i]).collect();
            let right: Vec<usize> = (0..nb).filter(|i| full >> i & 1 == 0).map(|i| b[i]).collect();
            let (dl, dr) = (drop(&left), drop(&right));
            splits.push(SplitCheck {
                left: names(&left),
                right: names(&right),
                drop_set: d_b,
                drop_left: dl,
                drop_right: dr,
                pass: d_b > dl + dr,
            });
        }
    }
    let condition_a = (nb >= 2).then(|| {
        let singles: Vec<f64> = b.iter().map(|&i| drop(&[i])).collect();
        let top = (0..nb).fold(0, |best, i| if singles[i] > singles[best] { i } else { best });
        let rest: Vec<usize> = b
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != top)
            .map(|(_, &x)| x)
            .collect();
        let dc = drop(&rest);
        ConditionA {
            top_member: frame.covariates[b[top]].name.clone(),
            top_drop: singles[top],
            complement: names(&rest),
            complement_drop: dc,
            multiplier: nb,
            pass: d_b > singles[top] + nb as f64 * dc,
        }
    });
    let condition_b: Vec<ConditionB> = identified
        .iter()
        .map(|m| {
            let mut u: Vec<usize> = b.iter().chain(m).copied().collect();
            u.sort_unstable();
            u.dedup();
            let (du, dm) = (drop(&u), drop(m));
            ConditionB {
                identified: names(m),
                drop_union: du,
                drop_set: d_b,
                drop_identified: dm,
                pass: du >= d_b + dm,
            }
        })
        .collect();
    let pass = splits.iter().all(|s| s.pass)
        && condition_a.as_ref().is_none_or(|a| a.pass)
        && condition_b.iter().all(|c| c.pass);
    Ok(C2Verdict {
        set: names(&b),
        pass,
        splits,
        condition_a,
        condition_b,
        reading: C2A_READING.into(),
    })
}

/// Every tunable of the selection protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub scheme: BinScheme,
    pub bins: usize,
    pub response_bins: usize,
    pub k_max: usize,
    pub replicates: usize,
    pub z: f64,
    pub min_cell: usize,
    /// Smallest excess conditional drop (nats above the permutation mean)
    /// accepted when adding or keeping a feature.
    pub min_gain: f64,
    pub shortlist_cap: usize,
    pub max_depth: usize,
    pub reliability: f64,
    pub beam_width: usize,
    pub budget: usize,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            scheme: BinScheme::EqualFrequency,
            bins: 12,
            response_bins: 12,
            k_max: 3,
            replicates: 50,
            z: 3.0,
            min_cell: 500,
            min_gain: 0.007,
            shortlist_cap: 10,
            max_depth: 3,
            reliability: 10.0,
            beam_width: 50,
            budget: 100_000,
            seed: 0,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.bins < 2 || self.response_bins < 2 {
            return bad(format!(
                "bin counts must be at least 2 (bins={}, response_bins={})",
                self.bins, self.response_bins
            ));
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1".into());
        }
        if self.replicates < 20 {
            return bad(format!("replicates must be at least 20, got {}", self.replicates));
        }
        if !(self.z.is_finite() && self.z > 0.0) {
            return bad(format!("z must be positive, got {}", self.z));
        }
        if !(self.min_gain.is_finite() && self.min_gain >= 0.0) {
            return bad(format!("min_gain must be non-negative, got {}", self.min_gain));
        }
        if !(self.reliability.is_finite() && self.reliability > 0.0) {
            return bad(format!("reliability must be positive, got {}", self.reliability));
        }
        if self.shortlist_cap == 0 || self.max_depth == 0 || self.budget == 0 || self.beam_width == 0 {
            return bad("shortlist_cap, max_depth, budget and beam_width must be positive".into());
        }
        Ok(())
    }

    pub fn binning(&self) -> BinningConfig {
        BinningConfig {
            scheme: self.scheme,
            covariate_bins: self.bins,
            response_bins: self.response_bins,
            per_feature: Default::default(),
        }
    }

    pub fn enumeration(&self) -> EnumConfig {
        EnumConfig {
            budget: self.budget,
            beam_width: self.beam_width,
            reliability: self.reliability,
        }
    }
}

/// One conditional test: the drop from H[Y | model] to H[Y | model, cand]
/// against permutations of `cand` within the localities of `model`. When
/// `model` is empty this is the plain noise-baseline comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalTest {
    pub model: Vec<String>,
    pub candidate: Vec<String>,
    /// H[Y | model].
    pub model_ce: f64,
    /// H[Y | model, cand], the locality-weighted CE of the candidate.
    pub weighted_ce: f64,
    pub drop: f64,
    pub baseline: NoiseBaseline,
    pub excess: f64,
    pub c1: C1Verdict,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalCheck {
    pub locality: String,
    pub n: usize,
    pub drop: f64,
    pub c1: C1Verdict,
    pub baseline_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageAction {
    /// Joined the anchor into one higher-order factor.
    Merge,
    NewFactor,
    Stop,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "step")]
pub enum Evidence {
    Mce {
        matrix: MceMatrix,
    },
    CeTable {
        table: CeTable,
    },
    Screen {
        tests: Vec<ConditionalTest>,
    },
    Synergy {
        pair: Vec<String>,
        adjusted_gain: f64,
        sd: f64,
        pass: bool,
    },
    Shortlist {
        candidates: Vec<Vec<String>>,
        excess: Vec<f64>,
        truncated: Vec<Vec<String>>,
    },
    Anchor {
        set: Vec<String>,
    },
    Stage {
        depth: usize,
        model: Vec<String>,
        tests: Vec<ConditionalTest>,
        unreliable: Vec<String>,
        admitted: Vec<String>,
        action: StageAction,
    },
    Uniformity {
        anchor: String,
        candidate: String,
        localities: Vec<LocalCheck>,
        skipped: usize,
        pass: bool,
    },
    Revocation {
        round: usize,
        tests: Vec<ConditionalTest>,
        removed: Option<String>,
    },
    C2 {
        verdict: C2Verdict,
    },
    Decomposition {
        pair: Vec<String>,
        decomposition: InfoDecomposition,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorFactor {
    pub members: Vec<String>,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RevokedCandidate {
    pub candidate: Vec<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorFactorReport {
    pub schema_version: String,
    pub response: String,
    pub covariates: Vec<String>,
    pub n_rows: usize,
    pub dropped_rows: usize,
    pub config: ProtocolConfig,
    pub seed: u64,
    pub c2_reading: String,
    pub factors: Vec<MajorFactor>,
    pub revoked: Vec<RevokedCandidate>,
    pub evidence: Vec<Evidence>,
}

impl MajorFactorReport {
    /// Factors as sorted name lists, sorted.
    pub fn factor_sets(&self) -> Vec<Vec<String>> {
        let mut out: Vec<Vec<String>> = self
            .factors
            .iter()
            .map(|f| {
                let mut m = f.members.clone();
                m.sort();
                m
            })
            .collect();
        out.sort();
        out
    }
}

/// Code `response` and every other column of `ds` with the configured
/// binning, then run the protocol.
pub fn run_protocol(ds: &Dataset, response: &[&str], cfg: &ProtocolConfig) -> Result<MajorFactorReport> {
    cfg.validate()?;
    let covs: Vec<&str> = ds.names().filter(|n| !response.contains(n)).collect();
    let frame = CodedFrame::from_dataset(ds, response, &covs, &cfg.binning())?;
    run_protocol_frame(&frame, cfg)
}

struct Protocol<'a> {
    ctx: Ctx<'a>,
    cfg: &'a ProtocolConfig,
    evidence: Vec<Evidence>,
}

impl<'a> Protocol<'a> {
    fn names(&self, s: &[usize]) -> Vec<String> {
        FeatureSet::new(self.ctx.frame, s).names
    }

    fn test(&self, model: &[usize], cand: &[usize]) -> Result<ConditionalTest> {
        let (drop, model_ce, weighted_ce, baseline) =
            conditional_drop(&self.ctx, model, cand, self.cfg.replicates, self.cfg.seed)?;
        let c1 = c1_confirmable(drop, &baseline, self.cfg.z);
        let excess = drop - baseline.mean;
        // the gain floor applies once something is conditioned on
        let pass = c1.pass && (model.is_empty() || excess >= self.cfg.min_gain);
        Ok(ConditionalTest {
            model: self.names(model),
            candidate: self.names(cand),
            model_ce,
            weighted_ce,
            drop,
            baseline,
            excess,
            c1,
            pass,
        })
    }

    /// Local confirmability of `cand` inside every sizeable locality of
    /// the single feature `anchor`.
    fn uniformity(&self, anchor: usize, cand: usize) -> Result<Evidence> {
        let frame = self.ctx.frame;
        let a = &frame.covariates[anchor];
        let (order, bounds) = localities(a.codes(), a.n_cats());
        let mut checks = Vec::new();
        let mut skipped = 0;
        for (code, w) in bounds.windows(2).enumerate() {
            let rows = &order[w[0]..w[1]];
            if rows.len() < self.cfg.min_cell {
                skipped += 1;
                continue;
            }
            let y = frame.response.take(rows);
            let c = frame.covariates[cand].take(rows);
            let sub = CodedFrame::new(y, vec![c])?;
            let ctx = Ctx::new(&sub)?;
            let seed = derive(self.cfg.seed, &[tag::LOCAL, anchor as u64, cand as u64, code as u64]);
            let (drop, _, _, base) = conditional_drop(&ctx, &[], &[0], self.cfg.replicates, seed)?;
            checks.push(LocalCheck {
                locality: a.label(code as u32).into(),
                n: rows.len(),
                drop,
                c1: c1_confirmable(drop, &base, self.cfg.z),
                baseline_mean: base.mean,
            });
        }
        let pass = !checks.is_empty() && checks.iter().all(|c| c.c1.pass);
        Ok(Evidence::Uniformity {
            anchor: a.name.clone(),
            candidate: frame.covariates[cand].name.clone(),
            localities: checks,
            skipped,
            pass,
        })
    }
}

fn pick_best(tests: &[(usize, ConditionalTest)]) -> Option<usize> {
    tests
        .iter()
        .filter(|(_, t)| t.pass)
        .fold(None, |best: Option<&(usize, ConditionalTest)>, x| match best {
            Some(b) if b.1.excess >= x.1.excess => Some(b),
            _ => Some(x),
        })
        .map(|(i, _)| *i)
}

/// The selection protocol on an already coded frame.
pub fn run_protocol_frame(frame: &CodedFrame, cfg: &ProtocolConfig) -> Result<MajorFactorReport> {
    cfg.validate()?;
    let n_cov = frame.covariates.len();
    if n_cov == 0 {
        return Err(Error::Empty("no covariates"));
    }
    let mut p = Protocol {
        ctx: Ctx::new(frame)?,
        cfg,
        evidence: Vec::new(),
    };
    let mut revoked = Vec::new();

    // MFS-1: association structure of the response and covariates.
    {
        let mut cols: Vec<&CodedColumn> = vec![&frame.response];
        cols.extend(frame.covariates.iter());
        if cols.len() >= 2 {
            p.evidence.push(Evidence::Mce {
                matrix: mce_matrix(&cols)?,
            });
        }
    }

    // MFS-2: CE tables and the candidate shortlist.
    let all: Vec<usize> = (0..n_cov).collect();
    let ecfg = cfg.enumeration();
    let mut pair_entries = Vec::new();
    for k in 1..=cfg.k_max.min(n_cov) {
        let table = enumerate_with(&p.ctx, &all, k, &ecfg)?;
        if k == 2 {
            pair_entries = table
                .entries
                .iter()
                .filter(|e| e.reliable)
                .map(|e| e.set.indices.clone())
                .collect();
            pair_entries.sort();
        }
        p.evidence.push(Evidence::CeTable { table });
    }
    let mut singles = Vec::new();
    for &i in &all {
        if p.ctx.reliable(&[i], cfg.reliability) {
            singles.push((i, p.test(&[], &[i])?));
        }
    }
    let mut pairs = Vec::new();
    for s in &pair_entries {
        pairs.push((s.clone(), p.test(&[], s)?));
    }
    let mut screen: Vec<ConditionalTest> = singles.iter().map(|(_, t)| t.clone()).collect();
    screen.extend(pairs.iter().map(|(_, t)| t.clone()));
    p.evidence.push(Evidence::Screen { tests: screen });

    let mut shortlist: Vec<(Vec<usize>, f64)> = singles
        .iter()
        .filter(|(_, t)| t.pass)
        .map(|(i, t)| (vec![*i], t.excess))
        .collect();
    for (s, t) in pairs.iter().filter(|(_, t)| t.pass) {
        let single = |i: usize| singles.iter().find(|(j, _)| *j == i).map(|(_, t)| t);
        let (Some(a), Some(b)) = (single(s[0]), single(s[1])) else {
            continue;
        };
        let adjusted = t.excess - a.excess - b.excess;
        let var = t.baseline.sd * t.baseline.sd + a.baseline.sd * a.baseline.sd + b.baseline.sd * b.baseline.sd;
        let sd = libm::sqrt(var);
        let pass = adjusted > cfg.z * sd && adjusted > 0.0;
        p.evidence.push(Evidence::Synergy {
            pair: t.candidate.clone(),
            adjusted_gain: adjusted,
            sd,
            pass,
        });
        if pass {
            shortlist.push((s.clone(), t.excess));
        }
    }
    shortlist.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let truncated: Vec<Vec<usize>> = shortlist.iter().skip(cfg.shortlist_cap).map(|s| s.0.clone()).collect();
    shortlist.truncate(cfg.shortlist_cap);
    for t in &truncated {
        revoked.push(RevokedCandidate {
            candidate: p.names(t),
            reason: "beyond the shortlist cap".into(),
        });
    }
    p.evidence.push(Evidence::Shortlist {
        candidates: shortlist.iter().map(|s| p.names(&s.0)).collect(),
        excess: shortlist.iter().map(|s| s.1).collect(),
        truncated: truncated.iter().map(|s| p.names(s)).collect(),
    });

    let mut units: Vec<Vec<usize>> = Vec::new();
    if let Some((anchor, _)) = shortlist.first() {
        p.evidence.push(Evidence::Anchor { set: p.names(anchor) });
        units.push(anchor.clone());
        let mut model = anchor.clone();

        // MFS-3: grow the model by de-associating on everything selected so far.
        for depth in 1..=cfg.max_depth {
            let mut tests = Vec::new();
            let mut unreliable = Vec::new();
            for &k in all.iter().filter(|k| !model.contains(k)) {
                let mut s = model.clone();
                s.push(k);
                if p.ctx.reliable(&s, cfg.reliability) {
                    tests.push((k, p.test(&model, &[k])?));
                } else {
                    unreliable.push(frame.covariates[k].name.clone());
                }
            }
            let best = pick_best(&tests);
            let action = match best {
                None => StageAction::Stop,
                Some(k) if units.len() == 1 && units[0].len() == 1 => {
                    let ev = p.uniformity(units[0][0], k)?;
                    let uniform = matches!(ev, Evidence::Uniformity { pass: true, .. });
                    p.evidence.push(ev);
                    if uniform {
                        StageAction::Merge
                    } else {
                        StageAction::NewFactor
                    }
                }
                Some(_) => StageAction::NewFactor,
            };
            let mut admitted = Vec::new();
            match (best, action) {
                (Some(k), StageAction::Merge) => admitted.push(k),
                (Some(_), _) => {
                    // every passer of this de-association joins, best first,
                    // while the fused model stays reliable
                    let mut passers: Vec<&(usize, ConditionalTest)> = tests.iter().filter(|(_, t)| t.pass).collect();
                    passers.sort_by(|a, b| b.1.excess.total_cmp(&a.1.excess).then(a.0.cmp(&b.0)));
                    let mut grown = model.clone();
                    for &(j, _) in passers {
                        grown.push(j);
                        if p.ctx.reliable(&grown, cfg.reliability) {
                            admitted.push(j);
                        } else {
                            grown.pop();
                        }
                    }
                }
                (None, _) => {}
            }
            p.evidence.push(Evidence::Stage {
                depth,
                model: p.names(&model),
                tests: tests.into_iter().map(|(_, t)| t).collect(),
                unreliable,
                admitted: admitted.iter().map(|&k| frame.covariates[k].name.clone()).collect(),
                action,
            });
            if admitted.is_empty() {
                break;
            }
            for &k in &admitted {
                if action == StageAction::Merge {
                    units[0].push(k);
                } else {
                    units.push(vec![k]);
                }
                model.push(k);
            }
            model.sort_unstable();
        }

        // MFS-4: drop members that add nothing given all the others.
        let mut round = 0;
        while model.len() >= 2 {
            round += 1;
            let mut tests = Vec::new();
            for &m in &model {
                let rest: Vec<usize> = model.iter().copied().filter(|&x| x != m).collect();
                tests.push((m, p.test(&rest, &[m])?));
            }
            let weakest = tests
                .iter()
                .filter(|(_, t)| !t.pass)
                .fold(None, |w: Option<&(usize, ConditionalTest)>, x| match w {
                    Some(b) if b.1.excess <= x.1.excess => Some(b),
                    _ => Some(x),
                })
                .map(|(m, _)| *m);
            p.evidence.push(Evidence::Revocation {
                round,
                tests: tests.into_iter().map(|(_, t)| t).collect(),
                removed: weakest.map(|m| frame.covariates[m].name.clone()),
            });
            let Some(m) = weakest else { break };
            model.retain(|&x| x != m);
            for u in units.iter_mut() {
                u.retain(|&x| x != m);
            }
            revoked.push(RevokedCandidate {
                candidate: p.names(&[m]),
                reason: "no confirmable gain given the other selected features".into(),
            });
        }
        units.retain(|u| !u.is_empty());
    }
    for u in units.iter_mut() {
        u.sort_unstable();
    }

    for (s, _) in &shortlist {
        if !units.iter().any(|u| s.iter().all(|m| u.contains(m))) {
            let already = revoked.iter().any(|r| r.candidate == p.names(s));
            if !already {
                revoked.push(RevokedCandidate {
                    candidate: p.names(s),
                    reason: "never re-selected after de-association".into(),
                });
            }
        }
    }

    for (i, u) in units.iter().enumerate() {
        let others: Vec<Vec<usize>> = units
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| v.clone())
            .collect();
        p.evidence.push(Evidence::C2 {
            verdict: c2_unreplaceable(frame, u, &others)?,
        });
        if u.len() == 2 {
            let d = decompose_pair(&frame.response, &frame.covariates[u[0]], &frame.covariates[u[1]])?;
            p.evidence.push(Evidence::Decomposition {
                pair: p.names(u),
                decomposition: d,
            });
        }
    }

    let factors = units
        .iter()
        .map(|u| MajorFactor {
            members: p.names(u),
            order: u.len(),
        })
        .collect();
    Ok(MajorFactorReport {
        schema_version: SCHEMA_VERSION.into(),
        response: frame.response.name.clone(),
        covariates: frame.covariate_names(),
        n_rows: frame.n_rows(),
        dropped_rows: frame.dropped_rows,
        config: cfg.clone(),
        seed: cfg.seed,
        c2_reading: C2A_READING.into(),
        factors,
        revoked,
        evidence: p.evidence,
    })
}

/// Fused column of the named covariates.
pub fn fused_set(frame: &CodedFrame, names: &[&str]) -> Result<CodedColumn> {
    let cols = names
        .iter()
        .map(|n| frame.covariate_index(n).map(|i| &frame.covariates[i]))
        .collect::<Result<Vec<_>>>()?;
    fuse(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(y: &[u32], xs: &[&[u32]]) -> CodedFrame {
        let covs = xs
            .iter()
            .enumerate()
            .map(|(i, x)| CodedColumn::from_codes(format!("X{}", i + 1), x, &[]))
            .collect();
        CodedFrame::new(CodedColumn::from_codes("Y", y, &[]), covs).unwrap()
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(
            combinations(&[1, 3, 5, 7], 2),
            vec![vec![1, 3], vec![1, 5], vec![1, 7], vec![3, 5], vec![3, 7], vec![5, 7]]
        );
        assert_eq!(combinations(&[0, 1, 2], 3).len(), 1);
        assert_eq!(binom(22, 3), 1540);
    }

    #[test]
    fn single_covariate_table() {
        let f = frame(&[0, 1, 1, 0, 1, 0], &[&[0, 1, 1, 1, 1, 0]]);
        let t = enumerate_ce(&f, &[0], 1, &EnumConfig::default()).unwrap();
        assert_eq!(t.entries.len(), 1);
        let direct = crate::infotheory::cond_entropy_of(&f.response, &f.covariates[0]).unwrap();
        assert!((t.entries[0].ce - direct).abs() < 1e-12);
        assert!(enumerate_ce(&f, &[0], 2, &EnumConfig::default()).is_err());
    }

    #[test]
    fn beam_mode_kicks_in_over_budget() {
        let n = 200;
        let cols: Vec<Vec<u32>> = (0..6)
            .map(|j| (0..n).map(|i| ((i * (j + 3)) % 4) as u32).collect())
            .collect();
        let refs: Vec<&[u32]> = cols.iter().map(|c| c.as_slice()).collect();
        let y: Vec<u32> = (0..n).map(|i| (i % 3) as u32).collect();
        let f = frame(&y, &refs);
        let cfg = EnumConfig {
            budget: 10,
            beam_width: 2,
            reliability: 10.0,
        };
        let t = enumerate_ce(&f, &[0, 1, 2, 3, 4, 5], 2, &cfg).unwrap();
        assert_eq!(t.mode, EnumMode::Beam { width: 2 });
        assert!(t.entries.len() <= 10);
        let zero = EnumConfig {
            budget: 10,
            beam_width: 0,
            reliability: 10.0,
        };
        assert!(enumerate_ce(&f, &[0, 1, 2, 3, 4, 5], 2, &zero).is_err());
    }

    #[test]
    fn baseline_statistics() {
        let b = NoiseBaseline::from_replicates(1, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!(b.mean, 3.0);
        assert!((b.sd - libm::sqrt(2.5)).abs() < 1e-12);
        assert!((b.q95 - 4.8).abs() < 1e-12);
        assert!(NoiseBaseline::from_replicates(1, vec![1.0]).is_err());
        let flat = NoiseBaseline::from_replicates(1, vec![0.5; 4]).unwrap();
        let v = c1_confirmable(0.6, &flat, 3.0);
        assert!(v.pass && v.margin_sd.is_none());
        assert!(!c1_confirmable(0.5, &flat, 3.0).pass);
    }

    #[test]
    fn within_locality_permutation_keeps_locality_contents() {
        let m = [0u32, 1, 0, 1, 2, 0];
        let c = [5u32, 6, 7, 8, 9, 4];
        let (order, bounds) = localities(&m, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = permute_within(&c, &order, &bounds, &mut rng);
        for loc in 0..3 {
            let mut a: Vec<u32> = (0..6).filter(|&i| m[i] == loc).map(|i| c[i]).collect();
            let mut b: Vec<u32> = (0..6).filter(|&i| m[i] == loc).map(|i| p[i]).collect();
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn config_validation() {
        assert!(ProtocolConfig::default().validate().is_ok());
        let bad = ProtocolConfig {
            replicates: 5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
