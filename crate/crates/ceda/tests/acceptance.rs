//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL/SKIP
//! line; the test fails if any criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use ceda::ingest::{ingest_csv, IngestOptions};
use ceda_core::discretize::BinningConfig;
use ceda_core::infotheory::joint_entropy;
use ceda_core::mfs::{fused_set, EnumConfig, EnumMode};
use ceda_core::odds::{best_triplet_per_locality, majority_rule_table};
use ceda_core::{
    c1_confirmable, c2_unreplaceable, ce_drop, cond_entropy, deassoc_ce, decompose_pair, entropy, enumerate_ce, fuse,
    generate, noise_baseline, run_protocol, shadow_analysis, CodedColumn, CodedFrame, ContingencyTable, Dataset,
    Example, FeatureKind, ProtocolConfig, SimSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 7;
const N_EXAMPLE: usize = 100_000;
const NOISE: [&str; 3] = ["X8", "X9", "X10"];

struct Ledger {
    failed: Vec<String>,
}

impl Ledger {
    fn record(&mut self, id: &str, pass: bool, detail: String) {
        println!("[{}] criterion {id}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id.to_string());
        }
    }

    fn skip(&mut self, id: &str, detail: &str) {
        println!("[SKIP] criterion {id}: {detail}");
    }
}

fn h(counts: impl IntoIterator<Item = u64>) -> f64 {
    let c: Vec<f64> = counts.into_iter().filter(|&c| c > 0).map(|c| c as f64).collect();
    let n: f64 = c.iter().sum();
    -c.iter().map(|&k| (k / n) * (k / n).ln()).sum::<f64>()
}

fn joint_counts(cols: &[&[u32]]) -> HashMap<Vec<u32>, u64> {
    let mut m = HashMap::new();
    for i in 0..cols[0].len() {
        *m.entry(cols.iter().map(|c| c[i]).collect::<Vec<_>>()).or_insert(0) += 1;
    }
    m
}

/// Entropy of the joint variable of `cols`, straight from row tuples.
fn h_of(cols: &[&[u32]]) -> f64 {
    h(joint_counts(cols).into_values())
}

fn column(rng: &mut ChaCha8Rng, name: &str, n: usize) -> CodedColumn {
    let k = rng.random_range(2..=5u32);
    let codes: Vec<u32> = (0..n).map(|_| rng.random_range(0..k)).collect();
    CodedColumn::from_codes(name, &codes, &[])
}

fn identity_suite(l: &mut Ledger) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_901);
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut bump = |k: &'static str, a: f64, b: f64| {
        let e = worst.entry(k).or_insert(0.0);
        *e = e.max((a - b).abs());
    };
    for _ in 0..1000 {
        let n = rng.random_range(20..400);
        let y = column(&mut rng, "y", n);
        let a = column(&mut rng, "a", n);
        let b = column(&mut rng, "b", n);
        let (yc, ac, bc) = (y.codes(), a.codes(), b.codes());
        let t = ContingencyTable::build(&a, &y).unwrap();

        let (ha, hy, hay) = (h_of(&[ac]), h_of(&[yc]), h_of(&[ac, yc]));
        let chain = entropy(t.row_sums()).unwrap() + cond_entropy(&t);
        bump("chain rule", joint_entropy(&t), chain);
        bump("chain rule", joint_entropy(&t), hay);

        let mi_oracle = ha + hy - hay;
        let mi1 = ce_drop(&t);
        let mi2 = entropy(t.row_sums()).unwrap() - cond_entropy(&t.transpose());
        let mi3 = entropy(t.row_sums()).unwrap() + entropy(t.col_sums()).unwrap() - joint_entropy(&t);
        for m in [mi1, mi2, mi3] {
            bump("MI symmetry", m, mi_oracle);
        }

        let d = decompose_pair(&y, &a, &b).unwrap();
        let hb = h_of(&[bc]);
        let i_y_ab = hy + h_of(&[ac, bc]) - h_of(&[yc, ac, bc]);
        let i_y_a = mi_oracle;
        let i_y_b = hy + hb - h_of(&[bc, yc]);
        let i_ab = ha + hb - h_of(&[ac, bc]);
        let i_ab_y = h_of(&[ac, yc]) + h_of(&[bc, yc]) - h_of(&[ac, bc, yc]) - hy;
        bump(
            "decompose_pair",
            d.ce_drop_joint,
            d.ce_drop_a + d.ce_drop_b + d.interaction,
        );
        bump("decompose_pair", d.ce_drop_joint, i_y_ab);
        bump("decompose_pair", d.ce_drop_a, i_y_a);
        bump("decompose_pair", d.ce_drop_b, i_y_b);
        bump("decompose_pair", d.mi_ab, i_ab);
        bump("decompose_pair", d.cmi_ab_given_y, i_ab_y);
        bump("decompose_pair", d.interaction, i_ab_y - i_ab);

        let frame = CodedFrame::new(y.clone(), vec![a.clone(), b.clone()]).unwrap();
        let cond = deassoc_ce(&frame, &["a"], 1, 0, &EnumConfig::default()).unwrap();
        let w = cond.weighted_entry(&["b"]).unwrap().weighted_ce;
        bump("weighted CE partition", w, h_of(&[ac, bc, yc]) - h_of(&[ac, bc]));
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst.values().all(|&e| e <= 1e-10) && secs < 10.0;
    let detail = worst
        .iter()
        .map(|(k, v)| format!("{k} max err {v:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    l.record(
        "1",
        ok,
        format!("1000 random tables: {detail}; {secs:.2} s (limit 1e-10, 10 s)"),
    );
}

fn example_frame(example: Example) -> (Dataset, CodedFrame) {
    let ds = generate(&SimSpec::new(example, N_EXAMPLE, SEED)).unwrap();
    let names: Vec<String> = (1..=10).map(|j| format!("X{j}")).collect();
    let cov: Vec<&str> = names.iter().map(String::as_str).collect();
    let frame = CodedFrame::from_dataset(&ds, &["Y"], &cov, &BinningConfig::default()).unwrap();
    (ds, frame)
}

fn protocol_cfg() -> ProtocolConfig {
    ProtocolConfig {
        seed: SEED,
        ..ProtocolConfig::default()
    }
}

fn set_list(sets: &[&[&str]]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = sets
        .iter()
        .map(|s| {
            let mut v: Vec<String> = s.iter().map(|x| x.to_string()).collect();
            v.sort();
            v
        })
        .collect();
    out.sort();
    out
}

fn example_one(l: &mut Ledger, ds: &Dataset, frame: &CodedFrame) {
    let all: Vec<usize> = (0..frame.covariates.len()).collect();
    let cfg = EnumConfig::default();
    let t1 = enumerate_ce(frame, &all, 1, &cfg).unwrap();
    let order: Vec<&str> = t1.entries.iter().map(|e| e.set.names[0].as_str()).collect();
    let groups: [&[&str]; 6] = [&["X7"], &["X3"], &["X2"], &["X1"], &["X4", "X5", "X6"], &NOISE];
    let mut pos = 0;
    let mut ok = true;
    for g in groups {
        let got: Vec<&str> = order[pos..pos + g.len()].to_vec();
        ok &= g.iter().all(|n| got.contains(n));
        pos += g.len();
    }
    l.record("2a", ok, format!("k=1 order {}", order.join(" < ")));

    let noise: Vec<f64> = NOISE.iter().map(|n| t1.find(&[n]).unwrap().ce).collect();
    let ln12 = 12f64.ln();
    let ok = noise.iter().all(|&c| (2.30..=ln12 + 1e-12).contains(&c));
    l.record("2b", ok, format!("noise CE {noise:.4?} in [2.30, {ln12:.4}]"));

    let t2 = enumerate_ce(frame, &all, 2, &cfg).unwrap();
    let top = &t2.entries[0].set.names;
    let ok = set_list(&[&["X4", "X7"]]) == set_list(&[&top.iter().map(String::as_str).collect::<Vec<_>>()]);
    l.record(
        "2c",
        ok,
        format!("top k=2 set {{{}}} with CE {:.4}", top.join(","), t2.entries[0].ce),
    );

    let x4 = &frame.covariates[frame.covariate_index("X4").unwrap()];
    let x7 = &frame.covariates[frame.covariate_index("X7").unwrap()];
    let d = decompose_pair(&frame.response, x4, x7).unwrap();
    l.record(
        "2d",
        d.interaction < 0.0,
        format!("interaction of (X4, X7) = {:.4}", d.interaction),
    );

    let start = Instant::now();
    let report = run_protocol(ds, &["Y"], &protocol_cfg()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let want = set_list(&[&["X4", "X7"], &["X3"], &["X1"]]);
    let got = report.factor_sets();
    l.record(
        "2e",
        got == want && secs < 300.0,
        format!("protocol factors {got:?} in {secs:.1} s"),
    );
}

fn example_two(l: &mut Ledger) {
    let (ds, frame) = example_frame(Example::Two);
    let all: Vec<usize> = (0..frame.covariates.len()).collect();
    let t3 = enumerate_ce(&frame, &all, 3, &EnumConfig::default()).unwrap();
    let top = t3.entries[0].set.names.join(",");
    l.record("3a", top == "X1,X2,X3", format!("top k=3 set {{{top}}}"));

    let cond = deassoc_ce(&frame, &["X1", "X2", "X3"], 1, 1, &EnumConfig::default()).unwrap();
    let w = |n: &str| cond.weighted_entry(&[n]).unwrap().weighted_ce;
    let x7 = w("X7");
    let noise: Vec<f64> = NOISE.iter().map(|n| w(n)).collect();
    let ok = noise.iter().all(|&c| x7 >= c);
    l.record(
        "3b",
        ok,
        format!("weighted CE after de-associating: X7 {x7:.4} vs noise {noise:.4?}"),
    );

    let start = Instant::now();
    let report = run_protocol(&ds, &["Y"], &protocol_cfg()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let got = report.factor_sets();
    let want = set_list(&[&["X1"], &["X2"], &["X3"]]);
    l.record(
        "3c",
        got == want && secs < 300.0,
        format!("protocol factors {got:?} in {secs:.1} s"),
    );
}

fn shadowing(l: &mut Ledger, frame: &CodedFrame) {
    let cfg = EnumConfig::default();
    let all: Vec<usize> = (0..frame.covariates.len()).collect();
    let s = shadow_analysis(frame, &["X7"], 2, &cfg, SEED).unwrap();
    let (p, q) = (frame.response.counts(), s.shadowed.counts());
    let n = frame.n_rows() as f64;
    let tv = 0.5
        * p.iter()
            .zip(&q)
            .map(|(&a, &b)| (a as f64 - b as f64).abs() / n)
            .sum::<f64>();
    let base1 = enumerate_ce(frame, &all, 1, &cfg).unwrap();
    let base2 = enumerate_ce(frame, &all, 2, &cfg).unwrap();
    let (ce_y, ce_s) = (base1.find(&["X7"]).unwrap().ce, s.tables[0].find(&["X7"]).unwrap().ce);
    let (pair_y, pair_s) = (
        base2.find(&["X4", "X7"]).unwrap().ce,
        s.tables[1].find(&["X4", "X7"]).unwrap().ce,
    );
    l.record(
        "4 (TV)",
        tv <= 0.02,
        format!("marginal TV distance {tv:.4} (limit 0.02)"),
    );
    l.record(
        "4 (CE given A)",
        (ce_s - ce_y).abs() <= 0.05,
        format!("CE[Y*|X7] {ce_s:.4} vs CE[Y|X7] {ce_y:.4} (limit 0.05)"),
    );
    l.record(
        "4 (pair rise)",
        pair_s - pair_y >= 0.15,
        format!(
            "CE of {{X4,X7}}: {pair_y:.4} -> {pair_s:.4}, rise {:.4} (need 0.15)",
            pair_s - pair_y
        ),
    );
}

fn xor(l: &mut Ledger) {
    let ds = generate(&SimSpec::new(Example::Xor, 10_000, SEED)).unwrap();
    let frame = CodedFrame::from_dataset(&ds, &["Y"], &["X1", "X2"], &BinningConfig::default()).unwrap();
    let singles: Vec<f64> = frame
        .covariates
        .iter()
        .map(|c| ce_drop(&ContingencyTable::build(c, &frame.response).unwrap()))
        .collect();
    let joint = ce_drop(
        &ContingencyTable::build(
            &fuse(&[&frame.covariates[0], &frame.covariates[1]]).unwrap(),
            &frame.response,
        )
        .unwrap(),
    );
    l.record(
        "5 (singles)",
        singles.iter().all(|&d| d == 0.0),
        format!("single CE-drops {singles:?}"),
    );
    l.record(
        "5 (joint)",
        (joint - 2f64.ln()).abs() <= 1e-3,
        format!("joint CE-drop {joint:.6} vs ln 2 = {:.6}", 2f64.ln()),
    );
    let c2 = c2_unreplaceable(&frame, &[0, 1], &[]).unwrap();
    l.record("5 (C2)", c2.pass, format!("C2 on {{X1,X2}} pass = {}", c2.pass));
    let cfg = protocol_cfg();
    let c1 = |set: &[usize], drop: f64| {
        let base = noise_baseline(&frame, set, cfg.replicates, SEED).unwrap();
        c1_confirmable(drop, &base, cfg.z)
    };
    let pair = c1(&[0, 1], joint);
    let single: Vec<bool> = (0..2).map(|i| c1(&[i], singles[i]).pass).collect();
    l.record(
        "5 (C1)",
        pair.pass && single.iter().all(|p| !p),
        format!(
            "C1 pair pass = {} (threshold {:.2e}); singles pass = {single:?}",
            pair.pass, pair.threshold
        ),
    );
}

fn heart_disease_table(l: &mut Ledger) {
    let counts = vec![
        vec![99044, 2876],
        vec![39842, 3089],
        vec![39905, 4264],
        vec![50996, 13664],
    ];
    let t = ContingencyTable::from_counts(&counts).unwrap();
    let printed = [[0.972, 0.028], [0.929, 0.071], [0.904, 0.096], [0.733, 0.267]];
    let props = t.row_proportions();
    let cs = t.col_sums();
    let total = t.total() as f64;
    let csum = [cs[0] as f64 / total, cs[1] as f64 / total];
    let near = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-3);
    let bad: Vec<usize> = (0..4).filter(|&r| !near(&props[r], &printed[r])).collect();
    let ok = bad.is_empty() && near(&csum, &[0.906, 0.094]);
    let shown: Vec<String> = props.iter().map(|p| format!("({:.4}, {:.4})", p[0], p[1])).collect();
    l.record(
        "6 (prob-vectors)",
        ok,
        format!(
            "rows {shown:?}, column sums ({:.4}, {:.4}); rows off by more than 1e-3: {bad:?}",
            csum[0], csum[1]
        ),
    );

    // marginal tables: HiChol from rows (0-1, 1-1) vs (0-0, 1-0); HiBP from rows (1-0, 1-1) vs (0-0, 0-1)
    let merge = |a: usize, b: usize| vec![counts[a][0] + counts[b][0], counts[a][1] + counts[b][1]];
    let chol = ContingencyTable::from_counts(&[merge(0, 2), merge(1, 3)]).unwrap();
    let bp = ContingencyTable::from_counts(&[merge(0, 1), merge(2, 3)]).unwrap();
    let or_chol = chol.odds_ratio(1, 0).unwrap();
    let or_bp = bp.odds_ratio(1, 0).unwrap();
    let oracle_chol = (16753.0 / 90838.0) / (7140.0 / 138949.0);
    let oracle_bp = (17928.0 / 90901.0) / (5965.0 / 138886.0);
    l.record(
        "6 (HiChol odds-ratio)",
        (or_chol - 3.59).abs() <= 0.05 && (or_chol - oracle_chol).abs() < 1e-12,
        format!("{or_chol:.4} (band 3.59 +/- 0.05; direct ratio {oracle_chol:.4})"),
    );
    l.record(
        "6 (HiBP odds-ratio)",
        (or_bp - 4.5).abs() <= 0.05 && (or_bp - oracle_bp).abs() < 1e-12,
        format!("{or_bp:.4} (band 4.5 +/- 0.05; direct ratio {oracle_bp:.4})"),
    );
    let m = majority_rule_table(&t).unwrap();
    l.record(
        "6 (blind rule)",
        (m.blind_accuracy - 0.9058).abs() <= 0.0005,
        format!("blind-rule accuracy {:.5} (band 0.9058 +/- 0.0005)", m.blind_accuracy),
    );
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

fn determinism(l: &mut Ledger) {
    let bin = env!("CARGO_BIN_EXE_ceda");
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("ex1.csv");
    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    run(&[
        "simulate",
        "--example",
        "1",
        "--n",
        "100000",
        "--seed",
        "7",
        "--out",
        data.to_str().unwrap(),
    ]);
    let mut bundles = Vec::new();
    for t in [1, 4, 8] {
        let out: PathBuf = tmp.path().join(format!("report_t{t}"));
        let threads = t.to_string();
        run(&[
            "--threads",
            &threads,
            "select",
            "--data",
            data.to_str().unwrap(),
            "--response",
            "Y",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        bundles.push(read_dir(&out));
    }
    let ok = !bundles[0].is_empty() && bundles.iter().all(|b| *b == bundles[0]);
    let files: Vec<&String> = bundles[0].keys().collect();
    l.record(
        "7",
        ok,
        format!(
            "select with threads 1/4/8: {} files {files:?} identical = {ok}",
            files.len()
        ),
    );
}

fn performance(l: &mut Ledger) {
    let (n, k) = (250_000usize, 22usize);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let xs: Vec<Vec<u32>> = (0..k)
        .map(|_| (0..n).map(|_| rng.random_range(0..12u32)).collect())
        .collect();
    let y: Vec<u32> = (0..n)
        .map(|i| (xs[0][i] + xs[1][i] + rng.random_range(0..3u32)) % 12)
        .collect();
    let covs: Vec<CodedColumn> = xs
        .iter()
        .enumerate()
        .map(|(j, c)| CodedColumn::from_codes(format!("V{}", j + 1), c, &[]))
        .collect();
    let frame = CodedFrame::new(CodedColumn::from_codes("Y", &y, &[]), covs).unwrap();
    let all: Vec<usize> = (0..k).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let start = Instant::now();
    let tables = pool.install(|| {
        (1..=3)
            .map(|kk| enumerate_ce(&frame, &all, kk, &EnumConfig::default()).unwrap())
            .collect::<Vec<_>>()
    });
    let secs = start.elapsed().as_secs_f64();
    let sizes: Vec<usize> = tables.iter().map(|t| t.entries.len()).collect();
    let exhaustive = tables.iter().all(|t| t.mode == EnumMode::Exhaustive);
    let cores = std::thread::available_parallelism().map(|c| c.get()).unwrap_or(1);
    l.record(
        "8",
        sizes == [22, 231, 1540] && exhaustive && secs < 60.0,
        format!("{sizes:?} subsets at N = {n} in {secs:.1} s with 8 workers on {cores} core(s) (limit 60 s)"),
    );
}

/// Published best triplets, rows GenHlth 1..5 by Age 1..13; letters name binary features.
const PUBLISHED_TRIPLETS: [[&str; 13]; 5] = [
    [
        "FSV", "FSV", "DSV", "BSV", "FOW", "CDF", "CDS", "BDS", "BWX", "CDS", "BDS", "BCX", "BFX",
    ],
    [
        "BFO", "BFS", "BCF", "CSX", "BDO", "BSX", "BCD", "BCD", "BCX", "CSX", "BCX", "CSX", "CSX",
    ],
    [
        "OSX", "BOS", "BCS", "BOS", "CSW", "BCS", "BCS", "BCS", "BCS", "CSX", "CSX", "CSX", "CSX",
    ],
    [
        "NA", "NA", "BOS", "BOS", "BDW", "BCS", "BCS", "BCS", "CSX", "CSX", "CSX", "CSX", "CSX",
    ],
    [
        "NA", "NA", "NA", "NA", "NA", "CDO", "BOS", "DSX", "BDS", "DOS", "DSX", "BDS", "BDS",
    ],
];

const LETTERS: [(char, &str); 9] = [
    ('B', "HighBP"),
    ('C', "HighChol"),
    ('S', "Stroke"),
    ('D', "Diabetes"),
    ('X', "Sex"),
    ('O', "Smoker"),
    ('W', "DiffWalk"),
    ('F', "Fruits"),
    ('V', "Veggies"),
];

fn brfss(l: &mut Ledger) {
    let Some(path) = std::env::var_os("CEDA_BRFSS_CSV") else {
        l.skip(
            "9",
            "set CEDA_BRFSS_CSV to the heart disease health indicators CSV to run",
        );
        return;
    };
    let path = PathBuf::from(path);
    let header = csv::Reader::from_path(&path).unwrap().headers().unwrap().clone();
    let kinds = header
        .iter()
        .map(|h| (h.to_string(), FeatureKind::Categorical))
        .collect();
    let ds = ingest_csv(
        &path,
        &["HeartDiseaseorAttack"],
        &IngestOptions {
            kinds,
            drop_missing: true,
        },
    )
    .unwrap();
    let mut merge = BTreeMap::new();
    merge.insert("1.0".to_string(), "2.0".to_string());
    merge.insert("1".to_string(), "2".to_string());
    let ds = ds.recode("Diabetes", &merge).unwrap();
    let names: Vec<String> = header
        .iter()
        .filter(|h| *h != "HeartDiseaseorAttack")
        .map(String::from)
        .collect();
    let cov: Vec<&str> = names.iter().map(String::as_str).collect();
    let frame = CodedFrame::from_dataset(&ds, &["HeartDiseaseorAttack"], &cov, &BinningConfig::default()).unwrap();

    let t = ContingencyTable::build(&fused_set(&frame, &["HighBP", "HighChol"]).unwrap(), &frame.response).unwrap();
    let want: Vec<u64> = vec![99044, 2876, 39842, 3089, 39905, 4264, 50996, 13664];
    l.record(
        "9 (HighBP-HighChol counts)",
        t.counts() == want.as_slice(),
        format!("counts {:?}", t.counts()),
    );

    let binary: Vec<&CodedColumn> = frame.covariates.iter().filter(|c| c.n_cats() == 2).collect();
    let age = &frame.covariates[frame.covariate_index("Age").unwrap()];
    let gen = &frame.covariates[frame.covariate_index("GenHlth").unwrap()];
    let choices = best_triplet_per_locality(&frame.response, &[age, gen], &binary, 500).unwrap();
    let letter = |name: &str| LETTERS.iter().find(|(_, n)| *n == name).map(|(c, _)| *c).unwrap_or('?');
    let (mut hit, mut total) = (0, 0);
    for c in &choices {
        let mut parts = c.locality.split('-').map(|s| s.parse::<f64>().unwrap() as usize);
        let (a, g) = (parts.next().unwrap(), parts.next().unwrap());
        let printed = PUBLISHED_TRIPLETS[g - 1][a - 1];
        if printed == "NA" {
            continue;
        }
        total += 1;
        if let Some(tr) = &c.triplet {
            let mut got: Vec<char> = tr.iter().map(|n| letter(n)).collect();
            let mut exp: Vec<char> = printed.chars().collect();
            got.sort();
            exp.sort();
            hit += usize::from(got == exp);
        }
    }
    let frac = hit as f64 / total.max(1) as f64;
    l.record(
        "9 (locality triplets)",
        frac >= 0.8,
        format!("{hit}/{total} non-NA triplets match ({frac:.3})"),
    );
}

#[test]
fn acceptance() {
    println!();
    let mut l = Ledger { failed: Vec::new() };
    identity_suite(&mut l);
    let (ds, frame) = example_frame(Example::One);
    example_one(&mut l, &ds, &frame);
    example_two(&mut l);
    shadowing(&mut l, &frame);
    xor(&mut l);
    heart_disease_table(&mut l);
    determinism(&mut l);
    performance(&mut l);
    brfss(&mut l);
    assert!(l.failed.is_empty(), "failed criteria: {:?}", l.failed);
}
