//! Command-line orchestration: level-file persistence, verification modes,
//! and the seed/census classification pipeline with resumable, deterministic
//! worker fan-out.
//!
//! Three subcommands cover the pipelines:
//!
//! * `count` — builds the labeled-count levels 0..n−1 (two levels live at a
//!   time), writes one level file per k, and prints LF(K_n).
//! * `verify` — re-reads finished level files and re-derives their content
//!   three independent ways (`dgm`, `mitm`, `table`).
//! * `classify` — seed classification (`--mode seeds`) or the full symmetric
//!   census (`--mode full`), split into work units that any number of
//!   workers can process independently; every unit's outcome is written
//!   atomically, so interrupted runs resume exactly where they stopped.
//!
//! All binary values in level files are little-endian; every report is plain
//! text with decimal integers. Exit code 0 means every requested check
//! passed.

use crate::autotypes::{admissible_types, AutType};
use crate::census::{census_from_symmetric, double_count};
use crate::extender::{
    aut_order_tally, build_cover_instance, extend_seed_unit, SymmetricCensus, SymmetricClass,
    TypeOutcome,
};
use crate::gdd::Factorization;
use crate::labelcount::{
    forward_accumulate_level, verify_dgm_level, verify_mitm, ClassRecord, LevelStore,
};
use crate::perm::Perm;
use crate::seedgen::{classify_seeds, fix_group_representative, seed_class_from_parts, seed_m_value, SeedClass, SeedSet};
use crate::{factorial, BigCount};
use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

type Res<T> = Result<T, String>;

fn ctx<E: std::fmt::Display>(what: &str, e: E) -> String {
    format!("{what}: {e}")
}

// ============================================================================
// Argument surface
// ============================================================================

#[derive(Parser)]
#[command(
    name = "onefact",
    about = "Census engine for one-factorizations of complete graphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Count labeled one-factorizations level by level; write level files.
    Count {
        /// Even order of the complete graph, 2..=14.
        #[arg(long)]
        n: usize,
        /// Directory for level files (created if missing).
        #[arg(long)]
        levels_dir: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Re-derive and cross-check finished level files.
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        levels_dir: PathBuf,
        /// dgm: per-class deletion recursion; mitm: complement pairing,
        /// one value per k, all equal; table: distinct labeled
        /// factorizations per level.
        #[arg(long)]
        mode: VerifyMode,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Classify seeds, or run the full symmetric census.
    Classify {
        #[arg(long)]
        n: usize,
        /// Directory for seed list files.
        #[arg(long)]
        seeds_dir: PathBuf,
        /// Directory for work-unit outcomes and the census report
        /// (required for --mode full).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Restrict to one automorphism type, as "p,fU,fV".
        #[arg(long = "type")]
        type_filter: Option<String>,
        /// Split each seed's search into units at this decision depth
        /// (0 = one unit per seed).
        #[arg(long, default_value_t = 0)]
        split_depth: usize,
        /// This worker's share, as "i/m" (0-based); units are dealt
        /// round-robin.
        #[arg(long, default_value = "0/1")]
        worker: String,
        /// seeds: classify and list seeds only; full: complete every seed
        /// and assemble the census.
        #[arg(long, default_value = "seeds")]
        mode: ClassifyMode,
        /// Level files to take LF(K_n) from for the final census equation.
        #[arg(long)]
        levels_dir: Option<PathBuf>,
        /// LF(K_n) as a decimal literal (alternative to --levels-dir).
        #[arg(long)]
        labeled: Option<String>,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyMode {
    Dgm,
    Mitm,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifyMode {
    Seeds,
    Full,
}

/// CLI entry point.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Count {
            n,
            levels_dir,
            threads,
        } => init_threads(threads).and_then(|()| cmd_count(n, &levels_dir)),
        Cmd::Verify {
            n,
            levels_dir,
            mode,
            threads,
        } => init_threads(threads).and_then(|()| cmd_verify(n, &levels_dir, mode)),
        Cmd::Classify {
            n,
            seeds_dir,
            out_dir,
            type_filter,
            split_depth,
            worker,
            mode,
            levels_dir,
            labeled,
            threads,
        } => init_threads(threads).and_then(|()| {
            cmd_classify(ClassifyArgs {
                n,
                seeds_dir,
                out_dir,
                type_filter,
                split_depth,
                worker,
                mode,
                levels_dir,
                labeled,
            })
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn init_threads(threads: usize) -> Res<()> {
    if threads == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| ctx("thread pool", e))
}

fn check_n(n: usize) -> Res<()> {
    if n % 2 == 0 && (2..=14).contains(&n) {
        Ok(())
    } else {
        Err(format!("n must be even and between 2 and 14, got {n}"))
    }
}

// ============================================================================
// Level files
// ============================================================================

const LEVEL_MAGIC: &[u8; 4] = b"OF1L";
const LEVEL_VERSION: u16 = 1;

fn level_path(dir: &Path, n: usize, k: usize) -> PathBuf {
    dir.join(format!("level_n{n:02}_k{k:02}.of1l"))
}

/// Serializes a finalized level: header, then records sorted ascending by
/// canonical form, each `[16-byte form][u8 length][little-endian value]`.
fn level_bytes(store: &LevelStore) -> Vec<u8> {
    assert!(store.is_finalized());
    let records = store.records_sorted();
    let mut out = Vec::with_capacity(16 + records.len() * 24);
    out.extend_from_slice(LEVEL_MAGIC);
    out.extend_from_slice(&LEVEL_VERSION.to_le_bytes());
    out.push(store.n() as u8);
    out.push(store.k() as u8);
    out.extend_from_slice(&(records.len() as u64).to_le_bytes());
    for rec in &records {
        out.extend_from_slice(&rec.canonical_form);
        let bytes = rec.accumulator.to_bytes_le();
        assert!(bytes.len() <= u8::MAX as usize, "value out of format range");
        out.push(bytes.len() as u8);
        out.extend_from_slice(&bytes);
    }
    out
}

fn write_level(dir: &Path, store: &LevelStore) -> Res<PathBuf> {
    let path = level_path(dir, store.n(), store.k());
    let bytes = level_bytes(store);
    let checksum = fnv64(&bytes);
    write_atomic(&path, &bytes)?;
    append_manifest(
        dir,
        store.n(),
        "count",
        &unit_name_for_level(store.n(), store.k()),
        checksum,
    )?;
    Ok(path)
}

fn unit_name_for_level(n: usize, k: usize) -> String {
    format!("level_n{n:02}_k{k:02}")
}

/// Reads and fully validates one level file: header fields, strictly
/// ascending forms, minimal value encodings, exact length — then recomputes
/// every automorphism-group order, which also confirms each form is a
/// canonical fixed point.
fn read_level(dir: &Path, n: usize, k: usize) -> Res<LevelStore> {
    let path = level_path(dir, n, k);
    let bytes = fs::read(&path).map_err(|e| ctx(&path.display().to_string(), e))?;
    if let Some(expected) = manifest_checksum(dir, &unit_name_for_level(n, k))? {
        let actual = fnv64(&bytes);
        if actual != expected {
            return Err(format!(
                "{}: checksum mismatch (manifest {expected:016x}, file {actual:016x})",
                path.display()
            ));
        }
    }
    let header_err = || format!("{}: malformed header", path.display());
    if bytes.len() < 16 || &bytes[0..4] != LEVEL_MAGIC {
        return Err(header_err());
    }
    if u16::from_le_bytes([bytes[4], bytes[5]]) != LEVEL_VERSION {
        return Err(format!("{}: unsupported version", path.display()));
    }
    if bytes[6] as usize != n || bytes[7] as usize != k {
        return Err(format!("{}: wrong n or k in header", path.display()));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    let mut records = Vec::with_capacity(count);
    let mut at = 16usize;
    let mut prev: Option<u128> = None;
    for _ in 0..count {
        if bytes.len() < at + 17 {
            return Err(format!("{}: truncated record", path.display()));
        }
        let form: [u8; 16] = bytes[at..at + 16].try_into().unwrap();
        let len = bytes[at + 16] as usize;
        at += 17;
        if bytes.len() < at + len || len == 0 {
            return Err(format!("{}: truncated value", path.display()));
        }
        let value_bytes = &bytes[at..at + len];
        if len > 1 && value_bytes[len - 1] == 0 {
            return Err(format!("{}: non-minimal value encoding", path.display()));
        }
        at += len;
        let key = u128::from_le_bytes(form);
        if prev.is_some_and(|p| p >= key) {
            return Err(format!("{}: records out of order", path.display()));
        }
        prev = Some(key);
        records.push(ClassRecord {
            canonical_form: form,
            accumulator: BigCount::from_bytes_le(value_bytes),
            aut_order: BigCount::zero(),
        });
    }
    if at != bytes.len() {
        return Err(format!("{}: trailing bytes", path.display()));
    }
    // Restore the cached group orders; the canonical-fixed-point assertion
    // doubles as a deep structural check on every form.
    use rayon::prelude::*;
    let records: Vec<ClassRecord> = records
        .into_par_iter()
        .map_init(crate::canon::Canonizer::new, |cz, mut rec| {
            let g = crate::graphcore::DenseGraph::from_edge_mask(
                n,
                u128::from_le_bytes(rec.canonical_form),
            );
            let r = cz.dense_result(&g);
            assert_eq!(
                r.canonical_form[..16],
                rec.canonical_form,
                "level record is not a canonical form"
            );
            rec.aut_order = r.aut_order;
            rec
        })
        .collect();
    Ok(LevelStore::from_records(n, k, records))
}

// ============================================================================
// Run manifest
// ============================================================================

/// Appends one completion line to the append-only run manifest. Each line
/// records the run id, order, pipeline stage, finished unit, and the
/// checksum of the unit's output file.
fn append_manifest(dir: &Path, n: usize, stage: &str, unit: &str, checksum: u64) -> Res<()> {
    let path = dir.join("manifest.jsonl");
    let line = serde_json::json!({
        "run": run_id(),
        "n": n,
        "stage": stage,
        "unit": unit,
        "checksum": format!("{checksum:016x}"),
    });
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(|e| ctx("manifest", e))?;
    writeln!(f, "{line}").map_err(|e| ctx("manifest", e))
}

/// Latest recorded checksum for a unit, if the manifest mentions it.
fn manifest_checksum(dir: &Path, unit: &str) -> Res<Option<u64>> {
    let path = dir.join("manifest.jsonl");
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(ctx("manifest", e)),
    };
    let mut found = None;
    for line in text.lines() {
        let v: serde_json::Value =
            serde_json::from_str(line).map_err(|e| ctx("manifest line", e))?;
        if v["unit"].as_str() == Some(unit) {
            let hex = v["checksum"]
                .as_str()
                .ok_or_else(|| "manifest line without checksum".to_string())?;
            found =
                Some(u64::from_str_radix(hex, 16).map_err(|e| ctx("manifest checksum", e))?);
        }
    }
    Ok(found)
}

fn run_id() -> String {
    let t = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("{t}-{}", std::process::id())
}

fn fnv64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Res<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| ctx(&parent.display().to_string(), e))?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| ctx(&tmp.display().to_string(), e))?;
    fs::rename(&tmp, path).map_err(|e| ctx(&path.display().to_string(), e))
}

// ============================================================================
// count
// ============================================================================

fn cmd_count(n: usize, levels_dir: &Path) -> Res<()> {
    check_n(n)?;
    fs::create_dir_all(levels_dir).map_err(|e| ctx(&levels_dir.display().to_string(), e))?;
    let mut level = LevelStore::base(n);
    println!("level 0: {} classes", level.len());
    write_level(levels_dir, &level)?;
    for _k in 1..n {
        let next = forward_accumulate_level(&level);
        println!("level {}: {} classes", next.k(), next.len());
        write_level(levels_dir, &next)?;
        level = next;
    }
    let records = level.records_sorted();
    if records.len() != 1 {
        return Err(format!(
            "level {} should hold exactly the complete graph, found {} classes",
            n - 1,
            records.len()
        ));
    }
    println!("LF(K_{n}) = {}", records[0].accumulator);
    Ok(())
}

// ============================================================================
// verify
// ============================================================================

fn cmd_verify(n: usize, levels_dir: &Path, mode: VerifyMode) -> Res<()> {
    check_n(n)?;
    match mode {
        VerifyMode::Dgm => {
            let mut prev = read_level(levels_dir, n, 0)?;
            for k in 1..n {
                let cur = read_level(levels_dir, n, k)?;
                if !verify_dgm_level(&cur, &prev) {
                    return Err(format!("deletion recursion failed at k = {k}"));
                }
                println!("dgm k={k}: ok ({} classes)", cur.len());
                prev = cur;
            }
            println!("all levels verified");
        }
        VerifyMode::Mitm => {
            let levels: Vec<LevelStore> = (0..n)
                .map(|k| read_level(levels_dir, n, k))
                .collect::<Res<_>>()?;
            let mut value: Option<BigCount> = None;
            for k in 0..n {
                let v = verify_mitm(n, k, &levels);
                println!("mitm k={k}: {v}");
                match &value {
                    None => value = Some(v),
                    Some(prev) if *prev != v => {
                        return Err(format!("pairing identity differs at k = {k}"))
                    }
                    _ => {}
                }
            }
            println!("all {n} values equal");
        }
        VerifyMode::Table => {
            let nfact = factorial(n as u64);
            for k in 0..n {
                let level = read_level(levels_dir, n, k)?;
                let total = level
                    .records_sorted()
                    .iter()
                    .map(|rec| &nfact / &rec.aut_order * &rec.accumulator)
                    .fold(BigCount::zero(), |a, b| a + b);
                println!("k={k}: {total}");
            }
        }
    }
    Ok(())
}

// ============================================================================
// classify: seed files
// ============================================================================

fn parse_type_filter(n: usize, filter: &Option<String>) -> Res<Vec<AutType>> {
    let all = admissible_types(n);
    match filter {
        None => Ok(all),
        Some(s) => {
            let parts: Vec<usize> = s
                .split(',')
                .map(|x| x.trim().parse().map_err(|e| ctx("--type", e)))
                .collect::<Res<_>>()?;
            if parts.len() != 3 {
                return Err("--type expects p,fU,fV".into());
            }
            let found: Vec<AutType> = all
                .into_iter()
                .filter(|t| (t.p, t.f_u, t.f_v) == (parts[0], parts[1], parts[2]))
                .collect();
            if found.is_empty() {
                return Err(format!("({},{},{}) is not an admissible type", parts[0], parts[1], parts[2]));
            }
            Ok(found)
        }
    }
}

fn type_tag(t: &AutType) -> String {
    format!("t{}-{}-{}", t.p, t.f_u, t.f_v)
}

fn seeds_path(dir: &Path, n: usize, t: &AutType) -> PathBuf {
    dir.join(format!("seeds_n{n:02}_{}.txt", type_tag(t)))
}

/// Seed list format: a text header (order, type triple, the generator
/// permutation as images, record count), then one `seed` line per class
/// with its stabilizer order, anchors, and sorted blocks.
fn seeds_file_text(set: &SeedSet) -> String {
    let t = &set.aut_type;
    let mut out = String::new();
    writeln!(out, "onefact seeds v1").unwrap();
    writeln!(out, "n {}", set.n).unwrap();
    writeln!(out, "type {} {} {}", t.p, t.f_u, t.f_v).unwrap();
    let images: Vec<String> = set.pi.images().iter().map(|x| x.to_string()).collect();
    writeln!(out, "pi {}", images.join(" ")).unwrap();
    writeln!(out, "count {}", set.classes.len()).unwrap();
    for (i, class) in set.classes.iter().enumerate() {
        let anchors: Vec<String> = class.anchors.iter().map(|a| a.to_string()).collect();
        let blocks: Vec<String> = class
            .blocks
            .iter()
            .map(|b| format!("{}-{}-{}", b[0], b[1], b[2]))
            .collect();
        writeln!(
            out,
            "seed {i} aut {} anchors {} blocks {}",
            class.aut_order,
            anchors.join(","),
            blocks.join(";")
        )
        .unwrap();
    }
    out
}

/// Parses a seed list file. Stabilizer generators are not stored; they are
/// rebuilt per seed when a work unit needs them.
fn read_seeds_file(dir: &Path, n: usize, t: &AutType) -> Res<SeedSet> {
    let path = seeds_path(dir, n, t);
    let text = fs::read_to_string(&path).map_err(|e| ctx(&path.display().to_string(), e))?;
    let mut lines = text.lines();
    let bad = |what: &str| format!("{}: {what}", path.display());
    if lines.next() != Some("onefact seeds v1") {
        return Err(bad("not a seed list"));
    }
    let expect = |lines: &mut std::str::Lines, prefix: &str| -> Res<String> {
        let line = lines.next().ok_or_else(|| bad("truncated header"))?;
        line.strip_prefix(prefix)
            .map(|r| r.trim().to_string())
            .ok_or_else(|| bad(&format!("expected `{prefix}` line")))
    };
    if expect(&mut lines, "n ")?.parse::<usize>().map_err(|e| ctx("n", e))? != n {
        return Err(bad("wrong order"));
    }
    let triple = expect(&mut lines, "type ")?;
    if triple != format!("{} {} {}", t.p, t.f_u, t.f_v) {
        return Err(bad("wrong type"));
    }
    let pi_images: Vec<u8> = expect(&mut lines, "pi ")?
        .split_whitespace()
        .map(|x| x.parse().map_err(|e| ctx("pi", e)))
        .collect::<Res<_>>()?;
    let pi = Perm::from_images(pi_images);
    if pi != fix_group_representative(n, t) {
        return Err(bad("generator is not the fixed representative"));
    }
    let count: usize = expect(&mut lines, "count ")?.parse().map_err(|e| ctx("count", e))?;
    let mut classes = Vec::with_capacity(count);
    for i in 0..count {
        let line = lines.next().ok_or_else(|| bad("truncated records"))?;
        let rest = line
            .strip_prefix(&format!("seed {i} aut "))
            .ok_or_else(|| bad(&format!("bad record {i}")))?;
        let (aut, rest) = rest
            .split_once(" anchors ")
            .ok_or_else(|| bad("missing anchors"))?;
        let (anchors, blocks) = rest
            .split_once(" blocks ")
            .ok_or_else(|| bad("missing blocks"))?;
        let aut_order: BigCount = aut.parse().map_err(|e| ctx("aut", e))?;
        let anchors: Vec<u8> = anchors
            .split(',')
            .map(|x| x.parse().map_err(|e| ctx("anchor", e)))
            .collect::<Res<_>>()?;
        let blocks: Vec<[u8; 3]> = blocks
            .split(';')
            .map(|b| -> Res<[u8; 3]> {
                let xs: Vec<u8> = b
                    .split('-')
                    .map(|x| x.parse().map_err(|e| ctx("block", e)))
                    .collect::<Res<_>>()?;
                xs.try_into().map_err(|_| "block is not a triple".to_string())
            })
            .collect::<Res<_>>()?;
        classes.push(SeedClass {
            anchors,
            blocks,
            canonical_key: Vec::new(),
            aut_order,
            aut_generators: Vec::new(),
        });
    }
    if lines.next().is_some() {
        return Err(bad("trailing lines"));
    }
    Ok(SeedSet {
        n,
        aut_type: *t,
        pi,
        classes,
    })
}

/// Loads a type's seed list, classifying and writing it first if absent.
/// Classification is deterministic, so concurrent workers that race here
/// produce byte-identical files and the atomic rename makes either fine.
fn ensure_seeds(dir: &Path, n: usize, t: &AutType) -> Res<SeedSet> {
    if seeds_path(dir, n, t).exists() {
        return read_seeds_file(dir, n, t);
    }
    let set = classify_seeds(n, t);
    let text = seeds_file_text(&set);
    write_atomic(&seeds_path(dir, n, t), text.as_bytes())?;
    append_manifest(
        dir,
        n,
        "seeds",
        &format!("seeds_{}", type_tag(t)),
        fnv64(text.as_bytes()),
    )?;
    Ok(set)
}

// ============================================================================
// classify: work units and outcomes
// ============================================================================

struct ClassifyArgs {
    n: usize,
    seeds_dir: PathBuf,
    out_dir: Option<PathBuf>,
    type_filter: Option<String>,
    split_depth: usize,
    worker: String,
    mode: ClassifyMode,
    levels_dir: Option<PathBuf>,
    labeled: Option<String>,
}

fn parse_worker(s: &str) -> Res<(usize, usize)> {
    let (i, m) = s
        .split_once('/')
        .ok_or_else(|| "--worker expects i/m".to_string())?;
    let i: usize = i.parse().map_err(|e| ctx("worker index", e))?;
    let m: usize = m.parse().map_err(|e| ctx("worker count", e))?;
    if m == 0 || i >= m {
        return Err("--worker index must be below the worker count".into());
    }
    Ok((i, m))
}

/// One schedulable unit: a seed, optionally narrowed to a decision prefix of
/// its exact-cover search.
struct WorkUnit {
    t: AutType,
    seed_index: usize,
    unit_index: usize,
    prefix: Option<Vec<u32>>,
}

fn unit_name(n: usize, u: &WorkUnit) -> String {
    format!(
        "n{n:02}_{}_s{:05}_u{:06}",
        type_tag(&u.t),
        u.seed_index,
        u.unit_index
    )
}

/// Enumerates every unit of the run in a deterministic global order:
/// admissible types ascending, seeds in classified order, prefixes in
/// search order.
fn enumerate_units(n: usize, sets: &[SeedSet], split_depth: usize) -> Vec<WorkUnit> {
    let mut units = Vec::new();
    for set in sets {
        for (seed_index, seed) in set.classes.iter().enumerate() {
            if split_depth == 0 {
                units.push(WorkUnit {
                    t: set.aut_type,
                    seed_index,
                    unit_index: 0,
                    prefix: None,
                });
            } else {
                let instance = build_cover_instance(n, &set.pi, &seed.blocks);
                for (unit_index, prefix) in instance.split(split_depth).into_iter().enumerate() {
                    units.push(WorkUnit {
                        t: set.aut_type,
                        seed_index,
                        unit_index,
                        prefix: Some(prefix),
                    });
                }
            }
        }
    }
    units
}

/// Text form of one unit outcome: the solution count and every accepted
/// class (canonical form, group order, subgroup tallies, representative
/// blocks — enough to rebuild the class record exactly).
fn outcome_text(name: &str, solutions: u64, accepted: &[SymmetricClass]) -> String {
    let mut out = String::new();
    writeln!(out, "unit {name}").unwrap();
    writeln!(out, "solutions {solutions}").unwrap();
    for class in accepted {
        let form: String = class.canonical_form.iter().map(|b| format!("{b:02x}")).collect();
        let subgroups: Vec<String> = class
            .subgroup_counts
            .iter()
            .map(|((p, fu, fv), c)| format!("{p},{fu},{fv}:{c}"))
            .collect();
        let blocks: Vec<String> = class
            .representative
            .blocks()
            .iter()
            .map(|b| format!("{}-{}-{}", b[0], b[1], b[2]))
            .collect();
        writeln!(
            out,
            "accepted form {form} aut {} subgroups {} blocks {}",
            class.aut_order,
            subgroups.join(";"),
            blocks.join(";")
        )
        .unwrap();
    }
    out
}

fn parse_outcome(n: usize, path: &Path) -> Res<(u64, Vec<SymmetricClass>)> {
    let text = fs::read_to_string(path).map_err(|e| ctx(&path.display().to_string(), e))?;
    let bad = |what: &str| format!("{}: {what}", path.display());
    let mut lines = text.lines();
    lines.next().filter(|l| l.starts_with("unit ")).ok_or_else(|| bad("missing unit line"))?;
    let solutions: u64 = lines
        .next()
        .and_then(|l| l.strip_prefix("solutions "))
        .ok_or_else(|| bad("missing solutions line"))?
        .parse()
        .map_err(|e| ctx("solutions", e))?;
    let mut accepted = Vec::new();
    for line in lines {
        let rest = line
            .strip_prefix("accepted form ")
            .ok_or_else(|| bad("unexpected line"))?;
        let (form_hex, rest) = rest.split_once(" aut ").ok_or_else(|| bad("missing aut"))?;
        let (aut, rest) = rest
            .split_once(" subgroups ")
            .ok_or_else(|| bad("missing subgroups"))?;
        let (subgroups, blocks) = rest
            .split_once(" blocks ")
            .ok_or_else(|| bad("missing blocks"))?;
        if form_hex.len() % 2 != 0 {
            return Err(bad("odd form length"));
        }
        let canonical_form: Vec<u8> = (0..form_hex.len() / 2)
            .map(|i| u8::from_str_radix(&form_hex[2 * i..2 * i + 2], 16).map_err(|e| ctx("form", e)))
            .collect::<Res<_>>()?;
        let aut_order: BigCount = aut.parse().map_err(|e| ctx("aut", e))?;
        let mut subgroup_counts = BTreeMap::new();
        for part in subgroups.split(';').filter(|p| !p.is_empty()) {
            let (triple, count) = part.split_once(':').ok_or_else(|| bad("bad subgroup"))?;
            let xs: Vec<usize> = triple
                .split(',')
                .map(|x| x.parse().map_err(|e| ctx("subgroup", e)))
                .collect::<Res<_>>()?;
            if xs.len() != 3 {
                return Err(bad("bad subgroup triple"));
            }
            subgroup_counts.insert(
                (xs[0], xs[1], xs[2]),
                count.parse::<u64>().map_err(|e| ctx("subgroup count", e))?,
            );
        }
        let blocks: Vec<[u8; 3]> = blocks
            .split(';')
            .map(|b| -> Res<[u8; 3]> {
                let xs: Vec<u8> = b
                    .split('-')
                    .map(|x| x.parse().map_err(|e| ctx("block", e)))
                    .collect::<Res<_>>()?;
                xs.try_into().map_err(|_| "block is not a triple".to_string())
            })
            .collect::<Res<_>>()?;
        let representative =
            Factorization::from_blocks(n, blocks).map_err(|e| format!("{}: {e:?}", path.display()))?;
        accepted.push(SymmetricClass {
            canonical_form,
            aut_order,
            subgroup_counts,
            representative,
        });
    }
    Ok((solutions, accepted))
}

// ============================================================================
// classify: orchestration
// ============================================================================

fn cmd_classify(args: ClassifyArgs) -> Res<()> {
    check_n(args.n)?;
    let n = args.n;
    let (worker_index, worker_count) = parse_worker(&args.worker)?;
    let types = parse_type_filter(n, &args.type_filter)?;
    fs::create_dir_all(&args.seeds_dir).map_err(|e| ctx("seeds dir", e))?;

    match args.mode {
        ClassifyMode::Seeds => {
            // Types are the natural unit here: each worker classifies its
            // share and writes the corresponding seed lists.
            let mut total = 0usize;
            for (i, t) in types.iter().enumerate() {
                if i % worker_count != worker_index {
                    continue;
                }
                let set = ensure_seeds(&args.seeds_dir, n, t)?;
                total += set.classes.len();
                println!("type {},{},{}: {} seeds", t.p, t.f_u, t.f_v, set.classes.len());
            }
            println!("seeds total: {total}");
            Ok(())
        }
        ClassifyMode::Full => cmd_classify_full(&args, &types, worker_index, worker_count),
    }
}

fn cmd_classify_full(
    args: &ClassifyArgs,
    types: &[AutType],
    worker_index: usize,
    worker_count: usize,
) -> Res<()> {
    let n = args.n;
    let out_dir = args
        .out_dir
        .as_ref()
        .ok_or_else(|| "--mode full requires --out-dir".to_string())?;
    let units_dir = out_dir.join("units");
    fs::create_dir_all(&units_dir).map_err(|e| ctx("out dir", e))?;

    let sets: Vec<SeedSet> = types
        .iter()
        .map(|t| ensure_seeds(&args.seeds_dir, n, t))
        .collect::<Res<_>>()?;
    let units = enumerate_units(n, &sets, args.split_depth);
    let set_of = |t: &AutType| sets.iter().find(|s| s.aut_type == *t).expect("enumerated type");

    // Process this worker's share, skipping already-finished units.
    let mut processed = 0usize;
    for (global, unit) in units.iter().enumerate() {
        if global % worker_count != worker_index {
            continue;
        }
        let name = unit_name(n, unit);
        let path = units_dir.join(format!("{name}.txt"));
        if path.exists() {
            continue;
        }
        let set = set_of(&unit.t);
        let stored = &set.classes[unit.seed_index];
        // Stabilizer generators are not persisted; rebuild the class and
        // cross-check the stored stabilizer order.
        let seed = seed_class_from_parts(n, &unit.t, &stored.anchors, &stored.blocks);
        if seed.aut_order != stored.aut_order {
            return Err(format!("{name}: seed list stabilizer order mismatch"));
        }
        let outcome = extend_seed_unit(n, &unit.t, &set.pi, &seed, unit.prefix.as_deref());
        let text = outcome_text(&name, outcome.solutions, &outcome.accepted);
        write_atomic(&path, text.as_bytes())?;
        append_manifest(out_dir, n, "classify", &name, fnv64(text.as_bytes()))?;
        processed += 1;
    }
    println!(
        "worker {}/{}: processed {processed} of {} units",
        worker_index,
        worker_count,
        units.len()
    );

    // Assemble the census once every unit's outcome exists. A type filter
    // leaves the run partial by construction, so the equation is skipped.
    if args.type_filter.is_some() {
        println!("type filter active; census assembly skipped");
        return Ok(());
    }
    let mut missing = 0usize;
    for unit in &units {
        if !units_dir.join(format!("{}.txt", unit_name(n, unit))).exists() {
            missing += 1;
        }
    }
    if missing > 0 {
        println!("census pending: {missing} units remain");
        return Ok(());
    }

    let census = assemble_census(n, &sets, &units, &units_dir)?;
    let mut report = String::new();
    for (ti, out) in census.types.iter().enumerate() {
        let t = &out.aut_type;
        let solutions: u64 = out.seed_tallies.iter().map(|(_, c)| c).sum();
        writeln!(
            report,
            "type {},{},{}: seeds {} solutions {solutions}",
            t.p,
            t.f_u,
            t.f_v,
            out.seed_tallies.len()
        )
        .unwrap();
        let (from_seeds, from_classes) = double_count(&census, ti);
        if from_seeds != from_classes {
            return Err(format!(
                "double count failed for type {},{},{}: seeds side {from_seeds}, classes side {from_classes}",
                t.p, t.f_u, t.f_v
            ));
        }
        writeln!(report, "double-count {},{},{}: ok", t.p, t.f_u, t.f_v).unwrap();
    }
    for (order, count) in aut_order_tally(&census) {
        writeln!(report, "N_{order} = {count}").unwrap();
    }
    if let Some(labeled) = labeled_count(args)? {
        let counts = census_from_symmetric(&census, &labeled);
        writeln!(report, "N_1 = {}", counts.n1).unwrap();
        writeln!(report, "NF(K_{n}) = {}", counts.total).unwrap();
    } else {
        writeln!(report, "symmetric classes = {}", census.classes.len()).unwrap();
        writeln!(report, "(no labeled count supplied; N_1 not derived)").unwrap();
    }
    write_atomic(&out_dir.join("census.txt"), report.as_bytes())?;
    print!("{report}");
    Ok(())
}

/// LF(K_n) for the census equation: an explicit decimal wins, otherwise the
/// top level file if a levels directory was supplied.
fn labeled_count(args: &ClassifyArgs) -> Res<Option<BigCount>> {
    if let Some(text) = &args.labeled {
        return text.parse().map(Some).map_err(|e| ctx("--labeled", e));
    }
    let Some(dir) = &args.levels_dir else {
        return Ok(None);
    };
    let level = read_level(dir, args.n, args.n - 1)?;
    let records = level.records_sorted();
    if records.len() != 1 {
        return Err("top level file should hold exactly one class".into());
    }
    Ok(Some(records[0].accumulator.clone()))
}

/// Rebuilds the full census from per-unit outcome files, reproducing what a
/// single in-process classification run would have produced.
fn assemble_census(
    n: usize,
    sets: &[SeedSet],
    units: &[WorkUnit],
    units_dir: &Path,
) -> Res<SymmetricCensus> {
    let mut per_seed: HashMap<(String, usize), u64> = HashMap::new();
    let mut classes: Vec<SymmetricClass> = Vec::new();
    for unit in units {
        let path = units_dir.join(format!("{}.txt", unit_name(n, unit)));
        let (solutions, accepted) = parse_outcome(n, &path)?;
        *per_seed
            .entry((type_tag(&unit.t), unit.seed_index))
            .or_insert(0) += solutions;
        classes.extend(accepted);
    }
    let mut types = Vec::new();
    for set in sets {
        let tag = type_tag(&set.aut_type);
        let seed_tallies: Vec<(BigCount, u64)> = set
            .classes
            .iter()
            .enumerate()
            .map(|(i, s)| {
                (
                    s.aut_order.clone(),
                    per_seed.get(&(tag.clone(), i)).copied().unwrap_or(0),
                )
            })
            .collect();
        types.push(TypeOutcome {
            aut_type: set.aut_type,
            m: seed_m_value(n, &set.aut_type) as u64,
            seed_tallies,
        });
    }
    let mut forms: Vec<&[u8]> = classes.iter().map(|c| c.canonical_form.as_slice()).collect();
    forms.sort_unstable();
    for w in forms.windows(2) {
        if w[0] == w[1] {
            return Err("a class was accepted more than once".into());
        }
    }
    Ok(SymmetricCensus {
        n,
        types,
        classes,
    })
}
