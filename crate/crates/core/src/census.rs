//! Sampling census of combinatorial types of `n`-point metrics.
//!
//! Each sample `i` of a run with seed `s` draws its metric from its own seed
//! derived from `(s, i)`, so the registry does not depend on how samples are
//! split among workers. Within a type, the representative is the sample with
//! the smallest `(seed, index)` key; this makes merging associative and
//! commutative.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::combinatorics::canonical_certificate;
use crate::error::{Error, Result};
use crate::metric_space::{
    euclidean_type_test, random_metric, random_strict_metric, DistanceMatrix, SamplerMode,
};
use crate::polytope::FundamentalPolytope;

pub const FORMAT_VERSION: &str = "1";
pub const MIN_POINTS: usize = 3;
pub const MAX_POINTS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerParams {
    pub mode: SamplerMode,
    pub denominator_bound: u64,
    /// Resample until every triangle inequality is strict.
    pub strict: bool,
}

impl Default for SamplerParams {
    fn default() -> Self {
        SamplerParams { mode: SamplerMode::Closure, denominator_bound: 100, strict: false }
    }
}

/// Where a sample came from; orders candidates for the representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SampleKey {
    pub seed: u64,
    pub index: u64,
}

/// Per-sample seed: a splitmix64 mix of the run seed and the sample index.
pub fn sample_seed(seed: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(seed ^ mix(index))
}

/// Everything the pipeline reports about one metric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub certificate: String,
    pub digest: String,
    pub f_vector: Vec<usize>,
    pub facet_size_histogram: BTreeMap<usize, usize>,
    pub euclidean: bool,
    /// All `n(n−1)` points extreme and every facet a simplex. A proxy for
    /// types that are stable under small perturbations of the metric.
    pub candidate_generic: bool,
}

pub fn classify(d: &DistanceMatrix) -> Result<Classification> {
    let polytope = FundamentalPolytope::new(d)?;
    let ctype = canonical_certificate(&polytope.incidence);
    let n = d.n();
    let all_extreme = polytope.vrep.num_vertices() == n * (n - 1);
    let simplicial = polytope.incidence.facet_sizes().iter().all(|&s| s == n - 1);
    Ok(Classification {
        certificate: ctype.certificate,
        digest: ctype.digest,
        f_vector: polytope.f_vector()?.0,
        facet_size_histogram: polytope.incidence.facet_size_histogram(),
        euclidean: euclidean_type_test(d)?,
        candidate_generic: all_extreme && simplicial,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub format_version: String,
    pub n: usize,
    pub digest: String,
    pub certificate: String,
    pub sample_count: u64,
    pub representative: DistanceMatrix,
    pub representative_key: SampleKey,
    pub f_vector: Vec<usize>,
    pub facet_size_histogram: BTreeMap<usize, usize>,
    pub euclidean_count: u64,
    pub candidate_generic: bool,
}

impl CensusRecord {
    /// Re-runs the pipeline on the representative and compares every derived
    /// field.
    pub fn reverify(&self) -> Result<bool> {
        let c = classify(&self.representative)?;
        Ok(c.certificate == self.certificate
            && c.digest == self.digest
            && c.f_vector == self.f_vector
            && c.facet_size_histogram == self.facet_size_histogram
            && c.candidate_generic == self.candidate_generic)
    }

    fn absorb(&mut self, other: &CensusRecord) {
        self.sample_count += other.sample_count;
        self.euclidean_count += other.euclidean_count;
        if other.representative_key < self.representative_key {
            self.representative = other.representative.clone();
            self.representative_key = other.representative_key;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeRegistry {
    pub format_version: String,
    pub n: usize,
    pub params: SamplerParams,
    pub seeds: BTreeSet<u64>,
    pub total_samples: u64,
    /// Keyed by full certificate.
    pub records: BTreeMap<String, CensusRecord>,
}

impl TypeRegistry {
    pub fn new(n: usize, params: SamplerParams) -> Self {
        TypeRegistry {
            format_version: FORMAT_VERSION.to_string(),
            n,
            params,
            seeds: BTreeSet::new(),
            total_samples: 0,
            records: BTreeMap::new(),
        }
    }

    /// Adds one metric to the registry (sampled or injected by hand).
    pub fn add_sample(&mut self, d: &DistanceMatrix, key: SampleKey) -> Result<()> {
        if d.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "{}-point metric added to a registry for n = {}",
                d.n(),
                self.n
            )));
        }
        let c = classify(d)?;
        let record = CensusRecord {
            format_version: FORMAT_VERSION.to_string(),
            n: self.n,
            digest: c.digest,
            certificate: c.certificate,
            sample_count: 1,
            representative: d.clone(),
            representative_key: key,
            f_vector: c.f_vector,
            facet_size_histogram: c.facet_size_histogram,
            euclidean_count: u64::from(c.euclidean),
            candidate_generic: c.candidate_generic,
        };
        self.insert_record(record);
        self.total_samples += 1;
        Ok(())
    }

    fn insert_record(&mut self, record: CensusRecord) {
        match self.records.get_mut(&record.certificate) {
            Some(existing) => existing.absorb(&record),
            None => {
                self.records.insert(record.certificate.clone(), record);
            }
        }
    }

    pub fn num_types(&self) -> usize {
        self.records.len()
    }

    pub fn is_consistent(&self) -> bool {
        self.records.values().map(|r| r.sample_count).sum::<u64>() == self.total_samples
    }

    /// One record per line, keys sorted.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for record in self.records.values() {
            let value = serde_json::to_value(record)?;
            out.push_str(&serde_json::to_string(&value)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn records_from_jsonl(text: &str) -> Result<Vec<CensusRecord>> {
        text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
    }

    pub fn to_snapshot(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        Ok(serde_json::to_string_pretty(&value)? + "\n")
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let registry: TypeRegistry = serde_json::from_str(text)?;
        if registry.format_version != FORMAT_VERSION {
            return Err(Error::Unsupported(format!("registry format version {:?}", registry.format_version)));
        }
        Ok(registry)
    }

    /// Writes `registry.jsonl` and `snapshot.json` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("registry.jsonl"), self.to_jsonl()?)?;
        std::fs::write(dir.join("snapshot.json"), self.to_snapshot()?)?;
        Ok(())
    }
}

pub fn merge_registries(a: &TypeRegistry, b: &TypeRegistry) -> Result<TypeRegistry> {
    if a.n != b.n {
        return Err(Error::IncompatibleRegistries(format!("n = {} vs n = {}", a.n, b.n)));
    }
    if a.params != b.params {
        return Err(Error::IncompatibleRegistries(format!(
            "sampler parameters {:?} vs {:?}",
            a.params, b.params
        )));
    }
    let mut merged = a.clone();
    merged.seeds.extend(&b.seeds);
    merged.total_samples += b.total_samples;
    for record in b.records.values() {
        merged.insert_record(record.clone());
    }
    Ok(merged)
}

fn sample_metric(n: usize, seed: u64, index: u64, params: &SamplerParams) -> Result<DistanceMatrix> {
    let s = sample_seed(seed, index);
    if params.strict {
        random_strict_metric(n, s, params.denominator_bound, params.mode)
    } else {
        random_metric(n, s, params.denominator_bound, params.mode)
    }
}

fn census_range(
    n: usize,
    seed: u64,
    range: std::ops::Range<u64>,
    params: &SamplerParams,
) -> Result<TypeRegistry> {
    let mut registry = TypeRegistry::new(n, *params);
    registry.seeds.insert(seed);
    for index in range {
        let d = sample_metric(n, seed, index, params)?;
        registry.add_sample(&d, SampleKey { seed, index })?;
    }
    Ok(registry)
}

/// Samples `samples` metrics on `n` points and buckets them by type, using
/// `workers` threads. The result does not depend on `workers`.
pub fn run_census(
    n: usize,
    samples: u64,
    seed: u64,
    params: &SamplerParams,
    workers: usize,
) -> Result<TypeRegistry> {
    if !(MIN_POINTS..=MAX_POINTS).contains(&n) {
        return Err(Error::Unsupported(format!(
            "census supports {MIN_POINTS} ≤ n ≤ {MAX_POINTS} (exact face lattices grow too fast beyond), got {n}"
        )));
    }
    if samples == 0 {
        return Err(Error::Unsupported("census needs at least one sample".into()));
    }
    let workers = workers.clamp(1, samples as usize) as u64;
    let chunk = samples.div_ceil(workers);
    let parts: Vec<Result<TypeRegistry>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let range = (w * chunk).min(samples)..((w + 1) * chunk).min(samples);
                scope.spawn(move || census_range(n, seed, range, params))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("census worker panicked")).collect()
    });
    let mut registry = TypeRegistry::new(n, *params);
    registry.seeds.insert(seed);
    for part in parts {
        registry = merge_registries(&registry, &part?)?;
    }
    Ok(registry)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub digest: String,
    pub f_vector: String,
    pub facet_size_histogram: BTreeMap<usize, usize>,
    pub sample_count: u64,
    pub euclidean_count: u64,
    pub candidate_generic: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryReport {
    pub n: usize,
    pub total_samples: u64,
    pub num_types: usize,
    pub candidate_generic_types: usize,
    /// Digests of types realized by at least one Euclidean-embeddable sample.
    pub euclidean_types: Vec<String>,
    /// Digests of types never realized by a Euclidean-embeddable sample.
    pub non_euclidean_types: Vec<String>,
    pub rows: Vec<ReportRow>,
}

impl RegistryReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "n = {}, {} samples, {} types", self.n, self.total_samples, self.num_types).unwrap();
        writeln!(
            out,
            "{:<34} {:<20} {:>8} {:>9} generic  facets",
            "digest", "f-vector", "samples", "euclidean"
        )
        .unwrap();
        for row in &self.rows {
            let hist: Vec<String> =
                row.facet_size_histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
            writeln!(
                out,
                "{:<34} {:<20} {:>8} {:>9} {:<8} {}",
                row.digest,
                row.f_vector,
                row.sample_count,
                row.euclidean_count,
                if row.candidate_generic { "yes" } else { "no" },
                hist.join(",")
            )
            .unwrap();
        }
        writeln!(
            out,
            "types realized by a Euclidean sample: {} of {}",
            self.euclidean_types.len(),
            self.num_types
        )
        .unwrap();
        out
    }
}

/// Types sorted by frequency (then digest), with the Euclidean cross-tab.
pub fn registry_report(registry: &TypeRegistry) -> RegistryReport {
    let mut rows: Vec<ReportRow> = registry
        .records
        .values()
        .map(|r| ReportRow {
            digest: r.digest.clone(),
            f_vector: crate::polytope::FVector(r.f_vector.clone()).to_string(),
            facet_size_histogram: r.facet_size_histogram.clone(),
            sample_count: r.sample_count,
            euclidean_count: r.euclidean_count,
            candidate_generic: r.candidate_generic,
        })
        .collect();
    rows.sort_by(|a, b| b.sample_count.cmp(&a.sample_count).then_with(|| a.digest.cmp(&b.digest)));
    let (euclidean, other): (Vec<&ReportRow>, Vec<&ReportRow>) =
        rows.iter().partition(|r| r.euclidean_count > 0);
    RegistryReport {
        n: registry.n,
        total_samples: registry.total_samples,
        num_types: rows.len(),
        candidate_generic_types: rows.iter().filter(|r| r.candidate_generic).count(),
        euclidean_types: euclidean.iter().map(|r| r.digest.clone()).collect(),
        non_euclidean_types: other.iter().map(|r| r.digest.clone()).collect(),
        rows,
    }
}
