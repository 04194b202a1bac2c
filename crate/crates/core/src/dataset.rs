//! JSONL datasets, train/test splits and whole-file validation.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::challenge::{parse_artifact_block, ArtifactError, Challenge};
use crate::flag::{Flag, FlagError};
use crate::genlib::{generate, GenSeed};
use crate::solvers::solve_challenge;
use crate::taxonomy::{Archetype, Difficulty, SubtypeId, TaxonomyError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: {source}")]
    Taxonomy { line: usize, source: TaxonomyError },
    #[error("line {line}: {source}")]
    Flag { line: usize, source: FlagError },
    #[error("line {line}: {source}")]
    Artifacts { line: usize, source: ArtifactError },
    #[error("line {line}: record {id} has no flag; secrets were not exported")]
    MissingSecrets { line: usize, id: String },
    #[error("no subtype has difficulty {0}")]
    EmptyFilter(Difficulty),
    #[error("seed range overflows from base {0}")]
    SeedOverflow(u64),
}

/// One JSONL line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub archetype: Archetype,
    pub subtype: String,
    pub difficulty: Difficulty,
    pub question: String,
    pub hint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cipher_params: Option<BTreeMap<String, String>>,
}

impl Record {
    pub fn from_challenge(c: &Challenge, include_secrets: bool) -> Record {
        Record {
            id: c.id.clone(),
            archetype: c.subtype.archetype(),
            subtype: c.subtype.name().to_string(),
            difficulty: c.difficulty,
            question: c.question.clone(),
            hint: c.hint.clone(),
            flag: include_secrets.then(|| c.expected_flag.render()),
            cipher_params: include_secrets.then(|| c.cipher_params.clone()),
        }
    }

    fn into_challenge(self, line: usize) -> Result<Challenge, DatasetError> {
        let subtype = SubtypeId::new(self.archetype, &self.subtype)
            .map_err(|source| DatasetError::Taxonomy { line, source })?;
        let flag = self.flag.ok_or_else(|| DatasetError::MissingSecrets { line, id: self.id.clone() })?;
        let expected_flag = Flag::parse(&flag).map_err(|source| DatasetError::Flag { line, source })?;
        let public_artifacts =
            parse_artifact_block(&self.question).map_err(|source| DatasetError::Artifacts { line, source })?;
        Ok(Challenge {
            id: self.id,
            subtype,
            difficulty: self.difficulty,
            question: self.question,
            hint: self.hint,
            expected_flag,
            cipher_params: self.cipher_params.unwrap_or_default(),
            public_artifacts,
        })
    }
}

/// Writes one JSON object per line and returns the record count.
pub fn write_jsonl(challenges: &[Challenge], path: &Path, include_secrets: bool) -> Result<usize, DatasetError> {
    let mut out = BufWriter::new(File::create(path)?);
    for c in challenges {
        serde_json::to_writer(&mut out, &Record::from_challenge(c, include_secrets))
            .map_err(|source| DatasetError::Json { line: 0, source })?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(challenges.len())
}

/// Raw records, with or without secrets.
pub fn read_records(path: &Path) -> Result<Vec<Record>, DatasetError> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(|source| DatasetError::Json { line: i + 1, source })?);
    }
    Ok(records)
}

/// Full challenges; the file must have been written with secrets.
pub fn read_jsonl(path: &Path) -> Result<Vec<Challenge>, DatasetError> {
    let mut out = Vec::new();
    for (i, raw) in BufReader::new(File::open(path)?).lines().enumerate() {
        let raw = raw?;
        if raw.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&raw).map_err(|source| DatasetError::Json { line: i + 1, source })?;
        out.push(record.into_challenge(i + 1)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub subtype: SubtypeId,
    pub seed: GenSeed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    pub split: Split,
    pub count: usize,
    /// First seed of this split; entry `i` uses `seed_base + i`.
    pub seed_base: GenSeed,
    pub difficulty_filter: Option<Difficulty>,
    pub subtype_census: BTreeMap<String, usize>,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    fn build(split: Split, n: usize, seed_base: u64, subtypes: &[SubtypeId], filter: Option<Difficulty>) -> Result<Self, DatasetError> {
        seed_base.checked_add(n as u64).ok_or(DatasetError::SeedOverflow(seed_base))?;
        let entries: Vec<ManifestEntry> = (0..n)
            .map(|i| ManifestEntry { subtype: subtypes[i % subtypes.len()], seed: GenSeed(seed_base + i as u64) })
            .collect();
        let mut subtype_census = BTreeMap::new();
        for e in &entries {
            *subtype_census.entry(e.subtype.name().to_string()).or_insert(0) += 1;
        }
        Ok(DatasetManifest {
            name: format!("randcrypto-{}", split.as_str()),
            split,
            count: n,
            seed_base: GenSeed(seed_base),
            difficulty_filter: filter,
            subtype_census,
            entries,
        })
    }

    /// Half-open seed range used by this split.
    pub fn seed_range(&self) -> std::ops::Range<u64> {
        self.seed_base.0..self.seed_base.0 + self.count as u64
    }

    /// Generates the challenges listed in the manifest, in order.
    pub fn materialize(&self) -> Vec<Challenge> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            self.entries.par_iter().map(|e| generate(e.subtype, e.seed)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            self.entries.iter().map(|e| generate(e.subtype, e.seed)).collect()
        }
    }
}

/// Train and test manifests. Subtypes are cycled round-robin; the test
/// seeds start right after the train seeds.
pub fn build_splits(
    train_n: usize,
    test_n: usize,
    seed_base: GenSeed,
    difficulty_filter: Option<Difficulty>,
) -> Result<(DatasetManifest, DatasetManifest), DatasetError> {
    let subtypes: Vec<SubtypeId> = match difficulty_filter {
        Some(level) => SubtypeId::with_difficulty(level).collect(),
        None => SubtypeId::all().collect(),
    };
    if subtypes.is_empty() {
        // Unreachable with the shipped table, kept for custom tables.
        return Err(DatasetError::EmptyFilter(difficulty_filter.unwrap_or(Difficulty::Easy)));
    }
    let test_base = seed_base.0.checked_add(train_n as u64).ok_or(DatasetError::SeedOverflow(seed_base.0))?;
    let train = DatasetManifest::build(Split::Train, train_n, seed_base.0, &subtypes, difficulty_filter)?;
    let test = DatasetManifest::build(Split::Test, test_n, test_base, &subtypes, difficulty_filter)?;
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordResult {
    pub id: String,
    pub subtype: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtypeTally {
    pub passed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub results: Vec<RecordResult>,
    pub per_subtype: BTreeMap<String, SubtypeTally>,
}

impl ValidationReport {
    pub fn passed(&self) -> usize {
        self.results.iter().filter(|r| r.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RecordResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

fn check(c: &Challenge) -> RecordResult {
    let (passed, error) = match solve_challenge(c) {
        Ok(out) if out.flag == c.expected_flag => (true, None),
        Ok(out) => (false, Some(format!("solver recovered {} instead", out.flag))),
        Err(e) => (false, Some(e.to_string())),
    };
    RecordResult { id: c.id.clone(), subtype: c.subtype.name().to_string(), passed, error }
}

/// Runs the reference solver on every challenge.
pub fn validate_challenges(challenges: &[Challenge]) -> ValidationReport {
    #[cfg(feature = "parallel")]
    let results: Vec<RecordResult> = {
        use rayon::prelude::*;
        challenges.par_iter().map(check).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<RecordResult> = challenges.iter().map(check).collect();

    let mut per_subtype: BTreeMap<String, SubtypeTally> = BTreeMap::new();
    for r in &results {
        let tally = per_subtype.entry(r.subtype.clone()).or_default();
        tally.total += 1;
        tally.passed += r.passed as usize;
    }
    ValidationReport { results, per_subtype }
}

pub fn validate_dataset(path: &Path) -> Result<ValidationReport, DatasetError> {
    Ok(validate_challenges(&read_jsonl(path)?))
}
