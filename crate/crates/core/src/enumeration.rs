//! Flip-graph traversal of the primitive iso-edge domains, descent to the
//! lower-dimensional cells, and the mass formula.
//!
//! Both traversals run level by level: a level is processed in key order, in
//! batches whose results are committed sequentially, so the outcome does not
//! depend on the number of workers. With a checkpoint path every committed batch
//! is appended to a journal, and a later run with the same path resumes from it.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::arith::int::{dot_i128, rank_i64};
use crate::arith::{sym_dim, ExactScalar, SymCoordinates};
use crate::equivalence::{canonical_form, CanonicalKey, GroupOrder};
use crate::error::{Error, Result};
use crate::isoedge::{principal_configuration_with_seed, Domain, IsoEdgeConfiguration};
use crate::lattice::{LatticeForm, ParityVector};
use crate::polyhedra::Cone;

pub const CHECKPOINT_VERSION: u32 = 1;

/// One orbit of cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRecord {
    pub dimension: usize,
    pub key: CanonicalKey,
    pub stabilizer_order: GroupOrder,
    /// Extreme rays, one inequality per facet, and equalities cutting out the span.
    pub cone: Cone,
    /// `{2x − 2v : x ∈ tCVP(A, v)}` over all classes `v` at the interior form `A`, sorted.
    pub configuration: Vec<Vec<i64>>,
    pub contains_pd: bool,
}

impl CellRecord {
    pub fn rays(&self) -> &[Vec<i64>] {
        self.cone.rays().expect("cell cones carry rays")
    }

    /// Sum of the extreme rays.
    pub fn interior_point(&self) -> Vec<i64> {
        sum_rows(self.rays().iter())
    }

    /// The primitive configuration of a top-dimensional cell.
    pub fn primitive_configuration(&self, n: usize) -> Result<IsoEdgeConfiguration> {
        IsoEdgeConfiguration::from_vector_system(n, &self.configuration)
    }
}

/// Flipping `from` across its facet number `facet` gives a domain equivalent to `to`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AdjacencyEntry {
    pub from: CanonicalKey,
    pub facet: usize,
    pub to: CanonicalKey,
}

/// Known orbits with their traversal level, the processed keys and the adjacency log.
#[derive(Clone, Debug, Default)]
pub struct TraversalState {
    pub records: BTreeMap<CanonicalKey, (usize, CellRecord)>,
    pub done: BTreeSet<CanonicalKey>,
    pub adjacency: Vec<AdjacencyEntry>,
}

impl TraversalState {
    /// Unprocessed keys ordered by level, then key.
    pub fn frontier(&self) -> Vec<CanonicalKey> {
        let mut keys: Vec<(usize, &CanonicalKey)> = self
            .records
            .iter()
            .filter(|(k, _)| !self.done.contains(*k))
            .map(|(k, (level, _))| (*level, k))
            .collect();
        keys.sort();
        keys.into_iter().map(|(_, k)| k.clone()).collect()
    }

    /// The lowest level holding an unprocessed record accepted by `expand`,
    /// with those records' keys in order.
    fn next_level(&self, expand: &dyn Fn(&CellRecord) -> bool) -> Option<(usize, Vec<CanonicalKey>)> {
        let level = self
            .records
            .iter()
            .filter(|(k, (_, r))| !self.done.contains(*k) && expand(r))
            .map(|(_, (l, _))| *l)
            .min()?;
        let keys = self
            .records
            .iter()
            .filter(|(k, (l, r))| *l == level && !self.done.contains(*k) && expand(r))
            .map(|(k, _)| k.clone())
            .collect();
        Some((level, keys))
    }

    fn apply(&mut self, batch: &Batch) -> Result<()> {
        for r in &batch.records {
            self.insert(batch.level, r.clone())?;
        }
        self.done.extend(batch.processed.iter().cloned());
        self.adjacency.extend(batch.adjacency.iter().cloned());
        Ok(())
    }

    /// Inserts a record unless its key is known; a known key must agree in
    /// dimension and stabilizer order. Returns whether the record was new.
    fn insert(&mut self, level: usize, r: CellRecord) -> Result<bool> {
        if let Some((_, old)) = self.records.get(&r.key) {
            if old.dimension != r.dimension || old.stabilizer_order != r.stabilizer_order {
                return Err(Error::Validation(format!(
                    "orbit {} seen with dimension/stabilizer {}/{} and {}/{}",
                    r.key, old.dimension, old.stabilizer_order, r.dimension, r.stabilizer_order
                )));
            }
            return Ok(false);
        }
        self.records.insert(r.key.clone(), (level, r));
        Ok(true)
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    /// Nodes per committed batch.
    pub checkpoint_interval: usize,
    /// First Selling perturbation tried for the starting domain.
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            workers: 1,
            checkpoint: None,
            checkpoint_interval: 50,
            seed: 0,
        }
    }
}

/// Top-dimensional orbits sorted by key, with the flip adjacencies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitiveCensus {
    pub n: usize,
    /// Selling perturbation of the starting domain.
    pub seed: u64,
    pub domains: Vec<CellRecord>,
    pub adjacency: Vec<AdjacencyEntry>,
}

/// Cell orbits of dimension at least `min_dim` that contain positive definite
/// forms, by decreasing dimension and then key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCensus {
    pub n: usize,
    pub min_dim: usize,
    pub cells: Vec<CellRecord>,
}

impl CellCensus {
    pub fn counts(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for c in &self.cells {
            *out.entry(c.dimension).or_insert(0) += 1;
        }
        out
    }
}

// ---------------------------------------------------------------------------
// journal

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Header {
    version: u32,
    kind: String,
    n: usize,
    min_dim: usize,
    seed: u64,
}

/// One committed batch: the processed keys and what they produced.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct Batch {
    /// Dimension of the processed cells (of the initial records for the first batch).
    dimension: usize,
    /// Level assigned to the new records.
    level: usize,
    processed: Vec<CanonicalKey>,
    records: Vec<CellRecord>,
    adjacency: Vec<AdjacencyEntry>,
    /// Keys of the processed level still waiting after this batch; listed
    /// with the first batch of each level only.
    frontier: Vec<CanonicalKey>,
    remaining: usize,
}

struct Journal {
    file: Option<File>,
}

impl Journal {
    fn disabled() -> Self {
        Journal { file: None }
    }

    /// Opens or creates the journal; returns the complete batches found.
    /// A torn trailing line is cut off.
    fn open(path: &Path, header: &Header) -> Result<(Self, Vec<Batch>)> {
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(path)?;
        let mut batches = Vec::new();
        let mut good = 0u64;
        {
            let mut reader = BufReader::new(&mut file);
            let mut line = String::new();
            let mut first = true;
            loop {
                line.clear();
                let read = reader.read_line(&mut line)?;
                if read == 0 || !line.ends_with('\n') {
                    break;
                }
                if first {
                    let found: Header = serde_json::from_str(&line)
                        .map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;
                    if &found != header {
                        return Err(Error::Checkpoint(format!(
                            "checkpoint belongs to a different run: {found:?}"
                        )));
                    }
                    first = false;
                } else {
                    match serde_json::from_str::<Batch>(&line) {
                        Ok(b) => batches.push(b),
                        Err(_) => break,
                    }
                }
                good += read as u64;
            }
        }
        file.set_len(good)?;
        file.seek(SeekFrom::End(0))?;
        let mut journal = Journal { file: Some(file) };
        if good == 0 {
            journal.write_line(&serde_json::to_string(header).expect("header serializes"))?;
        }
        Ok((journal, batches))
    }

    fn write_line(&mut self, line: &str) -> Result<()> {
        if let Some(f) = &mut self.file {
            let mut buf = Vec::with_capacity(line.len() + 1);
            buf.extend_from_slice(line.as_bytes());
            buf.push(b'\n');
            f.write_all(&buf)?;
            f.sync_data()?;
        }
        Ok(())
    }

    fn append(&mut self, batch: &Batch) -> Result<()> {
        if self.file.is_none() {
            return Ok(());
        }
        let line = serde_json::to_string(batch).map_err(|e| Error::Checkpoint(e.to_string()))?;
        self.write_line(&line)
    }
}

fn open_state(opts: &Options, header: &Header) -> Result<(Journal, TraversalState, bool)> {
    let mut state = TraversalState::default();
    let Some(path) = &opts.checkpoint else {
        return Ok((Journal::disabled(), state, false));
    };
    let (journal, batches) = Journal::open(path, header)?;
    let resumed = !batches.is_empty();
    for b in &batches {
        state.apply(b)?;
    }
    if resumed {
        log::info!(
            "resumed from {}: {} records, {} processed",
            path.display(),
            state.records.len(),
            state.done.len()
        );
    }
    Ok((journal, state, resumed))
}

// ---------------------------------------------------------------------------
// driver

struct Child {
    facet: Option<usize>,
    record: CellRecord,
}

pub(crate) fn parallel_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if workers <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut pieces: Vec<(usize, R)> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers.min(items.len()))
            .map(|_| {
                s.spawn(|| {
                    let mut out = Vec::new();
                    loop {
                        let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        if i >= items.len() {
                            break;
                        }
                        out.push((i, f(&items[i])));
                    }
                    out
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    pieces.sort_by_key(|(i, _)| *i);
    pieces.into_iter().map(|(_, r)| r).collect()
}

fn drive(
    state: &mut TraversalState,
    journal: &mut Journal,
    opts: &Options,
    expand: &dyn Fn(&CellRecord) -> bool,
    process: &(dyn Fn(&CellRecord) -> Result<Vec<Child>> + Sync),
) -> Result<()> {
    let interval = opts.checkpoint_interval.max(1);
    while let Some((level, keys)) = state.next_level(expand) {
        let dimension = state.records[&keys[0]].1.dimension;
        log::info!("level {level} (dimension {dimension}): {} cells to expand", keys.len());
        for (b, chunk) in keys.chunks(interval).enumerate() {
            let nodes: Vec<&CellRecord> = chunk.iter().map(|k| &state.records[k].1).collect();
            let results = parallel_map(&nodes, opts.workers, |r| process(r));
            let mut batch = Batch {
                dimension,
                level: level + 1,
                processed: chunk.to_vec(),
                records: Vec::new(),
                adjacency: Vec::new(),
                frontier: Vec::new(),
                remaining: keys.len() - ((b + 1) * interval).min(keys.len()),
            };
            if b == 0 {
                batch.frontier = keys[chunk.len()..].to_vec();
            }
            for (key, children) in chunk.iter().zip(results) {
                for child in children? {
                    if let Some(facet) = child.facet {
                        batch.adjacency.push(AdjacencyEntry {
                            from: key.clone(),
                            facet,
                            to: child.record.key.clone(),
                        });
                    }
                    if state.insert(level + 1, child.record.clone())? {
                        batch.records.push(child.record);
                    }
                }
            }
            state.done.extend(chunk.iter().cloned());
            state.adjacency.extend(batch.adjacency.iter().cloned());
            journal.append(&batch)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// records

fn sum_rows<'a>(rows: impl Iterator<Item = &'a Vec<i64>>) -> Vec<i64> {
    let mut out: Vec<i64> = Vec::new();
    for r in rows {
        if out.is_empty() {
            out = vec![0; r.len()];
        }
        for (a, b) in out.iter_mut().zip(r) {
            *a += b;
        }
    }
    out
}

fn form_of(n: usize, coords: &[i64]) -> Result<crate::ExactMatrix> {
    Ok(SymCoordinates::from_i64(n, coords)?.to_matrix())
}

/// The generalized configuration at a positive definite form.
fn configuration_at(form: &LatticeForm) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = ParityVector::all(form.dim())
        .flat_map(|v| form.class_vectors(v))
        .collect();
    out.sort();
    out
}

fn top_record(domain: &Domain) -> Result<CellRecord> {
    let all = domain.cone.inequalities().expect("domain cones carry inequalities");
    let ineqs = domain
        .facets
        .iter()
        .map(|f| all[f.inequalities[0]].clone())
        .collect();
    let cone = Cone::from_descriptions(
        domain.cone.ambient_dim(),
        ineqs,
        Vec::new(),
        domain.rays().to_vec(),
    )?;
    let configuration = domain.config.vector_system();
    let cf = canonical_form(&configuration)?;
    let contains_pd = form_of(domain.config.n(), &sum_rows(domain.rays().iter()))?.is_positive_definite();
    Ok(CellRecord {
        dimension: domain.dim(),
        key: cf.key,
        stabilizer_order: cf.stabilizer_order,
        cone,
        configuration,
        contains_pd,
    })
}

/// Facets of the cone spanned by `rays` (of dimension `dim`) among the
/// candidate inequalities: the inclusion-maximal proper tight sets, each with
/// the first candidate defining it.
fn facet_sets(rays: &[Vec<i64>], candidates: &[Vec<i64>], dim: usize) -> Result<Vec<(usize, FixedBitSet)>> {
    let mut sets: Vec<(usize, FixedBitSet)> = Vec::new();
    for (i, h) in candidates.iter().enumerate() {
        let mut tight = FixedBitSet::with_capacity(rays.len());
        for (j, r) in rays.iter().enumerate() {
            match dot_i128(h, r) {
                0 => tight.insert(j),
                x if x < 0 => {
                    return Err(Error::Validation(format!("ray {r:?} violates inequality {h:?}")))
                }
                _ => {}
            }
        }
        if tight.count_ones(..) == rays.len() || sets.iter().any(|(_, s)| *s == tight) {
            continue;
        }
        sets.push((i, tight));
    }
    let maximal: Vec<(usize, FixedBitSet)> = sets
        .iter()
        .filter(|(_, s)| !sets.iter().any(|(_, t)| t != s && s.is_subset(t)))
        .cloned()
        .collect();
    for (i, s) in &maximal {
        let sub: Vec<&Vec<i64>> = s.ones().map(|j| &rays[j]).collect();
        if rank_i64(&sub) + 1 != dim {
            return Err(Error::Validation(format!(
                "inequality {:?} supports a face of dimension {} in a cone of dimension {dim}",
                candidates[*i],
                rank_i64(&sub)
            )));
        }
    }
    Ok(maximal)
}

/// Facets of a cell that contain positive definite forms, as cell records.
fn cell_children(n: usize, cell: &CellRecord) -> Result<Vec<Child>> {
    let rays = cell.rays();
    let ineqs = cell.cone.inequalities().expect("cell cones carry inequalities");
    let mut out = Vec::new();
    for (idx, set) in facet_sets(rays, ineqs, cell.dimension)? {
        let child_rays: Vec<Vec<i64>> = set.ones().map(|j| rays[j].clone()).collect();
        let a = form_of(n, &sum_rows(child_rays.iter()))?;
        if !a.is_positive_definite() {
            continue;
        }
        let form = LatticeForm::new(&a)?;
        let configuration = configuration_at(&form);
        let cf = canonical_form(&configuration)?;
        let dim = cell.dimension - 1;
        let candidates: Vec<Vec<i64>> = ineqs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != idx)
            .map(|(_, h)| h.clone())
            .collect();
        let child_ineqs = facet_sets(&child_rays, &candidates, dim)?
            .into_iter()
            .map(|(i, _)| candidates[i].clone())
            .collect();
        let mut equalities = cell.cone.equalities().to_vec();
        equalities.push(ineqs[idx].clone());
        let cone = Cone::from_descriptions(sym_dim(n), child_ineqs, equalities, child_rays)?;
        out.push(Child {
            facet: None,
            record: CellRecord {
                dimension: dim,
                key: cf.key,
                stabilizer_order: cf.stabilizer_order,
                cone,
                configuration,
                contains_pd: true,
            },
        });
    }
    Ok(out)
}

fn flip_children(n: usize, node: &CellRecord) -> Result<Vec<Child>> {
    let domain = Domain::new(node.primitive_configuration(n)?)?;
    let mut out = Vec::with_capacity(domain.facets.len());
    for f in 0..domain.facets.len() {
        let context = |e: Error| Error::Validation(format!("flip of domain {} across facet {f}: {e}", node.key));
        let flipped = domain.flip(f).map_err(context)?;
        domain.certify_flip(f, &flipped).map_err(context)?;
        let record = top_record(&Domain::new(flipped).map_err(context)?)?;
        out.push(Child {
            facet: Some(f),
            record,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// public operations

fn check_dimension(n: usize) -> Result<()> {
    if !(2..=5).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(())
}

/// All primitive iso-edge domains up to `GL_n(Z)`, found by flipping from the
/// principal domain.
pub fn enumerate_primitive(n: usize, opts: &Options) -> Result<PrimitiveCensus> {
    check_dimension(n)?;
    let (seed, principal) = principal_configuration_with_seed(n, opts.seed);
    let header = Header {
        version: CHECKPOINT_VERSION,
        kind: "primitive".into(),
        n,
        min_dim: sym_dim(n),
        seed,
    };
    let (mut journal, mut state, resumed) = open_state(opts, &header)?;
    if !resumed {
        let start = top_record(&Domain::new(principal)?)?;
        let batch = Batch {
            dimension: start.dimension,
            level: 0,
            processed: Vec::new(),
            records: vec![start],
            adjacency: Vec::new(),
            frontier: Vec::new(),
            remaining: 0,
        };
        state.apply(&batch)?;
        journal.append(&batch)?;
    }
    drive(&mut state, &mut journal, opts, &|_| true, &|r| flip_children(n, r))?;
    let mut adjacency = state.adjacency;
    adjacency.sort();
    Ok(PrimitiveCensus {
        n,
        seed,
        domains: state.records.into_values().map(|(_, r)| r).collect(),
        adjacency,
    })
}

/// All cell orbits of dimension at least `min_dim` containing positive
/// definite forms, by repeated descent to facets from the primitive domains.
pub fn enumerate_cells(n: usize, min_dim: usize, opts: &Options) -> Result<CellCensus> {
    check_dimension(n)?;
    let top = sym_dim(n);
    if !(1..=top).contains(&min_dim) {
        return Err(Error::Dimension(format!("min_dim must lie in 1..={top}")));
    }
    let header = Header {
        version: CHECKPOINT_VERSION,
        kind: "cells".into(),
        n,
        min_dim,
        seed: opts.seed,
    };
    let (mut journal, mut state, resumed) = open_state(opts, &header)?;
    if !resumed {
        let primitive = enumerate_primitive(
            n,
            &Options {
                checkpoint: None,
                ..opts.clone()
            },
        )?;
        let batch = Batch {
            dimension: top,
            level: 0,
            processed: Vec::new(),
            records: primitive.domains,
            adjacency: Vec::new(),
            frontier: Vec::new(),
            remaining: 0,
        };
        state.apply(&batch)?;
        journal.append(&batch)?;
    }
    drive(
        &mut state,
        &mut journal,
        opts,
        &|r| r.dimension > min_dim,
        &|r| cell_children(n, r),
    )?;
    let mut cells: Vec<CellRecord> = state.records.into_values().map(|(_, r)| r).collect();
    cells.sort_by(|a, b| b.dimension.cmp(&a.dimension).then_with(|| a.key.cmp(&b.key)));
    Ok(CellCensus { n, min_dim, cells })
}

/// `Σ (−1)^dim / |Stab|` over the records that contain positive definite forms.
pub fn mass_formula(cells: &[CellRecord]) -> ExactScalar {
    cells
        .iter()
        .filter(|c| c.contains_pd)
        .map(|c| {
            let sign: i64 = if c.dimension % 2 == 0 { 1 } else { -1 };
            ExactScalar::from_big(num_rational::BigRational::new(
                BigInt::from(sign),
                BigInt::from(c.stabilizer_order),
            ))
        })
        .sum()
}

/// Runs the full cell census and evaluates the mass formula.
pub fn mass_check(n: usize, opts: &Options) -> Result<ExactScalar> {
    if n < 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(mass_formula(&enumerate_cells(n, 1, opts)?.cells))
}
