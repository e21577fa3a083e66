//! Layered streaming learner.
//!
//! A stack of layers processes one point per step. Layer 1 keeps a ring
//! buffer of recent raw points; each step, the arriving item is scored
//! against the buffer by cosine attention, the top-K most similar items are
//! grouped with it, a signature of the group is fitted, and its flattened
//! ε-null projector is pushed to the next layer's buffer. Layers above
//! operate the same way on flats. Each fitting layer also maintains a
//! persistent concept dictionary: the group flat either matches an existing
//! entry (hit), is admitted as a new concept, or is left undecided when it
//! falls between the thresholds.
//!
//! Flat vectors are compared by *trace-centered* cosine: every null
//! projector of a fixed rank has the same large component along the
//! flattened identity, so raw cosines between unrelated projectors crowd
//! toward 1; removing the identity component restores contrast. Raw points
//! (layer 1) use the plain signed cosine.
//!
//! Dictionary lookups and admissions start only after a layer has seen a
//! full buffer of items (configurable warm-up), so early under-filled
//! groups do not pollute the concept store.

use std::collections::VecDeque;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::hierarchy::flatten_symmetric;
use crate::signature::{FitConfig, Signature, DEFAULT_EPSILON};
use crate::{Error, Result};

pub const DEFAULT_BUFFER_LEN: usize = 64;
pub const DEFAULT_FAN_IN: usize = 8;
pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.9;
pub const DEFAULT_ADMIT_THRESHOLD: f64 = 0.8;
pub const DEFAULT_LAYER_COUNT: usize = 2;

/// Cosine similarity of two equal-length vectors. Errors on a zero vector.
pub fn attention_score(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "attention operands".into(),
            expected: a.len(),
            got: b.len(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::InvalidInput(
            "attention on a zero vector is undefined".into(),
        ));
    }
    Ok((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Flattened identity direction for `m × m` projectors: ones at the diagonal
/// positions of the upper-triangle layout.
fn identity_flat(m: usize) -> DVector<f64> {
    let mut v = DVector::zeros(m * (m + 1) / 2);
    let mut k = 0;
    for i in 0..m {
        v[k] = 1.0;
        k += m - i;
    }
    v
}

/// Feature dimension `m` whose upper triangle has the given length, if any.
fn triangular_root(len: usize) -> Option<usize> {
    let m = (((8 * len + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    (m * (m + 1) / 2 == len).then_some(m)
}

/// Remove each segment's component along the flattened identity. `segments`
/// equal-length chunks are centered independently (one per attention head).
fn center_flat(v: &DVector<f64>, segments: usize) -> Result<DVector<f64>> {
    if segments == 0 || v.len() % segments != 0 {
        return Err(Error::InvalidInput(format!(
            "flat of length {} does not split into {segments} segments",
            v.len()
        )));
    }
    let seg_len = v.len() / segments;
    let m = triangular_root(seg_len).ok_or_else(|| {
        Error::InvalidInput(format!("segment length {seg_len} is not triangular"))
    })?;
    let e = identity_flat(m);
    let ee = e.dot(&e);
    let mut out = v.clone();
    for s in 0..segments {
        let mut seg = out.rows_mut(s * seg_len, seg_len);
        let coeff = seg.dot(&e) / ee;
        seg -= &e * coeff;
    }
    Ok(out)
}

/// Trace-centered cosine between flattened projectors (see module docs).
/// Errors when a vector is zero after centering (a pure identity multiple).
pub fn centered_attention_score(a: &DVector<f64>, b: &DVector<f64>, segments: usize) -> Result<f64> {
    let ca = center_flat(a, segments)?;
    let cb = center_flat(b, segments)?;
    attention_score(ca.as_slice(), cb.as_slice())
}

/// One attention head: how many buffered items it groups and the ε at which
/// the group signature's retained rank is cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadConfig {
    pub fan_in: usize,
    pub epsilon: f64,
}

impl Default for HeadConfig {
    fn default() -> Self {
        HeadConfig { fan_in: DEFAULT_FAN_IN, epsilon: DEFAULT_EPSILON }
    }
}

fn default_heads() -> Vec<HeadConfig> {
    vec![HeadConfig::default()]
}

fn default_buffer_len() -> usize {
    DEFAULT_BUFFER_LEN
}

fn default_degree() -> u32 {
    1
}

fn default_match_threshold() -> f64 {
    DEFAULT_MATCH_THRESHOLD
}

fn default_admit_threshold() -> f64 {
    DEFAULT_ADMIT_THRESHOLD
}

/// Per-layer configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerConfig {
    #[serde(default = "default_buffer_len")]
    pub buffer_len: usize,
    #[serde(default = "default_heads")]
    pub heads: Vec<HeadConfig>,
    /// Embedding degree for group fits at this layer.
    #[serde(default = "default_degree")]
    pub degree: u32,
    /// Whether group fits include the constant monomial.
    #[serde(default)]
    pub include_constant: bool,
    #[serde(default = "default_match_threshold")]
    pub match_threshold: f64,
    #[serde(default = "default_admit_threshold")]
    pub admit_threshold: f64,
    /// Dictionary lookups/admissions start after this many items have
    /// entered the layer's buffer. Defaults to the buffer length.
    #[serde(default)]
    pub dictionary_warmup: Option<u64>,
}

impl Default for LayerConfig {
    fn default() -> Self {
        LayerConfig {
            buffer_len: DEFAULT_BUFFER_LEN,
            heads: default_heads(),
            degree: 1,
            include_constant: false,
            match_threshold: DEFAULT_MATCH_THRESHOLD,
            admit_threshold: DEFAULT_ADMIT_THRESHOLD,
            dictionary_warmup: None,
        }
    }
}

impl LayerConfig {
    /// Steps before dictionary matching and admission switch on.
    pub fn warmup(&self) -> u64 {
        self.dictionary_warmup.unwrap_or(self.buffer_len as u64)
    }
}

/// Whole-stack configuration: one entry per layer, bottom first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    pub layers: Vec<LayerConfig>,
}

impl Default for StackConfig {
    fn default() -> Self {
        StackConfig { layers: vec![LayerConfig::default(); DEFAULT_LAYER_COUNT] }
    }
}

impl StackConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::InvalidInput("a stack needs at least one layer".into()));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.buffer_len == 0 {
                return Err(Error::InvalidInput(format!("layer {i}: empty buffer")));
            }
            if l.heads.is_empty() {
                return Err(Error::InvalidInput(format!("layer {i}: no attention heads")));
            }
            if l.heads.iter().any(|h| h.fan_in == 0) {
                return Err(Error::InvalidInput(format!("layer {i}: zero fan-in head")));
            }
            for t in [l.match_threshold, l.admit_threshold] {
                if !(-1.0..=1.0).contains(&t) {
                    return Err(Error::InvalidInput(format!(
                        "layer {i}: threshold {t} outside [-1, 1]"
                    )));
                }
            }
            if l.admit_threshold > l.match_threshold {
                return Err(Error::InvalidInput(format!(
                    "layer {i}: admit threshold above match threshold"
                )));
            }
        }
        Ok(())
    }
}

/// A stored concept: the flat that was admitted, the group signatures behind
/// it (one per head), and usage counters.
#[derive(Debug, Clone)]
pub struct DictionaryEntry {
    pub id: usize,
    pub flat: DVector<f64>,
    pub signatures: Vec<Signature>,
    pub hits: u64,
    pub created_step: u64,
}

#[derive(Debug, Clone)]
struct BufferItem {
    vector: DVector<f64>,
    step: u64,
}

/// One layer's runtime state.
#[derive(Debug, Clone)]
pub struct LayerState {
    index: usize,
    config: LayerConfig,
    buffer: VecDeque<BufferItem>,
    dictionary: Vec<DictionaryEntry>,
    items_seen: u64,
    /// Buffered vectors are flats with this many segments; `None` for raw
    /// points (layer 1), which are compared by plain cosine.
    flat_segments: Option<usize>,
}

impl LayerState {
    fn new(index: usize, config: LayerConfig, flat_segments: Option<usize>) -> Self {
        let buffer = VecDeque::with_capacity(config.buffer_len);
        LayerState {
            index,
            config,
            buffer,
            dictionary: Vec::new(),
            items_seen: 0,
            flat_segments,
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn config(&self) -> &LayerConfig {
        &self.config
    }

    pub fn dictionary(&self) -> &[DictionaryEntry] {
        &self.dictionary
    }

    pub fn items_seen(&self) -> u64 {
        self.items_seen
    }

    /// Buffered items, oldest first, as (global step id, vector).
    pub fn buffer(&self) -> impl Iterator<Item = (u64, &DVector<f64>)> {
        self.buffer.iter().map(|b| (b.step, &b.vector))
    }

    fn item_score(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        match self.flat_segments {
            None => attention_score(a.as_slice(), b.as_slice()),
            Some(segments) => centered_attention_score(a, b, segments),
        }
    }

    /// Best dictionary entry for a flat: `(Some(id), score)` when the best
    /// centered cosine reaches the match threshold, `(None, score)` otherwise;
    /// score is −1 for an empty dictionary.
    pub fn dictionary_lookup(&self, flat: &DVector<f64>) -> (Option<usize>, f64) {
        let mut best: Option<(usize, f64)> = None;
        for e in &self.dictionary {
            let sc = match self.dict_score(flat, &e.flat) {
                Ok(s) => s,
                Err(err) => {
                    log::warn!("layer {}: dictionary comparison failed: {err}", self.index);
                    continue;
                }
            };
            if best.map_or(true, |(_, b)| sc > b) {
                best = Some((e.id, sc));
            }
        }
        match best {
            Some((id, sc)) if sc >= self.config.match_threshold => (Some(id), sc),
            Some((_, sc)) => (None, sc),
            None => (None, -1.0),
        }
    }

    fn dict_score(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<f64> {
        // Dictionary entries are always flats (the layer's own group output).
        let segments = self.config.heads.len();
        centered_attention_score(a, b, segments)
    }
}

/// What happened to the group flat in the layer's dictionary this step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DictionaryEvent {
    /// Best entry reached the match threshold; its hit count was bumped.
    Matched { id: usize, score: f64 },
    /// No entry reached the admit threshold (or the store was empty); the
    /// flat became a new concept.
    Admitted { id: usize, best_score: Option<f64> },
    /// Best score fell between the thresholds: neither matched nor admitted.
    Deferred { id: usize, score: f64 },
    /// No dictionary action (warm-up, non-fitting layer, or failed fit).
    Inactive,
}

/// One head's selection and fit outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadReport {
    /// Chosen buffer items as (global step id, attention score), best first.
    pub selected: Vec<(u64, f64)>,
    pub fitted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_error: Option<String>,
}

/// One layer's record of a step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerReport {
    pub layer: usize,
    pub heads: Vec<HeadReport>,
    pub dictionary: DictionaryEvent,
    /// Length of the flat pushed to the next layer, when all heads fitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emitted_len: Option<usize>,
}

/// Everything a single step did, layer by layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamReport {
    pub step: u64,
    pub layers: Vec<LayerReport>,
}

/// The layered learner: a stack of ring-buffered attention layers.
#[derive(Debug, Clone)]
pub struct Stack {
    layers: Vec<LayerState>,
    steps: u64,
}

impl Stack {
    pub fn new(config: StackConfig) -> Result<Self> {
        config.validate()?;
        let mut layers = Vec::with_capacity(config.layers.len());
        let mut prev_heads: Option<usize> = None;
        for (i, lc) in config.layers.iter().enumerate() {
            layers.push(LayerState::new(i, lc.clone(), prev_heads));
            prev_heads = Some(lc.heads.len());
        }
        Ok(Stack { layers, steps: 0 })
    }

    pub fn layer(&self, index: usize) -> &LayerState {
        &self.layers[index]
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Replace one layer's dictionary with previously saved entries, e.g. to
    /// warm-start from disk. Entry ids must be dense (`0..len` in order), the
    /// layout admission maintains and persistence preserves.
    pub fn install_dictionary(
        &mut self,
        layer_index: usize,
        entries: Vec<DictionaryEntry>,
    ) -> Result<()> {
        let layer_total = self.layers.len();
        let layer = self.layers.get_mut(layer_index).ok_or_else(|| {
            Error::InvalidInput(format!(
                "layer {layer_index} out of range (stack has {layer_total})"
            ))
        })?;
        for (i, e) in entries.iter().enumerate() {
            if e.id != i {
                return Err(Error::InvalidInput(format!(
                    "dictionary entry {i} has id {}; ids must be dense and ordered",
                    e.id
                )));
            }
        }
        layer.dictionary = entries;
        Ok(())
    }

    /// Feed one raw point through the stack.
    pub fn step(&mut self, point: &[f64]) -> Result<StreamReport> {
        if point.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite stream point".into()));
        }
        self.steps += 1;
        let step = self.steps;
        let layer_total = self.layers.len();
        let mut incoming = Some(DVector::from_column_slice(point));
        let mut reports = Vec::with_capacity(layer_total);
        for l in 0..layer_total {
            let item = match incoming.take() {
                Some(v) => v,
                None => {
                    reports.push(LayerReport {
                        layer: l,
                        heads: Vec::new(),
                        dictionary: DictionaryEvent::Inactive,
                        emitted_len: None,
                    });
                    continue;
                }
            };
            let (report, emitted) = Self::layer_step(&mut self.layers[l], l + 1 == layer_total, &item, step);
            incoming = emitted;
            reports.push(report);
        }
        Ok(StreamReport { step, layers: reports })
    }

    /// Run one layer: score, group, fit, dictionary, buffer update.
    fn layer_step(
        state: &mut LayerState,
        is_last: bool,
        item: &DVector<f64>,
        step: u64,
    ) -> (LayerReport, Option<DVector<f64>>) {
        // Score the arriving item against the buffer (before insertion).
        let mut scored: Vec<(u64, f64, usize)> = Vec::with_capacity(state.buffer.len());
        for (idx, b) in state.buffer.iter().enumerate() {
            let sc = match state.item_score(item, &b.vector) {
                Ok(s) => s,
                Err(err) => {
                    log::warn!("layer {} step {step}: attention failed: {err}", state.index);
                    -2.0 // below any real cosine; never preferred
                }
            };
            scored.push((b.step, sc, idx));
        }
        // Descending score; ties go to the most recent item.
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.0.cmp(&a.0)));

        let mut heads = Vec::with_capacity(state.config.heads.len());
        let mut flats: Vec<DVector<f64>> = Vec::new();
        let mut signatures: Vec<Signature> = Vec::new();
        let mut all_fitted = !is_last && !scored.is_empty();
        if is_last || scored.is_empty() {
            // Nothing to group against (or terminal layer): store only.
        } else {
            for head in &state.config.heads {
                let take = head.fan_in.min(scored.len());
                let selected: Vec<(u64, f64)> =
                    scored[..take].iter().map(|&(s, sc, _)| (s, sc)).collect();
                let mut group: Vec<Vec<f64>> = scored[..take]
                    .iter()
                    .map(|&(_, _, idx)| state.buffer[idx].vector.as_slice().to_vec())
                    .collect();
                group.push(item.as_slice().to_vec());
                let fit = PointCloud::new(item.len(), group).and_then(|cloud| {
                    let cfg = FitConfig {
                        degree: state.config.degree,
                        epsilon: head.epsilon,
                        projection: None,
                        include_constant: state.config.include_constant,
                    };
                    Signature::fit(&cloud, &cfg)
                });
                match fit {
                    Ok(sig) => {
                        flats.push(flatten_symmetric(&sig.eps_projector()));
                        signatures.push(sig);
                        heads.push(HeadReport { selected, fitted: true, fit_error: None });
                    }
                    Err(err) => {
                        log::warn!(
                            "layer {} step {step}: group fit failed: {err}",
                            state.index
                        );
                        all_fitted = false;
                        heads.push(HeadReport {
                            selected,
                            fitted: false,
                            fit_error: Some(err.to_string()),
                        });
                    }
                }
            }
        }

        let (emitted, dictionary) = if all_fitted && !flats.is_empty() {
            let total_len = flats.iter().map(|f| f.len()).sum();
            let mut out = DVector::zeros(total_len);
            let mut at = 0;
            for f in &flats {
                out.rows_mut(at, f.len()).copy_from(f);
                at += f.len();
            }
            let event = if state.items_seen + 1 > state.config.warmup() {
                Self::lookup_and_admit(state, &out, signatures, step)
            } else {
                DictionaryEvent::Inactive
            };
            (Some(out), event)
        } else {
            (None, DictionaryEvent::Inactive)
        };

        // FIFO buffer update with the arriving item.
        state.buffer.push_back(BufferItem { vector: item.clone(), step });
        while state.buffer.len() > state.config.buffer_len {
            state.buffer.pop_front();
        }
        state.items_seen += 1;

        let emitted_len = emitted.as_ref().map(|v| v.len());
        (
            LayerReport { layer: state.index, heads, dictionary, emitted_len },
            emitted,
        )
    }

    fn lookup_and_admit(
        state: &mut LayerState,
        flat: &DVector<f64>,
        signatures: Vec<Signature>,
        step: u64,
    ) -> DictionaryEvent {
        if state.dictionary.is_empty() {
            state.dictionary.push(DictionaryEntry {
                id: 0,
                flat: flat.clone(),
                signatures,
                hits: 1,
                created_step: step,
            });
            return DictionaryEvent::Admitted { id: 0, best_score: None };
        }
        let mut best: Option<(usize, f64)> = None;
        for e in &state.dictionary {
            match state.dict_score(flat, &e.flat) {
                Ok(sc) => {
                    if best.map_or(true, |(_, b)| sc > b) {
                        best = Some((e.id, sc));
                    }
                }
                Err(err) => {
                    log::warn!("layer {} step {step}: dictionary comparison failed: {err}", state.index);
                }
            }
        }
        let Some((best_id, best_score)) = best else {
            return DictionaryEvent::Inactive;
        };
        if best_score >= state.config.match_threshold {
            if let Some(e) = state.dictionary.iter_mut().find(|e| e.id == best_id) {
                e.hits += 1;
            }
            DictionaryEvent::Matched { id: best_id, score: best_score }
        } else if best_score < state.config.admit_threshold {
            let id = state.dictionary.len();
            state.dictionary.push(DictionaryEntry {
                id,
                flat: flat.clone(),
                signatures,
                hits: 1,
                created_step: step,
            });
            DictionaryEvent::Admitted { id, best_score: Some(best_score) }
        } else {
            DictionaryEvent::Deferred { id: best_id, score: best_score }
        }
    }
}

// ---- dictionary persistence -------------------------------------------

#[derive(Serialize, Deserialize)]
struct IndexRow {
    id: usize,
    hits: u64,
    created_step: u64,
    heads: usize,
}

/// Persist a layer's dictionary: one signature JSON per (entry, head) plus
/// an `index.json` of ids, hit counts and creation steps.
pub fn save_dictionary(state: &LayerState, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut index = Vec::with_capacity(state.dictionary().len());
    for e in state.dictionary() {
        for (h, sig) in e.signatures.iter().enumerate() {
            sig.save_json_path(dir.join(format!("entry_{:04}_head_{h}.json", e.id)))?;
        }
        index.push(IndexRow {
            id: e.id,
            hits: e.hits,
            created_step: e.created_step,
            heads: e.signatures.len(),
        });
    }
    let file = std::fs::File::create(dir.join("index.json"))?;
    serde_json::to_writer_pretty(file, &index)?;
    Ok(())
}

/// Load a dictionary saved by [`save_dictionary`]; flats are rebuilt from the
/// stored signatures' ε-projectors.
pub fn load_dictionary(dir: &Path) -> Result<Vec<DictionaryEntry>> {
    let file = std::fs::File::open(dir.join("index.json"))?;
    let index: Vec<IndexRow> = serde_json::from_reader(file)?;
    let mut entries = Vec::with_capacity(index.len());
    for row in index {
        let mut signatures = Vec::with_capacity(row.heads);
        for h in 0..row.heads {
            signatures.push(Signature::load_json_path(
                dir.join(format!("entry_{:04}_head_{h}.json", row.id)),
            )?);
        }
        let flats: Vec<DVector<f64>> = signatures
            .iter()
            .map(|s| flatten_symmetric(&s.eps_projector()))
            .collect();
        let total: usize = flats.iter().map(|f| f.len()).sum();
        let mut flat = DVector::zeros(total);
        let mut at = 0;
        for f in &flats {
            flat.rows_mut(at, f.len()).copy_from(f);
            at += f.len();
        }
        entries.push(DictionaryEntry {
            id: row.id,
            flat,
            signatures,
            hits: row.hits,
            created_step: row.created_step,
        });
    }
    entries.sort_by_key(|e| e.id);
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding;
    use nalgebra::DMatrix;
    use rand::Rng;

    #[test]
    fn attention_score_hand_values() {
        assert!((attention_score(&[0.3, -0.2], &[0.3, -0.2]).unwrap() - 1.0).abs() < 1e-15);
        assert!(attention_score(&[1.0, 0.0], &[0.0, 1.0]).unwrap().abs() < 1e-15);
        let c = attention_score(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(attention_score(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    /// Orthonormal bases of `count` random k-dim subspaces of R^dim.
    fn random_subspace_bases(count: usize, dim: usize, k: usize, seed: u64) -> Vec<DMatrix<f64>> {
        let mut rng = seeding::rng_for(seed, "stream-test-subspaces");
        (0..count)
            .map(|_| {
                let g = DMatrix::from_fn(dim, k, |_, _| {
                    rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
                });
                g.qr().q()
            })
            .collect()
    }

    /// A point of subspace `basis` with positive box coefficients, so
    /// same-subspace points keep high signed cosine.
    fn subspace_point(basis: &DMatrix<f64>, rng: &mut impl Rng) -> Vec<f64> {
        let k = basis.ncols();
        let coeffs = DVector::from_fn(k, |_, _| rng.gen_range(0.25..1.75));
        (basis * coeffs).as_slice().to_vec()
    }

    #[test]
    fn same_subspace_attention_beats_cross_subspace() {
        let bases = random_subspace_bases(2, 20, 2, 5);
        let mut rng = seeding::rng_for(6, "stream-test-points");
        let pts: Vec<(usize, Vec<f64>)> = (0..200)
            .map(|i| {
                let s = i % 2;
                (s, subspace_point(&bases[s], &mut rng))
            })
            .collect();
        let mut within = Vec::new();
        let mut across = Vec::new();
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let c = attention_score(&pts[i].1, &pts[j].1).unwrap();
                if pts[i].0 == pts[j].0 {
                    within.push(c);
                } else {
                    across.push(c);
                }
            }
        }
        let mw = crate::stats::mean(&within);
        let ma = crate::stats::mean(&across);
        let se = (crate::stats::stderr_of_mean(&within).powi(2)
            + crate::stats::stderr_of_mean(&across).powi(2))
        .sqrt();
        assert!(
            mw - ma >= 5.0 * se,
            "within {mw:.3} vs across {ma:.3} (5·se = {:.3})",
            5.0 * se
        );
    }

    #[test]
    fn centered_cosine_separates_flats_where_raw_cosine_saturates() {
        let bases = random_subspace_bases(2, 20, 2, 7);
        let mut rng = seeding::rng_for(8, "stream-test-flat-points");
        let flat_of = |basis: &DMatrix<f64>, rng: &mut rand_chacha::ChaCha8Rng| {
            let pts: Vec<Vec<f64>> = (0..30).map(|_| subspace_point(basis, rng)).collect();
            let cloud = PointCloud::new(20, pts).unwrap();
            let sig = Signature::fit(&cloud, &FitConfig::degree(1).homogeneous()).unwrap();
            flatten_symmetric(&sig.eps_projector())
        };
        let fa = flat_of(&bases[0], &mut rng);
        let fa2 = flat_of(&bases[0], &mut rng);
        let fb = flat_of(&bases[1], &mut rng);
        // Raw cosine between unrelated rank-18 projectors is already ≈ 0.9.
        let raw = attention_score(fa.as_slice(), fb.as_slice()).unwrap();
        assert!(raw > 0.8, "raw cosine {raw:.3}");
        // Centered cosine: same subspace ≈ 1, different ≈ 0.
        let same = centered_attention_score(&fa, &fa2, 1).unwrap();
        let diff = centered_attention_score(&fa, &fb, 1).unwrap();
        assert!(same > 0.95, "same-subspace centered cosine {same:.3}");
        assert!(diff < 0.5, "cross-subspace centered cosine {diff:.3}");
    }

    #[test]
    fn first_step_stores_item_without_grouping() {
        let mut stack = Stack::new(StackConfig::default()).unwrap();
        let report = stack.step(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(report.step, 1);
        assert!(report.layers[0].heads.is_empty());
        assert_eq!(report.layers[0].dictionary, DictionaryEvent::Inactive);
        assert!(report.layers[0].emitted_len.is_none());
        assert_eq!(stack.layer(0).items_seen(), 1);
        assert_eq!(stack.layer(1).items_seen(), 0);
        assert!(stack.layer(0).dictionary().is_empty());
    }

    #[test]
    fn buffer_keeps_the_last_m_items_in_order() {
        let mut config = StackConfig::default();
        config.layers.truncate(1);
        config.layers[0].buffer_len = 5;
        let mut stack = Stack::new(config).unwrap();
        for i in 0..12 {
            stack.step(&[i as f64 + 1.0, 1.0]).unwrap();
        }
        let steps: Vec<u64> = stack.layer(0).buffer().map(|(s, _)| s).collect();
        assert_eq!(steps, vec![8, 9, 10, 11, 12]);
    }

    #[test]
    fn dictionary_lookup_thresholds() {
        let mut state = LayerState::new(0, LayerConfig::default(), Some(1));
        // Entry: flat of a 2×2 projector onto e₁ = diag(1, 0) → [1, 0, 0].
        let entry_flat = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        state.dictionary.push(DictionaryEntry {
            id: 0,
            flat: entry_flat.clone(),
            signatures: Vec::new(),
            hits: 1,
            created_step: 1,
        });
        // Exact duplicate → matched at score 1.
        let (id, score) = state.dictionary_lookup(&entry_flat);
        assert_eq!(id, Some(0));
        assert!((score - 1.0).abs() < 1e-12);
        // A flat at centered cosine below the match threshold → none.
        let other = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let (id, score) = state.dictionary_lookup(&other);
        assert_eq!(id, None);
        assert!(score < DEFAULT_MATCH_THRESHOLD, "score {score}");
    }

    fn three_subspace_stream(n: usize, seed: u64) -> (Vec<DMatrix<f64>>, Vec<(usize, Vec<f64>)>) {
        let bases = random_subspace_bases(3, 20, 2, seed);
        let mut rng = seeding::rng_for(seed, "stream-test-interleave");
        let pts = (0..n)
            .map(|i| {
                let s = i % 3;
                (s, subspace_point(&bases[s], &mut rng))
            })
            .collect();
        (bases, pts)
    }

    #[test]
    fn interleaved_subspace_stream_groups_purely_and_learns_the_dictionary() {
        let (bases, pts) = three_subspace_stream(300, 11);
        let mut stack = Stack::new(StackConfig::default()).unwrap();
        let mut label_of_step: Vec<usize> = vec![usize::MAX]; // index by step id
        let mut purities = Vec::new();
        let warmup = stack.layer(0).config().warmup();
        for (label, p) in &pts {
            let report = stack.step(p).unwrap();
            label_of_step.push(*label);
            if report.step > warmup {
                if let Some(head) = report.layers[0].heads.first() {
                    let same = head
                        .selected
                        .iter()
                        .filter(|(s, _)| label_of_step[*s as usize] == *label)
                        .count();
                    purities.push(same as f64 / head.selected.len() as f64);
                }
            }
        }
        let purity = crate::stats::mean(&purities);
        assert!(purity >= 0.95, "top-K purity {purity:.3}");

        // Dictionary: ≥ 3 entries, each close to one latent subspace's
        // offline-fit flat, and every subspace claimed by some entry.
        let dict = stack.layer(0).dictionary();
        assert!(dict.len() >= 3, "dictionary holds {} entries", dict.len());
        let offline: Vec<DVector<f64>> = (0..3)
            .map(|s| {
                let mine: Vec<Vec<f64>> = pts
                    .iter()
                    .filter(|(l, _)| *l == s)
                    .map(|(_, p)| p.clone())
                    .collect();
                let cloud = PointCloud::new(20, mine).unwrap();
                let sig = Signature::fit(&cloud, &FitConfig::degree(1).homogeneous()).unwrap();
                flatten_symmetric(&sig.eps_projector())
            })
            .collect();
        let mut claimed = [false; 3];
        for e in dict {
            let (best_s, best_c) = offline
                .iter()
                .enumerate()
                .map(|(s, f)| (s, centered_attention_score(&e.flat, f, 1).unwrap()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(
                best_c >= 0.9,
                "entry {} at cosine {best_c:.3} to its nearest subspace",
                e.id
            );
            claimed[best_s] = true;
        }
        assert!(claimed.iter().all(|&c| c), "some subspace has no dictionary entry");

        // Replay: the same stream adds no new entries.
        let before = dict.len();
        for (_, p) in &pts {
            stack.step(p).unwrap();
        }
        assert_eq!(stack.layer(0).dictionary().len(), before, "replay admitted new entries");
        let _ = bases;
    }

    #[test]
    fn identical_streams_produce_identical_reports() {
        let (_, pts) = three_subspace_stream(120, 13);
        let run = || {
            let mut stack = Stack::new(StackConfig::default()).unwrap();
            let mut out = String::new();
            for (_, p) in &pts {
                let r = stack.step(p).unwrap();
                out.push_str(&serde_json::to_string(&r).unwrap());
                out.push('\n');
            }
            out
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn dictionary_round_trips_through_disk() {
        let (_, pts) = three_subspace_stream(200, 17);
        let mut stack = Stack::new(StackConfig::default()).unwrap();
        for (_, p) in &pts {
            stack.step(p).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        save_dictionary(stack.layer(0), dir.path()).unwrap();
        let loaded = load_dictionary(dir.path()).unwrap();
        let dict = stack.layer(0).dictionary();
        assert_eq!(loaded.len(), dict.len());
        for (a, b) in loaded.iter().zip(dict) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.hits, b.hits);
            assert_eq!(a.created_step, b.created_step);
            assert!(
                (&a.flat - &b.flat).amax() < 1e-9,
                "flat for entry {} drifted on reload",
                a.id
            );
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = StackConfig::default();
        c.layers[0].heads.clear();
        assert!(Stack::new(c).is_err());
        let mut c = StackConfig::default();
        c.layers[0].match_threshold = 1.5;
        assert!(Stack::new(c).is_err());
        let mut c = StackConfig::default();
        c.layers[0].admit_threshold = 0.95; // above match 0.9
        assert!(Stack::new(c).is_err());
        assert!(Stack::new(StackConfig { layers: vec![] }).is_err());
    }
}
