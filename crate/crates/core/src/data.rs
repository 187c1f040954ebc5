//! Bounding-box datasets: the JSON file format, splitting, synthetic scene
//! generation and the inclusion-ratio baseline.
//!
//! A dataset file looks like
//!
//! ```json
//! {
//!   "n": 18,
//!   "classes": [{"name": "car", "role": "whole", "parts": ["wheel", "door"]},
//!               {"name": "wheel", "role": "part", "parts": []}],
//!   "records": [{"id": "s0_b0", "features": [...], "bbox": [0.1, 0.2, 0.5, 0.6],
//!                "labels": ["car"], "scene": 0}],
//!   "pairs": [{"part": "s0_b1", "whole": "s0_b0", "positive": true}]
//! }
//! ```
//!
//! `bbox` is `[x1, y1, x2, y2]` in normalized image coordinates and `scene` is
//! optional. Synthetic features are laid out as
//! `[class scores | padding scores | x1, y1, x2, y2]`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RngState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Whole,
    Part,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassInfo {
    pub name: String,
    pub role: Role,
    /// Part classes a whole may contain; empty for parts.
    #[serde(default)]
    pub parts: Vec<String>,
}

pub type BBox = [f64; 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    pub id: String,
    pub features: Vec<f64>,
    pub bbox: BBox,
    #[serde(default)]
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartOfPair {
    pub part: String,
    pub whole: String,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub n: usize,
    pub classes: Vec<ClassInfo>,
    pub records: Vec<BoxRecord>,
    pub pairs: Vec<PartOfPair>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Dataset(msg.into())
}

fn check_bbox(b: &BBox) -> Result<()> {
    let [x1, y1, x2, y2] = *b;
    if !b.iter().all(|v| v.is_finite()) || !(x1 < x2 && y1 < y2) {
        return Err(invalid(format!("degenerate bounding box {b:?}")));
    }
    Ok(())
}

impl Dataset {
    /// Checks every structural invariant of the file format.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("feature dimension n must be positive"));
        }
        let mut roles = HashMap::new();
        for c in &self.classes {
            if c.name.is_empty() || !c.name.chars().all(|ch| ch.is_alphanumeric() || ch == '_' || ch == '.') {
                return Err(invalid(format!("class name `{}` is not a plain identifier", c.name)));
            }
            if roles.insert(c.name.as_str(), c.role).is_some() {
                return Err(invalid(format!("class `{}` declared twice", c.name)));
            }
        }
        for c in &self.classes {
            for p in &c.parts {
                match roles.get(p.as_str()) {
                    Some(Role::Part) => {}
                    Some(Role::Whole) => {
                        return Err(invalid(format!("`{}` lists whole class `{p}` as a part", c.name)))
                    }
                    None => return Err(invalid(format!("`{}` lists undeclared part `{p}`", c.name))),
                }
            }
            if c.role == Role::Part && !c.parts.is_empty() {
                return Err(invalid(format!("part class `{}` has parts", c.name)));
            }
        }
        let mut ids = HashSet::new();
        for r in &self.records {
            if !ids.insert(r.id.as_str()) {
                return Err(invalid(format!("duplicate record id `{}`", r.id)));
            }
            if r.features.len() != self.n {
                return Err(invalid(format!(
                    "record `{}` has {} features, expected {}",
                    r.id,
                    r.features.len(),
                    self.n
                )));
            }
            if r.features.iter().any(|x| !x.is_finite()) {
                return Err(invalid(format!("record `{}` has non-finite features", r.id)));
            }
            check_bbox(&r.bbox).map_err(|e| invalid(format!("record `{}`: {e}", r.id)))?;
            for l in &r.labels {
                if !roles.contains_key(l.as_str()) {
                    return Err(invalid(format!("record `{}` has unknown label `{l}`", r.id)));
                }
            }
        }
        for p in &self.pairs {
            for id in [&p.part, &p.whole] {
                if !ids.contains(id.as_str()) {
                    return Err(invalid(format!("pair references unknown record `{id}`")));
                }
            }
            if p.part == p.whole {
                return Err(invalid(format!("pair relates `{}` to itself", p.part)));
            }
        }
        Ok(())
    }

    pub fn record_index(&self) -> HashMap<&str, usize> {
        self.records.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect()
    }

    pub fn record(&self, id: &str) -> Option<&BoxRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn class_names(&self) -> Vec<&str> {
        self.classes.iter().map(|c| c.name.as_str()).collect()
    }

    /// True when every record carries at least one label.
    pub fn is_labeled(&self) -> bool {
        self.records.iter().all(|r| !r.labels.is_empty())
    }

    fn subset(&self, keep: &HashSet<&str>) -> (Dataset, usize) {
        let records: Vec<BoxRecord> = self
            .records
            .iter()
            .filter(|r| keep.contains(r.id.as_str()))
            .cloned()
            .collect();
        let mut dropped = 0;
        let pairs = self
            .pairs
            .iter()
            .filter(|p| {
                let a = keep.contains(p.part.as_str());
                let b = keep.contains(p.whole.as_str());
                if a != b {
                    dropped += 1;
                }
                a && b
            })
            .cloned()
            .collect();
        let ds = Dataset {
            n: self.n,
            classes: self.classes.clone(),
            records,
            pairs,
        };
        (ds, dropped)
    }
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    let ds: Dataset = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    ds.validate()?;
    Ok(ds)
}

pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    ds.validate()?;
    let mut text = serde_json::to_string_pretty(ds)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Both halves of a split plus the number of pairs that straddled it.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub dropped_pairs: usize,
}

fn check_ratio(ratio: f64) -> Result<()> {
    if ratio > 0.0 && ratio < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("split ratio {ratio} outside (0, 1)")))
    }
}

/// Record-level split stratified by class (the first label in sorted order).
/// Each class keeps `round(ratio·count)` records in train, clamped so both
/// sides get at least one. Pairs whose endpoints land on different sides are
/// dropped and counted.
pub fn split(ds: &Dataset, ratio: f64, rng: &mut RngState) -> Result<Split> {
    check_ratio(ratio)?;
    let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for r in &ds.records {
        let key = r.labels.iter().min().map_or("", String::as_str);
        groups.entry(key).or_default().push(&r.id);
    }
    let mut train = HashSet::new();
    for (class, mut ids) in groups {
        if ids.len() < 2 {
            return Err(invalid(format!("class `{class}` has fewer than 2 records")));
        }
        rng.shuffle(&mut ids);
        let k = ((ratio * ids.len() as f64).round() as usize).clamp(1, ids.len() - 1);
        train.extend(ids.into_iter().take(k));
    }
    Ok(finish_split(ds, &train))
}

fn finish_split(ds: &Dataset, train: &HashSet<&str>) -> Split {
    let test: HashSet<&str> = ds
        .records
        .iter()
        .map(|r| r.id.as_str())
        .filter(|id| !train.contains(id))
        .collect();
    let (train_ds, dropped) = ds.subset(train);
    let (test_ds, _) = ds.subset(&test);
    Split {
        train: train_ds,
        test: test_ds,
        dropped_pairs: dropped,
    }
}

/// Scene-level split: whole scenes go to one side, so no pair is dropped.
/// Records without a scene act as scenes of their own.
pub fn split_by_scene(ds: &Dataset, ratio: f64, rng: &mut RngState) -> Result<Split> {
    check_ratio(ratio)?;
    let mut scenes: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    for r in &ds.records {
        let key = match r.scene {
            Some(s) => format!("scene:{s:020}"),
            None => format!("record:{}", r.id),
        };
        scenes.entry(key).or_default().push(&r.id);
    }
    if scenes.len() < 2 {
        return Err(invalid("need at least 2 scenes to split"));
    }
    let mut groups: Vec<Vec<&str>> = scenes.into_values().collect();
    rng.shuffle(&mut groups);
    let k = ((ratio * groups.len() as f64).round() as usize).clamp(1, groups.len() - 1);
    let train: HashSet<&str> = groups.into_iter().take(k).flatten().collect();
    Ok(finish_split(ds, &train))
}

/// `[part.features; whole.features]`.
pub fn pair_features(part: &BoxRecord, whole: &BoxRecord) -> Vec<f64> {
    let mut v = Vec::with_capacity(part.features.len() + whole.features.len());
    v.extend_from_slice(&part.features);
    v.extend_from_slice(&whole.features);
    v
}

/// `area(b ∩ b′) / area(b)`: the share of `b` covered by `b′`.
pub fn inclusion_ratio(b: &BBox, b_prime: &BBox) -> Result<f64> {
    check_bbox(b)?;
    let w = (b[2].min(b_prime[2]) - b[0].max(b_prime[0])).max(0.0);
    let h = (b[3].min(b_prime[3]) - b[1].max(b_prime[1])).max(0.0);
    let area = (b[2] - b[0]) * (b[3] - b[1]);
    Ok((w * h / area).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WholeSpec {
    pub name: String,
    pub parts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub num_scenes: usize,
    pub wholes: Vec<WholeSpec>,
    /// Largest number of whole objects in one scene.
    pub max_wholes_per_scene: usize,
    /// Largest offset of each further whole from the previous one, as a
    /// fraction of the previous whole's size; smaller values mean more overlap.
    pub whole_offset: f64,
    /// Smallest number of visible parts per whole.
    pub min_parts_per_whole: usize,
    /// Standard deviation of the Gaussian noise on class scores.
    pub feature_noise: f64,
    /// Standard deviation of part-box corner jitter, relative to the whole's size.
    pub geometry_jitter: f64,
    /// Negative pairs sampled per positive pair.
    pub negative_ratio: f64,
    /// Total feature length; extra noise-only score slots pad up to it.
    /// `None` means `#classes + 4`.
    pub feature_dim: Option<usize>,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        let whole = |name: &str, parts: &[&str]| WholeSpec {
            name: name.into(),
            parts: parts.iter().map(|s| s.to_string()).collect(),
        };
        Self {
            num_scenes: 100,
            wholes: vec![
                whole("person", &["head", "arm", "leg"]),
                whole("bicycle", &["wheel", "saddle", "handlebar"]),
                whole("car", &["wheel", "door", "window"]),
                whole("chair", &["seat", "backrest", "leg"]),
            ],
            max_wholes_per_scene: 2,
            whole_offset: 0.5,
            min_parts_per_whole: 2,
            feature_noise: 0.15,
            geometry_jitter: 0.02,
            negative_ratio: 1.0,
            feature_dim: None,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    /// Whole classes in order, then part classes in first-mention order.
    pub fn classes(&self) -> Vec<ClassInfo> {
        let mut out: Vec<ClassInfo> = self
            .wholes
            .iter()
            .map(|w| ClassInfo {
                name: w.name.clone(),
                role: Role::Whole,
                parts: w.parts.clone(),
            })
            .collect();
        let mut seen = HashSet::new();
        for w in &self.wholes {
            for p in &w.parts {
                if seen.insert(p.clone()) {
                    out.push(ClassInfo {
                        name: p.clone(),
                        role: Role::Part,
                        parts: Vec::new(),
                    });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.num_scenes == 0 {
            return bad("num_scenes must be at least 1".into());
        }
        if self.wholes.is_empty() {
            return bad("at least one whole class is required".into());
        }
        if self.max_wholes_per_scene == 0 {
            return bad("max_wholes_per_scene must be at least 1".into());
        }
        if !(self.whole_offset >= 0.0 && self.whole_offset <= 1.0) {
            return bad("whole offset must lie in [0, 1]".into());
        }
        if self.min_parts_per_whole == 0 {
            return bad("min_parts_per_whole must be at least 1".into());
        }
        for w in &self.wholes {
            if w.parts.len() < self.min_parts_per_whole {
                return bad(format!("`{}` lists fewer than {} parts", w.name, self.min_parts_per_whole));
            }
        }
        if !(self.feature_noise >= 0.0 && self.feature_noise.is_finite()) {
            return bad("feature noise must be finite and non-negative".into());
        }
        if !(self.geometry_jitter >= 0.0 && self.geometry_jitter.is_finite()) {
            return bad("geometry jitter must be finite and non-negative".into());
        }
        if !(self.negative_ratio >= 0.0 && self.negative_ratio.is_finite()) {
            return bad("negative ratio must be finite and non-negative".into());
        }
        let min_dim = self.classes().len() + 4;
        if let Some(d) = self.feature_dim {
            if d < min_dim {
                return bad(format!("feature_dim {d} is below #classes + 4 = {min_dim}"));
            }
        }
        let probe = Dataset {
            n: min_dim,
            classes: self.classes(),
            records: Vec::new(),
            pairs: Vec::new(),
        };
        let whole_names: HashSet<&str> = self.wholes.iter().map(|w| w.name.as_str()).collect();
        for c in &probe.classes {
            if c.role == Role::Part && whole_names.contains(c.name.as_str()) {
                return bad(format!("`{}` is both a whole and a part", c.name));
            }
        }
        probe.validate()
    }

    pub fn n(&self) -> usize {
        self.feature_dim.unwrap_or(self.classes().len() + 4)
    }
}

fn uniform(rng: &mut RngState, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.uniform()
}

fn place_whole(rng: &mut RngState, anchor: Option<&BBox>, offset: f64) -> BBox {
    let w = uniform(rng, 0.3, 0.6);
    let h = uniform(rng, 0.3, 0.6);
    let (x1, y1) = match anchor {
        // Overlap the previous whole so that its parts also fall in this one.
        Some(a) => (
            (a[0] + uniform(rng, -offset, offset) * (a[2] - a[0])).clamp(0.0, 1.0 - w),
            (a[1] + uniform(rng, -offset, offset) * (a[3] - a[1])).clamp(0.0, 1.0 - h),
        ),
        None => (uniform(rng, 0.0, 1.0 - w), uniform(rng, 0.0, 1.0 - h)),
    };
    [x1, y1, x1 + w, y1 + h]
}

fn place_part(rng: &mut RngState, whole: &BBox, jitter: f64) -> BBox {
    let (ww, wh) = (whole[2] - whole[0], whole[3] - whole[1]);
    let pw = ww * uniform(rng, 0.2, 0.45);
    let ph = wh * uniform(rng, 0.2, 0.45);
    let x1 = whole[0] + uniform(rng, 0.0, ww - pw);
    let y1 = whole[1] + uniform(rng, 0.0, wh - ph);
    let base = [x1, y1, x1 + pw, y1 + ph];
    for _ in 0..20 {
        let mut b = base;
        b[0] += jitter * ww * rng.normal();
        b[2] += jitter * ww * rng.normal();
        b[1] += jitter * wh * rng.normal();
        b[3] += jitter * wh * rng.normal();
        for v in &mut b {
            *v = v.clamp(0.0, 1.0);
        }
        if b[2] - b[0] > 1e-3 && b[3] - b[1] > 1e-3 && inclusion_ratio(&b, whole).unwrap_or(0.0) >= 0.9 {
            return b;
        }
    }
    base
}

/// Generates `cfg.num_scenes` scenes of possibly overlapping whole objects,
/// each containing some of its part classes. Every part yields a positive pair
/// with its own whole; negatives are drawn from the other ordered box pairs of
/// the same scene.
pub fn gen_synthetic(cfg: &SyntheticConfig) -> Result<Dataset> {
    cfg.validate()?;
    let classes = cfg.classes();
    let n = cfg.n();
    let class_slot: HashMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.name.as_str(), i)).collect();
    let score_slots = n - 4;
    let mut rng = RngState::new(cfg.seed);
    let mut records = Vec::new();
    let mut pairs = Vec::new();

    for scene in 0..cfg.num_scenes {
        let count = 1 + rng.below(cfg.max_wholes_per_scene);
        let mut scene_boxes: Vec<(usize, BBox, usize)> = Vec::new();
        let mut positives: HashSet<(usize, usize)> = HashSet::new();
        let mut previous: Option<BBox> = None;
        for _ in 0..count {
            let wi = rng.below(cfg.wholes.len());
            let spec = &cfg.wholes[wi];
            let wbox = place_whole(&mut rng, previous.as_ref(), cfg.whole_offset);
            previous = Some(wbox);
            let whole_idx = scene_boxes.len();
            scene_boxes.push((class_slot[spec.name.as_str()], wbox, whole_idx));
            let k = cfg.min_parts_per_whole + rng.below(spec.parts.len() - cfg.min_parts_per_whole + 1);
            for pi in rng.sample_indices(spec.parts.len(), k) {
                let pbox = place_part(&mut rng, &wbox, cfg.geometry_jitter);
                positives.insert((scene_boxes.len(), whole_idx));
                scene_boxes.push((class_slot[spec.parts[pi].as_str()], pbox, whole_idx));
            }
        }
        let base = records.len();
        let id = |i: usize| format!("s{scene}_b{i}");
        for (i, &(class, bbox, _)) in scene_boxes.iter().enumerate() {
            let mut features = Vec::with_capacity(n);
            for slot in 0..score_slots {
                let clean = if slot == class { 1.0 } else { 0.0 };
                features.push((clean + cfg.feature_noise * rng.normal()).clamp(0.0, 1.0));
            }
            features.extend_from_slice(&bbox);
            records.push(BoxRecord {
                id: id(i),
                features,
                bbox,
                labels: vec![classes[class].name.clone()],
                scene: Some(scene),
            });
        }
        debug_assert_eq!(records.len() - base, scene_boxes.len());

        let mut positive_list: Vec<(usize, usize)> = positives.iter().copied().collect();
        positive_list.sort_unstable();
        for &(p, w) in &positive_list {
            pairs.push(PartOfPair {
                part: id(p),
                whole: id(w),
                positive: true,
            });
        }
        let mut candidates: Vec<(usize, usize)> = (0..scene_boxes.len())
            .flat_map(|a| (0..scene_boxes.len()).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b && !positives.contains(&(a, b)))
            .collect();
        let want = ((cfg.negative_ratio * positive_list.len() as f64).round() as usize).min(candidates.len());
        let picks = rng.sample_indices(candidates.len(), want);
        let mut chosen: Vec<(usize, usize)> = picks.into_iter().map(|i| candidates[i]).collect();
        chosen.sort_unstable();
        candidates.clear();
        for (a, b) in chosen {
            pairs.push(PartOfPair {
                part: id(a),
                whole: id(b),
                positive: false,
            });
        }
    }
    let ds = Dataset {
        n,
        classes,
        records,
        pairs,
    };
    ds.validate()?;
    Ok(ds)
}
