//! Batch driver: configuration, factorization sweeps, the majority-vote
//! protocol, and CSV/JSON results.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    assemble_partial_scheme, assemble_scheme, black_box_pair, Example, Hypothesis,
    MeasurementKind, Primitive, SchemeSpec, MAX_WIDTH,
};
use crate::classification::{
    answer_swap_correction, classify, estimate_success, majority_success_closed_form,
    majority_vote, ClassificationRule, SuccessEstimate,
};
use crate::error::{Error, Result};
use crate::simulator::{exact_distribution, sample_counts, sample_shots, Distribution, NoiseModel};
use crate::theory::{arc_function, multi_copy_bound};

/// Which `(w, d)` pairs to run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Shapes {
    /// Every divisor pair of `N` with `w` within the simulator cap.
    #[default]
    #[serde(with = "all_tag")]
    All,
    List(Vec<(usize, usize)>),
}

mod all_tag {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("all")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        match String::deserialize(d)?.as_str() {
            "all" => Ok(()),
            other => Err(D::Error::custom(format!("expected \"all\", got {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_shots() -> u64 {
    10_000
}

fn default_noise() -> NoiseModel {
    NoiseModel::default_fixture()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub example: Example,
    pub n_copies: usize,
    #[serde(default)]
    pub shapes: Shapes,
    #[serde(default)]
    pub primitive: Primitive,
    #[serde(default)]
    pub measurement: MeasurementKind,
    /// Shots per hypothesis.
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_noise")]
    pub noise: NoiseModel,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub root: usize,
    #[serde(default)]
    pub lambda_phase: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn new(example: Example, n_copies: usize) -> Self {
        Self {
            example,
            n_copies,
            shapes: Shapes::All,
            primitive: Primitive::Cnot,
            measurement: MeasurementKind::Short,
            shots: default_shots(),
            noise: default_noise(),
            seed: 0,
            root: 0,
            lambda_phase: 0.0,
            output: None,
            format: OutputFormat::Csv,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_copies == 0 {
            return Err(Error::InvalidConfig("n_copies must be positive".into()));
        }
        if self.shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        self.noise.validate().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        for (w, d) in self.shapes() {
            self.spec(w, d).validate().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        }
        Ok(())
    }

    /// Requested `(w, d)` pairs sorted by width.
    pub fn shapes(&self) -> Vec<(usize, usize)> {
        let mut v = match &self.shapes {
            Shapes::All => factorizations(self.n_copies, MAX_WIDTH),
            Shapes::List(list) => list.clone(),
        };
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn spec(&self, w: usize, d: usize) -> SchemeSpec {
        SchemeSpec::new(self.example.clone(), self.n_copies, w, d)
            .with_primitive(self.primitive)
            .with_measurement(self.measurement)
            .with_root(self.root)
            .with_lambda_phase(self.lambda_phase)
    }
}

/// Divisor pairs `(w, N/w)` with `w ≤ max_width`, by increasing `w`.
pub fn factorizations(n: usize, max_width: usize) -> Vec<(usize, usize)> {
    (1..=n.min(max_width)).filter(|w| n.is_multiple_of(*w)).map(|w| (w, n / w)).collect()
}

/// Child seed for one row and stream tag; independent of sweep order.
pub fn derive_seed(master: u64, w: usize, d: usize, tag: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((w as u64) << 40) ^ ((d as u64) << 8) ^ tag);
    rng.next_u64()
}

const TIE_STREAM: u64 = 2;

fn hypothesis_tag(h: Hypothesis) -> u64 {
    h.index() as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub w: usize,
    pub d: usize,
    pub measurement: MeasurementKind,
    pub p_succ_raw: f64,
    pub p_succ_swapped: f64,
    pub ties: u64,
    pub bound: f64,
    pub shots: u64,
    pub seed: u64,
    /// Seconds; excluded from determinism comparisons.
    pub wall_time: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
}

impl ExperimentResult {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        std::fs::write(path, self.render(format)?).map_err(|e| Error::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })
    }

    /// Row with the highest swapped success; first such row on ties.
    pub fn best(&self) -> Option<&ResultRow> {
        self.rows.iter().fold(None, |best: Option<&ResultRow>, r| match best {
            Some(b) if b.p_succ_swapped >= r.p_succ_swapped => Some(b),
            _ => Some(r),
        })
    }
}

/// Theoretical optimum for `N` uses of the configured pair.
pub fn theoretical_bound(example: &Example, n_copies: usize) -> Result<f64> {
    let pair = black_box_pair(example, n_copies)?;
    Ok(multi_copy_bound(arc_function(&pair.relative())?, n_copies))
}

fn exact_pair(spec: &SchemeSpec) -> Result<[Distribution; 2]> {
    Ok([
        exact_distribution(&assemble_scheme(spec, Hypothesis::H0)?)?,
        exact_distribution(&assemble_scheme(spec, Hypothesis::H1)?)?,
    ])
}

fn run_row(cfg: &ExperimentConfig, w: usize, d: usize, bound: f64) -> Result<ResultRow> {
    let start = Instant::now();
    let spec = cfg.spec(w, d);
    let [d0, d1] = exact_pair(&spec)?;
    let rule = ClassificationRule::for_measurement(cfg.measurement, &d0, &d1)?;
    let mut counts = Vec::with_capacity(2);
    for h in Hypothesis::BOTH {
        let circuit = assemble_scheme(&spec, h)?;
        let seed = derive_seed(cfg.seed, w, d, hypothesis_tag(h));
        counts.push(sample_counts(&circuit, cfg.shots, &cfg.noise, seed)?);
    }
    let mut ties = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, w, d, TIE_STREAM));
    let est = estimate_success(&counts[0], &counts[1], &rule, &mut ties)?;
    let swapped = answer_swap_correction(std::slice::from_ref(&est)).remove(0);
    Ok(ResultRow {
        w,
        d,
        measurement: cfg.measurement,
        p_succ_raw: est.p_succ,
        p_succ_swapped: swapped.p_succ,
        ties: est.ties,
        bound,
        shots: cfg.shots,
        seed: cfg.seed,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Simulates, classifies and scores every requested shape; rows come back
/// sorted by `(w, d)`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let bound = theoretical_bound(&cfg.example, cfg.n_copies)?;
    let rows = cfg
        .shapes()
        .into_par_iter()
        .map(|(w, d)| {
            run_row(cfg, w, d, bound).map_err(|e| Error::Row { w, d, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult { rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuboptimalReport {
    pub n_copies: usize,
    pub w: usize,
    pub d: usize,
    /// Majority-vote estimate from the simulated shots.
    pub estimate: SuccessEstimate,
    /// Per-qubit success measured over all qubits and shots.
    pub p_single_measured: f64,
    pub closed_form_measured: f64,
    /// `1/2 + sin(π/2w)/2`.
    pub p_single_noiseless: f64,
    pub closed_form_noiseless: f64,
}

/// `w` independent single-qubit sequential runs of depth `d` on Example 2,
/// each read out with the parity rule and combined per shot by majority
/// vote.
pub fn run_suboptimal(n_copies: usize, w: usize, d: usize, cfg: &ExperimentConfig) -> Result<SuboptimalReport> {
    if w == 0 || d == 0 || w * d != n_copies {
        return Err(Error::InvalidConfig(format!("w·d = {w}·{d} ≠ N = {n_copies}")));
    }
    if cfg.shots == 0 {
        return Err(Error::InvalidConfig("shots must be at least 1".into()));
    }
    cfg.noise.validate().map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let spec = SchemeSpec::new(Example::Example2, n_copies, 1, d).with_measurement(MeasurementKind::Parity);
    let rule = ClassificationRule::parity(1);
    let mut ties = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, w, d, TIE_STREAM));

    let (mut correct, mut single_correct, mut tie_count) = (0u64, 0u64, 0u64);
    for h in Hypothesis::BOTH {
        let circuit = assemble_partial_scheme(&spec, h)?;
        // Qubit q runs its own trajectories; the per-qubit seed mixes q into
        // the hypothesis tag.
        let per_qubit: Vec<Vec<u64>> = (0..w)
            .map(|q| {
                let seed = derive_seed(cfg.seed, w, d, 16 + 2 * q as u64 + hypothesis_tag(h));
                sample_shots(&circuit, cfg.shots, &cfg.noise, seed)
            })
            .collect::<Result<_>>()?;
        let mut labels = vec![Hypothesis::H0; w];
        for s in 0..cfg.shots as usize {
            for (q, outcomes) in per_qubit.iter().enumerate() {
                labels[q] = classify(outcomes[s], 1, &rule, &mut ties)?;
            }
            single_correct += labels.iter().filter(|&&l| l == h).count() as u64;
            if 2 * labels.iter().filter(|&&l| l == Hypothesis::H0).count() == w {
                tie_count += 1;
            }
            if majority_vote(&labels, &mut ties)? == h {
                correct += 1;
            }
        }
    }
    let p_single_measured = single_correct as f64 / (2 * cfg.shots * w as u64) as f64;
    let p_single_noiseless = 0.5 + 0.5 * (std::f64::consts::PI / (2.0 * w as f64)).sin();
    let estimate = SuccessEstimate {
        p_succ: correct as f64 / (2 * cfg.shots) as f64,
        shots: cfg.shots,
        ties: tie_count,
        bound: Some(multi_copy_bound(std::f64::consts::PI / n_copies as f64, n_copies)),
        swapped: false,
    };
    Ok(SuboptimalReport {
        n_copies,
        w,
        d,
        estimate,
        p_single_measured,
        closed_form_measured: majority_success_closed_form(w, p_single_measured),
        p_single_noiseless,
        closed_form_noiseless: majority_success_closed_form(w, p_single_noiseless),
    })
}
