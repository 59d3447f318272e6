//! End-to-end orchestration: dataset → preprocessing → kernel circuit →
//! F matrix → solver circuit → readout → classification → report.
//!
//! All randomness flows from one seed. Sampling call sites derive disjoint
//! streams by offsetting that seed with fixed constants, so a report is
//! byte-identical across runs and independent of parallel scheduling.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuits::{
    self, build_baseline_qsvm, build_hhl_optimized, build_oracle_new, build_oracle_original,
    paper_hhl_angles, Circuit, BASELINE_Y_PREP_ANGLE,
};
use crate::classify::{
    classify_point, decision_boundary, readout_baseline, readout_baseline_from_counts,
    readout_hhl, readout_hhl_from_counts, Label, SvmModel,
};
use crate::data::{self, LabeledDataset};
use crate::kernelgen::{
    build_f, khat_from_counts, khat_from_probabilities, solve_ls_svm_classical, KernelMatrix,
};
use crate::metrics::{accuracy, dist_from_counts, dist_from_state, js_divergence};
use crate::preprocess::{
    normalize, solve_mapping_coefficients, Angle, AngleMode, MappedPoint, MappingCoefficients,
    RawPoint, UnitPoint, OCR_MAP, PAPER_TARGETS,
};
use crate::qcore::{
    reduced_density_matrix, run_exact, run_noisy, sample, Counts, NoiseModel, StateVector,
};

const KERNEL_SAMPLE_SALT: u64 = 0x4b45524e;
const READOUT_SAMPLE_SALT: u64 = 0x52454144;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
    #[error(transparent)]
    Preprocess(#[from] crate::preprocess::PreprocessError),
    #[error(transparent)]
    Kernel(#[from] crate::kernelgen::KernelError),
    #[error(transparent)]
    Classify(#[from] crate::classify::ClassifyError),
    #[error(transparent)]
    Core(#[from] crate::qcore::QcoreError),
    #[error(transparent)]
    Circuit(#[from] crate::circuits::CircuitError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
}

impl PipelineError {
    /// Process exit code: 2 for data problems, 3 for numeric or degenerate
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Data(_) => 2,
            _ => 3,
        }
    }
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DatasetSource {
    BuiltinIris,
    IrisCsv(PathBuf),
    OcrDir(PathBuf),
    SyntheticOcr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircuitChoice {
    HhlOptimized,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleChoice {
    New,
    Original,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub dataset: DatasetSource,
    pub angle_mode: AngleMode,
    pub circuit: CircuitChoice,
    pub oracle: OracleChoice,
    pub shots: u64,
    pub noise: Option<NoiseModel>,
    pub gamma: f64,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(dataset: DatasetSource) -> Self {
        Self {
            dataset,
            angle_mode: AngleMode::QuadrantAware,
            circuit: CircuitChoice::HhlOptimized,
            oracle: OracleChoice::New,
            shots: 8192,
            noise: None,
            gamma: crate::kernelgen::DEFAULT_GAMMA,
            seed: 7,
        }
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// One test point at every preprocessing stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagePoint {
    pub raw: RawPoint,
    pub mapped: MappedPoint,
    pub unit: UnitPoint,
    pub angle: f64,
    pub truth: i8,
    pub predicted: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_plus: usize,
    pub false_plus: usize,
    pub true_minus: usize,
    pub false_minus: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: String,
    pub circuit: CircuitChoice,
    pub oracle: OracleChoice,
    pub angle_mode: AngleMode,
    pub seed: u64,
    pub shots: u64,
    pub gamma: f64,
    pub noisy: bool,
    pub mapping: MappingCoefficients,
    pub training_angles: (f64, f64),
    pub khat: [[f64; 2]; 2],
    pub f_exact: [[f64; 2]; 2],
    pub f_rounded: Option<[[f64; 2]; 2]>,
    pub f_rounded_eigenvalues: Option<(f64, f64)>,
    pub alpha: (f64, f64),
    pub alpha_classical: (f64, f64),
    pub circuit_depth: usize,
    pub accuracy: f64,
    pub confusion: Confusion,
    pub boundary_normal: (f64, f64),
    pub js_vs_ideal: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: RunReport,
    pub stages: Vec<StagePoint>,
    pub model: SvmModel,
}

// ---------------------------------------------------------------------------
// Pipeline stages
// ---------------------------------------------------------------------------

pub struct Prepared {
    pub dataset: LabeledDataset,
    pub mapping: MappingCoefficients,
    pub train_units: (UnitPoint, UnitPoint),
    pub train_angles: (Angle, Angle),
    pub warnings: Vec<String>,
}

/// Loads the dataset, derives the training points (class means for Iris,
/// the printed glyphs for OCR), and fixes the linear map: solved
/// coefficients for Iris-like data, the fixed published map for OCR.
pub fn prepare(config: &PipelineConfig) -> Result<Prepared, PipelineError> {
    let (dataset, train_raw, mapping) = match &config.dataset {
        DatasetSource::BuiltinIris => {
            let ds = data::builtin_iris();
            let means = data::training_points_from_class_means(&ds)?;
            let coeffs = solve_mapping_coefficients(&means.0, &means.1, &PAPER_TARGETS)?;
            (ds, means, coeffs)
        }
        DatasetSource::IrisCsv(path) => {
            let ds = data::load_iris(path)?;
            let means = data::training_points_from_class_means(&ds)?;
            let coeffs = solve_mapping_coefficients(&means.0, &means.1, &PAPER_TARGETS)?;
            (ds, means, coeffs)
        }
        DatasetSource::OcrDir(dir) => {
            let ds = data::load_ocr_images(dir)?;
            let train = ocr_training_points_for_dir(dir)?;
            (ds, train, OCR_MAP)
        }
        DatasetSource::SyntheticOcr => {
            let ds = data::synth::synthetic_ocr_dataset(data::synth::CORPUS_SEED);
            (ds, data::synth::training_points(), OCR_MAP)
        }
    };
    let mut warnings = dataset.warnings.clone();
    let u1 = normalize(&mapping.apply(&train_raw.0))?;
    let u2 = normalize(&mapping.apply(&train_raw.1))?;
    let a1 = config.angle_mode.angle(&u1)?;
    let a2 = config.angle_mode.angle(&u2)?;
    if (u1.x1 - 0.987).abs() > 0.05 || (u1.x2 - 0.159).abs() > 0.05 {
        warnings.push(format!(
            "first training point ({:.3}, {:.3}) strays from the canonical (0.987, 0.159)",
            u1.x1, u1.x2
        ));
    }
    Ok(Prepared {
        dataset,
        mapping,
        train_units: (u1, u2),
        train_angles: (a1, a2),
        warnings,
    })
}

/// Training points for a user-supplied OCR directory: its own
/// train_6.pbm/train_9.pbm when present, otherwise the bundled glyphs.
fn ocr_training_points_for_dir(dir: &std::path::Path) -> Result<(RawPoint, RawPoint), PipelineError> {
    let six = dir.join("train_6.pbm");
    let nine = dir.join("train_9.pbm");
    if six.exists() && nine.exists() {
        let load = |p: &std::path::Path| -> Result<RawPoint, PipelineError> {
            let text = std::fs::read_to_string(p).map_err(|source| {
                crate::data::DataError::Io { path: p.display().to_string(), source }
            })?;
            let img = data::BinaryImage::from_pbm(&text)?;
            Ok(crate::preprocess::extract_hr_vr(&img)?)
        };
        Ok((load(&six)?, load(&nine)?))
    } else {
        Ok(data::synth::training_points())
    }
}

/// The normalized kernel from the configured oracle circuit, via classical
/// result readout (no tomography). Exact execution reads amplitudes from
/// Born probabilities; a noisy run reads them from counts, which assumes
/// nonnegative amplitudes (valid for angles in [0, π/2]).
pub fn kernel_from_oracle(
    config: &PipelineConfig,
    train_angles: (Angle, Angle),
) -> Result<(KernelMatrix, usize), PipelineError> {
    let angles = [train_angles.0 .0, train_angles.1 .0];
    match config.oracle {
        OracleChoice::Original => {
            let circuit = build_oracle_original(&angles)?;
            let depth = circuit.depth();
            let rho = match &config.noise {
                None => {
                    let state = run_exact(&circuit, &StateVector::zero(2))?;
                    let p = state.probabilities();
                    khat_from_probabilities(&[p[0], p[1], p[2], p[3]])?
                }
                Some(noise) => {
                    let counts = run_noisy(&circuit, &StateVector::zero(2), noise, config.shots)?;
                    khat_from_counts(&counts)?
                }
            };
            Ok((KernelMatrix::from_density(&rho)?, depth))
        }
        OracleChoice::New => {
            let circuit = build_oracle_new(&angles)?;
            let depth = circuit.depth();
            let units = match &config.noise {
                None => {
                    let state = run_exact(&circuit, &StateVector::zero(2))?;
                    per_qubit_units_exact(&state)?
                }
                Some(noise) => {
                    let counts = run_noisy(&circuit, &StateVector::zero(2), noise, config.shots)?;
                    per_qubit_units_from_counts(&counts)
                }
            };
            Ok((crate::kernelgen::khat_from_product_states(&units)?, depth))
        }
    }
}

/// Per-qubit marginal states of an exact product-state run, signs taken
/// from the off-diagonal of each reduced density matrix.
fn per_qubit_units_exact(state: &StateVector) -> Result<Vec<UnitPoint>, PipelineError> {
    let mut units = Vec::with_capacity(state.num_qubits());
    for q in 0..state.num_qubits() {
        let rho = reduced_density_matrix(state, q)?;
        let x1 = rho.entry(0, 0).re.max(0.0).sqrt();
        let mag = rho.entry(1, 1).re.max(0.0).sqrt();
        let x2 = if rho.entry(0, 1).re < 0.0 { -mag } else { mag };
        units.push(UnitPoint { x1, x2 });
    }
    Ok(units)
}

/// Per-qubit marginal frequencies of a counts record, nonnegative branch.
fn per_qubit_units_from_counts(counts: &Counts) -> Vec<UnitPoint> {
    let n = counts.num_qubits;
    let mut ones = vec![0.0f64; n];
    for (bits, &c) in &counts.table {
        for (q, ch) in bits.bytes().enumerate() {
            if ch == b'1' {
                ones[q] += c as f64;
            }
        }
    }
    ones.iter()
        .map(|&o| {
            let f1 = (o / counts.shots as f64).clamp(0.0, 1.0);
            UnitPoint { x1: (1.0 - f1).sqrt(), x2: f1.sqrt() }
        })
        .collect()
}

/// Builds and runs the configured solver circuit and reads out the
/// hyperplane coefficients.
pub fn solve_alpha_with_circuit(
    config: &PipelineConfig,
) -> Result<((f64, f64), Circuit), PipelineError> {
    let (r1, r2) = paper_hhl_angles();
    let circuit = match config.circuit {
        CircuitChoice::HhlOptimized => build_hhl_optimized(r1, r2),
        CircuitChoice::Baseline => build_baseline_qsvm(BASELINE_Y_PREP_ANGLE, r1, r2),
    };
    let alpha = match &config.noise {
        None => {
            let state = run_exact(&circuit, &StateVector::zero(4))?;
            match config.circuit {
                CircuitChoice::HhlOptimized => readout_hhl(&state)?,
                CircuitChoice::Baseline => readout_baseline(&state)?,
            }
        }
        Some(noise) => {
            let mut salted = noise.clone();
            salted.seed = noise.seed.wrapping_add(READOUT_SAMPLE_SALT);
            let counts = run_noisy(&circuit, &StateVector::zero(4), &salted, config.shots)?;
            match config.circuit {
                CircuitChoice::HhlOptimized => readout_hhl_from_counts(&counts)?,
                CircuitChoice::Baseline => readout_baseline_from_counts(&counts)?,
            }
        }
    };
    Ok((alpha, circuit))
}

/// JS divergence between a circuit's ideal Born distribution and its noisy
/// empirical distribution.
pub fn js_vs_ideal(
    circuit: &Circuit,
    noise: &NoiseModel,
    shots: u64,
) -> Result<f64, PipelineError> {
    let ideal = dist_from_state(&run_exact(circuit, &StateVector::zero(circuit.num_qubits()))?);
    let noisy = dist_from_counts(&run_noisy(
        circuit,
        &StateVector::zero(circuit.num_qubits()),
        noise,
        shots,
    )?);
    Ok(js_divergence(&ideal, &noisy)?)
}

/// Runs the full pipeline for one configuration.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    let prepared = prepare(config)?;
    let mut warnings = prepared.warnings.clone();

    let (khat, _oracle_depth) = kernel_from_oracle(config, prepared.train_angles)?;
    let f = build_f(&khat, config.gamma)?;
    let f_rounded = f.paper_form();
    if f_rounded.is_none() {
        warnings.push(
            "exact F strays too far from the hard-wired [[1,0.5],[0.5,1]] form; \
             the solver circuit's eigenvalue encoding may not apply"
                .to_string(),
        );
    }
    let alpha_classical = solve_ls_svm_classical(&f, &[1.0, -1.0])?;

    let ((a1, a2), circuit) = solve_alpha_with_circuit(config)?;
    let model = SvmModel::new((a1, a2), prepared.train_angles, config.gamma)?;
    if model.is_degenerate() {
        warnings.push("readout produced a degenerate coefficient (one alpha is zero)".to_string());
    }

    let mut stages = Vec::with_capacity(prepared.dataset.points.len());
    let mut predicted = Vec::with_capacity(prepared.dataset.points.len());
    let mut truths = Vec::with_capacity(prepared.dataset.points.len());
    for (raw, truth) in &prepared.dataset.points {
        let mapped = prepared.mapping.apply(raw);
        let unit = normalize(&mapped)?;
        let angle = config.angle_mode.angle(&unit)?;
        let label = classify_point(&model, angle);
        stages.push(StagePoint {
            raw: *raw,
            mapped,
            unit,
            angle: angle.0,
            truth: truth.value(),
            predicted: label.value(),
        });
        predicted.push(label);
        truths.push(*truth);
    }
    let acc = accuracy(&predicted, &truths)?;
    let mut confusion = Confusion { true_plus: 0, false_plus: 0, true_minus: 0, false_minus: 0 };
    for (p, t) in predicted.iter().zip(truths.iter()) {
        match (p, t) {
            (Label::Plus, Label::Plus) => confusion.true_plus += 1,
            (Label::Plus, Label::Minus) => confusion.false_plus += 1,
            (Label::Minus, Label::Minus) => confusion.true_minus += 1,
            (Label::Minus, Label::Plus) => confusion.false_minus += 1,
        }
    }

    let js = match &config.noise {
        Some(noise) => Some(js_vs_ideal(&circuit, noise, config.shots)?),
        None => None,
    };

    let boundary = decision_boundary(&model)?;
    let khat2 = [[khat.entry(0, 0), khat.entry(0, 1)], [khat.entry(1, 0), khat.entry(1, 1)]];
    let report = RunReport {
        dataset: prepared.dataset.name.clone(),
        circuit: config.circuit,
        oracle: config.oracle,
        angle_mode: config.angle_mode,
        seed: config.seed,
        shots: config.shots,
        gamma: config.gamma,
        noisy: config.noise.is_some(),
        mapping: prepared.mapping,
        training_angles: (prepared.train_angles.0 .0, prepared.train_angles.1 .0),
        khat: khat2,
        f_exact: [[f.entry(0, 0), f.entry(0, 1)], [f.entry(1, 0), f.entry(1, 1)]],
        f_rounded,
        f_rounded_eigenvalues: f_rounded.map(|m| crate::kernelgen::sym2_eigenvalues(&m)),
        alpha: (a1, a2),
        alpha_classical: (alpha_classical[0], alpha_classical[1]),
        circuit_depth: circuit.depth(),
        accuracy: acc,
        confusion,
        boundary_normal: boundary.normal,
        js_vs_ideal: js,
        warnings,
    };
    Ok(PipelineOutput { report, stages, model })
}

// ---------------------------------------------------------------------------
// Divergence studies
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub shots: u64,
    pub noise: NoiseModel,
    pub depth_hhl: usize,
    pub depth_baseline: usize,
    pub js_hhl: f64,
    pub js_baseline: f64,
    pub kl_forward_hhl: f64,
    pub kl_forward_baseline: f64,
    pub sweep: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub depolarizing: f64,
    pub js_hhl_median: f64,
    pub js_baseline_median: f64,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs[xs.len() / 2]
}

/// Median JS over several independent noisy runs of one circuit.
pub fn median_js(
    circuit: &Circuit,
    noise: &NoiseModel,
    shots: u64,
    runs: u64,
) -> Result<f64, PipelineError> {
    let mut vals = Vec::with_capacity(runs as usize);
    for r in 0..runs {
        let mut n = noise.clone();
        n.seed = noise.seed.wrapping_add(r.wrapping_mul(0x9e3779b9));
        vals.push(js_vs_ideal(circuit, &n, shots)?);
    }
    Ok(median(vals))
}

/// Compares noisy-vs-ideal JS divergence of the short and deep circuits
/// under identical noise, and sweeps depolarizing levels.
pub fn divergence_report(
    noise: &NoiseModel,
    shots: u64,
    runs: u64,
) -> Result<DivergenceReport, PipelineError> {
    let (r1, r2) = paper_hhl_angles();
    let hhl = build_hhl_optimized(r1, r2);
    let baseline = build_baseline_qsvm(BASELINE_Y_PREP_ANGLE, r1, r2);

    let js_hhl = median_js(&hhl, noise, shots, runs)?;
    let js_baseline = median_js(&baseline, noise, shots, runs)?;

    // Forward KL(ideal‖noisy) alongside JS, for the record.
    let kl = |circuit: &Circuit| -> Result<f64, PipelineError> {
        let ideal = dist_from_state(&run_exact(circuit, &StateVector::zero(4))?);
        let noisy = dist_from_counts(&run_noisy(circuit, &StateVector::zero(4), noise, shots)?);
        Ok(crate::metrics::kl_divergence(&ideal, &noisy)?)
    };

    let mut sweep = Vec::new();
    for level in [0.0, 0.01, 0.03, 0.1] {
        let mut n = noise.clone();
        n.depolarizing_prob_1q = level;
        n.depolarizing_prob_2q = level;
        sweep.push(SweepRow {
            depolarizing: level,
            js_hhl_median: median_js(&hhl, &n, shots, runs)?,
            js_baseline_median: median_js(&baseline, &n, shots, runs)?,
        });
    }

    Ok(DivergenceReport {
        shots,
        noise: noise.clone(),
        depth_hhl: hhl.depth(),
        depth_baseline: baseline.depth(),
        js_hhl,
        js_baseline,
        kl_forward_hhl: kl(&hhl)?,
        kl_forward_baseline: kl(&baseline)?,
        sweep,
    })
}

/// Exact kernel readout sampled at finite shots (the tomography-free path
/// used for reporting K̂ under sampling error).
pub fn khat_sampled(
    train_angles: (Angle, Angle),
    shots: u64,
    seed: u64,
) -> Result<crate::qcore::DensityMatrix2, PipelineError> {
    let circuit = build_oracle_original(&[train_angles.0 .0, train_angles.1 .0])?;
    let state = run_exact(&circuit, &StateVector::zero(2))?;
    let counts = sample(&state, shots, None, seed.wrapping_add(KERNEL_SAMPLE_SALT))?;
    Ok(khat_from_counts(&counts)?)
}

/// Depth-table rows for the two oracles.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DepthTableRow {
    pub training_data: u64,
    pub original_depth: u64,
    pub original_depth_constructed: Option<u64>,
    pub new_depth: u64,
    pub original_qubits: u64,
    pub new_qubits: u64,
}

pub fn depth_table(sizes: &[u64]) -> Result<Vec<DepthTableRow>, PipelineError> {
    let mut rows = Vec::new();
    for &m in sizes {
        let formula = circuits::oracle_depth_formula(m)?;
        let (orig_qubits, new_qubits) = circuits::oracle_qubit_counts(m)?;
        let constructed = match m {
            2 => Some(build_oracle_original(&vec![0.3; 2])?.depth() as u64),
            4 => Some(build_oracle_original(&vec![0.3; 4])?.depth() as u64),
            _ => None,
        };
        let new_depth = build_oracle_new(&vec![0.3; m as usize])?.depth() as u64;
        rows.push(DepthTableRow {
            training_data: m,
            original_depth: formula,
            original_depth_constructed: constructed,
            new_depth,
            original_qubits: orig_qubits,
            new_qubits,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iris_pipeline_reaches_paper_accuracy() {
        let config = PipelineConfig::new(DatasetSource::BuiltinIris);
        let out = run_pipeline(&config).unwrap();
        assert!(
            (out.report.accuracy - 0.97).abs() <= 0.01 + 1e-12,
            "accuracy {}",
            out.report.accuracy
        );
        assert_eq!(out.report.circuit_depth, 7);
    }

    #[test]
    fn iris_prior_art_matches_quadrant_mode() {
        // Every mapped Iris point sits in the upper half-plane, where the
        // arccot rule is faithful, so both modes agree.
        let mut config = PipelineConfig::new(DatasetSource::BuiltinIris);
        let quadrant = run_pipeline(&config).unwrap().report.accuracy;
        config.angle_mode = AngleMode::PriorArt;
        let prior = run_pipeline(&config).unwrap().report.accuracy;
        assert_eq!(quadrant, prior);
    }

    #[test]
    fn reports_are_deterministic() {
        let mut config = PipelineConfig::new(DatasetSource::BuiltinIris);
        config.noise = Some(NoiseModel::default_device(123));
        let a = run_pipeline(&config).unwrap();
        let b = run_pipeline(&config).unwrap();
        assert_eq!(
            serde_json::to_string(&a.report).unwrap(),
            serde_json::to_string(&b.report).unwrap()
        );
    }

    #[test]
    fn baseline_and_hhl_agree_on_iris() {
        let mut config = PipelineConfig::new(DatasetSource::BuiltinIris);
        let hhl = run_pipeline(&config).unwrap();
        config.circuit = CircuitChoice::Baseline;
        let baseline = run_pipeline(&config).unwrap();
        assert_eq!(hhl.report.accuracy, baseline.report.accuracy);
        assert_eq!(baseline.report.circuit_depth, 18);
    }

    #[test]
    fn synthetic_ocr_quadrant_mode_is_accurate() {
        let config = PipelineConfig::new(DatasetSource::SyntheticOcr);
        let out = run_pipeline(&config).unwrap();
        assert!(out.report.accuracy >= 0.95, "accuracy {}", out.report.accuracy);
    }

    #[test]
    fn synthetic_ocr_prior_art_fails_fourth_quadrant() {
        let mut config = PipelineConfig::new(DatasetSource::SyntheticOcr);
        config.angle_mode = AngleMode::PriorArt;
        let out = run_pipeline(&config).unwrap();
        // Lower-half points all flip under the arccot rule.
        let lower: Vec<_> = out.stages.iter().filter(|s| s.unit.x2 < 0.0).collect();
        assert!(!lower.is_empty());
        assert!(lower.iter().all(|s| s.predicted != s.truth));
        assert!(out.report.accuracy < 0.80, "accuracy {}", out.report.accuracy);
    }
}
