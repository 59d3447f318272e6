//! Hyperplane parameter readout from circuit outputs, and classification of
//! test points by sign of the kernelized decision function.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::Angle;
use crate::qcore::{Counts, StateVector};

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("readout expects a 4-qubit record, got {0} qubits")]
    WrongQubitCount(usize),
    #[error("degenerate readout: both coefficients vanish")]
    DegenerateReadout,
    #[error("model coefficients are both zero")]
    DegenerateModel,
    #[error("baseline readout needs real amplitudes (max imaginary part {0:.3e})")]
    ComplexAmplitudes(f64),
    #[error("boundary normal vanishes")]
    DegenerateBoundary,
}

/// A binary class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Plus,
    Minus,
}

impl Label {
    /// sgn with sgn(0) = +1.
    pub fn from_sign(x: f64) -> Self {
        if x >= 0.0 {
            Label::Plus
        } else {
            Label::Minus
        }
    }

    pub fn value(&self) -> i8 {
        match self {
            Label::Plus => 1,
            Label::Minus => -1,
        }
    }

    pub fn flipped(&self) -> Self {
        match self {
            Label::Plus => Label::Minus,
            Label::Minus => Label::Plus,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

/// The trained non-offset SVM: hyperplane coefficients (α₁, α₂), b fixed to
/// zero, the two training angles, and the regularization γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub alpha1: f64,
    pub alpha2: f64,
    pub b: f64,
    pub train_angles: (f64, f64),
    pub gamma: f64,
}

impl SvmModel {
    pub fn new(
        alpha: (f64, f64),
        train_angles: (Angle, Angle),
        gamma: f64,
    ) -> Result<Self, ClassifyError> {
        if alpha.0.abs() < 1e-12 && alpha.1.abs() < 1e-12 {
            return Err(ClassifyError::DegenerateModel);
        }
        Ok(Self {
            alpha1: alpha.0,
            alpha2: alpha.1,
            b: 0.0,
            train_angles: (train_angles.0 .0, train_angles.1 .0),
            gamma,
        })
    }

    /// True when one coefficient vanished, leaving a single-support model.
    pub fn is_degenerate(&self) -> bool {
        self.alpha1.abs() < 1e-9 || self.alpha2.abs() < 1e-9
    }
}

/// Hyperplane coefficients from the exact 4-qubit HHL output state:
/// α₁ = |a₁| and α₂ = −|a₃|, where a₁ and a₃ are the amplitudes of |0001⟩
/// and |0011⟩. The sign of α₂ is fixed by the known training labels
/// (+1, −1); the readout presumes the first training point carries +1.
pub fn readout_hhl(state: &StateVector) -> Result<(f64, f64), ClassifyError> {
    if state.num_qubits() != 4 {
        return Err(ClassifyError::WrongQubitCount(state.num_qubits()));
    }
    let a1 = state.amplitude(0b0001).norm();
    let a3 = state.amplitude(0b0011).norm();
    if a1 < 1e-9 && a3 < 1e-9 {
        return Err(ClassifyError::DegenerateReadout);
    }
    Ok((a1, -a3))
}

/// The same readout from measured counts: magnitudes are square roots of
/// relative frequencies, signs follow the exact-readout convention.
pub fn readout_hhl_from_counts(counts: &Counts) -> Result<(f64, f64), ClassifyError> {
    if counts.num_qubits != 4 {
        return Err(ClassifyError::WrongQubitCount(counts.num_qubits));
    }
    let a1 = counts.frequency("0001").sqrt();
    let a3 = counts.frequency("0011").sqrt();
    if a1 < 1e-9 && a3 < 1e-9 {
        return Err(ClassifyError::DegenerateReadout);
    }
    Ok((a1, -a3))
}

/// Hyperplane coefficients from the baseline circuit's exact output state:
/// α₁ sums the amplitudes of the eight basis states with the third qubit 0
/// (a₀+a₁+a₄+a₅+a₈+a₉+a₁₂+a₁₃), α₂ the eight with it 1. Amplitudes must be
/// real, which the Ry-only encoding guarantees.
pub fn readout_baseline(state: &StateVector) -> Result<(f64, f64), ClassifyError> {
    if state.num_qubits() != 4 {
        return Err(ClassifyError::WrongQubitCount(state.num_qubits()));
    }
    let worst_imag =
        state.amplitudes().iter().map(|a| a.im.abs()).fold(0.0, f64::max);
    if worst_imag > 1e-6 {
        return Err(ClassifyError::ComplexAmplitudes(worst_imag));
    }
    let mut sums = [0.0f64; 2];
    for (i, a) in state.amplitudes().iter().enumerate() {
        sums[(i >> 1) & 1] += a.re;
    }
    if sums[0].abs() < 1e-9 && sums[1].abs() < 1e-9 {
        return Err(ClassifyError::DegenerateReadout);
    }
    Ok((sums[0], sums[1]))
}

/// Baseline readout from counts. Frequencies destroy the relative sign, so
/// the convention α₁ = +√P(q₃=0), α₂ = −√P(q₃=1) is applied, matching the
/// exact readout for the fixed (+1, −1) training labels.
pub fn readout_baseline_from_counts(counts: &Counts) -> Result<(f64, f64), ClassifyError> {
    if counts.num_qubits != 4 {
        return Err(ClassifyError::WrongQubitCount(counts.num_qubits));
    }
    let mut probs = [0.0f64; 2];
    for (bits, &n) in &counts.table {
        let bit = bits.as_bytes()[2] == b'1';
        probs[usize::from(bit)] += n as f64 / counts.shots as f64;
    }
    let (a1, a2) = (probs[0].sqrt(), -probs[1].sqrt());
    if a1 < 1e-9 && a2.abs() < 1e-9 {
        return Err(ClassifyError::DegenerateReadout);
    }
    Ok((a1, a2))
}

/// Labels a test angle by sgn(α₁·cos(θ₁−θ₀) + α₂·cos(θ₂−θ₀) + b); the
/// linear kernel of two unit vectors is the cosine of their angle gap.
pub fn classify_point(model: &SvmModel, test_angle: Angle) -> Label {
    let t0 = test_angle.0;
    let score = model.alpha1 * (model.train_angles.0 - t0).cos()
        + model.alpha2 * (model.train_angles.1 - t0).cos()
        + model.b;
    Label::from_sign(score)
}

/// The through-origin decision boundary {x : w·x = 0} with
/// w = α₁x⃗₁ + α₂x⃗₂ recovered from the training angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryLine {
    /// Unit normal of the separating line.
    pub normal: (f64, f64),
    /// Unit direction along the line.
    pub direction: (f64, f64),
}

pub fn decision_boundary(model: &SvmModel) -> Result<BoundaryLine, ClassifyError> {
    let (t1, t2) = model.train_angles;
    let w = (
        model.alpha1 * t1.cos() + model.alpha2 * t2.cos(),
        model.alpha1 * t1.sin() + model.alpha2 * t2.sin(),
    );
    let norm = (w.0 * w.0 + w.1 * w.1).sqrt();
    if norm < 1e-9 {
        return Err(ClassifyError::DegenerateBoundary);
    }
    let normal = (w.0 / norm, w.1 / norm);
    Ok(BoundaryLine { normal, direction: (-normal.1, normal.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{angle_of, UnitPoint};
    use crate::qcore::{C64, StateVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn paper_train_angles() -> (Angle, Angle) {
        let x1 = UnitPoint::renormalized(0.987, 0.159).unwrap();
        let x2 = UnitPoint::renormalized(0.345, 0.935).unwrap();
        (angle_of(&x1), angle_of(&x2))
    }

    #[test]
    fn hhl_readout_pure_basis_state() {
        let state = StateVector::basis(4, 0b0001);
        let (a1, a2) = readout_hhl(&state).unwrap();
        assert_eq!(a1, 1.0);
        assert_eq!(a2, 0.0);
    }

    #[test]
    fn hhl_readout_degenerate_errors() {
        let state = StateVector::basis(4, 0b0000);
        assert!(matches!(readout_hhl(&state), Err(ClassifyError::DegenerateReadout)));
    }

    #[test]
    fn baseline_readout_basis_and_uniform() {
        let state = StateVector::basis(4, 0);
        let (a1, a2) = readout_baseline(&state).unwrap();
        assert_eq!((a1, a2), (1.0, 0.0));

        let uniform = StateVector::new(4, vec![C64::new(0.25, 0.0); 16]).unwrap();
        let (a1, a2) = readout_baseline(&uniform).unwrap();
        assert!((a1 - 2.0).abs() < 1e-12);
        assert!((a2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn classify_training_points_get_their_labels() {
        let (t1, t2) = paper_train_angles();
        let model = SvmModel::new((2.0, -2.0), (t1, t2), 8.0).unwrap();
        assert_eq!(classify_point(&model, t1), Label::Plus);
        assert_eq!(classify_point(&model, t2), Label::Minus);
    }

    #[test]
    fn boundary_point_gets_plus_by_convention() {
        let (t1, t2) = paper_train_angles();
        let model = SvmModel::new((2.0, -2.0), (t1, t2), 8.0).unwrap();
        // Exactly on the bisector the score vanishes and sgn(0) = +1.
        let mid = Angle((t1.0 + t2.0) / 2.0);
        let score = model.alpha1 * (model.train_angles.0 - mid.0).cos()
            + model.alpha2 * (model.train_angles.1 - mid.0).cos();
        assert!(score.abs() < 1e-12);
        assert_eq!(classify_point(&model, mid), Label::Plus);
    }

    #[test]
    fn classification_is_scale_invariant() {
        let (t1, t2) = paper_train_angles();
        let base = SvmModel::new((2.0, -2.0), (t1, t2), 8.0).unwrap();
        let scaled = SvmModel::new((0.31 * 2.0, 0.31 * -2.0), (t1, t2), 8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..500 {
            let theta = Angle(rng.gen_range(-PI..PI));
            assert_eq!(classify_point(&base, theta), classify_point(&scaled, theta));
        }
    }

    #[test]
    fn swapping_training_points_negates_labels() {
        let (t1, t2) = paper_train_angles();
        let model = SvmModel::new((2.0, -2.0), (t1, t2), 8.0).unwrap();
        let swapped = SvmModel::new((2.0, -2.0), (t2, t1), 8.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        for _ in 0..500 {
            let theta = Angle(rng.gen_range(-PI..PI));
            let a = classify_point(&model, theta);
            let b = classify_point(&swapped, theta);
            // Skip exact boundary hits where sgn(0) breaks the symmetry.
            let score = 2.0 * ((t1.0 - theta.0).cos() - (t2.0 - theta.0).cos());
            if score.abs() < 1e-12 {
                continue;
            }
            assert_eq!(a, b.flipped());
        }
    }

    #[test]
    fn boundary_for_symmetric_alpha() {
        let model =
            SvmModel::new((1.0, -1.0), (Angle(0.0), Angle(FRAC_PI_2)), 8.0).unwrap();
        let b = decision_boundary(&model).unwrap();
        // w = (1, 0) − (0, 1) = (1, −1); the line runs along (1, 1).
        let w = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b.normal.0 - w).abs() < 1e-12);
        assert!((b.normal.1 + w).abs() < 1e-12);
        assert!((b.direction.0 - b.direction.1).abs() < 1e-12);
    }

    #[test]
    fn degenerate_model_rejected() {
        assert!(matches!(
            SvmModel::new((0.0, 0.0), (Angle(0.0), Angle(1.0)), 8.0),
            Err(ClassifyError::DegenerateModel)
        ));
        let single = SvmModel::new((1.0, 0.0), (Angle(0.0), Angle(1.0)), 8.0).unwrap();
        assert!(single.is_degenerate());
    }
}
