//! Four-state density-matrix model of a single position measurement.
//!
//! The basis is the product of two system positions `f1`, `f2` with three
//! detector configurations: `S` (ready) and `S1`/`S2` (having recorded
//! `f1`/`f2`). Only four product states participate:
//!
//! ```text
//! index 0: f1 S     index 2: f1 S1
//! index 1: f2 S     index 3: f2 S2
//! ```
//!
//! A run walks the pipeline `Initial -> Entangled -> Decohered ->
//! Collapsed`. Entangling is a pure basis relabeling (`f_i S -> f_i S_i`),
//! decohering zeroes coherences between distinct detector records, and
//! collapsing samples one branch from the surviving diagonal.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{CoreError, Result};

/// Max tolerated deviation from Hermitian symmetry.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Max tolerated deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted as "positive semidefinite".
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

/// Ordered labels of the four basis states.
pub const BASIS_LABELS: [&str; 4] = ["f1S", "f2S", "f1S1", "f2S2"];

/// One of the four basis states; doubles as a collapse outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    F1S = 0,
    F2S = 1,
    F1S1 = 2,
    F2S2 = 3,
}

impl Branch {
    pub const ALL: [Branch; 4] = [Branch::F1S, Branch::F2S, Branch::F1S1, Branch::F2S2];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        BASIS_LABELS[self.index()]
    }

    fn from_index(i: usize) -> Branch {
        Branch::ALL[i]
    }

    /// Detector configuration this basis state carries: 0 for the ready
    /// state `S`, 1 for `S1`, 2 for `S2`.
    fn detector(self) -> usize {
        match self {
            Branch::F1S | Branch::F2S => 0,
            Branch::F1S1 => 1,
            Branch::F2S2 => 2,
        }
    }
}

/// Pipeline position of a [`MeasurementState`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Initial,
    Entangled,
    Decohered,
    Collapsed,
}

impl Stage {
    pub fn label(&self) -> &'static str {
        match self {
            Stage::Initial => "Initial",
            Stage::Entangled => "Entangled",
            Stage::Decohered => "Decohered",
            Stage::Collapsed => "Collapsed",
        }
    }
}

/// Density matrix plus its pipeline stage.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementState {
    rho: Matrix4<Complex64>,
    stage: Stage,
    collapsed_branch: Option<Branch>,
}

impl MeasurementState {
    /// Wraps a raw matrix after checking the density-matrix invariants.
    pub fn new(rho: Matrix4<Complex64>, stage: Stage) -> Result<Self> {
        let state = MeasurementState {
            rho,
            stage,
            collapsed_branch: None,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn rho(&self) -> &Matrix4<Complex64> {
        &self.rho
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    /// Branch selected by [`collapse_sample`], once collapsed.
    pub fn collapsed_branch(&self) -> Option<Branch> {
        self.collapsed_branch
    }

    /// Diagonal entry (branch population) as a real number.
    pub fn population(&self, branch: Branch) -> f64 {
        self.rho[(branch.index(), branch.index())].re
    }

    /// `trace(rho^2)`; one for pure states, `1/n` for an even mixture
    /// over `n` branches.
    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// Checks Hermiticity, unit trace, and positive semidefiniteness.
    pub fn validate(&self) -> Result<()> {
        let mut herm_err: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let diff = self.rho[(i, j)] - self.rho[(j, i)].conj();
                herm_err = herm_err.max(diff.norm());
            }
        }
        if herm_err > HERMITICITY_TOL {
            return Err(CoreError::MatrixInvariant(format!(
                "Hermitian asymmetry {herm_err:.3e} exceeds {HERMITICITY_TOL:.1e}"
            )));
        }
        let trace = self.rho.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(CoreError::MatrixInvariant(format!(
                "trace {trace} differs from one by more than {TRACE_TOL:.1e}"
            )));
        }
        let min_eig = self
            .rho
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, &e| m.min(e));
        if min_eig < EIGENVALUE_FLOOR {
            return Err(CoreError::MatrixInvariant(format!(
                "eigenvalue {min_eig:.3e} below floor {EIGENVALUE_FLOOR:.1e}"
            )));
        }
        Ok(())
    }

    fn expect_stage(&self, allowed: &[Stage], expected: &'static str) -> Result<()> {
        if allowed.contains(&self.stage) {
            Ok(())
        } else {
            Err(CoreError::StageMismatch {
                expected,
                found: self.stage.label(),
            })
        }
    }
}

/// Pure system superposition `sqrt(w1) f1 + sqrt(w2) f2` with the
/// detector ready: populations `w1`, `w2` and coherence `sqrt(w1 w2)` in
/// the upper-left block.
pub fn initial_state(weight_f1: f64, weight_f2: f64) -> Result<MeasurementState> {
    for (name, w) in [("weight_f1", weight_f1), ("weight_f2", weight_f2)] {
        if !(w.is_finite() && w >= 0.0) {
            return Err(CoreError::invalid(
                name,
                format!("must be finite and nonnegative, got {w}"),
            ));
        }
    }
    if (weight_f1 + weight_f2 - 1.0).abs() > TRACE_TOL {
        return Err(CoreError::invalid(
            "weights",
            format!(
                "must sum to one within {TRACE_TOL:.1e}, got {}",
                weight_f1 + weight_f2
            ),
        ));
    }
    let mut rho = Matrix4::zeros();
    let cross = (weight_f1 * weight_f2).sqrt();
    rho[(0, 0)] = Complex64::new(weight_f1, 0.0);
    rho[(1, 1)] = Complex64::new(weight_f2, 0.0);
    rho[(0, 1)] = Complex64::new(cross, 0.0);
    rho[(1, 0)] = Complex64::new(cross, 0.0);
    Ok(MeasurementState {
        rho,
        stage: Stage::Initial,
        collapsed_branch: None,
    })
}

/// Index permutation implementing `f1 S -> f1 S1`, `f2 S -> f2 S2`.
const ENTANGLE_PERMUTATION: [usize; 4] = [2, 3, 0, 1];

/// Lets the detector record the system state: relabels `f_i S` to
/// `f_i S_i`. A permutation of the basis, so spectrum and purity are
/// preserved exactly.
pub fn entangle(state: &MeasurementState) -> Result<MeasurementState> {
    state.expect_stage(&[Stage::Initial], "Initial")?;
    let mut rho = Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            rho[(ENTANGLE_PERMUTATION[i], ENTANGLE_PERMUTATION[j])] = state.rho[(i, j)];
        }
    }
    Ok(MeasurementState {
        rho,
        stage: Stage::Entangled,
        collapsed_branch: None,
    })
}

/// Environmental selection of the detector basis: zeroes every coherence
/// between basis states with distinct detector records (`S`, `S1`, `S2`),
/// keeping the diagonal. Idempotent, so an already-decohered state passes
/// through unchanged.
pub fn decohere(state: &MeasurementState) -> Result<MeasurementState> {
    state.expect_stage(&[Stage::Entangled, Stage::Decohered], "Entangled")?;
    let mut rho = state.rho;
    for i in 0..4 {
        for j in 0..4 {
            if Branch::from_index(i).detector() != Branch::from_index(j).detector() {
                rho[(i, j)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    Ok(MeasurementState {
        rho,
        stage: Stage::Decohered,
        collapsed_branch: None,
    })
}

/// Samples one branch from the decohered diagonal and projects onto it.
///
/// Returns the post-measurement pure state together with the sampled
/// branch. The caller supplies the random stream, so outcomes are
/// reproducible from the seed alone.
pub fn collapse_sample<R: Rng + ?Sized>(
    state: &MeasurementState,
    rng: &mut R,
) -> Result<(MeasurementState, Branch)> {
    state.expect_stage(&[Stage::Decohered], "Decohered")?;
    // Tiny negative populations within the PSD floor are treated as zero.
    let weights: [f64; 4] = std::array::from_fn(|i| state.rho[(i, i)].re.max(0.0));
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(CoreError::MatrixInvariant(
            "diagonal carries no probability to sample".to_string(),
        ));
    }
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = 3;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            chosen = i;
            break;
        }
    }
    let branch = Branch::from_index(chosen);
    let mut rho = Matrix4::zeros();
    rho[(chosen, chosen)] = Complex64::new(1.0, 0.0);
    Ok((
        MeasurementState {
            rho,
            stage: Stage::Collapsed,
            collapsed_branch: Some(branch),
        },
        branch,
    ))
}
