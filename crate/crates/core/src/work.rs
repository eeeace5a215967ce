//! Work supports, the two-point-measurement POVM and distribution, the
//! weak-measurement quasi-distribution and the finite-spread interpolation
//! between them.

use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::matrix::{inner, C64, ComplexSquareMatrix};
use crate::state::DensityMatrix;
use crate::tol;
use crate::unitary::{time_ordered_unitary, UnitarySpec};

/// A driven protocol: initial Hamiltonian, drive, final Hamiltonian.
#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    h_initial: HamiltonianSpec,
    drive: UnitarySpec,
    h_final: HamiltonianSpec,
    resolved_drive: ComplexSquareMatrix,
}

impl PartialEq for ProtocolSpec {
    fn eq(&self, other: &Self) -> bool {
        self.h_initial == other.h_initial
            && self.drive == other.drive
            && self.h_final == other.h_final
    }
}

impl ProtocolSpec {
    pub fn new(
        h_initial: HamiltonianSpec,
        drive: UnitarySpec,
        h_final: HamiltonianSpec,
    ) -> Result<Self> {
        if h_initial.dim() != h_final.dim() {
            return Err(Error::DimensionMismatch {
                left: h_initial.dim(),
                right: h_final.dim(),
            });
        }
        let resolved_drive = time_ordered_unitary(&drive)?;
        if resolved_drive.dim() != h_initial.dim() {
            return Err(Error::DimensionMismatch {
                left: h_initial.dim(),
                right: resolved_drive.dim(),
            });
        }
        Ok(Self { h_initial, drive, h_final, resolved_drive })
    }

    pub fn dim(&self) -> usize {
        self.h_initial.dim()
    }

    pub fn h_initial(&self) -> &HamiltonianSpec {
        &self.h_initial
    }

    pub fn h_final(&self) -> &HamiltonianSpec {
        &self.h_final
    }

    pub fn drive(&self) -> &UnitarySpec {
        &self.drive
    }

    /// The drive resolved to a matrix at construction time.
    pub fn drive_matrix(&self) -> &ComplexSquareMatrix {
        &self.resolved_drive
    }

    /// Work value of the level pair (i, j): E'_j - E_i.
    pub fn work_value(&self, i: usize, j: usize) -> f64 {
        self.h_final.energy(j) - self.h_initial.energy(i)
    }

    /// U^dag |j'> : the final eigenvector pulled back through the drive.
    pub fn pulled_back_final_vector(&self, j: usize) -> Vec<C64> {
        self.resolved_drive.adjoint().apply(self.h_final.eigenvector(j))
    }

    /// The Heisenberg-picture postselection projector U^dag |j'><j'| U.
    pub fn heisenberg_projector(&self, j: usize) -> ComplexSquareMatrix {
        let v = self.pulled_back_final_vector(j);
        ComplexSquareMatrix::outer(&v, &v)
    }

    /// Scale-aware default for merging nearby work values.
    pub fn default_merge_tol(&self) -> f64 {
        let scale = self.h_initial.max_abs_energy().max(self.h_final.max_abs_energy());
        tol::effective(tol::MERGE_REL) * scale.max(1.0)
    }

    fn require_non_degenerate_initial(&self) -> Result<()> {
        if self.h_initial.is_degenerate() {
            let dtol = self.h_initial.degeneracy_tol();
            for i in 1..self.dim() {
                let gap = self.h_initial.energy(i) - self.h_initial.energy(i - 1);
                if gap.abs() <= dtol {
                    return Err(Error::DegenerateSpectrum { a: i - 1, b: i, gap });
                }
            }
        }
        Ok(())
    }

    fn check_state_dim(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { left: rho.dim(), right: self.dim() });
        }
        Ok(())
    }
}

impl Serialize for ProtocolSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("ProtocolSpec", 3)?;
        st.serialize_field("h_initial", &self.h_initial)?;
        st.serialize_field("drive", &self.drive)?;
        st.serialize_field("h_final", &self.h_final)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ProtocolSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            h_initial: HamiltonianSpec,
            drive: UnitarySpec,
            h_final: HamiltonianSpec,
        }
        let raw = Raw::deserialize(deserializer)?;
        ProtocolSpec::new(raw.h_initial, raw.drive, raw.h_final).map_err(D::Error::custom)
    }
}

/// Which measurement scheme produced a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Tpm,
    Weak,
    /// Finite pointer spread s.
    FiniteS(f64),
}

impl Kind {
    pub fn label(&self) -> &'static str {
        match self {
            Kind::Tpm => "tpm",
            Kind::Weak => "weak",
            Kind::FiniteS(_) => "finite_s",
        }
    }

    pub fn spread(&self) -> Option<f64> {
        match self {
            Kind::FiniteS(s) => Some(*s),
            _ => None,
        }
    }
}

/// One work value with its level pair and (quasi-)probability weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkPoint {
    pub w: f64,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

/// A work distribution: one point per level pair, until merged by work value.
///
/// Values sum to 1; they may be negative for the weak and finite-s kinds.
/// Negative values are kept at full precision, never clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkDistribution {
    pub kind: Kind,
    pub points: Vec<WorkPoint>,
    pub aggregated: bool,
}

impl WorkDistribution {
    pub fn total(&self) -> f64 {
        self.points.iter().map(|p| p.value).sum()
    }

    pub fn min_value(&self) -> f64 {
        self.points.iter().map(|p| p.value).fold(f64::INFINITY, f64::min)
    }

    /// The value at level pair (i, j); zero if absent (e.g. after merging).
    pub fn value_at(&self, i: usize, j: usize) -> f64 {
        self.points
            .iter()
            .find(|p| p.i == i && p.j == j)
            .map(|p| p.value)
            .unwrap_or(0.0)
    }

    /// Checks normalization and, for TPM, non-negativity.
    pub fn validate(&self) -> Result<()> {
        let total_dev = (self.total() - 1.0).abs();
        if total_dev > tol::effective(1e-10) {
            return Err(Error::InvalidInput(format!(
                "distribution total deviates from 1 by {total_dev:.3e}"
            )));
        }
        if matches!(self.kind, Kind::Tpm) {
            let min = self.min_value();
            if min < -1e-12 {
                return Err(Error::NotAProbability { min_value: min });
            }
        }
        Ok(())
    }

    /// Largest entrywise difference to another distribution over the union of
    /// level pairs.
    pub fn max_entrywise_diff(&self, other: &WorkDistribution) -> f64 {
        let mut max = 0.0_f64;
        for p in &self.points {
            max = max.max((p.value - other.value_at(p.i, p.j)).abs());
        }
        for p in &other.points {
            max = max.max((p.value - self.value_at(p.i, p.j)).abs());
        }
        max
    }

    /// CSV rows `w,i,j,value` (no header).
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for p in &self.points {
            out.push_str(&format!("{},{},{},{}\n", p.w, p.i, p.j, p.value));
        }
        out
    }
}

impl Serialize for WorkDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = if self.kind.spread().is_some() { 4 } else { 3 };
        let mut st = serializer.serialize_struct("WorkDistribution", n)?;
        st.serialize_field("kind", self.kind.label())?;
        if let Some(s) = self.kind.spread() {
            st.serialize_field("s", &s)?;
        }
        st.serialize_field("points", &self.points)?;
        st.serialize_field("aggregated", &self.aggregated)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for WorkDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            kind: String,
            s: Option<f64>,
            points: Vec<WorkPoint>,
            aggregated: bool,
        }
        let raw = Raw::deserialize(deserializer)?;
        let kind = match (raw.kind.as_str(), raw.s) {
            ("tpm", None) => Kind::Tpm,
            ("weak", None) => Kind::Weak,
            ("finite_s", Some(s)) => Kind::FiniteS(s),
            _ => {
                return Err(D::Error::custom(
                    "kind must be tpm, weak, or finite_s (with an `s` field)",
                ))
            }
        };
        Ok(WorkDistribution { kind, points: raw.points, aggregated: raw.aggregated })
    }
}

/// One POVM element of the two-point-measurement scheme, labelled by its
/// level pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PovmElement {
    pub matrix: ComplexSquareMatrix,
    pub i: usize,
    pub j: usize,
}

/// A group of level pairs sharing one work value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkGroup {
    pub w: f64,
    pub pairs: Vec<(usize, usize)>,
}

/// All work values of a protocol, grouped by coincidence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkSupport {
    pub groups: Vec<WorkGroup>,
    /// True when distinct level pairs produce the same work value.
    pub matching_gaps: bool,
}

/// Enumerates the d^2 work values E'_j - E_i and groups those closer than
/// `merge_tol`.
pub fn work_support(p: &ProtocolSpec, merge_tol: f64) -> WorkSupport {
    let d = p.dim();
    let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            entries.push((p.work_value(i, j), i, j));
        }
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut groups: Vec<WorkGroup> = Vec::new();
    for (w, i, j) in entries {
        match groups.last_mut() {
            // Anchored grouping: compare against the group's first w so the
            // result is idempotent under re-merging at the same tolerance.
            Some(g) if (w - g.w).abs() <= merge_tol => g.pairs.push((i, j)),
            _ => groups.push(WorkGroup { w, pairs: vec![(i, j)] }),
        }
    }
    let matching_gaps = groups.iter().any(|g| g.pairs.len() >= 2);
    WorkSupport { groups, matching_gaps }
}

/// The two-point-measurement POVM: M_(i,j) = |<j'|U|i>|^2 |i><i|.
pub fn tpm_povm(p: &ProtocolSpec) -> Vec<PovmElement> {
    let d = p.dim();
    let u = p.drive_matrix();
    let mut elements = Vec::with_capacity(d * d);
    for i in 0..d {
        let u_i = u.apply(p.h_initial().eigenvector(i));
        let proj = p.h_initial().projector(i);
        for j in 0..d {
            let amp = inner(p.h_final().eigenvector(j), &u_i);
            elements.push(PovmElement { matrix: proj.scale_re(amp.norm_sqr()), i, j });
        }
    }
    elements
}

fn transition_probabilities(p: &ProtocolSpec) -> Vec<Vec<f64>> {
    let d = p.dim();
    let u = p.drive_matrix();
    (0..d)
        .map(|i| {
            let u_i = u.apply(p.h_initial().eigenvector(i));
            (0..d)
                .map(|j| inner(p.h_final().eigenvector(j), &u_i).norm_sqr())
                .collect()
        })
        .collect()
}

/// The TPM work distribution: value at (i, j) is p_i * p_{j|i} with
/// p_i = <i|rho|i> and p_{j|i} = |<j'|U|i>|^2.
#[allow(clippy::needless_range_loop)] // i, j are also the point labels
pub fn tpm_distribution(rho: &DensityMatrix, p: &ProtocolSpec) -> Result<WorkDistribution> {
    p.check_state_dim(rho)?;
    let d = p.dim();
    let transitions = transition_probabilities(p);
    let mut points = Vec::with_capacity(d * d);
    for i in 0..d {
        let p_i = rho.population(p.h_initial(), i);
        for j in 0..d {
            points.push(WorkPoint {
                w: p.work_value(i, j),
                i,
                j,
                value: p_i * transitions[i][j],
            });
        }
    }
    Ok(WorkDistribution { kind: Kind::Tpm, points, aggregated: false })
}

#[allow(clippy::needless_range_loop)] // i, j are also the point labels
fn weak_points(rho: &DensityMatrix, p: &ProtocolSpec) -> Vec<WorkPoint> {
    let d = p.dim();
    // value(i, j) = Re tr(rho E_i Pi_j) = Re( <i|jt> <jt|rho|i> ),
    // with |jt> = U^dag |j'>.
    let pulled: Vec<Vec<C64>> = (0..d).map(|j| p.pulled_back_final_vector(j)).collect();
    let mut points = Vec::with_capacity(d * d);
    for i in 0..d {
        let ket_i = p.h_initial().eigenvector(i);
        let rho_i = rho.matrix().apply(ket_i);
        for j in 0..d {
            let value = (inner(ket_i, &pulled[j]) * inner(&pulled[j], &rho_i)).re;
            points.push(WorkPoint { w: p.work_value(i, j), i, j, value });
        }
    }
    points
}

/// The weak-measurement work quasi-distribution:
/// value at (i, j) is Re tr(rho E_i Pi_j). Values may be negative.
///
/// Rejects degenerate initial spectra: the scheme couples to rank-1
/// eigenprojectors of H(0). See [`weak_distribution_in_stored_basis`] for the
/// opt-in degenerate mode.
pub fn weak_distribution(rho: &DensityMatrix, p: &ProtocolSpec) -> Result<WorkDistribution> {
    p.check_state_dim(rho)?;
    p.require_non_degenerate_initial()?;
    Ok(WorkDistribution { kind: Kind::Weak, points: weak_points(rho, p), aggregated: false })
}

/// Opt-in degenerate mode: treats each stored eigenvector of H(0) as its own
/// rank-1 coupling even inside degenerate blocks, and returns the basis that
/// was used alongside the distribution.
pub fn weak_distribution_in_stored_basis(
    rho: &DensityMatrix,
    p: &ProtocolSpec,
) -> Result<(WorkDistribution, Vec<Vec<C64>>)> {
    p.check_state_dim(rho)?;
    let dist =
        WorkDistribution { kind: Kind::Weak, points: weak_points(rho, p), aggregated: false };
    Ok((dist, p.h_initial().eigenvectors().to_vec()))
}

/// The finite-spread distribution: TPM plus e^{-1/(4s^2)} times the
/// weak-minus-TPM correction, entrywise.
///
/// This composition form makes the s -> 0 limit collapse onto the TPM values
/// exactly; the equivalent sandwich form tr(Pi E rho E) + e^{-1/(4s^2)}
/// Re tr(Pi E rho E_perp) is checked against it in tests.
pub fn finite_s_distribution(
    rho: &DensityMatrix,
    p: &ProtocolSpec,
    s: f64,
) -> Result<WorkDistribution> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidInput(format!(
            "pointer spread s must be positive, got {s}"
        )));
    }
    p.check_state_dim(rho)?;
    p.require_non_degenerate_initial()?;
    let tpm = tpm_distribution(rho, p)?;
    let weak_pts = weak_points(rho, p);
    let k = (-1.0 / (4.0 * s * s)).exp();
    let points = tpm
        .points
        .iter()
        .zip(&weak_pts)
        .map(|(t, w)| WorkPoint {
            w: t.w,
            i: t.i,
            j: t.j,
            value: t.value + k * (w.value - t.value),
        })
        .collect();
    Ok(WorkDistribution { kind: Kind::FiniteS(s), points, aggregated: false })
}

/// sum_w p(w) w.
pub fn average_work(d: &WorkDistribution) -> f64 {
    d.points.iter().map(|p| p.value * p.w).sum()
}

/// Merges points whose work values differ by at most `merge_tol`.
///
/// The merged point keeps the first (lowest-(w,i,j)) pair of its group as a
/// representative label. Idempotent at fixed tolerance.
pub fn merge_by_work(d: &WorkDistribution, merge_tol: f64) -> WorkDistribution {
    let mut sorted = d.points.clone();
    sorted.sort_by(|a, b| a.w.total_cmp(&b.w).then(a.i.cmp(&b.i)).then(a.j.cmp(&b.j)));
    let mut merged: Vec<WorkPoint> = Vec::new();
    for p in sorted {
        match merged.last_mut() {
            Some(m) if (p.w - m.w).abs() <= merge_tol => m.value += p.value,
            _ => merged.push(p),
        }
    }
    WorkDistribution { kind: d.kind, points: merged, aggregated: true }
}
