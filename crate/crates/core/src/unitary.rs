//! Drives: explicit unitaries or piecewise-constant Hamiltonian schedules.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::eigh::eigh;
use crate::error::{Error, Result};
use crate::matrix::{C64, ComplexSquareMatrix};
use crate::tol;

/// One piecewise-constant segment: evolve under `hamiltonian` for `duration`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSegment {
    #[serde(rename = "h")]
    pub hamiltonian: ComplexSquareMatrix,
    #[serde(rename = "dt")]
    pub duration: f64,
}

/// The drive of a protocol: either the unitary itself or a schedule whose
/// time-ordered product realizes it.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitarySpec {
    Explicit(ComplexSquareMatrix),
    Schedule(Vec<ScheduleSegment>),
}

impl UnitarySpec {
    pub fn dim(&self) -> Option<usize> {
        match self {
            UnitarySpec::Explicit(m) => Some(m.dim()),
            UnitarySpec::Schedule(segments) => segments.first().map(|s| s.hamiltonian.dim()),
        }
    }
}

/// Resolves a drive to its unitary matrix.
///
/// An explicit drive is returned verbatim after a unitarity check. A schedule
/// yields the ordered product of segment exponentials exp(-i H_k dt_k), later
/// segments multiplied on the left. Zero-duration segments contribute the
/// identity.
pub fn time_ordered_unitary(u: &UnitarySpec) -> Result<ComplexSquareMatrix> {
    match u {
        UnitarySpec::Explicit(m) => {
            let dev = m.unitarity_deviation();
            if dev > tol::effective(tol::UNITARY) {
                return Err(Error::NotUnitary { deviation: dev });
            }
            Ok(m.clone())
        }
        UnitarySpec::Schedule(segments) => {
            if segments.is_empty() {
                return Err(Error::InvalidInput("schedule has no segments".into()));
            }
            let dim = segments[0].hamiltonian.dim();
            let mut product = ComplexSquareMatrix::identity(dim);
            for segment in segments {
                if segment.hamiltonian.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        left: dim,
                        right: segment.hamiltonian.dim(),
                    });
                }
                if !segment.duration.is_finite() || segment.duration < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "segment duration must be non-negative, got {}",
                        segment.duration
                    )));
                }
                let step = expm_minus_i_ht(&segment.hamiltonian, segment.duration)?;
                product = step.matmul(&product);
            }
            Ok(product)
        }
    }
}

/// exp(-i H t) by spectral decomposition of the Hermitian generator.
pub fn expm_minus_i_ht(h: &ComplexSquareMatrix, t: f64) -> Result<ComplexSquareMatrix> {
    let spec = eigh(h)?;
    let d = spec.dim();
    let mut out = ComplexSquareMatrix::zeros(d);
    for i in 0..d {
        let phase = C64::from_polar(1.0, -spec.energy(i) * t);
        out = out.add(&spec.projector(i).scale(phase));
    }
    Ok(out)
}

impl Serialize for UnitarySpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct ExplicitRepr<'a> {
            explicit: &'a ComplexSquareMatrix,
        }
        #[derive(Serialize)]
        struct ScheduleRepr<'a> {
            segments: &'a [ScheduleSegment],
        }
        match self {
            UnitarySpec::Explicit(m) => ExplicitRepr { explicit: m }.serialize(serializer),
            UnitarySpec::Schedule(segments) => ScheduleRepr { segments }.serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for UnitarySpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            explicit: Option<ComplexSquareMatrix>,
            segments: Option<Vec<ScheduleSegment>>,
        }
        let repr = Repr::deserialize(deserializer)?;
        match (repr.explicit, repr.segments) {
            (Some(m), None) => Ok(UnitarySpec::Explicit(m)),
            (None, Some(s)) => Ok(UnitarySpec::Schedule(s)),
            _ => Err(D::Error::custom(
                "drive must have exactly one of `explicit` or `segments`",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_unitary_returned_verbatim() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let had = ComplexSquareMatrix::from_real_rows(&[&[s, s], &[s, -s]]).unwrap();
        let out = time_ordered_unitary(&UnitarySpec::Explicit(had.clone())).unwrap();
        assert_eq!(out, had);
    }

    #[test]
    fn explicit_non_unitary_rejected() {
        let m = ComplexSquareMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap();
        assert!(matches!(
            time_ordered_unitary(&UnitarySpec::Explicit(m)),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn single_diagonal_segment() {
        // H = diag(0, w), time t: U = diag(1, e^{-i w t}).
        let omega = 0.7;
        let t = 1.3;
        let seg = ScheduleSegment {
            hamiltonian: ComplexSquareMatrix::diagonal(&[0.0, omega]),
            duration: t,
        };
        let u = time_ordered_unitary(&UnitarySpec::Schedule(vec![seg])).unwrap();
        assert!((u[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((u[(1, 1)] - C64::from_polar(1.0, -omega * t)).norm() < 1e-14);
        assert!(u[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn zero_duration_segment_gives_identity() {
        let seg = ScheduleSegment {
            hamiltonian: ComplexSquareMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
                .unwrap(),
            duration: 0.0,
        };
        let u = time_ordered_unitary(&UnitarySpec::Schedule(vec![seg])).unwrap();
        assert!(u.max_abs_diff(&ComplexSquareMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn commuting_segments_merge_exactly() {
        let h = ComplexSquareMatrix::from_real_rows(&[&[0.3, 0.1], &[0.1, -0.2]]).unwrap();
        let split = UnitarySpec::Schedule(vec![
            ScheduleSegment { hamiltonian: h.clone(), duration: 0.4 },
            ScheduleSegment { hamiltonian: h.clone(), duration: 0.6 },
        ]);
        let merged = UnitarySpec::Schedule(vec![ScheduleSegment {
            hamiltonian: h,
            duration: 1.0,
        }]);
        let a = time_ordered_unitary(&split).unwrap();
        let b = time_ordered_unitary(&merged).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
    }

    #[test]
    fn later_segments_act_on_the_left() {
        let hx = ComplexSquareMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let hz = ComplexSquareMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        let sched = UnitarySpec::Schedule(vec![
            ScheduleSegment { hamiltonian: hx.clone(), duration: 0.5 },
            ScheduleSegment { hamiltonian: hz.clone(), duration: 0.5 },
        ]);
        let u = time_ordered_unitary(&sched).unwrap();
        let ux = expm_minus_i_ht(&hx, 0.5).unwrap();
        let uz = expm_minus_i_ht(&hz, 0.5).unwrap();
        assert!(u.max_abs_diff(&uz.matmul(&ux)) < 1e-14);
    }

    #[test]
    fn json_round_trip_for_schedules() {
        let sched = UnitarySpec::Schedule(vec![ScheduleSegment {
            hamiltonian: ComplexSquareMatrix::diagonal(&[0.0, 1.0]),
            duration: 2.0,
        }]);
        let text = serde_json::to_string(&sched).unwrap();
        let back: UnitarySpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sched);
    }
}
