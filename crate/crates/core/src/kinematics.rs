//! Constant-deceleration motion along a two-segment arrival path.
//!
//! Units: NM, minutes, NM/min, NM/min². Accelerations are signed and never
//! positive for valid profiles.

use thiserror::Error;

use crate::scenario::{ArrivalPath, SpeedProfile};

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("segment length must be positive, got {0} NM")]
    NonPositiveLength(f64),
    #[error("accelerating segment: speed rises from {v_start} to {v_end} NM/min")]
    Accelerating { v_start: f64, v_end: f64 },
    #[error("speeds must be strictly positive")]
    NonPositiveSpeed,
    #[error("offset {offset} NM outside path of length {length} NM")]
    OffsetOutOfRange { offset: f64, length: f64 },
}

/// Constant acceleration that takes `v_start` to `v_end` over `length` NM.
pub fn segment_accel(length: f64, v_start: f64, v_end: f64) -> Result<f64, KinematicsError> {
    if !(length > 0.0) {
        return Err(KinematicsError::NonPositiveLength(length));
    }
    if !(v_end > 0.0 && v_start > 0.0) {
        return Err(KinematicsError::NonPositiveSpeed);
    }
    if v_end > v_start {
        return Err(KinematicsError::Accelerating { v_start, v_end });
    }
    Ok((v_end * v_end - v_start * v_start) / (2.0 * length))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentKinematics {
    pub length: f64,
    pub v_start: f64,
    pub v_end: f64,
    pub accel: f64,
}

impl SegmentKinematics {
    pub fn new(length: f64, v_start: f64, v_end: f64) -> Result<Self, KinematicsError> {
        Ok(Self {
            length,
            v_start,
            v_end,
            accel: segment_accel(length, v_start, v_end)?,
        })
    }

    /// Flight time over the segment: length over the mean of the end speeds.
    pub fn time(&self) -> f64 {
        self.length / (0.5 * (self.v_start + self.v_end))
    }

    /// Speed after `d` NM from the segment start.
    pub fn speed_at(&self, d: f64) -> f64 {
        (self.v_start * self.v_start + 2.0 * self.accel * d).max(0.0).sqrt()
    }
}

/// Both segments of one aircraft class on one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathKinematics {
    pub approach: SegmentKinematics,
    pub final_segment: SegmentKinematics,
}

impl PathKinematics {
    pub fn new(
        d_entry_to_mpiap: f64,
        d_mpiap_to_thr: f64,
        profile: &SpeedProfile,
    ) -> Result<Self, KinematicsError> {
        Ok(Self {
            approach: SegmentKinematics::new(d_entry_to_mpiap, profile.v_entry, profile.v_mpiap)?,
            final_segment: SegmentKinematics::new(d_mpiap_to_thr, profile.v_mpiap, profile.v_thr)?,
        })
    }

    pub fn for_path(path: &ArrivalPath, profile: &SpeedProfile) -> Result<Self, KinematicsError> {
        Self::new(path.d_entry_to_mpiap, path.d_mpiap_to_thr, profile)
    }

    pub fn length(&self) -> f64 {
        self.approach.length + self.final_segment.length
    }

    pub fn flight_time(&self) -> f64 {
        self.approach.time() + self.final_segment.time()
    }

    pub fn speed_at_offset(&self, d_from_entry: f64) -> Result<f64, KinematicsError> {
        let length = self.length();
        if !(0.0..=length).contains(&d_from_entry) {
            return Err(KinematicsError::OffsetOutOfRange {
                offset: d_from_entry,
                length,
            });
        }
        // The boundary itself is evaluated on the final segment.
        if d_from_entry < self.approach.length {
            Ok(self.approach.speed_at(d_from_entry))
        } else {
            Ok(self.final_segment.speed_at(d_from_entry - self.approach.length))
        }
    }
}

/// Flight time from entry to threshold for one aircraft class.
pub fn path_flight_time(path: &ArrivalPath, profile: &SpeedProfile) -> Result<f64, KinematicsError> {
    Ok(PathKinematics::for_path(path, profile)?.flight_time())
}

/// Speed at `d_from_entry` NM along the path.
pub fn speed_at_offset(
    path: &ArrivalPath,
    profile: &SpeedProfile,
    d_from_entry: f64,
) -> Result<f64, KinematicsError> {
    PathKinematics::for_path(path, profile)?.speed_at_offset(d_from_entry)
}

/// Speed `d_upstream_of_entry` NM before the entry fix, continuing the
/// approach-segment deceleration backwards.
pub fn upstream_extrapolated_speed(profile: &SpeedProfile, approach_accel: f64, d_upstream_of_entry: f64) -> f64 {
    (profile.v_entry * profile.v_entry + 2.0 * approach_accel.abs() * d_upstream_of_entry).sqrt()
}
