//! Joint-trajectory smoothness: mean absolute acceleration and RMS jerk.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative tolerance under which timestamp steps count as uniform.
const UNIFORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct JointTrajectory {
    timestamps: Vec<f64>,
    names: Vec<String>,
    /// One position channel per joint, radians.
    joints: Vec<Vec<f64>>,
    /// Sampling step when the trajectory is uniformly sampled.
    uniform_dt: Option<f64>,
}

fn traj_err(msg: impl Into<String>) -> Error {
    Error::Trajectory(msg.into())
}

impl JointTrajectory {
    pub fn new(timestamps: Vec<f64>, names: Vec<String>, joints: Vec<Vec<f64>>) -> Result<Self> {
        if timestamps.len() < 3 {
            return Err(traj_err(format!("need at least 3 samples, got {}", timestamps.len())));
        }
        if names.len() != joints.len() || joints.is_empty() {
            return Err(traj_err("joint names and channels disagree"));
        }
        for (t, pair) in timestamps.windows(2).enumerate() {
            if !(pair[1] > pair[0]) || !pair[1].is_finite() || !pair[0].is_finite() {
                return Err(traj_err(format!(
                    "timestamps must increase strictly (row {}: {} then {})",
                    t + 1,
                    pair[0],
                    pair[1]
                )));
            }
        }
        for (name, ch) in names.iter().zip(&joints) {
            if ch.len() != timestamps.len() {
                return Err(traj_err(format!("joint `{name}` has {} samples", ch.len())));
            }
            if ch.iter().any(|q| !q.is_finite()) {
                return Err(traj_err(format!("joint `{name}` has a non-finite position")));
            }
        }
        let n = timestamps.len();
        let dt = (timestamps[n - 1] - timestamps[0]) / (n - 1) as f64;
        let uniform = timestamps
            .windows(2)
            .all(|p| ((p[1] - p[0]) - dt).abs() <= UNIFORM_TOL * dt);
        Ok(Self {
            timestamps,
            names,
            joints,
            uniform_dt: uniform.then_some(dt),
        })
    }

    /// Uniformly sampled trajectory with timestamps `k / rate`.
    pub fn uniform(rate: f64, names: Vec<String>, joints: Vec<Vec<f64>>) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(traj_err(format!("rate {rate} must be positive")));
        }
        let n = joints.first().map_or(0, Vec::len);
        let ts = (0..n).map(|k| k as f64 / rate).collect();
        let mut t = Self::new(ts, names, joints)?;
        t.uniform_dt = Some(1.0 / rate);
        Ok(t)
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn joints(&self) -> &[Vec<f64>] {
        &self.joints
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Second differences at interior samples: the plain central formula on
    /// uniform sampling, the divided-difference form otherwise.
    pub fn accelerations(&self) -> Vec<Vec<f64>> {
        let t = &self.timestamps;
        self.joints
            .iter()
            .map(|q| {
                (1..q.len() - 1)
                    .map(|i| match self.uniform_dt {
                        Some(dt) => (q[i + 1] - 2.0 * q[i] + q[i - 1]) / (dt * dt),
                        None => {
                            let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
                            2.0 * ((q[i + 1] - q[i]) / h1 - (q[i] - q[i - 1]) / h0) / (h0 + h1)
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// First differences of consecutive interior accelerations.
    pub fn jerks(&self) -> Result<Vec<Vec<f64>>> {
        if self.len() < 4 {
            return Err(traj_err(format!("jerk needs at least 4 samples, got {}", self.len())));
        }
        let t = &self.timestamps;
        Ok(self
            .accelerations()
            .iter()
            .map(|a| {
                (0..a.len() - 1)
                    .map(|k| {
                        let dt = self.uniform_dt.unwrap_or(t[k + 2] - t[k + 1]);
                        (a[k + 1] - a[k]) / dt
                    })
                    .collect()
            })
            .collect())
    }
}

/// Per-joint mean |acceleration| in rad/s².
pub fn mean_abs_accel(traj: &JointTrajectory) -> Vec<f64> {
    traj.accelerations()
        .iter()
        .map(|a| a.iter().map(|v| v.abs()).sum::<f64>() / a.len() as f64)
        .collect()
}

/// Per-joint root-mean-square jerk in rad/s³.
pub fn rms_jerk(traj: &JointTrajectory) -> Result<Vec<f64>> {
    Ok(traj
        .jerks()?
        .iter()
        .map(|j| (j.iter().map(|v| v * v).sum::<f64>() / j.len() as f64).sqrt())
        .collect())
}

fn parse_number(field: &str, row: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| traj_err(format!("row {row}: `{field}` is not a number")))
}

/// Parses trajectory CSV.
///
/// Without `rate` the first row is a header `t,<joint>...` and the first
/// column holds timestamps in seconds. With `rate` every column is a joint
/// and timestamps are `k / rate`; a non-numeric first row is taken as the
/// joint names.
pub fn parse_traj(text: &str, rate: Option<f64>) -> Result<JointTrajectory> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| traj_err(format!("csv: {e}")))?;
        rows.push(rec.iter().map(str::to_owned).collect::<Vec<_>>());
    }
    let Some(first) = rows.first() else {
        return Err(traj_err("empty trajectory file"));
    };
    let width = first.len();
    let header_present = first.iter().any(|f| f.trim().parse::<f64>().is_err());
    let names: Vec<String> = if header_present {
        first.clone()
    } else if rate.is_none() {
        return Err(traj_err("missing header row `t,j1,...` (or pass a sampling rate)"));
    } else {
        (1..=width).map(|j| format!("j{j}")).collect()
    };
    let body = &rows[usize::from(header_present)..];

    let mut columns = vec![Vec::with_capacity(body.len()); width];
    for (r, row) in body.iter().enumerate() {
        let line = r + 1 + usize::from(header_present);
        if row.len() != width {
            return Err(traj_err(format!("row {line} has {} fields, expected {width}", row.len())));
        }
        for (c, f) in row.iter().enumerate() {
            columns[c].push(parse_number(f, line)?);
        }
    }

    match rate {
        Some(rate) => JointTrajectory::uniform(rate, names, columns),
        None => {
            if width < 2 {
                return Err(traj_err("need a time column and at least one joint"));
            }
            let ts = columns.remove(0);
            JointTrajectory::new(ts, names[1..].to_vec(), columns)
        }
    }
}

pub fn load_traj(path: impl AsRef<Path>, rate: Option<f64>) -> Result<JointTrajectory> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_traj(&text, rate)
}

/// One method's row pair in a smoothness comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessRow {
    pub method: String,
    pub joints: Vec<String>,
    pub mean_abs_accel: Vec<f64>,
    pub rms_jerk: Vec<f64>,
}

impl SmoothnessRow {
    pub fn compute(method: impl Into<String>, traj: &JointTrajectory) -> Result<Self> {
        Ok(Self {
            method: method.into(),
            joints: traj.names().to_vec(),
            mean_abs_accel: mean_abs_accel(traj),
            rms_jerk: rms_jerk(traj)?,
        })
    }
}

/// CSV with one row per (method, metric) and one column per joint. Joint
/// columns come from the first row; all rows must share them.
pub fn smoothness_csv(rows: &[SmoothnessRow]) -> Result<String> {
    let Some(first) = rows.first() else {
        return Ok(String::from("method,metric\n"));
    };
    let mut s = format!("method,metric,{}\n", first.joints.join(","));
    for r in rows {
        if r.joints != first.joints {
            return Err(traj_err(format!(
                "method `{}` has joints {:?}, expected {:?}",
                r.method, r.joints, first.joints
            )));
        }
        for (metric, vals) in [("mean_abs_accel", &r.mean_abs_accel), ("rms_jerk", &r.rms_jerk)] {
            let cells: Vec<String> = vals.iter().map(f64::to_string).collect();
            s.push_str(&format!("{},{metric},{}\n", r.method, cells.join(",")));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(n: usize, dt: f64, f: impl Fn(f64) -> f64) -> JointTrajectory {
        let ts: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let q = ts.iter().map(|&t| f(t)).collect();
        JointTrajectory::new(ts, vec!["j1".into()], vec![q]).unwrap()
    }

    #[test]
    fn rate_mode_timestamps() {
        let t = parse_traj("0.1,0.2\n0.3,0.4\n0.5,0.6\n", Some(10.0)).unwrap();
        assert_eq!(t.timestamps(), &[0.0, 0.1, 0.2]);
        assert_eq!(t.names(), &["j1".to_string(), "j2".to_string()]);
    }

    #[test]
    fn header_names_preserved() {
        let t = parse_traj("t,shoulder,elbow\n0,0,0\n1,1,2\n2,4,3\n", None).unwrap();
        assert_eq!(t.names(), &["shoulder".to_string(), "elbow".to_string()]);
    }

    #[test]
    fn decreasing_timestamps_rejected() {
        assert!(parse_traj("t,a\n0,0\n0.2,1\n0.1,2\n", None).is_err());
        assert!(parse_traj("t,a\n0,0\n0,1\n0.1,2\n", None).is_err());
    }

    #[test]
    fn ragged_and_short_rejected() {
        assert!(parse_traj("t,a\n0,0\n1\n2,2\n", None).is_err());
        assert!(parse_traj("t,a\n0,0\n1,1\n", None).is_err());
        assert!(parse_traj("0,0\n1,1\n2,2\n", None).is_err());
    }

    #[test]
    fn linear_is_still() {
        let t = sampled(20, 0.1, |t| 0.3 + 2.0 * t);
        assert!(mean_abs_accel(&t)[0] < 1e-12);
    }

    #[test]
    fn quadratic_and_cubic_exact() {
        let t = sampled(17, 0.125, |t| 0.5 * 3.0 * t * t);
        assert_eq!(mean_abs_accel(&t), vec![3.0]);
        assert_eq!(rms_jerk(&t).unwrap(), vec![0.0]);
        let c = sampled(17, 0.125, |t| t * t * t);
        assert_eq!(rms_jerk(&c).unwrap(), vec![6.0]);
    }

    #[test]
    fn non_uniform_quadratic() {
        let ts = vec![0.0, 0.1, 0.25, 0.3, 0.5, 0.55];
        let q: Vec<f64> = ts.iter().map(|t| 2.0 * t * t - t).collect();
        let traj = JointTrajectory::new(ts, vec!["a".into()], vec![q]).unwrap();
        assert!((mean_abs_accel(&traj)[0] - 4.0).abs() < 1e-9);
        assert!(rms_jerk(&traj).unwrap()[0] < 1e-6);
    }

    #[test]
    fn jerk_needs_four_samples() {
        let t = sampled(3, 0.1, |t| t);
        assert!(rms_jerk(&t).is_err());
    }

    #[test]
    fn csv_table_layout() {
        let a = SmoothnessRow::compute("base", &sampled(8, 0.25, |t| t * t)).unwrap();
        let csv = smoothness_csv(&[a]).unwrap();
        assert_eq!(csv, "method,metric,j1\nbase,mean_abs_accel,2\nbase,rms_jerk,0\n");
    }
}
