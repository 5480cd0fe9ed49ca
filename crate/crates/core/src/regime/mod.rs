//! Scalar proxies for closeness to the Milne and Kasner model flows, the
//! set of non-Kasner epochs and its unit-interval statistic, and volume
//! growth exponents.
//!
//! Logarithmic time is `tau = ln(t0/t)` with `t0` the trajectory anchor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{scale_invariants, FlowSample, Gauge, Trajectory, DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Milne,
    Kasner,
}

/// Pointwise distance to the Kasner class: `max(|nL - 1|, |t^2 R|/n^2, ||K|^2/H^2 - 1|)`.
pub fn kasner_score(s: &FlowSample) -> f64 {
    let n = DIM as f64;
    let [lapse, t2r, t2k2, _] = scale_invariants(s);
    // In Hubble gauge t^2 H^2 = n^2.
    let k_over_h = t2k2 / (n * n);
    (n * lapse - 1.0)
        .abs()
        .max(t2r.abs() / (n * n))
        .max((k_over_h - 1.0).abs())
}

/// Pointwise distance to the Milne class: `max(|L - 1|, t^2 |K0|^2, |t^2 R + n(n-1)|/n^2)`.
pub fn milne_score(s: &FlowSample) -> f64 {
    let n = DIM as f64;
    let [lapse, t2r, _, t2k0] = scale_invariants(s);
    (lapse - 1.0)
        .abs()
        .max(t2k0)
        .max((t2r + n * (n - 1.0)).abs() / (n * n))
}

pub fn score(s: &FlowSample, model: Model) -> f64 {
    match model {
        Model::Milne => milne_score(s),
        Model::Kasner => kasner_score(s),
    }
}

fn require_hubble(traj: &Trajectory) -> Result<()> {
    if traj.gauge() != Gauge::HubbleTime {
        return Err(Error::WrongGauge {
            required: "hubble",
            found: traj.gauge().name(),
        });
    }
    Ok(())
}

/// Largest pointwise score over the rescaled window `t in [u eps, u/eps]`.
pub fn model_closeness(traj: &Trajectory, u_center: f64, eps: f64, model: Model) -> Result<f64> {
    require_hubble(traj)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    if !(u_center > 0.0 && u_center.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "window center must be positive, got {u_center}"
        )));
    }
    let (lo, hi) = (u_center * eps, u_center / eps);
    let (t_min, t_max) = traj.time_range();
    let slack = 1e-12;
    if t_min > lo * (1.0 + slack) || t_max < hi * (1.0 - slack) {
        return Err(Error::InsufficientData(format!(
            "window [{lo}, {hi}] is not covered by samples on [{t_min}, {t_max}]"
        )));
    }
    Ok(traj
        .samples()
        .iter()
        .filter(|s| s.t >= lo * (1.0 - slack) && s.t <= hi * (1.0 + slack))
        .map(|s| score(s, model))
        .fold(0.0, f64::max))
}

/// Non-Kasner epochs `S_eps` as closed `tau`-intervals.
///
/// Each sample with `tau >= 0` stands for the `tau`-interval reaching
/// halfway to its neighbours; runs of samples with `kasner_score > eps` are
/// merged into one interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochSet {
    pub eps: f64,
    pub intervals: Vec<[f64; 2]>,
    /// Largest `tau` covered by the samples.
    pub tau_max: f64,
}

impl EpochSet {
    pub fn meets(&self, a: f64, b: f64) -> bool {
        self.intervals.iter().any(|iv| iv[0] <= b && iv[1] >= a)
    }

    /// Number of returns to `S_eps` after a gap of at least `gap`.
    pub fn recurrences(&self, gap: f64) -> usize {
        self.intervals
            .windows(2)
            .filter(|w| w[1][0] - w[0][1] >= gap)
            .count()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|iv| iv[1] - iv[0]).sum()
    }
}

pub fn epoch_set(traj: &Trajectory, eps: f64) -> Result<EpochSet> {
    require_hubble(traj)?;
    let t0 = traj.t0();
    // Samples in increasing tau.
    let pts: Vec<(f64, bool)> = traj
        .samples()
        .iter()
        .rev()
        .filter(|s| s.t <= t0)
        .map(|s| ((t0 / s.t).ln(), kasner_score(s) > eps))
        .collect();
    if pts.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no samples at or before t0 = {t0}"
        )));
    }
    let m = pts.len();
    let cell = |i: usize| -> [f64; 2] {
        let lo = if i == 0 {
            pts[0].0
        } else {
            0.5 * (pts[i - 1].0 + pts[i].0)
        };
        let hi = if i + 1 == m {
            pts[m - 1].0
        } else {
            0.5 * (pts[i].0 + pts[i + 1].0)
        };
        [lo, hi]
    };
    let mut intervals: Vec<[f64; 2]> = Vec::new();
    let mut open: Option<[f64; 2]> = None;
    for (i, &(_, bad)) in pts.iter().enumerate() {
        if bad {
            let c = cell(i);
            open = Some(match open {
                Some(iv) => [iv[0], c[1]],
                None => c,
            });
        } else if let Some(iv) = open.take() {
            intervals.push(iv);
        }
    }
    intervals.extend(open);
    Ok(EpochSet {
        eps,
        intervals,
        tau_max: pts[m - 1].0,
    })
}

/// `F(N)`: number of unit intervals `[k, k+1]`, `k < N`, meeting `S_eps`.
pub fn interval_statistic(set: &EpochSet, n: usize) -> Result<(usize, f64)> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if set.tau_max < n as f64 {
        return Err(Error::InsufficientData(format!(
            "tau range {} is shorter than N = {n}",
            set.tau_max
        )));
    }
    let f = (0..n)
        .filter(|&k| set.meets(k as f64, k as f64 + 1.0))
        .count();
    Ok((f, f as f64 / n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FnRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "F")]
    pub f: usize,
    #[serde(rename = "F_over_N")]
    pub ratio: f64,
}

/// `F(N)` for `N = 1 ..= min(floor(tau_max), n_max)`.
pub fn fn_table(set: &EpochSet, n_max: Option<usize>) -> Vec<FnRow> {
    let top = (set.tau_max.floor().max(0.0) as usize).min(n_max.unwrap_or(usize::MAX));
    let mut out = Vec::with_capacity(top);
    let mut f = 0;
    for n in 1..=top {
        let k = (n - 1) as f64;
        if set.meets(k, k + 1.0) {
            f += 1;
        }
        out.push(FnRow {
            n,
            f,
            ratio: f as f64 / n as f64,
        });
    }
    out
}

pub fn write_fn_csv<W: std::io::Write>(table: &[FnRow], mut out: W) -> Result<()> {
    writeln!(out, "N,F,F_over_N")?;
    for r in table {
        writeln!(out, "{},{},{}", r.n, r.f, r.ratio)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopePoint {
    /// Window center in `log10 t`.
    pub log10_t: f64,
    /// Least-squares slope of `ln dvol` against `ln t`.
    pub slope: f64,
    pub samples: usize,
}

/// Sliding least-squares slopes of `ln dvol` against `ln t` over windows of
/// `window` decades, centers a quarter window apart.
pub fn volume_exponent(traj: &Trajectory, window: f64) -> Result<Vec<SlopePoint>> {
    require_hubble(traj)?;
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::DegenerateWindow(format!(
            "window must be positive, got {window}"
        )));
    }
    let xs: Vec<f64> = traj.samples().iter().map(|s| s.t.log10()).collect();
    let ys: Vec<f64> = traj.samples().iter().map(|s| s.metric.log_dvol()).collect();
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    if x1 - x0 < window {
        return Err(Error::DegenerateWindow(format!(
            "time range covers {} decades, window needs {window}",
            x1 - x0
        )));
    }
    let steps = ((x1 - x0 - window) / (0.25 * window)).floor() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let mut start = 0usize;
    for j in 0..=steps {
        let lo = x0 + j as f64 * 0.25 * window;
        let hi = lo + window;
        while start < xs.len() && xs[start] < lo {
            start += 1;
        }
        let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0usize, 0.0, 0.0, 0.0, 0.0);
        for i in start..xs.len() {
            if xs[i] > hi {
                break;
            }
            let x = xs[i] * std::f64::consts::LN_10;
            n += 1;
            sx += x;
            sy += ys[i];
            sxx += x * x;
            sxy += x * ys[i];
        }
        let nf = n as f64;
        let var = sxx - sx * sx / nf.max(1.0);
        if n < 2 || !(var > 1e-300) {
            return Err(Error::DegenerateWindow(format!(
                "window [{lo}, {hi}] (log10 t) holds {n} samples"
            )));
        }
        out.push(SlopePoint {
            log10_t: 0.5 * (lo + hi),
            slope: (sxy - sx * sy / nf) / var,
            samples: n,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    /// Threshold defining `S_eps` and the closeness window `(eps, 1/eps)`.
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Tolerance on volume slopes.
    #[serde(default = "default_slope_tol")]
    pub slope_tol: f64,
    /// Upper end of the Mixmaster slope band `(1, 1 + beta)`.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Volume-exponent window in decades of `t`.
    #[serde(default = "default_window")]
    pub volume_window: f64,
    /// Kasner-close stretch (in `tau`) that must separate two non-Kasner
    /// epochs for them to count as a recurrence.
    #[serde(default = "default_gap")]
    pub recurrence_gap: f64,
    /// Largest `N` of the `F(N)` table; `None` for the full range.
    #[serde(default, rename = "N")]
    pub n_max: Option<usize>,
}

fn default_eps() -> f64 {
    0.05
}
fn default_slope_tol() -> f64 {
    0.1
}
fn default_beta() -> f64 {
    1.0
}
fn default_window() -> f64 {
    1.0
}
fn default_gap() -> f64 {
    1.0
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            eps: default_eps(),
            slope_tol: default_slope_tol(),
            beta: default_beta(),
            volume_window: default_window(),
            recurrence_gap: default_gap(),
            n_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeHypothesis {
    Milne,
    Kasner,
    Mixmaster,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeClass {
    Milne,
    Kasner,
    Mixmaster,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowScore {
    pub tau: f64,
    pub u_center: f64,
    pub kasner_score: f64,
    pub milne_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub config: DetectorConfig,
    pub t0: f64,
    pub samples: usize,
    pub tau_max: f64,
    /// Closeness over `(eps, 1/eps)` windows centered at integer `tau`.
    pub window_scores: Vec<WindowScore>,
    pub epoch_set: EpochSet,
    pub fn_table: Vec<FnRow>,
    pub volume_exponent: Vec<SlopePoint>,
    /// Slope of the window nearest the singularity.
    pub late_slope: Option<f64>,
    pub volume_hypothesis: VolumeHypothesis,
    /// Pointwise Milne score at the earliest sample.
    pub late_milne_score: f64,
    pub classification: RegimeClass,
}

impl RegimeReport {
    pub fn write_fn_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        write_fn_csv(&self.fn_table, out)
    }
}

fn volume_hypothesis(slope: Option<f64>, cfg: &DetectorConfig) -> VolumeHypothesis {
    let n = DIM as f64;
    match slope {
        Some(s) if (s - n).abs() <= cfg.slope_tol => VolumeHypothesis::Milne,
        Some(s) if (s - 1.0).abs() <= cfg.slope_tol => VolumeHypothesis::Kasner,
        Some(s) if s > 1.0 && s < 1.0 + cfg.beta => VolumeHypothesis::Mixmaster,
        _ => VolumeHypothesis::None,
    }
}

/// Runs every detector on a Hubble-gauge trajectory.
///
/// Classification: Milne when the late volume slope is `n` and the flow is
/// Milne-close at its earliest sample; Mixmaster when non-Kasner epochs
/// recur after a Kasner-close stretch of at least `recurrence_gap`; Kasner when `S_eps` is empty or a
/// single early interval that ends before the last unit of `tau`.
pub fn analyze(traj: &Trajectory, cfg: &DetectorConfig) -> Result<RegimeReport> {
    require_hubble(traj)?;
    let set = epoch_set(traj, cfg.eps)?;
    let table = fn_table(&set, cfg.n_max);
    let slopes = match volume_exponent(traj, cfg.volume_window) {
        Ok(v) => v,
        Err(Error::DegenerateWindow(_)) => Vec::new(),
        Err(e) => return Err(e),
    };
    let late_slope = slopes.first().map(|p| p.slope);
    let hypothesis = volume_hypothesis(late_slope, cfg);
    let late_milne = milne_score(&traj.samples()[0]);

    let t0 = traj.t0();
    let mut window_scores = Vec::new();
    let mut k = 0usize;
    loop {
        let u = t0 * (-(k as f64)).exp();
        let (Ok(ks), Ok(ms)) = (
            model_closeness(traj, u, cfg.eps, Model::Kasner),
            model_closeness(traj, u, cfg.eps, Model::Milne),
        ) else {
            if u * cfg.eps < traj.time_range().0 {
                break;
            }
            k += 1;
            continue;
        };
        window_scores.push(WindowScore {
            tau: k as f64,
            u_center: u,
            kasner_score: ks,
            milne_score: ms,
        });
        k += 1;
    }

    let recurrent = set.recurrences(cfg.recurrence_gap) > 0;
    let classification = if hypothesis == VolumeHypothesis::Milne && late_milne <= cfg.eps {
        RegimeClass::Milne
    } else if recurrent {
        RegimeClass::Mixmaster
    } else if set.intervals.is_empty() || !set.meets(set.tau_max - 1.0, set.tau_max) {
        RegimeClass::Kasner
    } else {
        RegimeClass::Undetermined
    };

    Ok(RegimeReport {
        config: *cfg,
        t0,
        samples: traj.len(),
        tau_max: set.tau_max,
        window_scores,
        epoch_set: set,
        fn_table: table,
        volume_exponent: slopes,
        late_slope,
        volume_hypothesis: hypothesis,
        late_milne_score: late_milne,
        classification,
    })
}
