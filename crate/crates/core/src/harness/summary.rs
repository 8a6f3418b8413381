//! Aggregates result rows: medians and IQR per cell, log-log slopes across
//! horizons, growth ratios between `T` and `4T`, and paired comparisons.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use super::schema::{read_rows, ResultRow};
use crate::error::Result;

/// Printed where a statistic cannot be computed (e.g. a slope from one
/// horizon).
pub const UNDEFINED: &str = "undefined";

#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub preset: String,
    pub method: String,
    pub horizon: Option<usize>,
    pub replications: usize,
    pub failures: usize,
    pub median_error: Option<f64>,
    /// Interquartile range of the error as `(q25, q75)`.
    pub error_iqr: Option<(f64, f64)>,
    pub median_log_error: Option<f64>,
    pub median_proxy: Option<f64>,
    pub median_utility_regret: Option<f64>,
    pub median_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRatio {
    pub from: usize,
    pub to: usize,
    /// Median over seeds of the per-seed ratio.
    pub median_ratio: f64,
    pub ratio_of_medians: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodTrend {
    pub preset: String,
    pub method: String,
    /// Slope of log median error against log `T`.
    pub error_slope: Option<f64>,
    /// Slope of log median cumulative proxy regret against log `T`.
    pub proxy_slope: Option<f64>,
    pub proxy_growth: Vec<GrowthRatio>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub preset: String,
    pub horizon: usize,
    pub label: String,
    pub median_ratio: f64,
    pub ratio_of_medians: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub cells: Vec<CellStats>,
    pub trends: Vec<MethodTrend>,
    pub comparisons: Vec<Comparison>,
    pub failures: usize,
}

impl Summary {
    pub fn cell(&self, method: &str, horizon: Option<usize>) -> Option<&CellStats> {
        self.cells.iter().find(|c| c.method == method && c.horizon == horizon)
    }

    pub fn trend(&self, method: &str) -> Option<&MethodTrend> {
        self.trends.iter().find(|t| t.method == method)
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    Some(sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn median(values: &[f64]) -> Option<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Least-squares slope of `ln y` on `ln x`; `None` with fewer than two
/// distinct positive points.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

type Key = (String, String);

type Statistic = fn(&ResultRow) -> Option<f64>;

fn collect<F: Fn(&ResultRow) -> Option<f64>>(rows: &[&ResultRow], f: F) -> Vec<f64> {
    rows.iter().filter_map(|r| f(r)).filter(|v| v.is_finite()).collect()
}

/// Per-seed ratios `num/den` of a statistic, paired by seed.
fn paired_ratios<F: Fn(&ResultRow) -> Option<f64>>(num: &[&ResultRow], den: &[&ResultRow], f: F) -> Vec<f64> {
    let by_seed: BTreeMap<u64, f64> = den.iter().filter_map(|r| Some((r.seed, f(r)?))).collect();
    num.iter()
        .filter_map(|r| {
            let d = *by_seed.get(&r.seed)?;
            let n = f(r)?;
            (d > 0.0).then_some(n / d)
        })
        .collect()
}

fn ratio_stats<F: Fn(&ResultRow) -> Option<f64> + Copy>(
    num: &[&ResultRow],
    den: &[&ResultRow],
    f: F,
) -> Option<(f64, f64)> {
    let per_seed = median(&paired_ratios(num, den, f))?;
    let (mn, md) = (median(&collect(num, f))?, median(&collect(den, f))?);
    Some((per_seed, if md > 0.0 { mn / md } else { f64::NAN }))
}

pub fn summarize_rows(rows: &[ResultRow]) -> Summary {
    let failures = rows.iter().filter(|r| !r.is_ok()).count();
    let mut groups: BTreeMap<(Key, Option<usize>), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(((r.preset.clone(), r.method.clone()), r.horizon)).or_default().push(r);
    }

    let mut cells = Vec::new();
    let mut ok_groups: BTreeMap<(Key, Option<usize>), Vec<&ResultRow>> = BTreeMap::new();
    for ((key, horizon), group) in &groups {
        let ok: Vec<&ResultRow> = group.iter().copied().filter(|r| r.is_ok()).collect();
        let mut errors = collect(&ok, |r| r.error);
        errors.sort_by(f64::total_cmp);
        let logs = collect(&ok, |r| r.error.filter(|e| *e > 0.0).map(f64::ln));
        cells.push(CellStats {
            preset: key.0.clone(),
            method: key.1.clone(),
            horizon: *horizon,
            replications: ok.len(),
            failures: group.len() - ok.len(),
            median_error: quantile(&errors, 0.5),
            error_iqr: quantile(&errors, 0.25).zip(quantile(&errors, 0.75)),
            median_log_error: median(&logs),
            median_proxy: median(&collect(&ok, |r| r.cum_proxy)),
            median_utility_regret: median(&collect(&ok, |r| r.cum_utility_regret)),
            median_value: median(&collect(&ok, |r| r.value)),
        });
        ok_groups.insert((key.clone(), *horizon), ok);
    }

    let methods: BTreeSet<Key> = groups.keys().map(|(k, _)| k.clone()).collect();
    let mut trends = Vec::new();
    for key in &methods {
        let mine: Vec<&CellStats> =
            cells.iter().filter(|c| c.preset == key.0 && c.method == key.1 && c.horizon.is_some()).collect();
        let pts = |f: fn(&CellStats) -> Option<f64>| -> Vec<(f64, f64)> {
            mine.iter().filter_map(|c| Some((c.horizon? as f64, f(c)?))).collect()
        };
        let horizons: Vec<usize> = mine.iter().filter_map(|c| c.horizon).collect();
        let mut proxy_growth = Vec::new();
        for &t in &horizons {
            if !horizons.contains(&(4 * t)) {
                continue;
            }
            let den = &ok_groups[&(key.clone(), Some(t))];
            let num = &ok_groups[&(key.clone(), Some(4 * t))];
            if let Some((median_ratio, ratio_of_medians)) = ratio_stats(num, den, |r| r.cum_proxy) {
                proxy_growth.push(GrowthRatio { from: t, to: 4 * t, median_ratio, ratio_of_medians });
            }
        }
        trends.push(MethodTrend {
            preset: key.0.clone(),
            method: key.1.clone(),
            error_slope: log_log_slope(&pts(|c| c.median_error)),
            proxy_slope: log_log_slope(&pts(|c| c.median_proxy)),
            proxy_growth,
        });
    }

    let mut comparisons = Vec::new();
    let pairs: [(&str, &str, &str, Statistic); 2] = [
        ("epoch-greedy", "etc", "epoch-greedy/etc proxy regret", |r| r.cum_proxy),
        ("ols", "gmm-contract-iv", "ols/gmm-contract-iv error", |r| r.error),
    ];
    for ((preset, method), horizon) in ok_groups.keys() {
        let Some(t) = horizon else { continue };
        for (num, den, label, f) in pairs {
            if method != num {
                continue;
            }
            let Some(den_rows) = ok_groups.get(&((preset.clone(), den.to_string()), Some(*t))) else { continue };
            let num_rows = &ok_groups[&((preset.clone(), method.clone()), Some(*t))];
            if let Some((median_ratio, ratio_of_medians)) = ratio_stats(num_rows, den_rows, f) {
                comparisons.push(Comparison {
                    preset: preset.clone(),
                    horizon: *t,
                    label: label.to_string(),
                    median_ratio,
                    ratio_of_medians,
                });
            }
        }
    }

    Summary { cells, trends, comparisons, failures }
}

pub fn summarize(path: &Path) -> Result<Summary> {
    Ok(summarize_rows(&read_rows(std::fs::File::open(path)?)?))
}

struct Opt(Option<f64>);

impl fmt::Display for Opt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(v) => write!(f, "{v:.4e}"),
            None => f.write_str("-"),
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<20} {:<24} {:>7} {:>4} {:>4} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}",
            "preset",
            "method",
            "T",
            "n",
            "fail",
            "med_err",
            "err_q25",
            "err_q75",
            "med_logerr",
            "med_proxy",
            "med_ureg",
            "med_value"
        )?;
        for c in &self.cells {
            let t = c.horizon.map(|t| t.to_string()).unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "{:<20} {:<24} {:>7} {:>4} {:>4} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}",
                c.preset,
                c.method,
                t,
                c.replications,
                c.failures,
                Opt(c.median_error).to_string(),
                Opt(c.error_iqr.map(|q| q.0)).to_string(),
                Opt(c.error_iqr.map(|q| q.1)).to_string(),
                Opt(c.median_log_error).to_string(),
                Opt(c.median_proxy).to_string(),
                Opt(c.median_utility_regret).to_string(),
                Opt(c.median_value).to_string(),
            )?;
        }
        writeln!(f)?;
        let slope = |s: Option<f64>| s.map(|v| format!("{v:.3}")).unwrap_or_else(|| UNDEFINED.to_string());
        for t in &self.trends {
            writeln!(
                f,
                "{} {}: error slope {}, proxy slope {}",
                t.preset,
                t.method,
                slope(t.error_slope),
                slope(t.proxy_slope)
            )?;
            for g in &t.proxy_growth {
                writeln!(
                    f,
                    "  proxy regret T={} -> {}: median per-seed ratio {:.3}, ratio of medians {:.3}",
                    g.from, g.to, g.median_ratio, g.ratio_of_medians
                )?;
            }
        }
        for c in &self.comparisons {
            writeln!(
                f,
                "{} T={} {}: median per-seed ratio {:.3}, ratio of medians {:.3}",
                c.preset, c.horizon, c.label, c.median_ratio, c.ratio_of_medians
            )?;
        }
        if self.failures > 0 {
            writeln!(f, "failed rows: {}", self.failures)?;
        }
        Ok(())
    }
}
