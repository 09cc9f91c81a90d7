//! Static component maps `x -> y` sampled on a tensor grid.
//!
//! A map carries three channels per grid point: the transferred value, the
//! transmission probability and the transmission delay. Maps built from a
//! closed form keep that form as their [`MapSource`] so that checkers can
//! probe between grid points; maps loaded from CSV are sample-only and are
//! evaluated by multilinear interpolation.

use serde::{Deserialize, Serialize};

use crate::approx::Slfn;
use crate::bio::{lif_rate, LifParams, SynapseParams};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Compact box `[lower_i, upper_i]` per input dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let d = Domain { lower, upper };
        d.validate()?;
        Ok(d)
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty() {
            return Err(Error::invalid("domain", "empty domain"));
        }
        if self.lower.len() != self.upper.len() {
            return Err(Error::Dimension {
                what: "domain.upper".into(),
                expected: self.lower.len(),
                got: self.upper.len(),
            });
        }
        for (i, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::NonFinite(format!("domain[{i}]")));
            }
            if lo >= hi {
                return Err(Error::invalid(
                    format!("domain[{i}]"),
                    format!("lower {lo} must be < upper {hi}"),
                ));
            }
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).product()
    }

    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &u))| v.clamp(l, u))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&l, &u))| v >= l && v <= u)
    }

    /// Affine map of the box onto `[-1, 1]^d`.
    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &u))| 2.0 * (v - l) / (u - l) - 1.0)
            .collect()
    }
}

/// Closed-form test and corpus functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Analytic {
    /// `sin(freq * x)`
    Sin { freq: f64 },
    /// `low` for `x < at`, `high` for `x >= at`.
    Heaviside { at: f64, low: f64, high: f64 },
    /// Triangle wave with minima `-1` at multiples of `period` and maxima
    /// `+1` halfway between.
    Triangle { period: f64 },
    /// `x^2`
    Square,
    Identity,
    Linear { gain: f64, offset: f64 },
    Sigmoid {
        amplitude: f64,
        slope: f64,
        midpoint: f64,
    },
    Constant { value: f64 },
    /// `sum_i w_i x_i`, the only multi-input analytic form.
    WeightedSum { weights: Vec<f64> },
}

impl Analytic {
    pub fn input_dim(&self) -> Option<usize> {
        match self {
            Analytic::WeightedSum { weights } => Some(weights.len()),
            _ => Some(1),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let v = x[0];
        match *self {
            Analytic::Sin { freq } => (freq * v).sin(),
            Analytic::Heaviside { at, low, high } => {
                if v >= at {
                    high
                } else {
                    low
                }
            }
            Analytic::Triangle { period } => {
                let phase = (v / period).rem_euclid(1.0);
                1.0 - 4.0 * (phase - 0.5).abs()
            }
            Analytic::Square => v * v,
            Analytic::Identity => v,
            Analytic::Linear { gain, offset } => gain * v + offset,
            Analytic::Sigmoid {
                amplitude,
                slope,
                midpoint,
            } => amplitude * logistic(slope * (v - midpoint)),
            Analytic::Constant { value } => value,
            Analytic::WeightedSum { ref weights } => {
                weights.iter().zip(x).map(|(w, xi)| w * xi).sum()
            }
        }
    }
}

pub(crate) fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Where a map's values come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSource {
    /// Closed-form integrate-and-fire f-I curve.
    Lif { params: LifParams },
    Synapse { params: SynapseParams },
    Analytic { function: Analytic },
    Network { net: Slfn },
    /// `out_scale * inner(in_scale * x + in_shift) + out_shift` (1-D).
    Affine {
        inner: Box<MapSource>,
        in_scale: f64,
        in_shift: f64,
        out_scale: f64,
        out_shift: f64,
    },
    /// `outer(inner_1(x), ..., inner_k(x))` evaluated through the component
    /// maps themselves.
    Compose {
        outer: Box<ComponentMap>,
        inners: Vec<ComponentMap>,
    },
}

impl MapSource {
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            MapSource::Lif { params } => lif_rate(params, x[0]),
            MapSource::Synapse { params } => params.transfer(x[0]),
            MapSource::Analytic { function } => function.eval(x),
            MapSource::Network { net } => net.forward_unchecked(x)[0],
            MapSource::Affine {
                inner,
                in_scale,
                in_shift,
                out_scale,
                out_shift,
            } => out_scale * inner.value(&[in_scale * x[0] + in_shift]) + out_shift,
            MapSource::Compose { outer, inners } => {
                let u: Vec<f64> = inners.iter().map(|m| m.value_at(x)).collect();
                outer.value_at(&u)
            }
        }
    }

    fn probability(&self) -> f64 {
        match self {
            MapSource::Synapse { params } => params.p,
            MapSource::Affine { inner, .. } => inner.probability(),
            _ => 1.0,
        }
    }

    fn delay(&self) -> f64 {
        match self {
            MapSource::Synapse { params } => params.delay as f64,
            MapSource::Affine { inner, .. } => inner.delay(),
            _ => 0.0,
        }
    }

    /// True when the source can be evaluated exactly off-grid. Compositions
    /// qualify only if every part does.
    pub fn is_closed_form(&self) -> bool {
        match self {
            MapSource::Compose { outer, inners } => {
                outer.has_probe() && inners.iter().all(ComponentMap::has_probe)
            }
            MapSource::Affine { inner, .. } => inner.is_closed_form(),
            _ => true,
        }
    }
}

/// A sampled static map on a tensor grid; channels are stored row-major
/// with the last axis varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentMap {
    pub schema_version: u32,
    pub domain: Domain,
    pub axes: Vec<Vec<f64>>,
    pub value: Vec<f64>,
    pub probability: Vec<f64>,
    pub delay: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<MapSource>,
}

impl ComponentMap {
    /// Build a map from explicit samples. `probability`/`delay` default to
    /// 1 and 0.
    pub fn from_samples(
        domain: Domain,
        axes: Vec<Vec<f64>>,
        value: Vec<f64>,
        probability: Option<Vec<f64>>,
        delay: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = value.len();
        let map = ComponentMap {
            schema_version: SCHEMA_VERSION,
            domain,
            axes,
            value,
            probability: probability.unwrap_or_else(|| vec![1.0; n]),
            delay: delay.unwrap_or_else(|| vec![0.0; n]),
            weights: None,
            source: None,
        };
        map.validate()?;
        Ok(map)
    }

    /// Sample a closed-form source on a uniform grid with `points[i]` nodes
    /// along axis `i` (endpoints included).
    pub fn from_source(source: MapSource, domain: Domain, points: &[usize]) -> Result<Self> {
        domain.validate()?;
        if points.len() != domain.dim() {
            return Err(Error::Dimension {
                what: "grid points".into(),
                expected: domain.dim(),
                got: points.len(),
            });
        }
        let axes: Vec<Vec<f64>> = points
            .iter()
            .enumerate()
            .map(|(i, &n)| uniform_axis(domain.lower[i], domain.upper[i], n))
            .collect::<Result<_>>()?;
        let nodes = grid_nodes(&axes);
        let value = nodes.iter().map(|x| source.value(x)).collect();
        let probability = nodes.iter().map(|_| source.probability()).collect();
        let delay = nodes.iter().map(|_| source.delay()).collect();
        let map = ComponentMap {
            schema_version: SCHEMA_VERSION,
            domain,
            axes,
            value,
            probability,
            delay,
            weights: None,
            source: Some(source),
        };
        map.validate()?;
        Ok(map)
    }

    /// Convenience for 1-D analytic maps.
    pub fn analytic(function: Analytic, lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::from_source(
            MapSource::Analytic { function },
            Domain::interval(lo, hi)?,
            &[n],
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        if self.axes.len() != self.domain.dim() {
            return Err(Error::Dimension {
                what: "axes".into(),
                expected: self.domain.dim(),
                got: self.axes.len(),
            });
        }
        for (i, axis) in self.axes.iter().enumerate() {
            if axis.len() < 2 {
                return Err(Error::invalid(
                    format!("axes[{i}]"),
                    "at least 2 samples per dimension required",
                ));
            }
            for (k, &x) in axis.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::NonFinite(format!("axes[{i}][{k}]")));
                }
                if x < self.domain.lower[i] || x > self.domain.upper[i] {
                    return Err(Error::invalid(
                        format!("axes[{i}][{k}]"),
                        format!("sample {x} outside domain"),
                    ));
                }
            }
            if axis.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(
                    format!("axes[{i}]"),
                    "coordinates must be strictly increasing",
                ));
            }
        }
        let n = self.len();
        for (name, ch) in [
            ("value", &self.value),
            ("probability", &self.probability),
            ("delay", &self.delay),
        ] {
            if ch.len() != n {
                return Err(Error::Dimension {
                    what: name.into(),
                    expected: n,
                    got: ch.len(),
                });
            }
            if let Some(k) = ch.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("{name}[{k}]")));
            }
        }
        if let Some(k) = self.probability.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid(
                format!("probability[{k}]"),
                "must lie in [0, 1]",
            ));
        }
        if let Some(k) = self.delay.iter().position(|d| *d < 0.0) {
            return Err(Error::invalid(format!("delay[{k}]"), "must be >= 0"));
        }
        if let Some(w) = &self.weights {
            if w.len() != n {
                return Err(Error::Dimension {
                    what: "weights".into(),
                    expected: n,
                    got: w.len(),
                });
            }
            if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::invalid("weights", "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    /// Grid coordinates of every sample in storage order.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        grid_nodes(&self.axes)
    }

    /// Whether off-grid evaluation is exact rather than interpolated.
    pub fn has_probe(&self) -> bool {
        self.source.as_ref().is_some_and(MapSource::is_closed_form)
    }

    /// Value channel at an arbitrary point, clamped into the domain.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let x = self.domain.clamp(x);
        match &self.source {
            Some(src) => src.value(&x),
            None => self.interpolate(&self.value, &x),
        }
    }

    pub fn probability_at(&self, x: &[f64]) -> f64 {
        let x = self.domain.clamp(x);
        match &self.source {
            Some(src) if src.is_closed_form() => src.probability(),
            _ => self.interpolate(&self.probability, &x),
        }
    }

    pub fn delay_at(&self, x: &[f64]) -> f64 {
        let x = self.domain.clamp(x);
        match &self.source {
            Some(src) if src.is_closed_form() => src.delay(),
            _ => self.interpolate(&self.delay, &x),
        }
    }

    pub fn value_range(&self) -> (f64, f64) {
        self.value
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Quadrature weights: the map's own, otherwise the product of per-axis
    /// dual-cell widths (half cells at the ends).
    pub fn quadrature_weights(&self) -> Vec<f64> {
        if let Some(w) = &self.weights {
            return w.clone();
        }
        let per_axis: Vec<Vec<f64>> = self.axes.iter().map(|a| dual_cell_widths(a)).collect();
        let mut out = vec![1.0; self.len()];
        for (flat, w) in out.iter_mut().enumerate() {
            let idx = unflatten(flat, &self.shape());
            *w = idx.iter().enumerate().map(|(ax, &i)| per_axis[ax][i]).product();
        }
        out
    }

    /// Multilinear interpolation of a channel (x already clamped).
    fn interpolate(&self, channel: &[f64], x: &[f64]) -> f64 {
        let shape = self.shape();
        let mut cells = Vec::with_capacity(self.dim());
        for (axis, &xi) in self.axes.iter().zip(x) {
            let k = match axis.partition_point(|&a| a <= xi) {
                0 => 0,
                p if p >= axis.len() => axis.len() - 2,
                p => p - 1,
            };
            let t = (xi - axis[k]) / (axis[k + 1] - axis[k]);
            cells.push((k, t.clamp(0.0, 1.0)));
        }
        let d = self.dim();
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut weight = 1.0;
            let mut flat = 0;
            for (ax, &(k, t)) in cells.iter().enumerate() {
                let up = (corner >> ax) & 1 == 1;
                weight *= if up { t } else { 1.0 - t };
                flat = flat * shape[ax] + k + usize::from(up);
            }
            if weight != 0.0 {
                acc += weight * channel[flat];
            }
        }
        acc
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let map: ComponentMap = serde_json::from_str(s)?;
        map.validate()?;
        Ok(map)
    }

    /// One row per grid point: `x0[,x1...],value,probability,delay`.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = (0..self.dim()).map(|i| format!("x{i}")).collect();
        header.extend(["value", "probability", "delay"].map(String::from));
        w.write_record(&header)?;
        for (k, node) in self.nodes().iter().enumerate() {
            let mut row: Vec<String> = node.iter().map(|v| v.to_string()).collect();
            row.push(self.value[k].to_string());
            row.push(self.probability[k].to_string());
            row.push(self.delay[k].to_string());
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
    }

    /// Parse the CSV export. Rows may come in any order but must cover a
    /// full tensor grid exactly once; the domain is the grid's bounding box.
    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(s.as_bytes());
        let header = r.headers()?.clone();
        let ncol = header.len();
        if ncol < 4 {
            return Err(Error::Csv("expected columns x0..,value,probability,delay".into()));
        }
        let dim = ncol - 3;
        for (i, name) in header.iter().enumerate().take(dim) {
            if name != format!("x{i}") {
                return Err(Error::Csv(format!("column {i} must be `x{i}`, got `{name}`")));
            }
        }
        if header.iter().skip(dim).collect::<Vec<_>>() != ["value", "probability", "delay"] {
            return Err(Error::Csv("last columns must be value,probability,delay".into()));
        }
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != ncol {
                return Err(Error::Csv(format!("row {line}: expected {ncol} fields")));
            }
            let row = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::Csv(format!("row {line}: bad number `{f}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("row {line} column {c}")));
            }
            rows.push(row);
        }
        let mut axes: Vec<Vec<f64>> = Vec::with_capacity(dim);
        for ax in 0..dim {
            let mut a: Vec<f64> = rows.iter().map(|r| r[ax]).collect();
            a.sort_by(f64::total_cmp);
            a.dedup();
            axes.push(a);
        }
        let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
        let total: usize = shape.iter().product();
        if total != rows.len() || shape.iter().any(|&n| n < 2) {
            return Err(Error::Csv(format!(
                "rows do not form a full grid: {} rows for shape {shape:?}",
                rows.len()
            )));
        }
        let mut value = vec![f64::NAN; total];
        let mut probability = vec![f64::NAN; total];
        let mut delay = vec![f64::NAN; total];
        for row in &rows {
            let mut flat = 0;
            for ax in 0..dim {
                let k = axes[ax]
                    .binary_search_by(|a| a.total_cmp(&row[ax]))
                    .map_err(|_| Error::Csv("coordinate lookup failed".into()))?;
                flat = flat * shape[ax] + k;
            }
            if !value[flat].is_nan() {
                return Err(Error::Csv(format!("duplicate grid point {:?}", &row[..dim])));
            }
            value[flat] = row[dim];
            probability[flat] = row[dim + 1];
            delay[flat] = row[dim + 2];
        }
        let domain = Domain::new(
            axes.iter().map(|a| a[0]).collect(),
            axes.iter().map(|a| a[a.len() - 1]).collect(),
        )?;
        Self::from_samples(domain, axes, value, Some(probability), Some(delay))
    }
}

pub(crate) fn uniform_axis(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid("grid", "at least 2 points per dimension"));
    }
    let h = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i == n - 1 { hi } else { lo + h * i as f64 })
        .collect())
}

pub(crate) fn grid_nodes(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = shape.iter().product();
    (0..total)
        .map(|flat| {
            unflatten(flat, &shape)
                .iter()
                .enumerate()
                .map(|(ax, &i)| axes[ax][i])
                .collect()
        })
        .collect()
}

pub(crate) fn unflatten(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for ax in (0..shape.len()).rev() {
        idx[ax] = flat % shape[ax];
        flat /= shape[ax];
    }
    idx
}

/// Width of the cell owned by each node: half-way to each neighbour.
pub(crate) fn dual_cell_widths(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    (0..n)
        .map(|i| {
            let left = if i == 0 { axis[0] } else { 0.5 * (axis[i - 1] + axis[i]) };
            let right = if i == n - 1 {
                axis[n - 1]
            } else {
                0.5 * (axis[i] + axis[i + 1])
            };
            right - left
        })
        .collect()
}
