use crate::error::{Error, Result};

/// `n` entities observed in `m` dimensions over `t` time steps.
///
/// Values are stored entity-major, then dimension, then time, so every
/// `(entity, dimension)` series is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    entity_ids: Vec<String>,
    dims: usize,
    len: usize,
    values: Vec<f64>,
    sample_interval: f64,
}

impl Dataset {
    /// Builds a dataset from a flat `n * m * t` buffer laid out entity, dimension, time.
    pub fn new(
        entity_ids: Vec<String>,
        dims: usize,
        len: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let n = entity_ids.len();
        if n < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 entities, got {n}"
            )));
        }
        if dims < 1 {
            return Err(Error::InvalidDataset("need at least 1 dimension".into()));
        }
        if len < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 time steps, got {len}"
            )));
        }
        if values.len() != n * dims * len {
            return Err(Error::InvalidDataset(format!(
                "expected {} values for {n} x {dims} x {len}, got {}",
                n * dims * len,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let per_entity = dims * len;
            let entity = &entity_ids[pos / per_entity];
            let step = pos % len;
            return Err(Error::InvalidDataset(format!(
                "non-finite value for entity `{entity}` at step {step}"
            )));
        }
        Ok(Dataset {
            entity_ids,
            dims,
            len,
            values,
            sample_interval: 1.0,
        })
    }

    /// Builds a dataset from per-entity series, each given as `m` rows of `t` values.
    pub fn from_series(entity_ids: Vec<String>, series: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if series.len() != entity_ids.len() {
            return Err(Error::InvalidDataset(format!(
                "{} ids but {} series",
                entity_ids.len(),
                series.len()
            )));
        }
        let dims = series.first().map_or(0, Vec::len);
        let len = series
            .first()
            .and_then(|s| s.first())
            .map_or(0, Vec::len);
        let mut values = Vec::with_capacity(series.len() * dims * len);
        for (id, entity) in entity_ids.iter().zip(&series) {
            if entity.len() != dims || entity.iter().any(|row| row.len() != len) {
                return Err(Error::InvalidDataset(format!(
                    "entity `{id}` is not {dims} x {len}"
                )));
            }
            for row in entity {
                values.extend_from_slice(row);
            }
        }
        Dataset::new(entity_ids, dims, len, values)
    }

    pub fn with_sample_interval(mut self, interval: f64) -> Result<Self> {
        if !(interval.is_finite() && interval > 0.0) {
            return Err(Error::InvalidDataset(format!(
                "sample interval must be positive, got {interval}"
            )));
        }
        self.sample_interval = interval;
        Ok(self)
    }

    pub fn entity_ids(&self) -> &[String] {
        &self.entity_ids
    }

    /// Number of entities `n`.
    pub fn n(&self) -> usize {
        self.entity_ids.len()
    }

    /// Number of dimensions `m`.
    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of time steps `t`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The full series of one entity in one dimension.
    pub fn series(&self, entity: usize, dim: usize) -> &[f64] {
        let start = (entity * self.dims + dim) * self.len;
        &self.values[start..start + self.len]
    }

    pub fn value(&self, entity: usize, dim: usize, step: usize) -> f64 {
        self.values[(entity * self.dims + dim) * self.len + step]
    }

    /// Planar position of an entity; only meaningful when `m == 2`.
    pub fn point(&self, entity: usize, step: usize) -> [f64; 2] {
        [self.value(entity, 0, step), self.value(entity, 1, step)]
    }

    /// Returns a copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let values = self.values.iter().map(|v| v * factor).collect();
        Dataset::new(self.entity_ids.clone(), self.dims, self.len, values)?
            .with_sample_interval(self.sample_interval)
    }
}

/// Scalar speed of every entity between consecutive steps, an `n x (t - 1)` matrix.
///
/// Row `i`, column `j` holds the Euclidean norm over all dimensions of the
/// displacement from step `j` to `j + 1`, divided by the sample interval.
pub fn velocity_matrix(dataset: &Dataset) -> Vec<Vec<f64>> {
    let steps = dataset.len() - 1;
    let dt = dataset.sample_interval();
    (0..dataset.n())
        .map(|entity| {
            (0..steps)
                .map(|j| {
                    let sq: f64 = (0..dataset.dims())
                        .map(|d| {
                            let s = dataset.series(entity, d);
                            let dv = (s[j + 1] - s[j]) / dt;
                            dv * dv
                        })
                        .sum();
                    sq.sqrt()
                })
                .collect()
        })
        .collect()
}
