//! CSV ingestion and export of datasets.
//!
//! The canonical layout is long format, one row per entity and time step:
//! `entity_id,time,dim_1[,dim_2,...]`. A wide layout for one-dimensional data
//! (`time,<id_1>,<id_2>,...`) is accepted on request.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::Dataset;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestOptions {
    /// Read the wide single-dimension layout instead of long format.
    pub wide: bool,
    /// Fill interior runs of at most this many missing steps by linear
    /// interpolation. 0 disables gap filling.
    pub max_gap: usize,
}

pub fn ingest_csv(path: &Path, options: IngestOptions) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, options)
}

pub fn read_csv<R: Read>(input: R, options: IngestOptions) -> Result<Dataset> {
    let table = if options.wide {
        read_wide(input)?
    } else {
        read_long(input)?
    };
    table.into_dataset(options.max_gap)
}

/// Observations keyed by entity, before shape validation.
struct Table {
    dims: usize,
    ids: Vec<String>,
    // per entity: time label -> (time value, values)
    rows: Vec<HashMap<String, (f64, Vec<f64>)>>,
}

fn parse_number(cell: &str, line: u64, what: &str) -> Result<f64> {
    let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("{what}: `{cell}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("{what}: non-finite value `{cell}`"),
        });
    }
    Ok(v)
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

impl Table {
    fn new(dims: usize) -> Self {
        Table {
            dims,
            ids: Vec::new(),
            rows: Vec::new(),
        }
    }

    fn insert(&mut self, entity: &str, time: &str, t: f64, values: Vec<f64>, index: &mut HashMap<String, usize>) -> Result<()> {
        let e = *index.entry(entity.to_string()).or_insert_with(|| {
            self.ids.push(entity.to_string());
            self.rows.push(HashMap::new());
            self.ids.len() - 1
        });
        if self.rows[e].insert(time.to_string(), (t, values)).is_some() {
            return Err(Error::DuplicateKey {
                entity: entity.to_string(),
                time: time.to_string(),
            });
        }
        Ok(())
    }

    fn into_dataset(self, max_gap: usize) -> Result<Dataset> {
        // the time grid is the union of all observed time stamps
        let mut grid: Vec<(f64, String)> = Vec::new();
        let mut seen: HashMap<String, ()> = HashMap::new();
        for rows in &self.rows {
            for (label, (t, _)) in rows {
                if seen.insert(label.clone(), ()).is_none() {
                    grid.push((*t, label.clone()));
                }
            }
        }
        grid.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = grid.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDataset(format!(
                "time stamps `{}` and `{}` denote the same instant",
                w[0].1, w[1].1
            )));
        }
        let len = grid.len();
        let n = self.ids.len();
        let mut values = vec![0.0; n * self.dims * len];
        for (e, rows) in self.rows.iter().enumerate() {
            let mut present = vec![false; len];
            for (k, (_, label)) in grid.iter().enumerate() {
                if let Some((_, v)) = rows.get(label) {
                    present[k] = true;
                    for d in 0..self.dims {
                        values[(e * self.dims + d) * len + k] = v[d];
                    }
                }
            }
            fill_gaps(&self.ids[e], &grid, &present, max_gap, &mut values[e * self.dims * len..(e + 1) * self.dims * len], self.dims)?;
        }
        let interval = sample_interval(&grid)?;
        Dataset::new(self.ids, self.dims, len, values)?.with_sample_interval(interval)
    }
}

/// Linear interpolation over interior gaps of at most `max_gap` steps.
fn fill_gaps(
    entity: &str,
    grid: &[(f64, String)],
    present: &[bool],
    max_gap: usize,
    values: &mut [f64],
    dims: usize,
) -> Result<()> {
    let len = grid.len();
    let ragged = |k: usize| Error::RaggedSeries {
        entity: entity.to_string(),
        time: grid[k].1.clone(),
    };
    let mut k = 0;
    while k < len {
        if present[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < len && !present[k] {
            k += 1;
        }
        if start == 0 || k == len || k - start > max_gap {
            return Err(ragged(start));
        }
        let (before, after) = (start - 1, k);
        let (t0, t1) = (grid[before].0, grid[after].0);
        for gap in start..k {
            let w = (grid[gap].0 - t0) / (t1 - t0);
            for d in 0..dims {
                let row = &mut values[d * len..(d + 1) * len];
                row[gap] = row[before] + w * (row[after] - row[before]);
            }
        }
    }
    Ok(())
}

/// Common spacing of the time grid; 1 when it is not uniform within 1e-9.
fn sample_interval(grid: &[(f64, String)]) -> Result<f64> {
    let first = grid[1].0 - grid[0].0;
    let uniform = grid
        .windows(2)
        .all(|w| ((w[1].0 - w[0].0) - first).abs() <= 1e-9 * first.abs().max(1.0));
    Ok(if uniform && first > 0.0 { first } else { 1.0 })
}

fn read_long<R: Read>(input: R) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers()?.clone();
    if header.len() < 3 || &header[0] != "entity_id" || &header[1] != "time" {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `entity_id,time,dim_1[,...]`, got `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let dims = header.len() - 2;
    let mut table = Table::new(dims);
    let mut index = HashMap::new();
    for record in reader.records() {
        let record = record?;
        let line = line_of(&record);
        let t = parse_number(&record[1], line, "time")?;
        let values = (0..dims)
            .map(|d| parse_number(&record[d + 2], line, &header[d + 2]))
            .collect::<Result<Vec<_>>>()?;
        table.insert(&record[0], &record[1], t, values, &mut index)?;
    }
    Ok(table)
}

fn read_wide<R: Read>(input: R) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers()?.clone();
    if header.len() < 2 || &header[0] != "time" {
        return Err(Error::Parse {
            line: 1,
            message: "expected header `time,<entity_1>[,...]`".into(),
        });
    }
    let mut table = Table::new(1);
    let mut index = HashMap::new();
    for record in reader.records() {
        let record = record?;
        let line = line_of(&record);
        let t = parse_number(&record[0], line, "time")?;
        for (c, id) in header.iter().enumerate().skip(1) {
            // an empty cell is a missing observation
            if record[c].is_empty() {
                continue;
            }
            let v = parse_number(&record[c], line, id)?;
            table.insert(id, &record[0], t, vec![v], &mut index)?;
        }
    }
    Ok(table)
}

/// Writes `dataset` in long format. Time stamps are step indices scaled by
/// the sample interval; values use the shortest exact decimal form.
pub fn write_dataset_csv<W: Write>(dataset: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["entity_id".to_string(), "time".to_string()];
    header.extend((1..=dataset.dims()).map(|d| format!("dim_{d}")));
    w.write_record(&header)?;
    let interval = dataset.sample_interval();
    for (e, id) in dataset.entity_ids().iter().enumerate() {
        for k in 0..dataset.len() {
            let time = if interval == 1.0 {
                k.to_string()
            } else {
                (k as f64 * interval).to_string()
            };
            let mut row = vec![id.clone(), time];
            row.extend((0..dataset.dims()).map(|d| dataset.value(e, d, k).to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn save_dataset_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset_csv(dataset, std::io::BufWriter::new(file))
}
