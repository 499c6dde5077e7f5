//! Village tables: the record types, the CSV reader/writer and a synthetic generator.

pub mod synth;

use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use synth::{generate_synthetic, generate_synthetic_detailed, SynthParams, SyntheticData};

pub const CSV_HEADER: &str = "id,lat,lon,label,population,poor_population";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Poor,
    NonPoor,
    Unknown,
}

impl Label {
    /// Class index used by the classifier: Poor is 0, NonPoor is 1.
    pub fn class_index(self) -> Option<usize> {
        match self {
            Label::Poor => Some(0),
            Label::NonPoor => Some(1),
            Label::Unknown => None,
        }
    }

    pub fn from_class_index(idx: usize) -> Label {
        if idx == 0 {
            Label::Poor
        } else {
            Label::NonPoor
        }
    }

    pub fn is_known(self) -> bool {
        self != Label::Unknown
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Poor => "poor",
            Label::NonPoor => "non_poor",
            Label::Unknown => "unknown",
        }
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "poor" => Ok(Label::Poor),
            "non_poor" => Ok(Label::NonPoor),
            "unknown" => Ok(Label::Unknown),
            other => Err(format!(
                "unknown label `{other}` (expected poor, non_poor or unknown)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VillageRecord {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
    pub label: Label,
    pub population: Option<u64>,
    pub poor_population: Option<u64>,
}

impl VillageRecord {
    pub fn new(id: impl Into<String>, lat: f64, lon: f64, label: Label) -> Self {
        VillageRecord {
            id: id.into(),
            lat,
            lon,
            label,
            population: None,
            poor_population: None,
        }
    }

    pub fn coords(&self) -> (f64, f64) {
        (self.lat, self.lon)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(-90.0..=90.0).contains(&self.lat) {
            return Err(format!("latitude {} out of range [-90, 90]", self.lat));
        }
        if !(-180.0..=180.0).contains(&self.lon) {
            return Err(format!("longitude {} out of range [-180, 180]", self.lon));
        }
        if let (Some(total), Some(poor)) = (self.population, self.poor_population) {
            if poor > total {
                return Err(format!("poor_population {poor} exceeds population {total}"));
            }
        }
        Ok(())
    }
}

/// An ordered set of villages. The position of a record is its node index everywhere downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub records: Vec<VillageRecord>,
}

impl Dataset {
    /// Validates every record and id uniqueness.
    pub fn new(name: impl Into<String>, records: Vec<VillageRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            r.validate()
                .map_err(|msg| Error::invalid(format!("village `{}`: {msg}", r.id)))?;
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
        }
        Ok(Dataset {
            name: name.into(),
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn coords(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(VillageRecord::coords).collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.label == label).count()
    }

    pub fn require_labeled(&self) -> Result<()> {
        if self.records.iter().any(|r| r.label.is_known()) {
            Ok(())
        } else {
            Err(Error::invalid("dataset has no labeled villages"))
        }
    }

    /// Header `id,lat,lon,label`, optionally followed by `population,poor_population`.
    /// Fields may be quoted; surrounding whitespace is ignored.
    pub fn parse_csv(name: &str, text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = reader.records();
        let line_of = |r: &csv::StringRecord| r.position().map_or(0, |p| p.line() as usize);
        let csv_err = |e: csv::Error| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse {
                line,
                msg: e.to_string(),
            }
        };
        let header = match rows.next() {
            None => return Err(Error::EmptyDataset),
            Some(h) => h.map_err(csv_err)?,
        };
        let columns: Vec<&str> = header.iter().collect();
        let expected: Vec<&str> = CSV_HEADER.split(',').collect();
        if !(columns == expected[..4] || columns == expected) {
            return Err(Error::Parse {
                line: 1,
                msg: format!(
                    "expected header `id,lat,lon,label[,population,poor_population]`, got `{}`",
                    columns.join(",")
                ),
            });
        }

        let mut records = Vec::new();
        let mut seen = HashSet::new();
        for row in rows {
            let row = row.map_err(csv_err)?;
            let line = line_of(&row);
            if row.iter().all(str::is_empty) {
                continue;
            }
            if row.len() != columns.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {} fields, found {}", columns.len(), row.len()),
                });
            }
            let perr = |msg: String| Error::Parse { line, msg };
            let lat: f64 = row[1]
                .parse()
                .map_err(|_| perr(format!("bad latitude `{}`", &row[1])))?;
            let lon: f64 = row[2]
                .parse()
                .map_err(|_| perr(format!("bad longitude `{}`", &row[2])))?;
            let label: Label = row[3].parse().map_err(perr)?;
            let opt = |s: &str, what: &str| -> Result<Option<u64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad {what} `{s}`"),
                    })
                }
            };
            let (population, poor_population) = if row.len() == 6 {
                (
                    opt(&row[4], "population")?,
                    opt(&row[5], "poor_population")?,
                )
            } else {
                (None, None)
            };
            let rec = VillageRecord {
                id: row[0].to_string(),
                lat,
                lon,
                label,
                population,
                poor_population,
            };
            rec.validate().map_err(|msg| Error::Parse { line, msg })?;
            if !seen.insert(rec.id.clone()) {
                return Err(Error::DuplicateId(rec.id));
            }
            records.push(rec);
        }
        Dataset::new(name, records)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::with_capacity(48 * (self.len() + 1)));
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        let write = |w: &mut csv::Writer<Vec<u8>>| -> csv::Result<()> {
            w.write_record(CSV_HEADER.split(','))?;
            for r in &self.records {
                w.write_record([
                    r.id.clone(),
                    r.lat.to_string(),
                    r.lon.to_string(),
                    r.label.as_str().to_string(),
                    opt(r.population),
                    opt(r.poor_population),
                ])?;
            }
            Ok(())
        };
        write(&mut w).expect("writing to memory");
        String::from_utf8(w.into_inner().expect("flushing to memory")).expect("records are UTF-8")
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::parse_csv(&name, &text)
}

pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, dataset.to_csv()).map_err(|e| Error::io(path, e))
}
