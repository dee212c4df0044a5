//! Scenario files: a sectioned key-value text format.
//!
//! ```text
//! # comment
//! [grid]
//! n_cells = 256
//! x_left = 0.0
//! x_right = 1.0
//!
//! [profiles]        # expression strings in x
//! K = 2 + 0.5*cos(pi*x)
//! P = 1 + 0.5*cos(pi*x)
//! Q = 1
//! r = 1
//! a = 1
//!
//! [species_u]
//! d = 1.0
//! r_mult = 1.0
//!
//! [species_v]
//! d = 1.0
//! r_mult = 1.0
//!
//! [init]            # expression, or the presets `default` / `random`
//! u0 = default
//! v0 = default
//!
//! [stepper]
//! dt = 1e-3
//! t_end = 5000
//! tol_steady = 1e-9
//! record_every = 1000
//!
//! [run]
//! seed = 42
//! outputs = timeseries,profiles
//! ```
//!
//! `default` initial data is `0.3 K` for u and `0.3 K + 0.01 K cos(pi x)` for
//! v; `random` draws per-cell uniform values in `[0.2 K, 0.8 K]` from the
//! ChaCha stream seeded by `[run] seed`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{parse_profile, Grid1D, SpatialField};
use crate::dynamics::{Scenario, SpeciesParams, StepperConfig};
use crate::error::{Error, Result};

/// Raw parsed document: ordered sections of key/value pairs.
#[derive(Debug, Clone, Default)]
pub struct ScenarioDoc {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl ScenarioDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = ScenarioDoc::default();
        let mut current: Option<usize> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(idx) => &raw[..idx],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                doc.sections.push((name.trim().to_string(), Vec::new()));
                current = Some(doc.sections.len() - 1);
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(Error::Scenario {
                    key: format!("line {}", lineno + 1),
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let key = line[..eq].trim().to_string();
            let value = line[eq + 1..].trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(Error::Scenario {
                    key: format!("line {}", lineno + 1),
                    message: "empty key or value".into(),
                });
            }
            let Some(idx) = current else {
                return Err(Error::Scenario {
                    key: key.clone(),
                    message: "key appears before any [section] header".into(),
                });
            };
            doc.sections[idx].1.push((key, value));
        }
        Ok(doc)
    }

    pub fn get(&self, section: &str, key: &str) -> Result<&str> {
        self.sections
            .iter()
            .find(|(name, _)| name == section)
            .and_then(|(_, entries)| {
                entries
                    .iter()
                    .rev()
                    .find(|(k, _)| k == key)
                    .map(|(_, v)| v.as_str())
            })
            .ok_or_else(|| Error::Scenario {
                key: format!("[{section}] {key}"),
                message: "required key missing".into(),
            })
    }

    pub fn get_opt(&self, section: &str, key: &str) -> Option<&str> {
        self.get(section, key).ok()
    }

    /// Replace or insert a key; used by CLI overrides.
    pub fn set(&mut self, section: &str, key: &str, value: String) {
        if let Some((_, entries)) = self.sections.iter_mut().find(|(name, _)| name == section) {
            entries.push((key.to_string(), value));
        } else {
            self.sections
                .push((section.to_string(), vec![(key.to_string(), value)]));
        }
    }

    /// Canonical text of the resolved document; hashed into the manifest.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        for (name, entries) in &self.sections {
            out.push_str(&format!("[{name}]\n"));
            let mut seen: Vec<&str> = Vec::new();
            for (k, _) in entries {
                if !seen.contains(&k.as_str()) {
                    seen.push(k);
                }
            }
            for k in seen {
                let v = entries.iter().rev().find(|(key, _)| key == k).unwrap();
                out.push_str(&format!("{k} = {}\n", v.1));
            }
        }
        out
    }
}

fn parse_num<T: std::str::FromStr>(doc: &ScenarioDoc, section: &str, key: &str) -> Result<T> {
    let raw = doc.get(section, key)?;
    raw.parse().map_err(|_| Error::Scenario {
        key: format!("[{section}] {key}"),
        message: format!("cannot parse `{raw}`"),
    })
}

fn sample_profile(doc: &ScenarioDoc, grid: Grid1D, section: &str, key: &str) -> Result<SpatialField> {
    let text = doc.get(section, key)?;
    let expr = parse_profile(text).map_err(|e| Error::Scenario {
        key: format!("[{section}] {key}"),
        message: e.to_string(),
    })?;
    SpatialField::sample(&expr, grid).map_err(|e| Error::Scenario {
        key: format!("[{section}] {key}"),
        message: e.to_string(),
    })
}

/// Settings from the `[run]` section.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub seed: u64,
    pub outputs: Vec<String>,
}

/// A scenario file resolved against its grid, ready to run.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub scenario: Scenario,
    pub run: RunSettings,
    /// FNV-1a hash of the canonical resolved document.
    pub hash: u64,
}

/// Resolve a parsed document into a validated scenario.
pub fn resolve(doc: &ScenarioDoc) -> Result<ResolvedScenario> {
    let n_cells: usize = parse_num(doc, "grid", "n_cells")?;
    let x_left: f64 = parse_num(doc, "grid", "x_left")?;
    let x_right: f64 = parse_num(doc, "grid", "x_right")?;
    let grid = Grid1D::new(n_cells, x_left, x_right)?;

    let k = sample_profile(doc, grid, "profiles", "K")?;
    let p = sample_profile(doc, grid, "profiles", "P")?;
    let q = sample_profile(doc, grid, "profiles", "Q")?;
    let r = sample_profile(doc, grid, "profiles", "r")?;
    let a = sample_profile(doc, grid, "profiles", "a")?;
    for (f, key) in [(&k, "K"), (&p, "P"), (&q, "Q"), (&r, "r"), (&a, "a")] {
        f.require_positive(key).map_err(|e| Error::Scenario {
            key: format!("[profiles] {key}"),
            message: e.to_string(),
        })?;
    }

    let species_u = SpeciesParams {
        strategy: p,
        d: parse_num(doc, "species_u", "d")?,
        r_mult: parse_num(doc, "species_u", "r_mult")?,
    };
    let species_v = SpeciesParams {
        strategy: q,
        d: parse_num(doc, "species_v", "d")?,
        r_mult: parse_num(doc, "species_v", "r_mult")?,
    };

    let stepper = StepperConfig {
        dt: parse_num(doc, "stepper", "dt")?,
        t_end: parse_num(doc, "stepper", "t_end")?,
        tol_steady: parse_num(doc, "stepper", "tol_steady")?,
        record_every: parse_num(doc, "stepper", "record_every")?,
    };

    let seed: u64 = parse_num(doc, "run", "seed")?;
    let outputs = doc
        .get_opt("run", "outputs")
        .unwrap_or("timeseries,profiles")
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u0 = initial_field(doc, grid, &k, "u0", true, &mut rng)?;
    let v0 = initial_field(doc, grid, &k, "v0", false, &mut rng)?;

    let scenario = Scenario {
        grid,
        carrying_capacity: k,
        growth: r,
        advection: a,
        species_u,
        species_v,
        u0,
        v0,
        stepper,
    };
    scenario.validate()?;
    let hash = crate::report::fnv1a(doc.canonical_text().as_bytes());
    Ok(ResolvedScenario {
        scenario,
        run: RunSettings { seed, outputs },
        hash,
    })
}

fn initial_field(
    doc: &ScenarioDoc,
    grid: Grid1D,
    k: &SpatialField,
    key: &str,
    is_u: bool,
    rng: &mut ChaCha8Rng,
) -> Result<SpatialField> {
    match doc.get("init", key)? {
        "default" => Ok(if is_u {
            k.scale(0.3)
        } else {
            // cosine perturbation breaks the u/v symmetry
            let mut vals = Vec::with_capacity(grid.n_cells());
            for (i, x) in grid.centers().enumerate() {
                let kv = k.values()[i];
                vals.push(0.3 * kv + 0.01 * kv * (std::f64::consts::PI * x).cos());
            }
            SpatialField::new(grid, vals)?
        }),
        "random" => {
            let vals: Vec<f64> = k
                .values()
                .iter()
                .map(|&kv| kv * (0.2 + 0.6 * rng.gen::<f64>()))
                .collect();
            Ok(SpatialField::new(grid, vals)?)
        }
        _ => sample_profile(doc, grid, "init", key),
    }
}

/// Parse and resolve a scenario from text.
pub fn from_str(text: &str) -> Result<ResolvedScenario> {
    resolve(&ScenarioDoc::parse(text)?)
}

/// Parse and resolve a scenario file.
pub fn from_file(path: &std::path::Path) -> Result<ResolvedScenario> {
    let text = std::fs::read_to_string(path)?;
    from_str(&text)
}
