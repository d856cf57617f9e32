//! Built-in examples: printed potentials, triangulations, solutions,
//! volumes, Newton matrices and explicit polynomials.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{newton_matrix, MultiPoly, NewtonMatrix};
use crate::apoly::{zero_locus_check, ZeroLocusReport};
use crate::error::{Error, Result};
use crate::potential::{GluingSystem, PotentialExpression};
use crate::saddle::{complete_structure, SolveOptions};
use crate::triangulation::Triangulation;

const EMBEDDED: &[(&str, &str)] = &[
    ("4_1.json", include_str!("../data/catalog/4_1.json")),
    ("5_2.json", include_str!("../data/catalog/5_2.json")),
    ("pretzel_-2_3_7.json", include_str!("../data/catalog/pretzel_-2_3_7.json")),
    ("ptb_L2R.json", include_str!("../data/catalog/ptb_L2R.json")),
    ("ptb_LR3.json", include_str!("../data/catalog/ptb_LR3.json")),
    ("6_1.json", include_str!("../data/catalog/6_1.json")),
    ("6_2.json", include_str!("../data/catalog/6_2.json")),
    ("6_3.json", include_str!("../data/catalog/6_3.json")),
    ("7_2.json", include_str!("../data/catalog/7_2.json")),
    ("7_3.json", include_str!("../data/catalog/7_3.json")),
    ("7_4.json", include_str!("../data/catalog/7_4.json")),
    ("7_5.json", include_str!("../data/catalog/7_5.json")),
    ("7_6.json", include_str!("../data/catalog/7_6.json")),
    ("7_7.json", include_str!("../data/catalog/7_7.json")),
    ("K4_4.json", include_str!("../data/catalog/K4_4.json")),
    ("K5_1.json", include_str!("../data/catalog/K5_1.json")),
    ("K5_9.json", include_str!("../data/catalog/K5_9.json")),
    ("K5_12.json", include_str!("../data/catalog/K5_12.json")),
    ("K5_13.json", include_str!("../data/catalog/K5_13.json")),
    ("K5_21.json", include_str!("../data/catalog/K5_21.json")),
    ("K5_22.json", include_str!("../data/catalog/K5_22.json")),
    ("K6_10.json", include_str!("../data/catalog/K6_10.json")),
    ("K6_22.json", include_str!("../data/catalog/K6_22.json")),
    ("K6_33.json", include_str!("../data/catalog/K6_33.json")),
];

#[derive(Clone, Debug, Deserialize, PartialEq)]
pub struct PrintedEquation {
    pub num: String,
    pub den: String,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
pub struct PrintedEquations {
    pub gluing: Vec<PrintedEquation>,
    pub longitude: PrintedEquation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialSource {
    Printed,
    Triangulation,
}

#[derive(Deserialize)]
struct EntryFile {
    name: String,
    #[serde(default)]
    aliases: Vec<String>,
    kind: String,
    shape_vars: Vec<String>,
    potential: String,
    potential_source: PotentialSource,
    #[serde(default)]
    potential_source_reason: Option<String>,
    triangulation: Option<Triangulation>,
    #[serde(default)]
    word: Option<String>,
    expected_volume: f64,
    #[serde(default)]
    printed_solution: Option<serde_json::Map<String, serde_json::Value>>,
    #[serde(default)]
    newton_matrix: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    matrix_corrections: Vec<(usize, usize, i64)>,
    #[serde(default)]
    explicit_apoly: Option<String>,
    #[serde(default)]
    explicit_apoly_corrected: Option<String>,
    #[serde(default)]
    suspect_typo: bool,
    #[serde(default)]
    printed_equations: Option<PrintedEquations>,
    #[serde(default)]
    notes: Vec<String>,
}

#[derive(Deserialize)]
struct IndexFile {
    entries: Vec<IndexEntry>,
}

#[derive(Deserialize)]
struct IndexEntry {
    name: String,
    file: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub aliases: Vec<String>,
    pub kind: String,
    pub shape_vars: Vec<String>,
    pub potential_text: String,
    /// the printed potential, variables in alphabetical order then m
    pub potential: PotentialExpression,
    pub potential_source: PotentialSource,
    pub potential_source_reason: Option<String>,
    pub triangulation: Option<Triangulation>,
    pub word: Option<String>,
    pub expected_volume: f64,
    /// in the order of `shape_vars`
    pub printed_solution: Option<Vec<Complex64>>,
    pub newton_matrix: Option<NewtonMatrix>,
    /// (row, column, value) replacements for suspected misprints
    pub matrix_corrections: Vec<(usize, usize, i64)>,
    pub explicit_apoly: Option<MultiPoly>,
    pub explicit_apoly_corrected: Option<MultiPoly>,
    pub suspect_typo: bool,
    pub printed_equations: Option<PrintedEquations>,
    pub notes: Vec<String>,
}

fn schema(entry: &str, msg: impl Into<String>) -> Error {
    Error::Schema { entry: entry.to_string(), msg: msg.into() }
}

fn parse_entry(text: &str, file: &str) -> Result<CatalogEntry> {
    let f: EntryFile = serde_json::from_str(text).map_err(|e| schema(file, e.to_string()))?;
    let name = f.name.clone();
    let mut sorted = f.shape_vars.clone();
    sorted.sort();
    if sorted != f.shape_vars {
        return Err(schema(&name, "shape_vars must be sorted"));
    }
    let vars: Vec<&str> = f.shape_vars.iter().map(|s| s.as_str()).collect();
    let potential = PotentialExpression::parse(&f.potential, &vars).map_err(|e| schema(&name, e.to_string()))?;
    if !(f.expected_volume > 0.0) {
        return Err(schema(&name, "expected_volume must be positive"));
    }
    let printed_solution = match &f.printed_solution {
        None => None,
        Some(map) => {
            let mut out = Vec::new();
            for v in &f.shape_vars {
                let pair = map.get(v).and_then(|p| p.as_array()).ok_or_else(|| schema(&name, format!("solution lacks {v}")))?;
                let re = pair.first().and_then(|x| x.as_f64());
                let im = pair.get(1).and_then(|x| x.as_f64());
                match (re, im) {
                    (Some(re), Some(im)) => out.push(Complex64::new(re, im)),
                    _ => return Err(schema(&name, format!("bad solution value for {v}"))),
                }
            }
            Some(out)
        }
    };
    let newton_matrix = f.newton_matrix.map(NewtonMatrix::new).transpose().map_err(|e| schema(&name, e.to_string()))?;
    let lm = ["l", "m"];
    let poly = |s: &Option<String>| s.as_deref().map(|t| MultiPoly::parse(t, &lm)).transpose().map_err(|e| schema(&name, e.to_string()));
    let explicit_apoly = poly(&f.explicit_apoly)?;
    let explicit_apoly_corrected = poly(&f.explicit_apoly_corrected)?;
    if let Some(t) = &f.triangulation {
        t.validate().map_err(|e| schema(&name, e.to_string()))?;
    }
    if f.potential_source == PotentialSource::Triangulation && f.triangulation.is_none() {
        return Err(schema(&name, "triangulation source without triangulation"));
    }
    if let Some(m) = &newton_matrix {
        let (h, w) = m.shape();
        if f.matrix_corrections.iter().any(|&(i, j, _)| i >= h || j >= w) {
            return Err(schema(&name, "matrix correction out of range"));
        }
    }
    Ok(CatalogEntry {
        name,
        aliases: f.aliases,
        kind: f.kind,
        shape_vars: f.shape_vars,
        potential_text: f.potential,
        potential,
        potential_source: f.potential_source,
        potential_source_reason: f.potential_source_reason,
        triangulation: f.triangulation,
        word: f.word,
        expected_volume: f.expected_volume,
        printed_solution,
        newton_matrix,
        matrix_corrections: f.matrix_corrections,
        explicit_apoly,
        explicit_apoly_corrected,
        suspect_typo: f.suspect_typo,
        printed_equations: f.printed_equations,
        notes: f.notes,
    })
}

impl CatalogEntry {
    /// The potential used for computation: the printed one, or the one
    /// derived from the triangulation when the entry says so.
    pub fn working_potential(&self) -> Result<PotentialExpression> {
        match (self.potential_source, &self.triangulation) {
            (PotentialSource::Triangulation, Some(t)) => t.build_potential(),
            _ => Ok(self.potential.clone()),
        }
    }

    /// Printed solution as Newton starts for the working potential.
    pub fn start_points(&self) -> Vec<Vec<Complex64>> {
        match (self.potential_source, &self.printed_solution) {
            (PotentialSource::Printed, Some(s)) => vec![s.clone()],
            _ => Vec::new(),
        }
    }

    /// Stored matrix with the recorded corrections applied.
    pub fn corrected_matrix(&self) -> Option<NewtonMatrix> {
        let mut m = self.newton_matrix.clone()?;
        for &(i, j, v) in &self.matrix_corrections {
            m.rows[i][j] = v;
        }
        Some(m)
    }

    pub fn n_shapes(&self) -> usize {
        self.shape_vars.len()
    }

    pub fn matches(&self, key: &str) -> bool {
        self.name == key || self.aliases.iter().any(|a| a == key)
    }
}

fn data_dir() -> Option<PathBuf> {
    std::env::var_os("NZFORGE_DATA").map(PathBuf::from)
}

/// Entries from a directory holding `index.json` and one file per entry.
pub fn load_from(dir: &Path) -> Result<Vec<CatalogEntry>> {
    let read = |f: &str| std::fs::read_to_string(dir.join(f)).map_err(|e| schema(f, e.to_string()));
    let index: IndexFile = serde_json::from_str(&read("index.json")?).map_err(|e| schema("index.json", e.to_string()))?;
    let mut out = Vec::new();
    for e in &index.entries {
        let entry = parse_entry(&read(&e.file)?, &e.file)?;
        if entry.name != e.name {
            return Err(schema(&e.name, format!("file {} holds {}", e.file, entry.name)));
        }
        out.push(entry);
    }
    Ok(out)
}

/// All entries, from `NZFORGE_DATA` when set, else the embedded copy.
pub fn load() -> Result<Vec<CatalogEntry>> {
    if let Some(dir) = data_dir() {
        return load_from(&dir);
    }
    EMBEDDED.iter().map(|(f, text)| parse_entry(text, f)).collect()
}

pub fn get(name_or_alias: &str) -> Result<CatalogEntry> {
    let all = load()?;
    find(&all, name_or_alias).cloned()
}

pub fn find<'a>(all: &'a [CatalogEntry], key: &str) -> Result<&'a CatalogEntry> {
    if let Some(e) = all.iter().find(|e| e.matches(key)) {
        return Ok(e);
    }
    let mut scored: Vec<(f64, &str)> = all
        .iter()
        .flat_map(|e| std::iter::once(e.name.as_str()).chain(e.aliases.iter().map(|a| a.as_str())))
        .map(|n| (strsim::normalized_levenshtein(&n.to_lowercase(), &key.to_lowercase()), n))
        .filter(|(s, _)| *s >= 0.4)
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    Err(Error::NotFound { name: key.to_string(), close: scored.iter().take(3).map(|(_, n)| n.to_string()).collect() })
}

// ---------------------------------------------------------------------------
// printed equations against the generated ones

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationForm {
    /// num_g den_p - num_p den_g vanishes identically
    Direct,
    /// the printed ratio is the reciprocal of the generated one
    Reciprocal,
    /// match after l -> 1/l in the printed equation
    LongitudeInverted,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquationCheck {
    pub label: String,
    pub matched: Option<EquationForm>,
    /// index of the generated gluing equation that matched
    pub generated_index: Option<usize>,
    /// terms of the smallest cross-multiplied difference
    pub difference_terms: usize,
}

fn invert_var(p: &MultiPoly, idx: usize, top: u32) -> MultiPoly {
    MultiPoly::from_terms(
        p.vars(),
        p.terms().map(|(e, c)| {
            let mut e = e.clone();
            e[idx] = top - e[idx];
            (e, c.clone())
        }),
    )
}

fn compare(gn: &MultiPoly, gd: &MultiPoly, pn: &MultiPoly, pd: &MultiPoly) -> (Option<EquationForm>, usize) {
    let direct = gn.mul(pd).sub(&pn.mul(gd));
    if direct.is_zero() {
        return (Some(EquationForm::Direct), 0);
    }
    let recip = gn.mul(pn).sub(&gd.mul(pd));
    if recip.is_zero() {
        return (Some(EquationForm::Reciprocal), 0);
    }
    (None, direct.nterms().min(recip.nterms()))
}

/// Compare the printed gluing and longitude equations with the ones
/// generated from the printed potential, root-reduced at the geometric point.
pub fn check_printed_equations(entry: &CatalogEntry) -> Result<Vec<EquationCheck>> {
    let printed = entry
        .printed_equations
        .as_ref()
        .ok_or_else(|| Error::DegenerateInput(format!("{} has no printed equations", entry.name)))?;
    let opts = SolveOptions { extra_starts: entry.start_points(), ..Default::default() };
    let (_, reduced) = complete_structure(&entry.potential, &opts)?;
    let raw = GluingSystem::from_potential(&entry.potential)?;
    let mut vars: Vec<String> = entry.potential.vars.clone();
    vars.push("l".into());
    let lift = |p: &MultiPoly| p.with_vars(&vars);
    let parse = |s: &str| MultiPoly::parse(s, &vars);
    let li = vars.len() - 1;

    let mut out = Vec::new();
    for (k, pe) in printed.gluing.iter().enumerate() {
        let (pn, pd) = (parse(&pe.num)?, parse(&pe.den)?);
        let mut best = EquationCheck { label: format!("gluing {}", k + 1), matched: None, generated_index: None, difference_terms: usize::MAX };
        'search: for sys in [&reduced, &raw] {
            for (i, g) in sys.equations.iter().enumerate() {
                let (form, terms) = compare(&lift(&g.num)?, &lift(&g.den)?, &pn, &pd);
                if form.is_some() {
                    best = EquationCheck { matched: form, generated_index: Some(i), difference_terms: 0, ..best };
                    break 'search;
                }
                best.difference_terms = best.difference_terms.min(terms);
            }
        }
        out.push(best);
    }

    let (pn, pd) = (parse(&printed.longitude.num)?, parse(&printed.longitude.den)?);
    let mut best = EquationCheck { label: "longitude".into(), matched: None, generated_index: None, difference_terms: usize::MAX };
    for sys in [&reduced, &raw] {
        let lon = &sys.longitude;
        let mut e = vec![0; vars.len()];
        e[li] = lon.d;
        let (gn, gd) = (lift(&lon.eq.num)?, lift(&lon.eq.den)?.shift(&e));
        let (form, terms) = compare(&gn, &gd, &pn, &pd);
        if form.is_some() {
            best.matched = form;
            best.difference_terms = 0;
            break;
        }
        let top = pn.degree(li).max(pd.degree(li));
        let (form, terms2) = compare(&gn, &gd, &invert_var(&pn, li, top), &invert_var(&pd, li, top));
        if form.is_some() {
            best.matched = Some(EquationForm::LongitudeInverted);
            best.difference_terms = 0;
            break;
        }
        best.difference_terms = best.difference_terms.min(terms).min(terms2);
    }
    out.push(best);
    Ok(out)
}

// ---------------------------------------------------------------------------
// zero-locus check against the stored polynomial

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    NewtonMatrix,
    ExplicitPolynomial,
}

impl CatalogEntry {
    /// The stored A-polynomial as a Newton matrix; the Newton matrix wins
    /// when both are present. `corrected` applies the recorded fixes.
    pub fn reference_matrix(&self, corrected: bool) -> Result<Option<(ReferenceKind, NewtonMatrix)>> {
        if let Some(m) = if corrected { self.corrected_matrix() } else { self.newton_matrix.clone() } {
            return Ok(Some((ReferenceKind::NewtonMatrix, m)));
        }
        let poly = if corrected { self.explicit_apoly_corrected.as_ref().or(self.explicit_apoly.as_ref()) } else { self.explicit_apoly.as_ref() };
        match poly {
            Some(p) => Ok(Some((ReferenceKind::ExplicitPolynomial, newton_matrix(p)?))),
            None => Ok(None),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LocusCheck {
    pub name: String,
    pub reference: ReferenceKind,
    pub corrected: bool,
    pub report: ZeroLocusReport,
}

/// Continue the geometric solution of the working potential to `samples`
/// points with |u| <= 0.1 and evaluate the stored polynomial there.
pub fn locus_check(entry: &CatalogEntry, samples: usize, corrected: bool) -> Result<LocusCheck> {
    let (reference, matrix) = entry
        .reference_matrix(corrected)?
        .ok_or_else(|| Error::DegenerateInput(format!("{} has no stored A-polynomial", entry.name)))?;
    let v = entry.working_potential()?;
    let opts = SolveOptions { extra_starts: entry.start_points(), ..Default::default() };
    let (geo, _) = complete_structure(&v, &opts)?;
    let report = zero_locus_check(&matrix, &v, &geo, samples)?;
    let corrected = corrected && (!entry.matrix_corrections.is_empty() || entry.explicit_apoly_corrected.is_some());
    Ok(LocusCheck { name: entry.name.clone(), reference, corrected, report })
}
