//! Post-interview analysis: construct categories, construct→aesthetic
//! mappings, per-study usage counts and cross-study coverage.
//!
//! The counting unit is the participant: an aesthetic counts once per
//! participant however many of their constructs map to it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{catalog, MetricId};
use crate::rgt::{Construct, SessionExport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("unknown construct {0}")]
    UnknownConstruct(String),
    #[error("construct {construct} is tagged {category:?}; only visual mapping and composition constructs map to aesthetics")]
    NotMappable { construct: String, category: Category },
    #[error("construct {0} has no category tag from this analyst")]
    Untagged(String),
    #[error("empty analyst label")]
    EmptyAnalyst,
    #[error("empty aesthetic name")]
    EmptyAesthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    VisualMapping,
    Composition,
    DataRelated,
    VisualExperience,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::VisualMapping,
        Category::Composition,
        Category::DataRelated,
        Category::VisualExperience,
    ];

    pub fn is_mappable(self) -> bool {
        matches!(self, Category::VisualMapping | Category::Composition)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryTag {
    pub construct_id: String,
    pub category: Category,
    pub analyst: String,
}

/// A catalog aesthetic, or a free-text aesthetic outside the catalog.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aesthetic {
    Catalog(MetricId),
    Novel(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AestheticMapping {
    pub construct_id: String,
    pub aesthetic: Aesthetic,
    pub analyst: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AnalysisEvent {
    Tag(CategoryTag),
    Map(AestheticMapping),
}

/// Tags and mappings over the exported sessions of one study. Persisted as
/// its sequence of [`AnalysisEvent`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyAnalysis {
    pub label: String,
    pub sessions: Vec<SessionExport>,
    tags: BTreeMap<(String, String), Category>,
    mappings: BTreeMap<(String, String), Aesthetic>,
}

impl StudyAnalysis {
    pub fn new(label: &str, sessions: Vec<SessionExport>) -> Self {
        StudyAnalysis {
            label: label.to_string(),
            sessions,
            tags: BTreeMap::new(),
            mappings: BTreeMap::new(),
        }
    }

    pub fn constructs(&self) -> impl Iterator<Item = &Construct> {
        self.sessions.iter().flat_map(|s| s.constructs.iter())
    }

    pub fn construct(&self, id: &str) -> Option<&Construct> {
        self.constructs().find(|c| c.id == id)
    }

    /// Distinct participant labels.
    pub fn participants(&self) -> BTreeSet<&str> {
        self.sessions.iter().map(|s| s.participant.as_str()).collect()
    }

    /// Tags a construct; a second tag by the same analyst replaces the
    /// first and drops that analyst's mapping if it is no longer allowed.
    pub fn tag_construct(&mut self, construct: &str, category: Category, analyst: &str) -> Result<CategoryTag, AnalysisError> {
        if analyst.trim().is_empty() {
            return Err(AnalysisError::EmptyAnalyst);
        }
        if self.construct(construct).is_none() {
            return Err(AnalysisError::UnknownConstruct(construct.to_string()));
        }
        let key = (construct.to_string(), analyst.to_string());
        self.tags.insert(key.clone(), category);
        if !category.is_mappable() {
            self.mappings.remove(&key);
        }
        Ok(CategoryTag {
            construct_id: construct.to_string(),
            category,
            analyst: analyst.to_string(),
        })
    }

    pub fn map_construct(
        &mut self,
        construct: &str,
        aesthetic: Aesthetic,
        analyst: &str,
    ) -> Result<AestheticMapping, AnalysisError> {
        if self.construct(construct).is_none() {
            return Err(AnalysisError::UnknownConstruct(construct.to_string()));
        }
        let key = (construct.to_string(), analyst.to_string());
        let category = *self.tags.get(&key).ok_or_else(|| AnalysisError::Untagged(construct.to_string()))?;
        if !category.is_mappable() {
            return Err(AnalysisError::NotMappable {
                construct: construct.to_string(),
                category,
            });
        }
        let aesthetic = match aesthetic {
            Aesthetic::Novel(name) => {
                let name = name.trim().to_string();
                if name.is_empty() {
                    return Err(AnalysisError::EmptyAesthetic);
                }
                Aesthetic::Novel(name)
            }
            a => a,
        };
        self.mappings.insert(key, aesthetic.clone());
        Ok(AestheticMapping {
            construct_id: construct.to_string(),
            aesthetic,
            analyst: analyst.to_string(),
        })
    }

    pub fn apply(&mut self, event: &AnalysisEvent) -> Result<(), AnalysisError> {
        match event {
            AnalysisEvent::Tag(t) => self.tag_construct(&t.construct_id, t.category, &t.analyst).map(|_| ()),
            AnalysisEvent::Map(m) => self.map_construct(&m.construct_id, m.aesthetic.clone(), &m.analyst).map(|_| ()),
        }
    }

    pub fn tag(&self, construct: &str, analyst: &str) -> Option<Category> {
        self.tags.get(&(construct.to_string(), analyst.to_string())).copied()
    }

    pub fn mapping(&self, construct: &str, analyst: &str) -> Option<&Aesthetic> {
        self.mappings.get(&(construct.to_string(), analyst.to_string()))
    }

    pub fn tags(&self) -> Vec<CategoryTag> {
        self.tags
            .iter()
            .map(|((c, a), cat)| CategoryTag {
                construct_id: c.clone(),
                category: *cat,
                analyst: a.clone(),
            })
            .collect()
    }

    pub fn mappings(&self) -> Vec<AestheticMapping> {
        self.mappings
            .iter()
            .map(|((c, a), aes)| AestheticMapping {
                construct_id: c.clone(),
                aesthetic: aes.clone(),
                analyst: a.clone(),
            })
            .collect()
    }

    /// Participants with at least one construct mapped to each aesthetic.
    fn users(&self, analyst: &str) -> BTreeMap<Aesthetic, BTreeSet<&str>> {
        let mut out: BTreeMap<Aesthetic, BTreeSet<&str>> = BTreeMap::new();
        for s in &self.sessions {
            for c in &s.constructs {
                if let Some(a) = self.mapping(&c.id, analyst) {
                    let a = match a {
                        Aesthetic::Novel(name) => Aesthetic::Novel(name.to_lowercase()),
                        other => other.clone(),
                    };
                    out.entry(a).or_default().insert(s.participant.as_str());
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageRow {
    pub id: String,
    pub name: String,
    pub evaluated: bool,
    pub novel: bool,
    /// Participants per study, in study order.
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsageReport {
    pub studies: Vec<String>,
    pub participants: Vec<usize>,
    /// Catalog rows in catalog order.
    pub rows: Vec<UsageRow>,
    /// Free-text aesthetics outside the catalog, by name.
    pub uncatalogued: Vec<UsageRow>,
}

impl UsageReport {
    pub fn row(&self, id: MetricId) -> &UsageRow {
        self.rows.iter().find(|r| r.id == id.as_str()).expect("every catalog id has a row")
    }

    /// Plain-text table: name | evaluated | one column per study, with a
    /// dash for zero. Catalog novel entries and free-text aesthetics follow
    /// under their own heading.
    pub fn render_table(&self) -> String {
        let names = self
            .rows
            .iter()
            .chain(&self.uncatalogued)
            .map(|r| r.name.chars().count())
            .max()
            .unwrap_or(4)
            .max(4);
        let col = self.studies.iter().map(|s| s.chars().count()).max().unwrap_or(1).max(3);
        let mut out = String::new();
        let header = |out: &mut String, title: &str, evaluated: bool| {
            let _ = write!(out, "{title:<names$}");
            if evaluated {
                out.push_str(" | Evaluated");
            }
            for s in &self.studies {
                let _ = write!(out, " | {s:>col$}");
            }
            out.push('\n');
            let width = out.lines().last().map_or(0, |l| l.chars().count());
            out.push_str(&"-".repeat(width));
            out.push('\n');
        };
        let line = |out: &mut String, r: &UsageRow, evaluated: bool| {
            let _ = write!(out, "{:<names$}", r.name);
            if evaluated {
                let _ = write!(out, " | {:<9}", if r.evaluated { "yes" } else { "" });
            }
            for c in &r.counts {
                let cell = if *c == 0 { "–".to_string() } else { c.to_string() };
                let _ = write!(out, " | {cell:>col$}");
            }
            out.push('\n');
        };
        header(&mut out, "Name", true);
        for r in self.rows.iter().filter(|r| !r.novel) {
            line(&mut out, r, true);
        }
        out.push('\n');
        header(&mut out, "Novel", false);
        for r in self.rows.iter().filter(|r| r.novel).chain(&self.uncatalogued) {
            line(&mut out, r, false);
        }
        out
    }
}

/// Distinct participants per aesthetic and study, under `analyst`'s
/// mappings.
pub fn usage_report(studies: &[StudyAnalysis], analyst: &str) -> UsageReport {
    let users: Vec<_> = studies.iter().map(|s| s.users(analyst)).collect();
    let count = |a: &Aesthetic| -> Vec<usize> { users.iter().map(|u| u.get(a).map_or(0, |p| p.len())).collect() };
    let rows = catalog()
        .iter()
        .map(|e| UsageRow {
            id: e.id.as_str().to_string(),
            name: e.display_name.to_string(),
            evaluated: e.evaluated,
            novel: e.novel,
            counts: count(&Aesthetic::Catalog(e.id)),
        })
        .collect();
    let free: BTreeSet<&Aesthetic> = users
        .iter()
        .flat_map(|u| u.keys())
        .filter(|a| matches!(a, Aesthetic::Novel(_)))
        .collect();
    let uncatalogued = free
        .into_iter()
        .map(|a| {
            let Aesthetic::Novel(name) = a else { unreachable!() };
            UsageRow {
                id: name.clone(),
                name: name.clone(),
                evaluated: false,
                novel: true,
                counts: count(a),
            }
        })
        .collect();
    UsageReport {
        studies: studies.iter().map(|s| s.label.clone()).collect(),
        participants: studies.iter().map(|s| s.participants().len()).collect(),
        rows,
        uncatalogued,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyCoverage {
    pub study: String,
    pub participants: usize,
    /// Share of the literature aesthetics (catalog minus novel entries) used.
    pub literature_coverage: f64,
    /// Share of the empirically evaluated aesthetics used.
    pub evaluated_coverage: f64,
    /// Mean over used catalog aesthetics of users / participants.
    pub mean_usage_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproducibilityReport {
    pub studies: Vec<StudyCoverage>,
    pub used_by_all: Vec<MetricId>,
    pub used_by_some: Vec<MetricId>,
    pub used_by_none: Vec<MetricId>,
    /// Same statistic as `mean_usage_rate`, pooling participants of all
    /// studies.
    pub pooled_mean_usage_rate: f64,
    pub pooled_min_usage_rate: f64,
    pub pooled_max_usage_rate: f64,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn reproducibility_report(studies: &[StudyAnalysis], analyst: &str) -> ReproducibilityReport {
    let usage = usage_report(studies, analyst);
    let literature: Vec<&UsageRow> = usage.rows.iter().filter(|r| !r.novel).collect();
    let evaluated: Vec<&UsageRow> = usage.rows.iter().filter(|r| r.evaluated).collect();
    let per_study = (0..studies.len())
        .map(|i| {
            let p = usage.participants[i];
            let rates: Vec<f64> = usage
                .rows
                .iter()
                .filter(|r| r.counts[i] > 0)
                .map(|r| ratio(r.counts[i], p))
                .collect();
            StudyCoverage {
                study: usage.studies[i].clone(),
                participants: p,
                literature_coverage: ratio(literature.iter().filter(|r| r.counts[i] > 0).count(), literature.len()),
                evaluated_coverage: ratio(evaluated.iter().filter(|r| r.counts[i] > 0).count(), evaluated.len()),
                mean_usage_rate: if rates.is_empty() { 0.0 } else { rates.iter().sum::<f64>() / rates.len() as f64 },
            }
        })
        .collect();
    let (mut all, mut some, mut none) = (Vec::new(), Vec::new(), Vec::new());
    for (row, entry) in usage.rows.iter().zip(catalog()) {
        let used = row.counts.iter().filter(|c| **c > 0).count();
        match used {
            0 => none.push(entry.id),
            n if n == studies.len() => all.push(entry.id),
            _ => some.push(entry.id),
        }
    }
    let total: usize = usage.participants.iter().sum();
    let pooled: Vec<f64> = usage
        .rows
        .iter()
        .map(|r| r.counts.iter().sum::<usize>())
        .filter(|c| *c > 0)
        .map(|c| ratio(c, total))
        .collect();
    ReproducibilityReport {
        studies: per_study,
        used_by_all: all,
        used_by_some: some,
        used_by_none: none,
        pooled_mean_usage_rate: if pooled.is_empty() { 0.0 } else { pooled.iter().sum::<f64>() / pooled.len() as f64 },
        pooled_min_usage_rate: if pooled.is_empty() { 0.0 } else { pooled.iter().copied().fold(f64::INFINITY, f64::min) },
        pooled_max_usage_rate: pooled.iter().copied().fold(0.0, f64::max),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryDistribution {
    pub counts: BTreeMap<Category, usize>,
    pub untagged: usize,
    pub total: usize,
}

/// Constructs per category under `analyst`; counts plus `untagged` sum to
/// `total`.
pub fn category_distribution(studies: &[StudyAnalysis], analyst: &str) -> CategoryDistribution {
    let mut counts: BTreeMap<Category, usize> = Category::ALL.iter().map(|c| (*c, 0)).collect();
    let (mut untagged, mut total) = (0, 0);
    for s in studies {
        for c in s.constructs() {
            total += 1;
            match s.tag(&c.id, analyst) {
                Some(cat) => *counts.get_mut(&cat).expect("all categories present") += 1,
                None => untagged += 1,
            }
        }
    }
    CategoryDistribution { counts, untagged, total }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub construct_id: String,
    pub tags: Vec<(String, Category)>,
}

/// Constructs that analysts tagged differently.
pub fn disagreements(study: &StudyAnalysis) -> Vec<Disagreement> {
    let mut by_construct: BTreeMap<&str, Vec<(String, Category)>> = BTreeMap::new();
    for ((c, a), cat) in &study.tags {
        by_construct.entry(c.as_str()).or_default().push((a.clone(), *cat));
    }
    by_construct
        .into_iter()
        .filter(|(_, tags)| tags.iter().any(|(_, c)| *c != tags[0].1))
        .map(|(c, tags)| Disagreement {
            construct_id: c.to_string(),
            tags,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rgt::{create_study, ConstructRequest, Element, Session, StudyConfig};
    use crate::model::{Drawing, Graph, Point};

    fn tiny_study() -> crate::rgt::Study {
        let elements = (0..3)
            .map(|i| {
                let d = Drawing::straight(
                    Graph::new(2, vec![(0, 1)]).unwrap(),
                    vec![Point::new(10.0 + i as f64, 10.0), Point::new(50.0, 50.0)],
                );
                Element::generated(d).unwrap()
            })
            .collect();
        create_study(elements, StudyConfig::default()).unwrap()
    }

    fn session(id: &str, poles: &[(&str, &str)]) -> SessionExport {
        let mut s = Session::start(&tiny_study(), id, id, 1);
        let t = s.next_triad(None).unwrap();
        for (a, b) in poles {
            s.record_construct(None, &ConstructRequest::new(t.triad_id, a, b)).unwrap();
        }
        s.complete_triad(None).unwrap();
        s.export()
    }

    fn sample_study() -> StudyAnalysis {
        StudyAnalysis::new(
            "A",
            vec![
                session("p1", &[("straight edges", "bent edges"), ("few nodes", "many nodes")]),
                session("p2", &[("ugly", "beautiful"), ("no edge crossings", "many edge crossings")]),
                session("p3", &[("small faces", "huge faces"), ("no crossings", "lots of crossings")]),
            ],
        )
    }

    #[test]
    fn categories_and_mappings_follow_the_rules() {
        let mut a = sample_study();
        a.tag_construct("p1-c1", Category::VisualMapping, "x").unwrap();
        a.tag_construct("p1-c2", Category::DataRelated, "x").unwrap();
        a.tag_construct("p2-c1", Category::VisualExperience, "x").unwrap();
        a.tag_construct("p2-c2", Category::Composition, "x").unwrap();
        a.tag_construct("p3-c1", Category::Composition, "x").unwrap();
        a.tag_construct("p3-c2", Category::Composition, "x").unwrap();
        a.map_construct("p1-c1", Aesthetic::Catalog(MetricId::DegreeOfEdgeBends), "x").unwrap();
        a.map_construct("p2-c2", Aesthetic::Catalog(MetricId::NumberOfEdgeCrossings), "x").unwrap();
        a.map_construct("p3-c1", Aesthetic::Catalog(MetricId::FaceArea), "x").unwrap();
        a.map_construct("p3-c2", Aesthetic::Catalog(MetricId::NumberOfEdgeCrossings), "x").unwrap();
        assert!(matches!(
            a.map_construct("p2-c1", Aesthetic::Catalog(MetricId::Area), "x"),
            Err(AnalysisError::NotMappable { .. })
        ));
        assert_eq!(
            a.tag_construct("nope", Category::Composition, "x"),
            Err(AnalysisError::UnknownConstruct("nope".into()))
        );
        let r = usage_report(std::slice::from_ref(&a), "x");
        assert_eq!(r.row(MetricId::NumberOfEdgeCrossings).counts, vec![2]);
        assert_eq!(r.row(MetricId::FaceArea).counts, vec![1]);
        // re-tagging to a non-mappable category drops the mapping
        a.tag_construct("p3-c1", Category::VisualExperience, "x").unwrap();
        assert!(a.mapping("p3-c1", "x").is_none());
        assert_eq!(usage_report(&[a], "x").row(MetricId::FaceArea).counts, vec![0]);
    }

    #[test]
    fn empty_study_reports_zeros() {
        let a = StudyAnalysis::new("empty", vec![]);
        let u = usage_report(std::slice::from_ref(&a), "x");
        assert!(u.rows.iter().all(|r| r.counts == vec![0]));
        let r = reproducibility_report(&[a], "x");
        assert_eq!(r.studies[0].literature_coverage, 0.0);
        assert_eq!(r.studies[0].evaluated_coverage, 0.0);
        assert_eq!(r.studies[0].mean_usage_rate, 0.0);
        assert_eq!(r.pooled_min_usage_rate, 0.0);
        assert_eq!(r.used_by_none.len(), 31);
    }

    #[test]
    fn free_text_aesthetics_are_listed_separately() {
        let mut a = sample_study();
        a.tag_construct("p1-c1", Category::VisualMapping, "x").unwrap();
        a.map_construct("p1-c1", Aesthetic::Novel("Edge curve".into()), "x").unwrap();
        a.tag_construct("p2-c2", Category::Composition, "x").unwrap();
        a.map_construct("p2-c2", Aesthetic::Novel(" edge curve".into()), "x").unwrap();
        let r = usage_report(&[a], "x");
        assert_eq!(r.uncatalogued.len(), 1);
        assert_eq!(r.uncatalogued[0].counts, vec![2]);
        assert!(r.render_table().contains("edge curve"));
    }

    #[test]
    fn distribution_sums_to_construct_count_and_lists_disagreements() {
        let mut a = sample_study();
        a.tag_construct("p1-c1", Category::VisualMapping, "x").unwrap();
        a.tag_construct("p1-c1", Category::Composition, "y").unwrap();
        a.tag_construct("p2-c1", Category::VisualExperience, "x").unwrap();
        a.tag_construct("p2-c1", Category::VisualExperience, "y").unwrap();
        let d = category_distribution(&[a.clone()], "x");
        assert_eq!(d.total, 6);
        assert_eq!(d.counts.values().sum::<usize>() + d.untagged, d.total);
        let dis = disagreements(&a);
        assert_eq!(dis.len(), 1);
        assert_eq!(dis[0].construct_id, "p1-c1");
    }

    #[test]
    fn table_prints_dashes_and_exact_ones() {
        let mut a = sample_study();
        a.tag_construct("p1-c1", Category::VisualMapping, "x").unwrap();
        a.map_construct("p1-c1", Aesthetic::Catalog(MetricId::DegreeOfEdgeBends), "x").unwrap();
        let table = usage_report(&[a], "x").render_table();
        let line = table.lines().find(|l| l.starts_with("Degree of edge bends")).unwrap();
        assert!(line.ends_with("|   1"), "{line}");
        let line = table.lines().find(|l| l.starts_with("Area")).unwrap();
        assert!(line.ends_with("|   –"), "{line}");
    }
}
