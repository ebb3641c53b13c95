//! Retrieval metrics: ranking by cosine similarity, CMC top-k, mAP, and
//! mAP@R, with a per-query-year breakdown.
//!
//! A gallery item is relevant to a query when it belongs to the same
//! subject. Queries without any relevant gallery item are excluded from
//! every metric and counted separately.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::vector::{dot, UnitVector};

#[derive(Debug, Clone, PartialEq)]
pub struct GalleryItem {
    pub embedding: UnitVector,
    pub subject: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub embedding: UnitVector,
    pub subject: usize,
    pub year: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct RetrievalCase<'a> {
    pub query: &'a Query,
    pub gallery: &'a [GalleryItem],
}

/// Gallery indices by descending similarity, ties by ascending index.
pub fn rank_gallery(case: &RetrievalCase<'_>) -> Vec<usize> {
    let q = case.query.embedding.as_slice();
    let sims: Vec<f64> = case.gallery.iter().map(|g| dot(q, g.embedding.as_slice())).collect();
    let mut order: Vec<usize> = (0..sims.len()).collect();
    order.sort_by(|&a, &b| sims[b].total_cmp(&sims[a]).then(a.cmp(&b)));
    order
}

/// Relevance flags in ranked order.
pub fn ranked_relevance(case: &RetrievalCase<'_>) -> Vec<bool> {
    rank_gallery(case)
        .into_iter()
        .map(|i| case.gallery[i].subject == case.query.subject)
        .collect()
}

/// Average precision over all relevant ranks; `None` without relevant items.
pub fn average_precision(relevance: &[bool]) -> Option<f64> {
    let r = relevance.iter().filter(|x| **x).count();
    if r == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &rel) in relevance.iter().enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Some(sum / r as f64)
}

/// Average precision truncated at rank `R`, the number of relevant items.
pub fn average_precision_at_r(relevance: &[bool]) -> Option<f64> {
    let r = relevance.iter().filter(|x| **x).count();
    if r == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &rel) in relevance.iter().take(r).enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Some(sum / r as f64)
}

pub fn hit_at_k(relevance: &[bool], k: usize) -> bool {
    relevance.iter().take(k).any(|x| *x)
}

fn mean_over_cases(cases: &[RetrievalCase<'_>], score: impl Fn(&[bool]) -> Option<f64>) -> Result<f64> {
    if cases.is_empty() {
        return Err(Error::EmptyInput);
    }
    let scores: Vec<f64> = cases.iter().filter_map(|c| score(&ranked_relevance(c))).collect();
    if scores.is_empty() {
        return Err(Error::NoRelevantItems);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

pub fn cmc_top_k(cases: &[RetrievalCase<'_>], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::ConfigInvalid {
            field: "k",
            reason: "must be at least 1".into(),
        });
    }
    mean_over_cases(cases, |rel| {
        rel.iter().any(|x| *x).then(|| if hit_at_k(rel, k) { 1.0 } else { 0.0 })
    })
}

pub fn mean_average_precision(cases: &[RetrievalCase<'_>]) -> Result<f64> {
    mean_over_cases(cases, average_precision)
}

pub fn map_at_r(cases: &[RetrievalCase<'_>]) -> Result<f64> {
    mean_over_cases(cases, average_precision_at_r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(untagged)]
pub enum YearGroup {
    Year(usize),
    #[serde(serialize_with = "serialize_all")]
    All,
}

fn serialize_all<S: serde::Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str("All")
}

impl std::fmt::Display for YearGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            YearGroup::Year(y) => write!(f, "{y}"),
            YearGroup::All => f.write_str("All"),
        }
    }
}

/// Metrics for one query group. Metrics are `None` when every query in the
/// group was excluded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearRow {
    pub year: YearGroup,
    /// Queries that were scored.
    pub n_queries: usize,
    /// Queries skipped for lack of a relevant gallery item.
    #[serde(skip)]
    pub excluded: usize,
    pub map: Option<f64>,
    pub map_at_r: Option<f64>,
    pub cmc1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YearReport {
    /// One row per query year (ascending), then the pooled `All` row.
    pub rows: Vec<YearRow>,
    pub excluded: usize,
    /// Year groups with no scorable query.
    pub absent_groups: usize,
}

impl YearReport {
    pub fn row(&self, year: YearGroup) -> Option<&YearRow> {
        self.rows.iter().find(|r| r.year == year)
    }

    pub fn all(&self) -> &YearRow {
        self.rows.last().expect("report always has an All row")
    }
}

struct Scores {
    ap: f64,
    ap_r: f64,
    hit1: f64,
}

fn summarize(year: YearGroup, scores: &[Scores], excluded: usize) -> YearRow {
    let n = scores.len();
    let mean = |f: fn(&Scores) -> f64| (n > 0).then(|| scores.iter().map(f).sum::<f64>() / n as f64);
    YearRow {
        year,
        n_queries: n,
        excluded,
        map: mean(|s| s.ap),
        map_at_r: mean(|s| s.ap_r),
        cmc1: mean(|s| s.hit1),
    }
}

/// Scores every query against `gallery`, grouped by query year and pooled.
pub fn evaluate_by_year(queries: &[Query], gallery: &[GalleryItem]) -> Result<YearReport> {
    if queries.is_empty() || gallery.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut groups: BTreeMap<usize, (Vec<Scores>, usize)> = BTreeMap::new();
    for q in queries {
        let entry = groups.entry(q.year).or_default();
        let rel = ranked_relevance(&RetrievalCase { query: q, gallery });
        match (average_precision(&rel), average_precision_at_r(&rel)) {
            (Some(ap), Some(ap_r)) => entry.0.push(Scores {
                ap,
                ap_r,
                hit1: if hit_at_k(&rel, 1) { 1.0 } else { 0.0 },
            }),
            _ => entry.1 += 1,
        }
    }
    let mut rows = Vec::with_capacity(groups.len() + 1);
    let mut pooled = Vec::new();
    let mut excluded = 0;
    for (year, (scores, skipped)) in groups {
        rows.push(summarize(YearGroup::Year(year), &scores, skipped));
        excluded += skipped;
        pooled.extend(scores);
    }
    let absent_groups = rows.iter().filter(|r| r.n_queries == 0).count();
    rows.push(summarize(YearGroup::All, &pooled, excluded));
    Ok(YearReport {
        rows,
        excluded,
        absent_groups,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Machine-readable report, metrics in `[0, 1]`, absent metrics left empty.
pub fn write_report_csv<W: Write>(report: &YearReport, mut out: W) -> Result<()> {
    writeln!(out, "year,n_queries,map,map_at_r,cmc1")?;
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.year,
            r.n_queries,
            opt(r.map),
            opt(r.map_at_r),
            opt(r.cmc1)
        )?;
    }
    Ok(())
}

/// Human-readable table with percentages to one decimal.
pub fn format_report_table(report: &YearReport) -> String {
    let pct = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{:.1}", 100.0 * x));
    let mut s = format!(
        "{:>6} {:>9} {:>7} {:>9} {:>7}\n",
        "year", "n_queries", "mAP", "mAP@R", "CMC@1"
    );
    for r in &report.rows {
        s.push_str(&format!(
            "{:>6} {:>9} {:>7} {:>9} {:>7}\n",
            r.year.to_string(),
            r.n_queries,
            pct(r.map),
            pct(r.map_at_r),
            pct(r.cmc1)
        ));
    }
    if report.excluded > 0 {
        s.push_str(&format!(
            "warning: {} queries without a relevant gallery item were excluded\n",
            report.excluded
        ));
    }
    s
}
