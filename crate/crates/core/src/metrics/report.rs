use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::scores::{
    character_score, god_instances, irp_ratio, kre_from_instances, sheriff_rounds, vss_ratio, GodInstance, Ratio,
    ScoreParams,
};
use super::view::GameLogView;
use super::MetricsError;
use crate::game::{Camp, Role};
use crate::log::GameLog;

/// A finished game ready for scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredGame {
    pub matchup: String,
    pub params: ScoreParams,
    pub view: GameLogView,
}

impl ScoredGame {
    /// Aborted or unfinished logs are refused so they never reach a report.
    pub fn from_log(log: &GameLog, guard_literal: bool) -> Result<Self, MetricsError> {
        if let Some(reason) = log.aborted() {
            return Err(MetricsError::Aborted(reason.to_string()));
        }
        let header = log.header();
        Ok(Self {
            matchup: header.matchup.clone(),
            params: ScoreParams::from_config(&header.game_config, guard_literal),
            view: GameLogView::from_events(log.events())?,
        })
    }
}

/// One (model, matchup) row. Every present value lies in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub model_tag: String,
    pub matchup: String,
    pub games: usize,
    pub seer: Option<f64>,
    pub witch: Option<f64>,
    pub hunter: Option<f64>,
    pub guard: Option<f64>,
    pub werewolf: Option<f64>,
    pub sheriff_good: Option<f64>,
    pub sheriff_bad: Option<f64>,
    pub irp: Option<f64>,
    pub kre: Option<f64>,
    pub vss: Option<f64>,
}

impl MetricRow {
    pub const COLUMNS: [&'static str; 10] = [
        "Seer", "Witch", "Hunter", "Guard", "Werewolf", "Sheriff(good)", "Sheriff(bad)", "IRP", "KRE", "VSS",
    ];

    pub fn values(&self) -> [Option<f64>; 10] {
        [
            self.seer,
            self.witch,
            self.hunter,
            self.guard,
            self.werewolf,
            self.sheriff_good,
            self.sheriff_bad,
            self.irp,
            self.kre,
            self.vss,
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rows: Vec<MetricRow>,
}

impl MetricReport {
    pub fn row(&self, model_tag: &str, matchup: &str) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.model_tag == model_tag && r.matchup == matchup)
    }
}

#[derive(Default)]
struct Acc {
    games: BTreeSet<usize>,
    roles: BTreeMap<Role, Vec<f64>>,
    sheriff: BTreeMap<Camp, Ratio>,
    irp: Ratio,
    vss: Ratio,
    gods: Vec<GodInstance>,
    alpha_kre: Option<f64>,
}

fn mean(xs: Option<&Vec<f64>>) -> Option<f64> {
    let xs = xs.filter(|v| !v.is_empty())?;
    Some(xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Per-model rows for every matchup. Character scores are averaged over
/// the games (wolf seats, for Werewolf) where the model held the role;
/// ratio metrics pool numerators and denominators across games.
pub fn build_report(games: &[ScoredGame]) -> Result<MetricReport, MetricsError> {
    if games.is_empty() {
        return Err(MetricsError::NoGames);
    }
    let mut accs: BTreeMap<(String, String), Acc> = BTreeMap::new();
    for (gi, g) in games.iter().enumerate() {
        let v = &g.view;
        let acc = |model: &str, accs: &mut BTreeMap<(String, String), Acc>| {
            let a = accs.entry((model.to_string(), g.matchup.clone())).or_default();
            a.games.insert(gi);
            a.alpha_kre.get_or_insert(g.params.alpha_kre);
        };
        for (seat, role) in &v.roles {
            let model = v.model(*seat);
            acc(model, &mut accs);
            let a = accs.get_mut(&(model.to_string(), g.matchup.clone())).expect("inserted");
            if let Some(s) = character_score(v, *seat, &g.params) {
                a.roles.entry(*role).or_default().push(s);
            }
            a.irp.add(irp_ratio(v, *seat));
            a.vss.add(vss_ratio(v, *seat));
        }
        for god in god_instances(v, &g.params) {
            let key = (v.model(god.seat).to_string(), g.matchup.clone());
            accs.get_mut(&key).expect("every seat has a row").gods.push(god);
        }
        for sr in sheriff_rounds(v) {
            let key = (sr.model.clone(), g.matchup.clone());
            accs.get_mut(&key)
                .expect("every seat has a row")
                .sheriff
                .entry(sr.camp)
                .or_default()
                .add(sr.ratio);
        }
    }
    let rows = accs
        .into_iter()
        .map(|((model_tag, matchup), a)| MetricRow {
            model_tag,
            matchup,
            games: a.games.len(),
            seer: mean(a.roles.get(&Role::Seer)),
            witch: mean(a.roles.get(&Role::Witch)),
            hunter: mean(a.roles.get(&Role::Hunter)),
            guard: mean(a.roles.get(&Role::Guard)),
            werewolf: mean(a.roles.get(&Role::Werewolf)),
            sheriff_good: a.sheriff.get(&Camp::Good).and_then(Ratio::value),
            sheriff_bad: a.sheriff.get(&Camp::Wolf).and_then(Ratio::value),
            irp: a.irp.value(),
            kre: kre_from_instances(&a.gods, a.alpha_kre.unwrap_or(0.5)),
            vss: a.vss.value(),
        })
        .collect();
    Ok(MetricReport { rows })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "—".to_string(), |x| format!("{x:.3}"))
}

fn render(header: &[String], body: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for row in body {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

fn header(first: &str) -> Vec<String> {
    [first, "Matchup"]
        .into_iter()
        .chain(MetricRow::COLUMNS)
        .map(str::to_string)
        .collect()
}

fn body_row(label: String, row: Option<&MetricRow>, matchup: &str) -> Vec<String> {
    let values = row.map_or([None; 10], MetricRow::values);
    [label, matchup.to_string()]
        .into_iter()
        .chain(values.into_iter().map(cell))
        .collect()
}

/// Aligned plain-text table; absent cells print as "—".
pub fn render_table(report: &MetricReport) -> String {
    let body: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| body_row(r.model_tag.clone(), Some(r), &r.matchup))
        .collect();
    render(&header("Model"), &body)
}

/// Pairs each (model, matchup) row without the pool against the same row
/// with it; the pooled row is marked with a trailing `*`.
pub fn render_ablation(without: &MetricReport, with: &MetricReport) -> String {
    let keys: BTreeSet<(&str, &str)> = without
        .rows
        .iter()
        .chain(&with.rows)
        .map(|r| (r.model_tag.as_str(), r.matchup.as_str()))
        .collect();
    let mut body = Vec::new();
    for (model, matchup) in keys {
        body.push(body_row(model.to_string(), without.row(model, matchup), matchup));
        body.push(body_row(format!("{model}*"), with.row(model, matchup), matchup));
    }
    render(&header("Model"), &body)
}
