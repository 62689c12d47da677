use czreach::acceptance::{criterion_ids, run_criterion, CriterionReport, Tolerances, DEFAULT_SEED};
use serde::Serialize;

use crate::config::{self, ValidateConfig};
use crate::failure::Failure;
use crate::Common;

#[derive(Serialize)]
struct ReportDoc<'a> {
    seed: u64,
    tolerances: &'a Tolerances,
    passed: bool,
    criteria: &'a [CriterionReport],
}

/// Runs the suite; `Ok(false)` when some criterion fails.
pub fn cmd(common: &Common) -> Result<bool, Failure> {
    let cfg: ValidateConfig = match &common.config {
        Some(path) => config::load(path)?,
        None => ValidateConfig::default(),
    };
    let ids = criterion_ids();
    for (i, id) in cfg.only.iter().enumerate() {
        if !ids.contains(id) {
            return Err(Failure::schema(format!("only[{i}]"), format!("no criterion {id}; ids are 1..={}", ids.len())));
        }
    }
    let seed = common.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let out = crate::output::OutDir::create(&crate::out_dir(common, cfg.out.as_deref()))?;

    let mut reports = Vec::new();
    for id in ids.into_iter().filter(|id| cfg.only.is_empty() || cfg.only.contains(id)) {
        let r = run_criterion(id, &cfg.tolerances, seed)?;
        println!("{}", r.line());
        reports.push(r);
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).map(|r| format!("{} ({})", r.id, r.name)).collect();
    let passed = failed.is_empty();
    println!("{}/{} criteria passed", reports.len() - failed.len(), reports.len());
    if !passed {
        println!("failed: {}", failed.join(", "));
    }
    out.json("report.json", &ReportDoc { seed, tolerances: &cfg.tolerances, passed, criteria: &reports })?;
    Ok(passed)
}
