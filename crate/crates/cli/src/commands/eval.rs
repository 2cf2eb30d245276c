use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde_json::json;

use flowkit::eval::{
    bootstrap_ci, bt_fit, consensus, elo_fit, elo_sequential, majority_vote, net_win_rate, read_battles_jsonl, read_votes_jsonl,
    significance_band, BtOptions, EloOptions,
};
use flowkit::Rng;

use super::report;
use crate::args::{BtArgs, Cli, EloArgs, EvalStat, ItemScore, NwtArgs};
use crate::output::{Output, Table};
use crate::Failure;

pub fn eval(cli: &Cli, stat: &EvalStat) -> Result<Output, Failure> {
    match stat {
        EvalStat::Nwt(a) => nwt(cli, a),
        EvalStat::Elo(a) => elo(cli, a),
        EvalStat::Bt(a) => bt(cli, a),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::usage(format!("cannot open {}: {e}", path.display())))
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn nwt(cli: &Cli, a: &NwtArgs) -> Result<Output, Failure> {
    let items = read_votes_jsonl(open(&a.input)?)?;
    let scores: Vec<f64> = items
        .iter()
        .map(|it| match a.score {
            ItemScore::Consensus => consensus(it),
            ItemScore::Majority => majority_vote(it).map(f64::from),
        })
        .collect::<flowkit::Result<_>>()?;
    let rate = net_win_rate(&scores)?;
    let ci = if a.bootstrap > 0 {
        Some(bootstrap_ci(&scores, a.bootstrap, &Rng::from_seed(cli.seed))?)
    } else {
        None
    };
    let band = a.sigma.map(|s| significance_band(rate, s)).transpose()?;

    let mut table = Table::new(["nwt", "items", "ci_low", "ci_high", "sigma", "band"]);
    table.push([
        rate.to_string(),
        items.len().to_string(),
        opt_cell(ci.map(|c| c.0)),
        opt_cell(ci.map(|c| c.1)),
        opt_cell(a.sigma),
        band.map(|b| b.as_str().to_string()).unwrap_or_default(),
    ]);
    Ok(Output {
        report: report(
            cli,
            "eval nwt",
            json!({
                "nwt": rate,
                "items": items.len(),
                "ci95": ci.map(|(lo, hi)| [lo, hi]),
                "sigma": a.sigma,
                "band": band.map(|b| b.as_str()),
            }),
        ),
        table,
    })
}

fn elo(cli: &Cli, a: &EloArgs) -> Result<Output, Failure> {
    let battles = read_battles_jsonl(open(&a.input)?)?;
    let opts = EloOptions {
        ridge: a.ridge,
        ..EloOptions::default()
    };
    let fitted = match a.sequential_k {
        Some(k) if !(k > 0.0 && k.is_finite()) => return Err(Failure::usage("--sequential-k must be positive")),
        Some(k) => elo_sequential(&battles, k)?,
        None => elo_fit(&battles, &opts)?,
    };
    let mut ratings: Vec<(String, f64)> = fitted.into_iter().collect();
    ratings.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));

    let mut table = Table::new(["model", "rating"]);
    for (m, r) in &ratings {
        table.push([m.clone(), r.to_string()]);
    }
    let list: Vec<_> = ratings.iter().map(|(m, r)| json!({ "model": m, "rating": r })).collect();
    Ok(Output {
        report: report(cli, "eval elo", json!({ "battles": battles.len(), "ratings": list })),
        table,
    })
}

fn bt(cli: &Cli, a: &BtArgs) -> Result<Output, Failure> {
    let items = read_votes_jsonl(open(&a.input)?)?;
    let fit = bt_fit(
        &items,
        &BtOptions {
            max_iter: a.max_iter,
            ..BtOptions::default()
        },
    )?;

    let mut table = Table::new(["kind", "name", "group", "bin", "value"]);
    for (m, o) in fit.models.iter().zip(&fit.offsets) {
        table.push(["offset".to_string(), m.clone(), String::new(), String::new(), o.to_string()]);
    }
    for (g, row) in fit.groups.iter().zip(&fit.coefs) {
        for (r, c) in row.iter().enumerate() {
            table.push(["coef".to_string(), String::new(), g.clone(), r.to_string(), c.to_string()]);
        }
    }
    Ok(Output {
        report: report(
            cli,
            "eval bt",
            json!({
                "items": items.len(),
                "models": fit.models,
                "offsets": fit.offsets,
                "groups": fit.groups,
                "coefs": fit.coefs,
                "iterations": fit.iterations,
                "log_likelihood": fit.log_likelihood.last(),
                "grad_norm": fit.grad_norm,
            }),
        ),
        table,
    })
}
