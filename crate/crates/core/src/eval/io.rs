use std::io::BufRead;

use serde::de::DeserializeOwned;

use super::elo::BattleRecord;
use super::votes::ItemVotes;
use crate::error::{Error, Result};

/// Reads one JSON object per line; blank lines are skipped and unknown keys
/// ignored. Line numbers in errors are 1-based.
pub fn read_jsonl<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Vote file: `{"item_id", "model_a", "model_b", "votes": [-1|0|1, ...]}` per line.
pub fn read_votes_jsonl(reader: impl BufRead) -> Result<Vec<ItemVotes>> {
    let items: Vec<ItemVotes> = read_jsonl(reader)?;
    for (i, it) in items.iter().enumerate() {
        it.validate().map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
    }
    Ok(items)
}

/// Battle file: `{"model_a", "model_b", "outcome": "win_a"|"tie"|"win_b"}` per
/// line, with an optional positive `"weight"`.
pub fn read_battles_jsonl(reader: impl BufRead) -> Result<Vec<BattleRecord>> {
    read_jsonl(reader)
}
