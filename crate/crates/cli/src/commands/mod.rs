mod eval;
mod extend;
mod model;
mod tokens;

use serde_json::{Map, Value};

use crate::args::{Cli, Command};
use crate::output::Output;
use crate::Failure;

pub fn dispatch(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Train(a) => model::train(cli, a),
        Command::Sample(a) => model::sample(cli, a),
        Command::Tokens(a) => tokens::tokens(cli, a),
        Command::Extend(a) => extend::extend(cli, a),
        Command::Eval(a) => eval::eval(cli, &a.stat),
    }
}

/// Report skeleton shared by every subcommand: name, seed and the fully
/// resolved flags, followed by the command's own fields.
fn report(cli: &Cli, command: &str, fields: Value) -> Value {
    let mut map = Map::new();
    map.insert("command".into(), command.into());
    map.insert("seed".into(), cli.seed.into());
    map.insert("config".into(), serde_json::to_value(cli).expect("flags serialize"));
    if let Value::Object(f) = fields {
        map.extend(f);
    }
    Value::Object(map)
}
