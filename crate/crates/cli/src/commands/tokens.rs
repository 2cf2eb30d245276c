use serde_json::json;

use flowkit::model::{token_count, PatchSpec};
use flowkit::tae::CodecSpec;

use super::report;
use crate::args::{Cli, TokensArgs};
use crate::output::{Output, Table};
use crate::Failure;

pub fn tokens(cli: &Cli, a: &TokensArgs) -> Result<Output, Failure> {
    let patch: PatchSpec = a.patch.parse()?;
    let codec = CodecSpec {
        temporal_factor: a.tae_factor,
        spatial_factor: a.tae_factor,
        ..CodecSpec::default()
    };
    let [t, _, h, w] = codec.latent_shape(a.frames, a.height, a.width)?;
    let count = token_count(t, h, w, &patch)?;

    let mut table = Table::new(["tokens", "latent_frames", "latent_height", "latent_width"]);
    table.push([count, t, h, w]);
    Ok(Output {
        report: report(
            cli,
            "tokens",
            json!({ "tokens": count, "latent": { "frames": t, "height": h, "width": w } }),
        ),
        table,
    })
}
