//! Write the synthetic fixture as `train.ts`, `test.ts` and `weights.csv`
//! so the `mtsce` binary can be tried on it:
//!
//! ```text
//! cargo run --example write_fixture_files -- /tmp/fx
//! mtsce benchmark --train /tmp/fx/train.ts --test /tmp/fx/test.ts \
//!     --weights /tmp/fx/weights.csv --out /tmp/fx/run
//! ```

use std::fs;
use std::path::PathBuf;

use mtsce::ingest::{serialize_ts, serialize_weights};
use mtsce::synthetic::{saliency_weights, sinusoid_fixture, SinusoidSpec};
use mtsce::CentroidClassifier;

fn main() -> mtsce::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixture".into()));
    fs::create_dir_all(&dir)?;
    let (train, test) = sinusoid_fixture(&SinusoidSpec::default())?;
    let model = CentroidClassifier::fit(&train, 1.0)?;
    fs::write(dir.join("train.ts"), serialize_ts(&train, "sinusoids")?)?;
    fs::write(dir.join("test.ts"), serialize_ts(&test, "sinusoids")?)?;
    // `.ts` records carry no ids; parsed instances are keyed by position
    let mut by_id = saliency_weights(&model, &train)?;
    let weights = train
        .instances()
        .iter()
        .enumerate()
        .map(|(i, x)| (i.to_string(), by_id.remove(x.id()).expect("one weight vector per instance")))
        .collect();
    fs::write(dir.join("weights.csv"), serialize_weights(&weights))?;
    println!("wrote {}", dir.display());
    Ok(())
}
