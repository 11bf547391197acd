//! Read and write the `.ts` text format, and show how malformed input is
//! reported.

use mtsce::ingest::{parse_ts_with_header, serialize_ts};
use mtsce::synthetic::{sinusoid_fixture, SinusoidSpec};

const TINY: &str = "\
# two series, two channels, three steps
@problemName tiny
@timeStamps false
@univariate false
@equalLength true
@seriesLength 3
@classLabel true up down
@data
1,2,3:0,0,1:up
3,2,1:1,0,0:down
";

fn main() -> mtsce::Result<()> {
    let (header, ds) = parse_ts_with_header(TINY)?;
    println!("{header:?}");
    for (x, &y) in ds.instances().iter().zip(ds.labels()) {
        println!("id={} class={} ({}) rows={:?}", x.id(), y, ds.class_names()[y], x.rows());
    }

    let broken = TINY.replace("3,2,1:1,0,0", "3,2:1,0,0");
    match parse_ts_with_header(&broken) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }

    let (train, _) = sinusoid_fixture(&SinusoidSpec { n_train: 2, ..Default::default() })?;
    let text = serialize_ts(&train, "sinusoids")?;
    println!("{}", text.lines().take(8).collect::<Vec<_>>().join("\n"));
    Ok(())
}
