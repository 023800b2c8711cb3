//! Writes a sample in both CSV layouts, reads it back and runs the
//! reporting pipeline the binary uses.

use ivreg::cli::{ingest, run, write_sample, InputFormat, OutputFormat, RunConfig};
use ivreg::oracle::simulate;
use ivreg::{Coefficients, Interval, Method};

fn main() -> ivreg::Result<()> {
    let mut truth = Coefficients::zeros(2);
    truth.b1 = vec![0.5, 0.2];
    truth.b2 = vec![0.3, 0.1];
    truth.delta = Interval::new(10.0, 2.0)?;
    let s = simulate(25, 2, &truth, 1.0, 1)?;

    let dir = std::env::temp_dir().join("ivreg-csv-io");
    std::fs::create_dir_all(&dir)?;
    let midspr = dir.join("midspr.csv");
    let infsup = dir.join("infsup.csv");
    write_sample(&s, InputFormat::Midspr, std::fs::File::create(&midspr)?)?;
    write_sample(&s, InputFormat::Infsup, std::fs::File::create(&infsup)?)?;
    println!("{}", std::fs::read_to_string(&infsup)?.lines().take(3).collect::<Vec<_>>().join("\n"));
    println!("midspr round trip exact: {}", ingest(&midspr, InputFormat::Midspr)? == s);

    let mut cfg = RunConfig::new(&infsup);
    cfg.format = InputFormat::Infsup;
    print!("{}", run(&cfg)?);
    cfg.method = Method::Lasso;
    cfg.output_format = OutputFormat::Json;
    let json = run(&cfg)?;
    println!("{}", json.lines().take(12).collect::<Vec<_>>().join("\n"));
    Ok(())
}
