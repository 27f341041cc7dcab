//! A reduced simulation grid with the published values alongside.

use rankmedian::{run_table1, Table1Config};

fn main() -> rankmedian::Result<()> {
    let report = run_table1(&Table1Config {
        items: vec![3, 5],
        trials: 3,
        with_published: true,
        ..Table1Config::default()
    })?;
    println!("setting    n  phi  method    risk     floor  published");
    for r in &report.records {
        println!(
            "{:<10} {} {:>4}  {:<5} {:>8.4} {:>8.4} {:>9}",
            r.setting.to_string(),
            r.n,
            r.phi.to_string(),
            r.method.to_string(),
            r.mean,
            r.oracle_risk,
            r.published.map_or("-".into(), |v| format!("{v:.4}"))
        );
    }
    report.write_csv(std::io::stdout())?;
    Ok(())
}
