//! Writes the bundled fixtures as CSV files into the given directory.

use std::path::PathBuf;

use rpc_rank::synthetic::bundled_fixtures;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    for fx in bundled_fixtures::<f64>() {
        let path = dir.join(format!("{}.csv", fx.name));
        let mut w = csv::Writer::from_path(&path)?;
        let mut header = vec!["id".to_string()];
        header.extend(fx.dataset.attribute_names.iter().cloned());
        w.write_record(&header)?;
        for (id, row) in fx.dataset.object_ids.iter().zip(&fx.dataset.values) {
            let mut rec = vec![id.clone()];
            rec.extend(row.iter().map(|v| format!("{v:?}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        println!("{} alpha={}", path.display(), fx.alpha);
    }
    Ok(())
}
