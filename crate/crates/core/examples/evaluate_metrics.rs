//! Support-weighted precision, recall and F1 from a set of predictions.

use uast::metrics::MetricsReport;

fn main() -> anyhow::Result<()> {
    let labels: Vec<String> = ["sort", "search", "math"].map(String::from).to_vec();
    let actual = [0, 0, 0, 0, 1, 1, 1, 2, 2, 2];
    let predicted = [0, 0, 0, 1, 1, 1, 0, 2, 2, 0];
    let report = MetricsReport::from_predictions(labels.len(), &actual, &predicted)?;
    print!("{}", report.render_table(&labels));
    println!("\nconfusion (rows actual, columns predicted):");
    for row in &report.confusion {
        println!("  {row:?}");
    }
    println!("\n{}", serde_json::to_string(&report)?);
    Ok(())
}
