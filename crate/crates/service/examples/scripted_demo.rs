//! The scripted end-to-end flow behind `fleetline demo`.

use fleetline::demo::{run_demo, DemoOptions, DEMO_PASSPHRASE};

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let opts = DemoOptions {
        data_dir: dir.path().join("demo"),
        seed: 42,
        decode_passphrase: DEMO_PASSPHRASE.into(),
    };
    let report = run_demo(&opts, &mut std::io::stdout()).unwrap();
    println!("trip {} cost {:.2}, replay identical: {}", report.trip_id, report.final_cost_minor as f64 / 100.0, report.replay_identical);
}
