//! Load the built-in review scenario into a data directory and print the
//! sentiment report, first from the live service and then from disk.

use std::sync::Arc;

use fleetline::clock::SystemClock;
use fleetline::{report, scenario, Service, ServiceOptions};

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let opts = ServiceOptions {
        qr_passphrase: None,
        admin_password: Some("admin-secret".into()),
        snapshot_every: None,
    };
    let svc = Service::open(dir.path(), opts, Arc::new(SystemClock)).unwrap();
    let text = scenario::builtin("figure4").unwrap();
    let summary = scenario::seed(&svc, text).unwrap();
    println!("{summary:?}");
    let (lexicon, stop) = svc.lexicon();
    let reviews = svc.read(|s| s.reviews.values().cloned().collect::<Vec<_>>());
    println!("{:?}", fleetline_core::reviews::sentiment_counts(&reviews, lexicon, stop));
    drop(svc);

    let counts = report::from_data_dir(dir.path()).unwrap();
    print!("{}", report::to_csv(&counts));
}
