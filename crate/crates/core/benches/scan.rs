use criterion::{criterion_group, criterion_main, Criterion};

use cremona_core::finite_field::make_field_q;
use cremona_core::quintic_scan::{run_scan, ScanOptions};

fn scan_q4(c: &mut Criterion) {
    let f = make_field_q(4).unwrap();
    let mut g = c.benchmark_group("quintic_scan_q4");
    g.sample_size(10);
    for (name, jobs) in [("sequential", 1), ("parallel", 0)] {
        let opts = ScanOptions { patterns: Some(vec![1, 2, 3]), block_size: 64, jobs, ..ScanOptions::default() };
        g.bench_function(name, |b| b.iter(|| run_scan(&f, &opts).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, scan_q4);
criterion_main!(benches);
