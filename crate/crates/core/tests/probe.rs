use linform::interval::Rat;
use linform::minimal::EngineConfig;
use linform::realspec::RealSpec;
use linform::stats::{compute_stats, StatsRequest};
use linform::veronese::{best_polynomials, gap_bound_audit};
use num_rational::Ratio;

fn mid_f64(iv: &linform::interval::Interval) -> f64 {
    let two = Rat::from_integer(2.into());
    let m = (&iv.lo + &iv.hi) / two;
    let n = m.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
    let d = m.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
    n / d
}

#[test]
fn probe_roy_depth15_single() {
    let t0 = std::time::Instant::now();
    let xi = RealSpec::parse("cf:fibword(1,2)").unwrap();
    let mut cfg = EngineConfig::default();
    cfg.precision_cap = 400_000;
    cfg.node_limit = 500_000_000;
    let polys = best_polynomials(&xi, 2, 15, &cfg).unwrap();
    println!("chain(15) elapsed={:?}", t0.elapsed());
    for p in &polys.points {
        println!("  k={:2} norm_digits={}", p.k, p.norm.to_string().len());
    }
    let t1 = std::time::Instant::now();
    let mut req = StatsRequest::window(8, 15);
    req.bits = 192;
    let stats = compute_stats(&polys.points, 1, 2, &req).unwrap();
    println!("stats elapsed={:?}", t1.elapsed());
    for (k, v) in &stats.nu {
        println!("  nu_{k} ~= {:.4}", mid_f64(v));
    }
    for (k, v) in &stats.tau {
        println!("  tau_{k} ~= {:.4} dev={:.4}", mid_f64(v), (mid_f64(v) - 1.6180) / 1.6180);
    }
    for (k, v) in &stats.sigma {
        println!("  sigma_{k} ~= {:.4} dev={:.4}", mid_f64(v), (mid_f64(v) - 1.6180) / 1.6180);
    }
    let w = mid_f64(&stats.w_est);
    let what = mid_f64(&stats.what_lower);
    println!("w_est={w:.4} what_lower={what:.4} jarnik_dev={:.4}", (w - (what * what - what)).abs() / w);
    let t2 = std::time::Instant::now();
    let eps = Ratio::new(1.into(), 20.into());
    let gap = gap_bound_audit(&polys.polys, &stats, &eps).unwrap();
    println!("gap elapsed={:?}", t2.elapsed());
    for r in &gap.reports {
        println!("  gap k={} verdict={} margin~={:.4}", r.k, r.verdict, mid_f64(&r.margin));
    }
    for s in &gap.skipped {
        println!("  skipped: {s}");
    }
    println!("total={:?}", t0.elapsed());
}
