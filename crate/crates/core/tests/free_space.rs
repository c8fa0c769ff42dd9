use levykern::bounds::global_shape;
use levykern::levy_kernel::DEFAULT_BUMP_WIDTH;
use levykern::simulate::SubordinatorSampler;
use levykern::verify::{RatioPoint, RatioReport};
use levykern::{BernsteinFunction, ProcessSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn perturbed_kernel_stays_comparable_to_the_global_shape() {
    let f = BernsteinFunction::stable(1.0).unwrap();
    let q = ProcessSpec::perturbed(1, f, DEFAULT_BUMP_WIDTH).unwrap();
    let p = ProcessSpec::new(1, f).unwrap();
    let mut points = Vec::new();
    for t in [0.1, 0.5, 1.0] {
        for r in [0.0, 0.5, 1.0, 3.0] {
            let k = q.free_kernel(t, r).unwrap();
            let plain = p.free_kernel(t, r).unwrap();
            // Removing at most half the jump intensity changes the density by a bounded factor.
            assert!(k > 0.25 * plain && k < 4.0 * plain, "t={t} r={r}: {k} vs {plain}");
            points.push(RatioPoint::new(Some(t), vec![r], Vec::new(), k, 0.0, global_shape(&q, t, r).unwrap().value));
        }
    }
    let report = RatioReport::new("coarse", "global", points);
    assert!(report.is_bounded() && report.spread < 20.0, "spread {}", report.spread);
}

fn laplace_mc(sampler: &SubordinatorSampler, lambda: f64, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let v = (-lambda * sampler.sample(&mut rng)).exp();
        s1 += v;
        s2 += v * v;
    }
    let m = s1 / n as f64;
    (m, ((s2 / n as f64 - m * m) / n as f64).sqrt())
}

#[test]
fn halving_the_small_jump_cutoff_leaves_the_law_unchanged() {
    let f = BernsteinFunction::relativistic(1.0, 1.0).unwrap();
    let h = 0.5;
    let want = (-h * f.phi(2.0).unwrap()).exp();
    let coarse = SubordinatorSampler::new(&f, h, 1e-3).unwrap();
    let fine = SubordinatorSampler::new(&f, h, 5e-4).unwrap();
    let (a, sa) = laplace_mc(&coarse, 2.0, 200_000, 1);
    let (b, sb) = laplace_mc(&fine, 2.0, 200_000, 2);
    assert!((a - b).abs() <= 3.0 * sa.hypot(sb) + 0.01 * want, "{a} vs {b}");
    assert!((b - want).abs() <= 3.0 * sb + 0.02 * want, "{b} vs {want}");
}
