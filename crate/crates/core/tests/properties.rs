use dvine_qr::bicop::{tau_to_param, BiCop, Family, FitCriterion, Rotation};
use dvine_qr::simbench::{
    gen_scenario, lqr_fit, lqr_predict, m5_mean, tick_loss, MarginChoice, ScenarioKind, ScenarioParam, ScenarioSpec,
};
use dvine_qr::DVineRegression;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_bicop(rng: &mut ChaCha8Rng) -> BiCop {
    let fam = Family::ALL[rng.random_range(0..Family::ALL.len())];
    if fam == Family::Independence {
        return BiCop::independence();
    }
    let rot = if fam.is_rotatable() { Rotation::ALL[rng.random_range(0..4)] } else { Rotation::R0 };
    let mag = rng.random_range(0.05..0.75);
    let tau = match rot {
        Rotation::R90 | Rotation::R270 => -mag,
        _ if fam.is_rotatable() => mag,
        _ => if rng.random_bool(0.5) { mag } else { -mag },
    };
    let mut p = tau_to_param(fam, rot, tau).unwrap();
    if fam == Family::StudentT {
        p[1] = rng.random_range(2.5..20.0);
    }
    BiCop::new(fam, rot, &p).unwrap()
}

fn random_vine(k: usize, seed: u64) -> DVineRegression {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = (1..=k).map(|t| (0..=k - t).map(|_| random_bicop(&mut rng)).collect()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.reverse();
    DVineRegression::new(order, pairs, FitCriterion::Aic).unwrap()
}

/// Chains that pass within this distance of 0 or 1 are ill-conditioned in
/// double precision: one ulp of an intermediate level near the boundary can
/// move the final cdf by more than the tolerance.
const RESOLVED: f64 = 1e-6;

fn interior(x: f64) -> bool {
    x > RESOLVED && x < 1.0 - RESOLVED
}

/// Whether every conditioner and intermediate inverse stays resolved.
fn chain_interior(vine: &DVineRegression, alpha: f64, u: &[f64]) -> bool {
    let pairs = vine.pairs();
    let k = u.len();
    let mut spine = Vec::with_capacity(k);
    let (mut fwd, mut bwd) = (u.to_vec(), u.to_vec());
    for t in 1..=k {
        spine.push(bwd[0]);
        let m = k - t;
        let nf = (0..m).map(|i| pairs[t - 1][i + 1].h_given_second(fwd[i], bwd[i + 1])).collect();
        let nb = (0..m).map(|i| pairs[t - 1][i + 1].h_given_first(fwd[i], bwd[i + 1])).collect();
        fwd = nf;
        bwd = nb;
    }
    let mut p = alpha;
    for (tree, &b) in pairs.iter().zip(&spine).rev() {
        if !interior(b) {
            return false;
        }
        p = tree[0].hinv_given_second(p, b).unwrap();
        if !interior(p) {
            return false;
        }
    }
    true
}

fn unit() -> impl Strategy<Value = f64> {
    0.001f64..0.999
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn quantile_inverts_conditional_cdf(
        k in 1usize..=5,
        seed in any::<u64>(),
        alpha in unit(),
        u in prop::collection::vec(unit(), 5),
    ) {
        let vine = random_vine(k, seed);
        let q = vine.cond_quantile(alpha, &u[..k]).unwrap();
        prop_assert!((0.0..=1.0).contains(&q));
        if chain_interior(&vine, alpha, &u[..k]) {
            let back = vine.cond_cdf(q, &u[..k]).unwrap();
            prop_assert!((back - alpha).abs() < 1e-7, "alpha {} back {} q {}", alpha, back, q);
        }
    }

    #[test]
    fn quantiles_increase_with_level(
        k in 1usize..=5,
        seed in any::<u64>(),
        a in unit(),
        b in unit(),
        u in prop::collection::vec(unit(), 5),
    ) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let vine = random_vine(k, seed);
        let qlo = vine.cond_quantile(lo, &u[..k]).unwrap();
        let qhi = vine.cond_quantile(hi, &u[..k]).unwrap();
        prop_assert!(qlo <= qhi, "q({}) = {} > q({}) = {}", lo, qlo, hi, qhi);
    }

    #[test]
    fn conditional_density_is_finite(
        k in 1usize..=5,
        seed in any::<u64>(),
        v in unit(),
        u in prop::collection::vec(unit(), 5),
    ) {
        let vine = random_vine(k, seed);
        prop_assert!(vine.ln_cond_density(v, &u[..k]).unwrap().is_finite());
    }

    #[test]
    fn tick_loss_shift_invariant(
        y in prop::collection::vec(-50.0f64..50.0, 1..40),
        shift in -100.0f64..100.0,
        alpha in 0.001f64..0.999,
        noise in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(noise);
        let q: Vec<f64> = y.iter().map(|v| v + rng.random_range(-3.0..3.0)).collect();
        let base = tick_loss(&y, &q, alpha).unwrap();
        let ys: Vec<f64> = y.iter().map(|v| v + shift).collect();
        let qs: Vec<f64> = q.iter().map(|v| v + shift).collect();
        let moved = tick_loss(&ys, &qs, alpha).unwrap();
        prop_assert!(base >= 0.0);
        prop_assert!((base - moved).abs() <= 1e-9 * (1.0 + base.abs()));
    }

    #[test]
    fn median_lqr_reproduces_noiseless_plane(
        b0 in -5.0f64..5.0,
        b1 in -3.0f64..3.0,
        b2 in -3.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x1: Vec<f64> = (0..60).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x2: Vec<f64> = (0..60).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| b0 + b1 * a + b2 * b).collect();
        let m = lqr_fit(&y, &[x1.clone(), x2.clone()], 0.5).unwrap();
        for i in 0..60 {
            let p = lqr_predict(&m, &[x1[i], x2[i]]).unwrap();
            prop_assert!((p - y[i]).abs() < 1e-4);
        }
    }
}

#[test]
fn noiseless_m5_truth_ignores_level() {
    let spec = ScenarioSpec::new(ScenarioKind::M5, ScenarioParam::Sigma(0.0), MarginChoice::M1, 100, vec![0.5], 1).unwrap();
    let sc = gen_scenario(&spec, 2, 3).unwrap();
    for x in &sc.eval_x {
        for &a in &[0.01, 0.3, 0.99] {
            assert_eq!(sc.truth.quantile(a, x).unwrap(), m5_mean(x));
        }
    }
}
