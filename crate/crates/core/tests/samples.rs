use meanfield::samples::{log_grid, LogNode, RadialSamples};
use proptest::prelude::*;

fn quintic(c: &[f64; 6], t: f64) -> (f64, f64, f64) {
    let mut v = (0.0, 0.0, 0.0);
    for (k, &ck) in c.iter().enumerate() {
        let k = k as i32;
        v.0 += ck * t.powi(k);
        if k >= 1 {
            v.1 += ck * k as f64 * t.powi(k - 1);
        }
        if k >= 2 {
            v.2 += ck * (k * (k - 1)) as f64 * t.powi(k - 2);
        }
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Quintic Hermite interpolation in `t = ln r` reproduces quintics in `t`.
    #[test]
    fn quintic_in_log_radius_is_exact(
        c in prop::array::uniform6(-1.0f64..1.0),
        s in 0.0f64..1.0,
        cell in 0usize..7,
    ) {
        let ts: Vec<f64> = (0..8).map(|k| -3.0 + 0.5 * k as f64).collect();
        let nodes = ts
            .iter()
            .map(|&t| {
                let (value, dt, dtt) = quintic(&c, t);
                LogNode { t, value, dt, dtt }
            })
            .collect();
        let smp = RadialSamples::new(0.0, nodes).unwrap();
        let t = ts[cell] + s * 0.5;
        let (v, d) = smp.eval(t.exp()).unwrap();
        let (ev, edt, _) = quintic(&c, t);
        prop_assert!((v - ev).abs() < 1e-12, "{} vs {}", v, ev);
        prop_assert!((d - edt * (-t).exp()).abs() < 1e-10);
    }
}

#[test]
fn nodes_must_increase() {
    let n = LogNode { t: 0.0, value: 0.0, dt: 0.0, dtt: 0.0 };
    assert!(RadialSamples::new(0.0, vec![n, n]).is_err());
    assert!(RadialSamples::new(0.0, vec![]).is_err());
}

#[test]
fn exponential_integral_of_constant() {
    let v = RadialSamples::from_fn(0.0, &log_grid(1e-6, 1.0, 50), |_| (0.0, 0.0, 0.0)).unwrap();
    let i = v.integral_exp(1.0, 1.0).unwrap();
    assert!((i - 0.5).abs() < 1e-12, "{i}");
}
