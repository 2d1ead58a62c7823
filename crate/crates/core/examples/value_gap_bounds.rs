//! The sample-size bound for growing N, and the value-gap inequality on
//! random instances.

use horizon_irl::error::Result;
use horizon_irl::mdp::random_dynamics;
use horizon_irl::seed;
use horizon_irl::theory::{sample_size_bound, value_loss_check, BoundInputs};
use nalgebra::DMatrix;
use rand::Rng;

fn main() -> Result<()> {
    println!("{:>7} {:>9} {:>12} {:>12}", "N", "gamma", "estimation", "horizon");
    for gamma_hat in [0.5, 0.9, 0.99] {
        for n in [100, 10_000, 1_000_000] {
            let r = sample_size_bound(&BoundInputs {
                n,
                gamma_hat,
                gamma0: 0.99,
                r_max: 1.0,
                n_states: 100,
                class_size: 10,
                delta: 0.05,
            })?;
            println!("{n:>7} {gamma_hat:>9} {:>12.4} {:>12.4}", r.term1, r.term2);
        }
    }

    let mut rng = seed::rng(4);
    let mut worst: f64 = f64::NEG_INFINITY;
    for i in 0..50 {
        let dynamics = random_dynamics(5, 3, i)?;
        let r0 = DMatrix::from_fn(5, 3, |_, _| rng.gen::<f64>());
        let r_hat = DMatrix::from_fn(5, 3, |_, _| rng.gen::<f64>());
        let (g0, gh) = (rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
        let report = value_loss_check(&dynamics, &r0, g0, &r_hat, gh, 1.0)?;
        worst = worst.max(report.lhs.unwrap() - report.rhs);
    }
    println!("largest lhs - rhs over 50 random instances: {worst:.4} (never positive)");
    Ok(())
}
