//! Exact branch probabilities of three sequential squared-spin
//! measurements, checked against sampling. The classic closed form: state
//! along z, directions (x, y, z tilted by theta) give P(sum = 2) =
//! cos^2(theta).
//!
//! ```bash
//! cargo run --release --example branch_probabilities
//! ```

use ksf::geometry::Direction;
use ksf::quantum::{branch_probabilities, sequential_measure, QState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let state = QState::pure_ray(&Direction::z_axis());
    let x = Direction::x_axis();
    let y = Direction::y_axis();
    let trials = 50_000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    println!("theta [rad]   P(sum=2) analytic   sampled ({trials} trials)   cos^2(theta)");
    for k in 0..7 {
        let theta = 0.1 * f64::from(k) * 1.5;
        let tilted = Direction::new(theta.sin(), 0.0, theta.cos()).unwrap();
        let probs = branch_probabilities(&state, &x, &y, &tilted);
        let analytic: f64 = [0b011, 0b101, 0b110].iter().map(|&i| probs[i]).sum();

        let mut hits = 0u64;
        for _ in 0..trials {
            let rec = sequential_measure(&state, &x, &y, &tilted, &mut rng);
            if rec.sum() == Some(2) {
                hits += 1;
            }
        }
        let sampled = hits as f64 / f64::from(trials);
        println!(
            "{theta:>10.2}   {analytic:>17.6}   {sampled:>24.6}   {:>12.6}",
            theta.cos().powi(2)
        );
    }

    println!();
    println!("all eight result patterns for a deliberately skewed triple:");
    let d1 = Direction::new(1.0, 0.2, 0.0).unwrap();
    let d2 = Direction::new(0.0, 1.0, 0.3).unwrap();
    let d3 = Direction::new(0.25, 0.0, 1.0).unwrap();
    let probs = branch_probabilities(&QState::maximally_mixed(), &d1, &d2, &d3);
    for (pattern, p) in probs.iter().enumerate() {
        println!("  P({}{}{}) = {p:.6}", pattern >> 2 & 1, pattern >> 1 & 1, pattern & 1);
    }
    println!("  total = {:.12}", probs.iter().sum::<f64>());
}
