//! Exact gradients against finite differences, and the minibatch noise level.

use gthsgd::dataio::{synthesize_logistic, synthesize_quadratic};
use gthsgd::oracle::{LocalModel, OracleHandle};

fn main() -> gthsgd::Result<()> {
    let logistic: LocalModel = synthesize_logistic(1, 200, 8, 1.5, 4, 1e-4)?.remove(0).into();
    let quadratic: LocalModel = synthesize_quadratic(1, 8, 0.1, 0.5, 1.0, 4)?.remove(0).into();
    let x = [0.4, -0.2, 1.0, 0.0, -1.3, 0.8, 0.1, 0.5];
    for (name, model) in [("logistic", &logistic), ("quadratic", &quadratic)] {
        let g = model.exact_local_gradient(&x)?;
        let h = 1e-6;
        let worst = (0..x.len())
            .map(|k| {
                let mut up = x;
                let mut dn = x;
                up[k] += h;
                dn[k] -= h;
                let fd = (model.data_loss(&up) - model.data_loss(&dn)) / (2.0 * h)
                    + (gthsgd::oracle::regularizer(model.reg_coeff(), &up)
                        - gthsgd::oracle::regularizer(model.reg_coeff(), &dn))
                        / (2.0 * h);
                (fd - g[k]).abs()
            })
            .fold(0.0, f64::max);
        let noise = OracleHandle::new(model, 0, 0).estimate_noise(&x, 20_000)?;
        println!("{name:<9} L = {:.4}  max |fd - grad| = {worst:.2e}  E‖g - ∇f‖² ≈ {noise:.4}", model.smoothness());
    }
    println!("quadratic noise should be p σ² = {}", 8.0 * 0.01);
    Ok(())
}
