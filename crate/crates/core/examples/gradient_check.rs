//! Compare backpropagated gradients of the full colorizer with central
//! finite differences over a range of step sizes.
//!
//!     cargo run --release -p uwe --example gradient_check

use uwe::colorizer::ColorizerModel;
use uwe::nn::{mse_loss, Prng, Tensor};

fn main() {
    let mut prng = Prng::new(1);
    let model = ColorizerModel::new(1);
    let x = Tensor::new(vec![1, 16, 16], (0..256).map(|_| prng.uniform()).collect()).unwrap();
    let target = Tensor::new(vec![3, 16, 16], (0..768).map(|_| prng.uniform()).collect()).unwrap();

    let trace = model.forward_trace(&x).unwrap();
    let (loss, grad_out) = mse_loss(trace.output(), &target).unwrap();
    let grads = model.backward(&trace, &grad_out).unwrap();
    println!("loss {loss:.6}, {} parameters", model.param_count());

    let loss_at = |m: &ColorizerModel| mse_loss(&m.forward(&x).unwrap(), &target).unwrap().0;
    for layer in 0..model.convs().len() {
        let idx = prng.below(model.convs()[layer].weights.len());
        let analytic = grads.convs[layer].weights.data()[idx];
        print!("conv {layer} weight {idx:>5}: analytic {analytic:+.6e}");
        for h in [1e-3, 1e-5, 1e-7] {
            let mut up = model.clone();
            up.convs_mut()[layer].weights.data_mut()[idx] += h;
            let mut down = model.clone();
            down.convs_mut()[layer].weights.data_mut()[idx] -= h;
            let numeric = (loss_at(&up) - loss_at(&down)) / (2.0 * h);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
            print!("  h={h:.0e} rel {rel:.1e}");
        }
        println!();
    }
}
