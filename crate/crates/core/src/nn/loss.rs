use super::{NnError, Tensor};

/// Mean squared error and its gradient `2 (pred - target) / N`.
///
/// The sum is compensated (Neumaier), so small parameter changes show up in
/// the loss well below the rounding noise of a plain running sum.
pub fn mse_loss(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor), NnError> {
    pred.expect_shape(target.shape())?;
    let n = pred.len() as f64;
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    let grad = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| {
            let d = p - t;
            let sq = d * d;
            let next = sum + sq;
            carry += if sum.abs() >= sq {
                (sum - next) + sq
            } else {
                (sq - next) + sum
            };
            sum = next;
            2.0 * d / n
        })
        .collect();
    Ok(((sum + carry) / n, Tensor::new(pred.shape().to_vec(), grad)?))
}
