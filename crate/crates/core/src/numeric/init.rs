use super::Tensor;
use crate::rng::Rng;

/// `fan_out × fan_in` weight with entries drawn from `U[-b, b]`,
/// `b = sqrt(6 / (fan_in + fan_out))`.
pub fn xavier_uniform(fan_in: usize, fan_out: usize, rng: &mut Rng) -> Tensor {
    assert!(
        fan_in >= 1 && fan_out >= 1,
        "Xavier init needs positive fans"
    );
    let bound = xavier_bound(fan_in, fan_out);
    let mut w = Tensor::zeros(fan_out, fan_in);
    w.data_mut()
        .iter_mut()
        .for_each(|v| *v = rng.uniform(-bound, bound));
    w
}

pub fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    libm::sqrt(6.0 / (fan_in + fan_out) as f64)
}
