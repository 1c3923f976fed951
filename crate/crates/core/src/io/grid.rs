/// Row-major coordinates of a regular grid, each axis spanning `[-1, 1]`
/// inclusively. Returns `prod(shape) * shape.len()` values.
pub fn coord_grid(shape: &[usize]) -> Vec<f64> {
    let dims = shape.len();
    let total: usize = shape.iter().product();
    let axes: Vec<Vec<f64>> = shape
        .iter()
        .map(|&n| {
            if n == 1 {
                vec![0.0]
            } else {
                (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect()
            }
        })
        .collect();
    let mut out = Vec::with_capacity(total * dims);
    let mut index = vec![0usize; dims];
    for _ in 0..total {
        for (d, &i) in index.iter().enumerate() {
            out.push(axes[d][i]);
        }
        for d in (0..dims).rev() {
            index[d] += 1;
            if index[d] < shape[d] {
                break;
            }
            index[d] = 0;
        }
    }
    out
}
