use super::field::{lift, padded_size, restrict, PhysicalField, SpectralField};
use super::ops::dealias_in_place;

/// Evaluate a pointwise map of several fields on a padded grid large enough for
/// products of `degree` factors, then truncate and dealias.
///
/// `f(x, out)` receives the samples of all input components at one point,
/// concatenated in input order, and writes `out_components` values.
pub(crate) fn pointwise_padded(
    inputs: &[&SpectralField],
    degree: usize,
    out_components: usize,
    f: impl Fn(&[f64], &mut [f64]),
) -> SpectralField {
    let grid = *inputs[0].grid();
    let m = padded_size(grid.n(), degree);
    let lifted: Vec<PhysicalField> = inputs.iter().map(|x| lift(x, m)).collect();
    let refs: Vec<&PhysicalField> = lifted.iter().collect();
    let out = evaluate(&refs, out_components, f);
    let mut res = restrict(&out, grid);
    dealias_in_place(&mut res);
    res
}

/// Pointwise map of physical fields sharing one grid; see [`pointwise_padded`].
pub(crate) fn evaluate(
    inputs: &[&PhysicalField],
    out_components: usize,
    f: impl Fn(&[f64], &mut [f64]),
) -> PhysicalField {
    let grid = *inputs[0].grid();
    let len = grid.len();
    let slices: Vec<&[f64]> = inputs
        .iter()
        .flat_map(|x| (0..x.components()).map(move |c| x.component(c)))
        .collect();
    let mut out = PhysicalField::zeros(grid, out_components);
    let mut x = vec![0.0; slices.len()];
    let mut o = vec![0.0; out_components];
    for flat in 0..len {
        for (slot, s) in x.iter_mut().zip(&slices) {
            *slot = s[flat];
        }
        f(&x, &mut o);
        let data = out.data_mut();
        for (c, v) in o.iter().enumerate() {
            data[c * len + flat] = *v;
        }
    }
    out
}

/// Dealiased product of two fields. A one-component factor is broadcast over
/// the components of the other; otherwise the product is componentwise.
pub fn multiply(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let (ca, cb) = (a.components(), b.components());
    assert!(
        ca == cb || ca == 1 || cb == 1,
        "multiply needs matching or scalar components, got {ca} and {cb}"
    );
    let out = ca.max(cb);
    pointwise_padded(&[a, b], 2, out, |x, o| {
        for (c, slot) in o.iter_mut().enumerate() {
            let xa = if ca == 1 { x[0] } else { x[c] };
            let xb = if cb == 1 { x[ca] } else { x[ca + c] };
            *slot = xa * xb;
        }
    })
}
