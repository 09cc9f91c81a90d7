use crate::map::ComponentMap;

/// One grid line: flat indices of its nodes in order along `axis`.
pub(crate) struct Line {
    pub axis: usize,
    pub flat: Vec<usize>,
}

/// Every grid line along every axis.
pub(crate) fn grid_lines(map: &ComponentMap) -> Vec<Line> {
    let shape = map.shape();
    let d = shape.len();
    let mut strides = vec![1usize; d];
    for a in (0..d.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    let total: usize = shape.iter().product();
    let mut out = Vec::new();
    for axis in 0..d {
        for base in 0..total {
            if !(base / strides[axis]).is_multiple_of(shape[axis]) {
                continue;
            }
            let flat = (0..shape[axis]).map(|k| base + k * strides[axis]).collect();
            out.push(Line { axis, flat });
        }
    }
    out
}

/// Coordinates of a node given its flat index.
pub(crate) fn node(map: &ComponentMap, flat: usize) -> Vec<f64> {
    let shape = map.shape();
    let idx = crate::map::unflatten(flat, &shape);
    idx.iter()
        .zip(&map.axes)
        .map(|(&i, a)| a[i])
        .collect()
}

/// Point on a line at coordinate `t` along its axis.
pub(crate) fn at(map: &ComponentMap, line: &Line, t: f64) -> Vec<f64> {
    let mut x = node(map, line.flat[0]);
    x[line.axis] = t;
    x
}
