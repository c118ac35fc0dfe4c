/// Rows holding each column of a row-wise pattern.
pub fn transpose(pattern: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); pattern.len()];
    for (r, row) in pattern.iter().enumerate() {
        for &c in row {
            out[c].push(r);
        }
    }
    out
}

/// Greedy coloring in which no two columns of one color share a row.
pub fn color_columns(pattern: &[Vec<usize>], col_rows: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = col_rows.len();
    let mut colors = vec![usize::MAX; n];
    let mut mark = Vec::new();
    let mut n_colors = 0;
    for c in 0..n {
        mark.clear();
        mark.resize(n_colors + 1, false);
        for &r in &col_rows[c] {
            for &other in &pattern[r] {
                let color = colors[other];
                if color != usize::MAX {
                    mark[color] = true;
                }
            }
        }
        let color = mark.iter().position(|&m| !m).unwrap_or(n_colors);
        colors[c] = color;
        n_colors = n_colors.max(color + 1);
    }
    (colors, n_colors)
}
