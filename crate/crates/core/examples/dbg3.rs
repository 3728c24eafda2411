use mcfobs::distance::{redistance, DistanceCap};
use mcfobs::grid::{Grid2, ScalarField};

fn main() {
    let g = Grid2::square(128, 1.0).unwrap();
    let f = ScalarField::from_fn(g, |x, y| (x - 0.5).hypot(y - 0.5) - 0.25);
    let out = redistance(&f, DistanceCap::uncapped(&g)).unwrap();
    let (nx, ny) = (g.nx, g.ny);
    let idx = |i: usize, j: usize| j * nx + i;

    let mut incident = vec![0u8; nx * ny];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for j in 0..ny {
        for i in 0..nx - 1 {
            let (a, b) = (idx(i, j), idx(i + 1, j));
            if (f.values[a] < 0.0) != (f.values[b] < 0.0) {
                edges.push((a, b));
                incident[a] += 1;
                incident[b] += 1;
            }
        }
    }
    for j in 0..ny - 1 {
        for i in 0..nx {
            let (a, b) = (idx(i, j), idx(i, j + 1));
            if (f.values[a] < 0.0) != (f.values[b] < 0.0) {
                edges.push((a, b));
                incident[a] += 1;
                incident[b] += 1;
            }
        }
    }
    let mut worst = [0.0f64; 3];
    let mut count = [0usize; 3];
    for &(a, b) in &edges {
        let t_in = f.values[a] / (f.values[a] - f.values[b]);
        let t_out = out.values[a] / (out.values[a] - out.values[b]);
        let class = match (incident[a], incident[b]) {
            (1, 1) => 0,
            (1, _) | (_, 1) => 1,
            _ => 2,
        };
        count[class] += 1;
        worst[class] = worst[class].max((t_in - t_out).abs());
    }
    println!("pure-pure:     n={} worst shift={:.3e} cells", count[0], worst[0]);
    println!("pure-corner:   n={} worst shift={:.3e} cells", count[1], worst[1]);
    println!("corner-corner: n={} worst shift={:.3e} cells", count[2], worst[2]);
}
