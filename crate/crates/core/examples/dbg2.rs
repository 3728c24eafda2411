use mcfobs::analysis::delta_ball_estimate;
use mcfobs::contour::{curvature_on_contour, extract_contour};
use mcfobs::distance::{redistance, signed_distance, DistanceCap};
use mcfobs::grid::{Grid2, RegionMask, ScalarField};

fn smooth121(field: &ScalarField, passes: usize) -> ScalarField {
    let g = field.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut cur = field.values.clone();
    let mut tmp = vec![0.0; cur.len()];
    for _ in 0..passes {
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                let l = if i > 0 { cur[k - 1] } else { cur[k] };
                let r = if i + 1 < nx { cur[k + 1] } else { cur[k] };
                tmp[k] = 0.25 * (l + 2.0 * cur[k] + r);
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                let k = j * nx + i;
                let d = if j > 0 { tmp[k - nx] } else { tmp[k] };
                let u = if j + 1 < ny { tmp[k + nx] } else { tmp[k] };
                cur[k] = 0.25 * (d + 2.0 * tmp[k] + u);
            }
        }
    }
    ScalarField { grid: g, values: cur }
}

fn main() {
    let g = Grid2::square(128, 1.0).unwrap();
    let mask = RegionMask::from_fn(g, |x, y| (x - 0.5).hypot(y - 0.5) < 0.25);

    // Smoothed-indicator interface recovery at several smoothing depths.
    for passes in [1usize, 2, 3, 4, 6] {
        let chi = ScalarField::from_fn(g, |x, y| {
            if (x - 0.5).hypot(y - 0.5) < 0.25 {
                -1.0
            } else {
                1.0
            }
        });
        let phi = smooth121(&chi, passes);
        let d = redistance(&phi, DistanceCap::uncapped(&g)).unwrap();
        let c = extract_contour(&d, 0.0).unwrap();
        let ks = curvature_on_contour(&d, &c);
        // front position error vs true circle
        let mut worst_r = 0.0f64;
        for p in c.vertices() {
            worst_r = worst_r.max(((p.x - 0.5).hypot(p.y - 0.5) - 0.25).abs());
        }
        println!(
            "passes={passes}: mean k={:.3} max|k|={:.3} front err={:.3}s delta={:.4}",
            ks.mean(),
            ks.max_abs(),
            worst_r / g.spacing,
            delta_ball_estimate(&d).unwrap()
        );
    }

    // Strip case as in the failing test.
    let gs = Grid2::square(96, 1.0).unwrap();
    let smask = RegionMask::from_fn(gs, |_, y| (y - 0.5).abs() < 0.15);
    let ds = signed_distance(&smask, DistanceCap::uncapped(&gs));
    let cs = extract_contour(&ds, 0.0).unwrap();
    let kss = curvature_on_contour(&ds, &cs);
    println!(
        "strip: comps={} mean k={:.4} max|k|={:.4} delta={:?}",
        cs.polylines.len(),
        kss.mean(),
        kss.max_abs(),
        delta_ball_estimate(&ds)
    );

    // Two-disk case.
    let g2 = Grid2::square(192, 1.0).unwrap();
    let m2 = RegionMask::from_fn(g2, |x, y| {
        (x - 0.25).hypot(y - 0.5) < 0.2 || (x - 0.75).hypot(y - 0.5) < 0.2
    });
    let d2 = signed_distance(&m2, DistanceCap::uncapped(&g2));
    println!("two disks: delta={:?}", delta_ball_estimate(&d2));

    // Redistance crossing-shift estimator variants on the analytic disk.
    let fa = ScalarField::from_fn(g, |x, y| (x - 0.5).hypot(y - 0.5) - 0.25);
    let out = redistance(&fa, DistanceCap::uncapped(&g)).unwrap();
    let c_in = extract_contour(&fa, 0.0).unwrap();
    let c_out = extract_contour(&out, 0.0).unwrap();
    let mut worst = 0.0f64;
    for (p, q) in c_in.vertices().zip(c_out.vertices()) {
        worst = worst.max(p.dist(q));
    }
    println!(
        "redistance shift (avg-central g): {:.3e} abs = {:.2e} s",
        worst,
        worst / g.spacing
    );
}
