//! σ-nets on spheres of dimension 1 to 4 with their sampled covering radii.
//!
//!     cargo run --example sphere_nets

use urysohn::sphere_net;

fn main() -> urysohn::Result<()> {
    for m in 1..=4 {
        for sigma in [1.0, 0.5, 0.25] {
            let net = sphere_net(m, sigma)?;
            println!(
                "m = {m}  sigma = {sigma:<4}  points = {:>5}  sampled covering radius = {:.4}",
                net.len(),
                net.sampled_covering_radius(20_000, 1)
            );
        }
    }
    Ok(())
}
