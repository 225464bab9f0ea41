//! The tape on its own: build a small expression, run backward, compare with
//! finite differences, then let Adam minimize it.

use uast::tensor::check::{central_difference, max_relative_error};
use uast::tensor::{Adam, AdamConfig, Tape, Tensor};

/// `mean(tanh(x W) ^ 2)` plus a bias term.
fn loss(tape: &mut Tape, params: &[Tensor], x: &Tensor) -> anyhow::Result<(f64, Vec<Tensor>)> {
    let w = tape.leaf(params[0].clone());
    let b = tape.leaf(params[1].clone());
    let x = tape.constant(x.clone());
    let h = tape.matmul(x, w)?;
    let h = tape.add(h, b)?;
    let h = tape.tanh(h);
    let sq = tape.mul(h, h)?;
    let out = tape.mean(sq);
    tape.backward(out)?;
    let grads = [w, b]
        .map(|v| tape.grad(v).expect("leaf has a gradient"))
        .to_vec();
    Ok((tape.value(out).item(), grads))
}

fn main() -> anyhow::Result<()> {
    let x = Tensor::matrix(3, 2, vec![0.5, -1.0, 1.5, 0.25, -0.75, 2.0])?;
    let mut params = vec![
        Tensor::matrix(2, 2, vec![0.3, -0.2, 0.8, 0.1])?,
        Tensor::row(vec![0.05, -0.4]),
    ];

    let (value, grads) = loss(&mut Tape::new(), &params, &x)?;
    let numeric = central_difference(|p| loss(&mut Tape::new(), p, &x).unwrap().0, &params, 1e-6);
    println!("loss {value:.6}");
    println!(
        "max relative error vs finite differences: {:.2e}",
        max_relative_error(&grads, &numeric)
    );

    let names = vec!["w".to_string(), "b".to_string()];
    let mut adam = Adam::new(
        AdamConfig {
            lr: 0.05,
            ..Default::default()
        },
        &params,
    );
    for step in 1..=200 {
        let (value, grads) = loss(&mut Tape::new(), &params, &x)?;
        adam.step(
            &mut params,
            &grads.into_iter().map(Some).collect::<Vec<_>>(),
            &names,
        )?;
        if step % 50 == 0 {
            println!("step {step:3}  loss {value:.6}");
        }
    }
    Ok(())
}
