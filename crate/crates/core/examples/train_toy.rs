//! Train the recurrent classifier on the separable toy set.
//!
//! cargo run --release --example train_toy

use fitbot::emotion::{accuracy, gradcheck_instance, gradient_check, toy, train_with, Dims, ModelParams, TrainConfig};

fn main() -> fitbot::Result<()> {
    let (p, batch) = gradcheck_instance(Dims::new(3, 4), 5, 2, 0)?;
    let check = gradient_check(&p, &batch, 1e-5)?;
    println!("gradient check: {} entries, max relative error {:.2e}", check.checked, check.max_relative_error);

    let set = toy::separable_toy_set(200, 7)?;
    let init = ModelParams::init(Dims::new(toy::TOY_BANDS, 32), 7);
    println!("{} sequences, {} parameters", set.len(), init.parameter_count());
    let config = TrainConfig::default();
    let trained = train_with(&init, &set, &config, 7, |step, loss, params| {
        if (step + 1) % 250 == 0 {
            let acc = accuracy(params, &set).unwrap_or(f64::NAN);
            println!("step {:4}  loss {loss:.4}  accuracy {acc:.3}", step + 1);
        }
    })?;
    println!("final accuracy {:.3}", accuracy(&trained, &set)?);
    Ok(())
}
