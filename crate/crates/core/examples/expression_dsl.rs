// Parse and evaluate right-hand sides written in the expression language.

use basin_cert::expr;

pub fn run_example() -> basin_cert::Result<()> {
    let g = expr::parse("x1*sin(t)^2*(1 - x1*abs(cos(t)))", 1)?;
    println!("parsed:    {g}");
    println!("g(1, [2]): {}", g.eval(1.0, &[2.0], 0.0)?);

    // abs/sign/min/max make the field nonsmooth; their arguments are the
    // switching functions.
    for s in g.switching_functions() {
        println!("switching: {s}");
    }

    // -2^2 is -(2^2); ^ associates to the right.
    let e = expr::parse("-2^2 + 2^3^2", 0)?;
    println!("-2^2 + 2^3^2 = {}", e.eval(0.0, &[], 0.0)?);

    match expr::parse("x1 + * 2", 1) {
        Err(err) => println!("rejected:  {err}"),
        Ok(e) => println!("unexpectedly parsed {e}"),
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
