//! Heat and Poisson kernels with time derivatives, written as a CSV table,
//! and the semigroups acting on a bounded function.
use dunkl::config::OutputFormat;
use dunkl::dunkl_kernel::FunctionHandle;
use dunkl::heat_poisson::KernelEvaluator;
use dunkl::report::{kernel_table, write_rows};
use dunkl::root_system::make_product_z2;

fn main() -> dunkl::Result<()> {
    let rows = kernel_table(&[0.0, 1.0], &[0.1, 1.0], &[0.0, 1.0], &[-1.0, 0.5], 1e-10)?;
    write_rows(&rows, OutputFormat::Csv, std::io::stdout().lock())?;

    let rs = make_product_z2(1, &[1.0])?;
    let heat = KernelEvaluator::heat(&rs);
    let pois = KernelEvaluator::poisson(&rs);
    let one = FunctionHandle::constant(1.0);
    let cos = FunctionHandle::trig_series("cos 3x", dunkl::dunkl_kernel::TrigSeries::cosines(0.0, vec![(1.0, 3.0)]));
    for t in [0.01, 0.1, 1.0] {
        println!(
            "t={t:<5} ∫p_t dw = {:.10}  ∫∂_t p_t dw = {:+.1e}  H_t cos3(0.2) = {:.8}  P_t cos3(0.2) = {:.8}",
            pois.apply_semigroup(&one, 0, t, &[0.0], 1e-10)?,
            pois.apply_semigroup(&one, 1, t, &[0.0], 1e-10)?,
            heat.apply_semigroup(&cos, 0, t, &[0.2], 1e-10)?,
            pois.apply_semigroup(&cos, 0, t, &[0.2], 1e-10)?,
        );
    }
    Ok(())
}
