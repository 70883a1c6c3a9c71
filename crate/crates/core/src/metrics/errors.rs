use crate::error::{FiberError, Result};

/// Strict MAPE scores unmatched instances as 100 % error; loose as 0 %.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MapeMode {
    #[default]
    Strict,
    Loose,
}

/// Signed percentage error `(prediction - target) / target * 100`.
pub fn percentage_error(prediction: f64, target: f64) -> Result<f64> {
    if !prediction.is_finite() || !target.is_finite() {
        return Err(FiberError::invalid("percentage error needs finite values"));
    }
    if target == 0.0 {
        return Err(FiberError::invalid(
            "percentage error is undefined for a zero target",
        ));
    }
    Ok((prediction - target) / target * 100.0)
}

/// Mean absolute percentage error in percent. `matched` holds signed
/// percentage errors; each of the `unmatched` instances adds 100 % (strict)
/// or 0 % (loose).
pub fn mape(matched: &[f64], unmatched: usize, mode: MapeMode) -> Result<f64> {
    let n = matched.len() + unmatched;
    if n == 0 {
        return Err(FiberError::invalid("MAPE over zero instances"));
    }
    let penalty = match mode {
        MapeMode::Strict => 100.0,
        MapeMode::Loose => 0.0,
    };
    let sum: f64 = matched.iter().map(|e| e.abs()).sum::<f64>() + penalty * unmatched as f64;
    Ok(sum / n as f64)
}
