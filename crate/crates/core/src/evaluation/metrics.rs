use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn check_lengths(preds: &[usize], targets: &[usize]) -> Result<()> {
    if preds.len() != targets.len() {
        return Err(Error::shape(
            targets.len(),
            preds.len(),
            "predictions vs targets",
        ));
    }
    if preds.is_empty() {
        return Err(Error::InvalidInput(
            "metrics need at least one prediction".into(),
        ));
    }
    Ok(())
}

/// Fraction of positions where `preds` equals `targets`.
pub fn accuracy(preds: &[usize], targets: &[usize]) -> Result<f64> {
    check_lengths(preds, targets)?;
    let correct = preds.iter().zip(targets).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / preds.len() as f64)
}

/// `counts[actual][predicted]`.
pub fn confusion_matrix(
    preds: &[usize],
    targets: &[usize],
    num_classes: usize,
) -> Result<Vec<Vec<usize>>> {
    check_lengths(preds, targets)?;
    let mut m = vec![vec![0usize; num_classes]; num_classes];
    for (&p, &t) in preds.iter().zip(targets) {
        if p >= num_classes || t >= num_classes {
            return Err(Error::InvalidInput(format!(
                "class {} out of range for {num_classes} classes",
                p.max(t)
            )));
        }
        m[t][p] += 1;
    }
    Ok(m)
}

/// Unweighted mean over classes of per-class F1 = 2PR/(P+R).
///
/// A class whose F1 has a zero denominator (no predicted and no actual
/// positives, or no true positives) contributes 0.
pub fn macro_f1(preds: &[usize], targets: &[usize], num_classes: usize) -> Result<f64> {
    if num_classes == 0 {
        return Err(Error::InvalidInput("macro F1 over zero classes".into()));
    }
    let m = confusion_matrix(preds, targets, num_classes)?;
    let total: f64 = (0..num_classes)
        .map(|c| {
            let tp = m[c][c] as f64;
            let actual: usize = m[c].iter().sum();
            let predicted: usize = m.iter().map(|row| row[c]).sum();
            // 2PR/(P+R) = 2TP / (predicted + actual)
            let denom = (predicted + actual) as f64;
            if denom == 0.0 {
                0.0
            } else {
                2.0 * tp / denom
            }
        })
        .sum();
    Ok(total / num_classes as f64)
}

/// `|train_loss − val_loss|`.
pub fn ge_estimate<T: Scalar>(train_loss: T, val_loss: T) -> Result<T> {
    if !(train_loss.is_finite() && val_loss.is_finite()) {
        return Err(Error::NonFinite(format!(
            "generalization estimate of train={train_loss}, val={val_loss}"
        )));
    }
    Ok((train_loss - val_loss).abs())
}
