//! Error metrics, energy spectra and CSV reports.

use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::model::Field;

/// `‖pred - reference‖₂ / ‖reference‖₂` over all grid values.
pub fn relative_l2(pred: &[f64], reference: &[f64]) -> Result<f64> {
    if pred.len() != reference.len() {
        return Err(shape_err(format!("prediction has {} values, reference {}", pred.len(), reference.len())));
    }
    let num: f64 = pred.iter().zip(reference).map(|(p, r)| (p - r) * (p - r)).sum();
    let den: f64 = reference.iter().map(|r| r * r).sum();
    if den == 0.0 {
        return Err(Error::DegenerateReference);
    }
    Ok((num / den).sqrt())
}

/// Pointwise `|pred - reference|`.
pub fn error_map(pred: &Field, reference: &Field) -> Result<Field> {
    if (pred.n_x, pred.n_t) != (reference.n_x, reference.n_t) {
        return Err(shape_err("fields have different shapes"));
    }
    let data = pred.data.iter().zip(&reference.data).map(|(p, r)| (p - r).abs()).collect();
    Field::new(pred.n_x, pred.n_t, data)
}

/// Per-sample relative errors with their mean and (population) standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub benchmark: String,
    pub model: String,
    pub rel_l2: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl EvalReport {
    pub fn new(benchmark: impl Into<String>, model: impl Into<String>, rel_l2: Vec<f64>) -> Result<Self> {
        if rel_l2.is_empty() {
            return Err(Error::Config("no samples to summarize".into()));
        }
        let n = rel_l2.len() as f64;
        let mean = rel_l2.iter().sum::<f64>() / n;
        let std = (rel_l2.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n).sqrt();
        Ok(Self { benchmark: benchmark.into(), model: model.into(), rel_l2, mean, std })
    }

    /// `sample,rel_l2` rows.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "sample,rel_l2")?;
        for (i, e) in self.rel_l2.iter().enumerate() {
            writeln!(w, "{i},{e}")?;
        }
        Ok(())
    }
}

/// Energies per integer wavenumber bin for a reference and a prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub k: Vec<usize>,
    pub e_ref: Vec<f64>,
    pub e_pred: Vec<f64>,
}

impl SpectrumReport {
    pub fn new(e_ref: Vec<f64>, e_pred: Vec<f64>) -> Result<Self> {
        if e_ref.len() != e_pred.len() {
            return Err(shape_err("spectra have different lengths"));
        }
        Ok(Self { k: (0..e_ref.len()).collect(), e_ref, e_pred })
    }

    /// `k,E_ref,E_pred` rows.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "k,E_ref,E_pred")?;
        for ((k, a), b) in self.k.iter().zip(&self.e_ref).zip(&self.e_pred) {
            writeln!(w, "{k},{a},{b}")?;
        }
        Ok(())
    }
}

/// Several spectra in one table. Rows carry a leading `frame` column
/// (stored time index) unless every entry is frame-less.
pub fn write_spectra_csv(spectra: &[(Option<usize>, SpectrumReport)], mut w: impl Write) -> Result<()> {
    if spectra.iter().all(|(f, _)| f.is_none()) {
        for (_, r) in spectra {
            r.write_csv(&mut w)?;
        }
        return Ok(());
    }
    writeln!(w, "frame,k,E_ref,E_pred")?;
    for (frame, r) in spectra {
        let frame = frame.map(|f| f.to_string()).unwrap_or_default();
        for ((k, a), b) in r.k.iter().zip(&r.e_ref).zip(&r.e_pred) {
            writeln!(w, "{frame},{k},{a},{b}")?;
        }
    }
    Ok(())
}

fn dft(values: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|v| Complex::new(*v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Spectrum of one line of samples: `E(k) = (|û_k|² + |û_{n-k}|²) / n`
/// for `k = 0..=n/2`, with the unpaired bins (`k = 0` and, for even `n`,
/// `k = n/2`) counted once. `Σ_k E(k) = Σ_j u_j²`.
pub fn line_spectrum(values: &[f64]) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 4 {
        return Err(shape_err(format!("need at least 4 samples for a spectrum, got {n}")));
    }
    let hat = dft(values);
    let e: Vec<f64> = (0..=n / 2)
        .map(|k| {
            let mut s = hat[k].norm_sqr();
            if k != 0 && 2 * k != n {
                s += hat[n - k].norm_sqr();
            }
            s / n as f64
        })
        .collect();
    Ok(e)
}

/// Spectrum over `x` of the snapshot at time index `it`.
pub fn power_spectrum_1d(field: &Field, it: usize) -> Result<Vec<f64>> {
    if it >= field.n_t {
        return Err(shape_err(format!("time index {it} out of range for {} frames", field.n_t)));
    }
    line_spectrum(&field.snapshot(it))
}

/// Radially binned 2-D spectrum of a square field: `|û|² / n²` summed into
/// bin `round(|k|)` with signed wavenumbers. Bins run from 0 to the largest
/// radius present.
pub fn power_spectrum_2d(field: &Field) -> Result<Vec<f64>> {
    let n = field.n_x;
    if n != field.n_t || n < 4 {
        return Err(shape_err(format!("need a square field of side >= 4, got {}x{}", field.n_x, field.n_t)));
    }
    let mut grid: Vec<Complex<f64>> = field.data.iter().map(|v| Complex::new(*v, 0.0)).collect();
    let fft = FftPlanner::new().plan_fft_forward(n);
    // rows, then columns
    for row in grid.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = grid[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            grid[i * n + j] = col[i];
        }
    }
    let signed = |k: usize| if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
    let radius = |i: usize, j: usize| (signed(i).hypot(signed(j))).round() as usize;
    let max_r = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| radius(i, j)).max().unwrap_or(0);
    let mut e = vec![0.0; max_r + 1];
    let norm = (n * n) as f64;
    for i in 0..n {
        for j in 0..n {
            e[radius(i, j)] += grid[i * n + j].norm_sqr() / norm;
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn relative_l2_examples() {
        let r = vec![1.0, -2.0, 3.0];
        assert_eq!(relative_l2(&r, &r).unwrap(), 0.0);
        let scaled: Vec<f64> = r.iter().map(|v| 1.1 * v).collect();
        assert!((relative_l2(&scaled, &r).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(relative_l2(&[0.0; 3], &r).unwrap(), 1.0);
        assert!(matches!(relative_l2(&r, &[0.0; 3]), Err(Error::DegenerateReference)));
        assert!(relative_l2(&r, &[1.0]).is_err());
    }

    #[test]
    fn error_map_properties() {
        let a = Field::new(2, 2, vec![1.0, -1.0, 0.5, 2.0]).unwrap();
        let b = Field::new(2, 2, vec![0.0, 1.0, 0.5, -1.0]).unwrap();
        assert!(error_map(&a, &a).unwrap().data.iter().all(|v| *v == 0.0));
        let m = error_map(&a, &b).unwrap();
        assert!(m.data.iter().all(|v| *v >= 0.0));
        assert_eq!(m.data.iter().cloned().fold(0.0, f64::max), 3.0);
        assert!(error_map(&a, &Field::new(1, 4, vec![0.0; 4]).unwrap()).is_err());
    }

    #[test]
    fn report_statistics() {
        let r = EvalReport::new("burgers", "sedonet", vec![0.1, 0.2, 0.3, 0.6]).unwrap();
        assert!((r.mean - 0.3).abs() < 1e-15);
        let var = (0.04 + 0.01 + 0.0 + 0.09) / 4.0;
        assert!((r.std - f64::sqrt(var)).abs() < 1e-15);
        assert!(EvalReport::new("b", "m", vec![]).is_err());
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "sample,rel_l2\n0,0.1\n1,0.2\n2,0.3\n3,0.6\n");
    }

    #[test]
    fn pure_tone_lands_in_bin_one() {
        let n = 64;
        let v: Vec<f64> = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).sin()).collect();
        let e = line_spectrum(&v).unwrap();
        let total: f64 = e.iter().sum();
        assert!(e[1] / total >= 0.999);
    }

    #[test]
    fn constant_lands_in_bin_zero() {
        let e = line_spectrum(&[2.0; 10]).unwrap();
        assert!((e[0] - 40.0).abs() < 1e-12);
        assert!(e[1..].iter().all(|v| v.abs() < 1e-20));
        let f = Field::new(8, 8, vec![1.5; 64]).unwrap();
        let e = power_spectrum_2d(&f).unwrap();
        assert!((e[0] - 64.0 * 2.25).abs() < 1e-10);
        assert!(e[1..].iter().all(|v| v.abs() < 1e-20));
    }

    #[test]
    fn separable_tone_lands_at_radius_one() {
        let n = 32;
        let data = (0..n)
            .flat_map(|i| (0..n).map(move |j| (2.0 * PI * i as f64 / n as f64).sin() * (2.0 * PI * j as f64 / n as f64).sin()))
            .collect();
        let e = power_spectrum_2d(&Field::new(n, n, data).unwrap()).unwrap();
        let best = e.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(best, 1);
    }

    #[test]
    fn spectrum_shape_errors() {
        assert!(line_spectrum(&[1.0, 2.0, 3.0]).is_err());
        assert!(power_spectrum_2d(&Field::new(4, 5, vec![0.0; 20]).unwrap()).is_err());
        assert!(power_spectrum_1d(&Field::new(4, 2, vec![0.0; 8]).unwrap(), 2).is_err());
    }

    #[test]
    fn spectrum_csv_header() {
        let s = SpectrumReport::new(vec![1.0, 0.5], vec![0.9, 0.25]).unwrap();
        let mut out = Vec::new();
        s.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "k,E_ref,E_pred\n0,1,0.9\n1,0.5,0.25\n");
    }

    proptest! {
        #[test]
        fn parseval_1d(v in prop::collection::vec(-5.0f64..5.0, 4..80)) {
            let e = line_spectrum(&v).unwrap();
            let energy: f64 = v.iter().map(|x| x * x).sum();
            prop_assert!((e.iter().sum::<f64>() - energy).abs() <= 1e-9 * energy.max(1.0));
            prop_assert!(e.iter().all(|x| *x >= 0.0));
        }

        #[test]
        fn parseval_2d(n in 4usize..12, seed in 0u64..1000) {
            let data: Vec<f64> = (0..n * n).map(|k| ((k as u64 * 2654435761 + seed) % 1000) as f64 / 500.0 - 1.0).collect();
            let energy: f64 = data.iter().map(|x| x * x).sum();
            let e = power_spectrum_2d(&Field::new(n, n, data).unwrap()).unwrap();
            prop_assert!((e.iter().sum::<f64>() - energy).abs() <= 1e-9 * energy.max(1.0));
        }

        #[test]
        fn relative_l2_scale_covariant(v in prop::collection::vec(-5.0f64..5.0, 1..30), c in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0]) {
            let r: Vec<f64> = v.iter().map(|x| x + 6.0).collect();
            let p: Vec<f64> = v.iter().map(|x| x * 0.5 + 6.0).collect();
            let base = relative_l2(&p, &r).unwrap();
            let pc: Vec<f64> = p.iter().map(|x| x * c).collect();
            let rc: Vec<f64> = r.iter().map(|x| x * c).collect();
            prop_assert!((relative_l2(&pc, &rc).unwrap() - base).abs() <= 1e-12 * base.max(1.0));
        }
    }
}
