//! Dense `f64` tensors and a tape for reverse-mode differentiation.

mod gradcheck;
mod tape;
mod tensor;

pub use gradcheck::{grad_check, relative_error, GradCheckReport, RELATIVE_ERROR_FLOOR};
pub use tape::{sigmoid, softmax_in_place, Gradients, Tape, Var, BCE_CLAMP};
pub use tensor::Tensor;

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn matmul_identity_zero_and_hand_case() {
        let mut t = Tape::new();
        let i2 = t.leaf(Tensor::eye(2));
        let a = t.leaf(Tensor::matrix(&[[2.0, 3.0], [4.0, 5.0]]));
        let ia = t.matmul(i2, a).unwrap();
        assert_eq!(t.value(ia).data(), &[2.0, 3.0, 4.0, 5.0]);

        let z = t.leaf(Tensor::zeros(&[3, 2]));
        let za = t.matmul(z, a).unwrap();
        assert_eq!(t.shape(za), &[3, 2]);
        assert!(t.value(za).data().iter().all(|&x| x == 0.0));

        let x = t.leaf(Tensor::matrix(&[[1.0, 2.0], [3.0, 4.0]]));
        let y = t.leaf(Tensor::matrix(&[[5.0, 6.0], [7.0, 8.0]]));
        let xy = t.matmul(x, y).unwrap();
        assert_eq!(t.value(xy).data(), &[19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn matmul_shape_error_names_both_shapes() {
        let mut t = Tape::new();
        let a = t.leaf(Tensor::zeros(&[2, 3]));
        let b = t.leaf(Tensor::zeros(&[2, 3]));
        let msg = t.matmul(a, b).unwrap_err().to_string();
        assert!(msg.contains("[2, 3]"), "{msg}");
        assert!(msg.contains("matmul"), "{msg}");
    }

    #[test]
    fn hadamard_cases() {
        let mut t = Tape::new();
        let a = t.leaf(Tensor::vector(vec![2.0, 3.0]));
        let b = t.leaf(Tensor::vector(vec![4.0, 5.0]));
        let ones = t.leaf(Tensor::ones(&[2]));
        let zeros = t.leaf(Tensor::zeros(&[2]));
        let ab = t.hadamard(a, b).unwrap();
        let a1 = t.hadamard(a, ones).unwrap();
        let a0 = t.hadamard(a, zeros).unwrap();
        assert_eq!(t.value(ab).data(), &[8.0, 15.0]);
        assert_eq!(t.value(a1).data(), &[2.0, 3.0]);
        assert_eq!(t.value(a0).data(), &[0.0, 0.0]);

        let c = t.leaf(Tensor::zeros(&[3]));
        assert!(matches!(t.hadamard(a, c), Err(crate::Error::Shape { .. })));
    }

    #[test]
    fn relu_cases() {
        let mut t = Tape::new();
        for (input, want) in [
            (vec![-1.0, -2.0], vec![0.0, 0.0]),
            (vec![3.0, 7.0], vec![3.0, 7.0]),
            (vec![-1.0, 0.0, 2.0], vec![0.0, 0.0, 2.0]),
        ] {
            let x = t.leaf(Tensor::vector(input));
            let y = t.relu(x).unwrap();
            assert_eq!(t.value(y).data(), want.as_slice());
        }
    }

    #[test]
    fn sigmoid_cases() {
        let mut t = Tape::new();
        let x = t.leaf(Tensor::vector(vec![0.0, 3.0f64.ln(), 800.0, -800.0]));
        let y = t.sigmoid(x).unwrap();
        let d = t.value(y).data();
        assert_eq!(d[0], 0.5);
        assert!((d[1] - 0.75).abs() < 1e-15);
        assert_eq!(d[2], 1.0);
        assert_eq!(d[3], 0.0);
    }

    #[test]
    fn softmax_cases() {
        let mut t = Tape::new();
        let a = t.leaf(Tensor::vector(vec![0.0, 0.0]));
        let b = t.leaf(Tensor::vector(vec![3.0f64.ln(), 0.0]));
        let c = t.leaf(Tensor::vector(vec![1e4, 1e4, 1e4]));
        let sa = t.softmax_rows(a).unwrap();
        let sb = t.softmax_rows(b).unwrap();
        let sc = t.softmax_rows(c).unwrap();
        assert!(close(t.value(sa).data(), &[0.5, 0.5], 1e-15));
        assert!(close(t.value(sb).data(), &[0.75, 0.25], 1e-15));
        assert!(close(t.value(sc).data(), &[1.0 / 3.0; 3], 1e-15));
    }

    #[test]
    fn softmax_is_row_wise_on_matrices() {
        let mut t = Tape::new();
        let m = t.leaf(Tensor::matrix(&[[0.0, 0.0], [3.0f64.ln(), 0.0]]));
        let s = t.softmax_rows(m).unwrap();
        assert!(close(t.value(s).data(), &[0.5, 0.5, 0.75, 0.25], 1e-15));
    }

    #[test]
    fn backward_of_constant_gives_zero_parameter_gradient() {
        let mut t = Tape::new();
        let p = t.leaf(Tensor::vector(vec![1.0, 2.0]));
        let zero = t.leaf(Tensor::zeros(&[2]));
        let masked = t.hadamard(p, zero).unwrap();
        let loss = t.sum(masked).unwrap();
        let g = t.backward(loss).unwrap();
        assert_eq!(g.get(p).unwrap().data(), &[0.0, 0.0]);

        let c = t.leaf(Tensor::scalar(5.0));
        let g = t.backward(c).unwrap();
        assert!(g.get(p).is_none());
    }

    #[test]
    fn backward_of_sigmoid_at_zero() {
        let mut t = Tape::new();
        let x = t.leaf(Tensor::scalar(0.0));
        let y = t.sigmoid(x).unwrap();
        let g = t.backward(y).unwrap();
        assert_eq!(g.get(x).unwrap().item(), 0.25);
    }

    #[test]
    fn backward_of_sum_hadamard_is_other_factor() {
        let mut t = Tape::new();
        let a = t.leaf(Tensor::vector(vec![1.0, -2.0, 3.0]));
        let b = t.leaf(Tensor::vector(vec![0.5, 4.0, -6.0]));
        let ab = t.hadamard(a, b).unwrap();
        let loss = t.sum(ab).unwrap();
        let g = t.backward(loss).unwrap();
        assert_eq!(g.get(a).unwrap().data(), &[0.5, 4.0, -6.0]);
        assert_eq!(g.get(b).unwrap().data(), &[1.0, -2.0, 3.0]);
    }

    #[test]
    fn backward_errors() {
        let mut t = Tape::new();
        let a = t.leaf(Tensor::vector(vec![1.0, 2.0]));
        assert!(matches!(t.backward(a), Err(crate::Error::NotScalar(_))));
        let other = {
            let mut t2 = Tape::new();
            t2.leaf(Tensor::scalar(0.0));
            let s = t2.leaf(Tensor::scalar(0.0));
            t2.leaf(Tensor::scalar(0.0));
            t2.sum(s).unwrap()
        };
        assert!(matches!(t.backward(other), Err(crate::Error::UnknownNode(_))));
    }

    #[test]
    fn squash_closed_forms() {
        let mut t = Tape::new();
        let s = t.leaf(Tensor::matrix(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]));
        let v = t.squash_rows(s).unwrap();
        let d = t.value(v).data();
        assert_eq!(&d[0..2], &[0.0, 0.0]);
        assert!((d[2] - 0.5).abs() < 1e-12 && d[3] == 0.0);
        assert!((d[4] - 0.9).abs() < 1e-12 && d[5] == 0.0);
    }

    #[test]
    fn bce_values() {
        let mut t = Tape::new();
        let half = t.leaf(Tensor::scalar(0.5));
        let quarter = t.leaf(Tensor::scalar(0.25));
        let one = t.leaf(Tensor::scalar(1.0));
        let l1 = t.bce(half, 1.0).unwrap();
        let l2 = t.bce(quarter, 0.0).unwrap();
        let l3 = t.bce(one, 1.0).unwrap();
        assert!((t.value(l1).item() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((t.value(l2).item() + 0.75f64.ln()).abs() < 1e-15);
        assert!(t.value(l3).item() < 1e-11);
    }

    #[test]
    fn gather_rejects_out_of_range() {
        let mut t = Tape::new();
        let e = t.leaf(Tensor::zeros(&[3, 2]));
        assert!(matches!(
            t.gather_rows(e, &[0, 3]),
            Err(crate::Error::TokenOutOfRange { id: 3, size: 3 })
        ));
    }

    #[test]
    fn tensor_constructor_checks_invariants() {
        assert!(Tensor::new(vec![2, 2], vec![0.0; 3]).is_err());
        assert!(Tensor::new(vec![0], vec![]).is_err());
        assert!(Tensor::new(vec![2, 1], vec![1.0, 2.0]).is_ok());
    }
}
