pub mod naive_forward;
