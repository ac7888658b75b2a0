pub mod shooting;
