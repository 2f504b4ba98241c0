use serde::Serializer;

/// Finite values as JSON numbers, infinities as the strings `"inf"` / `"-inf"`.
pub fn serialize_extended<S: Serializer>(v: f64, s: S) -> Result<S::Ok, S::Error> {
    if v == f64::INFINITY {
        s.serialize_str("inf")
    } else if v == f64::NEG_INFINITY {
        s.serialize_str("-inf")
    } else {
        s.serialize_f64(v)
    }
}
