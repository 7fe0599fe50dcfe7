//! Word-wise XOR kernels over fixed-width symbols.

/// Expands `$body` once per supported symbol width with `$w` bound as a
/// const generic argument.
macro_rules! with_width {
    ($width:expr, $w:ident => $body:expr) => {
        match $width {
            1 => { const $w: usize = 1; $body }
            2 => { const $w: usize = 2; $body }
            4 => { const $w: usize = 4; $body }
            8 => { const $w: usize = 8; $body }
            16 => { const $w: usize = 16; $body }
            32 => { const $w: usize = 32; $body }
            64 => { const $w: usize = 64; $body }
            other => unreachable!("unsupported symbol width {other}"),
        }
    };
}
pub(crate) use with_width;

#[inline(always)]
pub(crate) fn xor_symbol<const W: usize>(dst: &mut [u8], src: &[u8]) {
    xor_array::<W>(dst.try_into().expect("symbol width"), src.try_into().expect("symbol width"));
}

/// `dst ^= src` on one symbol, a machine word at a time where possible.
#[inline(always)]
pub(crate) fn xor_array<const W: usize>(dst: &mut [u8; W], src: &[u8; W]) {
    if W >= 8 {
        for (d, s) in dst.as_chunks_mut::<8>().0.iter_mut().zip(src.as_chunks::<8>().0) {
            *d = (u64::from_ne_bytes(*d) ^ u64::from_ne_bytes(*s)).to_ne_bytes();
        }
    } else {
        for (d, s) in dst.iter_mut().zip(src) {
            *d ^= *s;
        }
    }
}

#[inline(always)]
pub(crate) fn copy_symbol<const W: usize>(dst: &mut [u8], src: &[u8]) {
    let dst: &mut [u8; W] = dst.try_into().expect("symbol width");
    dst.copy_from_slice(src);
}

/// `dst ^= src` over equal-length slices.
pub fn xor_into(dst: &mut [u8], src: &[u8]) {
    assert_eq!(dst.len(), src.len(), "xor_into length mismatch");
    let mut d = dst.chunks_exact_mut(8);
    let mut s = src.chunks_exact(8);
    for (d, s) in d.by_ref().zip(s.by_ref()) {
        let v = u64::from_ne_bytes(d[..].try_into().unwrap())
            ^ u64::from_ne_bytes(s.try_into().unwrap());
        d.copy_from_slice(&v.to_ne_bytes());
    }
    for (d, s) in d.into_remainder().iter_mut().zip(s.remainder()) {
        *d ^= *s;
    }
}
