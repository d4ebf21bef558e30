use crate::error::{Error, Result};

/// Primitive polynomials for GF(2^m), m = 3..=10 (bit i = coefficient of x^i).
const PRIMITIVE_POLYS: [u32; 8] = [0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409];

/// GF(2^m) with log/antilog tables.
#[derive(Debug, Clone)]
pub struct GaloisField {
    m: u32,
    poly: u32,
    /// `exp[i] = alpha^i`, doubled so products of logs index without reduction.
    exp: Vec<u16>,
    /// `log[x]` for nonzero x; `log[0]` is unused.
    log: Vec<u16>,
}

impl GaloisField {
    pub fn new(m: u32) -> Result<Self> {
        if !(3..=10).contains(&m) {
            return Err(Error::InvalidCode(format!("field degree m={m} outside 3..=10")));
        }
        let poly = PRIMITIVE_POLYS[(m - 3) as usize];
        let size = 1usize << m;
        let order = size - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; size];
        let mut x: u32 = 1;
        for i in 0..order {
            exp[i] = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        debug_assert_eq!(x, 1, "polynomial 0x{poly:x} is not primitive");
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Self { m, poly, exp, log })
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> u32 {
        self.poly
    }

    /// Multiplicative group order `2^m - 1`.
    pub fn order(&self) -> usize {
        (1usize << self.m) - 1
    }

    pub fn size(&self) -> usize {
        1usize << self.m
    }

    /// `alpha^e` for any integer exponent.
    pub fn alpha_pow(&self, e: i64) -> u16 {
        let ord = self.order() as i64;
        self.exp[e.rem_euclid(ord) as usize]
    }

    /// Discrete log of a nonzero element.
    pub fn log(&self, x: u16) -> usize {
        debug_assert!(x != 0, "log of zero");
        self.log[x as usize] as usize
    }

    pub fn add(&self, a: u16, b: u16) -> u16 {
        a ^ b
    }

    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    pub fn inv(&self, a: u16) -> u16 {
        assert!(a != 0, "inverse of zero");
        let l = self.log[a as usize] as usize;
        self.exp[(self.order() - l) % self.order()]
    }

    pub fn div(&self, a: u16, b: u16) -> u16 {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: u16, e: u64) -> u16 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let l = self.log[a as usize] as u64;
        self.exp[((l * e) % self.order() as u64) as usize]
    }
}
