pub mod approx;
pub mod certify;
pub mod deficiency;
pub mod interactions;
pub mod measure;
pub mod spectrum;

use deltaprime::bc::C64;

use crate::output::num;

pub fn complex_cells(z: C64) -> [String; 2] {
    [num(z.re), num(z.im)]
}
