use crate::SuiteReport;

mod collision;
mod decomposition;
mod hensel;
mod linear;
mod normal_form;
mod partial_addition;
mod qe;
mod rv_equivalence;

pub(crate) fn run(id: u8, seed: u64, report: &mut SuiteReport) {
    match id {
        1 => rv_equivalence::run(seed, report),
        2 => partial_addition::run(seed, report),
        3 => hensel::run(seed, report),
        4 => collision::run(seed, report),
        5 => decomposition::run(seed, report),
        6 => linear::run(seed, report),
        7 => qe::run(seed, report),
        8 => normal_form::run(seed, report),
        _ => unreachable!("unknown suite {id}"),
    }
}
